//! Hybrid positional encodings on graphs and how well they identify vertices.
//!
//! A vertex `v` is observed through the code
//!
//! ```text
//! F(v) = ( d_A(v), Q_eta(S_m(v)) )
//! ```
//!
//! where `d_A(v)` is the tuple of shortest-path distances from `v` to an
//! ordered anchor set and `S_m(v)` holds the squared entries of the first `m`
//! non-trivial eigenvectors of the normalized Laplacian at `v`, quantized at
//! resolution `eta`. The best any decoder can do at recovering a uniformly
//! random vertex from its code is `|Im F| / n`, so everything in this crate
//! reduces to exact counting over the fibers of `F`.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`graph`] | [`Graph`], random regular sampler, edge-list ingestion, BFS, anchor profiles |
//! | [`stats`] | structural statistics (density, diameter, clustering, Gini, ...) |
//! | [`spectral`] | normalized Laplacian, eigensolvers, energy embeddings, quantizers |
//! | [`observation`] | observation table, fiber statistics, bucket collision/balance diagnostics |
//! | [`theory`] | budget ratio, counting bounds checked on concrete instances |
//! | [`harness`] | trials, parameter sweeps, anchor strategies, `k_emp`, CSV export |

pub mod error;
pub mod graph;
pub mod harness;
pub mod observation;
pub mod spectral;
pub mod stats;
pub mod theory;

pub use error::{Error, Result};
pub use graph::{AnchorSet, DistanceProfiles, Graph};
pub use observation::{BucketDiagnostics, FiberStats, ObservationTable};
pub use spectral::{EnergyEmbedding, QuantizedCodes, Quantizer, SpectralBasis};
pub use stats::GraphStats;
