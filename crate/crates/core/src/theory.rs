//! Budget ratio and counting bounds, evaluated on concrete instances.
//!
//! Asymptotic constants are never estimated. Each bound is stated with the
//! measured quantities of the instance in their place: the attained profile
//! count `D(G, A)`, the spectral codebook size, and the extreme bucket
//! balance and collision values. The resulting inequalities are exact
//! combinatorial facts and must hold on every instance.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::observation::{
    bucket_diagnostics, optimal_error, BucketDiagnostics, Frac, ObservationTable,
};
use crate::spectral::{codebook_size, QuantizedCodes};

/// Inputs of the information budget
/// `k ln ln n + c_ent m ln(C_ent / eta)` against `ln n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetInputs {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub eta: f64,
    /// Exponent constant `c_ent` (1 for energy embeddings).
    pub c_ent: f64,
    /// Alphabet constant `C_ent` (2 for energy embeddings).
    pub alphabet: f64,
}

impl BudgetInputs {
    /// Energy-embedding constants `c_ent = 1`, `C_ent = 2`.
    pub fn new(n: usize, k: usize, m: usize, eta: f64) -> Result<Self> {
        Self::with_constants(n, k, m, eta, 1.0, 2.0)
    }

    pub fn with_constants(
        n: usize,
        k: usize,
        m: usize,
        eta: f64,
        c_ent: f64,
        alphabet: f64,
    ) -> Result<Self> {
        if n < 16 {
            return Err(Error::param(format!("budget ratio needs n >= 16, got {n}")));
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::param(format!("eta must be positive, got {eta}")));
        }
        if !(c_ent > 0.0 && alphabet >= 1.0) {
            return Err(Error::param(
                "entropy constants need c_ent > 0 and C_ent >= 1",
            ));
        }
        Ok(BudgetInputs {
            n,
            k,
            m,
            eta,
            c_ent,
            alphabet,
        })
    }

    /// Numerator of the budget ratio.
    pub fn budget(&self) -> f64 {
        let ln_n = (self.n as f64).ln();
        self.k as f64 * ln_n.ln() + self.c_ent * self.m as f64 * (self.alphabet / self.eta).ln()
    }
}

/// `rho_eng = (k ln ln n + c_ent m ln(C_ent / eta)) / ln n`
pub fn rho_eng(b: &BudgetInputs) -> f64 {
    b.budget() / (b.n as f64).ln()
}

/// Whether the budget sits in the subcritical regime
/// `budget <= (1 - eps0) ln n`. The boundary counts as subcritical.
pub fn subcritical_check(b: &BudgetInputs, epsilon0: f64) -> Result<bool> {
    ratio_is_subcritical(rho_eng(b), epsilon0)
}

/// `rho <= 1 - eps0`, the ratio form of [`subcritical_check`].
pub fn ratio_is_subcritical(rho: f64, epsilon0: f64) -> Result<bool> {
    if !(epsilon0 > 0.0 && epsilon0 < 1.0) {
        return Err(Error::param(format!(
            "epsilon0 must lie in (0, 1), got {epsilon0}"
        )));
    }
    Ok(rho <= 1.0 - epsilon0)
}

/// Same quantity as [`optimal_error`], under its lower-bound name.
pub fn impossibility_floor(t: &ObservationTable) -> f64 {
    optimal_error(t)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub image_size: usize,
    /// `D(G, A)`
    pub profile_count: usize,
    pub codebook_size: usize,
    /// `D(G, A) * |Q(S_m(V))|`
    pub generic_bound: usize,
    pub generic_ok: bool,
    /// `D (1 + beta / coll)` with `beta = max Bal(B)` and `coll = min Coll(B)`
    /// over non-singleton buckets; `None` when no non-singleton bucket
    /// exists or some non-singleton bucket has zero collision.
    pub refined_bound: Option<f64>,
    pub refined_ok: Option<bool>,
}

impl BoundReport {
    /// Every applicable bound holds.
    pub fn all_ok(&self) -> bool {
        self.generic_ok && self.refined_ok.unwrap_or(true)
    }
}

/// Profile count times spectral codebook size.
pub fn generic_image_bound(t: &ObservationTable, codes: &QuantizedCodes) -> BoundReport {
    let codebook = codebook_size(codes);
    let generic_bound = t.profile_count() * codebook;
    BoundReport {
        image_size: t.image_size(),
        profile_count: t.profile_count(),
        codebook_size: codebook,
        generic_bound,
        generic_ok: t.image_size() <= generic_bound,
        refined_bound: None,
        refined_ok: None,
    }
}

/// Generic bound plus the bucketwise collision/balance bound.
pub fn refined_image_bound(t: &ObservationTable, codes: &QuantizedCodes) -> BoundReport {
    let diagnostics = bucket_diagnostics(t);
    refined_image_bound_with(t, codes, &diagnostics)
}

/// As [`refined_image_bound`], reusing already computed diagnostics.
pub fn refined_image_bound_with(
    t: &ObservationTable,
    codes: &QuantizedCodes,
    diagnostics: &BucketDiagnostics,
) -> BoundReport {
    let mut report = generic_image_bound(t, codes);
    let Some((beta, coll)) = refined_constants(diagnostics) else {
        return report;
    };
    let d = t.profile_count() as u128;
    // image <= D (1 + beta / coll)  <=>  image * coll <= D (coll + beta), exactly
    let lhs = t.image_size() as u128 * coll.num * beta.den;
    let rhs = d * (coll.num * beta.den + beta.num * coll.den);
    report.refined_bound = Some(d as f64 * (1.0 + beta.to_f64() / coll.to_f64()));
    report.refined_ok = Some(lhs <= rhs);
    report
}

/// `(max Bal, min Coll)` over non-singleton buckets, when every such bucket
/// has positive collision.
fn refined_constants(diagnostics: &BucketDiagnostics) -> Option<(Frac, Frac)> {
    let mut beta: Option<Frac> = None;
    let mut coll: Option<Frac> = None;
    for bucket in &diagnostics.buckets {
        let c = bucket.collision_frac()?;
        if c.num == 0 {
            return None;
        }
        let bal = bucket.balance_frac();
        beta = Some(beta.map_or(bal, |b| b.max(bal)));
        coll = Some(coll.map_or(c, |x| x.min(c)));
    }
    Some((beta?, coll?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::DistanceProfiles;

    fn table(profile: &[u32], codes: &[i64]) -> ObservationTable {
        let n = profile.len();
        ObservationTable::new(
            DistanceProfiles::from_rows(n, 1, profile.to_vec()).unwrap(),
            QuantizedCodes::from_rows(n, 1, codes.to_vec()).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn rho_reference_values() {
        let r = |n, k, m, eta| rho_eng(&BudgetInputs::new(n, k, m, eta).unwrap());
        assert!((r(500, 6, 0, 0.1) - 1.764).abs() < 5e-4);
        assert!((r(500, 1, 5, 0.1) - 2.704).abs() < 5e-4);
        assert!((r(4000, 1, 5, 0.1) - 2.061).abs() < 5e-4);
    }

    #[test]
    fn rho_monotonicity_on_grid() {
        let r = |n, k, m, eta| rho_eng(&BudgetInputs::new(n, k, m, eta).unwrap());
        for &n in &[16, 100, 500, 4000] {
            for k in 0..8 {
                for m in 0..8 {
                    for &eta in &[0.05, 0.1, 0.5, 0.9, 1.5] {
                        assert!(r(n, k + 1, m, eta) > r(n, k, m, eta));
                        assert!(r(n, k, m + 1, eta) > r(n, k, m, eta));
                        if m > 0 {
                            assert!(r(n, k, m, eta * 1.1) < r(n, k, m, eta));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn budget_domain() {
        assert!(BudgetInputs::new(15, 1, 1, 0.1).is_err());
        assert!(BudgetInputs::new(16, 1, 1, 0.0).is_err());
        assert!(BudgetInputs::new(16, 0, 0, 0.5).is_ok());
    }

    #[test]
    fn subcritical_classification() {
        assert!(ratio_is_subcritical(0.5, 0.3).unwrap());
        assert!(!ratio_is_subcritical(0.8, 0.3).unwrap());
        // closed boundary
        assert!(ratio_is_subcritical(0.5, 0.5).unwrap());
        let b = BudgetInputs::new(500, 6, 0, 0.1).unwrap();
        for eps in [0.01, 0.3, 0.99] {
            assert!(!subcritical_check(&b, eps).unwrap());
        }
        let zero = BudgetInputs::new(500, 0, 0, 0.1).unwrap();
        assert!(subcritical_check(&zero, 0.5).unwrap());
        assert!(subcritical_check(&zero, 0.0).is_err());
        assert!(subcritical_check(&zero, 1.0).is_err());
    }

    #[test]
    fn generic_bound_examples() {
        let t = table(&[0, 1, 1, 2], &[0, 0, 0, 0]);
        let r = generic_image_bound(&t, t.codes());
        assert_eq!(r.generic_bound, r.image_size);
        assert!(r.generic_ok);

        let t = table(&[0, 0, 1, 1, 2, 2], &[0, 1, 2, 3, 0, 1]);
        let r = generic_image_bound(&t, t.codes());
        assert_eq!(
            (r.profile_count, r.codebook_size, r.generic_bound),
            (3, 4, 12)
        );
    }

    #[test]
    fn refined_bound_single_bucket() {
        let t = table(&[0, 0, 0], &[1, 1, 2]);
        let r = refined_image_bound(&t, t.codes());
        assert!((r.refined_bound.unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(r.refined_ok, Some(true));
        assert_eq!(r.image_size, 2);
    }

    #[test]
    fn refined_bound_not_applicable() {
        let t = table(&[0, 1, 2], &[0, 0, 0]);
        assert_eq!(refined_image_bound(&t, t.codes()).refined_bound, None);
        // a colliding bucket next to a collision-free one
        let t = table(&[0, 0, 1, 1], &[4, 4, 1, 2]);
        let r = refined_image_bound(&t, t.codes());
        assert_eq!(r.refined_ok, None);
        assert!(r.all_ok());
    }

    #[test]
    fn floor_equals_optimal_error() {
        let t = table(&[0, 0, 1, 1], &[0, 0, 0, 0]);
        assert_eq!(impossibility_floor(&t), 0.5);
        assert_eq!(
            impossibility_floor(&t).to_bits(),
            optimal_error(&t).to_bits()
        );
        let t = table(&[0, 1, 2, 3], &[0, 0, 0, 0]);
        assert_eq!(impossibility_floor(&t), 0.0);
    }
}
