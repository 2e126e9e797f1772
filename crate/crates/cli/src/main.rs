//! Command-line front end. Every subcommand maps flags onto library calls;
//! human-readable output goes to stdout, progress and warnings to stderr.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anchorcode::graph::{
    from_edge_list, largest_connected_component, random_regular, write_edge_list, write_label_tsv,
};
use anchorcode::harness::{
    analyze_graph, kemp_table, read_csv, run_sweep_with_jobs, write_csv, write_csv_to,
    AnchorStrategy, Eta, Feature, GraphInstance, MetricSummary, SweepConfig, SweepResult,
    TrialMetrics, TrialPoint, TrialRecord,
};
use anchorcode::observation::{bucket_diagnostics, BucketAggregate};
use anchorcode::spectral::{
    energy_embedding, low_frequency_basis, normalized_laplacian, write_basis_tsv,
    write_embedding_tsv, Quantizer, DEGENERACY_TOL,
};
use anchorcode::stats::structural_stats;
use anchorcode::{Error, Graph, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "anchorcode",
    version,
    about = "Vertex identifiability under anchor-distance and spectral codes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a connected random r-regular graph and write its edge list.
    GenRegular(GenRegular),
    /// Structural statistics of a graph.
    GraphStats(GraphStatsCmd),
    /// Evaluate one configuration on one graph.
    Analyze(Analyze),
    /// Run a parameter grid and write one CSV row per trial.
    Sweep(Sweep),
    /// Empirical anchor thresholds from a sweep CSV.
    Kemp(Kemp),
    /// Per-bucket collision and balance diagnostics of one instance.
    DiagnoseBuckets(Analyze),
}

#[derive(Args)]
struct GenRegular {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    r: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Edge list destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "source")]
struct GraphSource {
    /// Whitespace-separated edge list.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Random regular graph given as N,R.
    #[arg(long, value_parser = parse_regular)]
    regular: Option<(usize, usize)>,
}

#[derive(Args)]
struct GraphOptions {
    #[command(flatten)]
    source: GraphSource,
    /// Seed of the random graph and of every anchor draw.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Keep an edge-list graph whole instead of restricting it to its
    /// largest connected component.
    #[arg(long)]
    no_lcc: bool,
    /// Write the token-to-id mapping of an edge-list graph.
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Args)]
struct GraphStatsCmd {
    #[command(flatten)]
    graph: GraphOptions,
}

#[derive(Args)]
struct Analyze {
    #[command(flatten)]
    graph: GraphOptions,
    #[arg(long)]
    anchors: usize,
    #[arg(long, default_value = "random")]
    strategy: AnchorStrategy,
    #[arg(long, default_value_t = 0)]
    m: usize,
    #[arg(long, default_value = "0.1")]
    eta: Eta,
    #[arg(long, default_value = "relative")]
    quantizer: Quantizer,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    scaled: bool,
    #[arg(long, default_value = "full")]
    feature: Feature,
    /// Anchor draws; diagnose-buckets reports the last one.
    #[arg(long, default_value_t = 1)]
    resamples: usize,
    /// Machine-readable rows in the sweep schema.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write eigenpairs and the energy embedding as TSV files with this
    /// path prefix.
    #[arg(long)]
    dump_spectral: Option<PathBuf>,
}

#[derive(Args)]
struct Sweep {
    /// TOML grid file; grid flags are ignored when given.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    m: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    eta: Vec<Eta>,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    resamples: usize,
    #[arg(long, default_value_t = 3)]
    r: usize,
    #[arg(long, default_value = "relative")]
    quantizer: Quantizer,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    scaled: bool,
    #[arg(long, default_value = "full")]
    feature: Feature,
    #[arg(long, default_value = "random")]
    strategy: AnchorStrategy,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.1)]
    threshold: f64,
    /// Record wall time per row (makes the CSV irreproducible).
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; all available cores when omitted.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct Kemp {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "0.1")]
    threshold: String,
}

fn parse_regular(s: &str) -> std::result::Result<(usize, usize), String> {
    let (n, r) = s.split_once(',').ok_or("expected N,R")?;
    let n = n.trim().parse().map_err(|_| format!("bad N '{n}'"))?;
    let r = r.trim().parse().map_err(|_| format!("bad R '{r}'"))?;
    Ok((n, r))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if err.is_parameter() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::GenRegular(cmd) => gen_regular(cmd),
        Command::GraphStats(cmd) => graph_stats(cmd),
        Command::Analyze(cmd) => analyze(cmd),
        Command::Sweep(cmd) => sweep(cmd),
        Command::Kemp(cmd) => kemp(cmd),
        Command::DiagnoseBuckets(cmd) => diagnose_buckets(cmd),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::from(e).context(format!("cannot create {}", path.display())))
}

fn gen_regular(cmd: GenRegular) -> Result<()> {
    let g = random_regular(cmd.n, cmd.r, cmd.seed)?;
    match cmd.out {
        Some(path) => write_edge_list(&g, create(&path)?),
        None => write_edge_list(&g, io::stdout().lock()),
    }
}

/// The graph and its degree if it is a sampled regular graph.
fn load_graph(opts: &GraphOptions) -> Result<(Graph, usize)> {
    if let Some((n, r)) = opts.source.regular {
        return Ok((random_regular(n, r, opts.seed)?, r));
    }
    let path = opts
        .source
        .graph
        .as_ref()
        .expect("clap enforces one source");
    let file = File::open(path)
        .map_err(|e| Error::from(e).context(format!("cannot open {}", path.display())))?;
    let import = from_edge_list(BufReader::new(file))?;
    if import.duplicates_dropped + import.self_loops_dropped > 0 {
        log::warn!(
            "dropped {} duplicate edges and {} self-loops",
            import.duplicates_dropped,
            import.self_loops_dropped
        );
    }
    let (graph, labels) = if opts.no_lcc {
        (import.graph, import.labels)
    } else {
        let (lcc, keep) = largest_connected_component(&import.graph)?;
        if lcc.n() < import.graph.n() {
            log::info!(
                "kept largest component: {} of {} vertices",
                lcc.n(),
                import.graph.n()
            );
        }
        let labels = keep.iter().map(|&v| import.labels[v].clone()).collect();
        (lcc, labels)
    };
    if let Some(out) = &opts.labels {
        write_label_tsv(&labels, create(out)?)?;
    }
    Ok((graph, 0))
}

fn graph_stats(cmd: GraphStatsCmd) -> Result<()> {
    let (g, _) = load_graph(&cmd.graph)?;
    let s = structural_stats(&g)?;
    let mut out = io::stdout().lock();
    writeln!(out, "n\t{}", s.n)?;
    writeln!(out, "edges\t{}", s.edge_count)?;
    writeln!(out, "avg_degree\t{:.3}", s.avg_degree)?;
    writeln!(out, "density\t{:.4}", s.density)?;
    writeln!(out, "diameter\t{}", s.diameter)?;
    writeln!(
        out,
        "avg_shortest_path_length\t{:.3}",
        s.avg_shortest_path_length
    )?;
    writeln!(out, "avg_clustering\t{:.3}", s.avg_clustering)?;
    writeln!(out, "transitivity\t{:.3}", s.transitivity)?;
    writeln!(out, "degree_variance\t{:.3}", s.degree_variance)?;
    writeln!(out, "degree_gini\t{:.3}", s.degree_gini)?;
    Ok(())
}

fn analysis_input(cmd: &Analyze) -> Result<(GraphInstance, TrialPoint)> {
    if cmd.anchors == 0 {
        return Err(Error::param("--anchors must be at least 1"));
    }
    let (graph, r) = load_graph(&cmd.graph)?;
    let m_max = if cmd.feature.uses_spectral() {
        cmd.m
    } else {
        0
    };
    let point = TrialPoint {
        n: graph.n(),
        r,
        k: cmd.anchors,
        m: cmd.m,
        eta: cmd.eta.clone(),
        quantizer: cmd.quantizer,
        scaled: cmd.scaled,
        feature: cmd.feature,
        anchor_strategy: cmd.strategy,
    };
    if let Some(prefix) = &cmd.dump_spectral {
        dump_spectral(&graph, cmd.m, cmd.scaled, prefix)?;
    }
    Ok((
        GraphInstance::new(graph, cmd.graph.seed, m_max, cmd.scaled)?,
        point,
    ))
}

fn dump_spectral(g: &Graph, m: usize, scaled: bool, prefix: &Path) -> Result<()> {
    let op = normalized_laplacian(g)?;
    let basis = low_frequency_basis(&op, m, DEGENERACY_TOL)?;
    if basis.degeneracy_flag() {
        log::warn!("retained eigenvalues are degenerate; individual eigenvectors are not unique");
    }
    let with_suffix = |suffix: &str| {
        let mut p = prefix.as_os_str().to_owned();
        p.push(suffix);
        PathBuf::from(p)
    };
    write_basis_tsv(&basis, create(&with_suffix(".basis.tsv"))?)?;
    write_embedding_tsv(
        &energy_embedding(&basis, m, scaled)?,
        create(&with_suffix(".embedding.tsv"))?,
    )
}

fn analyze(cmd: Analyze) -> Result<()> {
    let (instance, point) = analysis_input(&cmd)?;
    let records = analyze_graph(&instance, &point, cmd.resamples)?;
    print_analysis(&point, &records)?;
    if let Some(path) = &cmd.csv {
        let mut result = SweepResult::from_records(records);
        for r in &mut result.records {
            r.wall_time_ms = None;
        }
        write_csv_to(&result, create(path)?)?;
    }
    Ok(())
}

fn print_analysis(point: &TrialPoint, records: &[TrialRecord]) -> Result<()> {
    let metrics: Vec<&TrialMetrics> = records.iter().filter_map(|r| r.metrics.as_ref()).collect();
    let column = |f: &dyn Fn(&TrialMetrics) -> Option<f64>| {
        MetricSummary::of(&metrics.iter().filter_map(|m| f(m)).collect::<Vec<_>>())
    };
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "n={} k={} strategy={} m={} eta={} quantizer={} scaled={} feature={} resamples={}",
        point.n,
        point.k,
        point.anchor_strategy,
        point.m,
        point.eta,
        point.quantizer,
        point.scaled,
        point.feature,
        records.len()
    )?;
    let rows: [(&str, Option<MetricSummary>); 9] = [
        ("error", column(&|m| Some(m.error))),
        ("image_frac", column(&|m| Some(m.image_frac))),
        ("mean_preimage", column(&|m| Some(m.mean_preimage))),
        ("singleton_frac", column(&|m| Some(m.singleton_frac))),
        ("codebook_size", column(&|m| Some(m.codebook_size as f64))),
        ("profile_count", column(&|m| Some(m.profile_count as f64))),
        ("weighted_collision", column(&|m| m.weighted_collision)),
        ("generic_bound", column(&|m| Some(m.generic_bound as f64))),
        ("refined_bound", column(&|m| m.refined_bound)),
    ];
    writeln!(out, "{:<20}{:>14}{:>14}", "metric", "mean", "stdev")?;
    for (name, s) in rows {
        match s {
            Some(s) => writeln!(out, "{name:<20}{:>14.6}{:>14.6}", s.mean, s.stdev)?,
            None => writeln!(out, "{name:<20}{:>14}{:>14}", "n/a", "n/a")?,
        }
    }
    let ok = metrics.iter().all(|m| m.bounds_ok);
    writeln!(out, "bounds_ok{:>25}", ok)?;
    Ok(())
}

fn diagnose_buckets(cmd: Analyze) -> Result<()> {
    let (instance, point) = analysis_input(&cmd)?;
    if cmd.resamples == 0 {
        return Err(Error::param("--resamples must be at least 1"));
    }
    let table = anchorcode::harness::observe(&instance, &point, cmd.resamples - 1)?;
    let d = bucket_diagnostics(&table);
    let mut out = io::stdout().lock();
    writeln!(out, "buckets\t{}", d.bucket_count)?;
    writeln!(out, "non_singleton_buckets\t{}", d.buckets.len())?;
    writeln!(
        out,
        "singleton_bucket_frac\t{:.6}",
        d.singleton_bucket_fraction
    )?;
    writeln!(
        out,
        "per_bucket_inequality\t{}",
        if d.refined_inequality_holds() {
            "holds"
        } else {
            "VIOLATED"
        }
    )?;
    writeln!(
        out,
        "{:<8}{:>9}{:>14}{:>14}{:>14}{:>14}{:>14}{:>14}",
        "cutoff", "buckets", "w_coll", "mean_coll", "med_coll", "med_M/|B|", "med_bal", "q90_bal"
    )?;
    let rows: [(&str, Option<BucketAggregate>); 3] =
        [(">=2", d.all), (">=3", d.large3), (">=10", d.large10)];
    for (label, agg) in rows {
        match agg {
            Some(a) => writeln!(
                out,
                "{label:<8}{:>9}{:>14.6}{:>14.6}{:>14.6}{:>14.6}{:>14.6}{:>14.6}",
                a.bucket_count,
                a.weighted_collision,
                a.mean_collision,
                a.median_collision,
                a.median_code_ratio,
                a.median_balance,
                a.q90_balance
            )?,
            None => writeln!(out, "{label:<8}{:>9}", 0)?,
        }
    }
    Ok(())
}

fn sweep(cmd: Sweep) -> Result<()> {
    let cfg = match &cmd.config {
        Some(path) => SweepConfig::from_toml_file(path)?,
        None => {
            let mut cfg =
                SweepConfig::new(cmd.n.clone(), cmd.k.clone(), cmd.m.clone(), cmd.eta.clone());
            cfg.trials = cmd.trials;
            cfg.anchor_resamples = cmd.resamples;
            cfg.r = cmd.r;
            cfg.quantizer = cmd.quantizer;
            cfg.scaled = cmd.scaled;
            cfg.feature = cmd.feature;
            cfg.anchor_strategy = cmd.strategy;
            cfg.seed = cmd.seed;
            cfg.error_threshold = cmd.threshold;
            cfg.timing = cmd.timing;
            cfg
        }
    };
    cfg.validate()?;
    // fail on an unwritable destination before doing any work
    drop(create(&cmd.out)?);
    let result = run_sweep_with_jobs(&cfg, cmd.jobs)?;
    let failed = result.failed_count();
    if failed > 0 {
        log::warn!("{failed} of {} rows failed", result.records.len());
    }
    write_csv(&result, &cmd.out)?;
    log::info!(
        "wrote {} rows to {}",
        result.records.len(),
        cmd.out.display()
    );
    Ok(())
}

fn kemp(cmd: Kemp) -> Result<()> {
    let threshold: f64 = cmd
        .threshold
        .parse()
        .map_err(|_| Error::param(format!("threshold '{}' is not a number", cmd.threshold)))?;
    let result = read_csv(&cmd.input)?;
    let rows = kemp_table(&result, threshold)?;
    let mut out = io::stdout().lock();
    writeln!(out, "# threshold {}", cmd.threshold)?;
    writeln!(
        out,
        "n\tr\tm\teta\tquantizer\tscaled\tfeature\tanchor_strategy\tk_emp\trho_eng\timage_frac\tmean_preimage\tcodebook"
    )?;
    let opt = |x: Option<f64>, digits: usize| {
        x.map_or_else(|| "n/a".to_owned(), |v| format!("{v:.digits$}"))
    };
    for row in rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            row.n,
            row.r,
            row.m,
            row.eta,
            row.quantizer,
            row.scaled,
            row.feature,
            row.anchor_strategy,
            row.k_emp
                .map_or_else(|| "none".to_owned(), |k| k.to_string()),
            opt(row.rho_eng, 3),
            opt(row.mean_image_frac, 4),
            opt(row.mean_preimage, 4),
            opt(row.mean_codebook, 2),
        )?;
    }
    Ok(())
}
