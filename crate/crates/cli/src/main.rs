//! Command-line laboratory for volumes of random sections of `l_p^n` balls:
//! closed-form limit constants, single section-volume estimates, oracle
//! cross-checks, U-statistic and Edgeworth audits, and full Monte Carlo
//! CLT experiments.
//!
//! Every subcommand that takes `--seed` is reproducible byte-for-byte on the
//! same build; check-style subcommands exit nonzero when a pinned invariant
//! fails, so they can gate CI.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use lpsect::edgeworth::predicted_ratio_d1;
use lpsect::estimators::{cf_density_ratio, det_formula_ratio, CfCache, VolumeEstimate};
use lpsect::experiments::{
    run_clt_experiment, run_cube_experiment, run_intersection_experiment, run_mean_expansion,
    samples_to_csv, CubeConfig, EstimatorChoice, ExperimentConfig, IntersectionConfig,
    MeanExpansionConfig, ReplicaOutcome,
};
use lpsect::geometry::section_volume_oracle;
use lpsect::sampling::{build_w_table, sample_haar_basis, RngStream};
use lpsect::specfun::{
    ball_volume, clt_constants, cube_expansion, intersection_constants, PNorm,
};
use lpsect::stats::ls_slope;
use lpsect::ustat::ustat_mc_report;

#[derive(Parser)]
#[command(
    name = "lpsect",
    version,
    about = "Random sections of l_p balls: constants, estimators, experiments",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Suppress informational output (results still go to --out files).
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    /// Characteristic-function quadrature (deterministic, d <= 2, any finite p).
    Cf,
    /// Stable-mixture determinant Monte Carlo (p in (0,2), any d).
    Det,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentKind {
    /// Distribution of the normalized statistic at one (p, d, n).
    Clt,
    /// Mean of the ratio across an n-grid against a + b/n.
    Mean,
    /// Parallel sections of the cube at offset x.
    Cube,
    /// Minkowski functional of the intersection body.
    Intersection,
}

#[derive(Subcommand)]
enum Command {
    /// Print the limit constants (a, b, sigma^2) or their cube/intersection
    /// variants.
    Constants(ConstantsArgs),
    /// One section-volume ratio estimate on a seeded Haar subspace.
    Estimate(EstimateArgs),
    /// Replicated Monte Carlo experiments with report files.
    Experiment(ExperimentArgs),
    /// Estimators against the exact low-dimensional section oracles.
    OracleCompare(OracleCompareArgs),
    /// Monte Carlo audit of the U-statistic closed forms.
    UstatCheck(UstatCheckArgs),
    /// Decay of the density-expansion remainder on a fixed direction.
    EdgeworthCheck(EdgeworthCheckArgs),
}

#[derive(Args)]
struct ConstantsArgs {
    /// Ball exponent p (finite).
    #[arg(long, required_unless_present = "cube")]
    p: Option<f64>,
    /// Codimension d.
    #[arg(long, default_value_t = 1)]
    d: u32,
    /// Cube section constants a(x), b(x), Sigma(x)^2 instead.
    #[arg(long)]
    cube: bool,
    /// Section offset x for --cube.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    x: f64,
    /// Intersection-body constants (1/a, b/a^2, Sigma^2/a^4) instead.
    #[arg(long, conflicts_with = "cube")]
    intersection: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum)]
    method: Method,
    /// Inner Monte Carlo samples for --method det.
    #[arg(long, default_value_t = 100_000)]
    inner_samples: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, value_enum)]
    kind: ExperimentKind,
    /// Ball exponent p (ignored by --kind cube).
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Single n (clt/intersection) when --grid is not given.
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated n-grid (mean/cube).
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<usize>>,
    /// Cube section offset.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    x: f64,
    #[arg(long, default_value_t = 500)]
    replicas: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Method::Cf)]
    method: Method,
    /// Inner-noise budget delta for the determinant path.
    #[arg(long)]
    inner_delta: Option<f64>,
    /// Report JSON path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-replica samples CSV path.
    #[arg(long)]
    samples_out: Option<PathBuf>,
    /// Embed per-replica samples in the report JSON.
    #[arg(long)]
    embed_replicas: bool,
}

#[derive(Args)]
struct OracleCompareArgs {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value_t = 20)]
    cases: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Inner samples for the determinant side (skipped unless p < 2).
    #[arg(long, default_value_t = 1_000_000)]
    inner_samples: u64,
}

#[derive(Args)]
struct UstatCheckArgs {
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EdgeworthCheckArgs {
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// n-grid for the remainder decay (comma-separated).
    #[arg(long, value_delimiter = ',', default_value = "200,400,800,1600")]
    grid: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    if let Ok(threads) = std::env::var("LPSECT_THREADS") {
        if let Ok(t) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
        }
    }
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(ok) => {
            if ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    };
    std::process::exit(code);
}

fn emit(quiet: bool, text: &str) {
    if !quiet {
        println!("{text}");
    }
}

fn write_or_print(path: &Option<PathBuf>, quiet: bool, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => emit(quiet, text),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    let quiet = cli.quiet;
    match cli.command {
        Command::Constants(args) => cmd_constants(args, quiet),
        Command::Estimate(args) => cmd_estimate(args, quiet),
        Command::Experiment(args) => cmd_experiment(args, quiet),
        Command::OracleCompare(args) => cmd_oracle_compare(args, quiet),
        Command::UstatCheck(args) => cmd_ustat_check(args, quiet),
        Command::EdgeworthCheck(args) => cmd_edgeworth_check(args, quiet),
    }
}

fn cmd_constants(args: ConstantsArgs, quiet: bool) -> Result<bool> {
    if args.cube {
        let e = cube_expansion(args.x);
        let text = match args.format {
            Format::Json => serde_json::to_string_pretty(&e)?,
            Format::Csv => format!("a,b,sigma2\n{:.17e},{:.17e},{:.17e}", e.a, e.b, e.sigma2),
        };
        emit(quiet, &text);
        return Ok(true);
    }
    let p = PNorm::new(args.p.expect("clap enforces --p"))?;
    if args.intersection {
        let c = intersection_constants(p)?;
        let text = match args.format {
            Format::Json => serde_json::to_string_pretty(&c)?,
            Format::Csv => format!(
                "center,shift,variance\n{:.17e},{:.17e},{:.17e}",
                c.center, c.shift, c.variance
            ),
        };
        emit(quiet, &text);
        return Ok(true);
    }
    let c = clt_constants(p, args.d)?;
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&c)?,
        Format::Csv => format!("a,b,sigma2\n{:.17e},{:.17e},{:.17e}", c.a, c.b, c.sigma2),
    };
    emit(quiet, &text);
    Ok(true)
}

fn cmd_estimate(args: EstimateArgs, quiet: bool) -> Result<bool> {
    let p = PNorm::new(args.p)?;
    let mut s = RngStream::new(args.seed, 0);
    let basis = sample_haar_basis(args.n, args.d, &mut s)?;
    let est: VolumeEstimate = match args.method {
        Method::Cf => {
            let cache = CfCache::new(p)?;
            cf_density_ratio(&cache, &basis)?
        }
        Method::Det => {
            let table = build_w_table(args.p / 2.0, 1e-8)?;
            det_formula_ratio(p, &basis, &table, args.inner_samples, &mut s)?
        }
    };
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&est)?,
        Format::Csv => format!(
            "value,stderr,samples\n{:.17e},{:.17e},{}",
            est.value, est.stderr, est.samples
        ),
    };
    emit(quiet, &text);
    Ok(true)
}

fn write_samples(path: &Option<PathBuf>, replicas: &[ReplicaOutcome]) -> Result<()> {
    if let Some(p) = path {
        std::fs::write(p, samples_to_csv(replicas))
            .with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs, quiet: bool) -> Result<bool> {
    let estimator = match args.method {
        Method::Cf => EstimatorChoice::CfQuadrature,
        Method::Det => EstimatorChoice::DetFormula,
    };
    match args.kind {
        ExperimentKind::Clt => {
            let n = args.n.context("--kind clt needs --n")?;
            let cfg = ExperimentConfig {
                p: args.p,
                d: args.d,
                n,
                replicas: args.replicas,
                seed: args.seed,
                estimator,
                inner_delta: args.inner_delta,
            };
            let mut report = run_clt_experiment(&cfg)?;
            write_samples(&args.samples_out, &report.replicas)?;
            if !args.embed_replicas {
                report.replicas.clear();
            }
            write_or_print(&args.out, quiet, &serde_json::to_string_pretty(&report)?)?;
        }
        ExperimentKind::Mean => {
            let grid = args.grid.context("--kind mean needs --grid")?;
            let cfg = MeanExpansionConfig {
                p: args.p,
                d: args.d,
                grid,
                replicas: args.replicas,
                seed: args.seed,
                estimator,
                inner_delta: args.inner_delta,
            };
            let report = run_mean_expansion(&cfg)?;
            write_or_print(&args.out, quiet, &serde_json::to_string_pretty(&report)?)?;
        }
        ExperimentKind::Cube => {
            let grid = match (args.grid, args.n) {
                (Some(g), _) => g,
                (None, Some(n)) => vec![n],
                (None, None) => bail!("--kind cube needs --grid or --n"),
            };
            let cfg = CubeConfig {
                x: args.x,
                grid,
                replicas: args.replicas,
                seed: args.seed,
            };
            let mut report = run_cube_experiment(&cfg)?;
            if let Some(row) = report.rows.last() {
                write_samples(&args.samples_out, &row.replicas)?;
            }
            if !args.embed_replicas {
                for row in &mut report.rows {
                    row.replicas.clear();
                }
            }
            write_or_print(&args.out, quiet, &serde_json::to_string_pretty(&report)?)?;
        }
        ExperimentKind::Intersection => {
            let n = args.n.context("--kind intersection needs --n")?;
            let cfg = IntersectionConfig {
                p: args.p,
                n,
                replicas: args.replicas,
                seed: args.seed,
            };
            let mut report = run_intersection_experiment(&cfg)?;
            write_samples(&args.samples_out, &report.replicas)?;
            if !args.embed_replicas {
                report.replicas.clear();
            }
            write_or_print(&args.out, quiet, &serde_json::to_string_pretty(&report)?)?;
        }
    }
    Ok(true)
}

fn cmd_oracle_compare(args: OracleCompareArgs, quiet: bool) -> Result<bool> {
    let p = PNorm::new(args.p)?;
    let k = args.n.checked_sub(args.d).context("need n > d")?;
    if !(1..=2).contains(&k) {
        bail!("oracle comparison needs section dimension n - d in {{1, 2}}");
    }
    let cache = if args.d <= 2 { Some(CfCache::new(p)?) } else { None };
    let table = if p.supports_det_formula() {
        Some(build_w_table(args.p / 2.0, 1e-8)?)
    } else {
        None
    };
    let vol_section = ball_volume(p, k as u32)?;
    let mut max_cf_err: f64 = 0.0;
    let mut max_det_z: f64 = 0.0;
    for case in 0..args.cases {
        let mut s = RngStream::new(args.seed, case as u64);
        let basis = sample_haar_basis(args.n, args.d, &mut s)?;
        let oracle = section_volume_oracle(p, &basis)? / vol_section;
        if let Some(c) = &cache {
            let est = cf_density_ratio(c, &basis)?;
            max_cf_err = max_cf_err.max((est.value - oracle).abs());
        }
        if let Some(t) = &table {
            let est = det_formula_ratio(p, &basis, t, args.inner_samples, &mut s)?;
            max_det_z = max_det_z.max((est.value - oracle).abs() / est.stderr);
        }
    }
    let pass = max_cf_err < 1e-6 && max_det_z < 3.0;
    emit(
        quiet,
        &serde_json::to_string_pretty(&serde_json::json!({
            "p": args.p,
            "n": args.n,
            "d": args.d,
            "cases": args.cases,
            "max_cf_abs_error": max_cf_err,
            "max_det_z_score": max_det_z,
            "pass": pass,
        }))?,
    );
    Ok(pass)
}

fn cmd_ustat_check(args: UstatCheckArgs, quiet: bool) -> Result<bool> {
    if !(1..=3).contains(&args.d) {
        bail!("ustat-check supports d in {{1,2,3}}");
    }
    let mut s = RngStream::new(args.seed, 0);
    let report = ustat_mc_report(args.d, args.samples, &mut s);
    let pass = report.max_abs_z() < 4.0;
    let text = serde_json::to_string_pretty(&report)?;
    write_or_print(&args.out, quiet, &text)?;
    if !quiet {
        println!("max |z| = {:.3} -> {}", report.max_abs_z(), if pass { "pass" } else { "FAIL" });
    }
    Ok(pass)
}

fn cmd_edgeworth_check(args: EdgeworthCheckArgs, quiet: bool) -> Result<bool> {
    if args.grid.len() < 3 {
        bail!("edgeworth-check needs at least 3 grid points");
    }
    let p = PNorm::new(args.p)?;
    let cache = CfCache::new(p)?;
    let n_max = *args.grid.iter().max().unwrap();
    let mut s = RngStream::new(args.seed, 0);
    let g_full: Vec<f64> = (0..n_max).map(|_| s.std_normal()).collect();
    let mut rows = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &n in &args.grid {
        let g = &g_full[..n];
        let norm: f64 = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        let unit: Vec<f64> = g.iter().map(|v| v / norm).collect();
        let basis = lpsect::geometry::SubspaceBasis::from_rows(unit, 1, n)?;
        let quadrature = cf_density_ratio(&cache, &basis)?.value;
        let predicted = predicted_ratio_d1(p, g)?.predicted;
        let err = (quadrature - predicted).abs();
        rows.push(serde_json::json!({
            "n": n,
            "quadrature": quadrature,
            "predicted": predicted,
            "abs_error": err,
        }));
        xs.push((n as f64).ln());
        ys.push(err.max(1e-300).ln());
    }
    let slope = ls_slope(&xs, &ys);
    let pass = slope <= -1.2;
    let text = serde_json::to_string_pretty(&serde_json::json!({
        "p": args.p,
        "grid": args.grid,
        "rows": rows,
        "log_log_slope": slope,
        "pass": pass,
    }))?;
    write_or_print(&args.out, quiet, &text)?;
    Ok(pass)
}
