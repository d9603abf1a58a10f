//! Replicated Monte Carlo harnesses: draw Haar subspaces, estimate the
//! normalized section volume, form the statistic `n^(3/2)(ratio - a - b/n)`
//! with the exact constants, and summarize against the predicted Gaussian.
//!
//! Replicas run in parallel on per-replica substreams and are aggregated in
//! replica order, so reports are byte-identical for any worker count.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{
    cf_density_ratio, choose_inner_samples, det_formula_ratio, CfCache,
};
use crate::geometry::cube_parallel_section_oracle;
use crate::sampling::{build_w_table, sample_haar_basis, RngStream, WSamplerTable};
use crate::specfun::{
    clt_constants, cube_expansion, intersection_constants, CltConstants, PNorm,
};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EstimatorChoice {
    DetFormula,
    CfQuadrature,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub p: f64,
    pub d: usize,
    pub n: usize,
    pub replicas: usize,
    pub seed: u64,
    pub estimator: EstimatorChoice,
    /// Inner-noise budget for the determinant path (standard error at most
    /// `delta * n^{-3/2}`).
    pub inner_delta: Option<f64>,
}

impl ExperimentConfig {
    fn validate(&self) -> Result<PNorm> {
        let p = PNorm::new(self.p)?;
        if !p.is_finite() {
            return Err(Error::InvalidParameter(
                "use the cube runner for p = infinity".into(),
            ));
        }
        if self.replicas < 100 {
            return Err(Error::InvalidParameter(
                "distributional experiments need at least 100 replicas".into(),
            ));
        }
        match self.estimator {
            EstimatorChoice::DetFormula if !p.supports_det_formula() => Err(Error::Regime(
                format!("determinant estimator needs p in (0,2), got {}", self.p),
            )),
            EstimatorChoice::CfQuadrature if self.d > 2 => Err(Error::Regime(format!(
                "density inversion covers d <= 2, got d = {}",
                self.d
            ))),
            _ => Ok(p),
        }
    }
}

/// Predicted limit triple echoed into reports.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Predicted {
    pub a: f64,
    pub b: f64,
    pub sigma2: f64,
}

impl From<CltConstants> for Predicted {
    fn from(c: CltConstants) -> Self {
        Predicted {
            a: c.a,
            b: c.b,
            sigma2: c.sigma2,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReplicaOutcome {
    pub replica: usize,
    pub raw_ratio: f64,
    pub normalized_stat: f64,
}

/// Summary battery for a sample of normalized statistics compared against
/// `N(0, sigma2)`; the KS distance is omitted in the degenerate regime
/// where the limit collapses to a point mass.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryStats {
    pub mean: f64,
    pub var: f64,
    pub skew: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ks: Option<f64>,
    pub w1: f64,
    pub degenerate: bool,
}

pub fn summarize(stats_sample: &[f64], sigma2: f64) -> SummaryStats {
    let degenerate = sigma2 < 1e-14;
    let sd = sigma2.sqrt();
    SummaryStats {
        mean: stats::mean(stats_sample),
        var: stats::variance(stats_sample),
        skew: stats::skewness(stats_sample),
        ks: if degenerate {
            None
        } else {
            Some(stats::ks_distance_to_normal(stats_sample, 0.0, sd))
        },
        w1: wasserstein1(stats_sample, 0.0, sd),
        degenerate,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub predicted: Predicted,
    pub summary: SummaryStats,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub replicas: Vec<ReplicaOutcome>,
    pub wall_clock_secs: f64,
}

enum SharedEstimator {
    Det { table: WSamplerTable, m: u64 },
    Cf(CfCache),
}

/// Distributional check of the section-volume CLT at one `(p, d, n)`.
pub fn run_clt_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = std::time::Instant::now();
    let p = cfg.validate()?;
    let constants = clt_constants(p, cfg.d as u32)?;
    let shared = match cfg.estimator {
        EstimatorChoice::DetFormula => SharedEstimator::Det {
            table: build_w_table(cfg.p / 2.0, 1e-8)?,
            m: choose_inner_samples(cfg.n, cfg.inner_delta.unwrap_or(0.3)),
        },
        EstimatorChoice::CfQuadrature => SharedEstimator::Cf(CfCache::new(p)?),
    };
    let scale = (cfg.n as f64).powf(1.5);
    let replicas: Vec<ReplicaOutcome> = (0..cfg.replicas)
        .into_par_iter()
        .map(|i| -> Result<ReplicaOutcome> {
            let mut s = RngStream::new(cfg.seed, i as u64);
            let basis = sample_haar_basis(cfg.n, cfg.d, &mut s)?;
            let est = match &shared {
                SharedEstimator::Det { table, m } => {
                    det_formula_ratio(p, &basis, table, *m, &mut s)?
                }
                SharedEstimator::Cf(cache) => cf_density_ratio(cache, &basis)?,
            };
            Ok(ReplicaOutcome {
                replica: i,
                raw_ratio: est.value,
                normalized_stat: scale
                    * (est.value - constants.a - constants.b / cfg.n as f64),
            })
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| match e {
            Error::NonConvergence(m) => Error::NonConvergence(format!("replica failed: {m}")),
            other => other,
        })?;
    let sample: Vec<f64> = replicas.iter().map(|r| r.normalized_stat).collect();
    Ok(ExperimentReport {
        config: cfg.clone(),
        predicted: constants.into(),
        summary: summarize(&sample, constants.sigma2),
        replicas,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MeanExpansionConfig {
    pub p: f64,
    pub d: usize,
    pub grid: Vec<usize>,
    pub replicas: usize,
    pub seed: u64,
    pub estimator: EstimatorChoice,
    pub inner_delta: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeanExpansionRow {
    pub n: usize,
    pub mean_ratio: f64,
    /// `a + b/n`.
    pub predicted_mean: f64,
    /// `mean_ratio - a - b/n`.
    pub residual: f64,
    /// Monte Carlo floor `sigma n^{-3/2} / sqrt(R)` for the mean.
    pub floor: f64,
    /// `(mean_ratio - a) n`, which should approach b.
    pub b_estimate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeanExpansionReport {
    pub config: MeanExpansionConfig,
    pub predicted: Predicted,
    pub rows: Vec<MeanExpansionRow>,
    /// Fitted decay exponent of `|residual|` against n (positive number).
    pub residual_decay_exponent: f64,
    /// Every residual within twice its Monte Carlo floor.
    pub residuals_at_floor: bool,
    pub wall_clock_secs: f64,
}

/// Mean of the ratio across an n-grid against the second-order expansion.
pub fn run_mean_expansion(cfg: &MeanExpansionConfig) -> Result<MeanExpansionReport> {
    let start = std::time::Instant::now();
    if cfg.grid.len() < 3 || cfg.grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "mean expansion needs an increasing n-grid with at least 3 points".into(),
        ));
    }
    let constants = clt_constants(PNorm::new(cfg.p)?, cfg.d as u32)?;
    let mut rows = Vec::with_capacity(cfg.grid.len());
    for (gi, &n) in cfg.grid.iter().enumerate() {
        let sub = ExperimentConfig {
            p: cfg.p,
            d: cfg.d,
            n,
            replicas: cfg.replicas,
            seed: cfg.seed.wrapping_add((gi as u64) << 32),
            estimator: cfg.estimator,
            inner_delta: cfg.inner_delta,
        };
        let report = run_clt_experiment(&sub)?;
        let mean_ratio = stats::mean(
            &report.replicas.iter().map(|r| r.raw_ratio).collect::<Vec<_>>(),
        );
        let predicted_mean = constants.a + constants.b / n as f64;
        let floor = constants.sigma2.sqrt() * (n as f64).powf(-1.5)
            / (cfg.replicas as f64).sqrt();
        rows.push(MeanExpansionRow {
            n,
            mean_ratio,
            predicted_mean,
            residual: mean_ratio - predicted_mean,
            floor,
            b_estimate: (mean_ratio - constants.a) * n as f64,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = rows
        .iter()
        .map(|r| r.residual.abs().max(1e-300).ln())
        .collect();
    let residual_decay_exponent = -stats::ls_slope(&xs, &ys);
    let residuals_at_floor = rows.iter().all(|r| r.residual.abs() <= 2.0 * r.floor);
    Ok(MeanExpansionReport {
        config: cfg.clone(),
        predicted: constants.into(),
        rows,
        residual_decay_exponent,
        residuals_at_floor,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CubeConfig {
    pub x: f64,
    pub grid: Vec<usize>,
    pub replicas: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CubeRow {
    pub n: usize,
    pub predicted: Predicted,
    pub summary: SummaryStats,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub replicas: Vec<ReplicaOutcome>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CubeReport {
    pub config: CubeConfig,
    pub rows: Vec<CubeRow>,
    pub wall_clock_secs: f64,
}

/// Parallel-section experiment for the cube at offset `x`: the deterministic
/// section oracle on Haar directions against `a(x), b(x), Sigma(x)^2`.
pub fn run_cube_experiment(cfg: &CubeConfig) -> Result<CubeReport> {
    let start = std::time::Instant::now();
    if cfg.grid.is_empty() || cfg.replicas < 100 {
        return Err(Error::InvalidParameter(
            "cube experiment needs an n-grid and at least 100 replicas".into(),
        ));
    }
    let e = cube_expansion(cfg.x);
    let predicted = Predicted {
        a: e.a,
        b: e.b,
        sigma2: e.sigma2,
    };
    let mut rows = Vec::with_capacity(cfg.grid.len());
    for (gi, &n) in cfg.grid.iter().enumerate() {
        let scale = (n as f64).powf(1.5);
        let replicas: Vec<ReplicaOutcome> = (0..cfg.replicas)
            .into_par_iter()
            .map(|i| -> Result<ReplicaOutcome> {
                let mut s =
                    RngStream::new(cfg.seed.wrapping_add((gi as u64) << 32), i as u64);
                let basis = sample_haar_basis(n, 1, &mut s)?;
                let density = cube_parallel_section_oracle(cfg.x, &basis)?;
                Ok(ReplicaOutcome {
                    replica: i,
                    raw_ratio: density,
                    normalized_stat: scale * (density - e.a - e.b / n as f64),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let sample: Vec<f64> = replicas.iter().map(|r| r.normalized_stat).collect();
        rows.push(CubeRow {
            n,
            predicted,
            summary: summarize(&sample, e.sigma2),
            replicas,
        });
    }
    Ok(CubeReport {
        config: cfg.clone(),
        rows,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct IntersectionConfig {
    pub p: f64,
    pub n: usize,
    pub replicas: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntersectionReport {
    pub config: IntersectionConfig,
    /// `(1/a, b/a^2, Sigma^2/a^4)` echoed as (a = center, b = shift,
    /// sigma2 = variance) of the reciprocal statistic.
    pub predicted: Predicted,
    pub summary: SummaryStats,
    /// Largest pathwise defect of the exact delta-method identity
    /// `s_rec + s/a^2 = n^(3/2) (ratio-a)^2 / (ratio a^2)`.
    pub delta_identity_defect: f64,
    /// Largest quadratic remainder `n^(3/2) (ratio-a)^2 / (ratio a^2)`.
    pub delta_remainder_max: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub replicas: Vec<ReplicaOutcome>,
    pub wall_clock_secs: f64,
}

/// CLT for the Minkowski functional of the intersection body on a random
/// spherical direction: the reciprocal ratio `1/ratio` against
/// `N(0, Sigma^2/a^4)` after centering at `1/a - b/(n a^2)`.
pub fn run_intersection_experiment(cfg: &IntersectionConfig) -> Result<IntersectionReport> {
    let start = std::time::Instant::now();
    if cfg.replicas < 100 {
        return Err(Error::InvalidParameter(
            "intersection experiment needs at least 100 replicas".into(),
        ));
    }
    let p = PNorm::new(cfg.p)?;
    let c = clt_constants(p, 1)?;
    let ic = intersection_constants(p)?;
    let cache = CfCache::new(p)?;
    let scale = (cfg.n as f64).powf(1.5);
    let results: Vec<(ReplicaOutcome, f64, f64)> = (0..cfg.replicas)
        .into_par_iter()
        .map(|i| -> Result<(ReplicaOutcome, f64, f64)> {
            let mut s = RngStream::new(cfg.seed, i as u64);
            let basis = sample_haar_basis(cfg.n, 1, &mut s)?;
            let ratio = cf_density_ratio(&cache, &basis)?.value;
            let stat_rec = scale * (1.0 / ratio - ic.center + ic.shift / cfg.n as f64);
            let stat = scale * (ratio - c.a - c.b / cfg.n as f64);
            // Exact algebraic identity behind the delta method.
            let remainder = scale * (ratio - c.a).powi(2) / (ratio * c.a * c.a);
            let defect = (stat_rec + stat / (c.a * c.a) - remainder).abs();
            Ok((
                ReplicaOutcome {
                    replica: i,
                    raw_ratio: ratio,
                    normalized_stat: stat_rec,
                },
                defect,
                remainder.abs(),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let replicas: Vec<ReplicaOutcome> = results.iter().map(|r| r.0).collect();
    let delta_identity_defect = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let delta_remainder_max = results.iter().map(|r| r.2).fold(0.0, f64::max);
    let sample: Vec<f64> = replicas.iter().map(|r| r.normalized_stat).collect();
    Ok(IntersectionReport {
        config: cfg.clone(),
        predicted: Predicted {
            a: ic.center,
            b: ic.shift,
            sigma2: ic.variance,
        },
        summary: summarize(&sample, ic.variance),
        delta_identity_defect,
        delta_remainder_max,
        replicas,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    })
}

/// Empirical 1-Wasserstein distance between `samples` and `N(mean, sd^2)`
/// through the quantile representation: the sorted sample against the normal
/// quantiles at the midpoints `(i - 1/2)/R`.
pub fn wasserstein1(samples: &[f64], mean: f64, sd: f64) -> f64 {
    assert!(samples.len() >= 2, "need at least two samples");
    assert!(sd >= 0.0);
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let r = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let q = if sd == 0.0 {
                mean
            } else {
                mean + sd * stats::normal_quantile((i as f64 + 0.5) / r)
            };
            (x - q).abs()
        })
        .sum::<f64>()
        / r
}

/// Writes per-replica samples as CSV (`replica,raw_ratio,normalized_stat`).
pub fn samples_to_csv(replicas: &[ReplicaOutcome]) -> String {
    let mut out = String::from("replica,raw_ratio,normalized_stat\n");
    for r in replicas {
        out.push_str(&format!(
            "{},{:.17e},{:.17e}\n",
            r.replica, r.raw_ratio, r.normalized_stat
        ));
    }
    out
}
