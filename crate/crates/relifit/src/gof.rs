//! Model fitting and goodness-of-fit: expected interval lengths, SSE/MSE,
//! single-model fits, and ranked multi-model comparison per release.

use serde::{Deserialize, Serialize};

use crate::error::{FitError, ModelError};
use crate::likelihood::{
    log_likelihood, stationarity_residuals, FreeParam, Objective, PENALTY_BASE,
};
use crate::model::{gamma_from_mu, DebugProbs, IntervalContext, ModelKind, ModelSpec};
use crate::optimizer::{minimize, Bound, SwarmConfig};
use crate::series::FailureSeries;

/// Expected interval lengths under the fitted hazards: `1/lambda_i` for
/// constant-hazard kinds, the Rayleigh mean `sqrt(pi / (2 c_i))` for the
/// time-linear kinds.
pub fn predicted_intervals(
    spec: &ModelSpec,
    series: &FailureSeries,
) -> Result<Vec<f64>, ModelError> {
    let mut out = Vec::with_capacity(series.len());
    for (index, cum_prev, duration) in series.intervals() {
        let ctx = IntervalContext::new(index, cum_prev, duration)?;
        let term = spec.remaining_term(&ctx)?;
        if term <= 0.0 {
            return Err(ModelError::Infeasible {
                interval: index,
                bracket: term,
            });
        }
        let coeff = spec.phi() * term;
        if spec.kind().time_linear() {
            out.push((std::f64::consts::PI / (2.0 * coeff)).sqrt());
        } else {
            out.push(1.0 / coeff);
        }
    }
    Ok(out)
}

/// Sum of squared residuals between observed and expected interval lengths.
pub fn sse(spec: &ModelSpec, series: &FailureSeries) -> Result<f64, ModelError> {
    if series.is_empty() {
        return Err(ModelError::InvalidSpec(
            "SSE needs at least one interval".into(),
        ));
    }
    let expected = predicted_intervals(spec, series)?;
    Ok(series
        .records()
        .iter()
        .zip(expected)
        .map(|(rec, e)| (rec.duration - e) * (rec.duration - e))
        .sum())
}

/// SSE normalized by residual degrees of freedom: `SSE / (m - k_params)`.
pub fn mse(spec: &ModelSpec, series: &FailureSeries, k_params: usize) -> Result<f64, FitError> {
    if series.len() <= k_params {
        return Err(FitError::DegreesOfFreedom {
            intervals: series.len(),
            k_params,
        });
    }
    Ok(sse(spec, series)? / (series.len() - k_params) as f64)
}

/// How gamma is determined when fitting the Proposed kind.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum GammaMode {
    /// Pin gamma to a given value; only phi and N are searched.
    Fixed(f64),
    /// Pin gamma through the acceptance parameter mu.
    FromMu(f64),
    /// Search gamma jointly with phi and N.
    #[default]
    Estimate,
    /// Fit (phi, N) at each gamma on a grid and keep the gamma with the
    /// highest log-likelihood.
    Profile { lo: f64, hi: f64, step: f64 },
}

/// Everything a fit needs besides the data and the model kind.
#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Fixed imperfect-debugging probabilities (never estimated).
    pub debug: DebugProbs,
    /// Gamma handling for the Proposed kind; ignored by the others.
    pub gamma_mode: GammaMode,
    pub swarm: SwarmConfig,
    /// Natural-scale phi search range (log-scaled internally).
    pub phi_bounds: (f64, f64),
    /// Override for the N search range; defaults to
    /// `[total_failures, 10 * total_failures + 10]`.
    pub n_bounds: Option<(f64, f64)>,
    /// Gamma search range for the Estimate mode.
    pub gamma_bounds: (f64, f64),
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            debug: DebugProbs::new(0.95, 0.03).expect("default probabilities are valid"),
            gamma_mode: GammaMode::Estimate,
            swarm: SwarmConfig::default(),
            phi_bounds: (1e-8, 1e-1),
            n_bounds: None,
            gamma_bounds: (1.0, 50.0),
        }
    }
}

impl FitOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.swarm.seed = seed;
        self
    }
}

/// Fitted parameter values; gamma and mu are present only for the Proposed
/// kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedParams {
    pub phi: f64,
    pub n_initial: f64,
    pub n_rounded: u64,
    pub gamma: Option<f64>,
    pub mu: Option<f64>,
}

/// The p/r inputs a fit was run with (absent for kinds that ignore them).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedInputs {
    pub p: Option<f64>,
    pub r: Option<f64>,
}

/// MLE stationarity residuals at the reported optimum; defined for
/// constant-hazard kinds only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaritySummary {
    pub r_phi: f64,
    pub r_n: f64,
}

/// Where the optimum came from, for reproducibility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerMeta {
    pub seed: u64,
    pub pop_size: usize,
    pub max_iters: usize,
    pub evaluations: usize,
    /// Best-so-far objective over the last generations of the run.
    pub trace_tail: Vec<f64>,
}

/// Outcome of fitting one model to one release.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub schema: String,
    pub release_id: String,
    pub model: ModelKind,
    pub params: FittedParams,
    pub fixed: FixedInputs,
    /// Log-likelihood at the continuous optimum.
    pub llf: f64,
    /// Log-likelihood re-evaluated at the integer-rounded N; absent when
    /// rounding makes the spec infeasible.
    pub llf_at_rounded_n: Option<f64>,
    pub sse: f64,
    pub mse: Option<f64>,
    pub stationarity: Option<StationaritySummary>,
    pub optimizer: OptimizerMeta,
    pub feasible: bool,
    pub intervals: usize,
    pub total_failures: u64,
    /// Number of freely estimated parameters (for the MSE denominator).
    pub k_params: usize,
}

pub const FIT_SCHEMA: &str = "relifit/1";

const TRACE_TAIL_LEN: usize = 10;

fn default_n_bounds(series: &FailureSeries) -> (f64, f64) {
    let total = series.total_failures() as f64;
    (total, 10.0 * total + 10.0)
}

struct SingleFit {
    spec: ModelSpec,
    llf: f64,
    meta: OptimizerMeta,
}

fn run_single(
    kind: ModelKind,
    series: &FailureSeries,
    opts: &FitOptions,
    fixed_gamma: Option<f64>,
    gamma_free: bool,
) -> Result<SingleFit, FitError> {
    let mut free = vec![FreeParam::Phi, FreeParam::NInitial];
    let (phi_lo, phi_hi) = opts.phi_bounds;
    let (n_lo, n_hi) = opts.n_bounds.unwrap_or_else(|| default_n_bounds(series));
    let mut bounds = vec![
        Bound::log_scale(phi_lo, phi_hi)?,
        Bound::linear(n_lo, n_hi)?,
    ];
    if gamma_free {
        free.push(FreeParam::Gamma);
        let (g_lo, g_hi) = opts.gamma_bounds;
        bounds.push(Bound::linear(g_lo, g_hi)?);
    }
    let debug = kind.uses_debug_probs().then_some(opts.debug);
    let objective = Objective::new(kind, series.clone(), debug, fixed_gamma, free, bounds)?;
    let result = minimize(|x| objective.penalized(x), objective.bounds(), &opts.swarm)?;
    if result.best_f >= PENALTY_BASE {
        return Err(FitError::NoFeasiblePoint {
            kind,
            release: series.release_id().to_string(),
        });
    }
    let spec = objective.spec_for(&result.best_x)?;
    let tail_start = result.trace.len().saturating_sub(TRACE_TAIL_LEN);
    Ok(SingleFit {
        spec,
        llf: -result.best_f,
        meta: OptimizerMeta {
            seed: opts.swarm.seed,
            pop_size: opts.swarm.pop_size,
            max_iters: opts.swarm.max_iters,
            evaluations: result.evaluations,
            trace_tail: result.trace[tail_start..].to_vec(),
        },
    })
}

/// Fit one model to one release by penalized maximum likelihood.
pub fn fit_model(
    series: &FailureSeries,
    kind: ModelKind,
    opts: &FitOptions,
) -> Result<FitResult, FitError> {
    if series.is_empty() {
        return Err(FitError::Objective(format!(
            "release {} has no intervals to fit",
            series.release_id()
        )));
    }

    let mut gamma_was_estimated = false;
    let best = if kind == ModelKind::Proposed {
        match opts.gamma_mode {
            GammaMode::Fixed(g) => run_single(kind, series, opts, Some(g), false)?,
            GammaMode::FromMu(mu) => {
                let g = gamma_from_mu(mu)?;
                run_single(kind, series, opts, Some(g), false)?
            }
            GammaMode::Estimate => {
                gamma_was_estimated = true;
                run_single(kind, series, opts, None, true)?
            }
            GammaMode::Profile { lo, hi, step } => {
                gamma_was_estimated = true;
                if step.is_nan() || step <= 0.0 || lo < 1.0 || lo > hi {
                    return Err(FitError::Objective(format!(
                        "bad gamma profile grid {lo}:{hi}:{step}"
                    )));
                }
                let mut best: Option<SingleFit> = None;
                let mut total_evals = 0;
                let mut g = lo;
                while g <= hi * (1.0 + 1e-12) {
                    match run_single(kind, series, opts, Some(g), false) {
                        Ok(fit) => {
                            total_evals += fit.meta.evaluations;
                            if best.as_ref().is_none_or(|b| fit.llf > b.llf) {
                                best = Some(fit);
                            }
                        }
                        Err(FitError::NoFeasiblePoint { .. }) => {}
                        Err(e) => return Err(e),
                    }
                    g += step;
                }
                let mut fit = best.ok_or(FitError::NoFeasiblePoint {
                    kind,
                    release: series.release_id().to_string(),
                })?;
                fit.meta.evaluations = total_evals;
                fit
            }
        }
    } else {
        run_single(kind, series, opts, None, false)?
    };

    let spec = best.spec;
    let k_params = if kind == ModelKind::Proposed && gamma_was_estimated {
        3
    } else {
        2
    };

    let n_rounded = spec.n_initial().round().max(1.0) as u64;
    let llf_at_rounded_n = spec
        .with_n_initial(n_rounded as f64)
        .and_then(|s| log_likelihood(&s, series))
        .ok();

    let stationarity = (!kind.time_linear()).then(|| {
        let res =
            stationarity_residuals(&spec, series).expect("optimum is feasible, residuals defined");
        StationaritySummary {
            r_phi: res.r_phi,
            r_n: res.r_n,
        }
    });

    let sse_val = sse(&spec, series)?;
    let mse_val = (series.len() > k_params).then(|| sse_val / (series.len() - k_params) as f64);

    let modulation = spec.modulation();
    Ok(FitResult {
        schema: FIT_SCHEMA.to_string(),
        release_id: series.release_id().to_string(),
        model: kind,
        params: FittedParams {
            phi: spec.phi(),
            n_initial: spec.n_initial(),
            n_rounded,
            gamma: modulation.map(|m| m.gamma()),
            mu: modulation.map(|m| m.mu()),
        },
        fixed: FixedInputs {
            p: kind.uses_debug_probs().then(|| opts.debug.p()),
            r: kind.uses_debug_probs().then(|| opts.debug.r()),
        },
        llf: best.llf,
        llf_at_rounded_n,
        sse: sse_val,
        mse: mse_val,
        stationarity,
        optimizer: best.meta,
        feasible: true,
        intervals: series.len(),
        total_failures: series.total_failures(),
        k_params,
    })
}

/// One model's row in a release comparison: either a ranked fit or the
/// error that prevented one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: ModelKind,
    pub rank: Option<usize>,
    pub fit: Option<FitResult>,
    pub error: Option<String>,
}

/// All models fitted to one release, ranked by SSE (ties by MSE, then by
/// log-likelihood descending).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReleaseComparison {
    pub release_id: String,
    pub rows: Vec<ComparisonRow>,
}

/// Cross-release wins for one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model: ModelKind,
    pub wins: usize,
    pub releases: usize,
    pub win_rate_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub schema: String,
    pub releases: Vec<ReleaseComparison>,
    pub summary: Vec<ModelSummary>,
}

pub const COMPARE_SCHEMA: &str = "relifit-compare/1";

/// Fit every requested model to every release and rank them within each
/// release. Per-model failures become rows, not errors.
pub fn compare(
    series_list: &[FailureSeries],
    kinds: &[ModelKind],
    opts: &FitOptions,
) -> ComparisonReport {
    let mut releases = Vec::with_capacity(series_list.len());
    let mut wins: Vec<usize> = vec![0; kinds.len()];

    for series in series_list {
        let mut rows: Vec<ComparisonRow> = kinds
            .iter()
            .map(|&kind| match fit_model(series, kind, opts) {
                Ok(fit) => ComparisonRow {
                    model: kind,
                    rank: None,
                    fit: Some(fit),
                    error: None,
                },
                Err(e) => ComparisonRow {
                    model: kind,
                    rank: None,
                    fit: None,
                    error: Some(e.to_string()),
                },
            })
            .collect();

        // rank the successful fits: SSE ascending, then MSE, then LLF
        // descending; failures stay unranked
        let mut order: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].fit.is_some()).collect();
        order.sort_by(|&a, &b| {
            let fa = rows[a].fit.as_ref().unwrap();
            let fb = rows[b].fit.as_ref().unwrap();
            fa.sse
                .total_cmp(&fb.sse)
                .then_with(|| {
                    let ma = fa.mse.unwrap_or(f64::INFINITY);
                    let mb = fb.mse.unwrap_or(f64::INFINITY);
                    ma.total_cmp(&mb)
                })
                .then_with(|| fb.llf.total_cmp(&fa.llf))
        });
        for (rank0, &row_idx) in order.iter().enumerate() {
            rows[row_idx].rank = Some(rank0 + 1);
            if rank0 == 0 {
                let kind_idx = kinds
                    .iter()
                    .position(|&k| k == rows[row_idx].model)
                    .expect("row model comes from kinds");
                wins[kind_idx] += 1;
            }
        }

        releases.push(ReleaseComparison {
            release_id: series.release_id().to_string(),
            rows,
        });
    }

    let total = series_list.len();
    let summary = kinds
        .iter()
        .zip(wins)
        .map(|(&model, wins)| ModelSummary {
            model,
            wins,
            releases: total,
            win_rate_pct: if total == 0 {
                0.0
            } else {
                wins as f64 * 100.0 / total as f64
            },
        })
        .collect();

    ComparisonReport {
        schema: COMPARE_SCHEMA.to_string(),
        releases,
        summary,
    }
}
