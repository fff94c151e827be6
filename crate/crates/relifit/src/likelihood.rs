//! Log-likelihood of a failure series under a model, its analytic gradient,
//! the MLE stationarity residuals, and the penalized objective handed to the
//! optimizer.
//!
//! Each interval contributes one observation of its length; multi-failure
//! intervals enter only through the cumulative counts the hazards read.

use crate::error::{FitError, ModelError};
use crate::model::{DebugProbs, IntervalContext, ModelKind, ModelSpec, Modulation};
use crate::optimizer::Bound;
use crate::series::FailureSeries;

/// Objective value returned for any infeasible parameter vector. Any
/// feasible negative log-likelihood at realistic data scales is far below
/// this, so the penalty branch always dominates.
pub const PENALTY_BASE: f64 = 1e9;

/// Slope added per unit of worst remaining-fault violation, giving the
/// swarm a gradient back toward the feasible region.
pub const PENALTY_SCALE: f64 = 1e6;

/// Log-likelihood as the sum of per-interval log-densities.
///
/// Returns the infeasibility marker (`ModelError::Infeasible`) instead of a
/// number when any interval's remaining-fault term is non-positive.
pub fn log_likelihood(spec: &ModelSpec, series: &FailureSeries) -> Result<f64, ModelError> {
    let mut sum = 0.0;
    for (index, cum_prev, duration) in series.intervals() {
        let ctx = IntervalContext::new(index, cum_prev, duration)?;
        sum += spec.log_density(&ctx)?;
    }
    Ok(sum)
}

/// Closed-form log-likelihood for constant-hazard kinds:
/// `m*ln(phi) + sum(ln B_i) - phi * sum(B_i * t_i)` over the `m` intervals.
///
/// Kept as an independent route to the same value as [`log_likelihood`];
/// not defined for the time-linear kinds (SW, MSW).
pub fn log_likelihood_closed_form(
    spec: &ModelSpec,
    series: &FailureSeries,
) -> Result<f64, ModelError> {
    if spec.kind().time_linear() {
        return Err(ModelError::Unsupported {
            kind: spec.kind(),
            op: "closed-form log-likelihood",
        });
    }
    let mut sum_log_terms = 0.0;
    let mut sum_weighted_t = 0.0;
    for (index, cum_prev, duration) in series.intervals() {
        let ctx = IntervalContext::new(index, cum_prev, duration)?;
        let term = feasible_remaining_term(spec, &ctx)?;
        sum_log_terms += term.ln();
        sum_weighted_t += term * duration;
    }
    let m = series.len() as f64;
    Ok(m * spec.phi().ln() + sum_log_terms - spec.phi() * sum_weighted_t)
}

fn feasible_remaining_term(spec: &ModelSpec, ctx: &IntervalContext) -> Result<f64, ModelError> {
    let term = spec.remaining_term(ctx)?;
    if term <= 0.0 {
        return Err(ModelError::Infeasible {
            interval: ctx.index(),
            bracket: term,
        });
    }
    Ok(term)
}

/// Partial derivatives of the log-likelihood at `spec`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LlfGradient {
    /// d LLF / d phi = m/phi - sum(B_i * t_i)
    pub d_phi: f64,
    /// d LLF / d N = sum(1/B_i) - phi * sum(t_i)
    pub d_n: f64,
    /// d LLF / d gamma = sum(-c_i/B_i) + phi * sum(c_i * t_i); only for the
    /// Proposed kind with a scalar gamma.
    pub d_gamma: Option<f64>,
}

/// Analytic gradient of the closed-form log-likelihood. Constant-hazard
/// kinds only (the optimizer itself is derivative-free; this exists for the
/// stationarity diagnostics and for verification).
pub fn llf_gradient(spec: &ModelSpec, series: &FailureSeries) -> Result<LlfGradient, ModelError> {
    if spec.kind().time_linear() {
        return Err(ModelError::Unsupported {
            kind: spec.kind(),
            op: "analytic gradient",
        });
    }
    let phi = spec.phi();
    let mut sum_weighted_t = 0.0;
    let mut sum_inv_terms = 0.0;
    let mut sum_t = 0.0;
    let mut d_gamma_acc = 0.0;
    let wants_gamma = spec.kind() == ModelKind::Proposed;
    for (index, cum_prev, duration) in series.intervals() {
        let ctx = IntervalContext::new(index, cum_prev, duration)?;
        let term = feasible_remaining_term(spec, &ctx)?;
        sum_weighted_t += term * duration;
        sum_inv_terms += 1.0 / term;
        sum_t += duration;
        if wants_gamma {
            let c = spec.correction_coefficient(&ctx);
            d_gamma_acc += -c / term + phi * c * duration;
        }
    }
    let m = series.len() as f64;
    Ok(LlfGradient {
        d_phi: m / phi - sum_weighted_t,
        d_n: sum_inv_terms - phi * sum_t,
        d_gamma: wants_gamma.then_some(d_gamma_acc),
    })
}

/// Residuals of the MLE stationarity conditions; both vanish at an interior
/// optimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarityResiduals {
    /// m/phi - sum(B_i * t_i)
    pub r_phi: f64,
    /// sum(1/B_i) - phi * sum(t_i)
    pub r_n: f64,
}

/// The stationarity residuals are the phi- and N-partials of the
/// log-likelihood, evaluated through the identical code path as
/// [`llf_gradient`].
pub fn stationarity_residuals(
    spec: &ModelSpec,
    series: &FailureSeries,
) -> Result<StationarityResiduals, ModelError> {
    let grad = llf_gradient(spec, series)?;
    Ok(StationarityResiduals {
        r_phi: grad.d_phi,
        r_n: grad.d_n,
    })
}

/// Worst violation of the remaining-fault positivity constraint over the
/// series; `None` when every interval is strictly feasible.
pub fn feasibility_violation(spec: &ModelSpec, series: &FailureSeries) -> Option<f64> {
    let mut worst: Option<f64> = None;
    for (index, cum_prev, duration) in series.intervals() {
        let ctx = match IntervalContext::new(index, cum_prev, duration) {
            Ok(c) => c,
            Err(_) => return Some(f64::INFINITY),
        };
        match spec.remaining_term(&ctx) {
            Ok(term) if term > 0.0 => {}
            Ok(term) => {
                let v = -term;
                worst = Some(worst.map_or(v, |w: f64| w.max(v)));
            }
            Err(_) => return Some(f64::INFINITY),
        }
    }
    worst
}

/// Which parameters the optimizer searches over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreeParam {
    Phi,
    NInitial,
    Gamma,
}

impl FreeParam {
    pub fn name(&self) -> &'static str {
        match self {
            FreeParam::Phi => "phi",
            FreeParam::NInitial => "N",
            FreeParam::Gamma => "gamma",
        }
    }
}

/// A bounded maximum-likelihood problem over one series: the model kind,
/// the fixed inputs, and the ordered free parameters with their bounds.
///
/// `p` and `r` are always fixed inputs; they are never searched.
#[derive(Debug, Clone)]
pub struct Objective {
    kind: ModelKind,
    series: FailureSeries,
    debug: Option<DebugProbs>,
    fixed_gamma: Option<f64>,
    free: Vec<FreeParam>,
    bounds: Vec<Bound>,
}

impl Objective {
    pub fn new(
        kind: ModelKind,
        series: FailureSeries,
        debug: Option<DebugProbs>,
        fixed_gamma: Option<f64>,
        free: Vec<FreeParam>,
        bounds: Vec<Bound>,
    ) -> Result<Self, FitError> {
        if free.is_empty() {
            return Err(FitError::Objective("no free parameters".into()));
        }
        if free.len() != bounds.len() {
            return Err(FitError::Objective(format!(
                "{} free parameters but {} bounds",
                free.len(),
                bounds.len()
            )));
        }
        for (param, b) in free.iter().zip(&bounds) {
            if !b.lo().is_finite() || !b.hi().is_finite() || b.lo() >= b.hi() {
                return Err(FitError::Objective(format!(
                    "{} needs finite bounds with lo < hi, got [{}, {}]",
                    param.name(),
                    b.lo(),
                    b.hi()
                )));
            }
        }
        let gamma_free = free.contains(&FreeParam::Gamma);
        if kind.uses_debug_probs() && debug.is_none() {
            return Err(FitError::Objective(format!(
                "{kind} requires debugging probabilities"
            )));
        }
        if kind == ModelKind::Proposed && !gamma_free && fixed_gamma.is_none() {
            return Err(FitError::Objective(
                "proposed kind needs gamma either free or fixed".into(),
            ));
        }
        if gamma_free && kind != ModelKind::Proposed {
            return Err(FitError::Objective(format!(
                "gamma is not a parameter of the {kind} model"
            )));
        }
        Ok(Self {
            kind,
            series,
            debug,
            fixed_gamma,
            free,
            bounds,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn series(&self) -> &FailureSeries {
        &self.series
    }

    pub fn free(&self) -> &[FreeParam] {
        &self.free
    }

    pub fn bounds(&self) -> &[Bound] {
        &self.bounds
    }

    fn value_of(&self, param: FreeParam, x: &[f64]) -> Option<f64> {
        self.free.iter().position(|&p| p == param).map(|i| x[i])
    }

    /// Materialize the concrete spec at a natural-scale parameter vector.
    pub fn spec_for(&self, x: &[f64]) -> Result<ModelSpec, ModelError> {
        let phi = self
            .value_of(FreeParam::Phi, x)
            .ok_or_else(|| ModelError::InvalidSpec("phi is always estimated".into()))?;
        let n = self
            .value_of(FreeParam::NInitial, x)
            .ok_or_else(|| ModelError::InvalidSpec("N is always estimated".into()))?;
        match self.kind {
            ModelKind::Jm => ModelSpec::jm(phi, n),
            ModelKind::Sw => ModelSpec::sw(phi, n),
            ModelKind::Msw => ModelSpec::msw(phi, n),
            ModelKind::Goi => ModelSpec::goi(phi, n, self.debug.unwrap()),
            ModelKind::Mahapatra => ModelSpec::mahapatra(phi, n, self.debug.unwrap()),
            ModelKind::Proposed => {
                let gamma = self
                    .value_of(FreeParam::Gamma, x)
                    .or(self.fixed_gamma)
                    .expect("validated at construction");
                ModelSpec::proposed(phi, n, self.debug.unwrap(), Modulation::from_gamma(gamma)?)
            }
        }
    }

    /// Negative log-likelihood to minimize, extended over the whole bounded
    /// box by the penalty branch. Total: never errors, never NaN.
    pub fn penalized(&self, x: &[f64]) -> f64 {
        let spec = match self.spec_for(x) {
            Ok(s) => s,
            // Bounds keep parameters in-domain; anything else (e.g. gamma
            // marginally below 1 from clamping) is a unit violation.
            Err(_) => return PENALTY_BASE + PENALTY_SCALE,
        };
        if let Some(violation) = feasibility_violation(&spec, &self.series) {
            return PENALTY_BASE + PENALTY_SCALE * violation;
        }
        match log_likelihood(&spec, &self.series) {
            Ok(llf) if llf.is_finite() => -llf,
            _ => PENALTY_BASE,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DebugProbs, Modulation};
    use crate::optimizer::Bound;
    use crate::series::FailureRecord;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn probs(p: f64, r: f64) -> DebugProbs {
        DebugProbs::new(p, r).expect("valid probs")
    }

    fn proposed(phi: f64, n: f64, gamma: f64) -> ModelSpec {
        ModelSpec::proposed(
            phi,
            n,
            probs(0.95, 0.03),
            Modulation::from_gamma(gamma).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn jm_llf_hand_computed() {
        let spec = ModelSpec::jm(0.1, 3.0).unwrap();
        let series = FailureSeries::from_durations("x", &[1.0, 1.0]).unwrap();
        let expected = 0.3f64.ln() - 0.3 + 0.2f64.ln() - 0.2;
        let llf = log_likelihood(&spec, &series).unwrap();
        assert!((llf - expected).abs() < 1e-12, "got {llf}");
        assert!((llf + 3.3134).abs() < 1e-4);
    }

    #[test]
    fn unit_rate_single_record() {
        // lambda = 1 on a single t = 1 record: LLF = ln 1 - 1 = -1
        let spec = ModelSpec::jm(0.5, 2.0).unwrap();
        let series = FailureSeries::from_durations("x", &[1.0]).unwrap();
        assert!((log_likelihood(&spec, &series).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn infeasible_marker_instead_of_number() {
        let spec = ModelSpec::jm(0.1, 2.0).unwrap();
        let series = FailureSeries::from_durations("x", &[1.0, 1.0, 1.0]).unwrap();
        let err = log_likelihood(&spec, &series).unwrap_err();
        assert!(matches!(err, ModelError::Infeasible { interval: 3, .. }));
    }

    fn random_series(rng: &mut impl Rng, m: usize) -> FailureSeries {
        let records = (0..m)
            .map(|_| FailureRecord::new(rng.gen_range(0.1..20.0), rng.gen_range(1..4)))
            .collect();
        FailureSeries::new("rnd", records).unwrap()
    }

    #[test]
    fn two_route_llf_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let series = random_series(&mut rng, 10);
            let total = series.total_failures() as f64;
            let spec = proposed(
                rng.gen_range(1e-4..1e-2),
                total + rng.gen_range(1.0..20.0),
                rng.gen_range(1.0..2.0),
            );
            if feasibility_violation(&spec, &series).is_some() {
                continue;
            }
            let a = log_likelihood(&spec, &series).unwrap();
            let b = log_likelihood_closed_form(&spec, &series).unwrap();
            assert!((a - b).abs() < 1e-10, "sum-of-logs {a} vs closed form {b}");
        }
    }

    #[test]
    fn closed_form_rejects_time_linear_kinds() {
        let spec = ModelSpec::sw(0.01, 5.0).unwrap();
        let series = FailureSeries::from_durations("x", &[1.0]).unwrap();
        assert!(matches!(
            log_likelihood_closed_form(&spec, &series).unwrap_err(),
            ModelError::Unsupported { .. }
        ));
        assert!(matches!(
            llf_gradient(&spec, &series).unwrap_err(),
            ModelError::Unsupported { .. }
        ));
    }

    #[test]
    fn gradient_vanishes_at_single_observation_optimum() {
        // With one observation, d LLF/d phi = 0 at phi = 1/(N t).
        let n = 4.0;
        let t = 2.5;
        let spec = ModelSpec::jm(1.0 / (n * t), n).unwrap();
        let series = FailureSeries::from_durations("x", &[t]).unwrap();
        let g = llf_gradient(&spec, &series).unwrap();
        assert_eq!(g.d_phi, 0.0);
    }

    #[test]
    fn gradient_hand_computed() {
        let spec = ModelSpec::jm(0.1, 3.0).unwrap();
        let series = FailureSeries::from_durations("x", &[1.0, 1.0]).unwrap();
        let g = llf_gradient(&spec, &series).unwrap();
        assert!(
            (g.d_phi - 15.0).abs() < 1e-12,
            "2/0.1 - 5 = 15, got {}",
            g.d_phi
        );
        assert!(g.d_gamma.is_none());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let series = random_series(&mut rng, 8);
            let total = series.total_failures() as f64;
            let phi = rng.gen_range(1e-4..1e-2);
            let n = total + rng.gen_range(2.0..20.0);
            let gamma = rng.gen_range(1.0..1.8);
            let spec = proposed(phi, n, gamma);
            if feasibility_violation(&spec, &series).is_some() {
                continue;
            }
            let g = llf_gradient(&spec, &series).unwrap();
            let llf_at = |phi: f64, n: f64, gamma: f64| {
                log_likelihood(&proposed(phi, n, gamma), &series).unwrap()
            };
            let h = 1e-6;
            let fd_phi = (llf_at(phi * (1.0 + h), n, gamma) - llf_at(phi * (1.0 - h), n, gamma))
                / (2.0 * phi * h);
            let fd_n = (llf_at(phi, n * (1.0 + h), gamma) - llf_at(phi, n * (1.0 - h), gamma))
                / (2.0 * n * h);
            let fd_gamma = (llf_at(phi, n, gamma * (1.0 + h)) - llf_at(phi, n, gamma * (1.0 - h)))
                / (2.0 * gamma * h);
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-9);
            assert!(rel(g.d_phi, fd_phi) < 1e-5, "{} vs {}", g.d_phi, fd_phi);
            assert!(rel(g.d_n, fd_n) < 1e-5, "{} vs {}", g.d_n, fd_n);
            assert!(
                rel(g.d_gamma.unwrap(), fd_gamma) < 1e-5,
                "{} vs {}",
                g.d_gamma.unwrap(),
                fd_gamma
            );
        }
    }

    #[test]
    fn residuals_are_the_gradient_bitwise() {
        let spec = proposed(3e-3, 14.0, 1.4);
        let series = FailureSeries::from_durations("x", &[3.0, 5.0, 2.0, 9.0]).unwrap();
        let g = llf_gradient(&spec, &series).unwrap();
        let r = stationarity_residuals(&spec, &series).unwrap();
        assert_eq!(r.r_phi.to_bits(), g.d_phi.to_bits());
        assert_eq!(r.r_n.to_bits(), g.d_n.to_bits());
    }

    #[test]
    fn residual_sign_after_overshooting_phi() {
        // Push phi 1.5x past its single-parameter optimum: concavity in phi
        // forces the residual negative.
        let series = FailureSeries::from_durations("x", &[4.0, 6.0, 3.0]).unwrap();
        let n = 10.0;
        let sum_weighted: f64 = series
            .intervals()
            .map(|(i, _, t)| (n - (i - 1) as f64) * t)
            .sum();
        let phi_star = series.len() as f64 / sum_weighted;
        let spec = ModelSpec::jm(phi_star * 1.5, n).unwrap();
        let r = stationarity_residuals(&spec, &series).unwrap();
        assert!(r.r_phi < 0.0, "got {}", r.r_phi);
    }

    fn jm_objective(series: &FailureSeries) -> Objective {
        let total = series.total_failures() as f64;
        Objective::new(
            ModelKind::Jm,
            series.clone(),
            None,
            None,
            vec![FreeParam::Phi, FreeParam::NInitial],
            vec![
                Bound::log_scale(1e-8, 1e-1).unwrap(),
                Bound::linear(total, 10.0 * total + 10.0).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn penalized_is_negative_llf_when_feasible() {
        let series = FailureSeries::from_durations("x", &[2.0, 4.0]).unwrap();
        let obj = jm_objective(&series);
        let x = [0.01, 8.0];
        let spec = ModelSpec::jm(0.01, 8.0).unwrap();
        assert_eq!(obj.penalized(&x), -log_likelihood(&spec, &series).unwrap());
    }

    #[test]
    fn penalized_infeasible_branch() {
        let series = FailureSeries::from_durations("x", &[2.0, 4.0, 1.0]).unwrap();
        let obj = jm_objective(&series);
        // N below the last prior-failure count exhausts the model
        let v1 = obj.penalized(&[0.01, 1.5]);
        assert!(v1 >= PENALTY_BASE);
        // deeper violation scores strictly worse
        let v2 = obj.penalized(&[0.01, 0.5]);
        assert!(v2 > v1, "{v2} should exceed {v1}");
    }

    #[test]
    fn objective_rejects_bad_setups() {
        let series = FailureSeries::from_durations("x", &[1.0, 2.0]).unwrap();
        // gamma free on a non-proposed kind
        assert!(Objective::new(
            ModelKind::Jm,
            series.clone(),
            None,
            None,
            vec![FreeParam::Phi, FreeParam::NInitial, FreeParam::Gamma],
            vec![
                Bound::log_scale(1e-8, 1e-1).unwrap(),
                Bound::linear(2.0, 30.0).unwrap(),
                Bound::linear(1.0, 50.0).unwrap(),
            ],
        )
        .is_err());
        // proposed without gamma anywhere
        assert!(Objective::new(
            ModelKind::Proposed,
            series.clone(),
            Some(probs(0.95, 0.03)),
            None,
            vec![FreeParam::Phi, FreeParam::NInitial],
            vec![
                Bound::log_scale(1e-8, 1e-1).unwrap(),
                Bound::linear(2.0, 30.0).unwrap(),
            ],
        )
        .is_err());
        // missing debug probabilities
        assert!(Objective::new(
            ModelKind::Goi,
            series,
            None,
            None,
            vec![FreeParam::Phi, FreeParam::NInitial],
            vec![
                Bound::log_scale(1e-8, 1e-1).unwrap(),
                Bound::linear(2.0, 30.0).unwrap(),
            ],
        )
        .is_err());
    }

    #[test]
    fn llf_ignores_release_label() {
        let spec = proposed(2e-3, 9.0, 1.2);
        let a = FailureSeries::from_durations("alpha", &[1.0, 2.0, 3.0]).unwrap();
        let b = a.clone().with_release_id("beta");
        assert_eq!(
            log_likelihood(&spec, &a).unwrap().to_bits(),
            log_likelihood(&spec, &b).unwrap().to_bits()
        );
    }

    #[test]
    fn llf_consistent_across_count_representations() {
        // building records from per-interval counts vs reconstructing them
        // from cumulative differences gives the same likelihood
        let counts = [1u64, 3, 2, 1];
        let durations = [2.0, 1.0, 4.0, 0.5];
        let records: Vec<FailureRecord> = durations
            .iter()
            .zip(counts.iter())
            .map(|(&t, &k)| FailureRecord::new(t, k))
            .collect();
        let a = FailureSeries::new("x", records).unwrap();

        let cum: Vec<u64> = counts
            .iter()
            .scan(0, |acc, k| {
                *acc += k;
                Some(*acc)
            })
            .collect();
        let from_cum: Vec<FailureRecord> = cum
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let prev = if i == 0 { 0 } else { cum[i - 1] };
                FailureRecord::new(durations[i], c - prev)
            })
            .collect();
        let b = FailureSeries::new("x", from_cum).unwrap();

        let spec = proposed(2e-3, 12.0, 1.3);
        assert_eq!(
            log_likelihood(&spec, &a).unwrap().to_bits(),
            log_likelihood(&spec, &b).unwrap().to_bits()
        );
    }

    proptest! {
        #[test]
        fn penalty_dominates_feasible_values(
            phi_exp in -6.0f64..-1.0,
            n_extra in 0.5f64..50.0,
            bad_n in 0.05f64..0.8,
        ) {
            let series = FailureSeries::from_durations(
                "x",
                &[3.0, 10.0, 4.4, 8.1, 2.2],
            ).unwrap();
            let obj = jm_objective(&series);
            let feasible = obj.penalized(&[10f64.powf(phi_exp), series.total_failures() as f64 + n_extra]);
            // scale bad_n below the failure count so some interval exhausts
            let infeasible = obj.penalized(&[1e-3, series.total_failures() as f64 * bad_n]);
            prop_assert!(feasible < PENALTY_BASE);
            prop_assert!(infeasible >= PENALTY_BASE);
            prop_assert!(infeasible > feasible);
        }
    }
}
