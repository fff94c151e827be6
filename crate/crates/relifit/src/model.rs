//! Failure-intensity models over inter-failure intervals.
//!
//! Six hazard families share one interface: the classic constant-per-interval
//! models (JM, GOI, Mahapatra), the time-linear ones (SW, MSW), and an
//! iterative-release model whose fault-correction term is scaled by a
//! modulation factor gamma derived from a release-acceptance parameter mu.
//!
//! Within interval `i` the hazard is `phi * B_i` (constant kinds) or
//! `phi * B_i * t` (time-linear kinds), where `B_i` is the remaining-fault
//! term of the kind. Reliability and density follow from the integrated
//! hazard: exponential for constant kinds, Rayleigh for time-linear ones.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::series::FailureSeries;

/// Modulation factor for a release-acceptance parameter `mu` in (0, 1]:
/// `gamma = mu + (1 - mu)/mu`. Equals 1 only at full acceptance (mu = 1).
pub fn gamma_from_mu(mu: f64) -> Result<f64, ModelError> {
    if !mu.is_finite() || mu <= 0.0 || mu > 1.0 {
        return Err(ModelError::Domain {
            what: "mu",
            value: mu,
        });
    }
    Ok(mu + (1.0 - mu) / mu)
}

/// Inverse of [`gamma_from_mu`]: the root of `mu^2 - (gamma+1)*mu + 1 = 0`
/// lying in (0, 1].
///
/// Evaluated as `2 / ((gamma+1) + sqrt((gamma-1)*(gamma+3)))`, which avoids
/// the cancellation of the textbook quadratic formula at both ends of the
/// domain.
pub fn mu_from_gamma(gamma: f64) -> Result<f64, ModelError> {
    if !gamma.is_finite() || gamma < 1.0 {
        return Err(ModelError::Domain {
            what: "gamma",
            value: gamma,
        });
    }
    let g = gamma - 1.0;
    let disc = (g * (g + 4.0)).sqrt();
    Ok(2.0 / ((gamma + 1.0) + disc))
}

/// Imperfect-debugging probabilities: a detected fault is removed with
/// probability `p`, left in place with probability `q = 1 - p - r`, and a
/// new fault is introduced with probability `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DebugProbs {
    p: f64,
    r: f64,
}

impl DebugProbs {
    /// Requires `0 <= r < p <= 1` and `p + r <= 1` so that `q >= 0`.
    pub fn new(p: f64, r: f64) -> Result<Self, ModelError> {
        if !p.is_finite() || !(0.0..=1.0).contains(&p) {
            return Err(ModelError::Domain {
                what: "p",
                value: p,
            });
        }
        if !r.is_finite() || !(0.0..=1.0).contains(&r) {
            return Err(ModelError::Domain {
                what: "r",
                value: r,
            });
        }
        if p + r > 1.0 {
            return Err(ModelError::InvalidSpec(format!(
                "q = 1 - p - r must be non-negative, got p={p} r={r}"
            )));
        }
        if p <= r {
            return Err(ModelError::InvalidSpec(format!(
                "fault removal must be more likely than introduction (p > r), got p={p} r={r}"
            )));
        }
        Ok(Self { p, r })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Probability a detected fault is neither removed nor replaced,
    /// derived so that p + q + r = 1 exactly.
    pub fn q(&self) -> f64 {
        1.0 - self.p - self.r
    }

    /// Net per-fault correction probability p - r.
    pub fn net_removal(&self) -> f64 {
        self.p - self.r
    }
}

/// A consistent (mu, gamma) pair under `gamma = mu + (1-mu)/mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Modulation {
    mu: f64,
    gamma: f64,
}

impl Modulation {
    pub fn from_mu(mu: f64) -> Result<Self, ModelError> {
        let gamma = gamma_from_mu(mu)?;
        Ok(Self { mu, gamma })
    }

    /// Gamma is the canonical representation; mu is derived on demand from
    /// the (0, 1] quadratic root.
    pub fn from_gamma(gamma: f64) -> Result<Self, ModelError> {
        let mu = mu_from_gamma(gamma)?;
        Ok(Self { mu, gamma })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// The six supported failure-intensity families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Jelinski-Moranda: perfect debugging, one fault removed per interval.
    Jm,
    /// Schick-Wolverton: JM remaining faults, hazard linear in elapsed time.
    Sw,
    /// Goel-Okumoto imperfect debugging: removal probability p.
    Goi,
    /// Mahapatra-Roy: imperfect debugging with fault introduction.
    Mahapatra,
    /// Modified Schick-Wolverton: cumulative observed failures, time-linear.
    Msw,
    /// Iterative-release model with modulation factor gamma.
    Proposed,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::Jm,
        ModelKind::Sw,
        ModelKind::Goi,
        ModelKind::Mahapatra,
        ModelKind::Msw,
        ModelKind::Proposed,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Jm => "jm",
            ModelKind::Sw => "sw",
            ModelKind::Goi => "goi",
            ModelKind::Mahapatra => "mahapatra",
            ModelKind::Msw => "msw",
            ModelKind::Proposed => "proposed",
        }
    }

    /// Human-facing label used in reports.
    pub fn display_name(&self) -> &'static str {
        match self {
            ModelKind::Jm => "JM",
            ModelKind::Sw => "SW",
            ModelKind::Goi => "GOI",
            ModelKind::Mahapatra => "GS Mahapatra",
            ModelKind::Msw => "MSW",
            ModelKind::Proposed => "Proposed",
        }
    }

    /// True for kinds whose hazard grows linearly with elapsed time inside
    /// an interval (SW, MSW); their survival is Rayleigh, not exponential.
    pub fn time_linear(&self) -> bool {
        matches!(self, ModelKind::Sw | ModelKind::Msw)
    }

    /// True for kinds that take imperfect-debugging probabilities.
    pub fn uses_debug_probs(&self) -> bool {
        matches!(
            self,
            ModelKind::Goi | ModelKind::Mahapatra | ModelKind::Proposed
        )
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jm" => Ok(ModelKind::Jm),
            "sw" => Ok(ModelKind::Sw),
            "goi" => Ok(ModelKind::Goi),
            "mahapatra" => Ok(ModelKind::Mahapatra),
            "msw" => Ok(ModelKind::Msw),
            "proposed" => Ok(ModelKind::Proposed),
            other => Err(format!(
                "unknown model '{other}' (expected one of jm, sw, goi, mahapatra, msw, proposed)"
            )),
        }
    }
}

/// Where a given interval sits in its series: 1-based index, cumulative
/// failures observed before it, and elapsed time within it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalContext {
    index: usize,
    cum_prev: u64,
    elapsed: f64,
}

impl IntervalContext {
    pub fn new(index: usize, cum_prev: u64, elapsed: f64) -> Result<Self, ModelError> {
        if index == 0 {
            return Err(ModelError::Domain {
                what: "interval index",
                value: 0.0,
            });
        }
        if index == 1 && cum_prev != 0 {
            return Err(ModelError::InvalidSpec(format!(
                "first interval cannot have prior failures (cum_prev = {cum_prev})"
            )));
        }
        if !elapsed.is_finite() || elapsed < 0.0 {
            return Err(ModelError::Domain {
                what: "elapsed time",
                value: elapsed,
            });
        }
        Ok(Self {
            index,
            cum_prev,
            elapsed,
        })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn cum_prev(&self) -> u64 {
        self.cum_prev
    }

    pub fn elapsed(&self) -> f64 {
        self.elapsed
    }

    /// Same interval position, different elapsed time.
    pub fn at_elapsed(&self, elapsed: f64) -> Result<Self, ModelError> {
        Self::new(self.index, self.cum_prev, elapsed)
    }
}

/// A model kind plus its parameter vector.
///
/// Construct through the per-kind constructors so that each kind carries
/// exactly the components it uses; unused fields stay `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    kind: ModelKind,
    phi: f64,
    n_initial: f64,
    debug: Option<DebugProbs>,
    modulation: Option<Modulation>,
    gamma_override: Option<Vec<f64>>,
}

impl ModelSpec {
    fn base(kind: ModelKind, phi: f64, n_initial: f64) -> Result<Self, ModelError> {
        if !phi.is_finite() || phi <= 0.0 {
            return Err(ModelError::Domain {
                what: "phi",
                value: phi,
            });
        }
        if !n_initial.is_finite() || n_initial <= 0.0 {
            return Err(ModelError::Domain {
                what: "n_initial",
                value: n_initial,
            });
        }
        Ok(Self {
            kind,
            phi,
            n_initial,
            debug: None,
            modulation: None,
            gamma_override: None,
        })
    }

    pub fn jm(phi: f64, n_initial: f64) -> Result<Self, ModelError> {
        Self::base(ModelKind::Jm, phi, n_initial)
    }

    pub fn sw(phi: f64, n_initial: f64) -> Result<Self, ModelError> {
        Self::base(ModelKind::Sw, phi, n_initial)
    }

    pub fn msw(phi: f64, n_initial: f64) -> Result<Self, ModelError> {
        Self::base(ModelKind::Msw, phi, n_initial)
    }

    pub fn goi(phi: f64, n_initial: f64, debug: DebugProbs) -> Result<Self, ModelError> {
        let mut s = Self::base(ModelKind::Goi, phi, n_initial)?;
        s.debug = Some(debug);
        Ok(s)
    }

    pub fn mahapatra(phi: f64, n_initial: f64, debug: DebugProbs) -> Result<Self, ModelError> {
        let mut s = Self::base(ModelKind::Mahapatra, phi, n_initial)?;
        s.debug = Some(debug);
        Ok(s)
    }

    pub fn proposed(
        phi: f64,
        n_initial: f64,
        debug: DebugProbs,
        modulation: Modulation,
    ) -> Result<Self, ModelError> {
        let mut s = Self::base(ModelKind::Proposed, phi, n_initial)?;
        s.debug = Some(debug);
        s.modulation = Some(modulation);
        Ok(s)
    }

    /// Replace the scalar gamma with a per-interval sequence (1-based
    /// interval `i` reads `seq[i-1]`). Diagnostic hook; Proposed only.
    pub fn with_gamma_override(mut self, seq: Vec<f64>) -> Result<Self, ModelError> {
        if self.kind != ModelKind::Proposed {
            return Err(ModelError::Unsupported {
                kind: self.kind,
                op: "gamma override",
            });
        }
        if seq.iter().any(|g| !g.is_finite()) {
            return Err(ModelError::InvalidSpec(
                "gamma override contains non-finite values".into(),
            ));
        }
        self.gamma_override = Some(seq);
        Ok(self)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn n_initial(&self) -> f64 {
        self.n_initial
    }

    pub fn debug(&self) -> Option<DebugProbs> {
        self.debug
    }

    pub fn modulation(&self) -> Option<Modulation> {
        self.modulation
    }

    /// Same parameters at a different initial fault count.
    pub fn with_n_initial(&self, n_initial: f64) -> Result<Self, ModelError> {
        let mut s = self.clone();
        if !n_initial.is_finite() || n_initial <= 0.0 {
            return Err(ModelError::Domain {
                what: "n_initial",
                value: n_initial,
            });
        }
        s.n_initial = n_initial;
        Ok(s)
    }

    /// Gamma in effect for 1-based interval `index` (override-aware).
    fn gamma_at(&self, index: usize) -> Result<f64, ModelError> {
        if let Some(seq) = &self.gamma_override {
            return seq.get(index - 1).copied().ok_or_else(|| {
                ModelError::InvalidSpec(format!(
                    "gamma override has {} entries, interval {index} requested",
                    seq.len()
                ))
            });
        }
        Ok(self
            .modulation
            .expect("proposed spec always carries modulation")
            .gamma())
    }

    fn debug_required(&self) -> DebugProbs {
        self.debug
            .expect("kinds using debug probs always carry them")
    }

    /// Coefficient of gamma in the Proposed correction term:
    /// `(n_{i-1} / (i-1)) * (p - r)`, defined as 0 for the first interval.
    pub(crate) fn correction_coefficient(&self, ctx: &IntervalContext) -> f64 {
        if ctx.index == 1 {
            // n_0 = 0 and i-1 = 0: no faults corrected yet, term vanishes.
            0.0
        } else {
            (ctx.cum_prev as f64 / (ctx.index - 1) as f64) * self.debug_required().net_removal()
        }
    }

    /// The remaining-fault term `B_i` multiplying `phi` in the hazard.
    /// May be non-positive for an exhausted parameter combination; callers
    /// decide whether that is an error ([`Self::hazard`]) or a penalty
    /// input (the fitting objective).
    pub fn remaining_term(&self, ctx: &IntervalContext) -> Result<f64, ModelError> {
        let i_minus_1 = (ctx.index - 1) as f64;
        let n = self.n_initial;
        Ok(match self.kind {
            ModelKind::Jm | ModelKind::Sw => n - i_minus_1,
            ModelKind::Goi => n - self.debug_required().p() * i_minus_1,
            ModelKind::Mahapatra => n - self.debug_required().net_removal() * i_minus_1,
            ModelKind::Msw => n - ctx.cum_prev as f64,
            ModelKind::Proposed => {
                let gamma = self.gamma_at(ctx.index)?;
                n - self.correction_coefficient(ctx) * gamma
            }
        })
    }

    fn feasible_term(&self, ctx: &IntervalContext) -> Result<f64, ModelError> {
        let term = self.remaining_term(ctx)?;
        if term <= 0.0 {
            return Err(ModelError::Infeasible {
                interval: ctx.index,
                bracket: term,
            });
        }
        Ok(term)
    }

    /// Failure intensity during the interval. For constant-hazard kinds
    /// this is `phi * B_i`; for SW/MSW it is `phi * B_i * t`.
    pub fn hazard(&self, ctx: &IntervalContext) -> Result<f64, ModelError> {
        let term = self.feasible_term(ctx)?;
        let base = self.phi * term;
        if self.kind.time_linear() {
            Ok(base * ctx.elapsed)
        } else {
            Ok(base)
        }
    }

    /// Survival probability `R(t) = exp(-integral of hazard to t)`:
    /// exponential for constant kinds, Rayleigh for time-linear kinds.
    pub fn reliability(&self, ctx: &IntervalContext) -> Result<f64, ModelError> {
        let term = self.feasible_term(ctx)?;
        let coeff = self.phi * term;
        let t = ctx.elapsed;
        if self.kind.time_linear() {
            Ok((-coeff * t * t / 2.0).exp())
        } else {
            Ok((-coeff * t).exp())
        }
    }

    /// `F(t) = 1 - R(t)`.
    pub fn cdf(&self, ctx: &IntervalContext) -> Result<f64, ModelError> {
        Ok(1.0 - self.reliability(ctx)?)
    }

    /// Probability density of the interval length: `hazard(t) * R(t)`.
    pub fn density(&self, ctx: &IntervalContext) -> Result<f64, ModelError> {
        Ok(self.hazard(ctx)? * self.reliability(ctx)?)
    }

    /// Log-density with the exponent expanded, for likelihood accumulation
    /// without intermediate underflow.
    pub(crate) fn log_density(&self, ctx: &IntervalContext) -> Result<f64, ModelError> {
        let term = self.feasible_term(ctx)?;
        let coeff = self.phi * term;
        let t = ctx.elapsed;
        if self.kind.time_linear() {
            Ok((coeff * t).ln() - coeff * t * t / 2.0)
        } else {
            Ok(coeff.ln() - coeff * t)
        }
    }
}

/// Per-interval gamma sequence under which the Proposed hazard collapses to
/// the classical linear-correction form: `gamma_i = (i-1)^2 / n_{i-1}` for
/// `i >= 2` (the first interval is unconstrained and reported as 1).
///
/// Substituted into the Proposed hazard this yields
/// `phi * [N - (p - r)(i - 1)]`: the Mahapatra intensity for general
/// `(p, r)`, JM for `(1, 0)`, GOI for `(p, 0)`.
pub fn jm_equivalent_gamma_sequence(series: &FailureSeries) -> Result<Vec<f64>, ModelError> {
    if series.len() < 2 {
        return Err(ModelError::InvalidSpec(format!(
            "gamma sequence needs at least 2 intervals, series has {}",
            series.len()
        )));
    }
    let mut seq = Vec::with_capacity(series.len());
    seq.push(1.0);
    for index in 2..=series.len() {
        let prior = series.cum_before(index);
        if prior == 0 {
            return Err(ModelError::InvalidSpec(format!(
                "no failures observed before interval {index}"
            )));
        }
        let i_minus_1 = (index - 1) as f64;
        seq.push(i_minus_1 * i_minus_1 / prior as f64);
    }
    Ok(seq)
}
