//! Derivative-free bounded minimizer: particle-swarm velocity update with a
//! gravitational-search acceleration term in place of the cognitive pull.
//!
//! Agents move in a normalized unit box; each dimension maps back to its
//! natural range through a linear or log transform. Every random draw comes
//! from a per-agent counter-based stream split off the master seed, so
//! results are bit-reproducible regardless of evaluation scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::OptimError;

/// How a normalized coordinate maps to its natural value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log,
}

/// One search dimension: finite natural-scale limits plus the transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    lo: f64,
    hi: f64,
    scale: Scale,
}

impl Bound {
    pub fn linear(lo: f64, hi: f64) -> Result<Self, OptimError> {
        Self::checked(lo, hi, Scale::Linear)
    }

    /// Log-scaled dimension; requires `lo > 0`.
    pub fn log_scale(lo: f64, hi: f64) -> Result<Self, OptimError> {
        Self::checked(lo, hi, Scale::Log)
    }

    fn checked(lo: f64, hi: f64, scale: Scale) -> Result<Self, OptimError> {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(OptimError::InvalidBound {
                dim: 0,
                message: format!("need finite lo < hi, got [{lo}, {hi}]"),
            });
        }
        if scale == Scale::Log && lo <= 0.0 {
            return Err(OptimError::InvalidBound {
                dim: 0,
                message: format!("log scale needs lo > 0, got {lo}"),
            });
        }
        Ok(Self { lo, hi, scale })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    /// Map a normalized coordinate in [0, 1] to the natural scale.
    pub fn to_natural(&self, u: f64) -> f64 {
        match self.scale {
            Scale::Linear => self.lo + u * (self.hi - self.lo),
            Scale::Log => (self.lo.ln() + u * (self.hi.ln() - self.lo.ln())).exp(),
        }
    }
}

/// Swarm hyperparameters. Defaults follow common hybrid-swarm practice;
/// every constant is exposed because published uses of the update rule
/// rarely agree on them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwarmConfig {
    /// Number of agents (>= 2).
    pub pop_size: usize,
    /// Generations to run (>= 1).
    pub max_iters: usize,
    /// Weight on the gravitational acceleration term.
    pub c1: f64,
    /// Weight on the social pull toward the best-ever point.
    pub c2: f64,
    /// Inertia at the first generation.
    pub w_start: f64,
    /// Inertia at the last generation (linear schedule).
    pub w_end: f64,
    /// Initial gravitational constant.
    pub g0: f64,
    /// Exponential decay rate of the gravitational constant.
    pub alpha: f64,
    /// Distance regularizer in the force law.
    pub eps: f64,
    /// Master RNG seed; fixes the whole trajectory.
    pub seed: u64,
    /// Velocity clamp as a fraction of the (unit) box width per dimension.
    pub vmax_frac: f64,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        Self {
            pop_size: 30,
            max_iters: 1000,
            c1: 0.5,
            c2: 1.5,
            w_start: 0.9,
            w_end: 0.4,
            g0: 100.0,
            alpha: 20.0,
            eps: 1e-9,
            seed: 42,
            vmax_frac: 0.2,
        }
    }
}

impl SwarmConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<(), OptimError> {
        if self.pop_size < 2 {
            return Err(OptimError::InvalidConfig(format!(
                "pop_size must be at least 2, got {}",
                self.pop_size
            )));
        }
        if self.max_iters == 0 {
            return Err(OptimError::InvalidConfig(
                "max_iters must be at least 1".into(),
            ));
        }
        let coeffs = [
            ("c1", self.c1),
            ("c2", self.c2),
            ("w_start", self.w_start),
            ("w_end", self.w_end),
            ("g0", self.g0),
            ("alpha", self.alpha),
            ("eps", self.eps),
        ];
        for (name, v) in coeffs {
            if !v.is_finite() || v < 0.0 {
                return Err(OptimError::InvalidConfig(format!(
                    "{name} must be a non-negative finite number, got {v}"
                )));
            }
        }
        if self.vmax_frac.is_nan() || self.vmax_frac <= 0.0 || self.vmax_frac > 1.0 {
            return Err(OptimError::InvalidConfig(format!(
                "vmax_frac must lie in (0, 1], got {}",
                self.vmax_frac
            )));
        }
        Ok(())
    }
}

/// Minimization outcome: the best point in natural scale, its objective
/// value, and the best-so-far value after every generation.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeResult {
    pub best_x: Vec<f64>,
    pub best_f: f64,
    pub trace: Vec<f64>,
    pub evaluations: usize,
}

/// Normalized masses from a fitness vector (minimization orientation):
/// `m_i = (fit_i - worst) / (best - worst)` scaled to sum to 1; uniform
/// when all fitnesses coincide.
pub fn mass_distribution(fitness: &[f64]) -> Vec<f64> {
    let n = fitness.len();
    debug_assert!(n >= 2);
    let best = fitness.iter().copied().fold(f64::INFINITY, f64::min);
    let worst = fitness.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if best == worst || !best.is_finite() || !worst.is_finite() {
        return vec![1.0 / n as f64; n];
    }
    let raw: Vec<f64> = fitness
        .iter()
        .map(|&f| (f - worst) / (best - worst))
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|m| m / sum).collect()
}

/// Population state for one generation.
struct SwarmState {
    positions: Vec<Vec<f64>>,
    velocities: Vec<Vec<f64>>,
    fitness: Vec<f64>,
    gbest_x: Vec<f64>,
    gbest_f: f64,
    iter: usize,
}

/// Per-agent RNG stream: all agents share the master seed and differ only
/// in the ChaCha stream index, so no agent's draws depend on another's.
fn agent_rng(seed: u64, agent: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(agent as u64 + 1);
    rng
}

/// Minimize `f` over the box described by `bounds`.
///
/// Per generation: evaluate all agents, update the best-ever point, form
/// gravitational masses from fitness, accumulate pairwise forces with the
/// decaying constant `G`, and move each agent under inertia + acceleration
/// + social pull, clamping velocity and position to the box.
pub fn minimize<F>(f: F, bounds: &[Bound], cfg: &SwarmConfig) -> Result<MinimizeResult, OptimError>
where
    F: Fn(&[f64]) -> f64,
{
    cfg.validate()?;
    if bounds.is_empty() {
        return Err(OptimError::InvalidBound {
            dim: 0,
            message: "at least one dimension required".into(),
        });
    }
    let dim = bounds.len();
    let pop = cfg.pop_size;

    let mut rngs: Vec<ChaCha8Rng> = (0..pop).map(|i| agent_rng(cfg.seed, i)).collect();

    let mut state = SwarmState {
        positions: rngs
            .iter_mut()
            .map(|rng| (0..dim).map(|_| rng.gen::<f64>()).collect())
            .collect(),
        velocities: vec![vec![0.0; dim]; pop],
        fitness: vec![f64::INFINITY; pop],
        gbest_x: vec![0.0; dim],
        gbest_f: f64::INFINITY,
        iter: 0,
    };

    let natural = |u: &[f64]| -> Vec<f64> {
        u.iter()
            .zip(bounds)
            .map(|(&ui, b)| b.to_natural(ui))
            .collect()
    };

    let mut trace = Vec::with_capacity(cfg.max_iters);
    let mut evaluations = 0;
    let vmax = cfg.vmax_frac;

    for iter in 0..cfg.max_iters {
        state.iter = iter;

        // fitness of the current population; NaN counts as worst possible
        for i in 0..pop {
            let v = f(&natural(&state.positions[i]));
            state.fitness[i] = if v.is_nan() { f64::INFINITY } else { v };
            evaluations += 1;
        }

        for i in 0..pop {
            if state.fitness[i] < state.gbest_f {
                state.gbest_f = state.fitness[i];
                state.gbest_x.clone_from(&state.positions[i]);
            }
        }
        trace.push(state.gbest_f);

        let masses = mass_distribution(&state.fitness);
        let g = cfg.g0 * (-cfg.alpha * iter as f64 / cfg.max_iters as f64).exp();
        let w = if cfg.max_iters > 1 {
            cfg.w_start + (cfg.w_end - cfg.w_start) * iter as f64 / (cfg.max_iters - 1) as f64
        } else {
            cfg.w_start
        };

        let positions_snapshot = state.positions.clone();
        for i in 0..pop {
            let rng = &mut rngs[i];

            // gravitational force on agent i, randomly weighted per pair
            // and dimension; acceleration guarded for near-zero masses
            let mut accel = vec![0.0; dim];
            for j in 0..pop {
                if j == i {
                    continue;
                }
                let dist: f64 = positions_snapshot[i]
                    .iter()
                    .zip(&positions_snapshot[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                let pull = g * masses[i] * masses[j] / (dist + cfg.eps);
                for (d, a) in accel.iter_mut().enumerate() {
                    let weight = rng.gen::<f64>();
                    *a += weight * pull * (positions_snapshot[j][d] - positions_snapshot[i][d]);
                }
            }
            for a in accel.iter_mut() {
                *a /= masses[i] + cfg.eps;
            }

            let velocities = state.velocities[i].iter_mut();
            let positions = state.positions[i].iter_mut();
            for (d, (vel, pos)) in velocities.zip(positions).enumerate() {
                let r1 = rng.gen::<f64>();
                let r2 = rng.gen::<f64>();
                let social = state.gbest_x[d] - *pos;
                let v =
                    (w * *vel + cfg.c1 * r1 * accel[d] + cfg.c2 * r2 * social).clamp(-vmax, vmax);
                *vel = v;
                *pos = (*pos + v).clamp(0.0, 1.0);
            }
        }
    }

    Ok(MinimizeResult {
        best_x: natural(&state.gbest_x),
        best_f: state.gbest_f,
        trace,
        evaluations,
    })
}
