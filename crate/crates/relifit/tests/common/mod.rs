//! Shared test oracles: exhaustive grid search, random-series generation,
//! and a Kolmogorov-Smirnov uniformity test. Everything here is independent
//! of the code paths it checks.
//!
//! Each integration-test binary compiles this module separately and uses
//! its own subset.
#![allow(dead_code)]

use rand::Rng;

use relifit::likelihood::log_likelihood;
use relifit::model::ModelSpec;
use relifit::series::{FailureRecord, FailureSeries};

/// Exhaustive minimum of the negative log-likelihood over a
/// `steps x steps` grid: phi log-spaced, N linear.
pub fn grid_min_neg_llf(
    series: &FailureSeries,
    phi_range: (f64, f64),
    n_range: (f64, f64),
    steps: usize,
    build: impl Fn(f64, f64) -> Option<ModelSpec>,
) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..steps {
        let u = i as f64 / (steps - 1) as f64;
        let phi = (phi_range.0.ln() + u * (phi_range.1.ln() - phi_range.0.ln())).exp();
        for j in 0..steps {
            let v = j as f64 / (steps - 1) as f64;
            let n = n_range.0 + v * (n_range.1 - n_range.0);
            let Some(spec) = build(phi, n) else { continue };
            if let Ok(llf) = log_likelihood(&spec, series) {
                best = best.min(-llf);
            }
        }
    }
    best
}

/// Random multi-failure series with durations in (0.1, 10) and counts 1..=3.
pub fn random_series(rng: &mut impl Rng, intervals: usize) -> FailureSeries {
    let records = (0..intervals)
        .map(|_| FailureRecord::new(rng.gen_range(0.1..10.0), rng.gen_range(1..4)))
        .collect();
    FailureSeries::new("rnd", records).expect("generated records are valid")
}

/// Two-sided Kolmogorov-Smirnov test of `samples` against Uniform(0, 1);
/// returns the asymptotic p-value.
pub fn ks_uniform_p_value(mut samples: Vec<f64>) -> f64 {
    assert!(!samples.is_empty());
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let below = i as f64 / n;
        let above = (i + 1) as f64 / n;
        d = d.max((x - below).abs()).max((above - x).abs());
    }
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let mut q = 0.0;
    for k in 1..=100 {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        q += 2.0 * sign * (-2.0 * (k as f64 * lambda) * (k as f64 * lambda)).exp();
    }
    q.clamp(0.0, 1.0)
}
