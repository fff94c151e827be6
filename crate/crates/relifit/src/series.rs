//! Per-release time-between-failure observations.

use crate::error::SeriesError;

/// One observed inter-failure interval: its length and how many failures
/// were recorded in it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FailureRecord {
    /// Interval length in the dataset's time unit (hours by convention).
    pub duration: f64,
    /// Failures observed in the interval (>= 1).
    pub failures: u64,
}

impl FailureRecord {
    pub fn new(duration: f64, failures: u64) -> Self {
        Self { duration, failures }
    }
}

/// An ordered sequence of inter-failure intervals for one release, with
/// derived cumulative failure counts.
///
/// Invariants enforced at construction: every duration is positive and
/// finite, every failure count is at least 1. The cumulative counts are
/// therefore strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureSeries {
    release_id: String,
    records: Vec<FailureRecord>,
    cum: Vec<u64>,
}

impl FailureSeries {
    pub fn new(
        release_id: impl Into<String>,
        records: Vec<FailureRecord>,
    ) -> Result<Self, SeriesError> {
        let mut cum = Vec::with_capacity(records.len());
        let mut total = 0u64;
        for (i, rec) in records.iter().enumerate() {
            let index = i + 1;
            if !rec.duration.is_finite() || rec.duration <= 0.0 {
                return Err(SeriesError::NonPositiveDuration {
                    index,
                    value: rec.duration,
                });
            }
            if rec.failures == 0 {
                return Err(SeriesError::ZeroFailures { index });
            }
            total += rec.failures;
            cum.push(total);
        }
        Ok(Self {
            release_id: release_id.into(),
            records,
            cum,
        })
    }

    /// Convenience constructor for the single-failure-per-interval case.
    pub fn from_durations(
        release_id: impl Into<String>,
        durations: &[f64],
    ) -> Result<Self, SeriesError> {
        let records = durations
            .iter()
            .map(|&t| FailureRecord::new(t, 1))
            .collect();
        Self::new(release_id, records)
    }

    pub fn release_id(&self) -> &str {
        &self.release_id
    }

    pub fn records(&self) -> &[FailureRecord] {
        &self.records
    }

    /// Number of observed intervals.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Cumulative failures *before* 1-based interval `index` (n_{i-1});
    /// zero for the first interval.
    pub fn cum_before(&self, index: usize) -> u64 {
        debug_assert!(index >= 1 && index <= self.records.len());
        if index <= 1 {
            0
        } else {
            self.cum[index - 2]
        }
    }

    /// Cumulative failures up to and including 1-based interval `index`.
    pub fn cum_at(&self, index: usize) -> u64 {
        debug_assert!(index >= 1 && index <= self.records.len());
        self.cum[index - 1]
    }

    /// Total failures across the series.
    pub fn total_failures(&self) -> u64 {
        self.cum.last().copied().unwrap_or(0)
    }

    /// Sum of interval durations.
    pub fn total_duration(&self) -> f64 {
        self.records.iter().map(|r| r.duration).sum()
    }

    /// Iterate `(index, cum_before, duration)` triples in interval order.
    pub fn intervals(&self) -> impl Iterator<Item = (usize, u64, f64)> + '_ {
        self.records.iter().enumerate().map(move |(i, rec)| {
            let index = i + 1;
            (index, self.cum_before(index), rec.duration)
        })
    }

    /// Relabel the series without touching observations.
    pub fn with_release_id(mut self, release_id: impl Into<String>) -> Self {
        self.release_id = release_id.into();
        self
    }
}
