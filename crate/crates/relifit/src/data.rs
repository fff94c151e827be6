//! Dataset schemas and ingestion: failure-interval CSV files, bug-report
//! exports grouped into per-release series, and a seeded simulator used as
//! the testing oracle throughout the crate.
//!
//! All ingested durations are in hours; files carry a `# unit: hours`
//! comment ahead of the header.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{DataError, ModelError};
use crate::model::{IntervalContext, ModelSpec};
use crate::series::{FailureRecord, FailureSeries};

const UNIT_COMMENT: &str = "# unit: hours";
const FAILURE_HEADER: [&str; 4] = ["release", "interval_index", "t", "failures"];

fn schema_err(row: usize, message: impl Into<String>) -> DataError {
    DataError::Schema {
        row,
        message: message.into(),
    }
}

/// Read failure-interval CSV (`release,interval_index,t,failures`) into one
/// series per release, in file order.
///
/// Rows must be grouped by release with strictly increasing interval
/// indices; durations must be positive and failure counts at least 1.
pub fn read_failure_csv<R: Read>(reader: R) -> Result<Vec<FailureSeries>, DataError> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(reader);

    let headers = csv_reader.headers()?.clone();
    if headers.iter().ne(FAILURE_HEADER) {
        return Err(schema_err(
            1,
            format!(
                "expected header '{}', got '{}'",
                FAILURE_HEADER.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }

    struct Partial {
        records: Vec<FailureRecord>,
        last_index: usize,
    }
    let mut order: Vec<String> = Vec::new();
    let mut partials: BTreeMap<String, Partial> = BTreeMap::new();
    let mut current: Option<String> = None;

    for record in csv_reader.records() {
        let record = record?;
        let row = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or_default();
        if record.len() != 4 {
            return Err(schema_err(
                row,
                format!("expected 4 columns, got {}", record.len()),
            ));
        }
        let release = record[0].to_string();
        if release.is_empty() {
            return Err(schema_err(row, "empty release label"));
        }
        let index: usize = record[1]
            .parse()
            .map_err(|_| schema_err(row, format!("bad interval_index '{}'", &record[1])))?;
        let t: f64 = record[2]
            .parse()
            .map_err(|_| schema_err(row, format!("bad t '{}'", &record[2])))?;
        let failures: u64 = record[3]
            .parse()
            .map_err(|_| schema_err(row, format!("bad failures '{}'", &record[3])))?;

        if index == 0 {
            return Err(schema_err(row, "interval_index starts at 1"));
        }
        if !t.is_finite() || t <= 0.0 {
            return Err(schema_err(row, format!("non-positive t = {t}")));
        }
        if failures == 0 {
            return Err(schema_err(row, "failures must be at least 1"));
        }

        if current.as_deref() != Some(release.as_str()) {
            if partials.contains_key(&release) {
                return Err(schema_err(
                    row,
                    format!("release {release} reappears; rows must be grouped by release"),
                ));
            }
            order.push(release.clone());
            partials.insert(
                release.clone(),
                Partial {
                    records: Vec::new(),
                    last_index: 0,
                },
            );
            current = Some(release.clone());
        }
        let partial = partials.get_mut(&release).expect("inserted above");
        if index == partial.last_index {
            return Err(schema_err(row, format!("duplicate ({release}, {index})")));
        }
        if index < partial.last_index {
            return Err(schema_err(
                row,
                format!("interval_index must increase within {release}, got {index}"),
            ));
        }
        partial.last_index = index;
        partial.records.push(FailureRecord::new(t, failures));
    }

    order
        .into_iter()
        .map(|release| {
            let partial = partials.remove(&release).expect("collected above");
            FailureSeries::new(release.clone(), partial.records)
                .map_err(|source| DataError::Series { release, source })
        })
        .collect()
}

pub fn load_failure_csv(path: impl AsRef<Path>) -> Result<Vec<FailureSeries>, DataError> {
    let file = std::fs::File::open(path)?;
    read_failure_csv(std::io::BufReader::new(file))
}

/// Write series in the canonical failure-interval format: unit comment,
/// header, then rows with 1-based contiguous indices. Output re-loads
/// byte-identically.
pub fn write_failure_csv<W: Write>(
    mut writer: W,
    series_list: &[FailureSeries],
) -> Result<(), DataError> {
    writeln!(writer, "{UNIT_COMMENT}")?;
    let mut csv_writer = csv::Writer::from_writer(writer);
    csv_writer.write_record(FAILURE_HEADER)?;
    for series in series_list {
        for (i, rec) in series.records().iter().enumerate() {
            csv_writer.write_record(&[
                series.release_id().to_string(),
                (i + 1).to_string(),
                rec.duration.to_string(),
                rec.failures.to_string(),
            ])?;
        }
    }
    csv_writer.flush()?;
    Ok(())
}

pub fn save_failure_csv(
    path: impl AsRef<Path>,
    series_list: &[FailureSeries],
) -> Result<(), DataError> {
    let file = std::fs::File::create(path)?;
    write_failure_csv(std::io::BufWriter::new(file), series_list)
}

/// One row of a bug-report export. Columns beyond the two required ones are
/// carried opaquely.
#[derive(Debug, Clone, PartialEq)]
pub struct BugRecord {
    pub bug_id: String,
    pub report_time: DateTime<Utc>,
    pub extra: Vec<(String, String)>,
}

/// Accepts RFC 3339 or a bare `YYYY-MM-DD HH:MM:SS` / `YYYY-MM-DDTHH:MM:SS`
/// stamp (read as UTC).
pub fn parse_timestamp(s: &str) -> Result<DateTime<Utc>, String> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Ok(dt.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"] {
        if let Ok(naive) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(naive.and_utc());
        }
    }
    Err(format!("unparseable timestamp '{s}'"))
}

/// Load `bug_id,report_time[,...]` rows; extra columns are preserved.
pub fn load_bug_reports(path: impl AsRef<Path>) -> Result<Vec<BugRecord>, DataError> {
    let file = std::fs::File::open(path)?;
    read_bug_reports(std::io::BufReader::new(file))
}

pub fn read_bug_reports<R: Read>(reader: R) -> Result<Vec<BugRecord>, DataError> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(reader);
    let headers = csv_reader.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let id_col = col("bug_id").ok_or_else(|| schema_err(1, "missing bug_id column"))?;
    let time_col = col("report_time").ok_or_else(|| schema_err(1, "missing report_time column"))?;

    let mut bugs = Vec::new();
    for record in csv_reader.records() {
        let record = record?;
        let row = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or_default();
        let bug_id = record.get(id_col).unwrap_or_default().to_string();
        if bug_id.is_empty() {
            return Err(schema_err(row, "empty bug_id"));
        }
        let stamp = record.get(time_col).unwrap_or_default();
        let report_time = parse_timestamp(stamp).map_err(|e| schema_err(row, e))?;
        let extra = headers
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != id_col && i != time_col)
            .filter_map(|(i, name)| record.get(i).map(|v| (name.to_string(), v.to_string())))
            .collect();
        bugs.push(BugRecord {
            bug_id,
            report_time,
            extra,
        });
    }
    Ok(bugs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowKind {
    Major,
    Minor,
}

impl std::str::FromStr for WindowKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "major" => Ok(WindowKind::Major),
            "minor" => Ok(WindowKind::Minor),
            other => Err(format!("unknown window kind '{other}'")),
        }
    }
}

/// Time span of one release, `[start, end)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReleaseWindow {
    pub release_id: String,
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
    pub kind: WindowKind,
}

impl ReleaseWindow {
    pub fn contains(&self, t: DateTime<Utc>) -> bool {
        self.start <= t && t < self.end
    }
}

/// Load `release,start,end,kind` windows; they must be ordered by start and
/// non-overlapping.
pub fn load_release_windows(path: impl AsRef<Path>) -> Result<Vec<ReleaseWindow>, DataError> {
    let file = std::fs::File::open(path)?;
    read_release_windows(std::io::BufReader::new(file))
}

pub fn read_release_windows<R: Read>(reader: R) -> Result<Vec<ReleaseWindow>, DataError> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(reader);
    let headers = csv_reader.headers()?.clone();
    if headers.iter().ne(["release", "start", "end", "kind"]) {
        return Err(schema_err(1, "expected header 'release,start,end,kind'"));
    }
    let mut windows: Vec<ReleaseWindow> = Vec::new();
    for record in csv_reader.records() {
        let record = record?;
        let row = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or_default();
        let start = parse_timestamp(&record[1]).map_err(|e| schema_err(row, e))?;
        let end = parse_timestamp(&record[2]).map_err(|e| schema_err(row, e))?;
        if start >= end {
            return Err(schema_err(row, "window start must precede end"));
        }
        let kind: WindowKind = record[3].parse().map_err(|e: String| schema_err(row, e))?;
        let window = ReleaseWindow {
            release_id: record[0].to_string(),
            start,
            end,
            kind,
        };
        if let Some(prev) = windows.last() {
            if window.start < prev.end {
                return Err(DataError::Windows(format!(
                    "window {} overlaps or precedes window {}",
                    window.release_id, prev.release_id
                )));
            }
        }
        windows.push(window);
    }
    Ok(windows)
}

/// How bug reports inside a window become intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grouping {
    /// One interval per inter-arrival gap; coincident reports merge into a
    /// multi-failure interval. The earliest report anchors the clock and is
    /// not itself an observation.
    PerFailure,
    /// Buckets of a fixed width in hours from the window start; empty
    /// buckets merge forward into the next non-empty one.
    FixedWidth { hours: f64 },
}

/// What ingestion produced and what it had to leave out. Every input bug is
/// accounted for: `emitted_failures() + skipped() == input_count`.
#[derive(Debug, Clone)]
pub struct IngestOutcome {
    pub series: Vec<FailureSeries>,
    pub input_count: usize,
    /// Bugs whose report time fell outside every window.
    pub outside_windows: usize,
    /// Per-failure grouping only: the clock-anchor reports at each window's
    /// first timestamp.
    pub origin_anchors: usize,
    /// Bugs in windows too sparse to form any interval.
    pub sparse_window_bugs: usize,
    pub warnings: Vec<String>,
}

impl IngestOutcome {
    pub fn skipped(&self) -> usize {
        self.outside_windows + self.origin_anchors + self.sparse_window_bugs
    }

    pub fn emitted_failures(&self) -> u64 {
        self.series.iter().map(|s| s.total_failures()).sum()
    }
}

fn hours_between(a: DateTime<Utc>, b: DateTime<Utc>) -> f64 {
    (b - a).num_milliseconds() as f64 / 3_600_000.0
}

/// Assign bugs to release windows and reformat them as time-between-failure
/// series. Bugs outside every window are skipped and counted; windows with
/// fewer than two reports yield an empty series and a warning.
pub fn ingest_bug_reports(
    bugs: &[BugRecord],
    windows: &[ReleaseWindow],
    grouping: Grouping,
) -> Result<IngestOutcome, DataError> {
    if let Grouping::FixedWidth { hours } = grouping {
        if !hours.is_finite() || hours <= 0.0 {
            return Err(DataError::Windows(format!(
                "fixed grouping width must be positive, got {hours}"
            )));
        }
    }

    let mut assigned: Vec<Vec<&BugRecord>> = vec![Vec::new(); windows.len()];
    let mut outside = 0usize;
    for bug in bugs {
        match windows.iter().position(|w| w.contains(bug.report_time)) {
            Some(idx) => assigned[idx].push(bug),
            None => outside += 1,
        }
    }

    let mut outcome = IngestOutcome {
        series: Vec::with_capacity(windows.len()),
        input_count: bugs.len(),
        outside_windows: outside,
        origin_anchors: 0,
        sparse_window_bugs: 0,
        warnings: Vec::new(),
    };

    for (window, mut in_window) in windows.iter().zip(assigned) {
        in_window.sort_by(|a, b| {
            a.report_time
                .cmp(&b.report_time)
                .then_with(|| a.bug_id.cmp(&b.bug_id))
        });

        if in_window.len() < 2 {
            outcome.warnings.push(format!(
                "window {}: {} bug report(s), not enough for any interval; emitting empty series",
                window.release_id,
                in_window.len()
            ));
            outcome.sparse_window_bugs += in_window.len();
            outcome.series.push(
                FailureSeries::new(window.release_id.clone(), vec![])
                    .expect("empty series is valid"),
            );
            continue;
        }

        let records = match grouping {
            Grouping::PerFailure => {
                // collapse coincident timestamps into multiplicity groups
                let mut groups: Vec<(DateTime<Utc>, u64)> = Vec::new();
                for bug in &in_window {
                    match groups.last_mut() {
                        Some((t, count)) if *t == bug.report_time => *count += 1,
                        _ => groups.push((bug.report_time, 1)),
                    }
                }
                if groups.len() < 2 {
                    outcome.warnings.push(format!(
                        "window {}: all {} reports share one timestamp; emitting empty series",
                        window.release_id,
                        in_window.len()
                    ));
                    outcome.origin_anchors += in_window.len();
                    outcome.series.push(
                        FailureSeries::new(window.release_id.clone(), vec![])
                            .expect("empty series is valid"),
                    );
                    continue;
                }
                outcome.origin_anchors += groups[0].1 as usize;
                groups
                    .windows(2)
                    .map(|pair| FailureRecord::new(hours_between(pair[0].0, pair[1].0), pair[1].1))
                    .collect::<Vec<_>>()
            }
            Grouping::FixedWidth { hours } => {
                let span = hours_between(window.start, window.end);
                let buckets = (span / hours).ceil().max(1.0) as usize;
                let mut counts = vec![0u64; buckets];
                for bug in &in_window {
                    let offset = hours_between(window.start, bug.report_time);
                    let idx = ((offset / hours) as usize).min(buckets - 1);
                    counts[idx] += 1;
                }
                let mut records = Vec::new();
                let mut carried = 0.0;
                for (i, &count) in counts.iter().enumerate() {
                    let width = if i + 1 == buckets {
                        span - hours * i as f64
                    } else {
                        hours
                    };
                    carried += width;
                    if count > 0 {
                        records.push(FailureRecord::new(carried, count));
                        carried = 0.0;
                    }
                    // trailing empty buckets hold no failures and are dropped
                }
                records
            }
        };

        let series = FailureSeries::new(window.release_id.clone(), records).map_err(|source| {
            DataError::Series {
                release: window.release_id.clone(),
                source,
            }
        })?;
        outcome.series.push(series);
    }

    debug_assert_eq!(
        outcome.emitted_failures() as usize + outcome.skipped(),
        outcome.input_count,
        "every input bug must be emitted or counted as skipped"
    );
    Ok(outcome)
}

/// Inverse-CDF draw of one interval length given the hazard coefficient:
/// exponential `-ln(u)/c` for constant kinds, Rayleigh `sqrt(-2 ln(u)/c)`
/// for time-linear kinds.
pub(crate) fn inverse_cdf_interval(coeff: f64, time_linear: bool, u: f64) -> f64 {
    debug_assert!(u > 0.0 && u < 1.0);
    if time_linear {
        (-2.0 * u.ln() / coeff).sqrt()
    } else {
        -u.ln() / coeff
    }
}

fn draw_open_unit(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            return u;
        }
    }
}

/// Sample a synthetic single-failure-per-interval series from a model by
/// inverse-CDF sampling; deterministic under the seed.
pub fn simulate_series(
    spec: &ModelSpec,
    n_failures: usize,
    seed: u64,
    release_id: &str,
) -> Result<FailureSeries, ModelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(n_failures);
    for index in 1..=n_failures {
        let ctx = IntervalContext::new(index, (index - 1) as u64, 0.0)?;
        let term = spec.remaining_term(&ctx)?;
        if term <= 0.0 {
            return Err(ModelError::Infeasible {
                interval: index,
                bracket: term,
            });
        }
        let coeff = spec.phi() * term;
        let u = draw_open_unit(&mut rng);
        let t = inverse_cdf_interval(coeff, spec.kind().time_linear(), u);
        records.push(FailureRecord::new(t, 1));
    }
    FailureSeries::new(release_id, records).map_err(|e| ModelError::InvalidSpec(e.to_string()))
}

/// Sort key that orders release labels numerically per dotted component
/// ("3.10" after "3.2").
pub fn release_order_key(id: &str) -> Vec<(u64, String)> {
    id.split('.')
        .map(|part| match part.parse::<u64>() {
            Ok(n) => (n, String::new()),
            Err(_) => (u64::MAX, part.to_string()),
        })
        .collect()
}
