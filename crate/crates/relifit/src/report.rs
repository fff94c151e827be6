//! Rendering of fit results and comparison reports as JSON, markdown, and
//! CSV. All output is deterministic for identical inputs.

use std::fmt::Write as _;

use crate::gof::{ComparisonReport, ComparisonRow, FitResult};

/// Format with `digits` significant digits, fixed-point.
pub fn format_sig(value: f64, digits: i32) -> String {
    if value == 0.0 {
        return format!("{value:.*}", (digits - 1).max(0) as usize);
    }
    if !value.is_finite() {
        return value.to_string();
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (digits - 1 - magnitude).max(0) as usize;
    format!("{value:.decimals$}")
}

/// Pretty JSON plus trailing newline; the byte-exact form used for
/// determinism checks.
pub fn render_fit_json(fit: &FitResult) -> String {
    let mut s = serde_json::to_string_pretty(fit).expect("fit results always serialize");
    s.push('\n');
    s
}

pub fn render_compare_json(report: &ComparisonReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports always serialize");
    s.push('\n');
    s
}

/// The parameter cell of a comparison row, e.g.
/// `phi=2.864e-5, N=5, n=11, gamma=2.2666, mu=0.6072`.
pub fn parameter_cell(fit: &FitResult) -> String {
    let mut cell = format!(
        "phi={:.3e}, N={}, n={}",
        fit.params.phi, fit.params.n_rounded, fit.total_failures
    );
    if let Some(gamma) = fit.params.gamma {
        let _ = write!(cell, ", gamma={gamma:.4}");
    }
    if let Some(mu) = fit.params.mu {
        let _ = write!(cell, ", mu={mu:.4}");
    }
    cell
}

fn sse_cell(fit: &FitResult) -> String {
    format_sig(fit.sse, 6)
}

fn mse_cell(fit: &FitResult) -> String {
    fit.mse
        .map_or_else(|| "-".to_string(), |m| format_sig(m, 6))
}

fn rank_cell(row: &ComparisonRow) -> String {
    row.rank.map_or_else(|| "-".to_string(), |r| r.to_string())
}

/// Markdown report: one ranked table per release, one win-rate summary.
pub fn render_compare_markdown(report: &ComparisonReport) -> String {
    let mut out = String::new();
    out.push_str("# Model comparison\n");
    for release in &report.releases {
        let _ = write!(out, "\n## Release {}\n\n", release.release_id);
        out.push_str("| Sr. No. | Model | Estimated Parameter values | SSE | MSE | Rank |\n");
        out.push_str("|---:|---|---|---:|---:|---:|\n");
        for (i, row) in release.rows.iter().enumerate() {
            match &row.fit {
                Some(fit) => {
                    let _ = writeln!(
                        out,
                        "| {} | {} | {} | {} | {} | {} |",
                        i + 1,
                        row.model.display_name(),
                        parameter_cell(fit),
                        sse_cell(fit),
                        mse_cell(fit),
                        rank_cell(row),
                    );
                }
                None => {
                    let _ = writeln!(
                        out,
                        "| {} | {} | fit failed: {} | - | - | - |",
                        i + 1,
                        row.model.display_name(),
                        row.error.as_deref().unwrap_or("unknown"),
                    );
                }
            }
        }
    }
    out.push_str("\n## Win-rate summary\n\n");
    out.push_str("| Model | Wins | Releases | Win rate |\n");
    out.push_str("|---|---:|---:|---:|\n");
    for s in &report.summary {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {:.2}% |",
            s.model.display_name(),
            s.wins,
            s.releases,
            s.win_rate_pct
        );
    }
    out
}

/// Flat CSV with one row per (release, model) plus summary rows at full
/// float precision.
pub fn render_compare_csv(report: &ComparisonReport) -> String {
    let mut out = String::new();
    out.push_str(
        "release,model,rank,phi,n_initial,n_rounded,gamma,mu,p,r,llf,sse,mse,feasible,error\n",
    );
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for release in &report.releases {
        for row in &release.rows {
            match &row.fit {
                Some(fit) => {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},",
                        release.release_id,
                        row.model,
                        row.rank.map(|r| r.to_string()).unwrap_or_default(),
                        fit.params.phi,
                        fit.params.n_initial,
                        fit.params.n_rounded,
                        opt(fit.params.gamma),
                        opt(fit.params.mu),
                        opt(fit.fixed.p),
                        opt(fit.fixed.r),
                        fit.llf,
                        fit.sse,
                        opt(fit.mse),
                        fit.feasible,
                    );
                }
                None => {
                    let _ = writeln!(
                        out,
                        "{},{},,,,,,,,,,,,false,\"{}\"",
                        release.release_id,
                        row.model,
                        row.error.as_deref().unwrap_or("unknown").replace('"', "'"),
                    );
                }
            }
        }
    }
    out.push_str("\n# win-rate summary\nmodel,wins,releases,win_rate_pct\n");
    for s in &report.summary {
        let _ = writeln!(
            out,
            "{},{},{},{:.2}",
            s.model, s.wins, s.releases, s.win_rate_pct
        );
    }
    out
}
