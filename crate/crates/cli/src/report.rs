//! Comparison of predicted, bootstrap and measured speedups per core count.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use lasvegas::io::MeasuredRow;
use lasvegas::{FitReport, RuntimeDistribution, SpeedupCurve, Verdict};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub n: u32,
    pub predicted_speedup: Option<f64>,
    pub bootstrap_speedup: Option<f64>,
    pub bootstrap_std_error: Option<f64>,
    pub measured_speedup: Option<f64>,
    pub measured_ci: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitSummary {
    pub dist: RuntimeDistribution,
    pub p_value: f64,
    pub verdict: Verdict,
    pub sample_size: usize,
}

impl From<&FitReport> for FitSummary {
    fn from(r: &FitReport) -> Self {
        Self { dist: r.dist, p_value: r.p_value, verdict: r.verdict, sample_size: r.sample_size }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub label: String,
    pub rows: Vec<Row>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Sidecar metadata of the input files, keyed by role.
    pub metadata: serde_json::Map<String, serde_json::Value>,
}

/// Joins the sources on `n`. Every source that is present must list exactly
/// the same core counts; otherwise the error names each unmatched count.
pub fn join(
    predicted: Option<&SpeedupCurve>,
    bootstrap: Option<&SpeedupCurve>,
    measured: Option<&[MeasuredRow]>,
) -> Result<Vec<Row>, String> {
    let mut sources: Vec<(&str, Vec<u32>)> = Vec::new();
    if let Some(c) = predicted {
        sources.push(("predicted", c.cores()));
    }
    if let Some(c) = bootstrap {
        sources.push(("bootstrap", c.cores()));
    }
    if let Some(m) = measured {
        sources.push(("measured", m.iter().map(|r| r.n).collect()));
    }
    if sources.is_empty() {
        return Err("nothing to report: give at least one of --predicted, --bootstrap, --measured".into());
    }
    for (name, cores) in &sources {
        let unique: BTreeSet<u32> = cores.iter().copied().collect();
        if unique.len() != cores.len() {
            return Err(format!("{name} lists a core count more than once"));
        }
    }

    let all: BTreeSet<u32> = sources.iter().flat_map(|(_, c)| c.iter().copied()).collect();
    let mut missing = Vec::new();
    for (name, cores) in &sources {
        for n in all.iter().filter(|n| !cores.contains(n)) {
            missing.push(format!("n={n} missing from {name}"));
        }
    }
    if !missing.is_empty() {
        return Err(format!("core lists do not match: {}", missing.join(", ")));
    }

    Ok(all
        .into_iter()
        .map(|n| {
            let point = |c: &SpeedupCurve| c.points.iter().find(|p| p.n == n).copied();
            let p = predicted.and_then(point);
            let b = bootstrap.and_then(point);
            let m = measured.and_then(|rows| rows.iter().find(|r| r.n == n));
            Row {
                n,
                predicted_speedup: p.map(|p| p.speedup),
                bootstrap_speedup: b.map(|b| b.speedup),
                bootstrap_std_error: b.and_then(|b| b.std_error),
                measured_speedup: m.map(|m| m.speedup),
                measured_ci: m.map(|m| (m.ci_low, m.ci_high)),
            }
        })
        .collect())
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"))
}

impl ComparisonReport {
    /// Aligned text table: one column per core count, one line per source.
    pub fn render(&self) -> String {
        let mut lines: Vec<(String, Vec<String>)> = vec![
            ("experimental".into(), self.rows.iter().map(|r| cell(r.measured_speedup)).collect()),
            (
                "  95% CI".into(),
                self.rows
                    .iter()
                    .map(|r| r.measured_ci.map_or_else(|| "-".into(), |(lo, hi)| format!("{lo:.2}..{hi:.2}")))
                    .collect(),
            ),
            ("predicted".into(), self.rows.iter().map(|r| cell(r.predicted_speedup)).collect()),
            ("bootstrap".into(), self.rows.iter().map(|r| cell(r.bootstrap_speedup)).collect()),
        ];
        lines.insert(0, (String::new(), self.rows.iter().map(|r| r.n.to_string()).collect()));

        let label_width = self.label.len().max("Problem".len());
        let kind_width = lines.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let widths: Vec<usize> =
            (0..self.rows.len()).map(|c| lines.iter().map(|(_, v)| v[c].len()).max().unwrap_or(1)).collect();

        let mut out = String::new();
        let _ = writeln!(out, "{:<label_width$} | {:<kind_width$} | speed-up on k cores", "Problem", "");
        for (k, (kind, values)) in lines.iter().enumerate() {
            let label = if k == 1 { self.label.as_str() } else { "" };
            let _ = write!(out, "{label:<label_width$} | {kind:<kind_width$} |");
            for (v, w) in values.iter().zip(&widths) {
                let _ = write!(out, " {v:>w$}");
            }
            out.push('\n');
        }
        if let Some(limit) = self.limit {
            let _ = writeln!(out, "limit of the predicted speedup: {limit:.4}");
        }
        if let Some(fit) = &self.fit {
            let _ = writeln!(
                out,
                "fit: {} {} (p = {:.4}, {} runs, {:?})",
                fit.dist.family(),
                serde_json::to_string(&fit.dist).unwrap_or_default(),
                fit.p_value,
                fit.sample_size,
                fit.verdict
            );
        }
        for note in &self.notes {
            let _ = writeln!(out, "note: {note}");
        }
        out
    }

    pub fn to_csv(&self) -> csv::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "n",
            "predicted_speedup",
            "bootstrap_speedup",
            "bootstrap_std_error",
            "measured_speedup",
            "measured_ci_low",
            "measured_ci_high",
        ])?;
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                r.n.to_string(),
                opt(r.predicted_speedup),
                opt(r.bootstrap_speedup),
                opt(r.bootstrap_std_error),
                opt(r.measured_speedup),
                opt(r.measured_ci.map(|c| c.0)),
                opt(r.measured_ci.map(|c| c.1)),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use lasvegas::SpeedupPoint;

    fn curve(cores: &[u32]) -> SpeedupCurve {
        SpeedupCurve {
            points: cores.iter().map(|&n| SpeedupPoint { n, speedup: f64::from(n), std_error: None }).collect(),
            limit: None,
            origin_slope: None,
        }
    }

    #[test]
    fn mismatched_lists_name_every_unmatched_count() {
        let err = join(Some(&curve(&[16, 32])), Some(&curve(&[16, 64])), None).unwrap_err();
        assert!(err.contains("n=32 missing from bootstrap"), "{err}");
        assert!(err.contains("n=64 missing from predicted"), "{err}");
    }

    #[test]
    fn missing_sources_render_as_dashes() {
        let rows = join(Some(&curve(&[2, 4])), None, None).unwrap();
        let report = ComparisonReport {
            label: "Costas 12".into(),
            rows,
            fit: None,
            limit: None,
            notes: Vec::new(),
            metadata: Default::default(),
        };
        let text = report.render();
        let experimental = text.lines().find(|l| l.contains("experimental")).unwrap();
        assert!(experimental.contains("Costas 12"));
        assert_eq!(experimental.matches(" -").count(), 2);
        let predicted = text.lines().find(|l| l.contains("predicted")).unwrap();
        assert!(predicted.ends_with("2.00 4.00"), "{predicted}");
        assert_eq!(report.to_csv().unwrap().lines().nth(1).unwrap(), "2,2,,,,,");
    }

    #[test]
    fn joins_measured_rows() {
        let measured = [MeasuredRow { n: 8, speedup: 7.5, ci_low: 6.0, ci_high: 9.0 }];
        let rows = join(Some(&curve(&[8])), Some(&curve(&[8])), Some(&measured)).unwrap();
        assert_eq!(rows[0].measured_ci, Some((6.0, 9.0)));
        assert_eq!(rows[0].predicted_speedup, Some(8.0));
        assert!(join(None, None, None).is_err());
    }
}
