use super::{DetMetrics, EvalError};

/// One table row; rates are fractions in [0,1].
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub label: Option<String>,
    pub recall: f64,
    pub precision: f64,
    pub hmean: f64,
}

impl ReportRow {
    pub fn new(label: Option<&str>, m: &DetMetrics) -> Self {
        Self { label: label.map(String::from), recall: m.recall, precision: m.precision, hmean: m.hmean }
    }
}

const HEADER: [&str; 3] = ["Recall", "Precision", "H-mean"];

/// Renders `Recall | Precision | H-mean` as percentages with one decimal.
/// A leading method column appears when any row has a label.
pub fn render_report(rows: &[ReportRow]) -> Result<String, EvalError> {
    if rows.is_empty() {
        return Err(EvalError::Argument("report needs at least one row".into()));
    }
    let labeled = rows.iter().any(|r| r.label.is_some());
    let label_width = rows
        .iter()
        .filter_map(|r| r.label.as_deref())
        .map(|l| l.chars().count())
        .chain(["Method".len()])
        .max()
        .unwrap_or(0);
    let mut lines = Vec::with_capacity(rows.len() + 1);
    let mut header = String::new();
    if labeled {
        header.push_str(&format!("{:<label_width$} | ", "Method"));
    }
    header.push_str(&HEADER.join(" | "));
    lines.push(header);
    for r in rows {
        let cells = [r.recall, r.precision, r.hmean];
        if cells.iter().any(|v| !v.is_finite()) {
            return Err(EvalError::Argument("report cells must be finite".into()));
        }
        let mut line = String::new();
        if labeled {
            line.push_str(&format!("{:<label_width$} | ", r.label.as_deref().unwrap_or("-")));
        }
        line.push_str(&cells.map(|v| format!("{:.1}", v * 100.0)).join(" | "));
        lines.push(line);
    }
    Ok(lines.join("\n") + "\n")
}
