use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sim::ScenarioSummary;

/// Results CSV columns, in order.
pub const CSV_HEADER: [&str; 23] = [
    "alpha",
    "lambda1",
    "lambda2",
    "theta1",
    "theta2",
    "n_subjects",
    "n_reps_total",
    "n_converged_cox",
    "n_converged_fg",
    "mean_hr_cox",
    "mean_hr_fg",
    "mean_gap",
    "bias_cox",
    "bias_fg",
    "emp_se_cox",
    "emp_se_fg",
    "coverage_cox",
    "mean_log_hr_cox",
    "mean_log_hr_fg",
    "mean_n_primary",
    "mean_n_competing",
    "mean_n_censored",
    "degraded",
];

/// Six significant digits, fixed notation for exponents in `-5..6`,
/// trailing zeros trimmed. Non-finite values print as `NaN`, `inf`, `-inf`.
pub fn format_sig6(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exponent) = sci.split_once('e').expect("exponent format");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if (-5..6).contains(&exponent) {
        let decimals = (5 - exponent).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exponent}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn row(s: &ScenarioSummary) -> Vec<String> {
    let f = format_sig6;
    vec![
        f(s.alpha),
        f(s.lambda1),
        f(s.lambda2),
        f(s.theta1),
        f(s.theta2),
        s.n_subjects.to_string(),
        s.n_reps_total.to_string(),
        s.n_converged_cox.to_string(),
        s.n_converged_fg.to_string(),
        f(s.mean_hr_cox),
        f(s.mean_hr_fg),
        f(s.mean_gap),
        f(s.bias_cox),
        f(s.bias_fg),
        f(s.emp_se_cox),
        f(s.emp_se_fg),
        f(s.coverage_cox),
        f(s.mean_log_hr_cox),
        f(s.mean_log_hr_fg),
        f(s.mean_n_primary),
        f(s.mean_n_competing),
        f(s.mean_n_censored),
        s.degraded.to_string(),
    ]
}

/// The CSV document as a string (header plus one line per summary, `\n` line
/// endings).
pub fn render_results_csv(summaries: &[ScenarioSummary]) -> Result<String> {
    if summaries.is_empty() {
        return Err(Error::InvalidArgument("no summaries to write".into()));
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let to_err = |e: csv::Error| Error::Csv { path: "<memory>".into(), source: e };
    w.write_record(CSV_HEADER).map_err(to_err)?;
    for s in summaries {
        w.write_record(row(s)).map_err(to_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
}

pub fn write_results_csv(summaries: &[ScenarioSummary], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let doc = render_results_csv(summaries)?;
    fs::write(path, doc).map_err(|e| Error::io(path, e))
}

fn parse_float(field: &str, column: &str, line: u64) -> Result<f64> {
    match field {
        "NaN" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => field.parse().map_err(|_| Error::Schema(format!("line {line}: column {column}: not a number: {field:?}"))),
    }
}

fn parse_count(field: &str, column: &str, line: u64) -> Result<usize> {
    field.parse().map_err(|_| Error::Schema(format!("line {line}: column {column}: not a count: {field:?}")))
}

/// Reads a results CSV written by [`write_results_csv`]. The header must
/// match [`CSV_HEADER`] exactly.
pub fn read_results_csv(path: impl AsRef<Path>) -> Result<Vec<ScenarioSummary>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Csv { path: path.into(), source: e })?;
    let header = reader.headers().map_err(|e| Error::Csv { path: path.into(), source: e })?;
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Schema(format!(
            "{}: header does not match the results schema (expected {})",
            path.display(),
            CSV_HEADER.join(",")
        )));
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv { path: path.into(), source: e })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != CSV_HEADER.len() {
            return Err(Error::Schema(format!(
                "{}: line {line}: expected {} fields, found {}",
                path.display(),
                CSV_HEADER.len(),
                record.len()
            )));
        }
        let float = |i: usize| parse_float(&record[i], CSV_HEADER[i], line);
        let count = |i: usize| parse_count(&record[i], CSV_HEADER[i], line);
        let degraded = match &record[22] {
            "true" => true,
            "false" => false,
            other => return Err(Error::Schema(format!("line {line}: column degraded: not a boolean: {other:?}"))),
        };
        out.push(ScenarioSummary {
            alpha: float(0)?,
            lambda1: float(1)?,
            lambda2: float(2)?,
            theta1: float(3)?,
            theta2: float(4)?,
            n_subjects: count(5)?,
            n_reps_total: count(6)?,
            n_converged_cox: count(7)?,
            n_converged_fg: count(8)?,
            mean_hr_cox: float(9)?,
            mean_hr_fg: float(10)?,
            mean_gap: float(11)?,
            bias_cox: float(12)?,
            bias_fg: float(13)?,
            emp_se_cox: float(14)?,
            emp_se_fg: float(15)?,
            coverage_cox: float(16)?,
            mean_log_hr_cox: float(17)?,
            mean_log_hr_fg: float(18)?,
            mean_n_primary: float(19)?,
            mean_n_competing: float(20)?,
            mean_n_censored: float(21)?,
            degraded,
        });
    }
    if out.is_empty() {
        return Err(Error::Schema(format!("{}: no result rows", path.display())));
    }
    Ok(out)
}
