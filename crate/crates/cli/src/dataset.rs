//! Trial dataset CSV: header `time,cause,arm`, cause 1 = primary,
//! 2 = competing, 0 = censored; arm 1 = treatment, 0 = control.

use std::path::Path;

use crsim::{Arm, Cause, Subject, TrialData};

use crate::Failure;

pub const DATASET_HEADER: [&str; 3] = ["time", "cause", "arm"];

pub fn read_dataset(path: &Path) -> Result<TrialData, Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    let header = reader.headers().map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?.clone();
    if header.iter().ne(DATASET_HEADER) {
        return Err(Failure::usage(format!(
            "{}: line 1: expected header {}, found {}",
            path.display(),
            DATASET_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut subjects = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |what: &str| Failure::usage(format!("{}: line {line}: {what}", path.display()));
        if record.len() != 3 {
            return Err(bad(&format!("expected 3 fields, found {}", record.len())));
        }
        let time: f64 = record[0].parse().map_err(|_| bad(&format!("invalid time {:?}", &record[0])))?;
        if !(time > 0.0 && time.is_finite()) {
            return Err(bad(&format!("time must be positive, got {time}")));
        }
        let cause = record[1]
            .parse::<u8>()
            .ok()
            .and_then(Cause::from_code)
            .ok_or_else(|| bad(&format!("invalid cause {:?} (expected 0, 1 or 2)", &record[1])))?;
        let arm = record[2]
            .parse::<u8>()
            .ok()
            .and_then(Arm::from_indicator)
            .ok_or_else(|| bad(&format!("invalid arm {:?} (expected 0 or 1)", &record[2])))?;
        subjects.push(Subject::new(time, cause, arm));
    }
    TrialData::new(subjects).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}
