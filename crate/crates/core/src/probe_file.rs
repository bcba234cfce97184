//! TOML probe files.
//!
//! ```toml
//! input_overlap_c = 0.5        # or: alpha = 0.588
//!
//! [state0]
//! mean_x = 1.17741
//! mean_p = 0.0
//! var_x = 0.5
//! var_p = 0.5
//!
//! [state1]
//! mean_x = -1.17741
//! mean_p = 0.0
//! var_x = 0.5
//! var_p = 0.5
//!
//! [exact]                      # optional
//! lambda0 = 1.0
//! lambda1 = 1.0
//! overlap_s = 0.5
//! ```

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use crate::channels::{input_overlap, ExactSubspace};
use crate::error::{Error, Result};
use crate::estimation::{ConditionalMoments, ProbeRecord};
use crate::format::sig9;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbeFile {
    input_overlap_c: Option<f64>,
    alpha: Option<f64>,
    state0: ConditionalMoments,
    state1: ConditionalMoments,
    exact: Option<ExactSubspace>,
}

/// Parses and validates a probe file.
pub fn parse_probe(text: &str) -> Result<ProbeRecord> {
    let file: ProbeFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let c = match (file.input_overlap_c, file.alpha) {
        (Some(c), None) => c,
        (None, Some(alpha)) => {
            if !(alpha >= 0.0 && alpha.is_finite()) {
                return Err(Error::InvalidInput { field: "alpha", reason: format!("{alpha} must be finite and >= 0") });
            }
            input_overlap(alpha)
        }
        _ => {
            return Err(Error::InvalidInput {
                field: "input_overlap_c",
                reason: "exactly one of `input_overlap_c` and `alpha` must be given".into(),
            })
        }
    };
    let record = ProbeRecord { state0: file.state0, state1: file.state1, input_overlap_c: c, exact: file.exact };
    record.validate()?;
    Ok(record)
}

pub fn read_probe(path: &Path) -> Result<ProbeRecord> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_probe(&text)
}

/// Serializes a record with 9 significant digits per value.
pub fn write_probe(record: &ProbeRecord) -> String {
    let mut out = String::new();
    writeln!(out, "input_overlap_c = {}", toml_float(record.input_overlap_c)).unwrap();
    for (name, m) in [("state0", &record.state0), ("state1", &record.state1)] {
        writeln!(out, "\n[{name}]").unwrap();
        writeln!(out, "mean_x = {}", toml_float(m.mean_x)).unwrap();
        writeln!(out, "mean_p = {}", toml_float(m.mean_p)).unwrap();
        writeln!(out, "var_x = {}", toml_float(m.var_x)).unwrap();
        writeln!(out, "var_p = {}", toml_float(m.var_p)).unwrap();
    }
    if let Some(ex) = &record.exact {
        writeln!(out, "\n[exact]").unwrap();
        writeln!(out, "lambda0 = {}", toml_float(ex.lambda0)).unwrap();
        writeln!(out, "lambda1 = {}", toml_float(ex.lambda1)).unwrap();
        writeln!(out, "overlap_s = {}", toml_float(ex.overlap_s)).unwrap();
    }
    out
}

// TOML floats need a decimal point or exponent.
fn toml_float(x: f64) -> String {
    let s = sig9(x);
    if s.contains(['.', 'e']) {
        s
    } else {
        format!("{s}.0")
    }
}
