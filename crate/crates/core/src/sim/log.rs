use std::io::Write;
use std::path::Path;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const CSV_HEADER: &str = "t,L0,errE,normDelta,normGammaErr,nVisible,\
H11,H12,H13,H21,H22,H23,H31,H32,H33,\
Hh11,Hh12,Hh13,Hh21,Hh22,Hh23,Hh31,Hh32,Hh33";

/// One logged instant. `l0` is the ground-truth cost over all reference
/// features; `norm_gamma_err` is 0 for the full-velocity observer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub t: f64,
    #[serde(rename = "L0")]
    pub l0: f64,
    #[serde(rename = "errE")]
    pub err_e: f64,
    #[serde(rename = "normDelta")]
    pub norm_delta: f64,
    #[serde(rename = "normGammaErr")]
    pub norm_gamma_err: f64,
    #[serde(rename = "nVisible")]
    pub n_visible: usize,
    /// True homography, row-major.
    #[serde(rename = "H")]
    pub h: [f64; 9],
    /// Estimate, row-major.
    #[serde(rename = "Hh")]
    pub h_hat: [f64; 9],
}

impl LogRecord {
    pub fn flatten(m: &Matrix3<f64>) -> [f64; 9] {
        std::array::from_fn(|k| m[(k / 3, k % 3)])
    }

    pub fn unflatten(a: &[f64; 9]) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| a[3 * i + j])
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub records: Vec<LogRecord>,
}

impl RunLog {
    pub fn last(&self) -> Option<&LogRecord> {
        self.records.last()
    }

    /// First record at or after time `t`.
    pub fn at(&self, t: f64) -> Option<&LogRecord> {
        self.records.iter().find(|r| r.t >= t - 1e-12)
    }
}

/// CSV with 17 significant digits per value, so every `f64` round-trips.
pub fn write_csv(log: &RunLog, mut out: impl Write) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in &log.records {
        write!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            r.t, r.l0, r.err_e, r.norm_delta, r.norm_gamma_err, r.n_visible
        )?;
        for x in r.h.iter().chain(r.h_hat.iter()) {
            write!(out, ",{x:.16e}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn write_json(log: &RunLog, out: impl Write) -> Result<()> {
    serde_json::to_writer(out, log)?;
    Ok(())
}

pub fn read_json(path: impl AsRef<Path>) -> Result<RunLog> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
