//! File formats: plain CSV matrices (no header, 17 significant digits on
//! output) and the JSON coefficient interchange format shared by the CLI
//! subcommands.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::faithfulness::ThresholdSet;
use crate::gegenbauer::{GegenbauerSeries, SphereContext};
use crate::linalg::SymmetricMatrix;
use crate::thresholding::ThresholdReport;

/// Canonical JSON interchange format for Gegenbauer series.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefficientFile {
    pub n: u32,
    pub degree: u32,
    pub coeffs: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold_set: Option<ThresholdSet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
}

impl CoefficientFile {
    pub fn from_series(series: &GegenbauerSeries, set: Option<ThresholdSet>, tau: Option<f64>) -> Self {
        CoefficientFile {
            n: series.context().n(),
            degree: series.degree(),
            coeffs: series.coeffs().to_vec(),
            threshold_set: set,
            tau,
        }
    }

    pub fn to_series(&self) -> Result<GegenbauerSeries> {
        if self.coeffs.len() != self.degree as usize + 1 {
            return Err(Error::invalid(format!(
                "coefficient file degree {} inconsistent with {} coefficients",
                self.degree,
                self.coeffs.len()
            )));
        }
        GegenbauerSeries::new(SphereContext::new(self.n)?, self.coeffs.clone())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Report JSON written next to thresholded matrices.
#[derive(Debug, Clone, Serialize)]
pub struct ReportFile<'a> {
    #[serde(flatten)]
    pub report: &'a ThresholdReport,
    pub tool_version: &'static str,
}

pub fn write_report(report: &ThresholdReport, path: &Path) -> Result<()> {
    let file = ReportFile { report, tool_version: env!("CARGO_PKG_VERSION") };
    std::fs::write(path, serde_json::to_string_pretty(&file)? + "\n")?;
    Ok(())
}

/// Read an N x N matrix from headerless CSV.
pub fn read_matrix_csv(path: &Path) -> Result<SymmetricMatrix> {
    let text = std::fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        let row = row.map_err(|e| {
            Error::invalid(format!("{}: line {}: {e}", path.display(), lineno + 1))
        })?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(Error::invalid(format!("{}: empty matrix", path.display())));
    }
    let mut data = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::invalid(format!(
                "{}: row {} has {} columns, expected {n}",
                path.display(),
                i + 1,
                row.len()
            )));
        }
        data.extend_from_slice(row);
    }
    SymmetricMatrix::from_rows(n, data)
}

/// Write a matrix as headerless CSV with 17 significant digits.
pub fn write_matrix_csv(m: &SymmetricMatrix, path: &Path) -> Result<()> {
    let n = m.dim();
    let mut out = String::new();
    for i in 0..n {
        for j in 0..n {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!("{:.16e}", m.get(i, j)));
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}
