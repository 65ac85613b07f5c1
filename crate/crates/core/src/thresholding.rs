//! Entrywise thresholding of correlation matrices: the positive definite
//! path (apply a Gegenbauer series, PSD guaranteed for rank <= n inputs),
//! the hard-thresholding baseline (generally breaks PSD), and shrinkage
//! repair toward the identity.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gegenbauer::GegenbauerSeries;
use crate::linalg::{certify_correlation, CorrelationMatrix, SymmetricMatrix, PSD_TOL};

/// Diagnostics for one thresholding application.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdReport {
    pub min_eig_before: f64,
    pub min_eig_after: f64,
    pub rank_before: usize,
    pub tau_used: f64,
    pub max_abs_entry_change: f64,
    /// Entries outside the sandwich bounds beyond 1e-9 slack.
    pub sandwich_violations: usize,
    /// Off-diagonal outputs with magnitude <= 1e-12.
    pub entries_zeroed: usize,
}

/// Evaluate `f` on every off-diagonal entry. Exposed (hidden) so the bench
/// suite can compare the parallel and sequential paths directly.
#[doc(hidden)]
pub fn entrywise_values(
    series: &GegenbauerSeries,
    m: &SymmetricMatrix,
    parallel: bool,
) -> Result<SymmetricMatrix> {
    let n = m.dim();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let eval_pair = |&(i, j): &(usize, usize)| -> Result<f64> {
        let t = m.get(i, j);
        if t.abs() > 1.0 + 1e-9 {
            return Err(Error::invalid(format!(
                "entry ({i},{j}) = {t} too far outside [-1, 1]"
            )));
        }
        series.eval(t.clamp(-1.0, 1.0))
    };
    let values: Result<Vec<f64>> = if parallel {
        #[cfg(feature = "parallel")]
        {
            pairs.par_iter().map(eval_pair).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            pairs.iter().map(eval_pair).collect()
        }
    } else {
        pairs.iter().map(eval_pair).collect()
    };
    let values = values?;
    let mut out = SymmetricMatrix::identity(n);
    for ((i, j), v) in pairs.into_iter().zip(values) {
        out.set_sym(i, j, v);
    }
    Ok(out)
}

fn build_report(
    before: &CorrelationMatrix,
    after: &SymmetricMatrix,
    min_eig_after: f64,
    tau: f64,
) -> ThresholdReport {
    let n = before.dim();
    let mut max_change = 0.0f64;
    let mut violations = 0usize;
    let mut zeroed = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            let b = before.base().get(i, j);
            let a = after.get(i, j);
            max_change = max_change.max((a - b).abs());
            let (lo, hi) = crate::faithfulness::sandwich_bounds(tau, b);
            if a < lo - 1e-9 || a > hi + 1e-9 {
                violations += 1;
            }
            if a.abs() <= 1e-12 {
                zeroed += 1;
            }
        }
    }
    ThresholdReport {
        min_eig_before: before.min_eig(),
        min_eig_after,
        rank_before: before.numeric_rank(),
        tau_used: tau,
        max_abs_entry_change: max_change,
        sandwich_violations: violations,
        entries_zeroed: zeroed,
    }
}

/// Entrywise application without PSD certification of the output; used when
/// the rank hypothesis is deliberately violated and a negative eigenvalue is
/// the expected observation.
pub fn apply_entrywise_unchecked(
    series: &GegenbauerSeries,
    m: &CorrelationMatrix,
) -> Result<(SymmetricMatrix, ThresholdReport)> {
    if !series.is_unital(1e-9) {
        return Err(Error::invalid(format!(
            "series is not unital: f(1) = {} drifts beyond 1e-9",
            series.coeff_sum()
        )));
    }
    if !series.is_positive_definite(1e-10) {
        return Err(Error::invalid(format!(
            "series has negative coefficients (min {})",
            series.min_coeff()
        )));
    }
    let out = entrywise_values(series, m.base(), cfg!(feature = "parallel"))?;
    let min_eig_after = out.min_eigenvalue()?;
    let tau = series.coeffs().get(1).copied().unwrap_or(0.0);
    let report = build_report(m, &out, min_eig_after, tau);
    Ok((out, report))
}

/// Apply a unital positive definite series entrywise. For inputs with
/// numeric rank at most `n` the output is PSD by Schoenberg's theorem; a
/// certification failure under that hypothesis is an internal error.
pub fn apply_entrywise(
    series: &GegenbauerSeries,
    m: &CorrelationMatrix,
) -> Result<(CorrelationMatrix, ThresholdReport)> {
    let rank_ok = m.numeric_rank() <= series.context().n() as usize;
    let (out, report) = apply_entrywise_unchecked(series, m)?;
    match certify_correlation(&out, PSD_TOL) {
        Ok(cert) => Ok((cert, report)),
        Err(e) if rank_ok => Err(Error::Internal(format!(
            "PSD certification failed with rank {} <= n {}: {e}",
            m.numeric_rank(),
            series.context().n()
        ))),
        Err(e) => Err(e),
    }
}

/// Hard thresholding baseline: zero off-diagonal entries with magnitude
/// below `eps`. Output is generally not PSD; `min_eig_after` is reported
/// either way.
pub fn hard_threshold(
    m: &CorrelationMatrix,
    eps: f64,
) -> Result<(SymmetricMatrix, ThresholdReport)> {
    if !(0.0..1.0).contains(&eps) || eps == 0.0 {
        return Err(Error::invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    let n = m.dim();
    let mut out = SymmetricMatrix::identity(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = m.base().get(i, j);
            out.set_sym(i, j, if v.abs() >= eps { v } else { 0.0 });
        }
    }
    let min_eig_after = out.min_eigenvalue()?;
    let report = build_report(m, &out, min_eig_after, 1.0);
    Ok((out, report))
}

/// Minimal Ledoit-Wolf style convex combination with the identity that
/// restores PSD: `lambda = max(0, -mu/(1-mu))` for `mu` the minimum
/// eigenvalue. Preserves the zero pattern.
pub fn shrinkage_repair(m: &SymmetricMatrix) -> Result<(f64, CorrelationMatrix)> {
    let n = m.dim();
    for i in 0..n {
        if (m.get(i, i) - 1.0).abs() > 1e-10 {
            return Err(Error::invalid("shrinkage repair requires unit diagonal"));
        }
    }
    let mu = m.min_eigenvalue()?;
    if mu >= 1.0 && n > 1 {
        // trace = n forces mu <= 1 with equality only for the identity
        return Err(Error::Internal(format!("minimum eigenvalue {mu} >= 1 for unit-diagonal input")));
    }
    // eigenvalue noise at the 1e-14 level is not a real deficiency
    let lambda = if mu >= -1e-14 { 0.0 } else { -mu / (1.0 - mu) };
    let mut out = SymmetricMatrix::identity(n);
    for i in 0..n {
        for j in (i + 1)..n {
            out.set_sym(i, j, (1.0 - lambda) * m.get(i, j));
        }
    }
    let cert = certify_correlation(&out, PSD_TOL)?;
    Ok((lambda, cert))
}

/// Count sandwich-inequality violations between two certified matrices.
pub fn deviation_report(
    before: &CorrelationMatrix,
    after: &CorrelationMatrix,
    tau: f64,
) -> Result<ThresholdReport> {
    if before.dim() != after.dim() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {} vs {}",
            before.dim(),
            after.dim()
        )));
    }
    Ok(build_report(before, after.base(), after.min_eig(), tau))
}
