//! Faithfulness of positive definite thresholding functions.
//!
//! A thresholding set `K` is annihilated by a unital positive definite
//! function `f = sum a_k G_k` (all `a_k >= 0`, `sum a_k = 1`) and the
//! faithfulness constant is the largest attainable linear coefficient
//! `a_1`. This module provides the linear programs computing it, the
//! closed-form one-point / two-point / interval bounds, the cap
//! autocorrelation existence construction, the structural difference
//! inequality check, and the classical Delsarte code bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gegenbauer::{GegenbauerSeries, SphereContext};
use crate::linalg::{gauss_gegenbauer, CounterRng};
use crate::lp::{self, LinearProgram, LpStatus};

/// Residual tolerance for "vanishes on K" in the cutting-plane loops.
const VANISH_TOL: f64 = 1e-8;
/// Stagnation threshold for the degree-doubling ladder.
const TAU_STAGNATION: f64 = 1e-8;
const DEGREE_START: u32 = 64;
const DEGREE_CAP: u32 = 4096;
const MAX_CUT_ROUNDS: usize = 200;
const INITIAL_INTERVAL_NODES: usize = 33;
const CHECK_GRID: usize = 2049;

/// The set `K` of correlation values to annihilate.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ThresholdSet {
    Finite { points: Vec<f64> },
    Interval { lo: f64, hi: f64 },
    Union { points: Vec<f64>, intervals: Vec<[f64; 2]> },
}

impl ThresholdSet {
    pub fn finite(mut points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("threshold set must be nonempty"));
        }
        points.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let set = ThresholdSet::Finite { points };
        set.validate()?;
        Ok(set)
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        let set = ThresholdSet::Interval { lo, hi };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ThresholdSet::Finite { points } => {
                if points.is_empty() {
                    return Err(Error::invalid("threshold set must be nonempty"));
                }
                for &p in points {
                    if !p.is_finite() || !(-1.0..1.0).contains(&p) {
                        return Err(Error::invalid(format!("threshold point {p} outside [-1, 1)")));
                    }
                }
                for w in points.windows(2) {
                    if (w[1] - w[0]).abs() <= 1e-12 {
                        return Err(Error::invalid(format!("duplicate threshold point {}", w[0])));
                    }
                }
            }
            ThresholdSet::Interval { lo, hi } => {
                if !lo.is_finite() || !hi.is_finite() || *lo <= -1.0 || *hi >= 1.0 || lo >= hi {
                    return Err(Error::invalid(format!(
                        "interval [{lo}, {hi}] must satisfy -1 < lo < hi < 1"
                    )));
                }
            }
            ThresholdSet::Union { points, intervals } => {
                if points.is_empty() && intervals.is_empty() {
                    return Err(Error::invalid("threshold set must be nonempty"));
                }
                for &p in points {
                    if !p.is_finite() || !(-1.0..1.0).contains(&p) {
                        return Err(Error::invalid(format!("threshold point {p} outside [-1, 1)")));
                    }
                }
                for iv in intervals {
                    ThresholdSet::Interval { lo: iv[0], hi: iv[1] }.validate()?;
                }
            }
        }
        Ok(())
    }

    pub fn points(&self) -> &[f64] {
        match self {
            ThresholdSet::Finite { points } => points,
            ThresholdSet::Union { points, .. } => points,
            ThresholdSet::Interval { .. } => &[],
        }
    }

    pub fn intervals(&self) -> Vec<[f64; 2]> {
        match self {
            ThresholdSet::Interval { lo, hi } => vec![[*lo, *hi]],
            ThresholdSet::Union { intervals, .. } => intervals.clone(),
            ThresholdSet::Finite { .. } => Vec::new(),
        }
    }

    /// Supremum of the set.
    pub fn sup(&self) -> f64 {
        let p = self.points().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let i = self
            .intervals()
            .iter()
            .map(|iv| iv[1])
            .fold(f64::NEG_INFINITY, f64::max);
        p.max(i)
    }

    /// True iff `K = -K` exactly (within 1e-12 pairing).
    pub fn is_symmetric(&self) -> bool {
        let pts = self.points();
        let sym_points = pts.iter().all(|&p| {
            pts.iter().any(|&q| (q + p).abs() <= 1e-12)
        });
        let ivs = self.intervals();
        let sym_intervals = ivs.iter().all(|iv| {
            ivs.iter().any(|jv| (jv[0] + iv[1]).abs() <= 1e-12 && (jv[1] + iv[0]).abs() <= 1e-12)
        });
        sym_points && sym_intervals
    }

    fn covers_zero(&self) -> bool {
        self.intervals().iter().any(|iv| iv[0] <= 0.0 && iv[1] >= 0.0)
    }
}

/// Outcome of a faithfulness optimization: the optimal linear coefficient
/// `tau`, the optimizing series, and diagnostics.
#[derive(Debug, Clone)]
pub struct FaithfulnessResult {
    pub tau: f64,
    pub optimizer: GegenbauerSeries,
    pub degree_used: u32,
    /// sup |f| over the check grid on K.
    pub residual_sup: f64,
    /// `1/sqrt(tau)`: operator norm of the linear recovery map.
    pub recovery_norm: f64,
    pub solver_status: String,
    pub iterations: usize,
}

impl FaithfulnessResult {
    fn new(
        optimizer: GegenbauerSeries,
        tau: f64,
        residual_sup: f64,
        status: impl Into<String>,
        iterations: usize,
    ) -> Self {
        let degree_used = optimizer.degree();
        FaithfulnessResult {
            tau,
            recovery_norm: tau.powf(-0.5),
            optimizer,
            degree_used,
            residual_sup,
            solver_status: status.into(),
            iterations,
        }
    }
}

/// Margins of the second-order difference inequality
/// `c_{k-1} a_{k-1} + b_{k+1} a_{k+1} <= a_1 d_k / n`.
#[derive(Debug, Clone)]
pub struct StructuralReport {
    pub margins: Vec<f64>,
}

impl StructuralReport {
    pub fn min_margin(&self) -> f64 {
        self.margins.iter().fold(f64::INFINITY, |a, &m| a.min(m))
    }

    pub fn violations(&self, tol: f64) -> usize {
        self.margins.iter().filter(|&&m| m < -tol).count()
    }
}

/// Positive definite function built by autocorrelating a spherical cap
/// indicator; supported on `[cos 2r, 1]`.
#[derive(Debug, Clone)]
pub struct CapKernel {
    pub context: SphereContext,
    pub radius_r: f64,
    pub series: GegenbauerSeries,
    pub support_edge: f64,
}

/// Two-term lower-bound construction for `K = {eps}`:
/// `a_1 = -G_2(eps) / (eps - G_2(eps))`, valid while `G_2(eps) < 0`,
/// i.e. `eps < 1/sqrt(n)`.
pub fn one_point_construction(ctx: SphereContext, eps: f64) -> Result<FaithfulnessResult> {
    if !(0.0..1.0).contains(&eps) || eps == 0.0 {
        return Err(Error::invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    let g2 = ctx.eval_gegenbauer(2, eps)?;
    if g2 >= 0.0 {
        return Err(Error::domain(format!(
            "construction inapplicable: G_2({eps}) = {g2} >= 0 (need eps < 1/sqrt(n))"
        )));
    }
    let a1 = -g2 / (eps - g2);
    let series = GegenbauerSeries::new(ctx, vec![0.0, a1, 1.0 - a1])?;
    let residual = series.eval(eps)?.abs();
    debug_assert!(residual <= 1e-12);
    Ok(FaithfulnessResult::new(series, a1, residual, "closed-form", 0))
}

/// Exact faithfulness for `K = {-eps, eps}`:
/// `tau = S / (eps + S)` with `S = sup_k G_{2k-1}(-eps)`; the witness is
/// supported on degrees 1 and the maximizing odd degree.
pub fn two_point_faithfulness(
    ctx: SphereContext,
    eps: f64,
    k_cap: Option<u32>,
) -> Result<FaithfulnessResult> {
    if !(0.0..1.0).contains(&eps) || eps == 0.0 {
        return Err(Error::invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    // Darboux decay is slow for n <= 3, so the scan defaults deeper there.
    let k_cap = k_cap.unwrap_or(if ctx.n() <= 3 { 50_000 } else { 5_000 });
    if k_cap < 1 {
        return Err(Error::invalid("k_cap must be >= 1"));
    }
    let max_degree = 2 * k_cap - 1;
    let vals = ctx.eval_all(max_degree, -eps)?;
    let mut sigma = f64::NEG_INFINITY;
    let mut best_degree = 0u32;
    let mut deg = 1u32;
    while deg <= max_degree {
        if vals[deg as usize] > sigma {
            sigma = vals[deg as usize];
            best_degree = deg;
        }
        deg += 2;
    }
    if !(sigma > 0.0) {
        return Err(Error::numeric(format!(
            "no positive odd value of G_k(-{eps}) found up to degree {max_degree}"
        )));
    }
    let tau = sigma / (eps + sigma);
    let mut coeffs = vec![0.0; best_degree as usize + 1];
    coeffs[1] = tau;
    coeffs[best_degree as usize] += eps / (eps + sigma);
    let series = GegenbauerSeries::new(ctx, coeffs)?;
    let residual = series.eval(eps)?.abs().max(series.eval(-eps)?.abs());
    if residual > 1e-10 {
        return Err(Error::numeric(format!(
            "two-point witness fails to vanish: residual {residual:.3e}"
        )));
    }
    Ok(FaithfulnessResult::new(
        series,
        tau,
        residual,
        format!("closed-form, argmax degree {best_degree}"),
        0,
    ))
}

/// Limiting interval bound `lim_{eps->0} tau <= S/(1+S)` with
/// `S = sup_{k odd, k>=3} |(G_k)'(0)|`.
#[derive(Debug, Clone, Copy)]
pub enum IntervalLimitBound {
    /// n in {2, 3}: the supremum is infinite, the bound is the trivial 1.
    Trivial,
    Bound { value: f64, sigma: f64, attained_at: u32 },
}

pub fn interval_limit_bound(ctx: SphereContext) -> Result<IntervalLimitBound> {
    if ctx.n() <= 3 {
        return Ok(IntervalLimitBound::Trivial);
    }
    let n = ctx.n() as f64;
    // (G_k)'(0) = k(k+n-2)/(n-1) * G~_{k-1}(0) in ambient dimension n+2;
    // one recurrence pass covers the whole scan.
    let cap: u32 = 20_001;
    let shifted = SphereContext::new(ctx.n() + 2)?;
    let vals = shifted.eval_all(cap - 1, 0.0)?;
    let deriv = |k: u32| -> f64 {
        (k as f64) * (k as f64 + n - 2.0) / (n - 1.0) * vals[(k - 1) as usize]
    };
    // Envelope |(G_k)'(0)| = O(k^{(4-n)/2}); once ten times the calibrated
    // envelope falls below the running max the scan cannot improve.
    let exponent = (4.0 - n) / 2.0;
    let mut envelope_c = 0.0f64;
    let mut k = 3u32;
    while k <= 101.min(cap - 1) {
        envelope_c = envelope_c.max(deriv(k).abs() / (k as f64).powf(exponent));
        k += 2;
    }
    let mut sigma = 0.0f64;
    let mut attained_at = 3u32;
    let mut k = 3u32;
    while k < cap {
        let v = deriv(k).abs();
        if v > sigma {
            sigma = v;
            attained_at = k;
        }
        if 10.0 * envelope_c * (k as f64).powf(exponent) < sigma {
            break;
        }
        k += 2;
    }
    Ok(IntervalLimitBound::Bound { value: sigma / (1.0 + sigma), sigma, attained_at })
}

// Degrees of the basis used in the LP: all of 0..=N, or odd only when K is
// symmetric ("we may take f odd").
fn basis_degrees(max_degree: u32, odd_only: bool) -> Vec<u32> {
    if odd_only {
        (1..=max_degree).step_by(2).collect()
    } else {
        (0..=max_degree).collect()
    }
}

struct LpOutcome {
    tau: f64,
    coeffs: Vec<f64>, // full vector, index = degree
    iterations: usize,
    rounds: usize,
    residual_sup: f64,
}

// One cutting-plane run at a fixed degree. `objective_degree` is the degree
// whose coefficient is maximized (1 for faithfulness, 0 for Delsarte).
fn solve_at_degree(
    ctx: SphereContext,
    set: &ThresholdSet,
    max_degree: u32,
    odd_only: bool,
    derivative_row: bool,
) -> Result<Option<LpOutcome>> {
    let degrees = basis_degrees(max_degree, odd_only);
    let nv = degrees.len();
    let obj_pos = degrees.iter().position(|&k| k == 1).ok_or_else(|| {
        Error::invalid("basis must contain degree 1")
    })?;
    let mut objective = vec![0.0; nv];
    objective[obj_pos] = 1.0;

    let mut nodes: Vec<f64> = set.points().to_vec();
    for iv in set.intervals() {
        let mid = 0.5 * (iv[0] + iv[1]);
        let half = 0.5 * (iv[1] - iv[0]);
        for i in 0..INITIAL_INTERVAL_NODES {
            let x = (std::f64::consts::PI * i as f64 / (INITIAL_INTERVAL_NODES - 1) as f64).cos();
            nodes.push(mid + half * x);
        }
    }

    let row_for = |t: f64| -> Result<Vec<f64>> {
        let vals = ctx.eval_all(max_degree, t)?;
        Ok(degrees.iter().map(|&k| vals[k as usize]).collect())
    };

    let mut total_iterations = 0usize;
    for round in 0..MAX_CUT_ROUNDS {
        let mut eq_matrix: Vec<f64> = Vec::with_capacity((nodes.len() + 2) * nv);
        let mut eq_rhs: Vec<f64> = Vec::new();
        // unital: sum a_k = 1
        eq_matrix.extend(std::iter::repeat(1.0).take(nv));
        eq_rhs.push(1.0);
        for &t in &nodes {
            eq_matrix.extend(row_for(t)?);
            eq_rhs.push(0.0);
        }
        if derivative_row {
            for &k in &degrees {
                eq_matrix.push(ctx.eval_derivative(k, 0.0)?);
            }
            eq_rhs.push(0.0);
        }

        let lp = LinearProgram { objective: objective.clone(), eq_matrix, eq_rhs };
        let sol = lp::solve(&lp)?;
        total_iterations += sol.iterations;
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return Ok(None),
            LpStatus::Unbounded => {
                return Err(Error::numeric("faithfulness LP unbounded (bug: sum constraint missing)"))
            }
        }

        let mut coeffs = vec![0.0; max_degree as usize + 1];
        for (i, &k) in degrees.iter().enumerate() {
            coeffs[k as usize] = sol.x[i].max(0.0);
        }
        let series = GegenbauerSeries::new(ctx, coeffs.clone())?;

        // residual over K: the fixed points plus a fine grid per interval
        let mut worst = 0.0f64;
        let mut worst_t = None;
        for &t in set.points() {
            worst = worst.max(series.eval(t)?.abs());
        }
        for iv in set.intervals() {
            for i in 0..CHECK_GRID {
                let t = iv[0] + (iv[1] - iv[0]) * i as f64 / (CHECK_GRID - 1) as f64;
                let v = series.eval(t)?.abs();
                if v > worst {
                    worst = v;
                    worst_t = Some(t);
                }
            }
        }
        if worst <= VANISH_TOL || worst_t.is_none() {
            return Ok(Some(LpOutcome {
                tau: sol.objective_value,
                coeffs,
                iterations: total_iterations,
                rounds: round + 1,
                residual_sup: worst,
            }));
        }
        nodes.push(worst_t.unwrap());
    }
    Err(Error::numeric(format!(
        "cutting planes did not reach residual {VANISH_TOL:.0e} in {MAX_CUT_ROUNDS} rounds"
    )))
}

fn solve_threshold(
    ctx: SphereContext,
    set: &ThresholdSet,
    degree: Option<u32>,
) -> Result<FaithfulnessResult> {
    set.validate()?;
    for &p in set.points() {
        if p <= -1.0 || p >= 1.0 {
            return Err(Error::invalid(format!("threshold point {p} outside (-1, 1)")));
        }
    }
    let odd_only = set.is_symmetric();
    let derivative_row = odd_only && set.covers_zero();

    let run = |n: u32| solve_at_degree(ctx, set, n, odd_only, derivative_row);

    let (outcome, degree_used) = match degree {
        Some(d) => {
            let min_degree = set.points().len() as u32 + 1;
            if d < min_degree {
                return Err(Error::invalid(format!(
                    "degree {d} too small for {} threshold points (need >= {min_degree})",
                    set.points().len()
                )));
            }
            let out = run(d)?.ok_or_else(|| {
                Error::numeric(format!(
                    "faithfulness LP infeasible at degree {d}; the existence theorem guarantees \
                     a solution, so the degree cap is too small"
                ))
            })?;
            (out, d)
        }
        None => {
            let mut n = DEGREE_START;
            let mut prev: Option<LpOutcome> = run(n)?;
            loop {
                if n >= DEGREE_CAP {
                    break;
                }
                let next_n = (n * 2).min(DEGREE_CAP);
                let next = run(next_n)?;
                match (&prev, &next) {
                    (Some(p), Some(q)) if (q.tau - p.tau).abs() < TAU_STAGNATION => {
                        prev = next;
                        n = next_n;
                        break;
                    }
                    _ => {
                        if next.is_some() {
                            prev = next;
                        }
                        n = next_n;
                    }
                }
            }
            let out = prev.ok_or_else(|| {
                Error::numeric(format!(
                    "faithfulness LP infeasible up to degree {DEGREE_CAP}; the existence theorem \
                     guarantees a solution, so the degree cap is too small"
                ))
            })?;
            (out, n)
        }
    };

    let series = GegenbauerSeries::new(ctx, outcome.coeffs)?;
    Ok(FaithfulnessResult::new(
        series,
        outcome.tau,
        outcome.residual_sup,
        format!("optimal (degree {degree_used}, {} cutting rounds)", outcome.rounds),
        outcome.iterations,
    ))
}

/// Maximize `a_1` subject to `sum a_k = 1`, `a_k >= 0` and vanishing on the
/// finite set `K`. Auto degree doubles from 64 until `tau` stagnates.
pub fn solve_finite(
    ctx: SphereContext,
    set: &ThresholdSet,
    degree: Option<u32>,
) -> Result<FaithfulnessResult> {
    if !matches!(set, ThresholdSet::Finite { .. }) {
        return Err(Error::invalid("solve_finite requires a finite threshold set"));
    }
    solve_threshold(ctx, set, degree)
}

/// Interval counterpart of [`solve_finite`]: the semi-infinite vanishing
/// constraint is handled by Chebyshev seeding plus cutting planes.
pub fn solve_interval(
    ctx: SphereContext,
    set: &ThresholdSet,
    degree: Option<u32>,
) -> Result<FaithfulnessResult> {
    if !matches!(set, ThresholdSet::Interval { .. }) {
        return Err(Error::invalid("solve_interval requires an interval threshold set"));
    }
    solve_threshold(ctx, set, degree)
}

/// Dispatch on the set kind (also accepts unions).
pub fn solve_set(
    ctx: SphereContext,
    set: &ThresholdSet,
    degree: Option<u32>,
) -> Result<FaithfulnessResult> {
    solve_threshold(ctx, set, degree)
}

/// Margins of the second-order difference inequality for a unital series
/// with nonnegative coefficients. Violations are reported, not enforced.
pub fn structural_check(series: &GegenbauerSeries) -> Result<StructuralReport> {
    let ctx = series.context();
    let n = ctx.n() as f64;
    let a = series.coeffs();
    let big_n = a.len() - 1;
    let a1 = if big_n >= 1 { a[1] } else { 0.0 };
    let coeff = |k: i64| -> f64 {
        if k < 0 || k as usize > big_n {
            0.0
        } else {
            a[k as usize]
        }
    };
    let mut margins = Vec::with_capacity(big_n + 1);
    for k in 0..=big_n as i64 {
        let (c_prev, _) = if k == 0 {
            (0.0, 0.0) // convention c_{-1} = 0
        } else {
            ctx.recurrence_weights(k as u32 - 1)
        };
        let (_, b_next) = ctx.recurrence_weights(k as u32 + 1);
        let d_k = ctx.harmonic_dimension_f64(k as u32)?;
        let lhs = c_prev * coeff(k - 1) + b_next * coeff(k + 1);
        margins.push(a1 * d_k / n - lhs);
    }
    Ok(StructuralReport { margins })
}

/// Expansion coefficients of the cap autocorrelation kernel:
/// `a_k` proportional to `d_k * chat_k^2` where `chat_k` is the projection
/// of the cap indicator `1_{[cos r, 1]}` onto `G_k`, normalized so
/// `f(1) = 1`.
pub fn cap_autocorrelation(
    ctx: SphereContext,
    r: f64,
    degree: u32,
    quad_points: usize,
) -> Result<CapKernel> {
    if !(0.0..std::f64::consts::FRAC_PI_2).contains(&r) || r == 0.0 {
        return Err(Error::domain(format!("cap radius must lie in (0, pi/2), got {r}")));
    }
    if degree > 2048 {
        return Err(Error::invalid(format!("degree capped at 2048, got {degree}")));
    }
    if quad_points < 2 * degree as usize {
        return Err(Error::invalid(format!(
            "need quad_points >= 2*degree, got {quad_points} < {}",
            2 * degree
        )));
    }
    if quad_points < 3 {
        return Err(Error::domain(
            "cap resolves to fewer than 3 quadrature nodes; increase quad_points",
        ));
    }

    // chat_k = int_0^r G_k(cos u) sin^{n-2}(u) du / Z with
    // Z = int_0^pi sin^{n-2}(u) du; Gauss-Legendre nodes mapped onto [0, r].
    let legendre = gauss_gegenbauer(SphereContext::new(3)?, quad_points.min(2048))?;
    let n = ctx.n();
    let z = sin_power_integral(n as i64 - 2);
    let mut chat = vec![0.0f64; degree as usize + 1];
    for (&x, &w) in legendre.nodes.iter().zip(&legendre.weights) {
        let u = r * (x + 1.0) / 2.0;
        let s = u.sin().powi(n as i32 - 2);
        let vals = ctx.eval_all(degree, u.cos())?;
        let f = r * w * s / z;
        for k in 0..=degree as usize {
            chat[k] += f * vals[k];
        }
    }

    let mut coeffs = vec![0.0f64; degree as usize + 1];
    for k in 0..=degree as usize {
        let d_k = ctx.harmonic_dimension_f64(k as u32)?;
        coeffs[k] = d_k * chat[k] * chat[k];
    }
    let total: f64 = coeffs.iter().sum();
    if total <= 0.0 {
        return Err(Error::numeric("cap kernel collapsed to zero; increase quad_points"));
    }
    for c in coeffs.iter_mut() {
        *c /= total;
    }
    let series = GegenbauerSeries::new(ctx, coeffs)?;
    Ok(CapKernel { context: ctx, radius_r: r, series, support_edge: (2.0 * r).cos() })
}

/// Existence construction for an arbitrary compact `K` with `sup K < 1`:
/// pick `r` with `cos 2r` safely above `sup K` and return the cap kernel.
pub fn existence_for_set(ctx: SphereContext, set: &ThresholdSet) -> Result<CapKernel> {
    set.validate()?;
    let sup = set.sup();
    if sup >= 1.0 {
        return Err(Error::invalid(format!("sup K = {sup} must be < 1")));
    }
    let edge = (1.0 + sup) / 2.0; // margin 0.5*(1 - sup K) above sup K
    let r = edge.acos() / 2.0;
    let degree = 512u32;
    cap_autocorrelation(ctx, r, degree, (2 * degree as usize).max(1024))
}

/// Classical Delsarte code bound `|C| <= f(1)/a_0 = 1/a_0` for minimum
/// angle `theta`: maximize `a_0` subject to `sum a_k = 1`, `a_k >= 0`, and
/// `f <= 0` on `[-1, cos theta]` (one slack variable per grid node).
pub fn delsarte_code_bound(ctx: SphereContext, theta: f64, degree: u32) -> Result<f64> {
    if degree < 1 {
        return Err(Error::invalid("degree must be >= 1"));
    }
    if !(theta > 0.0 && theta <= std::f64::consts::PI) {
        return Err(Error::invalid(format!("theta must lie in (0, pi], got {theta}")));
    }
    let cos_theta = theta.cos();
    let nv = degree as usize + 1;
    let grid_points = 513usize;
    let mut nodes: Vec<f64> = (0..grid_points)
        .map(|i| -1.0 + (cos_theta + 1.0) * i as f64 / (grid_points - 1) as f64)
        .collect();

    for _round in 0..MAX_CUT_ROUNDS {
        let ns = nodes.len();
        let total_vars = nv + ns; // coefficients + one slack per node
        let mut objective = vec![0.0; total_vars];
        objective[0] = 1.0;
        let mut eq_matrix = Vec::with_capacity((1 + ns) * total_vars);
        let mut eq_rhs = Vec::with_capacity(1 + ns);
        // sum a_k = 1
        eq_matrix.extend(std::iter::repeat(1.0).take(nv));
        eq_matrix.extend(std::iter::repeat(0.0).take(ns));
        eq_rhs.push(1.0);
        for (j, &t) in nodes.iter().enumerate() {
            let vals = ctx.eval_all(degree, t)?;
            eq_matrix.extend_from_slice(&vals);
            for s in 0..ns {
                eq_matrix.push(if s == j { 1.0 } else { 0.0 });
            }
            eq_rhs.push(0.0);
        }
        let lp = LinearProgram { objective, eq_matrix, eq_rhs };
        let sol = lp::solve(&lp)?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::numeric(format!("Delsarte LP terminated as {:?}", sol.status)));
        }
        let coeffs: Vec<f64> = sol.x[..nv].iter().map(|&v| v.max(0.0)).collect();
        let series = GegenbauerSeries::new(ctx, coeffs)?;
        // refine: largest positive excursion of f over [-1, cos theta]
        let mut worst = 0.0f64;
        let mut worst_t = None;
        for i in 0..CHECK_GRID {
            let t = -1.0 + (cos_theta + 1.0) * i as f64 / (CHECK_GRID - 1) as f64;
            let v = series.eval(t)?;
            if v > worst {
                worst = v;
                worst_t = Some(t);
            }
        }
        if worst <= VANISH_TOL || worst_t.is_none() {
            let a0 = sol.objective_value;
            if a0 <= 0.0 {
                return Err(Error::numeric(format!("Delsarte LP produced a_0 = {a0} <= 0")));
            }
            return Ok(1.0 / a0);
        }
        nodes.push(worst_t.unwrap());
    }
    Err(Error::numeric(format!(
        "Delsarte cutting planes did not converge in {MAX_CUT_ROUNDS} rounds"
    )))
}

/// The sandwich inequality: entrywise bounds
/// `tau*t - (1-tau) <= f(t) <= tau*t + (1-tau)`.
pub fn sandwich_bounds(tau: f64, t: f64) -> (f64, f64) {
    (tau * t - (1.0 - tau), tau * t + (1.0 - tau))
}

/// Independent Monte Carlo oracle for the cap kernel on S^2 (n = 3):
/// sample uniformly in the cap around `x` and estimate the conditional
/// probability of also landing in the cap around `y`, which equals
/// `f(<x, y>)` after the f(1) = 1 normalization.
pub fn cap_intersection_monte_carlo(r: f64, t: f64, samples: usize, seed: u64) -> f64 {
    let cos_r = r.cos();
    let gamma = t.clamp(-1.0, 1.0).acos();
    // x = north pole, y tilted by gamma in the xz-plane
    let (sy, cy) = (gamma.sin(), gamma.cos());
    let mut rng = CounterRng::new(seed);
    let mut hits = 0usize;
    for _ in 0..samples {
        // uniform in the cap around the pole: z uniform on [cos r, 1]
        let z = cos_r + (1.0 - cos_r) * rng.next_uniform();
        let phi = 2.0 * std::f64::consts::PI * rng.next_uniform();
        let rho = (1.0 - z * z).sqrt();
        let px = rho * phi.cos();
        // membership in the cap around y: p . y >= cos r
        if px * sy + z * cy >= cos_r {
            hits += 1;
        }
    }
    hits as f64 / samples as f64
}

fn sin_power_integral(m: i64) -> f64 {
    // int_0^pi sin^m(u) du by the downward recurrence I_m = I_{m-2}(m-1)/m
    match m {
        0 => std::f64::consts::PI,
        1 => 2.0,
        _ => sin_power_integral(m - 2) * (m - 1) as f64 / m as f64,
    }
}
