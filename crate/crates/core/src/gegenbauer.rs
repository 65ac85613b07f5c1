//! Normalized Gegenbauer (ultraspherical) polynomials for the sphere S^{n-1}.
//!
//! All polynomials are scaled so that `G_k(1) = 1`. Evaluation goes through
//! the normalized three-term recurrence
//!
//! ```text
//! t G_k(t) = c_k G_{k+1}(t) + b_k G_{k-1}(t),
//! c_k = (k+n-2)/(2k+n-2),  b_k = k/(2k+n-2),  b_0 = 0
//! ```
//!
//! which avoids the overflow of the classical `C_k^{(alpha)}(1)` normalizers
//! at large degree.

use crate::error::{Error, Result};

/// Tolerance for clamping evaluation points slightly outside [-1, 1].
const CLAMP_TOL: f64 = 1e-12;

/// The ambient dimension `n` of the sphere S^{n-1} and the derived
/// ultraspherical parameter `alpha = (n-2)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SphereContext {
    n: u32,
}

impl SphereContext {
    pub fn new(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("sphere dimension n must be >= 2, got {n}")));
        }
        Ok(SphereContext { n })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        (self.n as f64 - 2.0) / 2.0
    }

    /// Forward and backward transition weights `(c_k, b_k)` of the
    /// normalized recurrence. They satisfy `c_k + b_k = 1`.
    pub fn recurrence_weights(&self, k: u32) -> (f64, f64) {
        if k == 0 {
            return (1.0, 0.0);
        }
        let n = self.n as f64;
        let k = k as f64;
        let denom = 2.0 * k + n - 2.0;
        ((k + n - 2.0) / denom, k / denom)
    }

    /// Dimension `d_k` of the space of degree-`k` spherical harmonics on
    /// S^{n-1}: `C(n+k-1, k) - C(n+k-3, k-2)`.
    pub fn harmonic_dimension(&self, k: u32) -> Result<u128> {
        let n = self.n as u128;
        let k = k as u128;
        let a = binomial(n + k - 1, k)
            .ok_or_else(|| Error::Overflow(format!("d_{k}({n}) exceeds u128")))?;
        let b = if k >= 2 {
            binomial(n + k - 3, k - 2)
                .ok_or_else(|| Error::Overflow(format!("d_{k}({n}) exceeds u128")))?
        } else {
            0
        };
        Ok(a - b)
    }

    /// `d_k` in floating point, overflow-free for degrees where the exact
    /// integer path would exceed u128.
    pub fn harmonic_dimension_f64(&self, k: u32) -> Result<f64> {
        let n = self.n as f64;
        let k = k as f64;
        let a = binomial_f64(n + k - 1.0, k);
        let b = if k >= 2.0 { binomial_f64(n + k - 3.0, k - 2.0) } else { 0.0 };
        let d = a - b;
        if !d.is_finite() {
            return Err(Error::Overflow(format!("d_{k}({n}) exceeds f64")));
        }
        Ok(d)
    }

    /// Evaluate the normalized polynomial `G_k(t)`.
    pub fn eval_gegenbauer(&self, k: u32, t: f64) -> Result<f64> {
        let t = clamp_unit(t)?;
        Ok(self.eval_upward(k, t).1)
    }

    /// Evaluate `G_0(t) .. G_{k_max}(t)` in one recurrence pass.
    pub fn eval_all(&self, k_max: u32, t: f64) -> Result<Vec<f64>> {
        let t = clamp_unit(t)?;
        let mut vals = Vec::with_capacity(k_max as usize + 1);
        vals.push(1.0);
        if k_max == 0 {
            return Ok(vals);
        }
        vals.push(t);
        let mut prev = 1.0;
        let mut cur = t;
        for k in 1..k_max {
            let (c, b) = self.recurrence_weights(k);
            let next = (t * cur - b * prev) / c;
            vals.push(next);
            prev = cur;
            cur = next;
        }
        Ok(vals)
    }

    // Returns (G_{k-1}(t), G_k(t)); G_{-1} taken as 0.
    fn eval_upward(&self, k: u32, t: f64) -> (f64, f64) {
        if k == 0 {
            return (0.0, 1.0);
        }
        let mut prev = 1.0;
        let mut cur = t;
        for j in 1..k {
            let (c, b) = self.recurrence_weights(j);
            let next = (t * cur - b * prev) / c;
            prev = cur;
            cur = next;
        }
        (prev, cur)
    }

    /// Derivative `(G_k)'(t)` via the differentiation identity
    /// `(G_k)'(t) = k(k+n-2)/(n-1) * G~_{k-1}(t)` where `G~` is the
    /// normalized polynomial for ambient dimension `n + 2`.
    pub fn eval_derivative(&self, k: u32, t: f64) -> Result<f64> {
        let t = clamp_unit(t)?;
        if k == 0 {
            return Ok(0.0);
        }
        let n = self.n as f64;
        let prefactor = (k as f64) * (k as f64 + n - 2.0) / (n - 1.0);
        let shifted = SphereContext::new(self.n + 2)?;
        Ok(prefactor * shifted.eval_upward(k - 1, t).1)
    }

    /// Fit the decay exponent of the oscillation envelope of
    /// `|G_k(cos theta)|` over `k` in `[k_min, k_max]` and compare it with
    /// the expected `(2-n)/2`.
    pub fn darboux_decay_fit(&self, theta: f64, k_min: u32, k_max: u32) -> Result<DecayFit> {
        if !(0.2..=std::f64::consts::PI - 0.2).contains(&theta) {
            return Err(Error::domain(format!(
                "theta = {theta} too close to a pole; need 0.2 <= theta <= pi - 0.2"
            )));
        }
        if k_min < 10 || k_max < 10 * k_min {
            return Err(Error::invalid(format!(
                "need k_max >= 10*k_min >= 100, got [{k_min}, {k_max}]"
            )));
        }
        let t = theta.cos();
        let vals = self.eval_all(k_max, t)?;

        // Running maxima over one-period windows suppress the oscillation
        // zeros that would otherwise wreck the log-log fit.
        let window = (2.0 * std::f64::consts::PI / theta).ceil() as usize;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut k = k_min as usize;
        while k + window <= k_max as usize + 1 {
            let m = vals[k..k + window].iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if m > 0.0 {
                let mid = k as f64 + window as f64 / 2.0;
                xs.push(mid.ln());
                ys.push(m.ln());
            }
            k += window;
        }
        if xs.len() < 3 {
            return Err(Error::numeric("too few envelope windows for the decay fit"));
        }
        let slope = least_squares_slope(&xs, &ys);
        Ok(DecayFit {
            fitted_exponent: slope,
            expected_exponent: (2.0 - self.n as f64) / 2.0,
            k_range: (k_min, k_max),
            theta,
        })
    }
}

/// Result of fitting the Darboux envelope exponent.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    pub fitted_exponent: f64,
    pub expected_exponent: f64,
    pub k_range: (u32, u32),
    pub theta: f64,
}

/// A finite expansion `f(t) = sum a_k G_k(t)` in the normalized Gegenbauer
/// basis for a fixed sphere dimension. The universal representation of
/// thresholding functions in this crate.
#[derive(Debug, Clone)]
pub struct GegenbauerSeries {
    context: SphereContext,
    coeffs: Vec<f64>,
}

impl GegenbauerSeries {
    pub fn new(context: SphereContext, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("coefficient vector must be nonempty"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("coefficients must be finite"));
        }
        Ok(GegenbauerSeries { context, coeffs })
    }

    pub fn context(&self) -> SphereContext {
        self.context
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> u32 {
        (self.coeffs.len() - 1) as u32
    }

    /// `sum a_k` = `f(1)`, since `G_k(1) = 1`.
    pub fn coeff_sum(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    pub fn min_coeff(&self) -> f64 {
        self.coeffs.iter().fold(f64::INFINITY, |a, &c| a.min(c))
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        (self.coeff_sum() - 1.0).abs() <= tol
    }

    pub fn is_positive_definite(&self, tol: f64) -> bool {
        self.min_coeff() >= -tol
    }

    /// Evaluate the series by a backward (Clenshaw-style) recurrence on the
    /// normalized weights.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let t = clamp_unit(t)?;
        // G_{k+1} = (t/c_k) G_k - (b_k/c_k) G_{k-1}; run Clenshaw downward.
        let n = self.coeffs.len();
        let mut u1 = 0.0; // u_{k+1}
        let mut u2 = 0.0; // u_{k+2}
        for k in (0..n).rev() {
            let (ck, _) = self.context.recurrence_weights(k as u32);
            let a_k1 = t / ck;
            let (_, bk1) = self.context.recurrence_weights(k as u32 + 1);
            let (ck1, _) = self.context.recurrence_weights(k as u32 + 1);
            let b_k1 = -bk1 / ck1;
            let u = self.coeffs[k] + a_k1 * u1 + b_k1 * u2;
            u2 = u1;
            u1 = u;
        }
        Ok(u1)
    }

    /// Derivative `f'(t)` by termwise differentiation.
    pub fn eval_derivative(&self, t: f64) -> Result<f64> {
        let t = clamp_unit(t)?;
        let mut acc = 0.0;
        for (k, &a) in self.coeffs.iter().enumerate() {
            if a != 0.0 {
                acc += a * self.context.eval_derivative(k as u32, t)?;
            }
        }
        Ok(acc)
    }
}

pub(crate) fn clamp_unit(t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::invalid(format!("evaluation point must be finite, got {t}")));
    }
    if t > 1.0 + CLAMP_TOL || t < -1.0 - CLAMP_TOL {
        return Err(Error::invalid(format!("evaluation point {t} outside [-1, 1]")));
    }
    Ok(t.clamp(-1.0, 1.0))
}

fn binomial_f64(n: f64, k: f64) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    let mut i = 0.0;
    while i < k {
        acc *= (n - i) / (i + 1.0);
        i += 1.0;
    }
    acc
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)?;
        acc /= i + 1;
    }
    Some(acc)
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
