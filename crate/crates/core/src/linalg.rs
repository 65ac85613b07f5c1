//! Dense symmetric linear algebra: a cyclic Jacobi eigensolver, PSD
//! certification for correlation matrices, Gauss quadrature for the
//! ultraspherical weight, and a deterministic low-rank Gram generator.

use crate::error::{Error, Result};
use crate::gegenbauer::SphereContext;

pub const PSD_TOL: f64 = 1e-8;
pub const RANK_TOL: f64 = 1e-9;
const JACOBI_MAX_SWEEPS: usize = 60;

/// Dense symmetric matrix, symmetrized on construction.
#[derive(Debug, Clone)]
pub struct SymmetricMatrix {
    dim: usize,
    data: Vec<f64>, // row-major, dim x dim
}

impl SymmetricMatrix {
    /// Build from row-major entries; off-diagonal pairs are averaged.
    pub fn from_rows(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("matrix dimension must be >= 1"));
        }
        if entries.len() != dim * dim {
            return Err(Error::invalid(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        let mut data = entries;
        for i in 0..dim {
            for j in (i + 1)..dim {
                let avg = 0.5 * (data[i * dim + j] + data[j * dim + i]);
                data[i * dim + j] = avg;
                data[j * dim + i] = avg;
            }
        }
        Ok(SymmetricMatrix { dim, data })
    }

    pub fn zeros(dim: usize) -> Self {
        SymmetricMatrix { dim, data: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn rows(&self) -> &[f64] {
        &self.data
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Eigendecomposition by cyclic Jacobi rotations. Eigenvalues come back
    /// ascending; eigenvectors (as columns, matching the sorted order) are
    /// accumulated only when requested.
    pub fn sym_eigen(&self, want_vectors: bool) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
        let n = self.dim;
        if n > 4096 {
            return Err(Error::invalid(format!("dense eigensolver capped at 4096, got {n}")));
        }
        let norm = self.frobenius_norm();
        let mut a = self.data.clone();
        let mut q = if want_vectors {
            Some(SymmetricMatrix::identity(n).data)
        } else {
            None
        };

        let off = |a: &[f64]| -> f64 {
            let mut s = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    s += 2.0 * a[i * n + j] * a[i * n + j];
                }
            }
            s.sqrt()
        };

        let tol = 1e-12 * norm.max(f64::MIN_POSITIVE);
        let mut converged = off(&a) <= tol;
        for _sweep in 0..JACOBI_MAX_SWEEPS {
            if converged {
                break;
            }
            for p in 0..n {
                for r in (p + 1)..n {
                    let apq = a[p * n + r];
                    if apq.abs() <= 1e-300 {
                        continue;
                    }
                    let app = a[p * n + p];
                    let aqq = a[r * n + r];
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    // A <- J^T A J on rows/cols p and r
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + r];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + r] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[r * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[r * n + k] = s * apk + c * aqk;
                    }
                    if let Some(q) = q.as_mut() {
                        for k in 0..n {
                            let qkp = q[k * n + p];
                            let qkq = q[k * n + r];
                            q[k * n + p] = c * qkp - s * qkq;
                            q[k * n + r] = s * qkp + c * qkq;
                        }
                    }
                }
            }
            converged = off(&a) <= tol;
        }
        if !converged {
            return Err(Error::numeric(format!(
                "Jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps; off-diagonal residual {:.3e}",
                off(&a)
            )));
        }

        let mut order: Vec<usize> = (0..n).collect();
        let diag: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
        order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
        let eigenvalues: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
        let vectors = q.map(|q| {
            let mut sorted = vec![0.0; n * n];
            for (newcol, &oldcol) in order.iter().enumerate() {
                for k in 0..n {
                    sorted[k * n + newcol] = q[k * n + oldcol];
                }
            }
            sorted
        });
        Ok((eigenvalues, vectors))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.sym_eigen(false)?.0[0])
    }
}

/// A certified correlation matrix: symmetric, unit diagonal, minimum
/// eigenvalue above `-psd_tol`.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    base: SymmetricMatrix,
    min_eig: f64,
    max_eig: f64,
    numeric_rank: usize,
}

impl CorrelationMatrix {
    pub fn base(&self) -> &SymmetricMatrix {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn min_eig(&self) -> f64 {
        self.min_eig
    }

    pub fn max_eig(&self) -> f64 {
        self.max_eig
    }

    pub fn numeric_rank(&self) -> usize {
        self.numeric_rank
    }
}

/// Check unit diagonal and positive semidefiniteness, filling the
/// certificate data (min eigenvalue, numeric rank).
pub fn certify_correlation(m: &SymmetricMatrix, psd_tol: f64) -> Result<CorrelationMatrix> {
    let n = m.dim();
    for i in 0..n {
        if (m.get(i, i) - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!(
                "not a correlation matrix (diagonal): entry ({i},{i}) = {}",
                m.get(i, i)
            )));
        }
    }
    let (eigs, _) = m.sym_eigen(false)?;
    let min_eig = eigs[0];
    let max_eig = eigs[n - 1];
    if min_eig < -psd_tol {
        return Err(Error::numeric(format!(
            "not PSD: minimum eigenvalue {min_eig:.6e} below -{psd_tol:.1e}"
        )));
    }
    let numeric_rank = eigs.iter().filter(|&&e| e > RANK_TOL * max_eig.max(0.0)).count();
    Ok(CorrelationMatrix { base: m.clone(), min_eig, max_eig, numeric_rank })
}

/// Gauss quadrature rule for the normalized ultraspherical measure
/// `(1-t^2)^{alpha - 1/2} dt` on [-1, 1], weights summing to 1.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub context: SphereContext,
}

impl QuadratureRule {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }
}

/// Golub-Welsch construction: eigenvalues of the symmetric tridiagonal
/// matrix built from the normalized recurrence weights give the nodes,
/// squared first eigenvector components give the weights.
///
/// Via detailed balance the orthonormal off-diagonal is
/// `beta_k = sqrt(c_{k-1} b_k)`.
pub fn gauss_gegenbauer(ctx: SphereContext, m_points: usize) -> Result<QuadratureRule> {
    if m_points == 0 || m_points > 2048 {
        return Err(Error::invalid(format!("quadrature points must be in [1, 2048], got {m_points}")));
    }
    let m = m_points;
    let mut diag = vec![0.0; m]; // symmetric measure: zero diagonal
    let mut off = vec![0.0; m]; // off[k] couples k-1 and k, off[0] unused
    for k in 1..m {
        let (c_prev, _) = ctx.recurrence_weights(k as u32 - 1);
        let (_, b_k) = ctx.recurrence_weights(k as u32);
        off[k] = (c_prev * b_k).sqrt();
    }
    let mut first = vec![0.0; m];
    first[0] = 1.0;
    tridiag_ql(&mut diag, &mut off, &mut first)?;

    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let nodes: Vec<f64> = idx.iter().map(|&i| diag[i]).collect();
    let weights: Vec<f64> = idx.iter().map(|&i| first[i] * first[i]).collect();
    Ok(QuadratureRule { nodes, weights, context: ctx })
}

// Implicit-shift QL for a symmetric tridiagonal matrix, accumulating only
// the first row of the eigenvector matrix (all Golub-Welsch needs).
fn tridiag_ql(d: &mut [f64], e: &mut [f64], z: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    // shift e so e[i] couples i and i+1
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::numeric("tridiagonal QL failed to converge"));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if r == 0.0 && m > l {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Counter-based deterministic generator: output `j` of stream `seed` is
/// `splitmix64(splitmix64(seed) + j * 0x9E3779B97F4A7C15)`. Stateless and
/// bit-reproducible across platforms.
#[derive(Debug, Clone, Copy)]
pub struct CounterRng {
    base: u64,
    counter: u64,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng { base: splitmix64(seed), counter: 0 }
    }

    pub fn next_u64(&mut self) -> u64 {
        let v = splitmix64(self.base.wrapping_add(self.counter.wrapping_mul(GOLDEN)));
        self.counter += 1;
        v
    }

    /// Uniform in the open interval (0, 1).
    pub fn next_uniform(&mut self) -> f64 {
        (((self.next_u64() >> 11) as f64) + 0.5) / (1u64 << 53) as f64
    }

    /// Standard normal via Box-Muller.
    pub fn next_normal(&mut self) -> f64 {
        let u1 = self.next_uniform();
        let u2 = self.next_uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

/// Sample `num_points` unit vectors on S^{n-1} (normalized standard
/// normals from the counter generator) and certify their Gram matrix.
/// The result has numeric rank at most `n`.
pub fn random_gram(ctx: SphereContext, num_points: usize, seed: u64) -> Result<CorrelationMatrix> {
    if num_points == 0 {
        return Err(Error::invalid("need at least one point"));
    }
    let points = random_unit_vectors(ctx, num_points, seed);
    gram_of(&points)
}

/// The raw unit vectors behind `random_gram`; exposed for fixtures that
/// plant exact inner products.
pub fn random_unit_vectors(ctx: SphereContext, num_points: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = ctx.n() as usize;
    let mut rng = CounterRng::new(seed);
    (0..num_points)
        .map(|_| {
            let mut v: Vec<f64> = (0..n).map(|_| rng.next_normal()).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            for x in v.iter_mut() {
                *x /= norm;
            }
            v
        })
        .collect()
}

/// Gram matrix of unit vectors, certified.
pub fn gram_of(points: &[Vec<f64>]) -> Result<CorrelationMatrix> {
    let m = points.len();
    let mut g = SymmetricMatrix::zeros(m);
    for i in 0..m {
        g.set_sym(i, i, 1.0);
        for j in (i + 1)..m {
            let dot: f64 = points[i].iter().zip(&points[j]).map(|(a, b)| a * b).sum();
            g.set_sym(i, j, dot.clamp(-1.0, 1.0));
        }
    }
    certify_correlation(&g, PSD_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_identity() {
        let m = SymmetricMatrix::identity(4);
        let (eigs, _) = m.sym_eigen(false).unwrap();
        for e in eigs {
            assert!((e - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn eigen_diagonal_sorted() {
        let m = SymmetricMatrix::from_rows(3, vec![3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0])
            .unwrap();
        let (eigs, _) = m.sym_eigen(false).unwrap();
        assert_eq!(eigs, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn eigen_two_by_two() {
        let m = SymmetricMatrix::from_rows(2, vec![1.0, 0.5, 0.5, 1.0]).unwrap();
        let (eigs, _) = m.sym_eigen(false).unwrap();
        assert!((eigs[0] - 0.5).abs() < 1e-14);
        assert!((eigs[1] - 1.5).abs() < 1e-14);
    }

    #[test]
    fn eigen_reconstruction_random() {
        for seed in 0..100u64 {
            let mut rng = CounterRng::new(seed);
            let n = 20;
            let mut data = vec![0.0; n * n];
            for i in 0..n {
                for j in i..n {
                    let v = rng.next_normal();
                    data[i * n + j] = v;
                    data[j * n + i] = v;
                }
            }
            let m = SymmetricMatrix::from_rows(n, data).unwrap();
            let (eigs, vecs) = m.sym_eigen(true).unwrap();
            let q = vecs.unwrap();
            // || Q L Q^T - M ||_F <= 1e-9 ||M||_F
            let mut err = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    let mut r = 0.0;
                    for k in 0..n {
                        r += q[i * n + k] * eigs[k] * q[j * n + k];
                    }
                    let d = r - m.get(i, j);
                    err += d * d;
                }
            }
            assert!(err.sqrt() <= 1e-9 * m.frobenius_norm(), "seed {seed}");
        }
    }

    #[test]
    fn eigen_rejects_nonfinite() {
        assert!(SymmetricMatrix::from_rows(2, vec![1.0, f64::NAN, f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn certify_examples() {
        let c = certify_correlation(&SymmetricMatrix::identity(3), PSD_TOL).unwrap();
        assert!((c.min_eig() - 1.0).abs() < 1e-12);
        assert_eq!(c.numeric_rank(), 3);

        let ones = SymmetricMatrix::from_rows(3, vec![1.0; 9]).unwrap();
        let c = certify_correlation(&ones, PSD_TOL).unwrap();
        assert!(c.min_eig().abs() < 1e-12);
        assert_eq!(c.numeric_rank(), 1);

        let bad_diag =
            SymmetricMatrix::from_rows(2, vec![1.0, 0.0, 0.0, 0.5]).unwrap();
        assert!(matches!(certify_correlation(&bad_diag, PSD_TOL), Err(Error::InvalidArgument(_))));

        let not_psd =
            SymmetricMatrix::from_rows(2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(matches!(certify_correlation(&not_psd, PSD_TOL), Err(Error::Numeric(_))));
    }

    #[test]
    fn quadrature_single_point() {
        for n in [2u32, 3, 7] {
            let rule = gauss_gegenbauer(SphereContext::new(n).unwrap(), 1).unwrap();
            assert!(rule.nodes[0].abs() < 1e-14);
            assert!((rule.weights[0] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn quadrature_orthogonality() {
        let ctx = SphereContext::new(3).unwrap();
        let rule = gauss_gegenbauer(ctx, 32).unwrap();
        let ip = rule.integrate(|t| {
            ctx.eval_gegenbauer(1, t).unwrap() * ctx.eval_gegenbauer(2, t).unwrap()
        });
        assert!(ip.abs() < 1e-12);
    }

    #[test]
    fn quadrature_norm_is_inverse_dimension() {
        let ctx = SphereContext::new(4).unwrap();
        let rule = gauss_gegenbauer(ctx, 64).unwrap();
        let norm2 = rule.integrate(|t| {
            let g = ctx.eval_gegenbauer(5, t).unwrap();
            g * g
        });
        let d5 = ctx.harmonic_dimension_f64(5).unwrap();
        assert!((norm2 - 1.0 / d5).abs() < 1e-10, "norm2={norm2} 1/d5={}", 1.0 / d5);
    }

    #[test]
    fn quadrature_weights_positive_sum_one() {
        for n in [2u32, 3, 5, 9] {
            let rule = gauss_gegenbauer(SphereContext::new(n).unwrap(), 80).unwrap();
            assert!(rule.weights.iter().all(|&w| w > 0.0));
            let s: f64 = rule.weights.iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
            assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn random_gram_basics() {
        let ctx = SphereContext::new(3).unwrap();
        let g = random_gram(ctx, 1, 7).unwrap();
        assert_eq!(g.dim(), 1);
        assert!((g.base().get(0, 0) - 1.0).abs() < 1e-15);

        let g = random_gram(ctx, 10, 1).unwrap();
        assert!(g.min_eig() >= -PSD_TOL);
        assert!(g.numeric_rank() <= 3);

        let g2 = random_gram(ctx, 10, 1).unwrap();
        assert_eq!(g.base().rows(), g2.base().rows());
    }

    #[test]
    fn random_gram_rank_bounded_by_dimension() {
        for n in 2..=8u32 {
            let ctx = SphereContext::new(n).unwrap();
            for seed in 0..20u64 {
                let g = random_gram(ctx, 50, seed).unwrap();
                assert!(g.numeric_rank() <= n as usize, "n={n} seed={seed} rank={}", g.numeric_rank());
            }
        }
    }
}
