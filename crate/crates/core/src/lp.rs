//! Dense two-phase primal simplex for equality-constrained linear programs
//! with nonnegative variables:
//!
//! ```text
//! maximize c.x   subject to  A x = b,  x >= 0
//! ```
//!
//! Dantzig pricing with a Bland's-rule fallback after a run of non-improving
//! iterations, so degenerate problems (Delsarte LPs usually are, at the
//! optimum) still terminate. Rows are equilibrated to unit infinity-norm
//! before phase 1; redundant rows are dropped at tolerance 1e-10 when the
//! phase-1 artificials cannot be pivoted out.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-10;
const MAX_ITERATIONS: usize = 1_000_000;

#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    /// Row-major constraint matrix, `eq_rhs.len()` rows x `objective.len()` cols.
    pub eq_matrix: Vec<f64>,
    pub eq_rhs: Vec<f64>,
}

impl LinearProgram {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.eq_rhs.len()
    }

    fn validate(&self) -> Result<()> {
        let (n, m) = (self.num_vars(), self.num_rows());
        if n == 0 {
            return Err(Error::invalid("LP needs at least one variable"));
        }
        if self.eq_matrix.len() != n * m {
            return Err(Error::invalid(format!(
                "constraint matrix has {} entries, expected {}x{}",
                self.eq_matrix.len(),
                m,
                n
            )));
        }
        let finite = self.objective.iter().chain(&self.eq_matrix).chain(&self.eq_rhs);
        if finite.into_iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("LP data must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective_value: f64,
    pub iterations: usize,
    /// Basic variable per kept row, for independent dual verification.
    pub basis: Vec<usize>,
    /// Constraint rows surviving redundancy elimination.
    pub kept_rows: Vec<usize>,
}

/// Residuals recomputed from the original data and the final basis.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub primal_infeasibility: f64,
    pub min_variable: f64,
    pub max_reduced_cost: f64,
}

struct Tableau {
    rows: usize,
    cols: usize, // structural + artificial
    t: Vec<f64>,   // rows x cols
    rhs: Vec<f64>, // rows
    basis: Vec<usize>,
    obj: Vec<f64>, // reduced costs, len cols
    obj_value: f64,
    iterations: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let cols = self.cols;
        let piv = self.t[row * cols + col];
        let inv = 1.0 / piv;
        for j in 0..cols {
            self.t[row * cols + j] *= inv;
        }
        self.rhs[row] *= inv;
        self.t[row * cols + col] = 1.0;
        for i in 0..self.rows {
            if i == row {
                continue;
            }
            let f = self.t[i * cols + col];
            if f != 0.0 {
                for j in 0..cols {
                    self.t[i * cols + j] -= f * self.t[row * cols + j];
                }
                self.rhs[i] -= f * self.rhs[row];
                self.t[i * cols + col] = 0.0;
            }
        }
        let f = self.obj[col];
        if f != 0.0 {
            for j in 0..cols {
                self.obj[j] -= f * self.t[row * cols + j];
            }
            self.obj_value += f * self.rhs[row];
            self.obj[col] = 0.0;
        }
        self.basis[row] = col;
    }

    /// Run simplex iterations until no entering column remains. `allowed`
    /// masks columns eligible to enter. Returns Ok(true) on optimality,
    /// Ok(false) on unboundedness.
    fn optimize(&mut self, allowed: &[bool]) -> Result<bool> {
        let mut stale = 0usize;
        let bland_after = 5 * (self.rows + self.cols);
        loop {
            if self.iterations > MAX_ITERATIONS {
                return Err(Error::numeric("simplex iteration cap exceeded"));
            }
            let use_bland = stale > bland_after;
            let mut entering = None;
            if use_bland {
                for j in 0..self.cols {
                    if allowed[j] && self.obj[j] > PIVOT_TOL {
                        entering = Some(j);
                        break;
                    }
                }
            } else {
                let mut best = PIVOT_TOL;
                for j in 0..self.cols {
                    if allowed[j] && self.obj[j] > best {
                        best = self.obj[j];
                        entering = Some(j);
                    }
                }
            }
            let Some(col) = entering else {
                return Ok(true);
            };

            let mut row = None;
            let mut best_ratio = f64::INFINITY;
            for i in 0..self.rows {
                let a = self.t[i * self.cols + col];
                if a > PIVOT_TOL {
                    let ratio = self.rhs[i] / a;
                    if ratio < best_ratio - 1e-12
                        || (ratio < best_ratio + 1e-12
                            && row.map_or(true, |r: usize| self.basis[i] < self.basis[r]))
                    {
                        best_ratio = ratio;
                        row = Some(i);
                    }
                }
            }
            let Some(row) = row else {
                return Ok(false); // unbounded
            };

            let before = self.obj_value;
            self.pivot(row, col);
            self.iterations += 1;
            if self.obj_value > before + 1e-12 * (1.0 + before.abs()) {
                stale = 0;
            } else {
                stale += 1;
            }
        }
    }
}

/// Solve the LP. Deterministic: identical inputs produce identical pivot
/// sequences and bit-identical outputs.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.num_vars();
    let m = lp.num_rows();

    // Equilibrate rows to unit infinity-norm and make rhs nonnegative.
    let mut a = lp.eq_matrix.clone();
    let mut b = lp.eq_rhs.clone();
    for i in 0..m {
        let row = &mut a[i * n..(i + 1) * n];
        let mut scale = row.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        if scale == 0.0 {
            scale = 1.0;
        }
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let f = sign / scale;
        for x in row.iter_mut() {
            *x *= f;
        }
        b[i] *= f;
    }

    let cols = n + m;
    let mut t = vec![0.0; m * cols];
    for i in 0..m {
        t[i * cols..i * cols + n].copy_from_slice(&a[i * n..(i + 1) * n]);
        t[i * cols + n + i] = 1.0; // artificial
    }
    let basis: Vec<usize> = (n..n + m).collect();

    // Phase 1: maximize -sum(artificials); reduced costs for the artificial
    // basis are the column sums over the structural part.
    let mut obj = vec![0.0; cols];
    let mut obj_value = 0.0;
    for i in 0..m {
        for j in 0..n {
            obj[j] += t[i * cols + j];
        }
        obj_value -= b[i];
    }
    let mut tab = Tableau {
        rows: m,
        cols,
        t,
        rhs: b,
        basis,
        obj,
        obj_value,
        iterations: 0,
    };
    let allowed: Vec<bool> = (0..cols).map(|_| true).collect();
    if m > 0 {
        tab.optimize(&allowed)?;
        if tab.obj_value < -1e-8 {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: vec![0.0; n],
                objective_value: 0.0,
                iterations: tab.iterations,
                basis: Vec::new(),
                kept_rows: Vec::new(),
            });
        }
    }

    // Drive remaining artificials out of the basis; rows where no structural
    // pivot exists are redundant and get dropped.
    let mut keep = vec![true; tab.rows];
    for i in 0..tab.rows {
        if tab.basis[i] < n {
            continue;
        }
        let mut pivot_col = None;
        for j in 0..n {
            if tab.t[i * cols + j].abs() > PIVOT_TOL {
                pivot_col = Some(j);
                break;
            }
        }
        match pivot_col {
            Some(j) => tab.pivot(i, j),
            None => keep[i] = false,
        }
    }
    let kept_rows: Vec<usize> = (0..tab.rows).filter(|&i| keep[i]).collect();
    if kept_rows.len() < tab.rows {
        let mut t2 = Vec::with_capacity(kept_rows.len() * cols);
        let mut rhs2 = Vec::with_capacity(kept_rows.len());
        let mut basis2 = Vec::with_capacity(kept_rows.len());
        for &i in &kept_rows {
            t2.extend_from_slice(&tab.t[i * cols..(i + 1) * cols]);
            rhs2.push(tab.rhs[i]);
            basis2.push(tab.basis[i]);
        }
        tab.t = t2;
        tab.rhs = rhs2;
        tab.basis = basis2;
        tab.rows = kept_rows.len();
    }

    // Phase 2: true objective, artificial columns locked out.
    let allowed: Vec<bool> = (0..cols).map(|j| j < n).collect();
    tab.obj = vec![0.0; cols];
    tab.obj[..n].copy_from_slice(&lp.objective);
    tab.obj_value = 0.0;
    for i in 0..tab.rows {
        let bi = tab.basis[i];
        let cb = if bi < n { lp.objective[bi] } else { 0.0 };
        if cb != 0.0 {
            for j in 0..cols {
                tab.obj[j] -= cb * tab.t[i * cols + j];
            }
            tab.obj_value += cb * tab.rhs[i];
        }
    }
    let optimal = tab.optimize(&allowed)?;
    if !optimal {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            x: vec![0.0; n],
            objective_value: f64::INFINITY,
            iterations: tab.iterations,
            basis: tab.basis.clone(),
            kept_rows,
        });
    }

    let mut x = vec![0.0; n];
    for i in 0..tab.rows {
        if tab.basis[i] < n {
            x[tab.basis[i]] = tab.rhs[i];
        }
    }
    let objective_value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        objective_value,
        iterations: tab.iterations,
        basis: tab.basis.clone(),
        kept_rows,
    })
}

/// Recompute primal feasibility and, through the final basis, the dual
/// reduced-cost conditions, from the original problem data.
pub fn verify(lp: &LinearProgram, sol: &LpSolution) -> Result<ResidualReport> {
    if sol.status != LpStatus::Optimal {
        return Err(Error::invalid("verify requires an optimal solution"));
    }
    lp.validate()?;
    let n = lp.num_vars();
    let m = lp.num_rows();
    if sol.x.len() != n {
        return Err(Error::invalid("solution length mismatch"));
    }

    let mut primal = 0.0f64;
    for i in 0..m {
        let ax: f64 = (0..n).map(|j| lp.eq_matrix[i * n + j] * sol.x[j]).sum();
        primal = primal.max((ax - lp.eq_rhs[i]).abs());
    }
    let min_variable = sol.x.iter().fold(f64::INFINITY, |a, &v| a.min(v));

    // y solves B^T y = c_B over the kept rows; reduced costs c_j - y.A_j
    // must be nonpositive at a maximum.
    let k = sol.kept_rows.len();
    let mut bt = vec![0.0; k * k];
    let mut cb = vec![0.0; k];
    for (col, &var) in sol.basis.iter().enumerate() {
        for (r, &orig_row) in sol.kept_rows.iter().enumerate() {
            bt[col * k + r] = if var < n { lp.eq_matrix[orig_row * n + var] } else { 0.0 };
        }
        cb[col] = if var < n { lp.objective[var] } else { 0.0 };
    }
    let y = gauss_solve(k, bt, cb)
        .ok_or_else(|| Error::numeric("singular basis matrix in verification"))?;
    let mut max_reduced_cost = 0.0f64;
    for j in 0..n {
        let ya: f64 = sol
            .kept_rows
            .iter()
            .enumerate()
            .map(|(r, &orig)| y[r] * lp.eq_matrix[orig * n + j])
            .sum();
        max_reduced_cost = max_reduced_cost.max(lp.objective[j] - ya);
    }
    Ok(ResidualReport { primal_infeasibility: primal, min_variable, max_reduced_cost })
}

// Dense Gaussian elimination with partial pivoting; size k systems here are
// tiny (the LP row counts).
fn gauss_solve(k: usize, mut a: Vec<f64>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    for col in 0..k {
        let mut piv = col;
        for r in (col + 1)..k {
            if a[r * k + col].abs() > a[piv * k + col].abs() {
                piv = r;
            }
        }
        if a[piv * k + col].abs() < 1e-14 {
            return None;
        }
        if piv != col {
            for j in 0..k {
                a.swap(col * k + j, piv * k + j);
            }
            b.swap(col, piv);
        }
        let inv = 1.0 / a[col * k + col];
        for r in (col + 1)..k {
            let f = a[r * k + col] * inv;
            if f != 0.0 {
                for j in col..k {
                    a[r * k + j] -= f * a[col * k + j];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; k];
    for col in (0..k).rev() {
        let mut s = b[col];
        for j in (col + 1)..k {
            s -= a[col * k + j] * x[j];
        }
        x[col] = s / a[col * k + col];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(c: &[f64], rows: &[&[f64]], b: &[f64]) -> LinearProgram {
        LinearProgram {
            objective: c.to_vec(),
            eq_matrix: rows.iter().flat_map(|r| r.iter().copied()).collect(),
            eq_rhs: b.to_vec(),
        }
    }

    #[test]
    fn single_variable() {
        let p = lp(&[1.0], &[&[1.0]], &[1.0]);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_variable_corner() {
        let p = lp(&[1.0, 0.0], &[&[1.0, 1.0]], &[1.0]);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective_value - 1.0).abs() < 1e-12);
        assert!((s.x[0] - 1.0).abs() < 1e-12 && s.x[1].abs() < 1e-12);
    }

    #[test]
    fn sign_contradiction_is_infeasible() {
        // x1 + x2 = 1, x1 - x2 = 3 needs x2 = -1 < 0
        let p = lp(&[1.0, 0.0], &[&[1.0, 1.0], &[1.0, -1.0]], &[1.0, 3.0]);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        let p = lp(&[1.0, 1.0], &[&[1.0, -1.0]], &[0.0]);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Unbounded);
    }

    #[test]
    fn redundant_rows_dropped() {
        let p = lp(&[1.0, 0.0], &[&[1.0, 1.0], &[2.0, 2.0]], &[1.0, 2.0]);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.kept_rows.len(), 1);
        assert!((s.objective_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn verify_accepts_optimal() {
        let p = lp(&[3.0, 1.0, 0.0], &[&[1.0, 1.0, 1.0], &[1.0, -1.0, 0.0]], &[2.0, 0.5]);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        let r = verify(&p, &s).unwrap();
        assert!(r.primal_infeasibility <= 1e-7);
        assert!(r.min_variable >= -1e-10);
        assert!(r.max_reduced_cost <= 1e-7);
    }

    #[test]
    fn verify_reports_perturbation() {
        let p = lp(&[1.0, 0.0], &[&[1.0, 1.0]], &[1.0]);
        let mut s = solve(&p).unwrap();
        s.x[1] += 1e-3;
        let r = verify(&p, &s).unwrap();
        assert!((r.primal_infeasibility - 1e-3).abs() < 1e-9);
    }

    #[test]
    fn verify_rejects_nonoptimal_status() {
        let p = lp(&[1.0, 0.0], &[&[1.0, 1.0], &[1.0, -1.0]], &[1.0, 3.0]);
        let s = solve(&p).unwrap();
        assert!(verify(&p, &s).is_err());
    }

    #[test]
    fn random_feasible_problems_solve_and_verify() {
        use crate::linalg::CounterRng;
        for seed in 0..50u64 {
            let mut rng = CounterRng::new(seed ^ 0xABCD);
            let m = 3 + (rng.next_u64() % 4) as usize;
            let n = m + 2 + (rng.next_u64() % 6) as usize;
            let a: Vec<f64> = (0..m * n).map(|_| rng.next_normal()).collect();
            // known feasible interior point -> consistent rhs
            let x0: Vec<f64> = (0..n).map(|_| rng.next_uniform() + 0.1).collect();
            let b: Vec<f64> = (0..m)
                .map(|i| (0..n).map(|j| a[i * n + j] * x0[j]).sum())
                .collect();
            // bounded objective: -sum(x) plus small noise
            let c: Vec<f64> = (0..n).map(|_| -1.0 - 0.1 * rng.next_uniform()).collect();
            let p = LinearProgram { objective: c, eq_matrix: a, eq_rhs: b };
            let s = solve(&p).unwrap();
            assert_eq!(s.status, LpStatus::Optimal, "seed {seed}");
            let r = verify(&p, &s).unwrap();
            assert!(r.primal_infeasibility <= 1e-8 * (1.0 + 1.0), "seed {seed}");
            assert!(r.max_reduced_cost <= 1e-7, "seed {seed}: {}", r.max_reduced_cost);
        }
    }

    #[test]
    fn deterministic_resolve() {
        let p = lp(
            &[1.0, 2.0, 0.5, 0.0],
            &[&[1.0, 1.0, 1.0, 1.0], &[0.3, -0.2, 1.1, 0.0]],
            &[1.0, 0.4],
        );
        let s1 = solve(&p).unwrap();
        let s2 = solve(&p).unwrap();
        assert_eq!(s1.x, s2.x);
        assert_eq!(s1.iterations, s2.iterations);
        assert!(s1.objective_value.to_bits() == s2.objective_value.to_bits());
    }
}
