//! Capacity `cpc_{ab}(F) = inf_{x,y>0} x^{-a} y^{-b} F(x, y)` of products of
//! univariate cell factors, minimised in log coordinates.
//!
//! Targets on the boundary of the Newton polytope are handled by fixing the
//! cells that every feasible table pins to a bound, replacing their factors
//! by the corresponding limits and solving each remaining connected block on
//! its own.

mod hn;
mod newton;

pub use hn::{capacity_hn, HnSettings, DEFAULT_HN_BUDGET};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::FactorFamily;
use crate::feasibility::{face, Component};
use crate::logvalue::LogValue;
use crate::par::Exec;
use crate::special::xlogx;
use crate::table::{Cap, CapMatrix, Marginals};
use newton::{minimize, Objective};

/// Cells per block above which objective evaluation is split across threads.
const PAR_CELLS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialPoint {
    /// Family-dependent starting point (exact for uniform geometric targets).
    #[default]
    Heuristic,
    /// `u = v = 0`; invalid for factors that need `t < 0`.
    Origin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Relative tolerance on the marginal residual; the absolute threshold is
    /// `tol * max(1, N)`.
    pub tol: f64,
    pub max_iter: usize,
    pub init: InitialPoint,
    pub exec: Exec,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings { tol: 1e-10, max_iter: 500, init: InitialPoint::Heuristic, exec: Exec::Parallel }
    }
}

/// Capacity of `prod_ij g_ij(u_i + v_j)` at marginals `(alpha, beta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityProblem {
    pub marginals: Marginals,
    /// Row-major `m x n` grid of factors.
    pub factors: Vec<FactorFamily>,
    pub settings: SolverSettings,
}

impl CapacityProblem {
    pub fn new(marginals: Marginals, factors: Vec<FactorFamily>) -> Result<CapacityProblem> {
        if factors.len() != marginals.m() * marginals.n() {
            return Err(Error::InvalidInput(format!(
                "{} factors for a {}x{} grid",
                factors.len(),
                marginals.m(),
                marginals.n()
            )));
        }
        Ok(CapacityProblem { marginals, factors, settings: SolverSettings::default() })
    }

    /// `P_K`: truncated geometric cells, geometric where `K` is unbounded.
    pub fn counting(marginals: &Marginals, k: &CapMatrix) -> Result<CapacityProblem> {
        k.check_shape(marginals)?;
        CapacityProblem::new(marginals.clone(), k.entries().iter().map(|&c| FactorFamily::counting(c)).collect())
    }

    /// `Q_{K,s}`: binomial cells.
    pub fn binomial(marginals: &Marginals, k: &CapMatrix, s: f64) -> Result<CapacityProblem> {
        k.check_shape(marginals)?;
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::InvalidInput(format!("binomial parameter must lie in (0, 1), got {s}")));
        }
        let mut factors = Vec::with_capacity(k.entries().len());
        for c in k.entries() {
            match c {
                Cap::Finite(k) => factors.push(FactorFamily::Binomial { k: *k, s }),
                Cap::Inf => return Err(Error::KInfinite),
            }
        }
        CapacityProblem::new(marginals.clone(), factors)
    }

    /// `prod exp(s x_i y_j - s)`.
    pub fn poisson(marginals: &Marginals, s: f64) -> Result<CapacityProblem> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidInput(format!("Poisson rate must be positive, got {s}")));
        }
        CapacityProblem::new(marginals.clone(), vec![FactorFamily::ExpPoisson { s }; marginals.m() * marginals.n()])
    }

    /// Volume factors `((x_i y_j)^k - 1) / log(x_i y_j)`, `-1/log(x_i y_j)` where unbounded.
    pub fn volume(marginals: &Marginals, k: &CapMatrix) -> Result<CapacityProblem> {
        k.check_shape(marginals)?;
        CapacityProblem::new(marginals.clone(), k.entries().iter().map(|&c| FactorFamily::volume(c)).collect())
    }

    pub fn with_settings(mut self, settings: SolverSettings) -> CapacityProblem {
        self.settings = settings;
        self
    }

    fn cap_matrix(&self) -> CapMatrix {
        let n = self.marginals.n();
        let rows = self.factors.chunks(n).map(|r| r.iter().map(|f| f.cap()).collect()).collect();
        CapMatrix::from_rows(rows).expect("grid shape checked at construction")
    }
}

/// Real matrix of typical cell values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypicalMatrix {
    pub m: usize,
    pub n: usize,
    /// Row-major entries.
    pub z: Vec<f64>,
}

impl TypicalMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.z[i * self.n + j]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.z.chunks(self.n).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.n).map(|j| (0..self.m).map(|i| self.get(i, j)).sum()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityResult {
    pub value: LogValue,
    /// Optimal `log x`. Entries are NaN for rows whose optimum is only
    /// reached in a limit (all of their cells pinned to a bound).
    pub u: Vec<f64>,
    /// Optimal `log y`, with the same NaN convention.
    pub v: Vec<f64>,
    pub typical: TypicalMatrix,
    pub iterations: usize,
    /// Infinity norm of the marginal mismatch.
    pub residual: f64,
    pub converged: bool,
    /// Cells pinned to a positive bound or to zero despite a positive bound.
    pub boundary_cells: usize,
}

struct CellObjective<'a> {
    rows: usize,
    cols: usize,
    cells: Vec<(usize, usize, &'a FactorFamily)>,
    a: Vec<f64>,
    b: Vec<f64>,
    exec: Exec,
}

impl CellObjective<'_> {
    fn per_cell<T: Send, F: Fn(f64, &FactorFamily) -> T + Sync + Send>(&self, u: &[f64], v: &[f64], f: F) -> Vec<T> {
        let exec = if self.cells.len() >= PAR_CELLS { self.exec } else { Exec::Sequential };
        exec.map(&self.cells, |&(i, j, fam)| f(u[i] + v[j], fam))
    }
}

impl Objective for CellObjective<'_> {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn value(&self, u: &[f64], v: &[f64]) -> f64 {
        let logs = self.per_cell(u, v, |t, f| f.log_g(t));
        let lin: f64 =
            self.a.iter().zip(u).map(|(a, x)| a * x).sum::<f64>() + self.b.iter().zip(v).map(|(b, y)| b * y).sum::<f64>();
        logs.iter().sum::<f64>() - lin
    }

    fn gradient(&self, u: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let means = self.per_cell(u, v, |t, f| f.mean(t));
        let mut gr: Vec<f64> = self.a.iter().map(|a| -a).collect();
        let mut gc: Vec<f64> = self.b.iter().map(|b| -b).collect();
        for (&(i, j, _), z) in self.cells.iter().zip(means) {
            gr[i] += z;
            gc[j] += z;
        }
        (gr, gc)
    }

    fn hessian(&self, u: &[f64], v: &[f64]) -> DMatrix<f64> {
        let vars = self.per_cell(u, v, |t, f| f.var(t));
        let r = self.rows;
        let mut h = DMatrix::zeros(r + self.cols, r + self.cols);
        for (&(i, j, _), w) in self.cells.iter().zip(vars) {
            h[(i, i)] += w;
            h[(r + j, r + j)] += w;
            h[(i, r + j)] += w;
            h[(r + j, i)] += w;
        }
        h
    }
}

fn initial_point(cells: &[(usize, usize, &FactorFamily)], total: f64, settings: &SolverSettings) -> f64 {
    if settings.init == InitialPoint::Origin {
        return 0.0;
    }
    let p = cells.len() as f64;
    if cells.iter().any(|c| c.2.is_volume()) {
        -p / (4.0 * total)
    } else if cells.iter().any(|c| c.2.needs_negative()) {
        0.5 * (total / (total + p)).ln()
    } else {
        0.0
    }
}

struct BlockSolution {
    outcome: newton::Outcome,
    comp: Component,
}

/// Minimises the capacity objective; see the module documentation for the
/// treatment of boundary targets.
pub fn solve_capacity(problem: &CapacityProblem) -> Result<CapacityResult> {
    let marg = &problem.marginals;
    let (m, n) = (marg.m(), marg.n());
    if problem.factors.len() != m * n {
        return Err(Error::InvalidInput("factor grid does not match marginals".into()));
    }
    let kmat = problem.cap_matrix();
    let face = face(marg, &kmat)
        .ok_or_else(|| Error::Infeasible("no real table with 0 <= z <= K has these marginals".into()))?;

    let mut ln_const = 0.0;
    let mut typical = vec![0.0; m * n];
    for (idx, (slot, forced)) in typical.iter_mut().zip(&face.forced).enumerate() {
        if let &Some(z) = forced {
            let f = &problem.factors[idx];
            let lim = if z == 0 { f.ln_limit_low() } else { f.ln_limit_high() };
            ln_const += lim.ok_or_else(|| {
                Error::Infeasible(format!(
                    "target lies on the boundary of the Newton polytope (cell ({}, {}) pinned at {z}) and this factor family has no finite limit there",
                    idx / n + 1,
                    idx % n + 1
                ))
            })?;
            *slot = z as f64;
        }
    }

    let settings = problem.settings;
    let tol = settings.tol * (marg.total() as f64).max(1.0);
    let solved: Vec<BlockSolution> = settings.exec.map(&face.components, |comp| {
        let local_row = |i: usize| comp.rows.binary_search(&i).unwrap();
        let local_col = |j: usize| comp.cols.binary_search(&j).unwrap();
        let cells: Vec<(usize, usize, &FactorFamily)> =
            comp.cells.iter().map(|&(i, j)| (local_row(i), local_col(j), &problem.factors[i * n + j])).collect();
        let a: Vec<f64> = comp.rows.iter().map(|&i| face.residual_alpha[i] as f64).collect();
        let b: Vec<f64> = comp.cols.iter().map(|&j| face.residual_beta[j] as f64).collect();
        let total: f64 = a.iter().sum();
        let x0 = initial_point(&cells, total, &settings);
        let obj = CellObjective { rows: a.len(), cols: b.len(), cells, a, b, exec: settings.exec };
        let outcome = minimize(&obj, vec![x0; obj.rows], vec![x0; obj.cols], tol, settings.max_iter);
        BlockSolution { outcome, comp: comp.clone() }
    });

    let mut u = vec![f64::NAN; m];
    let mut v = vec![f64::NAN; n];
    let mut iterations = 0;
    let mut residual: f64 = 0.0;
    let mut ln_value = ln_const;
    for block in &solved {
        let o = &block.outcome;
        if !o.value.is_finite() {
            return Err(Error::Infeasible("initial point outside the factor domain".into()));
        }
        iterations = iterations.max(o.iterations);
        residual = residual.max(o.residual);
        if !o.converged {
            return Err(Error::NotConverged { iterations: o.iterations, residual: o.residual });
        }
        ln_value += o.value;
        for (li, &i) in block.comp.rows.iter().enumerate() {
            u[i] = o.u[li];
        }
        for (lj, &j) in block.comp.cols.iter().enumerate() {
            v[j] = o.v[lj];
        }
        for &(i, j) in &block.comp.cells {
            typical[i * n + j] = problem.factors[i * n + j].mean(u[i] + v[j]);
        }
    }
    Ok(CapacityResult {
        value: LogValue::from_ln(ln_value),
        u,
        v,
        typical: TypicalMatrix { m, n, z: typical },
        iterations,
        residual,
        converged: true,
        boundary_cells: face.boundary_cells(&kmat),
    })
}

/// Convenience: `cpc(P_K)`, or zero when no table fits.
pub fn counting_capacity(marginals: &Marginals, k: &CapMatrix, settings: SolverSettings) -> Result<CapacityResult> {
    solve_capacity(&CapacityProblem::counting(marginals, k)?.with_settings(settings))
}

/// `(N+mn)^{N+mn} / (N^N (mn)^{mn})`, the capacity of `P_inf` at uniform
/// marginals (`m` rows of sum `s`, `n` columns of sum `t`).
pub fn capacity_uniform_pk_closed_form(m: u64, n: u64, s: u64, t: u64) -> Result<LogValue> {
    if m * s != n * t {
        return Err(Error::MarginalsMismatch { row_sum: m * s, col_sum: n * t });
    }
    let big_n = (m * s) as f64;
    let p = (m * n) as f64;
    Ok(LogValue::from_ln(xlogx(big_n + p) - xlogx(big_n) - xlogx(p)))
}

/// `(s e N)^N / (prod a^a prod b^b e^{smn})`, the capacity of
/// `prod exp(s x_i y_j - s)`.
pub fn capacity_poisson_closed_form(marginals: &Marginals, s: f64) -> LogValue {
    let big_n = marginals.total() as f64;
    let (m, n) = (marginals.m() as f64, marginals.n() as f64);
    let ln = if big_n > 0.0 { big_n * (s * big_n).ln() + big_n } else { 0.0 }
        - marginals.alpha().iter().map(|&a| xlogx(a as f64)).sum::<f64>()
        - marginals.beta().iter().map(|&b| xlogx(b as f64)).sum::<f64>()
        - s * m * n;
    LogValue::from_ln(ln)
}

/// Capacity of the linear form `(sum c_i x_i)^d` at exponent `alpha` with
/// `d = sum alpha`: `prod (d c_i / alpha_i)^{alpha_i}`.
pub fn cap_linear(c: &[f64], alpha: &[u64]) -> Result<LogValue> {
    if c.len() != alpha.len() {
        return Err(Error::InvalidInput("coefficient and exponent vectors differ in length".into()));
    }
    let d: u64 = alpha.iter().sum();
    let mut ln = 0.0;
    for (&ci, &ai) in c.iter().zip(alpha) {
        if ai == 0 {
            continue;
        }
        if ci <= 0.0 {
            return Ok(LogValue::ZERO);
        }
        ln += ai as f64 * (d as f64 * ci / ai as f64).ln();
    }
    Ok(LogValue::from_ln(ln))
}

/// `sum (z+1) log(z+1) - z log z` over the cells of `z`.
pub fn typical_entropy(z: &TypicalMatrix) -> f64 {
    z.z.iter().map(|&x| xlogx(x + 1.0) - xlogx(x)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_cell_geometric_is_four() {
        let marg = Marginals::new(vec![1], vec![1]).unwrap();
        let r = counting_capacity(&marg, &CapMatrix::infinite(1, 1), SolverSettings::default()).unwrap();
        assert!((r.value.ln() - 4f64.ln()).abs() < 1e-12);
        assert!((r.typical.get(0, 0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn uniform_geometric_starts_at_optimum() {
        let marg = Marginals::uniform(3, 3, 100, 100).unwrap();
        let r = counting_capacity(&marg, &CapMatrix::infinite(3, 3), SolverSettings::default()).unwrap();
        let want = capacity_uniform_pk_closed_form(3, 3, 100, 100).unwrap();
        assert!((r.value.ln() - want.ln()).abs() < 1e-8);
    }

    #[test]
    fn binomial_two_by_two_is_one() {
        let marg = Marginals::new(vec![1, 1], vec![1, 1]).unwrap();
        let p = CapacityProblem::binomial(&marg, &CapMatrix::ones(2, 2), 0.5).unwrap();
        let r = solve_capacity(&p).unwrap();
        assert!(r.value.ln().abs() < 1e-10);
    }

    #[test]
    fn cap_linear_examples() {
        assert!((cap_linear(&[1.0, 1.0], &[1, 1]).unwrap().ln() - 4f64.ln()).abs() < 1e-15);
        assert_eq!(cap_linear(&[1.0], &[7]).unwrap().ln(), 0.0);
        assert_eq!(cap_linear(&[1.0, 1.0, 1.0], &[3, 0, 0]).unwrap().ln(), 0.0);
    }

    #[test]
    fn boundary_target_uses_limits() {
        // Only the all-ones table fits: cpc(P_K) is the coefficient, 1.
        let marg = Marginals::new(vec![2, 2], vec![2, 2]).unwrap();
        let r = counting_capacity(&marg, &CapMatrix::ones(2, 2), SolverSettings::default()).unwrap();
        assert_eq!(r.value.ln(), 0.0);
        assert_eq!(r.boundary_cells, 4);
        assert!(r.u.iter().all(|x| x.is_nan()));
    }
}
