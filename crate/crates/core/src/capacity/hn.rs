//! Capacity of `H_N(x, y) = h_N(x_i y_j)`, the complete homogeneous symmetric
//! polynomial of degree `N` in the `mn` products.

use std::sync::atomic::{AtomicBool, Ordering};

use crate::error::{Error, Result};
use crate::logvalue::LogValue;
use crate::par::Exec;
use crate::special::{ln_binom, logaddexp, logsumexp};
use crate::table::Marginals;

use super::newton::{minimize, Objective};
use super::{CapacityResult, SolverSettings, TypicalMatrix};

/// Default limit on `N * (number of variables)` for the `h_k` recurrence.
pub const DEFAULT_HN_BUDGET: u64 = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HnSettings {
    pub solver: SolverSettings,
    pub budget: u64,
}

impl Default for HnSettings {
    fn default() -> Self {
        HnSettings { solver: SolverSettings::default(), budget: DEFAULT_HN_BUDGET }
    }
}

struct HnObjective {
    rows: usize,
    cols: usize,
    degree: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    budget: u64,
    over_budget: AtomicBool,
    exec: Exec,
}

/// `log h_k(z)` for `k = 0..=degree` given `log z`.
fn log_h_table(lz: &[f64], degree: usize) -> Vec<f64> {
    let mut h = vec![f64::NEG_INFINITY; degree + 1];
    h[0] = 0.0;
    for &l in lz {
        for k in 1..=degree {
            h[k] = logaddexp(h[k], l + h[k - 1]);
        }
    }
    h
}

// `h_N` is homogeneous, so besides the usual gauge the objective is flat
// along `v + c`. The first column variable is therefore pinned at 0 and the
// solver only sees the remaining `cols - 1`; its marginal residual is minus
// the sum of the others.
impl HnObjective {
    fn log_z(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let full: Vec<f64> = std::iter::once(0.0).chain(v.iter().copied()).collect();
        u.iter().flat_map(|x| full.iter().map(move |y| x + y).collect::<Vec<_>>()).collect()
    }

    /// `log h_N` and, for every variable, `z_q (d h_N / d z_q) / h_N`.
    fn eval(&self, u: &[f64], v: &[f64], with_gradient: bool) -> Option<(f64, Vec<f64>)> {
        let lz = self.log_z(u, v);
        let p = lz.len();
        let d = self.degree;
        if lz.iter().all(|&l| l == lz[0]) {
            // All variables equal: h_N = binom(N + p - 1, N) z^N.
            let val = ln_binom((d + p - 1) as f64, d as f64) + d as f64 * lz[0];
            let grad = if with_gradient { vec![d as f64 / p as f64; p] } else { Vec::new() };
            return Some((val, grad));
        }
        if (d as u64).saturating_mul(p as u64) > self.budget {
            self.over_budget.store(true, Ordering::Relaxed);
            return None;
        }
        let h = log_h_table(&lz, d);
        let top = h[d];
        if !with_gradient {
            return Some((top, Vec::new()));
        }
        let grad = self.exec.map(&lz, |&l| {
            let terms: Vec<f64> = (1..=d).map(|r| r as f64 * l + h[d - r]).collect();
            (logsumexp(&terms) - top).exp()
        });
        Some((top, grad))
    }
}

impl Objective for HnObjective {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols - 1
    }

    fn value(&self, u: &[f64], v: &[f64]) -> f64 {
        match self.eval(u, v, false) {
            Some((val, _)) => {
                val - self.a.iter().zip(u).map(|(a, x)| a * x).sum::<f64>()
                    - self.b[1..].iter().zip(v).map(|(b, y)| b * y).sum::<f64>()
            }
            None => f64::NAN,
        }
    }

    fn gradient(&self, u: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let Some((_, g)) = self.eval(u, v, true) else {
            return (vec![f64::NAN; self.rows], vec![f64::NAN; self.cols - 1]);
        };
        let mut gr: Vec<f64> = self.a.iter().map(|a| -a).collect();
        let mut gc: Vec<f64> = self.b.iter().map(|b| -b).collect();
        for i in 0..self.rows {
            for j in 0..self.cols {
                gr[i] += g[i * self.cols + j];
                gc[j] += g[i * self.cols + j];
            }
        }
        gc.remove(0);
        (gr, gc)
    }
}

/// `cpc_{ab}(H_N)`. Rows and columns with zero marginal are dropped (the
/// capacity is the limit where their variables vanish).
///
/// The typical matrix holds `z_q dH/dz_q / H` at the optimum.
pub fn capacity_hn(marginals: &Marginals, settings: &HnSettings) -> Result<CapacityResult> {
    let (m, n) = (marginals.m(), marginals.n());
    let rows: Vec<usize> = (0..m).filter(|&i| marginals.alpha()[i] > 0).collect();
    let cols: Vec<usize> = (0..n).filter(|&j| marginals.beta()[j] > 0).collect();
    let degree = marginals.total() as usize;
    let mut typical = vec![0.0; m * n];
    let mut u = vec![f64::NAN; m];
    let mut v = vec![f64::NAN; n];
    if degree == 0 {
        return Ok(CapacityResult {
            value: LogValue::ONE,
            u,
            v,
            typical: TypicalMatrix { m, n, z: typical },
            iterations: 0,
            residual: 0.0,
            converged: true,
            boundary_cells: 0,
        });
    }
    let obj = HnObjective {
        rows: rows.len(),
        cols: cols.len(),
        degree,
        a: rows.iter().map(|&i| marginals.alpha()[i] as f64).collect(),
        b: cols.iter().map(|&j| marginals.beta()[j] as f64).collect(),
        budget: settings.budget,
        over_budget: AtomicBool::new(false),
        exec: settings.solver.exec,
    };
    let tol = settings.solver.tol * (degree as f64).max(1.0);
    let out = minimize(&obj, vec![0.0; obj.rows], vec![0.0; obj.cols - 1], tol, settings.solver.max_iter);
    let v_full: Vec<f64> = std::iter::once(0.0).chain(out.v.iter().copied()).collect();
    if obj.over_budget.load(Ordering::Relaxed) {
        return Err(Error::ResourceLimit {
            used: degree as u64 * (rows.len() * cols.len()) as u64,
            budget: settings.budget,
        });
    }
    if !out.converged {
        return Err(Error::NotConverged { iterations: out.iterations, residual: out.residual });
    }
    let (_, g) = obj.eval(&out.u, &out.v, true).expect("evaluated during the solve");
    for (li, &i) in rows.iter().enumerate() {
        u[i] = out.u[li];
        for (lj, &j) in cols.iter().enumerate() {
            typical[i * n + j] = g[li * cols.len() + lj];
        }
    }
    for (lj, &j) in cols.iter().enumerate() {
        v[j] = v_full[lj];
    }
    let boundary_cells = m * n - rows.len() * cols.len();
    Ok(CapacityResult {
        value: LogValue::from_ln(out.value),
        u,
        v,
        typical: TypicalMatrix { m, n, z: typical },
        iterations: out.iterations,
        residual: out.residual,
        converged: true,
        boundary_cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recurrence_matches_brute_force() {
        // h_2(a, b, c) = a^2 + b^2 + c^2 + ab + ac + bc.
        let z: [f64; 3] = [0.5, 2.0, 3.0];
        let lz: Vec<f64> = z.iter().map(|x| x.ln()).collect();
        let h = log_h_table(&lz, 2);
        let want = z.iter().map(|x| x * x).sum::<f64>() + z[0] * z[1] + z[0] * z[2] + z[1] * z[2];
        assert!((h[2] - want.ln()).abs() < 1e-14);
        assert!((h[1] - z.iter().sum::<f64>().ln()).abs() < 1e-14);
    }

    #[test]
    fn uniform_two_by_two() {
        let marg = Marginals::uniform(2, 2, 1, 1).unwrap();
        let r = capacity_hn(&marg, &HnSettings::default()).unwrap();
        assert!((r.value.ln() - 10f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn single_variable_monomial() {
        let marg = Marginals::new(vec![7], vec![7]).unwrap();
        let r = capacity_hn(&marg, &HnSettings::default()).unwrap();
        assert!(r.value.ln().abs() < 1e-12);
    }
}
