//! Lower bounds on volumes of flow and transportation polytopes.

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};
use petgraph::unionfind::UnionFind;

use crate::bigcount::ln_biguint;
use crate::capacity::{solve_capacity, CapacityProblem, SolverSettings};
use crate::error::{Error, Result};
use crate::exact::count_tables;
use crate::feasibility::feasible;
use crate::logvalue::LogValue;
use crate::table::{CapMatrix, Marginals};

#[derive(Debug, Clone, PartialEq)]
pub struct VolumeBound {
    pub value: LogValue,
    /// Lattice normalisation `f(S, m, n)`.
    pub covolume: LogValue,
    pub capacity_part: LogValue,
    /// `e^{1-m-n} prod_{i>=2} alpha_i^{-1} prod_j beta_j^{-1}`.
    pub prefactor: LogValue,
    pub note: Option<String>,
}

/// Number of spanning trees of the bipartite support graph of `k`.
pub fn spanning_tree_count(k: &CapMatrix) -> BigUint {
    let (m, n) = (k.rows(), k.cols());
    let size = m + n;
    // Reduced Laplacian: drop vertex 0 (the first row).
    let mut lap = vec![vec![BigInt::zero(); size - 1]; size - 1];
    let idx = |v: usize| v.checked_sub(1);
    for (i, j) in k.support() {
        let (a, b) = (i, m + j);
        for &x in &[a, b] {
            if let Some(p) = idx(x) {
                lap[p][p] += 1;
            }
        }
        if let (Some(p), Some(q)) = (idx(a), idx(b)) {
            lap[p][q] -= 1;
            lap[q][p] -= 1;
        }
    }
    bareiss_determinant(lap).abs().to_biguint().expect("absolute value")
}

/// Fraction-free Gaussian elimination.
fn bareiss_determinant(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::from(1);
    }
    let mut sign = 1;
    let mut prev = BigInt::from(1);
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&p| !a[p][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = t / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

fn support_connected(k: &CapMatrix) -> bool {
    let (m, n) = (k.rows(), k.cols());
    let mut uf = UnionFind::<usize>::new(m + n);
    for (i, j) in k.support() {
        uf.union(i, m + j);
    }
    (1..m + n).all(|v| uf.equiv(0, v))
}

/// Square root of the spanning-tree count of the support graph.
pub fn covolume(k: &CapMatrix) -> Result<LogValue> {
    if !support_connected(k) {
        return Err(Error::DisconnectedSupport);
    }
    Ok(LogValue::from_ln(0.5 * ln_biguint(&spanning_tree_count(k))))
}

fn prefactor(marginals: &Marginals) -> Result<LogValue> {
    if marginals.alpha().iter().chain(marginals.beta()).any(|&x| x == 0) {
        return Err(Error::InvalidInput("volume bounds need positive marginals".into()));
    }
    let (m, n) = (marginals.m() as f64, marginals.n() as f64);
    let logs: f64 = marginals.alpha()[1..].iter().chain(marginals.beta()).map(|&x| (x as f64).ln()).sum();
    Ok(LogValue::from_ln(1.0 - m - n - logs))
}

/// Lower bound on the volume of `{Z : 0 <= z_ij <= k_ij, marginals}`.
pub fn flow_volume_lower_bound(marginals: &Marginals, k: &CapMatrix, settings: SolverSettings) -> Result<VolumeBound> {
    k.check_shape(marginals)?;
    let prefactor = prefactor(marginals)?;
    let covolume = covolume(k)?;
    if !feasible(marginals, k) {
        return Err(Error::Infeasible("no table fits the cell bounds".into()));
    }
    let capacity_part = solve_capacity(&CapacityProblem::volume(marginals, k)?.with_settings(settings))?.value;
    let note = (!k.is_multigraphical())
        .then(|| "covolume from the support spanning-tree count; exact only for 0/unbounded cell bounds".to_string());
    Ok(VolumeBound { value: covolume * prefactor * capacity_part, covolume, capacity_part, prefactor, note })
}

/// Lower bound on the volume of the transportation polytope.
pub fn transportation_volume_lower_bound(marginals: &Marginals, settings: SolverSettings) -> Result<VolumeBound> {
    flow_volume_lower_bound(marginals, &CapMatrix::infinite(marginals.m(), marginals.n()), settings)
}

/// Transportation bound at uniform marginals: `m` rows of sum `alpha0`, `n`
/// columns of sum `beta0`.
pub fn uniform_volume_closed_form(m: u64, n: u64, alpha0: u64, beta0: u64) -> Result<LogValue> {
    if m == 0 || n == 0 || m * alpha0 != n * beta0 {
        return Err(Error::MarginalsMismatch { row_sum: m * alpha0, col_sum: n * beta0 });
    }
    let big_n = (m * alpha0) as f64;
    let (mf, nf) = (m as f64, n as f64);
    let ln = (mf - 1.0) * (nf - 1.0) * (1.0 + big_n.ln())
        - ((mf - 0.5) * (nf - 1.0) + 1.0) * mf.ln()
        - (nf - 0.5) * (mf - 1.0) * nf.ln();
    Ok(LogValue::from_ln(ln))
}

/// `covolume * CT_{MK}(M alpha, M beta) / M^d` with `d` the dimension of the
/// polytope when its interior is nonempty. Converges to the volume as the
/// scale `M` grows; used as an oracle for the lower bounds.
pub fn scaling_estimate(marginals: &Marginals, k: &CapMatrix, scale: u64, budget: u64) -> Result<LogValue> {
    k.check_shape(marginals)?;
    if scale == 0 {
        return Err(Error::InvalidInput("scale must be positive".into()));
    }
    let covolume = covolume(k)?;
    let dim = k.support().len() as f64 - (marginals.m() + marginals.n() - 1) as f64;
    let count = count_tables(&marginals.scaled(scale), &k.scaled(scale), budget)?.count;
    Ok(covolume * count.to_logvalue() * LogValue::from_ln(-dim * (scale as f64).ln()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::Cap;

    #[test]
    fn covolume_examples() {
        assert!((covolume(&CapMatrix::infinite(3, 3)).unwrap().ln() - 9f64.ln()).abs() < 1e-12);
        assert!((covolume(&CapMatrix::infinite(2, 2)).unwrap().ln() - 2f64.ln()).abs() < 1e-12);
        let tree = CapMatrix::from_rows(vec![
            vec![Cap::Inf, Cap::Inf, Cap::Inf],
            vec![Cap::Inf, Cap::Finite(0), Cap::Finite(0)],
        ])
        .unwrap();
        assert_eq!(spanning_tree_count(&tree), BigUint::from(1u32));
        let split = CapMatrix::from_finite(&[vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(covolume(&split), Err(Error::DisconnectedSupport));
    }

    #[test]
    fn birkhoff_examples() {
        let e = std::f64::consts::E;
        assert!((uniform_volume_closed_form(2, 2, 1, 1).unwrap().to_f64() - e / 8.0).abs() < 1e-14);
        assert!((uniform_volume_closed_form(3, 3, 1, 1).unwrap().to_f64() - e.powi(4) / 3f64.powi(7)).abs() < 1e-14);
        let m = Marginals::uniform(3, 3, 1, 1).unwrap();
        let b = transportation_volume_lower_bound(&m, SolverSettings::default()).unwrap();
        assert!((b.value.ln() - (4.0 - 7.0 * 3f64.ln())).abs() < 1e-8);
    }
}
