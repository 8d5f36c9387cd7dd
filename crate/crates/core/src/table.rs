//! Marginal vectors and cell bound matrices.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row and column sums of a table.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Marginals {
    alpha: Vec<u64>,
    beta: Vec<u64>,
    total: u64,
}

impl Marginals {
    pub fn new(alpha: Vec<u64>, beta: Vec<u64>) -> Result<Marginals> {
        if alpha.is_empty() || beta.is_empty() {
            return Err(Error::InvalidInput("marginal vectors must be nonempty".into()));
        }
        let row_sum: u64 = alpha.iter().sum();
        let col_sum: u64 = beta.iter().sum();
        if row_sum != col_sum {
            return Err(Error::MarginalsMismatch { row_sum, col_sum });
        }
        Ok(Marginals { alpha, beta, total: row_sum })
    }

    /// `m` rows of sum `s` and `n` columns of sum `t`.
    pub fn uniform(m: usize, n: usize, s: u64, t: u64) -> Result<Marginals> {
        Marginals::new(vec![s; m], vec![t; n])
    }

    pub fn alpha(&self) -> &[u64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[u64] {
        &self.beta
    }

    pub fn m(&self) -> usize {
        self.alpha.len()
    }

    pub fn n(&self) -> usize {
        self.beta.len()
    }

    /// Common sum `N`.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn transpose(&self) -> Marginals {
        Marginals { alpha: self.beta.clone(), beta: self.alpha.clone(), total: self.total }
    }

    pub fn scaled(&self, factor: u64) -> Marginals {
        Marginals {
            alpha: self.alpha.iter().map(|a| a * factor).collect(),
            beta: self.beta.iter().map(|b| b * factor).collect(),
            total: self.total * factor,
        }
    }

    /// Whether all row sums are equal and all column sums are equal.
    pub fn is_uniform(&self) -> bool {
        self.alpha.windows(2).all(|w| w[0] == w[1]) && self.beta.windows(2).all(|w| w[0] == w[1])
    }
}

/// A cell bound: a nonnegative integer or unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cap {
    Finite(u64),
    Inf,
}

impl Cap {
    pub fn finite(&self) -> Option<u64> {
        match self {
            Cap::Finite(k) => Some(*k),
            Cap::Inf => None,
        }
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, Cap::Inf)
    }

    /// Whether `value <= self`.
    pub fn admits(&self, value: u64) -> bool {
        match self {
            Cap::Finite(k) => value <= *k,
            Cap::Inf => true,
        }
    }

    /// Smaller of the cap and `x`.
    pub fn min_with(&self, x: u64) -> u64 {
        match self {
            Cap::Finite(k) => (*k).min(x),
            Cap::Inf => x,
        }
    }
}

impl std::ops::Add for Cap {
    type Output = Cap;

    fn add(self, rhs: Cap) -> Cap {
        match (self, rhs) {
            (Cap::Finite(a), Cap::Finite(b)) => Cap::Finite(a + b),
            _ => Cap::Inf,
        }
    }
}

impl fmt::Display for Cap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cap::Finite(k) => write!(f, "{k}"),
            Cap::Inf => f.write_str("inf"),
        }
    }
}

/// An `m x n` matrix of cell bounds with cached row sums (`lambda`) and
/// column sums (`gamma`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CapMatrix {
    m: usize,
    n: usize,
    entries: Vec<Cap>,
    lambda: Vec<Cap>,
    gamma: Vec<Cap>,
}

impl CapMatrix {
    pub fn from_rows(rows: Vec<Vec<Cap>>) -> Result<CapMatrix> {
        let m = rows.len();
        let n = rows.first().map(|r| r.len()).unwrap_or(0);
        if m == 0 || n == 0 {
            return Err(Error::InvalidInput("cell bound matrix must be nonempty".into()));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("cell bound matrix rows have different lengths".into()));
        }
        Ok(CapMatrix::from_entries(m, n, rows.into_iter().flatten().collect()))
    }

    pub fn from_finite(rows: &[Vec<u64>]) -> Result<CapMatrix> {
        CapMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&k| Cap::Finite(k)).collect()).collect())
    }

    fn from_entries(m: usize, n: usize, entries: Vec<Cap>) -> CapMatrix {
        let lambda = (0..m).map(|i| entries[i * n..(i + 1) * n].iter().fold(Cap::Finite(0), |a, &b| a + b)).collect();
        let gamma = (0..n).map(|j| (0..m).fold(Cap::Finite(0), |a, i| a + entries[i * n + j])).collect();
        CapMatrix { m, n, entries, lambda, gamma }
    }

    pub fn filled(m: usize, n: usize, cap: Cap) -> CapMatrix {
        CapMatrix::from_entries(m, n, vec![cap; m * n])
    }

    /// Every cell unbounded.
    pub fn infinite(m: usize, n: usize) -> CapMatrix {
        CapMatrix::filled(m, n, Cap::Inf)
    }

    /// Every cell bounded by one (binary tables).
    pub fn ones(m: usize, n: usize) -> CapMatrix {
        CapMatrix::filled(m, n, Cap::Finite(1))
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Cap {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[Cap] {
        &self.entries
    }

    pub fn lambda(&self) -> &[Cap] {
        &self.lambda
    }

    pub fn gamma(&self) -> &[Cap] {
        &self.gamma
    }

    pub fn is_graphical(&self) -> bool {
        self.entries.iter().all(|c| matches!(c, Cap::Finite(0) | Cap::Finite(1)))
    }

    pub fn is_multigraphical(&self) -> bool {
        self.entries.iter().all(|c| matches!(c, Cap::Finite(0) | Cap::Inf))
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|c| !c.is_inf())
    }

    pub fn is_all_infinity(&self) -> bool {
        self.entries.iter().all(|c| c.is_inf())
    }

    /// Sum of all finite entries, `None` if any entry is unbounded.
    pub fn finite_total(&self) -> Option<u64> {
        self.entries.iter().map(|c| c.finite()).sum()
    }

    pub fn transpose(&self) -> CapMatrix {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.n {
            for i in 0..self.m {
                entries.push(self.get(i, j));
            }
        }
        CapMatrix::from_entries(self.n, self.m, entries)
    }

    /// Entrywise multiple `factor * K` (unbounded cells stay unbounded).
    pub fn scaled(&self, factor: u64) -> CapMatrix {
        let entries = self
            .entries
            .iter()
            .map(|c| match c {
                Cap::Finite(k) => Cap::Finite(k * factor),
                Cap::Inf => Cap::Inf,
            })
            .collect();
        CapMatrix::from_entries(self.m, self.n, entries)
    }

    /// Copy with cell `(i, j)` replaced.
    pub fn with_cell(&self, i: usize, j: usize, cap: Cap) -> CapMatrix {
        let mut entries = self.entries.clone();
        entries[i * self.n + j] = cap;
        CapMatrix::from_entries(self.m, self.n, entries)
    }

    /// Cells with a nonzero bound.
    pub fn support(&self) -> Vec<(usize, usize)> {
        (0..self.m)
            .flat_map(|i| (0..self.n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.get(i, j) != Cap::Finite(0))
            .collect()
    }

    pub fn check_shape(&self, marginals: &Marginals) -> Result<()> {
        if self.m != marginals.m() || self.n != marginals.n() {
            return Err(Error::InvalidInput(format!(
                "cell bound matrix is {}x{} but marginals are {}x{}",
                self.m,
                self.n,
                marginals.m(),
                marginals.n()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unequal_sums() {
        let err = Marginals::new(vec![3, 1], vec![1, 2]).unwrap_err();
        assert_eq!(err, Error::MarginalsMismatch { row_sum: 4, col_sum: 3 });
    }

    #[test]
    fn cached_sums_absorb_infinity() {
        let k = CapMatrix::from_rows(vec![vec![Cap::Finite(1), Cap::Inf], vec![Cap::Finite(2), Cap::Finite(3)]]).unwrap();
        assert_eq!(k.lambda(), &[Cap::Inf, Cap::Finite(5)]);
        assert_eq!(k.gamma(), &[Cap::Finite(3), Cap::Inf]);
        assert!(!k.is_finite() && !k.is_graphical() && !k.is_multigraphical());
    }

    #[test]
    fn predicates_agree() {
        let ones = CapMatrix::ones(2, 3);
        assert!(ones.is_graphical() && ones.is_finite() && !ones.is_all_infinity());
        let inf = CapMatrix::infinite(2, 2);
        assert!(inf.is_multigraphical() && inf.is_all_infinity() && !inf.is_finite());
        assert_eq!(ones.transpose().rows(), 3);
    }
}
