//! Exact counting oracles.
//!
//! `count_tables` splits the rows into two blocks and sums, over the column
//! sums `c` of the upper block, the product of the two block counts. Blocks
//! of two rows are counted in closed form (bounded compositions), larger
//! blocks recursively.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::bigcount::{ln_biguint, BigCount};
use crate::error::{Error, Result};
use crate::par::Exec;
use crate::special::{ln_factorial, logaddexp};
use crate::table::{Cap, CapMatrix, Marginals};

pub const DEFAULT_BUDGET: u64 = 50_000_000;

/// Enumeration cap for the brute-force oracle.
pub const BRUTE_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMethod {
    Dp,
    Brute,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountResult {
    pub count: BigCount,
    pub states_visited: u64,
    pub method: CountMethod,
}

struct Counter<'a> {
    alpha: Vec<u64>,
    k: &'a CapMatrix,
    budget: u64,
    visited: AtomicU64,
    exhausted: AtomicBool,
}

/// Exact number of tables with the given marginals and `a_ij <= k_ij`.
pub fn count_tables(marginals: &Marginals, k: &CapMatrix, budget: u64) -> Result<CountResult> {
    count_tables_with(marginals, k, budget, Exec::Parallel)
}

pub fn count_tables_with(marginals: &Marginals, k: &CapMatrix, budget: u64, exec: Exec) -> Result<CountResult> {
    k.check_shape(marginals)?;
    if budget == 0 {
        return Err(Error::InvalidInput("budget must be positive".into()));
    }
    // Enumeration runs over column-sum vectors, so keep the shorter side as columns.
    let (marginals, k) = if marginals.n() > marginals.m() {
        (marginals.transpose(), k.transpose())
    } else {
        (marginals.clone(), k.clone())
    };
    // Rows in decreasing order of their sums; the count is invariant.
    let mut order: Vec<usize> = (0..marginals.m()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(marginals.alpha()[i]));
    let rows: Vec<Vec<Cap>> = order.iter().map(|&i| (0..k.cols()).map(|j| k.get(i, j)).collect()).collect();
    let k = CapMatrix::from_rows(rows)?;
    let alpha: Vec<u64> = order.iter().map(|&i| marginals.alpha()[i]).collect();
    let counter = Counter { alpha, k: &k, budget, visited: AtomicU64::new(0), exhausted: AtomicBool::new(false) };
    let all_rows: Vec<usize> = (0..k.rows()).collect();
    let count = counter.block(&all_rows, marginals.beta(), exec);
    let visited = counter.visited.load(Ordering::Relaxed);
    if counter.exhausted.load(Ordering::Relaxed) {
        return Err(Error::ResourceLimit { used: visited, budget });
    }
    Ok(CountResult { count: BigCount(count), states_visited: visited, method: CountMethod::Dp })
}

impl Counter<'_> {
    fn cap_sum(&self, rows: &[usize], j: usize) -> Cap {
        rows.iter().fold(Cap::Finite(0), |acc, &i| acc + self.k.get(i, j))
    }

    fn tick(&self, n: u64) -> bool {
        let v = self.visited.fetch_add(n, Ordering::Relaxed) + n;
        if v > self.budget {
            self.exhausted.store(true, Ordering::Relaxed);
        }
        !self.exhausted.load(Ordering::Relaxed)
    }

    fn block(&self, rows: &[usize], colsum: &[u64], exec: Exec) -> BigUint {
        if self.exhausted.load(Ordering::Relaxed) {
            return BigUint::zero();
        }
        match rows.len() {
            1 => {
                let ok = colsum.iter().enumerate().all(|(j, &c)| self.k.get(rows[0], j).admits(c));
                if ok {
                    BigUint::one()
                } else {
                    BigUint::zero()
                }
            }
            2 => self.two_rows(rows[0], rows[1], colsum),
            _ => self.split(rows, colsum, exec),
        }
    }

    fn two_rows(&self, r1: usize, r2: usize, colsum: &[u64]) -> BigUint {
        let mut lo = Vec::with_capacity(colsum.len());
        let mut width = Vec::with_capacity(colsum.len());
        for (j, &c) in colsum.iter().enumerate() {
            let l = match self.k.get(r2, j) {
                Cap::Finite(k2) => c.saturating_sub(k2),
                Cap::Inf => 0,
            };
            let u = self.k.get(r1, j).min_with(c);
            if l > u {
                return BigUint::zero();
            }
            lo.push(l);
            width.push(Some(u - l));
        }
        let base: u64 = lo.iter().sum();
        if self.alpha[r1] < base {
            return BigUint::zero();
        }
        let total = self.alpha[r1] - base;
        if !self.tick(composition_cost(total, &width)) {
            return BigUint::zero();
        }
        bounded_compositions(total, &width)
    }

    fn split(&self, rows: &[usize], colsum: &[u64], exec: Exec) -> BigUint {
        let (top, bottom) = rows.split_at(rows.len() / 2);
        let target: u64 = top.iter().map(|&i| self.alpha[i]).sum();
        let n = colsum.len();
        let mut lo = vec![0u64; n];
        let mut hi = vec![0u64; n];
        for j in 0..n {
            hi[j] = self.cap_sum(top, j).min_with(colsum[j]);
            lo[j] = match self.cap_sum(bottom, j) {
                Cap::Finite(kb) => colsum[j].saturating_sub(kb),
                Cap::Inf => 0,
            };
            if lo[j] > hi[j] {
                return BigUint::zero();
            }
        }
        // suffix bounds for pruning
        let mut lo_tail = vec![0u64; n + 1];
        let mut hi_tail = vec![0u64; n + 1];
        for j in (0..n).rev() {
            lo_tail[j] = lo_tail[j + 1] + lo[j];
            hi_tail[j] = hi_tail[j + 1] + hi[j];
        }
        if target < lo_tail[0] || target > hi_tail[0] {
            return BigUint::zero();
        }
        let first_lo = lo[0].max(target.saturating_sub(hi_tail[1]));
        let first_hi = hi[0].min(target - lo_tail[1]);
        if first_lo > first_hi {
            return BigUint::zero();
        }
        let partials = exec.map_range((first_hi - first_lo + 1) as usize, |off| {
            let mut c = vec![0u64; n];
            c[0] = first_lo + off as u64;
            let mut acc = BigUint::zero();
            let rem = target - c[0];
            self.enumerate(top, bottom, colsum, &mut c, 1, rem, &lo, &hi, &lo_tail, &hi_tail, &mut acc);
            acc
        });
        partials.into_iter().fold(BigUint::zero(), |a, b| a + b)
    }

    #[allow(clippy::too_many_arguments)]
    fn enumerate(
        &self,
        top: &[usize],
        bottom: &[usize],
        colsum: &[u64],
        c: &mut Vec<u64>,
        j: usize,
        rem: u64,
        lo: &[u64],
        hi: &[u64],
        lo_tail: &[u64],
        hi_tail: &[u64],
        acc: &mut BigUint,
    ) {
        let n = c.len();
        if j == n {
            if !self.tick(1) {
                return;
            }
            let upper = self.block(top, c, Exec::Sequential);
            if upper.is_zero() {
                return;
            }
            let rest: Vec<u64> = colsum.iter().zip(c.iter()).map(|(s, x)| s - x).collect();
            let lower = self.block(bottom, &rest, Exec::Sequential);
            *acc += upper * lower;
            return;
        }
        if self.exhausted.load(Ordering::Relaxed) {
            return;
        }
        let from = lo[j].max(rem.saturating_sub(hi_tail[j + 1]));
        if rem < lo_tail[j + 1] {
            return;
        }
        let to = hi[j].min(rem - lo_tail[j + 1]);
        for x in from..=to.max(from) {
            if x > to {
                break;
            }
            c[j] = x;
            self.enumerate(top, bottom, colsum, c, j + 1, rem - x, lo, hi, lo_tail, hi_tail, acc);
        }
    }
}

/// `binom(x + r, r)` as u128, `None` on overflow.
fn multiset_coeff(x: u64, r: u64) -> Option<u128> {
    let mut acc: u128 = 1;
    for i in 1..=r as u128 {
        acc = acc.checked_mul(x as u128 + i)? / i;
    }
    Some(acc)
}

fn multiset_coeff_big(x: u64, r: u64) -> BigUint {
    let mut acc = BigUint::one();
    for i in 1..=r {
        acc *= BigUint::from(x) + BigUint::from(i);
        acc /= BigUint::from(i);
    }
    acc
}

/// Work units charged for one call of [`bounded_compositions`].
fn composition_cost(total: u64, width: &[Option<u64>]) -> u64 {
    let finite = width.iter().filter(|w| w.is_some()).count();
    if finite <= 16 {
        1 << finite
    } else {
        (total + 1) * width.len() as u64
    }
}

/// Number of integer vectors `0 <= y_j <= w_j` (`None` = unbounded) with
/// `sum y = total`.
pub fn bounded_compositions(total: u64, width: &[Option<u64>]) -> BigUint {
    let n = width.len();
    if n == 0 {
        return if total == 0 { BigUint::one() } else { BigUint::zero() };
    }
    if width.iter().all(|w| w.is_some()) {
        let cap: u64 = width.iter().map(|w| w.unwrap()).sum();
        if total > cap {
            return BigUint::zero();
        }
    }
    let finite: Vec<u64> = width.iter().filter_map(|w| *w).collect();
    if finite.len() <= 16 {
        if let Some(v) = inclusion_exclusion_u128(total, &finite, n as u64 - 1) {
            return BigUint::from(v);
        }
        return inclusion_exclusion_big(total, &finite, n as u64 - 1);
    }
    composition_dp(total, width)
}

/// Signed terms `(-1)^|T| binom(total - sum_T (w+1) + r, r)` over subsets `T`
/// whose shift does not exceed `total`, visited depth first with pruning.
fn for_each_subset(finite: &[u64], total: u64, visit: &mut dyn FnMut(u64, bool) -> bool) -> bool {
    fn rec(finite: &[u64], idx: usize, shift: u64, odd: bool, total: u64, visit: &mut dyn FnMut(u64, bool) -> bool) -> bool {
        if idx == finite.len() {
            return visit(total - shift, odd);
        }
        if !rec(finite, idx + 1, shift, odd, total, visit) {
            return false;
        }
        let next = shift + finite[idx] + 1;
        if next <= total {
            return rec(finite, idx + 1, next, !odd, total, visit);
        }
        true
    }
    rec(finite, 0, 0, false, total, visit)
}

fn inclusion_exclusion_u128(total: u64, finite: &[u64], r: u64) -> Option<u128> {
    let mut pos: u128 = 0;
    let mut neg: u128 = 0;
    let ok = for_each_subset(finite, total, &mut |x, odd| {
        let Some(term) = multiset_coeff(x, r) else { return false };
        let acc = if odd { &mut neg } else { &mut pos };
        match acc.checked_add(term) {
            Some(v) => {
                *acc = v;
                true
            }
            None => false,
        }
    });
    if ok {
        pos.checked_sub(neg)
    } else {
        None
    }
}

fn inclusion_exclusion_big(total: u64, finite: &[u64], r: u64) -> BigUint {
    let mut acc = BigInt::zero();
    for_each_subset(finite, total, &mut |x, odd| {
        let term = BigInt::from(multiset_coeff_big(x, r));
        if odd {
            acc -= term;
        } else {
            acc += term;
        }
        true
    });
    acc.to_biguint().expect("inclusion-exclusion count is nonnegative")
}

fn composition_dp(total: u64, width: &[Option<u64>]) -> BigUint {
    let t = total as usize;
    let mut ways = vec![BigUint::zero(); t + 1];
    ways[0] = BigUint::one();
    for w in width {
        // prefix sums give sum_{x=0}^{w} ways[s - x]
        let mut prefix = Vec::with_capacity(t + 2);
        prefix.push(BigUint::zero());
        for s in 0..=t {
            let next = &prefix[s] + &ways[s];
            prefix.push(next);
        }
        for s in 0..=t {
            let low = match w {
                Some(w) if (s as u64) > *w => s - *w as usize,
                _ => 0,
            };
            ways[s] = &prefix[s + 1] - &prefix[low];
        }
    }
    ways.swap_remove(t)
}

/// Independent oracle: enumerates tables cell by cell.
pub fn count_tables_brute(marginals: &Marginals, k: &CapMatrix) -> Result<CountResult> {
    k.check_shape(marginals)?;
    let (m, n) = (marginals.m(), marginals.n());
    let mut row = marginals.alpha().to_vec();
    let mut col = marginals.beta().to_vec();
    let mut count = 0u64;
    let mut visited = 0u64;
    let ok = brute_rec(k, m, n, 0, &mut row, &mut col, &mut count, &mut visited);
    if !ok {
        return Err(Error::ResourceLimit { used: count, budget: BRUTE_LIMIT });
    }
    Ok(CountResult { count: BigCount::from(count), states_visited: visited, method: CountMethod::Brute })
}

#[allow(clippy::too_many_arguments)]
fn brute_rec(
    k: &CapMatrix,
    m: usize,
    n: usize,
    cell: usize,
    row: &mut [u64],
    col: &mut [u64],
    count: &mut u64,
    visited: &mut u64,
) -> bool {
    *visited += 1;
    if cell == m * n {
        if row.iter().all(|&r| r == 0) && col.iter().all(|&c| c == 0) {
            *count += 1;
            return *count <= BRUTE_LIMIT;
        }
        return true;
    }
    let (i, j) = (cell / n, cell % n);
    let hi = k.get(i, j).min_with(row[i].min(col[j]));
    // The last cell of a row must absorb what is left of the row.
    let range = if j == n - 1 { row[i]..=row[i] } else { 0..=hi };
    for x in range {
        if x > hi {
            break;
        }
        row[i] -= x;
        col[j] -= x;
        let ok = brute_rec(k, m, n, cell + 1, row, col, count, visited);
        row[i] += x;
        col[j] += x;
        if !ok {
            return false;
        }
    }
    true
}

/// Exact probability that independent binomial entries `a_ij ~ Bin(k_ij, s)`
/// have the given marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactProbability {
    /// Natural log of the probability.
    pub ln: f64,
    /// Exact rational value when `s = p/q` with `q <= 64`.
    pub exact: Option<BigRational>,
}

impl ExactProbability {
    pub fn value(&self) -> f64 {
        self.ln.exp()
    }
}

fn rational_parameter(s: f64) -> Option<(u64, u64)> {
    (1..=64u64).find_map(|q| {
        let p = (s * q as f64).round();
        ((s * q as f64 - p).abs() < 1e-12).then_some((p as u64, q))
    })
}

/// Row-by-row dynamic program over residual column sums: the sum over all
/// tables of the product of `weight(i, row_i)`, combined with `mul` and `add`.
fn row_dp<W: Clone>(
    marginals: &Marginals,
    k: &CapMatrix,
    budget: u64,
    one: W,
    weight: impl Fn(usize, &[u64]) -> W,
    mul: impl Fn(&W, &W) -> W,
    add: impl Fn(&W, &W) -> W,
) -> Result<Option<W>> {
    k.check_shape(marginals)?;
    let (m, n) = (marginals.m(), marginals.n());
    let mut states: HashMap<Vec<u64>, W> = HashMap::new();
    states.insert(marginals.beta().to_vec(), one);
    let mut work = 0u64;
    for i in 0..m {
        let mut next: HashMap<Vec<u64>, W> = HashMap::new();
        for (res, w) in &states {
            let mut a = vec![0u64; n];
            let mut over = false;
            for_each_row(i, 0, marginals.alpha()[i], res, k, &mut a, &mut |a| {
                work += 1;
                if work > budget {
                    over = true;
                    return false;
                }
                let key: Vec<u64> = res.iter().zip(a).map(|(r, x)| r - x).collect();
                let term = mul(&weight(i, a), w);
                match next.get_mut(&key) {
                    Some(acc) => *acc = add(acc, &term),
                    None => {
                        next.insert(key, term);
                    }
                }
                true
            });
            if over {
                return Err(Error::ResourceLimit { used: work, budget });
            }
        }
        states = next;
    }
    Ok(states.remove(&vec![0u64; n]))
}

/// Calls `emit` with every row vector `a` with `sum a = rem`, `a_j <= res_j`
/// and `a_j <= k_ij`. `emit` returns `false` to stop.
fn for_each_row(i: usize, j: usize, rem: u64, res: &[u64], k: &CapMatrix, a: &mut Vec<u64>, emit: &mut dyn FnMut(&[u64]) -> bool) -> bool {
    let n = res.len();
    if j + 1 == n {
        if !k.get(i, j).admits(rem) || rem > res[j] {
            return true;
        }
        a[j] = rem;
        let go = emit(a);
        a[j] = 0;
        return go;
    }
    let hi = k.get(i, j).min_with(res[j].min(rem));
    for x in 0..=hi {
        a[j] = x;
        if !for_each_row(i, j + 1, rem - x, res, k, a, emit) {
            return false;
        }
    }
    a[j] = 0;
    true
}

/// `sum over tables A of prod binom(k_ij, a_ij)`.
pub fn binomial_weight_sum(marginals: &Marginals, k: &CapMatrix, budget: u64) -> Result<BigUint> {
    k.check_shape(marginals)?;
    if !k.is_finite() {
        return Err(Error::KInfinite);
    }
    let n = marginals.n();
    let binoms: Vec<Vec<BigUint>> = k.entries().iter().map(|c| binomial_row(c.finite().unwrap())).collect();
    let w = row_dp(
        marginals,
        k,
        budget,
        BigUint::one(),
        |i, a| a.iter().enumerate().map(|(j, &x)| binoms[i * n + j][x as usize].clone()).product(),
        |a, b| a * b,
        |a, b| a + b,
    )?;
    Ok(w.unwrap_or_default())
}

fn binomial_row(k: u64) -> Vec<BigUint> {
    let mut row = vec![BigUint::one()];
    for a in 1..=k {
        let prev = row[(a - 1) as usize].clone();
        row.push(prev * BigUint::from(k - a + 1) / BigUint::from(a));
    }
    row
}

/// Exact `mu_{alpha,beta}` for independent Poisson entries with rate `s`,
/// summed in log space over all tables with the given marginals.
pub fn exact_poisson_marginal_probability(marginals: &Marginals, s: f64, budget: u64) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidInput(format!("Poisson rate must be positive, got {s}")));
    }
    let k = CapMatrix::infinite(marginals.m(), marginals.n());
    let lw = row_dp(
        marginals,
        &k,
        budget,
        0.0,
        |_, a| -a.iter().map(|&x| ln_factorial(x as f64)).sum::<f64>(),
        |a, b| a + b,
        |a, b| logaddexp(*a, *b),
    )?
    .unwrap_or(f64::NEG_INFINITY);
    let big_n = marginals.total() as f64;
    let head = if big_n > 0.0 { big_n * s.ln() } else { 0.0 };
    Ok(lw + head - s * (marginals.m() * marginals.n()) as f64)
}

/// Exact `mu_{alpha,beta}` for binomial entries on `{0..k_ij}` with parameter `s`.
pub fn exact_binomial_marginal_probability(marginals: &Marginals, k: &CapMatrix, s: f64, budget: u64) -> Result<ExactProbability> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidInput(format!("binomial parameter must lie in [0, 1], got {s}")));
    }
    k.check_shape(marginals)?;
    let big_n = marginals.total();
    let total_k = k.finite_total().ok_or(Error::KInfinite)?;
    if big_n > total_k {
        return Ok(ExactProbability { ln: f64::NEG_INFINITY, exact: Some(BigRational::zero()) });
    }
    let weight = binomial_weight_sum(marginals, k, budget)?;
    let free = total_k - big_n;
    let ln_pow = |count: u64, x: f64| if count == 0 { 0.0 } else { count as f64 * x.ln() };
    let ln = ln_biguint(&weight) + ln_pow(big_n, s) + ln_pow(free, 1.0 - s);
    let exact = rational_parameter(s).map(|(p, q)| {
        let num = BigInt::from(weight) * BigInt::from(p).pow(big_n as u32) * BigInt::from(q - p).pow(free as u32);
        let den = BigInt::from(q).pow(total_k as u32);
        BigRational::new(num, den)
    });
    let ln = match &exact {
        Some(r) if !r.numer().is_zero() => {
            // recompute from the exact value for full accuracy
            ln_biguint(&r.numer().to_biguint().unwrap()) - ln_biguint(&r.denom().to_biguint().unwrap())
        }
        Some(_) => f64::NEG_INFINITY,
        None => ln,
    };
    Ok(ExactProbability { ln, exact })
}

/// Float value of an exact rational.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn marg(a: &[u64], b: &[u64]) -> Marginals {
        Marginals::new(a.to_vec(), b.to_vec()).unwrap()
    }

    #[test]
    fn small_counts() {
        let c = count_tables(&marg(&[1, 1], &[1, 1]), &CapMatrix::infinite(2, 2), DEFAULT_BUDGET).unwrap();
        assert_eq!(c.count, BigCount::from(2));
        let c = count_tables(&marg(&[1, 1, 1], &[1, 1, 1]), &CapMatrix::ones(3, 3), DEFAULT_BUDGET).unwrap();
        assert_eq!(c.count, BigCount::from(6));
        let c = count_tables_brute(&marg(&[2, 1], &[1, 1, 1]), &CapMatrix::infinite(2, 3)).unwrap();
        assert_eq!(c.count, BigCount::from(3));
        let c = count_tables_brute(&marg(&[2, 2], &[2, 2]), &CapMatrix::ones(2, 2)).unwrap();
        assert_eq!(c.count, BigCount::from(1));
    }

    #[test]
    fn compositions_agree_across_methods() {
        let widths = [Some(3u64), Some(0), Some(5), Some(2)];
        for total in 0..12 {
            let ie = bounded_compositions(total, &widths);
            let dp = composition_dp(total, &widths);
            assert_eq!(ie, dp, "total {total}");
        }
        let unbounded = [None, Some(2), None];
        assert_eq!(bounded_compositions(4, &unbounded), composition_dp(4, &unbounded));
    }

    #[test]
    fn binomial_probability_examples() {
        let p = exact_binomial_marginal_probability(&marg(&[1, 1], &[1, 1]), &CapMatrix::ones(2, 2), 0.5, DEFAULT_BUDGET).unwrap();
        assert_eq!(p.exact.unwrap(), BigRational::new(1.into(), 8.into()));
        let p = exact_binomial_marginal_probability(&marg(&[1], &[1]), &CapMatrix::from_finite(&[vec![2]]).unwrap(), 0.5, DEFAULT_BUDGET)
            .unwrap();
        assert!((p.value() - 0.5).abs() < 1e-15);
        let p = exact_binomial_marginal_probability(&marg(&[0, 0], &[0]), &CapMatrix::from_finite(&[vec![3], vec![1]]).unwrap(), 0.0, DEFAULT_BUDGET)
            .unwrap();
        assert_eq!(p.value(), 1.0);
    }

    #[test]
    fn poisson_probability_example() {
        let ln = exact_poisson_marginal_probability(&marg(&[1, 1], &[1, 1]), 1.0, DEFAULT_BUDGET).unwrap();
        assert!((ln - (2f64.ln() - 4.0)).abs() < 1e-14);
    }

    #[test]
    fn budget_is_enforced() {
        let m = marg(&[100, 100, 100, 100], &[100, 100, 100, 100]);
        let err = count_tables(&m, &CapMatrix::infinite(4, 4), 10).unwrap_err();
        assert!(matches!(err, Error::ResourceLimit { .. }));
    }
}
