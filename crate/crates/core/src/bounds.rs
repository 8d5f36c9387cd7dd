//! Lower and upper bounds on the number of contingency tables.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::capacity::{capacity_hn, counting_capacity, CapacityResult, HnSettings, SolverSettings, TypicalMatrix};
use crate::error::{Error, Result};
use crate::feasibility::feasible;
use crate::logvalue::LogValue;
use crate::special::{ln_binom, ln_factorial, ln_gamma_fn, ln_marginal_ratio, xlogx};
use crate::table::{Cap, CapMatrix, Marginals};

/// Identifiers of the bounds a report can hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundId {
    Ub1,
    Ub2,
    Ub3,
    Lb1,
    Lb2,
    Newlb,
    GurvitsLb,
    GurvitsUb,
    Cti,
    NewlbBounded,
}

impl BoundId {
    pub const ALL: [BoundId; 10] = [
        BoundId::Ub1,
        BoundId::Ub2,
        BoundId::Ub3,
        BoundId::Lb1,
        BoundId::Lb2,
        BoundId::Newlb,
        BoundId::GurvitsLb,
        BoundId::GurvitsUb,
        BoundId::Cti,
        BoundId::NewlbBounded,
    ];

    /// The set computed when nothing is requested explicitly.
    pub const DEFAULT: [BoundId; 7] =
        [BoundId::Ub1, BoundId::Ub2, BoundId::Ub3, BoundId::Lb1, BoundId::Lb2, BoundId::Newlb, BoundId::Cti];

    pub fn as_str(&self) -> &'static str {
        match self {
            BoundId::Ub1 => "ub1",
            BoundId::Ub2 => "ub2",
            BoundId::Ub3 => "ub3",
            BoundId::Lb1 => "lb1",
            BoundId::Lb2 => "lb2",
            BoundId::Newlb => "newlb",
            BoundId::GurvitsLb => "gurvits_lb",
            BoundId::GurvitsUb => "gurvits_ub",
            BoundId::Cti => "cti",
            BoundId::NewlbBounded => "newlb_bounded",
        }
    }

    pub fn is_upper(&self) -> bool {
        matches!(self, BoundId::Ub1 | BoundId::Ub2 | BoundId::Ub3 | BoundId::GurvitsUb)
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundId {
    type Err = Error;

    fn from_str(s: &str) -> Result<BoundId> {
        BoundId::ALL
            .iter()
            .find(|b| b.as_str() == s)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("unknown bound id '{s}'")))
    }
}

/// Which marginal loses its correction factor in the product lower bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Skip the row whose factor is smallest.
    Rows,
    /// Skip the column whose factor is smallest.
    Cols,
    /// Larger of `Rows` and `Cols`.
    #[default]
    Best,
    /// Skip the first row as given.
    AsStated,
}

impl FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Orientation> {
        match s {
            "rows" => Ok(Orientation::Rows),
            "cols" => Ok(Orientation::Cols),
            "best" => Ok(Orientation::Best),
            "as-stated" | "as_stated" => Ok(Orientation::AsStated),
            _ => Err(Error::InvalidInput(format!("unknown orientation '{s}'"))),
        }
    }
}

/// `b^b / (b+1)^{b+1}` with `b = min(a, cap - a)`.
pub fn marginal_factor(a: u64, cap: Cap) -> Result<LogValue> {
    let b = match cap {
        Cap::Inf => a,
        Cap::Finite(c) if a <= c => a.min(c - a),
        Cap::Finite(c) => return Err(Error::BoundExceeded { value: a, cap: c }),
    };
    Ok(LogValue::from_ln(ln_marginal_ratio(b as f64)))
}

/// `binom(l, a) a^a (l-a)^{l-a} / l^l`.
pub fn gurvits_factor(a: u64, cap: Cap) -> Result<LogValue> {
    let l = match cap {
        Cap::Finite(l) if a <= l => l,
        Cap::Finite(l) => return Err(Error::BoundExceeded { value: a, cap: l }),
        Cap::Inf => return Err(Error::NotGraphical),
    };
    let (af, lf) = (a as f64, l as f64);
    Ok(LogValue::from_ln(ln_binom(lf, af) + xlogx(af) + xlogx(lf - af) - xlogx(lf)))
}

/// Per-index log factors, for rows and for columns.
fn factor_logs(
    marginals: &Marginals,
    k: &CapMatrix,
    factor: fn(u64, Cap) -> Result<LogValue>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let rows = marginals.alpha().iter().zip(k.lambda()).map(|(&a, &c)| factor(a, c).map(|v| v.ln())).collect::<Result<_>>()?;
    let cols = marginals.beta().iter().zip(k.gamma()).map(|(&b, &c)| factor(b, c).map(|v| v.ln())).collect::<Result<_>>()?;
    Ok((rows, cols))
}

/// Product of all factors except one, under each orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkipProducts {
    pub rows: f64,
    pub cols: f64,
    pub as_stated: f64,
}

impl SkipProducts {
    fn new(rows: &[f64], cols: &[f64]) -> SkipProducts {
        let sr: f64 = rows.iter().sum();
        let sc: f64 = cols.iter().sum();
        let min = |v: &[f64]| v.iter().cloned().fold(f64::INFINITY, f64::min);
        SkipProducts { rows: sr - min(rows) + sc, cols: sr + sc - min(cols), as_stated: sr - rows[0] + sc }
    }

    pub fn pick(&self, orientation: Orientation) -> f64 {
        match orientation {
            Orientation::Rows => self.rows,
            Orientation::Cols => self.cols,
            Orientation::Best => self.rows.max(self.cols),
            Orientation::AsStated => self.as_stated,
        }
    }
}

/// Log of the product correction in the main lower bound for each orientation.
pub fn new_lb_factors(marginals: &Marginals, k: &CapMatrix) -> Result<SkipProducts> {
    let (r, c) = factor_logs(marginals, k, marginal_factor)?;
    Ok(SkipProducts::new(&r, &c))
}

/// Log of the Gurvits product correction for each orientation.
pub fn gurvits_factors(marginals: &Marginals, k: &CapMatrix) -> Result<SkipProducts> {
    let (r, c) = factor_logs(marginals, k, gurvits_factor)?;
    Ok(SkipProducts::new(&r, &c))
}

/// `cpc(P_K)` times the marginal factors, skipping one index as chosen by
/// `orientation`. Zero when no table fits.
pub fn new_lower_bound(
    marginals: &Marginals,
    k: &CapMatrix,
    orientation: Orientation,
    settings: SolverSettings,
) -> Result<LogValue> {
    k.check_shape(marginals)?;
    if !feasible(marginals, k) {
        return Ok(LogValue::ZERO);
    }
    let cap = counting_capacity(marginals, k, settings)?;
    Ok(cap.value * LogValue::from_ln(new_lb_factors(marginals, k)?.pick(orientation)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundedMarginalsBound {
    pub value: LogValue,
    /// Guaranteed ratio `1 / ((m+n-1) (e(c+1))^{m+n-1})` of the bound to the capacity.
    pub guaranteed_ratio: LogValue,
    pub c: u64,
    pub k: CapMatrix,
}

/// Lower bound through the cell bounds `k_ij = min(alpha_i, beta_j)`, which
/// leave the count unchanged. `c` is the largest marginal once the largest
/// row and the largest column are set aside.
pub fn new_lower_bound_bounded_marginals(marginals: &Marginals, settings: SolverSettings) -> Result<BoundedMarginalsBound> {
    let (alpha, beta) = (marginals.alpha(), marginals.beta());
    let rows: Vec<Vec<u64>> = alpha.iter().map(|&a| beta.iter().map(|&b| a.min(b)).collect()).collect();
    let k = CapMatrix::from_finite(&rows)?;
    let top_row = (0..alpha.len()).max_by_key(|&i| (alpha[i], std::cmp::Reverse(i))).unwrap();
    let top_col = (0..beta.len()).max_by_key(|&j| (beta[j], std::cmp::Reverse(j))).unwrap();
    let c = alpha
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != top_row)
        .map(|(_, &a)| a)
        .chain(beta.iter().enumerate().filter(|&(j, _)| j != top_col).map(|(_, &b)| b))
        .max()
        .unwrap_or(0);
    let d = (marginals.m() + marginals.n() - 1) as f64;
    let ratio = LogValue::from_ln(-d.ln() - d * (1.0 + ((c + 1) as f64).ln()));
    let value = new_lower_bound(marginals, &k, Orientation::Best, settings)?;
    Ok(BoundedMarginalsBound { value, guaranteed_ratio: ratio, c, k })
}

/// Barvinok's constant `C_Barv`, for cell bounds with entries in `{0, inf}`.
pub fn barvinok_first_constant(marginals: &Marginals, k: &CapMatrix) -> Result<LogValue> {
    if !k.is_multigraphical() {
        return Err(Error::NotMultigraphical);
    }
    Ok(LogValue::from_ln(ln_barvinok_constant(marginals)))
}

fn ln_barvinok_constant(marginals: &Marginals) -> f64 {
    let (m, n) = (marginals.m() as f64, marginals.n() as f64);
    let big_n = marginals.total() as f64;
    let p = m * n;
    let pi = std::f64::consts::PI;
    ln_gamma_fn((m + n) / 2.0) - 2f64.ln() - 5.0 - (m + n - 2.0) / 2.0 * pi.ln() - p.ln() - (big_n + p).ln()
        + (m + n - 1.0) * (2f64.ln() - 2.0 * p.ln() - (big_n + 1.0).ln() - (big_n + p).ln())
        + ln_factorial(big_n)
        + ln_factorial(big_n + p)
        + xlogx(p)
        - xlogx(big_n)
        - xlogx(big_n + p)
        - ln_factorial(p)
        + ln_power_over_factorial(marginals.alpha())
        + ln_power_over_factorial(marginals.beta())
}

/// `ln prod a^a / a!`.
fn ln_power_over_factorial(v: &[u64]) -> f64 {
    v.iter().map(|&a| xlogx(a as f64) - ln_factorial(a as f64)).sum()
}

/// Barvinok's constant `C_H` relating `cpc(H_N)` to a lower bound.
pub fn barvinok_second_constant(marginals: &Marginals) -> LogValue {
    let (m, n) = (marginals.m() as f64, marginals.n() as f64);
    let big_n = marginals.total() as f64;
    let ln = -ln_binom(big_n + m - 1.0, m - 1.0) - ln_binom(big_n + n - 1.0, n - 1.0) + ln_factorial(big_n)
        - xlogx(big_n)
        + ln_power_over_factorial(marginals.alpha()).max(ln_power_over_factorial(marginals.beta()));
    LogValue::from_ln(ln)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecondBounds {
    pub ub2: LogValue,
    pub lb2: LogValue,
    pub capacity: CapacityResult,
}

/// `cpc(H_N)` and `C_H cpc(H_N)`.
pub fn barvinok_second_bounds(marginals: &Marginals, settings: &HnSettings) -> Result<SecondBounds> {
    let capacity = capacity_hn(marginals, settings)?;
    let ub2 = capacity.value;
    Ok(SecondBounds { ub2, lb2: ub2 * barvinok_second_constant(marginals), capacity })
}

/// `max over spanning trees of K_{m,n}` of `sum log(1 + z_ij)`, by Kruskal
/// with ties broken in row-major cell order.
pub fn max_spanning_tree_weight(z: &TypicalMatrix) -> f64 {
    let (m, n) = (z.m, z.n);
    let mut edges: Vec<(usize, usize, f64)> =
        (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (i, j, z.get(i, j).ln_1p())).collect();
    edges.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap_or(std::cmp::Ordering::Equal));
    let mut uf = UnionFind::<usize>::new(m + n);
    let mut total = 0.0;
    let mut used = 0;
    for (i, j, w) in edges {
        if uf.union(i, m + j) {
            total += w;
            used += 1;
            if used == m + n - 1 {
                break;
            }
        }
    }
    total
}

/// Shapiro's refinement of the first upper bound: `cpc(P_inf)` times the
/// smallest spanning-tree product of `1/(1 + z_ij)`.
pub fn shapiro_upper_bound(marginals: &Marginals, settings: SolverSettings) -> Result<LogValue> {
    let cap = counting_capacity(marginals, &CapMatrix::infinite(marginals.m(), marginals.n()), settings)?;
    Ok(shapiro_from_capacity(&cap))
}

pub fn shapiro_from_capacity(cap: &CapacityResult) -> LogValue {
    cap.value * LogValue::from_ln(-max_spanning_tree_weight(&cap.typical))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GurvitsBounds {
    pub lb: LogValue,
    pub ub: LogValue,
}

/// Gurvits's bounds for binary tables with cell bounds in `{0, 1}`.
pub fn gurvits_binary_bounds(
    marginals: &Marginals,
    k: &CapMatrix,
    orientation: Orientation,
    settings: SolverSettings,
) -> Result<GurvitsBounds> {
    k.check_shape(marginals)?;
    if !k.is_graphical() {
        return Err(Error::NotGraphical);
    }
    let fits = marginals.alpha().iter().zip(k.lambda()).all(|(&a, c)| c.admits(a))
        && marginals.beta().iter().zip(k.gamma()).all(|(&b, c)| c.admits(b));
    if !fits || !feasible(marginals, k) {
        return Ok(GurvitsBounds { lb: LogValue::ZERO, ub: LogValue::ZERO });
    }
    let ub = counting_capacity(marginals, k, settings)?.value;
    let lb = ub * LogValue::from_ln(gurvits_factors(marginals, k)?.pick(orientation));
    Ok(GurvitsBounds { lb, ub })
}

/// Good's independence estimate
/// `binom(N+mn-1, mn-1)^{-1} prod binom(a_i+n-1, n-1) prod binom(b_j+m-1, m-1)`.
pub fn independence_heuristic(marginals: &Marginals) -> LogValue {
    let (m, n) = (marginals.m() as f64, marginals.n() as f64);
    let big_n = marginals.total() as f64;
    let ln = -ln_binom(big_n + m * n - 1.0, m * n - 1.0)
        + marginals.alpha().iter().map(|&a| ln_binom(a as f64 + n - 1.0, n - 1.0)).sum::<f64>()
        + marginals.beta().iter().map(|&b| ln_binom(b as f64 + m - 1.0, m - 1.0)).sum::<f64>();
    LogValue::from_ln(ln)
}

/// One computed bound.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundEntry {
    pub id: BoundId,
    pub value: LogValue,
    pub valid: bool,
    pub note: String,
    pub seconds: f64,
    /// Set when the computation failed; `value` is then the trivial bound.
    pub error: Option<Error>,
}

/// Convergence information for one capacity solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub name: String,
    pub iterations: usize,
    pub residual: f64,
    pub boundary_cells: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub marginals: Marginals,
    pub k: CapMatrix,
    pub entries: Vec<BoundEntry>,
    pub diagnostics: Vec<SolveDiagnostics>,
}

impl BoundsReport {
    pub fn get(&self, id: BoundId) -> Option<&BoundEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn value(&self, id: BoundId) -> Option<LogValue> {
        self.get(id).map(|e| e.value)
    }

    /// First error raised while computing any entry.
    pub fn first_error(&self) -> Option<&Error> {
        self.entries.iter().find_map(|e| e.error.as_ref())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsSettings {
    pub solver: SolverSettings,
    pub hn_budget: u64,
    pub orientation: Orientation,
}

impl Default for BoundsSettings {
    fn default() -> Self {
        BoundsSettings {
            solver: SolverSettings::default(),
            hn_budget: crate::capacity::DEFAULT_HN_BUDGET,
            orientation: Orientation::Best,
        }
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed().as_secs_f64())
}

fn diagnostics(name: &str, r: &Result<CapacityResult>, seconds: f64) -> Option<SolveDiagnostics> {
    r.as_ref().ok().map(|c| SolveDiagnostics {
        name: name.to_string(),
        iterations: c.iterations,
        residual: c.residual,
        boundary_cells: c.boundary_cells,
        seconds,
    })
}

/// Computes every bound in `which` for one instance. Capacity solves are
/// shared between bounds and run concurrently. Failures of individual bounds
/// are recorded in their entries; an infeasible instance is an error.
pub fn compute_bounds(marginals: &Marginals, k: &CapMatrix, which: &[BoundId], settings: &BoundsSettings) -> Result<BoundsReport> {
    k.check_shape(marginals)?;
    if !feasible(marginals, k) {
        return Err(Error::Infeasible("no table with these marginals fits under the cell bounds".into()));
    }
    let (m, n) = (marginals.m(), marginals.n());
    let wants = |ids: &[BoundId]| ids.iter().any(|id| which.contains(id));
    let need_pk = wants(&[BoundId::Ub1, BoundId::Lb1, BoundId::Newlb, BoundId::GurvitsLb, BoundId::GurvitsUb])
        || (k.is_all_infinity() && wants(&[BoundId::Ub3]));
    let need_pinf = !k.is_all_infinity() && wants(&[BoundId::Ub3]);
    let need_hn = wants(&[BoundId::Ub2, BoundId::Lb2]);
    let exec = settings.solver.exec;
    let hn_settings = HnSettings { solver: settings.solver, budget: settings.hn_budget };

    let ((pk, pinf), hn) = exec.join(
        || {
            exec.join(
                || need_pk.then(|| timed(|| counting_capacity(marginals, k, settings.solver))),
                || need_pinf.then(|| timed(|| counting_capacity(marginals, &CapMatrix::infinite(m, n), settings.solver))),
            )
        },
        || need_hn.then(|| timed(|| capacity_hn(marginals, &hn_settings))),
    );
    let mut diags = Vec::new();
    for (name, r) in [("P_K", &pk), ("P_inf", &pinf), ("H_N", &hn)] {
        if let Some((res, secs)) = r {
            diags.extend(diagnostics(name, res, *secs));
        }
    }
    let pinf = if k.is_all_infinity() { pk.clone() } else { pinf };

    let mut entries = Vec::new();
    for &id in which {
        if entries.iter().any(|e: &BoundEntry| e.id == id) {
            continue;
        }
        let (res, own) = timed(|| entry_value(id, marginals, k, settings, &pk, &pinf, &hn));
        let shared = match id {
            BoundId::Ub2 | BoundId::Lb2 => hn.as_ref().map_or(0.0, |h| h.1),
            BoundId::Ub3 if !k.is_all_infinity() => pinf.as_ref().map_or(0.0, |h| h.1),
            BoundId::Cti => 0.0,
            _ => pk.as_ref().map_or(0.0, |h| h.1),
        };
        let entry = match res {
            Ok((value, valid, note)) => BoundEntry { id, value, valid, note, seconds: own + shared, error: None },
            Err(e) => BoundEntry {
                id,
                value: if id.is_upper() { LogValue::INFINITY } else { LogValue::ZERO },
                valid: false,
                note: e.to_string(),
                seconds: own + shared,
                error: Some(e),
            },
        };
        entries.push(entry);
    }
    Ok(BoundsReport { marginals: marginals.clone(), k: k.clone(), entries, diagnostics: diags })
}

type Timed<T> = Option<(Result<T>, f64)>;

fn solved(r: &Timed<CapacityResult>) -> Result<&CapacityResult> {
    match r {
        Some((Ok(c), _)) => Ok(c),
        Some((Err(e), _)) => Err(e.clone()),
        None => Err(Error::InvalidInput("capacity was not computed".into())),
    }
}

fn entry_value(
    id: BoundId,
    marginals: &Marginals,
    k: &CapMatrix,
    settings: &BoundsSettings,
    pk: &Timed<CapacityResult>,
    pinf: &Timed<CapacityResult>,
    hn: &Timed<CapacityResult>,
) -> Result<(LogValue, bool, String)> {
    let (m, n) = (marginals.m(), marginals.n());
    match id {
        BoundId::Ub1 => Ok((solved(pk)?.value, true, String::new())),
        BoundId::Ub2 => {
            let note = if k.is_all_infinity() { "" } else { "bounds the unrestricted count, hence also the restricted one" };
            Ok((solved(hn)?.value, true, note.to_string()))
        }
        BoundId::Ub3 => {
            let value = shapiro_from_capacity(solved(pinf)?);
            let note = if k.is_all_infinity() { "" } else { "computed for unbounded cells, an upper bound for the restricted count" };
            Ok((value, true, note.to_string()))
        }
        BoundId::Lb1 => {
            if !k.is_multigraphical() {
                return Ok((LogValue::ZERO, false, "requires cell bounds in {0, inf}".into()));
            }
            let value = solved(pk)?.value * barvinok_first_constant(marginals, k)?;
            let valid = m + n >= 10;
            let note = if valid { String::new() } else { "proved only for m + n >= 10".into() };
            Ok((value, valid, note))
        }
        BoundId::Lb2 => {
            let value = solved(hn)?.value * barvinok_second_constant(marginals);
            if k.is_all_infinity() {
                Ok((value, true, String::new()))
            } else {
                Ok((value, false, "proved only for unbounded cells".into()))
            }
        }
        BoundId::Newlb => {
            let cap = solved(pk)?.value;
            let f = new_lb_factors(marginals, k)?;
            let value = cap * LogValue::from_ln(f.pick(settings.orientation));
            let note = format!(
                "rows {} / cols {} / as stated {}",
                (cap * LogValue::from_ln(f.rows)).to_display(2),
                (cap * LogValue::from_ln(f.cols)).to_display(2),
                (cap * LogValue::from_ln(f.as_stated)).to_display(2)
            );
            Ok((value, true, note))
        }
        BoundId::GurvitsLb | BoundId::GurvitsUb => {
            if !k.is_graphical() {
                return Err(Error::NotGraphical);
            }
            let cap = solved(pk)?.value;
            if id == BoundId::GurvitsUb {
                return Ok((cap, true, String::new()));
            }
            let f = gurvits_factors(marginals, k)?;
            Ok((cap * LogValue::from_ln(f.pick(settings.orientation)), true, String::new()))
        }
        BoundId::Cti => Ok((independence_heuristic(marginals), false, "heuristic estimate, not a bound".into())),
        BoundId::NewlbBounded => {
            let b = new_lower_bound_bounded_marginals(marginals, settings.solver)?;
            Ok((b.value, true, format!("c = {}, guaranteed ratio {}", b.c, b.guaranteed_ratio.to_display(2))))
        }
    }
}

/// The six closed forms for `m` rows of sum `s` and `n` columns of sum `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformBounds {
    pub ub1: LogValue,
    pub ub2: LogValue,
    pub ub3: LogValue,
    pub newlb: LogValue,
    pub lb2: LogValue,
    pub lb1: LogValue,
    /// Whether `m + n >= 10`, the regime where `lb1` is proved.
    pub lb1_valid: bool,
}

impl UniformBounds {
    pub fn get(&self, id: BoundId) -> Option<LogValue> {
        match id {
            BoundId::Ub1 => Some(self.ub1),
            BoundId::Ub2 => Some(self.ub2),
            BoundId::Ub3 => Some(self.ub3),
            BoundId::Newlb => Some(self.newlb),
            BoundId::Lb2 => Some(self.lb2),
            BoundId::Lb1 => Some(self.lb1),
            _ => None,
        }
    }
}

/// Closed forms for uniform marginals, no solver involved. The instance is
/// transposed if needed so that `m <= n`.
pub fn uniform_bounds_closed_form(m: u64, n: u64, s: u64, t: u64) -> Result<UniformBounds> {
    if m * s != n * t {
        return Err(Error::MarginalsMismatch { row_sum: m * s, col_sum: n * t });
    }
    let (m, n, s, t) = if m <= n { (m, n, s, t) } else { (n, m, t, s) };
    let (mf, nf, sf, tf) = (m as f64, n as f64, s as f64, t as f64);
    let big_n = mf * sf;
    let p = mf * nf;
    let ub1 = xlogx(big_n + p) - xlogx(big_n) - xlogx(p);
    let ub2 = ln_binom(big_n + p - 1.0, big_n);
    let row_pf = mf * (xlogx(sf) - ln_factorial(sf));
    let col_pf = nf * (xlogx(tf) - ln_factorial(tf));
    let lb2 = ub2 - ln_binom(big_n + mf - 1.0, mf - 1.0) - ln_binom(big_n + nf - 1.0, nf - 1.0) + ln_factorial(big_n)
        - xlogx(big_n)
        + row_pf.max(col_pf);
    let ub3 = ub1 - (mf + nf - 1.0) * (big_n / p).ln_1p();
    let newlb = ub1 + (mf - 1.0) * ln_marginal_ratio(sf) + nf * ln_marginal_ratio(tf);
    let pi = std::f64::consts::PI;
    let lb1 = (mf + nf - 2.0) * 2f64.ln() + ln_gamma_fn((mf + nf) / 2.0) + ln_factorial(big_n) + ln_factorial(big_n + p)
        + mf * xlogx(sf)
        + nf * xlogx(tf)
        - 5.0
        - (mf + nf - 2.0) / 2.0 * pi.ln()
        - (mf + nf) * (big_n + p).ln()
        - (mf + nf - 1.0) * (big_n + 1.0).ln()
        - 2.0 * xlogx(big_n)
        - (2.0 * mf + 2.0 * nf - 1.0) * p.ln()
        - ln_factorial(p)
        - mf * ln_factorial(sf)
        - nf * ln_factorial(tf);
    Ok(UniformBounds {
        ub1: LogValue::from_ln(ub1),
        ub2: LogValue::from_ln(ub2),
        ub3: LogValue::from_ln(ub3),
        newlb: LogValue::from_ln(newlb),
        lb2: LogValue::from_ln(lb2),
        lb1: LogValue::from_ln(lb1),
        lb1_valid: m + n >= 10,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marginal_factor_examples() {
        assert_eq!(marginal_factor(0, Cap::Inf).unwrap().ln(), 0.0);
        assert!((marginal_factor(1, Cap::Inf).unwrap().ln() - 0.25f64.ln()).abs() < 1e-15);
        assert!(marginal_factor(3, Cap::Finite(2)).is_err());
        // b = min(a, cap - a)
        assert_eq!(marginal_factor(5, Cap::Finite(5)).unwrap().ln(), 0.0);
    }

    #[test]
    fn uniform_case_one_row() {
        let u = uniform_bounds_closed_form(3, 3, 100, 100).unwrap();
        assert_eq!(u.ub1.to_display(2), "4.7e17");
        assert_eq!(u.ub2.to_display(2), "1.8e15");
        assert_eq!(u.newlb.to_display(2), "3.1e5");
        assert_eq!(u.lb1.to_display(2), "1.5e-28");
        assert!(!u.lb1_valid);
    }

    #[test]
    fn independence_heuristic_two_by_two() {
        let marg = Marginals::new(vec![1, 1], vec![1, 1]).unwrap();
        assert!((independence_heuristic(&marg).to_f64() - 1.6).abs() < 1e-12);
    }

    #[test]
    fn spanning_tree_of_constant_matrix() {
        let z = TypicalMatrix { m: 2, n: 3, z: vec![1.0; 6] };
        assert!((max_spanning_tree_weight(&z) - 4.0 * 2f64.ln()).abs() < 1e-14);
    }
}
