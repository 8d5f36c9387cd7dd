//! Probability that a random table with independent entries has the given
//! marginals.

use serde::{Deserialize, Serialize};

use crate::bounds::{gurvits_factors, Orientation};
use crate::capacity::{solve_capacity, CapacityProblem, SolverSettings};
use crate::error::{Error, Result};
use crate::feasibility::feasible;
use crate::logvalue::LogValue;
use crate::special::{ln_factorial, xlogx};
use crate::table::{CapMatrix, Marginals};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Distribution {
    /// Entry `(i, j)` is binomial on `{0..k_ij}` with parameter `s`.
    Binomial { s: f64 },
    /// Entries are Poisson with rate `s`.
    Poisson { s: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSpec {
    pub kind: Distribution,
    /// Cell bounds; must be finite for the binomial case, ignored for Poisson.
    pub k: CapMatrix,
}

impl DistributionSpec {
    pub fn binomial(k: CapMatrix, s: f64) -> Result<DistributionSpec> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidInput(format!("binomial parameter must lie in [0, 1], got {s}")));
        }
        if !k.is_finite() {
            return Err(Error::KInfinite);
        }
        Ok(DistributionSpec { kind: Distribution::Binomial { s }, k })
    }

    pub fn poisson(m: usize, n: usize, s: f64) -> Result<DistributionSpec> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidInput(format!("Poisson rate must be positive, got {s}")));
        }
        Ok(DistributionSpec { kind: Distribution::Poisson { s }, k: CapMatrix::infinite(m, n) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityBounds {
    pub lb: LogValue,
    pub ub: LogValue,
}

impl ProbabilityBounds {
    fn point(v: LogValue) -> ProbabilityBounds {
        ProbabilityBounds { lb: v, ub: v }
    }
}

fn binomial_parameter(spec: &DistributionSpec) -> Result<f64> {
    match spec.kind {
        Distribution::Binomial { s } => Ok(s),
        Distribution::Poisson { .. } => Err(Error::InvalidInput("expected a binomial distribution".into())),
    }
}

/// Degenerate parameters put all mass on one table.
fn point_mass(marginals: &Marginals, k: &CapMatrix, s: f64) -> Option<LogValue> {
    let hit = if s == 0.0 {
        marginals.total() == 0
    } else if s == 1.0 {
        marginals.alpha().iter().zip(k.lambda()).all(|(&a, c)| c.finite() == Some(a))
            && marginals.beta().iter().zip(k.gamma()).all(|(&b, c)| c.finite() == Some(b))
    } else {
        return None;
    };
    Some(if hit { LogValue::ONE } else { LogValue::ZERO })
}

/// Upper bound `cpc(Q_{K,s})` and the matching lower bound.
pub fn binomial_marginal_bounds(
    marginals: &Marginals,
    spec: &DistributionSpec,
    orientation: Orientation,
    settings: SolverSettings,
) -> Result<ProbabilityBounds> {
    let s = binomial_parameter(spec)?;
    let k = &spec.k;
    k.check_shape(marginals)?;
    if !k.is_finite() {
        return Err(Error::KInfinite);
    }
    if let Some(v) = point_mass(marginals, k, s) {
        return Ok(ProbabilityBounds::point(v));
    }
    if !feasible(marginals, k) {
        return Ok(ProbabilityBounds::point(LogValue::ZERO));
    }
    let ub = solve_capacity(&CapacityProblem::binomial(marginals, k, s)?.with_settings(settings))?.value;
    let factor = gurvits_factors(marginals, k)?.pick(orientation);
    Ok(ProbabilityBounds { lb: ub * LogValue::from_ln(factor), ub })
}

/// `ln` of the product maximised over real tables `M`, evaluated at `M`.
pub fn binomial_typical_objective(k: &CapMatrix, s: f64, m: &[f64]) -> f64 {
    k.entries()
        .iter()
        .zip(m)
        .map(|(c, &x)| {
            let kk = c.finite().expect("finite K") as f64;
            let rest = (kk - x).max(0.0);
            let mut v = xlogx(kk) - xlogx(x) - xlogx(rest);
            if x > 0.0 {
                v += x * s.ln();
            }
            if rest > 0.0 {
                v += rest * (1.0 - s).ln();
            }
            v
        })
        .sum()
}

/// `cpc(Q_{K,s})` written as a supremum over real tables, evaluated at the
/// solver's typical matrix.
pub fn binomial_capacity_via_typical(marginals: &Marginals, spec: &DistributionSpec, settings: SolverSettings) -> Result<LogValue> {
    let s = binomial_parameter(spec)?;
    let k = &spec.k;
    k.check_shape(marginals)?;
    if !k.is_finite() {
        return Err(Error::KInfinite);
    }
    if let Some(v) = point_mass(marginals, k, s) {
        return Ok(v);
    }
    if !feasible(marginals, k) {
        return Ok(LogValue::ZERO);
    }
    let cap = solve_capacity(&CapacityProblem::binomial(marginals, k, s)?.with_settings(settings))?;
    Ok(LogValue::from_ln(binomial_typical_objective(k, s, &cap.typical.z)))
}

/// Closed-form bounds for Poisson entries with rate `s`.
pub fn poisson_marginal_bounds(marginals: &Marginals, s: f64) -> Result<ProbabilityBounds> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidInput(format!("Poisson rate must be positive, got {s}")));
    }
    let big_n = marginals.total() as f64;
    let cells = (marginals.m() * marginals.n()) as f64;
    let head = if big_n > 0.0 { big_n * (s * big_n).ln() } else { 0.0 } - s * cells;
    let all = || marginals.alpha().iter().chain(marginals.beta()).map(|&a| a as f64);
    let ub = head + big_n - all().map(xlogx).sum::<f64>();
    let lb = head - big_n - all().map(ln_factorial).sum::<f64>();
    Ok(ProbabilityBounds { lb: LogValue::from_ln(lb), ub: LogValue::from_ln(ub) })
}

/// Dispatches on the distribution kind.
pub fn marginal_probability_bounds(
    marginals: &Marginals,
    spec: &DistributionSpec,
    orientation: Orientation,
    settings: SolverSettings,
) -> Result<ProbabilityBounds> {
    match spec.kind {
        Distribution::Binomial { .. } => binomial_marginal_bounds(marginals, spec, orientation, settings),
        Distribution::Poisson { s } => poisson_marginal_bounds(marginals, s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn marg(a: &[u64], b: &[u64]) -> Marginals {
        Marginals::new(a.to_vec(), b.to_vec()).unwrap()
    }

    #[test]
    fn binomial_two_by_two() {
        let spec = DistributionSpec::binomial(CapMatrix::ones(2, 2), 0.5).unwrap();
        let b = binomial_marginal_bounds(&marg(&[1, 1], &[1, 1]), &spec, Orientation::AsStated, SolverSettings::default()).unwrap();
        assert!(b.ub.ln().abs() < 1e-8);
        assert!((b.lb.ln() - (1.0f64 / 8.0).ln()).abs() < 1e-8);
    }

    #[test]
    fn degenerate_parameters() {
        let spec = DistributionSpec::binomial(CapMatrix::ones(2, 2), 0.0).unwrap();
        let b = binomial_marginal_bounds(&marg(&[0, 0], &[0, 0]), &spec, Orientation::Best, SolverSettings::default()).unwrap();
        assert_eq!(b, ProbabilityBounds::point(LogValue::ONE));
        let spec = DistributionSpec::binomial(CapMatrix::ones(2, 2), 1.0).unwrap();
        let b = binomial_marginal_bounds(&marg(&[1, 1], &[1, 1]), &spec, Orientation::Best, SolverSettings::default()).unwrap();
        assert!(b.ub.is_zero());
    }

    #[test]
    fn poisson_examples() {
        let b = poisson_marginal_bounds(&marg(&[1, 1], &[1, 1]), 1.0).unwrap();
        assert!((b.lb.ln() - (4.0f64.ln() - 6.0)).abs() < 1e-12);
        assert!((b.ub.ln() - (4.0f64.ln() - 2.0)).abs() < 1e-12);
        let b = poisson_marginal_bounds(&marg(&[0], &[0, 0]), 0.5).unwrap();
        assert!((b.lb.ln() + 1.0).abs() < 1e-15 && (b.ub.ln() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn typical_reformulation() {
        let spec = DistributionSpec::binomial(CapMatrix::from_finite(&[vec![2, 2], vec![2, 2]]).unwrap(), 0.5).unwrap();
        let m = marg(&[2, 2], &[2, 2]);
        let v = binomial_capacity_via_typical(&m, &spec, SolverSettings::default()).unwrap();
        let cap = solve_capacity(&CapacityProblem::binomial(&m, &spec.k, 0.5).unwrap()).unwrap();
        assert!((v.ln() - cap.value.ln()).abs() < 1e-7);
    }
}
