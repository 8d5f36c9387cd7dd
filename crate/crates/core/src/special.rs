//! Log-domain combinatorial helpers.

use statrs::function::gamma::ln_gamma;

/// `x ln x` with `0 ln 0 = 0`.
pub fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `ln(x!)` for real `x >= 0`.
pub fn ln_factorial(x: f64) -> f64 {
    if x < 2.0 && (x == 0.0 || x == 1.0) {
        0.0
    } else {
        ln_gamma(x + 1.0)
    }
}

/// `ln binom(a, b)`; `-inf` when `b < 0` or `b > a`.
pub fn ln_binom(a: f64, b: f64) -> f64 {
    if b < 0.0 || b > a {
        return f64::NEG_INFINITY;
    }
    ln_factorial(a) - ln_factorial(b) - ln_factorial(a - b)
}

pub fn ln_gamma_fn(x: f64) -> f64 {
    ln_gamma(x)
}

/// `ln(b^b / (b+1)^(b+1))`.
pub fn ln_marginal_ratio(b: f64) -> f64 {
    xlogx(b) - xlogx(b + 1.0)
}

/// `log(exp(a) + exp(b))` without overflow.
pub fn logaddexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Log-sum-exp of a slice.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi.is_infinite() {
        return hi;
    }
    hi + xs.iter().map(|x| (x - hi).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials_and_binomials() {
        assert!((ln_factorial(10.0) - 3628800f64.ln()).abs() < 1e-12);
        assert!((ln_binom(5.0, 2.0) - 10f64.ln()).abs() < 1e-13);
        assert_eq!(ln_binom(3.0, 4.0), f64::NEG_INFINITY);
    }

    #[test]
    fn ln_gamma_large_argument_relative_accuracy() {
        // Stirling series with three correction terms is exact to double precision here.
        let x: f64 = 1.0e7;
        let stirling = (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x.powi(3));
        assert!(((ln_gamma(x) - stirling) / stirling).abs() < 1e-13);
    }
}
