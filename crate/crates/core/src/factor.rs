//! Univariate log-convex cell factors `g(t)`, `t = u_i + v_j`.

use serde::{Deserialize, Serialize};

use crate::special::logaddexp;
use crate::table::Cap;

/// Cell factor of a generating function in log coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FactorFamily {
    /// `1 + e^t + ... + e^{kt}`.
    TruncatedGeometric { k: u64 },
    /// `1 / (1 - e^t)` for `t < 0`.
    Geometric,
    /// `(s e^t + 1 - s)^k`.
    Binomial { k: u64, s: f64 },
    /// `exp(s e^t - s)`.
    ExpPoisson { s: f64 },
    /// `(e^{kt} - 1) / t`, equal to `k` at `t = 0`.
    VolumeFinite { k: u64 },
    /// `-1 / t` for `t < 0`.
    VolumeInfinite,
}

/// Below this `|kt|` the volume factor switches to its Taylor expansion.
pub const VOLUME_TAYLOR_CUTOFF: f64 = 1e-4;

impl FactorFamily {
    /// Counting factor for a cell bound.
    pub fn counting(cap: Cap) -> FactorFamily {
        match cap {
            Cap::Finite(k) => FactorFamily::TruncatedGeometric { k },
            Cap::Inf => FactorFamily::Geometric,
        }
    }

    /// Volume factor for a cell bound.
    pub fn volume(cap: Cap) -> FactorFamily {
        match cap {
            Cap::Finite(k) => FactorFamily::VolumeFinite { k },
            Cap::Inf => FactorFamily::VolumeInfinite,
        }
    }

    /// Supremum of `mean`, i.e. the largest cell value the factor supports.
    pub fn cap(&self) -> Cap {
        match *self {
            FactorFamily::TruncatedGeometric { k }
            | FactorFamily::Binomial { k, .. }
            | FactorFamily::VolumeFinite { k } => Cap::Finite(k),
            FactorFamily::Geometric | FactorFamily::ExpPoisson { .. } | FactorFamily::VolumeInfinite => Cap::Inf,
        }
    }

    /// Whether the factor needs `t < 0`.
    pub fn needs_negative(&self) -> bool {
        matches!(self, FactorFamily::Geometric | FactorFamily::VolumeInfinite)
    }

    pub fn in_domain(&self, t: f64) -> bool {
        t.is_finite() && (!self.needs_negative() || t < 0.0)
    }

    pub fn is_volume(&self) -> bool {
        matches!(self, FactorFamily::VolumeFinite { .. } | FactorFamily::VolumeInfinite)
    }

    /// `log g(t)`, or `+inf` outside the domain.
    pub fn log_g(&self, t: f64) -> f64 {
        if !self.in_domain(t) {
            return f64::INFINITY;
        }
        match *self {
            FactorFamily::TruncatedGeometric { k } => log_trunc_geom(k, t),
            FactorFamily::Geometric => -(-t.exp_m1()).ln(),
            FactorFamily::Binomial { k, s } => k as f64 * logaddexp(s.ln() + t, (-s).ln_1p()),
            FactorFamily::ExpPoisson { s } => s * t.exp_m1(),
            FactorFamily::VolumeFinite { k } => volume_finite(k, t).0,
            FactorFamily::VolumeInfinite => -(-t).ln(),
        }
    }

    /// `d/dt log g(t)`: the typical cell value.
    pub fn mean(&self, t: f64) -> f64 {
        match *self {
            FactorFamily::TruncatedGeometric { k } => {
                let k1 = (k + 1) as f64;
                k1 * langevin(k1 * t) - langevin(t)
            }
            FactorFamily::Geometric => 1.0 / (-t).exp_m1(),
            FactorFamily::Binomial { k, s } => k as f64 * sigmoid(t + s.ln() - (-s).ln_1p()),
            FactorFamily::ExpPoisson { s } => s * t.exp(),
            FactorFamily::VolumeFinite { k } => volume_finite(k, t).1,
            FactorFamily::VolumeInfinite => -1.0 / t,
        }
    }

    /// `d^2/dt^2 log g(t)`.
    pub fn var(&self, t: f64) -> f64 {
        match *self {
            FactorFamily::TruncatedGeometric { k } => {
                let k1 = (k + 1) as f64;
                k1 * k1 * langevin_prime(k1 * t) - langevin_prime(t)
            }
            FactorFamily::Geometric => {
                let z = 1.0 / (-t).exp_m1();
                z * (1.0 + z)
            }
            FactorFamily::Binomial { k, s } => {
                let p = sigmoid(t + s.ln() - (-s).ln_1p());
                k as f64 * p * (1.0 - p)
            }
            FactorFamily::ExpPoisson { s } => s * t.exp(),
            FactorFamily::VolumeFinite { k } => {
                let kf = k as f64;
                kf * kf * langevin_prime(kf * t)
            }
            FactorFamily::VolumeInfinite => 1.0 / (t * t),
        }
    }

    /// `ln lim g(t)` as `t -> -inf`: the factor's contribution when the cell
    /// is pinned at 0. `None` when the limit does not exist as a constant.
    pub fn ln_limit_low(&self) -> Option<f64> {
        match *self {
            FactorFamily::TruncatedGeometric { .. } | FactorFamily::Geometric => Some(0.0),
            FactorFamily::Binomial { k, s } => Some(k as f64 * (-s).ln_1p()),
            FactorFamily::ExpPoisson { s } => Some(-s),
            FactorFamily::VolumeFinite { k: 0 } => Some(0.0),
            FactorFamily::VolumeFinite { .. } | FactorFamily::VolumeInfinite => None,
        }
    }

    /// `ln lim g(t) e^{-kt}` as `t -> +inf`: the contribution when the cell is
    /// pinned at its bound `k`.
    pub fn ln_limit_high(&self) -> Option<f64> {
        match *self {
            FactorFamily::TruncatedGeometric { .. } => Some(0.0),
            FactorFamily::Binomial { k, s } => Some(k as f64 * s.ln()),
            FactorFamily::VolumeFinite { k: 0 } => Some(0.0),
            _ => None,
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn log_trunc_geom(k: u64, t: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let k1 = (k + 1) as f64;
    if t == 0.0 {
        k1.ln()
    } else if t < 0.0 {
        (-(k1 * t).exp_m1()).ln() - (-t.exp_m1()).ln()
    } else {
        k as f64 * t + log_trunc_geom(k, -t)
    }
}

// Bernoulli-number coefficients of L(x) = 1/2 + sum c_i x^(2i-1).
const L_SERIES: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
];

/// `L(x) = 1/(1 - e^{-x}) - 1/x`, with `L(0) = 1/2`.
pub fn langevin(x: f64) -> f64 {
    if x.abs() < 0.5 {
        let x2 = x * x;
        let mut acc = 0.0;
        for c in L_SERIES.iter().rev() {
            acc = acc * x2 + c;
        }
        0.5 + x * acc
    } else {
        1.0 / (-(-x).exp_m1()) - 1.0 / x
    }
}

/// `L'(x) = 1/x^2 - 1/(4 sinh^2(x/2))`, with `L'(0) = 1/12`.
pub fn langevin_prime(x: f64) -> f64 {
    if x.abs() < 0.5 {
        let x2 = x * x;
        let mut acc = 0.0;
        for (i, c) in L_SERIES.iter().enumerate().rev() {
            acc = acc * x2 + c * (2 * i + 1) as f64;
        }
        acc
    } else if x.abs() > 40.0 {
        1.0 / (x * x)
    } else {
        let sh = (0.5 * x).sinh();
        1.0 / (x * x) - 1.0 / (4.0 * sh * sh)
    }
}

/// `(log g, d log g / dt)` for `g(t) = (e^{kt} - 1)/t`.
pub fn volume_finite(k: u64, t: f64) -> (f64, f64) {
    if k == 0 {
        return (f64::NEG_INFINITY, 0.0);
    }
    if (k as f64 * t).abs() < VOLUME_TAYLOR_CUTOFF {
        volume_finite_taylor(k, t)
    } else {
        volume_finite_direct(k, t)
    }
}

/// Four-term expansion around the removable singularity at `t = 0`.
pub fn volume_finite_taylor(k: u64, t: f64) -> (f64, f64) {
    let kf = k as f64;
    let x = kf * t;
    let x2 = x * x;
    let log_g = kf.ln() + x / 2.0 + x2 / 24.0 - x2 * x2 / 2880.0 + x2 * x2 * x2 / 181440.0;
    let mean = kf * (0.5 + x / 12.0 - x * x2 / 720.0 + x * x2 * x2 / 30240.0);
    (log_g, mean)
}

/// Closed-form evaluation, inaccurate near `t = 0`.
pub fn volume_finite_direct(k: u64, t: f64) -> (f64, f64) {
    let kf = k as f64;
    let x = kf * t;
    let log_g = if x > 0.0 { x + ((-(-x).exp_m1()) / x).ln() + kf.ln() } else { (x.exp_m1() / x).ln() + kf.ln() };
    let mean = kf * (1.0 / (-(-x).exp_m1()) - 1.0 / x);
    (log_g, mean)
}
