#![allow(dead_code)]

use ctbounds::factor::FactorFamily;
use ctbounds::{Cap, CapMatrix, LogValue, Marginals};
use proptest::prelude::*;

pub fn marg(a: &[u64], b: &[u64]) -> Marginals {
    Marginals::new(a.to_vec(), b.to_vec()).unwrap()
}

/// `ln F(x, y) - alpha.u - beta.v` at `x = e^u`, `y = e^v`.
pub fn objective(m: &Marginals, factors: &[FactorFamily], u: &[f64], v: &[f64]) -> f64 {
    let n = m.n();
    let mut s = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        for (j, &vj) in v.iter().enumerate() {
            s += factors[i * n + j].log_g(ui + vj);
        }
    }
    s - m.alpha().iter().zip(u).map(|(&a, &x)| a as f64 * x).sum::<f64>()
        - m.beta().iter().zip(v).map(|(&b, &y)| b as f64 * y).sum::<f64>()
}

/// `a <= b` up to a relative slack in log space.
pub fn le(a: LogValue, b: LogValue) -> bool {
    if a.is_zero() || b == LogValue::INFINITY {
        return true;
    }
    if b.is_zero() {
        return false;
    }
    a.ln() <= b.ln() + 1e-7 * (1.0 + b.ln().abs())
}

/// Marginals with `m, n <= 3`, entries in `0..=5`, equal totals.
pub fn small_marginals() -> impl Strategy<Value = Marginals> {
    (1usize..=3, 1usize..=3)
        .prop_flat_map(|(m, n)| (prop::collection::vec(0u64..=5, m), prop::collection::vec(0u64..=5, n)))
        .prop_filter_map("totals differ", |(a, b)| Marginals::new(a, b).ok())
}

pub fn caps_for(m: usize, n: usize) -> impl Strategy<Value = CapMatrix> {
    prop_oneof![
        Just(CapMatrix::infinite(m, n)),
        Just(CapMatrix::ones(m, n)),
        prop::collection::vec(0u64..=3, m * n)
            .prop_map(move |v| CapMatrix::from_finite(&v.chunks(n).map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()),
        prop::collection::vec(prop::option::of(0u64..=3), m * n).prop_map(move |v| {
            let rows = v.chunks(n).map(|r| r.iter().map(|c| c.map_or(Cap::Inf, Cap::Finite)).collect()).collect();
            CapMatrix::from_rows(rows).unwrap()
        }),
    ]
}

pub fn instance() -> impl Strategy<Value = (Marginals, CapMatrix)> {
    small_marginals().prop_flat_map(|m| {
        let (r, c) = (m.m(), m.n());
        (Just(m), caps_for(r, c))
    })
}
