//! Damped Newton minimisation of a gauge-invariant convex objective
//! `phi(u, v)` with `phi(u + c, v - c) = phi(u, v)`.

use nalgebra::{DMatrix, DVector};

/// Objective in log coordinates. The gradient is the marginal mismatch
/// (row block, column block).
pub(crate) trait Objective: Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;

    /// `+inf` outside the domain.
    fn value(&self, u: &[f64], v: &[f64]) -> f64;

    fn gradient(&self, u: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>);

    /// Full `(rows + cols)`-square Hessian. The default uses central
    /// differences of the analytic gradient.
    fn hessian(&self, u: &[f64], v: &[f64]) -> DMatrix<f64> {
        let (r, c) = (self.rows(), self.cols());
        let dim = r + c;
        let mut h = DMatrix::zeros(dim, dim);
        let mut x: Vec<f64> = u.iter().chain(v.iter()).cloned().collect();
        for q in 0..dim {
            let step = 1e-5 * (1.0 + x[q].abs());
            let orig = x[q];
            x[q] = orig + step;
            let (pr, pc) = self.gradient(&x[..r], &x[r..]);
            x[q] = orig - step;
            let (mr, mc) = self.gradient(&x[..r], &x[r..]);
            x[q] = orig;
            for (p, (a, b)) in pr.iter().chain(pc.iter()).zip(mr.iter().chain(mc.iter())).enumerate() {
                h[(p, q)] = (a - b) / (2.0 * step);
            }
        }
        (&h + h.transpose()) * 0.5
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

const ARMIJO: f64 = 1e-4;
const MAX_CONDITION: f64 = 1e12;

fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter().chain(b.iter()).fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Minimises `obj` from `(u0, v0)` with `u[0]` pinned. Stops when the
/// infinity norm of the gradient is at most `tol`.
pub(crate) fn minimize<O: Objective>(obj: &O, u0: Vec<f64>, v0: Vec<f64>, tol: f64, max_iter: usize) -> Outcome {
    let r = obj.rows();
    let mut u = u0;
    let mut v = v0;
    let mut value = obj.value(&u, &v);
    let (mut gr, mut gc) = obj.gradient(&u, &v);
    let mut residual = max_abs(&gr, &gc);
    let mut iterations = 0;
    while residual > tol && iterations < max_iter && value.is_finite() {
        iterations += 1;
        let g = DVector::from_iterator(r + gc.len() - 1, gr[1..].iter().chain(gc.iter()).cloned());
        let h_full = obj.hessian(&u, &v);
        let h = h_full.remove_row(0).remove_column(0);

        let newton = newton_direction(&h, &g);
        let gradient_dir = scaled_gradient(&h, &g);
        let mut accepted = false;
        for dir in newton.iter().chain(std::iter::once(&gradient_dir)) {
            let slope = g.dot(dir);
            if slope >= 0.0 {
                continue;
            }
            if let Some((nu, nv, nval)) = line_search(obj, &u, &v, value, dir, slope) {
                u = nu;
                v = nv;
                value = nval;
                accepted = true;
                break;
            }
        }
        if !accepted {
            // At the precision floor the objective no longer resolves the
            // decrease; take the Newton step if it shrinks the gradient.
            let Some(dir) = newton else { break };
            let (nu, nv) = step(&u, &v, &dir, 1.0);
            let nval = obj.value(&nu, &nv);
            if !nval.is_finite() {
                break;
            }
            let (ngr, ngc) = obj.gradient(&nu, &nv);
            if max_abs(&ngr, &ngc) >= residual {
                break;
            }
            u = nu;
            v = nv;
            value = nval;
        }
        let (ngr, ngc) = obj.gradient(&u, &v);
        gr = ngr;
        gc = ngc;
        residual = max_abs(&gr, &gc);
    }
    Outcome { u, v, value, residual, iterations, converged: residual <= tol && value.is_finite() }
}

fn newton_direction(h: &DMatrix<f64>, g: &DVector<f64>) -> Option<DVector<f64>> {
    let chol = h.clone().cholesky()?;
    let l = chol.l_dirty();
    let diag: Vec<f64> = (0..l.nrows()).map(|i| l[(i, i)]).collect();
    let hi = diag.iter().cloned().fold(0.0, f64::max);
    let lo = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if lo <= 0.0 || (hi / lo).powi(2) > MAX_CONDITION {
        return None;
    }
    let d = chol.solve(&(-g));
    d.iter().all(|x| x.is_finite()).then_some(d)
}

fn scaled_gradient(h: &DMatrix<f64>, g: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(
        g.len(),
        g.iter().enumerate().map(|(i, gi)| {
            let d = h[(i, i)];
            -gi / if d > 1e-300 { d } else { 1.0 }
        }),
    )
}

fn step(u: &[f64], v: &[f64], dir: &DVector<f64>, t: f64) -> (Vec<f64>, Vec<f64>) {
    let r = u.len();
    let mut nu = u.to_vec();
    for i in 1..r {
        nu[i] += t * dir[i - 1];
    }
    let nv = v.iter().enumerate().map(|(j, x)| x + t * dir[r - 1 + j]).collect();
    (nu, nv)
}

fn line_search<O: Objective>(
    obj: &O,
    u: &[f64],
    v: &[f64],
    value: f64,
    dir: &DVector<f64>,
    slope: f64,
) -> Option<(Vec<f64>, Vec<f64>, f64)> {
    let slack = 1e-14 * value.abs().max(1.0);
    let mut t = 1.0;
    while t > 1e-20 {
        let (nu, nv) = step(u, v, dir, t);
        let nval = obj.value(&nu, &nv);
        if nval.is_finite() && nval <= value + ARMIJO * t * slope + slack {
            return Some((nu, nv, nval));
        }
        t *= 0.5;
    }
    None
}
