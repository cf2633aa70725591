use crate::error::{AwiError, Result};

pub(crate) struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Preconditioned conjugate gradients for a symmetric positive definite operator.
/// Stops when `‖b − Ax‖ ≤ tol·‖b‖`.
pub(crate) fn pcg(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    precond: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    x0: Option<Vec<f64>>,
    tol: f64,
    max_iter: usize,
) -> Result<CgOutcome> {
    let b_norm = dot(b, b).sqrt();
    let mut x = x0.unwrap_or_else(|| vec![0.0; b.len()]);
    if b_norm == 0.0 {
        return Ok(CgOutcome { x: vec![0.0; b.len()], iterations: 0 });
    }
    let ax = apply(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut rel = dot(&r, &r).sqrt() / b_norm;
    if rel <= tol {
        return Ok(CgOutcome { x, iterations: 0 });
    }
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 1..=max_iter {
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(AwiError::Numerical(format!(
                "conjugate gradients lost positive definiteness at iteration {it} (pAp = {pap:e})"
            )));
        }
        let alpha = rz / pap;
        for ((xi, pi), (ri, api)) in x.iter_mut().zip(&p).zip(r.iter_mut().zip(&ap)) {
            *xi += alpha * pi;
            *ri -= alpha * api;
        }
        rel = dot(&r, &r).sqrt() / b_norm;
        if rel <= tol {
            return Ok(CgOutcome { x, iterations: it });
        }
        z = precond(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Err(AwiError::Numerical(format!(
        "conjugate gradients did not reach relative residual {tol:e} in {max_iter} iterations (last {rel:e})"
    )))
}
