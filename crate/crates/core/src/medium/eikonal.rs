//! First-arrival travel times on a 2D grid by first-order upwind fast sweeping
//! on the multiplicatively factored eikonal equation.
//!
//! Nodes within two cells of the source are initialized analytically with the
//! velocity at the source and held fixed; the rest are relaxed by alternating
//! Gauss-Seidel sweeps until no node changes by more than [`SWEEP_TOLERANCE`].
//! Factoring out `|x − xs|/c(xs)` removes the point-source singularity, so the
//! error is first order everywhere rather than only far from the source.

use super::model::{distance, Position, VelocityGrid};
use crate::error::{AwiError, Result};

/// Convergence threshold on the largest per-sweep update, seconds.
pub const SWEEP_TOLERANCE: f64 = 1e-9;

/// Half-width, in nodes, of the analytically initialized source neighborhood.
pub const SOURCE_RADIUS: usize = 2;

const MAX_ITERATIONS: usize = 500;

#[derive(Debug, Clone)]
pub struct TravelTimeField {
    pub times: Vec<f64>,
    pub source: Position,
    grid: VelocityGrid,
    fixed: Vec<bool>,
    pub iterations: usize,
}

impl TravelTimeField {
    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.times[j * self.grid.nx + i]
    }

    /// Whether node `(i, j)` was initialized analytically.
    pub fn is_source_node(&self, i: usize, j: usize) -> bool {
        self.fixed[j * self.grid.nx + i]
    }

    /// Bilinear interpolation of the travel time at `p`.
    pub fn time_at(&self, p: Position) -> Result<f64> {
        if !self.grid.contains(p) {
            return Err(AwiError::Domain(format!("point {p:?} lies outside the grid")));
        }
        Ok(self.grid.interpolate(&self.times, p))
    }

    /// Largest `| |∇τ|·c − 1 |` over nodes more than `skip` cells from the
    /// source. The gradient is the factored upwind one, `u∇τ0 + τ0∇u` with
    /// `u = τ/τ0` differenced toward the earlier neighbor on each axis.
    pub fn upwind_residual(&self, skip: usize) -> f64 {
        let g = &self.grid;
        let (si, sj) = nearest_node(g, self.source);
        let h = g.spacing;
        let c_src = g.velocity_at(self.source);
        let tau0 = |i: usize, j: usize| distance(g.node(i, j), self.source) / c_src;
        let u = |i: usize, j: usize| self.at(i, j) / tau0(i, j);
        let mut worst: f64 = 0.0;
        for j in 0..g.nz {
            for i in 0..g.nx {
                if i.abs_diff(si) <= skip && j.abs_diff(sj) <= skip {
                    continue;
                }
                let x = g.node(i, j);
                let t0 = tau0(i, j);
                let uc = u(i, j);
                let axis_grad = |lo: Option<(usize, usize)>, hi: Option<(usize, usize)>, d: f64| {
                    let p0 = d / (t0 * c_src * c_src);
                    let pick = match (lo, hi) {
                        (Some(a), Some(b)) => {
                            if self.at(a.0, a.1) <= self.at(b.0, b.1) {
                                (a, -1.0)
                            } else {
                                (b, 1.0)
                            }
                        }
                        (Some(a), None) => (a, -1.0),
                        (None, Some(b)) => (b, 1.0),
                        (None, None) => return p0 * uc,
                    };
                    let ((ni, nj), side) = pick;
                    let du = side * (u(ni, nj) - uc) / h;
                    p0 * uc + t0 * du
                };
                let gx = axis_grad(
                    i.checked_sub(1).map(|ii| (ii, j)),
                    (i + 1 < g.nx).then_some((i + 1, j)),
                    x[0] - self.source[0],
                );
                let gz = axis_grad(
                    j.checked_sub(1).map(|jj| (i, jj)),
                    (j + 1 < g.nz).then_some((i, j + 1)),
                    x[1] - self.source[1],
                );
                worst = worst.max((gx.hypot(gz) * g.at(i, j) - 1.0).abs());
            }
        }
        worst
    }
}

fn nearest_node(g: &VelocityGrid, p: Position) -> (usize, usize) {
    let (fx, fz) = g.locate(p);
    (fx.round() as usize, fz.round() as usize)
}

/// Factored upwind update for one node. The travel time is written `τ = τ0·u`
/// with `τ0 = |x − xs|/c(xs)`, so `u` is smooth at the source. Each admissible
/// stencil (one x-neighbor and/or one z-neighbor) gives a quadratic in `u`; roots
/// whose one-sided gradients point away from the chosen neighbors are discarded.
struct Stencil {
    /// `τ0` and `∇τ0` at the node.
    tau0: f64,
    p0: [f64; 2],
    /// Neighbor `u` values: `[x−, x+]` and `[z−, z+]` (∞ if absent).
    nx: [f64; 2],
    nz: [f64; 2],
    h: f64,
    slowness: f64,
}

impl Stencil {
    /// Coefficients `(A, B)` of `τ_axis = A u + B` using the neighbor on `side`.
    fn coeffs(&self, axis: usize, side: usize, un: f64) -> (f64, f64) {
        let q = self.tau0 / self.h;
        if side == 0 {
            (self.p0[axis] + q, -q * un)
        } else {
            (self.p0[axis] - q, q * un)
        }
    }

    fn causal(d: f64, side: usize) -> bool {
        if side == 0 {
            d >= 0.0
        } else {
            d <= 0.0
        }
    }

    fn solve(&self) -> f64 {
        let mut best = f64::INFINITY;
        let s2 = self.slowness * self.slowness;
        let mut consider = |terms: &[(usize, usize, f64)]| {
            let (mut qa, mut qb, mut qc) = (0.0, 0.0, -s2);
            let mut ab = [(0.0, 0.0); 2];
            for (k, &(axis, side, un)) in terms.iter().enumerate() {
                let (a, b) = self.coeffs(axis, side, un);
                ab[k] = (a, b);
                qa += a * a;
                qb += 2.0 * a * b;
                qc += b * b;
            }
            let disc = qb * qb - 4.0 * qa * qc;
            if qa <= 0.0 || disc < 0.0 {
                return;
            }
            let sq = disc.sqrt();
            for u in [(-qb + sq) / (2.0 * qa), (-qb - sq) / (2.0 * qa)] {
                if !(u > 0.0) {
                    continue;
                }
                let ok = terms
                    .iter()
                    .zip(&ab)
                    .all(|(&(_, side, _), &(a, b))| Stencil::causal(a * u + b, side));
                if ok && u < best {
                    best = u;
                }
            }
        };
        for sx in 0..2 {
            let ux = self.nx[sx];
            if !ux.is_finite() {
                continue;
            }
            consider(&[(0, sx, ux)]);
            for sz in 0..2 {
                let uz = self.nz[sz];
                if uz.is_finite() {
                    consider(&[(0, sx, ux), (1, sz, uz)]);
                }
            }
        }
        for sz in 0..2 {
            let uz = self.nz[sz];
            if uz.is_finite() {
                consider(&[(1, sz, uz)]);
            }
        }
        best
    }
}

pub fn eikonal_solve(grid: &VelocityGrid, source: Position) -> Result<TravelTimeField> {
    if !grid.contains(source) {
        return Err(AwiError::Domain(format!("source {source:?} lies outside the grid")));
    }
    let (nx, nz) = (grid.nx, grid.nz);
    let h = grid.spacing;
    let c_src = grid.velocity_at(source);
    let n = nx * nz;
    let mut tau0 = vec![0.0; n];
    let mut p0 = vec![[0.0; 2]; n];
    for j in 0..nz {
        for i in 0..nx {
            let x = grid.node(i, j);
            let r = distance(x, source);
            tau0[j * nx + i] = r / c_src;
            if r > 0.0 {
                p0[j * nx + i] = [(x[0] - source[0]) / (r * c_src), (x[1] - source[1]) / (r * c_src)];
            }
        }
    }
    let mut u = vec![f64::INFINITY; n];
    let mut fixed = vec![false; n];
    let (si, sj) = nearest_node(grid, source);
    let rad = SOURCE_RADIUS;
    for j in sj.saturating_sub(rad)..=(sj + rad).min(nz - 1) {
        for i in si.saturating_sub(rad)..=(si + rad).min(nx - 1) {
            u[j * nx + i] = 1.0;
            fixed[j * nx + i] = true;
        }
    }
    let slowness: Vec<f64> = grid.velocities().iter().map(|c| 1.0 / c).collect();

    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut max_change: f64 = 0.0;
        for (rev_i, rev_j) in [(false, false), (true, false), (true, true), (false, true)] {
            for jj in 0..nz {
                let j = if rev_j { nz - 1 - jj } else { jj };
                for ii in 0..nx {
                    let i = if rev_i { nx - 1 - ii } else { ii };
                    let k = j * nx + i;
                    if fixed[k] {
                        continue;
                    }
                    let get = |cond: bool, idx: usize| if cond { u[idx] } else { f64::INFINITY };
                    let st = Stencil {
                        tau0: tau0[k],
                        p0: p0[k],
                        nx: [get(i > 0, k.wrapping_sub(1)), get(i + 1 < nx, k + 1)],
                        nz: [get(j > 0, k.wrapping_sub(nx)), get(j + 1 < nz, k + nx)],
                        h,
                        slowness: slowness[k],
                    };
                    let cand = st.solve();
                    if cand < u[k] {
                        let change =
                            if u[k].is_finite() { (u[k] - cand) * tau0[k] } else { f64::INFINITY };
                        max_change = max_change.max(change);
                        u[k] = cand;
                    }
                }
            }
        }
        if max_change <= SWEEP_TOLERANCE {
            break;
        }
        if iterations >= MAX_ITERATIONS {
            return Err(AwiError::Numerical(format!(
                "fast sweeping did not converge in {MAX_ITERATIONS} iterations (last change {max_change:e} s)"
            )));
        }
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Err(AwiError::Numerical("fast sweeping left unreached nodes".into()));
    }
    let times = u.iter().zip(&tau0).map(|(u, t)| u * t).collect();
    Ok(TravelTimeField { times, source, grid: grid.clone(), fixed, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_medium_is_reproduced_exactly() {
        let g = VelocityGrid::from_fn(41, 41, 5.0, [0.0, 0.0], |_| 1500.0).unwrap();
        let f = eikonal_solve(&g, [52.0, 101.0]).unwrap();
        for j in 0..41 {
            for i in 0..41 {
                let exact = distance(g.node(i, j), [52.0, 101.0]) / 1500.0;
                assert!((f.at(i, j) - exact).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_medium_is_monotone_along_rays() {
        let g = VelocityGrid::from_fn(61, 61, 10.0, [0.0, 0.0], |_| 2000.0).unwrap();
        let f = eikonal_solve(&g, [300.0, 300.0]).unwrap();
        for i in 31..60 {
            assert!(f.at(i + 1, 30) > f.at(i, 30));
            assert!(f.at(i + 1, i + 1) > f.at(i, i));
        }
        assert!(f.times.iter().all(|t| *t >= 0.0));
        assert!(f.at(30, 30) <= 10.0 / 2000.0);
    }

    #[test]
    fn source_outside_grid_is_rejected() {
        let g = VelocityGrid::from_fn(5, 5, 1.0, [0.0, 0.0], |_| 1.0).unwrap();
        assert!(matches!(eikonal_solve(&g, [10.0, 0.0]), Err(AwiError::Domain(_))));
    }
}
