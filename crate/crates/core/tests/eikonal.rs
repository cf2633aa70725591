use awi_core::medium::{
    distance, eikonal_solve, gradient_travel_time, travel_time, Axis, MediumModel, Position,
    TravelTimeField, VelocityGrid,
};

/// Largest relative error over nodes outside the analytic source neighborhood.
fn max_rel_error(field: &TravelTimeField, oracle: impl Fn(Position) -> f64) -> f64 {
    let g = field.grid();
    let mut worst: f64 = 0.0;
    for j in 0..g.nz {
        for i in 0..g.nx {
            if field.is_source_node(i, j) {
                continue;
            }
            let exact = oracle(g.node(i, j));
            worst = worst.max((field.at(i, j) - exact).abs() / exact);
        }
    }
    worst
}

fn constant_error(n: usize) -> f64 {
    let h = 2000.0 / (n - 1) as f64;
    let g = VelocityGrid::from_fn(n, n, h, [0.0, 0.0], |_| 2000.0).unwrap();
    let src = [500.0, 700.0];
    let f = eikonal_solve(&g, src).unwrap();
    max_rel_error(&f, |p| distance(p, src) / 2000.0)
}

fn gradient_error(n: usize) -> f64 {
    let h = 2000.0 / (n - 1) as f64;
    let c = |p: Position| 1500.0 + 0.5 * p[1];
    let g = VelocityGrid::from_fn(n, n, h, [0.0, 0.0], c).unwrap();
    let src = [400.0, 300.0];
    let f = eikonal_solve(&g, src).unwrap();
    max_rel_error(&f, |p| gradient_travel_time(c(src), c(p), 0.5, distance(p, src)))
}

#[test]
fn constant_medium_within_one_percent() {
    let e = constant_error(201);
    eprintln!("constant 201² max rel error {e:.4e}");
    assert!(e <= 0.01, "{e}");
}

#[test]
fn gradient_medium_within_one_percent() {
    let e = gradient_error(201);
    eprintln!("gradient 201² max rel error {e:.4e}");
    assert!(e <= 0.01, "{e}");
}

#[test]
fn refinement_reduces_error() {
    // The factored scheme is exact for a constant medium, so only the
    // heterogeneous case has a discretization error to shrink.
    assert!(constant_error(401) <= 1e-10);
    let (coarse, fine) = (gradient_error(201), gradient_error(401));
    eprintln!("gradient: 201² {coarse:.4e}, 401² {fine:.4e}, ratio {:.3}", fine / coarse);
    assert!(fine <= 0.6 * coarse, "{fine} vs {coarse}");
}

#[test]
fn upwind_residual_is_small() {
    let c = |p: Position| 1500.0 + 0.5 * p[1];
    let g = VelocityGrid::from_fn(201, 201, 10.0, [0.0, 0.0], c).unwrap();
    let f = eikonal_solve(&g, [1000.0, 200.0]).unwrap();
    let r = f.upwind_residual(2);
    eprintln!("upwind residual {r:.4e}");
    assert!(r <= 0.05, "{r}");
}

#[test]
fn grid_travel_time_is_reciprocal_and_scales() {
    let c = |p: Position| 1800.0 + 0.3 * p[0] + 100.0 * (p[1] / 300.0).sin();
    let g = VelocityGrid::from_fn(121, 121, 10.0, [0.0, 0.0], c).unwrap();
    let m = MediumModel::grid(g);
    let (a, b) = ([105.0, 233.0], [1010.0, 870.0]);
    let tab = travel_time(&m, a, b).unwrap();
    let tba = travel_time(&m, b, a).unwrap();
    assert!((tab - tba).abs() <= 1e-6);
    let t2 = travel_time(&m.scaled(1.25).unwrap(), a, b).unwrap();
    assert!((t2 - tab / 1.25).abs() <= 1e-6 * tab);
}

/// Two-point ray shooting in `c = c0 + g z`: integrate the ray equations with
/// RK4 and bisect on the take-off angle until the ray reaches the receiver depth
/// at the receiver offset.
fn shoot(c0: f64, g: f64, xs: Position, xr: Position) -> f64 {
    let c = |z: f64| c0 + g * z;
    // State (x, z, px, pz, t); d/dσ with σ = travel time: dx/dt = c²p, dp/dt = −∇c/c.
    let rhs = |s: [f64; 5]| -> [f64; 5] {
        let v = c(s[1]);
        [v * v * s[2], v * v * s[3], 0.0, -g / v, 1.0]
    };
    let trace = |theta: f64| -> (f64, f64) {
        let v = c(xs[1]);
        let mut s = [xs[0], xs[1], theta.sin() / v, theta.cos() / v, 0.0];
        let dt = 1e-4;
        let target = xr[0];
        loop {
            let k1 = rhs(s);
            let add = |a: [f64; 5], b: [f64; 5], h: f64| {
                let mut o = a;
                for i in 0..5 {
                    o[i] += h * b[i];
                }
                o
            };
            let k2 = rhs(add(s, k1, dt / 2.0));
            let k3 = rhs(add(s, k2, dt / 2.0));
            let k4 = rhs(add(s, k3, dt));
            let mut next = s;
            for i in 0..5 {
                next[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            if next[0] >= target {
                // Linear interpolation to the receiver offset.
                let a = (target - s[0]) / (next[0] - s[0]);
                return (s[1] + a * (next[1] - s[1]), s[4] + a * (next[4] - s[4]));
            }
            s = next;
        }
    };
    // Angle measured from +z toward +x; with g > 0 the ray from equal depth dips up (−z).
    let (mut lo, mut hi) = (1e-3, std::f64::consts::PI - 1e-3);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let (z, _) = trace(mid);
        // Larger angle → ray heads more toward −z → arrives shallower.
        if z > xr[1] {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    trace(0.5 * (lo + hi)).1
}

#[test]
fn gradient_closed_form_matches_ray_shooting() {
    let m = MediumModel::linear_gradient(1500.0, 0.5, Axis::Z).unwrap();
    let (xs, xr) = ([0.0, 500.0], [2000.0, 500.0]);
    let t = travel_time(&m, xs, xr).unwrap();
    let oracle = shoot(1500.0, 0.5, xs, xr);
    assert!((t - oracle).abs() <= 1e-4, "{t} vs {oracle}");
}
