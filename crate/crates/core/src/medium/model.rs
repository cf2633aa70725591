use serde::{Deserialize, Serialize};

use crate::error::{AwiError, Result};

/// A point `(x, z)` in meters.
pub type Position = [f64; 2];

pub fn distance(a: Position, b: Position) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Z,
}

impl Axis {
    fn coord(self, p: Position) -> f64 {
        match self {
            Axis::X => p[0],
            Axis::Z => p[1],
        }
    }
}

/// Velocities on a regular 2D grid, row-major with `x` varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityGrid {
    pub nx: usize,
    pub nz: usize,
    pub spacing: f64,
    pub origin: Position,
    velocity: Vec<f64>,
    c_min: f64,
    c_max: f64,
}

impl VelocityGrid {
    pub fn new(nx: usize, nz: usize, spacing: f64, origin: Position, velocity: Vec<f64>) -> Result<Self> {
        if nx < 3 || nz < 3 {
            return Err(AwiError::InvalidModel(format!("grid {nx}x{nz} is smaller than 3x3")));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(AwiError::InvalidModel(format!("grid spacing must be positive, got {spacing}")));
        }
        if velocity.len() != nx * nz {
            return Err(AwiError::InvalidModel(format!(
                "expected {} velocities, found {}",
                nx * nz,
                velocity.len()
            )));
        }
        if let Some(i) = velocity.iter().position(|c| !(*c > 0.0) || !c.is_finite()) {
            return Err(AwiError::InvalidModel(format!(
                "velocity at node {i} is not positive and finite: {}",
                velocity[i]
            )));
        }
        let c_min = velocity.iter().cloned().fold(f64::INFINITY, f64::min);
        let c_max = velocity.iter().cloned().fold(0.0, f64::max);
        Ok(VelocityGrid { nx, nz, spacing, origin, velocity, c_min, c_max })
    }

    /// Samples an analytic velocity function onto the grid.
    pub fn from_fn(
        nx: usize,
        nz: usize,
        spacing: f64,
        origin: Position,
        c: impl Fn(Position) -> f64,
    ) -> Result<Self> {
        let mut v = Vec::with_capacity(nx * nz);
        for j in 0..nz {
            for i in 0..nx {
                v.push(c([origin[0] + i as f64 * spacing, origin[1] + j as f64 * spacing]));
            }
        }
        VelocityGrid::new(nx, nz, spacing, origin, v)
    }

    pub fn velocities(&self) -> &[f64] {
        &self.velocity
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.velocity[j * self.nx + i]
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.c_min, self.c_max)
    }

    pub fn node(&self, i: usize, j: usize) -> Position {
        [self.origin[0] + i as f64 * self.spacing, self.origin[1] + j as f64 * self.spacing]
    }

    pub fn extent(&self) -> (Position, Position) {
        (self.origin, self.node(self.nx - 1, self.nz - 1))
    }

    pub fn contains(&self, p: Position) -> bool {
        let (lo, hi) = self.extent();
        let tol = 1e-9 * self.spacing;
        p[0] >= lo[0] - tol && p[0] <= hi[0] + tol && p[1] >= lo[1] - tol && p[1] <= hi[1] + tol
    }

    /// Fractional grid coordinates of `p`.
    pub(crate) fn locate(&self, p: Position) -> (f64, f64) {
        (
            ((p[0] - self.origin[0]) / self.spacing).clamp(0.0, (self.nx - 1) as f64),
            ((p[1] - self.origin[1]) / self.spacing).clamp(0.0, (self.nz - 1) as f64),
        )
    }

    /// Bilinear interpolation of a nodal field at `p`.
    pub(crate) fn interpolate(&self, field: &[f64], p: Position) -> f64 {
        let (fx, fz) = self.locate(p);
        let i = (fx.floor() as usize).min(self.nx - 2);
        let j = (fz.floor() as usize).min(self.nz - 2);
        let (ax, az) = (fx - i as f64, fz - j as f64);
        let f = |ii: usize, jj: usize| field[jj * self.nx + ii];
        (1.0 - ax) * (1.0 - az) * f(i, j)
            + ax * (1.0 - az) * f(i + 1, j)
            + (1.0 - ax) * az * f(i, j + 1)
            + ax * az * f(i + 1, j + 1)
    }

    pub fn velocity_at(&self, p: Position) -> f64 {
        self.interpolate(&self.velocity, p)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        VelocityGrid::new(
            self.nx,
            self.nz,
            self.spacing,
            self.origin,
            self.velocity.iter().map(|c| c * factor).collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MediumKind {
    Constant { c: f64 },
    /// `c(x) = c0 + g·x[axis]`.
    LinearGradient { c0: f64, g: f64, axis: Axis },
    Grid(VelocityGrid),
}

/// Velocity model with constant, known density.
#[derive(Debug, Clone, PartialEq)]
pub struct MediumModel {
    pub kind: MediumKind,
    pub rho: f64,
}

impl MediumModel {
    pub fn constant(c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(AwiError::InvalidModel(format!("velocity must be positive, got {c}")));
        }
        Ok(MediumModel { kind: MediumKind::Constant { c }, rho: 1.0 })
    }

    pub fn linear_gradient(c0: f64, g: f64, axis: Axis) -> Result<Self> {
        if !(c0 > 0.0) || !c0.is_finite() || !g.is_finite() {
            return Err(AwiError::InvalidModel(format!("bad gradient medium c0={c0}, g={g}")));
        }
        Ok(MediumModel { kind: MediumKind::LinearGradient { c0, g, axis }, rho: 1.0 })
    }

    pub fn grid(grid: VelocityGrid) -> Self {
        MediumModel { kind: MediumKind::Grid(grid), rho: 1.0 }
    }

    pub fn velocity(&self, p: Position) -> Result<f64> {
        let c = match &self.kind {
            MediumKind::Constant { c } => *c,
            MediumKind::LinearGradient { c0, g, axis } => c0 + g * axis.coord(p),
            MediumKind::Grid(grid) => {
                if !grid.contains(p) {
                    return Err(AwiError::Domain(format!("point {p:?} lies outside the grid")));
                }
                grid.velocity_at(p)
            }
        };
        if !(c > 0.0) {
            return Err(AwiError::Domain(format!("non-positive velocity {c} at {p:?}")));
        }
        Ok(c)
    }

    /// Same model with every velocity multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) {
            return Err(AwiError::InvalidArgument(format!("scale factor must be positive, got {factor}")));
        }
        let kind = match &self.kind {
            MediumKind::Constant { c } => MediumKind::Constant { c: c * factor },
            MediumKind::LinearGradient { c0, g, axis } => {
                MediumKind::LinearGradient { c0: c0 * factor, g: g * factor, axis: *axis }
            }
            MediumKind::Grid(grid) => MediumKind::Grid(grid.scaled(factor)?),
        };
        Ok(MediumModel { kind, rho: self.rho })
    }

    /// Samples an analytic model onto a grid with the given layout.
    pub fn to_grid(&self, nx: usize, nz: usize, spacing: f64, origin: Position) -> Result<VelocityGrid> {
        let mut v = Vec::with_capacity(nx * nz);
        for j in 0..nz {
            for i in 0..nx {
                v.push(self.velocity([origin[0] + i as f64 * spacing, origin[1] + j as f64 * spacing])?);
            }
        }
        VelocityGrid::new(nx, nz, spacing, origin, v)
    }
}
