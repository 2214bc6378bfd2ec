use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An axis-aligned rectangle `[x_lo, x_hi] × [y_lo, y_hi]` in parameter space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domain {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

impl Domain {
    pub fn new(x: [f64; 2], y: [f64; 2]) -> Result<Self> {
        let d = Self { x, y };
        d.validate()?;
        Ok(d)
    }

    pub fn square(half: f64) -> Self {
        Self { x: [-half, half], y: [-half, half] }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.x.iter().chain(&self.y).all(|v| v.is_finite())
            && self.x[0] < self.x[1]
            && self.y[0] < self.y[1];
        if ok {
            Ok(())
        } else {
            Err(Error::Spec(format!(
                "domain must have positive area, got x={:?} y={:?}",
                self.x, self.y
            )))
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let slack = 1e-12 * self.diameter().max(1.0);
        x >= self.x[0] - slack && x <= self.x[1] + slack && y >= self.y[0] - slack && y <= self.y[1] + slack
    }

    pub fn diameter(&self) -> f64 {
        (self.x[1] - self.x[0]).hypot(self.y[1] - self.y[0])
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x[0] + self.x[1]), 0.5 * (self.y[0] + self.y[1]))
    }

    /// Whether the closed disk of radius `r` about `(cx, cy)` fits inside.
    pub fn contains_disk(&self, cx: f64, cy: f64, r: f64) -> bool {
        self.contains(cx - r, cy - r) && self.contains(cx + r, cy + r)
    }
}

/// A tensor grid of `nx × ny` nodes spanning a rectangle, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub rect: Domain,
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    pub fn new(rect: Domain, nx: usize, ny: usize) -> Result<Self> {
        rect.validate()?;
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidArgument(format!("grid sizes must be >= 2, got {nx}x{ny}")));
        }
        Ok(Self { rect, nx, ny })
    }

    /// `nx × ny` nodes strictly inside `rect`, evenly spaced away from the
    /// boundary by one spacing.
    pub fn interior(rect: Domain, nx: usize, ny: usize) -> Result<Self> {
        rect.validate()?;
        let hx = (rect.x[1] - rect.x[0]) / (nx + 1) as f64;
        let hy = (rect.y[1] - rect.y[0]) / (ny + 1) as f64;
        Self::new(
            Domain { x: [rect.x[0] + hx, rect.x[1] - hx], y: [rect.y[0] + hy, rect.y[1] - hy] },
            nx,
            ny,
        )
    }

    pub fn x(&self, i: usize) -> f64 {
        lerp(self.rect.x, i, self.nx)
    }

    pub fn y(&self, j: usize) -> f64 {
        lerp(self.rect.y, j, self.ny)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Nodes in row-major order (`y` outer, `x` inner).
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        (0..self.ny)
            .flat_map(|j| (0..self.nx).map(move |i| (i, j)))
            .map(|(i, j)| (self.x(i), self.y(j)))
            .collect()
    }

    pub fn spacing(&self) -> (f64, f64) {
        (
            (self.rect.x[1] - self.rect.x[0]) / (self.nx - 1) as f64,
            (self.rect.y[1] - self.rect.y[0]) / (self.ny - 1) as f64,
        )
    }
}

fn lerp(r: [f64; 2], i: usize, n: usize) -> f64 {
    if i + 1 == n {
        r[1]
    } else {
        r[0] + (r[1] - r[0]) * i as f64 / (n - 1) as f64
    }
}
