//! Tensor-product grids of interior nodes and real fields on them.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::special::unit_sphere_area;

/// Boundary treatment of one axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AxisKind {
    /// Homogeneous Dirichlet data at both ends; nodes `lo + k h`, `k = 1..=N`.
    Dirichlet,
    /// Radial variable on `[0, hi]` with measure `τ^power dτ`: reflection at
    /// `τ = 0`, Dirichlet at `hi`. Nodes sit at cell centres `(i + 1/2) h`.
    Radial { power: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub kind: AxisKind,
    pub lo: f64,
    pub hi: f64,
    pub h: f64,
    pub nodes: Vec<f64>,
    /// Diagonal mass (quadrature weight) per node.
    pub mass: Vec<f64>,
}

impl Axis {
    pub fn dirichlet(lo: f64, hi: f64, count: usize) -> Result<Self> {
        check_count(count)?;
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(FracError::Grid(format!("empty interval ({lo}, {hi})")));
        }
        let h = (hi - lo) / (count as f64 + 1.0);
        let nodes = (1..=count).map(|k| lo + k as f64 * h).collect();
        Ok(Self {
            kind: AxisKind::Dirichlet,
            lo,
            hi,
            h,
            nodes,
            mass: vec![h; count],
        })
    }

    /// Radial axis on `[0, radius]`. The spacing is chosen so that the
    /// Dirichlet ghost node falls exactly at `radius`.
    pub fn radial(radius: f64, count: usize, power: f64) -> Result<Self> {
        check_count(count)?;
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(FracError::Grid(format!("radial extent must be positive, got {radius}")));
        }
        if !(power >= 0.0) {
            return Err(FracError::Grid(format!("radial power must be nonnegative, got {power}")));
        }
        let h = radius / (count as f64 + 0.5);
        let nodes: Vec<f64> = (0..count).map(|i| (i as f64 + 0.5) * h).collect();
        let mass = nodes.iter().map(|t| h * t.powf(power)).collect();
        Ok(Self {
            kind: AxisKind::Radial { power },
            lo: 0.0,
            hi: radius,
            h,
            nodes,
            mass,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Tridiagonal stiffness matrix `(diag, off)` of `-d/dx (ω d/dx)` in the
    /// weak form, so that the operator is `M⁻¹K` with `M = diag(mass)`.
    pub fn stiffness(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.len();
        let h = self.h;
        match self.kind {
            AxisKind::Dirichlet => (vec![2.0 / h; n], vec![-1.0 / h; n - 1]),
            AxisKind::Radial { power } => {
                // face i+1/2 sits at (i+1)h; the face at 0 carries no flux
                let face = |i: usize| ((i + 1) as f64 * h).powf(power);
                let mut diag = vec![0.0; n];
                let mut off = vec![0.0; n - 1];
                for i in 0..n {
                    let left = if i == 0 { 0.0 } else { face(i - 1) };
                    diag[i] = (left + face(i)) / h;
                    if i + 1 < n {
                        off[i] = -face(i) / h;
                    }
                }
                (diag, off)
            }
        }
    }

    /// Trapezoid volume of the axis including the boundary half cells.
    pub fn volume(&self) -> f64 {
        match self.kind {
            AxisKind::Dirichlet => self.mass.iter().sum::<f64>() + self.h,
            AxisKind::Radial { power } => {
                let last = self.hi.powf(power) * self.h / 2.0;
                self.mass.iter().sum::<f64>() + last
            }
        }
    }
}

fn check_count(count: usize) -> Result<()> {
    if count < 3 {
        return Err(FracError::Grid(format!(
            "at least 3 nodes per axis are required, got {count}"
        )));
    }
    Ok(())
}

/// Domain descriptions accepted by [`make_grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    Interval { lo: f64, hi: f64 },
    Rectangle { x: (f64, f64), y: (f64, f64) },
    /// Quarter plane `(τ, y_n) ∈ [0, R] × (0, R)` for functions on the upper
    /// half space that are radial in `y'`.
    ReducedHalfSpace { n: usize, radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub axes: Vec<Axis>,
    /// True when the nodes were shifted by half a cell to avoid the origin.
    pub origin_shifted: bool,
    /// Constant factor of the measure (sphere area in reduced coordinates).
    pub measure_factor: f64,
}

pub fn make_grid(domain: &Domain, resolution: &[usize]) -> Result<Grid> {
    Grid::new(domain, resolution)
}

impl Grid {
    pub fn new(domain: &Domain, resolution: &[usize]) -> Result<Self> {
        let want = match domain {
            Domain::Interval { .. } => 1,
            _ => 2,
        };
        if resolution.len() != want {
            return Err(FracError::Grid(format!(
                "domain needs {want} resolution entries, got {}",
                resolution.len()
            )));
        }
        match *domain {
            Domain::Interval { lo, hi } => {
                let (axis, shifted) = avoid_origin(Axis::dirichlet(lo, hi, resolution[0])?)?;
                Ok(Self {
                    axes: vec![axis],
                    origin_shifted: shifted,
                    measure_factor: 1.0,
                })
            }
            Domain::Rectangle { x, y } => {
                let ax = Axis::dirichlet(x.0, x.1, resolution[0])?;
                let ay = Axis::dirichlet(y.0, y.1, resolution[1])?;
                // a node can only hit the origin if both axes have one at 0
                let hit = |a: &Axis| a.nodes.iter().any(|v| v.abs() < 1e-12 * a.h);
                let (ax, ay, shifted) = if hit(&ax) && hit(&ay) {
                    (avoid_origin(ax)?.0, ay, true)
                } else {
                    (ax, ay, false)
                };
                Ok(Self {
                    axes: vec![ax, ay],
                    origin_shifted: shifted,
                    measure_factor: 1.0,
                })
            }
            Domain::ReducedHalfSpace { n, radius } => {
                if n < 2 {
                    return Err(FracError::Grid(format!(
                        "reduced half space needs n >= 2, got {n}"
                    )));
                }
                let radial = Axis::radial(radius, resolution[0], (n - 2) as f64)?;
                let normal = Axis::dirichlet(0.0, radius, resolution[1])?;
                Ok(Self {
                    axes: vec![radial, normal],
                    origin_shifted: false,
                    measure_factor: unit_sphere_area(n - 1),
                })
            }
        }
    }

    pub fn from_axes(axes: Vec<Axis>, measure_factor: f64) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(FracError::Grid(format!("grid dimension must be 1 or 2, got {}", axes.len())));
        }
        Ok(Self {
            axes,
            origin_shifted: false,
            measure_factor,
        })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        match self.axes.len() {
            1 => (self.axes[0].len(), 1),
            _ => (self.axes[0].len(), self.axes[1].len()),
        }
    }

    pub fn len(&self) -> usize {
        let (a, b) = self.shape();
        a * b
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major flat index of node `(i, j)`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.shape().1 + j
    }

    /// Coordinates of node `k`; the second entry is 0 in 1D.
    pub fn point(&self, k: usize) -> [f64; 2] {
        let (_, ny) = self.shape();
        match self.axes.len() {
            1 => [self.axes[0].nodes[k], 0.0],
            _ => [self.axes[0].nodes[k / ny], self.axes[1].nodes[k % ny]],
        }
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        (0..self.len()).map(|k| self.point(k)).collect()
    }

    /// Quadrature weight of every node (product of axis masses times the
    /// measure factor).
    pub fn weights(&self) -> Vec<f64> {
        let (nx, ny) = self.shape();
        let mut w = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            for j in 0..ny {
                let my = if self.axes.len() == 2 { self.axes[1].mass[j] } else { 1.0 };
                w.push(self.measure_factor * self.axes[0].mass[i] * my);
            }
        }
        w
    }

    /// Trapezoid volume including the Dirichlet boundary half cells, where
    /// grid functions vanish.
    pub fn volume(&self) -> f64 {
        self.measure_factor * self.axes.iter().map(Axis::volume).product::<f64>()
    }

    pub fn min_spacing(&self) -> f64 {
        self.axes.iter().map(|a| a.h).fold(f64::INFINITY, f64::min)
    }

    /// Euclidean distance of each node to the origin, clamped below by half
    /// the smallest spacing.
    pub fn clamped_radii(&self) -> Vec<f64> {
        let floor = 0.5 * self.min_spacing();
        self.points()
            .iter()
            .map(|p| p[0].hypot(p[1]).max(floor))
            .collect()
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.weights()
            .iter()
            .zip(a.iter().zip(b))
            .map(|(w, (x, y))| w * x * y)
            .sum()
    }
}

fn avoid_origin(axis: Axis) -> Result<(Axis, bool)> {
    let hit = axis.nodes.iter().any(|v| v.abs() < 1e-12 * axis.h);
    if !hit {
        return Ok((axis, false));
    }
    let shift = 0.5 * axis.h;
    let shifted = Axis::dirichlet(axis.lo + shift, axis.hi + shift, axis.len())?;
    Ok((shifted, true))
}

/// Real values on the interior nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(FracError::GridMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(FracError::InvalidArgument(format!(
                "non-finite value at node {k}"
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![0.0; n],
        }
    }

    /// Samples `f(x, y)` at every node (`y = 0` in 1D).
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = grid.points().iter().map(|p| f(p[0], p[1])).collect();
        Self::new(grid, values)
    }

    pub fn norm_l2(&self) -> f64 {
        self.grid.inner(&self.values, &self.values).sqrt()
    }

    pub fn inner(&self, other: &GridFunction) -> Result<f64> {
        self.same_grid(other)?;
        Ok(self.grid.inner(&self.values, &other.values))
    }

    pub fn same_grid(&self, other: &GridFunction) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(FracError::GridMismatch {
                expected: self.grid.len(),
                found: other.grid.len(),
            })
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Centred-difference gradient at every node, using the same boundary
    /// values as [`GridFunction::interpolate`] (zero ghosts at Dirichlet ends,
    /// even reflection at a radial origin). The second component is 0 in 1D.
    pub fn gradient(&self) -> Vec<[f64; 2]> {
        let g = &self.grid;
        let (nx, ny) = g.shape();
        let mut out = vec![[0.0; 2]; nx * ny];
        for (d, axis) in g.axes.iter().enumerate() {
            let len = axis.len();
            let h = axis.h;
            let reflect = matches!(axis.kind, AxisKind::Radial { .. });
            for i in 0..nx {
                for j in 0..ny {
                    let k = if d == 0 { i } else { j };
                    let at = |m: usize| if d == 0 { self.values[m * ny + j] } else { self.values[i * ny + m] };
                    let left = if k > 0 {
                        at(k - 1)
                    } else if reflect {
                        at(0)
                    } else {
                        0.0
                    };
                    let right = if k + 1 < len { at(k + 1) } else { 0.0 };
                    out[i * ny + j][d] = (right - left) / (2.0 * h);
                }
            }
        }
        out
    }

    /// Piecewise (bi)linear interpolation using the boundary values of each
    /// axis: zero at Dirichlet ends and outside the box, even reflection at
    /// the radial origin.
    pub fn interpolate(&self, x: f64, y: f64) -> f64 {
        let g = &self.grid;
        let (nx, ny) = g.shape();
        let sx = match stencil(&g.axes[0], x) {
            Some(s) => s,
            None => return 0.0,
        };
        if g.dim() == 1 {
            return sx.iter().map(|&(i, w)| w * self.values[i]).sum();
        }
        let sy = match stencil(&g.axes[1], y) {
            Some(s) => s,
            None => return 0.0,
        };
        let mut acc = 0.0;
        for &(i, wx) in &sx {
            for &(j, wy) in &sy {
                if i < nx && j < ny {
                    acc += wx * wy * self.values[i * ny + j];
                }
            }
        }
        acc
    }
}

/// Interpolation stencil of up to two interior nodes with weights; `None`
/// outside the axis.
fn stencil(axis: &Axis, x: f64) -> Option<Vec<(usize, f64)>> {
    let n = axis.len();
    let h = axis.h;
    match axis.kind {
        AxisKind::Dirichlet => {
            if !(x > axis.lo && x < axis.hi) {
                return None;
            }
            // boundary nodes carry index -1 and n, both zero
            let r = (x - axis.lo) / h;
            let k = r.floor();
            let f = r - k;
            let k = k as isize - 1;
            let mut out = Vec::with_capacity(2);
            if k >= 0 && (k as usize) < n {
                out.push((k as usize, 1.0 - f));
            }
            if k + 1 >= 0 && ((k + 1) as usize) < n {
                out.push(((k + 1) as usize, f));
            }
            Some(out)
        }
        AxisKind::Radial { .. } => {
            let x = x.abs();
            if x >= axis.hi {
                return None;
            }
            if x <= 0.5 * h {
                return Some(vec![(0, 1.0)]);
            }
            let r = x / h - 0.5;
            let k = r.floor();
            let f = r - k;
            let k = k as usize;
            let mut out = vec![(k, 1.0 - f)];
            if k + 1 < n {
                out.push((k + 1, f));
            }
            Some(out)
        }
    }
}
