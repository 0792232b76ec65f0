//! Grid-sampled scalar and vector fields and the discrete calculus on them.
//!
//! Angular derivatives are spectral; radial derivatives are second-order
//! finite differences (see [`crate::stencil`]). A field may carry a trace of
//! values at the wall `r = 1`. Traces are only attached when they are data the
//! field actually satisfies (the homogeneous Dirichlet value of a stream
//! function, an imposed wall vorticity), never when they would themselves be a
//! one-sided estimate.

use std::io::{BufRead, Write};
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::PolarGrid;
use crate::spectral;
use crate::stencil::{self, Parity};

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Arc<PolarGrid>,
    values: Vec<f64>,
    wall: Option<Vec<f64>>,
}

/// Velocity-like field stored in the polar frame `(u_r, u_theta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Arc<PolarGrid>,
    ur: Vec<f64>,
    ut: Vec<f64>,
    wall_ur: Option<Vec<f64>>,
    wall_ut: Option<Vec<f64>>,
}

fn lp_of(grid: &PolarGrid, pointwise_abs: impl Iterator<Item = f64>, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidArgument(format!("L^p exponent p = {p} < 1")));
    }
    if p.is_infinite() {
        return Ok(pointwise_abs.fold(0.0, f64::max));
    }
    let powered: Vec<f64> = if p == 2.0 {
        pointwise_abs.map(|a| a * a).collect()
    } else {
        pointwise_abs.map(|a| a.powf(p)).collect()
    };
    Ok(grid.integrate(&powered).powf(1.0 / p))
}

impl ScalarField {
    pub fn new(grid: Arc<PolarGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        crate::error::ensure_finite(&values, "scalar field")?;
        Ok(Self { grid, values, wall: None })
    }

    pub(crate) fn from_parts(grid: Arc<PolarGrid>, values: Vec<f64>, wall: Option<Vec<f64>>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values, wall }
    }

    pub fn zeros(grid: Arc<PolarGrid>) -> Self {
        let n = grid.len();
        Self { grid, values: vec![0.0; n], wall: None }
    }

    pub fn constant(grid: Arc<PolarGrid>, c: f64) -> Self {
        let n = grid.len();
        Self { grid, values: vec![c; n], wall: None }
    }

    /// Samples `f(r, theta)` at the nodes.
    pub fn from_fn(grid: Arc<PolarGrid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for &r in grid.r_nodes() {
            for &t in grid.theta_nodes() {
                values.push(f(r, t));
            }
        }
        Self { grid, values, wall: None }
    }

    /// Attaches values at `r = 1`.
    pub fn with_wall(mut self, wall: Vec<f64>) -> Result<Self> {
        if wall.len() != self.grid.n_theta() {
            return Err(Error::InvalidArgument("wall trace length != n_theta".into()));
        }
        crate::error::ensure_finite(&wall, "wall trace")?;
        self.wall = Some(wall);
        Ok(self)
    }

    pub fn without_wall(mut self) -> Self {
        self.wall = None;
        self
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn wall(&self) -> Option<&[f64]> {
        self.wall.as_deref()
    }

    /// Wall values: the attached trace, or a three-point extrapolation.
    pub fn wall_values(&self) -> Vec<f64> {
        match &self.wall {
            Some(w) => w.clone(),
            None => stencil::extrapolate_to_wall(&self.grid, &self.values),
        }
    }

    #[inline]
    pub fn at(&self, j: usize, k: usize) -> f64 {
        self.values[self.grid.idx(j, k)]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            wall: self.wall.as_ref().map(|w| w.iter().map(|&v| f(v)).collect()),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        let wall = match (&self.wall, &other.wall) {
            (Some(a), Some(b)) => Some(a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()),
            _ => None,
        };
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
            wall,
        }
    }

    /// Quadrature integral over the disk.
    pub fn integral(&self) -> f64 {
        self.grid.integrate(&self.values)
    }

    /// Quadrature mean over the disk.
    pub fn mean(&self) -> f64 {
        self.integral() / std::f64::consts::PI
    }

    /// `(sum w_i |f_i|^p)^(1/p)`, or the grid max for `p = inf`. The max norm
    /// is taken over nodes only and so bounds the true supremum from below.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_of(&self.grid, self.values.iter().map(|v| v.abs()), p)
    }

    /// Radial derivative; the result has no wall trace.
    pub fn dr(&self) -> ScalarField {
        let (d, _) = stencil::radial_derivative(&self.grid, &self.values, Parity::Even, self.wall.as_deref());
        Self::from_parts(self.grid.clone(), d, None)
    }

    /// Spectral angular derivative; the wall trace is differentiated along.
    pub fn dtheta(&self) -> ScalarField {
        let d = spectral::theta_derivative(&self.grid, &self.values);
        let wall = self.wall.as_ref().map(|w| spectral::theta_derivative(&self.grid, w));
        Self::from_parts(self.grid.clone(), d, wall)
    }

    /// Radial slope at `r = 1`, one-sided and second order. Uses the wall
    /// trace when present.
    pub fn wall_slope(&self) -> Vec<f64> {
        stencil::radial_derivative(&self.grid, &self.values, Parity::Even, self.wall.as_deref()).1
    }

    /// Polar gradient `(d_r f, (1/r) d_theta f)`.
    pub fn gradient(&self) -> VectorField {
        let dr = self.dr();
        let dt = self.dtheta();
        let g = &self.grid;
        let n_t = g.n_theta();
        let ut = dt.values.iter().enumerate().map(|(i, v)| v / g.r(i / n_t)).collect();
        VectorField::from_parts(g.clone(), dr.values, ut, None, None)
    }

    /// Cartesian gradient `[d_x f, d_y f]`.
    pub fn cartesian_gradient(&self) -> [ScalarField; 2] {
        self.gradient().to_cartesian()
    }

    /// Three-point-in-r, spectral-in-theta Laplacian in conservative form. The
    /// outer row uses the wall trace (or the last rows) through a cubic ghost.
    pub fn laplacian(&self) -> ScalarField {
        let values = laplacian_with_wall(&self.grid, &self.values, self.wall.as_deref());
        Self::from_parts(self.grid.clone(), values, None)
    }

    /// Writes `r,theta,value` rows; wall trace rows carry `r = 1`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "r,theta,value")?;
        let g = &self.grid;
        for j in 0..g.n_r() {
            for k in 0..g.n_theta() {
                writeln!(out, "{},{},{}", g.r(j), g.theta(k), self.at(j, k))?;
            }
        }
        if let Some(w) = &self.wall {
            for (k, v) in w.iter().enumerate() {
                writeln!(out, "1,{},{}", g.theta(k), v)?;
            }
        }
        Ok(())
    }

    /// Reads the output of [`ScalarField::write_csv`] back onto `grid`.
    pub fn read_csv<R: BufRead>(grid: Arc<PolarGrid>, input: R) -> Result<Self> {
        let n_t = grid.n_theta();
        let mut values = Vec::with_capacity(grid.len());
        let mut wall = Vec::new();
        for (line_no, line) in input.lines().enumerate().skip(1) {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            let parse = |s: &str| {
                s.trim().parse::<f64>().map_err(|e| Error::Parse {
                    context: format!("line {}", line_no + 1),
                    message: e.to_string(),
                })
            };
            if cols.len() != 3 {
                return Err(Error::Parse {
                    context: format!("line {}", line_no + 1),
                    message: format!("expected 3 columns, got {}", cols.len()),
                });
            }
            let r = parse(cols[0])?;
            let v = parse(cols[2])?;
            if r == 1.0 {
                wall.push(v);
            } else {
                values.push(v);
            }
        }
        let field = Self::new(grid, values)?;
        match wall.len() {
            0 => Ok(field),
            n if n == n_t => field.with_wall(wall),
            n => Err(Error::Parse {
                context: "wall rows".into(),
                message: format!("{n} wall rows for n_theta = {n_t}"),
            }),
        }
    }
}

pub(crate) fn laplacian_with_wall(grid: &PolarGrid, values: &[f64], wall: Option<&[f64]>) -> Vec<f64> {
    let n_r = grid.n_r();
    let n_t = grid.n_theta();
    let h = grid.dr();
    let d2t = spectral::theta_second_derivative(grid, values);
    let mut out = vec![0.0; values.len()];
    for j in 0..n_r {
        let r = grid.r(j);
        let r_lo = r - 0.5 * h;
        let r_hi = r + 0.5 * h;
        let inv = 1.0 / (r * h * h);
        for k in 0..n_t {
            let f = values[j * n_t + k];
            let below = if j == 0 { f } else { values[(j - 1) * n_t + k] };
            let above = if j + 1 < n_r {
                values[(j + 1) * n_t + k]
            } else {
                stencil::outer_ghost(grid, values, wall, k)
            };
            let radial = (r_hi * (above - f) - r_lo * (f - below)) * inv;
            out[j * n_t + k] = radial + d2t[j * n_t + k] / (r * r);
        }
    }
    out
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: Self) -> ScalarField {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: Self) -> ScalarField {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: f64) -> ScalarField {
        self.map(|a| a * rhs)
    }
}

impl VectorField {
    pub fn new(grid: Arc<PolarGrid>, ur: Vec<f64>, ut: Vec<f64>) -> Result<Self> {
        if ur.len() != grid.len() || ut.len() != grid.len() {
            return Err(Error::InvalidArgument("component length does not match grid".into()));
        }
        crate::error::ensure_finite(&ur, "u_r")?;
        crate::error::ensure_finite(&ut, "u_theta")?;
        Ok(Self { grid, ur, ut, wall_ur: None, wall_ut: None })
    }

    pub(crate) fn from_parts(
        grid: Arc<PolarGrid>,
        ur: Vec<f64>,
        ut: Vec<f64>,
        wall_ur: Option<Vec<f64>>,
        wall_ut: Option<Vec<f64>>,
    ) -> Self {
        Self { grid, ur, ut, wall_ur, wall_ut }
    }

    pub fn zeros(grid: Arc<PolarGrid>) -> Self {
        let n = grid.len();
        Self { grid, ur: vec![0.0; n], ut: vec![0.0; n], wall_ur: None, wall_ut: None }
    }

    /// Samples polar components `(u_r, u_theta) = f(r, theta)`.
    pub fn from_polar_fn(grid: Arc<PolarGrid>, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        let mut ur = Vec::with_capacity(grid.len());
        let mut ut = Vec::with_capacity(grid.len());
        for &r in grid.r_nodes() {
            for &t in grid.theta_nodes() {
                let (a, b) = f(r, t);
                ur.push(a);
                ut.push(b);
            }
        }
        Self { grid, ur, ut, wall_ur: None, wall_ut: None }
    }

    /// Samples Cartesian components `(u_x, u_y) = f(x, y)`.
    pub fn from_cartesian_fn(grid: Arc<PolarGrid>, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        Self::from_polar_fn(grid, |r, t| {
            let (s, c) = t.sin_cos();
            let (ux, uy) = f(r * c, r * s);
            (ux * c + uy * s, -ux * s + uy * c)
        })
    }

    /// Rigid rotation `c (-y, x)`.
    pub fn rigid_rotation(grid: Arc<PolarGrid>, c: f64) -> Self {
        Self::from_polar_fn(grid, |r, _| (0.0, c * r))
    }

    pub fn with_wall(mut self, wall_ur: Option<Vec<f64>>, wall_ut: Option<Vec<f64>>) -> Self {
        self.wall_ur = wall_ur;
        self.wall_ut = wall_ut;
        self
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        &self.grid
    }

    pub fn ur(&self) -> &[f64] {
        &self.ur
    }

    pub fn ut(&self) -> &[f64] {
        &self.ut
    }

    pub fn wall_ur(&self) -> Option<&[f64]> {
        self.wall_ur.as_deref()
    }

    pub fn wall_ut(&self) -> Option<&[f64]> {
        self.wall_ut.as_deref()
    }

    /// Normal velocity `u . n` at the wall (trace, or extrapolated).
    pub fn wall_normal(&self) -> Vec<f64> {
        match &self.wall_ur {
            Some(w) => w.clone(),
            None => stencil::extrapolate_to_wall(&self.grid, &self.ur),
        }
    }

    /// Tangential velocity `u . tau` at the wall (trace, or extrapolated).
    pub fn wall_tangential(&self) -> Vec<f64> {
        match &self.wall_ut {
            Some(w) => w.clone(),
            None => stencil::extrapolate_to_wall(&self.grid, &self.ut),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.ur.iter().chain(&self.ut).all(|v| v.is_finite())
    }

    pub fn magnitude(&self) -> ScalarField {
        let values = self.ur.iter().zip(&self.ut).map(|(a, b)| a.hypot(*b)).collect();
        ScalarField::from_parts(self.grid.clone(), values, None)
    }

    pub fn max_magnitude(&self) -> f64 {
        self.ur.iter().zip(&self.ut).fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }

    /// L^p norm of the pointwise Euclidean length.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_of(&self.grid, self.ur.iter().zip(&self.ut).map(|(a, b)| a.hypot(*b)), p)
    }

    /// Pointwise dot product.
    pub fn dot(&self, other: &VectorField) -> ScalarField {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        let values = (0..self.ur.len())
            .map(|i| self.ur[i] * other.ur[i] + self.ut[i] * other.ut[i])
            .collect();
        ScalarField::from_parts(self.grid.clone(), values, None)
    }

    pub fn scale(&self, c: f64) -> VectorField {
        let s = |v: &Vec<f64>| v.iter().map(|x| x * c).collect::<Vec<_>>();
        Self::from_parts(
            self.grid.clone(),
            s(&self.ur),
            s(&self.ut),
            self.wall_ur.as_ref().map(s),
            self.wall_ut.as_ref().map(s),
        )
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        let d = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>();
        Self::from_parts(self.grid.clone(), d(&self.ur, &other.ur), d(&self.ut, &other.ut), None, None)
    }

    /// Cartesian components `[u_x, u_y]`. Wall traces carry over when both
    /// polar traces are known.
    pub fn to_cartesian(&self) -> [ScalarField; 2] {
        let g = &self.grid;
        let n_t = g.n_theta();
        let mut ux = Vec::with_capacity(g.len());
        let mut uy = Vec::with_capacity(g.len());
        for i in 0..g.len() {
            let (s, c) = g.theta(i % n_t).sin_cos();
            ux.push(self.ur[i] * c - self.ut[i] * s);
            uy.push(self.ur[i] * s + self.ut[i] * c);
        }
        let (wx, wy) = match (&self.wall_ur, &self.wall_ut) {
            (Some(a), Some(b)) => {
                let (mut wx, mut wy) = (Vec::with_capacity(n_t), Vec::with_capacity(n_t));
                for k in 0..n_t {
                    let (s, c) = g.theta(k).sin_cos();
                    wx.push(a[k] * c - b[k] * s);
                    wy.push(a[k] * s + b[k] * c);
                }
                (Some(wx), Some(wy))
            }
            _ => (None, None),
        };
        [
            ScalarField::from_parts(g.clone(), ux, wx),
            ScalarField::from_parts(g.clone(), uy, wy),
        ]
    }

    /// Field with Cartesian components `(u_x, u_y)` given per node.
    pub fn from_cartesian_values(grid: Arc<PolarGrid>, ux: &[f64], uy: &[f64]) -> Self {
        let n_t = grid.n_theta();
        let mut ur = Vec::with_capacity(grid.len());
        let mut ut = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let (s, c) = grid.theta(i % n_t).sin_cos();
            ur.push(ux[i] * c + uy[i] * s);
            ut.push(-ux[i] * s + uy[i] * c);
        }
        Self { grid, ur, ut, wall_ur: None, wall_ut: None }
    }

    /// Cartesian velocity gradient `g[i][j] = d_j u_i`.
    pub fn gradient(&self) -> [[ScalarField; 2]; 2] {
        let [ux, uy] = self.to_cartesian();
        [ux.cartesian_gradient(), uy.cartesian_gradient()]
    }

    /// Writes `r,theta,u_r,u_theta` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "r,theta,u_r,u_theta")?;
        let g = &self.grid;
        for j in 0..g.n_r() {
            for k in 0..g.n_theta() {
                let i = g.idx(j, k);
                writeln!(out, "{},{},{},{}", g.r(j), g.theta(k), self.ur[i], self.ut[i])?;
            }
        }
        Ok(())
    }
}

/// Convective acceleration `(u . grad) u`.
pub fn convective_acceleration(u: &VectorField) -> VectorField {
    let [ux, uy] = u.to_cartesian();
    let [gx, gy] = u.gradient();
    let n = u.grid().len();
    let (mut ax, mut ay) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for i in 0..n {
        let (a, b) = (ux.values()[i], uy.values()[i]);
        ax.push(a * gx[0].values()[i] + b * gx[1].values()[i]);
        ay.push(a * gy[0].values()[i] + b * gy[1].values()[i]);
    }
    VectorField::from_cartesian_values(u.grid().clone(), &ax, &ay)
}

/// Scalar curl `(1/r)(d_r(r u_theta) - d_theta u_r)`.
pub fn curl(u: &VectorField) -> ScalarField {
    let g = u.grid();
    let n_t = g.n_theta();
    let r_ut: Vec<f64> = u.ut.iter().enumerate().map(|(i, v)| g.r(i / n_t) * v).collect();
    let (d_rut, _) = stencil::radial_derivative(g, &r_ut, Parity::Even, u.wall_ut.as_deref());
    let d_ur = spectral::theta_derivative(g, &u.ur);
    let values = (0..g.len())
        .map(|i| (d_rut[i] - d_ur[i]) / g.r(i / n_t))
        .collect();
    ScalarField::from_parts(g.clone(), values, None)
}

/// Divergence `(1/r)(d_r(r u_r) + d_theta u_theta)`.
pub fn divergence(u: &VectorField) -> ScalarField {
    let g = u.grid();
    let n_t = g.n_theta();
    let r_ur: Vec<f64> = u.ur.iter().enumerate().map(|(i, v)| g.r(i / n_t) * v).collect();
    let (d_rur, _) = stencil::radial_derivative(g, &r_ur, Parity::Even, u.wall_ur.as_deref());
    let d_ut = spectral::theta_derivative(g, &u.ut);
    let values = (0..g.len())
        .map(|i| (d_rur[i] + d_ut[i]) / g.r(i / n_t))
        .collect();
    ScalarField::from_parts(g.clone(), values, None)
}

/// Rotated gradient `(u_r, u_theta) = (-(1/r) d_theta psi, d_r psi)`.
///
/// When `psi` carries a wall trace, the wall normal velocity `-d_theta psi(1, .)`
/// is attached exactly; for `psi = 0` on the wall it vanishes to roundoff.
pub fn perp_grad(psi: &ScalarField) -> VectorField {
    let g = psi.grid();
    let n_t = g.n_theta();
    let dpsi_t = spectral::theta_derivative(g, psi.values());
    let ur = dpsi_t.iter().enumerate().map(|(i, v)| -v / g.r(i / n_t)).collect();
    let ut = psi.dr().into_values();
    let wall_ur = psi
        .wall()
        .map(|w| spectral::theta_derivative(g, w).into_iter().map(|v| -v).collect());
    VectorField::from_parts(g.clone(), ur, ut, wall_ur, None)
}

/// `u . tau = d_r psi` at `r = 1`, one-sided second order (using the wall
/// trace of `psi` when present).
pub fn boundary_tangential_velocity(psi: &ScalarField) -> Vec<f64> {
    psi.wall_slope()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n_r: usize, n_t: usize) -> Arc<PolarGrid> {
        Arc::new(PolarGrid::new(n_r, n_t).unwrap())
    }

    #[test]
    fn curl_of_rigid_rotation_is_two() {
        let g = grid(16, 16);
        let c = curl(&VectorField::rigid_rotation(g.clone(), 1.0));
        assert!(c.values().iter().all(|v| (v - 2.0).abs() < 1e-12));
        let z = curl(&VectorField::zeros(g));
        assert!(z.max_abs() == 0.0);
    }

    #[test]
    fn perp_grad_examples() {
        let g = grid(16, 16);
        let u = perp_grad(&ScalarField::from_fn(g.clone(), |r, _| (r * r - 1.0) / 4.0));
        assert!(u.ur().iter().all(|v| v.abs() < 1e-14));
        for (i, v) in u.ut().iter().enumerate() {
            assert!((v - g.r(i / 16) / 2.0).abs() < 1e-13);
        }
        let u0 = perp_grad(&ScalarField::constant(g.clone(), 3.0));
        assert!(u0.max_magnitude() < 1e-13);
        // psi = y  ->  u = (-1, 0)
        let u = perp_grad(&ScalarField::from_fn(g.clone(), |r, t| r * t.sin()));
        let [ux, uy] = u.to_cartesian();
        assert!(ux.values().iter().all(|v| (v + 1.0).abs() < 1e-12));
        assert!(uy.values().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn lp_norm_examples() {
        let g = grid(64, 32);
        let one = ScalarField::constant(g.clone(), 1.0);
        assert!((one.lp_norm(2.0).unwrap() - PI.sqrt()).abs() < 1e-12);
        assert_eq!(one.lp_norm(f64::INFINITY).unwrap(), 1.0);
        let r = ScalarField::from_fn(g.clone(), |r, _| r);
        assert!((r.lp_norm(2.0).unwrap() - (PI / 2.0).sqrt()).abs() < 1e-3);
        assert!(one.lp_norm(0.5).is_err());
    }

    #[test]
    fn tangential_velocity_at_wall() {
        let g = grid(32, 16);
        let quad = ScalarField::from_fn(g.clone(), |r, _| (r * r - 1.0) / 4.0);
        assert!(boundary_tangential_velocity(&quad).iter().all(|v| (v - 0.5).abs() < 1e-12));
        assert!(boundary_tangential_velocity(&ScalarField::zeros(g.clone())).iter().all(|v| *v == 0.0));
        // psi = (r^2 - 1)(r^2 - c): slope at the wall is 2(1 - c).
        let c = 0.3;
        let err = |n: usize| {
            let g = grid(n, 16);
            let psi = ScalarField::from_fn(g, |r, _| (r * r - 1.0) * (r * r - c));
            boundary_tangential_velocity(&psi)
                .iter()
                .fold(0.0f64, |m, v| m.max((v - 2.0 * (1.0 - c)).abs()))
        };
        assert!(err(32) < 1e-3);
        assert!((err(32) / err(64)).log2() > 2.5);
    }

    #[test]
    fn curl_of_perp_grad_matches_analytic_laplacian() {
        // psi' = r (r^2 - 1) / 4, psi'' = (3 r^2 - 1) / 4, Lap = psi'' + psi'/r.
        let err = |n: usize| {
            let g = grid(n, 16);
            let psi = ScalarField::from_fn(g.clone(), |r, _| (r * r - 1.0).powi(2) / 16.0);
            let lap = ScalarField::from_fn(g.clone(), |r, _| (4.0 * r * r - 2.0) / 4.0);
            (&curl(&perp_grad(&psi)) - &lap).lp_norm(2.0).unwrap()
        };
        let (e1, e2) = (err(32), err(64));
        assert!(e2 < 1e-3);
        assert!((e1 / e2).log2() >= 1.9, "order {}", (e1 / e2).log2());
    }

    #[test]
    fn csv_round_trip_preserves_bits() {
        let g = grid(4, 8);
        let f = ScalarField::from_fn(g.clone(), |r, t| r.sin() * (3.0 * t).cos() / 7.0)
            .with_wall(vec![0.125; 8])
            .unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let back = ScalarField::read_csv(g, buf.as_slice()).unwrap();
        assert_eq!(back, f);
    }
}
