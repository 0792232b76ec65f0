//! Discretization of the unit disk and the boundary data on the unit circle.
//!
//! Radial nodes are staggered, `r_j = (j + 1/2) dr` for `j = 0..n_r`, so no node
//! sits on the pole and the wall `r = 1` lies half a cell beyond the last node.
//! Angles are uniform, `theta_k = 2 pi k / n_theta`, with `n_theta` even so that
//! `theta + pi` is again a node; that pairing supplies ghost values across the
//! pole.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polar grid on the unit disk with midpoint quadrature weights.
#[derive(Clone)]
pub struct PolarGrid {
    n_r: usize,
    n_theta: usize,
    dr: f64,
    dtheta: f64,
    r_nodes: Vec<f64>,
    theta_nodes: Vec<f64>,
    quad_weights: Vec<f64>,
    fft_forward: Arc<dyn Fft<f64>>,
    fft_inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for PolarGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PolarGrid")
            .field("n_r", &self.n_r)
            .field("n_theta", &self.n_theta)
            .finish()
    }
}

impl PartialEq for PolarGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n_r == other.n_r && self.n_theta == other.n_theta
    }
}

impl PolarGrid {
    /// Builds the staggered grid. Requires `n_r >= 4` and an even `n_theta >= 8`.
    pub fn new(n_r: usize, n_theta: usize) -> Result<Self> {
        if n_r < 4 {
            return Err(Error::InvalidGrid(format!("n_r = {n_r} < 4")));
        }
        if !n_theta.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("n_theta = {n_theta} is odd")));
        }
        if n_theta < 8 {
            return Err(Error::InvalidGrid(format!("n_theta = {n_theta} < 8")));
        }
        let dr = 1.0 / n_r as f64;
        let dtheta = 2.0 * PI / n_theta as f64;
        let r_nodes: Vec<f64> = (0..n_r).map(|j| (j as f64 + 0.5) * dr).collect();
        let theta_nodes: Vec<f64> = (0..n_theta).map(|k| k as f64 * dtheta).collect();
        // Midpoint rule in r is exact for the integrand r, so the weights sum to pi.
        let mut quad_weights = Vec::with_capacity(n_r * n_theta);
        for &r in &r_nodes {
            quad_weights.extend(std::iter::repeat_n(r * dr * dtheta, n_theta));
        }
        let mut planner = FftPlanner::new();
        let fft_forward = planner.plan_fft_forward(n_theta);
        let fft_inverse = planner.plan_fft_inverse(n_theta);
        Ok(Self {
            n_r,
            n_theta,
            dr,
            dtheta,
            r_nodes,
            theta_nodes,
            quad_weights,
            fft_forward,
            fft_inverse,
        })
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    /// Number of nodes, `n_r * n_theta`.
    pub fn len(&self) -> usize {
        self.n_r * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn dtheta(&self) -> f64 {
        self.dtheta
    }

    pub fn r_nodes(&self) -> &[f64] {
        &self.r_nodes
    }

    pub fn theta_nodes(&self) -> &[f64] {
        &self.theta_nodes
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }

    /// Radius of node row `j`.
    #[inline]
    pub fn r(&self, j: usize) -> f64 {
        self.r_nodes[j]
    }

    #[inline]
    pub fn theta(&self, k: usize) -> f64 {
        self.theta_nodes[k]
    }

    /// Flat index of node `(j, k)`; rows of constant radius are contiguous.
    #[inline]
    pub fn idx(&self, j: usize, k: usize) -> usize {
        j * self.n_theta + k
    }

    /// Cartesian coordinates of node `(j, k)`.
    pub fn xy(&self, j: usize, k: usize) -> (f64, f64) {
        let (s, c) = self.theta_nodes[k].sin_cos();
        (self.r_nodes[j] * c, self.r_nodes[j] * s)
    }

    /// Signed wavenumber of FFT bin `m`. The Nyquist bin reports `+n_theta/2`.
    #[inline]
    pub fn wavenumber(&self, m: usize) -> i64 {
        let n = self.n_theta as i64;
        let m = m as i64;
        if m <= n / 2 {
            m
        } else {
            m - n
        }
    }

    /// Smallest node spacing entering the advective CFL bound: `min(dr, r_1 dtheta)`.
    pub fn min_spacing(&self) -> f64 {
        self.dr.min(self.r_nodes[0] * self.dtheta)
    }

    pub(crate) fn fft_forward(&self) -> &Arc<dyn Fft<f64>> {
        &self.fft_forward
    }

    pub(crate) fn fft_inverse(&self) -> &Arc<dyn Fft<f64>> {
        &self.fft_inverse
    }

    /// Quadrature of node values over the disk.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        // Row sums first keeps the reduction order fixed and the error small.
        (0..self.n_r)
            .map(|j| {
                let row = &values[j * self.n_theta..(j + 1) * self.n_theta];
                row.iter().sum::<f64>() * self.r_nodes[j] * self.dr * self.dtheta
            })
            .sum()
    }

    /// Trapezoid (spectrally exact) quadrature over the unit circle of per-angle samples.
    pub fn integrate_boundary(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n_theta);
        values.iter().sum::<f64>() * self.dtheta
    }

    /// The same grid refined by an integer factor in both directions.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.n_r * factor, self.n_theta * factor)
    }
}

/// Friction coefficient specification on the unit circle.
///
/// Serialized as `{"const": c}` or `{"fourier": [[k, a_k, b_k], ...]}` meaning
/// `alpha(theta) = sum a_k cos(k theta) + b_k sin(k theta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaSpec {
    Const(f64),
    Fourier(Vec<(u32, f64, f64)>),
}

impl Default for AlphaSpec {
    fn default() -> Self {
        AlphaSpec::Const(0.0)
    }
}

impl AlphaSpec {
    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            AlphaSpec::Const(c) => *c,
            AlphaSpec::Fourier(terms) => terms
                .iter()
                .map(|&(k, a, b)| {
                    let (s, c) = (k as f64 * theta).sin_cos();
                    a * c + b * s
                })
                .sum(),
        }
    }

    pub fn derivative(&self, theta: f64) -> f64 {
        match self {
            AlphaSpec::Const(_) => 0.0,
            AlphaSpec::Fourier(terms) => terms
                .iter()
                .map(|&(k, a, b)| {
                    let k = k as f64;
                    let (s, c) = (k * theta).sin_cos();
                    k * (-a * s + b * c)
                })
                .sum(),
        }
    }

    pub fn second_derivative(&self, theta: f64) -> f64 {
        match self {
            AlphaSpec::Const(_) => 0.0,
            AlphaSpec::Fourier(terms) => terms
                .iter()
                .map(|&(k, a, b)| {
                    let k = k as f64;
                    let (s, c) = (k * theta).sin_cos();
                    -k * k * (a * c + b * s)
                })
                .sum(),
        }
    }

    /// The constant value, if the spec is angle independent.
    pub fn as_const(&self) -> Option<f64> {
        match self {
            AlphaSpec::Const(c) => Some(*c),
            AlphaSpec::Fourier(terms) if terms.iter().all(|&(k, a, b)| k == 0 || (a == 0.0 && b == 0.0)) => {
                Some(terms.iter().filter(|t| t.0 == 0).map(|t| t.1).sum())
            }
            AlphaSpec::Fourier(_) => None,
        }
    }
}

/// Per-angle boundary data on the unit circle: `n = e_r`, `tau = e_theta`, `kappa = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    pub alpha: Vec<f64>,
    pub kappa: Vec<f64>,
    pub normal: Vec<[f64; 2]>,
    pub tangent: Vec<[f64; 2]>,
}

impl BoundaryTrace {
    /// Samples `alpha_spec` at the grid angles.
    pub fn new(grid: &PolarGrid, alpha_spec: &AlphaSpec) -> Result<Self> {
        Self::from_fn(grid, |theta| alpha_spec.eval(theta))
    }

    /// Samples an arbitrary friction coefficient `theta -> alpha(theta)`.
    pub fn from_fn(grid: &PolarGrid, alpha: impl Fn(f64) -> f64) -> Result<Self> {
        let thetas = grid.theta_nodes();
        let alpha: Vec<f64> = thetas.iter().map(|&t| alpha(t)).collect();
        if let Some(k) = alpha.iter().position(|a| !a.is_finite()) {
            return Err(Error::NonFinite {
                what: format!("alpha sample at theta = {}", thetas[k]),
            });
        }
        let normal: Vec<[f64; 2]> = thetas
            .iter()
            .map(|t| {
                let (s, c) = t.sin_cos();
                [c, s]
            })
            .collect();
        let tangent = normal.iter().map(|n| [-n[1], n[0]]).collect();
        Ok(Self {
            kappa: vec![1.0; alpha.len()],
            alpha,
            normal,
            tangent,
        })
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// `2 kappa - alpha` per angle: the factor relating wall vorticity to slip velocity.
    pub fn vorticity_factor(&self) -> Vec<f64> {
        self.kappa
            .iter()
            .zip(&self.alpha)
            .map(|(k, a)| 2.0 * k - a)
            .collect()
    }

    /// `max(0, -min alpha)`, the negative part of the friction coefficient.
    pub fn alpha_negative_part(&self) -> f64 {
        self.alpha.iter().fold(0.0f64, |m, &a| m.max(-a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_and_rejected_grids() {
        let g = PolarGrid::new(4, 8).unwrap();
        assert_eq!(g.len(), 32);
        assert!(matches!(PolarGrid::new(8, 15), Err(Error::InvalidGrid(_))));
        assert!(matches!(PolarGrid::new(3, 16), Err(Error::InvalidGrid(_))));
        assert!(matches!(PolarGrid::new(8, 6), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn staggered_nodes_and_area() {
        let g = PolarGrid::new(8, 16).unwrap();
        assert!((g.r(0) - 1.0 / 16.0).abs() < 1e-15);
        assert!(g.r_nodes().iter().all(|&r| r > 0.0 && r < 1.0));
        let area: f64 = g.quad_weights().iter().sum();
        assert!((area - PI).abs() < 1e-12);
    }

    #[test]
    fn quadrature_of_r_squared_converges_at_second_order() {
        let err = |n: usize| {
            let g = PolarGrid::new(n, 16).unwrap();
            let v: Vec<f64> = (0..g.len()).map(|i| g.r(i / 16).powi(2)).collect();
            (g.integrate(&v) - PI / 2.0).abs()
        };
        assert!(err(64) < 1e-3);
        let order = (err(32) / err(64)).log2();
        assert!(order >= 1.9, "order {order}");
    }

    #[test]
    fn frame_is_orthonormal_and_rotated() {
        let g = PolarGrid::new(8, 16).unwrap();
        let t = BoundaryTrace::new(&g, &AlphaSpec::Const(0.0)).unwrap();
        for (n, tau) in t.normal.iter().zip(&t.tangent) {
            assert!((n[0].hypot(n[1]) - 1.0).abs() < 1e-15);
            assert!((tau[0].hypot(tau[1]) - 1.0).abs() < 1e-15);
            assert!((n[0] * tau[0] + n[1] * tau[1]).abs() < 1e-15);
            assert_eq!(tau, &[-n[1], n[0]]);
        }
        assert!(t.kappa.iter().all(|&k| k == 1.0));
        assert!(t.vorticity_factor().iter().all(|&f| f == 2.0));
    }

    #[test]
    fn alpha_two_kills_wall_vorticity_factor() {
        let g = PolarGrid::new(8, 16).unwrap();
        let t = BoundaryTrace::new(&g, &AlphaSpec::Const(2.0)).unwrap();
        assert!(t.vorticity_factor().iter().all(|&f| f == 0.0));
    }

    #[test]
    fn fourier_alpha_samples() {
        let g = PolarGrid::new(8, 16).unwrap();
        let spec = AlphaSpec::Fourier(vec![(0, 1.0, 0.0), (1, 0.5, 0.0)]);
        let t = BoundaryTrace::new(&g, &spec).unwrap();
        assert!(t.alpha.iter().all(|&a| (0.5 - 1e-15..=1.5 + 1e-15).contains(&a)));
        assert!((t.alpha[0] - 1.5).abs() < 1e-15);
        assert!((t.alpha[8] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn non_finite_alpha_rejected() {
        let g = PolarGrid::new(8, 16).unwrap();
        assert!(BoundaryTrace::from_fn(&g, |t| if t > 1.0 { f64::NAN } else { 0.0 }).is_err());
    }

    #[test]
    fn alpha_spec_json_forms() {
        let c: AlphaSpec = serde_json::from_str(r#"{"const": 1.5}"#).unwrap();
        assert_eq!(c, AlphaSpec::Const(1.5));
        let f: AlphaSpec = serde_json::from_str(r#"{"fourier": [[0, 1.0, 0.0], [1, 0.5, 0.0]]}"#).unwrap();
        assert_eq!(f, AlphaSpec::Fourier(vec![(0, 1.0, 0.0), (1, 0.5, 0.0)]));
    }
}
