//! Velocity from vorticity through the Dirichlet stream function, and
//! samplers for smooth vorticities and Navier-slip velocity fields.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{perp_grad, ScalarField, VectorField};
use crate::grid::{BoundaryTrace, PolarGrid};
use crate::modal::{ModalSolver, WallKind};

/// Factorized solver for `Lap psi = omega`, `psi = 0` at `r = 1`.
pub struct PoissonDirichletSolver {
    grid: Arc<PolarGrid>,
    inner: ModalSolver,
    zero_wall: Vec<f64>,
}

impl PoissonDirichletSolver {
    pub fn new(grid: Arc<PolarGrid>) -> Result<Self> {
        let inner = ModalSolver::new(grid.clone(), 0.0, 1.0, WallKind::Dirichlet)?;
        let zero_wall = vec![0.0; grid.n_theta()];
        Ok(Self { grid, inner, zero_wall })
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        &self.grid
    }

    /// The stream function, carrying its (zero) wall trace.
    pub fn solve(&self, omega: &ScalarField) -> Result<ScalarField> {
        if omega.grid() != &self.grid {
            return Err(Error::InvalidArgument("vorticity lives on a different grid".into()));
        }
        let psi = self.inner.solve(omega.values(), &self.zero_wall)?;
        Ok(ScalarField::from_parts(self.grid.clone(), psi, Some(self.zero_wall.clone())))
    }

    /// `(psi, u)` with `u = perp_grad(psi)`.
    pub fn velocity(&self, omega: &ScalarField) -> Result<(ScalarField, VectorField)> {
        let psi = self.solve(omega)?;
        let u = perp_grad(&psi);
        Ok((psi, u))
    }
}

pub fn solve_poisson_dirichlet(omega: &ScalarField) -> Result<ScalarField> {
    PoissonDirichletSolver::new(omega.grid().clone())?.solve(omega)
}

/// `K(omega)`: the divergence-free velocity tangent to the wall with curl `omega`.
pub fn biot_savart(omega: &ScalarField) -> Result<VectorField> {
    Ok(PoissonDirichletSolver::new(omega.grid().clone())?.velocity(omega)?.1)
}

/// Random polynomial vorticity `sum c_{kl} r^{k+2l} (cos | sin)(k theta)`,
/// smooth in Cartesian coordinates, normalized to unit max amplitude bound.
pub fn random_smooth_vorticity(seed: u64, grid: Arc<PolarGrid>) -> ScalarField {
    const MAX_K: usize = 4;
    const MAX_L: usize = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut terms = Vec::new();
    for k in 0..=MAX_K {
        for l in 0..=MAX_L {
            let a: f64 = rng.random_range(-1.0..1.0);
            let b: f64 = if k == 0 { 0.0 } else { rng.random_range(-1.0..1.0) };
            terms.push((k as f64, (k + 2 * l) as i32, a, b));
        }
    }
    let scale = 1.0 / terms.len() as f64;
    ScalarField::from_fn(grid, |r, t| {
        terms
            .iter()
            .map(|&(k, j, a, b)| r.powi(j) * (a * (k * t).cos() + b * (k * t).sin()))
            .sum::<f64>()
            * scale
    })
}

/// One angular mode of a [`NavierSample`]:
/// `psi_k = (a cos k theta + b sin k theta)(r^k + beta r^(k+2) + gamma r^(k+4))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NavierMode {
    pub k: u32,
    pub a: f64,
    pub b: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl NavierMode {
    /// Solves for `beta, gamma` so that `psi_k(1) = 0` and
    /// `psi_k''(1) + (alpha - 1) psi_k'(1) = 0`.
    pub fn new(k: u32, a: f64, b: f64, alpha: f64) -> Result<Self> {
        let kf = k as f64;
        let p = |j: f64| j * (j + alpha - 2.0);
        let det = p(kf + 4.0) - p(kf + 2.0);
        if det.abs() < 1e-12 {
            return Err(Error::DegenerateMode { k: k as i64, alpha });
        }
        let gamma = (p(kf + 2.0) - p(kf)) / det;
        let beta = -1.0 - gamma;
        Ok(Self { k, a, b, beta, gamma })
    }

    /// `(R, R', R'')` of the radial profile.
    fn radial(&self, r: f64) -> (f64, f64, f64) {
        let mut out = (0.0, 0.0, 0.0);
        for (c, j) in [(1.0, self.k), (self.beta, self.k + 2), (self.gamma, self.k + 4)] {
            let jf = j as f64;
            out.0 += c * r.powi(j as i32);
            if j >= 1 {
                out.1 += c * jf * r.powi(j as i32 - 1);
            }
            if j >= 2 {
                out.2 += c * jf * (jf - 1.0) * r.powi(j as i32 - 2);
            }
        }
        out
    }

    fn angular(&self, theta: f64) -> (f64, f64) {
        let k = self.k as f64;
        let (s, c) = (k * theta).sin_cos();
        (self.a * c + self.b * s, k * (-self.a * s + self.b * c))
    }

    /// `R(r) / r` without the removable singularity.
    fn radial_over_r(&self, r: f64) -> f64 {
        let mut v = 0.0;
        for (c, j) in [(1.0, self.k), (self.beta, self.k + 2), (self.gamma, self.k + 4)] {
            if j >= 1 {
                v += c * r.powi(j as i32 - 1);
            }
        }
        v
    }
}

/// Closed-form member of `W`: a divergence-free, tangent velocity on the disk
/// satisfying the Navier condition with constant friction `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct NavierSample {
    pub alpha: f64,
    pub modes: Vec<NavierMode>,
}

impl NavierSample {
    /// Highest angular mode drawn by [`NavierSample::random`].
    pub const MAX_MODE: u32 = 5;

    pub fn new(alpha: f64, modes: Vec<NavierMode>) -> Self {
        Self { alpha, modes }
    }

    /// Random amplitudes decaying like `(1 + k)^-2`.
    pub fn random(seed: u64, alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::InvalidArgument("alpha must be finite".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut modes = Vec::new();
        for k in 0..=Self::MAX_MODE {
            let scale = 1.0 / ((1 + k) as f64).powi(2);
            let a = scale * rng.random_range(-1.0..1.0);
            let b = if k == 0 { 0.0 } else { scale * rng.random_range(-1.0..1.0) };
            modes.push(NavierMode::new(k, a, b, alpha)?);
        }
        Ok(Self { alpha, modes })
    }

    pub fn psi(&self, r: f64, theta: f64) -> f64 {
        self.modes.iter().map(|m| m.angular(theta).0 * m.radial(r).0).sum()
    }

    /// Polar velocity `(u_r, u_theta)`.
    pub fn velocity(&self, r: f64, theta: f64) -> (f64, f64) {
        self.modes.iter().fold((0.0, 0.0), |(ur, ut), m| {
            let (f, df) = m.angular(theta);
            (ur - df * m.radial_over_r(r), ut + f * m.radial(r).1)
        })
    }

    pub fn vorticity(&self, r: f64, theta: f64) -> f64 {
        self.modes
            .iter()
            .map(|m| {
                let k = m.k as f64;
                let (f, _) = m.angular(theta);
                let lift = |j: f64| j * j - k * k;
                f * (m.beta * lift(k + 2.0) * r.powi(m.k as i32) + m.gamma * lift(k + 4.0) * r.powi(m.k as i32 + 2))
            })
            .sum()
    }

    /// Exact wall residuals `[navier, identity, normal-derivative form]` at angle `theta`.
    pub fn wall_residuals(&self, theta: f64) -> [f64; 3] {
        let mut d_ut = 0.0;
        let mut ut = 0.0;
        let mut d_theta_ur = 0.0;
        for m in &self.modes {
            let (f, _) = m.angular(theta);
            let (rr, d1, d2) = m.radial(1.0);
            let k = m.k as f64;
            ut += f * d1;
            d_ut += f * d2;
            d_theta_ur += k * k * f * rr;
        }
        let omega = self.vorticity(1.0, theta);
        let strain = 0.5 * (d_ut - ut + d_theta_ur);
        [
            2.0 * strain + self.alpha * ut,
            0.5 * omega - strain - ut,
            d_ut + (self.alpha - 1.0) * ut,
        ]
    }

    /// Largest absolute exact wall residual over `n` equispaced angles.
    pub fn max_wall_residual(&self, n: usize) -> f64 {
        (0..n)
            .flat_map(|i| self.wall_residuals(2.0 * PI * i as f64 / n as f64))
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `perp_grad` of the sampled stream function, so that the discrete
    /// divergence and wall-normal velocity vanish to roundoff.
    pub fn velocity_field(&self, grid: Arc<PolarGrid>) -> VectorField {
        perp_grad(&self.stream_field(grid))
    }

    pub fn stream_field(&self, grid: Arc<PolarGrid>) -> ScalarField {
        let n_t = grid.n_theta();
        ScalarField::from_fn(grid, |r, t| self.psi(r, t))
            .with_wall(vec![0.0; n_t])
            .expect("finite wall trace")
    }

    pub fn vorticity_field(&self, grid: Arc<PolarGrid>) -> ScalarField {
        ScalarField::from_fn(grid, |r, t| self.vorticity(r, t))
    }
}

/// A random member of `W` for constant friction `alpha`, sampled on `grid`.
/// `trace` must carry the same constant friction.
pub fn sample_navier_field(seed: u64, alpha: f64, grid: Arc<PolarGrid>, trace: &BoundaryTrace) -> Result<VectorField> {
    if trace.alpha.iter().any(|&a| (a - alpha).abs() > 1e-12) {
        return Err(Error::InvalidArgument(
            "sample_navier_field needs a constant friction matching the trace".into(),
        ));
    }
    Ok(NavierSample::random(seed, alpha)?.velocity_field(grid))
}
