//! Mode-by-mode radial solves for `(sigma + tau * L) f = rhs`, where `L` is the
//! conservative finite-volume Laplacian used by [`crate::ScalarField::laplacian`].
//!
//! Each angular Fourier mode decouples into a tridiagonal system in `r`
//! (the cubic wall ghost adds one entry, eliminated before the sweep).

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::PolarGrid;
use crate::spectral;
use crate::stencil::GHOST_FROM_WALL;

struct Band {
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
    /// Entry at column `n - 3` of the last row.
    corner: f64,
}

fn radial_band(grid: &PolarGrid, k: i64, sigma: f64, tau: f64, neumann: bool) -> Band {
    let n = grid.n_r();
    let h = grid.dr();
    let k2 = (k * k) as f64;
    let mut band = Band { sub: vec![0.0; n], diag: vec![0.0; n], sup: vec![0.0; n], corner: 0.0 };
    for j in 0..n {
        let r = grid.r(j);
        let lo = if j == 0 { 0.0 } else { (r - 0.5 * h) / (r * h * h) };
        let hi = (r + 0.5 * h) / (r * h * h);
        band.sub[j] = tau * lo;
        band.diag[j] = sigma - tau * (lo + k2 / (r * r));
        if j + 1 < n {
            band.sup[j] = tau * hi;
            band.diag[j] -= tau * hi;
        } else if !neumann {
            band.diag[j] += tau * hi * (GHOST_FROM_WALL[1] - 1.0);
            band.sub[j] += tau * hi * GHOST_FROM_WALL[2];
            band.corner = tau * hi * GHOST_FROM_WALL[3];
        }
    }
    band
}

/// Coefficient multiplying the wall datum in the last row's right-hand side.
fn wall_coupling(grid: &PolarGrid, tau: f64, neumann: bool) -> f64 {
    let n = grid.n_r();
    let h = grid.dr();
    let r = grid.r(n - 1);
    let hi = (r + 0.5 * h) / (r * h * h);
    if neumann {
        tau * hi * h
    } else {
        tau * hi * GHOST_FROM_WALL[0]
    }
}

/// Thomas factors of one radial system.
struct Factor {
    corner_multiplier: f64,
    sub: Vec<f64>,
    sup_over_beta: Vec<f64>,
    inv_beta: Vec<f64>,
}

impl Factor {
    fn new(mut band: Band) -> Result<Self> {
        let n = band.diag.len();
        let mut corner_multiplier = 0.0;
        if band.corner != 0.0 {
            corner_multiplier = band.corner / band.sub[n - 2];
            band.sub[n - 1] -= corner_multiplier * band.diag[n - 2];
            band.diag[n - 1] -= corner_multiplier * band.sup[n - 2];
        }
        let mut sup_over_beta = vec![0.0; n];
        let mut inv_beta = vec![0.0; n];
        for j in 0..n {
            let beta = if j == 0 {
                band.diag[0]
            } else {
                band.diag[j] - band.sub[j] * sup_over_beta[j - 1]
            };
            if beta == 0.0 || !beta.is_finite() {
                return Err(Error::InvalidArgument("singular radial system".into()));
            }
            inv_beta[j] = 1.0 / beta;
            sup_over_beta[j] = band.sup[j] / beta;
        }
        Ok(Self { corner_multiplier, sub: band.sub, sup_over_beta, inv_beta })
    }

    fn apply(&self, rhs: &mut [Complex64]) {
        let n = rhs.len();
        if self.corner_multiplier != 0.0 {
            let prev = rhs[n - 2];
            rhs[n - 1] -= prev * self.corner_multiplier;
        }
        rhs[0] *= self.inv_beta[0];
        for j in 1..n {
            let prev = rhs[j - 1];
            rhs[j] = (rhs[j] - prev * self.sub[j]) * self.inv_beta[j];
        }
        for j in (0..n - 1).rev() {
            let next = rhs[j + 1];
            rhs[j] -= next * self.sup_over_beta[j];
        }
    }
}

/// Kind of wall condition a [`ModalSolver`] is factorized for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum WallKind {
    Dirichlet,
    Neumann,
}

/// Factorized solver for `(sigma + tau * L) f = rhs`, one radial system per
/// angular wavenumber `|k| <= n_theta / 2`.
///
/// With a Neumann condition and `sigma = 0` the mean mode is determined only
/// up to a constant; it is pinned at the innermost node and the result is
/// shifted to zero quadrature mean. Callers check compatibility first with
/// [`neumann_defect`].
pub(crate) struct ModalSolver {
    grid: Arc<PolarGrid>,
    floating: bool,
    coupling: f64,
    factors: Vec<Factor>,
}

impl ModalSolver {
    pub(crate) fn new(grid: Arc<PolarGrid>, sigma: f64, tau: f64, kind: WallKind) -> Result<Self> {
        let neumann = kind == WallKind::Neumann;
        let floating = neumann && sigma == 0.0;
        let mut factors = Vec::with_capacity(grid.n_theta() / 2 + 1);
        for k in 0..=(grid.n_theta() / 2) as i64 {
            let mut band = radial_band(&grid, k, sigma, tau, neumann);
            if floating && k == 0 {
                band.diag[0] = 1.0;
                band.sup[0] = 0.0;
            }
            factors.push(Factor::new(band)?);
        }
        let coupling = wall_coupling(&grid, tau, neumann);
        Ok(Self { grid, floating, coupling, factors })
    }

    /// `wall` holds the Dirichlet values or the Neumann data at `r = 1`.
    pub(crate) fn solve(&self, rhs: &[f64], wall: &[f64]) -> Result<Vec<f64>> {
        let grid = &*self.grid;
        let n_r = grid.n_r();
        let n_t = grid.n_theta();
        let modes = spectral::to_modes(grid, rhs);
        let wall_modes = spectral::row_to_modes(grid, wall);
        let mut out = vec![Complex64::new(0.0, 0.0); modes.len()];
        let mut column = vec![Complex64::new(0.0, 0.0); n_r];
        for m in 0..n_t {
            let k = grid.wavenumber(m);
            for j in 0..n_r {
                column[j] = modes[j * n_t + m];
            }
            column[n_r - 1] -= wall_modes[m] * self.coupling;
            if self.floating && k == 0 {
                column[0] = Complex64::new(0.0, 0.0);
            }
            self.factors[k.unsigned_abs() as usize].apply(&mut column);
            for j in 0..n_r {
                out[j * n_t + m] = column[j];
            }
        }
        let mut values = spectral::from_modes(grid, out);
        if self.floating {
            let mean = grid.integrate(&values) / std::f64::consts::PI;
            values.iter_mut().for_each(|v| *v -= mean);
        }
        crate::error::ensure_finite(&values, "radial solve")?;
        Ok(values)
    }
}

/// The operator `L` with the outer face flux replaced by `flux` (the Neumann
/// closure used by [`ModalSolver`] with [`WallKind::Neumann`]).
pub(crate) fn laplacian_neumann(grid: &PolarGrid, values: &[f64], flux: &[f64]) -> Vec<f64> {
    let n_r = grid.n_r();
    let n_t = grid.n_theta();
    let h = grid.dr();
    let d2t = spectral::theta_second_derivative(grid, values);
    let mut out = vec![0.0; values.len()];
    for j in 0..n_r {
        let r = grid.r(j);
        let inv = 1.0 / (r * h * h);
        for k in 0..n_t {
            let f = values[j * n_t + k];
            let lower = if j == 0 { 0.0 } else { (r - 0.5 * h) * (f - values[(j - 1) * n_t + k]) };
            let upper = if j + 1 < n_r {
                (r + 0.5 * h) * (values[(j + 1) * n_t + k] - f)
            } else {
                (r + 0.5 * h) * h * flux[k]
            };
            out[j * n_t + k] = (upper - lower) * inv + d2t[j * n_t + k] / (r * r);
        }
    }
    out
}

/// Discrete solvability defect of `L f = rhs`, `d_r f = g` on the wall:
/// `int rhs - oint g`, both with the grid quadrature.
pub(crate) fn neumann_defect(grid: &PolarGrid, rhs: &[f64], g: &[f64]) -> f64 {
    grid.integrate(rhs) - grid.integrate_boundary(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::laplacian_with_wall;

    fn sample(grid: &PolarGrid, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut v = Vec::with_capacity(grid.len());
        for &r in grid.r_nodes() {
            for &t in grid.theta_nodes() {
                v.push(f(r, t));
            }
        }
        v
    }

    #[test]
    fn dirichlet_solve_inverts_the_discrete_laplacian() {
        let g = PolarGrid::new(12, 16).unwrap();
        let f = sample(&g, |r, t| r.powi(3) * (3.0 * t).cos() + (1.0 - r * r) * (2.0 * t).sin() + r.cos());
        let wall: Vec<f64> = g.theta_nodes().iter().map(|t| (3.0 * t).cos() + 1f64.cos()).collect();
        let lap = laplacian_with_wall(&g, &f, Some(&wall));
        let solver = ModalSolver::new(Arc::new(g.clone()), 0.0, 1.0, WallKind::Dirichlet).unwrap();
        let back = solver.solve(&lap, &wall).unwrap();
        for (a, b) in back.iter().zip(&f) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn helmholtz_solve_inverts_its_operator() {
        let g = PolarGrid::new(10, 8).unwrap();
        let f = sample(&g, |r, t| (r * t.sin()).exp());
        let wall = vec![0.3; 8];
        let lap = laplacian_with_wall(&g, &f, Some(&wall));
        let c = 0.05;
        let rhs: Vec<f64> = f.iter().zip(&lap).map(|(a, l)| a - c * l).collect();
        let solver = ModalSolver::new(Arc::new(g.clone()), 1.0, -c, WallKind::Dirichlet).unwrap();
        let back = solver.solve(&rhs, &wall).unwrap();
        for (a, b) in back.iter().zip(&f) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn neumann_solve_converges_to_analytic_solution() {
        // p = r^2 cos(2 theta) + r^2: Lap p = 4, d_r p(1) = 2 cos(2 theta) + 2.
        let err = |n: usize| {
            let g = PolarGrid::new(n, 16).unwrap();
            let rhs = vec![4.0; g.len()];
            let flux: Vec<f64> = g.theta_nodes().iter().map(|t| 2.0 * (2.0 * t).cos() + 2.0).collect();
            assert!(neumann_defect(&g, &rhs, &flux).abs() < 1e-12);
            let solver = ModalSolver::new(Arc::new(g.clone()), 0.0, 1.0, WallKind::Neumann).unwrap();
            let p = solver.solve(&rhs, &flux).unwrap();
            let lap = laplacian_neumann(&g, &p, &flux);
            assert!(lap.iter().all(|v| (v - 4.0).abs() < 1e-8));
            let exact = sample(&g, |r, t| r * r * (2.0 * t).cos() + r * r - 0.5);
            p.iter().zip(&exact).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        };
        let (e1, e2) = (err(16), err(32));
        assert!(e2 < 1e-3, "{e2}");
        assert!((e1 / e2).log2() > 1.8);
    }
}
