//! Pressure recovery from a velocity snapshot through the Neumann problem
//! `-Lap p = div((u . grad) u)`, `d_n p = nu Lap u . n - ((u . grad) u) . n`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{convective_acceleration, divergence, ScalarField, VectorField};
use crate::grid::PolarGrid;
use crate::modal::{laplacian_neumann, neumann_defect, ModalSolver, WallKind};
use crate::spectral;

/// Tolerance of the divergence-free and tangency preconditions.
pub const V_TOLERANCE: f64 = 1e-6;
/// Largest accepted compatibility defect of the Neumann data.
pub const DEFECT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct PressureSolve {
    /// Zero-mean pressure.
    pub p: ScalarField,
    /// `|| L p - rhs ||_2` with the discrete Neumann closure.
    pub poisson_residual: f64,
    /// `int rhs - oint g` before projection.
    pub compatibility_defect: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PressureSlack {
    pub grad_p: f64,
    pub convective: f64,
    pub viscous: f64,
    /// `convective + viscous - grad_p`.
    pub slack: f64,
}

/// Errors unless `u` is divergence-free and tangent to the wall.
pub fn check_in_v(u: &VectorField) -> Result<()> {
    let scale = u.max_magnitude().max(1.0);
    let div = divergence(u).lp_norm(2.0)?;
    if div > V_TOLERANCE * scale {
        return Err(Error::NotInV { predicate: "divergence-free", value: div });
    }
    let normal = u.wall_normal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if normal > V_TOLERANCE * scale {
        return Err(Error::NotInV { predicate: "tangent to the wall", value: normal });
    }
    Ok(())
}

/// Finite-volume divergence whose quadrature integral telescopes to the wall
/// flux; returns the node values and the wall normal component used.
pub(crate) fn conservative_divergence(a: &VectorField) -> (Vec<f64>, Vec<f64>) {
    let g = a.grid();
    let n_r = g.n_r();
    let n_t = g.n_theta();
    let h = g.dr();
    let wall = a.wall_normal();
    let d_t = spectral::theta_derivative(g, a.ut());
    let ar = a.ur();
    let face = |j: usize, k: usize| -> f64 {
        // Flux r * a_r through the face at r_j + h/2.
        if j + 1 < n_r {
            (g.r(j) + 0.5 * h) * 0.5 * (ar[j * n_t + k] + ar[(j + 1) * n_t + k])
        } else {
            wall[k]
        }
    };
    let mut out = vec![0.0; g.len()];
    for j in 0..n_r {
        let r = g.r(j);
        for k in 0..n_t {
            let below = if j == 0 { 0.0 } else { face(j - 1, k) };
            out[j * n_t + k] = (face(j, k) - below) / (r * h) + d_t[j * n_t + k] / r;
        }
    }
    (out, wall)
}

/// Solves `L p = rhs`, `d_r p = g` after shifting `g` by a constant so the
/// data are compatible. Returns the zero-mean solution and the defect removed.
pub fn solve_neumann(grid: &std::sync::Arc<PolarGrid>, rhs: &[f64], g: &[f64]) -> Result<PressureSolve> {
    let defect = neumann_defect(grid, rhs, g);
    let shift = defect / (2.0 * PI);
    let projected: Vec<f64> = g.iter().map(|v| v + shift).collect();
    let solver = ModalSolver::new(grid.clone(), 0.0, 1.0, WallKind::Neumann)?;
    let p = solver.solve(rhs, &projected)?;
    let lap = laplacian_neumann(grid, &p, &projected);
    let res: Vec<f64> = lap.iter().zip(rhs).map(|(a, b)| a - b).collect();
    let poisson_residual = ScalarField::from_parts(grid.clone(), res, None).lp_norm(2.0)?;
    Ok(PressureSolve {
        p: ScalarField::from_parts(grid.clone(), p, None),
        poisson_residual,
        compatibility_defect: defect,
    })
}

/// Pressure of the snapshot `(u, omega)` at viscosity `nu`.
pub fn recover_pressure(u: &VectorField, omega: &ScalarField, nu: f64) -> Result<PressureSolve> {
    check_in_v(u)?;
    let grid = u.grid();
    let a = convective_acceleration(u);
    let (div_a, a_wall) = conservative_divergence(&a);
    let rhs: Vec<f64> = div_a.iter().map(|v| -v).collect();
    // Lap u . n = (perp grad omega) . n = -d_theta omega at r = 1.
    let d_omega = spectral::theta_derivative(grid, &omega.wall_values());
    let g: Vec<f64> = d_omega.iter().zip(&a_wall).map(|(dw, an)| -nu * dw - an).collect();
    let scale = 1.0 + a.lp_norm(2.0)?;
    let solve = solve_neumann(grid, &rhs, &g)?;
    if solve.compatibility_defect.abs() > DEFECT_TOLERANCE * scale {
        return Err(Error::CompatibilityDefect { defect: solve.compatibility_defect });
    }
    Ok(solve)
}

/// `||(u . grad) u||_2 + nu ||grad omega||_2 - ||grad p||_2`.
pub fn pressure_estimate_slack(p: &ScalarField, u: &VectorField, omega: &ScalarField, nu: f64) -> Result<PressureSlack> {
    let grad_p = p.gradient().lp_norm(2.0)?;
    let convective = convective_acceleration(u).lp_norm(2.0)?;
    let viscous = nu * omega.gradient().lp_norm(2.0)?;
    Ok(PressureSlack { grad_p, convective, viscous, slack: convective + viscous - grad_p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biot_savart::{biot_savart, random_smooth_vorticity};
    use std::sync::Arc;

    #[test]
    fn rigid_rotation_pressure_is_quadratic() {
        let g = Arc::new(PolarGrid::new(32, 16).unwrap());
        for c in [1.0, 0.5] {
            let u = VectorField::rigid_rotation(g.clone(), c).with_wall(Some(vec![0.0; 16]), None);
            let omega = ScalarField::constant(g.clone(), 2.0 * c);
            let sol = recover_pressure(&u, &omega, 0.1).unwrap();
            let shift = sol.p.values()[0] - c * c * g.r(0).powi(2) / 2.0;
            for (i, p) in sol.p.values().iter().enumerate() {
                let r = g.r(i / 16);
                assert!((p - shift - c * c * r * r / 2.0).abs() < 1e-10);
            }
            assert!((shift + c * c / 4.0).abs() < 1e-3);
            assert!(sol.p.mean().abs() < 1e-12);
            let slack = pressure_estimate_slack(&sol.p, &u, &omega, 0.1).unwrap();
            assert!(slack.slack.abs() < 1e-10 * slack.convective);
        }
    }

    #[test]
    fn zero_velocity_gives_zero_pressure() {
        let g = Arc::new(PolarGrid::new(8, 8).unwrap());
        let sol = recover_pressure(&VectorField::zeros(g.clone()), &ScalarField::zeros(g.clone()), 1.0).unwrap();
        assert_eq!(sol.p.max_abs(), 0.0);
        let s = pressure_estimate_slack(&sol.p, &VectorField::zeros(g.clone()), &ScalarField::zeros(g), 1.0).unwrap();
        assert_eq!(s.slack, 0.0);
    }

    #[test]
    fn compatibility_defect_is_roundoff_for_solver_velocities() {
        let g = Arc::new(PolarGrid::new(32, 32).unwrap());
        let omega = random_smooth_vorticity(11, g.clone());
        let u = biot_savart(&omega).unwrap();
        let sol = recover_pressure(&u, &omega, 0.05).unwrap();
        assert!(sol.compatibility_defect.abs() < 1e-12);
        assert!(sol.poisson_residual < 1e-8);
        assert!(sol.p.mean().abs() < 1e-12);
    }

    #[test]
    fn non_tangent_field_is_rejected() {
        let g = Arc::new(PolarGrid::new(16, 16).unwrap());
        let u = VectorField::from_cartesian_fn(g.clone(), |_, _| (1.0, 0.0));
        let omega = ScalarField::zeros(g);
        assert!(matches!(recover_pressure(&u, &omega, 0.0), Err(Error::NotInV { .. })));
    }
}
