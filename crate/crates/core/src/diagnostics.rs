//! Residuals of the wall conditions, the weak formulation and the shifted
//! enstrophy balance; the renormalized transport inequality; elliptic ratios.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::biot_savart::PoissonDirichletSolver;
use crate::error::{Error, Result};
use crate::field::{convective_acceleration, curl, divergence, perp_grad, ScalarField, VectorField};
use crate::grid::{BoundaryTrace, PolarGrid};
use crate::pressure::check_in_v;
use crate::solver::{bump, SeriesRow, Trajectory};
use crate::spectral;
use crate::stencil::{self, Parity};

/// Per-angle wall residuals and their max norms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NavierResiduals {
    /// `2 (Du)_S n.tau + alpha u.tau`.
    pub navier: Vec<f64>,
    /// `omega/2 - (Du)_S n.tau - kappa u.tau`.
    pub identity: Vec<f64>,
    /// `((n . grad) u) . tau + (alpha - kappa) u.tau`.
    pub normal_form: Vec<f64>,
    pub max_navier: f64,
    pub max_identity: f64,
    pub max_normal_form: f64,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn assemble(ut: &[f64], dr_ut: &[f64], dtheta_ur: &[f64], omega: &[f64], trace: &BoundaryTrace) -> NavierResiduals {
    let n = ut.len();
    let (mut navier, mut identity, mut normal_form) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for k in 0..n {
        let strain = 0.5 * (dr_ut[k] - ut[k] + dtheta_ur[k]);
        let (alpha, kappa) = (trace.alpha[k], trace.kappa[k]);
        navier[k] = 2.0 * strain + alpha * ut[k];
        identity[k] = 0.5 * omega[k] - strain - kappa * ut[k];
        normal_form[k] = dr_ut[k] + (alpha - kappa) * ut[k];
    }
    NavierResiduals {
        max_navier: max_abs(&navier),
        max_identity: max_abs(&identity),
        max_normal_form: max_abs(&normal_form),
        navier,
        identity,
        normal_form,
    }
}

/// Wall residuals from a velocity field, with one-sided radial derivatives
/// (wall traces are used where the field carries them).
pub fn navier_residuals(u: &VectorField, omega: &ScalarField, trace: &BoundaryTrace) -> NavierResiduals {
    let g = u.grid();
    let ut = u.wall_tangential();
    let (_, dr_ut) = stencil::radial_derivative(g, u.ut(), Parity::Odd, u.wall_ut());
    let dtheta_ur = spectral::theta_derivative(g, &u.wall_normal());
    assemble(&ut, &dr_ut, &dtheta_ur, &omega.wall_values(), trace)
}

/// Wall residuals of `u = perp_grad(psi)` computed from `psi` directly:
/// `u.tau = d_r psi`, `d_r u_theta = d_rr psi`, `d_theta u_r = -d_theta^2 psi`.
pub fn navier_residuals_from_stream(psi: &ScalarField, omega: &ScalarField, trace: &BoundaryTrace) -> NavierResiduals {
    let g = psi.grid();
    let ut = psi.wall_slope();
    let dr_ut = stencil::wall_second_derivative(g, psi.values(), psi.wall());
    let dtheta_ur: Vec<f64> = spectral::theta_second_derivative(g, &psi.wall_values())
        .into_iter()
        .map(|v| -v)
        .collect();
    assemble(&ut, &dr_ut, &dtheta_ur, &omega.wall_values(), trace)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualEntry {
    pub name: String,
    pub norm: String,
    pub value: f64,
    pub tolerance: Option<f64>,
    pub pass: Option<bool>,
}

/// Named residuals of one run or snapshot, serialized as JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub n_r: usize,
    pub n_theta: usize,
    pub entries: Vec<ResidualEntry>,
}

impl ResidualReport {
    pub fn new(grid: &PolarGrid) -> Self {
        Self { n_r: grid.n_r(), n_theta: grid.n_theta(), entries: Vec::new() }
    }

    pub fn push(&mut self, name: &str, norm: &str, value: f64, tolerance: Option<f64>) {
        self.entries.push(ResidualEntry {
            name: name.to_string(),
            norm: norm.to_string(),
            value,
            tolerance,
            pass: tolerance.map(|t| value <= t),
        });
    }

    pub fn get(&self, name: &str) -> Option<&ResidualEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass != Some(false))
    }
}

/// Centered differences in time, one-sided at both ends.
pub(crate) fn time_derivative(t: &[f64], f: &[f64]) -> Vec<f64> {
    let n = t.len();
    match n {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..n)
            .map(|k| {
                let (a, b) = if k == 0 {
                    (0, 1)
                } else if k == n - 1 {
                    (n - 2, n - 1)
                } else {
                    (k - 1, k + 1)
                };
                (f[b] - f[a]) / (t[b] - t[a])
            })
            .collect(),
    }
}

fn sum_products(a: &[ScalarField], b: &[ScalarField]) -> ScalarField {
    let grid = a[0].grid().clone();
    let mut out = vec![0.0; grid.len()];
    for (x, y) in a.iter().zip(b) {
        for (o, (p, q)) in out.iter_mut().zip(x.values().iter().zip(y.values())) {
            *o += p * q;
        }
    }
    ScalarField::from_parts(grid, out, None)
}

fn flatten(g: [[ScalarField; 2]; 2]) -> Vec<ScalarField> {
    let [[a, b], [c, d]] = g;
    vec![a, b, c, d]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakFormSeries {
    pub t: Vec<f64>,
    pub residual: Vec<f64>,
    pub max: f64,
    pub mean: f64,
}

/// `|d/dt int u.v + int (u.grad u).v + nu int grad u : grad v - nu oint (kappa - alpha) u.v|`
/// at every snapshot, for a test field `v` in `V`.
pub fn weak_form_residual(traj: &Trajectory, v: &VectorField, nu: f64, trace: &BoundaryTrace) -> Result<WeakFormSeries> {
    check_in_v(v)?;
    let grad_v = flatten(v.gradient());
    let v_wall = v.wall_tangential();
    let weight: Vec<f64> = trace.kappa.iter().zip(&trace.alpha).map(|(k, a)| k - a).collect();
    let grid = &traj.grid;

    let mut t = Vec::new();
    let mut mass = Vec::new();
    let mut rest = Vec::new();
    for snap in &traj.snapshots {
        t.push(snap.t);
        mass.push(snap.u.dot(v).integral());
        let transport = convective_acceleration(&snap.u).dot(v).integral();
        let dissipation = sum_products(&flatten(snap.u.gradient()), &grad_v).integral();
        let wall: Vec<f64> = (0..grid.n_theta())
            .map(|k| weight[k] * snap.wall_tangential[k] * v_wall[k])
            .collect();
        rest.push(transport + nu * dissipation - nu * grid.integrate_boundary(&wall));
    }
    let dm = time_derivative(&t, &mass);
    let residual: Vec<f64> = dm.iter().zip(&rest).map(|(a, b)| (a + b).abs()).collect();
    let max = max_abs(&residual);
    let mean = residual.iter().sum::<f64>() / residual.len().max(1) as f64;
    Ok(WeakFormSeries { t, residual, max, mean })
}

/// Quintic cutoff: 0 for `r <= 1/2`, 1 at `r = 1`, with vanishing first
/// derivative at both ends.
pub fn cutoff(r: f64) -> f64 {
    let s = (2.0 * r - 1.0).clamp(0.0, 1.0);
    s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
}

/// `eta(r) (2 kappa - alpha(theta)) e_theta`: an extension into the disk of
/// the wall tangent weighted by the vorticity factor.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedTangent {
    field: VectorField,
}

impl ExtendedTangent {
    pub fn new(grid: Arc<PolarGrid>, trace: &BoundaryTrace) -> Self {
        let factor = trace.vorticity_factor();
        let n_t = grid.n_theta();
        let mut ut = Vec::with_capacity(grid.len());
        for &r in grid.r_nodes() {
            let eta = cutoff(r);
            ut.extend(factor.iter().map(|f| eta * f));
        }
        let field = VectorField::from_parts(grid, vec![0.0; ut.len()], ut, Some(vec![0.0; n_t]), Some(factor));
        Self { field }
    }

    /// The degenerate cutoff `eta = 0`.
    pub fn zero(grid: Arc<PolarGrid>) -> Self {
        let n_t = grid.n_theta();
        let field = VectorField::zeros(grid).with_wall(Some(vec![0.0; n_t]), Some(vec![0.0; n_t]));
        Self { field }
    }

    pub fn field(&self) -> &VectorField {
        &self.field
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceSeries {
    pub t_start: Vec<f64>,
    pub t_end: Vec<f64>,
    /// `1/2 [||wbar||^2] + int nu ||grad wbar||^2 - int int f wbar` per interval.
    pub defect: Vec<f64>,
    pub max_abs: f64,
}

/// Per-snapshot terms of the shifted enstrophy balance:
/// `(int wbar^2, int |grad wbar|^2, int f wbar)`.
pub fn balance_terms(u: &VectorField, omega: &ScalarField, p: &ScalarField, tau_bar: &ExtendedTangent, nu: f64) -> Result<(f64, f64, f64)> {
    let tb = tau_bar.field();
    let grid = u.grid().clone();
    let n = grid.len();
    let u_dot_tb = u.dot(tb);
    let wbar = ScalarField::from_parts(
        grid.clone(),
        omega.values().iter().zip(u_dot_tb.values()).map(|(w, a)| w - a).collect(),
        None,
    );
    let [ux, uy] = u.to_cartesian();
    let [tx, ty] = tb.to_cartesian();
    let grad_t = [tx.cartesian_gradient(), ty.cartesian_gradient()];
    let grad_u = u.gradient();
    let grad_p = p.cartesian_gradient();
    let lap_t = [tx.laplacian(), ty.laplacian()];
    let uc = [ux.values(), uy.values()];
    let tc = [tx.values(), ty.values()];
    let mut f = vec![0.0; n];
    for i in 0..n {
        let mut transport = 0.0;
        let mut shear = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                transport += uc[a][i] * uc[b][i] * grad_t[a][b].values()[i];
                shear += grad_u[a][b].values()[i] * grad_t[a][b].values()[i];
            }
        }
        let pressure = grad_p[0].values()[i] * tc[0][i] + grad_p[1].values()[i] * tc[1][i];
        let lap = uc[0][i] * lap_t[0].values()[i] + uc[1][i] * lap_t[1].values()[i];
        f[i] = -transport + pressure + 2.0 * nu * shear + nu * lap;
    }
    let energy = wbar.map(|w| w * w).integral();
    let grad_w = wbar.gradient().lp_norm(2.0)?.powi(2);
    let forcing = grid.integrate(&f.iter().zip(wbar.values()).map(|(a, b)| a * b).collect::<Vec<_>>());
    Ok((energy, grad_w, forcing))
}

/// Defect of the shifted enstrophy balance between consecutive snapshots,
/// trapezoidal in time. `pressures[k]` belongs to snapshot `k`.
pub fn enstrophy_balance_residual(
    traj: &Trajectory,
    tau_bar: &ExtendedTangent,
    nu: f64,
    pressures: &[ScalarField],
) -> Result<BalanceSeries> {
    let mut terms = Vec::with_capacity(traj.snapshots.len());
    for (k, snap) in traj.snapshots.iter().enumerate() {
        let p = pressures.get(k).ok_or(Error::MissingPressure { index: k })?;
        terms.push((snap.t, balance_terms(&snap.u, &snap.omega, p, tau_bar, nu)?));
    }
    let mut out = BalanceSeries { t_start: vec![], t_end: vec![], defect: vec![], max_abs: 0.0 };
    for w in terms.windows(2) {
        let (t0, (e0, g0, f0)) = w[0];
        let (t1, (e1, g1, f1)) = w[1];
        let dt = t1 - t0;
        let defect = 0.5 * (e1 - e0) + 0.5 * dt * nu * (g0 + g1) - 0.5 * dt * (f0 + f1);
        out.t_start.push(t0);
        out.t_end.push(t1);
        out.defect.push(defect);
        out.max_abs = out.max_abs.max(defect.abs());
    }
    Ok(out)
}

/// Spatial profile `amplitude * bump(|x - center| / radius)` of the test
/// function `phi(t, x) = (1 - t/T)_+ * profile(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiSpec {
    pub center: [f64; 2],
    pub radius: f64,
    pub amplitude: f64,
}

impl PhiSpec {
    fn parts(&self, x: f64, y: f64) -> (f64, f64, f64, f64) {
        // (s, rho, bump(s), unit direction factor) helpers.
        let (dx, dy) = (x - self.center[0], y - self.center[1]);
        let rho = dx.hypot(dy);
        (rho / self.radius, rho, dx, dy)
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        let (s, ..) = self.parts(x, y);
        self.amplitude * bump(s)
    }

    pub fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        let (s, rho, dx, dy) = self.parts(x, y);
        if s >= 1.0 || rho == 0.0 {
            return (0.0, 0.0);
        }
        let q = 1.0 - s * s;
        let dbump = bump(s) * (-2.0 * s / (q * q));
        let radial = self.amplitude * dbump / self.radius;
        (radial * dx / rho, radial * dy / rho)
    }

    pub fn laplacian(&self, x: f64, y: f64) -> f64 {
        let (s, ..) = self.parts(x, y);
        if s >= 1.0 {
            return 0.0;
        }
        let q = 1.0 - s * s;
        let g = -2.0 * s / (q * q);
        let dg = -2.0 / (q * q) - 8.0 * s * s / (q * q * q);
        let b = bump(s);
        let d2 = b * (g * g + dg);
        // f'(rho)/rho = b g / (s R^2), with limit b''(0)/R^2 at the center.
        let d1_over = if s == 0.0 { d2 } else { b * (-2.0 / (q * q)) };
        self.amplitude * (d2 + d1_over) / (self.radius * self.radius)
    }

    fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) || self.center[0].hypot(self.center[1]) + self.radius >= 1.0 {
            return Err(Error::InvalidArgument("test function support must lie inside the disk".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlackReport {
    pub nu: f64,
    pub q: f64,
    /// `int_0^T int |omega|^q (phi_t + u.grad phi) + int |omega_0|^q phi(0)`.
    pub s: f64,
    /// `max(0, -S) / nu`, absent for `nu = 0`.
    pub measured_c: Option<f64>,
    /// `T ||Lap phi||_inf sup_t ||omega||_q^q`, the constant the viscous term
    /// of the transport identity can contribute at most.
    pub bound_c: f64,
}

/// Evaluates the renormalized inequality with `phi(t, x) = (1 - t/T)_+ profile(x)`
/// on the snapshots of `traj`; `q` must lie in `[1, p)`.
pub fn renormalized_slack(traj: &Trajectory, phi: &PhiSpec, q: f64, p: f64) -> Result<SlackReport> {
    if !(q >= 1.0 && q < p) {
        return Err(Error::InvalidArgument(format!("q = {q} must lie in [1, p = {p})")));
    }
    phi.validate()?;
    let grid = &traj.grid;
    let n_t = grid.n_theta();
    let mut profile = Vec::with_capacity(grid.len());
    let mut grad = Vec::with_capacity(grid.len());
    let mut lap_max = 0.0f64;
    for i in 0..grid.len() {
        let (x, y) = grid.xy(i / n_t, i % n_t);
        let v = phi.value(x, y);
        if v < 0.0 {
            return Err(Error::NegativeTestFunction { index: i, value: v });
        }
        profile.push(v);
        grad.push(phi.gradient(x, y));
        lap_max = lap_max.max(phi.laplacian(x, y).abs());
    }
    let big_t = traj.final_snapshot().t;
    let mut times = Vec::new();
    let mut integrand = Vec::new();
    let mut sup_q = 0.0f64;
    for snap in &traj.snapshots {
        let w = snap.omega.values();
        let [ux, uy] = snap.u.to_cartesian();
        let decay = (1.0 - snap.t / big_t).max(0.0);
        let vals: Vec<f64> = (0..grid.len())
            .map(|i| {
                let wq = w[i].abs().powf(q);
                let advect = ux.values()[i] * grad[i].0 + uy.values()[i] * grad[i].1;
                wq * (-profile[i] / big_t + decay * advect)
            })
            .collect();
        times.push(snap.t);
        integrand.push(grid.integrate(&vals));
        sup_q = sup_q.max(snap.omega.lp_norm(q)?.powf(q));
    }
    let mut s = 0.0;
    for k in 1..times.len() {
        s += 0.5 * (times[k] - times[k - 1]) * (integrand[k] + integrand[k - 1]);
    }
    let w0 = traj.snapshots[0].omega.values();
    s += grid.integrate(&(0..grid.len()).map(|i| w0[i].abs().powf(q) * profile[i]).collect::<Vec<_>>());
    let nu = traj.config.nu;
    let measured_c = (nu > 0.0).then(|| (-s).max(0.0) / nu);
    Ok(SlackReport { nu, q, s, measured_c, bound_c: big_t * lap_max * sup_q })
}

/// `||u||_{H^2} / (||Lap u||_2 + ||u||_2)` with `Lap u = perp_grad(curl u)`.
pub fn h2_ratio(u: &VectorField) -> Result<f64> {
    let l2 = u.lp_norm(2.0)?;
    let lap_u = perp_grad(&curl(u)).lp_norm(2.0)?;
    let denominator = lap_u + l2;
    if denominator < 1e-14 {
        return Err(Error::ZeroField { norm: denominator });
    }
    let first = flatten(u.gradient());
    let mut second_sq = 0.0;
    let mut first_sq = 0.0;
    for d in &first {
        first_sq += d.map(|v| v * v).integral();
        for dd in d.cartesian_gradient() {
            second_sq += dd.map(|v| v * v).integral();
        }
    }
    Ok((l2 * l2 + first_sq + second_sq).sqrt() / denominator)
}

/// Pointwise Frobenius norm of the Cartesian velocity gradient.
pub fn gradient_magnitude(u: &VectorField) -> ScalarField {
    let g = flatten(u.gradient());
    let grid = u.grid().clone();
    let values = (0..grid.len())
        .map(|i| g.iter().map(|d| d.values()[i].powi(2)).sum::<f64>().sqrt())
        .collect();
    ScalarField::from_parts(grid, values, None)
}

/// `||grad K(omega)||_p / ||omega||_p`.
pub fn calderon_zygmund_ratio(solver: &PoissonDirichletSolver, omega: &ScalarField, p: f64) -> Result<f64> {
    let norm = omega.lp_norm(p)?;
    if norm < 1e-14 {
        return Err(Error::ZeroField { norm });
    }
    let (_, u) = solver.velocity(omega)?;
    Ok(gradient_magnitude(&u).lp_norm(p)? / norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyCheck {
    /// Every step satisfies `E_(k+1) - E_k <= tol E_0 (t_(k+1) - t_k)`.
    pub ok: bool,
    /// Largest `(E_(k+1) - E_k) / (E_0 dt)` over the series.
    pub worst_rate: f64,
    /// `max_t log(E(t)/E(0)) / (nu t)`, absent for `nu = 0`.
    pub growth_constant: Option<f64>,
}

/// Relative energy growth tolerated per unit time.
pub const ENERGY_TOLERANCE: f64 = 1e-6;

pub fn energy_check(series: &[SeriesRow], nu: f64) -> EnergyCheck {
    let e0 = series.first().map_or(0.0, |r| r.energy);
    if e0 == 0.0 {
        let ok = series.iter().all(|r| r.energy == 0.0);
        return EnergyCheck { ok, worst_rate: 0.0, growth_constant: (nu > 0.0).then_some(0.0) };
    }
    let mut worst = f64::NEG_INFINITY;
    for w in series.windows(2) {
        worst = worst.max((w[1].energy - w[0].energy) / (e0 * (w[1].t - w[0].t)));
    }
    if series.len() < 2 {
        worst = 0.0;
    }
    let growth = (nu > 0.0).then(|| {
        series
            .iter()
            .filter(|r| r.t > 0.0)
            .map(|r| (r.energy / e0).ln() / (nu * r.t))
            .fold(f64::NEG_INFINITY, f64::max)
    });
    EnergyCheck { ok: worst <= ENERGY_TOLERANCE, worst_rate: worst, growth_constant: growth }
}

/// Discrete `|| div u ||_2`, exposed for reports.
pub fn divergence_norm(u: &VectorField) -> Result<f64> {
    divergence(u).lp_norm(2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biot_savart::{random_smooth_vorticity, NavierSample};
    use crate::grid::AlphaSpec;

    fn grid(n_r: usize, n_t: usize) -> Arc<PolarGrid> {
        Arc::new(PolarGrid::new(n_r, n_t).unwrap())
    }

    #[test]
    fn rigid_rotation_has_zero_free_slip_residuals() {
        let g = grid(32, 16);
        let trace = BoundaryTrace::new(&g, &AlphaSpec::Const(0.0)).unwrap();
        let omega = ScalarField::constant(g.clone(), 2.0);
        let psi = crate::biot_savart::solve_poisson_dirichlet(&omega).unwrap();
        let u = perp_grad(&psi);
        for res in [navier_residuals(&u, &omega, &trace), navier_residuals_from_stream(&psi, &omega, &trace)] {
            assert!(res.max_navier < 1e-10);
            assert!(res.max_identity < 1e-10);
            assert!(res.max_normal_form < 1e-10);
        }
    }

    #[test]
    fn sampled_navier_field_residual_converges_at_second_order() {
        let s = NavierSample::random(5, 1.0).unwrap();
        let res = |n: usize| {
            let g = grid(n, 32);
            let trace = BoundaryTrace::new(&g, &AlphaSpec::Const(1.0)).unwrap();
            let u = s.velocity_field(g.clone());
            let w = s.vorticity_field(g.clone());
            navier_residuals(&u, &w, &trace).max_navier
        };
        let (e1, e2) = (res(64), res(128));
        assert!((e1 / e2).log2() >= 1.9, "{e1} {e2}");
        assert!(s.max_wall_residual(256) <= 1e-8);
    }

    #[test]
    fn cutoff_is_smooth_step() {
        assert_eq!(cutoff(0.3), 0.0);
        assert_eq!(cutoff(0.5), 0.0);
        assert_eq!(cutoff(1.0), 1.0);
        let h = 1e-6;
        assert!(((cutoff(1.0) - cutoff(1.0 - h)) / h).abs() < 1e-4);
        assert!(((cutoff(0.5 + h) - cutoff(0.5)) / h).abs() < 1e-4);
    }

    #[test]
    fn phi_derivatives_match_finite_differences() {
        let phi = PhiSpec { center: [0.1, -0.2], radius: 0.5, amplitude: 2.0 };
        let (x, y, h) = (0.25, -0.05, 1e-4);
        let (gx, gy) = phi.gradient(x, y);
        assert!((gx - (phi.value(x + h, y) - phi.value(x - h, y)) / (2.0 * h)).abs() < 1e-6);
        assert!((gy - (phi.value(x, y + h) - phi.value(x, y - h)) / (2.0 * h)).abs() < 1e-6);
        let lap = (phi.value(x + h, y) + phi.value(x - h, y) + phi.value(x, y + h) + phi.value(x, y - h)
            - 4.0 * phi.value(x, y))
            / (h * h);
        assert!((phi.laplacian(x, y) - lap).abs() < 1e-4);
        let c = phi.laplacian(0.1, -0.2);
        let lap0 = (phi.value(0.1 + h, -0.2) + phi.value(0.1 - h, -0.2) + phi.value(0.1, -0.2 + h)
            + phi.value(0.1, -0.2 - h)
            - 4.0 * phi.value(0.1, -0.2))
            / (h * h);
        assert!((c - lap0).abs() < 1e-3);
    }

    #[test]
    fn h2_ratio_of_rigid_rotation_is_sqrt_five() {
        let g = grid(64, 64);
        let u = VectorField::rigid_rotation(g.clone(), 1.0);
        assert!((h2_ratio(&u).unwrap() - 5f64.sqrt()).abs() < 1e-2);
        assert!(matches!(h2_ratio(&VectorField::zeros(g)), Err(Error::ZeroField { .. })));
    }

    #[test]
    fn cz_ratio_is_finite() {
        let g = grid(32, 32);
        let solver = PoissonDirichletSolver::new(g.clone()).unwrap();
        let w = random_smooth_vorticity(1, g);
        let r = calderon_zygmund_ratio(&solver, &w, 2.0).unwrap();
        assert!(r.is_finite() && r > 0.1 && r < 10.0);
    }

    #[test]
    fn time_derivative_is_exact_on_quadratics_in_the_interior() {
        let t = [0.0, 0.1, 0.3, 0.6];
        let f: Vec<f64> = t.iter().map(|s| s * 2.0 + 1.0).collect();
        assert!(time_derivative(&t, &f).iter().all(|d| (d - 2.0).abs() < 1e-12));
    }
}
