//! Time integration of the vorticity equation with the Navier-slip wall
//! condition imposed as Dirichlet data for the vorticity.
//!
//! Advection is explicit (Heun), diffusion is Crank-Nicolson per Fourier mode.
//! The wall vorticity `(2 kappa - alpha) u.tau` is lagged by one stage.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::biot_savart::PoissonDirichletSolver;
use crate::diagnostics::navier_residuals_from_stream;
use crate::error::{Error, Result};
use crate::field::{boundary_tangential_velocity, perp_grad, ScalarField, VectorField};
use crate::grid::{AlphaSpec, BoundaryTrace, PolarGrid};
use crate::modal::{ModalSolver, WallKind};
use crate::spectral;

/// Advective CFL number used for automatic and checked time steps.
pub const CFL: f64 = 0.5;
/// Automatic steps are re-evaluated after this many steps.
pub const DT_REFRESH: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

/// `"auto"` or a fixed positive step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DtSpec {
    Auto(AutoTag),
    Fixed(f64),
}

impl Default for DtSpec {
    fn default() -> Self {
        DtSpec::Auto(AutoTag::Auto)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialCondition {
    Const(f64),
    /// `amplitude * exp(1 - 1/(1 - (d/radius)^2))` inside the ball.
    Bump { center: [f64; 2], radius: f64, amplitude: f64 },
    /// `min(M, |x - center|^-gamma)` with cap `M = dr^-gamma`; needs `gamma * p < 2`.
    Singular { center: [f64; 2], gamma: f64, p: f64 },
    /// `(k, [c_0, c_1, ...])`: `cos(k theta) sum c_l r^(|k| + 2l)`; negative `k` uses `sin`.
    Modes(Vec<(i64, Vec<f64>)>),
}

impl InitialCondition {
    pub fn sample(&self, grid: Arc<PolarGrid>) -> Result<ScalarField> {
        let field = match self {
            InitialCondition::Const(c) => ScalarField::constant(grid, *c),
            InitialCondition::Bump { center, radius, amplitude } => {
                if *radius <= 0.0 {
                    return Err(Error::InvalidArgument("bump radius must be positive".into()));
                }
                let (cx, cy, rad, amp) = (center[0], center[1], *radius, *amplitude);
                ScalarField::from_fn(grid, |r, t| amp * bump((r * t.cos() - cx).hypot(r * t.sin() - cy) / rad))
            }
            InitialCondition::Singular { center, gamma, p } => {
                if *gamma <= 0.0 || gamma * p >= 2.0 {
                    return Err(Error::InvalidArgument(format!(
                        "singular data needs 0 < gamma and gamma * p < 2 (gamma = {gamma}, p = {p})"
                    )));
                }
                let cap = grid.dr().powf(-gamma);
                let (cx, cy, g) = (center[0], center[1], *gamma);
                ScalarField::from_fn(grid, |r, t| {
                    let d = (r * t.cos() - cx).hypot(r * t.sin() - cy);
                    if d == 0.0 {
                        cap
                    } else {
                        d.powf(-g).min(cap)
                    }
                })
            }
            InitialCondition::Modes(modes) => {
                let modes = modes.clone();
                ScalarField::from_fn(grid, move |r, t| {
                    modes
                        .iter()
                        .map(|(k, coeffs)| {
                            let ka = k.unsigned_abs() as i32;
                            let angular = if *k >= 0 { (ka as f64 * t).cos() } else { (ka as f64 * t).sin() };
                            let radial: f64 =
                                coeffs.iter().enumerate().map(|(l, c)| c * r.powi(ka + 2 * l as i32)).sum();
                            angular * radial
                        })
                        .sum()
                })
            }
        };
        if !field.is_finite() {
            return Err(Error::NonFinite { what: "initial condition".into() });
        }
        Ok(field)
    }
}

/// Smooth compactly supported bump on the unit ball, `bump(0) = 1`.
pub fn bump(s: f64) -> f64 {
    if s >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

/// Verdict tolerances for the residual diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub navier: f64,
    pub weakform: f64,
    pub balance: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { navier: 5e-2, weakform: 1e-2, balance: 1e-2 }
    }
}

fn default_stride() -> usize {
    10
}

fn default_p() -> Vec<f64> {
    vec![2.0, 4.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub nu: f64,
    pub t_end: f64,
    #[serde(default)]
    pub dt: DtSpec,
    pub n_r: usize,
    pub n_theta: usize,
    #[serde(default)]
    pub alpha: AlphaSpec,
    pub initial_condition: InitialCondition,
    #[serde(default = "default_stride")]
    pub output_stride: usize,
    /// When set, steps are shortened to land on multiples of this interval
    /// and snapshots are taken there instead of every `output_stride` steps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<f64>,
    /// Exponents of the recorded enstrophy norms.
    #[serde(default = "default_p")]
    pub enstrophy_p: Vec<f64>,
    #[serde(default)]
    pub tol: Tolerances,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(Error::InvalidArgument(format!("nu = {} must be >= 0", self.nu)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidArgument(format!("t_end = {} must be > 0", self.t_end)));
        }
        if let DtSpec::Fixed(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::InvalidArgument(format!("dt = {dt} must be > 0")));
            }
        }
        if self.output_stride == 0 {
            return Err(Error::InvalidArgument("output_stride must be >= 1".into()));
        }
        if let Some(iv) = self.snapshot_every {
            if !(iv > 0.0 && iv.is_finite()) {
                return Err(Error::InvalidArgument(format!("snapshot_every = {iv} must be > 0")));
            }
        }
        if self.enstrophy_p.iter().any(|p| !(*p >= 1.0)) {
            return Err(Error::InvalidArgument("enstrophy exponents must be >= 1".into()));
        }
        PolarGrid::new(self.n_r, self.n_theta)?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Arc<PolarGrid>> {
        Ok(Arc::new(PolarGrid::new(self.n_r, self.n_theta)?))
    }
}

/// `(2 kappa - alpha) u.tau` at the wall.
pub fn vorticity_boundary(psi: &ScalarField, trace: &BoundaryTrace) -> Vec<f64> {
    let ut = boundary_tangential_velocity(psi);
    trace.vorticity_factor().iter().zip(ut).map(|(f, u)| f * u).collect()
}

/// Largest stable step `CFL * min(dr, r_1 dtheta) / max|u|`.
pub fn cfl_limit(grid: &PolarGrid, u: &VectorField) -> f64 {
    let max_u = u.max_magnitude();
    if max_u == 0.0 {
        f64::INFINITY
    } else {
        CFL * grid.min_spacing() / max_u
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub omega: ScalarField,
    pub psi: ScalarField,
    pub u: VectorField,
}

/// Reusable factorizations for one `(grid, nu, trace)`.
pub struct Stepper {
    grid: Arc<PolarGrid>,
    trace: BoundaryTrace,
    nu: f64,
    poisson: PoissonDirichletSolver,
    diffusion: Option<(f64, ModalSolver)>,
    steps: usize,
}

impl Stepper {
    pub fn new(grid: Arc<PolarGrid>, trace: BoundaryTrace, nu: f64) -> Result<Self> {
        if trace.len() != grid.n_theta() {
            return Err(Error::InvalidArgument("trace does not match grid".into()));
        }
        let poisson = PoissonDirichletSolver::new(grid.clone())?;
        Ok(Self { grid, trace, nu, poisson, diffusion: None, steps: 0 })
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        &self.grid
    }

    pub fn trace(&self) -> &BoundaryTrace {
        &self.trace
    }

    pub fn poisson(&self) -> &PoissonDirichletSolver {
        &self.poisson
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    pub fn state(&self, t: f64, omega: ScalarField) -> Result<State> {
        let (psi, u) = self.poisson.velocity(&omega)?;
        Ok(State { t, omega, psi, u })
    }

    /// `-u . grad(omega)`, dealiased in the angle and filtered near the pole.
    fn advection(&self, omega: &ScalarField, u: &VectorField) -> Vec<f64> {
        let g = &*self.grid;
        let n_t = g.n_theta();
        let d_r = omega.dr();
        let d_t = spectral::theta_derivative(g, omega.values());
        let raw: Vec<f64> = (0..g.len())
            .map(|i| -(u.ur()[i] * d_r.values()[i] + u.ut()[i] * d_t[i] / g.r(i / n_t)))
            .collect();
        spectral::dealias_polar(g, &raw)
    }

    fn diffusion_solver(&mut self, dt: f64) -> Result<&ModalSolver> {
        let stale = !matches!(&self.diffusion, Some((d, _)) if *d == dt);
        if stale {
            let c = 0.5 * self.nu * dt;
            self.diffusion = Some((dt, ModalSolver::new(self.grid.clone(), 1.0, -c, WallKind::Dirichlet)?));
        }
        Ok(&self.diffusion.as_ref().expect("just built").1)
    }

    /// One step of size `dt`. Fails if `dt` breaks the advective CFL bound or
    /// the result is not finite.
    pub fn step(&mut self, state: &State, dt: f64) -> Result<State> {
        let limit = cfl_limit(&self.grid, &state.u);
        if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
            return Err(Error::Cfl { max_u: state.u.max_magnitude(), dt, limit });
        }
        let next = self.advance(state, dt);
        self.steps += 1;
        match next {
            Ok(s) if s.omega.is_finite() && s.u.is_finite() => Ok(s),
            Ok(_) | Err(Error::NonFinite { .. }) => Err(Error::Divergence { step: self.steps, t: state.t + dt }),
            Err(e) => Err(e),
        }
    }

    fn advance(&mut self, state: &State, dt: f64) -> Result<State> {
        let g = self.grid.clone();
        let n0 = self.advection(&state.omega, &state.u);
        if self.nu == 0.0 {
            let stage: Vec<f64> = state.omega.values().iter().zip(&n0).map(|(w, n)| w + dt * n).collect();
            let stage = self.state(state.t + dt, ScalarField::from_parts(g.clone(), stage, None))?;
            let n1 = self.advection(&stage.omega, &stage.u);
            let values = (0..g.len())
                .map(|i| state.omega.values()[i] + 0.5 * dt * (n0[i] + n1[i]))
                .collect();
            return self.state(state.t + dt, ScalarField::from_parts(g, values, None));
        }

        let c = 0.5 * self.nu * dt;
        let lap = state.omega.laplacian();
        let explicit: Vec<f64> = (0..g.len()).map(|i| state.omega.values()[i] + c * lap.values()[i]).collect();

        let wall_n = vorticity_boundary(&state.psi, &self.trace);
        let rhs: Vec<f64> = (0..g.len()).map(|i| explicit[i] + dt * n0[i]).collect();
        let star = self.diffusion_solver(dt)?.solve(&rhs, &wall_n)?;
        let star = self.state(state.t + dt, ScalarField::from_parts(g.clone(), star, Some(wall_n)))?;

        let n1 = self.advection(&star.omega, &star.u);
        let wall_star = vorticity_boundary(&star.psi, &self.trace);
        let rhs: Vec<f64> = (0..g.len()).map(|i| explicit[i] + 0.5 * dt * (n0[i] + n1[i])).collect();
        let next = self.diffusion_solver(dt)?.solve(&rhs, &wall_star)?;
        self.state(state.t + dt, ScalarField::from_parts(g, next, Some(wall_star)))
    }
}

/// One step from `(omega, psi)`: returns `(omega', psi')`.
pub fn step(
    omega: &ScalarField,
    psi: &ScalarField,
    config: &SimConfig,
    trace: &BoundaryTrace,
    dt: f64,
) -> Result<(ScalarField, ScalarField)> {
    let mut stepper = Stepper::new(omega.grid().clone(), trace.clone(), config.nu)?;
    let state = State { t: 0.0, omega: omega.clone(), psi: psi.clone(), u: perp_grad(psi) };
    let next = stepper.step(&state, dt)?;
    Ok((next.omega, next.psi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub omega: ScalarField,
    pub psi: ScalarField,
    pub u: VectorField,
    /// `u . tau` at the wall.
    pub wall_tangential: Vec<f64>,
}

impl Snapshot {
    pub fn of(state: &State) -> Self {
        Self {
            t: state.t,
            omega: state.omega.clone(),
            psi: state.psi.clone(),
            u: state.u.clone(),
            wall_tangential: boundary_tangential_velocity(&state.psi),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub t: f64,
    /// `||u||_2^2`.
    pub energy: f64,
    /// `||omega||_p` for each configured `p`.
    pub enstrophy: Vec<f64>,
    /// Max over the wall of the Navier residual `2 (Du)_S n.tau + alpha u.tau`.
    pub bc_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// The configuration with `dt` replaced by the first step actually used.
    pub config: SimConfig,
    pub grid: Arc<PolarGrid>,
    pub trace: BoundaryTrace,
    pub snapshots: Vec<Snapshot>,
    pub series: Vec<SeriesRow>,
    pub steps: usize,
    pub dt_min: f64,
    pub dt_max: f64,
}

impl Trajectory {
    pub fn final_snapshot(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectories hold at least the initial snapshot")
    }

    /// Snapshot whose time is closest to `t`.
    pub fn snapshot_near(&self, t: f64) -> &Snapshot {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .expect("non-empty")
    }
}

fn series_row(state: &State, p_list: &[f64], trace: &BoundaryTrace) -> Result<SeriesRow> {
    let energy = state.u.lp_norm(2.0)?.powi(2);
    let enstrophy = p_list.iter().map(|&p| state.omega.lp_norm(p)).collect::<Result<Vec<_>>>()?;
    let bc_residual = navier_residuals_from_stream(&state.psi, &state.omega, trace).max_navier;
    Ok(SeriesRow { t: state.t, energy, enstrophy, bc_residual })
}

/// Runs `config` from its initial condition to `t_end`.
pub fn simulate(config: &SimConfig) -> Result<Trajectory> {
    config.validate()?;
    let grid = config.grid()?;
    let omega0 = config.initial_condition.sample(grid.clone())?;
    simulate_from(config, omega0)
}

/// Runs `config` from the supplied initial vorticity.
pub fn simulate_from(config: &SimConfig, omega0: ScalarField) -> Result<Trajectory> {
    config.validate()?;
    let grid = omega0.grid().clone();
    if grid.n_r() != config.n_r || grid.n_theta() != config.n_theta {
        return Err(Error::InvalidArgument("initial vorticity grid does not match config".into()));
    }
    let trace = BoundaryTrace::new(&grid, &config.alpha)?;
    let wrap = |t: f64, e: Error| Error::Simulation { nu: config.nu, t, source: Box::new(e) };

    let mut stepper = Stepper::new(grid.clone(), trace.clone(), config.nu).map_err(|e| wrap(0.0, e))?;
    let mut state = stepper.state(0.0, omega0).map_err(|e| wrap(0.0, e))?;
    let mut snapshots = vec![Snapshot::of(&state)];
    let mut series = vec![series_row(&state, &config.enstrophy_p, &trace).map_err(|e| wrap(0.0, e))?];

    let auto_dt = |u: &VectorField| {
        let limit = cfl_limit(&grid, u);
        // Fall back to a handful of steps per unit time for a quiescent flow.
        (0.9 * limit).min(0.1).min(config.t_end)
    };
    let mut dt = match config.dt {
        DtSpec::Fixed(dt) => dt,
        DtSpec::Auto(_) => auto_dt(&state.u),
    };
    let first_dt = dt;
    let (mut dt_min, mut dt_max) = (f64::INFINITY, 0.0f64);
    let mut n = 0usize;
    let eps = 1e-12 * config.t_end;
    while state.t < config.t_end - eps {
        if matches!(config.dt, DtSpec::Auto(_)) && (n.is_multiple_of(DT_REFRESH) || dt > cfl_limit(&grid, &state.u)) {
            dt = auto_dt(&state.u);
        }
        let target = match config.snapshot_every {
            Some(iv) => (config.t_end).min(iv * ((state.t + eps) / iv).floor() + iv),
            None => config.t_end,
        };
        let remaining = target - state.t;
        let this_dt = if dt >= remaining - eps { remaining } else { dt };
        let next = stepper.step(&state, this_dt).map_err(|e| wrap(state.t, e))?;
        state = next;
        n += 1;
        let landed = (target - state.t).abs() <= eps;
        if landed {
            state.t = target;
        }
        dt_min = dt_min.min(this_dt);
        dt_max = dt_max.max(this_dt);
        series.push(series_row(&state, &config.enstrophy_p, &trace).map_err(|e| wrap(state.t, e))?);
        let due = match config.snapshot_every {
            Some(_) => landed,
            None => n.is_multiple_of(config.output_stride),
        };
        if due || state.t >= config.t_end {
            snapshots.push(Snapshot::of(&state));
        }
    }

    let mut resolved = config.clone();
    resolved.dt = DtSpec::Fixed(first_dt);
    Ok(Trajectory { config: resolved, grid, trace, snapshots, series, steps: n, dt_min, dt_max })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rigid_config(nu: f64, n: usize, t_end: f64) -> SimConfig {
        SimConfig {
            nu,
            t_end,
            dt: DtSpec::default(),
            n_r: n,
            n_theta: n,
            alpha: AlphaSpec::Const(0.0),
            initial_condition: InitialCondition::Const(2.0),
            output_stride: 50,
            snapshot_every: None,
            enstrophy_p: vec![2.0],
            tol: Tolerances::default(),
        }
    }

    #[test]
    fn config_json_forms() {
        let c: SimConfig = serde_json::from_str(
            r#"{"nu":0.01,"t_end":1,"dt":"auto","n_r":32,"n_theta":32,
                "alpha":{"fourier":[[0,1,0],[1,0.5,0]]},
                "initial_condition":{"bump":{"center":[0.2,0],"radius":0.4,"amplitude":1}}}"#,
        )
        .unwrap();
        assert_eq!(c.dt, DtSpec::Auto(AutoTag::Auto));
        assert_eq!(c.output_stride, 10);
        let c: SimConfig = serde_json::from_str(
            r#"{"nu":0,"t_end":1,"dt":0.001,"n_r":8,"n_theta":8,"initial_condition":{"modes":[[0,[1,2]],[-2,[1]]]}}"#,
        )
        .unwrap();
        assert_eq!(c.dt, DtSpec::Fixed(0.001));
        let w = c.initial_condition.sample(c.grid().unwrap()).unwrap();
        let g = c.grid().unwrap();
        let (r, t) = (g.r(3), g.theta(1));
        assert!((w.at(3, 1) - (1.0 + 2.0 * r * r + r * r * (2.0 * t).sin())).abs() < 1e-14);
    }

    #[test]
    fn vorticity_boundary_examples() {
        let g = Arc::new(PolarGrid::new(16, 16).unwrap());
        let psi = ScalarField::from_fn(g.clone(), |r, _| (r * r - 1.0) / 4.0);
        for (alpha, expect) in [(0.0, 1.0), (1.0, 0.5), (2.0, 0.0)] {
            let trace = BoundaryTrace::new(&g, &AlphaSpec::Const(alpha)).unwrap();
            assert!(vorticity_boundary(&psi, &trace).iter().all(|v| (v - expect).abs() < 1e-12));
        }
    }

    #[test]
    fn rigid_rotation_is_steady_for_one_step() {
        for nu in [0.0, 0.1] {
            let cfg = rigid_config(nu, 16, 1.0);
            let g = cfg.grid().unwrap();
            let trace = BoundaryTrace::new(&g, &cfg.alpha).unwrap();
            let omega = ScalarField::constant(g.clone(), 2.0);
            let psi = crate::biot_savart::solve_poisson_dirichlet(&omega).unwrap();
            let (w, _) = step(&omega, &psi, &cfg, &trace, 1e-3).unwrap();
            assert!(w.values().iter().all(|v| (v - 2.0).abs() < 1e-10));
        }
    }

    #[test]
    fn cfl_violation_is_reported() {
        let cfg = rigid_config(0.0, 16, 1.0);
        let g = cfg.grid().unwrap();
        let trace = BoundaryTrace::new(&g, &cfg.alpha).unwrap();
        let omega = ScalarField::constant(g.clone(), 2.0);
        let psi = crate::biot_savart::solve_poisson_dirichlet(&omega).unwrap();
        match step(&omega, &psi, &cfg, &trace, 1.0) {
            Err(Error::Cfl { max_u, dt, .. }) => {
                assert!(max_u > 0.9 && dt == 1.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn simulate_hits_t_end_and_records_snapshots() {
        let traj = simulate(&rigid_config(0.1, 16, 0.05)).unwrap();
        assert_eq!(traj.final_snapshot().t, 0.05);
        assert_eq!(traj.series.len(), traj.steps + 1);
        assert!(traj.series.windows(2).all(|w| w[1].t > w[0].t));
        assert!(traj.snapshots.windows(2).all(|w| w[1].t > w[0].t));
        assert!(matches!(traj.config.dt, DtSpec::Fixed(_)));
    }

    #[test]
    fn snapshot_interval_fixes_snapshot_times() {
        let mut cfg = rigid_config(0.1, 16, 0.1);
        cfg.snapshot_every = Some(0.025);
        let traj = simulate(&cfg).unwrap();
        let times: Vec<f64> = traj.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(times.len(), 5);
        for (k, t) in times.iter().enumerate() {
            assert!((t - 0.025 * k as f64).abs() < 1e-12, "{times:?}");
        }
    }

    #[test]
    fn singular_data_requires_gamma_p_below_two() {
        let g = Arc::new(PolarGrid::new(8, 8).unwrap());
        let bad = InitialCondition::Singular { center: [0.0, 0.0], gamma: 0.6, p: 4.0 };
        assert!(bad.sample(g.clone()).is_err());
        let ok = InitialCondition::Singular { center: [0.1, 0.0], gamma: 0.4, p: 4.0 };
        let w = ok.sample(g.clone()).unwrap();
        assert!(w.max_abs() <= g.dr().powf(-0.4) + 1e-12);
    }
}
