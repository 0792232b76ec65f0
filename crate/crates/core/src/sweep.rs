//! The vanishing-viscosity experiment: one initial vorticity, a descending
//! list of viscosities, and an Euler reference on a refined grid.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{energy_check, renormalized_slack, PhiSpec};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::PolarGrid;
use crate::solver::{simulate, DtSpec, SimConfig, Trajectory};

fn default_factor() -> usize {
    2
}

fn default_phi() -> PhiSpec {
    PhiSpec { center: [0.0, 0.0], radius: 0.7, amplitude: 1.0 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub base: SimConfig,
    /// Strictly descending, positive.
    pub nu_list: Vec<f64>,
    /// Exponents of the compared norms, each in `[1, p)`.
    pub q_list: Vec<f64>,
    /// Integrability exponent of the initial vorticity, `p > 2`.
    pub p: f64,
    #[serde(default = "default_factor")]
    pub euler_refinement_factor: usize,
    /// Spatial profile of the renormalized test function.
    #[serde(default = "default_phi")]
    pub phi: PhiSpec,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.nu_list.is_empty() || self.nu_list.iter().any(|&nu| !(nu > 0.0)) {
            return bad("nu_list must hold positive viscosities".into());
        }
        if self.nu_list.windows(2).any(|w| w[1] >= w[0]) {
            return bad("nu_list must be strictly descending".into());
        }
        if !(self.p > 2.0) {
            return bad(format!("p = {} must exceed 2", self.p));
        }
        if self.q_list.is_empty() || self.q_list.iter().any(|&q| !(q >= 1.0 && q < self.p)) {
            return bad(format!("every q must lie in [1, p = {})", self.p));
        }
        if self.euler_refinement_factor < 2 {
            return bad("euler_refinement_factor must be >= 2".into());
        }
        Ok(())
    }

    /// The base configuration with snapshot times pinned, so every run of
    /// the sweep is sampled at the same instants.
    fn pinned_base(&self) -> SimConfig {
        let mut base = self.base.clone();
        if base.snapshot_every.is_none() {
            base.snapshot_every = Some(base.t_end / 20.0);
        }
        if !base.enstrophy_p.contains(&self.p) {
            base.enstrophy_p.push(self.p);
        }
        base
    }
}

/// Samples `fine` (on a grid refined by an integer factor) at the nodes of
/// `coarse`: angles coincide, radii are interpolated linearly.
pub fn restrict(fine: &ScalarField, coarse: &std::sync::Arc<PolarGrid>) -> Result<ScalarField> {
    let fg = fine.grid();
    if !fg.n_r().is_multiple_of(coarse.n_r()) || !fg.n_theta().is_multiple_of(coarse.n_theta()) {
        return Err(Error::InvalidArgument("fine grid is not an integer refinement".into()));
    }
    let ft = fg.n_theta() / coarse.n_theta();
    let h = fg.dr();
    let mut values = Vec::with_capacity(coarse.len());
    for &r in coarse.r_nodes() {
        let x = r / h - 0.5;
        let j0 = (x.floor() as usize).min(fg.n_r() - 2);
        let w = x - j0 as f64;
        for k in 0..coarse.n_theta() {
            values.push((1.0 - w) * fine.at(j0, k * ft) + w * fine.at(j0 + 1, k * ft));
        }
    }
    ScalarField::new(coarse.clone(), values)
}

fn refined(base: &SimConfig, factor: usize) -> SimConfig {
    let mut c = base.clone();
    c.nu = 0.0;
    c.n_r *= factor;
    c.n_theta *= factor;
    if let DtSpec::Fixed(dt) = c.dt {
        c.dt = DtSpec::Fixed(dt / factor as f64);
    }
    c
}

/// `sup_t ||a(t) - b(t)||_q` over snapshots at matching times.
fn sup_difference(a: &Trajectory, b: &[(f64, ScalarField)], q: f64) -> Result<f64> {
    let mut sup = 0.0f64;
    for snap in &a.snapshots {
        let (tb, wb) = b
            .iter()
            .min_by(|x, y| (x.0 - snap.t).abs().total_cmp(&(y.0 - snap.t).abs()))
            .ok_or_else(|| Error::InvalidArgument("empty reference".into()))?;
        if (tb - snap.t).abs() > 1e-9 * (1.0 + snap.t) {
            return Err(Error::InvalidArgument(format!("no reference snapshot at t = {}", snap.t)));
        }
        sup = sup.max((&snap.omega - wb).lp_norm(q)?);
    }
    Ok(sup)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub nu: f64,
    /// `sup_t ||omega^nu - omega^E||_q`, one entry per `q`.
    pub sup_lq_diff: Vec<f64>,
    /// `sup_t ||omega^nu||_p`.
    pub sup_lp_enstrophy: f64,
    pub energy_ok: bool,
    pub energy_growth_constant: Option<f64>,
    /// `S(nu)` with exponent `q_list[0]`.
    pub renorm_slack: f64,
    /// `max(0, -S) / nu`.
    pub renorm_constant: f64,
    pub steps: usize,
    pub dt_first: f64,
    pub wall_ms: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    /// Echo of the configuration with snapshot times and dt resolved.
    pub config: SweepConfig,
    /// `sup_t ||omega^E_base - omega^E_fine||_q`: the Euler self-convergence
    /// floor, one entry per `q`.
    pub euler_floor: Vec<f64>,
    /// `sup_t ||omega^E||_p` of the refined reference.
    pub euler_sup_lp: f64,
    pub rows: Vec<SweepRow>,
    /// Largest `renorm_constant` over the sweep.
    pub renorm_constant: f64,
}

impl ConvergenceReport {
    /// Frozen CSV schema, one line per `(nu, q)`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "nu,q,sup_lq_diff,sup_lp_enstrophy,energy_ok,renorm_slack,wall_ms")?;
        for row in &self.rows {
            for (q, d) in self.config.q_list.iter().zip(&row.sup_lq_diff) {
                writeln!(
                    out,
                    "{},{},{:.12e},{:.12e},{},{:.12e},{}",
                    row.nu, q, d, row.sup_lp_enstrophy, row.energy_ok, row.renorm_slack, row.wall_ms
                )?;
            }
        }
        Ok(())
    }
}

fn lp_index(config: &SimConfig, p: f64) -> usize {
    config.enstrophy_p.iter().position(|&x| x == p).expect("p is recorded")
}

/// Runs the Euler reference (refined and on the base grid) and every
/// viscous run, concurrently on the current rayon pool.
pub fn run_sweep(config: &SweepConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    let base = config.pinned_base();
    let grid = base.grid()?;
    let ip = lp_index(&base, config.p);

    let fine_cfg = refined(&base, config.euler_refinement_factor);
    let coarse_euler_cfg = {
        let mut c = base.clone();
        c.nu = 0.0;
        c
    };
    let mut jobs: Vec<SimConfig> = vec![fine_cfg, coarse_euler_cfg];
    jobs.extend(config.nu_list.iter().map(|&nu| {
        let mut c = base.clone();
        c.nu = nu;
        c
    }));
    let results: Vec<(Result<Trajectory>, u128)> = jobs
        .par_iter()
        .map(|c| {
            let start = Instant::now();
            let r = simulate(c);
            (r, start.elapsed().as_millis())
        })
        .collect();
    let mut runs = Vec::with_capacity(results.len());
    for (r, ms) in results {
        runs.push((r?, ms));
    }
    let mut runs = runs.into_iter();
    let (fine, _) = runs.next().expect("reference");
    let (coarse_euler, _) = runs.next().expect("coarse reference");

    let reference: Vec<(f64, ScalarField)> = fine
        .snapshots
        .iter()
        .map(|s| Ok((s.t, restrict(&s.omega, &grid)?)))
        .collect::<Result<_>>()?;
    let euler_floor = config
        .q_list
        .iter()
        .map(|&q| sup_difference(&coarse_euler, &reference, q))
        .collect::<Result<Vec<_>>>()?;
    let euler_sup_lp = fine.series.iter().map(|r| r.enstrophy[ip]).fold(0.0, f64::max);

    let mut rows = Vec::new();
    for (traj, wall_ms) in runs {
        let nu = traj.config.nu;
        let sup_lq_diff = config
            .q_list
            .iter()
            .map(|&q| sup_difference(&traj, &reference, q))
            .collect::<Result<Vec<_>>>()?;
        let energy = energy_check(&traj.series, nu);
        let slack = renormalized_slack(&traj, &config.phi, config.q_list[0], config.p)?;
        rows.push(SweepRow {
            nu,
            sup_lq_diff,
            sup_lp_enstrophy: traj.series.iter().map(|r| r.enstrophy[ip]).fold(0.0, f64::max),
            energy_ok: energy.ok,
            energy_growth_constant: energy.growth_constant,
            renorm_slack: slack.s,
            renorm_constant: slack.measured_c.unwrap_or(0.0),
            steps: traj.steps,
            dt_first: match traj.config.dt {
                DtSpec::Fixed(dt) => dt,
                DtSpec::Auto(_) => f64::NAN,
            },
            wall_ms,
        });
    }
    let renorm_constant = rows.iter().map(|r| r.renorm_constant).fold(0.0, f64::max);
    let mut echo = config.clone();
    echo.base = base;
    Ok(ConvergenceReport { config: echo, euler_floor, euler_sup_lp, rows, renorm_constant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::AlphaSpec;
    use crate::solver::{InitialCondition, Tolerances};
    use std::sync::Arc;

    fn base(ic: InitialCondition, n: usize) -> SimConfig {
        SimConfig {
            nu: 0.0,
            t_end: 0.2,
            dt: DtSpec::default(),
            n_r: n,
            n_theta: n,
            alpha: AlphaSpec::Const(0.0),
            initial_condition: ic,
            output_stride: 10,
            snapshot_every: None,
            enstrophy_p: vec![2.0],
            tol: Tolerances::default(),
        }
    }

    #[test]
    fn restriction_is_exact_on_linear_profiles() {
        let coarse = Arc::new(PolarGrid::new(8, 8).unwrap());
        let fine = Arc::new(PolarGrid::new(16, 16).unwrap());
        let f = ScalarField::from_fn(fine, |r, t| 2.0 * r + t.cos());
        let g = restrict(&f, &coarse).unwrap();
        let expect = ScalarField::from_fn(coarse, |r, t| 2.0 * r + t.cos());
        assert!((&g - &expect).max_abs() < 1e-13);
    }

    #[test]
    fn invalid_sweeps_are_rejected() {
        let mut c = SweepConfig {
            base: base(InitialCondition::Const(2.0), 16),
            nu_list: vec![0.1, 0.01],
            q_list: vec![2.0],
            p: 4.0,
            euler_refinement_factor: 2,
            phi: default_phi(),
        };
        assert!(c.validate().is_ok());
        c.nu_list = vec![0.01, 0.1];
        assert!(c.validate().is_err());
        c.nu_list = vec![0.1];
        c.q_list = vec![4.0];
        assert!(c.validate().is_err());
        c.q_list = vec![2.0];
        c.p = 2.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn rigid_rotation_sweep_has_no_viscous_dependence() {
        let c = SweepConfig {
            base: base(InitialCondition::Const(2.0), 16),
            nu_list: vec![0.1, 0.01],
            q_list: vec![1.0, 2.0],
            p: 4.0,
            euler_refinement_factor: 2,
            phi: default_phi(),
        };
        let report = run_sweep(&c).unwrap();
        for row in &report.rows {
            assert!(row.sup_lq_diff.iter().all(|d| *d <= 1e-6), "{row:?}");
            assert!(row.energy_ok);
        }
        let mut csv = Vec::new();
        report.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().count(), 1 + 2 * 2);
        assert!(text.starts_with("nu,q,sup_lq_diff,sup_lp_enstrophy,energy_ok,renorm_slack,wall_ms\n"));
    }
}
