//! Run directories: `config-resolved.json`, `series.csv`, `report.json` and
//! one vorticity CSV per snapshot under `snapshots/`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    energy_check, enstrophy_balance_residual, navier_residuals_from_stream, weak_form_residual, ExtendedTangent,
    ResidualReport, ENERGY_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::field::{perp_grad, ScalarField};
use crate::grid::BoundaryTrace;
use crate::pressure::{pressure_estimate_slack, recover_pressure};
use crate::solver::{SeriesRow, SimConfig, Snapshot, Stepper, Trajectory};

pub const CONFIG_FILE: &str = "config-resolved.json";
pub const SERIES_FILE: &str = "series.csv";
pub const REPORT_FILE: &str = "report.json";
pub const SNAPSHOT_DIR: &str = "snapshots";
const INDEX_FILE: &str = "index.csv";

/// Resolved configuration plus what the run actually did.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub config: SimConfig,
    pub steps: usize,
    pub dt_min: f64,
    pub dt_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub config: ResolvedConfig,
    pub residuals: ResidualReport,
}

#[derive(Serialize, Deserialize)]
struct IndexRow {
    index: usize,
    t: f64,
    file: String,
}

#[derive(Serialize, Deserialize)]
struct NodeRow {
    j: usize,
    k: usize,
    r: f64,
    theta: f64,
    omega: f64,
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse { context: "csv".into(), message: format!("{other:?}") },
    }
}

fn resolved(traj: &Trajectory) -> ResolvedConfig {
    ResolvedConfig { config: traj.config.clone(), steps: traj.steps, dt_min: traj.dt_min, dt_max: traj.dt_max }
}

/// Writes the series, the resolved configuration and every snapshot.
pub fn write_trajectory(dir: &Path, traj: &Trajectory) -> Result<()> {
    fs::create_dir_all(dir.join(SNAPSHOT_DIR))?;
    fs::write(dir.join(CONFIG_FILE), serde_json::to_string_pretty(&resolved(traj))?)?;

    let mut w = csv::Writer::from_path(dir.join(SERIES_FILE)).map_err(csv_error)?;
    let mut header = vec!["t".to_string(), "energy".to_string()];
    header.extend(traj.config.enstrophy_p.iter().map(|p| format!("enstrophy_p{p}")));
    header.push("bc_residual".into());
    w.write_record(&header).map_err(csv_error)?;
    for row in &traj.series {
        let mut rec = vec![row.t.to_string(), row.energy.to_string()];
        rec.extend(row.enstrophy.iter().map(f64::to_string));
        rec.push(row.bc_residual.to_string());
        w.write_record(&rec).map_err(csv_error)?;
    }
    w.flush()?;

    let grid = &traj.grid;
    let mut index = csv::Writer::from_path(dir.join(SNAPSHOT_DIR).join(INDEX_FILE)).map_err(csv_error)?;
    for (i, snap) in traj.snapshots.iter().enumerate() {
        let file = format!("omega_{i:04}.csv");
        let mut s = csv::Writer::from_path(dir.join(SNAPSHOT_DIR).join(&file)).map_err(csv_error)?;
        for j in 0..grid.n_r() {
            for k in 0..grid.n_theta() {
                let row = NodeRow { j, k, r: grid.r(j), theta: grid.theta(k), omega: snap.omega.at(j, k) };
                s.serialize(row).map_err(csv_error)?;
            }
        }
        if let Some(wall) = snap.omega.wall() {
            for (k, &w) in wall.iter().enumerate() {
                let row = NodeRow { j: grid.n_r(), k, r: 1.0, theta: grid.theta(k), omega: w };
                s.serialize(row).map_err(csv_error)?;
            }
        }
        s.flush()?;
        index.serialize(IndexRow { index: i, t: snap.t, file }).map_err(csv_error)?;
    }
    index.flush()?;
    Ok(())
}

pub fn write_report(dir: &Path, report: &impl Serialize) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(REPORT_FILE), serde_json::to_string_pretty(report)?)?;
    Ok(())
}

/// Reads a run directory back. Stream function and velocity are recomputed
/// from the stored vorticity; rows with `j = n_r` hold its wall values.
pub fn load_run(dir: &Path) -> Result<Trajectory> {
    let text = fs::read_to_string(dir.join(CONFIG_FILE))?;
    let rc: ResolvedConfig = serde_json::from_str(&text).map_err(|e| Error::Parse {
        context: format!("{} line {} column {}", CONFIG_FILE, e.line(), e.column()),
        message: e.to_string(),
    })?;
    let config = rc.config;
    config.validate()?;
    let grid = config.grid()?;
    let trace = BoundaryTrace::new(&grid, &config.alpha)?;
    let stepper = Stepper::new(grid.clone(), trace.clone(), config.nu)?;

    let mut series = Vec::new();
    let mut r = csv::Reader::from_path(dir.join(SERIES_FILE)).map_err(csv_error)?;
    let n_p = config.enstrophy_p.len();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        let nums = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse { context: format!("{SERIES_FILE} row {}", line + 2), message: e.to_string() })?;
        if nums.len() != 3 + n_p {
            return Err(Error::Parse {
                context: format!("{SERIES_FILE} row {}", line + 2),
                message: format!("expected {} columns, found {}", 3 + n_p, nums.len()),
            });
        }
        series.push(SeriesRow { t: nums[0], energy: nums[1], enstrophy: nums[2..2 + n_p].to_vec(), bc_residual: nums[2 + n_p] });
    }

    let snap_dir = dir.join(SNAPSHOT_DIR);
    let mut snapshots = Vec::new();
    let mut index = csv::Reader::from_path(snap_dir.join(INDEX_FILE)).map_err(csv_error)?;
    for row in index.deserialize::<IndexRow>() {
        let row = row.map_err(csv_error)?;
        let n_t = grid.n_theta();
        let mut values = vec![f64::NAN; grid.len() + n_t];
        let mut nodes = csv::Reader::from_path(snap_dir.join(&row.file)).map_err(csv_error)?;
        for node in nodes.deserialize::<NodeRow>() {
            let node = node.map_err(csv_error)?;
            if node.j > grid.n_r() || node.k >= n_t {
                return Err(Error::Parse { context: row.file.clone(), message: format!("node ({}, {}) off grid", node.j, node.k) });
            }
            values[node.j * n_t + node.k] = node.omega;
        }
        let wall = values.split_off(grid.len());
        let mut omega = ScalarField::new(grid.clone(), values)?;
        if wall.iter().all(|w| !w.is_nan()) {
            omega = omega.with_wall(wall)?;
        }
        snapshots.push(Snapshot::of(&stepper.state(row.t, omega)?));
    }
    if snapshots.is_empty() {
        return Err(Error::InvalidArgument(format!("{} holds no snapshots", snap_dir.display())));
    }
    Ok(Trajectory { config, grid, trace, snapshots, series, steps: rc.steps, dt_min: rc.dt_min, dt_max: rc.dt_max })
}

/// Test field of the weak-form check: `perp_grad` of `(1 - r^2)^2 (1 + x)`.
fn weak_test_field(traj: &Trajectory) -> Result<crate::field::VectorField> {
    let psi = ScalarField::from_fn(traj.grid.clone(), |r, t| (1.0 - r * r).powi(2) * (1.0 + r * t.cos()));
    Ok(perp_grad(&psi.with_wall(vec![0.0; traj.grid.n_theta()])?))
}

/// Every residual the diagnostics know how to evaluate on a stored run.
/// Weak-form and balance defects are scaled by the size of their terms.
pub fn diagnose_trajectory(traj: &Trajectory) -> Result<RunReport> {
    let cfg = &traj.config;
    let nu = cfg.nu;
    let mut report = ResidualReport::new(&traj.grid);

    let (mut navier, mut identity) = (0.0f64, 0.0f64);
    // Initial data need not satisfy the wall condition.
    for s in traj.snapshots.iter().filter(|s| s.t > 0.0) {
        let r = navier_residuals_from_stream(&s.psi, &s.omega, &traj.trace);
        navier = navier.max(r.max_navier);
        identity = identity.max(r.max_identity);
    }
    report.push("navier", "max over wall and snapshots with t > 0", navier, Some(cfg.tol.navier));
    report.push("vorticity_identity", "max over wall and snapshots with t > 0", identity, Some(cfg.tol.navier));

    let energy = energy_check(&traj.series, nu);
    let dissipative = traj.trace.alpha.iter().all(|&a| a >= 0.0);
    report.push("energy_rate", "max (E_k+1 - E_k) / (E_0 dt)", energy.worst_rate, dissipative.then_some(ENERGY_TOLERANCE));

    let mut pressures = Vec::with_capacity(traj.snapshots.len());
    let mut slack = 0.0f64;
    for s in &traj.snapshots {
        let p = recover_pressure(&s.u, &s.omega, nu)?.p;
        let sl = pressure_estimate_slack(&p, &s.u, &s.omega, nu)?;
        let rhs = sl.convective + sl.viscous;
        if rhs > 0.0 {
            slack = slack.max((-sl.slack).max(0.0) / rhs);
        }
        pressures.push(p);
    }
    report.push("pressure_estimate", "max(0, -slack) / rhs over snapshots", slack, Some(1e-6));

    if traj.snapshots.len() >= 3 {
        let v = weak_test_field(traj)?;
        let weak = weak_form_residual(traj, &v, nu, &traj.trace)?;
        let scale = traj.snapshots.iter().map(|s| s.u.lp_norm(2.0).unwrap_or(0.0)).fold(0.0, f64::max)
            * v.lp_norm(2.0)?.max(1e-300);
        report.push("weak_form", "max over snapshots / (sup ||u||_2 ||v||_2)", weak.max / scale, Some(cfg.tol.weakform));
    }
    if traj.snapshots.len() >= 2 {
        let tau = ExtendedTangent::new(traj.grid.clone(), &traj.trace);
        let balance = enstrophy_balance_residual(traj, &tau, nu, &pressures)?;
        let scale = traj.snapshots.iter().map(|s| s.omega.lp_norm(2.0).unwrap_or(0.0).powi(2)).fold(0.0, f64::max).max(1e-300);
        report.push("enstrophy_balance", "max interval defect / sup ||omega||_2^2", balance.max_abs / scale, Some(cfg.tol.balance));
    }
    Ok(RunReport { config: resolved(traj), residuals: report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::simulate;

    #[test]
    fn run_directory_round_trips() {
        let config: SimConfig = serde_json::from_value(serde_json::json!({
            "nu": 0.01, "t_end": 0.2, "n_r": 16, "n_theta": 16, "alpha": {"const": 1.0},
            "initial_condition": {"bump": {"center": [0.2, 0.0], "radius": 0.5, "amplitude": 2.0}},
            "snapshot_every": 0.05
        }))
        .unwrap();
        let traj = simulate(&config).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_trajectory(dir.path(), &traj).unwrap();
        let back = load_run(dir.path()).unwrap();
        assert_eq!(back.config, traj.config);
        assert_eq!(back.series, traj.series);
        assert_eq!(back.snapshots.len(), traj.snapshots.len());
        for (a, b) in back.snapshots.iter().zip(&traj.snapshots) {
            assert_eq!(a.t, b.t);
            assert_eq!(a.omega, b.omega);
            assert_eq!(a.u, b.u);
        }
        let report = diagnose_trajectory(&back).unwrap();
        for name in ["navier", "energy_rate", "pressure_estimate", "weak_form", "enstrophy_balance"] {
            assert!(report.residuals.get(name).is_some(), "{name}");
        }
    }

    #[test]
    fn broken_config_reports_its_position() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join(CONFIG_FILE), "{\n  \"config\": [\n").unwrap();
        let err = load_run(dir.path()).unwrap_err().to_string();
        assert!(err.contains("line"), "{err}");
    }
}
