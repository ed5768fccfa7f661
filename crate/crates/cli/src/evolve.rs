use pseudoherm::casimir::{squeeze_params, CasimirModel, CasimirParams, Drive};
use pseudoherm::dynamics::{integrate_action, IntegrateOptions, Trajectory};
use pseudoherm::error::Error;
use pseudoherm::fock::FockState;
use pseudoherm::observables::{photon_closed_form, photon_ode_solve, quadratures_from_record, FrameAngle, PHOTON_CAP};
use pseudoherm::symmetry::Regime;

use crate::config::RunConfig;
use crate::output::{fmt_num, Cell, Table};
use crate::{guard_ep, header, CliError, Command};

pub const COLUMNS: [&str; 8] = [
    "t",
    "n_ode",
    "n_closed",
    "norm_rho",
    "var_y1",
    "var_y2",
    "phase_alpha0_re",
    "phase_alpha0_im",
];

/// RK4 step for the interaction-picture run; bounded by the drive period and
/// by the largest su(1,1) matrix elements at this cutoff.
pub fn interaction_step(p: &CasimirParams, dim: usize) -> f64 {
    let scale = p.omega0 * p.epsilon * dim as f64 + p.delta() + p.kappa * p.epsilon;
    // the interaction picture oscillates at 2 kappa
    0.005f64.min(0.02 / p.kappa).min(0.03 / scale.max(1.0))
}

/// Full `H(t)` from the vacuum with the rho-norm recorded. `U(t)` commutes
/// with rho, so the interaction picture carries the same norm as the lab
/// frame without the stiffness of the free rotation.
pub fn full_model_run(p: &CasimirParams, dim: usize, grid: &[f64]) -> Result<(Trajectory, Option<String>), CliError> {
    let model = CasimirModel::new(*p, dim)?;
    let opts = IntegrateOptions::rk4(interaction_step(p, dim)).with_metric(model.metric()?);
    let psi0 = FockState::vacuum(dim)?;
    match integrate_action(|t, v| model.interaction_su11(t).apply(v), &psi0, grid, &opts) {
        Ok(tr) => Ok((tr, None)),
        Err(Error::IntegrationFailed { t, reason, partial }) => Ok((*partial, Some(format!("stopped at t = {t}: {reason}")))),
        Err(e) => Err(e.into()),
    }
}

/// Photon number from the moment equations and the closed form, the
/// rho-norm of the integrated full model, the rotated quadrature variances
/// and the ground-level Lewis-Riesenfeld phase.
pub fn run(cfg: &RunConfig) -> Result<Table, CliError> {
    let p = cfg.params()?;
    let at_ep = guard_ep(cfg, &p)?;
    let grid = cfg.time_grid();
    let mut t = header(Command::Evolve, cfg, &p);
    t.columns = COLUMNS.map(String::from).to_vec();

    let ode = photon_ode_solve(&p, &grid)?;
    let (traj, stop) = full_model_run(&p, cfg.dim, &grid)?;
    let phases = if at_ep {
        None
    } else {
        let sq = squeeze_params(&p)?;
        let model = CasimirModel::new(p, cfg.dim)?;
        Some(model.algebraic_lr_phases(Drive::Rwa, sq.r, &grid, 1).phases.swap_remove(0))
    };

    t.meta("photon_cap", fmt_num(PHOTON_CAP))
        .meta("n_ode_capped", ode.capped.to_string())
        .meta("norm_rho_source", "full H(t), interaction picture, rk4")
        .meta("norm_rho_step", fmt_num(interaction_step(&p, cfg.dim)))
        .meta("norm_rho_status", stop.unwrap_or_else(|| "complete".into()))
        .meta("quadrature_source", "moment equations, lab-frame angle 2 xi(t)");
    if let Some(rec) = ode.records.last().filter(|_| ode.capped) {
        t.meta("n_ode_capped_at", fmt_num(rec.t));
    }
    if p.regime() == Regime::Unbroken && p.omega_sq() > 0.0 {
        t.meta("n_peak_closed_form", fmt_num(16.0 * p.g().powi(2) * p.alpha * p.beta / p.omega_sq()));
    }

    let nan = f64::NAN;
    for (k, &time) in grid.iter().enumerate() {
        let rec = ode.records.get(k);
        let q = rec.map(|r| quadratures_from_record(&p, r, FrameAngle::Exact));
        let norm = traj.rho_norms().get(k).copied().unwrap_or(nan);
        let ph = phases.as_ref().map(|v| v[k]);
        t.push(vec![
            Cell::from(time),
            Cell::from(rec.map_or(nan, |r| r.n)),
            Cell::from(photon_closed_form(&p, time).n),
            Cell::from(norm),
            Cell::from(q.map_or(nan, |q| q.var_y1)),
            Cell::from(q.map_or(nan, |q| q.var_y2)),
            Cell::from(ph.map_or(nan, |c| c.re)),
            Cell::from(ph.map_or(nan, |c| c.im)),
        ]);
    }
    Ok(t)
}
