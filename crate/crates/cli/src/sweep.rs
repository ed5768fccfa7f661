use pseudoherm::casimir::{locate_exceptional_point, mode_eigen, CasimirParams, SweepAxis};
use pseudoherm::observables::{photon_closed_form, PHOTON_CAP};
use pseudoherm::symmetry::Regime;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::output::{fmt_num, Cell, Table};
use crate::{header, level_energy, CliError, Command};

/// Bracket width at which the exceptional point search stops.
pub const EP_BISECTION_TOL: f64 = 1e-10;

struct Point {
    value: f64,
    params: CasimirParams,
    regime: Regime,
    n_max: f64,
}

fn evaluate(base: &CasimirParams, axis: SweepAxis, value: f64, grid: &[f64]) -> Result<Point, CliError> {
    let params = axis.apply(base, value)?;
    let n_max = grid
        .iter()
        .map(|&t| photon_closed_form(&params, t).n)
        .fold(0.0, f64::max)
        .min(PHOTON_CAP);
    Ok(Point {
        value,
        params,
        regime: params.regime(),
        n_max,
    })
}

/// The exceptional point on the swept axis, from the closed form.
pub fn closed_form_ep(base: &CasimirParams, axis: SweepAxis) -> Option<f64> {
    let sab = base.sqrt_ab();
    match axis {
        SweepAxis::G if sab > 0.0 => Some(base.delta() / (2.0 * sab)),
        SweepAxis::G => None,
        SweepAxis::Delta => Some(2.0 * base.g() * sab),
    }
}

/// Lowest eigenvalues, regime and peak photon number over `[0, tmax]` for
/// every point of the sweep. Points are evaluated in parallel; rows keep the
/// sweep order.
pub fn run(cfg: &RunConfig) -> Result<Table, CliError> {
    let base = cfg.params()?;
    let spec = cfg.sweep;
    let grid = cfg.time_grid();
    let values = spec.values();
    let work = || -> Result<Vec<Point>, CliError> {
        values.par_iter().map(|&v| evaluate(&base, spec.axis, v, &grid)).collect()
    };
    let points = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Runtime(e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    if !cfg.allow_ep {
        if let Some(pt) = points.iter().find(|p| p.regime == Regime::ExceptionalPoint) {
            return Err(CliError::Singular(format!(
                "sweep point {} = {} sits on the exceptional point",
                spec.axis.name(),
                pt.value
            )));
        }
    }

    let mut t = header(Command::Sweep, cfg, &base);
    match locate_exceptional_point(&base, spec.axis, spec.min, spec.max, EP_BISECTION_TOL) {
        Ok(ep) => {
            t.meta("ep_value", fmt_num(ep.value))
                .meta("ep_mode_overlap", fmt_num(ep.overlap))
                .meta("ep_iterations", ep.iterations.to_string());
        }
        Err(_) => {
            t.meta("ep_value", "none");
        }
    }
    if let Some(v) = closed_form_ep(&base, spec.axis) {
        t.meta("ep_closed_form", fmt_num(v));
    }
    t.meta("photon_cap", fmt_num(PHOTON_CAP));

    let mut cols = vec!["sweep_value".to_string()];
    for n in 0..spec.levels {
        cols.push(format!("re_eps_{n}"));
        cols.push(format!("im_eps_{n}"));
    }
    cols.push("regime".into());
    cols.push("n_max".into());
    t.columns = cols;
    for pt in &points {
        let mut row = vec![Cell::from(pt.value)];
        for n in 0..spec.levels {
            let e = level_energy(&pt.params, n);
            row.push(Cell::from(e.re));
            row.push(Cell::from(e.im));
        }
        row.push(Cell::from(pt.regime.as_str()));
        row.push(Cell::from(pt.n_max));
        t.push(row);
    }
    // mode-matrix discriminant sign flips once per crossing
    let crossings = points
        .windows(2)
        .filter(|w| (mode_eigen(&w[0].params).discriminant > 0.0) != (mode_eigen(&w[1].params).discriminant > 0.0))
        .count();
    t.meta("regime_changes", crossings.to_string());
    Ok(t)
}
