//! The invariant suite. Each check reports a residual against a fixed
//! tolerance. Checks that hold only while the antilinear symmetry is unbroken
//! are regime-aware: in the broken regime a violation is recorded as an
//! expected failure and does not change the exit code.

use pseudoherm::casimir::{spectral_solve, CasimirModel, CasimirParams, Drive, SpectralResult};
use pseudoherm::dynamics::{integrate_action, lr_phase_extract, phase_parity_check, IntegrateOptions, Trajectory};
use pseudoherm::fd;
use pseudoherm::fock::{FockState, Truncation, C64, I};
use pseudoherm::metric::{pseudo_hermiticity_residual, pseudo_unitarity_residual, schrodinger_op_pseudo_hermiticity_residual, Metric};
use pseudoherm::su11::Su11;
use pseudoherm::symmetry::{
    antilinear_metric_residual, antilinear_symmetry_residual, cpt_square_residual, fixed_phase_residuals,
    linear_invariant_residual, partner_matches, schrodinger_symmetry_residual, COperator, LrInvariant, Regime,
};

use crate::config::RunConfig;
use crate::evolve::interaction_step;
use crate::output::{fmt_num, Cell, Table};
use crate::{guard_ep, header, CliError, Command};

pub const TOL: f64 = 1e-6;
pub const IMAG_TOL: f64 = 1e-8;
pub const NORM_TOL: f64 = 1e-8;
/// Levels entering the eigenvector checks.
pub const LEVELS: usize = 9;
/// Sample times of the operator identities.
pub const TIMES: [f64; 2] = [0.3, 1.1];
pub const FD_STEP: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    ExpectedFail,
    Info,
    Skipped,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::ExpectedFail => "expected_fail",
            Status::Info => "info",
            Status::Skipped => "skipped",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub status: Status,
    pub note: String,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub checks: Vec<Check>,
    header: Table,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn table(&self) -> Table {
        let mut t = self.header.clone();
        let count = |s: Status| self.checks.iter().filter(|c| c.status == s).count().to_string();
        t.meta("result", if self.passed() { "pass" } else { "fail" })
            .meta("checks_failed", count(Status::Fail))
            .meta("checks_expected_fail", count(Status::ExpectedFail));
        t.columns = ["check", "value", "tolerance", "status", "note"].map(String::from).to_vec();
        for c in &self.checks {
            t.push(vec![
                Cell::from(c.name),
                Cell::from(c.value),
                Cell::from(c.tolerance),
                Cell::from(c.status.as_str()),
                Cell::from(c.note.clone()),
            ]);
        }
        t
    }
}

struct Suite {
    checks: Vec<Check>,
    broken: bool,
}

impl Suite {
    fn push(&mut self, name: &'static str, value: f64, tolerance: f64, status: Status, note: impl Into<String>) {
        self.checks.push(Check {
            name,
            value,
            tolerance,
            status,
            note: note.into(),
        });
    }

    fn required(&mut self, name: &'static str, value: f64, tol: f64, note: impl Into<String>) {
        let s = if value <= tol { Status::Pass } else { Status::Fail };
        self.push(name, value, tol, s, note);
    }

    /// Must hold in the unbroken regime; expected to fail in the broken one.
    fn unbroken_only(&mut self, name: &'static str, value: f64, tol: f64, note: impl Into<String>) {
        let s = match (value <= tol, self.broken) {
            (true, _) => Status::Pass,
            (false, true) => Status::ExpectedFail,
            (false, false) => Status::Fail,
        };
        self.push(name, value, tol, s, note);
    }

    fn info(&mut self, name: &'static str, value: f64, note: impl Into<String>) {
        self.push(name, value, f64::NAN, Status::Info, note);
    }

    fn skip(&mut self, name: &'static str, note: impl Into<String>) {
        self.push(name, f64::NAN, f64::NAN, Status::Skipped, note);
    }

    fn guarded(&mut self, name: &'static str, tol: f64, r: Result<f64, CliError>, f: fn(&mut Self, &'static str, f64, f64, String)) {
        match r {
            Ok(v) => f(self, name, v, tol, String::new()),
            Err(e) => self.push(name, f64::NAN, tol, Status::Fail, e.to_string()),
        }
    }
}

fn req(s: &mut Suite, name: &'static str, v: f64, tol: f64, note: String) {
    s.required(name, v, tol, note)
}

fn unb(s: &mut Suite, name: &'static str, v: f64, tol: f64, note: String) {
    s.unbroken_only(name, v, tol, note)
}

fn max_over<E>(xs: impl IntoIterator<Item = Result<f64, E>>) -> Result<f64, E> {
    let mut worst = 0.0f64;
    for x in xs {
        let x = x?;
        // a NaN residual must not be swallowed by max
        worst = if x.is_nan() { f64::NAN } else { worst.max(x) };
        if worst.is_nan() {
            break;
        }
    }
    Ok(worst)
}

/// `I(t) = U^dagger(t) S (N + 1/2) S^-1 U(t)`, built from its su(1,1)
/// coefficients so that it stays exact for complex squeezing.
pub fn number_invariant(model: &CasimirModel, r: C64) -> LrInvariant {
    let k0 = Su11::new(C64::from(2.0), C64::from(0.0), C64::from(0.0));
    let core = model.unsqueeze(&k0, -r);
    let p = *model.params();
    let dim = model.dim();
    LrInvariant::new(move |t| {
        let back = Su11::new(-I * 2.0 * p.xi(t), C64::from(0.0), C64::from(0.0));
        core.conjugated_by_exp(&back).to_operator(dim).expect("dimension validated")
    })
}

/// `U^dagger(t)|n>`: smooth, regime-independent test trajectories.
fn frame_trajectories(model: &CasimirModel, grid: &[f64], levels: usize, m: &Metric) -> Result<Vec<Trajectory>, CliError> {
    let dim = model.dim();
    (0..levels)
        .map(|n| {
            let base = FockState::basis(dim, n)?;
            Ok(Trajectory::from_fn(grid, |t| model.to_frame(t, &base, true), m)?)
        })
        .collect()
}

fn eigen_trajectories(sr: &SpectralResult, grid: &[f64], levels: usize, m: &Metric) -> Result<Vec<Trajectory>, CliError> {
    (0..levels)
        .map(|n| Ok(Trajectory::from_fn(grid, |t| sr.eigenvector(t, n), m)?))
        .collect()
}

fn norm_drift(p: &CasimirParams, dim: usize, m: &Metric, grid: &[f64]) -> Result<f64, CliError> {
    let model = CasimirModel::new(*p, dim)?;
    let opts = IntegrateOptions::rk4(interaction_step(p, dim)).with_metric(m.clone());
    let tr = integrate_action(|t, v| model.interaction_su11(t).apply(v), &FockState::vacuum(dim)?, grid, &opts)?;
    Ok(tr.max_norm_drift())
}

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    let p = cfg.params()?;
    let at_ep = guard_ep(cfg, &p)?;
    let dim = cfg.dim;
    let regime = p.regime();
    let model = CasimirModel::new(p, dim)?;
    let m = if cfg.corrupt_metric {
        Metric::identity(dim)?
    } else {
        model.metric()?
    };
    let mu_sign = if cfg.flip_c_sign { -1.0 } else { 1.0 };
    let mut s = Suite {
        checks: Vec::new(),
        broken: regime == Regime::Broken,
    };
    let full = |t: f64| model.hamiltonian(t);
    let rwa = |t: f64| model.drive(Drive::Rwa, t);
    let trusted = Truncation::Trusted;
    let pt = model.parity_time();

    // antilinear symmetry of H(t)
    let r = max_over(TIMES.map(|t| antilinear_symmetry_residual(|_| pt.clone(), full, t, FD_STEP, trusted)));
    s.guarded("pt_symmetry_full", TOL, r.map_err(Into::into), req);

    // Schrödinger-operator symmetry, both drives
    let sym_grid = fd::symmetric_grid(0.02, 8);
    let frames = frame_trajectories(&model, &sym_grid, 3, &m)?;
    let r = max_over([Drive::Rwa, Drive::Full].map(|d| {
        schrodinger_symmetry_residual(|_, v| pt.apply(v), |t| model.drive(d, t), &frames, trusted)
    }));
    s.guarded("schrodinger_symmetry", TOL, r.map_err(Into::into), req);

    // pseudo-Hermiticity of H and of the Schrödinger operator
    let r = TIMES
        .iter()
        .map(|&t| pseudo_hermiticity_residual(full, &m, t, Truncation::Full))
        .fold(0.0, f64::max);
    s.required("pseudo_hermiticity", r, TOL, "relative to ||rho||");
    let r = schrodinger_op_pseudo_hermiticity_residual(full, |_| m.clone(), &frames, trusted);
    s.guarded("schrodinger_pseudo_hermiticity", TOL, r.map_err(Into::into), req);

    // rho-norm of the full model from the vacuum
    let r = norm_drift(&p, dim, &m, &cfg.time_grid());
    s.guarded("norm_conservation", NORM_TOL, r, req);

    if at_ep {
        for name in [
            "linear_invariant",
            "partner_pt",
            "unbroken_pt_condition",
            "phase_parity",
            "phase_reality",
            "cpt_partner",
            "cpt_symmetry_rwa",
            "xi_antilinear_metric",
            "pseudo_unitarity",
        ] {
            s.skip(name, "no squeezing transformation at the exceptional point");
        }
        return finish(cfg, &p, s);
    }

    let sr = spectral_solve(&p, dim)?;
    let inv = number_invariant(&model, sr.r);
    let r = max_over(TIMES.map(|t| linear_invariant_residual(&inv, rwa, t, FD_STEP, trusted)));
    s.guarded("linear_invariant", TOL, r.map_err(Into::into), req);

    // PT maps |n,t> onto |n,-t>
    let levels = LEVELS.min(dim / 2);
    let eig_grid = fd::symmetric_grid(1.0, 10);
    let states = eigen_trajectories(&sr, &eig_grid, levels, &m)?;
    let r = partner_matches(|_| pt.clone(), &states, &m)
        .map(|ms| ms.iter().map(|x| x.residual.max(x.drift)).fold(0.0, f64::max));
    s.guarded("partner_pt", TOL, r.map_err(Into::into), unb);
    let lambdas: Vec<C64> = (0..levels).map(|n| C64::from(if n % 2 == 0 { 1.0 } else { -1.0 })).collect();
    let r = fixed_phase_residuals(|_| pt.clone(), &states, &lambdas, &m).map(|v| v.into_iter().fold(0.0, f64::max));
    s.guarded("unbroken_pt_condition", TOL, r.map_err(Into::into), unb);

    // phase parity of the Lewis-Riesenfeld phases
    phase_checks(&mut s, &model, &sr, &m)?;

    let r = pseudo_unitarity_residual(sr.squeeze(), &m, Truncation::Full);
    s.unbroken_only("pseudo_unitarity", r, TOL, "S^dagger rho S = rho");

    if s.broken {
        for name in ["cpt_partner", "cpt_symmetry_rwa", "xi_antilinear_metric"] {
            s.skip(name, "C(t) is unbounded for complex squeezing strength");
        }
        return finish(cfg, &p, s);
    }

    // C(t) PT and the antilinear metric rho C PT
    let c = COperator::new(&p, dim, mu_sign)?;
    let r = partner_matches(|t| c.cpt(t), &states, &m).map(|ms| {
        ms.iter()
            .map(|x| x.residual.max(x.drift).max((x.lambda - I).norm()))
            .fold(0.0, f64::max)
    });
    s.guarded("cpt_partner", TOL, r.map_err(Into::into), req);
    let snap: Vec<FockState> = states.iter().map(|tr| tr.states()[3].clone()).collect();
    s.required("cpt_square", cpt_square_residual(&c.cpt(eig_grid[3]), &snap, &m), TOL, "(C PT)^2 = 1");
    let r = max_over(TIMES.map(|t| antilinear_symmetry_residual(|u| c.cpt(u), rwa, t, FD_STEP, trusted)));
    s.guarded("cpt_symmetry_rwa", TOL, r.map_err(Into::into), req);
    let r = max_over(TIMES.map(|t| antilinear_symmetry_residual(|u| c.cpt(u), full, t, FD_STEP, trusted)));
    match r {
        Ok(v) => s.info("cpt_symmetry_full", v, "C PT against the full H(t); no contract"),
        Err(e) => s.info("cpt_symmetry_full", f64::NAN, e.to_string()),
    }
    let r = max_over([Drive::Rwa, Drive::Full].into_iter().flat_map(|d| {
        let (c, m, model) = (&c, &m, &model);
        TIMES.map(move |t| {
            antilinear_metric_residual(|u| c.antilinear_metric(u, m), |u| model.drive(d, u), t, FD_STEP, Truncation::Trusted)
        })
    }));
    s.guarded("xi_antilinear_metric", TOL, r.map_err(Into::into), req);
    finish(cfg, &p, s)
}

fn phase_checks(s: &mut Suite, model: &CasimirModel, sr: &SpectralResult, m: &Metric) -> Result<(), CliError> {
    let levels = 4.min(model.dim() / 2);
    if s.broken {
        // Fock-space eigenvectors are cutoff-dominated here; use the
        // adjoint-representation phases
        let grid = fd::symmetric_grid(2.0, 200);
        let ph = model.algebraic_lr_phases(Drive::Rwa, sr.r, &grid, levels);
        let parity = phase_parity_check(&grid, &ph.phases)?;
        s.unbroken_only("phase_parity", parity, TOL, "adjoint-representation phases");
        let imag = ph.phases.iter().flatten().fold(0.0f64, |a, z| a.max(z.im.abs()));
        s.unbroken_only("phase_reality", imag, IMAG_TOL, "adjoint-representation phases");
        let k = grid.len() - 1;
        // the solver's branch has Im eps_0 < 0, so Im alpha_0 falls
        let slope = (ph.phases[0][k].im / grid[k]).abs();
        let expected = model.params().big_omega().norm() / 4.0;
        s.info("broken_im_alpha0_slope", slope, format!("|Omega|/4 = {}", fmt_num(expected)));
        return Ok(());
    }
    let grid = fd::symmetric_grid(0.05, 250);
    let basis = eigen_trajectories(sr, &grid, levels, m)?;
    let ph = lr_phase_extract(&basis, |t| model.drive(Drive::Rwa, t), |_| m.clone(), 1e-6);
    let ph = match ph {
        Ok(ph) => ph,
        Err(e) => {
            for name in ["phase_parity", "phase_reality", "lr_phase_extraction"] {
                s.push(name, f64::NAN, TOL, Status::Fail, e.to_string());
            }
            return Ok(());
        }
    };
    let parity = phase_parity_check(&ph.times, &ph.phases)?;
    s.required("phase_parity", parity, TOL, "phases extracted from the Schrödinger operator");
    let imag = ph.phases.iter().flatten().fold(0.0f64, |a, z| a.max(z.im.abs()));
    s.required("phase_reality", imag, IMAG_TOL, "");
    let alg = model.algebraic_lr_phases(Drive::Rwa, sr.r, &ph.times, levels);
    let diff = ph
        .phases
        .iter()
        .zip(&alg.phases)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
        .fold(0.0, f64::max);
    s.required("lr_phase_extraction", diff.max(ph.max_offdiag), TOL, "numerical vs algebraic phases");
    Ok(())
}

fn finish(cfg: &RunConfig, p: &CasimirParams, s: Suite) -> Result<Report, CliError> {
    let mut header = header(Command::Verify, cfg, p);
    header
        .meta("tolerance", fmt_num(TOL))
        .meta("imag_tolerance", fmt_num(IMAG_TOL))
        .meta("norm_tolerance", fmt_num(NORM_TOL))
        .meta("cpt_eigenvalue", "i");
    Ok(Report {
        checks: s.checks,
        header,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(text: &str) -> Report {
        run(&RunConfig::parse(text).unwrap()).unwrap()
    }

    #[test]
    fn default_unbroken_configuration_passes() {
        let r = report("tmax=2");
        for c in &r.checks {
            assert!(matches!(c.status, Status::Pass | Status::Info), "{c:?}");
        }
        assert!(r.passed());
    }

    #[test]
    fn broken_configuration_is_regime_aware() {
        let r = report("delta=0.5\ng=0.5\nalpha=1\nbeta=1\ntmax=2");
        assert!(r.passed());
        assert_eq!(r.get("unbroken_pt_condition").unwrap().status, Status::ExpectedFail);
        assert_eq!(r.get("partner_pt").unwrap().status, Status::ExpectedFail);
        assert_eq!(r.get("norm_conservation").unwrap().status, Status::Pass);
    }

    #[test]
    fn identity_metric_breaks_pseudo_hermiticity() {
        let r = report("tmax=2\ncorrupt_metric=true");
        assert!(!r.passed());
        assert_eq!(r.get("pseudo_hermiticity").unwrap().status, Status::Fail);
    }

    #[test]
    fn invariant_is_an_eigenbasis_generator() {
        let p = CasimirParams::from_rwa(1.0, 0.2, 1.0, 2.0, 20.0).unwrap();
        let model = CasimirModel::new(p, 24).unwrap();
        let sr = spectral_solve(&p, 24).unwrap();
        let inv = number_invariant(&model, sr.r);
        let v = sr.eigenvector(0.4, 2);
        let iv = inv.at(0.4).apply(&v);
        let k = pseudoherm::fock::trusted_levels(24) / 2;
        let (x, y) = (iv.amplitudes(), v.amplitudes());
        let d = (0..k).map(|n| (x[n] - y[n] * 2.5).norm()).fold(0.0, f64::max);
        assert!(d < 1e-8, "{d}");
    }
}
