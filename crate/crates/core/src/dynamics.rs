//! Schrödinger integration for non-Hermitian `H(t)`, Lewis-Riesenfeld phase
//! extraction and assembly of solutions from an invariant eigenbasis.

use crate::error::{Error, Result};
use crate::fd;
use crate::fock::{FockOperator, FockState, C64, I};
use crate::metric::{pseudo_inner, Metric};

/// Sampled solution of the Schrödinger equation.
#[derive(Clone, Debug)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<FockState>,
    rho_norms: Vec<f64>,
    phases: Option<Vec<Vec<C64>>>,
}

impl Trajectory {
    /// Builds a trajectory from samples on a strictly increasing grid.
    /// `rho_norms` holds `<psi|rho|psi>` evaluated with `metric`.
    pub fn new(times: Vec<f64>, states: Vec<FockState>, metric: &Metric) -> Result<Self> {
        if times.len() != states.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                found: states.len(),
            });
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::NonUniformGrid);
        }
        for s in &states {
            if s.dim() != metric.dim() {
                return Err(Error::DimensionMismatch {
                    expected: metric.dim(),
                    found: s.dim(),
                });
            }
        }
        let rho_norms = states.iter().map(|s| metric.norm_sq(s)).collect();
        Ok(Self {
            times,
            states,
            rho_norms,
            phases: None,
        })
    }

    /// Samples `state(t)` on `times`.
    pub fn from_fn(
        times: &[f64],
        state: impl Fn(f64) -> FockState,
        metric: &Metric,
    ) -> Result<Self> {
        Self::new(times.to_vec(), times.iter().map(|&t| state(t)).collect(), metric)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    pub fn rho_norms(&self) -> &[f64] {
        &self.rho_norms
    }

    pub fn phases(&self) -> Option<&[Vec<C64>]> {
        self.phases.as_deref()
    }

    pub fn with_phases(mut self, phases: Vec<Vec<C64>>) -> Self {
        self.phases = Some(phases);
        self
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest `|<psi|rho|psi> - <psi(0)|rho|psi(0)>|` along the trajectory.
    pub fn max_norm_drift(&self) -> f64 {
        let Some(&n0) = self.rho_norms.first() else {
            return 0.0;
        };
        self.rho_norms.iter().fold(0.0f64, |m, n| m.max((n - n0).abs()))
    }

    /// Recomputes the stored norms with a time-dependent metric.
    pub fn renormed(mut self, metric: impl Fn(f64) -> Metric) -> Self {
        self.rho_norms = self
            .times
            .iter()
            .zip(&self.states)
            .map(|(&t, s)| metric(t).norm_sq(s))
            .collect();
        self
    }

    /// Applies `f(t, psi)` to every sample, keeping norms under `metric`.
    pub fn map_states(
        &self,
        f: impl Fn(f64, &FockState) -> FockState,
        metric: &Metric,
    ) -> Result<Self> {
        let states = self
            .times
            .iter()
            .zip(&self.states)
            .map(|(&t, s)| f(t, s))
            .collect();
        Self::new(self.times.clone(), states, metric)
    }
}

/// Stepping scheme for [`integrate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    /// Classical RK4 with every grid interval split into equal substeps no
    /// longer than `max_step`.
    Rk4 { max_step: f64 },
    /// Dormand-Prince 5(4) with local error per step at most `tol`.
    DormandPrince { tol: f64 },
}

#[derive(Clone, Debug)]
pub struct IntegrateOptions {
    pub method: Method,
    /// Metric used for the recorded norms; the identity when absent.
    pub metric: Option<Metric>,
    /// Integration stops with a partial trajectory once the recorded norm
    /// exceeds this value.
    pub norm_cap: f64,
}

/// Default cap on the norm of hyperbolically growing states.
pub const NORM_CAP: f64 = 1e6;

impl IntegrateOptions {
    pub fn rk4(max_step: f64) -> Self {
        Self {
            method: Method::Rk4 { max_step },
            metric: None,
            norm_cap: NORM_CAP,
        }
    }

    pub fn adaptive(tol: f64) -> Self {
        Self {
            method: Method::DormandPrince { tol },
            metric: None,
            norm_cap: NORM_CAP,
        }
    }

    pub fn with_metric(mut self, m: Metric) -> Self {
        self.metric = Some(m);
        self
    }
}

fn rhs(h: &impl Fn(f64, &FockState) -> FockState, t: f64, psi: &FockState) -> FockState {
    h(t, psi).scale(-I)
}

fn axpy(y: &FockState, a: f64, x: &FockState) -> FockState {
    y + &x.scale(C64::from(a))
}

fn rk4_step(h: &impl Fn(f64, &FockState) -> FockState, t: f64, psi: &FockState, dt: f64) -> FockState {
    let k1 = rhs(h, t, psi);
    let k2 = rhs(h, t + 0.5 * dt, &axpy(psi, 0.5 * dt, &k1));
    let k3 = rhs(h, t + 0.5 * dt, &axpy(psi, 0.5 * dt, &k2));
    let k4 = rhs(h, t + dt, &axpy(psi, dt, &k3));
    let sum = &(&k1 + &k4) + &(&k2 + &k3).scale(C64::from(2.0));
    axpy(psi, dt / 6.0, &sum)
}

// Dormand-Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One DP5(4) step; returns the fifth-order solution and the error norm.
fn dp_step(
    h: &impl Fn(f64, &FockState) -> FockState,
    t: f64,
    psi: &FockState,
    dt: f64,
) -> (FockState, f64) {
    let mut k: Vec<FockState> = Vec::with_capacity(7);
    for s in 0..7 {
        let mut y = psi.clone();
        for (j, kj) in k.iter().enumerate() {
            if DP_A[s][j] != 0.0 {
                y = axpy(&y, dt * DP_A[s][j], kj);
            }
        }
        k.push(rhs(h, t + DP_C[s] * dt, &y));
    }
    let mut y5 = psi.clone();
    let mut err = FockState::zeros(psi.dim()).expect("dimension already validated");
    for s in 0..7 {
        if DP_B5[s] != 0.0 {
            y5 = axpy(&y5, dt * DP_B5[s], &k[s]);
        }
        err = axpy(&err, dt * (DP_B5[s] - DP_B4[s]), &k[s]);
    }
    (y5, err.norm())
}

/// Integrates `i d|psi>/dt = H(t)|psi>` (hbar = 1) from `grid[0]`, where
/// the state is `psi0`, through every point of a strictly monotone grid.
/// Decreasing grids integrate backward in time; the returned trajectory is
/// always ordered by increasing time.
pub fn integrate(
    hamiltonian: impl Fn(f64) -> FockOperator,
    psi0: &FockState,
    grid: &[f64],
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    integrate_action(|t, v| hamiltonian(t).apply(v), psi0, grid, opts)
}

/// As [`integrate`], with `H(t)` given by its action `(t, psi) -> H(t) psi`,
/// so that structured operators never need to be formed as dense matrices.
pub fn integrate_action(
    hamiltonian: impl Fn(f64, &FockState) -> FockState,
    psi0: &FockState,
    grid: &[f64],
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    if grid.len() < 2 {
        return Err(Error::GridTooCoarse {
            points: grid.len(),
            needed: 2,
        });
    }
    let forward = grid[1] > grid[0];
    if grid
        .windows(2)
        .any(|w| !(if forward { w[1] > w[0] } else { w[1] < w[0] }))
    {
        return Err(Error::NonUniformGrid);
    }
    let metric = match &opts.metric {
        Some(m) => m.clone(),
        None => Metric::identity(psi0.dim())?,
    };
    if metric.dim() != psi0.dim() {
        return Err(Error::DimensionMismatch {
            expected: metric.dim(),
            found: psi0.dim(),
        });
    }
    match opts.method {
        Method::Rk4 { max_step } if !(max_step > 0.0) => return Err(Error::InvalidStep(max_step)),
        Method::DormandPrince { tol } if !(tol > 0.0) => return Err(Error::InvalidStep(tol)),
        _ => {}
    }

    let mut times = vec![grid[0]];
    let mut states = vec![psi0.clone()];
    let finish = |mut times: Vec<f64>, mut states: Vec<FockState>| {
        if !forward {
            times.reverse();
            states.reverse();
        }
        Trajectory::new(times, states, &metric)
    };

    let mut psi = psi0.clone();
    // carried between intervals by the adaptive scheme
    let mut dt_try = (grid[1] - grid[0]).abs();
    for w in grid.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let fail = |reason: String, t: f64, times: Vec<f64>, states: Vec<FockState>| {
            let partial = finish(times, states).map(Box::new);
            match partial {
                Ok(partial) => Error::IntegrationFailed { t, reason, partial },
                Err(e) => e,
            }
        };
        match opts.method {
            Method::Rk4 { max_step } => {
                let span = t1 - t0;
                let n = (span.abs() / max_step).ceil().max(1.0) as usize;
                let dt = span / n as f64;
                for j in 0..n {
                    psi = rk4_step(&hamiltonian, t0 + j as f64 * dt, &psi, dt);
                }
            }
            Method::DormandPrince { tol } => {
                let dir = (t1 - t0).signum();
                let mut t = t0;
                let min_step = 1e-13 * t0.abs().max(t1.abs()).max(1.0);
                while (t1 - t) * dir > 0.0 {
                    let mut dt = dt_try.min((t1 - t).abs());
                    let last = dt >= (t1 - t).abs();
                    let (y, err) = dp_step(&hamiltonian, t, &psi, dir * dt);
                    let scale = psi.norm().max(1.0);
                    let ratio = err / (tol * scale);
                    if ratio <= 1.0 {
                        t = if last { t1 } else { t + dir * dt };
                        psi = y;
                    }
                    let factor = if ratio == 0.0 {
                        5.0
                    } else {
                        (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    dt *= factor;
                    if dt < min_step {
                        return Err(fail("step size underflow".into(), t, times, states));
                    }
                    dt_try = dt;
                }
            }
        }
        if !psi.is_finite() {
            return Err(fail("non-finite state".into(), t1, times, states));
        }
        let n = metric.norm_sq(&psi);
        times.push(t1);
        states.push(psi.clone());
        if n > opts.norm_cap {
            return Err(fail(format!("norm {n:e} exceeds cap"), t1, times, states));
        }
    }
    finish(times, states)
}

/// Integrates outward from `t = 0` in both directions over a grid that is
/// symmetric about zero and contains it.
pub fn integrate_symmetric(
    hamiltonian: impl Fn(f64, &FockState) -> FockState,
    psi_at_zero: &FockState,
    grid: &[f64],
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    fd::check_symmetric(grid)?;
    if grid.len() % 2 == 0 || grid.len() < 3 {
        return Err(Error::MissingTimePair(0.0));
    }
    let mid = grid.len() / 2;
    let fwd = integrate_action(&hamiltonian, psi_at_zero, &grid[mid..], opts)?;
    let back_grid: Vec<f64> = grid[..=mid].iter().rev().copied().collect();
    let back = integrate_action(&hamiltonian, psi_at_zero, &back_grid, opts)?;
    let mut times = back.times.clone();
    let mut states = back.states.clone();
    times.extend_from_slice(&fwd.times[1..]);
    states.extend_from_slice(&fwd.states[1..]);
    let metric = match &opts.metric {
        Some(m) => m.clone(),
        None => Metric::identity(psi_at_zero.dim())?,
    };
    Trajectory::new(times, states, &metric)
}

/// Lewis-Riesenfeld phases of an invariant eigenbasis.
#[derive(Clone, Debug)]
pub struct LrPhases {
    /// Grid points where central differences are available.
    pub times: Vec<f64>,
    /// `d(alpha_n)/dt` per basis vector and time.
    pub rates: Vec<Vec<C64>>,
    /// `<n,t|rho H|n,t>` part of the rate.
    pub dynamical_rates: Vec<Vec<C64>>,
    /// `-i <n,t|rho d/dt|n,t>` part of the rate.
    pub geometric_rates: Vec<Vec<C64>>,
    pub phases: Vec<Vec<C64>>,
    pub dynamical: Vec<Vec<C64>>,
    pub geometric: Vec<Vec<C64>>,
    /// Largest normalized `|<m,t|rho L|n,t>|`, `m != n`.
    pub max_offdiag: f64,
}

/// Cumulative trapezoid integral of `rates` over `times`, zero at `t = 0`
/// when the grid contains it and at `times[0]` otherwise.
pub fn phases_from_rates(times: &[f64], rates: &[C64]) -> Vec<C64> {
    let mut acc = vec![C64::from(0.0); times.len()];
    for k in 1..times.len() {
        acc[k] = acc[k - 1] + 0.5 * (rates[k] + rates[k - 1]) * (times[k] - times[k - 1]);
    }
    let scale = times.iter().fold(0.0f64, |m, t| m.max(t.abs())).max(1.0);
    if let Some(k0) = times.iter().position(|t| t.abs() <= 1e-12 * scale) {
        let origin = acc[k0];
        for a in &mut acc {
            *a -= origin;
        }
    }
    acc
}

/// Extracts `alpha_n(t) = int_0^t <n|rho (H - i d/dt)|n> dtau` from sampled
/// basis trajectories, together with the off-diagonal elements of the
/// Schrödinger operator as a check that the basis is invariant.
pub fn lr_phase_extract(
    basis: &[Trajectory],
    hamiltonian: impl Fn(f64) -> FockOperator,
    metric: impl Fn(f64) -> Metric,
    offdiag_tol: f64,
) -> Result<LrPhases> {
    let Some(first) = basis.first() else {
        return Err(Error::IncompleteBasis { deficit: 1.0 });
    };
    let grid = first.times();
    if grid.len() < 3 {
        return Err(Error::GridTooCoarse {
            points: grid.len(),
            needed: 3,
        });
    }
    let h = fd::uniform_spacing(grid)?;
    if basis.iter().any(|b| b.times() != grid) {
        return Err(Error::NonUniformGrid);
    }
    let idx = fd::interior(grid.len());
    let times: Vec<f64> = grid[idx.clone()].to_vec();
    let nb = basis.len();
    let mut dynr = vec![Vec::with_capacity(times.len()); nb];
    let mut geor = vec![Vec::with_capacity(times.len()); nb];
    let mut max_offdiag = 0.0f64;

    for k in idx {
        let t = grid[k];
        let ham = hamiltonian(t);
        let m = metric(t);
        let vs: Vec<&FockState> = basis.iter().map(|b| &b.states()[k]).collect();
        let rho_v: Vec<FockState> = vs.iter().map(|v| m.rho().apply(v)).collect();
        let norms: Vec<f64> = vs.iter().zip(&rho_v).map(|(v, rv)| v.inner(rv).re).collect();
        for (n, b) in basis.iter().enumerate() {
            let hv = ham.apply(vs[n]);
            let dv = fd::state_derivative(b.states(), k, h);
            let lv = &hv - &dv.scale(I);
            dynr[n].push(rho_v[n].inner(&hv) / norms[n]);
            geor[n].push(-I * rho_v[n].inner(&dv) / norms[n]);
            for mm in 0..nb {
                if mm != n {
                    let el = rho_v[mm].inner(&lv).norm() / (norms[mm] * norms[n]).sqrt();
                    max_offdiag = max_offdiag.max(el);
                }
            }
        }
    }
    if max_offdiag > offdiag_tol {
        return Err(Error::NotAnInvariantBasis {
            residual: max_offdiag,
        });
    }
    let rates: Vec<Vec<C64>> = dynr
        .iter()
        .zip(&geor)
        .map(|(d, g)| d.iter().zip(g).map(|(a, b)| a + b).collect())
        .collect();
    let integ = |r: &Vec<Vec<C64>>| -> Vec<Vec<C64>> {
        r.iter().map(|x| phases_from_rates(&times, x)).collect()
    };
    Ok(LrPhases {
        phases: integ(&rates),
        dynamical: integ(&dynr),
        geometric: integ(&geor),
        times,
        rates,
        dynamical_rates: dynr,
        geometric_rates: geor,
        max_offdiag,
    })
}

/// Expansion coefficients `c_n = <n,0|rho|psi> / <n,0|rho|n,0>`. Fails when
/// the remainder `psi - sum c_n |n,0>` carries more than `tol` of the
/// rho-norm of `psi`.
pub fn projection_coefficients(
    psi: &FockState,
    basis_at_zero: &[FockState],
    m: &Metric,
    tol: f64,
) -> Result<Vec<C64>> {
    let mut coeffs = Vec::with_capacity(basis_at_zero.len());
    let mut rem = psi.clone();
    for b in basis_at_zero {
        let c = pseudo_inner(b, psi, m)? / pseudo_inner(b, b, m)?;
        rem = &rem - &b.scale(c);
        coeffs.push(c);
    }
    let total = m.norm_sq(psi);
    let deficit = (m.norm_sq(&rem) / total).sqrt();
    if deficit > tol {
        return Err(Error::IncompleteBasis { deficit });
    }
    Ok(coeffs)
}

/// `sum_n c_n exp(-i alpha_n(t)) |n,t>`.
pub fn assemble_solution(coeffs: &[C64], phases: &[C64], basis: &[FockState]) -> Result<FockState> {
    if coeffs.len() != phases.len() || coeffs.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: coeffs.len(),
            found: phases.len().min(basis.len()),
        });
    }
    let Some(b0) = basis.first() else {
        return Err(Error::IncompleteBasis { deficit: 1.0 });
    };
    let mut psi = FockState::zeros(b0.dim())?;
    for ((c, a), b) in coeffs.iter().zip(phases).zip(basis) {
        psi = &psi + &b.scale(c * (-I * a).exp());
    }
    Ok(psi)
}

/// `max_t |conj(alpha(-t)) + alpha(t)|` over every tracked phase.
pub fn phase_parity_check(times: &[f64], phases: &[Vec<C64>]) -> Result<f64> {
    fd::check_symmetric(times)?;
    let mut worst = 0.0f64;
    for ph in phases {
        if ph.len() != times.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                found: ph.len(),
            });
        }
        for k in 0..times.len() {
            let j = fd::mirror_index(times, k);
            worst = worst.max((ph[j].conj() + ph[k]).norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator(dim: usize, w: f64) -> FockOperator {
        FockOperator::shifted_number(dim).unwrap().scale(C64::from(w))
    }

    #[test]
    fn stationary_state_of_free_oscillator() {
        let dim = 6;
        let h = oscillator(dim, 1.0);
        let grid = fd::linspace(0.0, 3.0, 31);
        let v = FockState::vacuum(dim).unwrap();
        for opts in [IntegrateOptions::rk4(1e-3), IntegrateOptions::adaptive(1e-12)] {
            let tr = integrate(|_| h.clone(), &v, &grid, &opts).unwrap();
            for (t, s) in tr.times().iter().zip(tr.states()) {
                let exact = (-I * 0.5 * t).exp();
                assert!((s.amplitude(0) - exact).norm() < 1e-9, "t={t}");
            }
        }
    }

    #[test]
    fn backward_grid_returns_increasing_times() {
        let dim = 4;
        let h = oscillator(dim, 2.0);
        let grid = fd::linspace(0.0, -1.0, 11);
        let v = FockState::basis(dim, 1).unwrap();
        let tr = integrate(|_| h.clone(), &v, &grid, &IntegrateOptions::adaptive(1e-12)).unwrap();
        assert_eq!(tr.times()[0], -1.0);
        let exact = (I * 3.0).exp();
        assert!((tr.states()[0].amplitude(1) - exact).norm() < 1e-9);
    }

    #[test]
    fn growing_state_hits_the_cap() {
        let h = FockOperator::identity(2).unwrap().scale(I * 5.0);
        let grid = fd::linspace(0.0, 10.0, 101);
        let v = FockState::vacuum(2).unwrap();
        match integrate(|_| h.clone(), &v, &grid, &IntegrateOptions::rk4(1e-2)) {
            Err(Error::IntegrationFailed { partial, .. }) => {
                assert!(partial.len() > 1 && partial.len() < 101);
            }
            other => panic!("expected capped failure, got {other:?}"),
        }
    }

    #[test]
    fn hermitian_eigenbasis_phases_are_dynamical() {
        let dim = 5;
        let h = oscillator(dim, 1.3);
        let grid = fd::symmetric_grid(1.0, 20);
        let m = Metric::identity(dim).unwrap();
        let basis: Vec<Trajectory> = (0..3)
            .map(|n| {
                Trajectory::from_fn(&grid, |_| FockState::basis(dim, n).unwrap(), &m).unwrap()
            })
            .collect();
        let ph = lr_phase_extract(&basis, |_| h.clone(), |_| m.clone(), 1e-10).unwrap();
        for n in 0..3 {
            let e = 1.3 * (n as f64 + 0.5);
            for (k, t) in ph.times.iter().enumerate() {
                assert!((ph.phases[n][k] - e * t).norm() < 1e-12);
                assert!(ph.geometric[n][k].norm() < 1e-12);
            }
        }
        assert!(phase_parity_check(&ph.times, &ph.phases).unwrap() < 1e-12);
    }

    #[test]
    fn non_invariant_basis_is_rejected() {
        let dim = 3;
        let (a, ad) = crate::fock::ladder_ops(dim).unwrap();
        let h = &a + &ad;
        let grid = fd::linspace(0.0, 1.0, 9);
        let m = Metric::identity(dim).unwrap();
        let basis: Vec<Trajectory> = (0..2)
            .map(|n| {
                Trajectory::from_fn(&grid, |_| FockState::basis(dim, n).unwrap(), &m).unwrap()
            })
            .collect();
        assert!(matches!(
            lr_phase_extract(&basis, |_| h.clone(), |_| m.clone(), 1e-6),
            Err(Error::NotAnInvariantBasis { .. })
        ));
    }

    #[test]
    fn single_term_assembly() {
        let b = vec![FockState::basis(3, 2).unwrap()];
        let psi = assemble_solution(&[C64::from(1.0)], &[C64::from(0.7)], &b).unwrap();
        assert!((psi.amplitude(2) - (-I * 0.7).exp()).norm() < 1e-15);
    }

    #[test]
    fn projection_reports_deficit() {
        let m = Metric::identity(3).unwrap();
        let b = vec![FockState::basis(3, 0).unwrap()];
        let psi = FockState::basis(3, 1).unwrap();
        assert!(matches!(
            projection_coefficients(&psi, &b, &m, 1e-8),
            Err(Error::IncompleteBasis { .. })
        ));
    }

    #[test]
    fn parity_check_requires_symmetric_grid() {
        let r = phase_parity_check(&[0.0, 1.0], &[vec![C64::from(0.0); 2]]);
        assert!(matches!(r, Err(Error::AsymmetricGrid)));
    }
}
