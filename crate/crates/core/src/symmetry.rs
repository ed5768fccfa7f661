//! Time-dependent antilinear symmetries and regime classification.
//!
//! Antilinear operators enter every relation through their linear part:
//! `H o K` has linear part `H L`, `K o H` has linear part `L conj(H)`.

use std::sync::Arc;

use crate::casimir::{mode_eigen, spectral_solve, squeeze_params, CasimirModel, CasimirParams};
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::fd;
use crate::fock::{matrix_exp, AntilinearOperator, FockOperator, FockState, Truncation, C64, I};
use crate::metric::{pseudo_inner, Metric};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    Unbroken,
    Broken,
    ExceptionalPoint,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Unbroken => "unbroken",
            Regime::Broken => "broken",
            Regime::ExceptionalPoint => "exceptional_point",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How an eigenvector is mapped onto its time-reversed partner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartnerMatch {
    /// Unimodular phase minimizing the residual, at the first grid time.
    pub lambda: C64,
    /// `|<n,-t|rho|K n,t>|` at the first grid time.
    pub modulus: f64,
    /// `max_t min_|lambda|=1 ||K|n,t> - lambda |n,-t>||_rho`.
    pub residual: f64,
    /// Largest change of the phase estimate along the grid.
    pub drift: f64,
}

#[derive(Clone, Debug)]
pub struct SymmetryVerdict {
    pub regime: Regime,
    /// `(epsilon_n, partner)`, the partner being the available eigenvalue
    /// closest to `conj(epsilon_n)`.
    pub eigenvalue_pairs: Vec<(C64, C64)>,
    pub unbroken_residuals: Vec<f64>,
    pub matches: Vec<PartnerMatch>,
    /// Critical detuning when the parameters sit at the exceptional point.
    pub ep_parameter: Option<f64>,
    /// Largest normalized overlap between distinct eigenvectors.
    pub coalescence: f64,
}

impl SymmetryVerdict {
    pub fn max_residual(&self) -> f64 {
        self.unbroken_residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.eigenvalue_pairs.iter().fold(0.0, |m, (e, _)| m.max(e.im.abs()))
    }
}

/// A linear Lewis-Riesenfeld invariant `I(t)`.
#[derive(Clone)]
pub struct LrInvariant {
    f: Arc<dyn Fn(f64) -> FockOperator + Send + Sync>,
}

impl LrInvariant {
    pub fn new(f: impl Fn(f64) -> FockOperator + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f) }
    }

    pub fn at(&self, t: f64) -> FockOperator {
        (self.f)(t)
    }
}

impl std::fmt::Debug for LrInvariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("LrInvariant")
    }
}

/// Default tolerances for [`classify_regime`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifyTol {
    pub residual: f64,
    pub imag: f64,
    pub coalescence: f64,
}

impl Default for ClassifyTol {
    fn default() -> Self {
        Self {
            residual: 1e-6,
            imag: 1e-8,
            coalescence: 1e-6,
        }
    }
}

/// `||i dL/dt + H(-t) L - L conj(H(t))||_F` for the linear part `L` of the
/// antilinear symmetry.
pub fn antilinear_symmetry_residual(
    symmetry: impl Fn(f64) -> AntilinearOperator,
    hamiltonian: impl Fn(f64) -> FockOperator,
    t: f64,
    dt: f64,
    mask: Truncation,
) -> Result<f64> {
    let l = symmetry(t).linear_part().clone();
    let ld = fd::derivative_op(|s| symmetry(s).linear_part().clone(), t, dt)?;
    let r = &(&ld.scale(I) + &(&hamiltonian(-t) * &l)) - &(&l * &hamiltonian(t).conj());
    Ok(r.masked_norm(mask))
}

/// `||i dI/dt + I H - H I||_F`.
pub fn linear_invariant_residual(
    inv: &LrInvariant,
    hamiltonian: impl Fn(f64) -> FockOperator,
    t: f64,
    dt: f64,
    mask: Truncation,
) -> Result<f64> {
    let i_t = inv.at(t);
    let d = fd::derivative_op(|s| inv.at(s), t, dt)?;
    let h = hamiltonian(t);
    let r = &d.scale(I) + &i_t.commutator(&h);
    Ok(r.masked_norm(mask))
}

/// `||i dX/dt - X conj(H(t)) + H^dagger(-t) X||_F / ||X||_F` for the linear
/// part `X` of an antilinear metric. Relative, since `X` carries the scale of
/// the metric.
pub fn antilinear_metric_residual(
    xi: impl Fn(f64) -> AntilinearOperator,
    hamiltonian: impl Fn(f64) -> FockOperator,
    t: f64,
    dt: f64,
    mask: Truncation,
) -> Result<f64> {
    let x = xi(t).linear_part().clone();
    let xd = fd::derivative_op(|s| xi(s).linear_part().clone(), t, dt)?;
    let r = &(&xd.scale(I) - &(&x * &hamiltonian(t).conj())) + &(&hamiltonian(-t).adjoint() * &x);
    Ok(r.masked_norm(mask) / x.masked_norm(mask).max(f64::MIN_POSITIVE))
}

/// Checks `K(t) L(t) K^-1(t) = L(-t)` with `L = H - i d/dt` on sampled test
/// trajectories. `act(t, v)` applies the candidate symmetry at time `t`.
/// For each trajectory `psi` the residual is
/// `H(-t) phi + i dphi/dt - act(t, H(t) psi - i dpsi/dt)`, `phi(t) = act(t, psi(t))`,
/// and the largest norm over interior grid points is returned.
pub fn schrodinger_symmetry_residual(
    act: impl Fn(f64, &FockState) -> FockState,
    hamiltonian: impl Fn(f64) -> FockOperator,
    trajectories: &[Trajectory],
    mask: Truncation,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for tr in trajectories {
        let times = tr.times();
        fd::check_symmetric(times)?;
        if times.len() < 3 {
            return Err(Error::GridTooCoarse {
                points: times.len(),
                needed: 3,
            });
        }
        let h = fd::uniform_spacing(times)?;
        let phi: Vec<FockState> = times.iter().zip(tr.states()).map(|(&t, s)| act(t, s)).collect();
        for k in fd::interior(times.len()) {
            let t = times[k];
            let dpsi = fd::state_derivative(tr.states(), k, h);
            let dphi = fd::state_derivative(&phi, k, h);
            let l_psi = &hamiltonian(t).apply(&tr.states()[k]) - &dpsi.scale(I);
            let lhs = &hamiltonian(-t).apply(&phi[k]) + &dphi.scale(I);
            let r = &lhs - &act(t, &l_psi);
            worst = worst.max(r.masked_norm(mask));
        }
    }
    Ok(worst)
}

fn rho_normalized(v: &FockState, m: &Metric) -> FockState {
    v.scale(C64::from(1.0 / m.norm_sq(v).sqrt()))
}

/// Matches `K(t)|n,t>` against `|n,-t>` for every trajectory, estimating the
/// phase `lambda` from the rho-overlap. Vectors are rho-normalized first, so
/// the result does not depend on their scale.
pub fn partner_matches(
    symmetry: impl Fn(f64) -> AntilinearOperator,
    states: &[Trajectory],
    m: &Metric,
) -> Result<Vec<PartnerMatch>> {
    let mut out = Vec::with_capacity(states.len());
    for tr in states {
        let times = tr.times();
        fd::check_symmetric(times)?;
        let mut first: Option<C64> = None;
        let mut modulus = 0.0;
        let mut residual = 0.0f64;
        let mut drift = 0.0f64;
        for (k, &t) in times.iter().enumerate() {
            let j = fd::mirror_index(times, k);
            let v = rho_normalized(&tr.states()[k], m);
            let w = rho_normalized(&tr.states()[j], m);
            let x = symmetry(t).apply(&v);
            let ov = pseudo_inner(&w, &x, m)?;
            let lam = if ov.norm() > 0.0 { ov / ov.norm() } else { C64::from(1.0) };
            let r = m.norm_sq(&(&x - &w.scale(lam))).max(0.0).sqrt();
            residual = residual.max(r);
            match first {
                None => {
                    first = Some(lam);
                    modulus = ov.norm();
                }
                Some(l0) => drift = drift.max((lam - l0).norm()),
            }
        }
        out.push(PartnerMatch {
            lambda: first.unwrap_or(C64::from(1.0)),
            modulus,
            residual,
            drift,
        });
    }
    Ok(out)
}

/// `max_t ||K(t)|n,t> - lambda_n |n,-t>||_rho` for prescribed phases.
pub fn fixed_phase_residuals(
    symmetry: impl Fn(f64) -> AntilinearOperator,
    states: &[Trajectory],
    lambdas: &[C64],
    m: &Metric,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(states.len());
    for (tr, lam) in states.iter().zip(lambdas) {
        let times = tr.times();
        fd::check_symmetric(times)?;
        let mut worst = 0.0f64;
        for (k, &t) in times.iter().enumerate() {
            let v = rho_normalized(&tr.states()[k], m);
            let w = rho_normalized(&tr.states()[fd::mirror_index(times, k)], m);
            let x = symmetry(t).apply(&v);
            worst = worst.max(m.norm_sq(&(&x - &w.scale(*lam))).max(0.0).sqrt());
        }
        out.push(worst);
    }
    Ok(out)
}

/// Eigenvalues of the Schrödinger operator and sampled eigenvectors on a
/// grid symmetric about zero. `eigenvalues` may list more values than there
/// are sampled vectors, for instance both members of each pair.
#[derive(Clone, Debug)]
pub struct EigenData {
    pub eigenvalues: Vec<C64>,
    pub states: Vec<Trajectory>,
}

fn max_coalescence(states: &[Trajectory], m: &Metric) -> Result<f64> {
    let mut worst = 0.0f64;
    for a in 0..states.len() {
        for b in a + 1..states.len() {
            for (u, v) in states[a].states().iter().zip(states[b].states()) {
                let u = rho_normalized(u, m);
                let v = rho_normalized(v, m);
                worst = worst.max(pseudo_inner(&u, &v, m)?.norm());
            }
        }
    }
    Ok(worst)
}

fn pair_up(eigenvalues: &[C64]) -> Vec<(C64, C64)> {
    eigenvalues
        .iter()
        .map(|e| {
            let target = e.conj();
            let partner = eigenvalues
                .iter()
                .copied()
                .min_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm()))
                .unwrap_or(target);
            (*e, partner)
        })
        .collect()
}

/// Unbroken when every eigenvector is mapped onto its time-reversed partner
/// within `tol.residual` and every eigenvalue is real within `tol.imag`;
/// exceptional point when two distinct eigenvectors coalesce; broken
/// otherwise.
pub fn classify_regime(
    data: &EigenData,
    symmetry: impl Fn(f64) -> AntilinearOperator,
    m: &Metric,
    tol: ClassifyTol,
) -> Result<SymmetryVerdict> {
    let matches = partner_matches(&symmetry, &data.states, m)?;
    let unbroken_residuals: Vec<f64> = matches.iter().map(|x| x.residual).collect();
    let eigenvalue_pairs = pair_up(&data.eigenvalues);
    let coalescence = max_coalescence(&data.states, m)?;
    let max_imag = data.eigenvalues.iter().fold(0.0f64, |a, e| a.max(e.im.abs()));
    let max_res = unbroken_residuals.iter().copied().fold(0.0, f64::max);
    let regime = if coalescence >= 1.0 - tol.coalescence {
        Regime::ExceptionalPoint
    } else if max_res <= tol.residual && max_imag <= tol.imag {
        Regime::Unbroken
    } else {
        Regime::Broken
    };
    Ok(SymmetryVerdict {
        regime,
        eigenvalue_pairs,
        unbroken_residuals,
        matches,
        ep_parameter: None,
        coalescence,
    })
}

/// Samples `|n,t> = U^dagger(t) S(r) |n>` for `n < levels` on `grid`.
pub fn casimir_eigendata(
    p: &CasimirParams,
    dim: usize,
    grid: &[f64],
    levels: usize,
) -> Result<(EigenData, Metric)> {
    let sr = spectral_solve(p, dim)?;
    let m = sr.model().metric()?;
    let levels = levels.min(dim);
    let states = (0..levels)
        .map(|n| Trajectory::from_fn(grid, |t| sr.eigenvector(t, n), &m))
        .collect::<Result<Vec<_>>>()?;
    let mut eigenvalues: Vec<C64> = sr.eigenvalues[..levels].to_vec();
    if sr.r.im != 0.0 {
        // the conjugate branch of the squeezing strength yields the partners
        let model = sr.model();
        let other = model.unsqueeze(&model.rwa_su11(), sr.r.conj());
        eigenvalues.extend((0..levels).map(|n| other.diagonal_value(n)));
    }
    Ok((EigenData { eigenvalues, states }, m))
}

/// Classifies the Casimir model with `PT` as the candidate symmetry.
pub fn classify_casimir(
    p: &CasimirParams,
    dim: usize,
    grid: &[f64],
    levels: usize,
    tol: ClassifyTol,
) -> Result<SymmetryVerdict> {
    if let Err(Error::ExceptionalPoint { delta, .. }) = squeeze_params(p) {
        let mode = mode_eigen(p);
        return Ok(SymmetryVerdict {
            regime: Regime::ExceptionalPoint,
            eigenvalue_pairs: vec![(mode.values[0], mode.values[1])],
            unbroken_residuals: Vec::new(),
            matches: Vec::new(),
            ep_parameter: Some(delta),
            coalescence: mode.overlap,
        });
    }
    let (data, m) = casimir_eigendata(p, dim, grid, levels)?;
    let pt = AntilinearOperator::parity_time(dim)?;
    classify_regime(&data, |_| pt.clone(), &m, tol)
}

/// Parameters of `C(t) = exp[i phi (N + 1/2) - i mu (alpha a+^2 e^{i theta} + beta a^2 e^{-i theta})]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CParams {
    pub phi: C64,
    pub mu: C64,
    pub theta: f64,
    /// Set when the squeezing strength is complex (broken regime).
    pub complex: bool,
}

/// `phi = pi cosh(2 sqrt(ab) r)`, `mu = -pi sinh(2 sqrt(ab) r) / (2 sqrt(ab))`,
/// `theta = 2 xi(t)`.
pub fn c_operator_params(p: &CasimirParams, t: f64) -> Result<CParams> {
    let sq = squeeze_params(p)?;
    let sab = p.sqrt_ab();
    let c = sq.r * (2.0 * sab);
    let pi = std::f64::consts::PI;
    let mu = if sab == 0.0 {
        -pi * sq.r
    } else {
        -pi * c.sinh() / (2.0 * sab)
    };
    Ok(CParams {
        phi: pi * c.cosh(),
        mu,
        theta: 2.0 * p.xi(t),
        complex: sq.r.im != 0.0,
    })
}

/// Padding factor of the space in which `C(t)` is exponentiated before it is
/// cut back to the requested dimension.
pub const C_PADDING: usize = 8;

fn c_generator(p: &CasimirParams, cp: &CParams, theta: f64, mu_sign: f64) -> crate::su11::Su11 {
    let ph = (I * theta).exp();
    let mu = cp.mu * mu_sign;
    crate::su11::Su11::new(
        I * cp.phi * 2.0,
        -I * mu * ph * (2.0 * p.alpha),
        -I * mu * ph.conj() * (2.0 * p.beta),
    )
}

/// `C(t)` with the exponential computed once. The generator depends on `t`
/// only through `theta = 2 xi(t)`, and `C(theta) = R C(0) R^-1` with the
/// diagonal `R = e^{i theta N / 2}`, exactly, also under truncation.
///
/// The exponent is unbounded in the number of quanta, so it is exponentiated
/// in a space `C_PADDING` times larger and cut back; exponentiating at the
/// target dimension lets the cutoff contaminate the leading levels.
#[derive(Clone, Debug)]
pub struct COperator {
    p: CasimirParams,
    params: CParams,
    mu_sign: f64,
    base: FockOperator,
}

impl COperator {
    /// `mu_sign = -1` flips the sign of `mu`.
    pub fn new(p: &CasimirParams, dim: usize, mu_sign: f64) -> Result<Self> {
        let params = c_operator_params(p, 0.0)?;
        let big = dim * C_PADDING;
        let full = matrix_exp(&c_generator(p, &params, 0.0, mu_sign).to_operator(big)?)?;
        Ok(Self {
            p: *p,
            params,
            mu_sign,
            base: FockOperator::from_fn(dim, |i, j| full.get(i, j))?,
        })
    }

    pub fn params(&self) -> &CParams {
        &self.params
    }

    pub fn mu_sign(&self) -> f64 {
        self.mu_sign
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn at(&self, t: f64) -> FockOperator {
        let theta = 2.0 * self.p.xi(t);
        FockOperator::from_fn(self.dim(), |i, j| {
            self.base.get(i, j) * (I * (0.5 * theta * (i as f64 - j as f64))).exp()
        })
        .expect("dimension validated")
    }

    /// `C(t) PT`, with linear part `C(t) P`.
    pub fn cpt(&self, t: f64) -> AntilinearOperator {
        let c = self.at(t);
        let lin = FockOperator::from_fn(self.dim(), |i, j| if j % 2 == 0 { c.get(i, j) } else { -c.get(i, j) })
            .expect("dimension validated");
        AntilinearOperator::new(lin).expect("dimension validated")
    }

    /// `Xi(t) = rho C(t) PT`.
    pub fn antilinear_metric(&self, t: f64, m: &Metric) -> AntilinearOperator {
        AntilinearOperator::new(m.rho() * self.cpt(t).linear_part()).expect("dimension validated")
    }
}

pub fn build_c_operator_signed(p: &CasimirParams, dim: usize, t: f64, mu_sign: f64) -> Result<FockOperator> {
    Ok(COperator::new(p, dim, mu_sign)?.at(t))
}

pub fn build_c_operator(p: &CasimirParams, dim: usize, t: f64) -> Result<FockOperator> {
    build_c_operator_signed(p, dim, t, 1.0)
}

/// `C(t) PT`, as an antilinear operator with linear part `C(t) P`.
pub fn cpt_operator(p: &CasimirParams, dim: usize, t: f64, mu_sign: f64) -> Result<AntilinearOperator> {
    Ok(COperator::new(p, dim, mu_sign)?.cpt(t))
}

/// `Xi(t) = rho C(t) PT`.
pub fn antilinear_metric(
    p: &CasimirParams,
    dim: usize,
    t: f64,
    mu_sign: f64,
    m: &Metric,
) -> Result<AntilinearOperator> {
    Ok(COperator::new(p, dim, mu_sign)?.antilinear_metric(t, m))
}

/// Residual of the antilinear-metric relation for `Xi(t) = rho C(t) PT`
/// against the given drive, on the trusted block.
pub fn casimir_antilinear_metric_residual(
    p: &CasimirParams,
    dim: usize,
    drive: crate::casimir::Drive,
    t: f64,
    dt: f64,
    mu_sign: f64,
) -> Result<f64> {
    let model = CasimirModel::new(*p, dim)?;
    let m = model.metric()?;
    let c = COperator::new(p, dim, mu_sign)?;
    antilinear_metric_residual(|s| c.antilinear_metric(s, &m), |s| model.drive(drive, s), t, dt, Truncation::Trusted)
}

/// `max_n ||(C PT)^2 |n,t> - |n,t>||_rho / || |n,t> ||_rho`.
pub fn cpt_square_residual(cpt: &AntilinearOperator, states: &[FockState], m: &Metric) -> f64 {
    states
        .iter()
        .map(|v| {
            let w = cpt.apply(&cpt.apply(v));
            (m.norm_sq(&(&w - v)).max(0.0) / m.norm_sq(v)).sqrt()
        })
        .fold(0.0, f64::max)
}

/// `I(t) = U^dagger(t) S e^{i pi (N + 1/2)} S^-1 U(t)`.
pub fn casimir_invariant(model: &CasimirModel, r: C64) -> Result<LrInvariant> {
    let s = model.squeeze_operator(r)?;
    let s_inv = s.inverse()?;
    let dim = model.dim();
    let par = FockOperator::from_diagonal(
        &(0..dim)
            .map(|n| (I * std::f64::consts::PI * (n as f64 + 0.5)).exp())
            .collect::<Vec<_>>(),
    )?;
    let core = &(&s * &par) * &s_inv;
    let model = model.clone();
    Ok(LrInvariant::new(move |t| {
        let u = model.frame(t);
        &(&u.adjoint() * &core) * &u
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::casimir::Drive;
    use approx::assert_abs_diff_eq;

    fn rwa(delta: f64, g: f64, alpha: f64, beta: f64) -> CasimirParams {
        CasimirParams::from_rwa(delta, g, alpha, beta, 20.0).unwrap()
    }

    #[test]
    fn commuting_hermitian_case_has_zero_residual() {
        let h = FockOperator::shifted_number(6).unwrap();
        let pt = AntilinearOperator::parity_time(6).unwrap();
        let r = antilinear_symmetry_residual(|_| pt.clone(), |_| h.clone(), 0.4, 1e-3, Truncation::Full)
            .unwrap();
        assert!(r < 1e-12);
        assert!(antilinear_symmetry_residual(|_| pt.clone(), |_| h.clone(), 0.4, 0.0, Truncation::Full).is_err());
    }

    #[test]
    fn parity_time_is_a_symmetry_of_the_modulated_hamiltonian() {
        let p = CasimirParams::new(1.0, 2.0, 0.05, 1.0, 2.0).unwrap();
        let m = CasimirModel::new(p, 16).unwrap();
        let pt = m.parity_time();
        for t in [0.3, 2.1] {
            let r = antilinear_symmetry_residual(|_| pt.clone(), |s| m.hamiltonian(s), t, 1e-4, Truncation::Full)
                .unwrap();
            assert!(r < 1e-6, "{r}");
        }
    }

    #[test]
    fn autonomous_hamiltonian_is_its_own_invariant() {
        let (a, ad) = crate::fock::ladder_ops(5).unwrap();
        let h = &(&ad * &a) + &(&a * &a);
        let hc = h.clone();
        let inv = LrInvariant::new(move |_| hc.clone());
        let r = linear_invariant_residual(&inv, |_| h.clone(), 0.0, 1e-3, Truncation::Full).unwrap();
        assert!(r < 1e-12);
    }

    #[test]
    fn non_commuting_constant_is_not_an_invariant() {
        let (a, ad) = crate::fock::ladder_ops(6).unwrap();
        let x = &a + &ad;
        let inv = LrInvariant::new(move |_| x.clone());
        let h = FockOperator::number(6).unwrap();
        let r = linear_invariant_residual(&inv, |_| h.clone(), 0.0, 1e-3, Truncation::Full).unwrap();
        assert!(r > 1.0);
    }

    #[test]
    fn c_operator_parameters() {
        let cp = c_operator_params(&rwa(1.0, 0.25, 1.0, 1.0), 0.0).unwrap();
        assert_abs_diff_eq!(cp.phi.re, 3.62760, epsilon = 1e-5);
        assert_abs_diff_eq!(cp.mu.re, -0.90690, epsilon = 1e-5);
        assert!(!cp.complex);
        let c = build_c_operator(&rwa(1.0, 0.0, 1.0, 1.0), 8, 0.3).unwrap();
        for n in 0..8 {
            let expected = I * if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((c.get(n, n) - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn c_operator_equals_shifted_parity() {
        // S(r) commutes with parity, so the exponent collapses to i pi (N + 1/2)
        let p = rwa(1.0, 0.25, 1.0, 2.0);
        for dim in [32, 64] {
            let c = build_c_operator(&p, dim, 0.7).unwrap();
            let ip = FockOperator::from_diagonal(
                &(0..dim).map(|n| I * if n % 2 == 0 { 1.0 } else { -1.0 }).collect::<Vec<_>>(),
            )
            .unwrap();
            assert!((&c - &ip).masked_norm(Truncation::Trusted) < 1e-9);
        }
    }

    #[test]
    fn rotated_c_operator_matches_direct_exponential() {
        let p = CasimirParams::new(1.2, 2.0, 0.1, 1.0, 1.5).unwrap();
        let dim = 12;
        let c = COperator::new(&p, dim, 1.0).unwrap();
        for t in [0.0, 0.37, 2.9] {
            let cp = c_operator_params(&p, t).unwrap();
            let big = dim * C_PADDING;
            let full = matrix_exp(&c_generator(&p, &cp, cp.theta, 1.0).to_operator(big).unwrap()).unwrap();
            let direct = FockOperator::from_fn(dim, |i, j| full.get(i, j)).unwrap();
            assert!((&c.at(t) - &direct).frobenius_norm() < 1e-10);
        }
    }

    #[test]
    fn c_operator_is_independent_of_mu_sign() {
        let p = rwa(1.0, 0.25, 1.0, 1.0);
        let plus = build_c_operator_signed(&p, 16, 0.4, 1.0).unwrap();
        let minus = build_c_operator_signed(&p, 16, 0.4, -1.0).unwrap();
        assert!((&plus - &minus).masked_norm(Truncation::Trusted) < 1e-9);
    }

    #[test]
    fn antilinear_metric_relation() {
        let free = rwa(1.0, 0.0, 1.0, 1.0);
        let r = casimir_antilinear_metric_residual(&free, 16, Drive::Rwa, 0.3, 1e-4, 1.0).unwrap();
        assert!(r < 1e-8, "{r}");
        let p = rwa(1.0, 0.25, 1.0, 2.0);
        for drive in [Drive::Rwa, Drive::Full] {
            // H couples the trusted block to the top levels, where C is
            // least accurate; the residual falls off quickly with dim
            let r = casimir_antilinear_metric_residual(&p, 32, drive, 0.3, 1e-4, 1.0).unwrap();
            assert!(r < 1e-6, "{r}");
        }
    }

    #[test]
    fn cpt_maps_eigenvectors_with_a_constant_phase() {
        let p = rwa(1.0, 0.25, 1.0, 1.0);
        let dim = 32;
        let grid = fd::symmetric_grid(0.5, 4);
        let (data, m) = casimir_eigendata(&p, dim, &grid, 6).unwrap();
        let c = COperator::new(&p, dim, 1.0).unwrap();
        let cpt = |t: f64| c.cpt(t);
        let matches = partner_matches(cpt, &data.states, &m).unwrap();
        for x in &matches {
            assert!(x.residual < 1e-6);
            assert!((x.lambda - I).norm() < 1e-6);
            assert!(x.drift < 1e-6);
        }
        let v: Vec<FockState> = data.states.iter().map(|tr| tr.states()[3].clone()).collect();
        assert!(cpt_square_residual(&cpt(grid[3]), &v, &m) < 1e-6);
    }

    #[test]
    fn unbroken_casimir_classification() {
        let p = rwa(1.0, 0.25, 1.0, 1.0);
        let grid = fd::symmetric_grid(1.0, 10);
        let v = classify_casimir(&p, 48, &grid, 6, ClassifyTol::default()).unwrap();
        assert_eq!(v.regime, Regime::Unbroken);
        for (n, m) in v.matches.iter().enumerate() {
            let expected = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((m.lambda - expected).norm() < 1e-8);
            assert!(m.residual < 1e-8);
            assert_abs_diff_eq!(m.modulus, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn broken_casimir_classification() {
        let p = rwa(0.5, 0.5, 1.0, 1.0);
        let grid = fd::symmetric_grid(1.0, 4);
        let v = classify_casimir(&p, 48, &grid, 4, ClassifyTol::default()).unwrap();
        assert_eq!(v.regime, Regime::Broken);
        for (e, partner) in &v.eigenvalue_pairs {
            assert!((e.conj() - partner).norm() < 1e-12);
            assert!(e.im.abs() > 0.1);
        }
    }

    #[test]
    fn exceptional_point_classification() {
        let p = rwa(1.0, 0.25, 1.0, 4.0);
        let v = classify_casimir(&p, 16, &fd::symmetric_grid(1.0, 4), 4, ClassifyTol::default()).unwrap();
        assert_eq!(v.regime, Regime::ExceptionalPoint);
        assert_abs_diff_eq!(v.ep_parameter.unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.coalescence, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn classification_ignores_eigenvector_scale() {
        let p = rwa(1.0, 0.2, 1.0, 2.0);
        let grid = fd::symmetric_grid(0.5, 4);
        let (data, m) = casimir_eigendata(&p, 32, &grid, 3).unwrap();
        let pt = AntilinearOperator::parity_time(32).unwrap();
        let base = partner_matches(|_| pt.clone(), &data.states, &m).unwrap();
        let scaled: Vec<Trajectory> = data
            .states
            .iter()
            .map(|tr| tr.map_states(|_, s| s.scale(C64::new(-2.0, 3.5)), &m).unwrap())
            .collect();
        let again = partner_matches(|_| pt.clone(), &scaled, &m).unwrap();
        for (x, y) in base.iter().zip(&again) {
            assert!((x.residual - y.residual).abs() < 1e-12);
        }
    }

    #[test]
    fn rwa_schrodinger_symmetry() {
        let p = rwa(1.0, 0.25, 1.0, 2.0);
        let dim = 24;
        let m = CasimirModel::new(p, dim).unwrap();
        let (data, _) = casimir_eigendata(&p, dim, &fd::symmetric_grid(0.02, 8), 3).unwrap();
        let pt = m.parity_time();
        let r = schrodinger_symmetry_residual(
            |_, v| pt.apply(v),
            |t| m.drive(Drive::Rwa, t),
            &data.states,
            Truncation::Trusted,
        )
        .unwrap();
        assert!(r < 1e-6, "{r}");
        let par = pt.linear_part().clone();
        let wrong = schrodinger_symmetry_residual(
            |_, v| par.apply(v),
            |t| m.drive(Drive::Rwa, t),
            &data.states,
            Truncation::Trusted,
        )
        .unwrap();
        assert!(wrong > 0.1, "{wrong}");
    }
}
