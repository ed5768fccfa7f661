//! The non-Hermitian dynamical Casimir model.
//!
//! A cavity mode with modulated frequency `omega(t) = omega0 (1 - eps cos kt)`
//! and unbalanced parametric terms,
//!
//! ```text
//! H(t) = omega(t) (N + 1/2) + i chi(t) (alpha a+^2 - beta a^2),
//! chi(t) = omega'(t) / (4 omega(t)),
//! ```
//!
//! is pseudo-Hermitian with the diagonal metric
//! `rho = (beta/alpha)^((N + 1/2)/2)`. In the frame
//! `U(t) = exp(i xi(t) (N + 1/2))` and under the rotating-wave approximation it
//! reduces to `V = Delta (N + 1/2) - g (alpha a+^2 + beta a^2)`, which the
//! generalized squeezing operator `S(r)` diagonalizes.
//!
//! Every Hamiltonian here is quadratic, so besides dense matrices each one
//! has an [`Su11`] form used for cutoff-free similarity transformations and
//! banded application to large states.

use nalgebra::{Matrix2, Vector2};

use crate::dynamics::{phases_from_rates, LrPhases};
use crate::error::{Error, Result};
use crate::fock::{
    ladder_ops, matrix_exp, trusted_levels, AntilinearOperator, FockOperator, FockState, C64, I,
};
use crate::metric::{DysonMap, Metric};
use crate::su11::Su11;
use crate::symmetry::Regime;

/// Relative distance from `Delta = 2 g sqrt(alpha beta)` treated as the
/// exceptional point itself.
pub const EP_TOL: f64 = 1e-12;

/// Largest modulation depth for which the weak-modulation picture is
/// considered reliable. Larger values are accepted with a warning flag.
pub const WEAK_MODULATION: f64 = 0.1;

/// Tolerance on the dense-versus-closed-form spectrum comparison.
pub const DENSE_SPECTRUM_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CasimirParams {
    pub omega0: f64,
    pub kappa: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl CasimirParams {
    pub fn new(omega0: f64, kappa: f64, epsilon: f64, alpha: f64, beta: f64) -> Result<Self> {
        let p = Self {
            omega0,
            kappa,
            epsilon,
            alpha,
            beta,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters with the given detuning and effective coupling at drive
    /// frequency `kappa`: `omega0 = Delta + kappa/2`, `eps = 8 g / kappa`.
    pub fn from_rwa(delta: f64, g: f64, alpha: f64, beta: f64, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::InvalidParams(format!("kappa must be positive, got {kappa}")));
        }
        Self::new(delta + 0.5 * kappa, kappa, 8.0 * g / kappa, alpha, beta)
    }

    fn validate(&self) -> Result<()> {
        let all = [self.omega0, self.kappa, self.epsilon, self.alpha, self.beta];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("parameters must be finite".into()));
        }
        if !(self.omega0 > 0.0) || !(self.kappa > 0.0) {
            return Err(Error::InvalidParams(format!(
                "omega0 and kappa must be positive, got {} and {}",
                self.omega0, self.kappa
            )));
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(Error::InvalidParams(format!(
                "modulation depth must lie in [0, 1), got {}",
                self.epsilon
            )));
        }
        if self.alpha < 0.0 || self.beta < 0.0 {
            return Err(Error::InvalidParams(format!(
                "alpha and beta must be non-negative, got {} and {}",
                self.alpha, self.beta
            )));
        }
        if self.delta() < -1e-12 * self.omega0 {
            return Err(Error::InvalidParams(format!(
                "detuning omega0 - kappa/2 = {} is negative",
                self.delta()
            )));
        }
        Ok(())
    }

    /// `Delta = omega0 - kappa/2`, clamped at zero against rounding.
    pub fn delta(&self) -> f64 {
        let d = self.omega0 - 0.5 * self.kappa;
        if d.abs() <= 1e-12 * self.omega0 {
            0.0
        } else {
            d
        }
    }

    /// `g = eps kappa / 8`.
    pub fn g(&self) -> f64 {
        self.epsilon * self.kappa / 8.0
    }

    pub fn sqrt_ab(&self) -> f64 {
        (self.alpha * self.beta).sqrt()
    }

    /// `2 g sqrt(alpha beta)`, the detuning at which the exceptional point sits.
    pub fn coupling(&self) -> f64 {
        2.0 * self.g() * self.sqrt_ab()
    }

    /// `Omega^2 = 4 (Delta^2 - 4 g^2 alpha beta)`.
    pub fn omega_sq(&self) -> f64 {
        let g = self.g();
        4.0 * (self.delta().powi(2) - 4.0 * g * g * self.alpha * self.beta)
    }

    /// `Omega`, on the positive imaginary axis when `Omega^2 < 0`.
    pub fn big_omega(&self) -> C64 {
        C64::from(self.omega_sq()).sqrt()
    }

    pub fn weak_modulation(&self) -> bool {
        self.epsilon <= WEAK_MODULATION
    }

    pub fn regime(&self) -> Regime {
        let (d, c) = (self.delta(), self.coupling());
        if (d - c).abs() <= EP_TOL * d.max(c).max(f64::MIN_POSITIVE) {
            Regime::ExceptionalPoint
        } else if d > c {
            Regime::Unbroken
        } else {
            Regime::Broken
        }
    }

    /// `omega(t) = omega0 (1 - eps cos(kappa t))`.
    pub fn omega(&self, t: f64) -> f64 {
        self.omega0 * (1.0 - self.epsilon * (self.kappa * t).cos())
    }

    /// `chi(t) = omega'(t) / (4 omega(t))`.
    pub fn chi(&self, t: f64) -> f64 {
        self.omega0 * self.epsilon * self.kappa * (self.kappa * t).sin() / (4.0 * self.omega(t))
    }

    /// `xi(t) = kappa t / 2 - omega0 eps sin(kappa t) / kappa`.
    pub fn xi(&self, t: f64) -> f64 {
        0.5 * self.kappa * t - self.omega0 * self.epsilon * (self.kappa * t).sin() / self.kappa
    }

    /// `xi'(t) = omega(t) - Delta`.
    pub fn xi_dot(&self, t: f64) -> f64 {
        0.5 * self.kappa - self.omega0 * self.epsilon * (self.kappa * t).cos()
    }

    pub fn with_g(&self, g: f64) -> Result<Self> {
        Self::new(self.omega0, self.kappa, 8.0 * g / self.kappa, self.alpha, self.beta)
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::new(delta + 0.5 * self.kappa, self.kappa, self.epsilon, self.alpha, self.beta)
    }
}

/// Squeezing strength of the diagonalizing transformation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Squeeze {
    pub r: C64,
    pub regime: Regime,
    /// Set at exact resonance `Delta = 0`.
    pub resonant: bool,
}

/// `r = artanh(2 g sqrt(alpha beta) / Delta) / (2 sqrt(alpha beta))`.
///
/// Beyond the exceptional point the principal branch
/// `artanh(x) = artanh(1/x) + i pi/2` is used, so `Im r > 0`. With
/// `alpha beta = 0` the limit `r = g / Delta` is returned.
pub fn squeeze_params(p: &CasimirParams) -> Result<Squeeze> {
    let (delta, g, sab) = (p.delta(), p.g(), p.sqrt_ab());
    match p.regime() {
        Regime::ExceptionalPoint => Err(Error::ExceptionalPoint {
            delta,
            coupling: p.coupling(),
        }),
        Regime::Unbroken => {
            let r = if sab == 0.0 {
                g / delta
            } else {
                (p.coupling() / delta).atanh() / (2.0 * sab)
            };
            Ok(Squeeze {
                r: C64::from(r),
                regime: Regime::Unbroken,
                resonant: false,
            })
        }
        Regime::Broken => {
            let half_pi = C64::new(0.0, std::f64::consts::FRAC_PI_2);
            let r = if delta == 0.0 {
                half_pi
            } else {
                C64::from((delta / p.coupling()).atanh()) + half_pi
            };
            Ok(Squeeze {
                r: r / (2.0 * sab),
                regime: Regime::Broken,
                resonant: delta == 0.0,
            })
        }
    }
}

/// `[[Delta, -2 g alpha], [2 g beta, -Delta]]`, the linear map generated by
/// the RWA interaction on `(a, a+)`. Its eigenvalues are
/// `+-sqrt(Delta^2 - 4 g^2 alpha beta)`.
pub fn mode_matrix(p: &CasimirParams) -> Matrix2<C64> {
    let (d, g) = (p.delta(), p.g());
    Matrix2::new(
        C64::from(d),
        C64::from(-2.0 * g * p.alpha),
        C64::from(2.0 * g * p.beta),
        C64::from(-d),
    )
}

/// Eigen-data of the mode matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeEigen {
    /// Sorted by real part, then imaginary part.
    pub values: [C64; 2],
    /// `(lambda_1 - lambda_2)^2 / 4`; its sign separates the regimes.
    pub discriminant: f64,
    /// `|<v1|v2>|` of the normalized eigenvectors; 1 when they coalesce.
    pub overlap: f64,
}

pub fn mode_eigen(p: &CasimirParams) -> ModeEigen {
    let m = mode_matrix(p);
    let (_, t) = nalgebra::Schur::new(m).unpack();
    let mut values = [t[(0, 0)], t[(1, 1)]];
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let disc = ((values[0] - values[1]) * 0.5).powi(2).re;
    let vec_for = |lam: C64| -> Vector2<C64> {
        let v = Vector2::new(C64::from(-2.0 * p.g() * p.alpha), lam - p.delta());
        if v.norm() == 0.0 {
            // decoupled mode: the eigenvectors are the axes
            if (lam - p.delta()).norm() < (lam + p.delta()).norm() {
                Vector2::new(C64::from(1.0), C64::from(0.0))
            } else {
                Vector2::new(C64::from(0.0), C64::from(1.0))
            }
        } else {
            v / C64::from(v.norm())
        }
    };
    let (v1, v2) = (vec_for(values[0]), vec_for(values[1]));
    ModeEigen {
        values,
        discriminant: disc,
        overlap: v1.dotc(&v2).norm(),
    }
}

/// Parameter varied in a sweep; all others are held fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    /// `g`, through `eps = 8 g / kappa` at fixed `kappa`.
    G,
    /// `Delta`, through `omega0 = Delta + kappa / 2`.
    Delta,
}

impl SweepAxis {
    pub fn apply(&self, base: &CasimirParams, value: f64) -> Result<CasimirParams> {
        match self {
            SweepAxis::G => base.with_g(value),
            SweepAxis::Delta => base.with_delta(value),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::G => "g",
            SweepAxis::Delta => "delta",
        }
    }
}

/// An exceptional point located by bisection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpLocation {
    pub value: f64,
    /// Mode-eigenvector overlap at the located value.
    pub overlap: f64,
    pub iterations: usize,
}

/// Bisection on the sign of the mode-matrix discriminant between `lo` and
/// `hi` until the bracket is narrower than `tol`.
pub fn locate_exceptional_point(
    base: &CasimirParams,
    axis: SweepAxis,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<EpLocation> {
    if !(hi > lo) || !(tol > 0.0) {
        return Err(Error::InvalidParams(format!(
            "bisection needs lo < hi and tol > 0, got [{lo}, {hi}], {tol}"
        )));
    }
    let sign = |v: f64| -> Result<bool> {
        Ok(mode_eigen(&axis.apply(base, v)?).discriminant > 0.0)
    };
    let (mut a, mut b) = (lo, hi);
    let sa = sign(a)?;
    if sa == sign(b)? {
        return Err(Error::InvalidParams(format!(
            "no exceptional point between {lo} and {hi}"
        )));
    }
    let mut iterations = 0;
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if sign(mid)? == sa {
            a = mid;
        } else {
            b = mid;
        }
        iterations += 1;
    }
    let value = 0.5 * (a + b);
    Ok(EpLocation {
        value,
        overlap: mode_eigen(&axis.apply(base, value)?).overlap,
        iterations,
    })
}

/// Which Hamiltonian drives the lab-frame dynamics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Drive {
    /// The modulated Hamiltonian itself.
    Full,
    /// Its rotating-wave reduction carried back to the lab frame,
    /// `U^dagger(t) V U(t) + xi'(t) (N + 1/2)`.
    Rwa,
}

/// The model at a fixed Fock cutoff, with the ladder matrices cached.
#[derive(Clone, Debug)]
pub struct CasimirModel {
    p: CasimirParams,
    dim: usize,
    k: FockOperator,
    a2: FockOperator,
    ad2: FockOperator,
}

impl CasimirModel {
    pub fn new(p: CasimirParams, dim: usize) -> Result<Self> {
        let (a, ad) = ladder_ops(dim)?;
        Ok(Self {
            p,
            dim,
            k: FockOperator::shifted_number(dim)?,
            a2: &a * &a,
            ad2: &ad * &ad,
        })
    }

    pub fn params(&self) -> &CasimirParams {
        &self.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn quadratic(&self, k: C64, ad2: C64, a2: C64) -> FockOperator {
        &(&self.k.scale(k) + &self.ad2.scale(ad2)) + &self.a2.scale(a2)
    }

    pub fn hamiltonian_su11(&self, t: f64) -> Su11 {
        let (w, chi) = (self.p.omega(t), self.p.chi(t));
        Su11::new(
            C64::from(2.0 * w),
            I * (2.0 * chi * self.p.alpha),
            -I * (2.0 * chi * self.p.beta),
        )
    }

    pub fn hamiltonian(&self, t: f64) -> FockOperator {
        self.hamiltonian_su11(t).to_operator_with(self)
    }

    pub fn interaction_su11(&self, t: f64) -> Su11 {
        let chi = self.p.chi(t);
        let ph = (I * 2.0 * self.p.xi(t)).exp();
        Su11::new(
            C64::from(2.0 * self.p.delta()),
            I * ph * (2.0 * chi * self.p.alpha),
            -I * ph.conj() * (2.0 * chi * self.p.beta),
        )
    }

    /// `Delta (N + 1/2) + i chi(t) (alpha a+^2 e^{2 i xi} - beta a^2 e^{-2 i xi})`.
    pub fn interaction_hamiltonian(&self, t: f64) -> FockOperator {
        self.interaction_su11(t).to_operator_with(self)
    }

    pub fn rwa_su11(&self) -> Su11 {
        let g = self.p.g();
        Su11::new(
            C64::from(2.0 * self.p.delta()),
            C64::from(-2.0 * g * self.p.alpha),
            C64::from(-2.0 * g * self.p.beta),
        )
    }

    /// `Delta (N + 1/2) - g (alpha a+^2 + beta a^2)`.
    pub fn rwa_hamiltonian(&self) -> FockOperator {
        self.rwa_su11().to_operator_with(self)
    }

    pub fn rwa_lab_su11(&self, t: f64) -> Su11 {
        let g = self.p.g();
        let ph = (-I * 2.0 * self.p.xi(t)).exp();
        Su11::new(
            C64::from(2.0 * self.p.omega(t)),
            ph * (-2.0 * g * self.p.alpha),
            ph.conj() * (-2.0 * g * self.p.beta),
        )
    }

    /// `omega(t) (N + 1/2) - g (alpha a+^2 e^{-2 i xi} + beta a^2 e^{2 i xi})`.
    pub fn rwa_lab_hamiltonian(&self, t: f64) -> FockOperator {
        self.rwa_lab_su11(t).to_operator_with(self)
    }

    pub fn drive_su11(&self, drive: Drive, t: f64) -> Su11 {
        match drive {
            Drive::Full => self.hamiltonian_su11(t),
            Drive::Rwa => self.rwa_lab_su11(t),
        }
    }

    pub fn drive(&self, drive: Drive, t: f64) -> FockOperator {
        self.drive_su11(drive, t).to_operator_with(self)
    }

    /// Diagonal of `U(t) = exp(i xi(t) (N + 1/2))`.
    pub fn frame_phases(&self, t: f64) -> Vec<C64> {
        let xi = self.p.xi(t);
        (0..self.dim).map(|n| (I * xi * (n as f64 + 0.5)).exp()).collect()
    }

    pub fn frame(&self, t: f64) -> FockOperator {
        FockOperator::from_diagonal(&self.frame_phases(t)).expect("dimension validated")
    }

    /// `U(t) |psi>`; `inverse` applies `U^dagger(t)` instead.
    pub fn to_frame(&self, t: f64, psi: &FockState, inverse: bool) -> FockState {
        let ph = self.frame_phases(t);
        let amps = psi
            .amplitudes()
            .iter()
            .zip(&ph)
            .map(|(c, u)| if inverse { c * u.conj() } else { c * u })
            .collect::<Vec<_>>();
        FockState::from_slice(&amps).expect("dimension validated")
    }

    /// Diagonal of `rho = (beta/alpha)^((N + 1/2)/2)`.
    pub fn metric_diagonal(&self) -> Result<Vec<f64>> {
        if !(self.p.alpha > 0.0 && self.p.beta > 0.0) {
            return Err(Error::MetricViolation(
                "the closed-form metric needs alpha, beta > 0".into(),
            ));
        }
        let l = 0.5 * (self.p.beta / self.p.alpha).ln();
        Ok((0..self.dim).map(|n| (l * (n as f64 + 0.5)).exp()).collect())
    }

    pub fn metric(&self) -> Result<Metric> {
        Metric::diagonal(&self.metric_diagonal()?)
    }

    /// `eta = rho^(1/2)`, diagonal.
    pub fn dyson(&self) -> Result<DysonMap> {
        let d = self.metric_diagonal()?;
        let eta: Vec<C64> = d.iter().map(|x| C64::from(x.sqrt())).collect();
        let inv: Vec<C64> = d.iter().map(|x| C64::from(1.0 / x.sqrt())).collect();
        DysonMap::from_pair(FockOperator::from_diagonal(&eta)?, FockOperator::from_diagonal(&inv)?)
    }

    pub fn parity_time(&self) -> AntilinearOperator {
        AntilinearOperator::parity_time(self.dim).expect("dimension validated")
    }

    /// `r (alpha K+ - beta K-)`, the generator of `S(r)`.
    pub fn squeeze_generator(&self, r: C64) -> Su11 {
        Su11::new(C64::from(0.0), r * self.p.alpha, -r * self.p.beta)
    }

    /// `S(r) = exp[(r/2)(alpha a+^2 - beta a^2)]`.
    pub fn squeeze_operator(&self, r: C64) -> Result<FockOperator> {
        matrix_exp(&self.squeeze_generator(r).to_operator_with(self))
    }

    /// `S^-1 X S`, carried out in the adjoint representation.
    pub fn unsqueeze(&self, x: &Su11, r: C64) -> Su11 {
        x.conjugated_by_exp(&self.squeeze_generator(-r))
    }

    /// `U(t) X U^dagger(t)`.
    pub fn into_frame(&self, x: &Su11, t: f64) -> Su11 {
        x.conjugated_by_exp(&Su11::new(I * 2.0 * self.p.xi(t), C64::from(0.0), C64::from(0.0)))
    }

    /// `T^-1 (H - i d/dt) T` for `T(t) = U^dagger(t) S(r)`, split into the
    /// part coming from `H` and the part coming from `-i d/dt`.
    pub fn transformed_schrodinger(&self, drive: Drive, r: C64, t: f64) -> (Su11, Su11) {
        let h = self.unsqueeze(&self.into_frame(&self.drive_su11(drive, t), t), r);
        let zero = C64::from(0.0);
        let geo = self.unsqueeze(&Su11::new(C64::from(-2.0 * self.p.xi_dot(t)), zero, zero), r);
        (h, geo)
    }

    /// Lewis-Riesenfeld phases of the first `levels` vectors of the basis
    /// `U^dagger(t) S(r) |n>`, evaluated in the adjoint representation. This
    /// stays exact for complex `r`, where Fock-space squeezing matrices are
    /// dominated by the cutoff.
    pub fn algebraic_lr_phases(
        &self,
        drive: Drive,
        r: C64,
        times: &[f64],
        levels: usize,
    ) -> LrPhases {
        let mut dynr = vec![Vec::with_capacity(times.len()); levels];
        let mut geor = vec![Vec::with_capacity(times.len()); levels];
        let mut max_offdiag = 0.0f64;
        for &t in times {
            let (h, geo) = self.transformed_schrodinger(drive, r, t);
            max_offdiag = max_offdiag.max(h.add(&geo).off_diagonal());
            for n in 0..levels {
                dynr[n].push(h.diagonal_value(n));
                geor[n].push(geo.diagonal_value(n));
            }
        }
        let rates: Vec<Vec<C64>> = dynr
            .iter()
            .zip(&geor)
            .map(|(d, g)| d.iter().zip(g).map(|(a, b)| a + b).collect())
            .collect();
        let integ = |r: &Vec<Vec<C64>>| -> Vec<Vec<C64>> {
            r.iter().map(|x| phases_from_rates(times, x)).collect()
        };
        LrPhases {
            times: times.to_vec(),
            phases: integ(&rates),
            dynamical: integ(&dynr),
            geometric: integ(&geor),
            rates,
            dynamical_rates: dynr,
            geometric_rates: geor,
            max_offdiag,
        }
    }
}

impl Su11 {
    fn to_operator_with(&self, m: &CasimirModel) -> FockOperator {
        let half = C64::from(0.5);
        m.quadratic(self.k0 * half, self.kp * half, self.km * half)
    }
}

/// Dense eigenvalues of `V` compared against the closed form.
#[derive(Clone, Debug)]
pub struct DenseCheck {
    /// Levels `0..levels` were compared.
    pub levels: usize,
    pub dense: Vec<C64>,
    pub max_abs_error: f64,
}

impl DenseCheck {
    pub fn passed(&self) -> bool {
        self.max_abs_error <= DENSE_SPECTRUM_TOL
    }
}

/// Spectrum and eigenvectors of the Schrödinger operator of the RWA model.
#[derive(Clone, Debug)]
pub struct SpectralResult {
    pub params: CasimirParams,
    pub r: C64,
    pub regime: Regime,
    pub resonant: bool,
    /// `epsilon_n` for `n < dim`, read off the diagonalized generator.
    pub eigenvalues: Vec<C64>,
    /// Off-diagonal size of `S^-1 V S` in the adjoint representation.
    pub diagonal_residual: f64,
    /// Present in the unbroken regime. The truncated `V` is similar to a
    /// Hermitian matrix, so its dense spectrum is real whatever the regime
    /// and cannot show the complex pairs of the broken phase.
    pub dense: Option<DenseCheck>,
    pub mode: ModeEigen,
    model: CasimirModel,
    s: FockOperator,
    col_norms: Vec<f64>,
}

impl SpectralResult {
    /// `sqrt(Delta^2 - 4 g^2 alpha beta) (n + 1/2)` with the principal root.
    pub fn closed_form(p: &CasimirParams, n: usize) -> C64 {
        p.big_omega() * 0.5 * (n as f64 + 0.5)
    }

    /// Partner of `epsilon_n` under the antilinear symmetry: its conjugate.
    pub fn pairs(&self) -> Vec<(C64, C64)> {
        self.eigenvalues.iter().map(|e| (*e, e.conj())).collect()
    }

    pub fn squeeze(&self) -> &FockOperator {
        &self.s
    }

    pub fn model(&self) -> &CasimirModel {
        &self.model
    }

    /// `|n,t> = U^dagger(t) S(r) |n>`, rho-normalized.
    pub fn eigenvector(&self, t: f64, n: usize) -> FockState {
        let col: Vec<C64> = self.s.matrix().column(n).iter().copied().collect();
        let v = FockState::from_slice(&col)
            .expect("dimension validated")
            .scale(C64::from(1.0 / self.col_norms[n]));
        self.model.to_frame(t, &v, true)
    }

    pub fn eigenvectors(&self, t: f64, count: usize) -> Vec<FockState> {
        (0..count.min(self.model.dim)).map(|n| self.eigenvector(t, n)).collect()
    }
}

/// Closed-form spectrum with eigenvector factory, checked against a dense
/// eigendecomposition of `V` on the lowest quarter of the levels when the
/// spectrum is real.
pub fn spectral_solve(p: &CasimirParams, dim: usize) -> Result<SpectralResult> {
    let sq = squeeze_params(p)?;
    let model = CasimirModel::new(*p, dim)?;
    let v = model.rwa_su11();
    let diag = model.unsqueeze(&v, sq.r);
    let eigenvalues: Vec<C64> = (0..dim).map(|n| diag.diagonal_value(n)).collect();
    let dense = if sq.regime == Regime::Unbroken {
        let levels = dim / 4 + 1;
        let dense = model.rwa_hamiltonian().eigenvalues();
        let max_abs_error = (0..levels)
            .map(|n| (dense[n] - SpectralResult::closed_form(p, n)).norm())
            .fold(0.0, f64::max);
        Some(DenseCheck {
            levels,
            dense,
            max_abs_error,
        })
    } else {
        None
    };
    let s = model.squeeze_operator(sq.r)?;
    let metric = match model.metric() {
        Ok(m) => m,
        Err(_) => Metric::identity(dim)?,
    };
    let col_norms = (0..dim)
        .map(|n| {
            let col: Vec<C64> = s.matrix().column(n).iter().copied().collect();
            metric.norm_sq(&FockState::from_slice(&col).expect("dimension validated")).sqrt()
        })
        .collect();
    Ok(SpectralResult {
        params: *p,
        r: sq.r,
        regime: sq.regime,
        resonant: sq.resonant,
        eigenvalues,
        diagonal_residual: diag.off_diagonal(),
        dense,
        mode: mode_eigen(p),
        model,
        s,
        col_norms,
    })
}

/// Levels of a `dim`-dimensional space on which spectral comparisons are made.
pub fn comparison_levels(dim: usize) -> usize {
    (dim / 4 + 1).min(trusted_levels(dim))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd;
    use crate::fock::Truncation;
    use crate::metric::{hermitian_counterpart, pseudo_hermiticity_residual, pseudo_unitarity_residual};
    use approx::assert_abs_diff_eq;

    fn rwa(delta: f64, g: f64, alpha: f64, beta: f64) -> CasimirParams {
        CasimirParams::from_rwa(delta, g, alpha, beta, 20.0).unwrap()
    }

    #[test]
    fn unmodulated_hamiltonian_is_free_oscillator() {
        let p = CasimirParams::new(1.3, 2.0, 0.0, 1.0, 2.0).unwrap();
        let m = CasimirModel::new(p, 8).unwrap();
        let h = m.hamiltonian(0.7);
        let free = FockOperator::shifted_number(8).unwrap().scale(C64::from(1.3));
        assert!((&h - &free).frobenius_norm() < 1e-15);
    }

    #[test]
    fn hamiltonian_at_origin() {
        let p = CasimirParams::new(1.0, 2.0, 0.05, 1.0, 3.0).unwrap();
        let m = CasimirModel::new(p, 6).unwrap();
        assert_eq!(p.chi(0.0), 0.0);
        let expected = FockOperator::shifted_number(6).unwrap().scale(C64::from(0.95));
        assert!((&m.hamiltonian(0.0) - &expected).frobenius_norm() < 1e-15);
    }

    #[test]
    fn balanced_hamiltonian_is_hermitian() {
        let p = CasimirParams::new(1.0, 2.0, 0.05, 1.7, 1.7).unwrap();
        let m = CasimirModel::new(p, 10).unwrap();
        for t in [0.3, 1.1, -2.4] {
            assert!(m.hamiltonian(t).hermiticity_defect() < 1e-15);
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(CasimirParams::new(1.0, 2.0, 1.0, 1.0, 1.0).is_err());
        assert!(CasimirParams::new(1.0, 4.0, 0.05, 1.0, 1.0).is_err());
        assert!(CasimirParams::new(1.0, 2.0, 0.05, -1.0, 1.0).is_err());
        let p = rwa(1.0, 0.25, 1.0, 1.0);
        assert_abs_diff_eq!(p.delta(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.g(), 0.25, epsilon = 1e-15);
        assert!(p.weak_modulation());
        assert!(!rwa(1.0, 1.0, 1.0, 1.0).weak_modulation());
    }

    #[test]
    fn xi_phase_values() {
        let p = CasimirParams::new(1.0, 2.0, 0.05, 1.0, 1.0).unwrap();
        assert_eq!(p.xi(0.0), 0.0);
        // 10 - 0.05 sin(20) / 2
        assert_abs_diff_eq!(p.xi(10.0), 10.0 - 0.025 * 20f64.sin(), epsilon = 1e-14);
        assert_abs_diff_eq!(p.xi(10.0), 9.977176, epsilon = 1e-6);
        for t in [3.0, 17.0, 250.0] {
            assert!((p.xi(t) - t).abs() <= p.omega0 * p.epsilon / p.kappa + 1e-14);
        }
    }

    #[test]
    fn modulation_is_periodic_with_zero_mean_coupling() {
        let p = CasimirParams::new(1.0, 2.0, 0.3, 1.0, 1.0).unwrap();
        let period = 2.0 * std::f64::consts::PI / p.kappa;
        let n = 2000;
        let mean: f64 = (0..n).map(|k| p.chi(k as f64 * period / n as f64)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 1e-12);
        assert_abs_diff_eq!(p.chi(0.4), p.chi(0.4 + period), epsilon = 1e-12);
        let tq = 0.25 * period;
        assert_abs_diff_eq!(p.chi(tq), p.omega0 * p.epsilon * p.kappa / (4.0 * p.omega0), epsilon = 1e-14);
        assert!((0..100).all(|k| p.omega(k as f64 * 0.1) > 0.0));
    }

    #[test]
    fn interaction_picture_relation() {
        let p = CasimirParams::new(1.0, 2.0, 0.05, 1.0, 2.0).unwrap();
        let m = CasimirModel::new(p, 12).unwrap();
        for t in [0.2, 1.7] {
            let u = m.frame(t);
            let ud = fd::derivative_op(|s| m.frame(s), t, 1e-3).unwrap();
            let v = &(&(&u * &m.hamiltonian(t)) * &u.adjoint()) + &(&ud * &u.adjoint()).scale(I);
            let diff = &v - &m.interaction_hamiltonian(t);
            // the five-point stencil error grows like (omega dim)^5 h^4
            assert!(diff.frobenius_norm() < 1e-6, "{}", diff.frobenius_norm());
        }
        let free = CasimirModel::new(CasimirParams::new(1.0, 2.0, 0.0, 1.0, 2.0).unwrap(), 6).unwrap();
        assert!(free.interaction_hamiltonian(0.9).frobenius_norm() < 1e-15);
    }

    #[test]
    fn rwa_is_the_period_average_of_the_interaction() {
        let p = rwa(1.0, 0.05, 1.0, 2.0);
        let m = CasimirModel::new(p, 10).unwrap();
        let period = 2.0 * std::f64::consts::PI / p.kappa;
        let t0 = 50.0 * period;
        let n = 4000;
        let mut acc = FockOperator::zeros(10).unwrap();
        for k in 0..n {
            acc = &acc + &m.interaction_hamiltonian(t0 + (k as f64 + 0.5) * period / n as f64);
        }
        let avg = acc.scale(C64::from(1.0 / n as f64));
        let v = m.rwa_hamiltonian();
        let rel = (&avg - &v).frobenius_norm() / (&v - &FockOperator::shifted_number(10).unwrap()).frobenius_norm();
        assert!(rel < 2.0 * p.epsilon, "relative deviation {rel}");
    }

    #[test]
    fn rwa_lab_hamiltonian_maps_to_rwa_interaction() {
        let p = rwa(0.7, 0.2, 1.0, 3.0);
        let m = CasimirModel::new(p, 10).unwrap();
        let t = 0.37;
        let u = m.frame(t);
        let back = &(&(&u * &m.rwa_lab_hamiltonian(t)) * &u.adjoint())
            - &FockOperator::shifted_number(10).unwrap().scale(C64::from(p.xi_dot(t)));
        assert!((&back - &m.rwa_hamiltonian()).frobenius_norm() < 1e-13);
    }

    #[test]
    fn metric_makes_hamiltonian_pseudo_hermitian() {
        let p = CasimirParams::new(1.0, 2.0, 0.05, 1.0, 3.0).unwrap();
        let m = CasimirModel::new(p, 24).unwrap();
        let rho = m.metric().unwrap();
        for t in [0.0, 0.3, 2.2, -1.5] {
            assert!(pseudo_hermiticity_residual(|s| m.hamiltonian(s), &rho, t, Truncation::Full) < 1e-12);
            assert!(pseudo_hermiticity_residual(|s| m.rwa_lab_hamiltonian(s), &rho, t, Truncation::Full) < 1e-12);
        }
        let wrong = Metric::identity(24).unwrap();
        let r = pseudo_hermiticity_residual(|s| m.hamiltonian(s), &wrong, 0.3, Truncation::Full);
        assert!(r > 1e-3);
    }

    #[test]
    fn metric_entries_and_dyson_counterpart() {
        let p = CasimirParams::new(1.0, 2.0, 0.05, 4.0, 1.0).unwrap();
        let m = CasimirModel::new(p, 8).unwrap();
        let d = m.metric_diagonal().unwrap();
        assert_abs_diff_eq!(d[0], 0.25f64.powf(0.25), epsilon = 1e-15);
        let eta = m.dyson().unwrap();
        for n in 0..8 {
            assert_abs_diff_eq!(eta.eta().get(n, n).re, 0.25f64.powf((n as f64 + 0.5) / 4.0), epsilon = 1e-14);
        }
        let zero = FockOperator::zeros(8).unwrap();
        let t = 0.41;
        let h = hermitian_counterpart(|s| m.hamiltonian(s), &eta, &zero, t).unwrap();
        let (a, ad) = ladder_ops(8).unwrap();
        let law = &FockOperator::shifted_number(8).unwrap().scale(C64::from(p.omega(t)))
            + &(&(&ad * &ad) - &(&a * &a)).scale(I * p.chi(t) * p.sqrt_ab());
        assert!((&h - &law).frobenius_norm() < 1e-12);
        assert!(h.hermiticity_defect() < 1e-12);
    }

    #[test]
    fn balanced_counterpart_is_the_hamiltonian() {
        let p = CasimirParams::new(1.0, 2.0, 0.05, 1.0, 1.0).unwrap();
        let m = CasimirModel::new(p, 8).unwrap();
        let zero = FockOperator::zeros(8).unwrap();
        let h = hermitian_counterpart(|s| m.hamiltonian(s), &m.dyson().unwrap(), &zero, 0.9).unwrap();
        assert_eq!(h, m.hamiltonian(0.9));
    }

    #[test]
    fn parity_time_reverses_the_hamiltonian() {
        let p = CasimirParams::new(1.0, 2.0, 0.08, 1.0, 2.5).unwrap();
        let m = CasimirModel::new(p, 16).unwrap();
        let pt = m.parity_time();
        for t in [0.3, 1.9] {
            let par = pt.linear_part();
            for drive in [Drive::Full, Drive::Rwa] {
                // PT H(t) PT has linear part P conj(H(t)) P
                let lhs = &(par * &m.drive(drive, t).conj()) * par;
                assert!((&lhs - &m.drive(drive, -t)).frobenius_norm() < 1e-12);
            }
        }
    }

    #[test]
    fn squeeze_strengths() {
        assert_eq!(squeeze_params(&rwa(1.0, 0.0, 1.0, 1.0)).unwrap().r, C64::from(0.0));
        let sq = squeeze_params(&rwa(1.0, 0.25, 1.0, 1.0)).unwrap();
        assert_abs_diff_eq!(sq.r.re, 0.5 * 0.5f64.atanh(), epsilon = 1e-12);
        assert_abs_diff_eq!(sq.r.re, 0.27465, epsilon = 1e-5);
        assert!(matches!(
            squeeze_params(&rwa(1.0, 0.25, 1.0, 4.0)),
            Err(Error::ExceptionalPoint { .. })
        ));
        let br = squeeze_params(&rwa(0.5, 0.5, 1.0, 1.0)).unwrap();
        assert_eq!(br.regime, Regime::Broken);
        assert!(br.r.im > 0.0);
        let res = squeeze_params(&rwa(0.0, 0.25, 1.0, 4.0)).unwrap();
        assert!(res.resonant);
        assert_abs_diff_eq!(res.r.im, std::f64::consts::PI / 8.0, epsilon = 1e-15);
        let lim = squeeze_params(&rwa(2.0, 0.3, 0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(lim.r.re, 0.15, epsilon = 1e-15);
    }

    #[test]
    fn squeeze_operator_properties() {
        let p = rwa(1.0, 0.25, 1.0, 1.0);
        let m = CasimirModel::new(p, 64).unwrap();
        assert_eq!(m.squeeze_operator(C64::from(0.0)).unwrap(), FockOperator::identity(64).unwrap());
        let r = squeeze_params(&p).unwrap().r;
        let s = m.squeeze_operator(r).unwrap();
        // standard squeezed vacuum overlap
        assert_abs_diff_eq!(s.get(0, 0).re, 1.0 / r.re.cosh().sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(s.get(0, 0).re, 0.98155, epsilon = 1e-5);

        let q = rwa(1.0, 0.2, 1.0, 2.0);
        let mq = CasimirModel::new(q, 64).unwrap();
        let sq = mq.squeeze_operator(C64::from(0.2)).unwrap();
        let rho = mq.metric().unwrap();
        assert!(pseudo_unitarity_residual(&sq, &rho, Truncation::Trusted) < 1e-8);
        assert!(pseudo_unitarity_residual(&sq, &Metric::identity(64).unwrap(), Truncation::Trusted) > 1e-3);
    }

    #[test]
    fn unbroken_spectrum_matches_dense_eigenvalues() {
        let p = rwa(1.0, 0.25, 1.0, 1.0);
        let sr = spectral_solve(&p, 64).unwrap();
        let dense = sr.dense.as_ref().unwrap();
        assert_eq!(dense.levels, 17);
        assert!(dense.passed(), "{}", dense.max_abs_error);
        for n in 0..17 {
            assert_abs_diff_eq!(sr.eigenvalues[n].re, 0.75f64.sqrt() * (n as f64 + 0.5), epsilon = 1e-12);
            assert_abs_diff_eq!(sr.eigenvalues[n].im, 0.0, epsilon = 1e-12);
        }
        assert!(sr.diagonal_residual < 1e-12);
    }

    #[test]
    fn unbalanced_spectrum_matches_dense_eigenvalues() {
        let p = rwa(1.0, 0.2, 1.0, 2.0);
        let sr = spectral_solve(&p, 64).unwrap();
        assert!(sr.dense.unwrap().passed());
    }

    #[test]
    fn broken_spectrum_is_imaginary_in_conjugate_pairs() {
        let p = rwa(0.5, 0.5, 1.0, 1.0);
        let sr = spectral_solve(&p, 32).unwrap();
        assert!(sr.dense.is_none());
        for n in 0..8 {
            let e = sr.eigenvalues[n];
            assert_abs_diff_eq!(e.re, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(e.im.abs(), 0.75f64.sqrt() * (n as f64 + 0.5), epsilon = 1e-12);
        }
        let m = sr.mode.values;
        assert_abs_diff_eq!(m[0].conj().im, m[1].im, epsilon = 1e-12);
        assert_abs_diff_eq!(m[1].im, 0.75f64.sqrt(), epsilon = 1e-12);
        assert!(sr.mode.discriminant < 0.0);
    }

    #[test]
    fn free_spectrum_and_eigenvectors() {
        let p = rwa(0.8, 0.0, 1.0, 2.0);
        let sr = spectral_solve(&p, 8).unwrap();
        for n in 0..8 {
            assert_abs_diff_eq!(sr.eigenvalues[n].re, 0.8 * (n as f64 + 0.5), epsilon = 1e-14);
        }
        let t = 1.3;
        let v = sr.eigenvector(t, 2);
        let rho2 = sr.model().metric_diagonal().unwrap()[2];
        let expected = (-I * p.xi(t) * 2.5).exp() / rho2.sqrt();
        assert!((v.amplitude(2) - expected).norm() < 1e-14);
    }

    #[test]
    fn squeezing_diagonalizes_the_rwa_generator_in_fock_space() {
        let p = rwa(1.0, 0.2, 1.0, 2.0);
        let m = CasimirModel::new(p, 64).unwrap();
        let r = squeeze_params(&p).unwrap().r;
        let s = m.squeeze_operator(r).unwrap();
        let d = &(&s.inverse().unwrap() * &m.rwa_hamiltonian()) * &s;
        let k = comparison_levels(64);
        let om = p.big_omega().re * 0.5;
        for i in 0..k {
            for j in 0..k {
                let expected = if i == j { om * (i as f64 + 0.5) } else { 0.0 };
                assert!((d.get(i, j) - expected).norm() < 1e-8, "({i},{j})");
            }
        }
    }

    #[test]
    fn exceptional_point_by_bisection() {
        let base = rwa(1.0, 0.1, 1.0, 4.0);
        let ep = locate_exceptional_point(&base, SweepAxis::G, 0.0, 1.0, 1e-9).unwrap();
        assert_abs_diff_eq!(ep.value, 0.25, epsilon = 1e-8);
        assert!(ep.overlap > 0.999);
        let base = rwa(1.0, 0.25, 1.0, 4.0);
        let ep = locate_exceptional_point(&base, SweepAxis::Delta, 0.0, 2.0, 1e-9).unwrap();
        assert_abs_diff_eq!(ep.value, 1.0, epsilon = 1e-8);
        assert!(locate_exceptional_point(&base, SweepAxis::Delta, 1.5, 2.0, 1e-9).is_err());
    }

    #[test]
    fn algebraic_phases_of_rwa_basis_are_constant_rates() {
        let p = rwa(1.0, 0.25, 1.0, 2.0);
        let m = CasimirModel::new(p, 8).unwrap();
        let r = squeeze_params(&p).unwrap().r;
        let times = fd::symmetric_grid(2.0, 40);
        let ph = m.algebraic_lr_phases(Drive::Rwa, r, &times, 4);
        assert!(ph.max_offdiag < 1e-12);
        for n in 0..4 {
            let e = SpectralResult::closed_form(&p, n);
            for (k, t) in times.iter().enumerate() {
                assert!((ph.rates[n][k] - e).norm() < 1e-12);
                assert!((ph.phases[n][k] - e * t).norm() < 1e-11);
            }
        }
        // the full drive is not diagonalized by the RWA basis
        let full = m.algebraic_lr_phases(Drive::Full, r, &times, 1);
        assert!(full.max_offdiag > 1e-3);
    }
}
