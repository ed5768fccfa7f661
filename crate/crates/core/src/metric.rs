//! Metric operators, Dyson maps and the pseudo-Hermiticity checks built on
//! them.
//!
//! A metric `rho` is Hermitian positive definite and redefines the inner
//! product as `<u|rho|v>`. A Dyson map `eta` factors it as `rho = eta^dagger
//! eta` and carries states into a picture where the generator is Hermitian.
//! All residuals are Frobenius norms normalized by `||rho||_F`, optionally
//! restricted to the trusted leading block of Fock levels.

use std::sync::OnceLock;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::fd;
use crate::fock::{hermitian_sqrt, FockOperator, FockState, Truncation, C64, I};

/// Relative tolerance on `||rho - rho^dagger||`.
pub const HERMITICITY_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct Metric {
    // built on first use for diagonal metrics
    rho: OnceLock<FockOperator>,
    rho_dot: Option<FockOperator>,
    // kept for O(dim) application when rho is diagonal
    diag: Option<Vec<f64>>,
}

impl PartialEq for Metric {
    fn eq(&self, other: &Self) -> bool {
        self.diag == other.diag && self.rho_dot == other.rho_dot && (self.diag.is_some() || self.rho() == other.rho())
    }
}

impl Metric {
    /// Validates Hermiticity and positive definiteness of `rho`.
    pub fn new(rho: FockOperator, rho_dot: Option<FockOperator>) -> Result<Self> {
        if !rho.is_finite() {
            return Err(Error::NonFinite("metric"));
        }
        let defect = rho.hermiticity_defect();
        if defect > HERMITICITY_TOL {
            return Err(Error::MetricViolation(format!(
                "metric is not Hermitian (relative defect {defect:e})"
            )));
        }
        let min = rho.hermitian_eigenvalues()[0];
        if !(min > 0.0) {
            return Err(Error::MetricViolation(format!(
                "metric is not positive definite (min eigenvalue {min:e})"
            )));
        }
        if let Some(d) = &rho_dot {
            if d.dim() != rho.dim() {
                return Err(Error::DimensionMismatch {
                    expected: rho.dim(),
                    found: d.dim(),
                });
            }
        }
        Ok(Self {
            rho: OnceLock::from(rho),
            rho_dot,
            diag: None,
        })
    }

    /// A positive diagonal metric; skips the eigenvalue check.
    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        if let Some(bad) = entries.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
            return Err(Error::MetricViolation(format!(
                "diagonal metric entry {bad:e} is not positive"
            )));
        }
        crate::fock::check_dim(entries.len())?;
        Ok(Self {
            rho: OnceLock::new(),
            rho_dot: None,
            diag: Some(entries.to_vec()),
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::diagonal(&vec![1.0; dim])
    }

    /// Diagonal entries when the metric was built by [`Metric::diagonal`].
    pub fn diagonal_entries(&self) -> Option<&[f64]> {
        self.diag.as_deref()
    }

    /// `rho |v>`.
    pub fn apply(&self, v: &FockState) -> FockState {
        match &self.diag {
            Some(d) => {
                assert_eq!(d.len(), v.dim(), "metric/state dimension mismatch");
                let amps = v.amplitudes().zip_map(
                    &nalgebra::DVector::from_column_slice(d),
                    |z, w| z * w,
                );
                FockState::new(amps).expect("dimension unchanged")
            }
            None => self.rho().apply(v),
        }
    }

    pub fn rho(&self) -> &FockOperator {
        self.rho.get_or_init(|| {
            let d = self.diag.as_ref().expect("dense metrics are initialised on construction");
            let diag: Vec<C64> = d.iter().map(|&x| C64::from(x)).collect();
            FockOperator::from_diagonal(&diag).expect("dimension checked on construction")
        })
    }

    /// `d rho / dt`, `None` for a time-independent metric.
    pub fn rho_dot(&self) -> Option<&FockOperator> {
        self.rho_dot.as_ref()
    }

    pub fn dim(&self) -> usize {
        match &self.diag {
            Some(d) => d.len(),
            None => self.rho().dim(),
        }
    }

    /// `<v|rho|v>`.
    pub fn norm_sq(&self, v: &FockState) -> f64 {
        v.inner(&self.apply(v)).re
    }

    /// The Hermitian Dyson map `eta = rho^(1/2)`.
    pub fn dyson_map(&self) -> Result<DysonMap> {
        DysonMap::new(hermitian_sqrt(self.rho())?)
    }
}

/// An invertible `eta` with `rho = eta^dagger eta`.
#[derive(Clone, Debug, PartialEq)]
pub struct DysonMap {
    eta: FockOperator,
    eta_inv: FockOperator,
}

impl DysonMap {
    pub fn new(eta: FockOperator) -> Result<Self> {
        let eta_inv = eta.inverse().map_err(|_| Error::Singular("Dyson map"))?;
        Ok(Self { eta, eta_inv })
    }

    /// Builds the map from a known pair; checks `eta * eta_inv = 1`.
    pub fn from_pair(eta: FockOperator, eta_inv: FockOperator) -> Result<Self> {
        let id = FockOperator::identity(eta.dim())?;
        if (&(&eta * &eta_inv) - &id).frobenius_norm() > 1e-10 * (eta.dim() as f64).sqrt() {
            return Err(Error::Singular("Dyson map pair is not mutually inverse"));
        }
        Ok(Self { eta, eta_inv })
    }

    pub fn eta(&self) -> &FockOperator {
        &self.eta
    }

    pub fn eta_inv(&self) -> &FockOperator {
        &self.eta_inv
    }

    /// `eta^dagger eta`.
    pub fn metric(&self) -> Result<Metric> {
        Metric::new(&self.eta.adjoint() * &self.eta, None)
    }

    /// `|phi> = eta |psi>`.
    pub fn to_hermitian_picture(&self, psi: &FockState) -> FockState {
        self.eta.apply(psi)
    }

    /// `|psi> = eta^-1 |phi>`.
    pub fn from_hermitian_picture(&self, phi: &FockState) -> FockState {
        self.eta_inv.apply(phi)
    }
}

/// `<u|rho|v>`.
pub fn pseudo_inner(u: &FockState, v: &FockState, m: &Metric) -> Result<C64> {
    for d in [u.dim(), v.dim()] {
        if d != m.dim() {
            return Err(Error::DimensionMismatch {
                expected: m.dim(),
                found: d,
            });
        }
    }
    Ok(u.inner(&m.apply(v)))
}

fn masked_ratio(num: &FockOperator, den: &FockOperator, mask: Truncation) -> f64 {
    let d = den.masked_norm(mask);
    if d == 0.0 {
        num.masked_norm(mask)
    } else {
        num.masked_norm(mask) / d
    }
}

/// `||H^dagger rho - rho H - i d(rho)/dt||_F / ||rho||_F` at time `t`.
pub fn pseudo_hermiticity_residual(
    hamiltonian: impl Fn(f64) -> FockOperator,
    m: &Metric,
    t: f64,
    mask: Truncation,
) -> f64 {
    let h = hamiltonian(t);
    let mut r = &(&h.adjoint() * m.rho()) - &(m.rho() * &h);
    if let Some(rd) = &m.rho_dot {
        r = &r - &rd.scale(I);
    }
    masked_ratio(&r, m.rho(), mask)
}

/// Largest `|<u|rho L - L^dagger rho|v>|` over pairs of test trajectories and
/// interior grid points, with `L = H - i d/dt` and time derivatives taken by
/// central differences on the trajectories' shared uniform grid.
///
/// `L^dagger rho` acts on a trajectory `v(t)` as `H^dagger rho v - i d(rho v)/dt`.
pub fn schrodinger_op_pseudo_hermiticity_residual(
    hamiltonian: impl Fn(f64) -> FockOperator,
    metric: impl Fn(f64) -> Metric,
    states: &[Trajectory],
    mask: Truncation,
) -> Result<f64> {
    let Some(first) = states.first() else {
        return Ok(0.0);
    };
    let times = first.times();
    if times.len() < 3 {
        return Err(Error::GridTooCoarse {
            points: times.len(),
            needed: 3,
        });
    }
    let h = fd::uniform_spacing(times)?;
    for tr in states {
        if tr.times() != times {
            return Err(Error::NonUniformGrid);
        }
    }
    let k_trust = mask.levels(first.states()[0].dim());

    let metrics: Vec<Metric> = times.iter().map(|&t| metric(t)).collect();
    let mut worst = 0.0f64;
    for v in states {
        let rho_v: Vec<FockState> = v
            .states()
            .iter()
            .zip(&metrics)
            .map(|(s, m)| m.apply(s))
            .collect();
        for k in fd::interior(times.len()) {
            let t = times[k];
            let ham = hamiltonian(t);
            let rho = metrics[k].rho();
            let dv = fd::state_derivative(v.states(), k, h);
            let d_rho_v = fd::state_derivative(&rho_v, k, h);
            // rho L v
            let lhs = &rho.apply(&ham.apply(&v.states()[k])) - &rho.apply(&dv).scale(I);
            // L^dagger rho v
            let rhs = &ham.adjoint().apply(&rho_v[k]) - &d_rho_v.scale(I);
            let diff = &lhs - &rhs;
            let diff = truncate_state(&diff, k_trust);
            for u in states {
                let uk = truncate_state(&u.states()[k], k_trust);
                worst = worst.max(uk.inner(&diff).norm());
            }
        }
    }
    Ok(worst)
}

fn truncate_state(v: &FockState, k: usize) -> FockState {
    if k >= v.dim() {
        return v.clone();
    }
    let mut amps = v.amplitudes().clone();
    for n in k..v.dim() {
        amps[n] = C64::from(0.0);
    }
    FockState::new(amps).expect("dimension unchanged")
}

/// `h = eta H eta^-1 - i eta d(eta^-1)/dt`, the Hermitian counterpart of `H`.
pub fn hermitian_counterpart(
    hamiltonian: impl Fn(f64) -> FockOperator,
    d: &DysonMap,
    eta_inv_dot: &FockOperator,
    t: f64,
) -> Result<FockOperator> {
    let h = hamiltonian(t);
    if h.dim() != d.eta.dim() || eta_inv_dot.dim() != d.eta.dim() {
        return Err(Error::DimensionMismatch {
            expected: d.eta.dim(),
            found: h.dim(),
        });
    }
    let conj = &(&d.eta * &h) * &d.eta_inv;
    Ok(&conj - &(&d.eta * eta_inv_dot).scale(I))
}

/// `||S^dagger rho S - rho||_F / ||rho||_F`.
pub fn pseudo_unitarity_residual(s: &FockOperator, m: &Metric, mask: Truncation) -> f64 {
    let r = &(&(&s.adjoint() * m.rho()) * s) - m.rho();
    masked_ratio(&r, m.rho(), mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::ladder_ops;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn casimir_like_metric(alpha: f64, beta: f64, dim: usize) -> Metric {
        let d: Vec<f64> = (0..dim)
            .map(|n| (0.5 * (beta / alpha).ln() * (n as f64 + 0.5)).exp())
            .collect();
        Metric::diagonal(&d).unwrap()
    }

    #[test]
    fn identity_metric_inner_product() {
        let m = Metric::identity(4).unwrap();
        let v = FockState::vacuum(4).unwrap();
        assert_eq!(pseudo_inner(&v, &v, &m).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn vacuum_weight_of_unbalanced_metric() {
        let m = casimir_like_metric(4.0, 1.0, 6);
        let v = FockState::vacuum(6).unwrap();
        let z = pseudo_inner(&v, &v, &m).unwrap();
        assert_abs_diff_eq!(z.re, 2f64.powf(-0.5), epsilon = 1e-15);
        assert_abs_diff_eq!(z.im, 0.0);
    }

    #[test]
    fn inner_product_dimension_mismatch() {
        let m = Metric::identity(4).unwrap();
        let v = FockState::vacuum(5).unwrap();
        assert!(pseudo_inner(&v, &v, &m).is_err());
    }

    #[test]
    fn metric_validation() {
        let bad = FockOperator::from_diagonal(&[c(1.0, 0.0), c(-2.0, 0.0)]).unwrap();
        assert!(matches!(Metric::new(bad, None), Err(Error::MetricViolation(_))));
        let skew = FockOperator::from_fn(2, |i, j| if i < j { c(0.5, 0.0) } else { c(1.0, 0.0) })
            .unwrap();
        assert!(matches!(Metric::new(skew, None), Err(Error::MetricViolation(_))));
        assert!(Metric::diagonal(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn hermitian_hamiltonian_with_identity_metric() {
        let (a, ad) = ladder_ops(6).unwrap();
        let h = &(&ad * &a) + &(&a + &ad);
        let m = Metric::identity(6).unwrap();
        let r = pseudo_hermiticity_residual(|_| h.clone(), &m, 0.0, Truncation::Full);
        assert_eq!(r, 0.0);
    }

    #[test]
    fn time_dependent_metric_term_enters() {
        // H = 0 with rho_dot = 1 leaves a residual of ||i * 1|| / ||rho||.
        let m = Metric::new(
            FockOperator::identity(3).unwrap(),
            Some(FockOperator::identity(3).unwrap()),
        )
        .unwrap();
        let r = pseudo_hermiticity_residual(
            |_| FockOperator::zeros(3).unwrap(),
            &m,
            0.0,
            Truncation::Full,
        );
        assert_abs_diff_eq!(r, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn unitary_is_pseudo_unitary_for_identity_metric() {
        let (a, ad) = ladder_ops(8).unwrap();
        let gen = (&ad * &a).scale(c(0.0, 0.7));
        let u = crate::fock::matrix_exp(&gen).unwrap();
        let m = Metric::identity(8).unwrap();
        assert!(pseudo_unitarity_residual(&u, &m, Truncation::Full) < 1e-12);
    }

    #[test]
    fn identity_dyson_map_returns_hamiltonian() {
        let (a, ad) = ladder_ops(5).unwrap();
        let h = &(&ad * &a) + &(&a + &ad);
        let d = DysonMap::new(FockOperator::identity(5).unwrap()).unwrap();
        let zero = FockOperator::zeros(5).unwrap();
        let out = hermitian_counterpart(|_| h.clone(), &d, &zero, 1.0).unwrap();
        assert!((&out - &h).frobenius_norm() < 1e-14);
    }

    #[test]
    fn singular_dyson_map_rejected() {
        let z = FockOperator::from_diagonal(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(matches!(DysonMap::new(z), Err(Error::Singular(_))));
    }

    #[test]
    fn dyson_map_reproduces_metric() {
        let m = casimir_like_metric(1.0, 3.0, 10);
        let d = m.dyson_map().unwrap();
        let back = d.metric().unwrap();
        let rel = (back.rho() - m.rho()).frobenius_norm() / m.rho().frobenius_norm();
        assert!(rel < 1e-10);
        let id = FockOperator::identity(10).unwrap();
        assert!((&(d.eta() * d.eta_inv()) - &id).frobenius_norm() < 1e-10);
    }

    fn arb_state(dim: usize) -> impl Strategy<Value = FockState> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim).prop_map(|v| {
            FockState::from_slice(&v.into_iter().map(|(a, b)| c(a, b)).collect::<Vec<_>>())
                .unwrap()
        })
    }

    fn arb_metric(dim: usize) -> impl Strategy<Value = Metric> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |v| {
            let b = DMatrix::from_iterator(dim, dim, v.into_iter().map(|(x, y)| c(x, y)));
            let rho = b.adjoint() * &b + DMatrix::identity(dim, dim) * c(0.2, 0.0);
            let rho = (&rho + rho.adjoint()) * c(0.5, 0.0);
            Metric::new(FockOperator::new(rho).unwrap(), None).unwrap()
        })
    }

    proptest! {
        #[test]
        fn pseudo_inner_is_conjugate_symmetric_and_positive(
            u in arb_state(5), v in arb_state(5), m in arb_metric(5)
        ) {
            let uv = pseudo_inner(&u, &v, &m).unwrap();
            let vu = pseudo_inner(&v, &u, &m).unwrap();
            prop_assert!((uv - vu.conj()).norm() < 1e-12 * (1.0 + uv.norm()));
            prop_assume!(v.norm() > 1e-3);
            let vv = pseudo_inner(&v, &v, &m).unwrap();
            prop_assert!(vv.re > 0.0);
            prop_assert!(vv.im.abs() < 1e-12 * vv.re.max(1.0));
        }

        #[test]
        fn dyson_picture_preserves_inner_products(
            u in arb_state(5), v in arb_state(5), m in arb_metric(5)
        ) {
            let d = m.dyson_map().unwrap();
            let direct = pseudo_inner(&u, &v, &m).unwrap();
            let mapped = d.to_hermitian_picture(&u).inner(&d.to_hermitian_picture(&v));
            prop_assert!((direct - mapped).norm() <= 1e-10 * (1.0 + direct.norm()));
            let back = d.from_hermitian_picture(&d.to_hermitian_picture(&u));
            prop_assert!((&back - &u).norm() <= 1e-10 * (1.0 + u.norm()));
        }
    }
}
