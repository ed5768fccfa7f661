//! Photon number, field quadratures and squeezing of the Casimir model.
//!
//! `N = <a^dagger a>_rho`, `A = <a^2>_rho` and `B = <a^dagger^2>_rho` are
//! taken in the rotating frame, where the dynamics is generated by the
//! time-independent RWA Hamiltonian. Lab-frame moments pick up `e^{-i theta}`
//! on `A`, with `theta = kappa t` at leading order and `2 xi(t)` exactly.

use crate::casimir::CasimirParams;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::fock::{FockState, C64, I};
use crate::metric::Metric;
use crate::symmetry::Regime;

/// Photon numbers above which broken-regime runs are stopped.
pub const PHOTON_CAP: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhotonRecord {
    pub t: f64,
    pub n: f64,
    pub a: C64,
    pub b: C64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhotonSeries {
    pub records: Vec<PhotonRecord>,
    /// Set when the run stopped early at [`PHOTON_CAP`].
    pub capped: bool,
}

type Moments3 = [C64; 3];

fn photon_rhs(p: &CasimirParams, y: &Moments3) -> Moments3 {
    let (d, g, al, be) = (p.delta(), p.g(), p.alpha, p.beta);
    let [n, a, b] = *y;
    [
        -I * 2.0 * g * (be * a - al * b),
        -I * (2.0 * d * a - 4.0 * al * g * (n + 0.5)),
        -I * (-2.0 * d * b + 4.0 * be * g * (n + 0.5)),
    ]
}

fn axpy(y: &Moments3, h: f64, k: &Moments3) -> Moments3 {
    [y[0] + k[0] * h, y[1] + k[1] * h, y[2] + k[2] * h]
}

fn rk4_step(p: &CasimirParams, y: &Moments3, h: f64) -> Moments3 {
    let k1 = photon_rhs(p, y);
    let k2 = photon_rhs(p, &axpy(y, 0.5 * h, &k1));
    let k3 = photon_rhs(p, &axpy(y, 0.5 * h, &k2));
    let k4 = photon_rhs(p, &axpy(y, h, &k3));
    std::array::from_fn(|i| y[i] + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0))
}

/// Solves the moment equations from the vacuum at `t = 0` and samples them
/// on `grid` (non-decreasing, non-negative).
pub fn photon_ode_solve(p: &CasimirParams, grid: &[f64]) -> Result<PhotonSeries> {
    if grid.iter().any(|t| !t.is_finite() || *t < 0.0) || grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::NonUniformGrid);
    }
    let rate = p.delta().abs().max(2.0 * p.g() * p.alpha.max(p.beta)).max(1e-300);
    let max_step = 2e-3 / rate;
    let mut y: Moments3 = [C64::from(0.0); 3];
    let mut t = 0.0;
    let mut records = Vec::with_capacity(grid.len());
    for &target in grid {
        let span = target - t;
        if span > 0.0 {
            let steps = (span / max_step).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            for _ in 0..steps {
                y = rk4_step(p, &y, h);
            }
            t = target;
        }
        if !y.iter().all(|v| v.re.is_finite() && v.im.is_finite()) || y[0].re > PHOTON_CAP {
            return Ok(PhotonSeries {
                records,
                capped: true,
            });
        }
        records.push(PhotonRecord {
            t: target,
            n: y[0].re,
            a: y[1],
            b: y[2],
        });
    }
    Ok(PhotonSeries {
        records,
        capped: false,
    })
}

fn sinc(z: C64) -> C64 {
    if z.norm() < 1e-4 {
        let z2 = z * z;
        1.0 - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

/// Closed forms written through `sinc`, which continue through `Omega = 0`
/// and onto imaginary `Omega`:
/// `N = 4 g^2 ab t^2 sinc^2(Omega t / 2)`,
/// `A = 2 alpha g [Delta t^2 sinc^2(Omega t / 2) + i t sinc(Omega t)]`.
pub fn photon_closed_form(p: &CasimirParams, t: f64) -> PhotonRecord {
    let (d, g) = (p.delta(), p.g());
    let z = p.big_omega() * t;
    let half = sinc(z * 0.5);
    let s2 = half * half * t * t;
    let s1 = sinc(z) * t;
    PhotonRecord {
        t,
        n: (s2 * (4.0 * g * g * p.alpha * p.beta)).re,
        a: (s2 * d + I * s1) * (2.0 * p.alpha * g),
        b: (s2 * d - I * s1) * (2.0 * p.beta * g),
    }
}

/// `max |N'' + Omega^2 N - 8 g^2 ab|` over interior points of a uniform grid,
/// with the second derivative from the five-point stencil.
pub fn photon_second_order_residual(records: &[PhotonRecord], p: &CasimirParams) -> Result<f64> {
    if records.len() < 5 {
        return Err(Error::GridTooCoarse {
            points: records.len(),
            needed: 5,
        });
    }
    let times: Vec<f64> = records.iter().map(|r| r.t).collect();
    let h = crate::fd::uniform_spacing(&times)?;
    let g = p.g();
    let source = 8.0 * g * g * p.alpha * p.beta;
    let n: Vec<f64> = records.iter().map(|r| r.n).collect();
    let worst = (2..n.len() - 2)
        .map(|k| {
            let dd = (-n[k + 2] + 16.0 * n[k + 1] - 30.0 * n[k] + 16.0 * n[k - 1] - n[k - 2]) / (12.0 * h * h);
            (dd + p.omega_sq() * n[k] - source).abs()
        })
        .fold(0.0, f64::max);
    Ok(worst)
}

/// Largest deviation of `N - g (alpha B + beta A) / Delta` from zero, its
/// value in the vacuum. Undefined at `Delta = 0`.
pub fn constant_of_motion_drift(records: &[PhotonRecord], p: &CasimirParams) -> Option<f64> {
    let d = p.delta();
    if d == 0.0 {
        return None;
    }
    let g = p.g();
    Some(
        records
            .iter()
            .map(|r| (C64::from(r.n) - (r.b * p.alpha + r.a * p.beta) * (g / d)).norm())
            .fold(0.0, f64::max),
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmplitudeReport {
    pub regime: Regime,
    /// `max_t N(t) = 16 g^2 ab / Omega^2` in the unbroken regime; infinite otherwise.
    pub amplitude: f64,
    pub below_unity: bool,
    /// Unbroken, yet the oscillation reaches one photon or more:
    /// `4 g^2 ab < Delta^2 <= 8 g^2 ab`.
    pub in_band: bool,
}

pub fn amplitude_report(p: &CasimirParams) -> AmplitudeReport {
    let g = p.g();
    let c = g * g * p.alpha * p.beta;
    let regime = p.regime();
    let amplitude = if regime == Regime::Unbroken {
        16.0 * c / p.omega_sq()
    } else {
        f64::INFINITY
    };
    let d2 = p.delta().powi(2);
    AmplitudeReport {
        regime,
        amplitude,
        below_unity: amplitude < 1.0,
        in_band: regime == Regime::Unbroken && d2 <= 8.0 * c,
    }
}

/// First and second moments of a state under the metric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub norm_sq: f64,
    /// `<a^dagger a>_rho`
    pub n: f64,
    /// `<a>_rho`
    pub a1: C64,
    /// `<a^2>_rho`
    pub a2: C64,
}

/// Moments normalized by `<psi|rho|psi>`. O(dim) for diagonal metrics.
pub fn moments(psi: &FockState, m: &Metric) -> Result<Moments> {
    if psi.dim() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            found: psi.dim(),
        });
    }
    let c = psi.amplitudes();
    let rc = m.apply(psi);
    let rc = rc.amplitudes();
    let dim = c.len();
    let mut norm = C64::from(0.0);
    let mut n = C64::from(0.0);
    let mut a1 = C64::from(0.0);
    let mut a2 = C64::from(0.0);
    for k in 0..dim {
        let w = rc[k].conj();
        let kf = k as f64;
        norm += w * c[k];
        n += w * c[k] * kf;
        if k + 1 < dim {
            a1 += w * c[k + 1] * (kf + 1.0).sqrt();
        }
        if k + 2 < dim {
            a2 += w * c[k + 2] * ((kf + 1.0) * (kf + 2.0)).sqrt();
        }
    }
    let norm_sq = norm.re;
    if !(norm_sq > 0.0) || !norm_sq.is_finite() {
        return Err(Error::NonFinite("rho-norm of state"));
    }
    Ok(Moments {
        norm_sq,
        n: n.re / norm_sq,
        a1: a1 / norm_sq,
        a2: a2 / norm_sq,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureRecord {
    pub t: f64,
    pub mean_x1: f64,
    pub mean_x2: f64,
    pub var_x1: f64,
    pub var_x2: f64,
    pub var_y1: f64,
    pub var_y2: f64,
    /// `s = ln(dY1 / dY2) / 2`.
    pub squeeze_degree: f64,
}

impl QuadratureRecord {
    pub fn delta_y1(&self) -> f64 {
        self.var_y1.max(0.0).sqrt()
    }

    pub fn delta_y2(&self) -> f64 {
        self.var_y2.max(0.0).sqrt()
    }

    pub fn uncertainty_product(&self) -> f64 {
        self.delta_y1() * self.delta_y2()
    }
}

/// Phase picked up by `<a^2>` between the rotating and the lab frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FrameAngle {
    /// `kappa t`, the leading-order rotation.
    Drive,
    /// `2 xi(t)`, the exact rotation of the interaction picture.
    Exact,
    /// A fixed angle.
    Fixed(f64),
}

impl FrameAngle {
    pub fn at(&self, p: &CasimirParams, t: f64) -> f64 {
        match self {
            FrameAngle::Drive => p.kappa * t,
            FrameAngle::Exact => 2.0 * p.xi(t),
            FrameAngle::Fixed(a) => *a,
        }
    }
}

/// Quadratures `X = eta^-1 x eta` with `x1 = (a + a^dagger)/2`,
/// `x2 = (a - a^dagger)/2i`, and the rotated `Y1, Y2` at
/// `phi = pi/2 - theta`, from lab-frame moments.
/// `X1 = (q a + a^dagger / q)/2`, `q = (beta/alpha)^(1/4)`; expectation
/// values of pseudo-Hermitian operators are real, so only real parts enter.
pub fn quadratures_from_moments(p: &CasimirParams, t: f64, mo: &Moments, theta: f64) -> QuadratureRecord {
    let q = (p.beta / p.alpha).powf(0.25);
    let base = (2.0 * mo.n + 1.0) / 4.0;
    let qa = mo.a1 * q;
    let q2a2 = mo.a2 * (q * q);
    let phi = std::f64::consts::FRAC_PI_2 - theta;
    let rot = (-I * (0.5 * phi)).exp();
    let (mx1, mx2) = (qa.re, qa.im);
    let ya = qa * rot;
    let (my1, my2) = (ya.re, ya.im);
    let ya2 = q2a2 * rot * rot;
    let var_y1 = base + 0.5 * ya2.re - my1 * my1;
    let var_y2 = base - 0.5 * ya2.re - my2 * my2;
    QuadratureRecord {
        t,
        mean_x1: mx1,
        mean_x2: mx2,
        var_x1: base + 0.5 * q2a2.re - mx1 * mx1,
        var_x2: base - 0.5 * q2a2.re - mx2 * mx2,
        var_y1,
        var_y2,
        squeeze_degree: 0.25 * (var_y1 / var_y2).ln(),
    }
}

/// Quadratures from the vacuum-started moment solution.
pub fn quadratures_from_record(p: &CasimirParams, rec: &PhotonRecord, angle: FrameAngle) -> QuadratureRecord {
    let theta = angle.at(p, rec.t);
    let mo = Moments {
        norm_sq: 1.0,
        n: rec.n,
        a1: C64::from(0.0),
        a2: rec.a * (-I * theta).exp(),
    };
    quadratures_from_moments(p, rec.t, &mo, theta)
}

/// Quadrature statistics along a lab-frame trajectory; `angle` sets the
/// squeezing direction `phi = pi/2 - theta`.
pub fn quadrature_stats(
    traj: &Trajectory,
    p: &CasimirParams,
    m: &Metric,
    angle: FrameAngle,
) -> Result<Vec<QuadratureRecord>> {
    traj.times()
        .iter()
        .zip(traj.states())
        .map(|(&t, s)| Ok(quadratures_from_moments(p, t, &moments(s, m)?, angle.at(p, t))))
        .collect()
}

/// The small-coupling estimate of the unbroken uncertainties,
/// `dY = 1/2 +- (sqrt(ab) g / 4 Delta) sin(Delta t / 2)`.
pub fn unbroken_uncertainty_estimate(p: &CasimirParams, t: f64) -> (f64, f64) {
    let d = p.delta();
    let amp = p.sqrt_ab() * p.g() / (4.0 * d);
    let s = (0.5 * d * t).sin();
    (0.5 + amp * s, 0.5 - amp * s)
}

/// `<a^dagger a>_rho` along a trajectory.
pub fn photon_numbers(traj: &Trajectory, m: &Metric) -> Result<Vec<f64>> {
    traj.states().iter().map(|s| moments(s, m).map(|mo| mo.n)).collect()
}
