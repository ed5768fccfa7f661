//! Dense operator algebra on a truncated single-mode Fock space.
//!
//! Every operator is a full `dim x dim` complex matrix acting on the span of
//! `|0>, ..., |dim-1>`. Antilinear maps are stored as their linear part `L`
//! and act as `v -> L * conj(v)`, with conjugation taken in the Fock basis.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

/// Smallest dimension accepted anywhere in the crate.
pub const MIN_DIM: usize = 2;

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim < MIN_DIM {
        Err(Error::InvalidDimension(dim))
    } else {
        Ok(())
    }
}

/// Size of the leading block of Fock levels treated as free of truncation
/// artifacts: the top quarter of the space is excluded.
pub fn trusted_levels(dim: usize) -> usize {
    (dim - dim / 4).max(1)
}

/// Which part of an operator enters a residual norm.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Truncation {
    /// Use every matrix element.
    #[default]
    Full,
    /// Restrict to the leading [`trusted_levels`] block.
    Trusted,
    /// Restrict to the leading `k x k` block.
    Leading(usize),
}

impl Truncation {
    pub fn levels(self, dim: usize) -> usize {
        match self {
            Truncation::Full => dim,
            Truncation::Trusted => trusted_levels(dim),
            Truncation::Leading(k) => k.min(dim),
        }
    }
}

/// A dense complex operator on a truncated Fock space.
#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    m: DMatrix<C64>,
}

impl FockOperator {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        check_dim(m.nrows())?;
        Ok(Self { m })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            m: DMatrix::zeros(dim, dim),
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            m: DMatrix::identity(dim, dim),
        })
    }

    pub fn from_diagonal(diag: &[C64]) -> Result<Self> {
        check_dim(diag.len())?;
        Ok(Self {
            m: DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
        })
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            m: DMatrix::from_fn(dim, dim, f),
        })
    }

    /// `a^dagger a`.
    pub fn number(dim: usize) -> Result<Self> {
        Self::from_fn(dim, |i, j| if i == j { C64::from(i as f64) } else { C64::from(0.0) })
    }

    /// `a^dagger a + 1/2`.
    pub fn shifted_number(dim: usize) -> Result<Self> {
        Self::from_fn(dim, |i, j| {
            if i == j {
                C64::from(i as f64 + 0.5)
            } else {
                C64::from(0.0)
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.m[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self { m: self.m.adjoint() }
    }

    /// Entrywise complex conjugate in the Fock basis.
    pub fn conj(&self) -> Self {
        Self {
            m: self.m.map(|z| z.conj()),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            m: self.m.transpose(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { m: &self.m * c }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self {
            m: &self.m * &other.m - &other.m * &self.m,
        }
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.norm()
    }

    /// Frobenius norm of the leading block selected by `mask`.
    pub fn masked_norm(&self, mask: Truncation) -> f64 {
        let k = mask.levels(self.dim());
        self.m.view((0, 0), (k, k)).norm()
    }

    /// `||A - A^dagger||_F / ||A||_F` (0 for the zero operator).
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.frobenius_norm();
        if n == 0.0 {
            return 0.0;
        }
        (&self.m - self.m.adjoint()).norm() / n
    }

    pub fn inverse(&self) -> Result<Self> {
        self.m
            .clone()
            .try_inverse()
            .map(|m| Self { m })
            .ok_or(Error::Singular("matrix inverse"))
    }

    pub fn apply(&self, v: &FockState) -> FockState {
        assert_eq!(self.dim(), v.dim(), "operator/state dimension mismatch");
        FockState {
            amps: &self.m * &v.amps,
        }
    }

    pub fn try_apply(&self, v: &FockState) -> Result<FockState> {
        if self.dim() != v.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.dim(),
            });
        }
        Ok(self.apply(v))
    }

    /// Eigenvalues from a complex Schur decomposition, sorted by real part
    /// (ties broken by imaginary part).
    pub fn eigenvalues(&self) -> Vec<C64> {
        let (_, t) = nalgebra::Schur::new(self.m.clone()).unpack();
        let mut ev: Vec<C64> = (0..self.dim()).map(|k| t[(k, k)]).collect();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        ev
    }

    /// Eigenvalues of a Hermitian operator, ascending. The input is
    /// symmetrized first.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let h = (&self.m + self.m.adjoint()) * C64::from(0.5);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

impl<'a> Add<&'a FockOperator> for &'a FockOperator {
    type Output = FockOperator;
    fn add(self, rhs: &'a FockOperator) -> FockOperator {
        FockOperator { m: &self.m + &rhs.m }
    }
}

impl Add for FockOperator {
    type Output = FockOperator;
    fn add(self, rhs: FockOperator) -> FockOperator {
        FockOperator { m: self.m + rhs.m }
    }
}

impl<'a> Sub<&'a FockOperator> for &'a FockOperator {
    type Output = FockOperator;
    fn sub(self, rhs: &'a FockOperator) -> FockOperator {
        FockOperator { m: &self.m - &rhs.m }
    }
}

impl Sub for FockOperator {
    type Output = FockOperator;
    fn sub(self, rhs: FockOperator) -> FockOperator {
        FockOperator { m: self.m - rhs.m }
    }
}

/// Complex matrix product through a cache-blocked kernel; nalgebra's
/// generic product is an order of magnitude slower for complex entries.
fn gemm(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let (m, k) = a.shape();
    assert_eq!(k, b.nrows(), "inner dimensions differ");
    let n = b.ncols();
    let mut c = DMatrix::<C64>::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    // Complex64 is #[repr(C)] { re, im }, the layout of [f64; 2]; storage is
    // column-major, so row stride 1 and column stride nrows.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_ptr() as *const [f64; 2],
            1,
            k as isize,
            [0.0, 0.0],
            c.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
    c
}

impl<'a> Mul<&'a FockOperator> for &'a FockOperator {
    type Output = FockOperator;
    fn mul(self, rhs: &'a FockOperator) -> FockOperator {
        FockOperator { m: gemm(&self.m, &rhs.m) }
    }
}

impl Mul for FockOperator {
    type Output = FockOperator;
    fn mul(self, rhs: FockOperator) -> FockOperator {
        &self * &rhs
    }
}

impl Mul<C64> for &FockOperator {
    type Output = FockOperator;
    fn mul(self, c: C64) -> FockOperator {
        self.scale(c)
    }
}

impl Mul<f64> for &FockOperator {
    type Output = FockOperator;
    fn mul(self, c: f64) -> FockOperator {
        self.scale(C64::from(c))
    }
}

impl Neg for &FockOperator {
    type Output = FockOperator;
    fn neg(self) -> FockOperator {
        FockOperator { m: -&self.m }
    }
}

/// A state vector in the truncated Fock basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    amps: DVector<C64>,
}

impl FockState {
    pub fn new(amps: DVector<C64>) -> Result<Self> {
        check_dim(amps.len())?;
        Ok(Self { amps })
    }

    pub fn from_slice(amps: &[C64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(amps))
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            amps: DVector::zeros(dim),
        })
    }

    /// The number state `|n>`.
    pub fn basis(dim: usize, n: usize) -> Result<Self> {
        check_dim(dim)?;
        if n >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: n + 1,
            });
        }
        let mut amps = DVector::zeros(dim);
        amps[n] = C64::from(1.0);
        Ok(Self { amps })
    }

    pub fn vacuum(dim: usize) -> Result<Self> {
        Self::basis(dim, 0)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn amplitude(&self, n: usize) -> C64 {
        self.amps[n]
    }

    pub fn conj(&self) -> Self {
        Self {
            amps: self.amps.map(|z| z.conj()),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            amps: &self.amps * c,
        }
    }

    /// Standard inner product `<self|other>`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amps.dotc(&other.amps)
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        self.scale(C64::from(1.0 / n))
    }

    /// Euclidean norm of the leading `mask` levels.
    pub fn masked_norm(&self, mask: Truncation) -> f64 {
        let k = mask.levels(self.dim());
        self.amps.rows(0, k).norm()
    }

    pub fn is_finite(&self) -> bool {
        self.amps.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl<'a> Add<&'a FockState> for &'a FockState {
    type Output = FockState;
    fn add(self, rhs: &'a FockState) -> FockState {
        FockState {
            amps: &self.amps + &rhs.amps,
        }
    }
}

impl<'a> Sub<&'a FockState> for &'a FockState {
    type Output = FockState;
    fn sub(self, rhs: &'a FockState) -> FockState {
        FockState {
            amps: &self.amps - &rhs.amps,
        }
    }
}

impl Mul<C64> for &FockState {
    type Output = FockState;
    fn mul(self, c: C64) -> FockState {
        self.scale(c)
    }
}

/// An invertible antilinear map `v -> L * conj(v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AntilinearOperator {
    linear: FockOperator,
}

impl AntilinearOperator {
    pub fn new(linear: FockOperator) -> Result<Self> {
        linear.inverse()?;
        Ok(Self { linear })
    }

    /// Plain complex conjugation in the Fock basis.
    pub fn conjugation(dim: usize) -> Result<Self> {
        Ok(Self {
            linear: FockOperator::identity(dim)?,
        })
    }

    /// Parity composed with time reversal: `a -> -a`, `i -> -i`.
    pub fn parity_time(dim: usize) -> Result<Self> {
        let p: Vec<C64> = (0..dim)
            .map(|n| C64::from(if n % 2 == 0 { 1.0 } else { -1.0 }))
            .collect();
        Ok(Self {
            linear: FockOperator::from_diagonal(&p)?,
        })
    }

    pub fn linear_part(&self) -> &FockOperator {
        &self.linear
    }

    pub fn dim(&self) -> usize {
        self.linear.dim()
    }

    pub fn apply(&self, v: &FockState) -> FockState {
        self.linear.apply(&v.conj())
    }

    /// `self ∘ other`, a linear map: `L1 * conj(L2)`.
    pub fn compose(&self, other: &AntilinearOperator) -> FockOperator {
        &self.linear * &other.linear.conj()
    }

    /// `op ∘ self`.
    pub fn after(&self, op: &FockOperator) -> AntilinearOperator {
        AntilinearOperator {
            linear: op * &self.linear,
        }
    }

    /// `self ∘ op`.
    pub fn before(&self, op: &FockOperator) -> AntilinearOperator {
        AntilinearOperator {
            linear: &self.linear * &op.conj(),
        }
    }

    pub fn inverse(&self) -> Result<AntilinearOperator> {
        Ok(AntilinearOperator {
            linear: self.linear.inverse()?.conj(),
        })
    }
}

/// Apply an antilinear operator to a state, checking dimensions.
pub fn apply_antilinear(k: &AntilinearOperator, v: &FockState) -> Result<FockState> {
    if k.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: k.dim(),
            found: v.dim(),
        });
    }
    Ok(k.apply(v))
}

/// Truncated bosonic ladder operators `(a, a^dagger)`.
pub fn ladder_ops(dim: usize) -> Result<(FockOperator, FockOperator)> {
    check_dim(dim)?;
    let a = FockOperator::from_fn(dim, |i, j| {
        if j == i + 1 {
            C64::from((j as f64).sqrt())
        } else {
            C64::from(0.0)
        }
    })?;
    let ad = a.adjoint();
    Ok((a, ad))
}

fn one_norm(m: &DMatrix<C64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Degree of the Taylor polynomial used after scaling.
const EXP_DEGREE: usize = 18;
/// Norm bound after scaling; the Taylor remainder is then below 1e-22.
const EXP_SCALED_NORM: f64 = 0.5;

/// Matrix exponential by scaling and squaring around a degree-18 Taylor
/// polynomial, evaluated with the Paterson-Stockmeyer scheme (seven
/// products) so that all the work goes through the blocked product.
pub fn matrix_exp(a: &FockOperator) -> Result<FockOperator> {
    if !a.is_finite() {
        return Err(Error::NonFinite("matrix_exp argument"));
    }
    let n = a.dim();
    let norm = one_norm(&a.m);
    let s = if norm > EXP_SCALED_NORM {
        (norm / EXP_SCALED_NORM).log2().ceil() as i32
    } else {
        0
    };
    let x = &a.m * C64::from(0.5f64.powi(s));
    let id = DMatrix::<C64>::identity(n, n);
    let x2 = gemm(&x, &x);
    let x3 = gemm(&x2, &x);
    let x4 = gemm(&x3, &x);
    let mut coef = [1.0f64; EXP_DEGREE + 1];
    for k in 1..=EXP_DEGREE {
        coef[k] = coef[k - 1] / k as f64;
    }
    let block = |j: usize| -> DMatrix<C64> {
        let pows = [&id, &x, &x2, &x3];
        let mut b = DMatrix::<C64>::zeros(n, n);
        for (i, p) in pows.iter().enumerate() {
            if let Some(&c) = coef.get(4 * j + i) {
                b += *p * C64::from(c);
            }
        }
        b
    };
    let mut e = block(EXP_DEGREE / 4);
    for j in (0..EXP_DEGREE / 4).rev() {
        e = gemm(&e, &x4) + block(j);
    }
    for _ in 0..s {
        e = gemm(&e, &e);
    }
    let out = FockOperator { m: e };
    if !out.is_finite() {
        return Err(Error::NonFinite("matrix_exp result"));
    }
    Ok(out)
}

/// Threshold below which an eigenvalue is not considered positive.
pub const POSITIVITY_TOL: f64 = 1e-10;

/// Hermitian positive square root of a Hermitian positive-definite operator.
pub fn hermitian_sqrt(a: &FockOperator) -> Result<FockOperator> {
    if !a.is_finite() {
        return Err(Error::NonFinite("hermitian_sqrt argument"));
    }
    let defect = a.hermiticity_defect();
    if defect > 1e-12 {
        return Err(Error::MetricViolation(format!(
            "operator is not Hermitian (relative defect {defect:e})"
        )));
    }
    let h = (&a.m + a.m.adjoint()) * C64::from(0.5);
    let eig = h.symmetric_eigen();
    let min = eig.eigenvalues.min();
    if !(min > POSITIVITY_TOL) {
        return Err(Error::MetricViolation(format!(
            "operator is not positive definite (min eigenvalue {min:e})"
        )));
    }
    let roots = eig.eigenvalues.map(|l| C64::from(l.sqrt()));
    let q = &eig.eigenvectors;
    let m = q * DMatrix::from_diagonal(&roots) * q.adjoint();
    let m = (&m + m.adjoint()) * C64::from(0.5);
    Ok(FockOperator { m })
}
