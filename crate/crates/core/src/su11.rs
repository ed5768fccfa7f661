//! Quadratic single-mode generators as elements of su(1,1).
//!
//! With `K0 = (a^dagger a + 1/2)/2`, `K+ = a^dagger^2 / 2` and `K- = a^2 / 2`
//! every Hamiltonian in the Casimir model is `k0 K0 + kp K+ + km K-`.
//! Conjugating by exponentials of such generators stays inside the algebra,
//! so it can be carried out exactly in the three-dimensional adjoint
//! representation, free of any Fock-space cutoff. That makes it usable for
//! complex squeezing strengths, where the Fock-space matrices are dominated
//! by truncation.

use nalgebra::{Matrix3, Vector3};

use crate::error::Result;
use crate::fock::{ladder_ops, FockOperator, FockState, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Su11 {
    pub k0: C64,
    pub kp: C64,
    pub km: C64,
}

impl Su11 {
    pub fn new(k0: C64, kp: C64, km: C64) -> Self {
        Self { k0, kp, km }
    }

    pub fn zero() -> Self {
        let z = C64::from(0.0);
        Self::new(z, z, z)
    }

    fn coords(&self) -> Vector3<C64> {
        Vector3::new(self.k0, self.kp, self.km)
    }

    fn from_coords(v: &Vector3<C64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::new(self.k0 * c, self.kp * c, self.km * c)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.k0 + other.k0, self.kp + other.kp, self.km + other.km)
    }

    /// Matrix of `Y -> [self, Y]` in the `(K0, K+, K-)` basis, using
    /// `[K0, K+-] = +-K+-` and `[K-, K+] = 2 K0`.
    pub fn ad(&self) -> Matrix3<C64> {
        let z = C64::from(0.0);
        let two = C64::from(2.0);
        Matrix3::new(
            z,
            two * self.km,
            -two * self.kp,
            -self.kp,
            self.k0,
            z,
            self.km,
            z,
            -self.k0,
        )
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self::from_coords(&(self.ad() * other.coords()))
    }

    /// `exp(G) self exp(-G)`.
    pub fn conjugated_by_exp(&self, gen: &Su11) -> Self {
        let e = gen.ad().exp();
        Self::from_coords(&(e * self.coords()))
    }

    /// `max(|kp|, |km|)`, zero exactly when the element is diagonal in the
    /// number basis.
    pub fn off_diagonal(&self) -> f64 {
        self.kp.norm().max(self.km.norm())
    }

    /// Eigenvalue of the diagonal part on `|n>`: `k0 (n + 1/2) / 2`.
    pub fn diagonal_value(&self, n: usize) -> C64 {
        self.k0 * (n as f64 + 0.5) * 0.5
    }

    /// Applies the truncated operator to `psi` without forming the matrix.
    pub fn apply(&self, psi: &FockState) -> FockState {
        let c = psi.amplitudes();
        let dim = c.len();
        let mut out = c.clone();
        for n in 0..dim {
            let nf = n as f64;
            let mut v = self.k0 * 0.5 * (nf + 0.5) * c[n];
            if n >= 2 {
                // K+ |n-2> = sqrt(n (n-1)) / 2 |n>
                v += self.kp * 0.5 * (nf * (nf - 1.0)).sqrt() * c[n - 2];
            }
            if n + 2 < dim {
                // K- |n+2> = sqrt((n+1)(n+2)) / 2 |n>
                v += self.km * 0.5 * ((nf + 1.0) * (nf + 2.0)).sqrt() * c[n + 2];
            }
            out[n] = v;
        }
        FockState::new(out).expect("dimension unchanged")
    }

    /// The truncated Fock-space matrix of this element.
    pub fn to_operator(&self, dim: usize) -> Result<FockOperator> {
        let (a, ad) = ladder_ops(dim)?;
        let k = FockOperator::shifted_number(dim)?;
        let half = C64::from(0.5);
        Ok(&(&k.scale(self.k0 * half) + &(&ad * &ad).scale(self.kp * half))
            + &(&a * &a).scale(self.km * half))
    }
}
