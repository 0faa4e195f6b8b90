//! Dense 2×2 complex matrices in the chirality basis.
//!
//! Storage order is `(|−1⟩, |+1⟩)`: row/column 0 is the `|−1⟩` state. With
//! that ordering the chirality operator `σz` is `diag(−1, +1)`, so that
//! `σz|±1⟩ = ±|±1⟩`.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

/// A 2×2 complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub const fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn zeros() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub fn sigma_x() -> Self {
        Self::real(0.0, 1.0, 1.0, 0.0)
    }

    /// `σy` with the same orientation as `σx` and `σz`, i.e. `σx σy = i σz`.
    pub fn sigma_y() -> Self {
        // In (−1, +1) order σz = diag(−1, 1) = −Z, so σy = −Y keeps the algebra.
        Self::new(ZERO, I, -I, ZERO)
    }

    pub fn sigma_z() -> Self {
        Self::real(-1.0, 0.0, 0.0, 1.0)
    }

    pub fn diag(a: Complex64, d: Complex64) -> Self {
        Self::new(a, ZERO, ZERO, d)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let m = &self.0;
        Self::new(s * m[0][0], s * m[0][1], s * m[1][0], s * m[1][1])
    }

    pub fn dagger(&self) -> Self {
        let m = &self.0;
        Self::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    /// Largest entry-wise deviation between two matrices.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        worst
    }

    /// Deviation of `U†U` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        (self.dagger() * *self).max_abs_diff(&Mat2::identity())
    }

    /// Pauli decomposition `(a0, [ax, ay, az])` of a Hermitian matrix:
    /// `H = a0·I + ax·σx + ay·σy + az·σz`.
    pub fn hermitian_pauli(&self) -> (f64, [f64; 3]) {
        let m = &self.0;
        let a0 = 0.5 * (m[0][0].re + m[1][1].re);
        let az = 0.5 * (m[1][1].re - m[0][0].re);
        let ax = 0.5 * (m[0][1].re + m[1][0].re);
        // σy[0][1] = i, so Im(H01) = ay.
        let ay = 0.5 * (m[0][1].im - m[1][0].im);
        (a0, [ax, ay, az])
    }

    /// `exp(−i·H·t)` for a Hermitian `H`, evaluated in closed form.
    pub fn hermitian_propagator(h: &Mat2, t: f64) -> Mat2 {
        let (a0, a) = h.hermitian_pauli();
        pauli_propagator(a0, a, t)
    }
}

/// `exp(−i·(a0·I + a·σ)·t)` for real `a0`, `a`.
pub fn pauli_propagator(a0: f64, a: [f64; 3], t: f64) -> Mat2 {
    let norm = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    let phase = Complex64::from_polar(1.0, -a0 * t);
    let (c, s_over) = if norm == 0.0 {
        (1.0, t)
    } else {
        ((norm * t).cos(), (norm * t).sin() / norm)
    };
    // cos(|a|t)·I − i·sin(|a|t)·(a·σ)/|a|
    let n_sigma = pauli_combination(a);
    let u = Mat2::identity().scale(c.into()) - n_sigma.scale(I * s_over);
    u.scale(phase)
}

/// `a·σ` as a matrix.
pub fn pauli_combination(a: [f64; 3]) -> Mat2 {
    Mat2::sigma_x().scale(a[0].into()) + Mat2::sigma_y().scale(a[1].into()) + Mat2::sigma_z().scale(a[2].into())
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Mat2(out)
    }
}

impl Add for Mat2 {
    type Output = Mat2;

    fn add(self, rhs: Mat2) -> Mat2 {
        let mut out = self.0;
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] += rhs.0[r][c];
            }
        }
        Mat2(out)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;

    fn sub(self, rhs: Mat2) -> Mat2 {
        let mut out = self.0;
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] -= rhs.0[r][c];
            }
        }
        Mat2(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_algebra() {
        let (x, y, z) = (Mat2::sigma_x(), Mat2::sigma_y(), Mat2::sigma_z());
        assert!((x * y).max_abs_diff(&z.scale(I)) < 1e-15);
        assert!((y * z).max_abs_diff(&x.scale(I)) < 1e-15);
        assert!((z * x).max_abs_diff(&y.scale(I)) < 1e-15);
    }

    #[test]
    fn pauli_round_trip() {
        let h = pauli_combination([0.3, -1.2, 0.7]) + Mat2::identity().scale(2.5.into());
        let (a0, a) = h.hermitian_pauli();
        assert!((a0 - 2.5).abs() < 1e-15);
        assert!((a[0] - 0.3).abs() < 1e-15);
        assert!((a[1] + 1.2).abs() < 1e-15);
        assert!((a[2] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn propagator_matches_taylor_series() {
        let h = pauli_combination([0.4, 0.1, -0.3]) + Mat2::identity().scale(0.2.into());
        let t = 1.7;
        // Plain Taylor sum of exp(−iHt).
        let gen = h.scale(-I * t);
        let mut term = Mat2::identity();
        let mut sum = Mat2::identity();
        for k in 1..60 {
            term = (term * gen).scale((1.0 / k as f64).into());
            sum = sum + term;
        }
        let u = Mat2::hermitian_propagator(&h, t);
        assert!(u.max_abs_diff(&sum) < 1e-13);
        assert!(u.unitarity_error() < 1e-14);
    }
}
