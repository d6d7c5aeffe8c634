use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use super::QubitState;
use crate::error::{Error, Result};

/// Tolerance used by the validating constructors.
pub const OPERATOR_TOL: f64 = 1e-12;

const O: Complex64 = Complex64::new(0.0, 0.0);
const R: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// A 2x2 complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Operator2 {
    m: [[Complex64; 2]; 2],
}

impl Operator2 {
    pub const IDENTITY: Self = Self {
        m: [[R, O], [O, R]],
    };
    pub const ZERO: Self = Self {
        m: [[O, O], [O, O]],
    };
    pub const SIGMA_X: Self = Self {
        m: [[O, R], [R, O]],
    };
    pub const SIGMA_Y: Self = Self {
        m: [[O, Complex64::new(0.0, -1.0)], [I, O]],
    };
    pub const SIGMA_Z: Self = Self {
        m: [[R, O], [O, Complex64::new(-1.0, 0.0)]],
    };

    /// Wraps an arbitrary matrix. Rejects NaN and infinite entries.
    pub fn new(m: [[Complex64; 2]; 2]) -> Result<Self> {
        if m.iter()
            .flatten()
            .all(|z| z.re.is_finite() && z.im.is_finite())
        {
            Ok(Self { m })
        } else {
            Err(Error::InvalidOperator("non-finite matrix entry".into()))
        }
    }

    /// Wraps a matrix that must satisfy `U^dagger U = 1` within [`OPERATOR_TOL`].
    pub fn unitary(m: [[Complex64; 2]; 2]) -> Result<Self> {
        let op = Self::new(m)?;
        let err = (op.adjoint() * op).max_abs_diff(&Self::IDENTITY);
        if err > OPERATOR_TOL {
            return Err(Error::InvalidOperator(format!(
                "not unitary: |U^dagger U - 1| = {err:e}"
            )));
        }
        Ok(op)
    }

    /// Wraps a matrix that must be a POVM effect: Hermitian with spectrum in [0, 1].
    pub fn effect(m: [[Complex64; 2]; 2]) -> Result<Self> {
        let op = Self::new(m)?;
        let herm = op.max_abs_diff(&op.adjoint());
        if herm > OPERATOR_TOL {
            return Err(Error::InvalidOperator(format!(
                "effect not Hermitian: |E - E^dagger| = {herm:e}"
            )));
        }
        let (lo, hi) = op.hermitian_eigenvalues();
        if lo < -OPERATOR_TOL || hi > 1.0 + OPERATOR_TOL {
            return Err(Error::InvalidOperator(format!(
                "effect eigenvalues ({lo}, {hi}) outside [0, 1]"
            )));
        }
        Ok(op)
    }

    pub(crate) const fn from_entries_unchecked(m: [[Complex64; 2]; 2]) -> Self {
        Self { m }
    }

    pub fn diagonal(d0: f64, d1: f64) -> Self {
        Self {
            m: [[Complex64::new(d0, 0.0), O], [O, Complex64::new(d1, 0.0)]],
        }
    }

    pub fn entries(&self) -> [[Complex64; 2]; 2] {
        self.m
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.m[row][col]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self {
            m: [
                [m[0][0].conj(), m[1][0].conj()],
                [m[0][1].conj(), m[1][1].conj()],
            ],
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let m = &self.m;
        Self {
            m: [[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]],
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    /// Matrix-vector product on raw amplitudes.
    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        let m = &self.m;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    /// `<psi| A |psi>`
    pub fn expectation(&self, psi: &QubitState) -> Complex64 {
        let a = psi.amplitudes();
        let av = self.apply(a);
        a[0].conj() * av[0] + a[1].conj() * av[1]
    }

    /// `<bra| A |ket>`
    pub fn matrix_element(&self, bra: &QubitState, ket: &QubitState) -> Complex64 {
        let b = bra.amplitudes();
        let av = self.apply(ket.amplitudes());
        b[0].conj() * av[0] + b[1].conj() * av[1]
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues `(lo, hi)` of the Hermitian part of the matrix.
    pub fn hermitian_eigenvalues(&self) -> (f64, f64) {
        let a = self.m[0][0].re;
        let d = self.m[1][1].re;
        let b = 0.5 * (self.m[0][1] + self.m[1][0].conj());
        let mean = 0.5 * (a + d);
        let half_gap = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        (mean - half_gap, mean + half_gap)
    }
}

impl Mul for Operator2 {
    type Output = Operator2;

    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (&self.m, &rhs.m);
        let e = |r: usize, c: usize| a[r][0] * b[0][c] + a[r][1] * b[1][c];
        Self {
            m: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]],
        }
    }
}

impl Add for Operator2 {
    type Output = Operator2;

    fn add(self, rhs: Self) -> Self {
        let (a, b) = (&self.m, &rhs.m);
        Self {
            m: [
                [a[0][0] + b[0][0], a[0][1] + b[0][1]],
                [a[1][0] + b[1][0], a[1][1] + b[1][1]],
            ],
        }
    }
}

impl Sub for Operator2 {
    type Output = Operator2;

    fn sub(self, rhs: Self) -> Self {
        self + rhs.scale(Complex64::new(-1.0, 0.0))
    }
}
