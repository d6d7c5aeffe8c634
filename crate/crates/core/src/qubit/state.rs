use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use num_complex::Complex64;

use super::Operator2;
use crate::error::{Error, Result};

/// Inputs whose squared norm deviates from one by more than this are rejected.
pub const NORM_INPUT_TOL: f64 = 1e-9;

/// A normalized pure qubit state `a0|0> + a1|1>`, with `|0>` the +1 eigenstate of sigma_z.
///
/// Global phase is not canonicalized; compare states through [`fidelity`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitState {
    a0: Complex64,
    a1: Complex64,
}

impl QubitState {
    /// Builds a state from amplitudes that are already normalized within
    /// [`NORM_INPUT_TOL`]; the residual is then removed.
    pub fn new(a0: Complex64, a1: Complex64) -> Result<Self> {
        check_finite(a0, a1)?;
        let n2 = a0.norm_sqr() + a1.norm_sqr();
        if (n2 - 1.0).abs() > NORM_INPUT_TOL {
            return Err(Error::InvalidState(format!(
                "squared norm {n2} deviates from 1"
            )));
        }
        Ok(Self::rescaled(a0, a1, n2))
    }

    /// Builds a state by normalizing arbitrary nonzero amplitudes.
    pub fn normalized(a0: Complex64, a1: Complex64) -> Result<Self> {
        check_finite(a0, a1)?;
        let n2 = a0.norm_sqr() + a1.norm_sqr();
        if !(n2 > 0.0) || !n2.is_finite() {
            return Err(Error::InvalidState(format!(
                "cannot normalize vector with squared norm {n2}"
            )));
        }
        Ok(Self::rescaled(a0, a1, n2))
    }

    fn rescaled(a0: Complex64, a1: Complex64, n2: f64) -> Self {
        let s = n2.sqrt().recip();
        Self {
            a0: a0 * s,
            a1: a1 * s,
        }
    }

    #[cfg(test)]
    pub(crate) fn unchecked(a0: Complex64, a1: Complex64) -> Self {
        Self { a0, a1 }
    }

    /// `|0>`, the north pole.
    pub const fn zero() -> Self {
        Self {
            a0: Complex64::new(1.0, 0.0),
            a1: Complex64::new(0.0, 0.0),
        }
    }

    /// `|1>`, the south pole.
    pub const fn one() -> Self {
        Self {
            a0: Complex64::new(0.0, 0.0),
            a1: Complex64::new(1.0, 0.0),
        }
    }

    /// `(|0> + |1>)/sqrt(2)`
    pub const fn plus() -> Self {
        Self {
            a0: Complex64::new(FRAC_1_SQRT_2, 0.0),
            a1: Complex64::new(FRAC_1_SQRT_2, 0.0),
        }
    }

    /// The state `exp(-i angle sigma_x / 2)|0> = cos(angle/2)|0> - i sin(angle/2)|1>`.
    ///
    /// These states fill the great circle in the y-z plane that the Rabi
    /// propagator sweeps out from `|0>`; for `angle` in `[0, pi]` the polar
    /// angle equals `angle` and the azimuth is `3pi/2`. Two such states have
    /// fidelity `cos^2((angle - angle_e)/2)` for any real angles.
    pub fn on_rabi_circle(angle: f64) -> Self {
        let (s, c) = (0.5 * angle).sin_cos();
        Self {
            a0: Complex64::new(c, 0.0),
            a1: Complex64::new(0.0, -s),
        }
    }

    pub fn from_bloch(angles: BlochAngles) -> Self {
        let (s, c) = (0.5 * angles.theta).sin_cos();
        Self {
            a0: Complex64::new(c, 0.0),
            a1: Complex64::from_polar(s, angles.phi),
        }
    }

    pub fn to_bloch(&self) -> BlochAngles {
        let r0 = self.a0.norm();
        let r1 = self.a1.norm();
        let theta = (2.0 * r1.atan2(r0)).clamp(0.0, PI);
        // Azimuth is meaningless at the poles; report 0 there.
        let phi = if r0 < 1e-15 || r1 < 1e-15 {
            0.0
        } else {
            wrap_azimuth(self.a1.arg() - self.a0.arg())
        };
        BlochAngles { theta, phi }
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        [self.a0, self.a1]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a0.norm_sqr() + self.a1.norm_sqr()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.a0.conj() * other.a0 + self.a1.conj() * other.a1
    }

    /// Applies a unitary and removes accumulated rounding from the norm.
    pub fn evolve(&self, u: &Operator2) -> Self {
        let [a0, a1] = u.apply(self.amplitudes());
        Self::rescaled(a0, a1, a0.norm_sqr() + a1.norm_sqr())
    }

    /// Bloch vector `(x, y, z)`.
    pub fn bloch_vector(&self) -> [f64; 3] {
        let c = self.a0.conj() * self.a1;
        [
            2.0 * c.re,
            2.0 * c.im,
            self.a0.norm_sqr() - self.a1.norm_sqr(),
        ]
    }
}

fn check_finite(a0: Complex64, a1: Complex64) -> Result<()> {
    if [a0.re, a0.im, a1.re, a1.im].iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidState("non-finite amplitude".into()))
    }
}

fn wrap_azimuth(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Polar angle `theta` in `[0, pi]` and azimuth `phi` in `[0, 2pi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochAngles {
    pub theta: f64,
    pub phi: f64,
}

impl BlochAngles {
    /// Validates `theta` and wraps `phi` into `[0, 2pi)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidParameter {
                name: "theta",
                value: theta,
                reason: "polar angle must lie in [0, pi]",
            });
        }
        if !phi.is_finite() {
            return Err(Error::InvalidParameter {
                name: "phi",
                value: phi,
                reason: "must be finite",
            });
        }
        Ok(Self {
            theta,
            phi: wrap_azimuth(phi),
        })
    }
}

/// Fidelity `|<psi|psi_e>|^2` of two pure states.
pub fn fidelity(psi: &QubitState, psi_e: &QubitState) -> Result<f64> {
    for s in [psi, psi_e] {
        let n2 = s.norm_sqr();
        if (n2 - 1.0).abs() > NORM_INPUT_TOL {
            return Err(Error::InvalidState(format!(
                "fidelity of unnormalized state (squared norm {n2})"
            )));
        }
    }
    Ok(psi.inner(psi_e).norm_sqr().clamp(0.0, 1.0))
}

/// Converts a state to Bloch angles.
pub fn to_bloch(psi: &QubitState) -> BlochAngles {
    psi.to_bloch()
}

/// Converts Bloch angles to a state with real, nonnegative `|0>` amplitude.
pub fn from_bloch(angles: BlochAngles) -> QubitState {
    QubitState::from_bloch(angles)
}
