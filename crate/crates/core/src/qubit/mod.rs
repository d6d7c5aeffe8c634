//! Two-level linear algebra: states, Rabi propagators and the symmetric
//! unsharp sigma_z measurement.

mod operator;
mod state;

use num_complex::Complex64;

pub use operator::{Operator2, OPERATOR_TOL};
pub use state::{fidelity, from_bloch, to_bloch, BlochAngles, QubitState, NORM_INPUT_TOL};

use crate::error::{finite, unit_interval, Error, Result};

/// Rabi propagator `exp(-i (omega/2) sigma_x tau)`.
pub fn make_propagator(omega: f64, tau: f64) -> Result<Operator2> {
    finite("omega", omega)?;
    finite("tau", tau)?;
    if tau < 0.0 {
        return Err(Error::InvalidParameter {
            name: "tau",
            value: tau,
            reason: "duration must be nonnegative",
        });
    }
    Ok(rabi_rotation(omega * tau))
}

/// `cos(angle/2) 1 - i sin(angle/2) sigma_x`, a rotation of the Bloch vector
/// by `angle` about x.
pub(crate) fn rabi_rotation(angle: f64) -> Operator2 {
    let (s, c) = (0.5 * angle).sin_cos();
    let d = Complex64::new(c, 0.0);
    let o = Complex64::new(0.0, -s);
    Operator2::from_entries_unchecked([[d, o], [o, d]])
}

/// Two-outcome unsharp sigma_z measurement of strength `dp`.
///
/// Effects are `E0,1 = (1 +/- dp sigma_z)/2`. Kraus operators are the positive
/// square roots `M_n = sqrt(E_n)`, which are diagonal here.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementModel {
    dp: f64,
    e0: Operator2,
    e1: Operator2,
    m0: Operator2,
    m1: Operator2,
}

impl MeasurementModel {
    pub fn new(dp: f64) -> Result<Self> {
        unit_interval("dp", dp)?;
        let hi = 0.5 * (1.0 + dp);
        let lo = 0.5 * (1.0 - dp);
        Ok(Self {
            dp,
            e0: Operator2::diagonal(hi, lo),
            e1: Operator2::diagonal(lo, hi),
            m0: Operator2::diagonal(hi.sqrt(), lo.sqrt()),
            m1: Operator2::diagonal(lo.sqrt(), hi.sqrt()),
        })
    }

    pub fn dp(&self) -> f64 {
        self.dp
    }

    pub fn effect(&self, outcome: usize) -> &Operator2 {
        match outcome {
            0 => &self.e0,
            _ => &self.e1,
        }
    }

    pub fn kraus(&self, outcome: usize) -> &Operator2 {
        match outcome {
            0 => &self.m0,
            _ => &self.m1,
        }
    }

    pub fn effects(&self) -> (Operator2, Operator2) {
        (self.e0, self.e1)
    }

    pub fn kraus_operators(&self) -> (Operator2, Operator2) {
        (self.m0, self.m1)
    }

    /// Probability of outcome 0, `<psi|E0|psi> = (1 + dp <sigma_z>)/2`.
    pub fn prob_zero(&self, psi: &QubitState) -> f64 {
        self.e0.expectation(psi).re.clamp(0.0, 1.0)
    }
}

pub fn make_measurement_model(dp: f64) -> Result<MeasurementModel> {
    MeasurementModel::new(dp)
}

/// Heisenberg-picture effects `U^dagger(omega_e) E_n U(omega_e)` for one period `tau`:
/// `E'0 = (1 + dp (cos(omega_e tau) sigma_z + sin(omega_e tau) sigma_y))/2`, `E'1 = 1 - E'0`.
pub fn time_varying_effects(
    model: &MeasurementModel,
    omega_e: f64,
    tau: f64,
) -> Result<(Operator2, Operator2)> {
    finite("omega_e", omega_e)?;
    finite("tau", tau)?;
    let (s, c) = (omega_e * tau).sin_cos();
    let r = |x: f64| Complex64::new(x, 0.0);
    let bias = (Operator2::SIGMA_Z.scale(r(c)) + Operator2::SIGMA_Y.scale(r(s)))
        .scale(r(0.5 * model.dp()));
    let half = Operator2::IDENTITY.scale(r(0.5));
    let e0 = Operator2::effect((half + bias).entries())?;
    let e1 = Operator2::effect((half - bias).entries())?;
    Ok((e0, e1))
}
