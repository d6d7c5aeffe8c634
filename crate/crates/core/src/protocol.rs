//! The elementary estimation step and single-trajectory execution.
//!
//! One step evolves the actual state with `U(omega)` and the estimate with
//! `U(omega_e)`, samples a measurement outcome from the actual state, and
//! applies the same Kraus operator to both.

use crate::error::{finite, unit_interval, Error, Result};
use crate::qubit::{fidelity, rabi_rotation, MeasurementModel, Operator2, QubitState};
use crate::rng::UniformSource;

/// Estimate probabilities below this make the conditioned update undefined.
pub const DEGENERATE_PROB: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProtocolParams {
    omega: f64,
    omega_e: f64,
    dp: f64,
    tau: f64,
}

impl ProtocolParams {
    pub fn new(omega: f64, omega_e: f64, dp: f64, tau: f64) -> Result<Self> {
        finite("omega", omega)?;
        finite("omega_e", omega_e)?;
        unit_interval("dp", dp)?;
        finite("tau", tau)?;
        if tau <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "tau",
                value: tau,
                reason: "measurement period must be positive",
            });
        }
        Ok(Self {
            omega,
            omega_e,
            dp,
            tau,
        })
    }

    /// Parameters with the estimated frequency set to `omega - delta`.
    pub fn with_detuning(omega: f64, delta: f64, dp: f64, tau: f64) -> Result<Self> {
        finite("delta", delta)?;
        Self::new(omega, omega - delta, dp, tau)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn omega_e(&self) -> f64 {
        self.omega_e
    }

    pub fn dp(&self) -> f64 {
        self.dp
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Detuning `omega - omega_e`.
    pub fn delta(&self) -> f64 {
        self.omega - self.omega_e
    }

    /// Continuum-limit measurement rate `dp^2 / tau`.
    pub fn gamma(&self) -> f64 {
        self.dp * self.dp / self.tau
    }

    pub fn measurement_model(&self) -> MeasurementModel {
        MeasurementModel::new(self.dp).expect("dp validated on construction")
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome {
    pub outcome: usize,
    pub prob: f64,
    pub actual_after: QubitState,
    pub estimate_after: QubitState,
    pub fidelity_after: f64,
}

/// Fidelity samples at `t_k = k tau`.
#[derive(Clone, Debug, PartialEq)]
pub struct FidelityTrace {
    times: Vec<f64>,
    fidelities: Vec<f64>,
}

impl FidelityTrace {
    pub fn new(times: Vec<f64>, fidelities: Vec<f64>) -> Result<Self> {
        if times.len() != fidelities.len() {
            return Err(Error::InvalidParameter {
                name: "fidelities",
                value: fidelities.len() as f64,
                reason: "length differs from times",
            });
        }
        if let Some(w) = times.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter {
                name: "times",
                value: w[1],
                reason: "times must be strictly increasing",
            });
        }
        Ok(Self { times, fidelities })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn fidelities(&self) -> &[f64] {
        &self.fidelities
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, f64)> {
        Some((*self.times.last()?, *self.fidelities.last()?))
    }
}

/// Precomputed propagators and measurement for repeated stepping.
#[derive(Clone, Copy, Debug)]
pub struct Protocol {
    params: ProtocolParams,
    model: MeasurementModel,
    u_actual: Operator2,
    u_estimate: Operator2,
}

impl Protocol {
    pub fn new(params: ProtocolParams, model: MeasurementModel) -> Self {
        Self {
            params,
            model,
            u_actual: rabi_rotation(params.omega * params.tau),
            u_estimate: rabi_rotation(params.omega_e * params.tau),
        }
    }

    pub fn params(&self) -> &ProtocolParams {
        &self.params
    }

    pub fn model(&self) -> &MeasurementModel {
        &self.model
    }

    pub fn evolve_pair(
        &self,
        actual: &QubitState,
        estimate: &QubitState,
    ) -> (QubitState, QubitState) {
        (
            actual.evolve(&self.u_actual),
            estimate.evolve(&self.u_estimate),
        )
    }

    pub fn step(&self, actual: &QubitState, estimate: &QubitState, u: f64) -> Result<StepOutcome> {
        let (a, e) = self.evolve_pair(actual, estimate);
        measure_and_update(&a, &e, &self.model, u)
    }

    /// Average fidelity change of one step, by explicit enumeration of both outcomes.
    pub fn expected_delta_f(&self, actual: &QubitState, estimate: &QubitState) -> Result<f64> {
        let f_before = fidelity(actual, estimate)?;
        let (a, e) = self.evolve_pair(actual, estimate);
        let mut mean = 0.0;
        for n in 0..2 {
            let p = self.model.effect(n).expectation(&a).re;
            if p <= 0.0 {
                continue;
            }
            let (a_n, e_n) = (
                apply_kraus(&self.model, n, &a)?,
                apply_kraus(&self.model, n, &e)?,
            );
            mean += p * fidelity(&a_n, &e_n)?;
        }
        Ok(mean - f_before)
    }
}

fn apply_kraus(model: &MeasurementModel, outcome: usize, psi: &QubitState) -> Result<QubitState> {
    let [b0, b1] = model.kraus(outcome).apply(psi.amplitudes());
    let p = b0.norm_sqr() + b1.norm_sqr();
    if p < DEGENERATE_PROB {
        return Err(Error::DegenerateUpdate { outcome, prob: p });
    }
    QubitState::normalized(b0, b1)
}

/// `(U(omega) actual, U(omega_e) estimate)`.
pub fn evolve_pair(
    actual: &QubitState,
    estimate: &QubitState,
    params: &ProtocolParams,
) -> (QubitState, QubitState) {
    let u = rabi_rotation(params.omega * params.tau);
    let ue = rabi_rotation(params.omega_e * params.tau);
    (actual.evolve(&u), estimate.evolve(&ue))
}

/// Samples the outcome from `actual` with `u` (outcome 0 iff `u < p0`) and
/// conditions both states on it.
pub fn measure_and_update(
    actual: &QubitState,
    estimate: &QubitState,
    model: &MeasurementModel,
    u: f64,
) -> Result<StepOutcome> {
    let p0 = model.prob_zero(actual);
    let outcome = if u < p0 { 0 } else { 1 };
    let prob = if outcome == 0 { p0 } else { 1.0 - p0 };
    let estimate_after = apply_kraus(model, outcome, estimate)?;
    let actual_after = apply_kraus(model, outcome, actual)?;
    let fidelity_after = fidelity(&actual_after, &estimate_after)?;
    Ok(StepOutcome {
        outcome,
        prob,
        actual_after,
        estimate_after,
        fidelity_after,
    })
}

pub fn elementary_step(
    actual: &QubitState,
    estimate: &QubitState,
    params: &ProtocolParams,
    model: &MeasurementModel,
    u: f64,
) -> Result<StepOutcome> {
    Protocol::new(*params, *model).step(actual, estimate, u)
}

pub fn expected_delta_f_bruteforce(
    actual: &QubitState,
    estimate: &QubitState,
    params: &ProtocolParams,
    model: &MeasurementModel,
) -> Result<f64> {
    Protocol::new(*params, *model).expected_delta_f(actual, estimate)
}

/// Runs `n_steps` elementary steps, drawing one uniform per step.
pub fn run_trajectory<R: UniformSource + ?Sized>(
    params: &ProtocolParams,
    model: &MeasurementModel,
    init_actual: &QubitState,
    init_estimate: &QubitState,
    n_steps: usize,
    rng: &mut R,
) -> Result<FidelityTrace> {
    let protocol = Protocol::new(*params, *model);
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut fidelities = Vec::with_capacity(n_steps + 1);
    times.push(0.0);
    fidelities.push(fidelity(init_actual, init_estimate)?);
    let (mut actual, mut estimate) = (*init_actual, *init_estimate);
    for k in 1..=n_steps {
        let out = protocol.step(&actual, &estimate, rng.next_uniform())?;
        actual = out.actual_after;
        estimate = out.estimate_after;
        times.push(k as f64 * params.tau);
        fidelities.push(out.fidelity_after);
    }
    Ok(FidelityTrace { times, fidelities })
}
