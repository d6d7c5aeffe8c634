//! Seeded Monte Carlo over independent trajectories.
//!
//! Trajectory `i` draws from [`TrajectoryRng::for_trajectory`]`(master_seed, i)`.
//! Trajectories run in parallel in fixed blocks of [`BLOCK`] indices, and the
//! per-step statistics are accumulated with Welford's update in increasing
//! trajectory order, so the result does not depend on the worker count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::protocol::{run_trajectory, ProtocolParams};
use crate::qubit::QubitState;
use crate::rng::TrajectoryRng;

/// Trajectories simulated between two sequential reduction passes.
pub const BLOCK: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleSpec {
    pub params: ProtocolParams,
    pub n_trajectories: usize,
    pub n_steps: usize,
    pub master_seed: u64,
    pub init_actual: QubitState,
    pub init_estimate: QubitState,
}

impl EnsembleSpec {
    pub fn new(
        params: ProtocolParams,
        n_trajectories: usize,
        n_steps: usize,
        master_seed: u64,
        init_actual: QubitState,
        init_estimate: QubitState,
    ) -> Result<Self> {
        if n_trajectories == 0 {
            return Err(Error::InvalidParameter {
                name: "n_trajectories",
                value: 0.0,
                reason: "need at least one trajectory",
            });
        }
        Ok(Self {
            params,
            n_trajectories,
            n_steps,
            master_seed,
            init_actual,
            init_estimate,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleTrace {
    times: Vec<f64>,
    mean_fidelity: Vec<f64>,
    std_error: Vec<f64>,
    n_trajectories: usize,
}

impl EnsembleTrace {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn mean_fidelity(&self) -> &[f64] {
        &self.mean_fidelity
    }

    /// Sample standard deviation over trajectories divided by `sqrt(n)`.
    pub fn std_error(&self) -> &[f64] {
        &self.std_error
    }

    pub fn n_trajectories(&self) -> usize {
        self.n_trajectories
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[derive(Clone)]
struct Welford {
    count: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Welford {
    fn new(len: usize) -> Self {
        Self {
            count: 0.0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    fn push(&mut self, sample: &[f64]) {
        self.count += 1.0;
        for ((m, s), &x) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(sample) {
            let d = x - *m;
            *m += d / self.count;
            *s += d * (x - *m);
        }
    }
}

/// Runs the ensemble on the ambient rayon pool.
pub fn run_ensemble(spec: &EnsembleSpec) -> Result<EnsembleTrace> {
    let model = spec.params.measurement_model();
    let len = spec.n_steps + 1;
    let mut acc = Welford::new(len);
    let mut times = Vec::new();
    for start in (0..spec.n_trajectories).step_by(BLOCK) {
        let end = (start + BLOCK).min(spec.n_trajectories);
        let results: Vec<Result<_>> = (start..end)
            .into_par_iter()
            .map(|i| {
                let mut rng = TrajectoryRng::for_trajectory(spec.master_seed, i as u64);
                run_trajectory(
                    &spec.params,
                    &model,
                    &spec.init_actual,
                    &spec.init_estimate,
                    spec.n_steps,
                    &mut rng,
                )
                .map_err(|e| Error::Trajectory {
                    index: i as u64,
                    source: Box::new(e),
                })
            })
            .collect();
        // First failure in index order, independent of scheduling.
        let block = results.into_iter().collect::<Result<Vec<_>>>()?;
        for trace in &block {
            acc.push(trace.fidelities());
        }
        if times.is_empty() {
            times = block[0].times().to_vec();
        }
    }
    let n = spec.n_trajectories as f64;
    let std_error = if spec.n_trajectories > 1 {
        acc.m2
            .iter()
            .map(|s| (s / (n - 1.0)).sqrt() / n.sqrt())
            .collect()
    } else {
        vec![0.0; len]
    };
    let mean_fidelity = acc.mean.into_iter().map(|m| m.clamp(0.0, 1.0)).collect();
    Ok(EnsembleTrace {
        times,
        mean_fidelity,
        std_error,
        n_trajectories: spec.n_trajectories,
    })
}

/// Runs the ensemble on a dedicated pool of `workers` threads.
pub fn run_ensemble_with_workers(spec: &EnsembleSpec, workers: usize) -> Result<EnsembleTrace> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    pool.install(|| run_ensemble(spec))
}

/// Plateau estimate over `window_start <= t <= window_end`.
///
/// Returns the time average of the ensemble mean and the time average of its
/// standard error. Neighboring samples are strongly correlated, so the error
/// is not divided down by the number of samples.
pub fn asymptotic_mean(
    trace: &EnsembleTrace,
    window_start: f64,
    window_end: f64,
) -> Result<(f64, f64)> {
    let bad = |reason| Error::InvalidWindow {
        start: window_start,
        end: window_end,
        reason,
    };
    if !(window_start <= window_end) {
        return Err(bad("start after end"));
    }
    let (Some(&t_first), Some(&t_last)) = (trace.times.first(), trace.times.last()) else {
        return Err(bad("trace is empty"));
    };
    if window_start < t_first || window_end > t_last + 1e-9 * t_last.abs().max(1.0) {
        return Err(bad("window outside trace range"));
    }
    let (mut sum, mut err, mut count) = (0.0, 0.0, 0usize);
    for ((&t, &m), &e) in trace
        .times
        .iter()
        .zip(&trace.mean_fidelity)
        .zip(&trace.std_error)
    {
        if t >= window_start && t <= window_end {
            sum += m;
            err += e;
            count += 1;
        }
    }
    if count == 0 {
        return Err(bad("no samples in window"));
    }
    Ok((sum / count as f64, err / count as f64))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::protocol::run_trajectory;

    fn fig1_params() -> ProtocolParams {
        ProtocolParams::new(1.0, 1.0, 0.04, PI / 50.0).unwrap()
    }

    #[test]
    fn single_trajectory_matches_direct_run() {
        let p = fig1_params();
        let spec = EnsembleSpec::new(p, 1, 300, 9, QubitState::zero(), QubitState::one()).unwrap();
        let ens = run_ensemble(&spec).unwrap();
        let mut rng = TrajectoryRng::for_trajectory(9, 0);
        let direct = run_trajectory(
            &p,
            &p.measurement_model(),
            &QubitState::zero(),
            &QubitState::one(),
            300,
            &mut rng,
        )
        .unwrap();
        assert_eq!(ens.mean_fidelity(), direct.fidelities());
        assert_eq!(ens.times(), direct.times());
        assert!(ens.std_error().iter().all(|&e| e == 0.0));
    }

    #[test]
    fn converged_ensemble_stays_converged() {
        let p = fig1_params();
        let s = QubitState::on_rabi_circle(0.3);
        let spec = EnsembleSpec::new(p, 20, 200, 1, s, s).unwrap();
        let ens = run_ensemble(&spec).unwrap();
        assert!(ens.mean_fidelity().iter().all(|&m| (m - 1.0).abs() < 1e-12));
        assert!(ens.std_error().iter().all(|&e| e < 1e-12));
    }

    #[test]
    fn rejects_empty_ensemble() {
        assert!(EnsembleSpec::new(
            fig1_params(),
            0,
            10,
            1,
            QubitState::zero(),
            QubitState::one()
        )
        .is_err());
    }

    #[test]
    fn degenerate_trajectory_reports_index() {
        use crate::rng::UniformSource;
        // No rotation, projective measurement: outcome 1 on the actual |+>
        // annihilates the estimate |0>.
        let p = ProtocolParams::new(0.0, 0.0, 1.0, 0.5).unwrap();
        let spec = EnsembleSpec::new(p, 40, 1, 1, QubitState::plus(), QubitState::zero()).unwrap();
        let first_bad = (0..40u64)
            .find(|&i| TrajectoryRng::for_trajectory(1, i).next_uniform() >= 0.5)
            .unwrap();
        let err = run_ensemble(&spec).unwrap_err();
        match err {
            Error::Trajectory { index, source } => {
                assert_eq!(index, first_bad);
                assert!(matches!(
                    *source,
                    Error::DegenerateUpdate { outcome: 1, .. }
                ));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn window_extraction() {
        let trace = EnsembleTrace {
            times: vec![0.0, 1.0, 2.0, 3.0],
            mean_fidelity: vec![0.7; 4],
            std_error: vec![0.0; 4],
            n_trajectories: 5,
        };
        let (m, e) = asymptotic_mean(&trace, 1.0, 3.0).unwrap();
        assert!((m - 0.7).abs() < 1e-15);
        assert_eq!(e, 0.0);
        assert!(asymptotic_mean(&trace, 1.2, 1.8).is_err());
        assert!(asymptotic_mean(&trace, 2.0, 1.0).is_err());
        assert!(asymptotic_mean(&trace, 1.0, 5.0).is_err());
    }
}
