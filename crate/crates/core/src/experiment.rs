//! Benchmark experiment harness: compile twice, simulate under the same
//! noise, compare distribution fidelity against the noise-free ideal.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decompose::{run_pipeline, PassConfig};
use crate::error::Result;
use crate::noise::{
    distribution, fidelity, simulate_circuit, simulate_schedules, CoherentNoiseModel,
    Statevector,
};
use crate::pulse::{circuit_to_schedule, CalibrationConfig};
use crate::scalar::{lit, Scalar};
use crate::synth::{synthesize, BenchmarkName, BenchmarkSpec};

/// Experiment knobs: how many noise-model draws to average and which device
/// calibration to lower onto (None picks the synthetic default sized to the
/// benchmark register).
#[derive(Clone, Debug)]
pub struct ExperimentConfig<T: Scalar> {
    pub draws: usize,
    pub calibration: Option<CalibrationConfig<T>>,
}

impl<T: Scalar> Default for ExperimentConfig<T> {
    fn default() -> Self {
        ExperimentConfig {
            draws: 10,
            calibration: None,
        }
    }
}

/// One benchmark's outcome: fidelities are means over the configured draws.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Report<T: Scalar> {
    pub name: String,
    pub n_qubits: usize,
    pub f_std: T,
    pub f_hi: T,
    /// (f_hi - f_std) / f_std over the draw means.
    pub improvement: T,
    pub draws: usize,
    pub f_std_per_draw: Vec<T>,
    pub f_hi_per_draw: Vec<T>,
}

fn mean<T: Scalar>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |a, &x| a + x) / lit::<T>(xs.len() as f64)
}

/// Compiles `spec` with and without hidden-inverse marking, lowers both to
/// pulses, and simulates both under identical per-draw noise realizations.
/// Fidelity is measured against the noise-free gate-level distribution of
/// the raw benchmark circuit.
pub fn run_experiment<T: Scalar>(
    spec: &BenchmarkSpec<T>,
    nm: &CoherentNoiseModel<T>,
    cfg: &ExperimentConfig<T>,
) -> Result<Report<T>> {
    if cfg.draws == 0 {
        return Err(crate::error::Error::validation("draws must be at least 1"));
    }
    nm.validate()?;
    let raw = synthesize(spec)?;
    let initial = Statevector::zero_state(raw.n_qubits)?;
    let ideal = distribution(&simulate_circuit(&raw, &initial)?);

    let compiled_hi = run_pipeline(&raw, &PassConfig::default())?;
    let compiled_std = run_pipeline(&raw, &PassConfig::standard())?;

    let owned_cal;
    let cal = match &cfg.calibration {
        Some(c) => c,
        None => {
            owned_cal = CalibrationConfig::<T>::synthetic(raw.n_qubits.max(2));
            &owned_cal
        }
    };
    let schedules_hi = circuit_to_schedule(&compiled_hi, cal)?;
    let schedules_std = circuit_to_schedule(&compiled_std, cal)?;

    let per_draw: Vec<(T, T)> = (0..cfg.draws)
        .into_par_iter()
        .map(|i| -> Result<(T, T)> {
            let nm_i = nm.with_draw(i as u64);
            let sv_std = simulate_schedules(&schedules_std, &nm_i, &initial)?;
            let sv_hi = simulate_schedules(&schedules_hi, &nm_i, &initial)?;
            let f_std = fidelity(&distribution(&sv_std), &ideal)?;
            let f_hi = fidelity(&distribution(&sv_hi), &ideal)?;
            Ok((f_std, f_hi))
        })
        .collect::<Result<_>>()?;

    let f_std_per_draw: Vec<T> = per_draw.iter().map(|p| p.0).collect();
    let f_hi_per_draw: Vec<T> = per_draw.iter().map(|p| p.1).collect();
    let f_std = mean(&f_std_per_draw);
    let f_hi = mean(&f_hi_per_draw);
    let improvement = if f_std > T::zero() {
        (f_hi - f_std) / f_std
    } else {
        T::zero()
    };
    Ok(Report {
        name: spec.name.as_str().to_string(),
        n_qubits: spec.n_qubits,
        f_std,
        f_hi,
        improvement,
        draws: cfg.draws,
        f_std_per_draw,
        f_hi_per_draw,
    })
}

/// Runs several benchmarks in parallel, preserving input order.
pub fn run_suite<T: Scalar>(
    specs: &[BenchmarkSpec<T>],
    nm: &CoherentNoiseModel<T>,
    cfg: &ExperimentConfig<T>,
) -> Result<Vec<Report<T>>> {
    specs
        .par_iter()
        .map(|spec| run_experiment(spec, nm, cfg))
        .collect()
}

/// The evaluation suite: QAOA rings at 4/6/8/10 qubits, the three 6-qubit
/// spin chains, QFT adders at 5/7/9 bits, and QPE at 5/6/7 qubits. Thirteen
/// benchmarks, all on declared default parameters.
pub fn paper_suite<T: Scalar>() -> Vec<BenchmarkSpec<T>> {
    let mut specs = Vec::new();
    for n in [4, 6, 8, 10] {
        specs.push(BenchmarkSpec::new(BenchmarkName::QaoaMaxcut, n));
    }
    for name in [BenchmarkName::Ising, BenchmarkName::Xy, BenchmarkName::Heisenberg] {
        specs.push(BenchmarkSpec::new(name, 6));
    }
    for n in [5, 7, 9] {
        specs.push(BenchmarkSpec::new(BenchmarkName::QftAdder, n));
    }
    for n in [5, 6, 7] {
        specs.push(BenchmarkSpec::new(BenchmarkName::Qpe, n));
    }
    specs
}
