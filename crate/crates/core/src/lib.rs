//! Hidden-inverse compilation and coherent-error simulation.
//!
//! Coherent over-rotation errors on a gate and on its pulse-inverted twin
//! cancel instead of accumulating, because both realizations share the same
//! miscalibrated channels. This crate carries that idea across the stack:
//!
//! - [`circuit`]: gate IR with `Standard`/`Inverse` variants and pair
//!   annotations, plus a dense matrix oracle for small registers.
//! - [`synth`]: benchmark generators (Pauli-string exponentials, Trotter
//!   chains, QAOA, QFT arithmetic, phase estimation, CRZ folding) that mark
//!   hidden-inverse pairs structurally at creation time.
//! - [`decompose`]: lowering of controlled rotations and multi-controlled
//!   unitaries into the basis alphabet, a peephole pass that discovers
//!   self-adjoint pairs, and the end-to-end [`decompose::run_pipeline`].
//! - [`pulse`]: calibration templates, schedule construction, and the
//!   amplitude-negating time reversal that realizes exact noisy adjoints.
//! - [`noise`]: shared-epsilon coherent noise, statevector kernels,
//!   distributions, and classical fidelity.
//! - [`experiment`]: the compile-twice/simulate-twice benchmark harness.
//!
//! Everything numeric is generic over [`scalar::Scalar`] (`f32` or `f64`);
//! the `*64` aliases below pin the double-precision instantiations most
//! code wants.

pub mod circuit;
pub mod decompose;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod noise;
pub mod pulse;
pub mod scalar;
pub mod synth;

pub use circuit::{Circuit, Gate, GateKind, QubitId, Variant};
pub use decompose::{run_pipeline, PassConfig};
pub use error::{Error, Result};
pub use experiment::{paper_suite, run_experiment, run_suite, ExperimentConfig, Report};
pub use noise::{
    distribution, fidelity, sample, simulate_circuit, simulate_schedules, CoherentNoiseModel,
    Distribution, Statevector,
};
pub use pulse::{
    circuit_to_schedule, invert_schedule, load_calibration, schedule_for_gate,
    schedule_to_primitives, CalibrationConfig, PulseSchedule,
};
pub use scalar::Scalar;
pub use synth::{synthesize, BenchmarkName, BenchmarkSpec};

/// Double-precision instantiations.
pub type Circuit64 = circuit::Circuit<f64>;
pub type Gate64 = circuit::Gate<f64>;
pub type BenchmarkSpec64 = synth::BenchmarkSpec<f64>;
pub type CalibrationConfig64 = pulse::CalibrationConfig<f64>;
pub type PulseSchedule64 = pulse::PulseSchedule<f64>;
pub type CoherentNoiseModel64 = noise::CoherentNoiseModel<f64>;
pub type Statevector64 = noise::Statevector<f64>;
pub type Distribution64 = noise::Distribution<f64>;
pub type Report64 = experiment::Report<f64>;
