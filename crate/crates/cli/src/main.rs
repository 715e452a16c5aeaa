//! invforge: synthesize, compile, pulse-lower, simulate, and benchmark
//! hidden-inverse circuit compilation.
//!
//! Every run that writes to --out also writes `<out>.manifest.json` holding
//! the resolved configuration, so outputs are reproducible bit-for-bit in
//! exact-distribution mode. Exit codes: 0 success, 2 invalid input, 3
//! simulation bound exceeded, 4 I/O or serialization failure.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use invforge_core::decompose::PassConfig;
use invforge_core::experiment::{paper_suite, run_suite, ExperimentConfig, Report};
use invforge_core::noise::{
    distribution, fidelity, sample, simulate_circuit, simulate_schedules, CoherentNoiseModel,
    SamplingDist, Statevector,
};
use invforge_core::pulse::{
    circuit_to_schedule, load_calibration, schedule_to_primitives, CalibrationConfig,
    PulseSchedule,
};
use invforge_core::synth::{synthesize, BenchmarkSpec};
use invforge_core::{run_pipeline, Circuit, Error};

type Circuit64 = Circuit<f64>;

#[derive(Parser)]
#[command(name = "invforge", version, about = "Hidden-inverse compilation toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a benchmark circuit from a spec file.
    Synth(SynthArgs),
    /// Run the lowering pipeline on a circuit.
    Compile(CompileArgs),
    /// Lower a basis circuit to pulse schedules and primitive rotations.
    Pulses(PulsesArgs),
    /// Simulate a circuit under coherent noise and report fidelity.
    Simulate(SimulateArgs),
    /// Run the benchmark suite with and without hidden inverses.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Benchmark spec JSON ({name, n_qubits, parameters, trotter_steps}).
    #[arg(long)]
    spec: PathBuf,
    /// Overrides the spec's random seed (crz-folding angles).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
}

#[derive(Args)]
struct CompileArgs {
    /// Circuit JSON to lower.
    #[arg(long)]
    circuit: PathBuf,
    /// Keep and exploit hidden-inverse annotations.
    #[arg(long, action = ArgAction::Set, default_value_t = true)]
    hidden_inverse: bool,
    /// Discover extra self-adjoint pairs after expansion.
    #[arg(long, action = ArgAction::Set, default_value_t = true)]
    peephole: bool,
    /// Peephole pairing window in gate positions.
    #[arg(long, default_value_t = 32)]
    window: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
}

#[derive(Args)]
struct PulsesArgs {
    /// Basis circuit JSON (post-compile alphabet: rz/rx/sx/x/cx).
    #[arg(long)]
    circuit: PathBuf,
    /// Calibration JSON; defaults to the synthetic device.
    #[arg(long, env = "INVFORGE_CAL")]
    cal: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
}

#[derive(Args)]
struct SimulateArgs {
    /// Circuit JSON; the noisy path needs the basis alphabet.
    #[arg(long, conflicts_with = "schedules")]
    circuit: Option<PathBuf>,
    /// Pulse schedule list JSON (as produced by `pulses`).
    #[arg(long)]
    schedules: Option<PathBuf>,
    /// "default", "zero", or a noise-model JSON path.
    #[arg(long, default_value = "default")]
    noise: String,
    #[arg(long, env = "INVFORGE_CAL")]
    cal: Option<PathBuf>,
    /// Sample this many shots instead of reporting exact probabilities.
    #[arg(long)]
    shots: Option<u64>,
    /// Seed for "default" noise sampling and for --shots.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
}

#[derive(Args)]
struct BenchArgs {
    /// "paper" or a path to a JSON list of benchmark specs.
    #[arg(long, default_value = "paper")]
    suite: String,
    /// "default", "zero", or a noise-model JSON path.
    #[arg(long, default_value = "default")]
    noise: String,
    /// Noise-model draws averaged per benchmark.
    #[arg(long, default_value_t = 10)]
    draws: usize,
    /// Mandatory in suite mode: seeds all per-channel epsilon draws.
    #[arg(long)]
    seed: u64,
    #[arg(long, env = "INVFORGE_CAL")]
    cal: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
    /// Also write a gnuplot script next to the CSV (requires --out).
    #[arg(long)]
    emit_gnuplot: bool,
}

#[derive(Serialize)]
struct RunManifest {
    tool_version: String,
    subcommand: String,
    config: serde_json::Value,
    outputs: Vec<String>,
    wall_ms: u128,
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Validation(_)
        | Error::UnsupportedGate { .. }
        | Error::DimensionMismatch(_)
        | Error::Calibration(_) => 2,
        Error::SimulationBound(_) => 3,
        Error::Io(_) | Error::Json(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let (stage, result) = match cli.cmd {
        Cmd::Synth(a) => ("synth", cmd_synth(a, started)),
        Cmd::Compile(a) => ("compile", cmd_compile(a, started)),
        Cmd::Pulses(a) => ("pulses", cmd_pulses(a, started)),
        Cmd::Simulate(a) => ("simulate", cmd_simulate(a, started)),
        Cmd::Bench(a) => ("bench", cmd_bench(a, started)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{stage}]: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

/// Writes the payload to --out (or stdout) and, when a path is given, the
/// manifest beside it. Returns the recorded output paths.
fn emit(
    out: &Option<PathBuf>,
    payload: &str,
    subcommand: &str,
    config: serde_json::Value,
    started: Instant,
) -> Result<(), Error> {
    let mut outputs = Vec::new();
    match out {
        Some(path) => {
            std::fs::write(path, payload)?;
            outputs.push(path.display().to_string());
            let manifest = RunManifest {
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                subcommand: subcommand.to_string(),
                config,
                outputs: outputs.clone(),
                wall_ms: started.elapsed().as_millis(),
            };
            let mpath = manifest_path(path);
            std::fs::write(&mpath, serde_json::to_string_pretty(&manifest)?)?;
        }
        None => {
            use std::io::Write;
            // A closed pipe (e.g. `invforge ... | head`) is not a failure.
            if let Err(e) = writeln!(std::io::stdout().lock(), "{payload}") {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(e.into());
                }
            }
        }
    }
    Ok(())
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn read_circuit(path: &Path) -> Result<Circuit64, Error> {
    Circuit::from_json(&std::fs::read_to_string(path)?)
}

fn load_cal(path: &Option<PathBuf>) -> Result<CalibrationConfig<f64>, Error> {
    match path {
        Some(p) => load_calibration(p),
        None => Ok(CalibrationConfig::synthetic(12)),
    }
}

/// "default" gets the declared epsilons with per-channel normal sampling
/// (scale 0.25) seeded by --seed; "zero" is exact; anything else is a path.
fn load_noise(arg: &str, seed: Option<u64>) -> Result<CoherentNoiseModel<f64>, Error> {
    let nm = match arg {
        "default" => CoherentNoiseModel::default().with_sampling(
            SamplingDist::Normal,
            0.25,
            seed.unwrap_or(0),
        ),
        "zero" => CoherentNoiseModel::zero(),
        path => serde_json::from_str(&std::fs::read_to_string(path)?)?,
    };
    nm.validate()?;
    Ok(nm)
}

fn require_json(format: OutFormat, what: &str) -> Result<(), Error> {
    if format != OutFormat::Json {
        return Err(Error::validation(format!("{what} output is JSON only")));
    }
    Ok(())
}

fn cmd_synth(a: SynthArgs, started: Instant) -> Result<(), Error> {
    require_json(a.format, "circuit")?;
    let mut spec: BenchmarkSpec<f64> =
        serde_json::from_str(&std::fs::read_to_string(&a.spec)?)?;
    if let Some(seed) = a.seed {
        spec.parameters.seed = Some(seed);
    }
    let circuit = synthesize(&spec)?;
    let config = json!({
        "spec": spec,
        "seed": a.seed,
    });
    emit(&a.out, &circuit.to_json()?, "synth", config, started)
}

fn cmd_compile(a: CompileArgs, started: Instant) -> Result<(), Error> {
    require_json(a.format, "circuit")?;
    let circuit = read_circuit(&a.circuit)?;
    let cfg = PassConfig {
        hidden_inverse: a.hidden_inverse,
        peephole: a.peephole,
        max_peephole_window: a.window,
    };
    let lowered = run_pipeline(&circuit, &cfg)?;
    let config = json!({
        "circuit": a.circuit.display().to_string(),
        "pass": {
            "hidden_inverse": cfg.hidden_inverse,
            "peephole": cfg.peephole,
            "max_peephole_window": cfg.max_peephole_window,
        },
    });
    emit(&a.out, &lowered.to_json()?, "compile", config, started)
}

fn cmd_pulses(a: PulsesArgs, started: Instant) -> Result<(), Error> {
    require_json(a.format, "schedule")?;
    let circuit = read_circuit(&a.circuit)?;
    let cal = load_cal(&a.cal)?;
    cal.validate()?;
    let schedules = circuit_to_schedule(&circuit, &cal)?;
    let entries: Vec<serde_json::Value> = schedules
        .iter()
        .map(|s| {
            Ok(json!({
                "gate": s.gate_ref,
                "instructions": s.instructions,
                "primitives": schedule_to_primitives(s),
                "duration": s.total_duration(),
            }))
        })
        .collect::<Result<_, Error>>()?;
    let payload = serde_json::to_string_pretty(&json!({
        "n_qubits": circuit.n_qubits,
        "schedules": entries,
    }))?;
    let config = json!({
        "circuit": a.circuit.display().to_string(),
        "cal": a.cal.as_ref().map(|p| p.display().to_string()),
    });
    emit(&a.out, &payload, "pulses", config, started)
}

fn cmd_simulate(a: SimulateArgs, started: Instant) -> Result<(), Error> {
    let nm = load_noise(&a.noise, a.seed)?;
    let zero_noise = nm == CoherentNoiseModel::zero();

    // Either a circuit file or a schedule dump (whose gate_refs rebuild the
    // ideal reference circuit).
    let (circuit, schedules): (Circuit64, Option<Vec<PulseSchedule<f64>>>) =
        match (&a.circuit, &a.schedules) {
            (Some(path), None) => (read_circuit(path)?, None),
            (None, Some(path)) => {
                let dump: serde_json::Value =
                    serde_json::from_str(&std::fs::read_to_string(path)?)?;
                let n_qubits = dump["n_qubits"]
                    .as_u64()
                    .ok_or_else(|| Error::validation("schedule dump lacks n_qubits"))?
                    as usize;
                let entries = dump["schedules"]
                    .as_array()
                    .ok_or_else(|| Error::validation("schedule dump lacks schedules"))?;
                let mut scheds = Vec::with_capacity(entries.len());
                let mut circ = Circuit::new(n_qubits);
                for e in entries {
                    let s: PulseSchedule<f64> = serde_json::from_value(json!({
                        "instructions": e["instructions"],
                        "gate_ref": e["gate"],
                    }))?;
                    circ.push(s.gate_ref.clone());
                    scheds.push(s);
                }
                (circ, Some(scheds))
            }
            _ => {
                return Err(Error::validation(
                    "provide exactly one of --circuit or --schedules",
                ))
            }
        };

    let initial = Statevector::zero_state(circuit.n_qubits)?;
    let ideal = distribution(&simulate_circuit(&circuit, &initial)?);

    let noisy_sv = match &schedules {
        Some(s) => simulate_schedules(s, &nm, &initial)?,
        None => match circuit_to_schedule(&circuit, &load_cal(&a.cal)?) {
            Ok(s) => simulate_schedules(&s, &nm, &initial)?,
            // A non-basis circuit has no pulse realization; under zero noise
            // the gate-level result is identical, otherwise compile first.
            Err(_) if zero_noise => simulate_circuit(&circuit, &initial)?,
            Err(e) => return Err(e),
        },
    };
    let noisy = match a.shots {
        Some(shots) => sample(&noisy_sv, shots, a.seed.unwrap_or(0))?,
        None => distribution(&noisy_sv),
    };
    let f = fidelity(&noisy, &ideal)?;

    let payload = match a.format {
        OutFormat::Json => serde_json::to_string_pretty(&json!({
            "n_qubits": circuit.n_qubits,
            "fidelity": f,
            "distribution": noisy.to_bitstring_map(),
            "ideal": ideal.to_bitstring_map(),
            "shots": a.shots,
        }))?,
        OutFormat::Csv => {
            let mut s = String::from("bitstring,probability,ideal_probability\n");
            let ideal_map = ideal.to_bitstring_map();
            let mut keys: BTreeMap<String, f64> = noisy.to_bitstring_map();
            for k in ideal_map.keys() {
                keys.entry(k.clone()).or_insert(0.0);
            }
            for (k, p) in keys {
                let pi = ideal_map.get(&k).copied().unwrap_or(0.0);
                s.push_str(&format!("{k},{p},{pi}\n"));
            }
            s
        }
    };
    let config = json!({
        "circuit": a.circuit.as_ref().map(|p| p.display().to_string()),
        "schedules": a.schedules.as_ref().map(|p| p.display().to_string()),
        "noise": a.noise,
        "cal": a.cal.as_ref().map(|p| p.display().to_string()),
        "shots": a.shots,
        "seed": a.seed,
    });
    emit(&a.out, &payload, "simulate", config, started)
}

fn report_csv(reports: &[Report<f64>], seed: u64) -> String {
    let mut s = String::from("name,n_qubits,f_std,f_hi,improvement,draws,seed\n");
    for r in reports {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.name, r.n_qubits, r.f_std, r.f_hi, r.improvement, r.draws, seed
        ));
    }
    s
}

fn gnuplot_script(csv: &Path) -> String {
    format!(
        "set datafile separator ','\n\
         set style data histogram\n\
         set style histogram clustered gap 1\n\
         set style fill solid 0.8 border -1\n\
         set boxwidth 0.9\n\
         set xtics rotate by -35 scale 0\n\
         set ylabel 'distribution fidelity'\n\
         set yrange [0:1.05]\n\
         set key top right\n\
         plot '{}' every ::1 using 3:xtic(1) title 'standard', \\\n\
         \x20    '' every ::1 using 4 title 'hidden-inverse'\n",
        csv.display()
    )
}

fn cmd_bench(a: BenchArgs, started: Instant) -> Result<(), Error> {
    let specs: Vec<BenchmarkSpec<f64>> = if a.suite == "paper" {
        paper_suite()
    } else {
        serde_json::from_str(&std::fs::read_to_string(&a.suite)?)?
    };
    let nm = load_noise(&a.noise, Some(a.seed))?;
    let cal = match &a.cal {
        Some(p) => Some(load_calibration(p)?),
        None => None,
    };
    let cfg = ExperimentConfig {
        draws: a.draws,
        calibration: cal,
    };
    let reports = run_suite(&specs, &nm, &cfg)?;

    let payload = match a.format {
        OutFormat::Csv => report_csv(&reports, a.seed),
        OutFormat::Json => serde_json::to_string_pretty(&reports)?,
    };

    if a.emit_gnuplot {
        let out = a.out.as_ref().ok_or_else(|| {
            Error::validation("--emit-gnuplot needs --out to locate the data file")
        })?;
        if a.format != OutFormat::Csv {
            return Err(Error::validation("--emit-gnuplot needs --format csv"));
        }
        std::fs::write(out.with_extension("gnuplot"), gnuplot_script(out))?;
    }

    let config = json!({
        "suite": a.suite,
        "noise": a.noise,
        "draws": a.draws,
        "seed": a.seed,
        "cal": a.cal.as_ref().map(|p| p.display().to_string()),
        "format": match a.format { OutFormat::Csv => "csv", OutFormat::Json => "json" },
    });
    emit(&a.out, &payload, "bench", config, started)
}
