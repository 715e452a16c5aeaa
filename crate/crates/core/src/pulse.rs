//! Pulse-level gate model: schedules, hidden-inverse construction by
//! amplitude negation and sequence reversal, and lowering to primitive
//! rotations.
//!
//! The central simplification, stated loudly: pulses map to rotation angles
//! through the linear law `nominal_angle = kappa * Re(amplitude * e^{i phase})
//! * duration` instead of Hamiltonian waveform integration. Waveform shapes
//! ride along as metadata for export realism; only the primitive rotations
//! reach the simulator. Coherent amplitude miscalibration therefore scales
//! the rotation angle, which is exactly the error model the analysis uses.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind, QubitId, Variant};
use crate::error::{Error, Result};
use crate::linalg::Unitary2;
use crate::scalar::{lit, Scalar};

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Drive,
    Control,
}

/// Hardware channel: `D#` drives qubit #, `U#` is bound to an ordered qubit
/// pair by the calibration file.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Channel {
    pub kind: ChannelKind,
    pub index: usize,
}

impl Channel {
    pub fn drive(index: usize) -> Self {
        Channel { kind: ChannelKind::Drive, index }
    }

    pub fn control(index: usize) -> Self {
        Channel { kind: ChannelKind::Control, index }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ChannelKind::Drive => write!(f, "d{}", self.index),
            ChannelKind::Control => write!(f, "u{}", self.index),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseShape {
    Gaussian,
    GaussianSquare,
    Drag,
    VirtualZ,
}

/// Rotation generator a pulse realizes. ZX is the cross-resonance axis.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Zx,
    Z,
}

/// What the simulator consumes: `exp(-i angle / 2 * P)` with P the axis
/// operator over `qubits` (ZX orders them control first).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Primitive<T> {
    pub axis: Axis,
    pub qubits: Vec<QubitId>,
    pub nominal_angle: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PulseInstruction<T> {
    pub channel: Channel,
    /// Start time in dt samples.
    pub t0: u64,
    pub duration: u64,
    #[serde(with = "complex_pair")]
    pub amplitude: Complex<T>,
    pub phase: T,
    pub shape: PulseShape,
    pub primitive: Primitive<T>,
}

mod complex_pair {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<T: Scalar, S: Serializer>(
        z: &Complex<T>,
        ser: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(ser)
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(
        de: D,
    ) -> std::result::Result<Complex<T>, D::Error> {
        let [re, im] = <[T; 2]>::deserialize(de)?;
        Ok(Complex::new(re, im))
    }
}

impl<T: Scalar> PulseInstruction<T> {
    pub fn is_virtual(&self) -> bool {
        self.shape == PulseShape::VirtualZ
    }

    /// Signed drive strength `Re(amplitude * e^{i phase})`.
    pub fn effective_amplitude(&self) -> T {
        (self.amplitude * Complex::from_polar(T::one(), self.phase)).re
    }

    pub fn end(&self) -> u64 {
        self.t0 + self.duration
    }
}

/// One gate's worth of pulses, ordered by start time (ties broken drive
/// before control, then by channel index).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PulseSchedule<T: Scalar> {
    pub instructions: Vec<PulseInstruction<T>>,
    /// The gate this schedule implements; an Inverse variant means the
    /// schedule realizes the adjoint-by-pulse-inversion of the kind.
    pub gate_ref: Gate<T>,
}

impl<T: Scalar> PulseSchedule<T> {
    pub fn new(mut instructions: Vec<PulseInstruction<T>>, gate_ref: Gate<T>) -> Result<Self> {
        // End time joins the key so a zero-duration frame change sharing a
        // start sample sorts before the pulse, which is what time reversal
        // of a trailing VirtualZ requires.
        instructions.sort_by(|a, b| (a.t0, a.end(), a.channel).cmp(&(b.t0, b.end(), b.channel)));
        let sched = PulseSchedule { instructions, gate_ref };
        sched.check_no_overlap()?;
        Ok(sched)
    }

    fn check_no_overlap(&self) -> Result<()> {
        // Half-open occupancy [t0, t0 + duration): zero-duration frame
        // changes never conflict.
        let mut busy_until: BTreeMap<Channel, u64> = BTreeMap::new();
        for ins in &self.instructions {
            if ins.duration == 0 {
                continue;
            }
            let free = busy_until.entry(ins.channel).or_insert(0);
            if ins.t0 < *free {
                return Err(Error::validation(format!(
                    "overlapping instructions on channel {}",
                    ins.channel
                )));
            }
            *free = ins.end();
        }
        Ok(())
    }

    pub fn total_duration(&self) -> u64 {
        self.instructions.iter().map(|i| i.end()).max().unwrap_or(0)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlChannelBinding {
    pub index: usize,
    pub control: usize,
    pub target: usize,
}

/// Device description: sample time, per-channel angle calibration kappa
/// (exact channel name first, then the "d"/"u" kind default), cross-resonance
/// channel bindings, and per-gate pulse templates with abstract channel
/// roles (drive 0 = control or sole qubit, drive 1 = target).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CalibrationConfig<T: Scalar> {
    pub dt: T,
    pub kappa: BTreeMap<String, T>,
    pub control_channels: Vec<ControlChannelBinding>,
    pub templates: BTreeMap<String, Vec<PulseInstruction<T>>>,
}

const TEMPLATE_TOL: f64 = 1e-8;

impl<T: Scalar> CalibrationConfig<T> {
    /// Self-consistent synthetic device with all-to-all directed CR channels
    /// over `n_qubits`. Drive pi pulses run 160 samples at amplitude 0.5;
    /// CR segments run 560 samples. Not any real machine's numbers.
    pub fn synthetic(n_qubits: usize) -> Self {
        let kappa_d = std::f64::consts::PI / 80.0;
        let kappa_u = std::f64::consts::PI / 80.0;
        let mut kappa = BTreeMap::new();
        kappa.insert("d".to_string(), lit::<T>(kappa_d));
        kappa.insert("u".to_string(), lit::<T>(kappa_u));

        let mut control_channels = Vec::new();
        for c in 0..n_qubits {
            for t in 0..n_qubits {
                if c != t {
                    control_channels.push(ControlChannelBinding {
                        index: control_channels.len(),
                        control: c,
                        target: t,
                    });
                }
            }
        }

        let pi = std::f64::consts::PI;
        let drive = |q: usize, t0: u64, angle: f64| PulseInstruction {
            channel: Channel::drive(q),
            t0,
            duration: 160,
            amplitude: Complex::new(lit::<T>(angle / (kappa_d * 160.0)), T::zero()),
            phase: T::zero(),
            shape: PulseShape::Gaussian,
            primitive: Primitive {
                axis: Axis::X,
                qubits: vec![QubitId(q)],
                nominal_angle: lit::<T>(angle),
            },
        };
        let cr = |t0: u64, angle: f64| PulseInstruction {
            channel: Channel::control(0),
            t0,
            duration: 560,
            amplitude: Complex::new(lit::<T>(angle / (kappa_u * 560.0)), T::zero()),
            phase: T::zero(),
            shape: PulseShape::GaussianSquare,
            primitive: Primitive {
                axis: Axis::Zx,
                qubits: vec![QubitId(0), QubitId(1)],
                nominal_angle: lit::<T>(angle),
            },
        };
        let virtual_z = |q: usize, t0: u64, angle: f64| PulseInstruction {
            channel: Channel::drive(q),
            t0,
            duration: 0,
            amplitude: Complex::new(T::zero(), T::zero()),
            phase: T::zero(),
            shape: PulseShape::VirtualZ,
            primitive: Primitive {
                axis: Axis::Z,
                qubits: vec![QubitId(q)],
                nominal_angle: lit::<T>(angle),
            },
        };

        let mut templates = BTreeMap::new();
        templates.insert("rx".to_string(), vec![drive(0, 0, pi)]);
        // Echoed cross-resonance: the leading pi/2 drive sits on the target,
        // the pi echoes on the control, and a virtual frame change closes the
        // product to CX (global phase e^{i pi/4}).
        templates.insert(
            "cx".to_string(),
            vec![
                drive(1, 0, pi / 2.0),
                cr(160, pi / 4.0),
                drive(0, 720, pi),
                cr(880, -pi / 4.0),
                drive(0, 1440, pi),
                drive(1, 1440, pi),
                virtual_z(0, 1600, -pi / 2.0),
            ],
        );

        CalibrationConfig {
            dt: lit::<T>(2.2222e-10),
            kappa,
            control_channels,
            templates,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cal: CalibrationConfig<T> = serde_json::from_str(text)?;
        cal.validate()?;
        Ok(cal)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn kappa_for(&self, channel: &Channel) -> Result<T> {
        let kind_key = match channel.kind {
            ChannelKind::Drive => "d",
            ChannelKind::Control => "u",
        };
        self.kappa
            .get(&channel.to_string())
            .or_else(|| self.kappa.get(kind_key))
            .copied()
            .ok_or_else(|| Error::Calibration(format!("no kappa for channel {channel}")))
    }

    pub fn binding_for(&self, control: usize, target: usize) -> Result<&ControlChannelBinding> {
        self.control_channels
            .iter()
            .find(|b| b.control == control && b.target == target)
            .ok_or_else(|| {
                Error::Calibration(format!(
                    "no control channel bound to pair ({control}, {target})"
                ))
            })
    }

    /// Full consistency check: instruction invariants, per-channel timing,
    /// and the load-time identity oracle for every template.
    pub fn validate(&self) -> Result<()> {
        if self.dt <= T::zero() {
            return Err(Error::Calibration("dt must be positive".into()));
        }
        for b in &self.control_channels {
            if b.control == b.target {
                return Err(Error::Calibration(format!(
                    "control channel u{} binds a qubit to itself",
                    b.index
                )));
            }
        }
        for name in ["rx", "cx"] {
            if self.templates.get(name).map_or(true, Vec::is_empty) {
                return Err(Error::Calibration(format!(
                    "calibration must provide a nonempty '{name}' template"
                )));
            }
        }
        let tol = lit::<T>(TEMPLATE_TOL);
        for (name, template) in &self.templates {
            let target: Unitary2<T> = match name.as_str() {
                "rx" | "x" => Unitary2::x(),
                "sx" => Unitary2::sx(),
                "cx" => Unitary2::identity(), // placeholder; handled below
                other => {
                    return Err(Error::Calibration(format!("unknown template '{other}'")))
                }
            };
            for ins in template {
                self.check_instruction(name, ins)?;
            }
            PulseSchedule::new(template.clone(), Gate::x(0))?;
            // Identity oracle: the lowered primitive product must reproduce
            // the template's gate up to global phase.
            let (product, n) = template_product(template)?;
            let expected = match name.as_str() {
                "cx" => crate::circuit::unitary_of_gate(&Gate::<T>::cx(0, 1), 2)?,
                _ => {
                    let mut m = crate::linalg::identity::<T>(2);
                    for (r, row) in target.m.iter().enumerate() {
                        for (c, v) in row.iter().enumerate() {
                            m[(r, c)] = *v;
                        }
                    }
                    m
                }
            };
            if (name == "cx" && n != 2) || (name != "cx" && n != 1) {
                return Err(Error::Calibration(format!(
                    "template '{name}' acts on {n} role qubits"
                )));
            }
            if !crate::circuit::equal_up_to_global_phase(&product, &expected, tol)? {
                let defect = worst_deviation(&product, &expected);
                return Err(Error::Calibration(format!(
                    "template '{name}' fails its identity check: max deviation {defect:.3e}"
                )));
            }
        }
        Ok(())
    }

    fn check_instruction(&self, name: &str, ins: &PulseInstruction<T>) -> Result<()> {
        let amp_norm = ins.amplitude.norm();
        if amp_norm > T::one() + lit::<T>(1e-9) {
            return Err(Error::Calibration(format!(
                "template '{name}': |amplitude| = {amp_norm} exceeds 1"
            )));
        }
        match ins.primitive.axis {
            Axis::Zx => {
                if ins.primitive.qubits.len() != 2 {
                    return Err(Error::Calibration(format!(
                        "template '{name}': ZX primitive needs two qubits"
                    )));
                }
            }
            _ => {
                if ins.primitive.qubits.len() != 1 {
                    return Err(Error::Calibration(format!(
                        "template '{name}': single-axis primitive needs one qubit"
                    )));
                }
            }
        }
        if ins.is_virtual() {
            if ins.duration != 0 || amp_norm > T::zero() {
                return Err(Error::Calibration(format!(
                    "template '{name}': VirtualZ must have zero duration and amplitude"
                )));
            }
        } else {
            // nominal_angle = kappa * Re(amp * e^{i phase}) * duration.
            let kappa = self.kappa_for(&ins.channel)?;
            let predicted =
                kappa * ins.effective_amplitude() * lit::<T>(ins.duration as f64);
            let err = (predicted - ins.primitive.nominal_angle).abs();
            let scale = T::one().max(ins.primitive.nominal_angle.abs());
            if err > lit::<T>(TEMPLATE_TOL) * scale {
                return Err(Error::Calibration(format!(
                    "template '{name}': nominal angle {} disagrees with kappa*amp*duration {}",
                    ins.primitive.nominal_angle, predicted
                )));
            }
        }
        Ok(())
    }
}

/// Reads and validates a calibration file.
pub fn load_calibration<T: Scalar>(path: &std::path::Path) -> Result<CalibrationConfig<T>> {
    CalibrationConfig::from_json(&std::fs::read_to_string(path)?)
}

/// Noise-free product of a template's primitives over its role qubits.
fn template_product<T: Scalar>(
    template: &[PulseInstruction<T>],
) -> Result<(crate::linalg::CMat<T>, usize)> {
    let n = template
        .iter()
        .flat_map(|i| i.primitive.qubits.iter().map(|q| q.0))
        .max()
        .map_or(1, |m| m + 1);
    let mut circ = Circuit::new(n);
    let mut sorted = template.to_vec();
    sorted.sort_by(|a, b| (a.t0, a.end(), a.channel).cmp(&(b.t0, b.end(), b.channel)));
    for ins in &sorted {
        circ.push(primitive_gate(&ins.primitive));
    }
    Ok((crate::circuit::unitary_of_circuit(&circ)?, n))
}

/// Rotation gate equivalent of a primitive, for oracle products.
pub fn primitive_gate<T: Scalar>(p: &Primitive<T>) -> Gate<T> {
    match p.axis {
        Axis::X => Gate::rx(p.nominal_angle, p.qubits[0].0),
        Axis::Z => Gate::rz(p.nominal_angle, p.qubits[0].0),
        Axis::Zx => Gate::rzx(p.nominal_angle, p.qubits[0].0, p.qubits[1].0),
    }
}

fn worst_deviation<T: Scalar>(a: &crate::linalg::CMat<T>, b: &crate::linalg::CMat<T>) -> f64 {
    // Phase-align on the largest entry before measuring, so a pure global
    // phase reports zero.
    let mut best = (T::zero(), (0, 0));
    for ((r, c), v) in a.indexed_iter() {
        if v.norm() > best.0 {
            best = (v.norm(), (r, c));
        }
    }
    let pa = a[best.1];
    let pb = b[best.1];
    if pa.norm() > T::zero() && pb.norm() > T::zero() {
        let phase = (pb / pb.norm()) * (pa.conj() / pa.norm());
        let aligned = a.mapv(|z| z * phase);
        crate::linalg::max_abs_diff(&aligned, b).to_f64().unwrap_or(f64::NAN)
    } else {
        crate::linalg::max_abs_diff(a, b).to_f64().unwrap_or(f64::NAN)
    }
}

/// Instantiates a template onto concrete qubits. `roles[i]` is the physical
/// qubit for abstract role i; amplitudes are rescaled so the angle law holds
/// under the concrete channel's kappa, and `scale` multiplies every angle
/// (how RX(theta) reuses the pi template).
fn instantiate<T: Scalar>(
    template: &[PulseInstruction<T>],
    roles: &[usize],
    scale: T,
    cal: &CalibrationConfig<T>,
    gate_ref: Gate<T>,
) -> Result<PulseSchedule<T>> {
    let mut out = Vec::with_capacity(template.len());
    for ins in template {
        let channel = match ins.channel.kind {
            ChannelKind::Drive => {
                let role = ins.channel.index;
                let q = *roles.get(role).ok_or_else(|| {
                    Error::Calibration(format!("template drive role {role} has no operand"))
                })?;
                Channel::drive(q)
            }
            ChannelKind::Control => {
                if roles.len() != 2 {
                    return Err(Error::Calibration(
                        "control channels need a (control, target) pair".into(),
                    ));
                }
                Channel::control(cal.binding_for(roles[0], roles[1])?.index)
            }
        };
        let qubits: Vec<QubitId> = ins
            .primitive
            .qubits
            .iter()
            .map(|q| {
                roles
                    .get(q.0)
                    .map(|&phys| QubitId(phys))
                    .ok_or_else(|| Error::Calibration(format!("template role {q} unbound")))
            })
            .collect::<Result<_>>()?;
        let nominal = ins.primitive.nominal_angle * scale;
        let amplitude = if ins.is_virtual() || ins.duration == 0 {
            ins.amplitude
        } else {
            let kappa = cal.kappa_for(&channel)?;
            let want = nominal / (kappa * lit::<T>(ins.duration as f64));
            let have = ins.effective_amplitude();
            if have.abs() < lit::<T>(1e-12) {
                return Err(Error::Calibration(
                    "template pulse has zero effective amplitude".into(),
                ));
            }
            let amp = ins.amplitude * Complex::from(want / have);
            if amp.norm() > T::one() + lit::<T>(1e-9) {
                return Err(Error::Calibration(format!(
                    "instantiated amplitude {} exceeds 1 on {channel}",
                    amp.norm()
                )));
            }
            amp
        };
        out.push(PulseInstruction {
            channel,
            t0: ins.t0,
            duration: ins.duration,
            amplitude,
            phase: ins.phase,
            shape: ins.shape,
            primitive: Primitive {
                axis: ins.primitive.axis,
                qubits,
                nominal_angle: nominal,
            },
        });
    }
    PulseSchedule::new(out, gate_ref)
}

/// Builds the pulse realization of one post-pipeline basis gate. Standard
/// variants instantiate the calibration template (RZ is a lone VirtualZ);
/// Inverse variants return the inverted standard schedule.
pub fn schedule_for_gate<T: Scalar>(
    g: &Gate<T>,
    cal: &CalibrationConfig<T>,
) -> Result<PulseSchedule<T>> {
    if g.variant == Variant::Inverse {
        let mut std_gate = g.clone();
        std_gate.variant = Variant::Standard;
        return Ok(invert_schedule(&schedule_for_gate(&std_gate, cal)?));
    }
    let pi = T::PI();
    match &g.kind {
        GateKind::Rz(theta) => {
            let q = g.qubits[0].0;
            let ins = PulseInstruction {
                channel: Channel::drive(q),
                t0: 0,
                duration: 0,
                amplitude: Complex::new(T::zero(), T::zero()),
                phase: T::zero(),
                shape: PulseShape::VirtualZ,
                primitive: Primitive {
                    axis: Axis::Z,
                    qubits: vec![QubitId(q)],
                    nominal_angle: *theta,
                },
            };
            PulseSchedule::new(vec![ins], g.clone())
        }
        GateKind::Rx(theta) => from_rx_family(g, cal, None, *theta / pi),
        GateKind::X => from_rx_family(g, cal, Some("x"), T::one()),
        GateKind::Sx => from_rx_family(g, cal, Some("sx"), lit::<T>(0.5)),
        GateKind::Cx => {
            let template = cal
                .templates
                .get("cx")
                .ok_or_else(|| Error::Calibration("no 'cx' template".into()))?;
            instantiate(template, &[g.qubits[0].0, g.qubits[1].0], T::one(), cal, g.clone())
        }
        other => Err(Error::unsupported(other.name(), "pulse lowering (basis is rz/rx/sx/x/cx)")),
    }
}

fn from_rx_family<T: Scalar>(
    g: &Gate<T>,
    cal: &CalibrationConfig<T>,
    dedicated: Option<&str>,
    scale_from_rx: T,
) -> Result<PulseSchedule<T>> {
    // A gate-specific template (e.g. "sx") wins unscaled; otherwise the pi
    // reference "rx" template is amplitude-scaled to the requested angle.
    if let Some(template) = dedicated.and_then(|name| cal.templates.get(name)) {
        return instantiate(template, &[g.qubits[0].0], T::one(), cal, g.clone());
    }
    let template = cal
        .templates
        .get("rx")
        .ok_or_else(|| Error::Calibration("no 'rx' template".into()))?;
    instantiate(template, &[g.qubits[0].0], scale_from_rx, cal, g.clone())
}

/// Hidden-inverse construction: reverse the instruction sequence (re-timed
/// from zero over the same total duration), negate every non-virtual
/// amplitude, negate VirtualZ frame angles, negate every nominal angle.
/// Noise-free this is exactly the adjoint schedule; an involution up to
/// nothing at all, since timing is mirrored within a fixed span.
pub fn invert_schedule<T: Scalar>(s: &PulseSchedule<T>) -> PulseSchedule<T> {
    let total = s.total_duration();
    let instructions: Vec<PulseInstruction<T>> = s
        .instructions
        .iter()
        .map(|ins| {
            let mut out = ins.clone();
            out.t0 = total - ins.t0 - ins.duration;
            if !ins.is_virtual() {
                out.amplitude = -ins.amplitude;
            }
            out.primitive.nominal_angle = -ins.primitive.nominal_angle;
            out
        })
        .collect();
    let mut gate_ref = s.gate_ref.clone();
    gate_ref.variant = match gate_ref.variant {
        Variant::Standard => Variant::Inverse,
        Variant::Inverse => Variant::Standard,
    };
    PulseSchedule::new(instructions, gate_ref)
        .expect("mirrored timing cannot introduce overlaps")
}

/// Time-ordered primitive rotations of a schedule.
pub fn schedule_to_primitives<T: Scalar>(s: &PulseSchedule<T>) -> Vec<Primitive<T>> {
    s.instructions.iter().map(|i| i.primitive.clone()).collect()
}

/// One schedule per gate, in circuit order. Inverse-variant gates come back
/// as inverted schedules.
pub fn circuit_to_schedule<T: Scalar>(
    c: &Circuit<T>,
    cal: &CalibrationConfig<T>,
) -> Result<Vec<PulseSchedule<T>>> {
    c.validate()?;
    c.gates.iter().map(|g| schedule_for_gate(g, cal)).collect()
}
