//! Gate-level lowering: controlled and multi-controlled gates rewritten into
//! the {RZ, RX, SX, X, CX} basis with hidden-inverse pairs marked.
//!
//! Marking discipline: a pass may tag a self-adjoint gate `Variant::Inverse`
//! with a `pair_id` shared with an earlier `Standard` gate of identical kind
//! and operands. Tags never change the ideal unitary; they instruct the pulse
//! stage to play the later member as the time-reversed, amplitude-negated
//! schedule of the earlier one, so the pair's coherent errors cancel.
//!
//! Multi-controlled unitaries follow the ABC construction: `lambda_1` wraps a
//! CX pair around single-qubit factors with `A B C = I` and `A X B X C = W`;
//! `lambda_2` and the recursive `lambda_m` reduce higher control counts via
//! principal square roots and multi-controlled-X blocks. The second X block of
//! every such sandwich is realized as the gate-by-gate adjoint of the first,
//! with mirrored CX members cross-paired.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::{adjoint_gates, Circuit, Gate, GateKind, Variant};
use crate::error::{Error, Result};
use crate::linalg::{cis, Unitary2};
use crate::scalar::{lit, Scalar};

/// Euler factorization `W = e^{i delta} RZ(alpha) RY(theta) RZ(beta)`.
#[derive(Copy, Clone, Debug, Serialize, Deserialize)]
pub struct ZyzAngles<T> {
    pub delta: T,
    pub alpha: T,
    pub theta: T,
    pub beta: T,
}

impl<T: Scalar> ZyzAngles<T> {
    pub fn reconstruct(&self) -> Unitary2<T> {
        Unitary2::rz(self.alpha)
            .mul(&Unitary2::ry(self.theta))
            .mul(&Unitary2::rz(self.beta))
            .scale(cis(self.delta))
    }
}

/// Pass configuration shared by all lowering stages.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct PassConfig {
    /// Mark hidden-inverse pairs; when false every output gate is Standard.
    pub hidden_inverse: bool,
    /// Run the windowed pair-discovery scan after structural lowering.
    pub peephole: bool,
    /// Gate-count window for the pair search; must be at least 1.
    pub max_peephole_window: usize,
}

impl Default for PassConfig {
    fn default() -> Self {
        PassConfig {
            hidden_inverse: true,
            peephole: true,
            max_peephole_window: 32,
        }
    }
}

impl PassConfig {
    /// Baseline compilation: same decompositions, no inverse realizations.
    pub fn standard() -> Self {
        PassConfig {
            hidden_inverse: false,
            peephole: false,
            ..PassConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_peephole_window < 1 {
            return Err(Error::validation("max_peephole_window must be at least 1"));
        }
        Ok(())
    }
}

/// Allocator for pair ids, seeded past any id already present in a circuit.
#[derive(Clone, Debug, Default)]
pub struct PairIdGen {
    next: u64,
}

impl PairIdGen {
    pub fn new() -> Self {
        PairIdGen { next: 0 }
    }

    pub fn from_circuit<T: Scalar>(c: &Circuit<T>) -> Self {
        PairIdGen {
            next: c.max_pair_id().map_or(0, |m| m + 1),
        }
    }

    pub fn fresh(&mut self) -> u64 {
        let id = self.next;
        self.next += 1;
        id
    }
}

fn tiny<T: Scalar>() -> T {
    lit(1e-12)
}

/// Angles below `tiny` are dropped when emitting zyz-derived rotations; the
/// structural CX skeleton of a decomposition is always emitted.
fn push_rz<T: Scalar>(out: &mut Vec<Gate<T>>, theta: T, q: usize) {
    if theta.abs() > tiny() {
        out.push(Gate::rz(theta, q));
    }
}

fn push_phase<T: Scalar>(out: &mut Vec<Gate<T>>, theta: T, q: usize) {
    if theta.abs() > tiny() {
        out.push(Gate::phase(theta, q));
    }
}

/// `RY(theta) = RZ(pi/2) RX(theta) RZ(-pi/2)`, emitted in time order.
fn push_ry<T: Scalar>(out: &mut Vec<Gate<T>>, theta: T, q: usize) {
    if theta.abs() > tiny() {
        let half = T::FRAC_PI_2();
        out.push(Gate::rz(-half, q));
        out.push(Gate::rx(theta, q));
        out.push(Gate::rz(half, q));
    }
}

fn open_cx<T: Scalar>(
    out: &mut Vec<Gate<T>>,
    c: usize,
    t: usize,
    mark: bool,
    gen: &mut PairIdGen,
) -> Option<u64> {
    if mark {
        let id = gen.fresh();
        out.push(Gate::cx(c, t).with_pair(id));
        Some(id)
    } else {
        out.push(Gate::cx(c, t));
        None
    }
}

fn close_cx<T: Scalar>(out: &mut Vec<Gate<T>>, c: usize, t: usize, id: Option<u64>) {
    match id {
        Some(id) => out.push(Gate::cx(c, t).with_variant(Variant::Inverse).with_pair(id)),
        None => out.push(Gate::cx(c, t)),
    }
}

/// `W = e^{i delta} RZ(alpha) RY(theta) RZ(beta)` with `theta in [0, pi]`;
/// the degenerate axes at `theta in {0, pi}` use the `beta = 0` convention.
pub fn zyz_decompose<T: Scalar>(w: &Unitary2<T>) -> Result<ZyzAngles<T>> {
    if !w.is_unitary(T::validation_tol()) {
        return Err(Error::validation("zyz_decompose: input is not unitary"));
    }
    let two = lit::<T>(2.0);
    let delta = w.det().arg() / two;
    let wp = w.scale(cis(-delta));
    let w00 = wp.m[0][0];
    let w10 = wp.m[1][0];
    let theta = two * w10.norm().atan2(w00.norm());
    let (alpha, beta) = if w00.norm() < tiny() {
        (two * w10.arg(), T::zero())
    } else if w10.norm() < tiny() {
        (-two * w00.arg(), T::zero())
    } else {
        // In SU(2): w00 = e^{-i(alpha+beta)/2} cos(theta/2),
        //           w10 = e^{ i(alpha-beta)/2} sin(theta/2).
        let s = -two * w00.arg();
        let d = two * w10.arg();
        ((s + d) / two, (s - d) / two)
    };
    Ok(ZyzAngles {
        delta,
        alpha,
        theta,
        beta,
    })
}

fn emit_crz<T: Scalar>(
    theta: T,
    c: usize,
    t: usize,
    mark: bool,
    gen: &mut PairIdGen,
    out: &mut Vec<Gate<T>>,
) {
    let two = lit::<T>(2.0);
    // On a cleared control both RZ halves cancel; on a set control the X
    // conjugation flips the middle sign and the halves add to RZ(theta).
    out.push(Gate::rz(theta / two, t));
    let id = open_cx(out, c, t, mark, gen);
    out.push(Gate::rz(-theta / two, t));
    close_cx(out, c, t, id);
}

fn emit_cphase<T: Scalar>(
    theta: T,
    c: usize,
    t: usize,
    mark: bool,
    gen: &mut PairIdGen,
    out: &mut Vec<Gate<T>>,
) {
    let two = lit::<T>(2.0);
    out.push(Gate::phase(theta / two, c));
    out.push(Gate::phase(theta / two, t));
    let id = open_cx(out, c, t, mark, gen);
    out.push(Gate::phase(-theta / two, t));
    close_cx(out, c, t, id);
}

fn emit_rzx<T: Scalar>(
    theta: T,
    c: usize,
    t: usize,
    mark: bool,
    gen: &mut PairIdGen,
    out: &mut Vec<Gate<T>>,
) {
    // H on the target turns the X factor into Z; the CX/RZ/CX core is RZZ.
    let h_id = if mark { Some(gen.fresh()) } else { None };
    match h_id {
        Some(id) => out.push(Gate::h(t).with_pair(id)),
        None => out.push(Gate::h(t)),
    }
    let id = open_cx(out, c, t, mark, gen);
    out.push(Gate::rz(theta, t));
    close_cx(out, c, t, id);
    match h_id {
        Some(id) => out.push(Gate::h(t).with_variant(Variant::Inverse).with_pair(id)),
        None => out.push(Gate::h(t)),
    }
}

/// Controlled-W via the ABC sandwich: emits C, CX, B, CX, A on the target and
/// a Phase(delta) on the control that makes the matrix exact.
fn emit_lambda1<T: Scalar>(
    w: &Unitary2<T>,
    c: usize,
    t: usize,
    mark: bool,
    gen: &mut PairIdGen,
    out: &mut Vec<Gate<T>>,
) -> Result<()> {
    let two = lit::<T>(2.0);
    let ang = zyz_decompose(w)?;
    // C = RZ((beta-alpha)/2)
    push_rz(out, (ang.beta - ang.alpha) / two, t);
    let id = open_cx(out, c, t, mark, gen);
    // B = RY(-theta/2) RZ(-(alpha+beta)/2), rightmost factor first in time.
    push_rz(out, -(ang.alpha + ang.beta) / two, t);
    push_ry(out, -ang.theta / two, t);
    close_cx(out, c, t, id);
    // A = RZ(alpha) RY(theta/2)
    push_ry(out, ang.theta / two, t);
    push_rz(out, ang.alpha, t);
    push_phase(out, ang.delta, c);
    Ok(())
}

fn emit_lambda2<T: Scalar>(
    u: &Unitary2<T>,
    c1: usize,
    c2: usize,
    t: usize,
    mark: bool,
    gen: &mut PairIdGen,
    out: &mut Vec<Gate<T>>,
) -> Result<()> {
    let v = u.sqrt_principal();
    emit_lambda1(&v, c2, t, mark, gen, out)?;
    let id = open_cx(out, c1, c2, mark, gen);
    emit_lambda1(&v.adjoint(), c2, t, mark, gen, out)?;
    close_cx(out, c1, c2, id);
    emit_lambda1(&v, c1, t, mark, gen, out)
}

/// Recursive case, `m >= 3` controls: V and V-dagger singly-controlled from
/// the last control, toggled by a multi-controlled-X pair over the rest, then
/// a recursive multi-controlled V.
fn emit_lambda_m<T: Scalar>(
    u: &Unitary2<T>,
    controls: &[usize],
    t: usize,
    mark: bool,
    gen: &mut PairIdGen,
    out: &mut Vec<Gate<T>>,
) -> Result<()> {
    let m = controls.len();
    debug_assert!(m >= 3);
    let v = u.sqrt_principal();
    let last = controls[m - 1];
    emit_lambda1(&v, last, t, mark, gen, out)?;
    // First X block: internal marking suppressed so its CX members stay free
    // to cross-pair with the mirrored second block.
    let start = out.len();
    emit_mcu(&Unitary2::x(), &controls[..m - 1], last, false, gen, out)?;
    let end = out.len();
    emit_lambda1(&v.adjoint(), last, t, mark, gen, out)?;
    let block: Vec<Gate<T>> = out[start..end].to_vec();
    if mark {
        push_mirrored_block(&block, start, gen, out);
    } else {
        out.extend(block);
    }
    emit_mcu(&v, &controls[..m - 1], t, mark, gen, out)
}

/// Appends the gate-by-gate adjoint of `block` (whose copy already sits in
/// `out` at `base..`), cross-pairing each mirrored CX with its source. The
/// appended list realizes the adjoint schedule of the block; since the block
/// implements a self-adjoint operator the ideal value is unchanged.
fn push_mirrored_block<T: Scalar>(
    block: &[Gate<T>],
    base: usize,
    gen: &mut PairIdGen,
    out: &mut Vec<Gate<T>>,
) {
    let mirrored = adjoint_gates(block);
    // Expansions emit only rz/rx/phase/cx, all of which mirror one-to-one.
    debug_assert_eq!(mirrored.len(), block.len());
    let len = block.len();
    for (j, mut mg) in mirrored.into_iter().enumerate() {
        if matches!(mg.kind, GateKind::Cx) {
            let src = base + (len - 1 - j);
            debug_assert!(matches!(out[src].kind, GateKind::Cx));
            let id = gen.fresh();
            out[src].pair_id = Some(id);
            mg.variant = Variant::Inverse;
            mg.pair_id = Some(id);
        }
        out.push(mg);
    }
}

/// Dispatch on control count; `m = 0` is a bare single-qubit synthesis with
/// an exact global-phase correction (`RZ(-2d) Phase(2d) = e^{id} I`).
fn emit_mcu<T: Scalar>(
    u: &Unitary2<T>,
    controls: &[usize],
    t: usize,
    mark: bool,
    gen: &mut PairIdGen,
    out: &mut Vec<Gate<T>>,
) -> Result<()> {
    let two = lit::<T>(2.0);
    match controls.len() {
        0 => {
            let ang = zyz_decompose(u)?;
            push_rz(out, ang.beta, t);
            push_ry(out, ang.theta, t);
            push_rz(out, ang.alpha, t);
            if ang.delta.abs() > tiny() {
                out.push(Gate::rz(-two * ang.delta, t));
                out.push(Gate::phase(two * ang.delta, t));
            }
            Ok(())
        }
        1 => emit_lambda1(u, controls[0], t, mark, gen, out),
        2 => emit_lambda2(u, controls[0], controls[1], t, mark, gen, out),
        _ => emit_lambda_m(u, controls, t, mark, gen, out),
    }
}

fn mcu_operands<T: Scalar>(g: &Gate<T>) -> Result<(&Unitary2<T>, Vec<usize>, usize)> {
    let GateKind::Mcu(u) = &g.kind else {
        return Err(Error::unsupported(g.kind.name(), "expected an mcu gate"));
    };
    if g.qubits.is_empty() {
        return Err(Error::validation("mcu needs at least a target operand"));
    }
    let controls: Vec<usize> = g.qubits[..g.qubits.len() - 1].iter().map(|q| q.0).collect();
    let target = g.qubits[g.qubits.len() - 1].0;
    Ok((u, controls, target))
}

/// `[RZ(t/2) on target, CX, RZ(-t/2) on target, CX]`; the closing CX is the
/// inverse member of a fresh pair when `cfg.hidden_inverse`.
pub fn decompose_crz<T: Scalar>(
    g: &Gate<T>,
    cfg: &PassConfig,
    gen: &mut PairIdGen,
) -> Result<Vec<Gate<T>>> {
    let GateKind::Crz(theta) = g.kind else {
        return Err(Error::unsupported(g.kind.name(), "decompose_crz"));
    };
    let mut out = Vec::with_capacity(4);
    emit_crz(theta, g.qubits[0].0, g.qubits[1].0, cfg.hidden_inverse, gen, &mut out);
    Ok(out)
}

/// As `decompose_crz` plus Phase(t/2) corrections on both operands, making
/// the expansion equal the CPhase matrix exactly rather than up to phase.
pub fn decompose_cphase<T: Scalar>(
    g: &Gate<T>,
    cfg: &PassConfig,
    gen: &mut PairIdGen,
) -> Result<Vec<Gate<T>>> {
    let GateKind::CPhase(theta) = g.kind else {
        return Err(Error::unsupported(g.kind.name(), "decompose_cphase"));
    };
    let mut out = Vec::with_capacity(5);
    emit_cphase(theta, g.qubits[0].0, g.qubits[1].0, cfg.hidden_inverse, gen, &mut out);
    Ok(out)
}

/// Singly-controlled unitary (mcu with one control).
pub fn decompose_lambda1<T: Scalar>(
    g: &Gate<T>,
    cfg: &PassConfig,
    gen: &mut PairIdGen,
) -> Result<Vec<Gate<T>>> {
    let (u, controls, target) = mcu_operands(g)?;
    if controls.len() != 1 {
        return Err(Error::validation(format!(
            "decompose_lambda1 expects one control, got {}",
            controls.len()
        )));
    }
    let mut out = Vec::new();
    emit_lambda1(u, controls[0], target, cfg.hidden_inverse, gen, &mut out)?;
    Ok(out)
}

/// Doubly-controlled unitary via the principal square root.
pub fn decompose_lambda2<T: Scalar>(
    g: &Gate<T>,
    cfg: &PassConfig,
    gen: &mut PairIdGen,
) -> Result<Vec<Gate<T>>> {
    let (u, controls, target) = mcu_operands(g)?;
    if controls.len() != 2 {
        return Err(Error::validation(format!(
            "decompose_lambda2 expects two controls, got {}",
            controls.len()
        )));
    }
    let mut out = Vec::new();
    emit_lambda2(
        u,
        controls[0],
        controls[1],
        target,
        cfg.hidden_inverse,
        gen,
        &mut out,
    )?;
    Ok(out)
}

/// Multi-controlled unitary with at least three controls.
pub fn decompose_lambda_m<T: Scalar>(
    g: &Gate<T>,
    cfg: &PassConfig,
    gen: &mut PairIdGen,
) -> Result<Vec<Gate<T>>> {
    let (u, controls, target) = mcu_operands(g)?;
    if controls.len() < 3 {
        return Err(Error::validation(format!(
            "decompose_lambda_m expects at least three controls, got {}",
            controls.len()
        )));
    }
    let mut out = Vec::new();
    emit_lambda_m(u, &controls, target, cfg.hidden_inverse, gen, &mut out)?;
    Ok(out)
}

/// `H = RZ(pi/2) RX(pi/2) RZ(pi/2)` up to global phase; the Inverse variant
/// negates all three angles, which is exactly the adjoint of the standard
/// triple, so the realization choice survives lowering as a sign flip.
pub fn lower_h<T: Scalar>(g: &Gate<T>) -> Result<Vec<Gate<T>>> {
    if !matches!(g.kind, GateKind::H) {
        return Err(Error::unsupported(g.kind.name(), "lower_h"));
    }
    let q = g.qubits[0].0;
    let a = match g.variant {
        Variant::Standard => T::FRAC_PI_2(),
        Variant::Inverse => -T::FRAC_PI_2(),
    };
    Ok(vec![Gate::rz(a, q), Gate::rx(a, q), Gate::rz(a, q)])
}

/// Windowed pair discovery. Scanning left to right, an unmarked Standard CX
/// on (a, b) pairs with the next unmarked Standard CX on exactly (a, b)
/// within the window, provided every intervening gate touching a or b is a
/// single-qubit gate. H pairs require no intervening gate on the qubit at
/// all. Existing marks are never changed; pairs never overlap. The ideal
/// unitary is untouched (marks are realization hints).
pub fn mark_hidden_inverses_peephole<T: Scalar>(c: &Circuit<T>, cfg: &PassConfig) -> Circuit<T> {
    let mut gates = c.gates.clone();
    let mut gen = PairIdGen::from_circuit(c);
    let n = gates.len();
    for i in 0..n {
        if gates[i].pair_id.is_some() || gates[i].variant != Variant::Standard {
            continue;
        }
        let hi = (i + cfg.max_peephole_window).min(n.saturating_sub(1));
        match gates[i].kind {
            GateKind::Cx => {
                let a = gates[i].qubits[0];
                let b = gates[i].qubits[1];
                for j in i + 1..=hi {
                    let g = &gates[j];
                    if !(g.touches(a) || g.touches(b)) {
                        continue;
                    }
                    let closes = matches!(g.kind, GateKind::Cx)
                        && g.qubits[0] == a
                        && g.qubits[1] == b
                        && g.variant == Variant::Standard
                        && g.pair_id.is_none();
                    if closes {
                        let id = gen.fresh();
                        gates[i].pair_id = Some(id);
                        gates[j].variant = Variant::Inverse;
                        gates[j].pair_id = Some(id);
                        break;
                    }
                    // Single-qubit gates on a or b may sit inside the pair;
                    // anything else touching them (two-qubit gates, barriers,
                    // already-marked CXs) blocks the search.
                    let passes =
                        g.qubits.len() == 1 && !matches!(g.kind, GateKind::Barrier);
                    if !passes {
                        break;
                    }
                }
            }
            GateKind::H => {
                let q = gates[i].qubits[0];
                for j in i + 1..=hi {
                    let g = &gates[j];
                    if !g.touches(q) {
                        continue;
                    }
                    let closes = matches!(g.kind, GateKind::H)
                        && g.variant == Variant::Standard
                        && g.pair_id.is_none();
                    if closes {
                        let id = gen.fresh();
                        gates[i].pair_id = Some(id);
                        gates[j].variant = Variant::Inverse;
                        gates[j].pair_id = Some(id);
                    }
                    break;
                }
            }
            _ => {}
        }
    }
    Circuit {
        n_qubits: c.n_qubits,
        gates,
    }
}

/// Full lowering pipeline. Stages, in order: validate; strip all marks when
/// `hidden_inverse` is off; expand crz/cphase/rzx/ry/mcu (dropping barriers);
/// peephole pair discovery (when enabled); lower H so variant marks become
/// rotation sign flips; lower Phase to RZ. The output alphabet is
/// {RZ, RX, SX, X, CX}; the unitary is preserved up to global phase; running
/// the pipeline twice equals running it once.
pub fn run_pipeline<T: Scalar>(c: &Circuit<T>, cfg: &PassConfig) -> Result<Circuit<T>> {
    cfg.validate()?;
    c.validate()?;
    let mut work = c.clone();
    if !cfg.hidden_inverse {
        for g in &mut work.gates {
            g.variant = Variant::Standard;
            g.pair_id = None;
        }
    }

    let mut gen = PairIdGen::from_circuit(&work);
    let mut out: Vec<Gate<T>> = Vec::new();
    // Standard members of mcu pairs, by id: their expansion ranges in `out`,
    // held for cross-pairing when the Inverse member arrives.
    let mut mcu_blocks: BTreeMap<u64, (usize, usize)> = BTreeMap::new();
    for g in &work.gates {
        match &g.kind {
            GateKind::X
            | GateKind::Sx
            | GateKind::H
            | GateKind::Rx(_)
            | GateKind::Rz(_)
            | GateKind::Phase(_)
            | GateKind::Cx => out.push(g.clone()),
            GateKind::Barrier => {}
            GateKind::Ry(t) => push_ry(&mut out, *t, g.qubits[0].0),
            GateKind::Crz(t) => emit_crz(
                *t,
                g.qubits[0].0,
                g.qubits[1].0,
                cfg.hidden_inverse,
                &mut gen,
                &mut out,
            ),
            GateKind::CPhase(t) => emit_cphase(
                *t,
                g.qubits[0].0,
                g.qubits[1].0,
                cfg.hidden_inverse,
                &mut gen,
                &mut out,
            ),
            GateKind::Rzx(t) => emit_rzx(
                *t,
                g.qubits[0].0,
                g.qubits[1].0,
                cfg.hidden_inverse,
                &mut gen,
                &mut out,
            ),
            GateKind::Mcu(u) => {
                let controls: Vec<usize> =
                    g.qubits[..g.qubits.len() - 1].iter().map(|q| q.0).collect();
                let target = g.qubits[g.qubits.len() - 1].0;
                match (g.variant, g.pair_id) {
                    (Variant::Standard, Some(id)) => {
                        // Pair opener: expand without internal marks so its
                        // gates stay free to cross-pair with the mirror.
                        let start = out.len();
                        emit_mcu(u, &controls, target, false, &mut gen, &mut out)?;
                        mcu_blocks.insert(id, (start, out.len()));
                    }
                    (Variant::Standard, None) => {
                        emit_mcu(u, &controls, target, cfg.hidden_inverse, &mut gen, &mut out)?;
                    }
                    (Variant::Inverse, id) => {
                        match id.and_then(|id| mcu_blocks.remove(&id)) {
                            Some((s, e)) => {
                                let block = out[s..e].to_vec();
                                push_mirrored_block(&block, s, &mut gen, &mut out);
                            }
                            None => {
                                // Unpaired inverse request: mirror a fresh
                                // standard expansion; its inverse marks stay
                                // unpaired, matching the input's intent.
                                let mut scratch = Vec::new();
                                emit_mcu(u, &controls, target, false, &mut gen, &mut scratch)?;
                                for mut mg in adjoint_gates(&scratch) {
                                    if matches!(mg.kind, GateKind::Cx) {
                                        mg.variant = Variant::Inverse;
                                    }
                                    out.push(mg);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    let mut lowered = Circuit {
        n_qubits: work.n_qubits,
        gates: out,
    };
    if cfg.hidden_inverse && cfg.peephole {
        lowered = mark_hidden_inverses_peephole(&lowered, cfg);
    }

    let mut final_gates = Vec::with_capacity(lowered.gates.len());
    for g in lowered.gates {
        match g.kind {
            GateKind::H => final_gates.extend(lower_h(&g)?),
            GateKind::Phase(t) => final_gates.push(Gate::rz(t, g.qubits[0].0)),
            _ => final_gates.push(g),
        }
    }
    let result = Circuit {
        n_qubits: work.n_qubits,
        gates: final_gates,
    };
    result.validate()?;
    Ok(result)
}
