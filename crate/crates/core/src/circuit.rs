//! Gate-level intermediate representation and its dense matrix oracle.
//!
//! Conventions, fixed once here and relied on everywhere else:
//!
//! * little-endian basis ordering: qubit 0 is the least significant bit of a
//!   basis index, so `|q1 q0> = |01>` means qubit 0 is set;
//! * `RZ(theta) = exp(-i theta Z / 2)` (traceless), while `Phase(theta) =
//!   diag(1, e^{i theta})` carries the extra global phase `e^{i theta/2}`;
//! * controlled gates list controls first, target last, and `CRZ` applies
//!   `RZ(theta)` on the target conditioned on the control;
//! * the `variant` flag never changes a gate's ideal unitary. It selects the
//!   pulse realization (standard or time-reversed, amplitude-negated) and is
//!   only legal on self-adjoint gates, where both realizations implement the
//!   same operator.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, cis, cr, CMat, Unitary2};
use crate::scalar::{lit, Scalar};

/// Statevector simulation refuses circuits wider than this.
pub const MAX_QUBITS: usize = 24;
/// The dense oracle path refuses circuits wider than this.
pub const MAX_ORACLE_QUBITS: usize = 12;

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QubitId(pub usize);

impl std::fmt::Display for QubitId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "q{}", self.0)
    }
}

/// Pulse realization selector. `Inverse` asks the pulse stage to play the
/// time-reversed, amplitude-negated schedule of the standard realization.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    Standard,
    Inverse,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GateKind<T> {
    X,
    Sx,
    H,
    Rx(T),
    Ry(T),
    Rz(T),
    Phase(T),
    Cx,
    Crz(T),
    CPhase(T),
    /// `exp(-i theta ZX / 2)` with Z on the first operand (the control of the
    /// underlying cross-resonance drive) and X on the second.
    Rzx(T),
    /// Multi-controlled single-qubit unitary; operand list is controls then
    /// target, and the number of controls may be zero.
    Mcu(Unitary2<T>),
    /// Scheduling hint; contributes the identity.
    Barrier,
}

impl<T: Scalar> GateKind<T> {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::Sx => "sx",
            GateKind::H => "h",
            GateKind::Rx(_) => "rx",
            GateKind::Ry(_) => "ry",
            GateKind::Rz(_) => "rz",
            GateKind::Phase(_) => "phase",
            GateKind::Cx => "cx",
            GateKind::Crz(_) => "crz",
            GateKind::CPhase(_) => "cphase",
            GateKind::Rzx(_) => "rzx",
            GateKind::Mcu(_) => "mcu",
            GateKind::Barrier => "barrier",
        }
    }

    fn params(&self) -> Vec<T> {
        match self {
            GateKind::Rx(t)
            | GateKind::Ry(t)
            | GateKind::Rz(t)
            | GateKind::Phase(t)
            | GateKind::Crz(t)
            | GateKind::CPhase(t)
            | GateKind::Rzx(t) => vec![*t],
            GateKind::Mcu(u) => {
                let mut out = Vec::with_capacity(8);
                for row in &u.m {
                    for z in row {
                        out.push(z.re);
                        out.push(z.im);
                    }
                }
                out
            }
            _ => Vec::new(),
        }
    }

    /// Required operand count; `None` when variable (mcu, barrier).
    fn arity(&self) -> Option<usize> {
        match self {
            GateKind::X
            | GateKind::Sx
            | GateKind::H
            | GateKind::Rx(_)
            | GateKind::Ry(_)
            | GateKind::Rz(_)
            | GateKind::Phase(_) => Some(1),
            GateKind::Cx | GateKind::Crz(_) | GateKind::CPhase(_) | GateKind::Rzx(_) => Some(2),
            GateKind::Mcu(_) | GateKind::Barrier => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", into = "GateJson<T>", try_from = "GateJson<T>")]
pub struct Gate<T: Scalar> {
    pub kind: GateKind<T>,
    pub qubits: Vec<QubitId>,
    pub variant: Variant,
    /// Links the two members of a hidden-inverse pair; the `Inverse` member
    /// always appears after its `Standard` partner.
    pub pair_id: Option<u64>,
}

impl<T: Scalar> Gate<T> {
    pub fn new(kind: GateKind<T>, qubits: Vec<QubitId>) -> Self {
        Gate {
            kind,
            qubits,
            variant: Variant::Standard,
            pair_id: None,
        }
    }

    pub fn x(q: usize) -> Self {
        Gate::new(GateKind::X, vec![QubitId(q)])
    }

    pub fn sx(q: usize) -> Self {
        Gate::new(GateKind::Sx, vec![QubitId(q)])
    }

    pub fn h(q: usize) -> Self {
        Gate::new(GateKind::H, vec![QubitId(q)])
    }

    pub fn rx(theta: T, q: usize) -> Self {
        Gate::new(GateKind::Rx(theta), vec![QubitId(q)])
    }

    pub fn ry(theta: T, q: usize) -> Self {
        Gate::new(GateKind::Ry(theta), vec![QubitId(q)])
    }

    pub fn rz(theta: T, q: usize) -> Self {
        Gate::new(GateKind::Rz(theta), vec![QubitId(q)])
    }

    pub fn phase(theta: T, q: usize) -> Self {
        Gate::new(GateKind::Phase(theta), vec![QubitId(q)])
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Gate::new(GateKind::Cx, vec![QubitId(control), QubitId(target)])
    }

    pub fn crz(theta: T, control: usize, target: usize) -> Self {
        Gate::new(GateKind::Crz(theta), vec![QubitId(control), QubitId(target)])
    }

    pub fn cphase(theta: T, control: usize, target: usize) -> Self {
        Gate::new(
            GateKind::CPhase(theta),
            vec![QubitId(control), QubitId(target)],
        )
    }

    pub fn rzx(theta: T, control: usize, target: usize) -> Self {
        Gate::new(GateKind::Rzx(theta), vec![QubitId(control), QubitId(target)])
    }

    pub fn mcu(unitary: Unitary2<T>, controls: &[usize], target: usize) -> Self {
        let mut qs: Vec<QubitId> = controls.iter().map(|&q| QubitId(q)).collect();
        qs.push(QubitId(target));
        Gate::new(GateKind::Mcu(unitary), qs)
    }

    pub fn barrier(qubits: &[usize]) -> Self {
        Gate::new(GateKind::Barrier, qubits.iter().map(|&q| QubitId(q)).collect())
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_pair(mut self, pair_id: u64) -> Self {
        self.pair_id = Some(pair_id);
        self
    }

    pub fn touches(&self, q: QubitId) -> bool {
        // An operand-free barrier is register-wide and touches everything.
        if matches!(self.kind, GateKind::Barrier) && self.qubits.is_empty() {
            return true;
        }
        self.qubits.contains(&q)
    }

    /// Whether the ideal operator equals its own adjoint, making an inverse
    /// pulse realization a legal stand-in for the standard one.
    pub fn is_self_adjoint(&self) -> bool {
        match &self.kind {
            GateKind::X | GateKind::H | GateKind::Cx => true,
            GateKind::Mcu(u) => u.is_self_adjoint(T::validation_tol()),
            _ => false,
        }
    }
}

/// Serialization schema: `kind` is a lowercase string, `params` holds the
/// rotation angle (or the row-major `[re, im]` pairs of an mcu target).
#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct GateJson<T: Scalar> {
    kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    params: Vec<T>,
    qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "is_standard")]
    variant: Variant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pair_id: Option<u64>,
}

fn is_standard(v: &Variant) -> bool {
    *v == Variant::Standard
}

impl<T: Scalar> From<Gate<T>> for GateJson<T> {
    fn from(g: Gate<T>) -> Self {
        GateJson {
            kind: g.kind.name().to_string(),
            params: g.kind.params(),
            qubits: g.qubits.iter().map(|q| q.0).collect(),
            variant: g.variant,
            pair_id: g.pair_id,
        }
    }
}

impl<T: Scalar> TryFrom<GateJson<T>> for Gate<T> {
    type Error = Error;

    fn try_from(j: GateJson<T>) -> Result<Self> {
        let one_param = |params: &[T]| -> Result<T> {
            if params.len() == 1 {
                Ok(params[0])
            } else {
                Err(Error::validation(format!(
                    "expected exactly one parameter, got {}",
                    params.len()
                )))
            }
        };
        let kind = match j.kind.as_str() {
            "x" => GateKind::X,
            "sx" => GateKind::Sx,
            "h" => GateKind::H,
            "rx" => GateKind::Rx(one_param(&j.params)?),
            "ry" => GateKind::Ry(one_param(&j.params)?),
            "rz" => GateKind::Rz(one_param(&j.params)?),
            "phase" => GateKind::Phase(one_param(&j.params)?),
            "cx" => GateKind::Cx,
            "crz" => GateKind::Crz(one_param(&j.params)?),
            "cphase" => GateKind::CPhase(one_param(&j.params)?),
            "rzx" => GateKind::Rzx(one_param(&j.params)?),
            "mcu" => {
                if j.params.len() != 8 {
                    return Err(Error::validation(format!(
                        "mcu expects 8 parameters (row-major re/im pairs), got {}",
                        j.params.len()
                    )));
                }
                let p = &j.params;
                GateKind::Mcu(Unitary2::new(
                    num_complex::Complex::new(p[0], p[1]),
                    num_complex::Complex::new(p[2], p[3]),
                    num_complex::Complex::new(p[4], p[5]),
                    num_complex::Complex::new(p[6], p[7]),
                ))
            }
            "barrier" => GateKind::Barrier,
            other => {
                return Err(Error::unsupported(other, "gate deserialization"));
            }
        };
        Ok(Gate {
            kind,
            qubits: j.qubits.into_iter().map(QubitId).collect(),
            variant: j.variant,
            pair_id: j.pair_id,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Circuit<T: Scalar> {
    pub n_qubits: usize,
    pub gates: Vec<Gate<T>>,
}

impl<T: Scalar> Circuit<T> {
    pub fn new(n_qubits: usize) -> Self {
        Circuit {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn push(&mut self, gate: Gate<T>) {
        self.gates.push(gate);
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate<T>>) {
        self.gates.extend(gates);
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Circuit<T> = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    /// Largest pair id present, for seeding fresh allocations.
    pub fn max_pair_id(&self) -> Option<u64> {
        self.gates.iter().filter_map(|g| g.pair_id).max()
    }

    /// Structural well-formedness: operand ranges, arities, parameter
    /// finiteness, variant legality, and pair annotation soundness.
    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return Err(Error::validation(format!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {}",
                self.n_qubits
            )));
        }
        for (idx, g) in self.gates.iter().enumerate() {
            let ctx = |msg: String| Error::validation(format!("gate {idx} ({}): {msg}", g.kind.name()));
            if let Some(arity) = g.kind.arity() {
                if g.qubits.len() != arity {
                    return Err(ctx(format!(
                        "expected {arity} operands, got {}",
                        g.qubits.len()
                    )));
                }
            }
            if matches!(g.kind, GateKind::Mcu(_)) && g.qubits.is_empty() {
                return Err(ctx("mcu needs at least a target operand".into()));
            }
            for q in &g.qubits {
                if q.0 >= self.n_qubits {
                    return Err(ctx(format!("operand {q} out of range")));
                }
            }
            for (a, qa) in g.qubits.iter().enumerate() {
                if g.qubits[a + 1..].contains(qa) {
                    return Err(ctx(format!("duplicate operand {qa}")));
                }
            }
            for p in g.kind.params() {
                if !p.is_finite() {
                    return Err(ctx("non-finite parameter".into()));
                }
            }
            if let GateKind::Mcu(u) = &g.kind {
                if !u.is_unitary(T::validation_tol()) {
                    return Err(ctx("target matrix is not unitary".into()));
                }
            }
            if g.variant == Variant::Inverse && !g.is_self_adjoint() {
                return Err(ctx(
                    "inverse realization is only legal for self-adjoint gates".into(),
                ));
            }
        }
        self.check_pairs()
    }

    /// Every pair id occurs exactly twice, on gates of the same kind and
    /// identical operand lists, with the `Standard` member first.
    pub fn check_pairs(&self) -> Result<()> {
        let mut by_id: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (idx, g) in self.gates.iter().enumerate() {
            if let Some(id) = g.pair_id {
                by_id.entry(id).or_default().push(idx);
            }
        }
        for (id, members) in by_id {
            if members.len() != 2 {
                return Err(Error::validation(format!(
                    "pair {id} has {} members, expected 2",
                    members.len()
                )));
            }
            let a = &self.gates[members[0]];
            let b = &self.gates[members[1]];
            if a.kind.name() != b.kind.name() || a.qubits != b.qubits {
                return Err(Error::validation(format!(
                    "pair {id} members disagree on kind or operands"
                )));
            }
            if a.variant != Variant::Standard || b.variant != Variant::Inverse {
                return Err(Error::validation(format!(
                    "pair {id} must be a Standard gate followed by its Inverse partner"
                )));
            }
        }
        Ok(())
    }
}

/// The gate's matrix over its own operands, bit `j` of the local index being
/// operand `j`. Shared by the oracle and (for two-operand gates) the kernels.
pub(crate) fn local_matrix<T: Scalar>(g: &Gate<T>) -> Result<CMat<T>> {
    let two = lit::<T>(2.0);
    Ok(match &g.kind {
        GateKind::X => Unitary2::x().to_mat(),
        GateKind::Sx => Unitary2::sx().to_mat(),
        GateKind::H => Unitary2::h().to_mat(),
        GateKind::Rx(t) => Unitary2::rx(*t).to_mat(),
        GateKind::Ry(t) => Unitary2::ry(*t).to_mat(),
        GateKind::Rz(t) => Unitary2::rz(*t).to_mat(),
        GateKind::Phase(t) => Unitary2::phase(*t).to_mat(),
        GateKind::Cx => {
            // Little-endian: control is local bit 0, so |c=1,t> rows swap.
            let mut m = linalg::identity::<T>(4);
            m[(1, 1)] = cr(T::zero());
            m[(3, 3)] = cr(T::zero());
            m[(1, 3)] = cr(T::one());
            m[(3, 1)] = cr(T::one());
            m
        }
        GateKind::Crz(t) => {
            let mut m = linalg::identity::<T>(4);
            m[(1, 1)] = cis(-*t / two);
            m[(3, 3)] = cis(*t / two);
            m
        }
        GateKind::CPhase(t) => {
            let mut m = linalg::identity::<T>(4);
            m[(3, 3)] = cis(*t);
            m
        }
        GateKind::Rzx(t) => {
            // Z eigenvalue on the control picks the X rotation sign on the target.
            let half = *t / two;
            let (s, cth) = half.sin_cos();
            let mut m = linalg::identity::<T>(4);
            for (ctrl, sign) in [(0usize, T::one()), (1usize, -T::one())] {
                let i0 = ctrl; // target bit clear
                let i1 = ctrl | 2; // target bit set
                m[(i0, i0)] = cr(cth);
                m[(i1, i1)] = cr(cth);
                m[(i0, i1)] = c::<T>(0.0, 0.0) - num_complex::Complex::new(T::zero(), sign * s);
                m[(i1, i0)] = m[(i0, i1)];
            }
            m
        }
        GateKind::Mcu(u) => {
            let m_controls = g.qubits.len() - 1;
            let dim = 1usize << g.qubits.len();
            let mut m = linalg::identity::<T>(dim);
            let all_ones = (1usize << m_controls) - 1;
            let t0 = all_ones;
            let t1 = all_ones | (1 << m_controls);
            m[(t0, t0)] = u.m[0][0];
            m[(t0, t1)] = u.m[0][1];
            m[(t1, t0)] = u.m[1][0];
            m[(t1, t1)] = u.m[1][1];
            m
        }
        GateKind::Barrier => linalg::identity::<T>(1 << g.qubits.len()),
    })
}

/// Dense matrix of one gate embedded in an `n_qubits` register.
///
/// The realization variant is ignored: standard and inverse pulses implement
/// the same ideal operator, and this function is the definition of "ideal".
pub fn unitary_of_gate<T: Scalar>(g: &Gate<T>, n_qubits: usize) -> Result<CMat<T>> {
    if n_qubits > MAX_ORACLE_QUBITS {
        return Err(Error::SimulationBound(format!(
            "dense oracle limited to {MAX_ORACLE_QUBITS} qubits, got {n_qubits}"
        )));
    }
    for q in &g.qubits {
        if q.0 >= n_qubits {
            return Err(Error::validation(format!("operand {q} out of range")));
        }
    }
    if matches!(g.kind, GateKind::Barrier) {
        return Ok(linalg::identity(1 << n_qubits));
    }
    let small = local_matrix(g)?;
    let bits: Vec<usize> = g.qubits.iter().map(|q| q.0).collect();
    Ok(linalg::embed(&small, &bits, n_qubits))
}

/// Dense matrix of a whole circuit: the right-to-left product of its gate
/// matrices, leftmost gate applied first.
pub fn unitary_of_circuit<T: Scalar>(c: &Circuit<T>) -> Result<CMat<T>> {
    c.validate()?;
    if c.n_qubits > MAX_ORACLE_QUBITS {
        return Err(Error::SimulationBound(format!(
            "dense oracle limited to {MAX_ORACLE_QUBITS} qubits, got {}",
            c.n_qubits
        )));
    }
    let mut acc = linalg::identity::<T>(1 << c.n_qubits);
    for g in &c.gates {
        if matches!(g.kind, GateKind::Barrier) {
            continue;
        }
        let u = unitary_of_gate(g, c.n_qubits)?;
        acc = u.dot(&acc);
    }
    Ok(acc)
}

pub use crate::linalg::equal_up_to_global_phase;

/// Exact gate-level inverse of a sequence, in reverse order. Rotation angles
/// negate; `sx` expands to three gates because its adjoint leaves the kind
/// set. Output gates are unannotated.
pub fn adjoint_gates<T: Scalar>(gates: &[Gate<T>]) -> Vec<Gate<T>> {
    let mut out = Vec::with_capacity(gates.len());
    for g in gates.iter().rev() {
        let qs = &g.qubits;
        match &g.kind {
            GateKind::X | GateKind::H | GateKind::Cx | GateKind::Barrier => {
                out.push(Gate::new(g.kind.clone(), qs.clone()));
            }
            GateKind::Sx => {
                // sx' = e^{-i pi/4} rx(-pi/2); the scalar factor is realized
                // exactly by the commuting rz/phase pair.
                let q = qs[0].0;
                out.push(Gate::rx(lit::<T>(-0.5) * T::PI(), q));
                out.push(Gate::rz(lit::<T>(0.5) * T::PI(), q));
                out.push(Gate::phase(lit::<T>(-0.5) * T::PI(), q));
            }
            GateKind::Rx(t) => out.push(Gate::new(GateKind::Rx(-*t), qs.clone())),
            GateKind::Ry(t) => out.push(Gate::new(GateKind::Ry(-*t), qs.clone())),
            GateKind::Rz(t) => out.push(Gate::new(GateKind::Rz(-*t), qs.clone())),
            GateKind::Phase(t) => out.push(Gate::new(GateKind::Phase(-*t), qs.clone())),
            GateKind::Crz(t) => out.push(Gate::new(GateKind::Crz(-*t), qs.clone())),
            GateKind::CPhase(t) => out.push(Gate::new(GateKind::CPhase(-*t), qs.clone())),
            GateKind::Rzx(t) => out.push(Gate::new(GateKind::Rzx(-*t), qs.clone())),
            GateKind::Mcu(u) => out.push(Gate::new(GateKind::Mcu(u.adjoint()), qs.clone())),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{equal_up_to_global_phase, kron, max_abs_diff};
    use num_complex::Complex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_gate(rng: &mut ChaCha8Rng, n: usize) -> Gate<f64> {
        let theta = (rng.gen::<f64>() - 0.5) * 2.0 * std::f64::consts::TAU;
        let q = rng.gen_range(0..n);
        let mut q2 = rng.gen_range(0..n);
        while q2 == q {
            q2 = rng.gen_range(0..n);
        }
        match rng.gen_range(0..11) {
            0 => Gate::x(q),
            1 => Gate::sx(q),
            2 => Gate::h(q),
            3 => Gate::rx(theta, q),
            4 => Gate::ry(theta, q),
            5 => Gate::rz(theta, q),
            6 => Gate::phase(theta, q),
            7 => Gate::cx(q, q2),
            8 => Gate::crz(theta, q, q2),
            9 => Gate::cphase(theta, q, q2),
            _ => Gate::rzx(theta, q, q2),
        }
    }

    #[test]
    fn crz_pi_matrix_is_the_expected_diagonal() {
        // CRZ(pi) on (control 0, target 1): diag(1, e^{-i pi/2}, 1, e^{i pi/2}).
        let g = Gate::crz(std::f64::consts::PI, 0, 1);
        let u = unitary_of_gate(&g, 2).unwrap();
        let expected = [c(1.0, 0.0), c(0.0, -1.0), c(1.0, 0.0), c(0.0, 1.0)];
        for (k, want) in expected.iter().enumerate() {
            assert!((u[(k, k)] - want).norm() < 1e-15, "diag entry {k}");
        }
    }

    #[test]
    fn cx_is_the_little_endian_permutation() {
        // Control on bit 0 swaps |01> and |11> (indices 1 and 3).
        let u = unitary_of_gate(&Gate::<f64>::cx(0, 1), 2).unwrap();
        let mut expected = linalg::identity::<f64>(4);
        expected[(1, 1)] = c(0.0, 0.0);
        expected[(3, 3)] = c(0.0, 0.0);
        expected[(1, 3)] = c(1.0, 0.0);
        expected[(3, 1)] = c(1.0, 0.0);
        assert!(max_abs_diff(&u, &expected) < 1e-15);
    }

    #[test]
    fn rz_and_phase_agree_up_to_global_phase() {
        for &t in &[0.3, -2.0, std::f64::consts::PI] {
            let a = unitary_of_gate(&Gate::rz(t, 0), 1).unwrap();
            let b = unitary_of_gate(&Gate::phase(t, 0), 1).unwrap();
            assert!(equal_up_to_global_phase(&a, &b, 1e-12).unwrap());
            // But not exactly equal: Phase carries e^{i t/2}.
            assert!(max_abs_diff(&a, &b) > 1e-3);
        }
    }

    #[test]
    fn rzx_matches_its_generator() {
        // exp(-i theta/2 Z(x)X) built independently from the Pauli kron.
        let theta = 0.83_f64;
        let g = Gate::rzx(theta, 0, 1);
        let u = unitary_of_gate(&g, 2).unwrap();
        let p = kron(&Unitary2::<f64>::x().to_mat(), &Unitary2::<f64>::z().to_mat());
        let half = theta / 2.0;
        let expected = linalg::identity::<f64>(4).mapv(|z| z * half.cos())
            - p.mapv(|z| z * Complex::new(0.0, half.sin()));
        assert!(max_abs_diff(&u, &expected) < 1e-15);
    }

    #[test]
    fn mcu_places_the_target_block_on_all_ones_controls() {
        let g = Gate::mcu(Unitary2::<f64>::x(), &[0, 1], 2);
        let u = unitary_of_gate(&g, 3).unwrap();
        // |011> <-> |111> (indices 3 and 7); everything else untouched.
        assert!((u[(3, 7)] - c::<f64>(1.0, 0.0)).norm() < 1e-15);
        assert!((u[(7, 3)] - c::<f64>(1.0, 0.0)).norm() < 1e-15);
        for k in [0usize, 1, 2, 4, 5, 6] {
            assert!((u[(k, k)] - c::<f64>(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn every_gate_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let g = random_gate(&mut rng, 3);
            let u = unitary_of_gate(&g, 3).unwrap();
            assert!(
                linalg::is_unitary(&u, 1e-12),
                "{} produced a non-unitary matrix",
                g.kind.name()
            );
        }
    }

    #[test]
    fn variant_flag_never_changes_the_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let g = Gate::<f64>::cx(rng.gen_range(0..2), 2);
            let marked = g.clone().with_variant(Variant::Inverse).with_pair(1);
            let a = unitary_of_gate(&g, 3).unwrap();
            let b = unitary_of_gate(&marked, 3).unwrap();
            // Bit-for-bit: the oracle does not even look at the flag.
            assert_eq!(a, b);
        }
    }

    #[test]
    fn circuit_unitary_composes_right_to_left() {
        let mut c2 = Circuit::new(2);
        c2.push(Gate::h(0));
        c2.push(Gate::cx(0, 1));
        let u = unitary_of_circuit(&c2).unwrap();
        let h = unitary_of_gate(&Gate::<f64>::h(0), 2).unwrap();
        let cx = unitary_of_gate(&Gate::<f64>::cx(0, 1), 2).unwrap();
        assert!(max_abs_diff(&u, &cx.dot(&h)) < 1e-15);
    }

    #[test]
    fn adjoint_gates_invert_the_circuit() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let n = 3;
            let mut circ = Circuit::new(n);
            for _ in 0..8 {
                circ.push(random_gate(&mut rng, n));
            }
            let mut inv = circ.clone();
            inv.gates = adjoint_gates(&circ.gates);
            let u = unitary_of_circuit(&circ).unwrap();
            let v = unitary_of_circuit(&inv).unwrap();
            let prod = v.dot(&u);
            assert!(max_abs_diff(&prod, &linalg::identity(1 << n)) < 1e-12);
        }
    }

    #[test]
    fn json_round_trip_preserves_annotations() {
        let mut circ = Circuit::new(3);
        circ.push(Gate::h(0));
        circ.push(Gate::cx(0, 1).with_pair(7));
        circ.push(Gate::rz(0.25, 1));
        circ.push(Gate::cx(0, 1).with_variant(Variant::Inverse).with_pair(7));
        circ.push(Gate::mcu(Unitary2::sx(), &[0, 1], 2));
        let text = circ.to_json().unwrap();
        let back: Circuit<f64> = Circuit::from_json(&text).unwrap();
        assert_eq!(circ, back);
    }

    #[test]
    fn validation_rejects_malformed_circuits() {
        // Operand out of range.
        let mut circ = Circuit::<f64>::new(1);
        circ.push(Gate::cx(0, 1));
        assert!(circ.validate().is_err());

        // Duplicate operands.
        let mut circ = Circuit::<f64>::new(2);
        circ.push(Gate::new(GateKind::Cx, vec![QubitId(0), QubitId(0)]));
        assert!(circ.validate().is_err());

        // Inverse variant on a non-self-adjoint gate.
        let mut circ = Circuit::<f64>::new(1);
        circ.push(Gate::rz(0.2, 0).with_variant(Variant::Inverse));
        assert!(circ.validate().is_err());

        // Non-unitary mcu target.
        let mut circ = Circuit::<f64>::new(1);
        let bogus = Unitary2::new(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        circ.push(Gate::new(GateKind::Mcu(bogus), vec![QubitId(0)]));
        assert!(circ.validate().is_err());

        // Dangling pair.
        let mut circ = Circuit::<f64>::new(2);
        circ.push(Gate::cx(0, 1).with_pair(3));
        assert!(circ.validate().is_err());

        // Pair with Inverse before Standard.
        let mut circ = Circuit::<f64>::new(2);
        circ.push(Gate::cx(0, 1).with_variant(Variant::Inverse).with_pair(3));
        circ.push(Gate::cx(0, 1).with_pair(3));
        assert!(circ.validate().is_err());
    }

    #[test]
    fn oracle_refuses_oversized_registers() {
        let circ = Circuit::<f64>::new(13);
        assert!(matches!(
            unitary_of_circuit(&circ),
            Err(Error::SimulationBound(_))
        ));
    }

    #[test]
    fn works_in_single_precision() {
        let mut circ = Circuit::<f32>::new(2);
        circ.push(Gate::h(0));
        circ.push(Gate::cx(0, 1));
        let u = unitary_of_circuit(&circ).unwrap();
        assert!(linalg::is_unitary(&u, 1e-5));
    }
}
