//! Benchmark circuit generators with hidden-inverse opportunities annotated
//! at creation time.
//!
//! The central building block is the Pauli-string exponential: basis changes
//! into the Z frame, a CX parity ladder onto the highest active qubit, one RZ
//! carrying the whole angle, and the mirrored ladder and basis changes back.
//! Every mirrored CX and H is the hidden inverse of its left partner, so the
//! generators emit pairs structurally instead of relying on later discovery.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{adjoint_gates, Circuit, Gate, QubitId, Variant};
use crate::decompose::{decompose_crz, PairIdGen, PassConfig};
use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pauli {
    X,
    Y,
    Z,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliOp {
    pub qubit: QubitId,
    pub pauli: Pauli,
}

/// Tensor product of single-qubit Paulis (identity qubits omitted), weighted
/// by a coefficient that multiplies the rotation angle at synthesis time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PauliString<T> {
    pub ops: Vec<PauliOp>,
    pub coefficient: T,
}

impl<T: Scalar> PauliString<T> {
    pub fn new(ops: &[(usize, Pauli)], coefficient: T) -> Self {
        PauliString {
            ops: ops
                .iter()
                .map(|&(q, pauli)| PauliOp {
                    qubit: QubitId(q),
                    pauli,
                })
                .collect(),
            coefficient,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ops.is_empty() {
            return Err(Error::validation(
                "a Pauli string needs at least one non-identity operator",
            ));
        }
        for (i, op) in self.ops.iter().enumerate() {
            if self.ops[i + 1..].iter().any(|o| o.qubit == op.qubit) {
                return Err(Error::validation(format!(
                    "duplicate qubit {} in Pauli string",
                    op.qubit
                )));
            }
        }
        Ok(())
    }
}

/// Appends `exp(-i (coefficient * theta) / 2 * P)` to `circ`, marking each
/// mirrored CX and H as the hidden inverse of its left partner.
fn append_pauli_string<T: Scalar>(
    circ: &mut Circuit<T>,
    p: &PauliString<T>,
    theta: T,
    gen: &mut PairIdGen,
) -> Result<()> {
    p.validate()?;
    let mut active: Vec<(usize, Pauli)> = p.ops.iter().map(|o| (o.qubit.0, o.pauli)).collect();
    active.sort_by_key(|&(q, _)| q);
    let angle = p.coefficient * theta;

    // Basis changes into the Z frame, ascending qubit order. H pairs are
    // recorded for mirror marking; RX(pi/2) is undone by RX(-pi/2) unmarked.
    let mut h_pairs: Vec<(usize, u64)> = Vec::new();
    for &(q, pauli) in &active {
        match pauli {
            Pauli::X => {
                let id = gen.fresh();
                circ.push(Gate::h(q).with_pair(id));
                h_pairs.push((q, id));
            }
            Pauli::Y => circ.push(Gate::rx(T::FRAC_PI_2(), q)),
            Pauli::Z => {}
        }
    }

    // Parity ladder onto the highest active qubit.
    let chain: Vec<usize> = active.iter().map(|&(q, _)| q).collect();
    let mut cx_pairs: Vec<u64> = Vec::new();
    for w in chain.windows(2) {
        let id = gen.fresh();
        circ.push(Gate::cx(w[0], w[1]).with_pair(id));
        cx_pairs.push(id);
    }

    circ.push(Gate::rz(angle, *chain.last().unwrap()));

    // Mirrored ladder, reversed, each CX the inverse member of its pair.
    for (w, id) in chain.windows(2).zip(cx_pairs).rev() {
        circ.push(
            Gate::cx(w[0], w[1])
                .with_variant(Variant::Inverse)
                .with_pair(id),
        );
    }

    // Inverse basis changes, descending qubit order.
    for &(q, pauli) in active.iter().rev() {
        match pauli {
            Pauli::X => {
                let id = h_pairs
                    .iter()
                    .find(|&&(hq, _)| hq == q)
                    .expect("opening H recorded")
                    .1;
                circ.push(Gate::h(q).with_variant(Variant::Inverse).with_pair(id));
            }
            Pauli::Y => circ.push(Gate::rx(-T::FRAC_PI_2(), q)),
            Pauli::Z => {}
        }
    }
    Ok(())
}

/// Circuit for `exp(-i (coefficient * theta) / 2 * P)` over the smallest
/// register containing the string.
pub fn pauli_string_circuit<T: Scalar>(p: &PauliString<T>, theta: T) -> Result<Circuit<T>> {
    p.validate()?;
    let n = p.ops.iter().map(|o| o.qubit.0).max().unwrap() + 1;
    let mut circ = Circuit::new(n);
    let mut gen = PairIdGen::new();
    append_pauli_string(&mut circ, p, theta, &mut gen)?;
    Ok(circ)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinModel {
    Ising,
    Xy,
    Heisenberg,
}

impl std::str::FromStr for SpinModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ising" => Ok(SpinModel::Ising),
            "xy" => Ok(SpinModel::Xy),
            "heisenberg" => Ok(SpinModel::Heisenberg),
            other => Err(Error::unsupported(other, "spin model tag")),
        }
    }
}

/// First-order Trotter circuit over a nearest-neighbor chain. Per step,
/// Ising applies ZZ bonds (weight J) then X fields (weight h); XY applies
/// XX+YY per bond; Heisenberg applies XX+YY+ZZ per bond. Each term passes
/// `theta = 2 dt` so the term unitary is `exp(-i J dt P)`.
pub fn trotter_circuit<T: Scalar>(
    model: SpinModel,
    n_qubits: usize,
    j: T,
    h: T,
    steps: usize,
    dt: T,
) -> Result<Circuit<T>> {
    if n_qubits < 2 {
        return Err(Error::validation("trotter chains need at least 2 qubits"));
    }
    if steps < 1 {
        return Err(Error::validation("trotter_steps must be at least 1"));
    }
    let mut circ = Circuit::new(n_qubits);
    let mut gen = PairIdGen::new();
    let theta = lit::<T>(2.0) * dt;
    let two_site = |a: usize, p: Pauli, coeff: T| PauliString::new(&[(a, p), (a + 1, p)], coeff);
    for _ in 0..steps {
        match model {
            SpinModel::Ising => {
                for a in 0..n_qubits - 1 {
                    append_pauli_string(&mut circ, &two_site(a, Pauli::Z, j), theta, &mut gen)?;
                }
                for q in 0..n_qubits {
                    let field = PauliString::new(&[(q, Pauli::X)], h);
                    append_pauli_string(&mut circ, &field, theta, &mut gen)?;
                }
            }
            SpinModel::Xy => {
                for a in 0..n_qubits - 1 {
                    append_pauli_string(&mut circ, &two_site(a, Pauli::X, j), theta, &mut gen)?;
                    append_pauli_string(&mut circ, &two_site(a, Pauli::Y, j), theta, &mut gen)?;
                }
            }
            SpinModel::Heisenberg => {
                for a in 0..n_qubits - 1 {
                    append_pauli_string(&mut circ, &two_site(a, Pauli::X, j), theta, &mut gen)?;
                    append_pauli_string(&mut circ, &two_site(a, Pauli::Y, j), theta, &mut gen)?;
                    append_pauli_string(&mut circ, &two_site(a, Pauli::Z, j), theta, &mut gen)?;
                }
            }
        }
    }
    Ok(circ)
}

/// MaxCut QAOA: H layer, then per round a cost layer (`CX, RZ(2 gamma), CX`
/// per edge, the second CX marked) and an `RX(2 beta)` mixer layer.
pub fn qaoa_maxcut<T: Scalar>(
    n_qubits: usize,
    edges: &[(usize, usize)],
    gamma: &[T],
    beta: &[T],
) -> Result<Circuit<T>> {
    if gamma.len() != beta.len() || gamma.is_empty() {
        return Err(Error::validation(
            "gamma and beta must have the same nonzero round count",
        ));
    }
    for &(u, v) in edges {
        if u == v {
            return Err(Error::validation(format!("self-loop edge ({u}, {u})")));
        }
        if u >= n_qubits || v >= n_qubits {
            return Err(Error::validation(format!(
                "edge ({u}, {v}) outside a {n_qubits}-qubit register"
            )));
        }
    }
    let mut circ = Circuit::new(n_qubits);
    let mut gen = PairIdGen::new();
    let two = lit::<T>(2.0);
    for q in 0..n_qubits {
        circ.push(Gate::h(q));
    }
    for (&g, &b) in gamma.iter().zip(beta) {
        for &(u, v) in edges {
            let id = gen.fresh();
            circ.push(Gate::cx(u, v).with_pair(id));
            circ.push(Gate::rz(two * g, v));
            circ.push(Gate::cx(u, v).with_variant(Variant::Inverse).with_pair(id));
        }
        for q in 0..n_qubits {
            circ.push(Gate::rx(two * b, q));
        }
    }
    Ok(circ)
}

/// Ring graph 0-1-...-(n-1)-0, the default QAOA instance family.
pub fn ring_edges(n_qubits: usize) -> Vec<(usize, usize)> {
    (0..n_qubits).map(|u| (u, (u + 1) % n_qubits)).collect()
}

/// Swapless little-endian QFT over qubits `0..n`: after it, qubit j carries
/// the phase `e^{2 pi i x / 2^{j+1}}` of the input basis state x.
fn qft_gates<T: Scalar>(n: usize) -> Vec<Gate<T>> {
    let mut gates = Vec::new();
    for j in (0..n).rev() {
        gates.push(Gate::h(j));
        for k in (0..j).rev() {
            let angle = T::PI() / lit::<T>((1u64 << (j - k)) as f64);
            gates.push(Gate::cphase(angle, k, j));
        }
    }
    gates
}

/// Draper adder `|x> -> |x + addend mod 2^n>`: QFT, one Phase per qubit, QFT
/// adjoint. Controlled phases stay CPhase gates for the lowering pipeline.
pub fn qft_adder<T: Scalar>(n_bits: usize, addend: u64) -> Result<Circuit<T>> {
    if n_bits < 1 {
        return Err(Error::validation("qft_adder needs at least one bit"));
    }
    if n_bits < 64 && addend >= (1u64 << n_bits) {
        return Err(Error::validation(format!(
            "addend {addend} out of range for {n_bits} bits"
        )));
    }
    let mut circ = Circuit::new(n_bits);
    let fwd = qft_gates::<T>(n_bits);
    circ.extend(fwd.iter().cloned());
    let tau = lit::<T>(2.0) * T::PI();
    for j in 0..n_bits {
        let angle = tau * lit::<T>(addend as f64) / lit::<T>((1u128 << (j + 1)) as f64);
        circ.push(Gate::phase(angle, j));
    }
    circ.extend(adjoint_gates(&fwd));
    Ok(circ)
}

/// Phase estimation of `U = Phase(2 pi phi)` on a target prepared in `|1>`.
/// Counting qubits are `0..n_counting`, the target is qubit `n_counting`;
/// noise-free readout of the counting register is `round(phi * 2^n)` when
/// phi has an exact binary expansion.
pub fn qpe<T: Scalar>(n_counting: usize, phi: T) -> Result<Circuit<T>> {
    if n_counting < 1 {
        return Err(Error::validation("qpe needs at least one counting qubit"));
    }
    if phi < T::zero() || phi >= T::one() {
        return Err(Error::validation("eigenphase must lie in [0, 1)"));
    }
    let target = n_counting;
    let mut circ = Circuit::new(n_counting + 1);
    circ.push(Gate::x(target));
    for q in 0..n_counting {
        circ.push(Gate::h(q));
    }
    let tau = lit::<T>(2.0) * T::PI();
    for j in 0..n_counting {
        // Controlled U^(2^(n-1-j)): kickback e^{2 pi i phi 2^(n-1-j)} matches
        // the QFT image of the value register, so the inverse QFT decodes it.
        let power = lit::<T>((1u64 << (n_counting - 1 - j)) as f64);
        circ.push(Gate::cphase(tau * phi * power, j, target));
    }
    circ.extend(adjoint_gates(&qft_gates::<T>(n_counting)));
    Ok(circ)
}

/// Identity-folding probe: H on both qubits, `n_folds` boxes of
/// `CRZ(theta_k)` then `CRZ(-theta_k)` with angles drawn uniformly from
/// `[0, pi)` by the seed, and H again. Noise-free it returns to `|00>`.
pub fn crz_folding_circuit<T: Scalar>(n_folds: usize, seed: u64) -> Result<Circuit<T>> {
    if n_folds < 1 {
        return Err(Error::validation("n_folds must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut circ = Circuit::new(2);
    circ.push(Gate::h(0));
    circ.push(Gate::h(1));
    for _ in 0..n_folds {
        let theta = lit::<T>(rng.gen::<f64>()) * T::PI();
        circ.push(Gate::crz(theta, 0, 1));
        circ.push(Gate::crz(-theta, 0, 1));
    }
    circ.push(Gate::h(0));
    circ.push(Gate::h(1));
    Ok(circ)
}

/// The folding probe with every CRZ pre-expanded: the first returned circuit
/// uses the standard decomposition throughout, the second marks each
/// expansion's closing CX as a hidden inverse.
pub fn crz_folding_benchmark<T: Scalar>(
    n_folds: usize,
    seed: u64,
) -> Result<(Circuit<T>, Circuit<T>)> {
    let raw = crz_folding_circuit::<T>(n_folds, seed)?;
    let expand = |cfg: &PassConfig| -> Result<Circuit<T>> {
        let mut out = Circuit::new(raw.n_qubits);
        let mut gen = PairIdGen::new();
        for g in &raw.gates {
            match g.kind {
                crate::circuit::GateKind::Crz(_) => {
                    out.extend(decompose_crz(g, cfg, &mut gen)?);
                }
                _ => out.push(g.clone()),
            }
        }
        Ok(out)
    };
    Ok((expand(&PassConfig::standard())?, expand(&PassConfig::default())?))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BenchmarkName {
    #[serde(rename = "qaoa-maxcut")]
    QaoaMaxcut,
    #[serde(rename = "ising")]
    Ising,
    #[serde(rename = "xy")]
    Xy,
    #[serde(rename = "heisenberg")]
    Heisenberg,
    #[serde(rename = "qft-adder")]
    QftAdder,
    #[serde(rename = "qpe")]
    Qpe,
    #[serde(rename = "crz-folding")]
    CrzFolding,
}

impl BenchmarkName {
    pub fn as_str(&self) -> &'static str {
        match self {
            BenchmarkName::QaoaMaxcut => "qaoa-maxcut",
            BenchmarkName::Ising => "ising",
            BenchmarkName::Xy => "xy",
            BenchmarkName::Heisenberg => "heisenberg",
            BenchmarkName::QftAdder => "qft-adder",
            BenchmarkName::Qpe => "qpe",
            BenchmarkName::CrzFolding => "crz-folding",
        }
    }
}

/// Per-benchmark knobs; absent fields take the declared defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", default)]
pub struct BenchmarkParams<T: Scalar> {
    /// QAOA instance graph as [u, v] pairs; default is the ring.
    pub edges: Option<Vec<(usize, usize)>>,
    pub gamma: Option<Vec<T>>,
    pub beta: Option<Vec<T>>,
    /// Spin-model coupling J.
    pub j: Option<T>,
    /// Spin-model transverse field h.
    pub h: Option<T>,
    pub dt: Option<T>,
    /// Folding box count.
    pub n_folds: Option<usize>,
    pub seed: Option<u64>,
    pub eigenphase: Option<T>,
    pub addend: Option<u64>,
}

impl<T: Scalar> Default for BenchmarkParams<T> {
    fn default() -> Self {
        BenchmarkParams {
            edges: None,
            gamma: None,
            beta: None,
            j: None,
            h: None,
            dt: None,
            n_folds: None,
            seed: None,
            eigenphase: None,
            addend: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BenchmarkSpec<T: Scalar> {
    pub name: BenchmarkName,
    pub n_qubits: usize,
    #[serde(default)]
    pub parameters: BenchmarkParams<T>,
    #[serde(default = "default_steps")]
    pub trotter_steps: usize,
}

fn default_steps() -> usize {
    1
}

impl<T: Scalar> BenchmarkSpec<T> {
    pub fn new(name: BenchmarkName, n_qubits: usize) -> Self {
        BenchmarkSpec {
            name,
            n_qubits,
            parameters: BenchmarkParams::default(),
            trotter_steps: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.name {
            BenchmarkName::CrzFolding => {
                if self.n_qubits != 2 {
                    return Err(Error::validation("crz-folding is a 2-qubit benchmark"));
                }
                if self.parameters.n_folds == Some(0) {
                    return Err(Error::validation("n_folds must be at least 1"));
                }
            }
            _ => {
                if !(4..=10).contains(&self.n_qubits) {
                    return Err(Error::validation(format!(
                        "benchmark register sizes run 4..=10 qubits, got {}",
                        self.n_qubits
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Builds the circuit a benchmark spec describes. Declared defaults:
/// gamma 0.4, beta 0.3, J 1, h 1, dt 0.2, one Trotter step, ring graph,
/// addend `2^(n-1) + 1`, eigenphase 5/16, 4 folds with seed 7.
pub fn synthesize<T: Scalar>(spec: &BenchmarkSpec<T>) -> Result<Circuit<T>> {
    spec.validate()?;
    let p = &spec.parameters;
    match spec.name {
        BenchmarkName::QaoaMaxcut => {
            let edges = p.edges.clone().unwrap_or_else(|| ring_edges(spec.n_qubits));
            let gamma = p.gamma.clone().unwrap_or_else(|| vec![lit(0.4)]);
            let beta = p.beta.clone().unwrap_or_else(|| vec![lit(0.3)]);
            qaoa_maxcut(spec.n_qubits, &edges, &gamma, &beta)
        }
        BenchmarkName::Ising | BenchmarkName::Xy | BenchmarkName::Heisenberg => {
            let model = match spec.name {
                BenchmarkName::Ising => SpinModel::Ising,
                BenchmarkName::Xy => SpinModel::Xy,
                _ => SpinModel::Heisenberg,
            };
            trotter_circuit(
                model,
                spec.n_qubits,
                p.j.unwrap_or_else(T::one),
                p.h.unwrap_or_else(T::one),
                spec.trotter_steps,
                p.dt.unwrap_or_else(|| lit(0.2)),
            )
        }
        BenchmarkName::QftAdder => {
            let default_addend = (1u64 << (spec.n_qubits - 1)) + 1;
            qft_adder(spec.n_qubits, p.addend.unwrap_or(default_addend))
        }
        BenchmarkName::Qpe => {
            let phi = p.eigenphase.unwrap_or_else(|| lit(0.3125));
            qpe(spec.n_qubits - 1, phi)
        }
        BenchmarkName::CrzFolding => {
            crz_folding_circuit(p.n_folds.unwrap_or(4), p.seed.unwrap_or(7))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{equal_up_to_global_phase, unitary_of_circuit, GateKind};
    use crate::linalg::{self, identity, CMat, Unitary2};
    use num_complex::Complex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Dense `exp(-i phi P)` built independently from embedded Pauli kroned
    /// factors; P squares to the identity so the closed form is exact.
    fn pauli_exp_oracle(p: &PauliString<f64>, theta: f64, n: usize) -> CMat<f64> {
        let mut pmat = identity::<f64>(1 << n);
        for op in &p.ops {
            let small = match op.pauli {
                Pauli::X => Unitary2::<f64>::x().to_mat(),
                Pauli::Y => Unitary2::<f64>::y().to_mat(),
                Pauli::Z => Unitary2::<f64>::z().to_mat(),
            };
            pmat = linalg::embed(&small, &[op.qubit.0], n).dot(&pmat);
        }
        let phi = p.coefficient * theta / 2.0;
        identity::<f64>(1 << n).mapv(|z| z * phi.cos())
            - pmat.mapv(|z| z * Complex::new(0.0, phi.sin()))
    }

    #[test]
    fn pauli_string_matches_the_figure_example() {
        // P = X3 Z2 Z1 Y0: H on q3, RX(pi/2) on q0, 3-CX ladder onto q3.
        let p = PauliString::new(
            &[(3, Pauli::X), (2, Pauli::Z), (1, Pauli::Z), (0, Pauli::Y)],
            1.0,
        );
        let c = pauli_string_circuit(&p, 0.77).unwrap();
        c.validate().unwrap();
        let kinds: Vec<&str> = c.gates.iter().map(|g| g.kind.name()).collect();
        assert_eq!(
            kinds,
            vec!["rx", "h", "cx", "cx", "cx", "rz", "cx", "cx", "cx", "h", "rx"]
        );
        let marked: Vec<bool> = c.gates.iter().map(|g| g.variant == Variant::Inverse).collect();
        assert_eq!(
            marked,
            vec![false, false, false, false, false, false, true, true, true, true, false]
        );
        let got = unitary_of_circuit(&c).unwrap();
        let want = pauli_exp_oracle(&p, 0.77, 4);
        assert!(equal_up_to_global_phase(&got, &want, 1e-9).unwrap());
    }

    #[test]
    fn single_z_string_is_a_bare_rz() {
        let p = PauliString::new(&[(0, Pauli::Z)], 1.0);
        let c = pauli_string_circuit(&p, 0.4).unwrap();
        assert_eq!(c.gates.len(), 1);
        assert!(matches!(c.gates[0].kind, GateKind::Rz(t) if (t - 0.4f64).abs() < 1e-15));
    }

    #[test]
    fn pauli_string_matches_the_exponential_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let axes = [Pauli::X, Pauli::Y, Pauli::Z];
        for _ in 0..40 {
            let n = rng.gen_range(2..=5);
            let mut qs: Vec<usize> = (0..n).collect();
            for k in 0..n {
                let j = rng.gen_range(k..n);
                qs.swap(k, j);
            }
            let len = rng.gen_range(1..=n);
            let ops: Vec<(usize, Pauli)> = qs[..len]
                .iter()
                .map(|&q| (q, axes[rng.gen_range(0..3)]))
                .collect();
            let coeff = rng.gen::<f64>() * 2.0 - 1.0;
            let theta = rng.gen::<f64>() * 4.0 - 2.0;
            let p = PauliString::new(&ops, coeff);
            let c = pauli_string_circuit(&p, theta).unwrap();
            c.validate().unwrap();
            let got = unitary_of_circuit(&c).unwrap();
            let want = pauli_exp_oracle(&p, theta, c.n_qubits);
            assert!(equal_up_to_global_phase(&got, &want, 1e-9).unwrap());
        }
    }

    #[test]
    fn pauli_mirror_sublist_realizes_the_adjoint() {
        // The ladder/RZ/ladder core is a structural palindrome: reversing it,
        // flipping Standard<->Inverse on the marked gates, and negating the
        // rotation is exactly the gate-level adjoint of the core.
        let p = PauliString::new(&[(0, Pauli::Z), (1, Pauli::Z), (3, Pauli::Z)], 1.0);
        let c = pauli_string_circuit(&p, 1.3).unwrap();
        let first_cx = c.gates.iter().position(|g| matches!(g.kind, GateKind::Cx)).unwrap();
        let last_cx = c.gates.len()
            - 1
            - c.gates
                .iter()
                .rev()
                .position(|g| matches!(g.kind, GateKind::Cx))
                .unwrap();
        let core: Vec<Gate<f64>> = c.gates[first_cx..=last_cx].to_vec();
        let mut mirrored: Vec<Gate<f64>> = core
            .iter()
            .rev()
            .map(|g| {
                let mut g = g.clone();
                if g.is_self_adjoint() {
                    g.variant = match g.variant {
                        Variant::Standard => Variant::Inverse,
                        Variant::Inverse => Variant::Standard,
                    };
                }
                g
            })
            .collect();
        for g in &mut mirrored {
            if let GateKind::Rz(t) = g.kind {
                g.kind = GateKind::Rz(-t);
            }
        }
        // Structural palindrome: kinds and operands line up after reversal.
        for (a, b) in core.iter().zip(mirrored.iter()) {
            assert_eq!(a.kind.name(), b.kind.name());
            assert_eq!(a.qubits, b.qubits);
        }
        let u = unitary_of_circuit(&Circuit { n_qubits: 4, gates: core }).unwrap();
        let v = unitary_of_circuit(&Circuit { n_qubits: 4, gates: mirrored }).unwrap();
        let prod = v.dot(&u);
        assert!(linalg::max_abs_diff(&prod, &identity(16)) < 1e-10);
    }

    #[test]
    fn pauli_string_rejects_malformed_input() {
        let empty: PauliString<f64> = PauliString { ops: vec![], coefficient: 1.0 };
        assert!(pauli_string_circuit(&empty, 0.3).is_err());
        let dup = PauliString::new(&[(1, Pauli::X), (1, Pauli::Z)], 1.0);
        assert!(pauli_string_circuit(&dup, 0.3).is_err());
    }

    #[test]
    fn trotter_structures_match_the_term_lists() {
        // Ising n=2, 1 step: ZZ bond then two X fields.
        let c = trotter_circuit::<f64>(SpinModel::Ising, 2, 1.0, 1.0, 1, 0.2).unwrap();
        c.validate().unwrap();
        let rz_count = c.gates.iter().filter(|g| matches!(g.kind, GateKind::Rz(_))).count();
        assert_eq!(rz_count, 3);
        let cx_marked = c
            .gates
            .iter()
            .any(|g| matches!(g.kind, GateKind::Cx) && g.variant == Variant::Inverse);
        assert!(cx_marked);

        // Heisenberg n=3: 3 terms x 2 bonds = 6 RZ gates.
        let c = trotter_circuit::<f64>(SpinModel::Heisenberg, 3, 1.0, 0.0, 1, 0.1).unwrap();
        let rz_count = c.gates.iter().filter(|g| matches!(g.kind, GateKind::Rz(_))).count();
        assert_eq!(rz_count, 6);

        assert!(trotter_circuit::<f64>(SpinModel::Xy, 3, 1.0, 1.0, 0, 0.1).is_err());
        assert!(trotter_circuit::<f64>(SpinModel::Xy, 1, 1.0, 1.0, 1, 0.1).is_err());
    }

    #[test]
    fn trotter_single_step_matches_its_term_product() {
        // One step is exactly the ordered product of term exponentials.
        let (j, h, dt) = (0.8, 0.5, 0.3);
        let c = trotter_circuit::<f64>(SpinModel::Ising, 3, j, h, 1, dt).unwrap();
        let got = unitary_of_circuit(&c).unwrap();
        let theta = 2.0 * dt;
        let mut want = identity::<f64>(8);
        for term in [
            PauliString::new(&[(0, Pauli::Z), (1, Pauli::Z)], j),
            PauliString::new(&[(1, Pauli::Z), (2, Pauli::Z)], j),
            PauliString::new(&[(0, Pauli::X)], h),
            PauliString::new(&[(1, Pauli::X)], h),
            PauliString::new(&[(2, Pauli::X)], h),
        ] {
            want = pauli_exp_oracle(&term, theta, 3).dot(&want);
        }
        assert!(equal_up_to_global_phase(&got, &want, 1e-9).unwrap());
    }

    #[test]
    fn qaoa_emits_annotated_cost_pairs() {
        // Path graph 0-1, one round.
        let c = qaoa_maxcut::<f64>(2, &[(0, 1)], &[0.4], &[0.3]).unwrap();
        c.validate().unwrap();
        let kinds: Vec<&str> = c.gates.iter().map(|g| g.kind.name()).collect();
        assert_eq!(kinds, vec!["h", "h", "cx", "rz", "cx", "rx", "rx"]);
        assert_eq!(c.gates[4].variant, Variant::Inverse);
        assert_eq!(c.gates[2].pair_id, c.gates[4].pair_id);

        // Empty edge list: mixers only, zero CX.
        let c = qaoa_maxcut::<f64>(3, &[], &[0.4], &[0.3]).unwrap();
        assert!(!c.gates.iter().any(|g| matches!(g.kind, GateKind::Cx)));

        // 4-ring: one annotated pair per edge.
        let c = qaoa_maxcut::<f64>(4, &ring_edges(4), &[0.4], &[0.3]).unwrap();
        c.validate().unwrap();
        let pairs: std::collections::BTreeSet<u64> =
            c.gates.iter().filter_map(|g| g.pair_id).collect();
        assert_eq!(pairs.len(), 4);

        assert!(qaoa_maxcut::<f64>(3, &[(1, 1)], &[0.4], &[0.3]).is_err());
        assert!(qaoa_maxcut::<f64>(3, &[(0, 1)], &[0.4], &[0.3, 0.1]).is_err());
    }

    #[test]
    fn qft_adder_implements_modular_addition() {
        // addend 0: identity up to global phase.
        let c = qft_adder::<f64>(3, 0).unwrap();
        let u = unitary_of_circuit(&c).unwrap();
        assert!(equal_up_to_global_phase(&u, &identity(8), 1e-9).unwrap());

        // addend 5 maps |2> to |7>, and every basis state adds mod 8.
        let c = qft_adder::<f64>(3, 5).unwrap();
        c.validate().unwrap();
        let u = unitary_of_circuit(&c).unwrap();
        assert!((u[(7, 2)].norm() - 1.0).abs() < 1e-9);
        for x in 0..8usize {
            let y = (x + 5) % 8;
            assert!((u[(y, x)].norm() - 1.0).abs() < 1e-9, "column {x}");
        }

        assert!(qft_adder::<f64>(3, 8).is_err());
    }

    #[test]
    fn qpe_reads_out_exact_binary_phases() {
        // n_counting=3, phi=0.25: counting register holds 2, target stays 1;
        // the full little-endian index is 2 + 8 = 10.
        let c = qpe::<f64>(3, 0.25).unwrap();
        c.validate().unwrap();
        let u = unitary_of_circuit(&c).unwrap();
        assert!((u[(10, 0)].norm() - 1.0).abs() < 1e-9);

        assert!(qpe::<f64>(0, 0.25).is_err());
        assert!(qpe::<f64>(3, 1.0).is_err());
        assert!(qpe::<f64>(3, -0.1).is_err());
    }

    #[test]
    fn crz_folding_is_deterministic_and_identity() {
        let raw = crz_folding_circuit::<f64>(4, 7).unwrap();
        let crz_count = raw.gates.iter().filter(|g| matches!(g.kind, GateKind::Crz(_))).count();
        assert_eq!(crz_count, 8);
        assert_eq!(raw, crz_folding_circuit::<f64>(4, 7).unwrap());
        assert_ne!(raw, crz_folding_circuit::<f64>(4, 8).unwrap());

        let (std_c, hi_c) = crz_folding_benchmark::<f64>(4, 7).unwrap();
        std_c.validate().unwrap();
        hi_c.validate().unwrap();
        assert!(std_c.gates.iter().all(|g| g.pair_id.is_none()));
        assert_eq!(
            hi_c.gates.iter().filter(|g| g.variant == Variant::Inverse).count(),
            8
        );
        // Same skeleton, both exactly the identity overall.
        assert_eq!(std_c.gates.len(), hi_c.gates.len());
        for c in [&std_c, &hi_c] {
            let u = unitary_of_circuit(c).unwrap();
            assert!(equal_up_to_global_phase(&u, &identity(4), 1e-9).unwrap());
        }

        assert!(crz_folding_circuit::<f64>(0, 7).is_err());
    }

    #[test]
    fn synthesize_dispatches_and_validates() {
        for (name, n) in [
            (BenchmarkName::QaoaMaxcut, 4),
            (BenchmarkName::Ising, 6),
            (BenchmarkName::Xy, 6),
            (BenchmarkName::Heisenberg, 6),
            (BenchmarkName::QftAdder, 5),
            (BenchmarkName::Qpe, 5),
        ] {
            let spec = BenchmarkSpec::<f64>::new(name, n);
            let c = synthesize(&spec).unwrap();
            c.validate().unwrap();
            assert_eq!(c.n_qubits, n);
            assert_eq!(synthesize(&spec).unwrap(), c);
        }
        let spec = BenchmarkSpec::<f64>::new(BenchmarkName::CrzFolding, 2);
        synthesize(&spec).unwrap();

        assert!(synthesize(&BenchmarkSpec::<f64>::new(BenchmarkName::QaoaMaxcut, 3)).is_err());
        assert!(synthesize(&BenchmarkSpec::<f64>::new(BenchmarkName::Ising, 11)).is_err());
        assert!(synthesize(&BenchmarkSpec::<f64>::new(BenchmarkName::CrzFolding, 4)).is_err());
    }

    #[test]
    fn benchmark_spec_round_trips_through_json() {
        let text = r#"{
            "name": "qaoa-maxcut",
            "n_qubits": 6,
            "parameters": {
                "edges": [[0, 1], [1, 2], [2, 3]],
                "gamma": [0.4, 0.2],
                "beta": [0.3, 0.1]
            }
        }"#;
        let spec: BenchmarkSpec<f64> = serde_json::from_str(text).unwrap();
        assert_eq!(spec.name, BenchmarkName::QaoaMaxcut);
        assert_eq!(spec.trotter_steps, 1);
        assert_eq!(spec.parameters.edges.as_ref().unwrap().len(), 3);
        let back: BenchmarkSpec<f64> =
            serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(spec, back);
        synthesize(&spec).unwrap().validate().unwrap();
    }
}
