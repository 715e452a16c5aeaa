//! Coherent-noise statevector simulation and distribution metrics.
//!
//! Every primitive rotation is over-rotated by a shared fraction: the applied
//! unitary is `exp(-i (1+eps) theta / 2 * P)` with eps keyed by (axis, qubit
//! tuple). A primitive and its negated-angle counterpart hit the same key, so
//! an inverted pulse schedule realizes the exact adjoint of its noisy
//! original. That one fact is the whole mitigation mechanism.

use std::collections::BTreeMap;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::circuit::{local_matrix, Circuit, Gate, GateKind, QubitId, MAX_QUBITS};
use crate::error::{Error, Result};
use crate::linalg::{CMat, Unitary2};
use crate::pulse::{schedule_to_primitives, Axis, Primitive, PulseSchedule};
use crate::scalar::{lit, Scalar};

const EPSILON_BOUND: f64 = 0.5;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingDist {
    Uniform,
    Normal,
}

/// How per-channel epsilons are drawn when no explicit override exists:
/// uniform picks from `default * (1 +- scale)`, normal from
/// `N(default, (scale * default)^2)`. A zero default stays exactly zero.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SamplingSpec<T> {
    pub dist: SamplingDist,
    pub scale: T,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EpsilonOverride<T> {
    pub axis: Axis,
    pub qubits: Vec<usize>,
    pub epsilon: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PhaseOffset<T> {
    pub axis: Axis,
    pub qubits: Vec<usize>,
    pub offset: T,
}

/// Multiplicative over-rotation model. Resolution order per (axis, qubits)
/// key: explicit override, else a deterministic draw from the sampling spec
/// around the axis default, else the axis default itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CoherentNoiseModel<T: Scalar> {
    pub default_epsilon: BTreeMap<Axis, T>,
    #[serde(default)]
    pub overrides: Vec<EpsilonOverride<T>>,
    #[serde(default)]
    pub phase_offsets: Vec<PhaseOffset<T>>,
    #[serde(default)]
    pub sampling: Option<SamplingSpec<T>>,
    /// Draw index mixed into every sampled key; `with_draw` selects it.
    #[serde(default)]
    pub draw: u64,
}

impl<T: Scalar> Default for CoherentNoiseModel<T> {
    /// Declared calibration-flavored defaults: two-qubit CR segments drift
    /// roughly 30x more than single-qubit drives.
    fn default() -> Self {
        let mut default_epsilon = BTreeMap::new();
        default_epsilon.insert(Axis::X, lit::<T>(0.000625));
        default_epsilon.insert(Axis::Zx, lit::<T>(0.02));
        default_epsilon.insert(Axis::Z, T::zero());
        CoherentNoiseModel {
            default_epsilon,
            overrides: Vec::new(),
            phase_offsets: Vec::new(),
            sampling: None,
            draw: 0,
        }
    }
}

fn fnv1a(axis: Axis, qubits: &[QubitId]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |b: u8| {
        h ^= b as u64;
        h = h.wrapping_mul(0x1_0000_0000_01b3);
    };
    eat(match axis {
        Axis::X => 0,
        Axis::Zx => 1,
        Axis::Z => 2,
    });
    for q in qubits {
        for b in (q.0 as u64).to_le_bytes() {
            eat(b);
        }
    }
    h
}

impl<T: Scalar> CoherentNoiseModel<T> {
    /// All epsilons and offsets identically zero; simulation becomes exact.
    pub fn zero() -> Self {
        let mut nm = Self::default();
        for v in nm.default_epsilon.values_mut() {
            *v = T::zero();
        }
        nm
    }

    pub fn with_epsilon(mut self, axis: Axis, qubits: &[usize], epsilon: T) -> Self {
        self.overrides.push(EpsilonOverride {
            axis,
            qubits: qubits.to_vec(),
            epsilon,
        });
        self
    }

    pub fn with_sampling(mut self, dist: SamplingDist, scale: T, seed: u64) -> Self {
        self.sampling = Some(SamplingSpec { dist, scale, seed });
        self
    }

    /// Same model, different deterministic realization of every sampled key.
    pub fn with_draw(&self, draw: u64) -> Self {
        let mut nm = self.clone();
        nm.draw = draw;
        nm
    }

    pub fn validate(&self) -> Result<()> {
        let bound = lit::<T>(EPSILON_BOUND);
        for (axis, eps) in &self.default_epsilon {
            if eps.abs() >= bound {
                return Err(Error::validation(format!(
                    "default epsilon for {axis:?} breaks the |eps| < 0.5 sanity bound"
                )));
            }
        }
        for o in &self.overrides {
            if o.epsilon.abs() >= bound {
                return Err(Error::validation(format!(
                    "override epsilon {} breaks the |eps| < 0.5 sanity bound",
                    o.epsilon
                )));
            }
        }
        Ok(())
    }

    /// The shared over-rotation fraction for one physical rotation channel.
    pub fn epsilon_for(&self, axis: Axis, qubits: &[QubitId]) -> T {
        if let Some(o) = self
            .overrides
            .iter()
            .find(|o| o.axis == axis && o.qubits.len() == qubits.len()
                && o.qubits.iter().zip(qubits).all(|(a, b)| *a == b.0))
        {
            return o.epsilon;
        }
        let base = self.default_epsilon.get(&axis).copied().unwrap_or_else(T::zero);
        let Some(s) = &self.sampling else { return base };
        if base == T::zero() {
            return base;
        }
        let mix = 0x9e37_79b9_7f4a_7c15u64.wrapping_mul(self.draw);
        let mut rng = ChaCha8Rng::seed_from_u64(s.seed ^ fnv1a(axis, qubits) ^ mix);
        let eps = match s.dist {
            SamplingDist::Uniform => {
                let u = lit::<T>(rng.gen::<f64>());
                base * (T::one() - s.scale + (s.scale + s.scale) * u)
            }
            SamplingDist::Normal => {
                let g: f64 = rng.sample(StandardNormal);
                base + s.scale * base * lit::<T>(g)
            }
        };
        let cap = lit::<T>(0.499);
        eps.max(-cap).min(cap)
    }

    pub fn phase_offset_for(&self, axis: Axis, qubits: &[QubitId]) -> T {
        self.phase_offsets
            .iter()
            .find(|o| o.axis == axis && o.qubits.len() == qubits.len()
                && o.qubits.iter().zip(qubits).all(|(a, b)| *a == b.0))
            .map(|o| o.offset)
            .unwrap_or_else(T::zero)
    }
}

/// Noisy 2x2 realization of a single-qubit X rotation: the drive axis tilts
/// by the configured phase offset and the angle stretches by (1 + eps).
fn noisy_x_unitary<T: Scalar>(theta: T, eps: T, phase: T) -> Unitary2<T> {
    let rot = Unitary2::rx((T::one() + eps) * theta);
    if phase == T::zero() {
        rot
    } else {
        Unitary2::rz(phase).mul(&rot).mul(&Unitary2::rz(-phase))
    }
}

/// Noisy 4x4 ZX rotation in operand-bit convention (bit 0 = control,
/// bit 1 = target); the target-side X axis tilts by the phase offset.
fn noisy_zx_matrix<T: Scalar>(theta: T, eps: T, phase: T) -> [[Complex<T>; 4]; 4] {
    let a = (T::one() + eps) * theta;
    let half = a / lit::<T>(2.0);
    let (c, s) = (half.cos(), half.sin());
    let zero = Complex::new(T::zero(), T::zero());
    let cc = Complex::new(c, T::zero());
    // exp(-i a/2 Z(x)Xtilt) block-diagonal over the control bit: target
    // rotation about +Xtilt when control = 0, about -Xtilt when control = 1.
    let tilt_p = Complex::from_polar(s, -(T::FRAC_PI_2() - phase));
    let tilt_m = Complex::from_polar(s, -(T::FRAC_PI_2() + phase));
    let mut m = [[zero; 4]; 4];
    // Local indices: 0=|c0 t0>, 1=|c1 t0>, 2=|c0 t1>, 3=|c1 t1>.
    m[0][0] = cc;
    m[2][2] = cc;
    m[0][2] = tilt_m;
    m[2][0] = tilt_p;
    m[1][1] = cc;
    m[3][3] = cc;
    m[1][3] = -tilt_m;
    m[3][1] = -tilt_p;
    m
}

/// Exact unitary a primitive realizes under the noise model, as a dense
/// matrix over its own operands (bit k = operand k).
pub fn noisy_primitive<T: Scalar>(prim: &Primitive<T>, nm: &CoherentNoiseModel<T>) -> CMat<T> {
    let eps = nm.epsilon_for(prim.axis, &prim.qubits);
    let phase = nm.phase_offset_for(prim.axis, &prim.qubits);
    match prim.axis {
        Axis::X => {
            let u = noisy_x_unitary(prim.nominal_angle, eps, phase);
            u.to_mat()
        }
        Axis::Z => Unitary2::rz((T::one() + eps) * prim.nominal_angle).to_mat(),
        Axis::Zx => {
            let m = noisy_zx_matrix(prim.nominal_angle, eps, phase);
            CMat::from_shape_fn((4, 4), |(r, c)| m[r][c])
        }
    }
}

/// 2^n complex amplitudes, unit norm.
#[derive(Clone, Debug, PartialEq)]
pub struct Statevector<T> {
    pub n_qubits: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Scalar> Statevector<T> {
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: u64) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::SimulationBound(format!(
                "{n_qubits} qubits (statevector limit is {MAX_QUBITS})"
            )));
        }
        if index >= (1u64 << n_qubits) {
            return Err(Error::validation(format!(
                "basis index {index} outside a {n_qubits}-qubit register"
            )));
        }
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 1 << n_qubits];
        amps[index as usize] = Complex::new(T::one(), T::zero());
        Ok(Statevector { n_qubits, amps })
    }

    pub fn from_amplitudes(amps: Vec<Complex<T>>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::validation(
                "amplitude count must be a power of two (at least 2)",
            ));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(Error::SimulationBound(format!(
                "{n_qubits} qubits (statevector limit is {MAX_QUBITS})"
            )));
        }
        let sv = Statevector { n_qubits, amps };
        let norm = sv.norm();
        if (norm - T::one()).abs() > lit::<T>(1e-10) {
            return Err(Error::validation(format!("statevector norm {norm} is not 1")));
        }
        Ok(sv)
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn norm(&self) -> T {
        self.amps
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt()
    }

    /// |<other|self>|.
    pub fn overlap(&self, other: &Statevector<T>) -> T {
        self.amps
            .iter()
            .zip(&other.amps)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| {
                acc + b.conj() * a
            })
            .norm()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::validation(format!(
                "qubit q{q} outside a {}-qubit register",
                self.n_qubits
            )));
        }
        Ok(())
    }

    /// In-place 2x2 kernel on one qubit.
    pub fn apply_1q(&mut self, u: &Unitary2<T>, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let stride = 1usize << q;
        let m = u.m;
        let mut base = 0;
        while base < self.amps.len() {
            for i in base..base + stride {
                let a0 = self.amps[i];
                let a1 = self.amps[i + stride];
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i + stride] = m[1][0] * a0 + m[1][1] * a1;
            }
            base += stride << 1;
        }
        Ok(())
    }

    /// In-place 4x4 kernel; the matrix is in operand-bit convention
    /// (local bit 0 = qubit a, local bit 1 = qubit b).
    pub fn apply_2q(&mut self, m: &[[Complex<T>; 4]; 4], a: usize, b: usize) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(Error::validation("two-qubit kernel needs distinct qubits"));
        }
        let (ba, bb) = (1usize << a, 1usize << b);
        let n = self.amps.len();
        for i in 0..n {
            if i & ba != 0 || i & bb != 0 {
                continue;
            }
            let idx = [i, i | ba, i | bb, i | ba | bb];
            let old = idx.map(|k| self.amps[k]);
            for (r, &k) in idx.iter().enumerate() {
                let mut acc = Complex::new(T::zero(), T::zero());
                for (c, &o) in old.iter().enumerate() {
                    acc = acc + m[r][c] * o;
                }
                self.amps[k] = acc;
            }
        }
        Ok(())
    }

    /// 2x2 kernel applied only where every control bit is set.
    pub fn apply_controlled_1q(
        &mut self,
        u: &Unitary2<T>,
        controls: &[usize],
        target: usize,
    ) -> Result<()> {
        self.check_qubit(target)?;
        let mut mask = 0usize;
        for &c in controls {
            self.check_qubit(c)?;
            mask |= 1 << c;
        }
        let bt = 1usize << target;
        let m = u.m;
        for i in 0..self.amps.len() {
            if i & bt != 0 || (i & mask) != mask {
                continue;
            }
            let a0 = self.amps[i];
            let a1 = self.amps[i | bt];
            self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
            self.amps[i | bt] = m[1][0] * a0 + m[1][1] * a1;
        }
        Ok(())
    }

    /// Noise-free application of any circuit gate.
    pub fn apply_gate(&mut self, g: &Gate<T>) -> Result<()> {
        match &g.kind {
            GateKind::Barrier => Ok(()),
            GateKind::Mcu(u) => {
                let controls: Vec<usize> = g.qubits[..g.qubits.len() - 1]
                    .iter()
                    .map(|q| q.0)
                    .collect();
                self.apply_controlled_1q(u, &controls, g.qubits[g.qubits.len() - 1].0)
            }
            _ if g.qubits.len() == 1 => {
                let m = local_matrix(g)?;
                let u = Unitary2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
                self.apply_1q(&u, g.qubits[0].0)
            }
            _ => {
                let m = local_matrix(g)?;
                let mut arr =
                    [[Complex::new(T::zero(), T::zero()); 4]; 4];
                for r in 0..4 {
                    for c in 0..4 {
                        arr[r][c] = m[(r, c)];
                    }
                }
                self.apply_2q(&arr, g.qubits[0].0, g.qubits[1].0)
            }
        }
    }

    /// One noisy primitive rotation.
    pub fn apply_primitive(
        &mut self,
        prim: &Primitive<T>,
        nm: &CoherentNoiseModel<T>,
    ) -> Result<()> {
        let eps = nm.epsilon_for(prim.axis, &prim.qubits);
        let phase = nm.phase_offset_for(prim.axis, &prim.qubits);
        match prim.axis {
            Axis::X => self.apply_1q(
                &noisy_x_unitary(prim.nominal_angle, eps, phase),
                prim.qubits[0].0,
            ),
            Axis::Z => self.apply_1q(
                &Unitary2::rz((T::one() + eps) * prim.nominal_angle),
                prim.qubits[0].0,
            ),
            Axis::Zx => self.apply_2q(
                &noisy_zx_matrix(prim.nominal_angle, eps, phase),
                prim.qubits[0].0,
                prim.qubits[1].0,
            ),
        }
    }
}

/// Noise-free gate-level simulation; the reference for ideal distributions.
pub fn simulate_circuit<T: Scalar>(
    c: &Circuit<T>,
    initial: &Statevector<T>,
) -> Result<Statevector<T>> {
    c.validate()?;
    if initial.n_qubits != c.n_qubits {
        return Err(Error::DimensionMismatch(format!(
            "circuit has {} qubits, state has {}",
            c.n_qubits, initial.n_qubits
        )));
    }
    let mut sv = initial.clone();
    for g in &c.gates {
        sv.apply_gate(g)?;
    }
    Ok(sv)
}

/// Noisy pulse-level simulation of a primitive stream in time order.
pub fn simulate_primitives<T: Scalar>(
    prims: &[Primitive<T>],
    nm: &CoherentNoiseModel<T>,
    initial: &Statevector<T>,
) -> Result<Statevector<T>> {
    let mut sv = initial.clone();
    for p in prims {
        sv.apply_primitive(p, nm)?;
    }
    Ok(sv)
}

/// Noisy simulation of per-gate schedules in circuit order.
pub fn simulate_schedules<T: Scalar>(
    schedules: &[PulseSchedule<T>],
    nm: &CoherentNoiseModel<T>,
    initial: &Statevector<T>,
) -> Result<Statevector<T>> {
    let mut sv = initial.clone();
    for s in schedules {
        for p in schedule_to_primitives(s) {
            sv.apply_primitive(&p, nm)?;
        }
    }
    Ok(sv)
}

/// Sparse outcome distribution over `width`-bit strings.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution<T> {
    width: usize,
    probs: BTreeMap<u64, T>,
}

impl<T: Scalar> Distribution<T> {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn prob(&self, index: u64) -> T {
        self.probs.get(&index).copied().unwrap_or_else(T::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&u64, &T)> {
        self.probs.iter()
    }

    pub fn total(&self) -> T {
        self.probs.values().fold(T::zero(), |a, &p| a + p)
    }

    /// MSB-first readout strings keyed to probabilities, for reports.
    pub fn to_bitstring_map(&self) -> BTreeMap<String, T> {
        self.probs
            .iter()
            .map(|(&k, &p)| (bitstring(k, self.width), p))
            .collect()
    }
}

/// MSB-first readout string of a little-endian basis index.
pub fn bitstring(index: u64, width: usize) -> String {
    (0..width)
        .rev()
        .map(|b| if index >> b & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Exact Born-rule distribution of a statevector.
pub fn distribution<T: Scalar>(sv: &Statevector<T>) -> Distribution<T> {
    let mut probs = BTreeMap::new();
    for (i, amp) in sv.amplitudes().iter().enumerate() {
        let p = amp.norm_sqr();
        if p > T::zero() {
            probs.insert(i as u64, p);
        }
    }
    Distribution {
        width: sv.n_qubits,
        probs,
    }
}

/// Empirical distribution of `shots` seeded outcome draws.
pub fn sample<T: Scalar>(sv: &Statevector<T>, shots: u64, seed: u64) -> Result<Distribution<T>> {
    if shots == 0 {
        return Err(Error::validation("shots must be positive"));
    }
    let mut cumulative = Vec::with_capacity(sv.amplitudes().len());
    let mut acc = T::zero();
    for amp in sv.amplitudes() {
        acc = acc + amp.norm_sqr();
        cumulative.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for _ in 0..shots {
        let r = lit::<T>(rng.gen::<f64>()) * acc;
        let idx = cumulative.partition_point(|&c| c <= r).min(cumulative.len() - 1);
        *counts.entry(idx as u64).or_insert(0) += 1;
    }
    let total = lit::<T>(shots as f64);
    Ok(Distribution {
        width: sv.n_qubits,
        probs: counts
            .into_iter()
            .map(|(k, v)| (k, lit::<T>(v as f64) / total))
            .collect(),
    })
}

/// Classical fidelity `F(p, q) = (sum_x sqrt(p(x) q(x)))^2`; missing keys
/// count as zero probability.
pub fn fidelity<T: Scalar>(p: &Distribution<T>, q: &Distribution<T>) -> Result<T> {
    if p.width != q.width {
        return Err(Error::DimensionMismatch(format!(
            "distributions over {} and {} bits",
            p.width, q.width
        )));
    }
    let mut s = T::zero();
    for (k, &pp) in p.probs.iter() {
        let qq = q.prob(*k);
        if qq > T::zero() {
            s = s + (pp * qq).sqrt();
        }
    }
    Ok((s * s).min(T::one()))
}
