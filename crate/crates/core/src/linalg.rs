//! Dense complex linear algebra for the oracle path.
//!
//! Matrices built here are reference objects used to check passes and small
//! circuits; the statevector simulator never materializes a full operator.

use ndarray::Array2;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Dense complex matrix, `2^n x 2^n` for an `n`-qubit operator.
pub type CMat<T> = Array2<Complex<T>>;

#[inline]
pub fn c<T: Scalar>(re: f64, im: f64) -> Complex<T> {
    Complex::new(lit(re), lit(im))
}

#[inline]
pub fn cr<T: Scalar>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// `e^{i theta}` on the unit circle.
#[inline]
pub fn cis<T: Scalar>(theta: T) -> Complex<T> {
    Complex::from_polar(T::one(), theta)
}

pub fn identity<T: Scalar>(dim: usize) -> CMat<T> {
    Array2::eye(dim)
}

pub fn adjoint<T: Scalar>(m: &CMat<T>) -> CMat<T> {
    m.t().mapv(|z| z.conj())
}

pub fn kron<T: Scalar>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    ndarray::linalg::kron(a, b)
}

pub fn max_abs_diff<T: Scalar>(a: &CMat<T>, b: &CMat<T>) -> T {
    debug_assert_eq!(a.dim(), b.dim());
    let mut worst = T::zero();
    for (x, y) in a.iter().zip(b.iter()) {
        worst = worst.max((x - y).norm());
    }
    worst
}

/// Max-norm distance from `m' m = I`.
pub fn unitarity_defect<T: Scalar>(m: &CMat<T>) -> T {
    let gram = adjoint(m).dot(m);
    max_abs_diff(&gram, &identity(m.nrows()))
}

pub fn is_unitary<T: Scalar>(m: &CMat<T>, tol: T) -> bool {
    m.nrows() == m.ncols() && unitarity_defect(m) <= tol
}

/// Compares two operators up to a single global phase.
///
/// The candidate phase is `arg(tr(b' a))`: when `a = e^{i phi} b` the trace
/// is `e^{i phi} * dim`, so the estimate is exact; when the operators differ
/// the elementwise comparison fails regardless of the estimate.
pub fn equal_up_to_global_phase<T: Scalar>(a: &CMat<T>, b: &CMat<T>, tol: T) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "global-phase comparison of {:?} against {:?}",
            a.dim(),
            b.dim()
        )));
    }
    let overlap = adjoint(b).dot(a);
    let mut trace = Complex::new(T::zero(), T::zero());
    for k in 0..overlap.nrows() {
        trace += overlap[(k, k)];
    }
    let phase = cis(trace.arg());
    let mut worst = T::zero();
    for (x, y) in a.iter().zip(b.iter()) {
        worst = worst.max((x - phase * y).norm());
    }
    Ok(worst <= tol)
}

/// Embeds a `2^k x 2^k` operator acting on the listed qubits into the full
/// `2^n` space. Bit `j` of the small index corresponds to `bits[j]`, and the
/// global basis is little-endian (qubit 0 is the least significant bit).
pub fn embed<T: Scalar>(small: &CMat<T>, bits: &[usize], n_qubits: usize) -> CMat<T> {
    let k = bits.len();
    debug_assert_eq!(small.nrows(), 1 << k);
    let dim = 1usize << n_qubits;
    let mask: usize = bits.iter().map(|&b| 1usize << b).sum();
    let zero = Complex::new(T::zero(), T::zero());
    let mut full = Array2::from_elem((dim, dim), zero);
    for i in 0..dim {
        let rest = i & !mask;
        let mut i_small = 0usize;
        for (j, &b) in bits.iter().enumerate() {
            i_small |= ((i >> b) & 1) << j;
        }
        for j_small in 0..(1 << k) {
            let mut j_full = rest;
            for (j, &b) in bits.iter().enumerate() {
                j_full |= ((j_small >> j) & 1) << b;
            }
            full[(i, j_full)] = small[(i_small, j_small)];
        }
    }
    full
}

/// Single-qubit unitary with fixed 2x2 storage. Used both as a gate payload
/// (multi-controlled targets) and as the workhorse for Euler-angle and
/// square-root computations in the decomposition passes.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Unitary2<T> {
    pub m: [[Complex<T>; 2]; 2],
}

impl<T: Scalar> Unitary2<T> {
    pub fn new(
        m00: Complex<T>,
        m01: Complex<T>,
        m10: Complex<T>,
        m11: Complex<T>,
    ) -> Self {
        Unitary2 {
            m: [[m00, m01], [m10, m11]],
        }
    }

    pub fn identity() -> Self {
        Unitary2::new(cr(T::one()), cr(T::zero()), cr(T::zero()), cr(T::one()))
    }

    pub fn x() -> Self {
        Unitary2::new(cr(T::zero()), cr(T::one()), cr(T::one()), cr(T::zero()))
    }

    pub fn y() -> Self {
        Unitary2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0))
    }

    pub fn z() -> Self {
        Unitary2::new(cr(T::one()), cr(T::zero()), cr(T::zero()), cr(-T::one()))
    }

    pub fn h() -> Self {
        let s = cr(lit::<T>(1.0) / T::SQRT_2());
        Unitary2::new(s, s, s, -s)
    }

    /// Principal square root of X: `sx * sx = x` exactly.
    pub fn sx() -> Self {
        let p = c(0.5, 0.5);
        let q = c(0.5, -0.5);
        Unitary2::new(p, q, q, p)
    }

    /// `exp(-i theta X / 2)`.
    pub fn rx(theta: T) -> Self {
        let half = theta / lit(2.0);
        let (s, cth) = half.sin_cos();
        Unitary2::new(
            cr(cth),
            Complex::new(T::zero(), -s),
            Complex::new(T::zero(), -s),
            cr(cth),
        )
    }

    /// `exp(-i theta Y / 2)`.
    pub fn ry(theta: T) -> Self {
        let half = theta / lit(2.0);
        let (s, cth) = half.sin_cos();
        Unitary2::new(cr(cth), cr(-s), cr(s), cr(cth))
    }

    /// `exp(-i theta Z / 2)`, the traceless convention.
    pub fn rz(theta: T) -> Self {
        let half = theta / lit(2.0);
        let zero = cr(T::zero());
        Unitary2::new(cis(-half), zero, zero, cis(half))
    }

    /// `diag(1, e^{i theta})`; differs from `rz(theta)` by `e^{i theta/2}`.
    pub fn phase(theta: T) -> Self {
        let zero = cr(T::zero());
        Unitary2::new(cr(T::one()), zero, zero, cis(theta))
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let a = &self.m;
        let b = &rhs.m;
        Unitary2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }

    pub fn adjoint(&self) -> Self {
        Unitary2::new(
            self.m[0][0].conj(),
            self.m[1][0].conj(),
            self.m[0][1].conj(),
            self.m[1][1].conj(),
        )
    }

    pub fn scale(&self, z: Complex<T>) -> Self {
        Unitary2::new(
            z * self.m[0][0],
            z * self.m[0][1],
            z * self.m[1][0],
            z * self.m[1][1],
        )
    }

    pub fn det(&self) -> Complex<T> {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> Complex<T> {
        self.m[0][0] + self.m[1][1]
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut worst = T::zero();
        for r in 0..2 {
            for cidx in 0..2 {
                worst = worst.max((self.m[r][cidx] - other.m[r][cidx]).norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self, tol: T) -> bool {
        self.adjoint().mul(self).max_abs_diff(&Unitary2::identity()) <= tol
    }

    /// Whether the operator equals its own adjoint (up to `tol`).
    pub fn is_self_adjoint(&self, tol: T) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    pub fn to_mat(&self) -> CMat<T> {
        let mut out = Array2::from_elem((2, 2), cr(T::zero()));
        for r in 0..2 {
            for cidx in 0..2 {
                out[(r, cidx)] = self.m[r][cidx];
            }
        }
        out
    }

    /// Principal matrix square root: eigenvalues move to their principal
    /// complex roots, eigenvectors are preserved. Deterministic, and
    /// `v.mul(&v)` reproduces `self` to working precision.
    ///
    /// Any 2x2 unitary factors as `e^{i gamma} (cos(a) I - i sin(a) n.sigma)`
    /// with a real unit axis `n`; that form gives a numerically stable
    /// orthonormal eigenbasis without a general eigensolver.
    pub fn sqrt_principal(&self) -> Self {
        let two = lit::<T>(2.0);
        let gamma = self.det().arg() / two;
        let su = self.scale(cis(-gamma));
        let cos_a = (su.m[0][0].re + su.m[1][1].re) / two;
        // s * n, the sin-weighted rotation axis of the SU(2) part.
        let mx = -(su.m[0][1].im + su.m[1][0].im) / two;
        let my = (su.m[1][0].re - su.m[0][1].re) / two;
        let mz = (su.m[1][1].im - su.m[0][0].im) / two;
        let s = (mx * mx + my * my + mz * mz).sqrt();
        if s < lit(1e-12) {
            // Scalar multiple of the identity (cos_a = +/-1). Halve the
            // principal argument directly; `Complex::sqrt` would see a
            // negative-zero imaginary part on -1 and pick the lower branch.
            let phi = if cos_a >= T::zero() {
                gamma
            } else if gamma > T::zero() {
                gamma - T::PI()
            } else {
                gamma + T::PI()
            };
            return Unitary2::identity().scale(cis(phi / two));
        }
        let (nx, ny, nz) = (mx / s, my / s, mz / s);
        // Eigenvalues e^{i gamma} e^{-/+ i a} on the +/- axis eigenvectors.
        let lam_p = cis(gamma) * Complex::new(cos_a, -s);
        let lam_m = cis(gamma) * Complex::new(cos_a, s);
        // +1 eigenvector of n.sigma, branch chosen away from the singular pole.
        let (v0, v1) = if nz > lit(-0.5) {
            (Complex::new(T::one() + nz, T::zero()), Complex::new(nx, ny))
        } else {
            (Complex::new(nx, -ny), Complex::new(T::one() - nz, T::zero()))
        };
        let norm = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
        let (v0, v1) = (v0 / norm, v1 / norm);
        // Orthogonal complement is the -1 eigenvector.
        let (w0, w1) = (-v1.conj(), v0.conj());
        let sp = lam_p.sqrt();
        let sm = lam_m.sqrt();
        Unitary2::new(
            sp * v0 * v0.conj() + sm * w0 * w0.conj(),
            sp * v0 * v1.conj() + sm * w0 * w1.conj(),
            sp * v1 * v0.conj() + sm * w1 * w0.conj(),
            sp * v1 * v1.conj() + sm * w1 * w1.conj(),
        )
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_unitary2(rng: &mut ChaCha8Rng) -> Unitary2<f64> {
        // Haar-ish: random complex column, orthonormal complement, random phases.
        let a = Complex::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        let b = Complex::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (a, b) = (a / norm, b / norm);
        let phi1 = rng.gen::<f64>() * std::f64::consts::TAU;
        let phi2 = rng.gen::<f64>() * std::f64::consts::TAU;
        let p1 = Complex::from_polar(1.0, phi1);
        let p2 = Complex::from_polar(1.0, phi2);
        Unitary2::new(a * p1, -b.conj() * p2, b * p1, a.conj() * p2)
    }

    #[test]
    fn rotation_matrices_are_unitary() {
        for &theta in &[0.0, 0.3, -1.7, std::f64::consts::PI, 6.1] {
            assert!(Unitary2::<f64>::rx(theta).is_unitary(1e-12));
            assert!(Unitary2::<f64>::ry(theta).is_unitary(1e-12));
            assert!(Unitary2::<f64>::rz(theta).is_unitary(1e-12));
            assert!(Unitary2::<f64>::phase(theta).is_unitary(1e-12));
        }
    }

    #[test]
    fn sx_squares_to_x() {
        let sx = Unitary2::<f64>::sx();
        assert!(sx.mul(&sx).max_abs_diff(&Unitary2::x()) < 1e-15);
    }

    #[test]
    fn sqrt_principal_squares_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let u = random_unitary2(&mut rng);
            let v = u.sqrt_principal();
            assert!(
                v.mul(&v).max_abs_diff(&u) < 1e-12,
                "sqrt failed to square back for {u:?}"
            );
        }
    }

    #[test]
    fn sqrt_principal_of_x_is_sx() {
        let v = Unitary2::<f64>::x().sqrt_principal();
        assert!(v.max_abs_diff(&Unitary2::sx()) < 1e-12);
    }

    #[test]
    fn sqrt_principal_handles_scalar_matrices() {
        let minus_i = Unitary2::<f64>::identity().scale(c(-1.0, 0.0));
        let v = minus_i.sqrt_principal();
        // Principal root of -1 is +i.
        assert!(v.max_abs_diff(&Unitary2::identity().scale(c(0.0, 1.0))) < 1e-12);
        assert!(v.mul(&v).max_abs_diff(&minus_i) < 1e-12);
    }

    #[test]
    fn sqrt_principal_near_diagonal() {
        // The last two sit just inside the +/- pi branch cut.
        let near_cut = std::f64::consts::PI - 1e-5;
        for &t in &[3.0, -3.0, 0.1, near_cut, -near_cut] {
            let u = Unitary2::<f64>::phase(t);
            let v = u.sqrt_principal();
            assert!(v.mul(&v).max_abs_diff(&u) < 1e-12, "theta = {t}");
        }
    }

    #[test]
    fn embed_places_bits_little_endian() {
        // X on qubit 1 of 2: swaps |00> <-> |10> (indices 0 and 2).
        let x = Unitary2::<f64>::x().to_mat();
        let full = embed(&x, &[1], 2);
        assert_eq!(full[(0, 2)], c(1.0, 0.0));
        assert_eq!(full[(2, 0)], c(1.0, 0.0));
        assert_eq!(full[(1, 3)], c(1.0, 0.0));
        assert_eq!(full[(0, 0)], c(0.0, 0.0));
    }

    #[test]
    fn global_phase_comparison() {
        let a = Unitary2::<f64>::h().to_mat();
        let b = a.mapv(|z| z * Complex::from_polar(1.0, 1.234));
        assert!(equal_up_to_global_phase(&a, &b, 1e-12).unwrap());
        let c_mat = Unitary2::<f64>::x().to_mat();
        assert!(!equal_up_to_global_phase(&a, &c_mat, 1e-9).unwrap());
        let bigger = identity::<f64>(4);
        assert!(equal_up_to_global_phase(&a, &bigger, 1e-9).is_err());
    }
}
