//! Dense complex linear algebra for the 2-, 4- and 8-dimensional spaces of
//! one, two and three qubits.
//!
//! Matrices are small, so everything is stored row-major in a flat `Vec`
//! and the eigensolver is a cyclic complex Jacobi iteration, which is
//! accurate to a few ulps on Hermitian input of this size.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Largest dimension produced by public operations (three qubits).
pub const MAX_DIM: usize = 8;

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const PSD_CLAMP_TOL: f64 = 1e-12;
pub const RANK_OVERFLOW_TOL: f64 = 1e-9;

const JACOBI_MAX_SWEEPS: usize = 100;

/// Dense square complex matrix, row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds a matrix from row-major entries; `entries.len()` must be a square.
    pub fn from_row_major(entries: Vec<C64>) -> Result<Self> {
        let dim = (entries.len() as f64).sqrt().round() as usize;
        if dim * dim != entries.len() || dim == 0 {
            return Err(Error::Precondition(format!(
                "{} entries do not form a square matrix",
                entries.len()
            )));
        }
        Ok(Self { dim, data: entries })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        Self::from_fn(dim, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    /// Outer product |u><v|.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        assert_eq!(u.len(), v.len());
        Self::from_fn(u.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    /// Entrywise complex conjugate in the computational basis.
    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Entrywise max-abs distance; `inf` when the dimensions differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    /// max |H - H^dagger|.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    /// max |U^dagger U - I|.
    pub fn unitarity_residual(&self) -> f64 {
        (&self.adjoint() * self).max_abs_diff(&Self::identity(self.dim))
    }

    /// Returns (H + H^dagger)/2, removing rounding asymmetry.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                self.data[i * self.dim..(i + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Kronecker product with the block convention
    /// `(A⊗B)[i*dB + k, j*dB + l] = A[i,j] * B[k,l]`.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        let dim = self.dim * other.dim;
        if dim > MAX_DIM {
            return Err(Error::DimensionOverflow(dim));
        }
        Ok(self.kron_unchecked(other))
    }

    pub(crate) fn kron_unchecked(&self, other: &Self) -> Self {
        let db = other.dim;
        Self::from_fn(self.dim * db, |r, c| {
            self[(r / db, c / db)] * other[(r % db, c % db)]
        })
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix product dimension mismatch");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.kron(b)
}

pub fn identity2() -> ComplexMatrix {
    ComplexMatrix::identity(2)
}

pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
}

/// Standard σ_y = -i|0><1| + i|1><0|.
pub fn sigma_y() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2);
    m[(0, 1)] = -I;
    m[(1, 0)] = I;
    m
}

pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::diag(&[1.0, -1.0])
}

/// (I, σ_x, σ_y, σ_z) in that order.
pub fn paulis() -> [ComplexMatrix; 4] {
    [identity2(), sigma_x(), sigma_y(), sigma_z()]
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Sorted descending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }
}

/// Hermitian eigendecomposition. Input must be Hermitian within 1e-10.
pub fn hermitian_eig(h: &ComplexMatrix) -> Result<HermitianEigen> {
    let residual = h.hermiticity_residual();
    if residual > HERMITIAN_TOL {
        return Err(Error::NotHermitian(residual));
    }
    jacobi(&h.hermitian_part())
}

/// Cyclic Jacobi on a Hermitian matrix of any dimension.
///
/// Each rotation first removes the phase of `a[p][q]` with a diagonal
/// unitary and then applies the real symmetric 2x2 Jacobi rotation, so the
/// combined unitary `G` zeroes `a[p][q]` exactly.
fn jacobi(h: &ComplexMatrix) -> Result<HermitianEigen> {
    let n = h.dim();
    let mut a = h.clone();
    let mut v = ComplexMatrix::identity(n);
    let norm = a.frobenius_norm();
    let stop = 1e-17 * norm;
    let skip = 1e-19 * norm;

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= stop {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= skip {
                    continue;
                }
                let phase = apq / mag;
                let zeta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let gpp = C64::new(c, 0.0);
                let gpq = C64::new(s, 0.0);
                let gqp = -phase.conj() * s;
                let gqq = phase.conj() * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * gpp + akq * gqp;
                    a[(k, q)] = akp * gpq + akq * gqq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = gpp.conj() * apk + gqp.conj() * aqk;
                    a[(q, k)] = gpq.conj() * apk + gqq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * gpp + vkq * gqp;
                    v[(k, q)] = vkp * gpq + vkq * gqq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence(JACOBI_MAX_SWEEPS));
    }

    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // stable: ties keep solver order
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, |r, c| v[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// Reassembles `V diag(values) V^dagger`.
pub fn from_spectrum(eig: &HermitianEigen, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let n = eig.vectors.dim();
    let w: Vec<f64> = eig.values.iter().map(|&x| f(x)).collect();
    let v = &eig.vectors;
    ComplexMatrix::from_fn(n, |i, j| {
        (0..n).map(|k| v[(i, k)] * w[k] * v[(j, k)].conj()).sum()
    })
}

/// Principal square root of a Hermitian PSD matrix. Eigenvalues in
/// `[-1e-12, 0)` are clamped to zero; anything more negative is rejected.
/// Positive eigenvalues within a few ulps of zero (relative to the largest)
/// are treated as zero too.
pub fn psd_sqrt(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(h)?;
    let min = eig.values.last().copied().unwrap_or(0.0);
    if min < -PSD_CLAMP_TOL {
        return Err(Error::NotPsd(min));
    }
    // eigenvalues at rounding level are zero; their square roots would not be
    let floor = 16.0 * f64::EPSILON * eig.values[0].abs();
    Ok(from_spectrum(&eig, |x| if x <= floor { 0.0 } else { x.sqrt() }).hermitian_part())
}

/// Square roots of the four largest eigenvalues of `rho * rho_tilde`,
/// computed through the Hermitian similarity `sqrt(rho) rho_tilde sqrt(rho)`.
///
/// Fails with [`Error::RankOverflow`] when a fifth eigenvalue reaches 1e-9.
pub fn product_spectrum(rho: &ComplexMatrix, rho_tilde: &ComplexMatrix) -> Result<[f64; 4]> {
    if rho.dim() != rho_tilde.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: rho_tilde.dim(),
        });
    }
    let sr = psd_sqrt(rho)?;
    let m = (&(&sr * rho_tilde) * &sr).hermitian_part();
    let eig = hermitian_eig(&m)?;
    if let Some(&fifth) = eig.values.get(4) {
        if fifth >= RANK_OVERFLOW_TOL {
            return Err(Error::RankOverflow(fifth));
        }
    }
    let mut out = [0.0; 4];
    for (o, &x) in out.iter_mut().zip(&eig.values) {
        *o = x.max(0.0).sqrt();
    }
    Ok(out)
}

/// Singular values (descending) of `sqrt_rho * s * conj(sqrt_rho)`.
///
/// These equal the square roots of the eigenvalues of `rho * s rho^* s`, but
/// come out of the Hermitian dilation `[[0, M], [M^dagger, 0]]` directly, so
/// a vanishing eigenvalue gives a singular value near 1e-16 rather than the
/// 1e-8 that a square root of rounding noise would give.
pub fn flip_singular_values(sqrt_rho: &ComplexMatrix, s: &ComplexMatrix) -> Result<Vec<f64>> {
    let n = sqrt_rho.dim();
    if s.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: s.dim(),
        });
    }
    let m = &(sqrt_rho * s) * &sqrt_rho.conj();
    let mut dilation = ComplexMatrix::zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            dilation[(i, n + j)] = m[(i, j)];
            dilation[(n + j, i)] = m[(i, j)].conj();
        }
    }
    let eig = jacobi(&dilation)?;
    Ok(eig.values[..n].iter().map(|&x| x.max(0.0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ket(bits: &[usize], dim: usize) -> Vec<C64> {
        let mut v = vec![ZERO; dim];
        let idx = bits.iter().fold(0, |acc, &b| acc * 2 + b);
        v[idx] = ONE;
        v
    }

    fn residual(h: &ComplexMatrix, eig: &HermitianEigen) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..h.dim() {
            let v = eig.vector(k);
            let hv = h.mul_vec(&v);
            for (a, b) in hv.iter().zip(&v) {
                worst = worst.max((a - b * eig.values[k]).norm());
            }
        }
        worst
    }

    #[test]
    fn kron_identity() {
        let i4 = kron(&identity2(), &identity2()).unwrap();
        assert!(i4.approx_eq(&ComplexMatrix::identity(4), 0.0));
    }

    #[test]
    fn kron_xx_flips_00_to_11() {
        let xx = kron(&sigma_x(), &sigma_x()).unwrap();
        assert_eq!(xx.mul_vec(&ket(&[0, 0], 4)), ket(&[1, 1], 4));
    }

    #[test]
    fn kron_block_structure() {
        let m = kron(&ComplexMatrix::diag(&[1.0, 2.0]), &identity2()).unwrap();
        assert!(m.approx_eq(&ComplexMatrix::diag(&[1.0, 1.0, 2.0, 2.0]), 0.0));
    }

    #[test]
    fn kron_overflow() {
        let i4 = ComplexMatrix::identity(4);
        assert_eq!(kron(&i4, &i4), Err(Error::DimensionOverflow(16)));
    }

    #[test]
    fn eig_sigma_z() {
        let eig = hermitian_eig(&sigma_z()).unwrap();
        assert_eq!(eig.values, vec![1.0, -1.0]);
        assert!((eig.vector(0)[0].norm() - 1.0).abs() < 1e-12);
        assert!((eig.vector(1)[1].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_sigma_x() {
        let eig = hermitian_eig(&sigma_x()).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-14);
        assert!((eig.values[1] + 1.0).abs() < 1e-14);
        let plus = eig.vector(0);
        // |+> up to a global phase
        assert!((plus[0] - plus[1]).norm() < 1e-12);
        assert!((plus[0].norm() - 0.5f64.sqrt()).abs() < 1e-12);
        let minus = eig.vector(1);
        assert!((minus[0] + minus[1]).norm() < 1e-12);
    }

    #[test]
    fn eig_ghz_projector() {
        let mut ghz = vec![ZERO; 8];
        ghz[0] = C64::new(0.5f64.sqrt(), 0.0);
        ghz[7] = C64::new(0.5f64.sqrt(), 0.0);
        let rho = ComplexMatrix::outer(&ghz, &ghz);
        let eig = hermitian_eig(&rho).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-12);
        assert!(eig.values[1..].iter().all(|x| x.abs() < 1e-12));
        let v = eig.vector(0);
        let overlap: C64 = v.iter().zip(&ghz).map(|(a, b)| a.conj() * b).sum();
        assert!((overlap.norm() - 1.0).abs() < 1e-12);
        assert!(residual(&rho, &eig) < 1e-9);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let mut m = ComplexMatrix::zeros(2);
        m[(0, 1)] = ONE;
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn eig_complex_entries() {
        let h = ComplexMatrix::from_fn(4, |i, j| {
            let x = (i * 4 + j) as f64;
            if i == j {
                C64::new(x.sin(), 0.0)
            } else if i < j {
                C64::new(x.cos(), (2.0 * x).sin())
            } else {
                let y = (j * 4 + i) as f64;
                C64::new(y.cos(), -(2.0 * y).sin())
            }
        });
        let eig = hermitian_eig(&h).unwrap();
        assert!(residual(&h, &eig) < 1e-12);
        assert!(eig.vectors.unitarity_residual() < 1e-12);
        assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn sqrt_examples() {
        let i8 = ComplexMatrix::identity(8);
        assert!(psd_sqrt(&i8).unwrap().approx_eq(&i8, 1e-14));
        let d = psd_sqrt(&ComplexMatrix::diag(&[4.0, 1.0, 0.0, 0.0])).unwrap();
        assert!(d.approx_eq(&ComplexMatrix::diag(&[2.0, 1.0, 0.0, 0.0]), 1e-14));
        let v = [C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        let p = ComplexMatrix::outer(&v, &v);
        assert!(psd_sqrt(&p).unwrap().approx_eq(&p, 1e-12));
    }

    #[test]
    fn sqrt_clamps_and_rejects() {
        let tiny = ComplexMatrix::diag(&[1.0, -5e-13]);
        let r = psd_sqrt(&tiny).unwrap();
        assert_eq!(r[(1, 1)], ZERO);
        let neg = ComplexMatrix::diag(&[1.0, -1e-6]);
        assert!(matches!(psd_sqrt(&neg), Err(Error::NotPsd(_))));
    }

    #[test]
    fn product_spectrum_rank_one() {
        let mut ghz = vec![ZERO; 8];
        ghz[0] = C64::new(0.5f64.sqrt(), 0.0);
        ghz[7] = ghz[0];
        let rho = ComplexMatrix::outer(&ghz, &ghz);
        // rho_tilde = (σ_y⊗σ_y⊗σ_y) rho^* (σ_y⊗σ_y⊗σ_y)
        let yyy = sigma_y()
            .kron_unchecked(&sigma_y())
            .kron_unchecked(&sigma_y());
        let rt = &(&yyy * &rho.conj()) * &yyy;
        let spec = product_spectrum(&rho, &rt).unwrap();
        assert!(spec[1..].iter().all(|&x| x < 1e-7));
    }

    #[test]
    fn product_spectrum_detects_rank_overflow() {
        let mixed = ComplexMatrix::identity(8).scale_real(0.125);
        assert!(matches!(
            product_spectrum(&mixed, &mixed),
            Err(Error::RankOverflow(_))
        ));
    }
}
