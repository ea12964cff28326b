//! Three-qubit pure states and density matrices.
//!
//! Basis convention: |b1 b2 b3> has index `4*b1 + 2*b2 + b3`, so qubit 1 is
//! the most significant bit. Every cut, permutation and closed form in the
//! crate depends on this ordering.

use std::fmt;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, ComplexMatrix, C64, HERMITIAN_TOL, ZERO};

pub const N_QUBITS: usize = 3;
pub const DIM: usize = 8;
pub const STATE_TOL: f64 = 1e-10;

/// A qubit label in `1..=3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Qubit(u8);

impl Qubit {
    pub const Q1: Qubit = Qubit(1);
    pub const Q2: Qubit = Qubit(2);
    pub const Q3: Qubit = Qubit(3);
    pub const ALL: [Qubit; 3] = [Qubit::Q1, Qubit::Q2, Qubit::Q3];

    pub fn new(label: u8) -> Result<Self> {
        if (1..=3).contains(&label) {
            Ok(Qubit(label))
        } else {
            Err(Error::InvalidQubits(format!("qubit {label} is not in 1..=3")))
        }
    }

    pub fn label(self) -> u8 {
        self.0
    }

    /// Zero-based slot position in the tensor product.
    pub fn slot(self) -> usize {
        (self.0 - 1) as usize
    }

    /// Bit of this qubit in a three-qubit basis index.
    pub fn bit(self, index: usize) -> usize {
        (index >> (N_QUBITS - self.0 as usize)) & 1
    }
}

impl TryFrom<u8> for Qubit {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        Qubit::new(v)
    }
}

impl From<Qubit> for u8 {
    fn from(q: Qubit) -> u8 {
        q.0
    }
}

impl fmt::Display for Qubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

/// Normalized three-qubit state vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    amplitudes: [C64; DIM],
}

impl PureState {
    /// Validates the norm to within 1e-10.
    pub fn new(amplitudes: [C64; DIM]) -> Result<Self> {
        let norm2: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "squared norm {norm2} differs from 1"
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(mut amplitudes: [C64; DIM]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState("zero or non-finite vector".into()));
        }
        for z in &mut amplitudes {
            *z /= norm;
        }
        Ok(Self { amplitudes })
    }

    pub fn basis(index: usize) -> Self {
        let mut amplitudes = [ZERO; DIM];
        amplitudes[index] = C64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn amplitudes(&self) -> &[C64; DIM] {
        &self.amplitudes
    }
}

/// (|000> + |111>)/√2.
pub fn ghz() -> PureState {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut amplitudes = [ZERO; DIM];
    amplitudes[0] = h;
    amplitudes[7] = h;
    PureState { amplitudes }
}

/// Index of the basis state |b1 b2 b3>.
pub fn basis_index(b1: usize, b2: usize, b3: usize) -> usize {
    4 * b1 + 2 * b2 + b3
}

/// Trace-one positive semidefinite matrix on 1, 2 or 3 qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Checks Hermiticity, unit trace and positivity, all within 1e-10.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matches!(matrix.dim(), 2 | 4 | 8) {
            return Err(Error::InvalidState(format!(
                "dimension {} is not 2, 4 or 8",
                matrix.dim()
            )));
        }
        let herm = matrix.hermiticity_residual();
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = matrix.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = *hermitian_eig(&matrix)?.values.last().unwrap();
        if min < -STATE_TOL {
            return Err(Error::NotPsd(min));
        }
        Ok(Self {
            matrix: matrix.hermitian_part(),
        })
    }

    /// Wraps a matrix produced by a trace- and positivity-preserving map.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        Self {
            matrix: matrix.hermitian_part(),
        }
    }

    /// I/dim.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_trusted(ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64))
    }

    /// Convex combination `sum w_i rho_i`; weights must be non-negative and sum to 1.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Precondition("empty mixture".into()))?;
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if parts.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > STATE_TOL {
            return Err(Error::Precondition(format!(
                "mixture weights must be non-negative and sum to 1 (sum {total})"
            )));
        }
        let dim = first.1.dim();
        let mut acc = ComplexMatrix::zeros(dim);
        for (w, rho) in parts {
            if rho.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: rho.dim(),
                });
            }
            acc = &acc + &rho.matrix.scale_real(*w);
        }
        Ok(Self::from_trusted(acc))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Tr rho^2.
    pub fn purity(&self) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += self.matrix[(i, j)].norm_sqr();
            }
        }
        acc
    }

    /// Eigenvalues, descending.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        Ok(hermitian_eig(&self.matrix)?.values)
    }

    /// Number of eigenvalues above `tol`.
    pub fn rank(&self, tol: f64) -> Result<usize> {
        Ok(self.spectrum()?.iter().filter(|&&x| x > tol).count())
    }

    /// U rho U^dagger for a unitary on the full space.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: u.dim(),
            });
        }
        let res = u.unitarity_residual();
        if res > STATE_TOL {
            return Err(Error::NotUnitary(res));
        }
        Ok(Self::from_trusted(&(u * &self.matrix) * &u.adjoint()))
    }
}

/// |psi><psi|.
pub fn pure_density(psi: &PureState) -> DensityMatrix {
    DensityMatrix::from_trusted(ComplexMatrix::outer(&psi.amplitudes, &psi.amplitudes))
}

fn check_local_unitaries(us: &[ComplexMatrix; 3]) -> Result<ComplexMatrix> {
    for u in us {
        if u.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: u.dim(),
            });
        }
        let res = u.unitarity_residual();
        if res > STATE_TOL {
            return Err(Error::NotUnitary(res));
        }
    }
    Ok(us[0].kron_unchecked(&us[1]).kron_unchecked(&us[2]))
}

/// (U1⊗U2⊗U3)|psi>.
pub fn apply_local_unitary(psi: &PureState, us: &[ComplexMatrix; 3]) -> Result<PureState> {
    let u = check_local_unitaries(us)?;
    let out = u.mul_vec(&psi.amplitudes);
    PureState::normalized(out.try_into().expect("dimension 8"))
}

/// (U1⊗U2⊗U3) rho (U1⊗U2⊗U3)^dagger.
pub fn apply_local_unitary_density(
    rho: &DensityMatrix,
    us: &[ComplexMatrix; 3],
) -> Result<DensityMatrix> {
    let u = check_local_unitaries(us)?;
    rho.conjugate_by(&u)
}

fn require_three_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != DIM {
        return Err(Error::DimensionMismatch {
            expected: DIM,
            got: rho.dim(),
        });
    }
    Ok(())
}

/// Reduced state on `keep`, with kept qubits in ascending label order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[Qubit]) -> Result<DensityMatrix> {
    require_three_qubits(rho)?;
    let mut keep = keep.to_vec();
    keep.sort();
    keep.dedup();
    if keep.is_empty() || keep.len() == N_QUBITS {
        return Err(Error::InvalidQubits(
            "keep-set must be a non-empty proper subset of {1,2,3}".into(),
        ));
    }
    let traced: Vec<Qubit> = Qubit::ALL.into_iter().filter(|q| !keep.contains(q)).collect();
    let reduced_index = |full: usize| keep.iter().fold(0, |acc, q| acc * 2 + q.bit(full));
    let traced_index = |full: usize| traced.iter().fold(0, |acc, q| acc * 2 + q.bit(full));

    let dim = 1 << keep.len();
    let mut out = ComplexMatrix::zeros(dim);
    let m = rho.matrix();
    for r in 0..DIM {
        for c in 0..DIM {
            if traced_index(r) == traced_index(c) {
                out[(reduced_index(r), reduced_index(c))] += m[(r, c)];
            }
        }
    }
    Ok(DensityMatrix::from_trusted(out))
}

/// Maps an index of the relabeled space to the original one. Slot `i` of the
/// relabeled space holds original qubit `perm[i]`.
fn original_index(new_index: usize, perm: &[Qubit; 3]) -> usize {
    let mut old = 0;
    for (slot, q) in perm.iter().enumerate() {
        let bit = (new_index >> (N_QUBITS - 1 - slot)) & 1;
        old |= bit << (N_QUBITS - q.label() as usize);
    }
    old
}

fn check_permutation(perm: &[Qubit; 3]) -> Result<()> {
    let mut seen = [false; 3];
    for q in perm {
        if std::mem::replace(&mut seen[q.slot()], true) {
            return Err(Error::InvalidQubits(format!(
                "{:?} is not a permutation of (1,2,3)",
                perm.map(Qubit::label)
            )));
        }
    }
    Ok(())
}

/// Relabels qubits: slot `i` of the result holds original qubit `perm[i]`.
pub fn permute_qubits(rho: &DensityMatrix, perm: &[Qubit; 3]) -> Result<DensityMatrix> {
    require_three_qubits(rho)?;
    check_permutation(perm)?;
    let map: Vec<usize> = (0..DIM).map(|i| original_index(i, perm)).collect();
    let m = rho.matrix();
    Ok(DensityMatrix {
        matrix: ComplexMatrix::from_fn(DIM, |i, j| m[(map[i], map[j])]),
    })
}

/// Same relabeling as [`permute_qubits`] on a state vector.
pub fn permute_pure(psi: &PureState, perm: &[Qubit; 3]) -> Result<PureState> {
    check_permutation(perm)?;
    let mut amplitudes = [ZERO; DIM];
    for (i, a) in amplitudes.iter_mut().enumerate() {
        *a = psi.amplitudes[original_index(i, perm)];
    }
    Ok(PureState { amplitudes })
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent generator for work item `stream` under a shared seed.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Haar-random pure state from a normalized complex Gaussian vector.
pub fn haar_pure_state<R: Rng + ?Sized>(rng: &mut R) -> PureState {
    loop {
        let amplitudes = std::array::from_fn(|_| complex_gaussian(rng));
        if let Ok(psi) = PureState::normalized(amplitudes) {
            return psi;
        }
    }
}

/// Mixture of `rank` Haar pure states with flat-Dirichlet weights, resampled
/// until exactly `rank` eigenvalues exceed 1e-10.
pub fn random_density_with<R: Rng + ?Sized>(rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    if !(1..=DIM).contains(&rank) {
        return Err(Error::Precondition(format!("rank {rank} is not in 1..=8")));
    }
    loop {
        let weights: Vec<f64> = (0..rank).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = weights.iter().sum();
        let mut acc = ComplexMatrix::zeros(DIM);
        for w in &weights {
            let psi = haar_pure_state(rng);
            acc = &acc + &pure_density(&psi).matrix.scale_real(w / total);
        }
        let rho = DensityMatrix::from_trusted(acc);
        if rho.rank(STATE_TOL)? == rank {
            return Ok(rho);
        }
    }
}

/// Haar unitary: Gram-Schmidt on a complex Gaussian matrix, which leaves the
/// triangular factor with a positive diagonal.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = (0..dim)
        .map(|_| (0..dim).map(|_| complex_gaussian(rng)).collect())
        .collect();
    for j in 0..dim {
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for k in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let proj: C64 = done[k].iter().zip(&rest[0]).map(|(a, b)| a.conj() * b).sum();
                for (x, q) in rest[0].iter_mut().zip(&done[k]) {
                    *x -= proj * q;
                }
            }
        }
        let norm: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for x in &mut cols[j] {
            *x /= norm;
        }
    }
    ComplexMatrix::from_fn(dim, |i, j| cols[j][i])
}

/// Three independent Haar unitaries on single qubits.
pub fn haar_local_unitaries<R: Rng + ?Sized>(rng: &mut R) -> [ComplexMatrix; 3] {
    std::array::from_fn(|_| haar_unitary(2, rng))
}

/// Random GHZ-type state: a Haar local-unitary image of the GHZ state.
pub fn random_ghz_type<R: Rng + ?Sized>(rng: &mut R) -> PureState {
    let us = haar_local_unitaries(rng);
    apply_local_unitary(&ghz(), &us).expect("Haar unitaries are unitary")
}

pub fn random_pure_state(seed: u64) -> PureState {
    haar_pure_state(&mut seeded_rng(seed))
}

pub fn random_density(rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_density_with(rank, &mut seeded_rng(seed))
}

pub fn random_unitary(dim: usize, seed: u64) -> ComplexMatrix {
    haar_unitary(dim, &mut seeded_rng(seed))
}
