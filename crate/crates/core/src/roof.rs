//! Numerical convex roof of the pure-state concurrence.
//!
//! Every decomposition of a rank-`r` state into `m >= r` members is
//! `phi_i = sum_j V[i,j] sqrt(mu_j) e_j` for an `m x r` isometry `V`, where
//! `(mu_j, e_j)` are the nonzero eigenpairs of rho. The estimator searches
//! over `V` with random restarts and cyclic two-row complex rotations; a
//! rotation of rows `i, j` only changes members `i` and `j`, so each trial
//! costs two member evaluations.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::concurrence::weighted_c3;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, ComplexMatrix, C64, ZERO};
use crate::par::map_indexed;
use crate::states::{haar_unitary, stream_rng, DensityMatrix, PureState, DIM};

pub const RANK_TOL: f64 = 1e-10;
pub const ISOMETRY_TOL: f64 = 1e-10;
pub const SWEEP_TOL: f64 = 1e-8;
pub const MAX_SWEEPS: usize = 200;

const THETA_GRID: usize = 8;
const PHASE_GRID: usize = 4;
const GOLDEN_TOL: f64 = 1e-9;
const MIN_WEIGHT: f64 = 1e-15;

/// An `m x r` matrix with orthonormal columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Isometry {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl Isometry {
    /// Row-major entries; checks `V^dagger V = I` within 1e-10.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols || cols == 0 || rows < cols {
            return Err(Error::Precondition(format!(
                "an isometry needs rows >= cols >= 1 and rows*cols entries ({rows}x{cols}, {} given)",
                data.len()
            )));
        }
        let v = Self { rows, cols, data };
        let mut worst: f64 = 0.0;
        for a in 0..cols {
            for b in 0..cols {
                let dot: C64 = (0..rows).map(|i| v.get(i, a).conj() * v.get(i, b)).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - want).norm());
            }
        }
        if worst > ISOMETRY_TOL {
            return Err(Error::Precondition(format!(
                "columns are not orthonormal (residual {worst:e})"
            )));
        }
        Ok(v)
    }

    /// `[I_r; 0]`.
    pub fn padded_identity(rows: usize, cols: usize) -> Result<Self> {
        let mut data = vec![ZERO; rows * cols];
        for i in 0..cols.min(rows) {
            data[i * cols + i] = C64::new(1.0, 0.0);
        }
        Self::new(rows, cols, data)
    }

    /// First `cols` columns of a Haar unitary.
    pub fn haar(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Result<Self> {
        let u = haar_unitary(rows, rng);
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(u[(i, j)]);
            }
        }
        Self::new(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }
}

/// A pure-state decomposition `rho = sum p_i |psi_i><psi_i|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub weights: Vec<f64>,
    pub states: Vec<PureState>,
}

impl Decomposition {
    fn from_members(members: &[[C64; DIM]]) -> Self {
        let mut weights = Vec::new();
        let mut states = Vec::new();
        for phi in members {
            let p: f64 = phi.iter().map(|z| z.norm_sqr()).sum();
            if p <= MIN_WEIGHT {
                continue;
            }
            weights.push(p);
            states.push(PureState::normalized(*phi).expect("nonzero member"));
        }
        Self { weights, states }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(DIM);
        for (p, psi) in self.weights.iter().zip(&self.states) {
            let a = psi.amplitudes();
            acc = &acc + &ComplexMatrix::outer(a, a).scale_real(*p);
        }
        acc
    }

    /// max |sum p_i |psi_i><psi_i| - rho|.
    pub fn reconstruction_residual(&self, rho: &DensityMatrix) -> f64 {
        self.reconstruct().max_abs_diff(rho.matrix())
    }

    /// `sum p_i C3(psi_i)`.
    pub fn average_c3(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.states)
            .map(|(p, psi)| p * crate::concurrence::c3_pure(psi))
            .sum()
    }
}

/// Nonzero eigenpairs of rho as the vectors `sqrt(mu_j) e_j`.
fn scaled_eigenvectors(rho: &DensityMatrix) -> Result<Vec<[C64; DIM]>> {
    if rho.dim() != DIM {
        return Err(Error::DimensionMismatch {
            expected: DIM,
            got: rho.dim(),
        });
    }
    let eig = hermitian_eig(rho.matrix())?;
    Ok(eig
        .values
        .iter()
        .enumerate()
        .filter(|(_, &mu)| mu > RANK_TOL)
        .map(|(k, &mu)| {
            let s = mu.sqrt();
            std::array::from_fn(|i| eig.vectors[(i, k)] * s)
        })
        .collect())
}

fn members(basis: &[[C64; DIM]], v: &Isometry) -> Result<Vec<[C64; DIM]>> {
    if v.cols() != basis.len() {
        return Err(Error::Precondition(format!(
            "isometry has {} columns but rho has rank {}",
            v.cols(),
            basis.len()
        )));
    }
    Ok((0..v.rows())
        .map(|i| {
            let mut phi = [ZERO; DIM];
            for (j, b) in basis.iter().enumerate() {
                let c = v.get(i, j);
                for (x, y) in phi.iter_mut().zip(b) {
                    *x += c * y;
                }
            }
            phi
        })
        .collect())
}

pub fn decomposition_from_isometry(rho: &DensityMatrix, v: &Isometry) -> Result<Decomposition> {
    let basis = scaled_eigenvectors(rho)?;
    Ok(Decomposition::from_members(&members(&basis, v)?))
}

/// Average pure-state concurrence of the decomposition induced by `v`.
pub fn roof_objective(rho: &DensityMatrix, v: &Isometry) -> Result<f64> {
    let basis = scaled_eigenvectors(rho)?;
    Ok(members(&basis, v)?.iter().map(weighted_c3).sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoofOptions {
    pub restarts: usize,
    /// Largest decomposition size tried; `None` means `min(2r, 8)`.
    pub max_members: Option<usize>,
    pub seed: u64,
}

impl Default for RoofOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_members: None,
            seed: 0,
        }
    }
}

/// One optimizer run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartLog {
    pub members: usize,
    /// `None` for the start at the eigendecomposition.
    pub restart: Option<usize>,
    pub start_value: f64,
    pub final_value: f64,
    pub sweeps: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoofEstimate {
    pub value: f64,
    pub rank: usize,
    pub best: Decomposition,
    pub trace: Vec<RestartLog>,
}

/// Runs the restart schedule and returns the smallest average concurrence
/// found. Each `(members, restart)` pair draws from its own ChaCha stream, so
/// a run with more restarts revisits every start of a run with fewer.
pub fn estimate_convex_roof(rho: &DensityMatrix, opts: &RoofOptions) -> Result<RoofEstimate> {
    if opts.restarts == 0 {
        return Err(Error::Precondition("at least one restart is required".into()));
    }
    let basis = scaled_eigenvectors(rho)?;
    let rank = basis.len();
    if rank == 0 {
        return Err(Error::InvalidState("density matrix has no eigenvalue above 1e-10".into()));
    }
    let max_m = opts.max_members.unwrap_or((2 * rank).min(DIM));
    if max_m < rank || max_m > DIM {
        return Err(Error::Precondition(format!(
            "decomposition size cap {max_m} must lie in {rank}..=8"
        )));
    }

    let start = Isometry::padded_identity(rank, rank)?;
    let mut runs = vec![optimize(members(&basis, &start)?, rank, None)];

    let jobs: Vec<(usize, usize)> = (rank..=max_m)
        .flat_map(|m| (0..opts.restarts).map(move |r| (m, r)))
        .collect();
    let seeded = map_indexed(jobs.len(), |idx| {
        let (m, restart) = jobs[idx];
        let mut rng = stream_rng(opts.seed, ((m as u64) << 32) | restart as u64);
        let v = Isometry::haar(m, rank, &mut rng)?;
        Ok(optimize(members(&basis, &v)?, m, Some(restart)))
    });
    for run in seeded {
        runs.push(run?);
    }

    // first strict minimum in job order
    let mut best: Option<(f64, Vec<[C64; DIM]>)> = None;
    let mut trace = Vec::with_capacity(runs.len());
    for (log, phis) in runs {
        if best.as_ref().is_none_or(|(v, _)| log.final_value < *v) {
            best = Some((log.final_value, phis));
        }
        trace.push(log);
    }

    let (value, phis) = best.expect("at least one run");
    Ok(RoofEstimate {
        value,
        rank,
        best: Decomposition::from_members(&phis),
        trace,
    })
}

fn total(phis: &[[C64; DIM]]) -> f64 {
    phis.iter().map(weighted_c3).sum()
}

fn optimize(mut phis: Vec<[C64; DIM]>, m: usize, restart: Option<usize>) -> (RestartLog, Vec<[C64; DIM]>) {
    let start_value = total(&phis);
    let mut value = start_value;
    let mut sweeps = 0;
    let mut converged = m < 2;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        for i in 0..m {
            for j in i + 1..m {
                improve_pair(&mut phis, i, j);
            }
        }
        let next = total(&phis);
        if value - next < SWEEP_TOL {
            converged = true;
        }
        value = next;
    }
    let log = RestartLog {
        members: m,
        restart,
        start_value,
        final_value: value,
        sweeps,
        converged,
    };
    (log, phis)
}

fn rotate(a: &[C64; DIM], b: &[C64; DIM], theta: f64, phase: f64) -> ([C64; DIM], [C64; DIM]) {
    let (s, c) = theta.sin_cos();
    let e = C64::from_polar(1.0, phase);
    let es = e * s;
    let ecs = e.conj() * s;
    let ra = std::array::from_fn(|k| a[k] * c + es * b[k]);
    let rb = std::array::from_fn(|k| b[k] * c - ecs * a[k]);
    (ra, rb)
}

/// Best 2x2 unitary mixing of members `i` and `j`: coarse grid over the
/// angle and relative phase, then golden-section refinement of each.
fn improve_pair(phis: &mut [[C64; DIM]], i: usize, j: usize) {
    let (a, b) = (phis[i], phis[j]);
    let pair_value = |theta: f64, phase: f64| {
        let (ra, rb) = rotate(&a, &b, theta, phase);
        weighted_c3(&ra) + weighted_c3(&rb)
    };
    let current = weighted_c3(&a) + weighted_c3(&b);

    let half_pi = std::f64::consts::FRAC_PI_2;
    let d_theta = std::f64::consts::PI / THETA_GRID as f64;
    let d_phase = std::f64::consts::PI / PHASE_GRID as f64;
    let (mut theta, mut phase, mut val) = (0.0, 0.0, current);
    for ti in 0..THETA_GRID {
        let t = -half_pi + ti as f64 * d_theta;
        for pi in 0..PHASE_GRID {
            let p = pi as f64 * d_phase;
            let v = pair_value(t, p);
            if v < val {
                (theta, phase, val) = (t, p, v);
            }
        }
    }
    for _ in 0..2 {
        let (t, v) = golden_min(|t| pair_value(t, phase), theta - d_theta, theta + d_theta);
        if v < val {
            (theta, val) = (t, v);
        }
        let (p, v) = golden_min(|p| pair_value(theta, p), phase - d_phase, phase + d_phase);
        if v < val {
            (phase, val) = (p, v);
        }
    }
    if val < current {
        let (ra, rb) = rotate(&a, &b, theta, phase);
        phis[i] = ra;
        phis[j] = rb;
    }
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > GOLDEN_TOL {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}
