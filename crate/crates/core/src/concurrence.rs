//! Three-qubit concurrence: the pure-state value and the lower bound τ₃
//! assembled from Wootters-style terms on the three bipartite cuts.
//!
//! For a cut `ab|c` the state is relabeled so that the pair occupies the two
//! leading slots. Each of the six SO(4) generators `L_k` on the pair,
//! combined with σ_y on the single qubit, gives a spin-flip operator
//! `S_k = L_k ⊗ σ_y` of rank 4. The term `C_k` is
//! `max(0, λ1 - λ2 - λ3 - λ4)` over the four largest square-rooted
//! eigenvalues of `ρ S_k ρ* S_k`.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{flip_singular_values, psd_sqrt, sigma_y, ComplexMatrix, C64, I, RANK_OVERFLOW_TOL};
use crate::states::{partial_trace, permute_qubits, pure_density, DensityMatrix, PureState, Qubit, DIM};

pub const N_GENERATORS: usize = 6;

/// Index pairs `(k, l)` of the SO(4) generators, 1-based.
pub const GENERATOR_PAIRS: [(usize, usize); N_GENERATORS] =
    [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];

/// A bipartition `ab|c` of the three qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Cut {
    pair: (Qubit, Qubit),
    single: Qubit,
}

impl Cut {
    pub const C12_3: Cut = Cut {
        pair: (Qubit::Q1, Qubit::Q2),
        single: Qubit::Q3,
    };
    pub const C13_2: Cut = Cut {
        pair: (Qubit::Q1, Qubit::Q3),
        single: Qubit::Q2,
    };
    pub const C23_1: Cut = Cut {
        pair: (Qubit::Q2, Qubit::Q3),
        single: Qubit::Q1,
    };
    pub const CANONICAL: [Cut; 3] = [Cut::C12_3, Cut::C13_2, Cut::C23_1];

    /// The pair may be given in either order.
    pub fn new(a: Qubit, b: Qubit, c: Qubit) -> Result<Self> {
        if a == b || a == c || b == c {
            return Err(Error::InvalidQubits(format!(
                "cut {}{}|{} repeats a qubit",
                a.label(),
                b.label(),
                c.label()
            )));
        }
        Ok(Cut {
            pair: (a, b),
            single: c,
        })
    }

    /// The cut with the single qubit `c` and the pair in ascending order.
    pub fn isolating(c: Qubit) -> Self {
        let mut rest = Qubit::ALL.into_iter().filter(|&q| q != c);
        let a = rest.next().unwrap();
        let b = rest.next().unwrap();
        Cut {
            pair: (a, b),
            single: c,
        }
    }

    pub fn pair(&self) -> (Qubit, Qubit) {
        self.pair
    }

    pub fn single(&self) -> Qubit {
        self.single
    }

    /// Relabeling that puts the pair in the leading slots.
    pub fn permutation(&self) -> [Qubit; 3] {
        [self.pair.0, self.pair.1, self.single]
    }
}

impl fmt::Display for Cut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}|{}",
            self.pair.0.label(),
            self.pair.1.label(),
            self.single.label()
        )
    }
}

impl FromStr for Cut {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidQubits(format!("'{s}' is not a cut like 12|3"));
        let b = s.as_bytes();
        if b.len() != 4 || b[2] != b'|' {
            return Err(bad());
        }
        let q = |c: u8| -> Result<Qubit> {
            if c.is_ascii_digit() {
                Qubit::new(c - b'0')
            } else {
                Err(bad())
            }
        };
        Cut::new(q(b[0])?, q(b[1])?, q(b[3])?)
    }
}

impl TryFrom<String> for Cut {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Cut> for String {
    fn from(c: Cut) -> String {
        c.to_string()
    }
}

/// `max(0, 2*max(v) - sum(v))` for one to four non-negative values; fewer
/// values are padded with zeros. For sorted input this is
/// `max(0, v1 - v2 - v3 - v4)`, and with two values it is `|w - x|`.
pub fn f_func(values: &[f64]) -> Result<f64> {
    if values.is_empty() || values.len() > 4 {
        return Err(Error::Precondition(format!(
            "f takes one to four values, got {}",
            values.len()
        )));
    }
    if let Some(v) = values.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::Precondition(format!("f requires non-negative input, got {v}")));
    }
    Ok(f_raw(values))
}

pub(crate) fn f_raw(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(0.0, f64::max);
    let sum: f64 = values.iter().sum();
    (2.0 * max - sum).max(0.0)
}

fn levi_civita(idx: [usize; 4]) -> f64 {
    let mut sign = 1.0;
    for i in 0..4 {
        for j in i + 1..4 {
            match idx[i].cmp(&idx[j]) {
                std::cmp::Ordering::Equal => return 0.0,
                std::cmp::Ordering::Greater => sign = -sign,
                std::cmp::Ordering::Less => {}
            }
        }
    }
    sign
}

/// The six SO(4) generators `(L_kl)_mn = -i ε_klmn`, ordered as
/// [`GENERATOR_PAIRS`].
pub fn so4_generators() -> [ComplexMatrix; N_GENERATORS] {
    GENERATOR_PAIRS.map(|(k, l)| {
        ComplexMatrix::from_fn(4, |m, n| -I * levi_civita([k, l, m + 1, n + 1]))
    })
}

fn flip_operator_cache() -> &'static [ComplexMatrix; N_GENERATORS] {
    static CACHE: OnceLock<[ComplexMatrix; N_GENERATORS]> = OnceLock::new();
    CACHE.get_or_init(|| so4_generators().map(|l| l.kron_unchecked(&sigma_y())))
}

/// The six `S_k = L_k ⊗ σ_y` for a cut, expressed in the relabeled basis
/// where the pair occupies slots 1 and 2.
#[derive(Clone, Debug)]
pub struct FlipOperatorSet {
    pub cut: Cut,
    pub operators: [ComplexMatrix; N_GENERATORS],
}

pub fn flip_operators(cut: Cut) -> FlipOperatorSet {
    FlipOperatorSet {
        cut,
        operators: flip_operator_cache().clone(),
    }
}

/// Pipeline results for the three canonical cuts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutReport {
    pub cut: Cut,
    /// `C_k` for k = 1..6.
    pub terms: [f64; N_GENERATORS],
    /// `sqrt(sum_k C_k^2)`.
    pub concurrence: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcurrenceReport {
    pub cuts: [CutReport; 3],
    pub tau3: f64,
    /// Only present for pure inputs.
    pub c3_pure: Option<f64>,
}

impl ConcurrenceReport {
    pub fn concurrence(&self, cut: Cut) -> Option<f64> {
        self.cuts.iter().find(|r| r.cut == cut).map(|r| r.concurrence)
    }

    /// (C^{12|3}, C^{13|2}, C^{23|1}).
    pub fn triple(&self) -> [f64; 3] {
        [
            self.cuts[0].concurrence,
            self.cuts[1].concurrence,
            self.cuts[2].concurrence,
        ]
    }
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

/// sqrt of the cut-relabeled state, shared by all six terms of a cut.
fn cut_sqrt(rho: &DensityMatrix, cut: Cut) -> Result<ComplexMatrix> {
    require_three_qubits(rho)?;
    psd_sqrt(permute_qubits(rho, &cut.permutation())?.matrix())
}

fn term_from_sqrt(sqrt_rho: &ComplexMatrix, s: &ComplexMatrix) -> Result<f64> {
    let sv = flip_singular_values(sqrt_rho, s)?;
    let fifth = sv[4] * sv[4];
    if fifth >= RANK_OVERFLOW_TOL {
        return Err(Error::RankOverflow(fifth));
    }
    Ok(f_raw(&sv[..4]))
}

/// `C_k` on a cut, `k` in 1..=6.
pub fn c_k_term(rho: &DensityMatrix, cut: Cut, k: usize) -> Result<f64> {
    if !(1..=N_GENERATORS).contains(&k) {
        return Err(Error::Precondition(format!("generator index {k} not in 1..=6")));
    }
    let sr = cut_sqrt(rho, cut)?;
    term_from_sqrt(&sr, &flip_operator_cache()[k - 1])
}

fn cut_report(rho: &DensityMatrix, cut: Cut) -> Result<CutReport> {
    let sr = cut_sqrt(rho, cut)?;
    let mut terms = [0.0; N_GENERATORS];
    for (t, s) in terms.iter_mut().zip(flip_operator_cache()) {
        *t = term_from_sqrt(&sr, s)?;
    }
    let concurrence = terms.iter().map(|t| t * t).sum::<f64>().sqrt();
    Ok(CutReport {
        cut,
        terms,
        concurrence,
    })
}

/// `C^{ab|c} = sqrt(sum_k C_k^2)`.
pub fn bipartite_concurrence(rho: &DensityMatrix, cut: Cut) -> Result<f64> {
    Ok(cut_report(rho, cut)?.concurrence)
}

/// τ₃ with all 18 terms.
pub fn tau3(rho: &DensityMatrix) -> Result<ConcurrenceReport> {
    let cuts = [
        cut_report(rho, Cut::C12_3)?,
        cut_report(rho, Cut::C13_2)?,
        cut_report(rho, Cut::C23_1)?,
    ];
    let sum: f64 = cuts.iter().map(|c| c.concurrence * c.concurrence).sum();
    Ok(ConcurrenceReport {
        cuts,
        tau3: (sum / 3.0).sqrt(),
        c3_pure: None,
    })
}

/// τ₃ of |psi><psi| together with the pure-state concurrence.
pub fn tau3_pure(psi: &PureState) -> Result<ConcurrenceReport> {
    let mut report = tau3(&pure_density(psi))?;
    report.c3_pure = Some(c3_pure(psi));
    Ok(report)
}

/// `sqrt(1 - (1/3) sum_i Tr rho_i^2)` over the single-qubit marginals.
pub fn c3_pure(psi: &PureState) -> f64 {
    let rho = pure_density(psi);
    let purity_sum: f64 = Qubit::ALL
        .iter()
        .map(|&q| partial_trace(&rho, &[q]).expect("single-qubit marginal").purity())
        .sum();
    (1.0 - purity_sum / 3.0).max(0.0).sqrt()
}

/// `p * C3(phi/|phi|)` for an unnormalized vector with `p = |phi|^2`,
/// evaluated without normalizing: `sqrt(p^2 - (1/3) sum_i Tr sigma_i^2)`
/// where `sigma_i` are the unnormalized marginals.
pub fn weighted_c3(phi: &[C64; DIM]) -> f64 {
    let p: f64 = phi.iter().map(|z| z.norm_sqr()).sum();
    let mut purity_sum = 0.0;
    for shift in 0..3 {
        let bit = 1 << shift;
        let (mut s00, mut s11, mut s01) = (0.0, 0.0, C64::new(0.0, 0.0));
        for i in 0..DIM {
            if i & bit != 0 {
                continue;
            }
            let a = phi[i];
            let b = phi[i | bit];
            s00 += a.norm_sqr();
            s11 += b.norm_sqr();
            s01 += a * b.conj();
        }
        purity_sum += s00 * s00 + s11 * s11 + 2.0 * s01.norm_sqr();
    }
    (p * p - purity_sum / 3.0).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;
    use crate::states::{ghz, random_pure_state};

    #[test]
    fn f_examples() {
        for w in [0.0, 0.3, 2.0] {
            assert_eq!(f_func(&[w, w, w, w]).unwrap(), 0.0);
        }
        assert_eq!(f_func(&[0.75, 0.25]).unwrap(), 0.5);
        assert_eq!(f_func(&[0.25, 0.75]).unwrap(), 0.5);
        assert_eq!(f_func(&[0.5, 0.2, 0.2, 0.2]).unwrap(), 0.0);
        assert_eq!(f_func(&[0.9, 0.1, 0.0, 0.0]).unwrap(), f_func(&[0.9, 0.1]).unwrap());
        assert!(f_func(&[-0.1, 0.2]).is_err());
        assert!(f_func(&[]).is_err());
        assert!(f_func(&[1.0; 5]).is_err());
    }

    #[test]
    fn levi_civita_signs() {
        assert_eq!(levi_civita([1, 2, 3, 4]), 1.0);
        assert_eq!(levi_civita([2, 1, 3, 4]), -1.0);
        assert_eq!(levi_civita([4, 3, 2, 1]), 1.0);
        assert_eq!(levi_civita([1, 1, 3, 4]), 0.0);
    }

    #[test]
    fn generator_structure() {
        let gens = so4_generators();
        let l12 = &gens[0];
        for m in 0..4 {
            for n in 0..4 {
                let want = match (m, n) {
                    (2, 3) => -I,
                    (3, 2) => I,
                    _ => ZERO,
                };
                assert_eq!(l12[(m, n)], want, "({m},{n})");
            }
        }
        for l in &gens {
            assert!(l.is_hermitian(0.0));
            assert_eq!(l.trace(), ZERO);
            let sq = l * l;
            // diagonal 0/1 projector of rank 2
            let mut ones = 0;
            for i in 0..4 {
                for j in 0..4 {
                    let z = sq[(i, j)];
                    if i == j {
                        assert!(z == ZERO || z == C64::new(1.0, 0.0));
                        ones += (z != ZERO) as usize;
                    } else {
                        assert_eq!(z, ZERO);
                    }
                }
            }
            assert_eq!(ones, 2);
            for z in l.as_slice() {
                assert!(*z == ZERO || *z == I || *z == -I);
            }
        }
    }

    #[test]
    fn flip_operators_hermitian_rank_four() {
        let set = flip_operators(Cut::C12_3);
        for s in &set.operators {
            assert!(s.is_hermitian(1e-12));
            let eig = crate::linalg::hermitian_eig(s).unwrap();
            assert_eq!(eig.values.iter().filter(|v| v.abs() > 1e-12).count(), 4);
        }
    }

    #[test]
    fn cut_parsing() {
        assert_eq!("12|3".parse::<Cut>().unwrap(), Cut::C12_3);
        assert_eq!("21|3".parse::<Cut>().unwrap().permutation(), [Qubit::Q2, Qubit::Q1, Qubit::Q3]);
        assert!("11|3".parse::<Cut>().is_err());
        assert!("12-3".parse::<Cut>().is_err());
        assert_eq!(Cut::isolating(Qubit::Q2), Cut::C13_2);
        assert_eq!(Cut::C23_1.to_string(), "23|1");
    }

    #[test]
    fn ghz_single_term_per_cut() {
        let rho = pure_density(&ghz());
        for cut in Cut::CANONICAL {
            let report = cut_report(&rho, cut).unwrap();
            let positive = report.terms.iter().filter(|&&t| t > 1e-9).count();
            assert_eq!(positive, 1, "{cut}: {:?}", report.terms);
            let sq: f64 = report.terms.iter().map(|t| t * t).sum();
            assert!((sq - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ghz_golden_values() {
        let report = tau3_pure(&ghz()).unwrap();
        assert!((report.tau3 - 1.0).abs() < 1e-12);
        for c in report.triple() {
            assert!((c - 1.0).abs() < 1e-12);
        }
        assert!((report.c3_pure.unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn separable_states_vanish() {
        let mixed = DensityMatrix::maximally_mixed(8);
        let report = tau3(&mixed).unwrap();
        assert!(report.cuts.iter().all(|c| c.terms.iter().all(|&t| t == 0.0)));
        let product = pure_density(&PureState::basis(0));
        let report = tau3(&product).unwrap();
        assert!(report.tau3 < 1e-12);
        assert_eq!(c3_pure(&PureState::basis(0)), 0.0);
    }

    #[test]
    fn c_k_term_bounds() {
        let rho = pure_density(&ghz());
        assert!(c_k_term(&rho, Cut::C12_3, 0).is_err());
        assert!(c_k_term(&rho, Cut::C12_3, 7).is_err());
        let total: f64 = (1..=6)
            .map(|k| c_k_term(&rho, Cut::C12_3, k).unwrap().powi(2))
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weighted_c3_matches_normalized() {
        for seed in 0..5 {
            let psi = random_pure_state(seed);
            let scale = 0.3;
            let phi = psi.amplitudes().map(|z| z * scale);
            let want = scale * scale * c3_pure(&psi);
            assert!((weighted_c3(&phi) - want).abs() < 1e-14);
        }
    }
}
