//! Cross-checks against independent routes: nalgebra's general (Schur) and
//! Hermitian eigensolvers, and marginals computed by explicit index sums.

use ghzdyn::concurrence::{c3_pure, c_k_term, f_func, flip_operators, tau3, tau3_pure, Cut};
use ghzdyn::linalg::{hermitian_eig, product_spectrum, ComplexMatrix, C64};
use ghzdyn::states::{ghz, permute_qubits, pure_density, random_density, random_pure_state, PureState};
use nalgebra::DMatrix;

fn to_na(m: &ComplexMatrix) -> DMatrix<C64> {
    let n = m.dim();
    DMatrix::from_fn(n, n, |i, j| m[(i, j)])
}

/// Eigenvalues of a general complex matrix, sorted by real part, descending.
fn schur_eigenvalues(m: &ComplexMatrix) -> Vec<C64> {
    let mut ev: Vec<C64> = to_na(m).schur().eigenvalues().expect("complex Schur").iter().copied().collect();
    ev.sort_by(|a, b| b.re.total_cmp(&a.re));
    ev
}

fn tilde(rho_perm: &ComplexMatrix, s: &ComplexMatrix) -> ComplexMatrix {
    &(s * &rho_perm.conj()) * s
}

#[test]
fn product_spectrum_matches_general_eigensolver() {
    for seed in 0..20 {
        let rho = random_density(4, 1000 + seed).unwrap();
        for cut in Cut::CANONICAL {
            let rp = permute_qubits(&rho, &cut.permutation()).unwrap();
            for s in &flip_operators(cut).operators {
                let rt = tilde(rp.matrix(), s);
                let ours = product_spectrum(rp.matrix(), &rt).unwrap();
                let ev = schur_eigenvalues(&(rp.matrix() * &rt));
                for (k, e) in ev.iter().enumerate() {
                    assert!(e.im.abs() < 1e-8, "complex eigenvalue {e}");
                    assert!(e.re > -1e-10, "negative eigenvalue {e}");
                    if k < 4 {
                        assert!((ours[k] * ours[k] - e.re).abs() < 1e-8, "{k}: {} vs {}", ours[k] * ours[k], e.re);
                    } else {
                        assert!(e.re.abs() < 1e-9);
                    }
                }
            }
        }
    }
}

#[test]
fn c_k_terms_match_the_direct_route() {
    for seed in 0..10 {
        let rank = 1 + (seed as usize % 8);
        let rho = random_density(rank, 2000 + seed).unwrap();
        for cut in Cut::CANONICAL {
            let rp = permute_qubits(&rho, &cut.permutation()).unwrap();
            for (k, s) in flip_operators(cut).operators.iter().enumerate() {
                let ev = schur_eigenvalues(&(rp.matrix() * &tilde(rp.matrix(), s)));
                let lambdas: Vec<f64> = ev[..4].iter().map(|e| e.re.max(0.0).sqrt()).collect();
                let direct = f_func(&lambdas).unwrap();
                let ours = c_k_term(&rho, cut, k + 1).unwrap();
                // the direct route takes square roots of rounding noise near zero
                assert!((direct - ours).abs() < 1e-6, "rank {rank} {cut} k={}: {direct} vs {ours}", k + 1);
            }
        }
    }
}

#[test]
fn hermitian_eig_matches_nalgebra() {
    for seed in 0..20 {
        let rho = random_density(1 + seed as usize % 8, 3000 + seed).unwrap();
        let ours = hermitian_eig(rho.matrix()).unwrap();
        let mut theirs: Vec<f64> = to_na(rho.matrix()).symmetric_eigen().eigenvalues.iter().copied().collect();
        theirs.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in ours.values.iter().zip(&theirs) {
            assert!((a - b).abs() < 1e-12);
        }
        for k in 0..8 {
            let v = ours.vector(k);
            let hv = rho.matrix().mul_vec(&v);
            let res = hv.iter().zip(&v).map(|(x, y)| (x - y * ours.values[k]).norm()).fold(0.0, f64::max);
            assert!(res < 1e-9);
        }
    }
}

/// Single-qubit marginal purity by direct summation over amplitudes.
fn marginal_purity(psi: &PureState, qubit: usize) -> f64 {
    let a = psi.amplitudes();
    let bit = 4 >> qubit;
    let mut m = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..8 {
        for j in 0..8 {
            if i & !bit != j & !bit {
                continue;
            }
            let (r, c) = (usize::from(i & bit != 0), usize::from(j & bit != 0));
            m[r][c] += a[i] * a[j].conj();
        }
    }
    m.iter().flatten().map(|z| z.norm_sqr()).sum()
}

#[test]
fn c3_pure_matches_brute_force_marginals() {
    for seed in 0..50 {
        let psi = random_pure_state(seed);
        let sum: f64 = (0..3).map(|q| marginal_purity(&psi, q)).sum();
        let want = (1.0 - sum / 3.0).sqrt();
        assert!((c3_pure(&psi) - want).abs() < 1e-12);
    }
}

#[test]
fn ghz_golden_values() {
    let r = tau3_pure(&ghz()).unwrap();
    assert!((r.tau3 - 1.0).abs() < 1e-9);
    assert!((r.c3_pure.unwrap() - 0.5f64.sqrt()).abs() < 1e-9);
    for cut in &r.cuts {
        let positive = cut.terms.iter().filter(|&&t| t > 1e-9).count();
        assert_eq!(positive, 1, "{}", cut.cut);
        let sq: f64 = cut.terms.iter().map(|t| t * t).sum();
        assert!((sq - 1.0).abs() < 1e-9);
    }
}

#[test]
fn pure_cut_contribution_is_linear_entropy() {
    // sum_k C_k^2 on cut ab|c equals 2 (1 - Tr rho_c^2)
    for seed in 0..30 {
        let psi = random_pure_state(500 + seed);
        let r = tau3(&pure_density(&psi)).unwrap();
        for (cut, single) in r.cuts.iter().zip([2usize, 1, 0]) {
            let sq: f64 = cut.terms.iter().map(|t| t * t).sum();
            let want = 2.0 * (1.0 - marginal_purity(&psi, single));
            assert!((sq - want).abs() < 1e-8, "{}: {sq} vs {want}", cut.cut);
        }
    }
}
