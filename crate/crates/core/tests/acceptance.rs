//! Acceptance gate: every criterion at its stated tolerance and scale, one
//! PASS/FAIL line each. Exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use ghzdyn::analytic::TwoSidedVariant;
use ghzdyn::channels::{lift, validate_cptp, PauliChannel};
use ghzdyn::concurrence::{bipartite_concurrence, tau3, tau3_pure, Cut};
use ghzdyn::harness::{
    sweep, verify_evolution_equations, verify_never_vanish, verify_rank4_roof, verify_single_sided,
    verify_three_sided_factorization, verify_two_sided, verify_two_sided_factorization, SweepSpec,
    POSITIVITY_FLOOR,
};
use ghzdyn::states::{
    apply_local_unitary, apply_local_unitary_density, ghz, haar_local_unitaries, random_density_with,
    random_pure_state, seeded_rng, Qubit,
};
use ghzdyn::channels::ChannelFamily;

const SEED: u64 = 42;

struct Outcome {
    pass: bool,
    summary: String,
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let elapsed = start.elapsed();
    out.summary = format!("{}; {:.1?} (limit {:?})", out.summary, elapsed, limit);
    out.pass &= elapsed < limit;
    out
}

fn c1_golden() -> Outcome {
    let r = tau3_pure(&ghz()).unwrap();
    let dt = (r.tau3 - 1.0).abs();
    let dc = (r.c3_pure.unwrap() - 0.5f64.sqrt()).abs();
    Outcome {
        pass: dt < 1e-9 && dc < 1e-9,
        summary: format!("tau3(GHZ) = {:.12}, C3(GHZ) = {:.12}", r.tau3, r.c3_pure.unwrap()),
    }
}

fn c2_single_sided() -> Outcome {
    let r = verify_single_sided(1000, SEED, 1e-8).unwrap();
    Outcome { pass: r.pass, summary: format!("1000 channels, max residual {:e}", r.residuals.max) }
}

fn c3_two_sided() -> Outcome {
    let sq = verify_two_sided(1000, SEED, 1e-8, TwoSidedVariant::Squared).unwrap();
    let cu = &sq.details["max_residual_cubed"];
    Outcome {
        pass: sq.pass,
        summary: format!(
            "1000 pairs, squared reading max residual {:e}; cubed reading max residual {} (fails)",
            sq.residuals.max, cu
        ),
    }
}

fn c4_two_sided_factor() -> Outcome {
    let r = verify_two_sided_factorization(500, SEED, 1e-8).unwrap();
    Outcome {
        pass: r.pass,
        summary: format!(
            "500 flip-family pairs, factor law {}, flip formula {}",
            r.details["max_residual_factor_law"], r.details["max_residual_flip_formula"]
        ),
    }
}

fn c5_three_sided_factor() -> Outcome {
    let r = verify_three_sided_factorization(500, SEED, 1e-8).unwrap();
    Outcome {
        pass: r.pass,
        summary: format!(
            "500 per family, max residual by family {}; out-of-family controls {}",
            r.details["max_residual_by_family"], r.details["control_max_residual_by_family"]
        ),
    }
}

fn c6_evolution() -> Outcome {
    let r = verify_evolution_equations(1000, SEED, 1e-6).unwrap();
    Outcome {
        pass: r.pass,
        summary: format!(
            "1000 samples, tau3 law max {}, C^(12|3) law max {}",
            r.details["tau3_law"]["max"], r.details["bipartite_law"]["max"]
        ),
    }
}

fn c7_never_vanish() -> Outcome {
    let r = verify_never_vanish(101, POSITIVITY_FLOOR).unwrap();
    Outcome { pass: r.pass, summary: format!("101-point grids, minima {}", r.details["grid_minimum"]) }
}

fn c8_roof() -> Outcome {
    let r = verify_rank4_roof(100, 20, SEED, 5e-3).unwrap();
    Outcome {
        pass: r.pass,
        summary: format!(
            "100 states, 20 restarts, max |sqrt2*roof - tau3| = {:.4e}; by rank {}; tau3/(sqrt2*roof) {}",
            r.residuals.max, r.details["max_deviation_by_rank"], r.details["ratio_tau3_over_bridged_roof"]
        ),
    }
}

fn c9_properties() -> Outcome {
    let mut rng = seeded_rng(SEED);

    let mut cptp: f64 = 0.0;
    for n in 1..=3 {
        for _ in 0..100 {
            let placed: Vec<_> = Qubit::ALL[..n].iter().map(|&q| (PauliChannel::random(&mut rng), q)).collect();
            cptp = cptp.max(validate_cptp(&lift(&placed).unwrap()));
        }
    }

    let (mut lu_mixed, mut lu_pure, mut sym): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for i in 0..80 {
        let rank = 1 + i % 8;
        let rho = random_density_with(rank, &mut rng).unwrap();
        let us = haar_local_unitaries(&mut rng);
        let image = apply_local_unitary_density(&rho, &us).unwrap();
        lu_mixed = lu_mixed.max((tau3(&rho).unwrap().tau3 - tau3(&image).unwrap().tau3).abs());
        for cut in Cut::CANONICAL {
            let (a, b) = cut.pair();
            let swapped = Cut::new(b, a, cut.single()).unwrap();
            sym = sym.max((bipartite_concurrence(&rho, cut).unwrap() - bipartite_concurrence(&rho, swapped).unwrap()).abs());
        }
        let psi = random_pure_state(SEED + i as u64);
        let psi_image = apply_local_unitary(&psi, &us).unwrap();
        lu_pure = lu_pure.max((tau3_pure(&psi).unwrap().tau3 - tau3_pure(&psi_image).unwrap().tau3).abs());
    }

    let a = verify_single_sided(50, SEED, 1e-8).unwrap().to_json().unwrap();
    let b = verify_single_sided(50, SEED, 1e-8).unwrap().to_json().unwrap();
    let spec = SweepSpec::new(2, ChannelFamily::BitPhaseFlip, 6);
    let deterministic = a == b && sweep(&spec).unwrap().to_csv().unwrap() == sweep(&spec).unwrap().to_csv().unwrap();

    let lu = lu_mixed.max(lu_pure);
    Outcome {
        pass: cptp < 1e-9 && lu < 1e-8 && sym < 1e-9 && deterministic,
        summary: format!(
            "CPTP {cptp:.1e}; LU invariance of tau3 {lu:.3e} (random mixed rho {lu_mixed:.3e}, pure {lu_pure:.1e}); \
             cut-pair symmetry {sym:.1e}; deterministic reruns {deterministic}"
        ),
    }
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 9] = [
        ("golden values", Duration::from_secs(1), c1_golden),
        ("single-sided closed forms", Duration::from_secs(30), c2_single_sided),
        ("two-sided closed forms", Duration::from_secs(120), c3_two_sided),
        ("two-sided factorization", Duration::from_secs(120), c4_two_sided_factor),
        ("three-sided factorization", Duration::from_secs(120), c5_three_sided_factor),
        ("evolution equations", Duration::from_secs(120), c6_evolution),
        ("never vanish", Duration::from_secs(60), c7_never_vanish),
        ("rank-4 roof coincidence", Duration::from_secs(600), c8_roof),
        ("property suites", Duration::from_secs(120), c9_properties),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let out = timed(*limit, f);
        if !out.pass {
            failed += 1;
        }
        println!("{} criterion {} ({name}): {}", if out.pass { "PASS" } else { "FAIL" }, i + 1, out.summary);
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
