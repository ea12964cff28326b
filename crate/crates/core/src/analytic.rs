//! Closed-form concurrences of the GHZ state under local Pauli noise, plus
//! the factorization and evolution laws built on them.
//!
//! All formulas depend on the channels only through the error
//! probabilities `a_i^2`. Outputs are ordered `(C^{12|3}, C^{13|2}, C^{23|1})`.

use serde::{Deserialize, Serialize};

use crate::channels::PauliChannel;
use crate::concurrence::{f_raw, Cut};
use crate::error::{Error, Result};
use crate::states::Qubit;

/// Reading of the `a3` exponent in the second term of the two-sided
/// `C^{23|1}` formula.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TwoSidedVariant {
    /// `a3^2 b2^2`, consistent with every other term.
    #[default]
    Squared,
    /// `|a3|^3 b2^2`, the competing reading.
    Cubed,
}

impl TwoSidedVariant {
    pub fn name(self) -> &'static str {
        match self {
            TwoSidedVariant::Squared => "squared",
            TwoSidedVariant::Cubed => "cubed",
        }
    }
}

impl std::str::FromStr for TwoSidedVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared" => Ok(TwoSidedVariant::Squared),
            "cubed" => Ok(TwoSidedVariant::Cubed),
            other => Err(Error::Parse {
                pos: 0,
                msg: format!("unknown two-sided variant '{other}' (expected squared or cubed)"),
            }),
        }
    }
}

fn f2(w: f64, x: f64) -> f64 {
    f_raw(&[w, x])
}

fn f4(w: f64, x: f64, y: f64, z: f64) -> f64 {
    f_raw(&[w, x, y, z])
}

fn rss(x: f64, y: f64) -> f64 {
    (x * x + y * y).sqrt()
}

/// Channel `a` on qubit 3 of the GHZ state.
pub fn single_sided(a: &PauliChannel) -> [f64; 3] {
    let [a1, a2, a3, a4] = a.weights();
    let c12 = f4(a1, a2, a3, a4);
    let side = rss(f2(a1, a4), f2(a2, a3));
    [c12, side, side]
}

/// Channel `a` on an arbitrary qubit. The GHZ state is symmetric under
/// relabeling, so the cut isolating the noisy qubit takes the `C^{12|3}`
/// form and the other two take the `C^{13|2}` form.
pub fn single_sided_on(a: &PauliChannel, slot: Qubit) -> [f64; 3] {
    let [isolated, other, _] = single_sided(a);
    Cut::CANONICAL.map(|cut| if cut.single() == slot { isolated } else { other })
}

/// Channel `a` on qubit 2 and `b` on qubit 3 of the GHZ state.
pub fn two_sided(a: &PauliChannel, b: &PauliChannel, variant: TwoSidedVariant) -> [f64; 3] {
    let [a1, a2, a3, a4] = a.weights();
    let [b1, b2, b3, b4] = b.weights();

    let c12_3 = rss(
        f4(a2 * b3 + a3 * b2, a2 * b2 + a3 * b3, a3 * b1 + a2 * b4, a2 * b1 + a3 * b4),
        f4(a4 * b2 + a1 * b3, a1 * b2 + a4 * b3, a4 * b1 + a1 * b4, a1 * b1 + a4 * b4),
    );
    let c13_2 = rss(
        f4(a4 * b2 + a1 * b3, a3 * b2 + a2 * b3, a2 * b2 + a3 * b3, a1 * b2 + a4 * b3),
        f4(a4 * b1 + a1 * b4, a3 * b1 + a2 * b4, a2 * b1 + a3 * b4, a1 * b1 + a4 * b4),
    );
    let a3_lead = match variant {
        TwoSidedVariant::Squared => a3,
        TwoSidedVariant::Cubed => a.amplitudes()[2].abs().powi(3),
    };
    let c23_1 = rss(
        f4(a4 * b2 + a1 * b3, a1 * b2 + a4 * b3, a3 * b1 + a2 * b4, a2 * b1 + a3 * b4),
        f4(a3_lead * b2 + a2 * b3, a2 * b2 + a3 * b3, a4 * b1 + a1 * b4, a1 * b1 + a4 * b4),
    );
    [c12_3, c13_2, c23_1]
}

/// [`two_sided`] with the channels on any two distinct qubits, mapped back
/// onto the canonical cut order by relabeling.
pub fn two_sided_on(
    a: &PauliChannel,
    qa: Qubit,
    b: &PauliChannel,
    qb: Qubit,
    variant: TwoSidedVariant,
) -> Result<[f64; 3]> {
    if qa == qb {
        return Err(Error::InvalidQubits(format!("both channels act on {qa}")));
    }
    let [isolate_b, isolate_a, isolate_free] = two_sided(a, b, variant);
    Ok(Cut::CANONICAL.map(|cut| {
        let s = cut.single();
        if s == qb {
            isolate_b
        } else if s == qa {
            isolate_a
        } else {
            isolate_free
        }
    }))
}

/// `sqrt((1/3) sum C^2)` over the three cuts.
pub fn tau3_from_triple(triple: &[f64; 3]) -> f64 {
    (triple.iter().map(|c| c * c).sum::<f64>() / 3.0).sqrt()
}

/// Single-sided `C^{12|3}` for a channel, i.e. its factor 𝔸.
pub fn flip_factor(a: &PauliChannel) -> f64 {
    single_sided(a)[0]
}

/// Squared two-sided τ₃ for bit-flip / bit-phase-flip channels:
/// `(1/3)[f²(a1², ai²) + f²(b1², bj²) + f²(a1², ai²) f²(b1², bj²)]`.
pub fn two_sided_flip_tau3_sq(a: &PauliChannel, b: &PauliChannel) -> Result<f64> {
    let fa = flip_term(a, "first")?;
    let fb = flip_term(b, "second")?;
    let (fa2, fb2) = (fa * fa, fb * fb);
    Ok((fa2 + fb2 + fa2 * fb2) / 3.0)
}

fn flip_term(ch: &PauliChannel, which: &str) -> Result<f64> {
    let kind = ch.flip_kind().ok_or_else(|| {
        Error::Domain(format!(
            "{which} channel is neither bit-flip nor bit-phase-flip: {:?}",
            ch.amplitudes()
        ))
    })?;
    let w = ch.weights();
    Ok(f2(w[0], w[kind.pauli_index()]))
}

/// The single-sided factors 𝔸, 𝔹, ℂ, each in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorInputs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl FactorInputs {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        for (name, v) in [("A", a), ("B", b), ("C", c)] {
            check_unit(name, v)?;
        }
        Ok(Self { a, b, c })
    }

    pub fn pair(a: f64, b: f64) -> Result<Self> {
        Self::new(a, b, 0.0)
    }
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::Domain(format!("factor {name} = {v} is outside [0, 1]")))
    }
}

/// `(1/3)(A² + B² + A²B²)`.
pub fn factor_two_sided(a: f64, b: f64) -> Result<f64> {
    check_unit("A", a)?;
    check_unit("B", b)?;
    let (a2, b2) = (a * a, b * b);
    Ok((a2 + b2 + a2 * b2) / 3.0)
}

/// `(1/3)(A²B² + B²C² + A²C²)`.
pub fn factor_three_sided(fi: &FactorInputs) -> Result<f64> {
    let FactorInputs { a, b, c } = FactorInputs::new(fi.a, fi.b, fi.c)?;
    let (a2, b2, c2) = (a * a, b * b, c * c);
    Ok((a2 * b2 + b2 * c2 + a2 * c2) / 3.0)
}

/// Whether three channels fall in a family where the three-sided
/// factorization holds: all bit-flip, or two bit-phase-flip and one
/// bit-flip in any arrangement.
pub fn three_sided_factorization_applies(channels: &[PauliChannel; 3]) -> bool {
    let flips = channels.iter().filter(|c| c.is_bit_flip()).count();
    let phase_flips = channels.iter().filter(|c| c.is_bit_phase_flip()).count();
    let all_flip_family = channels.iter().all(|c| c.flip_kind().is_some());
    if !all_flip_family {
        return false;
    }
    if flips == 3 {
        return true;
    }
    // channels that are the identity count as either kind
    let both = channels
        .iter()
        .filter(|c| c.is_bit_flip() && c.is_bit_phase_flip())
        .count();
    let only_flip = flips - both;
    let only_phase = phase_flips - both;
    // need an assignment with exactly one bit-flip and two bit-phase-flips
    only_flip <= 1 && only_phase <= 2
}

fn check_non_negative(v: f64) -> Result<()> {
    if v >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("evolution factor {v} is negative")))
    }
}

/// τ₃ of a noisy GHZ-type state from the noisy GHZ value and τ₃ of the
/// noiseless state.
pub fn evolve_tau3(tau_ghz_under_channel: f64, tau_psi: f64) -> Result<f64> {
    check_non_negative(tau_ghz_under_channel)?;
    check_non_negative(tau_psi)?;
    Ok(tau_ghz_under_channel * tau_psi)
}

/// Same multiplicative law for a bipartite concurrence.
pub fn evolve_bipartite(c_ghz_under_channel: f64, c_psi: f64) -> Result<f64> {
    check_non_negative(c_ghz_under_channel)?;
    check_non_negative(c_psi)?;
    Ok(c_ghz_under_channel * c_psi)
}
