//! Monte-Carlo verification campaigns and parameter sweeps.
//!
//! Every sample draws from its own ChaCha stream (`stream_rng(seed, i)`), so
//! reports do not depend on execution order. Random Pauli channels are
//! uniform on the 3-sphere of amplitudes; flip-family channels use an error
//! probability uniform on `[0, 1)`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::{json, Value};

use crate::analytic::{
    factor_three_sided, factor_two_sided, single_sided, single_sided_on, tau3_from_triple,
    three_sided_factorization_applies, two_sided, two_sided_flip_tau3_sq, two_sided_on,
    evolve_bipartite, evolve_tau3, TwoSidedVariant, FactorInputs,
};
use crate::channels::{apply_channels, named_channel, ChannelFamily, PauliChannel};
use crate::concurrence::{bipartite_concurrence, tau3, tau3_pure, Cut};
use crate::error::{Error, Result};
use crate::par::map_indexed;
use crate::roof::{estimate_convex_roof, RoofOptions};
use crate::states::{
    ghz, pure_density, random_density_with, random_ghz_type, stream_rng, DensityMatrix, Qubit,
};

pub const CHANNEL_MEASURE: &str = "Pauli amplitudes uniform on the unit 3-sphere";
pub const FLIP_MEASURE: &str = "bit-flip / bit-phase-flip with error probability uniform on [0, 1)";
pub const POSITIVITY_FLOOR: f64 = 1e-6;
pub const BRIDGE_SLACK: f64 = 5e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantFlags {
    pub two_sided: TwoSidedVariant,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    pub max: f64,
    pub mean: f64,
}

impl ResidualSummary {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self { max: 0.0, mean: 0.0 };
        }
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        Self { max, mean }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub version: String,
    /// Left empty unless the caller stamps it, so reruns stay byte-identical.
    pub timestamp: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub campaign: String,
    pub seed: u64,
    pub samples: usize,
    pub tolerance: f64,
    pub variant_flags: VariantFlags,
    pub sampling_measure: String,
    pub residuals: ResidualSummary,
    pub per_sample: Vec<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<Value>>,
    pub environment: Environment,
    pub pass: bool,
}

impl VerificationReport {
    fn build(
        campaign: Campaign,
        seed: u64,
        samples: usize,
        tolerance: f64,
        measure: &str,
        per_sample: Vec<f64>,
    ) -> Self {
        let residuals = ResidualSummary::of(&per_sample);
        Self {
            campaign: campaign.name().to_string(),
            seed,
            samples,
            tolerance,
            variant_flags: VariantFlags { two_sided: TwoSidedVariant::default() },
            sampling_measure: measure.to_string(),
            residuals,
            per_sample,
            details: BTreeMap::new(),
            rows: None,
            environment: Environment {
                version: crate::VERSION.to_string(),
                timestamp: None,
            },
            pass: residuals.max <= tolerance,
        }
    }

    fn detail(mut self, key: &str, value: Value) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }

    pub fn with_timestamp(mut self, stamp: impl Into<String>) -> Self {
        self.environment.timestamp = Some(stamp.into());
        self
    }

    pub fn with_variant(mut self, two_sided: TwoSidedVariant) -> Self {
        self.variant_flags.two_sided = two_sided;
        self
    }

    /// `pass` agrees with `max <= tolerance`.
    pub fn is_consistent(&self) -> bool {
        self.pass == (self.residuals.max <= self.tolerance)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Output(e.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Campaign {
    SingleSided,
    TwoSided,
    TwoSidedFactorization,
    ThreeSidedFactorization,
    Evolution,
    NeverVanish,
    Roof,
}

impl Campaign {
    pub const ALL: [Campaign; 7] = [
        Campaign::SingleSided,
        Campaign::TwoSided,
        Campaign::TwoSidedFactorization,
        Campaign::ThreeSidedFactorization,
        Campaign::Evolution,
        Campaign::NeverVanish,
        Campaign::Roof,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Campaign::SingleSided => "analytic-1sided",
            Campaign::TwoSided => "two-sided",
            Campaign::TwoSidedFactorization => "factorization-2sided",
            Campaign::ThreeSidedFactorization => "factorization-3sided",
            Campaign::Evolution => "evolution",
            Campaign::NeverVanish => "never-vanish",
            Campaign::Roof => "roof-rank4",
        }
    }

    pub fn default_tolerance(self) -> f64 {
        match self {
            Campaign::Evolution => 1e-6,
            Campaign::NeverVanish => POSITIVITY_FLOOR,
            Campaign::Roof => BRIDGE_SLACK,
            _ => 1e-8,
        }
    }

    /// Sample count, or grid points for the never-vanish scan.
    pub fn default_samples(self) -> usize {
        match self {
            Campaign::SingleSided | Campaign::TwoSided | Campaign::Evolution => 1000,
            Campaign::TwoSidedFactorization | Campaign::ThreeSidedFactorization => 500,
            Campaign::NeverVanish => 101,
            Campaign::Roof => 100,
        }
    }
}

impl fmt::Display for Campaign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Campaign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Campaign::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| {
            let names: Vec<_> = Campaign::ALL.iter().map(|c| c.name()).collect();
            Error::Parse {
                pos: 0,
                msg: format!("unknown campaign '{s}' (expected one of {})", names.join(", ")),
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CampaignParams {
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub two_sided: TwoSidedVariant,
    pub restarts: usize,
}

impl CampaignParams {
    pub fn defaults(campaign: Campaign, seed: u64) -> Self {
        Self {
            samples: campaign.default_samples(),
            seed,
            tolerance: campaign.default_tolerance(),
            two_sided: TwoSidedVariant::default(),
            restarts: 20,
        }
    }
}

pub fn run_campaign(campaign: Campaign, p: &CampaignParams) -> Result<VerificationReport> {
    let report = match campaign {
        Campaign::SingleSided => verify_single_sided(p.samples, p.seed, p.tolerance),
        Campaign::TwoSided => verify_two_sided(p.samples, p.seed, p.tolerance, p.two_sided),
        Campaign::TwoSidedFactorization => verify_two_sided_factorization(p.samples, p.seed, p.tolerance),
        Campaign::ThreeSidedFactorization => verify_three_sided_factorization(p.samples, p.seed, p.tolerance),
        Campaign::Evolution => verify_evolution_equations(p.samples, p.seed, p.tolerance),
        Campaign::NeverVanish => verify_never_vanish(p.samples, p.tolerance).map(|r| Report {
            seed: p.seed,
            ..r
        }),
        Campaign::Roof => verify_rank4_roof(p.samples, p.restarts, p.seed, p.tolerance),
    }?;
    Ok(report.with_variant(p.two_sided))
}

type Report = VerificationReport;

fn require_samples(samples: usize) -> Result<()> {
    if samples == 0 {
        Err(Error::Precondition("at least one sample is required".into()))
    } else {
        Ok(())
    }
}

fn noisy_ghz(channels: &[(PauliChannel, Qubit)]) -> Result<DensityMatrix> {
    apply_channels(&pure_density(&ghz()), channels)
}

/// 𝔸 for a channel: `C^{12|3}` of the GHZ state with the channel on qubit 3,
/// from the numerical pipeline.
pub fn pipeline_factor(ch: &PauliChannel) -> Result<f64> {
    bipartite_concurrence(&noisy_ghz(&[(*ch, Qubit::Q3)])?, Cut::C12_3)
}

fn random_flip_channel<R: Rng + ?Sized>(rng: &mut R, family: ChannelFamily) -> PauliChannel {
    let p: f64 = rng.random();
    named_channel(family, p).expect("p in [0, 1)")
}

fn random_flip_family<R: Rng + ?Sized>(rng: &mut R) -> PauliChannel {
    let family = if rng.random_bool(0.5) {
        ChannelFamily::BitFlip
    } else {
        ChannelFamily::BitPhaseFlip
    };
    random_flip_channel(rng, family)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn collect<T>(items: Vec<Result<T>>) -> Result<Vec<T>> {
    items.into_iter().collect()
}

/// One random Pauli channel on qubit 3 of GHZ: pipeline concurrences and τ₃
/// against the single-sided closed forms.
pub fn verify_single_sided(samples: usize, seed: u64, tol: f64) -> Result<VerificationReport> {
    require_samples(samples)?;
    let residuals = collect(map_indexed(samples, |i| {
        let a = PauliChannel::random(&mut stream_rng(seed, i as u64));
        let report = tau3(&noisy_ghz(&[(a, Qubit::Q3)])?)?;
        let want = single_sided(&a);
        let mut got = report.triple().to_vec();
        got.push(report.tau3);
        let mut expect = want.to_vec();
        expect.push(tau3_from_triple(&want));
        Ok(max_abs_diff(&got, &expect))
    }))?;
    Ok(Report::build(Campaign::SingleSided, seed, samples, tol, CHANNEL_MEASURE, residuals))
}

/// Random channel pairs on qubits 2 and 3 against the two-sided closed forms.
/// Residuals use `variant`; both readings are recorded.
pub fn verify_two_sided(samples: usize, seed: u64, tol: f64, variant: TwoSidedVariant) -> Result<VerificationReport> {
    require_samples(samples)?;
    let pairs = collect(map_indexed(samples, |i| {
        let mut rng = stream_rng(seed, i as u64);
        let a = PauliChannel::random(&mut rng);
        let b = PauliChannel::random(&mut rng);
        let got = tau3(&noisy_ghz(&[(a, Qubit::Q2), (b, Qubit::Q3)])?)?.triple();
        Ok([TwoSidedVariant::Squared, TwoSidedVariant::Cubed].map(|v| max_abs_diff(&got, &two_sided(&a, &b, v))))
    }))?;
    let squared: Vec<f64> = pairs.iter().map(|p| p[0]).collect();
    let cubed: Vec<f64> = pairs.iter().map(|p| p[1]).collect();
    let (sq, cu) = (ResidualSummary::of(&squared), ResidualSummary::of(&cubed));
    let better = if sq.max <= cu.max { TwoSidedVariant::Squared } else { TwoSidedVariant::Cubed };
    let residuals = match variant {
        TwoSidedVariant::Squared => squared,
        TwoSidedVariant::Cubed => cubed,
    };
    Ok(Report::build(Campaign::TwoSided, seed, samples, tol, CHANNEL_MEASURE, residuals)
        .with_variant(variant)
        .detail("max_residual_squared", json!(sq.max))
        .detail("max_residual_cubed", json!(cu.max))
        .detail("better_variant", json!(better.name())))
}

/// Flip-family pairs on qubits 2 and 3: pipeline τ₃² against the factor law
/// (factors from the single-sided pipeline) and against the direct flip
/// formula.
pub fn verify_two_sided_factorization(samples: usize, seed: u64, tol: f64) -> Result<VerificationReport> {
    require_samples(samples)?;
    let pairs = collect(map_indexed(samples, |i| {
        let mut rng = stream_rng(seed, i as u64);
        let a = random_flip_family(&mut rng);
        let b = random_flip_family(&mut rng);
        let t2 = tau3(&noisy_ghz(&[(a, Qubit::Q2), (b, Qubit::Q3)])?)?.tau3.powi(2);
        let law = factor_two_sided(pipeline_factor(&a)?, pipeline_factor(&b)?)?;
        let direct = two_sided_flip_tau3_sq(&a, &b)?;
        Ok([(t2 - law).abs(), (t2 - direct).abs()])
    }))?;
    let law: Vec<f64> = pairs.iter().map(|p| p[0]).collect();
    let direct: Vec<f64> = pairs.iter().map(|p| p[1]).collect();
    let residuals = pairs.iter().map(|p| p[0].max(p[1])).collect();
    Ok(Report::build(Campaign::TwoSidedFactorization, seed, samples, tol, FLIP_MEASURE, residuals)
        .detail("max_residual_factor_law", json!(ResidualSummary::of(&law).max))
        .detail("max_residual_flip_formula", json!(ResidualSummary::of(&direct).max)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Triple {
    AllBitFlip,
    TwoBitPhaseOneBit,
    // controls outside those families
    TwoBitOneBitPhase,
    AllBitPhaseFlip,
    AllPhaseFlip,
}

impl Triple {
    fn name(self) -> &'static str {
        match self {
            Triple::AllBitFlip => "all-bitflip",
            Triple::TwoBitPhaseOneBit => "two-bitphaseflip-one-bitflip",
            Triple::TwoBitOneBitPhase => "two-bitflip-one-bitphaseflip",
            Triple::AllBitPhaseFlip => "all-bitphaseflip",
            Triple::AllPhaseFlip => "all-phaseflip",
        }
    }

    fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> [PauliChannel; 3] {
        use ChannelFamily::*;
        let odd = rng.random_range(0..3);
        let fam = |k: usize| match self {
            Triple::AllBitFlip => BitFlip,
            Triple::AllBitPhaseFlip => BitPhaseFlip,
            Triple::AllPhaseFlip => PhaseFlip,
            Triple::TwoBitPhaseOneBit => if k == odd { BitFlip } else { BitPhaseFlip },
            Triple::TwoBitOneBitPhase => if k == odd { BitPhaseFlip } else { BitFlip },
        };
        std::array::from_fn(|k| random_flip_channel(rng, fam(k)))
    }
}

fn three_sided_residuals(family: Triple, samples: usize, seed: u64, offset: u64) -> Result<Vec<f64>> {
    collect(map_indexed(samples, |i| {
        let mut rng = stream_rng(seed, offset + i as u64);
        let chs = family.draw(&mut rng);
        let placed: Vec<_> = chs.iter().copied().zip(Qubit::ALL).collect();
        let t2 = tau3(&noisy_ghz(&placed)?)?.tau3.powi(2);
        let [a, b, c] = [pipeline_factor(&chs[0])?, pipeline_factor(&chs[1])?, pipeline_factor(&chs[2])?];
        Ok((t2 - factor_three_sided(&FactorInputs::new(a, b, c)?)?).abs())
    }))
}

/// Three-sided factor law on its two families, `samples` draws each.
/// Out-of-family controls are reported but do not enter the verdict.
pub fn verify_three_sided_factorization(samples: usize, seed: u64, tol: f64) -> Result<VerificationReport> {
    require_samples(samples)?;
    let families = [Triple::AllBitFlip, Triple::TwoBitPhaseOneBit];
    let controls = [Triple::TwoBitOneBitPhase, Triple::AllBitPhaseFlip, Triple::AllPhaseFlip];
    let mut residuals = Vec::with_capacity(2 * samples);
    let mut per_family = serde_json::Map::new();
    for (k, fam) in families.iter().enumerate() {
        let r = three_sided_residuals(*fam, samples, seed, (k * samples) as u64)?;
        per_family.insert(fam.name().into(), json!(ResidualSummary::of(&r).max));
        residuals.extend(r);
    }
    let mut control_max = serde_json::Map::new();
    for (k, fam) in controls.iter().enumerate() {
        let r = three_sided_residuals(*fam, samples, seed, ((families.len() + k) * samples) as u64)?;
        control_max.insert(fam.name().into(), json!(ResidualSummary::of(&r).max));
    }
    Ok(Report::build(Campaign::ThreeSidedFactorization, seed, samples, tol, FLIP_MEASURE, residuals)
        .detail("max_residual_by_family", Value::Object(per_family))
        .detail("control_max_residual_by_family", Value::Object(control_max)))
}

/// Random GHZ-type state and random channel on qubit 3: both multiplicative
/// laws (τ₃ and `C^{12|3}`). The per-sample residual is the larger of the two.
pub fn verify_evolution_equations(samples: usize, seed: u64, tol: f64) -> Result<VerificationReport> {
    require_samples(samples)?;
    let pairs = collect(map_indexed(samples, |i| {
        let mut rng = stream_rng(seed, i as u64);
        let psi = random_ghz_type(&mut rng);
        let a = PauliChannel::random(&mut rng);
        evolution_residuals(&psi, &a)
    }))?;
    let tau: Vec<f64> = pairs.iter().map(|p| p[0]).collect();
    let bip: Vec<f64> = pairs.iter().map(|p| p[1]).collect();
    let (ts, bs) = (ResidualSummary::of(&tau), ResidualSummary::of(&bip));
    let residuals = pairs.iter().map(|p| p[0].max(p[1])).collect();
    Ok(Report::build(Campaign::Evolution, seed, samples, tol, "Haar local unitaries on GHZ; Pauli amplitudes uniform on the unit 3-sphere", residuals)
        .detail("tau3_law", json!({ "max": ts.max, "mean": ts.mean, "pass": ts.max <= tol }))
        .detail("bipartite_law", json!({ "max": bs.max, "mean": bs.mean, "pass": bs.max <= tol })))
}

/// `[tau3 law residual, C^{12|3} law residual]` for one state and channel.
pub fn evolution_residuals(psi: &crate::states::PureState, a: &PauliChannel) -> Result<[f64; 2]> {
    let clean = tau3_pure(psi)?;
    let noisy = tau3(&apply_channels(&pure_density(psi), &[(*a, Qubit::Q3)])?)?;
    let reference = tau3(&noisy_ghz(&[(*a, Qubit::Q3)])?)?;
    let tau_law = evolve_tau3(reference.tau3, clean.tau3)?;
    let bip_law = evolve_bipartite(reference.cuts[0].concurrence, clean.cuts[0].concurrence)?;
    Ok([(noisy.tau3 - tau_law).abs(), (noisy.cuts[0].concurrence - bip_law).abs()])
}

/// Scans bit-flip and bit-phase-flip on qubit 3 over `p` in `[0, 1]`. The
/// residual at a point is how far τ₃ falls short of `floor`, so the report's
/// tolerance is zero.
pub fn verify_never_vanish(grid_points: usize, floor: f64) -> Result<VerificationReport> {
    if grid_points < 2 {
        return Err(Error::Precondition("the grid needs at least two points".into()));
    }
    let families = [ChannelFamily::BitFlip, ChannelFamily::BitPhaseFlip];
    let values = collect(map_indexed(families.len() * grid_points, |idx| {
        let (fam, i) = (families[idx / grid_points], idx % grid_points);
        let p = grid_value(0.0, 1.0, grid_points, i);
        Ok((fam, p, tau3(&noisy_ghz(&[(named_channel(fam, p)?, Qubit::Q3)])?)?.tau3))
    }))?;
    let residuals = values.iter().map(|(_, _, t)| (floor - t).max(0.0)).collect();
    let mut minima = serde_json::Map::new();
    for fam in families {
        let (_, p, t) = values
            .iter()
            .filter(|(f, _, _)| *f == fam)
            .fold((fam, f64::NAN, f64::INFINITY), |acc, v| if v.2 < acc.2 { *v } else { acc });
        minima.insert(fam.name().into(), json!({ "tau3": t, "p": p }));
    }
    let rows = values
        .iter()
        .map(|(f, p, t)| json!({ "family": f.name(), "p": p, "tau3": t }))
        .collect();
    let mut report = Report::build(Campaign::NeverVanish, 0, grid_points, 0.0, "uniform grid over p in [0, 1]", residuals)
        .detail("positivity_floor", json!(floor))
        .detail("grid_minimum", Value::Object(minima));
    report.rows = Some(rows);
    Ok(report)
}

/// Rank-1..4 random states plus two-sided flip-channel states: `sqrt(2)` times
/// the numerical roof against τ₃.
pub fn verify_rank4_roof(samples: usize, restarts: usize, seed: u64, tol: f64) -> Result<VerificationReport> {
    require_samples(samples)?;
    let rows = collect(map_indexed(samples, |i| {
        let mut rng = stream_rng(seed, i as u64);
        let (kind, rho) = match i % 5 {
            4 => {
                let a = random_flip_family(&mut rng);
                let b = random_flip_family(&mut rng);
                ("flip-channel", noisy_ghz(&[(a, Qubit::Q2), (b, Qubit::Q3)])?)
            }
            r => ("random", random_density_with(r + 1, &mut rng)?),
        };
        let opts = RoofOptions { restarts, max_members: None, seed: rng.random() };
        let est = estimate_convex_roof(&rho, &opts)?;
        let t = tau3(&rho)?.tau3;
        let bridged = std::f64::consts::SQRT_2 * est.value;
        Ok(RoofRow {
            index: i,
            kind,
            rank: est.rank,
            roof: est.value,
            bridged,
            tau3: t,
            deviation: (bridged - t).abs(),
            nonconverged: est.trace.iter().filter(|l| !l.converged).count(),
        })
    }))?;

    let residuals: Vec<f64> = rows.iter().map(|r| r.deviation).collect();
    let mut by_rank = BTreeMap::<String, f64>::new();
    for r in &rows {
        let e = by_rank.entry(r.rank.to_string()).or_insert(0.0);
        *e = e.max(r.deviation);
    }
    let mut ratios: Vec<f64> = rows.iter().filter(|r| r.bridged > 1e-12).map(|r| r.tau3 / r.bridged).collect();
    ratios.sort_by(f64::total_cmp);
    let ratio_stats = if ratios.is_empty() {
        Value::Null
    } else {
        json!({
            "min": ratios[0],
            "median": ratios[ratios.len() / 2],
            "mean": ratios.iter().sum::<f64>() / ratios.len() as f64,
            "max": ratios[ratios.len() - 1],
        })
    };
    let violations = rows.iter().filter(|r| r.bridged < r.tau3 - BRIDGE_SLACK).count();
    let nonconverged: usize = rows.iter().map(|r| r.nonconverged).sum();

    let mut report = Report::build(Campaign::Roof, seed, samples, tol, "ranks 1-4 from Haar mixtures with exponential weights; every fifth sample a two-sided flip-channel state", residuals)
        .detail("bridge_factor", json!(std::f64::consts::SQRT_2))
        .detail("restarts", json!(restarts))
        .detail("max_deviation_by_rank", json!(by_rank))
        .detail("ratio_tau3_over_bridged_roof", ratio_stats)
        .detail("bridge_inequality_violations", json!(violations))
        .detail("nonconverged_runs", json!(nonconverged));
    report.rows = Some(rows.iter().map(RoofRow::to_json).collect());
    Ok(report)
}

struct RoofRow {
    index: usize,
    kind: &'static str,
    rank: usize,
    roof: f64,
    bridged: f64,
    tau3: f64,
    deviation: f64,
    nonconverged: usize,
}

impl RoofRow {
    fn to_json(&self) -> Value {
        json!({
            "index": self.index,
            "kind": self.kind,
            "rank": self.rank,
            "roof": self.roof,
            "sqrt2_roof": self.bridged,
            "tau3": self.tau3,
            "deviation": self.deviation,
        })
    }
}

/// Closed-form expectations for the GHZ state under local channels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhzPrediction {
    /// Single-sided pipeline factor of each flip-family channel.
    pub factors: Vec<Option<f64>>,
    /// `(C^{12|3}, C^{13|2}, C^{23|1})`, available for up to two channels.
    pub concurrences: Option<[f64; 3]>,
    /// τ₃² from the factor laws, when the channels fall in their domain.
    pub factor_tau3_sq: Option<f64>,
    pub tau3: Option<f64>,
}

pub fn ghz_prediction(placed: &[(PauliChannel, Qubit)], two_sided: TwoSidedVariant) -> Result<GhzPrediction> {
    for (i, (_, q)) in placed.iter().enumerate() {
        if placed[..i].iter().any(|(_, r)| r == q) {
            return Err(Error::InvalidQubits(format!("two channels act on {q}")));
        }
    }
    let factors: Vec<Option<f64>> = placed
        .iter()
        .map(|(c, _)| c.flip_kind().map(|_| pipeline_factor(c)).transpose())
        .collect::<Result<_>>()?;
    let concurrences = match placed {
        [] => Some([1.0; 3]),
        [(a, qa)] => Some(single_sided_on(a, *qa)),
        [(a, qa), (b, qb)] => Some(two_sided_on(a, *qa, b, *qb, two_sided)?),
        _ => None,
    };
    let factor_tau3_sq = match (placed, factors.as_slice()) {
        ([_, _], [Some(a), Some(b)]) => Some(factor_two_sided(*a, *b)?),
        ([(a, _), (b, _), (c, _)], [Some(fa), Some(fb), Some(fc)])
            if three_sided_factorization_applies(&[*a, *b, *c]) =>
        {
            Some(factor_three_sided(&FactorInputs::new(*fa, *fb, *fc)?)?)
        }
        _ => None,
    };
    let tau3 = concurrences
        .map(|t| tau3_from_triple(&t))
        .or(factor_tau3_sq.map(f64::sqrt));
    Ok(GhzPrediction { factors, concurrences, factor_tau3_sq, tau3 })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl GridAxis {
    pub fn unit(points: usize) -> Self {
        Self { min: 0.0, max: 1.0, points }
    }

    fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::Precondition(format!("grid needs at least 2 points, got {}", self.points)));
        }
        if !(0.0 <= self.min && self.min <= self.max && self.max <= 1.0) {
            return Err(Error::InvalidParameters(format!(
                "probability range [{}, {}] is not inside [0, 1]",
                self.min, self.max
            )));
        }
        Ok(())
    }

    pub fn value(&self, i: usize) -> f64 {
        grid_value(self.min, self.max, self.points, i)
    }
}

fn grid_value(min: f64, max: f64, points: usize, i: usize) -> f64 {
    if i + 1 == points {
        max
    } else {
        min + (max - min) * i as f64 / (points - 1) as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub sides: usize,
    /// One family per side, or a single family shared by all sides.
    pub families: Vec<ChannelFamily>,
    /// Defaults: one side on q3, two on q2 and q3, three on all qubits.
    pub slots: Option<Vec<Qubit>>,
    /// One axis per side, or a single axis shared by all sides.
    pub axes: Vec<GridAxis>,
    pub seed: u64,
    pub two_sided: TwoSidedVariant,
}

pub fn default_slots(sides: usize) -> Vec<Qubit> {
    Qubit::ALL[3 - sides.min(3)..].to_vec()
}

impl SweepSpec {
    pub fn new(sides: usize, family: ChannelFamily, points: usize) -> Self {
        Self {
            sides,
            families: vec![family],
            slots: None,
            axes: vec![GridAxis::unit(points)],
            seed: 0,
            two_sided: TwoSidedVariant::default(),
        }
    }

    fn resolved(&self) -> Result<(Vec<ChannelFamily>, Vec<Qubit>, Vec<GridAxis>)> {
        if !(1..=3).contains(&self.sides) {
            return Err(Error::Precondition(format!("sides must be 1, 2 or 3, got {}", self.sides)));
        }
        let n = self.sides;
        let spread = |len: usize, what: &str| -> Result<()> {
            if len == 1 || len == n {
                Ok(())
            } else {
                Err(Error::Precondition(format!("{len} {what} given for {n} sides")))
            }
        };
        spread(self.families.len(), "families")?;
        spread(self.axes.len(), "grid axes")?;
        let families: Vec<_> = (0..n).map(|k| self.families[k.min(self.families.len() - 1)]).collect();
        if families.contains(&ChannelFamily::Pauli) {
            return Err(Error::InvalidParameters(
                "sweeps need one-parameter families; general Pauli channels are not swept".into(),
            ));
        }
        let axes: Vec<_> = (0..n).map(|k| self.axes[k.min(self.axes.len() - 1)]).collect();
        for ax in &axes {
            ax.validate()?;
        }
        let slots = self.slots.clone().unwrap_or_else(|| default_slots(n));
        if slots.len() != n {
            return Err(Error::InvalidQubits(format!("{} slots given for {n} sides", slots.len())));
        }
        for (i, s) in slots.iter().enumerate() {
            if slots[..i].contains(s) {
                return Err(Error::InvalidQubits(format!("{s} appears twice")));
            }
        }
        Ok((families, slots, axes))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Missing,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(x) => write!(f, "{x:?}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Missing => f.write_str("n/a"),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cell::Num(x) => s.serialize_f64(*x),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            _ => None,
        }
    }
}

fn opt(v: Option<f64>) -> Cell {
    v.map_or(Cell::Missing, Cell::Num)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepTable {
    pub seed: u64,
    pub two_sided: TwoSidedVariant,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl SweepTable {
    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| &r[k]).collect())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let out = |e: csv::Error| Error::Output(e.to_string());
        w.write_record(&self.header).map_err(out)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string())).map_err(out)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Output(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Output(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Output(e.to_string()))
    }
}

/// One row per grid point, row-major over the axes (first axis slowest).
pub fn sweep(spec: &SweepSpec) -> Result<SweepTable> {
    let (families, slots, axes) = spec.resolved()?;
    let n = spec.sides;
    let canonical = slots == default_slots(n);

    let mut header: Vec<String> = slots.iter().map(|s| format!("p_{s}")).collect();
    header.push("placement".into());
    header.extend(slots.iter().map(|s| format!("factor_{s}")));
    for h in ["C12_3", "C13_2", "C23_1", "tau3", "tau3_sq", "factor_tau3_sq", "tau3_analytic", "residual"] {
        header.push(h.into());
    }

    let total: usize = axes.iter().map(|a| a.points).product();
    let rows = collect(map_indexed(total, |idx| {
        let mut rem = idx;
        let mut ps = vec![0.0; n];
        for k in (0..n).rev() {
            ps[k] = axes[k].value(rem % axes[k].points);
            rem /= axes[k].points;
        }
        let chans: Vec<PauliChannel> = (0..n)
            .map(|k| named_channel(families[k], ps[k]))
            .collect::<Result<_>>()?;
        let placed: Vec<_> = chans.iter().copied().zip(slots.iter().copied()).collect();
        let report = tau3(&noisy_ghz(&placed)?)?;
        let pred = ghz_prediction(&placed, spec.two_sided)?;
        let analytic = pred.tau3;

        let mut row: Vec<Cell> = ps.iter().map(|&p| Cell::Num(p)).collect();
        row.push(Cell::Text(if canonical { "canonical" } else { "permuted variant" }.into()));
        row.extend(pred.factors.iter().map(|f| opt(*f)));
        row.extend(report.triple().map(Cell::Num));
        row.push(Cell::Num(report.tau3));
        row.push(Cell::Num(report.tau3 * report.tau3));
        row.push(opt(pred.factor_tau3_sq));
        row.push(opt(analytic));
        row.push(opt(analytic.map(|a| (report.tau3 - a).abs())));
        Ok(row)
    }))?;

    Ok(SweepTable { seed: spec.seed, two_sided: spec.two_sided, header, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sided_campaign_small() {
        let r = verify_single_sided(40, 42, 1e-8).unwrap();
        assert!(r.pass, "{}", r.residuals.max);
        assert_eq!(r.per_sample.len(), 40);
        assert!(r.is_consistent());
    }

    #[test]
    fn identity_channel_sample() {
        let rho = noisy_ghz(&[(PauliChannel::identity(), Qubit::Q3)]).unwrap();
        let got = tau3(&rho).unwrap().triple();
        let want = single_sided(&PauliChannel::identity());
        assert!(max_abs_diff(&got, &want) < 1e-12);
        assert!(max_abs_diff(&want, &[1.0; 3]) < 1e-12);
    }

    #[test]
    fn depolarizing_extreme_is_zero_on_both_sides() {
        let ch = named_channel(ChannelFamily::Depolarizing, 1.0).unwrap();
        let got = tau3(&noisy_ghz(&[(ch, Qubit::Q3)]).unwrap()).unwrap();
        assert!(got.tau3 < 1e-10);
        assert!(single_sided(&ch).iter().all(|c| c.abs() < 1e-12));
    }

    #[test]
    fn two_sided_campaign_prefers_squared() {
        let r = verify_two_sided(30, 3, 1e-8, TwoSidedVariant::Squared).unwrap();
        assert!(r.pass);
        assert_eq!(r.details["better_variant"], json!("squared"));
        let c = verify_two_sided(30, 3, 1e-8, TwoSidedVariant::Cubed).unwrap();
        assert!(!c.pass);
        assert_eq!(c.variant_flags.two_sided, TwoSidedVariant::Cubed);
    }

    #[test]
    fn three_sided_example_arithmetic() {
        let t2 = factor_three_sided(&FactorInputs::new(0.8, 0.6, 0.5).unwrap()).unwrap();
        assert!((t2.sqrt() - 0.40017).abs() < 1e-5);
    }

    #[test]
    fn evolution_on_ghz_itself() {
        let mut rng = stream_rng(1, 0);
        let a = PauliChannel::random(&mut rng);
        let r = evolution_residuals(&ghz(), &a).unwrap();
        assert!(r[0] < 1e-10 && r[1] < 1e-10);
        let psi = random_ghz_type(&mut rng);
        let r = evolution_residuals(&psi, &PauliChannel::identity()).unwrap();
        assert!(r[0] < 1e-9 && r[1] < 1e-9);
    }

    #[test]
    fn never_vanish_grid() {
        let r = verify_never_vanish(11, POSITIVITY_FLOOR).unwrap();
        assert!(r.pass);
        let min = &r.details["grid_minimum"]["bitflip"];
        assert!((min["tau3"].as_f64().unwrap() - (1.0f64 / 3.0).sqrt()).abs() < 1e-9);
        assert!((min["p"].as_f64().unwrap() - 0.5).abs() < 1e-12);
        assert!(verify_never_vanish(1, 1e-6).is_err());
    }

    #[test]
    fn report_json_roundtrip() {
        let r = verify_single_sided(3, 1, 1e-8).unwrap().with_timestamp("t");
        let back: VerificationReport = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn campaign_names_roundtrip() {
        for c in Campaign::ALL {
            assert_eq!(c.name().parse::<Campaign>().unwrap(), c);
        }
        assert!("nope".parse::<Campaign>().is_err());
    }

    #[test]
    fn one_sided_sweep_example() {
        let spec = SweepSpec {
            axes: vec![GridAxis { min: 0.0, max: 0.5, points: 3 }],
            ..SweepSpec::new(1, ChannelFamily::BitFlip, 3)
        };
        let t = sweep(&spec).unwrap();
        let tau: Vec<f64> = t.column("tau3").unwrap().iter().map(|c| c.as_f64().unwrap()).collect();
        let want = [1.0, 0.5f64.sqrt(), (1.0f64 / 3.0).sqrt()];
        assert!(max_abs_diff(&tau, &want) < 1e-9, "{tau:?}");
        assert_eq!(t.header[0], "p_q3");
    }

    #[test]
    fn two_sided_sweep_factor_column() {
        let t = sweep(&SweepSpec::new(2, ChannelFamily::BitFlip, 4)).unwrap();
        assert_eq!(t.rows.len(), 16);
        let sq = t.column("tau3_sq").unwrap();
        let fac = t.column("factor_tau3_sq").unwrap();
        for (a, b) in sq.iter().zip(fac) {
            assert!((a.as_f64().unwrap() - b.as_f64().unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn out_of_domain_marked() {
        let mut spec = SweepSpec::new(3, ChannelFamily::PhaseFlip, 2);
        spec.families = vec![ChannelFamily::PhaseFlip];
        let t = sweep(&spec).unwrap();
        // p = 0 everywhere is the identity, which is in the domain
        let res = t.column("residual").unwrap();
        assert!(res[0].as_f64().unwrap() < 1e-9);
        assert!(res[1..].iter().all(|c| **c == Cell::Missing));
        assert!(t.to_csv().unwrap().contains("n/a"));
    }

    #[test]
    fn sweep_validation() {
        assert!(sweep(&SweepSpec::new(0, ChannelFamily::BitFlip, 3)).is_err());
        assert!(sweep(&SweepSpec::new(1, ChannelFamily::BitFlip, 1)).is_err());
        assert!(sweep(&SweepSpec::new(1, ChannelFamily::Pauli, 3)).is_err());
        let mut s = SweepSpec::new(2, ChannelFamily::BitFlip, 3);
        s.slots = Some(vec![Qubit::Q1, Qubit::Q1]);
        assert!(sweep(&s).is_err());
        s.slots = None;
        s.axes = vec![GridAxis { min: 0.5, max: 1.5, points: 3 }];
        assert!(sweep(&s).is_err());
    }

    #[test]
    fn permuted_placement_is_labelled_and_checked() {
        let mut s = SweepSpec::new(2, ChannelFamily::BitPhaseFlip, 3);
        s.slots = Some(vec![Qubit::Q1, Qubit::Q3]);
        let t = sweep(&s).unwrap();
        assert_eq!(t.column("placement").unwrap()[0].to_string(), "permuted variant");
        for r in t.column("residual").unwrap() {
            assert!(r.as_f64().unwrap() < 1e-8);
        }
    }
}
