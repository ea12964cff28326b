//! Single-qubit Pauli channels in Kraus form and their lifts to three qubits.
//!
//! A channel with amplitudes `(a1, a2, a3, a4)` has Kraus operators
//! `a1*I, a2*σ_x, a3*σ_y, a4*σ_z`, so `a_i^2` is the probability of each
//! Pauli error and completeness holds when `sum a_i^2 = 1`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{identity2, paulis, ComplexMatrix};
use crate::states::{DensityMatrix, Qubit, DIM};

pub const AMPLITUDE_NORM_TOL: f64 = 1e-8;
pub const COMPLETENESS_TOL: f64 = 1e-9;

/// Kraus amplitudes below this count as zero when classifying flip channels.
const FAMILY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliChannel {
    amps: [f64; 4],
}

impl PauliChannel {
    /// Accepts signed amplitudes whose squares sum to 1 within 1e-8 and
    /// renormalizes them.
    pub fn new(a1: f64, a2: f64, a3: f64, a4: f64) -> Result<Self> {
        let amps = [a1, a2, a3, a4];
        if amps.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidParameters("non-finite amplitude".into()));
        }
        let norm2: f64 = amps.iter().map(|a| a * a).sum();
        if (norm2 - 1.0).abs() > AMPLITUDE_NORM_TOL {
            return Err(Error::InvalidParameters(format!(
                "sum of squared amplitudes is {norm2}, expected 1"
            )));
        }
        let norm = norm2.sqrt();
        Ok(Self {
            amps: amps.map(|a| a / norm),
        })
    }

    pub fn identity() -> Self {
        Self {
            amps: [1.0, 0.0, 0.0, 0.0],
        }
    }

    /// Uniform on the unit 3-sphere of amplitudes.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let v: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-6 {
                return Self {
                    amps: v.map(|x| x / norm),
                };
            }
        }
    }

    pub fn amplitudes(&self) -> [f64; 4] {
        self.amps
    }

    /// Pauli error probabilities `a_i^2`.
    pub fn weights(&self) -> [f64; 4] {
        self.amps.map(|a| a * a)
    }

    pub fn kraus(&self) -> [ComplexMatrix; 4] {
        let p = paulis();
        std::array::from_fn(|i| p[i].scale_real(self.amps[i]))
    }

    /// Which flip family the channel belongs to, if any. The identity
    /// channel belongs to both and reports [`FlipKind::BitFlip`].
    pub fn flip_kind(&self) -> Option<FlipKind> {
        let [_, a2, a3, a4] = self.amps.map(f64::abs);
        if a4 > FAMILY_TOL {
            return None;
        }
        match (a2 > FAMILY_TOL, a3 > FAMILY_TOL) {
            (_, false) => Some(FlipKind::BitFlip),
            (false, true) => Some(FlipKind::BitPhaseFlip),
            (true, true) => None,
        }
    }

    pub fn is_bit_flip(&self) -> bool {
        let [_, _, a3, a4] = self.amps.map(f64::abs);
        a3 <= FAMILY_TOL && a4 <= FAMILY_TOL
    }

    pub fn is_bit_phase_flip(&self) -> bool {
        let [_, a2, _, a4] = self.amps.map(f64::abs);
        a2 <= FAMILY_TOL && a4 <= FAMILY_TOL
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlipKind {
    BitFlip,
    BitPhaseFlip,
}

impl FlipKind {
    /// Position of the non-identity Kraus amplitude (σ_x = 1, σ_y = 2).
    pub fn pauli_index(self) -> usize {
        match self {
            FlipKind::BitFlip => 1,
            FlipKind::BitPhaseFlip => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelFamily {
    BitFlip,
    PhaseFlip,
    BitPhaseFlip,
    Depolarizing,
    Pauli,
}

impl ChannelFamily {
    pub fn name(self) -> &'static str {
        match self {
            ChannelFamily::BitFlip => "bitflip",
            ChannelFamily::PhaseFlip => "phaseflip",
            ChannelFamily::BitPhaseFlip => "bitphaseflip",
            ChannelFamily::Depolarizing => "depolarizing",
            ChannelFamily::Pauli => "pauli",
        }
    }
}

impl fmt::Display for ChannelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "bitflip" => ChannelFamily::BitFlip,
            "phaseflip" => ChannelFamily::PhaseFlip,
            "bitphaseflip" => ChannelFamily::BitPhaseFlip,
            "depolarizing" => ChannelFamily::Depolarizing,
            "pauli" => ChannelFamily::Pauli,
            other => {
                return Err(Error::Parse {
                    pos: 0,
                    msg: format!("unknown channel family '{other}'"),
                })
            }
        })
    }
}

/// One-parameter channel with flip probability `p`.
pub fn named_channel(family: ChannelFamily, p: f64) -> Result<PauliChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameters(format!(
            "probability {p} is outside [0, 1]"
        )));
    }
    let q = (1.0 - p).sqrt();
    let s = p.sqrt();
    let amps = match family {
        ChannelFamily::BitFlip => [q, s, 0.0, 0.0],
        ChannelFamily::BitPhaseFlip => [q, 0.0, s, 0.0],
        ChannelFamily::PhaseFlip => [q, 0.0, 0.0, s],
        ChannelFamily::Depolarizing => {
            let e = (p / 4.0).sqrt();
            [(1.0 - 0.75 * p).sqrt(), e, e, e]
        }
        ChannelFamily::Pauli => {
            return Err(Error::InvalidParameters(
                "the pauli family takes amplitudes, not a probability".into(),
            ))
        }
    };
    PauliChannel::new(amps[0], amps[1], amps[2], amps[3])
}

/// Kraus operators on the full three-qubit space.
#[derive(Clone, Debug)]
pub struct KrausSet {
    operators: Vec<ComplexMatrix>,
    placement: Vec<Qubit>,
}

impl KrausSet {
    /// Wraps arbitrary 8x8 operators without checking completeness.
    pub fn from_operators(operators: Vec<ComplexMatrix>, placement: Vec<Qubit>) -> Result<Self> {
        if let Some(bad) = operators.iter().find(|k| k.dim() != DIM) {
            return Err(Error::DimensionMismatch {
                expected: DIM,
                got: bad.dim(),
            });
        }
        Ok(Self {
            operators,
            placement,
        })
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn placement(&self) -> &[Qubit] {
        &self.placement
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }
}

/// Lifts single-qubit channels on distinct qubits to `4^n` product
/// operators; empty slots carry the identity.
pub fn lift(channels: &[(PauliChannel, Qubit)]) -> Result<KrausSet> {
    if channels.is_empty() || channels.len() > 3 {
        return Err(Error::Precondition(format!(
            "between one and three channels required, got {}",
            channels.len()
        )));
    }
    let mut slots: [Option<&PauliChannel>; 3] = [None; 3];
    for (ch, q) in channels {
        if slots[q.slot()].replace(ch).is_some() {
            return Err(Error::InvalidQubits(format!("{q} carries two channels")));
        }
    }
    let factors: Vec<Vec<ComplexMatrix>> = slots
        .iter()
        .map(|s| match s {
            Some(ch) => ch.kraus().to_vec(),
            None => vec![identity2()],
        })
        .collect();
    let mut operators = Vec::with_capacity(4usize.pow(channels.len() as u32));
    for k1 in &factors[0] {
        for k2 in &factors[1] {
            let k12 = k1.kron_unchecked(k2);
            for k3 in &factors[2] {
                operators.push(k12.kron_unchecked(k3));
            }
        }
    }
    let mut placement: Vec<Qubit> = channels.iter().map(|(_, q)| *q).collect();
    placement.sort();
    Ok(KrausSet {
        operators,
        placement,
    })
}

/// max |sum K^dagger K - I|.
pub fn validate_cptp(ks: &KrausSet) -> f64 {
    let mut acc = ComplexMatrix::zeros(DIM);
    for k in &ks.operators {
        acc = &acc + &(&k.adjoint() * k);
    }
    acc.max_abs_diff(&ComplexMatrix::identity(DIM))
}

/// rho -> sum K rho K^dagger.
pub fn apply(rho: &DensityMatrix, ks: &KrausSet) -> Result<DensityMatrix> {
    if rho.dim() != DIM {
        return Err(Error::DimensionMismatch {
            expected: DIM,
            got: rho.dim(),
        });
    }
    let residual = validate_cptp(ks);
    if residual > COMPLETENESS_TOL {
        return Err(Error::InvalidChannel(residual));
    }
    let mut acc = ComplexMatrix::zeros(DIM);
    for k in &ks.operators {
        acc = &acc + &(&(k * rho.matrix()) * &k.adjoint());
    }
    Ok(DensityMatrix::from_trusted(acc))
}

/// Lifts and applies in one step.
pub fn apply_channels(rho: &DensityMatrix, channels: &[(PauliChannel, Qubit)]) -> Result<DensityMatrix> {
    apply(rho, &lift(channels)?)
}

/// A parsed `family:qN:key=value,...` channel description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub family: ChannelFamily,
    pub slot: Qubit,
    pub params: Vec<(String, f64)>,
    #[serde(skip)]
    channel: Option<PauliChannel>,
}

impl ChannelSpec {
    pub fn channel(&self) -> PauliChannel {
        self.channel.expect("validated at parse time")
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

impl fmt::Display for ChannelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.family, self.slot)?;
        if !self.params.is_empty() {
            let joined: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            write!(f, ":{}", joined.join(","))?;
        }
        Ok(())
    }
}

impl FromStr for ChannelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_channel_spec(s)
    }
}

fn parse_err(pos: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        pos,
        msg: msg.into(),
    }
}

/// Parses `family ':' 'q' slot (':' key '=' float (',' key '=' float)*)*`.
///
/// Families: `bitflip|phaseflip|bitphaseflip|depolarizing|pauli`. The
/// one-parameter families take `p`; `pauli` takes `a1..a4` (missing ones are
/// zero). Positions in errors are byte offsets into `text`.
pub fn parse_channel_spec(text: &str) -> Result<ChannelSpec> {
    let mut segments = Vec::new();
    let mut start = 0;
    for (i, ch) in text.char_indices() {
        if ch == ':' {
            segments.push((start, &text[start..i]));
            start = i + 1;
        }
    }
    segments.push((start, &text[start..]));

    let (fpos, fname) = segments[0];
    let family: ChannelFamily = fname
        .parse()
        .map_err(|_| parse_err(fpos, format!("unknown channel family '{fname}'")))?;

    let &(spos, stext) = segments
        .get(1)
        .ok_or_else(|| parse_err(text.len(), "expected ':q<slot>' after the family"))?;
    let digits = stext
        .strip_prefix('q')
        .ok_or_else(|| parse_err(spos, format!("expected 'q<slot>', found '{stext}'")))?;
    let label: u8 = digits
        .parse()
        .map_err(|_| parse_err(spos + 1, format!("invalid slot '{digits}'")))?;
    let slot = Qubit::new(label)
        .map_err(|_| parse_err(spos + 1, format!("slot {label} out of range (expected 1, 2 or 3)")))?;

    let allowed: &[&str] = match family {
        ChannelFamily::Pauli => &["a1", "a2", "a3", "a4"],
        _ => &["p"],
    };
    let mut params: Vec<(String, f64)> = Vec::new();
    for &(seg_pos, seg) in &segments[2..] {
        let mut item_pos = seg_pos;
        for item in seg.split(',') {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| parse_err(item_pos, format!("expected key=value, found '{item}'")))?;
            if !allowed.contains(&key) {
                return Err(parse_err(
                    item_pos,
                    format!("unknown key '{key}' for {family} (allowed: {})", allowed.join(", ")),
                ));
            }
            if params.iter().any(|(k, _)| k == key) {
                return Err(parse_err(item_pos, format!("duplicate key '{key}'")));
            }
            let vpos = item_pos + key.len() + 1;
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| parse_err(vpos, format!("malformed number '{value}'")))?;
            if !v.is_finite() {
                return Err(parse_err(vpos, format!("non-finite number '{value}'")));
            }
            params.push((key.to_string(), v));
            item_pos += item.len() + 1;
        }
    }

    let get = |k: &str| params.iter().find(|(key, _)| key == k).map(|(_, v)| *v);
    let channel = match family {
        ChannelFamily::Pauli => {
            if params.is_empty() {
                return Err(parse_err(text.len(), "pauli channel needs at least one of a1..a4"));
            }
            let a = |k| get(k).unwrap_or(0.0);
            PauliChannel::new(a("a1"), a("a2"), a("a3"), a("a4"))?
        }
        _ => {
            let p = get("p").ok_or_else(|| parse_err(text.len(), format!("{family} needs p=<probability>")))?;
            named_channel(family, p)?
        }
    };
    Ok(ChannelSpec {
        family,
        slot,
        params,
        channel: Some(channel),
    })
}
