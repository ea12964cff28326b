//! State and channel arguments.

use std::path::Path;

use ghzdyn::channels::{parse_channel_spec, ChannelSpec};
use ghzdyn::linalg::C64;
use ghzdyn::states::{ghz, random_ghz_type, seeded_rng, PureState, DIM};

#[derive(Clone, Debug, PartialEq)]
pub enum StateSpec {
    Ghz,
    GhzLu { seed: u64 },
    File(String),
}

impl StateSpec {
    pub fn parse(text: &str) -> Result<Self, String> {
        if text == "ghz" {
            return Ok(StateSpec::Ghz);
        }
        if let Some(rest) = text.strip_prefix("ghz-lu:") {
            let seed = rest
                .strip_prefix("seed=")
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| format!("expected ghz-lu:seed=N, got '{text}'"))?;
            return Ok(StateSpec::GhzLu { seed });
        }
        if let Some(path) = text.strip_prefix("file:") {
            if path.is_empty() {
                return Err("file: needs a path".into());
            }
            return Ok(StateSpec::File(path.to_string()));
        }
        Err(format!("unknown state '{text}' (expected ghz, ghz-lu:seed=N or file:PATH)"))
    }

    pub fn resolve(&self) -> Result<PureState, String> {
        match self {
            StateSpec::Ghz => Ok(ghz()),
            StateSpec::GhzLu { seed } => Ok(random_ghz_type(&mut seeded_rng(*seed))),
            StateSpec::File(path) => read_amplitudes(Path::new(path)),
        }
    }

    pub fn label(&self) -> String {
        match self {
            StateSpec::Ghz => "ghz".into(),
            StateSpec::GhzLu { seed } => format!("ghz-lu:seed={seed}"),
            StateSpec::File(p) => format!("file:{p}"),
        }
    }
}

/// Eight non-blank lines of `re im`; `#` starts a comment.
pub fn read_amplitudes(path: &Path) -> Result<PureState, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_amplitudes(&text).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn parse_amplitudes(text: &str) -> Result<PureState, String> {
    let mut amps = Vec::with_capacity(DIM);
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| format!("line {}: expected two numbers", n + 1))?;
        match nums.as_slice() {
            [re, im] => amps.push(C64::new(*re, *im)),
            _ => return Err(format!("line {}: expected 're im'", n + 1)),
        }
    }
    let amps: [C64; DIM] = amps
        .try_into()
        .map_err(|v: Vec<C64>| format!("expected {DIM} amplitudes, found {}", v.len()))?;
    PureState::new(amps).map_err(|e| e.to_string())
}

pub fn parse_channels(specs: &[String]) -> Result<Vec<ChannelSpec>, String> {
    if specs.len() > 3 {
        return Err(format!("at most three channels, got {}", specs.len()));
    }
    let parsed: Vec<ChannelSpec> = specs
        .iter()
        .map(|s| parse_channel_spec(s).map_err(|e| format!("channel '{s}': {e}")))
        .collect::<Result<_, _>>()?;
    for (i, c) in parsed.iter().enumerate() {
        if parsed[..i].iter().any(|d| d.slot == c.slot) {
            return Err(format!("two channels act on {}", c.slot));
        }
    }
    Ok(parsed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_specs() {
        assert_eq!(StateSpec::parse("ghz").unwrap(), StateSpec::Ghz);
        assert_eq!(StateSpec::parse("ghz-lu:seed=5").unwrap(), StateSpec::GhzLu { seed: 5 });
        assert_eq!(StateSpec::parse("file:x.txt").unwrap(), StateSpec::File("x.txt".into()));
        for bad in ["", "w", "ghz-lu:5", "ghz-lu:seed=x", "file:"] {
            assert!(StateSpec::parse(bad).is_err(), "{bad}");
        }
        assert_eq!(StateSpec::parse("ghz-lu:seed=5").unwrap().label(), "ghz-lu:seed=5");
    }

    #[test]
    fn amplitude_file() {
        let h = 0.5f64.sqrt();
        let text = format!("# ghz\n{h} 0\n0 0\n0 0\n0 0\n\n0 0\n0 0\n0 0\n{h} 0\n");
        let psi = parse_amplitudes(&text).unwrap();
        assert_eq!(psi, ghz());
        assert!(parse_amplitudes("1 0\n").is_err());
        assert!(parse_amplitudes(&text.replace("0 0\n0 0\n0 0\n\n", "0 0 0\n")).is_err());
        assert!(parse_amplitudes(&"1 0\n".repeat(8)).is_err());
    }

    #[test]
    fn channel_lists() {
        let ok = parse_channels(&["bitflip:q2:p=0.2".into(), "bitflip:q3:p=0.1".into()]).unwrap();
        assert_eq!(ok.len(), 2);
        assert!(parse_channels(&["bitflip:q3:p=0.2".into(), "phaseflip:q3:p=0.1".into()]).is_err());
        assert!(parse_channels(&vec!["bitflip:q1:p=0.1".to_string(); 4]).is_err());
    }
}
