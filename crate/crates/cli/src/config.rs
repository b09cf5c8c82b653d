//! Experiment configuration: frequency, constant angle, conjugation recipe,
//! seeded perturbation, scheme parameters and output paths.
//!
//! A configuration is plain data. Every random draw is seeded from a field
//! of the configuration, so the configuration alone determines the
//! synthesized cocycle and every report derived from it.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use kamrot_core::{Frequency, GroupElement, SchemeParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Named base frequencies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// `(sqrt 5 - 1) / 2`.
    Golden,
    /// `sqrt 2 - 1`.
    Sqrt2,
    /// `sum_{n=1}^{5} 2^{-n!}`: a truncated Liouville number, far outside any
    /// Diophantine class at moderate horizons.
    Liouville,
}

impl Preset {
    pub fn frequency(self) -> Frequency {
        match self {
            Preset::Golden => Frequency::golden(),
            Preset::Sqrt2 => Frequency::sqrt2(),
            Preset::Liouville => {
                let value = (1..=5u32)
                    .map(|n| {
                        let fact: u32 = (1..=n).product();
                        2f64.powi(-(fact as i32))
                    })
                    .sum();
                Frequency::new(vec![value]).expect("preset lies in (0, 1)")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FrequencySpec {
    Preset { name: Preset },
    Explicit { values: Vec<f64> },
}

impl FrequencySpec {
    pub fn resolve(&self) -> CliResult<Frequency> {
        match self {
            FrequencySpec::Preset { name } => Ok(name.frequency()),
            FrequencySpec::Explicit { values } => Ok(Frequency::new(values.clone())?),
        }
    }
}

/// One factor of the conjugation applied to the base cocycle, listed in
/// chain order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FactorSpec {
    /// The torus morphism `x -> exp((k . x) e)`.
    Winding { k: Vec<i64> },
    /// `exp(Y)` for a seeded zero-mean `Y` of the given band and `H^0` norm.
    Exp { band: usize, amplitude: f64, seed: u64 },
    /// A constant group element given as a quaternion `(w, x, y, z)`.
    Constant { quaternion: [f64; 4] },
}

impl FactorSpec {
    pub fn constant(g: GroupElement) -> Self {
        FactorSpec::Constant {
            quaternion: g.quaternion(),
        }
    }
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .map(|v| v.trim().parse::<T>().map_err(|_| format!("cannot parse {v:?}")))
        .collect()
}

/// Textual form used by the `--factor` flag:
/// `winding:K1,K2`, `exp:BAND:AMPLITUDE:SEED`, `constant:W,X,Y,Z`.
impl FromStr for FactorSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split(':');
        let kind = parts.next().unwrap_or_default();
        let rest: Vec<&str> = parts.collect();
        match (kind, rest.as_slice()) {
            ("winding", [k]) => Ok(FactorSpec::Winding { k: parse_list(k)? }),
            ("exp", [band, amplitude, seed]) => Ok(FactorSpec::Exp {
                band: band.parse().map_err(|_| format!("bad band {band:?}"))?,
                amplitude: amplitude
                    .parse()
                    .map_err(|_| format!("bad amplitude {amplitude:?}"))?,
                seed: seed.parse().map_err(|_| format!("bad seed {seed:?}"))?,
            }),
            ("constant", [q]) => {
                let q: Vec<f64> = parse_list(q)?;
                let quaternion: [f64; 4] = q
                    .try_into()
                    .map_err(|_| "constant needs four components".to_string())?;
                Ok(FactorSpec::Constant { quaternion })
            }
            _ => Err(format!(
                "unrecognised factor {s:?}; expected winding:K1,..., exp:BAND:AMP:SEED or constant:W,X,Y,Z"
            )),
        }
    }
}

impl fmt::Display for FactorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[String]| v.join(",");
        match self {
            FactorSpec::Winding { k } => {
                write!(f, "winding:{}", join(&k.iter().map(|v| v.to_string()).collect::<Vec<_>>()))
            }
            FactorSpec::Exp {
                band,
                amplitude,
                seed,
            } => write!(f, "exp:{band}:{amplitude:e}:{seed}"),
            FactorSpec::Constant { quaternion } => write!(
                f,
                "constant:{}",
                join(&quaternion.iter().map(|v| v.to_string()).collect::<Vec<_>>())
            ),
        }
    }
}

/// Seeded zero-mean perturbation `P` of the base cocycle `exp(theta e) e^{P}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub band: usize,
    /// `H^0` norm of `P`.
    pub amplitude: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputPaths {
    /// JSON report.
    pub report: Option<PathBuf>,
    /// Per-step CSV diagnostics.
    pub diagnostics: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub frequency: FrequencySpec,
    /// Angle of the base constant `exp(theta e)`.
    pub theta: f64,
    pub chain: Vec<FactorSpec>,
    pub perturbation: Option<PerturbationSpec>,
    pub params: SchemeParams,
    /// Band at which the conjugated cocycle is represented; the scheme band
    /// when absent.
    pub synthesis_band: Option<usize>,
    /// Search horizon of the ground-truth equivalence check.
    pub horizon: u64,
    /// Matching tolerance of the ground-truth equivalence check.
    pub truth_tolerance: f64,
    pub output: OutputPaths,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            frequency: FrequencySpec::Preset {
                name: Preset::Golden,
            },
            theta: 0.17,
            chain: Vec::new(),
            perturbation: None,
            params: SchemeParams::default(),
            synthesis_band: None,
            horizon: 10,
            truth_tolerance: 1e-6,
            output: OutputPaths::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> CliResult<()> {
        let alpha = self.frequency.resolve()?;
        self.params.validate()?;
        if !self.theta.is_finite() {
            return Err(CliError::Config("theta must be finite".into()));
        }
        if self.truth_tolerance.is_nan() || self.truth_tolerance <= 0.0 {
            return Err(CliError::Config("truth_tolerance must be positive".into()));
        }
        for (i, f) in self.chain.iter().enumerate() {
            match f {
                FactorSpec::Winding { k } if k.len() != alpha.dim() => {
                    return Err(CliError::Config(format!(
                        "factor {i}: winding has {} components, frequency has {}",
                        k.len(),
                        alpha.dim()
                    )))
                }
                FactorSpec::Exp { amplitude, .. } if !(amplitude.is_finite() && *amplitude >= 0.0) => {
                    return Err(CliError::Config(format!("factor {i}: bad amplitude {amplitude}")))
                }
                FactorSpec::Constant { quaternion } if quaternion.iter().all(|v| *v == 0.0) => {
                    return Err(CliError::Config(format!("factor {i}: zero quaternion")))
                }
                _ => {}
            }
        }
        if let Some(p) = &self.perturbation {
            if !(p.amplitude.is_finite() && p.amplitude >= 0.0) {
                return Err(CliError::Config(format!("bad perturbation amplitude {}", p.amplitude)));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding, in hex.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("configuration serialises");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serialises")
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Overlays `top` onto `base`: objects merge key by key, anything else
/// (including tagged enum objects, recognised by their `kind` key) is
/// replaced wholesale.
pub fn overlay(base: &mut serde_json::Value, top: serde_json::Value) {
    use serde_json::Value;
    match (base, top) {
        (Value::Object(b), Value::Object(t)) if !t.contains_key("kind") => {
            for (key, value) in t {
                match b.get_mut(&key) {
                    Some(slot) => overlay(slot, value),
                    None => {
                        b.insert(key, value);
                    }
                }
            }
        }
        (slot, t) => *slot = t,
    }
}

/// The configuration given by flags, overridden field by field by a JSON
/// configuration file when one is supplied.
pub fn merge_file_over(flags: &ExperimentConfig, file_text: Option<&str>) -> CliResult<ExperimentConfig> {
    let Some(text) = file_text else {
        return Ok(flags.clone());
    };
    let mut base = serde_json::to_value(flags)?;
    let top: serde_json::Value = serde_json::from_str(text)?;
    overlay(&mut base, top);
    Ok(serde_json::from_value(base)?)
}
