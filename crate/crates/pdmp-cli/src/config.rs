//! Experiment configuration: the hypercube target family, sampler, kernel,
//! basis, horizon and outputs. Built from command-line flags over an
//! optional JSON config file; flags win.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerChoice {
    Bps,
    Zigzag,
    Cs,
}

impl FromStr for SamplerChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bps" => Ok(SamplerChoice::Bps),
            "zigzag" => Ok(SamplerChoice::Zigzag),
            "cs" => Ok(SamplerChoice::Cs),
            other => Err(format!("unknown sampler `{other}` (bps|zigzag|cs)")),
        }
    }
}

impl fmt::Display for SamplerChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplerChoice::Bps => "bps",
            SamplerChoice::Zigzag => "zigzag",
            SamplerChoice::Cs => "cs",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelChoice {
    Flip,
    MetropolisHastings { iters: u32 },
    Limit,
}

impl FromStr for KernelChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "flip" => Ok(KernelChoice::Flip),
            "limit" => Ok(KernelChoice::Limit),
            other => match other.strip_prefix("mh:") {
                Some(n) => {
                    let iters: u32 = n
                        .parse()
                        .map_err(|_| format!("bad iteration count in `{other}`"))?;
                    if iters == 0 {
                        return Err("mh kernel needs at least one iteration".into());
                    }
                    Ok(KernelChoice::MetropolisHastings { iters })
                }
                None => Err(format!("unknown kernel `{other}` (flip|mh:<iters>|limit)")),
            },
        }
    }
}

impl fmt::Display for KernelChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelChoice::Flip => f.write_str("flip"),
            KernelChoice::MetropolisHastings { iters } => write!(f, "mh:{iters}"),
            KernelChoice::Limit => f.write_str("limit"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisChoice {
    Canonical,
    Rotated { seed: u64 },
}

impl FromStr for BasisChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "canonical" => Ok(BasisChoice::Canonical),
            other => match other.strip_prefix("rotated:") {
                Some(n) => n
                    .parse()
                    .map(|seed| BasisChoice::Rotated { seed })
                    .map_err(|_| format!("bad rotation seed in `{other}`")),
                None => Err(format!(
                    "unknown basis `{other}` (canonical|rotated:<seed>)"
                )),
            },
        }
    }
}

impl fmt::Display for BasisChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisChoice::Canonical => f.write_str("canonical"),
            BasisChoice::Rotated { seed } => write!(f, "rotated:{seed}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HorizonChoice {
    Time(f64),
    Events(u64),
}

impl FromStr for HorizonChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(t) = s.strip_prefix("time:") {
            let t: f64 = t.parse().map_err(|_| format!("bad time in `{s}`"))?;
            if !(t > 0.0) {
                return Err("horizon time must be positive".into());
            }
            return Ok(HorizonChoice::Time(t));
        }
        if let Some(n) = s.strip_prefix("events:") {
            let n: u64 = n.parse().map_err(|_| format!("bad event count in `{s}`"))?;
            if n == 0 {
                return Err("horizon needs at least one event".into());
            }
            return Ok(HorizonChoice::Events(n));
        }
        Err(format!("unknown horizon `{s}` (time:<T>|events:<N>)"))
    }
}

impl fmt::Display for HorizonChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HorizonChoice::Time(t) => write!(f, "time:{t}"),
            HorizonChoice::Events(n) => write!(f, "events:{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BpsVelocities {
    Sphere,
    Gaussian,
}

impl FromStr for BpsVelocities {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sphere" => Ok(BpsVelocities::Sphere),
            "gaussian" => Ok(BpsVelocities::Gaussian),
            other => Err(format!("unknown velocity law `{other}` (sphere|gaussian)")),
        }
    }
}

macro_rules! string_serde {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.collect_str(self)
            }
        }
        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                s.parse().map_err(D::Error::custom)
            }
        }
    };
}

string_serde!(KernelChoice);
string_serde!(BasisChoice);
string_serde!(HorizonChoice);

/// Full description of one experiment: the two-sided Gaussian hypercube
/// target, the sampler and boundary kernel, and where to write artifacts.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub sigma_in: f64,
    pub sigma_out: f64,
    pub alpha_in: f64,
    pub alpha_out: f64,
    pub sampler: SamplerChoice,
    pub refresh_rate: f64,
    pub kernel: KernelChoice,
    pub basis: BasisChoice,
    pub horizon: HorizonChoice,
    pub chains: u64,
    pub seed: u64,
    pub bps_velocities: BpsVelocities,
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dim: 2,
            sigma_in: 1.0,
            sigma_out: 1.0,
            alpha_in: 1.0,
            alpha_out: 0.0,
            sampler: SamplerChoice::Bps,
            refresh_rate: 1.0,
            kernel: KernelChoice::Limit,
            basis: BasisChoice::Canonical,
            horizon: HorizonChoice::Events(1_000),
            chains: 1,
            seed: 0,
            bps_velocities: BpsVelocities::Sphere,
            csv: None,
            json: None,
            svg: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: &str| Err(CliError::Config(msg.to_string()));
        if self.dim == 0 {
            return bad("dim must be at least 1");
        }
        if !(self.sigma_in > 0.0) || !(self.sigma_out > 0.0) {
            return bad("sigma_in and sigma_out must be positive");
        }
        if self.alpha_in < 0.0 || self.alpha_out < 0.0 {
            return bad("weights must be nonnegative");
        }
        if self.alpha_in + self.alpha_out <= 0.0 {
            return bad("at least one of alpha_in, alpha_out must be positive");
        }
        if self.refresh_rate < 0.0 {
            return bad("refresh_rate must be nonnegative");
        }
        if self.chains == 0 {
            return bad("chains must be at least 1");
        }
        Ok(())
    }

    /// Path of chain `k`'s CSV: the configured path itself for single-chain
    /// runs, otherwise suffixed with the chain index.
    pub fn chain_csv_path(&self, chain: u64) -> Option<PathBuf> {
        let base = self.csv.as_ref()?;
        if self.chains == 1 {
            return Some(base.clone());
        }
        let stem = base
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let ext = base
            .extension()
            .map(|s| format!(".{}", s.to_string_lossy()))
            .unwrap_or_default();
        Some(base.with_file_name(format!("{stem}_chain{chain}{ext}")))
    }
}
