//! Run configuration: defaults, an optional TOML file, then command-line
//! flags, each layer overriding the previous one.

use std::path::{Path, PathBuf};

use bosonic_polar::channel::ChannelParams;
use bosonic_polar::constellations::{ConstellationKind, MAX_POINTS};
use bosonic_polar::polar::MIN_MC_BUDGET;
use clap::ValueEnum;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Settings specific to the `polar` subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarConfig {
    /// Points per quadrature; must be a power of two.
    pub m: usize,
    pub blocklength: usize,
    pub trials: usize,
    /// Fraction of the estimated heterodyne information carried as data.
    pub backoff: f64,
    pub mc_budget: usize,
}

impl Default for PolarConfig {
    fn default() -> Self {
        Self { m: 4, blocklength: 1024, trials: 500, backoff: 0.7, mc_budget: 5000 }
    }
}

/// Fully resolved configuration shared by every subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub k: f64,
    pub n0: f64,
    pub n: f64,
    pub kinds: Vec<ConstellationKind>,
    pub m_min: usize,
    pub m_max: usize,
    /// Fock cutoff override; `None` uses the per-ensemble rule.
    pub dim: Option<usize>,
    pub seed: u64,
    /// `None` writes to standard output.
    pub out: Option<PathBuf>,
    /// `None` picks the subcommand's natural format.
    pub format: Option<Format>,
    pub polar: PolarConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            k: 0.8,
            n0: 0.0,
            n: 7.0,
            kinds: ConstellationKind::ALL.to_vec(),
            m_min: 2,
            m_max: 10,
            dim: None,
            seed: 1,
            out: None,
            format: None,
            polar: PolarConfig::default(),
        }
    }
}

/// Kinds given either as a list or as the single word `all`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum KindList {
    One(String),
    Many(Vec<String>),
}

/// On-disk layout of the configuration file. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    k: Option<f64>,
    n0: Option<f64>,
    n: Option<f64>,
    kinds: Option<KindList>,
    m_min: Option<usize>,
    m_max: Option<usize>,
    dim: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: Option<Format>,
    polar: Option<FilePolar>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FilePolar {
    m: Option<usize>,
    blocklength: Option<usize>,
    trials: Option<usize>,
    backoff: Option<f64>,
    mc_budget: Option<usize>,
}

/// Values supplied on the command line; `None` leaves the lower layer alone.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub k: Option<f64>,
    pub n0: Option<f64>,
    pub n: Option<f64>,
    pub kinds: Option<Vec<String>>,
    pub m_min: Option<usize>,
    pub m_max: Option<usize>,
    pub dim: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub polar_m: Option<usize>,
    pub blocklength: Option<usize>,
    pub trials: Option<usize>,
    pub backoff: Option<f64>,
    pub mc_budget: Option<usize>,
}

/// Parse a kind list; the single entry `all` expands to every family.
pub fn parse_kinds<S: AsRef<str>>(names: &[S]) -> Result<Vec<ConstellationKind>, CliError> {
    if names.len() == 1 && names[0].as_ref().trim().eq_ignore_ascii_case("all") {
        return Ok(ConstellationKind::ALL.to_vec());
    }
    let mut kinds = Vec::with_capacity(names.len());
    for name in names {
        let kind: ConstellationKind = name.as_ref().parse()?;
        if !kinds.contains(&kind) {
            kinds.push(kind);
        }
    }
    Ok(kinds)
}

impl RunConfig {
    /// Defaults, then `file` if given, then `flags`; the result is validated.
    pub fn resolve(file: Option<&Path>, flags: &Overrides) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)?;
            cfg.apply_file(toml::from_str(&text).map_err(|e| {
                CliError::Usage(format!("config file {}: {e}", path.display()))
            })?)?;
        }
        cfg.apply_flags(flags)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_file(&mut self, f: FileConfig) -> Result<(), CliError> {
        set(&mut self.k, f.k);
        set(&mut self.n0, f.n0);
        set(&mut self.n, f.n);
        if let Some(list) = f.kinds {
            self.kinds = match list {
                KindList::One(name) => parse_kinds(&[name])?,
                KindList::Many(names) => parse_kinds(&names)?,
            };
        }
        set(&mut self.m_min, f.m_min);
        set(&mut self.m_max, f.m_max);
        self.dim = f.dim.or(self.dim);
        set(&mut self.seed, f.seed);
        self.out = f.out.or(self.out.take());
        self.format = f.format.or(self.format);
        if let Some(p) = f.polar {
            set(&mut self.polar.m, p.m);
            set(&mut self.polar.blocklength, p.blocklength);
            set(&mut self.polar.trials, p.trials);
            set(&mut self.polar.backoff, p.backoff);
            set(&mut self.polar.mc_budget, p.mc_budget);
        }
        Ok(())
    }

    fn apply_flags(&mut self, o: &Overrides) -> Result<(), CliError> {
        set(&mut self.k, o.k);
        set(&mut self.n0, o.n0);
        set(&mut self.n, o.n);
        if let Some(names) = &o.kinds {
            self.kinds = parse_kinds(names)?;
        }
        set(&mut self.m_min, o.m_min);
        set(&mut self.m_max, o.m_max);
        self.dim = o.dim.or(self.dim);
        set(&mut self.seed, o.seed);
        self.out = o.out.clone().or(self.out.take());
        self.format = o.format.or(self.format);
        set(&mut self.polar.m, o.polar_m);
        set(&mut self.polar.blocklength, o.blocklength);
        set(&mut self.polar.trials, o.trials);
        set(&mut self.polar.backoff, o.backoff);
        set(&mut self.polar.mc_budget, o.mc_budget);
        Ok(())
    }

    fn validate(&self) -> Result<(), CliError> {
        self.channel()?;
        if self.kinds.is_empty() {
            return Err(CliError::Usage("at least one constellation kind is required".into()));
        }
        if self.m_min < 2 {
            return Err(CliError::Usage(format!("m-min must be at least 2, got {}", self.m_min)));
        }
        if self.m_max < self.m_min {
            return Err(CliError::Usage(format!(
                "m-max ({}) is smaller than m-min ({})",
                self.m_max, self.m_min
            )));
        }
        if self.m_max > MAX_POINTS {
            return Err(CliError::Usage(format!("m-max must not exceed {MAX_POINTS}")));
        }
        if self.dim == Some(0) {
            return Err(CliError::Usage("dim must be positive".into()));
        }
        let p = &self.polar;
        if !(p.backoff > 0.0 && p.backoff <= 1.0) {
            return Err(CliError::Usage(format!("backoff must lie in (0, 1], got {}", p.backoff)));
        }
        if p.mc_budget < MIN_MC_BUDGET {
            return Err(CliError::Usage(format!("mc-budget must be at least {MIN_MC_BUDGET}")));
        }
        if !p.blocklength.is_power_of_two() || p.blocklength < 2 {
            return Err(CliError::Usage(format!(
                "blocklength must be a power of two >= 2, got {}",
                p.blocklength
            )));
        }
        Ok(())
    }

    /// Channel parameters with their derived quantities.
    pub fn channel(&self) -> Result<ChannelParams, CliError> {
        Ok(ChannelParams::new(self.k, self.n0, self.n)?)
    }

    pub fn m_values(&self) -> std::ops::RangeInclusive<usize> {
        self.m_min..=self.m_max
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}
