//! The four subcommands, each turning a resolved configuration into output.

use std::f64::consts::LN_2;

use bosonic_polar::channel::{capacity_c, gaussian_rate_limit, ChannelParams};
use bosonic_polar::chi2::delta_b_bound;
use bosonic_polar::constellations::{classical_chi2_kernel, product_constellation, ConstellationKind};
use bosonic_polar::polar::{design_codes, simulate, InducedChannel};
use bosonic_polar::rates::{analyze, delta_b, RateAnalysis, TRUNCATION_WARN};
use bosonic_polar::Error;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{Output, Table};

/// Trace deficit above which a result is rejected rather than reported.
pub const TRUNCATION_LIMIT: f64 = 1e-6;

/// Stream offset separating the simulation seed from the design seed.
const SIMULATION_SEED_OFFSET: u64 = 0x9e37_79b9_7f4a_7c15;

pub const RATES_COLUMNS: &[&str] = &[
    "kind",
    "m",
    "classical_rate_bits",
    "quantum_rate_bits",
    "delta_B",
    "delta_E",
    "chi2_bound",
    "dim",
    "trace_deficit",
];

pub const CHI2_COLUMNS: &[&str] =
    &["kind", "m", "chi2_classical", "delta_B_bound", "delta_B_actual", "c_decay", "s"];

pub const CONSTELLATION_COLUMNS: &[&str] = &["kind", "m", "index", "point", "prob"];

/// Parameters echoed into every JSON document.
#[derive(Debug, Serialize)]
struct TableParams<'a> {
    channel: &'a ChannelParams,
    kinds: Vec<&'static str>,
    m_min: usize,
    m_max: usize,
    dim: Option<usize>,
}

fn table_params(cfg: &RunConfig, p: &ChannelParams) -> Result<Value, CliError> {
    Ok(serde_json::to_value(TableParams {
        channel: p,
        kinds: cfg.kinds.iter().map(|k| k.as_str()).collect(),
        m_min: cfg.m_min,
        m_max: cfg.m_max,
        dim: cfg.dim,
    })?)
}

fn check_truncation(kind: ConstellationKind, m: usize, deficit: f64) -> Result<(), CliError> {
    if deficit > TRUNCATION_LIMIT {
        return Err(Error::Truncation(format!(
            "{kind} m={m}: trace deficit {deficit:.3e} exceeds {TRUNCATION_LIMIT:e}; \
             raise --dim or omit it to use the automatic cutoff"
        ))
        .into());
    }
    if deficit > TRUNCATION_WARN {
        eprintln!("warning: {kind} m={m}: trace deficit {deficit:.3e}");
    }
    Ok(())
}

/// Rate table: one row per kind and `m`, preceded by the capacity and the
/// Gaussian-input quantum rate as reference rows. Entropic quantities and
/// the bound are in bits.
pub fn cmd_rates(cfg: &RunConfig) -> Result<Output, CliError> {
    let p = cfg.channel()?;
    let mut table = Table::new("rates", RATES_COLUMNS);
    table.push_reference("capacity_C", "classical_rate_bits", capacity_c(&p));
    table.push_reference("gaussian_rate_limit", "quantum_rate_bits", gaussian_rate_limit(&p));
    for &kind in &cfg.kinds {
        for m in cfg.m_values() {
            let c = kind.build(m)?;
            let q = product_constellation(&c, p.n)?;
            let a: RateAnalysis = analyze(&p, &q, cfg.dim)?;
            check_truncation(kind, m, a.trace_deficit())?;
            table.push(vec![
                kind.as_str().into(),
                m.into(),
                a.holevo_rate.into(),
                a.quantum_rate.into(),
                a.delta_b_entropy.into(),
                a.delta_e.into(),
                (delta_b_bound(&p, &c) / LN_2).into(),
                a.dim_b.max(a.dim_e).into(),
                a.trace_deficit().into(),
            ]);
        }
    }
    Ok(Output::Table { params: table_params(cfg, &p)?, table })
}

/// Bound table: classical chi-square divergence, the receiver-gap bound it
/// implies (bits) and the receiver gap itself (bits).
pub fn cmd_chi2(cfg: &RunConfig) -> Result<Output, CliError> {
    let p = cfg.channel()?;
    let mut table = Table::new("chi2", CHI2_COLUMNS);
    for &kind in &cfg.kinds {
        for m in cfg.m_values() {
            let c = kind.build(m)?;
            let q = product_constellation(&c, p.n)?;
            let (actual, _) = delta_b(&p, &q, cfg.dim)?;
            table.push(vec![
                kind.as_str().into(),
                m.into(),
                classical_chi2_kernel(&c, p.s).into(),
                (delta_b_bound(&p, &c) / LN_2).into(),
                actual.into(),
                p.c_decay.into(),
                p.s.into(),
            ]);
        }
    }
    Ok(Output::Table { params: table_params(cfg, &p)?, table })
}

/// Points and probabilities of each unit-variance real constellation.
pub fn cmd_constellation(cfg: &RunConfig) -> Result<Output, CliError> {
    let p = cfg.channel()?;
    let mut table = Table::new("constellation", CONSTELLATION_COLUMNS);
    for &kind in &cfg.kinds {
        for m in cfg.m_values() {
            let c = kind.build(m)?;
            for (i, (&x, &q)) in c.points().iter().zip(c.probs()).enumerate() {
                table.push(vec![kind.as_str().into(), m.into(), i.into(), x.into(), q.into()]);
            }
        }
    }
    Ok(Output::Table { params: table_params(cfg, &p)?, table })
}

#[derive(Debug, Serialize)]
struct ConstellationInfo {
    kind: &'static str,
    m: usize,
    bits_per_quadrature: usize,
    mean_photons: f64,
}

#[derive(Debug, Serialize)]
struct DesignInfo {
    backoff: f64,
    mc_budget: usize,
    total_info_bits: usize,
}

#[derive(Debug, Serialize)]
struct Seeds {
    design: u64,
    simulation: u64,
}

/// Multilevel polar coding over the heterodyne-detected constellation:
/// code design, then `trials` frames of end-to-end simulation.
pub fn cmd_polar(cfg: &RunConfig, version: &str) -> Result<Output, CliError> {
    let p = cfg.channel()?;
    let kind = match cfg.kinds.as_slice() {
        [only] => *only,
        kinds if kinds == ConstellationKind::ALL => ConstellationKind::Equilattice,
        _ => return Err(CliError::Usage("polar takes exactly one constellation kind".into())),
    };
    let pc = &cfg.polar;
    let c = kind.build(pc.m)?;
    let ch = InducedChannel::new(p, product_constellation(&c, p.n)?)?;
    let seeds = Seeds { design: cfg.seed, simulation: cfg.seed ^ SIMULATION_SEED_OFFSET };
    let codes = design_codes(&ch, pc.blocklength, pc.backoff, pc.mc_budget, seeds.design)?;
    let report = simulate(&ch, &codes, pc.trials, seeds.simulation)?;
    let doc = json!({
        "version": version,
        "command": "polar",
        "channel": p,
        "constellation": ConstellationInfo {
            kind: kind.as_str(),
            m: pc.m,
            bits_per_quadrature: ch.bits_per_quadrature(),
            mean_photons: ch.constellation().mean_photons(),
        },
        "design": DesignInfo {
            backoff: pc.backoff,
            mc_budget: pc.mc_budget,
            total_info_bits: codes.iter().map(|c| c.info_len()).sum(),
        },
        "seeds": seeds,
        "simulation": report,
    });
    Ok(Output::Report(doc))
}
