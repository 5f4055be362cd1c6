//! Multilevel encoding and successive decoding over the induced channel.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::channel::{heterodyne_sample, random_levels, InducedChannel};
use super::channel::LevelChannel;
use super::construct::{estimate_synthetic_errors, frozen_values, MIN_MC_BUDGET};
use super::{decode_with, trial_rng, PolarCode, ScEngine};
use crate::error::{invalid, Result};

const TRIALS_PER_TASK: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelReport {
    pub level: usize,
    /// 0 for the real quadrature, 1 for the imaginary one.
    pub quadrature: usize,
    /// Position in the Gray label, most significant first.
    pub label_bit: usize,
    pub info_bits: usize,
    pub rate: f64,
    pub bit_errors: u64,
    /// `None` when no information bits were sent on this level.
    pub ber: Option<f64>,
    /// Monte Carlo estimate of the level's conditional mutual information.
    pub capacity_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub blocklength: usize,
    pub trials: usize,
    pub seed: u64,
    pub levels: Vec<LevelReport>,
    pub frame_errors: u64,
    /// `None` when no trials were run.
    pub fer: Option<f64>,
    /// Information bits per mode, summed over levels.
    pub sum_rate: f64,
    /// `sum_rate * (1 - FER)`; `None` when no trials were run.
    pub throughput: Option<f64>,
    /// Estimate of `I(Z; Y)` under heterodyne detection, bits per mode.
    pub heterodyne_mi_estimate: f64,
}

/// Per-level conditional mutual informations `I(b_l; Y | b_<l)` in bits,
/// estimated from `samples` random symbols.
pub fn estimate_level_information(ch: &InducedChannel, samples: usize, seed: u64) -> Vec<f64> {
    let levels = ch.levels();
    if samples == 0 {
        return vec![0.0; levels];
    }
    let tasks = samples.div_ceil(1024);
    let partials: Vec<Vec<f64>> = (0..tasks)
        .into_par_iter()
        .map(|task| {
            let mut rng = trial_rng(seed, task as u64);
            let mut acc = vec![0.0; levels];
            let count = (samples - task * 1024).min(1024);
            for _ in 0..count {
                let bits = random_levels(ch, 0, rng.random_range(0..2u8), &mut rng);
                let y = heterodyne_sample(ch.params(), ch.symbol(&bits), &mut rng);
                for (level, a) in acc.iter_mut().enumerate() {
                    let l = ch.llr_inner(level, &bits[..level], y);
                    // 1 - log2(1 + e^{-L}) with L signed towards the true bit
                    let signed = if bits[level] == 0 { l } else { -l };
                    *a += 1.0 - softplus(-signed) / std::f64::consts::LN_2;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; levels];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    total.iter().map(|t| t / samples as f64).collect()
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Heterodyne mutual information `I(Z; Y)` in bits per mode: the sum of the
/// per-level terms by the chain rule.
pub fn heterodyne_mutual_information(ch: &InducedChannel, samples: usize, seed: u64) -> f64 {
    estimate_level_information(ch, samples, seed).iter().sum()
}

/// Builds one code per level for a total rate of `backoff` times the
/// estimated heterodyne information.
///
/// Information positions are allocated jointly: the synthetic channels of
/// every level are ranked together by their genie-aided error estimates and
/// the most reliable ones carry data. Equal per-level backoff would load the
/// weak levels close to their finite-length limit; joint ranking minimizes
/// the union bound on the frame error rate instead.
pub fn design_codes(
    ch: &InducedChannel,
    n: usize,
    backoff: f64,
    mc_budget: usize,
    seed: u64,
) -> Result<Vec<PolarCode>> {
    if !(backoff > 0.0 && backoff <= 1.0) {
        return Err(invalid(format!("backoff must lie in (0, 1], got {backoff}")));
    }
    if mc_budget < MIN_MC_BUDGET {
        return Err(invalid(format!(
            "Monte Carlo budget {mc_budget} is below the minimum of {MIN_MC_BUDGET}"
        )));
    }
    PolarCode::all_frozen(n)?;
    let levels = ch.levels();
    let mi: f64 = estimate_level_information(ch, mc_budget * 64, seed).iter().sum();
    let total_info = ((backoff * mi * n as f64) + 1e-9).floor() as usize;

    let errors: Vec<Vec<f64>> = (0..levels)
        .map(|level| {
            let lc = LevelChannel { channel: ch, level };
            estimate_synthetic_errors(&lc, n, mc_budget, level_seed(seed, level))
        })
        .collect();
    let mut ranked: Vec<(usize, usize)> = (0..levels).flat_map(|l| (0..n).map(move |i| (l, i))).collect();
    ranked.sort_by(|&(la, ia), &(lb, ib)| {
        errors[la][ia].total_cmp(&errors[lb][ib]).then((la, ia).cmp(&(lb, ib)))
    });
    let mut info = vec![vec![false; n]; levels];
    for &(l, i) in ranked.iter().take(total_info.min(levels * n)) {
        info[l][i] = true;
    }
    (0..levels)
        .map(|level| {
            let frozen: Vec<usize> = (0..n).filter(|&i| !info[level][i]).collect();
            let values = frozen_values(frozen.len(), level_seed(seed, level));
            PolarCode::new(n, frozen, values)
        })
        .collect()
}

fn level_seed(seed: u64, level: usize) -> u64 {
    seed.wrapping_add(level as u64 + 1)
}

#[derive(Default)]
struct Tally {
    bit_errors: Vec<u64>,
    frame_errors: u64,
}

/// Sends `trials` random frames, one code per level, and decodes the levels
/// in order, each using the re-encoded decisions of the levels below it.
pub fn simulate(ch: &InducedChannel, codes: &[PolarCode], trials: usize, seed: u64) -> Result<SimulationReport> {
    let levels = ch.levels();
    if codes.len() != levels {
        return Err(invalid(format!("expected {levels} codes, got {}", codes.len())));
    }
    let n = codes[0].n();
    if codes.iter().any(|c| c.n() != n) {
        return Err(invalid("all levels must share one blocklength"));
    }
    let tasks = trials.div_ceil(TRIALS_PER_TASK);
    let tallies: Vec<Tally> = (0..tasks)
        .into_par_iter()
        .map(|task| {
            let mut tally = Tally { bit_errors: vec![0; levels], frame_errors: 0 };
            let mut engine = ScEngine::new(n);
            let start = task * TRIALS_PER_TASK;
            for trial in start..(start + TRIALS_PER_TASK).min(trials) {
                run_trial(ch, codes, &mut engine, seed, trial as u64, &mut tally);
            }
            tally
        })
        .collect();

    let mut bit_errors = vec![0u64; levels];
    let mut frame_errors = 0;
    for t in &tallies {
        frame_errors += t.frame_errors;
        for (b, e) in bit_errors.iter_mut().zip(&t.bit_errors) {
            *b += e;
        }
    }

    let capacity = estimate_level_information(ch, 100_000, seed ^ 0x5eed_1e7e1);
    let sum_rate: f64 = codes.iter().map(|c| c.rate()).sum();
    let fer = (trials > 0).then(|| frame_errors as f64 / trials as f64);
    let level_reports = codes
        .iter()
        .enumerate()
        .map(|(level, code)| {
            let (quadrature, label_bit) = ch.level_position(level);
            let sent = (code.info_len() * trials) as f64;
            LevelReport {
                level,
                quadrature,
                label_bit,
                info_bits: code.info_len(),
                rate: code.rate(),
                bit_errors: bit_errors[level],
                ber: (sent > 0.0).then(|| bit_errors[level] as f64 / sent),
                capacity_estimate: capacity[level],
            }
        })
        .collect();
    Ok(SimulationReport {
        blocklength: n,
        trials,
        seed,
        levels: level_reports,
        frame_errors,
        fer,
        sum_rate,
        throughput: fer.map(|f| sum_rate * (1.0 - f)),
        heterodyne_mi_estimate: capacity.iter().sum(),
    })
}

fn run_trial(
    ch: &InducedChannel,
    codes: &[PolarCode],
    engine: &mut ScEngine,
    seed: u64,
    trial: u64,
    tally: &mut Tally,
) {
    let levels = codes.len();
    let n = codes[0].n();
    let mut rng = trial_rng(seed, trial);
    let infos: Vec<Vec<u8>> = codes
        .iter()
        .map(|c| (0..c.info_len()).map(|_| rng.random_range(0..2u8)).collect())
        .collect();
    let codewords: Vec<Vec<u8>> = codes
        .iter()
        .zip(&infos)
        .map(|(c, info)| c.encode(info).expect("info length matches"))
        .collect();
    let received: Vec<_> = (0..n)
        .map(|i| {
            let bits: Vec<u8> = codewords.iter().map(|cw| cw[i]).collect();
            heterodyne_sample(ch.params(), ch.symbol(&bits), &mut rng)
        })
        .collect();

    // decided codeword bits, position-major: decided[i][level]
    let mut decided = vec![Vec::with_capacity(levels); n];
    let mut frame_error = false;
    for (level, code) in codes.iter().enumerate() {
        let llr: Vec<f64> = (0..n).map(|i| ch.llr_inner(level, &decided[i], received[i])).collect();
        let u = decode_with(engine, code, &llr);
        let estimate = code.extract(&u);
        let errors = estimate.iter().zip(&infos[level]).filter(|(a, b)| a != b).count();
        tally.bit_errors[level] += errors as u64;
        frame_error |= errors > 0;
        let mut x = u;
        super::transform_in_place(&mut x);
        for (d, b) in decided.iter_mut().zip(x) {
            d.push(b);
        }
    }
    if frame_error {
        tally.frame_errors += 1;
    }
}
