//! Frozen-set selection by genie-aided Monte Carlo.
//!
//! Each trial sends a uniformly random input through the transform and the
//! channel, then runs SC with the true bits fed back. The error probability
//! of synthetic channel `i` is estimated by the mean of `1 / (1 + e^|L_i|)`,
//! which is unbiased for exact posterior LLRs and has far lower variance
//! than counting hard decision errors.

use rand::Rng;
use rayon::prelude::*;

use super::channel::{BitChannel, InducedChannel, LevelChannel};
use super::{check_len, transform_in_place, trial_rng, PolarCode, ScEngine};
use crate::error::{invalid, Result};

/// Smallest accepted Monte Carlo budget.
pub const MIN_MC_BUDGET: usize = 100;

const TRIALS_PER_TASK: usize = 32;

/// Stream offset separating frozen-value draws from the trial streams.
const FROZEN_VALUE_STREAM: u64 = u64::MAX;

fn soft_error(llr: f64) -> f64 {
    1.0 / (1.0 + llr.abs().exp())
}

/// Estimated error probability of each synthetic channel.
pub(crate) fn estimate_synthetic_errors<C: BitChannel + ?Sized>(
    channel: &C,
    n: usize,
    mc_budget: usize,
    seed: u64,
) -> Vec<f64> {
    let tasks = mc_budget.div_ceil(TRIALS_PER_TASK);
    let partials: Vec<Vec<f64>> = (0..tasks)
        .into_par_iter()
        .map(|task| {
            let mut acc = vec![0.0; n];
            let mut engine = ScEngine::new(n);
            let start = task * TRIALS_PER_TASK;
            let end = (start + TRIALS_PER_TASK).min(mc_budget);
            for trial in start..end {
                let mut rng = trial_rng(seed, trial as u64);
                let u: Vec<u8> = (0..n).map(|_| rng.random_range(0..2u8)).collect();
                let mut x = u.clone();
                transform_in_place(&mut x);
                let llr = channel.llrs(&x, &mut rng);
                engine.run(&llr, &mut |i, l| {
                    acc[i] += soft_error(l);
                    u[i]
                });
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; n];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    total.iter().map(|t| t / mc_budget as f64).collect()
}

/// Freeze the least reliable indices so that `floor(target_rate * n)`
/// remain. Ties freeze the lower index first.
fn select_frozen(errors: &[f64], target_rate: f64) -> Vec<usize> {
    let n = errors.len();
    let info = ((target_rate * n as f64) + 1e-9).floor() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| errors[b].total_cmp(&errors[a]).then(a.cmp(&b)));
    order.truncate(n - info.min(n));
    order.sort_unstable();
    order
}

pub(crate) fn frozen_values(count: usize, seed: u64) -> Vec<u8> {
    let mut rng = trial_rng(seed, FROZEN_VALUE_STREAM);
    (0..count).map(|_| rng.random_range(0..2u8)).collect()
}

/// Construct a code for any binary channel.
pub fn construct_code_for<C: BitChannel + ?Sized>(
    channel: &C,
    n: usize,
    target_rate: f64,
    mc_budget: usize,
    seed: u64,
) -> Result<PolarCode> {
    check_len(n)?;
    if !(target_rate > 0.0 && target_rate < 1.0) {
        return Err(invalid(format!("target rate must lie in (0, 1), got {target_rate}")));
    }
    if mc_budget < MIN_MC_BUDGET {
        return Err(invalid(format!(
            "Monte Carlo budget {mc_budget} is below the minimum of {MIN_MC_BUDGET}"
        )));
    }
    let errors = estimate_synthetic_errors(channel, n, mc_budget, seed);
    let frozen = select_frozen(&errors, target_rate);
    let values = frozen_values(frozen.len(), seed);
    PolarCode::new(n, frozen, values)
}

/// Construct the code for one bit level of the induced channel.
pub fn construct_code(
    channel: &InducedChannel,
    level: usize,
    n: usize,
    target_rate: f64,
    mc_budget: usize,
    seed: u64,
) -> Result<PolarCode> {
    if level >= channel.levels() {
        return Err(invalid(format!("level {level} out of range ({} levels)", channel.levels())));
    }
    construct_code_for(&LevelChannel { channel, level }, n, target_rate, mc_budget, seed)
}

/// Exact Bhattacharyya parameters of the synthetic channels of a BEC.
pub fn bec_bhattacharyya(n: usize, erasure: f64) -> Result<Vec<f64>> {
    check_len(n)?;
    fn fill(out: &mut [f64], z: f64) {
        if out.len() == 1 {
            out[0] = z;
            return;
        }
        let (lo, hi) = out.split_at_mut(out.len() / 2);
        fill(lo, 2.0 * z - z * z);
        fill(hi, z * z);
    }
    let mut out = vec![0.0; n];
    fill(&mut out, erasure);
    Ok(out)
}

/// Fraction of `reference` also present in `frozen`.
pub fn frozen_overlap(frozen: &[usize], reference: &[usize]) -> f64 {
    if reference.is_empty() {
        return 1.0;
    }
    let set: std::collections::HashSet<_> = frozen.iter().collect();
    reference.iter().filter(|i| set.contains(i)).count() as f64 / reference.len() as f64
}

/// Frozen set selected from exact BEC Bhattacharyya parameters.
pub fn bec_frozen_set(n: usize, erasure: f64, target_rate: f64) -> Result<Vec<usize>> {
    Ok(select_frozen(&bec_bhattacharyya(n, erasure)?, target_rate))
}
