//! Binary polar coding over the heterodyne-detected constellation channel.
//!
//! The transform is `x = u F^{(x) log2 n}` with `F = [[1, 0], [1, 1]]` in
//! natural (non bit-reversed) order, so `u_{n-1}` is the most reliable
//! synthetic channel and `u_0` the least.

mod channel;
mod construct;
mod simulate;

pub use channel::{
    bit_llr, gray_decode, gray_encode, heterodyne_sample, BitChannel, Bec, InducedChannel,
    LevelChannel,
};
pub use construct::{
    bec_bhattacharyya, bec_frozen_set, construct_code, construct_code_for, frozen_overlap, MIN_MC_BUDGET,
};
pub use simulate::{
    design_codes, estimate_level_information, heterodyne_mutual_information, simulate, LevelReport,
    SimulationReport,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};

/// Channel LLRs are clamped to this magnitude before decoding.
pub const LLR_CLAMP: f64 = 1000.0;

/// A polar code: blocklength, frozen positions and their fixed values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolarCode {
    n: usize,
    frozen: Vec<usize>,
    frozen_values: Vec<u8>,
    mask: Vec<Option<u8>>,
}

impl PolarCode {
    pub fn new(n: usize, mut frozen: Vec<usize>, frozen_values: Vec<u8>) -> Result<Self> {
        check_len(n)?;
        if frozen.len() != frozen_values.len() {
            return Err(invalid("one frozen value is required per frozen index"));
        }
        if frozen_values.iter().any(|&b| b > 1) {
            return Err(invalid("frozen values must be bits"));
        }
        let mut pairs: Vec<(usize, u8)> = frozen.drain(..).zip(frozen_values).collect();
        pairs.sort_unstable();
        let mut mask = vec![None; n];
        for &(i, v) in &pairs {
            if i >= n {
                return Err(invalid(format!("frozen index {i} out of range for n={n}")));
            }
            if mask[i].is_some() {
                return Err(invalid(format!("frozen index {i} repeated")));
            }
            mask[i] = Some(v);
        }
        Ok(Self {
            n,
            frozen: pairs.iter().map(|p| p.0).collect(),
            frozen_values: pairs.iter().map(|p| p.1).collect(),
            mask,
        })
    }

    /// Every position frozen to zero.
    pub fn all_frozen(n: usize) -> Result<Self> {
        Self::new(n, (0..n).collect(), vec![0; n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn frozen(&self) -> &[usize] {
        &self.frozen
    }

    pub fn frozen_values(&self) -> &[u8] {
        &self.frozen_values
    }

    pub fn info_len(&self) -> usize {
        self.n - self.frozen.len()
    }

    pub fn rate(&self) -> f64 {
        self.info_len() as f64 / self.n as f64
    }

    pub fn is_frozen(&self, i: usize) -> bool {
        self.mask[i].is_some()
    }

    pub fn info_positions(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.mask[i].is_none()).collect()
    }

    /// Place `info` on the unfrozen positions and return the full input `u`.
    pub fn expand(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.info_len() {
            return Err(invalid(format!(
                "expected {} information bits, got {}",
                self.info_len(),
                info.len()
            )));
        }
        let mut bits = info.iter();
        Ok(self
            .mask
            .iter()
            .map(|m| m.unwrap_or_else(|| *bits.next().expect("length checked")))
            .collect())
    }

    /// Information bits read back out of a full input vector.
    pub fn extract(&self, u: &[u8]) -> Vec<u8> {
        u.iter()
            .zip(&self.mask)
            .filter(|(_, m)| m.is_none())
            .map(|(&b, _)| b)
            .collect()
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        let mut x = self.expand(info)?;
        transform_in_place(&mut x);
        Ok(x)
    }
}

fn check_len(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(invalid(format!("blocklength {n} is not a power of two")));
    }
    Ok(())
}

/// Polar transform `x = u F^{(x) log2 n}` over GF(2).
pub fn polar_transform(u: &[u8], n: usize) -> Result<Vec<u8>> {
    check_len(n)?;
    if u.len() != n {
        return Err(invalid(format!("input has length {}, expected {n}", u.len())));
    }
    let mut x = u.to_vec();
    transform_in_place(&mut x);
    Ok(x)
}

pub(crate) fn transform_in_place(x: &mut [u8]) {
    let n = x.len();
    let mut half = 1;
    while half < n {
        for block in x.chunks_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= *b;
            }
        }
        half *= 2;
    }
}

/// Exact LLR check-node combination `2 atanh(tanh(a/2) tanh(b/2))`.
fn boxplus(a: f64, b: f64) -> f64 {
    let sign = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
    let min = a.abs().min(b.abs());
    sign * min + (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p()
}

/// Successive-cancellation engine shared by decoding and genie-aided
/// construction. `decide(i, llr)` fixes bit `u_i` given its LLR.
pub(crate) struct ScEngine {
    n: usize,
    llr: Vec<Vec<f64>>,
    beta: Vec<u8>,
}

impl ScEngine {
    pub(crate) fn new(n: usize) -> Self {
        let depth = n.trailing_zeros() as usize;
        Self {
            n,
            llr: (0..=depth).map(|d| vec![0.0; n >> d]).collect(),
            beta: vec![0; n],
        }
    }

    /// Runs the decoder; returns the re-encoded codeword estimate.
    pub(crate) fn run(&mut self, channel_llr: &[f64], decide: &mut impl FnMut(usize, f64) -> u8) -> &[u8] {
        assert_eq!(channel_llr.len(), self.n);
        for (dst, &l) in self.llr[0].iter_mut().zip(channel_llr) {
            *dst = if l.is_nan() { 0.0 } else { l.clamp(-LLR_CLAMP, LLR_CLAMP) };
        }
        self.node(0, 0, decide);
        &self.beta
    }

    fn node(&mut self, depth: usize, offset: usize, decide: &mut impl FnMut(usize, f64) -> u8) {
        let len = self.n >> depth;
        if len == 1 {
            self.beta[offset] = decide(offset, self.llr[depth][0]);
            return;
        }
        let half = len / 2;
        {
            let (upper, lower) = self.llr.split_at_mut(depth + 1);
            let parent = &upper[depth];
            for (i, child) in lower[0].iter_mut().enumerate() {
                *child = boxplus(parent[i], parent[i + half]);
            }
        }
        self.node(depth + 1, offset, decide);
        {
            let (upper, lower) = self.llr.split_at_mut(depth + 1);
            let parent = &upper[depth];
            for (i, child) in lower[0].iter_mut().enumerate() {
                let sign = if self.beta[offset + i] == 0 { 1.0 } else { -1.0 };
                *child = parent[i + half] + sign * parent[i];
            }
        }
        self.node(depth + 1, offset + half, decide);
        for i in 0..half {
            self.beta[offset + i] ^= self.beta[offset + half + i];
        }
    }
}

/// Successive-cancellation decoding. Returns the decided input vector `u`
/// (frozen positions included).
pub fn sc_decode(code: &PolarCode, llr: &[f64]) -> Result<Vec<u8>> {
    if llr.len() != code.n {
        return Err(invalid(format!("expected {} LLRs, got {}", code.n, llr.len())));
    }
    let mut engine = ScEngine::new(code.n);
    Ok(decode_with(&mut engine, code, llr))
}

pub(crate) fn decode_with(engine: &mut ScEngine, code: &PolarCode, llr: &[f64]) -> Vec<u8> {
    let mut u = vec![0u8; code.n];
    engine.run(llr, &mut |i, l| {
        let bit = code.mask[i].unwrap_or(if l >= 0.0 { 0 } else { 1 });
        u[i] = bit;
        bit
    });
    u
}

/// Per-trial random stream: ChaCha8 keyed by `seed`, stream `trial`.
pub(crate) fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}
