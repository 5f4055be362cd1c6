//! Binary channels seen by the polar codes.
//!
//! A product constellation with `m = 2^L` points per quadrature carries
//! `2L` bits per symbol: levels `0..L` label the real quadrature and levels
//! `L..2L` the imaginary one, each with a binary-reflected Gray code read
//! most significant bit first. With circular Gaussian heterodyne noise the
//! quadratures are independent, so the LLR of a bit depends only on its own
//! quadrature and the previously decided bits of that quadrature.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::channel::ChannelParams;
use crate::constellations::ComplexConstellation;
use crate::error::{invalid, Error, Result};

/// A binary-input channel that can be simulated block-wise.
pub trait BitChannel: Sync {
    /// LLRs `ln P(y|0) / P(y|1)` for one block carrying `bits`.
    fn llrs(&self, bits: &[u8], rng: &mut ChaCha8Rng) -> Vec<f64>;
}

/// Binary erasure channel; erasures are reported as LLR 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bec {
    pub erasure: f64,
}

impl Bec {
    pub fn new(erasure: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&erasure) {
            return Err(invalid(format!("erasure probability {erasure} outside [0, 1]")));
        }
        Ok(Self { erasure })
    }
}

impl BitChannel for Bec {
    fn llrs(&self, bits: &[u8], rng: &mut ChaCha8Rng) -> Vec<f64> {
        bits.iter()
            .map(|&b| {
                if rng.random::<f64>() < self.erasure {
                    0.0
                } else if b == 0 {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect()
    }
}

pub fn gray_encode(i: usize) -> usize {
    i ^ (i >> 1)
}

pub fn gray_decode(mut g: usize) -> usize {
    let mut i = 0;
    while g != 0 {
        i ^= g;
        g >>= 1;
    }
    i
}

/// Heterodyne outcome `k z + noise`, with variance `(N_c + 1)/2` per
/// quadrature.
pub fn heterodyne_sample(p: &ChannelParams, z: Complex64, rng: &mut ChaCha8Rng) -> Complex64 {
    let sigma = ((p.n_c + 1.0) / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    z * p.k + Complex64::new(sigma * re, sigma * im)
}

/// The bit-level view of a uniform product constellation under
/// heterodyne detection.
#[derive(Debug, Clone)]
pub struct InducedChannel {
    params: ChannelParams,
    constellation: ComplexConstellation,
    bits_per_quadrature: usize,
    /// Received-domain amplitudes `k sqrt(N/2) x_j` of the real points.
    received: Vec<f64>,
}

impl InducedChannel {
    pub fn new(params: ChannelParams, constellation: ComplexConstellation) -> Result<Self> {
        let quad = constellation.quadrature();
        let m = quad.m();
        if m < 2 || !m.is_power_of_two() {
            return Err(Error::Unsupported(format!(
                "bit labelling needs a power-of-two constellation size, got m={m}"
            )));
        }
        let uniform = quad.probs().iter().all(|&q| (q * m as f64 - 1.0).abs() < 1e-12);
        if !uniform {
            return Err(Error::Unsupported(format!(
                "{} constellations are non-uniform; polar coding here assumes uniform \
                 input bits and no probabilistic shaping",
                quad.kind()
            )));
        }
        let scale = params.k * (constellation.mean_photons() / 2.0).sqrt();
        let received = quad.points().iter().map(|&x| scale * x).collect();
        Ok(Self {
            params,
            constellation,
            bits_per_quadrature: m.trailing_zeros() as usize,
            received,
        })
    }

    pub fn params(&self) -> &ChannelParams {
        &self.params
    }

    pub fn constellation(&self) -> &ComplexConstellation {
        &self.constellation
    }

    pub fn bits_per_quadrature(&self) -> usize {
        self.bits_per_quadrature
    }

    /// Total bit levels per symbol, `2 log2 m`.
    pub fn levels(&self) -> usize {
        2 * self.bits_per_quadrature
    }

    /// Quadrature (0 real, 1 imaginary) and bit position within its label.
    pub fn level_position(&self, level: usize) -> (usize, usize) {
        (level / self.bits_per_quadrature, level % self.bits_per_quadrature)
    }

    /// Point index along one quadrature carrying the given label bits.
    fn quadrature_index(&self, bits: &[u8]) -> usize {
        let label = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        gray_decode(label)
    }

    /// Label bit `pos` (MSB first) of real point index `j`.
    fn label_bit(&self, j: usize, pos: usize) -> u8 {
        ((gray_encode(j) >> (self.bits_per_quadrature - 1 - pos)) & 1) as u8
    }

    /// The constellation symbol carrying `bits` (one per level).
    pub fn symbol(&self, bits: &[u8]) -> Complex64 {
        assert_eq!(bits.len(), self.levels());
        let l = self.bits_per_quadrature;
        let re = self.quadrature_index(&bits[..l]);
        let im = self.quadrature_index(&bits[l..]);
        self.constellation.points()[re * self.constellation.quadrature().m() + im]
    }

    /// Bits labelling the flat constellation index `idx`.
    pub fn bits_of(&self, idx: usize) -> Vec<u8> {
        let (re, im) = self.constellation.split_index(idx);
        let l = self.bits_per_quadrature;
        (0..l)
            .map(|pos| self.label_bit(re, pos))
            .chain((0..l).map(|pos| self.label_bit(im, pos)))
            .collect()
    }

    /// Posterior LLR of bit `level` given `y` and the true (or decided)
    /// values of levels `0..level`.
    pub(crate) fn llr_inner(&self, level: usize, prior: &[u8], y: Complex64) -> f64 {
        let (quad, pos) = self.level_position(level);
        let coord = if quad == 0 { y.re } else { y.im };
        let prior_same = &prior[quad * self.bits_per_quadrature..];
        let noise = self.params.n_c + 1.0;
        let mut best = [f64::NEG_INFINITY; 2];
        let mut exps: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
        for (j, &a) in self.received.iter().enumerate() {
            if (0..pos).any(|q| self.label_bit(j, q) != prior_same[q]) {
                continue;
            }
            let b = self.label_bit(j, pos) as usize;
            let e = -(coord - a) * (coord - a) / noise;
            best[b] = best[b].max(e);
            exps[b].push(e);
        }
        let lse = |b: usize| {
            best[b] + exps[b].iter().map(|&e| (e - best[b]).exp()).sum::<f64>().ln()
        };
        lse(0) - lse(1)
    }
}

/// LLR `ln P(b=0 | y, prior) / P(b=1 | y, prior)` of bit `level`, with
/// `prior_bits` holding the values of levels `0..level`.
pub fn bit_llr(ch: &InducedChannel, level: usize, prior_bits: &[u8], y: Complex64) -> Result<f64> {
    if level >= ch.levels() {
        return Err(invalid(format!("level {level} out of range ({} levels)", ch.levels())));
    }
    if prior_bits.len() != level {
        return Err(invalid(format!(
            "level {level} needs {level} prior bits, got {}",
            prior_bits.len()
        )));
    }
    Ok(ch.llr_inner(level, prior_bits, y))
}

/// Draws uniform bits for every level, overriding `level` with `bit`.
pub(crate) fn random_levels(ch: &InducedChannel, level: usize, bit: u8, rng: &mut ChaCha8Rng) -> Vec<u8> {
    (0..ch.levels())
        .map(|l| if l == level { bit } else { rng.random_range(0..2u8) })
        .collect()
}

/// The binary channel of one level, with lower levels known and higher
/// levels uniformly random.
#[derive(Debug, Clone, Copy)]
pub struct LevelChannel<'a> {
    pub channel: &'a InducedChannel,
    pub level: usize,
}

impl BitChannel for LevelChannel<'_> {
    fn llrs(&self, bits: &[u8], rng: &mut ChaCha8Rng) -> Vec<f64> {
        bits.iter()
            .map(|&b| {
                let all = random_levels(self.channel, self.level, b, rng);
                let y = heterodyne_sample(self.channel.params(), self.channel.symbol(&all), rng);
                self.channel.llr_inner(self.level, &all[..self.level], y)
            })
            .collect()
    }
}
