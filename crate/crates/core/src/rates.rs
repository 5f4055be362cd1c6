//! Achievable rates of coherent-state constellations through the thermal
//! channel, evaluated on a truncated Fock space.
//!
//! All conditional output states of one side are displaced thermal states
//! of the same width, so conditional entropies are taken analytically as
//! `g(width)` and only the averaged output state is diagonalized.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::{g_entropy, output_state_b, output_state_e, ChannelParams, DisplacedThermalSpec};
use crate::constellations::ComplexConstellation;
use crate::error::{invalid, Result};
use crate::fock::{
    coherent_state, displaced_thermal, relative_entropy, thermal_state, truncation_dim,
    von_neumann_entropy, CMatrix, DensityOperator,
};

/// Trace deficits above this are flagged on results.
pub const TRUNCATION_WARN: f64 = 1e-9;

/// Constellation points folded into each partial sum of a mixture. Fixing
/// the chunking fixes the floating-point summation order.
const MIXTURE_CHUNK: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// The receiver's output mode.
    B,
    /// The environment's output mode.
    E,
}

/// Output states of one side of the channel, one per constellation point.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub specs: Vec<(f64, DisplacedThermalSpec)>,
    pub side: Side,
    pub params: ChannelParams,
}

impl Ensemble {
    /// Common thermal width of every member.
    pub fn width(&self) -> f64 {
        match self.side {
            Side::B => self.params.n_c,
            Side::E => self.params.env_width(),
        }
    }

    /// Largest `|center|^2 + width`, the photon number the cutoff must cover.
    pub fn max_photons(&self) -> f64 {
        let width = self.width();
        self.specs
            .iter()
            .map(|(_, s)| s.center.norm_sqr() + width)
            .fold(width, f64::max)
    }

    pub fn default_dim(&self) -> usize {
        truncation_dim(self.max_photons())
    }
}

pub fn build_ensemble(p: &ChannelParams, q: &ComplexConstellation, side: Side) -> Ensemble {
    let map = match side {
        Side::B => output_state_b,
        Side::E => output_state_e,
    };
    let specs = q
        .points()
        .iter()
        .zip(q.probs())
        .map(|(&z, &prob)| (prob, map(p, z)))
        .collect();
    Ensemble {
        specs,
        side,
        params: *p,
    }
}

/// `sum_j q_j theta_j` on the first `dim` levels.
pub fn ensemble_average_state(e: &Ensemble, dim: usize) -> Result<DensityOperator> {
    if dim == 0 {
        return Err(invalid("Fock dimension must be at least 1"));
    }
    let width = e.width();
    let partials: Vec<Result<CMatrix>> = e
        .specs
        .par_chunks(MIXTURE_CHUNK)
        .map(|chunk| {
            let mut acc = CMatrix::zeros(dim, dim);
            for &(prob, spec) in chunk {
                if prob == 0.0 {
                    continue;
                }
                if width == 0.0 {
                    let v = coherent_state(spec.center, dim)?;
                    acc.gerc(Complex64::new(prob, 0.0), v.amplitudes(), v.amplitudes(), Complex64::new(1.0, 0.0));
                } else {
                    let theta = displaced_thermal(spec.center, width, dim)?;
                    acc += theta.matrix() * Complex64::new(prob, 0.0);
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = CMatrix::zeros(dim, dim);
    for part in partials {
        total += part?;
    }
    let total = (&total + total.adjoint()).scale(0.5);
    let mut rho = DensityOperator::from_parts(total, 0.0);
    let deficit = rho.trace_deficit();
    rho = DensityOperator::from_parts(rho.matrix().clone(), deficit);
    Ok(rho)
}

/// Everything the rate tables need for one constellation, from one pair of
/// diagonalizations.
#[derive(Debug, Clone, PartialEq)]
pub struct RateAnalysis {
    /// `I(Z_m : B_m)` in bits.
    pub holevo_rate: f64,
    /// `I(Z_m : B_m) - I(Z_m : E_m)` in bits.
    pub quantum_rate: f64,
    /// `g(N') - H(rho_m^B)` in bits.
    pub delta_b_entropy: f64,
    /// `D(rho_m^B || tau_{N'})` in bits.
    pub delta_b_relative: f64,
    /// `g((1-k^2)N + k^2 N0) - H(rho_m^E)` in bits.
    pub delta_e: f64,
    pub dim_b: usize,
    pub dim_e: usize,
    pub trace_deficit_b: f64,
    pub trace_deficit_e: f64,
}

impl RateAnalysis {
    pub fn trace_deficit(&self) -> f64 {
        self.trace_deficit_b.max(self.trace_deficit_e)
    }

    pub fn truncation_warning(&self) -> bool {
        self.trace_deficit() > TRUNCATION_WARN
    }
}

struct SideOutput {
    rho: DensityOperator,
    entropy: f64,
    dim: usize,
}

fn side_output(
    p: &ChannelParams,
    q: &ComplexConstellation,
    side: Side,
    dim: Option<usize>,
) -> Result<SideOutput> {
    let ens = build_ensemble(p, q, side);
    let dim = dim.unwrap_or_else(|| ens.default_dim());
    let rho = ensemble_average_state(&ens, dim)?;
    let entropy = von_neumann_entropy(&rho)?;
    Ok(SideOutput { rho, entropy, dim })
}

/// Full analysis; `dim` overrides the cutoff rule for both sides.
pub fn analyze(p: &ChannelParams, q: &ComplexConstellation, dim: Option<usize>) -> Result<RateAnalysis> {
    let b = side_output(p, q, Side::B, dim)?;
    let e = side_output(p, q, Side::E, dim)?;
    let reference = thermal_state(p.n_prime, b.dim)?;
    let delta_b_relative = relative_entropy(&b.rho, &reference)?;
    let holevo_rate = b.entropy - g_entropy(p.n_c);
    let env_holevo = e.entropy - g_entropy(p.env_width());
    Ok(RateAnalysis {
        holevo_rate,
        quantum_rate: holevo_rate - env_holevo,
        delta_b_entropy: g_entropy(p.n_prime) - b.entropy,
        delta_b_relative,
        delta_e: g_entropy(p.env_mean_photons()) - e.entropy,
        dim_b: b.dim,
        dim_e: e.dim,
        trace_deficit_b: b.rho.trace_deficit(),
        trace_deficit_e: e.rho.trace_deficit(),
    })
}

/// `H(rho_m^B) - g(N_c)`.
pub fn holevo_rate(p: &ChannelParams, q: &ComplexConstellation, dim: Option<usize>) -> Result<f64> {
    let b = side_output(p, q, Side::B, dim)?;
    Ok(b.entropy - g_entropy(p.n_c))
}

/// `[H(rho_m^B) - g(N_c)] - [H(rho_m^E) - g(k^2 N0)]`.
pub fn quantum_rate(p: &ChannelParams, q: &ComplexConstellation, dim: Option<usize>) -> Result<f64> {
    let b = side_output(p, q, Side::B, dim)?;
    let e = side_output(p, q, Side::E, dim)?;
    Ok((b.entropy - g_entropy(p.n_c)) - (e.entropy - g_entropy(p.env_width())))
}

/// Receiver gap as `(g(N') - H(rho_m^B), D(rho_m^B || tau_{N'}))`, both in
/// bits. The two coincide when the constellation matches the first two
/// moments of `tau_N`.
pub fn delta_b(p: &ChannelParams, q: &ComplexConstellation, dim: Option<usize>) -> Result<(f64, f64)> {
    let b = side_output(p, q, Side::B, dim)?;
    let reference = thermal_state(p.n_prime, b.dim)?;
    Ok((
        g_entropy(p.n_prime) - b.entropy,
        relative_entropy(&b.rho, &reference)?,
    ))
}

/// Environment gap `g((1-k^2)N + k^2 N0) - H(rho_m^E)` in bits.
pub fn delta_e(p: &ChannelParams, q: &ComplexConstellation, dim: Option<usize>) -> Result<f64> {
    let e = side_output(p, q, Side::E, dim)?;
    Ok(g_entropy(p.env_mean_photons()) - e.entropy)
}

/// `sum_j sqrt(Q_j) |b_j> |z_j>`: rows index the reference register, columns
/// the Fock levels of the mode.
#[derive(Debug, Clone)]
pub struct BipartiteStateVector {
    amplitudes: CMatrix,
}

impl BipartiteStateVector {
    pub fn amplitudes(&self) -> &CMatrix {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn truncation_deficit(&self) -> f64 {
        (1.0 - self.norm_sqr()).max(0.0)
    }

    /// Reduced state of the reference register: the Gram matrix
    /// `sqrt(Q_j Q_l) <z_l|z_j>`, with diagonal `Q_j`.
    pub fn reduced_index(&self) -> CMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    /// Reduced state of the mode: `sum_j Q_j |z_j><z_j|`.
    pub fn reduced_mode(&self) -> DensityOperator {
        let m = self.amplitudes.transpose() * self.amplitudes.map(|a| a.conj());
        let m = (&m + m.adjoint()).scale(0.5);
        let rho = DensityOperator::from_parts(m, 0.0);
        let deficit = rho.trace_deficit();
        DensityOperator::from_parts(rho.matrix().clone(), deficit)
    }
}

pub fn build_xi(q: &ComplexConstellation, dim: usize) -> Result<BipartiteStateVector> {
    if dim == 0 {
        return Err(invalid("Fock dimension must be at least 1"));
    }
    let mut amplitudes = CMatrix::zeros(q.len(), dim);
    for (j, (&z, &prob)) in q.points().iter().zip(q.probs()).enumerate() {
        let v = coherent_state(z, dim)?;
        let scale = prob.sqrt();
        for n in 0..dim {
            amplitudes[(j, n)] = v.amplitudes()[n] * scale;
        }
    }
    Ok(BipartiteStateVector { amplitudes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{capacity_c, gaussian_rate_limit};
    use crate::constellations::{
        make_equilattice, make_gauss_hermite, make_random_walk, product_constellation, RealConstellation,
    };
    use approx::assert_relative_eq;

    fn vacuum_point(n: f64) -> ComplexConstellation {
        product_constellation(&RealConstellation::new(vec![0.0], vec![1.0]).unwrap(), n).unwrap()
    }

    #[test]
    fn ensemble_construction() {
        let p = ChannelParams::new(0.8, 0.5, 3.0).unwrap();
        let single = build_ensemble(&p, &vacuum_point(3.0), Side::B);
        assert_eq!(single.specs.len(), 1);
        assert_eq!(single.specs[0].0, 1.0);
        assert_eq!(single.specs[0].1.center, Complex64::new(0.0, 0.0));
        assert_relative_eq!(single.specs[0].1.width, p.n_c);

        let loss = ChannelParams::new(0.8, 0.0, 3.0).unwrap();
        let q = product_constellation(&make_equilattice(3).unwrap(), 3.0).unwrap();
        let env = build_ensemble(&loss, &q, Side::E);
        for ((prob, spec), (&z, &qz)) in env.specs.iter().zip(q.points().iter().zip(q.probs())) {
            assert_eq!(*prob, qz);
            assert!((spec.center + z * 0.6).norm() < 1e-15);
            assert_eq!(spec.width, 0.0);
        }
    }

    #[test]
    fn average_state_moments() {
        for n0 in [0.0, 0.5] {
            let p = ChannelParams::new(0.8, n0, 2.0).unwrap();
            let q = product_constellation(&make_random_walk(4).unwrap(), 2.0).unwrap();
            let ens = build_ensemble(&p, &q, Side::B);
            let rho = ensemble_average_state(&ens, ens.default_dim()).unwrap();
            assert!(rho.mean_amplitude().norm() < 1e-10);
            assert_relative_eq!(rho.mean_photons(), p.n_prime, epsilon = 1e-8);
        }
        let p = ChannelParams::new(0.7, 1.0, 2.0).unwrap();
        let ens = build_ensemble(&p, &vacuum_point(2.0), Side::B);
        let rho = ensemble_average_state(&ens, 60).unwrap();
        let reference = thermal_state(p.n_c, 60).unwrap();
        assert!((rho.matrix() - reference.matrix()).map(|c| c.norm()).max() < 1e-13);
    }

    #[test]
    fn single_point_rates_vanish() {
        for n0 in [0.0, 0.7] {
            let p = ChannelParams::new(0.8, n0, 7.0).unwrap();
            let q = vacuum_point(7.0);
            let a = analyze(&p, &q, None).unwrap();
            assert!(a.holevo_rate.abs() < 1e-8);
            assert!(a.quantum_rate.abs() < 1e-8);
            assert_relative_eq!(a.delta_b_entropy, capacity_c(&p), epsilon = 1e-8);
            assert_relative_eq!(
                a.delta_e,
                g_entropy(p.env_mean_photons()) - g_entropy(p.env_width()),
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn gap_forms_agree_and_rates_are_sandwiched() {
        for n0 in [0.0, 0.5] {
            let p = ChannelParams::new(0.8, n0, 3.0).unwrap();
            for c in [make_equilattice(3).unwrap(), make_gauss_hermite(4).unwrap()] {
                let q = product_constellation(&c, p.n).unwrap();
                let a = analyze(&p, &q, None).unwrap();
                assert!((a.delta_b_entropy - a.delta_b_relative).abs() < 1e-5);
                assert!(a.delta_e >= -1e-6);
                assert!(a.holevo_rate >= 0.0 && a.holevo_rate <= capacity_c(&p) + 1e-6);
                assert!(a.quantum_rate <= gaussian_rate_limit(&p) + 1e-6);
                let lhs = gaussian_rate_limit(&p) - a.quantum_rate;
                assert!((lhs - (a.delta_b_entropy - a.delta_e)).abs() < 1e-5);
                assert!(!a.truncation_warning());
            }
        }
    }

    #[test]
    fn standalone_operations_match_analysis() {
        let p = ChannelParams::new(0.8, 0.3, 2.0).unwrap();
        let q = product_constellation(&make_random_walk(3).unwrap(), p.n).unwrap();
        let a = analyze(&p, &q, None).unwrap();
        assert_relative_eq!(holevo_rate(&p, &q, None).unwrap(), a.holevo_rate, epsilon = 1e-12);
        assert_relative_eq!(quantum_rate(&p, &q, None).unwrap(), a.quantum_rate, epsilon = 1e-12);
        let (h, d) = delta_b(&p, &q, None).unwrap();
        assert_relative_eq!(h, a.delta_b_entropy, epsilon = 1e-12);
        assert_relative_eq!(d, a.delta_b_relative, epsilon = 1e-12);
        assert_relative_eq!(delta_e(&p, &q, None).unwrap(), a.delta_e, epsilon = 1e-12);
    }

    #[test]
    fn pure_loss_quantum_rate_is_entropy_difference() {
        let p = ChannelParams::new(0.8, 0.0, 2.0).unwrap();
        let q = product_constellation(&make_equilattice(4).unwrap(), p.n).unwrap();
        let hb = von_neumann_entropy(
            &ensemble_average_state(&build_ensemble(&p, &q, Side::B), 80).unwrap(),
        )
        .unwrap();
        let he = von_neumann_entropy(
            &ensemble_average_state(&build_ensemble(&p, &q, Side::E), 80).unwrap(),
        )
        .unwrap();
        assert_relative_eq!(quantum_rate(&p, &q, Some(80)).unwrap(), hb - he, epsilon = 1e-12);
    }

    #[test]
    fn mixture_is_bit_reproducible() {
        let p = ChannelParams::new(0.8, 0.2, 3.0).unwrap();
        let q = product_constellation(&make_random_walk(6).unwrap(), 3.0).unwrap();
        let ens = build_ensemble(&p, &q, Side::B);
        let a = ensemble_average_state(&ens, 50).unwrap();
        let b = ensemble_average_state(&ens, 50).unwrap();
        assert_eq!(a.matrix(), b.matrix());
    }

    #[test]
    fn xi_state_marginals() {
        let single = build_xi(&vacuum_point(1.0), 10).unwrap();
        let idx = single.reduced_index();
        assert_eq!(idx.nrows(), 1);
        assert_relative_eq!(idx[(0, 0)].re, 1.0, epsilon = 1e-15);

        let q = product_constellation(&make_random_walk(4).unwrap(), 2.5).unwrap();
        let dim = truncation_dim(q.max_norm_sqr());
        let xi = build_xi(&q, dim).unwrap();
        assert!(xi.truncation_deficit() < 1e-12);
        let idx = xi.reduced_index();
        for (j, &prob) in q.probs().iter().enumerate() {
            assert_relative_eq!(idx[(j, j)].re, prob, epsilon = 1e-12);
        }
        let mode = xi.reduced_mode();
        assert_relative_eq!(mode.mean_photons(), 2.5, epsilon = 1e-6);
        assert!(mode.mean_amplitude().norm() < 1e-10);
    }
}
