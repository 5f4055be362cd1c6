//! Chi-square kernels between Gaussian references and discretized inputs.
//!
//! * `K_s(x, x')` gives the classical divergence of an AWGN output against
//!   the Gaussian-input output as a double sum over input points.
//! * `C_N(z, z')` gives the quantum divergence of a state with positive
//!   P function against the thermal state `tau_N`.
//! * `R_{N'}(z, z')` is `C_{N'}` smeared by the channel's thermal noise. At
//!   the scaled points `sqrt(N/2)(x + iy)` it factorizes as
//!   `K_s(x, x') K_s(y, y')`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::ChannelParams;
use crate::constellations::{classical_chi2_kernel, ComplexConstellation, RealConstellation};

pub fn kernel_k(s: f64, x: f64, xp: f64) -> f64 {
    let one_2s = 1.0 + 2.0 * s;
    let log_prefactor = (1.0 + s).ln() - 0.5 * one_2s.ln();
    let d = x - xp;
    let exponent = -s / (2.0 * one_2s) * (s * d * d - 2.0 * x * xp);
    (log_prefactor + exponent).exp()
}

/// `2 Re(z conj(z'))`, the real combination `z z'^* + z^* z'`.
fn cross(z: Complex64, zp: Complex64) -> f64 {
    2.0 * (z.re * zp.re + z.im * zp.im)
}

pub fn kernel_c(n: f64, z: Complex64, zp: Complex64) -> f64 {
    let t = ((n + 1.0) / n).sqrt();
    let exponent = -z.norm_sqr() - zp.norm_sqr() + t * cross(z, zp);
    ((n + 1.0).ln() + exponent).exp()
}

pub fn kernel_r(p: &ChannelParams, z: Complex64, zp: Complex64) -> f64 {
    let denom = p.dgap * p.dgap - p.cgap * p.cgap;
    let log_prefactor = 2.0 * p.dgap.ln() - denom.ln();
    let k2 = p.k * p.k;
    let exponent =
        -k2 * (p.cgap * (z.norm_sqr() + zp.norm_sqr()) - p.dgap * cross(z, zp)) / denom;
    (log_prefactor + exponent).exp()
}

/// `chi^2(rho_m^B, tau_{N'})` for the channel output of a coherent-state
/// constellation, via `1 + chi^2 = sum_ij q_i q_j R_{N'}(z_i, z_j)`.
pub fn quantum_chi2_constellation(p: &ChannelParams, q: &ComplexConstellation) -> f64 {
    let points = q.points();
    let probs = q.probs();
    // rows in parallel, summed in index order for reproducibility
    let rows: Vec<f64> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let zi = points[i];
            probs[i]
                * points
                    .iter()
                    .zip(probs)
                    .map(|(&zj, &qj)| qj * kernel_r(p, zi, zj))
                    .sum::<f64>()
        })
        .collect();
    rows.iter().sum::<f64>() - 1.0
}

/// Upper bound `(1 + chi^2(P_{Y_m}, P_Y))^2 - 1` on the receiver gap
/// `Delta_B`, measured in nats.
pub fn delta_b_bound(p: &ChannelParams, c: &RealConstellation) -> f64 {
    let chi2 = classical_chi2_kernel(c, p.s);
    chi2 * (2.0 + chi2)
}
