//! Single-mode thermal channel: a beamsplitter of amplitude transmittivity
//! `k` mixing the signal with a thermal mode of mean photon number `N0`.
//!
//! For `N0 > 0` the environment output is modelled by the single-mode
//! expressions alone; the joint receiver/environment state conditioned on
//! the input is then not pure, so `quantum_rate` is the difference of two
//! Holevo quantities rather than a coherent information in the strict sense.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Channel parameters and every scalar derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelParams {
    /// Amplitude transmittivity, `0 < k < 1`.
    pub k: f64,
    /// Mean photon number of the environment mode.
    pub n0: f64,
    /// Mean photon number of the (thermal) input.
    pub n: f64,
    /// Added noise `(1 - k^2) N0`.
    pub n_c: f64,
    /// Output mean photon number `k^2 N + N_c`.
    pub n_prime: f64,
    /// Effective signal-to-noise ratio of the equivalent real AWGN.
    pub s: f64,
    /// Exponential decay constant `2 ln((1+s)/s)`.
    pub c_decay: f64,
    /// `N' - N_c`, which equals `k^2 N`.
    pub cgap: f64,
    /// `sqrt(N'(N'+1))`.
    pub dgap: f64,
    /// `t_{N'} = sqrt((N'+1)/N')`.
    pub t: f64,
}

impl ChannelParams {
    pub fn new(k: f64, n0: f64, n: f64) -> Result<Self> {
        if !(k > 0.0 && k <= 1.0) {
            return Err(invalid(format!("transmittivity must lie in (0, 1], got {k}")));
        }
        if !(n0 >= 0.0) || !n0.is_finite() {
            return Err(invalid(format!("environment photon number must be >= 0, got {n0}")));
        }
        if !(n > 0.0) || !n.is_finite() {
            return Err(invalid(format!("input photon number must be > 0, got {n}")));
        }
        if k == 1.0 {
            return Err(Error::Unsupported(
                "k = 1 is the identity (or purely additive-noise) channel, which needs a \
                 separate formulation"
                    .into(),
            ));
        }
        let k2 = k * k;
        let n_c = (1.0 - k2) * n0;
        let n_prime = k2 * n + n_c;
        let dgap = (n_prime * (n_prime + 1.0)).sqrt();
        let cgap = k2 * n;
        let s = cgap / (dgap - cgap);
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::NumericFailure(format!("effective SNR is not finite (s = {s})")));
        }
        Ok(Self {
            k,
            n0,
            n,
            n_c,
            n_prime,
            s,
            c_decay: 2.0 * ((1.0 + s) / s).ln(),
            cgap,
            dgap,
            t: ((n_prime + 1.0) / n_prime).sqrt(),
        })
    }

    /// Same channel, different input photon number.
    pub fn with_input(&self, n: f64) -> Result<Self> {
        Self::new(self.k, self.n0, n)
    }

    /// Thermal width `k^2 N0` of the environment output states.
    pub fn env_width(&self) -> f64 {
        self.k * self.k * self.n0
    }

    /// Mean photon number `(1-k^2) N + k^2 N0` of the environment output
    /// for a thermal input.
    pub fn env_mean_photons(&self) -> f64 {
        (1.0 - self.k * self.k) * self.n + self.env_width()
    }

    pub fn is_pure_loss(&self) -> bool {
        self.n0 == 0.0
    }
}

/// A displaced thermal state: Gaussian P function centred at `center` with
/// thermal mean photon number `width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacedThermalSpec {
    pub center: Complex64,
    pub width: f64,
}

/// Receiver output for the coherent input `|z>`.
pub fn output_state_b(p: &ChannelParams, z: Complex64) -> DisplacedThermalSpec {
    DisplacedThermalSpec {
        center: z * p.k,
        width: p.n_c,
    }
}

/// Environment output for the coherent input `|z>`.
pub fn output_state_e(p: &ChannelParams, z: Complex64) -> DisplacedThermalSpec {
    DisplacedThermalSpec {
        center: -z * (1.0 - p.k * p.k).sqrt(),
        width: p.env_width(),
    }
}

/// Entropy in bits of a thermal state with mean photon number `x`.
pub fn g_entropy(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    (x + 1.0) * (x + 1.0).log2() - x * x.log2()
}

/// Classical capacity `g(N') - g(N_c)` in bits per mode.
pub fn capacity_c(p: &ChannelParams) -> f64 {
    g_entropy(p.n_prime) - g_entropy(p.n_c)
}

/// `I(Z:B) - I(Z:E)` for the thermal input, in bits per mode.
pub fn gaussian_rate_limit(p: &ChannelParams) -> f64 {
    capacity_c(p) - (g_entropy(p.env_mean_photons()) - g_entropy(p.env_width()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reference_setting_scalars() {
        let p = ChannelParams::new(0.8, 0.0, 7.0).unwrap();
        assert_eq!(p.n_c, 0.0);
        assert_relative_eq!(p.n_prime, 4.48, epsilon = 1e-14);
        let expected_s = 4.48 / ((4.48_f64 * 5.48).sqrt() - 4.48);
        assert_relative_eq!(p.s, expected_s, epsilon = 1e-12);
        assert_relative_eq!(p.s, 9.4348, epsilon = 1e-4);

        let q = ChannelParams::new(0.8, 1.0, 7.0).unwrap();
        assert_relative_eq!(q.n_c, 0.36, epsilon = 1e-14);
        assert_relative_eq!(q.n_prime, 4.84, epsilon = 1e-14);
    }

    #[test]
    fn s_relation_and_gap_ordering() {
        for k in [0.1, 0.5, 0.8, 0.99] {
            for n0 in [0.0, 0.5, 3.0] {
                for n in [0.01, 1.0, 7.0, 50.0] {
                    let p = ChannelParams::new(k, n0, n).unwrap();
                    assert!(p.dgap > p.cgap && p.cgap >= 0.0);
                    assert!(p.n_prime >= k * k * n);
                    assert_relative_eq!(p.cgap / p.dgap, p.s / (1.0 + p.s), epsilon = 1e-12);
                    assert!(p.dgap * p.dgap - p.cgap * p.cgap > 0.0);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(ChannelParams::new(0.0, 0.0, 1.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(ChannelParams::new(1.2, 0.0, 1.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(ChannelParams::new(0.5, -1.0, 1.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(ChannelParams::new(0.5, 0.0, 0.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(ChannelParams::new(1.0, 0.0, 1.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn output_states() {
        let p = ChannelParams::new(0.8, 0.0, 7.0).unwrap();
        let b = output_state_b(&p, Complex64::new(1.0, 1.0));
        assert_relative_eq!(b.center.re, 0.8, epsilon = 1e-15);
        assert_relative_eq!(b.center.im, 0.8, epsilon = 1e-15);
        assert_eq!(b.width, 0.0);
        let e = output_state_e(&p, Complex64::new(1.0, 0.0));
        assert_relative_eq!(e.center.re, -0.6, epsilon = 1e-15);
        assert_eq!(e.width, 0.0);

        let q = ChannelParams::new(0.8, 2.0, 7.0).unwrap();
        let b0 = output_state_b(&q, Complex64::new(0.0, 0.0));
        assert_eq!(b0.center, Complex64::new(0.0, 0.0));
        assert_relative_eq!(b0.width, q.n_c);
        assert_relative_eq!(output_state_e(&q, Complex64::new(0.0, 0.0)).width, 0.64 * 2.0);
    }

    #[test]
    fn g_values() {
        assert_eq!(g_entropy(0.0), 0.0);
        assert_relative_eq!(g_entropy(1.0), 2.0, epsilon = 1e-15);
        assert_relative_eq!(g_entropy(4.48), 3.7564, epsilon = 1e-4);
    }

    #[test]
    fn capacity_and_rate_limits() {
        let p = ChannelParams::new(0.8, 0.0, 7.0).unwrap();
        assert_relative_eq!(capacity_c(&p), g_entropy(4.48), epsilon = 1e-12);
        assert_relative_eq!(gaussian_rate_limit(&p), g_entropy(4.48) - g_entropy(2.52), epsilon = 1e-12);
        assert_relative_eq!(gaussian_rate_limit(&p), 0.7258, epsilon = 1e-4);

        let q = ChannelParams::new(0.8, 1.0, 7.0).unwrap();
        assert_relative_eq!(capacity_c(&q), g_entropy(4.84) - g_entropy(0.36), epsilon = 1e-12);

        let half = ChannelParams::new(0.5_f64.sqrt(), 0.0, 3.0).unwrap();
        assert!(gaussian_rate_limit(&half).abs() < 1e-12);

        let near_one = ChannelParams::new(1.0 - 1e-9, 0.0, 3.0).unwrap();
        assert_relative_eq!(gaussian_rate_limit(&near_one), g_entropy(3.0), epsilon = 1e-5);

        let tiny = ChannelParams::new(0.8, 1.0, 1e-9).unwrap();
        assert!(capacity_c(&tiny) < 1e-7);
    }

    #[test]
    fn capacity_dominates_and_increases() {
        for k in [0.3, 0.6, 0.9] {
            for n0 in [0.0, 0.4, 2.0] {
                let mut last = 0.0;
                for n in [0.1, 0.5, 1.0, 3.0, 7.0, 20.0] {
                    let p = ChannelParams::new(k, n0, n).unwrap();
                    let c = capacity_c(&p);
                    assert!(c >= gaussian_rate_limit(&p));
                    assert!(c > last);
                    last = c;
                }
            }
        }
    }
}
