//! Independent reference computations shared by the integration tests.
//! Nothing here calls the library routine it is used to check.

#![allow(dead_code)]

use bosonic_polar::channel::ChannelParams;
use bosonic_polar::constellations::RealConstellation;
use twofloat::TwoFloat;

/// `g(4.48)` and `g(4.48) - g(2.52)` evaluated offline with 50-digit
/// arithmetic.
pub const G_4_48: f64 = 3.756_409_574_030_895_305_5;
pub const G_GAP_REFERENCE: f64 = 0.725_811_873_422_123_164_7;

/// `g(x) = log2(1 + x) + x log2(1 + 1/x)`, algebraically equal to the usual
/// form but free of the cancellation between two large terms.
pub fn g_oracle(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    (x.ln_1p() + x * x.recip().ln_1p()) / std::f64::consts::LN_2
}

/// `E[He_k(X)]` under the constellation, by the plain three-term recurrence
/// `He_{k+1} = x He_k - k He_{k-1}` in double-double arithmetic.
pub fn he_moment_dd(c: &RealConstellation, k: usize) -> f64 {
    let mut total = TwoFloat::from(0.0);
    for (&x, &p) in c.points_ext().iter().zip(c.probs_ext()) {
        let mut prev = TwoFloat::from(1.0);
        let mut cur = x;
        if k == 0 {
            cur = prev;
        } else {
            for j in 1..k {
                let next = x * cur - prev * (j as f64);
                prev = cur;
                cur = next;
            }
        }
        total += p * cur;
    }
    total.into()
}

fn log_normal_pdf(y: f64, mean: f64, var: f64) -> f64 {
    -0.5 * (2.0 * std::f64::consts::PI * var).ln() - (y - mean) * (y - mean) / (2.0 * var)
}

/// `1 + chi^2(P_{Y_m} || P_Y)` for `Y = X + Z / sqrt(s)` by direct
/// trapezoidal quadrature over the output line. The integrand is smooth
/// and rapidly decaying, so the trapezoid rule converges geometrically.
pub fn awgn_one_plus_chi2_quadrature(c: &RealConstellation, s: f64) -> f64 {
    let noise = 1.0 / s;
    let sigma = noise.sqrt();
    let ref_var = 1.0 + noise;
    let reach = c.max_abs_point() + 40.0 * sigma + 12.0 * ref_var.sqrt();
    let h = sigma.min(1.0) / 16.0;
    let steps = (2.0 * reach / h).ceil() as usize;
    let h = 2.0 * reach / steps as f64;
    let mut total = 0.0;
    for i in 0..=steps {
        let y = -reach + i as f64 * h;
        let logs: Vec<f64> = c
            .points()
            .iter()
            .zip(c.probs())
            .map(|(&x, &p)| p.ln() + log_normal_pdf(y, x, noise))
            .collect();
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let log_mix = top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln();
        let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
        total += w * (2.0 * log_mix - log_normal_pdf(y, 0.0, ref_var)).exp();
    }
    total * h
}

/// Pure-loss channel at transmittivity `k` whose effective SNR is `s`.
pub fn params_with_snr(k: f64, s: f64) -> ChannelParams {
    // s/(1+s) = sqrt(N'/(N'+1)) for pure loss
    let r = s / (1.0 + s);
    let n_prime = r * r / (1.0 - r * r);
    let p = ChannelParams::new(k, 0.0, n_prime / (k * k)).unwrap();
    assert!((p.s / s - 1.0).abs() < 1e-10);
    p
}

/// Exact erasure probabilities of BEC synthetic channels, natural order,
/// computed bottom-up rather than by recursion.
pub fn bec_erasures(n: usize, eps: f64) -> Vec<f64> {
    let mut z = vec![eps];
    while z.len() < n {
        // the most significant index bit chooses the first split, so each
        // channel expands in place into its worse and better children
        z = z
            .iter()
            .flat_map(|&e| [1.0 - (1.0 - e) * (1.0 - e), e * e])
            .collect();
    }
    z
}

/// Indices of the `count` largest values, lower index first on ties.
pub fn worst_indices(values: &[f64], count: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order.truncate(count);
    order.sort_unstable();
    order
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
