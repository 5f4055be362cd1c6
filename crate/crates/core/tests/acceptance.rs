//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so every line is printed; exits nonzero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use bosonic_polar::channel::{capacity_c, gaussian_rate_limit, ChannelParams};
use bosonic_polar::chi2::{delta_b_bound, quantum_chi2_constellation};
use bosonic_polar::constellations::{
    classical_chi2_kernel, classical_chi2_series, make_equilattice, make_gauss_hermite,
    make_random_walk, product_constellation, ConstellationKind,
};
use bosonic_polar::fock::{quantum_chi2_direct, thermal_state, von_neumann_entropy};
use bosonic_polar::polar::{
    construct_code_for, design_codes, frozen_overlap, simulate, Bec, InducedChannel,
};
use bosonic_polar::rates::{
    analyze, build_ensemble, ensemble_average_state, holevo_rate, quantum_rate, Side,
};

use common::*;

/// Outcome of one criterion: pass flag and a one-line summary.
type Verdict = (bool, String);

fn reference_channel() -> ChannelParams {
    ChannelParams::new(0.8, 0.0, 7.0).unwrap()
}

fn c1_closed_forms() -> Verdict {
    let start = Instant::now();
    let p = reference_channel();
    let cap = capacity_c(&p);
    let lim = gaussian_rate_limit(&p);
    let cap_ref = g_oracle(4.48);
    let lim_ref = g_oracle(4.48) - g_oracle(2.52);
    let elapsed = start.elapsed();
    let err = (cap - cap_ref)
        .abs()
        .max((lim - lim_ref).abs())
        .max((cap - G_4_48).abs())
        .max((lim - G_GAP_REFERENCE).abs());
    (
        err <= 1e-9 && elapsed < Duration::from_secs(1),
        format!("C = {cap:.10}, Q = {lim:.10}, max error {err:.1e} bits, {elapsed:.2?}"),
    )
}

fn c2_moments() -> Verdict {
    let mut worst_gh: f64 = 0.0;
    for m in 2..=12 {
        let c = make_gauss_hermite(m).unwrap();
        for k in 1..2 * m {
            worst_gh = worst_gh.max(he_moment_dd(&c, k).abs());
        }
    }
    let mut worst_std: f64 = 0.0;
    for kind in ConstellationKind::ALL {
        for m in 2..=32 {
            let c = kind.build(m).unwrap();
            worst_std = worst_std.max(c.mean().abs()).max((c.variance() - 1.0).abs());
        }
    }
    (
        worst_gh <= 1e-9 && worst_std <= 1e-10,
        format!("max |E He_k| = {worst_gh:.1e} (m <= 12), max mean/variance error {worst_std:.1e}"),
    )
}

const SNRS: [f64; 3] = [0.1, 1.0, 9.435];

fn c3_chi2_cross_method() -> Verdict {
    let mut worst: f64 = 0.0;
    for kind in ConstellationKind::ALL {
        for m in 2..=8 {
            let c = kind.build(m).unwrap();
            for s in SNRS {
                let series = 1.0 + classical_chi2_series(&c, s, 1e-17).unwrap();
                let kernel = 1.0 + classical_chi2_kernel(&c, s);
                let quad = awgn_one_plus_chi2_quadrature(&c, s);
                let err = ((series - kernel).abs())
                    .max((series - quad).abs())
                    .max((kernel - quad).abs())
                    / quad;
                worst = worst.max(err);
            }
        }
    }
    (worst <= 1e-8, format!("max relative disagreement of 1 + chi^2: {worst:.1e}"))
}

fn c4_factorization() -> Verdict {
    let mut worst: f64 = 0.0;
    for kind in ConstellationKind::ALL {
        for m in 2..=8 {
            let c = kind.build(m).unwrap();
            for s in SNRS {
                let p = params_with_snr(0.8, s);
                let q = product_constellation(&c, p.n).unwrap();
                let quantum = 1.0 + quantum_chi2_constellation(&p, &q);
                let classical = (1.0 + classical_chi2_kernel(&c, s)).powi(2);
                worst = worst.max((quantum - classical).abs() / classical);
            }
        }
    }
    (worst <= 1e-10, format!("max relative deviation of 1 + chi^2: {worst:.1e}"))
}

fn c5_fock_oracle() -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for n0 in [0.0, 0.5] {
        for n in [0.5, 2.0, 4.0] {
            let p = ChannelParams::new(0.8, n0, n).unwrap();
            for kind in ConstellationKind::ALL {
                for m in 2..=3 {
                    let q = product_constellation(&kind.build(m).unwrap(), p.n).unwrap();
                    let kernel = quantum_chi2_constellation(&p, &q);
                    let ens = build_ensemble(&p, &q, Side::B);
                    // grow the cutoff until the direct sum converges
                    let mut dim = ens.default_dim();
                    let direct = loop {
                        let rho = ensemble_average_state(&ens, dim).unwrap();
                        match quantum_chi2_direct(&rho, p.n_prime) {
                            Ok(v) => break v,
                            Err(_) if dim < 400 => dim += 40,
                            Err(e) => panic!("no convergence at dim {dim}: {e}"),
                        }
                    };
                    worst = worst.max((direct - kernel).abs() / kernel);
                    cases += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    (
        worst <= 1e-3 && elapsed < Duration::from_secs(300),
        format!("{cases} cases, max relative deviation {worst:.1e}, {elapsed:.2?}"),
    )
}

fn c6_gap_identities() -> Verdict {
    let start = Instant::now();
    let p = reference_channel();
    let mut form_gap: f64 = 0.0;
    let mut min_delta_e = f64::INFINITY;
    let mut bound_ok = true;
    let mut max_dim = 0;
    for kind in ConstellationKind::ALL {
        for m in 2..=10 {
            let c = kind.build(m).unwrap();
            let q = product_constellation(&c, p.n).unwrap();
            let a = analyze(&p, &q, None).unwrap();
            form_gap = form_gap.max((a.delta_b_entropy - a.delta_b_relative).abs());
            min_delta_e = min_delta_e.min(a.delta_e);
            let bound = delta_b_bound(&p, &c);
            bound_ok &= a.delta_b_entropy * std::f64::consts::LN_2 <= bound + 1e-9;
            max_dim = max_dim.max(a.dim_b.max(a.dim_e));
        }
    }
    let elapsed = start.elapsed();
    (
        form_gap <= 1e-5 && min_delta_e >= -1e-6 && bound_ok,
        format!(
            "entropy vs relative form {form_gap:.1e} bits, min Delta_E {min_delta_e:.1e}, \
             bound holds: {bound_ok}, dim <= {max_dim}, {elapsed:.2?}"
        ),
    )
}

/// First m at which the random-walk rate is within 0.05 bits of capacity.
const RANDOM_WALK_M_STAR: usize = 6;

fn c7_rate_curve_shape() -> Verdict {
    let p = reference_channel();
    let cap = capacity_c(&p);
    let limit = gaussian_rate_limit(&p);
    let ms: Vec<usize> = (2..=12).collect();
    let mut rw = Vec::new();
    let mut rw_q = Vec::new();
    for &m in &ms {
        let q = product_constellation(&make_random_walk(m).unwrap(), p.n).unwrap();
        let a = analyze(&p, &q, None).unwrap();
        rw.push(a.holevo_rate);
        rw_q.push(a.quantum_rate);
    }
    let monotone = rw.windows(2).all(|w| w[1] >= w[0] - 1e-9);
    let m_star = ms.iter().zip(&rw).find(|(_, &r)| cap - r <= 0.05).map(|(&m, _)| m);
    let mut beats_gh = true;
    for m in 2..=4 {
        let q = product_constellation(&make_gauss_hermite(m).unwrap(), p.n).unwrap();
        let gh = holevo_rate(&p, &q, None).unwrap();
        let r = rw[m - 2];
        // at m = 2 every symmetric unit-variance constellation is {-1, 1}
        beats_gh &= if m == 2 { (r - gh).abs() < 1e-9 } else { r > gh };
    }
    let below = rw_q.iter().all(|&r| r <= limit + 1e-6);
    let final_gap = limit - rw_q.last().unwrap();
    let approaching = final_gap < 0.01 && final_gap < limit - rw_q[2];
    let pure_loss_check = {
        let q = product_constellation(&make_equilattice(4).unwrap(), p.n).unwrap();
        quantum_rate(&p, &q, None).unwrap() <= limit + 1e-6
    };
    (
        monotone
            && m_star.is_some_and(|m| m <= 32 && m == RANDOM_WALK_M_STAR)
            && beats_gh
            && below
            && approaching
            && pure_loss_check,
        format!(
            "monotone {monotone}, m* = {m_star:?}, beats Gauss-Hermite for m in 3..=4 \
             (tie at 2): {beats_gh}, quantum gap at m=12 {final_gap:.2e} (from below: {below})"
        ),
    )
}

fn c8_decay_constant() -> Verdict {
    let p = reference_channel();
    let ms: Vec<f64> = (6..=14).map(|m| m as f64).collect();
    let logs: Vec<f64> = (6..=14)
        .map(|m| delta_b_bound(&p, &make_gauss_hermite(m).unwrap()).ln())
        .collect();
    let slope = fit_slope(&ms, &logs);
    let target = -p.c_decay;
    let rel = (slope - target).abs() / target.abs();
    (
        rel <= 0.25,
        format!("fitted slope {slope:.4} vs -c = {target:.4} ({:.0}% off)", 100.0 * rel),
    )
}

fn c9_polar() -> Verdict {
    let start = Instant::now();
    let n = 1024;
    let bec = Bec::new(0.5).unwrap();
    let code = construct_code_for(&bec, n, 0.25, 20_000, 2024).unwrap();
    let reference = worst_indices(&bec_erasures(n, 0.5), code.frozen().len());
    let overlap = frozen_overlap(code.frozen(), &reference);

    let p = reference_channel();
    let q = product_constellation(&make_equilattice(4).unwrap(), p.n).unwrap();
    let ch = InducedChannel::new(p, q).unwrap();
    let codes = design_codes(&ch, n, 0.7, 20_000, 7).unwrap();
    let report = simulate(&ch, &codes, 500, 11).unwrap();
    let fer = report.fer.unwrap();
    let elapsed = start.elapsed();
    (
        overlap >= 0.95 && fer <= 0.05 && elapsed < Duration::from_secs(600),
        format!(
            "BEC overlap {overlap:.4}; heterodyne MI {:.4}, sum rate {:.4}, FER {fer:.3} \
             over 500 frames, {elapsed:.2?}",
            report.heterodyne_mi_estimate, report.sum_rate
        ),
    )
}

fn c10_entropy() -> Verdict {
    let mut worst: f64 = 0.0;
    for dim in [60, 80, 120] {
        let h = von_neumann_entropy(&thermal_state(1.0, dim).unwrap()).unwrap();
        worst = worst.max((h - 2.0).abs());
    }
    (worst <= 1e-6, format!("max |H(tau_1) - 2| = {worst:.1e} at dim 60, 80, 120"))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("closed-form capacity and Gaussian rate limit", c1_closed_forms),
        ("Hermite moments and standardization", c2_moments),
        ("chi^2 series vs kernel vs quadrature", c3_chi2_cross_method),
        ("quantum chi^2 factorizes into classical chi^2", c4_factorization),
        ("kernel chi^2 vs Fock-space brute force", c5_fock_oracle),
        ("gap identities and chi^2 bound on the rate grid", c6_gap_identities),
        ("rate curves vs constellation size", c7_rate_curve_shape),
        ("Gauss-Hermite bound decay constant", c8_decay_constant),
        ("polar construction and heterodyne pipeline", c9_polar),
        ("thermal state entropy", c10_entropy),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (pass, detail) = match catch_unwind(AssertUnwindSafe(check)) {
            Ok(v) => v,
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} [{}] {name}: {detail}",
            i + 1,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
