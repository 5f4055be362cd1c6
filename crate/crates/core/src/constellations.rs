//! Finite approximations of the standard normal distribution and their
//! complex (two-quadrature) products.
//!
//! Points and probabilities are held in double-double precision alongside
//! their `f64` roundings. High-order Hermite moments cancel catastrophically,
//! and the Gauss-Hermite moment identities only survive to `1e-9` at
//! `m = 12` when the constellation itself is known beyond `f64`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use twofloat::TwoFloat;

use crate::chi2::kernel_k;
use crate::error::{invalid, Error, Result};

/// Largest supported number of points per quadrature.
pub const MAX_POINTS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstellationKind {
    Equilattice,
    Quantile,
    RandomWalk,
    GaussHermite,
    /// Arbitrary user-supplied points; none of the moment guarantees apply.
    Custom,
}

impl ConstellationKind {
    /// The four normal-approximating families, in table order.
    pub const ALL: [ConstellationKind; 4] = [
        ConstellationKind::Equilattice,
        ConstellationKind::Quantile,
        ConstellationKind::RandomWalk,
        ConstellationKind::GaussHermite,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ConstellationKind::Equilattice => "equilattice",
            ConstellationKind::Quantile => "quantile",
            ConstellationKind::RandomWalk => "random_walk",
            ConstellationKind::GaussHermite => "gauss_hermite",
            ConstellationKind::Custom => "custom",
        }
    }

    /// Whether every point carries the same probability.
    pub fn is_uniform(&self) -> bool {
        matches!(
            self,
            ConstellationKind::Equilattice | ConstellationKind::Quantile
        )
    }

    pub fn build(&self, m: usize) -> Result<RealConstellation> {
        match self {
            ConstellationKind::Equilattice => make_equilattice(m),
            ConstellationKind::Quantile => make_quantile(m),
            ConstellationKind::RandomWalk => make_random_walk(m),
            ConstellationKind::GaussHermite => make_gauss_hermite(m),
            ConstellationKind::Custom => Err(invalid("custom constellations have no builder")),
        }
    }
}

impl fmt::Display for ConstellationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConstellationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "equilattice" => Ok(ConstellationKind::Equilattice),
            "quantile" => Ok(ConstellationKind::Quantile),
            "random_walk" | "randomwalk" => Ok(ConstellationKind::RandomWalk),
            "gauss_hermite" | "gausshermite" => Ok(ConstellationKind::GaussHermite),
            other => Err(invalid(format!("unknown constellation kind `{other}`"))),
        }
    }
}

/// A finite real random variable: sorted points with probabilities.
#[derive(Debug, Clone)]
pub struct RealConstellation {
    kind: ConstellationKind,
    points: Vec<f64>,
    probs: Vec<f64>,
    points_ext: Vec<TwoFloat>,
    probs_ext: Vec<TwoFloat>,
}

impl RealConstellation {
    /// Build a custom constellation. Points must be strictly increasing and
    /// probabilities nonnegative with unit sum.
    pub fn new(points: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        let points_ext = points.iter().map(|&x| TwoFloat::from(x)).collect();
        let probs_ext = probs.iter().map(|&p| TwoFloat::from(p)).collect();
        Self::from_ext(ConstellationKind::Custom, points_ext, probs_ext)
    }

    fn from_ext(
        kind: ConstellationKind,
        points_ext: Vec<TwoFloat>,
        probs_ext: Vec<TwoFloat>,
    ) -> Result<Self> {
        if points_ext.is_empty() || points_ext.len() != probs_ext.len() {
            return Err(invalid("points and probabilities must be nonempty and equally long"));
        }
        let points: Vec<f64> = points_ext.iter().map(|x| x.hi()).collect();
        let probs: Vec<f64> = probs_ext.iter().map(|p| p.hi()).collect();
        if points.iter().any(|x| !x.is_finite()) {
            return Err(invalid("points must be finite"));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("points must be strictly increasing"));
        }
        if probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(invalid("probabilities must be nonnegative"));
        }
        let total: f64 = probs_ext.iter().fold(TwoFloat::from(0.0), |acc, &p| acc + p).into();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self {
            kind,
            points,
            probs,
            points_ext,
            probs_ext,
        })
    }

    pub fn kind(&self) -> ConstellationKind {
        self.kind
    }

    pub fn m(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Points carried in double-double precision.
    pub fn points_ext(&self) -> &[TwoFloat] {
        &self.points_ext
    }

    /// Probabilities carried in double-double precision.
    pub fn probs_ext(&self) -> &[TwoFloat] {
        &self.probs_ext
    }

    pub fn mean(&self) -> f64 {
        self.weighted_sum(|x| x).into()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.weighted_sum(|x| x);
        let second = self.weighted_sum(|x| x * x);
        (second - mean * mean).into()
    }

    pub fn max_abs_point(&self) -> f64 {
        self.points.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }

    fn weighted_sum(&self, f: impl Fn(TwoFloat) -> TwoFloat) -> TwoFloat {
        self.points_ext
            .iter()
            .zip(&self.probs_ext)
            .fold(TwoFloat::from(0.0), |acc, (&x, &p)| acc + p * f(x))
    }

    /// The mirror image `x -> -x`.
    pub fn reflect(&self) -> Self {
        let points_ext = self.points_ext.iter().rev().map(|&x| -x).collect();
        let probs_ext = self.probs_ext.iter().rev().copied().collect();
        Self::from_ext(self.kind, points_ext, probs_ext).expect("reflection preserves validity")
    }
}

fn check_m(m: usize) -> Result<()> {
    if m < 2 {
        return Err(invalid(format!("constellation needs m >= 2, got {m}")));
    }
    if m > MAX_POINTS {
        return Err(invalid(format!("constellation size {m} exceeds {MAX_POINTS}")));
    }
    Ok(())
}

fn tf(x: f64) -> TwoFloat {
    TwoFloat::from(x)
}

/// Double-double quotient by long division. The `TwoFloat` division
/// operator is only accurate to about one f64 ulp, which the moment
/// identities at `m ~ 12` cannot tolerate.
fn dd_div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    TwoFloat::new_add(q1, q2) + q3
}

fn dd_recip(b: TwoFloat) -> TwoFloat {
    dd_div(tf(1.0), b)
}

fn uniform_probs(m: usize) -> Vec<TwoFloat> {
    vec![dd_recip(tf(m as f64)); m]
}

/// `m` equally spaced, equally likely points with unit variance.
pub fn make_equilattice(m: usize) -> Result<RealConstellation> {
    check_m(m)?;
    let spacing = dd_div(tf(12.0), tf((m * m - 1) as f64)).sqrt();
    let center = (m as f64 - 1.0) / 2.0;
    let points = (0..m).map(|j| spacing * (j as f64 - center)).collect();
    RealConstellation::from_ext(ConstellationKind::Equilattice, points, uniform_probs(m))
}

/// Midpoint quantiles of the standard normal, rescaled to unit variance.
pub fn make_quantile(m: usize) -> Result<RealConstellation> {
    check_m(m)?;
    let normal = Normal::standard();
    let mut raw: Vec<f64> = (1..=m)
        .map(|j| normal.inverse_cdf((2 * j - 1) as f64 / (2 * m) as f64))
        .collect();
    symmetrize(&mut raw);
    let raw: Vec<TwoFloat> = raw.into_iter().map(tf).collect();
    let second = dd_div(raw.iter().fold(tf(0.0), |acc, &x| acc + x * x), tf(m as f64));
    let scale = dd_recip(second.sqrt());
    let points = raw.into_iter().map(|x| x * scale).collect();
    RealConstellation::from_ext(ConstellationKind::Quantile, points, uniform_probs(m))
}

/// Positions of a `(m-1)`-step symmetric random walk, rescaled to unit
/// variance.
pub fn make_random_walk(m: usize) -> Result<RealConstellation> {
    check_m(m)?;
    let steps = m - 1;
    let scale = dd_recip(tf(steps as f64).sqrt());
    let points = (0..m)
        .map(|j| scale * (2.0 * j as f64 - steps as f64))
        .collect();
    let mut probs = Vec::with_capacity(m);
    let mut p = tf(0.5_f64.powi(steps as i32));
    for j in 0..m {
        probs.push(p);
        p = dd_div(p * tf((steps - j) as f64), tf((j + 1) as f64));
    }
    // the running ratio can differ from its mirror in the last bit
    for j in m.div_ceil(2)..m {
        probs[j] = probs[m - 1 - j];
    }
    RealConstellation::from_ext(ConstellationKind::RandomWalk, points, probs)
}

/// Nodes and weights of `m`-point Gauss-Hermite quadrature for the standard
/// normal weight.
///
/// Golub-Welsch supplies the nodes; each is then polished by Newton steps on
/// the normalized Hermite polynomial in double-double arithmetic and the
/// weights are taken from the Christoffel formula `1 / (m h_{m-1}(x)^2)`.
pub fn make_gauss_hermite(m: usize) -> Result<RealConstellation> {
    check_m(m)?;
    let (nodes, gw_weights) = golub_welsch(m)?;

    let mut points: Vec<TwoFloat> = nodes.iter().map(|&x| newton_polish(m, tf(x))).collect();
    // enforce exact reflection symmetry
    for j in 0..m / 2 {
        let half = (points[m - 1 - j] - points[j]) * 0.5;
        points[j] = -half;
        points[m - 1 - j] = half;
    }
    if m % 2 == 1 {
        points[m / 2] = tf(0.0);
    }

    let mut weights: Vec<TwoFloat> = points
        .iter()
        .map(|&x| {
            let (_, prev) = normalized_hermite_pair(m, x);
            dd_recip(tf(m as f64) * prev * prev)
        })
        .collect();
    for j in 0..m / 2 {
        let avg = (weights[j] + weights[m - 1 - j]) * 0.5;
        weights[j] = avg;
        weights[m - 1 - j] = avg;
    }
    let total = weights.iter().fold(tf(0.0), |acc, &w| acc + w);
    for w in &mut weights {
        *w = dd_div(*w, total);
    }

    // the eigenvector weights are only f64 accurate, but a gross mismatch
    // means the eigensolver landed on the wrong spectrum
    for (w, g) in weights.iter().zip(&gw_weights) {
        if (w.hi() - g).abs() > 1e-8 * (1.0 + g.abs()) {
            return Err(Error::NumericFailure(format!(
                "Golub-Welsch weight {g} disagrees with Christoffel weight {}",
                w.hi()
            )));
        }
    }
    RealConstellation::from_ext(ConstellationKind::GaussHermite, points, weights)
}

fn symmetrize(points: &mut [f64]) {
    let m = points.len();
    for j in 0..m / 2 {
        let half = (points[m - 1 - j] - points[j]) / 2.0;
        points[j] = -half;
        points[m - 1 - j] = half;
    }
    if m % 2 == 1 {
        points[m / 2] = 0.0;
    }
}

/// Eigen-decomposition of the Jacobi matrix of the probabilists' Hermite
/// recurrence. Returns ascending nodes and normalized weights.
fn golub_welsch(m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let jacobi = DMatrix::from_fn(m, m, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64).sqrt()
        } else {
            0.0
        }
    });
    let eig = jacobi
        .try_symmetric_eigen(f64::EPSILON, 10_000)
        .ok_or_else(|| Error::NumericFailure(format!("Jacobi eigensolve did not converge for m={m}")))?;
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    Ok((
        pairs.iter().map(|p| p.0).collect(),
        pairs.iter().map(|p| p.1 / total).collect(),
    ))
}

/// `(h_n(x), h_{n-1}(x))` for the orthonormal Hermite functions
/// `h_k = He_k / sqrt(k!)`.
fn normalized_hermite_pair(n: usize, x: TwoFloat) -> (TwoFloat, TwoFloat) {
    let mut prev = tf(0.0);
    let mut cur = tf(1.0);
    for k in 0..n {
        let next = dd_div(x * cur - tf(k as f64).sqrt() * prev, tf((k + 1) as f64).sqrt());
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

fn newton_polish(m: usize, mut x: TwoFloat) -> TwoFloat {
    let root_m = tf(m as f64).sqrt();
    for _ in 0..8 {
        let (h, prev) = normalized_hermite_pair(m, x);
        let step = dd_div(h, root_m * prev);
        x -= step;
        if step.hi().abs() <= 1e-31 * (1.0 + x.hi().abs()) {
            break;
        }
    }
    x
}

/// `E[He_k(X)]` with the probabilists' Hermite polynomials, evaluated in
/// double-double arithmetic. Overflows to infinity beyond `k ~ 170` for
/// wide constellations; use [`normalized_hermite_moments`] there.
pub fn hermite_moment(c: &RealConstellation, k: usize) -> f64 {
    if k == 0 {
        return c.probs_ext.iter().fold(tf(0.0), |acc, &p| acc + p).hi();
    }
    let mut total = tf(0.0);
    for (&x, &p) in c.points_ext.iter().zip(&c.probs_ext) {
        let mut prev = tf(1.0);
        let mut cur = x;
        for j in 1..k {
            let next = x * cur - prev * (j as f64);
            prev = cur;
            cur = next;
        }
        total += p * cur;
    }
    total.hi()
}

/// `E[He_j(X)] / sqrt(j!)` for `j = 0..=kmax`.
pub fn normalized_hermite_moments(c: &RealConstellation, kmax: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(kmax + 1);
    let mut walker = HermiteWalker::new(c);
    for _ in 0..=kmax {
        out.push(walker.moment().hi());
        walker.advance();
    }
    out
}

/// Steps the normalized Hermite values of every point through increasing
/// degree.
struct HermiteWalker<'a> {
    c: &'a RealConstellation,
    degree: usize,
    prev: Vec<TwoFloat>,
    cur: Vec<TwoFloat>,
}

impl<'a> HermiteWalker<'a> {
    fn new(c: &'a RealConstellation) -> Self {
        Self {
            c,
            degree: 0,
            prev: vec![tf(0.0); c.m()],
            cur: vec![tf(1.0); c.m()],
        }
    }

    fn moment(&self) -> TwoFloat {
        self.cur
            .iter()
            .zip(&self.c.probs_ext)
            .fold(tf(0.0), |acc, (&h, &p)| acc + p * h)
    }

    fn max_square(&self) -> f64 {
        self.cur.iter().fold(0.0_f64, |acc, h| acc.max(h.hi() * h.hi()))
    }

    fn advance(&mut self) {
        let k = self.degree;
        let a = tf(k as f64).sqrt();
        let inv_b = dd_recip(tf((k + 1) as f64).sqrt());
        for ((cur, prev), &x) in self.cur.iter_mut().zip(self.prev.iter_mut()).zip(&self.c.points_ext) {
            let next = (x * *cur - a * *prev) * inv_b;
            *prev = *cur;
            *cur = next;
        }
        self.degree += 1;
    }
}

/// Consecutive sub-tolerance envelope terms required before the Hermite
/// series is declared converged.
const SERIES_QUIET_TERMS: usize = 5;
const SERIES_MAX_TERMS: usize = 200_000;

/// `chi^2(P_{Y'}, P_Y)` for `Y' = sqrt(s) X' + G` against `Y = sqrt(s) X + G`
/// with `X` standard normal, from the Hermite-moment series
/// `1 + chi^2 = sum_k (s/(1+s))^k E[He_k(X')]^2 / k!`.
///
/// Terms are summed from `k = 1`, so tiny divergences are not lost to the
/// leading `1`.
pub fn classical_chi2_series(c: &RealConstellation, s: f64, tol: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(invalid(format!("signal-to-noise ratio must be positive, got {s}")));
    }
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    let ratio = s / (1.0 + s);
    let mut walker = HermiteWalker::new(c);
    walker.advance();
    let mut sum = tf(0.0);
    let mut weight = ratio;
    let mut quiet = 0;
    for k in 1..SERIES_MAX_TERMS {
        let mu = walker.moment();
        let term = mu * mu * weight;
        if !term.hi().is_finite() {
            return Err(Error::NumericFailure(format!("Hermite series term overflowed at k={k}")));
        }
        sum += term;
        if weight * walker.max_square() < tol {
            quiet += 1;
            if quiet >= SERIES_QUIET_TERMS {
                return Ok(sum.hi());
            }
        } else {
            quiet = 0;
        }
        walker.advance();
        weight *= ratio;
    }
    Err(Error::NumericFailure(format!(
        "Hermite series did not converge within {SERIES_MAX_TERMS} terms"
    )))
}

/// The same divergence from the closed-form double sum
/// `1 + chi^2 = sum_ij p_i p_j K_s(x_i, x_j)`.
pub fn classical_chi2_kernel(c: &RealConstellation, s: f64) -> f64 {
    let mut total = tf(0.0);
    for (&xi, &pi) in c.points.iter().zip(&c.probs) {
        let mut row = tf(0.0);
        for (&xj, &pj) in c.points.iter().zip(&c.probs) {
            row += tf(pj) * kernel_k(s, xi, xj);
        }
        total += row * pi;
    }
    (total - 1.0).hi()
}

/// Product constellation `Z = sqrt(N/2) (X + i X')` on `m^2` points.
///
/// Index `j * m + l` holds real coordinate `x_j` and imaginary coordinate
/// `x_l`.
#[derive(Debug, Clone)]
pub struct ComplexConstellation {
    quadrature: RealConstellation,
    mean_photons: f64,
    points: Vec<Complex64>,
    probs: Vec<f64>,
}

impl ComplexConstellation {
    pub fn quadrature(&self) -> &RealConstellation {
        &self.quadrature
    }

    /// Mean photon number `N` of the emulated thermal state.
    pub fn mean_photons(&self) -> f64 {
        self.mean_photons
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Split a flat index into (real, imaginary) quadrature indices.
    pub fn split_index(&self, idx: usize) -> (usize, usize) {
        let m = self.quadrature.m();
        (idx / m, idx % m)
    }

    pub fn mean(&self) -> Complex64 {
        self.points
            .iter()
            .zip(&self.probs)
            .map(|(z, p)| z * *p)
            .sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.points
            .iter()
            .zip(&self.probs)
            .map(|(z, p)| z.norm_sqr() * p)
            .sum()
    }

    pub fn max_norm_sqr(&self) -> f64 {
        self.points.iter().fold(0.0_f64, |acc, z| acc.max(z.norm_sqr()))
    }
}

pub fn product_constellation(c: &RealConstellation, n: f64) -> Result<ComplexConstellation> {
    if !(n > 0.0) || !n.is_finite() {
        return Err(invalid(format!("mean photon number must be positive, got {n}")));
    }
    let scale = (n / 2.0).sqrt();
    let m = c.m();
    let mut points = Vec::with_capacity(m * m);
    let mut probs = Vec::with_capacity(m * m);
    for (&x, &px) in c.points.iter().zip(&c.probs) {
        for (&y, &py) in c.points.iter().zip(&c.probs) {
            points.push(Complex64::new(scale * x, scale * y));
            probs.push(px * py);
        }
    }
    Ok(ComplexConstellation {
        quadrature: c.clone(),
        mean_photons: n,
        points,
        probs,
    })
}
