//! Truncated number-basis numerics for a single Bosonic mode.
//!
//! Every constructor keeps the states it builds on the first `dim` levels
//! and records the trace (or norm) it lost to the cutoff.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Eigenvalues at or below this are treated as exact zeros.
pub const EIG_FLOOR: f64 = 1e-14;

/// `rho` may put at most this much weight outside the numerical support of
/// `sigma` in [`relative_entropy`].
pub const SUPPORT_TOL: f64 = 1e-8;

/// Cutoff covering a state with mean photon number `mu`:
/// `ceil(mu + 8 sqrt(mu + 1) + 20)`.
pub fn truncation_dim(mu: f64) -> usize {
    (mu.max(0.0) + 8.0 * (mu.max(0.0) + 1.0).sqrt() + 20.0).ceil() as usize
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Number-basis amplitudes of a pure state on the first `dim` levels.
#[derive(Debug, Clone)]
pub struct StateVector {
    amplitudes: CVector,
}

impl StateVector {
    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability lost to the cutoff.
    pub fn truncation_deficit(&self) -> f64 {
        (1.0 - self.norm_sqr()).max(0.0)
    }

    pub fn is_truncated(&self, tol: f64) -> bool {
        self.truncation_deficit() > tol
    }

    pub fn projector(&self) -> DensityOperator {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityOperator {
            matrix: m,
            truncation_tol: self.truncation_deficit(),
        }
    }
}

/// Coherent state `|z>`, `a_n = exp(-|z|^2/2) z^n / sqrt(n!)`.
pub fn coherent_state(z: Complex64, dim: usize) -> Result<StateVector> {
    if dim == 0 {
        return Err(invalid("Fock dimension must be at least 1"));
    }
    let mut amplitudes = CVector::from_element(dim, zero());
    let r2 = z.norm_sqr();
    if r2 == 0.0 {
        amplitudes[0] = Complex64::new(1.0, 0.0);
        return Ok(StateVector { amplitudes });
    }
    let ln_r = 0.5 * r2.ln();
    let theta = z.arg();
    let mut log_mag = -0.5 * r2;
    for n in 0..dim {
        if n > 0 {
            log_mag += ln_r - 0.5 * (n as f64).ln();
        }
        amplitudes[n] = Complex64::from_polar(log_mag.exp(), theta * n as f64);
    }
    Ok(StateVector { amplitudes })
}

/// A density operator on the first `dim` Fock levels.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    matrix: CMatrix,
    truncation_tol: f64,
}

impl DensityOperator {
    /// Wrap a matrix, symmetrizing away rounding-level anti-Hermitian parts.
    pub fn from_matrix(matrix: CMatrix, truncation_tol: f64) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(invalid("density matrix must be square and nonempty"));
        }
        let asym = (&matrix - matrix.adjoint()).map(|c| c.norm()).max();
        if asym > 1e-10 {
            return Err(invalid(format!("matrix is not Hermitian (deviation {asym:e})")));
        }
        Ok(Self {
            matrix: hermitian_part(&matrix),
            truncation_tol,
        })
    }

    pub(crate) fn from_parts(matrix: CMatrix, truncation_tol: f64) -> Self {
        Self {
            matrix,
            truncation_tol,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Declared bound on the trace lost to truncation.
    pub fn truncation_tol(&self) -> f64 {
        self.truncation_tol
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|d| d.re).sum()
    }

    pub fn trace_deficit(&self) -> f64 {
        (1.0 - self.trace()).max(0.0)
    }

    /// `Tr[a^dag a rho]`.
    pub fn mean_photons(&self) -> f64 {
        self.matrix
            .diagonal()
            .iter()
            .enumerate()
            .map(|(n, d)| n as f64 * d.re)
            .sum()
    }

    /// `Tr[a rho]`.
    pub fn mean_amplitude(&self) -> Complex64 {
        (1..self.dim())
            .map(|n| self.matrix[(n, n - 1)] * (n as f64).sqrt())
            .sum()
    }

    /// `Tr[a^2 rho]`.
    pub fn mean_amplitude_sq(&self) -> Complex64 {
        (2..self.dim())
            .map(|n| self.matrix[(n, n - 2)] * ((n * (n - 1)) as f64).sqrt())
            .sum()
    }

    /// Largest elementwise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).map(|c| c.norm()).max()
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let eig = hermitian_part(&self.matrix)
            .try_symmetric_eigen(f64::EPSILON, 0)
            .ok_or_else(|| Error::NumericFailure("Hermitian eigensolve did not converge".into()))?;
        Ok(eig.eigenvalues.iter().copied().collect())
    }

    /// `U rho U^dag`.
    pub fn conjugate(&self, u: &CMatrix) -> Self {
        let m = u * &self.matrix * u.adjoint();
        Self {
            matrix: hermitian_part(&m),
            truncation_tol: self.truncation_tol,
        }
    }
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Thermal state `tau_N`, diagonal with entries `N^n / (N+1)^{n+1}`.
pub fn thermal_state(n: f64, dim: usize) -> Result<DensityOperator> {
    if !(n >= 0.0) || !n.is_finite() {
        return Err(invalid(format!("thermal photon number must be >= 0, got {n}")));
    }
    if dim == 0 {
        return Err(invalid("Fock dimension must be at least 1"));
    }
    let weights = thermal_weights(n, dim);
    let matrix = CMatrix::from_diagonal(&CVector::from_iterator(
        dim,
        weights.iter().map(|&w| Complex64::new(w, 0.0)),
    ));
    let ratio = n / (n + 1.0);
    Ok(DensityOperator {
        matrix,
        truncation_tol: ratio.powi(dim as i32),
    })
}

fn thermal_weights(n: f64, dim: usize) -> Vec<f64> {
    if n == 0.0 {
        let mut w = vec![0.0; dim];
        w[0] = 1.0;
        return w;
    }
    let ln_ratio = (n / (n + 1.0)).ln();
    let ln_norm = -(n + 1.0).ln();
    (0..dim)
        .map(|k| (ln_norm + k as f64 * ln_ratio).exp())
        .collect()
}

/// Truncated annihilation operator, `sqrt(n)` at `(n-1, n)`.
pub fn annihilation_matrix(dim: usize) -> CMatrix {
    let mut a = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Matrix elements `<m|D(alpha)|n>` on the first `dim` levels.
///
/// Along each diagonal offset `k = |m - n|` the elements are
/// `sqrt(n!/(n+k)!) |alpha|^k e^{-|alpha|^2/2} L_n^{(k)}(|alpha|^2)` up to a
/// phase. The three-term Laguerre recurrence is run directly on these
/// normalized values so nothing overflows.
pub fn displacement_operator(alpha: Complex64, dim: usize) -> Result<CMatrix> {
    if dim == 0 {
        return Err(invalid("Fock dimension must be at least 1"));
    }
    let x = alpha.norm_sqr();
    if x == 0.0 {
        return Ok(CMatrix::identity(dim, dim));
    }
    let theta = alpha.arg();
    let ln_x = x.ln();
    let mut d = CMatrix::zeros(dim, dim);
    for k in 0..dim {
        let kf = k as f64;
        let lower = Complex64::from_polar(1.0, kf * theta);
        let upper = if k % 2 == 0 { lower.conj() } else { -lower.conj() };
        let mut prev = 0.0;
        let mut cur = (0.5 * kf * ln_x - 0.5 * x - 0.5 * ln_gamma(kf + 1.0)).exp();
        for j in 0..dim - k {
            d[(j + k, j)] = lower * cur;
            if k > 0 {
                d[(j, j + k)] = upper * cur;
            }
            let jf = j as f64;
            let next = ((2.0 * jf + 1.0 + kf - x) * cur - (jf * (jf + kf)).sqrt() * prev)
                / ((jf + 1.0) * (jf + 1.0 + kf)).sqrt();
            prev = cur;
            cur = next;
        }
    }
    Ok(d)
}

/// `D(alpha) tau_{nbar} D(alpha)^dag`.
pub fn displaced_thermal(alpha: Complex64, nbar: f64, dim: usize) -> Result<DensityOperator> {
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(invalid(format!("thermal width must be >= 0, got {nbar}")));
    }
    if nbar == 0.0 {
        return Ok(coherent_state(alpha, dim)?.projector());
    }
    let d = displacement_operator(alpha, dim)?;
    let weights = thermal_weights(nbar, dim);
    // drop thermal levels that cannot affect the result
    let kept = weights.iter().rposition(|&w| w > 1e-18).map_or(1, |i| i + 1);
    let mut cols = d.columns(0, kept).into_owned();
    for (j, mut col) in cols.column_iter_mut().enumerate() {
        col *= Complex64::new(weights[j].sqrt(), 0.0);
    }
    let matrix = hermitian_part(&(&cols * cols.adjoint()));
    let mut rho = DensityOperator {
        matrix,
        truncation_tol: 0.0,
    };
    rho.truncation_tol = rho.trace_deficit();
    Ok(rho)
}

fn entropy_of(eigenvalues: &[f64]) -> f64 {
    eigenvalues
        .iter()
        .filter(|&&l| l > EIG_FLOOR)
        .map(|&l| -l * l.log2())
        .sum()
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    Ok(entropy_of(&rho.eigenvalues()?).max(0.0))
}

/// Quantum relative entropy `Tr[rho (log rho - log sigma)]` in bits.
pub fn relative_entropy(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(invalid(format!(
            "dimension mismatch: {} vs {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let neg_entropy = -entropy_of(&rho.eigenvalues()?);
    let eig = hermitian_part(sigma.matrix())
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or_else(|| Error::NumericFailure("Hermitian eigensolve did not converge".into()))?;
    let v = &eig.eigenvectors;
    let rotated = v.adjoint() * rho.matrix() * v;
    let mut cross = 0.0;
    let mut outside = 0.0;
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        let weight = rotated[(i, i)].re;
        if lambda > EIG_FLOOR {
            cross += weight * lambda.log2();
        } else {
            outside += weight.max(0.0);
        }
    }
    if outside > SUPPORT_TOL {
        return Err(Error::Domain(format!(
            "rho places weight {outside:e} outside the support of sigma"
        )));
    }
    Ok((neg_entropy - cross).max(0.0))
}

/// `Tr[(rho tau_{N'}^{-1/2})^2] - 1` evaluated in the number basis,
/// `(N'+1) sum_{n,n'} t^{n+n'} |rho_{n n'}|^2` with `t = sqrt((N'+1)/N')`.
///
/// The weights grow geometrically, so the sum is only trusted when the
/// outermost shell `max(n, n') = dim - 1` is negligible and shrinking.
pub fn quantum_chi2_direct(rho: &DensityOperator, n_prime: f64) -> Result<f64> {
    if !(n_prime > 0.0) || !n_prime.is_finite() {
        return Err(invalid(format!("reference photon number must be > 0, got {n_prime}")));
    }
    let dim = rho.dim();
    let ln_t = 0.5 * ((n_prime + 1.0) / n_prime).ln();
    let ln_pref = (n_prime + 1.0).ln();
    let m = rho.matrix();
    let mut shells = vec![0.0; dim];
    for i in 0..dim {
        for j in 0..dim {
            let a = m[(i, j)].norm_sqr();
            if a == 0.0 {
                continue;
            }
            shells[i.max(j)] += (a.ln() + ln_pref + ln_t * (i + j) as f64).exp();
        }
    }
    let total: f64 = shells.iter().sum();
    if !total.is_finite() {
        return Err(Error::Truncation("weighted chi-square sum overflowed".into()));
    }
    if dim >= 3 {
        let last = shells[dim - 1];
        let before = shells[dim - 2];
        if last > 1e-9 * total && last >= before {
            return Err(Error::Truncation(format!(
                "chi-square shells still growing at cutoff {dim} ({before:e} -> {last:e})"
            )));
        }
        if last > 1e-7 * total {
            return Err(Error::Truncation(format!(
                "chi-square tail {last:e} not negligible at cutoff {dim}"
            )));
        }
    }
    Ok(total - 1.0)
}
