//! Gaussian-state primitives in shot-noise units.
//!
//! Covariance matrices use the quadrature ordering `x1, p1, x2, p2, ...` and
//! the convention that the vacuum has variance 1 on each quadrature, so a
//! thermal mode with mean photon number `n` has covariance `(2n + 1) I2`.
//! Every state here is zero-mean; the mean vector is carried only so the
//! type describes a complete Gaussian state.

use nalgebra::{DMatrix, DVector, Matrix2};
use thiserror::Error;

/// Relative tolerance used when checking covariance symmetry.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Symplectic eigenvalues below `1 - PHYSICALITY_TOLERANCE` are rejected.
pub const PHYSICALITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GaussianError {
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("mode index {index} is out of range for a {n_modes}-mode state")]
    ModeIndex { index: usize, n_modes: usize },
    #[error("mode {index} is selected more than once")]
    DuplicateMode { index: usize },
    #[error("mode selection is empty")]
    EmptySelection,
    #[error("operation needs at least {required} modes, state has {n_modes}")]
    TooFewModes { required: usize, n_modes: usize },
    #[error("covariance matrix must be square with even dimension, got {rows}x{cols}")]
    Shape { rows: usize, cols: usize },
    #[error("covariance matrix is not symmetric (max deviation {deviation:e})")]
    NotSymmetric { deviation: f64 },
    #[error("covariance matrix is unphysical (smallest symplectic eigenvalue {min_eigenvalue})")]
    Unphysical { min_eigenvalue: f64 },
    #[error("measured block is numerically singular (det = {det:e})")]
    Conditioning { det: f64 },
}

/// A zero-mean multimode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    cov: DMatrix<f64>,
    mean: DVector<f64>,
}

impl GaussianState {
    /// Validates shape, symmetry and physicality before accepting `cov`.
    pub fn from_covariance(cov: DMatrix<f64>) -> Result<Self, GaussianError> {
        check_shape(&cov)?;
        check_symmetric(&cov)?;
        let state = Self::from_parts(symmetrize(cov));
        let spectrum = raw_spectrum(&state.cov)?;
        let min = spectrum.iter().copied().fold(f64::INFINITY, f64::min);
        if min < 1.0 - spectrum_tolerance(&state.cov) {
            return Err(GaussianError::Unphysical {
                min_eigenvalue: min,
            });
        }
        Ok(state)
    }

    /// The n-mode vacuum.
    pub fn vacuum(n_modes: usize) -> Self {
        Self::from_parts(DMatrix::identity(2 * n_modes, 2 * n_modes))
    }

    // Callers guarantee a symmetric, physical covariance.
    fn from_parts(cov: DMatrix<f64>) -> Self {
        let dim = cov.nrows();
        Self {
            cov,
            mean: DVector::zeros(dim),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.cov.nrows() / 2
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    /// Mean photon number of a single mode, `(V_xx + V_pp) / 4 - 1/2`.
    pub fn mean_photon_number(&self, mode: usize) -> Result<f64, GaussianError> {
        self.check_mode(mode)?;
        let i = 2 * mode;
        Ok((self.cov[(i, i)] + self.cov[(i + 1, i + 1)]) / 4.0 - 0.5)
    }

    /// Sum of the mean photon numbers over all modes.
    pub fn total_photon_number(&self) -> f64 {
        (self.cov.trace() - self.cov.nrows() as f64) / 4.0
    }

    /// Direct sum (tensor product) of two states; `other`'s modes follow.
    pub fn tensor(&self, other: &GaussianState) -> GaussianState {
        let (d1, d2) = (self.cov.nrows(), other.cov.nrows());
        let mut cov = DMatrix::zeros(d1 + d2, d1 + d2);
        cov.view_mut((0, 0), (d1, d1)).copy_from(&self.cov);
        cov.view_mut((d1, d1), (d2, d2)).copy_from(&other.cov);
        Self::from_parts(cov)
    }

    fn check_mode(&self, index: usize) -> Result<(), GaussianError> {
        if index >= self.n_modes() {
            return Err(GaussianError::ModeIndex {
                index,
                n_modes: self.n_modes(),
            });
        }
        Ok(())
    }
}

/// Symplectic eigenvalues of a state, descending, each at least 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpectrum {
    eigenvalues: Vec<f64>,
}

impl SymplecticSpectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Von Neumann entropy in bits, `sum g((nu - 1) / 2)`.
    pub fn entropy(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|nu| g_unchecked((nu - 1.0) / 2.0))
            .sum()
    }
}

/// Entropy in bits of a thermal mode with mean photon number `x`:
/// `(x + 1) log2(x + 1) - x log2(x)`, with `g(0) = 0`.
///
/// Roundoff negatives down to `-1e-12` are treated as zero.
pub fn g_entropy(x: f64) -> Result<f64, GaussianError> {
    if x.is_nan() || x < -1e-12 {
        return Err(GaussianError::Domain {
            name: "x",
            value: x,
            expected: "x >= 0",
        });
    }
    Ok(g_unchecked(x))
}

pub(crate) fn g_unchecked(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return f64::INFINITY;
    }
    // (x+1)log2(x+1) - x log2 x == log2(x+1) + x log2(1 + 1/x); the second
    // form avoids cancelling two large terms when x is big.
    (x.ln_1p() + x * (1.0 / x).ln_1p()) / std::f64::consts::LN_2
}

/// Two-mode squeezed vacuum with mean photon number `mu` in each mode.
pub fn tmsv_state(mu: f64) -> Result<GaussianState, GaussianError> {
    non_negative("mu", mu)?;
    let v = 2.0 * mu + 1.0;
    let c = 2.0 * (mu * (mu + 1.0)).sqrt();
    let mut cov = DMatrix::zeros(4, 4);
    for i in 0..4 {
        cov[(i, i)] = v;
    }
    cov[(0, 2)] = c;
    cov[(2, 0)] = c;
    cov[(1, 3)] = -c;
    cov[(3, 1)] = -c;
    Ok(GaussianState::from_parts(cov))
}

/// Single-mode thermal state with mean photon number `n`.
pub fn thermal_state(n: f64) -> Result<GaussianState, GaussianError> {
    non_negative("n", n)?;
    Ok(GaussianState::from_parts(DMatrix::from_diagonal_element(
        2,
        2,
        2.0 * n + 1.0,
    )))
}

/// Mixes modes `mode_a` and `mode_b` on a beamsplitter of transmissivity `tau`.
///
/// The transmitted port of `mode_a` stays in `mode_a`:
/// `a' = sqrt(tau) a + sqrt(1 - tau) b`, `b' = -sqrt(1 - tau) a + sqrt(tau) b`.
pub fn beamsplitter(
    state: &GaussianState,
    mode_a: usize,
    mode_b: usize,
    tau: f64,
) -> Result<GaussianState, GaussianError> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(GaussianError::Domain {
            name: "tau",
            value: tau,
            expected: "0 <= tau <= 1",
        });
    }
    state.check_mode(mode_a)?;
    state.check_mode(mode_b)?;
    if mode_a == mode_b {
        return Err(GaussianError::DuplicateMode { index: mode_a });
    }
    let t = tau.sqrt();
    let r = (1.0 - tau).sqrt();
    let dim = state.cov.nrows();
    let mut s = DMatrix::identity(dim, dim);
    for q in 0..2 {
        let (i, j) = (2 * mode_a + q, 2 * mode_b + q);
        s[(i, i)] = t;
        s[(i, j)] = r;
        s[(j, i)] = -r;
        s[(j, j)] = t;
    }
    let cov = &s * &state.cov * s.transpose();
    Ok(GaussianState::from_parts(symmetrize(cov)))
}

/// Reduced state on `keep`, in the order given.
pub fn partial_state(state: &GaussianState, keep: &[usize]) -> Result<GaussianState, GaussianError> {
    if keep.is_empty() {
        return Err(GaussianError::EmptySelection);
    }
    for (pos, &mode) in keep.iter().enumerate() {
        state.check_mode(mode)?;
        if keep[..pos].contains(&mode) {
            return Err(GaussianError::DuplicateMode { index: mode });
        }
    }
    let idx = quadrature_indices(keep);
    Ok(GaussianState::from_parts(state.cov.select_rows(&idx).select_columns(&idx)))
}

/// Symplectic spectrum (descending, clamped at 1).
///
/// Single modes use `sqrt(det)`. Larger states take the singular values of
/// `sqrt(V) Omega sqrt(V)`, which come in equal pairs `nu_i`.
pub fn symplectic_eigenvalues(state: &GaussianState) -> Result<SymplecticSpectrum, GaussianError> {
    spectrum_with_tolerance(state, spectrum_tolerance(&state.cov))
}

/// Entropy of a state obtained from a parent whose covariance entries reach
/// `parent_scale`. Conditioning cancels large entries, so the roundoff
/// allowance follows the parent rather than the (small) result.
pub fn derived_entropy(state: &GaussianState, parent_scale: f64) -> Result<f64, GaussianError> {
    let tol = spectrum_tolerance(&state.cov).max(1024.0 * f64::EPSILON * parent_scale);
    Ok(spectrum_with_tolerance(state, tol)?.entropy())
}

fn spectrum_with_tolerance(state: &GaussianState, tol: f64) -> Result<SymplecticSpectrum, GaussianError> {
    check_symmetric(&state.cov)?;
    let mut eigenvalues = raw_spectrum(&state.cov)?;
    for nu in eigenvalues.iter_mut() {
        if *nu < 1.0 - tol {
            return Err(GaussianError::Unphysical { min_eigenvalue: *nu });
        }
        *nu = nu.max(1.0);
    }
    Ok(SymplecticSpectrum { eigenvalues })
}

/// Von Neumann entropy of a Gaussian state, in bits.
pub fn von_neumann_entropy(state: &GaussianState) -> Result<f64, GaussianError> {
    Ok(symplectic_eigenvalues(state)?.entropy())
}

/// Conditional state of the unmeasured modes after heterodyning `measured`.
///
/// Returns `V_A - V_AB (V_B + I)^-1 V_BA`. The result does not depend on the
/// measurement outcome, so it also describes the outcome-averaged state.
pub fn heterodyne_condition(state: &GaussianState, measured: usize) -> Result<GaussianState, GaussianError> {
    if state.n_modes() < 2 {
        return Err(GaussianError::TooFewModes {
            required: 2,
            n_modes: state.n_modes(),
        });
    }
    state.check_mode(measured)?;
    let rest: Vec<usize> = (0..state.n_modes()).filter(|&m| m != measured).collect();
    let idx_a = quadrature_indices(&rest);
    let idx_b = [2 * measured, 2 * measured + 1];

    let va = state.cov.select_rows(&idx_a).select_columns(&idx_a);
    let vab = state.cov.select_rows(&idx_a).select_columns(&idx_b);
    let vb = state.cov.select_rows(&idx_b).select_columns(&idx_b);
    let shifted = Matrix2::new(vb[(0, 0)] + 1.0, vb[(0, 1)], vb[(1, 0)], vb[(1, 1)] + 1.0);
    let det = shifted.determinant();
    if det.abs() < 1e-300 {
        return Err(GaussianError::Conditioning { det });
    }
    let inv = Matrix2::new(shifted[(1, 1)], -shifted[(0, 1)], -shifted[(1, 0)], shifted[(0, 0)]) / det;
    let inv = DMatrix::from_iterator(2, 2, inv.iter().copied());
    let cov = &va - &vab * inv * vab.transpose();
    Ok(GaussianState::from_parts(symmetrize(cov)))
}

fn non_negative(name: &'static str, value: f64) -> Result<(), GaussianError> {
    if value.is_nan() || value < 0.0 {
        return Err(GaussianError::Domain {
            name,
            value,
            expected: ">= 0",
        });
    }
    Ok(())
}

fn quadrature_indices(modes: &[usize]) -> Vec<usize> {
    modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect()
}

fn check_shape(cov: &DMatrix<f64>) -> Result<(), GaussianError> {
    let (rows, cols) = cov.shape();
    if rows != cols || rows == 0 || rows % 2 != 0 {
        return Err(GaussianError::Shape { rows, cols });
    }
    Ok(())
}

fn check_symmetric(cov: &DMatrix<f64>) -> Result<(), GaussianError> {
    let scale = cov.amax().max(1.0);
    let deviation = (cov - cov.transpose()).amax();
    if deviation.is_nan() || deviation > SYMMETRY_TOLERANCE * scale {
        return Err(GaussianError::NotSymmetric { deviation });
    }
    Ok(())
}

fn symmetrize(cov: DMatrix<f64>) -> DMatrix<f64> {
    (&cov + cov.transpose()) * 0.5
}

// Roundoff in the spectrum grows with the matrix scale; large-photon-number
// states would otherwise fail the 1e-9 physicality check on noise alone.
fn spectrum_tolerance(cov: &DMatrix<f64>) -> f64 {
    PHYSICALITY_TOLERANCE.max(64.0 * f64::EPSILON * cov.amax())
}

fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

fn raw_spectrum(cov: &DMatrix<f64>) -> Result<Vec<f64>, GaussianError> {
    let n = cov.nrows() / 2;
    if n == 1 {
        let det = cov[(0, 0)] * cov[(1, 1)] - cov[(0, 1)] * cov[(1, 0)];
        if !(det > 0.0) || cov[(0, 0)] <= 0.0 {
            return Err(GaussianError::Unphysical {
                min_eigenvalue: det.max(0.0).sqrt(),
            });
        }
        return Ok(vec![det.sqrt()]);
    }

    let eig = cov.clone().symmetric_eigen();
    let min_eig = eig.eigenvalues.min();
    if !(min_eig > 0.0) {
        return Err(GaussianError::Unphysical { min_eigenvalue: 0.0 });
    }
    let sqrt_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let root = &eig.eigenvectors * sqrt_diag * eig.eigenvectors.transpose();
    let k = &root * symplectic_form(n) * &root;
    let mut singular: Vec<f64> = k.singular_values().iter().copied().collect();
    singular.sort_by(|a, b| b.total_cmp(a));
    Ok(singular.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect())
}
