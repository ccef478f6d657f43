//! Gaussian states, symplectic operations and the metrics built on them.
//!
//! Conventions used throughout the crate:
//!
//! * vacuum quadrature variance is 1, so `cov(vacuum) = I` and a thermal mode
//!   with occupation `n` has `cov = (2n + 1) I`;
//! * quadratures are interleaved, `(x1, p1, x2, p2, ...)`;
//! * the symplectic form is block diagonal with per-mode blocks
//!   `[[0, 1], [-1, 0]]`;
//! * a coherent amplitude `alpha` maps to the mean `(2 Re alpha, 2 Im alpha)`.
//!
//! The two-mode squeezed vacuum is used as the canonical entangled source
//! (the output of a nondegenerate parametric amplifier).

use std::fmt;

use nalgebra::{Complex, DMatrix, DVector, Matrix2, Vector2};

use crate::error::{invalid, Error, Result};

/// Absolute slack allowed below 1 for symplectic eigenvalues.
pub const UNCERTAINTY_TOLERANCE: f64 = 1e-9;
/// Relative asymmetry allowed in a covariance matrix.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;
/// Largest accepted squeezing parameter; `cosh(2r)` stays far from overflow.
pub const MAX_SQUEEZING: f64 = 30.0;

/// Block-diagonal symplectic form for `n_modes` modes.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

fn check_symmetric(cov: &DMatrix<f64>) -> Result<()> {
    if !cov.is_square() || !cov.nrows().is_multiple_of(2) || cov.nrows() == 0 {
        return Err(Error::Dimension(format!(
            "covariance must be a non-empty even square matrix, got {}x{}",
            cov.nrows(),
            cov.ncols()
        )));
    }
    let scale = cov.amax().max(1.0);
    let asym = (cov - cov.transpose()).amax();
    if asym > SYMMETRY_TOLERANCE * scale {
        return Err(Error::Unphysical(format!(
            "covariance not symmetric (max asymmetry {asym:e})"
        )));
    }
    Ok(())
}

/// Symplectic spectrum of a symmetric positive-definite matrix, ascending,
/// one value per mode.
///
/// Computed as the singular values of `V^{1/2} Ω V^{1/2}`, which is real
/// antisymmetric with eigenvalues `±iν`. Works on any such matrix, including
/// partially transposed covariances that are not themselves physical.
pub fn symplectic_spectrum(cov: &DMatrix<f64>) -> Result<Vec<f64>> {
    spectrum_and_condition(cov).map(|(nu, _)| nu)
}

/// Spectrum plus the condition number `λ_max / λ_min` of `cov`.
fn spectrum_and_condition(cov: &DMatrix<f64>) -> Result<(Vec<f64>, f64)> {
    check_symmetric(cov)?;
    let sym = (cov + cov.transpose()) * 0.5;
    let eig = sym.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(Error::Unphysical(
            "covariance is not positive definite".to_string(),
        ));
    }
    let condition = eig.eigenvalues.max() / eig.eigenvalues.min();
    let sqrt_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let root = &eig.eigenvectors * sqrt_diag * eig.eigenvectors.transpose();
    let n_modes = cov.nrows() / 2;
    let k = &root * symplectic_form(n_modes) * &root;
    // Singular values directly rather than eigenvalues of K^T K: squaring
    // would cost half the significant digits on strongly squeezed states.
    let mut nu: Vec<f64> = k.singular_values().iter().copied().collect();
    nu.sort_by(f64::total_cmp);
    Ok((nu.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect(), condition))
}

/// Slack below 1 accepted for the smallest symplectic eigenvalue.
///
/// A covariance stored in `f64` fixes `ν` only to about `ε·cond(V)`, so the
/// fixed tolerance widens for strongly squeezed states, which would otherwise
/// be rejected on rounding alone.
pub fn uncertainty_slack(condition: f64) -> f64 {
    UNCERTAINTY_TOLERANCE.max(64.0 * f64::EPSILON * condition)
}

/// Mean vector and covariance matrix of an `n`-mode Gaussian state.
///
/// Construction validates symmetry and the uncertainty relation, so every
/// value of this type is a physical state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        check_symmetric(&cov)?;
        if mean.len() != cov.nrows() {
            return Err(Error::Dimension(format!(
                "mean has length {} but covariance is {}x{}",
                mean.len(),
                cov.nrows(),
                cov.ncols()
            )));
        }
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Unphysical("non-finite moment".to_string()));
        }
        let (nu, condition) = spectrum_and_condition(&cov)?;
        if let Some(&min) = nu.first() {
            if min < 1.0 - uncertainty_slack(condition) {
                return Err(Error::Unphysical(format!(
                    "smallest symplectic eigenvalue {min} violates the uncertainty bound"
                )));
            }
        }
        let cov = (&cov + cov.transpose()) * 0.5;
        Ok(Self { mean, cov })
    }

    pub fn vacuum(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(invalid("mode count must be at least 1"));
        }
        Ok(Self {
            mean: DVector::zeros(2 * n_modes),
            cov: DMatrix::identity(2 * n_modes, 2 * n_modes),
        })
    }

    /// Single-mode thermal state with mean occupation `nbar`.
    pub fn thermal(nbar: f64) -> Result<Self> {
        Self::displaced_thermal(nbar, Complex::new(0.0, 0.0))
    }

    pub fn coherent(alpha: Complex<f64>) -> Result<Self> {
        Self::displaced_thermal(0.0, alpha)
    }

    pub fn displaced_thermal(nbar: f64, alpha: Complex<f64>) -> Result<Self> {
        if !(nbar >= 0.0) || !nbar.is_finite() {
            return Err(invalid(format!("thermal occupation must be finite and >= 0, got {nbar}")));
        }
        if !alpha.re.is_finite() || !alpha.im.is_finite() {
            return Err(invalid("displacement must be finite"));
        }
        Ok(Self {
            mean: DVector::from_vec(vec![2.0 * alpha.re, 2.0 * alpha.im]),
            cov: DMatrix::identity(2, 2) * (2.0 * nbar + 1.0),
        })
    }

    /// Two-mode squeezed vacuum with squeezing parameter `r`.
    pub fn tmsv(r: f64) -> Result<Self> {
        check_squeezing(r)?;
        let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
        let mut cov = DMatrix::identity(4, 4) * c;
        cov[(0, 2)] = s;
        cov[(2, 0)] = s;
        cov[(1, 3)] = -s;
        cov[(3, 1)] = -s;
        Ok(Self {
            mean: DVector::zeros(4),
            cov,
        })
    }

    /// Product state of `self` followed by `other`.
    pub fn tensor(&self, other: &GaussianState) -> GaussianState {
        let (n, m) = (self.mean.len(), other.mean.len());
        let mut mean = DVector::zeros(n + m);
        mean.rows_mut(0, n).copy_from(&self.mean);
        mean.rows_mut(n, m).copy_from(&other.mean);
        let mut cov = DMatrix::zeros(n + m, n + m);
        cov.view_mut((0, 0), (n, n)).copy_from(&self.cov);
        cov.view_mut((n, n), (m, m)).copy_from(&other.cov);
        GaussianState { mean, cov }
    }

    /// Reduced state on the listed modes, in the listed order.
    pub fn reduce(&self, modes: &[usize]) -> Result<GaussianState> {
        let idx = self.quadrature_indices(modes)?;
        let mean = DVector::from_iterator(idx.len(), idx.iter().map(|&i| self.mean[i]));
        let cov = DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.cov[(idx[r], idx[c])]);
        Ok(GaussianState { mean, cov })
    }

    pub fn n_modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn mode_cov(&self, mode: usize) -> Result<Matrix2<f64>> {
        self.check_mode(mode)?;
        Ok(self.cov.fixed_view::<2, 2>(2 * mode, 2 * mode).into_owned())
    }

    pub fn mode_mean(&self, mode: usize) -> Result<Vector2<f64>> {
        self.check_mode(mode)?;
        Ok(self.mean.fixed_rows::<2>(2 * mode).into_owned())
    }

    /// `(tr V_k / 2 - 1) / 2 + |d_k|^2 / 4`
    pub fn mean_photon_number(&self, mode: usize) -> Result<f64> {
        let v = self.mode_cov(mode)?;
        let d = self.mode_mean(mode)?;
        Ok((0.5 * v.trace() - 1.0) / 2.0 + d.norm_squared() / 4.0)
    }

    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        // validated at construction
        symplectic_spectrum(&self.cov).expect("state covariance is positive definite")
    }

    pub fn purity(&self) -> f64 {
        1.0 / self.cov.determinant().sqrt()
    }

    /// Apply `op` to the listed modes.
    ///
    /// `mean -> S mean`, `cov -> S cov S^T` on the selected quadratures;
    /// untouched modes keep their moments and their correlations are
    /// transformed on the selected side only.
    pub fn apply(&self, op: &SymplecticOp, modes: &[usize]) -> Result<GaussianState> {
        if modes.len() != op.n_modes() {
            return Err(Error::Dimension(format!(
                "{} acts on {} modes, {} given",
                op.label,
                op.n_modes(),
                modes.len()
            )));
        }
        let idx = self.quadrature_indices(modes)?;
        let dim = self.mean.len();
        let mut full = DMatrix::identity(dim, dim);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                full[(i, j)] = op.matrix[(a, b)];
            }
        }
        let mean = &full * &self.mean;
        let cov = &full * &self.cov * full.transpose();
        GaussianState::new(mean, cov)
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes() {
            return Err(invalid(format!(
                "mode {mode} out of range for a {}-mode state",
                self.n_modes()
            )));
        }
        Ok(())
    }

    fn quadrature_indices(&self, modes: &[usize]) -> Result<Vec<usize>> {
        for (i, &m) in modes.iter().enumerate() {
            self.check_mode(m)?;
            if modes[..i].contains(&m) {
                return Err(invalid(format!("mode {m} listed twice")));
            }
        }
        Ok(modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect())
    }
}

fn check_squeezing(r: f64) -> Result<()> {
    if !(0.0..=MAX_SQUEEZING).contains(&r) {
        return Err(invalid(format!(
            "squeezing parameter must lie in [0, {MAX_SQUEEZING}], got {r}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum OpLabel {
    BeamSplitter,
    TwoModeSqueezer,
    Squeezer,
    Rotation,
    Custom(String),
}

impl fmt::Display for OpLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpLabel::BeamSplitter => f.write_str("beam-splitter"),
            OpLabel::TwoModeSqueezer => f.write_str("two-mode squeezer"),
            OpLabel::Squeezer => f.write_str("squeezer"),
            OpLabel::Rotation => f.write_str("rotation"),
            OpLabel::Custom(s) => f.write_str(s),
        }
    }
}

/// Linear symplectic map on `k` designated modes.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticOp {
    matrix: DMatrix<f64>,
    label: OpLabel,
}

impl SymplecticOp {
    /// Checks `S Ω S^T = Ω` to `1e-10` relative to `|S|^2`.
    pub fn new(matrix: DMatrix<f64>, label: OpLabel) -> Result<Self> {
        if !matrix.is_square() || !matrix.nrows().is_multiple_of(2) || matrix.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "symplectic matrix must be even square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let omega = symplectic_form(matrix.nrows() / 2);
        let defect = (&matrix * &omega * matrix.transpose() - &omega).amax();
        let scale = matrix.amax().powi(2).max(1.0);
        if defect > 1e-10 * scale {
            return Err(Error::Unphysical(format!(
                "{label} matrix is not symplectic (defect {defect:e})"
            )));
        }
        Ok(Self { matrix, label })
    }

    pub fn identity(n_modes: usize) -> Self {
        Self {
            matrix: DMatrix::identity(2 * n_modes, 2 * n_modes),
            label: OpLabel::Custom("identity".into()),
        }
    }

    /// Beam splitter of transmissivity `eta`.
    ///
    /// `[[√η I, √(1-η) I], [-√(1-η) I, √η I]]`. At `eta = 0` the modes are
    /// swapped and the second output picks up a sign flip on both
    /// quadratures.
    pub fn beam_splitter(eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(invalid(format!("transmissivity must lie in [0, 1], got {eta}")));
        }
        let (t, r) = (eta.sqrt(), (1.0 - eta).sqrt());
        let mut m = DMatrix::zeros(4, 4);
        for q in 0..2 {
            m[(q, q)] = t;
            m[(q + 2, q + 2)] = t;
            m[(q, q + 2)] = r;
            m[(q + 2, q)] = -r;
        }
        Ok(Self {
            matrix: m,
            label: OpLabel::BeamSplitter,
        })
    }

    /// Two-mode squeezer; maps two vacua onto [`GaussianState::tmsv`].
    pub fn two_mode_squeezer(r: f64) -> Result<Self> {
        check_squeezing(r)?;
        let (c, s) = (r.cosh(), r.sinh());
        let mut m = DMatrix::identity(4, 4) * c;
        m[(0, 2)] = s;
        m[(2, 0)] = s;
        m[(1, 3)] = -s;
        m[(3, 1)] = -s;
        Ok(Self {
            matrix: m,
            label: OpLabel::TwoModeSqueezer,
        })
    }

    /// Single-mode squeezer, `diag(e^{-r}, e^{r})`.
    pub fn squeezer(r: f64) -> Result<Self> {
        if !(-MAX_SQUEEZING..=MAX_SQUEEZING).contains(&r) {
            return Err(invalid(format!("squeezing parameter out of range: {r}")));
        }
        Ok(Self {
            matrix: DMatrix::from_diagonal(&DVector::from_vec(vec![(-r).exp(), r.exp()])),
            label: OpLabel::Squeezer,
        })
    }

    pub fn rotation(theta: f64) -> Self {
        let (c, s) = (theta.cos(), theta.sin());
        Self {
            matrix: DMatrix::from_row_slice(2, 2, &[c, s, -s, c]),
            label: OpLabel::Rotation,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn label(&self) -> &OpLabel {
        &self.label
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    /// `self` applied after `first`.
    pub fn compose(&self, first: &SymplecticOp) -> Result<SymplecticOp> {
        if self.matrix.nrows() != first.matrix.nrows() {
            return Err(Error::Dimension("composed operations differ in size".into()));
        }
        Ok(Self {
            matrix: &self.matrix * &first.matrix,
            label: OpLabel::Custom(format!("{} * {}", self.label, first.label)),
        })
    }
}

/// Covariance of a two-mode state with the second mode partially transposed
/// (sign flip of `p2`).
pub fn partial_transpose(cov: &DMatrix<f64>) -> DMatrix<f64> {
    let mut pt = cov.clone();
    for i in 0..4 {
        if i != 3 {
            pt[(i, 3)] = -pt[(i, 3)];
            pt[(3, i)] = -pt[(3, i)];
        }
    }
    pt
}

/// Logarithmic negativity across the 1|1 cut of a two-mode state, in ebits.
pub fn log_negativity(state: &GaussianState) -> Result<f64> {
    if state.n_modes() != 2 {
        return Err(Error::Dimension(format!(
            "log-negativity needs a two-mode state, got {} modes",
            state.n_modes()
        )));
    }
    let nu = symplectic_spectrum(&partial_transpose(state.cov()))?;
    let smallest = nu[0];
    Ok(if smallest >= 1.0 { 0.0 } else { -smallest.log2() })
}

/// Uhlmann fidelity between two single-mode Gaussian states given by raw
/// moments.
///
/// With `Δ = det(Va + Vb) / 4` and `δ = (det Va - 1)(det Vb - 1) / 4`,
///
/// `F = exp(-½ dᵀ (Va + Vb)⁻¹ d) / (√(Δ + δ) - √δ)`, `d = mean_a - mean_b`.
///
/// For two pure states `δ = 0` and this is the overlap `|<a|b>|^2`.
pub fn single_mode_fidelity(
    cov_a: &Matrix2<f64>,
    mean_a: &Vector2<f64>,
    cov_b: &Matrix2<f64>,
    mean_b: &Vector2<f64>,
) -> Result<f64> {
    let sum = cov_a + cov_b;
    let inv = sum
        .try_inverse()
        .ok_or_else(|| Error::Unphysical("singular covariance sum".into()))?;
    let big_delta = sum.determinant() / 4.0;
    let small_delta = ((cov_a.determinant() - 1.0) * (cov_b.determinant() - 1.0) / 4.0).max(0.0);
    let d = mean_a - mean_b;
    let gauss = (-0.5 * (d.transpose() * inv * d)[(0, 0)]).exp();
    let f = gauss / ((big_delta + small_delta).sqrt() - small_delta.sqrt());
    Ok(f.clamp(0.0, 1.0))
}

/// [`single_mode_fidelity`] for two single-mode states.
pub fn fidelity(a: &GaussianState, b: &GaussianState) -> Result<f64> {
    if a.n_modes() != 1 || b.n_modes() != 1 {
        return Err(Error::Dimension("fidelity is defined here for single-mode states".into()));
    }
    single_mode_fidelity(&a.mode_cov(0)?, &a.mode_mean(0)?, &b.mode_cov(0)?, &b.mode_mean(0)?)
}
