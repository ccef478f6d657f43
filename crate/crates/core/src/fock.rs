//! Truncated Fock-basis density matrices of Gaussian states.
//!
//! Matrix elements follow from a multidimensional Hermite recurrence on the
//! complex-form covariance `Q = σ + I/2` (in units where the vacuum has
//! `σ = I/2`):
//!
//! ```text
//! A = X (I - Q⁻¹)*,   γ = β* - A β,   β = (α, α*)
//! G[k + e_i] = (γ_i G[k] + Σ_j A_ij √k_j G[k - e_j]) / √(k_i + 1)
//! ρ[m, n] = exp(-½ βᵀ Q⁻¹ β*)* / √det Q · G[m, n]
//! ```
//!
//! where `k = (m, n)` stacks ket and bra photon numbers.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::gaussian::GaussianState;

type C64 = Complex<f64>;

/// Largest accepted Hilbert-space dimension of the truncated state.
pub const MAX_DIMENSION: usize = 4096;

/// Per-mode cutoff for which a thermal tail with occupation `nbar` carries
/// less than `tail` of the probability.
pub fn thermal_cutoff(nbar: f64, tail: f64) -> usize {
    if nbar <= 0.0 {
        return 1;
    }
    let ratio = nbar / (nbar + 1.0);
    (tail.ln() / ratio.ln()).ceil().max(1.0) as usize
}

/// Density matrix of `state` in the Fock basis with `cutoffs[k]` levels on
/// mode `k`. The row index is the ket multi-index in row-major order (last
/// mode fastest). The result is not renormalized.
pub fn density_matrix(state: &GaussianState, cutoffs: &[usize]) -> Result<DMatrix<C64>> {
    let n = state.n_modes();
    if cutoffs.len() != n {
        return Err(Error::Dimension(format!("{} cutoffs given for {n} modes", cutoffs.len())));
    }
    if cutoffs.contains(&0) {
        return Err(invalid("Fock cutoffs must be positive"));
    }
    let dim: usize = cutoffs.iter().product();
    if dim > MAX_DIMENSION {
        return Err(invalid(format!("truncated dimension {dim} exceeds {MAX_DIMENSION}")));
    }

    // interleaved (x1, p1, x2, p2, ...) -> complex amplitudes
    let cov = state.cov();
    let mean = state.mean();
    let x = |i: usize, j: usize| cov[(2 * i, 2 * j)];
    let p = |i: usize, j: usize| cov[(2 * i + 1, 2 * j + 1)];
    let xp = |i: usize, j: usize| cov[(2 * i, 2 * j + 1)];
    let mut q = DMatrix::<C64>::identity(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { 2.0 } else { 0.0 };
            let adag_a = C64::new(x(i, j) + p(i, j) - delta, xp(i, j) - xp(j, i)) / 4.0;
            let a_a = C64::new(x(i, j) - p(i, j), xp(i, j) + xp(j, i)) / 4.0;
            q[(i, j)] += adag_a;
            q[(i, j + n)] += a_a.conj();
            q[(i + n, j)] += a_a;
            q[(i + n, j + n)] += adag_a.conj();
        }
    }
    let q_inv = q
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Unphysical("singular Q matrix".into()))?;
    let mut swap = DMatrix::<C64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        swap[(i, i + n)] = C64::new(1.0, 0.0);
        swap[(i + n, i)] = C64::new(1.0, 0.0);
    }
    let a = &swap * (DMatrix::<C64>::identity(2 * n, 2 * n) - &q_inv).conjugate();
    let alpha: Vec<C64> = (0..n).map(|i| C64::new(mean[2 * i], mean[2 * i + 1]) / 2.0).collect();
    let beta = DVector::<C64>::from_iterator(2 * n, alpha.iter().copied().chain(alpha.iter().map(|z| z.conj())));
    let exponent = (beta.transpose() * &q_inv * beta.conjugate())[(0, 0)];
    let pref = (exponent * -0.5).exp().conj() / q.determinant().sqrt();
    let gamma = beta.conjugate() - &a * &beta;

    // row-major strides over the 2n indices (ket modes, then bra modes)
    let dims: Vec<usize> = cutoffs.iter().chain(cutoffs).copied().collect();
    let mut strides = vec![1usize; 2 * n];
    for k in (0..2 * n - 1).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let total = dim * dim;
    let mut g = vec![C64::new(0.0, 0.0); total];
    g[0] = C64::new(1.0, 0.0);
    let mut idx = vec![0usize; 2 * n];
    for flat in 1..total {
        // advance the multi-index to match `flat`
        for k in (0..2 * n).rev() {
            idx[k] += 1;
            if idx[k] < dims[k] {
                break;
            }
            idx[k] = 0;
        }
        let i = idx.iter().position(|&v| v > 0).expect("non-zero index");
        let prev = flat - strides[i];
        let km_i = idx[i] - 1;
        let mut val = gamma[i] * g[prev];
        for j in 0..2 * n {
            let kj = if j == i { km_i } else { idx[j] };
            if kj > 0 {
                val += a[(i, j)] * (kj as f64).sqrt() * g[prev - strides[j]];
            }
        }
        g[flat] = val / (idx[i] as f64).sqrt();
    }
    // `g` holds ρ[n, m] in row-major order
    Ok(DMatrix::from_column_slice(dim, dim, &g) * pref)
}

/// Real part of the trace.
pub fn trace(rho: &DMatrix<C64>) -> f64 {
    rho.diagonal().iter().map(|z| z.re).sum()
}
