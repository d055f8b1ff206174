//! Normal modes of a crystal about an equilibrium.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::crystal::{
    gradient, hessian, EquilibriumResult, IonConfiguration, SpinPattern, TrapParams, GRADIENT_TOLERANCE,
    STABILITY_FLOOR,
};
use crate::error::{Error, Result};

/// Relative eigenvalue gap below which modes are treated as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-8;

/// Eigen-decomposition of the Hessian at an equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalModes {
    /// Hessian eigenvalues `ω_k²`, ascending. Negative entries mark
    /// unstable directions.
    pub eigenvalues: Vec<f64>,
    /// `sign(λ_k) sqrt(|λ_k|)` in units of `ν_x`, ascending.
    pub frequencies: Vec<f64>,
    /// Orthonormal mode vectors; column `k` belongs to `frequencies[k]`.
    #[serde(skip)]
    pub vectors: DMatrix<f64>,
    pub stable: bool,
}

impl NormalModes {
    /// Diagonalizes a symmetric matrix.
    ///
    /// Vectors inside a degenerate cluster are replaced by a canonical
    /// basis of the cluster's subspace, and every vector is signed so that
    /// its largest component is positive, making the output independent of
    /// the eigensolver's internal choices.
    pub fn from_hessian(h: &DMatrix<f64>) -> Self {
        let n = h.nrows();
        let eig = SymmetricEigen::new(h.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        let scale = eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && (eigenvalues[end] - eigenvalues[end - 1]).abs() < DEGENERACY_GAP * scale {
                end += 1;
            }
            if end - start > 1 {
                canonical_cluster(&mut vectors, start, end);
            }
            start = end;
        }
        for k in 0..n {
            fix_sign(&mut vectors, k);
        }
        let frequencies = eigenvalues.iter().map(|&l| l.signum() * l.abs().sqrt()).collect();
        let stable = eigenvalues.first().is_some_and(|&l| l > STABILITY_FLOOR);
        Self { eigenvalues, frequencies, vectors, stable }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Lowest frequency.
    pub fn lowest(&self) -> f64 {
        self.frequencies[0]
    }

    /// Zero-point energy `½ Σ ω_k` in units of `ħ ν_x`.
    pub fn zero_point(&self) -> f64 {
        0.5 * self.frequencies.iter().sum::<f64>()
    }

    /// Fraction of mode `k`'s weight carried by `y` components.
    pub fn transverse_weight(&self, k: usize) -> f64 {
        self.vectors.column(k).iter().skip(1).step_by(2).map(|v| v * v).sum()
    }
}

fn canonical_cluster(vectors: &mut DMatrix<f64>, start: usize, end: usize) {
    let n = vectors.nrows();
    let q = vectors.columns(start, end - start).into_owned();
    let projector = &q * q.transpose();
    let mut chosen: Vec<DVector<f64>> = Vec::new();
    while chosen.len() < end - start {
        let mut best: Option<(f64, DVector<f64>)> = None;
        for j in 0..n {
            let mut v = projector.column(j).into_owned();
            for c in &chosen {
                let d = c.dot(&v);
                v -= c * d;
            }
            let norm = v.norm();
            if best.as_ref().is_none_or(|(b, _)| norm > b + 1e-12) {
                best = Some((norm, v));
            }
        }
        let (norm, v) = best.expect("non-empty cluster");
        chosen.push(v / norm);
    }
    let dominant = |v: &DVector<f64>| v.iamax();
    chosen.sort_by_key(dominant);
    for (k, v) in chosen.into_iter().enumerate() {
        vectors.set_column(start + k, &v);
    }
}

fn fix_sign(vectors: &mut DMatrix<f64>, k: usize) {
    let col = vectors.column(k);
    let max = col.amax();
    let lead = col.iter().position(|v| v.abs() > max - 1e-12).unwrap_or(0);
    if col[lead] < 0.0 {
        vectors.column_mut(k).neg_mut();
    }
}

/// Normal modes about a refined equilibrium.
///
/// Fails with [`Error::NotEquilibrium`] when the configuration's gradient
/// norm is not below `1e-10`.
pub fn normal_modes(equilibrium: &EquilibriumResult, trap: &TrapParams, spins: &SpinPattern) -> Result<NormalModes> {
    modes_at(&equilibrium.config, trap, spins)
}

/// Normal modes about an arbitrary stationary configuration.
pub fn modes_at(config: &IonConfiguration, trap: &TrapParams, spins: &SpinPattern) -> Result<NormalModes> {
    let g = gradient(config, trap, spins)?.norm();
    if !(g < GRADIENT_TOLERANCE) {
        return Err(Error::NotEquilibrium(g));
    }
    Ok(NormalModes::from_hessian(&hessian(config, trap, spins)?))
}

/// Squared mode frequencies of the three-ion linear chain with the middle
/// ion excited, ascending.
///
/// The axial values are `1, 3, 29/5`; the transverse ones are `α² - 1` and
/// the two roots `α² + αδα - (12 - 5δα² ∓ ρ)/10` with
/// `ρ = sqrt(128 + [5δα(2α + δα) - 4]²)`. The lower root is evaluated as
/// `det / λ₊` to avoid cancellation near the instability.
pub fn linear_center_excited_squared(alpha: f64, delta_alpha: f64) -> [f64; 6] {
    let a2 = alpha * alpha;
    let b = alpha + delta_alpha;
    let b2 = b * b;
    let k = 5.0 * delta_alpha * (2.0 * alpha + delta_alpha) - 4.0;
    let rho = (128.0 + k * k).sqrt();
    let half_trace = a2 + alpha * delta_alpha - (12.0 - 5.0 * delta_alpha * delta_alpha) / 10.0;
    let upper = half_trace + rho / 10.0;
    let det = (a2 - 0.8) * (b2 - 1.6) - 32.0 / 25.0;
    let lower = if upper > 0.0 { det / upper } else { half_trace - rho / 10.0 };
    let mut out = [1.0, 3.0, 29.0 / 5.0, a2 - 1.0, lower, upper];
    out.sort_by(f64::total_cmp);
    out
}

/// Signed square roots of [`linear_center_excited_squared`]; a negative
/// entry `-w` stands for the squared frequency `-w²`.
pub fn linear_center_excited_frequencies(alpha: f64, delta_alpha: f64) -> [f64; 6] {
    linear_center_excited_squared(alpha, delta_alpha).map(|l| l.signum() * l.abs().sqrt())
}

/// Squared mode frequencies of the homogeneous three-ion linear chain,
/// ascending.
pub fn linear_homogeneous_squared(alpha: f64) -> [f64; 6] {
    linear_center_excited_squared(alpha, 0.0)
}
