use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{
    check_separation, classify_with_spins, energy_flat, gradient_flat, hessian_flat, EquilibriumResult,
    IonConfiguration, SpinPattern, StructureKind, TrapParams, CLASSIFY_TOLERANCE, GRADIENT_TOLERANCE,
    STABILITY_FLOOR,
};
use crate::error::{Error, Result};

/// Settings of the Newton refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Gradient norm the iteration aims for.
    pub target_gradient: f64,
    /// Gradient norm below which the result is accepted.
    pub accept_gradient: f64,
    /// Largest step length taken in one iteration.
    pub max_step: f64,
    pub classify_tolerance: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            target_gradient: 1e-12,
            accept_gradient: GRADIENT_TOLERANCE,
            max_step: 0.5,
            classify_tolerance: CLASSIFY_TOLERANCE,
        }
    }
}

// Floor on |λ| when the Hessian is indefinite and the Newton step is
// replaced by a descent direction.
const EIGEN_FLOOR: f64 = 1e-3;

fn search_direction(h: &DMatrix<f64>, g: &DVector<f64>) -> DVector<f64> {
    if let Some(chol) = h.clone().cholesky() {
        return -chol.solve(g);
    }
    let eig = SymmetricEigen::new(h.clone());
    let v = &eig.eigenvectors;
    let mut coeff = v.transpose() * g;
    for (c, &l) in coeff.iter_mut().zip(eig.eigenvalues.iter()) {
        *c /= l.abs().max(EIGEN_FLOOR);
    }
    -(v * coeff)
}

/// Smallest eigenvalue of a symmetric matrix.
pub(crate) fn min_eigenvalue(h: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(h.clone()).eigenvalues.min()
}

/// Refines `guess` to a stationary point with default options.
pub fn find_equilibrium(trap: &TrapParams, spins: &SpinPattern, guess: &IonConfiguration) -> Result<EquilibriumResult> {
    find_equilibrium_with(trap, spins, guess, &SolverOptions::default())
}

/// Newton iteration with backtracking.
///
/// Positive-definite Hessians give plain Newton steps; otherwise the step
/// uses the Hessian eigenbasis with `|λ|` in place of `λ`, which is a
/// descent direction. A step is accepted when it lowers the energy
/// (Armijo condition) or the gradient norm. Saddle points reached from
/// symmetric guesses are returned with `stable = false`.
pub fn find_equilibrium_with(
    trap: &TrapParams,
    spins: &SpinPattern,
    guess: &IonConfiguration,
    opts: &SolverOptions,
) -> Result<EquilibriumResult> {
    let strengths = trap.transverse_strengths(spins);
    if guess.len() != trap.n_ions || spins.len() != trap.n_ions {
        return Err(Error::Invalid(format!(
            "guess has {} ions, spin pattern {}, trap {}",
            guess.len(),
            spins.len(),
            trap.n_ions
        )));
    }
    let mut x = guess.to_flat();
    check_separation(&x)?;
    let mut e = energy_flat(&x, &strengths)?;
    let mut g = gradient_flat(&x, &strengths)?;
    let mut iterations = 0;
    while iterations < opts.max_iterations && g.norm() >= opts.target_gradient {
        iterations += 1;
        let h = hessian_flat(&x, &strengths)?;
        let mut step = search_direction(&h, &g);
        let len = step.norm();
        if len > opts.max_step {
            step *= opts.max_step / len;
        }
        let slope = g.dot(&step);
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-12 {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a + t * s).collect();
            if check_separation(&trial).is_ok() {
                let et = energy_flat(&trial, &strengths)?;
                let gt = gradient_flat(&trial, &strengths)?;
                if et <= e + 1e-4 * t * slope || gt.norm() < g.norm() {
                    x = trial;
                    e = et;
                    g = gt;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let gradient_norm = g.norm();
    if !(gradient_norm < opts.accept_gradient) {
        return Err(Error::NonConvergence { iterations, gradient_norm });
    }
    let config = IonConfiguration::from_flat(&x);
    let min_eig = min_eigenvalue(&hessian_flat(&x, &strengths)?);
    Ok(EquilibriumResult {
        kind: classify_with_spins(&config, spins, opts.classify_tolerance),
        config,
        energy: e,
        gradient_norm,
        min_eigenvalue: min_eig,
        stable: min_eig > STABILITY_FLOOR,
    })
}

/// Lowest-energy stable equilibrium reached from the closed forms available
/// for `spins` and from a chain with alternating transverse offsets.
pub fn lowest_stable_equilibrium(trap: &TrapParams, spins: &SpinPattern) -> Result<EquilibriumResult> {
    let mut guesses = Vec::new();
    for kind in [StructureKind::LinX, StructureKind::ZigzagX, StructureKind::ZigzagY] {
        if let Ok(c) = super::analytic_equilibrium(kind, trap, spins) {
            guesses.push(c);
        }
    }
    let n = trap.n_ions;
    let mid = (n as f64 - 1.0) / 2.0;
    guesses.push(IonConfiguration::new(
        (0..n).map(|j| [j as f64 - mid, if j % 2 == 0 { 0.1 } else { -0.1 }]).collect(),
    ));
    guesses
        .iter()
        .filter_map(|g| find_equilibrium(trap, spins, g).ok())
        .filter(|r| r.stable)
        .min_by(|a, b| a.energy.total_cmp(&b.energy))
        .ok_or_else(|| {
            Error::Unstable(format!(
                "no stable crystal with spins {spins} at alpha = {}, delta_alpha = {}",
                trap.alpha, trap.delta_alpha
            ))
        })
}

/// Builds an [`EquilibriumResult`] for a configuration that is already
/// stationary, without refining it.
pub fn evaluate_equilibrium(
    config: &IonConfiguration,
    trap: &TrapParams,
    spins: &SpinPattern,
) -> Result<EquilibriumResult> {
    let strengths = trap.transverse_strengths(spins);
    let x = config.to_flat();
    if config.len() != strengths.len() {
        return Err(Error::Invalid("configuration and spin pattern differ in length".into()));
    }
    let gradient_norm = gradient_flat(&x, &strengths)?.norm();
    if !(gradient_norm < GRADIENT_TOLERANCE) {
        return Err(Error::NotEquilibrium(gradient_norm));
    }
    let min_eig = min_eigenvalue(&hessian_flat(&x, &strengths)?);
    Ok(EquilibriumResult {
        config: config.clone(),
        energy: energy_flat(&x, &strengths)?,
        gradient_norm,
        min_eigenvalue: min_eig,
        stable: min_eig > STABILITY_FLOOR,
        kind: classify_with_spins(config, spins, CLASSIFY_TOLERANCE),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crystal::{analytic_equilibrium, zigzag_x_closed_form, StructureKind, LINEAR_OUTER_X};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn perturbed_linear_chain_returns() {
        let trap = TrapParams::three(2.0, 0.0).unwrap();
        let spins = SpinPattern::all_ground(3);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let exact = analytic_equilibrium(StructureKind::LinX, &trap, &spins).unwrap();
        let noisy = IonConfiguration::new(
            exact
                .positions
                .iter()
                .map(|p| [p[0] + rng.random_range(-1e-3..1e-3), p[1] + rng.random_range(-1e-3..1e-3)])
                .collect(),
        );
        let r = find_equilibrium(&trap, &spins, &noisy).unwrap();
        assert!(r.config.distance(&exact) < 1e-9);
        assert!(r.gradient_norm < 1e-10);
        assert!(r.stable);
        assert_eq!(r.kind, StructureKind::LinX);
    }

    #[test]
    fn center_excited_zigzag_matches_closed_form() {
        let trap = TrapParams::three(1.49, 0.02).unwrap();
        let spins = SpinPattern::center_excited(3);
        let guess = IonConfiguration::new(vec![[-1.0, 0.2], [0.0, -0.4], [1.0, 0.2]]);
        let r = find_equilibrium(&trap, &spins, &guess).unwrap();
        let rr = trap.ratio_r();
        let (xb, yb) = zigzag_x_closed_form(1.49, rr).unwrap();
        let expect = IonConfiguration::new(vec![[-xb, yb], [0.0, -2.0 * rr * yb], [xb, yb]]);
        assert!(r.config.distance(&expect) < 1e-9);
        assert_eq!(r.kind, StructureKind::ZigzagX);
        assert!(r.stable);
    }

    #[test]
    fn linear_guess_below_critical_is_saddle() {
        let trap = TrapParams::three(1.3, 0.0).unwrap();
        let spins = SpinPattern::all_ground(3);
        let guess = IonConfiguration::new(vec![[-1.2, 0.0], [0.1, 0.0], [1.0, 0.0]]);
        let r = find_equilibrium(&trap, &spins, &guess).unwrap();
        assert!(!r.stable);
        assert_eq!(r.kind, StructureKind::LinX);
        assert!((r.config.positions[2][0] - LINEAR_OUTER_X).abs() < 1e-10);
    }

    #[test]
    fn far_guess_converges_to_zigzag() {
        let trap = TrapParams::three(1.2, 0.0).unwrap();
        let spins = SpinPattern::all_ground(3);
        let guess = IonConfiguration::new(vec![[-2.0, 0.5], [0.3, -1.0], [1.5, 0.7]]);
        let r = find_equilibrium(&trap, &spins, &guess).unwrap();
        assert!(r.stable);
        assert!(matches!(r.kind, StructureKind::ZigzagX | StructureKind::ZigzagY));
    }

    #[test]
    fn coincident_guess_is_domain_error() {
        let trap = TrapParams::three(2.0, 0.0).unwrap();
        let guess = IonConfiguration::new(vec![[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]);
        assert!(matches!(
            find_equilibrium(&trap, &SpinPattern::all_ground(3), &guess),
            Err(Error::CoincidentIons(0, 1))
        ));
    }

    #[test]
    fn evaluate_rejects_non_equilibrium() {
        let trap = TrapParams::three(2.0, 0.0).unwrap();
        let c = IonConfiguration::new(vec![[-1.0, 0.0], [0.0, 0.0], [1.0, 0.0]]);
        assert!(matches!(
            evaluate_equilibrium(&c, &trap, &SpinPattern::all_ground(3)),
            Err(Error::NotEquilibrium(_))
        ));
    }

    #[test]
    fn general_n_chain() {
        let trap = TrapParams::new(5, 3.0, 0.0).unwrap();
        let spins = SpinPattern::all_ground(5);
        let guess = IonConfiguration::new((0..5).map(|i| [i as f64 - 2.0, 0.0]).collect());
        let r = find_equilibrium(&trap, &spins, &guess).unwrap();
        assert!(r.stable);
        assert_eq!(r.kind, StructureKind::LinX);
        assert!((r.config.positions[0][0] + r.config.positions[4][0]).abs() < 1e-10);
    }
}
