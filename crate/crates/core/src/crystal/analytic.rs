//! Closed-form three-ion equilibria.
//!
//! Ions are listed in ascending `x` for the chain-like structures, and the
//! `ȳ > 0` branch is always returned for the zigzags.

use super::{
    gradient_flat, IonConfiguration, SpinPattern, StructureKind, TrapParams, GRADIENT_TOLERANCE,
};
use crate::error::{Error, Result};

/// `∛(5/4)`: distance of the outer ions from the trap center in the
/// three-ion linear chain.
pub const LINEAR_OUTER_X: f64 = 1.077_217_345_015_942;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Pattern {
    Ground,
    Center,
    Outer,
    Mixed,
}

fn pattern(trap: &TrapParams, spins: &SpinPattern) -> Pattern {
    if trap.delta_alpha == 0.0 || spins.is_all_ground() {
        return Pattern::Ground;
    }
    match spins.single_excited() {
        Some(1) => Pattern::Center,
        Some(0) | Some(2) => Pattern::Outer,
        _ => Pattern::Mixed,
    }
}

/// `(x̄, ȳ)` of the x-oriented zigzag with the middle ion displaced by
/// `-2Rȳ`. `r = 1` gives the homogeneous zigzag.
pub fn zigzag_x_closed_form(alpha: f64, r: f64) -> Result<(f64, f64)> {
    let s = 1.0 + 2.0 * r;
    let base = 1.0 - alpha * alpha / s;
    if !(base > 0.0) {
        return Err(Error::Domain(format!(
            "x-zigzag requires alpha^2 < 1 + 2R (alpha = {alpha}, R = {r})"
        )));
    }
    let xbar = (4.0 * base).powf(-1.0 / 3.0);
    let radicand = (s / (alpha * alpha)).powf(2.0 / 3.0) - xbar * xbar;
    if !(radicand > 0.0) {
        return Err(Error::Domain(format!(
            "x-zigzag transverse radicand is {radicand:.3e} (alpha = {alpha}, R = {r})"
        )));
    }
    Ok((xbar, radicand.sqrt() / s))
}

/// `(x̄, ȳ)` of the y-oriented zigzag: ions at `(-x̄, ±ȳ)` and `(2x̄, 0)`,
/// with `9x̄² + ȳ² = 3^(2/3)`.
pub fn zigzag_y_closed_form(alpha: f64) -> Result<(f64, f64)> {
    let base = alpha * alpha - 1.0 / 3.0;
    if !(base > 0.0) {
        return Err(Error::Domain(format!("y-zigzag requires alpha^2 > 1/3, got alpha = {alpha}")));
    }
    let ybar = (4.0 * base).powf(-1.0 / 3.0);
    let radicand = 3f64.powf(2.0 / 3.0) - ybar * ybar;
    if !(radicand > 0.0) {
        return Err(Error::Domain(format!("y-zigzag radicand is {radicand:.3e} (alpha = {alpha})")));
    }
    Ok((radicand.sqrt() / 3.0, ybar))
}

/// Closed-form equilibrium of a three-ion crystal.
///
/// Available forms: the linear chain for every spin pattern (`LinX`, or
/// `LinXStar` when an outer ion is excited), and the x- and y-oriented
/// zigzags for the homogeneous and center-excited patterns. The result is
/// checked to have a gradient norm below `1e-10`.
pub fn analytic_equilibrium(
    kind: StructureKind,
    trap: &TrapParams,
    spins: &SpinPattern,
) -> Result<IonConfiguration> {
    if trap.n_ions != 3 || spins.len() != 3 {
        return Err(Error::Unsupported(format!(
            "closed forms exist for three ions only (n_ions = {})",
            trap.n_ions
        )));
    }
    let pat = pattern(trap, spins);
    let unsupported = || Error::Unsupported(format!("{kind} with spin pattern {spins}"));
    let positions = match kind {
        StructureKind::LinX => linear(),
        StructureKind::LinXStar if pat == Pattern::Outer => linear(),
        StructureKind::ZigzagX => {
            let r = match pat {
                Pattern::Ground => 1.0,
                Pattern::Center => trap.ratio_r(),
                _ => return Err(unsupported()),
            };
            let (xb, yb) = zigzag_x_closed_form(trap.alpha, r)?;
            vec![[-xb, yb], [0.0, -2.0 * r * yb], [xb, yb]]
        }
        StructureKind::ZigzagY => {
            if !matches!(pat, Pattern::Ground | Pattern::Center) {
                return Err(unsupported());
            }
            let (xb, yb) = zigzag_y_closed_form(trap.alpha)?;
            vec![[-xb, yb], [2.0 * xb, 0.0], [-xb, -yb]]
        }
        _ => return Err(unsupported()),
    };
    let config = IonConfiguration::new(positions);
    let g = gradient_flat(&config.to_flat(), &trap.transverse_strengths(spins))?;
    if g.norm() >= GRADIENT_TOLERANCE {
        return Err(Error::Domain(format!(
            "closed form for {kind} has residual gradient {:.3e}",
            g.norm()
        )));
    }
    Ok(config)
}

fn linear() -> Vec<[f64; 2]> {
    vec![[-LINEAR_OUTER_X, 0.0], [0.0, 0.0], [LINEAR_OUTER_X, 0.0]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crystal::potential_energy;
    use approx::assert_relative_eq;

    #[test]
    fn cube_root_constant() {
        assert_relative_eq!(LINEAR_OUTER_X, 1.25f64.cbrt(), max_relative = 2e-16);
        assert_relative_eq!(LINEAR_OUTER_X.powi(3), 1.25, max_relative = 1e-15);
    }

    #[test]
    fn linear_chain_positions() {
        let trap = TrapParams::three(2.0, 0.0).unwrap();
        let c = analytic_equilibrium(StructureKind::LinX, &trap, &SpinPattern::all_ground(3)).unwrap();
        let x = LINEAR_OUTER_X;
        assert_eq!(c.positions, vec![[-x, 0.0], [0.0, 0.0], [x, 0.0]]);
        // Energy at the minimum: 2 * (c^2 / 2) + 2 / c + 1 / (2c).
        let e = potential_energy(&c, &trap, &SpinPattern::all_ground(3)).unwrap();
        assert_relative_eq!(e, x * x + 2.5 / x, max_relative = 1e-15);
    }

    #[test]
    fn homogeneous_zigzag_values() {
        let alpha: f64 = 1.2;
        let trap = TrapParams::three(alpha, 0.0).unwrap();
        let c = analytic_equilibrium(StructureKind::ZigzagX, &trap, &SpinPattern::all_ground(3)).unwrap();
        let xbar = (4.0 * (1.0 - alpha * alpha / 3.0)).powf(-1.0 / 3.0);
        let ybar = ((3.0 / (alpha * alpha)).powf(2.0 / 3.0) - xbar * xbar).sqrt() / 3.0;
        assert_relative_eq!(c.positions[2][0], xbar, max_relative = 1e-15);
        assert_relative_eq!(c.positions[0][1], ybar, max_relative = 1e-15);
        assert_relative_eq!(c.positions[1][1], -2.0 * ybar, max_relative = 1e-15);
        assert!(ybar > 0.0);
    }

    #[test]
    fn center_excited_zigzag_reduces_without_shift() {
        let trap = TrapParams::three(1.3, 0.0).unwrap();
        let a = analytic_equilibrium(StructureKind::ZigzagX, &trap, &SpinPattern::all_ground(3)).unwrap();
        let b = analytic_equilibrium(StructureKind::ZigzagX, &trap, &SpinPattern::center_excited(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn center_excited_zigzag_uses_ratio() {
        let trap = TrapParams::three(1.49, 0.02).unwrap();
        let c = analytic_equilibrium(StructureKind::ZigzagX, &trap, &SpinPattern::center_excited(3)).unwrap();
        let r = 1.49f64.powi(2) / 1.51f64.powi(2);
        let (xb, yb) = zigzag_x_closed_form(1.49, r).unwrap();
        assert_relative_eq!(c.positions[1][1], -2.0 * r * yb, max_relative = 1e-15);
        assert_relative_eq!(c.positions[0][0], -xb, max_relative = 1e-15);
    }

    #[test]
    fn y_zigzag_geometry() {
        let alpha: f64 = 1.1;
        let trap = TrapParams::three(alpha, 0.8).unwrap();
        let c = analytic_equilibrium(StructureKind::ZigzagY, &trap, &SpinPattern::center_excited(3)).unwrap();
        let (xb, yb) = zigzag_y_closed_form(alpha).unwrap();
        assert_relative_eq!(yb, (4.0 * (alpha * alpha - 1.0 / 3.0)).powf(-1.0 / 3.0), max_relative = 1e-15);
        let d = (9.0 * xb * xb + yb * yb).sqrt();
        assert_relative_eq!(d, 3f64.cbrt(), max_relative = 1e-14);
        assert_eq!(c.positions[1], [2.0 * xb, 0.0]);
    }

    #[test]
    fn zigzag_domain_errors() {
        let trap = TrapParams::three(1.8, 0.0).unwrap();
        assert!(matches!(
            analytic_equilibrium(StructureKind::ZigzagX, &trap, &SpinPattern::all_ground(3)),
            Err(Error::Domain(_))
        ));
        assert!(zigzag_x_closed_form(1.5, 1.0).is_ok());
        assert!(zigzag_x_closed_form(1.7320509, 1.0).is_err());
    }

    #[test]
    fn unsupported_combinations() {
        let trap = TrapParams::three(1.3, 0.2).unwrap();
        let outer = SpinPattern::outer_excited(3);
        assert!(matches!(
            analytic_equilibrium(StructureKind::ZigzagX, &trap, &outer),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            analytic_equilibrium(StructureKind::TriaStar, &trap, &outer),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            analytic_equilibrium(StructureKind::LinXStar, &trap, &SpinPattern::center_excited(3)),
            Err(Error::Unsupported(_))
        ));
        assert!(analytic_equilibrium(StructureKind::LinXStar, &trap, &outer).is_ok());
        let four = TrapParams::new(4, 2.0, 0.0).unwrap();
        assert!(matches!(
            analytic_equilibrium(StructureKind::LinX, &four, &SpinPattern::all_ground(4)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn zigzag_branches_degenerate() {
        let trap = TrapParams::three(1.4, 0.05).unwrap();
        let spins = SpinPattern::center_excited(3);
        for kind in [StructureKind::ZigzagX, StructureKind::ZigzagY] {
            let c = analytic_equilibrium(kind, &trap, &spins).unwrap();
            let e1 = potential_energy(&c, &trap, &spins).unwrap();
            let e2 = potential_energy(&c.flipped_y(), &trap, &spins).unwrap();
            assert_relative_eq!(e1, e2, max_relative = 1e-15);
        }
    }
}
