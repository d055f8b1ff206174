use super::{IonConfiguration, SpinPattern, StructureKind};

fn mirror_asymmetry(config: &IonConfiguration, mirror: impl Fn([f64; 2]) -> [f64; 2]) -> f64 {
    config
        .positions
        .iter()
        .map(|&p| {
            let m = mirror(p);
            config
                .positions
                .iter()
                .map(|q| ((m[0] - q[0]).powi(2) + (m[1] - q[1]).powi(2)).sqrt())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Largest distance between a mirrored ion (`x -> -x`) and its nearest
/// partner in the original configuration. Zero for configurations
/// symmetric about the `y` axis.
pub fn mirror_x_asymmetry(config: &IonConfiguration) -> f64 {
    mirror_asymmetry(config, |p| [-p[0], p[1]])
}

/// Same as [`mirror_x_asymmetry`] for the reflection `y -> -y`.
pub fn mirror_y_asymmetry(config: &IonConfiguration) -> f64 {
    mirror_asymmetry(config, |p| [p[0], -p[1]])
}

fn alternating(config: &IonConfiguration, axis: usize, tol: f64) -> bool {
    let mut pts = config.positions.clone();
    pts.sort_by(|a, b| a[axis].total_cmp(&b[axis]));
    let other = 1 - axis;
    pts.iter().all(|p| p[other].abs() >= tol)
        && pts.windows(2).all(|w| (w[0][other] > 0.0) != (w[1][other] > 0.0))
}

fn inversion_asymmetry(config: &IonConfiguration) -> f64 {
    mirror_asymmetry(config, |p| [-p[0], -p[1]])
}

fn collinear(config: &IonConfiguration, tol: f64) -> bool {
    let p = &config.positions;
    if p.len() < 3 {
        return true;
    }
    let (a, b) = (p[0], p[1]);
    let (ux, uy) = (b[0] - a[0], b[1] - a[1]);
    let len = (ux * ux + uy * uy).sqrt();
    p.iter().all(|c| ((c[0] - a[0]) * uy - (c[1] - a[1]) * ux).abs() / len < tol)
}

/// Geometric structure label.
///
/// `LinX` when every `|y| < tol`; `ZigzagX` for configurations symmetric
/// under `x -> -x` (or under inversion, for even chains) whose transverse
/// displacements alternate in sign along `x`; `ZigzagY` for the analogous
/// `y`-oriented case; `TriaStar` for any other planar three-ion triangle;
/// `Other` otherwise.
pub fn classify(config: &IonConfiguration, tol: f64) -> StructureKind {
    if config.positions.iter().all(|p| p[1].abs() < tol) {
        return StructureKind::LinX;
    }
    let inv = inversion_asymmetry(config) < tol;
    if (inv || mirror_x_asymmetry(config) < tol) && alternating(config, 0, tol) {
        return StructureKind::ZigzagX;
    }
    if (inv || mirror_y_asymmetry(config) < tol) && alternating(config, 1, tol) {
        return StructureKind::ZigzagY;
    }
    if config.len() == 3 && !collinear(config, tol) {
        return StructureKind::TriaStar;
    }
    StructureKind::Other
}

/// Structure label taking the spin pattern into account.
///
/// With a single excited ion at an end of the chain (index `0` or `N-1`)
/// that is not located between the other ions along `x`, a linear chain is
/// labeled `LinXStar` and every planar structure `TriaStar`. If the excited
/// ion has moved to the middle, the structure is a relabeled
/// center-excited crystal and the geometric label is returned unchanged.
pub fn classify_with_spins(config: &IonConfiguration, spins: &SpinPattern, tol: f64) -> StructureKind {
    let kind = classify(config, tol);
    let n = config.len();
    let excited = match spins.single_excited() {
        Some(i) if n == 3 && (i == 0 || i == n - 1) => i,
        _ => return kind,
    };
    let xe = config.positions[excited][0];
    let others: Vec<f64> = config
        .positions
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != excited)
        .map(|(_, p)| p[0])
        .collect();
    let lo = others.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = others.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if xe > lo + tol && xe < hi - tol {
        return kind;
    }
    match kind {
        StructureKind::LinX => StructureKind::LinXStar,
        StructureKind::ZigzagX | StructureKind::ZigzagY | StructureKind::TriaStar => StructureKind::TriaStar,
        k => k,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crystal::{analytic_equilibrium, TrapParams, CLASSIFY_TOLERANCE};

    fn cfg(p: &[[f64; 2]]) -> IonConfiguration {
        IonConfiguration::new(p.to_vec())
    }

    #[test]
    fn analytic_structures() {
        let g = SpinPattern::all_ground(3);
        let lin = analytic_equilibrium(StructureKind::LinX, &TrapParams::three(2.0, 0.0).unwrap(), &g).unwrap();
        assert_eq!(classify(&lin, CLASSIFY_TOLERANCE), StructureKind::LinX);
        let t = TrapParams::three(1.2, 0.0).unwrap();
        let zx = analytic_equilibrium(StructureKind::ZigzagX, &t, &g).unwrap();
        assert_eq!(classify(&zx, CLASSIFY_TOLERANCE), StructureKind::ZigzagX);
        assert_eq!(classify(&zx.flipped_y(), CLASSIFY_TOLERANCE), StructureKind::ZigzagX);
        let zy = analytic_equilibrium(StructureKind::ZigzagY, &t, &g).unwrap();
        assert_eq!(classify(&zy, CLASSIFY_TOLERANCE), StructureKind::ZigzagY);
    }

    #[test]
    fn asymmetric_triangle() {
        let c = cfg(&[[-1.0, 0.3], [0.1, -0.5], [0.9, 0.2]]);
        assert!(mirror_x_asymmetry(&c) > 0.1);
        assert_eq!(classify(&c, CLASSIFY_TOLERANCE), StructureKind::TriaStar);
    }

    #[test]
    fn tilted_line_is_other() {
        let c = cfg(&[[-1.0, -0.1], [0.0, 0.0], [1.0, 0.1]]);
        assert_eq!(classify(&c, CLASSIFY_TOLERANCE), StructureKind::Other);
    }

    #[test]
    fn four_ion_zigzag() {
        let c = cfg(&[[-1.5, 0.2], [-0.5, -0.2], [0.5, 0.2], [1.5, -0.2]]);
        assert_eq!(classify(&c, CLASSIFY_TOLERANCE), StructureKind::ZigzagX);
        let c = cfg(&[[-1.5, 0.2], [-0.5, -0.2], [0.5, -0.2], [1.5, 0.2]]);
        assert_eq!(classify(&c, CLASSIFY_TOLERANCE), StructureKind::Other);
    }

    #[test]
    fn spin_aware_labels() {
        let outer = SpinPattern::outer_excited(3);
        let lin = cfg(&[[-1.0, 0.0], [0.0, 0.0], [1.0, 0.0]]);
        assert_eq!(classify_with_spins(&lin, &outer, 1e-6), StructureKind::LinXStar);
        assert_eq!(classify_with_spins(&lin, &SpinPattern::center_excited(3), 1e-6), StructureKind::LinX);
        let zz = cfg(&[[-1.0, 0.2], [0.0, -0.4], [1.0, 0.2]]);
        assert_eq!(classify_with_spins(&zz, &outer, 1e-6), StructureKind::TriaStar);
        // Excited ion moved between the others: a relabeled center-excited chain.
        let swapped = cfg(&[[0.0, 0.0], [-1.0, 0.0], [1.0, 0.0]]);
        assert_eq!(classify_with_spins(&swapped, &outer, 1e-6), StructureKind::LinX);
    }
}
