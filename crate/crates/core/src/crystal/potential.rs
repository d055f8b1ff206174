use nalgebra::{DMatrix, DVector};

use super::{IonConfiguration, SpinPattern, TrapParams, COINCIDENCE_THRESHOLD};
use crate::error::{Error, Result};

fn check_lengths(config: &IonConfiguration, trap: &TrapParams, spins: &SpinPattern) -> Result<()> {
    if config.len() != trap.n_ions || spins.len() != trap.n_ions {
        return Err(Error::Invalid(format!(
            "size mismatch: {} positions, {} spins, n_ions = {}",
            config.len(),
            spins.len(),
            trap.n_ions
        )));
    }
    Ok(())
}

pub(crate) fn check_separation(r: &[f64]) -> Result<()> {
    let n = r.len() / 2;
    for i in 0..n {
        for j in i + 1..n {
            let d = (r[2 * i] - r[2 * j]).hypot(r[2 * i + 1] - r[2 * j + 1]);
            if !(d >= COINCIDENCE_THRESHOLD) {
                return Err(Error::CoincidentIons(i, j));
            }
        }
    }
    Ok(())
}

/// `strengths[j]` is the squared transverse frequency of ion `j`.
pub(crate) fn energy_flat(r: &[f64], strengths: &[f64]) -> Result<f64> {
    check_separation(r)?;
    let n = strengths.len();
    let mut e = 0.0;
    for i in 0..n {
        let (x, y) = (r[2 * i], r[2 * i + 1]);
        e += 0.5 * (x * x + strengths[i] * y * y);
        for j in i + 1..n {
            e += 1.0 / (x - r[2 * j]).hypot(y - r[2 * j + 1]);
        }
    }
    Ok(e)
}

pub(crate) fn gradient_flat(r: &[f64], strengths: &[f64]) -> Result<DVector<f64>> {
    check_separation(r)?;
    let n = strengths.len();
    let mut g = DVector::zeros(2 * n);
    for i in 0..n {
        g[2 * i] += r[2 * i];
        g[2 * i + 1] += strengths[i] * r[2 * i + 1];
        for j in i + 1..n {
            let dx = r[2 * i] - r[2 * j];
            let dy = r[2 * i + 1] - r[2 * j + 1];
            let d2 = dx * dx + dy * dy;
            let inv3 = 1.0 / (d2 * d2.sqrt());
            g[2 * i] -= dx * inv3;
            g[2 * i + 1] -= dy * inv3;
            g[2 * j] += dx * inv3;
            g[2 * j + 1] += dy * inv3;
        }
    }
    Ok(g)
}

pub(crate) fn hessian_flat(r: &[f64], strengths: &[f64]) -> Result<DMatrix<f64>> {
    check_separation(r)?;
    let n = strengths.len();
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        h[(2 * i, 2 * i)] += 1.0;
        h[(2 * i + 1, 2 * i + 1)] += strengths[i];
    }
    for i in 0..n {
        for j in i + 1..n {
            let d = [r[2 * i] - r[2 * j], r[2 * i + 1] - r[2 * j + 1]];
            let d2 = d[0] * d[0] + d[1] * d[1];
            let inv5 = 1.0 / (d2 * d2 * d2.sqrt());
            for a in 0..2 {
                for b in 0..2 {
                    let delta = if a == b { d2 } else { 0.0 };
                    let block = (3.0 * (d[a] * d[b]) - delta) * inv5;
                    h[(2 * i + a, 2 * i + b)] += block;
                    h[(2 * j + a, 2 * j + b)] += block;
                    h[(2 * i + a, 2 * j + b)] -= block;
                    h[(2 * j + a, 2 * i + b)] -= block;
                }
            }
        }
    }
    Ok(h)
}

/// Dimensionless potential: pairwise Coulomb repulsion plus the
/// spin-dependent harmonic confinement of every ion.
pub fn potential_energy(config: &IonConfiguration, trap: &TrapParams, spins: &SpinPattern) -> Result<f64> {
    check_lengths(config, trap, spins)?;
    energy_flat(&config.to_flat(), &trap.transverse_strengths(spins))
}

pub fn gradient(config: &IonConfiguration, trap: &TrapParams, spins: &SpinPattern) -> Result<DVector<f64>> {
    check_lengths(config, trap, spins)?;
    gradient_flat(&config.to_flat(), &trap.transverse_strengths(spins))
}

/// Symmetric `2N x 2N` Hessian in the interleaved coordinate order.
pub fn hessian(config: &IonConfiguration, trap: &TrapParams, spins: &SpinPattern) -> Result<DMatrix<f64>> {
    check_lengths(config, trap, spins)?;
    hessian_flat(&config.to_flat(), &trap.transverse_strengths(spins))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn ground(n: usize, alpha: f64) -> (TrapParams, SpinPattern) {
        (TrapParams::new(n, alpha, 0.0).unwrap(), SpinPattern::all_ground(n))
    }

    #[test]
    fn two_ion_energy() {
        let (trap, spins) = ground(2, 3.3);
        for d in [0.5, 1.0, 1.7, 4.0] {
            let c = IonConfiguration::new(vec![[-d / 2.0, 0.0], [d / 2.0, 0.0]]);
            let e = potential_energy(&c, &trap, &spins).unwrap();
            assert_relative_eq!(e, d * d / 4.0 + 1.0 / d, max_relative = 1e-15);
        }
    }

    #[test]
    fn coincident_ions_rejected() {
        let (trap, spins) = ground(3, 2.0);
        let c = IonConfiguration::new(vec![[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]);
        assert!(matches!(potential_energy(&c, &trap, &spins), Err(Error::CoincidentIons(0, 1))));
        assert!(gradient(&c, &trap, &spins).is_err());
        assert!(hessian(&c, &trap, &spins).is_err());
    }

    #[test]
    fn size_mismatch_rejected() {
        let (trap, spins) = ground(3, 2.0);
        let c = IonConfiguration::new(vec![[0.0, 0.0], [1.0, 0.0]]);
        assert!(matches!(potential_energy(&c, &trap, &spins), Err(Error::Invalid(_))));
    }

    #[test]
    fn hessian_exactly_symmetric() {
        let trap = TrapParams::three(1.4, 0.3).unwrap();
        let spins = SpinPattern::outer_excited(3);
        let c = IonConfiguration::new(vec![[-1.1, 0.2], [0.1, -0.3], [0.9, 0.15]]);
        let h = hessian(&c, &trap, &spins).unwrap();
        assert_eq!(h, h.transpose());
    }

    #[test]
    fn translation_changes_only_trap_gradient() {
        let trap = TrapParams::three(1.5, 0.0).unwrap();
        let spins = SpinPattern::all_ground(3);
        let c = IonConfiguration::new(vec![[-1.0, 0.1], [0.2, -0.2], [1.3, 0.05]]);
        let shift = 0.37;
        let moved = IonConfiguration::new(c.positions.iter().map(|p| [p[0] + shift, p[1]]).collect());
        let g0 = gradient(&c, &trap, &spins).unwrap();
        let g1 = gradient(&moved, &trap, &spins).unwrap();
        for i in 0..3 {
            assert_relative_eq!(g1[2 * i] - g0[2 * i], shift, epsilon = 1e-13);
            assert_relative_eq!(g1[2 * i + 1], g0[2 * i + 1], epsilon = 1e-13);
        }
    }

    fn random_config(seed: &[f64]) -> IonConfiguration {
        IonConfiguration::new(seed.chunks_exact(2).enumerate().map(|(i, c)| [c[0] + 1.3 * i as f64, c[1]]).collect())
    }

    fn spins_from_mask(n: usize, mask: u8) -> SpinPattern {
        SpinPattern::new((0..n).map(|i| mask & (1 << i) != 0).collect())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn gradient_matches_central_differences(
            seed in proptest::collection::vec(-0.5f64..0.5, 6),
            alpha in 1.0f64..2.0,
            dalpha in -0.5f64..1.0,
            mask in 0u8..8,
        ) {
            let trap = TrapParams::three(alpha, dalpha).unwrap();
            let spins = spins_from_mask(3, mask);
            let c = random_config(&seed);
            let g = gradient(&c, &trap, &spins).unwrap();
            let r = c.to_flat();
            let h = 1e-6;
            for k in 0..6 {
                let mut p = r.clone();
                let mut m = r.clone();
                p[k] += h;
                m[k] -= h;
                let fd = (potential_energy(&IonConfiguration::from_flat(&p), &trap, &spins).unwrap()
                    - potential_energy(&IonConfiguration::from_flat(&m), &trap, &spins).unwrap())
                    / (2.0 * h);
                let scale = g.amax().max(1.0);
                prop_assert!((fd - g[k]).abs() / scale < 1e-6, "component {k}: fd {fd} analytic {}", g[k]);
            }
        }

        #[test]
        fn hessian_matches_gradient_differences(
            seed in proptest::collection::vec(-0.5f64..0.5, 6),
            alpha in 1.0f64..2.0,
            dalpha in -0.5f64..1.0,
            mask in 0u8..8,
        ) {
            let trap = TrapParams::three(alpha, dalpha).unwrap();
            let spins = spins_from_mask(3, mask);
            let c = random_config(&seed);
            let hm = hessian(&c, &trap, &spins).unwrap();
            let r = c.to_flat();
            let h = 1e-6;
            let scale = hm.amax().max(1.0);
            for k in 0..6 {
                let mut p = r.clone();
                let mut m = r.clone();
                p[k] += h;
                m[k] -= h;
                let gp = gradient(&IonConfiguration::from_flat(&p), &trap, &spins).unwrap();
                let gm = gradient(&IonConfiguration::from_flat(&m), &trap, &spins).unwrap();
                for l in 0..6 {
                    let fd = (gp[l] - gm[l]) / (2.0 * h);
                    prop_assert!((fd - hm[(l, k)]).abs() / scale < 1e-5);
                }
            }
        }

        #[test]
        fn energy_mirror_invariance(
            seed in proptest::collection::vec(-0.5f64..0.5, 6),
            alpha in 1.0f64..2.0,
            dalpha in -0.5f64..1.0,
        ) {
            let trap = TrapParams::three(alpha, dalpha).unwrap();
            let c = random_config(&seed);
            // y -> -y for any spin pattern
            let spins = SpinPattern::outer_excited(3);
            let e = potential_energy(&c, &trap, &spins).unwrap();
            let ey = potential_energy(&c.flipped_y(), &trap, &spins).unwrap();
            prop_assert!((e - ey).abs() < 1e-12 * e.abs());
            // x -> -x for a spin pattern symmetric about the chain center
            let spins = SpinPattern::center_excited(3);
            let mirrored = IonConfiguration::new(c.positions.iter().map(|p| [-p[0], p[1]]).collect());
            let e = potential_energy(&c, &trap, &spins).unwrap();
            let ex = potential_energy(&mirrored, &trap, &spins).unwrap();
            prop_assert!((e - ex).abs() < 1e-12 * e.abs());
        }

        #[test]
        fn spin_pattern_irrelevant_without_shift(
            seed in proptest::collection::vec(-0.5f64..0.5, 6),
            alpha in 1.0f64..2.0,
            mask in 0u8..8,
        ) {
            let trap = TrapParams::three(alpha, 0.0).unwrap();
            let c = random_config(&seed);
            let e0 = potential_energy(&c, &trap, &SpinPattern::all_ground(3)).unwrap();
            let e1 = potential_energy(&c, &trap, &spins_from_mask(3, mask)).unwrap();
            prop_assert_eq!(e0, e1);
        }

        #[test]
        fn exchange_of_identical_ions(
            seed in proptest::collection::vec(-0.5f64..0.5, 6),
            alpha in 1.0f64..2.0,
            dalpha in -0.5f64..1.0,
        ) {
            let trap = TrapParams::three(alpha, dalpha).unwrap();
            let spins = SpinPattern::center_excited(3);
            let c = random_config(&seed);
            let swapped = IonConfiguration::new(vec![c.positions[2], c.positions[1], c.positions[0]]);
            let e = potential_energy(&c, &trap, &spins).unwrap();
            let es = potential_energy(&swapped, &trap, &spins).unwrap();
            prop_assert!((e - es).abs() < 1e-12 * e.abs());
        }
    }
}
