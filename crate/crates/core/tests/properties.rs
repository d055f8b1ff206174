use proptest::prelude::*;

use ion_crystal::crystal::{gradient, hessian, potential_energy, IonConfiguration};
use ion_crystal::gaussian::{echo_models, loschmidt_echo, time_grid};
use ion_crystal::ramsey::{ramsey_p1, ramsey_p2, reconstruct};
use ion_crystal::{SpinPattern, TrapParams};

fn configuration(n: usize) -> impl Strategy<Value = IonConfiguration> {
    prop::collection::vec((-1.5f64..1.5, -1.0f64..1.0), n).prop_filter_map("ions too close", |p| {
        let c = IonConfiguration::new(p.into_iter().map(|(x, y)| [x, y]).collect());
        let ok = (0..c.len()).all(|i| (i + 1..c.len()).all(|j| c.distance_between(i, j) > 0.2));
        ok.then_some(c)
    })
}

trait Pair {
    fn distance_between(&self, i: usize, j: usize) -> f64;
}

impl Pair for IonConfiguration {
    fn distance_between(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.positions[i], self.positions[j]);
        (a[0] - b[0]).hypot(a[1] - b[1])
    }
}

fn spins_from(bits: u8, n: usize) -> SpinPattern {
    SpinPattern::new((0..n).map(|k| bits >> k & 1 == 1).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gradient_matches_finite_differences(
        c in configuration(4),
        alpha in 1.0f64..2.5,
        dalpha in -0.4f64..1.0,
        bits in 0u8..16,
    ) {
        let trap = TrapParams::new(4, alpha, dalpha).unwrap();
        let spins = spins_from(bits, 4);
        let g = gradient(&c, &trap, &spins).unwrap();
        let x = c.to_flat();
        let h = 1e-6;
        for k in 0..x.len() {
            let mut a = x.clone();
            let mut b = x.clone();
            a[k] += h;
            b[k] -= h;
            let fd = (potential_energy(&IonConfiguration::from_flat(&a), &trap, &spins).unwrap()
                - potential_energy(&IonConfiguration::from_flat(&b), &trap, &spins).unwrap())
                / (2.0 * h);
            prop_assert!((fd - g[k]).abs() < 1e-6 * (1.0 + g[k].abs()), "component {k}: {fd} vs {}", g[k]);
        }
    }

    #[test]
    fn hessian_matches_finite_differences(
        c in configuration(3),
        alpha in 1.0f64..2.5,
        dalpha in -0.4f64..1.0,
        bits in 0u8..8,
    ) {
        let trap = TrapParams::new(3, alpha, dalpha).unwrap();
        let spins = spins_from(bits, 3);
        let hm = hessian(&c, &trap, &spins).unwrap();
        prop_assert!((&hm - hm.transpose()).amax() < 1e-12);
        let x = c.to_flat();
        let h = 1e-6;
        for k in 0..x.len() {
            let mut a = x.clone();
            let mut b = x.clone();
            a[k] += h;
            b[k] -= h;
            let fd = (gradient(&IonConfiguration::from_flat(&a), &trap, &spins).unwrap()
                - gradient(&IonConfiguration::from_flat(&b), &trap, &spins).unwrap())
                / (2.0 * h);
            for r in 0..x.len() {
                prop_assert!((fd[r] - hm[(r, k)]).abs() < 1e-5 * (1.0 + hm[(r, k)].abs()));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn echo_is_bounded_and_starts_at_one(alpha in 1.56f64..2.2, dalpha in 0.0f64..0.3, sigma in 0.002f64..0.01) {
        let trap = TrapParams::three(alpha, dalpha).unwrap();
        let (g, e) = echo_models(&trap, &SpinPattern::center_excited(3), sigma).unwrap();
        let s = loschmidt_echo(&g, &e, &time_grid(50.0, 101)).unwrap();
        prop_assert!((s.values[0] - 1.0).norm() < 1e-10);
        prop_assert!(s.moduli().iter().all(|a| *a <= 1.0 + 1e-10));
        let back = reconstruct(&ramsey_p1(&s), &ramsey_p2(&s)).unwrap();
        prop_assert!(back.iter().zip(&s.values).all(|(a, b)| (a - b).norm() < 1e-12));
    }
}
