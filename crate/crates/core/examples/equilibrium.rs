//! Equilibria of the three-ion crystal for each structure family.

use ion_crystal::crystal::{analytic_equilibrium, find_equilibrium, lowest_stable_equilibrium};
use ion_crystal::{SpinPattern, StructureKind, TrapParams};

fn main() -> ion_crystal::Result<()> {
    let spins = SpinPattern::all_ground(3);
    for alpha in [1.2, 1.5, 2.0] {
        let trap = TrapParams::three(alpha, 0.0)?;
        let eq = lowest_stable_equilibrium(&trap, &spins)?;
        println!("alpha = {alpha}: {} with energy {:.10}", eq.kind, eq.energy);
    }

    let trap = TrapParams::three(1.3, 0.3)?;
    let spins = SpinPattern::center_excited(3);
    for kind in [StructureKind::LinX, StructureKind::ZigzagX, StructureKind::ZigzagY] {
        let guess = analytic_equilibrium(kind, &trap, &spins)?;
        let eq = find_equilibrium(&trap, &spins, &guess)?;
        println!(
            "{kind:6} energy {:.10} gradient {:.1e} min eigenvalue {:+.5} stable {}",
            eq.energy, eq.gradient_norm, eq.min_eigenvalue, eq.stable
        );
    }
    Ok(())
}
