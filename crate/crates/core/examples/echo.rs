//! Loschmidt echo after exciting the center ion of a beryllium crystal.

use ion_crystal::gaussian::{echo_models, loschmidt_echo, time_grid};
use ion_crystal::units::{IonSpecies, PhysicalTrap};
use ion_crystal::SpinPattern;

fn main() -> ion_crystal::Result<()> {
    for nu_y in [745.0, 773.5, 775.0] {
        let phys = PhysicalTrap::from_khz(IonSpecies::beryllium9(), 500.0, nu_y, 10.0)?;
        let trap = phys.to_dimensionless(3)?;
        let (g, e) = echo_models(&trap, &SpinPattern::center_excited(3), phys.fluctuation_scale())?;
        let series = loschmidt_echo(&g, &e, &time_grid(200.0, 21))?;
        println!("nu_y = {nu_y} kHz (alpha = {:.4})", trap.alpha);
        for (t, z) in series.times.iter().zip(&series.values) {
            println!("  t = {:6.1}  |I| = {:.6}  arg I = {:+.4}", t, z.norm(), z.arg());
        }
    }
    Ok(())
}
