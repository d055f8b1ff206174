//! Physical scales of the built-in species at ν_x = 500 kHz.

use ion_crystal::units::{IonSpecies, PhysicalTrap};

fn main() -> ion_crystal::Result<()> {
    println!("{:6} {:>12} {:>14} {:>10}", "ion", "l (µm)", "E (J)", "σ");
    for species in IonSpecies::table() {
        let trap = PhysicalTrap::from_khz(species, 500.0, 773.5, 10.0)?;
        println!(
            "{:6} {:>12.4} {:>14.4e} {:>10.6}",
            trap.species.name,
            trap.length_scale() * 1e6,
            trap.energy_scale(),
            trap.fluctuation_scale()
        );
    }
    let trap = PhysicalTrap::from_khz(IonSpecies::beryllium9(), 500.0, 773.5, 10.0)?;
    println!("alpha = {}, delta_alpha = {}", trap.alpha(), trap.delta_alpha());
    println!("t = 200 / nu_x is {:.3} µs", trap.to_physical_time(200.0) * 1e6);
    Ok(())
}
