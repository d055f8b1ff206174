//! Ramsey probabilities and revivals for a linear crystal.

use ion_crystal::gaussian::{echo_models, loschmidt_echo, time_grid};
use ion_crystal::ramsey::{ramsey_p1, ramsey_p2, reconstruct, revival_times, REVIVAL_THRESHOLD};
use ion_crystal::units::{IonSpecies, PhysicalTrap};
use ion_crystal::SpinPattern;

fn main() -> ion_crystal::Result<()> {
    let phys = PhysicalTrap::from_khz(IonSpecies::beryllium9(), 500.0, 775.0, 10.0)?;
    let trap = phys.to_dimensionless(3)?;
    let (g, e) = echo_models(&trap, &SpinPattern::center_excited(3), phys.fluctuation_scale())?;
    let series = loschmidt_echo(&g, &e, &time_grid(200.0, 2001))?;
    let (p1, p2) = (ramsey_p1(&series), ramsey_p2(&series));
    for k in (0..series.len()).step_by(200) {
        println!("t = {:6.1}  P1 = {:.5}  P2 = {:.5}", series.times[k], p1[k], p2[k]);
    }
    let back = reconstruct(&p1, &p2)?;
    let err = back.iter().zip(&series.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    println!("reconstruction error {err:.1e}");
    let r = revival_times(&series, REVIVAL_THRESHOLD)?;
    println!("{} revivals, first at {:?}", r.len(), r.first());
    Ok(())
}
