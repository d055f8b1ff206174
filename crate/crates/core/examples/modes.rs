//! Normal-mode frequencies of the all-ground crystal across the zigzag
//! transition.

use ion_crystal::crystal::lowest_stable_equilibrium;
use ion_crystal::modes::normal_modes;
use ion_crystal::{SpinPattern, TrapParams};

fn main() -> ion_crystal::Result<()> {
    let spins = SpinPattern::all_ground(3);
    for k in 1..=10 {
        let alpha = 1.0 + 0.1 * k as f64;
        let trap = TrapParams::three(alpha, 0.0)?;
        let eq = lowest_stable_equilibrium(&trap, &spins)?;
        let m = normal_modes(&eq, &trap, &spins)?;
        let w: Vec<String> = m.frequencies.iter().map(|w| format!("{w:7.4}")).collect();
        println!("{alpha:.1} {:5} {}", eq.kind.label(), w.join(" "));
    }
    Ok(())
}
