//! Fourier spectrum of |I(t)| near the critical aspect ratio.

use ion_crystal::gaussian::{echo_models, loschmidt_echo, time_grid};
use ion_crystal::ramsey::{spectrum, Window};
use ion_crystal::units::{IonSpecies, PhysicalTrap};
use ion_crystal::SpinPattern;

fn main() -> ion_crystal::Result<()> {
    let phys = PhysicalTrap::from_khz(IonSpecies::beryllium9(), 500.0, 773.5, 10.0)?;
    let trap = phys.to_dimensionless(3)?;
    let (g, e) = echo_models(&trap, &SpinPattern::center_excited(3), phys.fluctuation_scale())?;
    let series = loschmidt_echo(&g, &e, &time_grid(200.0, 4096))?;
    println!("excited-crystal modes: {:?}", e.modes.frequencies);
    for window in [Window::None, Window::Hann] {
        let s = spectrum(&series, window)?;
        if let Some(w) = s.dominant_peak() {
            println!("{window}: peak at omega = {w:.4} +- {:.4} ({:.2} kHz)", s.bin_width(), phys.frequency_to_khz(w));
        }
    }
    Ok(())
}
