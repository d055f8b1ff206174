//! Coarse stability diagram of the center-excited crystal, printed as a
//! character map and written as SVG.

use ion_crystal::stability::{render_svg, scan_diagram, ScanSettings};
use ion_crystal::{SpinPattern, StructureKind};

fn main() -> ion_crystal::Result<()> {
    let n = 40;
    let d = scan_diagram(&ScanSettings::new(SpinPattern::center_excited(3)).with_resolution(n, n))?;
    for k in StructureKind::ALL {
        println!("{:7} {}", k.label(), d.count(k));
    }
    for j in (0..n).rev().step_by(2) {
        let row: String = (0..n)
            .map(|i| match d.cell(i, j).mask {
                0 => '.',
                m if m.count_ones() > 1 => '#',
                1 => 'L',
                2 => 'x',
                4 => 'y',
                _ => '?',
            })
            .collect();
        println!("{:6.3} {row}", d.delta_alphas[j]);
    }
    let path = std::env::temp_dir().join("stability_center.svg");
    std::fs::write(&path, render_svg(&d))?;
    println!("wrote {}", path.display());
    Ok(())
}
