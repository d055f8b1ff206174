//! Simulated-annealing search for the asymmetric TRIA* structure.

use ion_crystal::crystal::{metropolis_search, Constraint, MetropolisSchedule, SearchOutcome};
use ion_crystal::{SpinPattern, TrapParams};

fn main() -> ion_crystal::Result<()> {
    let trap = TrapParams::three(1.3125, 0.525)?;
    let spins = SpinPattern::outer_excited(3);
    let schedule = MetropolisSchedule::default();
    for constraint in [Constraint::None, Constraint::MinAsymmetry(0.01)] {
        match metropolis_search(&trap, &spins, 7, &schedule, constraint)? {
            SearchOutcome::Found { result, accepted_moves, restart } => {
                println!("{constraint:?}: {} (restart {restart}, {accepted_moves} accepted moves)", result.kind);
                for p in &result.config.positions {
                    println!("  ({:+.8}, {:+.8})", p[0], p[1]);
                }
            }
            SearchOutcome::Exhausted { candidates, .. } => {
                println!("{constraint:?}: none of {candidates} candidates admissible")
            }
        }
    }
    Ok(())
}
