use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{
    energy_flat, find_equilibrium, mirror_x_asymmetry, EquilibriumResult, IonConfiguration, SpinPattern,
    TrapParams, COINCIDENCE_THRESHOLD,
};
use crate::error::{Error, Result};

/// Annealing schedule of the Metropolis search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetropolisSchedule {
    /// Proposals per restart.
    pub proposals: usize,
    /// Standard deviation of the Gaussian single-ion move.
    pub step: f64,
    pub initial_temperature: f64,
    /// Geometric cooling factor applied after every proposal.
    pub cooling: f64,
    /// Independent random starts; the best refined candidate wins.
    pub restarts: usize,
    /// Initial positions are drawn uniformly from `[-b, b]²`.
    pub box_half_width: f64,
}

impl Default for MetropolisSchedule {
    fn default() -> Self {
        Self { proposals: 5000, step: 0.05, initial_temperature: 0.1, cooling: 0.995, restarts: 4, box_half_width: 1.5 }
    }
}

impl MetropolisSchedule {
    pub fn validate(&self) -> Result<()> {
        let ok = self.proposals > 0
            && self.restarts > 0
            && self.step > 0.0
            && self.initial_temperature > 0.0
            && self.cooling > 0.0
            && self.cooling <= 1.0
            && self.box_half_width > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!("invalid Metropolis schedule {self:?}")))
        }
    }
}

/// Constraint imposed on refined candidates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constraint {
    None,
    /// Requires `mirror_x_asymmetry` of at least the given value, ruling
    /// out configurations symmetric about the `y` axis.
    MinAsymmetry(f64),
}

impl Constraint {
    pub fn accepts(&self, config: &IonConfiguration) -> bool {
        match *self {
            Constraint::None => true,
            Constraint::MinAsymmetry(min) => mirror_x_asymmetry(config) >= min,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchOutcome {
    Found {
        result: EquilibriumResult,
        /// Accepted moves summed over all restarts.
        accepted_moves: usize,
        /// Restart that produced the result.
        restart: usize,
    },
    /// No refined candidate was stable and satisfied the constraint.
    Exhausted { accepted_moves: usize, candidates: usize },
}

impl SearchOutcome {
    pub fn result(&self) -> Option<&EquilibriumResult> {
        match self {
            SearchOutcome::Found { result, .. } => Some(result),
            SearchOutcome::Exhausted { .. } => None,
        }
    }
}

fn random_start(rng: &mut ChaCha8Rng, n: usize, b: f64) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..2 * n).map(|_| rng.random_range(-b..b)).collect();
        if super::check_separation(&x).is_ok() {
            return x;
        }
    }
}

// Energy of ion `i` at `p` with the trap and all other ions.
fn ion_energy(x: &[f64], strengths: &[f64], i: usize, p: [f64; 2]) -> Option<f64> {
    let mut e = 0.5 * (p[0] * p[0] + strengths[i] * p[1] * p[1]);
    for j in 0..strengths.len() {
        if j != i {
            let d = (p[0] - x[2 * j]).hypot(p[1] - x[2 * j + 1]);
            if d < COINCIDENCE_THRESHOLD {
                return None;
            }
            e += 1.0 / d;
        }
    }
    Some(e)
}

fn anneal(
    rng: &mut ChaCha8Rng,
    strengths: &[f64],
    schedule: &MetropolisSchedule,
) -> Result<(Vec<f64>, usize)> {
    let n = strengths.len();
    let normal = Normal::new(0.0, schedule.step).expect("positive step");
    let mut x = random_start(rng, n, schedule.box_half_width);
    let mut e = energy_flat(&x, strengths)?;
    let mut best = (x.clone(), e);
    let mut temperature = schedule.initial_temperature;
    let mut accepted = 0;
    for _ in 0..schedule.proposals {
        let i = rng.random_range(0..n);
        let old = [x[2 * i], x[2 * i + 1]];
        let new = [old[0] + normal.sample(rng), old[1] + normal.sample(rng)];
        let u: f64 = rng.random();
        temperature *= schedule.cooling;
        let Some(e_new) = ion_energy(&x, strengths, i, new) else {
            continue;
        };
        let e_old = ion_energy(&x, strengths, i, old).expect("current state is valid");
        let de = e_new - e_old;
        if de <= 0.0 || u < (-de / temperature).exp() {
            x[2 * i] = new[0];
            x[2 * i + 1] = new[1];
            e += de;
            accepted += 1;
            if e < best.1 {
                best = (x.clone(), e);
            }
        }
    }
    Ok((best.0, accepted))
}

/// Simulated annealing from random initial positions followed by Newton
/// refinement of each restart's lowest-energy configuration.
///
/// Among refined candidates that are stable and satisfy `constraint`, the
/// one with the lowest energy is returned. The generator is seeded with
/// `seed`, so repeated calls give identical results.
pub fn metropolis_search(
    trap: &TrapParams,
    spins: &SpinPattern,
    seed: u64,
    schedule: &MetropolisSchedule,
    constraint: Constraint,
) -> Result<SearchOutcome> {
    schedule.validate()?;
    if spins.len() != trap.n_ions {
        return Err(Error::Invalid("spin pattern length differs from ion number".into()));
    }
    let strengths = trap.transverse_strengths(spins);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut accepted_moves = 0;
    let mut best: Option<(EquilibriumResult, usize)> = None;
    let mut candidates = 0;
    for restart in 0..schedule.restarts {
        let (x, accepted) = anneal(&mut rng, &strengths, schedule)?;
        accepted_moves += accepted;
        let refined = match find_equilibrium(trap, spins, &IonConfiguration::from_flat(&x)) {
            Ok(r) => r,
            Err(Error::NonConvergence { .. }) => continue,
            Err(e) => return Err(e),
        };
        candidates += 1;
        if !refined.stable || !constraint.accepts(&refined.config) {
            continue;
        }
        if best.as_ref().is_none_or(|(b, _)| refined.energy < b.energy) {
            best = Some((refined, restart));
        }
    }
    Ok(match best {
        Some((result, restart)) => SearchOutcome::Found { result, accepted_moves, restart },
        None => SearchOutcome::Exhausted { accepted_moves, candidates },
    })
}
