use rayon::prelude::*;
use serde::Serialize;

use super::{
    delta_alpha_critical, outer_excited_linear_boundary_delta_alpha, outer_excited_poles, zzy_boundary_delta_alpha,
};
use crate::crystal::{
    analytic_equilibrium, classify, evaluate_equilibrium, find_equilibrium, metropolis_search, zigzag_y_closed_form, Constraint,
    EquilibriumResult, IonConfiguration, MetropolisSchedule, SpinPattern, StructureKind, TrapParams, CLASSIFY_TOLERANCE,
    LINEAR_OUTER_X,
};
use crate::error::{Error, Result};

/// Parameters of a stability scan over a rectangular `(α, δα)` window.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanSettings {
    pub alpha_range: (f64, f64),
    pub delta_alpha_range: (f64, f64),
    /// Number of cells along `α` and `δα`.
    pub resolution: (usize, usize),
    pub spins: SpinPattern,
    /// Base seed of the per-cell Metropolis searches.
    pub seed: u64,
    pub schedule: MetropolisSchedule,
    pub bisection_steps: usize,
    /// Locate numeric boundaries between neighboring cells.
    pub boundaries: bool,
}

impl ScanSettings {
    /// 200 × 200 cells over `α ∈ [1, 2]`, `δα ∈ [-0.5, 1.5]`.
    pub fn new(spins: SpinPattern) -> Self {
        Self {
            alpha_range: (1.0, 2.0),
            delta_alpha_range: (-0.5, 1.5),
            resolution: (200, 200),
            spins,
            seed: 0,
            schedule: MetropolisSchedule::default(),
            bisection_steps: 30,
            boundaries: true,
        }
    }

    pub fn with_resolution(mut self, n_alpha: usize, n_delta_alpha: usize) -> Self {
        self.resolution = (n_alpha, n_delta_alpha);
        self
    }

    fn validate(&self) -> Result<()> {
        let (a0, a1) = self.alpha_range;
        let (d0, d1) = self.delta_alpha_range;
        if self.resolution.0 == 0 || self.resolution.1 == 0 {
            return Err(Error::Invalid("scan resolution must be positive".into()));
        }
        if !(a0 >= 1.0 && a1 > a0 && d1 > d0) {
            return Err(Error::Invalid(format!("invalid scan window alpha {a0}..{a1}, dalpha {d0}..{d1}")));
        }
        if a0 + d0 <= 0.0 {
            return Err(Error::Invalid("alpha + delta_alpha must stay positive in the window".into()));
        }
        if self.spins.len() != 3 {
            return Err(Error::Unsupported("stability scans are implemented for three ions".into()));
        }
        self.schedule.validate()
    }

    fn cell_size(&self) -> (f64, f64) {
        (
            (self.alpha_range.1 - self.alpha_range.0) / self.resolution.0 as f64,
            (self.delta_alpha_range.1 - self.delta_alpha_range.0) / self.resolution.1 as f64,
        )
    }

    fn outer_excited(&self) -> Option<usize> {
        self.spins.single_excited().filter(|&i| i != 1)
    }
}

/// Stable structures at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellRecord {
    pub alpha: f64,
    pub delta_alpha: f64,
    /// Union of [`StructureKind::bit`] over the stable structures.
    pub mask: u8,
    /// Same union over the purely geometric labels, which differ from
    /// `mask` only when an outer ion is excited.
    pub shape_mask: u8,
    /// Set when no candidate could be refined.
    pub unknown: bool,
}

impl CellRecord {
    pub fn has(&self, kind: StructureKind) -> bool {
        self.mask & kind.bit() != 0
    }

    pub fn has_shape(&self, shape: StructureKind) -> bool {
        self.shape_mask & shape.bit() != 0
    }

    pub fn kinds(&self) -> Vec<StructureKind> {
        StructureKind::ALL.into_iter().filter(|k| self.has(*k)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CurveSource {
    Analytic,
    Numeric,
}

/// Boundary of the stability region of one structure.
///
/// Analytic curves are sampled along `α`; numeric ones are the bisected
/// crossing points between neighboring cells, ordered by `α` then `δα`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryCurve {
    pub label: String,
    pub kind: StructureKind,
    /// Geometric label of the structure whose boundary this is.
    pub shape: StructureKind,
    pub source: CurveSource,
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone)]
pub struct StabilityDiagram {
    pub settings: ScanSettings,
    pub alphas: Vec<f64>,
    pub delta_alphas: Vec<f64>,
    /// Cell `(i, j)` is stored at `i * delta_alphas.len() + j`.
    pub cells: Vec<CellRecord>,
    pub curves: Vec<BoundaryCurve>,
    /// Poles of the boundary equations inside the window.
    pub excluded_alphas: Vec<f64>,
    stable_configs: Vec<Vec<(Label, IonConfiguration)>>,
}

// Spin-aware kind and geometric shape of a structure.
type Label = (StructureKind, StructureKind);

impl StabilityDiagram {
    pub fn cell(&self, i: usize, j: usize) -> &CellRecord {
        &self.cells[i * self.delta_alphas.len() + j]
    }

    pub fn cell_size(&self) -> (f64, f64) {
        self.settings.cell_size()
    }

    /// Number of cells where `kind` is stable.
    pub fn count(&self, kind: StructureKind) -> usize {
        self.cells.iter().filter(|c| c.has(kind)).count()
    }

    /// Number of cells where at least two structures are stable.
    pub fn overlap_count(&self) -> usize {
        self.cells.iter().filter(|c| c.mask.count_ones() > 1).count()
    }

    /// A stable configuration of `kind` at cell `(i, j)`.
    pub fn configuration(&self, i: usize, j: usize, kind: StructureKind) -> Option<&IonConfiguration> {
        self.stable_configs[i * self.delta_alphas.len() + j]
            .iter()
            .filter(|((k, _), _)| *k == kind)
            .map(|(_, c)| c)
            .next()
    }

    fn labeled(&self, i: usize, j: usize, label: Label) -> Option<&IonConfiguration> {
        self.stable_configs[i * self.delta_alphas.len() + j].iter().find(|(l, _)| *l == label).map(|(_, c)| c)
    }

    fn has_label(&self, i: usize, j: usize, label: Label) -> bool {
        self.labeled(i, j, label).is_some()
    }

    pub fn curve(&self, label: &str) -> Option<&BoundaryCurve> {
        self.curves.iter().find(|c| c.label == label)
    }

    /// Numeric boundary of the structures labeled `kind` with geometric
    /// label `shape`.
    pub fn numeric_curve(&self, kind: StructureKind, shape: StructureKind) -> Option<&BoundaryCurve> {
        self.curves.iter().find(|c| c.source == CurveSource::Numeric && c.kind == kind && c.shape == shape)
    }

    /// Largest distance, in cell units (max norm), from a point of the
    /// analytic curve `label` to the nearest numeric boundary point of the
    /// same structure. Points within one cell of the window edge are
    /// skipped. `None` if either curve is missing or empty.
    pub fn analytic_offset(&self, label: &str) -> Option<f64> {
        let analytic = self.curve(label)?;
        let numeric = self.numeric_curve(analytic.kind, analytic.shape)?;
        if numeric.points.is_empty() {
            return None;
        }
        let (ha, hd) = self.cell_size();
        let (a0, a1) = self.settings.alpha_range;
        let (d0, d1) = self.settings.delta_alpha_range;
        let mut worst: Option<f64> = None;
        for p in &analytic.points {
            if p[0] < a0 + ha || p[0] > a1 - ha || p[1] < d0 + hd || p[1] > d1 - hd {
                continue;
            }
            if self.excluded_alphas.iter().any(|&a| (p[0] - a).abs() < 2.0 * ha) {
                continue;
            }
            let d = numeric
                .points
                .iter()
                .map(|q| ((p[0] - q[0]).abs() / ha).max((p[1] - q[1]).abs() / hd))
                .fold(f64::INFINITY, f64::min);
            worst = Some(worst.map_or(d, |w: f64| w.max(d)));
        }
        worst
    }
}

/// Shrinks a bracket `[good, bad]` with `pred(good) = true` by bisection
/// and returns the final bracket.
pub fn bisect(mut pred: impl FnMut(f64) -> bool, mut good: f64, mut bad: f64, steps: usize) -> (f64, f64) {
    for _ in 0..steps {
        let mid = 0.5 * (good + bad);
        if pred(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    (good, bad)
}

/// Locates the homogeneous linear/zigzag transition by bisection on the
/// stability of the numerically refined linear chain.
pub fn homogeneous_critical_alpha(lo: f64, hi: f64, steps: usize) -> Result<f64> {
    let spins = SpinPattern::all_ground(3);
    let guess = linear_config();
    let stable = |alpha: f64| -> Result<bool> {
        let trap = TrapParams::three(alpha, 0.0)?;
        let r = find_equilibrium(&trap, &spins, &guess)?;
        Ok(r.stable && r.kind == StructureKind::LinX)
    };
    if !stable(hi)? || stable(lo)? {
        return Err(Error::Domain(format!("linear stability does not change on [{lo}, {hi}]")));
    }
    let (good, bad) = bisect(|a| stable(a).unwrap_or(false), hi, lo, steps);
    Ok(0.5 * (good + bad))
}

fn linear_config() -> IonConfiguration {
    IonConfiguration::new(vec![[-LINEAR_OUTER_X, 0.0], [0.0, 0.0], [LINEAR_OUTER_X, 0.0]])
}

fn mirrored_if(config: Vec<[f64; 2]>, mirror: bool) -> IonConfiguration {
    IonConfiguration::new(if mirror { config.into_iter().map(|p| [-p[0], p[1]]).collect() } else { config })
}

// Deterministic starting points for a chain whose first ion is excited.
fn outer_seeds(alpha: f64, mirror: bool) -> Vec<IonConfiguration> {
    let c = LINEAR_OUTER_X;
    let mut seeds = vec![
        vec![[-c, 0.05], [0.0, -0.02], [c, 0.01]],
        vec![[-c, 0.3], [0.0, -0.3], [c, 0.0]],
        vec![[-c, 0.0], [0.0, -0.3], [c, 0.3]],
        vec![[-c, 0.2], [0.0, -0.4], [c, 0.2]],
        vec![[-0.9, 0.0], [0.4, 0.6], [0.4, -0.6]],
        vec![[-0.6, 0.5], [-0.4, -0.6], [0.9, 0.1]],
    ];
    if let Ok((xb, yb)) = zigzag_y_closed_form(alpha) {
        seeds.push(vec![[2.0 * xb, 0.0], [-xb, yb], [-xb, -yb]]);
        seeds.push(vec![[-2.0 * xb, 0.0], [xb, yb], [xb, -yb]]);
    }
    seeds.into_iter().map(|s| mirrored_if(s, mirror)).collect()
}

fn generic_seeds() -> Vec<IonConfiguration> {
    let c = LINEAR_OUTER_X;
    vec![
        IonConfiguration::new(vec![[-c, 0.2], [0.0, -0.4], [c, 0.2]]),
        IonConfiguration::new(vec![[-0.5, 0.8], [1.0, 0.0], [-0.5, -0.8]]),
        IonConfiguration::new(vec![[-c, 0.3], [0.0, -0.3], [c, 0.0]]),
        IonConfiguration::new(vec![[-0.6, 0.5], [-0.4, -0.6], [0.9, 0.1]]),
    ]
}

fn cell_seed(base: u64, index: usize) -> u64 {
    base ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

// Stable equilibria at one parameter point, lowest energy per label.
fn cell_equilibria(
    trap: &TrapParams,
    settings: &ScanSettings,
    seed: u64,
) -> Result<(Vec<(Label, EquilibriumResult)>, bool)> {
    let spins = &settings.spins;
    let mut found: Vec<(Label, EquilibriumResult)> = Vec::new();
    let mut converged = 0usize;
    let mut consider = |r: Result<EquilibriumResult>| -> Result<()> {
        match r {
            Ok(r) => {
                converged += 1;
                if r.stable {
                    let label = (r.kind, classify(&r.config, CLASSIFY_TOLERANCE));
                    match found.iter_mut().find(|(l, _)| *l == label) {
                        Some((_, f)) if f.energy <= r.energy => {}
                        Some((_, f)) => *f = r,
                        None => found.push((label, r)),
                    }
                }
                Ok(())
            }
            Err(Error::NonConvergence { .. }) | Err(Error::CoincidentIons(..)) => Ok(()),
            Err(e) => Err(e),
        }
    };
    consider(evaluate_equilibrium(&linear_config(), trap, spins))?;
    match settings.outer_excited() {
        Some(excited) => {
            for s in outer_seeds(trap.alpha, excited != 0) {
                consider(find_equilibrium(trap, spins, &s))?;
            }
            let outcome = metropolis_search(trap, spins, seed, &settings.schedule, Constraint::MinAsymmetry(1e-2))?;
            if let Some(r) = outcome.result() {
                consider(Ok(r.clone()))?;
            }
        }
        None => {
            for kind in [StructureKind::ZigzagX, StructureKind::ZigzagY] {
                if let Ok(c) = analytic_equilibrium(kind, trap, spins) {
                    consider(evaluate_equilibrium(&c, trap, spins))?;
                }
            }
            for s in generic_seeds() {
                consider(find_equilibrium(trap, spins, &s))?;
            }
        }
    }
    found.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.energy.total_cmp(&b.1.energy)));
    Ok((found, converged == 0))
}

// Whether the structure `label` remains stable at `(alpha, dalpha)` when
// continued from `config`; returns the refined configuration on success.
fn continue_label(
    alpha: f64,
    dalpha: f64,
    spins: &SpinPattern,
    label: Label,
    config: &IonConfiguration,
) -> Option<IonConfiguration> {
    let trap = TrapParams::three(alpha, dalpha).ok()?;
    let r = find_equilibrium(&trap, spins, config).ok()?;
    (r.stable && (r.kind, classify(&r.config, CLASSIFY_TOLERANCE)) == label).then_some(r.config)
}

/// Scans the window cell by cell.
///
/// Every cell collects the stable structures reachable from the linear
/// chain, the closed-form zigzags (middle or no ion excited), a set of
/// deterministic triangular guesses and a Metropolis search (outer ion
/// excited). Cells are processed in parallel; output order follows the
/// cell index. When `settings.boundaries` is set, the stability edge of
/// each structure between neighboring cells is located by bisection with
/// continuation from the stable side, and the analytic boundary curves are
/// sampled for comparison.
pub fn scan_diagram(settings: &ScanSettings) -> Result<StabilityDiagram> {
    settings.validate()?;
    let (na, nd) = settings.resolution;
    let (ha, hd) = settings.cell_size();
    let alphas: Vec<f64> = (0..na).map(|i| settings.alpha_range.0 + (i as f64 + 0.5) * ha).collect();
    let delta_alphas: Vec<f64> = (0..nd).map(|j| settings.delta_alpha_range.0 + (j as f64 + 0.5) * hd).collect();
    let results: Vec<Result<(CellRecord, Vec<(Label, IonConfiguration)>)>> = (0..na * nd)
        .into_par_iter()
        .map(|idx| {
            let (alpha, dalpha) = (alphas[idx / nd], delta_alphas[idx % nd]);
            let trap = TrapParams::three(alpha, dalpha)?;
            let (found, unknown) = cell_equilibria(&trap, settings, cell_seed(settings.seed, idx))?;
            let mask = found.iter().fold(0u8, |m, ((k, _), _)| m | k.bit());
            let shape_mask = found.iter().fold(0u8, |m, ((_, s), _)| m | s.bit());
            let configs = found.into_iter().map(|(l, r)| (l, r.config)).collect();
            Ok((CellRecord { alpha, delta_alpha: dalpha, mask, shape_mask, unknown }, configs))
        })
        .collect();
    let mut cells = Vec::with_capacity(na * nd);
    let mut stable_configs = Vec::with_capacity(na * nd);
    for r in results {
        let (c, s) = r?;
        cells.push(c);
        stable_configs.push(s);
    }
    let excluded_alphas = if settings.outer_excited().is_some() {
        outer_excited_poles()
            .into_iter()
            .filter(|a| (settings.alpha_range.0..=settings.alpha_range.1).contains(a))
            .collect()
    } else {
        Vec::new()
    };
    let mut diagram = StabilityDiagram {
        settings: settings.clone(),
        alphas,
        delta_alphas,
        cells,
        curves: Vec::new(),
        excluded_alphas,
        stable_configs,
    };
    if settings.boundaries {
        diagram.curves = analytic_curves(settings);
        diagram.curves.extend(numeric_boundaries(&diagram));
    }
    Ok(diagram)
}

fn numeric_boundaries(d: &StabilityDiagram) -> Vec<BoundaryCurve> {
    let nd = d.delta_alphas.len();
    let na = d.alphas.len();
    let mut labels: Vec<Label> = d.stable_configs.iter().flatten().map(|(l, _)| *l).collect();
    labels.sort();
    labels.dedup();
    let mut pairs = Vec::new();
    for i in 0..na {
        for j in 0..nd {
            if j + 1 < nd {
                pairs.push(((i, j), (i, j + 1)));
            }
            if i + 1 < na {
                pairs.push(((i, j), (i + 1, j)));
            }
        }
    }
    let spins = &d.settings.spins;
    let steps = d.settings.bisection_steps;
    let points: Vec<(Label, [f64; 2])> = pairs
        .par_iter()
        .flat_map_iter(|&(a, b)| {
            let mut out = Vec::new();
            for &label in &labels {
                let (in_a, in_b) = (d.has_label(a.0, a.1, label), d.has_label(b.0, b.1, label));
                if in_a == in_b {
                    continue;
                }
                let (good, bad) = if in_a { (a, b) } else { (b, a) };
                let p0 = [d.alphas[good.0], d.delta_alphas[good.1]];
                let p1 = [d.alphas[bad.0], d.delta_alphas[bad.1]];
                let at = |s: f64| [p0[0] + s * (p1[0] - p0[0]), p0[1] + s * (p1[1] - p0[1])];
                let mut config = d.labeled(good.0, good.1, label).expect("stable label has a configuration").clone();
                let (sg, sb) = bisect(
                    |s| {
                        let p = at(s);
                        match continue_label(p[0], p[1], spins, label, &config) {
                            Some(c) => {
                                config = c;
                                true
                            }
                            None => false,
                        }
                    },
                    0.0,
                    1.0,
                    steps,
                );
                out.push((label, at(0.5 * (sg + sb))));
            }
            out.into_iter()
        })
        .collect();
    labels
        .into_iter()
        .filter_map(|label| {
            let mut pts: Vec<[f64; 2]> = points.iter().filter(|(l, _)| *l == label).map(|(_, p)| *p).collect();
            if pts.is_empty() {
                return None;
            }
            pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
            let (kind, shape) = label;
            let name = if kind == shape {
                format!("{} (numeric)", kind.label())
            } else {
                format!("{} as {} (numeric)", kind.label(), shape.label())
            };
            Some(BoundaryCurve { label: name, kind, shape, source: CurveSource::Numeric, points: pts })
        })
        .collect()
}

fn sample_curve(
    settings: &ScanSettings,
    label: &str,
    (kind, shape): Label,
    f: impl Fn(f64) -> Option<f64>,
) -> Option<BoundaryCurve> {
    let (a0, a1) = settings.alpha_range;
    let (d0, d1) = settings.delta_alpha_range;
    let n = 4 * settings.resolution.0.max(100);
    let points: Vec<[f64; 2]> = (0..=n)
        .map(|k| a0 + (a1 - a0) * k as f64 / n as f64)
        .filter_map(|a| f(a).map(|d| [a, d]))
        .filter(|p| p[1] >= d0 && p[1] <= d1)
        .collect();
    (!points.is_empty()).then(|| BoundaryCurve {
        label: label.into(),
        kind,
        shape,
        source: CurveSource::Analytic,
        points,
    })
}

fn analytic_curves(settings: &ScanSettings) -> Vec<BoundaryCurve> {
    use StructureKind::*;
    let mut curves = Vec::new();
    let zzy = |a: f64| zzy_boundary_delta_alpha(a).ok().flatten();
    match settings.outer_excited() {
        Some(_) => {
            let hi_pole = outer_excited_poles()[1];
            curves.extend(sample_curve(settings, "LIN X* (analytic)", (LinXStar, LinX), |a| {
                if a <= hi_pole {
                    return None;
                }
                outer_excited_linear_boundary_delta_alpha(a).ok().flatten()
            }));
            curves.extend(sample_curve(settings, "ZZ Y apex (analytic)", (TriaStar, ZigzagY), zzy));
        }
        None if settings.spins.single_excited() == Some(1) => {
            curves.extend(sample_curve(settings, "LIN X (analytic)", (LinX, LinX), |a| delta_alpha_critical(a).ok()));
            curves.extend(sample_curve(settings, "ZZ Y (analytic)", (ZigzagY, ZigzagY), zzy));
        }
        None => {}
    }
    curves
}
