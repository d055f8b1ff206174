//! Planar ion crystals: potential energy, derivatives and equilibria.
//!
//! Configurations are stored as `N` pairs `(x_j, y_j)` in units of the
//! length scale `l`. Flattened vectors interleave coordinates as
//! `[x_0, y_0, x_1, y_1, ...]`.

mod analytic;
mod classify;
mod metropolis;
mod potential;
mod solve;

use std::fmt;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use analytic::{analytic_equilibrium, zigzag_x_closed_form, zigzag_y_closed_form, LINEAR_OUTER_X};
pub use classify::{classify, classify_with_spins, mirror_x_asymmetry, mirror_y_asymmetry};
pub use metropolis::{metropolis_search, Constraint, MetropolisSchedule, SearchOutcome};
pub use potential::{gradient, hessian, potential_energy};
pub use solve::{
    evaluate_equilibrium, find_equilibrium, find_equilibrium_with, lowest_stable_equilibrium, SolverOptions,
};

pub(crate) use potential::{check_separation, energy_flat, gradient_flat, hessian_flat};

/// Pairwise distance below which two ions are treated as coincident.
pub const COINCIDENCE_THRESHOLD: f64 = 1e-9;
/// Smallest Hessian eigenvalue that still counts as a stable direction.
pub const STABILITY_FLOOR: f64 = 1e-9;
/// Default classification tolerance.
pub const CLASSIFY_TOLERANCE: f64 = 1e-6;
/// Gradient norm guaranteed for every reported equilibrium.
pub const GRADIENT_TOLERANCE: f64 = 1e-10;

/// Dimensionless trap parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapParams {
    pub n_ions: usize,
    /// Transverse-to-axial aspect ratio for ions in |g>.
    pub alpha: f64,
    /// Shift of the aspect ratio for ions in |e>.
    pub delta_alpha: f64,
}

impl TrapParams {
    pub fn new(n_ions: usize, alpha: f64, delta_alpha: f64) -> Result<Self> {
        if n_ions < 2 {
            return Err(Error::Invalid(format!("need at least two ions, got {n_ions}")));
        }
        if !alpha.is_finite() || !delta_alpha.is_finite() {
            return Err(Error::Invalid("aspect ratios must be finite".into()));
        }
        if alpha < 1.0 {
            return Err(Error::Invalid(format!("alpha must be >= 1, got {alpha}")));
        }
        if alpha + delta_alpha <= 0.0 {
            return Err(Error::Invalid(format!(
                "alpha + delta_alpha must be positive, got {}",
                alpha + delta_alpha
            )));
        }
        Ok(Self { n_ions, alpha, delta_alpha })
    }

    /// Three ions, the case all closed forms refer to.
    pub fn three(alpha: f64, delta_alpha: f64) -> Result<Self> {
        Self::new(3, alpha, delta_alpha)
    }

    /// `R = α² / (α + δα)²`.
    pub fn ratio_r(&self) -> f64 {
        let ae = self.alpha + self.delta_alpha;
        self.alpha * self.alpha / (ae * ae)
    }

    /// Squared transverse trap frequency felt by each ion.
    pub fn transverse_strengths(&self, spins: &SpinPattern) -> Vec<f64> {
        let ae = self.alpha + self.delta_alpha;
        spins
            .excited
            .iter()
            .map(|&e| if e { ae * ae } else { self.alpha * self.alpha })
            .collect()
    }
}

/// Internal state of each ion; `true` marks |e>.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinPattern {
    pub excited: Vec<bool>,
}

impl SpinPattern {
    pub fn new(excited: Vec<bool>) -> Self {
        Self { excited }
    }

    pub fn all_ground(n: usize) -> Self {
        Self { excited: vec![false; n] }
    }

    /// Only the middle ion excited (`n / 2`).
    pub fn center_excited(n: usize) -> Self {
        Self::single(n, n / 2)
    }

    /// Only the first ion excited.
    pub fn outer_excited(n: usize) -> Self {
        Self::single(n, 0)
    }

    pub fn single(n: usize, index: usize) -> Self {
        let mut excited = vec![false; n];
        excited[index] = true;
        Self { excited }
    }

    pub fn len(&self) -> usize {
        self.excited.len()
    }

    pub fn is_empty(&self) -> bool {
        self.excited.is_empty()
    }

    pub fn excited_indices(&self) -> Vec<usize> {
        self.excited.iter().enumerate().filter(|(_, &e)| e).map(|(i, _)| i).collect()
    }

    /// Index of the excited ion when exactly one ion is excited.
    pub fn single_excited(&self) -> Option<usize> {
        match self.excited_indices().as_slice() {
            [i] => Some(*i),
            _ => None,
        }
    }

    pub fn is_all_ground(&self) -> bool {
        self.excited.iter().all(|e| !e)
    }

    /// Parses `"ground"`, `"center"`, `"outer"` or an explicit list such as
    /// `"0,1,0"` / `"geg"`.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let t = text.trim().to_ascii_lowercase();
        let pattern = match t.as_str() {
            "ground" | "all-ground" | "all_ground" => Self::all_ground(n),
            "center" | "centre" | "center-excited" | "center_excited" => Self::center_excited(n),
            "outer" | "outer-excited" | "outer_excited" => Self::outer_excited(n),
            _ => {
                let flags: Vec<bool> = if t.chars().all(|c| c == 'g' || c == 'e') {
                    t.chars().map(|c| c == 'e').collect()
                } else {
                    t.split(',')
                        .map(|s| match s.trim() {
                            "0" => Ok(false),
                            "1" => Ok(true),
                            other => Err(Error::Config(format!("bad spin flag {other:?}"))),
                        })
                        .collect::<Result<_>>()?
                };
                Self::new(flags)
            }
        };
        if pattern.len() != n {
            return Err(Error::Config(format!(
                "spin pattern {text:?} has {} entries, expected {n}",
                pattern.len()
            )));
        }
        Ok(pattern)
    }
}

impl fmt::Display for SpinPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &e in &self.excited {
            f.write_str(if e { "e" } else { "g" })?;
        }
        Ok(())
    }
}

/// Planar ion positions in units of `l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IonConfiguration {
    pub positions: Vec<[f64; 2]>,
}

impl IonConfiguration {
    pub fn new(positions: Vec<[f64; 2]>) -> Self {
        Self { positions }
    }

    pub fn from_flat(flat: &[f64]) -> Self {
        Self { positions: flat.chunks_exact(2).map(|c| [c[0], c[1]]).collect() }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.positions.iter().flat_map(|p| [p[0], p[1]]).collect()
    }

    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_vec(self.to_flat())
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Root of the summed squared displacement to another configuration.
    pub fn distance(&self, other: &IonConfiguration) -> f64 {
        self.positions
            .iter()
            .zip(&other.positions)
            .map(|(a, b)| (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Mirror image under `y -> -y`.
    pub fn flipped_y(&self) -> Self {
        Self { positions: self.positions.iter().map(|p| [p[0], -p[1]]).collect() }
    }
}

/// Structural label of an equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StructureKind {
    LinX,
    ZigzagX,
    ZigzagY,
    LinXStar,
    TriaStar,
    Other,
}

impl StructureKind {
    pub const ALL: [StructureKind; 6] = [
        StructureKind::LinX,
        StructureKind::ZigzagX,
        StructureKind::ZigzagY,
        StructureKind::LinXStar,
        StructureKind::TriaStar,
        StructureKind::Other,
    ];

    pub fn bit(self) -> u8 {
        match self {
            StructureKind::LinX => 1,
            StructureKind::ZigzagX => 2,
            StructureKind::ZigzagY => 4,
            StructureKind::LinXStar => 8,
            StructureKind::TriaStar => 16,
            StructureKind::Other => 32,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            StructureKind::LinX => "LIN X",
            StructureKind::ZigzagX => "ZZ X",
            StructureKind::ZigzagY => "ZZ Y",
            StructureKind::LinXStar => "LIN X*",
            StructureKind::TriaStar => "TRIA*",
            StructureKind::Other => "other",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let key: String = text.chars().filter(|c| c.is_ascii_alphanumeric() || *c == '*').collect();
        match key.to_ascii_lowercase().as_str() {
            "linx" | "lin" | "linear" => Ok(StructureKind::LinX),
            "zigzagx" | "zzx" | "zigzag" => Ok(StructureKind::ZigzagX),
            "zigzagy" | "zzy" => Ok(StructureKind::ZigzagY),
            "linxstar" | "linx*" => Ok(StructureKind::LinXStar),
            "triastar" | "tria*" | "tria" => Ok(StructureKind::TriaStar),
            "other" => Ok(StructureKind::Other),
            _ => Err(Error::Config(format!("unknown structure kind {text:?}"))),
        }
    }
}

impl fmt::Display for StructureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A refined stationary configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumResult {
    pub config: IonConfiguration,
    pub energy: f64,
    pub gradient_norm: f64,
    /// Smallest Hessian eigenvalue.
    pub min_eigenvalue: f64,
    pub stable: bool,
    pub kind: StructureKind,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trap_params_validation() {
        assert!(TrapParams::new(1, 2.0, 0.0).is_err());
        assert!(TrapParams::new(3, 0.9, 0.0).is_err());
        assert!(TrapParams::new(3, 1.2, -1.2).is_err());
        assert!(TrapParams::new(3, f64::NAN, 0.0).is_err());
        let t = TrapParams::three(1.5, 0.1).unwrap();
        assert_eq!(t.transverse_strengths(&SpinPattern::center_excited(3)), vec![2.25, 1.6f64.powi(2), 2.25]);
    }

    #[test]
    fn spin_parsing() {
        assert_eq!(SpinPattern::parse("center", 3).unwrap(), SpinPattern::new(vec![false, true, false]));
        assert_eq!(SpinPattern::parse("egg", 3).unwrap(), SpinPattern::outer_excited(3));
        assert_eq!(SpinPattern::parse("0, 0, 1", 3).unwrap(), SpinPattern::single(3, 2));
        assert!(SpinPattern::parse("0,1", 3).is_err());
        assert!(SpinPattern::parse("0,2,1", 3).is_err());
        assert_eq!(SpinPattern::center_excited(3).to_string(), "geg");
    }

    #[test]
    fn kind_parsing_roundtrip() {
        for k in StructureKind::ALL {
            assert_eq!(StructureKind::parse(k.label()).unwrap(), k);
        }
    }
}
