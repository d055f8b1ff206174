//! Equilibrium structures, normal modes, stability diagrams and
//! Loschmidt echoes of small trapped-ion Coulomb crystals with a
//! state-dependent transverse potential.

pub mod cli;
pub mod config;
pub mod crystal;
pub mod error;
pub mod gaussian;
pub mod io;
pub mod modes;
pub mod ramsey;
pub mod stability;
pub mod units;

pub use crystal::{
    EquilibriumResult, IonConfiguration, SpinPattern, StructureKind, TrapParams,
};
pub use error::{Error, Result};
pub use gaussian::{GaussianPureState, OverlapSeries, QuadraticModel};
pub use modes::NormalModes;
pub use ramsey::Spectrum;
pub use stability::StabilityDiagram;
pub use units::{IonSpecies, PhysicalTrap};
