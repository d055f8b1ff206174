//! Conversion between SI quantities and the dimensionless units used
//! throughout the crate.
//!
//! Lengths are measured in `l = (q² / (4π ε₀ m ν_x²))^(1/3)`, energies in
//! `m ν_x² l²` and times in `1/ν_x`. All frequencies are angular (rad/s).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::crystal::TrapParams;
use crate::error::{Error, Result};

/// Elementary charge in coulombs.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Vacuum permittivity in F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
/// Reduced Planck constant in J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Unified atomic mass unit in kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Converts an ordinary frequency in kHz to an angular frequency in rad/s.
pub fn khz_to_angular(khz: f64) -> f64 {
    2.0 * PI * khz * 1e3
}

/// Converts an angular frequency in rad/s to an ordinary frequency in kHz.
pub fn angular_to_khz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e3)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IonSpecies {
    pub name: String,
    /// kg
    pub mass: f64,
    /// C
    pub charge: f64,
}

impl IonSpecies {
    pub fn new(name: impl Into<String>, mass: f64, charge: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::Invalid(format!("ion mass must be positive, got {mass}")));
        }
        if !(charge > 0.0 && charge.is_finite()) {
            return Err(Error::Invalid(format!("ion charge must be positive, got {charge}")));
        }
        Ok(Self { name: name.into(), mass, charge })
    }

    /// Singly charged ion with the given mass in atomic mass units.
    pub fn singly_charged(name: impl Into<String>, mass_u: f64) -> Result<Self> {
        Self::new(name, mass_u * ATOMIC_MASS_UNIT, ELEMENTARY_CHARGE)
    }

    pub fn beryllium9() -> Self {
        Self::singly_charged("9Be+", 9.012_183_1).expect("valid species")
    }

    pub fn magnesium24() -> Self {
        Self::singly_charged("24Mg+", 23.985_041_70).expect("valid species")
    }

    pub fn calcium40() -> Self {
        Self::singly_charged("40Ca+", 39.962_590_86).expect("valid species")
    }

    pub fn strontium88() -> Self {
        Self::singly_charged("88Sr+", 87.905_612_5).expect("valid species")
    }

    /// The built-in species table.
    pub fn table() -> Vec<IonSpecies> {
        vec![Self::beryllium9(), Self::magnesium24(), Self::calcium40(), Self::strontium88()]
    }

    /// Looks a species up in the built-in table. Accepts `"Be9"`, `"9Be+"`,
    /// `"be"` and similar spellings.
    pub fn lookup(name: &str) -> Option<IonSpecies> {
        let key: String = name
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        let letters: String = key.chars().filter(|c| c.is_ascii_alphabetic()).collect();
        match letters.as_str() {
            "be" => Some(Self::beryllium9()),
            "mg" => Some(Self::magnesium24()),
            "ca" => Some(Self::calcium40()),
            "sr" => Some(Self::strontium88()),
            _ => None,
        }
    }
}

/// A trap described in SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalTrap {
    pub species: IonSpecies,
    /// Axial trap frequency, rad/s.
    pub nu_x: f64,
    /// Transverse trap frequency for ions in |g>, rad/s.
    pub nu_y: f64,
    /// Additional transverse frequency felt by ions in |e>, rad/s.
    pub delta_nu_y: f64,
}

impl PhysicalTrap {
    pub fn new(species: IonSpecies, nu_x: f64, nu_y: f64, delta_nu_y: f64) -> Result<Self> {
        if !(nu_x > 0.0 && nu_x.is_finite()) {
            return Err(Error::Invalid(format!("nu_x must be positive, got {nu_x}")));
        }
        if !(nu_y > 0.0 && nu_y.is_finite()) {
            return Err(Error::Invalid(format!("nu_y must be positive, got {nu_y}")));
        }
        if !delta_nu_y.is_finite() {
            return Err(Error::Invalid("delta_nu_y must be finite".into()));
        }
        Ok(Self { species, nu_x, nu_y, delta_nu_y })
    }

    /// Builds a trap from ordinary frequencies in kHz.
    pub fn from_khz(species: IonSpecies, nu_x_khz: f64, nu_y_khz: f64, delta_nu_y_khz: f64) -> Result<Self> {
        Self::new(
            species,
            khz_to_angular(nu_x_khz),
            khz_to_angular(nu_y_khz),
            khz_to_angular(delta_nu_y_khz),
        )
    }

    /// Characteristic length `l` in meters.
    pub fn length_scale(&self) -> f64 {
        let q = self.species.charge;
        let m = self.species.mass;
        (q * q / (4.0 * PI * VACUUM_PERMITTIVITY * m * self.nu_x * self.nu_x)).cbrt()
    }

    /// Energy scale `m ν_x² l²` in joules.
    pub fn energy_scale(&self) -> f64 {
        let l = self.length_scale();
        self.species.mass * self.nu_x * self.nu_x * l * l
    }

    /// Quantum fluctuation scale `σ = sqrt(ħ / (m ν_x)) / l`.
    ///
    /// In dimensionless units the vibrational Schrödinger equation carries
    /// an effective Planck constant `σ²`; this is where the ion mass enters
    /// the quantum dynamics.
    pub fn fluctuation_scale(&self) -> f64 {
        (HBAR / (self.species.mass * self.nu_x)).sqrt() / self.length_scale()
    }

    /// Aspect ratio `α = ν_y / ν_x`.
    pub fn alpha(&self) -> f64 {
        self.nu_y / self.nu_x
    }

    /// State-dependent shift `δα = δν_y / ν_x`.
    pub fn delta_alpha(&self) -> f64 {
        self.delta_nu_y / self.nu_x
    }

    pub fn to_dimensionless(&self, n_ions: usize) -> Result<TrapParams> {
        TrapParams::new(n_ions, self.alpha(), self.delta_alpha())
    }

    /// Dimensionless time (units of `1/ν_x`) to seconds.
    pub fn to_physical_time(&self, t: f64) -> f64 {
        t / self.nu_x
    }

    /// Seconds to dimensionless time.
    pub fn to_dimensionless_time(&self, seconds: f64) -> f64 {
        seconds * self.nu_x
    }

    /// Dimensionless angular frequency (units of `ν_x`) to kHz.
    pub fn frequency_to_khz(&self, omega: f64) -> f64 {
        angular_to_khz(omega * self.nu_x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn be(nu_x_khz: f64) -> PhysicalTrap {
        let sp = IonSpecies::singly_charged("9Be+", 9.0122).unwrap();
        PhysicalTrap::from_khz(sp, nu_x_khz, 773.5, 10.0).unwrap()
    }

    #[test]
    fn beryllium_length_scale_golden() {
        // Direct evaluation of the length formula with CODATA constants.
        let trap = be(500.0);
        assert_relative_eq!(trap.length_scale(), 1.160_274_755_386_864_9e-5, max_relative = 1e-12);
        assert_relative_eq!(trap.energy_scale(), 1.988_388_992_892_034_5e-23, max_relative = 1e-12);
        assert_relative_eq!(trap.fluctuation_scale(), 4.081_899_817_492_616e-3, max_relative = 1e-12);
    }

    #[test]
    fn length_scales_as_minus_two_thirds() {
        let l1 = be(500.0).length_scale();
        let l4 = be(2000.0).length_scale();
        assert_relative_eq!(l4, l1 * 4f64.powf(-2.0 / 3.0), max_relative = 1e-13);
    }

    #[test]
    fn length_independent_of_transverse() {
        let sp = IonSpecies::beryllium9();
        let a = PhysicalTrap::from_khz(sp.clone(), 500.0, 600.0, 0.0).unwrap();
        let b = PhysicalTrap::from_khz(sp, 500.0, 900.0, 50.0).unwrap();
        assert_eq!(a.length_scale(), b.length_scale());
    }

    #[test]
    fn scales_follow_mass() {
        let table = IonSpecies::table();
        let mut prev: Option<(f64, f64)> = None;
        for sp in table {
            let t = PhysicalTrap::from_khz(sp, 500.0, 775.0, 10.0).unwrap();
            let cur = (t.length_scale(), t.energy_scale());
            assert!(cur.0 > 0.0 && cur.1 > 0.0);
            if let Some(p) = prev {
                assert!(cur.0 < p.0);
                // m ν² l² grows as m^(1/3).
                assert!(cur.1 > p.1);
            }
            prev = Some(cur);
        }
    }

    #[test]
    fn aspect_ratios_from_khz() {
        let t = PhysicalTrap::from_khz(IonSpecies::beryllium9(), 500.0, 773.5, 10.0).unwrap();
        assert_relative_eq!(t.alpha(), 1.547, max_relative = 1e-14);
        assert_relative_eq!(t.delta_alpha(), 0.02, max_relative = 1e-14);
        let t = PhysicalTrap::from_khz(IonSpecies::beryllium9(), 500.0, 775.0, 0.0).unwrap();
        assert_relative_eq!(t.alpha(), 1.55, max_relative = 1e-14);
        assert_eq!(t.delta_alpha(), 0.0);
    }

    #[test]
    fn time_conversion() {
        let t = be(500.0);
        assert_relative_eq!(t.to_physical_time(2.0 * PI), 2e-6, max_relative = 1e-14);
        assert_eq!(t.to_physical_time(0.0), 0.0);
        for x in [0.1, 3.7, 123.456, 4096.0] {
            let back = t.to_dimensionless_time(t.to_physical_time(x));
            assert_relative_eq!(back, x, max_relative = 1e-14);
        }
    }

    #[test]
    fn invalid_inputs() {
        assert!(IonSpecies::new("x", 0.0, 1.0).is_err());
        assert!(IonSpecies::new("x", 1.0, -1.0).is_err());
        assert!(PhysicalTrap::from_khz(IonSpecies::beryllium9(), 0.0, 1.0, 0.0).is_err());
        assert!(PhysicalTrap::from_khz(IonSpecies::beryllium9(), 1.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn lookup_spellings() {
        assert_eq!(IonSpecies::lookup("Be9").unwrap().name, "9Be+");
        assert_eq!(IonSpecies::lookup("40Ca+").unwrap().name, "40Ca+");
        assert_eq!(IonSpecies::lookup("mg").unwrap().name, "24Mg+");
        assert!(IonSpecies::lookup("Xe").is_none());
    }
}
