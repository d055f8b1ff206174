//! TOML run configuration of the command-line front end.
//!
//! Physical frequencies are ordinary frequencies in kHz; the angular values
//! used internally are `2π` times larger.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::crystal::{SpinPattern, TrapParams};
use crate::error::{Error, Result};
use crate::units::{IonSpecies, PhysicalTrap};

fn default_n_ions() -> usize {
    3
}

fn default_species() -> String {
    "Be9".into()
}

fn default_nu_x() -> f64 {
    500.0
}

fn default_center() -> String {
    "center".into()
}

fn default_ground() -> String {
    "ground".into()
}

fn yes() -> bool {
    true
}

/// Whole configuration file. Each command reads its own section; `spectrum`
/// and `ramsey` also read `[echo]`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_n_ions")]
    pub n_ions: usize,
    #[serde(default)]
    pub seed: u64,
    pub equilibrium: Option<EquilibriumSection>,
    pub modes: Option<ModesSection>,
    pub stability: Option<StabilitySection>,
    pub echo: Option<EchoSection>,
    pub spectrum: Option<SpectrumSection>,
    pub ramsey: Option<RamseySection>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibriumSection {
    pub alpha: f64,
    #[serde(default)]
    pub delta_alpha: f64,
    #[serde(default = "default_ground")]
    pub spins: String,
    /// `"lowest"` (default), `"linear"`, `"zigzag_x"`, `"zigzag_y"`,
    /// `"metropolis"` or `"positions"`.
    #[serde(default)]
    pub guess: Option<String>,
    /// Initial positions for `guess = "positions"`.
    #[serde(default)]
    pub positions: Option<Vec<[f64; 2]>>,
    /// Minimum mirror asymmetry required by the Metropolis search.
    #[serde(default)]
    pub min_asymmetry: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModesSection {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub points: usize,
    #[serde(default)]
    pub delta_alpha: f64,
    #[serde(default = "default_ground")]
    pub spins: String,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilitySection {
    #[serde(default = "default_center")]
    pub spins: String,
    pub alpha_range: [f64; 2],
    pub delta_alpha_range: [f64; 2],
    pub resolution: [usize; 2],
    #[serde(default = "yes")]
    pub boundaries: bool,
    #[serde(default = "yes")]
    pub svg: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EchoSection {
    /// End of the time grid in units of `1/ν_x`.
    pub t_max: f64,
    pub samples: usize,
    #[serde(default = "yes")]
    pub svg: bool,
    pub cases: Vec<EchoCase>,
}

/// One echo computation in physical units.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EchoCase {
    pub label: String,
    #[serde(default = "default_species")]
    pub species: String,
    /// Mass in atomic mass units of a singly charged species outside the
    /// built-in table; `species` then only names it.
    #[serde(default)]
    pub mass_u: Option<f64>,
    #[serde(default = "default_nu_x")]
    pub nu_x_khz: f64,
    pub nu_y_khz: f64,
    pub delta_nu_y_khz: f64,
    #[serde(default = "default_center")]
    pub spins: String,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    #[serde(default)]
    pub window: Option<String>,
    /// Previously written echo CSV files; when absent the `[echo]` cases
    /// are computed.
    #[serde(default)]
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RamseySection {
    #[serde(default)]
    pub revival_threshold: Option<f64>,
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive, got {x}")))
    }
}

fn range(name: &str, r: [f64; 2]) -> Result<()> {
    if r[0].is_finite() && r[1].is_finite() && r[0] < r[1] {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be an increasing pair, got {r:?}")))
    }
}

impl EchoCase {
    pub fn species(&self) -> Result<IonSpecies> {
        if let Some(m) = self.mass_u {
            return IonSpecies::singly_charged(self.species.clone(), m).map_err(|e| Error::Config(e.to_string()));
        }
        IonSpecies::lookup(&self.species).ok_or_else(|| Error::Config(format!("unknown species {:?}", self.species)))
    }

    pub fn physical_trap(&self) -> Result<PhysicalTrap> {
        positive("nu_x_khz", self.nu_x_khz)?;
        positive("nu_y_khz", self.nu_y_khz)?;
        if !self.delta_nu_y_khz.is_finite() {
            return Err(Error::Config("delta_nu_y_khz must be finite".into()));
        }
        PhysicalTrap::from_khz(self.species()?, self.nu_x_khz, self.nu_y_khz, self.delta_nu_y_khz)
            .map_err(|e| Error::Config(e.to_string()))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Ok((Self::parse(&text)?, text))
    }

    pub fn spins(&self, text: &str) -> Result<SpinPattern> {
        SpinPattern::parse(text, self.n_ions)
    }

    pub fn trap(&self, alpha: f64, delta_alpha: f64) -> Result<TrapParams> {
        TrapParams::new(self.n_ions, alpha, delta_alpha).map_err(|e| Error::Config(e.to_string()))
    }

    /// Schema checks beyond what deserialization enforces.
    pub fn validate(&self) -> Result<()> {
        if self.n_ions < 2 {
            return Err(Error::Config(format!("n_ions must be at least 2, got {}", self.n_ions)));
        }
        if let Some(e) = &self.equilibrium {
            self.trap(e.alpha, e.delta_alpha)?;
            self.spins(&e.spins)?;
            if let Some(p) = &e.positions {
                if p.len() != self.n_ions {
                    return Err(Error::Config(format!("{} positions given for {} ions", p.len(), self.n_ions)));
                }
            }
            match e.guess.as_deref() {
                None | Some("lowest" | "linear" | "zigzag_x" | "zigzag_y" | "metropolis") => {}
                Some("positions") if e.positions.is_some() => {}
                Some(other) => return Err(Error::Config(format!("unknown or incomplete guess {other:?}"))),
            }
        }
        if let Some(m) = &self.modes {
            range("modes alpha range", [m.alpha_min, m.alpha_max])?;
            if m.points < 2 {
                return Err(Error::Config("modes.points must be at least 2".into()));
            }
            self.spins(&m.spins)?;
            self.trap(m.alpha_min, m.delta_alpha)?;
        }
        if let Some(s) = &self.stability {
            range("alpha_range", s.alpha_range)?;
            range("delta_alpha_range", s.delta_alpha_range)?;
            if s.resolution[0] == 0 || s.resolution[1] == 0 {
                return Err(Error::Config("resolution must be positive".into()));
            }
            self.spins(&s.spins)?;
        }
        if let Some(e) = &self.echo {
            positive("t_max", e.t_max)?;
            if e.samples < 2 {
                return Err(Error::Config("echo.samples must be at least 2".into()));
            }
            if e.cases.is_empty() {
                return Err(Error::Config("echo.cases is empty".into()));
            }
            for c in &e.cases {
                c.physical_trap()?;
                self.spins(&c.spins)?;
            }
        }
        if let Some(w) = self.spectrum.as_ref().and_then(|s| s.window.as_deref()) {
            crate::ramsey::Window::parse(w).map_err(|e| Error::Config(e.to_string()))?;
        }
        if let Some(t) = self.ramsey.as_ref().and_then(|r| r.revival_threshold) {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::Config(format!("revival_threshold must lie in (0, 1), got {t}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_echo_section() {
        let cfg = RunConfig::parse(
            r#"
            [echo]
            t_max = 200.0
            samples = 64
            [[echo.cases]]
            label = "a"
            nu_y_khz = 775.0
            delta_nu_y_khz = 10.0
            "#,
        )
        .unwrap();
        let c = &cfg.echo.unwrap().cases[0];
        let trap = c.physical_trap().unwrap();
        assert!((trap.alpha() - 1.55).abs() < 1e-12);
        assert!((trap.delta_alpha() - 0.02).abs() < 1e-12);
        assert_eq!(c.species, "Be9");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(RunConfig::parse("n_ions = 3\nbogus = 1"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse("[modes]\nalpha_min = 2.0\nalpha_max = 1.0\npoints = 5"), Err(Error::Config(_))));
        assert!(matches!(
            RunConfig::parse("[equilibrium]\nalpha = 2.0\nspins = \"gg\""),
            Err(Error::Config(_))
        ));
        assert!(RunConfig::parse("[echo]\nt_max = 1.0\nsamples = 4\n[[echo.cases]]\nlabel = \"x\"\nspecies = \"Xx\"\nnu_y_khz = 1.0\ndelta_nu_y_khz = 0.0").is_err());
    }
}
