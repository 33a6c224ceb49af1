//! Run configuration: a single JSON file with pulse, atom, numerics,
//! physics and io blocks. Every field has a default; validation collects
//! every violation before any compute starts.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::dipole::AtomSpec;
use crate::error::{CoreError, Result};
use crate::gaussian::DbConvention;
use crate::pulse::{EnvelopeKind, LaserPulse, ModeGrid};
use crate::quadgen::GeneratorMode;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct PulseConfig {
    /// Peak intensity in W/cm²; used when `e0_au` is absent.
    pub intensity_w_cm2: Option<f64>,
    /// Peak field in atomic units; takes precedence over the intensity.
    pub e0_au: Option<f64>,
    /// Central wavelength in nm; used when `omega_au` is absent.
    pub wavelength_nm: Option<f64>,
    /// Carrier frequency in atomic units; takes precedence.
    pub omega_au: Option<f64>,
    pub n_cycles: u32,
    pub envelope: EnvelopeKind,
}

impl Default for PulseConfig {
    fn default() -> Self {
        PulseConfig {
            intensity_w_cm2: Some(1e14),
            e0_au: None,
            wavelength_nm: Some(800.0),
            omega_au: None,
            n_cycles: 6,
            envelope: EnvelopeKind::Sin2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct AtomConfig {
    pub ip_ground_au: f64,
    pub ip_excited_au: f64,
    pub d_eg_au: f64,
    pub epsilon: f64,
}

impl Default for AtomConfig {
    fn default() -> Self {
        AtomConfig { ip_ground_au: 2.0, ip_excited_au: 0.5, d_eg_au: 0.0, epsilon: 1e-3 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsConfig {
    /// Dipole time samples over the pulse.
    pub n_t: usize,
    /// Per-mode Fock cutoff (levels 0..=n_cutoff).
    pub n_cutoff: usize,
    /// Brute-force quadrature-angle samples on [0, π].
    pub theta_points: usize,
    /// Subinterval cap for the adaptive quadrature.
    pub quad_cap: usize,
    pub generator_mode: GeneratorMode,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        NumericsConfig {
            n_t: 4096,
            n_cutoff: 50,
            theta_points: 100,
            quad_cap: 1000,
            generator_mode: GeneratorMode::AsIs,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsConfig {
    /// Collective coupling N_at·g_L² (the squeezing control parameter).
    pub n_at_gl2: f64,
    /// Individual coupling scale; only the displacement spectrum depends on
    /// it separately from `n_at_gl2`.
    pub g_l: f64,
    /// Highest harmonic index simulated.
    pub q_max: usize,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        PhysicsConfig { n_at_gl2: 1.0, g_l: 1e-8, q_max: 9 }
    }
}

/// Where the dipole series comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DipoleSource {
    Sfa,
    File(PathBuf),
}

impl Serialize for DipoleSource {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DipoleSource::Sfa => s.serialize_str("sfa"),
            DipoleSource::File(p) => s.serialize_str(&format!("file:{}", p.display())),
        }
    }
}

impl<'de> Deserialize<'de> for DipoleSource {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        DipoleSource::parse(&raw).map_err(serde::de::Error::custom)
    }
}

impl DipoleSource {
    pub fn parse(raw: &str) -> std::result::Result<Self, String> {
        if raw == "sfa" {
            Ok(DipoleSource::Sfa)
        } else if let Some(path) = raw.strip_prefix("file:") {
            if path.is_empty() {
                Err("dipole source `file:` needs a path".to_string())
            } else {
                Ok(DipoleSource::File(PathBuf::from(path)))
            }
        } else {
            Err(format!("dipole source must be `sfa` or `file:PATH`, got `{raw}`"))
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct IoConfig {
    pub out_dir: PathBuf,
    pub dipole_source: DipoleSource,
    pub db_convention: DbConvention,
}

impl Default for IoConfig {
    fn default() -> Self {
        IoConfig {
            out_dir: PathBuf::from("out"),
            dipole_source: DipoleSource::Sfa,
            db_convention: DbConvention::Paper,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub pulse: PulseConfig,
    pub atom: AtomConfig,
    pub numerics: NumericsConfig,
    pub physics: PhysicsConfig,
    pub io: IoConfig,
}

impl RunConfig {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: RunConfig = serde_json::from_str(&text)?;
        Ok(config)
    }

    /// Resolved peak field in atomic units.
    pub fn e0_au(&self) -> f64 {
        match (self.pulse.e0_au, self.pulse.intensity_w_cm2) {
            (Some(e0), _) => e0,
            (None, Some(i0)) => crate::pulse::field_from_intensity(i0),
            (None, None) => crate::pulse::field_from_intensity(1e14),
        }
    }

    /// Resolved carrier frequency in atomic units.
    pub fn omega_au(&self) -> f64 {
        match (self.pulse.omega_au, self.pulse.wavelength_nm) {
            (Some(w), _) => w,
            (None, Some(nm)) => crate::pulse::frequency_from_wavelength(nm),
            (None, None) => crate::pulse::frequency_from_wavelength(800.0),
        }
    }

    /// Collect every violation; an empty list means the config is usable.
    pub fn validate(&self) -> Result<()> {
        let mut violations = Vec::new();
        if !(self.e0_au() >= 0.0) {
            violations.push(format!("peak field must be non-negative, got {}", self.e0_au()));
        }
        if !(self.omega_au() > 0.0) {
            violations.push(format!(
                "carrier frequency must be positive, got {}",
                self.omega_au()
            ));
        }
        if self.pulse.n_cycles < 1 {
            violations.push("pulse must last at least one cycle".into());
        }
        if !(self.atom.ip_ground_au > self.atom.ip_excited_au) {
            violations.push(format!(
                "ground ionization potential ({}) must exceed the excited one ({})",
                self.atom.ip_ground_au, self.atom.ip_excited_au
            ));
        }
        if !(self.atom.ip_excited_au > 0.0) {
            violations.push(format!(
                "excited ionization potential must be positive, got {}",
                self.atom.ip_excited_au
            ));
        }
        if !(self.atom.epsilon > 0.0) {
            violations.push(format!("regularization must be positive, got {}", self.atom.epsilon));
        }
        if self.numerics.n_t < crate::dipole::MIN_SAMPLES {
            violations.push(format!(
                "n_t must be at least {}, got {}",
                crate::dipole::MIN_SAMPLES,
                self.numerics.n_t
            ));
        }
        if self.numerics.n_cutoff < 2 {
            violations.push(format!("n_cutoff must be at least 2, got {}", self.numerics.n_cutoff));
        }
        if self.numerics.theta_points < 2 {
            violations.push(format!(
                "theta_points must be at least 2, got {}",
                self.numerics.theta_points
            ));
        }
        if self.numerics.quad_cap < 8 {
            violations.push(format!("quad_cap must be at least 8, got {}", self.numerics.quad_cap));
        }
        if !(self.physics.n_at_gl2 > 0.0) {
            violations.push(format!(
                "collective coupling N_at g_L² must be positive, got {}",
                self.physics.n_at_gl2
            ));
        }
        if !(self.physics.g_l > 0.0) {
            violations.push(format!("g_L must be positive, got {}", self.physics.g_l));
        }
        if self.physics.q_max < 1 {
            violations.push("q_max must be at least 1".into());
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(CoreError::Validation(violations))
        }
    }

    pub fn laser_pulse(&self) -> Result<LaserPulse> {
        LaserPulse::new(self.e0_au(), self.omega_au(), self.pulse.n_cycles, self.pulse.envelope)
    }

    pub fn atom_spec(&self) -> AtomSpec {
        AtomSpec {
            ip_ground: self.atom.ip_ground_au,
            ip_excited: self.atom.ip_excited_au,
            d_eg: self.atom.d_eg_au,
            epsilon: self.atom.epsilon,
        }
    }

    pub fn mode_grid(&self) -> Result<ModeGrid> {
        ModeGrid::new(self.physics.q_max, self.omega_au(), self.physics.g_l)
    }

    pub fn quad_options(&self) -> crate::numeric::quad::QuadOptions {
        crate::numeric::quad::QuadOptions::with_cap(self.numerics.quad_cap)
    }

    /// Fully resolved copy (explicit E0/ω in place of intensity/wavelength)
    /// for embedding into reports.
    pub fn resolved(&self) -> RunConfig {
        let mut out = self.clone();
        out.pulse.e0_au = Some(self.e0_au());
        out.pulse.omega_au = Some(self.omega_au());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_resolve_to_reported_values() {
        let config = RunConfig::default();
        config.validate().unwrap();
        assert!((config.e0_au() - 0.053).abs() < 1e-3);
        assert!((config.omega_au() - 0.057).abs() < 1e-3);
        assert_eq!(config.numerics.n_cutoff, 50);
        assert_eq!(config.numerics.theta_points, 100);
        assert_eq!(config.numerics.quad_cap, 1000);
        assert_eq!(config.physics.q_max, 9);
    }

    #[test]
    fn validation_collects_every_violation() {
        let mut config = RunConfig::default();
        config.pulse.n_cycles = 0;
        config.atom.ip_excited_au = -1.0;
        config.physics.g_l = 0.0;
        config.numerics.n_cutoff = 1;
        match config.validate() {
            Err(CoreError::Validation(v)) => {
                assert!(v.len() >= 4, "expected several violations, got {v:?}")
            }
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn explicit_field_overrides_intensity() {
        let mut config = RunConfig::default();
        config.pulse.e0_au = Some(0.08);
        assert_eq!(config.e0_au(), 0.08);
        config.pulse.omega_au = Some(0.06);
        assert_eq!(config.omega_au(), 0.06);
    }

    #[test]
    fn dipole_source_round_trips() {
        let sfa: DipoleSource = serde_json::from_str("\"sfa\"").unwrap();
        assert_eq!(sfa, DipoleSource::Sfa);
        let file: DipoleSource = serde_json::from_str("\"file:/tmp/d.csv\"").unwrap();
        assert_eq!(file, DipoleSource::File(PathBuf::from("/tmp/d.csv")));
        assert!(serde_json::from_str::<DipoleSource>("\"nope\"").is_err());
        let text = serde_json::to_string(&file).unwrap();
        assert_eq!(text, "\"file:/tmp/d.csv\"");
    }

    #[test]
    fn config_json_round_trip() {
        let config = RunConfig::default();
        let text = serde_json::to_string_pretty(&config).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(config, back);
    }
}
