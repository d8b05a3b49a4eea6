//! TOML run configuration: a partial layer with optional fields (file +
//! command-line overrides) that resolves into a validated [`RunConfig`].

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::control::ControlGains;
use crate::error::Error;
use crate::observer::ObserverGains;
use crate::sim::{Compensation, DofMask, NoiseSpec, NuInitSpec, ScenarioConfig};

/// Initial linear-velocity policy as written in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", untagged)]
pub enum NuInitConfig {
    Mode(NuInitMode),
    /// Explicit initial velocity vector (m/s).
    Fixed([f64; 3]),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NuInitMode {
    AlongMoment,
    AlongAxis,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", untagged)]
pub enum DofMaskConfig {
    Mode(DofMaskMode),
    /// Explicit mask [νx, νy, νz, ωx, ωy, ωz].
    Mask([bool; 6]),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DofMaskMode {
    Full,
    Omnidirectional,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompensationConfig {
    Estimate,
    TrueChi,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default)]
    pub nu_std: [f64; 3],
    #[serde(default)]
    pub omega_std: [f64; 3],
}

/// Configuration layer where every field is optional. Parsed from TOML
/// (unknown keys rejected) and also produced by command-line flags; layers
/// merge with the later layer winning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct PartialConfig {
    pub lines: Option<usize>,
    pub seed: Option<u64>,
    pub alpha: Option<f64>,
    pub d2: Option<f64>,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    pub sigma_des_sq: Option<[f64; 2]>,
    pub dt: Option<f64>,
    pub duration: Option<f64>,
    pub cube_side: Option<f64>,
    pub z0: Option<f64>,
    pub min_depth: Option<f64>,
    pub chi_hat_range: Option<[f64; 2]>,
    pub nu_init_speed: Option<f64>,
    pub nu_init: Option<NuInitConfig>,
    pub dof_mask: Option<DofMaskConfig>,
    pub compensation: Option<CompensationConfig>,
    pub convergence_fraction: Option<f64>,
    pub noise: Option<NoiseConfig>,
}

impl PartialConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, Error> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml_file(path: &std::path::Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    /// Overlay `other` on top of `self`: any field set in `other` wins.
    pub fn merge(self, other: PartialConfig) -> PartialConfig {
        PartialConfig {
            lines: other.lines.or(self.lines),
            seed: other.seed.or(self.seed),
            alpha: other.alpha.or(self.alpha),
            d2: other.d2.or(self.d2),
            k1: other.k1.or(self.k1),
            k2: other.k2.or(self.k2),
            sigma_des_sq: other.sigma_des_sq.or(self.sigma_des_sq),
            dt: other.dt.or(self.dt),
            duration: other.duration.or(self.duration),
            cube_side: other.cube_side.or(self.cube_side),
            z0: other.z0.or(self.z0),
            min_depth: other.min_depth.or(self.min_depth),
            chi_hat_range: other.chi_hat_range.or(self.chi_hat_range),
            nu_init_speed: other.nu_init_speed.or(self.nu_init_speed),
            nu_init: other.nu_init.or(self.nu_init),
            dof_mask: other.dof_mask.or(self.dof_mask),
            compensation: other.compensation.or(self.compensation),
            convergence_fraction: other.convergence_fraction.or(self.convergence_fraction),
            noise: other.noise.or(self.noise),
        }
    }

    pub fn resolve(self) -> Result<RunConfig, Error> {
        let cfg = RunConfig {
            lines: self.lines.unwrap_or(1),
            seed: self.seed.unwrap_or(0),
            alpha: self.alpha.unwrap_or(2000.0),
            d2: self.d2.unwrap_or(1.0),
            k1: self.k1.unwrap_or(1.0),
            k2: self.k2.unwrap_or(1.0),
            sigma_des_sq: self.sigma_des_sq.unwrap_or([0.1, 0.2]),
            dt: self.dt.unwrap_or(1e-3),
            duration: self.duration.unwrap_or(5.0),
            cube_side: self.cube_side.unwrap_or(3.0),
            z0: self.z0.unwrap_or(1.0),
            min_depth: self.min_depth.unwrap_or(0.2),
            chi_hat_range: self.chi_hat_range.unwrap_or([0.1, 1.0]),
            nu_init_speed: self.nu_init_speed.unwrap_or(0.1),
            nu_init: self
                .nu_init
                .unwrap_or(NuInitConfig::Mode(NuInitMode::AlongMoment)),
            dof_mask: self.dof_mask.unwrap_or(DofMaskConfig::Mode(DofMaskMode::Full)),
            compensation: self.compensation.unwrap_or(CompensationConfig::Estimate),
            convergence_fraction: self.convergence_fraction.unwrap_or(0.05),
            noise: self.noise.unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunConfig {
    pub lines: usize,
    pub seed: u64,
    pub alpha: f64,
    pub d2: f64,
    pub k1: f64,
    pub k2: f64,
    pub sigma_des_sq: [f64; 2],
    pub dt: f64,
    pub duration: f64,
    pub cube_side: f64,
    pub z0: f64,
    pub min_depth: f64,
    pub chi_hat_range: [f64; 2],
    pub nu_init_speed: f64,
    pub nu_init: NuInitConfig,
    pub dof_mask: DofMaskConfig,
    pub compensation: CompensationConfig,
    pub convergence_fraction: f64,
    pub noise: NoiseConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        PartialConfig::default().resolve().expect("defaults are valid")
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), Error> {
        let err = |m: String| Err(Error::Config(m));
        if self.lines == 0 {
            return err("lines must be at least 1".into());
        }
        if !(self.alpha > 0.0) {
            return err(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.d2 > 0.0) {
            return err(format!("d2 must be positive, got {}", self.d2));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return err(format!("dt must be positive and finite, got {}", self.dt));
        }
        if !(self.duration >= 0.0) || !self.duration.is_finite() {
            return err(format!("duration must be non-negative, got {}", self.duration));
        }
        if self.sigma_des_sq.iter().any(|&s| !(s > 0.0)) {
            return err(format!(
                "sigma-des-sq entries must be positive, got {:?}",
                self.sigma_des_sq
            ));
        }
        if !(self.cube_side > 0.0) {
            return err(format!("cube-side must be positive, got {}", self.cube_side));
        }
        if !(self.min_depth > 0.0) {
            return err(format!("min-depth must be positive, got {}", self.min_depth));
        }
        if !(self.chi_hat_range[0] < self.chi_hat_range[1]) {
            return err(format!(
                "chi-hat-range must be an increasing interval, got {:?}",
                self.chi_hat_range
            ));
        }
        if !(self.convergence_fraction > 0.0 && self.convergence_fraction < 1.0) {
            return err(format!(
                "convergence-fraction must be in (0, 1), got {}",
                self.convergence_fraction
            ));
        }
        if self
            .noise
            .nu_std
            .iter()
            .chain(&self.noise.omega_std)
            .any(|&s| s < 0.0 || !s.is_finite())
        {
            return err("noise standard deviations must be non-negative".into());
        }
        if let NuInitConfig::Fixed(v) = self.nu_init {
            if v.iter().all(|&c| c == 0.0) {
                return err("a fixed nu-init must be nonzero".into());
            }
        } else if !(self.nu_init_speed > 0.0) {
            return err(format!(
                "nu-init-speed must be positive, got {}",
                self.nu_init_speed
            ));
        }
        Ok(())
    }

    pub fn to_scenario_config(&self) -> ScenarioConfig {
        let nu_init = match self.nu_init {
            NuInitConfig::Fixed(v) => NuInitSpec::Fixed(Vector3::new(v[0], v[1], v[2])),
            NuInitConfig::Mode(NuInitMode::AlongMoment) => {
                NuInitSpec::AlongMoment(self.nu_init_speed)
            }
            NuInitConfig::Mode(NuInitMode::AlongAxis) => NuInitSpec::AlongAxis(self.nu_init_speed),
        };
        let dof_mask = match self.dof_mask {
            DofMaskConfig::Mode(DofMaskMode::Full) => DofMask::full(),
            DofMaskConfig::Mode(DofMaskMode::Omnidirectional) => DofMask::omnidirectional(),
            DofMaskConfig::Mask(m) => DofMask {
                nu: [m[0], m[1], m[2]],
                omega: [m[3], m[4], m[5]],
            },
        };
        ScenarioConfig {
            num_lines: self.lines,
            cube_side: self.cube_side,
            z0: self.z0,
            min_depth: self.min_depth,
            chi_hat_range: (self.chi_hat_range[0], self.chi_hat_range[1]),
            nu_init,
            observer_gains: ObserverGains {
                alpha: self.alpha,
                d2_value: self.d2,
            },
            control_gains: ControlGains {
                k1: self.k1,
                k2: self.k2,
                sigma_des_sq: Vector2::new(self.sigma_des_sq[0], self.sigma_des_sq[1]),
            },
            dt: self.dt,
            duration: self.duration,
            noise: NoiseSpec {
                nu_std: self.noise.nu_std,
                omega_std: self.noise.omega_std,
            },
            dof_mask,
            compensation: match self.compensation {
                CompensationConfig::Estimate => Compensation::Estimate,
                CompensationConfig::TrueChi => Compensation::TrueChi,
            },
            convergence_fraction: self.convergence_fraction,
            seed: self.seed,
        }
    }
}
