//! Versioned JSON run configuration with field-path error messages.

use serde::{Deserialize, Serialize};

use crate::blend::MAX_DEGREE;
use crate::domain::{make_exhaustion, ExhaustionTower, TowerKind, MAX_GRID_NODES};
use crate::driver::{check_flux3, HarmonicPrescription, StageSettings, MAX_STAGES};
use crate::error::{Error, Result};
use crate::laurent::Laurent;

pub const CONFIG_VERSION: u32 = 1;
const MAX_NEWTON: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub tower: TowerKind,
    #[serde(default = "default_stages")]
    pub stages: usize,
}

fn default_stages() -> usize {
    3
}

/// Harmonic third coordinate by catalog name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "h", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PrescriptionConfig {
    ReZ,
    LogAbs,
    /// `φ3 = L dz`.
    Custom { laurent: Laurent },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub degree: usize,
    /// `ε` of the nonvanishing run and of single stages.
    pub epsilon: f64,
    pub newton_max_iter: usize,
    pub region_weight: f64,
    pub escalations: usize,
    pub n_doublings: usize,
    pub max_rows: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let s = StageSettings::default();
        Self {
            degree: s.degree,
            epsilon: 0.5,
            newton_max_iter: s.newton_max_iter,
            region_weight: s.region_weight,
            escalations: s.escalations,
            n_doublings: s.n_doublings,
            max_rows: s.max_rows,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// `[radial, angular]` for region samples and stage changes.
    pub u: [usize; 2],
    /// `[radial, angular]` for distances and exported meshes.
    pub v: [usize; 2],
}

impl Default for GridConfig {
    fn default() -> Self {
        let s = StageSettings::default();
        Self {
            u: [s.u_grid.0, s.u_grid.1],
            v: [s.v_grid.0, s.v_grid.1],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
    pub mesh: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: "out".into(),
            mesh: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub spec_version: u32,
    pub domain: DomainConfig,
    pub prescription: PrescriptionConfig,
    #[serde(default)]
    pub flux: [f64; 3],
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn bad(path: &str, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        message: message.into(),
    }
}

/// Parse and validate. Syntax errors carry line and column, type errors the
/// path of the offending field.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        bad(&path, e.into_inner().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.spec_version != CONFIG_VERSION {
            return Err(bad(
                "spec_version",
                format!("unsupported version {}, expected {CONFIG_VERSION}", self.spec_version),
            ));
        }
        if self.domain.stages == 0 || self.domain.stages > MAX_STAGES {
            return Err(bad("domain.stages", format!("must be in 1..={MAX_STAGES}")));
        }
        if self.flux.iter().any(|v| !v.is_finite()) {
            return Err(bad("flux", "components must be finite"));
        }
        let disk = self.domain.tower == TowerKind::DiskTower;
        if disk && self.flux.iter().any(|v| *v != 0.0) {
            return Err(bad("flux", "a disk tower has no cycles; the flux must be zero"));
        }
        match &self.prescription {
            PrescriptionConfig::LogAbs if disk => {
                return Err(bad("prescription.h", "log-abs is singular at the origin; use an annulus tower"))
            }
            PrescriptionConfig::Custom { laurent } if disk && laurent.min_power() < 0 => {
                return Err(bad("prescription.laurent", "negative powers need an annulus tower"))
            }
            _ => {}
        }
        let expected = match &self.prescription {
            PrescriptionConfig::ReZ => 0.0,
            PrescriptionConfig::LogAbs => 2.0 * std::f64::consts::PI,
            PrescriptionConfig::Custom { laurent } => 2.0 * std::f64::consts::PI * laurent.coeff(-1).re,
        };
        check_flux3(expected, self.flux[2]).map_err(|e| bad("flux", e.to_string()))?;
        self.prescription().map_err(|e| bad("prescription", e.to_string()))?;
        let s = &self.solver;
        if s.degree == 0 || s.degree > MAX_DEGREE {
            return Err(bad("solver.degree", format!("must be in 1..={MAX_DEGREE}")));
        }
        if !(s.epsilon > 0.0 && s.epsilon <= 1.0) {
            return Err(bad("solver.epsilon", "must be in (0, 1]"));
        }
        if s.newton_max_iter == 0 || s.newton_max_iter > MAX_NEWTON {
            return Err(bad("solver.newton_max_iter", format!("must be in 1..={MAX_NEWTON}")));
        }
        if !(s.region_weight > 0.0 && s.region_weight.is_finite()) {
            return Err(bad("solver.region_weight", "must be positive"));
        }
        if s.max_rows == 0 {
            return Err(bad("solver.max_rows", "must be positive"));
        }
        for (name, [nr, na]) in [("grid.u", self.grid.u), ("grid.v", self.grid.v)] {
            if nr < 2 || na < 8 || nr.saturating_mul(na) > MAX_GRID_NODES {
                return Err(bad(
                    name,
                    format!("needs radial >= 2, angular >= 8 and at most {MAX_GRID_NODES} nodes"),
                ));
            }
        }
        Ok(())
    }

    pub fn prescription(&self) -> Result<HarmonicPrescription> {
        match &self.prescription {
            PrescriptionConfig::ReZ => Ok(HarmonicPrescription::re_z()),
            PrescriptionConfig::LogAbs => Ok(HarmonicPrescription::log_abs()),
            PrescriptionConfig::Custom { laurent } => HarmonicPrescription::custom(laurent.clone(), self.flux),
        }
        .map(|mut p| {
            p.flux = self.flux;
            p
        })
    }

    pub fn tower(&self) -> Result<ExhaustionTower> {
        make_exhaustion(self.domain.tower, self.domain.stages)
    }

    pub fn stage_settings(&self) -> StageSettings {
        let s = &self.solver;
        StageSettings {
            degree: s.degree,
            region_weight: s.region_weight,
            escalations: s.escalations,
            n_doublings: s.n_doublings,
            max_rows: s.max_rows,
            newton_max_iter: s.newton_max_iter,
            u_grid: (self.grid.u[0], self.grid.u[1]),
            v_grid: (self.grid.v[0], self.grid.v[1]),
            ..StageSettings::default()
        }
    }
}
