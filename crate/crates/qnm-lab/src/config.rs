//! Experiment configuration files (TOML).
//!
//! Every physical quantity carries its unit in the key name. Unknown keys are
//! rejected in every section.

use std::collections::BTreeMap;
use std::path::PathBuf;

use qnm_core::{MaterialModel, Polarization, C64};
use serde::Deserialize;

use crate::LabError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub experiment: String,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub material: BTreeMap<String, MaterialSpec>,
    pub sphere: Option<SphereSection>,
    pub slab: Option<SlabSection>,
    pub sweep: Option<SweepSection>,
    pub expansion: Option<ExpansionSection>,
    pub fdfd: Option<FdfdSection>,
    pub revelation: Option<RevelationSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MaterialSpec {
    Nondispersive {
        eps_re: f64,
        #[serde(default)]
        eps_im: f64,
        #[serde(default = "one")]
        mu_re: f64,
        #[serde(default)]
        mu_im: f64,
    },
    Drude {
        eps_inf: f64,
        omega_p_rad_s: f64,
        gamma_rad_s: f64,
    },
    Lorentz {
        eps_inf: f64,
        omega_p_rad_s: f64,
        omega_0_rad_s: f64,
        gamma_rad_s: f64,
    },
    #[serde(rename = "silver-arc10")]
    SilverArc10,
}

fn one() -> f64 {
    1.0
}

impl MaterialSpec {
    pub fn model(&self) -> MaterialModel {
        match *self {
            MaterialSpec::Nondispersive { eps_re, eps_im, mu_re, mu_im } => {
                MaterialModel::NonDispersive { eps_r: C64::new(eps_re, eps_im), mu_r: C64::new(mu_re, mu_im) }
            }
            MaterialSpec::Drude { eps_inf, omega_p_rad_s, gamma_rad_s } => {
                MaterialModel::Drude { eps_inf, omega_p: omega_p_rad_s, gamma: gamma_rad_s }
            }
            MaterialSpec::Lorentz { eps_inf, omega_p_rad_s, omega_0_rad_s, gamma_rad_s } => MaterialModel::Lorentz {
                eps_inf,
                omega_p: omega_p_rad_s,
                omega_0: omega_0_rad_s,
                gamma: gamma_rad_s,
            },
            MaterialSpec::SilverArc10 => MaterialModel::silver_arc10(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum Pol {
    TM,
    TE,
}

impl From<Pol> for Polarization {
    fn from(p: Pol) -> Self {
        match p {
            Pol::TM => Polarization::TM,
            Pol::TE => Polarization::TE,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereSection {
    pub radius_nm: f64,
    pub material: String,
    /// Multipole order.
    #[serde(default = "one_usize")]
    pub l: usize,
    #[serde(default = "tm")]
    pub polarization: Pol,
    /// The mode whose Re λ is closest to this is used.
    pub target_wavelength_nm: f64,
}

fn one_usize() -> usize {
    1
}

fn tm() -> Pol {
    Pol::TM
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub radii_nm: Vec<f64>,
    #[serde(default = "all_methods")]
    pub methods: Vec<String>,
    /// PML slopes α as [re, im] pairs.
    #[serde(default = "default_alphas")]
    pub pml_alphas: Vec<[f64; 2]>,
    #[serde(default = "default_pml_thickness")]
    pub pml_thickness_nm: f64,
    pub fd_step_nm: Option<f64>,
    pub source_radius_nm: Option<f64>,
    pub reference_radius_nm: Option<f64>,
}

fn all_methods() -> Vec<String> {
    ["PML", "LK", "M_exact", "M_fd", "PoleResponse"].iter().map(|s| s.to_string()).collect()
}

fn default_alphas() -> Vec<[f64; 2]> {
    vec![[1.0, 0.5]]
}

fn default_pml_thickness() -> f64 {
    4000.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlabSection {
    pub thickness_nm: f64,
    pub index: Option<f64>,
    /// Name of a Lorentz material; replaces `index` in the 1D solver.
    pub material: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpansionSection {
    pub omega_rad_s: f64,
    pub source_x_nm: f64,
    /// Numbers of pole pairs M.
    pub pairs: Vec<usize>,
    pub x_nm: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdfdSection {
    pub cells_per_slab: usize,
    pub pad_nm: f64,
    pub pml_thickness_nm: f64,
    #[serde(default)]
    pub ramp_nm: f64,
    /// Coordinate stretch f as [re, im].
    pub stretch: Option<[f64; 2]>,
    /// Second layer used to tell QNMs from numerical modes.
    pub classify_stretch: Option<[f64; 2]>,
    pub classify_pml_thickness_nm: Option<f64>,
    #[serde(default = "default_tol")]
    pub classify_tol: f64,
    pub source_x_nm: Option<f64>,
    pub drive_omega_rad_s: Option<f64>,
    #[serde(default)]
    pub omegas_rad_s: Vec<f64>,
}

fn default_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RevelationSection {
    pub m_max: usize,
    pub settings: Vec<RevelationEntry>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RevelationEntry {
    pub tan_theta: f64,
    /// Stretch modulus of the main run.
    pub g: f64,
    /// Stretch modulus of the stability check.
    pub g2: f64,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, LabError> {
        toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn material(&self, name: &str) -> Result<MaterialModel, LabError> {
        let spec = self
            .material
            .get(name)
            .ok_or_else(|| LabError::Config(format!("material `{name}` is not defined")))?;
        let m = spec.model();
        m.validate().map_err(|e| LabError::Config(format!("material `{name}`: {e}")))?;
        Ok(m)
    }
}

pub fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T, LabError> {
    s.as_ref().ok_or_else(|| LabError::Config(format!("missing section [{name}]")))
}

pub fn key<T: Copy>(v: Option<T>, section: &str, name: &str) -> Result<T, LabError> {
    v.ok_or_else(|| LabError::Config(format!("missing key `{name}` in [{section}]")))
}
