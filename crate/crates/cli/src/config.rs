//! Run configuration: TOML with unit-suffixed keys, plus `--set` overrides.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wgm_qed::dynamics::{Direction, PrepModel, PulsePrep};
use wgm_qed::metrics::EmitterInputs;
use wgm_qed::quantum::DeviceParams;
use wgm_qed::units::{from_ghz, from_mhz};

use crate::failure::Failure;

pub const DEFAULT_CONFIG: &str = include_str!("default_config.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub device: DeviceSection,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub prep: PrepSection,
    #[serde(default)]
    pub fit: FitSection,
    #[serde(default)]
    pub metrics: MetricsSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSection {
    pub omega0_over_2pi_ghz: f64,
    pub kappa_over_2pi_ghz: f64,
    pub kappa_c_over_2pi_ghz: f64,
    pub kappa_d_over_2pi_ghz: f64,
    pub g1_over_2pi_mhz: f64,
    pub g2_over_2pi_mhz: f64,
    pub tau1_ns: f64,
    pub tau2_ns: f64,
    pub gamma_d1_over_2pi_mhz: f64,
    pub gamma_d2_over_2pi_mhz: f64,
    pub delta_over_2pi_ghz: f64,
    pub detuning_over_2pi_ghz: f64,
    pub theta_over_pi: f64,
    pub phi_over_pi: f64,
    pub alpha_port: f64,
}

fn decay_rate(tau_ns: f64, key: &str) -> Result<f64, Failure> {
    if tau_ns.is_infinite() && tau_ns > 0.0 {
        Ok(0.0)
    } else if tau_ns > 0.0 {
        Ok(1.0 / tau_ns)
    } else {
        Err(Failure::config(format!("device.{key} must be > 0 (or inf), got {tau_ns}")))
    }
}

impl DeviceSection {
    pub fn params(&self) -> Result<DeviceParams, Failure> {
        let p = DeviceParams {
            omega0: from_ghz(self.omega0_over_2pi_ghz),
            kappa: from_ghz(self.kappa_over_2pi_ghz),
            kappa_c: from_ghz(self.kappa_c_over_2pi_ghz),
            kappa_d: from_ghz(self.kappa_d_over_2pi_ghz),
            g1: from_mhz(self.g1_over_2pi_mhz),
            g2: from_mhz(self.g2_over_2pi_mhz),
            gamma1: decay_rate(self.tau1_ns, "tau1_ns")?,
            gamma2: decay_rate(self.tau2_ns, "tau2_ns")?,
            gamma_d1: from_mhz(self.gamma_d1_over_2pi_mhz),
            gamma_d2: from_mhz(self.gamma_d2_over_2pi_mhz),
            delta: from_ghz(self.delta_over_2pi_ghz),
            detuning: from_ghz(self.detuning_over_2pi_ghz),
            theta: self.theta_over_pi * PI,
            phi: self.phi_over_pi * PI,
            alpha_port: self.alpha_port,
        };
        p.validate().map_err(|e| Failure::config(format!("[device]: {e}")))?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum G2Model {
    /// Emitters only, cavity eliminated.
    #[default]
    BadCavity,
    /// Full emitter–mode master equation at `n_max`.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSection {
    pub n_max: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt_ns: Option<f64>,
    pub t_end_ns: f64,
    pub strict_step: bool,
    /// Incoherent pump for correlation runs; defaults to 1% of emitter 1's decay.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pump_rate_per_ns: Option<f64>,
    pub grid_start_ghz: f64,
    pub grid_stop_ghz: f64,
    pub grid_points: usize,
    pub tau_max_ns: f64,
    pub tau_step_ns: f64,
    pub g2_model: G2Model,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            n_max: 2,
            dt_ns: None,
            t_end_ns: 60.0,
            strict_step: true,
            pump_rate_per_ns: None,
            grid_start_ghz: -3.0,
            grid_stop_ghz: 3.0,
            grid_points: 601,
            tau_max_ns: 20.0,
            tau_step_ns: 0.1,
            g2_model: G2Model::BadCavity,
        }
    }
}

impl SimulationSection {
    pub fn frequency_grid(&self) -> Result<Vec<f64>, Failure> {
        let (a, b, n) = (self.grid_start_ghz, self.grid_stop_ghz, self.grid_points);
        if n == 0 || !a.is_finite() || !b.is_finite() {
            return Err(Failure::config("simulation.grid_points must be >= 1 with finite limits"));
        }
        if n == 1 {
            return Ok(vec![a]);
        }
        if !(b > a) {
            return Err(Failure::config("simulation.grid_stop_ghz must exceed grid_start_ghz"));
        }
        Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect())
    }

    pub fn tau_grid(&self) -> Result<Vec<f64>, Failure> {
        let (max, step) = (self.tau_max_ns, self.tau_step_ns);
        if !(max >= 0.0 && max.is_finite()) {
            return Err(Failure::config("simulation.tau_max_ns must be finite and >= 0"));
        }
        if max == 0.0 {
            return Ok(vec![0.0]);
        }
        if !(step > 0.0) {
            return Err(Failure::config("simulation.tau_step_ns must be > 0"));
        }
        let n = (max / step + 1e-9).floor() as usize;
        Ok((0..=n).map(|k| k as f64 * step).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PrepSection {
    pub p_bright: f64,
    pub p_excite: f64,
    /// Relative excitation phase; when absent it follows from the emitter
    /// positions and the pulse direction.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_phase_rad: Option<f64>,
    pub direction: Direction,
    pub model: PrepModel,
    pub p_excite_sweep: Vec<f64>,
}

impl Default for PrepSection {
    fn default() -> Self {
        Self {
            p_bright: 1.0,
            p_excite: 0.1,
            rel_phase_rad: None,
            direction: Direction::Cw,
            model: PrepModel::Weak,
            p_excite_sweep: vec![0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0],
        }
    }
}

impl PrepSection {
    pub fn pulse(&self, device: &DeviceParams) -> Result<PulsePrep, Failure> {
        let rel_phase = self
            .rel_phase_rad
            .unwrap_or_else(|| PulsePrep::imprinted_phase(device.theta, device.phi, Direction::Cw));
        let prep = PulsePrep {
            p_bright: self.p_bright,
            p_excite: self.p_excite,
            rel_phase,
            direction: self.direction,
        };
        prep.validate().map_err(|e| Failure::config(format!("[prep]: {e}")))?;
        Ok(prep)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitKind {
    /// Cavity/Fano fit of the wide scan, then the DIT fit of the close scan.
    #[default]
    Staged,
    Lorentzian,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitSection {
    pub model: FitKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wide_scan: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub close_scan: Option<PathBuf>,
    /// A cavity fit from an earlier run, used when `wide_scan` is absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fano_result: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ple_scan: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsSection {
    /// CSV with the columns of [`wgm_qed::metrics::EMITTER_CSV_HEADER`];
    /// replaces `emitters` when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub emitter_table: Option<PathBuf>,
    pub tau_radiative_ns: f64,
    pub debye_waller: f64,
    pub emitters: Vec<EmitterInputs>,
}

impl Default for MetricsSection {
    fn default() -> Self {
        Self {
            emitter_table: None,
            tau_radiative_ns: 15.9,
            debye_waller: 0.085,
            emitters: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    #[default]
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub format: Format,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("wgmqed-out"),
            format: Format::Both,
        }
    }
}

/// Parse `value` as a TOML value, falling back to a bare string.
fn parse_override_value(value: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {value}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()))
}

/// Apply one `section.key=value` override to a raw document.
pub fn apply_override(doc: &mut toml::Table, assignment: &str) -> Result<(), Failure> {
    let (path, value) = assignment
        .split_once('=')
        .ok_or_else(|| Failure::config(format!("--set expects key=value, got `{assignment}`")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Failure::config(format!("--set: malformed key `{path}`")));
    }
    let mut table = doc;
    for key in &keys[..keys.len() - 1] {
        let entry = table
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| Failure::config(format!("--set: `{key}` is not a section")))?;
    }
    table.insert(keys[keys.len() - 1].to_string(), parse_override_value(value.trim()));
    Ok(())
}

/// Load the config file (or the built-in default), apply overrides and
/// validate the schema.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, Failure> {
    let (text, origin) = match path {
        Some(p) => (
            std::fs::read_to_string(p).map_err(|e| Failure::io(format!("{}: {e}", p.display())))?,
            p.display().to_string(),
        ),
        None => (DEFAULT_CONFIG.to_string(), "built-in default".to_string()),
    };
    let mut doc: toml::Table =
        toml::from_str(&text).map_err(|e| Failure::config(format!("{origin}: {e}")))?;
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    let cfg: RunConfig = toml::Value::Table(doc)
        .try_into()
        .map_err(|e: toml::de::Error| Failure::config(format!("{origin}: {}", e.message())))?;
    cfg.device.params()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }
}
