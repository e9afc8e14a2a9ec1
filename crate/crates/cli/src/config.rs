//! Run configuration: TOML file + repeated `--set key=value` overrides,
//! validated field-by-field before any computation.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use resb_core::gaussian::LossBudget;
use resb_core::lineshape::{load_tabulated, Family, LineshapeSpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub probe: ProbeConfig,
    pub losses: LossConfig,
    pub lineshape: LineshapeConfig,
    pub grid: GridConfig,
    pub output: OutputConfig,
    pub eqef: EqefConfig,
    pub verify: VerifyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            probe: ProbeConfig::default(),
            losses: LossConfig::default(),
            lineshape: LineshapeConfig::default(),
            grid: GridConfig::default(),
            output: OutputConfig::default(),
            eqef: EqefConfig::default(),
            verify: VerifyConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    /// Squeezing parameter of the bright two-mode squeezed probe.
    pub s: f64,
    /// Display-only photon number; curves and bounds are stored per photon.
    pub n_display: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { s: 2.0, n_display: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossConfig {
    pub eta_p1: f64,
    pub eta_p2: f64,
    pub eta_r: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self { eta_p1: 1.0, eta_p2: 1.0, eta_r: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LineshapeConfig {
    /// "lorentzian", "butterworth", or "tabulated".
    pub family: String,
    /// Butterworth order (ignored otherwise).
    pub m: u32,
    pub t_res: f64,
    pub t_off: f64,
    /// Two-column sample file for the tabulated family.
    pub path: String,
}

impl Default for LineshapeConfig {
    fn default() -> Self {
        Self { family: "lorentzian".into(), m: 1, t_res: 1.0, t_off: 0.0, path: String::new() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_step: f64,
    /// Side length of the (T_res, T_off) figure-of-merit map.
    pub map_n: usize,
    /// Squeezing sweep: `s_points` samples on [0, s_max].
    pub s_max: f64,
    pub s_points: usize,
    /// Sensor-transmission rows of the bounds table (inclusive of 0 and 1).
    pub t_points: usize,
    /// Samples per loss sweep.
    pub sweep_points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            lambda_min: -3.0,
            lambda_max: 3.0,
            lambda_step: 1e-3,
            map_n: 101,
            s_max: 3.0,
            s_points: 61,
            t_points: 21,
            sweep_points: 50,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory receiving all CSV/JSON artifacts.
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EqefConfig {
    /// "probe", "reference", or "both".
    pub sweep: String,
}

impl Default for EqefConfig {
    fn default() -> Self {
        Self { sweep: "both".into() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Bright photon number for the state-engine oracle comparison.
    pub n_bright: f64,
    pub phase_tol: f64,
    pub transmission_tol: f64,
    pub hd_tol: f64,
    pub coherent_tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            n_bright: 1e6,
            phase_tol: 1e-6,
            transmission_tol: 1e-3,
            hd_tol: 1e-10,
            coherent_tol: 1e-9,
        }
    }
}

impl RunConfig {
    /// Loads the optional TOML file, applies `--set key=value` overrides in
    /// order, and validates.
    pub fn load(path: Option<&str>, sets: &[String]) -> Result<Self> {
        let mut table: toml::Table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {p}"))?;
                text.parse().with_context(|| format!("parsing config {p}"))?
            }
            None => toml::Table::new(),
        };
        for set in sets {
            let (key, value) = set
                .split_once('=')
                .with_context(|| format!("--set {set:?}: expected key=value"))?;
            apply_set(&mut table, key.trim(), value.trim())
                .with_context(|| format!("--set {set:?}"))?;
        }
        let config: RunConfig = toml::Value::Table(table)
            .try_into()
            .context("config does not match the expected schema")?;
        config.validate()?;
        Ok(config)
    }

    /// Fails fast with a field-path message on the first out-of-range value.
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| -> Result<()> {
            if !(0.0..=1.0).contains(&v) {
                bail!("{name} = {v}: must lie in [0, 1]");
            }
            Ok(())
        };
        if !self.probe.s.is_finite() || self.probe.s < 0.0 {
            bail!("probe.s = {}: must be finite and >= 0", self.probe.s);
        }
        if !(self.probe.n_display.is_finite() && self.probe.n_display > 0.0) {
            bail!("probe.n_display = {}: must be finite and > 0", self.probe.n_display);
        }
        unit("losses.eta_p1", self.losses.eta_p1)?;
        unit("losses.eta_p2", self.losses.eta_p2)?;
        unit("losses.eta_r", self.losses.eta_r)?;
        if self.losses.eta_p1 == 0.0 || self.losses.eta_p2 == 0.0 || self.losses.eta_r == 0.0 {
            bail!("losses: external transmissions must be > 0");
        }
        match self.lineshape.family.as_str() {
            "lorentzian" | "butterworth" | "tabulated" => {}
            other => bail!("lineshape.family = {other:?}: expected lorentzian | butterworth | tabulated"),
        }
        if self.lineshape.family != "tabulated" {
            unit("lineshape.t_res", self.lineshape.t_res)?;
            unit("lineshape.t_off", self.lineshape.t_off)?;
            if self.lineshape.t_res == self.lineshape.t_off {
                bail!("lineshape: t_res must differ from t_off");
            }
        } else if self.lineshape.path.is_empty() {
            bail!("lineshape.path: required for the tabulated family");
        }
        if self.lineshape.family == "butterworth" && self.lineshape.m < 1 {
            bail!("lineshape.m = {}: must be >= 1", self.lineshape.m);
        }
        if !(self.grid.lambda_min < self.grid.lambda_max) {
            bail!(
                "grid.lambda_min = {} must be < grid.lambda_max = {}",
                self.grid.lambda_min,
                self.grid.lambda_max
            );
        }
        if !(self.grid.lambda_step > 0.0) {
            bail!("grid.lambda_step = {}: must be > 0", self.grid.lambda_step);
        }
        if self.grid.map_n < 2 {
            bail!("grid.map_n = {}: must be >= 2", self.grid.map_n);
        }
        if self.grid.s_points < 2 || !(self.grid.s_max > 0.0) {
            bail!("grid: s_points >= 2 and s_max > 0 required");
        }
        if self.grid.t_points < 2 {
            bail!("grid.t_points = {}: must be >= 2", self.grid.t_points);
        }
        if self.grid.sweep_points < 2 {
            bail!("grid.sweep_points = {}: must be >= 2", self.grid.sweep_points);
        }
        match self.eqef.sweep.as_str() {
            "probe" | "reference" | "both" => {}
            other => bail!("eqef.sweep = {other:?}: expected probe | reference | both"),
        }
        for (name, v) in [
            ("verify.n_bright", self.verify.n_bright),
            ("verify.phase_tol", self.verify.phase_tol),
            ("verify.transmission_tol", self.verify.transmission_tol),
            ("verify.hd_tol", self.verify.hd_tol),
            ("verify.coherent_tol", self.verify.coherent_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                bail!("{name} = {v}: must be finite and > 0");
            }
        }
        Ok(())
    }

    pub fn losses(&self) -> LossBudget {
        LossBudget { eta_p1: self.losses.eta_p1, eta_p2: self.losses.eta_p2, eta_r: self.losses.eta_r }
    }

    pub fn family(&self) -> Result<Family> {
        Ok(match self.lineshape.family.as_str() {
            "lorentzian" => Family::Lorentzian,
            "butterworth" => Family::Butterworth { m: self.lineshape.m },
            "tabulated" => {
                let text = std::fs::read_to_string(&self.lineshape.path)
                    .with_context(|| format!("reading lineshape.path {}", self.lineshape.path))?;
                match load_tabulated(&text)?.family {
                    f @ Family::Tabulated { .. } => f,
                    _ => unreachable!(),
                }
            }
            _ => unreachable!("validated"),
        })
    }

    pub fn lineshape_spec(&self) -> Result<LineshapeSpec> {
        if self.lineshape.family == "tabulated" {
            let text = std::fs::read_to_string(&self.lineshape.path)
                .with_context(|| format!("reading lineshape.path {}", self.lineshape.path))?;
            Ok(load_tabulated(&text)?)
        } else {
            Ok(LineshapeSpec::new(self.family()?, self.lineshape.t_res, self.lineshape.t_off)?)
        }
    }

    pub fn lambda_grid(&self) -> Vec<f64> {
        let n = ((self.grid.lambda_max - self.grid.lambda_min) / self.grid.lambda_step).round() as usize;
        (0..=n).map(|i| self.grid.lambda_min + self.grid.lambda_step * i as f64).collect()
    }
}

/// Writes one dotted-path override into the TOML tree, parsing the value as
/// TOML where possible and falling back to a string.
fn apply_set(table: &mut toml::Table, key: &str, value: &str) -> Result<()> {
    let mut parts = key.split('.').collect::<Vec<_>>();
    if parts.iter().any(|p| p.is_empty()) {
        bail!("empty path segment in key {key:?}");
    }
    let last = parts.pop().unwrap();
    let mut node = table;
    for part in parts {
        node = node
            .entry(part.to_string())
            .or_insert(toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .with_context(|| format!("{part:?} is not a table"))?;
    }
    // parse through a one-line document so bare scalars get TOML types;
    // anything unparseable falls back to a string
    let parsed = format!("v = {value}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    node.insert(last.to_string(), parsed);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn set_overrides_nested_keys() {
        let cfg = RunConfig::load(
            None,
            &["probe.s=1.5".into(), "lineshape.family=butterworth".into(), "lineshape.m=3".into()],
        )
        .unwrap();
        assert_eq!(cfg.probe.s, 1.5);
        assert_eq!(cfg.lineshape.family, "butterworth");
        assert_eq!(cfg.lineshape.m, 3);
    }

    #[test]
    fn invalid_field_names_the_path() {
        let err = RunConfig::load(None, &["losses.eta_p1=1.5".into()]).unwrap_err();
        assert!(err.to_string().contains("losses.eta_p1"), "{err}");
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::load(None, &["probe.tyop=1".into()]).is_err());
    }
}
