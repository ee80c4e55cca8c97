//! Flat key = value experiment configuration. One assignment per line,
//! `#` starts a comment, no nesting. Unknown keys are rejected so typos fail
//! loudly instead of silently falling back to defaults.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::bloch::{DissipatorParams, S0Mode};
use crate::error::{Error, Result};
use crate::model::SpinModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    SteadyState,
    Toy,
    Fig2,
    Fig3b,
    Fig3c,
    Fig3def,
    Chern,
    Bounds,
    Estimate,
}

impl Experiment {
    fn parse(value: &str) -> Result<Self> {
        Ok(match value {
            "steady-state" => Self::SteadyState,
            "toy" => Self::Toy,
            "fig2" => Self::Fig2,
            "fig3b" => Self::Fig3b,
            "fig3c" => Self::Fig3c,
            "fig3def" => Self::Fig3def,
            "chern" => Self::Chern,
            "bounds" => Self::Bounds,
            "estimate" => Self::Estimate,
            other => {
                return Err(Error::Config(format!(
                    "experiment: unknown value \"{other}\""
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::SteadyState => "steady-state",
            Self::Toy => "toy",
            Self::Fig2 => "fig2",
            Self::Fig3b => "fig3b",
            Self::Fig3c => "fig3c",
            Self::Fig3def => "fig3def",
            Self::Chern => "chern",
            Self::Bounds => "bounds",
            Self::Estimate => "estimate",
        }
    }
}

/// Fully resolved experiment configuration with defaults applied.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    // Model.
    pub b11: f64,
    pub b12: f64,
    pub b21: f64,
    pub b22: f64,
    pub theta: f64,
    pub phi: f64,
    pub m: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub fixed_gap: Option<f64>,
    // Dissipator.
    pub tau1: f64,
    pub tau2: f64,
    pub s0_mode: S0Mode,
    // Numerics.
    pub n_grid: usize,
    pub n_per_period: usize,
    pub rtol: f64,
    // Sweeps.
    pub m_start: f64,
    pub m_stop: f64,
    pub m_step: f64,
    pub phi_start: f64,
    pub phi_stop: f64,
    pub phi_step: f64,
    pub m_values: Vec<f64>,
    pub n_min: u32,
    pub n_max: u32,
    pub delta_tau2_values: Vec<f64>,
    // Physical estimate.
    pub field_amplitude: f64,
    pub est_tau2: f64,
    pub chern: i64,
    pub n_atoms: u64,
    // Output.
    pub output: PathBuf,
}

const KNOWN_KEYS: &[&str] = &[
    "experiment",
    "b11",
    "b12",
    "b21",
    "b22",
    "theta",
    "phi",
    "m",
    "omega1",
    "omega2",
    "fixed_gap",
    "tau1",
    "tau2",
    "s0_mode",
    "beta",
    "n_grid",
    "n_per_period",
    "rtol",
    "m_start",
    "m_stop",
    "m_step",
    "phi_start",
    "phi_stop",
    "phi_step",
    "m_values",
    "n_min",
    "n_max",
    "delta_tau2_values",
    "field_amplitude",
    "est_tau2",
    "chern",
    "n_atoms",
    "output",
];

fn parse_lines(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!(
                "line {}: expected key = value, got \"{line}\"",
                idx + 1
            ))
        })?;
        let key = key.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("unknown key \"{key}\"")));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(Error::Config(format!("duplicate key \"{key}\"")));
        }
    }
    Ok(map)
}

struct Raw(BTreeMap<String, String>);

impl Raw {
    fn f64_opt(&self, key: &str) -> Result<Option<f64>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => {
                let x: f64 = v
                    .parse()
                    .map_err(|_| Error::Config(format!("{key}: not a number: \"{v}\"")))?;
                if !x.is_finite() {
                    return Err(Error::Config(format!("{key}: must be finite, got {v}")));
                }
                Ok(Some(x))
            }
        }
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("{key}: not an integer: \"{v}\""))),
        }
    }

    fn i64_or(&self, key: &str, default: i64) -> Result<i64> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("{key}: not an integer: \"{v}\""))),
        }
    }

    fn u32_or(&self, key: &str, default: u32) -> Result<u32> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("{key}: not an integer: \"{v}\""))),
        }
    }

    fn list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.0.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => {
                let values: Vec<f64> = v
                    .split(',')
                    .map(|s| {
                        s.trim().parse().map_err(|_| {
                            Error::Config(format!("{key}: not a number: \"{}\"", s.trim()))
                        })
                    })
                    .collect::<Result<_>>()?;
                if values.is_empty() {
                    return Err(Error::Config(format!("{key}: empty list")));
                }
                Ok(values)
            }
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let raw = Raw(parse_lines(text)?);
        let experiment = Experiment::parse(
            raw.0
                .get("experiment")
                .ok_or_else(|| Error::Config("missing key \"experiment\"".into()))?,
        )?;

        let tau2 = raw.f64_or("tau2", 10.0)?;
        let tau1 = raw.f64_or("tau1", tau2)?;
        let s0_mode = match raw.0.get("s0_mode").map(String::as_str) {
            None | Some("unity") => S0Mode::Unity,
            Some("thermal") => {
                let beta = raw
                    .f64_opt("beta")?
                    .ok_or_else(|| Error::Config("s0_mode = thermal requires \"beta\"".into()))?;
                S0Mode::Thermal { beta }
            }
            Some(other) => {
                return Err(Error::Config(format!("s0_mode: unknown value \"{other}\"")))
            }
        };

        let n_grid = raw.usize_or("n_grid", 256)?;
        if n_grid < 8 {
            return Err(Error::Config(format!("n_grid: must be >= 8, got {n_grid}")));
        }

        // The required keys depend on the experiment; sweep defaults below
        // reproduce the figure configurations. The chern mass grid is offset
        // by half a step so it never lands exactly on a gap closure.
        let config = Self {
            experiment,
            b11: raw.f64_or("b11", 1.0)?,
            b12: raw.f64_or("b12", 0.5)?,
            b21: raw.f64_or("b21", 0.5)?,
            b22: raw.f64_or("b22", 1.0)?,
            theta: raw.f64_or("theta", 0.0)?,
            phi: raw.f64_or("phi", 0.0)?,
            m: raw.f64_or("m", 1.0)?,
            omega1: raw.f64_or("omega1", 1.0)?,
            omega2: raw.f64_or("omega2", 0.618_033_988_749_894_9)?,
            fixed_gap: raw.f64_opt("fixed_gap")?,
            tau1,
            tau2,
            s0_mode,
            n_grid,
            n_per_period: raw.usize_or("n_per_period", 400)?,
            rtol: raw.f64_or("rtol", 1e-9)?,
            m_start: raw.f64_or("m_start", -1.975)?,
            m_stop: raw.f64_or("m_stop", 2.0)?,
            m_step: raw.f64_or("m_step", 0.05)?,
            phi_start: raw.f64_or("phi_start", 0.0)?,
            phi_stop: raw.f64_or("phi_stop", std::f64::consts::TAU)?,
            phi_step: raw.f64_or("phi_step", std::f64::consts::TAU / 40.0)?,
            m_values: raw.list_or("m_values", &[0.25, 1.0, 2.0])?,
            n_min: raw.u32_or("n_min", 2)?,
            n_max: raw.u32_or("n_max", 20)?,
            delta_tau2_values: raw.list_or("delta_tau2_values", &[0.1, 1.0, 10.0, 100.0])?,
            field_amplitude: raw.f64_or("field_amplitude", 0.0)?,
            est_tau2: raw.f64_or("est_tau2", 0.0)?,
            chern: raw.i64_or("chern", 1)?,
            n_atoms: raw.u32_or("n_atoms", 1)? as u64,
            output: PathBuf::from(
                raw.0
                    .get("output")
                    .cloned()
                    .unwrap_or_else(|| format!("{}.csv", experiment.name())),
            ),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if self.m_step <= 0.0 {
            return Err(Error::Config(format!(
                "m_step: must be > 0, got {}",
                self.m_step
            )));
        }
        if self.phi_step <= 0.0 {
            return Err(Error::Config(format!(
                "phi_step: must be > 0, got {}",
                self.phi_step
            )));
        }
        if self.n_min < 1 || self.n_max < self.n_min {
            return Err(Error::Config(format!(
                "n_min/n_max: need 1 <= n_min <= n_max, got {}..{}",
                self.n_min, self.n_max
            )));
        }
        if self.experiment == Experiment::Estimate {
            for (key, value) in [
                ("field_amplitude", self.field_amplitude),
                ("omega1", self.omega1),
                ("omega2", self.omega2),
                ("est_tau2", self.est_tau2),
            ] {
                if !(value > 0.0) {
                    return Err(Error::Config(format!(
                        "{key}: estimate requires a positive value, got {value}"
                    )));
                }
            }
        }
        if self.n_per_period < 8 {
            return Err(Error::Config(format!(
                "n_per_period: must be >= 8, got {}",
                self.n_per_period
            )));
        }
        Ok(())
    }

    pub fn dissipator(&self) -> Result<DissipatorParams> {
        DissipatorParams::new(self.tau1, self.tau2, self.s0_mode)
            .map_err(|e| Error::Config(format!("tau1/tau2: {e}")))
    }

    /// Spin model at the config's (m, theta, phi); sweeps override per point.
    pub fn model(&self, m: f64, phi: f64) -> Result<SpinModel> {
        let model = SpinModel::two_tone(
            self.b11,
            self.b12,
            self.b21,
            self.b22,
            m,
            self.theta,
            phi,
            self.omega1,
            self.omega2,
        )?;
        match self.fixed_gap {
            Some(delta0) => model.with_fixed_gap(delta0),
            None => Ok(model),
        }
    }

    /// Inclusive sweep values start, start+step, ..., stop (the end point is
    /// kept up to a 1e-6-step rounding slack).
    pub fn sweep(start: f64, stop: f64, step: f64) -> Vec<f64> {
        let mut values = Vec::new();
        let mut k = 0u32;
        loop {
            let x = start + f64::from(k) * step;
            if x > stop + 1e-6 * step {
                break;
            }
            values.push(x);
            k += 1;
        }
        values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ExperimentConfig::parse("experiment = fig2\n").unwrap();
        assert_eq!(c.experiment, Experiment::Fig2);
        assert_eq!(c.n_grid, 256);
        assert_eq!(c.tau1, 10.0);
        assert_eq!(c.m_values, vec![0.25, 1.0, 2.0]);
        assert_eq!(c.output, PathBuf::from("fig2.csv"));
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let c = ExperimentConfig::parse(
            "# figure 2 reproduction\nexperiment = fig2\ntau2 = 5.0 # override\n\n",
        )
        .unwrap();
        assert_eq!(c.tau2, 5.0);
        assert_eq!(c.tau1, 5.0, "tau1 defaults to tau2");
    }

    #[test]
    fn errors_name_the_offending_key() {
        let err = ExperimentConfig::parse("experiment = fig2\nomega1 = fast\n").unwrap_err();
        assert!(err.to_string().contains("omega1"), "{err}");

        let err = ExperimentConfig::parse("experiment = fig2\nomega_one = 1\n").unwrap_err();
        assert!(err.to_string().contains("omega_one"), "{err}");

        let err = ExperimentConfig::parse("tau2 = 1\n").unwrap_err();
        assert!(err.to_string().contains("experiment"), "{err}");

        let err = ExperimentConfig::parse("experiment = estimate\n").unwrap_err();
        assert!(err.to_string().contains("field_amplitude"), "{err}");
    }

    #[test]
    fn duplicate_key_rejected() {
        let err = ExperimentConfig::parse("experiment = toy\nexperiment = fig2\n").unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn sweep_generation_inclusive() {
        let v = ExperimentConfig::sweep(0.0, 1.0, 0.25);
        assert_eq!(v, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let v = ExperimentConfig::sweep(-1.975, 2.0, 0.05);
        assert_eq!(v.len(), 80);
        assert!(v.iter().all(|&m| (m - 0.5).abs() > 0.02));
    }

    #[test]
    fn thermal_mode_requires_beta() {
        let err = ExperimentConfig::parse("experiment = toy\ns0_mode = thermal\n").unwrap_err();
        assert!(err.to_string().contains("beta"), "{err}");
        let c =
            ExperimentConfig::parse("experiment = toy\ns0_mode = thermal\nbeta = 2.0\n").unwrap();
        assert_eq!(c.s0_mode, S0Mode::Thermal { beta: 2.0 });
    }
}
