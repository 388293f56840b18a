//! Experiment configuration: a JSON file with every field optional, and
//! command-line overrides applied on top.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use thermocoding::source::epsilon_window;
use thermocoding::{CodingSetup, KeptQubits, PlanOptions, QubitSource, StateVector, ThermalProbe, C64};

/// One amplitude, `[re, im]`.
pub type Amp = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    /// Two letters, each a pair of amplitudes (normalized on load).
    pub letters: Vec<[Amp; 2]>,
    pub probs: Vec<f64>,
}

impl Default for SourceConfig {
    fn default() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self { letters: vec![[[1.0, 0.0], [0.0, 0.0]], [[h, 0.0], [h, 0.0]]], probs: vec![0.5, 0.5] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum KeptConfig {
    Minimal,
    EntropyFormula,
    Explicit(usize),
}

impl From<KeptConfig> for KeptQubits {
    fn from(k: KeptConfig) -> Self {
        match k {
            KeptConfig::Minimal => KeptQubits::Minimal,
            KeptConfig::EntropyFormula => KeptQubits::EntropyFormula,
            KeptConfig::Explicit(m) => KeptQubits::Explicit(m),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub d: usize,
    pub beta: f64,
    /// Explicit ascending levels; otherwise `[-1, 1]` for `d = 2` and
    /// `i·gap` above that.
    pub energies: Option<Vec<f64>>,
    pub gap: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { d: 2, beta: 1.0, energies: None, gap: 1.0 }
    }
}

impl ProbeConfig {
    pub fn probe_at(&self, d: usize, beta: f64) -> thermocoding::Result<ThermalProbe> {
        match (&self.energies, d) {
            (Some(e), _) if e.len() == d => ThermalProbe::new(e.clone(), beta),
            (_, 2) => ThermalProbe::qubit(beta),
            _ => ThermalProbe::equally_spaced(d, beta, self.gap),
        }
    }

    pub fn probe(&self) -> thermocoding::Result<ThermalProbe> {
        self.probe_at(self.d, self.beta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub source: SourceConfig,
    pub n: usize,
    /// Defaults to the middle of the window that makes the typical set the
    /// eigen-strings with at most one minority letter.
    pub epsilon: Option<f64>,
    pub kept: KeptConfig,
    pub probe: ProbeConfig,
    pub probe_beta_grid: Vec<f64>,
    pub probe_dim_grid: Vec<usize>,
    pub clock_tau: f64,
    pub clock_sigma_grid: Vec<f64>,
    pub append_eta_grid: Vec<f64>,
    pub append_beta_grid: Vec<f64>,
    /// Appended-qubit counts for the append sweeps (each in `0..=5`).
    pub append_j: Vec<usize>,
    pub cooling_steps: Vec<u64>,
    pub cooling_kappa: Vec<f64>,
    pub seed: u64,
    pub samples: usize,
    pub output: Option<PathBuf>,
}

/// Evenly spaced grid, rounded to 12 decimals so `0.1 * 3` prints as `0.3`.
fn linspace(start: f64, step: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| ((start + step * i as f64) * 1e12).round() / 1e12).collect()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            source: SourceConfig::default(),
            n: 3,
            epsilon: None,
            kept: KeptConfig::Minimal,
            probe: ProbeConfig::default(),
            probe_beta_grid: linspace(0.0, 0.25, 21),
            probe_dim_grid: vec![2, 4, 8, 16],
            clock_tau: 1.0,
            clock_sigma_grid: linspace(0.0, 0.1, 21),
            append_eta_grid: linspace(0.0, 0.05, 11),
            append_beta_grid: linspace(0.0, 0.25, 21),
            append_j: vec![1, 2, 3],
            cooling_steps: (1..=20).map(|i| 5 * i).collect(),
            cooling_kappa: linspace(0.05, 0.05, 20),
            seed: 0,
            samples: 10_000,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let grids: [(&str, usize); 9] = [
            ("probe_beta_grid", self.probe_beta_grid.len()),
            ("probe_dim_grid", self.probe_dim_grid.len()),
            ("clock_sigma_grid", self.clock_sigma_grid.len()),
            ("append_eta_grid", self.append_eta_grid.len()),
            ("append_beta_grid", self.append_beta_grid.len()),
            ("append_j", self.append_j.len()),
            ("cooling_steps", self.cooling_steps.len()),
            ("cooling_kappa", self.cooling_kappa.len()),
            ("source.letters", self.source.letters.len()),
        ];
        for (name, len) in grids {
            if len == 0 {
                bail!("{name} must not be empty");
            }
        }
        if self.samples < 100 {
            bail!("samples = {} is too small (need at least 100)", self.samples);
        }
        if let Some(&j) = self.append_j.iter().find(|&&j| j > 5) {
            bail!("append_j entry {j} outside 0..=5");
        }
        Ok(())
    }

    pub fn source(&self) -> Result<QubitSource> {
        let letters = self
            .source
            .letters
            .iter()
            .map(|[a, b]| StateVector::new(vec![C64::new(a[0], a[1]), C64::new(b[0], b[1])]))
            .collect::<thermocoding::Result<Vec<_>>>()?;
        Ok(QubitSource::new(letters, self.source.probs.clone())?)
    }

    pub fn epsilon_for(&self, src: &QubitSource, n: usize) -> Result<f64> {
        if let Some(eps) = self.epsilon {
            return Ok(eps);
        }
        let (lo, hi) = epsilon_window(src, n, &[0, 1])
            .with_context(|| format!("no default epsilon at n = {n}; set \"epsilon\" explicitly"))?;
        Ok(0.5 * (lo + hi))
    }

    pub fn setup(&self) -> Result<CodingSetup> {
        let src = self.source()?;
        let eps = self.epsilon_for(&src, self.n)?;
        let options = PlanOptions { kept: self.kept.into(), ..PlanOptions::default() };
        Ok(CodingSetup::new(src, self.n, eps, &options)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_json() {
        let cfg = ExperimentConfig::default();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
        cfg.validate().unwrap();
    }

    #[test]
    fn partial_files_fill_in_defaults() {
        let cfg: ExperimentConfig = serde_json::from_str(r#"{"n": 4, "seed": 9, "kept": {"explicit": 3}}"#).unwrap();
        assert_eq!(cfg.n, 4);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.kept, KeptConfig::Explicit(3));
        assert_eq!(cfg.probe_dim_grid, vec![2, 4, 8, 16]);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"nn": 4}"#).is_err());
    }

    #[test]
    fn default_setup_is_the_four_string_example() {
        let s = ExperimentConfig::default().setup().unwrap();
        assert_eq!(s.spec.typical_strings.len(), 4);
        assert_eq!(s.plan.discarded, 1);
    }

    #[test]
    fn empty_grid_rejected() {
        let cfg = ExperimentConfig { clock_sigma_grid: vec![], ..Default::default() };
        assert!(cfg.validate().is_err());
    }
}
