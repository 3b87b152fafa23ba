//! Run configuration: a flat key-value file with one section per module.
//!
//! ```text
//! [profiles]
//! p = 6
//!
//! [grid]
//! L = 40.0
//! N = 1024
//!
//! [evolve]
//! dt = 1e-4
//!
//! [experiments]
//! amplitude = -1.0
//! k_max = 6
//! ```
//!
//! Missing keys take their defaults, unknown keys are rejected. Values given
//! on the command line or through `GKDV_*` environment variables are applied
//! on top with [`RunConfig::apply`].

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{Scenario, SolverParams};
use crate::grid::Grid;
use crate::linop::SpectralTolerances;

/// Prefix of the environment variables read by the `gkdv` binary.
pub const ENV_PREFIX: &str = "GKDV_";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfilesSection {
    pub p: u32,
    /// Soliton speed used by `evolve`.
    pub c: f64,
}

impl Default for ProfilesSection {
    fn default() -> Self {
        Self { p: 6, c: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    #[serde(rename = "L")]
    pub half_length: f64,
    #[serde(rename = "N")]
    pub n_points: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            half_length: 40.0,
            n_points: 1024,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_spacing: Option<f64>,
}

/// Scenario parameters. Unset keys keep the scenario's own defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentsSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign: Option<i32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    /// Speed of the rescaled run in the scaling scenario.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scaling_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Spectral cache directory; `None` means `<dir>/cache`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cache: Option<PathBuf>,
    pub plots: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("gkdv-out"),
            cache: None,
            plots: true,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub profiles: ProfilesSection,
    pub grid: GridSection,
    pub linop: SpectralTolerances,
    pub evolve: EvolveSection,
    pub experiments: ExperimentsSection,
    pub output: OutputSection,
}

/// Values that override the file, one per command-line flag.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub p: Option<u32>,
    pub half_length: Option<f64>,
    pub n_points: Option<usize>,
    pub dt: Option<f64>,
    pub amplitude: Option<f64>,
    pub k_max: Option<u32>,
    pub t0: Option<f64>,
    pub horizon: Option<f64>,
    pub delta: Option<f64>,
    pub out: Option<PathBuf>,
}

/// What a configuration is about to be used for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Purpose {
    /// Soliton-only work (profiles, plain evolution); any `p >= 2`.
    Soliton,
    /// Anything needing `e₀`; requires `p > 5`.
    Experiments,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn to_text(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.p {
            self.profiles.p = v;
        }
        if let Some(v) = o.half_length {
            self.grid.half_length = v;
        }
        if let Some(v) = o.n_points {
            self.grid.n_points = v;
        }
        if let Some(v) = o.dt {
            self.evolve.dt = Some(v);
        }
        let e = &mut self.experiments;
        e.amplitude = o.amplitude.or(e.amplitude);
        e.k_max = o.k_max.or(e.k_max);
        e.t0 = o.t0.or(e.t0);
        e.horizon = o.horizon.or(e.horizon);
        e.delta = o.delta.or(e.delta);
        if let Some(v) = &o.out {
            self.output.dir = v.clone();
        }
    }

    /// Rejects the configuration naming the first violated constraint.
    pub fn validate(&self, purpose: Purpose) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let p = self.profiles.p;
        if p < 2 {
            return bad(format!("profiles.p = {p}: need p >= 2"));
        }
        if purpose == Purpose::Experiments && p <= 5 {
            return bad(format!("profiles.p = {p}: p > 5 required for experiments"));
        }
        if !(self.profiles.c.is_finite() && self.profiles.c > 0.0) {
            return bad(format!("profiles.c = {}: need c > 0", self.profiles.c));
        }
        Grid::new(self.grid.half_length, self.grid.n_points).map_err(|e| Error::Config(format!("grid: {e}")))?;
        let t = &self.linop;
        for (name, v) in [
            ("imag_factor", t.imag_factor),
            ("real_tol", t.real_tol),
            ("kernel_tol", t.kernel_tol),
            ("spectral_gap_tol", t.spectral_gap_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("linop.{name} = {v}: need a positive tolerance"));
            }
        }
        for (name, v) in [("dt", self.evolve.dt), ("sample_spacing", self.evolve.sample_spacing)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return bad(format!("evolve.{name} = {v}: need a positive value"));
                }
            }
        }
        let e = &self.experiments;
        if let Some(name) = &e.scenario {
            Scenario::from_name(name)?;
        }
        if let Some(a) = e.amplitude {
            if !a.is_finite() {
                return bad(format!("experiments.amplitude = {a}: need a finite value"));
            }
        }
        if e.k_max == Some(0) {
            return bad("experiments.k_max = 0: need k_max >= 1".into());
        }
        if let Some(list) = &e.n_list {
            if list.is_empty() || list.contains(&0) {
                return bad(format!("experiments.n_list = {list:?}: need a nonempty list of n >= 1"));
            }
        }
        if let Some(s) = e.sign {
            if s != 1 && s != -1 {
                return bad(format!("experiments.sign = {s}: need ±1"));
            }
        }
        for (name, v) in [("delta", e.delta), ("horizon", e.horizon), ("scaling_c", e.scaling_c)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return bad(format!("experiments.{name} = {v}: need a positive value"));
                }
            }
        }
        if let Some(t0) = e.t0 {
            if !t0.is_finite() {
                return bad(format!("experiments.t0 = {t0}: need a finite value"));
            }
        }
        if e.workers == Some(0) {
            return bad("experiments.workers = 0: need at least one worker".into());
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.half_length, self.grid.n_points)
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.output.cache.clone().unwrap_or_else(|| self.output.dir.join("cache"))
    }

    pub fn workers(&self) -> usize {
        self.experiments
            .workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }

    fn solver(&self, base: SolverParams) -> SolverParams {
        SolverParams {
            dt: self.evolve.dt.or(base.dt),
            sample_spacing: self.evolve.sample_spacing.unwrap_or(base.sample_spacing),
        }
    }

    /// The named scenario with every configured parameter applied.
    pub fn scenario(&self, name: &str) -> Result<Scenario> {
        let e = &self.experiments;
        let mut s = Scenario::from_name(name)?;
        match &mut s {
            Scenario::Instability(q) => {
                q.n_list = e.n_list.clone().unwrap_or(q.n_list.clone());
                q.sign = e.sign.unwrap_or(q.sign);
                q.delta = e.delta.or(q.delta);
                q.horizon = e.horizon.unwrap_or(q.horizon);
                q.solver = self.solver(q.solver);
            }
            Scenario::Special(q) => {
                q.amplitude = e.amplitude.unwrap_or(q.amplitude);
                q.k_max = e.k_max.unwrap_or(q.k_max);
                q.t0 = e.t0.or(q.t0);
                q.horizon = e.horizon.or(q.horizon);
                q.solver = self.solver(q.solver);
            }
            Scenario::GradientSign(q) => {
                if let Some(a) = e.amplitude {
                    q.amplitudes = vec![a];
                }
                q.k_max = e.k_max.unwrap_or(q.k_max);
                q.t0 = e.t0.or(q.t0);
                q.horizon_fwd = e.horizon.or(q.horizon_fwd);
                q.solver = self.solver(q.solver);
            }
            Scenario::Scaling(q) => {
                q.c = e.scaling_c.unwrap_or(q.c);
                q.amplitude = e.amplitude.unwrap_or(q.amplitude);
                q.k_max = e.k_max.unwrap_or(q.k_max);
                q.t0 = e.t0.or(q.t0);
                q.horizon = e.horizon.or(q.horizon);
                q.solver = self.solver(q.solver);
            }
            Scenario::Shift(q) => {
                q.amplitude = e.amplitude.unwrap_or(q.amplitude);
                q.k_max = e.k_max.unwrap_or(q.k_max);
            }
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn sections_and_round_trip() {
        let text = "[grid]\nL = 30.0\nN = 512\n\n[experiments]\nscenario = \"special\"\namplitude = -1.0\nn_list = [5, 10]\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.grid.half_length, 30.0);
        assert_eq!(cfg.grid.n_points, 512);
        assert_eq!(cfg.experiments.amplitude, Some(-1.0));
        let again = RunConfig::parse(&cfg.to_text().unwrap()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.to_text().unwrap(), cfg.to_text().unwrap());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::parse("[grid]\nM = 3\n").unwrap_err().to_string();
        assert!(err.contains('M'), "{err}");
    }

    #[test]
    fn validation_names_the_constraint() {
        let mut cfg = RunConfig::default();
        cfg.profiles.p = 4;
        assert!(cfg.validate(Purpose::Soliton).is_ok());
        let err = cfg.validate(Purpose::Experiments).unwrap_err().to_string();
        assert!(err.contains("p > 5 required for experiments"), "{err}");
        let mut cfg = RunConfig::default();
        cfg.evolve.dt = Some(-1.0);
        assert!(cfg.validate(Purpose::Soliton).unwrap_err().to_string().contains("evolve.dt"));
        let mut cfg = RunConfig::default();
        cfg.experiments.scenario = Some("nope".into());
        assert!(cfg.validate(Purpose::Experiments).unwrap_err().to_string().contains("gradient_sign"));
    }

    #[test]
    fn overrides_take_precedence() {
        let mut cfg = RunConfig::parse("[experiments]\namplitude = 1.0\nk_max = 3\n").unwrap();
        cfg.apply(&Overrides {
            amplitude: Some(-1.0),
            n_points: Some(2048),
            ..Default::default()
        });
        assert_eq!(cfg.experiments.amplitude, Some(-1.0));
        assert_eq!(cfg.experiments.k_max, Some(3));
        assert_eq!(cfg.grid.n_points, 2048);
        match cfg.scenario("special").unwrap() {
            Scenario::Special(q) => assert_eq!((q.amplitude, q.k_max), (-1.0, 3)),
            other => panic!("{other:?}"),
        }
    }
}
