//! Experiment configuration: a TOML document with one section per module.
//!
//! ```toml
//! seed = 7
//! output = "out"
//!
//! [potential]
//! family = "product"
//! wells = [[1.0, 0.0], [-0.5, 0.8660254037844386], [-0.5, -0.8660254037844386]]
//! scale = 1.0
//!
//! [solver]
//! radius = 64.0
//! spacing = 0.25
//!
//! [partitions]
//! discontinuities_deg = [0.0, 120.0, 240.0]
//! labels = [1, 2, 3]
//! ```
//! Every section and key is optional; missing values take the defaults below.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partitions::{BoundaryConfig, BoundaryData};
use crate::potential::{Potential, PotentialConfig};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output: PathBuf,
    pub potential: PotentialConfig,
    pub hetero: HeteroSection,
    pub solver: SolverSection,
    pub diagnostics: DiagnosticsSection,
    pub partitions: PartitionsSection,
    pub probe: ProbeSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            output: PathBuf::from("out"),
            potential: PotentialConfig::default(),
            hetero: HeteroSection::default(),
            solver: SolverSection::default(),
            diagnostics: DiagnosticsSection::default(),
            partitions: PartitionsSection::default(),
            probe: ProbeSection::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct HeteroSection {
    pub half_width: f64,
    pub samples: usize,
    /// Points per relaxed metric path.
    pub path_points: usize,
}

impl Default for HeteroSection {
    fn default() -> Self {
        HeteroSection { half_width: 10.0, samples: 2048, path_points: 256 }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum SolveMode {
    /// Unscaled disc of the given radius reached by radius doubling.
    Disc,
    /// Unit disc at scale `R`, started from the recovery construction.
    Unit,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub mode: SolveMode,
    /// Disc radius in `disc` mode.
    pub radius: f64,
    /// First stage radius in `disc` mode.
    pub start_radius: f64,
    /// Grid spacing in `disc` mode.
    pub spacing: f64,
    /// Scale `R` in `unit` mode.
    #[serde(rename = "R")]
    pub r_scale: f64,
    /// Grid cells across the unit disc in `unit` mode.
    pub cells: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Only `dirichlet` is supported for solves; kept for explicit configs.
    pub bc: String,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            mode: SolveMode::Disc,
            radius: 64.0,
            start_radius: 16.0,
            spacing: 0.25,
            r_scale: 32.0,
            cells: 256,
            tol: 1e-6,
            max_iter: 200,
            bc: "dirichlet".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsSection {
    /// Field to analyse; defaults to the `solve` output in the output directory.
    pub field: Option<PathBuf>,
    /// Unit-scale radii about the origin.
    pub radii: Vec<f64>,
    pub margin: f64,
    pub tolerance: f64,
    pub rotations: usize,
    /// Circle for the trace profile; defaults to the largest radius.
    pub circle_radius: Option<f64>,
    /// Cells across the unit disc for blow-down snapshots.
    pub cells: usize,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        DiagnosticsSection {
            field: None,
            radii: vec![8.0, 16.0, 32.0, 48.0, 60.0],
            margin: 0.2,
            tolerance: 0.1,
            rotations: 720,
            circle_radius: None,
            cells: 256,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct PartitionsSection {
    /// Boundary discontinuities in degrees, labels 1-based.
    pub discontinuities_deg: Vec<f64>,
    pub labels: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_k: Option<usize>,
    /// Surface tensions; defaults to those of the potential's costs.
    pub tensions: Option<[f64; 3]>,
    /// Costs `c12, c13, c23` for `angles`; default from the potential.
    pub costs: Option<[f64; 3]>,
    pub deltas: Vec<f64>,
    /// Pixel grid of the cut oracle (0 skips it).
    pub oracle_n: usize,
}

impl Default for PartitionsSection {
    fn default() -> Self {
        let b = BoundaryData::three_equal().to_config();
        PartitionsSection {
            discontinuities_deg: b.discontinuities_deg,
            labels: b.labels,
            max_k: b.max_k,
            tensions: None,
            costs: None,
            deltas: vec![1e-4, 2e-4, 4e-4, 8e-4, 1.6e-3, 3.2e-3],
            oracle_n: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeSection {
    pub trials: usize,
    pub amplitude: f64,
    /// Half side of the square window, unit-scale.
    pub half_side: f64,
    pub tol: f64,
}

impl Default for ProbeSection {
    fn default() -> Self {
        ProbeSection { trials: 16, amplitude: 0.05, half_side: 8.0, tol: 1e-9 }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl ExperimentConfig {
    /// Parses a document, then applies `section.key=value` overrides whose
    /// values are TOML literals (bare words are taken as strings).
    pub fn parse(text: &str, path: &Path, overrides: &[String]) -> Result<Self> {
        let err = |message: String| Error::Config { path: path.to_path_buf(), message };
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            let line = e.span().map_or(1, |s| line_of(text, s.start));
            err(format!("line {line}: {}", e.message()))
        })?;
        // schema errors in the file itself keep their position
        if let Err(e) = toml::from_str::<ExperimentConfig>(text) {
            let line = e.span().map_or(1, |s| line_of(text, s.start));
            return Err(err(format!("line {line}: {}", e.message())));
        }
        for ov in overrides {
            let (key, raw) = ov.split_once('=').ok_or_else(|| err(format!("override `{ov}` is not key=value")))?;
            let value: toml::Value = format!("v = {raw}")
                .parse::<toml::Table>()
                .ok()
                .and_then(|t| t.get("v").cloned())
                .unwrap_or_else(|| toml::Value::String(raw.to_string()));
            let mut parts: Vec<&str> = key.trim().split('.').collect();
            let last = parts.pop().ok_or_else(|| err(format!("empty key in `{ov}`")))?;
            let mut slot = &mut table;
            for p in parts {
                slot = slot
                    .entry(p)
                    .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                    .as_table_mut()
                    .ok_or_else(|| err(format!("`{p}` is not a section")))?;
            }
            slot.insert(last.to_string(), value);
        }
        let cfg: ExperimentConfig = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| err(e.message().to_string()))?;
        cfg.validate().map_err(|e| err(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config { path: path.to_path_buf(), message: format!("cannot read config: {e}") })?;
        Self::parse(&text, path, overrides)
    }

    pub fn validate(&self) -> Result<()> {
        self.potential()?;
        self.boundary()?;
        let s = &self.solver;
        if s.bc != "dirichlet" {
            return Err(Error::InvalidParams(format!("solver bc must be dirichlet, got `{}`", s.bc)));
        }
        if !(s.tol > 0.0) || !(s.spacing > 0.0) || !(s.radius > 0.0) || !(s.r_scale >= 1.0) || s.cells < 8 {
            return Err(Error::InvalidParams("solver tolerances, spacing, radius, R and cells must be positive".into()));
        }
        let d = &self.diagnostics;
        if d.radii.is_empty() || d.radii.windows(2).any(|w| w[1] <= w[0]) || d.radii[0] <= 0.0 {
            return Err(Error::InvalidParams("diagnostics radii must be positive and increasing".into()));
        }
        if !(0.0..1.0).contains(&d.margin) || !(d.tolerance > 0.0) || d.rotations == 0 {
            return Err(Error::InvalidParams("diagnostics margin in [0, 1), tolerance > 0, rotations > 0".into()));
        }
        if !(self.probe.amplitude > 0.0) || !(self.probe.half_side > 0.0) || self.probe.trials == 0 {
            return Err(Error::InvalidParams("probe trials, amplitude and window must be positive".into()));
        }
        if self.hetero.samples < 16 || !(self.hetero.half_width > 0.0) || self.hetero.path_points < 8 {
            return Err(Error::InvalidParams("hetero samples, half width and path points must be positive".into()));
        }
        Ok(())
    }

    pub fn potential(&self) -> Result<Potential> {
        Potential::from_config(&self.potential)
    }

    pub fn boundary(&self) -> Result<BoundaryData> {
        let p = &self.partitions;
        BoundaryData::from_config(&BoundaryConfig { discontinuities_deg: p.discontinuities_deg.clone(), labels: p.labels.clone(), max_k: p.max_k })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_default() {
        let c = ExperimentConfig::parse("", Path::new("x.toml"), &[]).unwrap();
        assert_eq!(c, ExperimentConfig::default());
    }

    #[test]
    fn round_trip_and_overrides() {
        let c = ExperimentConfig::default();
        let text = c.to_toml();
        let back = ExperimentConfig::parse(&text, Path::new("x.toml"), &["solver.radius=32".into(), "seed=9".into()]).unwrap();
        assert_eq!(back.solver.radius, 32.0);
        assert_eq!(back.seed, 9);
        assert_eq!(back.potential, c.potential);
    }

    #[test]
    fn errors_name_the_line() {
        let text = "seed = 1\n[solver]\nradius = = 3\n";
        match ExperimentConfig::parse(text, Path::new("bad.toml"), &[]) {
            Err(Error::Config { message, .. }) => assert!(message.starts_with("line 3"), "{message}"),
            other => panic!("{other:?}"),
        }
        assert!(ExperimentConfig::parse("[solver]\nradus = 3\n", Path::new("t.toml"), &[]).is_err());
    }
}
