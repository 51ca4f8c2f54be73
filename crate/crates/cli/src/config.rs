use std::path::{Path, PathBuf};

use serde::Deserialize;
use stargen::spectral::HamiltonianSpec;
use stargen::{Error, HbarContext, Result, SpatialGrid};

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, serde::Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { x_min: -20.0, x_max: 20.0, n_points: 512 }
    }
}

impl GridConfig {
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Config(format!("--grid expects XMIN:XMAX:N, got '{s}'"));
        if parts.len() != 3 {
            return Err(bad());
        }
        Ok(Self {
            x_min: parts[0].trim().parse().map_err(|_| bad())?,
            x_max: parts[1].trim().parse().map_err(|_| bad())?,
            n_points: parts[2].trim().parse().map_err(|_| bad())?,
        })
    }

    pub fn build(&self) -> Result<SpatialGrid> {
        SpatialGrid::new(self.x_min, self.x_max, self.n_points)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum WindowSpec {
    Hermite(usize),
    File(PathBuf),
}

impl WindowSpec {
    pub fn parse(s: &str) -> Self {
        match s.parse::<usize>() {
            Ok(k) => WindowSpec::Hermite(k),
            Err(_) => WindowSpec::File(PathBuf::from(s)),
        }
    }
}

fn default_hbar() -> f64 {
    1.0
}

fn default_windows() -> Vec<WindowSpec> {
    vec![WindowSpec::Hermite(0)]
}

fn default_count() -> usize {
    8
}

fn default_out() -> PathBuf {
    PathBuf::from("stargen-out")
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    #[serde(default)]
    pub grid: GridConfig,
    pub hamiltonian: Option<HamiltonianSpec>,
    #[serde(default = "default_windows")]
    pub windows: Vec<WindowSpec>,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            hbar: default_hbar(),
            grid: GridConfig::default(),
            hamiltonian: None,
            windows: default_windows(),
            count: default_count(),
            output_dir: default_out(),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn hbar(&self) -> Result<HbarContext> {
        HbarContext::new(self.hbar)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_flag() {
        let g = GridConfig::parse("-10:10:256").unwrap();
        assert_eq!(g, GridConfig { x_min: -10.0, x_max: 10.0, n_points: 256 });
        assert!(GridConfig::parse("-10:10").is_err());
        assert!(GridConfig::parse("a:1:8").is_err());
    }

    #[test]
    fn config_defaults_and_unknown_fields() {
        let c: RunConfig = serde_json::from_str(r#"{"count": 3, "windows": [0, "w.sgf"]}"#).unwrap();
        assert_eq!(c.count, 3);
        assert_eq!(c.windows[1], WindowSpec::File("w.sgf".into()));
        assert_eq!(c.grid, GridConfig::default());
        assert!(serde_json::from_str::<RunConfig>(r#"{"cont": 3}"#).is_err());
        let c: RunConfig = serde_json::from_str(
            r#"{"hamiltonian": {"kind": "kinetic_potential", "potential": {"type": "polynomial", "coeffs": [0, 0, 0, 0, 1]}}}"#,
        )
        .unwrap();
        assert_eq!(c.hamiltonian.unwrap().name(), "kinetic_potential");
        assert!(serde_json::from_str::<RunConfig>(r#"{"hamiltonian": {"kind": "quadratic_1d", "coeffs": [0,0,0,1,0,1], "x": 1}}"#).is_err());
    }
}
