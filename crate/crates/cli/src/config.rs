use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use num_traits::Signed;
use serde::Deserialize;
use toric_wkstab::rational::parse_q;
use toric_wkstab::Q;

use crate::input_error;

pub const MAX_REFINEMENT: u32 = 4;

/// Settings for a sweep or a validation run. Paths in a TOML file are
/// resolved relative to the file's directory.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub polytope_path: PathBuf,
    pub v_path: Option<PathBuf>,
    pub w_path: Option<PathBuf>,
    /// Perturbation cuts; required for a nontrivial sweep.
    pub extra_path: Option<PathBuf>,
    pub refinement: u32,
    pub eps_list: Vec<Q>,
    pub y0: Option<Vec<Q>>,
    pub quadrature_degree: Option<u32>,
    pub output_dir: Option<PathBuf>,
    /// Seed for randomized checks; the sweep itself is deterministic.
    pub seed: Option<u64>,
    /// Run even if diagnostics report errors or the base polytope shows no
    /// stability evidence.
    pub force: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    polytope: PathBuf,
    v: Option<PathBuf>,
    w: Option<PathBuf>,
    extra: Option<PathBuf>,
    #[serde(default = "default_refinement")]
    refinement: u32,
    #[serde(default)]
    eps: Vec<String>,
    y0: Option<Vec<String>>,
    quadrature_degree: Option<u32>,
    output_dir: Option<PathBuf>,
    seed: Option<u64>,
    #[serde(default)]
    force: bool,
}

fn default_refinement() -> u32 {
    1
}

fn parse_list(items: &[String], what: &str) -> Result<Vec<Q>> {
    items
        .iter()
        .map(|s| parse_q(s.trim()).with_context(|| format!("bad {what} entry {s:?}")))
        .collect()
}

impl RunConfig {
    pub fn new(polytope_path: impl Into<PathBuf>) -> Self {
        Self {
            polytope_path: polytope_path.into(),
            v_path: None,
            w_path: None,
            extra_path: None,
            refinement: 1,
            eps_list: Vec::new(),
            y0: None,
            quadrature_degree: None,
            output_dir: None,
            seed: None,
            force: false,
        }
    }

    pub fn from_toml_str(s: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawConfig = match toml::from_str(s) {
            Ok(r) => r,
            Err(e) => return input_error(format!("config: {e}")),
        };
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base_dir.join(p) };
        let cfg = Self {
            polytope_path: resolve(raw.polytope),
            v_path: raw.v.map(resolve),
            w_path: raw.w.map(resolve),
            extra_path: raw.extra.map(resolve),
            refinement: raw.refinement,
            eps_list: parse_list(&raw.eps, "eps")?,
            y0: raw.y0.map(|y| parse_list(&y, "y0")).transpose()?,
            quadrature_degree: raw.quadrature_degree,
            output_dir: raw.output_dir.map(resolve),
            seed: raw.seed,
            force: raw.force,
        };
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml_str(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Problems with the configuration itself (not with the files it names).
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.refinement > MAX_REFINEMENT {
            out.push(format!("refinement {} exceeds the maximum {MAX_REFINEMENT}", self.refinement));
        }
        for e in &self.eps_list {
            if e.is_negative() {
                out.push(format!("eps {e} is negative"));
            }
        }
        let paths = [Some(&self.polytope_path), self.v_path.as_ref(), self.w_path.as_ref(), self.extra_path.as_ref()];
        for p in paths.into_iter().flatten() {
            if !p.is_file() {
                out.push(format!("file not found: {}", p.display()));
            }
        }
        out
    }
}
