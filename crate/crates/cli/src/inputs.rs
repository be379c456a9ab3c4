use std::path::Path;
use std::sync::Arc;

use anyhow::{Context, Result};
use serde_json::Value as Json;
use toric_wkstab::json::{cuts_from_json, pl_from_json, polytope_from_json, weight_from_json};
use toric_wkstab::polytope::PerturbationCut;
use toric_wkstab::{PLConvexFunction, Polytope, Weight};

use crate::config::RunConfig;
use crate::input_error;

pub fn read_json(path: &Path) -> Result<Json> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    match serde_json::from_str(&text) {
        Ok(v) => Ok(v),
        Err(e) => input_error(format!("{}: {e}", path.display())),
    }
}

/// The polytope and any warnings about auto-corrected input.
pub fn load_polytope(path: &Path) -> Result<(Arc<Polytope>, Vec<String>)> {
    let input = polytope_from_json(&read_json(path)?).with_context(|| format!("polytope {}", path.display()))?;
    Ok((Arc::new(input.polytope), input.warnings))
}

/// The weight at `path`, or the constant 1 when no path is given.
pub fn load_weight(path: Option<&Path>, dim: usize, quadrature_degree: Option<u32>) -> Result<Weight> {
    match path {
        None => Ok(Weight::one(dim)),
        Some(p) => weight_from_json(&read_json(p)?, dim, quadrature_degree).with_context(|| format!("weight {}", p.display())),
    }
}

pub fn load_cuts(path: Option<&Path>) -> Result<Vec<PerturbationCut>> {
    match path {
        None => Ok(Vec::new()),
        Some(p) => cuts_from_json(&read_json(p)?).with_context(|| format!("cuts {}", p.display())),
    }
}

pub fn load_pl(path: &Path, domain: &Arc<Polytope>) -> Result<PLConvexFunction> {
    pl_from_json(&read_json(path)?, domain).with_context(|| format!("function {}", path.display()))
}

/// Everything a sweep reads from disk.
#[derive(Clone, Debug)]
pub struct Inputs {
    pub polytope: Arc<Polytope>,
    pub v: Weight,
    pub w: Weight,
    pub cuts: Vec<PerturbationCut>,
    pub warnings: Vec<String>,
}

impl Inputs {
    pub fn load(cfg: &RunConfig) -> Result<Self> {
        let (polytope, warnings) = load_polytope(&cfg.polytope_path)?;
        let n = polytope.dim();
        Ok(Self {
            v: load_weight(cfg.v_path.as_deref(), n, cfg.quadrature_degree)?,
            w: load_weight(cfg.w_path.as_deref(), n, cfg.quadrature_degree)?,
            cuts: load_cuts(cfg.extra_path.as_deref())?,
            polytope,
            warnings,
        })
    }
}
