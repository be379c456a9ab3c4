use serde::{Deserialize, Serialize};
use toric_wkstab::extremal::check_positive;
use toric_wkstab::polytope::{perturb, perturbation_limits};
use toric_wkstab::quadrature::polytope_volume;
use toric_wkstab::rational::fmt_q;
use toric_wkstab::triangulation::triangulate;

use crate::config::RunConfig;
use crate::inputs::{load_cuts, load_polytope, load_weight};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Short stable identifier, e.g. `weight-positivity`.
    pub code: String,
    pub message: String,
}

impl Diagnostic {
    fn new(severity: Severity, code: &str, message: impl Into<String>) -> Self {
        Self {
            severity,
            code: code.into(),
            message: message.into(),
        }
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}

/// Checks everything a sweep will rely on and reports problems instead of
/// failing: configuration bounds, polytope consistency, weight positivity on
/// the sample points of the triangulation, triangulation coverage, the base
/// point, and the perturbation range. A valid configuration yields no
/// diagnostics.
pub fn validate_inputs(cfg: &RunConfig) -> Vec<Diagnostic> {
    use Severity::*;
    let mut out: Vec<Diagnostic> = cfg.problems().into_iter().map(|m| Diagnostic::new(Error, "config", m)).collect();
    if !cfg.polytope_path.is_file() {
        return out;
    }
    let (p, warnings) = match load_polytope(&cfg.polytope_path) {
        Ok(x) => x,
        Err(e) => {
            out.push(Diagnostic::new(Error, "polytope", format!("{e:#}")));
            return out;
        }
    };
    out.extend(warnings.into_iter().map(|w| Diagnostic::new(Warning, "polytope-normal", w)));
    let n = p.dim();
    let t = triangulate(&p, cfg.refinement.min(crate::config::MAX_REFINEMENT));
    if t.total_volume() != polytope_volume(&p) {
        out.push(Diagnostic::new(Error, "triangulation", "simplex volumes do not add up to the polytope volume"));
    }
    if t.interior_walls().iter().any(|w| w.simplices[0] == w.simplices[1]) {
        out.push(Diagnostic::new(Error, "triangulation", "a wall is not shared by two distinct simplices"));
    }

    for (name, path) in [("v", &cfg.v_path), ("w", &cfg.w_path)] {
        if path.as_ref().is_some_and(|p| !p.is_file()) {
            continue;
        }
        match load_weight(path.as_deref(), n, cfg.quadrature_degree) {
            Err(e) => out.push(Diagnostic::new(Error, "weight", format!("{name}: {e:#}"))),
            Ok(w) => {
                if let Err(e) = check_positive(&w, &t) {
                    out.push(Diagnostic::new(Error, "weight-positivity", format!("{name}: {e}")));
                }
            }
        }
    }

    let y0 = cfg.y0.clone().unwrap_or_else(|| p.default_base_point());
    if y0.len() != n || !p.is_interior(&y0) {
        let pt: Vec<String> = y0.iter().map(fmt_q).collect();
        out.push(Diagnostic::new(Error, "base-point", format!("({}) is not an interior point", pt.join(", "))));
    }

    if cfg.extra_path.as_ref().is_some_and(|p| p.is_file()) {
        match load_cuts(cfg.extra_path.as_deref()).and_then(|c| Ok((perturbation_limits(&p, &c)?, c))) {
            Err(e) => out.push(Diagnostic::new(Error, "perturbation", format!("{e:#}"))),
            Ok((limits, cuts)) => {
                for e in &cfg.eps_list {
                    if *e >= limits.empty_at {
                        out.push(Diagnostic::new(Warning, "perturbation", format!("eps {} empties the polytope", fmt_q(e))));
                    } else if let Ok(pe) = perturb(&p, &cuts, e) {
                        if !pe.is_interior(&y0) {
                            out.push(Diagnostic::new(
                                Warning,
                                "base-point",
                                format!("base point is not interior at eps {}", fmt_q(e)),
                            ));
                        }
                    }
                }
            }
        }
    } else if cfg.eps_list.iter().any(|e| !num_traits::Zero::is_zero(e)) && cfg.extra_path.is_none() {
        out.push(Diagnostic::new(Warning, "perturbation", "nonzero eps given without perturbation cuts"));
    }
    out
}
