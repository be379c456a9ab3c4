use std::time::Instant;

use anyhow::Result;
use toric_wkstab::extremal::c_constant;
use toric_wkstab::lp::LpStatus;
use toric_wkstab::parallel::{self, ExecPolicy};
use toric_wkstab::polytope::perturb;
use toric_wkstab::stability::{check_stability, StabilityConfig, StabilityReport, ONE_SIDED_CAVEAT};
use toric_wkstab::triangulation::triangulate;
use toric_wkstab::Q;

use crate::config::RunConfig;
use crate::input_error;
use crate::inputs::Inputs;
use crate::record::{Scalar, SweepRecord, SweepRun, SweepSummary, SIGMA_CONVENTION};

pub fn status_name(s: LpStatus) -> &'static str {
    match s {
        LpStatus::Optimal => "optimal",
        LpStatus::Infeasible => "infeasible",
        LpStatus::Unbounded => "unbounded",
    }
}

/// Delta as reported: exact when the LP ran over the rationals.
pub fn delta_scalar(r: &StabilityReport) -> Scalar {
    match &r.delta_exact {
        Some(d) => Scalar::Exact(d.clone()),
        None => Scalar::float(r.delta),
    }
}

fn stability_config(cfg: &RunConfig) -> StabilityConfig {
    StabilityConfig {
        refinement: cfg.refinement,
        base_point: cfg.y0.clone(),
        trend: false,
    }
}

fn entry(inputs: &Inputs, cfg: &RunConfig, eps: &Q) -> (SweepRecord, Option<String>) {
    let start = Instant::now();
    let elapsed = |s: Instant| s.elapsed().as_millis() as u64;
    let outcome = perturb(&inputs.polytope, &inputs.cuts, eps).and_then(|pe| {
        let report = check_stability(&pe, &inputs.v, &inputs.w, &stability_config(cfg))?;
        let c = c_constant(&pe, &inputs.v, &inputs.w);
        Ok((report, c, triangulate(&pe, cfg.refinement).id()))
    });
    match outcome {
        Ok((report, c, tid)) => (
            SweepRecord {
                eps: eps.clone(),
                ell_coeffs: report.extremal.as_ref().map(|e| e.coeffs()),
                c_value: Some(Scalar::from_value(&c)),
                delta: Some(delta_scalar(&report)),
                lp_status: status_name(report.lp_status).into(),
                wall_time_ms: elapsed(start),
            },
            Some(tid),
        ),
        Err(e) => (SweepRecord::failed(eps.clone(), e, elapsed(start)), None),
    }
}

/// For each requested `eps` (in request order): build `P_eps`, solve
/// `ℓ_ext`, and search for a destabilizer of the weight `w·ℓ_ext`. Entry
/// failures are recorded, never propagated. Unless `cfg.force` is set, the
/// base polytope must first show `delta > 0`.
pub fn run_sweep(cfg: &RunConfig) -> Result<SweepRun> {
    if let Some(p) = cfg.problems().first() {
        return input_error(p.clone());
    }
    let inputs = Inputs::load(cfg)?;
    if !cfg.force {
        let base = check_stability(&inputs.polytope, &inputs.v, &inputs.w, &stability_config(cfg))?;
        if base.delta.is_nan() || base.delta <= 0.0 {
            return input_error(format!(
                "base polytope has delta = {} at refinement {}; pass --force to sweep anyway",
                base.delta_string(),
                cfg.refinement
            ));
        }
    }
    let results = parallel::map_ordered(&cfg.eps_list, ExecPolicy::default(), |e| entry(&inputs, cfg, e));
    let (records, triangulation_ids): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let quadrature_degree = [&inputs.v, &inputs.w].iter().find_map(|w| match w {
        toric_wkstab::Weight::Smooth(s) => Some(s.quadrature_degree),
        _ => None,
    });
    Ok(SweepRun {
        dim: inputs.polytope.dim(),
        refinement: cfg.refinement,
        base_point: cfg.y0.clone(),
        quadrature_degree,
        seed: cfg.seed,
        sigma_convention: SIGMA_CONVENTION.into(),
        caveat: ONE_SIDED_CAVEAT.into(),
        triangulation_ids,
        summary: SweepSummary::from_records(&records),
        records,
    })
}
