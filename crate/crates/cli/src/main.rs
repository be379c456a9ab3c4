use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value as Json};
use toric_wkstab::extremal::{c_constant, extremal_family, solve_extremal};
use toric_wkstab::filtration::{
    d_v1, dh_histogram, okounkov_prefactor, quotient_distance, weighted_volume, weighted_volume_lattice, Minima,
};
use toric_wkstab::json::{affine_from_str, affine_to_json, eps_list_from_str, pl_to_json, point_from_str, polytope_to_json, q_json};
use toric_wkstab::parallel::{self, ExecPolicy};
use toric_wkstab::plfunction::PlRepr;
use toric_wkstab::rational::{fmt_f64, fmt_q, parse_q, q};
use toric_wkstab::stability::{
    check_stability, discrete_ma, evaluate_l, evaluate_l_cells, extremal_weight, weighted_futaki, StabilityConfig,
    StabilityReport,
};
use toric_wkstab::triangulation::triangulate;
use toric_wkstab::{Polytope, Value, Weight};
use toric_wkstab_cli::inputs::{load_cuts, load_pl, load_polytope, load_weight};
use toric_wkstab_cli::report::write_outputs;
use toric_wkstab_cli::sweep::{delta_scalar, status_name};
use toric_wkstab_cli::validate::has_errors;
use toric_wkstab_cli::{determinism_hash, input_error, report, run_sweep, validate_inputs, Format, InputError, RunConfig, Scalar};

const EXIT_DESTABILIZED: u8 = 10;
const EXIT_INPUT: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(name = "toric-wkstab", version, about = "Weighted K-stability experiments on moment polytopes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// Triangulation refinement level k (at most 4)
    #[arg(long, global = true)]
    refine: Option<u32>,
    /// Quadrature degree for non-polynomial weights
    #[arg(long, global = true)]
    quad_degree: Option<u32>,
    /// Worker threads
    #[arg(long, global = true, env = "TORIC_WKSTAB_WORKERS")]
    workers: Option<usize>,
    /// Output file (output directory for `sweep`)
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Proceed despite validation errors or a base polytope without stability evidence
    #[arg(long, global = true)]
    force: bool,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct Data {
    #[arg(long)]
    polytope: PathBuf,
    #[arg(long)]
    v: Option<PathBuf>,
    #[arg(long)]
    w: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML run configuration; flags below override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    polytope: Option<PathBuf>,
    #[arg(long)]
    v: Option<PathBuf>,
    #[arg(long)]
    w: Option<PathBuf>,
    /// Perturbation cuts JSON
    #[arg(long)]
    extra: Option<PathBuf>,
    /// Comma-separated eps values, e.g. 0,1/16,1/8
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    y0: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Extremal affine function of (P, v, w)
    Lext(Data),
    /// Extremal affine function along a perturbation family, as CSV
    LextSweep {
        #[command(flatten)]
        data: Data,
        #[arg(long)]
        extra: PathBuf,
        #[arg(long)]
        eps: String,
    },
    /// The functional L on a PL convex function
    #[command(name = "eval-L")]
    EvalL {
        #[command(flatten)]
        data: Data,
        #[arg(long)]
        f: PathBuf,
        /// Use weight w with this constant (`auto` for c(v,w)) instead of w·ℓ_ext with c = 1
        #[arg(long)]
        c: Option<String>,
    },
    /// Weighted Futaki invariant of an affine function "b0,b1,..,bn"
    Futaki {
        #[command(flatten)]
        data: Data,
        #[arg(long)]
        xi: String,
        #[arg(long)]
        c: Option<String>,
    },
    /// Monge–Ampère atoms of a PL convex function
    Ma {
        #[arg(long)]
        polytope: PathBuf,
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        v: Option<PathBuf>,
    },
    /// Search for a destabilizing PL convex function
    Check {
        #[command(flatten)]
        data: Data,
        #[arg(long)]
        y0: Option<String>,
    },
    /// Stability check along a perturbation family
    Sweep(SweepArgs),
    /// Weighted volume of a PL function, exactly and by lattice sums
    Volume {
        #[arg(long)]
        polytope: PathBuf,
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        v: Option<PathBuf>,
        #[arg(long)]
        lattice: Option<u64>,
        /// Round successive minima down to integers
        #[arg(long)]
        floor: bool,
    },
    /// Duistermaat–Heckman histogram
    Dh {
        #[arg(long)]
        polytope: PathBuf,
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        v: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        bins: usize,
        #[arg(long, default_value_t = 50)]
        lattice: u64,
    },
    /// The d_{v,1} distance between two PL functions
    Dist {
        #[arg(long)]
        polytope: PathBuf,
        #[arg(long)]
        f1: PathBuf,
        #[arg(long)]
        f2: PathBuf,
        #[arg(long)]
        v: Option<PathBuf>,
        /// Minimize over constant shifts of f1
        #[arg(long)]
        quotient: bool,
    },
    /// Diagnostics for a run configuration
    Validate(SweepArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    parallel::init_workers(cli.global.workers);
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(classify(&e))
        }
    }
}

fn classify(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<InputError>()
            || cause.is::<std::io::Error>()
            || cause.is::<serde_json::Error>()
            || cause.is::<csv::Error>()
        {
            return EXIT_INPUT;
        }
        if let Some(core) = cause.downcast_ref::<toric_wkstab::Error>() {
            return if core.is_input_error() { EXIT_INPUT } else { EXIT_INTERNAL };
        }
    }
    EXIT_INTERNAL
}

fn scalar(v: &Value) -> Json {
    serde_json::to_value(Scalar::from_value(v)).expect("scalar")
}

fn emit(global: &Global, text: &str) -> Result<()> {
    match &global.output {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(global: &Global, v: &Json) -> Result<()> {
    if let Some(f) = global.format {
        if f != Format::Json {
            return input_error("this command only writes json");
        }
    }
    emit(global, &format!("{}\n", serde_json::to_string_pretty(v)?))
}

struct Loaded {
    p: Arc<Polytope>,
    v: Weight,
    w: Weight,
}

fn load(data: &Data, global: &Global) -> Result<Loaded> {
    let (p, warnings) = load_polytope(&data.polytope)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    let n = p.dim();
    Ok(Loaded {
        v: load_weight(data.v.as_deref(), n, global.quad_degree)?,
        w: load_weight(data.w.as_deref(), n, global.quad_degree)?,
        p,
    })
}

fn refinement(global: &Global, default: u32) -> Result<u32> {
    let k = global.refine.unwrap_or(default);
    if k > toric_wkstab_cli::config::MAX_REFINEMENT {
        return input_error(format!("refinement {k} exceeds the maximum {}", toric_wkstab_cli::config::MAX_REFINEMENT));
    }
    Ok(k)
}

fn parse_c(s: &str, p: &Polytope, v: &Weight, w: &Weight) -> Result<Value> {
    if s == "auto" {
        Ok(c_constant(p, v, w))
    } else {
        Ok(Value::Exact(parse_q(s)?))
    }
}

fn stability_json(r: &StabilityReport) -> Json {
    json!({
        "delta": serde_json::to_value(delta_scalar(r)).unwrap(),
        "destabilized": r.is_destabilized(),
        "lp_status": status_name(r.lp_status),
        "lp_pivots": r.lp_pivots,
        "triangulation_id": r.triangulation_id,
        "refinement": r.refinement,
        "base_point": r.base_point.iter().map(q_json).collect::<Vec<_>>(),
        "containing_simplex": r.containing_simplex,
        "normalization_checks": r.normalization_checks.as_ref().map(|c| json!({
            "boundary_integral": fmt_f64(c.boundary_integral),
            "value_at_base_point": fmt_f64(c.value_at_base_point),
            "min_value": fmt_f64(c.min_value),
        })),
        "quadrature_degree": r.quadrature_degree,
        "trend": r.trend.iter().map(|(k, d)| json!({"refinement": k, "delta": fmt_f64(*d)})).collect::<Vec<_>>(),
        "extremal": r.extremal.as_ref().map(affine_to_json),
        "minimizer": r.minimizer.as_ref().map(pl_to_json),
        "caveat": r.caveat,
    })
}

fn sweep_config(args: &SweepArgs, global: &Global) -> Result<RunConfig> {
    let mut cfg = match (&args.config, &args.polytope) {
        (Some(path), _) => RunConfig::from_file(path)?,
        (None, Some(p)) => RunConfig::new(p),
        (None, None) => return input_error("either --config or --polytope is required"),
    };
    if let Some(p) = &args.polytope {
        cfg.polytope_path = p.clone();
    }
    cfg.v_path = args.v.clone().or(cfg.v_path);
    cfg.w_path = args.w.clone().or(cfg.w_path);
    cfg.extra_path = args.extra.clone().or(cfg.extra_path);
    if let Some(e) = &args.eps {
        cfg.eps_list = eps_list_from_str(e)?;
    }
    if let Some(y) = &args.y0 {
        cfg.y0 = Some(point_from_str(y)?);
    }
    cfg.seed = args.seed.or(cfg.seed);
    cfg.refinement = global.refine.unwrap_or(cfg.refinement);
    cfg.quadrature_degree = global.quad_degree.or(cfg.quadrature_degree);
    cfg.output_dir = global.output.clone().or(cfg.output_dir);
    cfg.force |= global.force;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<u8> {
    let g = &cli.global;
    match &cli.command {
        Command::Lext(data) => {
            let d = load(data, g)?;
            let sol = solve_extremal(&d.v, &d.w, &triangulate(&d.p, refinement(g, 0)?))?;
            let residual = match &sol.residual_exact {
                Some(r) => Scalar::Exact(r.clone()),
                None => Scalar::float(sol.residual),
            };
            emit_json(
                g,
                &json!({
                    "ell": sol.ell.coeffs().iter().map(q_json).collect::<Vec<_>>(),
                    "exact": sol.exact,
                    "residual": serde_json::to_value(residual)?,
                    "c": scalar(&c_constant(&d.p, &d.v, &d.w)),
                    "min_eigenvalue_estimate": fmt_f64(sol.min_eigenvalue_estimate),
                    "positivity_samples": {
                        "vertices": sol.samples.vertices,
                        "barycenters": sol.samples.barycenters,
                        "quadrature_nodes": sol.samples.quadrature_nodes,
                        "min_value": fmt_f64(sol.samples.min_value),
                    },
                    "quadrature_degree": sol.quadrature_degree,
                }),
            )?;
        }
        Command::LextSweep { data, extra, eps } => {
            let d = load(data, g)?;
            let cuts = load_cuts(Some(extra))?;
            let eps = eps_list_from_str(eps)?;
            let family = extremal_family(&d.p, &cuts, &d.v, &d.w, &eps, ExecPolicy::default());
            let n = d.p.dim();
            match g.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    let mut header = vec!["eps".to_string()];
                    header.extend((0..=n).map(|i| format!("b{i}")));
                    header.push("residual".into());
                    w.write_record(&header)?;
                    for e in &family {
                        let mut row = vec![fmt_q(&e.eps)];
                        match &e.solution {
                            Ok(s) => {
                                row.extend(s.ell.coeffs().iter().map(fmt_q));
                                row.push(s.residual_exact.as_ref().map(fmt_q).unwrap_or_else(|| fmt_f64(s.residual)));
                            }
                            Err(err) => {
                                eprintln!("eps {}: {err}", fmt_q(&e.eps));
                                row.extend(std::iter::repeat_n(String::new(), n + 2));
                            }
                        }
                        w.write_record(&row)?;
                    }
                    emit(g, &String::from_utf8(w.into_inner()?)?)?;
                }
                Format::Json => {
                    let rows: Vec<Json> = family
                        .iter()
                        .map(|e| match &e.solution {
                            Ok(s) => json!({"eps": q_json(&e.eps), "ell": s.ell.coeffs().iter().map(q_json).collect::<Vec<_>>(), "residual": fmt_f64(s.residual)}),
                            Err(err) => json!({"eps": q_json(&e.eps), "error": err.to_string()}),
                        })
                        .collect();
                    emit_json(g, &Json::Array(rows))?;
                }
                Format::Md => return input_error("lext-sweep writes csv or json"),
            }
        }
        Command::EvalL { data, f, c } => {
            let d = load(data, g)?;
            let func = load_pl(f, &d.p)?;
            let (w_eff, c_val, form) = match c {
                Some(c) => (d.w.clone(), parse_c(c, &d.p, &d.v, &d.w)?, "c-weighted"),
                None => {
                    let sol = solve_extremal(&d.v, &d.w, &triangulate(&d.p, 0))?;
                    (extremal_weight(&d.w, &sol), Value::Exact(q(1)), "extremal-relative")
                }
            };
            let cells = evaluate_l_cells(&func, &d.v, &w_eff, &c_val);
            let on_t = match (func.repr(), g.refine) {
                (PlRepr::VertexValues { triangulation, .. }, _) => Some(evaluate_l(&func, &d.v, &w_eff, &c_val, triangulation)?),
                (_, Some(k)) => Some(evaluate_l(&func, &d.v, &w_eff, &c_val, &triangulate(&d.p, refinement(g, k)?))?),
                _ => None,
            };
            emit_json(
                g,
                &json!({
                    "L": scalar(&cells),
                    "L_triangulation": on_t.as_ref().map(scalar),
                    "form": form,
                    "c": scalar(&c_val),
                }),
            )?;
        }
        Command::Futaki { data, xi, c } => {
            let d = load(data, g)?;
            let xi = affine_from_str(xi)?;
            if xi.dim() != d.p.dim() {
                return input_error(format!("xi needs {} coefficients", d.p.dim() + 1));
            }
            let c_val = match c {
                Some(c) => parse_c(c, &d.p, &d.v, &d.w)?,
                None => c_constant(&d.p, &d.v, &d.w),
            };
            let sol = solve_extremal(&d.v, &d.w, &triangulate(&d.p, 0))?;
            let relative = weighted_futaki(&xi, &d.p, &d.v, &extremal_weight(&d.w, &sol), &Value::Exact(q(1)));
            emit_json(
                g,
                &json!({
                    "futaki": scalar(&weighted_futaki(&xi, &d.p, &d.v, &d.w, &c_val)),
                    "c": scalar(&c_val),
                    "extremal_relative": scalar(&relative),
                }),
            )?;
        }
        Command::Ma { polytope, f, v } => {
            let (p, _) = load_polytope(polytope)?;
            let func = load_pl(f, &p)?;
            let v = load_weight(v.as_deref(), p.dim(), g.quad_degree)?;
            let atoms = discrete_ma(&func, &v);
            let list: Vec<Json> = atoms
                .atoms
                .iter()
                .map(|a| json!({"gradient": a.gradient.iter().map(q_json).collect::<Vec<_>>(), "mass": scalar(&a.mass), "cell": polytope_to_json(&a.cell)}))
                .collect();
            emit_json(g, &json!({"atoms": list, "total_mass": scalar(&atoms.total_mass())}))?;
        }
        Command::Check { data, y0 } => {
            let d = load(data, g)?;
            let cfg = StabilityConfig {
                refinement: refinement(g, 1)?,
                base_point: y0.as_deref().map(point_from_str).transpose()?,
                trend: true,
            };
            let r = check_stability(&d.p, &d.v, &d.w, &cfg)?;
            emit_json(g, &stability_json(&r))?;
            if r.is_destabilized() {
                return Ok(EXIT_DESTABILIZED);
            }
        }
        Command::Sweep(args) => {
            let cfg = sweep_config(args, g)?;
            let diags = validate_inputs(&cfg);
            for d in &diags {
                eprintln!("{:?} [{}]: {}", d.severity, d.code, d.message);
            }
            if has_errors(&diags) && !cfg.force {
                return input_error("validation failed; pass --force to run anyway");
            }
            let run = run_sweep(&cfg)?;
            eprintln!("determinism hash: {}", determinism_hash(&run));
            if let Some(dir) = &cfg.output_dir {
                for p in write_outputs(&run, dir)? {
                    eprintln!("wrote {}", p.display());
                }
            } else {
                print!("{}", report(&run, g.format.unwrap_or(Format::Json)));
            }
            if run.summary.destabilized > 0 {
                return Ok(EXIT_DESTABILIZED);
            }
        }
        Command::Volume { polytope, f, v, lattice, floor } => {
            let (p, _) = load_polytope(polytope)?;
            let func = load_pl(f, &p)?;
            let v = load_weight(v.as_deref(), p.dim(), g.quad_degree)?;
            let exact = weighted_volume(&func, &v);
            let mut out = json!({"exact": scalar(&exact), "prefactor": scalar(&okounkov_prefactor(&p, &v))});
            if let Some(m) = lattice {
                let minima = if *floor { Minima::Floor } else { Minima::Exact };
                let s = weighted_volume_lattice(&func, &v, *m, minima, ExecPolicy::default())?;
                out["lattice"] = json!({"m": m, "value": fmt_f64(s), "error": fmt_f64(s - exact.to_f64()), "floor": floor});
            }
            emit_json(g, &out)?;
        }
        Command::Dh { polytope, f, v, bins, lattice } => {
            let (p, _) = load_polytope(polytope)?;
            let func = load_pl(f, &p)?;
            let v = load_weight(v.as_deref(), p.dim(), g.quad_degree)?;
            let h = dh_histogram(&func, &v, *bins, *lattice, ExecPolicy::default())?;
            match g.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    w.write_record(["lo", "hi", "mass"])?;
                    for (e, m) in h.bin_edges.windows(2).zip(&h.masses) {
                        w.write_record([fmt_f64(e[0]), fmt_f64(e[1]), fmt_f64(*m)])?;
                    }
                    emit(g, &String::from_utf8(w.into_inner()?)?)?;
                }
                Format::Json => emit_json(
                    g,
                    &json!({
                        "bin_edges": h.bin_edges.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>(),
                        "masses": h.masses.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>(),
                        "total": fmt_f64(h.total),
                        "first_moment": fmt_f64(h.first_moment()),
                    }),
                )?,
                Format::Md => return input_error("dh writes csv or json"),
            }
        }
        Command::Dist { polytope, f1, f2, v, quotient } => {
            let (p, _) = load_polytope(polytope)?;
            let (a, b) = (load_pl(f1, &p)?, load_pl(f2, &p)?);
            let v = load_weight(v.as_deref(), p.dim(), g.quad_degree)?;
            let out = if *quotient {
                let d = quotient_distance(&a, &b, &v)?;
                json!({"value": scalar(&d.value), "shift": q_json(&d.shift), "exact_shift": d.exact_shift})
            } else {
                let d = d_v1(&a, &b, &v)?;
                json!({
                    "d": scalar(&d.value),
                    "l1": scalar(&d.l1),
                    "vol1": scalar(&d.vol1),
                    "vol2": scalar(&d.vol2),
                    "vol_min": scalar(&d.vol_min),
                    "consistent": d.consistent(),
                })
            };
            emit_json(g, &out)?;
        }
        Command::Validate(args) => {
            let cfg = sweep_config(args, g)?;
            let diags = validate_inputs(&cfg);
            emit_json(g, &serde_json::to_value(&diags)?)?;
            if has_errors(&diags) {
                return Ok(EXIT_INPUT);
            }
        }
    }
    Ok(0)
}

