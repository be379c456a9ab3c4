//! Acceptance criteria, one PASS/FAIL line each. Run with
//! `cargo test -p wkstab-acceptance --test acceptance`.

use std::sync::Arc;
use std::time::Duration;

use num_traits::{Signed, Zero};
use toric_wkstab::affine::AffineFunction;
use toric_wkstab::extremal::{c_constant, extremal_family, solve_extremal};
use toric_wkstab::filtration::{
    d_v1, dh_histogram, weighted_volume, weighted_volume_lattice, weighted_volume_lattice_exact, Minima,
};
use toric_wkstab::json::{cut_to_json, polytope_to_json};
use toric_wkstab::lp::LpStatus;
use toric_wkstab::parallel::ExecPolicy;
use toric_wkstab::polynomial::Polynomial;
use toric_wkstab::polytope::{cube, perturb, standard_simplex, PerturbationCut};
use toric_wkstab::quadrature::{boundary_integral, integrate_polynomial_region};
use toric_wkstab::random;
use toric_wkstab::rational::{fmt_q, q, qf, to_f64};
use toric_wkstab::stability::{
    check_stability, discrete_ma, evaluate_l_cells, extremal_weight, search_destabilizer, StabilityConfig,
};
use toric_wkstab::triangulation::{triangulate, triangulate_arc};
use toric_wkstab::{PLConvexFunction, Polytope, Value, Weight, Q};
use toric_wkstab_cli::{determinism_hash, run_sweep, RunConfig};
use wkstab_acceptance::{ensure, Suite};

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn exact(v: &Value) -> Result<Q, String> {
    v.exact().cloned().ok_or_else(|| format!("expected an exact value, got {}", v.to_f64()))
}

fn square() -> Arc<Polytope> {
    Arc::new(cube(2, -1, 1))
}

fn triangle() -> Arc<Polytope> {
    Arc::new(standard_simplex(2))
}

fn corner_cut() -> Vec<PerturbationCut> {
    vec![PerturbationCut::new(vec![-1, -1], q(2), q(1))]
}

fn affine_basis(dim: usize) -> Vec<Polynomial> {
    std::iter::once(Polynomial::one(dim))
        .chain((0..dim).map(|i| Polynomial::variable(dim, i)))
        .collect()
}

fn extremal_identity() -> Result<String, String> {
    let mut worst = Q::zero();
    for i in 0..20u64 {
        let dim = 1 + (i % 3) as usize;
        let mut r = random::rng(0xA11CE + i);
        let p = random::random_polytope(&mut r, dim);
        let v = random::random_positive_weight(&mut r, &p, 2);
        let w = random::random_positive_weight(&mut r, &p, 2);
        let t = triangulate(&p, 0);
        let sol = solve_extremal(&Weight::Polynomial(v.clone()), &Weight::Polynomial(w.clone()), &t)
            .map_err(|e| e.to_string())?;
        ensure(sol.residual_exact == Some(Q::zero()), || format!("instance {i}: solver residual {:?}", sol.residual_exact))?;
        // Recompute the residual from scratch on the affine basis.
        let ell = Polynomial::from(&sol.ell);
        for xi in affine_basis(dim) {
            let lhs = boundary_integral(&(&xi * &v), &t) * q(2);
            let rhs = integrate_polynomial_region(&(&(&xi * &w) * &ell), &t);
            let d = (lhs - rhs).abs();
            if d > worst {
                worst = d;
            }
        }
    }
    ensure(worst.is_zero(), || format!("max residual {}", fmt_q(&worst)))?;
    Ok("20 instances, residual exactly 0".into())
}

fn affine_kernel() -> Result<String, String> {
    let one = Value::Exact(q(1));
    for i in 0..50u64 {
        let mut r = random::rng(0xBEEF + i);
        let p = if i % 2 == 0 { square() } else { triangle() };
        let v = Weight::Polynomial(random::random_positive_weight(&mut r, &p, 1));
        let w = Weight::Polynomial(random::random_positive_weight(&mut r, &p, 1));
        let sol = solve_extremal(&v, &w, &triangulate(&p, 0)).map_err(|e| e.to_string())?;
        let w_eff = extremal_weight(&w, &sol);
        let f = random::random_pl(&mut r, &p, 1 + (i % 4) as usize);
        let xi = random::random_affine(&mut r, 2);
        let diff = exact(&evaluate_l_cells(&f.add_affine(&xi), &v, &w_eff, &one))? - exact(&evaluate_l_cells(&f, &v, &w_eff, &one))?;
        ensure(diff.is_zero(), || format!("pair {i}: L(f + xi) - L(f) = {}", fmt_q(&diff)))?;
    }
    Ok("50 pairs, difference exactly 0".into())
}

fn worked_square() -> Result<String, String> {
    // Hand integration on [-1,1]^2 with unit normals: every edge has
    // sigma-length 2, so the sigma-perimeter is 8 and the area is 4.
    // For f = max(0, y1): the right edge contributes 2, top and bottom
    // contribute 1/2 each, the left edge 0, and the interior integral is 1.
    let (perimeter, area) = (q(8), q(4));
    let ell_hand = q(2) * &perimeter / &area;
    let c_hand = q(2) * &perimeter / &area;
    let boundary_f = q(2) + qf(1, 2) + qf(1, 2);
    let interior_f = q(1);
    let l_hand = q(2) * boundary_f - &ell_hand * interior_f;

    let p = square();
    let one = Weight::one(2);
    let sol = solve_extremal(&one, &one, &triangulate(&p, 0)).map_err(|e| e.to_string())?;
    ensure(sol.ell == AffineFunction::constant_fn(2, ell_hand.clone()), || format!("ell = {:?}", sol.ell.coeffs()))?;
    let c = exact(&c_constant(&p, &one, &one))?;
    ensure(c == c_hand, || format!("c = {}", fmt_q(&c)))?;
    let f = PLConvexFunction::max_of_affine(&p, vec![AffineFunction::zero(2), AffineFunction::new(q(0), vec![q(1), q(0)])]);
    let l = exact(&evaluate_l_cells(&f, &one, &extremal_weight(&one, &sol), &Value::Exact(q(1))))?;
    ensure(l == l_hand && l == q(2), || format!("L = {}", fmt_q(&l)))?;
    Ok(format!("ell = {}, c = {}, L = {}", fmt_q(&ell_hand), fmt_q(&c), fmt_q(&l)))
}

fn destabilizer_soundness() -> Result<String, String> {
    let p = square();
    let one = Weight::one(2);
    let sol = solve_extremal(&one, &one, &triangulate(&p, 0)).map_err(|e| e.to_string())?;
    let ell_plus_one = &Polynomial::from(&sol.ell) + &Polynomial::one(2);
    let w_eff = Weight::Polynomial(ell_plus_one);
    let c = Value::Exact(q(1));
    let t = Arc::new(triangulate_arc(p.clone(), 1));
    let r = search_destabilizer(&one, &w_eff, &c, t, &[q(0), q(0)]).map_err(|e| e.to_string())?;
    let f = r.minimizer.as_ref().ok_or("no minimizer")?;
    let l = exact(&evaluate_l_cells(f, &one, &w_eff, &c))?;
    ensure(r.delta_exact.as_ref() == Some(&l), || format!("minimizer re-evaluates to {} but delta is {}", fmt_q(&l), r.delta_string()))?;
    ensure(r.is_destabilized() && l.is_negative(), || {
        format!("delta = {} (expected < 0), L(minimizer) = {}", r.delta_string(), fmt_q(&l))
    })?;
    Ok(format!("delta = {}", r.delta_string()))
}

/// Five-point Gauss–Legendre rule on `[a, b]`.
fn gauss(a: f64, b: f64, g: impl Fn(f64) -> f64) -> f64 {
    const X: [f64; 5] = [0.0, 0.538_469_310_105_683_1, -0.538_469_310_105_683_1, 0.906_179_845_938_664, -0.906_179_845_938_664];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let (m, h) = ((a + b) / 2.0, (b - a) / 2.0);
    X.iter().zip(W).map(|(x, w)| w * h * g(m + h * x)).sum()
}

/// Minimum over the value grid `{0, 1/G, .., 1}` at the points `xs` of
/// `L(f) / (f(0) + f(1))` for convex `f >= 0` vanishing at 1/2.
fn interval_grid_search(xs: &[f64], v: &Polynomial, w_eff: &Polynomial) -> f64 {
    const G: usize = 6;
    let n = xs.len();
    let mid = xs.iter().position(|&x| x == 0.5).expect("1/2 is a grid point");
    let mut best = f64::INFINITY;
    let mut vals = vec![0usize; n];
    loop {
        if vals[mid] == 0 {
            let f: Vec<f64> = vals.iter().map(|&k| k as f64 / G as f64).collect();
            let slopes: Vec<f64> = (0..n - 1).map(|i| (f[i + 1] - f[i]) / (xs[i + 1] - xs[i])).collect();
            let boundary = f[0] + f[n - 1];
            if slopes.windows(2).all(|s| s[1] >= s[0] - 1e-12) && boundary > 0.0 {
                let region: f64 = (0..n - 1)
                    .map(|i| gauss(xs[i], xs[i + 1], |y| (f[i] + slopes[i] * (y - xs[i])) * w_eff.eval_f64(&[y])))
                    .sum();
                let l = 2.0 * (v.eval_f64(&[0.0]) * f[0] + v.eval_f64(&[1.0]) * f[n - 1]) - region;
                best = best.min(l / boundary);
            }
        }
        let mut i = 0;
        while i < n && vals[i] == G {
            vals[i] = 0;
            i += 1;
        }
        if i == n {
            return best;
        }
        vals[i] += 1;
    }
}

fn lp_grid_equivalence() -> Result<String, String> {
    let p = Arc::new(cube(1, 0, 1));
    let y = Polynomial::variable(1, 0);
    let one = Polynomial::one(1);
    let v2 = &one + &y;
    let w2 = &one + &(&y * &y);
    let extremal = |v: &Polynomial, w: &Polynomial| -> Result<Polynomial, String> {
        let sol = solve_extremal(&Weight::Polynomial(v.clone()), &Weight::Polynomial(w.clone()), &triangulate(&p, 0))
            .map_err(|e| e.to_string())?;
        Ok(w * &Polynomial::from(&sol.ell))
    };
    let cases = vec![
        (one.clone(), extremal(&one, &one)?),
        (v2.clone(), extremal(&v2, &w2)?),
        (one.clone(), Polynomial::constant(1, q(5))),
        (v2.clone(), &Polynomial::constant(1, q(9)) + &y),
        (one.clone(), w2.scale(&q(6))),
    ];
    let mut worst = 0.0f64;
    let mut runs = 0;
    for (v, w_eff) in &cases {
        for k in 1..=2 {
            let t = Arc::new(triangulate_arc(p.clone(), k));
            let mut xs: Vec<f64> = t.points().iter().map(|x| to_f64(&x[0])).collect();
            xs.sort_by(f64::total_cmp);
            ensure(xs.len() - 2 <= 4, || format!("{} hinge points", xs.len() - 2))?;
            let r = search_destabilizer(
                &Weight::Polynomial(v.clone()),
                &Weight::Polynomial(w_eff.clone()),
                &Value::Exact(q(1)),
                t,
                &[qf(1, 2)],
            )
            .map_err(|e| e.to_string())?;
            worst = worst.max((r.delta - interval_grid_search(&xs, v, w_eff)).abs());
            runs += 1;
        }
    }
    ensure(worst <= 1e-6, || format!("max |lp - grid| = {worst:e}"))?;
    Ok(format!("{runs} problems, max |lp - grid| = {worst:.1e}"))
}

fn refinement_monotone() -> Result<String, String> {
    let one = Weight::one(2);
    let mut rows = Vec::new();
    for (name, p) in [("square", square()), ("simplex", triangle())] {
        let sol = solve_extremal(&one, &one, &triangulate(&p, 0)).map_err(|e| e.to_string())?;
        let w_eff = extremal_weight(&one, &sol);
        let y0 = p.default_base_point();
        // None stands for +inf: an infeasible LP has an empty normalized cone.
        let mut deltas: Vec<Option<Q>> = Vec::new();
        for k in 0..=3 {
            let t = Arc::new(triangulate_arc(p.clone(), k));
            let r = search_destabilizer(&one, &w_eff, &Value::Exact(q(1)), t, &y0).map_err(|e| e.to_string())?;
            deltas.push(match r.lp_status {
                LpStatus::Infeasible => None,
                _ => Some(r.delta_exact.clone().ok_or("delta is not exact")?),
            });
        }
        for k in 0..3 {
            let ok = match (&deltas[k], &deltas[k + 1]) {
                (_, None) => deltas[k].is_none(),
                (None, Some(_)) => true,
                (Some(a), Some(b)) => b <= a,
            };
            ensure(ok, || format!("{name}: delta({}) > delta({k})", k + 1))?;
        }
        let shown: Vec<String> = deltas.iter().map(|d| d.as_ref().map(fmt_q).unwrap_or_else(|| "inf".into())).collect();
        rows.push(format!("{name} {}", shown.join(" >= ")));
    }
    Ok(rows.join("; "))
}

fn volume_convergence() -> Result<String, String> {
    let unit = cube(1, 0, 1);
    let f = PLConvexFunction::max_of_affine(&unit, vec![AffineFunction::new(q(0), vec![q(1)])]);
    let v1 = Polynomial::one(1);
    let vol = exact(&weighted_volume(&f, &Weight::one(1)))?;
    for m in [50u64, 100, 200] {
        let s = weighted_volume_lattice_exact(&f, &v1, m).map_err(|e| e.to_string())?;
        let err = (s - &vol).abs();
        ensure(err == qf(1, 2 * m as i64), || format!("unit interval m={m}: error {}", fmt_q(&err)))?;
    }

    let sq = cube(2, -1, 1);
    let tri = standard_simplex(2);
    let one = Weight::one(2);
    let examples = [
        PLConvexFunction::max_of_affine(&sq, vec![AffineFunction::zero(2), AffineFunction::new(q(0), vec![q(1), q(0)])]),
        PLConvexFunction::max_of_affine(
            &sq,
            vec![
                AffineFunction::new(q(0), vec![qf(1, 2), qf(1, 2)]),
                AffineFunction::new(q(0), vec![qf(-1, 2), qf(1, 4)]),
                AffineFunction::new(q(0), vec![q(0), qf(-1, 2)]),
            ],
        ),
        PLConvexFunction::max_of_affine(&tri, vec![AffineFunction::new(qf(1, 3), vec![q(-1), q(0)]), AffineFunction::new(q(0), vec![q(1), q(1)])]),
    ];
    let mut ratios = Vec::new();
    for (i, f) in examples.iter().enumerate() {
        let target = to_f64(&exact(&weighted_volume(f, &one))?);
        let err = |m: u64| -> Result<f64, String> {
            let s = weighted_volume_lattice(f, &one, m, Minima::Exact, ExecPolicy::default()).map_err(|e| e.to_string())?;
            Ok((s - target).abs())
        };
        let (e50, e100, e200) = (err(50)?, err(100)?, err(200)?);
        for (m, e) in [(50.0, e50), (100.0, e100), (200.0, e200)] {
            ensure(e <= 3.0 / m, || format!("example {i}: error {e} at m={m} exceeds 3/m"))?;
        }
        ensure(e200 <= 0.6 * e100, || format!("example {i}: e200/e100 = {}", e200 / e100))?;
        ratios.push(format!("{:.3}", e200 / e100));
    }
    Ok(format!("unit interval exact; 2-D e200/e100 = {}", ratios.join(", ")))
}

fn distance_identity() -> Result<String, String> {
    for i in 0..20u64 {
        let mut r = random::rng(0xD157 + i);
        let p = Arc::new(random::random_polytope(&mut r, 1 + (i % 2) as usize));
        let v = Weight::Polynomial(random::random_positive_weight(&mut r, &p, 1));
        let f1 = random::random_pl(&mut r, &p, 3);
        let f2 = random::random_pl(&mut r, &p, 3);
        let d = d_v1(&f1, &f2, &v).map_err(|e| e.to_string())?;
        let lhs = exact(&d.vol1)? + exact(&d.vol2)? - exact(&d.vol_min)? * q(2);
        // vol1 and vol2 are the plain weighted volumes.
        ensure(d.vol1 == weighted_volume(&f1, &v) && d.vol2 == weighted_volume(&f2, &v), || format!("pair {i}: volumes differ"))?;
        ensure(lhs == exact(&d.l1)?, || format!("pair {i}: {} != {}", fmt_q(&lhs), fmt_q(&exact(&d.l1).unwrap())))?;
    }
    for i in 0..20u64 {
        let mut r = random::rng(0x7812 + i);
        let p = Arc::new(random::random_polytope(&mut r, 1 + (i % 2) as usize));
        let v = Weight::Polynomial(random::random_positive_weight(&mut r, &p, 1));
        let f: Vec<PLConvexFunction> = (0..3).map(|_| random::random_pl(&mut r, &p, 2)).collect();
        let d = |a: usize, b: usize| -> Result<Q, String> { exact(&d_v1(&f[a], &f[b], &v).map_err(|e| e.to_string())?.value) };
        let (ac, ab, bc) = (d(0, 2)?, d(0, 1)?, d(1, 2)?);
        ensure(ac <= &ab + &bc, || format!("triple {i}: {} > {} + {}", fmt_q(&ac), fmt_q(&ab), fmt_q(&bc)))?;
    }
    Ok("20 pairs exact, 20 triples exact".into())
}

fn mass_conservation() -> Result<String, String> {
    let sq = square();
    let cut = Arc::new(perturb(&sq, &corner_cut(), &qf(1, 8)).map_err(|e| e.to_string())?);
    let y1_1 = Polynomial::variable(1, 0);
    let y2_1 = Polynomial::variable(2, 0);
    let configs: Vec<(&str, Arc<Polytope>, Polynomial)> = vec![
        ("square", sq.clone(), Polynomial::one(2)),
        ("simplex", triangle(), Polynomial::one(2)),
        ("cut square", cut, Polynomial::one(2)),
        ("simplex, v = 1 + y1", triangle(), &Polynomial::one(2) + &y2_1),
        ("interval, v = 1 + y", Arc::new(cube(1, 0, 1)), &Polynomial::one(1) + &y1_1),
    ];
    let m = 50u64;
    let mut worst = 0.0f64;
    for (name, p, v) in &configs {
        let total = integrate_polynomial_region(v, &triangulate(p, 0));
        let vw = Weight::Polynomial(v.clone());
        let mut r = random::rng(0x9A55);
        for pieces in 1..=3 {
            let f = random::random_pl(&mut r, p, pieces);
            let atoms = discrete_ma(&f, &vw);
            ensure(atoms.total_mass() == Value::Exact(total.clone()), || {
                format!("{name}: atom mass {} != {}", atoms.total_mass().to_f64(), fmt_q(&total))
            })?;
            let h = dh_histogram(&f, &vw, 16, m, ExecPolicy::default()).map_err(|e| e.to_string())?;
            let dev = (h.total - to_f64(&total)).abs();
            worst = worst.max(dev * m as f64);
            ensure(dev <= 5.0 / m as f64, || format!("{name}: histogram mass off by {dev} at m={m}"))?;
        }
    }
    Ok(format!("{} configurations, max histogram deviation {worst:.3}/m", configs.len()))
}

fn openness_probe() -> Result<String, String> {
    let sq = square();
    let one = Weight::one(2);
    let eps = [q(0), qf(1, 32), qf(1, 16), qf(1, 8)];
    let cfg = StabilityConfig { refinement: 1, base_point: None, trend: false };
    let mut deltas = Vec::new();
    for e in &eps {
        let pe = perturb(&sq, &corner_cut(), e).map_err(|e| e.to_string())?;
        let r = check_stability(&pe, &one, &one, &cfg).map_err(|e| e.to_string())?;
        ensure(r.delta > 0.0, || format!("delta({}) = {}", fmt_q(e), r.delta_string()))?;
        deltas.push(format!("{:.4}", r.delta));
    }
    let family = extremal_family(&sq, &corner_cut(), &one, &one, &eps, ExecPolicy::default());
    let ells: Vec<AffineFunction> = family
        .iter()
        .map(|e| e.solution.as_ref().map(|s| s.ell.clone()).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    // Sup norm over the square of the affine difference, attained at a vertex.
    let sup = |i: usize| -> f64 {
        let d = ells[i].sub(&ells[0]);
        sq.vertices().iter().map(|y| to_f64(&d.eval(y)).abs()).fold(0.0, f64::max)
    };
    let fit = (1..=2).map(|i| sup(i) / to_f64(&eps[i])).fold(0.0, f64::max);
    let ratio = sup(3) / (fit * to_f64(&eps[3]));
    ensure(fit > 0.0 && (0.5..=2.0).contains(&ratio), || format!("C = {fit}, validation ratio {ratio}"))?;
    Ok(format!("delta = [{}], C = {fit:.3}, ratio at 1/8 = {ratio:.3}", deltas.join(", ")))
}

fn sweep_determinism() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let write = |name: &str, v: serde_json::Value| std::fs::write(dir.path().join(name), v.to_string()).map_err(|e| e.to_string());
    write("square.json", polytope_to_json(&cube(2, -1, 1)))?;
    write("cuts.json", serde_json::json!({ "cuts": corner_cut().iter().map(cut_to_json).collect::<Vec<_>>() }))?;
    let toml = "polytope = \"square.json\"\nextra = \"cuts.json\"\nrefinement = 1\neps = [\"0\", \"1/32\", \"1/16\", \"1/8\", \"3\"]\n";
    std::fs::write(dir.path().join("run.toml"), toml).map_err(|e| e.to_string())?;
    let cfg = RunConfig::from_file(&dir.path().join("run.toml")).map_err(|e| format!("{e:#}"))?;
    let a = run_sweep(&cfg).map_err(|e| format!("{e:#}"))?;
    let b = run_sweep(&cfg).map_err(|e| format!("{e:#}"))?;
    let (ha, hb) = (determinism_hash(&a), determinism_hash(&b));
    ensure(ha == hb, || format!("{ha} != {hb}"))?;
    Ok(format!("hash {}", &ha[..16]))
}

fn main() {
    let mut s = Suite::default();
    s.check(1, "extremal identity", secs(10), extremal_identity);
    s.check(2, "affine kernel of L", secs(10), affine_kernel);
    s.check(3, "worked square values", secs(1), worked_square);
    s.check(4, "destabilizer soundness", secs(5), destabilizer_soundness);
    s.check(5, "LP versus grid search", secs(30), lp_grid_equivalence);
    s.check(6, "refinement monotonicity", secs(60), refinement_monotone);
    s.check(7, "weighted volume convergence", secs(20), volume_convergence);
    s.check(8, "distance identity", secs(20), distance_identity);
    s.check(9, "mass conservation", secs(10), mass_conservation);
    s.check(10, "openness probe", secs(120), openness_probe);
    s.check(11, "sweep determinism", secs(120), sweep_determinism);
    std::process::exit(s.finish());
}
