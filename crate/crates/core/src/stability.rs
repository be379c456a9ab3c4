//! The toric weighted Mabuchi functional on convex PL functions and the
//! linear-programming search for destabilizers.
//!
//! `L(f) = 2∫_{∂P} f v dσ − c ∫_P f w dy`. With the effective weight
//! `w·ℓ_ext` and `c = 1` the functional vanishes on affine functions, and
//! uniform stability asks for `L(f) >= δ ∫_{∂P} f dσ` on convex `f >= 0`
//! vanishing at an interior base point.
//!
//! The search restricts `f` to functions affine on the simplices of a fixed
//! triangulation. A negative optimum is a genuine destabilizing function; a
//! positive optimum only bounds `δ` on that subcone.

use std::ops::{Add, Div, Mul, Sub};
use std::sync::Arc;

use num_traits::One;

use crate::affine::AffineFunction;
use crate::error::{Error, Result};
use crate::extremal::{solve_extremal, ExtremalSolution};
use crate::lp::{LinearProgram, LpField, LpStatus, Relation};
use crate::parallel::{self, ExecPolicy};
use crate::plfunction::{affine_through, PLConvexFunction, PlRepr};
use crate::polynomial::Polynomial;
use crate::polytope::Polytope;
use crate::quadrature::{integrate_pieces, pl_values_on, weighted_hat_moments, PieceComplex, Value, Weight};
use crate::rational::{fmt_q, from_f64, q, to_f64, Q};
use crate::triangulation::{triangulate, triangulate_arc, Triangulation};

pub const ONE_SIDED_CAVEAT: &str = "delta is minimized over convex functions subordinate to one \
triangulation: a negative value certifies a destabilizer, a positive value is evidence of \
stability on that subcone only";

fn sum_values(vals: impl IntoIterator<Item = Value>) -> Value {
    vals.into_iter().fold(Value::zero(), |a, b| a.add(&b))
}

/// `L(f)` for `f` affine on every simplex of `t`.
pub fn evaluate_l(f: &PLConvexFunction, v: &Weight, w_eff: &Weight, c: &Value, t: &Triangulation) -> Result<Value> {
    let values = pl_values_on(f, t)?;
    let (boundary, region) = hat_integrals(v, w_eff, t, ExecPolicy::default());
    let b = sum_values(boundary.iter().zip(&values).map(|(m, x)| m.scale(x)));
    let r = sum_values(region.iter().zip(&values).map(|(m, x)| m.scale(x)));
    Ok(b.scale(&q(2)).sub(&c.mul(&r)))
}

/// `L(f)` integrated over the linearity cells of `f` itself; shares no code
/// with the triangulation path beyond the simplex kernel.
pub fn evaluate_l_cells(f: &PLConvexFunction, v: &Weight, w_eff: &Weight, c: &Value) -> Value {
    let (pieces, affs) = f.pieces();
    let polys: Vec<Polynomial> = affs.iter().map(Polynomial::from).collect();
    let integrate = |weight: &Weight, list: &[crate::quadrature::SimplexPiece]| {
        let parts: Vec<Value> = list
            .iter()
            .map(|p| integrate_pieces(weight, &polys[p.cell], std::slice::from_ref(p), ExecPolicy::Sequential))
            .collect();
        Value::sum(parts.iter())
    };
    let b = integrate(v, &pieces.boundary);
    let r = integrate(w_eff, &pieces.region);
    b.scale(&q(2)).sub(&c.mul(&r))
}

/// `Fut(ξ) = 2∫_{∂P} ξ v dσ − c∫_P ξ w dy`.
pub fn weighted_futaki(xi: &AffineFunction, p: &Polytope, v: &Weight, w: &Weight, c: &Value) -> Value {
    let pieces = PieceComplex::from_triangulation(&triangulate(p, 0));
    let g = Polynomial::from(xi);
    let b = integrate_pieces(v, &g, &pieces.boundary, ExecPolicy::default());
    let r = integrate_pieces(w, &g, &pieces.region, ExecPolicy::default());
    b.scale(&q(2)).sub(&c.mul(&r))
}

/// Per-point integrals of the hat functions: `(∫_{∂P} φ_p v dσ, ∫_P φ_p w dy)`.
pub fn hat_integrals(v: &Weight, w: &Weight, t: &Triangulation, policy: ExecPolicy) -> (Vec<Value>, Vec<Value>) {
    let np = t.points().len();
    let simplices: Vec<usize> = (0..t.simplices().len()).collect();
    let region_parts = parallel::map_ordered(&simplices, policy, |&s| {
        weighted_hat_moments(w, &t.simplex_points(s), &t.simplex_volume(s))
    });
    let boundary_parts = parallel::map_ordered(t.boundary_faces(), policy, |b| {
        let pts: Vec<&[Q]> = b.face.iter().map(|&i| t.points()[i].as_slice()).collect();
        weighted_hat_moments(v, &pts, &t.face_measure(b))
    });
    let mut region = vec![Value::zero(); np];
    for (s, m) in region_parts.into_iter().enumerate() {
        for (&i, x) in t.simplices()[s].iter().zip(m) {
            region[i] = region[i].add(&x);
        }
    }
    let mut boundary = vec![Value::zero(); np];
    for (b, m) in t.boundary_faces().iter().zip(boundary_parts) {
        for (&i, x) in b.face.iter().zip(m) {
            boundary[i] = boundary[i].add(&x);
        }
    }
    (boundary, region)
}

#[derive(Clone, Debug)]
pub struct Normalization {
    pub function: PLConvexFunction,
    /// The supporting affine function that was subtracted.
    pub support: AffineFunction,
    /// Simplex whose slope was used, for vertex-value functions.
    pub containing_simplex: Option<usize>,
}

/// `f − ℓ` for a supporting affine function `ℓ` of `f` at the interior point
/// `y0`. When `y0` minimizes `f`, `ℓ` is the constant `f(y0)`. Otherwise, for
/// max-of-affine input `ℓ` is the first piece active at `y0`, and for vertex
/// values it is the affine piece of the first simplex containing `y0`.
pub fn normalize(f: &PLConvexFunction, y0: &[Q]) -> Result<Normalization> {
    if y0.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: y0.len(),
        });
    }
    if !f.domain().is_interior(y0) {
        return Err(Error::PointNotInterior);
    }
    let (support, containing_simplex) = match f.repr() {
        _ if f.eval(y0) == f.minimum() => (AffineFunction::constant_fn(f.dim(), f.eval(y0)), None),
        PlRepr::MaxOfAffine(ps) => {
            let top = f.eval(y0);
            (ps.iter().find(|p| p.eval(y0) == top).unwrap().clone(), None)
        }
        PlRepr::VertexValues {
            triangulation,
            values,
        } => {
            let (s, _) = triangulation.locate(y0).ok_or(Error::PointNotInterior)?;
            let vals: Vec<Q> = triangulation.simplices()[s].iter().map(|&i| values[i].clone()).collect();
            (affine_through(&triangulation.simplex_points(s), &vals)?, Some(s))
        }
    };
    let neg = support.scale(&-Q::one());
    Ok(Normalization {
        function: f.add_affine(&neg),
        support,
        containing_simplex,
    })
}

#[derive(Clone, Debug)]
pub struct MaAtom {
    pub cell: Polytope,
    pub gradient: Vec<Q>,
    pub mass: Value,
}

/// Atoms of the weighted non-Archimedean Monge–Ampère measure of a PL
/// function: one per maximal linearity cell, located at the cell's slope.
#[derive(Clone, Debug)]
pub struct NaMeasureAtoms {
    pub atoms: Vec<MaAtom>,
}

impl NaMeasureAtoms {
    pub fn total_mass(&self) -> Value {
        Value::sum(self.atoms.iter().map(|a| &a.mass))
    }
}

pub fn discrete_ma(f: &PLConvexFunction, v: &Weight) -> NaMeasureAtoms {
    let cells = f.maximal_cells();
    let atoms = parallel::map_ordered(&cells, ExecPolicy::default(), |(cell, a)| {
        let region = PieceComplex::from_triangulation(&triangulate(cell, 0)).region;
        MaAtom {
            cell: cell.clone(),
            gradient: a.gradient.clone(),
            mass: integrate_pieces(v, &Polynomial::one(f.dim()), &region, ExecPolicy::Sequential),
        }
    });
    NaMeasureAtoms { atoms }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalizationChecks {
    /// `∫_{∂P} f dσ` of the minimizer.
    pub boundary_integral: f64,
    pub value_at_base_point: f64,
    pub min_value: f64,
}

#[derive(Clone, Debug)]
pub struct StabilityReport {
    /// Optimal value; `+inf` when the cone is trivial (LP infeasible).
    pub delta: f64,
    pub delta_exact: Option<Q>,
    pub minimizer: Option<PLConvexFunction>,
    pub lp_status: LpStatus,
    pub lp_pivots: usize,
    pub triangulation_id: String,
    pub refinement: u32,
    pub base_point: Vec<Q>,
    pub containing_simplex: usize,
    pub normalization_checks: Option<NormalizationChecks>,
    pub quadrature_degree: Option<u32>,
    /// `(k, delta(k))` for the configured and the next refinement.
    pub trend: Vec<(u32, f64)>,
    pub extremal: Option<AffineFunction>,
    pub caveat: &'static str,
}

impl StabilityReport {
    pub fn is_destabilized(&self) -> bool {
        self.lp_status == LpStatus::Optimal && self.delta < 0.0
    }

    pub fn delta_string(&self) -> String {
        match &self.delta_exact {
            Some(d) => fmt_q(d),
            None => crate::rational::fmt_f64(self.delta),
        }
    }
}

struct LpData {
    objective: Vec<Value>,
    sigma: Vec<Value>,
    walls: Vec<(usize, Vec<(usize, Q)>)>,
    base: Vec<(usize, Q)>,
}

fn build_program<T: LpField>(d: &LpData, conv: impl Fn(&Value) -> T, convq: impl Fn(&Q) -> T) -> LinearProgram<T>
where
    for<'a> &'a T: Add<&'a T, Output = T> + Sub<&'a T, Output = T> + Mul<&'a T, Output = T> + Div<&'a T, Output = T>,
{
    let np = d.objective.len();
    let mut lp = LinearProgram::new(d.objective.iter().map(&conv).collect()).nonnegative();
    for (b, ext) in &d.walls {
        let mut row = vec![T::zero(); np];
        row[*b] = T::one();
        for (i, mu) in ext {
            row[*i] = &row[*i] - &convq(mu);
        }
        lp.constrain(row, Relation::Ge, T::zero());
    }
    let mut row = vec![T::zero(); np];
    for (i, l) in &d.base {
        row[*i] = &row[*i] + &convq(l);
    }
    lp.constrain(row, Relation::Eq, T::zero());
    lp.constrain(d.sigma.iter().map(&conv).collect(), Relation::Eq, T::one());
    lp
}

/// Minimizes `L_{v,w_eff}` (with constant `c`) over convex functions affine on
/// the simplices of `t` with `f >= 0`, `f(y0) = 0`, `∫_{∂P} f dσ = 1`.
pub fn search_destabilizer(
    v: &Weight,
    w_eff: &Weight,
    c: &Value,
    t: Arc<Triangulation>,
    y0: &[Q],
) -> Result<StabilityReport> {
    let p = t.polytope();
    if y0.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: y0.len(),
        });
    }
    if !p.is_interior(y0) {
        return Err(Error::PointNotInterior);
    }
    let policy = ExecPolicy::default();
    let (bv, rw) = hat_integrals(v, w_eff, &t, policy);
    let (sigma, _) = hat_integrals(&Weight::one(p.dim()), &Weight::one(p.dim()), &t, policy);
    let objective: Vec<Value> = bv.iter().zip(&rw).map(|(b, r)| b.scale(&q(2)).sub(&c.mul(r))).collect();
    let walls = t
        .interior_walls()
        .iter()
        .map(|w| {
            let s0 = w.simplices[0];
            let b = w.opposite[1];
            let mu = t.barycentric(s0, &t.points()[b]);
            (b, t.simplices()[s0].iter().cloned().zip(mu).collect())
        })
        .collect();
    let (containing_simplex, bary) = t.locate(y0).ok_or(Error::PointNotInterior)?;
    let base = t.simplices()[containing_simplex].iter().cloned().zip(bary).collect();
    let data = LpData {
        objective,
        sigma,
        walls,
        base,
    };
    let exact = data.objective.iter().chain(&data.sigma).all(Value::is_exact);
    let quadrature_degree = data.objective.iter().find_map(Value::degree);

    let (status, point, value, pivots) = if exact {
        let sol = build_program(&data, |x| x.exact().unwrap().clone(), Q::clone).solve();
        (sol.status, sol.point, sol.value, sol.pivots)
    } else {
        let sol = build_program(&data, Value::to_f64, to_f64).solve();
        let point = sol
            .point
            .map(|xs| xs.iter().map(|&x| from_f64(x.max(0.0))).collect::<Result<Vec<Q>>>())
            .transpose()?;
        let value = sol.value.map(from_f64).transpose()?;
        (sol.status, point, value, sol.pivots)
    };

    let mut report = StabilityReport {
        delta: f64::INFINITY,
        delta_exact: None,
        minimizer: None,
        lp_status: status,
        lp_pivots: pivots,
        triangulation_id: t.id(),
        refinement: t.refinement(),
        base_point: y0.to_vec(),
        containing_simplex,
        normalization_checks: None,
        quadrature_degree,
        trend: Vec::new(),
        extremal: None,
        caveat: ONE_SIDED_CAVEAT,
    };
    match status {
        LpStatus::Unbounded => return Err(Error::LpUnbounded),
        LpStatus::Infeasible => return Ok(report),
        LpStatus::Optimal => {}
    }
    let values = point.expect("optimal point");
    let value = value.expect("optimal value");
    let boundary_integral: Value = sum_values(data.sigma.iter().zip(&values).map(|(s, x)| s.scale(x)));
    let min_value = values.iter().map(to_f64).fold(f64::INFINITY, f64::min);
    let f = PLConvexFunction::vertex_values_unchecked(t.clone(), values);
    report.normalization_checks = Some(NormalizationChecks {
        boundary_integral: boundary_integral.to_f64(),
        value_at_base_point: to_f64(&f.eval(y0)),
        min_value,
    });
    report.delta = to_f64(&value);
    report.delta_exact = exact.then_some(value);
    report.minimizer = Some(f);
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct StabilityConfig {
    pub refinement: u32,
    /// Defaults to the origin when interior, else the vertex centroid.
    pub base_point: Option<Vec<Q>>,
    /// Also solve at `refinement + 1`.
    pub trend: bool,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        Self {
            refinement: 1,
            base_point: None,
            trend: true,
        }
    }
}

/// Effective weight `w·ℓ_ext`.
pub fn extremal_weight(w: &Weight, sol: &ExtremalSolution) -> Weight {
    w.times(&Polynomial::from(&sol.ell))
}

/// Solves `ℓ_ext`, then searches for a destabilizer of `L_{v, w·ℓ_ext}` at the
/// configured refinement (and the next one when a trend is requested).
pub fn check_stability(p: &Polytope, v: &Weight, w: &Weight, config: &StabilityConfig) -> Result<StabilityReport> {
    let p = Arc::new(p.clone());
    let sol = solve_extremal(v, w, &triangulate_arc(p.clone(), 0))?;
    let w_eff = extremal_weight(w, &sol);
    let y0 = config.base_point.clone().unwrap_or_else(|| p.default_base_point());
    let levels: Vec<u32> = if config.trend {
        vec![config.refinement, config.refinement + 1]
    } else {
        vec![config.refinement]
    };
    let one = Value::Exact(q(1));
    let mut reports = parallel::map_ordered(&levels, ExecPolicy::default(), |&k| {
        search_destabilizer(v, &w_eff, &one, Arc::new(triangulate_arc(p.clone(), k)), &y0)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let trend: Vec<(u32, f64)> = levels.iter().cloned().zip(reports.iter().map(|r| r.delta)).collect();
    let mut report = reports.swap_remove(0);
    report.trend = trend;
    report.extremal = Some(sol.ell);
    Ok(report)
}

/// True when every entry of the trend is at most its predecessor.
pub fn trend_non_increasing(trend: &[(u32, f64)]) -> bool {
    trend.windows(2).all(|w| w[1].1 <= w[0].1)
}

/// `∫_{∂P} f dσ` over the boundary of `f`'s domain.
pub fn boundary_mass(f: &PLConvexFunction) -> Value {
    let (pieces, affs) = f.pieces();
    let polys: Vec<Polynomial> = affs.iter().map(Polynomial::from).collect();
    let one = Weight::one(f.dim());
    let parts: Vec<Value> = pieces
        .boundary
        .iter()
        .map(|p| integrate_pieces(&one, &polys[p.cell], std::slice::from_ref(p), ExecPolicy::Sequential))
        .collect();
    Value::sum(parts.iter())
}
