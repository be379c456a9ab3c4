//! Exact integration of polynomials over simplices, triangulated regions and
//! the lattice-normalized boundary `dσ`, plus Grundmann–Möller quadrature for
//! weights that are only available as black-box functions.
//!
//! The exact kernel expands the integrand in barycentric coordinates
//! `λ_0..λ_d` of a `d`-simplex `S` and applies
//! `∫_S λ^β = d! · vol(S) · ∏β_i! / (|β| + d)!`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::parallel::{self, ExecPolicy};
use crate::plfunction::PLConvexFunction;
use crate::polynomial::Polynomial;
use crate::polytope::Polytope;
use crate::rational::{factorial, to_f64, Q};
use crate::triangulation::{simplex_volume, triangulate, Triangulation};

pub const DEFAULT_QUADRATURE_DEGREE: u32 = 7;

/// A number that is exact when every input was exact.
#[derive(Clone, PartialEq)]
pub enum Value {
    Exact(Q),
    /// Float result with the degree of the quadrature rule that produced it.
    Approx { value: f64, degree: u32 },
}

impl Value {
    pub fn zero() -> Self {
        Value::Exact(Q::zero())
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(x) => to_f64(x),
            Value::Approx { value, .. } => *value,
        }
    }

    pub fn exact(&self) -> Option<&Q> {
        match self {
            Value::Exact(x) => Some(x),
            Value::Approx { .. } => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Value::Exact(_))
    }

    pub fn degree(&self) -> Option<u32> {
        match self {
            Value::Exact(_) => None,
            Value::Approx { degree, .. } => Some(*degree),
        }
    }

    fn combine(&self, other: &Value, exact: impl Fn(&Q, &Q) -> Q, float: impl Fn(f64, f64) -> f64) -> Value {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(exact(a, b)),
            _ => Value::Approx {
                value: float(self.to_f64(), other.to_f64()),
                degree: self.degree().max(other.degree()).unwrap_or(0),
            },
        }
    }

    pub fn add(&self, other: &Value) -> Value {
        self.combine(other, |a, b| a + b, |a, b| a + b)
    }

    pub fn sub(&self, other: &Value) -> Value {
        self.combine(other, |a, b| a - b, |a, b| a - b)
    }

    pub fn mul(&self, other: &Value) -> Value {
        self.combine(other, |a, b| a * b, |a, b| a * b)
    }

    pub fn scale(&self, c: &Q) -> Value {
        match self {
            Value::Exact(x) => Value::Exact(x * c),
            Value::Approx { value, degree } => Value::Approx {
                value: value * to_f64(c),
                degree: *degree,
            },
        }
    }

    /// Sum in iteration order (fixed order keeps float results reproducible).
    pub fn sum<'a>(it: impl IntoIterator<Item = &'a Value>) -> Value {
        it.into_iter().fold(Value::zero(), |acc, v| acc.add(v))
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(x) => write!(f, "{}", crate::rational::fmt_q(x)),
            Value::Approx { value, degree } => write!(f, "{value:e} (deg {degree})"),
        }
    }
}

type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Black-box positive weight, integrated by fixed-degree quadrature.
#[derive(Clone)]
pub struct SmoothWeight {
    pub name: String,
    evaluator: Evaluator,
    pub quadrature_degree: u32,
}

impl SmoothWeight {
    pub fn new(
        name: impl Into<String>,
        quadrature_degree: u32,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            evaluator: Arc::new(f),
            quadrature_degree,
        }
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        (self.evaluator)(y)
    }

    pub fn with_degree(mut self, degree: u32) -> Self {
        self.quadrature_degree = degree;
        self
    }

    /// `exp(a_0 + Σ a_i y_i)`.
    pub fn exp_linear(params: Vec<f64>, quadrature_degree: u32) -> Self {
        let name = format!("exp_linear{params:?}");
        Self::new(name, quadrature_degree, move |y| {
            (params[0] + params[1..].iter().zip(y).map(|(a, x)| a * x).sum::<f64>()).exp()
        })
    }
}

impl fmt::Debug for SmoothWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SmoothWeight({}, deg {})", self.name, self.quadrature_degree)
    }
}

/// Weight function on `P`: exact polynomial or sampled-smooth.
#[derive(Clone, Debug)]
pub enum Weight {
    Polynomial(Polynomial),
    Smooth(SmoothWeight),
}

impl Weight {
    pub fn one(dim: usize) -> Self {
        Weight::Polynomial(Polynomial::one(dim))
    }

    pub fn constant(dim: usize, c: Q) -> Self {
        Weight::Polynomial(Polynomial::constant(dim, c))
    }

    pub fn as_polynomial(&self) -> Option<&Polynomial> {
        match self {
            Weight::Polynomial(p) => Some(p),
            Weight::Smooth(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.as_polynomial().is_some()
    }

    pub fn eval(&self, y: &[Q]) -> Value {
        match self {
            Weight::Polynomial(p) => Value::Exact(p.eval(y)),
            Weight::Smooth(s) => {
                let yf: Vec<f64> = y.iter().map(to_f64).collect();
                Value::Approx {
                    value: s.eval(&yf),
                    degree: s.quadrature_degree,
                }
            }
        }
    }

    pub fn eval_f64(&self, y: &[f64]) -> f64 {
        match self {
            Weight::Polynomial(p) => p.eval_f64(y),
            Weight::Smooth(s) => s.eval(y),
        }
    }

    /// Product with a polynomial factor (used for `w·ℓ_ext`).
    pub fn times(&self, factor: &Polynomial) -> Weight {
        match self {
            Weight::Polynomial(p) => Weight::Polynomial(p * factor),
            Weight::Smooth(s) => {
                let inner = s.clone();
                let f = factor.clone();
                Weight::Smooth(SmoothWeight::new(
                    format!("{}*poly", s.name),
                    s.quadrature_degree,
                    move |y| inner.eval(y) * f.eval_f64(y),
                ))
            }
        }
    }

    pub fn scale(&self, c: &Q) -> Weight {
        self.times(&Polynomial::constant(self.dim_hint(), c.clone()))
    }

    fn dim_hint(&self) -> usize {
        match self {
            Weight::Polynomial(p) => p.dim(),
            // smooth weights ignore the dimension of constant factors
            Weight::Smooth(_) => 0,
        }
    }
}

/// Expands `g(Σ λ_i p_i)` as a polynomial in the barycentric coordinates.
fn to_barycentric(g: &Polynomial, pts: &[&[Q]]) -> Polynomial {
    let d1 = pts.len();
    let n = g.dim();
    let coords: Vec<Polynomial> = (0..n)
        .map(|k| {
            Polynomial::from_terms(
                d1,
                pts.iter().enumerate().map(|(i, p)| {
                    let mut e = vec![0; d1];
                    e[i] = 1;
                    (e, p[k].clone())
                }),
            )
        })
        .collect();
    let mut powers: Vec<Vec<Polynomial>> = coords.iter().map(|c| vec![Polynomial::one(d1), c.clone()]).collect();
    let mut out = Polynomial::zero(d1);
    for (e, c) in g.terms() {
        let mut term = Polynomial::constant(d1, c.clone());
        for (k, &ek) in e.iter().enumerate() {
            while powers[k].len() <= ek as usize {
                let next = powers[k].last().unwrap() * &coords[k];
                powers[k].push(next);
            }
            if ek > 0 {
                term = &term * &powers[k][ek as usize];
            }
        }
        out = &out + &term;
    }
    out
}

/// `∫ λ^β` over a `d`-simplex of unit measure, i.e. `d! ∏β_i! / (|β|+d)!`.
fn dirichlet(beta: &[u32], d: usize, cache: &mut BTreeMap<usize, BigInt>) -> Q {
    let mut fact = |k: usize| cache.entry(k).or_insert_with(|| factorial(k)).clone();
    let num = beta
        .iter()
        .fold(fact(d), |acc, &b| acc * fact(b as usize));
    let total: usize = beta.iter().map(|&b| b as usize).sum::<usize>() + d;
    Q::new(num, fact(total))
}

fn integrate_barycentric(poly: &Polynomial, measure: &Q) -> Q {
    let d = poly.dim() - 1;
    let mut cache = BTreeMap::new();
    let s = poly
        .terms()
        .fold(Q::zero(), |acc, (e, c)| acc + c * dirichlet(e, d, &mut cache));
    s * measure
}

/// Exact `∫_S g` over a `d`-simplex embedded in `R^n` with the given measure.
pub fn simplex_integral(g: &Polynomial, pts: &[&[Q]], measure: &Q) -> Q {
    integrate_barycentric(&to_barycentric(g, pts), measure)
}

/// Exact hat-function moments `∫_S λ_i g` for every vertex `i` of `S`.
pub fn simplex_hat_moments(g: &Polynomial, pts: &[&[Q]], measure: &Q) -> Vec<Q> {
    let bary = to_barycentric(g, pts);
    let d1 = pts.len();
    let mut cache = BTreeMap::new();
    (0..d1)
        .map(|i| {
            let s = bary.terms().fold(Q::zero(), |acc, (e, c)| {
                let mut b = e.clone();
                b[i] += 1;
                acc + c * dirichlet(&b, d1 - 1, &mut cache)
            });
            s * measure
        })
        .collect()
}

/// `∫_S y^alpha dy` over a full-dimensional simplex.
pub fn integrate_monomial_simplex(alpha: &[u32], simplex: &[Vec<Q>]) -> Result<Q> {
    let n = alpha.len();
    if simplex.len() != n + 1 || simplex.iter().any(|p| p.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            got: simplex.len(),
        });
    }
    let pts: Vec<&[Q]> = simplex.iter().map(|p| p.as_slice()).collect();
    let vol = simplex_volume(&pts);
    if vol.is_zero() {
        return Err(Error::DegenerateSimplex);
    }
    let g = Polynomial::monomial(n, alpha.to_vec(), Q::one());
    Ok(simplex_integral(&g, &pts, &vol))
}

/// Grundmann–Möller rule of odd degree `2s+1` on the `d`-simplex: barycentric
/// nodes and weights normalized to sum to one.
pub fn grundmann_moller(d: usize, s: usize) -> Vec<(Vec<f64>, f64)> {
    let deg = 2 * s + 1;
    let mut out = Vec::new();
    let fact = |k: usize| (1..=k).fold(1.0f64, |a, x| a * x as f64);
    for i in 0..=s {
        let denom = (deg + d - 2 * i) as f64;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let w = sign * 2f64.powi(-(2 * s as i32)) * denom.powi(deg as i32)
            / (fact(i) * fact(deg + d - i))
            * fact(d);
        for beta in compositions(s - i, d + 1) {
            let node = beta.iter().map(|&b| (2 * b + 1) as f64 / denom).collect();
            out.push((node, w));
        }
    }
    out
}

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    (0..=total)
        .rev()
        .flat_map(|first| {
            compositions(total - first, parts - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

/// Odd rule degree actually used for a requested degree.
pub fn effective_degree(requested: u32) -> u32 {
    let r = requested.max(1);
    if r % 2 == 1 {
        r
    } else {
        r + 1
    }
}

fn gm_rule(d: usize, degree: u32) -> Vec<(Vec<f64>, f64)> {
    grundmann_moller(d, ((effective_degree(degree) - 1) / 2) as usize)
}

/// Quadrature of `w · (Σ c_i λ_i)` (or of `w · factor(y)`) on one simplex.
fn smooth_simplex(
    s: &SmoothWeight,
    pts: &[&[Q]],
    measure: &Q,
    rule: &[(Vec<f64>, f64)],
    integrand: &dyn Fn(&[f64], &[f64]) -> f64,
) -> f64 {
    let pf: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().map(to_f64).collect()).collect();
    let n = pf[0].len();
    let mut acc = 0.0;
    let mut y = vec![0.0; n];
    for (node, w) in rule {
        for k in 0..n {
            y[k] = node.iter().zip(&pf).map(|(l, p)| l * p[k]).sum();
        }
        acc += w * s.eval(&y) * integrand(&y, node);
    }
    acc * to_f64(measure)
}

/// `∫_S weight · factor` on one simplex.
pub fn weighted_simplex_integral(weight: &Weight, factor: &Polynomial, pts: &[&[Q]], measure: &Q) -> Value {
    match weight {
        Weight::Polynomial(p) => Value::Exact(simplex_integral(&(p * factor), pts, measure)),
        Weight::Smooth(s) => {
            let rule = gm_rule(pts.len() - 1, s.quadrature_degree);
            let v = smooth_simplex(s, pts, measure, &rule, &|y, _| factor.eval_f64(y));
            Value::Approx {
                value: v,
                degree: effective_degree(s.quadrature_degree),
            }
        }
    }
}

/// `[∫_S weight · λ_i]_i` on one simplex.
pub fn weighted_hat_moments(weight: &Weight, pts: &[&[Q]], measure: &Q) -> Vec<Value> {
    match weight {
        Weight::Polynomial(p) => simplex_hat_moments(p, pts, measure)
            .into_iter()
            .map(Value::Exact)
            .collect(),
        Weight::Smooth(s) => {
            let rule = gm_rule(pts.len() - 1, s.quadrature_degree);
            let degree = effective_degree(s.quadrature_degree);
            (0..pts.len())
                .map(|i| Value::Approx {
                    value: smooth_simplex(s, pts, measure, &rule, &|_, l| l[i]),
                    degree,
                })
                .collect()
        }
    }
}

/// One simplex of a region or boundary decomposition with its measure.
#[derive(Clone, Debug)]
pub struct SimplexPiece {
    pub points: Vec<Vec<Q>>,
    pub measure: Q,
    /// Owning cell (simplex index for triangulations).
    pub cell: usize,
}

impl SimplexPiece {
    pub fn refs(&self) -> Vec<&[Q]> {
        self.points.iter().map(|p| p.as_slice()).collect()
    }
}

/// Region and boundary pieces covering `P` and `∂P`.
#[derive(Clone, Debug, Default)]
pub struct PieceComplex {
    pub region: Vec<SimplexPiece>,
    pub boundary: Vec<SimplexPiece>,
}

impl PieceComplex {
    pub fn from_triangulation(t: &Triangulation) -> Self {
        let region = (0..t.simplices().len())
            .map(|s| SimplexPiece {
                points: t.simplex_points(s).iter().map(|p| p.to_vec()).collect(),
                measure: t.simplex_volume(s),
                cell: s,
            })
            .collect();
        let boundary = t
            .boundary_faces()
            .iter()
            .map(|b| SimplexPiece {
                points: b.face.iter().map(|&i| t.points()[i].clone()).collect(),
                measure: t.face_measure(b),
                cell: b.simplex,
            })
            .collect();
        Self { region, boundary }
    }

    /// Pieces for a list of cells subdividing `domain`; boundary pieces are
    /// the cell faces lying on a facet of `domain`, measured with that facet's
    /// normal.
    pub fn from_cells(cells: &[Polytope], domain: &Polytope) -> Self {
        let mut out = PieceComplex::default();
        for (ci, cell) in cells.iter().enumerate() {
            let t = triangulate(cell, 0);
            let local = PieceComplex::from_triangulation(&t);
            out.region.extend(local.region.into_iter().map(|mut p| {
                p.cell = ci;
                p
            }));
            for (b, piece) in t.boundary_faces().iter().zip(local.boundary) {
                let f = &cell.facets()[b.facet];
                let on_domain = domain
                    .facets()
                    .iter()
                    .any(|g| g.normal == f.normal && g.offset == f.offset);
                if on_domain {
                    out.boundary.push(SimplexPiece { cell: ci, ..piece });
                }
            }
        }
        out
    }
}

fn sum_pieces(
    pieces: &[SimplexPiece],
    policy: ExecPolicy,
    f: impl Fn(&SimplexPiece) -> Value + Sync + Send,
) -> Value {
    let parts = parallel::map_ordered(pieces, policy, f);
    Value::sum(parts.iter())
}

/// `∫ weight · factor` over a list of pieces.
pub fn integrate_pieces(weight: &Weight, factor: &Polynomial, pieces: &[SimplexPiece], policy: ExecPolicy) -> Value {
    sum_pieces(pieces, policy, |p| weighted_simplex_integral(weight, factor, &p.refs(), &p.measure))
}

/// `∫ weight · f` where `f` is affine on every piece and given by its values
/// at the piece vertices.
pub fn integrate_pieces_pl(
    weight: &Weight,
    pieces: &[SimplexPiece],
    vertex_values: impl Fn(&SimplexPiece) -> Vec<Q> + Sync + Send,
    policy: ExecPolicy,
) -> Value {
    sum_pieces(pieces, policy, |p| {
        let m = weighted_hat_moments(weight, &p.refs(), &p.measure);
        let vals = vertex_values(p);
        let terms: Vec<Value> = m.iter().zip(&vals).map(|(mi, fi)| mi.scale(fi)).collect();
        Value::sum(terms.iter())
    })
}

/// Exact `∫_P g dy` over a triangulated region.
pub fn integrate_polynomial_region(g: &Polynomial, t: &Triangulation) -> Q {
    let pieces = PieceComplex::from_triangulation(t).region;
    match integrate_pieces(&Weight::Polynomial(g.clone()), &Polynomial::one(g.dim()), &pieces, ExecPolicy::default()) {
        Value::Exact(x) => x,
        Value::Approx { .. } => unreachable!("polynomial integrals are exact"),
    }
}

/// Exact `∫_{∂P} g dσ` (lattice-normalized boundary measure).
pub fn integrate_polynomial_boundary(g: &Polynomial, p: &Polytope) -> Q {
    boundary_integral(g, &triangulate(p, 0))
}

/// Exact `∫_{∂P} g dσ` over the boundary faces of a given triangulation.
pub fn boundary_integral(g: &Polynomial, t: &Triangulation) -> Q {
    let pieces = PieceComplex::from_triangulation(t).boundary;
    match integrate_pieces(&Weight::Polynomial(g.clone()), &Polynomial::one(g.dim()), &pieces, ExecPolicy::default()) {
        Value::Exact(x) => x,
        Value::Approx { .. } => unreachable!("polynomial integrals are exact"),
    }
}

/// `Σ_F σ(F)`, the total lattice-normalized boundary measure.
pub fn facet_measure_total(p: &Polytope) -> Q {
    integrate_polynomial_boundary(&Polynomial::one(p.dim()), p)
}

/// Volume of `P` (exact).
pub fn polytope_volume(p: &Polytope) -> Q {
    triangulate(p, 0).total_volume()
}

/// Checks that `f` is affine on every simplex of `t` by comparing its value at
/// the barycenter with the average of its vertex values, and returns the
/// vertex values per simplex.
pub fn pl_values_on(f: &PLConvexFunction, t: &Triangulation) -> Result<Vec<Q>> {
    let values: Vec<Q> = t.points().iter().map(|y| f.eval(y)).collect();
    let n1 = Q::from_integer(BigInt::from(t.dim() + 1));
    for (si, s) in t.simplices().iter().enumerate() {
        let bary: Vec<Q> = (0..t.dim())
            .map(|k| s.iter().map(|&i| &t.points()[i][k]).sum::<Q>() / &n1)
            .collect();
        let avg = s.iter().map(|&i| &values[i]).sum::<Q>() / &n1;
        if f.eval(&bary) != avg {
            return Err(Error::TriangulationTooCoarse { simplex: si });
        }
    }
    Ok(values)
}

/// Exact `∫_P f · g dy` for a PL function affine on every simplex of `t`.
pub fn integrate_pl_product(f: &PLConvexFunction, g: &Polynomial, t: &Triangulation) -> Result<Q> {
    let values = pl_values_on(f, t)?;
    let pieces = PieceComplex::from_triangulation(t).region;
    let v = integrate_pieces_pl(
        &Weight::Polynomial(g.clone()),
        &pieces,
        |p| t.simplices()[p.cell].iter().map(|&i| values[i].clone()).collect(),
        ExecPolicy::default(),
    );
    Ok(v.exact().cloned().expect("polynomial integrals are exact"))
}

/// Result of a quadrature-based integral.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothIntegral {
    pub value: f64,
    pub degree: u32,
}

/// `∫_P g · f dy` with `g` a smooth weight (and optional PL factor `f`),
/// Grundmann–Möller rule per simplex of `t`.
pub fn integrate_smooth(g: &SmoothWeight, factor: Option<&PLConvexFunction>, t: &Triangulation) -> Result<SmoothIntegral> {
    let weight = Weight::Smooth(g.clone());
    let pieces = PieceComplex::from_triangulation(t).region;
    let v = match factor {
        None => integrate_pieces(&weight, &Polynomial::one(t.dim()), &pieces, ExecPolicy::default()),
        Some(f) => {
            let values = pl_values_on(f, t)?;
            integrate_pieces_pl(
                &weight,
                &pieces,
                |p| t.simplices()[p.cell].iter().map(|&i| values[i].clone()).collect(),
                ExecPolicy::default(),
            )
        }
    };
    Ok(SmoothIntegral {
        value: v.to_f64(),
        degree: effective_degree(g.quadrature_degree),
    })
}
