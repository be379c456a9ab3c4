//! Rational convex polytopes with primitive integral facet normals.
//!
//! Every predicate here is exact. Vertex enumeration is brute force over
//! `n`-subsets of halfspaces and the hull of a point set is brute force over
//! `n`-subsets of points, which is adequate for `n <= 6` and a few dozen facets.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg;
use crate::lp::{LinearProgram, LpStatus, Relation};
use crate::rational::{dot_int, int_norm_f64, primitive_direction, q_int, Q};

pub const MAX_DIM: usize = 6;

/// Halfspace `⟨normal, y⟩ + offset >= 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Halfspace {
    pub normal: Vec<BigInt>,
    pub offset: Q,
}

impl Halfspace {
    pub fn new(normal: Vec<i64>, offset: Q) -> Self {
        Self {
            normal: normal.into_iter().map(BigInt::from).collect(),
            offset,
        }
    }

    /// Builds from a rational normal, rescaling to the primitive integer one.
    pub fn from_rational(normal: &[Q], offset: Q) -> Option<Self> {
        let (prim, factor) = primitive_direction(normal)?;
        Some(Self {
            normal: prim,
            offset: offset * factor,
        })
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    pub fn eval(&self, y: &[Q]) -> Q {
        dot_int(&self.normal, y) + &self.offset
    }

    pub fn normal_q(&self) -> Vec<Q> {
        self.normal.iter().map(q_int).collect()
    }

    pub fn is_primitive(&self) -> bool {
        let g = self
            .normal
            .iter()
            .fold(BigInt::zero(), |acc, x| num_integer::Integer::gcd(&acc, x));
        g.is_one()
    }

    /// Divides normal and offset by the gcd of the normal entries.
    pub fn primitive(&self) -> Option<Self> {
        Self::from_rational(&self.normal_q(), self.offset.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    pub normal: Vec<BigInt>,
    pub offset: Q,
    pub vertex_ids: Vec<usize>,
}

impl Facet {
    pub fn halfspace(&self) -> Halfspace {
        Halfspace {
            normal: self.normal.clone(),
            offset: self.offset.clone(),
        }
    }

    pub fn eval(&self, y: &[Q]) -> Q {
        dot_int(&self.normal, y) + &self.offset
    }

    /// `1/‖u_F‖₂`, the factor converting Euclidean facet measure to `dσ`.
    /// Exact integration never uses this float; see [`Facet::chart_coordinate`].
    pub fn lattice_density(&self) -> f64 {
        1.0 / int_norm_f64(&self.normal)
    }

    /// Index of the coordinate dropped when charting the facet hyperplane.
    /// Projecting along it maps `dσ` to Lebesgue measure divided by `|u_j|`.
    pub fn chart_coordinate(&self) -> usize {
        self.normal
            .iter()
            .position(|x| !x.is_zero())
            .expect("facet normal is nonzero")
    }
}

/// Full-dimensional bounded rational polytope `{y : ⟨u_F, y⟩ + a_F >= 0}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polytope {
    dim: usize,
    facets: Vec<Facet>,
    vertices: Vec<Vec<Q>>,
}

impl Polytope {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// Vertices in lexicographic order.
    pub fn vertices(&self) -> &[Vec<Q>] {
        &self.vertices
    }

    pub fn halfspaces(&self) -> Vec<Halfspace> {
        self.facets.iter().map(Facet::halfspace).collect()
    }

    pub fn contains(&self, y: &[Q]) -> bool {
        self.facets.iter().all(|f| !f.eval(y).is_negative())
    }

    pub fn is_interior(&self, y: &[Q]) -> bool {
        self.facets.iter().all(|f| f.eval(y).is_positive())
    }

    pub fn vertex_centroid(&self) -> Vec<Q> {
        let k = Q::from_integer(BigInt::from(self.vertices.len()));
        (0..self.dim)
            .map(|i| self.vertices.iter().map(|v| &v[i]).sum::<Q>() / &k)
            .collect()
    }

    /// The origin when it is interior, otherwise the vertex centroid.
    pub fn default_base_point(&self) -> Vec<Q> {
        let origin = vec![Q::zero(); self.dim];
        if self.is_interior(&origin) {
            origin
        } else {
            self.vertex_centroid()
        }
    }

    /// Largest and smallest values of a linear functional over the polytope.
    pub fn support(&self, normal: &[BigInt]) -> (Q, Q) {
        let vals: Vec<Q> = self.vertices.iter().map(|v| dot_int(normal, v)).collect();
        let min = vals.iter().min().cloned().unwrap();
        let max = vals.iter().max().cloned().unwrap();
        (min, max)
    }

    /// Smooth (Delzant) check: every vertex lies on exactly `n` facets whose
    /// normals form a lattice basis.
    pub fn is_delzant(&self) -> bool {
        (0..self.vertices.len()).all(|vi| {
            let incident: Vec<&Facet> = self
                .facets
                .iter()
                .filter(|f| f.vertex_ids.contains(&vi))
                .collect();
            if incident.len() != self.dim {
                return false;
            }
            let m: Vec<Vec<Q>> = incident
                .iter()
                .map(|f| f.normal.iter().map(q_int).collect())
                .collect();
            linalg::det(&m).abs().is_one()
        })
    }

    /// Integer bounding box of `scale · P`.
    pub fn scaled_bounding_box(&self, scale: &Q) -> Vec<(BigInt, BigInt)> {
        (0..self.dim)
            .map(|i| {
                let vals = self.vertices.iter().map(|v| &v[i] * scale);
                let lo = vals.clone().min().unwrap().floor().to_integer();
                let hi = vals.max().unwrap().ceil().to_integer();
                (lo, hi)
            })
            .collect()
    }
}

fn check_inputs(dim: usize, hs: &[Halfspace]) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::InvalidInput(format!(
            "dimension {dim} outside 1..={MAX_DIM}"
        )));
    }
    if hs.is_empty() {
        return Err(Error::InvalidInput("no halfspaces given".into()));
    }
    for h in hs {
        if h.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: h.dim(),
            });
        }
        if h.normal.iter().all(Zero::is_zero) {
            return Err(Error::InvalidInput("zero halfspace normal".into()));
        }
    }
    Ok(())
}

fn normalize_all(hs: &[Halfspace]) -> Vec<Halfspace> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for h in hs {
        let p = h.primitive().expect("nonzero normal");
        if seen.insert(p.clone()) {
            out.push(p);
        }
    }
    out
}

/// Checks that `{⟨u,y⟩ + a >= 0}` is nonempty and bounded by minimizing and
/// maximizing each coordinate.
fn check_feasible_bounded(dim: usize, hs: &[Halfspace]) -> Result<()> {
    for k in 0..dim {
        for sign in [1i64, -1] {
            let mut obj = vec![Q::zero(); dim];
            obj[k] = Q::from_integer(BigInt::from(sign));
            let mut lp = LinearProgram::new(obj);
            for h in hs {
                lp.constrain(h.normal_q(), Relation::Ge, -h.offset.clone());
            }
            match lp.solve().status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => return Err(Error::EmptyPolytope),
                LpStatus::Unbounded => return Err(Error::UnboundedPolytope),
            }
        }
    }
    Ok(())
}

fn for_each_subset(m: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > m {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == i - 1 + m - k {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn enumerate_vertices(dim: usize, hs: &[Halfspace]) -> Vec<Vec<Q>> {
    let mut verts: Vec<Vec<Q>> = Vec::new();
    let mut seen = HashSet::new();
    for_each_subset(hs.len(), dim, |sub| {
        let a: Vec<Vec<Q>> = sub.iter().map(|&i| hs[i].normal_q()).collect();
        let b: Vec<Q> = sub.iter().map(|&i| -hs[i].offset.clone()).collect();
        if let Some(x) = linalg::solve(&a, &b) {
            if hs.iter().all(|h| !h.eval(&x).is_negative()) && seen.insert(x.clone()) {
                verts.push(x);
            }
        }
    });
    verts.sort();
    verts
}

/// Builds from normalized halfspaces already known to bound a bounded region.
pub(crate) fn assemble(dim: usize, hs: Vec<Halfspace>) -> Result<Polytope> {
    let vertices = enumerate_vertices(dim, &hs);
    if vertices.is_empty() {
        return Err(Error::EmptyPolytope);
    }
    let refs: Vec<&[Q]> = vertices.iter().map(|v| v.as_slice()).collect();
    let rank = linalg::affine_rank(&refs).unwrap_or(0);
    if rank < dim {
        return Err(Error::DegeneratePolytope(format!(
            "vertices span an affine subspace of dimension {rank} < {dim}"
        )));
    }
    let mut facets = Vec::new();
    for h in hs {
        let ids: Vec<usize> = vertices
            .iter()
            .enumerate()
            .filter(|(_, v)| h.eval(v).is_zero())
            .map(|(i, _)| i)
            .collect();
        let on: Vec<&[Q]> = ids.iter().map(|&i| vertices[i].as_slice()).collect();
        if linalg::affine_rank(&on).is_some_and(|r| r + 1 == dim) {
            facets.push(Facet {
                normal: h.normal,
                offset: h.offset,
                vertex_ids: ids,
            });
        }
    }
    Ok(Polytope {
        dim,
        facets,
        vertices,
    })
}

/// H-representation constructor. Normals are divided by their gcd, redundant
/// halfspaces are dropped and vertices are enumerated exactly.
pub fn build_from_halfspaces(dim: usize, halfspaces: &[Halfspace]) -> Result<Polytope> {
    check_inputs(dim, halfspaces)?;
    let hs = normalize_all(halfspaces);
    check_feasible_bounded(dim, &hs)?;
    assemble(dim, hs)
}

/// Same as [`build_from_halfspaces`] without the LP emptiness/boundedness
/// screen; callers guarantee boundedness (e.g. by including a bounding polytope).
pub(crate) fn build_bounded(dim: usize, halfspaces: &[Halfspace]) -> Result<Polytope> {
    check_inputs(dim, halfspaces)?;
    assemble(dim, normalize_all(halfspaces))
}

/// Convex hull of a rational point set.
pub fn build_from_vertices(points: &[Vec<Q>]) -> Result<Polytope> {
    let Some(first) = points.first() else {
        return Err(Error::DegeneratePolytope("no points".into()));
    };
    let dim = first.len();
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::InvalidInput(format!(
            "dimension {dim} outside 1..={MAX_DIM}"
        )));
    }
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: p.len(),
        });
    }
    let mut pts: Vec<Vec<Q>> = points.to_vec();
    pts.sort();
    pts.dedup();
    let refs: Vec<&[Q]> = pts.iter().map(|v| v.as_slice()).collect();
    let rank = linalg::affine_rank(&refs).unwrap_or(0);
    if rank < dim {
        return Err(Error::DegeneratePolytope(format!(
            "points span an affine subspace of dimension {rank} < {dim}"
        )));
    }
    let mut hs = Vec::new();
    let mut seen = HashSet::new();
    for_each_subset(pts.len(), dim, |sub| {
        let base = &pts[sub[0]];
        let diffs: Vec<Vec<Q>> = sub[1..]
            .iter()
            .map(|&i| pts[i].iter().zip(base).map(|(a, b)| a - b).collect())
            .collect();
        let ns = linalg::null_space(&diffs, dim);
        if ns.len() != 1 {
            return;
        }
        let Some(h) = Halfspace::from_rational(&ns[0], Q::zero()) else {
            return;
        };
        let offset = -dot_int(&h.normal, base);
        let h = Halfspace {
            normal: h.normal,
            offset,
        };
        let signs: Vec<Q> = pts.iter().map(|p| h.eval(p)).collect();
        let h = if signs.iter().all(|s| !s.is_negative()) {
            h
        } else if signs.iter().all(|s| !s.is_positive()) {
            Halfspace {
                normal: h.normal.iter().map(|x| -x).collect(),
                offset: -h.offset,
            }
        } else {
            return;
        };
        if seen.insert(h.clone()) {
            hs.push(h);
        }
    });
    assemble(dim, hs)
}

/// One extra halfspace `⟨normal, y⟩ + base_offset − eps·rate >= 0` of an
/// ε-perturbation (a blow-up facet moving inward with speed `rate`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerturbationCut {
    pub normal: Vec<BigInt>,
    pub base_offset: Q,
    pub rate: Q,
}

impl PerturbationCut {
    pub fn new(normal: Vec<i64>, base_offset: Q, rate: Q) -> Self {
        Self {
            normal: normal.into_iter().map(BigInt::from).collect(),
            base_offset,
            rate,
        }
    }

    pub fn at(&self, eps: &Q) -> Halfspace {
        Halfspace {
            normal: self.normal.clone(),
            offset: &self.base_offset - eps * &self.rate,
        }
    }
}

fn validate_cuts(p: &Polytope, extra: &[PerturbationCut]) -> Result<()> {
    for (index, cut) in extra.iter().enumerate() {
        if cut.normal.len() != p.dim() {
            return Err(Error::DimensionMismatch {
                expected: p.dim(),
                got: cut.normal.len(),
            });
        }
        if cut.normal.iter().all(Zero::is_zero) || !cut.rate.is_positive() {
            return Err(Error::InvalidInput(format!(
                "cut {index} needs a nonzero normal and positive rate"
            )));
        }
        let h = cut.at(&Q::zero());
        if p.vertices().iter().any(|v| h.eval(v).is_negative()) {
            return Err(Error::InvalidPerturbation { index });
        }
    }
    Ok(())
}

/// The polytope `P_ε ⊆ P` cut out by `P`'s facets and the shifted extra
/// halfspaces.
pub fn perturb(p: &Polytope, extra: &[PerturbationCut], eps: &Q) -> Result<Polytope> {
    if eps.is_negative() {
        return Err(Error::InvalidInput("eps must be nonnegative".into()));
    }
    validate_cuts(p, extra)?;
    let mut hs = p.halfspaces();
    hs.extend(extra.iter().map(|c| c.at(eps)));
    match build_bounded(p.dim(), &hs) {
        Err(Error::DegeneratePolytope(_)) => Err(Error::EmptyPolytope),
        other => other,
    }
}

/// Critical values of a perturbation family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerturbationLimits {
    /// Every cut is a genuine facet for ε strictly above this value.
    pub active_above: Q,
    /// Below this ε no cut has reached a second vertex of `P`, so on
    /// `(active_above, stable_below)` the combinatorial type is fixed.
    pub stable_below: Q,
    /// At or above this ε some cut leaves no full-dimensional region.
    pub empty_at: Q,
}

pub fn perturbation_limits(p: &Polytope, extra: &[PerturbationCut]) -> Result<PerturbationLimits> {
    validate_cuts(p, extra)?;
    let mut active = Q::zero();
    let mut stable: Option<Q> = None;
    let mut empty: Option<Q> = None;
    for cut in extra {
        let h = cut.at(&Q::zero());
        let mut vals: Vec<Q> = p.vertices().iter().map(|v| h.eval(v)).collect();
        vals.sort();
        vals.dedup();
        let first = &vals[0] / &cut.rate;
        let second = &vals[1.min(vals.len() - 1)] / &cut.rate;
        let last = vals.last().unwrap() / &cut.rate;
        active = active.max(first);
        stable = Some(stable.map_or(second.clone(), |s: Q| s.min(second)));
        empty = Some(empty.map_or(last.clone(), |e: Q| e.min(last)));
    }
    let big = || Q::from_integer(BigInt::from(i64::MAX));
    Ok(PerturbationLimits {
        active_above: active,
        stable_below: stable.unwrap_or_else(big),
        empty_at: empty.unwrap_or_else(big),
    })
}

/// True when every vertex of `inner` lies in `outer`.
pub fn contains_polytope(outer: &Polytope, inner: &Polytope) -> bool {
    inner.vertices().iter().all(|v| outer.contains(v))
}

pub fn same_h_representation(a: &Polytope, b: &Polytope) -> bool {
    let sa: HashSet<Halfspace> = a.halfspaces().into_iter().collect();
    let sb: HashSet<Halfspace> = b.halfspaces().into_iter().collect();
    sa == sb && a.vertices() == b.vertices()
}

/// Euclidean norm of a facet normal as a float (diagnostics only).
pub fn normal_norm(f: &Facet) -> f64 {
    f.normal
        .iter()
        .map(|x| x.to_f64().unwrap().powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Axis-aligned box `[lo, hi]^n` with integer bounds.
pub fn cube(dim: usize, lo: i64, hi: i64) -> Polytope {
    let mut hs = Vec::new();
    for i in 0..dim {
        let mut e = vec![0; dim];
        e[i] = 1;
        hs.push(Halfspace::new(e.clone(), Q::from_integer(BigInt::from(-lo))));
        e[i] = -1;
        hs.push(Halfspace::new(e, Q::from_integer(BigInt::from(hi))));
    }
    build_from_halfspaces(dim, &hs).expect("box is a valid polytope")
}

/// Standard simplex `conv(0, e_1, ..., e_n)`.
pub fn standard_simplex(dim: usize) -> Polytope {
    let mut hs = Vec::new();
    for i in 0..dim {
        let mut e = vec![0; dim];
        e[i] = 1;
        hs.push(Halfspace::new(e, Q::zero()));
    }
    hs.push(Halfspace::new(vec![-1; dim], Q::one()));
    build_from_halfspaces(dim, &hs).expect("simplex is a valid polytope")
}
