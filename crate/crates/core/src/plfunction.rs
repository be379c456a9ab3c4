//! Convex piecewise-linear functions on a polytope.

use std::sync::Arc;

use num_traits::{One, Signed};

use crate::affine::AffineFunction;
use crate::error::{Error, Result};
use crate::linalg;
use crate::polytope::{build_bounded, build_from_vertices, Halfspace, Polytope};
use crate::quadrature::PieceComplex;
use crate::rational::Q;
use crate::triangulation::Triangulation;

#[derive(Clone, Debug)]
pub enum PlRepr {
    /// `max_i ℓ_i`, convex by construction.
    MaxOfAffine(Vec<AffineFunction>),
    /// Values at the points of a triangulation, affine on every simplex.
    VertexValues {
        triangulation: Arc<Triangulation>,
        values: Vec<Q>,
    },
}

#[derive(Clone, Debug)]
pub struct PLConvexFunction {
    domain: Arc<Polytope>,
    repr: PlRepr,
}

/// Affine function interpolating `values` at the vertices of a simplex.
pub fn affine_through(pts: &[&[Q]], values: &[Q]) -> Result<AffineFunction> {
    let a: Vec<Vec<Q>> = pts
        .iter()
        .map(|p| std::iter::once(Q::one()).chain(p.iter().cloned()).collect())
        .collect();
    let c = linalg::solve(&a, values).ok_or(Error::DegenerateSimplex)?;
    Ok(AffineFunction::from_coeffs(&c))
}

/// Per-wall convexity slack: value at the far vertex minus the extension of
/// the affine piece on the near simplex. Nonnegative on every wall iff the
/// PL function is convex.
pub fn wall_slacks(t: &Triangulation, values: &[Q]) -> Vec<Q> {
    t.interior_walls()
        .iter()
        .map(|w| {
            let s0 = w.simplices[0];
            let b = w.opposite[1];
            let mu = t.barycentric(s0, &t.points()[b]);
            let ext: Q = t.simplices()[s0]
                .iter()
                .zip(&mu)
                .map(|(&i, m)| m * &values[i])
                .sum();
            &values[b] - ext
        })
        .collect()
}

impl PLConvexFunction {
    pub fn max_of_affine(domain: &Polytope, pieces: Vec<AffineFunction>) -> Self {
        Self::max_of_affine_arc(Arc::new(domain.clone()), pieces)
    }

    pub fn max_of_affine_arc(domain: Arc<Polytope>, pieces: Vec<AffineFunction>) -> Self {
        assert!(!pieces.is_empty(), "max of an empty family");
        assert!(pieces.iter().all(|p| p.dim() == domain.dim()));
        Self {
            domain,
            repr: PlRepr::MaxOfAffine(pieces),
        }
    }

    pub fn affine(domain: &Polytope, f: AffineFunction) -> Self {
        Self::max_of_affine(domain, vec![f])
    }

    /// Vertex-value function; rejects values violating a wall convexity
    /// inequality.
    pub fn vertex_values(t: Arc<Triangulation>, values: Vec<Q>) -> Result<Self> {
        if values.len() != t.points().len() {
            return Err(Error::DimensionMismatch {
                expected: t.points().len(),
                got: values.len(),
            });
        }
        if let Some(i) = wall_slacks(&t, &values).iter().position(|s| s.is_negative()) {
            return Err(Error::InvalidInput(format!(
                "values violate convexity across interior wall {i}"
            )));
        }
        Ok(Self {
            domain: t.polytope_arc(),
            repr: PlRepr::VertexValues {
                triangulation: t,
                values,
            },
        })
    }

    /// Vertex values already known to satisfy the wall inequalities (LP
    /// output, for instance).
    pub fn vertex_values_unchecked(t: Arc<Triangulation>, values: Vec<Q>) -> Self {
        assert_eq!(values.len(), t.points().len());
        Self {
            domain: t.polytope_arc(),
            repr: PlRepr::VertexValues {
                triangulation: t,
                values,
            },
        }
    }

    pub fn domain(&self) -> &Polytope {
        &self.domain
    }

    pub fn domain_arc(&self) -> Arc<Polytope> {
        self.domain.clone()
    }

    pub fn repr(&self) -> &PlRepr {
        &self.repr
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn eval(&self, y: &[Q]) -> Q {
        match &self.repr {
            PlRepr::MaxOfAffine(ps) => ps.iter().map(|p| p.eval(y)).max().unwrap(),
            PlRepr::VertexValues {
                triangulation,
                values,
            } => {
                let (s, bary) = triangulation
                    .locate(y)
                    .expect("evaluation point lies in the domain");
                triangulation.simplices()[s]
                    .iter()
                    .zip(&bary)
                    .map(|(&i, l)| l * &values[i])
                    .sum()
            }
        }
    }

    /// Adds an affine function (keeps the representation).
    pub fn add_affine(&self, xi: &AffineFunction) -> Self {
        let repr = match &self.repr {
            PlRepr::MaxOfAffine(ps) => PlRepr::MaxOfAffine(ps.iter().map(|p| p.add(xi)).collect()),
            PlRepr::VertexValues {
                triangulation,
                values,
            } => PlRepr::VertexValues {
                values: triangulation
                    .points()
                    .iter()
                    .zip(values)
                    .map(|(y, v)| v + xi.eval(y))
                    .collect(),
                triangulation: triangulation.clone(),
            },
        };
        Self {
            domain: self.domain.clone(),
            repr,
        }
    }

    /// `λ·f` for `λ >= 0`.
    pub fn scale(&self, lambda: &Q) -> Self {
        assert!(!lambda.is_negative(), "negative scaling breaks convexity");
        let repr = match &self.repr {
            PlRepr::MaxOfAffine(ps) => PlRepr::MaxOfAffine(ps.iter().map(|p| p.scale(lambda)).collect()),
            PlRepr::VertexValues {
                triangulation,
                values,
            } => PlRepr::VertexValues {
                values: values.iter().map(|v| v * lambda).collect(),
                triangulation: triangulation.clone(),
            },
        };
        Self {
            domain: self.domain.clone(),
            repr,
        }
    }

    /// Affine pieces with the region of `P` where each one is active. Cells
    /// of a max-of-affine function are `{ℓ_i >= ℓ_j ∀ j}`; identical pieces
    /// are merged and lower-dimensional cells dropped. Vertex-value functions
    /// yield one cell per simplex.
    pub fn linearity_cells(&self) -> Vec<(Polytope, AffineFunction)> {
        match &self.repr {
            PlRepr::MaxOfAffine(ps) => {
                let mut uniq: Vec<AffineFunction> = Vec::new();
                for p in ps {
                    if !uniq.contains(p) {
                        uniq.push(p.clone());
                    }
                }
                let n = self.dim();
                let mut out = Vec::new();
                for (i, li) in uniq.iter().enumerate() {
                    let mut hs = self.domain.halfspaces();
                    let mut empty = false;
                    for (j, lj) in uniq.iter().enumerate() {
                        if i == j {
                            continue;
                        }
                        let d = li.sub(lj);
                        match Halfspace::from_rational(&d.gradient, d.constant.clone()) {
                            Some(h) => hs.push(h),
                            // parallel pieces with the same slope: li dominates or never wins
                            None if d.constant.is_negative() => empty = true,
                            None => {}
                        }
                    }
                    if empty {
                        continue;
                    }
                    if let Ok(cell) = build_bounded(n, &hs) {
                        out.push((cell, li.clone()));
                    }
                }
                out
            }
            PlRepr::VertexValues {
                triangulation,
                values,
            } => (0..triangulation.simplices().len())
                .map(|s| {
                    let pts = triangulation.simplex_points(s);
                    let vals: Vec<Q> = triangulation.simplices()[s]
                        .iter()
                        .map(|&i| values[i].clone())
                        .collect();
                    let cell = build_from_vertices(&pts.iter().map(|p| p.to_vec()).collect::<Vec<_>>())
                        .expect("simplices are full-dimensional");
                    (cell, affine_through(&pts, &vals).expect("nondegenerate simplex"))
                })
                .collect(),
        }
    }

    /// Maximal linearity cells: vertex-value simplices sharing one affine
    /// piece are merged into their convex hull.
    pub fn maximal_cells(&self) -> Vec<(Polytope, AffineFunction)> {
        match &self.repr {
            PlRepr::MaxOfAffine(_) => self.linearity_cells(),
            PlRepr::VertexValues {
                triangulation,
                values,
            } => {
                let mut groups: Vec<(AffineFunction, Vec<Vec<Q>>)> = Vec::new();
                for s in 0..triangulation.simplices().len() {
                    let pts = triangulation.simplex_points(s);
                    let vals: Vec<Q> = triangulation.simplices()[s]
                        .iter()
                        .map(|&i| values[i].clone())
                        .collect();
                    let a = affine_through(&pts, &vals).expect("nondegenerate simplex");
                    let owned = pts.iter().map(|p| p.to_vec());
                    match groups.iter_mut().find(|(g, _)| *g == a) {
                        Some((_, ps)) => ps.extend(owned),
                        None => groups.push((a, owned.collect())),
                    }
                }
                groups
                    .into_iter()
                    .map(|(a, ps)| (build_from_vertices(&ps).expect("cells are full-dimensional"), a))
                    .collect()
            }
        }
    }

    /// Region/boundary pieces on which `f` is affine, with the piece's
    /// affine function.
    pub fn pieces(&self) -> (PieceComplex, Vec<AffineFunction>) {
        let cells = self.linearity_cells();
        let (polys, affs): (Vec<Polytope>, Vec<AffineFunction>) = cells.into_iter().unzip();
        (PieceComplex::from_cells(&polys, &self.domain), affs)
    }

    /// Distinct affine pieces; a convex PL function is the maximum of them.
    pub fn affine_pieces(&self) -> Vec<AffineFunction> {
        let mut out: Vec<AffineFunction> = Vec::new();
        for (_, a) in self.maximal_cells() {
            if !out.contains(&a) {
                out.push(a);
            }
        }
        out
    }

    /// Same function in max-of-affine form.
    pub fn to_max_of_affine(&self) -> Self {
        Self::max_of_affine_arc(self.domain.clone(), self.affine_pieces())
    }

    /// Values at the points of `t`.
    pub fn values_on(&self, t: &Triangulation) -> Vec<Q> {
        t.points().iter().map(|y| self.eval(y)).collect()
    }

    /// Minimum over `P`, attained at a vertex of some linearity cell.
    pub fn minimum(&self) -> Q {
        self.linearity_cells()
            .iter()
            .flat_map(|(c, a)| c.vertices().iter().map(|v| a.eval(v)).collect::<Vec<_>>())
            .min()
            .expect("nonempty domain")
    }

    pub fn maximum(&self) -> Q {
        self.domain
            .vertices()
            .iter()
            .map(|v| self.eval(v))
            .max()
            .expect("nonempty domain")
    }

    pub fn is_affine(&self) -> bool {
        let cells = self.linearity_cells();
        cells.windows(2).all(|w| w[0].1 == w[1].1)
    }

    pub fn is_zero(&self) -> bool {
        self.is_affine() && self.linearity_cells()[0].1.is_zero()
    }
}
