//! Deterministic triangulations of polytopes and their uniform refinements.
//!
//! Level 0 is the placing triangulation of the vertices in lexicographic
//! order. Each further level applies the edgewise (Freudenthal) subdivision of
//! every simplex into `2^n` simplices whose vertices are old vertices and edge
//! midpoints. Simplex vertex lists are kept sorted by global point index, which
//! makes the subdivisions of shared faces agree.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg;
use crate::polytope::Polytope;
use crate::rational::{factorial, fmt_q, q_int, Q};

/// An interior `(n-1)`-face shared by two simplices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Wall {
    pub face: Vec<usize>,
    pub simplices: [usize; 2],
    /// Vertex of each adjacent simplex not on the wall.
    pub opposite: [usize; 2],
}

/// A boundary `(n-1)`-simplex lying in one facet of the polytope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryFace {
    pub face: Vec<usize>,
    pub facet: usize,
    pub simplex: usize,
}

#[derive(Clone, Debug)]
pub struct Triangulation {
    polytope: Arc<Polytope>,
    points: Vec<Vec<Q>>,
    simplices: Vec<Vec<usize>>,
    interior_walls: Vec<Wall>,
    boundary: Vec<BoundaryFace>,
    refinement: u32,
}

fn orientation(face: &[&[Q]], x: &[Q]) -> Q {
    let base = face[0];
    let rows: Vec<Vec<Q>> = face[1..]
        .iter()
        .chain(std::iter::once(&x))
        .map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    linalg::det(&rows)
}

/// Lebesgue volume of a full-dimensional simplex.
pub fn simplex_volume(pts: &[&[Q]]) -> Q {
    let n = pts.len() - 1;
    let rows: Vec<Vec<Q>> = pts[1..]
        .iter()
        .map(|p| p.iter().zip(pts[0]).map(|(a, b)| a - b).collect())
        .collect();
    linalg::det(&rows).abs() / q_int(&factorial(n))
}

/// `dσ`-measure of an `(n-1)`-simplex lying in a hyperplane with primitive
/// normal `u`: project along the first coordinate `j` with `u_j ≠ 0`, take the
/// Lebesgue volume there and divide by `|u_j|`.
pub fn facet_simplex_measure(pts: &[&[Q]], normal: &[BigInt]) -> Q {
    let j = normal.iter().position(|x| !x.is_zero()).expect("nonzero normal");
    let d = pts.len() - 1;
    if d == 0 {
        return Q::one() / q_int(&normal[j].abs());
    }
    let proj: Vec<Vec<Q>> = pts
        .iter()
        .map(|p| {
            p.iter()
                .enumerate()
                .filter(|(i, _)| *i != j)
                .map(|(_, x)| x.clone())
                .collect()
        })
        .collect();
    let refs: Vec<&[Q]> = proj.iter().map(|p| p.as_slice()).collect();
    simplex_volume(&refs) / q_int(&normal[j].abs())
}

fn placing(points: &[Vec<Q>], dim: usize) -> Vec<Vec<usize>> {
    // initial simplex: greedy in lexicographic order
    let mut chosen = vec![0usize];
    for i in 1..points.len() {
        if chosen.len() == dim + 1 {
            break;
        }
        let mut cand: Vec<&[Q]> = chosen.iter().map(|&c| points[c].as_slice()).collect();
        cand.push(&points[i]);
        if linalg::affine_rank(&cand) == Some(cand.len() - 1) {
            chosen.push(i);
        }
    }
    let mut simplices = vec![chosen.clone()];
    for i in 0..points.len() {
        if chosen.contains(&i) {
            continue;
        }
        // boundary faces of the current complex with their opposite vertex
        let mut faces: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
        for s in &simplices {
            for skip in 0..s.len() {
                let face: Vec<usize> = s
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != skip)
                    .map(|(_, &v)| v)
                    .collect();
                faces.entry(face).or_default().push(s[skip]);
            }
        }
        let mut boundary: Vec<(Vec<usize>, usize)> = faces
            .into_iter()
            .filter(|(_, opp)| opp.len() == 1)
            .map(|(f, opp)| (f, opp[0]))
            .collect();
        boundary.sort();
        let mut added = Vec::new();
        for (face, opp) in boundary {
            let fp: Vec<&[Q]> = face.iter().map(|&v| points[v].as_slice()).collect();
            let s_in = orientation(&fp, &points[opp]);
            let s_new = orientation(&fp, &points[i]);
            if !s_new.is_zero() && s_new.is_positive() != s_in.is_positive() {
                let mut s = face.clone();
                s.push(i);
                s.sort();
                added.push(s);
            }
        }
        simplices.extend(added);
    }
    simplices
}

/// Edgewise subdivision of the Kuhn simplex `2 >= x_1 >= ... >= x_n >= 0`:
/// returns, for each of the `2^n` subsimplices, its vertices as integer
/// Kuhn coordinates.
fn kuhn_subdivision(dim: usize) -> Vec<Vec<Vec<u8>>> {
    let mut perms: Vec<Vec<usize>> = vec![vec![]];
    for k in 0..dim {
        perms = perms
            .into_iter()
            .flat_map(|p| {
                (0..=k).map(move |pos| {
                    let mut q = p.clone();
                    q.insert(pos, k);
                    q
                })
            })
            .collect();
    }
    let inside = |x: &[u8]| x[0] <= 2 && x.windows(2).all(|w| w[0] >= w[1]);
    let mut out = Vec::new();
    for z in 0..(1u32 << dim) {
        let base: Vec<u8> = (0..dim).map(|i| ((z >> i) & 1) as u8).collect();
        for perm in &perms {
            let mut cur = base.clone();
            let mut verts = vec![cur.clone()];
            for &axis in perm {
                cur[axis] += 1;
                verts.push(cur.clone());
            }
            if verts.iter().all(|v| inside(v)) {
                out.push(verts);
            }
        }
    }
    debug_assert_eq!(out.len(), 1 << dim);
    out
}

struct PointPool {
    points: Vec<Vec<Q>>,
    index: HashMap<Vec<Q>, usize>,
}

impl PointPool {
    fn intern(&mut self, p: Vec<Q>) -> usize {
        if let Some(&i) = self.index.get(&p) {
            return i;
        }
        let i = self.points.len();
        self.index.insert(p.clone(), i);
        self.points.push(p);
        i
    }
}

fn refine_once(points: Vec<Vec<Q>>, simplices: &[Vec<usize>], dim: usize) -> (Vec<Vec<Q>>, Vec<Vec<usize>>) {
    let kuhn = kuhn_subdivision(dim);
    let index = points
        .iter()
        .enumerate()
        .map(|(i, p)| (p.clone(), i))
        .collect();
    let mut pool = PointPool { points, index };
    let half = Q::new(BigInt::one(), BigInt::from(2));
    let mut out = Vec::with_capacity(simplices.len() << dim);
    for s in simplices {
        let v: Vec<Vec<Q>> = s.iter().map(|&i| pool.points[i].clone()).collect();
        let steps: Vec<Vec<Q>> = (1..=dim)
            .map(|k| v[k].iter().zip(&v[k - 1]).map(|(a, b)| (a - b) * &half).collect())
            .collect();
        for sub in &kuhn {
            let mut ids: Vec<usize> = sub
                .iter()
                .map(|x| {
                    let mut p = v[0].clone();
                    for (k, &c) in x.iter().enumerate() {
                        if c > 0 {
                            let c = Q::from_integer(BigInt::from(c));
                            for (pi, si) in p.iter_mut().zip(&steps[k]) {
                                *pi += si * &c;
                            }
                        }
                    }
                    pool.intern(p)
                })
                .collect();
            ids.sort();
            out.push(ids);
        }
    }
    (pool.points, out)
}

/// Triangulates `P` and applies `refinement` rounds of edgewise subdivision.
pub fn triangulate(p: &Polytope, refinement: u32) -> Triangulation {
    triangulate_arc(Arc::new(p.clone()), refinement)
}

pub fn triangulate_arc(p: Arc<Polytope>, refinement: u32) -> Triangulation {
    let dim = p.dim();
    let mut points = p.vertices().to_vec();
    let mut simplices = placing(&points, dim);
    for _ in 0..refinement {
        let (pts, simp) = refine_once(points, &simplices, dim);
        points = pts;
        simplices = simp;
    }
    Triangulation::assemble(p, points, simplices, refinement)
}

impl Triangulation {
    fn assemble(
        polytope: Arc<Polytope>,
        points: Vec<Vec<Q>>,
        simplices: Vec<Vec<usize>>,
        refinement: u32,
    ) -> Self {
        let mut faces: HashMap<Vec<usize>, Vec<(usize, usize)>> = HashMap::new();
        for (si, s) in simplices.iter().enumerate() {
            for skip in 0..s.len() {
                let face: Vec<usize> = s
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != skip)
                    .map(|(_, &v)| v)
                    .collect();
                faces.entry(face).or_default().push((si, s[skip]));
            }
        }
        let mut interior_walls = Vec::new();
        let mut boundary = Vec::new();
        let mut keys: Vec<&Vec<usize>> = faces.keys().collect();
        keys.sort();
        for face in keys {
            let adj = &faces[face];
            match adj.as_slice() {
                [(s0, o0), (s1, o1)] => interior_walls.push(Wall {
                    face: face.clone(),
                    simplices: [*s0, *s1],
                    opposite: [*o0, *o1],
                }),
                [(s0, _)] => {
                    let facet = polytope
                        .facets()
                        .iter()
                        .position(|f| face.iter().all(|&v| f.eval(&points[v]).is_zero()))
                        .expect("boundary face lies in a facet");
                    boundary.push(BoundaryFace {
                        face: face.clone(),
                        facet,
                        simplex: *s0,
                    });
                }
                _ => panic!("face shared by more than two simplices"),
            }
        }
        Self {
            polytope,
            points,
            simplices,
            interior_walls,
            boundary,
            refinement,
        }
    }

    pub fn dim(&self) -> usize {
        self.polytope.dim()
    }

    pub fn polytope(&self) -> &Polytope {
        &self.polytope
    }

    pub fn polytope_arc(&self) -> Arc<Polytope> {
        self.polytope.clone()
    }

    pub fn points(&self) -> &[Vec<Q>] {
        &self.points
    }

    pub fn simplices(&self) -> &[Vec<usize>] {
        &self.simplices
    }

    pub fn interior_walls(&self) -> &[Wall] {
        &self.interior_walls
    }

    pub fn boundary_faces(&self) -> &[BoundaryFace] {
        &self.boundary
    }

    pub fn refinement(&self) -> u32 {
        self.refinement
    }

    pub fn simplex_points(&self, s: usize) -> Vec<&[Q]> {
        self.simplices[s]
            .iter()
            .map(|&i| self.points[i].as_slice())
            .collect()
    }

    pub fn simplex_volume(&self, s: usize) -> Q {
        simplex_volume(&self.simplex_points(s))
    }

    pub fn face_measure(&self, b: &BoundaryFace) -> Q {
        let pts: Vec<&[Q]> = b.face.iter().map(|&i| self.points[i].as_slice()).collect();
        facet_simplex_measure(&pts, &self.polytope.facets()[b.facet].normal)
    }

    pub fn total_volume(&self) -> Q {
        (0..self.simplices.len()).map(|s| self.simplex_volume(s)).sum()
    }

    /// Barycentric coordinates of `y` with respect to simplex `s`.
    pub fn barycentric(&self, s: usize, y: &[Q]) -> Vec<Q> {
        barycentric(&self.simplex_points(s), y).expect("simplices are nondegenerate")
    }

    /// First simplex (in triangulation order) containing `y`, with the
    /// barycentric coordinates of `y` in it.
    pub fn locate(&self, y: &[Q]) -> Option<(usize, Vec<Q>)> {
        (0..self.simplices.len()).find_map(|s| {
            let b = self.barycentric(s, y);
            b.iter().all(|x| !x.is_negative()).then_some((s, b))
        })
    }

    pub fn point_index(&self, y: &[Q]) -> Option<usize> {
        self.points.iter().position(|p| p.as_slice() == y)
    }

    /// Content hash identifying points and simplices.
    pub fn id(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("dim={};k={};", self.dim(), self.refinement));
        for p in &self.points {
            let s: Vec<String> = p.iter().map(fmt_q).collect();
            h.update(s.join(","));
            h.update(";");
        }
        for s in &self.simplices {
            let s: Vec<String> = s.iter().map(|i| i.to_string()).collect();
            h.update(s.join(","));
            h.update("|");
        }
        hex::encode(&h.finalize()[..8])
    }
}

/// Barycentric coordinates of `y` in the simplex with vertices `pts`.
pub fn barycentric(pts: &[&[Q]], y: &[Q]) -> Result<Vec<Q>> {
    let n = y.len();
    // rows: coordinates, plus the affine row sum λ = 1
    let mut a: Vec<Vec<Q>> = (0..n)
        .map(|k| pts.iter().map(|p| p[k].clone()).collect())
        .collect();
    a.push(vec![Q::one(); pts.len()]);
    let mut b: Vec<Q> = y.to_vec();
    b.push(Q::one());
    linalg::solve(&a, &b).ok_or(Error::DegenerateSimplex)
}
