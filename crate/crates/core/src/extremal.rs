//! The weighted extremal affine function `ℓ_ext` and the constant `c_(v,w)`.
//!
//! `ℓ_ext` is the affine function with `2∫_{∂P} ξ v dσ = ∫_P ξ w ℓ_ext dy` for
//! every affine `ξ`. In the basis `{1, y_1, .., y_n}` this is the linear system
//! `M b = r` with Gram matrix `M_ij = ∫_P ξ_i ξ_j w dy` and boundary moments
//! `r_i = 2∫_{∂P} ξ_i v dσ`.

use nalgebra::{DMatrix, DVector};
use num_traits::{Signed, Zero};

use crate::affine::AffineFunction;
use crate::error::{Error, Result};
use crate::linalg;
use crate::parallel::{self, ExecPolicy};
use crate::polynomial::Polynomial;
use crate::polytope::{perturb, PerturbationCut, Polytope};
use crate::quadrature::{effective_degree, grundmann_moller, integrate_pieces, PieceComplex, Value, Weight};
use crate::rational::{fmt_q, from_f64, q, to_f64, Q};
use crate::triangulation::{triangulate, Triangulation};

/// `[1, y_1, .., y_n]`.
pub fn affine_basis(dim: usize) -> Vec<Polynomial> {
    std::iter::once(Polynomial::one(dim))
        .chain((0..dim).map(|i| Polynomial::variable(dim, i)))
        .collect()
}

/// `M_ij = ∫_P ξ_i ξ_j w dy`.
pub fn gram_matrix(w: &Weight, t: &Triangulation) -> Vec<Vec<Value>> {
    let n = t.dim();
    let basis = affine_basis(n);
    let region = PieceComplex::from_triangulation(t).region;
    let mut m = vec![vec![Value::zero(); n + 1]; n + 1];
    for i in 0..=n {
        for j in i..=n {
            let v = integrate_pieces(w, &(&basis[i] * &basis[j]), &region, ExecPolicy::default());
            m[j][i] = v.clone();
            m[i][j] = v;
        }
    }
    m
}

/// `r_i = 2∫_{∂P} ξ_i v dσ`.
pub fn boundary_moment_vector(p: &Polytope, v: &Weight) -> Vec<Value> {
    let boundary = PieceComplex::from_triangulation(&triangulate(p, 0)).boundary;
    affine_basis(p.dim())
        .iter()
        .map(|xi| integrate_pieces(v, xi, &boundary, ExecPolicy::default()).scale(&q(2)))
        .collect()
}

/// Points at which a weight is required to be positive.
#[derive(Clone, Debug, PartialEq)]
pub struct PositivitySamples {
    pub vertices: usize,
    pub barycenters: usize,
    pub quadrature_nodes: usize,
    pub min_value: f64,
}

/// Samples `w` at the triangulation points, simplex barycenters and (for
/// smooth weights) the quadrature nodes. Returns the first nonpositive sample
/// as an error.
pub fn check_positive(w: &Weight, t: &Triangulation) -> Result<PositivitySamples> {
    let mut min_value = f64::INFINITY;
    let mut check = |y: &[Q], what: &str| -> Result<()> {
        let val = w.eval(y);
        let positive = match &val {
            Value::Exact(x) => x.is_positive(),
            Value::Approx { value, .. } => *value > 0.0,
        };
        min_value = min_value.min(val.to_f64());
        if positive {
            Ok(())
        } else {
            let pt: Vec<String> = y.iter().map(fmt_q).collect();
            Err(Error::WeightNotPositive(format!(
                "{:?} at {what} ({})",
                val,
                pt.join(", ")
            )))
        }
    };
    for y in t.points() {
        check(y, "vertex")?;
    }
    let n1 = Q::from_integer((t.dim() + 1).into());
    for s in t.simplices() {
        let bary: Vec<Q> = (0..t.dim())
            .map(|k| s.iter().map(|&i| &t.points()[i][k]).sum::<Q>() / &n1)
            .collect();
        check(&bary, "barycenter")?;
    }
    let mut quadrature_nodes = 0;
    if let Weight::Smooth(sw) = w {
        let rule = grundmann_moller(t.dim(), ((effective_degree(sw.quadrature_degree) - 1) / 2) as usize);
        for si in 0..t.simplices().len() {
            let pts = t.simplex_points(si);
            for (node, _) in &rule {
                let y: Vec<f64> = (0..t.dim())
                    .map(|k| node.iter().zip(&pts).map(|(l, p)| l * to_f64(&p[k])).sum())
                    .collect();
                let yq: Vec<Q> = y.iter().map(|&x| from_f64(x)).collect::<Result<_>>()?;
                check(&yq, "quadrature node")?;
                quadrature_nodes += 1;
            }
        }
    }
    Ok(PositivitySamples {
        vertices: t.points().len(),
        barycenters: t.simplices().len(),
        quadrature_nodes,
        min_value,
    })
}

#[derive(Clone, Debug)]
pub struct ExtremalSolution {
    pub ell: AffineFunction,
    /// False when a smooth weight forced the float path; `ell` then holds the
    /// binary value of the float solution.
    pub exact: bool,
    pub gram: Vec<Vec<Value>>,
    pub rhs: Vec<Value>,
    /// `max_i |r_i - ∫_P ξ_i w ℓ dy|`, recomputed by direct integration.
    pub residual: f64,
    pub residual_exact: Option<Q>,
    pub min_eigenvalue_estimate: f64,
    pub samples: PositivitySamples,
    pub quadrature_degree: Option<u32>,
}

impl ExtremalSolution {
    pub fn coefficients_f64(&self) -> Vec<f64> {
        self.ell.coeffs().iter().map(to_f64).collect()
    }
}

fn to_dmatrix(m: &[Vec<Value>]) -> DMatrix<f64> {
    let n = m.len();
    DMatrix::from_fn(n, n, |i, j| m[i][j].to_f64())
}

fn eigen_range(m: &DMatrix<f64>) -> (f64, f64) {
    let eig = m.clone().symmetric_eigen().eigenvalues;
    let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Solves for `ℓ_ext` on `P` (triangulated by `t`).
pub fn solve_extremal(v: &Weight, w: &Weight, t: &Triangulation) -> Result<ExtremalSolution> {
    let n = t.dim();
    let samples = check_positive(w, t)?;
    let gram = gram_matrix(w, t);
    let rhs = boundary_moment_vector(t.polytope(), v);
    let dm = to_dmatrix(&gram);
    let (lo, hi) = eigen_range(&dm);
    let exact_inputs = gram.iter().flatten().chain(&rhs).all(Value::is_exact);

    let (ell, exact) = if exact_inputs {
        let mq: Vec<Vec<Q>> = gram
            .iter()
            .map(|r| r.iter().map(|x| x.exact().unwrap().clone()).collect())
            .collect();
        let minors = linalg::leading_minors(&mq);
        if let Some(k) = minors.iter().position(|d| !d.is_positive()) {
            return Err(Error::NotPositiveDefinite(format!(
                "leading minor {} is {}",
                k + 1,
                fmt_q(&minors[k])
            )));
        }
        let rq: Vec<Q> = rhs.iter().map(|x| x.exact().unwrap().clone()).collect();
        let b = linalg::solve(&mq, &rq).ok_or(Error::SingularSystem { condition: f64::INFINITY })?;
        (AffineFunction::from_coeffs(&b), true)
    } else {
        let rv = DVector::from_iterator(n + 1, rhs.iter().map(Value::to_f64));
        let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        let chol = dm.clone().cholesky().ok_or(Error::SingularSystem { condition })?;
        if !condition.is_finite() || condition > 1e14 {
            return Err(Error::SingularSystem { condition });
        }
        let b = chol.solve(&rv);
        let bq: Vec<Q> = b.iter().map(|&x| from_f64(x)).collect::<Result<_>>()?;
        (AffineFunction::from_coeffs(&bq), false)
    };

    let (residual, residual_exact) = identity_residual(w, &ell, t, &rhs);
    let quadrature_degree = gram.iter().flatten().chain(&rhs).find_map(Value::degree);
    Ok(ExtremalSolution {
        ell,
        exact,
        gram,
        rhs,
        residual,
        residual_exact,
        min_eigenvalue_estimate: lo,
        samples,
        quadrature_degree,
    })
}

/// `max_i |r_i − ∫_P ξ_i w ℓ dy|` with the region integrals recomputed from
/// `ξ_i ℓ` rather than from the Gram matrix.
fn identity_residual(w: &Weight, ell: &AffineFunction, t: &Triangulation, rhs: &[Value]) -> (f64, Option<Q>) {
    let region = PieceComplex::from_triangulation(t).region;
    let lp = Polynomial::from(ell);
    let diffs: Vec<Value> = affine_basis(t.dim())
        .iter()
        .zip(rhs)
        .map(|(xi, r)| r.sub(&integrate_pieces(w, &(xi * &lp), &region, ExecPolicy::default())))
        .collect();
    let exact = diffs
        .iter()
        .map(|d| d.exact().map(|x| x.abs()))
        .collect::<Option<Vec<Q>>>()
        .map(|xs| xs.into_iter().max().unwrap_or_else(Q::zero));
    let float = diffs.iter().map(|d| d.to_f64().abs()).fold(0.0, f64::max);
    (float, exact)
}

/// `2∫_{∂P} v dσ / ∫_P w dy`, or `1` when `∫_P w dy` vanishes.
pub fn c_constant(p: &Polytope, v: &Weight, w: &Weight) -> Value {
    let t = triangulate(p, 0);
    let pieces = PieceComplex::from_triangulation(&t);
    let one = Polynomial::one(p.dim());
    let num = integrate_pieces(v, &one, &pieces.boundary, ExecPolicy::default()).scale(&q(2));
    let den = integrate_pieces(w, &one, &pieces.region, ExecPolicy::default());
    match (&num, &den) {
        (_, Value::Exact(d)) if d.is_zero() => Value::Exact(q(1)),
        (Value::Exact(a), Value::Exact(d)) => Value::Exact(a / d),
        (_, Value::Approx { value, .. }) if value.abs() < 1e-14 => Value::Exact(q(1)),
        _ => Value::Approx {
            value: num.to_f64() / den.to_f64(),
            degree: num.degree().or(den.degree()).unwrap_or(0),
        },
    }
}

#[derive(Clone, Debug)]
pub struct FamilyEntry {
    pub eps: Q,
    pub polytope: Result<Polytope>,
    pub solution: Result<ExtremalSolution>,
}

/// `ℓ_ext,ε` on `P_ε = perturb(P, extra, ε)` for each `ε`, sorted by `ε`.
/// Failures are recorded per entry.
pub fn extremal_family(
    p: &Polytope,
    extra: &[PerturbationCut],
    v: &Weight,
    w: &Weight,
    eps_list: &[Q],
    policy: ExecPolicy,
) -> Vec<FamilyEntry> {
    let mut eps: Vec<Q> = eps_list.to_vec();
    eps.sort();
    eps.dedup();
    parallel::map_ordered(&eps, policy, |e| {
        let pe = perturb(p, extra, e);
        let solution = pe
            .as_ref()
            .map_err(Clone::clone)
            .and_then(|pe| solve_extremal(v, w, &triangulate(pe, 0)));
        FamilyEntry {
            eps: e.clone(),
            polytope: pe,
            solution,
        }
    })
}
