//! JSON readers and writers for polytopes, weights, affine and PL functions.
//!
//! Rationals are written as `"p/q"` strings. Readers also accept JSON numbers
//! and decimal strings, converted exactly.

use std::sync::Arc;

use num_bigint::BigInt;
use serde_json::{json, Value as Json};

use crate::affine::AffineFunction;
use crate::error::{Error, Result};
use crate::plfunction::{PLConvexFunction, PlRepr};
use crate::polynomial::Polynomial;
use crate::polytope::{build_from_halfspaces, build_from_vertices, Halfspace, PerturbationCut, Polytope};
use crate::quadrature::{SmoothWeight, Weight, DEFAULT_QUADRATURE_DEGREE};
use crate::rational::{fmt_q, parse_q, Q};
use crate::triangulation::triangulate_arc;

fn perr(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn field<'a>(obj: &'a Json, key: &str) -> Result<&'a Json> {
    obj.get(key).ok_or_else(|| perr(format!("missing field {key:?}")))
}

fn array<'a>(v: &'a Json, what: &str) -> Result<&'a Vec<Json>> {
    v.as_array().ok_or_else(|| perr(format!("{what} must be an array")))
}

pub fn rational(v: &Json) -> Result<Q> {
    match v {
        Json::String(s) => parse_q(s),
        Json::Number(n) => parse_q(&n.to_string()),
        _ => Err(perr(format!("expected a rational, got {v}"))),
    }
}

pub fn rationals(v: &Json, what: &str) -> Result<Vec<Q>> {
    array(v, what)?.iter().map(rational).collect()
}

fn integer(v: &Json) -> Result<BigInt> {
    let q = rational(v)?;
    if q.is_integer() {
        Ok(q.to_integer())
    } else {
        Err(perr(format!("expected an integer, got {v}")))
    }
}

fn usize_field(obj: &Json, key: &str) -> Result<usize> {
    field(obj, key)?
        .as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| perr(format!("{key:?} must be a nonnegative integer")))
}

pub fn q_json(x: &Q) -> Json {
    Json::String(fmt_q(x))
}

fn qs_json(xs: &[Q]) -> Json {
    Json::Array(xs.iter().map(q_json).collect())
}

/// A polytope read from JSON, with warnings about normalized input.
#[derive(Clone, Debug)]
pub struct PolytopeInput {
    pub polytope: Polytope,
    pub warnings: Vec<String>,
}

pub fn polytope_to_json(p: &Polytope) -> Json {
    let hs: Vec<Json> = p
        .facets()
        .iter()
        .map(|f| {
            json!({
                "normal": f.normal.iter().map(|x| Json::String(x.to_string())).collect::<Vec<_>>(),
                "offset": q_json(&f.offset),
            })
        })
        .collect();
    json!({
        "dim": p.dim(),
        "halfspaces": hs,
        "vertices": p.vertices().iter().map(|v| qs_json(v)).collect::<Vec<_>>(),
    })
}

/// Reads either representation; when both are present the vertex set of the
/// halfspace description must equal the listed vertices.
pub fn polytope_from_json(v: &Json) -> Result<PolytopeInput> {
    let dim = usize_field(v, "dim")?;
    let mut warnings = Vec::new();
    let from_h = match v.get("halfspaces") {
        None => None,
        Some(hs) => {
            let mut list = Vec::new();
            for (i, h) in array(hs, "halfspaces")?.iter().enumerate() {
                let normal: Vec<BigInt> = array(field(h, "normal")?, "normal")?
                    .iter()
                    .map(integer)
                    .collect::<Result<_>>()?;
                let offset = rational(field(h, "offset")?)?;
                let hs = Halfspace { normal, offset };
                if hs.normal.iter().any(|x| x != &BigInt::from(0)) && !hs.is_primitive() {
                    warnings.push(format!("halfspace {i}: normal is not primitive; divided by its gcd"));
                }
                list.push(hs);
            }
            Some(build_from_halfspaces(dim, &list)?)
        }
    };
    let listed = match v.get("vertices") {
        None | Some(Json::Null) => None,
        Some(vs) => {
            let pts: Vec<Vec<Q>> = array(vs, "vertices")?
                .iter()
                .map(|p| rationals(p, "vertex"))
                .collect::<Result<_>>()?;
            if pts.iter().any(|p| p.len() != dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: pts.iter().map(Vec::len).find(|&l| l != dim).unwrap(),
                });
            }
            Some(pts)
        }
    };
    let polytope = match (from_h, listed) {
        (Some(p), None) => p,
        (None, Some(pts)) => build_from_vertices(&pts)?,
        (Some(p), Some(mut pts)) => {
            pts.sort();
            pts.dedup();
            if pts != p.vertices() {
                return Err(Error::InvalidInput(
                    "listed vertices disagree with the halfspace description".into(),
                ));
            }
            p
        }
        (None, None) => return Err(perr("polytope needs \"halfspaces\" or \"vertices\"")),
    };
    Ok(PolytopeInput { polytope, warnings })
}

pub fn polynomial_to_json(p: &Polynomial) -> Json {
    json!({
        "dim": p.dim(),
        "terms": p.terms().map(|(e, c)| json!({"exponents": e, "coeff": q_json(c)})).collect::<Vec<_>>(),
    })
}

pub fn polynomial_from_json(v: &Json) -> Result<Polynomial> {
    let dim = usize_field(v, "dim")?;
    let mut p = Polynomial::zero(dim);
    for t in array(field(v, "terms")?, "terms")? {
        let e: Vec<u32> = array(field(t, "exponents")?, "exponents")?
            .iter()
            .map(|x| x.as_u64().map(|x| x as u32).ok_or_else(|| perr("exponents must be nonnegative integers")))
            .collect::<Result<_>>()?;
        if e.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: e.len(),
            });
        }
        p.add_term(e, rational(field(t, "coeff")?)?);
    }
    Ok(p)
}

/// Polynomial schema, or `{"builtin": "exp_linear", "params": [a0, a1, ..]}`
/// with optional `"quadrature_degree"`.
pub fn weight_from_json(v: &Json, dim: usize, default_degree: Option<u32>) -> Result<Weight> {
    if let Some(name) = v.get("builtin") {
        let degree = match v.get("quadrature_degree") {
            Some(d) => d.as_u64().ok_or_else(|| perr("quadrature_degree must be an integer"))? as u32,
            None => default_degree.unwrap_or(DEFAULT_QUADRATURE_DEGREE),
        };
        return match name.as_str() {
            Some("exp_linear") => {
                let params: Vec<f64> = array(field(v, "params")?, "params")?
                    .iter()
                    .map(|x| rational(x).map(|q| crate::rational::to_f64(&q)))
                    .collect::<Result<_>>()?;
                if params.len() != dim + 1 {
                    return Err(Error::DimensionMismatch {
                        expected: dim + 1,
                        got: params.len(),
                    });
                }
                Ok(Weight::Smooth(SmoothWeight::exp_linear(params, degree)))
            }
            _ => Err(perr(format!("unknown builtin weight {name}"))),
        };
    }
    let p = polynomial_from_json(v)?;
    if p.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: p.dim(),
        });
    }
    Ok(Weight::Polynomial(p))
}

pub fn affine_to_json(a: &AffineFunction) -> Json {
    json!({"constant": q_json(&a.constant), "gradient": qs_json(&a.gradient)})
}

pub fn affine_from_json(v: &Json) -> Result<AffineFunction> {
    Ok(AffineFunction::new(
        rational(field(v, "constant")?)?,
        rationals(field(v, "gradient")?, "gradient")?,
    ))
}

/// Comma-separated `"b0,b1,..,bn"`.
pub fn affine_from_str(s: &str) -> Result<AffineFunction> {
    let c: Vec<Q> = s.split(',').map(parse_q).collect::<Result<_>>()?;
    if c.is_empty() {
        return Err(perr("empty coefficient list"));
    }
    Ok(AffineFunction::from_coeffs(&c))
}

/// Comma-separated point coordinates.
pub fn point_from_str(s: &str) -> Result<Vec<Q>> {
    s.split(',').map(parse_q).collect()
}

pub fn pl_to_json(f: &PLConvexFunction) -> Json {
    match f.repr() {
        PlRepr::MaxOfAffine(ps) => json!({"max_of_affine": ps.iter().map(affine_to_json).collect::<Vec<_>>()}),
        PlRepr::VertexValues {
            triangulation,
            values,
        } => json!({
            "triangulation_ref": {"refine": triangulation.refinement(), "id": triangulation.id()},
            "values": qs_json(values),
        }),
    }
}

/// Reads a PL function on `domain`. Vertex values refer to the standard
/// triangulation of `domain` at the given refinement.
pub fn pl_from_json(v: &Json, domain: &Arc<Polytope>) -> Result<PLConvexFunction> {
    if let Some(ps) = v.get("max_of_affine") {
        let pieces: Vec<AffineFunction> = array(ps, "max_of_affine")?
            .iter()
            .map(affine_from_json)
            .collect::<Result<_>>()?;
        if pieces.is_empty() {
            return Err(perr("max_of_affine needs at least one piece"));
        }
        if let Some(a) = pieces.iter().find(|a| a.dim() != domain.dim()) {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                got: a.dim(),
            });
        }
        return Ok(PLConvexFunction::max_of_affine_arc(domain.clone(), pieces));
    }
    let tref = field(v, "triangulation_ref")?;
    let k = usize_field(tref, "refine")? as u32;
    let t = Arc::new(triangulate_arc(domain.clone(), k));
    if let Some(id) = tref.get("id").and_then(Json::as_str) {
        if id != t.id() {
            return Err(Error::InvalidInput(format!(
                "triangulation id {id} does not match {} for refinement {k}",
                t.id()
            )));
        }
    }
    let values = rationals(field(v, "values")?, "values")?;
    PLConvexFunction::vertex_values(t, values)
}

pub fn cut_to_json(c: &PerturbationCut) -> Json {
    json!({
        "normal": c.normal.iter().map(|x| Json::String(x.to_string())).collect::<Vec<_>>(),
        "base_offset": q_json(&c.base_offset),
        "rate": q_json(&c.rate),
    })
}

/// A list of cuts, bare or as `{"cuts": [...]}`.
pub fn cuts_from_json(v: &Json) -> Result<Vec<PerturbationCut>> {
    let list = match v.get("cuts") {
        Some(c) => array(c, "cuts")?,
        None => array(v, "cuts")?,
    };
    list.iter()
        .map(|c| {
            let normal: Vec<BigInt> = array(field(c, "normal")?, "normal")?
                .iter()
                .map(integer)
                .collect::<Result<_>>()?;
            Ok(PerturbationCut {
                normal,
                base_offset: rational(field(c, "base_offset")?)?,
                rate: rational(field(c, "rate")?)?,
            })
        })
        .collect()
}

/// Comma-separated rationals such as `"0,1/16,1/8"`.
pub fn eps_list_from_str(s: &str) -> Result<Vec<Q>> {
    s.split(',').filter(|x| !x.trim().is_empty()).map(parse_q).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::cube;
    use crate::rational::{q, qf};

    #[test]
    fn polytope_round_trip() {
        let sq = cube(2, -1, 1);
        let j = polytope_to_json(&sq);
        let back = polytope_from_json(&j).unwrap();
        assert_eq!(back.polytope, sq);
        assert!(back.warnings.is_empty());
    }

    #[test]
    fn non_primitive_normal_warns() {
        let j = json!({"dim": 1, "halfspaces": [
            {"normal": [2], "offset": "0"},
            {"normal": [-1], "offset": "1"}
        ]});
        let p = polytope_from_json(&j).unwrap();
        assert_eq!(p.warnings.len(), 1);
        assert_eq!(p.polytope, cube(1, 0, 1));
    }

    #[test]
    fn vertex_mismatch_rejected() {
        let j = json!({"dim": 1,
            "halfspaces": [{"normal": [1], "offset": "0"}, {"normal": [-1], "offset": "1"}],
            "vertices": [["0"], ["2"]]});
        assert!(polytope_from_json(&j).is_err());
        let j = json!({"dim": 2, "vertices": [[0, 0], [2, 0], [0, 1], ["1/2", "1/4"]]});
        assert_eq!(polytope_from_json(&j).unwrap().polytope.vertices().len(), 3);
    }

    #[test]
    fn polynomial_and_weights() {
        let p = &Polynomial::one(2) + &Polynomial::monomial(2, vec![2, 0], qf(1, 2));
        let back = polynomial_from_json(&polynomial_to_json(&p)).unwrap();
        assert_eq!(back, p);
        let w = weight_from_json(&json!({"builtin": "exp_linear", "params": [0, 1, 0]}), 2, None).unwrap();
        assert!((w.eval_f64(&[1.0, 5.0]) - std::f64::consts::E).abs() < 1e-12);
        assert!(weight_from_json(&json!({"builtin": "nope"}), 2, None).is_err());
    }

    #[test]
    fn pl_round_trip() {
        let sq = Arc::new(cube(2, -1, 1));
        let f = PLConvexFunction::max_of_affine_arc(
            sq.clone(),
            vec![AffineFunction::zero(2), AffineFunction::new(q(0), vec![q(1), qf(1, 3)])],
        );
        let back = pl_from_json(&pl_to_json(&f), &sq).unwrap();
        assert_eq!(back.eval(&[q(1), q(1)]), f.eval(&[q(1), q(1)]));
        let t = Arc::new(crate::triangulation::triangulate_arc(sq.clone(), 1));
        let g = PLConvexFunction::vertex_values(t.clone(), f.values_on(&t)).unwrap();
        let back = pl_from_json(&pl_to_json(&g), &sq).unwrap();
        assert_eq!(back.values_on(&t), g.values_on(&t));
    }

    #[test]
    fn small_parsers() {
        assert_eq!(affine_from_str("1, 1/2").unwrap(), AffineFunction::new(q(1), vec![qf(1, 2)]));
        assert_eq!(eps_list_from_str("0,1/16,0.125").unwrap(), vec![q(0), qf(1, 16), qf(1, 8)]);
        let cuts = cuts_from_json(&json!([{"normal": [-1, -1], "base_offset": "2", "rate": 1}])).unwrap();
        assert_eq!(cuts_from_json(&json!({"cuts": [cut_to_json(&cuts[0])]})).unwrap(), cuts);
    }
}
