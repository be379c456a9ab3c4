//! Seeded generators of random instances for property checks and studies.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::affine::AffineFunction;
use crate::plfunction::PLConvexFunction;
use crate::polynomial::Polynomial;
use crate::polytope::{build_from_vertices, Polytope};
use crate::rational::{abs_q, q, Q};

pub type InstanceRng = ChaCha8Rng;

pub fn rng(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rational in `[-range, range]` with denominator at most `den`.
pub fn rational(rng: &mut InstanceRng, range: i64, den: i64) -> Q {
    let d = rng.gen_range(1..=den);
    Q::new(rng.gen_range(-range * d..=range * d).into(), d.into())
}

/// Hull of `dim + 3` random half-integer points in `[-2, 2]^dim`, redrawn
/// until full-dimensional.
pub fn random_polytope(rng: &mut InstanceRng, dim: usize) -> Polytope {
    loop {
        let pts: Vec<Vec<Q>> = (0..dim + 3)
            .map(|_| (0..dim).map(|_| Q::new(rng.gen_range(-4..=4).into(), 2.into())).collect())
            .collect();
        if let Ok(p) = build_from_vertices(&pts) {
            return p;
        }
    }
}

/// Polynomial of total degree at most `degree` that is positive on `p`: random
/// small coefficients plus a constant dominating them on the bounding box.
pub fn random_positive_weight(rng: &mut InstanceRng, p: &Polytope, degree: u32) -> Polynomial {
    let n = p.dim();
    let bound = p
        .vertices()
        .iter()
        .flatten()
        .map(abs_q)
        .max()
        .unwrap_or_else(|| q(1))
        .max(q(1));
    let mut w = Polynomial::zero(n);
    let mut dominate = q(1);
    for e in exponents(n, degree) {
        let total: u32 = e.iter().sum();
        if total == 0 {
            continue;
        }
        let c = rational(rng, 2, 3);
        let mut b = q(1);
        for _ in 0..total {
            b *= &bound;
        }
        dominate += abs_q(&c) * b;
        w.add_term(e, c);
    }
    w.add_term(vec![0; n], dominate);
    w
}

/// All exponent vectors of total degree at most `degree`.
pub fn exponents(n: usize, degree: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 0..=degree {
        for mut rest in exponents(n - 1, degree - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

pub fn random_affine(rng: &mut InstanceRng, dim: usize) -> AffineFunction {
    AffineFunction::new(rational(rng, 2, 3), (0..dim).map(|_| rational(rng, 2, 3)).collect())
}

/// Max of `pieces` random affine functions.
pub fn random_pl(rng: &mut InstanceRng, p: &Arc<Polytope>, pieces: usize) -> PLConvexFunction {
    let ps = (0..pieces.max(1)).map(|_| random_affine(rng, p.dim())).collect();
    PLConvexFunction::max_of_affine_arc(p.clone(), ps)
}
