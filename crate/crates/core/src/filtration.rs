//! Weighted volumes of the filtrations induced by convex PL functions.
//!
//! For the toric filtration of `f` the successive minima on the weight-`η`
//! line of `H^0(mL)` are `m·f(η/m)`, so the weighted volume is the limit of
//! `m^{-(n+1)} Σ_{η ∈ mP ∩ Z^n} v(η/m) m f(η/m)`, which equals `∫_P f v dy`.
//! Everything here is reported unnormalized; [`okounkov_prefactor`] gives the
//! factor relating it to the normalized volume.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::affine::AffineFunction;
use crate::error::{Error, Result};
use crate::parallel::{self, ExecPolicy};
use crate::plfunction::PLConvexFunction;
use crate::polynomial::Polynomial;
use crate::polytope::{build_bounded, Halfspace, Polytope};
use crate::quadrature::{integrate_pieces, integrate_pieces_pl, pl_values_on, PieceComplex, Value, Weight};
use crate::rational::{factorial, q, q_int, to_f64, Q};
use crate::triangulation::{triangulate, Triangulation};

/// Upper bound on the number of lattice points scanned by one sum.
pub const LATTICE_LIMIT: u128 = 10_000_000;

/// A PL convex function with the least `m0` making `m0·f` integral on the
/// lattice: every piece has `m0·constant ∈ Z` and `m0·slope ∈ Z^n`.
#[derive(Clone, Debug)]
pub struct ToricFiltration {
    pub f: PLConvexFunction,
    pub denominator: BigInt,
}

impl ToricFiltration {
    pub fn new(f: PLConvexFunction) -> Self {
        let denominator = f
            .affine_pieces()
            .iter()
            .flat_map(|a| a.coeffs())
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        Self { f, denominator }
    }

    /// `m·f(η/m)` at the lattice points of `mP`.
    pub fn successive_minima(&self, m: u64) -> Result<Vec<(Vec<i64>, Q)>> {
        let lattice = LatticeBox::new(self.f.domain(), m)?;
        let pieces = self.f.affine_pieces();
        let mq = q(m as i64);
        Ok((0..lattice.len())
            .filter_map(|i| lattice.point(i))
            .map(|eta| {
                let y: Vec<Q> = eta.iter().map(|&x| q(x) / &mq).collect();
                let val = pieces.iter().map(|a| a.eval(&y)).max().unwrap() * &mq;
                (eta, val)
            })
            .collect())
    }

    /// Checks that `m0·f` takes integer values at the lattice points of `P`.
    pub fn integral_on_lattice(&self) -> Result<bool> {
        let m0 = q_int(&self.denominator);
        Ok(self
            .successive_minima(1)?
            .iter()
            .all(|(_, v)| (v * &m0).is_integer()))
    }
}

/// `1/(n!·vol_v)` relating `∫_P f v dy` to the normalized weighted volume.
pub fn okounkov_prefactor(p: &Polytope, v: &Weight) -> Value {
    let region = PieceComplex::from_triangulation(&triangulate(p, 0)).region;
    let total = integrate_pieces(v, &Polynomial::one(p.dim()), &region, ExecPolicy::default());
    let nf = q_int(&factorial(p.dim()));
    match total {
        Value::Exact(x) => Value::Exact(Q::one() / (x * nf)),
        Value::Approx { value, degree } => Value::Approx {
            value: 1.0 / (value * to_f64(&nf)),
            degree,
        },
    }
}

/// Exact `∫_P f v dy` for `f` affine on every simplex of `t`.
pub fn weighted_volume_exact(f: &PLConvexFunction, v: &Weight, t: &Triangulation) -> Result<Value> {
    let values = pl_values_on(f, t)?;
    let region = PieceComplex::from_triangulation(t).region;
    Ok(integrate_pieces_pl(
        v,
        &region,
        |p| t.simplices()[p.cell].iter().map(|&i| values[i].clone()).collect(),
        ExecPolicy::default(),
    ))
}

/// `∫_P f v dy` over the linearity cells of `f`.
pub fn weighted_volume(f: &PLConvexFunction, v: &Weight) -> Value {
    let (pieces, affs) = f.pieces();
    let polys: Vec<Polynomial> = affs.iter().map(Polynomial::from).collect();
    let parts = parallel::map_ordered(&pieces.region, ExecPolicy::default(), |p| {
        integrate_pieces(v, &polys[p.cell], std::slice::from_ref(p), ExecPolicy::Sequential)
    });
    Value::sum(parts.iter())
}

/// Integer box around `mP` with exact membership tests.
pub struct LatticeBox {
    lo: Vec<i64>,
    extent: Vec<u64>,
    /// `(normal, num, den)` with `den·⟨u, η⟩ + num >= 0` on `mP`.
    facets: Vec<(Vec<i128>, i128, i128)>,
    len: usize,
}

impl LatticeBox {
    pub fn new(p: &Polytope, m: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("lattice scale must be positive".into()));
        }
        let mq = q(m as i64);
        let bbox = p.scaled_bounding_box(&mq);
        let extent: Vec<u64> = bbox
            .iter()
            .map(|(lo, hi)| (hi - lo + 1u32).to_u64().unwrap_or(u64::MAX))
            .collect();
        let count = extent.iter().fold(1u128, |acc, &e| acc.saturating_mul(e as u128));
        if count > LATTICE_LIMIT {
            return Err(Error::LatticeTooLarge {
                points: count,
                limit: LATTICE_LIMIT,
            });
        }
        let too_big = || Error::InvalidInput("polytope data too large for lattice enumeration".into());
        let lo = bbox
            .iter()
            .map(|(lo, _)| lo.to_i64().ok_or_else(too_big))
            .collect::<Result<_>>()?;
        let facets = p
            .facets()
            .iter()
            .map(|f| {
                let off = &f.offset * &mq;
                let u = f.normal.iter().map(|x| x.to_i128().ok_or_else(too_big)).collect::<Result<_>>()?;
                let num = off.numer().to_i128().ok_or_else(too_big)?;
                let den = off.denom().to_i128().ok_or_else(too_big)?;
                Ok((u, num, den))
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            lo,
            extent,
            facets,
            len: count as usize,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The `i`-th box point if it lies in `mP`.
    pub fn point(&self, mut i: usize) -> Option<Vec<i64>> {
        let mut eta = Vec::with_capacity(self.lo.len());
        for (lo, &e) in self.lo.iter().zip(&self.extent) {
            eta.push(lo + (i as u64 % e) as i64);
            i /= e as usize;
        }
        let inside = self.facets.iter().all(|(u, num, den)| {
            let s: i128 = u.iter().zip(&eta).map(|(a, &b)| a * b as i128).sum();
            den * s + num >= 0
        });
        inside.then_some(eta)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Minima {
    /// `m·f(η/m)` as an exact rational.
    Exact,
    /// `floor(m·f(η/m))`, the integral jumps of the graded filtration.
    Floor,
}

struct FloatPieces {
    pieces: Vec<(f64, Vec<f64>)>,
}

impl FloatPieces {
    fn new(pieces: &[AffineFunction]) -> Self {
        Self {
            pieces: pieces
                .iter()
                .map(|a| (to_f64(&a.constant), a.gradient.iter().map(to_f64).collect()))
                .collect(),
        }
    }

    fn eval(&self, y: &[f64]) -> f64 {
        self.pieces
            .iter()
            .map(|(c, g)| c + g.iter().zip(y).map(|(a, b)| a * b).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `m^{-(n+1)} Σ_{η ∈ mP ∩ Z^n} v(η/m) · s(η)` with `s` the successive
/// minimum chosen by `minima`. Float accumulation in fixed chunks.
pub fn weighted_volume_lattice(f: &PLConvexFunction, v: &Weight, m: u64, minima: Minima, policy: ExecPolicy) -> Result<f64> {
    let lattice = LatticeBox::new(f.domain(), m)?;
    let pieces = f.affine_pieces();
    let fp = FloatPieces::new(&pieces);
    let mf = m as f64;
    let n = f.dim() as i32;
    let sum = parallel::chunked_sum(lattice.len(), policy, |i| match lattice.point(i) {
        None => 0.0,
        Some(eta) => {
            let y: Vec<f64> = eta.iter().map(|&x| x as f64 / mf).collect();
            let s = match minima {
                Minima::Exact => mf * fp.eval(&y),
                Minima::Floor => {
                    let yq: Vec<Q> = eta.iter().map(|&x| Q::new(x.into(), (m as i64).into())).collect();
                    let val = pieces.iter().map(|a| a.eval(&yq)).max().unwrap() * q(m as i64);
                    to_f64(&val.floor())
                }
            };
            v.eval_f64(&y) * s
        }
    });
    Ok(sum / mf.powi(n + 1))
}

/// The same lattice sum in exact arithmetic (polynomial `v`).
pub fn weighted_volume_lattice_exact(f: &PLConvexFunction, v: &Polynomial, m: u64) -> Result<Q> {
    let lattice = LatticeBox::new(f.domain(), m)?;
    let pieces = f.affine_pieces();
    let mq = q(m as i64);
    let mut sum = Q::zero();
    for i in 0..lattice.len() {
        if let Some(eta) = lattice.point(i) {
            let y: Vec<Q> = eta.iter().map(|&x| q(x) / &mq).collect();
            let s = pieces.iter().map(|a| a.eval(&y)).max().unwrap() * &mq;
            sum += v.eval(&y) * s;
        }
    }
    let scale = (0..=f.dim()).fold(Q::one(), |acc, _| acc * &mq);
    Ok(sum / scale)
}

/// Cell on which two PL functions are both affine, with the side of the
/// hyperplane `a1 = a2` fixed.
#[derive(Clone, Debug)]
pub struct CommonCell {
    pub cell: Polytope,
    pub a1: AffineFunction,
    pub a2: AffineFunction,
}

impl CommonCell {
    fn min(&self) -> &AffineFunction {
        // the side of a1 = a2 is fixed on the cell, so any interior test works
        let c = self.cell.vertex_centroid();
        if self.a1.eval(&c) <= self.a2.eval(&c) {
            &self.a1
        } else {
            &self.a2
        }
    }
}

fn check_same_domain(f1: &PLConvexFunction, f2: &PLConvexFunction) -> Result<()> {
    if f1.dim() != f2.dim() {
        return Err(Error::DimensionMismatch {
            expected: f1.dim(),
            got: f2.dim(),
        });
    }
    if f1.domain() != f2.domain() {
        return Err(Error::InvalidInput("functions live on different polytopes".into()));
    }
    Ok(())
}

/// Splits `cell` by the sign of `d`; cells of lower dimension are dropped.
fn split_by(cell: &Polytope, d: &AffineFunction) -> Vec<Polytope> {
    let n = cell.dim();
    let up = Halfspace::from_rational(&d.gradient, d.constant.clone());
    let neg = d.scale(&-Q::one());
    let down = Halfspace::from_rational(&neg.gradient, neg.constant.clone());
    match (up, down) {
        (Some(u), Some(l)) => [u, l]
            .into_iter()
            .filter_map(|h| {
                let mut hs = cell.halfspaces();
                hs.push(h);
                build_bounded(n, &hs).ok()
            })
            .collect(),
        _ => vec![cell.clone()],
    }
}

/// Common refinement of the linearity cells of `f1` and `f2`, further split
/// along `f1 = f2` so that `min(f1, f2)` is affine on every cell.
pub fn common_cells(f1: &PLConvexFunction, f2: &PLConvexFunction) -> Result<Vec<CommonCell>> {
    check_same_domain(f1, f2)?;
    let n = f1.dim();
    let c1 = f1.maximal_cells();
    let c2 = f2.maximal_cells();
    let pairs: Vec<(usize, usize)> = (0..c1.len()).flat_map(|i| (0..c2.len()).map(move |j| (i, j))).collect();
    let cells = parallel::map_ordered(&pairs, ExecPolicy::default(), |&(i, j)| {
        let mut hs = c1[i].0.halfspaces();
        hs.extend(c2[j].0.halfspaces());
        let Ok(cell) = build_bounded(n, &hs) else {
            return Vec::new();
        };
        let (a1, a2) = (&c1[i].1, &c2[j].1);
        split_by(&cell, &a1.sub(a2))
            .into_iter()
            .map(|cell| CommonCell {
                cell,
                a1: a1.clone(),
                a2: a2.clone(),
            })
            .collect()
    });
    Ok(cells.into_iter().flatten().collect())
}

fn cell_integral(v: &Weight, g: &AffineFunction, cell: &Polytope) -> Value {
    let region = PieceComplex::from_triangulation(&triangulate(cell, 0)).region;
    integrate_pieces(v, &Polynomial::from(g), &region, ExecPolicy::Sequential)
}

#[derive(Clone, Debug)]
pub struct Distance {
    /// `vol(f1) + vol(f2) − 2 vol(min(f1, f2))`.
    pub value: Value,
    /// `∫_P |f1 − f2| v dy`, computed separately.
    pub l1: Value,
    pub vol1: Value,
    pub vol2: Value,
    pub vol_min: Value,
}

impl Distance {
    /// The two evaluations agree (exactly on the rational path).
    pub fn consistent(&self) -> bool {
        match (&self.value, &self.l1) {
            (Value::Exact(a), Value::Exact(b)) => a == b,
            (a, b) => (a.to_f64() - b.to_f64()).abs() <= 1e-9 * (1.0 + b.to_f64().abs()),
        }
    }
}

/// `d_{v,1}(f1, f2)` on the common refinement of the two functions.
pub fn d_v1(f1: &PLConvexFunction, f2: &PLConvexFunction, v: &Weight) -> Result<Distance> {
    let cells = common_cells(f1, f2)?;
    let parts = parallel::map_ordered(&cells, ExecPolicy::default(), |c| {
        let i1 = cell_integral(v, &c.a1, &c.cell);
        let i2 = cell_integral(v, &c.a2, &c.cell);
        let im = cell_integral(v, c.min(), &c.cell);
        let d = c.a1.sub(&c.a2);
        let centroid = c.cell.vertex_centroid();
        let abs = if d.eval(&centroid).is_negative() { d.scale(&-Q::one()) } else { d };
        let ia = cell_integral(v, &abs, &c.cell);
        [i1, i2, im, ia]
    });
    let total = |k: usize| Value::sum(parts.iter().map(|p| &p[k]));
    let (vol1, vol2, vol_min, l1) = (total(0), total(1), total(2), total(3));
    let value = vol1.add(&vol2).sub(&vol_min.scale(&q(2)));
    Ok(Distance {
        value,
        l1,
        vol1,
        vol2,
        vol_min,
    })
}

#[derive(Clone, Debug)]
pub struct QuotientDistance {
    /// `min_c ∫_P |f2 − f1 − c| v dy`.
    pub value: Value,
    /// Optimal shift `c`, so that `f2 ≈ f1 + c`.
    pub shift: Q,
    /// True when `shift` is an exact weighted median rather than a bisection
    /// endpoint.
    pub exact_shift: bool,
}

struct Diff {
    cell: Polytope,
    h: AffineFunction,
}

fn measure_below(diffs: &[Diff], v: &Weight, c: &Q, strict: bool) -> Value {
    let parts = parallel::map_ordered(diffs, ExecPolicy::default(), |d| {
        let one = AffineFunction::constant_fn(d.h.dim(), Q::one());
        if d.h.gradient.iter().all(Zero::is_zero) {
            let below = if strict { d.h.constant < *c } else { d.h.constant <= *c };
            return if below { cell_integral(v, &one, &d.cell) } else { Value::zero() };
        }
        // {h <= c}, i.e. c - h >= 0
        let cut = AffineFunction::constant_fn(d.h.dim(), c.clone()).sub(&d.h);
        let mut hs = d.cell.halfspaces();
        hs.push(Halfspace::from_rational(&cut.gradient, cut.constant.clone()).expect("nonzero slope"));
        match build_bounded(d.h.dim(), &hs) {
            Ok(sub) => cell_integral(v, &one, &sub),
            Err(_) => Value::zero(),
        }
    });
    Value::sum(parts.iter())
}

fn l1_shift(diffs: &[Diff], v: &Weight, c: &Q) -> Value {
    let parts = parallel::map_ordered(diffs, ExecPolicy::default(), |d| {
        let g = d.h.sub(&AffineFunction::constant_fn(d.h.dim(), c.clone()));
        split_by(&d.cell, &g)
            .into_iter()
            .map(|sub| {
                let centroid = sub.vertex_centroid();
                let abs = if g.eval(&centroid).is_negative() { g.scale(&-Q::one()) } else { g.clone() };
                cell_integral(v, &abs, &sub)
            })
            .fold(Value::zero(), |a, b| a.add(&b))
    });
    Value::sum(parts.iter())
}

fn le(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Exact(x), Value::Exact(y)) => x <= y,
        _ => a.to_f64() <= b.to_f64(),
    }
}

/// `inf_c d_{v,1}(f1 + c, f2)`: the minimizer is a weighted median of
/// `h = f2 − f1` under `v dy`. Breakpoints of `h` are tested first; between
/// breakpoints the median is bracketed by bisection.
pub fn quotient_distance(f1: &PLConvexFunction, f2: &PLConvexFunction, v: &Weight) -> Result<QuotientDistance> {
    let diffs: Vec<Diff> = common_cells(f1, f2)?
        .into_iter()
        .map(|c| Diff {
            h: c.a2.sub(&c.a1),
            cell: c.cell,
        })
        .collect();
    let mut breaks: Vec<Q> = diffs
        .iter()
        .flat_map(|d| d.cell.vertices().iter().map(|y| d.h.eval(y)).collect::<Vec<_>>())
        .collect();
    breaks.sort();
    breaks.dedup();
    let total = measure_below(&diffs, v, breaks.last().unwrap(), false);
    let half = total.scale(&Q::new(1.into(), 2.into()));

    let mut bracket = None;
    let mut prev: Option<&Q> = None;
    for b in &breaks {
        let lower = measure_below(&diffs, v, b, true);
        let upper = measure_below(&diffs, v, b, false);
        if le(&lower, &half) && le(&half, &upper) {
            return Ok(QuotientDistance {
                value: l1_shift(&diffs, v, b),
                shift: b.clone(),
                exact_shift: true,
            });
        }
        if !le(&lower, &half) {
            bracket = prev.map(|p| (p.clone(), b.clone()));
            break;
        }
        prev = Some(b);
    }
    let (mut lo, mut hi) = bracket.expect("median lies inside the range of h");
    let two = q(2);
    for _ in 0..64 {
        let mid = (&lo + &hi) / &two;
        if le(&measure_below(&diffs, v, &mid, false), &half) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = (&lo + &hi) / &two;
    Ok(QuotientDistance {
        value: l1_shift(&diffs, v, &c),
        shift: c,
        exact_shift: false,
    })
}

/// Pushforward of `v dy` under `f`, sampled on `mP ∩ Z^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct DhHistogram {
    pub bin_edges: Vec<f64>,
    pub masses: Vec<f64>,
    pub total: f64,
}

impl DhHistogram {
    pub fn first_moment(&self) -> f64 {
        self.bin_edges
            .windows(2)
            .zip(&self.masses)
            .map(|(e, m)| 0.5 * (e[0] + e[1]) * m)
            .sum()
    }
}

/// Histogram of `f(η/m)` weighted by `v(η/m)/m^n`. A constant `f` gives a
/// single degenerate bin.
pub fn dh_histogram(f: &PLConvexFunction, v: &Weight, bins: usize, m: u64, policy: ExecPolicy) -> Result<DhHistogram> {
    if bins == 0 {
        return Err(Error::InvalidInput("at least one bin is required".into()));
    }
    let lattice = LatticeBox::new(f.domain(), m)?;
    let lo = to_f64(&f.minimum());
    let hi = to_f64(&f.maximum());
    let bins = if hi > lo { bins } else { 1 };
    let width = (hi - lo) / bins as f64;
    let bin_edges: Vec<f64> = (0..=bins)
        .map(|i| if i == bins { hi } else { lo + width * i as f64 })
        .collect();
    let fp = FloatPieces::new(&f.affine_pieces());
    let mf = m as f64;
    let cell = mf.powi(f.dim() as i32);
    let chunks: Vec<(usize, usize)> = (0..lattice.len())
        .step_by(parallel::REDUCTION_CHUNK)
        .map(|s| (s, (s + parallel::REDUCTION_CHUNK).min(lattice.len())))
        .collect();
    let partial = parallel::map_ordered(&chunks, policy, |&(a, b)| {
        let mut local = vec![0.0; bins];
        for i in a..b {
            if let Some(eta) = lattice.point(i) {
                let y: Vec<f64> = eta.iter().map(|&x| x as f64 / mf).collect();
                let x = fp.eval(&y);
                let k = if width > 0.0 {
                    (((x - lo) / width).floor().max(0.0) as usize).min(bins - 1)
                } else {
                    0
                };
                local[k] += v.eval_f64(&y) / cell;
            }
        }
        local
    });
    let mut masses = vec![0.0; bins];
    for local in partial {
        for (m, x) in masses.iter_mut().zip(local) {
            *m += x;
        }
    }
    let total = masses.iter().sum();
    Ok(DhHistogram {
        bin_edges,
        masses,
        total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::cube;
    use crate::rational::qf;

    fn ramp(p: &Polytope) -> PLConvexFunction {
        let mut g = vec![q(0); p.dim()];
        g[0] = q(1);
        PLConvexFunction::affine(p, AffineFunction::new(q(0), g))
    }

    fn hinge(p: &Polytope) -> PLConvexFunction {
        let mut g = vec![q(0); p.dim()];
        g[0] = q(1);
        PLConvexFunction::max_of_affine(p, vec![AffineFunction::zero(p.dim()), AffineFunction::new(q(0), g)])
    }

    #[test]
    fn exact_volumes() {
        let iv = cube(1, 0, 1);
        let one = Weight::one(1);
        assert_eq!(weighted_volume_exact(&ramp(&iv), &one, &triangulate(&iv, 0)).unwrap(), Value::Exact(qf(1, 2)));
        let zero = PLConvexFunction::affine(&iv, AffineFunction::zero(1));
        assert_eq!(weighted_volume(&zero, &one), Value::Exact(q(0)));
        let sq = cube(2, -1, 1);
        assert_eq!(weighted_volume(&hinge(&sq), &Weight::one(2)), Value::Exact(q(1)));
        assert_eq!(
            weighted_volume_exact(&hinge(&sq), &Weight::one(2), &triangulate(&sq, 1)).unwrap(),
            Value::Exact(q(1))
        );
    }

    #[test]
    fn lattice_sums() {
        let iv = cube(1, 0, 1);
        for m in [1u64, 7, 40] {
            let s = weighted_volume_lattice_exact(&ramp(&iv), &Polynomial::one(1), m).unwrap();
            assert_eq!(s, Q::new((m + 1).into(), (2 * m).into()));
        }
        let sq = cube(2, -1, 1);
        let s = weighted_volume_lattice(&hinge(&sq), &Weight::one(2), 100, Minima::Exact, ExecPolicy::default()).unwrap();
        assert!((s - 1.0).abs() <= 0.02, "{s}");
        let floor = weighted_volume_lattice(&hinge(&sq), &Weight::one(2), 100, Minima::Floor, ExecPolicy::default()).unwrap();
        assert!((floor - 1.0).abs() <= 0.05, "{floor}");
        assert!(matches!(
            weighted_volume_lattice(&hinge(&sq), &Weight::one(2), 100_000, Minima::Exact, ExecPolicy::default()),
            Err(Error::LatticeTooLarge { .. })
        ));
    }

    #[test]
    fn distances() {
        let iv = cube(1, -1, 1);
        let one = Weight::one(1);
        let h = hinge(&iv);
        let zero = PLConvexFunction::affine(&iv, AffineFunction::zero(1));
        let d = d_v1(&h, &zero, &one).unwrap();
        assert_eq!(d.value, Value::Exact(qf(1, 2)));
        assert!(d.consistent());
        assert_eq!(d_v1(&h, &h, &one).unwrap().value, Value::Exact(q(0)));

        let shifted = h.add_affine(&AffineFunction::constant_fn(1, q(7)));
        let qd = quotient_distance(&h, &shifted, &one).unwrap();
        assert_eq!(qd.shift, q(7));
        assert_eq!(qd.value, Value::Exact(q(0)));

        let qd = quotient_distance(&h, &zero, &one).unwrap();
        assert!(qd.value.to_f64() <= 0.5);
    }

    #[test]
    fn histogram_mass() {
        let iv = cube(1, 0, 1);
        let zero = PLConvexFunction::affine(&iv, AffineFunction::zero(1));
        let h = dh_histogram(&zero, &Weight::one(1), 10, 50, ExecPolicy::default()).unwrap();
        assert_eq!(h.masses.len(), 1);
        assert!((h.total - 1.0).abs() <= 1.0 / 50.0 + 1e-12);
        let h = dh_histogram(&ramp(&iv), &Weight::one(1), 10, 1000, ExecPolicy::default()).unwrap();
        assert!(h.masses.iter().all(|m| (m - 0.1).abs() < 0.01));
        assert!((h.first_moment() - 0.5).abs() < 0.01);
    }

    #[test]
    fn filtration_denominator() {
        let iv = cube(1, 0, 2);
        let f = PLConvexFunction::max_of_affine(
            &iv,
            vec![AffineFunction::new(qf(1, 3), vec![qf(1, 2)]), AffineFunction::zero(1)],
        );
        let t = ToricFiltration::new(f);
        assert_eq!(t.denominator, BigInt::from(6));
        assert!(t.integral_on_lattice().unwrap());
    }
}
