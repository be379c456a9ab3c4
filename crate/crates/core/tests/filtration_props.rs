use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use toric_wkstab::filtration::{
    common_cells, d_v1, dh_histogram, quotient_distance, weighted_volume, weighted_volume_exact,
    weighted_volume_lattice, weighted_volume_lattice_exact, Minima, ToricFiltration,
};
use toric_wkstab::parallel::ExecPolicy;
use toric_wkstab::polynomial::Polynomial;
use toric_wkstab::polytope::{cube, standard_simplex};
use toric_wkstab::quadrature::{facet_measure_total, integrate_polynomial_region};
use toric_wkstab::random;
use toric_wkstab::rational::{q, qf, to_f64};
use toric_wkstab::triangulation::triangulate;
use toric_wkstab::{AffineFunction, PLConvexFunction, Polytope, Value, Weight, Q};

fn exact(v: &Value) -> Q {
    v.exact().cloned().expect("exact value")
}

fn random_setup(seed: u64, dim: usize) -> (random::InstanceRng, Arc<Polytope>, Weight) {
    let mut r = random::rng(seed);
    let p = Arc::new(random::random_polytope(&mut r, dim));
    let v = Weight::Polynomial(random::random_positive_weight(&mut r, &p, 1));
    (r, p, v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn unit_interval_error_is_half_over_m(m in 1u64..300) {
        let iv = cube(1, 0, 1);
        let f = PLConvexFunction::affine(&iv, AffineFunction::new(q(0), vec![q(1)]));
        let s = weighted_volume_lattice_exact(&f, &Polynomial::one(1), m).unwrap();
        prop_assert_eq!(s - qf(1, 2), qf(1, 2 * m as i64));
    }

    #[test]
    fn min_formula_matches_l1(seed in any::<u64>(), dim in 1usize..=2) {
        let (mut r, p, v) = random_setup(seed, dim);
        let f1 = random::random_pl(&mut r, &p, 3);
        let f2 = random::random_pl(&mut r, &p, 3);
        let d = d_v1(&f1, &f2, &v).unwrap();
        prop_assert_eq!(exact(&d.value), exact(&d.l1));
        prop_assert_eq!(exact(&d.vol1), exact(&weighted_volume(&f1, &v)));
        prop_assert_eq!(exact(&d.vol2), exact(&weighted_volume(&f2, &v)));
        prop_assert!(!exact(&d.value).is_negative());
    }

    #[test]
    fn triangle_inequality(seed in any::<u64>(), dim in 1usize..=2) {
        let (mut r, p, v) = random_setup(seed, dim);
        let f: Vec<PLConvexFunction> = (0..3).map(|_| random::random_pl(&mut r, &p, 2)).collect();
        let d = |a: usize, b: usize| exact(&d_v1(&f[a], &f[b], &v).unwrap().value);
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2));
        prop_assert_eq!(d(0, 1), d(1, 0));
    }

    #[test]
    fn distance_vanishes_exactly_on_equal_functions(seed in any::<u64>(), dim in 1usize..=2) {
        let (mut r, p, v) = random_setup(seed, dim);
        let f1 = random::random_pl(&mut r, &p, 3);
        // Same function with an extra piece lying strictly below it.
        let mut pieces = f1.affine_pieces();
        let low = pieces[0].sub(&AffineFunction::constant_fn(dim, q(1)));
        pieces.push(low);
        let same = PLConvexFunction::max_of_affine_arc(p.clone(), pieces);
        prop_assert!(exact(&d_v1(&f1, &same, &v).unwrap().value).is_zero());

        let f2 = random::random_pl(&mut r, &p, 3);
        let points: Vec<Vec<Q>> = common_cells(&f1, &f2)
            .unwrap()
            .iter()
            .flat_map(|c| c.cell.vertices().to_vec())
            .collect();
        let equal = points.iter().all(|y| f1.eval(y) == f2.eval(y));
        prop_assert_eq!(exact(&d_v1(&f1, &f2, &v).unwrap().value).is_zero(), equal);
    }

    #[test]
    fn quotient_distance_is_shift_invariant(seed in any::<u64>(), dim in 1usize..=2) {
        let (mut r, p, v) = random_setup(seed, dim);
        let f1 = random::random_pl(&mut r, &p, 2);
        let f2 = random::random_pl(&mut r, &p, 2);
        let c = random::rational(&mut r, 3, 4);
        let shifted = f2.add_affine(&AffineFunction::constant_fn(dim, c));
        let a = quotient_distance(&f1, &f2, &v).unwrap();
        let b = quotient_distance(&f1, &shifted, &v).unwrap();
        prop_assert!((a.value.to_f64() - b.value.to_f64()).abs() <= 1e-9);
        let direct = exact(&d_v1(&f1, &f2, &v).unwrap().value);
        prop_assert!(a.value.to_f64() <= to_f64(&direct) + 1e-12);
        prop_assert!(exact(&quotient_distance(&f1, &f1, &v).unwrap().value).is_zero());
    }

    #[test]
    fn histogram_mass_is_o_of_one_over_m(seed in any::<u64>(), dim in 1usize..=2) {
        let (mut r, p, v) = random_setup(seed, dim);
        let f = random::random_pl(&mut r, &p, 3);
        let total = to_f64(&integrate_polynomial_region(v.as_polynomial().unwrap(), &triangulate(&p, 0)));
        let vmax = p.vertices().iter().map(|y| v.eval(y).to_f64()).fold(0.0, f64::max);
        let c = to_f64(&facet_measure_total(&p)) * vmax + 1.0;
        for m in [16u64, 32, 64] {
            let h = dh_histogram(&f, &v, 8, m, ExecPolicy::default()).unwrap();
            prop_assert!((h.total - total).abs() <= c / m as f64, "m={} err={}", m, h.total - total);
            prop_assert!((h.masses.iter().sum::<f64>() - h.total).abs() < 1e-12);
        }
    }

    #[test]
    fn lattice_paths_agree(seed in any::<u64>(), dim in 1usize..=2, m in 1u64..24) {
        let (mut r, p, v) = random_setup(seed, dim);
        let f = random::random_pl(&mut r, &p, 3);
        let seq = weighted_volume_lattice(&f, &v, m, Minima::Exact, ExecPolicy::Sequential).unwrap();
        let par = weighted_volume_lattice(&f, &v, m, Minima::Exact, ExecPolicy::Parallel).unwrap();
        prop_assert_eq!(seq.to_bits(), par.to_bits());
        let ex = to_f64(&weighted_volume_lattice_exact(&f, v.as_polynomial().unwrap(), m).unwrap());
        prop_assert!((seq - ex).abs() <= 1e-9 * (1.0 + ex.abs()));
        // Rounding each minimum down moves the sum by less than the lattice
        // mass of v divided by m.
        let floor = weighted_volume_lattice(&f, &v, m, Minima::Floor, ExecPolicy::Sequential).unwrap();
        let count_mass = weighted_volume_lattice(
            &PLConvexFunction::affine(&p, AffineFunction::constant_fn(dim, Q::one())),
            &v, m, Minima::Exact, ExecPolicy::Sequential,
        ).unwrap();
        prop_assert!(floor <= seq + 1e-12);
        prop_assert!(seq - floor <= count_mass / m as f64 + 1e-12);
    }

    #[test]
    fn exact_volume_matches_cells(seed in any::<u64>(), dim in 1usize..=2) {
        let (mut r, p, v) = random_setup(seed, dim);
        let f = random::random_pl(&mut r, &p, 3);
        let t = triangulate(&p, 0);
        let vals = f.values_on(&t);
        let g = PLConvexFunction::vertex_values_unchecked(Arc::new(t.clone()), vals);
        // A coarse triangulation is rejected unless f is affine on it.
        match weighted_volume_exact(&f, &v, &t) {
            Ok(x) => prop_assert_eq!(x, weighted_volume(&f, &v)),
            Err(_) => prop_assert!(!f.is_affine()),
        }
        prop_assert_eq!(weighted_volume_exact(&g, &v, &t).unwrap(), weighted_volume(&g, &v));
    }
}

#[test]
fn two_dimensional_convergence() {
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
    for f in &examples {
        let exact_value = to_f64(&exact(&weighted_volume(f, &one)));
        let err = |m: u64| (weighted_volume_lattice(f, &one, m, Minima::Exact, ExecPolicy::default()).unwrap() - exact_value).abs();
        let (e50, e100, e200) = (err(50), err(100), err(200));
        assert!(e50 <= 3.0 / 50.0 && e100 <= 3.0 / 100.0 && e200 <= 3.0 / 200.0);
        assert!(e200 <= 0.6 * e100, "{e100} {e200}");
    }
}

#[test]
fn filtration_denominator_clears_the_lattice() {
    let sq = cube(2, -1, 1);
    let f = PLConvexFunction::max_of_affine(
        &sq,
        vec![AffineFunction::new(qf(1, 3), vec![qf(1, 2), q(0)]), AffineFunction::new(q(0), vec![q(0), qf(-1, 4)])],
    );
    let filt = ToricFiltration::new(f);
    assert_eq!(filt.denominator, 12.into());
    assert!(filt.integral_on_lattice().unwrap());
    let minima = filt.successive_minima(2).unwrap();
    assert_eq!(minima.len(), 25);
    let at_origin = minima.iter().find(|(eta, _)| eta == &vec![0, 0]).unwrap();
    assert_eq!(at_origin.1, qf(2, 3));
}
