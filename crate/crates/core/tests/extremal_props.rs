use num_traits::{One, Zero};
use proptest::prelude::*;
use toric_wkstab::extremal::{c_constant, extremal_family, solve_extremal};
use toric_wkstab::parallel::ExecPolicy;
use toric_wkstab::polynomial::Polynomial;
use toric_wkstab::polytope::{cube, standard_simplex, PerturbationCut};
use toric_wkstab::quadrature::{boundary_integral, integrate_polynomial_region};
use toric_wkstab::random;
use toric_wkstab::rational::{q, qf, to_f64};
use toric_wkstab::triangulation::triangulate;
use toric_wkstab::{AffineFunction, Value, Weight, Q};

/// Solves `M b = r` by Cramer's rule with a Leibniz expansion of each
/// determinant, independent of the library's elimination order.
fn cramer(m: &[Vec<Q>], r: &[Q]) -> Vec<Q> {
    fn det(m: &[Vec<Q>]) -> Q {
        let n = m.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut total = Q::zero();
        permute(&mut perm, 0, &mut |p| {
            let mut inversions = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if p[i] > p[j] {
                        inversions += 1;
                    }
                }
            }
            let mut term = Q::one();
            for (i, &j) in p.iter().enumerate() {
                term *= &m[i][j];
            }
            if inversions % 2 == 1 {
                term = -term;
            }
            total += term;
        });
        total
    }
    fn permute(p: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
        if k == p.len() {
            f(p);
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            permute(p, k + 1, f);
            p.swap(k, i);
        }
    }
    let d = det(m);
    (0..r.len())
        .map(|col| {
            let mc: Vec<Vec<Q>> = m
                .iter()
                .zip(r)
                .map(|(row, ri)| {
                    let mut row = row.clone();
                    row[col] = ri.clone();
                    row
                })
                .collect();
            det(&mc) / &d
        })
        .collect()
}

fn basis(dim: usize) -> Vec<Polynomial> {
    std::iter::once(Polynomial::one(dim))
        .chain((0..dim).map(|i| Polynomial::variable(dim, i)))
        .collect()
}

fn weight(w: &Polynomial) -> Weight {
    Weight::Polynomial(w.clone())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn defining_identity_and_independent_solve(seed in any::<u64>(), dim in 1usize..=3) {
        let mut r = random::rng(seed);
        let p = random::random_polytope(&mut r, dim);
        let v = random::random_positive_weight(&mut r, &p, 2);
        let w = random::random_positive_weight(&mut r, &p, 2);
        let t = triangulate(&p, 0);
        let sol = solve_extremal(&weight(&v), &weight(&w), &t).unwrap();
        prop_assert!(sol.exact);
        prop_assert_eq!(sol.residual_exact.clone(), Some(Q::zero()));

        let b = basis(dim);
        let m: Vec<Vec<Q>> = b
            .iter()
            .map(|bi| b.iter().map(|bj| integrate_polynomial_region(&(&(bi * bj) * &w), &t)).collect())
            .collect();
        let rhs: Vec<Q> = b.iter().map(|bi| boundary_integral(&(bi * &v), &t) * q(2)).collect();
        prop_assert_eq!(sol.ell.coeffs(), cramer(&m, &rhs));
    }

    #[test]
    fn independent_of_refinement(seed in any::<u64>(), dim in 1usize..=2) {
        let mut r = random::rng(seed);
        let p = random::random_polytope(&mut r, dim);
        let v = weight(&random::random_positive_weight(&mut r, &p, 1));
        let w = weight(&random::random_positive_weight(&mut r, &p, 2));
        let a = solve_extremal(&v, &w, &triangulate(&p, 0)).unwrap();
        let b = solve_extremal(&v, &w, &triangulate(&p, 1)).unwrap();
        prop_assert_eq!(a.ell, b.ell);
    }

    #[test]
    fn scaling_covariance(seed in any::<u64>(), dim in 1usize..=2, num in 1i64..9, den in 1i64..9) {
        let mut r = random::rng(seed);
        let p = random::random_polytope(&mut r, dim);
        let v = random::random_positive_weight(&mut r, &p, 1);
        let w = random::random_positive_weight(&mut r, &p, 1);
        let lambda = qf(num, den);
        let t = triangulate(&p, 0);
        let base = solve_extremal(&weight(&v), &weight(&w), &t).unwrap().ell;
        let sv = solve_extremal(&weight(&v.scale(&lambda)), &weight(&w), &t).unwrap().ell;
        prop_assert_eq!(sv, base.scale(&lambda));
        let sw = solve_extremal(&weight(&v), &weight(&w.scale(&lambda)), &t).unwrap().ell;
        prop_assert_eq!(sw, base.scale(&(Q::one() / &lambda)));
    }
}

#[test]
fn worked_values() {
    let one2 = Weight::one(2);
    let sq = cube(2, -1, 1);
    let sol = solve_extremal(&one2, &one2, &triangulate(&sq, 0)).unwrap();
    assert_eq!(sol.ell, AffineFunction::constant_fn(2, q(4)));
    assert_eq!(c_constant(&sq, &one2, &one2), Value::Exact(q(4)));

    // Standard triangle: each edge has σ-measure 1 and ∫_∂ y1 dσ = 1, so the
    // constant 12 satisfies ∫ℓ = 2·3 and ∫ y1 ℓ = 12/6 = 2.
    let tri = standard_simplex(2);
    let sol = solve_extremal(&one2, &one2, &triangulate(&tri, 0)).unwrap();
    assert_eq!(sol.ell, AffineFunction::constant_fn(2, q(12)));
}

#[test]
fn lipschitz_in_eps_on_corner_cut_family() {
    let sq = cube(2, -1, 1);
    let cut = [PerturbationCut::new(vec![-1, -1], q(2), q(1))];
    let one = Weight::one(2);
    let eps = [q(0), qf(1, 32), qf(1, 16), qf(1, 8)];
    let family = extremal_family(&sq, &cut, &one, &one, &eps, ExecPolicy::default());
    let ells: Vec<AffineFunction> = family.iter().map(|e| e.solution.as_ref().unwrap().ell.clone()).collect();
    let dist = |i: usize| to_f64(&ells[i].coeff_distance(&ells[0]));
    let c = (1..=2).map(|i| dist(i) / to_f64(&eps[i])).fold(0.0, f64::max);
    assert!(c > 0.0);
    assert!(dist(3) <= 2.0 * c * to_f64(&eps[3]));
    assert!(dist(1) < dist(2) && dist(2) < dist(3));
}
