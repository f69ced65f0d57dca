//! Property suites across modules. Random instances are built from a proptest
//! seed through ChaCha8 so failing cases shrink to a single integer.

use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use conekit_core::cones::linalg::{rank, solve};
use conekit_core::cones::{
    caratheodory_unit, contains, extremal_refine, int, lp_solve, rat, simplex_min_quadratic, Bound, ConeOracle,
    CpCertificate, LpOutcome, Matrix, RatMatrix, Rational, Scalar, Sense,
};
use conekit_core::cpext::{dual_matrix, feasibility_identity_holds, lift_vector, DualSolution};
use conekit_core::gpt::{
    ensemble_information, group_by_map, outcome_distribution, refine_and_decompose, Ensemble, GptSystem,
    Measurement,
};
use conekit_core::polytopes::{
    bits_of, facet_enum, slack_matrix, trivial_factorization, verify_cone_factorization, ConeElement,
    SlackMatrix, ZeroOnePolytope,
};
use conekit_core::protocol::{exact_expectation, protocol_from_factorization, ConeFactorization};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small(r: &mut ChaCha8Rng, lo: i64, hi: i64) -> Rational {
    int(r.gen_range(lo..=hi))
}

fn nonneg_vec(r: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    (0..n).map(|_| small(r, 0, 4)).collect()
}

fn gram(r: &mut ChaCha8Rng, side: usize, terms: usize, nonneg: bool) -> (RatMatrix, Vec<Vec<Rational>>) {
    let factors: Vec<Vec<Rational>> = (0..terms)
        .map(|_| (0..side).map(|_| if nonneg { small(r, 0, 3) } else { small(r, -3, 3) }).collect())
        .collect();
    let m = factors.iter().fold(Matrix::zeros(side, side), |acc, z| acc.add(&Matrix::outer(z)));
    (m, factors)
}

fn random_symmetric(r: &mut ChaCha8Rng, n: usize, lo: i64, hi: i64) -> RatMatrix {
    let mut q = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x = rat(r.gen_range(lo..=hi), r.gen_range(1..=4));
            q[(i, j)] = x.clone();
            q[(j, i)] = x;
        }
    }
    q
}

/// Measurement on the orthant of dimension `n` or the 2x2 psd cone whose
/// effects sum to the default unit.
fn random_measurement(r: &mut ChaCha8Rng, cone: &ConeOracle) -> Measurement<Rational> {
    if cone.is_matrix_cone() {
        let k = r.gen_range(1..=5);
        let mut parts: Vec<RatMatrix> = (0..k)
            .map(|_| {
                let terms = r.gen_range(1..=2);
                gram(r, 2, terms, false).0
            })
            .collect();
        let total = parts.iter().fold(Matrix::zeros(2, 2), |acc, a| acc.add(a));
        let c = int(1) / (&total[(0, 0)] + &total[(1, 1)] + int(1));
        for p in &mut parts {
            *p = p.scale(&c);
        }
        parts.push(Matrix::identity(2).sub(&total.scale(&c)));
        Measurement::new(parts)
    } else {
        let n = cone.ambient;
        let k = r.gen_range(1..=6);
        let w: Vec<Vec<i64>> = (0..k).map(|_| (0..n).map(|_| r.gen_range(0..=3)).collect()).collect();
        let effects = (0..k)
            .map(|e| {
                let col: Vec<Rational> = (0..n)
                    .map(|i| {
                        let total: i64 = w.iter().map(|row| row[i]).sum();
                        match total {
                            0 if e == 0 => int(1),
                            0 => int(0),
                            t => rat(w[e][i], t),
                        }
                    })
                    .collect();
                Matrix::column(&col)
            })
            .collect();
        Measurement::new(effects)
    }
}

fn random_state(r: &mut ChaCha8Rng, cone: &ConeOracle) -> RatMatrix {
    let x = if cone.is_matrix_cone() {
        gram(r, 2, 2, false).0.add(&Matrix::identity(2))
    } else {
        Matrix::column(&nonneg_vec(r, cone.ambient)).add(&Matrix::ones(cone.ambient, 1))
    };
    let norm = cone.default_unit::<Rational>().inner(&x);
    x.scale(&(int(1) / norm))
}

fn pick_cone(r: &mut ChaCha8Rng) -> ConeOracle {
    if r.gen_bool(0.5) {
        ConeOracle::orthant(r.gen_range(1..=4))
    } else {
        ConeOracle::psd(2)
    }
}

/// Maximum of `c·x` over `{A x = b, lo <= x <= hi}` by enumerating basic
/// points: every variable at a bound except `rows(A)` free ones.
fn brute_force_lp(a: &RatMatrix, b: &[Rational], lo: &[Rational], hi: &[Rational], c: &[Rational]) -> Option<Rational> {
    let n = c.len();
    let m = a.rows();
    let mut best: Option<Rational> = None;
    let mut choice = vec![0u8; n];
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut k = code;
        for slot in choice.iter_mut() {
            *slot = (k % 3) as u8;
            k /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| choice[i] == 2).collect();
        if free.len() != m {
            continue;
        }
        let mut x: Vec<Rational> = (0..n)
            .map(|i| match choice[i] {
                0 => lo[i].clone(),
                1 => hi[i].clone(),
                _ => int(0),
            })
            .collect();
        if m > 0 {
            let sub = Matrix::from_fn(m, m, |r, k| a[(r, free[k])].clone());
            let rhs: Vec<Rational> = (0..m)
                .map(|r| {
                    let fixed: Rational = (0..n).filter(|i| choice[*i] != 2).map(|i| a[(r, i)].clone() * &x[i]).sum();
                    &b[r] - fixed
                })
                .collect();
            let Some(sol) = solve(&sub, &rhs) else { continue };
            for (k, &i) in free.iter().enumerate() {
                x[i] = sol[k].clone();
            }
        }
        if (0..n).any(|i| x[i] < lo[i] || x[i] > hi[i]) {
            continue;
        }
        let v: Rational = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
        if best.as_ref().is_none_or(|b| v > *b) {
            best = Some(v);
        }
    }
    best
}

/// `min zᵀMz` over the grid `{z : 40z ∈ ℕ^m, Σz = 1}`.
fn grid_min(m: &Matrix<f64>) -> f64 {
    let side = m.rows();
    let steps = 40usize;
    let mut best = f64::INFINITY;
    let mut counts = vec![0usize; side];
    fn walk(k: usize, left: usize, counts: &mut Vec<usize>, m: &Matrix<f64>, best: &mut f64) {
        if k + 1 == counts.len() {
            counts[k] = left;
            let z: Vec<f64> = counts.iter().map(|&c| c as f64 / 40.0).collect();
            *best = best.min(m.quad_form(&z));
            return;
        }
        for c in 0..=left {
            counts[k] = c;
            walk(k + 1, left - c, counts, m, best);
        }
    }
    walk(0, steps, &mut counts, m, &mut best);
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cone_duality_pairs_are_nonnegative(seed in any::<u64>(), side in 1usize..=4) {
        let mut r = rng(seed);
        let x = Matrix::column(&nonneg_vec(&mut r, side));
        let y = Matrix::column(&nonneg_vec(&mut r, side));
        let orthant = ConeOracle::orthant(side);
        prop_assert!(contains(&orthant, &x, 0.0, None).unwrap().is_member());
        prop_assert!(x.inner(&y) >= int(0));

        let (p, _) = gram(&mut r, side, 2, false);
        let (q, _) = gram(&mut r, side, 2, false);
        let psd = ConeOracle::psd(side);
        prop_assert!(contains(&psd, &p, 0.0, None).unwrap().is_member());
        prop_assert!(p.inner(&q) >= int(0));

        let (cp, factors) = gram(&mut r, side, 3, true);
        let cert = CpCertificate::new(factors);
        let cp_cone = ConeOracle::completely_positive(side);
        prop_assert!(contains(&cp_cone, &cp, 0.0, Some(&cert)).unwrap().is_member());
        let mut nonneg = Matrix::zeros(side, side);
        for i in 0..side {
            for j in i..side {
                let v = small(&mut r, 0, 3);
                nonneg[(i, j)] = v.clone();
                nonneg[(j, i)] = v;
            }
        }
        let copositive = q.add(&nonneg);
        prop_assert!(contains(&cp_cone.dual(), &copositive, 0.0, None).unwrap().is_member());
        prop_assert!(cp.inner(&copositive) >= int(0));
    }

    #[test]
    fn simplex_min_is_below_the_grid_and_attained(seed in any::<u64>(), side in 1usize..=4) {
        let mut r = rng(seed);
        let m = random_symmetric(&mut r, side, -6, 6);
        let exact = simplex_min_quadratic(&m).unwrap();
        let z = &exact.argmin;
        prop_assert!(z.iter().all(|v| *v >= int(0)));
        prop_assert_eq!(z.iter().cloned().sum::<Rational>(), int(1));
        prop_assert_eq!(m.quad_form(z), exact.value.clone());
        let g = grid_min(&m.to_f64());
        let v = exact.value.to_f64();
        prop_assert!(v <= g + 1e-12, "exact {v} above grid {g}");
        // the grid is within one step of every point: |Δ(zᵀMz)| <= 2‖M‖ / 40
        prop_assert!(g - v <= 2.0 * m.max_abs() * side as f64 / 40.0 + 1e-12);
        if z.iter().all(|c| (c * int(40)).is_integer()) {
            prop_assert!((g - v).abs() <= 1e-6);
        }
    }

    #[test]
    fn float_simplex_min_matches_exact(seed in any::<u64>(), side in 1usize..=4) {
        let mut r = rng(seed);
        let m = random_symmetric(&mut r, side, -6, 6);
        let exact = simplex_min_quadratic(&m).unwrap().value.to_f64();
        let float = simplex_min_quadratic(&m.to_f64()).unwrap().value;
        prop_assert!((exact - float).abs() <= 1e-6, "{exact} vs {float}");
    }

    #[test]
    fn caratheodory_recombines_with_few_nonzeros(seed in any::<u64>()) {
        let mut r = rng(seed);
        let cone = pick_cone(&mut r);
        let m = random_measurement(&mut r, &cone);
        let unit = cone.default_unit::<Rational>();
        let w = caratheodory_unit(&m.effects, &unit).unwrap();
        prop_assert!(w.iter().all(|x| *x >= int(0)));
        prop_assert!(w.iter().filter(|x| !x.is_zero()).count() <= cone.gpt_dim());
        let sum = m.effects.iter().zip(&w).fold(Matrix::zeros(unit.rows(), unit.cols()), |acc, (e, x)| acc.add(&e.scale(x)));
        prop_assert_eq!(sum, unit);
    }

    #[test]
    fn extremal_refine_splits_into_rays(seed in any::<u64>(), side in 1usize..=3) {
        let mut r = rng(seed);
        let terms = r.gen_range(1..=3);
        let (p, _) = gram(&mut r, side, terms, false);
        let parts = extremal_refine(&p, &ConeOracle::psd(side)).unwrap();
        let sum = parts.iter().fold(Matrix::zeros(side, side), |acc, x| acc.add(x));
        prop_assert_eq!(sum, p);
        prop_assert!(parts.iter().all(|x| rank(x) == 1));

        let v = Matrix::column(&nonneg_vec(&mut r, side));
        let parts = extremal_refine(&v, &ConeOracle::orthant(side)).unwrap();
        let sum = parts.iter().fold(Matrix::zeros(side, 1), |acc, x| acc.add(x));
        prop_assert_eq!(sum, v);
        prop_assert!(parts.iter().all(|x| x.as_slice().iter().filter(|c| !c.is_zero()).count() == 1));
    }

    #[test]
    fn lp_matches_vertex_enumeration(seed in any::<u64>(), n in 1usize..=4, rows in 0usize..=2) {
        let mut r = rng(seed);
        let rows = rows.min(n);
        let a = Matrix::from_fn(rows, n, |_, _| small(&mut r, -2, 2));
        prop_assume!(rank(&a) == rows);
        let x0: Vec<Rational> = (0..n).map(|_| small(&mut r, 0, 3)).collect();
        let b = if r.gen_bool(0.8) { a.mul_vec(&x0) } else { (0..rows).map(|_| small(&mut r, -6, 6)).collect() };
        let lo: Vec<Rational> = (0..n).map(|_| small(&mut r, -1, 0)).collect();
        let hi: Vec<Rational> = (0..n).map(|_| small(&mut r, 3, 4)).collect();
        let c: Vec<Rational> = (0..n).map(|_| small(&mut r, -3, 3)).collect();
        let bounds: Vec<Bound<Rational>> = lo.iter().zip(&hi).map(|(l, h)| Bound::closed(l.clone(), h.clone())).collect();
        let out = lp_solve(&a, &b, &bounds, &c, Sense::Maximize).unwrap();
        match (out, brute_force_lp(&a, &b, &lo, &hi, &c)) {
            (LpOutcome::Optimal(o), Some(v)) => {
                prop_assert_eq!(o.value.clone(), v);
                prop_assert_eq!(a.mul_vec(&o.point), b);
            }
            (LpOutcome::Infeasible, None) => {}
            (other, brute) => prop_assert!(false, "lp {other:?} vs brute force {brute:?}"),
        }
    }

    #[test]
    fn facet_enumeration_round_trips(seed in any::<u64>(), d in 1usize..=4) {
        let mut r = rng(seed);
        let mut vertices: Vec<Vec<u8>> = (0..1usize << d).filter(|_| r.gen_bool(0.5)).map(|m| bits_of(m, d)).collect();
        if vertices.is_empty() {
            vertices.push(bits_of(r.gen_range(0..1usize << d), d));
        }
        let p = ZeroOnePolytope::new(d, vertices.clone()).unwrap();
        let h = facet_enum(&p).unwrap();
        let inside: Vec<Vec<u8>> = (0..1usize << d)
            .map(|m| bits_of(m, d))
            .filter(|v| h.contains_point(&v.iter().map(|&x| int(i64::from(x))).collect::<Vec<_>>()))
            .collect();
        let mut expected = vertices;
        expected.sort();
        let mut inside = inside;
        inside.sort();
        prop_assert_eq!(inside, expected);

        let s = slack_matrix(&p, &h).unwrap();
        prop_assert!(s.s.as_slice().iter().all(|x| *x >= int(0)));
        for j in 0..s.cols() {
            prop_assert!((0..s.rows()).any(|i| s.s[(i, j)].is_zero()));
        }
        if s.cols() > 0 {
            for i in 0..s.rows() {
                prop_assert!((0..s.cols()).any(|j| s.s[(i, j)].is_zero()));
            }
        }
    }

    #[test]
    fn trivial_split_verifies(seed in any::<u64>(), rows in 1usize..=5, cols in 1usize..=5) {
        let mut r = rng(seed);
        let s = SlackMatrix { s: Matrix::from_fn(rows, cols, |_, _| rat(r.gen_range(0..=6), r.gen_range(1..=3))) };
        let (t, u) = trivial_factorization(&s);
        let report = verify_cone_factorization(&s, &t, &u, &ConeOracle::orthant(cols), 0.0).unwrap();
        prop_assert!(report.passed(0.0));
    }

    #[test]
    fn refinement_and_mixtures_preserve_statistics(seed in any::<u64>()) {
        let mut r = rng(seed);
        let cone = pick_cone(&mut r);
        let system = GptSystem::<Rational>::with_default_unit(cone).unwrap();
        let m = random_measurement(&mut r, &cone);
        let (refined, map, mixture) = refine_and_decompose(&m, &system).unwrap();
        prop_assert_eq!(mixture.total_weight(), int(1));
        for _ in 0..3 {
            let omega = random_state(&mut r, &cone);
            let p = outcome_distribution(&omega, &m).unwrap();
            let p_ref = outcome_distribution(&omega, &refined).unwrap();
            prop_assert_eq!(group_by_map(&p_ref, &map, m.len()), p.clone());
            let mut mixed = vec![int(0); refined.len()];
            for (w, part) in &mixture.parts {
                for (acc, q) in mixed.iter_mut().zip(outcome_distribution(&omega, part).unwrap()) {
                    *acc += w.clone() * q;
                }
            }
            prop_assert_eq!(mixed, p_ref);
        }
    }

    #[test]
    fn refinement_never_loses_information(seed in any::<u64>()) {
        let mut r = rng(seed);
        let cone = pick_cone(&mut r);
        let system = GptSystem::<Rational>::with_default_unit(cone).unwrap();
        let m = random_measurement(&mut r, &cone);
        let (refined, _, _) = refine_and_decompose(&m, &system).unwrap();
        let k = r.gen_range(1..=4);
        let ensemble = Ensemble {
            prior: vec![1.0 / k as f64; k],
            states: (0..k).map(|_| random_state(&mut r, &cone).to_f64()).collect(),
        };
        let coarse = Measurement::new(m.effects.iter().map(Matrix::to_f64).collect());
        let fine = Measurement::new(refined.effects.iter().map(Matrix::to_f64).collect());
        prop_assert!(ensemble_information(&ensemble, &fine) >= ensemble_information(&ensemble, &coarse) - 1e-12);
    }

    #[test]
    fn protocol_round_trip_is_exact(seed in any::<u64>(), rows in 1usize..=4, cols in 1usize..=4, n in 1usize..=4) {
        let mut r = rng(seed);
        let f = ConeFactorization {
            cone: ConeOracle::orthant(n),
            states: (0..rows).map(|_| ConeElement::plain(Matrix::column(&nonneg_vec(&mut r, n)))).collect(),
            responses: (0..cols).map(|_| ConeElement::plain(Matrix::column(&nonneg_vec(&mut r, n)))).collect(),
        };
        let p = protocol_from_factorization(&f, &Matrix::ones(n, 1)).unwrap();
        p.validate(0.0).unwrap();
        let e = exact_expectation(&p);
        prop_assert_eq!(e.clone(), f.matrix());
        prop_assert!(e.as_slice().iter().all(|x| *x >= int(0)));
        prop_assert!(p.outputs.iter().flatten().all(|x| *x >= int(0)));
    }

    #[test]
    fn psd_protocol_round_trip(seed in any::<u64>(), rows in 1usize..=3, cols in 1usize..=3) {
        let mut r = rng(seed);
        let elem = |r: &mut ChaCha8Rng| ConeElement::plain(gram(r, 2, 2, false).0.to_f64());
        let f = ConeFactorization {
            cone: ConeOracle::psd(2),
            states: (0..rows).map(|_| elem(&mut r)).collect(),
            responses: (0..cols).map(|_| elem(&mut r)).collect(),
        };
        let p = protocol_from_factorization(&f, &Matrix::identity(2)).unwrap();
        let err = exact_expectation(&p).sub(&f.matrix()).max_abs();
        prop_assert!(err <= 1e-9 * (1.0 + f.matrix().max_abs()), "{err}");
    }

    #[test]
    fn feasibility_identity_for_any_parameters(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let q = random_symmetric(&mut r, n, -5, 5);
        let v: Vec<Rational> = (0..1 + 3 * n).map(|_| rat(r.gen_range(-20..=20), r.gen_range(1..=5))).collect();
        let s = DualSolution::from_vec(n, &v).unwrap();
        prop_assert!(feasibility_identity_holds(&q, &s).unwrap());
        let m = dual_matrix(&q, &s).unwrap();
        prop_assert!(m.is_symmetric());
        for mask in 0..1usize << n {
            let a = bits_of(mask, n);
            let z = lift_vector(&a);
            let qa: Rational = (0..n).flat_map(|i| (0..n).map(move |j| (i, j)))
                .filter(|&(i, j)| a[i] == 1 && a[j] == 1)
                .map(|(i, j)| q[(i, j)].clone())
                .sum();
            prop_assert_eq!(m.quad_form(&z), qa - s.objective());
        }
    }
}
