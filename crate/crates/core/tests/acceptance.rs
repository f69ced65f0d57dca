//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so every line reaches the
//! output of `cargo test`. Exits nonzero if any criterion fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use conekit_core::circuits::{
    compile, cp_extension_of_definable, lower_to_nor, single_nor_circuit, stable_set_circuit, Circuit, Gate,
    GateKind, NorCircuit, NorGate, NorWire, Wire,
};
use conekit_core::cones::{int, rat, simplex_min_quadratic, ConeOracle, Matrix, RatMatrix, Rational, Scalar};
use conekit_core::cpext::{
    cor_facets, dual_box, dual_matrix, factorize_cor_slack, interior_dual_point, kappa, vertex_lift,
    DualSolution, DEFAULT_GAP_TOL,
};
use conekit_core::gpt::{
    canonical_classical, capacity_bound, ensemble_information, holevo_capacity_lower, refine_and_decompose,
    GptSystem, Measurement, SearchConfig,
};
use conekit_core::polytopes::{bits_of, correlation_polytope, facet_enum, slack_matrix, trivial_factorization};
use conekit_core::protocol::{exact_expectation, monte_carlo, protocol_from_factorization, ConeFactorization};
use conekit_core::Error;

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    ok: bool,
    detail: String,
}

impl Verdict {
    fn new(ok: bool, detail: impl Into<String>) -> Self {
        Verdict { ok, detail: detail.into() }
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

/// `zᵀ M z` for `z = (1, a, 1 - a)`.
fn lifted_value(m: &RatMatrix, a: &[u8]) -> Rational {
    let mut z = vec![int(1)];
    z.extend(a.iter().map(|&x| int(i64::from(x))));
    z.extend(a.iter().map(|&x| int(1 - i64::from(x))));
    let mut acc = int(0);
    for (r, zr) in z.iter().enumerate() {
        for (c, zc) in z.iter().enumerate() {
            acc += m[(r, c)].clone() * zr * zc;
        }
    }
    acc
}

fn quad(q: &RatMatrix, a: &[u8]) -> Rational {
    let mut acc = int(0);
    for i in 0..a.len() {
        for j in 0..a.len() {
            if a[i] == 1 && a[j] == 1 {
                acc += q[(i, j)].clone();
            }
        }
    }
    acc
}

fn to_f64(x: &Rational) -> f64 {
    Scalar::to_f64(x)
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let p = correlation_polytope(2).expect("COR(2)");
    let h = facet_enum(&p).expect("facets");
    let s = slack_matrix(&p, &h).expect("slack");
    let elapsed = start.elapsed();

    // coordinates (z11, z22, z12)
    let expected: BTreeSet<(Vec<Rational>, Rational)> = [
        (vec![0, 0, 1], 0),
        (vec![1, 0, -1], 0),
        (vec![0, 1, -1], 0),
        (vec![-1, -1, 1], -1),
    ]
    .into_iter()
    .map(|(a, b)| (a.into_iter().map(int).collect(), int(b)))
    .collect();
    let got: BTreeSet<(Vec<Rational>, Rational)> = (0..h.num_facets())
        .map(|j| {
            let (a, b) = h.facet(j);
            (a.to_vec(), b.clone())
        })
        .collect();
    let facets_ok = h.num_facets() == 4 && got == expected;

    let mut slack_ok = s.rows() == 4 && s.cols() == 4;
    if slack_ok {
        for (i, v) in p.vertices.iter().enumerate() {
            let z = [v[0], v[1], v[0] * v[1]].map(|x| int(i64::from(x)));
            for j in 0..4 {
                let (a, b) = h.facet(j);
                let value: Rational = a.iter().zip(&z).map(|(x, y)| x * y).sum::<Rational>() - b;
                slack_ok &= s.s[(i, j)] == value && (value.is_zero() || value == int(1));
            }
        }
        for k in 0..4 {
            let row_ones = (0..4).filter(|&j| s.s[(k, j)] == int(1)).count();
            let col_ones = (0..4).filter(|&i| s.s[(i, k)] == int(1)).count();
            slack_ok &= row_ones == 1 && col_ones == 1;
        }
    }
    let ok = facets_ok && slack_ok && elapsed < Duration::from_secs(1);
    Verdict::new(
        ok,
        format!("facets match: {facets_ok}, permutation slack: {slack_ok}, {:.3} s", secs(elapsed)),
    )
}

fn criterion_2() -> Verdict {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("pool");
    let limits = [(1, 60.0), (2, 60.0), (3, 900.0)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, limit) in limits {
        let start = Instant::now();
        let cert = match pool.install(|| factorize_cor_slack(n, DEFAULT_GAP_TOL)) {
            Ok(c) => c,
            Err(e) => {
                ok = false;
                parts.push(format!("n={n}: error {e}"));
                continue;
            }
        };
        let elapsed = secs(start.elapsed());
        let mut max_gap = 0.0f64;
        let mut min_simplex = f64::INFINITY;
        for (d, f) in cert.duals.iter().zip(&cert.facets) {
            let (k, _) = kappa(&f.q).expect("kappa");
            max_gap = max_gap.max(to_f64(&(k - d.solution.objective())).abs());
            let sm = simplex_min_quadratic(&d.matrix).expect("simplex min");
            min_simplex = min_simplex.min(to_f64(&sm.value));
        }
        let mut max_err = 0.0f64;
        for (i, v) in cert.polytope.vertices.iter().enumerate() {
            for (j, d) in cert.duals.iter().enumerate() {
                let err = lifted_value(&d.matrix, &v[..n]) - &cert.slack.s[(i, j)];
                max_err = max_err.max(to_f64(&err).abs());
            }
        }
        let pass = max_gap <= 1e-6 && min_simplex >= -1e-8 && max_err <= 1e-5 && elapsed < limit;
        ok &= pass;
        parts.push(format!(
            "n={n}: gap {max_gap:.2e}, simplex-min {min_simplex:.2e}, max|Y.M-S| {max_err:.2e}, {elapsed:.2} s"
        ));
    }
    Verdict::new(ok, parts.join("; "))
}

fn random_in(rng: &mut ChaCha8Rng, lo: &Rational, hi: &Rational) -> Rational {
    let k = rng.gen_range(0..=1000i64);
    lo + (hi - lo) * rat(k, 1000)
}

fn criterion_3() -> Verdict {
    let (p, _, facets) = cor_facets(2).expect("COR(2) facets");
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0usize;
    let mut failures = 0usize;
    for t in 0..1000 {
        let q = &facets[t % facets.len()].q;
        let (k, _) = kappa(q).expect("kappa");
        let bx = dual_box(q, &(k - int(1))).expect("box");
        let v: Vec<Rational> = bx.lower.iter().zip(&bx.upper).map(|(lo, hi)| random_in(&mut rng, lo, hi)).collect();
        let s = DualSolution::from_vec(2, &v).expect("dual point");
        let m = dual_matrix(q, &s).expect("dual matrix");
        let obj = &v[0] + v[1..3].iter().map(|b| b * int(2)).sum::<Rational>() + v[3..5].iter().sum::<Rational>();
        for v in &p.vertices {
            let a = &v[..2];
            checked += 1;
            if lifted_value(&m, a) != quad(q, a) - &obj {
                failures += 1;
            }
        }
    }
    Verdict::new(failures == 0, format!("{checked} vertex checks over 1000 box points, {failures} mismatches"))
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> RatMatrix {
    let mut q = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x = rat(rng.gen_range(-9..=9), rng.gen_range(1..=6));
            q[(i, j)] = x.clone();
            q[(j, i)] = x;
        }
    }
    q
}

fn criterion_4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = f64::INFINITY;
    let mut ok = true;
    for _ in 0..50 {
        let n = rng.gen_range(1..=3);
        let q = random_symmetric(&mut rng, n);
        let s = interior_dual_point(&q).expect("interior point");
        let m = dual_matrix(&q, &s).expect("dual matrix");
        let side = (1 + 2 * n) as f64;
        let value = to_f64(&simplex_min_quadratic(&m).expect("simplex min").value);
        let floor = -to_f64(&s.alpha) / (2.0 * side) - 1e-9;
        worst = worst.min(value - floor);
        ok &= value >= floor;
    }
    Verdict::new(ok, format!("50 random Q, min margin over the bound {worst:.3e}"))
}

fn random_psd_rank_one(rng: &mut ChaCha8Rng) -> RatMatrix {
    let v = [int(rng.gen_range(-3..=3)), int(rng.gen_range(-3..=3))];
    Matrix::outer(&v)
}

/// Random measurement with rational effects summing to the default unit.
fn random_measurement(rng: &mut ChaCha8Rng, cone: &ConeOracle) -> Measurement<Rational> {
    if cone.is_matrix_cone() {
        let k = rng.gen_range(2..=8);
        let mut parts: Vec<RatMatrix> = (0..k - 1)
            .map(|_| {
                let mut a = random_psd_rank_one(rng);
                if rng.gen_bool(0.5) {
                    a = a.add(&random_psd_rank_one(rng));
                }
                a
            })
            .collect();
        let total = parts.iter().fold(Matrix::zeros(2, 2), |acc, a| acc.add(a));
        let trace = &total[(0, 0)] + &total[(1, 1)] + int(1);
        let c = int(1) / (trace * rat(rng.gen_range(1..=3), 1));
        for a in &mut parts {
            *a = a.scale(&c);
        }
        let rest = Matrix::identity(2).sub(&total.scale(&c));
        parts.push(rest);
        Measurement::new(parts)
    } else {
        let n = cone.ambient;
        let k = rng.gen_range(1..=12);
        let weights: Vec<Vec<i64>> = (0..k)
            .map(|_| (0..n).map(|_| if rng.gen_bool(0.3) { 0 } else { rng.gen_range(1..=5) }).collect())
            .collect();
        let effects = (0..k)
            .map(|e| {
                let col: Vec<Rational> = (0..n)
                    .map(|i| {
                        let total: i64 = weights.iter().map(|w| w[i]).sum();
                        if total == 0 {
                            if e == 0 {
                                int(1)
                            } else {
                                int(0)
                            }
                        } else {
                            rat(weights[e][i], total)
                        }
                    })
                    .collect();
                Matrix::column(&col)
            })
            .collect();
        Measurement::new(effects)
    }
}

fn is_extremal<T: Scalar>(e: &Matrix<T>, matrix_cone: bool) -> bool {
    if matrix_cone {
        let det = e[(0, 0)].clone() * &e[(1, 1)] - e[(0, 1)].clone() * &e[(1, 0)];
        if T::EXACT {
            det.is_zero()
        } else {
            det.to_f64().abs() <= 1e-9
        }
    } else {
        e.as_slice().iter().filter(|x| !x.is_zero()).count() <= 1
    }
}

fn check_decomposition<T: Scalar>(m: &Measurement<T>, system: &GptSystem<T>) -> Result<(), String> {
    let (refined, _, mixture) = refine_and_decompose(m, system).map_err(|e| e.to_string())?;
    let n = system.gpt_dim();
    let matrix_cone = system.cone.is_matrix_cone();
    let mut total = T::zero();
    for (w, part) in &mixture.parts {
        if w.is_neg() {
            return Err("negative weight".into());
        }
        total += w;
        if part.nonzero_count() > n {
            return Err(format!("part with {} nonzero effects", part.nonzero_count()));
        }
        if !part.effects.iter().filter(|e| !e.max_abs().is_zero()).all(|e| is_extremal(e, matrix_cone)) {
            return Err("non-extremal effect".into());
        }
    }
    let recombined = mixture.recombine();
    let err = recombined
        .iter()
        .zip(&refined.effects)
        .map(|(a, b)| a.sub(b).max_abs())
        .fold(0.0, f64::max);
    let weight_err = (total.to_f64() - 1.0).abs();
    let ok = if T::EXACT {
        err == 0.0 && recombined == refined.effects && total == T::one()
    } else {
        err <= 1e-9 && weight_err <= 1e-9
    };
    if ok {
        Ok(())
    } else {
        Err(format!("recombination error {err:e}"))
    }
}

fn criterion_5() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = Vec::new();
    let (mut orthant, mut qubit) = (0, 0);
    for t in 0..200 {
        let cone = if t % 2 == 0 {
            orthant += 1;
            ConeOracle::orthant(rng.gen_range(1..=6))
        } else {
            qubit += 1;
            ConeOracle::psd(2)
        };
        let m = random_measurement(&mut rng, &cone);
        let exact = GptSystem::<Rational>::with_default_unit(cone).expect("system");
        let float = GptSystem::<f64>::with_default_unit(cone).expect("system");
        let mf = Measurement::new(m.effects.iter().map(Matrix::to_f64).collect());
        if let Err(e) = check_decomposition(&m, &exact) {
            failures.push(format!("#{t} exact: {e}"));
        }
        if let Err(e) = check_decomposition(&mf, &float) {
            failures.push(format!("#{t} float: {e}"));
        }
    }
    let detail = format!(
        "{orthant} orthant + {qubit} qubit measurements, exact and float, {} failures{}",
        failures.len(),
        failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()
    );
    Verdict::new(failures.is_empty(), detail)
}

fn criterion_6() -> Verdict {
    let cones = [ConeOracle::orthant(2), ConeOracle::orthant(3), ConeOracle::orthant(4), ConeOracle::psd(2)];
    let runs: Vec<(usize, u64)> = (0..cones.len()).flat_map(|c| (0..25u64).map(move |s| (c, s))).collect();
    let results: Vec<(f64, f64)> = runs
        .par_iter()
        .map(|&(c, seed)| {
            let system = GptSystem::<f64>::with_default_unit(cones[c]).expect("system");
            let n = system.gpt_dim();
            let mut cfg = SearchConfig::new(n, n, 2, seed);
            cfg.steps = 150;
            let r = holevo_capacity_lower(&system, &cfg).expect("search");
            (r.value, capacity_bound(&cones[c]))
        })
        .collect();
    let violations = results.iter().filter(|(v, b)| *v > b + 1e-9).count();
    let worst = results.iter().map(|(v, b)| v - b).fold(f64::NEG_INFINITY, f64::max);
    let mut canonical_ok = true;
    for n in 2..=8 {
        let (ens, m) = canonical_classical(n);
        canonical_ok &= ensemble_information(&ens, &m) == (n as f64).log2();
    }
    Verdict::new(
        violations == 0 && canonical_ok,
        format!(
            "{} searches, {violations} above log2 n (max I - bound {worst:.3e}); canonical exact: {canonical_ok}",
            results.len()
        ),
    )
}

fn mc_check<T: Scalar>(f: &ConeFactorization<T>, unit: &Matrix<T>, seed: u64) -> (f64, usize, usize) {
    let p = protocol_from_factorization(f, unit).expect("protocol");
    let expected = exact_expectation(&p).to_f64();
    let target = f.matrix().to_f64();
    let round_trip = expected.sub(&target).max_abs();
    let (rows, cols) = expected.shape();
    let cells: Vec<(usize, usize)> = (0..rows).flat_map(|x| (0..cols).map(move |y| (x, y))).collect();
    let outside = cells
        .par_iter()
        .filter(|&&(x, y)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((x * cols + y + 1) as u64).wrapping_mul(0x9E37_79B9));
            let mc = monte_carlo(&p, x, y, 1_000_000, &mut rng).expect("sampling");
            (mc.mean - expected[(x, y)]).abs() > 4.0 * mc.std_err
        })
        .count();
    (round_trip, outside, cells.len())
}

fn criterion_7() -> Verdict {
    let p = correlation_polytope(2).expect("COR(2)");
    let h = facet_enum(&p).expect("facets");
    let s = slack_matrix(&p, &h).expect("slack");
    let (states, responses) = trivial_factorization(&s);
    let orthant = ConeFactorization {
        cone: ConeOracle::orthant(states[0].value.rows()),
        states,
        responses,
    };
    let unit = orthant.cone.dual().default_unit();
    let exact_ok = protocol_from_factorization(&orthant, &unit)
        .map(|pr| exact_expectation(&pr) == s.s)
        .unwrap_or(false);
    let (orth_err, orth_out, orth_cells) = mc_check(&orthant, &unit, 71);

    let cert = factorize_cor_slack(2, DEFAULT_GAP_TOL).expect("certificate");
    let cp = ConeFactorization {
        cone: cert.cp_cone(),
        states: cert.lifts.clone(),
        responses: cert.column_factors(),
    };
    let cp_unit = cp.cone.dual().default_unit();
    let cp_rt = protocol_from_factorization(&cp, &cp_unit)
        .map(|pr| exact_expectation(&pr).sub(&s.s).max_abs())
        .unwrap_or(f64::INFINITY);
    let (_, cp_out, cp_cells) = mc_check(&cp, &cp_unit, 72);

    let ok = exact_ok && orth_err == 0.0 && cp_rt <= 1e-5 && orth_out == 0 && cp_out == 0;
    Verdict::new(
        ok,
        format!(
            "orthant exact: {exact_ok}, CP round trip {cp_rt:.2e}; MC N=1e6 outside 4 s.e.: \
             orthant {orth_out}/{orth_cells}, CP {cp_out}/{cp_cells}"
        ),
    )
}

fn sorted(mut v: Vec<Vec<u8>>) -> Vec<Vec<u8>> {
    v.sort();
    v
}

/// `Ok(true)` when the compiled face projects onto the vertex set and the
/// audit passes, `Ok(false)` on a mismatch.
fn equivalence(c: &NorCircuit) -> Result<bool, Error> {
    let face = compile(c)?;
    if !face.validity_audit()?.passed() {
        return Ok(false);
    }
    match c.vertex_set() {
        Ok(v) => Ok(sorted(face.project()?.vertices) == sorted(v)),
        Err(Error::EmptyPolytope) => Ok(face.face_masks()?.is_empty()),
        Err(e) => Err(e),
    }
}

fn all_nor_circuits(d: usize, g: usize) -> Vec<NorCircuit> {
    let mut partial: Vec<Vec<NorGate>> = vec![Vec::new()];
    for k in 0..g {
        let mut wires: Vec<NorWire> = (0..d).map(NorWire::Input).collect();
        wires.extend((0..k).map(NorWire::Gate));
        wires.extend([NorWire::Const(false), NorWire::Const(true)]);
        let mut next = Vec::new();
        for gates in &partial {
            for &a in &wires {
                for &b in &wires {
                    if matches!((a, b), (NorWire::Const(_), NorWire::Const(_))) {
                        continue;
                    }
                    let mut gs = gates.clone();
                    gs.push(NorGate { name: format!("g{}", k + 1), a, b });
                    next.push(gs);
                }
            }
        }
        partial = next;
    }
    let outputs: Vec<NorWire> = (0..d).map(NorWire::Input).chain((0..g).map(NorWire::Gate)).collect();
    partial
        .into_iter()
        .flat_map(|gates| {
            outputs
                .iter()
                .map(move |&o| NorCircuit::new(d, Vec::new(), gates.clone(), o).expect("valid circuit"))
        })
        .collect()
}

fn random_wire(rng: &mut ChaCha8Rng, d: usize, advice: usize, k: usize) -> Wire {
    loop {
        let w = match rng.gen_range(0..4) {
            0 if d > 0 => Wire::Input(rng.gen_range(0..d)),
            1 if advice > 0 => Wire::Advice(rng.gen_range(0..advice)),
            2 if k > 0 => Wire::Gate(rng.gen_range(0..k)),
            3 => Wire::Const(rng.gen_bool(0.5)),
            _ => continue,
        };
        return w;
    }
}

fn random_advice_circuit(rng: &mut ChaCha8Rng) -> Circuit {
    let d = rng.gen_range(1..=3);
    let advice: Vec<bool> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_bool(0.5)).collect();
    let kinds = [GateKind::Nor, GateKind::And, GateKind::Or, GateKind::Not];
    let g = rng.gen_range(1..=3);
    let mut gates = Vec::new();
    for k in 0..g {
        let kind = kinds[rng.gen_range(0..kinds.len())];
        let mut inputs: Vec<Wire> = (0..kind.arity()).map(|_| random_wire(rng, d, advice.len(), k)).collect();
        if k == 0 && !inputs.iter().any(|w| matches!(w, Wire::Advice(_))) {
            inputs[0] = Wire::Advice(0);
        }
        gates.push(Gate { name: format!("g{}", k + 1), kind, inputs });
    }
    Circuit::new(d, advice, gates, Wire::Gate(g - 1)).expect("valid circuit")
}

fn criterion_8() -> Verdict {
    let start = Instant::now();
    let circuits: Vec<NorCircuit> =
        (1..=3).flat_map(|d| (0..=3).flat_map(move |g| all_nor_circuits(d, g))).collect();
    let results: Vec<Result<bool, Error>> = circuits.par_iter().map(equivalence).collect();
    let mismatches = results.iter().filter(|r| !matches!(r, Ok(true))).count();

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut advice_done = 0;
    let mut advice_bad = 0;
    let mut skipped_constant = 0;
    while advice_done < 20 {
        let c = random_advice_circuit(&mut rng);
        let nor = lower_to_nor(&c).expect("lowering");
        match equivalence(&nor) {
            Err(Error::ConstantOutput(_)) => {
                skipped_constant += 1;
                continue;
            }
            Ok(true) => {}
            _ => advice_bad += 1,
        }
        // the lowered circuit must compute the original function
        for mask in 0..1usize << c.inputs {
            let y = bits_of(mask, c.inputs);
            if c.evaluate(&y).ok() != nor.evaluate(&y).ok() {
                advice_bad += 1;
                break;
            }
        }
        advice_done += 1;
    }
    let elapsed = start.elapsed();
    let ok = mismatches == 0 && advice_bad == 0 && elapsed < Duration::from_secs(300);
    Verdict::new(
        ok,
        format!(
            "{} advice-free circuits, {mismatches} failures; 20 advice instances, {advice_bad} failures \
             ({skipped_constant} constant-output draws redrawn); {:.1} s",
            circuits.len(),
            secs(elapsed)
        ),
    )
}

fn lift_check(label: &str, c: &NorCircuit, exhaustive: bool) -> (bool, String) {
    let start = Instant::now();
    let lift = match cp_extension_of_definable(c) {
        Ok(l) => l,
        Err(e) => return (false, format!("{label}: error {e}")),
    };
    let n = lift.lift.n;
    let face: BTreeSet<usize> = lift.face_masks.iter().copied().collect();
    let feasible: BTreeSet<usize> = lift.feasible.iter().copied().collect();
    let vertex_set = c.vertex_set().map(sorted).unwrap_or_default();
    let projected = sorted(lift.projected.clone());

    // exact re-check of every feasible lift and of infeasible samples
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let probes: Vec<usize> = if exhaustive {
        (0..1usize << n).collect()
    } else {
        let mut p: Vec<usize> = feasible.iter().copied().collect();
        p.extend((0..200).map(|_| rng.gen_range(0..1usize << n)));
        p
    };
    let exact_ok = probes.par_iter().all(|&mask| {
        let y = vertex_lift(&bits_of(mask, n)).value;
        lift.lift.satisfies(&y) == face.contains(&mask)
    });
    let ok = lift.verified() && face == feasible && projected == vertex_set && exact_ok;
    (
        ok,
        format!(
            "{label}: n={n}, {} constraints, {} feasible of {}, projection = vertex set: {}, exact probes {}: {exact_ok}, {:.2} s",
            lift.lift.constraints.len(),
            feasible.len(),
            1usize << n,
            projected == vertex_set,
            probes.len(),
            secs(start.elapsed())
        ),
    )
}

fn criterion_9() -> Verdict {
    let (a, da) = lift_check("single NOR", &single_nor_circuit(), true);
    let path = stable_set_circuit(3, &[(0, 1), (1, 2)]).expect("path graph circuit");
    let (b, db) = lift_check("path graph", &path, false);
    Verdict::new(a && b, format!("{da}; {db}"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("COR(2) facets and slack matrix", criterion_1),
        ("CP factorization of the COR slack matrix", criterion_2),
        ("dual feasibility identity", criterion_3),
        ("interior dual point", criterion_4),
        ("measurement decomposition", criterion_5),
        ("capacity bound", criterion_6),
        ("protocol round trip", criterion_7),
        ("circuit to face equivalence", criterion_8),
        ("CP lift of definable polytopes", criterion_9),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let v = run();
        let tag = if v.ok { "PASS" } else { "FAIL" };
        println!("{tag} [{}] {name}: {}", k + 1, v.detail);
        if !v.ok {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
