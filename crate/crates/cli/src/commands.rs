//! Subcommand implementations. Each returns a JSON document and, when a
//! check fails, the name of the violated invariant.

use std::path::{Path, PathBuf};

use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use conekit_core::circuits::{compile, cp_extension_of_definable, lower_to_nor, parse_netlist};
use conekit_core::cones::{ConeKind, ConeOracle, Matrix, Rational};
use conekit_core::cpext::{cp_extension_constraints, factorize_cor_slack, vertex_lift, DEFAULT_COPOSITIVE_TOL};
use conekit_core::gpt::{capacity_bound, holevo_capacity_lower, refine_and_decompose, GptSystem, SearchConfig};
use conekit_core::json::{
    audit_to_json, certificate_from_json, compiled_face_to_json, conic_lift_to_json, cor_certificate_to_json,
    definable_lift_to_json, factorization_from_json, hrep_to_json, matrix_from_json, matrix_to_json,
    measurement_from_json, polytope_from_json, polytope_to_json, slack_to_json, vector_to_json, JsonScalar,
};
use conekit_core::polytopes::{
    bits_of, correlation_polytope, facet_enum, slack_matrix, verify_cone_factorization, ConeElement, SlackMatrix,
};
use conekit_core::protocol::{exact_expectation, monte_carlo, protocol_from_factorization, ConeFactorization};
use conekit_core::Error;

use crate::{CliError, Command, Global, Outcome};

type Res = std::result::Result<Outcome, CliError>;

fn fail(invariant: &str, message: impl Into<String>) -> Option<(String, String)> {
    Some((invariant.to_string(), message.into()))
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(Error::from)?;
    Ok(serde_json::from_str(&text).map_err(Error::from)?)
}

pub fn dispatch(global: &Global, command: &Command) -> Res {
    match command {
        Command::Slack(a) => slack(a),
        Command::DecomposeMeasurement(a) => {
            if global.exact {
                decompose::<Rational>(global, a)
            } else {
                decompose::<f64>(global, a)
            }
        }
        Command::Capacity(a) => capacity(global, a),
        Command::Simulate(a) => {
            if global.exact {
                simulate::<Rational>(global, a)
            } else {
                simulate::<f64>(global, a)
            }
        }
        Command::FactorizeCor(a) => factorize(global, a),
        Command::CpExtend(a) => cp_extend(a),
        Command::CompileCircuit(a) => compile_circuit(a),
        Command::VerifyFactorization(a) => verify(global, a),
    }
}

#[derive(Args, Debug)]
pub struct SlackArgs {
    /// Named polytope: `corN` for the correlation polytope COR(N).
    #[arg(long, conflicts_with = "vertices")]
    pub polytope: Option<String>,
    /// Polytope JSON file `{"dim", "vertices"}`.
    #[arg(long)]
    pub vertices: Option<PathBuf>,
}

fn slack(a: &SlackArgs) -> Res {
    let p = match (&a.polytope, &a.vertices) {
        (Some(name), None) => {
            let n = name
                .strip_prefix("cor")
                .and_then(|n| n.parse::<usize>().ok())
                .ok_or_else(|| CliError::Usage(format!("unknown polytope {name:?}; expected corN")))?;
            correlation_polytope(n)?
        }
        (None, Some(path)) => polytope_from_json(&read_json(path)?)?,
        _ => return Err(CliError::Usage("give exactly one of --polytope or --vertices".into())),
    };
    let h = facet_enum(&p)?;
    let s = slack_matrix(&p, &h)?;
    let negative = s.s.as_slice().iter().any(|v| *v < Rational::from_integer(0.into()));
    let failure = if negative { fail("slack_nonnegative", "a vertex violates a facet") } else { None };
    Ok(Outcome::checked(
        json!({
            "polytope": polytope_to_json(&p),
            "hrep": hrep_to_json(&h),
            "slack": slack_to_json(&s),
        }),
        failure,
    ))
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    /// Measurement JSON `{"system", "unit", "effects"}`.
    pub file: PathBuf,
}

fn max_diff<T: JsonScalar>(a: &Matrix<T>, b: &Matrix<T>) -> f64 {
    a.sub(b).max_abs()
}

fn decompose<T: JsonScalar>(global: &Global, a: &DecomposeArgs) -> Res {
    let (system, m) = measurement_from_json::<T>(&read_json(&a.file)?)?;
    let (refined, map, mixture) = refine_and_decompose(&m, &system)?;
    let tol = if T::EXACT { 0.0 } else { global.tol };
    let n = system.gpt_dim();
    let mut failure = None;
    let recombined = mixture.recombine();
    let recombine_err = recombined
        .iter()
        .zip(&refined.effects)
        .map(|(x, y)| max_diff(x, y))
        .fold(0.0, f64::max);
    if recombine_err > tol {
        failure = fail("mixture_recombines", format!("recombined effects differ by {recombine_err:e}"));
    }
    let weight_err = (mixture.total_weight() - T::one()).to_f64().abs();
    if failure.is_none() && weight_err > tol {
        failure = fail("weights_sum_to_one", format!("weights sum to 1 only up to {weight_err:e}"));
    }
    let shape = system.unit.shape();
    for (k, orig) in m.effects.iter().enumerate() {
        let mut acc = Matrix::zeros(shape.0, shape.1);
        for (e, _) in refined.effects.iter().zip(&map).filter(|(_, &i)| i == k) {
            acc = acc.add(e);
        }
        let err = max_diff(&acc, orig);
        if failure.is_none() && err > tol {
            failure = fail("refinement_sums_to_effect", format!("refinement of effect {k} is off by {err:e}"));
        }
    }
    let mut parts = Vec::new();
    for (k, (w, part)) in mixture.parts.iter().enumerate() {
        let count = part.nonzero_count();
        if failure.is_none() && count > n {
            failure = fail("nonzero_effects_at_most_n", format!("part {k} has {count} > {n} nonzero effects"));
        }
        if let Err(e) = part.validate(&system) {
            if failure.is_none() {
                failure = fail("part_is_measurement", format!("part {k}: {e}"));
            }
        }
        parts.push(json!({
            "weight": w.to_json(),
            "nonzero": count,
            "effects": part.effects.iter().map(matrix_to_json).collect::<Vec<_>>(),
        }));
    }
    Ok(Outcome::checked(
        json!({
            "n": n,
            "refined": refined.effects.iter().map(matrix_to_json).collect::<Vec<_>>(),
            "refinement_map": map,
            "parts": parts,
            "max_recombination_error": recombine_err,
        }),
        failure,
    ))
}

#[derive(Args, Debug)]
pub struct CapacityArgs {
    /// Cone kind: orthant or psd.
    #[arg(long)]
    pub cone: String,
    /// Vector length for the orthant, matrix side for psd.
    #[arg(long)]
    pub dim: usize,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    /// Number of states; defaults to the linear dimension.
    #[arg(long)]
    pub inputs: Option<usize>,
    /// Number of outcomes; defaults to the linear dimension.
    #[arg(long)]
    pub outcomes: Option<usize>,
    /// Hill-climbing steps per restart.
    #[arg(long)]
    pub steps: Option<usize>,
}

fn capacity(global: &Global, a: &CapacityArgs) -> Res {
    let kind = ConeKind::parse(&a.cone).map_err(|e| CliError::Usage(e.to_string()))?;
    let cone = ConeOracle::new(kind, a.dim).map_err(|e| CliError::Usage(e.to_string()))?;
    let system = GptSystem::<f64>::with_default_unit(cone)?;
    let n = system.gpt_dim();
    let mut cfg = SearchConfig::new(a.inputs.unwrap_or(n), a.outcomes.unwrap_or(n), a.restarts, global.seed);
    if let Some(steps) = a.steps {
        cfg.steps = steps;
    }
    let result = holevo_capacity_lower(&system, &cfg)?;
    let bound = capacity_bound(&cone);
    let failure = if result.value > bound + 1e-9 {
        fail("capacity_below_log2_n", format!("I = {} exceeds log2 n = {bound}", result.value))
    } else {
        None
    };
    Ok(Outcome::checked(
        json!({
            "cone": cone,
            "n": n,
            "information": result.value,
            "bound": bound,
            "best_restart": result.restart,
            "prior": result.ensemble.prior,
            "states": result.ensemble.states.iter().map(matrix_to_json).collect::<Vec<_>>(),
            "effects": result.measurement.effects.iter().map(matrix_to_json).collect::<Vec<_>>(),
        }),
        failure,
    ))
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Factorization JSON `{"cone", "states", "responses", "cp_certificates"}`
    /// with an optional `"unit"`.
    #[arg(long)]
    pub factorization: PathBuf,
    /// Monte Carlo samples per cell.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Allowed deviation in standard errors.
    #[arg(long, default_value_t = 4.0)]
    pub sigmas: f64,
}

/// Independent stream per cell so results do not depend on cell order.
pub fn cell_seed(seed: u64, cell: usize) -> u64 {
    seed ^ (cell as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn simulate<T: JsonScalar>(global: &Global, a: &SimulateArgs) -> Res {
    let doc = read_json(&a.factorization)?;
    let f: ConeFactorization<T> = factorization_from_json(&doc)?;
    let unit: Matrix<T> = match doc.get("unit") {
        Some(u) => matrix_from_json(u)?,
        None => f.cone.dual().default_unit(),
    };
    let tol = if T::EXACT { 0.0 } else { global.tol };
    let protocol = protocol_from_factorization(&f, &unit)?;
    let mut failure = protocol
        .validate(global.tol)
        .err()
        .and_then(|e| fail("protocol_valid", e.to_string()));
    let target = f.matrix();
    let expected = exact_expectation(&protocol);
    let round_trip = max_diff(&expected, &target);
    if failure.is_none() && round_trip > tol {
        failure = fail("expectation_matches_factorization", format!("max deviation {round_trip:e}"));
    }
    let (nx, ny) = protocol.num_inputs();
    let mut cells = Vec::with_capacity(nx * ny);
    let mut worst: f64 = 0.0;
    for x in 0..nx {
        for y in 0..ny {
            let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(global.seed, x * ny + y));
            let mc = monte_carlo(&protocol, x, y, a.samples, &mut rng)?;
            let exact = target[(x, y)].to_f64();
            let z = if mc.std_err > 0.0 { (mc.mean - exact).abs() / mc.std_err } else { 0.0 };
            if mc.std_err == 0.0 && (mc.mean - exact).abs() > 1e-12 {
                worst = f64::INFINITY;
            }
            worst = worst.max(z);
            cells.push(json!({
                "x": x,
                "y": y,
                "exact": target[(x, y)].to_json(),
                "mean": mc.mean,
                "std_err": mc.std_err,
                "z": z,
            }));
        }
    }
    if failure.is_none() && worst > a.sigmas {
        failure = fail(
            "monte_carlo_within_sigmas",
            format!("a cell deviates by {worst:.3} standard errors (allowed {})", a.sigmas),
        );
    }
    Ok(Outcome::checked(
        json!({
            "lambda": protocol.lambda.to_json(),
            "mu": protocol.mu.to_json(),
            "send_prob": vector_to_json(&protocol.send_prob),
            "samples": a.samples,
            "round_trip_error": round_trip,
            "max_z": worst,
            "cells": cells,
        }),
        failure,
    ))
}

#[derive(Args, Debug)]
pub struct FactorizeArgs {
    #[arg(long)]
    pub n: usize,
}

fn factorize(global: &Global, a: &FactorizeArgs) -> Res {
    let cert = factorize_cor_slack(a.n, global.tol)?;
    let failure = if !cert.report.passed(global.tol.max(DEFAULT_COPOSITIVE_TOL)) {
        fail("factorization_reproduces_slack", cert.report.failures.join("; "))
    } else if let Some(j) = cert.duals.iter().position(|d| !d.is_certified(global.tol)) {
        fail("dual_certified", format!("facet {j} has gap {:e}", cert.duals[j].gap()))
    } else {
        None
    };
    Ok(Outcome::checked(cor_certificate_to_json(&cert), failure))
}

#[derive(Args, Debug)]
pub struct CpExtendArgs {
    #[arg(long)]
    pub n: usize,
}

fn cp_extend(a: &CpExtendArgs) -> Res {
    let p = correlation_polytope(a.n)?;
    let lift = cp_extension_constraints(a.n);
    let mut failure = None;
    for mask in 0..p.num_vertices() {
        let y = vertex_lift(&bits_of(mask, a.n)).value;
        let bad = lift.failing(&y);
        if !bad.is_empty() {
            failure = fail("vertex_lift_feasible", format!("Y(a) for mask {mask} violates {}", bad.join(", ")));
            break;
        }
        if lift.project(&y) != p.vertex_rational(mask) {
            failure = fail("projection_is_vertex", format!("Y(a) for mask {mask} projects elsewhere"));
            break;
        }
    }
    Ok(Outcome::checked(
        json!({ "lift": conic_lift_to_json(&lift), "polytope": polytope_to_json(&p) }),
        failure,
    ))
}

#[derive(Args, Debug)]
pub struct CompileArgs {
    /// Netlist file.
    pub file: PathBuf,
    /// Audit every hyperplane and compare projected and circuit vertex sets.
    #[arg(long)]
    pub verify: bool,
    /// Also emit and check the completely positive lift.
    #[arg(long)]
    pub cp_extend: bool,
}

fn compile_circuit(a: &CompileArgs) -> Res {
    let text = std::fs::read_to_string(&a.file).map_err(Error::from)?;
    let circuit = parse_netlist(&text)?;
    let nor = lower_to_nor(&circuit)?;
    let face = compile(&nor)?;
    let mut doc = json!({
        "nor_netlist": nor.to_netlist(),
        "face": compiled_face_to_json(&face),
    });
    let mut failure = None;
    if a.verify {
        let audit = face.validity_audit()?;
        let circuit_set = nor.vertex_set()?;
        let projected = face.project()?.vertices;
        if !audit.passed() {
            failure = fail("hyperplanes_valid", "an equation is violated or not tight exactly on its gate relation");
        } else if projected != circuit_set {
            failure = fail("projection_equals_vertex_set", "projected face differs from the circuit's vertex set");
        }
        doc["audit"] = audit_to_json(&audit);
        doc["vertex_set"] = json!(circuit_set);
        doc["projected_vertex_set"] = json!(projected);
    }
    if a.cp_extend {
        let lift = cp_extension_of_definable(&nor)?;
        if failure.is_none() && !lift.verified() {
            failure = fail("lift_feasible_exactly_on_face", "feasible vertex lifts differ from the face vertices");
        }
        doc["cp_extension"] = definable_lift_to_json(&lift);
        doc["cp_extension"]["feasible_vertices"] =
            json!(lift.feasible.iter().map(|&m| bits_of(m, face.n)).collect::<Vec<_>>());
    }
    Ok(Outcome::checked(doc, failure))
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// A `factorize-cor` certificate, or a factorization JSON with a target
    /// `"matrix"`.
    pub file: PathBuf,
    /// Target matrix JSON, overriding `"matrix"` in the file.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
}

fn verify(global: &Global, a: &VerifyArgs) -> Res {
    let doc = read_json(&a.file)?;
    if doc.get("y_factors").is_some() {
        return verify_cor_certificate(global, &doc);
    }
    let target = match &a.matrix {
        Some(path) => read_json(path)?,
        None => doc
            .get("matrix")
            .cloned()
            .ok_or_else(|| CliError::Usage("no target matrix: pass --matrix or include \"matrix\"".into()))?,
    };
    if global.exact {
        verify_generic::<Rational>(global, &doc, &target)
    } else {
        verify_generic::<f64>(global, &doc, &target)
    }
}

fn verify_generic<T: JsonScalar>(global: &Global, doc: &Value, target: &Value) -> Res {
    let f: ConeFactorization<T> = factorization_from_json(doc)?;
    let target: Matrix<T> = matrix_from_json(target)?;
    let tol = if T::EXACT { 0.0 } else { global.tol };
    let mut failure = f.validate(global.tol).err().and_then(|e| fail("factors_in_cone", e.to_string()));
    let got = f.matrix();
    let err = if got.shape() == target.shape() { max_diff(&got, &target) } else { f64::INFINITY };
    if failure.is_none() && err > tol {
        failure = fail("factorization_reproduces_matrix", format!("max deviation {err:e}"));
    }
    Ok(Outcome::checked(json!({ "cone": f.cone, "max_abs_error": err }), failure))
}

/// Rebuilds every `Y(a)` from its rank-one factors and every `M` from its
/// entries, then checks membership exactly and compares with the slack
/// matrix.
fn verify_cor_certificate(global: &Global, doc: &Value) -> Res {
    let bad = |what: &str| CliError::Core(Error::InvalidInput(format!("certificate is missing {what}")));
    let cone = conekit_core::json::cone_from_json(doc.get("cone").ok_or_else(|| bad("cone"))?)?;
    let slack = SlackMatrix {
        s: matrix_from_json(doc.get("slack").ok_or_else(|| bad("slack"))?)?,
    };
    let side = cone.ambient;
    let mut rows = Vec::new();
    for y in doc["y_factors"].as_array().ok_or_else(|| bad("y_factors"))? {
        let cert = certificate_from_json::<Rational>(y.get("certificate").ok_or_else(|| bad("certificate"))?)?;
        rows.push(ConeElement::certified(cert.matrix(side), cert));
    }
    let mut cols = Vec::new();
    for f in doc["facets"].as_array().ok_or_else(|| bad("facets"))? {
        cols.push(ConeElement::plain(matrix_from_json::<Rational>(f.get("M").ok_or_else(|| bad("M"))?)?));
    }
    let report = verify_cone_factorization(&slack, &rows, &cols, &cone, 0.0)?;
    let failure = if !report.membership_ok || report.unknown > 0 {
        fail("factors_in_cone", report.failures.join("; "))
    } else if report.max_abs_err > global.tol {
        fail("factorization_reproduces_slack", format!("max deviation {:e}", report.max_abs_err))
    } else {
        None
    };
    Ok(Outcome::checked(
        json!({
            "cone": cone,
            "rows": rows.len(),
            "columns": cols.len(),
            "max_abs_error": report.max_abs_err,
        }),
        failure,
    ))
}
