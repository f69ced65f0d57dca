//! JSON wire formats shared by the CLI and external tools.
//!
//! Matrices are `{"rows", "cols", "data"}` in row-major order. Entries are
//! JSON numbers or strings such as `"3/4"`, `"-2"` or `"0.125"`; exact
//! values are always written as strings.

use num_traits::{Signed, Zero};
use serde_json::{json, Map, Value};

use crate::circuits::{CompiledFace, DefinableLift, ValidityAudit};
use crate::cones::{parse_rational, ConeOracle, CpCertificate, Matrix, RatMatrix, Rational, Scalar};
use crate::cpext::{ConicLift, CpFactorizationCert};
use crate::error::{Error, Result};
use crate::gpt::{GptSystem, Measurement};
use crate::polytopes::{ConeElement, HRep, SlackMatrix, ZeroOnePolytope};
use crate::protocol::ConeFactorization;

/// Scalars with a JSON encoding.
pub trait JsonScalar: Scalar {
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;
}

fn bad(what: &str, v: &Value) -> Error {
    Error::InvalidInput(format!("expected {what}, got {v}"))
}

impl JsonScalar for f64 {
    fn to_json(&self) -> Value {
        json!(self)
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Number(n) => n.as_f64().ok_or_else(|| bad("a finite number", v)),
            Value::String(s) => s
                .trim()
                .parse::<f64>()
                .or_else(|_| parse_rational(s).map(|r| r.to_f64()))
                .map_err(|_| bad("a number", v)),
            _ => Err(bad("a number", v)),
        }
    }
}

impl JsonScalar for Rational {
    fn to_json(&self) -> Value {
        Value::String(self.to_string())
    }

    /// Decimal JSON numbers are read exactly from their literal text.
    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Number(n) => parse_rational(&n.to_string()),
            Value::String(s) => parse_rational(s),
            _ => Err(bad("a rational", v)),
        }
    }
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key)
        .ok_or_else(|| Error::InvalidInput(format!("missing field {key:?}")))
}

fn usize_field(v: &Value, key: &str) -> Result<usize> {
    let f = field(v, key)?;
    f.as_u64()
        .and_then(|x| usize::try_from(x).ok())
        .ok_or_else(|| bad("a nonnegative integer", f))
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| bad(what, v))
}

pub fn vector_to_json<T: JsonScalar>(v: &[T]) -> Value {
    Value::Array(v.iter().map(JsonScalar::to_json).collect())
}

pub fn vector_from_json<T: JsonScalar>(v: &Value) -> Result<Vec<T>> {
    array(v, "an array of numbers")?.iter().map(T::from_json).collect()
}

pub fn matrix_to_json<T: JsonScalar>(m: &Matrix<T>) -> Value {
    json!({
        "rows": m.rows(),
        "cols": m.cols(),
        "data": vector_to_json(m.as_slice()),
    })
}

pub fn matrix_from_json<T: JsonScalar>(v: &Value) -> Result<Matrix<T>> {
    let rows = usize_field(v, "rows")?;
    let cols = usize_field(v, "cols")?;
    let data = vector_from_json(field(v, "data")?)?;
    Matrix::from_vec(rows, cols, data)
}

pub fn cone_to_json(c: &ConeOracle) -> Value {
    serde_json::to_value(c).expect("plain struct")
}

pub fn cone_from_json(v: &Value) -> Result<ConeOracle> {
    let c: ConeOracle = serde_json::from_value(v.clone())?;
    ConeOracle::new(c.kind, c.ambient)
}

pub fn polytope_to_json(p: &ZeroOnePolytope) -> Value {
    serde_json::to_value(p).expect("plain struct")
}

pub fn polytope_from_json(v: &Value) -> Result<ZeroOnePolytope> {
    let p: ZeroOnePolytope = serde_json::from_value(v.clone())?;
    ZeroOnePolytope::new(p.dim, p.vertices)
}

/// `{"A", "b", "equalities": {"A", "b"}}` for `A x >= b`, `E x = f`.
pub fn hrep_to_json(h: &HRep) -> Value {
    json!({
        "A": matrix_to_json(&h.a),
        "b": vector_to_json(&h.b),
        "equalities": {
            "A": matrix_to_json(&h.eq_a),
            "b": vector_to_json(&h.eq_b),
        },
    })
}

pub fn hrep_from_json(v: &Value) -> Result<HRep> {
    let a: RatMatrix = matrix_from_json(field(v, "A")?)?;
    let b = vector_from_json(field(v, "b")?)?;
    let (eq_a, eq_b) = match v.get("equalities") {
        Some(e) => (matrix_from_json(field(e, "A")?)?, vector_from_json(field(e, "b")?)?),
        None => (Matrix::zeros(0, a.cols()), Vec::new()),
    };
    if b.len() != a.rows() || eq_b.len() != eq_a.rows() || eq_a.cols() != a.cols() {
        return Err(Error::InconsistentHRep("row counts or dimensions disagree".into()));
    }
    Ok(HRep { a, b, eq_a, eq_b })
}

pub fn slack_to_json(s: &SlackMatrix) -> Value {
    matrix_to_json(&s.s)
}

/// `{"system": cone, "unit": matrix, "effects": [matrix]}`.
pub fn measurement_to_json<T: JsonScalar>(system: &GptSystem<T>, m: &Measurement<T>) -> Value {
    json!({
        "system": cone_to_json(&system.cone),
        "unit": matrix_to_json(&system.unit),
        "effects": m.effects.iter().map(matrix_to_json).collect::<Vec<_>>(),
    })
}

/// A missing `"unit"` selects the cone's default unit.
pub fn measurement_from_json<T: JsonScalar>(v: &Value) -> Result<(GptSystem<T>, Measurement<T>)> {
    let cone = cone_from_json(field(v, "system")?)?;
    let system = match v.get("unit") {
        Some(u) => GptSystem::new(cone, matrix_from_json(u)?)?,
        None => GptSystem::with_default_unit(cone)?,
    };
    let effects = array(field(v, "effects")?, "an array of effects")?
        .iter()
        .map(matrix_from_json)
        .collect::<Result<Vec<_>>>()?;
    Ok((system, Measurement::new(effects)))
}

pub fn certificate_to_json<T: JsonScalar>(c: &CpCertificate<T>) -> Value {
    json!({
        "factors": c.factors.iter().map(|z| vector_to_json(z)).collect::<Vec<_>>(),
        "weights": vector_to_json(&c.weights),
    })
}

pub fn certificate_from_json<T: JsonScalar>(v: &Value) -> Result<CpCertificate<T>> {
    let factors = array(field(v, "factors")?, "an array of factors")?
        .iter()
        .map(vector_from_json)
        .collect::<Result<Vec<Vec<T>>>>()?;
    let weights = match v.get("weights") {
        Some(w) => vector_from_json(w)?,
        None => vec![T::one(); factors.len()],
    };
    if weights.len() != factors.len() {
        return Err(Error::InvalidInput("certificate weights and factors differ in length".into()));
    }
    Ok(CpCertificate { factors, weights })
}

fn certificates_json<T: JsonScalar>(elems: &[ConeElement<T>]) -> Value {
    Value::Array(
        elems
            .iter()
            .map(|e| e.certificate.as_ref().map_or(Value::Null, certificate_to_json))
            .collect(),
    )
}

/// `{"cone", "states", "responses", "cp_certificates"}`; certificates are
/// aligned with the states and `null` where absent.
pub fn factorization_to_json<T: JsonScalar>(f: &ConeFactorization<T>) -> Value {
    json!({
        "cone": cone_to_json(&f.cone),
        "states": f.states.iter().map(|e| matrix_to_json(&e.value)).collect::<Vec<_>>(),
        "responses": f.responses.iter().map(|e| matrix_to_json(&e.value)).collect::<Vec<_>>(),
        "cp_certificates": certificates_json(&f.states),
    })
}

pub fn factorization_from_json<T: JsonScalar>(v: &Value) -> Result<ConeFactorization<T>> {
    let cone = cone_from_json(field(v, "cone")?)?;
    let elems = |key: &str| -> Result<Vec<Matrix<T>>> {
        let list = array(field(v, key)?, "an array of matrices")?;
        list.iter()
            .map(|m| {
                let m = matrix_from_json(m)?;
                cone.check_shape(&m)?;
                Ok(m)
            })
            .collect()
    };
    let states = elems("states")?;
    let responses = elems("responses")?;
    let certs: Vec<Option<CpCertificate<T>>> = match v.get("cp_certificates") {
        None | Some(Value::Null) => vec![None; states.len()],
        Some(c) => {
            let list = array(c, "an array of certificates")?;
            if list.len() != states.len() {
                return Err(Error::InvalidInput("cp_certificates must align with states".into()));
            }
            list.iter()
                .map(|c| if c.is_null() { Ok(None) } else { certificate_from_json(c).map(Some) })
                .collect::<Result<_>>()?
        }
    };
    Ok(ConeFactorization {
        cone,
        states: states
            .into_iter()
            .zip(certs)
            .map(|(value, certificate)| ConeElement { value, certificate })
            .collect(),
        responses: responses.into_iter().map(ConeElement::plain).collect(),
    })
}

/// Completely positive factorization of the COR(n) slack matrix: the
/// rank-one factors of each `Y(a)`, the copositive `M` of each facet with
/// its exact simplex minimum, and the largest entrywise error.
pub fn cor_certificate_to_json(cert: &CpFactorizationCert) -> Value {
    let mut max_err = Rational::zero();
    for (i, y) in cert.lifts.iter().enumerate() {
        for (j, d) in cert.duals.iter().enumerate() {
            let err = (y.value.inner(&d.matrix) - &cert.slack.s[(i, j)]).abs();
            if err > max_err {
                max_err = err;
            }
        }
    }
    let y_factors: Vec<Value> = cert
        .lifts
        .iter()
        .zip(&cert.polytope.vertices)
        .map(|(y, a)| {
            json!({
                "vertex": a,
                "certificate": y.certificate.as_ref().map_or(Value::Null, certificate_to_json),
            })
        })
        .collect();
    let facets: Vec<Value> = cert
        .facets
        .iter()
        .zip(&cert.duals)
        .map(|(f, d)| {
            json!({
                "Q": matrix_to_json(&f.q),
                "kappa": f.kappa.to_json(),
                "M": matrix_to_json(&d.matrix),
                "alpha": d.solution.alpha.to_json(),
                "beta": vector_to_json(&d.solution.beta),
                "gamma": vector_to_json(&d.solution.gamma),
                "delta": vector_to_json(&d.solution.delta),
                "objective": d.objective.to_json(),
                "gap": d.margin.to_json(),
                "penalty": d.penalty.to_json(),
                "simplex_min": d.simplex_min,
            })
        })
        .collect();
    json!({
        "n": cert.n,
        "cone": cone_to_json(&cert.cp_cone()),
        "polytope": polytope_to_json(&cert.polytope),
        "slack": slack_to_json(&cert.slack),
        "y_factors": y_factors,
        "facets": facets,
        "max_gap": cert.max_gap(),
        "min_simplex_value": cert.min_simplex_value(),
        "max_abs_error": max_err.to_json(),
        "max_abs_error_f64": max_err.to_f64(),
        "membership_ok": cert.report.membership_ok,
        "failures": cert.report.failures,
    })
}

pub fn compiled_face_to_json(face: &CompiledFace) -> Value {
    let equations: Vec<Value> = face
        .equations
        .iter()
        .map(|e| {
            let terms: Vec<Value> = e.terms.iter().map(|&((i, j), c)| json!([i + 1, j + 1, c])).collect();
            json!({
                "kind": e.kind,
                "gate": e.gate,
                "terms": terms,
                "rhs": e.rhs,
                "text": e.render(),
            })
        })
        .collect();
    let wires: Map<String, Value> = face
        .wire_index
        .iter()
        .map(|(name, i)| (name.clone(), json!(i + 1)))
        .collect();
    json!({
        "d": face.d,
        "n": face.n,
        "wires": wires,
        "output_index": face.output_index + 1,
        "equations": equations,
    })
}

pub fn audit_to_json(audit: &ValidityAudit) -> Value {
    let rows: Vec<Value> = audit
        .rows
        .iter()
        .map(|r| {
            json!({
                "kind": r.kind,
                "gate": r.gate,
                "max": r.max,
                "valid": r.valid,
                "tight_mismatch": r.tight_mismatch,
            })
        })
        .collect();
    json!({ "passed": audit.passed(), "rows": rows })
}

/// Constraint matrices are emitted sparsely as `[row, col, value]` triples
/// with 0-based indices.
pub fn conic_lift_to_json(l: &ConicLift) -> Value {
    let constraints: Vec<Value> = l
        .constraints
        .iter()
        .map(|c| {
            let mut entries = Vec::new();
            for r in 0..c.matrix.rows() {
                for col in 0..c.matrix.cols() {
                    let v = &c.matrix[(r, col)];
                    if !v.is_zero() {
                        entries.push(json!([r, col, v.to_json()]));
                    }
                }
            }
            json!({ "name": c.name, "entries": entries, "rhs": c.rhs.to_json() })
        })
        .collect();
    let projection: Vec<Value> = l
        .projection
        .iter()
        .map(|&((i, j), (r, c))| json!({ "z": [i + 1, j + 1], "Y": [r, c] }))
        .collect();
    json!({
        "n": l.n,
        "cone": cone_to_json(&l.cone),
        "proper": l.proper,
        "constraints": constraints,
        "projection": projection,
    })
}

pub fn definable_lift_to_json(l: &DefinableLift) -> Value {
    json!({
        "lift": conic_lift_to_json(&l.lift),
        "face": compiled_face_to_json(&l.face),
        "polytope": polytope_to_json(&l.polytope),
        "feasible_vertex_masks": l.feasible,
        "face_vertex_masks": l.face_masks,
        "projected": l.projected,
        "verified": l.verified(),
    })
}
