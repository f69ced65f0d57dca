//! Cone oracles for the nonnegative orthant, the PSD cone, the copositive
//! cone and the completely positive cone, together with the exact linear
//! algebra and LP machinery they rest on.
//!
//! Orthant elements are `n x 1` columns; matrix-cone elements are `d x d`
//! symmetric matrices. The pairing `⟨x, y⟩` is [`Matrix::inner`].

pub mod linalg;
pub mod lp;
pub mod scalar;
pub mod simplex_min;

use serde::{Deserialize, Serialize};

pub use linalg::{sym_eig, Matrix, RatMatrix, SymEig};
pub use lp::{lp_solve, BasicOptimum, Bound, BoxedLp, LpOutcome, Sense};
pub use scalar::{int, parse_rational, rat, Rational, Scalar};
pub use simplex_min::{simplex_min_quadratic, SimplexMin, MAX_SIMPLEX_SIDE};

use crate::error::{shape_err, Error, Result};

/// Strict interiority threshold for units.
pub const INTERIOR_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeKind {
    Orthant,
    Psd,
    Copositive,
    CompletelyPositive,
}

impl ConeKind {
    pub fn name(self) -> &'static str {
        match self {
            ConeKind::Orthant => "orthant",
            ConeKind::Psd => "psd",
            ConeKind::Copositive => "copositive",
            ConeKind::CompletelyPositive => "completely_positive",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "orthant" => Ok(ConeKind::Orthant),
            "psd" => Ok(ConeKind::Psd),
            "copositive" => Ok(ConeKind::Copositive),
            "completely_positive" | "cp" => Ok(ConeKind::CompletelyPositive),
            other => Err(Error::InvalidInput(format!("unknown cone kind {other:?}"))),
        }
    }
}

/// One of the four supported cone families. `ambient` is the vector length
/// for the orthant and the matrix side `d` for the matrix cones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConeOracle {
    pub kind: ConeKind,
    pub ambient: usize,
}

impl ConeOracle {
    pub fn new(kind: ConeKind, ambient: usize) -> Result<Self> {
        if ambient == 0 {
            return Err(Error::InvalidInput("cone ambient dimension must be positive".into()));
        }
        Ok(ConeOracle { kind, ambient })
    }

    pub fn orthant(n: usize) -> Self {
        ConeOracle { kind: ConeKind::Orthant, ambient: n }
    }

    pub fn psd(d: usize) -> Self {
        ConeOracle { kind: ConeKind::Psd, ambient: d }
    }

    pub fn copositive(d: usize) -> Self {
        ConeOracle { kind: ConeKind::Copositive, ambient: d }
    }

    pub fn completely_positive(d: usize) -> Self {
        ConeOracle {
            kind: ConeKind::CompletelyPositive,
            ambient: d,
        }
    }

    pub fn dual(&self) -> Self {
        let kind = match self.kind {
            ConeKind::Orthant => ConeKind::Orthant,
            ConeKind::Psd => ConeKind::Psd,
            ConeKind::Copositive => ConeKind::CompletelyPositive,
            ConeKind::CompletelyPositive => ConeKind::Copositive,
        };
        ConeOracle { kind, ambient: self.ambient }
    }

    /// Linear dimension `n` of the ambient space: `ambient` for the orthant
    /// and `d(d+1)/2` for symmetric `d x d` matrices.
    pub fn gpt_dim(&self) -> usize {
        match self.kind {
            ConeKind::Orthant => self.ambient,
            _ => self.ambient * (self.ambient + 1) / 2,
        }
    }

    pub fn is_matrix_cone(&self) -> bool {
        self.kind != ConeKind::Orthant
    }

    pub fn element_shape(&self) -> (usize, usize) {
        match self.kind {
            ConeKind::Orthant => (self.ambient, 1),
            _ => (self.ambient, self.ambient),
        }
    }

    pub fn check_shape<T>(&self, x: &Matrix<T>) -> Result<()> {
        let want = self.element_shape();
        if x.shape() != want {
            return Err(shape_err(
                format!("{}x{} element of {}", want.0, want.1, self.kind.name()),
                format!("{}x{}", x.rows(), x.cols()),
            ));
        }
        Ok(())
    }

    /// Default unit: all-ones for the orthant, the identity for matrix cones.
    pub fn default_unit<T: Scalar>(&self) -> Matrix<T> {
        match self.kind {
            ConeKind::Orthant => Matrix::ones(self.ambient, 1),
            _ => Matrix::identity(self.ambient),
        }
    }

    /// The all-ones matrix `J`, the alternative unit for matrix cones.
    pub fn all_ones_unit<T: Scalar>(&self) -> Matrix<T> {
        let (r, c) = self.element_shape();
        Matrix::ones(r, c)
    }

    /// Zero element with the right shape.
    pub fn zero<T: Scalar>(&self) -> Matrix<T> {
        let (r, c) = self.element_shape();
        Matrix::zeros(r, c)
    }
}

/// `X = Σ_k w_k z_k z_kᵀ` with every `z_k >= 0` and `w_k >= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct CpCertificate<T> {
    pub factors: Vec<Vec<T>>,
    pub weights: Vec<T>,
}

impl<T: Scalar> CpCertificate<T> {
    pub fn new(factors: Vec<Vec<T>>) -> Self {
        let weights = vec![T::one(); factors.len()];
        CpCertificate { factors, weights }
    }

    pub fn single(z: Vec<T>) -> Self {
        CpCertificate::new(vec![z])
    }

    pub fn scaled(&self, s: &T) -> Self {
        CpCertificate {
            factors: self.factors.clone(),
            weights: self.weights.iter().map(|w| w.clone() * s).collect(),
        }
    }

    pub fn side(&self) -> Option<usize> {
        self.factors.first().map(Vec::len)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.factors.iter().flatten().all(|v| *v >= T::zero())
            && self.weights.iter().all(|w| *w >= T::zero())
    }

    pub fn matrix(&self, side: usize) -> Matrix<T> {
        let mut out = Matrix::zeros(side, side);
        for (z, w) in self.factors.iter().zip(&self.weights) {
            out.add_scaled(w, &Matrix::outer(z));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Evidence {
    SignTest,
    MinEigenvalue(f64),
    SimplexMin(f64),
    CpFactors { reconstruction_error: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Witness<T> {
    /// Entry `(row, col)` is negative.
    NegativeEntry { row: usize, col: usize },
    /// `vᵀXv < 0`.
    Eigenvector { value: f64, vector: Vec<f64> },
    /// `zᵀXz < 0` for a point `z` of the standard simplex.
    SimplexPoint { value: f64, z: Vec<T> },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Membership<T> {
    Member(Evidence),
    NotMember(Witness<T>),
    Unknown,
}

impl<T> Membership<T> {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member(_))
    }

    pub fn is_not_member(&self) -> bool {
        matches!(self, Membership::NotMember(_))
    }
}

/// Membership of `x` in `cone` at tolerance `tol`.
///
/// Completely positive membership is only ever decided positively through a
/// certificate; without one (or with one that does not reproduce `x`) the
/// answer is [`Membership::Unknown`] unless a necessary condition (entrywise
/// nonnegativity, PSD) fails.
pub fn contains<T: Scalar>(
    cone: &ConeOracle,
    x: &Matrix<T>,
    tol: f64,
    certificate: Option<&CpCertificate<T>>,
) -> Result<Membership<T>> {
    cone.check_shape(x)?;
    let neg_tol = T::from_f64(-tol);
    match cone.kind {
        ConeKind::Orthant => {
            for r in 0..x.rows() {
                if x[(r, 0)] < neg_tol {
                    return Ok(Membership::NotMember(Witness::NegativeEntry { row: r, col: 0 }));
                }
            }
            Ok(Membership::Member(Evidence::SignTest))
        }
        ConeKind::Psd => psd_membership(x, tol),
        ConeKind::Copositive => {
            if !x.is_symmetric() {
                return Err(Error::NotSymmetric(x.asymmetry()));
            }
            let res = simplex_min_quadratic(x)?;
            let value = res.value.to_f64();
            if res.value >= neg_tol {
                Ok(Membership::Member(Evidence::SimplexMin(value)))
            } else {
                Ok(Membership::NotMember(Witness::SimplexPoint { value, z: res.argmin }))
            }
        }
        ConeKind::CompletelyPositive => {
            for r in 0..x.rows() {
                for c in 0..x.cols() {
                    if x[(r, c)] < neg_tol {
                        return Ok(Membership::NotMember(Witness::NegativeEntry { row: r, col: c }));
                    }
                }
            }
            if let Some(cert) = certificate.filter(|c| c.side().is_none_or(|s| s == cone.ambient) && c.is_nonnegative()) {
                let err = cert.matrix(cone.ambient).sub(x).max_abs();
                if err <= tol {
                    return Ok(Membership::Member(Evidence::CpFactors {
                        reconstruction_error: err,
                    }));
                }
            }
            if let Membership::NotMember(w) = psd_membership(x, tol)? {
                return Ok(Membership::NotMember(w));
            }
            Ok(Membership::Unknown)
        }
    }
}

/// Symmetric elimination without pivoting on zeros: a zero pivot needs a
/// zero row, a negative pivot refutes.
fn exact_psd<T: Scalar>(x: &Matrix<T>) -> bool {
    let n = x.rows();
    let mut a = x.clone();
    for k in 0..n {
        let p = a[(k, k)].clone();
        if p < T::zero() {
            return false;
        }
        if p.is_zero() {
            if (k + 1..n).any(|j| !a[(k, j)].is_zero()) {
                return false;
            }
            continue;
        }
        for i in k + 1..n {
            let f = a[(i, k)].clone() / &p;
            if f.is_zero() {
                continue;
            }
            for j in k + 1..n {
                let v = f.clone() * &a[(k, j)];
                a[(i, j)] -= v;
            }
        }
    }
    true
}

fn psd_membership<T: Scalar>(x: &Matrix<T>, tol: f64) -> Result<Membership<T>> {
    let xf = x.to_f64();
    if xf.asymmetry() > 1e-12 * (1.0 + xf.max_abs()) || (T::EXACT && !x.is_symmetric()) {
        return Err(Error::NotSymmetric(xf.asymmetry()));
    }
    let eig = sym_eig(&xf.symmetrized())?;
    let min = eig.min();
    if T::EXACT {
        return Ok(if exact_psd(x) {
            Membership::Member(Evidence::MinEigenvalue(min.max(0.0)))
        } else {
            Membership::NotMember(Witness::Eigenvector {
                value: min.min(0.0),
                vector: eig.vector(0),
            })
        });
    }
    if min >= -tol {
        Ok(Membership::Member(Evidence::MinEigenvalue(min)))
    } else {
        Ok(Membership::NotMember(Witness::Eigenvector {
            value: min,
            vector: eig.vector(0),
        }))
    }
}

/// Whether `u` lies strictly inside `cone` (entries, smallest eigenvalue or
/// simplex minimum above [`INTERIOR_EPS`]).
pub fn is_interior<T: Scalar>(cone: &ConeOracle, u: &Matrix<T>) -> Result<bool> {
    cone.check_shape(u)?;
    Ok(match cone.kind {
        ConeKind::Orthant => (0..u.rows()).all(|r| u[(r, 0)].to_f64() > INTERIOR_EPS),
        ConeKind::Psd => sym_eig(&u.to_f64().symmetrized())?.min() > INTERIOR_EPS,
        ConeKind::Copositive => simplex_min_quadratic(&u.to_f64())?.value > INTERIOR_EPS,
        ConeKind::CompletelyPositive => {
            return Err(Error::Unsupported(
                "interiority of the completely positive cone cannot be certified".into(),
            ))
        }
    })
}

/// Whether `x` spans an extreme ray: one nonzero coordinate (orthant) or
/// rank one (PSD).
pub fn is_extremal<T: Scalar>(cone: &ConeOracle, x: &Matrix<T>, tol: f64) -> Result<bool> {
    cone.check_shape(x)?;
    match cone.kind {
        ConeKind::Orthant => Ok((0..x.rows()).filter(|&r| x[(r, 0)].to_f64().abs() > tol).count() <= 1),
        ConeKind::Psd if T::EXACT => Ok(x.is_symmetric() && linalg::rank(x) <= 1),
        ConeKind::Psd => {
            let eig = sym_eig(&x.to_f64().symmetrized())?;
            let top = eig.values.last().copied().unwrap_or(0.0).abs();
            let rest = eig.values[..eig.values.len().saturating_sub(1)]
                .iter()
                .map(|v| v.abs())
                .fold(0.0, f64::max);
            Ok(rest <= tol * (1.0 + top))
        }
        _ => Err(Error::Unsupported(
            "extremal rays not characterized for this cone".into(),
        )),
    }
}

/// Nonnegative weights `λ`, at most `gpt_dim` of them nonzero, with
/// `Σ λ_i e_i = u`. Exact scalars get a basic feasible point of the LP;
/// floats assume `Σ e_i = u` and reduce the all-ones weighting.
pub fn caratheodory_unit<T: Scalar>(effects: &[Matrix<T>], unit: &Matrix<T>) -> Result<Vec<T>> {
    if effects.is_empty() {
        return Err(Error::InvalidInput("empty effect list".into()));
    }
    for e in effects {
        if e.shape() != unit.shape() {
            return Err(shape_err(
                format!("{}x{}", unit.rows(), unit.cols()),
                format!("{}x{}", e.rows(), e.cols()),
            ));
        }
    }
    let columns: Vec<Vec<T>> = effects.iter().map(Matrix::upper_triangle).collect();
    let rhs = unit.upper_triangle();
    let a = Matrix::from_fn(rhs.len(), effects.len(), |r, c| columns[c][r].clone());
    if !T::EXACT {
        return Ok(reduce_support(&a.to_f64()).into_iter().map(T::from_f64).collect());
    }
    let bounds = vec![Bound::nonneg(); effects.len()];
    let zero = vec![T::zero(); effects.len()];
    match lp_solve(&a, &rhs, &bounds, &zero, Sense::Minimize)? {
        LpOutcome::Optimal(opt) => Ok(opt.point),
        _ => Err(Error::Invariant(
            "unit is not a nonnegative combination of the effects".into(),
        )),
    }
}

/// Float Carathéodory reduction starting from `λ = 1`: while the columns in
/// the support are linearly dependent, step along a kernel vector until one
/// weight vanishes.
fn reduce_support(a: &Matrix<f64>) -> Vec<f64> {
    let rows = a.rows();
    let mut lambda = vec![1.0; a.cols()];
    let scale = 1.0 + a.max_abs();
    loop {
        let support: Vec<usize> = (0..lambda.len()).filter(|&i| lambda[i] > 0.0).collect();
        let k = support.len();
        let gram = Matrix::from_fn(k, k, |i, j| {
            (0..rows).map(|r| a[(r, support[i])] * a[(r, support[j])]).sum::<f64>()
        });
        let Ok(eig) = sym_eig(&gram.symmetrized()) else {
            return lambda;
        };
        if k <= rows && eig.min() > 1e-20 * scale * scale {
            return lambda;
        }
        let mut v = eig.vector(0);
        if !v.iter().any(|&x| x > 1e-14) {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut best: Option<(usize, f64)> = None;
        for (pos, &vi) in v.iter().enumerate() {
            if vi > 1e-12 * vmax {
                let t = lambda[support[pos]] / vi;
                if best.is_none_or(|(_, bt)| t < bt) {
                    best = Some((pos, t));
                }
            }
        }
        let Some((hit, t)) = best else {
            return lambda;
        };
        for (pos, &i) in support.iter().enumerate() {
            lambda[i] = (lambda[i] - t * v[pos]).max(0.0);
        }
        lambda[support[hit]] = 0.0;
    }
}

/// Splits `e` into extreme-ray components of `cone` summing to `e`:
/// coordinate axes for the orthant; for the PSD cone, rank-one spectral
/// terms in floating point and exact `LDLᵀ` terms for rationals.
pub fn extremal_refine<T: Scalar>(e: &Matrix<T>, cone: &ConeOracle) -> Result<Vec<Matrix<T>>> {
    cone.check_shape(e)?;
    match cone.kind {
        ConeKind::Orthant => Ok((0..e.rows())
            .filter(|&r| !e[(r, 0)].is_zero())
            .map(|r| {
                let mut part = Matrix::zeros(e.rows(), 1);
                part[(r, 0)] = e[(r, 0)].clone();
                part
            })
            .collect()),
        ConeKind::Psd if T::EXACT => ldl_parts(e),
        ConeKind::Psd => {
            let ef = e.to_f64();
            let eig = sym_eig(&ef.symmetrized())?;
            let scale = 1.0 + ef.max_abs();
            let mut parts = Vec::new();
            for (k, &lambda) in eig.values.iter().enumerate() {
                if lambda <= 1e-12 * scale {
                    continue;
                }
                let v = eig.vector(k);
                let part = Matrix::outer(&v).scale(&lambda);
                parts.push(Matrix::from_f64(&part));
            }
            Ok(parts)
        }
        _ => Err(Error::Unsupported(format!(
            "extremal rays not characterized for the {} cone",
            cone.kind.name()
        ))),
    }
}

/// `e = Σ_k c_k c_kᵀ / p_k` over the positive pivots `p_k` of symmetric
/// elimination, with `c_k` the pivot column.
fn ldl_parts<T: Scalar>(e: &Matrix<T>) -> Result<Vec<Matrix<T>>> {
    if !e.is_symmetric() {
        return Err(Error::NotSymmetric(e.to_f64().asymmetry()));
    }
    let n = e.rows();
    let mut rest = e.clone();
    let mut parts = Vec::new();
    for k in 0..n {
        let p = rest[(k, k)].clone();
        let column: Vec<T> = (0..n).map(|i| rest[(i, k)].clone()).collect();
        if p.is_zero() {
            if column.iter().any(|v| !v.is_zero()) {
                return Err(Error::InvalidInput("matrix is not positive semidefinite".into()));
            }
            continue;
        }
        if p < T::zero() {
            return Err(Error::InvalidInput("matrix is not positive semidefinite".into()));
        }
        let part = Matrix::outer(&column).scale(&(T::one() / p));
        rest = rest.sub(&part);
        parts.push(part);
    }
    Ok(parts)
}

/// Smallest `μ > 0` with `μ u - v` in `cone`.
///
/// The orthant value is the exact ratio `max_i v_i / u_i`; the PSD and
/// copositive cones use bisection to relative tolerance `1e-9`, returning the
/// feasible end of the bracket.
pub fn min_scale_dominating<T: Scalar>(v: &Matrix<T>, unit: &Matrix<T>, cone: &ConeOracle) -> Result<T> {
    cone.check_shape(v)?;
    if !is_interior(cone, unit)? {
        return Err(Error::NotInterior);
    }
    if cone.kind == ConeKind::Orthant {
        let mut mu = T::zero();
        for r in 0..v.rows() {
            let ratio = v[(r, 0)].clone() / unit[(r, 0)].clone();
            if ratio > mu {
                mu = ratio;
            }
        }
        return Ok(mu);
    }
    let vf = v.to_f64();
    let uf = unit.to_f64();
    let feasible = |mu: f64| -> Result<bool> {
        let diff = uf.scale(&mu).sub(&vf);
        Ok(contains(cone, &diff, 0.0, None)?.is_member())
    };
    if feasible(0.0)? {
        return Ok(T::zero());
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while !feasible(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Invariant("no dominating scale found".into()));
        }
    }
    while hi - lo > 1e-9 * hi {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(T::from_f64(hi))
}
