//! Completely positive extension of the correlation polytope: the lifted
//! binary quadratic program, its copositive dual, a cutting-plane dual
//! solver, and the resulting factorization of the COR(n) slack matrix over
//! (completely positive, copositive).
//!
//! Lifted indices: `0` is the homogenizing coordinate, `1..=n` the binary
//! variables `x`, `n+1..=2n` their complements `w = 1 - x`. Dual variables
//! are packed as `(α, β_1..β_n, γ_1..γ_n, δ_1..δ_n)`.

use num_bigint::BigInt;
use num_traits::Signed;
use rayon::prelude::*;

use crate::cones::{
    int, rat, simplex_min_quadratic, sym_eig, ConeOracle, CpCertificate, Matrix, RatMatrix, Rational, Scalar,
};
use crate::error::{shape_err, Error, Result};
use crate::polytopes::{
    bits_of, cor_coordinates, correlation_polytope, facet_enum, slack_matrix, verify_cone_factorization, ConeElement,
    FactorizationReport, HRep, SlackMatrix, ZeroOnePolytope,
};

/// Largest `n` accepted by [`solve_dual`] (lifted side `1 + 2n <= 9`).
pub const MAX_DUAL_N: usize = 4;
/// Largest `n` accepted by [`factorize_cor_slack`].
pub const MAX_FACTORIZE_N: usize = 3;
pub const MAX_KAPPA_N: usize = 20;
/// Default objective-gap tolerance of the dual solver.
pub const DEFAULT_GAP_TOL: f64 = 1e-6;
/// Default copositivity tolerance of factorization checks.
pub const DEFAULT_COPOSITIVE_TOL: f64 = 1e-8;


/// `Σ q_ij y_ij >= κ` with symmetric `Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct FacetInequality {
    pub q: RatMatrix,
    pub kappa: Rational,
}

impl FacetInequality {
    /// Converts an inequality `a·z >= b` over the COR(n) coordinates:
    /// `Q_ii = a_ii`, `Q_ij = Q_ji = a_ij / 2`, `κ = b`.
    pub fn from_cor_row(n: usize, a: &[Rational], b: &Rational) -> Result<Self> {
        let coords = cor_coordinates(n);
        if a.len() != coords.len() {
            return Err(shape_err(format!("{} coefficients", coords.len()), format!("{}", a.len())));
        }
        let mut q = Matrix::zeros(n, n);
        for (&(i, j), c) in coords.iter().zip(a) {
            if i == j {
                q[(i, i)] = c.clone();
            } else {
                let half = c / int(2);
                q[(i, j)] = half.clone();
                q[(j, i)] = half;
            }
        }
        Ok(FacetInequality { q, kappa: b.clone() })
    }

    pub fn n(&self) -> usize {
        self.q.rows()
    }

    /// `Q • aaᵀ - κ`.
    pub fn slack_at(&self, a: &[u8]) -> Rational {
        quad_at(&self.q, a) - &self.kappa
    }
}

fn quad_at(q: &RatMatrix, a: &[u8]) -> Rational {
    let mut total = int(0);
    for i in 0..a.len() {
        if a[i] == 0 {
            continue;
        }
        for j in 0..a.len() {
            if a[j] == 1 {
                total += &q[(i, j)];
            }
        }
    }
    total
}

/// COR(n), its facets, and their conversion to `(Q, κ)` form.
pub fn cor_facets(n: usize) -> Result<(ZeroOnePolytope, HRep, Vec<FacetInequality>)> {
    let p = correlation_polytope(n)?;
    let h = facet_enum(&p)?;
    let facets = (0..h.num_facets())
        .map(|j| FacetInequality::from_cor_row(n, h.a.row(j), &h.b[j]))
        .collect::<Result<Vec<_>>>()?;
    Ok((p, h, facets))
}

/// `A • Y = rhs` on the lifted matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearConstraint {
    pub name: String,
    pub matrix: RatMatrix,
    pub rhs: Rational,
}

impl LinearConstraint {
    pub fn holds(&self, y: &RatMatrix) -> bool {
        self.matrix.inner(y) == self.rhs
    }
}

/// Side of the lifted matrix.
pub fn lifted_side(n: usize) -> usize {
    1 + 2 * n
}

fn sym_set(m: &mut RatMatrix, i: usize, j: usize, v: Rational) {
    m[(i, j)] = v.clone();
    m[(j, i)] = v;
}

/// The `1 + 3n` constraints: normalization, `x_i + w_i = 1`,
/// `(x_i + w_i)² = 1`, and `x_j = x_j²`.
pub fn lift_constraints(n: usize) -> Vec<LinearConstraint> {
    let m = lifted_side(n);
    let mut out = Vec::with_capacity(1 + 3 * n);
    let mut one = Matrix::zeros(m, m);
    one[(0, 0)] = int(1);
    out.push(LinearConstraint {
        name: "one".into(),
        matrix: one,
        rhs: int(1),
    });
    for i in 1..=n {
        let mut a = Matrix::zeros(m, m);
        sym_set(&mut a, 0, i, int(1));
        sym_set(&mut a, 0, n + i, int(1));
        out.push(LinearConstraint {
            name: format!("two_{i}"),
            matrix: a,
            rhs: int(2),
        });
    }
    for i in 1..=n {
        let mut a = Matrix::zeros(m, m);
        for (r, c) in [(i, i), (i, n + i), (n + i, i), (n + i, n + i)] {
            a[(r, c)] = int(1);
        }
        out.push(LinearConstraint {
            name: format!("three_{i}"),
            matrix: a,
            rhs: int(1),
        });
    }
    for j in 1..=n {
        let mut a = Matrix::zeros(m, m);
        sym_set(&mut a, 0, j, int(1));
        a[(j, j)] = int(-2);
        out.push(LinearConstraint {
            name: format!("four_{j}"),
            matrix: a,
            rhs: int(0),
        });
    }
    out
}

/// `min blockdiag(0, Q, 0) • Y` subject to [`lift_constraints`] over the
/// completely positive cone.
#[derive(Clone, Debug, PartialEq)]
pub struct BurerPrimal {
    pub n: usize,
    pub side: usize,
    pub constraints: Vec<LinearConstraint>,
    pub objective: RatMatrix,
}

impl BurerPrimal {
    pub fn is_feasible(&self, y: &RatMatrix) -> bool {
        self.constraints.iter().all(|c| c.holds(y))
    }

    pub fn value(&self, y: &RatMatrix) -> Rational {
        self.objective.inner(y)
    }
}

fn embed_q(q: &RatMatrix) -> RatMatrix {
    let n = q.rows();
    let mut out = Matrix::zeros(lifted_side(n), lifted_side(n));
    for i in 0..n {
        for j in 0..n {
            out[(1 + i, 1 + j)] = q[(i, j)].clone();
        }
    }
    out
}

/// Builds the lifted program; a non-symmetric `Q` is replaced by `(Q + Qᵀ)/2`.
pub fn build_primal(q: &RatMatrix) -> Result<BurerPrimal> {
    if !q.is_square() {
        return Err(shape_err("square Q", format!("{}x{}", q.rows(), q.cols())));
    }
    let n = q.rows();
    Ok(BurerPrimal {
        n,
        side: lifted_side(n),
        constraints: lift_constraints(n),
        objective: embed_q(&q.symmetrized()),
    })
}

/// `(1; a; 1-a)`.
pub fn lift_vector(a: &[u8]) -> Vec<Rational> {
    let mut z = vec![int(1)];
    z.extend(a.iter().map(|&v| int(i64::from(v))));
    z.extend(a.iter().map(|&v| int(1 - i64::from(v))));
    z
}

/// `Y(a) = (1; a; 1-a)(1; a; 1-a)ᵀ` with its rank-one certificate.
pub fn vertex_lift(a: &[u8]) -> ConeElement<Rational> {
    let z = lift_vector(a);
    ConeElement::certified(Matrix::outer(&z), CpCertificate::single(z))
}

/// `κ = min_a aᵀQa` over `{0,1}^n` and the first minimizing `a` by mask.
pub fn kappa(q: &RatMatrix) -> Result<(Rational, Vec<u8>)> {
    let n = q.rows();
    if n > MAX_KAPPA_N {
        return Err(Error::TooLarge {
            what: "binary quadratic enumeration",
            limit: MAX_KAPPA_N,
            got: n,
        });
    }
    let q = q.symmetrized();
    let mut best = (int(0), vec![0u8; n]);
    for mask in 1..1usize << n {
        let a = bits_of(mask, n);
        let v = quad_at(&q, &a);
        if v < best.0 {
            best = (v, a);
        }
    }
    Ok(best)
}

/// Variables of the copositive dual.
#[derive(Clone, Debug, PartialEq)]
pub struct DualSolution {
    pub alpha: Rational,
    pub beta: Vec<Rational>,
    pub gamma: Vec<Rational>,
    pub delta: Vec<Rational>,
}

impl DualSolution {
    pub fn n(&self) -> usize {
        self.beta.len()
    }

    /// `α + 2Σβ + Σγ`.
    pub fn objective(&self) -> Rational {
        let two = int(2);
        let mut v = self.alpha.clone();
        for b in &self.beta {
            v += b * &two;
        }
        for g in &self.gamma {
            v += g;
        }
        v
    }

    pub fn to_vec(&self) -> Vec<Rational> {
        let mut v = vec![self.alpha.clone()];
        v.extend(self.beta.iter().cloned());
        v.extend(self.gamma.iter().cloned());
        v.extend(self.delta.iter().cloned());
        v
    }

    pub fn from_vec(n: usize, v: &[Rational]) -> Result<Self> {
        if v.len() != 1 + 3 * n {
            return Err(shape_err(format!("{} dual variables", 1 + 3 * n), format!("{}", v.len())));
        }
        Ok(DualSolution {
            alpha: v[0].clone(),
            beta: v[1..=n].to_vec(),
            gamma: v[n + 1..=2 * n].to_vec(),
            delta: v[2 * n + 1..].to_vec(),
        })
    }
}

/// `M(α,β,γ,δ) = blockdiag(0,Q,0) - αA₁ - Σβ_iA₂ᵢ - Σγ_iA₃ᵢ - Σδ_jA₄ⱼ`.
pub fn dual_matrix(q: &RatMatrix, s: &DualSolution) -> Result<RatMatrix> {
    let n = q.rows();
    if s.n() != n || s.gamma.len() != n || s.delta.len() != n {
        return Err(shape_err(format!("dual variables for n = {n}"), format!("n = {}", s.n())));
    }
    let mut m = embed_q(&q.symmetrized());
    m[(0, 0)] = -s.alpha.clone();
    for i in 1..=n {
        let (b, g, d) = (&s.beta[i - 1], &s.gamma[i - 1], &s.delta[i - 1]);
        sym_set(&mut m, 0, i, -(b + d));
        sym_set(&mut m, 0, n + i, -b.clone());
        m[(i, i)] = m[(i, i)].clone() - g + d * int(2);
        m[(n + i, n + i)] = -g.clone();
        sym_set(&mut m, i, n + i, -g.clone());
    }
    Ok(m)
}

/// `β = δ = 0`, `γ_i = α = min(0, 2λ_min(Q)) - 1`, with `λ_min` rounded
/// down to a multiple of `2^-20`.
pub fn interior_dual_point(q: &RatMatrix) -> Result<DualSolution> {
    let n = q.rows();
    let lmin = if n == 0 {
        0.0
    } else {
        sym_eig(&q.to_f64().symmetrized())?.min()
    };
    let grid = (1u64 << 20) as f64;
    let floored = Rational::new(((lmin * grid).floor() as i64).into(), (1i64 << 20).into());
    let two_l = floored * int(2);
    let alpha = if two_l < int(0) { two_l } else { int(0) } - int(1);
    Ok(DualSolution {
        alpha: alpha.clone(),
        beta: vec![int(0); n],
        gamma: vec![alpha; n],
        delta: vec![int(0); n],
    })
}

/// Closed intervals for the packed dual variables.
#[derive(Clone, Debug, PartialEq)]
pub struct DualBox {
    pub lower: Vec<Rational>,
    pub upper: Vec<Rational>,
}

impl DualBox {
    pub fn contains(&self, v: &[Rational]) -> bool {
        v.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(x, (lo, hi))| lo <= x && x <= hi)
    }

    /// Largest violation of the box by `v` (0 when inside).
    pub fn violation(&self, v: &[Rational]) -> f64 {
        v.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(x, (lo, hi))| {
                let below = (lo - x).to_f64().max(0.0);
                let above = (x - hi).to_f64().max(0.0);
                below.max(above)
            })
            .fold(0.0, f64::max)
    }
}

/// Box containing every copositive dual point of objective at least `b`:
/// `2B <= α <= 0`, `(2n-1)B <= 2β_i <= -(2n+3)B`, `(4n+2)B <= γ_i <= 0`,
/// `(4n+2)B - Q_ii <= 2δ_i <= Q_ii - (8n+2)B`.
pub fn dual_box(q: &RatMatrix, b: &Rational) -> Result<DualBox> {
    let n = q.rows();
    let (k, _) = kappa(q)?;
    if *b >= k {
        return Err(Error::InvalidInput(format!("box bound {b} must lie below the optimum {k}")));
    }
    let nn = n as i64;
    let half = rat(1, 2);
    let mut lower = vec![b * int(2)];
    let mut upper = vec![int(0)];
    for _ in 0..n {
        lower.push(b * int(2 * nn - 1) * &half);
        upper.push(-(b * int(2 * nn + 3)) * &half);
    }
    for _ in 0..n {
        lower.push(b * int(4 * nn + 2));
        upper.push(int(0));
    }
    for i in 0..n {
        let qii = q[(i, i)].clone();
        lower.push((b * int(4 * nn + 2) - &qii) * &half);
        upper.push((qii - b * int(8 * nn + 2)) * &half);
    }
    Ok(DualBox { lower, upper })
}

/// Zero-objective direction `α = -n`, `β_i = 1`, `γ_i = -1`, `δ = 0`.
/// Moving by `t` along it adds `t Σ_i (ξ - x_i - w_i)²` to the quadratic
/// form of `M`, so every superlevel set of the dual is unbounded.
pub fn penalty_direction(n: usize) -> Vec<Rational> {
    let mut d = vec![int(-(n as i64))];
    d.extend(std::iter::repeat_n(int(1), n));
    d.extend(std::iter::repeat_n(int(-1), n));
    d.extend(std::iter::repeat_n(int(0), n));
    d
}

/// `Σ_i u_i u_iᵀ` with `u_i = e_0 - e_i - e_{n+i}`: the change of `M` per
/// unit step along [`penalty_direction`].
pub fn penalty_matrix(n: usize) -> RatMatrix {
    let side = lifted_side(n);
    let mut p = Matrix::zeros(side, side);
    for i in 1..=n {
        let mut u = vec![int(0); side];
        u[0] = int(1);
        u[i] = int(-1);
        u[n + i] = int(-1);
        p = p.add(&Matrix::outer(&u));
    }
    p
}

/// Output of [`solve_dual`].
#[derive(Clone, Debug, PartialEq)]
pub struct DualReport {
    pub solution: DualSolution,
    pub objective: Rational,
    pub kappa: Rational,
    /// Exact simplex minimum of `M`, converted to float.
    pub simplex_min: f64,
    pub matrix: RatMatrix,
    /// Concavity weights `c_i` with `δ_i = -c_i / 2`.
    pub concavity: Vec<Rational>,
    /// `κ - objective`.
    pub margin: Rational,
    /// Weight of the step along [`penalty_direction`].
    pub penalty: Rational,
    /// Number of exact simplex-min evaluations.
    pub checks: usize,
}

impl DualReport {
    pub fn gap(&self) -> f64 {
        (&self.kappa - &self.objective).to_f64()
    }

    pub fn is_certified(&self, tol: f64) -> bool {
        self.simplex_min >= 0.0 && self.gap().abs() <= tol
    }
}

/// Largest exponent tried for the penalty weight `2^k`.
pub const MAX_PENALTY_EXP: u32 = 96;

fn pow2(k: i64) -> Rational {
    if k >= 0 {
        Rational::from_integer(BigInt::from(1) << k as usize)
    } else {
        Rational::new(BigInt::from(1), BigInt::from(1) << (-k) as usize)
    }
}

/// Dual point of objective `κ - ε` with copositive `M`, for `ε` the largest
/// power of two not above `tol / 2`.
///
/// On the face `x + w = ξ` of the orthant the quadratic form of `M` reduces
/// to `ξ²(f(x/ξ) + ε)` with `f(x) = xᵀQx - κ + Σ c_i x_i (1 - x_i)`. With
/// `c_i = Q_ii + Σ_{j≠i} |Q_ij|` the matrix `diag(c) - Q` is diagonally
/// dominant, so `f` is concave on the unit cube and nonnegative there since
/// it is nonnegative at the vertices. The form is thus strictly positive on
/// the face, and a large enough step `t` along [`penalty_direction`] makes
/// it copositive on the whole orthant. `t` is doubled until the exact
/// simplex minimum is nonnegative. The supremum `κ` itself is in general
/// not attained.
pub fn solve_dual(q: &RatMatrix, tol: f64) -> Result<DualReport> {
    let n = q.rows();
    if n == 0 || n > MAX_DUAL_N {
        return Err(Error::TooLarge {
            what: "dual program order",
            limit: MAX_DUAL_N,
            got: n,
        });
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let q = q.symmetrized();
    let (k, _) = kappa(&q)?;
    let margin = pow2((tol / 2.0).log2().floor() as i64);

    let concavity: Vec<Rational> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .fold(q[(i, i)].clone(), |acc, j| acc + q[(i, j)].abs())
        })
        .collect();
    let mut base = vec![k.clone() - &margin];
    base.extend(std::iter::repeat_n(int(0), 2 * n));
    base.extend(concavity.iter().map(|c| -c.clone() / int(2)));
    let direction = penalty_direction(n);

    let at = |exp: i64| -> Result<(DualSolution, RatMatrix)> {
        let t = pow2(exp);
        let v: Vec<Rational> = base.iter().zip(&direction).map(|(b, d)| b + d * &t).collect();
        let s = DualSolution::from_vec(n, &v)?;
        let m = dual_matrix(&q, &s)?;
        Ok((s, m))
    };

    // Coarse float scan for a starting exponent; the exact test decides.
    let mut exp = 0i64;
    while exp < MAX_PENALTY_EXP as i64 {
        let (_, m) = at(exp)?;
        if simplex_min_quadratic(&m.to_f64())?.value > 0.0 {
            break;
        }
        exp += 1;
    }
    let mut checks = 0;
    loop {
        let (s, m) = at(exp)?;
        checks += 1;
        let sm = simplex_min_quadratic(&m)?.value;
        if !sm.is_negative() {
            return Ok(DualReport {
                objective: s.objective(),
                solution: s,
                kappa: k,
                simplex_min: sm.to_f64(),
                matrix: m,
                concavity,
                margin,
                penalty: pow2(exp),
                checks,
            });
        }
        exp += 1;
        if exp > MAX_PENALTY_EXP as i64 {
            return Err(Error::IterationLimit {
                iterations: checks,
                diagnostics: format!("no copositive certificate up to penalty 2^{MAX_PENALTY_EXP}; simplex minimum {sm}"),
            });
        }
    }
}

/// Row factors `Y(a)` per vertex, column factors `M_f` per facet.
#[derive(Clone, Debug)]
pub struct CpFactorizationCert {
    pub n: usize,
    pub polytope: ZeroOnePolytope,
    pub facets: Vec<FacetInequality>,
    pub slack: SlackMatrix,
    pub lifts: Vec<ConeElement<Rational>>,
    pub duals: Vec<DualReport>,
    pub report: FactorizationReport,
}

impl CpFactorizationCert {
    pub fn max_gap(&self) -> f64 {
        self.duals.iter().map(|d| d.gap().abs()).fold(0.0, f64::max)
    }

    pub fn min_simplex_value(&self) -> f64 {
        self.duals.iter().map(|d| d.simplex_min).fold(f64::INFINITY, f64::min)
    }

    pub fn cp_cone(&self) -> ConeOracle {
        ConeOracle::completely_positive(lifted_side(self.n))
    }

    pub fn column_factors(&self) -> Vec<ConeElement<Rational>> {
        self.duals.iter().map(|d| ConeElement::plain(d.matrix.clone())).collect()
    }
}

/// Factorizes the slack matrix of COR(n) through the completely positive
/// cone of side `1 + 2n`. Facets are solved in parallel.
pub fn factorize_cor_slack(n: usize, tol: f64) -> Result<CpFactorizationCert> {
    if n == 0 || n > MAX_FACTORIZE_N {
        return Err(Error::TooLarge {
            what: "correlation polytope order for factorization",
            limit: MAX_FACTORIZE_N,
            got: n,
        });
    }
    let (p, h, facets) = cor_facets(n)?;
    let slack = slack_matrix(&p, &h)?;
    let duals = facets
        .par_iter()
        .map(|f| solve_dual(&f.q, tol))
        .collect::<Result<Vec<_>>>()?;
    let lifts: Vec<ConeElement<Rational>> = (0..1usize << n).map(|mask| vertex_lift(&bits_of(mask, n))).collect();
    let columns: Vec<ConeElement<Rational>> = duals.iter().map(|d| ConeElement::plain(d.matrix.clone())).collect();
    let cone = ConeOracle::completely_positive(lifted_side(n));
    let report = verify_cone_factorization(&slack, &lifts, &columns, &cone, tol.max(DEFAULT_COPOSITIVE_TOL))?;
    Ok(CpFactorizationCert {
        n,
        polytope: p,
        facets,
        slack,
        lifts,
        duals,
        report,
    })
}

/// An affine slice of the completely positive cone together with a linear
/// read-off of the polytope coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ConicLift {
    pub n: usize,
    pub cone: ConeOracle,
    pub constraints: Vec<LinearConstraint>,
    /// `z_ij ↦ Y[1+i][1+j]` in COR(n) coordinate order.
    pub projection: Vec<((usize, usize), (usize, usize))>,
    /// Whether the slice meets the interior of the cone. The lift of COR(n)
    /// does not.
    pub proper: bool,
}

impl ConicLift {
    pub fn satisfies(&self, y: &RatMatrix) -> bool {
        self.constraints.iter().all(|c| c.holds(y))
    }

    pub fn failing(&self, y: &RatMatrix) -> Vec<&str> {
        self.constraints
            .iter()
            .filter(|c| !c.holds(y))
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn project(&self, y: &RatMatrix) -> Vec<Rational> {
        self.projection.iter().map(|&(_, (r, c))| y[(r, c)].clone()).collect()
    }

    /// Appends `Σ coeff·Y[r][c] = rhs`; entries given by lifted index.
    pub fn push_equation(&mut self, name: String, terms: &[((usize, usize), Rational)], rhs: Rational) {
        let side = self.cone.ambient;
        let mut a = Matrix::zeros(side, side);
        for ((r, c), v) in terms {
            if r == c {
                a[(*r, *c)] += v;
            } else {
                let half = v * rat(1, 2);
                a[(*r, *c)] += &half;
                a[(*c, *r)] += &half;
            }
        }
        self.constraints.push(LinearConstraint { name, matrix: a, rhs });
    }
}

/// The completely positive lift of COR(n): [`lift_constraints`] plus the
/// projection `z_ij = Y_ij` on the first diagonal block.
pub fn cp_extension_constraints(n: usize) -> ConicLift {
    ConicLift {
        n,
        cone: ConeOracle::completely_positive(lifted_side(n)),
        constraints: lift_constraints(n),
        projection: cor_coordinates(n)
            .into_iter()
            .map(|(i, j)| ((i, j), (1 + i, 1 + j)))
            .collect(),
        proper: false,
    }
}

/// Unit-weight check used by tests and the CLI: `Y(a) • M = aᵀQa - obj`.
pub fn feasibility_identity_holds(q: &RatMatrix, s: &DualSolution) -> Result<bool> {
    let m = dual_matrix(q, s)?;
    let obj = s.objective();
    let n = q.rows();
    let q = q.symmetrized();
    Ok((0..1usize << n).all(|mask| {
        let a = bits_of(mask, n);
        let y = Matrix::outer(&lift_vector(&a));
        y.inner(&m) == quad_at(&q, &a) - &obj
    }))
}
