//! 0/1 polytopes given by vertices, exact facet enumeration by double
//! description, slack matrices, the correlation polytope, and checking of
//! cone factorizations of slack matrices.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cones::linalg::{null_space, rref, solve};
use crate::cones::{contains, int, ConeOracle, CpCertificate, Matrix, Membership, RatMatrix, Rational, Scalar};
use crate::error::{shape_err, Error, Result};

pub const MAX_FACET_ENUM_DIM: usize = 8;
pub const MAX_FACET_ENUM_VERTICES: usize = 64;
pub const MAX_COR_N: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroOnePolytope {
    pub dim: usize,
    pub vertices: Vec<Vec<u8>>,
}

impl ZeroOnePolytope {
    pub fn new(dim: usize, vertices: Vec<Vec<u8>>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptyPolytope);
        }
        for v in &vertices {
            if v.len() != dim {
                return Err(shape_err(format!("vertex of length {dim}"), format!("length {}", v.len())));
            }
            if v.iter().any(|&x| x > 1) {
                return Err(Error::InvalidInput(format!("vertex {v:?} is not a 0/1 vector")));
            }
        }
        let mut sorted = vertices.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != vertices.len() {
            return Err(Error::InvalidInput("duplicate vertices".into()));
        }
        Ok(ZeroOnePolytope { dim, vertices })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex_rational(&self, i: usize) -> Vec<Rational> {
        self.vertices[i].iter().map(|&x| int(i64::from(x))).collect()
    }
}

/// `{x : A x >= b, E x = f}` with irredundant rows of `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct HRep {
    pub a: RatMatrix,
    pub b: Vec<Rational>,
    pub eq_a: RatMatrix,
    pub eq_b: Vec<Rational>,
}

impl HRep {
    pub fn num_facets(&self) -> usize {
        self.a.rows()
    }

    pub fn dim(&self) -> usize {
        self.a.cols()
    }

    pub fn facet(&self, j: usize) -> (&[Rational], &Rational) {
        (self.a.row(j), &self.b[j])
    }

    /// Whether `x` satisfies every inequality and equality.
    pub fn contains_point(&self, x: &[Rational]) -> bool {
        let ineq = (0..self.a.rows()).all(|j| row_dot(self.a.row(j), x) >= self.b[j]);
        let eq = (0..self.eq_a.rows()).all(|j| row_dot(self.eq_a.row(j), x) == self.eq_b[j]);
        ineq && eq
    }
}

/// Rows indexed by vertices, columns by facets: `S[v][f] = A_f v - b_f`.
#[derive(Clone, Debug, PartialEq)]
pub struct SlackMatrix {
    pub s: RatMatrix,
}

impl SlackMatrix {
    pub fn rows(&self) -> usize {
        self.s.rows()
    }

    pub fn cols(&self) -> usize {
        self.s.cols()
    }
}

fn row_dot(a: &[Rational], x: &[Rational]) -> Rational {
    a.iter().zip(x).map(|(p, q)| p * q).sum()
}

/// Coordinate labels of COR(n): the diagonal `(i,i)` first, then `(i,j)`
/// for `i < j` in lexicographic order; indices are 0-based.
pub fn cor_coordinates(n: usize) -> Vec<(usize, usize)> {
    let mut coords: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
    for i in 0..n {
        for j in i + 1..n {
            coords.push((i, j));
        }
    }
    coords
}

/// Position of `z_ij` in [`cor_coordinates`].
pub fn cor_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    if i == j {
        return i;
    }
    // pairs (p,q), p<q, preceding (i,j)
    let before: usize = (0..i).map(|p| n - 1 - p).sum();
    n + before + (j - i - 1)
}

/// Binary vector `a` with `a_1` the lowest bit of `mask`.
pub fn bits_of(mask: usize, n: usize) -> Vec<u8> {
    (0..n).map(|i| ((mask >> i) & 1) as u8).collect()
}

/// COR(n): the vectors `(a_i a_j)_{i<=j}` for `a` in `{0,1}^n`, listed by
/// increasing mask.
pub fn correlation_polytope(n: usize) -> Result<ZeroOnePolytope> {
    if n == 0 || n > MAX_COR_N {
        return Err(Error::TooLarge {
            what: "correlation polytope order",
            limit: MAX_COR_N,
            got: n,
        });
    }
    let coords = cor_coordinates(n);
    let vertices = (0..1usize << n)
        .map(|mask| {
            let a = bits_of(mask, n);
            coords.iter().map(|&(i, j)| a[i] * a[j]).collect()
        })
        .collect();
    ZeroOnePolytope::new(coords.len(), vertices)
}

/// Exact facet enumeration by double description.
pub fn facet_enum(p: &ZeroOnePolytope) -> Result<HRep> {
    if p.dim > MAX_FACET_ENUM_DIM {
        return Err(Error::TooLarge {
            what: "facet enumeration dimension",
            limit: MAX_FACET_ENUM_DIM,
            got: p.dim,
        });
    }
    if p.num_vertices() > MAX_FACET_ENUM_VERTICES {
        return Err(Error::TooLarge {
            what: "facet enumeration vertex count",
            limit: MAX_FACET_ENUM_VERTICES,
            got: p.num_vertices(),
        });
    }
    let d = p.dim;
    // homogenizing coordinate first so it is always an RREF pivot
    let lifted = Matrix::from_fn(p.num_vertices(), d + 1, |r, c| {
        if c == 0 {
            int(1)
        } else {
            int(i64::from(p.vertices[r][c - 1]))
        }
    });

    // affine hull: h with lifted·h = 0, i.e. a·v = -c
    let hull = null_space(&lifted);
    let (eq_a, eq_b) = if hull.is_empty() {
        (Matrix::zeros(0, d), Vec::new())
    } else {
        let basis = Matrix::from_fn(hull.len(), d + 1, |r, c| hull[r][c].clone());
        let (reduced, pivots) = rref(&basis);
        let rows = pivots.len();
        (
            Matrix::from_fn(rows, d, |r, c| reduced[(r, c + 1)].clone()),
            (0..rows).map(|r| -reduced[(r, 0)].clone()).collect(),
        )
    };

    let (_, pivots) = rref(&lifted);
    let keep: Vec<usize> = pivots.clone();
    let projected: Vec<Vec<Rational>> = (0..lifted.rows())
        .map(|r| keep.iter().map(|&c| lifted[(r, c)].clone()).collect())
        .collect();

    let rays = double_description(&projected)?;
    let mut facets: Vec<(Vec<Rational>, Rational)> = Vec::new();
    for ray in rays {
        let mut a = vec![int(0); d];
        let mut c = int(0);
        for (k, &col) in keep.iter().enumerate() {
            if col == 0 {
                c = ray[k].clone();
            } else {
                a[col - 1] = ray[k].clone();
            }
        }
        let Some(lead) = a.iter().find(|x| !x.is_zero()).cloned() else {
            continue;
        };
        let scale = lead.abs();
        let a: Vec<Rational> = a.iter().map(|x| x / &scale).collect();
        facets.push((a, -c / scale));
    }
    facets.sort();
    facets.dedup();

    let a = Matrix::from_fn(facets.len(), d, |r, c| facets[r].0[c].clone());
    let b = facets.into_iter().map(|(_, b)| b).collect();
    Ok(HRep { a, b, eq_a, eq_b })
}

/// Extreme rays of `{h : p·h >= 0 for every row p}`, assuming the rows
/// span the whole space.
fn double_description(rows: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>> {
    let dim = rows[0].len();
    // greedy basis of linearly independent rows, in index order
    let mut basis: Vec<usize> = Vec::new();
    for (i, _) in rows.iter().enumerate() {
        let mut trial = basis.clone();
        trial.push(i);
        let m = Matrix::from_fn(trial.len(), dim, |r, c| rows[trial[r]][c].clone());
        if crate::cones::linalg::rank(&m) == trial.len() {
            basis = trial;
        }
        if basis.len() == dim {
            break;
        }
    }
    if basis.len() != dim {
        return Err(Error::Invariant("vertex rows do not span the lifted space".into()));
    }

    // columns of B^{-1} are the initial rays
    let mut rays: Vec<(Vec<Rational>, u64)> = Vec::with_capacity(dim);
    let b = Matrix::from_fn(dim, dim, |r, c| rows[basis[r]][c].clone());
    let all_basis: u64 = basis.iter().fold(0, |m, &i| m | (1u64 << i));
    for j in 0..dim {
        let mut e = vec![int(0); dim];
        e[j] = int(1);
        let col = solve(&b, &e).ok_or_else(|| Error::Invariant("singular initial basis".into()))?;
        rays.push((col, all_basis & !(1u64 << basis[j])));
    }

    for (i, p) in rows.iter().enumerate() {
        if all_basis & (1u64 << i) != 0 {
            continue;
        }
        let values: Vec<Rational> = rays.iter().map(|(r, _)| row_dot(p, r)).collect();
        let bit = 1u64 << i;
        let mut next: Vec<(Vec<Rational>, u64)> = Vec::new();
        for (k, (r, z)) in rays.iter().enumerate() {
            if values[k].is_zero() {
                next.push((r.clone(), z | bit));
            } else if values[k].is_positive() {
                next.push((r.clone(), *z));
            }
        }
        for (kp, (rp, zp)) in rays.iter().enumerate() {
            if !values[kp].is_positive() {
                continue;
            }
            for (kn, (rn, zn)) in rays.iter().enumerate() {
                if !values[kn].is_negative() {
                    continue;
                }
                let common = zp & zn;
                if (common.count_ones() as usize) + 2 < dim {
                    continue;
                }
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(k, (_, z))| k == kp || k == kn || z & common != common);
                if !adjacent {
                    continue;
                }
                let vp = &values[kp];
                let vn = &values[kn];
                let mut h: Vec<Rational> = rn.iter().zip(rp).map(|(x, y)| vp * x - vn * y).collect();
                normalize_ray(&mut h);
                next.push((h, common | bit));
            }
        }
        rays = next;
    }
    Ok(rays.into_iter().map(|(r, _)| r).collect())
}

fn normalize_ray(h: &mut [Rational]) {
    if let Some(lead) = h.iter().find(|x| !x.is_zero()).map(|x| x.abs()) {
        for x in h.iter_mut() {
            *x /= &lead;
        }
    }
}

/// Slack matrix of `p` against `h`, exact. Fails on any negative entry or
/// violated equality.
pub fn slack_matrix(p: &ZeroOnePolytope, h: &HRep) -> Result<SlackMatrix> {
    if h.dim() != p.dim {
        return Err(shape_err(format!("H-representation in dimension {}", p.dim), format!("dimension {}", h.dim())));
    }
    let verts: Vec<Vec<Rational>> = (0..p.num_vertices()).map(|i| p.vertex_rational(i)).collect();
    for (i, v) in verts.iter().enumerate() {
        for e in 0..h.eq_a.rows() {
            if row_dot(h.eq_a.row(e), v) != h.eq_b[e] {
                return Err(Error::InconsistentHRep(format!("vertex {i} violates equality {e}")));
            }
        }
    }
    let mut s = Matrix::zeros(p.num_vertices(), h.num_facets());
    for (i, v) in verts.iter().enumerate() {
        for j in 0..h.num_facets() {
            let value = row_dot(h.a.row(j), v) - &h.b[j];
            if value.is_negative() {
                return Err(Error::InconsistentHRep(format!("vertex {i} violates facet {j} by {value}")));
            }
            s[(i, j)] = value;
        }
    }
    Ok(SlackMatrix { s })
}

/// An element of a cone together with an optional completely positive
/// certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeElement<T> {
    pub value: Matrix<T>,
    pub certificate: Option<CpCertificate<T>>,
}

impl<T: Scalar> ConeElement<T> {
    pub fn plain(value: Matrix<T>) -> Self {
        ConeElement { value, certificate: None }
    }

    pub fn certified(value: Matrix<T>, certificate: CpCertificate<T>) -> Self {
        ConeElement {
            value,
            certificate: Some(certificate),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorizationReport {
    pub max_abs_err: f64,
    pub membership_ok: bool,
    /// Elements whose membership could not be decided (CP without certificate).
    pub unknown: usize,
    pub failures: Vec<String>,
}

impl FactorizationReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.membership_ok && self.max_abs_err <= tol
    }
}

/// Checks `⟨T_v, U_f⟩ = S[v][f]` with `T_v` in `cone` and `U_f` in its dual.
pub fn verify_cone_factorization<T: Scalar>(
    s: &SlackMatrix,
    t: &[ConeElement<T>],
    u: &[ConeElement<T>],
    cone: &ConeOracle,
    tol: f64,
) -> Result<FactorizationReport> {
    if t.len() != s.rows() || u.len() != s.cols() {
        return Err(shape_err(
            format!("{} row factors and {} column factors", s.rows(), s.cols()),
            format!("{} and {}", t.len(), u.len()),
        ));
    }
    let dual = cone.dual();
    let mut failures = Vec::new();
    let mut unknown = 0;
    for (side, elems, k) in [("row", t, cone), ("column", u, &dual)] {
        for (i, e) in elems.iter().enumerate() {
            match contains(k, &e.value, tol, e.certificate.as_ref())? {
                Membership::Member(_) => {}
                Membership::Unknown => unknown += 1,
                Membership::NotMember(w) => {
                    failures.push(format!("{side} factor {i} not in the {} cone: {w:?}", k.kind.name()))
                }
            }
        }
    }
    let mut max_abs_err: f64 = 0.0;
    for (i, ti) in t.iter().enumerate() {
        for (j, uj) in u.iter().enumerate() {
            let err = (ti.value.inner(&uj.value).to_f64() - s.s[(i, j)].to_f64()).abs();
            max_abs_err = max_abs_err.max(err);
        }
    }
    Ok(FactorizationReport {
        max_abs_err,
        membership_ok: failures.is_empty(),
        unknown,
        failures,
    })
}

/// `S = S·I` over the orthant of dimension `#facets`.
pub fn trivial_factorization(s: &SlackMatrix) -> (Vec<ConeElement<Rational>>, Vec<ConeElement<Rational>>) {
    let f = s.cols();
    let t = (0..s.rows())
        .map(|i| ConeElement::plain(Matrix::column(s.s.row(i))))
        .collect();
    let u = (0..f)
        .map(|j| {
            let mut e = vec![int(0); f];
            e[j] = int(1);
            ConeElement::plain(Matrix::column(&e))
        })
        .collect();
    (t, u)
}
