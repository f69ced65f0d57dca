//! Exact minimization of a quadratic form over the standard simplex.
//!
//! Every support set `S` is tried: the stationarity system
//! `M_SS z_S = μ·1, 1ᵀz_S = 1` is solved and kept when `z_S > 0` and the
//! off-support multipliers are feasible (`(Mz)_j >= μ`). Supports whose
//! system is singular are skipped. That loses nothing: a global minimizer of
//! minimal support always has a nonsingular system, since a kernel vector
//! either leaves the value unchanged (so the support can shrink) or gives a
//! strict descent direction inside the face.

use super::linalg::{solve, Matrix};
use super::scalar::Scalar;
use crate::error::{shape_err, Error, Result};

/// Largest side for which the `2^m` support enumeration is allowed.
pub const MAX_SIMPLEX_SIDE: usize = 14;

#[derive(Clone, Debug, PartialEq)]
pub struct SimplexMin<T> {
    /// `min { zᵀMz : z >= 0, Σz = 1 }`
    pub value: T,
    pub argmin: Vec<T>,
    pub support: Vec<usize>,
}

pub fn simplex_min_quadratic<T: Scalar>(m: &Matrix<T>) -> Result<SimplexMin<T>> {
    let side = m.rows();
    if !m.is_square() || side == 0 {
        return Err(shape_err("nonempty square matrix", format!("{}x{}", m.rows(), m.cols())));
    }
    if side > MAX_SIMPLEX_SIDE {
        return Err(Error::TooLarge {
            what: "simplex minimization side",
            limit: MAX_SIMPLEX_SIDE,
            got: side,
        });
    }
    if !m.is_symmetric() {
        return Err(Error::NotSymmetric(m.asymmetry()));
    }
    let kkt_slack = if T::EXACT { 0.0 } else { 1e-9 * (1.0 + m.max_abs()) };

    let mut best: Option<SimplexMin<T>> = None;
    let mut idx = Vec::with_capacity(side);
    for mask in 1u32..(1u32 << side) {
        idx.clear();
        idx.extend((0..side).filter(|&i| mask & (1 << i) != 0));
        let Some(z) = stationary_point(m, &idx) else {
            continue;
        };
        let mz = m.mul_vec(&z);
        let value = m.quad_form(&z);
        let off_support_ok = (0..side).filter(|j| mask & (1 << j) == 0).all(|j| {
            let d = mz[j].clone() - &value;
            if T::EXACT {
                d >= T::zero()
            } else {
                d.to_f64() >= -kkt_slack
            }
        });
        if !off_support_ok {
            continue;
        }
        let replace = match &best {
            None => true,
            Some(b) => value < b.value || (value == b.value && lex_less(&z, &b.argmin)),
        };
        if replace {
            best = Some(SimplexMin {
                value,
                argmin: z,
                support: idx.clone(),
            });
        }
    }
    // Vertices always yield a nonsingular system, so a candidate exists.
    best.ok_or_else(|| Error::Invariant("no stationary point on the simplex".into()))
}

/// Solution of the stationarity system on `support`, extended by zeros, or
/// `None` if the system is singular or the point leaves the simplex.
fn stationary_point<T: Scalar>(m: &Matrix<T>, support: &[usize]) -> Option<Vec<T>> {
    let k = support.len();
    let sys = Matrix::from_fn(k + 1, k + 1, |r, c| match (r < k, c < k) {
        (true, true) => m[(support[r], support[c])].clone(),
        (true, false) => -T::one(),
        (false, true) => T::one(),
        (false, false) => T::zero(),
    });
    let mut rhs = vec![T::zero(); k + 1];
    rhs[k] = T::one();
    let sol = solve(&sys, &rhs)?;
    let mut z = vec![T::zero(); m.rows()];
    if T::EXACT {
        if sol[..k].iter().any(|v| *v <= T::zero()) {
            return None;
        }
        for (i, &s) in support.iter().enumerate() {
            z[s] = sol[i].clone();
        }
    } else {
        if sol[..k].iter().any(|v| v.to_f64() < -1e-12) {
            return None;
        }
        let mut total = T::zero();
        for (i, &s) in support.iter().enumerate() {
            let v = if sol[i] < T::zero() { T::zero() } else { sol[i].clone() };
            total += &v;
            z[s] = v;
        }
        if !total.is_pos() {
            return None;
        }
        for v in z.iter_mut() {
            *v /= &total;
        }
    }
    Some(z)
}

fn lex_less<T: PartialOrd>(a: &[T], b: &[T]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::scalar::{int, rat, Rational};

    pub(crate) fn horn() -> Matrix<Rational> {
        let pattern = [
            [1, -1, 1, 1, -1],
            [-1, 1, -1, 1, 1],
            [1, -1, 1, -1, 1],
            [1, 1, -1, 1, -1],
            [-1, 1, 1, -1, 1],
        ];
        Matrix::from_fn(5, 5, |r, c| int(pattern[r][c]))
    }

    #[test]
    fn identity_minimum_is_uniform() {
        for m in 1..=5 {
            let res = simplex_min_quadratic(&Matrix::<Rational>::identity(m)).unwrap();
            assert_eq!(res.value, rat(1, m as i64));
            assert!(res.argmin.iter().all(|v| *v == rat(1, m as i64)));
        }
    }

    #[test]
    fn negative_identity_minimum_at_vertex() {
        let res = simplex_min_quadratic(&Matrix::<Rational>::identity(4).scale(&int(-1))).unwrap();
        assert_eq!(res.value, int(-1));
        assert_eq!(res.support.len(), 1);
    }

    #[test]
    fn horn_matrix_minimum_is_zero() {
        let res = simplex_min_quadratic(&horn()).unwrap();
        assert_eq!(res.value, int(0));
        let f = simplex_min_quadratic(&horn().to_f64()).unwrap();
        assert!(f.value.abs() < 1e-12);
    }

    #[test]
    fn singular_faces_are_harmless() {
        // all-ones matrix: every point of the simplex is optimal with value 1
        let j = Matrix::<Rational>::ones(4, 4);
        assert_eq!(simplex_min_quadratic(&j).unwrap().value, int(1));
        let z = Matrix::<Rational>::zeros(3, 3);
        assert_eq!(simplex_min_quadratic(&z).unwrap().value, int(0));
    }

    #[test]
    fn rejects_oversized_and_asymmetric() {
        let big = Matrix::<f64>::identity(MAX_SIMPLEX_SIDE + 1);
        assert!(matches!(simplex_min_quadratic(&big), Err(Error::TooLarge { .. })));
        let asym = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(simplex_min_quadratic(&asym).is_err());
    }
}
