//! Linear programming.
//!
//! [`lp_solve`] is a dense two-phase primal simplex with Bland's rule over any
//! [`Scalar`]; with [`Rational`](super::Rational) data it is exact and always
//! returns a basic optimal point. [`BoxedLp`] is a dual simplex over
//! `{v : lo <= v <= hi, G v <= h}` that keeps its basis between solves, which
//! is what a cutting-plane loop needs.

use super::linalg::{dot, solve, Matrix};
use super::scalar::Scalar;
use crate::error::{shape_err, Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Bound<T> {
    pub lower: Option<T>,
    pub upper: Option<T>,
}

impl<T: Scalar> Bound<T> {
    pub fn nonneg() -> Self {
        Bound {
            lower: Some(T::zero()),
            upper: None,
        }
    }

    pub fn free() -> Self {
        Bound {
            lower: None,
            upper: None,
        }
    }

    pub fn closed(lower: T, upper: T) -> Self {
        Bound {
            lower: Some(lower),
            upper: Some(upper),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BasicOptimum<T> {
    pub point: Vec<T>,
    pub value: T,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<T> {
    Optimal(BasicOptimum<T>),
    Infeasible,
    Unbounded,
}

impl<T> LpOutcome<T> {
    pub fn optimal(self) -> Option<BasicOptimum<T>> {
        match self {
            LpOutcome::Optimal(o) => Some(o),
            _ => None,
        }
    }
}

/// How an original variable is expressed through nonnegative columns.
enum Substitution<T> {
    /// `x = l + s`
    Shift { col: usize, lower: T },
    /// `x = u - s`
    Mirror { col: usize, upper: T },
    /// `x = s⁺ - s⁻`
    Split { pos: usize, neg: usize },
}

/// Optimizes `objective · x` subject to `equalities.0 x = equalities.1` and
/// per-variable closed bounds (either end may be infinite).
pub fn lp_solve<T: Scalar>(
    eq_matrix: &Matrix<T>,
    eq_rhs: &[T],
    bounds: &[Bound<T>],
    objective: &[T],
    sense: Sense,
) -> Result<LpOutcome<T>> {
    let nvars = objective.len();
    if bounds.len() != nvars {
        return Err(shape_err(format!("{nvars} bounds"), format!("{}", bounds.len())));
    }
    if eq_matrix.rows() != eq_rhs.len() || (eq_matrix.rows() > 0 && eq_matrix.cols() != nvars) {
        return Err(shape_err(
            format!("{}x{nvars} equality matrix", eq_rhs.len()),
            format!("{}x{}", eq_matrix.rows(), eq_matrix.cols()),
        ));
    }
    for b in bounds {
        if let (Some(l), Some(u)) = (&b.lower, &b.upper) {
            if (l.clone() - u).is_pos() {
                return Ok(LpOutcome::Infeasible);
            }
        }
    }

    // Build the standard form  A s = rhs, s >= 0.
    let mut subs = Vec::with_capacity(nvars);
    let mut ncols = 0usize;
    let mut upper_rows: Vec<(usize, T)> = Vec::new();
    for b in bounds {
        match (&b.lower, &b.upper) {
            (Some(l), upper) => {
                subs.push(Substitution::Shift {
                    col: ncols,
                    lower: l.clone(),
                });
                if let Some(u) = upper {
                    upper_rows.push((ncols, u.clone() - l));
                }
                ncols += 1;
            }
            (None, Some(u)) => {
                subs.push(Substitution::Mirror {
                    col: ncols,
                    upper: u.clone(),
                });
                ncols += 1;
            }
            (None, None) => {
                subs.push(Substitution::Split {
                    pos: ncols,
                    neg: ncols + 1,
                });
                ncols += 2;
            }
        }
    }
    let bound_slack_start = ncols;
    ncols += upper_rows.len();

    let mut rows: Vec<Vec<T>> = Vec::new();
    let mut rhs: Vec<T> = Vec::new();
    for i in 0..eq_matrix.rows() {
        let mut row = vec![T::zero(); ncols];
        let mut b = eq_rhs[i].clone();
        for (j, sub) in subs.iter().enumerate() {
            let a = &eq_matrix[(i, j)];
            if a.is_zero() {
                continue;
            }
            match sub {
                Substitution::Shift { col, lower } => {
                    row[*col] += a;
                    b -= a.clone() * lower;
                }
                Substitution::Mirror { col, upper } => {
                    row[*col] -= a;
                    b -= a.clone() * upper;
                }
                Substitution::Split { pos, neg } => {
                    row[*pos] += a;
                    row[*neg] -= a;
                }
            }
        }
        rows.push(row);
        rhs.push(b);
    }
    for (k, (col, width)) in upper_rows.iter().enumerate() {
        let mut row = vec![T::zero(); ncols];
        row[*col] = T::one();
        row[bound_slack_start + k] = T::one();
        rows.push(row);
        rhs.push(width.clone());
    }

    let flip = match sense {
        Sense::Minimize => T::one(),
        Sense::Maximize => -T::one(),
    };
    let mut cost = vec![T::zero(); ncols];
    let mut offset = T::zero();
    for (j, sub) in subs.iter().enumerate() {
        let c = &objective[j];
        match sub {
            Substitution::Shift { col, lower } => {
                cost[*col] += c;
                offset += c.clone() * lower;
            }
            Substitution::Mirror { col, upper } => {
                cost[*col] -= c;
                offset += c.clone() * upper;
            }
            Substitution::Split { pos, neg } => {
                cost[*pos] += c;
                cost[*neg] -= c;
            }
        }
    }
    for c in cost.iter_mut() {
        *c *= &flip;
    }

    let std = match standard_simplex(rows, rhs, &cost)? {
        StdOutcome::Optimal(s) => s,
        StdOutcome::Infeasible => return Ok(LpOutcome::Infeasible),
        StdOutcome::Unbounded => return Ok(LpOutcome::Unbounded),
    };

    let point: Vec<T> = subs
        .iter()
        .map(|sub| match sub {
            Substitution::Shift { col, lower } => lower.clone() + &std[*col],
            Substitution::Mirror { col, upper } => upper.clone() - &std[*col],
            Substitution::Split { pos, neg } => std[*pos].clone() - &std[*neg],
        })
        .collect();
    let value = dot(objective, &point);
    debug_assert!(T::EXACT || (value.clone() - (dot(&cost, &std) * &flip + &offset)).to_f64().abs() < 1e-6);
    Ok(LpOutcome::Optimal(BasicOptimum { point, value }))
}

enum StdOutcome<T> {
    Optimal(Vec<T>),
    Infeasible,
    Unbounded,
}

struct Tableau<T> {
    /// Constraint rows; the last entry of each row is the right-hand side.
    rows: Vec<Vec<T>>,
    /// Reduced costs; last entry is minus the objective value.
    obj: Vec<T>,
    basis: Vec<usize>,
}

impl<T: Scalar> Tableau<T> {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = T::one() / self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = self.rows[r].clone();
        let eliminate = |row: &mut Vec<T>| {
            if row[c].is_zero() {
                return;
            }
            let f = row[c].clone();
            for (k, p) in pivot_row.iter().enumerate() {
                if !p.is_zero() {
                    row[k] -= f.clone() * p;
                }
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.basis[r] = c;
    }

    /// Bland's rule iterations on the current objective row. `allowed`
    /// limits the entering columns.
    fn iterate(&mut self, allowed: usize) -> Result<bool> {
        let rhs = self.obj.len() - 1;
        for _ in 0..1_000_000 {
            let Some(enter) = (0..allowed).find(|&j| self.obj[j].is_neg()) else {
                return Ok(true);
            };
            let mut leave: Option<(usize, T)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[enter].is_pos() {
                    continue;
                }
                let ratio = row[rhs].clone() / row[enter].clone();
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => {
                        let d = ratio.clone() - lr;
                        d.is_neg() || (d.is_negligible() && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return Ok(false),
            }
        }
        Err(Error::IterationLimit {
            iterations: 1_000_000,
            diagnostics: "simplex pivot limit".into(),
        })
    }
}

fn standard_simplex<T: Scalar>(
    mut rows: Vec<Vec<T>>,
    mut rhs: Vec<T>,
    cost: &[T],
) -> Result<StdOutcome<T>> {
    let m = rows.len();
    let n = cost.len();
    for (row, b) in rows.iter_mut().zip(rhs.iter_mut()) {
        if *b < T::zero() {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
            *b = -b.clone();
        }
    }
    // columns: n structural, m artificial, 1 rhs
    let width = n + m + 1;
    let mut tab = Tableau {
        rows: Vec::with_capacity(m),
        obj: vec![T::zero(); width],
        basis: (n..n + m).collect(),
    };
    for (i, (row, b)) in rows.into_iter().zip(rhs).enumerate() {
        let mut full = row;
        full.resize(n + m, T::zero());
        full[n + i] = T::one();
        full.push(b);
        tab.rows.push(full);
    }
    for row in &tab.rows {
        for j in 0..n {
            tab.obj[j] -= &row[j];
        }
        tab.obj[width - 1] -= &row[width - 1];
    }
    tab.iterate(n + m)?;
    let phase1_value = -tab.obj[width - 1].clone();
    if phase1_value.is_pos() {
        return Ok(StdOutcome::Infeasible);
    }

    // Drive artificial variables out of the basis; drop redundant rows.
    let mut i = 0;
    while i < tab.rows.len() {
        if tab.basis[i] >= n {
            match (0..n).find(|&j| !tab.rows[i][j].is_negligible()) {
                Some(j) => {
                    tab.pivot(i, j);
                    i += 1;
                }
                None => {
                    tab.rows.remove(i);
                    tab.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }

    // Phase 2 reduced costs.
    tab.obj = vec![T::zero(); width];
    tab.obj[..n].clone_from_slice(cost);
    for (row, &b) in tab.rows.iter().zip(&tab.basis) {
        let cb = cost[b].clone();
        if cb.is_zero() {
            continue;
        }
        for j in 0..width {
            if j < n || j == width - 1 {
                tab.obj[j] -= cb.clone() * &row[j];
            }
        }
    }
    if !tab.iterate(n)? {
        return Ok(StdOutcome::Unbounded);
    }
    let mut x = vec![T::zero(); n];
    for (row, &b) in tab.rows.iter().zip(&tab.basis) {
        x[b] = row[width - 1].clone();
    }
    if !T::EXACT {
        for v in x.iter_mut() {
            if v.is_negligible() {
                *v = T::zero();
            }
        }
    }
    Ok(StdOutcome::Optimal(x))
}

/// `maximize c·v  s.t.  lo <= v <= hi,  g_r·v <= h_r` solved by a dual
/// simplex that keeps its basis across [`BoxedLp::add_row`] calls.
///
/// The box makes the all-bounds basis dual feasible from the start, so no
/// phase one is needed. Bland's rule (smallest violated row, smallest
/// leaving row on ratio ties) prevents cycling.
/// Relative row tolerance of [`BoxedLp`] over floats.
const FLOAT_FEAS_TOL: f64 = 1e-11;
/// Smallest accepted pivot relative to the entering column, over floats.
const FLOAT_PIVOT_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct BoxedLp<T> {
    objective: Vec<T>,
    normals: Vec<Vec<T>>,
    rhs: Vec<T>,
    basis: Vec<usize>,
    duals: Vec<T>,
    point: Vec<T>,
    pivots: usize,
}

impl<T: Scalar> BoxedLp<T> {
    pub fn new(objective: Vec<T>, lower: &[T], upper: &[T]) -> Result<Self> {
        let n = objective.len();
        if lower.len() != n || upper.len() != n {
            return Err(shape_err(format!("{n} bounds"), format!("{}/{}", lower.len(), upper.len())));
        }
        let mut normals = Vec::with_capacity(2 * n);
        let mut rhs = Vec::with_capacity(2 * n);
        for k in 0..n {
            if upper[k] < lower[k] {
                return Err(Error::Infeasible);
            }
            let mut up = vec![T::zero(); n];
            up[k] = T::one();
            normals.push(up);
            rhs.push(upper[k].clone());
            let mut down = vec![T::zero(); n];
            down[k] = -T::one();
            normals.push(down);
            rhs.push(-lower[k].clone());
        }
        let mut basis = Vec::with_capacity(n);
        let mut duals = Vec::with_capacity(n);
        let mut point = Vec::with_capacity(n);
        for (k, c) in objective.iter().enumerate() {
            if *c >= T::zero() {
                basis.push(2 * k);
                duals.push(c.clone());
                point.push(upper[k].clone());
            } else {
                basis.push(2 * k + 1);
                duals.push(-c.clone());
                point.push(lower[k].clone());
            }
        }
        Ok(BoxedLp {
            objective,
            normals,
            rhs,
            basis,
            duals,
            point,
            pivots: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.objective.len()
    }

    /// Adds `normal · v <= rhs`; returns its row index.
    pub fn add_row(&mut self, normal: Vec<T>, rhs: T) -> usize {
        assert_eq!(normal.len(), self.dim());
        self.normals.push(normal);
        self.rhs.push(rhs);
        self.normals.len() - 1
    }

    pub fn num_rows(&self) -> usize {
        self.normals.len()
    }

    pub fn point(&self) -> &[T] {
        &self.point
    }

    pub fn value(&self) -> T {
        dot(&self.objective, &self.point)
    }

    pub fn pivots(&self) -> usize {
        self.pivots
    }

    fn violation(&self, r: usize) -> T {
        dot(&self.normals[r], &self.point) - &self.rhs[r]
    }

    /// Exact sign test for rationals; for floats a tolerance relative to the
    /// magnitude of the terms.
    fn is_violated(&self, r: usize) -> bool {
        let v = self.violation(r);
        if T::EXACT {
            return v.is_pos();
        }
        let scale = self.normals[r]
            .iter()
            .zip(&self.point)
            .map(|(a, x)| (a.clone() * x).to_f64().abs())
            .fold(self.rhs[r].to_f64().abs(), f64::max);
        v.to_f64() > FLOAT_FEAS_TOL * (1.0 + scale)
    }

    /// Restores primal feasibility. Returns [`Error::Infeasible`] if the rows
    /// are inconsistent.
    pub fn solve(&mut self) -> Result<()> {
        let n = self.dim();
        loop {
            let Some(enter) = (0..self.num_rows()).find(|&r| self.is_violated(r)) else {
                return Ok(());
            };
            if self.pivots > 1_000_000 {
                return Err(Error::IterationLimit {
                    iterations: self.pivots,
                    diagnostics: "dual simplex pivot limit".into(),
                });
            }
            // normal_enter = Σ w_i normal_{basis[i]}
            let basis_t = Matrix::from_fn(n, n, |r, c| self.normals[self.basis[c]][r].clone());
            let w = solve(&basis_t, &self.normals[enter])
                .ok_or_else(|| Error::Invariant("singular LP basis".into()))?;
            let w_floor = if T::EXACT {
                0.0
            } else {
                FLOAT_PIVOT_TOL * w.iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max)
            };
            let mut leave: Option<(usize, T)> = None;
            for i in 0..n {
                if !w[i].is_pos() || w[i].to_f64() <= w_floor {
                    continue;
                }
                let ratio = self.duals[i].clone() / w[i].clone();
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => {
                        let d = ratio.clone() - lr;
                        d.is_neg() || (d.is_negligible() && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((out, step)) = leave else {
                return Err(Error::Infeasible);
            };
            for i in 0..n {
                if i != out {
                    let dec = w[i].clone() * &step;
                    self.duals[i] -= dec;
                    if !T::EXACT && self.duals[i] < T::zero() {
                        self.duals[i] = T::zero();
                    }
                }
            }
            self.duals[out] = step;
            self.basis[out] = enter;
            let basis_m = Matrix::from_fn(n, n, |r, c| self.normals[self.basis[r]][c].clone());
            let h: Vec<T> = self.basis.iter().map(|&b| self.rhs[b].clone()).collect();
            self.point =
                solve(&basis_m, &h).ok_or_else(|| Error::Invariant("singular LP basis".into()))?;
            self.pivots += 1;
        }
    }
}
