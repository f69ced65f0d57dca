//! Generalized probabilistic theories: systems, measurements, refinement
//! into extremal effects, decomposition into measurements with few nonzero
//! effects, and single-shot capacity estimates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cones::{
    caratheodory_unit, contains, extremal_refine, is_extremal, is_interior, sym_eig, ConeKind, ConeOracle, Matrix,
    Scalar,
};
use crate::error::{shape_err, Error, Result};

/// Probabilities above `-PROB_CLIP` are clipped to zero.
pub const PROB_CLIP: f64 = 1e-12;
/// Normalization slack for float states and measurements.
pub const FLOAT_NORM_TOL: f64 = 1e-10;

/// A state cone `C` together with a unit effect `u` interior to `C*`.
#[derive(Clone, Debug, PartialEq)]
pub struct GptSystem<T> {
    pub cone: ConeOracle,
    pub unit: Matrix<T>,
}

impl<T: Scalar> GptSystem<T> {
    pub fn new(cone: ConeOracle, unit: Matrix<T>) -> Result<Self> {
        let effects = cone.dual();
        effects.check_shape(&unit)?;
        if !is_interior(&effects, &unit)? {
            return Err(Error::NotInterior);
        }
        Ok(GptSystem { cone, unit })
    }

    /// All-ones unit for the orthant, identity for matrix cones.
    pub fn with_default_unit(cone: ConeOracle) -> Result<Self> {
        let unit = cone.default_unit();
        Self::new(cone, unit)
    }

    pub fn gpt_dim(&self) -> usize {
        self.cone.gpt_dim()
    }

    pub fn effect_cone(&self) -> ConeOracle {
        self.cone.dual()
    }

    fn tol(&self) -> f64 {
        if T::EXACT {
            0.0
        } else {
            FLOAT_NORM_TOL * (1.0 + self.unit.max_abs())
        }
    }

    /// Checks `⟨u, ω⟩ = 1` and `ω ∈ C` (CP states are not checked).
    pub fn check_state(&self, omega: &Matrix<T>) -> Result<()> {
        self.cone.check_shape(omega)?;
        let norm = self.unit.inner(omega).to_f64();
        if (norm - 1.0).abs() > self.tol() || (T::EXACT && !(self.unit.inner(omega) - T::one()).is_zero()) {
            return Err(Error::InvalidInput(format!("state has ⟨u, ω⟩ = {norm}, expected 1")));
        }
        if self.cone.kind != ConeKind::CompletelyPositive && contains(&self.cone, omega, self.tol(), None)?.is_not_member() {
            return Err(Error::InvalidInput("state lies outside the state cone".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Measurement<T> {
    pub effects: Vec<Matrix<T>>,
}

impl<T: Scalar> Measurement<T> {
    pub fn new(effects: Vec<Matrix<T>>) -> Self {
        Measurement { effects }
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn sum(&self, shape: (usize, usize)) -> Matrix<T> {
        let mut total = Matrix::zeros(shape.0, shape.1);
        for e in &self.effects {
            total = total.add(e);
        }
        total
    }

    pub fn nonzero_count(&self) -> usize {
        self.effects.iter().filter(|e| !is_zero_effect(*e)).count()
    }

    /// Effects sum to the unit and each lies in `C*`.
    pub fn validate(&self, system: &GptSystem<T>) -> Result<()> {
        if self.effects.is_empty() {
            return Err(Error::InvalidMeasurement("no effects".into()));
        }
        let k = system.effect_cone();
        for (i, e) in self.effects.iter().enumerate() {
            k.check_shape(e)?;
            if contains(&k, e, system.tol(), None)?.is_not_member() {
                return Err(Error::InvalidMeasurement(format!("effect {i} is outside the effect cone")));
            }
        }
        let diff = self.sum(system.unit.shape()).sub(&system.unit);
        let err = diff.max_abs();
        let exact_fail = T::EXACT && diff.as_slice().iter().any(|v| !v.is_zero());
        if exact_fail || err > system.tol() {
            return Err(Error::InvalidMeasurement(format!("effects sum to the unit only up to {err:e}")));
        }
        Ok(())
    }
}

fn is_zero_effect<T: Scalar>(e: &Matrix<T>) -> bool {
    if T::EXACT {
        e.as_slice().iter().all(|v| v.is_zero())
    } else {
        e.max_abs() <= PROB_CLIP
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementMixture<T> {
    pub parts: Vec<(T, Measurement<T>)>,
}

impl<T: Scalar> MeasurementMixture<T> {
    /// Per-outcome weighted sum `Σ_k w_k e_i^(k)`.
    pub fn recombine(&self) -> Vec<Matrix<T>> {
        let Some((_, first)) = self.parts.first() else {
            return Vec::new();
        };
        let mut out: Vec<Matrix<T>> = first
            .effects
            .iter()
            .map(|e| Matrix::zeros(e.rows(), e.cols()))
            .collect();
        for (w, m) in &self.parts {
            for (acc, e) in out.iter_mut().zip(&m.effects) {
                acc.add_scaled(w, e);
            }
        }
        out
    }

    pub fn total_weight(&self) -> T {
        self.parts.iter().fold(T::zero(), |acc, (w, _)| acc + w)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    pub prior: Vec<f64>,
    pub states: Vec<Matrix<f64>>,
}

/// `P(i | ω) = ⟨e_i, ω⟩`.
pub fn outcome_distribution<T: Scalar>(omega: &Matrix<T>, m: &Measurement<T>) -> Result<Vec<T>> {
    let mut probs = Vec::with_capacity(m.len());
    for (i, e) in m.effects.iter().enumerate() {
        if e.shape() != omega.shape() {
            return Err(shape_err(
                format!("{}x{}", omega.rows(), omega.cols()),
                format!("{}x{}", e.rows(), e.cols()),
            ));
        }
        let p = e.inner(omega);
        if p < T::zero() {
            if T::EXACT || p.to_f64() < -PROB_CLIP {
                return Err(Error::InvalidMeasurement(format!(
                    "outcome {i} has negative probability {}",
                    p.to_f64()
                )));
            }
            probs.push(T::zero());
        } else {
            probs.push(p);
        }
    }
    let total = probs.iter().fold(T::zero(), |a, p| a + p);
    let off = (total.clone() - T::one()).to_f64().abs();
    if (T::EXACT && !(total - T::one()).is_zero()) || off > FLOAT_NORM_TOL {
        return Err(Error::InvalidMeasurement(format!("outcome probabilities sum to 1 ± {off:e}")));
    }
    Ok(probs)
}

/// Splits every effect into extremal parts. `map[j]` is the index of the
/// original effect that refined effect `j` came from.
pub fn refine_measurement<T: Scalar>(m: &Measurement<T>, system: &GptSystem<T>) -> Result<(Measurement<T>, Vec<usize>)> {
    let k = system.effect_cone();
    let mut effects = Vec::new();
    let mut map = Vec::new();
    for (i, e) in m.effects.iter().enumerate() {
        for part in extremal_refine(e, &k)? {
            effects.push(part);
            map.push(i);
        }
    }
    Ok((Measurement::new(effects), map))
}

/// Sums refined outcome values back onto the original outcomes.
pub fn group_by_map<T: Scalar>(values: &[T], map: &[usize], outcomes: usize) -> Vec<T> {
    let mut out = vec![T::zero(); outcomes];
    for (v, &i) in values.iter().zip(map) {
        out[i] += v;
    }
    out
}

fn extremal_tol<T: Scalar>(e: &Matrix<T>) -> f64 {
    if T::EXACT {
        0.0
    } else {
        1e-9 * (1.0 + e.max_abs())
    }
}

/// Peels a measurement of extremal effects into a convex mixture of
/// measurements with at most `gpt_dim` nonzero effects each.
pub fn decompose_measurement<T: Scalar>(m: &Measurement<T>, system: &GptSystem<T>) -> Result<MeasurementMixture<T>> {
    let k = system.effect_cone();
    if !matches!(k.kind, ConeKind::Orthant | ConeKind::Psd) {
        return Err(Error::Unsupported(format!(
            "extremal rays not characterized for the {} cone",
            k.kind.name()
        )));
    }
    m.validate(system)?;
    for (i, e) in m.effects.iter().enumerate() {
        if !is_zero_effect(e) && !is_extremal(&k, e, extremal_tol(e))? {
            return Err(Error::InvalidMeasurement(format!(
                "effect {i} is not extremal; refine the measurement first"
            )));
        }
    }
    let n = system.gpt_dim();
    let mut parts = Vec::new();
    let mut weight = T::one();
    let mut current = m.effects.clone();
    loop {
        let nonzero: Vec<usize> = (0..current.len()).filter(|&i| !is_zero_effect(&current[i])).collect();
        if nonzero.len() <= n {
            parts.push((weight, Measurement::new(current)));
            break;
        }
        let active: Vec<Matrix<T>> = nonzero.iter().map(|&i| current[i].clone()).collect();
        let lambda = caratheodory_unit(&active, &system.unit)?;
        let (top, lmax) = lambda
            .iter()
            .enumerate()
            .fold((0, T::zero()), |(bi, bv), (i, v)| if *v > bv { (i, v.clone()) } else { (bi, bv) });
        if !(lmax.clone() - T::one()).is_pos() {
            return Err(Error::Invariant(format!(
                "largest Carathéodory weight {} <= 1 with {} > {n} nonzero effects",
                lmax.to_f64(),
                nonzero.len()
            )));
        }
        let shape = system.unit.shape();
        let mut first = vec![Matrix::zeros(shape.0, shape.1); current.len()];
        let mut rest = vec![Matrix::zeros(shape.0, shape.1); current.len()];
        let keep = T::one() - T::one() / &lmax;
        for (pos, &i) in nonzero.iter().enumerate() {
            first[i] = current[i].scale(&lambda[pos]);
            if pos != top && lambda[pos] != lmax {
                let factor = (T::one() - lambda[pos].clone() / &lmax) / &keep;
                rest[i] = current[i].scale(&factor);
            }
        }
        parts.push((weight.clone() / &lmax, Measurement::new(first)));
        weight *= &keep;
        current = rest;
    }
    Ok(MeasurementMixture { parts })
}

/// Refines, then decomposes.
pub fn refine_and_decompose<T: Scalar>(
    m: &Measurement<T>,
    system: &GptSystem<T>,
) -> Result<(Measurement<T>, Vec<usize>, MeasurementMixture<T>)> {
    let (refined, map) = refine_measurement(m, system)?;
    let mixture = decompose_measurement(&refined, system)?;
    Ok((refined, map, mixture))
}

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

/// `I(X;Y) = H(Y) - H(Y|X)` in bits for prior `p` and channel rows `W[x]`.
pub fn mutual_information(p: &[f64], w: &[Vec<f64>]) -> f64 {
    let outputs = w.first().map_or(0, Vec::len);
    let mut q = vec![0.0; outputs];
    let mut h_cond = 0.0;
    for (px, row) in p.iter().zip(w) {
        for (qy, wy) in q.iter_mut().zip(row) {
            *qy += px * wy;
        }
        h_cond -= px * row.iter().map(|&v| plogp(v)).sum::<f64>();
    }
    let h_y = -q.iter().map(|&v| plogp(v)).sum::<f64>();
    (h_y - h_cond).max(0.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelCapacity {
    /// `I(prior; W)` in bits for the returned prior.
    pub value: f64,
    /// Upper bound from the final iterate.
    pub upper: f64,
    pub prior: Vec<f64>,
    pub iterations: usize,
}

/// Blahut–Arimoto iteration for the capacity of a discrete memoryless channel.
pub fn blahut_arimoto(w: &[Vec<f64>], max_iter: usize, tol: f64) -> ChannelCapacity {
    let nx = w.len();
    let ny = w.first().map_or(0, Vec::len);
    let mut p = vec![1.0 / nx as f64; nx];
    let mut upper = f64::INFINITY;
    let mut iterations = 0;
    for it in 0..max_iter {
        iterations = it + 1;
        let mut q = vec![0.0; ny];
        for (px, row) in p.iter().zip(w) {
            for (qy, wy) in q.iter_mut().zip(row) {
                *qy += px * wy;
            }
        }
        // D(W_x || q) in bits
        let div: Vec<f64> = w
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&q)
                    .filter(|(wy, _)| **wy > 0.0)
                    .map(|(wy, qy)| wy * (wy / qy).log2())
                    .sum()
            })
            .collect();
        upper = div.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lower: f64 = p.iter().zip(&div).map(|(px, d)| px * d).sum();
        if upper - lower <= tol {
            break;
        }
        let mut next: Vec<f64> = p.iter().zip(&div).map(|(px, d)| px * d.exp2()).collect();
        let z: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= z);
        p = next;
    }
    ChannelCapacity {
        value: mutual_information(&p, w),
        upper,
        prior: p,
        iterations,
    }
}

/// `W[x][i] = ⟨e_i, ω(x)⟩`, clipped at zero.
pub fn channel_matrix(states: &[Matrix<f64>], m: &Measurement<f64>) -> Vec<Vec<f64>> {
    states
        .iter()
        .map(|s| m.effects.iter().map(|e| e.inner(s).max(0.0)).collect())
        .collect()
}

/// Mutual information of an ensemble measured by `m`.
pub fn ensemble_information(ensemble: &Ensemble, m: &Measurement<f64>) -> f64 {
    mutual_information(&ensemble.prior, &channel_matrix(&ensemble.states, m))
}

/// `log2 n` with `n` the linear dimension of the system.
pub fn capacity_bound(cone: &ConeOracle) -> f64 {
    (cone.gpt_dim() as f64).log2()
}

/// Unit-vector states and effects on the orthant of dimension `n` with a
/// uniform prior: a noiseless `n`-symbol channel.
pub fn canonical_classical(n: usize) -> (Ensemble, Measurement<f64>) {
    let axis = |k: usize| {
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        Matrix::column(&v)
    };
    let states = (0..n).map(axis).collect();
    let effects = (0..n).map(axis).collect();
    (
        Ensemble {
            prior: vec![1.0 / n as f64; n],
            states,
        },
        Measurement::new(effects),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct CapacitySearch {
    pub value: f64,
    pub bound: f64,
    pub restart: usize,
    pub ensemble: Ensemble,
    pub measurement: Measurement<f64>,
}

/// Search parameters for [`holevo_capacity_lower`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchConfig {
    pub num_inputs: usize,
    pub num_outcomes: usize,
    pub restarts: usize,
    pub seed: u64,
    pub steps: usize,
}

impl SearchConfig {
    pub fn new(num_inputs: usize, num_outcomes: usize, restarts: usize, seed: u64) -> Self {
        SearchConfig {
            num_inputs,
            num_outcomes,
            restarts,
            seed,
            steps: 400,
        }
    }
}

/// Unnormalized search variables: states are `A` (orthant: `|a|`; PSD:
/// `A Aᵀ`), effects are `B_i` (orthant: `|b_i|`; PSD: `B_i B_iᵀ`).
#[derive(Clone, Debug)]
struct Candidate {
    states: Vec<Matrix<f64>>,
    effects: Vec<Matrix<f64>>,
}

fn square_factor(a: &Matrix<f64>, kind: ConeKind) -> Matrix<f64> {
    match kind {
        ConeKind::Orthant => a.map(|v| v.abs()),
        _ => a.matmul(&a.transpose()).expect("square factor"),
    }
}

/// Maps search variables to a feasible ensemble and measurement: states are
/// normalized and effects conjugated so that they sum to the unit.
fn realize(c: &Candidate, system: &GptSystem<f64>) -> Option<(Vec<Matrix<f64>>, Measurement<f64>)> {
    let kind = system.cone.kind;
    let mut states = Vec::with_capacity(c.states.len());
    for a in &c.states {
        let s = square_factor(a, kind);
        let norm = system.unit.inner(&s);
        if norm <= 1e-300 {
            return None;
        }
        states.push(s.scale(&(1.0 / norm)));
    }
    let raw: Vec<Matrix<f64>> = c.effects.iter().map(|b| square_factor(b, kind)).collect();
    let mut total = Matrix::zeros(system.unit.rows(), system.unit.cols());
    for e in &raw {
        total = total.add(e);
    }
    let effects = match kind {
        ConeKind::Orthant => {
            if (0..total.rows()).any(|r| total[(r, 0)] <= 1e-300) {
                return None;
            }
            raw.iter()
                .map(|e| Matrix::from_fn(e.rows(), 1, |r, _| e[(r, 0)] * system.unit[(r, 0)] / total[(r, 0)]))
                .collect()
        }
        _ => {
            // effects ↦ u^{1/2} S^{-1/2} e S^{-1/2} u^{1/2}
            let s_inv_half = inv_sqrt_psd(&total)?;
            let u_half = sqrt_psd(&system.unit)?;
            let conj = u_half.matmul(&s_inv_half).ok()?;
            let conj_t = conj.transpose();
            raw.iter()
                .map(|e| conj.matmul(e).and_then(|x| x.matmul(&conj_t)).map(|x| x.symmetrized()))
                .collect::<Result<Vec<_>>>()
                .ok()?
        }
    };
    Some((states, Measurement::new(effects)))
}

fn spectral_map(m: &Matrix<f64>, f: impl Fn(f64) -> Option<f64>) -> Option<Matrix<f64>> {
    let eig = sym_eig(&m.symmetrized()).ok()?;
    let mut out = Matrix::zeros(m.rows(), m.cols());
    for (k, &l) in eig.values.iter().enumerate() {
        let v = eig.vector(k);
        out.add_scaled(&f(l)?, &Matrix::outer(&v));
    }
    Some(out.symmetrized())
}

fn inv_sqrt_psd(m: &Matrix<f64>) -> Option<Matrix<f64>> {
    let scale = 1.0 + m.max_abs();
    spectral_map(m, |l| if l > 1e-12 * scale { Some(1.0 / l.sqrt()) } else { None })
}

fn sqrt_psd(m: &Matrix<f64>) -> Option<Matrix<f64>> {
    spectral_map(m, |l| Some(l.max(0.0).sqrt()))
}

fn evaluate(c: &Candidate, system: &GptSystem<f64>) -> f64 {
    match realize(c, system) {
        Some((states, m)) => blahut_arimoto(&channel_matrix(&states, &m), 200, 1e-12).value,
        None => f64::NEG_INFINITY,
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, shape: (usize, usize)) -> Matrix<f64> {
    Matrix::from_fn(shape.0, shape.1, |_, _| rng.gen_range(-1.0..1.0))
}

/// Orthant-only snapping: states onto their largest coordinate, each
/// coordinate of the effects assigned to a single outcome.
fn snap_orthant(c: &Candidate) -> Candidate {
    let states = c
        .states
        .iter()
        .map(|a| {
            let k = argmax((0..a.rows()).map(|r| a[(r, 0)].abs()));
            Matrix::from_fn(a.rows(), 1, |r, _| if r == k { 1.0 } else { 0.0 })
        })
        .collect();
    let dim = c.effects[0].rows();
    let owner: Vec<usize> = (0..dim)
        .map(|r| argmax(c.effects.iter().map(|b| b[(r, 0)].abs())))
        .collect();
    let effects = (0..c.effects.len())
        .map(|i| Matrix::from_fn(dim, 1, |r, _| if owner[r] == i { 1.0 } else { 0.0 }))
        .collect();
    Candidate { states, effects }
}

/// Moves a state onto a random vertex, or hands one coordinate of the
/// effects entirely to the picked outcome.
fn vertex_move(c: &mut Candidate, pick: usize, num_inputs: usize, rng: &mut ChaCha8Rng) {
    let dim = c.states[0].rows();
    let r = rng.gen_range(0..dim);
    if pick < num_inputs {
        c.states[pick] = Matrix::from_fn(dim, 1, |k, _| if k == r { 1.0 } else { 0.0 });
    } else {
        let owner = pick - num_inputs;
        for (i, b) in c.effects.iter_mut().enumerate() {
            b[(r, 0)] = if i == owner { 1.0 } else { 0.0 };
        }
    }
}

fn argmax(values: impl Iterator<Item = f64>) -> usize {
    values
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, v)| if v > bv { (i, v) } else { (bi, bv) })
        .0
}

fn restart_seed(seed: u64, restart: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (restart as u64).wrapping_add(1).wrapping_mul(0xD1B5_4A32_D192_ED03)
}

fn search_one(system: &GptSystem<f64>, cfg: &SearchConfig, restart: usize) -> (f64, Candidate) {
    let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(cfg.seed, restart));
    let shape = system.cone.element_shape();
    let mut cur = Candidate {
        states: (0..cfg.num_inputs).map(|_| random_matrix(&mut rng, shape)).collect(),
        effects: (0..cfg.num_outcomes).map(|_| random_matrix(&mut rng, shape)).collect(),
    };
    let orthant = system.cone.kind == ConeKind::Orthant;
    let mut value = evaluate(&cur, system);
    let mut step = 0.5;
    for _ in 0..cfg.steps {
        let mut trial = cur.clone();
        let pick = rng.gen_range(0..cfg.num_inputs + cfg.num_outcomes);
        if orthant && rng.gen_bool(0.3) {
            vertex_move(&mut trial, pick, cfg.num_inputs, &mut rng);
        } else {
            let target = if pick < cfg.num_inputs {
                &mut trial.states[pick]
            } else {
                &mut trial.effects[pick - cfg.num_inputs]
            };
            let noise = random_matrix(&mut rng, shape).scale(&step);
            *target = target.add(&noise);
        }
        let v = evaluate(&trial, system);
        if v > value {
            cur = trial;
            value = v;
            step = (step * 1.2).min(2.0);
        } else {
            step = (step * 0.95).max(1e-3);
        }
    }
    if orthant {
        let snapped = snap_orthant(&cur);
        let v = evaluate(&snapped, system);
        if v >= value {
            cur = snapped;
            value = v;
        }
    }
    (value, cur)
}

/// Lower bound on the single-shot capacity by seeded random-restart hill
/// climbing over states and effects, with the prior optimized by
/// Blahut–Arimoto. Restarts run in parallel; the best value wins, ties going
/// to the lowest restart index.
pub fn holevo_capacity_lower(system: &GptSystem<f64>, cfg: &SearchConfig) -> Result<CapacitySearch> {
    if !matches!(system.cone.kind, ConeKind::Orthant | ConeKind::Psd) {
        return Err(Error::Unsupported(format!(
            "capacity search is not available for the {} cone",
            system.cone.kind.name()
        )));
    }
    if cfg.num_inputs == 0 || cfg.num_outcomes == 0 || cfg.restarts == 0 {
        return Err(Error::InvalidInput("inputs, outcomes and restarts must be positive".into()));
    }
    let results: Vec<(f64, Candidate)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| search_one(system, cfg, r))
        .collect();
    let (restart, (_, best)) = results
        .iter()
        .enumerate()
        .fold(None::<(usize, &(f64, Candidate))>, |acc, (i, r)| match acc {
            Some((_, b)) if b.0 >= r.0 => acc,
            _ => Some((i, r)),
        })
        .expect("at least one restart");
    let (states, measurement) =
        realize(best, system).ok_or_else(|| Error::Invariant("best capacity candidate is infeasible".into()))?;
    let w = channel_matrix(&states, &measurement);
    let cap = blahut_arimoto(&w, 200, 1e-12);
    Ok(CapacitySearch {
        value: cap.value,
        bound: capacity_bound(&system.cone),
        restart,
        ensemble: Ensemble {
            prior: cap.prior,
            states,
        },
        measurement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::{int, rat, Rational};

    fn col(values: &[Rational]) -> Matrix<Rational> {
        Matrix::column(values)
    }

    fn orthant2() -> GptSystem<Rational> {
        GptSystem::with_default_unit(ConeOracle::orthant(2)).unwrap()
    }

    fn worked_measurement() -> Measurement<Rational> {
        Measurement::new(vec![
            col(&[rat(1, 2), int(0)]),
            col(&[int(0), rat(1, 2)]),
            col(&[rat(1, 2), rat(1, 2)]),
        ])
    }

    #[test]
    fn classical_distributions() {
        let sys = orthant2();
        let (_, m) = canonical_classical(2);
        let m = Measurement::new(m.effects.iter().map(Matrix::from_f64).collect());
        assert_eq!(outcome_distribution(&col(&[int(1), int(0)]), &m).unwrap(), vec![int(1), int(0)]);
        let p = rat(3, 10);
        let omega = col(&[p.clone(), int(1) - &p]);
        sys.check_state(&omega).unwrap();
        assert_eq!(outcome_distribution(&omega, &m).unwrap(), vec![p.clone(), int(1) - &p]);
    }

    #[test]
    fn qubit_distribution() {
        let e1 = Matrix::outer(&[1.0, 0.0]);
        let e2 = Matrix::outer(&[0.0, 1.0]);
        let m = Measurement::new(vec![e1.clone(), e2]);
        assert_eq!(outcome_distribution(&e1, &m).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn refinement_of_worked_example() {
        let sys = orthant2();
        let m = worked_measurement();
        m.validate(&sys).unwrap();
        let (refined, map) = refine_measurement(&m, &sys).unwrap();
        assert_eq!(
            refined.effects,
            vec![
                col(&[rat(1, 2), int(0)]),
                col(&[int(0), rat(1, 2)]),
                col(&[rat(1, 2), int(0)]),
                col(&[int(0), rat(1, 2)]),
            ]
        );
        assert_eq!(map, vec![0, 1, 2, 2]);
    }

    #[test]
    fn already_extremal_is_unchanged() {
        let sys = orthant2();
        let m = Measurement::new(vec![col(&[int(1), int(0)]), col(&[int(0), int(1)])]);
        let (refined, map) = refine_measurement(&m, &sys).unwrap();
        assert_eq!(refined, m);
        assert_eq!(map, vec![0, 1]);
    }

    #[test]
    fn qubit_half_identity_refines_to_four() {
        let sys = GptSystem::with_default_unit(ConeOracle::psd(2)).unwrap();
        let half = Matrix::<f64>::identity(2).scale(&0.5);
        let (refined, map) = refine_measurement(&Measurement::new(vec![half.clone(), half]), &sys).unwrap();
        assert_eq!(refined.len(), 4);
        assert_eq!(map, vec![0, 0, 1, 1]);
        for e in &refined.effects {
            assert!((e.inner(&Matrix::identity(2)) - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn one_peeling_step() {
        let sys = orthant2();
        let (refined, _) = refine_measurement(&worked_measurement(), &sys).unwrap();
        let mix = decompose_measurement(&refined, &sys).unwrap();
        let zero = col(&[int(0), int(0)]);
        assert_eq!(mix.parts.len(), 2);
        assert_eq!(mix.parts[0].0, rat(1, 2));
        assert_eq!(
            mix.parts[0].1.effects,
            vec![col(&[int(1), int(0)]), col(&[int(0), int(1)]), zero.clone(), zero.clone()]
        );
        assert_eq!(mix.parts[1].0, rat(1, 2));
        assert_eq!(
            mix.parts[1].1.effects,
            vec![zero.clone(), zero, col(&[int(1), int(0)]), col(&[int(0), int(1)])]
        );
        assert_eq!(mix.recombine(), refined.effects);
    }

    #[test]
    fn few_effects_single_part() {
        let sys = orthant2();
        let m = Measurement::new(vec![col(&[int(1), int(0)]), col(&[int(0), int(1)])]);
        let mix = decompose_measurement(&m, &sys).unwrap();
        assert_eq!(mix.parts.len(), 1);
        assert_eq!(mix.parts[0].0, int(1));
    }

    #[test]
    fn unrefined_measurement_rejected() {
        let sys = orthant2();
        assert!(matches!(
            decompose_measurement(&worked_measurement(), &sys),
            Err(Error::InvalidMeasurement(_))
        ));
    }

    fn h2(p: f64) -> f64 {
        -plogp(p) - plogp(1.0 - p)
    }

    #[test]
    fn mutual_information_examples() {
        let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(mutual_information(&[0.5, 0.5], &id), 1.0);
        let constant = vec![vec![0.3, 0.7], vec![0.3, 0.7]];
        assert!(mutual_information(&[0.5, 0.5], &constant).abs() < 1e-15);
        let bsc = vec![vec![0.89, 0.11], vec![0.11, 0.89]];
        let i = mutual_information(&[0.5, 0.5], &bsc);
        assert!((i - (1.0 - h2(0.11))).abs() < 1e-12);
        // 1 - h(0.11) = 0.500084041835472, evaluated independently
        assert!((i - 0.500_084_041_835_472).abs() < 1e-12);
    }

    #[test]
    fn blahut_arimoto_on_z_channel() {
        // Z channel with crossover 1/2: capacity log2(5/4)
        let w = vec![vec![1.0, 0.0], vec![0.5, 0.5]];
        let cap = blahut_arimoto(&w, 10_000, 1e-13);
        assert!((cap.value - (1.25f64).log2()).abs() < 1e-9);
        assert!((cap.prior[1] - 0.4).abs() < 1e-6);
    }

    #[test]
    fn capacity_bounds() {
        assert_eq!(capacity_bound(&ConeOracle::orthant(2)), 1.0);
        assert!((capacity_bound(&ConeOracle::orthant(3)) - 3f64.log2()).abs() < 1e-15);
        assert_eq!(capacity_bound(&ConeOracle::completely_positive(3)), 6f64.log2());
    }

    #[test]
    fn canonical_classical_is_exact() {
        for n in 1..=6 {
            let (ens, m) = canonical_classical(n);
            let i = ensemble_information(&ens, &m);
            assert!((i - (n as f64).log2()).abs() < 1e-12);
        }
        let (ens, m) = canonical_classical(2);
        assert_eq!(ensemble_information(&ens, &m), 1.0);
    }

    #[test]
    fn search_reaches_classical_optimum() {
        let sys = GptSystem::with_default_unit(ConeOracle::orthant(4)).unwrap();
        let res = holevo_capacity_lower(&sys, &SearchConfig::new(4, 4, 8, 11)).unwrap();
        assert!(res.value >= 2.0 - 1e-6, "got {}", res.value);
        assert!(res.value <= 2.0 + 1e-9);
        let again = holevo_capacity_lower(&sys, &SearchConfig::new(4, 4, 8, 11)).unwrap();
        assert_eq!(res, again);
    }

    #[test]
    fn qubit_search_respects_bound() {
        let sys = GptSystem::with_default_unit(ConeOracle::psd(2)).unwrap();
        let res = holevo_capacity_lower(&sys, &SearchConfig::new(3, 3, 4, 5)).unwrap();
        assert!(res.value <= res.bound + 1e-9);
        assert!(res.value > 0.5);
        res.measurement.validate(&sys).unwrap();
        for s in &res.ensemble.states {
            sys.check_state(&s.clone()).unwrap();
        }
    }
}
