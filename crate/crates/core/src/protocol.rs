//! One-way protocols with nonnegative outputs and their equivalence with
//! cone factorizations: compilation in both directions, exact expectations
//! and Monte Carlo simulation.

use rand::Rng;

use crate::cones::{contains, min_scale_dominating, ConeKind, ConeOracle, Matrix, Scalar};
use crate::error::{Error, Result};
use crate::gpt::{outcome_distribution, Measurement};
use crate::polytopes::ConeElement;

/// `C[x][y] = ⟨ω̃(x), r(y)⟩` with `ω̃(x)` in `cone` and `r(y)` in its dual.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeFactorization<T> {
    pub cone: ConeOracle,
    pub states: Vec<ConeElement<T>>,
    pub responses: Vec<ConeElement<T>>,
}

impl<T: Scalar> ConeFactorization<T> {
    pub fn matrix(&self) -> Matrix<T> {
        Matrix::from_fn(self.states.len(), self.responses.len(), |x, y| {
            self.states[x].value.inner(&self.responses[y].value)
        })
    }

    /// Membership of every element; CP states need certificates.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let dual = self.cone.dual();
        for (what, elems, k) in [("state", &self.states, &self.cone), ("response", &self.responses, &dual)] {
            for (i, e) in elems.iter().enumerate() {
                let m = contains(k, &e.value, tol, e.certificate.as_ref())?;
                if !m.is_member() {
                    return Err(Error::Invariant(format!(
                        "{what} {i} is not certified in the {} cone ({m:?})",
                        k.kind.name()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Alice sends the bit `b` (1 with probability `send_prob[x]`) and, when
/// `b = 1`, the normalized state `states[x]`; Bob measures `measurements[y]`
/// and outputs `outputs[y][i]` on outcome `i`, or 0 when `b = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneWayProtocol<T> {
    pub cone: ConeOracle,
    pub unit: Matrix<T>,
    pub states: Vec<ConeElement<T>>,
    pub send_prob: Vec<T>,
    pub measurements: Vec<Measurement<T>>,
    pub outputs: Vec<Vec<T>>,
    pub lambda: T,
    pub mu: T,
}

impl<T: Scalar> OneWayProtocol<T> {
    pub fn num_inputs(&self) -> (usize, usize) {
        (self.states.len(), self.measurements.len())
    }

    /// Largest output Bob can produce.
    pub fn max_output(&self) -> f64 {
        self.outputs
            .iter()
            .flatten()
            .map(Scalar::to_f64)
            .fold(0.0, f64::max)
    }

    /// Checks normalization, cone membership of states and effects, effect
    /// sums, abort probabilities and output signs.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let dual = self.cone.dual();
        for (x, (s, p)) in self.states.iter().zip(&self.send_prob).enumerate() {
            if *p < T::zero() || *p > T::one() {
                return Err(Error::Invariant(format!("send probability {x} outside [0,1]")));
            }
            let norm = self.unit.inner(&s.value).to_f64();
            if (norm - 1.0).abs() > tol.max(1e-12) {
                return Err(Error::Invariant(format!("state {x} has ⟨u, ω⟩ = {norm}")));
            }
            if !contains(&self.cone, &s.value, tol, s.certificate.as_ref())?.is_member() {
                return Err(Error::Invariant(format!("state {x} is not certified in the state cone")));
            }
        }
        for (y, (m, out)) in self.measurements.iter().zip(&self.outputs).enumerate() {
            if m.len() != out.len() {
                return Err(Error::Invariant(format!("measurement {y} has {} outputs for {} effects", out.len(), m.len())));
            }
            if out.iter().any(|r| *r < T::zero()) {
                return Err(Error::Invariant(format!("negative output for input y = {y}")));
            }
            for (i, e) in m.effects.iter().enumerate() {
                if contains(&dual, e, tol, None)?.is_not_member() {
                    return Err(Error::Invariant(format!("effect {i} of measurement {y} leaves the effect cone")));
                }
            }
            let err = m.sum(self.unit.shape()).sub(&self.unit).max_abs();
            if err > tol.max(1e-12) {
                return Err(Error::Invariant(format!("effects of measurement {y} miss the unit by {err:e}")));
            }
        }
        Ok(())
    }

    /// Output values and their probabilities in cell `(x, y)`, including
    /// the abort branch.
    pub fn cell_distribution(&self, x: usize, y: usize) -> Result<Vec<(f64, f64)>> {
        let p = self.send_prob[x].to_f64();
        let mut dist = vec![(0.0, 1.0 - p)];
        let m = &self.measurements[y];
        let probs = outcome_distribution(&self.states[x].value.to_f64(), &to_f64_measurement(m))?;
        for (q, r) in probs.iter().zip(&self.outputs[y]) {
            dist.push((r.to_f64(), p * q));
        }
        Ok(dist)
    }
}

fn to_f64_measurement<T: Scalar>(m: &Measurement<T>) -> Measurement<f64> {
    Measurement::new(m.effects.iter().map(Matrix::to_f64).collect())
}

/// A fixed normalized state used when `ω̃(x) = 0`.
fn fallback_state<T: Scalar>(cone: &ConeOracle, unit: &Matrix<T>) -> ConeElement<T> {
    let (r, _) = cone.element_shape();
    let mut v = Matrix::zeros(r, if cone.is_matrix_cone() { r } else { 1 });
    v[(0, 0)] = T::one() / unit[(0, 0)].clone();
    if cone.kind == ConeKind::CompletelyPositive {
        let mut z = vec![T::zero(); r];
        z[0] = T::one();
        let cert = crate::cones::CpCertificate {
            factors: vec![z],
            weights: vec![T::one() / unit[(0, 0)].clone()],
        };
        return ConeElement::certified(v, cert);
    }
    ConeElement::plain(v)
}

/// Compiles a factorization into the canonical two-outcome protocol:
/// `λ = max_x ⟨u, ω̃(x)⟩`, `p(b=1|x) = ⟨u, ω̃(x)⟩/λ`, `μ` the least scale with
/// `μu ≥ λr(y)` for all `y`, `e₁ = λr/μ`, `e₀ = u - e₁`, and outputs `(0, μ)`.
pub fn protocol_from_factorization<T: Scalar>(f: &ConeFactorization<T>, unit: &Matrix<T>) -> Result<OneWayProtocol<T>> {
    if f.states.is_empty() || f.responses.is_empty() {
        return Err(Error::InvalidInput("empty factorization".into()));
    }
    let dual = f.cone.dual();
    dual.check_shape(unit)?;
    let norms: Vec<T> = f.states.iter().map(|s| unit.inner(&s.value)).collect();
    let mut lambda = norms.iter().fold(T::zero(), |m, v| if *v > m { v.clone() } else { m });
    if lambda.is_zero() {
        lambda = T::one();
    }
    let mut states = Vec::with_capacity(f.states.len());
    let mut send_prob = Vec::with_capacity(f.states.len());
    for (s, norm) in f.states.iter().zip(&norms) {
        if norm.is_zero() || (!T::EXACT && norm.to_f64() <= 0.0) {
            states.push(fallback_state(&f.cone, unit));
            send_prob.push(T::zero());
            continue;
        }
        let inv = T::one() / norm.clone();
        states.push(ConeElement {
            value: s.value.scale(&inv),
            certificate: s.certificate.as_ref().map(|c| c.scaled(&inv)),
        });
        send_prob.push(norm.clone() / &lambda);
    }
    let mut mu = T::zero();
    for r in &f.responses {
        let m = min_scale_dominating(&r.value.scale(&lambda), unit, &dual)?;
        if m > mu {
            mu = m;
        }
    }
    if mu.is_zero() {
        mu = T::one();
    }
    let scale = lambda.clone() / &mu;
    let mut measurements = Vec::with_capacity(f.responses.len());
    let mut outputs = Vec::with_capacity(f.responses.len());
    for r in &f.responses {
        let e1 = r.value.scale(&scale);
        let e0 = unit.sub(&e1);
        measurements.push(Measurement::new(vec![e0, e1]));
        outputs.push(vec![T::zero(), mu.clone()]);
    }
    Ok(OneWayProtocol {
        cone: f.cone,
        unit: unit.clone(),
        states,
        send_prob,
        measurements,
        outputs,
        lambda,
        mu,
    })
}

/// `E(r|xy) = p(b=1|x) Σ_i r(i,y) ⟨ω(x), e_i(y)⟩`.
pub fn exact_expectation<T: Scalar>(p: &OneWayProtocol<T>) -> Matrix<T> {
    let (nx, ny) = p.num_inputs();
    Matrix::from_fn(nx, ny, |x, y| {
        let omega = &p.states[x].value;
        let sum = p.measurements[y]
            .effects
            .iter()
            .zip(&p.outputs[y])
            .fold(T::zero(), |acc, (e, r)| acc + omega.inner(e) * r);
        sum * &p.send_prob[x]
    })
}

/// One run of the protocol on inputs `(x, y)`.
pub fn sample<T: Scalar, R: Rng + ?Sized>(p: &OneWayProtocol<T>, x: usize, y: usize, rng: &mut R) -> Result<f64> {
    Ok(draw(&p.cell_distribution(x, y)?, rng))
}

fn draw<R: Rng + ?Sized>(dist: &[(f64, f64)], rng: &mut R) -> f64 {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for &(value, prob) in dist {
        acc += prob;
        if u < acc {
            return value;
        }
    }
    // rounding left a sliver above the cumulative sum
    dist.iter().rev().find(|(_, q)| *q > 0.0).map_or(0.0, |(v, _)| *v)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarlo {
    pub mean: f64,
    /// `max_output / sqrt(N)`.
    pub std_err: f64,
    pub samples: usize,
}

/// Empirical mean of `samples` runs in cell `(x, y)`.
pub fn monte_carlo<T: Scalar, R: Rng + ?Sized>(
    p: &OneWayProtocol<T>,
    x: usize,
    y: usize,
    samples: usize,
    rng: &mut R,
) -> Result<MonteCarlo> {
    let dist = p.cell_distribution(x, y)?;
    let total: f64 = (0..samples).map(|_| draw(&dist, rng)).sum();
    let n = samples.max(1) as f64;
    Ok(MonteCarlo {
        mean: total / n,
        std_err: p.max_output() / n.sqrt(),
        samples,
    })
}

/// `ω̃(x) = p(b=1|x) ω(x)` and `r(y) = Σ_i r(i,y) e_i(y)`.
pub fn factorization_from_protocol<T: Scalar>(p: &OneWayProtocol<T>) -> Result<ConeFactorization<T>> {
    for (y, out) in p.outputs.iter().enumerate() {
        if let Some(i) = out.iter().position(|r| *r < T::zero()) {
            return Err(Error::InvalidInput(format!("output r({i},{y}) is negative")));
        }
    }
    let states = p
        .states
        .iter()
        .zip(&p.send_prob)
        .map(|(s, prob)| ConeElement {
            value: s.value.scale(prob),
            certificate: s.certificate.as_ref().map(|c| c.scaled(prob)),
        })
        .collect();
    let responses = p
        .measurements
        .iter()
        .zip(&p.outputs)
        .map(|(m, out)| {
            let mut r = Matrix::zeros(p.unit.rows(), p.unit.cols());
            for (e, v) in m.effects.iter().zip(out) {
                r.add_scaled(v, e);
            }
            ConeElement::plain(r)
        })
        .collect();
    Ok(ConeFactorization {
        cone: p.cone,
        states,
        responses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::{int, Rational};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn col(v: &[i64]) -> Matrix<Rational> {
        Matrix::column(&v.iter().map(|&x| int(x)).collect::<Vec<_>>())
    }

    fn swap_factorization() -> ConeFactorization<Rational> {
        ConeFactorization {
            cone: ConeOracle::orthant(2),
            states: vec![ConeElement::plain(col(&[0, 1])), ConeElement::plain(col(&[1, 0]))],
            responses: vec![ConeElement::plain(col(&[1, 0])), ConeElement::plain(col(&[0, 1]))],
        }
    }

    #[test]
    fn swap_matrix_protocol() {
        let f = swap_factorization();
        let u = col(&[1, 1]);
        let p = protocol_from_factorization(&f, &u).unwrap();
        assert_eq!(p.lambda, int(1));
        assert_eq!(p.mu, int(1));
        assert_eq!(p.measurements[0].effects[1], col(&[1, 0]));
        assert_eq!(p.measurements[1].effects[1], col(&[0, 1]));
        p.validate(0.0).unwrap();
        let expected = Matrix::from_rows(&[vec![int(0), int(1)], vec![int(1), int(0)]]).unwrap();
        assert_eq!(exact_expectation(&p), expected);
        let back = factorization_from_protocol(&p).unwrap();
        assert_eq!(back.matrix(), f.matrix());
    }

    #[test]
    fn scaled_factorization_round_trips() {
        // λ = 5 and μ = 15 differ from 1, so the output scale matters
        let f = ConeFactorization {
            cone: ConeOracle::orthant(2),
            states: vec![ConeElement::plain(col(&[2, 3])), ConeElement::plain(col(&[1, 0]))],
            responses: vec![ConeElement::plain(col(&[3, 1])), ConeElement::plain(col(&[0, 2]))],
        };
        let p = protocol_from_factorization(&f, &col(&[1, 1])).unwrap();
        assert_eq!(p.lambda, int(5));
        assert_eq!(p.mu, int(15));
        p.validate(0.0).unwrap();
        assert_eq!(exact_expectation(&p), f.matrix());
        assert_eq!(factorization_from_protocol(&p).unwrap().matrix(), f.matrix());
    }

    #[test]
    fn zero_factorization_always_aborts() {
        let f = ConeFactorization {
            cone: ConeOracle::orthant(2),
            states: vec![ConeElement::plain(col(&[0, 0])); 2],
            responses: vec![ConeElement::plain(col(&[1, 1]))],
        };
        let p = protocol_from_factorization(&f, &col(&[1, 1])).unwrap();
        assert!(p.send_prob.iter().all(|q| *q == int(0)));
        assert_eq!(exact_expectation(&p), Matrix::zeros(2, 1));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..100).all(|_| sample(&p, 0, 0, &mut rng).unwrap() == 0.0));
    }

    #[test]
    fn deterministic_cell_always_pays_out() {
        let p = protocol_from_factorization(&swap_factorization(), &col(&[1, 1])).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!((0..100).all(|_| sample(&p, 0, 1, &mut rng).unwrap() == 1.0));
        assert!((0..100).all(|_| sample(&p, 0, 0, &mut rng).unwrap() == 0.0));
    }

    #[test]
    fn multi_outcome_ingestion() {
        let e = |k: usize| {
            let mut v = vec![int(0); 3];
            v[k] = int(1);
            Matrix::column(&v)
        };
        let p = OneWayProtocol {
            cone: ConeOracle::orthant(3),
            unit: col(&[1, 1, 1]),
            states: vec![ConeElement::plain(e(1))],
            send_prob: vec![int(1)],
            measurements: vec![Measurement::new(vec![e(0), e(1), e(2)])],
            outputs: vec![vec![int(0), int(2), int(5)]],
            lambda: int(1),
            mu: int(1),
        };
        let f = factorization_from_protocol(&p).unwrap();
        assert_eq!(f.responses[0].value, col(&[0, 2, 5]));
        assert_eq!(f.matrix()[(0, 0)], exact_expectation(&p)[(0, 0)]);

        let mut bad = p.clone();
        bad.outputs[0][1] = int(-1);
        assert!(factorization_from_protocol(&bad).is_err());
    }

    #[test]
    fn monte_carlo_matches_expectation() {
        let f = ConeFactorization {
            cone: ConeOracle::orthant(2),
            states: vec![ConeElement::plain(col(&[1, 1]))],
            responses: vec![ConeElement::plain(col(&[1, 0]))],
        };
        let p = protocol_from_factorization(&f, &col(&[1, 1])).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mc = monte_carlo(&p, 0, 0, 200_000, &mut rng).unwrap();
        assert!((mc.mean - 1.0).abs() <= 4.0 * mc.std_err, "{mc:?}");
    }
}
