use std::sync::Arc;

use rand::Rng;

use super::GeneratorError;
use crate::matrix::CirculationMatrix;
use crate::rng::{stream_rng, STREAM_SCHEDULE};
use crate::schedule::{Schedule, ScheduleKind};
use crate::ModelError;

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleSpecKind {
    /// The single input matrix at every step.
    Stationary,
    /// The input matrices in a repeating cycle.
    Periodic,
    /// A Markov chain over the input matrices; `transitions[a][b]` is the
    /// probability of moving from regime `a` to regime `b` after a step.
    RegimeSwitching {
        transitions: Vec<Vec<f64>>,
        initial: usize,
    },
    /// The single input matrix, replaced by the identity with probability
    /// `idle_probability` at each step.
    IdentityPadded { idle_probability: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleSpec {
    pub kind: ScheduleSpecKind,
    pub steps: u64,
    pub seed: u64,
}

impl ScheduleSpec {
    pub fn new(kind: ScheduleSpecKind, steps: u64, seed: u64) -> Self {
        Self { kind, steps, seed }
    }

    /// Checks the spec against the number of matrices it will be given.
    pub fn validate(&self, matrices: usize) -> Result<(), GeneratorError> {
        match &self.kind {
            ScheduleSpecKind::Stationary | ScheduleSpecKind::IdentityPadded { .. }
                if matrices != 1 =>
            {
                return Err(GeneratorError::spec(
                    "schedule.kind",
                    format!("needs exactly one matrix, got {matrices}"),
                ));
            }
            ScheduleSpecKind::Periodic if matrices == 0 => {
                return Err(GeneratorError::spec("schedule.kind", "periodic needs at least one matrix"));
            }
            ScheduleSpecKind::RegimeSwitching {
                transitions,
                initial,
            } => {
                if transitions.len() != matrices || matrices == 0 {
                    return Err(GeneratorError::spec(
                        "schedule.transitions",
                        format!("{} rows for {matrices} regimes", transitions.len()),
                    ));
                }
                for (a, row) in transitions.iter().enumerate() {
                    let sum: f64 = row.iter().sum();
                    if row.len() != matrices
                        || row.iter().any(|p| !(0.0..=1.0).contains(p))
                        || (sum - 1.0).abs() > 1e-9
                    {
                        return Err(GeneratorError::spec(
                            "schedule.transitions",
                            format!("row {} is not a probability vector over {matrices} regimes", a + 1),
                        ));
                    }
                }
                if *initial >= matrices {
                    return Err(GeneratorError::spec(
                        "schedule.initial_regime",
                        format!("regime {} does not exist", initial + 1),
                    ));
                }
            }
            ScheduleSpecKind::IdentityPadded { idle_probability }
                if !(0.0..=1.0).contains(idle_probability) =>
            {
                return Err(GeneratorError::spec(
                    "schedule.idle_probability",
                    format!("must lie in [0, 1], got {idle_probability}"),
                ));
            }
            _ => {}
        }
        Ok(())
    }
}

/// Lays out `spec.steps` factors over `matrices`. Random choices use the
/// schedule stream of `spec.seed`.
pub fn generate_schedule(
    spec: &ScheduleSpec,
    matrices: Vec<CirculationMatrix>,
) -> Result<Schedule, GeneratorError> {
    spec.validate(matrices.len())?;
    let n = matrices[0].n();
    if let Some(m) = matrices.iter().find(|m| m.n() != n) {
        return Err(ModelError::DimensionMismatch {
            expected: n,
            found: m.n(),
        }
        .into());
    }
    let pool: Vec<Arc<CirculationMatrix>> = matrices.into_iter().map(Arc::new).collect();
    let k = pool.len();
    let steps = spec.steps as usize;
    let mut rng = stream_rng(spec.seed, STREAM_SCHEDULE);
    let (kind, slots): (ScheduleKind, Vec<Option<usize>>) = match &spec.kind {
        ScheduleSpecKind::Stationary => (ScheduleKind::Stationary, vec![Some(0); steps]),
        ScheduleSpecKind::Periodic => (ScheduleKind::Periodic, (0..steps).map(|t| Some(t % k)).collect()),
        ScheduleSpecKind::RegimeSwitching {
            transitions,
            initial,
        } => {
            let mut regime = *initial;
            let mut slots = Vec::with_capacity(steps);
            for _ in 0..steps {
                slots.push(Some(regime));
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let row = &transitions[regime];
                // fall back to the last positive entry against rounding
                let mut next = row.iter().rposition(|&p| p > 0.0).unwrap_or(regime);
                for (b, &p) in row.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        next = b;
                        break;
                    }
                }
                regime = next;
            }
            (ScheduleKind::RegimeSwitching, slots)
        }
        ScheduleSpecKind::IdentityPadded { idle_probability } => {
            let p = *idle_probability;
            let slots = (0..steps)
                .map(|_| {
                    let u: f64 = rng.random();
                    if u < p {
                        None
                    } else {
                        Some(0)
                    }
                })
                .collect();
            (ScheduleKind::IdentityPadded, slots)
        }
    };
    Ok(Schedule::from_pool(kind, n, pool, slots)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::StepFactor;

    fn f() -> CirculationMatrix {
        CirculationMatrix::from_dense_columns(&[vec![0.5, 0.5], vec![0.2, 0.8]]).unwrap()
    }

    fn g() -> CirculationMatrix {
        CirculationMatrix::from_dense_columns(&[vec![0.9, 0.1], vec![0.6, 0.4]]).unwrap()
    }

    fn pool_index(s: &Schedule, t: u64) -> Option<usize> {
        match s.get(t).unwrap() {
            StepFactor::Identity => None,
            StepFactor::Matrix(m) => s.pool().iter().position(|p| std::ptr::eq(&**p, m)),
        }
    }

    #[test]
    fn stationary() {
        let s = generate_schedule(&ScheduleSpec::new(ScheduleSpecKind::Stationary, 3, 0), vec![f()])
            .unwrap();
        assert_eq!(s.len(), 3);
        for t in 0..3 {
            assert_eq!(*s.matrix(t).unwrap(), f());
        }
    }

    #[test]
    fn always_idle() {
        let spec = ScheduleSpec::new(ScheduleSpecKind::IdentityPadded { idle_probability: 1.0 }, 5, 9);
        let s = generate_schedule(&spec, vec![f()]).unwrap();
        assert_eq!(s.idle_steps(), 5);
        assert!((0..5).all(|t| s.matrix(t).unwrap().is_identity()));
        let spec = ScheduleSpec::new(ScheduleSpecKind::IdentityPadded { idle_probability: 0.0 }, 5, 9);
        assert_eq!(generate_schedule(&spec, vec![f()]).unwrap().idle_steps(), 0);
    }

    #[test]
    fn periodic_cycle() {
        let s = generate_schedule(&ScheduleSpec::new(ScheduleSpecKind::Periodic, 5, 0), vec![f(), g()])
            .unwrap();
        let got: Vec<_> = (0..5).map(|t| pool_index(&s, t)).collect();
        assert_eq!(got, vec![Some(0), Some(1), Some(0), Some(1), Some(0)]);
    }

    #[test]
    fn regime_switching_is_reproducible() {
        let kind = ScheduleSpecKind::RegimeSwitching {
            transitions: vec![vec![0.7, 0.3], vec![0.4, 0.6]],
            initial: 1,
        };
        let a = generate_schedule(&ScheduleSpec::new(kind.clone(), 200, 5), vec![f(), g()]).unwrap();
        let b = generate_schedule(&ScheduleSpec::new(kind.clone(), 200, 5), vec![f(), g()]).unwrap();
        let seq = |s: &Schedule| (0..200).map(|t| pool_index(s, t)).collect::<Vec<_>>();
        assert_eq!(seq(&a), seq(&b));
        assert_eq!(pool_index(&a, 0), Some(1));
        let c = generate_schedule(&ScheduleSpec::new(kind, 200, 6), vec![f(), g()]).unwrap();
        assert_ne!(seq(&a), seq(&c));
        // absorbing regime never left
        let stuck = ScheduleSpecKind::RegimeSwitching {
            transitions: vec![vec![1.0, 0.0], vec![0.5, 0.5]],
            initial: 0,
        };
        let s = generate_schedule(&ScheduleSpec::new(stuck, 50, 1), vec![f(), g()]).unwrap();
        assert!((0..50).all(|t| pool_index(&s, t) == Some(0)));
    }

    #[test]
    fn spec_errors() {
        let id3 = CirculationMatrix::identity(3).unwrap();
        assert!(matches!(
            generate_schedule(&ScheduleSpec::new(ScheduleSpecKind::Periodic, 2, 0), vec![f(), id3]),
            Err(GeneratorError::Model(ModelError::DimensionMismatch { .. }))
        ));
        assert!(generate_schedule(&ScheduleSpec::new(ScheduleSpecKind::Stationary, 2, 0), vec![f(), g()])
            .is_err());
        let bad = ScheduleSpecKind::RegimeSwitching {
            transitions: vec![vec![0.5, 0.4], vec![0.5, 0.5]],
            initial: 0,
        };
        assert!(generate_schedule(&ScheduleSpec::new(bad, 2, 0), vec![f(), g()]).is_err());
    }
}
