use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Gamma};

use super::GeneratorError;

/// Distribution of a buyer's total spending share `sigma_j` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Propensity {
    Constant(f64),
    Uniform { low: f64, high: f64 },
    Beta { alpha: f64, beta: f64 },
}

impl Default for Propensity {
    fn default() -> Self {
        Propensity::Beta {
            alpha: 2.0,
            beta: 2.0,
        }
    }
}

/// How `sigma_j` is split over the buyer's sellers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Allocation {
    Equal,
    /// Symmetric Dirichlet weights with the given concentration.
    Dirichlet { concentration: f64 },
}

impl Default for Allocation {
    fn default() -> Self {
        Allocation::Dirichlet { concentration: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpendingSpec {
    pub propensity: Propensity,
    pub allocation: Allocation,
}

impl SpendingSpec {
    pub fn new(propensity: Propensity, allocation: Allocation) -> Self {
        Self {
            propensity,
            allocation,
        }
    }

    pub fn constant(sigma: f64, allocation: Allocation) -> Self {
        Self::new(Propensity::Constant(sigma), allocation)
    }

    pub fn validate(&self) -> Result<(), GeneratorError> {
        match self.propensity {
            Propensity::Constant(s) => {
                if !(0.0..=1.0).contains(&s) {
                    return Err(GeneratorError::spec(
                        "spending.propensity.value",
                        format!("must lie in [0, 1], got {s}"),
                    ));
                }
            }
            Propensity::Uniform { low, high } => {
                if !(0.0..=1.0).contains(&low) || !(0.0..=1.0).contains(&high) || low > high {
                    return Err(GeneratorError::spec(
                        "spending.propensity",
                        format!("uniform bounds must satisfy 0 <= low <= high <= 1, got [{low}, {high}]"),
                    ));
                }
            }
            Propensity::Beta { alpha, beta } => {
                if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
                    return Err(GeneratorError::spec(
                        "spending.propensity",
                        format!("beta parameters must be positive, got ({alpha}, {beta})"),
                    ));
                }
            }
        }
        if let Allocation::Dirichlet { concentration } = self.allocation {
            if !(concentration > 0.0 && concentration.is_finite()) {
                return Err(GeneratorError::spec(
                    "spending.allocation.concentration",
                    format!("must be positive, got {concentration}"),
                ));
            }
        }
        Ok(())
    }

    pub(crate) fn sampler(&self) -> Result<SpendingSampler, GeneratorError> {
        self.validate()?;
        let propensity = match self.propensity {
            Propensity::Constant(s) => PropensitySampler::Constant(s),
            Propensity::Uniform { low, high } => PropensitySampler::Uniform(low, high),
            Propensity::Beta { alpha, beta } => PropensitySampler::Beta(
                Beta::new(alpha, beta).map_err(|e| GeneratorError::spec("spending.propensity", e.to_string()))?,
            ),
        };
        let allocation = match self.allocation {
            Allocation::Equal => AllocationSampler::Equal,
            Allocation::Dirichlet { concentration } => AllocationSampler::Dirichlet(
                Gamma::new(concentration, 1.0)
                    .map_err(|e| GeneratorError::spec("spending.allocation", e.to_string()))?,
            ),
        };
        Ok(SpendingSampler {
            propensity,
            allocation,
        })
    }
}

enum PropensitySampler {
    Constant(f64),
    Uniform(f64, f64),
    Beta(Beta<f64>),
}

enum AllocationSampler {
    Equal,
    Dirichlet(Gamma<f64>),
}

pub(crate) struct SpendingSampler {
    propensity: PropensitySampler,
    allocation: AllocationSampler,
}

impl SpendingSampler {
    pub(crate) fn sigma(&self, rng: &mut ChaCha8Rng) -> f64 {
        let s = match &self.propensity {
            PropensitySampler::Constant(s) => *s,
            PropensitySampler::Uniform(lo, hi) => lo + (hi - lo) * rng.random::<f64>(),
            PropensitySampler::Beta(b) => b.sample(rng),
        };
        s.clamp(0.0, 1.0)
    }

    /// Fills `weights` (one per seller) with non-negative values summing to 1.
    pub(crate) fn weights(&self, rng: &mut ChaCha8Rng, weights: &mut [f64]) {
        let d = weights.len();
        if d == 0 {
            return;
        }
        if let AllocationSampler::Dirichlet(g) = &self.allocation {
            let mut total = 0.0;
            for w in weights.iter_mut() {
                *w = g.sample(rng);
                total += *w;
            }
            if total > 0.0 && total.is_finite() {
                for w in weights.iter_mut() {
                    *w /= total;
                }
                return;
            }
        }
        weights.fill(1.0 / d as f64);
    }
}
