//! Factor sequences `F_0, F_1, ..., F_{T-1}`.

use std::borrow::Cow;
use std::fmt;
use std::sync::Arc;

use crate::matrix::CirculationMatrix;
use crate::ModelError;

/// How a schedule was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    Stationary,
    Periodic,
    RegimeSwitching,
    /// An explicit list of matrices.
    Trace,
    IdentityPadded,
}

impl ScheduleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScheduleKind::Stationary => "stationary",
            ScheduleKind::Periodic => "periodic",
            ScheduleKind::RegimeSwitching => "regime-switching",
            ScheduleKind::Trace => "trace",
            ScheduleKind::IdentityPadded => "identity-padded",
        }
    }
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Identity,
    Pool(u32),
}

/// The factor used at one step.
#[derive(Debug, Clone, Copy)]
pub enum StepFactor<'a> {
    /// An idle step: nobody trades and every agent keeps its wealth.
    Identity,
    Matrix(&'a CirculationMatrix),
}

/// A finite sequence of circulation matrices sharing one dimension.
///
/// Matrices live in a shared pool and each step refers to a pool entry or to
/// the identity, so long schedules over a few distinct matrices stay small.
#[derive(Debug, Clone)]
pub struct Schedule {
    kind: ScheduleKind,
    n: usize,
    pool: Vec<Arc<CirculationMatrix>>,
    slots: Vec<Slot>,
}

impl Schedule {
    /// `steps` copies of one matrix.
    pub fn stationary(matrix: Arc<CirculationMatrix>, steps: u64) -> Result<Self, ModelError> {
        let n = matrix.n();
        Self::build(ScheduleKind::Stationary, n, vec![matrix], vec![Slot::Pool(0); steps as usize])
    }

    /// `steps` idle steps.
    pub fn identity(n: usize, steps: u64) -> Result<Self, ModelError> {
        if n == 0 {
            return Err(ModelError::EmptyEconomy);
        }
        Self::build(ScheduleKind::IdentityPadded, n, Vec::new(), vec![Slot::Identity; steps as usize])
    }

    /// The given matrices in order, one per step.
    pub fn from_matrices(matrices: Vec<CirculationMatrix>) -> Result<Self, ModelError> {
        let n = matrices.first().map(|m| m.n()).ok_or(ModelError::EmptyEconomy)?;
        let slots = (0..matrices.len() as u32).map(Slot::Pool).collect();
        Self::build(
            ScheduleKind::Trace,
            n,
            matrices.into_iter().map(Arc::new).collect(),
            slots,
        )
    }

    /// Assembles a schedule from a pool and per-step pool indices, `None`
    /// meaning an idle step.
    pub fn from_pool(
        kind: ScheduleKind,
        n: usize,
        pool: Vec<Arc<CirculationMatrix>>,
        steps: impl IntoIterator<Item = Option<usize>>,
    ) -> Result<Self, ModelError> {
        let slots = steps
            .into_iter()
            .map(|s| match s {
                Some(k) => Slot::Pool(k as u32),
                None => Slot::Identity,
            })
            .collect();
        Self::build(kind, n, pool, slots)
    }

    fn build(
        kind: ScheduleKind,
        n: usize,
        pool: Vec<Arc<CirculationMatrix>>,
        slots: Vec<Slot>,
    ) -> Result<Self, ModelError> {
        if n == 0 {
            return Err(ModelError::EmptyEconomy);
        }
        for m in &pool {
            if m.n() != n {
                return Err(ModelError::DimensionMismatch {
                    expected: n,
                    found: m.n(),
                });
            }
            if !m.is_valid() {
                return Err(ModelError::InvalidMatrix(Box::new(m.validate())));
            }
        }
        debug_assert!(slots.iter().all(|s| match s {
            Slot::Pool(k) => (*k as usize) < pool.len(),
            Slot::Identity => true,
        }));
        Ok(Self {
            kind,
            n,
            pool,
            slots,
        })
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of steps `T`.
    pub fn len(&self) -> u64 {
        self.slots.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn pool(&self) -> &[Arc<CirculationMatrix>] {
        &self.pool
    }

    /// Factor of step `tau`, which maps `x(tau)` to `x(tau + 1)`.
    pub fn get(&self, tau: u64) -> Option<StepFactor<'_>> {
        self.slots.get(tau as usize).map(|s| match *s {
            Slot::Identity => StepFactor::Identity,
            Slot::Pool(k) => StepFactor::Matrix(&self.pool[k as usize]),
        })
    }

    /// Like [`get`](Self::get) but materializes idle steps as identity
    /// matrices.
    pub fn matrix(&self, tau: u64) -> Option<Cow<'_, CirculationMatrix>> {
        self.get(tau).map(|f| match f {
            StepFactor::Identity => {
                Cow::Owned(CirculationMatrix::identity(self.n).expect("n >= 1"))
            }
            StepFactor::Matrix(m) => Cow::Borrowed(m),
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = StepFactor<'_>> + '_ {
        (0..self.len()).map(move |t| self.get(t).expect("in range"))
    }

    /// Steps whose factor is the identity.
    pub fn idle_steps(&self) -> usize {
        self.slots.iter().filter(|s| **s == Slot::Identity).count()
    }
}
