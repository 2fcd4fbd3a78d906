//! Supports, hypothesis classes, version spaces, closures, ERM, and closure dimension.

mod dimension;
mod explicit;
pub(crate) mod numth;
mod parse;
mod support;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::metric_core::{Metric, MetricError, Point, Scalar, SeparationWitness};

pub use dimension::{
    bruteforce_profile, closure_dimension_bruteforce, closure_dimension_finite, verify_dim_witness, BruteForceReport,
    DimResult,
};
pub use explicit::{ExplicitClass, Hypothesis};
pub use numth::{is_prime, odd_part, odd_primes, root_base};
pub use parse::{parse_class, render_class};
pub use support::{BasisFamily, Family, IndexSet, Lattice, LatticeKind, PointIter, PowerSeq, Support};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HypothesisError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("closure of an inconsistent sample")]
    BotClosure,
    #[error("undecidable intersection: {0}")]
    UndecidableIntersection(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("class has {0} members; at most 20 supported")]
    TooManyMembers(usize),
    #[error("invalid: {0}")]
    Invalid(String),
    #[error("line {line}: {msg}")]
    ParseAt { line: usize, msg: String },
    #[error("{0} requires an explicit class")]
    NeedsExplicit(&'static str),
}

/// Labeled example `(x, y)`.
pub type Labeled = (Point, bool);

/// A committed target: membership plus an enumeration of its support.
pub trait Concept: Send + Sync {
    fn id(&self) -> String;
    fn contains(&self, p: &Point) -> bool;
    /// Enumeration of the support; every point is eventually listed.
    fn points(&self) -> PointIter;
}

/// Outcome of the uniformly-unbounded-support check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UusResult {
    Satisfied(Vec<SeparationWitness>),
    ViolatedBy(String),
    UnknownAtBudget,
}

impl UusResult {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, UusResult::Satisfied(_))
    }
}

impl fmt::Display for UusResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UusResult::Satisfied(w) => write!(f, "satisfied({} witnesses)", w.len()),
            UusResult::ViolatedBy(id) => write!(f, "violated_by({id})"),
            UusResult::UnknownAtBudget => write!(f, "unknown"),
        }
    }
}

/// Query interface shared by explicit and analytic classes.
pub trait ClassOracle: Send + Sync {
    fn name(&self) -> String;
    fn metric(&self) -> &Metric;
    /// Some member contains every sample point.
    fn consistent(&self, sample: &[Point]) -> bool;
    /// Intersection of the consistent supports; `None` when none is consistent.
    fn closure(&self, sample: &[Point]) -> Result<Option<Support>, HypothesisError>;
    /// Minimum misclassification count over the class.
    fn erm(&self, labeled: &[Labeled]) -> Result<usize, HypothesisError>;
    /// Extra centres admitted when covering subsets of the space.
    fn centers(&self) -> Vec<Point> {
        Vec::new()
    }
    /// Dense enumeration of the region the supports live in.
    fn universe(&self) -> PointIter;
    fn uus(&self, _r: &Scalar) -> UusResult {
        UusResult::UnknownAtBudget
    }
    fn closure_contains(&self, sample: &[Point], p: &Point) -> Result<Option<bool>, HypothesisError> {
        Ok(self.closure(sample)?.map(|s| s.contains(p)))
    }
}

#[derive(Clone)]
pub enum HypothesisClass {
    Explicit(Arc<ExplicitClass>),
    Intensional(Arc<dyn ClassOracle>),
}

impl HypothesisClass {
    pub fn explicit(class: ExplicitClass) -> Self {
        HypothesisClass::Explicit(Arc::new(class))
    }

    pub fn oracle(&self) -> &dyn ClassOracle {
        match self {
            HypothesisClass::Explicit(c) => c.as_ref(),
            HypothesisClass::Intensional(o) => o.as_ref(),
        }
    }

    pub fn as_explicit(&self) -> Option<&ExplicitClass> {
        match self {
            HypothesisClass::Explicit(c) => Some(c),
            HypothesisClass::Intensional(_) => None,
        }
    }

    pub fn name(&self) -> String {
        self.oracle().name()
    }

    pub fn metric(&self) -> &Metric {
        self.oracle().metric()
    }

    pub fn centers(&self) -> Vec<Point> {
        self.oracle().centers()
    }
}

impl fmt::Debug for HypothesisClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HypothesisClass({})", self.name())
    }
}

pub fn version_space_nonempty(class: &HypothesisClass, sample: &[Point]) -> bool {
    class.oracle().consistent(sample)
}

/// `None` stands for the empty version space.
pub fn closure_contains(class: &HypothesisClass, sample: &[Point], p: &Point) -> Result<Option<bool>, HypothesisError> {
    class.oracle().closure_contains(sample, p)
}

/// First `n` points of the closure in canonical order.
pub fn closure_enumerate(class: &HypothesisClass, sample: &[Point], n: usize) -> Result<Vec<Point>, HypothesisError> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let closure = class.oracle().closure(sample)?.ok_or(HypothesisError::BotClosure)?;
    Ok(closure.enumerate(n))
}

pub fn erm_oracle(class: &HypothesisClass, sample: &[Labeled]) -> Result<usize, HypothesisError> {
    class.oracle().erm(sample)
}

/// Closure membership decided by one ERM call on `positives + (p, 0)`.
pub fn closure_via_erm(class: &HypothesisClass, positives: &[Point], p: &Point) -> Result<bool, HypothesisError> {
    if !class.oracle().consistent(positives) {
        return Err(HypothesisError::Precondition("positives admit no consistent hypothesis".into()));
    }
    let mut s: Vec<Labeled> = positives.iter().map(|x| (x.clone(), true)).collect();
    s.push((p.clone(), false));
    Ok(class.oracle().erm(&s)? >= 1)
}

pub fn uus_check(class: &HypothesisClass, r: &Scalar) -> UusResult {
    class.oracle().uus(r)
}
