//! Generator algorithms and adversary constructions as stateful step functions.

mod adversaries;
mod generators;
mod novelty;
mod registry;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::hypothesis::{Concept, HypothesisError};
use crate::metric_core::{MetricError, Point};

pub use adversaries::{
    pick_worst, Deferred, Enumeration, Scripted, StagedPlan, StagedTrap, Trap, WorstCase,
};
pub use generators::{
    gen_erm_search_step, gen_limit_step, gen_nonuniform_step, gen_uniform_step, ErmSearch, ErmSearchState, Ladder,
    Limit, LimitState, NonUniform, Uniform, UniformState,
};
pub use novelty::NoveltyCache;
pub use registry::{build_adversary, build_generator, PlayerContext, PlayerSpec};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Move {
    Emit(Point),
    Abstain,
}

impl Move {
    pub fn point(&self) -> Option<&Point> {
        match self {
            Move::Emit(p) => Some(p),
            Move::Abstain => None,
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Emit(p) => write!(f, "emit {p}"),
            Move::Abstain => write!(f, "abstain"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlayerError {
    #[error("no candidate found within budget {0}")]
    SearchBudgetExhausted(usize),
    #[error("trap base sequence has no qualifying point within budget {0}")]
    BaseExhausted(usize),
    #[error("unknown player `{0}`")]
    Unknown(String),
    #[error("bad player parameter: {0}")]
    BadParam(String),
    #[error(transparent)]
    Hypothesis(#[from] HypothesisError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// The learning player. `step` sees only the reveals so far.
pub trait Generator: Send {
    fn name(&self) -> String;
    fn step(&mut self, seen: &[Point]) -> Result<Move, PlayerError>;
}

/// The revealing player.
pub trait Adversary: Send {
    fn name(&self) -> String;
    /// Next reveal; `moves[i]` answered `revealed[i]`.
    fn reveal(&mut self, revealed: &[Point], moves: &[Move]) -> Result<Point, PlayerError>;
    /// Target hypothesis, fixed at the horizon.
    fn commit(&mut self, revealed: &[Point], moves: &[Move]) -> Result<Arc<dyn Concept>, PlayerError>;
    /// Free-form observations recorded in the transcript.
    fn notes(&self) -> Vec<String> {
        Vec::new()
    }
}
