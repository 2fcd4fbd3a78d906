//! Worked example classes with their expected regimes, bundled players and a
//! regime verifier.

pub mod embedding;
pub mod l2_case1;
pub mod l2_case2;
pub mod prime_reals;
pub mod two_hypotheses;
pub mod weighted;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::game::GameError;
use crate::hypothesis::{Concept, HypothesisClass, HypothesisError, PointIter};
use crate::metric_core::{Coord, MetricError, Point, Scalar};
use crate::players::{Adversary, Generator, NoveltyCache, PlayerContext, PlayerError, PlayerSpec};

pub use embedding::{embed_countable_class, embed_point, EmbeddingSpec};
pub use l2_case1::{fixture_l2_case1, L2Case1};
pub use l2_case2::{fixture_l2_case2, L2Case2};
pub use prime_reals::{fixture_prime_reals, PrimeReals};
pub use two_hypotheses::fixture_two_hypotheses;
pub use weighted::{fixture_weighted_metric, WeightedLevels};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FixtureError {
    #[error("unknown fixture `{0}`")]
    Unknown(String),
    #[error("bad fixture parameters: {0}")]
    Param(String),
    #[error(transparent)]
    Hypothesis(#[from] HypothesisError),
    #[error(transparent)]
    Player(#[from] PlayerError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

impl From<FixtureError> for PlayerError {
    fn from(e: FixtureError) -> Self {
        match e {
            FixtureError::Player(p) => p,
            FixtureError::Hypothesis(h) => PlayerError::Hypothesis(h),
            FixtureError::Metric(m) => PlayerError::Metric(m),
            other => PlayerError::BadParam(other.to_string()),
        }
    }
}

/// What a regime row should show.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expect {
    /// Generatable in the limit: bundled generators become correct.
    Generatable,
    /// Some adversary keeps every bundled generator failing.
    NotGeneratable,
    /// Uniformly generatable with the given threshold.
    Uniform(usize),
    /// The uniform threshold fails while the per-target one passes.
    NonUniformOnly(usize),
    /// No closure point is novel after a small reveal.
    NoValidMove,
    DimensionAtMost(usize),
    DimensionReaches(usize),
    /// Two runs give identical outcomes.
    Agrees,
}

impl fmt::Display for Expect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expect::Generatable => write!(f, "generatable"),
            Expect::NotGeneratable => write!(f, "not_generatable"),
            Expect::Uniform(d) => write!(f, "uniform(d*={d})"),
            Expect::NonUniformOnly(d) => write!(f, "nonuniform_only(d*={d})"),
            Expect::NoValidMove => write!(f, "no_valid_move"),
            Expect::DimensionAtMost(d) => write!(f, "dimension_at_most({d})"),
            Expect::DimensionReaches(d) => write!(f, "dimension_reaches({d})"),
            Expect::Agrees => write!(f, "agrees"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Regime {
    pub label: &'static str,
    pub gamma: Scalar,
    pub gamma_prime: Scalar,
    pub expected: Expect,
}

impl Regime {
    pub fn new(label: &'static str, gamma: Scalar, gamma_prime: Scalar, expected: Expect) -> Self {
        Regime { label, gamma, gamma_prime, expected }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixtureSpec {
    pub name: &'static str,
    pub summary: &'static str,
    pub params: Vec<(&'static str, String)>,
    pub expected_regimes: Vec<Regime>,
}

impl FixtureSpec {
    pub fn param(&self, key: &str) -> Option<&str> {
        self.params.iter().find(|(k, _)| *k == key).map(|(_, v)| v.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegimeRow {
    pub regime: Regime,
    pub observed: String,
    pub pass: bool,
}

pub const FIXTURES: [&str; 6] = ["prime_reals", "two_hypotheses", "l2_case1", "l2_case2", "weighted", "embedding"];

pub fn fixture_spec(name: &str) -> Result<FixtureSpec, FixtureError> {
    Ok(match name {
        "prime_reals" => prime_reals::spec(),
        "two_hypotheses" => two_hypotheses::spec(),
        "l2_case1" => l2_case1::spec(),
        "l2_case2" => l2_case2::spec(),
        "weighted" => weighted::spec(),
        "embedding" => embedding::spec(),
        _ => return Err(FixtureError::Unknown(name.into())),
    })
}

/// Runs every regime of a fixture; one row per regime, in table order.
pub fn verify_fixture(name: &str, budget: usize) -> Result<Vec<RegimeRow>, FixtureError> {
    let spec = fixture_spec(name)?;
    let rows = match name {
        "prime_reals" => prime_reals::verify(&spec, budget)?,
        "two_hypotheses" => two_hypotheses::verify(&spec, budget)?,
        "l2_case1" => l2_case1::verify(&spec, budget)?,
        "l2_case2" => l2_case2::verify(&spec, budget)?,
        "weighted" => weighted::verify(&spec, budget)?,
        _ => embedding::verify(&spec, budget)?,
    };
    debug_assert_eq!(rows.len(), spec.expected_regimes.len());
    Ok(rows)
}

/// The fixture's class at its default parameters.
pub fn fixture_class(name: &str) -> Result<HypothesisClass, FixtureError> {
    Ok(match name {
        "prime_reals" => fixture_prime_reals(500),
        "two_hypotheses" => fixture_two_hypotheses(&Scalar::new(3, 10), &Scalar::new(6, 10), &Scalar::one())?,
        "l2_case1" => fixture_l2_case1(),
        "l2_case2" => fixture_l2_case2(),
        "weighted" => fixture_weighted_metric(true),
        "embedding" => embedding::demo_class(&embedding::discrete())?,
        _ => return Err(FixtureError::Unknown(name.into())),
    })
}

/// Fixture-specific generators (`gen:fixture`, `gen:limit` decompositions).
/// `None` defers to the generic registry.
pub fn build_fixture_generator(
    name: &str,
    spec: &PlayerSpec,
    ctx: &PlayerContext,
) -> Result<Option<Box<dyn Generator>>, FixtureError> {
    match name {
        "prime_reals" => prime_reals::generator(spec, ctx),
        "l2_case1" => l2_case1::generator(spec, ctx),
        "l2_case2" => l2_case2::generator(spec, ctx),
        "two_hypotheses" | "weighted" | "embedding" => Ok(None),
        _ => Err(FixtureError::Unknown(name.into())),
    }
}

/// Fixture-specific adversaries (`adv:staged_trap`, `adv:trap`, `adv:obligated`).
pub fn build_fixture_adversary(
    name: &str,
    spec: &PlayerSpec,
    ctx: &PlayerContext,
) -> Result<Option<Box<dyn Adversary>>, FixtureError> {
    match name {
        "prime_reals" => prime_reals::adversary(spec, ctx),
        "l2_case1" => l2_case1::adversary(spec, ctx),
        "l2_case2" => l2_case2::adversary(spec, ctx),
        "two_hypotheses" => two_hypotheses::adversary(spec, ctx),
        "weighted" => weighted::adversary(spec, ctx),
        "embedding" => Ok(None),
        _ => Err(FixtureError::Unknown(name.into())),
    }
}

/// Scans the first `budget` points of the class universe for one that lies in
/// the closure of `revealed` and outside its `eps_prime`-balls.
pub fn find_valid_move(
    class: &HypothesisClass,
    revealed: &[Point],
    eps_prime: &Scalar,
    budget: usize,
) -> Result<Option<Point>, FixtureError> {
    let Some(closure) = class.oracle().closure(revealed)? else {
        return Err(HypothesisError::BotClosure.into());
    };
    let mut novelty = NoveltyCache::new(class.metric().clone(), eps_prime.clone());
    for p in class.oracle().universe().take(budget) {
        if closure.contains(&p) && novelty.is_novel(revealed, &p)? {
            return Ok(Some(p));
        }
    }
    Ok(None)
}

pub(crate) fn basis(k: u64, coef: &Coord) -> Point {
    Point::basis(k, coef.clone())
}

/// Basis point `(k, coef)` when `p` is `coef * e_k`.
pub(crate) fn as_basis(p: &Point) -> Option<(u64, &Coord)> {
    p.as_vec()?.as_basis()
}

type Membership = Arc<dyn Fn(&Point) -> bool + Send + Sync>;
type Stage = Arc<dyn Fn(u64) -> Vec<Point> + Send + Sync>;

/// A target given by a membership predicate; `points` walks stages
/// `1, 2, ...` of candidates and keeps the members.
#[derive(Clone)]
pub struct PredicateConcept {
    id: String,
    member: Membership,
    stage: Stage,
}

impl PredicateConcept {
    pub fn new(
        id: impl Into<String>,
        member: impl Fn(&Point) -> bool + Send + Sync + 'static,
        stage: impl Fn(u64) -> Vec<Point> + Send + Sync + 'static,
    ) -> Self {
        PredicateConcept { id: id.into(), member: Arc::new(member), stage: Arc::new(stage) }
    }
}

impl Concept for PredicateConcept {
    fn id(&self) -> String {
        self.id.clone()
    }

    fn contains(&self, p: &Point) -> bool {
        (self.member)(p)
    }

    fn points(&self) -> PointIter {
        let (member, stage) = (self.member.clone(), self.stage.clone());
        Box::new((1u64..).flat_map(move |s| {
            let m = member.clone();
            stage(s).into_iter().filter(move |p| m(p))
        }))
    }
}

pub(crate) fn row(regime: &Regime, observed: String, pass: bool) -> RegimeRow {
    RegimeRow { regime: regime.clone(), observed, pass }
}

pub(crate) fn ctx(class: &HypothesisClass, eps: &Scalar, eps_prime: &Scalar, budget: usize) -> PlayerContext {
    PlayerContext { class: class.clone(), eps: eps.clone(), eps_prime: eps_prime.clone(), budget, seed: 0 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_fixture_has_a_spec_and_class() {
        for name in FIXTURES {
            let s = fixture_spec(name).unwrap();
            assert_eq!(s.name, name);
            assert!(!s.expected_regimes.is_empty());
            fixture_class(name).unwrap();
        }
        assert_eq!(fixture_spec("nope"), Err(FixtureError::Unknown("nope".into())));
        assert_eq!(fixture_spec("l2_case2").unwrap().expected_regimes.len(), 4);
    }

    #[test]
    fn predicate_concept_filters_stages() {
        let c = PredicateConcept::new("evens", |p| p.as_real().is_some_and(|v| v.to_integer().is_some_and(|n| n % 2 == 0.into())), |s| {
            vec![Point::real(s as i64)]
        });
        let got: Vec<Point> = c.points().take(3).collect();
        assert_eq!(got, vec![Point::real(2), Point::real(4), Point::real(6)]);
        assert!(c.contains(&Point::real(8)) && !c.contains(&Point::real(7)));
    }
}
