//! Round loop, per-round scoring, verdict judges and transcript replays.

mod judge;
mod replay;

use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::hypothesis::{Concept, HypothesisClass, UusResult};
use crate::metric_core::{in_set_ball, CoverTracker, Metric, MetricError, Point, Scalar};
use crate::players::{Adversary, Generator, Move, PlayerError};

pub use judge::{clean_suffix, defeated, judge_limit, judge_limit_with, judge_nonuniform, judge_uniform, JudgePolicy, Verdict};
pub use replay::{
    check_cover_obligation, replay_cover_profile, replay_metric_transfer, replay_novelty, threshold_round,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("bad config: {0}")]
    Config(String),
    #[error("class fails the uniformly-unbounded-support check: {0}")]
    UusViolated(String),
    #[error("committed hypothesis {id} does not contain revealed point {point}")]
    AdversaryIllegalReveal { id: String, point: String },
    #[error("round {t}: {source}")]
    Player { t: usize, source: PlayerError },
    #[error("scale bound fails on pair ({p}, {q})")]
    ScaleBound { p: String, q: String },
    #[error("replay radius {0} exceeds the game's novelty radius")]
    RadiusTooLarge(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameConfig {
    pub eps: Scalar,
    pub eps_prime: Scalar,
    pub r: Scalar,
    pub horizon: usize,
    pub seed: u64,
    pub budget: usize,
    /// Skip the UUS precondition.
    pub uus_override: bool,
}

impl GameConfig {
    pub fn new(eps: Scalar, eps_prime: Scalar, r: Scalar, horizon: usize) -> Self {
        GameConfig { eps, eps_prime, r, horizon, seed: 0, budget: 500, uus_override: false }
    }

    pub fn validate(&self) -> Result<(), GameError> {
        if !self.eps.is_positive() || self.eps > self.r {
            return Err(GameError::Config(format!("need 0 < eps <= r, got eps={} r={}", self.eps, self.r)));
        }
        if !self.eps_prime.is_positive() || self.eps_prime > self.r {
            return Err(GameError::Config(format!("need 0 < eps' <= r, got eps'={} r={}", self.eps_prime, self.r)));
        }
        if self.budget == 0 {
            return Err(GameError::Config("budget must be positive".into()));
        }
        Ok(())
    }
}

pub enum CommitPolicy {
    Upfront(Arc<dyn Concept>),
    Deferred,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Round {
    pub t: usize,
    pub revealed: Point,
    pub mv: Move,
    pub member_ok: Option<bool>,
    pub novel_ok: Option<bool>,
    pub scored: bool,
}

impl Round {
    /// An emission that is both in the target and novel.
    pub fn passes(&self) -> bool {
        self.member_ok == Some(true) && self.novel_ok == Some(true)
    }
}

#[derive(Clone, Debug)]
pub struct Transcript {
    pub config: GameConfig,
    pub class: String,
    pub metric: Metric,
    pub centers: Vec<Point>,
    pub generator: String,
    pub adversary: String,
    pub committed: String,
    pub rounds: Vec<Round>,
    /// `cover_profile[t-1]` = eps-cover of the first `t` reveals.
    pub cover_profile: Vec<usize>,
    pub uus: String,
    pub notes: Vec<String>,
}

impl Transcript {
    pub fn revealed(&self) -> Vec<Point> {
        self.rounds.iter().map(|r| r.revealed.clone()).collect()
    }

    pub fn emitted(&self) -> impl Iterator<Item = (usize, &Point)> {
        self.rounds.iter().filter_map(|r| r.mv.point().map(|p| (r.t, p)))
    }

    /// Line-oriented records: a header, one line per round, then notes.
    pub fn render(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "header class={} metric={} eps={} eps_prime={} r={} horizon={} seed={} budget={} generator={} adversary={} committed={} uus={}",
            self.class,
            self.metric.to_string().replace(' ', ","),
            c.eps,
            c.eps_prime,
            c.r,
            c.horizon,
            c.seed,
            c.budget,
            self.generator.replace(' ', "_"),
            self.adversary.replace(' ', "_"),
            self.committed,
            self.uus.replace(' ', "_"),
        );
        let flag = |f: Option<bool>| match f {
            Some(true) => "1",
            Some(false) => "0",
            None => "-",
        };
        for (r, cover) in self.rounds.iter().zip(&self.cover_profile) {
            let mv = match &r.mv {
                Move::Emit(p) => format!("emit:{p}"),
                Move::Abstain => "abstain".into(),
            };
            let _ = writeln!(
                out,
                "round t={} revealed={} move={} member={} novel={} scored={} cover={}",
                r.t,
                r.revealed,
                mv,
                flag(r.member_ok),
                flag(r.novel_ok),
                u8::from(r.scored),
                cover
            );
        }
        for n in &self.notes {
            let _ = writeln!(out, "note {n}");
        }
        out
    }
}

/// Cover profile of `revealed` with candidates fixed to `centers` plus every reveal.
pub(crate) fn profile(metric: &Metric, radius: &Scalar, centers: &[Point], revealed: &[Point]) -> Result<Vec<usize>, GameError> {
    let mut cands: Vec<Point> = centers.iter().filter(|c| metric.accepts(c)).cloned().collect();
    cands.extend(revealed.iter().cloned());
    let mut tracker = CoverTracker::new(metric.clone(), radius.clone(), &cands);
    let mut out = Vec::with_capacity(revealed.len());
    for p in revealed {
        tracker.push(p)?;
        out.push(tracker.value());
    }
    Ok(out)
}

/// Plays `horizon` rounds: the adversary reveals, then the generator answers.
pub fn run_game(
    config: &GameConfig,
    class: &HypothesisClass,
    adversary: &mut dyn Adversary,
    generator: &mut dyn Generator,
    policy: CommitPolicy,
) -> Result<Transcript, GameError> {
    config.validate()?;
    let uus = if config.uus_override {
        "override".to_string()
    } else {
        match class.oracle().uus(&config.r) {
            UusResult::Satisfied(_) => "satisfied".to_string(),
            other => return Err(GameError::UusViolated(other.to_string())),
        }
    };
    let metric = class.metric().clone();
    let mut revealed: Vec<Point> = Vec::new();
    let mut moves: Vec<Move> = Vec::new();
    let mut notes = Vec::new();
    for t in 1..=config.horizon {
        let x = adversary.reveal(&revealed, &moves).map_err(|source| GameError::Player { t, source })?;
        if !metric.accepts(&x) {
            return Err(MetricError::VariantMismatch { metric: metric.to_string(), point: x.to_string() }.into());
        }
        revealed.push(x);
        let mv = match generator.step(&revealed) {
            Ok(mv) => mv,
            Err(PlayerError::SearchBudgetExhausted(b)) => {
                notes.push(format!("t={t} search_budget_exhausted={b}"));
                Move::Abstain
            }
            Err(source) => return Err(GameError::Player { t, source }),
        };
        moves.push(mv);
    }
    let committed = match policy {
        CommitPolicy::Upfront(h) => h,
        CommitPolicy::Deferred => {
            adversary.commit(&revealed, &moves).map_err(|source| GameError::Player { t: config.horizon, source })?
        }
    };
    if let Some(p) = revealed.iter().find(|p| !committed.contains(p)) {
        return Err(GameError::AdversaryIllegalReveal { id: committed.id(), point: p.to_string() });
    }
    let mut rounds = Vec::with_capacity(revealed.len());
    for (i, (x, mv)) in revealed.iter().zip(moves).enumerate() {
        let (member_ok, novel_ok) = match &mv {
            Move::Emit(p) => {
                (Some(committed.contains(p)), Some(!in_set_ball(&metric, &revealed[..=i], &config.eps_prime, p)?))
            }
            Move::Abstain => (None, None),
        };
        let scored = member_ok.is_some();
        rounds.push(Round { t: i + 1, revealed: x.clone(), mv, member_ok, novel_ok, scored });
    }
    let centers = class.centers();
    let cover_profile = profile(&metric, &config.eps, &centers, &revealed)?;
    notes.extend(adversary.notes());
    Ok(Transcript {
        config: config.clone(),
        class: class.name(),
        metric,
        centers,
        generator: generator.name(),
        adversary: adversary.name(),
        committed: committed.id(),
        rounds,
        cover_profile,
        uus,
        notes,
    })
}
