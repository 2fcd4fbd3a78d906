use std::collections::VecDeque;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::hypothesis::{Concept, PointIter};
use crate::metric_core::{in_set_ball, Metric, Point, Scalar};

use super::novelty::NoveltyCache;
use super::{Adversary, Move, PlayerError};

/// Picks, among candidate targets consistent with the reveals, the one that
/// maximizes (latest failing round, number of failing rounds).
#[derive(Clone, Debug)]
pub struct WorstCase {
    pub metric: Metric,
    pub eps_prime: Scalar,
}

impl WorstCase {
    pub fn new(metric: Metric, eps_prime: Scalar) -> Self {
        WorstCase { metric, eps_prime }
    }

    pub fn pick(
        &self,
        candidates: Vec<Arc<dyn Concept>>,
        revealed: &[Point],
        moves: &[Move],
    ) -> Result<Arc<dyn Concept>, PlayerError> {
        pick_worst(candidates, revealed, moves, &self.metric, &self.eps_prime)
    }
}

pub fn pick_worst(
    candidates: Vec<Arc<dyn Concept>>,
    revealed: &[Point],
    moves: &[Move],
    metric: &Metric,
    eps_prime: &Scalar,
) -> Result<Arc<dyn Concept>, PlayerError> {
    let mut stale = vec![false; moves.len()];
    for (t, mv) in moves.iter().enumerate() {
        if let Move::Emit(p) = mv {
            stale[t] = in_set_ball(metric, &revealed[..=t], eps_prime, p)?;
        }
    }
    let mut best: Option<((usize, usize), Arc<dyn Concept>)> = None;
    let mut fallback = None;
    for h in candidates {
        fallback.get_or_insert_with(|| h.clone());
        if !revealed.iter().all(|p| h.contains(p)) {
            continue;
        }
        let mut key = (0, 0);
        for (t, mv) in moves.iter().enumerate() {
            let bad = match mv {
                Move::Emit(p) => stale[t] || !h.contains(p),
                Move::Abstain => true,
            };
            if bad {
                key = (t + 1, key.1 + 1);
            }
        }
        if best.as_ref().is_none_or(|(k, _)| key > *k) {
            best = Some((key, h));
        }
    }
    best.map(|(_, h)| h).or(fallback).ok_or_else(|| PlayerError::BadParam("no candidate hypotheses".into()))
}

/// Reveals a concept's support in canonical order, optionally shuffled within
/// fixed-size blocks and preceded by injected points. Once a finite support
/// runs out, it starts over.
pub struct Enumeration {
    concept: Arc<dyn Concept>,
    iter: PointIter,
    injected: VecDeque<Point>,
    window: usize,
    rng: ChaCha8Rng,
    block: VecDeque<Point>,
    produced: bool,
}

impl Enumeration {
    pub fn new(concept: Arc<dyn Concept>) -> Self {
        Enumeration::shuffled(concept, 1, 0)
    }

    pub fn shuffled(concept: Arc<dyn Concept>, window: usize, seed: u64) -> Self {
        let iter = concept.points();
        Enumeration {
            concept,
            iter,
            injected: VecDeque::new(),
            window: window.max(1),
            rng: ChaCha8Rng::seed_from_u64(seed),
            block: VecDeque::new(),
            produced: false,
        }
    }

    pub fn with_prefix(mut self, prefix: impl IntoIterator<Item = Point>) -> Self {
        self.injected.extend(prefix);
        self
    }

    fn refill(&mut self) -> Result<(), PlayerError> {
        let mut block: Vec<Point> = self.iter.by_ref().take(self.window).collect();
        if block.is_empty() {
            if !self.produced {
                return Err(PlayerError::BadParam(format!("hypothesis {} has empty support", self.concept.id())));
            }
            self.iter = self.concept.points();
            block = self.iter.by_ref().take(self.window).collect();
        }
        self.produced = true;
        block.shuffle(&mut self.rng);
        self.block.extend(block);
        Ok(())
    }
}

impl Adversary for Enumeration {
    fn name(&self) -> String {
        format!("enumeration({})", self.concept.id())
    }

    fn reveal(&mut self, _revealed: &[Point], _moves: &[Move]) -> Result<Point, PlayerError> {
        if let Some(p) = self.injected.pop_front() {
            return Ok(p);
        }
        if self.block.is_empty() {
            self.refill()?;
        }
        Ok(self.block.pop_front().expect("refilled"))
    }

    fn commit(&mut self, _revealed: &[Point], _moves: &[Move]) -> Result<Arc<dyn Concept>, PlayerError> {
        Ok(self.concept.clone())
    }
}

/// Fixed reveal list. Afterwards it hands over to `then`, or cycles the list.
pub struct Scripted {
    points: Vec<Point>,
    cursor: usize,
    concept: Option<Arc<dyn Concept>>,
    then: Option<Box<dyn Adversary>>,
}

impl Scripted {
    pub fn new(points: Vec<Point>, concept: Option<Arc<dyn Concept>>) -> Self {
        Scripted { points, cursor: 0, concept, then: None }
    }

    pub fn then(mut self, next: Box<dyn Adversary>) -> Self {
        self.then = Some(next);
        self
    }
}

impl Adversary for Scripted {
    fn name(&self) -> String {
        match &self.then {
            Some(a) => format!("scripted({})+{}", self.points.len(), a.name()),
            None => format!("scripted({})", self.points.len()),
        }
    }

    fn reveal(&mut self, revealed: &[Point], moves: &[Move]) -> Result<Point, PlayerError> {
        if self.cursor < self.points.len() {
            self.cursor += 1;
            return Ok(self.points[self.cursor - 1].clone());
        }
        if let Some(next) = self.then.as_mut() {
            return next.reveal(revealed, moves);
        }
        if self.points.is_empty() {
            return Err(PlayerError::BadParam("empty script".into()));
        }
        Ok(self.points[(revealed.len()) % self.points.len()].clone())
    }

    fn commit(&mut self, revealed: &[Point], moves: &[Move]) -> Result<Arc<dyn Concept>, PlayerError> {
        if let Some(h) = &self.concept {
            return Ok(h.clone());
        }
        match self.then.as_mut() {
            Some(next) => next.commit(revealed, moves),
            None => Err(PlayerError::BadParam("scripted adversary has no target".into())),
        }
    }

    fn notes(&self) -> Vec<String> {
        self.then.as_ref().map(|a| a.notes()).unwrap_or_default()
    }
}

/// Any reveal strategy whose target is chosen at the horizon from a family
/// of candidates, worst case for the generator.
pub struct Deferred {
    inner: Box<dyn Adversary>,
    candidates: Box<dyn Fn(&[Point]) -> Vec<Arc<dyn Concept>> + Send>,
    worst: WorstCase,
}

impl Deferred {
    pub fn new(
        inner: Box<dyn Adversary>,
        candidates: Box<dyn Fn(&[Point]) -> Vec<Arc<dyn Concept>> + Send>,
        worst: WorstCase,
    ) -> Self {
        Deferred { inner, candidates, worst }
    }
}

impl Adversary for Deferred {
    fn name(&self) -> String {
        format!("deferred({})", self.inner.name())
    }

    fn reveal(&mut self, revealed: &[Point], moves: &[Move]) -> Result<Point, PlayerError> {
        self.inner.reveal(revealed, moves)
    }

    fn commit(&mut self, revealed: &[Point], moves: &[Move]) -> Result<Arc<dyn Concept>, PlayerError> {
        self.worst.pick((self.candidates)(revealed), revealed, moves)
    }

    fn notes(&self) -> Vec<String> {
        self.inner.notes()
    }
}

/// Replays a base prefix, then always reveals the least later base point
/// outside the `eps_prime`-balls around earlier picks and every generator output.
pub struct Trap {
    base: PointIter,
    buf: Vec<Point>,
    prefix: usize,
    picks: Vec<usize>,
    avoid: Vec<Point>,
    moves_seen: usize,
    novelty: NoveltyCache,
    budget: usize,
    concept: Option<Arc<dyn Concept>>,
}

impl Trap {
    pub fn new(base: PointIter, prefix: usize, metric: Metric, eps_prime: Scalar, budget: usize) -> Self {
        Trap {
            base,
            buf: Vec::new(),
            prefix,
            picks: Vec::new(),
            avoid: Vec::new(),
            moves_seen: 0,
            novelty: NoveltyCache::new(metric, eps_prime),
            budget,
            concept: None,
        }
    }

    pub fn with_target(mut self, h: Arc<dyn Concept>) -> Self {
        self.concept = Some(h);
        self
    }

    pub fn picks(&self) -> &[usize] {
        &self.picks
    }

    fn base_at(&mut self, i: usize) -> Option<Point> {
        while self.buf.len() <= i {
            self.buf.push(self.base.next()?);
        }
        Some(self.buf[i].clone())
    }
}

impl Adversary for Trap {
    fn name(&self) -> String {
        format!("trap(prefix={})", self.prefix)
    }

    fn reveal(&mut self, _revealed: &[Point], moves: &[Move]) -> Result<Point, PlayerError> {
        for mv in &moves[self.moves_seen..] {
            if let Move::Emit(p) = mv {
                self.avoid.push(p.clone());
            }
        }
        self.moves_seen = moves.len();
        let start = self.picks.last().map_or(0, |&i| i + 1);
        let chosen = if self.picks.len() < self.prefix {
            self.base_at(start).map(|p| (start, p))
        } else {
            let mut found = None;
            for j in start..start + self.budget {
                let Some(p) = self.base_at(j) else { break };
                if self.novelty.is_novel(&self.avoid, &p)? {
                    found = Some((j, p));
                    break;
                }
            }
            found
        };
        let (j, p) = chosen.ok_or(PlayerError::BaseExhausted(self.budget))?;
        self.picks.push(j);
        self.avoid.push(p.clone());
        Ok(p)
    }

    fn commit(&mut self, _revealed: &[Point], _moves: &[Move]) -> Result<Arc<dyn Concept>, PlayerError> {
        self.concept.clone().ok_or_else(|| PlayerError::BadParam("trap has no upfront target".into()))
    }
}

/// Row/stage data for the staged trap.
pub trait StagedPlan: Send + Sync {
    fn anchors(&self) -> Vec<Point>;
    /// `row(0, m)` opens stage `m`; `row(m, j)` for `j >= 1` fills it.
    fn row(&self, i: usize, j: usize) -> Point;
    /// Membership in the protected set `A_n`.
    fn in_protected(&self, n: usize, p: &Point) -> bool;
    /// `h_0` for `n = 0`, else the stage-`n` hypothesis, consistent with `revealed`.
    fn hypothesis(&self, n: usize, revealed: &[Point]) -> Arc<dyn Concept>;
}

/// Anchors first; then stage `m` opens with `row(0, m)` and walks row `m`
/// until the generator's latest output lands in `A_m`.
pub struct StagedTrap {
    plan: Arc<dyn StagedPlan>,
    anchors: Vec<Point>,
    anchor_pos: usize,
    stage: usize,
    next_row: usize,
    stage_budget: usize,
    stalled: Vec<usize>,
    worst: WorstCase,
}

impl StagedTrap {
    pub fn new(plan: Arc<dyn StagedPlan>, stage_budget: usize, worst: WorstCase) -> Self {
        let anchors = plan.anchors();
        StagedTrap { plan, anchors, anchor_pos: 0, stage: 1, next_row: 0, stage_budget, stalled: Vec::new(), worst }
    }

    pub fn stage(&self) -> usize {
        self.stage
    }
}

impl Adversary for StagedTrap {
    fn name(&self) -> String {
        "staged_trap".into()
    }

    fn reveal(&mut self, _revealed: &[Point], moves: &[Move]) -> Result<Point, PlayerError> {
        if self.anchor_pos < self.anchors.len() {
            self.anchor_pos += 1;
            return Ok(self.anchors[self.anchor_pos - 1].clone());
        }
        if self.next_row > 0 {
            if let Some(Move::Emit(p)) = moves.last() {
                if self.plan.in_protected(self.stage, p) {
                    self.stage += 1;
                    self.next_row = 0;
                }
            }
        }
        let p = if self.next_row == 0 {
            self.plan.row(0, self.stage)
        } else {
            if self.next_row == self.stage_budget + 1 {
                self.stalled.push(self.stage);
            }
            self.plan.row(self.stage, self.next_row)
        };
        self.next_row += 1;
        Ok(p)
    }

    fn commit(&mut self, revealed: &[Point], moves: &[Move]) -> Result<Arc<dyn Concept>, PlayerError> {
        let cands = vec![self.plan.hypothesis(0, revealed), self.plan.hypothesis(self.stage, revealed)];
        self.worst.pick(cands, revealed, moves)
    }

    fn notes(&self) -> Vec<String> {
        let mut v = vec![format!("stage={}", self.stage)];
        v.extend(self.stalled.iter().map(|s| format!("stage_stall={s}")));
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::{parse_class, Hypothesis};

    fn r(v: i64) -> Point {
        Point::real(v)
    }

    fn evens() -> Arc<dyn Concept> {
        let c = parse_class("metric abs\nhypothesis evens\nfamily: lattice step=2\n").unwrap();
        Arc::new(c.members()[0].clone())
    }

    #[test]
    fn enumeration_reveals_canonical_order() {
        let mut a = Enumeration::new(evens());
        let got: Vec<Point> = (0..3).map(|_| a.reveal(&[], &[]).unwrap()).collect();
        assert_eq!(got, vec![r(0), r(2), r(-2)]);
        let mut a = Enumeration::new(evens()).with_prefix([r(8)]);
        assert_eq!(a.reveal(&[], &[]).unwrap(), r(8));
        assert_eq!(a.reveal(&[], &[]).unwrap(), r(0));
    }

    #[test]
    fn finite_enumeration_cycles_and_shuffles_in_blocks() {
        let h: Arc<dyn Concept> = Arc::new(Hypothesis::new("h", crate::hypothesis::Support::from_points([r(1), r(2)])));
        let mut a = Enumeration::shuffled(h, 2, 7);
        let got: Vec<Point> = (0..4).map(|_| a.reveal(&[], &[]).unwrap()).collect();
        let mut first: Vec<Point> = got[..2].to_vec();
        first.sort();
        assert_eq!(first, vec![r(1), r(2)]);
    }

    #[test]
    fn trap_dodges_outputs() {
        let base: PointIter = Box::new((0i64..).map(r));
        let mut t = Trap::new(base, 1, Metric::Abs, Scalar::one(), 100);
        let mut revealed = Vec::new();
        let mut moves = Vec::new();
        for out in [3, 6, 9] {
            revealed.push(t.reveal(&revealed, &moves).unwrap());
            moves.push(Move::Emit(r(out)));
        }
        // 0 from the prefix; then least index outside B({0,3}, 1); then outside B({0,3,5,6}, 1)
        assert_eq!(revealed, vec![r(0), r(5), r(8)]);
        let mut abstaining = Trap::new(Box::new((0i64..).map(r)), 0, Metric::Abs, Scalar::one(), 100);
        let picks: Vec<Point> = (0..3).map(|_| abstaining.reveal(&[], &[]).unwrap()).collect();
        assert_eq!(picks, vec![r(0), r(2), r(4)]);
        let mut tight = Trap::new(Box::new((0i64..3).map(r)), 0, Metric::Abs, Scalar::one(), 100);
        tight.reveal(&[], &[]).unwrap();
        tight.reveal(&[], &[]).unwrap();
        assert_eq!(tight.reveal(&[], &[]), Err(PlayerError::BaseExhausted(100)));
    }

    #[test]
    fn worst_case_prefers_latest_error() {
        let a: Arc<dyn Concept> = Arc::new(Hypothesis::new("a", crate::hypothesis::Support::from_points([r(0), r(5)])));
        let b: Arc<dyn Concept> = Arc::new(Hypothesis::new("b", crate::hypothesis::Support::from_points([r(0), r(9)])));
        let revealed = vec![r(0), r(0)];
        let moves = vec![Move::Emit(r(9)), Move::Emit(r(5))];
        let h = pick_worst(vec![a, b], &revealed, &moves, &Metric::Abs, &Scalar::one()).unwrap();
        assert_eq!(h.id(), "b");
    }

    struct Toy;

    impl StagedPlan for Toy {
        fn anchors(&self) -> Vec<Point> {
            vec![r(-1)]
        }
        fn row(&self, i: usize, j: usize) -> Point {
            r((100 * i + j) as i64)
        }
        fn in_protected(&self, n: usize, p: &Point) -> bool {
            *p == r(-(n as i64) - 10)
        }
        fn hypothesis(&self, n: usize, _revealed: &[Point]) -> Arc<dyn Concept> {
            Arc::new(Hypothesis::new(format!("h{n}"), crate::hypothesis::Support::empty()))
        }
    }

    #[test]
    fn staged_trap_advances_one_stage_per_hit() {
        let mut a = StagedTrap::new(Arc::new(Toy), 10, WorstCase::new(Metric::Abs, Scalar::one()));
        let mut revealed = Vec::new();
        let mut moves = Vec::new();
        for _ in 0..4 {
            let p = a.reveal(&revealed, &moves).unwrap();
            revealed.push(p);
            moves.push(Move::Emit(r(-(a.stage() as i64) - 10)));
        }
        assert_eq!(revealed, vec![r(-1), r(1), r(2), r(3)]);
        let mut b = StagedTrap::new(Arc::new(Toy), 10, WorstCase::new(Metric::Abs, Scalar::one()));
        let mut revealed = Vec::new();
        let mut moves = Vec::new();
        for _ in 0..4 {
            let p = b.reveal(&revealed, &moves).unwrap();
            revealed.push(p);
            moves.push(Move::Abstain);
        }
        assert_eq!(revealed, vec![r(-1), r(1), r(101), r(102)]);
    }
}
