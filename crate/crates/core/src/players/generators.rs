use crate::hypothesis::{closure_dimension_finite, DimResult, ExplicitClass, HypothesisClass, Labeled, PointIter};
use crate::metric_core::{in_set_ball, CoverTracker, Point, Scalar};

use super::novelty::NoveltyCache;
use super::{Generator, Move, PlayerError};

/// Cover tracker fed from a growing prefix; rebuilt if the history is rewritten.
struct PrefixCover {
    tracker: CoverTracker,
    fed: Vec<Point>,
    make: Box<dyn Fn() -> CoverTracker + Send>,
}

impl PrefixCover {
    fn new(make: Box<dyn Fn() -> CoverTracker + Send>) -> Self {
        PrefixCover { tracker: make(), fed: Vec::new(), make }
    }

    fn value(&mut self, seen: &[Point]) -> Result<usize, PlayerError> {
        if seen.len() < self.fed.len() || seen[..self.fed.len()] != self.fed[..] {
            self.tracker = (self.make)();
            self.fed.clear();
        }
        for p in &seen[self.fed.len()..] {
            self.tracker.push(p)?;
        }
        self.fed.extend(seen[self.fed.len()..].iter().cloned());
        Ok(self.tracker.value())
    }
}

fn cover_for(class: &HypothesisClass, eps: &Scalar) -> PrefixCover {
    let (metric, eps, centers) = (class.metric().clone(), eps.clone(), class.centers());
    PrefixCover::new(Box::new(move || CoverTracker::new(metric.clone(), eps.clone(), &centers)))
}

/// First closure point outside the `eps_prime`-balls around `seen`.
fn closure_pick(
    class: &HypothesisClass,
    seen: &[Point],
    novelty: &mut NoveltyCache,
    budget: usize,
) -> Result<Move, PlayerError> {
    let Some(closure) = class.oracle().closure(seen)? else { return Ok(Move::Abstain) };
    match novelty.first_novel(seen, closure.iter(), budget)? {
        Some(p) => Ok(Move::Emit(p)),
        None => Err(PlayerError::SearchBudgetExhausted(budget)),
    }
}

pub struct UniformState {
    cover: PrefixCover,
    novelty: NoveltyCache,
}

impl UniformState {
    pub fn new(class: &HypothesisClass, eps: &Scalar, eps_prime: &Scalar) -> Self {
        UniformState { cover: cover_for(class, eps), novelty: NoveltyCache::new(class.metric().clone(), eps_prime.clone()) }
    }
}

/// Abstains until the prefix needs `d_star` balls, then emits the first
/// canonical closure point outside every `eps_prime`-ball.
pub fn gen_uniform_step(
    class: &HypothesisClass,
    d_star: usize,
    seen: &[Point],
    state: &mut UniformState,
    budget: usize,
) -> Result<Move, PlayerError> {
    if state.cover.value(seen)? < d_star {
        return Ok(Move::Abstain);
    }
    closure_pick(class, seen, &mut state.novelty, budget)
}

pub struct Uniform {
    class: HypothesisClass,
    d_star: usize,
    budget: usize,
    state: UniformState,
}

impl Uniform {
    pub fn new(class: HypothesisClass, eps: &Scalar, eps_prime: &Scalar, d_star: usize, budget: usize) -> Self {
        let state = UniformState::new(&class, eps, eps_prime);
        Uniform { class, d_star, budget, state }
    }
}

impl Generator for Uniform {
    fn name(&self) -> String {
        format!("uniform(d*={})", self.d_star)
    }

    fn step(&mut self, seen: &[Point]) -> Result<Move, PlayerError> {
        gen_uniform_step(&self.class, self.d_star, seen, &mut self.state, self.budget)
    }
}

/// Nested classes with their uniform thresholds (`None` = never selected).
#[derive(Clone, Debug)]
pub struct Ladder {
    pub levels: Vec<HypothesisClass>,
    pub thresholds: Vec<Option<usize>>,
}

impl Ladder {
    /// Thresholds are closure dimension plus one.
    pub fn new(levels: Vec<ExplicitClass>, eps: &Scalar, eps_prime: &Scalar) -> Result<Self, PlayerError> {
        let mut thresholds = Vec::new();
        for c in &levels {
            thresholds.push(match closure_dimension_finite(c, eps, eps_prime)? {
                DimResult::Finite { d, .. } => Some(d + 1),
                _ => None,
            });
        }
        Ok(Ladder { levels: levels.into_iter().map(HypothesisClass::explicit).collect(), thresholds })
    }

    /// `H_n` = first `n` members of `class`.
    pub fn prefixes(class: &ExplicitClass, eps: &Scalar, eps_prime: &Scalar) -> Result<Self, PlayerError> {
        let mut levels = Vec::new();
        for n in 1..=class.len() {
            let ids: Vec<&str> = class.members()[..n].iter().map(|h| h.id.as_str()).collect();
            levels.push(class.restrict(&ids)?);
        }
        Ladder::new(levels, eps, eps_prime)
    }

    /// Largest level `n <= t` whose threshold is at most `d`; 0 if none.
    pub fn select(&self, d: usize, t: usize) -> usize {
        (1..=self.levels.len().min(t)).rev().find(|&n| self.thresholds[n - 1].is_some_and(|th| th <= d)).unwrap_or(0)
    }
}

pub struct NonUniformState {
    cover: PrefixCover,
    novelty: NoveltyCache,
    pub chosen: Vec<usize>,
}

impl NonUniformState {
    pub fn new(ladder: &Ladder, eps: &Scalar, eps_prime: &Scalar) -> Self {
        let top = ladder.levels.last().expect("nonempty ladder");
        NonUniformState {
            cover: cover_for(top, eps),
            novelty: NoveltyCache::new(top.metric().clone(), eps_prime.clone()),
            chosen: Vec::new(),
        }
    }
}

pub fn gen_nonuniform_step(
    ladder: &Ladder,
    seen: &[Point],
    state: &mut NonUniformState,
    budget: usize,
) -> Result<Move, PlayerError> {
    let d = state.cover.value(seen)?;
    let n = ladder.select(d, seen.len());
    state.chosen.push(n);
    if n == 0 {
        return Ok(Move::Abstain);
    }
    closure_pick(&ladder.levels[n - 1], seen, &mut state.novelty, budget)
}

pub struct NonUniform {
    ladder: Ladder,
    budget: usize,
    state: NonUniformState,
}

impl NonUniform {
    pub fn new(ladder: Ladder, eps: &Scalar, eps_prime: &Scalar, budget: usize) -> Self {
        let state = NonUniformState::new(&ladder, eps, eps_prime);
        NonUniform { ladder, budget, state }
    }
}

impl Generator for NonUniform {
    fn name(&self) -> String {
        format!("nonuniform(levels={})", self.ladder.levels.len())
    }

    fn step(&mut self, seen: &[Point]) -> Result<Move, PlayerError> {
        gen_nonuniform_step(&self.ladder, seen, &mut self.state, self.budget)
    }
}

/// Lazily materialized enumeration of a frozen closure.
struct Frozen {
    iter: PointIter,
    buf: Vec<Point>,
    done: bool,
}

impl Frozen {
    fn get(&mut self, i: usize) -> Option<&Point> {
        while self.buf.len() <= i && !self.done {
            match self.iter.next() {
                Some(p) => self.buf.push(p),
                None => self.done = true,
            }
        }
        self.buf.get(i)
    }
}

pub struct LimitState {
    cover: PrefixCover,
    novelty: NoveltyCache,
    eps: Scalar,
    pub t_star: Option<usize>,
    frozen: Vec<Option<Frozen>>,
    pub counters: Vec<usize>,
    /// Seen points already checked against the next uncounted element.
    pending: Vec<usize>,
    pub chosen: Vec<Option<usize>>,
}

impl LimitState {
    pub fn new(classes: &[HypothesisClass], eps: &Scalar, eps_prime: &Scalar) -> Self {
        let first = classes.first().expect("nonempty class list");
        let mut centers: Vec<Point> = classes.iter().flat_map(|c| c.centers()).collect();
        centers.sort();
        centers.dedup();
        let (metric, e) = (first.metric().clone(), eps.clone());
        let cover = PrefixCover::new(Box::new(move || CoverTracker::new(metric.clone(), e.clone(), &centers)));
        LimitState {
            cover,
            novelty: NoveltyCache::new(first.metric().clone(), eps_prime.clone()),
            eps: eps.clone(),
            t_star: None,
            frozen: Vec::new(),
            counters: vec![0; classes.len()],
            pending: vec![0; classes.len()],
            chosen: Vec::new(),
        }
    }

    /// Indices still in play.
    pub fn surviving(&self) -> Vec<usize> {
        (0..self.frozen.len()).filter(|&i| self.frozen[i].is_some()).collect()
    }
}

/// Limit generator over a countable union of classes with closure dimension
/// at most `c`. Classes that later become inconsistent leave the race.
pub fn gen_limit_step(
    classes: &[HypothesisClass],
    c: usize,
    seen: &[Point],
    state: &mut LimitState,
    budget: usize,
) -> Result<Move, PlayerError> {
    let d = state.cover.value(seen)?;
    if state.t_star.is_none() {
        if d < c + 1 {
            state.chosen.push(None);
            return Ok(Move::Abstain);
        }
        state.t_star = Some(seen.len());
        state.frozen = classes
            .iter()
            .map(|h| Ok(h.oracle().closure(seen)?.map(|s| Frozen { iter: s.iter(), buf: Vec::new(), done: false })))
            .collect::<Result<_, PlayerError>>()?;
    }
    for (i, h) in classes.iter().enumerate() {
        if state.frozen[i].is_some() && !h.oracle().consistent(seen) {
            state.frozen[i] = None;
        }
    }
    let metric = classes[0].metric().clone();
    let mut best: Option<(usize, usize)> = None;
    for i in 0..classes.len() {
        let Some(fr) = state.frozen[i].as_mut() else { continue };
        while state.counters[i] < budget {
            let Some(z) = fr.get(state.counters[i]) else { break };
            if in_set_ball(&metric, &seen[state.pending[i]..], &state.eps, z)? {
                state.counters[i] += 1;
                state.pending[i] = 0;
            } else {
                state.pending[i] = seen.len();
                break;
            }
        }
        if best.is_none_or(|(_, n)| state.counters[i] > n) {
            best = Some((i, state.counters[i]));
        }
    }
    let Some((i, _)) = best else {
        state.chosen.push(None);
        return Ok(Move::Abstain);
    };
    state.chosen.push(Some(i));
    let fr = state.frozen[i].as_mut().expect("surviving index");
    for k in 0..budget {
        let Some(z) = fr.get(k).cloned() else { break };
        if state.novelty.is_novel(seen, &z)? {
            return Ok(Move::Emit(z));
        }
    }
    Err(PlayerError::SearchBudgetExhausted(budget))
}

pub struct Limit {
    classes: Vec<HypothesisClass>,
    c: usize,
    budget: usize,
    pub state: LimitState,
}

impl Limit {
    pub fn new(classes: Vec<HypothesisClass>, c: usize, eps: &Scalar, eps_prime: &Scalar, budget: usize) -> Self {
        let state = LimitState::new(&classes, eps, eps_prime);
        Limit { classes, c, budget, state }
    }
}

impl Generator for Limit {
    fn name(&self) -> String {
        format!("limit(classes={},c={})", self.classes.len(), self.c)
    }

    fn step(&mut self, seen: &[Point]) -> Result<Move, PlayerError> {
        gen_limit_step(&self.classes, self.c, seen, &mut self.state, self.budget)
    }
}

pub struct ErmSearchState {
    novelty: NoveltyCache,
}

impl ErmSearchState {
    pub fn new(class: &HypothesisClass, eps_prime: &Scalar) -> Self {
        ErmSearchState { novelty: NoveltyCache::new(class.metric().clone(), eps_prime.clone()) }
    }
}

/// Scans `dense` for the first point outside the `eps_prime`-balls that the
/// ERM oracle cannot label negative without error.
pub fn gen_erm_search_step(
    class: &HypothesisClass,
    seen: &[Point],
    dense: PointIter,
    state: &mut ErmSearchState,
    budget: usize,
) -> Result<Move, PlayerError> {
    let mut sample: Vec<Labeled> = seen.iter().map(|p| (p.clone(), true)).collect();
    for y in dense.take(budget) {
        if !state.novelty.is_novel(seen, &y)? {
            continue;
        }
        sample.push((y, false));
        if class.oracle().erm(&sample)? >= 1 {
            return Ok(Move::Emit(sample.pop().expect("pushed").0));
        }
        sample.pop();
    }
    Ok(Move::Abstain)
}

pub struct ErmSearch {
    class: HypothesisClass,
    budget: usize,
    state: ErmSearchState,
}

impl ErmSearch {
    pub fn new(class: HypothesisClass, eps_prime: &Scalar, budget: usize) -> Self {
        let state = ErmSearchState::new(&class, eps_prime);
        ErmSearch { class, budget, state }
    }
}

impl Generator for ErmSearch {
    fn name(&self) -> String {
        "erm_search".into()
    }

    fn step(&mut self, seen: &[Point]) -> Result<Move, PlayerError> {
        let dense = self.class.oracle().universe();
        gen_erm_search_step(&self.class, seen, dense, &mut self.state, self.budget)
    }
}
