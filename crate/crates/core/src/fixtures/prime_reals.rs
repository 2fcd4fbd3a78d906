//! Prime-power reals: `A_p = {p^n, p^n - 1 : n >= 1}` for odd primes `p`,
//! joined with any set of positive even integers.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};

use super::{row, FixtureError, FixtureSpec, Regime, RegimeRow};
use crate::game::{judge_limit, run_game, CommitPolicy, GameConfig, Transcript, Verdict};
use crate::hypothesis::{
    is_prime, root_base, ClassOracle, Concept, Family, Hypothesis, HypothesisClass, HypothesisError, Labeled, Lattice,
    LatticeKind, PointIter, PowerSeq, Support, UusResult,
};
use crate::metric_core::{CoverResult, Metric, Point, Scalar};
use crate::players::{
    Adversary, Enumeration, Generator, Limit, Move, NoveltyCache, PlayerContext, PlayerError, PlayerSpec, StagedPlan,
    StagedTrap, WorstCase,
};

use super::Expect;

pub const LIMIT_PRIMES: usize = 30;

fn int_of(p: &Point) -> Option<BigInt> {
    p.as_real()?.to_integer()
}

/// `p` when `v = p^n` for an odd prime `p` and `n >= 1`.
fn odd_prime_base(v: &BigInt) -> Option<BigInt> {
    if v < &BigInt::from(3) || v.is_even() {
        return None;
    }
    let (b, _) = root_base(v);
    is_prime(&b).then_some(b)
}

fn in_family(p: &BigInt, x: &BigInt) -> bool {
    odd_prime_base(x).as_ref() == Some(p) || odd_prime_base(&(x + 1)).as_ref() == Some(p)
}

fn positive_even(x: &BigInt) -> bool {
    x.is_positive() && x.is_even()
}

fn families(p: &BigInt) -> [Family; 2] {
    let seq = |shift: i64| {
        Family::Powers(PowerSeq::new(BigInt::one(), p.clone(), BigInt::from(shift), 1).expect("odd prime base"))
    };
    [seq(0), seq(-1)]
}

/// The class, or its slice `H_p` when `only` is set.
#[derive(Clone, Debug)]
pub struct PrimeReals {
    only: Option<BigInt>,
    budget: usize,
}

impl PrimeReals {
    pub fn new(budget: usize) -> Self {
        PrimeReals { only: None, budget }
    }

    /// Members with the given prime.
    pub fn at(p: u64, budget: usize) -> Self {
        PrimeReals { only: Some(BigInt::from(p)), budget }
    }

    /// `None` when inconsistent; otherwise the prime forced by the sample.
    fn classify(&self, sample: &[Point]) -> Option<Option<BigInt>> {
        let mut base = self.only.clone();
        for pt in sample {
            let v = int_of(pt)?;
            if positive_even(&v) {
                continue;
            }
            let b = odd_prime_base(&v)?;
            if base.as_ref().is_some_and(|q| *q != b) {
                return None;
            }
            base = Some(b);
        }
        Some(base)
    }

    fn cost(&self, p: &BigInt, labeled: &[Labeled]) -> usize {
        let mut free: BTreeMap<BigInt, (usize, usize)> = BTreeMap::new();
        let mut cost = 0;
        for (x, y) in labeled {
            let Some(v) = int_of(x) else {
                cost += usize::from(*y);
                continue;
            };
            if in_family(p, &v) {
                cost += usize::from(!*y);
            } else if positive_even(&v) {
                let e = free.entry(v).or_default();
                if *y {
                    e.0 += 1;
                } else {
                    e.1 += 1;
                }
            } else {
                cost += usize::from(*y);
            }
        }
        cost + free.values().map(|&(a, b)| a.min(b)).sum::<usize>()
    }

    fn fresh_prime(&self, labeled: &[Labeled]) -> Result<BigInt, HypothesisError> {
        let values: Vec<BigInt> = labeled.iter().filter_map(|(x, _)| int_of(x)).collect();
        let mut c = BigInt::from(3);
        for _ in 0..self.budget {
            if is_prime(&c) && !values.iter().any(|v| in_family(&c, v)) {
                return Ok(c);
            }
            c += 2;
        }
        Err(HypothesisError::Precondition(format!("no fresh prime within {} candidates", self.budget)))
    }
}

impl ClassOracle for PrimeReals {
    fn name(&self) -> String {
        match &self.only {
            Some(p) => format!("prime_reals[p={p}]"),
            None => "prime_reals".into(),
        }
    }

    fn metric(&self) -> &Metric {
        &Metric::Abs
    }

    fn consistent(&self, sample: &[Point]) -> bool {
        self.classify(sample).is_some()
    }

    fn closure(&self, sample: &[Point]) -> Result<Option<Support>, HypothesisError> {
        Ok(self.classify(sample).map(|base| match base {
            Some(p) => Support::new(sample.iter().cloned(), families(&p)),
            None => Support::from_points(sample.iter().cloned()),
        }))
    }

    fn erm(&self, labeled: &[Labeled]) -> Result<usize, HypothesisError> {
        let primes: BTreeSet<BigInt> = match &self.only {
            Some(p) => [p.clone()].into(),
            None => {
                let mut s: BTreeSet<BigInt> = labeled
                    .iter()
                    .filter_map(|(x, _)| int_of(x))
                    .flat_map(|v| [odd_prime_base(&v), odd_prime_base(&(&v + 1))])
                    .flatten()
                    .collect();
                s.insert(self.fresh_prime(labeled)?);
                s
            }
        };
        Ok(primes.iter().map(|p| self.cost(p, labeled)).min().unwrap_or(0))
    }

    fn universe(&self) -> PointIter {
        let all = Lattice::new(LatticeKind::Real, BigInt::from(0), BigInt::one(), false).expect("unit lattice");
        Family::Lattice(all).iter()
    }

    fn uus(&self, r: &Scalar) -> UusResult {
        let p = self.only.clone().unwrap_or_else(|| BigInt::from(3));
        let [powers, _] = families(&p);
        match Support::new([], [powers]).cover_number(&Metric::Abs, r, &[]) {
            Ok(CoverResult::Infinite(w)) => UusResult::Satisfied(vec![w]),
            _ => UusResult::UnknownAtBudget,
        }
    }
}

/// The class with the given fresh-prime search budget.
pub fn fixture_prime_reals(budget: usize) -> HypothesisClass {
    HypothesisClass::Intensional(Arc::new(PrimeReals::new(budget)))
}

/// One sub-class per odd prime, for the limit generator.
pub fn slices(count: usize, budget: usize) -> Vec<HypothesisClass> {
    crate::hypothesis::odd_primes(count)
        .into_iter()
        .map(|p| HypothesisClass::Intensional(Arc::new(PrimeReals::at(p, budget))) as HypothesisClass)
        .collect()
}

/// `A_p` together with the given even set.
pub fn target(p: u64, evens: Option<Lattice>, extra: &[Point]) -> Hypothesis {
    let p = BigInt::from(p);
    let mut fams: Vec<Family> = families(&p).into();
    let name = match &evens {
        Some(l) => format!("A_{p}+evens(step={})", l.step()),
        None => format!("A_{p}"),
    };
    fams.extend(evens.map(Family::Lattice));
    Hypothesis::new(name, Support::new(extra.iter().cloned(), fams))
}

/// Positive multiples of `step` (even `step`).
pub fn evens_step(step: i64) -> Lattice {
    Lattice::new(LatticeKind::Real, BigInt::from(step), BigInt::from(step), true).expect("positive step")
}

/// Emits the first sample point until an odd prime power `p^k` shows up,
/// then the least novel `p^n`.
pub struct PowerChaser {
    novelty: NoveltyCache,
    budget: usize,
}

impl PowerChaser {
    pub fn new(eps_prime: &Scalar, budget: usize) -> Self {
        PowerChaser { novelty: NoveltyCache::new(Metric::Abs, eps_prime.clone()), budget }
    }
}

impl Generator for PowerChaser {
    fn name(&self) -> String {
        "prime_powers".into()
    }

    fn step(&mut self, seen: &[Point]) -> Result<Move, PlayerError> {
        let Some(p) = seen.iter().filter_map(int_of).find_map(|v| odd_prime_base(&v)) else {
            return Ok(seen.first().cloned().map_or(Move::Abstain, Move::Emit));
        };
        let powers = (1..).map(|n| Point::real(Scalar::int(num_traits::pow(p.clone(), n))));
        match self.novelty.first_novel(seen, powers, self.budget)? {
            Some(z) => Ok(Move::Emit(z)),
            None => Err(PlayerError::SearchBudgetExhausted(self.budget)),
        }
    }
}

/// Stage 0 walks `3^m - 1`; stage `m` walks `p_m^j - 1` with `p_1 = 5, p_2 = 7, ...`.
pub struct PrimeStages {
    primes: Vec<BigInt>,
}

impl PrimeStages {
    pub fn new(stages: usize) -> Self {
        PrimeStages { primes: crate::hypothesis::odd_primes(stages + 1).into_iter().map(BigInt::from).collect() }
    }

    fn prime(&self, n: usize) -> &BigInt {
        &self.primes[n.min(self.primes.len() - 1)]
    }
}

impl StagedPlan for PrimeStages {
    fn anchors(&self) -> Vec<Point> {
        Vec::new()
    }

    fn row(&self, i: usize, j: usize) -> Point {
        Point::real(Scalar::int(num_traits::pow(self.prime(i).clone(), j) - 1))
    }

    fn in_protected(&self, n: usize, p: &Point) -> bool {
        int_of(p).is_some_and(|v| in_family(self.prime(n), &v))
    }

    fn hypothesis(&self, n: usize, revealed: &[Point]) -> Arc<dyn Concept> {
        let p = self.prime(n);
        let evens: Vec<Point> = revealed.iter().filter(|x| int_of(x).is_some_and(|v| positive_even(&v))).cloned().collect();
        Arc::new(Hypothesis::new(format!("A_{p}+revealed"), Support::new(evens, families(p))))
    }
}

pub(super) fn spec() -> FixtureSpec {
    FixtureSpec {
        name: "prime_reals",
        summary: "odd prime-power pairs plus positive evens on the real line, r = 1",
        params: vec![("r", "1".into()), ("limit_primes", LIMIT_PRIMES.to_string())],
        expected_regimes: vec![
            Regime::new("fixture generator", Scalar::new(1, 2), Scalar::one(), Expect::Generatable),
            Regime::new("limit generator", Scalar::new(1, 2), Scalar::one(), Expect::Generatable),
            Regime::new("staged trap vs fixture", Scalar::one(), Scalar::one(), Expect::NotGeneratable),
            Regime::new("staged trap vs limit", Scalar::one(), Scalar::one(), Expect::NotGeneratable),
        ],
    }
}

/// Targets an obligated adversary may pick.
pub fn obligated_targets() -> Vec<Hypothesis> {
    vec![
        target(3, Some(evens_step(2)), &[]),
        target(5, Some(evens_step(4)), &[]),
        target(7, Some(evens_step(2)), &[]),
        target(3, None, &[Point::real(10), Point::real(12)]),
    ]
}

fn run(
    gen: &mut dyn Generator,
    adv: &mut dyn Adversary,
    gamma: &Scalar,
    gamma_prime: &Scalar,
    horizon: usize,
    budget: usize,
    upfront: Option<Arc<dyn Concept>>,
) -> Result<Transcript, FixtureError> {
    let mut cfg = GameConfig::new(gamma.clone(), gamma_prime.clone(), Scalar::one(), horizon);
    cfg.budget = budget;
    let class = fixture_prime_reals(budget);
    let policy = upfront.map_or(CommitPolicy::Deferred, CommitPolicy::Upfront);
    Ok(run_game(&cfg, &class, adv, gen, policy)?)
}

/// Obligated enumeration games against one generator maker, one per target.
pub fn obligated_runs(
    gamma: &Scalar,
    gamma_prime: &Scalar,
    make: &dyn Fn() -> Box<dyn Generator>,
    horizon: usize,
    budget: usize,
) -> Result<Vec<Transcript>, FixtureError> {
    let mut out = Vec::new();
    for (i, h) in obligated_targets().into_iter().enumerate() {
        let h: Arc<dyn Concept> = Arc::new(h);
        let mut adv = Enumeration::shuffled(h.clone(), 4, i as u64);
        let mut gen = make();
        out.push(run(gen.as_mut(), &mut adv, gamma, gamma_prime, horizon, budget, Some(h))?);
    }
    Ok(out)
}

/// Staged trap against one generator; the target is fixed at the horizon.
pub fn staged_run(
    gamma: &Scalar,
    gamma_prime: &Scalar,
    gen: &mut dyn Generator,
    horizon: usize,
    budget: usize,
) -> Result<Transcript, FixtureError> {
    let mut adv = StagedTrap::new(
        Arc::new(PrimeStages::new(horizon)),
        horizon,
        WorstCase::new(Metric::Abs, gamma_prime.clone()),
    );
    run(gen, &mut adv, gamma, gamma_prime, horizon, budget, None)
}

/// Failure verdict whose last error lies past `late`.
pub fn fails_late(v: &Verdict, late: usize) -> bool {
    matches!(v, Verdict::FailsWithinHorizon(e) if e.last().is_some_and(|&t| t > late))
}

pub(super) fn verify(spec: &FixtureSpec, budget: usize) -> Result<Vec<RegimeRow>, FixtureError> {
    let r = &spec.expected_regimes;
    let mut rows = Vec::new();
    let (g, gp) = (r[0].gamma.clone(), r[0].gamma_prime.clone());
    let runs = obligated_runs(&g, &gp, &|| Box::new(PowerChaser::new(&gp, budget)), 400, budget)?;
    let verdicts: Vec<Verdict> = runs.iter().map(judge_limit).collect();
    rows.push(row(&r[0], summarize(&verdicts), verdicts.iter().all(Verdict::is_correct)));
    let g = r[1].gamma.clone();
    let runs = obligated_runs(&g, &gp, &|| Box::new(Limit::new(slices(LIMIT_PRIMES, budget), 0, &g, &gp, budget)), 400, budget)?;
    let verdicts: Vec<Verdict> = runs.iter().map(judge_limit).collect();
    rows.push(row(&r[1], summarize(&verdicts), verdicts.iter().all(Verdict::is_correct)));
    let (g, gp) = (&r[2].gamma, &r[2].gamma_prime);
    let v = judge_limit(&staged_run(g, gp, &mut PowerChaser::new(gp, budget), 200, budget)?);
    rows.push(row(&r[2], v.to_string(), fails_late(&v, 150)));
    let mut lim = Limit::new(slices(LIMIT_PRIMES, budget), 0, &r[3].gamma, &r[3].gamma_prime, budget);
    let v = judge_limit(&staged_run(&r[3].gamma, &r[3].gamma_prime, &mut lim, 200, budget)?);
    rows.push(row(&r[3], v.to_string(), fails_late(&v, 150)));
    Ok(rows)
}

pub(super) fn summarize(verdicts: &[Verdict]) -> String {
    let correct = verdicts.iter().filter(|v| v.is_correct()).count();
    format!("eventually_correct {correct}/{}", verdicts.len())
}

pub(super) fn generator(spec: &PlayerSpec, ctx: &PlayerContext) -> Result<Option<Box<dyn Generator>>, FixtureError> {
    let budget = spec.parse_or("budget", ctx.budget)?;
    Ok(match spec.name.as_str() {
        "fixture" => Some(Box::new(PowerChaser::new(&ctx.eps_prime, budget))),
        "limit" => {
            let n = spec.parse_or("primes", LIMIT_PRIMES)?;
            Some(Box::new(Limit::new(slices(n, budget), 0, &ctx.eps, &ctx.eps_prime, budget)))
        }
        _ => None,
    })
}

pub(super) fn adversary(spec: &PlayerSpec, ctx: &PlayerContext) -> Result<Option<Box<dyn Adversary>>, FixtureError> {
    Ok(match spec.name.as_str() {
        "staged_trap" => {
            let stages = spec.parse_or("stages", 400usize)?;
            Some(Box::new(StagedTrap::new(
                Arc::new(PrimeStages::new(stages)),
                spec.parse_or("stage_budget", stages)?,
                WorstCase::new(Metric::Abs, ctx.eps_prime.clone()),
            )))
        }
        "obligated" => {
            let i: usize = spec.parse_or("target", 0)?;
            let targets = obligated_targets();
            let h = targets.get(i).ok_or_else(|| FixtureError::Param(format!("target={i}")))?;
            let seed = spec.parse_or("seed", ctx.seed)?;
            Some(Box::new(Enumeration::shuffled(Arc::new(h.clone()), spec.parse_or("window", 4)?, seed)))
        }
        _ => None,
    })
}

/// Budgeted explicit restriction to the integers in `lo..=hi`: one member
/// per listed prime and per subset of the window's positive evens.
pub fn truncation(lo: i64, hi: i64, primes: &[u64]) -> Result<(crate::hypothesis::ExplicitClass, Vec<Point>), FixtureError> {
    let universe: Vec<Point> = (lo..=hi).map(Point::real).collect();
    let evens: Vec<Point> = (lo..=hi).filter(|v| *v > 0 && v % 2 == 0).map(Point::real).collect();
    let mut members = Vec::new();
    let mut seen = BTreeSet::new();
    for &p in primes {
        let bp = BigInt::from(p);
        let a: Vec<Point> = universe.iter().filter(|x| int_of(x).is_some_and(|v| in_family(&bp, &v))).cloned().collect();
        for mask in 0u32..(1 << evens.len()) {
            let mut pts: BTreeSet<Point> = a.iter().cloned().collect();
            pts.extend(evens.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, x)| x.clone()));
            if seen.insert(pts.clone()) {
                members.push(Hypothesis::new(format!("h{}", members.len()), Support::from_points(pts)));
            }
        }
    }
    Ok((crate::hypothesis::ExplicitClass::new("prime_reals_truncated", Metric::Abs, members)?, universe))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::closure_enumerate;

    fn r(v: i64) -> Point {
        Point::real(v)
    }

    fn class() -> HypothesisClass {
        fixture_prime_reals(500)
    }

    #[test]
    fn consistency_and_closure() {
        let c = class();
        let o = c.oracle();
        assert!(o.consistent(&[r(3), r(9), r(4)]));
        assert!(!o.consistent(&[r(3), r(5)]));
        assert!(!o.consistent(&[r(1)]));
        assert!(!o.consistent(&[r(-2)]));
        assert!(!o.consistent(&[r(15)]));
        assert_eq!(closure_enumerate(&c, &[r(9)], 6).unwrap(), vec![r(2), r(3), r(8), r(9), r(26), r(27)]);
        assert_eq!(closure_enumerate(&c, &[r(4), r(6)], 5).unwrap(), vec![r(4), r(6)]);
        assert_eq!(o.closure(&[]).unwrap(), Some(Support::empty()));
    }

    #[test]
    fn erm_counts() {
        let o = PrimeReals::new(500);
        assert_eq!(o.erm(&[(r(3), true), (r(26), false)]).unwrap(), 1);
        assert_eq!(o.erm(&[(r(3), true), (r(5), true)]).unwrap(), 1);
        assert_eq!(o.erm(&[(r(4), true), (r(4), false)]).unwrap(), 1);
        assert_eq!(o.erm(&[(r(2), false), (r(4), false)]).unwrap(), 0);
        assert_eq!(o.erm(&[]).unwrap(), 0);
    }

    #[test]
    fn pair_points_share_a_ball() {
        // p^n and p^n - 1 are exactly r = 1 apart
        let mut n = NoveltyCache::new(Metric::Abs, Scalar::one());
        assert!(!n.is_novel(&[r(24)], &r(25)).unwrap());
        assert!(n.is_novel(&[r(24)], &r(125)).unwrap());
    }

    #[test]
    fn chaser_follows_first_prime_power() {
        let mut g = PowerChaser::new(&Scalar::one(), 100);
        assert_eq!(g.step(&[r(4)]).unwrap(), Move::Emit(r(4)));
        assert_eq!(g.step(&[r(4), r(9), r(26)]).unwrap(), Move::Emit(r(81)));
        assert_eq!(g.step(&[r(4), r(2), r(9), r(26), r(80)]).unwrap(), Move::Emit(r(243)));
    }

    #[test]
    fn staged_rows() {
        let plan = PrimeStages::new(5);
        assert_eq!(plan.row(0, 2), r(8));
        assert_eq!(plan.row(1, 2), r(24));
        assert_eq!(plan.row(2, 1), r(6));
        assert!(plan.in_protected(1, &r(125)));
        assert!(!plan.in_protected(1, &r(27)));
        let h = plan.hypothesis(0, &[r(24)]);
        assert!(h.contains(&r(24)) && h.contains(&r(27)) && !h.contains(&r(25)));
    }

    #[test]
    fn uus_holds() {
        assert!(class().oracle().uus(&Scalar::one()).is_satisfied());
    }

    #[test]
    fn truncation_agrees_on_small_queries() {
        let (t, u) = truncation(-2, 10, &[3, 5, 7, 11]).unwrap();
        let o = PrimeReals::new(500);
        for x in &u {
            for y in &u {
                let s = [x.clone(), y.clone()];
                assert_eq!(o.consistent(&s), t.consistent(&s), "{s:?}");
            }
        }
    }
}
