//! Sequence-space class with far points `u_k = 2r e_k`, near points
//! `g_k = eps' sqrt2/2 e_k` closed under index powers, and two free levels of
//! small points `a_{k,1}`, `a_{k,2}`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::{as_basis, basis, row, Expect, FixtureError, FixtureSpec, Regime, RegimeRow};
use crate::game::{judge_limit, judge_nonuniform, judge_uniform, run_game, CommitPolicy, GameConfig, Transcript, Verdict};
use crate::hypothesis::{
    root_base, BasisFamily, ClassOracle, Concept, ExplicitClass, Family, Hypothesis, HypothesisClass, HypothesisError,
    IndexSet, Labeled, PointIter, Support, UusResult,
};
use crate::metric_core::{CoverResult, Coord, Metric, Point, Scalar};
use crate::players::{
    Adversary, Enumeration, Generator, Move, NoveltyCache, PlayerContext, PlayerError, PlayerSpec, Scripted, Uniform,
};

const MAX_GROUP: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    U(u64),
    Small(u64),
    G(u64),
}

#[derive(Clone, Debug)]
pub struct L2Case2 {
    u: Coord,
    a1: Coord,
    a2: Coord,
    g: Coord,
}

impl L2Case2 {
    pub fn new(r: &Scalar, eps1: &Scalar, eps2: &Scalar, eps_prime: &Scalar) -> Result<Self, FixtureError> {
        let pos = |x: &Scalar| x.is_positive() && x <= r;
        if !(pos(eps1) && pos(eps2) && pos(eps_prime) && eps1 <= eps2) {
            return Err(FixtureError::Param(format!("need 0 < eps1 <= eps2 <= r and 0 < eps' <= r; got {eps1}, {eps2}, {eps_prime}")));
        }
        if eps_prime == eps1 || eps_prime == eps2 {
            return Err(FixtureError::Param("eps' must differ from both small-point scales".into()));
        }
        Ok(L2Case2 {
            u: Coord::plain(r + r),
            a1: Coord::sqrt2half(eps1.clone()),
            a2: Coord::sqrt2half(eps2.clone()),
            g: Coord::sqrt2half(eps_prime.clone()),
        })
    }

    pub fn u(&self, k: u64) -> Point {
        basis(k, &self.u)
    }

    pub fn a1(&self, k: u64) -> Point {
        basis(k, &self.a1)
    }

    pub fn a2(&self, k: u64) -> Point {
        basis(k, &self.a2)
    }

    pub fn g(&self, k: u64) -> Point {
        basis(k, &self.g)
    }

    fn kind(&self, p: &Point) -> Option<Kind> {
        let (k, c) = as_basis(p)?;
        if *c == self.u && k >= 2 {
            Some(Kind::U(k))
        } else if *c == self.g && k >= 2 {
            Some(Kind::G(k))
        } else if *c == self.a1 || *c == self.a2 {
            Some(Kind::Small(k))
        } else {
            None
        }
    }

    fn powers_family(&self, k: u64) -> Family {
        Family::Basis(BasisFamily::new(self.g.clone(), IndexSet::powers(k)).expect("nonzero"))
    }

    /// Far and near points on `powers(b)`, level-1 small points on `i2`,
    /// level-2 small points on the finite `j`.
    pub fn target(&self, b: u64, i2: IndexSet, j: &[u64]) -> Result<Hypothesis, FixtureError> {
        if b < 2 {
            return Err(FixtureError::Param(format!("base {b} must be at least 2")));
        }
        let fams = [
            Family::Basis(BasisFamily::new(self.u.clone(), IndexSet::powers(b))?),
            self.powers_family(b),
            Family::Basis(BasisFamily::new(self.a1.clone(), i2.clone())?),
        ];
        let pts = j.iter().map(|&k| self.a2(k));
        Ok(Hypothesis::new(format!("h[b={b},I2={i2},J={j:?}]"), Support::new(pts, fams)))
    }
}

fn group_of(k: u64) -> (u64, u32) {
    let (b, e) = root_base(&BigInt::from(k));
    (b.to_u64().expect("fits"), e)
}

fn divisors(e: u32) -> impl Iterator<Item = u32> {
    (1..=e).filter(move |d| e % d == 0)
}

impl ClassOracle for L2Case2 {
    fn name(&self) -> String {
        "l2_case2".into()
    }

    fn metric(&self) -> &Metric {
        &Metric::L2
    }

    fn consistent(&self, sample: &[Point]) -> bool {
        sample.iter().all(|p| self.kind(p).is_some())
    }

    fn closure(&self, sample: &[Point]) -> Result<Option<Support>, HypothesisError> {
        let mut fams = Vec::new();
        let mut pts: Vec<Point> = sample.to_vec();
        for p in sample {
            match self.kind(p) {
                None => return Ok(None),
                Some(Kind::U(k)) => fams.push(self.powers_family(k)),
                Some(Kind::G(m)) => {
                    fams.push(self.powers_family(m));
                    // m is only reachable from itself
                    if group_of(m).1 == 1 {
                        pts.push(self.u(m));
                    }
                }
                Some(Kind::Small(_)) => {}
            }
        }
        Ok(Some(Support::new(pts, fams)))
    }

    fn erm(&self, labeled: &[Labeled]) -> Result<usize, HypothesisError> {
        let mut cost = 0;
        let mut free: BTreeMap<&Point, (usize, usize)> = BTreeMap::new();
        let mut far: BTreeMap<u64, (usize, usize)> = BTreeMap::new();
        let mut near: BTreeMap<u64, (usize, usize)> = BTreeMap::new();
        let bump = |e: &mut (usize, usize), y: bool| if y { e.0 += 1 } else { e.1 += 1 };
        for (x, y) in labeled {
            match self.kind(x) {
                None => cost += usize::from(*y),
                Some(Kind::Small(_)) => bump(free.entry(x).or_default(), *y),
                Some(Kind::U(k)) => bump(far.entry(k).or_default(), *y),
                Some(Kind::G(m)) => bump(near.entry(m).or_default(), *y),
            }
        }
        cost += free.values().map(|&(p, n)| p.min(n)).sum::<usize>();
        // choices of far indices split by root base; candidate exponents per base
        let mut groups: BTreeMap<u64, BTreeSet<u32>> = BTreeMap::new();
        for &k in far.keys() {
            let (b, e) = group_of(k);
            groups.entry(b).or_default().insert(e);
        }
        for &m in near.keys() {
            let (b, e) = group_of(m);
            groups.entry(b).or_default().extend(divisors(e));
        }
        for (b, exps) in groups {
            let exps: Vec<u32> = exps.into_iter().collect();
            if exps.len() > MAX_GROUP {
                return Err(HypothesisError::Precondition(format!("{} candidate roots share base {b}", exps.len())));
            }
            let far_here: Vec<(u32, (usize, usize))> =
                far.iter().filter(|(k, _)| group_of(**k).0 == b).map(|(k, c)| (group_of(*k).1, *c)).collect();
            let near_here: Vec<(u32, (usize, usize))> =
                near.iter().filter(|(m, _)| group_of(**m).0 == b).map(|(m, c)| (group_of(*m).1, *c)).collect();
            let mut best = usize::MAX;
            for mask in 0u32..(1 << exps.len()) {
                let chosen: Vec<u32> = exps.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, e)| *e).collect();
                let mut c = 0;
                for (e, (p, n)) in &far_here {
                    c += if chosen.contains(e) { n } else { p };
                }
                for (e, (p, n)) in &near_here {
                    c += if chosen.iter().any(|d| e % d == 0) { n } else { p };
                }
                best = best.min(c);
            }
            cost += best;
        }
        Ok(cost)
    }

    fn universe(&self) -> PointIter {
        let this = self.clone();
        Box::new((1u64..).flat_map(move |k| {
            let mut v = vec![this.a1(k), this.a2(k)];
            if k >= 2 {
                v.push(this.u(k));
                v.push(this.g(k));
            }
            v.sort();
            v
        }))
    }

    fn uus(&self, r: &Scalar) -> UusResult {
        let far = Support::new([], [Family::Basis(BasisFamily::new(self.u.clone(), IndexSet::evens()).expect("nonzero"))]);
        match far.cover_number(&Metric::L2, r, &[]) {
            Ok(CoverResult::Infinite(w)) => UusResult::Satisfied(vec![w]),
            Ok(_) => UusResult::ViolatedBy("far points coverable".into()),
            Err(_) => UusResult::UnknownAtBudget,
        }
    }
}

pub fn default_oracle() -> L2Case2 {
    L2Case2::new(&Scalar::one(), &Scalar::new(3, 10), &Scalar::new(6, 10), &Scalar::new(1, 2)).expect("valid defaults")
}

pub fn fixture_l2_case2() -> HypothesisClass {
    HypothesisClass::Intensional(Arc::new(default_oracle()))
}

/// At the first revealed far or near point with index `K`, emits the least
/// novel `g_{K^n}`.
pub struct PowerIndexChaser {
    class: L2Case2,
    novelty: NoveltyCache,
    budget: usize,
}

impl PowerIndexChaser {
    pub fn new(class: L2Case2, eps_prime: &Scalar, budget: usize) -> Self {
        PowerIndexChaser { class, novelty: NoveltyCache::new(Metric::L2, eps_prime.clone()), budget }
    }
}

impl Generator for PowerIndexChaser {
    fn name(&self) -> String {
        "power_index_chaser".into()
    }

    fn step(&mut self, seen: &[Point]) -> Result<Move, PlayerError> {
        let Some(k) = seen.iter().find_map(|p| match self.class.kind(p) {
            Some(Kind::U(k) | Kind::G(k)) => Some(k),
            _ => None,
        }) else {
            return Ok(Move::Abstain);
        };
        let g = self.class.g.clone();
        let cands = (1u32..).map_while(move |n| k.checked_pow(n)).map(move |i| basis(i, &g));
        match self.novelty.first_novel(seen, cands, self.budget)? {
            Some(z) => Ok(Move::Emit(z)),
            None => Err(PlayerError::SearchBudgetExhausted(self.budget)),
        }
    }
}

pub(super) fn spec() -> FixtureSpec {
    FixtureSpec {
        name: "l2_case2",
        summary: "power-closed near points with two free small levels; r = 1, eps1 = 3/10, eps2 = 6/10, eps' = 1/2",
        params: vec![
            ("r", "1".into()),
            ("eps1", "3/10".into()),
            ("eps2", "3/5".into()),
            ("eps_prime", "1/2".into()),
        ],
        expected_regimes: vec![
            Regime::new("(a)", Scalar::new(7, 10), Scalar::new(2, 5), Expect::Uniform(2)),
            Regime::new("(b)", Scalar::new(2, 5), Scalar::new(2, 5), Expect::NonUniformOnly(2)),
            Regime::new("(c)", Scalar::new(1, 5), Scalar::new(2, 5), Expect::Generatable),
            Regime::new("(d)", Scalar::new(2, 5), Scalar::new(1, 2), Expect::NoValidMove),
        ],
    }
}

/// Twenty obligated targets, one per seed.
pub fn obligated_targets(class: &L2Case2) -> Vec<Hypothesis> {
    let bases = [2, 3, 5, 7];
    let small = [IndexSet::all(), IndexSet::evens(), IndexSet::residue(3, 1)];
    let levels: [&[u64]; 3] = [&[], &[1, 2], &[4]];
    (0..20).map(|i| class.target(bases[i % 4], small[i % 3].clone(), levels[i % 3]).expect("valid target")).collect()
}

fn config(gamma: &Scalar, gamma_prime: &Scalar, horizon: usize, budget: usize) -> GameConfig {
    let mut cfg = GameConfig::new(gamma.clone(), gamma_prime.clone(), Scalar::one(), horizon);
    cfg.budget = budget;
    cfg
}

/// Obligated enumeration games, one per target seed.
pub fn obligated_runs(
    gamma: &Scalar,
    gamma_prime: &Scalar,
    make: &dyn Fn() -> Box<dyn Generator>,
    horizon: usize,
    budget: usize,
) -> Result<Vec<Transcript>, FixtureError> {
    let class = fixture_l2_case2();
    let mut out = Vec::new();
    for (seed, h) in obligated_targets(&default_oracle()).into_iter().enumerate() {
        let h: Arc<dyn Concept> = Arc::new(h);
        let mut adv = Enumeration::shuffled(h.clone(), 4, seed as u64);
        let mut gen = make();
        out.push(run_game(&config(gamma, gamma_prime, horizon, budget), &class, &mut adv, gen.as_mut(), CommitPolicy::Upfront(h))?);
    }
    Ok(out)
}

/// Reveals `d` small points of one level first, then enumerates a target
/// that contains them.
pub fn prefix_adversary(level: u8, d: u64, seed: u64) -> (Scripted, Arc<dyn Concept>) {
    let o = default_oracle();
    let ks: Vec<u64> = (1..=d).collect();
    let (pts, h) = if level == 2 {
        (ks.iter().map(|&k| o.a2(k)).collect(), o.target(2, IndexSet::all(), &ks))
    } else {
        (ks.iter().map(|&k| o.a1(k)).collect(), o.target(3, IndexSet::all(), &[]))
    };
    let h: Arc<dyn Concept> = Arc::new(h.expect("valid target"));
    (Scripted::new(pts, None).then(Box::new(Enumeration::shuffled(h.clone(), 4, seed))), h)
}

pub fn prefix_run(
    level: u8,
    d: u64,
    gamma: &Scalar,
    gamma_prime: &Scalar,
    gen: &mut dyn Generator,
    horizon: usize,
    budget: usize,
) -> Result<Transcript, FixtureError> {
    let (mut adv, h) = prefix_adversary(level, d, d);
    Ok(run_game(&config(gamma, gamma_prime, horizon, budget), &fixture_l2_case2(), &mut adv, gen, CommitPolicy::Upfront(h))?)
}

pub(super) fn verify(spec: &FixtureSpec, budget: usize) -> Result<Vec<RegimeRow>, FixtureError> {
    let r = &spec.expected_regimes;
    let o = default_oracle();
    let mut rows = Vec::new();

    let (g, gp) = (r[0].gamma.clone(), r[0].gamma_prime.clone());
    let oc = o.clone();
    let mut runs = obligated_runs(&g, &gp, &|| Box::new(PowerIndexChaser::new(oc.clone(), &gp, budget)), 200, budget)?;
    runs.extend(obligated_runs(&g, &gp, &|| Box::new(Uniform::new(fixture_l2_case2(), &g, &gp, 2, budget)), 200, budget)?.into_iter().take(5));
    let v: Vec<Verdict> = runs.iter().map(|t| judge_uniform(t, 2)).collect();
    rows.push(row(&r[0], super::prime_reals::summarize(&v), v.iter().all(Verdict::is_correct)));

    let (g, gp) = (&r[1].gamma, &r[1].gamma_prime);
    let d = 3;
    let tr = prefix_run(2, d, g, gp, &mut PowerIndexChaser::new(o.clone(), gp, budget), 200, budget)?;
    let (uni, non) = (judge_uniform(&tr, 2), judge_nonuniform(&tr, d as usize + 2));
    let obs = format!("uniform(2)={uni} nonuniform({})={non}", d + 2);
    rows.push(row(&r[1], obs, uni.is_failure() && non.is_correct()));

    let (g, gp) = (r[2].gamma.clone(), r[2].gamma_prime.clone());
    let oc = o.clone();
    let runs = obligated_runs(&g, &gp, &|| Box::new(PowerIndexChaser::new(oc.clone(), &gp, budget)), 200, budget)?;
    let v: Vec<Verdict> = runs.iter().map(judge_limit).collect();
    let mut forced = 0;
    for d in 1..=6u64 {
        let tr = prefix_run(1, d, &g, &gp, &mut PowerIndexChaser::new(o.clone(), &gp, budget), 50, budget)?;
        if judge_nonuniform(&tr, d as usize).is_failure() {
            forced += 1;
        }
    }
    let obs = format!("{} forced_errors {forced}/6", super::prime_reals::summarize(&v));
    rows.push(row(&r[2], obs, v.iter().all(Verdict::is_correct) && forced == 6));

    let found = super::find_valid_move(&fixture_l2_case2(), &[o.g(4)], &r[3].gamma_prime, budget)?;
    let obs = match &found {
        Some(p) => format!("valid move {p}"),
        None => format!("none in {budget} candidates"),
    };
    rows.push(row(&r[3], obs, found.is_none()));
    Ok(rows)
}

pub(super) fn generator(spec: &PlayerSpec, c: &PlayerContext) -> Result<Option<Box<dyn Generator>>, FixtureError> {
    let budget = spec.parse_or("budget", c.budget)?;
    Ok(match spec.name.as_str() {
        "fixture" => Some(Box::new(PowerIndexChaser::new(default_oracle(), &c.eps_prime, budget))),
        _ => None,
    })
}

pub(super) fn adversary(spec: &PlayerSpec, c: &PlayerContext) -> Result<Option<Box<dyn Adversary>>, FixtureError> {
    let o = default_oracle();
    Ok(match spec.name.as_str() {
        "obligated" => {
            let seed: usize = spec.parse_or("seed", c.seed as usize)?;
            let targets = obligated_targets(&o);
            let h = targets[seed % targets.len()].clone();
            Some(Box::new(Enumeration::shuffled(Arc::new(h), spec.parse_or("window", 4)?, seed as u64)))
        }
        "prefix" => {
            let level: u8 = spec.parse_or("level", 2)?;
            let d: u64 = spec.parse_or("d", 3)?;
            Some(Box::new(prefix_adversary(level, d, spec.parse_or("seed", c.seed)?).0))
        }
        _ => None,
    })
}

/// Explicit restriction to `u_2..u_4`, `g_2..g_4` and small points at indices 1 and 2.
pub fn truncation() -> Result<(ExplicitClass, Vec<Point>), FixtureError> {
    let o = default_oracle();
    let far = [2u64, 3, 4];
    let mut universe: Vec<Point> = far.iter().flat_map(|&k| [o.u(k), o.g(k)]).collect();
    let small: Vec<Point> = [1, 2].iter().flat_map(|&k| [o.a1(k), o.a2(k)]).collect();
    universe.extend(small.iter().cloned());
    let mut members = Vec::new();
    for t in 0u32..8 {
        let chosen: Vec<u64> = far.iter().enumerate().filter(|(i, _)| t >> i & 1 == 1).map(|(_, k)| *k).collect();
        for s in 0u32..16 {
            let mut pts: BTreeSet<Point> = chosen.iter().map(|&k| o.u(k)).collect();
            for &k in &chosen {
                pts.extend(far.iter().filter(|&&m| crate::hypothesis::numth::log_exact(&BigInt::from(m), &BigInt::from(k)).is_some_and(|n| n >= 1)).map(|&m| o.g(m)));
            }
            pts.extend(small.iter().enumerate().filter(|(i, _)| s >> i & 1 == 1).map(|(_, p)| p.clone()));
            members.push(Hypothesis::new(format!("h{}", members.len()), Support::from_points(pts)));
        }
    }
    Ok((ExplicitClass::new("l2_case2_truncated", Metric::L2, members)?, universe))
}
