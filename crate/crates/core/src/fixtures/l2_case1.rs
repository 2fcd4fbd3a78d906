//! Sequence-space class with far points `u_k = 2r e_k`, anchors
//! `a_{2K} = eps e_{2K}` and near points `g_{2m+1} = eps' e_{2m+1}`.
//! Revealing `a_{2K}` forces every `g_{2K^n + 1}`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::BigInt;

use super::{as_basis, basis, row, Expect, FixtureError, FixtureSpec, Regime, RegimeRow};
use crate::game::{defeated, judge_limit, run_game, CommitPolicy, GameConfig, Transcript, Verdict};
use crate::hypothesis::{
    root_base, BasisFamily, ClassOracle, Concept, ExplicitClass, Family, Hypothesis, HypothesisClass, HypothesisError,
    IndexSet, Labeled, PointIter, Support, UusResult,
};
use crate::metric_core::{CoverResult, Coord, Metric, Point, Scalar};
use crate::players::{
    Adversary, Enumeration, Generator, Limit, Move, NoveltyCache, PlayerContext, PlayerError, PlayerSpec, StagedPlan,
    StagedTrap, WorstCase,
};

const MAX_GROUP: usize = 20;
pub const LIMIT_MAX_K: u64 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Origin,
    U(u64),
    /// `a_{2K}`
    A(u64),
    /// `g_{2m+1}`
    G(u64),
}

#[derive(Clone, Debug)]
pub struct L2Case1 {
    u: Coord,
    a: Coord,
    g: Coord,
    /// Slice `H_K`: `K` is always in the anchor index set.
    forced: Option<u64>,
}

impl L2Case1 {
    pub fn new(r: &Scalar, eps: &Scalar, eps_prime: &Scalar) -> Result<Self, FixtureError> {
        if !eps.is_positive() || !eps_prime.is_positive() || eps > r || eps_prime > r {
            return Err(FixtureError::Param(format!("need 0 < eps, eps' <= r; got eps={eps} eps'={eps_prime} r={r}")));
        }
        Ok(L2Case1 {
            u: Coord::plain(r + r),
            a: Coord::plain(eps.clone()),
            g: Coord::plain(eps_prime.clone()),
            forced: None,
        })
    }

    pub fn slice(&self, k: u64) -> Self {
        L2Case1 { forced: Some(k), ..self.clone() }
    }

    pub fn u(&self, k: u64) -> Point {
        basis(k, &self.u)
    }

    pub fn a(&self, k: u64) -> Point {
        basis(2 * k, &self.a)
    }

    pub fn g(&self, m: u64) -> Point {
        basis(2 * m + 1, &self.g)
    }

    fn kind(&self, p: &Point) -> Option<Kind> {
        if p.as_vec()?.entries().is_empty() {
            return Some(Kind::Origin);
        }
        let (k, c) = as_basis(p)?;
        if *c == self.u {
            return Some(Kind::U(k));
        }
        if *c == self.a && k % 2 == 0 {
            return Some(Kind::A(k / 2));
        }
        if *c == self.g && k % 2 == 1 && k >= 3 {
            return Some(Kind::G(k / 2));
        }
        None
    }

    /// Near points forced by anchor `K`.
    fn forced_family(&self, k: u64) -> Family {
        if k == 1 {
            return Family::Basis(BasisFamily::new(self.g.clone(), IndexSet::explicit([3])).expect("nonzero"));
        }
        let idx = IndexSet::Geometric { scale: 2, base: k, shift: 1, from: 1 };
        Family::Basis(BasisFamily::new(self.g.clone(), idx).expect("nonzero"))
    }

    fn anchors(&self, sample: &[Point]) -> Option<BTreeSet<u64>> {
        let mut out: BTreeSet<u64> = self.forced.into_iter().collect();
        for p in sample {
            if let Kind::A(k) = self.kind(p)? {
                out.insert(k);
            }
        }
        Some(out)
    }

    /// `h` with `I1`, anchor set `powers(b)` and extra near indices `I3`.
    pub fn target(&self, i1: IndexSet, b: u64, i3: Option<IndexSet>) -> Result<Hypothesis, FixtureError> {
        if b < 2 {
            return Err(FixtureError::Param(format!("anchor base {b} must be at least 2")));
        }
        let near = |idx| BasisFamily::new(self.g.clone(), idx).map(Family::Basis);
        let mut fams = vec![
            Family::Basis(BasisFamily::new(self.u.clone(), i1.clone())?),
            Family::Basis(BasisFamily::new(self.a.clone(), IndexSet::Geometric { scale: 2, base: b, shift: 0, from: 1 })?),
            near(IndexSet::Geometric { scale: 2, base: b, shift: 1, from: 1 })?,
        ];
        let i3_name = match &i3 {
            Some(s) => {
                let mapped = match s {
                    IndexSet::Residue { modulus, residue } if *residue >= 1 => {
                        IndexSet::Residue { modulus: 2 * modulus, residue: 2 * residue + 1 }
                    }
                    IndexSet::Geometric { scale, base, shift, from } => {
                        IndexSet::Geometric { scale: 2 * scale, base: *base, shift: 2 * shift + 1, from: *from }
                    }
                    IndexSet::Explicit(ms) => IndexSet::explicit(ms.iter().map(|m| 2 * m + 1)),
                    other => return Err(FixtureError::Param(format!("near index set {other} must avoid 0"))),
                };
                fams.push(near(mapped)?);
                s.to_string()
            }
            None => "none".into(),
        };
        Ok(Hypothesis::new(format!("h[I1={i1},b={b},I3={i3_name}]"), Support::new([Point::origin()], fams)))
    }
}

impl ClassOracle for L2Case1 {
    fn name(&self) -> String {
        match self.forced {
            Some(k) => format!("l2_case1[K={k}]"),
            None => "l2_case1".into(),
        }
    }

    fn metric(&self) -> &Metric {
        &Metric::L2
    }

    fn consistent(&self, sample: &[Point]) -> bool {
        sample.iter().all(|p| self.kind(p).is_some())
    }

    fn closure(&self, sample: &[Point]) -> Result<Option<Support>, HypothesisError> {
        let Some(anchors) = self.anchors(sample) else { return Ok(None) };
        let mut pts: Vec<Point> = sample.to_vec();
        pts.push(Point::origin());
        pts.extend(self.forced.map(|k| self.a(k)));
        Ok(Some(Support::new(pts, anchors.into_iter().map(|k| self.forced_family(k)))))
    }

    fn erm(&self, labeled: &[Labeled]) -> Result<usize, HypothesisError> {
        let mut cost = 0;
        let mut free: BTreeMap<&Point, (usize, usize)> = BTreeMap::new();
        let mut anchor: BTreeMap<u64, (usize, usize)> = BTreeMap::new();
        let mut near: BTreeMap<u64, (usize, usize)> = BTreeMap::new();
        let bump = |e: &mut (usize, usize), y: bool| if y { e.0 += 1 } else { e.1 += 1 };
        for (x, y) in labeled {
            match self.kind(x) {
                None => cost += usize::from(*y),
                Some(Kind::Origin) => cost += usize::from(!*y),
                Some(Kind::U(_)) => bump(free.entry(x).or_default(), *y),
                Some(Kind::A(k)) => bump(anchor.entry(k).or_default(), *y),
                Some(Kind::G(m)) => bump(near.entry(m).or_default(), *y),
            }
        }
        if let Some(k) = self.forced {
            anchor.entry(k).or_default();
        }
        cost += free.values().map(|&(p, n)| p.min(n)).sum::<usize>();
        // anchors grouped by root base; a near point m is only reachable from its own group
        let group_of = |k: u64| if k == 1 { BigInt::from(1) } else { root_base(&BigInt::from(k)).0 };
        let mut groups: BTreeMap<BigInt, Vec<u64>> = BTreeMap::new();
        for &k in anchor.keys() {
            groups.entry(group_of(k)).or_default().push(k);
        }
        let mut near_done: BTreeSet<u64> = BTreeSet::new();
        for (base, ks) in &groups {
            if ks.len() > MAX_GROUP {
                return Err(HypothesisError::Precondition(format!("{} anchors share base {base}", ks.len())));
            }
            let ms: Vec<u64> = near.keys().copied().filter(|&m| group_of(m) == *base).collect();
            near_done.extend(&ms);
            let mut best = usize::MAX;
            for mask in 0u32..(1 << ks.len()) {
                let chosen: Vec<u64> = ks.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, k)| *k).collect();
                if self.forced.is_some_and(|f| ks.contains(&f) && !chosen.contains(&f)) {
                    continue;
                }
                let mut c = 0;
                for (k, (p, n)) in ks.iter().map(|k| (k, anchor[k])) {
                    c += if chosen.contains(k) { n } else { p };
                }
                for m in &ms {
                    let (p, n) = near[m];
                    c += if chosen.iter().any(|&k| reaches(k, *m)) { n } else { p.min(n) };
                }
                best = best.min(c);
            }
            cost += best;
        }
        for (m, &(p, n)) in &near {
            if !near_done.contains(m) {
                cost += p.min(n);
            }
        }
        Ok(cost)
    }

    fn universe(&self) -> PointIter {
        let this = self.clone();
        let head = std::iter::once(Point::origin());
        Box::new(head.chain((1u64..).flat_map(move |k| {
            let mut v = vec![this.u(k)];
            if k % 2 == 0 {
                v.push(basis(k, &this.a));
            } else if k >= 3 {
                v.push(basis(k, &this.g));
            }
            v.sort();
            v
        })))
    }

    fn uus(&self, r: &Scalar) -> UusResult {
        let far = Support::new([], [Family::Basis(BasisFamily::new(self.u.clone(), IndexSet::all()).expect("nonzero"))]);
        match far.cover_number(&Metric::L2, r, &[]) {
            Ok(CoverResult::Infinite(w)) => UusResult::Satisfied(vec![w]),
            Ok(_) => UusResult::ViolatedBy("far points coverable".into()),
            Err(_) => UusResult::UnknownAtBudget,
        }
    }
}

/// `m = K^n` for some `n >= 1`.
fn reaches(k: u64, m: u64) -> bool {
    if k == 1 {
        return m == 1;
    }
    crate::hypothesis::numth::log_exact(&BigInt::from(m), &BigInt::from(k)).is_some_and(|n| n >= 1)
}

pub fn fixture_l2_case1() -> HypothesisClass {
    let half = Scalar::new(1, 2);
    HypothesisClass::Intensional(Arc::new(L2Case1::new(&Scalar::one(), &half, &half).expect("valid defaults")))
}

pub fn default_oracle() -> L2Case1 {
    let half = Scalar::new(1, 2);
    L2Case1::new(&Scalar::one(), &half, &half).expect("valid defaults")
}

/// Slices `H_K` for `K = 2..=max_k`.
pub fn slices(base: &L2Case1, max_k: u64) -> Vec<HypothesisClass> {
    (2..=max_k).map(|k| HypothesisClass::Intensional(Arc::new(base.slice(k))) as HypothesisClass).collect()
}

/// At the first revealed anchor `a_{2K}`, emits the least novel `g_{2K^n+1}`.
pub struct AnchorChaser {
    class: L2Case1,
    novelty: NoveltyCache,
    budget: usize,
}

impl AnchorChaser {
    pub fn new(class: L2Case1, eps_prime: &Scalar, budget: usize) -> Self {
        AnchorChaser { class, novelty: NoveltyCache::new(Metric::L2, eps_prime.clone()), budget }
    }
}

impl Generator for AnchorChaser {
    fn name(&self) -> String {
        "anchor_chaser".into()
    }

    fn step(&mut self, seen: &[Point]) -> Result<Move, PlayerError> {
        let ks: Vec<u64> = seen
            .iter()
            .filter_map(|p| match self.class.kind(p) {
                Some(Kind::A(k)) => Some(k),
                _ => None,
            })
            .collect();
        if let Some(&k) = ks.iter().find(|&&k| k >= 2) {
            let cands = (1u32..).map_while(|n| k.checked_pow(n)?.checked_mul(2)?.checked_add(1)).map(|i| basis(i, &self.class.g));
            return match self.novelty.first_novel(seen, cands, self.budget)? {
                Some(z) => Ok(Move::Emit(z)),
                None => Err(PlayerError::SearchBudgetExhausted(self.budget)),
            };
        }
        if ks.contains(&1) && self.novelty.is_novel(seen, &self.class.g(1))? {
            return Ok(Move::Emit(self.class.g(1)));
        }
        Ok(Move::Abstain)
    }
}

/// Anchor `0`; row `i` alternates far points `u_{q^j}` and near points
/// `g_{2 q^j + 1}` with `q = 2` for row 0 and the `i`-th odd prime otherwise.
pub struct AnchorStages {
    class: L2Case1,
    bases: Vec<u64>,
}

impl AnchorStages {
    pub fn new(class: L2Case1, stages: usize) -> Self {
        let mut bases = vec![2];
        bases.extend(crate::hypothesis::odd_primes(stages));
        AnchorStages { class, bases }
    }

    fn base(&self, n: usize) -> u64 {
        self.bases[n.min(self.bases.len() - 1)]
    }

    fn power(&self, n: usize, j: usize) -> u64 {
        let cap = u64::MAX / 4;
        self.base(n).checked_pow(j as u32).filter(|&v| v <= cap).unwrap_or(cap)
    }
}

impl StagedPlan for AnchorStages {
    fn anchors(&self) -> Vec<Point> {
        vec![Point::origin()]
    }

    fn row(&self, i: usize, j: usize) -> Point {
        if j % 2 == 1 {
            self.class.u(self.power(i, j.div_ceil(2)))
        } else {
            self.class.g(self.power(i, j / 2))
        }
    }

    fn in_protected(&self, n: usize, p: &Point) -> bool {
        let q = BigInt::from(self.base(n));
        let is_power = |k: u64| crate::hypothesis::numth::log_exact(&BigInt::from(k), &q).is_some_and(|e| e >= 1);
        match self.class.kind(p) {
            Some(Kind::U(k) | Kind::A(k) | Kind::G(k)) => is_power(k),
            _ => false,
        }
    }

    fn hypothesis(&self, n: usize, revealed: &[Point]) -> Arc<dyn Concept> {
        let q = self.base(n);
        let mut h = self.class.target(IndexSet::powers(q), q, None).expect("base at least 2");
        h.support = h.support.union(&Support::from_points(revealed.iter().cloned()));
        h.id = format!("stage_target[q={q}]");
        Arc::new(h)
    }
}

pub(super) fn spec() -> FixtureSpec {
    FixtureSpec {
        name: "l2_case1",
        summary: "anchors force near points; r = 1, eps = eps' = 1/2",
        params: vec![("r", "1".into()), ("eps", "1/2".into()), ("eps_prime", "1/2".into())],
        expected_regimes: vec![
            Regime::new("case 1", Scalar::new(2, 5), Scalar::new(2, 5), Expect::Generatable),
            Regime::new("case 2", Scalar::new(1, 2), Scalar::new(2, 5), Expect::NotGeneratable),
            Regime::new("case 3", Scalar::new(2, 5), Scalar::new(1, 2), Expect::NoValidMove),
        ],
    }
}

/// Twenty obligated targets, one per seed.
pub fn obligated_targets(class: &L2Case1) -> Vec<Hypothesis> {
    let bases = [2, 3, 5, 6];
    let far = [IndexSet::all(), IndexSet::evens(), IndexSet::residue(3, 1), IndexSet::odds(), IndexSet::residue(5, 2)];
    (0..20)
        .map(|i| {
            let i3 = match i % 3 {
                0 => None,
                1 => Some(IndexSet::residue(4, 1)),
                _ => Some(IndexSet::powers(7)),
            };
            class.target(far[i % 5].clone(), bases[i % 4], i3).expect("valid target")
        })
        .collect()
}

fn config(gamma: &Scalar, gamma_prime: &Scalar, horizon: usize, budget: usize) -> GameConfig {
    let mut cfg = GameConfig::new(gamma.clone(), gamma_prime.clone(), Scalar::one(), horizon);
    cfg.budget = budget;
    cfg
}

/// Obligated games for seeds `0..targets`.
pub fn obligated_runs(
    gamma: &Scalar,
    gamma_prime: &Scalar,
    make: &dyn Fn() -> Box<dyn Generator>,
    horizon: usize,
    budget: usize,
) -> Result<Vec<Transcript>, FixtureError> {
    let o = default_oracle();
    let class = fixture_l2_case1();
    let mut out = Vec::new();
    for (seed, h) in obligated_targets(&o).into_iter().enumerate() {
        let h: Arc<dyn Concept> = Arc::new(h);
        let mut adv = Enumeration::shuffled(h.clone(), 4, seed as u64);
        let mut gen = make();
        let cfg = config(gamma, gamma_prime, horizon, budget);
        out.push(run_game(&cfg, &class, &mut adv, gen.as_mut(), CommitPolicy::Upfront(h))?);
    }
    Ok(out)
}

/// Staged trap against one generator.
pub fn staged_run(gamma: &Scalar, gamma_prime: &Scalar, gen: &mut dyn Generator, horizon: usize, budget: usize) -> Result<Transcript, FixtureError> {
    let mut adv = StagedTrap::new(
        Arc::new(AnchorStages::new(default_oracle(), horizon)),
        horizon,
        WorstCase::new(Metric::L2, gamma_prime.clone()),
    );
    let cfg = config(gamma, gamma_prime, horizon, budget);
    Ok(run_game(&cfg, &fixture_l2_case1(), &mut adv, gen, CommitPolicy::Deferred)?)
}

pub(super) fn verify(spec: &FixtureSpec, budget: usize) -> Result<Vec<RegimeRow>, FixtureError> {
    let r = &spec.expected_regimes;
    let o = default_oracle();
    let mut rows = Vec::new();
    let (g, gp) = (r[0].gamma.clone(), r[0].gamma_prime.clone());
    let oc = o.clone();
    let runs = obligated_runs(&g, &gp, &|| Box::new(AnchorChaser::new(oc.clone(), &gp, budget)), 200, budget)?;
    let mut verdicts: Vec<Verdict> = runs.iter().map(judge_limit).collect();
    let oc = o.clone();
    let lim = obligated_runs(&g, &gp, &|| Box::new(Limit::new(slices(&oc, LIMIT_MAX_K), 0, &g, &gp, budget)), 200, budget)?;
    verdicts.extend(lim.iter().take(5).map(judge_limit));
    let ok = verdicts.iter().all(Verdict::is_correct);
    rows.push(row(&r[0], super::prime_reals::summarize(&verdicts), ok));

    let (g, gp) = (&r[1].gamma, &r[1].gamma_prime);
    let a = staged_run(g, gp, &mut AnchorChaser::new(o.clone(), gp, budget), 200, budget)?;
    let b = staged_run(g, gp, &mut Limit::new(slices(&o, LIMIT_MAX_K), 0, g, gp, budget), 200, budget)?;
    let ok = defeated(&a) && defeated(&b);
    let obs = format!("clean_suffix fixture={} limit={}", crate::game::clean_suffix(&a), crate::game::clean_suffix(&b));
    rows.push(row(&r[1], obs, ok));

    let class = fixture_l2_case1();
    let mut found = None;
    for prefix in [vec![Point::origin()], vec![Point::origin(), o.a(2)], vec![Point::origin(), o.a(3)]] {
        if let Some(p) = super::find_valid_move(&class, &prefix, &r[2].gamma_prime, budget)? {
            found = Some(p);
        }
    }
    let obs = match &found {
        Some(p) => format!("valid move {p}"),
        None => format!("none in {budget} candidates"),
    };
    rows.push(row(&r[2], obs, found.is_none()));
    Ok(rows)
}

fn oracle_from(ctx: &PlayerContext) -> Result<L2Case1, FixtureError> {
    let _ = ctx;
    Ok(default_oracle())
}

pub(super) fn generator(spec: &PlayerSpec, c: &PlayerContext) -> Result<Option<Box<dyn Generator>>, FixtureError> {
    let budget = spec.parse_or("budget", c.budget)?;
    let o = oracle_from(c)?;
    Ok(match spec.name.as_str() {
        "fixture" => Some(Box::new(AnchorChaser::new(o, &c.eps_prime, budget))),
        "limit" => {
            let k = spec.parse_or("max_k", LIMIT_MAX_K)?;
            Some(Box::new(Limit::new(slices(&o, k), 0, &c.eps, &c.eps_prime, budget)))
        }
        _ => None,
    })
}

pub(super) fn adversary(spec: &PlayerSpec, c: &PlayerContext) -> Result<Option<Box<dyn Adversary>>, FixtureError> {
    let o = oracle_from(c)?;
    Ok(match spec.name.as_str() {
        "staged_trap" => {
            let stages = spec.parse_or("stages", 400usize)?;
            Some(Box::new(StagedTrap::new(
                Arc::new(AnchorStages::new(o, stages)),
                spec.parse_or("stage_budget", stages)?,
                WorstCase::new(Metric::L2, c.eps_prime.clone()),
            )))
        }
        "obligated" => {
            let seed: usize = spec.parse_or("seed", c.seed as usize)?;
            let targets = obligated_targets(&o);
            let h = targets[seed % targets.len()].clone();
            Some(Box::new(Enumeration::shuffled(Arc::new(h), spec.parse_or("window", 4)?, seed as u64)))
        }
        _ => None,
    })
}

/// Explicit restriction to `0`, `u_1..u_far`, `a_2, a_4, a_6` and `g_3, g_5, g_7`.
pub fn truncation(far: u64) -> Result<(ExplicitClass, Vec<Point>), FixtureError> {
    let o = default_oracle();
    let ks = [1u64, 2, 3];
    let mut universe = vec![Point::origin()];
    universe.extend((1..=far).map(|k| o.u(k)));
    universe.extend(ks.iter().map(|&k| o.a(k)));
    universe.extend(ks.iter().map(|&m| o.g(m)));
    let mut seen = BTreeSet::new();
    let mut members = Vec::new();
    for i1 in 0u32..(1 << far) {
        for t in 0u32..8 {
            for i3 in 0u32..8 {
                let mut pts = BTreeSet::from([Point::origin()]);
                pts.extend((1..=far).filter(|k| i1 >> (k - 1) & 1 == 1).map(|k| o.u(k)));
                for (i, &k) in ks.iter().enumerate() {
                    if t >> i & 1 == 1 {
                        pts.insert(o.a(k));
                        pts.extend(ks.iter().filter(|&&m| reaches(k, m)).map(|&m| o.g(m)));
                    }
                    if i3 >> i & 1 == 1 {
                        pts.insert(o.g(k));
                    }
                }
                if seen.insert(pts.clone()) {
                    members.push(Hypothesis::new(format!("h{}", members.len()), Support::from_points(pts)));
                }
            }
        }
    }
    Ok((ExplicitClass::new("l2_case1_truncated", Metric::L2, members)?, universe))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::closure_contains;

    #[test]
    fn closure_forces_near_points() {
        let o = default_oracle();
        let c = fixture_l2_case1();
        let s = [Point::origin(), o.a(2)];
        assert_eq!(closure_contains(&c, &s, &o.g(2)).unwrap(), Some(true));
        assert_eq!(closure_contains(&c, &s, &o.g(8)).unwrap(), Some(true));
        assert_eq!(closure_contains(&c, &s, &o.g(3)).unwrap(), Some(false));
        assert_eq!(closure_contains(&c, &[o.a(1)], &o.g(1)).unwrap(), Some(true));
        assert_eq!(closure_contains(&c, &[basis(1, &o.a)], &o.g(1)).unwrap(), None);
    }

    #[test]
    fn erm_respects_forcing() {
        let o = default_oracle();
        assert_eq!(o.erm(&[(o.a(2), true), (o.g(4), false)]).unwrap(), 1);
        assert_eq!(o.erm(&[(o.a(2), true), (o.g(3), false)]).unwrap(), 0);
        assert_eq!(o.erm(&[(o.a(2), true), (o.a(4), true), (o.g(4), false), (o.g(16), false)]).unwrap(), 2);
        assert_eq!(o.erm(&[(Point::origin(), false)]).unwrap(), 1);
        assert_eq!(o.slice(2).erm(&[(o.g(2), false)]).unwrap(), 1);
    }

    #[test]
    fn chaser_and_stages() {
        let o = default_oracle();
        let mut g = AnchorChaser::new(o.clone(), &Scalar::new(2, 5), 50);
        assert_eq!(g.step(&[Point::origin()]).unwrap(), Move::Abstain);
        assert_eq!(g.step(&[Point::origin(), o.a(3), o.g(3)]).unwrap(), Move::Emit(o.g(9)));
        let plan = AnchorStages::new(o.clone(), 4);
        assert_eq!(plan.row(0, 1), o.u(2));
        assert_eq!(plan.row(1, 2), o.g(3));
        assert!(plan.in_protected(1, &o.a(9)));
        assert!(!plan.in_protected(1, &o.a(2)));
        let h = plan.hypothesis(0, &[o.u(3)]);
        assert!(h.contains(&o.a(2)) && h.contains(&o.u(3)) && h.contains(&o.g(4)));
    }

    #[test]
    fn no_move_once_near_points_are_inside_balls() {
        let o = default_oracle();
        let c = fixture_l2_case1();
        let s = [Point::origin(), o.a(2)];
        assert_eq!(super::super::find_valid_move(&c, &s, &Scalar::new(1, 2), 500).unwrap(), None);
        assert!(super::super::find_valid_move(&c, &s, &Scalar::new(2, 5), 500).unwrap().is_some());
    }

    #[test]
    fn targets_are_members() {
        let o = default_oracle();
        for h in obligated_targets(&o) {
            let s: Vec<Point> = h.points().take(30).collect();
            assert!(o.consistent(&s));
            let cl = o.closure(&s).unwrap().unwrap();
            assert!(cl.iter().take(40).all(|p| h.contains(&p)), "{}", h.id);
        }
    }
}
