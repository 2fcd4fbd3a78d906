//! Level points `a_{m,k} = 2^{1-m} sqrt2/2 e_k` (odd part of `k` at least 3)
//! under the plain norm or the even-discounted weighted norm.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};

use super::{as_basis, basis, row, Expect, FixtureError, FixtureSpec, PredicateConcept, Regime, RegimeRow};
use crate::game::{clean_suffix, defeated, judge_uniform, run_game, CommitPolicy, GameConfig, Transcript};
use crate::hypothesis::{
    bruteforce_profile, odd_part, BasisFamily, ClassOracle, Concept, ExplicitClass, Family, Hypothesis,
    HypothesisClass, HypothesisError, IndexSet, Labeled, PointIter, Support, UusResult,
};
use crate::metric_core::{CoverResult, Coord, Metric, Point, Scalar};
use crate::players::{Adversary, Deferred, Enumeration, ErmSearch, Generator, PlayerContext, PlayerSpec, Trap, Uniform, WorstCase};

/// Level-1 tail start for committed targets.
const TAIL: u64 = u32::MAX as u64;

pub fn level_coef(m: u32) -> Coord {
    Coord::sqrt2half(Scalar::inv_pow2(m - 1))
}

pub fn level_point(m: u32, k: u64) -> Point {
    basis(k, &level_coef(m))
}

/// `(m, k)` for a level point.
pub fn level_of(p: &Point) -> Option<(u32, u64)> {
    let (k, c) = as_basis(p)?;
    if !c.half || !c.value.numer().is_one() || odd_part(k) < 3 {
        return None;
    }
    let d = c.value.denom();
    let e = d.bits().checked_sub(1)? as u32;
    (*d == BigInt::one() << e).then_some((e + 1, k))
}

/// Index of the odd part: `k = 2^n (2K + 1)`.
fn group(k: u64) -> u64 {
    (odd_part(k) - 1) / 2
}

#[derive(Clone, Debug)]
pub struct WeightedLevels {
    metric: Metric,
}

impl WeightedLevels {
    pub fn new(weighted: bool) -> Self {
        let metric = if weighted {
            Metric::WeightedL2 { even: Scalar::new(1, 4), odd: Scalar::one() }
        } else {
            Metric::L2
        };
        WeightedLevels { metric }
    }
}

impl ClassOracle for WeightedLevels {
    fn name(&self) -> String {
        match self.metric {
            Metric::L2 => "weighted[rho]".into(),
            _ => "weighted[rho']".into(),
        }
    }

    fn metric(&self) -> &Metric {
        &self.metric
    }

    fn consistent(&self, sample: &[Point]) -> bool {
        sample.iter().all(|p| level_of(p).is_some())
    }

    fn closure(&self, sample: &[Point]) -> Result<Option<Support>, HypothesisError> {
        let mut fams = Vec::new();
        for p in sample {
            let Some((m, k)) = level_of(p) else { return Ok(None) };
            let idx = IndexSet::Geometric { scale: odd_part(k), base: 2, shift: 0, from: 0 };
            fams.push(Family::Basis(BasisFamily::new(level_coef(m), idx)?));
        }
        Ok(Some(Support::new(sample.iter().cloned(), fams)))
    }

    fn erm(&self, labeled: &[Labeled]) -> Result<usize, HypothesisError> {
        let mut cost = 0;
        let mut groups: BTreeMap<(u32, u64), (usize, usize)> = BTreeMap::new();
        for (x, y) in labeled {
            match level_of(x) {
                None => cost += usize::from(*y),
                Some((m, k)) => {
                    let e = groups.entry((m, group(k))).or_default();
                    if *y {
                        e.0 += 1;
                    } else {
                        e.1 += 1;
                    }
                }
            }
        }
        Ok(cost + groups.values().map(|&(p, n)| p.min(n)).sum::<usize>())
    }

    fn universe(&self) -> PointIter {
        Box::new((2u64..).flat_map(|s| {
            (1..s).filter_map(move |m| {
                let k = s - m;
                (odd_part(k) >= 3).then(|| level_point(m.to_u32().expect("small level"), k))
            })
        }))
    }

    fn uus(&self, r: &Scalar) -> UusResult {
        let odd = IndexSet::Residue { modulus: 4, residue: 3 };
        let fam = Family::Basis(BasisFamily::new(level_coef(1), odd).expect("nonzero"));
        match Support::new([], [fam]).cover_number(&self.metric, r, &[]) {
            Ok(CoverResult::Infinite(w)) => UusResult::Satisfied(vec![w]),
            Ok(_) => UusResult::ViolatedBy("level-1 odd points coverable".into()),
            Err(_) => UusResult::UnknownAtBudget,
        }
    }
}

pub fn fixture_weighted_metric(weighted: bool) -> HypothesisClass {
    HypothesisClass::Intensional(Arc::new(WeightedLevels::new(weighted)))
}

/// Level 1 on `first ∪ {K > tail}`, every other level on `powers(q)`.
pub fn target(first: BTreeSet<u64>, tail: u64, q: u64) -> PredicateConcept {
    let id = format!("levels[I1={first:?}+tail>{tail},rest=powers({q})]");
    let rest = IndexSet::powers(q);
    PredicateConcept::new(
        id,
        move |p| match level_of(p) {
            Some((1, k)) => first.contains(&group(k)) || group(k) > tail,
            Some((_, k)) => rest.contains(group(k)),
            None => false,
        },
        |s| {
            (1..=s)
                .filter_map(|m| {
                    let k = s + 1 - m;
                    (odd_part(k) >= 3).then(|| level_point(m as u32, k))
                })
                .collect()
        },
    )
}

/// `a_{1,3}, a_{1,6}`, then `a_{1,2i-1}` for `i >= 3`.
pub fn trap_base() -> PointIter {
    let head = [level_point(1, 3), level_point(1, 6)];
    Box::new(head.into_iter().chain((3u64..).map(|i| level_point(1, 2 * i - 1))))
}

/// Trap over the base sequence; the target is fixed at the horizon.
pub fn trap_adversary(metric: Metric, eps_prime: &Scalar, budget: usize) -> Deferred {
    let trap = Trap::new(trap_base(), 2, metric.clone(), eps_prime.clone(), budget);
    let cands = |revealed: &[Point]| -> Vec<Arc<dyn Concept>> {
        let first: BTreeSet<u64> =
            revealed.iter().filter_map(level_of).filter(|(m, _)| *m == 1).map(|(_, k)| group(k)).collect();
        [3, 5].into_iter().map(|q| Arc::new(target(first.clone(), TAIL, q)) as Arc<dyn Concept>).collect()
    };
    Deferred::new(Box::new(trap), Box::new(cands), WorstCase::new(metric, eps_prime.clone()))
}

pub(super) fn spec() -> FixtureSpec {
    let tau = Scalar::new(3, 5);
    FixtureSpec {
        name: "weighted",
        summary: "level points under the plain and the even-discounted norm; r = tau = 3/5",
        params: vec![("tau", "3/5".into()), ("r", "3/5".into()), ("rho_prime", "wl2 even=1/4 odd=1".into())],
        expected_regimes: vec![
            Regime::new("rho dimension", tau.clone(), tau.clone(), Expect::DimensionAtMost(2)),
            Regime::new("rho uniform", tau.clone(), tau.clone(), Expect::Uniform(3)),
            Regime::new("rho' trap", tau.clone(), tau, Expect::NotGeneratable),
        ],
    }
}

/// Levels 1 to 3 at indices 3, 5 and 6.
pub fn small_ground() -> Vec<Point> {
    (1..=3).flat_map(|m| [3, 5, 6].map(|k| level_point(m, k))).collect()
}

fn config(tau: &Scalar, horizon: usize, budget: usize) -> GameConfig {
    let mut cfg = GameConfig::new(tau.clone(), tau.clone(), tau.clone(), horizon);
    cfg.budget = budget;
    cfg
}

/// Trap games under `rho'` against erm_search and uniform(3).
pub fn trap_runs(horizon: usize, budget: usize) -> Result<Vec<Transcript>, FixtureError> {
    let tau = Scalar::new(3, 5);
    let class = fixture_weighted_metric(true);
    let gens: Vec<Box<dyn Generator>> = vec![
        Box::new(ErmSearch::new(class.clone(), &tau, budget)),
        Box::new(Uniform::new(class.clone(), &tau, &tau, 3, budget)),
    ];
    let mut out = Vec::new();
    for mut g in gens {
        let mut adv = trap_adversary(class.metric().clone(), &tau, budget);
        out.push(run_game(&config(&tau, horizon, budget), &class, &mut adv, g.as_mut(), CommitPolicy::Deferred)?);
    }
    Ok(out)
}

/// Obligated games under `rho` against uniform(3).
pub fn uniform_runs(seeds: u64, horizon: usize, budget: usize) -> Result<Vec<Transcript>, FixtureError> {
    let tau = Scalar::new(3, 5);
    let class = fixture_weighted_metric(false);
    let mut out = Vec::new();
    for seed in 0..seeds {
        let h: Arc<dyn Concept> = Arc::new(target(BTreeSet::new(), 0, [3, 5][seed as usize % 2]));
        let mut adv = Enumeration::shuffled(h.clone(), 4, seed);
        let mut gen = Uniform::new(class.clone(), &tau, &tau, 3, budget);
        out.push(run_game(&config(&tau, horizon, budget), &class, &mut adv, &mut gen, CommitPolicy::Upfront(h))?);
    }
    Ok(out)
}

pub(super) fn verify(spec: &FixtureSpec, budget: usize) -> Result<Vec<RegimeRow>, FixtureError> {
    let r = &spec.expected_regimes;
    let mut rows = Vec::new();
    let rep = bruteforce_profile(&fixture_weighted_metric(false), &r[0].gamma, &r[0].gamma_prime, &small_ground(), 3)?;
    let best = rep.achieved.iter().max().copied().unwrap_or(0);
    rows.push(row(&r[0], format!("{} max_achieved={best}", rep.result), best <= 2));

    let runs = uniform_runs(6, 120, budget)?;
    let ok = runs.iter().all(|t| judge_uniform(t, 3).is_correct());
    let passed = runs.iter().filter(|t| judge_uniform(t, 3).is_correct()).count();
    rows.push(row(&r[1], format!("uniform(3) passes {passed}/{}", runs.len()), ok));

    let runs = trap_runs(200, budget)?;
    let obs = runs.iter().map(|t| format!("{}:clean_suffix={}", t.generator, clean_suffix(t))).collect::<Vec<_>>().join(" ");
    rows.push(row(&r[2], obs, runs.iter().all(defeated)));
    Ok(rows)
}

pub(super) fn adversary(spec: &PlayerSpec, c: &PlayerContext) -> Result<Option<Box<dyn Adversary>>, FixtureError> {
    let budget = spec.parse_or("budget", c.budget)?;
    Ok(match spec.name.as_str() {
        "trap" => Some(Box::new(trap_adversary(c.class.metric().clone(), &c.eps_prime, budget))),
        "obligated" => {
            let q = spec.parse_or("q", 3u64)?;
            let h = Arc::new(target(BTreeSet::new(), 0, q));
            Some(Box::new(Enumeration::shuffled(h, spec.parse_or("window", 4)?, spec.parse_or("seed", c.seed)?)))
        }
        _ => None,
    })
}

/// Explicit restriction to levels 1 and 2 at indices 3, 5, 6 and 7.
pub fn truncation(weighted: bool) -> Result<(ExplicitClass, Vec<Point>), FixtureError> {
    let ks = [3u64, 5, 6, 7];
    let universe: Vec<Point> = (1..=2).flat_map(|m| ks.map(|k| level_point(m, k))).collect();
    let groups = [1u64, 2, 3];
    let mut members = Vec::new();
    for mask in 0u32..64 {
        let pts = universe.iter().filter(|p| {
            let (m, k) = level_of(p).expect("level point");
            let i = groups.iter().position(|&g| g == group(k)).expect("listed group");
            mask >> (3 * (m - 1) as usize + i) & 1 == 1
        });
        members.push(Hypothesis::new(format!("h{mask}"), Support::from_points(pts.cloned())));
    }
    let metric = WeightedLevels::new(weighted).metric;
    Ok((ExplicitClass::new("weighted_truncated", metric, members)?, universe))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_core::sq_dist;

    #[test]
    fn level_parsing() {
        assert_eq!(level_of(&level_point(3, 6)), Some((3, 6)));
        assert_eq!(level_of(&level_point(1, 4)), None);
        assert_eq!(level_of(&basis(3, &Coord::sqrt2half(Scalar::new(3, 4)))), None);
        assert_eq!(group(12), 1);
    }

    #[test]
    fn even_pairs_shrink_under_weighted_norm() {
        let w = WeightedLevels::new(true).metric;
        for m in 1..=3u32 {
            let d = sq_dist(&w, &level_point(m, 6), &level_point(m, 12)).unwrap();
            assert_eq!(d.rat, Scalar::inv_pow2(m).square());
        }
        let d = sq_dist(&Metric::L2, &level_point(1, 3), &level_point(1, 5)).unwrap();
        assert_eq!(d.rat, Scalar::one());
    }

    #[test]
    fn closure_and_erm() {
        let o = WeightedLevels::new(false);
        let c = o.closure(&[level_point(2, 5)]).unwrap().unwrap();
        assert!(c.contains(&level_point(2, 20)) && !c.contains(&level_point(1, 10)));
        assert_eq!(o.erm(&[(level_point(1, 3), true), (level_point(1, 12), false)]).unwrap(), 1);
        assert_eq!(o.erm(&[(level_point(1, 3), true), (level_point(1, 5), false)]).unwrap(), 0);
    }

    #[test]
    fn uus_depends_on_radius() {
        let o = WeightedLevels::new(true);
        assert!(o.uus(&Scalar::new(3, 5)).is_satisfied());
        assert!(!o.uus(&Scalar::one()).is_satisfied());
    }

    #[test]
    fn targets_and_universe() {
        let h = target(BTreeSet::from([1]), 5, 3);
        assert!(h.contains(&level_point(1, 6)) && !h.contains(&level_point(1, 5)) && h.contains(&level_point(1, 23)));
        assert!(h.contains(&level_point(2, 7)) && !h.contains(&level_point(2, 5)));
        let u: Vec<Point> = WeightedLevels::new(false).universe().take(3).collect();
        assert_eq!(u, vec![level_point(1, 3), level_point(2, 3), level_point(1, 5)]);
    }
}
