//! Countable classes over atoms, re-hosted on the real line.

use std::sync::Arc;

use num_bigint::BigInt;

use super::{ctx, row, Expect, FixtureError, FixtureSpec, Regime, RegimeRow};
use crate::game::{judge_limit, run_game, CommitPolicy, GameConfig, Verdict};
use crate::hypothesis::{
    Concept, ExplicitClass, Family, Hypothesis, HypothesisClass, Lattice, LatticeKind, Support,
};
use crate::metric_core::{Metric, Point, Scalar};
use crate::players::{build_generator, Enumeration};

/// Target metric and spacing for atom `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddingSpec {
    pub spacing: BigInt,
    pub metric: Metric,
}

impl EmbeddingSpec {
    pub fn real(spacing: impl Into<BigInt>) -> Self {
        EmbeddingSpec { spacing: spacing.into(), metric: Metric::Abs }
    }
}

pub fn discrete() -> EmbeddingSpec {
    EmbeddingSpec { spacing: BigInt::from(1), metric: Metric::Discrete }
}

pub fn embed_point(spec: &EmbeddingSpec, j: i64) -> Point {
    match spec.metric {
        Metric::Discrete => Point::Atom(j),
        _ => Point::Real(Scalar::int(&spec.spacing * j)),
    }
}

fn embed_any(spec: &EmbeddingSpec, p: &Point) -> Result<Point, FixtureError> {
    match p {
        Point::Atom(j) if *j >= 0 => Ok(embed_point(spec, *j)),
        other => Err(FixtureError::Param(format!("cannot embed {other}"))),
    }
}

fn embed_family(spec: &EmbeddingSpec, f: &Family) -> Result<Family, FixtureError> {
    match f {
        Family::Lattice(l) if l.kind() == LatticeKind::Atom && spec.metric != Metric::Discrete => {
            let s = &spec.spacing;
            Ok(Family::Lattice(Lattice::new(LatticeKind::Real, l.offset() * s, l.step() * s, true)?))
        }
        Family::Lattice(l) if l.kind() == LatticeKind::Atom => Ok(f.clone()),
        _ => Err(FixtureError::Param("only atom lattices embed".into())),
    }
}

/// Maps each atom `j` to `embed_point(spec, j)`; needs distinct images more
/// than `r` apart and no empty member.
pub fn embed_countable_class(
    source: &ExplicitClass,
    r: &Scalar,
    spec: &EmbeddingSpec,
) -> Result<ExplicitClass, FixtureError> {
    let gap = match spec.metric {
        Metric::Discrete => Scalar::one(),
        Metric::Abs => Scalar::int(spec.spacing.clone()),
        _ => return Err(FixtureError::Param(format!("unsupported target metric {}", spec.metric))),
    };
    if gap <= *r {
        return Err(FixtureError::Param(format!("spacing {gap} must exceed r = {r}")));
    }
    let mut members = Vec::new();
    for h in source.members() {
        if h.support.is_empty() {
            return Err(FixtureError::Param(format!("source hypothesis {} has empty support", h.id)));
        }
        let pts = h.support.finite_part().iter().map(|p| embed_any(spec, p)).collect::<Result<Vec<_>, _>>()?;
        let fams = h.support.families().iter().map(|f| embed_family(spec, f)).collect::<Result<Vec<_>, _>>()?;
        members.push(Hypothesis::new(h.id.clone(), Support::new(pts, fams)));
    }
    Ok(ExplicitClass::new(format!("{}@{}", source_name(source), spec.metric), spec.metric.clone(), members)?)
}

fn source_name(c: &ExplicitClass) -> String {
    use crate::hypothesis::ClassOracle;
    c.name()
}

fn ray(offset: i64, step: i64) -> Result<Family, FixtureError> {
    Ok(Family::Lattice(Lattice::new(LatticeKind::Atom, offset.into(), step.into(), true)?))
}

/// Evens and multiples of three over atoms.
pub fn demo_source() -> Result<ExplicitClass, FixtureError> {
    let members = vec![
        Hypothesis::new("evens", Support::new([], [ray(0, 2)?])),
        Hypothesis::new("mult3", Support::new([], [ray(0, 3)?])),
    ];
    Ok(ExplicitClass::new("evens_mult3", Metric::Discrete, members)?)
}

pub fn demo_class(spec: &EmbeddingSpec) -> Result<HypothesisClass, FixtureError> {
    Ok(HypothesisClass::explicit(embed_countable_class(&demo_source()?, &Scalar::new(1, 2), spec)?))
}

pub(super) fn spec() -> FixtureSpec {
    let half = Scalar::new(1, 2);
    FixtureSpec {
        name: "embedding",
        summary: "atoms j mapped to reals 2j; game outcomes match at r = 1/2",
        params: vec![("spacing", "2".into()), ("r", "1/2".into())],
        expected_regimes: vec![Regime::new("verdicts unchanged", half.clone(), half, Expect::Agrees)],
    }
}

const PLAYERS: [&str; 3] = ["gen:uniform d_star=1", "gen:erm_search", "gen:limit"];

/// Verdicts for every (generator, member, seed) under one embedding.
pub fn verdicts(spec: &EmbeddingSpec, seeds: u64, horizon: usize, budget: usize) -> Result<Vec<String>, FixtureError> {
    let half = Scalar::new(1, 2);
    let class = demo_class(spec)?;
    let explicit = class.as_explicit().expect("explicit");
    let c = ctx(&class, &half, &half, budget);
    let mut cfg = GameConfig::new(half.clone(), half.clone(), half.clone(), horizon);
    cfg.budget = budget;
    let mut out = Vec::new();
    for g in PLAYERS {
        for h in explicit.members() {
            for seed in 0..seeds {
                let target: Arc<dyn Concept> = Arc::new(h.clone());
                let mut adv = Enumeration::shuffled(target.clone(), 3, seed);
                let mut gen = build_generator(&g.parse()?, &c)?;
                let tr = run_game(&cfg, &class, &mut adv, gen.as_mut(), CommitPolicy::Upfront(target))?;
                let v: Verdict = judge_limit(&tr);
                out.push(format!("{g}|{}|{seed}|{v}", h.id));
            }
        }
    }
    Ok(out)
}

pub(super) fn verify(spec: &FixtureSpec, budget: usize) -> Result<Vec<RegimeRow>, FixtureError> {
    let a = verdicts(&discrete(), 4, 40, budget)?;
    let b = verdicts(&EmbeddingSpec::real(2), 4, 40, budget)?;
    let diff = a.iter().zip(&b).filter(|(x, y)| x != y).count();
    Ok(vec![row(&spec.expected_regimes[0], format!("games={} discrepancies={diff}", a.len()), diff == 0 && a.len() == b.len())])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattices_move_to_the_line() {
        let c = demo_class(&EmbeddingSpec::real(2)).unwrap();
        let e = c.as_explicit().unwrap();
        assert!(e.member("mult3").unwrap().support.contains(&Point::real(6)));
        assert!(!e.member("mult3").unwrap().support.contains(&Point::real(3)));
        assert_eq!(embed_point(&discrete(), 4), Point::Atom(4));
    }

    #[test]
    fn rejects_empty_and_tight_embeddings() {
        let src = ExplicitClass::new("s", Metric::Discrete, vec![Hypothesis::new("e", Support::empty())]).unwrap();
        assert!(matches!(embed_countable_class(&src, &Scalar::new(1, 2), &discrete()), Err(FixtureError::Param(_))));
        let demo = demo_source().unwrap();
        assert!(embed_countable_class(&demo, &Scalar::int(2), &EmbeddingSpec::real(2)).is_err());
        assert!(embed_countable_class(&demo, &Scalar::one(), &discrete()).is_err());
    }
}
