//! Two hypotheses sharing the shell `{eps' sqrt2/2 e_k}` and split on the
//! parity of the outer points `r sqrt2/2 e_k`.

use std::sync::Arc;

use super::{ctx, row, Expect, FixtureError, FixtureSpec, Regime, RegimeRow};
use crate::game::{clean_suffix, defeated, run_game, CommitPolicy, GameConfig, Transcript};
use crate::hypothesis::{
    bruteforce_profile, BasisFamily, Concept, ExplicitClass, Family, Hypothesis, HypothesisClass, IndexSet, PointIter,
    Support,
};
use crate::metric_core::{Coord, Metric, Point, Scalar};
use crate::players::{build_generator, Adversary, Deferred, PlayerContext, PlayerSpec, Trap, WorstCase};

pub const GENERATORS: [&str; 6] = [
    "gen:uniform d_star=1",
    "gen:uniform d_star=2",
    "gen:uniform d_star=4",
    "gen:nonuniform",
    "gen:limit",
    "gen:erm_search",
];

pub fn shell_point(k: u64, eps_prime: &Scalar) -> Point {
    Point::basis(k, Coord::sqrt2half(eps_prime.clone()))
}

fn explicit_class(eps: &Scalar, eps_prime: &Scalar, r: &Scalar) -> Result<ExplicitClass, FixtureError> {
    if !(eps < eps_prime && eps_prime <= r) {
        return Err(FixtureError::Param(format!("need eps < eps' <= r, got {eps}, {eps_prime}, {r}")));
    }
    let shell = Family::Basis(BasisFamily::new(Coord::sqrt2half(eps_prime.clone()), IndexSet::all())?);
    let outer = |idx| BasisFamily::new(Coord::sqrt2half(r.clone()), idx).map(Family::Basis);
    let members = vec![
        Hypothesis::new("h_even", Support::new([], [shell.clone(), outer(IndexSet::evens())?])),
        Hypothesis::new("h_odd", Support::new([], [shell, outer(IndexSet::odds())?])),
    ];
    Ok(ExplicitClass::new("two_hypotheses", Metric::L2, members)?)
}

pub fn fixture_two_hypotheses(eps: &Scalar, eps_prime: &Scalar, r: &Scalar) -> Result<HypothesisClass, FixtureError> {
    Ok(HypothesisClass::explicit(explicit_class(eps, eps_prime, r)?))
}

/// Replays the shell forever; the target is picked at the horizon.
pub fn trap_adversary(class: &HypothesisClass, eps_prime: &Scalar, budget: usize) -> Result<Deferred, FixtureError> {
    let explicit = class.as_explicit().ok_or_else(|| FixtureError::Param("explicit class expected".into()))?;
    let ep = eps_prime.clone();
    let base: PointIter = Box::new((1u64..).map(move |k| shell_point(k, &ep)));
    let trap = Trap::new(base, usize::MAX, class.metric().clone(), eps_prime.clone(), budget);
    let members: Vec<Arc<dyn Concept>> =
        explicit.members().iter().map(|h| Arc::new(h.clone()) as Arc<dyn Concept>).collect();
    let worst = WorstCase::new(class.metric().clone(), eps_prime.clone());
    Ok(Deferred::new(Box::new(trap), Box::new(move |_: &[Point]| members.clone()), worst))
}

pub(super) fn spec() -> FixtureSpec {
    let (eps, ep) = (Scalar::new(3, 10), Scalar::new(6, 10));
    FixtureSpec {
        name: "two_hypotheses",
        summary: "two hypotheses with a shared shell; dimension unbounded, no generator survives the trap",
        params: vec![("eps", "3/10".into()), ("eps_prime", "3/5".into()), ("r", "1".into())],
        expected_regimes: vec![
            Regime::new("dimension", eps.clone(), ep.clone(), Expect::DimensionReaches(8)),
            Regime::new("trap", eps, ep, Expect::NotGeneratable),
        ],
    }
}

/// Every listed generator against the trap, UUS check waived.
pub fn trap_runs(horizon: usize, budget: usize) -> Result<Vec<Transcript>, FixtureError> {
    let (eps, ep, r) = (Scalar::new(3, 10), Scalar::new(6, 10), Scalar::one());
    let class = fixture_two_hypotheses(&eps, &ep, &r)?;
    let c = ctx(&class, &eps, &ep, budget);
    let mut cfg = GameConfig::new(eps.clone(), ep.clone(), r, horizon);
    cfg.budget = budget;
    cfg.uus_override = true;
    let mut out = Vec::new();
    for g in GENERATORS {
        let mut gen = build_generator(&g.parse()?, &c)?;
        let mut adv = trap_adversary(&class, &ep, budget)?;
        out.push(run_game(&cfg, &class, &mut adv, gen.as_mut(), CommitPolicy::Deferred)?);
    }
    Ok(out)
}

pub(super) fn verify(spec: &FixtureSpec, budget: usize) -> Result<Vec<RegimeRow>, FixtureError> {
    let r = &spec.expected_regimes;
    let class = fixture_two_hypotheses(&r[0].gamma, &r[0].gamma_prime, &Scalar::one())?;
    let ground: Vec<Point> = (1..=8).map(|k| shell_point(k, &r[0].gamma_prime)).collect();
    let rep = bruteforce_profile(&class, &r[0].gamma, &r[0].gamma_prime, &ground, 8)?;
    let reached = (0..=8).all(|d| rep.achieved.contains(&d));
    let obs = format!("{} achieved={:?}", rep.result, rep.achieved);
    let mut rows = vec![row(&r[0], obs, reached)];

    let runs = trap_runs(40, budget)?;
    let obs = runs.iter().map(|t| format!("{}:clean_suffix={}", t.generator, clean_suffix(t))).collect::<Vec<_>>().join(" ");
    rows.push(row(&r[1], obs, runs.iter().all(defeated)));
    Ok(rows)
}

pub(super) fn adversary(spec: &PlayerSpec, c: &PlayerContext) -> Result<Option<Box<dyn Adversary>>, FixtureError> {
    Ok(match spec.name.as_str() {
        "trap" => Some(Box::new(trap_adversary(&c.class, &c.eps_prime, spec.parse_or("budget", c.budget)?)?)),
        _ => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructor_checks_scale_order() {
        let (a, b, c) = (Scalar::new(1, 4), Scalar::new(1, 2), Scalar::one());
        assert!(fixture_two_hypotheses(&a, &b, &c).is_ok());
        assert!(fixture_two_hypotheses(&a, &b, &b).is_ok());
        assert!(matches!(fixture_two_hypotheses(&b, &a, &c), Err(FixtureError::Param(_))));
        assert!(matches!(fixture_two_hypotheses(&a, &c, &b), Err(FixtureError::Param(_))));
        assert!(matches!(fixture_two_hypotheses(&a, &a, &c), Err(FixtureError::Param(_))));
    }

    #[test]
    fn shell_closure_is_shared() {
        let (eps, ep) = (Scalar::new(3, 10), Scalar::new(6, 10));
        let class = fixture_two_hypotheses(&eps, &ep, &Scalar::one()).unwrap();
        let s = [shell_point(2, &ep), shell_point(5, &ep)];
        let cl = class.oracle().closure(&s).unwrap().unwrap();
        assert!(cl.contains(&shell_point(9, &ep)));
        assert!(!cl.contains(&Point::basis(2, Coord::sqrt2half(Scalar::one()))));
    }
}
