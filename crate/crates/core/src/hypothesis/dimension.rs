use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;

use super::explicit::ExplicitClass;
use super::support::Support;
use super::{ClassOracle, HypothesisClass, HypothesisError};
use crate::metric_core::{covering_number_exact, CoverResult, Metric, Point, Scalar};

const MAX_MEMBERS: usize = 20;
const ESCALATION: usize = 5;

/// Closure-dimension value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DimResult {
    /// Largest qualifying cover size and a sequence attaining it.
    Finite { d: usize, witness: Vec<Point> },
    /// Sequences attaining `d = 1, 2, ...` with finite closure cover.
    Infinite { witnesses: Vec<(usize, Vec<Point>)> },
    LowerBound { d: usize, budget: usize },
}

impl DimResult {
    pub fn finite(&self) -> Option<usize> {
        match self {
            DimResult::Finite { d, .. } => Some(*d),
            _ => None,
        }
    }
}

impl fmt::Display for DimResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DimResult::Finite { d, .. } => write!(f, "finite({d})"),
            DimResult::Infinite { .. } => write!(f, "infinite"),
            DimResult::LowerBound { d, budget } => write!(f, "lower_bound({d},budget={budget})"),
        }
    }
}

fn candidates(set: &[Point], centers: &[Point]) -> Vec<Point> {
    set.iter().chain(centers).cloned().collect()
}

/// Max over member subsets of the `eps`-cover of their common support,
/// restricted to subsets whose `eps_prime`-cover is finite.
pub fn closure_dimension_finite(
    class: &ExplicitClass,
    eps: &Scalar,
    eps_prime: &Scalar,
) -> Result<DimResult, HypothesisError> {
    let members = class.members();
    if members.len() > MAX_MEMBERS {
        return Err(HypothesisError::TooManyMembers(members.len()));
    }
    let metric = class.metric();
    let centers = class.centers();
    let mut best = (0usize, Vec::new());
    // depth-first over subsets, reusing the parent's intersection
    let mut stack: Vec<(usize, Support)> = members.iter().enumerate().map(|(i, h)| (i, h.support.clone())).collect();
    while let Some((last, inter)) = stack.pop() {
        if inter.is_empty() {
            continue;
        }
        match inter.cover_number(metric, eps_prime, &centers)? {
            CoverResult::Infinite(_) => {}
            CoverResult::UnknownAtBudget { .. } => {
                return Err(HypothesisError::UndecidableIntersection(format!("eps' cover of {inter}")));
            }
            CoverResult::Finite(_) => {
                if inter.is_finite_set() {
                    let pts: Vec<Point> = inter.finite_part().iter().cloned().collect();
                    let d = covering_number_exact(metric, &pts, eps, &candidates(&pts, &centers))?;
                    if d > best.0 {
                        best = (d, pts);
                    }
                } else {
                    match inter.cover_number(metric, eps, &centers)? {
                        CoverResult::Infinite(w) => {
                            let witnesses = (1..=ESCALATION.min(w.sample.len()))
                                .map(|d| (d, w.sample[..d].to_vec()))
                                .collect();
                            return Ok(DimResult::Infinite { witnesses });
                        }
                        _ => {
                            return Err(HypothesisError::UndecidableIntersection(format!(
                                "infinite set {inter} with finite eps cover"
                            )))
                        }
                    }
                }
            }
        }
        for (j, h) in members.iter().enumerate().skip(last + 1) {
            stack.push((j, inter.intersect(&h.support)?));
        }
    }
    Ok(DimResult::Finite { d: best.0, witness: best.1 })
}

/// Result of the exhaustive search, with every exactly-attained value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BruteForceReport {
    pub result: DimResult,
    pub achieved: BTreeSet<usize>,
}

/// Searches every point set drawn from `ground` with at most `max_len` points.
pub fn bruteforce_profile(
    class: &HypothesisClass,
    eps: &Scalar,
    eps_prime: &Scalar,
    ground: &[Point],
    max_len: usize,
) -> Result<BruteForceReport, HypothesisError> {
    let oracle = class.oracle();
    let metric = oracle.metric();
    let centers = oracle.centers();
    let ground: Vec<Point> = ground.iter().cloned().sorted().dedup().collect();
    if ground.is_empty() {
        return Ok(BruteForceReport {
            result: DimResult::Finite { d: 0, witness: Vec::new() },
            achieved: [0].into(),
        });
    }
    let ground_set: BTreeSet<&Point> = ground.iter().collect();
    let mut achieved = BTreeSet::new();
    let mut best = (0usize, Vec::new());
    let mut complete = max_len >= ground.len();
    for size in 0..=max_len.min(ground.len()) {
        for combo in ground.iter().cloned().combinations(size) {
            let Some(closure) = oracle.closure(&combo)? else { continue };
            match closure.cover_number(metric, eps_prime, &centers)? {
                CoverResult::Infinite(_) => continue,
                CoverResult::UnknownAtBudget { .. } => {
                    complete = false;
                    continue;
                }
                CoverResult::Finite(_) => {}
            }
            if !closure.is_finite_set() || !closure.finite_part().iter().all(|p| ground_set.contains(p)) {
                complete = false;
            }
            let d = covering_number_exact(metric, &combo, eps, &candidates(&combo, &centers))?;
            achieved.insert(d);
            if d > best.0 || best.1.is_empty() && d == best.0 {
                best = (d, combo);
            }
        }
    }
    let result = if complete {
        DimResult::Finite { d: best.0, witness: best.1 }
    } else {
        DimResult::LowerBound { d: best.0, budget: max_len }
    };
    Ok(BruteForceReport { result, achieved })
}

pub fn closure_dimension_bruteforce(
    class: &HypothesisClass,
    eps: &Scalar,
    eps_prime: &Scalar,
    ground: &[Point],
    max_len: usize,
) -> Result<DimResult, HypothesisError> {
    Ok(bruteforce_profile(class, eps, eps_prime, ground, max_len)?.result)
}

/// A finite witness is consistent, covers to exactly `d`, and has a closure
/// with finite `eps_prime`-cover.
pub fn verify_dim_witness(
    class: &dyn ClassOracle,
    metric: &Metric,
    eps: &Scalar,
    eps_prime: &Scalar,
    d: usize,
    witness: &[Point],
) -> Result<bool, HypothesisError> {
    let Some(closure) = class.closure(witness)? else { return Ok(false) };
    let centers = class.centers();
    let n = covering_number_exact(metric, witness, eps, &candidates(witness, &centers))?;
    Ok(n == d && closure.cover_number(metric, eps_prime, &centers)?.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::parse_class;

    fn half() -> Scalar {
        Scalar::new(1, 2)
    }

    #[test]
    fn evens_mult3_has_dimension_zero() {
        let text = "metric abs\nhypothesis evens\nfamily: lattice step=2\nhypothesis mult3\nfamily: lattice step=3\n";
        let c = parse_class(text).unwrap();
        assert_eq!(closure_dimension_finite(&c, &half(), &half()).unwrap().finite(), Some(0));
        let hc = HypothesisClass::explicit(c);
        let ground: Vec<Point> = (-3..=6).map(Point::real).collect();
        assert_eq!(closure_dimension_bruteforce(&hc, &half(), &half(), &ground, 3).unwrap().finite(), None);
        assert_eq!(closure_dimension_bruteforce(&hc, &half(), &half(), &[], 3).unwrap().finite(), Some(0));
    }

    #[test]
    fn finite_intersections_are_counted() {
        let text = "metric abs\n\
                    hypothesis h1\nfinite: real:0 real:3 real:10\nfamily: lattice step=100 offset=50\n\
                    hypothesis h2\nfinite: real:0 real:3 real:20\nfamily: lattice step=100 offset=0\n";
        let c = parse_class(text).unwrap();
        let one = Scalar::one();
        let DimResult::Finite { d, witness } = closure_dimension_finite(&c, &one, &one).unwrap() else { panic!() };
        assert_eq!(d, 2);
        assert!(verify_dim_witness(&c, c.metric(), &one, &one, d, &witness).unwrap());
        let ground: Vec<Point> = [0, 3, 10, 20].into_iter().map(Point::real).collect();
        let hc = HypothesisClass::explicit(c);
        assert_eq!(closure_dimension_bruteforce(&hc, &one, &one, &ground, 4).unwrap().finite(), Some(2));
    }

    #[test]
    fn singleton_with_infinite_support() {
        let c = parse_class("metric abs\nhypothesis h\nfamily: lattice step=1\n").unwrap();
        assert_eq!(closure_dimension_finite(&c, &half(), &half()).unwrap().finite(), Some(0));
    }

    #[test]
    fn two_hypotheses_dimension_is_infinite() {
        let text = "metric l2\n\
                    hypothesis h1\nfamily: basis scale=3/5:sqrt2half indices=all\nfamily: basis scale=1:sqrt2half indices=evens\n\
                    hypothesis h2\nfamily: basis scale=3/5:sqrt2half indices=all\nfamily: basis scale=1:sqrt2half indices=odds\n";
        let c = parse_class(text).unwrap();
        let (eps, eps_p) = (Scalar::new(3, 10), Scalar::new(3, 5));
        assert!(matches!(closure_dimension_finite(&c, &eps, &eps_p).unwrap(), DimResult::Infinite { .. }));
        let a: Vec<Point> = c.members()[0].support.families()[0].iter().take(4).collect();
        let hc = HypothesisClass::explicit(c);
        let rep = bruteforce_profile(&hc, &eps, &eps_p, &a, 4).unwrap();
        assert_eq!(rep.result, DimResult::LowerBound { d: 4, budget: 4 });
        assert_eq!(rep.achieved, (0..=4).collect());
    }
}
