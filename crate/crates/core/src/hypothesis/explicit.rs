use std::collections::BTreeSet;

use itertools::Itertools;

use super::support::{PointIter, Support};
use super::{ClassOracle, Concept, HypothesisError, Labeled, UusResult};
use crate::metric_core::{CoverResult, Metric, Point, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypothesis {
    pub id: String,
    pub support: Support,
}

impl Hypothesis {
    pub fn new(id: impl Into<String>, support: Support) -> Self {
        Hypothesis { id: id.into(), support }
    }
}

impl Concept for Hypothesis {
    fn id(&self) -> String {
        self.id.clone()
    }

    fn contains(&self, p: &Point) -> bool {
        self.support.contains(p)
    }

    fn points(&self) -> PointIter {
        self.support.iter()
    }
}

/// A finite list of hypotheses; every oracle answer is brute force over members.
#[derive(Clone, Debug)]
pub struct ExplicitClass {
    name: String,
    metric: Metric,
    members: Vec<Hypothesis>,
    centers: Vec<Point>,
}

impl ExplicitClass {
    pub fn new(name: impl Into<String>, metric: Metric, members: Vec<Hypothesis>) -> Result<Self, HypothesisError> {
        let mut ids = BTreeSet::new();
        for h in &members {
            if !ids.insert(h.id.clone()) {
                return Err(HypothesisError::Invalid(format!("duplicate hypothesis id `{}`", h.id)));
            }
            for p in h.support.finite_part() {
                if !metric.accepts(p) {
                    return Err(HypothesisError::Invalid(format!("point {p} does not fit metric {metric}")));
                }
            }
        }
        let centers: BTreeSet<Point> = members.iter().flat_map(|h| h.support.finite_part().iter().cloned()).collect();
        Ok(ExplicitClass { name: name.into(), metric, members, centers: centers.into_iter().collect() })
    }

    pub fn members(&self) -> &[Hypothesis] {
        &self.members
    }

    pub fn member(&self, id: &str) -> Option<&Hypothesis> {
        self.members.iter().find(|h| h.id == id)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Members containing every sample point.
    pub fn version_space(&self, sample: &[Point]) -> Vec<&Hypothesis> {
        self.members.iter().filter(|h| sample.iter().all(|p| h.support.contains(p))).collect()
    }

    /// The sub-class made of the named members, in the given order.
    pub fn restrict(&self, ids: &[&str]) -> Result<ExplicitClass, HypothesisError> {
        let members = ids
            .iter()
            .map(|id| self.member(id).cloned().ok_or_else(|| HypothesisError::Invalid(format!("no member `{id}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        ExplicitClass::new(format!("{}[{}]", self.name, ids.join(",")), self.metric.clone(), members)
    }
}

impl ClassOracle for ExplicitClass {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn metric(&self) -> &Metric {
        &self.metric
    }

    fn consistent(&self, sample: &[Point]) -> bool {
        !self.version_space(sample).is_empty()
    }

    fn closure(&self, sample: &[Point]) -> Result<Option<Support>, HypothesisError> {
        let vs = self.version_space(sample);
        let Some((first, rest)) = vs.split_first() else { return Ok(None) };
        let mut acc = first.support.clone();
        for h in rest {
            acc = acc.intersect(&h.support)?;
        }
        Ok(Some(acc))
    }

    fn closure_contains(&self, sample: &[Point], p: &Point) -> Result<Option<bool>, HypothesisError> {
        let vs = self.version_space(sample);
        if vs.is_empty() {
            return Ok(None);
        }
        Ok(Some(vs.iter().all(|h| h.support.contains(p))))
    }

    fn erm(&self, labeled: &[Labeled]) -> Result<usize, HypothesisError> {
        Ok(self
            .members
            .iter()
            .map(|h| labeled.iter().filter(|(x, y)| h.support.contains(x) != *y).count())
            .min()
            .unwrap_or_else(|| labeled.iter().filter(|(_, y)| *y).count()))
    }

    fn centers(&self) -> Vec<Point> {
        self.centers.clone()
    }

    fn universe(&self) -> PointIter {
        let streams: Vec<PointIter> = self.members.iter().map(|h| h.support.iter()).collect();
        Box::new(streams.into_iter().kmerge().dedup())
    }

    fn uus(&self, r: &Scalar) -> UusResult {
        let mut witnesses = Vec::new();
        let mut unknown = false;
        for h in &self.members {
            match h.support.cover_number(&self.metric, r, &self.centers) {
                Ok(CoverResult::Infinite(w)) => witnesses.push(w),
                Ok(CoverResult::Finite(_)) => return UusResult::ViolatedBy(h.id.clone()),
                _ => unknown = true,
            }
        }
        if unknown {
            UusResult::UnknownAtBudget
        } else {
            UusResult::Satisfied(witnesses)
        }
    }
}
