use std::collections::{HashMap, HashSet};

use crate::metric_core::{in_ball, Metric, MetricError, Point, Scalar};

/// Incremental "outside every ball around the seen points" test for a fixed
/// metric and radius. Valid while `seen` only grows by appending.
#[derive(Clone, Debug)]
pub struct NoveltyCache {
    metric: Metric,
    radius: Scalar,
    covered: HashSet<Point>,
    /// Number of seen points already known not to cover the key.
    checked: HashMap<Point, usize>,
    prefix: Vec<Point>,
}

impl NoveltyCache {
    pub fn new(metric: Metric, radius: Scalar) -> Self {
        NoveltyCache { metric, radius, covered: HashSet::new(), checked: HashMap::new(), prefix: Vec::new() }
    }

    fn sync(&mut self, seen: &[Point]) {
        if seen.len() < self.prefix.len() || seen[..self.prefix.len()] != self.prefix[..] {
            self.covered.clear();
            self.checked.clear();
            self.prefix.clear();
        }
        self.prefix.extend(seen[self.prefix.len()..].iter().cloned());
    }

    /// Whether `p` lies outside every closed ball around `seen`.
    pub fn is_novel(&mut self, seen: &[Point], p: &Point) -> Result<bool, MetricError> {
        self.sync(seen);
        if self.covered.contains(p) {
            return Ok(false);
        }
        let start = self.checked.get(p).copied().unwrap_or(0);
        for s in &seen[start..] {
            if in_ball(&self.metric, s, &self.radius, p)? {
                self.covered.insert(p.clone());
                self.checked.remove(p);
                return Ok(false);
            }
        }
        if !self.metric.accepts(p) {
            return Err(MetricError::VariantMismatch { metric: self.metric.to_string(), point: p.to_string() });
        }
        self.checked.insert(p.clone(), seen.len());
        Ok(true)
    }

    /// First novel point among the first `budget` items of `candidates`.
    pub fn first_novel(
        &mut self,
        seen: &[Point],
        candidates: impl Iterator<Item = Point>,
        budget: usize,
    ) -> Result<Option<Point>, MetricError> {
        for p in candidates.take(budget) {
            if self.is_novel(seen, &p)? {
                return Ok(Some(p));
            }
        }
        Ok(None)
    }
}
