use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use fixedbitset::FixedBitSet;

use super::{dist_cmp, in_ball, sq_dist, Metric, MetricError, Point, Scalar, Surd};

/// Outcome of a covering-number query on a possibly infinite set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoverResult {
    Finite(usize),
    Infinite(SeparationWitness),
    UnknownAtBudget { lower_bound: usize, budget: usize },
}

impl CoverResult {
    pub fn is_finite(&self) -> bool {
        matches!(self, CoverResult::Finite(_))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, CoverResult::Infinite(_))
    }

    pub fn finite(&self) -> Option<usize> {
        match self {
            CoverResult::Finite(n) => Some(*n),
            _ => None,
        }
    }
}

impl fmt::Display for CoverResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoverResult::Finite(n) => write!(f, "finite({n})"),
            CoverResult::Infinite(w) => write!(f, "infinite({})", w.family),
            CoverResult::UnknownAtBudget { lower_bound, budget } => {
                write!(f, "unknown(lower_bound={lower_bound},budget={budget})")
            }
        }
    }
}

/// How a witness rules out a finite cover.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WitnessMode {
    /// Family pairwise farther apart than `2 * radius`: no ball anywhere holds two members.
    Packing,
    /// Family pairwise farther apart than `radius` and no point of the carrying set
    /// lies within `radius` of infinitely many members.
    Internal,
}

/// Certificate that a set has no finite cover at `radius`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparationWitness {
    pub family: String,
    /// Squared lower bound on pairwise member distances.
    pub separation_sq: Surd,
    pub radius: Scalar,
    pub mode: WitnessMode,
    /// Sampled members used for spot checks.
    pub sample: Vec<Point>,
}

impl SeparationWitness {
    /// Re-checks the separation claim and every sampled pair.
    pub fn verify(&self, metric: &Metric) -> Result<bool, MetricError> {
        let factor = match self.mode {
            WitnessMode::Packing => Scalar::int(4),
            WitnessMode::Internal => Scalar::one(),
        };
        let bound = Surd::rational(self.radius.square() * factor);
        if self.separation_sq <= bound {
            return Ok(false);
        }
        for (i, p) in self.sample.iter().enumerate() {
            for q in &self.sample[i + 1..] {
                if sq_dist(metric, p, q)? < self.separation_sq {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// The same family certifies every smaller radius.
    pub fn at_radius(&self, radius: Scalar) -> SeparationWitness {
        assert!(radius <= self.radius, "witness radius can only shrink");
        SeparationWitness { radius, ..self.clone() }
    }
}

fn dedup_points(points: &[Point]) -> Vec<Point> {
    let mut v = points.to_vec();
    v.sort();
    v.dedup();
    v
}

/// Set-cover instance: `sets[c]` holds the targets candidate `c` covers.
struct Instance {
    n: usize,
    sets: Vec<FixedBitSet>,
}

impl Instance {
    fn build(metric: &Metric, targets: &[Point], radius: &Scalar, candidates: &[Point]) -> Result<Self, MetricError> {
        let n = targets.len();
        let mut sets = Vec::with_capacity(candidates.len());
        for c in candidates {
            let mut s = FixedBitSet::with_capacity(n);
            for (i, t) in targets.iter().enumerate() {
                if in_ball(metric, c, radius, t)? {
                    s.insert(i);
                }
            }
            sets.push(s);
        }
        let inst = Instance { n, sets };
        inst.check_coverable(targets)?;
        Ok(inst)
    }

    fn check_coverable(&self, targets: &[Point]) -> Result<(), MetricError> {
        let mut all = FixedBitSet::with_capacity(self.n);
        for s in &self.sets {
            all.union_with(s);
        }
        match (0..self.n).find(|i| !all.contains(*i)) {
            Some(i) => Err(MetricError::UncoverableTarget(targets[i].to_string())),
            None => Ok(()),
        }
    }
}

fn greedy_sets(n: usize, sets: &[FixedBitSet]) -> Vec<usize> {
    let mut uncovered = FixedBitSet::with_capacity(n);
    uncovered.insert_range(..);
    let mut chosen = Vec::new();
    while !uncovered.is_clear() {
        let mut best = (0usize, usize::MAX);
        for (c, s) in sets.iter().enumerate() {
            let gain = s.intersection(&uncovered).count();
            if gain > best.0 {
                best = (gain, c);
            }
        }
        if best.0 == 0 {
            break;
        }
        uncovered.difference_with(&sets[best.1]);
        chosen.push(best.1);
    }
    chosen
}

/// Drops empty, duplicate and strictly dominated sets; returns surviving indices.
fn prune(sets: &[FixedBitSet]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..sets.len()).filter(|&c| !sets[c].is_clear()).collect();
    order.sort_by_key(|&c| std::cmp::Reverse(sets[c].count_ones(..)));
    let mut kept: Vec<usize> = Vec::new();
    for c in order {
        if !kept.iter().any(|&k| sets[c].is_subset(&sets[k])) {
            kept.push(c);
        }
    }
    kept.sort_unstable();
    kept
}

/// Exact minimum cover of `0..n` by `sets` via branch and bound.
struct Solver<'a> {
    sets: &'a [FixedBitSet],
    by_target: Vec<Vec<usize>>,
    neighborhood: Vec<FixedBitSet>,
    best: Vec<usize>,
}

impl<'a> Solver<'a> {
    fn new(n: usize, sets: &'a [FixedBitSet]) -> Self {
        let mut by_target = vec![Vec::new(); n];
        for (c, s) in sets.iter().enumerate() {
            for t in s.ones() {
                by_target[t].push(c);
            }
        }
        for list in &mut by_target {
            list.sort_by_key(|&c| std::cmp::Reverse(sets[c].count_ones(..)));
        }
        let neighborhood = by_target
            .iter()
            .map(|cs| {
                let mut nb = FixedBitSet::with_capacity(n);
                for &c in cs {
                    nb.union_with(&sets[c]);
                }
                nb
            })
            .collect();
        let best = greedy_sets(n, sets);
        Solver { sets, by_target, neighborhood, best }
    }

    fn lower_bound(&self, uncovered: &FixedBitSet) -> usize {
        let mut pool = uncovered.clone();
        let mut count = 0;
        while let Some(t) = pool.ones().min_by_key(|&t| self.by_target[t].len()) {
            pool.difference_with(&self.neighborhood[t]);
            count += 1;
        }
        count
    }

    fn search(&mut self, uncovered: FixedBitSet, chosen: &mut Vec<usize>) {
        if uncovered.is_clear() {
            if chosen.len() < self.best.len() {
                self.best = chosen.clone();
            }
            return;
        }
        if chosen.len() + self.lower_bound(&uncovered) >= self.best.len() {
            return;
        }
        let t = uncovered
            .ones()
            .min_by_key(|&t| self.by_target[t].len())
            .expect("nonempty");
        for i in 0..self.by_target[t].len() {
            let c = self.by_target[t][i];
            let mut rest = uncovered.clone();
            rest.difference_with(&self.sets[c]);
            chosen.push(c);
            self.search(rest, chosen);
            chosen.pop();
        }
    }
}

/// Splits targets into groups that share no candidate.
fn components(n: usize, sets: &[FixedBitSet], live: &[usize]) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut y = x;
        while parent[y] != r {
            let next = parent[y];
            parent[y] = r;
            y = next;
        }
        r
    }
    for &c in live {
        let mut it = sets[c].ones();
        if let Some(first) = it.next() {
            for t in it {
                let (a, b) = (find(&mut parent, first), find(&mut parent, t));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: HashMap<usize, (Vec<usize>, Vec<usize>)> = HashMap::new();
    for t in 0..n {
        let r = find(&mut parent, t);
        groups.entry(r).or_default().0.push(t);
    }
    for &c in live {
        if let Some(t) = sets[c].ones().next() {
            let r = find(&mut parent, t);
            groups.get_mut(&r).expect("group").1.push(c);
        }
    }
    let mut out: Vec<_> = groups.into_values().collect();
    out.sort_by_key(|(ts, _)| ts[0]);
    out
}

/// Exact minimum cover of `0..n`; returns indices into `sets`.
fn solve_exact(n: usize, sets: &[FixedBitSet]) -> Vec<usize> {
    let live = prune(sets);
    let mut chosen_all = Vec::new();
    for (ts, cs) in components(n, sets, &live) {
        let local: Vec<FixedBitSet> = cs
            .iter()
            .map(|&c| {
                let mut s = FixedBitSet::with_capacity(ts.len());
                for (i, &t) in ts.iter().enumerate() {
                    if sets[c].contains(t) {
                        s.insert(i);
                    }
                }
                s
            })
            .collect();
        let picked = if cs.len() == 1 {
            vec![0]
        } else {
            let mut solver = Solver::new(ts.len(), &local);
            let mut all = FixedBitSet::with_capacity(ts.len());
            all.insert_range(..);
            solver.search(all, &mut Vec::new());
            solver.best
        };
        chosen_all.extend(picked.into_iter().map(|i| cs[i]));
    }
    chosen_all.sort_unstable();
    chosen_all
}

/// An optimal cover: indices into the deduplicated, sorted candidate list, and that list.
pub fn min_cover(
    metric: &Metric,
    targets: &[Point],
    radius: &Scalar,
    candidates: &[Point],
) -> Result<(Vec<usize>, Vec<Point>), MetricError> {
    let targets = dedup_points(targets);
    let candidates = dedup_points(candidates);
    if targets.is_empty() {
        return Ok((Vec::new(), candidates));
    }
    let inst = Instance::build(metric, &targets, radius, &candidates)?;
    Ok((solve_exact(inst.n, &inst.sets), candidates))
}

/// Minimum number of candidate-centred closed balls covering every target.
pub fn covering_number_exact(
    metric: &Metric,
    targets: &[Point],
    radius: &Scalar,
    candidates: &[Point],
) -> Result<usize, MetricError> {
    Ok(min_cover(metric, targets, radius, candidates)?.0.len())
}

/// Size of the greedy max-coverage cover.
pub fn covering_number_greedy(
    metric: &Metric,
    targets: &[Point],
    radius: &Scalar,
    candidates: &[Point],
) -> Result<usize, MetricError> {
    let targets = dedup_points(targets);
    let candidates = dedup_points(candidates);
    if targets.is_empty() {
        return Ok(0);
    }
    let inst = Instance::build(metric, &targets, radius, &candidates)?;
    Ok(greedy_sets(inst.n, &inst.sets).len())
}

/// Size of a greedily built subset with pairwise distance above `2 * radius`.
pub fn packing_greedy(metric: &Metric, points: &[Point], radius: &Scalar) -> Result<usize, MetricError> {
    let twice = radius + radius;
    let mut picked: Vec<&Point> = Vec::new();
    for p in points {
        let mut far = true;
        for q in &picked {
            if dist_cmp(metric, p, q, &twice)? != Ordering::Greater {
                far = false;
                break;
            }
        }
        if far {
            picked.push(p);
        }
    }
    Ok(picked.len())
}

/// Incremental exact cover of a growing target list against a fixed candidate pool.
/// New candidates may be added as targets arrive; every target is its own candidate.
pub struct CoverTracker {
    metric: Metric,
    radius: Scalar,
    candidates: Vec<Point>,
    index: HashMap<Point, usize>,
    targets: Vec<usize>,
    target_set: HashMap<usize, usize>,
    /// `covers[c]` lists target slots within `radius` of candidate `c`.
    covers: Vec<Vec<usize>>,
    parent: Vec<usize>,
    cached: HashMap<usize, usize>,
}

impl CoverTracker {
    pub fn new(metric: Metric, radius: Scalar, centers: &[Point]) -> Self {
        let mut t = CoverTracker {
            metric,
            radius,
            candidates: Vec::new(),
            index: HashMap::new(),
            targets: Vec::new(),
            target_set: HashMap::new(),
            covers: Vec::new(),
            parent: Vec::new(),
            cached: HashMap::new(),
        };
        for c in dedup_points(centers) {
            t.add_candidate(c).expect("center accepted by metric");
        }
        t
    }

    pub fn radius(&self) -> &Scalar {
        &self.radius
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    fn add_candidate(&mut self, p: Point) -> Result<usize, MetricError> {
        if let Some(&c) = self.index.get(&p) {
            return Ok(c);
        }
        let c = self.candidates.len();
        let mut covered = Vec::new();
        for (slot, &tc) in self.targets.iter().enumerate() {
            if in_ball(&self.metric, &p, &self.radius, &self.candidates[tc])? {
                covered.push(slot);
            }
        }
        self.candidates.push(p.clone());
        self.index.insert(p, c);
        for &slot in &covered {
            self.union_targets(covered[0], slot);
        }
        self.covers.push(covered);
        Ok(c)
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }

    fn union_targets(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.cached.remove(&ra);
        self.cached.remove(&rb);
        if ra != rb {
            self.parent[ra] = rb;
        }
    }

    /// Adds a target (and makes it a candidate); repeated points are ignored.
    pub fn push(&mut self, p: &Point) -> Result<(), MetricError> {
        let c = self.add_candidate(p.clone())?;
        if self.target_set.contains_key(&c) {
            return Ok(());
        }
        let slot = self.targets.len();
        self.targets.push(c);
        self.target_set.insert(c, slot);
        self.parent.push(slot);
        let mut touching = Vec::new();
        for k in 0..self.candidates.len() {
            if in_ball(&self.metric, &self.candidates[k], &self.radius, p)? {
                self.covers[k].push(slot);
                touching.push(k);
            }
        }
        for k in touching {
            let first = self.covers[k][0];
            self.union_targets(first, slot);
        }
        Ok(())
    }

    /// Exact covering number of the targets pushed so far.
    pub fn value(&mut self) -> usize {
        let n = self.targets.len();
        let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
        for slot in 0..n {
            let r = self.find(slot);
            groups.entry(r).or_default().push(slot);
        }
        let mut total = 0;
        for (root, slots) in groups {
            if let Some(v) = self.cached.get(&root) {
                total += v;
                continue;
            }
            let pos: HashMap<usize, usize> = slots.iter().enumerate().map(|(i, &s)| (s, i)).collect();
            let mut sets = Vec::new();
            for cov in &self.covers {
                if cov.first().is_some_and(|s| pos.contains_key(s)) {
                    let mut b = FixedBitSet::with_capacity(slots.len());
                    for s in cov {
                        b.insert(pos[s]);
                    }
                    sets.push(b);
                }
            }
            let v = solve_exact(slots.len(), &sets).len();
            self.cached.insert(root, v);
            total += v;
        }
        total
    }
}

/// Parses a points file: optional `metric ...` header, then one point per line.
/// Blank lines and `#` comments are skipped. Without a header the metric follows
/// the first point's kind.
pub fn parse_points_file(text: &str) -> Result<(Option<Metric>, Vec<Point>), MetricError> {
    let mut metric = None;
    let mut points = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = |e: MetricError| MetricError::ParseAt { line: i + 1, msg: e.to_string() };
        if line.starts_with("metric") {
            if metric.is_some() || !points.is_empty() {
                return Err(MetricError::ParseAt { line: i + 1, msg: "metric header must come first".into() });
            }
            metric = Some(line.parse::<Metric>().map_err(at)?);
            continue;
        }
        let p: Point = line.parse().map_err(at)?;
        let m = metric.get_or_insert_with(|| match p {
            Point::Atom(_) => Metric::Discrete,
            Point::Real(_) => Metric::Abs,
            Point::Vec(_) => Metric::L2,
        });
        if !m.accepts(&p) {
            return Err(MetricError::ParseAt {
                line: i + 1,
                msg: format!("point `{p}` does not match metric `{m}`"),
            });
        }
        points.push(p);
    }
    Ok((metric, points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_core::Coord;

    fn reals(xs: &[i64]) -> Vec<Point> {
        xs.iter().map(|&x| Point::real(x)).collect()
    }

    #[test]
    fn exact_examples() {
        let t = reals(&[0, 3, 6]);
        assert_eq!(covering_number_exact(&Metric::Abs, &t, &Scalar::one(), &t).unwrap(), 3);
        assert_eq!(covering_number_exact(&Metric::Abs, &[], &Scalar::one(), &t).unwrap(), 0);
        let eps_p = Scalar::new(3, 5);
        let a: Vec<Point> = (1..=5).map(|k| Point::basis(k, Coord::sqrt2half(eps_p.clone()))).collect();
        assert_eq!(covering_number_exact(&Metric::L2, &a, &Scalar::new(3, 10), &a).unwrap(), 5);
    }

    #[test]
    fn uncoverable_target() {
        let err = covering_number_exact(&Metric::Abs, &reals(&[0, 5]), &Scalar::one(), &reals(&[0])).unwrap_err();
        assert_eq!(err, MetricError::UncoverableTarget("real:5".into()));
    }

    #[test]
    fn greedy_examples() {
        let t = reals(&[0, 3, 6]);
        assert_eq!(covering_number_greedy(&Metric::Abs, &t, &Scalar::one(), &t).unwrap(), 3);
        assert_eq!(covering_number_greedy(&Metric::Abs, &reals(&[0]), &Scalar::one(), &reals(&[0, 1])).unwrap(), 1);
        let line = reals(&[0, 1, 2, 3, 4]);
        let g = covering_number_greedy(&Metric::Abs, &line, &Scalar::one(), &line).unwrap();
        let e = covering_number_exact(&Metric::Abs, &line, &Scalar::one(), &line).unwrap();
        assert_eq!(e, 2);
        assert!(g >= e);
    }

    #[test]
    fn packing_examples() {
        assert_eq!(packing_greedy(&Metric::Abs, &reals(&[0, 3, 6]), &Scalar::one()).unwrap(), 3);
        assert_eq!(packing_greedy(&Metric::Abs, &reals(&[0, 1]), &Scalar::one()).unwrap(), 1);
        let r = Scalar::one();
        let u: Vec<Point> = (1..=5).map(|k| Point::basis(k, Coord::plain(Scalar::int(2)))).collect();
        assert_eq!(packing_greedy(&Metric::L2, &u, &r).unwrap(), 5);
    }

    #[test]
    fn exact_beats_greedy_on_a_trap_instance() {
        // greedy takes the middle candidate first and then needs two more
        let sets: Vec<FixedBitSet> = [vec![0, 1, 2], vec![3, 4, 5], vec![1, 2, 3, 4]]
            .iter()
            .map(|v| {
                let mut b = FixedBitSet::with_capacity(6);
                for &i in v {
                    b.insert(i);
                }
                b
            })
            .collect();
        let sets = vec![sets[0].clone(), sets[1].clone(), sets[2].clone()];
        assert_eq!(solve_exact(6, &sets).len(), 2);
    }

    #[test]
    fn tracker_matches_batch_solver() {
        let pts = reals(&[0, 1, 2, 3, 4, 10, 11, 20]);
        let mut tr = CoverTracker::new(Metric::Abs, Scalar::one(), &[]);
        for (i, p) in pts.iter().enumerate() {
            tr.push(p).unwrap();
            let prefix = &pts[..=i];
            let batch = covering_number_exact(&Metric::Abs, prefix, &Scalar::one(), prefix).unwrap();
            assert_eq!(tr.value(), batch, "prefix {i}");
        }
    }

    #[test]
    fn tracker_with_extra_centers() {
        let mut tr = CoverTracker::new(Metric::Abs, Scalar::one(), &reals(&[1]));
        tr.push(&Point::real(0)).unwrap();
        tr.push(&Point::real(2)).unwrap();
        assert_eq!(tr.value(), 1);
        tr.push(&Point::real(2)).unwrap();
        assert_eq!(tr.len(), 2);
    }

    #[test]
    fn witness_verification() {
        let r = Scalar::one();
        let u: Vec<Point> = (1..=4).map(|k| Point::basis(k, Coord::plain(Scalar::int(2)))).collect();
        let w = SeparationWitness {
            family: "u".into(),
            separation_sq: Surd::rational(Scalar::int(8)),
            radius: r,
            mode: WitnessMode::Packing,
            sample: u,
        };
        assert!(w.verify(&Metric::L2).unwrap());
        let too_big = SeparationWitness { radius: Scalar::int(2), ..w.clone() };
        assert!(!too_big.verify(&Metric::L2).unwrap());
        assert!(w.at_radius(Scalar::new(1, 2)).verify(&Metric::L2).unwrap());
    }

    #[test]
    fn points_file() {
        let (m, pts) = parse_points_file("# demo\nreal:0\nreal:3/1\n\nreal:6\n").unwrap();
        assert_eq!(m, Some(Metric::Abs));
        assert_eq!(pts.len(), 3);
        assert_eq!(parse_points_file("").unwrap(), (None, vec![]));
        let err = parse_points_file("metric abs\natom:1\n").unwrap_err();
        assert!(matches!(err, MetricError::ParseAt { line: 2, .. }));
        let err = parse_points_file("real:1\nreal:x\n").unwrap_err();
        assert!(matches!(err, MetricError::ParseAt { line: 2, .. }));
    }
}
