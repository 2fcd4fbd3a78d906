#![allow(dead_code)]

use std::collections::BTreeSet;

use genlab::hypothesis::{ExplicitClass, Family, Hypothesis, Lattice, LatticeKind, Support};
use genlab::metric_core::{Coord, Metric, Point, Scalar, SparseVec};
use rand::seq::IteratorRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(n: i64, d: i64) -> Scalar {
    Scalar::new(n, d)
}

/// Up to `max` distinct plane points with half-integer coordinates in `[-4, 4]`.
pub fn plane_points(rng: &mut ChaCha8Rng, max: usize) -> Vec<Point> {
    let n = rng.random_range(0..=max);
    let mut pts = BTreeSet::new();
    while pts.len() < n {
        let c = |rng: &mut ChaCha8Rng| Coord::plain(q(rng.random_range(-8..=8), 2));
        let (x, y) = (c(rng), c(rng));
        pts.insert(Point::Vec(SparseVec::new(vec![(1, x), (2, y)]).expect("valid coords")));
    }
    pts.into_iter().collect()
}

/// A random radius among the halves `1/2 ..= 3`.
pub fn radius(rng: &mut ChaCha8Rng) -> Scalar {
    q(rng.random_range(1..=6), 2)
}

/// Random class on the line: each member is a few integers from `[0, 20)`
/// plus a far ray `{100 + o + k * step}` so every support is unbounded.
#[derive(Clone, Debug)]
pub struct LineClass {
    pub class: ExplicitClass,
    pub ground: Vec<Point>,
    pub eps: Scalar,
    pub eps_prime: Scalar,
}

pub fn line_class(rng: &mut ChaCha8Rng) -> LineClass {
    let m = rng.random_range(1..=4);
    let ground_size = rng.random_range(1..=10);
    let ground: Vec<i64> = (0..20).choose_multiple(rng, ground_size);
    let mut members = Vec::new();
    for i in 0..m {
        let finite: Vec<Point> = ground.iter().filter(|_| rng.random_bool(0.5)).map(|&v| Point::real(v)).collect();
        let step = [3i64, 4, 6][rng.random_range(0..3)];
        let offset = 100 + rng.random_range(0..6);
        let ray = Lattice::new(LatticeKind::Real, offset.into(), step.into(), true).expect("positive step");
        members.push(Hypothesis::new(format!("h{i}"), Support::new(finite, [Family::Lattice(ray)])));
    }
    let (eps, eps_prime) = [(q(1, 2), q(1, 2)), (q(1, 1), q(1, 2)), (q(1, 1), q(1, 1))][rng.random_range(0..3)].clone();
    let class = ExplicitClass::new("random_line", Metric::Abs, members).expect("valid class");
    let mut ground: Vec<Point> = ground.into_iter().map(Point::real).collect();
    ground.sort();
    LineClass { class, ground, eps, eps_prime }
}

/// Atom class description used by the distinctness reference.
#[derive(Clone, Debug)]
pub struct AtomMember {
    pub finite: BTreeSet<i64>,
    pub offset: i64,
    pub step: i64,
}

impl AtomMember {
    pub fn contains(&self, j: i64) -> bool {
        self.finite.contains(&j) || (j >= self.offset && (j - self.offset) % self.step == 0)
    }
}

pub fn atom_class(rng: &mut ChaCha8Rng) -> (ExplicitClass, Vec<AtomMember>) {
    let m = rng.random_range(1..=4);
    let mut specs = Vec::new();
    let mut members = Vec::new();
    for i in 0..m {
        let finite: BTreeSet<i64> = (0..12).filter(|_| rng.random_bool(0.3)).collect();
        let spec = AtomMember { finite, offset: rng.random_range(0..8), step: rng.random_range(1..=4) };
        let ray = Lattice::new(LatticeKind::Atom, spec.offset.into(), spec.step.into(), true).expect("ray");
        let pts = spec.finite.iter().map(|&j| Point::Atom(j));
        members.push(Hypothesis::new(format!("h{i}"), Support::new(pts, [Family::Lattice(ray)])));
        specs.push(spec);
    }
    (ExplicitClass::new("random_atoms", Metric::Discrete, members).expect("valid class"), specs)
}

/// Atom ids scanned for closure members.
pub const SCAN: i64 = 10_000;

/// Which reference generator to mirror.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RefGen {
    /// Abstain until `d` distinct reveals, then the least unseen closure atom.
    Uniform(usize),
    /// Least unseen atom of the union of supports that is in the closure.
    ErmSearch,
}

/// A game replayed with plain set semantics: novelty is "not yet revealed",
/// the cover profile counts distinct reveals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefTranscript {
    pub moves: Vec<Option<i64>>,
    pub member: Vec<Option<bool>>,
    pub novel: Vec<Option<bool>>,
    pub profile: Vec<usize>,
}

fn in_closure(specs: &[AtomMember], seen: &[i64], j: i64) -> bool {
    let live: Vec<&AtomMember> = specs.iter().filter(|h| seen.iter().all(|&s| h.contains(s))).collect();
    !live.is_empty() && live.iter().all(|h| h.contains(j))
}

pub fn reference_game(
    specs: &[AtomMember],
    reveals: &[i64],
    target: usize,
    gen: RefGen,
    budget: usize,
) -> RefTranscript {
    let mut out = RefTranscript { moves: vec![], member: vec![], novel: vec![], profile: vec![] };
    for t in 1..=reveals.len() {
        let seen = &reveals[..t];
        let distinct: BTreeSet<i64> = seen.iter().copied().collect();
        out.profile.push(distinct.len());
        let mv = match gen {
            RefGen::Uniform(d) if distinct.len() < d => None,
            RefGen::Uniform(_) => (0i64..SCAN)
                .filter(|&j| in_closure(specs, seen, j))
                .take(budget)
                .find(|j| !distinct.contains(j)),
            RefGen::ErmSearch => (0i64..)
                .filter(|&j| specs.iter().any(|h| h.contains(j)))
                .take(budget)
                .find(|j| !distinct.contains(j) && in_closure(specs, seen, *j)),
        };
        out.member.push(mv.map(|j| specs[target].contains(j)));
        out.novel.push(mv.map(|j| !distinct.contains(&j)));
        out.moves.push(mv);
    }
    out
}

/// Limit verdict under the default evidence rule, from flags alone.
pub fn reference_limit_verdict(r: &RefTranscript) -> String {
    let h = r.moves.len();
    if r.moves.iter().all(Option::is_none) {
        return "inconclusive(no emissions)".into();
    }
    let errors: Vec<usize> = (0..h).filter(|&i| !(r.member[i] == Some(true) && r.novel[i] == Some(true))).map(|i| i + 1).collect();
    let Some(&last) = errors.last() else { return "eventually_correct(t*=1)".into() };
    if last * 4 > h * 3 {
        format!("fails_within_horizon(errors={},last={last})", errors.len())
    } else if (h - last) * 2 >= h {
        format!("eventually_correct(t*={})", last + 1)
    } else {
        format!("inconclusive(clean suffix {} of {h})", h - last)
    }
}
