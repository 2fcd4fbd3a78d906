use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::numth::{crt, exponent_split, log_exact, root_base};
use super::HypothesisError;
use crate::metric_core::{
    covering_number_exact, sq_dist, Coord, CoverResult, Metric, Point, Scalar, SeparationWitness, Surd,
    WitnessMode,
};

/// Boxed owned point stream.
pub type PointIter = Box<dyn Iterator<Item = Point> + Send>;

const WITNESS_SAMPLE: usize = 10;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum LatticeKind {
    Real,
    Atom,
}

fn value_of(kind: LatticeKind, p: &Point) -> Option<BigInt> {
    match (kind, p) {
        (LatticeKind::Real, Point::Real(v)) => v.to_integer(),
        (LatticeKind::Atom, Point::Atom(i)) => Some(BigInt::from(*i)),
        _ => None,
    }
}

fn make_point(kind: LatticeKind, v: BigInt) -> Option<Point> {
    match kind {
        LatticeKind::Real => Some(Point::Real(Scalar::int(v))),
        LatticeKind::Atom => v.to_i64().map(Point::Atom),
    }
}

/// `{offset + k * step}` over all integers `k`, or only `k >= 0` for a ray.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Lattice {
    kind: LatticeKind,
    offset: BigInt,
    step: BigInt,
    ray: bool,
}

impl Lattice {
    pub fn new(kind: LatticeKind, offset: BigInt, step: BigInt, ray: bool) -> Result<Self, HypothesisError> {
        if !step.is_positive() {
            return Err(HypothesisError::Invalid(format!("lattice step must be positive, got {step}")));
        }
        if kind == LatticeKind::Atom && !ray {
            return Err(HypothesisError::Invalid("atom lattices must be rays".into()));
        }
        let offset = if ray { offset } else { offset.mod_floor(&step) };
        Ok(Lattice { kind, offset, step, ray })
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn offset(&self) -> &BigInt {
        &self.offset
    }

    pub fn step(&self) -> &BigInt {
        &self.step
    }

    pub fn is_ray(&self) -> bool {
        self.ray
    }

    pub fn contains(&self, p: &Point) -> bool {
        value_of(self.kind, p).is_some_and(|v| self.contains_value(&v))
    }

    fn contains_value(&self, v: &BigInt) -> bool {
        (v - &self.offset).mod_floor(&self.step).is_zero() && (!self.ray || v >= &self.offset)
    }

    fn iter(&self) -> PointIter {
        let kind = self.kind;
        let step = self.step.clone();
        let (start, lower) = if self.ray && self.offset.is_negative() {
            let k = (-&self.offset).div_ceil(&step);
            (&self.offset + &step * k, Some(self.offset.clone()))
        } else if self.ray {
            (self.offset.clone(), Some(self.offset.clone()))
        } else {
            (self.offset.clone(), None)
        };
        let up_step = step.clone();
        let up = itertools::iterate(start.clone(), move |v| v + &up_step).map_while(move |v| make_point(kind, v));
        if kind == LatticeKind::Atom {
            return Box::new(up);
        }
        let down = itertools::iterate(&start - &step, move |v| v - &step)
            .take_while(move |v| v.is_negative() && lower.as_ref().is_none_or(|lo| v >= lo))
            .map_while(move |v| make_point(kind, v));
        Box::new(up.merge(down))
    }

    fn intersect(&self, other: &Lattice) -> Option<Lattice> {
        if self.kind != other.kind {
            return None;
        }
        let (c, l) = crt(&self.offset, &self.step, &other.offset, &other.step)?;
        let lower = match (self.ray, other.ray) {
            (false, false) => None,
            (true, false) => Some(self.offset.clone()),
            (false, true) => Some(other.offset.clone()),
            (true, true) => Some(self.offset.clone().max(other.offset.clone())),
        };
        match lower {
            None => Some(Lattice { kind: self.kind, offset: c, step: l, ray: false }),
            Some(lo) => {
                let off = &lo + (&c - &lo).mod_floor(&l);
                Some(Lattice { kind: self.kind, offset: off, step: l, ray: true })
            }
        }
    }

    fn describe(&self) -> String {
        let kind = match self.kind {
            LatticeKind::Real => "real",
            LatticeKind::Atom => "atom",
        };
        format!("lattice kind={kind} offset={} step={}{}", self.offset, self.step, if self.ray { " ray" } else { "" })
    }
}

/// Reals `{scale * base^n + shift : n >= from}`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PowerSeq {
    scale: BigInt,
    base: BigInt,
    shift: BigInt,
    from: u32,
}

impl PowerSeq {
    pub fn new(scale: BigInt, base: BigInt, shift: BigInt, from: u32) -> Result<Self, HypothesisError> {
        if !scale.is_positive() || base < BigInt::from(2) {
            return Err(HypothesisError::Invalid("power family needs scale >= 1 and base >= 2".into()));
        }
        Ok(PowerSeq { scale, base, shift, from })
    }

    pub fn base(&self) -> &BigInt {
        &self.base
    }

    pub fn term(&self, n: u32) -> BigInt {
        &self.scale * num_traits::pow(self.base.clone(), n as usize) + &self.shift
    }

    pub fn contains(&self, p: &Point) -> bool {
        let Some(v) = value_of(LatticeKind::Real, p) else { return false };
        let d = v - &self.shift;
        if !(&d % &self.scale).is_zero() {
            return false;
        }
        log_exact(&(d / &self.scale), &self.base).is_some_and(|n| n >= self.from)
    }

    fn iter(&self) -> PointIter {
        let me = self.clone();
        let mut negatives: Vec<Point> = Vec::new();
        let mut n = self.from;
        while me.term(n).is_negative() {
            negatives.push(Point::Real(Scalar::int(me.term(n))));
            n += 1;
        }
        negatives.sort();
        let up = (n..).map(move |k| Point::Real(Scalar::int(me.term(k))));
        Box::new(up.merge(negatives))
    }

    fn first_at_least(&self, lo: &BigInt) -> u32 {
        let mut n = self.from;
        while &self.term(n) < lo {
            n += 1;
        }
        n
    }

    /// Intersection with a lattice: isolated points plus periodic sub-families.
    fn intersect_lattice(&self, lat: &Lattice) -> (Vec<Point>, Vec<PowerSeq>) {
        if lat.kind != LatticeKind::Real {
            return (Vec::new(), Vec::new());
        }
        let split = exponent_split(&self.scale, &self.base, &self.shift, self.from, &lat.step, &lat.offset);
        let n_lo = if lat.ray { self.first_at_least(&lat.offset) } else { self.from };
        let mut points = Vec::new();
        for n in split.single {
            if n >= n_lo {
                points.push(Point::Real(Scalar::int(self.term(n))));
            }
        }
        let mut fams = Vec::new();
        for (start, period) in split.periodic {
            let first = if start >= n_lo { start } else { start + period * (n_lo - start).div_ceil(period) };
            fams.push(PowerSeq {
                scale: &self.scale * num_traits::pow(self.base.clone(), first as usize),
                base: num_traits::pow(self.base.clone(), period as usize),
                shift: self.shift.clone(),
                from: 0,
            });
        }
        (points, fams)
    }

    fn intersect(&self, other: &PowerSeq) -> Option<Vec<PowerSeq>> {
        if self == other {
            return Some(vec![self.clone()]);
        }
        if !self.scale.is_one() || !other.scale.is_one() || self.shift != other.shift {
            return None;
        }
        let (s1, i) = root_base(&self.base);
        let (s2, j) = root_base(&other.base);
        if s1 != s2 {
            return Some(Vec::new());
        }
        let l = i.lcm(&j);
        let lo = (i * self.from).max(j * other.from);
        Some(vec![PowerSeq {
            scale: BigInt::one(),
            base: num_traits::pow(s1, l as usize),
            shift: self.shift.clone(),
            from: lo.div_ceil(l),
        }])
    }

    fn describe(&self) -> String {
        format!("powers scale={} base={} shift={} from={}", self.scale, self.base, self.shift, self.from)
    }
}

/// Sets of positive sequence indices.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum IndexSet {
    /// `k >= 1` with `k = residue (mod modulus)`.
    Residue { modulus: u64, residue: u64 },
    /// `{scale * base^n + shift : n >= from}`.
    Geometric { scale: u64, base: u64, shift: u64, from: u32 },
    Explicit(BTreeSet<u64>),
}

impl IndexSet {
    pub fn all() -> Self {
        IndexSet::Residue { modulus: 1, residue: 0 }
    }

    pub fn evens() -> Self {
        IndexSet::Residue { modulus: 2, residue: 0 }
    }

    pub fn odds() -> Self {
        IndexSet::Residue { modulus: 2, residue: 1 }
    }

    /// `{p^n : n >= 1}`.
    pub fn powers(p: u64) -> Self {
        IndexSet::Geometric { scale: 1, base: p, shift: 0, from: 1 }
    }

    pub fn explicit(items: impl IntoIterator<Item = u64>) -> Self {
        IndexSet::Explicit(items.into_iter().filter(|&k| k >= 1).collect())
    }

    pub fn residue(modulus: u64, residue: u64) -> Self {
        assert!(modulus >= 1);
        IndexSet::Residue { modulus, residue: residue % modulus }
    }

    pub fn is_infinite(&self) -> bool {
        match self {
            IndexSet::Residue { .. } => true,
            IndexSet::Geometric { base, .. } => *base >= 2,
            IndexSet::Explicit(_) => false,
        }
    }

    pub fn contains(&self, k: u64) -> bool {
        if k == 0 {
            return false;
        }
        match self {
            IndexSet::Residue { modulus, residue } => k % modulus == *residue,
            IndexSet::Geometric { scale, base, shift, from } => {
                let Some(d) = k.checked_sub(*shift) else { return false };
                if d % scale != 0 {
                    return false;
                }
                log_exact(&BigInt::from(d / scale), &BigInt::from(*base)).is_some_and(|n| n >= *from)
            }
            IndexSet::Explicit(s) => s.contains(&k),
        }
    }

    /// Ascending members; stops where indices leave the `u64` range.
    pub fn iter(&self) -> Box<dyn Iterator<Item = u64> + Send> {
        match self.clone() {
            IndexSet::Residue { modulus, residue } => {
                let first = if residue == 0 { modulus } else { residue };
                Box::new(itertools::iterate(Some(first), move |k| k.and_then(|k| k.checked_add(modulus))).map_while(|k| k))
            }
            IndexSet::Geometric { scale, base, shift, from } => Box::new(
                (from..)
                    .map_while(move |n| base.checked_pow(n)?.checked_mul(scale)?.checked_add(shift))
                    .filter(|&k| k >= 1),
            ),
            IndexSet::Explicit(s) => Box::new(s.into_iter()),
        }
    }

    /// Exact intersection as a union of index sets; `None` when the shapes are
    /// outside the decidable cases.
    pub fn intersect(&self, other: &IndexSet) -> Option<Vec<IndexSet>> {
        use IndexSet::*;
        match (self, other) {
            (Explicit(s), o) | (o, Explicit(s)) => {
                Some(vec![Explicit(s.iter().copied().filter(|&k| o.contains(k)).collect())])
            }
            (Residue { modulus: m1, residue: r1 }, Residue { modulus: m2, residue: r2 }) => {
                let sol = crt(&BigInt::from(*r1), &BigInt::from(*m1), &BigInt::from(*r2), &BigInt::from(*m2));
                Some(match sol {
                    None => Vec::new(),
                    Some((c, l)) => vec![Residue { modulus: l.to_u64()?, residue: c.to_u64()? }],
                })
            }
            (Residue { modulus, residue }, g @ Geometric { .. }) | (g @ Geometric { .. }, Residue { modulus, residue }) => {
                let Geometric { scale, base, shift, from } = *g else { unreachable!() };
                if *modulus == 1 {
                    return Some(vec![g.clone()]);
                }
                let split = exponent_split(
                    &BigInt::from(scale),
                    &BigInt::from(base),
                    &BigInt::from(shift),
                    from,
                    &BigInt::from(*modulus),
                    &BigInt::from(*residue),
                );
                let term = |n: u32| base.checked_pow(n)?.checked_mul(scale)?.checked_add(shift);
                let mut out = Vec::new();
                let singles: BTreeSet<u64> = split.single.iter().filter_map(|&n| term(n)).collect();
                if !singles.is_empty() {
                    out.push(Explicit(singles));
                }
                for (start, period) in split.periodic {
                    let Some(sc) = base.checked_pow(start).and_then(|b| b.checked_mul(scale)) else { continue };
                    match base.checked_pow(period) {
                        Some(b) => out.push(Geometric { scale: sc, base: b, shift, from: 0 }),
                        None => {
                            if let Some(k) = sc.checked_add(shift) {
                                out.push(Explicit([k].into()));
                            }
                        }
                    }
                }
                Some(out)
            }
            (a @ Geometric { .. }, b @ Geometric { .. }) => {
                if a == b {
                    return Some(vec![a.clone()]);
                }
                let (Geometric { scale: 1, base: p, shift: 0, from: f1 }, Geometric { scale: 1, base: q, shift: 0, from: f2 }) =
                    (a, b)
                else {
                    return None;
                };
                let fam_a = PowerSeq::new(BigInt::one(), BigInt::from(*p), BigInt::zero(), *f1).ok()?;
                let fam_b = PowerSeq::new(BigInt::one(), BigInt::from(*q), BigInt::zero(), *f2).ok()?;
                let mut out = Vec::new();
                for f in fam_a.intersect(&fam_b)? {
                    match f.base.to_u64() {
                        Some(b) => out.push(Geometric { scale: 1, base: b, shift: 0, from: f.from }),
                        None if f.from == 0 => out.push(Explicit([1].into())),
                        None => {}
                    }
                }
                Some(out)
            }
        }
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexSet::Residue { modulus: 1, .. } => write!(f, "all"),
            IndexSet::Residue { modulus: 2, residue: 0 } => write!(f, "evens"),
            IndexSet::Residue { modulus: 2, residue: 1 } => write!(f, "odds"),
            IndexSet::Residue { modulus, residue } => write!(f, "mod:{modulus}:{residue}"),
            IndexSet::Geometric { scale: 1, base, shift: 0, from: 1 } => write!(f, "powers:{base}"),
            IndexSet::Geometric { scale, base, shift, from } => write!(f, "geom:{scale}:{base}:{shift}:{from}"),
            IndexSet::Explicit(s) => write!(f, "explicit:{}", s.iter().join(",")),
        }
    }
}

impl std::str::FromStr for IndexSet {
    type Err = HypothesisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || HypothesisError::Invalid(format!("bad index set `{s}`"));
        let num = |t: &str| t.trim().parse::<u64>().map_err(|_| bad());
        match s.split(':').collect::<Vec<_>>().as_slice() {
            ["all"] => Ok(IndexSet::all()),
            ["evens"] => Ok(IndexSet::evens()),
            ["odds"] => Ok(IndexSet::odds()),
            ["mod", m, r] => {
                let m = num(m)?;
                if m == 0 {
                    return Err(bad());
                }
                Ok(IndexSet::residue(m, num(r)?))
            }
            ["powers", p] => {
                let p = num(p)?;
                if p < 2 {
                    return Err(bad());
                }
                Ok(IndexSet::powers(p))
            }
            ["geom", sc, b, sh, fr] => {
                let (sc, b) = (num(sc)?, num(b)?);
                if sc == 0 || b < 2 {
                    return Err(bad());
                }
                Ok(IndexSet::Geometric { scale: sc, base: b, shift: num(sh)?, from: num(fr)? as u32 })
            }
            ["explicit", list] => {
                let items: Result<Vec<u64>, _> =
                    list.split(',').filter(|t| !t.trim().is_empty()).map(num).collect();
                let items = items?;
                if items.contains(&0) {
                    return Err(bad());
                }
                Ok(IndexSet::explicit(items))
            }
            _ => Err(bad()),
        }
    }
}

/// `{coef * e_k : k in indices}`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BasisFamily {
    pub coef: Coord,
    pub indices: IndexSet,
}

impl BasisFamily {
    pub fn new(coef: Coord, indices: IndexSet) -> Result<Self, HypothesisError> {
        if coef.value.is_zero() {
            return Err(HypothesisError::Invalid("basis family with zero scale".into()));
        }
        Ok(BasisFamily { coef, indices })
    }

    pub fn member(&self, k: u64) -> Point {
        Point::basis(k, self.coef.clone())
    }

    pub fn contains(&self, p: &Point) -> bool {
        match p.as_vec().and_then(|v| v.as_basis()) {
            Some((k, c)) => *c == self.coef && self.indices.contains(k),
            None => false,
        }
    }

    fn iter(&self) -> PointIter {
        let coef = self.coef.clone();
        Box::new(self.indices.iter().map(move |k| Point::basis(k, coef.clone())))
    }

    fn describe(&self) -> String {
        format!("basis scale={} indices={}", self.coef, self.indices)
    }
}

/// Structured infinite (or index-described) part of a support.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Family {
    Lattice(Lattice),
    Powers(PowerSeq),
    Basis(BasisFamily),
}

impl Family {
    pub fn contains(&self, p: &Point) -> bool {
        match self {
            Family::Lattice(l) => l.contains(p),
            Family::Powers(s) => s.contains(p),
            Family::Basis(b) => b.contains(p),
        }
    }

    pub fn iter(&self) -> PointIter {
        match self {
            Family::Lattice(l) => l.iter(),
            Family::Powers(s) => s.iter(),
            Family::Basis(b) => b.iter(),
        }
    }

    pub fn is_infinite(&self) -> bool {
        match self {
            Family::Lattice(_) | Family::Powers(_) => true,
            Family::Basis(b) => b.indices.is_infinite(),
        }
    }

    fn intersect(&self, other: &Family) -> Option<(Vec<Point>, Vec<Family>)> {
        use Family::*;
        let none = || Some((Vec::new(), Vec::new()));
        match (self, other) {
            (Lattice(a), Lattice(b)) => Some((Vec::new(), a.intersect(b).map(Lattice).into_iter().collect())),
            (Lattice(l), Powers(s)) | (Powers(s), Lattice(l)) => {
                let (pts, fams) = s.intersect_lattice(l);
                Some((pts, fams.into_iter().map(Powers).collect()))
            }
            (Powers(a), Powers(b)) => Some((Vec::new(), a.intersect(b)?.into_iter().map(Powers).collect())),
            (Basis(a), Basis(b)) if a.coef == b.coef => {
                let fams = a.indices.intersect(&b.indices)?;
                Some((
                    Vec::new(),
                    fams.into_iter().map(|indices| Basis(BasisFamily { coef: a.coef.clone(), indices })).collect(),
                ))
            }
            _ => none(),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Lattice(l) => write!(f, "{}", l.describe()),
            Family::Powers(s) => write!(f, "{}", s.describe()),
            Family::Basis(b) => write!(f, "{}", b.describe()),
        }
    }
}

/// A finite point set together with structured families.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Support {
    finite: BTreeSet<Point>,
    families: Vec<Family>,
}

impl Support {
    pub fn empty() -> Self {
        Support::default()
    }

    pub fn from_points(points: impl IntoIterator<Item = Point>) -> Self {
        Support { finite: points.into_iter().collect(), families: Vec::new() }
    }

    /// Normalizes: finite index families become points, empty families vanish.
    pub fn new(points: impl IntoIterator<Item = Point>, families: impl IntoIterator<Item = Family>) -> Self {
        let mut s = Support::from_points(points);
        for f in families {
            s.add_family(f);
        }
        s
    }

    fn add_family(&mut self, f: Family) {
        if !f.is_infinite() {
            self.finite.extend(f.iter());
            return;
        }
        if !self.families.contains(&f) {
            self.families.push(f);
        }
    }

    pub fn finite_part(&self) -> &BTreeSet<Point> {
        &self.finite
    }

    pub fn families(&self) -> &[Family] {
        &self.families
    }

    pub fn is_finite_set(&self) -> bool {
        self.families.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.finite.is_empty() && self.families.is_empty()
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.finite.contains(p) || self.families.iter().any(|f| f.contains(p))
    }

    /// Canonical, duplicate-free enumeration.
    pub fn iter(&self) -> PointIter {
        let finite: Vec<Point> = self.finite.iter().cloned().collect();
        let mut streams: Vec<PointIter> = vec![Box::new(finite.into_iter())];
        streams.extend(self.families.iter().map(Family::iter));
        Box::new(streams.into_iter().kmerge().dedup())
    }

    pub fn enumerate(&self, n: usize) -> Vec<Point> {
        self.iter().take(n).collect()
    }

    pub fn union(&self, other: &Support) -> Support {
        let mut s = self.clone();
        s.finite.extend(other.finite.iter().cloned());
        for f in &other.families {
            s.add_family(f.clone());
        }
        s
    }

    pub fn intersect(&self, other: &Support) -> Result<Support, HypothesisError> {
        let mut finite: BTreeSet<Point> = self.finite.iter().filter(|p| other.contains(p)).cloned().collect();
        finite.extend(other.finite.iter().filter(|p| self.contains(p)).cloned());
        let mut out = Support { finite, families: Vec::new() };
        for a in &self.families {
            for b in &other.families {
                let (pts, fams) = a.intersect(b).ok_or_else(|| {
                    HypothesisError::UndecidableIntersection(format!("{a} with {b}"))
                })?;
                out.finite.extend(pts);
                for f in fams {
                    out.add_family(f);
                }
            }
        }
        Ok(out)
    }

    /// Covering number with centres drawn from the set itself plus `centers`.
    /// Exact for finite sets; for infinite sets either a separation witness or
    /// `Finite(n)` with `n` an upper bound.
    pub fn cover_number(
        &self,
        metric: &Metric,
        radius: &Scalar,
        centers: &[Point],
    ) -> Result<CoverResult, HypothesisError> {
        let centers: Vec<Point> = centers.iter().filter(|c| metric.accepts(c)).cloned().collect();
        let finite: Vec<Point> = self.finite.iter().cloned().collect();
        let exact = |targets: &[Point]| -> Result<usize, HypothesisError> {
            let mut cands = targets.to_vec();
            cands.extend(finite.iter().cloned());
            cands.extend(centers.iter().cloned());
            Ok(covering_number_exact(metric, targets, radius, &cands)?)
        };
        if self.families.is_empty() {
            return Ok(CoverResult::Finite(exact(&finite)?));
        }
        match metric {
            Metric::Discrete => self.cover_discrete(radius, &finite),
            Metric::Abs => {
                for f in &self.families {
                    match f {
                        Family::Lattice(l) if l.kind == LatticeKind::Real => {
                            return Ok(CoverResult::Infinite(lattice_witness(l, radius)));
                        }
                        Family::Powers(s) => return Ok(CoverResult::Infinite(powers_witness(s, radius))),
                        other => return Err(mismatch(metric, other)),
                    }
                }
                unreachable!("families nonempty")
            }
            Metric::L2 | Metric::WeightedL2 { .. } => self.cover_basis(metric, radius, &finite, &centers, exact),
        }
    }

    fn cover_discrete(&self, radius: &Scalar, finite: &[Point]) -> Result<CoverResult, HypothesisError> {
        if *radius >= Scalar::one() {
            return Ok(CoverResult::Finite(1));
        }
        let f = &self.families[0];
        let mode = if Scalar::one() > radius + radius { WitnessMode::Packing } else { WitnessMode::Internal };
        let _ = finite;
        Ok(CoverResult::Infinite(SeparationWitness {
            family: f.to_string(),
            separation_sq: Surd::rational(Scalar::one()),
            radius: radius.clone(),
            mode,
            sample: f.iter().take(WITNESS_SAMPLE).collect(),
        }))
    }

    fn cover_basis(
        &self,
        metric: &Metric,
        radius: &Scalar,
        finite: &[Point],
        centers: &[Point],
        exact: impl Fn(&[Point]) -> Result<usize, HypothesisError>,
    ) -> Result<CoverResult, HypothesisError> {
        let r_sq = radius.square();
        // split every family into constant-weight parts
        let mut parts: Vec<(BasisFamily, Scalar)> = Vec::new();
        for f in &self.families {
            let Family::Basis(b) = f else { return Err(mismatch(metric, f)) };
            let pieces = match metric {
                Metric::WeightedL2 { .. } => {
                    let mut v = Vec::new();
                    for parity in [IndexSet::evens(), IndexSet::odds()] {
                        let Some(sets) = b.indices.intersect(&parity) else {
                            return Ok(CoverResult::UnknownAtBudget { lower_bound: 0, budget: 0 });
                        };
                        v.extend(sets.into_iter().map(|indices| BasisFamily { coef: b.coef.clone(), indices }));
                    }
                    v
                }
                _ => vec![b.clone()],
            };
            for p in pieces {
                let Some(k) = p.indices.iter().next() else { continue };
                let norm = metric.weight(k) * p.coef.square();
                parts.push((p, norm));
            }
        }
        // candidate norms: finite points, extra centres, one member per part
        let origin = Point::origin();
        let mut absorbers: Vec<(Scalar, Point)> = Vec::new();
        for y in finite.iter().chain(centers) {
            let n = sq_dist(metric, &origin, y)?;
            if n.root2.is_zero() {
                absorbers.push((n.rat, y.clone()));
            }
        }
        for (p, norm) in &parts {
            if let Some(k) = p.indices.iter().next() {
                absorbers.push((norm.clone(), p.member(k)));
            }
        }
        absorbers.sort_by(|a, b| a.0.cmp(&b.0));
        let mut extra_balls = 0;
        let mut exceptions: Vec<Point> = Vec::new();
        for (p, norm) in &parts {
            if !p.indices.is_infinite() {
                exceptions.extend(p.indices.iter().map(|k| p.member(k)));
                continue;
            }
            let sep = norm + norm;
            if sep <= r_sq {
                extra_balls += 1;
                continue;
            }
            let absorber = absorbers.iter().find(|(n, y)| (n + norm) <= r_sq && !p.contains(y));
            match absorber {
                Some((_, y)) => {
                    extra_balls += 1;
                    let own = y.as_vec().map(|v| v.entries().to_vec()).unwrap_or_default();
                    exceptions.extend(own.iter().filter(|(k, _)| p.indices.contains(*k)).map(|(k, _)| p.member(*k)));
                }
                None => {
                    let mode = if sep > &r_sq * &Scalar::int(4) { WitnessMode::Packing } else { WitnessMode::Internal };
                    return Ok(CoverResult::Infinite(SeparationWitness {
                        family: BasisFamily::describe(p),
                        separation_sq: Surd::rational(sep),
                        radius: radius.clone(),
                        mode,
                        sample: p.iter().take(WITNESS_SAMPLE).collect(),
                    }));
                }
            }
        }
        let mut targets = finite.to_vec();
        targets.extend(exceptions);
        Ok(CoverResult::Finite(exact(&targets)? + extra_balls))
    }
}

fn mismatch(metric: &Metric, f: &Family) -> HypothesisError {
    HypothesisError::Metric(crate::metric_core::MetricError::VariantMismatch {
        metric: metric.to_string(),
        point: f.to_string(),
    })
}

/// A sub-lattice whose spacing exceeds `2 * radius`.
fn lattice_witness(l: &Lattice, radius: &Scalar) -> SeparationWitness {
    let twice = radius + radius;
    let mut k = BigInt::one();
    while Scalar::int(&l.step * &k) <= twice {
        k += 1;
    }
    let step = &l.step * &k;
    let sub = Lattice { kind: l.kind, offset: l.offset.clone(), step: step.clone(), ray: l.ray };
    SeparationWitness {
        family: sub.describe(),
        separation_sq: Surd::rational(Scalar::int(step).square()),
        radius: radius.clone(),
        mode: WitnessMode::Packing,
        sample: sub.iter().take(WITNESS_SAMPLE).collect(),
    }
}

/// A tail of the power family whose consecutive gaps exceed `2 * radius`.
fn powers_witness(s: &PowerSeq, radius: &Scalar) -> SeparationWitness {
    let twice = radius + radius;
    let mut n = s.from;
    let gap = |n: u32| Scalar::int(s.term(n + 1) - s.term(n));
    while gap(n) <= twice {
        n += 1;
    }
    let tail = PowerSeq { from: n, ..s.clone() };
    let g = gap(n);
    SeparationWitness {
        family: tail.describe(),
        separation_sq: Surd::rational(g.square()),
        radius: radius.clone(),
        mode: WitnessMode::Packing,
        sample: tail.iter().take(WITNESS_SAMPLE).collect(),
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}", self.finite.iter().join(", "))?;
        for fam in &self.families {
            write!(f, "; {fam}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(v: i64) -> Point {
        Point::real(v)
    }

    fn lattice(offset: i64, step: i64) -> Family {
        Family::Lattice(Lattice::new(LatticeKind::Real, offset.into(), step.into(), false).unwrap())
    }

    #[test]
    fn lattice_enumeration_is_canonical() {
        let s = Support::new([], [lattice(0, 6)]);
        assert_eq!(s.enumerate(5), vec![real(0), real(6), real(-6), real(12), real(-12)]);
        let s = Support::new([], [lattice(1, 3)]);
        assert_eq!(s.enumerate(4), vec![real(1), real(-2), real(4), real(-5)]);
        let ray = Family::Lattice(Lattice::new(LatticeKind::Real, (-5).into(), 2.into(), true).unwrap());
        let s = Support::new([], [ray]);
        assert_eq!(s.enumerate(6), vec![real(1), real(-1), real(3), real(-3), real(5), real(-5)]);
    }

    #[test]
    fn lattice_intersection() {
        let evens = Support::new([], [lattice(0, 2)]);
        let thirds = Support::new([], [lattice(0, 3)]);
        let both = evens.intersect(&thirds).unwrap();
        assert_eq!(both.enumerate(3), vec![real(0), real(6), real(-6)]);
        let odd = Support::new([], [lattice(1, 2)]);
        assert!(evens.intersect(&odd).unwrap().is_empty());
        let ray = Family::Lattice(Lattice::new(LatticeKind::Real, 7.into(), 1.into(), true).unwrap());
        let s = evens.intersect(&Support::new([], [ray])).unwrap();
        assert_eq!(s.enumerate(3), vec![real(8), real(10), real(12)]);
    }

    #[test]
    fn power_family_and_lattice() {
        let p = PowerSeq::new(1.into(), 3.into(), (-1).into(), 1).unwrap();
        let s = Support::new([], [Family::Powers(p.clone()), Family::Powers(PowerSeq::new(1.into(), 3.into(), 0.into(), 1).unwrap())]);
        assert_eq!(s.enumerate(6), vec![real(2), real(3), real(8), real(9), real(26), real(27)]);
        // 3^n - 1 divisible by 4 exactly for even n
        let four = Support::new([], [lattice(0, 4)]);
        let t = Support::new([], [Family::Powers(p)]).intersect(&four).unwrap();
        assert_eq!(t.enumerate(3), vec![real(8), real(80), real(728)]);
    }

    #[test]
    fn index_set_algebra() {
        let ev = IndexSet::evens();
        let p4 = IndexSet::powers(4);
        let p8 = IndexSet::powers(8);
        assert_eq!(ev.intersect(&IndexSet::odds()).unwrap(), vec![]);
        let both = p4.intersect(&p8).unwrap();
        assert_eq!(both[0].iter().take(2).collect::<Vec<_>>(), [64, 4096]);
        let odd_pow2 = IndexSet::powers(2).intersect(&IndexSet::odds()).unwrap();
        assert!(odd_pow2.iter().all(|s| s.iter().next().is_none()));
        let geo = IndexSet::Geometric { scale: 3, base: 2, shift: 0, from: 0 };
        let ev_geo = geo.intersect(&ev).unwrap();
        let got: Vec<u64> = ev_geo.iter().flat_map(|s| s.iter().take(3).collect::<Vec<_>>()).collect();
        assert_eq!(got, [6, 12, 24]);
        for s in ["all", "evens", "odds", "powers:3", "explicit:1,4", "mod:3:2", "geom:2:3:1:1"] {
            assert_eq!(s.parse::<IndexSet>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn finite_index_families_become_points() {
        let b = BasisFamily::new(Coord::plain(Scalar::one()), IndexSet::explicit([2, 5])).unwrap();
        let s = Support::new([], [Family::Basis(b)]);
        assert!(s.is_finite_set());
        assert_eq!(s.finite_part().len(), 2);
    }

    #[test]
    fn cover_of_lattice_is_infinite_with_valid_witness() {
        let s = Support::new([], [lattice(0, 1)]);
        let r = Scalar::new(3, 2);
        let CoverResult::Infinite(w) = s.cover_number(&Metric::Abs, &r, &[]).unwrap() else { panic!() };
        assert!(w.verify(&Metric::Abs).unwrap());
    }

    #[test]
    fn basis_cover_cases() {
        let eps_p = Scalar::new(3, 5);
        let a = Family::Basis(BasisFamily::new(Coord::sqrt2half(eps_p.clone()), IndexSet::all()).unwrap());
        let s = Support::new([], [a]);
        // pairwise eps' apart: one closed ball of radius eps' covers the family
        assert_eq!(s.cover_number(&Metric::L2, &eps_p, &[]).unwrap(), CoverResult::Finite(1));
        let CoverResult::Infinite(w) = s.cover_number(&Metric::L2, &Scalar::new(3, 10), &[]).unwrap() else { panic!() };
        assert_eq!(w.mode, WitnessMode::Internal);
        assert!(w.verify(&Metric::L2).unwrap());
        // the origin as a centre absorbs the family at radius 1/2
        let r = Scalar::new(1, 2);
        assert!(s.cover_number(&Metric::L2, &r, &[]).unwrap().is_infinite());
        assert_eq!(s.cover_number(&Metric::L2, &r, &[Point::origin()]).unwrap(), CoverResult::Finite(1));
    }

    #[test]
    fn weighted_split_by_parity() {
        let w = Metric::WeightedL2 { even: Scalar::new(1, 4), odd: Scalar::one() };
        let f = Family::Basis(BasisFamily::new(Coord::sqrt2half(Scalar::one()), IndexSet::all()).unwrap());
        let s = Support::new([], [f]);
        // odd members are 1 apart, even members 1/2 apart
        let CoverResult::Infinite(wit) = s.cover_number(&w, &Scalar::new(3, 5), &[]).unwrap() else { panic!() };
        assert!(wit.family.contains("odds"));
    }
}
