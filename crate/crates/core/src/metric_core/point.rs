use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use super::{MetricError, Scalar, Surd};

/// A nonzero sequence coordinate `value`, or `value * sqrt(2)/2` when `half` is set.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Coord {
    pub value: Scalar,
    pub half: bool,
}

impl Coord {
    pub fn plain(value: Scalar) -> Self {
        Coord { value, half: false }
    }

    pub fn sqrt2half(value: Scalar) -> Self {
        Coord { value, half: true }
    }

    pub fn as_surd(&self) -> Surd {
        if self.half {
            Surd { rat: Scalar::zero(), root2: &self.value / &Scalar::int(2) }
        } else {
            Surd::rational(self.value.clone())
        }
    }

    /// Exact square of the coordinate.
    pub fn square(&self) -> Scalar {
        let sq = self.value.square();
        if self.half {
            sq / Scalar::int(2)
        } else {
            sq
        }
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.half {
            write!(f, "{}:sqrt2half", self.value)
        } else {
            write!(f, "{}", self.value)
        }
    }
}

/// Finitely supported point of the sequence space; indices are 1-based and
/// strictly increasing, and zero coordinates are never stored.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct SparseVec {
    entries: Vec<(u64, Coord)>,
}

impl SparseVec {
    pub fn origin() -> Self {
        SparseVec { entries: Vec::new() }
    }

    pub fn new(mut entries: Vec<(u64, Coord)>) -> Result<Self, MetricError> {
        entries.retain(|(_, c)| !c.value.is_zero());
        entries.sort_by_key(|(i, _)| *i);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(MetricError::Parse(format!("duplicate index {}", w[0].0)));
            }
        }
        if entries.iter().any(|(i, _)| *i == 0) {
            return Err(MetricError::Parse("sequence indices start at 1".into()));
        }
        Ok(SparseVec { entries })
    }

    pub fn basis(index: u64, coord: Coord) -> Self {
        assert!(index >= 1, "sequence indices start at 1");
        if coord.value.is_zero() {
            return SparseVec::origin();
        }
        SparseVec { entries: vec![(index, coord)] }
    }

    pub fn entries(&self) -> &[(u64, Coord)] {
        &self.entries
    }

    pub fn max_index(&self) -> u64 {
        self.entries.last().map(|(i, _)| *i).unwrap_or(0)
    }

    pub fn get(&self, index: u64) -> Option<&Coord> {
        self.entries
            .binary_search_by_key(&index, |(i, _)| *i)
            .ok()
            .map(|pos| &self.entries[pos].1)
    }

    /// The single basis coordinate, if the point is a multiple of some `e_k`.
    pub fn as_basis(&self) -> Option<(u64, &Coord)> {
        match self.entries.as_slice() {
            [(i, c)] => Some((*i, c)),
            _ => None,
        }
    }
}

/// An instance of the example space.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Point {
    Atom(i64),
    Real(Scalar),
    Vec(SparseVec),
}

impl Point {
    pub fn real(v: impl Into<Scalar>) -> Self {
        Point::Real(v.into())
    }

    pub fn origin() -> Self {
        Point::Vec(SparseVec::origin())
    }

    pub fn basis(index: u64, coord: Coord) -> Self {
        Point::Vec(SparseVec::basis(index, coord))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Point::Atom(_) => "atom",
            Point::Real(_) => "real",
            Point::Vec(_) => "svec",
        }
    }

    pub fn as_real(&self) -> Option<&Scalar> {
        match self {
            Point::Real(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_vec(&self) -> Option<&SparseVec> {
        match self {
            Point::Vec(v) => Some(v),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Point::Atom(_) => 0,
            Point::Real(_) => 1,
            Point::Vec(_) => 2,
        }
    }
}

fn cmp_vecs(a: &SparseVec, b: &SparseVec) -> Ordering {
    a.max_index().cmp(&b.max_index()).then_with(|| {
        let (mut i, mut j) = (0, 0);
        let (xa, xb) = (a.entries(), b.entries());
        loop {
            match (xa.get(i), xb.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some((ia, ca)), Some((ib, cb))) if ia == ib => {
                    let o = ca.as_surd().cmp(&cb.as_surd());
                    if o != Ordering::Equal {
                        return o;
                    }
                    i += 1;
                    j += 1;
                }
                (Some((ia, ca)), Some((ib, _))) if ia < ib => return ca.as_surd().signum(),
                (Some(_), Some((_, cb))) => return cb.as_surd().signum().reverse(),
                (Some((_, ca)), None) => return ca.as_surd().signum(),
                (None, Some((_, cb))) => return cb.as_surd().signum().reverse(),
            }
        }
    })
}

/// Canonical enumeration order: atoms by id; reals by absolute value with
/// the positive sign first; sequence points by largest index, then
/// coordinate-wise.
impl Ord for Point {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Point::Atom(a), Point::Atom(b)) => a.cmp(b),
            (Point::Real(a), Point::Real(b)) => a
                .abs()
                .cmp(&b.abs())
                .then_with(|| b.signum().cmp(&a.signum())),
            (Point::Vec(a), Point::Vec(b)) => cmp_vecs(a, b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Atom(id) => write!(f, "atom:{id}"),
            Point::Real(v) => write!(f, "real:{v}"),
            Point::Vec(v) => {
                write!(f, "svec:")?;
                for (n, (i, c)) in v.entries().iter().enumerate() {
                    if n > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{i}={c}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for Point {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = |why: &str| MetricError::Parse(format!("bad point `{s}`: {why}"));
        let Some((kind, body)) = s.split_once(':') else {
            return s.parse().map(Point::Real).map_err(|_| bad("missing kind prefix"));
        };
        match kind {
            "atom" => body.trim().parse().map(Point::Atom).map_err(|_| bad("atom id")),
            "real" => Ok(Point::Real(body.parse()?)),
            "svec" => {
                let mut entries = Vec::new();
                for part in body.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                    let (idx, rest) = part.split_once('=').ok_or_else(|| bad("expected idx=value"))?;
                    let idx: u64 = idx.trim().parse().map_err(|_| bad("index"))?;
                    let (val, half) = match rest.split_once(':') {
                        Some((v, "sqrt2half")) => (v, true),
                        Some(_) => return Err(bad("unknown coordinate suffix")),
                        None => (rest, false),
                    };
                    entries.push((idx, Coord { value: val.parse()?, half }));
                }
                Ok(Point::Vec(SparseVec::new(entries)?))
            }
            _ => Err(bad("unknown kind")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Point {
        s.parse().unwrap()
    }

    #[test]
    fn text_round_trip() {
        for s in ["atom:-4", "real:3/2", "svec:", "svec:1=1/2,4=3:sqrt2half"] {
            assert_eq!(p(s).to_string(), s);
        }
        assert_eq!(p("svec:3=1,1=2").to_string(), "svec:1=2,3=1");
        assert!("svec:0=1".parse::<Point>().is_err());
        assert!("svec:1=1,1=2".parse::<Point>().is_err());
        assert!("vec:1".parse::<Point>().is_err());
    }

    #[test]
    fn zero_coordinates_are_dropped() {
        assert_eq!(p("svec:2=0"), Point::origin());
    }

    #[test]
    fn real_order_is_abs_then_positive_first() {
        let mut v = vec![p("real:-6"), p("real:6"), p("real:0"), p("real:-1/2")];
        v.sort();
        let shown: Vec<String> = v.iter().map(ToString::to_string).collect();
        assert_eq!(shown, ["real:0", "real:-1/2", "real:6", "real:-6"]);
    }

    #[test]
    fn vec_order_by_max_index_then_coordinates() {
        let mut v = vec![p("svec:2=1"), p("svec:1=5"), p("svec:"), p("svec:2=1/2:sqrt2half"), p("svec:1=1,2=1")];
        v.sort();
        let shown: Vec<String> = v.iter().map(ToString::to_string).collect();
        assert_eq!(
            shown,
            ["svec:", "svec:1=5", "svec:2=1/2:sqrt2half", "svec:2=1", "svec:1=1,2=1"]
        );
    }
}
