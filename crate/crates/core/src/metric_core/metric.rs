use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use super::{MetricError, Point, Scalar, Surd};

/// Distance kernel on the example space.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Metric {
    /// 0 on equal points, 1 otherwise.
    Discrete,
    /// `|x - y|` on reals.
    Abs,
    /// Standard sequence-space norm, compared in squared form.
    L2,
    /// `sum_i w_i (x_i - y_i)^2` with one weight for even and one for odd indices.
    WeightedL2 { even: Scalar, odd: Scalar },
}

impl Metric {
    pub fn weight(&self, index: u64) -> Scalar {
        match self {
            Metric::WeightedL2 { even, odd } => {
                if index % 2 == 0 {
                    even.clone()
                } else {
                    odd.clone()
                }
            }
            _ => Scalar::one(),
        }
    }

    pub fn accepts(&self, p: &Point) -> bool {
        match self {
            Metric::Discrete => true,
            Metric::Abs => matches!(p, Point::Real(_)),
            Metric::L2 | Metric::WeightedL2 { .. } => matches!(p, Point::Vec(_)),
        }
    }

    fn check(&self, p: &Point) -> Result<(), MetricError> {
        if self.accepts(p) {
            Ok(())
        } else {
            Err(MetricError::VariantMismatch { metric: self.to_string(), point: p.to_string() })
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Discrete => write!(f, "discrete"),
            Metric::Abs => write!(f, "abs"),
            Metric::L2 => write!(f, "l2"),
            Metric::WeightedL2 { even, odd } => write!(f, "wl2 even={even} odd={odd}"),
        }
    }
}

impl FromStr for Metric {
    type Err = MetricError;

    /// Parses `metric discrete | abs | l2 | wl2 even=<q> odd=<q>`; the leading
    /// `metric` keyword is optional.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut words = s.split_whitespace().peekable();
        if words.peek() == Some(&"metric") {
            words.next();
        }
        let bad = || MetricError::Parse(format!("bad metric header `{}`", s.trim()));
        match words.next() {
            Some("discrete") => Ok(Metric::Discrete),
            Some("abs") => Ok(Metric::Abs),
            Some("l2") => Ok(Metric::L2),
            Some("wl2") => {
                let (mut even, mut odd) = (None, None);
                for w in words.by_ref() {
                    match w.split_once('=') {
                        Some(("even", v)) => even = Some(v.parse::<Scalar>()?),
                        Some(("odd", v)) => odd = Some(v.parse::<Scalar>()?),
                        _ => return Err(bad()),
                    }
                }
                let (even, odd) = (even.ok_or_else(bad)?, odd.ok_or_else(bad)?);
                if !even.is_positive() || !odd.is_positive() {
                    return Err(MetricError::Parse("weights must be positive".into()));
                }
                return Ok(Metric::WeightedL2 { even, odd });
            }
            _ => Err(bad()),
        }
        .and_then(|m| if words.next().is_some() { Err(bad()) } else { Ok(m) })
    }
}

/// Exact squared distance.
pub fn sq_dist(metric: &Metric, p: &Point, q: &Point) -> Result<Surd, MetricError> {
    metric.check(p)?;
    metric.check(q)?;
    match (metric, p, q) {
        (Metric::Discrete, _, _) => Ok(Surd::rational(if p == q { Scalar::zero() } else { Scalar::one() })),
        (Metric::Abs, Point::Real(a), Point::Real(b)) => Ok(Surd::rational((a - b).square())),
        (_, Point::Vec(a), Point::Vec(b)) => {
            let mut total = Surd::zero();
            let (xa, xb) = (a.entries(), b.entries());
            let (mut i, mut j) = (0, 0);
            while i < xa.len() || j < xb.len() {
                let (idx, term) = match (xa.get(i), xb.get(j)) {
                    (Some((ia, ca)), Some((ib, cb))) if ia == ib => {
                        i += 1;
                        j += 1;
                        (*ia, (&ca.as_surd() - &cb.as_surd()).square())
                    }
                    (Some((ia, ca)), Some((ib, _))) if ia < ib => {
                        i += 1;
                        (*ia, Surd::rational(ca.square()))
                    }
                    (Some(_), Some((ib, cb))) => {
                        j += 1;
                        (*ib, Surd::rational(cb.square()))
                    }
                    (Some((ia, ca)), None) => {
                        i += 1;
                        (*ia, Surd::rational(ca.square()))
                    }
                    (None, Some((ib, cb))) => {
                        j += 1;
                        (*ib, Surd::rational(cb.square()))
                    }
                    (None, None) => unreachable!(),
                };
                let term = match metric {
                    Metric::WeightedL2 { .. } => term.scale(&metric.weight(idx)),
                    _ => term,
                };
                total = &total + &term;
            }
            Ok(total)
        }
        _ => unreachable!("variant checked above"),
    }
}

/// Compares `rho(p, q)` with `radius`.
pub fn dist_cmp(metric: &Metric, p: &Point, q: &Point, radius: &Scalar) -> Result<Ordering, MetricError> {
    if radius.is_negative() {
        return Err(MetricError::NegativeRadius(radius.to_string()));
    }
    if let (Metric::Abs, Point::Real(a), Point::Real(b)) = (metric, p, q) {
        return Ok((a - b).abs().cmp(radius));
    }
    Ok(sq_dist(metric, p, q)?.cmp(&Surd::rational(radius.square())))
}

/// Closed-ball membership `rho(center, p) <= radius`.
pub fn in_ball(metric: &Metric, center: &Point, radius: &Scalar, p: &Point) -> Result<bool, MetricError> {
    Ok(dist_cmp(metric, center, p, radius)? != Ordering::Greater)
}

/// Membership in the union of closed balls around `set`; false for an empty set.
pub fn in_set_ball(metric: &Metric, set: &[Point], radius: &Scalar, p: &Point) -> Result<bool, MetricError> {
    for c in set {
        if in_ball(metric, c, radius, p)? {
            return Ok(true);
        }
    }
    metric.check(p)?;
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_core::Coord;

    fn p(s: &str) -> Point {
        s.parse().unwrap()
    }

    #[test]
    fn dist_cmp_examples() {
        let r1 = Scalar::one();
        assert_eq!(dist_cmp(&Metric::Abs, &p("real:0"), &p("real:3"), &r1).unwrap(), Ordering::Greater);
        assert_eq!(
            dist_cmp(&Metric::Discrete, &p("atom:4"), &p("atom:4"), &Scalar::new(1, 2)).unwrap(),
            Ordering::Less
        );
        // a_k = (sqrt2/2) eps' e_k are exactly eps' apart
        let eps_p = Scalar::new(3, 5);
        let a1 = Point::basis(1, Coord::sqrt2half(eps_p.clone()));
        let a2 = Point::basis(2, Coord::sqrt2half(eps_p.clone()));
        assert_eq!(dist_cmp(&Metric::L2, &a1, &a2, &eps_p).unwrap(), Ordering::Equal);
    }

    #[test]
    fn in_ball_examples() {
        assert!(in_ball(&Metric::Abs, &p("real:5"), &Scalar::one(), &p("real:6")).unwrap());
        let eps_p = Scalar::new(1, 2);
        let g = Point::basis(7, Coord::plain(eps_p.clone()));
        assert!(in_ball(&Metric::L2, &Point::origin(), &eps_p, &g).unwrap());
        assert!(!in_ball(&Metric::Discrete, &p("atom:1"), &Scalar::new(1, 2), &p("atom:2")).unwrap());
    }

    #[test]
    fn in_set_ball_examples() {
        let r1 = Scalar::one();
        assert!(in_set_ball(&Metric::Abs, &[p("real:0"), p("real:3")], &r1, &p("real:2")).unwrap());
        assert!(!in_set_ball(&Metric::Abs, &[], &r1, &p("real:0")).unwrap());
        let eps_p = Scalar::new(3, 5);
        let a: Vec<Point> = (1..=4).map(|k| Point::basis(k, Coord::sqrt2half(eps_p.clone()))).collect();
        assert!(in_set_ball(&Metric::L2, &a[..3], &eps_p, &a[3]).unwrap());
    }

    #[test]
    fn variant_mismatch_is_an_error() {
        assert!(matches!(
            dist_cmp(&Metric::Abs, &p("atom:1"), &p("real:1"), &Scalar::one()),
            Err(MetricError::VariantMismatch { .. })
        ));
        assert!(in_set_ball(&Metric::L2, &[], &Scalar::one(), &p("real:1")).is_err());
    }

    #[test]
    fn mixed_coordinates_at_one_index() {
        // u = 2 e_1 and a = (sqrt2/2)(3/10) e_1: squared distance 4 + 9/200 - (3/5) sqrt2
        let u = Point::basis(1, Coord::plain(Scalar::int(2)));
        let a = Point::basis(1, Coord::sqrt2half(Scalar::new(3, 10)));
        let d = sq_dist(&Metric::L2, &u, &a).unwrap();
        assert_eq!(d.rat, Scalar::new(809, 200));
        assert_eq!(d.root2, Scalar::new(-3, 5));
    }

    #[test]
    fn weighted_metric_between_even_basis_points() {
        let w = Metric::WeightedL2 { even: Scalar::new(1, 4), odd: Scalar::one() };
        let c = Scalar::new(1, 2);
        let a = Point::basis(2, Coord::sqrt2half(c.clone()));
        let b = Point::basis(4, Coord::sqrt2half(c.clone()));
        // (1/4 + 1/4) * (1/2)^2 / 2 = 1/16
        assert_eq!(sq_dist(&w, &a, &b).unwrap(), Surd::rational(Scalar::new(1, 16)));
    }

    #[test]
    fn metric_header_round_trip() {
        for s in ["discrete", "abs", "l2", "wl2 even=1/4 odd=1"] {
            let m: Metric = format!("metric {s}").parse().unwrap();
            assert_eq!(m.to_string(), s);
        }
        assert!("metric wl2 even=1/4".parse::<Metric>().is_err());
        assert!("metric cosine".parse::<Metric>().is_err());
    }
}
