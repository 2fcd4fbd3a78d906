use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::MetricError;

/// Exact rational number in canonical reduced form.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Scalar(BigRational);

impl Scalar {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        Self::try_new(num, den).expect("zero denominator")
    }

    pub fn try_new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self, MetricError> {
        let den = den.into();
        if den.is_zero() {
            return Err(MetricError::Parse("zero denominator".into()));
        }
        Ok(Scalar(BigRational::new(num.into(), den)))
    }

    pub fn int(n: impl Into<BigInt>) -> Self {
        Scalar(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Scalar(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar(BigRational::one())
    }

    pub fn from_ratio(r: BigRational) -> Self {
        Scalar(r)
    }

    pub fn ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn to_integer(&self) -> Option<BigInt> {
        self.0.is_integer().then(|| self.0.to_integer())
    }

    pub fn abs(&self) -> Scalar {
        Scalar(self.0.abs())
    }

    pub fn square(&self) -> Scalar {
        Scalar(&self.0 * &self.0)
    }

    pub fn signum(&self) -> Ordering {
        self.0.cmp(&BigRational::zero())
    }

    /// `2^(-k)` for `k >= 0`.
    pub fn inv_pow2(k: u32) -> Scalar {
        Scalar::new(1, BigInt::one() << k)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Scalar {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || MetricError::Parse(format!("bad rational `{s}`"));
        match s.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(bad());
                }
                Ok(Scalar(BigRational::new(n, d)))
            }
            None => {
                let n: BigInt = s.parse().map_err(|_| bad())?;
                Ok(Scalar::int(n))
            }
        }
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::int(n)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl $tr for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                Scalar($tr::$m(self.0, rhs.0))
            }
        }
        impl<'a> $tr<&'a Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &'a Scalar) -> Scalar {
                Scalar($tr::$m(&self.0, &rhs.0))
            }
        }
        impl<'a> $tr<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &'a Scalar) -> Scalar {
                Scalar($tr::$m(self.0, &rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-self.0)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-&self.0)
    }
}

/// Element `rat + root2 * sqrt(2)` of the field Q(sqrt 2). Squared distances
/// between points carrying `sqrt(2)/2` coordinates live here.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Surd {
    pub rat: Scalar,
    pub root2: Scalar,
}

impl Surd {
    pub fn rational(rat: Scalar) -> Self {
        Surd { rat, root2: Scalar::zero() }
    }

    pub fn zero() -> Self {
        Surd::rational(Scalar::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.rat.is_zero() && self.root2.is_zero()
    }

    pub fn signum(&self) -> Ordering {
        let a = self.rat.signum();
        let b = self.root2.signum();
        match (a, b) {
            (_, Ordering::Equal) => a,
            (Ordering::Equal, _) => b,
            _ if a == b => a,
            _ => {
                // opposite signs: compare a^2 with 2 b^2
                let lhs = self.rat.square();
                let rhs = self.root2.square() * Scalar::int(2);
                match lhs.cmp(&rhs) {
                    Ordering::Greater => a,
                    Ordering::Less => b,
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    pub fn square(&self) -> Surd {
        self * self
    }

    pub fn scale(&self, k: &Scalar) -> Surd {
        Surd { rat: &self.rat * k, root2: &self.root2 * k }
    }
}

impl PartialOrd for Surd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Surd {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum()
    }
}

impl<'a> Add<&'a Surd> for &'a Surd {
    type Output = Surd;
    fn add(self, rhs: &'a Surd) -> Surd {
        Surd { rat: &self.rat + &rhs.rat, root2: &self.root2 + &rhs.root2 }
    }
}

impl<'a> Sub<&'a Surd> for &'a Surd {
    type Output = Surd;
    fn sub(self, rhs: &'a Surd) -> Surd {
        Surd { rat: &self.rat - &rhs.rat, root2: &self.root2 - &rhs.root2 }
    }
}

impl<'a> Mul<&'a Surd> for &'a Surd {
    type Output = Surd;
    fn mul(self, rhs: &'a Surd) -> Surd {
        let two = Scalar::int(2);
        Surd {
            rat: &self.rat * &rhs.rat + &(&self.root2 * &rhs.root2) * &two,
            root2: &self.rat * &rhs.root2 + &self.root2 * &rhs.rat,
        }
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.root2.is_zero() {
            write!(f, "{}", self.rat)
        } else {
            write!(f, "{}+{}*sqrt2", self.rat, self.root2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_are_canonical() {
        let s: Scalar = "6/4".parse().unwrap();
        assert_eq!(s.to_string(), "3/2");
        let t: Scalar = "-3".parse().unwrap();
        assert_eq!(t.to_string(), "-3");
        assert!("1/0".parse::<Scalar>().is_err());
        assert!("x".parse::<Scalar>().is_err());
    }

    #[test]
    fn surd_sign_matches_float() {
        let cases = [(1, 1), (-1, 1), (1, -1), (3, -2), (-3, 2), (0, 0), (2, 0), (0, -5)];
        for (a, b) in cases {
            let s = Surd { rat: Scalar::int(a), root2: Scalar::int(b) };
            let f = a as f64 + b as f64 * 2f64.sqrt();
            let expect = f.partial_cmp(&0.0).unwrap();
            assert_eq!(s.signum(), expect, "{a} + {b} sqrt2");
        }
    }

    #[test]
    fn surd_product() {
        let h = Surd { rat: Scalar::zero(), root2: Scalar::new(1, 2) };
        assert_eq!(h.square(), Surd::rational(Scalar::new(1, 2)));
    }
}
