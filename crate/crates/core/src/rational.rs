//! Exact rational numbers.
//!
//! Every value, price and payoff in this crate is a [`Rational`]. Buyer
//! indifference is the engine of the whole model (marginal prices make the
//! buyer exactly indifferent between a bundle and its drop-one subsets), so
//! ties must be genuine equalities.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ParseRationalError;

/// Arbitrary-precision rational in canonical reduced form.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// `num / den`, reduced. Panics if `den == 0`.
    pub fn new(num: i64, den: i64) -> Self {
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Lossy conversion, for display and plotting only.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Number of decimal digits needed to write the value exactly, or `None`
    /// when the denominator has a prime factor other than 2 and 5.
    fn decimal_places(&self) -> Option<u32> {
        let mut den = self.0.denom().clone();
        let two = BigInt::from(2);
        let five = BigInt::from(5);
        let (mut twos, mut fives) = (0u32, 0u32);
        while den.is_even() {
            den /= &two;
            twos += 1;
        }
        while (&den % &five).is_zero() {
            den /= &five;
            fives += 1;
        }
        den.is_one().then_some(twos.max(fives))
    }
}

impl fmt::Display for Rational {
    /// Finite decimals print as plain decimal strings (`2.703`), everything
    /// else as `num/den` (`11/6`). Both forms parse back exactly.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.decimal_places() {
            Some(0) => write!(f, "{}", self.0.numer()),
            Some(places) => {
                let scale = BigInt::from(10).pow(places);
                let scaled = (self.0.numer() * &scale) / self.0.denom();
                let sign = if scaled.is_negative() { "-" } else { "" };
                let digits = scaled.abs().to_string();
                let digits = format!("{:0>width$}", digits, width = places as usize + 1);
                let (int, frac) = digits.split_at(digits.len() - places as usize);
                write!(f, "{sign}{int}.{frac}")
            }
            None => write!(f, "{}/{}", self.0.numer(), self.0.denom()),
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    /// Accepts `"-12"`, `"2.503"`, `".5"` and `"11/6"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRationalError(s.to_string());
        let t = s.trim();
        if let Some((num, den)) = t.split_once('/') {
            let num: BigInt = num.trim().parse().map_err(|_| err())?;
            let den: BigInt = den.trim().parse().map_err(|_| err())?;
            if den.is_zero() {
                return Err(err());
            }
            return Ok(Rational(BigRational::new(num, den)));
        }
        let (negative, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if (int.is_empty() && frac.is_empty())
            || !int.bytes().all(|b| b.is_ascii_digit())
            || !frac.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(err());
        }
        let digits = format!("{int}{frac}");
        let mut num: BigInt = digits.parse().map_err(|_| err())?;
        if negative {
            num = -num;
        }
        let den = BigInt::from(10).pow(frac.len() as u32);
        Ok(Rational(BigRational::new(num, den)))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl<'a> $trait<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
        impl<'a, 'b> $trait<&'b Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'b Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl AddAssign<Rational> for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl SubAssign<Rational> for Rational {
    fn sub_assign(&mut self, rhs: Rational) {
        self.0 -= rhs.0;
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |mut acc, x| {
            acc += x;
            acc
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(r("2.503"), Rational::new(2503, 1000));
        assert_eq!(r("7.6045"), Rational::new(76045, 10000));
        assert_eq!(r("-1.5"), Rational::new(-3, 2));
        assert_eq!(r(".5"), Rational::new(1, 2));
        assert_eq!(r("11/6"), Rational::new(11, 6));
        assert_eq!(r("2.7030"), r("2.703"));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", ".", "1.2.3", "abc", "1/0", "1e5", "--1", " / "] {
            assert!(bad.parse::<Rational>().is_err(), "{bad:?} accepted");
        }
    }

    #[test]
    fn prints_decimal_when_terminating() {
        assert_eq!(r("2.703").to_string(), "2.703");
        assert_eq!(r("2.1").to_string(), "2.1");
        assert_eq!(r("5").to_string(), "5");
        assert_eq!(r("0.0625").to_string(), "0.0625");
        assert_eq!(r("-0.25").to_string(), "-0.25");
        assert_eq!(Rational::zero().to_string(), "0");
        assert_eq!(Rational::new(11, 6).to_string(), "11/6");
        assert_eq!(Rational::new(-49, 20).to_string(), "-2.45");
    }

    #[test]
    fn serde_uses_strings() {
        let v: Rational = serde_json::from_str("\"5.404\"").unwrap();
        assert_eq!(v, r("5.404"));
        assert_eq!(serde_json::to_string(&Rational::new(17, 6)).unwrap(), "\"17/6\"");
        assert!(serde_json::from_str::<Rational>("5.404").is_err());
    }

    proptest! {
        #[test]
        fn decimal_strings_round_trip(int in 0u64..1_000_000, frac in proptest::option::of("[0-9]{0,7}[1-9]"), neg: bool) {
            let mut s = int.to_string();
            if let Some(frac) = frac {
                s.push('.');
                s.push_str(&frac);
            }
            let is_zero = s.parse::<Rational>().unwrap().is_zero();
            if neg && !is_zero {
                s.insert(0, '-');
            }
            prop_assert_eq!(s.parse::<Rational>().unwrap().to_string(), s);
        }

        #[test]
        fn display_parses_back(num in -10_000i64..10_000, den in 1i64..500) {
            let x = Rational::new(num, den);
            prop_assert_eq!(x.to_string().parse::<Rational>().unwrap(), x);
        }
    }
}
