//! Exact rational helpers on top of `num_rational::BigRational`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// `p/q` as a reduced rational. Panics when `q == 0`.
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn to_f64(r: &Rational) -> f64 {
    // BigRational::to_f64 rounds correctly for huge numerators/denominators.
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn abs(r: &Rational) -> Rational {
    r.abs()
}

/// Parses `"p/q"`, `"-p/q"` or an integer string.
pub fn parse_fraction(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a fraction: `{s}`"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(Error::Parse(format!("zero denominator in `{s}`")));
            }
            Ok(Rational::new(p, q))
        }
        None => {
            let p: BigInt = s.parse().map_err(|_| bad())?;
            Ok(Rational::from_integer(p))
        }
    }
}

/// Formats as `"p/q"`, or `"p"` when the denominator is one.
pub fn format_fraction(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Smallest integer not below `r`.
pub fn ceil_to_usize(r: &Rational) -> usize {
    r.ceil().to_integer().to_usize().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reduces_and_normalizes_sign() {
        let r = rat(6, -4);
        assert_eq!(format_fraction(&r), "-3/2");
        assert_eq!(format_fraction(&rat(10, 5)), "2");
    }

    #[test]
    fn parses_appendix_entries() {
        for s in ["162181/187680", "-2476735438/301645575", "0", "-762580446799/588660102960"] {
            assert_eq!(format_fraction(&parse_fraction(s).unwrap()), s);
        }
        assert_eq!(parse_fraction(" 4 / 6 ").unwrap(), rat(2, 3));
        assert!(parse_fraction("1/0").is_err());
        assert!(parse_fraction("abc").is_err());
    }

    #[test]
    fn ceil_handles_exact_products() {
        // 3/10 * 10 is exactly 3; a float product would give 3.0000000000000004.
        assert_eq!(ceil_to_usize(&(rat(3, 10) * int(10))), 3);
        assert_eq!(ceil_to_usize(&(rat(4, 15) * int(10))), 3);
    }

    proptest! {
        #[test]
        fn fraction_strings_round_trip(p in -1_000_000_000i64..1_000_000_000, q in 1i64..1_000_000_000) {
            let r = rat(p, q);
            let back = parse_fraction(&format_fraction(&r)).unwrap();
            prop_assert_eq!(back, r);
        }
    }
}
