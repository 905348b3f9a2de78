//! Exact rational arithmetic helpers.
//!
//! Every distance and function value in this crate is a [`Rat`]
//! (an arbitrary-precision rational). There is no floating point in any
//! computational path; decimal renderings exist only as report
//! annotations.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::Error;

/// Arbitrary-precision rational number, the sole scalar type of the crate.
pub type Rat = BigRational;

/// Shorthand for a rational from an integer pair, reduced and sign-normalized.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Shorthand for an integer rational.
pub fn rint(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Canonical text form: `numerator/denominator`, always with an explicit
/// denominator (`3/2`, `0/1`, `-5/8`). This is the on-disk format for every
/// rational in space and family files.
pub fn format_rat(x: &Rat) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses the canonical `p/q` form; a bare integer `p` is accepted as `p/1`.
pub fn parse_rat(s: &str) -> Result<Rat, Error> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| Error::Input(format!("invalid rational `{s}`")))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| Error::Input(format!("invalid rational `{s}`")))?;
    if d.is_zero() {
        return Err(Error::Input(format!("zero denominator in `{s}`")));
    }
    Ok(Rat::new(n, d))
}

/// Fixed-point decimal rendering by exact long division (reporting only).
pub fn decimal_approx(x: &Rat, places: usize) -> String {
    let neg = x.is_negative();
    let a = x.abs();
    let int = a.numer() / a.denom();
    let mut rem = a.numer() - &int * a.denom();
    let mut frac = String::new();
    for _ in 0..places {
        if rem.is_zero() {
            break;
        }
        rem *= 10;
        let digit = &rem / a.denom();
        frac.push_str(&digit.to_string());
        rem -= &digit * a.denom();
    }
    let sign = if neg { "-" } else { "" };
    if frac.is_empty() {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

/// Least common multiple of the denominators of `xs` (at least 1).
pub fn denominator_lcm<'a, I: IntoIterator<Item = &'a Rat>>(xs: I) -> BigInt {
    let mut l = BigInt::one();
    for x in xs {
        l = l.lcm(x.denom());
    }
    l
}

/// Scales `x` by `lcm`, which must be a multiple of its denominator.
pub fn scale_to_int(x: &Rat, lcm: &BigInt) -> BigInt {
    x.numer() * (lcm / x.denom())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_round_trip() {
        for s in ["3/2", "0/1", "-5/8", "17/1"] {
            assert_eq!(format_rat(&parse_rat(s).unwrap()), s);
        }
        // non-canonical inputs normalize
        assert_eq!(format_rat(&parse_rat("2/4").unwrap()), "1/2");
        assert_eq!(format_rat(&parse_rat("3/-2").unwrap()), "-3/2");
        assert_eq!(format_rat(&parse_rat("7").unwrap()), "7/1");
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("a/b").is_err());
        assert!(parse_rat("").is_err());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(decimal_approx(&rat(33, 32), 6), "1.03125");
        assert_eq!(decimal_approx(&rat(-1, 3), 4), "-0.3333");
        assert_eq!(decimal_approx(&rint(2), 4), "2");
    }

    #[test]
    fn lcm_and_scaling() {
        let xs = [rat(1, 2), rat(3, 5), rint(4)];
        let l = denominator_lcm(xs.iter());
        assert_eq!(l, BigInt::from(10));
        assert_eq!(scale_to_int(&xs[0], &l), BigInt::from(5));
        assert_eq!(scale_to_int(&xs[1], &l), BigInt::from(6));
        assert_eq!(scale_to_int(&xs[2], &l), BigInt::from(40));
    }
}
