//! Fixed-precision decimal rendering of exact rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rkg_core::Rational;

pub const SIGNIFICANT_DIGITS: u32 = 12;

fn pow10(e: u32) -> BigInt {
    BigInt::from(10u32).pow(e)
}

/// Decimal exponent `e` with `10^e <= x < 10^(e+1)`, for positive `x`.
fn exponent(num: &BigInt, den: &BigInt) -> i64 {
    let mut e = num.to_string().len() as i64 - den.to_string().len() as i64;
    // the digit-count estimate is off by at most one
    let ge = |e: i64| -> bool {
        if e >= 0 {
            num >= &(den * pow10(e as u32))
        } else {
            num * pow10((-e) as u32) >= *den
        }
    };
    if !ge(e) {
        e -= 1;
    } else if ge(e + 1) {
        e += 1;
    }
    e
}

/// Renders `x` with 12 significant digits, rounding half to even. Trailing
/// zeros are dropped; scientific notation is used outside `1e-6..1e12`.
pub fn render(x: &Rational) -> String {
    if x.is_zero() {
        return "0".into();
    }
    let sign = if x.is_negative() { "-" } else { "" };
    let (num, den) = (x.numer().abs(), x.denom().clone());
    let mut e = exponent(&num, &den);

    // digits = round(|x| * 10^(11 - e))
    let shift = SIGNIFICANT_DIGITS as i64 - 1 - e;
    let (sn, sd) = if shift >= 0 {
        (num * pow10(shift as u32), den)
    } else {
        (num, den * pow10((-shift) as u32))
    };
    let (mut digits, rem) = sn.div_rem(&sd);
    let twice = &rem * 2;
    if twice > sd || (twice == sd && digits.is_odd()) {
        digits += BigInt::one();
    }
    if digits == pow10(SIGNIFICANT_DIGITS) {
        digits = pow10(SIGNIFICANT_DIGITS - 1);
        e += 1;
    }

    let s = digits.to_string();
    let (head, tail) = s.split_at(1);
    if !(-6..12).contains(&e) {
        let tail = tail.trim_end_matches('0');
        let mantissa = if tail.is_empty() {
            head.to_string()
        } else {
            format!("{head}.{tail}")
        };
        return format!("{sign}{mantissa}e{e}");
    }
    let body = if e >= 0 {
        let (int, frac) = s.split_at(e as usize + 1);
        let frac = frac.trim_end_matches('0');
        if frac.is_empty() {
            int.to_string()
        } else {
            format!("{int}.{frac}")
        }
    } else {
        let zeros = "0".repeat((-e - 1) as usize);
        format!("0.{zeros}{}", s.trim_end_matches('0'))
    };
    format!("{sign}{body}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> Rational {
        Rational::new(a.into(), b.into())
    }

    #[test]
    fn simple_values() {
        assert_eq!(render(&r(0, 1)), "0");
        assert_eq!(render(&r(1, 4)), "0.25");
        assert_eq!(render(&r(7, 16)), "0.4375");
        assert_eq!(render(&r(256, 1)), "256");
        assert_eq!(render(&r(-75_625, 1)), "-75625");
        assert_eq!(render(&r(1, 3)), "0.333333333333");
        assert_eq!(render(&r(2, 3)), "0.666666666667");
        assert_eq!(render(&r(10, 1)), "10");
        assert_eq!(render(&r(1, 10)), "0.1");
    }

    #[test]
    fn half_even() {
        // 0.1234567890125 -> 12 digits: tie, last kept digit 2 is even
        assert_eq!(
            render(&r(1_234_567_890_125, 10_000_000_000_000)),
            "0.123456789012"
        );
        assert_eq!(
            render(&r(1_234_567_890_135, 10_000_000_000_000)),
            "0.123456789014"
        );
        assert_eq!(render(&r(9_999_999_999_995, 10_000_000_000_000)), "1");
    }

    #[test]
    fn scientific_ranges() {
        assert_eq!(render(&r(1, 1_000_000_000)), "1e-9");
        assert_eq!(render(&r(1, 1_000_000)), "0.000001");
        assert_eq!(render(&r(1_000_000_000_000, 1)), "1e12");
        assert_eq!(render(&r(123_456_789_012_345, 1)), "1.23456789012e14");
        assert_eq!(render(&r(-3, 100_000_000)), "-3e-8");
    }
}
