//! Arbitrary-precision helpers shared by every method.
//!
//! Working precision is always stated in decimal digits. The binary precision
//! handed to the float backend is `ceil(digits * log2(10)) + 8` bits.

use dashu::base::{Abs, Sign, UnsignedAbs};
use dashu::float::round::mode::HalfEven;
use dashu::float::FBig;
use dashu::integer::{IBig, UBig};
use dashu::rational::RBig;

/// Binary floating point number with explicit precision.
pub type Float = FBig<HalfEven, 2>;

/// Converts decimal digits of working precision to binary precision.
pub fn bits_for_digits(digits: u32) -> usize {
    // log2(10) = 3.32192809488736...; the integer form keeps the rule exact.
    let scaled = u64::from(digits) * 332_192_809_489;
    let bits = scaled.div_ceil(100_000_000_000);
    bits as usize + 8
}

pub fn int_float(value: i64, digits: u32) -> Float {
    Float::from(value)
        .with_precision(bits_for_digits(digits))
        .value()
}

pub fn rational_to_float(value: &RBig, digits: u32) -> Float {
    let bits = bits_for_digits(digits);
    let num = Float::from(value.numerator().clone())
        .with_precision(bits)
        .value();
    let den = Float::from(IBig::from(value.denominator().clone()))
        .with_precision(bits)
        .value();
    num / den
}

/// `10^exponent` rounded to the working precision.
pub fn pow10(exponent: i64, digits: u32) -> Float {
    let bits = bits_for_digits(digits);
    let magnitude = Float::from(UBig::from(10u8).pow(exponent.unsigned_abs() as usize))
        .with_precision(bits)
        .value();
    if exponent >= 0 {
        magnitude
    } else {
        Float::ONE.with_precision(bits).value() / magnitude
    }
}

pub fn abs_float(x: &Float) -> Float {
    x.clone().abs()
}

pub fn max_float(a: Float, b: Float) -> Float {
    if a >= b {
        a
    } else {
        b
    }
}

/// Largest `k` with `10^k <= value`; `value` must be positive.
pub fn floor_log10(value: &RBig) -> i64 {
    assert!(
        value.sign() == Sign::Positive && !value.is_zero(),
        "log10 of non-positive"
    );
    let num = value.numerator().unsigned_abs();
    let den = value.denominator().clone();
    let mut k = num.to_string().len() as i64 - den.to_string().len() as i64;
    // The digit-count estimate is off by at most one in either direction.
    while !ten_pow_le(k, &num, &den) {
        k -= 1;
    }
    while ten_pow_le(k + 1, &num, &den) {
        k += 1;
    }
    k
}

/// Smallest `k` with `value <= 10^k`; `value` must be positive.
pub fn ceil_log10(value: &RBig) -> i64 {
    let k = floor_log10(value);
    let num = value.numerator().unsigned_abs();
    let den = value.denominator().clone();
    if scaled_eq(k, &num, &den) {
        k
    } else {
        k + 1
    }
}

// 10^k <= num/den
fn ten_pow_le(k: i64, num: &UBig, den: &UBig) -> bool {
    let p = UBig::from(10u8).pow(k.unsigned_abs() as usize);
    if k >= 0 {
        p * den <= *num
    } else {
        den.clone() <= p * num
    }
}

fn scaled_eq(k: i64, num: &UBig, den: &UBig) -> bool {
    let p = UBig::from(10u8).pow(k.unsigned_abs() as usize);
    if k >= 0 {
        p * den == *num
    } else {
        *den == p * num
    }
}

/// Renders a float with `significant` decimal digits.
pub fn format_float(x: &Float, significant: usize) -> String {
    if x.repr().is_zero() {
        return "0".to_string();
    }
    let decimal: FBig<HalfEven, 10> = x.clone().with_base_and_precision::<10>(significant).value();
    let repr = decimal.repr();
    let negative = repr.significand().sign() == Sign::Negative;
    let digits = repr.significand().unsigned_abs().to_string();
    let exponent = repr.exponent() as i64 + digits.len() as i64 - 1;
    render(negative, &digits, exponent)
}

/// Renders an exact rational with `significant` decimal digits, rounding half away from zero.
pub fn format_rational(value: &RBig, significant: usize) -> String {
    if value.is_zero() {
        return "0".to_string();
    }
    let negative = value.sign() == Sign::Negative;
    let magnitude = value.clone().abs();
    let mut exponent = floor_log10(&magnitude);
    let shift = significant as i64 - 1 - exponent;
    let num = magnitude.numerator().unsigned_abs();
    let den = magnitude.denominator().clone();
    let p = UBig::from(10u8).pow(shift.unsigned_abs() as usize);
    let (scaled_num, scaled_den) = if shift >= 0 {
        (num * p, den)
    } else {
        (num, den * p)
    };
    let quotient = &scaled_num / &scaled_den;
    let remainder = &scaled_num - &quotient * &scaled_den;
    let mut rounded = if remainder * 2u8 >= scaled_den {
        quotient + 1u8
    } else {
        quotient
    };
    if rounded == UBig::from(10u8).pow(significant) {
        rounded /= 10u8;
        exponent += 1;
    }
    render(negative, &rounded.to_string(), exponent)
}

// `digits` is d1 d2 d3 ... with the value d1.d2d3... * 10^exponent.
fn render(negative: bool, digits: &str, exponent: i64) -> String {
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if (-5..=5).contains(&exponent) {
        if exponent < 0 {
            out.push_str("0.");
            out.extend(std::iter::repeat_n('0', (-exponent - 1) as usize));
            out.push_str(digits);
        } else {
            let int_len = exponent as usize + 1;
            if digits.len() <= int_len {
                out.push_str(digits);
                out.extend(std::iter::repeat_n('0', int_len - digits.len()));
            } else {
                out.push_str(&digits[..int_len]);
                out.push('.');
                out.push_str(&digits[int_len..]);
            }
        }
    } else {
        out.push_str(&digits[..1]);
        if digits.len() > 1 {
            out.push('.');
            out.push_str(&digits[1..]);
        }
        out.push('e');
        out.push_str(&exponent.to_string());
    }
    out
}

/// Parses a decimal string (plain or scientific) into an exact rational.
pub fn parse_decimal(text: &str) -> Option<RBig> {
    let text = text.trim();
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i64>().ok()?),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .bytes()
        .chain(frac_part.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut num = IBig::from(all_digits.parse::<UBig>().ok()?);
    if negative {
        num = -num;
    }
    let scale = exponent - frac_part.len() as i64;
    if exponent.unsigned_abs() > 100_000 {
        return None;
    }
    let p = UBig::from(10u8).pow(scale.unsigned_abs() as usize);
    Some(if scale >= 0 {
        RBig::from(num * IBig::from(p))
    } else {
        RBig::from_parts(num, p)
    })
}

/// Renders a rational whose denominator divides a power of ten without rounding.
/// Returns `None` for any other rational.
pub fn exact_decimal(value: &RBig) -> Option<String> {
    let den = value.denominator().clone();
    let mut rest = den.clone();
    let (mut twos, mut fives) = (0usize, 0usize);
    while (&rest % 2u8) == 0 {
        rest /= 2u8;
        twos += 1;
    }
    while (&rest % 5u8) == 0 {
        rest /= 5u8;
        fives += 1;
    }
    if rest != UBig::ONE {
        return None;
    }
    let places = twos.max(fives);
    let scaled = value.numerator().clone() * IBig::from(UBig::from(10u8).pow(places) / den);
    let negative = scaled.sign() == Sign::Negative;
    let mut digits = scaled.unsigned_abs().to_string();
    if places > 0 {
        if digits.len() <= places {
            digits = format!("{}{}", "0".repeat(places + 1 - digits.len()), digits);
        }
        digits.insert(digits.len() - places, '.');
    }
    Some(if negative {
        format!("-{digits}")
    } else {
        digits
    })
}

/// Base-10 logarithm of a positive decimal string, robust to magnitudes outside `f64` range.
pub fn log10_of_decimal(text: &str) -> Option<f64> {
    let text = text.trim();
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i64>().ok()?),
        None => (text, 0),
    };
    if mantissa.starts_with('-') {
        return None;
    }
    // Keep only the leading significant digits.
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let first = digits.find(|c| c != '0')?;
    let point = mantissa.find('.').unwrap_or(mantissa.len());
    let int_len = mantissa[..point]
        .chars()
        .filter(|c| c.is_ascii_digit())
        .count() as i64;
    let lead: String = digits[first..].chars().take(17).collect();
    let lead_value: f64 = format!("0.{lead}").parse().ok()?;
    Some(lead_value.log10() + (int_len - first as i64) as f64 + exponent as f64)
}
