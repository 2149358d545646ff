//! Decimal rendering of exact rationals.

use selfish_cc_core::Rational;

pub const DEFAULT_PRECISION: usize = 12;

/// `r` to `sig` significant digits, rounded half away from zero, with
/// trailing fractional zeros removed. Never uses exponent notation.
pub fn to_decimal(r: Rational, sig: usize) -> String {
    let sig = sig.max(1);
    let n = i128::from(r.numer());
    let d = i128::from(r.denom());
    if n == 0 {
        return "0".to_string();
    }
    let negative = n < 0;
    let n = n.abs();

    let mut digits: Vec<u8> = (n / d).to_string().bytes().map(|b| b - b'0').collect();
    let mut point = digits.len();
    let mut rem = n % d;
    let lead = digits.iter().position(|&x| x != 0);
    // Long division until one digit past the last significant one.
    let mut needed = lead.map_or(usize::MAX, |p| p + sig + 1);
    while digits.len() < needed {
        rem *= 10;
        digits.push((rem / d) as u8);
        rem %= d;
        if needed == usize::MAX && *digits.last().unwrap() != 0 {
            needed = digits.len() - 1 + sig + 1;
        }
    }

    digits.truncate(needed);
    let round_up = digits.pop().is_some_and(|x| x >= 5);
    if round_up {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, 1);
                point += 1;
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    while digits.len() < point {
        digits.push(0);
    }

    let mut out = String::new();
    if negative {
        out.push('-');
    }
    let int: String = digits[..point].iter().map(|x| char::from(b'0' + x)).collect();
    let int = int.trim_start_matches('0');
    out.push_str(if int.is_empty() { "0" } else { int });
    let frac: String = digits[point..].iter().map(|x| char::from(b'0' + x)).collect();
    let frac = frac.trim_end_matches('0');
    if !frac.is_empty() {
        out.push('.');
        out.push_str(frac);
    }
    out
}

/// Parses `"a/b"`, `"a"` or a plain decimal such as `"0.05"` exactly.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((a, b)) = text.split_once('/') {
        return Rational::new(a.trim().parse().ok()?, b.trim().parse().ok()?).ok();
    }
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) || frac.len() > 18 {
        return None;
    }
    let scale = 10i64.checked_pow(frac.len() as u32)?;
    let whole: i64 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let part: i64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    let numer = whole.checked_mul(scale)?.checked_add(part)?;
    Rational::new(if negative { -numer } else { numer }, scale).ok()
}
