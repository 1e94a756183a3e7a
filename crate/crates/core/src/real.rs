//! Arbitrary-precision reals on top of `astro-float-num`.
//!
//! Every operation takes an explicit precision in bits. Results are rounded to
//! nearest-even. The crate-wide constant cache (π, ln 2) lives in a
//! thread-local so values stay `Send` and callers never thread a context.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;

use astro_float_num::{BigFloat, Consts, Radix, RoundingMode, Sign, Word};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

const RM: RoundingMode = RoundingMode::ToEven;
const WORD_BITS: usize = Word::BITS as usize;

thread_local! {
    static CONSTS: RefCell<Consts> =
        RefCell::new(Consts::new().expect("allocating the astro-float constant cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

/// A finite binary floating-point number with its own precision.
#[derive(Clone, Debug)]
pub struct Real(BigFloat);

impl Real {
    pub fn zero(bits: usize) -> Self {
        Real(BigFloat::from_u64(0, bits))
    }

    pub fn one(bits: usize) -> Self {
        Real(BigFloat::from_u64(1, bits))
    }

    pub fn from_u64(v: u64, bits: usize) -> Self {
        Real(BigFloat::from_u64(v, bits))
    }

    /// `2^exp`, exactly.
    pub fn pow2(exp: i32, bits: usize) -> Self {
        let top: Word = 1 << (WORD_BITS - 1);
        Real(BigFloat::from_words(&[top], Sign::Pos, exp + 1)).rounded(bits)
    }

    /// Rounds a big integer to `bits` of precision.
    pub fn from_biguint(v: &BigUint, bits: usize) -> Self {
        if v.is_zero() {
            return Self::zero(bits);
        }
        let words = biguint_words(v);
        let total_bits = words.len() * WORD_BITS;
        // Keep enough leading words for a correctly rounded result; the
        // dropped tail only matters below 2^-(bits+WORD_BITS).
        let keep = (bits / WORD_BITS + 2).min(words.len());
        let top = &words[words.len() - keep..];
        let exp =
            i32::try_from(total_bits).expect("integer too large for the float exponent range");
        Real(BigFloat::from_words(top, Sign::Pos, exp)).rounded(bits)
    }

    pub fn from_ratio(q: &BigRational, bits: usize) -> Self {
        let work = bits + 16;
        let num = Self::from_biguint(q.numer().magnitude(), work);
        let den = Self::from_biguint(q.denom().magnitude(), work);
        let mut r = num.div(&den, bits);
        if q.is_negative() {
            r = r.neg();
        }
        r
    }

    /// Parses a decimal literal such as `"4.787"` or `"1e-5"`.
    pub fn parse_decimal(s: &str, bits: usize) -> Result<Self> {
        let v = with_consts(|cc| BigFloat::parse(s, Radix::Dec, bits, RM, cc));
        Real(v).checked("parse")
    }

    pub fn ln2(bits: usize) -> Self {
        Real(with_consts(|cc| cc.ln_2(bits, RM)))
            .checked("ln 2")
            .expect("ln 2 is finite")
    }

    pub fn pi(bits: usize) -> Self {
        Real(with_consts(|cc| cc.pi(bits, RM)))
            .checked("pi")
            .expect("pi is finite")
    }

    /// Natural logarithm; the argument must be positive.
    pub fn ln(&self, bits: usize) -> Result<Self> {
        if !self.is_positive() {
            return Err(Error::Arithmetic(format!(
                "ln of non-positive value {self}"
            )));
        }
        Real(with_consts(|cc| self.0.ln(bits, RM, cc))).checked("ln")
    }

    /// `ln v` for a positive big integer.
    pub fn ln_biguint(v: &BigUint, bits: usize) -> Result<Self> {
        Self::from_biguint(v, bits + WORD_BITS).ln(bits)
    }

    pub fn add(&self, other: &Real, bits: usize) -> Self {
        Real(self.0.add(&other.0, bits, RM))
    }

    pub fn sub(&self, other: &Real, bits: usize) -> Self {
        Real(self.0.sub(&other.0, bits, RM))
    }

    pub fn mul(&self, other: &Real, bits: usize) -> Self {
        Real(self.0.mul(&other.0, bits, RM))
    }

    pub fn div(&self, other: &Real, bits: usize) -> Self {
        Real(self.0.div(&other.0, bits, RM))
    }

    pub fn neg(&self) -> Self {
        Real(self.0.neg())
    }

    pub fn abs(&self) -> Self {
        Real(self.0.abs())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        !self.0.is_zero() && self.0.is_positive() && !self.0.is_nan()
    }

    pub fn is_finite(&self) -> bool {
        !self.0.is_nan() && !self.0.is_inf()
    }

    pub fn precision(&self) -> usize {
        self.0.precision().unwrap_or(0)
    }

    pub fn rounded(mut self, bits: usize) -> Self {
        // Only fails for NaN/Inf, which stay as they are.
        let _ = self.0.set_precision(bits, RM);
        self
    }

    fn checked(self, what: &str) -> Result<Self> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(Error::Arithmetic(format!(
                "{what} produced a non-finite value"
            )))
        }
    }

    /// `|self - other| <= tol`.
    pub fn close_to(&self, other: &Real, tol: &Real) -> bool {
        let bits = self.precision().max(other.precision()) + 8;
        self.sub(other, bits).abs() <= *tol
    }

    /// Nearest `f64`.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        self.to_sig_string(20).parse().unwrap_or(f64::NAN)
    }

    /// Decimal rendering with `digits` significant digits (round half to
    /// even on the decimal expansion, trailing zeros trimmed).
    ///
    /// Positional notation for decimal exponents in `-5..digits`, scientific
    /// otherwise.
    pub fn to_sig_string(&self, digits: usize) -> String {
        let digits = digits.max(1);
        if self.is_zero() {
            return "0".to_string();
        }
        if !self.is_finite() {
            return "NaN".to_string();
        }
        let (sign, mut mant, exp) = with_consts(|cc| self.0.convert_to_radix(Radix::Dec, RM, cc))
            .expect("finite value converts to decimal");
        while mant.first() == Some(&0) {
            mant.remove(0);
        }
        // value = 0.d1 d2 ... * 10^exp
        let mut exp = exp as i64;
        let rounded = round_digits(&mant, digits);
        let mut mant = rounded.0;
        if rounded.1 {
            exp += 1;
        }
        while mant.len() > 1 && mant.last() == Some(&0) {
            mant.pop();
        }
        let lead = exp - 1;
        let neg = matches!(sign, Sign::Neg);
        let body: String = mant.iter().map(|d| char::from(b'0' + d)).collect();
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        if (-5..digits as i64).contains(&lead) {
            if lead < 0 {
                out.push_str("0.");
                for _ in 0..(-lead - 1) {
                    out.push('0');
                }
                out.push_str(&body);
            } else {
                let int_len = lead as usize + 1;
                if body.len() <= int_len {
                    out.push_str(&body);
                    for _ in body.len()..int_len {
                        out.push('0');
                    }
                } else {
                    out.push_str(&body[..int_len]);
                    out.push('.');
                    out.push_str(&body[int_len..]);
                }
            }
        } else {
            out.push_str(&body[..1]);
            if body.len() > 1 {
                out.push('.');
                out.push_str(&body[1..]);
            }
            out.push_str(&format!("e{lead}"));
        }
        out
    }
}

/// Rounds a decimal digit string (most significant first) to `n` digits.
/// Returns the digits and whether rounding carried into a new leading digit.
fn round_digits(mant: &[u8], n: usize) -> (Vec<u8>, bool) {
    if mant.len() <= n {
        return (mant.to_vec(), false);
    }
    let mut head = mant[..n].to_vec();
    let rest = &mant[n..];
    let round_up = match rest[0].cmp(&5) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => rest[1..].iter().any(|&d| d != 0) || head[n - 1] % 2 == 1,
    };
    if !round_up {
        return (head, false);
    }
    for d in head.iter_mut().rev() {
        if *d == 9 {
            *d = 0;
        } else {
            *d += 1;
            return (head, false);
        }
    }
    head.insert(0, 1);
    head.pop();
    (head, true)
}

#[cfg(target_pointer_width = "64")]
fn biguint_words(v: &BigUint) -> Vec<Word> {
    v.to_u64_digits()
}

#[cfg(not(target_pointer_width = "64"))]
fn biguint_words(v: &BigUint) -> Vec<Word> {
    v.to_u32_digits()
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.0.cmp(&other.0) == Some(0)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.cmp(&other.0).map(|c| c.cmp(&0))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sig_string(f.precision().unwrap_or(12)))
    }
}
