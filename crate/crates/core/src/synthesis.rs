//! Valency sequences whose products `∏ (l_i − 2)/l_i` decrease to a target α.
//!
//! All arithmetic is exact. At step `i`, with `t = α / P_{i−1}`, the admissible
//! valencies are the integers `l ≥ 5` with `t < (l−2)/l < (6+t)/7`, which is the
//! open interval `(2/(1−t), 14/(1−t))`. Any choice from the window gives
//! `α < P_i < P_{i−1}` and `P_i − α ≤ (6/7)(P_{i−1} − α)`.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::tree::{Extension, TreeSequence};

/// Smallest valency the construction uses.
pub const MIN_SYNTH_VALENCY: u64 = 5;

/// Default cap on the decimal length of a single synthesized valency.
pub const DEFAULT_DIGIT_BUDGET: u64 = 10_000;

/// Largest window scanned exactly by the prime-rich sieve.
const SIEVE_WIDTH: u64 = 1 << 20;
/// Sieve only while every prime below `sqrt(hi)` fits a small table.
const SIEVE_LIMIT: u64 = 1 << 44;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Smallest admissible valency.
    Minimal,
    /// Admissible valency whose `l − 2` has the most distinct prime factors,
    /// ties to the smallest.
    PrimeRich,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Minimal => "minimal",
            Strategy::PrimeRich => "prime-rich",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minimal" => Ok(Strategy::Minimal),
            "prime-rich" | "prime_rich" => Ok(Strategy::PrimeRich),
            _ => Err(Error::Parse(format!(
                "unknown strategy {s:?} (minimal|prime-rich)"
            ))),
        }
    }
}

/// Parses `"a/b"`, or a decimal such as `"0.5"`, `".125"`, `"2.5e-3"`, into an
/// exact rational.
pub fn parse_alpha(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational or decimal number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i64 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("0{int}{frac}").parse().map_err(|_| bad())?;
    let scale = exp - frac.len() as i64;
    let ten = BigInt::from(10u32);
    let magnitude = u32::try_from(scale.unsigned_abs()).map_err(|_| bad())?;
    let mut q = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, magnitude as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, magnitude as usize))
    };
    if neg {
        q = -q;
    }
    Ok(q)
}

/// Renders `a/b` in lowest terms, always with an explicit denominator.
pub fn ratio_string(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Closed integer range `lo..=hi` of admissible valencies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    pub lo: BigUint,
    pub hi: BigUint,
}

impl Window {
    pub fn contains(&self, l: &BigUint) -> bool {
        &self.lo <= l && l <= &self.hi
    }

    pub fn width(&self) -> BigUint {
        &self.hi - &self.lo + 1u32
    }
}

/// Admissible valencies for the next step given the running product `p_prev`.
pub fn window(alpha: &BigRational, p_prev: &BigRational) -> Result<Window> {
    if !alpha.is_positive() || *alpha >= BigRational::one() {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in (0,1), got {}",
            ratio_string(alpha)
        )));
    }
    if p_prev <= alpha || *p_prev > BigRational::one() {
        return Err(Error::InvalidArgument(format!(
            "running product {} must lie in (alpha, 1]",
            ratio_string(p_prev)
        )));
    }
    // 1/(1-t) = P/(P-alpha) = num/den
    let ratio = p_prev / (p_prev - alpha);
    let num = ratio.numer().magnitude();
    let den = ratio.denom().magnitude();
    let lo = (num * 2u32) / den + 1u32;
    let lo = lo.max(BigUint::from(MIN_SYNTH_VALENCY));
    let hi = (num * 14u32 - 1u32) / den;
    debug_assert!(lo <= hi, "the window is never empty");
    Ok(Window { lo, hi })
}

/// One synthesis step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub i: usize,
    pub l: BigUint,
    pub window: Window,
    /// `P_i = ∏_{j≤i} (l_j − 2)/l_j`.
    pub product: BigRational,
    /// `P_i − α`.
    pub gap: BigRational,
}

/// The α = 0 and α = 1 cases need no sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Degenerate {
    /// α = 0: the trivial subgroup.
    #[serde(rename = "H = 1")]
    Trivial,
    /// α = 1: the whole group.
    #[serde(rename = "H = G")]
    Whole,
}

impl fmt::Display for Degenerate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Degenerate::Trivial => "H = 1",
            Degenerate::Whole => "H = G",
        })
    }
}

/// Step-by-step synthesizer; yields steps until the digit budget is hit.
#[derive(Debug, Clone)]
pub struct Synthesizer {
    alpha: BigRational,
    strategy: Strategy,
    budget: u64,
    product: BigRational,
    i: usize,
    failed: bool,
}

impl Synthesizer {
    /// `alpha` must lie strictly between 0 and 1.
    pub fn new(alpha: BigRational, strategy: Strategy) -> Result<Self> {
        if !alpha.is_positive() || alpha >= BigRational::one() {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in (0,1) for a sequence, got {}",
                ratio_string(&alpha)
            )));
        }
        Ok(Synthesizer {
            alpha,
            strategy,
            budget: DEFAULT_DIGIT_BUDGET,
            product: BigRational::one(),
            i: 0,
            failed: false,
        })
    }

    pub fn with_budget(mut self, digits: u64) -> Self {
        self.budget = digits;
        self
    }

    fn step(&mut self) -> Result<Step> {
        let window = window(&self.alpha, &self.product)?;
        let digits = decimal_digits(&window.lo);
        if digits > self.budget {
            return Err(Error::Budget {
                what: format!("valency l_{}", self.i),
                digits,
                budget: self.budget,
            });
        }
        let l = match self.strategy {
            Strategy::Minimal => window.lo.clone(),
            Strategy::PrimeRich => prime_rich_choice(&window),
        };
        let l_int = BigInt::from(l.clone());
        self.product = &self.product * BigRational::new(&l_int - 2, l_int);
        let step = Step {
            i: self.i,
            l,
            window,
            product: self.product.clone(),
            gap: &self.product - &self.alpha,
        };
        self.i += 1;
        Ok(step)
    }
}

impl Iterator for Synthesizer {
    type Item = Result<Step>;

    fn next(&mut self) -> Option<Result<Step>> {
        if self.failed {
            return None;
        }
        let r = self.step();
        self.failed = r.is_err();
        Some(r)
    }
}

/// The full record of a synthesis run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthesisTrace {
    pub alpha: BigRational,
    pub strategy: Strategy,
    pub degenerate: Option<Degenerate>,
    pub steps: Vec<Step>,
}

/// Synthesizes `terms` valencies for `alpha ∈ [0,1]` with the default budget.
pub fn synthesize(alpha: &BigRational, terms: usize, strategy: Strategy) -> Result<SynthesisTrace> {
    synthesize_with_budget(alpha, terms, strategy, DEFAULT_DIGIT_BUDGET)
}

pub fn synthesize_with_budget(
    alpha: &BigRational,
    terms: usize,
    strategy: Strategy,
    digit_budget: u64,
) -> Result<SynthesisTrace> {
    if terms == 0 {
        return Err(Error::InvalidArgument("terms must be at least 1".into()));
    }
    if alpha.is_negative() || *alpha > BigRational::one() {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in [0,1], got {}",
            ratio_string(alpha)
        )));
    }
    let degenerate = if alpha.is_zero() {
        Some(Degenerate::Trivial)
    } else if alpha.is_one() {
        Some(Degenerate::Whole)
    } else {
        None
    };
    let steps = match degenerate {
        Some(_) => Vec::new(),
        None => Synthesizer::new(alpha.clone(), strategy)?
            .with_budget(digit_budget)
            .take(terms)
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(SynthesisTrace {
        alpha: alpha.clone(),
        strategy,
        degenerate,
        steps,
    })
}

impl SynthesisTrace {
    pub fn valencies(&self) -> Vec<BigUint> {
        self.steps.iter().map(|s| s.l.clone()).collect()
    }

    /// The synthesized prefix as a tree sequence; `None` for the degenerate
    /// cases.
    pub fn sequence(&self) -> Option<TreeSequence> {
        if self.degenerate.is_some() {
            return None;
        }
        let seq =
            TreeSequence::new(self.valencies()).expect("synthesized valencies are at least 5");
        Some(seq.with_extension(Extension {
            alpha: self.alpha.clone(),
            strategy: self.strategy,
        }))
    }

    pub const CSV_HEADER: &'static str = "i,l_i,window_lo,window_hi,P_num,P_den,gap_decimal";

    /// CSV rows (header first); the gap is printed with `digits` significant
    /// digits.
    pub fn csv_rows(&self, digits: usize) -> Vec<String> {
        let mut rows = vec![Self::CSV_HEADER.to_string()];
        for s in &self.steps {
            rows.push(format!(
                "{},{},{},{},{},{},{}",
                s.i,
                s.l,
                s.window.lo,
                s.window.hi,
                s.product.numer(),
                s.product.denom(),
                gap_decimal(&s.gap, digits)
            ));
        }
        rows
    }

    pub fn to_json(&self, digits: usize) -> serde_json::Value {
        use crate::json::BigNumber;
        let steps: Vec<serde_json::Value> = self
            .steps
            .iter()
            .map(|s| {
                serde_json::json!({
                    "i": s.i,
                    "l": BigNumber(&s.l),
                    "window_lo": BigNumber(&s.window.lo),
                    "window_hi": BigNumber(&s.window.hi),
                    "P": ratio_string(&s.product),
                    "gap": ratio_string(&s.gap),
                    "gap_decimal": gap_decimal(&s.gap, digits),
                })
            })
            .collect();
        serde_json::json!({
            "alpha": ratio_string(&self.alpha),
            "strategy": self.strategy,
            "degenerate": self.degenerate,
            "steps": steps,
        })
    }
}

fn gap_decimal(gap: &BigRational, digits: usize) -> String {
    let bits = (digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + 32;
    Real::from_ratio(gap, bits.max(64)).to_sig_string(digits)
}

fn decimal_digits(v: &BigUint) -> u64 {
    (v.bits() as f64 * std::f64::consts::LOG10_2).floor() as u64 + 1
}

/// Valency in `w` maximizing the number of distinct primes of `l − 2`.
fn prime_rich_choice(w: &Window) -> BigUint {
    let small = (w.lo.to_u64(), w.hi.to_u64());
    if let (Some(lo), Some(hi)) = small {
        if hi < SIEVE_LIMIT && hi - lo < SIEVE_WIDTH {
            return BigUint::from(sieve_choice(lo, hi));
        }
    }
    primorial_choice(w)
}

/// Exact choice: counts distinct prime factors of every `l − 2` in the window.
fn sieve_choice(lo: u64, hi: u64) -> u64 {
    let (a, b) = (lo - 2, hi - 2);
    let n = (b - a + 1) as usize;
    let mut rest: Vec<u64> = (a..=b).collect();
    let mut omega = vec![0u32; n];
    for p in small_primes(b.isqrt()) {
        let first = a.div_ceil(p) * p;
        let mut x = first;
        while x <= b {
            let idx = (x - a) as usize;
            omega[idx] += 1;
            while rest[idx].is_multiple_of(p) {
                rest[idx] /= p;
            }
            x += p;
        }
    }
    let mut best = (0u32, lo);
    for (idx, r) in rest.iter().enumerate() {
        let w = omega[idx] + u32::from(*r > 1);
        if w > best.0 {
            best = (w, lo + idx as u64);
        }
    }
    best.1
}

fn small_primes(limit: u64) -> Vec<u64> {
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// Smallest multiple of the largest primorial `p_r# ≤ hi − 2` lying in the
/// window. No `x ≤ hi − 2` has more than `r` distinct primes, so this attains
/// the maximum; among maximizers it need not be the smallest.
fn primorial_choice(w: &Window) -> BigUint {
    let top = &w.hi - 2u32;
    let mut primorial = BigUint::one();
    let mut p = 2u64;
    loop {
        let next = &primorial * p;
        if next > top {
            break;
        }
        primorial = next;
        p = next_prime(p);
    }
    let bottom = &w.lo - 2u32;
    let x = bottom.div_ceil(&primorial) * &primorial;
    debug_assert!(x <= top, "a primorial multiple fits in every window");
    x + 2u32
}

fn next_prime(p: u64) -> u64 {
    (p + 1..)
        .find(|&c| (2..).take_while(|d| d * d <= c).all(|d| c % d != 0))
        .expect("primes are unbounded")
}
