//! Orders of iterated wreath products of alternating groups, `ln n!`, Stirling
//! envelopes, and the check that the spinal generators really generate the
//! full wreath product on a level.

use std::cell::RefCell;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::json::big_number;
use crate::perm::{alt_generators, embedded_alt_generators};
use crate::portrait::{Portrait, SpinalKind};
use crate::real::Real;
use crate::schreier::StabilizerChain;
use crate::tree::TreeSequence;

/// Default precision for logarithms.
pub const DEFAULT_BITS: usize = 128;
/// Default cap on the decimal length of an exact order.
pub const DEFAULT_ORDER_DIGIT_BUDGET: u64 = 200_000;
/// Default cap on the level size used for chain verification.
pub const DEFAULT_DEGREE_CAP: usize = 700;
/// `ln n!` is the log of the exact factorial up to here.
const EXACT_FACTORIAL_LIMIT: u64 = 1024;
const GUARD_BITS: usize = 32;

/// Which group a quotient belongs to: `G` over `(l_i)` or `H` over `(l_i − 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Side {
    G,
    H,
}

impl Side {
    /// The sequence whose full wreath product this side realizes.
    pub fn effective_sequence(self, seq: &TreeSequence) -> Result<TreeSequence> {
        match self {
            Side::G => Ok(seq.clone()),
            Side::H => seq.reduced(2),
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::G => "G",
            Side::H => "H",
        })
    }
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "G" | "g" => Ok(Side::G),
            "H" | "h" => Ok(Side::H),
            _ => Err(Error::Parse(format!("unknown group {s:?} (G|H)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderVariant {
    /// Exact integer plus its log.
    Exact,
    /// Log only.
    Log,
}

/// `|X/St_X(n)|` for `X = G` or `H`.
#[derive(Debug, Clone)]
pub struct QuotientOrder {
    pub side: Side,
    pub level: usize,
    pub exact: Option<BigUint>,
    /// Natural log, accurate to `2^-bits` absolutely.
    pub log: Real,
    pub bits: usize,
}

pub fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// Exact `∏_{i<n} (l_i!/2)^{m_i}` over `seq` itself. Refuses when the result
/// would exceed `digit_budget` decimal digits.
pub fn wreath_order_exact(seq: &TreeSequence, n: usize, digit_budget: u64) -> Result<BigUint> {
    let estimate = log_order(seq, n, 64)?
        .div(&Real::from_u64(10, 64).ln(64)?, 64)
        .to_f64();
    if estimate.is_nan() || estimate > digit_budget as f64 {
        return Err(Error::Budget {
            what: format!("exact order at level {n}"),
            digits: if estimate.is_finite() {
                estimate as u64 + 1
            } else {
                u64::MAX
            },
            budget: digit_budget,
        });
    }
    let mut order = BigUint::one();
    let mut m = BigUint::one();
    for i in 0..n {
        let l = seq.small_valency(i)? as u64;
        let alt = factorial(l) / 2u32;
        let e = m
            .to_u32()
            .ok_or_else(|| Error::Arithmetic("exponent overflow".into()))?;
        order *= alt.pow(e);
        m *= l;
    }
    Ok(order)
}

/// `Σ_{i<n} m_i (ln l_i! − ln 2)` over `seq` itself, to relative precision
/// about `2^-bits`.
pub(crate) fn log_order(seq: &TreeSequence, n: usize, bits: usize) -> Result<Real> {
    if n > seq.len() {
        return Err(Error::LevelOutOfRange {
            level: n,
            len: seq.len(),
        });
    }
    let work = bits + GUARD_BITS;
    let ln2 = Real::ln2(work);
    let mut sum = Real::zero(work);
    let mut m = BigUint::one();
    for l in &seq.valencies()[..n] {
        let term = ln_factorial(l, work)?.sub(&ln2, work);
        sum = sum.add(&Real::from_biguint(&m, work).mul(&term, work), work);
        m *= l;
    }
    Ok(sum.rounded(bits))
}

/// Closed-form quotient order at level `n` for `side`.
pub fn wreath_quotient_order(
    seq: &TreeSequence,
    n: usize,
    side: Side,
    variant: OrderVariant,
    bits: usize,
) -> Result<QuotientOrder> {
    wreath_quotient_order_with_budget(seq, n, side, variant, bits, DEFAULT_ORDER_DIGIT_BUDGET)
}

pub fn wreath_quotient_order_with_budget(
    seq: &TreeSequence,
    n: usize,
    side: Side,
    variant: OrderVariant,
    bits: usize,
    digit_budget: u64,
) -> Result<QuotientOrder> {
    if n > seq.len() {
        return Err(Error::LevelOutOfRange {
            level: n,
            len: seq.len(),
        });
    }
    let eff = side.effective_sequence(&seq.prefix(n)?)?;
    // The log is at most n·m_n·ln(max l); carry that many extra bits so the
    // absolute error stays below 2^-bits.
    let bit_len = |v: u64| u64::from(u64::BITS - v.leading_zeros());
    let max_l_bits = eff.valencies().iter().map(BigUint::bits).max().unwrap_or(1);
    let magnitude = eff.level_size(n)?.bits() + bit_len(n as u64) + bit_len(max_l_bits) + 2;
    let work = bits + magnitude as usize + 16;
    let log = log_order(&eff, n, work)?;
    let exact = match variant {
        OrderVariant::Exact => Some(wreath_order_exact(&eff, n, digit_budget)?),
        OrderVariant::Log => None,
    };
    Ok(QuotientOrder {
        side,
        level: n,
        exact,
        log,
        bits,
    })
}

thread_local! {
    static BERNOULLI_EVEN: RefCell<Vec<BigRational>> = const { RefCell::new(Vec::new()) };
}

/// Tangent numbers `T_1..=T_n` (integer-only recurrence).
fn tangent_numbers(n: usize) -> Vec<BigUint> {
    let mut t = vec![BigUint::zero(); n + 1];
    if n == 0 {
        return t;
    }
    t[1] = BigUint::one();
    for k in 2..=n {
        t[k] = &t[k - 1] * (k - 1);
    }
    for k in 2..=n {
        for j in k..=n {
            t[j] = &t[j - 1] * (j - k) + &t[j] * (j - k + 2);
        }
    }
    t
}

/// `B_{2k}` for `k ≥ 1`, via `B_{2k} = (−1)^{k−1} 2k T_k / (4^k (4^k − 1))`.
fn bernoulli_even(k: usize) -> BigRational {
    assert!(k >= 1);
    BERNOULLI_EVEN.with(|cache| {
        let mut b = cache.borrow_mut();
        if b.len() < k {
            let n = k.max(2 * b.len()).max(16);
            let t = tangent_numbers(n);
            *b = (1..=n)
                .map(|j| {
                    let four = BigUint::one() << (2 * j);
                    let den = &four * (&four - 1u32);
                    let v = BigRational::new(BigInt::from(&t[j] * (2 * j)), BigInt::from(den));
                    if j % 2 == 1 {
                        v
                    } else {
                        -v
                    }
                })
                .collect();
        }
        b[k - 1].clone()
    })
}

/// `ln n!` to relative precision about `2^-bits`.
///
/// Exact (log of the integer `n!`) for `n ≤ max(1024, 2·bits)`; above that
/// the Stirling series with exact Bernoulli coefficients, summed until the
/// next term is below `2^-(bits+16)`. The series' smallest term is about
/// `e^{−2πn}`, so the cutoff keeps it far below the target.
pub fn ln_factorial(n: &BigUint, bits: usize) -> Result<Real> {
    let limit = EXACT_FACTORIAL_LIMIT.max(2 * bits as u64);
    if let Some(small) = n.to_u64().filter(|&v| v <= limit) {
        if small < 2 {
            return Ok(Real::zero(bits));
        }
        return Real::ln_biguint(&factorial(small), bits);
    }
    let work = bits + GUARD_BITS + 8;
    let x = Real::from_biguint(n, work);
    let ln_x = x.ln(work)?;
    let half = Real::pow2(-1, work);
    let two_pi = Real::pi(work).mul(&Real::from_u64(2, work), work);
    // (x + 1/2) ln x − x + ln(2π)/2
    let mut sum = x
        .add(&half, work)
        .mul(&ln_x, work)
        .sub(&x, work)
        .add(&two_pi.ln(work)?.mul(&half, work), work);
    let x2 = x.mul(&x, work);
    let mut power = x.clone(); // x^(2k−1)
    let tol = Real::pow2(-(bits as i32) - 16, 64);
    let mut last: Option<Real> = None;
    for k in 1..=bits.max(64) {
        let denom = BigInt::from(2 * k) * BigInt::from(2 * k - 1);
        let coeff = Real::from_ratio(&(bernoulli_even(k) / denom), work);
        let term = coeff.div(&power, work).abs();
        if term < tol {
            return Ok(sum.rounded(bits));
        }
        if last.as_ref().is_some_and(|l| term > *l) {
            break;
        }
        sum = sum.add(&coeff.div(&power, work), work);
        last = Some(term);
        power = power.mul(&x2, work);
    }
    Err(Error::Arithmetic(format!(
        "Stirling series for ln {n}! did not reach 2^-{bits}"
    )))
}

/// `(1 + n(ln n − 1), 1 + (n+1)(ln(n+1) − 1))`, which bracket `ln n!`.
pub fn stirling_envelope(n: &BigUint, bits: usize) -> Result<(Real, Real)> {
    if n.is_zero() {
        return Err(Error::InvalidArgument("the envelope needs n >= 1".into()));
    }
    let work = bits + GUARD_BITS;
    let one = Real::one(work);
    let side = |v: &BigUint| -> Result<Real> {
        let x = Real::from_biguint(v, work);
        Ok(one
            .add(&x.mul(&x.ln(work)?.sub(&one, work), work), work)
            .rounded(bits))
    };
    Ok((side(n)?, side(&(n + 1u32))?))
}

/// Result of comparing a generated level action with the closed form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelActionReport {
    pub sequence: TreeSequence,
    pub level: usize,
    pub group: Side,
    #[serde(serialize_with = "big_number")]
    pub expected: BigUint,
    #[serde(serialize_with = "big_number")]
    pub measured: BigUint,
    #[serde(rename = "match")]
    pub matches: bool,
    pub seed: u64,
    pub elapsed_ms: Option<u64>,
}

impl LevelActionReport {
    pub const CSV_HEADER: &'static str =
        "sequence,level,group,expected,measured,match,seed,elapsed_ms";

    pub fn csv_rows(&self) -> Vec<String> {
        vec![
            Self::CSV_HEADER.to_string(),
            format!(
                "\"{}\",{},{},{},{},{},{},{}",
                self.sequence,
                self.level,
                self.group,
                self.expected,
                self.measured,
                self.matches,
                self.seed,
                self.elapsed_ms.map(|t| t.to_string()).unwrap_or_default()
            ),
        ]
    }
}

/// The four level-`n` generator images for `side`: rooted `τ, σ` and spinal
/// `ζ, ψ` for `G`; rooted `κ, ρ` and spinal `ξ, θ` for `H`.
pub fn level_generators(
    seq: &TreeSequence,
    n: usize,
    side: Side,
) -> Result<Vec<crate::perm::Permutation>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let l0 = seq.small_valency(0)?;
    let (a, b, kinds) = match side {
        Side::G => {
            let (t, s) = alt_generators(l0)?;
            (t, s, [SpinalKind::Zeta, SpinalKind::Psi])
        }
        Side::H => {
            let (k, r) = embedded_alt_generators(l0)?;
            (k, r, [SpinalKind::Xi, SpinalKind::Theta])
        }
    };
    let mut portraits = vec![Portrait::rooted(&a, seq, n)?, Portrait::rooted(&b, seq, n)?];
    for kind in kinds {
        portraits.push(Portrait::spinal(kind, seq, n)?);
    }
    portraits.iter().map(|p| p.level_permutation(n)).collect()
}

/// Builds the level-`n` action of the four generators, computes its order
/// with a stabilizer chain and compares it with the wreath-product formula.
pub fn verify_level_action(
    seq: &TreeSequence,
    n: usize,
    side: Side,
    seed: u64,
    cap: usize,
) -> Result<LevelActionReport> {
    if n == 0 || n > seq.len() {
        return Err(Error::LevelOutOfRange {
            level: n,
            len: seq.len(),
        });
    }
    let seq = seq.prefix(n)?;
    let degree = seq.level_size(n)?;
    if degree > BigUint::from(cap) {
        return Err(Error::CapExceeded {
            required: degree.to_string(),
            cap,
        });
    }
    let start = Instant::now();
    let gens = level_generators(&seq, n, side)?;
    let chain = StabilizerChain::build(&gens, seed)?;
    let measured = chain.order();
    let expected = wreath_order_exact(
        &side.effective_sequence(&seq)?,
        n,
        DEFAULT_ORDER_DIGIT_BUDGET,
    )?;
    Ok(LevelActionReport {
        sequence: seq,
        level: n,
        group: side,
        matches: expected == measured,
        expected,
        measured,
        seed,
        elapsed_ms: Some(start.elapsed().as_millis() as u64),
    })
}
