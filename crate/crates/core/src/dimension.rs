//! Partial Hausdorff dimensions `d_n = log|H/St_H(n)| / log|G/St_G(n)|`, the
//! Stirling envelopes around the limit, the chain rule, and the dimensions
//! of products of rigid vertex stabilizers.
//!
//! Envelope row `n` is built from `l_0, ..., l_n`, so it needs `l_n`. With
//! `w_k = ∏_{k≤j<n} 1/l_j` and `w'_k = ∏_{k≤j<n} 1/(l_j − 2)`:
//!
//! * ratio `= α_n · Σ w'_k ln (l_k−2)! / Σ w_k ln l_k!`, i.e. `log B / log D`
//! * `N = Σ w_k ln (l_k−2)!`, `T1 = Σ w_k ln l_k / N`, `T2 = Σ w_k ln(l_k−1) / N`
//! * lower `= α_n / (1 + T1 + T2)`
//! * upper `= α_n · Σ w'_k (1 + (l_k−1)(ln(l_k−1) − 1)) / Σ w_k ln l_k!`

use std::ops::RangeInclusive;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::orders::{ln_factorial, log_order, Side};
use crate::real::Real;
use crate::synthesis::ratio_string;
use crate::tree::TreeSequence;

pub const MIN_BITS: usize = 64;
const GUARD_BITS: usize = 32;

fn check_bits(bits: usize) -> Result<()> {
    if bits < MIN_BITS {
        Err(Error::PrecisionTooLow(bits))
    } else {
        Ok(())
    }
}

/// `α_n = ∏_{j<n} (l_j − 2)/l_j`.
pub fn alpha_n(seq: &TreeSequence, n: usize) -> Result<BigRational> {
    let prefix = seq.prefix(n)?;
    Ok(prefix
        .valencies()
        .iter()
        .fold(BigRational::one(), |acc, l| {
            let l = BigInt::from(l.clone());
            acc * BigRational::new(&l - 2, l)
        }))
}

/// The partial quotient at level `n`.
#[derive(Debug, Clone)]
pub struct PartialDimension {
    pub n: usize,
    /// `log|H/St_H(n)|`.
    pub log_num: Real,
    /// `log|G/St_G(n)|`.
    pub log_den: Real,
    pub d: Real,
    pub alpha_n: BigRational,
}

pub fn partial_dimension(seq: &TreeSequence, n: usize, bits: usize) -> Result<PartialDimension> {
    check_bits(bits)?;
    if n == 0 {
        return Err(Error::InvalidArgument(
            "partial dimensions start at level 1".into(),
        ));
    }
    let work = bits + GUARD_BITS;
    let h = Side::H.effective_sequence(&seq.prefix(n)?)?;
    let log_num = log_order(&h, n, work)?;
    let log_den = log_order(seq, n, work)?;
    let d = log_num.div(&log_den, bits);
    Ok(PartialDimension {
        n,
        log_num: log_num.rounded(bits),
        log_den: log_den.rounded(bits),
        d,
        alpha_n: alpha_n(seq, n)?,
    })
}

/// Stirling bounds on `log B / log D` at index `n`.
#[derive(Debug, Clone)]
pub struct Envelopes {
    pub n: usize,
    pub alpha_n: BigRational,
    /// `α_n − α` when a target was given.
    pub target_gap: Option<BigRational>,
    pub t1: Real,
    pub t2: Real,
    pub lower: Real,
    pub upper: Real,
    /// `log B / log D`.
    pub ratio: Real,
    /// `8 / l_n`.
    pub t1_bound: Real,
}

impl Envelopes {
    /// `lower ≤ ratio ≤ upper`, `T2 ≤ T1` and `T1 ≤ 8/l_n`, each within `tol`.
    pub fn holds(&self, tol: &Real) -> bool {
        leq(&self.lower, &self.ratio, tol)
            && leq(&self.ratio, &self.upper, tol)
            && leq(&self.t2, &self.t1, tol)
            && leq(&self.t1, &self.t1_bound, tol)
    }
}

/// `a ≤ b + tol`.
pub fn leq(a: &Real, b: &Real, tol: &Real) -> bool {
    let bits = a.precision().max(b.precision()) + 8;
    *a <= b.add(tol, bits)
}

pub fn proof_envelopes(
    seq: &TreeSequence,
    alpha: Option<&BigRational>,
    n: usize,
    bits: usize,
) -> Result<Envelopes> {
    check_bits(bits)?;
    if n >= seq.len() {
        return Err(Error::LevelOutOfRange {
            level: n + 1,
            len: seq.len(),
        });
    }
    let five = BigUint::from(5u32);
    if let Some((level, l)) = seq.valencies()[..=n]
        .iter()
        .enumerate()
        .find(|(_, l)| **l < five)
    {
        return Err(Error::ValencyTooSmall {
            level,
            value: l.to_string(),
            min: 5,
        });
    }
    let work = bits + GUARD_BITS;
    let one = Real::one(work);
    let ls = &seq.valencies()[..=n];
    // Weights from the top index down.
    let mut w = Real::one(work);
    let mut w2 = Real::one(work);
    let (mut num_true, mut num_low, mut num_up) =
        (Real::zero(work), Real::zero(work), Real::zero(work));
    let (mut den, mut s1, mut s2) = (Real::zero(work), Real::zero(work), Real::zero(work));
    for (k, l) in ls.iter().enumerate().rev() {
        if k < n {
            w = w.div(&Real::from_biguint(l, work), work);
            w2 = w2.div(&Real::from_biguint(&(l - 2u32), work), work);
        }
        let l_minus_1 = l - 1u32;
        let ln_l = Real::ln_biguint(l, work)?;
        let ln_l1 = Real::ln_biguint(&l_minus_1, work)?;
        let lf2 = ln_factorial(&(l - 2u32), work)?;
        let lf = ln_factorial(l, work)?;
        let x = Real::from_biguint(&l_minus_1, work);
        let stirling_up = one.add(&x.mul(&ln_l1.sub(&one, work), work), work);
        num_true = num_true.add(&w2.mul(&lf2, work), work);
        num_up = num_up.add(&w2.mul(&stirling_up, work), work);
        num_low = num_low.add(&w.mul(&lf2, work), work);
        den = den.add(&w.mul(&lf, work), work);
        s1 = s1.add(&w.mul(&ln_l, work), work);
        s2 = s2.add(&w.mul(&ln_l1, work), work);
    }
    let a_n = alpha_n(seq, n)?;
    let a = Real::from_ratio(&a_n, work);
    let t1 = s1.div(&num_low, work);
    let t2 = s2.div(&num_low, work);
    let lower = a.div(&one.add(&t1, work).add(&t2, work), work);
    let upper = a.mul(&num_up, work).div(&den, work);
    let ratio = a.mul(&num_true, work).div(&den, work);
    let t1_bound = Real::from_u64(8, work).div(&Real::from_biguint(&ls[n], work), work);
    Ok(Envelopes {
        n,
        target_gap: alpha.map(|t| &a_n - t),
        alpha_n: a_n,
        t1: t1.rounded(bits),
        t2: t2.rounded(bits),
        lower: lower.rounded(bits),
        upper: upper.rounded(bits),
        ratio: ratio.rounded(bits),
        t1_bound: t1_bound.rounded(bits),
    })
}

/// One level of a dimension report.
#[derive(Debug, Clone)]
pub struct DimensionRow {
    pub partial: PartialDimension,
    /// Absent when `l_n` is beyond the sequence.
    pub envelope: Option<Envelopes>,
    /// `d_n` left `[lower(1−ε), upper(1+ε)]`, `ε = 2^{−bits/2}`.
    pub outside_envelope: bool,
}

#[derive(Debug, Clone)]
pub struct DimensionReport {
    pub sequence: TreeSequence,
    pub alpha: Option<BigRational>,
    pub bits: usize,
    pub rows: Vec<DimensionRow>,
    /// Minimum of `d_n` over the second half of the computed levels.
    pub liminf_estimate: Real,
    /// Maximum of `d_n` over the same window.
    pub limsup_estimate: Real,
    /// The two estimates differ by more than the widest envelope in the window.
    pub divergence_flag: bool,
}

pub fn dimension_report(
    seq: &TreeSequence,
    alpha: Option<&BigRational>,
    levels: RangeInclusive<usize>,
    bits: usize,
) -> Result<DimensionReport> {
    check_bits(bits)?;
    let (first, last) = (*levels.start(), *levels.end());
    if first == 0 || first > last {
        return Err(Error::InvalidArgument(format!(
            "invalid level range {first}..={last}"
        )));
    }
    if last > seq.len() {
        return Err(Error::LevelOutOfRange {
            level: last,
            len: seq.len(),
        });
    }
    let eps = Real::pow2(-((bits / 2) as i32), 64);
    let mut rows = Vec::new();
    for n in levels {
        let partial = partial_dimension(seq, n, bits)?;
        let envelope = if n < seq.len() {
            Some(proof_envelopes(seq, alpha, n, bits)?)
        } else {
            None
        };
        let outside_envelope = envelope.as_ref().is_some_and(|e| {
            let w = bits + 8;
            let lo = e.lower.mul(&Real::one(w).sub(&eps, w), w);
            let hi = e.upper.mul(&Real::one(w).add(&eps, w), w);
            partial.d < lo || partial.d > hi
        });
        rows.push(DimensionRow {
            partial,
            envelope,
            outside_envelope,
        });
    }
    let tail = &rows[rows.len() / 2..];
    let mut lo = tail[0].partial.d.clone();
    let mut hi = lo.clone();
    let mut width = Real::zero(bits);
    for r in tail {
        if r.partial.d < lo {
            lo = r.partial.d.clone();
        }
        if r.partial.d > hi {
            hi = r.partial.d.clone();
        }
        if let Some(e) = &r.envelope {
            let wd = e.upper.sub(&e.lower, bits).abs();
            if wd > width {
                width = wd;
            }
        }
    }
    let divergence_flag = hi.sub(&lo, bits) > width;
    Ok(DimensionReport {
        sequence: seq.clone(),
        alpha: alpha.cloned(),
        bits,
        rows,
        liminf_estimate: lo,
        limsup_estimate: hi,
        divergence_flag,
    })
}

impl DimensionReport {
    pub const CSV_HEADER: &'static str = "n,alpha_n_num,alpha_n_den,d_n,lower_n,upper_n,T1,T2";

    pub fn csv_rows(&self, digits: usize) -> Vec<String> {
        let mut out = vec![Self::CSV_HEADER.to_string()];
        for r in &self.rows {
            let p = &r.partial;
            let env = |f: fn(&Envelopes) -> &Real| {
                r.envelope
                    .as_ref()
                    .map(|e| f(e).to_sig_string(digits))
                    .unwrap_or_default()
            };
            out.push(format!(
                "{},{},{},{},{},{},{},{}",
                p.n,
                p.alpha_n.numer(),
                p.alpha_n.denom(),
                p.d.to_sig_string(digits),
                env(|e| &e.lower),
                env(|e| &e.upper),
                env(|e| &e.t1),
                env(|e| &e.t2),
            ));
        }
        out
    }

    pub fn to_json(&self, digits: usize) -> Value {
        let s = |r: &Real| r.to_sig_string(digits);
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let p = &r.partial;
                let mut row = json!({
                    "n": p.n,
                    "alpha_n": ratio_string(&p.alpha_n),
                    "log_num": s(&p.log_num),
                    "log_den": s(&p.log_den),
                    "d_n": s(&p.d),
                    "outside_envelope": r.outside_envelope,
                });
                if let Some(e) = &r.envelope {
                    row["lower_n"] = json!(s(&e.lower));
                    row["upper_n"] = json!(s(&e.upper));
                    row["ratio"] = json!(s(&e.ratio));
                    row["T1"] = json!(s(&e.t1));
                    row["T2"] = json!(s(&e.t2));
                    row["T1_bound"] = json!(s(&e.t1_bound));
                    if let Some(g) = &e.target_gap {
                        row["alpha_n_minus_alpha"] = json!(ratio_string(g));
                    }
                }
                row
            })
            .collect();
        json!({
            "sequence": self.sequence,
            "alpha": self.alpha.as_ref().map(ratio_string),
            "precision_bits": self.bits,
            "liminf_estimate": s(&self.liminf_estimate),
            "limsup_estimate": s(&self.limsup_estimate),
            "divergence_flag": self.divergence_flag,
            "rows": rows,
        })
    }
}

/// One level of the chain-rule table for `K ≤ H ≤ G`.
#[derive(Debug, Clone)]
pub struct ChainRow {
    pub n: usize,
    /// `logH / logG`.
    pub h_in_g: Real,
    /// `logK / logH`.
    pub k_in_h: Real,
    /// `logK / logG`.
    pub k_in_g: Real,
    /// `(logH/logG)·(logK/logH)`.
    pub product: Real,
}

impl ChainRow {
    /// `|k_in_g − product| ≤ 2^-k`.
    pub fn agrees(&self, k: i32) -> bool {
        self.k_in_g.close_to(&self.product, &Real::pow2(-k, 64))
    }
}

/// Checks `dim_G K = dim_G H · dim_H K` level by level for nested spinal
/// sequences `seq_h = seq_g − 2`, `seq_k = seq_h − 2`.
pub fn chain_rule_check(
    seq_g: &TreeSequence,
    seq_h: &TreeSequence,
    seq_k: &TreeSequence,
    n_max: usize,
    bits: usize,
) -> Result<Vec<ChainRow>> {
    check_bits(bits)?;
    for (outer, inner) in [(seq_g, seq_h), (seq_h, seq_k)] {
        let expect = outer.prefix(n_max.min(outer.len()))?.reduced(2)?;
        if inner.len() < n_max || inner.prefix(n_max)? != expect.prefix(n_max.min(expect.len()))? {
            return Err(Error::InvalidArgument(
                "chain rule needs each sequence to be the previous one minus 2".into(),
            ));
        }
    }
    let work = bits + GUARD_BITS;
    (1..=n_max)
        .map(|n| {
            let g = log_order(seq_g, n, work)?;
            let h = log_order(seq_h, n, work)?;
            let k = log_order(seq_k, n, work)?;
            let h_in_g = h.div(&g, work);
            let k_in_h = k.div(&h, work);
            Ok(ChainRow {
                n,
                product: h_in_g.mul(&k_in_h, work).rounded(bits),
                h_in_g: h_in_g.rounded(bits),
                k_in_h: k_in_h.rounded(bits),
                k_in_g: k.div(&g, bits),
            })
        })
        .collect()
}

/// Dimension `k/m_n` of a product of `k` rigid stabilizers of level-`n`
/// vertices.
pub fn rigid_product_dimension(seq: &TreeSequence, n: usize, k: &BigUint) -> Result<BigRational> {
    let m = seq.level_size(n)?;
    if k.is_zero() || *k > m {
        return Err(Error::IndexOutOfRange {
            index: k.to_string(),
            max: m.to_string(),
        });
    }
    Ok(BigRational::new(BigInt::from(k.clone()), BigInt::from(m)))
}

/// The level-`m` quotient for the same product:
/// `k Σ_{n≤i<m} (m_i/m_n) ln(l_i!/2) / Σ_{i<m} m_i ln(l_i!/2)`.
pub fn rigid_product_partial(
    seq: &TreeSequence,
    n: usize,
    k: &BigUint,
    m: usize,
    bits: usize,
) -> Result<Real> {
    check_bits(bits)?;
    rigid_product_dimension(seq, n, k)?;
    if m <= n || m > seq.len() {
        return Err(Error::InvalidArgument(format!(
            "horizon {m} must satisfy {n} < m <= {}",
            seq.len()
        )));
    }
    let work = bits + GUARD_BITS;
    let below = seq.subtree_sequence(n)?;
    let num = log_order(&below, m - n, work)?.mul(&Real::from_biguint(k, work), work);
    let den = log_order(seq, m, work)?;
    Ok(num.div(&den, bits))
}
