//! The rational sets `ℒ` and `ℒ_α`.
//!
//! `q = a/b` lies in `ℒ` when `b` divides a product of distinct terms
//! `l_j − 2`. Only the first `J` terms are searched, so a negative answer is
//! "not within the horizon", never "no".

use std::cmp::Ordering;
use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::dimension::rigid_product_dimension;
use crate::error::{Error, Result};
use crate::real::Real;
use crate::synthesis::ratio_string;
use crate::tree::TreeSequence;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Membership {
    /// Indices `j` whose `l_j − 2` shared a factor with the denominator.
    Yes {
        witness: Vec<usize>,
    },
    NoWithinHorizon,
}

impl Membership {
    pub fn is_yes(&self) -> bool {
        matches!(self, Membership::Yes { .. })
    }
}

fn check_unit(q: &BigRational) -> Result<()> {
    if q.is_negative() || *q > BigRational::one() {
        return Err(Error::InvalidArgument(format!(
            "{} is outside [0,1]",
            ratio_string(q)
        )));
    }
    Ok(())
}

/// Strips the reduced denominator of `q` by `gcd(b, l_j − 2)` for
/// `j < horizon`.
pub fn script_l_member(q: &BigRational, seq: &TreeSequence, horizon: usize) -> Result<Membership> {
    check_unit(q)?;
    if horizon > seq.len() {
        return Err(Error::LevelOutOfRange {
            level: horizon,
            len: seq.len(),
        });
    }
    let mut b = q.denom().magnitude().clone();
    let mut witness = Vec::new();
    for (j, l) in seq.valencies()[..horizon].iter().enumerate() {
        if b.is_one() {
            break;
        }
        let g = b.gcd(&(l - 2u32));
        if !g.is_one() {
            b /= g;
            witness.push(j);
        }
    }
    Ok(if b.is_one() {
        Membership::Yes { witness }
    } else {
        Membership::NoWithinHorizon
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Provenance {
    #[serde(rename = "L")]
    L,
    #[serde(rename = "L_alpha")]
    LAlpha,
}

/// `q = k/m_n` with `m_n` the level size of the tree it refers to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Realization {
    pub n: usize,
    #[serde(serialize_with = "crate::json::big_number")]
    pub k: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectrumEntry {
    /// The numeric value (for `ℒ_α` this is `q·α`).
    pub value: BigRational,
    /// The member `q` of `ℒ` the value comes from.
    pub q: BigRational,
    pub provenance: Provenance,
    pub witness: Vec<usize>,
    /// Over the tree with valencies `l_j − 2`.
    pub h_realization: Option<Realization>,
    /// Over the tree with valencies `l_j`, when some `m_n` within the
    /// sequence is divisible by the denominator.
    pub g_realization: Option<Realization>,
}

impl SpectrumEntry {
    /// `"a/b"` for `ℒ`, `"a/b*alpha"` for `ℒ_α`.
    pub fn label(&self) -> String {
        match self.provenance {
            Provenance::L => ratio_string(&self.q),
            Provenance::LAlpha => format!("{}*alpha", ratio_string(&self.q)),
        }
    }

    /// Re-checks the witness and both realizations against `seq`.
    pub fn revalidate(&self, seq: &TreeSequence) -> Result<bool> {
        let mut prod = BigUint::one();
        for &j in &self.witness {
            prod *= seq.valency(j)? - 2u32;
        }
        let q_prod = &self.q * BigRational::from_integer(BigInt::from(prod));
        if !q_prod.is_integer() {
            return Ok(false);
        }
        if let Some(r) = &self.h_realization {
            if rigid_product_dimension(&seq.reduced(2)?, r.n, &r.k)? != self.q {
                return Ok(false);
            }
        }
        if let Some(r) = &self.g_realization {
            if rigid_product_dimension(seq, r.n, &r.k)? != self.q {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectrumResult {
    pub sequence: TreeSequence,
    pub alpha: Option<BigRational>,
    pub max_denominator: u64,
    pub horizon: usize,
    /// Sorted by value, then provenance; no duplicates.
    pub entries: Vec<SpectrumEntry>,
}

/// Smallest `n ≤ limit` with `b | m_n`, and `k = q·m_n`.
fn realization(q: &BigRational, seq: &TreeSequence, limit: usize) -> Result<Option<Realization>> {
    if q.is_zero() {
        return Ok(None);
    }
    let b = q.denom().magnitude();
    let a = q.numer().magnitude();
    let mut m = BigUint::one();
    for n in 0..=limit {
        if (&m % b).is_zero() {
            return Ok(Some(Realization { n, k: a * (&m / b) }));
        }
        if n < limit {
            m *= seq.valency(n)?;
        }
    }
    Ok(None)
}

/// All `q = a/b ∈ [0,1]` with `b ≤ max_denominator` that are in `ℒ` within
/// `horizon`, plus `q·α` for each when `alpha` is given.
pub fn spectrum_sample(
    alpha: Option<&BigRational>,
    seq: &TreeSequence,
    max_denominator: u64,
    horizon: usize,
) -> Result<SpectrumResult> {
    if let Some(a) = alpha {
        check_unit(a)?;
    }
    if max_denominator == 0 {
        return Err(Error::InvalidArgument(
            "max denominator must be at least 1".into(),
        ));
    }
    if horizon > seq.len() {
        return Err(Error::LevelOutOfRange {
            level: horizon,
            len: seq.len(),
        });
    }
    let reduced = seq.reduced(2)?;
    let mut entries = Vec::new();
    for b in 1..=max_denominator {
        for a in 0..=b {
            if a.gcd(&b) != 1 {
                continue;
            }
            let q = BigRational::new(BigInt::from(a), BigInt::from(b));
            let Membership::Yes { witness } = script_l_member(&q, seq, horizon)? else {
                continue;
            };
            let h_realization = realization(&q, &reduced, horizon)?;
            let g_realization = realization(&q, seq, seq.len())?;
            if let Some(alpha) = alpha {
                entries.push(SpectrumEntry {
                    value: &q * alpha,
                    q: q.clone(),
                    provenance: Provenance::LAlpha,
                    witness: witness.clone(),
                    h_realization: h_realization.clone(),
                    g_realization: g_realization.clone(),
                });
            }
            entries.push(SpectrumEntry {
                value: q.clone(),
                q,
                provenance: Provenance::L,
                witness,
                h_realization,
                g_realization,
            });
        }
    }
    entries.sort_by(|x, y| match x.value.cmp(&y.value) {
        Ordering::Equal => x.provenance.cmp(&y.provenance),
        o => o,
    });
    entries.dedup_by(|x, y| x.value == y.value && x.provenance == y.provenance);
    Ok(SpectrumResult {
        sequence: seq.clone(),
        alpha: alpha.cloned(),
        max_denominator,
        horizon,
        entries,
    })
}

impl SpectrumResult {
    pub fn of(&self, provenance: Provenance) -> impl Iterator<Item = &SpectrumEntry> {
        self.entries
            .iter()
            .filter(move |e| e.provenance == provenance)
    }

    pub const CSV_HEADER: &'static str = "value,decimal,provenance,witness,h_n,h_k,g_n,g_k";

    /// Witness indices are `;`-separated; absent realizations leave blanks.
    pub fn csv_rows(&self, digits: usize) -> Vec<String> {
        let mut out = vec![Self::CSV_HEADER.to_string()];
        for e in &self.entries {
            let real = |r: &Option<Realization>| match r {
                Some(r) => format!("{},{}", r.n, r.k),
                None => ",".to_string(),
            };
            let witness: Vec<String> = e.witness.iter().map(|j| j.to_string()).collect();
            out.push(format!(
                "{},{},{},{},{},{}",
                e.label(),
                Real::from_ratio(&e.value, 128).to_sig_string(digits),
                match e.provenance {
                    Provenance::L => "L",
                    Provenance::LAlpha => "L_alpha",
                },
                witness.join(";"),
                real(&e.h_realization),
                real(&e.g_realization),
            ));
        }
        out
    }

    pub fn to_json(&self, digits: usize) -> Value {
        let entries: Vec<Value> = self
            .entries
            .iter()
            .map(|e| {
                json!({
                    "value": e.label(),
                    "exact": ratio_string(&e.value),
                    "decimal": Real::from_ratio(&e.value, 128).to_sig_string(digits),
                    "provenance": e.provenance,
                    "witness": {
                        "indices": e.witness,
                        "h_realization": e.h_realization,
                        "g_realization": e.g_realization,
                    },
                })
            })
            .collect();
        json!({
            "sequence": self.sequence,
            "alpha": self.alpha.as_ref().map(ratio_string),
            "max_denominator": self.max_denominator,
            "horizon": self.horizon,
            "entries": entries,
        })
    }

    /// A self-contained SVG number line of the sample on `[0,1]`: `ℒ` as ticks
    /// above the axis, `ℒ_α` as dots below it.
    pub fn to_svg(&self) -> String {
        const W: f64 = 800.0;
        const H: f64 = 180.0;
        const PAD: f64 = 40.0;
        const AXIS: f64 = 90.0;
        let x = |v: &BigRational| PAD + (W - 2.0 * PAD) * v.to_f64().unwrap_or(0.0);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<line x1="{PAD}" y1="{AXIS}" x2="{:.2}" y2="{AXIS}" stroke="black"/>"#,
            W - PAD
        );
        for (v, label) in [(BigRational::zero(), "0"), (BigRational::one(), "1")] {
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#,
                x(&v),
                AXIS + 40.0
            );
        }
        if let Some(a) = &self.alpha {
            let _ = writeln!(
                s,
                r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="gray" stroke-dasharray="4 3"/><text x="{0:.2}" y="{3:.2}" text-anchor="middle" fill="gray">α = {4}</text>"#,
                x(a),
                AXIS - 45.0,
                AXIS + 25.0,
                AXIS + 40.0,
                ratio_string(a)
            );
        }
        for e in &self.entries {
            let px = x(&e.value);
            let title = e.label();
            match e.provenance {
                Provenance::L => {
                    let _ = writeln!(
                        s,
                        r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{AXIS}" stroke="#1f5fbf" stroke-width="1.5"><title>{title}</title></line>"##,
                        AXIS - 30.0
                    );
                }
                Provenance::LAlpha => {
                    let _ = writeln!(
                        s,
                        r##"<circle cx="{px:.2}" cy="{:.2}" r="3" fill="#c0392b"><title>{title}</title></circle>"##,
                        AXIS + 12.0
                    );
                }
            }
        }
        let _ = writeln!(
            s,
            r##"<text x="{PAD}" y="20" fill="#1f5fbf">| L (b ≤ {}, horizon {})</text><text x="{:.2}" y="20" fill="#c0392b">● L_alpha</text>"##,
            self.max_denominator,
            self.horizon,
            W / 2.0
        );
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(v: &[u64]) -> TreeSequence {
        TreeSequence::from_small(v).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn membership_examples() {
        let s = seq(&[5, 13, 133]);
        assert_eq!(
            script_l_member(&q(1, 1), &s, 3).unwrap(),
            Membership::Yes { witness: vec![] }
        );
        assert_eq!(
            script_l_member(&q(2, 33), &s, 3).unwrap(),
            Membership::Yes {
                witness: vec![0, 1]
            }
        );
        assert_eq!(
            script_l_member(&q(1, 7), &s, 3).unwrap(),
            Membership::NoWithinHorizon
        );
        assert_eq!(
            script_l_member(&q(1, 131), &s, 2).unwrap(),
            Membership::NoWithinHorizon
        );
        assert_eq!(
            script_l_member(&q(1, 131), &s, 3).unwrap(),
            Membership::Yes { witness: vec![2] }
        );
        assert!(script_l_member(&q(3, 2), &s, 3).is_err());
        assert!(script_l_member(&q(-1, 2), &s, 3).is_err());
        assert!(script_l_member(&q(1, 2), &s, 4).is_err());
    }

    #[test]
    fn repeated_factors_need_distinct_indices() {
        // 9 = 3·3 but only one l_j − 2 = 3 is available.
        let s = seq(&[5, 7]);
        assert_eq!(
            script_l_member(&q(1, 9), &s, 2).unwrap(),
            Membership::NoWithinHorizon
        );
        let s = seq(&[5, 5]);
        assert!(script_l_member(&q(1, 9), &s, 2).unwrap().is_yes());
    }

    #[test]
    fn sample_examples() {
        let s = seq(&[5, 13, 133]);
        let r = spectrum_sample(Some(&q(1, 2)), &s, 5, 3).unwrap();
        let l: Vec<BigRational> = r.of(Provenance::L).map(|e| e.value.clone()).collect();
        assert_eq!(l, [q(0, 1), q(1, 3), q(2, 3), q(1, 1)]);
        let la: Vec<BigRational> = r.of(Provenance::LAlpha).map(|e| e.value.clone()).collect();
        assert!(la.contains(&q(1, 6)));
        assert!(la.iter().all(|v| v <= &q(1, 2)));
        for e in &r.entries {
            assert!(e.revalidate(&s).unwrap(), "{}", e.label());
            if !e.q.is_zero() {
                assert!(e.h_realization.is_some());
            }
        }
        let third = r.of(Provenance::L).find(|e| e.q == q(1, 3)).unwrap();
        assert_eq!(
            third.h_realization,
            Some(Realization {
                n: 1,
                k: 1u32.into()
            })
        );
        assert_eq!(third.g_realization, None);
        assert_eq!(third.label(), "1/3");

        let r = spectrum_sample(None, &s, 1, 3).unwrap();
        let l: Vec<String> = r.entries.iter().map(SpectrumEntry::label).collect();
        assert_eq!(l, ["0/1", "1/1"]);

        let r = spectrum_sample(None, &s, 40, 3).unwrap();
        assert!(r.entries.iter().all(|e| e.q.denom() != &BigInt::from(7)));
        assert!(r.entries.iter().any(|e| e.q == q(1, 33)));
    }

    #[test]
    fn g_realizations_exist_when_level_sizes_allow() {
        let s = seq(&[5, 5, 5]);
        let r = spectrum_sample(None, &s, 27, 3).unwrap();
        let e = r.entries.iter().find(|e| e.q == q(1, 3)).unwrap();
        assert_eq!(e.g_realization, None);
        let s = seq(&[5, 9, 5]);
        let r = spectrum_sample(None, &s, 9, 2).unwrap();
        let e = r.entries.iter().find(|e| e.q == q(2, 7)).unwrap();
        assert_eq!(
            e.h_realization,
            Some(Realization {
                n: 2,
                k: 6u32.into()
            })
        );
        let e = r.entries.iter().find(|e| e.q == q(1, 3)).unwrap();
        assert_eq!(
            e.g_realization,
            Some(Realization {
                n: 2,
                k: 15u32.into()
            })
        );
        assert!(e.revalidate(&s).unwrap());
    }

    #[test]
    fn svg_and_json() {
        let s = seq(&[5, 13, 133]);
        let r = spectrum_sample(Some(&q(1, 2)), &s, 5, 3).unwrap();
        let svg = r.to_svg();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<line").count(), 2 + 4);
        assert_eq!(svg.matches("<circle").count(), 4);
        let j = r.to_json(6);
        assert_eq!(j["entries"][0]["value"], "0/1");
        assert_eq!(j["entries"][1]["value"], "0/1*alpha");
        assert!(j["entries"]
            .as_array()
            .unwrap()
            .iter()
            .any(|e| e["value"] == "1/3*alpha" && e["exact"] == "1/6"));
        assert_eq!(r.to_svg(), svg);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn membership_is_monotone_in_the_horizon(
            v in prop::collection::vec(5u64..200, 1..6),
            (a, b) in (1u64..500).prop_flat_map(|b| (0..=b, Just(b))),
        ) {
            let s = TreeSequence::from_small(&v).unwrap();
            let x = q(a as i64, b as i64);
            let mut seen = false;
            for j in 0..=v.len() {
                let m = script_l_member(&x, &s, j).unwrap();
                if seen {
                    prop_assert!(m.is_yes());
                }
                seen |= m.is_yes();
            }
        }

        #[test]
        fn emitted_witnesses_revalidate(
            v in prop::collection::vec(5u64..60, 1..5),
            d in 1u64..40,
        ) {
            let s = TreeSequence::from_small(&v).unwrap();
            let r = spectrum_sample(Some(&q(1, 3)), &s, d, v.len()).unwrap();
            for w in r.entries.windows(2) {
                prop_assert!((w[0].value.clone(), w[0].provenance) < (w[1].value.clone(), w[1].provenance));
            }
            for e in &r.entries {
                prop_assert!(e.revalidate(&s).unwrap());
                prop_assert!(!e.value.is_negative() && e.value <= BigRational::one());
            }
        }
    }
}
