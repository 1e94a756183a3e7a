//! Acceptance criteria A1–A9, one PASS/FAIL line each.
//!
//! A1 and A3 cannot hold as stated (odd generators for even k; doubly
//! exponential valencies). They are checked literally and their FAIL is the
//! expected outcome; any other deviation makes the target fail.

// NaN-safe: a comparison that cannot be made counts as a failure
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use spinal_core::dimension::{
    alpha_n, chain_rule_check, partial_dimension, proof_envelopes, rigid_product_dimension,
};
use spinal_core::orders::{factorial, verify_level_action, Side};
use spinal_core::spectrum::{script_l_member, spectrum_sample, Membership, Provenance};
use spinal_core::synthesis::Synthesizer;
use spinal_core::{
    alt_generators, embedded_alt_generators, synthesize, Real, StabilizerChain, Strategy,
    TreeSequence,
};

type Outcome = Result<String, String>;
/// Name, check, and whether it is expected to pass.
type Criterion = (&'static str, fn() -> Outcome, bool);

fn q(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

fn seq(v: &[u64]) -> TreeSequence {
    TreeSequence::from_small(v).unwrap()
}

fn within(t: Instant, limit: Duration, detail: String) -> Outcome {
    let e = t.elapsed();
    if e <= limit {
        Ok(format!("{detail} ({} ms)", e.as_millis()))
    } else {
        Err(format!(
            "{detail}, but took {} ms > {} ms",
            e.as_millis(),
            limit.as_millis()
        ))
    }
}

fn a1() -> Outcome {
    let t = Instant::now();
    let mut bad = Vec::new();
    for k in 5..=40usize {
        let (tau, sigma) = alt_generators(k).map_err(|e| e.to_string())?;
        let g = StabilizerChain::build(&[tau, sigma], 1).map_err(|e| e.to_string())?;
        let (kappa, rho) = embedded_alt_generators(k).map_err(|e| e.to_string())?;
        let h = StabilizerChain::build(&[kappa, rho], 1).map_err(|e| e.to_string())?;
        let half = |n: usize| factorial(n as u64) / 2u32;
        let fixed = h
            .strong_generators()
            .iter()
            .all(|s| s.fixes(k - 1) && s.fixes(k));
        if g.order() != half(k) || h.order() != half(k - 2) || !fixed {
            bad.push(k);
        }
    }
    if bad.is_empty() {
        within(t, Duration::from_secs(5), "all k in 5..=40".into())
    } else {
        Err(format!(
            "orders are k! and (k-2)! for k = {bad:?}: sigma_k and rho_k are odd for even k"
        ))
    }
}

fn a2() -> Outcome {
    let t = Instant::now();
    let g = verify_level_action(&seq(&[5, 5]), 2, Side::G, 7, 700).map_err(|e| e.to_string())?;
    let h = verify_level_action(&seq(&[5, 5]), 2, Side::H, 7, 700).map_err(|e| e.to_string())?;
    let g3 =
        verify_level_action(&seq(&[5, 5, 5]), 3, Side::G, 7, 700).map_err(|e| e.to_string())?;
    let sixty = BigUint::from(60u32);
    let want = [
        (&g, BigUint::from(46_656_000_000u64)),
        (&h, BigUint::from(81u32)),
        (&g3, sixty.pow(1 + 5 + 25)),
    ];
    for (r, w) in want {
        if r.measured != w || r.expected != w {
            return Err(format!(
                "{} level {} on {}: measured {}, want {w}",
                r.group, r.level, r.sequence, r.measured
            ));
        }
    }
    within(
        t,
        Duration::from_secs(60),
        "60^6, 3^4 and 60^31 measured exactly".into(),
    )
}

fn a3() -> Outcome {
    let t = Instant::now();
    let six_sevenths = q(6, 7);
    let terms = 64;
    let mut reached = Vec::new();
    for alpha in [q(1, 10), q(1, 3), q(1, 2), q(9, 10)] {
        let mut prev = BigRational::one();
        let mut count = 0;
        for step in Synthesizer::new(alpha.clone(), Strategy::Minimal)
            .map_err(|e| e.to_string())?
            .take(terms)
        {
            let step = match step {
                Ok(s) => s,
                Err(e) => {
                    reached.push(format!("alpha={alpha}: {count} terms, then {e}"));
                    break;
                }
            };
            let p = &step.product;
            if !(alpha < *p && *p < prev) {
                return Err(format!("alpha={alpha}: sandwich broken at i={}", step.i));
            }
            if p - &alpha > &six_sevenths * (&prev - &alpha) {
                return Err(format!("alpha={alpha}: decay broken at i={}", step.i));
            }
            prev = p.clone();
            count += 1;
        }
        if count == terms {
            let bound = six_sevenths.pow(63) * (BigRational::one() - &alpha);
            if !(&prev - &alpha < bound && bound < q(1, 10_000)) {
                return Err(format!("alpha={alpha}: final gap bound fails"));
            }
        }
    }
    if reached.is_empty() {
        within(t, Duration::from_secs(5), "64 terms for each alpha".into())
    } else {
        Err(format!(
            "sandwich and decay hold on every computed term, but {}",
            reached.join("; ")
        ))
    }
}

/// Smallest `l ≥ 5` with `t < (l−2)/l < (6+t)/7`, `t = α/P`, by direct search.
fn oracle_terms(alpha: &BigRational, n: usize) -> Vec<(u64, BigRational)> {
    let mut p = BigRational::one();
    let mut out = Vec::new();
    for _ in 0..n {
        let t = alpha / &p;
        let upper = (q(6, 1) + &t) / q(7, 1);
        let mut l = 5u64;
        loop {
            let r = q(l as i64 - 2, l as i64);
            if t < r && r < upper {
                break;
            }
            l += 1;
        }
        p = &p * q(l as i64 - 2, l as i64);
        out.push((l, p.clone()));
    }
    out
}

fn a4() -> Outcome {
    let alpha = q(1, 2);
    let want = vec![(5, q(3, 5)), (13, q(33, 65)), (133, q(4323, 8645))];
    if oracle_terms(&alpha, 3) != want {
        return Err("oracle disagrees with the literal values".into());
    }
    let trace = synthesize(&alpha, 3, Strategy::Minimal).map_err(|e| e.to_string())?;
    let got: Vec<(u64, BigRational)> = trace
        .steps
        .iter()
        .map(|s| (s.l.to_u64().unwrap(), s.product.clone()))
        .collect();
    if got == want {
        Ok("(5, 13, 133), P = (3/5, 33/65, 4323/8645)".into())
    } else {
        Err(format!("synthesized {got:?}"))
    }
}

fn half_sequence(terms: usize) -> TreeSequence {
    synthesize(&q(1, 2), terms, Strategy::Minimal)
        .unwrap()
        .sequence()
        .unwrap()
}

fn a5() -> Outcome {
    let t = Instant::now();
    let s = half_sequence(13);
    let alpha = q(1, 2);
    let tol = Real::pow2(-56, 64);
    for n in 1..=12 {
        let e = proof_envelopes(&s, Some(&alpha), n, 128).map_err(|e| e.to_string())?;
        if !e.holds(&tol) {
            return Err(format!(
                "n={n}: lower {} ratio {} upper {} T1 {} T2 {} 8/l {}",
                e.lower.to_sig_string(12),
                e.ratio.to_sig_string(12),
                e.upper.to_sig_string(12),
                e.t1.to_sig_string(12),
                e.t2.to_sig_string(12),
                e.t1_bound.to_sig_string(12)
            ));
        }
    }
    within(t, Duration::from_secs(10), "n = 1..=12".into())
}

fn a6() -> Outcome {
    let t = Instant::now();
    let s = half_sequence(12);
    // the n = 12 gap is near 1e-2170; resolve it instead of rounding it away
    let bits = 8192;
    let gap = |n: usize| -> Result<Real, String> {
        let d = partial_dimension(&s, n, bits).map_err(|e| e.to_string())?;
        let a = Real::from_ratio(&alpha_n(&s, n).map_err(|e| e.to_string())?, bits);
        Ok(d.d.sub(&a, bits).abs())
    };
    let (g4, g12) = (gap(4)?, gap(12)?);
    if g12.is_zero() || !(g12 < g4) {
        return Err(format!(
            "|d_12 - a_12| = {} not below |d_4 - a_4| = {}",
            g12.to_sig_string(6),
            g4.to_sig_string(6)
        ));
    }
    let fives = seq(&[5; 40]);
    let mut prev: Option<Real> = None;
    for n in 1..=40 {
        let d = partial_dimension(&fives, n, 128)
            .map_err(|e| e.to_string())?
            .d;
        // closed form 2(3^n − 1) ln 3 / ((5^n − 1) ln 60)
        let f = 2.0 * (3f64.powi(n as i32) - 1.0) * 3f64.ln()
            / ((5f64.powi(n as i32) - 1.0) * 60f64.ln());
        if (d.to_f64() - f).abs() > 1e-12 * f.max(1e-300) {
            return Err(format!(
                "constant 5: d_{n} = {} but closed form gives {f:e}",
                d.to_sig_string(12)
            ));
        }
        if let Some(p) = &prev {
            if !(d < *p) {
                return Err(format!("constant 5: d_{n} does not decrease"));
            }
        }
        prev = Some(d);
    }
    let d40 = prev.unwrap();
    if !(d40.to_f64() < 0.02) {
        return Err(format!("d_40 = {}", d40.to_sig_string(8)));
    }
    within(
        t,
        Duration::from_secs(10),
        format!(
            "|d_n - a_n|: {} -> {}; d_40 = {}",
            g4.to_sig_string(3),
            g12.to_sig_string(3),
            d40.to_sig_string(4)
        ),
    )
}

fn a7() -> Outcome {
    let n = 12;
    let rows = chain_rule_check(&seq(&[9; 12]), &seq(&[7; 12]), &seq(&[5; 12]), n, 192)
        .map_err(|e| e.to_string())?;
    match rows.iter().find(|r| !r.agrees(100)) {
        None if rows.len() == n => Ok(format!("levels 1..={n} within 2^-100")),
        None => Err(format!("only {} levels computed", rows.len())),
        Some(r) => Err(format!("level {} disagrees", r.n)),
    }
}

fn a8() -> Outcome {
    let s = seq(&[5, 13, 133]);
    let e = |e: spinal_core::Error| e.to_string();
    if rigid_product_dimension(&s, 1, &BigUint::from(2u32)).map_err(e)? != q(2, 5) {
        return Err("rigid product dimension is not 2/5".into());
    }
    if script_l_member(&q(2, 33), &s, 3).map_err(e)?
        != (Membership::Yes {
            witness: vec![0, 1],
        })
    {
        return Err("2/33 is not witnessed by {0,1}".into());
    }
    if script_l_member(&q(1, 7), &s, 3).map_err(e)? != Membership::NoWithinHorizon {
        return Err("1/7 was accepted".into());
    }
    let sample = spectrum_sample(None, &s, 5, 3).map_err(e)?;
    for want in [q(1, 3), q(2, 3)] {
        if !sample
            .of(Provenance::L)
            .any(|x| x.value == want && !x.witness.is_empty())
        {
            return Err(format!("{want} missing from the sample"));
        }
    }
    for entry in &sample.entries {
        if !entry.revalidate(&s).map_err(e)? {
            return Err(format!("{} does not re-validate", entry.label()));
        }
    }
    if sample
        .entries
        .iter()
        .any(|x| x.value.is_negative() || x.value > BigRational::one())
    {
        return Err("value outside [0,1]".into());
    }
    if !sample.entries.iter().any(|x| x.value.is_zero()) {
        return Err("0 missing".into());
    }
    Ok(format!("{} entries re-validated", sample.entries.len()))
}

fn a9() -> Outcome {
    let t = Instant::now();
    let runs: [&[&str]; 4] = [
        &[
            "verify", "--seq", "5,5", "--level", "2", "--group", "G", "--seed", "3", "--format",
            "json",
        ],
        &[
            "verify", "--seq", "5,5,5", "--level", "3", "--group", "G", "--seed", "42",
        ],
        &[
            "dim",
            "--alpha",
            "1/2",
            "--terms",
            "13",
            "--levels",
            "13",
            "--precision",
            "128",
        ],
        &[
            "dim",
            "--seq",
            "5,5,5,5,5,5,5,5",
            "--levels",
            "8",
            "--format",
            "json",
            "--digits",
            "30",
        ],
    ];
    for args in runs {
        let out = || {
            Command::new(env!("CARGO_BIN_EXE_spinal"))
                .args(args)
                .output()
                .unwrap()
        };
        let (a, b) = (out(), out());
        if a.status.code() != Some(0) {
            return Err(format!("{args:?} exited with {:?}", a.status.code()));
        }
        if a.stdout != b.stdout || a.stdout.is_empty() {
            return Err(format!("{args:?} differs between runs"));
        }
    }
    within(
        t,
        Duration::from_secs(60),
        "verify and dim outputs byte-identical".into(),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("A1", a1, false),
        ("A2", a2, true),
        ("A3", a3, false),
        ("A4", a4, true),
        ("A5", a5, true),
        ("A6", a6, true),
        ("A7", a7, true),
        ("A8", a8, true),
        ("A9", a9, true),
    ];
    let mut surprises = Vec::new();
    for (name, check, attainable) in criteria {
        let outcome = check();
        let passed = outcome.is_ok();
        let detail = outcome.unwrap_or_else(|e| e);
        println!("{name} {} {detail}", if passed { "PASS" } else { "FAIL" });
        if passed != attainable {
            surprises.push(name);
        }
    }
    if !surprises.is_empty() {
        println!("unexpected outcome for {}", surprises.join(", "));
        std::process::exit(1);
    }
}
