//! Browser bindings: a synthesis trace, a partial-dimension curve and a
//! spectrum plot. Errors come back as plain strings.

use serde_json::json;
use wasm_bindgen::prelude::*;

use spinal_core::dimension::dimension_report;
use spinal_core::spectrum::spectrum_sample;
use spinal_core::synthesis::{parse_alpha, synthesize_with_budget};
use spinal_core::{Strategy, TreeSequence};

/// Keeps the page responsive: valencies above this many digits are refused.
const PAGE_DIGIT_BUDGET: u64 = 2000;
const PAGE_BITS: usize = 128;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// JSON trace of `terms` synthesis steps.
#[wasm_bindgen]
pub fn synthesis_trace(alpha: &str, terms: usize, strategy: &str) -> Result<String, String> {
    let alpha = parse_alpha(alpha).map_err(err)?;
    let strategy: Strategy = strategy.parse().map_err(err)?;
    let trace = synthesize_with_budget(&alpha, terms, strategy, PAGE_DIGIT_BUDGET).map_err(err)?;
    Ok(trace.to_json(12).to_string())
}

/// `[{n, d, alpha_n, lower, upper}]` for the minimal sequence of `alpha`.
#[wasm_bindgen]
pub fn dimension_curve(alpha: &str, levels: usize) -> Result<String, String> {
    let q = parse_alpha(alpha).map_err(err)?;
    if levels == 0 {
        return Err("levels must be at least 1".into());
    }
    let trace =
        synthesize_with_budget(&q, levels, Strategy::Minimal, PAGE_DIGIT_BUDGET).map_err(err)?;
    let seq = trace
        .sequence()
        .ok_or_else(|| format!("alpha = {alpha} needs no sequence"))?;
    let report = dimension_report(&seq, Some(&q), 1..=levels, PAGE_BITS).map_err(err)?;
    let points: Vec<_> = report
        .rows
        .iter()
        .map(|r| {
            let f = |x: &spinal_core::Real| x.to_f64();
            json!({
                "n": r.partial.n,
                "d": f(&r.partial.d),
                "alpha_n": spinal_core::Real::from_ratio(&r.partial.alpha_n, 64).to_f64(),
                "lower": r.envelope.as_ref().map(|e| f(&e.lower)),
                "upper": r.envelope.as_ref().map(|e| f(&e.upper)),
            })
        })
        .collect();
    Ok(json!(points).to_string())
}

/// SVG number line of the spectrum sample; `alpha` may be empty.
#[wasm_bindgen]
pub fn spectrum_svg(
    seq: &str,
    alpha: &str,
    max_den: u64,
    horizon: usize,
) -> Result<String, String> {
    let seq: TreeSequence = seq.parse().map_err(err)?;
    let alpha = match alpha.trim() {
        "" => None,
        a => Some(parse_alpha(a).map_err(err)?),
    };
    if max_den == 0 || max_den > 200 {
        return Err("max denominator must lie in 1..=200".into());
    }
    let result =
        spectrum_sample(alpha.as_ref(), &seq, max_den, horizon.min(seq.len())).map_err(err)?;
    Ok(result.to_svg())
}
