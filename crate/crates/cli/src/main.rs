use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use spinal_core::dimension::{dimension_report, DimensionReport};
use spinal_core::orders::{verify_level_action, Side, DEFAULT_DEGREE_CAP};
use spinal_core::spectrum::{spectrum_sample, SpectrumResult};
use spinal_core::synthesis::{parse_alpha, synthesize_with_budget, DEFAULT_DIGIT_BUDGET};
use spinal_core::{Error, Portrait, SpinalKind, Strategy, SynthesisTrace, TreeSequence};

const TOOL: &str = "spinal";
const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Spinal branch groups: sequence synthesis, level actions and dimension data.
#[derive(Parser, Debug)]
#[command(name = "spinal", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "subcommand", rename_all = "lowercase")]
enum Command {
    /// Synthesize a valency sequence for a target dimension.
    Synth(SynthArgs),
    /// Partial dimensions and envelopes along a sequence.
    Dim(DimArgs),
    /// Compare a level action with the iterated wreath product.
    Verify(VerifyArgs),
    /// Sample the rational spectrum sets.
    Spectrum(SpectrumArgs),
    /// Dump the labels of a spinal generator.
    Portrait(PortraitArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Serialize)]
struct Output {
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write to a file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Significant digits for printed reals.
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u16).range(1..=2000))]
    digits: u16,
}

#[derive(Args, Debug, Serialize)]
struct SynthArgs {
    /// Target dimension, a decimal or `a/b`.
    #[arg(long)]
    alpha: String,
    #[arg(long, default_value_t = 8)]
    terms: usize,
    #[arg(long, default_value = "minimal")]
    strategy: Strategy,
    /// Largest number of decimal digits allowed in a valency.
    #[arg(long, default_value_t = DEFAULT_DIGIT_BUDGET)]
    budget: u64,
    #[command(flatten)]
    output: Output,
}

/// A sequence given explicitly or synthesized from `--alpha`/`--terms`.
#[derive(Args, Debug, Serialize)]
struct SeqSource {
    /// Comma-separated valencies, or `synth` to synthesize from `--alpha`.
    #[arg(long)]
    seq: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    terms: Option<usize>,
    #[arg(long, default_value = "minimal")]
    strategy: Strategy,
    #[arg(long, default_value_t = DEFAULT_DIGIT_BUDGET)]
    budget: u64,
}

#[derive(Args, Debug, Serialize)]
struct DimArgs {
    #[command(flatten)]
    source: SeqSource,
    /// Last level; rows run over 1..=levels.
    #[arg(long)]
    levels: usize,
    /// Working precision in bits.
    #[arg(long, default_value_t = 128)]
    precision: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    #[arg(long)]
    seq: String,
    #[arg(long)]
    level: usize,
    #[arg(long, default_value = "G")]
    group: Side,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest level size to expand into permutations.
    #[arg(long, default_value_t = DEFAULT_DEGREE_CAP)]
    cap: usize,
    /// Report wall-clock time (makes output run-dependent).
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct SpectrumArgs {
    #[command(flatten)]
    source: SeqSource,
    #[arg(long)]
    max_den: u64,
    /// Number of leading terms available to witnesses; defaults to all.
    #[arg(long)]
    horizon: Option<usize>,
    /// Also write an SVG number line.
    #[arg(long)]
    svg: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct PortraitArgs {
    #[arg(long)]
    r#gen: SpinalKind,
    #[arg(long)]
    seq: String,
    #[arg(long)]
    depth: usize,
    #[command(flatten)]
    output: Output,
}

enum Failure {
    Usage(String),
    Mismatch,
    Refused(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Budget { .. } | Error::CapExceeded { .. } | Error::ValencyTooLarge { .. } => {
                Failure::Refused(e.to_string())
            }
            Error::Arithmetic(_) => Failure::Other(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// The rendered result: CSV rows or a JSON value.
struct Rendered {
    csv: Vec<String>,
    json: Value,
}

fn alpha_arg(s: &str) -> Result<BigRational, Failure> {
    parse_alpha(s).map_err(|e| usage(format!("--alpha: {e}")))
}

fn seq_arg(s: &str) -> Result<TreeSequence, Failure> {
    s.parse().map_err(|e| usage(format!("--seq: {e}")))
}

impl SeqSource {
    fn validate(&self) -> Result<(), Failure> {
        match self.seq.as_deref() {
            None | Some("synth") => {
                if self.alpha.is_none() || self.terms.is_none() {
                    return Err(usage("a synthesized sequence needs --alpha and --terms"));
                }
                if self.terms == Some(0) {
                    return Err(usage("--terms must be at least 1"));
                }
            }
            Some(s) => {
                seq_arg(s)?;
            }
        }
        if let Some(a) = &self.alpha {
            alpha_arg(a)?;
        }
        Ok(())
    }

    fn alpha(&self) -> Result<Option<BigRational>, Failure> {
        self.alpha.as_deref().map(alpha_arg).transpose()
    }

    fn resolve(&self) -> Result<TreeSequence, Failure> {
        match self.seq.as_deref() {
            Some(s) if s != "synth" => seq_arg(s),
            _ => {
                let alpha = self.alpha()?.expect("validated");
                let trace = synthesize_with_budget(
                    &alpha,
                    self.terms.expect("validated"),
                    self.strategy,
                    self.budget,
                )?;
                trace.sequence().ok_or_else(|| {
                    usage(format!(
                        "alpha = {} needs no sequence ({})",
                        trace.alpha,
                        trace.degenerate.map(|d| d.to_string()).unwrap_or_default()
                    ))
                })
            }
        }
    }
}

fn synth(a: &SynthArgs) -> Result<Rendered, Failure> {
    let alpha = alpha_arg(&a.alpha)?;
    if a.terms == 0 {
        return Err(usage("--terms must be at least 1"));
    }
    let trace: SynthesisTrace = synthesize_with_budget(&alpha, a.terms, a.strategy, a.budget)?;
    let digits = a.output.digits as usize;
    Ok(Rendered {
        csv: trace.csv_rows(digits),
        json: trace.to_json(digits),
    })
}

fn dim(a: &DimArgs) -> Result<Rendered, Failure> {
    if a.levels == 0 {
        return Err(usage("--levels must be at least 1"));
    }
    if a.precision < 64 {
        return Err(usage("--precision must be at least 64 bits"));
    }
    a.source.validate()?;
    if let Some(t) = a.source.terms {
        if a.source.seq.as_deref().unwrap_or("synth") == "synth" && a.levels > t {
            return Err(usage(format!("--levels {} exceeds --terms {t}", a.levels)));
        }
    }
    let seq = a.source.resolve()?;
    let alpha = a.source.alpha()?;
    let report: DimensionReport =
        dimension_report(&seq, alpha.as_ref(), 1..=a.levels, a.precision)?;
    let digits = a.output.digits as usize;
    Ok(Rendered {
        csv: report.csv_rows(digits),
        json: report.to_json(digits),
    })
}

fn verify(a: &VerifyArgs) -> Result<(Rendered, bool), Failure> {
    let seq = seq_arg(&a.seq)?;
    if a.level == 0 || a.level > seq.len() {
        return Err(usage(format!("--level must lie in 1..={}", seq.len())));
    }
    let mut report = verify_level_action(&seq, a.level, a.group, a.seed, a.cap)?;
    if !a.timing {
        report.elapsed_ms = None;
    }
    let json = serde_json::to_value(&report).map_err(|e| Failure::Other(e.to_string()))?;
    Ok((
        Rendered {
            csv: report.csv_rows(),
            json,
        },
        report.matches,
    ))
}

fn spectrum(a: &SpectrumArgs) -> Result<(Rendered, SpectrumResult), Failure> {
    if a.max_den == 0 {
        return Err(usage("--max-den must be at least 1"));
    }
    a.source.validate()?;
    let seq = a.source.resolve()?;
    let horizon = a.horizon.unwrap_or(seq.len());
    if horizon > seq.len() {
        return Err(usage(format!(
            "--horizon {horizon} exceeds the sequence length {}",
            seq.len()
        )));
    }
    let alpha = a.source.alpha()?;
    let result = spectrum_sample(alpha.as_ref(), &seq, a.max_den, horizon)?;
    let digits = a.output.digits as usize;
    Ok((
        Rendered {
            csv: result.csv_rows(digits),
            json: result.to_json(digits),
        },
        result,
    ))
}

fn portrait(a: &PortraitArgs) -> Result<Rendered, Failure> {
    let seq = seq_arg(&a.seq)?;
    if a.depth > seq.len() {
        return Err(usage(format!(
            "--depth {} exceeds the sequence length {}",
            a.depth,
            seq.len()
        )));
    }
    let p = Portrait::spinal(a.r#gen, &seq, a.depth)?;
    let lines = p.dump();
    let mut csv = vec!["level,path,cycles".to_string()];
    for l in &lines {
        let path: Vec<String> = l.path.iter().map(|x| x.to_string()).collect();
        csv.push(format!("{},{},\"{}\"", l.level, path.join(" "), l.cycles));
    }
    Ok(Rendered {
        csv,
        json: json!({ "generator": a.r#gen, "depth": a.depth, "labels": lines }),
    })
}

fn output_of(cmd: &Command) -> &Output {
    match cmd {
        Command::Synth(a) => &a.output,
        Command::Dim(a) => &a.output,
        Command::Verify(a) => &a.output,
        Command::Spectrum(a) => &a.output,
        Command::Portrait(a) => &a.output,
    }
}

fn emit(cmd: &Command, rendered: Rendered) -> Result<(), Failure> {
    let out = output_of(cmd);
    let config = serde_json::to_value(cmd).map_err(|e| Failure::Other(e.to_string()))?;
    let text = match out.format {
        Format::Csv => {
            let mut s = format!("# {TOOL} {VERSION}\n# config: {config}\n");
            for row in rendered.csv {
                s.push_str(&row);
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let doc = json!({
                "tool": { "name": TOOL, "version": VERSION },
                "config": config,
                "result": rendered.json,
            });
            let mut s =
                serde_json::to_string_pretty(&doc).map_err(|e| Failure::Other(e.to_string()))?;
            s.push('\n');
            s
        }
    };
    match &out.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::Other(format!("{}: {e}", path.display())))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Other(e.to_string())),
    }
}

fn run(cmd: &Command) -> Result<(), Failure> {
    match cmd {
        Command::Synth(a) => emit(cmd, synth(a)?),
        Command::Dim(a) => emit(cmd, dim(a)?),
        Command::Portrait(a) => emit(cmd, portrait(a)?),
        Command::Verify(a) => {
            let (rendered, matches) = verify(a)?;
            emit(cmd, rendered)?;
            if matches {
                Ok(())
            } else {
                Err(Failure::Mismatch)
            }
        }
        Command::Spectrum(a) => {
            let (rendered, result) = spectrum(a)?;
            if let Some(path) = &a.svg {
                fs::write(path, result.to_svg())
                    .map_err(|e| Failure::Other(format!("{}: {e}", path.display())))?;
            }
            emit(cmd, rendered)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch) => {
            eprintln!("spinal: level action does not match the wreath product");
            ExitCode::from(3)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("spinal: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Refused(msg)) => {
            eprintln!("spinal: {msg}");
            ExitCode::from(4)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("spinal: {msg}");
            ExitCode::from(1)
        }
    }
}
