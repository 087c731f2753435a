//! `cdplab` — batch front end for the discrimination-power library.
//!
//! Every randomized procedure hangs off the single `--seed`, so reruns with
//! the same flags produce byte-identical JSON. `CDPLAB_THREADS` caps the
//! worker pool (results do not depend on the thread count).

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cdplab::cdp::{cdp_report, DEFAULT_ESTIMATOR_BUDGET};
use cdplab::diamond::{diamond_norm_ascent, diamond_norm_sdp};
use cdplab::io::{self, OutputFormat};
use cdplab::osd::{operator_schmidt, DEFAULT_OSR_THRESHOLD};
use cdplab::quantum::{apply_channel_on_a, HermitianPreservingMap};
use cdplab::sampling::child_seed;
use cdplab::suite::{run_suite, CheckStatus, SuiteConfig};
use cdplab::tomography::{isotropic_sensitivity_sweep, noise_sensitivity, reconstruct_channel};
use cdplab::{Error, Result};

fn parse_format(s: &str) -> std::result::Result<OutputFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args)]
struct OutputArgs {
    /// Write the report to this file instead of stdout
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Report format: json, csv, or text
    #[arg(long, default_value = "json", value_parser = parse_format)]
    format: OutputFormat,
}

#[derive(Parser)]
#[command(name = "cdplab", version, about = "Quantifies how useful a bipartite state is for telling quantum channels apart", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Operator Schmidt spectrum, rank, and realignment verdict of a state
    Osd {
        /// Bipartite state file (JSON: dA, dB, matrix_real, matrix_imag)
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        /// Schmidt coefficients at or below this value count as zero
        #[arg(long, default_value_t = DEFAULT_OSR_THRESHOLD)]
        osr_threshold: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Diamond-norm distance between two channels, solved two independent ways
    Diamond {
        /// First channel file (JSON: d_in, d_out, kraus)
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        /// Second channel file; must act on the same dimensions
        #[arg(long, value_name = "PATH")]
        input_b: PathBuf,
        /// Restarts for the ascent solver that cross-checks the SDP
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Discrimination-power bracket, adversarial estimate, and witness channels
    Cdp {
        /// Bipartite state file
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        /// Random channel pairs the adversarial search may spend
        #[arg(long, default_value_t = DEFAULT_ESTIMATOR_BUDGET)]
        budget: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Reconstruct a channel through a probe state, or sweep noise sensitivity
    Tomography {
        /// Probe state file; omit to run the canonical qubit sensitivity sweep
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
        /// Channel to push through the probe (required with --input)
        #[arg(long, value_name = "PATH")]
        input_b: Option<PathBuf>,
        /// Random noise directions per noise level
        #[arg(long, default_value_t = 6)]
        budget: usize,
        /// Schmidt coefficients at or below this value count as zero
        #[arg(long, default_value_t = DEFAULT_OSR_THRESHOLD)]
        osr_threshold: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run every named verification check and print the scoreboard
    VerifySuite {
        /// Directory with the canonical fixture files (default: ./fixtures when present)
        #[arg(long, value_name = "DIR")]
        fixtures: Option<PathBuf>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Restarts for ascent-style searches inside the checks
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        /// Random channel pairs per adversarial search inside the checks
        #[arg(long, default_value_t = 8)]
        budget: usize,
        /// Schmidt coefficients at or below this value count as zero
        #[arg(long, default_value_t = DEFAULT_OSR_THRESHOLD)]
        osr_threshold: f64,
        /// Write the scoreboard to this file instead of stdout
        #[arg(long, value_name = "PATH")]
        output: Option<PathBuf>,
        /// Scoreboard format: text or json
        #[arg(long, default_value = "text", value_parser = parse_format)]
        format: OutputFormat,
    },
}

fn init_threads() -> Result<()> {
    match std::env::var("CDPLAB_THREADS") {
        Err(_) => Ok(()),
        Ok(raw) => {
            let n: usize = raw.parse().map_err(|_| {
                Error::Validation(format!("CDPLAB_THREADS={raw:?} is not a positive integer"))
            })?;
            if n == 0 {
                return Err(Error::Validation(
                    "CDPLAB_THREADS must be at least 1".into(),
                ));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Error::Validation(format!("cannot size the worker pool: {e}")))
        }
    }
}

/// Writes the report to the file or stdout — same bytes either way, always
/// newline-terminated, with I/O failures surfaced instead of swallowed.
fn emit(output: &Option<PathBuf>, text: &str) -> Result<()> {
    let mut bytes = text.as_bytes().to_vec();
    if !text.ends_with('\n') {
        bytes.push(b'\n');
    }
    match output {
        Some(path) => fs::write(path, &bytes)
            .map_err(|e| Error::Validation(format!("cannot write {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            let stdout = std::io::stdout();
            let mut handle = stdout.lock();
            handle
                .write_all(&bytes)
                .and_then(|_| handle.flush())
                .map_err(|e| Error::Validation(format!("cannot write report: {e}")))
        }
    }
}

fn cmd_osd(input: &PathBuf, osr_threshold: f64, out: &OutputArgs) -> Result<ExitCode> {
    let state = io::read_state(input)?;
    let osd = operator_schmidt(&state, osr_threshold)?;
    let report = io::osd_report(&osd);
    emit(&out.output, &io::render_osd(&report, out.format))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_diamond(
    input: &PathBuf,
    input_b: &PathBuf,
    restarts: usize,
    seed: u64,
    out: &OutputArgs,
) -> Result<ExitCode> {
    let a = io::read_channel(input)?;
    let b = io::read_channel(input_b)?;
    let map = HermitianPreservingMap::from_channel_difference(&a, &b)?;
    let sdp = diamond_norm_sdp(&map)?;
    let ascent = diamond_norm_ascent(&map, restarts, seed)?;
    let report = io::diamond_report_pair(&sdp, &ascent);
    emit(&out.output, &io::render_diamond(&report, out.format))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_cdp(input: &PathBuf, budget: usize, seed: u64, out: &OutputArgs) -> Result<ExitCode> {
    let state = io::read_state(input)?;
    let state_id = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "state".into());
    let report = cdp_report(&state_id, &state, budget, seed)?;
    emit(&out.output, &io::render_cdp(&io::cdp_report_file(&report), out.format))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_tomography(
    input: &Option<PathBuf>,
    input_b: &Option<PathBuf>,
    budget: usize,
    osr_threshold: f64,
    seed: u64,
    out: &OutputArgs,
) -> Result<ExitCode> {
    let text = match input {
        None => {
            // Canonical qubit sweep: reconstruction error against the
            // smallest Schmidt coefficient of the probe.
            let rows = isotropic_sensitivity_sweep(
                2,
                &[1.0, 0.75, 0.5, 0.25, 0.1],
                &[1e-8, 1e-6, 1e-4],
                budget,
                seed,
            )?;
            io::render_sweep(&rows, out.format)
        }
        Some(state_path) => {
            let channel_path = input_b.as_ref().ok_or_else(|| {
                Error::Validation(
                    "tomography with --input needs --input-b (the channel to reconstruct)".into(),
                )
            })?;
            let state = io::read_state(state_path)?;
            let channel = io::read_channel(channel_path)?;
            let osd = operator_schmidt(&state, osr_threshold)?;
            let output_state = apply_channel_on_a(&channel, &state)?;
            let rec = reconstruct_channel(&output_state.rho, &osd, Some(&channel))?;
            let noise = [0.0, 1e-6]
                .iter()
                .map(|&level| {
                    noise_sensitivity(&state, &channel, level, budget, child_seed(seed, "noise"))
                })
                .collect::<Result<Vec<_>>>()?;
            io::render_tomography(&io::tomography_report(&rec, &noise), out.format)
        }
    };
    emit(&out.output, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn suite_json(report: &cdplab::suite::SuiteReport) -> String {
    let checks: Vec<serde_json::Value> = report
        .checks
        .iter()
        .map(|c| {
            let (status, message) = match &c.status {
                CheckStatus::Pass => ("pass", c.detail.clone()),
                CheckStatus::Fail(m) => ("fail", m.clone()),
                CheckStatus::Skipped(m) => ("skipped", m.clone()),
            };
            serde_json::json!({
                "tag": c.tag,
                "name": c.name,
                "status": status,
                "message": message,
            })
        })
        .collect();
    let doc = serde_json::json!({ "seed": report.seed, "checks": checks });
    serde_json::to_string_pretty(&doc).expect("scoreboard serialization is total")
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify_suite(
    fixtures: &Option<PathBuf>,
    seed: u64,
    restarts: usize,
    budget: usize,
    osr_threshold: f64,
    output: &Option<PathBuf>,
    format: OutputFormat,
) -> Result<ExitCode> {
    let fixture_dir = match fixtures {
        Some(dir) => {
            if !dir.is_dir() {
                return Err(Error::Validation(format!(
                    "fixture directory {} does not exist",
                    dir.display()
                )));
            }
            Some(dir.clone())
        }
        None => {
            let default = PathBuf::from("fixtures");
            default.is_dir().then_some(default)
        }
    };
    let config = SuiteConfig { fixture_dir, seed, restarts, budget, osr_threshold };
    let report = run_suite(&config);
    let text = match format {
        OutputFormat::Json => suite_json(&report),
        OutputFormat::Csv => {
            let mut out = String::from("tag,name,status,message\n");
            for c in &report.checks {
                let (status, message) = match &c.status {
                    CheckStatus::Pass => ("pass", c.detail.clone()),
                    CheckStatus::Fail(m) => ("fail", m.clone()),
                    CheckStatus::Skipped(m) => ("skipped", m.clone()),
                };
                out.push_str(&format!("{},{},{status},{message:?}\n", c.tag, c.name));
            }
            out
        }
        OutputFormat::Text => report.render(),
    };
    emit(output, &text)?;
    if report.all_passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(4))
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Osd { input, osr_threshold, out } => cmd_osd(input, *osr_threshold, out),
        Command::Diamond { input, input_b, restarts, seed, out } => {
            cmd_diamond(input, input_b, *restarts, *seed, out)
        }
        Command::Cdp { input, budget, seed, out } => cmd_cdp(input, *budget, *seed, out),
        Command::Tomography { input, input_b, budget, osr_threshold, seed, out } => {
            cmd_tomography(input, input_b, *budget, *osr_threshold, *seed, out)
        }
        Command::VerifySuite { fixtures, seed, restarts, budget, osr_threshold, output, format } => {
            cmd_verify_suite(fixtures, *seed, *restarts, *budget, *osr_threshold, output, *format)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
