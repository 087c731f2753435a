//! On-disk formats and report rendering. States and channels travel as
//! JSON with explicit real/imaginary parts (row-major, exact dimensions
//! enforced); analysis results render as JSON (full precision, stable
//! schema), CSV (one row per record), or text (6 significant digits).

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cdp::CdpReport;
use crate::diamond::{DiamondMethod, DiamondResult};
use crate::error::{Error, Result};
use crate::matrixkit::ComplexMatrix;
use crate::osd::{r_cn, r_cn_refined, realignment_sum, OperatorSchmidtDecomposition};
use crate::quantum::{BipartiteState, QuantumChannel};
use crate::tomography::{NoiseStats, ReconstructionResult, SweepRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "text" => Ok(OutputFormat::Text),
            other => Err(Error::Parse(format!(
                "unknown format {other:?}; expected json, csv, or text"
            ))),
        }
    }
}

/// 6 significant digits for human-facing output.
fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (5 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

fn matrix_parts(m: &ComplexMatrix) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let real = (0..m.rows)
        .map(|r| (0..m.cols).map(|c| m.get(r, c).re).collect())
        .collect();
    let imag = (0..m.rows)
        .map(|r| (0..m.cols).map(|c| m.get(r, c).im).collect())
        .collect();
    (real, imag)
}

fn matrix_from_parts(
    real: &[Vec<f64>],
    imag: &[Vec<f64>],
    rows: usize,
    cols: usize,
    what: &str,
) -> Result<ComplexMatrix> {
    for (name, part) in [("real", real), ("imag", imag)] {
        if part.len() != rows || part.iter().any(|row| row.len() != cols) {
            return Err(Error::Parse(format!(
                "{what}: {name} part must be {rows}x{cols} row-major"
            )));
        }
    }
    Ok(ComplexMatrix::from_fn(rows, cols, |r, c| {
        Complex64::new(real[r][c], imag[r][c])
    }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StateFile {
    #[serde(rename = "dA")]
    pub d_a: usize,
    #[serde(rename = "dB")]
    pub d_b: usize,
    pub matrix_real: Vec<Vec<f64>>,
    pub matrix_imag: Vec<Vec<f64>>,
}

pub fn state_to_json(state: &BipartiteState) -> String {
    let (matrix_real, matrix_imag) = matrix_parts(&state.rho);
    let file = StateFile {
        d_a: state.d_a,
        d_b: state.d_b,
        matrix_real,
        matrix_imag,
    };
    serde_json::to_string_pretty(&file).expect("state serialization is total")
}

pub fn state_from_json(text: &str) -> Result<BipartiteState> {
    let file: StateFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("state file: {e}")))?;
    let dim = file.d_a * file.d_b;
    let m = matrix_from_parts(&file.matrix_real, &file.matrix_imag, dim, dim, "state file")?;
    BipartiteState::new(file.d_a, file.d_b, m)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct KrausFile {
    pub real: Vec<Vec<f64>>,
    pub imag: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ChannelFile {
    pub d_in: usize,
    pub d_out: usize,
    pub kraus: Vec<KrausFile>,
}

pub fn channel_to_file(channel: &QuantumChannel) -> ChannelFile {
    ChannelFile {
        d_in: channel.d_in,
        d_out: channel.d_out,
        kraus: channel
            .kraus
            .iter()
            .map(|k| {
                let (real, imag) = matrix_parts(k);
                KrausFile { real, imag }
            })
            .collect(),
    }
}

pub fn channel_to_json(channel: &QuantumChannel) -> String {
    serde_json::to_string_pretty(&channel_to_file(channel)).expect("channel serialization is total")
}

pub fn channel_from_file(file: &ChannelFile) -> Result<QuantumChannel> {
    let kraus = file
        .kraus
        .iter()
        .enumerate()
        .map(|(i, k)| {
            matrix_from_parts(
                &k.real,
                &k.imag,
                file.d_out,
                file.d_in,
                &format!("channel file, Kraus operator {i}"),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    QuantumChannel::from_kraus(file.d_in, file.d_out, kraus)
}

pub fn channel_from_json(text: &str) -> Result<QuantumChannel> {
    let file: ChannelFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("channel file: {e}")))?;
    channel_from_file(&file)
}

pub fn read_state(path: &Path) -> Result<BipartiteState> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("could not read {}: {e}", path.display())))?;
    state_from_json(&text)
}

pub fn read_channel(path: &Path) -> Result<QuantumChannel> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("could not read {}: {e}", path.display())))?;
    channel_from_json(&text)
}

/// Coefficient spectrum, rank, the realignment verdict, and — on square
/// splits — the comparison against both separable-spectrum cap constants.
#[derive(Debug, Serialize)]
pub struct OsdReport {
    pub coefficients: Vec<f64>,
    pub rank: usize,
    pub threshold: f64,
    pub realignment_sum: f64,
    pub realignment_verdict: String,
    pub cap_comparison: Option<CapComparison>,
}

#[derive(Debug, Serialize)]
pub struct CapComparison {
    pub r_last: f64,
    pub cap_as_printed: f64,
    pub cap_rederived: f64,
    pub within_printed_cap: bool,
    pub within_rederived_cap: bool,
}

pub fn osd_report(osd: &OperatorSchmidtDecomposition) -> OsdReport {
    let sum = realignment_sum(osd);
    let verdict = if sum <= 1.0 + 1e-10 {
        "passes".to_string()
    } else {
        "fails (entangled)".to_string()
    };
    let cap_comparison = (osd.d_a == osd.d_b).then(|| {
        let d = osd.d_a;
        let r_last = osd.coefficient(d * d);
        let printed = r_cn(d).expect("square split has d >= 1");
        let rederived = r_cn_refined(d).expect("square split has d >= 1");
        CapComparison {
            r_last,
            cap_as_printed: printed,
            cap_rederived: rederived,
            within_printed_cap: r_last <= printed + 1e-9,
            within_rederived_cap: r_last <= rederived + 1e-9,
        }
    });
    OsdReport {
        coefficients: osd.coefficients.clone(),
        rank: osd.rank,
        threshold: osd.threshold,
        realignment_sum: sum,
        realignment_verdict: verdict,
        cap_comparison,
    }
}

pub fn render_osd(report: &OsdReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            serde_json::to_string_pretty(report).expect("report serialization is total")
        }
        OutputFormat::Csv => {
            let mut out = String::from("k,coefficient\n");
            for (k, r) in report.coefficients.iter().enumerate() {
                out.push_str(&format!("{},{}\n", k + 1, r));
            }
            out
        }
        OutputFormat::Text => {
            let mut out = String::new();
            let spectrum: Vec<String> = report.coefficients.iter().map(|r| sig6(*r)).collect();
            out.push_str(&format!("coefficients: [{}]\n", spectrum.join(", ")));
            out.push_str(&format!("rank: {}\n", report.rank));
            out.push_str(&format!("threshold: {}\n", sig6(report.threshold)));
            out.push_str(&format!(
                "realignment sum: {} ({})\n",
                sig6(report.realignment_sum),
                report.realignment_verdict
            ));
            if let Some(cap) = &report.cap_comparison {
                out.push_str(&format!(
                    "lowest coefficient {} vs caps: printed {} ({}), rederived {} ({})\n",
                    sig6(cap.r_last),
                    sig6(cap.cap_as_printed),
                    if cap.within_printed_cap { "within" } else { "exceeded" },
                    sig6(cap.cap_rederived),
                    if cap.within_rederived_cap { "within" } else { "exceeded" },
                ));
            }
            out
        }
    }
}

#[derive(Debug, Serialize)]
pub struct DiamondReport {
    pub value: f64,
    pub method: String,
    pub sdp_gap: Option<f64>,
    pub iterations: usize,
    pub sdp_value: Option<f64>,
    pub ascent_value: Option<f64>,
    pub witness_input: Option<Vec<(f64, f64)>>,
}

fn witness_pairs(result: &DiamondResult) -> Option<Vec<(f64, f64)>> {
    result
        .witness_input
        .as_ref()
        .map(|v| v.iter().map(|z| (z.re, z.im)).collect())
}

pub fn diamond_report(result: &DiamondResult) -> DiamondReport {
    DiamondReport {
        value: result.value,
        method: result.method.as_str().to_string(),
        sdp_gap: result.sdp_gap,
        iterations: result.iterations,
        sdp_value: matches!(result.method, DiamondMethod::Sdp | DiamondMethod::Both)
            .then_some(result.value),
        ascent_value: matches!(result.method, DiamondMethod::Ascent).then_some(result.value),
        witness_input: witness_pairs(result),
    }
}

/// Combined report when both solvers ran on the same map.
pub fn diamond_report_pair(sdp: &DiamondResult, ascent: &DiamondResult) -> DiamondReport {
    DiamondReport {
        value: sdp.value,
        method: DiamondMethod::Both.as_str().to_string(),
        sdp_gap: sdp.sdp_gap,
        iterations: sdp.iterations + ascent.iterations,
        sdp_value: Some(sdp.value),
        ascent_value: Some(ascent.value),
        witness_input: witness_pairs(ascent),
    }
}

pub fn render_diamond(report: &DiamondReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            serde_json::to_string_pretty(report).expect("report serialization is total")
        }
        OutputFormat::Csv => {
            let mut out = String::from("value,method,sdp_gap,iterations\n");
            out.push_str(&format!(
                "{},{},{},{}\n",
                report.value,
                report.method,
                report.sdp_gap.map_or(String::new(), |g| g.to_string()),
                report.iterations
            ));
            out
        }
        OutputFormat::Text => {
            let mut out = format!(
                "diamond norm: {} (method {})\n",
                sig6(report.value),
                report.method
            );
            if let Some(g) = report.sdp_gap {
                out.push_str(&format!("sdp certificate gap: {}\n", sig6(g)));
            }
            if let (Some(s), Some(a)) = (report.sdp_value, report.ascent_value) {
                out.push_str(&format!("sdp {} / ascent {}\n", sig6(s), sig6(a)));
            }
            out.push_str(&format!("iterations: {}\n", report.iterations));
            out
        }
    }
}

#[derive(Debug, Serialize)]
pub struct TaggedValue {
    pub tag: String,
    pub value: f64,
}

#[derive(Debug, Serialize)]
pub struct CdpReportFile {
    pub state_id: String,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub adversarial_estimate: f64,
    pub exact: Option<f64>,
    pub bound_provenance: Vec<TaggedValue>,
    pub witness_channels: (ChannelFile, ChannelFile),
}

pub fn cdp_report_file(report: &CdpReport) -> CdpReportFile {
    CdpReportFile {
        state_id: report.state_id.clone(),
        lower_bound: report.lower_bound,
        upper_bound: report.upper_bound,
        adversarial_estimate: report.adversarial_estimate,
        exact: report.exact,
        bound_provenance: report
            .bound_provenance
            .iter()
            .map(|b| TaggedValue {
                tag: b.tag.to_string(),
                value: b.value,
            })
            .collect(),
        witness_channels: (
            channel_to_file(&report.witness_channels.0),
            channel_to_file(&report.witness_channels.1),
        ),
    }
}

pub fn render_cdp(report: &CdpReportFile, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            serde_json::to_string_pretty(report).expect("report serialization is total")
        }
        OutputFormat::Csv => {
            let mut out = String::from("tag,value\n");
            for b in &report.bound_provenance {
                out.push_str(&format!("{},{}\n", b.tag, b.value));
            }
            out
        }
        OutputFormat::Text => {
            let mut out = format!("state: {}\n", report.state_id);
            out.push_str(&format!(
                "bracket: [{}, {}] with estimate {}\n",
                sig6(report.lower_bound),
                sig6(report.upper_bound),
                sig6(report.adversarial_estimate)
            ));
            if let Some(x) = report.exact {
                out.push_str(&format!("exact (pure state): {}\n", sig6(x)));
            }
            for b in &report.bound_provenance {
                out.push_str(&format!("  {:<14} {}\n", b.tag, sig6(b.value)));
            }
            out
        }
    }
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("p,r_min,noise_level,mean_residual,max_residual,trials\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.p, r.r_min, r.noise_level, r.mean_residual, r.max_residual, r.trials
        ));
    }
    out
}

#[derive(Debug, Serialize)]
struct SweepRowFile {
    p: f64,
    r_min: f64,
    noise_level: f64,
    mean_residual: f64,
    max_residual: f64,
    trials: usize,
}

pub fn render_sweep(rows: &[SweepRow], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => sweep_to_csv(rows),
        OutputFormat::Json => {
            let rows: Vec<SweepRowFile> = rows
                .iter()
                .map(|r| SweepRowFile {
                    p: r.p,
                    r_min: r.r_min,
                    noise_level: r.noise_level,
                    mean_residual: r.mean_residual,
                    max_residual: r.max_residual,
                    trials: r.trials,
                })
                .collect();
            serde_json::to_string_pretty(&rows).expect("sweep serialization is total")
        }
        OutputFormat::Text => {
            let mut out = String::from("p        r_min    noise      mean_resid   max_resid\n");
            for r in rows {
                out.push_str(&format!(
                    "{:<8} {:<8} {:<10} {:<12} {}\n",
                    sig6(r.p),
                    sig6(r.r_min),
                    sig6(r.noise_level),
                    sig6(r.mean_residual),
                    sig6(r.max_residual)
                ));
            }
            out
        }
    }
}

/// Report for a single probe-based reconstruction: how well the channel was
/// recovered through the supplied state, and how the error responds to
/// output-state noise.
#[derive(Debug, Serialize)]
pub struct TomographyReportFile {
    pub residual_to_truth: Option<f64>,
    pub conditioning: f64,
    pub noise: Vec<NoiseRowFile>,
}

#[derive(Debug, Serialize)]
pub struct NoiseRowFile {
    pub noise_level: f64,
    pub mean_residual: f64,
    pub max_residual: f64,
    pub trials: usize,
}

pub fn tomography_report(
    reconstruction: &ReconstructionResult,
    noise: &[NoiseStats],
) -> TomographyReportFile {
    TomographyReportFile {
        residual_to_truth: reconstruction.residual_to_truth,
        conditioning: reconstruction.conditioning,
        noise: noise
            .iter()
            .map(|n| NoiseRowFile {
                noise_level: n.noise_level,
                mean_residual: n.mean_residual,
                max_residual: n.max_residual,
                trials: n.trials,
            })
            .collect(),
    }
}

pub fn render_tomography(report: &TomographyReportFile, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            serde_json::to_string_pretty(report).expect("report serialization is total")
        }
        OutputFormat::Csv => {
            let mut out = String::from("noise_level,mean_residual,max_residual,trials\n");
            for n in &report.noise {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    n.noise_level, n.mean_residual, n.max_residual, n.trials
                ));
            }
            out
        }
        OutputFormat::Text => {
            let mut out = String::new();
            if let Some(r) = report.residual_to_truth {
                out.push_str(&format!("residual to supplied channel: {}\n", sig6(r)));
            }
            out.push_str(&format!(
                "conditioning (1/r_min): {}\n",
                sig6(report.conditioning)
            ));
            for n in &report.noise {
                out.push_str(&format!(
                    "  noise {:<10} mean residual {:<12} max {}\n",
                    sig6(n.noise_level),
                    sig6(n.mean_residual),
                    sig6(n.max_residual)
                ));
            }
            out
        }
    }
}
