//! Named verification checks behind `cdplab verify-suite`.
//!
//! Each check pins one claim the library is built around — exact pure-state
//! values, bracket ordering, isotropic closed forms, diamond-norm
//! cross-validation, tomography round trips — against the canonical fixtures
//! and a handful of seeded random draws. The result is a scoreboard: every
//! check reports pass, fail (with the violated quantity), or skipped.
//!
//! Checks whose expected values depend on operator-Schmidt *rank* decisions
//! are gated: under a non-default `--osr-threshold` their pinned expectations
//! no longer apply, so they report "skipped: threshold override" instead of
//! failing spuriously.

use std::path::PathBuf;

use crate::cdp::{
    cdp_adversarial_estimate, cdp_continuity_check, cdp_isotropic_bounds,
    cdp_lower_bound_pure_lemma, cdp_monotonicity_check, cdp_report, channel_pair_ratio,
    pure_witness_channels, separable_cap_check, CdpReport, TAG_DISCORD, TAG_OSR_REDUCTION,
};
use crate::diamond::{check_watt_inequality, diamond_norm_both, diamond_norm_sdp};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::io::{channel_from_json, state_from_json};
use crate::osd::{
    operator_schmidt, passes_realignment, realignment_sum, DEFAULT_OSR_THRESHOLD,
};
use crate::quantum::{
    isotropic_state, max_entangled_vec, schmidt_decompose, BipartiteState,
    HermitianPreservingMap, PureBipartiteState,
};
use crate::sampling::{
    child_seed, random_bipartite_state, random_channel, random_density_matrix,
    random_separable_mixture, random_traceless_hermitian, rng_for,
};
use crate::tomography::{isotropic_sensitivity_sweep, noise_sensitivity, reconstruct_channel};

/// Knobs for a suite run. `restarts` and `budget` trade time for search
/// quality; every assertion below is chosen to hold at any setting ≥ 1
/// (the pinned values come from search-independent candidate families).
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    /// Directory holding the canonical fixture JSON files; `None` skips the
    /// file-integrity check (the in-memory constructors are still exercised).
    pub fixture_dir: Option<PathBuf>,
    pub seed: u64,
    pub restarts: usize,
    pub budget: usize,
    pub osr_threshold: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            fixture_dir: None,
            seed: 7,
            restarts: 16,
            budget: 8,
            osr_threshold: DEFAULT_OSR_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail(String),
    Skipped(String),
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    /// Which pinned claim the check exercises; bound checks reuse the
    /// provenance tags from [`crate::cdp`].
    pub tag: &'static str,
    pub name: &'static str,
    pub status: CheckStatus,
    /// One-line numeric summary; empty unless the check passed.
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub seed: u64,
    pub checks: Vec<CheckReport>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.checks
            .iter()
            .all(|c| !matches!(c.status, CheckStatus::Fail(_)))
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        let mut pass = 0;
        let mut fail = 0;
        let mut skip = 0;
        for c in &self.checks {
            match c.status {
                CheckStatus::Pass => pass += 1,
                CheckStatus::Fail(_) => fail += 1,
                CheckStatus::Skipped(_) => skip += 1,
            }
        }
        (pass, fail, skip)
    }

    pub fn render(&self) -> String {
        let tag_w = self.checks.iter().map(|c| c.tag.len()).max().unwrap_or(0);
        let name_w = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut out = format!("verification scoreboard (seed {})\n", self.seed);
        for c in &self.checks {
            let (mark, rest) = match &c.status {
                CheckStatus::Pass => ("PASS", c.detail.clone()),
                CheckStatus::Fail(msg) => ("FAIL", msg.clone()),
                CheckStatus::Skipped(msg) => ("SKIP", msg.clone()),
            };
            out.push_str(&format!(
                "  [{mark}] {:tag_w$}  {:name_w$}  {rest}\n",
                c.tag, c.name
            ));
        }
        let (pass, fail, skip) = self.counts();
        out.push_str(&format!(
            "{} checks: {pass} passed, {fail} failed, {skip} skipped\n",
            self.checks.len()
        ));
        out
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Verification(msg()))
    }
}

/// Reports for the fixture states every bound check keys off; errors are kept
/// as strings so each dependent check can surface them independently.
struct SuiteData {
    reports: Vec<(&'static str, BipartiteState, std::result::Result<CdpReport, String>)>,
}

impl SuiteData {
    fn collect(config: &SuiteConfig) -> SuiteData {
        let names = [
            "bell_d2",
            "pure_82",
            "product_d2",
            "classical_on_A_d2",
            "iso_d2_p50",
        ];
        let all = fixtures::state_fixtures();
        let reports = names
            .iter()
            .map(|&name| {
                let state = all
                    .iter()
                    .find(|(n, _)| *n == name)
                    .map(|(_, s)| s.clone())
                    .expect("fixture constructors cover every suite state");
                let report = cdp_report(name, &state, config.budget, child_seed(config.seed, name))
                    .map_err(|e| e.to_string());
                (name, state, report)
            })
            .collect();
        SuiteData { reports }
    }

    fn get(&self, name: &str) -> Result<(&BipartiteState, &CdpReport)> {
        let (_, state, report) = self
            .reports
            .iter()
            .find(|(n, _, _)| *n == name)
            .expect("suite states are collected up front");
        match report {
            Ok(r) => Ok((state, r)),
            Err(e) => Err(Error::Verification(format!("report for {name} failed: {e}"))),
        }
    }
}

fn tagged_value(report: &CdpReport, tag: &str) -> Result<f64> {
    report
        .bound_provenance
        .iter()
        .find(|b| b.tag == tag)
        .map(|b| b.value)
        .ok_or_else(|| {
            Error::Verification(format!(
                "report {} carries no \"{tag}\" entry",
                report.state_id
            ))
        })
}

fn pure_fixture(name: &str) -> PureBipartiteState {
    let amps = match name {
        "bell_d2" => max_entangled_vec(2),
        "pure_82" => {
            let mut v = vec![num_complex::Complex64::new(0.0, 0.0); 4];
            v[0] = num_complex::Complex64::new(0.8f64.sqrt(), 0.0);
            v[3] = num_complex::Complex64::new(0.2f64.sqrt(), 0.0);
            v
        }
        "product_d2" => {
            let mut v = vec![num_complex::Complex64::new(0.0, 0.0); 4];
            v[0] = num_complex::Complex64::new(1.0, 0.0);
            v
        }
        other => panic!("no pure amplitudes for {other}"),
    };
    schmidt_decompose(&amps, 2, 2).expect("fixture amplitudes are normalized")
}

struct IsoPoint {
    d: usize,
    p: f64,
    lo: f64,
    hi: f64,
    estimate: std::result::Result<f64, String>,
}

fn iso_scan(config: &SuiteConfig) -> Vec<IsoPoint> {
    let grid: [(usize, f64); 4] = [(2, 0.25), (2, 0.5), (2, 0.9), (3, 0.5)];
    grid.iter()
        .map(|&(d, p)| {
            let (lo, hi) = cdp_isotropic_bounds(d, p).expect("grid parameters are admissible");
            let estimate = isotropic_state(d, p)
                .and_then(|rho| {
                    cdp_adversarial_estimate(
                        &rho,
                        config.budget,
                        child_seed(config.seed, &format!("iso-{d}-{p}")),
                    )
                })
                .map(|(e, _)| e)
                .map_err(|e| e.to_string());
            IsoPoint { d, p, lo, hi, estimate }
        })
        .collect()
}

fn check_fixture_files(dir: &PathBuf) -> Result<String> {
    let mut count = 0usize;
    for (name, state) in fixtures::state_fixtures() {
        let path = dir.join(format!("{name}.json"));
        let text = std::fs::read_to_string(&path).map_err(|e| {
            Error::Verification(format!("fixture {name}: cannot read {}: {e}", path.display()))
        })?;
        let parsed = state_from_json(&text)
            .map_err(|e| Error::Verification(format!("fixture {name}: {e}")))?;
        let drift = parsed.rho.sub(&state.rho).max_abs();
        ensure(
            parsed.d_a == state.d_a && parsed.d_b == state.d_b && drift <= 1e-12,
            || format!("fixture {name}: file drifted from constructor by {drift:.2e}"),
        )?;
        count += 1;
    }
    for (name, channel) in fixtures::channel_fixtures() {
        let path = dir.join(format!("{name}.json"));
        let text = std::fs::read_to_string(&path).map_err(|e| {
            Error::Verification(format!("fixture {name}: cannot read {}: {e}", path.display()))
        })?;
        let parsed = channel_from_json(&text)
            .map_err(|e| Error::Verification(format!("fixture {name}: {e}")))?;
        let drift = parsed.choi.sub(&channel.choi).max_abs();
        ensure(
            parsed.d_in == channel.d_in && parsed.d_out == channel.d_out && drift <= 1e-12,
            || format!("fixture {name}: file drifted from constructor by {drift:.2e}"),
        )?;
        count += 1;
    }
    Ok(format!("{count} files parsed and matched their constructors"))
}

fn check_pure_exactness(data: &SuiteData) -> Result<String> {
    let cases = [("bell_d2", 0.5), ("pure_82", 0.2), ("product_d2", 0.0)];
    let mut worst = 0f64;
    for (name, want) in cases {
        let (state, report) = data.get(name)?;
        let exact = report.exact.ok_or_else(|| {
            Error::Verification(format!("{name}: report does not mark the state pure"))
        })?;
        ensure((exact - want).abs() <= 1e-12, || {
            format!("{name}: exact value {exact} instead of {want}")
        })?;
        let err = (report.adversarial_estimate - want).abs();
        ensure(err <= 1e-7, || {
            format!("{name}: estimate {} misses exact {want}", report.adversarial_estimate)
        })?;
        ensure(
            report.lower_bound <= want + 1e-9 && want <= report.upper_bound + 1e-9,
            || format!("{name}: bracket [{}, {}] misses {want}", report.lower_bound, report.upper_bound),
        )?;
        // The Schmidt-aligned witness is exact on these fixtures: their
        // Schmidt basis is the computational one, so the generic routing
        // pair attains the second Schmidt weight as its ratio.
        let (l0, l1) = pure_witness_channels(2)?;
        let ratio = channel_pair_ratio(state, &l0, &l1)?;
        ensure((ratio - want).abs() <= 1e-7, || {
            format!("{name}: aligned witness ratio {ratio} misses {want}")
        })?;
        worst = worst.max(err);
    }
    Ok(format!("3 pure fixtures exact; max estimate error {worst:.2e}"))
}

fn check_osd_spectra(threshold: f64) -> Result<String> {
    let mut worst = 0f64;
    let mut points = 0usize;
    for d in [2usize, 3] {
        for k in 0..=4 {
            let p = k as f64 / 4.0;
            let rho = isotropic_state(d, p)?;
            let osd = operator_schmidt(&rho, threshold)?;
            let d2 = d * d;
            worst = worst.max((osd.coefficient(1) - 1.0 / d as f64).abs());
            for i in 2..=d2 {
                worst = worst.max((osd.coefficient(i) - p / d as f64).abs());
            }
            points += 1;
        }
    }
    ensure(worst <= 1e-10, || {
        format!("isotropic spectrum deviates by {worst:.2e}")
    })?;

    let find = |name: &str| -> BipartiteState {
        fixtures::state_fixtures()
            .into_iter()
            .find(|(n, _)| *n == name)
            .map(|(_, s)| s)
            .expect("known fixture")
    };
    let product = operator_schmidt(&find("product_d2"), threshold)?;
    ensure(product.rank == 1, || {
        format!("product state has rank {}", product.rank)
    })?;
    ensure(passes_realignment(&product), || {
        "product state flagged as entangled".into()
    })?;
    let bell = operator_schmidt(&find("bell_d2"), threshold)?;
    ensure(bell.rank == 4, || format!("Bell state has rank {}", bell.rank))?;
    ensure((realignment_sum(&bell) - 2.0).abs() <= 1e-9, || {
        format!("Bell realignment sum {}", realignment_sum(&bell))
    })?;
    ensure(!passes_realignment(&bell), || {
        "Bell state passed the realignment criterion".into()
    })?;
    let classical = operator_schmidt(&find("classical_on_A_d2"), threshold)?;
    ensure(classical.rank <= 2, || {
        format!("classical-on-A state has rank {}", classical.rank)
    })?;
    let boundary = operator_schmidt(&find("iso_d2_p33"), threshold)?;
    ensure((realignment_sum(&boundary) - 1.0).abs() <= 1e-9, || {
        format!("boundary isotropic realignment sum {}", realignment_sum(&boundary))
    })?;
    Ok(format!(
        "{points} isotropic spectra within {worst:.2e}; fixture ranks 1/4/≤2 as pinned"
    ))
}

fn check_separable_cap(config: &SuiteConfig) -> Result<String> {
    let boundary = fixtures::iso_d2_p33();
    let record = separable_cap_check(&boundary)?;
    ensure(record.premise_holds && record.near_premise_boundary, || {
        format!("boundary isotropic state: premise sum {}", record.realignment_sum)
    })?;
    ensure((record.r_last - 1.0 / 6.0).abs() <= 1e-12, || {
        format!("boundary lowest coefficient {} instead of 1/6", record.r_last)
    })?;
    // The decisive discriminator between the two cap constants: the boundary
    // state violates the printed one and obeys the rederived one.
    ensure(!record.within_printed_cap && record.within_rederived_cap, || {
        format!(
            "boundary caps: printed {} rederived {} vs r_last {}",
            record.cap_as_printed, record.cap_rederived, record.r_last
        )
    })?;
    let bell = fixtures::bell_d2();
    ensure(!separable_cap_check(&bell)?.premise_holds, || {
        "Bell state passed the separability premise".into()
    })?;
    let mut rng = rng_for(config.seed, "suite-separable");
    let mut premised = 0usize;
    for _ in 0..8 {
        let rho = random_separable_mixture(&mut rng, 2, 2, 3);
        // Errors if the premise holds and the rederived cap is exceeded.
        if separable_cap_check(&rho)?.premise_holds {
            premised += 1;
        }
    }
    Ok(format!(
        "boundary case splits the caps as pinned; {premised}/8 random mixtures obey the premise"
    ))
}

fn check_tail_lower(data: &SuiteData, config: &SuiteConfig) -> Result<String> {
    for name in ["bell_d2", "pure_82", "iso_d2_p50"] {
        let (state, report) = data.get(name)?;
        let osd = operator_schmidt(state, config.osr_threshold)?;
        let d2 = state.d_a * state.d_a;
        ensure(osd.rank == d2, || format!("{name}: rank {} < {d2}", osd.rank))?;
        let want = osd.coefficient(d2) / (state.d_a as f64).powf(2.5);
        ensure((report.lower_bound - want).abs() <= 1e-12, || {
            format!("{name}: lower bound {} instead of {want}", report.lower_bound)
        })?;
        ensure(report.adversarial_estimate >= report.lower_bound - 1e-9, || {
            format!(
                "{name}: estimate {} below lower bound {}",
                report.adversarial_estimate, report.lower_bound
            )
        })?;
    }
    for name in ["product_d2", "classical_on_A_d2"] {
        let (_, report) = data.get(name)?;
        ensure(report.lower_bound == 0.0, || {
            format!("{name}: rank-deficient state got lower bound {}", report.lower_bound)
        })?;
    }
    // Tail inequality behind the lower bound, on random state/product pairs;
    // the helper errors on violation.
    let mut rng = rng_for(config.seed, "suite-tail");
    for _ in 0..12 {
        let rho = random_bipartite_state(&mut rng, 2, 2, 4);
        let sa = random_density_matrix(&mut rng, 2, 2);
        let sb = random_density_matrix(&mut rng, 2, 2);
        crate::osd::tail_correlation_bound(&rho, &sa, &sb)?;
    }
    Ok("lower bounds match r_{d²}/d^{5/2}; 12 random tail inequalities hold".into())
}

fn check_candidate_upper(data: &SuiteData, config: &SuiteConfig) -> Result<String> {
    for (name, _, _) in &data.reports {
        let (state, report) = data.get(name)?;
        ensure(
            report.adversarial_estimate <= report.upper_bound + 1e-8,
            || {
                format!(
                    "{name}: estimate {} above upper bound {}",
                    report.adversarial_estimate, report.upper_bound
                )
            },
        )?;
        ensure(report.upper_bound <= 1.0 / state.d_a as f64 + 1e-10, || {
            format!("{name}: upper bound {} above 1/dA", report.upper_bound)
        })?;
        let osd = operator_schmidt(state, config.osr_threshold)?;
        let d2 = state.d_a * state.d_a;
        if osd.rank == d2 {
            let cap = osd.coefficient(d2) * ((state.d_a * state.d_b) as f64).sqrt();
            ensure(report.upper_bound <= cap + 1e-9, || {
                format!("{name}: upper bound {} above r_{{d²}}·√(dAdB) = {cap}", report.upper_bound)
            })?;
        } else {
            ensure(report.upper_bound == 0.0, || {
                format!("{name}: rank {} < {d2} but upper bound {}", osd.rank, report.upper_bound)
            })?;
            ensure(report.adversarial_estimate <= 1e-7, || {
                format!(
                    "{name}: rank-deficient state estimated at {}",
                    report.adversarial_estimate
                )
            })?;
        }
    }
    Ok("estimates sit under candidate caps on all 5 fixtures".into())
}

fn check_iso_lower(scan: &[IsoPoint]) -> Result<String> {
    let mut margin = f64::INFINITY;
    for pt in scan {
        let est = pt
            .estimate
            .as_ref()
            .map_err(|e| Error::Verification(format!("d={} p={}: {e}", pt.d, pt.p)))?;
        ensure(*est >= pt.lo - 1e-7, || {
            format!("d={} p={}: estimate {est} below lower band {}", pt.d, pt.p, pt.lo)
        })?;
        margin = margin.min(est - pt.lo);
    }
    Ok(format!("{} grid points above the band; tightest slack {margin:.3}", scan.len()))
}

fn check_iso_upper(scan: &[IsoPoint]) -> Result<String> {
    for pt in scan {
        let want = (2.0 * pt.p / pt.d as f64).min(1.0 / pt.d as f64);
        ensure((pt.hi - want).abs() <= 1e-15, || {
            format!("d={} p={}: band top {} instead of {want}", pt.d, pt.p, pt.hi)
        })?;
        let est = pt
            .estimate
            .as_ref()
            .map_err(|e| Error::Verification(format!("d={} p={}: {e}", pt.d, pt.p)))?;
        ensure(*est <= pt.hi + 1e-7, || {
            format!("d={} p={}: estimate {est} above upper band {}", pt.d, pt.p, pt.hi)
        })?;
    }
    // At p = 1 the band degenerates to the point 1/d.
    for d in [2usize, 3] {
        let (lo, hi) = cdp_isotropic_bounds(d, 1.0)?;
        ensure((lo - hi).abs() <= 1e-12 && (hi - 1.0 / d as f64).abs() <= 1e-12, || {
            format!("d={d}: band at p=1 is [{lo}, {hi}]")
        })?;
    }
    Ok(format!("{} grid points below the band; endpoints pinch at p=1", scan.len()))
}

fn check_discord(data: &SuiteData) -> Result<String> {
    let (_, classical) = data.get("classical_on_A_d2")?;
    let v = tagged_value(classical, TAG_DISCORD)?;
    ensure(v <= 1e-9, || format!("classical-on-A disturbance {v:.2e} not ~0"))?;
    let cases = [("bell_d2", 1.0), ("iso_d2_p50", 0.5)];
    for (name, want) in cases {
        let (_, report) = data.get(name)?;
        let v = tagged_value(report, TAG_DISCORD)?;
        ensure((v - want).abs() <= 1e-6, || {
            format!("{name}: basis disturbance {v} instead of {want}")
        })?;
    }
    for (name, _, _) in &data.reports {
        let (_, report) = data.get(name)?;
        let v = tagged_value(report, TAG_DISCORD)?;
        ensure(v >= report.adversarial_estimate - 1e-6, || {
            format!(
                "{name}: disturbance {v} below estimate {}",
                report.adversarial_estimate
            )
        })?;
    }
    Ok("zero on classical states, pinned on Bell/isotropic, dominates estimates".into())
}

fn check_osr_reduction(data: &SuiteData) -> Result<String> {
    let cases = [("bell_d2", 1.0), ("iso_d2_p50", 0.5)];
    for (name, want) in cases {
        let (_, report) = data.get(name)?;
        let v = tagged_value(report, TAG_OSR_REDUCTION)?;
        ensure((v - want).abs() <= 1e-6, || {
            format!("{name}: rank-reduction floor {v} instead of {want}")
        })?;
    }
    let (_, classical) = data.get("classical_on_A_d2")?;
    let v = tagged_value(classical, TAG_OSR_REDUCTION)?;
    ensure(v <= 1e-9, || {
        format!("already-deficient state got floor {v:.2e}")
    })?;
    Ok("floors pinned at 1, 1/2, and 0 on the three reference states".into())
}

fn check_diamond(config: &SuiteConfig) -> Result<String> {
    let (l0, l1) = fixtures::eq9_pair_d2();
    let diff = HermitianPreservingMap::from_channel_difference(&l0, &l1)?;
    let both = diamond_norm_both(&diff, config.restarts, child_seed(config.seed, "suite-eq9"))?;
    ensure((both.value - 2.0).abs() <= 1e-6, || {
        format!("routing pair distinguishability {} instead of 2", both.value)
    })?;
    let dephase = fixtures::dephase_d2();
    let id = crate::quantum::QuantumChannel::identity(2);
    let v = diamond_norm_sdp(&HermitianPreservingMap::from_channel_difference(&id, &dephase)?)?;
    ensure((v.value - 1.0).abs() <= 1e-6, || {
        format!("identity vs dephasing norm {}", v.value)
    })?;
    let zero = diamond_norm_sdp(&HermitianPreservingMap::from_channel_difference(
        &dephase, &dephase,
    )?)?;
    ensure(zero.value.abs() <= 1e-9, || {
        format!("identical channels got norm {}", zero.value)
    })?;
    let unit = fixtures::random_unitary_d2();
    let alone = diamond_norm_sdp(&unit.as_hp_map())?;
    ensure((alone.value - 1.0).abs() <= 1e-6, || {
        format!("trace-preserving channel alone got norm {}", alone.value)
    })?;
    // Cross-validation on random differences; `diamond_norm_both` errors if
    // the two methods disagree beyond tolerance. The contraction inequality
    // is checked on random Hermitian inputs alongside.
    let mut rng = rng_for(config.seed, "suite-diamond");
    let mut worst_gap = 0f64;
    for t in 0..3 {
        let a = random_channel(&mut rng, 2, 2, 2);
        let b = random_channel(&mut rng, 2, 2, 2);
        let map = HermitianPreservingMap::from_channel_difference(&a, &b)?;
        let r = diamond_norm_both(&map, config.restarts, child_seed(config.seed, &format!("suite-cross-{t}")))?;
        worst_gap = worst_gap.max(r.sdp_gap.unwrap_or(0.0));
        let x = random_traceless_hermitian(&mut rng, 4);
        check_watt_inequality(&map, &x)?;
    }
    Ok(format!(
        "pinned norms 2/1/0/1 reproduced; 3 random cross-validations, max sdp gap {worst_gap:.2e}"
    ))
}

fn check_tomography(config: &SuiteConfig) -> Result<String> {
    let bell = fixtures::bell_d2();
    let truth = fixtures::random_unitary_d2();
    let osd = operator_schmidt(&bell, config.osr_threshold)?;
    let out = crate::quantum::apply_channel_on_a(&truth, &bell)?;
    let rec = reconstruct_channel(&out.rho, &osd, Some(&truth))?;
    let residual = rec.residual_to_truth.expect("truth supplied");
    ensure(residual <= 1e-8, || {
        format!("Bell-probe reconstruction residual {residual:.2e}")
    })?;
    ensure((rec.conditioning - 2.0).abs() <= 1e-9, || {
        format!("Bell probe conditioning {}", rec.conditioning)
    })?;
    let weak = fixtures::iso_d2_p33();
    let osd_weak = operator_schmidt(&weak, config.osr_threshold)?;
    let out_weak = crate::quantum::apply_channel_on_a(&truth, &weak)?;
    let rec_weak = reconstruct_channel(&out_weak.rho, &osd_weak, Some(&truth))?;
    ensure(rec_weak.residual_to_truth.expect("truth supplied") <= 1e-8, || {
        "weak-probe reconstruction lost precision beyond 1e-8".into()
    })?;
    ensure((rec_weak.conditioning - 6.0).abs() <= 1e-6, || {
        format!("boundary isotropic conditioning {}", rec_weak.conditioning)
    })?;
    let classical = fixtures::classical_on_a_d2();
    let osd_classical = operator_schmidt(&classical, config.osr_threshold)?;
    let out_c = crate::quantum::apply_channel_on_a(&truth, &classical)?;
    match reconstruct_channel(&out_c.rho, &osd_classical, Some(&truth)) {
        Err(Error::NotTomographicallyComplete { rank, needed }) => {
            ensure(rank < needed, || format!("odd completeness report {rank}/{needed}"))?;
        }
        Ok(_) => {
            return Err(Error::Verification(
                "rank-deficient probe was accepted for reconstruction".into(),
            ))
        }
        Err(e) => return Err(e),
    }
    let clean = noise_sensitivity(&bell, &truth, 0.0, 3, child_seed(config.seed, "suite-noise"))?;
    ensure(clean.mean_residual <= 1e-9, || {
        format!("zero-noise mean residual {:.2e}", clean.mean_residual)
    })?;
    let rows = isotropic_sensitivity_sweep(
        2,
        &[1.0, 0.25],
        &[1e-6],
        3,
        child_seed(config.seed, "suite-sweep"),
    )?;
    ensure(rows.len() == 2 && rows[1].mean_residual > rows[0].mean_residual, || {
        format!(
            "noise amplification not monotone: {:.2e} then {:.2e}",
            rows[0].mean_residual, rows[1].mean_residual
        )
    })?;
    Ok(format!(
        "round trips ≤ 1e-8 at conditioning 2 and 6; deficient probe rejected; noise scales with 1/r_min"
    ))
}

fn check_witness_attainment(data: &SuiteData) -> Result<String> {
    let mut worst = 0f64;
    for name in ["bell_d2", "pure_82", "iso_d2_p50"] {
        let (state, report) = data.get(name)?;
        let (w0, w1) = &report.witness_channels;
        ensure(w0.d_in == state.d_a && w1.d_in == state.d_a, || {
            format!("{name}: witness acts on dimension {}", w0.d_in)
        })?;
        let ratio = channel_pair_ratio(state, w0, w1)?;
        let err = (ratio - report.adversarial_estimate).abs();
        ensure(err <= 1e-6, || {
            format!(
                "{name}: witness re-scores to {ratio}, report says {}",
                report.adversarial_estimate
            )
        })?;
        worst = worst.max(err);
    }
    Ok(format!("witnesses re-attain their estimates; max gap {worst:.2e}"))
}

fn check_stability(config: &SuiteConfig) -> Result<String> {
    let near = cdp_continuity_check(
        &fixtures::iso_d2_p50(),
        &fixtures::iso_d2_p33(),
        config.budget,
        child_seed(config.seed, "suite-cont"),
    )?;
    ensure(near.within_margin, || {
        format!(
            "estimate gap {} exceeds trace distance {} plus margin",
            near.estimate_gap, near.trace_norm_distance
        )
    })?;
    let same = cdp_continuity_check(
        &fixtures::bell_d2(),
        &fixtures::bell_d2(),
        config.budget,
        child_seed(config.seed, "suite-cont-same"),
    )?;
    ensure(same.estimate_gap <= 1e-9, || {
        format!("identical states estimated {} apart", same.estimate_gap)
    })?;
    // Local processing on B cannot help; the helpers error on violation.
    cdp_monotonicity_check(
        &fixtures::bell_d2(),
        &fixtures::dephase_d2(),
        config.budget,
        child_seed(config.seed, "suite-mono-bell"),
    )?;
    let unitary = cdp_monotonicity_check(
        &fixtures::pure_82(),
        &fixtures::random_unitary_d2(),
        config.budget,
        child_seed(config.seed, "suite-mono-82"),
    )?;
    match (unitary.exact_before, unitary.exact_after) {
        (Some(b), Some(a)) => ensure((a - b).abs() <= 1e-9, || {
            format!("unitary on B moved the exact value {b} → {a}")
        })?,
        _ => {
            return Err(Error::Verification(
                "unitary processing lost purity in the monotonicity record".into(),
            ))
        }
    }
    // Pure lower-bound inequality: tight on the routing pair, held on random
    // difference maps.
    let bell = pure_fixture("bell_d2");
    let (l0, l1) = pure_witness_channels(2)?;
    let map = HermitianPreservingMap::from_channel_difference(&l0, &l1)?;
    let (lhs, rhs) = cdp_lower_bound_pure_lemma(&bell, &map)?;
    ensure((lhs - rhs).abs() <= 1e-6 && (lhs - 1.0).abs() <= 1e-6, || {
        format!("routing pair should saturate at 1: {lhs} vs {rhs}")
    })?;
    let mut rng = rng_for(config.seed, "suite-lemma");
    let pure82 = pure_fixture("pure_82");
    for _ in 0..6 {
        let a = random_channel(&mut rng, 2, 2, 2);
        let b = random_channel(&mut rng, 2, 2, 2);
        let m = HermitianPreservingMap::from_channel_difference(&a, &b)?;
        cdp_lower_bound_pure_lemma(&bell, &m)?;
        cdp_lower_bound_pure_lemma(&pure82, &m)?;
    }
    Ok("continuity, B-processing monotonicity, and 12 pure-state inequalities hold".into())
}

fn run_check(
    tag: &'static str,
    name: &'static str,
    gated: bool,
    override_active: bool,
    f: impl FnOnce() -> Result<String>,
) -> CheckReport {
    if gated && override_active {
        return CheckReport {
            tag,
            name,
            status: CheckStatus::Skipped("skipped: threshold override".into()),
            detail: String::new(),
        };
    }
    match f() {
        Ok(detail) => CheckReport { tag, name, status: CheckStatus::Pass, detail },
        Err(e) => CheckReport { tag, name, status: CheckStatus::Fail(e.to_string()), detail: String::new() },
    }
}

/// Runs every check and returns the scoreboard. Never errors: any failure
/// inside a check is recorded on its row.
pub fn run_suite(config: &SuiteConfig) -> SuiteReport {
    let override_active = config.osr_threshold != DEFAULT_OSR_THRESHOLD;
    let data = SuiteData::collect(config);
    let scan = iso_scan(config);

    let checks = vec![
        match &config.fixture_dir {
            Some(dir) => run_check("fixtures", "fixture-files", false, override_active, || {
                check_fixture_files(dir)
            }),
            None => CheckReport {
                tag: "fixtures",
                name: "fixture-files",
                status: CheckStatus::Skipped("no fixture directory supplied".into()),
                detail: String::new(),
            },
        },
        run_check("thm1", "pure-state-exactness", false, override_active, || {
            check_pure_exactness(&data)
        }),
        run_check("osd", "operator-schmidt-spectra", true, override_active, || {
            check_osd_spectra(config.osr_threshold)
        }),
        run_check("realignment", "separable-coefficient-cap", false, override_active, || {
            check_separable_cap(config)
        }),
        run_check("thm2-lower", "tail-lower-bound", true, override_active, || {
            check_tail_lower(&data, config)
        }),
        run_check("thm2-upper", "candidate-upper-bound", true, override_active, || {
            check_candidate_upper(&data, config)
        }),
        run_check("eq12-lower", "isotropic-lower-band", false, override_active, || {
            check_iso_lower(&scan)
        }),
        run_check("eq12-upper", "isotropic-upper-band", false, override_active, || {
            check_iso_upper(&scan)
        }),
        run_check("discord", "classical-basis-disturbance", false, override_active, || {
            check_discord(&data)
        }),
        run_check("osr-reduction", "rank-reduction-floor", true, override_active, || {
            check_osr_reduction(&data)
        }),
        run_check("adversarial", "witness-attainment", false, override_active, || {
            check_witness_attainment(&data)
        }),
        run_check("diamond", "diamond-cross-validation", false, override_active, || {
            check_diamond(config)
        }),
        run_check("tomography", "channel-reconstruction", true, override_active, || {
            check_tomography(config)
        }),
        run_check("stability", "continuity-and-monotonicity", false, override_active, || {
            check_stability(config)
        }),
    ];

    SuiteReport { seed: config.seed, checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;
    use std::path::Path;

    fn repo_fixture_dir() -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
    }

    fn fast_config() -> SuiteConfig {
        SuiteConfig {
            fixture_dir: Some(repo_fixture_dir()),
            seed: 7,
            restarts: 8,
            budget: 4,
            osr_threshold: DEFAULT_OSR_THRESHOLD,
        }
    }

    #[test]
    fn full_suite_passes_on_the_shipped_fixtures() {
        let report = run_suite(&fast_config());
        let rendered = report.render();
        assert!(report.all_passed(), "scoreboard:\n{rendered}");
        let (pass, fail, skip) = report.counts();
        assert_eq!(pass, report.checks.len());
        assert_eq!((fail, skip), (0, 0));
        assert!(rendered.contains("[PASS] thm1"));
        assert!(rendered.contains("0 failed"));
    }

    #[test]
    fn threshold_override_skips_rank_dependent_checks() {
        let config = SuiteConfig {
            osr_threshold: 0.3,
            ..fast_config()
        };
        let report = run_suite(&config);
        let skipped: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| matches!(&c.status, CheckStatus::Skipped(m) if m == "skipped: threshold override"))
            .map(|c| c.name)
            .collect();
        assert_eq!(
            skipped,
            vec![
                "operator-schmidt-spectra",
                "tail-lower-bound",
                "candidate-upper-bound",
                "rank-reduction-floor",
                "channel-reconstruction",
            ]
        );
        // The ungated checks still run and pass.
        assert!(report.all_passed(), "{}", report.render());
        assert!(report.render().contains("skipped: threshold override"));
    }

    #[test]
    fn corrupted_fixture_fails_by_name() {
        let dir = tempfile::tempdir().unwrap();
        for entry in fs::read_dir(repo_fixture_dir()).unwrap() {
            let entry = entry.unwrap();
            fs::copy(entry.path(), dir.path().join(entry.file_name())).unwrap();
        }
        fs::write(dir.path().join("bell_d2.json"), "{ not json").unwrap();
        let config = SuiteConfig {
            fixture_dir: Some(dir.path().to_path_buf()),
            ..fast_config()
        };
        let report = run_suite(&config);
        assert!(!report.all_passed());
        let failed = report
            .checks
            .iter()
            .find(|c| c.name == "fixture-files")
            .unwrap();
        match &failed.status {
            CheckStatus::Fail(msg) => assert!(msg.contains("bell_d2"), "{msg}"),
            other => panic!("expected a failure, got {other:?}"),
        }
        // Only the file check fails; the math checks are unaffected.
        assert!(report
            .checks
            .iter()
            .all(|c| c.name == "fixture-files" || !matches!(c.status, CheckStatus::Fail(_))));
    }

    #[test]
    fn missing_fixture_directory_is_reported_not_failed() {
        let config = SuiteConfig {
            fixture_dir: None,
            ..fast_config()
        };
        let report = run_suite(&config);
        let files = report
            .checks
            .iter()
            .find(|c| c.name == "fixture-files")
            .unwrap();
        assert!(matches!(&files.status, CheckStatus::Skipped(m) if m.contains("no fixture directory")));
        assert!(report.all_passed());
    }
}
