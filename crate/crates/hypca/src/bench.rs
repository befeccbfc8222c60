//! Per-stage timing, operation-count model, cubes-per-second figures of
//! merit and report emission.
//!
//! Throughput is expressed as CPS (cubes per second), the inverse of the
//! total pipeline time. For cross-platform comparisons it is normalized by
//! resources: `cps / (cores × MHz)` when core counts are meaningful, or
//! `cps / MHz` when they are not (e.g. FPGA fabrics).

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cube::HyperCube;
use crate::error::{Error, Result};
use crate::exec::ExecPlan;
use crate::pipeline::{self, PipelineConfig};

/// Wall-clock milliseconds per pipeline stage. `total_ms` is the sum of the
/// four stages, so it is never smaller than any of them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub pcs: usize,
    pub stage1_ms: f64,
    pub stage2_ms: f64,
    pub stage3_ms: f64,
    pub stage4_ms: f64,
    pub total_ms: f64,
}

/// Descriptor of the machine a measurement ran on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatformDesc {
    pub name: String,
    pub cores: u64,
    pub freq_mhz: f64,
}

impl PlatformDesc {
    pub fn new(name: impl Into<String>, cores: u64, freq_mhz: f64) -> Result<Self> {
        if cores == 0 {
            return Err(Error::invalid("platform must have at least one core"));
        }
        if freq_mhz <= 0.0 || freq_mhz.is_nan() {
            return Err(Error::invalid("platform frequency must be positive"));
        }
        Ok(PlatformDesc {
            name: name.into(),
            cores,
            freq_mhz,
        })
    }
}

/// Operation counts for the four stages under the pipeline's cost model.
///
/// The `covariance` entry reproduces the model's published form,
/// `2·N²·M²`, even though the arithmetic cost of `XᵀX` is `Θ(N·M²)`: the
/// square on `N` overstates the work by a factor of `N`. The physically
/// meaningful count is provided alongside as `covariance_corrected`
/// (`2·N·M² + M²`) together with `total_corrected`; roofline or
/// energy-per-op analyses should use the corrected figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlopEstimate {
    pub mean_removal: u128,
    pub covariance: u128,
    pub eigen: u128,
    pub projection: u128,
    pub total: u128,
    pub covariance_corrected: u128,
    pub total_corrected: u128,
}

impl FlopEstimate {
    /// One-line statement of the covariance-entry divergence, suitable for
    /// report footers.
    pub const ADVISORY: &'static str = "covariance term follows the published model (2*N^2*M^2), \
         which overstates the arithmetic cost of X^T*X (~2*N*M^2) by a factor of N; \
         see covariance_corrected / total_corrected for roofline use";
}

fn mul(a: u128, b: u128) -> Result<u128> {
    a.checked_mul(b).ok_or(Error::FlopOverflow)
}

fn add(a: u128, b: u128) -> Result<u128> {
    a.checked_add(b).ok_or(Error::FlopOverflow)
}

/// Evaluates the four stage formulas — `2(N·M) + M`, `2·N²·M²`, `4·M³`,
/// `e·N·(2·M − 1)` — with overflow-checked 128-bit arithmetic.
pub fn flop_estimate(n_pixels: u64, n_bands: u64, e_vectors: u64) -> Result<FlopEstimate> {
    if n_pixels == 0 || n_bands == 0 || e_vectors == 0 {
        return Err(Error::invalid("flop model needs N, M, e all >= 1"));
    }
    let (n, m, e) = (n_pixels as u128, n_bands as u128, e_vectors as u128);
    let mean_removal = add(mul(2, mul(n, m)?)?, m)?;
    let covariance = mul(2, mul(mul(n, n)?, mul(m, m)?)?)?;
    let eigen = mul(4, mul(m, mul(m, m)?)?)?;
    let projection = mul(e, mul(n, mul(2, m)? - 1)?)?;
    let total = add(add(mean_removal, covariance)?, add(eigen, projection)?)?;
    let covariance_corrected = add(mul(2, mul(n, mul(m, m)?)?)?, mul(m, m)?)?;
    let total_corrected = add(total - covariance, covariance_corrected)?;
    Ok(FlopEstimate {
        mean_removal,
        covariance,
        eigen,
        projection,
        total,
        covariance_corrected,
        total_corrected,
    })
}

/// Cubes per second: `1000 / total_ms`.
pub fn cps(total_ms: f64) -> Result<f64> {
    if total_ms <= 0.0 || !total_ms.is_finite() {
        return Err(Error::invalid(format!(
            "total time must be positive and finite, got {total_ms}"
        )));
    }
    Ok(1000.0 / total_ms)
}

/// Resource-normalized throughput: `cps / (cores × freq_mhz)` when
/// `per_core` is set, `cps / freq_mhz` otherwise.
pub fn cps_normalized(total_ms: f64, platform: &PlatformDesc, per_core: bool) -> Result<f64> {
    let cps = cps(total_ms)?;
    if per_core {
        Ok(cps / (platform.cores as f64 * platform.freq_mhz))
    } else {
        Ok(cps / platform.freq_mhz)
    }
}

/// One pipeline execution within a benchmark.
#[derive(Debug, Clone)]
pub struct BenchRun {
    pub timings: StageTimings,
    pub sweeps_used: usize,
}

/// Executes the full pipeline once per requested component count, timing
/// each stage exclusively with the monotonic clock. File I/O is never
/// inside the timed region.
pub fn run_benchmark(
    cube: &HyperCube,
    pcs_list: &[usize],
    cfg: &PipelineConfig,
    plan: &ExecPlan,
) -> Result<Vec<BenchRun>> {
    if pcs_list.is_empty() {
        return Err(Error::invalid(
            "benchmark needs at least one component count",
        ));
    }
    let mut runs = Vec::with_capacity(pcs_list.len());
    for &pcs in pcs_list {
        let wall = Instant::now();
        let (out, stages) = pipeline::run(cube, pcs, cfg, plan)?;
        let _total_wall = wall.elapsed();
        let timings = StageTimings {
            pcs,
            stage1_ms: stages.mean_center * 1e3,
            stage2_ms: stages.covariance * 1e3,
            stage3_ms: stages.eigen * 1e3,
            stage4_ms: stages.projection * 1e3,
            total_ms: (stages.mean_center + stages.covariance + stages.eigen + stages.projection)
                * 1e3,
        };
        runs.push(BenchRun {
            timings,
            sweeps_used: out.eigen.sweeps_used,
        });
    }
    Ok(runs)
}

/// Image dimensions as recorded in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageDims {
    pub width: usize,
    pub height: usize,
    pub bands: usize,
}

impl ImageDims {
    pub fn of(cube: &HyperCube) -> Self {
        ImageDims {
            width: cube.width(),
            height: cube.height(),
            bands: cube.bands(),
        }
    }

    pub fn label(&self) -> String {
        format!("{}x{}x{}", self.width, self.height, self.bands)
    }
}

/// Stage-level operation counts embedded in a report (64-bit, which covers
/// every image size the pipeline itself can hold in memory).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportFlops {
    pub mean_removal: u64,
    pub covariance: u64,
    pub eigen: u64,
    pub projection: u64,
    pub total: u64,
    pub covariance_corrected: u64,
    pub total_corrected: u64,
}

impl ReportFlops {
    fn from_estimate(est: &FlopEstimate) -> Result<Self> {
        let narrow = |v: u128| u64::try_from(v).map_err(|_| Error::FlopOverflow);
        Ok(ReportFlops {
            mean_removal: narrow(est.mean_removal)?,
            covariance: narrow(est.covariance)?,
            eigen: narrow(est.eigen)?,
            projection: narrow(est.projection)?,
            total: narrow(est.total)?,
            covariance_corrected: narrow(est.covariance_corrected)?,
            total_corrected: narrow(est.total_corrected)?,
        })
    }
}

/// One row of the report's `runs` array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportRun {
    pub pcs: usize,
    pub stage1_ms: f64,
    pub stage2_ms: f64,
    pub stage3_ms: f64,
    pub stage4_ms: f64,
    pub total_ms: f64,
    pub cps: f64,
    pub cps_per_core_mhz: f64,
    pub sweeps_used: usize,
}

/// A complete benchmark report: platform, image, cost model, runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub platform: PlatformDesc,
    pub image: ImageDims,
    pub flops: ReportFlops,
    pub runs: Vec<ReportRun>,
}

/// Assembles a report from measured runs, deriving the throughput metrics.
/// The cost model is evaluated with `e = bands` (the solver extracts every
/// eigenvector).
pub fn build_report(
    platform: &PlatformDesc,
    image: ImageDims,
    runs: &[BenchRun],
) -> Result<BenchReport> {
    if runs.is_empty() {
        return Err(Error::invalid("a report needs at least one run"));
    }
    let est = flop_estimate(
        (image.width * image.height) as u64,
        image.bands as u64,
        image.bands as u64,
    )?;
    let rows = runs
        .iter()
        .map(|r| {
            Ok(ReportRun {
                pcs: r.timings.pcs,
                stage1_ms: r.timings.stage1_ms,
                stage2_ms: r.timings.stage2_ms,
                stage3_ms: r.timings.stage3_ms,
                stage4_ms: r.timings.stage4_ms,
                total_ms: r.timings.total_ms,
                cps: cps(r.timings.total_ms)?,
                cps_per_core_mhz: cps_normalized(r.timings.total_ms, platform, true)?,
                sweeps_used: r.sweeps_used,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchReport {
        platform: platform.clone(),
        image,
        flops: ReportFlops::from_estimate(&est)?,
        runs: rows,
    })
}

/// Output encodings for [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

impl ReportFormat {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(Error::invalid(format!(
                "unknown report format {other:?} (expected json, csv or markdown)"
            ))),
        }
    }
}

/// Renders a throughput value with the tables' two decimals.
pub fn format_cps(v: f64) -> String {
    format!("{v:.2}")
}

/// Renders a normalized throughput in scientific notation, three decimals.
pub fn format_normalized(v: f64) -> String {
    format!("{v:.3e}")
}

impl BenchReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            what: "benchmark report".to_string(),
            msg: e.to_string(),
        })
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(
            "platform,image,pcs,stage1_ms,stage2_ms,stage3_ms,stage4_ms,total_ms,cps,cps_per_core_mhz,sweeps_used\n",
        );
        for r in &self.runs {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                self.platform.name,
                self.image.label(),
                r.pcs,
                r.stage1_ms,
                r.stage2_ms,
                r.stage3_ms,
                r.stage4_ms,
                r.total_ms,
                format_cps(r.cps),
                format_normalized(r.cps_per_core_mhz),
                r.sweeps_used,
            ));
        }
        out
    }

    pub fn to_markdown_string(&self) -> String {
        let mut out = String::new();
        out.push_str(
            "| Platform | Image | #PCs | Stage 1 (ms) | Stage 2 (ms) | Stage 3 (ms) | Stage 4 (ms) | Total (ms) | CPS | CPS/(Core × MHz) | Sweeps |\n",
        );
        out.push_str("|---|---|---|---|---|---|---|---|---|---|---|\n");
        for r in &self.runs {
            out.push_str(&format!(
                "| {} | {} | {} | {:.3} | {:.3} | {:.3} | {:.3} | {:.2} | {} | {} | {} |\n",
                self.platform.name,
                self.image.label(),
                r.pcs,
                r.stage1_ms,
                r.stage2_ms,
                r.stage3_ms,
                r.stage4_ms,
                r.total_ms,
                format_cps(r.cps),
                format_normalized(r.cps_per_core_mhz),
                r.sweeps_used,
            ));
        }
        out
    }
}

/// Writes a report in the requested format. Field order is stable; CPS is
/// rendered with two decimals and normalized CPS in scientific notation
/// with three decimals in the tabular formats.
pub fn emit_report(report: &BenchReport, format: ReportFormat, path: &Path) -> Result<()> {
    let text = match format {
        ReportFormat::Json => report.to_json_string(),
        ReportFormat::Csv => report.to_csv_string(),
        ReportFormat::Markdown => report.to_markdown_string(),
    };
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// A row of the cross-platform comparison table, either measured locally or
/// entered from externally published timings.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub platform: String,
    pub image: String,
    pub pcs: Option<usize>,
    pub total_ms: f64,
    pub cores: Option<u64>,
    pub freq_mhz: f64,
}

impl ComparisonRow {
    pub fn from_report(report: &BenchReport) -> Vec<ComparisonRow> {
        report
            .runs
            .iter()
            .map(|r| ComparisonRow {
                platform: report.platform.name.clone(),
                image: report.image.label(),
                pcs: Some(r.pcs),
                total_ms: r.total_ms,
                cores: Some(report.platform.cores),
                freq_mhz: report.platform.freq_mhz,
            })
            .collect()
    }
}

/// Renders the merged comparison: one row per (platform, image, pcs), with
/// the per-core metric where core counts exist and the frequency-only
/// metric always.
pub fn comparison_markdown(rows: &[ComparisonRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::invalid("comparison needs at least one row"));
    }
    let mut out = String::new();
    out.push_str(
        "| Platform | Image | #PCs | Time (ms) | Cores | Frequency (MHz) | CPS | CPS/(Core × MHz) | CPS/MHz |\n",
    );
    out.push_str("|---|---|---|---|---|---|---|---|---|\n");
    for row in rows {
        let cps_v = cps(row.total_ms)?;
        let per_core = match row.cores {
            Some(cores) => {
                let platform = PlatformDesc::new(row.platform.clone(), cores, row.freq_mhz)?;
                format_normalized(cps_normalized(row.total_ms, &platform, true)?)
            }
            None => "-".to_string(),
        };
        let per_mhz = {
            let platform = PlatformDesc::new(row.platform.clone(), 1, row.freq_mhz)?;
            format_normalized(cps_normalized(row.total_ms, &platform, false)?)
        };
        out.push_str(&format!(
            "| {} | {} | {} | {:.2} | {} | {} | {} | {} | {} |\n",
            row.platform,
            row.image,
            row.pcs.map_or("-".to_string(), |p| p.to_string()),
            row.total_ms,
            row.cores.map_or("-".to_string(), |c| c.to_string()),
            row.freq_mhz,
            format_cps(cps_v),
            per_core,
            per_mhz,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{builtin_signatures, generate_synthetic};

    #[test]
    fn flop_formulas_at_unity() {
        let est = flop_estimate(1, 1, 1).unwrap();
        assert_eq!(est.mean_removal, 3);
        assert_eq!(est.covariance, 2);
        assert_eq!(est.eigen, 4);
        assert_eq!(est.projection, 1);
        assert_eq!(est.total, 10);
    }

    #[test]
    fn flop_mean_removal_matches_exact_arithmetic() {
        let est = flop_estimate(262_144, 224, 1).unwrap();
        assert_eq!(est.mean_removal, 117_440_736);
        assert!(est.total > 1_000_000_000_000_000u128);
        assert_eq!(
            est.total,
            est.mean_removal + est.covariance + est.eigen + est.projection
        );
    }

    #[test]
    fn flop_growth_shapes() {
        // Eigen term is cubic in M, mean/projection linear in N.
        let base = flop_estimate(1000, 64, 1).unwrap();
        let double_m = flop_estimate(1000, 128, 1).unwrap();
        assert_eq!(double_m.eigen, base.eigen * 8);
        let double_n = flop_estimate(2000, 64, 1).unwrap();
        assert_eq!(double_n.projection, base.projection * 2);
        assert_eq!(double_n.mean_removal - 64, (base.mean_removal - 64) * 2);
    }

    #[test]
    fn flop_overflow_is_an_error() {
        assert!(matches!(
            flop_estimate(u64::MAX, u64::MAX, 1),
            Err(Error::FlopOverflow)
        ));
    }

    #[test]
    fn corrected_covariance_is_linear_in_n() {
        let est = flop_estimate(1000, 10, 1).unwrap();
        assert_eq!(est.covariance_corrected, 2 * 1000 * 100 + 100);
        assert_eq!(
            est.total_corrected,
            est.total - est.covariance + est.covariance_corrected
        );
        assert!(FlopEstimate::ADVISORY.contains("2*N^2*M^2"));
    }

    #[test]
    fn cps_basics() {
        assert_eq!(cps(1000.0).unwrap(), 1.0);
        assert_eq!(format_cps(cps(166.48).unwrap()), "6.01");
        assert_eq!(format_cps(cps(1490.0).unwrap()), "0.67");
        assert!(cps(0.0).is_err());
        assert!(cps(-5.0).is_err());
        // Inverse identity within floating tolerance.
        for &t in &[0.125, 3.7, 166.48, 1e6] {
            let v = cps(t).unwrap() * t;
            assert!((v - 1000.0).abs() <= 1e-12 * 1000.0);
        }
    }

    #[test]
    fn normalized_identity_case() {
        let p = PlatformDesc::new("unit", 1, 1.0).unwrap();
        assert_eq!(cps_normalized(1000.0, &p, true).unwrap(), 1.0);
    }

    #[test]
    fn normalized_reproduces_published_fpga_row() {
        // 1490.0 ms at 76 MHz: 0.67 CPS and 8.831e-3 CPS/MHz.
        let p = PlatformDesc::new("fpga", 1, 76.0).unwrap();
        let v = cps_normalized(1490.0, &p, false).unwrap();
        assert!((v - 8.831e-3).abs() < 0.0005e-3, "got {v}");
        assert_eq!(format_normalized(v), "8.831e-3");
    }

    #[test]
    fn normalized_is_monotone_in_resources() {
        let slow = PlatformDesc::new("a", 4, 100.0).unwrap();
        let more_cores = PlatformDesc::new("b", 8, 100.0).unwrap();
        let faster = PlatformDesc::new("c", 4, 200.0).unwrap();
        let base = cps_normalized(50.0, &slow, true).unwrap();
        assert!(cps_normalized(50.0, &more_cores, true).unwrap() < base);
        assert!(cps_normalized(50.0, &faster, true).unwrap() < base);
    }

    #[test]
    fn benchmark_runs_have_consistent_structure() {
        let plan = ExecPlan::serial();
        let sigs = builtin_signatures(10, 4, 3).unwrap();
        let scene = generate_synthetic(&sigs, 24, 24, 4, 60.0, 7, &plan).unwrap();
        let runs =
            run_benchmark(&scene.cube, &[1, 3, 5], &PipelineConfig::default(), &plan).unwrap();
        assert_eq!(runs.len(), 3);
        for r in &runs {
            let t = &r.timings;
            let max_stage = t
                .stage1_ms
                .max(t.stage2_ms)
                .max(t.stage3_ms)
                .max(t.stage4_ms);
            assert!(t.total_ms >= max_stage);
            assert!(t.stage1_ms >= 0.0 && t.stage4_ms >= 0.0);
        }
        // Deterministic numerical outputs: convergence path identical.
        let again =
            run_benchmark(&scene.cube, &[1, 3, 5], &PipelineConfig::default(), &plan).unwrap();
        for (a, b) in runs.iter().zip(&again) {
            assert_eq!(a.sweeps_used, b.sweeps_used);
        }
    }

    #[test]
    fn report_round_trips_through_json() {
        let platform = PlatformDesc::new("local", 8, 3600.0).unwrap();
        let runs = vec![BenchRun {
            timings: StageTimings {
                pcs: 1,
                stage1_ms: 0.5,
                stage2_ms: 1.25,
                stage3_ms: 10.125,
                stage4_ms: 0.0625,
                total_ms: 11.9375,
            },
            sweeps_used: 7,
        }];
        let report = build_report(
            &platform,
            ImageDims {
                width: 10,
                height: 10,
                bands: 5,
            },
            &runs,
        )
        .unwrap();
        let parsed = BenchReport::from_json_str(&report.to_json_string()).unwrap();
        assert_eq!(parsed, report);
        // All StageTimings fields appear in the JSON.
        let text = report.to_json_string();
        for key in [
            "stage1_ms",
            "stage2_ms",
            "stage3_ms",
            "stage4_ms",
            "total_ms",
            "cps",
            "cps_per_core_mhz",
            "sweeps_used",
            "platform",
            "image",
            "runs",
        ] {
            assert!(text.contains(key), "missing {key}");
        }
    }

    #[test]
    fn csv_has_one_header_and_one_row_per_run() {
        let platform = PlatformDesc::new("local", 2, 1000.0).unwrap();
        let mk = |pcs| BenchRun {
            timings: StageTimings {
                pcs,
                stage1_ms: 1.0,
                stage2_ms: 1.0,
                stage3_ms: 1.0,
                stage4_ms: 1.0,
                total_ms: 4.0,
            },
            sweeps_used: 3,
        };
        let report = build_report(
            &platform,
            ImageDims {
                width: 4,
                height: 4,
                bands: 2,
            },
            &[mk(1), mk(3)],
        )
        .unwrap();
        let csv = report.to_csv_string();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("platform,image,pcs,"));
    }

    #[test]
    fn comparison_table_renders_external_rows() {
        let rows = vec![
            ComparisonRow {
                platform: "GPU".to_string(),
                image: "Cuprite (large)".to_string(),
                pcs: Some(1),
                total_ms: 166.48,
                cores: Some(1536),
                freq_mhz: 1058.0,
            },
            ComparisonRow {
                platform: "FPGA".to_string(),
                image: "Cuprite (large)".to_string(),
                pcs: None,
                total_ms: 1490.0,
                cores: None,
                freq_mhz: 76.0,
            },
        ];
        let table = comparison_markdown(&rows).unwrap();
        assert_eq!(table.lines().count(), 4);
        assert!(table.contains("| 6.01 |"));
        assert!(table.contains("| 0.67 |"));
        assert!(table.contains("8.831e-3"));
        // FPGA has no per-core column entry.
        assert!(table.lines().last().unwrap().contains("| - |"));
    }

    #[test]
    fn empty_comparison_is_an_error() {
        assert!(comparison_markdown(&[]).is_err());
    }
}
