//! Command-line interface: `synth`, `reduce`, `eigen`, `bench`, `report`.
//!
//! Shared flags (`--workers`, `--mode`, `--seed`, `--config`) resolve with
//! precedence CLI > config file > environment (`HYPCA_WORKERS`) > defaults.
//! The config file is plain `key=value` lines (`workers`, `mode`, `seed`).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};

use crate::bench::{
    build_report, comparison_markdown, emit_report, flop_estimate, BenchReport, ComparisonRow,
    FlopEstimate, ImageDims, PlatformDesc, ReportFormat,
};
use crate::cube::{
    builtin_signatures, cube_paths, generate_synthetic, load_cube, load_signatures_csv,
    render_band_pgm, save_cube,
};
use crate::error::{Error, Result};
use crate::exec::{ExecMode, ExecPlan};
use crate::jacobi::{
    jacobi_eigen, write_eigen_csv, write_history_csv, JacobiConfig, PivotStrategy,
};
use crate::matrix::SymMatrix;
use crate::pipeline::{self, PipelineConfig};
use crate::stages::{explained_variance, write_band_means_csv, write_scores};
use crate::Precision;

pub const WORKERS_ENV: &str = "HYPCA_WORKERS";

#[derive(Parser, Debug)]
#[command(
    name = "hypca",
    version,
    about = "Jacobi-based PCA for hyperspectral image cubes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic hyperspectral cube from mixed spectral signatures
    Synth(SynthArgs),
    /// Run the full reduction pipeline on a cube and export its products
    Reduce(ReduceArgs),
    /// Eigendecompose a standalone symmetric matrix file
    Eigen(EigenArgs),
    /// Time the pipeline stages and emit a benchmark report
    Bench(BenchArgs),
    /// Merge benchmark reports (and external timings) into one comparison table
    Report(ReportArgs),
}

#[derive(Args, Debug, Default, Clone)]
struct SharedArgs {
    /// Worker threads (default: HYPCA_WORKERS, else all hardware threads)
    #[arg(long)]
    workers: Option<usize>,
    /// Execution mode: deterministic | fast
    #[arg(long, value_parser = parse_mode)]
    mode: Option<ExecMode>,
    /// Seed for every random quantity
    #[arg(long)]
    seed: Option<u64>,
    /// key=value config file overriding environment defaults
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Image width in pixels
    #[arg(long)]
    width: usize,
    /// Image height in pixels
    #[arg(long)]
    height: usize,
    /// Spectral band count
    #[arg(long)]
    bands: usize,
    /// Number of signatures mixed per scene
    #[arg(long, default_value_t = 10)]
    endmembers: usize,
    /// Signal-to-noise ratio in dB, or "inf" to disable noise
    #[arg(long, value_parser = parse_snr, default_value = "70")]
    snr_db: f64,
    /// Signature CSV to mix from (default: builtin procedural library)
    #[arg(long)]
    signatures: Option<PathBuf>,
    /// Size of the builtin library endmembers are drawn from
    #[arg(long)]
    library_size: Option<usize>,
    /// Output path stem; writes <out>.hdr.json and <out>.raw
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    shared: SharedArgs,
}

#[derive(Args, Debug)]
struct ReduceArgs {
    /// Input path stem; reads <input>.hdr.json and <input>.raw
    #[arg(long)]
    input: PathBuf,
    /// Number of principal components to keep
    #[arg(long, default_value_t = 1)]
    pcs: usize,
    /// Compute covariance as this many pixel-blocked partial sums
    #[arg(long)]
    blocked: Option<usize>,
    /// Pivot strategy: classical | cyclic | parallel
    #[arg(long, value_parser = parse_strategy, default_value = "cyclic")]
    strategy: PivotStrategy,
    /// Relative stop factor for the eigensolver
    #[arg(long, default_value_t = 1e-10)]
    epsilon_rel: f64,
    /// Sweep budget for the eigensolver
    #[arg(long, default_value_t = 50)]
    max_sweeps: usize,
    /// Accumulation precision: double | single
    #[arg(long, value_parser = parse_precision, default_value = "double")]
    precision: Precision,
    /// Project the raw cube instead of the centered one
    #[arg(long)]
    project_raw: bool,
    /// Also render the first principal component as <out>.pc1.pgm
    #[arg(long)]
    render_pc1: bool,
    /// Write per-sweep convergence history as <out>.history.csv
    #[arg(long)]
    history: bool,
    /// Output path stem for scores, eigen summary and band means
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    shared: SharedArgs,
}

#[derive(Args, Debug)]
struct EigenArgs {
    /// Matrix file: CSV rows, or raw little-endian f32 with --raw
    #[arg(long)]
    matrix: PathBuf,
    /// Treat the matrix file as raw row-major little-endian f32
    #[arg(long)]
    raw: bool,
    /// Pivot strategy: classical | cyclic | parallel
    #[arg(long, value_parser = parse_strategy, default_value = "cyclic")]
    strategy: PivotStrategy,
    /// Relative stop factor for the eigensolver
    #[arg(long, default_value_t = 1e-10)]
    epsilon_rel: f64,
    /// Sweep budget for the eigensolver
    #[arg(long, default_value_t = 50)]
    max_sweeps: usize,
    /// Write the eigen summary CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write per-sweep convergence history CSV here
    #[arg(long)]
    history: Option<PathBuf>,
    #[command(flatten)]
    shared: SharedArgs,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Input cube stem; omit to benchmark a generated synthetic cube
    #[arg(long)]
    input: Option<PathBuf>,
    /// Synthetic width when no input cube is given
    #[arg(long, default_value_t = 100)]
    width: usize,
    /// Synthetic height when no input cube is given
    #[arg(long, default_value_t = 100)]
    height: usize,
    /// Synthetic band count when no input cube is given
    #[arg(long, default_value_t = 50)]
    bands: usize,
    /// Synthetic endmember count
    #[arg(long, default_value_t = 10)]
    endmembers: usize,
    /// Synthetic SNR in dB, or "inf"
    #[arg(long, value_parser = parse_snr, default_value = "70")]
    snr_db: f64,
    /// Component counts to benchmark, comma-separated
    #[arg(long, value_parser = parse_pcs_list, default_value = "1,3,5")]
    pcs: PcsList,
    /// Pivot strategy: classical | cyclic | parallel
    #[arg(long, value_parser = parse_strategy, default_value = "cyclic")]
    strategy: PivotStrategy,
    /// Accumulation precision: double | single
    #[arg(long, value_parser = parse_precision, default_value = "double")]
    precision: Precision,
    /// Compute covariance as this many pixel-blocked partial sums
    #[arg(long)]
    blocked: Option<usize>,
    /// Report format: json | csv | markdown
    #[arg(long, value_parser = parse_format, default_value = "json")]
    format: ReportFormat,
    /// Report output path
    #[arg(long)]
    out: PathBuf,
    /// Platform label recorded in the report
    #[arg(long, default_value = "local")]
    platform_name: String,
    /// Core count recorded in the report (default: hardware threads)
    #[arg(long)]
    cores: Option<u64>,
    /// Clock in MHz recorded in the report (normalized CPS divides by it)
    #[arg(long, default_value_t = 1000.0)]
    freq_mhz: f64,
    #[command(flatten)]
    shared: SharedArgs,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Benchmark report JSON files to merge
    #[arg(long, num_args = 1.., value_delimiter = ' ')]
    inputs: Vec<PathBuf>,
    /// External timing rows: "name,image,total_ms,freq_mhz[,cores]"
    #[arg(long)]
    external: Vec<String>,
    /// Comparison table output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses and executes one invocation. `--help`/`--version` print and
/// return success; argument errors and pipeline errors come back as `Err`.
pub fn run_from<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                ErrorKind::DisplayHelp
                    | ErrorKind::DisplayVersion
                    | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
            ) =>
        {
            print!("{e}");
            return Ok(());
        }
        Err(e) => {
            let line = e
                .to_string()
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ")
                .to_string();
            return Err(Error::invalid(line));
        }
    };
    match cli.command {
        Command::Synth(args) => cmd_synth(&args),
        Command::Reduce(args) => cmd_reduce(&args),
        Command::Eigen(args) => cmd_eigen(&args),
        Command::Bench(args) => cmd_bench(&args),
        Command::Report(args) => cmd_report(&args),
    }
}

/// Long help text for every subcommand, concatenated (used by the docs
/// tests to check flag coverage).
pub fn full_help_text() -> String {
    let mut cmd = Cli::command();
    let mut out = cmd.render_long_help().to_string();
    for sub in Cli::command().get_subcommands() {
        out.push('\n');
        out.push_str(&sub.clone().render_long_help().to_string());
    }
    out
}

// ---------------------------------------------------------------------------
// Shared-flag resolution
// ---------------------------------------------------------------------------

#[derive(Debug, Default, Clone, PartialEq)]
struct ConfigFile {
    workers: Option<usize>,
    mode: Option<ExecMode>,
    seed: Option<u64>,
}

fn parse_config(text: &str) -> Result<ConfigFile> {
    let mut cfg = ConfigFile::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            what: format!("config line {}", lineno + 1),
            msg: "expected key=value".to_string(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let bad = |msg: String| Error::Parse {
            what: format!("config line {}", lineno + 1),
            msg,
        };
        match key {
            "workers" => {
                cfg.workers = Some(
                    value
                        .parse()
                        .map_err(|_| bad(format!("bad worker count {value:?}")))?,
                )
            }
            "mode" => cfg.mode = Some(parse_mode(value).map_err(bad)?),
            "seed" => {
                cfg.seed = Some(
                    value
                        .parse()
                        .map_err(|_| bad(format!("bad seed {value:?}")))?,
                )
            }
            other => return Err(bad(format!("unknown key {other:?}"))),
        }
    }
    Ok(cfg)
}

/// CLI > config file > environment > defaults.
fn resolve_with(shared: &SharedArgs, env_workers: Option<&str>) -> Result<(ExecPlan, u64)> {
    let cfg = match &shared.config {
        Some(path) => {
            parse_config(&std::fs::read_to_string(path).map_err(|e| Error::io(path.clone(), e))?)?
        }
        None => ConfigFile::default(),
    };
    let env_workers = match env_workers {
        Some(text) => Some(text.parse::<usize>().map_err(|_| {
            Error::invalid(format!("{WORKERS_ENV} must be an integer, got {text:?}"))
        })?),
        None => None,
    };
    let workers = shared
        .workers
        .or(cfg.workers)
        .or(env_workers)
        .unwrap_or_else(|| ExecPlan::default_parallel().workers);
    let mode = shared.mode.or(cfg.mode).unwrap_or(ExecMode::Deterministic);
    let seed = shared.seed.or(cfg.seed).unwrap_or(0);
    Ok((ExecPlan::new(workers, mode)?, seed))
}

fn resolve_shared(shared: &SharedArgs) -> Result<(ExecPlan, u64)> {
    let env = std::env::var(WORKERS_ENV).ok();
    resolve_with(shared, env.as_deref())
}

// ---------------------------------------------------------------------------
// Value parsers
// ---------------------------------------------------------------------------

fn parse_mode(s: &str) -> std::result::Result<ExecMode, String> {
    match s {
        "deterministic" => Ok(ExecMode::Deterministic),
        "fast" => Ok(ExecMode::Fast),
        other => Err(format!(
            "unknown mode {other:?} (expected deterministic or fast)"
        )),
    }
}

fn parse_snr(s: &str) -> std::result::Result<f64, String> {
    match s.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        _ => s
            .parse::<f64>()
            .map_err(|_| format!("bad SNR {s:?} (a number in dB, or \"inf\")"))
            .and_then(|v| {
                if v.is_nan() {
                    Err("SNR cannot be NaN".to_string())
                } else {
                    Ok(v)
                }
            }),
    }
}

fn parse_strategy(s: &str) -> std::result::Result<PivotStrategy, String> {
    PivotStrategy::parse(s).map_err(|e| e.to_string())
}

fn parse_precision(s: &str) -> std::result::Result<Precision, String> {
    Precision::parse(s).map_err(|e| e.to_string())
}

fn parse_format(s: &str) -> std::result::Result<ReportFormat, String> {
    ReportFormat::parse(s).map_err(|e| e.to_string())
}

#[derive(Debug, Clone)]
struct PcsList(Vec<usize>);

fn parse_pcs_list(s: &str) -> std::result::Result<PcsList, String> {
    let list: std::result::Result<Vec<usize>, _> = s
        .split(',')
        .map(|part| part.trim().parse::<usize>())
        .collect();
    match list {
        Ok(v) if !v.is_empty() && v.iter().all(|&p| p > 0) => Ok(PcsList(v)),
        _ => Err(format!("bad component list {s:?} (e.g. \"1,3,5\")")),
    }
}

fn parse_external(s: &str) -> Result<ComparisonRow> {
    let fields: Vec<&str> = s.split(',').map(str::trim).collect();
    if fields.len() < 4 || fields.len() > 5 {
        return Err(Error::invalid(format!(
            "external timing {s:?} must be name,image,total_ms,freq_mhz[,cores]"
        )));
    }
    let total_ms: f64 = fields[2]
        .parse()
        .map_err(|_| Error::invalid(format!("bad total_ms in external timing {s:?}")))?;
    let freq_mhz: f64 = fields[3]
        .parse()
        .map_err(|_| Error::invalid(format!("bad freq_mhz in external timing {s:?}")))?;
    let cores = match fields.get(4) {
        Some(text) => Some(
            text.parse::<u64>()
                .map_err(|_| Error::invalid(format!("bad cores in external timing {s:?}")))?,
        ),
        None => None,
    };
    Ok(ComparisonRow {
        platform: fields[0].to_string(),
        image: fields[1].to_string(),
        pcs: None,
        total_ms,
        cores,
        freq_mhz,
    })
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn signatures_for(
    path: Option<&Path>,
    bands: usize,
    endmembers: usize,
    library_size: Option<usize>,
    seed: u64,
) -> Result<crate::cube::SignatureSet> {
    match path {
        Some(p) => {
            let sigs = load_signatures_csv(p)?;
            if sigs.bands() != bands {
                return Err(Error::invalid(format!(
                    "signature file has {} bands but the scene wants {bands}",
                    sigs.bands()
                )));
            }
            Ok(sigs)
        }
        None => builtin_signatures(bands, library_size.unwrap_or(endmembers.max(10)), seed),
    }
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let (plan, seed) = resolve_shared(&args.shared)?;
    let sigs = signatures_for(
        args.signatures.as_deref(),
        args.bands,
        args.endmembers,
        args.library_size,
        seed,
    )?;
    let scene = generate_synthetic(
        &sigs,
        args.width,
        args.height,
        args.endmembers,
        args.snr_db,
        seed,
        &plan,
    )?;
    let (hdr, raw) = cube_paths(&args.out);
    save_cube(&scene.cube, &hdr, &raw)?;
    println!("wrote {}", hdr.display());
    println!("wrote {}", raw.display());
    if scene.empirical_snr_db.is_finite() {
        println!("empirical SNR: {:.3} dB", scene.empirical_snr_db);
    } else {
        println!("empirical SNR: inf (noise disabled)");
    }
    Ok(())
}

fn cmd_reduce(args: &ReduceArgs) -> Result<()> {
    let (plan, _seed) = resolve_shared(&args.shared)?;
    let (hdr, raw) = cube_paths(&args.input);
    let cube = load_cube(&hdr, &raw)?;
    let cfg = PipelineConfig {
        jacobi: JacobiConfig {
            strategy: args.strategy,
            epsilon_rel: args.epsilon_rel,
            max_sweeps: args.max_sweeps,
            record_history: args.history,
            precision: args.precision,
            normalize_signs: false,
        },
        blocked_splits: args.blocked,
        precision: args.precision,
        project_raw: args.project_raw,
    };
    let (out, _stages) = pipeline::run(&cube, args.pcs, &cfg, &plan)?;

    let stem = args.out.as_os_str().to_string_lossy().to_string();
    let scores_raw = PathBuf::from(format!("{stem}.scores.raw"));
    let scores_json = PathBuf::from(format!("{stem}.scores.json"));
    write_scores(&out.projection, &scores_raw, &scores_json)?;
    let eigen_csv = PathBuf::from(format!("{stem}.eigen.csv"));
    write_eigen_csv(&out.eigen, &eigen_csv)?;
    let means_csv = PathBuf::from(format!("{stem}.means.csv"));
    write_band_means_csv(&out.centered.band_means, &means_csv)?;
    if args.history {
        write_history_csv(&out.eigen, &PathBuf::from(format!("{stem}.history.csv")))?;
    }
    if args.render_pc1 {
        let pgm = PathBuf::from(format!("{stem}.pc1.pgm"));
        render_band_pgm(
            out.projection.component(0),
            cube.width(),
            cube.height(),
            &pgm,
        )?;
        println!("wrote {}", pgm.display());
    }
    let explained = explained_variance(&out.eigen, args.pcs)?;
    println!("wrote {}", scores_raw.display());
    println!("wrote {}", eigen_csv.display());
    println!("wrote {}", means_csv.display());
    println!(
        "explained variance ({} PCs): {:.6}; sweeps: {}; rotations: {}",
        args.pcs, explained, out.eigen.sweeps_used, out.eigen.rotations_used
    );
    Ok(())
}

fn cmd_eigen(args: &EigenArgs) -> Result<()> {
    let (plan, _seed) = resolve_shared(&args.shared)?;
    let matrix = if args.raw {
        SymMatrix::from_raw_f32_file(&args.matrix)?
    } else {
        let text = std::fs::read_to_string(&args.matrix).map_err(|e| Error::io(&args.matrix, e))?;
        SymMatrix::from_csv_str(&text)?
    };
    let cfg = JacobiConfig {
        strategy: args.strategy,
        epsilon_rel: args.epsilon_rel,
        max_sweeps: args.max_sweeps,
        record_history: args.history.is_some(),
        ..JacobiConfig::default()
    };
    let eig = jacobi_eigen(&matrix, &cfg, &plan)?;
    if let Some(path) = &args.history {
        write_history_csv(&eig, path)?;
    }
    match &args.out {
        Some(path) => {
            write_eigen_csv(&eig, path)?;
            println!("wrote {}", path.display());
        }
        None => {
            let total: f64 = eig.eigenvalues().iter().map(|l| l.max(0.0)).sum();
            let mut running = 0.0;
            println!("index,eigenvalue,explained_variance");
            for (k, l) in eig.eigenvalues().iter().enumerate() {
                running += l.max(0.0);
                let frac = if total == 0.0 { 1.0 } else { running / total };
                println!("{k},{l},{frac}");
            }
        }
    }
    println!(
        "sweeps: {}; rotations: {}",
        eig.sweeps_used, eig.rotations_used
    );
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let (plan, seed) = resolve_shared(&args.shared)?;
    let cube = match &args.input {
        Some(stem) => {
            let (hdr, raw) = cube_paths(stem);
            load_cube(&hdr, &raw)?
        }
        None => {
            let sigs = builtin_signatures(args.bands, args.endmembers.max(10), seed)?;
            generate_synthetic(
                &sigs,
                args.width,
                args.height,
                args.endmembers,
                args.snr_db,
                seed,
                &plan,
            )?
            .cube
        }
    };
    let cfg = PipelineConfig {
        jacobi: JacobiConfig {
            strategy: args.strategy,
            precision: args.precision,
            ..JacobiConfig::default()
        },
        blocked_splits: args.blocked,
        precision: args.precision,
        project_raw: false,
    };
    let runs = crate::bench::run_benchmark(&cube, &args.pcs.0, &cfg, &plan)?;
    let platform = PlatformDesc::new(
        args.platform_name.clone(),
        args.cores
            .unwrap_or_else(|| ExecPlan::default_parallel().workers as u64),
        args.freq_mhz,
    )?;
    let report = build_report(&platform, ImageDims::of(&cube), &runs)?;
    emit_report(&report, args.format, &args.out)?;
    println!("wrote {}", args.out.display());
    for r in &report.runs {
        println!(
            "pcs {}: total {:.3} ms, {} CPS, {} CPS/(core*MHz), {} sweeps",
            r.pcs,
            r.total_ms,
            crate::bench::format_cps(r.cps),
            crate::bench::format_normalized(r.cps_per_core_mhz),
            r.sweeps_used
        );
    }
    let est = flop_estimate(
        cube.pixels() as u64,
        cube.bands() as u64,
        cube.bands() as u64,
    )?;
    println!(
        "model FLOPs: total {} (corrected {}); note: {}",
        est.total,
        est.total_corrected,
        FlopEstimate::ADVISORY
    );
    Ok(())
}

fn cmd_report(args: &ReportArgs) -> Result<()> {
    if args.inputs.is_empty() && args.external.is_empty() {
        return Err(Error::invalid(
            "report needs at least one --inputs file or --external row",
        ));
    }
    let mut rows = Vec::new();
    for path in &args.inputs {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let report = BenchReport::from_json_str(&text)?;
        rows.extend(ComparisonRow::from_report(&report));
    }
    for ext in &args.external {
        rows.push(parse_external(ext)?);
    }
    let table = comparison_markdown(&rows)?;
    match &args.out {
        Some(path) => {
            std::fs::write(path, &table).map_err(|e| Error::io(path, e))?;
            println!("wrote {}", path.display());
        }
        None => print!("{table}"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn help_documents_every_flag() {
        let help = full_help_text();
        for flag in [
            "--workers",
            "--mode",
            "--seed",
            "--config",
            "--width",
            "--height",
            "--bands",
            "--endmembers",
            "--snr-db",
            "--signatures",
            "--library-size",
            "--out",
            "--input",
            "--pcs",
            "--blocked",
            "--strategy",
            "--epsilon-rel",
            "--max-sweeps",
            "--precision",
            "--project-raw",
            "--render-pc1",
            "--history",
            "--matrix",
            "--raw",
            "--format",
            "--platform-name",
            "--cores",
            "--freq-mhz",
            "--inputs",
            "--external",
        ] {
            assert!(help.contains(flag), "help is missing {flag}");
        }
    }

    #[test]
    fn unknown_flags_are_rejected() {
        let err = run_from(["hypca", "synth", "--width", "2", "--bogus"]).unwrap_err();
        assert!(err.to_string().contains("--bogus"), "{err}");
    }

    #[test]
    fn config_file_parses_and_rejects_unknown_keys() {
        let cfg = parse_config("# comment\nworkers = 3\nmode=fast\nseed = 9\n").unwrap();
        assert_eq!(cfg.workers, Some(3));
        assert_eq!(cfg.mode, Some(ExecMode::Fast));
        assert_eq!(cfg.seed, Some(9));
        assert!(parse_config("threads = 3\n").is_err());
        assert!(parse_config("workers three\n").is_err());
    }

    #[test]
    fn shared_resolution_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("hypca.conf");
        std::fs::write(&cfg_path, "workers = 3\nseed = 5\n").unwrap();

        // CLI beats config beats env.
        let cli_wins = SharedArgs {
            workers: Some(2),
            mode: None,
            seed: Some(1),
            config: Some(cfg_path.clone()),
        };
        let (plan, seed) = resolve_with(&cli_wins, Some("7")).unwrap();
        assert_eq!(plan.workers, 2);
        assert_eq!(seed, 1);

        let config_wins = SharedArgs {
            config: Some(cfg_path),
            ..SharedArgs::default()
        };
        let (plan, seed) = resolve_with(&config_wins, Some("7")).unwrap();
        assert_eq!(plan.workers, 3);
        assert_eq!(seed, 5);

        let env_wins = SharedArgs::default();
        let (plan, seed) = resolve_with(&env_wins, Some("7")).unwrap();
        assert_eq!(plan.workers, 7);
        assert_eq!(seed, 0);
        assert_eq!(plan.mode, ExecMode::Deterministic);
    }

    #[test]
    fn snr_parser_accepts_infinity() {
        assert_eq!(parse_snr("inf").unwrap(), f64::INFINITY);
        assert_eq!(parse_snr("70").unwrap(), 70.0);
        assert!(parse_snr("nan").is_err());
        assert!(parse_snr("loud").is_err());
    }

    #[test]
    fn pcs_list_parser() {
        assert_eq!(parse_pcs_list("1,3,5").unwrap().0, vec![1, 3, 5]);
        assert_eq!(parse_pcs_list("2").unwrap().0, vec![2]);
        assert!(parse_pcs_list("0,1").is_err());
        assert!(parse_pcs_list("a,b").is_err());
    }

    #[test]
    fn external_row_parser() {
        let row = parse_external("GPU,Cuprite (large),166.48,1058,1536").unwrap();
        assert_eq!(row.platform, "GPU");
        assert_eq!(row.cores, Some(1536));
        let no_cores = parse_external("FPGA,Cuprite (large),1490.0,76").unwrap();
        assert_eq!(no_cores.cores, None);
        assert!(parse_external("justaname").is_err());
    }
}
