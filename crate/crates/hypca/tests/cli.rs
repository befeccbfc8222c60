//! End-to-end CLI flows through `cli::run_from`, checking the files each
//! subcommand leaves behind.

use std::path::Path;

use hypca::cli::run_from;

fn run(args: &[&str]) -> hypca::Result<()> {
    run_from(std::iter::once("hypca").chain(args.iter().copied()))
}

fn read_eigen_csv(path: &Path) -> Vec<(usize, f64, f64)> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|line| {
            let mut f = line.split(',');
            (
                f.next().unwrap().parse().unwrap(),
                f.next().unwrap().parse().unwrap(),
                f.next().unwrap().parse().unwrap(),
            )
        })
        .collect()
}

#[test]
fn synth_writes_exact_raw_size_and_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("img");
    let args = [
        "synth",
        "--width",
        "100",
        "--height",
        "100",
        "--bands",
        "50",
        "--endmembers",
        "10",
        "--snr-db",
        "70",
        "--seed",
        "1",
        "--out",
    ];
    let mut argv: Vec<&str> = args.to_vec();
    let out_str = out.to_str().unwrap();
    argv.push(out_str);
    run(&argv).unwrap();

    let raw = dir.path().join("img.raw");
    let hdr = dir.path().join("img.hdr.json");
    assert_eq!(std::fs::metadata(&raw).unwrap().len(), 2_000_000);
    let first_raw = std::fs::read(&raw).unwrap();
    let first_hdr = std::fs::read(&hdr).unwrap();

    // Same seed, second run: byte-identical outputs.
    run(&argv).unwrap();
    assert_eq!(std::fs::read(&raw).unwrap(), first_raw);
    assert_eq!(std::fs::read(&hdr).unwrap(), first_hdr);
}

#[test]
fn synth_noiseless_single_endmember_is_constant_per_band() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("flat");
    run(&[
        "synth",
        "--width",
        "6",
        "--height",
        "4",
        "--bands",
        "3",
        "--endmembers",
        "1",
        "--snr-db",
        "inf",
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ])
    .unwrap();
    let cube = hypca::cube::load_cube(
        &dir.path().join("flat.hdr.json"),
        &dir.path().join("flat.raw"),
    )
    .unwrap();
    for b in 0..3 {
        let band = cube.band(b);
        assert!(band.iter().all(|v| v == &band[0]), "band {b} not constant");
    }
}

#[test]
fn reduce_recovers_rank_and_renders_pc1() {
    let dir = tempfile::tempdir().unwrap();
    let cube = dir.path().join("scene");
    run(&[
        "synth",
        "--width",
        "48",
        "--height",
        "36",
        "--bands",
        "24",
        "--endmembers",
        "10",
        "--snr-db",
        "70",
        "--seed",
        "11",
        "--out",
        cube.to_str().unwrap(),
    ])
    .unwrap();

    let out = dir.path().join("red");
    run(&[
        "reduce",
        "--input",
        cube.to_str().unwrap(),
        "--pcs",
        "10",
        "--render-pc1",
        "--history",
        "--out",
        out.to_str().unwrap(),
    ])
    .unwrap();

    // Scores: 10 components × 1728 pixels × 4 bytes.
    let scores = dir.path().join("red.scores.raw");
    assert_eq!(std::fs::metadata(&scores).unwrap().len(), 10 * 1728 * 4);

    // Cumulative explained variance at index 9 covers the 10 endmembers.
    let rows = read_eigen_csv(&dir.path().join("red.eigen.csv"));
    assert_eq!(rows.len(), 24);
    assert!(rows[9].2 >= 0.999, "explained {}", rows[9].2);

    // Rendered first component is a valid PGM of the right size.
    let pgm = std::fs::read(dir.path().join("red.pc1.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n48 36\n255\n"));
    assert_eq!(pgm.len(), b"P5\n48 36\n255\n".len() + 48 * 36);

    // History CSV exists with a header plus one row per sweep.
    let history = std::fs::read_to_string(dir.path().join("red.history.csv")).unwrap();
    assert!(history.starts_with("sweep,offdiag_norm,rotations\n"));
    assert!(history.lines().count() >= 2);

    // Band means CSV has one row per band.
    let means = std::fs::read_to_string(dir.path().join("red.means.csv")).unwrap();
    assert_eq!(means.lines().count(), 25);
}

#[test]
fn reduce_strategies_agree_on_eigenvalues() {
    let dir = tempfile::tempdir().unwrap();
    let cube = dir.path().join("scene");
    run(&[
        "synth",
        "--width",
        "32",
        "--height",
        "32",
        "--bands",
        "16",
        "--endmembers",
        "6",
        "--snr-db",
        "60",
        "--seed",
        "5",
        "--out",
        cube.to_str().unwrap(),
    ])
    .unwrap();

    let mut spectra = Vec::new();
    for strategy in ["classical", "parallel"] {
        let out = dir.path().join(strategy);
        run(&[
            "reduce",
            "--input",
            cube.to_str().unwrap(),
            "--pcs",
            "2",
            "--strategy",
            strategy,
            "--out",
            out.to_str().unwrap(),
        ])
        .unwrap();
        let stem = format!("{}.eigen.csv", out.to_str().unwrap());
        spectra.push(read_eigen_csv(Path::new(&stem)));
    }
    let lmax = spectra[0][0].1;
    for (a, b) in spectra[0].iter().zip(&spectra[1]) {
        assert!((a.1 - b.1).abs() <= 1e-5 * lmax, "{} vs {}", a.1, b.1);
    }
}

#[test]
fn eigen_subcommand_handles_csv_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let diag = dir.path().join("diag.csv");
    std::fs::write(&diag, "1,0;0,2").unwrap();
    let out = dir.path().join("diag.eigen.csv");
    run(&[
        "eigen",
        "--matrix",
        diag.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ])
    .unwrap();
    let rows = read_eigen_csv(&out);
    assert_eq!(rows[0].1, 2.0);
    assert_eq!(rows[1].1, 1.0);

    let toy = dir.path().join("toy.csv");
    std::fs::write(&toy, "1,1\n1,3\n").unwrap();
    let out2 = dir.path().join("toy.eigen.csv");
    run(&[
        "eigen",
        "--matrix",
        toy.to_str().unwrap(),
        "--out",
        out2.to_str().unwrap(),
    ])
    .unwrap();
    let rows = read_eigen_csv(&out2);
    assert!((rows[0].1 - 3.4142136).abs() < 1e-6);
    assert!((rows[1].1 - 0.5857864).abs() < 1e-6);
}

#[test]
fn eigen_subcommand_rejects_asymmetric_input_naming_worst_pair() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "1,2;5,3").unwrap();
    let err = run(&["eigen", "--matrix", bad.to_str().unwrap()]).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("not symmetric"), "{msg}");
    assert!(msg.contains("(0, 1)"), "{msg}");
}

#[test]
fn eigen_subcommand_reads_raw_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("m.raw");
    let entries: [f32; 4] = [1.0, 1.0, 1.0, 3.0];
    let bytes: Vec<u8> = entries.iter().flat_map(|v| v.to_le_bytes()).collect();
    std::fs::write(&raw, bytes).unwrap();
    let out = dir.path().join("m.eigen.csv");
    run(&[
        "eigen",
        "--matrix",
        raw.to_str().unwrap(),
        "--raw",
        "--out",
        out.to_str().unwrap(),
    ])
    .unwrap();
    let rows = read_eigen_csv(&out);
    assert!((rows[0].1 - 3.4142136).abs() < 1e-6);
}

#[test]
fn bench_report_has_requested_runs_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    run(&[
        "bench",
        "--width",
        "24",
        "--height",
        "24",
        "--bands",
        "12",
        "--endmembers",
        "4",
        "--pcs",
        "1,3,5",
        "--format",
        "json",
        "--platform-name",
        "X",
        "--cores",
        "256",
        "--freq-mhz",
        "400",
        "--seed",
        "2",
        "--out",
        out.to_str().unwrap(),
    ])
    .unwrap();
    let report =
        hypca::bench::BenchReport::from_json_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report.runs.len(), 3);
    assert_eq!(report.platform.cores, 256);
    for r in &report.runs {
        // Normalized metric follows cps / (cores × MHz).
        let expect = r.cps / (256.0 * 400.0);
        assert!((r.cps_per_core_mhz - expect).abs() <= 1e-12 * expect);
        assert!(r.total_ms >= r.stage3_ms);
    }
    assert_eq!(
        [report.runs[0].pcs, report.runs[1].pcs, report.runs[2].pcs],
        [1, 3, 5]
    );
}

#[test]
fn bench_outputs_are_worker_count_independent() {
    let dir = tempfile::tempdir().unwrap();
    let mut sweeps = Vec::new();
    for workers in ["1", "8"] {
        let out = dir.path().join(format!("r{workers}.json"));
        run(&[
            "bench",
            "--width",
            "20",
            "--height",
            "20",
            "--bands",
            "10",
            "--endmembers",
            "4",
            "--pcs",
            "1",
            "--strategy",
            "parallel",
            "--mode",
            "deterministic",
            "--workers",
            workers,
            "--seed",
            "6",
            "--out",
            out.to_str().unwrap(),
        ])
        .unwrap();
        let report =
            hypca::bench::BenchReport::from_json_str(&std::fs::read_to_string(&out).unwrap())
                .unwrap();
        sweeps.push(report.runs[0].sweeps_used);
    }
    assert_eq!(sweeps[0], sweeps[1]);
}

#[test]
fn report_merges_files_and_external_rows() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for (path, name) in [(&a, "alpha"), (&b, "beta")] {
        run(&[
            "bench",
            "--width",
            "12",
            "--height",
            "12",
            "--bands",
            "6",
            "--endmembers",
            "3",
            "--pcs",
            "1",
            "--platform-name",
            name,
            "--seed",
            "4",
            "--out",
            path.to_str().unwrap(),
        ])
        .unwrap();
    }
    let table_path = dir.path().join("cmp.md");
    run(&[
        "report",
        "--inputs",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
        "--external",
        "FPGA,Cuprite (large),1490.0,76",
        "--external",
        "GPU,Cuprite (large),166.48,1058,1536",
        "--out",
        table_path.to_str().unwrap(),
    ])
    .unwrap();
    let table = std::fs::read_to_string(&table_path).unwrap();
    // Header + separator + 2 measured + 2 external rows.
    assert_eq!(table.lines().count(), 6);
    assert!(table.contains("| alpha |"));
    assert!(table.contains("| beta |"));
    assert!(table.contains("| 0.67 |"));
    assert!(table.contains("8.831e-3"));
    assert!(table.contains("| 6.01 |"));
}

#[test]
fn report_with_no_inputs_is_a_usage_error() {
    let err = run(&["report"]).unwrap_err();
    assert!(err.to_string().contains("at least one"), "{err}");
}

#[test]
fn missing_cube_files_are_reported_with_path() {
    let err = run(&["reduce", "--input", "/nonexistent/cube", "--out", "/tmp/x"]).unwrap_err();
    assert!(
        err.to_string().contains("/nonexistent/cube.hdr.json"),
        "{err}"
    );
}
