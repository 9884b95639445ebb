use std::path::Path;
use std::process::{Command, Output};

use gtv_cli::config::{LambdaRule, SweepConfig};
use gtv_cli::{plot, sweep, RegimeReport};
use gtv_core::solver;
use gtv_core::{KernelProfile, NeighborGraph};

fn gtv(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gtv")).arg("--out-dir").arg(dir).args(args).output().expect("binary runs")
}

fn small_config(csv: &str) -> SweepConfig {
    SweepConfig { n_list: vec![200, 400], seeds: vec![0, 1], test_m: 500, output_csv: csv.into(), ..SweepConfig::example() }
}

#[test]
fn sweep_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config("a.csv");
    sweep::execute(&config, dir.path()).unwrap();
    sweep::execute(&SweepConfig { output_csv: "b.csv".into(), ..config }, dir.path()).unwrap();
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn report_energy_matches_recomputation() {
    let config = small_config("r.csv");
    let model = config.load_model().unwrap();
    let kernel: KernelProfile = config.kernel.parse().unwrap();
    let outcome = sweep::run_sweep(&SweepConfig { scatter: true, ..config }).unwrap();
    assert_eq!(outcome.report.rows.len(), 3 * 2 * 2);
    for (row, sol) in outcome.report.rows.iter().zip(&outcome.solutions) {
        assert_eq!((row.n, row.seed), (sol.n, sol.seed));
        let cloud = model.sample(row.n, row.seed).unwrap();
        assert_eq!(cloud.points(), sol.cloud.points());
        let g = NeighborGraph::build(&cloud, row.eps, &kernel).unwrap();
        let e = solver::energy(&g, cloud.labels(), row.lambda, &sol.u).unwrap();
        assert!((e - row.energy).abs() <= 1e-9 * e.abs().max(1.0), "{e} vs {}", row.energy);
        assert!((g.gtv(&sol.u).unwrap() - row.gtv_of_solution).abs() <= 1e-9);
    }
}

#[test]
fn report_round_trips_through_csv() {
    let outcome = sweep::run_sweep(&small_config("x.csv")).unwrap();
    let mut buf = Vec::new();
    outcome.report.write_csv(&mut buf).unwrap();
    let back = RegimeReport::read_csv(buf.as_slice()).unwrap();
    assert_eq!(back, outcome.report);
}

#[test]
fn plot_rejects_missing_regime_and_handles_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_config("x.csv");
    config.n_list = vec![200];
    config.seeds = vec![0];
    config.lambda_rules = vec![LambdaRule::Fixed { value: 0.1 }];
    let report = sweep::run_sweep(&config).unwrap().report;
    assert_eq!(report.rows.len(), 1);

    let err = plot::emit_plots(&report, Some("overfit"), dir.path()).unwrap_err();
    assert!(err.to_string().contains("fixed"), "{err}");
    let written = plot::emit_plots(&report, None, dir.path()).unwrap();
    assert_eq!(written.len(), plot::METRICS.len());
    for p in written {
        assert!(std::fs::read_to_string(p).unwrap().starts_with("<svg"));
    }
    assert!(plot::emit_plots(&RegimeReport::default(), None, dir.path()).is_err());
}

#[test]
fn binary_pipeline_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let ok = gtv(d, &["--seed", "5", "gen", "--model", "quadrant", "--n", "150"]);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    let data = d.join("data.csv");
    let data = data.to_str().unwrap();

    for method in ["mincut", "pd"] {
        let out = format!("{method}.json");
        let run = gtv(d, &["solve", "--data", data, "--eps", "0.3", "--lambda", "0.2", "--method", method, "--out", &out]);
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    }
    let read = |f: &str| -> serde_json::Value { serde_json::from_slice(&std::fs::read(d.join(f)).unwrap()).unwrap() };
    let (cut, pd) = (read("mincut.json"), read("pd.json"));
    let (ec, ep) = (cut["energy_binary"].as_f64().unwrap(), pd["energy_binary"].as_f64().unwrap());
    assert!((ec - ep).abs() <= 1e-4 * ec);

    let solution = d.join("mincut.json");
    let risk = gtv(d, &["risk", "--data", data, "--model", "quadrant", "--solution", solution.to_str().unwrap(), "--test-m", "500"]);
    assert!(risk.status.success(), "{}", String::from_utf8_lossy(&risk.stderr));
    let risk: serde_json::Value = serde_json::from_slice(&risk.stdout).unwrap();
    assert!((0.0..=1.0).contains(&risk["test_risk"].as_f64().unwrap()));

    let cert = gtv(d, &["certify", "--data", data, "--eps", "0.3", "--lambda", "1e-6"]);
    let cert: serde_json::Value = serde_json::from_slice(&cert.stdout).unwrap();
    assert_eq!(cert["holds"], true);

    let sigma = gtv(d, &["sigma", "--dim", "1"]);
    let sigma: serde_json::Value = serde_json::from_slice(&sigma.stdout).unwrap();
    assert!((sigma["sigma"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let tl1 = gtv(d, &["tl1", "--a", data, "--b", data]);
    assert!(tl1.status.success(), "{}", String::from_utf8_lossy(&tl1.stderr));

    // validation errors exit with 2, missing files with 3
    assert_eq!(gtv(d, &["solve", "--data", data, "--eps", "-1", "--lambda", "1"]).status.code(), Some(2));
    assert_eq!(gtv(d, &["sigma", "--kernel", "nope"]).status.code(), Some(2));
    assert_eq!(gtv(d, &["solve", "--data", "/no/such/file.csv", "--eps", "1", "--lambda", "1"]).status.code(), Some(3));
    assert_eq!(gtv(d, &["frobnicate"]).status.code(), Some(2));
}

#[test]
fn binary_sweep_then_plot() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut config = small_config("sweep.csv");
    config.n_list = vec![150];
    config.seeds = vec![3];
    let path = d.join("config.json");
    std::fs::write(&path, serde_json::to_string(&config).unwrap()).unwrap();
    let run = gtv(d, &["sweep", "--config", path.to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(d.join("timings.csv").exists());

    let report = d.join("sweep.csv");
    let plots = d.join("plots");
    let plot = Command::new(env!("CARGO_BIN_EXE_gtv"))
        .args(["--out-dir", plots.to_str().unwrap(), "plot", "--report", report.to_str().unwrap(), "--regime", "consistent"])
        .output()
        .unwrap();
    assert!(plot.status.success(), "{}", String::from_utf8_lossy(&plot.stderr));
    assert!(plots.join("excess_risk.svg").exists());
    let missing = gtv(d, &["plot", "--report", report.to_str().unwrap(), "--regime", "fixed"]);
    assert_eq!(missing.status.code(), Some(2));
}
