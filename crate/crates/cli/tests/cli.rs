use std::path::Path;
use std::process::{Command, Output};

fn scgarch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scgarch")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = scgarch(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn simulate_is_deterministic_and_sized() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&["simulate", "sim2", "--out", s(&a), "--seed", "7"]);
    ok(&["simulate", "sim2", "--out", s(&b), "--seed", "7"]);
    for f in ["panel.csv", "truth_cov.csv", "config.echo"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert_eq!(read(&a.join("panel.csv")).lines().count(), 1 + 1024);
    assert_eq!(read(&a.join("truth_cov.csv")).lines().count(), 1 + 1024 * 9);
    assert!(read(&a.join("config.echo")).contains("seed = 7"));

    let c = dir.path().join("c");
    ok(&["simulate", "sim1", "--n", "100", "--out", s(&c)]);
    let triple = read(&c.join("sim1.csv"));
    assert_eq!(triple.lines().next(), Some("y,x,phi_true"));
    assert_eq!(triple.lines().count(), 101);
}

#[test]
fn fit_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    ok(&["simulate", "sim2", "--n", "200", "--out", s(&sim)]);
    let fit = dir.path().join("fit");
    let msg = ok(&["fit", s(&sim.join("panel.csv")), "--out", s(&fit)]);
    assert!(msg.contains("BIC"));
    for f in ["cov_path.csv", "corr_path.csv", "coeff_path.csv", "garch_params.csv", "ordering.txt", "summary.txt", "config.echo"] {
        assert!(fit.join(f).exists(), "{f}");
    }
    assert_eq!(read(&fit.join("coeff_path.csv")).lines().count(), 1 + 200 * 3);
    assert!(read(&fit.join("summary.txt")).contains("total_loglik = "));

    // Static factor: every t carries the same coefficients.
    let cg = dir.path().join("cg");
    ok(&["fit", s(&sim.join("panel.csv")), "--model", "cgarch", "--out", s(&cg)]);
    let coeffs = read(&cg.join("coeff_path.csv"));
    let mut by_jk = std::collections::HashMap::new();
    for line in coeffs.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let prev = by_jk.entry((f[1].to_string(), f[2].to_string())).or_insert(f[3].to_string());
        assert_eq!(prev, f[3]);
    }

    // Evaluating a path against itself gives zero loss.
    let ev = dir.path().join("ev");
    let cov = fit.join("cov_path.csv");
    let out = ok(&["evaluate", s(&cov), "--truth", s(&cov), "--out", s(&ev)]);
    assert!(out.contains("MAE = 0\n") && out.contains("MSE = 0"));
    assert!(read(&ev.join("eval.csv")).lines().last().unwrap().starts_with("mean,"));
}

#[test]
fn univariate_correlation_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let panel = dir.path().join("p.csv");
    let mut body = String::from("r\n");
    for t in 0..120 {
        body.push_str(&format!("{}\n", ((t * 37 % 101) as f64 - 50.0) / 25.0));
    }
    std::fs::write(&panel, body).unwrap();
    let fit = dir.path().join("fit");
    ok(&["fit", s(&panel), "--out", s(&fit)]);
    for line in read(&fit.join("corr_path.csv")).lines().skip(1) {
        assert!(line.ends_with(",1.0000000000000000e0"), "{line}");
    }
}

#[test]
fn moving_block_evaluation_records_the_width() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    ok(&["simulate", "sim2", "--n", "300", "--out", s(&sim)]);
    let fit = dir.path().join("fit");
    ok(&["fit", s(&sim.join("panel.csv")), "--out", s(&fit)]);
    let blk = dir.path().join("blk");
    ok(&["select-block", s(&sim.join("panel.csv")), "--candidates", "5,11,21,35", "--out", s(&blk)]);
    assert_eq!(read(&blk.join("block_selection.csv")).lines().count(), 5);
    let ev = dir.path().join("ev");
    ok(&[
        "evaluate",
        s(&fit.join("cov_path.csv")),
        "--proxy-panel",
        s(&sim.join("panel.csv")),
        "--block-size",
        "21",
        "--out",
        s(&ev),
    ]);
    let summary = read(&ev.join("eval_summary.txt"));
    assert!(summary.contains("truth_source = moving-block"));
    assert!(summary.contains("block_size_used = 21"));
}

#[test]
fn benchmark_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = |o: &Path| vec!["benchmark".to_string(), "--replications".into(), "1".into(), "--n".into(), "256".into(), "--out".into(), s(o).into()];
    ok(&args(&a).iter().map(String::as_str).collect::<Vec<_>>());
    ok(&args(&b).iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(read(&a.join("league.csv")), read(&b.join("league.csv")));
    let league = read(&a.join("league.csv"));
    assert_eq!(league.lines().count(), 5);
    assert!(league.contains("scgarch,correlation") && league.contains("cgarch,covariance"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    assert_eq!(scgarch(&["fit", "/no/such/panel.csv", "--out", s(&out)]).status.code(), Some(2));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "a,b\n1,2\n3,oops\n").unwrap();
    let r = scgarch(&["fit", s(&bad), "--out", s(&out)]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("line 3"));

    assert_eq!(scgarch(&["fit", s(&bad), "--set", "colour=red", "--out", s(&out)]).status.code(), Some(2));

    // Every replication is too short to fit.
    let r = scgarch(&["benchmark", "--replications", "2", "--n", "20", "--out", s(&out)]);
    assert_eq!(r.status.code(), Some(3));
    assert!(read(&out.join("replications.csv")).contains("failed"));
}

#[test]
fn config_file_and_echo_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "n = 150\nseed = 3\n").unwrap();
    let a = dir.path().join("a");
    ok(&["simulate", "sim2", "--config", s(&cfg), "--out", s(&a)]);
    assert_eq!(read(&a.join("panel.csv")).lines().count(), 151);
    // The echo is itself a valid config that reproduces the run.
    let echo = a.join("config.echo");
    assert!(read(&echo).contains("# pd_repairs: 0"));
    let b = dir.path().join("b");
    ok(&["simulate", "sim2", "--config", s(&echo), "--out", s(&b)]);
    assert_eq!(read(&a.join("panel.csv")), read(&b.join("panel.csv")));
}
