use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn oxiscreen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oxiscreen"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = oxiscreen(args);
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

fn header(path: &Path) -> Vec<String> {
    let text = fs::read_to_string(path).unwrap();
    text.lines().next().unwrap().split(',').map(String::from).collect()
}

#[test]
fn synth_extract_screen_select() {
    let dir = tempfile::tempdir().unwrap();
    let cohort = dir.path().join("cohort");
    ok(&[
        "--seed",
        "3",
        "synth",
        "--out",
        s(&cohort),
        "--n",
        "10",
        "--cohort",
        "healthy:0.6,copd_like:0.4",
    ]);
    assert_eq!(fs::read_dir(cohort.join("signals")).unwrap().count(), 10);
    let manifest = fs::read_to_string(cohort.join("manifest.csv")).unwrap();
    assert_eq!(manifest.lines().count(), 11);
    assert_eq!(manifest.lines().filter(|l| l.split(',').nth(3) == Some("1")).count(), 4);
    assert!(cohort.join("config.toml").exists());

    let again = dir.path().join("again");
    ok(&[
        "--seed",
        "3",
        "synth",
        "--out",
        s(&again),
        "--n",
        "10",
        "--cohort",
        "healthy:0.6,copd_like:0.4",
    ]);
    for f in ["manifest.csv", "plant_log.csv", "signals/P0007.txt"] {
        assert_eq!(
            fs::read(cohort.join(f)).unwrap(),
            fs::read(again.join(f)).unwrap(),
            "{f}"
        );
    }

    let m = s(&cohort.join("manifest.csv")).to_string();
    for (model, n) in [("model1", 5), ("model2", 118)] {
        let out = dir.path().join(model);
        ok(&["extract", "--manifest", &m, "--out", s(&out), "--model", model]);
        assert_eq!(header(&out.join("features.csv")).len(), 3 + n);
        let meta = fs::read_to_string(out.join("features.meta")).unwrap();
        assert!(meta.contains(&format!("model = {model}")));
        assert!(meta.contains("dynamics.ctm_rho = 0.25"));
    }

    let features = dir.path().join("model2/features.csv");
    let sc = dir.path().join("screen");
    ok(&["screen", "--features", s(&features), "--out", s(&sc)]);
    let rows = fs::read_to_string(sc.join("screening.csv")).unwrap();
    assert_eq!(rows.lines().count(), 119);
    assert!(fs::read_to_string(sc.join("screening.meta"))
        .unwrap()
        .contains("unit_of_analysis = window"));

    let sel = dir.path().join("select");
    ok(&["select", "--features", s(&features), "--out", s(&sel), "--k", "7"]);
    let text = fs::read_to_string(sel.join("selection.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "step,feature,phi,relevance");
    assert_eq!(text.lines().count(), 8);
}

#[test]
fn config_file_flags_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "seed = 11\n[synth]\nn = 6\ncohort = \"healthy:0.5,copd_like:0.5\"\n",
    )
    .unwrap();
    let out = dir.path().join("a");
    ok(&["--config", s(&cfg), "synth", "--out", s(&out), "--n", "4"]);
    let echoed = fs::read_to_string(out.join("config.toml")).unwrap();
    assert!(echoed.contains("seed = 11"), "{echoed}");
    assert!(echoed.contains("n = 4"), "{echoed}");
    assert_eq!(fs::read_dir(out.join("signals")).unwrap().count(), 4);

    let replay = dir.path().join("b");
    ok(&["--config", s(&out.join("config.toml")), "synth", "--out", s(&replay)]);
    assert_eq!(
        fs::read(out.join("manifest.csv")).unwrap(),
        fs::read(replay.join("manifest.csv")).unwrap()
    );

    fs::write(&cfg, "seed = 1\nwindow_len = 3\n").unwrap();
    let bad = oxiscreen(&["--config", s(&cfg), "synth", "--out", s(&dir.path().join("c"))]);
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("window_len"));

    let missing = oxiscreen(&[
        "extract",
        "--manifest",
        s(&dir.path().join("nope.csv")),
        "--out",
        s(&dir.path().join("d")),
    ]);
    assert!(!missing.status.success());
    let bad_cohort = oxiscreen(&["synth", "--out", s(&dir.path().join("e")), "--cohort", "martian:1.0"]);
    assert!(!bad_cohort.status.success());

    let empty = dir.path().join("empty.csv");
    fs::write(
        &empty,
        fs::read_to_string(out.join("manifest.csv"))
            .unwrap()
            .lines()
            .next()
            .unwrap(),
    )
    .unwrap();
    let r = oxiscreen(&["extract", "--manifest", s(&empty), "--out", s(&dir.path().join("f"))]);
    assert!(!r.status.success());
}

#[test]
fn train_eval_writes_the_report_set() {
    let dir = tempfile::tempdir().unwrap();
    let cohort = dir.path().join("cohort");
    ok(&[
        "--seed",
        "5",
        "synth",
        "--out",
        s(&cohort),
        "--n",
        "30",
        "--cohort",
        "healthy:0.5,copd_like:0.5",
    ]);
    let m = cohort.join("manifest.csv");
    let run = dir.path().join("run");
    ok(&[
        "--seed",
        "5",
        "train-eval",
        "--manifest",
        s(&m),
        "--out",
        s(&run),
        "--model",
        "model1",
        "--classifier",
        "lr",
        "--budget",
        "2",
    ]);
    assert_eq!(
        header(&run.join("summary.csv")),
        ["model", "classifier", "metric", "median", "sd"]
    );
    for i in 0..5 {
        assert_eq!(
            header(&run.join(format!("roc_fold{i}.csv"))),
            ["fpr", "tpr", "threshold"]
        );
        assert!(run.join(format!("model_fold{i}.json")).exists());
        assert!(run.join(format!("predictions_fold{i}.csv")).exists());
    }
    let rep = dir.path().join("rep");
    let printed = ok(&["report", "--run", s(&run), "--run", s(&run), "--out", s(&rep)]);
    let table = fs::read_to_string(rep.join("report.csv")).unwrap();
    assert_eq!(printed, table);
    let per_run = fs::read_to_string(run.join("summary_full.csv"))
        .unwrap()
        .lines()
        .count()
        - 1;
    assert_eq!(table.lines().count(), 1 + 2 * per_run);
}
