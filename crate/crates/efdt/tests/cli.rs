use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn efdt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_efdt")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn csv_files(dir: &Path) -> Vec<String> {
    let mut names: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    names.sort();
    names
}

/// Drops the trailing cpu_s column.
fn without_timing(text: &str) -> String {
    text.lines().map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head)).collect::<Vec<_>>().join("\n")
}

#[test]
fn generate_writes_header_plus_rows_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = efdt(&[
            "generate",
            "--classes",
            "5",
            "--attrs",
            "5",
            "--values",
            "5",
            "--length",
            "1000",
            "--seed",
            "7",
            "--output",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stderr).contains("5 attributes"));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 1001);
    assert!(text.starts_with("a0:nominal,a1:nominal,a2:nominal,a3:nominal,a4:nominal,class\n"));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    // stdout variant carries the same bytes
    let out = efdt(&["generate", "--length", "1000", "--seed", "7"]);
    assert_eq!(out.stdout, fs::read(&a).unwrap());
}

#[test]
fn invalid_configuration_exits_2() {
    let out = efdt(&["generate", "--classes", "1", "--length", "10"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    for args in [
        &["compare", "--delta", "0", "--out", d][..],
        &["compare", "--drift-at", "500", "--length", "500", "--out", d],
        &["run", "--leaf-cadence", "0", "--out", d],
        &["compare", "--seeds", "0", "--out", d],
        &["run", "--checkpoint", "0", "--out", d],
        &["run", "--learner", "c45", "--out", d],
        &["compare", "--csv", "/nonexistent.csv", "--out", d],
    ] {
        assert_eq!(efdt(args).status.code(), Some(2), "{args:?}");
    }
    assert!(csv_files(dir.path()).is_empty(), "no work before validation");
}

#[test]
fn unwritable_output_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = efdt(&["generate", "--length", "5", "--output", blocker.join("x.csv").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = efdt(&["compare", "--seeds", "1", "--length", "100", "--out", blocker.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compare_one_seed_writes_two_csvs_and_summary_lines() {
    let dir = tempfile::tempdir().unwrap();
    let out =
        efdt(&["compare", "--seeds", "1", "--length", "5000", "--name", "rt5", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(csv_files(dir.path()), vec!["rt5_efdt_1.csv", "rt5_vfdt_1.csv"]);
    let text = stdout(&out);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("vfdt E=") && lines[0].contains(" T="));
    assert!(lines[1].starts_with("efdt E=") && lines[1].contains(" T="));
    let csv = fs::read_to_string(dir.path().join("rt5_efdt_1.csv")).unwrap();
    assert!(csv.starts_with("learner,timestep,cum_error,window_error,nodes,leaves,depth,cpu_s\nefdt,1000,"));
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn compare_several_seeds_adds_mean_curves_and_events() {
    let dir = tempfile::tempdir().unwrap();
    let out = efdt(&[
        "compare",
        "--seeds",
        "2",
        "--length",
        "4000",
        "--drift-at",
        "2000",
        "--events",
        "--name",
        "d",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("drift_at=2000\nvfdt E="));
    assert_eq!(
        csv_files(dir.path()),
        vec![
            "d_efdt_1.csv",
            "d_efdt_1_events.csv",
            "d_efdt_2.csv",
            "d_efdt_2_events.csv",
            "d_efdt_mean.csv",
            "d_vfdt_1.csv",
            "d_vfdt_2.csv",
            "d_vfdt_mean.csv",
        ]
    );
    let events = fs::read_to_string(dir.path().join("d_efdt_1_events.csv")).unwrap();
    assert!(events.starts_with("timestep,node_id,event,old_attr,new_attr\n"));
}

#[test]
fn run_writes_one_file_without_learner_column() {
    let dir = tempfile::tempdir().unwrap();
    let out =
        efdt(&["run", "--learner", "vfdt", "--seed", "3", "--length", "2500", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("vfdt E="));
    let text = fs::read_to_string(dir.path().join("experiment_vfdt_3.csv")).unwrap();
    assert!(text.starts_with("timestep,cum_error,"));
    assert_eq!(text.lines().last().unwrap().split(',').next(), Some("2500"));
}

#[test]
fn csv_input_stream() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    let gen = efdt(&["generate", "--length", "3000", "--classes", "3", "--output", data.to_str().unwrap()]);
    assert!(gen.status.success());
    let out_dir = dir.path().join("out");
    let out = efdt(&[
        "compare",
        "--seeds",
        "1",
        "--csv",
        data.to_str().unwrap(),
        "--shuffle-seed",
        "4",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let last = fs::read_to_string(out_dir.join("experiment_efdt_1.csv")).unwrap();
    assert_eq!(last.lines().last().unwrap().split(',').nth(1), Some("3000"));
}

#[test]
fn convergence_exit_codes() {
    let ok = efdt(&["convergence", "--length", "20000", "--seed", "2"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    assert!(stdout(&ok).contains("converged=true"));
    let short = efdt(&["convergence", "--length", "10"]);
    assert_eq!(short.status.code(), Some(3));
    assert!(stdout(&short).contains("converged=false"));

    let dir = tempfile::tempdir().unwrap();
    let numeric = dir.path().join("n.csv");
    fs::write(&numeric, "x,y,class\n0.5,1,a\n1.5,2,b\n2.5,3,a\n").unwrap();
    let out = efdt(&["convergence", "--csv", numeric.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nominal"));
}

#[test]
fn help_lists_defaults() {
    let out = efdt(&["compare", "--help"]);
    let text = stdout(&out);
    for flag in ["--delta", "--tau", "--leaf-cadence", "--internal-cadence", "--checkpoint", "--window", "--seeds"] {
        assert!(text.contains(flag), "{flag}");
    }
    assert!(text.contains("[default: 0.05]"));
    assert!(text.contains("[default: 2000]"));
    assert!(text.contains("do not state"));
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn commands_are_byte_identical_apart_from_timing() {
    let run = |dir: &Path| {
        let gen = efdt(&["generate", "--length", "3000", "--seed", "9", "--drift-at", "1500"]);
        let cmp = efdt(&[
            "compare",
            "--seeds",
            "2",
            "--length",
            "6000",
            "--drift-at",
            "3000",
            "--events",
            "--out",
            dir.to_str().unwrap(),
        ]);
        let conv = efdt(&["convergence", "--length", "3000", "--checkpoint", "500"]);
        assert!(cmp.status.success());
        let files: Vec<_> = csv_files(dir)
            .into_iter()
            .map(|n| {
                let text = fs::read_to_string(dir.join(&n)).unwrap();
                if n.contains("events") {
                    text
                } else {
                    without_timing(&text)
                }
            })
            .collect();
        (gen.stdout, stdout(&conv), files)
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(run(a.path()), run(b.path()));
}
