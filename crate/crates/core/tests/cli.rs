use std::fs;
use std::path::Path;
use std::process::Command;

const SECTION5: &str = "\
[model]
alpha = 1
beta = 1
gamma = 10
lengths = 1, 2, 3, 4, 5, 6, 7, 8, 9, 10

[run]
initial = 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0
dt = 0.02
steps = 2000
";

fn antdyn(args: &[&str], out: &Path) -> (i32, String, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_antdyn"))
        .args(args)
        .env("ANTDYN_OUT", out)
        .output()
        .unwrap();
    (
        o.status.code().unwrap(),
        String::from_utf8_lossy(&o.stdout).into_owned(),
        String::from_utf8_lossy(&o.stderr).into_owned(),
    )
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn reproduce_writes_artifacts_under_env_root() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = antdyn(&["reproduce", "tied-shortest-fig5"], dir.path());
    assert_eq!(code, 0);
    assert!(stdout.contains("tied-shortest-fig5: pass"));
    let base = dir.path().join("tied-shortest-fig5");
    for f in ["trajectory-sum-identity.csv", "figure.svg", "report.txt"] {
        assert!(base.join(f).is_file(), "{f}");
    }
    let leftovers: Vec<_> = fs::read_dir(&base)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().ends_with(".tmp"))
        .collect();
    assert!(leftovers.is_empty());
}

#[test]
fn out_flag_beats_environment() {
    let (env_dir, flag_dir) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let flag = flag_dir.path().to_string_lossy().into_owned();
    let (code, _, _) = antdyn(&["reproduce", "phase-eigenant", "--out", &flag], env_dir.path());
    assert_eq!(code, 0);
    assert!(flag_dir.path().join("phase-eigenant/phase-grid.csv").is_file());
    assert!(fs::read_dir(env_dir.path()).unwrap().next().is_none());
}

#[test]
fn equilibria_table_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "section5.cfg", SECTION5);
    let (code, stdout, _) = antdyn(&["equilibria", "--config", &cfg], dir.path());
    assert_eq!(code, 0);
    let table: Vec<&str> = stdout
        .lines()
        .skip_while(|l| *l != "[equilibria]")
        .skip(2)
        .take_while(|l| *l != "[end]")
        .collect();
    assert_eq!(table.len(), 10);
    assert_eq!(table[0].split(',').nth(3), Some("stable"));
    assert!(table[1..].iter().all(|row| row.split(',').nth(3) == Some("unstable")));
    assert!(dir.path().join("section5/equilibria.txt").is_file());
}

#[test]
fn simulate_verify_and_rates_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.cfg", SECTION5);
    assert_eq!(antdyn(&["simulate", "--config", &cfg], dir.path()).0, 0);
    let csv = fs::read_to_string(dir.path().join("run/trajectory-sum-identity.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2002);

    let (code, stdout, _) = antdyn(&["verify", "--config", &cfg], dir.path());
    assert_eq!(code, 0);
    assert!(stdout.contains("overall = pass"));

    let (code, stdout, _) = antdyn(&["rates", "--exact", "--config", &cfg], dir.path());
    assert_eq!(code, 0);
    assert!(stdout.contains("sum-identity.source = exact"));
}

#[test]
fn phase_requires_planar_model() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ten.cfg", SECTION5);
    assert_eq!(antdyn(&["phase", "--config", &cfg], dir.path()).0, 1);
    assert_eq!(antdyn(&["phase", "phase-maxant"], dir.path()).0, 0);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, stderr) = antdyn(&["frobnicate"], dir.path());
    assert_eq!(code, 1);
    assert!(stderr.contains("Usage"));
    assert_eq!(antdyn(&[], dir.path()).0, 1);
    assert_eq!(antdyn(&["reproduce", "fig9"], dir.path()).0, 1);
    assert_eq!(antdyn(&["verify", "eigenant-fig1", "--config", "x.cfg"], dir.path()).0, 1);
    assert_eq!(antdyn(&["--help"], dir.path()).0, 0);
    for sub in ["simulate", "equilibria", "rates", "verify", "reproduce", "phase"] {
        assert_eq!(antdyn(&[sub, "--help"], dir.path()).0, 0, "{sub}");
    }
}

#[test]
fn fault_injection() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[(&str, &str, i32)] = &[
        ("missing.cfg", "", 1),
        ("syntax.cfg", "[model\nalpha = 1\n", 1),
        ("nan.cfg", &SECTION5.replace("alpha = 1", "alpha = nan"), 1),
        ("negative.cfg", &SECTION5.replace("beta = 1", "beta = -1"), 1),
        ("mismatch.cfg", &SECTION5.replace(", 1.0\n", "\n"), 1),
        ("nan-length.cfg", &SECTION5.replace("lengths = 1,", "lengths = nan,"), 1),
        // gamma * alpha * dt > 1 drives Euler through zero
        ("overshoot.cfg", &SECTION5.replace("alpha = 1", "alpha = 100"), 2),
    ];
    for (name, text, expected) in cases {
        let path = if *name == "missing.cfg" {
            dir.path().join(name).to_string_lossy().into_owned()
        } else {
            write_config(dir.path(), name, text)
        };
        let (code, _, stderr) = antdyn(&["simulate", "--config", &path], dir.path());
        assert_eq!(code, *expected, "{name}: {stderr}");
        assert!(stderr.starts_with("error:"), "{name}: {stderr}");
    }
    let (_, _, stderr) = antdyn(&["simulate", "--config", &dir.path().join("negative.cfg").to_string_lossy()], dir.path());
    assert!(stderr.contains("beta"));
}

#[test]
fn failed_verification_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let short = SECTION5.replace("steps = 2000", "steps = 2000\n\n[analysis]\nvanish = 1e-300");
    let cfg = write_config(dir.path(), "strict.cfg", &short);
    let (code, stdout, _) = antdyn(&["verify", "--config", &cfg], dir.path());
    assert_eq!(code, 2);
    assert!(stdout.contains("overall = fail"));
}
