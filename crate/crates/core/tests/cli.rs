use std::path::Path;
use std::process::{Command, Output};

const QUADRATIC: &str = "[problem]\nname = stochastic_quadratic\ndim = 3\nkappa = 3\nseed = 1\n\n[algorithm]\nc = 0.3\ntheta = 0.6\niterations = 400\nreplications = 4\n";

fn run(config: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_app-optim"))
        .arg("run")
        .arg(config)
        .args(extra)
        .output()
        .unwrap()
}

fn write(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("exp.ini");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn success_writes_all_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), QUADRATIC);
    let out = tmp.path().join("out");
    let o = run(&cfg, &["--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["gaps.csv", "fit.csv", "config.ini", "plotdata.dat"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let gaps = std::fs::read_to_string(out.join("gaps.csv")).unwrap();
    let mut lines = gaps.lines();
    assert_eq!(lines.next(), Some("#schema=1"));
    assert_eq!(lines.next(), Some("n,gap_avg_mean,gap_avg_se,gap_last_mean,gap_last_se,R"));
    assert!(lines.all(|l| l.ends_with(",4")));
}

#[test]
fn flags_override_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), QUADRATIC);
    let out = tmp.path().join("o");
    let o = run(&cfg, &["--out", out.to_str().unwrap(), "--reps", "2", "--seed", "9"]);
    assert_eq!(o.status.code(), Some(0));
    let echo = std::fs::read_to_string(out.join("config.ini")).unwrap();
    assert!(echo.contains("replications = 2"));
    assert!(echo.contains("seed = 9"));
    let gaps = std::fs::read_to_string(out.join("gaps.csv")).unwrap();
    assert!(gaps.lines().skip(2).all(|l| l.ends_with(",2")));
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        format!("{QUADRATIC}bogus = 1\n"),
        QUADRATIC.replace("theta = 0.6", "theta = 1.5"),
        QUADRATIC.replace("c = 0.3", "c = fast"),
        QUADRATIC.replace("name = stochastic_quadratic\n", ""),
        format!("{QUADRATIC}[extras]\n"),
        format!("{QUADRATIC}decomposed = true\n"),
    ];
    for text in cases {
        let cfg = write(tmp.path(), &text);
        let o = run(&cfg, &["--out", tmp.path().join("x").to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{text}\n{}", String::from_utf8_lossy(&o.stderr));
    }
    let o = run(&tmp.path().join("missing.ini"), &[]);
    assert_eq!(o.status.code(), Some(2));
    let cfg = write(tmp.path(), QUADRATIC);
    assert_eq!(run(&cfg, &["--reps", "0"]).status.code(), Some(2));
}

#[test]
fn numeric_failure_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    // entropy K cannot be solved on the whole space
    let cfg = write(tmp.path(), &format!("{QUADRATIC}aux = entropy\n"));
    let out = tmp.path().join("o");
    let o = run(&cfg, &["--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let gaps = std::fs::read_to_string(out.join("gaps.csv")).unwrap();
    assert!(gaps.contains("#failure,replication 0,"));
}
