use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_adanewton"));
    c.env_remove("ADANEWTON_OUT_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("exp.toml");
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

const SMALL: &str = "n = 1500\np = 4\nm0 = 50\nbudget_passes = 5.0\nclock = \"none\"\n";

#[test]
fn run_writes_traces_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), SMALL);
    let o = run(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for s in ["ada_newton", "newton", "saga", "sgd"] {
        let text = fs::read_to_string(out.join(format!("trace_{s}.csv"))).unwrap();
        assert!(text.starts_with("solver,passes,hessian_units_over_N,elapsed_s,grad_norm,subopt,n\n"));
    }
    let o = run(&["summarize", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("ada_newton"));
    assert!(text.contains("N = 1500"));
}

#[test]
fn environment_sets_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let env_out = dir.path().join("from_env");
    let cfg = write_config(dir.path(), &format!("{SMALL}solvers = [\"newton\"]\nout_dir = \"ignored\"\n"));
    let o = bin()
        .args(["run", &cfg])
        .env("ADANEWTON_OUT_DIR", &env_out)
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(env_out.join("trace_newton.csv").exists());
    assert!(!dir.path().join("ignored").exists());

    // An explicit flag still wins.
    let flag_out = dir.path().join("from_flag");
    let o = bin()
        .args(["run", &cfg, "--set", &format!("out_dir=\"{}\"", flag_out.display())])
        .env("ADANEWTON_OUT_DIR", &env_out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(flag_out.join("trace_newton.csv").exists());
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "solvers = [\"bfgs\"]\n");
    assert_eq!(run(&["run", &cfg]).status.code(), Some(2));
    assert_eq!(run(&["run", "/nonexistent/exp.toml"]).status.code(), Some(2));
    let cfg = write_config(dir.path(), "source = \"libsvm\"\npath = \"/nonexistent/data.svm\"\n");
    assert_eq!(run(&["run", &cfg]).status.code(), Some(2));
    let cfg = write_config(dir.path(), SMALL);
    assert_eq!(run(&["run", &cfg, "--set", "c"]).status.code(), Some(2));
}

#[test]
fn solver_abort_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), &format!("{SMALL}solvers = [\"sgd\", \"newton\"]\nsgd_stepsize = 1e6\n"));
    let o = run(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(out.join("trace_newton.csv").exists());
    assert!(fs::read_to_string(out.join("summary.csv")).unwrap().contains("aborted"));
}

#[test]
fn tiny_budget_still_emits_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), &format!("{SMALL}budget_passes = 0.5\n").replace("budget_passes = 5.0\n", ""));
    let o = run(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for s in ["ada_newton", "newton", "saga", "sgd"] {
        let text = fs::read_to_string(out.join(format!("trace_{s}.csv"))).unwrap();
        assert!(text.lines().count() >= 2, "{s}");
    }
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    for s in ["ada_newton", "newton", "saga"] {
        assert!(summary.contains(&format!("{s},ok,1,inf,inf,")), "{summary}");
    }
}

#[test]
fn gen_synth_feeds_a_file_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.svm");
    let o = run(&["gen-synth", "--n", "800", "--p", "3", "--seed", "4", "--separation", "0.5", "--out", data.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = dir.path().join("d.csv");
    let o = run(&["gen-synth", "--n", "20", "--p", "3", "--format", "csv", "--out", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(fs::read_to_string(&csv).unwrap().starts_with("label,f1,f2,f3"));

    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        &format!("source = \"libsvm\"\npath = \"{}\"\nm0 = 40\nsolvers = [\"ada_newton\", \"newton\"]\n", data.display()),
    );
    let o = run(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn check_reports_each_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let o = run(&["check", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 6);
}

#[test]
fn summarize_reports_corrupt_files() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("trace_x.csv"), "garbage\n").unwrap();
    let o = run(&["summarize", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("trace_x.csv"));
}
