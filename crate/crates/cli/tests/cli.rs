use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cxsplit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cxsplit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn without_cpu_column(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| {
            let mut fields = Vec::new();
            let mut cur = String::new();
            let mut quoted = false;
            for ch in l.chars() {
                match ch {
                    '"' => quoted = !quoted,
                    ',' if !quoted => fields.push(std::mem::take(&mut cur)),
                    c => cur.push(c),
                }
            }
            fields.push(cur);
            fields.remove(6);
            fields.join("|")
        })
        .collect()
}

#[test]
fn generate_then_solve_from_directory() {
    let dir = tempfile::tempdir().unwrap();
    let pdir = dir.path().join("ex2");
    let o = cxsplit(&[
        "generate",
        "--example",
        "2",
        "--m",
        "8",
        "--sigma1",
        "100",
        "--sigma2",
        "10",
        "--out",
        pdir.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "W1.mtx",
        "W2.mtx",
        "T.mtx",
        "b.mtx",
        "x_exact.mtx",
        "meta.txt",
    ] {
        assert!(pdir.join(f).exists(), "{f}");
    }
    let meta = fs::read_to_string(pdir.join("meta.txt")).unwrap();
    assert!(meta.contains("name=example2") && meta.contains("sigma1=100"));

    let o = cxsplit(&[
        "solve",
        "--problem-dir",
        pdir.to_str().unwrap(),
        "--method",
        "II",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let row = out.lines().nth(1).unwrap();
    assert!(row.starts_with("Method II,"), "{row}");
    assert!(row.ends_with(",converged"));
    assert!(row.contains(",64,fgmres,1e-2,"), "{row}");
}

#[test]
fn solve_writes_table_and_history() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("t.md");
    let hist = dir.path().join("h.csv");
    let o = cxsplit(&[
        "solve",
        "--example",
        "2",
        "--m",
        "12",
        "--sigma1",
        "100",
        "--sigma2",
        "100",
        "--method",
        "snss",
        "--alpha",
        "5",
        "--beta",
        "0.1",
        "--format",
        "markdown",
        "--out",
        table.to_str().unwrap(),
        "--history",
        hist.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let md = fs::read_to_string(&table).unwrap();
    assert!(md.starts_with("| method |"));
    assert!(md.contains("SNSS(alpha=5,beta=0.1)"));
    let h = fs::read_to_string(&hist).unwrap();
    assert_eq!(h.lines().next(), Some("iter,relative_residual"));
    assert_eq!(h.lines().nth(1), Some("0,1.000000e0"));
    let last: f64 = h
        .lines()
        .last()
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!(last <= 1e-10);
}

#[test]
fn validation_errors_exit_2() {
    let o = cxsplit(&[
        "solve",
        "--example",
        "1",
        "--m",
        "8",
        "--krylov",
        "gmres",
        "--inner-tol",
        "1e-2",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FGMRES"));
    let o = cxsplit(&["solve", "--example", "2", "--m", "8", "--method", "III"]);
    assert_eq!(o.status.code(), Some(2));
    let o = cxsplit(&["solve", "--example", "2", "--m", "8", "--method", "IV"]);
    assert_eq!(o.status.code(), Some(2));
    let o = cxsplit(&["solve", "--m", "8"]);
    assert_eq!(o.status.code(), Some(2));
    let o = cxsplit(&["solve", "--example", "2", "--m", "8", "--format", "xml"]);
    assert_eq!(o.status.code(), Some(2));
    let o = cxsplit(&["solve", "--example", "2", "--m", "8", "--outer-tol", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = cxsplit(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn nonconvergence_exits_3() {
    let o = cxsplit(&[
        "solve",
        "--example",
        "2",
        "--m",
        "12",
        "--method",
        "none",
        "--max-outer",
        "4",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let out = stdout(&o);
    let row = out.lines().nth(1).unwrap();
    assert!(
        row.starts_with("No-pre,") && row.contains(",none,-,4,"),
        "{row}"
    );
    assert!(row.ends_with(",not-converged"));
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("exp.cfg");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn experiment_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "example = 2\nm = 8, 12\nsigma1 = 1000\nsigma2 = 10\n\
         [method]\nscheme = I\n\
         [method]\nscheme = III\nalpha = 100\n\
         [method]\nscheme = snss\nalpha = 10\nbeta = 1\n",
    );
    let a = cxsplit(&["experiment", &cfg]);
    let b = cxsplit(&["experiment", &cfg]);
    assert_eq!(a.status.code(), Some(0));
    let (a, b) = (stdout(&a), stdout(&b));
    assert_eq!(a.lines().count(), 7);
    assert_eq!(without_cpu_column(&a), without_cpu_column(&b));
}

#[test]
fn experiment_output_flags_and_empty_methods() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "example = 3\nm = 8\n");
    let out = dir.path().join("empty.csv");
    let o = cxsplit(&["experiment", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(
        text,
        "method,problem,n,krylov,inner_tol,iters,cpu_s,R_k,E_k,inner1,inner2,status\n"
    );

    let cfg = write_config(
        dir.path(),
        "example = 3\nm = 8\nformat = markdown\n[method]\nscheme = I\n",
    );
    let o = cxsplit(&["experiment", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("| method |"));
    let o = cxsplit(&["experiment", &cfg, "--format", "csv"]);
    assert!(stdout(&o).starts_with("method,"));

    let cfg = write_config(
        dir.path(),
        "example = 2\nm = 8\n[method]\nscheme = II\ninner_tol = 1e-2\n",
    );
    assert_eq!(cxsplit(&["experiment", &cfg]).status.code(), Some(2));
    let cfg = write_config(dir.path(), "example = 2\nm = 8\nsolver = fast\n");
    assert_eq!(cxsplit(&["experiment", &cfg]).status.code(), Some(2));
}

#[test]
fn census_rows_per_reduction() {
    let o = cxsplit(&[
        "census",
        "--example",
        "1",
        "--m",
        "16",
        "--reductions",
        "1e-2,1e-6",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].contains(",1e-2,") && rows[1].contains(",1e-6,"));
}

#[test]
fn spectrum_prints_key_values() {
    let o = cxsplit(&[
        "spectrum",
        "--example",
        "2",
        "--m",
        "8",
        "--sigma1",
        "1000",
        "--sigma2",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let kv: Vec<(&str, &str)> = out.lines().map(|l| l.split_once('=').unwrap()).collect();
    let get = |k: &str| {
        kv.iter()
            .find(|(a, _)| *a == k)
            .map(|(_, v)| v.parse::<f64>().unwrap())
    };
    assert!((get("what_norm_2").unwrap() - 100.0).abs() < 1e-6);
    assert!(get("bound_eq4").unwrap() < 1.0);
    assert!(get("rho_B_estimate").is_none());
    assert!(get("alpha_opt").unwrap() >= 1.0);

    let o = cxsplit(&[
        "spectrum",
        "--example",
        "1",
        "--m",
        "6",
        "--method",
        "II",
        "--seed",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let rho: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("rho_B_estimate="))
        .unwrap()
        .parse()
        .unwrap();
    let bound: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("bound_eq4="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(rho < 1.0 && rho <= bound + 1e-6);
}
