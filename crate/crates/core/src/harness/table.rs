//! CSV and markdown rendering of experiment rows.

use std::io::Write;

use crate::error::{Error, Result};
use crate::krylov::SolveReport;

use super::config::{krylov_name, TableFormat};
use super::Row;

pub const COLUMNS: [&str; 12] = [
    "method",
    "problem",
    "n",
    "krylov",
    "inner_tol",
    "iters",
    "cpu_s",
    "R_k",
    "E_k",
    "inner1",
    "inner2",
    "status",
];

const MISSING: &str = "-";

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_else(|| MISSING.to_string())
}

fn cells(r: &Row) -> Vec<String> {
    let rep = r.report.as_ref();
    vec![
        r.method.clone(),
        r.problem.clone(),
        opt(r.n, |n| n.to_string()),
        krylov_name(r.krylov).to_string(),
        opt(r.inner_tol, |t| format!("{t:e}")),
        opt(r.iters(), |k| k.to_string()),
        format!("{:.3}", r.cpu_seconds),
        opt(rep.map(|x| x.r_k), |v| format!("{v:.3e}")),
        opt(rep.and_then(|x| x.e_k), |v| format!("{v:.3e}")),
        opt(r.inner_mean(0), |v| format!("{v:.2}")),
        opt(r.inner_mean(1), |v| format!("{v:.2}")),
        r.status.label(),
    ]
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Config(format!("csv output: {other:?}")),
    }
}

/// Writes `rows` with a header line; an empty slice gives the header only.
pub fn emit_table<W: Write>(rows: &[Row], format: TableFormat, out: W) -> Result<()> {
    match format {
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(COLUMNS).map_err(csv_err)?;
            for r in rows {
                w.write_record(cells(r)).map_err(csv_err)?;
            }
            w.flush()?;
        }
        TableFormat::Markdown => {
            let mut out = out;
            writeln!(out, "| {} |", COLUMNS.join(" | "))?;
            writeln!(out, "|{}", "---|".repeat(COLUMNS.len()))?;
            for r in rows {
                let c: Vec<String> = cells(r)
                    .into_iter()
                    .map(|s| s.replace('|', "\\|"))
                    .collect();
                writeln!(out, "| {} |", c.join(" | "))?;
            }
        }
    }
    Ok(())
}

pub fn render_table(rows: &[Row], format: TableFormat) -> String {
    let mut buf = Vec::new();
    emit_table(rows, format, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("table cells are UTF-8")
}

/// Residual history as `iter,relative_residual` lines.
pub fn emit_history<W: Write>(report: &SolveReport, mut out: W) -> Result<()> {
    writeln!(out, "iter,relative_residual")?;
    for (k, r) in report.residual_history.iter().enumerate() {
        writeln!(out, "{k},{r:.6e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::{run_experiment, CellStatus, ExperimentSpec};
    use super::*;
    use crate::krylov::KrylovFlavor;

    fn row() -> Row {
        Row {
            method: "SNSS(alpha=5,beta=0.1)".into(),
            problem: "example2 m=64 sigma1=100 sigma2=10".into(),
            n: Some(4096),
            krylov: KrylovFlavor::Gmres,
            inner_tol: Some(1e-10),
            cpu_seconds: 0.25,
            report: Some(SolveReport {
                iters: 13,
                converged: true,
                residual_history: vec![1.0, 1e-3, 3.02e-11],
                r_k: 3.0234e-11,
                e_k: Some(1.5615e-10),
                wall_seconds: 0.2,
                inner_iter_means: vec![None, Some(13.0)],
            }),
            status: CellStatus::Converged,
        }
    }

    #[test]
    fn csv_single_row_layout() {
        let s = render_table(&[row()], TableFormat::Csv);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], COLUMNS.join(","));
        assert_eq!(
            lines[1],
            "\"SNSS(alpha=5,beta=0.1)\",example2 m=64 sigma1=100 sigma2=10,4096,gmres,1e-10,13,0.250,3.023e-11,1.561e-10,-,13.00,converged"
        );
        assert_eq!(lines.len(), 2);
    }

    #[test]
    fn csv_parse_back() {
        let mut r2 = row();
        r2.method = "No-pre".into();
        r2.krylov = KrylovFlavor::Unpreconditioned;
        r2.inner_tol = None;
        r2.status = CellStatus::Failed("bad, \"quoted\" input".into());
        let s = render_table(&[row(), r2], TableFormat::Csv);
        let mut rd = csv::Reader::from_reader(s.as_bytes());
        let header: Vec<String> = rd.headers().unwrap().iter().map(String::from).collect();
        assert_eq!(header, COLUMNS);
        let recs: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
        assert_eq!(recs.len(), 2);
        assert_eq!(&recs[0][0], "SNSS(alpha=5,beta=0.1)");
        assert_eq!(recs[0][5].parse::<usize>().unwrap(), 13);
        let rk: f64 = recs[0][7].parse().unwrap();
        assert!((rk - 3.0234e-11).abs() <= 5e-4 * 3.0234e-11);
        assert_eq!(recs[0][4].parse::<f64>().unwrap(), 1e-10);
        assert_eq!(&recs[1][4], "-");
        assert_eq!(&recs[1][11], "failed: bad, \"quoted\" input");
    }

    #[test]
    fn markdown_layout() {
        let s = render_table(&[row()], TableFormat::Markdown);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("| method | problem | n |"));
        assert_eq!(lines[1], format!("|{}", "---|".repeat(12)));
        assert!(lines[2].contains("| 3.023e-11 |"));
    }

    #[test]
    fn header_only_for_no_rows() {
        assert_eq!(
            render_table(&[], TableFormat::Csv),
            format!("{}\n", COLUMNS.join(","))
        );
        assert_eq!(render_table(&[], TableFormat::Markdown).lines().count(), 2);
    }

    #[test]
    fn deterministic_modulo_wall_clock() {
        let spec = ExperimentSpec::parse(
            "example = 1\nm = 8\nomega = 1, 50\n[method]\nscheme = I\n[method]\nscheme = II\n[method]\nscheme = snss\nalpha = 2\nbeta = 0.1\n",
        )
        .unwrap();
        let strip = |s: String| -> Vec<Vec<String>> {
            let mut rd = csv::Reader::from_reader(s.as_bytes());
            rd.records()
                .map(|r| {
                    let r = r.unwrap();
                    r.iter()
                        .enumerate()
                        .filter(|(i, _)| *i != 6)
                        .map(|(_, c)| c.to_string())
                        .collect()
                })
                .collect()
        };
        let a = strip(render_table(
            &run_experiment(&spec).unwrap(),
            TableFormat::Csv,
        ));
        let b = strip(render_table(
            &run_experiment(&spec).unwrap(),
            TableFormat::Csv,
        ));
        assert_eq!(a.len(), 6);
        assert_eq!(a, b);
    }

    #[test]
    fn history_lines() {
        let mut buf = Vec::new();
        emit_history(row().report.as_ref().unwrap(), &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().count(), 4);
        assert_eq!(s.lines().nth(2), Some("1,1.000000e-3"));
    }
}
