//! Experiment runner: builds problems, runs every method on each, and
//! collects one row per cell.

mod config;
mod defaults;
mod table;

use std::time::Instant;

pub use config::{
    expand, krylov_name, parse_krylov, ExperimentSpec, MethodKind, MethodSpec, ProblemSpec,
    TableFormat,
};
pub use defaults::snss_defaults;
pub use table::{emit_history, emit_table, render_table, COLUMNS};

use crate::error::{Error, Result};
use crate::krylov::{gmres_solve, KrylovFlavor, SolveReport, LOOSE_INNER_THRESHOLD};
use crate::problems::ProblemInstance;
use crate::splitting::build_operators;

#[derive(Clone, Debug, PartialEq)]
pub enum CellStatus {
    Converged,
    NotConverged,
    Failed(String),
}

impl CellStatus {
    pub fn label(&self) -> String {
        match self {
            Self::Converged => "converged".into(),
            Self::NotConverged => "not-converged".into(),
            Self::Failed(msg) => format!("failed: {msg}"),
        }
    }
}

/// One (problem, method) cell.
#[derive(Clone, Debug)]
pub struct Row {
    pub method: String,
    pub problem: String,
    pub n: Option<usize>,
    pub krylov: KrylovFlavor,
    pub inner_tol: Option<f64>,
    /// Setup plus solve time.
    pub cpu_seconds: f64,
    pub report: Option<SolveReport>,
    pub status: CellStatus,
}

impl Row {
    pub fn iters(&self) -> Option<usize> {
        self.report.as_ref().map(|r| r.iters)
    }

    pub fn inner_mean(&self, k: usize) -> Option<f64> {
        self.report
            .as_ref()
            .and_then(|r| r.inner_iter_means.get(k).copied().flatten())
    }
}

/// Runs every method on every problem, in spec order. Per-cell failures
/// end up in the row; only an invalid spec is an error.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<Row>> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(spec.problems.len() * spec.methods.len());
    for ps in &spec.problems {
        if spec.methods.is_empty() {
            continue;
        }
        let built = ps.build();
        for m in &spec.methods {
            rows.push(run_cell(spec, ps, built.as_ref(), m));
        }
    }
    Ok(rows)
}

/// Mean inner Chebyshev iterations per subsystem for each reduction in
/// `spec.reductions`. Loose reductions run under FGMRES.
pub fn chebyshev_census(spec: &ExperimentSpec) -> Result<Vec<Row>> {
    if spec.problems.len() != 1 || spec.methods.len() != 1 {
        return Err(Error::Config(
            "the census takes exactly one problem and one method".into(),
        ));
    }
    if spec.methods[0].kind == MethodKind::None {
        return Err(Error::Config("the census needs a splitting method".into()));
    }
    let mut cells = Vec::with_capacity(spec.reductions.len());
    for &r in &spec.reductions {
        let mut m = spec.methods[0].clone();
        m.inner_tol = Some(r);
        if r > LOOSE_INNER_THRESHOLD {
            m.krylov = Some(KrylovFlavor::Fgmres);
        }
        cells.push(m);
    }
    let census = ExperimentSpec {
        methods: cells,
        ..spec.clone()
    };
    run_experiment(&census)
}

fn run_cell(
    spec: &ExperimentSpec,
    ps: &ProblemSpec,
    built: std::result::Result<&ProblemInstance, &Error>,
    m: &MethodSpec,
) -> Row {
    let (flavor, tol) = m.binding(ps);
    let mut row = Row {
        method: m.label(),
        problem: ps.to_string(),
        n: ps.order(),
        krylov: flavor,
        inner_tol: (m.kind != MethodKind::None).then_some(tol),
        cpu_seconds: 0.0,
        report: None,
        status: CellStatus::Failed(String::new()),
    };
    let p = match built {
        Ok(p) => p,
        Err(e) => {
            row.status = CellStatus::Failed(e.to_string());
            return row;
        }
    };
    row.n = Some(p.n);
    let start = Instant::now();
    let outcome = solve_cell(spec, ps, p, m, &mut row.method);
    row.cpu_seconds = start.elapsed().as_secs_f64();
    match outcome {
        Ok(rep) => {
            row.status = if rep.converged {
                CellStatus::Converged
            } else {
                CellStatus::NotConverged
            };
            row.report = Some(rep);
        }
        Err(e) => row.status = CellStatus::Failed(e.to_string()),
    }
    row
}

fn solve_cell(
    spec: &ExperimentSpec,
    ps: &ProblemSpec,
    p: &ProblemInstance,
    m: &MethodSpec,
    label: &mut String,
) -> Result<SolveReport> {
    let (flavor, _) = m.binding(ps);
    let cfg = spec.krylov_config(flavor);
    match m.scheme_for(ps, p)? {
        None => Ok(gmres_solve(p, None, &cfg)?.1),
        Some(scheme) => {
            *label = scheme.to_string();
            let ops = build_operators(p, scheme, m.inner_config(ps))?;
            Ok(gmres_solve(p, Some(&ops), &cfg)?.1)
        }
    }
}
