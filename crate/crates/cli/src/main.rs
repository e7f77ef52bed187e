use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cxsplit::harness::{expand, parse_krylov, render_table};
use cxsplit::{
    chebyshev_census, run_experiment, spectral_estimates, CellStatus, Error, ExperimentSpec,
    MethodKind, MethodSpec, ProblemSpec, Row, SplittingScheme,
};

#[derive(Parser)]
#[command(
    name = "cxsplit",
    version,
    about = "Splitting solvers for complex symmetric systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a model problem as Matrix Market files.
    Generate {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one problem with one method and print a one-row table.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        method: MethodArgs,
        #[command(flatten)]
        outer: OuterArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Also write the residual history as CSV.
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Run an experiment file and print its table.
    Experiment {
        /// Experiment file (key = value lines with [method] sections).
        config: PathBuf,
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean inner Chebyshev iterations across inner reductions.
    Census {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        method: MethodArgs,
        #[command(flatten)]
        outer: OuterArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Inner reductions, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [1e-2, 1e-4, 1e-6, 1e-10])]
        reductions: Vec<f64>,
    },
    /// Print hatted norms, bounds and a contraction estimate.
    Spectrum {
        #[command(flatten)]
        problem: ProblemArgs,
        /// I, II, III, snss or none.
        #[arg(long, default_value = "none")]
        method: String,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct ProblemArgs {
    /// Model problem 1, 2 or 3.
    #[arg(long)]
    example: Option<u8>,
    /// Grid points per direction; n = m^2.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    sigma1: Option<f64>,
    #[arg(long)]
    sigma2: Option<f64>,
    /// Directory written by `generate` (instead of --example).
    #[arg(long, conflicts_with = "example")]
    problem_dir: Option<PathBuf>,
}

impl ProblemArgs {
    fn spec(&self) -> Result<ProblemSpec, Error> {
        if let Some(d) = &self.problem_dir {
            return Ok(ProblemSpec::Dir(d.clone()));
        }
        let ex = self
            .example
            .ok_or_else(|| Error::Config("give --example or --problem-dir".into()))?;
        let m = self
            .m
            .ok_or_else(|| Error::Config("--example needs --m".into()))?;
        let one = |v: Option<f64>| v.into_iter().collect::<Vec<_>>();
        let mut p = expand(
            ex,
            &[m],
            &one(self.omega),
            &one(self.sigma1),
            &one(self.sigma2),
        )?;
        Ok(p.remove(0))
    }
}

#[derive(Args)]
struct MethodArgs {
    /// I, II, III, snss or none.
    #[arg(long, default_value = "I")]
    method: String,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// gmres or fgmres; defaults follow the example.
    #[arg(long)]
    krylov: Option<String>,
    #[arg(long)]
    inner_tol: Option<f64>,
    #[arg(long, default_value_t = 20)]
    max_inner: usize,
}

impl MethodArgs {
    fn spec(&self) -> Result<MethodSpec, Error> {
        let mut m = MethodSpec::new(self.method.parse()?);
        m.alpha = self.alpha;
        m.beta = self.beta;
        m.krylov = self.krylov.as_deref().map(parse_krylov).transpose()?;
        m.inner_tol = self.inner_tol;
        m.max_inner = self.max_inner;
        Ok(m)
    }
}

#[derive(Args)]
struct OuterArgs {
    #[arg(long, default_value_t = 1e-10)]
    outer_tol: f64,
    #[arg(long, default_value_t = 1000)]
    max_outer: usize,
}

#[derive(Args)]
struct OutputArgs {
    /// csv or markdown.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn single_spec(
    problem: &ProblemArgs,
    method: &MethodArgs,
    outer: &OuterArgs,
    output: &OutputArgs,
) -> Result<ExperimentSpec, Error> {
    let mut spec = ExperimentSpec::new(vec![problem.spec()?], vec![method.spec()?]);
    spec.outer_reduction = outer.outer_tol;
    spec.max_outer = outer.max_outer;
    spec.format = output.format.parse()?;
    spec.output = output.out.clone();
    Ok(spec)
}

fn write_output(text: &str, out: Option<&PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Writes the table and reports whether every cell converged.
fn finish_table(rows: &[Row], spec: &ExperimentSpec) -> Result<bool, Error> {
    write_output(&render_table(rows, spec.format), spec.output.as_ref())?;
    for r in rows {
        if let CellStatus::Failed(msg) = &r.status {
            eprintln!("{} on {}: {msg}", r.method, r.problem);
        }
    }
    Ok(rows.iter().all(|r| r.status == CellStatus::Converged))
}

fn scheme_from(
    method: &str,
    alpha: Option<f64>,
    beta: Option<f64>,
) -> Result<Option<SplittingScheme>, Error> {
    let need = |v: Option<f64>, what: &str| {
        v.ok_or_else(|| Error::Config(format!("--method {method} needs --{what}")))
    };
    Ok(match method.parse::<MethodKind>()? {
        MethodKind::None => None,
        MethodKind::I => Some(SplittingScheme::MethodI),
        MethodKind::II => Some(SplittingScheme::MethodII),
        MethodKind::III => Some(SplittingScheme::MethodIII {
            alpha: need(alpha, "alpha")?,
        }),
        MethodKind::Snss => Some(SplittingScheme::Snss {
            alpha: need(alpha, "alpha")?,
            beta: need(beta, "beta")?,
        }),
    })
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Generate { problem, out } => {
            let p = problem.spec()?.build()?;
            p.export(&out)?;
            eprintln!("wrote {} (n={}) to {}", p.name, p.n, out.display());
            Ok(true)
        }
        Command::Solve {
            problem,
            method,
            outer,
            output,
            history,
        } => {
            let spec = single_spec(&problem, &method, &outer, &output)?;
            let rows = run_experiment(&spec)?;
            if let (Some(path), Some(rep)) = (&history, rows[0].report.as_ref()) {
                cxsplit::harness::emit_history(rep, BufWriter::new(File::create(path)?))?;
            }
            finish_table(&rows, &spec)
        }
        Command::Experiment {
            config,
            format,
            out,
        } => {
            let mut spec = ExperimentSpec::from_file(&config)?;
            if let Some(f) = format {
                spec.format = f.parse()?;
            }
            if out.is_some() {
                spec.output = out;
            }
            let rows = run_experiment(&spec)?;
            finish_table(&rows, &spec)
        }
        Command::Census {
            problem,
            method,
            outer,
            output,
            reductions,
        } => {
            let mut spec = single_spec(&problem, &method, &outer, &output)?;
            spec.reductions = reductions;
            spec.validate()?;
            let rows = chebyshev_census(&spec)?;
            finish_table(&rows, &spec)
        }
        Command::Spectrum {
            problem,
            method,
            alpha,
            beta,
            seed,
        } => {
            let scheme = scheme_from(&method, alpha, beta)?;
            let p = problem.spec()?.build()?;
            let alphas: Vec<f64> = [1.0, 2.0, 5.0].into_iter().chain(alpha).collect();
            let est = spectral_estimates(&p, scheme, &alphas, seed)?;
            print!("{}", est.to_key_values());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Parse { .. } | Error::InvalidParameter(_) => {
                    ExitCode::from(2)
                }
                _ => ExitCode::FAILURE,
            }
        }
    }
}
