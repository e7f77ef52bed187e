//! Experiment specifications and their plain-text file format.
//!
//! ```text
//! example = 2
//! m = 64, 128
//! sigma1 = 100
//! sigma2 = 100
//!
//! [method]
//! scheme = I
//!
//! [method]
//! scheme = snss
//! alpha = 5
//! beta = 0.1
//! ```
//!
//! Top-level keys take comma-separated lists where a sweep makes sense
//! (`m`, `omega`, `sigma1`, `sigma2`, `problem_dir`, `reductions`).

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::chebyshev::ChebyshevConfig;
use crate::error::{Error, Result};
use crate::krylov::{KrylovConfig, KrylovFlavor, LOOSE_INNER_THRESHOLD};
use crate::problems::{example1, example2, example3, load_problem_dir, ProblemInstance};
use crate::splitting::SplittingScheme;

use super::defaults::snss_defaults;

#[derive(Clone, Debug, PartialEq)]
pub enum ProblemSpec {
    Example1 { m: usize, omega: f64 },
    Example2 { m: usize, sigma1: f64, sigma2: f64 },
    Example3 { m: usize },
    Dir(PathBuf),
}

impl ProblemSpec {
    pub fn example(&self) -> Option<u8> {
        match self {
            Self::Example1 { .. } => Some(1),
            Self::Example2 { .. } => Some(2),
            Self::Example3 { .. } => Some(3),
            Self::Dir(_) => None,
        }
    }

    /// Order of the system when it is known without building it.
    pub fn order(&self) -> Option<usize> {
        match *self {
            Self::Example1 { m, .. } | Self::Example2 { m, .. } | Self::Example3 { m } => {
                Some(m * m)
            }
            Self::Dir(_) => None,
        }
    }

    pub fn build(&self) -> Result<ProblemInstance> {
        match self {
            Self::Example1 { m, omega } => example1(*m, *omega),
            Self::Example2 { m, sigma1, sigma2 } => example2(*m, *sigma1, *sigma2),
            Self::Example3 { m } => example3(*m),
            Self::Dir(d) => load_problem_dir(d),
        }
    }

    /// Krylov flavor and inner reduction used when a method leaves them
    /// unset. Example 2 runs plain GMRES with tight inner solves, the
    /// others FGMRES with a reduction of `1e-2`.
    pub fn default_binding(&self) -> (KrylovFlavor, f64) {
        match self {
            Self::Example2 { .. } => (KrylovFlavor::Gmres, 1e-10),
            _ => (KrylovFlavor::Fgmres, 1e-2),
        }
    }
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Example1 { m, omega } => write!(f, "example1 m={m} omega={omega}"),
            Self::Example2 { m, sigma1, sigma2 } => {
                write!(f, "example2 m={m} sigma1={sigma1} sigma2={sigma2}")
            }
            Self::Example3 { m } => write!(f, "example3 m={m}"),
            Self::Dir(d) => write!(f, "{}", d.display()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodKind {
    None,
    I,
    II,
    III,
    Snss,
}

impl FromStr for MethodKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" | "no-pre" => Ok(Self::None),
            "i" | "1" => Ok(Self::I),
            "ii" | "2" => Ok(Self::II),
            "iii" | "3" => Ok(Self::III),
            "snss" => Ok(Self::Snss),
            other => Err(Error::Config(format!("unknown method {other:?}"))),
        }
    }
}

pub fn parse_krylov(s: &str) -> Result<KrylovFlavor> {
    match s.trim().to_ascii_lowercase().as_str() {
        "gmres" => Ok(KrylovFlavor::Gmres),
        "fgmres" => Ok(KrylovFlavor::Fgmres),
        "none" => Ok(KrylovFlavor::Unpreconditioned),
        other => Err(Error::Config(format!("unknown krylov flavor {other:?}"))),
    }
}

pub fn krylov_name(k: KrylovFlavor) -> &'static str {
    match k {
        KrylovFlavor::Gmres => "gmres",
        KrylovFlavor::Fgmres => "fgmres",
        KrylovFlavor::Unpreconditioned => "none",
    }
}

/// One method entry; unset fields are filled from the problem.
#[derive(Clone, Debug, PartialEq)]
pub struct MethodSpec {
    pub kind: MethodKind,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub krylov: Option<KrylovFlavor>,
    pub inner_tol: Option<f64>,
    pub max_inner: usize,
}

impl MethodSpec {
    pub fn new(kind: MethodKind) -> Self {
        Self {
            kind,
            alpha: None,
            beta: None,
            krylov: None,
            inner_tol: None,
            max_inner: ChebyshevConfig::default().max_iters,
        }
    }

    /// Flavor and inner reduction this method uses on `problem`.
    pub fn binding(&self, problem: &ProblemSpec) -> (KrylovFlavor, f64) {
        let (flavor, tol) = problem.default_binding();
        if self.kind == MethodKind::None {
            return (KrylovFlavor::Unpreconditioned, tol);
        }
        (self.krylov.unwrap_or(flavor), self.inner_tol.unwrap_or(tol))
    }

    pub fn inner_config(&self, problem: &ProblemSpec) -> ChebyshevConfig {
        ChebyshevConfig {
            reduction: self.binding(problem).1,
            max_iters: self.max_inner,
            ..ChebyshevConfig::default()
        }
    }

    /// Checks everything that does not need the assembled problem.
    pub fn validate(&self, problem: &ProblemSpec) -> Result<()> {
        let (flavor, tol) = self.binding(problem);
        if self.kind == MethodKind::None {
            return Ok(());
        }
        if flavor == KrylovFlavor::Unpreconditioned {
            return Err(Error::Config("krylov = none needs scheme = none".into()));
        }
        self.inner_config(problem).validate()?;
        if flavor == KrylovFlavor::Gmres && tol > LOOSE_INNER_THRESHOLD {
            return Err(Error::Config(format!(
                "inner reduction {tol:e} with plain GMRES on {problem}; use FGMRES"
            )));
        }
        match self.kind {
            MethodKind::III if self.alpha.is_none() => {
                return Err(Error::Config("Method III needs alpha".into()))
            }
            MethodKind::Snss => match (self.alpha, self.beta) {
                (Some(_), Some(_)) => {}
                (None, None) => {}
                _ => {
                    return Err(Error::Config(
                        "SNSS needs both alpha and beta, or neither".into(),
                    ))
                }
            },
            _ => {}
        }
        if let Ok(Some(s)) = self.explicit_scheme() {
            s.validate()?;
        }
        Ok(())
    }

    fn explicit_scheme(&self) -> Result<Option<SplittingScheme>> {
        Ok(match self.kind {
            MethodKind::None => None,
            MethodKind::I => Some(SplittingScheme::MethodI),
            MethodKind::II => Some(SplittingScheme::MethodII),
            MethodKind::III => Some(SplittingScheme::MethodIII {
                alpha: self
                    .alpha
                    .ok_or_else(|| Error::Config("Method III needs alpha".into()))?,
            }),
            MethodKind::Snss => match (self.alpha, self.beta) {
                (Some(alpha), Some(beta)) => Some(SplittingScheme::Snss { alpha, beta }),
                _ => None,
            },
        })
    }

    /// The splitting scheme on `p`, or `None` for the unpreconditioned
    /// method. SNSS without parameters takes the bundled defaults.
    pub fn scheme_for(
        &self,
        problem: &ProblemSpec,
        p: &ProblemInstance,
    ) -> Result<Option<SplittingScheme>> {
        if let Some(s) = self.explicit_scheme()? {
            return Ok(Some(s));
        }
        if self.kind != MethodKind::Snss {
            return Ok(None);
        }
        let example = problem
            .example()
            .or_else(|| p.name.strip_prefix("example").and_then(|d| d.parse().ok()))
            .ok_or_else(|| Error::Config("SNSS on a loaded problem needs alpha and beta".into()))?;
        let (alpha, beta) = snss_defaults(example, p).ok_or_else(|| {
            Error::Config(format!(
                "no bundled SNSS parameters for {problem} (n={}); give alpha and beta",
                p.n
            ))
        })?;
        Ok(Some(SplittingScheme::Snss { alpha, beta }))
    }

    /// Row label before the problem is known.
    pub fn label(&self) -> String {
        match self.explicit_scheme() {
            Ok(Some(s)) => s.to_string(),
            _ => match self.kind {
                MethodKind::None => "No-pre".into(),
                MethodKind::Snss => "SNSS".into(),
                MethodKind::III => "Method III".into(),
                _ => unreachable!("schemes I and II are always explicit"),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "markdown" | "md" => Ok(Self::Markdown),
            other => Err(Error::Config(format!("unknown table format {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub problems: Vec<ProblemSpec>,
    pub methods: Vec<MethodSpec>,
    pub outer_reduction: f64,
    pub max_outer: usize,
    /// Seed for the randomized spectral probes; solves are deterministic.
    pub seed: u64,
    pub format: TableFormat,
    pub output: Option<PathBuf>,
    /// Inner reductions swept by the Chebyshev census.
    pub reductions: Vec<f64>,
}

impl ExperimentSpec {
    pub fn new(problems: Vec<ProblemSpec>, methods: Vec<MethodSpec>) -> Self {
        let k = KrylovConfig::default();
        Self {
            problems,
            methods,
            outer_reduction: k.outer_reduction,
            max_outer: k.max_outer,
            seed: 0,
            format: TableFormat::Csv,
            output: None,
            reductions: vec![1e-2, 1e-4, 1e-6, 1e-10],
        }
    }

    pub fn krylov_config(&self, flavor: KrylovFlavor) -> KrylovConfig {
        KrylovConfig {
            flavor,
            outer_reduction: self.outer_reduction,
            max_outer: self.max_outer,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.krylov_config(KrylovFlavor::Gmres).validate()?;
        if self.problems.is_empty() {
            return Err(Error::Config("no problem given".into()));
        }
        for p in &self.problems {
            for m in &self.methods {
                m.validate(p)?;
            }
        }
        for &r in &self.reductions {
            ChebyshevConfig::presb(r).validate()?;
        }
        Ok(())
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut top = TopLevel::default();
        let mut methods: Vec<(usize, MethodSpec)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = raw.split('#').next().unwrap_or("").trim();
            if s.is_empty() {
                continue;
            }
            if s.starts_with('[') {
                if s != "[method]" {
                    return Err(parse_err(line, format!("unknown section {s}")));
                }
                methods.push((line, MethodSpec::new(MethodKind::I)));
                continue;
            }
            let (key, value) = s
                .split_once('=')
                .ok_or_else(|| parse_err(line, format!("expected key = value, found {s:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let res = match methods.last_mut() {
                Some((_, m)) => set_method_key(m, key, value),
                None => top.set(key, value),
            };
            res.map_err(|e| parse_err(line, e.to_string()))?;
        }
        let mut spec = top.finish()?;
        spec.methods = methods.into_iter().map(|(_, m)| m).collect();
        spec.validate()?;
        Ok(spec)
    }
}

fn parse_err(line: usize, msg: String) -> Error {
    Error::Parse { line, msg }
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').map(|x| num(key, x)).collect()
}

fn set_method_key(m: &mut MethodSpec, key: &str, value: &str) -> Result<()> {
    match key {
        "scheme" => m.kind = value.parse()?,
        "krylov" => m.krylov = Some(parse_krylov(value)?),
        "inner_tol" => m.inner_tol = Some(num(key, value)?),
        "max_inner" => m.max_inner = num(key, value)?,
        "alpha" => m.alpha = Some(num(key, value)?),
        "beta" => m.beta = Some(num(key, value)?),
        _ => return Err(Error::Config(format!("unknown method key {key:?}"))),
    }
    Ok(())
}

#[derive(Default)]
struct TopLevel {
    example: Option<u8>,
    m: Vec<usize>,
    omega: Vec<f64>,
    sigma1: Vec<f64>,
    sigma2: Vec<f64>,
    dirs: Vec<PathBuf>,
    outer_tol: Option<f64>,
    max_outer: Option<usize>,
    seed: Option<u64>,
    format: Option<TableFormat>,
    output: Option<PathBuf>,
    reductions: Option<Vec<f64>>,
}

impl TopLevel {
    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "example" => self.example = Some(num(key, value)?),
            "m" => self.m = list(key, value)?,
            "omega" => self.omega = list(key, value)?,
            "sigma1" => self.sigma1 = list(key, value)?,
            "sigma2" => self.sigma2 = list(key, value)?,
            "problem_dir" => {
                self.dirs = value.split(',').map(|d| PathBuf::from(d.trim())).collect()
            }
            "outer_tol" => self.outer_tol = Some(num(key, value)?),
            "max_outer" => self.max_outer = Some(num(key, value)?),
            "seed" => self.seed = Some(num(key, value)?),
            "format" => self.format = Some(value.parse()?),
            "output" => self.output = Some(PathBuf::from(value)),
            "reductions" => self.reductions = Some(list(key, value)?),
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    fn finish(self) -> Result<ExperimentSpec> {
        let mut problems = Vec::new();
        if let Some(ex) = self.example {
            if !self.dirs.is_empty() {
                return Err(Error::Config(
                    "give either example or problem_dir, not both".into(),
                ));
            }
            if self.m.is_empty() {
                return Err(Error::Config("example needs m".into()));
            }
            problems = expand(ex, &self.m, &self.omega, &self.sigma1, &self.sigma2)?;
        } else {
            problems.extend(self.dirs.into_iter().map(ProblemSpec::Dir));
        }
        let mut spec = ExperimentSpec::new(problems, Vec::new());
        if let Some(t) = self.outer_tol {
            spec.outer_reduction = t;
        }
        if let Some(k) = self.max_outer {
            spec.max_outer = k;
        }
        if let Some(s) = self.seed {
            spec.seed = s;
        }
        if let Some(f) = self.format {
            spec.format = f;
        }
        spec.output = self.output;
        if let Some(r) = self.reductions {
            spec.reductions = r;
        }
        Ok(spec)
    }
}

fn or_default(v: &[f64], d: f64) -> Vec<f64> {
    if v.is_empty() {
        vec![d]
    } else {
        v.to_vec()
    }
}

/// Problems for every combination of the listed parameters, `m` slowest.
/// Missing values default to `omega = 1`, `sigma1 = 100`, `sigma2 = 10`.
pub fn expand(
    example: u8,
    ms: &[usize],
    omega: &[f64],
    sigma1: &[f64],
    sigma2: &[f64],
) -> Result<Vec<ProblemSpec>> {
    let mut out = Vec::new();
    for &m in ms {
        match example {
            1 => {
                for &omega in &or_default(omega, 1.0) {
                    out.push(ProblemSpec::Example1 { m, omega });
                }
            }
            2 => {
                for &sigma1 in &or_default(sigma1, 100.0) {
                    for &sigma2 in &or_default(sigma2, 10.0) {
                        out.push(ProblemSpec::Example2 { m, sigma1, sigma2 });
                    }
                }
            }
            3 => out.push(ProblemSpec::Example3 { m }),
            other => return Err(Error::Config(format!("unknown example {other}"))),
        }
    }
    Ok(out)
}
