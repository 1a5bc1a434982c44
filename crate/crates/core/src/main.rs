use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;

use affval::bodies::io::parse_body;
use affval::bodies::{ConvexBody, Ellipsoid};
use affval::classical::{
    lp_centroid, lp_projection, projection_body, q_mean_width_body, q_projection_body,
    DiscreteMeasure,
};
use affval::harness::{
    emit_csv, emit_plotdata, parse_tolerance, report_table, run_checks, RunConfig, Table,
    DEFAULT_QUAD_TOL, DEFAULT_SEED, DEFAULT_SPHERE_TOL,
};
use affval::rep_theory::{decompose_sym_mixed, lr_coefficients, schur_eval, Partition};
use affval::semicont::{phi_f_p, psi_f_p, semicontinuity_experiment, ConcFunction};
use affval::symtensor::{read_tensors, SymTensor, Variance};
use affval::tensor_val::{isotypic, phi_lambda, phi_pq, psi_lambda, psi_pq};
use affval::{Error, Result};

/// Numerical evaluation of SL(n)-invariant Minkowski valuations.
#[derive(Debug, Parser)]
#[command(name = "affval", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Seed of the generator behind every random choice.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Tolerance override for one check, as NAME=VALUE. Repeatable.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    tol: Vec<String>,
    /// Use a fixed product rule of this level on the sphere.
    #[arg(long, global = true)]
    sphere_level: Option<usize>,
    /// Relative tolerance of adaptive facet quadrature.
    #[arg(long, global = true, default_value_t = DEFAULT_QUAD_TOL)]
    quad_tol: f64,
    /// Relative tolerance of adaptive sphere quadrature.
    #[arg(long, global = true, default_value_t = DEFAULT_SPHERE_TOL)]
    sphere_tol: f64,
    /// Write results into this directory instead of standard output.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Dimensions used by the geometric checks.
    #[arg(long, global = true, value_delimiter = ',', default_value = "2,3")]
    dims: Vec<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate support functions of valuation bodies.
    Valuate {
        #[command(subcommand)]
        what: Valuate,
    },
    /// Decompose Sym^p V ⊗ Sym^q V* into irreducible summands.
    Decompose {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: usize,
    },
    /// Evaluate a Schur polynomial or expand a product of two.
    Schur {
        #[arg(long, value_delimiter = ',', required = true)]
        lambda: Vec<usize>,
        /// Second factor; prints Littlewood–Richardson coefficients.
        #[arg(long, value_delimiter = ',')]
        mu: Option<Vec<usize>>,
        /// Point at which to evaluate.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        at: Option<Vec<f64>>,
        /// Number of variables for the expansion.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Run the invariant checks.
    Check {
        /// Run only these checks.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
    },
    /// Numerical experiments.
    Experiment {
        #[command(subcommand)]
        what: Experiment,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[allow(non_camel_case_types)]
enum ClassicalKind {
    /// Projection body.
    Pi,
    /// L^p centroid body.
    #[value(name = "gamma_p")]
    Gamma_p,
    /// L^q projection body.
    #[value(name = "pi_q")]
    Pi_q,
    /// Q-projection body.
    #[value(name = "pi_Q")]
    Pi_Q,
    /// Mean width body of a discrete measure.
    #[value(name = "m_mu")]
    M_mu,
}

#[derive(Debug, Subcommand)]
enum Valuate {
    /// Classical bodies; one direction per line of the directions file.
    Classical {
        #[arg(long, value_enum)]
        kind: ClassicalKind,
        #[arg(long)]
        body: PathBuf,
        /// Whitespace or comma separated rows; matrices are given row-major.
        #[arg(long)]
        directions: PathBuf,
        /// Exponent of gamma_p and pi_q.
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Vertices of Q, one per line (pi_Q).
        #[arg(long)]
        q_body: Option<PathBuf>,
        /// Lines `weight u_1 … u_p` (m_mu).
        #[arg(long)]
        measure: Option<PathBuf>,
    },
    /// Φ^{p,q} or Ψ^{p,q}, optionally projected to an isotypic component.
    Tensor {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: usize,
        #[arg(long)]
        component: Option<usize>,
        #[arg(long)]
        psi: bool,
        #[arg(long)]
        body: PathBuf,
        /// Tensor file with one or more tensors.
        #[arg(long = "phi", alias = "tensors")]
        tensors: PathBuf,
    },
    /// The curvature valuations Φ_f^p or Ψ_f^p.
    Semicont {
        /// Concave function, `power:γ` or `clamp:c`.
        #[arg(long)]
        f: String,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        body: PathBuf,
        #[arg(long = "phi", alias = "tensors")]
        tensors: PathBuf,
        #[arg(long)]
        psi: bool,
    },
}

#[derive(Debug, Subcommand)]
enum Experiment {
    /// Φ_f^p along inscribed polytopes converging to a smooth body.
    Semicontinuity {
        #[arg(long)]
        levels: usize,
        /// Smooth body; the unit ball of dimension `--n` by default.
        #[arg(long)]
        body: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value = "power:0.25")]
        f: String,
        /// Tensor file; the constant 1 with `p = 0` by default.
        #[arg(long = "phi")]
        tensor: Option<PathBuf>,
    },
}

enum Failure {
    Checks,
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } | Error::Parse { .. } => 3,
        _ => 2,
    }
}

fn config(g: &Global) -> Result<RunConfig> {
    let mut tolerances = BTreeMap::new();
    for t in &g.tol {
        let (name, v) = parse_tolerance(t)?;
        tolerances.insert(name, v);
    }
    let cfg = RunConfig {
        seed: g.seed,
        tolerances,
        sphere_level: g.sphere_level,
        quad_tol: g.quad_tol,
        sphere_tol: g.sphere_tol,
        out: g.out.clone(),
        dims: g.dims.clone(),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("AFFVAL_THREADS") else {
        return Ok(());
    };
    let threads: usize = v.trim().parse().ok().filter(|t| *t > 0).ok_or_else(|| {
        Error::InvalidInput(format!(
            "AFFVAL_THREADS must be a positive integer, got '{v}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::InvalidInput(e.to_string()))
}

/// Writes `name.csv` into the output directory, or the table to stdout.
fn output(cfg: &RunConfig, name: &str, table: &Table) -> Result<()> {
    match &cfg.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            emit_csv(table, &dir.join(format!("{name}.csv")))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(table.to_csv_string().as_bytes())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let origin = path.display().to_string();
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| Error::parse(&origin, i + 1, format!("'{s}' is not a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn fmt(x: f64) -> String {
    format!("{x:.15e}")
}

fn need_polytope<'a>(body: &'a ConvexBody, what: &str) -> Result<&'a affval::bodies::Polytope> {
    body.as_polytope()
        .ok_or_else(|| Error::Unsupported(format!("{what} is only implemented for polytopes")))
}

fn matrix_from_row(
    row: &[f64],
    rows: usize,
    cols: usize,
    line: usize,
    origin: &str,
) -> Result<DMatrix<f64>> {
    if row.len() != rows * cols {
        return Err(Error::parse(
            origin,
            line,
            format!("expected {} entries, found {}", rows * cols, row.len()),
        ));
    }
    Ok(DMatrix::from_row_slice(rows, cols, row))
}

#[allow(clippy::too_many_arguments)]
fn valuate_classical(
    cfg: &RunConfig,
    kind: ClassicalKind,
    body: &Path,
    directions: &Path,
    p: f64,
    q_body: Option<&Path>,
    measure: Option<&Path>,
) -> Result<()> {
    let k = parse_body(body)?;
    let n = k.dim();
    let dirs = read_rows(directions)?;
    let origin = directions.display().to_string();
    let width = dirs.first().map(Vec::len).unwrap_or(n);
    let mut header: Vec<String> = (1..=width).map(|i| format!("x{i}")).collect();
    header.push("value".into());
    let mut table = Table::new(header);
    let q_pts = match (kind, q_body) {
        (ClassicalKind::Pi_Q, Some(path)) => read_rows(path)?,
        (ClassicalKind::Pi_Q, None) => {
            return Err(Error::InvalidInput("pi_Q needs --q-body".into()))
        }
        _ => Vec::new(),
    };
    let mu = match (kind, measure) {
        (ClassicalKind::M_mu, Some(path)) => {
            let rows = read_rows(path)?;
            let weights = rows
                .iter()
                .map(|r| r.first().copied().unwrap_or(0.0))
                .collect();
            let atoms = rows
                .iter()
                .map(|r| r.get(1..).unwrap_or_default().to_vec())
                .collect();
            Some(DiscreteMeasure::new(atoms, weights)?)
        }
        (ClassicalKind::M_mu, None) => {
            return Err(Error::InvalidInput("m_mu needs --measure".into()))
        }
        _ => None,
    };
    let zonotope = match kind {
        ClassicalKind::Pi => Some(projection_body(need_polytope(&k, "the projection body")?)),
        _ => None,
    };
    for (line, d) in dirs.iter().enumerate() {
        if d.len() != width {
            return Err(Error::parse(
                &origin,
                line + 1,
                format!("expected {width} entries, found {}", d.len()),
            ));
        }
        let value = match kind {
            ClassicalKind::Pi => {
                if d.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: d.len(),
                    });
                }
                zonotope.as_ref().expect("built above").support(d)
            }
            ClassicalKind::Gamma_p => lp_centroid(&k, p, d)?,
            ClassicalKind::Pi_q => {
                lp_projection(need_polytope(&k, "the L^q projection body")?, p, d)?
            }
            ClassicalKind::Pi_Q => {
                let cols = q_pts.first().map(Vec::len).unwrap_or(0);
                let xi = matrix_from_row(d, n, cols, line + 1, &origin)?;
                q_projection_body(need_polytope(&k, "the Q-projection body")?, &q_pts, &xi)?
            }
            ClassicalKind::M_mu => {
                let mu = mu.as_ref().expect("built above");
                let xi = matrix_from_row(d, mu.dim(), n, line + 1, &origin)?;
                q_mean_width_body(&k, mu, &xi)?
            }
        };
        let mut row: Vec<String> = d.iter().map(|x| x.to_string()).collect();
        row.push(fmt(value));
        table.push(row)?;
    }
    output(cfg, "classical", &table)
}

#[allow(clippy::too_many_arguments)]
fn valuate_tensor(
    cfg: &RunConfig,
    p: usize,
    q: usize,
    component: Option<usize>,
    psi: bool,
    body: &Path,
    tensors: &Path,
) -> Result<()> {
    let k = parse_body(body)?;
    let n = k.dim();
    let opts = cfg.eval_options(n)?;
    let decomposition = component.map(|_| isotypic(n, p, q)).transpose()?;
    let mut table = Table::new(["phi-id", "value", "error_estimate"]);
    for (id, t) in read_tensors(tensors)?.into_iter().enumerate() {
        let t = t.into_mixed();
        if (t.n(), t.p(), t.q()) != (n, p, q) {
            return Err(Error::InvalidInput(format!(
                "tensor {id} has shape (n, p, q) = ({}, {}, {}), expected ({n}, {p}, {q})",
                t.n(),
                t.p(),
                t.q()
            )));
        }
        let report = match (&decomposition, component, psi) {
            (Some(d), Some(i), false) => phi_lambda(&k, d, i, &t, &opts)?,
            (Some(d), Some(i), true) => psi_lambda(&k, d, i, &t, &opts)?,
            (_, _, false) => phi_pq(&k, &t, &opts)?,
            (_, _, true) => psi_pq(&k, &t, &opts)?,
        };
        table.push(vec![
            id.to_string(),
            fmt(report.value),
            fmt(report.error_estimate),
        ])?;
    }
    output(cfg, "tensor", &table)
}

fn valuate_semicont(
    cfg: &RunConfig,
    f: &str,
    p: usize,
    body: &Path,
    tensors: &Path,
    psi: bool,
) -> Result<()> {
    let f = ConcFunction::parse(f)?;
    let k = parse_body(body)?;
    let sphere = cfg.sphere(k.dim())?;
    let mut table = Table::new(["phi-id", "value", "error_estimate"]);
    for (id, t) in read_tensors(tensors)?.into_iter().enumerate() {
        let t = t.into_sym()?;
        if t.degree() != p {
            return Err(Error::DegreeMismatch {
                expected: p,
                found: t.degree(),
            });
        }
        let report = if psi {
            psi_f_p(&k, &f, &t, &sphere)?
        } else {
            phi_f_p(&k, &f, &t, &sphere)?
        };
        table.push(vec![
            id.to_string(),
            fmt(report.value),
            fmt(report.error_estimate),
        ])?;
    }
    output(cfg, "semicont", &table)
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

fn decompose(cfg: &RunConfig, n: usize, p: usize, q: usize) -> Result<()> {
    let mut table = Table::new([
        "index",
        "gl_weight",
        "sl_weight",
        "multiplicity",
        "dimension",
    ]);
    for s in decompose_sym_mixed(n, p, q)? {
        table.push(vec![
            s.index.to_string(),
            join(s.gl_weight.coeffs()),
            join(&s.sl_weight()),
            s.multiplicity.to_string(),
            s.dimension.to_string(),
        ])?;
    }
    output(cfg, "decompose", &table)
}

fn schur(
    cfg: &RunConfig,
    lambda: Vec<usize>,
    mu: Option<Vec<usize>>,
    at: Option<Vec<f64>>,
    n: Option<usize>,
) -> Result<()> {
    let lambda = Partition::new(lambda)?;
    match mu {
        Some(mu) => {
            let mu = Partition::new(mu)?;
            let n = n
                .or(at.as_ref().map(Vec::len))
                .ok_or_else(|| Error::InvalidInput("give --n or --at for the expansion".into()))?;
            let mut table = Table::new(["nu", "coefficient", "value"]);
            for (nu, c) in lr_coefficients(&lambda, &mu, n)? {
                let value = match &at {
                    Some(x) => fmt(schur_eval(&nu, x)?),
                    None => String::new(),
                };
                table.push(vec![join(nu.parts()), c.to_string(), value])?;
            }
            output(cfg, "schur", &table)
        }
        None => {
            let x = at.ok_or_else(|| Error::InvalidInput("give --at to evaluate".into()))?;
            let mut table = Table::new(["lambda", "value"]);
            table.push(vec![join(lambda.parts()), fmt(schur_eval(&lambda, &x)?)])?;
            output(cfg, "schur", &table)
        }
    }
}

fn check(cfg: &RunConfig, only: &[String]) -> std::result::Result<(), Failure> {
    let reports = run_checks(cfg, only)?;
    for r in &reports {
        eprintln!("{r}");
    }
    output(cfg, "checks", &report_table(&reports))?;
    if reports.iter().all(|r| r.pass) {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn experiment(
    cfg: &RunConfig,
    levels: usize,
    body: Option<&Path>,
    n: usize,
    f: &str,
    tensor: Option<&Path>,
) -> Result<()> {
    let f = ConcFunction::parse(f)?;
    let k: ConvexBody = match body {
        Some(path) => parse_body(path)?,
        None => Ellipsoid::ball(n, 1.0).into(),
    };
    let n = k.dim();
    let phi = match tensor {
        Some(path) => read_tensors(path)?
            .into_iter()
            .next()
            .ok_or_else(|| Error::parse(path.display().to_string(), 0, "no tensor in file"))?
            .into_sym()?,
        None => SymTensor::from_coeffs(
            n,
            0,
            Variance::Covector,
            nalgebra::DVector::from_element(1, 1.0),
        )?,
    };
    let result = semicontinuity_experiment(&k, levels, &f, &phi, &cfg.sphere(n)?)?;
    let mut table = Table::new(affval::semicont::SemicontinuityTable::HEADER);
    table.rows = result.records();
    output(cfg, "semicontinuity", &table)?;
    if let Some(dir) = &cfg.out {
        let series: Vec<(f64, f64)> = result.rows.iter().map(|r| (r.hausdorff, r.value)).collect();
        emit_plotdata(&series, &dir.join("semicontinuity.dat"))?;
    }
    Ok(())
}

fn run(cli: Cli) -> std::result::Result<(), Failure> {
    configure_threads()?;
    let cfg = config(&cli.global)?;
    match cli.command {
        Command::Valuate { what } => match what {
            Valuate::Classical {
                kind,
                body,
                directions,
                p,
                q_body,
                measure,
            } => valuate_classical(
                &cfg,
                kind,
                &body,
                &directions,
                p,
                q_body.as_deref(),
                measure.as_deref(),
            )?,
            Valuate::Tensor {
                p,
                q,
                component,
                psi,
                body,
                tensors,
            } => valuate_tensor(&cfg, p, q, component, psi, &body, &tensors)?,
            Valuate::Semicont {
                f,
                p,
                body,
                tensors,
                psi,
            } => valuate_semicont(&cfg, &f, p, &body, &tensors, psi)?,
        },
        Command::Decompose { n, p, q } => decompose(&cfg, n, p, q)?,
        Command::Schur { lambda, mu, at, n } => schur(&cfg, lambda, mu, at, n)?,
        Command::Check { only } => check(&cfg, &only)?,
        Command::Experiment { what } => match what {
            Experiment::Semicontinuity {
                levels,
                body,
                n,
                f,
                tensor,
            } => experiment(&cfg, levels, body.as_deref(), n, &f, tensor.as_deref())?,
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
