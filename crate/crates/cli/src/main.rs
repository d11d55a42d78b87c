use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use approx_radical::harness::{basis_for_points, log_spaced};
use approx_radical::io::{parse_kind, sweep_to_csv, PointSet, RadicalDocument, SquareFreeDocument};
use approx_radical::linalg::{format_complex, singular_values};
use approx_radical::rank::{rank_by_gap, rank_by_gecp_rule, rank_by_svd_rule, ThresholdRule};
use approx_radical::traces::{hankel_trace_matrix, power_sums_from_coeffs, trace_matrix_from_points};
use approx_radical::{
    approximate_radical, approximate_radical_from_points, approximate_square_free, epsilon_sweep, mulmats_from_points,
    parse, realize_points, serialize, trace_matrix_from_mulmats, Document, FormatError, MonomialBasis, RadicalOptions,
    RankMethod, RankSelection, ThresholdSpec, TraceMatrix,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "approx-radical", version, about = "Approximate radicals of polynomial systems with root clusters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Approximate square-free factor of a univariate polynomial.
    Sqfree {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        threshold: ThresholdArgs,
        #[arg(long, value_enum, default_value_t = PipelineMethod::Gecp)]
        method: PipelineMethod,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Approximate radical, multiplication matrices and cluster means.
    Radical {
        #[arg(long, required_unless_present = "points", conflicts_with = "points")]
        mulmats: Option<PathBuf>,
        /// Root list; the basis comes from --basis or a greedy graded choice.
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long, requires = "points")]
        basis: Option<PathBuf>,
        #[command(flatten)]
        threshold: RadicalThresholdArgs,
        #[arg(long, value_enum, default_value_t = PipelineMethod::Gecp)]
        method: PipelineMethod,
        #[arg(long, env = "APPROX_RADICAL_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Numerical rank of a matrix or trace-matrix document.
    Rank {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_enum)]
        method: RankArg,
        #[arg(long, conflicts_with = "eps")]
        threshold: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, requires = "eps")]
        b_prime: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Matrix of traces from multiplication matrices, points or coefficients.
    Traces {
        #[arg(long, value_enum)]
        from: TraceSourceArg,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        basis: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Realize a cluster spec.
    Simulate {
        #[arg(long)]
        clusters: PathBuf,
        #[arg(long, value_enum)]
        emit: EmitArg,
        /// Overrides the radius in the cluster file.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tail quantities over log-spaced radii.
    Sweep {
        #[arg(long)]
        clusters: PathBuf,
        #[arg(long)]
        eps_from: f64,
        #[arg(long)]
        eps_to: f64,
        #[arg(long, default_value_t = 5)]
        steps: usize,
        #[arg(long, env = "APPROX_RADICAL_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the sweep document here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct ThresholdArgs {
    /// Cluster radius; the threshold follows from the coefficient bounds.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct RadicalThresholdArgs {
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    threshold: Option<f64>,
    /// Candidate rank, bypassing rank detection.
    #[arg(long)]
    rank: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PipelineMethod {
    Gecp,
    Svd,
}

impl From<PipelineMethod> for RankMethod {
    fn from(m: PipelineMethod) -> Self {
        match m {
            PipelineMethod::Gecp => RankMethod::Gecp,
            PipelineMethod::Svd => RankMethod::Svd,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RankArg {
    Gecp,
    Svd,
    Gap,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TraceSourceArg {
    Mulmats,
    Points,
    Coeffs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EmitArg {
    Points,
    Mulmats,
    Traces,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(PathBuf, std::io::Error),
    Format(PathBuf, FormatError),
    Core(approx_radical::Error),
}

impl From<approx_radical::Error> for CliError {
    fn from(e: approx_radical::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numeric() => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Format(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn read_doc(path: &Path, kinds: &[&str]) -> CliResult<Document> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.into(), e))?;
    let doc = parse(&text).map_err(|e| CliError::Format(path.into(), e))?;
    if !kinds.contains(&doc.kind()) {
        let err = parse_kind(&text, kinds[0]).expect_err("kind mismatch");
        return Err(CliError::Format(path.into(), err));
    }
    Ok(doc)
}

fn write_text(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(p.into(), e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io("<stdout>".into(), e)),
    }
}

fn emit(out: Option<&Path>, doc: &Document) -> CliResult<()> {
    let text = serialize(doc).map_err(|e| CliError::Format(out.unwrap_or(Path::new("<stdout>")).into(), e))?;
    write_text(out, &text)
}

fn threshold_spec(eps: Option<f64>, threshold: Option<f64>) -> CliResult<ThresholdSpec> {
    match (eps, threshold) {
        (Some(e), None) => Ok(ThresholdSpec::Epsilon {
            epsilon: e,
            b_prime: None,
        }),
        (None, Some(t)) => Ok(ThresholdSpec::Absolute(t)),
        _ => Err(CliError::Usage("exactly one of --eps and --threshold is required".into())),
    }
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.6e}")).collect::<Vec<_>>().join(", ")
}

fn load_basis(path: Option<&Path>, points: &PointSet) -> CliResult<MonomialBasis> {
    match path {
        Some(p) => match read_doc(p, &["basis"])? {
            Document::Basis(b) => Ok(b),
            _ => unreachable!(),
        },
        None => Ok(basis_for_points(&points.points, points.num_vars)?),
    }
}

fn load_points(path: &Path) -> CliResult<PointSet> {
    match read_doc(path, &["points"])? {
        Document::Points(p) => Ok(p),
        _ => unreachable!(),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Sqfree {
            input,
            threshold,
            method,
            out,
        } => {
            let Document::Polynomial(f) = read_doc(&input, &["polynomial"])? else {
                unreachable!()
            };
            let spec = threshold_spec(threshold.eps, threshold.threshold)?;
            let res = approximate_square_free(&f, spec, method.into())?;
            let doc = SquareFreeDocument::new(&res)?;
            eprintln!("factor: {}", res.factor);
            eprintln!(
                "roots: {}",
                doc.roots.iter().map(|z| format_complex(*z)).collect::<Vec<_>>().join(", ")
            );
            eprintln!("rank: {} ({})", res.rank, res.report.method);
            eprintln!("{}: {}", res.report.method, fmt_list(&res.report.diagnostics));
            if res.cross_check.rank != res.rank {
                eprintln!("warning: {} gives rank {}", res.cross_check.method, res.cross_check.rank);
            }
            emit(out.as_deref(), &Document::SquareFree(doc))
        }
        Command::Radical {
            mulmats,
            points,
            basis,
            threshold,
            method,
            seed,
            out,
        } => {
            let rank = match (threshold.eps, threshold.threshold, threshold.rank) {
                (_, _, Some(k)) => RankSelection::Fixed(k),
                (e, t, None) => RankSelection::Spec(threshold_spec(e, t)?),
            };
            let opts = RadicalOptions::new(rank).method(method.into()).seed(seed);
            let output = match (mulmats, points) {
                (Some(m), _) => {
                    let Document::MulMats(set) = read_doc(&m, &["mulmats"])? else {
                        unreachable!()
                    };
                    approximate_radical(&set, &opts)?
                }
                (None, Some(p)) => {
                    let pts = load_points(&p)?;
                    let b = load_basis(basis.as_deref(), &pts)?;
                    approximate_radical_from_points(&pts.points, &b, &opts)?
                }
                (None, None) => return Err(CliError::Usage("--mulmats or --points is required".into())),
            };
            eprintln!("rank: {} ({})", output.rank, output.report.method);
            if let Some(c) = &output.cross_check {
                if c.rank != output.rank {
                    eprintln!("warning: {} gives rank {}", c.method, c.rank);
                }
            }
            eprintln!("column basis: {}", output.col_basis);
            for (i, m) in output.mul_primes.iter().enumerate() {
                eprint!("M'_x{}:\n{m}", i + 1);
            }
            for p in &output.means.points {
                eprintln!(
                    "mean: [{}]",
                    p.iter().map(|z| format_complex(*z)).collect::<Vec<_>>().join(", ")
                );
            }
            eprintln!("commutator norms: {}", fmt_list(&output.commutator_norms));
            emit(out.as_deref(), &Document::RadicalOutput(RadicalDocument::from(&output)))
        }
        Command::Rank {
            matrix,
            method,
            threshold,
            eps,
            b_prime,
            out,
        } => {
            let r = match read_doc(&matrix, &["matrix", "trace-matrix"])? {
                Document::TraceMatrix(t) => t,
                Document::Matrix(m) => {
                    if !m.is_square() {
                        return Err(CliError::Core(approx_radical::Error::Dimension(format!(
                            "rank needs a square matrix, got {}x{}",
                            m.rows(),
                            m.cols()
                        ))));
                    }
                    let n = m.rows();
                    TraceMatrix {
                        matrix: m,
                        basis: MonomialBasis::power(n),
                    }
                }
                _ => unreachable!(),
            };
            let report = match method {
                RankArg::Gap => {
                    if threshold.is_some() || eps.is_some() {
                        return Err(CliError::Usage("--method gap takes no threshold".into()));
                    }
                    rank_by_gap(&singular_values(&r.matrix)?)?
                }
                RankArg::Gecp | RankArg::Svd => {
                    let spec = match threshold_spec(eps, threshold)? {
                        ThresholdSpec::Epsilon { epsilon, .. } => ThresholdSpec::Epsilon { epsilon, b_prime },
                        abs => abs,
                    };
                    let rule = ThresholdRule::resolve(spec, &r)?;
                    if let RankArg::Gecp = method {
                        rank_by_gecp_rule(&r, &rule)?.0
                    } else {
                        rank_by_svd_rule(&r, &rule)?
                    }
                }
            };
            eprintln!("rank: {} ({})", report.rank, report.method);
            eprintln!("diagnostics: {}", fmt_list(&report.diagnostics));
            eprintln!("threshold: {:.6e}", report.threshold_used);
            emit(out.as_deref(), &Document::RankReport(report))
        }
        Command::Traces {
            from,
            input,
            basis,
            out,
        } => {
            let t = match from {
                TraceSourceArg::Mulmats => {
                    let Document::MulMats(set) = read_doc(&input, &["mulmats"])? else {
                        unreachable!()
                    };
                    trace_matrix_from_mulmats(&set)?
                }
                TraceSourceArg::Points => {
                    let pts = load_points(&input)?;
                    let b = load_basis(basis.as_deref(), &pts)?;
                    trace_matrix_from_points(&pts.points, &b)?
                }
                TraceSourceArg::Coeffs => {
                    let Document::Polynomial(f) = read_doc(&input, &["polynomial"])? else {
                        unreachable!()
                    };
                    hankel_trace_matrix(&power_sums_from_coeffs(f.coeffs())?)?
                }
            };
            eprintln!("basis: {}", t.basis);
            eprint!("{}", t.matrix);
            emit(out.as_deref(), &Document::TraceMatrix(t))
        }
        Command::Simulate {
            clusters,
            emit: what,
            eps,
            out,
        } => {
            let Document::ClusterSpec(mut spec) = read_doc(&clusters, &["cluster-spec"])? else {
                unreachable!()
            };
            if let Some(e) = eps {
                spec = spec.with_epsilon(e);
                spec.validate()?;
            }
            let points = realize_points(&spec);
            let basis = match &spec.basis {
                Some(b) => b.clone(),
                None => basis_for_points(&points, spec.num_vars)?,
            };
            eprintln!("{} roots in {} clusters, epsilon {:e}", points.len(), spec.clusters.len(), spec.epsilon);
            let doc = match what {
                EmitArg::Points => Document::Points(PointSet {
                    num_vars: spec.num_vars,
                    points,
                }),
                EmitArg::Mulmats => Document::MulMats(mulmats_from_points(&points, &basis)?),
                EmitArg::Traces => Document::TraceMatrix(trace_matrix_from_points(&points, &basis)?),
            };
            emit(out.as_deref(), &doc)
        }
        Command::Sweep {
            clusters,
            eps_from,
            eps_to,
            steps,
            seed,
            out,
            json,
        } => {
            let Document::ClusterSpec(spec) = read_doc(&clusters, &["cluster-spec"])? else {
                unreachable!()
            };
            let eps = log_spaced(eps_from, eps_to, steps)?;
            let res = epsilon_sweep(&spec, &eps, seed)?;
            let csv = sweep_to_csv(&res.records).map_err(|e| CliError::Format(out.clone(), e))?;
            write_text(Some(&out), &csv)?;
            if let Some(j) = json.as_deref() {
                emit(Some(j), &Document::Sweep(res.clone()))?;
            }
            let show = |s: Option<f64>| s.map(|x| format!("{x:.4}")).unwrap_or_else(|| "floor-limited".into());
            let summary = format!(
                "rank {}\nslope pivot_tail {}\nslope sigma_tail {}\nslope mean_error {}\nslope commutator_norm {}\n",
                res.rank,
                show(res.slopes.pivot_tail),
                show(res.slopes.sigma_tail),
                show(res.slopes.mean_error),
                show(res.slopes.commutator_norm)
            );
            for e in &res.skipped {
                eprintln!("skipped epsilon {e:e}");
            }
            write_text(None, &summary)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
