#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rkhskit::frames::{frame_bounds, VectorFrame};
use rkhskit::gaussian::{sample_gp, SamplerConfig};
use rkhskit::io::{read_csv, read_csv_vector, read_pgm, write_csv, write_pgm, PgmImage};
use rkhskit::kaczmarz::{solve_classical, LinearSystem, RowSelection, SolveOptions};
use rkhskit::kernels::gram_matrix;
use rkhskit::pca::{fit, report, CovarianceMode};
use rkhskit::{Error, KernelSpec, Matrix, PointSet};

#[derive(Parser)]
#[command(name = "rkhskit", version, about = "Kernel, Kaczmarz, PCA, frame and Gaussian process tools")]
struct Cli {
    /// Skip the first line of every CSV input.
    #[arg(long, global = true)]
    header: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Kernel matrices.
    #[command(subcommand)]
    Kernel(KernelCommand),
    /// Row-action solvers for linear systems.
    #[command(subcommand)]
    Kaczmarz(KaczmarzCommand),
    /// Principal component compression of grayscale images.
    #[command(subcommand)]
    Pca(PcaCommand),
    /// Frame diagnostics.
    #[command(subcommand)]
    Frame(FrameCommand),
    /// Gaussian process sampling.
    #[command(subcommand)]
    Gp(GpCommand),
}

#[derive(Subcommand)]
enum KernelCommand {
    /// Write the Gram matrix of a kernel over a point set.
    Gram {
        /// gaussian:SIGMA | sinc | pw-box:A1,A2,...[:raw] | intersection:W1,W2,...
        #[arg(long)]
        kernel: String,
        /// One point per row (indicator rows for intersection kernels).
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Cyclic,
    Randomized,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    rhs: PathBuf,
    #[arg(long, value_enum, default_value = "cyclic")]
    mode: Mode,
    /// Required with --mode randomized.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_sweeps: usize,
    #[arg(long)]
    report: PathBuf,
    /// Also write the final iterate as a one-column CSV.
    #[arg(long)]
    solution: Option<PathBuf>,
}

#[derive(Subcommand)]
enum KaczmarzCommand {
    /// Solve A x = b from the zero vector.
    Solve(SolveArgs),
}

#[derive(Subcommand)]
enum PcaCommand {
    /// Keep the leading K principal components of an image (rows are observations).
    Compress {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        components: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
}

#[derive(Subcommand)]
enum FrameCommand {
    /// Optimal frame bounds of a finite vector system.
    Bounds {
        /// One vector per row.
        #[arg(long)]
        vectors: PathBuf,
        /// Treat the last column as a positive weight.
        #[arg(long)]
        weighted: bool,
        #[arg(long)]
        report: PathBuf,
    },
}

#[derive(Subcommand)]
enum GpCommand {
    /// Draw realizations of the mean-zero process with the kernel as covariance.
    Sample {
        #[arg(long)]
        kernel: String,
        #[arg(long)]
        points: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Validation(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn invalid<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Validation(msg.into()))
}

fn parse_list(s: &str, what: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Validation(format!("invalid {what} value {t:?}")))
        })
        .collect()
}

fn parse_kernel(spec: &str) -> CliResult<KernelSpec> {
    let mut parts = spec.split(':');
    let family = parts.next().unwrap_or_default();
    let params: Vec<&str> = parts.collect();
    let kernel = match (family, params.as_slice()) {
        ("gaussian", [sigma]) => {
            let sigma = sigma
                .parse()
                .map_err(|_| Failure::Validation(format!("invalid sigma {sigma:?}")))?;
            KernelSpec::gaussian(sigma)?
        }
        ("sinc", []) => KernelSpec::Sinc,
        ("pw-box", [widths]) => KernelSpec::pw_box(parse_list(widths, "half-width")?, true)?,
        ("pw-box", [widths, "raw"]) => KernelSpec::pw_box(parse_list(widths, "half-width")?, false)?,
        ("intersection", [weights]) => KernelSpec::intersection(parse_list(weights, "weight")?)?,
        _ => return invalid(format!("unrecognized kernel specification {spec:?}")),
    };
    Ok(kernel)
}

fn load_points(kernel: &KernelSpec, path: &Path, header: bool) -> CliResult<PointSet> {
    let m = read_csv(path, header)?;
    match kernel {
        KernelSpec::Intersection(space) => {
            if m.cols() != space.len() {
                return invalid(format!(
                    "indicator rows have {} entries but the ground set has {}",
                    m.cols(),
                    space.len()
                ));
            }
            let mut sets = Vec::with_capacity(m.rows());
            for i in 0..m.rows() {
                let mut set = Vec::new();
                for (j, &v) in m.row(i).iter().enumerate() {
                    match v {
                        1.0 => set.push(j),
                        0.0 => {}
                        other => return invalid(format!("indicator entry {other} in row {} is not 0 or 1", i + 1)),
                    }
                }
                sets.push(set);
            }
            Ok(PointSet::from_sets(&sets))
        }
        _ => Ok(PointSet::from_vectors(&m.row_vecs())),
    }
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Numerical(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| Failure::from(Error::from(e)))
}

fn kernel_gram(kernel: &str, points: &Path, out: &Path, header: bool) -> CliResult<()> {
    let k = parse_kernel(kernel)?;
    let pts = load_points(&k, points, header)?;
    let g = gram_matrix(&k, &pts)?;
    write_csv(g.matrix.as_matrix(), out)?;
    Ok(())
}

fn kaczmarz_solve(args: &SolveArgs, header: bool) -> CliResult<()> {
    let mode = match args.mode {
        Mode::Cyclic => RowSelection::Cyclic,
        Mode::Randomized => RowSelection::Randomized,
    };
    let seed = match (args.mode, args.seed) {
        (Mode::Randomized, None) => return invalid("--mode randomized requires --seed"),
        (_, seed) => seed.unwrap_or(0),
    };
    if !(args.tol > 0.0) {
        return invalid(format!("--tol must be positive, got {}", args.tol));
    }
    let a = read_csv(&args.matrix, header)?;
    let b = read_csv_vector(&args.rhs, header)?;
    let sys = LinearSystem::new(a, b)?;
    let opts = SolveOptions {
        x0: None,
        tol: args.tol,
        max_sweeps: args.max_sweeps,
        mode,
        seed,
    };
    let run = solve_classical(&sys, &opts)?;
    write_json(&run, &args.report)?;
    if let Some(path) = &args.solution {
        write_csv(&Matrix::from_columns(&[&run.solution]).map_err(Failure::from)?, path)?;
    }
    if !run.converged {
        return Err(Failure::Numerical(format!(
            "no convergence within {} sweeps (residual {:e})",
            args.max_sweeps, run.final_residual
        )));
    }
    Ok(())
}

fn pca_compress(input: &Path, components: usize, out: &Path, report_path: &Path) -> CliResult<()> {
    let img = read_pgm(input)?;
    let x = img.to_matrix();
    if components == 0 || components > x.cols() {
        return invalid(format!("--components must lie in 1..={}", x.cols()));
    }
    let model = fit(&x, CovarianceMode::Sample)?;
    let rep = report(&model, &x, components)?;
    let y = rkhskit::pca::transform(&model, &x)?;
    let rebuilt = rkhskit::pca::reconstruct(&model, &y, components)?;
    write_pgm(&PgmImage::from_matrix(&rebuilt, img.maxval)?, out)?;
    write_json(&rep, report_path)
}

fn bounds(vectors: &Path, weighted: bool, report_path: &Path, header: bool) -> CliResult<()> {
    let m = read_csv(vectors, header)?;
    let frame = if weighted {
        if m.cols() < 2 {
            return invalid("--weighted needs at least one coordinate column and a weight column");
        }
        let d = m.cols() - 1;
        let vecs = (0..m.rows()).map(|i| m.row(i)[..d].to_vec()).collect();
        let weights = (0..m.rows()).map(|i| m.row(i)[d]).collect();
        VectorFrame::with_weights(vecs, weights)?
    } else {
        VectorFrame::new(m.row_vecs())?
    };
    write_json(&frame_bounds(&frame)?, report_path)
}

fn gp_sample(kernel: &str, points: &Path, n: usize, seed: u64, out: &Path, header: bool) -> CliResult<()> {
    if n == 0 {
        return invalid("--n must be positive");
    }
    let k = parse_kernel(kernel)?;
    let pts = load_points(&k, points, header)?;
    let s = sample_gp(&k, &pts, &SamplerConfig::new(seed, n))?;
    write_csv(&s.draws, out)?;
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    let header = cli.header;
    match cli.command {
        Command::Kernel(KernelCommand::Gram { kernel, points, out }) => kernel_gram(&kernel, &points, &out, header),
        Command::Kaczmarz(KaczmarzCommand::Solve(args)) => kaczmarz_solve(&args, header),
        Command::Pca(PcaCommand::Compress {
            input,
            components,
            out,
            report,
        }) => pca_compress(&input, components, &out, &report),
        Command::Frame(FrameCommand::Bounds {
            vectors,
            weighted,
            report,
        }) => bounds(&vectors, weighted, &report, header),
        Command::Gp(GpCommand::Sample {
            kernel,
            points,
            n,
            seed,
            out,
        }) => gp_sample(&kernel, &points, n, seed, &out, header),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(1)
        }
    }
}
