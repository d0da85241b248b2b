//! Command-line front end: `surface`, `image` and `rank` subcommands.
//!
//! Exit codes: 0 on success, 2 for usage or validation errors, 1 for numerical failures
//! (a residual above the `--strict` threshold).

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::baselines::{kernel_nn_rank, nn_rank};
use crate::csvio::{format_float, read_matrix_csv, write_scores_csv};
use crate::datasets::{
    eigvec_to_map, extract_patches, generate_surface, load_pgm, scores_to_heatmap, write_pgm,
    SurfaceSpec,
};
use crate::error::Error;
use crate::kernel::{Bandwidth, KernelMode};
use crate::pipeline::{build_graph, search_graph, SearchOutcome, SearchParams};
use crate::scoring::ScoreMode;
use crate::solver::{SolverConfig, SolverMethod};

/// Residuals above this are reported, and fail the run under `--strict`.
pub const RESIDUAL_THRESHOLD: f64 = 1e-5;

#[derive(Debug, Parser)]
#[command(
    name = "locspec",
    version,
    about = "Localized spectral similarity search"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthetic terrain with two hovering anomalies: rank the second against the first.
    Surface(SurfaceArgs),
    /// Sliding 3x3 patches of a PGM image, scored against a reference patch.
    Image(ImageArgs),
    /// Score the rows of a CSV data matrix against a reference row.
    Rank(RankArgs),
}

/// Kernel bandwidth: a positive number or `median`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsilonArg(pub Bandwidth);

impl FromStr for EpsilonArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("median") {
            return Ok(Self(Bandwidth::MedianHeuristic));
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => Ok(Self(Bandwidth::Fixed(v))),
            _ => Err(format!("expected a positive number or `median`, got `{s}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Magnitude,
    Signed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Dense,
    Randomized,
    Auto,
}

impl From<MethodArg> for SolverMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Dense => SolverMethod::Dense,
            MethodArg::Randomized => SolverMethod::Randomized,
            MethodArg::Auto => SolverMethod::Auto,
        }
    }
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Kernel bandwidth ε, or `median` for the median squared pairwise distance.
    #[arg(long, default_value = "median")]
    pub epsilon: EpsilonArg,
    /// Number of localized eigenvectors.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Number of eigenpairs to compute.
    #[arg(long, default_value_t = 15)]
    pub l: usize,
    /// Extra sketch columns for the randomized solver.
    #[arg(long, default_value_t = 10)]
    pub oversample: usize,
    /// Power iterations for the randomized solver.
    #[arg(long, default_value_t = 10)]
    pub power_iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Magnitude)]
    pub mode: ModeArg,
    /// Scale eigenvectors by their eigenvalues before selecting.
    #[arg(long)]
    pub weight_eigenvalues: bool,
    /// Output directory.
    #[arg(long, default_value = "locspec-out")]
    pub out: PathBuf,
    /// Fail (exit 1) when the eigen-residual exceeds 1e-5 instead of warning.
    #[arg(long)]
    pub strict: bool,
    /// Number of most similar points to print.
    #[arg(long, default_value_t = 10)]
    pub top: usize,
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    /// Grid points per side.
    #[arg(long, default_value_t = 50)]
    pub grid: usize,
    /// Anomaly height above the terrain (default: half the terrain's z-range).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Minimum (x, y) distance between the two anomalies.
    #[arg(long, default_value_t = 3.0)]
    pub min_separation: f64,
    /// Independent runs with seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    pub trials: u64,
}

#[derive(Debug, Args)]
pub struct ImageArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Randomized)]
    pub method: MethodArg,
    /// Input PGM (P2 or P5).
    #[arg(long)]
    pub input: PathBuf,
    /// Reference patch center as `y,x` (0-based pixel row and column).
    #[arg(long = "ref")]
    pub reference: String,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    /// Input CSV data matrix, one point per row, optional header.
    #[arg(long)]
    pub input: PathBuf,
    /// Reference row index (0-based).
    #[arg(long = "ref")]
    pub reference: usize,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if e.is_numerical() { 1 } else { 2 };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        code: 2,
        message: message.into(),
    }
}

impl CommonArgs {
    fn params(&self, method: MethodArg) -> SearchParams {
        SearchParams {
            bandwidth: self.epsilon.0,
            k: self.k,
            solver: SolverConfig {
                eigenpairs: self.l,
                oversampling: self.oversample,
                power_iterations: self.power_iters,
                seed: self.seed,
                method: method.into(),
            },
            mode: match self.mode {
                ModeArg::Magnitude => ScoreMode::Magnitude,
                ModeArg::Signed => ScoreMode::Signed,
            },
            weight_eigenvalues: self.weight_eigenvalues,
            kernel_mode: None,
        }
    }

    fn describe(&self, method: MethodArg) -> String {
        let eps = match self.epsilon.0 {
            Bandwidth::MedianHeuristic => "median".to_string(),
            Bandwidth::Fixed(v) => v.to_string(),
        };
        format!(
            "epsilon={eps} k={} l={} oversample={} power_iters={} seed={} mode={} weight_eigenvalues={} method={} strict={} out={}",
            self.k,
            self.l,
            self.oversample,
            self.power_iters,
            self.seed,
            match self.mode {
                ModeArg::Magnitude => "magnitude",
                ModeArg::Signed => "signed",
            },
            self.weight_eigenvalues,
            method_name(method.into()),
            self.strict,
            self.out.display()
        )
    }

    fn check_residual(&self, outcome: &SearchOutcome, err: &mut dyn Write) -> CliResult<()> {
        let residual = outcome.basis.residual;
        if residual > RESIDUAL_THRESHOLD {
            if self.strict {
                return Err(Error::ResidualTooLarge {
                    residual,
                    threshold: RESIDUAL_THRESHOLD,
                }
                .into());
            }
            writeln!(
                err,
                "warning: eigen-residual {residual:e} exceeds {RESIDUAL_THRESHOLD:e}"
            )?;
        }
        Ok(())
    }
}

fn method_name(m: SolverMethod) -> &'static str {
    match m {
        SolverMethod::Dense => "dense",
        SolverMethod::Randomized => "randomized",
        SolverMethod::Auto => "auto",
    }
}

fn kernel_name(m: KernelMode) -> &'static str {
    match m {
        KernelMode::Dense => "dense",
        KernelMode::MatrixFree => "matrix-free",
    }
}

fn resolved_line(outcome: &SearchOutcome) -> String {
    format!(
        "resolved: epsilon={} method={} kernel={} residual={:.3e}",
        format_float(outcome.epsilon),
        method_name(outcome.method),
        kernel_name(outcome.kernel_mode),
        outcome.basis.residual
    )
}

fn create_file(dir: &Path, name: &str) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_scores_file(dir: &Path, name: &str, outcome: &SearchOutcome) -> CliResult<()> {
    let mut f = create_file(dir, name)?;
    write_scores_csv(&mut f, &outcome.scores)?;
    f.flush()?;
    Ok(())
}

fn print_top(out: &mut dyn Write, outcome: &SearchOutcome, top: usize) -> CliResult<()> {
    writeln!(out, "rank,index,score")?;
    for (pos, &i) in outcome.ranking.order.iter().take(top).enumerate() {
        writeln!(
            out,
            "{},{},{}",
            pos + 1,
            i,
            format_float(outcome.scores.values[i])
        )?;
    }
    Ok(())
}

fn run_surface(args: &SurfaceArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let c = &args.common;
    if args.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    if args.grid < 2 {
        return Err(usage("--grid must be at least 2"));
    }
    let m = args.grid * args.grid + 2;
    let base = c.params(args.method);
    base.validate(m, m - 2)?;
    writeln!(
        out,
        "config: command=surface grid={} delta={} min_separation={} trials={} {}",
        args.grid,
        args.delta.map_or("auto".to_string(), |d| d.to_string()),
        args.min_separation,
        args.trials,
        c.describe(args.method)
    )?;
    fs::create_dir_all(&c.out)?;

    let mut successes = 0;
    let mut nn_worse = 0;
    for t in 0..args.trials {
        let seed = c.seed.wrapping_add(t);
        let surface = generate_surface(&SurfaceSpec {
            grid_side: args.grid,
            delta: args.delta,
            min_separation: args.min_separation,
            seed,
            ..Default::default()
        })?;
        let mut params = base;
        params.solver.seed = seed;
        let graph = build_graph(&surface.data, &params)?;
        let outcome = search_graph(&graph, surface.reference, &params)?;
        c.check_residual(&outcome, err)?;
        let rank = outcome.ranking.rank_of(surface.target)?;
        let nn = nn_rank(&surface.data, surface.reference)?.rank_of(surface.target)?;
        let knn = kernel_nn_rank(&graph, surface.reference)?.rank_of(surface.target)?;
        successes += usize::from(rank == 1);
        nn_worse += usize::from(nn > rank);
        writeln!(out, "{}", resolved_line(&outcome))?;
        writeln!(
            out,
            "trial seed={seed} points={m} reference={} target={} rank={rank} nn_rank={nn} kernel_nn_rank={knn}",
            surface.reference, surface.target
        )?;

        let mut f = create_file(&c.out, &format!("surface_seed{seed}.csv"))?;
        surface.write_csv(&mut f)?;
        f.flush()?;
        write_scores_file(&c.out, &format!("scores_seed{seed}.csv"), &outcome)?;
    }
    writeln!(
        out,
        "summary: success={successes}/{} nn_strictly_worse={nn_worse}/{}",
        args.trials, args.trials
    )?;
    Ok(())
}

fn parse_center(s: &str) -> CliResult<(usize, usize)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [y, x] => match (y.parse(), x.parse()) {
            (Ok(y), Ok(x)) => Ok((y, x)),
            _ => Err(usage(format!("--ref must be `y,x`, got `{s}`"))),
        },
        _ => Err(usage(format!("--ref must be `y,x`, got `{s}`"))),
    }
}

fn run_image(args: &ImageArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let c = &args.common;
    let (cy, cx) = parse_center(&args.reference)?;
    let bytes = fs::read(&args.input)
        .map_err(|e| usage(format!("cannot read {}: {e}", args.input.display())))?;
    let img = load_pgm(&bytes)?;
    let (data, grid) = extract_patches(&img, 3)?;
    let reference = grid.patch_index_of(cy, cx)?;
    let mut params = c.params(args.method);
    if SolverMethod::from(args.method).resolve(data.rows()) == SolverMethod::Randomized {
        params.kernel_mode = Some(KernelMode::MatrixFree);
    }
    params.validate(data.rows(), reference)?;
    writeln!(
        out,
        "config: command=image input={} ref={cy},{cx} {}",
        args.input.display(),
        c.describe(args.method)
    )?;
    writeln!(
        out,
        "image: {}x{} patches={} reference_patch={reference}",
        img.height(),
        img.width(),
        grid.rows()
    )?;

    let graph = build_graph(&data, &params)?;
    let outcome = search_graph(&graph, reference, &params)?;
    c.check_residual(&outcome, err)?;
    writeln!(out, "{}", resolved_line(&outcome))?;

    fs::create_dir_all(&c.out)?;
    let heat = scores_to_heatmap(&outcome.scores.values, &grid, true)?;
    fs::write(c.out.join("heatmap.pgm"), write_pgm(&heat))?;
    let ev = eigvec_to_map(&outcome.basis, 0, &grid, false)?;
    fs::write(c.out.join("eigvec1.pgm"), write_pgm(&ev))?;
    let local = eigvec_to_map(&outcome.basis, outcome.selection.perm[0], &grid, false)?;
    fs::write(c.out.join("eigvec_ref1.pgm"), write_pgm(&local))?;
    write_scores_file(&c.out, "scores.csv", &outcome)?;
    writeln!(
        out,
        "outputs: heatmap.pgm eigvec1.pgm eigvec_ref1.pgm ({}x{}) scores.csv",
        heat.height(),
        heat.width()
    )?;

    writeln!(out, "rank,index,center_y,center_x,score")?;
    for (pos, &i) in outcome.ranking.order.iter().take(c.top).enumerate() {
        let (y, x) = grid.center(i);
        writeln!(
            out,
            "{},{i},{y},{x},{}",
            pos + 1,
            format_float(outcome.scores.values[i])
        )?;
    }
    Ok(())
}

fn run_rank(args: &RankArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let c = &args.common;
    let file = File::open(&args.input)
        .map_err(|e| usage(format!("cannot read {}: {e}", args.input.display())))?;
    let data = read_matrix_csv(std::io::BufReader::new(file))?;
    let params = c.params(args.method);
    params.validate(data.rows(), args.reference)?;
    writeln!(
        out,
        "config: command=rank input={} ref={} points={} features={} {}",
        args.input.display(),
        args.reference,
        data.rows(),
        data.cols(),
        c.describe(args.method)
    )?;
    let graph = build_graph(&data, &params)?;
    let outcome = search_graph(&graph, args.reference, &params)?;
    c.check_residual(&outcome, err)?;
    writeln!(out, "{}", resolved_line(&outcome))?;
    fs::create_dir_all(&c.out)?;
    write_scores_file(&c.out, "scores.csv", &outcome)?;
    print_top(out, &outcome, c.top)
}

/// Parses `args` (including the program name) and runs the command. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = if code == 0 {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Surface(a) => run_surface(a, out, err),
        Command::Image(a) => run_image(a, out, err),
        Command::Rank(a) => run_rank(a, out, err),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code
        }
    }
}

pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_parsing() {
        assert_eq!(
            "median".parse::<EpsilonArg>().unwrap().0,
            Bandwidth::MedianHeuristic
        );
        assert_eq!(
            "2.5".parse::<EpsilonArg>().unwrap().0,
            Bandwidth::Fixed(2.5)
        );
        assert!("0".parse::<EpsilonArg>().is_err());
        assert!("-1".parse::<EpsilonArg>().is_err());
        assert!("abc".parse::<EpsilonArg>().is_err());
    }

    #[test]
    fn center_parsing() {
        assert_eq!(parse_center("166,96").unwrap(), (166, 96));
        assert_eq!(parse_center(" 3 , 4 ").unwrap(), (3, 4));
        assert_eq!(parse_center("3").unwrap_err().code, 2);
        assert_eq!(parse_center("a,b").unwrap_err().code, 2);
    }

    #[test]
    fn bad_flags_exit_with_usage_code() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["locspec", "surface", "--k", "x"], &mut o, &mut e), 2);
        assert_eq!(run(["locspec", "nope"], &mut o, &mut e), 2);
    }
}
