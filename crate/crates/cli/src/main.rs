use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndorder::{gen, io, symbolic_factor, ElimStats, Error, Graph, OrderOptions, Params, Result, Schedule};

#[derive(Parser)]
#[command(name = "ndorder", version, about = "Parallel-style nested dissection ordering of sparse symmetric graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a fill-reducing ordering.
    Order(OrderArgs),
    /// Evaluate an ordering by symbolic Cholesky factorization.
    Eval {
        input: PathBuf,
        #[arg(long)]
        perm: PathBuf,
    },
    /// Validate a graph file.
    Check { input: PathBuf },
    /// Generate a synthetic graph.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
        /// Output file; `.mtx` selects Matrix Market, anything else Chaco.
        #[arg(short, long, global = true)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct OrderArgs {
    input: PathBuf,
    #[arg(long, default_value_t = 1)]
    procs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
    /// Print factor statistics of the computed ordering.
    #[arg(long)]
    metrics: bool,
    #[arg(long, value_enum, default_value_t = ScheduleArg::Parallel)]
    schedule: ScheduleArg,
    #[arg(long)]
    fold_min: Option<usize>,
    #[arg(long)]
    coarsest_size: Option<usize>,
    #[arg(long)]
    match_passes: Option<usize>,
    #[arg(long)]
    ratio_max: Option<f64>,
    #[arg(long, conflicts_with = "no_band")]
    band_width: Option<usize>,
    /// Refine on the whole graph instead of a band around the separator.
    #[arg(long)]
    no_band: bool,
    #[arg(long)]
    balance_tol: Option<f64>,
    #[arg(long)]
    fm_passes: Option<usize>,
    #[arg(long)]
    tries: Option<usize>,
    #[arg(long)]
    nd_cutoff: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleArg {
    Parallel,
    Sequential,
}

#[derive(Subcommand)]
enum GenKind {
    /// k x k grid.
    Grid2d { k: usize },
    /// k x k x k grid.
    Grid3d { k: usize },
    Path { n: usize },
    /// Star with center 1 and n - 1 leaves.
    Star { n: usize },
    Complete { n: usize },
    /// Uniform random graph with n vertices and m edges.
    Random { n: usize, m: usize, seed: u64 },
}

impl OrderArgs {
    fn params(&self) -> Result<Params> {
        let mut p = Params::default();
        if self.procs == 0 {
            return Err(Error::InvalidGraph("--procs must be at least 1".into()));
        }
        if let Some(v) = self.fold_min {
            p.fold_min = v;
        }
        if let Some(v) = self.coarsest_size {
            p.coarsest_size = v;
        }
        if let Some(v) = self.match_passes {
            p.match_passes = v;
        }
        if let Some(v) = self.ratio_max {
            p.ratio_max = v;
        }
        if let Some(v) = self.band_width {
            p.band_width = Some(v);
        }
        if self.no_band {
            p.band_width = None;
        }
        if let Some(v) = self.balance_tol {
            p.balance_tol = v;
        }
        if let Some(v) = self.fm_passes {
            p.fm_pass_max = v;
        }
        if let Some(v) = self.tries {
            p.tries = v;
        }
        if let Some(v) = self.nd_cutoff {
            p.nd_cutoff = v;
        }
        Ok(p)
    }
}

fn read_graph(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    io::read_graph(&text)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn print_stats(stats: &ElimStats) {
    println!("factor nonzeros (NNZ):  {}", stats.nnz);
    println!("operation count (OPC):  {}", stats.opc);
    println!("fill ratio:             {:.4}", stats.fill_ratio());
    println!("{}", stats.metrics_line());
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Order(args) => {
            let graph = read_graph(&args.input)?;
            let params = args.params()?;
            let schedule = match args.schedule {
                ScheduleArg::Parallel => Schedule::Parallel,
                ScheduleArg::Sequential => Schedule::Sequential,
            };
            let opts = OrderOptions { procs: args.procs, seed: args.seed, schedule, params };
            let perm = ndorder::order_graph(&graph, &opts)?;
            let header = [
                "ndorder inverse permutation".to_string(),
                format!("seed={} procs={}", opts.seed, opts.procs),
                format!("strategy: {}", opts.params.describe()),
            ];
            write_file(&args.output, &io::write_perm(&perm, &header))?;
            if args.metrics {
                print_stats(&symbolic_factor(&graph, &perm)?);
            }
        }
        Command::Eval { input, perm } => {
            let graph = read_graph(&input)?;
            let text = fs::read_to_string(&perm).map_err(|e| Error::Io(format!("{}: {e}", perm.display())))?;
            let perm = io::read_perm(&text)?;
            print_stats(&symbolic_factor(&graph, &perm)?);
        }
        Command::Check { input } => {
            let graph = read_graph(&input)?;
            println!("ok: {} vertices, {} edges", graph.vertex_count(), graph.edge_count());
        }
        Command::Gen { kind, output } => {
            let graph = match kind {
                GenKind::Grid2d { k } => gen::grid2d(k),
                GenKind::Grid3d { k } => gen::grid3d(k),
                GenKind::Path { n } => gen::path(n),
                GenKind::Star { n } => gen::star(n),
                GenKind::Complete { n } => gen::complete(n),
                GenKind::Random { n, m, seed } => gen::random(n, m, seed),
            };
            let mtx = output.as_ref().is_some_and(|p| p.extension().is_some_and(|e| e == "mtx"));
            let text = if mtx { io::write_matrix_market(&graph) } else { io::write_chaco(&graph) };
            match output {
                Some(p) => write_file(&p, &text)?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
