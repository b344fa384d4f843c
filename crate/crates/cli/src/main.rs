use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use mpcolor::ak::complete_uncolored;
use mpcolor::graph::is_proper;
use mpcolor::harness::{
    emit_aggregate, emit_report, run_sweep, seed_range, ExperimentConfig, Format, Mode, Timing,
};
use mpcolor::{io, ldpc, mp_color};

/// Directory for relative `--output` paths.
const OUT_DIR_VAR: &str = "MPCOLOR_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "mpcolor",
    version,
    about = "Message passing coloring and decoding experiments"
)]
struct Cli {
    /// Worker threads for seed sweeps (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a planted instance or a regular LDPC code to a file.
    Gen(GenArgs),
    /// Gallager coloring from a perturbed planted coloring.
    ColorGallager(ColorArgs),
    /// Spectral, recolor, uncolor and completion pipeline.
    ColorAk(ExpArgs),
    /// Compare unified steps with Gallager decoding iteration by iteration.
    Equiv(ExpArgs),
    /// Hard-decision decoding of a corrupted all-zero codeword.
    Ldpc(ExpArgs),
    /// Core extraction and non-core component statistics.
    Structure(ExpArgs),
    /// Seed sweep in any mode.
    Sweep {
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[command(flatten)]
        exp: ExpArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    ColorGallager,
    ColorAk,
    Equivalence,
    Ldpc,
    Structure,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::ColorGallager => Mode::ColorGallager,
            ModeArg::ColorAk => Mode::ColorAk,
            ModeArg::Equivalence => Mode::Equivalence,
            ModeArg::Ldpc => Mode::Ldpc,
            ModeArg::Structure => Mode::Structure,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    JsonLines,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Graph,
    Code,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "graph")]
    kind: Kind,
    #[arg(long, default_value_t = 3000)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Expected degree of the planted instance.
    #[arg(long, default_value_t = 60.0)]
    d: f64,
    #[arg(long, default_value_t = 3)]
    s: usize,
    #[arg(long, default_value_t = 6)]
    t: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Omit the planted coloring from the graph file.
    #[arg(long)]
    no_coloring: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct ExpArgs {
    #[arg(long, default_value_t = 3000)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 60.0)]
    d: f64,
    /// Flip fraction applied before decoding.
    #[arg(long, default_value_t = 1.0 / 120.0)]
    epsilon: f64,
    #[arg(long)]
    tau: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long, default_value_t = 3)]
    s: usize,
    #[arg(long, default_value_t = 6)]
    t: usize,
    /// Comma-separated seeds; overrides --seed-count/--seed-base.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    #[arg(long, default_value_t = 1)]
    seed_count: usize,
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    #[arg(long, value_enum, default_value = "json-lines")]
    format: FormatArg,
    /// Leave wall-clock fields empty so reports are reproducible byte for byte.
    #[arg(long)]
    no_timing: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ColorArgs {
    /// Graph file whose coloring block is the starting coloring; the
    /// result is written as a graph file instead of a report.
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    exp: ExpArgs,
}

impl ExpArgs {
    fn config(&self, mode: Mode) -> ExperimentConfig {
        let seeds = if self.seeds.is_empty() {
            seed_range(self.seed_base, self.seed_count)
        } else {
            self.seeds.clone()
        };
        ExperimentConfig {
            mode,
            n: self.n,
            k: self.k,
            d: self.d,
            epsilon: self.epsilon,
            tau: self.tau,
            seeds,
            max_iters: self.max_iters,
            s: self.s,
            t: self.t,
            output: self.output.clone(),
            format: match self.format {
                FormatArg::JsonLines => Format::JsonLines,
                FormatArg::Csv => Format::Csv,
            },
        }
    }
}

fn resolve(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_VAR) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn write_out(output: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match output {
        Some(p) => {
            let p = resolve(p);
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)
                    .with_context(|| format!("creating {}", parent.display()))?;
            }
            io::write_file(&p, text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn experiment(exp: &ExpArgs, mode: Mode) -> anyhow::Result<bool> {
    let cfg = exp.config(mode);
    cfg.validate()?;
    for w in cfg.warnings() {
        eprintln!("warning: {w}");
    }
    let summary = run_sweep(&cfg)?;
    let timing = if exp.no_timing {
        Timing::Exclude
    } else {
        Timing::Include
    };
    let report = emit_report(&summary.results, cfg.format, timing)?;
    write_out(cfg.output.as_deref(), &report)?;
    let aggregate = emit_aggregate(&summary.aggregate);
    if let Some(p) = &cfg.output {
        let mut name = resolve(p).into_os_string();
        name.push(".aggregate.json");
        io::write_file(Path::new(&name), &aggregate)?;
    }
    eprint!("{aggregate}");
    Ok(summary.all_succeeded())
}

fn generate(a: &GenArgs) -> anyhow::Result<bool> {
    let text = match a.kind {
        Kind::Graph => {
            let p = mpcolor::graph::edge_probability_for_degree(a.n, a.k, a.d)?;
            let inst = mpcolor::graph::generate_planted(a.n, a.k, p, a.seed)?;
            let coloring = (!a.no_coloring).then_some(&inst.planted);
            io::write_graph(&inst.graph, a.k, coloring)
        }
        Kind::Code => io::write_code(&ldpc::generate_regular_code(a.n, a.s, a.t, a.seed)?),
    };
    write_out(a.output.as_deref(), &text)?;
    Ok(true)
}

/// Runs Gallager on a graph file and writes the completed coloring back as
/// a graph file.
fn color_file(input: &Path, exp: &ExpArgs) -> anyhow::Result<bool> {
    let file = io::parse_graph(&io::read_to_string(input)?)?;
    let Some(phi0) = file.coloring else {
        bail!("{} has no coloring block to start from", input.display());
    };
    if !phi0.is_complete() {
        bail!(
            "the starting coloring in {} leaves vertices unassigned",
            input.display()
        );
    }
    let g = &file.graph;
    let tau = exp.tau.unwrap_or(1);
    let iters = exp
        .max_iters
        .unwrap_or_else(|| mp_color::default_max_iters(g.n()));
    let out = mp_color::run_gallager(g, &phi0, tau, iters, None)?;
    eprintln!(
        "{:?} after {} iterations, {} undecided",
        out.status,
        out.trace.changed_messages.len(),
        out.coloring.unassigned_count()
    );
    let cap = 2 * mpcolor::ceil_log2(g.n()).max(1);
    let (coloring, ok) = match complete_uncolored(g, &out.coloring, cap) {
        Ok(full) => {
            let ok = is_proper(g, &full);
            (full, ok)
        }
        Err(e) => {
            eprintln!("completion failed: {e}");
            (out.coloring, false)
        }
    };
    write_out(
        exp.output.as_deref(),
        &io::write_graph(g, file.k, Some(&coloring)),
    )?;
    Ok(ok)
}

fn dispatch(cli: &Cli) -> anyhow::Result<bool> {
    match &cli.command {
        Command::Gen(a) => generate(a),
        Command::ColorGallager(a) => match &a.input {
            Some(input) => color_file(input, &a.exp),
            None => experiment(&a.exp, Mode::ColorGallager),
        },
        Command::ColorAk(a) => experiment(a, Mode::ColorAk),
        Command::Equiv(a) => experiment(a, Mode::Equivalence),
        Command::Ldpc(a) => experiment(a, Mode::Ldpc),
        Command::Structure(a) => experiment(a, Mode::Structure),
        Command::Sweep { mode, exp } => experiment(exp, (*mode).into()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
