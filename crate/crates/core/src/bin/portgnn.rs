use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use portgnn::experiments::{
    oracle_answer, run_program, run_ratios, run_single_leaf, write_atomic, ExperimentSpec, Family, PortChoice,
    ProgramName, RATIOS_CSV, SINGLE_LEAF_REPORT, SINGLE_LEAF_REWARDS, SINGLE_LEAF_SUMMARY,
};
use portgnn::gnn::ModelKind;
use portgnn::graph::{generate, weak_two_coloring, GraphFile, GraphKind};
use portgnn::header::Header;
use portgnn::local::LabelingFile;
use portgnn::oracles::Problem;
use portgnn::rl::{train, OptimizerKind, TrainConfig};
use portgnn::{Error, Result};

const EXIT_HELP: &str = "Exit status: 0 on success, 1 when a check or experiment fails, 2 on usage errors.";

#[derive(Parser)]
#[command(name = "portgnn", version, about = "Port-numbered GNNs, local algorithm simulation and exact oracles", after_help = EXIT_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph as JSON.
    Gen(GenArgs),
    /// Annotate a graph file with a consistent port numbering.
    Ports(PortsArgs),
    /// Annotate a graph file with a weak 2-coloring.
    Color(IoArgs),
    /// Run a local program and write the labeling.
    Simulate(SimulateArgs),
    /// Train single-leaf policies on K_{1,3} with REINFORCE.
    Train(TrainArgs),
    /// Reproducible experiment bundles.
    #[command(subcommand)]
    Exp(Experiment),
    /// Exact optimum of a combinatorial problem on a small graph.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenFamily {
    Star,
    Path,
    Cycle,
    Random,
    Bipartite,
}

#[derive(Args)]
struct GenArgs {
    family: GenFamily,
    /// star: k; path, cycle, random: n; bipartite: a b.
    #[arg(required = true)]
    params: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Degree bound for random families.
    #[arg(long, default_value_t = 3)]
    delta: usize,
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IoArgs {
    graph: PathBuf,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PortsArgs {
    graph: PathBuf,
    /// `canonical` or `shuffle:<seed>`.
    #[arg(long, default_value = "canonical")]
    ports: String,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(after_help = "Programs: single_leaf, constant[:<label>], identity, degree_sum, distinct_degrees, gnn:<checkpoint>.")]
struct SimulateArgs {
    graph: PathBuf,
    program: String,
    /// `canonical` or `shuffle:<seed>`; defaults to the file's ports, else canonical.
    #[arg(long)]
    ports: Option<String>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct TrainFlags {
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    optimizer: Option<OptimizerKind>,
    /// Reward curve sampling period, in iterations.
    #[arg(long)]
    curve_every: Option<usize>,
}

impl TrainFlags {
    fn apply(&self, mut cfg: TrainConfig) -> TrainConfig {
        cfg.trials = self.trials.unwrap_or(cfg.trials);
        cfg.iterations = self.iterations.unwrap_or(cfg.iterations);
        cfg.seed = self.seed.unwrap_or(cfg.seed);
        cfg.learning_rate = self.lr.unwrap_or(cfg.learning_rate);
        cfg.layer_width = self.width.unwrap_or(cfg.layer_width);
        cfg.optimizer = self.optimizer.unwrap_or(cfg.optimizer);
        cfg.curve_every = self.curve_every.unwrap_or(cfg.curve_every);
        cfg
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, value_enum, default_value_t = ModelKind::Vvc)]
    model: ModelKind,
    #[command(flatten)]
    flags: TrainFlags,
    /// Train report JSON; standard output when omitted.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Also write a model checkpoint: the first successful trial, else trial 0.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Experiment {
    /// Finding-single-leaf separation: trains VVC, MB and SB models.
    #[command(after_help = "Outputs in --out:
  singleleaf_report.json  header, spec, summary and every TrainReport
  singleleaf_rewards.csv  columns kind,trial,iteration,mean_reward
  singleleaf_summary.csv  columns kind,successes,trials
CSV files start with '# key=value' header comment lines.
Fails (exit 1) if any MB or SB trial succeeds.")]
    Singleleaf {
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        flags: TrainFlags,
    },
    /// Baseline approximation ratios against exact optima.
    #[command(after_help = "Families: star:<k>-<k>, path:<n>-<n>, cycle:<n>-<n>, random:<n>:<delta>, bipartite:<a>:<b>:<delta>.
Output ratios.csv in --out, columns:
  family,index,seed,n,m,max_degree,
  mds_opt,mds_all_nodes,mds_ratio,
  mvc_opt,mvc_matching,mvc_ratio,
  matching_opt,matching_greedy,matching_ratio
Ratios are exact fractions (e.g. 3/2); empty when undefined.
Fails (exit 1) if a dominating-set ratio exceeds max degree + 1 or a cover or matching ratio exceeds 2.")]
    Ratios {
        #[arg(long)]
        out: PathBuf,
        #[arg(long = "family")]
        families: Vec<String>,
        /// Graphs per random family.
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct OracleArgs {
    graph: PathBuf,
    #[arg(long, value_enum)]
    problem: Problem,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

#[derive(Serialize)]
struct Invocation<'a, T: Serialize> {
    command: &'a str,
    args: T,
}

fn header<T: Serialize>(command: &str, args: T, seed: Option<u64>) -> Header {
    Header::new(&Invocation { command, args }, seed)
}

fn gen(a: &GenArgs) -> Result<()> {
    let arity = |k: usize| {
        if a.params.len() == k {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("expected {k} size parameter(s), got {}", a.params.len())))
        }
    };
    let p = &a.params;
    let kind = match a.family {
        GenFamily::Star => arity(1).map(|_| GraphKind::Star { k: p[0] }),
        GenFamily::Path => arity(1).map(|_| GraphKind::Path { n: p[0] }),
        GenFamily::Cycle => arity(1).map(|_| GraphKind::Cycle { n: p[0] }),
        GenFamily::Random => arity(1).map(|_| GraphKind::RandomBounded { n: p[0], delta: a.delta }),
        GenFamily::Bipartite => arity(2).map(|_| GraphKind::RandomBipartite {
            a: p[0],
            b: p[1],
            delta: a.delta,
        }),
    }?;
    let g = generate(kind, a.seed)?;
    let file = GraphFile::from_graph(&g).with_header(header("gen", kind, Some(a.seed)));
    emit(a.out.as_deref(), &file.to_json()?)
}

fn ports(a: &PortsArgs) -> Result<()> {
    let choice: PortChoice = a.ports.parse()?;
    let mut file = GraphFile::read(&a.graph)?;
    let g = file.graph()?;
    let seed = match choice {
        PortChoice::Shuffle(s) => Some(s),
        PortChoice::Canonical => None,
    };
    file = file
        .with_ports(&choice.numbering(&g))
        .with_header(header("ports", choice.to_string(), seed));
    emit(a.out.as_deref(), &file.to_json()?)
}

fn color(a: &IoArgs) -> Result<()> {
    let file = GraphFile::read(&a.graph)?;
    let g = file.graph()?;
    let c = weak_two_coloring(&g)?;
    let file = file.with_coloring(&c).with_header(header("color", (), None));
    emit(a.out.as_deref(), &file.to_json()?)
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let prog: ProgramName = a.program.parse()?;
    let choice: Option<PortChoice> = a.ports.as_deref().map(str::parse).transpose()?;
    let file = GraphFile::read(&a.graph)?;
    let g = file.graph()?;
    let p = match (choice, file.ports(&g)?) {
        (Some(c), _) => c.numbering(&g),
        (None, Some(p)) => p,
        (None, None) => PortChoice::Canonical.numbering(&g),
    };
    let coloring = file.coloring(&g)?;
    let lab = run_program(&g, &p, &prog, coloring.as_ref())?;
    let seed = match choice {
        Some(PortChoice::Shuffle(s)) => Some(s),
        _ => None,
    };
    let ports_desc = choice.map_or_else(|| "file".to_string(), |c| c.to_string());
    let out = LabelingFile {
        header: header("simulate", (prog.to_string(), ports_desc), seed),
        program: prog.to_string(),
        n: g.n(),
        labels: lab.as_slice().to_vec(),
    };
    emit(a.out.as_deref(), &to_json(&out)?)
}

#[derive(Serialize)]
struct TrainFile<'a> {
    header: Header,
    report: &'a portgnn::rl::TrainReport,
}

fn train_cmd(a: &TrainArgs) -> Result<()> {
    let cfg = a.flags.apply(TrainConfig::default());
    let report = train(&cfg, a.model)?;
    let h = header("train", (&cfg, a.model), Some(cfg.seed));
    if let Some(path) = &a.checkpoint {
        let first = report
            .trials
            .iter()
            .find(|t| t.success)
            .or_else(|| report.trials.first())
            .ok_or_else(|| Error::InvalidParams("no trials to checkpoint".into()))?;
        write_atomic(path, first.checkpoint.to_checkpoint_json(&h)?.as_bytes())?;
    }
    eprintln!("{}: {}/{} trials succeeded", a.model, report.successes(), report.trials.len());
    emit(a.out.as_deref(), &to_json(&TrainFile { header: h, report: &report })?)
}

fn experiment(e: &Experiment) -> Result<()> {
    match e {
        Experiment::Singleleaf { out, flags } => {
            let mut spec = ExperimentSpec::single_leaf(out);
            spec.train = flags.apply(spec.train);
            spec.seed = spec.train.seed;
            let report = run_single_leaf(&spec)?;
            println!("kind,successes,trials");
            for r in &report.summary {
                println!("{},{},{}", r.kind, r.successes, r.trials);
            }
            for f in [SINGLE_LEAF_REPORT, SINGLE_LEAF_REWARDS, SINGLE_LEAF_SUMMARY] {
                eprintln!("wrote {}", out.join(f).display());
            }
            if !report.separation_holds() {
                return Err(Error::ExperimentFailed("an MB or SB policy solved the task".into()));
            }
            Ok(())
        }
        Experiment::Ratios {
            out,
            families,
            count,
            seed,
        } => {
            let fams = families
                .iter()
                .map(|f| Family::parse(f, *count))
                .collect::<Result<Vec<_>>>()?;
            let outcome = run_ratios(&ExperimentSpec::ratios(out, fams, *seed))?;
            for s in &outcome.skipped {
                eprintln!("warning: skipped {s}");
            }
            let show = |r: Option<portgnn::oracles::Ratio>| r.map_or_else(|| "-".to_string(), |r| r.to_string());
            println!(
                "graphs={} skipped={} max_mds_ratio={} max_mvc_ratio={}",
                outcome.rows.len(),
                outcome.skipped.len(),
                show(outcome.max_mds_ratio()),
                show(outcome.max_mvc_ratio())
            );
            eprintln!("wrote {}", out.join(RATIOS_CSV).display());
            if !outcome.violations.is_empty() {
                for v in &outcome.violations {
                    eprintln!("violation: {v}");
                }
                return Err(Error::ExperimentFailed(format!("{} ratio bound violations", outcome.violations.len())));
            }
            Ok(())
        }
    }
}

fn oracle(a: &OracleArgs) -> Result<()> {
    let g = GraphFile::read(&a.graph)?.graph()?;
    let answer = oracle_answer(&g, a.problem, header("oracle", a.problem, None))?;
    emit(a.out.as_deref(), &to_json(&answer)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Ports(a) => ports(a),
        Command::Color(a) => color(a),
        Command::Simulate(a) => simulate(a),
        Command::Train(a) => train_cmd(a),
        Command::Exp(e) => experiment(e),
        Command::Oracle(a) => oracle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
