//! `itpack` command-line front end.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use itpack::apps::{clique_pack, pack_list_colorings, AppConfig, ReductionMode};
use itpack::graph::{
    gen_avg_degree_counterexample, gen_cliques_extremal, gen_complete_multipartite, gen_random_with, gen_yuster,
    load_graph, ListAssignment, MultipartiteGraph, RandomGraphParams,
};
use itpack::nibble::{pack, write_trace, SolvePolicy};
use itpack::oracle::{exists_transversal, max_disjoint_transversals, verify_packing, Packing, PackingGuard};
use itpack::reduce::{reduce_and_pack, BlockSchedule, CheckMode, ReduceConfig};
use itpack::schedule::{make_practical_schedule, make_schedule, validate_observation, MonitorConfig, NibbleSchedule};

use output::{read_packing, write_json, Envelope};

#[derive(Parser)]
#[command(name = "itpack", version, about = "Pack disjoint independent transversals in multipartite graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance as JSON.
    Gen(GenArgs),
    /// Pack with the two-level nibble.
    Pack(PackArgs),
    /// Split into low local-degree blocks, then pack every block.
    ReducePack(ReducePackArgs),
    /// Pack disjoint cliques with one vertex per part.
    CliquePack(CliquePackArgs),
    /// Pack disjoint proper list colorings.
    ListColor(ListColorArgs),
    /// Exact answers for small instances.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Check a packing file against its instance.
    Validate(ValidateArgs),
    /// Schedule utilities.
    #[command(subcommand)]
    Schedule(ScheduleCommand),
}

#[derive(Args, Serialize)]
struct GenArgs {
    #[command(subcommand)]
    generator: Generator,
    #[arg(short, long, global = true)]
    #[serde(skip)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Serialize, Clone)]
#[serde(rename_all = "kebab-case", tag = "generator")]
enum Generator {
    /// Disjoint union of n cliques K_{n+1}, one vertex of each per part.
    CliquesExtremal {
        #[arg(long)]
        n: usize,
    },
    /// Every pair of parts joined by a random perfect matching.
    Yuster {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Bounded average degree with few disjoint transversals.
    Counterexample {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: f64,
    },
    /// Complete k-partite graph.
    Complete {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
    },
    /// Random edges under maximum-degree and local-degree caps.
    Random {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long = "max-deg")]
        max_degree: usize,
        #[arg(long = "local")]
        local_degree: usize,
        /// Target edge count; defaults to saturating the caps.
        #[arg(long)]
        edges: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    Theory,
    Practical,
}

/// Schedule and solver options shared by the packing commands.
#[derive(Args, Serialize, Clone)]
struct SolveOpts {
    #[arg(long, value_enum, default_value_t = Mode::Practical)]
    mode: Mode,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Practical mode: activation probability [default: 0.2].
    #[arg(long)]
    p: Option<f64>,
    /// Practical mode: number of rounds r* [default: 64].
    #[arg(long = "rounds")]
    r_star: Option<u64>,
    /// Practical mode: iterations per round t* [default: 8].
    #[arg(long = "iters")]
    t_star: Option<u64>,
    /// Attempts per iteration before the retry policy applies.
    #[arg(long)]
    retry_budget: Option<usize>,
    /// Make every monitor force a retry, as in theory mode.
    #[arg(long)]
    enforce_monitors: bool,
    /// Vertices sampled per iteration for the degree monitors.
    #[arg(long)]
    monitor_sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses all cores. Output does not depend on it.
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    workers: usize,
}

impl SolveOpts {
    fn check(&self) -> Result<(), CliError> {
        if self.mode == Mode::Theory && (self.p.is_some() || self.r_star.is_some() || self.t_star.is_some()) {
            return Err(CliError::invalid("--p, --rounds and --iters only apply to --mode practical"));
        }
        Ok(())
    }

    fn schedule(&self, n: usize) -> Result<NibbleSchedule, CliError> {
        self.check()?;
        let sched = match self.mode {
            Mode::Theory => make_schedule(self.eps, n),
            Mode::Practical => {
                make_practical_schedule(self.eps, n, self.p.unwrap_or(0.2), self.r_star.unwrap_or(64), self.t_star.unwrap_or(8))
            }
        };
        sched.map_err(|e| CliError::invalid(e.to_string()))
    }

    fn monitors(&self, sched: &NibbleSchedule) -> MonitorConfig {
        let mut cfg = MonitorConfig::for_schedule(sched);
        if let Some(b) = self.retry_budget {
            cfg.retry_budget = b;
        }
        if self.enforce_monitors {
            cfg.enforce = itpack::schedule::EnforcedMonitors::ALL;
        }
        if let Some(s) = self.monitor_sample {
            cfg.sample_size = Some(s);
        }
        cfg
    }

    fn policy(&self) -> SolvePolicy {
        let base = match self.mode {
            Mode::Theory => SolvePolicy::theory(),
            Mode::Practical => SolvePolicy::practical(),
        };
        SolvePolicy { workers: self.workers, ..base }
    }

    fn reduce_config(&self, check: CheckArg) -> Result<ReduceConfig, CliError> {
        self.check()?;
        let schedule = match self.mode {
            Mode::Theory => BlockSchedule::Theory,
            Mode::Practical => BlockSchedule::Practical {
                p: self.p.unwrap_or(0.2),
                r_star: self.r_star.unwrap_or(64),
                t_star: self.t_star.unwrap_or(8),
            },
        };
        let check = match check {
            CheckArg::Strict => CheckMode::Strict,
            CheckArg::Structural => CheckMode::Structural,
        };
        Ok(ReduceConfig { schedule, policy: self.policy(), check, retry_budget: self.retry_budget.unwrap_or(100) })
    }
}

#[derive(Args, Serialize)]
struct PackArgs {
    /// Instance JSON.
    #[serde(skip)]
    input: PathBuf,
    #[arg(short, long)]
    #[serde(skip)]
    output: Option<PathBuf>,
    /// Per-iteration trace CSV.
    #[arg(long)]
    #[serde(skip)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    solve: SolveOpts,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum CheckArg {
    Strict,
    Structural,
}

#[derive(Args, Serialize)]
struct ReducePackArgs {
    #[serde(skip)]
    input: PathBuf,
    #[arg(short, long)]
    #[serde(skip)]
    output: Option<PathBuf>,
    /// Local degree bound as a fraction of the part size.
    #[arg(long, default_value_t = 0.1)]
    gamma: f64,
    /// Which split properties must hold before a split is accepted.
    #[arg(long, value_enum, default_value_t = CheckArg::Structural)]
    check: CheckArg,
    #[command(flatten)]
    #[serde(flatten)]
    solve: SolveOpts,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ReductionArg {
    Auto,
    Always,
    Never,
}

#[derive(Args, Serialize)]
struct CliquePackArgs {
    #[serde(skip)]
    input: PathBuf,
    #[arg(short, long)]
    #[serde(skip)]
    output: Option<PathBuf>,
    /// Minimum-degree slack: parts need partite minimum degree (1 - (1 - delta)/k) n.
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long, value_enum, default_value_t = ReductionArg::Auto)]
    reduction: ReductionArg,
    #[arg(long, value_enum, default_value_t = CheckArg::Structural)]
    check: CheckArg,
    #[command(flatten)]
    #[serde(flatten)]
    solve: SolveOpts,
}

#[derive(Args, Serialize)]
struct ListColorArgs {
    /// List-assignment JSON.
    #[serde(skip)]
    input: PathBuf,
    #[arg(short, long)]
    #[serde(skip)]
    output: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    solve: SolveOpts,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Find one independent transversal or prove there is none.
    Exists {
        input: PathBuf,
        #[arg(long, default_value_t = itpack::oracle::DEFAULT_NODE_GUARD)]
        max_nodes: u64,
    },
    /// Maximum number of disjoint independent transversals.
    Max {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = PackingGuard::default().max_nodes)]
        max_nodes: u64,
    },
}

#[derive(Args)]
struct ValidateArgs {
    /// Instance JSON.
    graph: PathBuf,
    /// Packing JSON as written by `pack` or `reduce-pack`.
    packing: PathBuf,
}

#[derive(Subcommand)]
enum ScheduleCommand {
    /// Evaluate the schedule inequalities for (eps, n).
    Check(ScheduleCheckArgs),
}

#[derive(Args)]
struct ScheduleCheckArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    eps: f64,
    #[arg(long, value_enum, default_value_t = Mode::Theory)]
    mode: Mode,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long = "rounds")]
    r_star: Option<u64>,
    #[arg(long = "iters")]
    t_star: Option<u64>,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

/// Exit status and message of a failed command.
#[derive(Debug)]
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    const INVALID: u8 = 2;
    const PARTIAL: u8 = 3;
    const BUDGET: u8 = 4;

    fn invalid(message: impl Into<String>) -> Self {
        Self { code: Self::INVALID, message: message.into() }
    }

    fn partial(message: impl Into<String>) -> Self {
        Self { code: Self::PARTIAL, message: message.into() }
    }

    fn budget(message: impl Into<String>) -> Self {
        Self { code: Self::BUDGET, message: message.into() }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

fn read_graph(path: &Path) -> Result<MultipartiteGraph, CliError> {
    load_graph(&read(path)?).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

/// Exit status for a run that wrote a partial result.
fn shortfall(failed: bool, budget: bool, message: String) -> Result<(), CliError> {
    match (failed, budget) {
        (false, _) => Ok(()),
        (true, true) => Err(CliError::budget(message)),
        (true, false) => Err(CliError::partial(message)),
    }
}

fn run_gen(args: GenArgs) -> Result<(), CliError> {
    let g = match args.generator.clone() {
        Generator::CliquesExtremal { n } => gen_cliques_extremal(n),
        Generator::Yuster { k, n, seed } => gen_yuster(k, n, seed),
        Generator::Counterexample { n, eps } => gen_avg_degree_counterexample(n, eps),
        Generator::Complete { k, n } => Ok(gen_complete_multipartite(k, n)),
        Generator::Random { k, n, max_degree, local_degree, edges, seed } => {
            gen_random_with(RandomGraphParams { k, n, max_degree, local_degree, target_edges: edges }, seed)
        }
    }
    .map_err(|e| CliError::invalid(e.to_string()))?;
    let meta = serde_json::json!({
        "tool": output::TOOL,
        "version": output::VERSION,
        "prng": itpack::PRNG_NAME,
        "config": &args.generator,
    });
    write_json(args.output.as_deref(), &g.to_instance(Some(meta)))
}

#[derive(Serialize)]
struct PackBody<'a> {
    k: usize,
    n: usize,
    transversals: Vec<Vec<u32>>,
    complete: bool,
    error: Option<String>,
    rounds_completed: u64,
    schedule: &'a NibbleSchedule,
    warnings: Vec<String>,
}

fn run_pack(args: PackArgs) -> Result<(), CliError> {
    let g = read_graph(&args.input)?;
    let sched = args.solve.schedule(g.n())?;
    let out = pack(&g, &sched, &args.solve.monitors(&sched), &args.solve.policy(), args.solve.seed);
    log::info!("packed {} transversals (k = {}, n = {})", out.packing.len(), g.k(), g.n());
    let body = PackBody {
        k: g.k(),
        n: g.n(),
        transversals: out.packing.to_rows(),
        complete: out.is_complete(),
        error: out.error.as_ref().map(ToString::to_string),
        rounds_completed: out.rounds_completed,
        schedule: &sched,
        warnings: out.warnings.clone(),
    };
    write_json(args.output.as_deref(), &Envelope::new(output::PACKING_FORMAT, "pack", &args, args.solve.seed, body))?;
    if let Some(path) = &args.trace {
        let file = fs::File::create(path).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
        write_trace(&out.trace, file).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    }
    match &out.error {
        None => Ok(()),
        Some(e) => shortfall(true, e.is_budget(), format!("partial packing of {} transversals: {e}", out.packing.len())),
    }
}

#[derive(Serialize)]
struct ReduceBody {
    k: usize,
    n: usize,
    transversals: Vec<Vec<u32>>,
    complete: bool,
    errors: Vec<String>,
    blocks: usize,
    block_local_degree: usize,
    plan: itpack::reduce::ReductionPlan,
    warnings: Vec<String>,
}

fn run_reduce_pack(args: ReducePackArgs) -> Result<(), CliError> {
    let g = read_graph(&args.input)?;
    let cfg = args.solve.reduce_config(args.check)?;
    let out = reduce_and_pack(&g, args.solve.eps, args.gamma, &cfg, args.solve.seed);
    log::info!("packed {} transversals over {} blocks", out.packing.len(), out.blocks);
    let body = ReduceBody {
        k: g.k(),
        n: g.n(),
        transversals: out.packing.to_rows(),
        complete: out.is_complete(),
        errors: out.errors.iter().map(ToString::to_string).collect(),
        blocks: out.blocks,
        block_local_degree: out.block_local_degree,
        plan: out.plan.clone(),
        warnings: out.warnings.clone(),
    };
    write_json(args.output.as_deref(), &Envelope::new(output::PACKING_FORMAT, "reduce-pack", &args, args.solve.seed, body))?;
    let message = format!("partial packing of {} transversals: {}", out.packing.len(), body_errors(&out.errors));
    shortfall(!out.is_complete(), out.budget_exhausted(), message)
}

fn body_errors(errors: &[itpack::reduce::Failure]) -> String {
    errors.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

fn app_config(solve: &SolveOpts, check: CheckArg, reduction: ReductionArg) -> Result<AppConfig, CliError> {
    let reduce = solve.reduce_config(check)?;
    let reduction = match reduction {
        ReductionArg::Auto => ReductionMode::Auto,
        ReductionArg::Always => ReductionMode::Always,
        ReductionArg::Never => ReductionMode::Never,
    };
    Ok(AppConfig { reduction, direct: reduce.schedule, reduce })
}

#[derive(Serialize)]
struct CliqueBody {
    k: usize,
    n: usize,
    cliques: Vec<Vec<u32>>,
    complete: bool,
    errors: Vec<String>,
    warnings: Vec<String>,
}

fn run_clique_pack(args: CliquePackArgs) -> Result<(), CliError> {
    let g = read_graph(&args.input)?;
    let cfg = app_config(&args.solve, args.check, args.reduction)?;
    let out = clique_pack(&g, args.solve.eps, args.delta, &cfg, args.solve.seed);
    log::info!("packed {} cliques of size {}", out.packing.cliques.len(), g.k());
    let body = CliqueBody {
        k: g.k(),
        n: g.n(),
        cliques: out.packing.cliques.clone(),
        complete: !out.is_short(),
        errors: out.errors.iter().map(ToString::to_string).collect(),
        warnings: out.warnings.clone(),
    };
    write_json(args.output.as_deref(), &Envelope::new(output::CLIQUES_FORMAT, "clique-pack", &args, args.solve.seed, body))?;
    let message = format!("{} of {} cliques: {}", out.packing.cliques.len(), out.target, body_errors(&out.errors));
    shortfall(out.is_short(), out.budget_exhausted(), message)
}

#[derive(Serialize)]
struct ColoringBody {
    vertices: usize,
    colorings: Vec<Vec<u64>>,
    min_list_size: usize,
    color_degree: usize,
    complete: bool,
    errors: Vec<String>,
    warnings: Vec<String>,
}

fn run_list_color(args: ListColorArgs) -> Result<(), CliError> {
    let la = ListAssignment::from_json(&read(&args.input)?)
        .map_err(|e| CliError::invalid(format!("{}: {e}", args.input.display())))?;
    let cfg = app_config(&args.solve, CheckArg::Structural, ReductionArg::Never)?;
    let out = pack_list_colorings(&la, args.solve.eps, &cfg, args.solve.seed);
    log::info!("packed {} disjoint colorings", out.packing.colorings.len());
    let body = ColoringBody {
        vertices: la.vertex_count(),
        colorings: out.packing.colorings.clone(),
        min_list_size: out.min_list_size,
        color_degree: out.color_degree,
        complete: !out.is_short(),
        errors: out.errors.iter().map(ToString::to_string).collect(),
        warnings: out.warnings.clone(),
    };
    write_json(args.output.as_deref(), &Envelope::new(output::COLORINGS_FORMAT, "list-color", &args, args.solve.seed, body))?;
    let message =
        format!("{} colorings, shortest list {}: {}", out.packing.colorings.len(), out.min_list_size, body_errors(&out.errors));
    shortfall(out.is_short(), out.budget_exhausted(), message)
}

fn run_oracle(cmd: OracleCommand) -> Result<(), CliError> {
    match cmd {
        OracleCommand::Exists { input, max_nodes } => {
            let g = read_graph(&input)?;
            match exists_transversal(&g, max_nodes).map_err(|e| CliError::budget(e.to_string()))? {
                Some(t) => {
                    println!("{}", serde_json::to_string(&t.vertices().collect::<Vec<_>>()).expect("serializable"));
                    Ok(())
                }
                None => {
                    println!("no transversal");
                    Err(CliError::partial("no transversal"))
                }
            }
        }
        OracleCommand::Max { input, output, max_nodes } => {
            let g = read_graph(&input)?;
            let guard = PackingGuard { max_nodes, ..PackingGuard::default() };
            let (count, packing) = max_disjoint_transversals(&g, guard).map_err(|e| CliError::budget(e.to_string()))?;
            let body = serde_json::json!({
                "format": output::PACKING_FORMAT,
                "tool": output::TOOL,
                "version": output::VERSION,
                "command": "oracle max",
                "count": count,
                "transversals": packing.to_rows(),
            });
            write_json(output.as_deref(), &body)
        }
    }
}

fn run_validate(args: ValidateArgs) -> Result<(), CliError> {
    let g = read_graph(&args.graph)?;
    let rows = read_packing(&read(&args.packing)?).map_err(|e| CliError::invalid(format!("{}: {e}", args.packing.display())))?;
    if let Some(bad) = rows.iter().flatten().find(|&&v| v as usize >= g.vertex_count()) {
        return Err(CliError::invalid(format!("vertex {bad} out of range")));
    }
    match verify_packing(&g, &Packing::from_rows(&rows)) {
        Ok(()) => {
            println!("valid: {} disjoint independent transversals", rows.len());
            Ok(())
        }
        Err(violations) => {
            for v in &violations {
                println!("{v}");
            }
            Err(CliError::partial(format!("{} violations", violations.len())))
        }
    }
}

fn run_schedule(cmd: ScheduleCommand) -> Result<(), CliError> {
    let ScheduleCommand::Check(a) = cmd;
    let solve = SolveOpts {
        mode: a.mode,
        eps: a.eps,
        p: a.p,
        r_star: a.r_star,
        t_star: a.t_star,
        retry_budget: None,
        enforce_monitors: false,
        monitor_sample: None,
        seed: 0,
        workers: 0,
    };
    let (n, json) = (a.n, a.json);
    let sched = solve.schedule(n)?;
    let report = validate_observation(&sched);
    if json {
        write_json(None, &report)?;
    } else {
        print!("{}", report.render());
    }
    if report.clauses.iter().any(|c| c.passed == Some(false)) {
        return Err(CliError::partial("some schedule clauses fail"));
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => run_gen(a),
        Command::Pack(a) => run_pack(a),
        Command::ReducePack(a) => run_reduce_pack(a),
        Command::CliquePack(a) => run_clique_pack(a),
        Command::ListColor(a) => run_list_color(a),
        Command::Oracle(c) => run_oracle(c),
        Command::Validate(a) => run_validate(a),
        Command::Schedule(c) => run_schedule(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("itpack: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
