//! The `labctl` command line. Exit status 0 on success, 2 on usage errors
//! (including a missing config file), 1 on module errors with a JSON error
//! payload on stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use super::report::report;
use super::trend::{FatChoice, RosterEntry};
use super::{
    run_experiment, EstimatorChoice, ExperimentConfig, ExperimentKind, FutureSource, GeneratorKind, ModeChoice,
    ProtocolChoice,
};
use crate::algonet::TopologyKind;
use crate::error::{LabError, Result};
use crate::evomodel::ReadBack;
use crate::observer::Channel;

pub const EXIT_OK: i32 = 0;
pub const EXIT_MODULE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "labctl", version, about = "Run algorithmic information dynamics experiments")]
pub struct Cli {
    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML experiment config; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// compress, ctm, or bdm:<block> (tables at s=2, budget 1000).
    #[arg(long, global = true, value_parser = parse_estimator)]
    pub estimator: Option<EstimatorChoice>,
    /// A CTM cache file to load instead of enumerating.
    #[arg(long, global = true)]
    pub ctm_cache: Option<PathBuf>,
    #[arg(long, global = true)]
    pub c_i: Option<u32>,
    #[arg(long, global = true)]
    pub c_o: Option<u32>,
    #[arg(long, global = true)]
    pub c_e: Option<u32>,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Coding-theorem tables.
    Ctm {
        #[command(subcommand)]
        action: CtmCmd,
    },
    /// Perturbation experiments.
    Perturb {
        #[command(subcommand)]
        action: PerturbCmd,
    },
    /// Observation-principle checks on random ECA fixtures.
    Observe(ObserveArgs),
    /// Emergence verdicts on random ECA fixtures.
    Verdict(VerdictArgs),
    /// Mutation/selection evolution runs.
    Evolve(EvolveArgs),
    /// Emergent algorithmic complexity of networked populations.
    Algonet(AlgonetArgs),
    /// Isolated atlas and coupling search.
    Ueinn(UeinnArgs),
    /// First-failure horizons for an observer roster.
    AoieTrend(TrendArgs),
    /// Render charts and a summary for a run directory.
    Report { dir: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum CtmCmd {
    /// Enumerate all (s,2) machines and write the cache file.
    Build {
        #[arg(long)]
        states: Option<u32>,
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
pub enum PerturbCmd {
    /// Single-edge deletion profile of one graph.
    Graph {
        #[arg(long)]
        n: Option<usize>,
        /// complete, ring, edgeless, er:<p>, ba:<m>.
        #[arg(long, value_parser = parse_topology)]
        graph: Option<TopologyKind>,
    },
}

#[derive(Args, Debug)]
pub struct ObserveArgs {
    #[arg(long)]
    rule: Option<u8>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    t: Option<u64>,
    #[arg(long)]
    k: Option<u64>,
    /// identity, mask:<i,j,..>, coarse:<factor>.
    #[arg(long, value_parser = parse_channel)]
    channel: Option<Channel>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<ModeChoice>,
}

#[derive(Args, Debug)]
pub struct VerdictArgs {
    #[arg(long)]
    rule: Option<u8>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    t: Option<u64>,
    #[arg(long)]
    k: Option<u64>,
    #[arg(long)]
    m: Option<u64>,
    #[arg(long)]
    horizon: Option<u64>,
    /// system or random.
    #[arg(long, value_parser = parse_future)]
    future: Option<FutureSource>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<ModeChoice>,
}

#[derive(Args, Debug)]
pub struct EvolveArgs {
    #[arg(long)]
    mutations: Option<u64>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    s_max: Option<u32>,
    /// exact or prefix.
    #[arg(long, value_parser = parse_read_back)]
    read_back: Option<ReadBack>,
}

#[derive(Args, Debug)]
pub struct AlgonetArgs {
    #[arg(long, value_delimiter = ',')]
    ns: Option<Vec<usize>>,
    #[arg(long, value_parser = parse_topology)]
    topology: Option<TopologyKind>,
    /// plain or sis.
    #[arg(long, value_parser = parse_protocol)]
    protocol: Option<ProtocolChoice>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    s_max: Option<u32>,
}

#[derive(Args, Debug)]
pub struct UeinnArgs {
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    env_width: Option<usize>,
    #[arg(long)]
    env_rule: Option<u8>,
}

#[derive(Args, Debug)]
pub struct TrendArgs {
    /// evolution, algonet or constant.
    #[arg(long, value_parser = parse_generator)]
    generator: Option<GeneratorKind>,
    #[arg(long)]
    t: Option<u64>,
    #[arg(long)]
    k: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    schedule: Option<Vec<u64>>,
    #[arg(long)]
    mutations: Option<u64>,
    /// Add an observer pre-extended with every scheduled target.
    #[arg(long)]
    with_oracle: bool,
}

fn parse_estimator(s: &str) -> std::result::Result<EstimatorChoice, String> {
    match s.split_once(':') {
        None if s == "compress" => Ok(EstimatorChoice::Compress),
        None if s == "ctm" => Ok(EstimatorChoice::Ctm { states: 2, steps: 1000 }),
        Some(("bdm", b)) => Ok(EstimatorChoice::Bdm {
            states: 2,
            steps: 1000,
            block: b.parse().map_err(|_| format!("bad block size {b}"))?,
        }),
        _ => Err(format!("unknown estimator {s}")),
    }
}

fn parse_topology(s: &str) -> std::result::Result<TopologyKind, String> {
    match s.split_once(':') {
        None => match s {
            "complete" => Ok(TopologyKind::Complete),
            "ring" => Ok(TopologyKind::Ring),
            "edgeless" => Ok(TopologyKind::Edgeless),
            "ba" => Ok(TopologyKind::Ba { m: 2 }),
            _ => Err(format!("unknown topology {s}")),
        },
        Some(("er", p)) => Ok(TopologyKind::Er {
            p: p.parse().map_err(|_| format!("bad probability {p}"))?,
        }),
        Some(("ba", m)) => Ok(TopologyKind::Ba {
            m: m.parse().map_err(|_| format!("bad attachment count {m}"))?,
        }),
        _ => Err(format!("unknown topology {s}")),
    }
}

fn parse_channel(s: &str) -> std::result::Result<Channel, String> {
    match s.split_once(':') {
        None if s == "identity" => Ok(Channel::Identity),
        Some(("mask", list)) => list
            .split(',')
            .map(|i| i.parse().map_err(|_| format!("bad position {i}")))
            .collect::<std::result::Result<_, _>>()
            .map(Channel::Mask),
        Some(("coarse", f)) => f
            .parse()
            .map(Channel::CoarseGrain)
            .map_err(|_| format!("bad factor {f}")),
        _ => Err(format!("unknown channel {s}")),
    }
}

fn parse_mode(s: &str) -> std::result::Result<ModeChoice, String> {
    match s {
        "upper" => Ok(ModeChoice::Upper),
        "exact" => Ok(ModeChoice::Exact),
        _ => Err(format!("unknown mode {s}")),
    }
}

fn parse_future(s: &str) -> std::result::Result<FutureSource, String> {
    match s {
        "system" => Ok(FutureSource::System),
        "random" => Ok(FutureSource::Random),
        _ => Err(format!("unknown future source {s}")),
    }
}

fn parse_read_back(s: &str) -> std::result::Result<ReadBack, String> {
    match s {
        "exact" => Ok(ReadBack::Exact),
        "prefix" => Ok(ReadBack::Prefix),
        _ => Err(format!("unknown read-back {s}")),
    }
}

fn parse_protocol(s: &str) -> std::result::Result<ProtocolChoice, String> {
    match s {
        "plain" => Ok(ProtocolChoice::Plain),
        "sis" => Ok(ProtocolChoice::Sis),
        _ => Err(format!("unknown protocol {s}")),
    }
}

fn parse_generator(s: &str) -> std::result::Result<GeneratorKind, String> {
    match s {
        "evolution" => Ok(GeneratorKind::Evolution),
        "algonet" => Ok(GeneratorKind::Algonet),
        "constant" => Ok(GeneratorKind::Constant),
        _ => Err(format!("unknown generator {s}")),
    }
}

fn kind_of(cmd: &Cmd) -> Option<ExperimentKind> {
    Some(match cmd {
        Cmd::Ctm { .. } => ExperimentKind::Ctm,
        Cmd::Perturb { .. } => ExperimentKind::PerturbGraph,
        Cmd::Observe(_) => ExperimentKind::Observe,
        Cmd::Verdict(_) => ExperimentKind::Verdict,
        Cmd::Evolve(_) => ExperimentKind::Evolve,
        Cmd::Algonet(_) => ExperimentKind::Algonet,
        Cmd::Ueinn(_) => ExperimentKind::Ueinn,
        Cmd::AoieTrend(_) => ExperimentKind::AoieTrend,
        Cmd::Report { .. } => return None,
    })
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

/// Merges flags over the loaded (or default) config.
pub fn resolve(cli: Cli, base: Option<ExperimentConfig>) -> Result<ExperimentConfig> {
    let kind = kind_of(&cli.cmd).ok_or_else(|| LabError::Config("report takes no experiment config".into()))?;
    let mut c = match base {
        Some(b) if b.kind != kind => {
            return Err(LabError::Config(format!(
                "config is for {}, command is {}",
                b.kind.name(),
                kind.name()
            )))
        }
        Some(b) => b,
        None => ExperimentConfig::new(kind),
    };
    set(&mut c.seed, cli.seed);
    if cli.trials.is_some() {
        c.trials = cli.trials;
    }
    if cli.out.is_some() {
        c.out = cli.out;
    }
    if cli.ctm_cache.is_some() {
        c.ctm_cache = cli.ctm_cache;
    }
    set(&mut c.estimator, cli.estimator);
    set(&mut c.constants.c_i, cli.c_i);
    set(&mut c.constants.c_o, cli.c_o);
    set(&mut c.constants.c_e, cli.c_e);
    match cli.cmd {
        Cmd::Ctm {
            action: CtmCmd::Build { states, steps, workers },
        } => {
            set(&mut c.ctm.states, states);
            set(&mut c.ctm.steps, steps);
            if workers.is_some() {
                c.ctm.workers = workers;
            }
        }
        Cmd::Perturb {
            action: PerturbCmd::Graph { n, graph },
        } => {
            set(&mut c.perturb.n, n);
            set(&mut c.perturb.graph, graph);
        }
        Cmd::Observe(a) => {
            let p = &mut c.observe;
            set(&mut p.rule, a.rule);
            set(&mut p.width, a.width);
            set(&mut p.t, a.t);
            set(&mut p.k, a.k);
            set(&mut p.channel, a.channel);
            set(&mut p.mode, a.mode);
        }
        Cmd::Verdict(a) => {
            let p = &mut c.verdict;
            set(&mut p.rule, a.rule);
            set(&mut p.width, a.width);
            set(&mut p.t, a.t);
            set(&mut p.k, a.k);
            set(&mut p.m, a.m);
            set(&mut p.horizon, a.horizon);
            set(&mut p.future, a.future);
            set(&mut p.mode, a.mode);
        }
        Cmd::Evolve(a) => {
            let p = &mut c.evolve;
            set(&mut p.mutations, a.mutations);
            set(&mut p.budget, a.budget);
            set(&mut p.s_max, a.s_max);
            set(&mut p.read_back, a.read_back);
        }
        Cmd::Algonet(a) => {
            let p = &mut c.algonet;
            set(&mut p.ns, a.ns);
            set(&mut p.topology, a.topology);
            set(&mut p.protocol, a.protocol);
            set(&mut p.budget, a.budget);
            set(&mut p.s_max, a.s_max);
        }
        Cmd::Ueinn(a) => {
            let p = &mut c.ueinn;
            set(&mut p.width, a.width);
            set(&mut p.env_width, a.env_width);
            set(&mut p.env_rule, a.env_rule);
        }
        Cmd::AoieTrend(a) => {
            let p = &mut c.trend;
            set(&mut p.generator, a.generator);
            set(&mut p.t, a.t);
            set(&mut p.k, a.k);
            set(&mut p.schedule, a.schedule);
            set(&mut p.mutations, a.mutations);
            if a.with_oracle && !p.roster.iter().any(|r| r.fat == FatChoice::Future) {
                p.roster.push(RosterEntry::new("oracle", (4, 4, 8), FatChoice::Future));
            }
        }
        Cmd::Report { .. } => unreachable!(),
    }
    Ok(c.resolved())
}

fn module_error(err: &LabError, stderr: &mut dyn Write) -> i32 {
    let payload = json!({ "error": { "kind": err.kind(), "message": err.to_string() } });
    let _ = writeln!(stderr, "{payload}");
    EXIT_MODULE
}

/// Parses `argv` (program name first), runs the command, and returns the
/// exit status.
pub fn cli_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    dispatch_to(argv, &mut std::io::stdout(), &mut std::io::stderr())
}

pub fn dispatch_to<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(stdout, "{text}")
            } else {
                write!(stderr, "{text}")
            };
            return code;
        }
    };
    if let Cmd::Report { dir } = &cli.cmd {
        return match report(dir) {
            Ok(s) => {
                let _ = writeln!(stdout, "{}", serde_json::to_string(&s).expect("serializes"));
                EXIT_OK
            }
            Err(e) => module_error(&e, stderr),
        };
    }
    let base = match &cli.config {
        Some(path) if !path.is_file() => {
            let _ = writeln!(stderr, "error: config file {} not found", path.display());
            return EXIT_USAGE;
        }
        Some(path) => match ExperimentConfig::load(path) {
            Ok(c) => Some(c),
            Err(e) => return module_error(&e, stderr),
        },
        None => None,
    };
    let cfg = match resolve(cli, base) {
        Ok(c) => c,
        Err(e) => return module_error(&e, stderr),
    };
    match run_experiment(&cfg) {
        Ok(m) => {
            let summary = json!({
                "kind": cfg.kind.name(),
                "out": cfg.out,
                "config_hash": m.config_hash,
                "outputs": m.outputs.iter().map(|o| &o.path).collect::<Vec<_>>(),
            });
            let _ = writeln!(stdout, "{summary}");
            EXIT_OK
        }
        Err(e) => module_error(&e, stderr),
    }
}
