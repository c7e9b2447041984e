use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use multicut::bench::{self, ExperimentSpec, ReportFormat};
use multicut::embedding::{
    chimera_graph, find_embedding, load_hardware_graph, run_pipeline, ChainStrength,
    EmbedParams, HardwareGraph, LogicalGraph, PipelineConfig, PipelineError,
    DEFAULT_TORQUE_PREFACTOR,
};
use multicut::qubo::{check_feasibility, extract_cutset, parse_labels, Qubo, SlackSign};
use multicut::solvers::{
    exact_bruteforce, racing_solve, simulated_annealing, SaSchedule, SampleSet, SolverConfig,
    SolverError, Vartype,
};
use multicut::{generate_tree_instance, Encoding, EncodingOptions, ScheduleKind, TreeInstance};

#[derive(Parser, Debug)]
#[command(name = "multicut", version, about = "Tree vertex multicut as QUBO: generate, encode, sample, embed, benchmark")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout when absent).
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Report format for `bench` and `report`.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Log verbosity (repeat for more).
    #[arg(long, short, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random tree instance.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
    /// Build a QUBO from an instance file.
    Build {
        instance: PathBuf,
        #[arg(long, default_value = "slack")]
        encoding: String,
        #[arg(long)]
        m1: Option<f64>,
        #[arg(long)]
        m2: Option<f64>,
        /// Substitute x = 0 for terminals (default: on for slack, off for literal).
        #[arg(long, action = clap::ArgAction::Set)]
        fix_terminals: Option<bool>,
        #[arg(long, default_value = "minus")]
        slack_sign: String,
        /// Label file (defaults to `<output>.labels` when --output is set).
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Sample or solve a QUBO file.
    Solve {
        qubo: PathBuf,
        #[arg(long, value_enum, default_value_t = SolverKind::Sa)]
        solver: SolverKind,
        #[command(flatten)]
        sa: SaArgs,
        /// Wall-clock budget for `race`, in seconds.
        #[arg(long, default_value_t = 60.0)]
        budget_s: f64,
        /// Instance and label files; when both are given the best sample's
        /// cutset and feasibility are recorded.
        #[arg(long, requires = "labels")]
        instance: Option<PathBuf>,
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Record wall time in the output.
        #[arg(long)]
        timing: bool,
    },
    /// Find a minor embedding of a QUBO's interaction graph.
    Embed {
        qubo: PathBuf,
        #[command(flatten)]
        hw: HardwareArgs,
        #[arg(long, default_value_t = 10)]
        tries: usize,
    },
    /// Embed, anneal the chained model, and decode.
    Pipeline {
        qubo: PathBuf,
        #[command(flatten)]
        hw: HardwareArgs,
        /// `auto` (uniform torque compensation) or a positive value.
        #[arg(long, default_value = "auto")]
        chain_strength: String,
        #[arg(long, default_value_t = DEFAULT_TORQUE_PREFACTOR)]
        prefactor: f64,
        #[command(flatten)]
        sa: SaArgs,
        /// Chain statistics file (JSON).
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(long)]
        timing: bool,
    },
    /// Run a benchmark spec (the default suite when no file is given).
    Bench {
        spec: Option<PathBuf>,
        #[arg(long)]
        plot_dir: Option<PathBuf>,
        /// Leave wall-time columns empty.
        #[arg(long)]
        no_timing: bool,
    },
    /// Re-emit stored JSON benchmark records.
    Report {
        records: PathBuf,
        #[arg(long)]
        plot_dir: Option<PathBuf>,
        #[arg(long)]
        no_timing: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SolverKind {
    Sa,
    Exact,
    Race,
}

#[derive(Args, Debug)]
struct SaArgs {
    #[arg(long, default_value = "geometric")]
    schedule: String,
    #[arg(long, default_value_t = 0.1)]
    beta_min: f64,
    #[arg(long, default_value_t = 10.0)]
    beta_max: f64,
    #[arg(long, default_value_t = 100)]
    sweeps: usize,
    #[arg(long, default_value_t = 100)]
    shots: usize,
}

impl SaArgs {
    fn schedule(&self) -> Result<SaSchedule, Failure> {
        let kind: ScheduleKind = self.schedule.parse().map_err(Failure::Usage)?;
        SaSchedule::new(kind, self.beta_min, self.beta_max, self.sweeps)
            .map_err(|e| Failure::Usage(e.to_string()))
    }
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct HardwareArgs {
    /// Hardware graph file (`num_qubits` line, then `u v` edges).
    #[arg(long)]
    hardware: Option<PathBuf>,
    /// Chimera dimensions.
    #[arg(long, num_args = 3, value_names = ["M", "N", "T"])]
    chimera: Option<Vec<usize>>,
}

impl HardwareArgs {
    fn load(&self) -> Result<HardwareGraph, Failure> {
        match (&self.hardware, &self.chimera) {
            (Some(path), _) => load_hardware_graph(path).map_err(|e| Failure::Other(e.into())),
            (None, Some(d)) => chimera_graph(d[0], d[1], d[2]).map_err(|e| Failure::Usage(e.to_string())),
            (None, None) => Err(Failure::Usage("one of --hardware or --chimera is required".into())),
        }
    }
}

enum Failure {
    Usage(String),
    SizeLimit(String),
    Embedding(String),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

impl Failure {
    fn from_solver(e: SolverError) -> Self {
        match e {
            SolverError::SizeLimit { .. } => Failure::SizeLimit(e.to_string()),
            SolverError::InvalidSchedule(_) | SolverError::InvalidShots => Failure::Usage(e.to_string()),
            e => Failure::Other(e.into()),
        }
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(output: Option<&Path>, contents: &str) -> anyhow::Result<()> {
    match output {
        Some(path) => fs::write(path, contents).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn load_qubo(path: &Path) -> Result<Qubo<f64>, Failure> {
    let text = read(path)?;
    Qubo::from_text(&text).map_err(|e| Failure::Other(anyhow!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<TreeInstance, Failure> {
    let text = read(path)?;
    TreeInstance::from_json(&text).map_err(|e| Failure::Other(anyhow!("{}: {e}", path.display())))
}

fn json_only(cli: &Cli) -> Result<(), Failure> {
    if cli.format == Some(Format::Csv) {
        return Err(Failure::Usage("csv output is only available for bench and report".into()));
    }
    Ok(())
}

fn cmd_gen(cli: &Cli, n: usize, k: usize) -> Result<(), Failure> {
    json_only(cli)?;
    let inst = generate_tree_instance(n, k, cli.seed).map_err(|e| Failure::Usage(e.to_string()))?;
    emit(cli.output.as_deref(), &inst.to_json())?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_build(
    cli: &Cli,
    instance: &Path,
    encoding: &str,
    m1: Option<f64>,
    m2: Option<f64>,
    fix_terminals: Option<bool>,
    slack_sign: &str,
    labels: Option<&Path>,
) -> Result<(), Failure> {
    json_only(cli)?;
    let encoding: Encoding = encoding.parse().map_err(Failure::Usage)?;
    let slack_sign: SlackSign = slack_sign.parse().map_err(Failure::Usage)?;
    let inst = load_instance(instance)?;
    let base = match encoding {
        Encoding::Slack => EncodingOptions::slack(),
        Encoding::Literal => EncodingOptions::literal(),
    };
    let options = EncodingOptions {
        fix_terminals: fix_terminals.unwrap_or(base.fix_terminals),
        slack_sign,
        ..base
    };
    let (dm1, dm2) = multicut::qubo::default_penalties::<f64>(&inst);
    for (name, v) in [("--m1", m1), ("--m2", m2)] {
        if v.is_some_and(|v| !(v > 0.0 && v.is_finite())) {
            return Err(Failure::Usage(format!("{name} must be positive")));
        }
    }
    let q = options
        .build(&inst, m1.unwrap_or(dm1), m2.unwrap_or(dm2))
        .map_err(|e| Failure::Other(e.into()))?;
    emit(cli.output.as_deref(), &q.to_text())?;
    let label_path = labels
        .map(Path::to_owned)
        .or_else(|| cli.output.as_ref().map(|o| with_suffix(o, "labels")));
    if let Some(path) = label_path {
        fs::write(&path, q.labels_to_text()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

fn bits_of(set: &SampleSet<f64>, idx: usize) -> Vec<u8> {
    set.bits(&set.records[idx])
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    cli: &Cli,
    qubo: &Path,
    solver: SolverKind,
    sa: &SaArgs,
    budget_s: f64,
    instance: Option<&Path>,
    labels: Option<&Path>,
    timing: bool,
) -> Result<(), Failure> {
    json_only(cli)?;
    let mut q = load_qubo(qubo)?;
    let schedule = sa.schedule()?;
    if sa.shots == 0 {
        return Err(Failure::Usage("--shots must be ≥ 1".into()));
    }
    let mut set = match solver {
        SolverKind::Sa => simulated_annealing(&q, &schedule, sa.shots, cli.seed).map_err(Failure::from_solver)?,
        SolverKind::Exact => {
            let (x, _) = exact_bruteforce(&q).map_err(Failure::from_solver)?;
            let values = x.iter().map(|&b| b as i8).collect();
            SampleSet::from_samples(&q, vec![values], "exact", cli.seed).map_err(Failure::from_solver)?
        }
        SolverKind::Race => {
            if !(budget_s > 0.0 && budget_s.is_finite()) {
                return Err(Failure::Usage("--budget-s must be positive".into()));
            }
            let mut configs = vec![
                SolverConfig::Anneal { schedule, shots: sa.shots, seed: None },
                SolverConfig::Anneal {
                    schedule: SaSchedule::new(ScheduleKind::Linear, sa.beta_min, sa.beta_max, sa.sweeps)
                        .map_err(Failure::from_solver)?,
                    shots: sa.shots,
                    seed: None,
                },
            ];
            if q.num_vars() <= multicut::solvers::BRUTE_FORCE_LIMIT {
                configs.push(SolverConfig::Exact);
            }
            racing_solve(&q, &configs, Duration::from_secs_f64(budget_s), cli.seed)
                .map_err(Failure::from_solver)?
        }
    };
    if let (Some(inst_path), Some(label_path)) = (instance, labels) {
        let inst = load_instance(inst_path)?;
        let labels = parse_labels(&read(label_path)?).map_err(|e| Failure::Other(e.into()))?;
        q = q.with_labels(labels).map_err(|e| Failure::Other(e.into()))?;
        let cut = extract_cutset(&q, &bits_of(&set, 0));
        let verdict = check_feasibility(&inst, &cut);
        let list: Vec<String> = cut.vertices().iter().map(|v| v.to_string()).collect();
        set.info.insert("cutset".into(), list.join(" "));
        set.info.insert("cutset_size".into(), cut.len().to_string());
        set.info.insert("feasible".into(), verdict.is_feasible().to_string());
    }
    emit(cli.output.as_deref(), &set.to_json(timing))?;
    Ok(())
}

fn cmd_embed(cli: &Cli, qubo: &Path, hw: &HardwareArgs, tries: usize) -> Result<(), Failure> {
    json_only(cli)?;
    let q = load_qubo(qubo)?;
    let hw = hw.load()?;
    let logical = LogicalGraph::new(q.num_vars(), q.interactions());
    let params = EmbedParams { max_tries: tries.max(1), seed: cli.seed, ..EmbedParams::default() };
    let emb = find_embedding(&logical, &hw, &params).map_err(|e| Failure::Embedding(e.to_string()))?;
    log::info!(
        "embedded {} variables on {} qubits (max chain {})",
        q.num_vars(),
        emb.num_physical(),
        emb.max_chain_len()
    );
    emit(cli.output.as_deref(), &emb.to_json())?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_pipeline(
    cli: &Cli,
    qubo: &Path,
    hw: &HardwareArgs,
    chain_strength: &str,
    prefactor: f64,
    sa: &SaArgs,
    stats: Option<&Path>,
    timing: bool,
) -> Result<(), Failure> {
    json_only(cli)?;
    let chain_strength = match chain_strength {
        "auto" => ChainStrength::Auto { prefactor },
        v => match v.parse::<f64>() {
            Ok(c) if c > 0.0 && c.is_finite() => ChainStrength::Fixed(c),
            _ => return Err(Failure::Usage(format!("--chain-strength must be `auto` or a positive number (got {v})"))),
        },
    };
    if sa.shots == 0 {
        return Err(Failure::Usage("--shots must be ≥ 1".into()));
    }
    let q = load_qubo(qubo)?;
    let hw = hw.load()?;
    let config = PipelineConfig {
        schedule: sa.schedule()?,
        shots: sa.shots,
        chain_strength,
        embed: EmbedParams::default(),
        autoscale: true,
    };
    let out = run_pipeline(&q.to_ising(), &hw, &config, cli.seed).map_err(|e| match e {
        PipelineError::EmbedFailed(e) => Failure::Embedding(e.to_string()),
        PipelineError::Solver(e) => Failure::from_solver(e),
        e => Failure::Other(e.into()),
    })?;
    // report samples as QUBO assignments with QUBO energies
    let decoded = out.logical.records.iter().map(|r| {
        let bits: Vec<i8> = r.assignment.iter().map(|&s| i8::from(s > 0)).collect();
        (bits, r.occurrences)
    });
    let id = format!("pipeline[{}]", hw.topology_tag());
    let mut set = SampleSet::from_weighted(&q, decoded, id, cli.seed).map_err(Failure::from_solver)?;
    debug_assert_eq!(set.vartype, Vartype::Binary);
    set.info = out.logical.info.clone();
    set.info.insert("chain_strength".into(), out.stats.chain_strength.to_string());
    set.info.insert("scale".into(), out.scale.to_string());
    set.wall_time_s = out.times.embed_s + out.times.sample_s + out.times.unembed_s;
    emit(cli.output.as_deref(), &set.to_json(timing))?;

    let stats_json = serde_json::to_string_pretty(&out.stats).context("serializing stats")? + "\n";
    match stats {
        Some(path) => fs::write(path, stats_json).with_context(|| format!("writing {}", path.display()))?,
        None => log::info!("chain stats: {}", stats_json.trim()),
    }
    Ok(())
}

fn report_format(cli: &Cli) -> ReportFormat {
    match cli.format {
        Some(Format::Json) => ReportFormat::Json,
        _ => ReportFormat::Csv,
    }
}

fn write_report(
    cli: &Cli,
    records: &[bench::MetricsRecord],
    out: Option<PathBuf>,
    plot_dir: Option<&Path>,
    timing: bool,
) -> Result<(), Failure> {
    let format = report_format(cli);
    match out {
        Some(path) => {
            bench::emit_report(records, format, &path, plot_dir, timing).map_err(|e| Failure::Other(e.into()))?;
        }
        None => {
            let body = match format {
                ReportFormat::Csv => bench::records_to_csv(records, timing),
                ReportFormat::Json => bench::records_to_json(records),
            };
            emit(None, &body)?;
            if let Some(dir) = plot_dir {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                for (name, contents) in bench::plot_data(records) {
                    fs::write(dir.join(&name), contents).with_context(|| format!("writing {name}"))?;
                }
            }
        }
    }
    Ok(())
}

fn cmd_bench(cli: &Cli, spec: Option<&Path>, plot_dir: Option<&Path>, no_timing: bool) -> Result<(), Failure> {
    let spec = match spec {
        Some(path) => ExperimentSpec::from_json(&read(path)?)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
        None => ExperimentSpec::default(),
    };
    let records = bench::run_suite(&spec).map_err(|e| Failure::Usage(e.to_string()))?;
    let out = cli.output.clone().or_else(|| match report_format(cli) {
        ReportFormat::Csv => spec.output.csv.clone(),
        ReportFormat::Json => spec.output.json.clone(),
    });
    let plot_dir = plot_dir.map(Path::to_owned).or_else(|| spec.output.plot_dir.clone());
    write_report(cli, &records, out, plot_dir.as_deref(), !no_timing)
}

fn cmd_report(cli: &Cli, records: &Path, plot_dir: Option<&Path>, no_timing: bool) -> Result<(), Failure> {
    let records = bench::records_from_json(&read(records)?).map_err(|e| Failure::Usage(e.to_string()))?;
    if records.is_empty() {
        return Err(Failure::Usage("no records to report".into()));
    }
    write_report(cli, &records, cli.output.clone(), plot_dir, !no_timing)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Gen { n, k } => cmd_gen(cli, *n, *k),
        Command::Build { instance, encoding, m1, m2, fix_terminals, slack_sign, labels } => {
            cmd_build(cli, instance, encoding, *m1, *m2, *fix_terminals, slack_sign, labels.as_deref())
        }
        Command::Solve { qubo, solver, sa, budget_s, instance, labels, timing } => {
            cmd_solve(cli, qubo, *solver, sa, *budget_s, instance.as_deref(), labels.as_deref(), *timing)
        }
        Command::Embed { qubo, hw, tries } => cmd_embed(cli, qubo, hw, *tries),
        Command::Pipeline { qubo, hw, chain_strength, prefactor, sa, stats, timing } => {
            cmd_pipeline(cli, qubo, hw, chain_strength, *prefactor, sa, stats.as_deref(), *timing)
        }
        Command::Bench { spec, plot_dir, no_timing } => cmd_bench(cli, spec.as_deref(), plot_dir.as_deref(), *no_timing),
        Command::Report { records, plot_dir, no_timing } => {
            cmd_report(cli, records, plot_dir.as_deref(), *no_timing)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::new().parse_filters(level).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::SizeLimit(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Embedding(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(4)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
