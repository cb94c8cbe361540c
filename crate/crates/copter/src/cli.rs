//! The `copter` command line.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use copter_core::adoption::{adoption_probability, sample_intercept, PersonIntercept};
use copter_core::choice::{acceptability, fit_mnl};
use copter_core::copter::{assess, select, CopterError, ScoredCandidate};
use copter_core::energy::{free_flow_speeds, plan_energy};
use copter_core::likelihood::synthetic::{labelled_profiles, sample_profile, ProfileMarginals};
use copter_core::likelihood::{f1_scores, train_forest, BaselineKind, Baseline, Target};
use copter_core::mode::{word_string, ModeCategory, ModeLabel};
use copter_core::modelang::LanguageElement;
use copter_core::netgraph::{Query, Seconds, TransportGraph};
use copter_core::planner::{plan_with, Plan, SearchStrategy};
use copter_core::sim::{grid_network, GridSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::{Config, ConfigError};
use crate::experiment::{run_experiment, SimReport};
use crate::models::{load_forest, load_models_dir};
use crate::report::{render, Format};
use crate::scenario::Scenario;
use crate::{data_io, graph_io, to_json, FileError, FORMAT_VERSIONS};

fn long_version() -> &'static str {
    let formats: Vec<String> = FORMAT_VERSIONS.iter().map(|(name, v)| format!("{name} {v}")).collect();
    let s = format!("{}\nformats: {}", env!("CARGO_PKG_VERSION"), formats.join(", "));
    Box::leak(s.into_boxed_str())
}

/// Acceptable multi-modal trip planning and fuel-impact simulation.
///
/// Set COPTER_LOG to error, warn, info or debug to control diagnostics.
#[derive(Debug, Parser)]
#[command(name = "copter", version, long_version = long_version())]
pub struct Cli {
    /// TOML configuration file layered over the built-in defaults.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Overrides one configuration key, e.g. `adoption.intercept_sd=0.5`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Earliest-arrival plan whose mode sequence matches a pattern.
    Plan(PlanArgs),
    /// Fits a multinomial logit model to observed choices.
    FitChoice(FitChoiceArgs),
    /// Trains a random forest on a training CSV.
    TrainForest(TrainForestArgs),
    /// F1 scores of a forest against two baselines, and feature importances.
    EvalForest(EvalForestArgs),
    /// Switching gain, odds and adoption probability for a pair of probabilities.
    Acceptability(AcceptabilityArgs),
    /// The alternative with the largest expected fuel saving for a driver.
    Recommend(RecommendArgs),
    /// Runs a baseline-versus-influence experiment.
    Simulate(SimulateArgs),
    /// Renders a simulation report.
    Report(ReportArgs),
    /// Writes the synthetic grid network as CSV files.
    SynthGrid(SynthGridArgs),
    /// Writes a synthetic labelled training CSV.
    SynthTraining(SynthTrainingArgs),
    /// Writes synthetic traveler profiles as CSV.
    SynthProfiles(SynthProfilesArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    Dijkstra,
    Astar,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TargetArg {
    Mode,
    Category,
}

#[derive(Debug, Args)]
struct TripArgs {
    /// Directory holding nodes.csv, edges.csv and schedules.csv.
    #[arg(long, value_name = "DIR")]
    graph: PathBuf,
    /// Origin node id.
    #[arg(long)]
    from: String,
    /// Destination node id.
    #[arg(long)]
    to: String,
    /// Departure, seconds since midnight.
    #[arg(long, value_name = "S")]
    depart: Seconds,
    /// Latest arrival, seconds since midnight.
    #[arg(long, value_name = "S")]
    deadline: Seconds,
}

#[derive(Debug, Args)]
struct PlanArgs {
    #[command(flatten)]
    trip: TripArgs,
    /// Pattern over mode symbols w c b s d r m, e.g. "w*b+w*".
    #[arg(long, value_name = "PATTERN")]
    lang: String,
    /// Search strategy; defaults to planner.strategy.
    #[arg(long)]
    strategy: Option<StrategyArg>,
    /// Output file; standard output when absent.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FitChoiceArgs {
    /// Choice CSV in long format.
    #[arg(long, value_name = "FILE")]
    data: PathBuf,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TrainForestArgs {
    /// Training CSV with profile feature columns and `label`.
    #[arg(long, value_name = "FILE")]
    data: PathBuf,
    #[arg(long)]
    target: TargetArg,
    /// Seed for bootstrap samples and feature subsets.
    #[arg(long)]
    seed: u64,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalForestArgs {
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    #[arg(long, value_name = "FILE")]
    data: PathBuf,
    /// Seed of the weighted-random baseline.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when absent.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AcceptabilityArgs {
    /// Probability of the recommended mode (or category).
    #[arg(long = "pr-r")]
    pr_r: f64,
    /// Probability of the usual mode (or category).
    #[arg(long = "pr-u")]
    pr_u: f64,
    /// Person intercept; adoption.intercept_mean when absent.
    #[arg(long, allow_hyphen_values = true)]
    intercept: Option<f64>,
}

#[derive(Debug, Args)]
struct RecommendArgs {
    #[command(flatten)]
    trip: TripArgs,
    /// Directory holding forest.json (or choice.json) and optionally languages.txt.
    #[arg(long, value_name = "DIR")]
    models: PathBuf,
    /// Traveler profile JSON.
    #[arg(long, value_name = "FILE")]
    profile: PathBuf,
    /// Draws the person intercept; the mean intercept is used when absent.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_name = "FILE")]
    scenario: PathBuf,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Report JSON written by `simulate`.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthGridArgs {
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Intersections per side.
    #[arg(long, default_value_t = GridSpec::default().size)]
    size: usize,
}

#[derive(Debug, Args)]
struct SynthTrainingArgs {
    #[arg(long, default_value_t = 5000)]
    n: usize,
    /// Share of labels replaced at random.
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SynthProfilesArgs {
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

/// A problem with how the program was invoked rather than with its data.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => crate::write_file(p, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}

fn load_config(cli: &Cli) -> anyhow::Result<Config> {
    Config::load(cli.config.as_deref(), &cli.overrides).map_err(|e| match e {
        ConfigError::Malformed(_) | ConfigError::Override { .. } => anyhow!(UsageError(e.to_string())),
        other => anyhow!(other),
    })
}

fn load_query(trip: &TripArgs) -> anyhow::Result<(TransportGraph, Query)> {
    let graph = graph_io::load_graph_dir(&trip.graph)?;
    let query = Query::new(&graph, &trip.from, &trip.to, trip.depart, trip.deadline)
        .with_context(|| format!("query on {}", trip.graph.display()))?;
    Ok((graph, query))
}

#[derive(Serialize)]
struct StepJson<'a> {
    edge: &'a str,
    from: &'a str,
    to: &'a str,
    mode: ModeLabel,
    start: Seconds,
    duration: Seconds,
    length_m: f64,
}

#[derive(Serialize)]
struct PlanJson<'a> {
    steps: Vec<StepJson<'a>>,
    word: String,
    depart: Seconds,
    arrive: Seconds,
    distance: f64,
}

fn plan_json<'a>(graph: &'a TransportGraph, plan: &Plan) -> PlanJson<'a> {
    PlanJson {
        steps: plan
            .steps
            .iter()
            .map(|s| {
                let e = graph.edge(s.edge);
                StepJson {
                    edge: &e.id,
                    from: &e.from,
                    to: &e.to,
                    mode: s.mode,
                    start: s.start,
                    duration: s.duration,
                    length_m: s.length_m,
                }
            })
            .collect(),
        word: word_string(&plan.word),
        depart: plan.depart,
        arrive: plan.arrive,
        distance: plan.distance_m,
    }
}

fn cmd_plan(config: &Config, a: &PlanArgs) -> anyhow::Result<()> {
    let lang = LanguageElement::parse(&a.lang).map_err(|e| UsageError(format!("--lang: {e}")))?;
    let (graph, query) = load_query(&a.trip)?;
    let strategy = match a.strategy {
        Some(StrategyArg::Dijkstra) => SearchStrategy::Dijkstra,
        Some(StrategyArg::Astar) => SearchStrategy::AStar,
        None => config.planner.strategy,
    };
    let plan = plan_with(&graph, &query, &lang.dfa, strategy)
        .ok_or_else(|| anyhow!("no plan matching `{}` reaches {} by {}", a.lang, a.trip.to, a.trip.deadline))?;
    emit(a.out.as_deref(), &to_json(&plan_json(&graph, &plan)))
}

fn cmd_fit_choice(config: &Config, a: &FitChoiceArgs) -> anyhow::Result<()> {
    let (records, schema) = data_io::load_choices(&a.data)?;
    let fit = fit_mnl(&records, schema, config.choice.reference, config.choice.fit_options())
        .with_context(|| format!("fitting {}", a.data.display()))?;
    log::info!("log-likelihood {:.6} after {} iterations", fit.log_likelihood, fit.iterations);
    if !fit.converged {
        log::warn!("fit stopped before reaching the gradient tolerance");
    }
    crate::write_file(&a.out, to_json(&fit.model).as_bytes())?;
    Ok(())
}

fn target_of(t: TargetArg) -> Target {
    match t {
        TargetArg::Mode => Target::Mode,
        TargetArg::Category => Target::Category,
    }
}

fn cmd_train_forest(config: &Config, a: &TrainForestArgs) -> anyhow::Result<()> {
    let data = data_io::load_training(&a.data, target_of(a.target))?;
    let model = train_forest(&data, config.forest, a.seed).with_context(|| format!("training on {}", a.data.display()))?;
    log::info!("trained {} trees on {} rows", model.trees.len(), data.len());
    crate::write_file(&a.out, to_json(&model).as_bytes())?;
    Ok(())
}

fn cmd_eval_forest(a: &EvalForestArgs) -> anyhow::Result<()> {
    let model = load_forest(&a.model)?;
    let target = if model.label_names == Target::Mode.label_names() {
        Target::Mode
    } else if model.label_names == Target::Category.label_names() {
        Target::Category
    } else {
        return Err(FileError::invalid(&a.model, "labels are neither modes nor mode categories").into());
    };
    let data = data_io::load_training(&a.data, target)?;
    if model.feature_names != data.feature_names {
        return Err(FileError::invalid(&a.model, "model features do not match the data columns").into());
    }
    let n_labels = data.label_names.len();
    let predicted = data.rows.iter().map(|r| model.predict(r)).collect::<Result<Vec<_>, _>>()?;
    let forest = f1_scores(&predicted, &data.labels, n_labels)?;
    let frequent = Baseline::fit(&data, BaselineKind::MostFrequent)?.predict(data.len(), a.seed);
    let frequent = f1_scores(&frequent, &data.labels, n_labels)?;
    let random = Baseline::fit(&data, BaselineKind::WeightedRandom)?.predict(data.len(), a.seed);
    let random = f1_scores(&random, &data.labels, n_labels)?;

    let cell = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_default();
    let mut out = format!("# seed={}\nlabel,forest,most_frequent,weighted_random,support\n", a.seed);
    for (i, name) in data.label_names.iter().enumerate() {
        out += &format!(
            "{name},{},{},{},{}\n",
            cell(forest.per_class[i]),
            cell(frequent.per_class[i]),
            cell(random.per_class[i]),
            forest.support[i]
        );
    }
    out += &format!("weighted,{:.4},{:.4},{:.4},{}\n", forest.weighted, frequent.weighted, random.weighted, data.len());
    let mut importance = model.gini_importance();
    importance.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out += "\nfeature,importance\n";
    for (name, v) in importance {
        out += &format!("{name},{v:.6}\n");
    }
    emit(a.out.as_deref(), &out)
}

fn cmd_acceptability(config: &Config, a: &AcceptabilityArgs) -> anyhow::Result<()> {
    for (flag, v) in [("--pr-r", a.pr_r), ("--pr-u", a.pr_u)] {
        if !(0.0..=1.0).contains(&v) {
            bail!(UsageError(format!("{flag} must lie in [0, 1]")));
        }
    }
    let acc = acceptability(a.pr_r, a.pr_u);
    let intercept = a.intercept.unwrap_or(config.adoption.intercept_mean);
    let adoption = adoption_probability(&config.adoption, PersonIntercept(intercept), acc.odds);
    let out = json!({
        "pr_r": a.pr_r,
        "pr_u": a.pr_u,
        "delta": acc.delta,
        "odds": acc.odds,
        "intercept": intercept,
        "beta_odds": config.adoption.beta_odds,
        "adoption_prob": adoption,
    });
    emit(None, &to_json(&out))
}

fn candidate_json(graph: &TransportGraph, c: &ScoredCandidate, probs: &[f64; 3]) -> serde_json::Value {
    json!({
        "language": c.language,
        "category": c.category,
        "pr_r": probs[c.category.index()],
        "pr_u": probs[ModeCategory::Motorized.index()],
        "delta": c.acceptability.delta,
        "odds": c.acceptability.odds,
        "adoption_prob": c.adoption_prob,
        "saving_l": c.saving_l,
        "expected_saving_l": c.expected_saving_l,
        "plan": plan_json(graph, &c.plan),
    })
}

fn cmd_recommend(config: &Config, a: &RecommendArgs) -> anyhow::Result<()> {
    let profile = data_io::load_profile(&a.profile)?;
    let models = load_models_dir(&a.models, config.copter.likelihood)?;
    let (graph, query) = load_query(&a.trip)?;
    let mut copter = config.copter_config();
    copter.languages = models.languages;
    let intercept = match a.seed {
        Some(s) => sample_intercept(&config.adoption, &mut ChaCha8Rng::seed_from_u64(s)),
        None => PersonIntercept(config.adoption.intercept_mean),
    };
    let assessment = assess(&graph, &query, &profile, models.likelihood.as_ref(), &copter, intercept)
        .map_err(|e| match e {
            CopterError::NotADriver => anyhow!("{}: {e}", a.profile.display()),
            other => anyhow!(other),
        })?;
    let chosen = select(&assessment.candidates, copter.selection);
    let probs = assessment.category_probs;
    let baseline = &assessment.baseline;
    let out = json!({
        "seed": a.seed,
        "intercept": intercept.0,
        "category_probs": {
            "non-motorized": probs[0],
            "public-transit": probs[1],
            "motorized": probs[2],
        },
        "baseline": {
            "fuel_l": assessment.baseline_fuel_l,
            "plan": plan_json(&graph, baseline),
        },
        "recommendation": chosen.map(|i| candidate_json(&graph, &assessment.candidates[i], &probs)),
        "candidates": assessment.candidates.iter().map(|c| candidate_json(&graph, c, &probs)).collect::<Vec<_>>(),
    });
    if chosen.is_none() {
        log::info!("{}", CopterError::NoAlternative);
    }
    let free_flow = plan_energy(&copter.fuel, baseline, &free_flow_speeds(&graph, baseline));
    log::debug!("baseline {} at {free_flow:.4} l", word_string(&baseline.word));
    emit(a.out.as_deref(), &to_json(&out))
}

fn cmd_simulate(config: &Config, a: &SimulateArgs) -> anyhow::Result<()> {
    let scenario = Scenario::load(&a.scenario, config)?;
    log::info!("{} travelers on {} nodes", scenario.travelers.len(), scenario.graph.nodes().len());
    let report = run_experiment(&scenario).with_context(|| format!("simulating {}", a.scenario.display()))?;
    crate::write_file(&a.out, to_json(&report).as_bytes())?;
    Ok(())
}

fn cmd_report(a: &ReportArgs) -> anyhow::Result<()> {
    let report: SimReport = crate::read_json(&a.input)?;
    emit(a.out.as_deref(), &render(&report, a.format))
}

fn cmd_synth_grid(a: &SynthGridArgs) -> anyhow::Result<()> {
    let spec = GridSpec { size: a.size, ..GridSpec::default() };
    let net = grid_network(&spec).map_err(|e| UsageError(format!("--size: {e}")))?;
    graph_io::write_graph_dir(&net.graph, &a.out)?;
    Ok(())
}

fn cmd_synth_training(a: &SynthTrainingArgs) -> anyhow::Result<()> {
    if !(0.0..=1.0).contains(&a.noise) {
        bail!(UsageError("--noise must lie in [0, 1]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let (profiles, modes) = labelled_profiles(a.n, a.noise, &ProfileMarginals::default(), &mut rng);
    let mut buf = format!("# seed={}\n", a.seed).into_bytes();
    data_io::write_training(&profiles, &modes, &mut buf).map_err(|e| FileError::invalid(&a.out, e))?;
    crate::write_file(&a.out, &buf)?;
    Ok(())
}

fn cmd_synth_profiles(a: &SynthProfilesArgs) -> anyhow::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let profiles: Vec<_> = (0..a.n).map(|_| sample_profile(&ProfileMarginals::default(), &mut rng)).collect();
    let mut buf = format!("# seed={}\n", a.seed).into_bytes();
    data_io::write_profiles(&profiles, &mut buf).map_err(|e| FileError::invalid(&a.out, e))?;
    crate::write_file(&a.out, &buf)?;
    Ok(())
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let config = load_config(cli)?;
    match &cli.command {
        Command::Plan(a) => cmd_plan(&config, a),
        Command::FitChoice(a) => cmd_fit_choice(&config, a),
        Command::TrainForest(a) => cmd_train_forest(&config, a),
        Command::EvalForest(a) => cmd_eval_forest(a),
        Command::Acceptability(a) => cmd_acceptability(&config, a),
        Command::Recommend(a) => cmd_recommend(&config, a),
        Command::Simulate(a) => cmd_simulate(&config, a),
        Command::Report(a) => cmd_report(a),
        Command::SynthGrid(a) => cmd_synth_grid(a),
        Command::SynthTraining(a) => cmd_synth_training(a),
        Command::SynthProfiles(a) => cmd_synth_profiles(a),
    }
}

/// Parses `args`, runs the command and maps the outcome to an exit code:
/// 0 on success, 1 for usage errors, 2 for data and model errors.
pub fn dispatch<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("copter: error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

pub fn init_logging() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("COPTER_LOG", "warn"))
        .format_timestamp(None)
        .init();
}
