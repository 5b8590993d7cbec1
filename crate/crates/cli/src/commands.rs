use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::Path;

use ccb_core::bridge::{ccb_audit, BridgeError, Problem, ProblemDocument};
use ccb_core::experiment::{
    derive_seed, read_records, run_cohort, summarize, to_jsonl, AgentConfig, ChoiceRecord,
    ExperimentError,
};
use ccb_core::fixtures;
use ccb_core::kripke::{eval_at, parse_formula, FrameDocument, KripkeError, ParseError};
use ccb_core::whmm::{
    estimate_weights, io::ModelDocument, reach_probability, sample_trajectory, viterbi_decode,
    EstimateOptions, Kernel, SomaticWeights, Trajectory, WeightedMarkovModel, WhmmError,
};
use ccb_service::{ServeConfig, ServiceError};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::args::{Cli, Command, Format, KernelArg};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("cannot write {path}: {message}")]
    Write { path: String, message: String },
    #[error("{path}: {message}")]
    Json { path: String, message: String },
    #[error("{path}: {source}")]
    Model { path: String, source: WhmmError },
    #[error("{path}: {source}")]
    Frame { path: String, source: KripkeError },
    #[error("{path}: {source}")]
    Problem { path: String, source: BridgeError },
    #[error("{0}")]
    Whmm(#[from] WhmmError),
    #[error("{0}")]
    Kripke(#[from] KripkeError),
    #[error("{0}")]
    Bridge(#[from] BridgeError),
    #[error("{0}")]
    Experiment(#[from] ExperimentError),
    #[error("{0}")]
    Service(#[from] ServiceError),
    #[error("invalid formula: {error}\n  {input}\n  {caret}")]
    Formula { error: ParseError, input: String, caret: String },
    #[error("{0}")]
    Input(String),
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(cli: Cli) -> Result<()> {
    let format = cli.format;
    match cli.command {
        Command::Validate { path } => validate(&path, format),
        Command::Reach { model, from, to, horizon } => reach(&model, &from, &to, horizon, format),
        Command::Viterbi { model, from, to, horizon, kernel } => {
            viterbi(&model, &from, &to, horizon, kernel, format)
        }
        Command::Sample { model, horizon, seed, count, kernel } => sample(&model, horizon, seed, count, kernel),
        Command::Check { frame, formula, world } => check(&frame, &formula, world.as_deref(), format),
        Command::Audit { problem, theta } => audit(&problem, theta, format),
        Command::Simulate { problem, n, seed, gamma, neutral, out } => {
            simulate(&problem, n, seed, gamma, neutral, out.as_deref(), format)
        }
        Command::Summarize { log, problem, plot_data } => summarize_log(&log, problem.as_deref(), plot_data, format),
        Command::FitWeights { log, model, max_iterations } => fit_weights(&log, &model, max_iterations, format),
        Command::Serve { listen, fixtures, log } => serve(ServeConfig { listen, fixtures, log }),
    }
}

fn emit(format: Format, text: &str, structured: &Value) -> Result<()> {
    let out = match format {
        Format::Text => text.to_string(),
        Format::Json => format!("{}\n", serde_json::to_string_pretty(structured).expect("json value")),
    };
    write_stdout(&out)
}

fn write_stdout(s: &str) -> Result<()> {
    let mut stdout = io::stdout().lock();
    stdout
        .write_all(s.as_bytes())
        .and_then(|_| stdout.flush())
        .map_err(|e| CliError::Write { path: "stdout".into(), message: e.to_string() })
}

fn tag<T: Serialize>(value: &T) -> String {
    match serde_json::to_value(value) {
        Ok(Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Read { path: path.display().to_string(), message: e.to_string() })
}

fn read_json(path: &Path) -> Result<Value> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Json { path: path.display().to_string(), message: e.to_string() })
}

fn is_problem(doc: &Value) -> bool {
    doc.get("policies").is_some()
}

fn load_problem(path: &Path) -> Result<Problem> {
    let doc: ProblemDocument = serde_json::from_value(read_json(path)?)
        .map_err(|e| CliError::Json { path: path.display().to_string(), message: e.to_string() })?;
    doc.build().map_err(|source| CliError::Problem { path: path.display().to_string(), source })
}

/// Loads a model file, or the model embedded in a problem file.
fn load_model(path: &Path) -> Result<WeightedMarkovModel> {
    let value = read_json(path)?;
    if is_problem(&value) {
        return Ok(load_problem(path)?.model().clone());
    }
    let doc: ModelDocument = serde_json::from_value(value)
        .map_err(|e| CliError::Json { path: path.display().to_string(), message: e.to_string() })?;
    doc.build().map_err(|source| CliError::Model { path: path.display().to_string(), source })
}

fn kernel(k: KernelArg) -> Kernel {
    match k {
        KernelArg::True => Kernel::True,
        KernelArg::Subjective => Kernel::Subjective,
    }
}

fn validate(path: &Path, format: Format) -> Result<()> {
    let value = read_json(path)?;
    let (kind, model, id) = if is_problem(&value) {
        let p = load_problem(path)?;
        ("problem", p.model().clone(), Some(p.id.clone()))
    } else {
        ("model", load_model(path)?, None)
    };
    let states = model.states();
    let text = format!(
        "ok: {kind}{} with {} states ({} goal, {} anti-goal), {} weights\n",
        id.as_deref().map(|i| format!(" {i}")).unwrap_or_default(),
        model.n(),
        states.goal_states().len(),
        states.anti_goal_states().len(),
        if model.weights().is_neutral() { "neutral" } else { "non-neutral" },
    );
    let structured = json!({
        "valid": true,
        "kind": kind,
        "id": id,
        "states": model.n(),
        "goal_states": states.goal_states().len(),
        "anti_goal_states": states.anti_goal_states().len(),
        "neutral_weights": model.weights().is_neutral(),
    });
    emit(format, &text, &structured)
}

fn reach(path: &Path, from: &str, to: &[String], horizon: usize, format: Format) -> Result<()> {
    let model = load_model(path)?;
    let states = model.states();
    let start = states.resolve(from)?;
    let targets = to.iter().map(|t| states.resolve(t)).collect::<std::result::Result<Vec<_>, _>>()?;
    let p_true = reach_probability(&model, start, &targets, horizon, Kernel::True)?;
    let p_subj = reach_probability(&model, start, &targets, horizon, Kernel::Subjective)?;
    let names: Vec<&str> = targets.iter().map(|&t| states.label(t)).collect();
    let text = format!(
        "from: {}\ntargets: {}\nhorizon: {horizon}\ntrue: {p_true}\nsubjective: {p_subj}\n",
        states.label(start),
        names.join(", "),
    );
    let structured = json!({
        "from": states.label(start),
        "targets": names,
        "horizon": horizon,
        "true": p_true,
        "subjective": p_subj,
    });
    emit(format, &text, &structured)
}

fn viterbi(path: &Path, from: &str, to: &str, horizon: usize, k: KernelArg, format: Format) -> Result<()> {
    let model = load_model(path)?;
    let states = model.states();
    let (start, end) = (states.resolve(from)?, states.resolve(to)?);
    let best = viterbi_decode(&model, start, end, horizon, kernel(k))?;
    let labels: Vec<&str> = best.path.states().iter().map(|&s| states.label(s)).collect();
    let text = format!(
        "path: {}\nsteps: {}\nlog_prob: {}\nprob: {}\n",
        labels.join(" -> "),
        best.path.steps(),
        best.log_prob,
        best.log_prob.prob(),
    );
    let structured = json!({
        "kernel": match k { KernelArg::True => "true", KernelArg::Subjective => "subjective" },
        "path": labels,
        "indices": best.path.states(),
        "steps": best.path.steps(),
        "log_prob": best.log_prob.0,
        "prob": best.log_prob.prob(),
    });
    emit(format, &text, &structured)
}

fn sample(path: &Path, horizon: usize, seed: u64, count: usize, k: KernelArg) -> Result<()> {
    let model = load_model(path)?;
    let mut out = String::new();
    for i in 0..count as u64 {
        let t = sample_trajectory(&model, horizon, derive_seed(seed, i), kernel(k))?;
        let labels: Vec<&str> = t.states().iter().map(|&s| model.states().label(s)).collect();
        out.push_str(&serde_json::to_string(&labels).expect("labels serialize"));
        out.push('\n');
    }
    write_stdout(&out)
}

fn caret_at(input: &str, offset: usize) -> String {
    let width: usize = input.chars().take(offset).map(|_| 1).sum();
    format!("{}^", " ".repeat(width))
}

fn check(path: &Path, formula: &str, world: Option<&str>, format: Format) -> Result<()> {
    let doc: FrameDocument = serde_json::from_value(read_json(path)?)
        .map_err(|e| CliError::Json { path: path.display().to_string(), message: e.to_string() })?;
    let frame = doc.build().map_err(|source| CliError::Frame { path: path.display().to_string(), source })?;
    let parsed = parse_formula(formula).map_err(|error| CliError::Formula {
        caret: caret_at(formula, error.offset),
        input: formula.to_string(),
        error,
    })?;
    let vocabulary = frame.vocabulary();
    for atom in parsed.atoms() {
        if !vocabulary.contains(atom) {
            eprintln!("warning: atom {atom:?} is not declared in {}; it is false everywhere", path.display());
        }
    }
    let worlds: Vec<usize> = match world {
        Some(w) => vec![frame.world_index(w)?],
        None => (0..frame.len()).collect(),
    };
    let mut text = format!("formula: {parsed}\n");
    let mut rows = Vec::new();
    for w in worlds {
        let holds = eval_at(&frame, w, &parsed);
        let _ = writeln!(text, "{}: {holds}", frame.world_name(w));
        rows.push(json!({ "world": frame.world_name(w), "holds": holds }));
    }
    emit(format, &text, &json!({ "formula": parsed.to_string(), "worlds": rows }))
}

fn audit(path: &Path, theta: f64, format: Format) -> Result<()> {
    let problem = load_problem(path)?;
    let report = ccb_audit(&problem, theta)?;
    let mut text = String::new();
    let _ = writeln!(text, "problem: {}", report.problem_id);
    let _ = writeln!(text, "theta: {}  horizon: {}", report.theta, report.horizon);
    let _ = writeln!(
        text,
        "label  flag       class           p_goal_true  p_anti_true  p_goal_subj  relaxed  probable"
    );
    for p in &report.policies {
        let _ = writeln!(
            text,
            "{:<5}  {:<9}  {:<14}  {:>11.6}  {:>11.6}  {:>11.6}  {:<7}  {}",
            p.label,
            tag(&p.flag),
            tag(&p.profile.classification),
            p.profile.p_goal_true,
            p.profile.p_antigoal_true,
            p.profile.p_goal_subjective,
            p.verdict.relaxed_claim_holds,
            p.verdict.probable_case_holds,
        );
    }
    for p in &report.policies {
        let _ = writeln!(text, "outcomes {}: {}", p.label, p.outcomes.join(", "));
    }
    let argmax = report.subjective_argmax.map(|l| l.to_string()).unwrap_or_else(|| "none (tie)".into());
    let _ = writeln!(text, "subjective_argmax: {argmax}");
    let _ = writeln!(text, "ccb_footprint: {}", report.ccb_footprint);
    for note in &report.notes {
        let _ = writeln!(text, "note: {note}");
    }
    emit(format, &text, &serde_json::to_value(&report).expect("report serializes"))
}

fn simulate(
    path: &Path,
    n: usize,
    seed: u64,
    gamma: f64,
    neutral: bool,
    out: Option<&Path>,
    format: Format,
) -> Result<()> {
    let problem = load_problem(path)?;
    let agent = if neutral {
        AgentConfig::new(SomaticWeights::neutral(problem.model().n()), gamma, seed)?
    } else {
        AgentConfig::for_problem(&problem, gamma, seed)?
    };
    let records = run_cohort(&problem, &agent, n, seed)?;
    let lines = to_jsonl(&records);
    match out {
        None => write_stdout(&lines),
        Some(target) => {
            fs::write(target, &lines)
                .map_err(|e| CliError::Write { path: target.display().to_string(), message: e.to_string() })?;
            let summary = summarize(&records, &problem)?;
            emit(format, &summary.text_report(), &serde_json::to_value(&summary).expect("summary serializes"))
        }
    }
}

fn problem_for(records: &[ChoiceRecord], path: Option<&Path>) -> Result<Problem> {
    if let Some(p) = path {
        return load_problem(p);
    }
    let id = &records.first().ok_or(ExperimentError::EmptyCohort)?.problem_id;
    fixtures::bundled_problems()
        .into_iter()
        .find(|p| &p.id == id)
        .ok_or_else(|| CliError::Input(format!("problem {id:?} is not bundled; pass --problem")))
}

fn summarize_log(log: &Path, problem: Option<&Path>, plot_data: bool, format: Format) -> Result<()> {
    let records = read_records(log).map_err(|e| match e {
        ExperimentError::Io(message) => CliError::Read { path: log.display().to_string(), message },
        other => CliError::Input(format!("{}: {other}", log.display())),
    })?;
    let problem = problem_for(&records, problem)?;
    let summary = summarize(&records, &problem)?;
    let structured = serde_json::to_value(&summary).expect("summary serializes");
    if plot_data && format == Format::Text {
        return write_stdout(&summary.plot_data());
    }
    emit(format, &summary.text_report(), &structured)
}

fn parse_paths(text: &str, model: &WeightedMarkovModel, source: &Path) -> Result<Vec<Trajectory>> {
    let states = model.states();
    let mut paths = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| CliError::Input(format!("{}: line {}: {message}", source.display(), i + 1));
        let items: Vec<Value> = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
        let mut path = Vec::with_capacity(items.len());
        for item in items {
            let state = match &item {
                Value::String(s) => states.resolve(s).map_err(|e| bad(e.to_string()))?,
                Value::Number(n) => match n.as_u64() {
                    Some(k) if (k as usize) < model.n() => k as usize,
                    _ => return Err(bad(format!("state index {n} out of range"))),
                },
                other => return Err(bad(format!("expected a state label or index, found {other}"))),
            };
            path.push(state);
        }
        paths.push(Trajectory::new(path).map_err(|e| bad(e.to_string()))?);
    }
    Ok(paths)
}

fn fit_weights(log: &Path, model_path: &Path, max_iterations: usize, format: Format) -> Result<()> {
    let model = load_model(model_path)?;
    let paths = parse_paths(&read(log)?, &model, log)?;
    let options = EstimateOptions { max_iterations, ..EstimateOptions::default() };
    let fit = estimate_weights(&paths, &model, &options)?;
    if !fit.converged {
        eprintln!("warning: no convergence after {} iterations; reporting the best weights seen", fit.iterations);
    }
    let labels = model.states().labels();
    let mut text = String::new();
    for (label, w) in labels.iter().zip(fit.weights.as_slice()) {
        let _ = writeln!(text, "{label}\t{w}");
    }
    let _ = writeln!(text, "log_likelihood: {}", fit.log_likelihood);
    let _ = writeln!(text, "neutral_log_likelihood: {}", fit.neutral_log_likelihood);
    let _ = writeln!(text, "iterations: {}", fit.iterations);
    let _ = writeln!(text, "converged: {}", fit.converged);
    let structured = json!({
        "weights": labels.iter().zip(fit.weights.as_slice()).map(|(l, w)| json!({"state": l, "weight": w})).collect::<Vec<_>>(),
        "log_likelihood": fit.log_likelihood,
        "neutral_log_likelihood": fit.neutral_log_likelihood,
        "iterations": fit.iterations,
        "converged": fit.converged,
        "paths": paths.len(),
    });
    emit(format, &text, &structured)
}

fn serve(config: ServeConfig) -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(io::stderr)
        .init();
    let runtime = tokio::runtime::Runtime::new()
        .map_err(|e| CliError::Input(format!("cannot start runtime: {e}")))?;
    runtime.block_on(ccb_service::serve(config))?;
    Ok(())
}
