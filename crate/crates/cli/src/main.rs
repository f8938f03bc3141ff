//! `socialgen`: command-line entry point for corpus synthesis, scoring,
//! engagement analysis, model training, generation and evaluation.
//!
//! Exit codes: 0 on success, 1 on a domain error, 2 on a usage error.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use socialgen::corpus::{
    generate_synthetic_corpus_with, ingest, read_conversations, read_drivers, read_pairs,
    split_dataset, write_pairs, DatasetSplit, MessagePair, Redactor, Speaker, Utterance,
    DEFAULT_PAIR_WINDOW_S,
};
use socialgen::eval::{
    compare_models, content_table, run_enhancement_experiment, EmbeddingTable, Feature,
};
use socialgen::neural::{checkpoint, generate, Seq2SeqModel, SocialVector, TrainingLog, Variant};
use socialgen::pipeline::{
    analyze, analyze_dependent, render_tables, run_pipeline, score_table, train_variant,
    train_vocab, write_atomic, write_corpus, Dependent, RunConfig, RunManifest, CONVERSATIONS_FILE,
    DRIVERS_FILE, PAIRS_FILE, REPORT_FILE,
};
use socialgen::social_features::SocialScorer;

const OUTPUT_ROOT_ENV: &str = "SOCIALGEN_OUTPUT_ROOT";
const DEFAULT_OUTPUT_ROOT: &str = "socialgen-out";

#[derive(Parser)]
#[command(
    name = "socialgen",
    version,
    about = "Measure and generate social language in support conversations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic corpus (conversations, drivers, pairs)
    Synth(SynthArgs),
    /// Pair raw conversation and driver files into pairs.tsv
    Ingest(IngestArgs),
    /// Politeness and sentiment scores of each agent message
    Score(ScoreArgs),
    /// Random-intercept engagement regressions
    Analyze(AnalyzeArgs),
    /// Train one model variant on a driver-disjoint split
    Train(TrainArgs),
    /// Generate replies from a trained model
    Generate(GenerateArgs),
    /// Compare lexical and lexical+social models on the test split
    Evaluate(EvaluateArgs),
    /// Unenhanced vs enhanced generation experiment
    Enhance(EnhanceArgs),
    /// Assemble result tables from an output directory
    Report(ReportArgs),
    /// Run every stage end to end
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct Output {
    /// Output directory [default: ./socialgen-out]
    #[arg(short = 'o', long = "out", env = OUTPUT_ROOT_ENV)]
    out: Option<PathBuf>,
}

impl Output {
    fn dir(&self) -> Result<PathBuf> {
        let dir = self
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_ROOT));
        fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
        Ok(dir)
    }
}

/// Run configuration: a key = value file, then `--set` overrides.
#[derive(Args)]
struct ConfigArgs {
    /// Configuration file (key = value lines)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one setting, e.g. `--set max_epochs=5`; repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Global seed
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn load(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::read(p)?,
            None => RunConfig::default(),
        };
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .with_context(|| format!("--set expects KEY=VALUE, got `{kv}`"))?;
            c.set(k.trim(), v.trim()).map_err(anyhow::Error::msg)?;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        Ok(c)
    }

    fn record_inputs(&self, m: &mut RunManifest) -> Result<()> {
        if let Some(p) = &self.config {
            m.add_input(p)?;
        }
        Ok(())
    }
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Number of drivers
    #[arg(long)]
    drivers: Option<usize>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct IngestArgs {
    /// Conversation file: driver_id, speaker, ts, text (tab-separated)
    #[arg(long)]
    conversations: PathBuf,
    /// Driver file: driver_id, age, signup_ts, signup_city, first_trip_ts (tab-separated)
    #[arg(long)]
    drivers: PathBuf,
    /// Names to redact, one per line
    #[arg(long)]
    names: Option<PathBuf>,
    /// Maximum agent reply delay in seconds
    #[arg(long, default_value_t = DEFAULT_PAIR_WINDOW_S)]
    window: i64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    pairs: PathBuf,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum DependentArg {
    #[value(name = "responded_24h")]
    Responded24h,
    #[value(name = "first_trip_7d")]
    FirstTrip7d,
    /// Model 1 on both outcomes, Models 2 and 3 on driver response
    All,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    pairs: PathBuf,
    /// Outcome to regress
    #[arg(long, value_enum, default_value = "all")]
    dependent: DependentArg,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    #[value(name = "lexical")]
    Lexical,
    #[value(name = "lexical_social")]
    LexicalSocial,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Lexical => Variant::Lexical,
            VariantArg::LexicalSocial => Variant::LexicalSocial,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long, value_enum)]
    variant: VariantArg,
    #[command(flatten)]
    config: ConfigArgs,
    /// Maximum number of epochs
    #[arg(long)]
    epochs: Option<usize>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct GenerateArgs {
    /// Model checkpoint
    #[arg(long)]
    model: PathBuf,
    /// Driver message to answer
    #[arg(long, required_unless_present = "interactive")]
    prompt: Option<String>,
    /// Politeness conditioning value (lexical_social models)
    #[arg(long, allow_negative_numbers = true)]
    politeness: Option<f64>,
    /// Positivity conditioning value (lexical_social models)
    #[arg(long, allow_negative_numbers = true)]
    positivity: Option<f64>,
    /// Read prompts from stdin, one per line; a line may end with
    /// `--politeness X` and/or `--positivity Y` to override for that turn
    #[arg(long, short = 'i')]
    interactive: bool,
    #[arg(long, default_value_t = socialgen::neural::DEFAULT_MAX_LEN)]
    max_len: usize,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    lexical: PathBuf,
    #[arg(long)]
    social: PathBuf,
    /// Pairs the models were trained from; the test split is rebuilt
    #[arg(long)]
    pairs: PathBuf,
    /// Embedding file; defaults to the lexical model's embeddings
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum FeatureArg {
    Politeness,
    Positivity,
    Both,
}

#[derive(Args)]
struct EnhanceArgs {
    /// lexical_social checkpoint
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    feature: FeatureArg,
    /// Shift in test-set standard deviations
    #[arg(long, allow_negative_numbers = true)]
    delta_sd: Option<f64>,
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory holding analysis.json, eval/*.json, models/ and logs/
    #[arg(long)]
    dir: PathBuf,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Print the effective configuration and exit
    #[arg(long)]
    print_config: bool,
    #[command(flatten)]
    output: Output,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<()> {
    let start = Instant::now();
    let (name, out, mut manifest) = match command {
        Command::Synth(a) => ("synth", a.output.dir()?, synth(&a)?),
        Command::Ingest(a) => ("ingest", a.output.dir()?, ingest_cmd(&a)?),
        Command::Score(a) => ("score", a.output.dir()?, score(&a)?),
        Command::Analyze(a) => ("analyze", a.output.dir()?, analyze_cmd(&a)?),
        Command::Train(a) => ("train", a.output.dir()?, train_cmd(&a)?),
        Command::Generate(a) => return generate_cmd(&a),
        Command::Evaluate(a) => ("evaluate", a.output.dir()?, evaluate(&a)?),
        Command::Enhance(a) => ("enhance", a.output.dir()?, enhance(&a)?),
        Command::Report(a) => ("report", a.output.dir()?, report(&a)?),
        Command::Pipeline(a) => return pipeline(&a),
    };
    manifest.wall_ms = start.elapsed().as_millis();
    let path = out.join(format!("{name}.manifest.json"));
    write_atomic(&path, manifest.to_json().as_bytes())?;
    Ok(())
}

fn load_pairs(path: &Path) -> Result<Vec<MessagePair>> {
    Ok(read_pairs(path, &Redactor::default())?)
}

fn load_split(path: &Path, config: &RunConfig) -> Result<DatasetSplit> {
    let pairs = load_pairs(path)?;
    Ok(split_dataset(&pairs, config.split_ratios(), config.seed)?)
}

fn save_text(dir: &Path, relative: &str, text: &str, m: &mut RunManifest) -> Result<()> {
    write_atomic(&dir.join(relative), text.as_bytes())?;
    m.add_output(dir, relative)?;
    Ok(())
}

fn save_json<T: serde::Serialize>(
    dir: &Path,
    relative: &str,
    value: &T,
    m: &mut RunManifest,
) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    save_text(dir, relative, &s, m)
}

fn synth(a: &SynthArgs) -> Result<RunManifest> {
    let mut config = a.config.load()?;
    if let Some(d) = a.drivers {
        config.drivers = d;
    }
    let dir = a.output.dir()?;
    let mut m = RunManifest::new("synth", config.hash());
    a.config.record_inputs(&mut m)?;
    let scorer = SocialScorer::bundled()?;
    let corpus = generate_synthetic_corpus_with(&config.synthetic_spec(), &scorer)?;
    write_corpus(&dir, &corpus)?;
    for f in [CONVERSATIONS_FILE, DRIVERS_FILE, PAIRS_FILE] {
        m.add_output(&dir, f)?;
    }
    println!(
        "{} pairs from {} drivers written to {}",
        corpus.pairs.len(),
        corpus.drivers.len(),
        dir.display()
    );
    Ok(m)
}

fn ingest_cmd(a: &IngestArgs) -> Result<RunManifest> {
    let redactor = match &a.names {
        Some(p) => {
            let text =
                fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            let names: Vec<&str> = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect();
            Redactor::new(&names)
        }
        None => Redactor::default(),
    };
    let dir = a.output.dir()?;
    let mut m = RunManifest::new("ingest", format!("window={}", a.window));
    m.add_input(&a.conversations)?;
    m.add_input(&a.drivers)?;
    if let Some(p) = &a.names {
        m.add_input(p)?;
    }
    let conversations = read_conversations(&a.conversations)?;
    let drivers = read_drivers(&a.drivers)?;
    let pairs = ingest(&conversations, &drivers, &redactor, a.window)?;
    write_pairs(&dir.join(PAIRS_FILE), &pairs)?;
    m.add_output(&dir, PAIRS_FILE)?;
    println!(
        "{} pairs written to {}",
        pairs.len(),
        dir.join(PAIRS_FILE).display()
    );
    Ok(m)
}

fn score(a: &ScoreArgs) -> Result<RunManifest> {
    let pairs = load_pairs(&a.pairs)?;
    let dir = a.output.dir()?;
    let mut m = RunManifest::new("score", String::new());
    m.add_input(&a.pairs)?;
    let scorer = SocialScorer::bundled()?;
    save_text(&dir, "scores.tsv", &score_table(&pairs, &scorer), &mut m)?;
    println!("{} agent messages scored", pairs.len());
    Ok(m)
}

fn analyze_cmd(a: &AnalyzeArgs) -> Result<RunManifest> {
    let pairs = load_pairs(&a.pairs)?;
    let dir = a.output.dir()?;
    let scorer = SocialScorer::bundled()?;
    let analysis = match a.dependent {
        DependentArg::All => analyze(&pairs, &scorer)?,
        DependentArg::Responded24h => analyze_dependent(&pairs, &scorer, Dependent::Responded24h)?,
        DependentArg::FirstTrip7d => analyze_dependent(&pairs, &scorer, Dependent::FirstTrip7d)?,
    };
    let mut m = RunManifest::new("analyze", String::new());
    m.add_input(&a.pairs)?;
    let table = analysis.to_table();
    save_text(&dir, "analysis.txt", &table, &mut m)?;
    save_json(&dir, "analysis.json", &analysis, &mut m)?;
    print!("{table}");
    Ok(m)
}

fn train_cmd(a: &TrainArgs) -> Result<RunManifest> {
    let mut config = a.config.load()?;
    if let Some(e) = a.epochs {
        config.max_epochs = e;
    }
    config.validate()?;
    let variant = Variant::from(a.variant);
    let dir = a.output.dir()?;
    let mut m = RunManifest::new("train", config.hash());
    a.config.record_inputs(&mut m)?;
    m.add_input(&a.pairs)?;
    let split = load_split(&a.pairs, &config)?;
    let vocab = train_vocab(&split, config.min_count)?;
    let scorer = SocialScorer::bundled()?;
    let (model, log) = train_variant(variant, &split, &vocab, &config, &scorer)?;
    let ckpt = format!("models/{}.ckpt", variant.name());
    fs::create_dir_all(dir.join("models"))?;
    checkpoint::save(&model, &dir.join(&ckpt))?;
    m.add_output(&dir, &ckpt)?;
    write_atomic(
        &dir.join(format!("logs/train_{}.tsv", variant.name())),
        log.to_text().as_bytes(),
    )?;
    print!("{}", log.to_text());
    println!(
        "best epoch {} (val loss {:.4}); model written to {}",
        log.best_epoch,
        log.best_val_loss,
        dir.join(&ckpt).display()
    );
    Ok(m)
}

/// Politeness and positivity, each optional.
type SocialArgs = (Option<f64>, Option<f64>);

/// Splits trailing `--politeness X` / `--positivity Y` off a REPL line.
fn parse_turn(line: &str, mut social: SocialArgs) -> Result<(String, SocialArgs)> {
    let mut words: Vec<&str> = Vec::new();
    let mut it = line.split_whitespace();
    while let Some(w) = it.next() {
        let slot = match w {
            "--politeness" => &mut social.0,
            "--positivity" => &mut social.1,
            _ => {
                words.push(w);
                continue;
            }
        };
        let v = it.next().with_context(|| format!("{w} needs a value"))?;
        *slot = Some(
            v.parse()
                .with_context(|| format!("invalid {w} value `{v}`"))?,
        );
    }
    Ok((words.join(" "), social))
}

fn reply(
    model: &Seq2SeqModel,
    prompt: &str,
    social: (Option<f64>, Option<f64>),
    max_len: usize,
) -> Result<String> {
    let tokens = Utterance::new(prompt, Speaker::Driver, 0, &Redactor::default()).tokens;
    let s = match (model.variant(), social) {
        (Variant::Lexical, _) => None,
        (Variant::LexicalSocial, (Some(p), Some(q))) => Some(SocialVector::new(p, q)),
        (Variant::LexicalSocial, _) => {
            bail!("a lexical_social model needs both --politeness and --positivity")
        }
    };
    Ok(generate(model, &tokens, s, max_len)?.join(" "))
}

fn generate_cmd(a: &GenerateArgs) -> Result<()> {
    let model = checkpoint::load(&a.model)?;
    let social = (a.politeness, a.positivity);
    if let Some(p) = &a.prompt {
        println!("{}", reply(&model, p, social, a.max_len)?);
    }
    if !a.interactive {
        return Ok(());
    }
    let stdin = io::stdin();
    let mut stdout = io::stdout();
    loop {
        eprint!("> ");
        let mut line = String::new();
        if stdin.lock().read_line(&mut line)? == 0 {
            break;
        }
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == "quit" || line == "exit" {
            break;
        }
        match parse_turn(line, social).and_then(|(prompt, s)| reply(&model, &prompt, s, a.max_len))
        {
            Ok(r) => writeln!(stdout, "{r}")?,
            Err(e) => eprintln!("error: {e:#}"),
        }
        stdout.flush()?;
    }
    Ok(())
}

fn evaluate(a: &EvaluateArgs) -> Result<RunManifest> {
    let config = a.config.load()?;
    let dir = a.output.dir()?;
    let mut m = RunManifest::new("evaluate", config.hash());
    a.config.record_inputs(&mut m)?;
    for p in [&a.lexical, &a.social, &a.pairs] {
        m.add_input(p)?;
    }
    let lexical = checkpoint::load(&a.lexical)?;
    let social = checkpoint::load(&a.social)?;
    let split = load_split(&a.pairs, &config)?;
    if social.split_fingerprint.as_deref() != Some(split.fingerprint().as_str()) {
        bail!(
            "the models were not trained on this split of {}; use the same seed and ratios",
            a.pairs.display()
        );
    }
    let table = match &a.embeddings {
        Some(p) => {
            m.add_input(p)?;
            EmbeddingTable::read(p)?
        }
        None => EmbeddingTable::from_model(&lexical),
    };
    let scorer = SocialScorer::bundled()?;
    let c = compare_models(
        &lexical,
        &social,
        &split.test,
        &table,
        &scorer,
        &config.compare_config(),
    )?;
    save_json(&dir, "eval/content.json", &c, &mut m)?;
    print!("{}", content_table(&c));
    Ok(m)
}

fn enhance(a: &EnhanceArgs) -> Result<RunManifest> {
    let mut config = a.config.load()?;
    if let Some(d) = a.delta_sd {
        config.delta_sd = d;
    }
    let dir = a.output.dir()?;
    let mut m = RunManifest::new("enhance", config.hash());
    a.config.record_inputs(&mut m)?;
    m.add_input(&a.model)?;
    m.add_input(&a.pairs)?;
    let model = checkpoint::load(&a.model)?;
    let split = load_split(&a.pairs, &config)?;
    let scorer = SocialScorer::bundled()?;
    let features: &[Feature] = match a.feature {
        FeatureArg::Politeness => &[Feature::Politeness],
        FeatureArg::Positivity => &[Feature::Positivity],
        FeatureArg::Both => &Feature::ALL,
    };
    let mut results = Vec::new();
    for &f in features {
        let r = run_enhancement_experiment(
            &model,
            &split.test,
            f,
            &scorer,
            &scorer,
            &config.enhancement_config(),
        )?;
        save_json(&dir, &format!("eval/enhance_{}.json", f.name()), &r, &mut m)?;
        results.push(r);
    }
    print!("{}", socialgen::eval::enhancement_table(&results));
    Ok(m)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Option<T>> {
    if !path.is_file() {
        return Ok(None);
    }
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(Some(serde_json::from_str(&text).with_context(|| {
        format!("cannot parse {}", path.display())
    })?))
}

fn report(a: &ReportArgs) -> Result<RunManifest> {
    let src = &a.dir;
    if !src.is_dir() {
        bail!("{} is not a directory", src.display());
    }
    let analysis = read_json(&src.join("analysis.json"))?;
    let comparison = read_json(&src.join("eval/content.json"))?;
    let mut enhancements = Vec::new();
    for f in Feature::ALL {
        if let Some(r) = read_json(&src.join(format!("eval/enhance_{}.json", f.name())))? {
            enhancements.push(r);
        }
    }
    let mut trained = Vec::new();
    for v in [Variant::Lexical, Variant::LexicalSocial] {
        let ckpt = src.join(format!("models/{}.ckpt", v.name()));
        let log = src.join(format!("logs/train_{}.tsv", v.name()));
        if ckpt.is_file() && log.is_file() {
            let text = fs::read_to_string(&log)?;
            trained.push((
                checkpoint::load(&ckpt)?,
                TrainingLog::parse(&text, &log.display().to_string())?,
            ));
        }
    }
    let training: Vec<(&Seq2SeqModel, &TrainingLog)> =
        trained.iter().map(|(m, l)| (m, l)).collect();
    if analysis.is_none() && comparison.is_none() && enhancements.is_empty() && training.is_empty()
    {
        bail!("no results found under {}", src.display());
    }
    let text = render_tables(
        analysis.as_ref(),
        comparison.as_ref(),
        &enhancements,
        &training,
    );
    let dir = a.output.dir()?;
    let mut m = RunManifest::new("report", String::new());
    save_text(&dir, REPORT_FILE, &text, &mut m)?;
    print!("{text}");
    Ok(m)
}

fn pipeline(a: &PipelineArgs) -> Result<()> {
    let mut config = a.config.load()?;
    if a.print_config {
        print!("{}", config.to_text());
        return Ok(());
    }
    config.output_dir = a.output.dir()?;
    let manifest = run_pipeline(&config)?;
    print!(
        "{}",
        fs::read_to_string(config.output_dir.join(REPORT_FILE))?
    );
    eprintln!(
        "pipeline finished in {:.1} s; artifacts in {}",
        manifest.wall_ms as f64 / 1000.0,
        config.output_dir.display()
    );
    Ok(())
}
