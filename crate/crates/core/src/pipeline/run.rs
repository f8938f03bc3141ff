use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::corpus::{
    generate_synthetic_corpus_with, split_dataset, write_conversations, write_drivers, write_pairs,
    DatasetSplit, MessagePair, SyntheticCorpus,
};
use crate::eval::{
    align, compare_models, content_table, enhancement_table, run_enhancement_experiment,
    EmbeddingTable, EnhancementResult, Feature, ModelComparison,
};
use crate::neural::{build_vocab, checkpoint, train, Seq2SeqModel, TrainingLog, Variant, Vocab};
use crate::social_features::SocialScorer;
use crate::{Error, Result};

use super::analysis::{analyze, Analysis};
use super::config::RunConfig;
use super::manifest::{write_atomic, write_failed_marker, RunManifest, FAILED_MARKER};

pub const CONVERSATIONS_FILE: &str = "conversations.tsv";
pub const DRIVERS_FILE: &str = "drivers.tsv";
pub const PAIRS_FILE: &str = "pairs.tsv";
pub const REPORT_FILE: &str = "report.txt";

/// Stage names in execution order.
pub const STAGES: [&str; 9] = [
    "synth",
    "score",
    "analyze",
    "train_lexical",
    "train_lexical_social",
    "evaluate",
    "enhance_politeness",
    "enhance_positivity",
    "report",
];

/// Writes the three corpus files into `dir`.
pub fn write_corpus(dir: &Path, corpus: &SyntheticCorpus) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_conversations(&dir.join(CONVERSATIONS_FILE), &corpus.conversations)?;
    write_drivers(&dir.join(DRIVERS_FILE), &corpus.drivers)?;
    write_pairs(&dir.join(PAIRS_FILE), &corpus.pairs)
}

/// Per-pair social scores of the agent message as TSV.
pub fn score_table(pairs: &[MessagePair], scorer: &SocialScorer) -> String {
    let mut out = String::from("driver_id\tagent_ts\tpoliteness\tpositivity\tpos\tneg\tneu\n");
    for p in pairs {
        let s = scorer.sentiment(&p.agent_msg);
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            p.driver_id,
            p.agent_msg.timestamp,
            scorer.politeness_score(&p.agent_msg),
            scorer.positivity_score(&p.agent_msg),
            s.pos,
            s.neg,
            s.neu
        );
    }
    out
}

/// Vocabulary of the train split, both sides.
pub fn train_vocab(split: &DatasetSplit, min_count: usize) -> Result<Vocab> {
    build_vocab(
        split.train.iter().flat_map(|p| {
            [
                p.driver_msg.tokens.as_slice(),
                p.agent_msg.tokens.as_slice(),
            ]
        }),
        min_count,
    )
}

/// A freshly initialized model of `variant` trained on `split`.
pub fn train_variant(
    variant: Variant,
    split: &DatasetSplit,
    vocab: &Vocab,
    config: &RunConfig,
    scorer: &SocialScorer,
) -> Result<(Seq2SeqModel, TrainingLog)> {
    let model = Seq2SeqModel::new(config.model_config(variant), vocab.clone(), config.seed);
    train(model, split, &config.train_config(), Some(scorer))
}

/// Variant, size and early-stopping outcome of each trained model.
pub fn training_table(runs: &[(&Seq2SeqModel, &TrainingLog)]) -> String {
    let mut rows = vec![vec![
        "Variant".to_owned(),
        "Parameters".into(),
        "Epochs".into(),
        "Best epoch".into(),
        "Best val loss".into(),
        "Val perplexity".into(),
    ]];
    for (model, log) in runs {
        rows.push(vec![
            model.variant().name().into(),
            model.params.count().to_string(),
            log.epochs.len().to_string(),
            log.best_epoch.to_string(),
            format!("{:.4}", log.best_val_loss),
            format!("{:.3}", log.best_val_loss.exp()),
        ]);
    }
    align(&rows)
}

/// The four result tables; a missing input leaves its table as
/// "not available".
pub fn render_tables(
    analysis: Option<&Analysis>,
    comparison: Option<&ModelComparison>,
    enhancements: &[EnhancementResult],
    training: &[(&Seq2SeqModel, &TrainingLog)],
) -> String {
    const MISSING: &str = "(not available)\n";
    let mut out = String::from("Table 1. Engagement regression, random intercept per driver\n");
    out.push_str(&analysis.map_or(MISSING.into(), Analysis::to_table));
    out.push_str("\nTable 2. Content preservation on the test split\n");
    out.push_str(&comparison.map_or(MISSING.into(), content_table));
    out.push_str("\nTable 3. Social language enhancement");
    match enhancements.first() {
        Some(r) if r.feature_sd > 0.0 => {
            let _ = writeln!(
                out,
                ", feature raised by {:.2} test-set SD",
                r.delta / r.feature_sd
            );
        }
        _ => out.push('\n'),
    }
    out.push_str(&if enhancements.is_empty() {
        MISSING.into()
    } else {
        enhancement_table(enhancements)
    });
    out.push_str("\nTable 4. Training summary\n");
    out.push_str(&if training.is_empty() {
        MISSING.into()
    } else {
        training_table(training)
    });
    out
}

/// Run header followed by [`render_tables`].
pub fn render_report(
    config: &RunConfig,
    split: &DatasetSplit,
    analysis: &Analysis,
    comparison: &ModelComparison,
    enhancements: &[EnhancementResult],
    lexical: (&Seq2SeqModel, &TrainingLog),
    social: (&Seq2SeqModel, &TrainingLog),
) -> String {
    let mut out = String::from("Social language run report\n");
    let _ = writeln!(out, "Config hash: {}", config.hash());
    let _ = writeln!(out, "Seed: {}", config.seed);
    let _ = writeln!(
        out,
        "Split: {} train / {} validation / {} test pairs (fingerprint {})",
        split.train.len(),
        split.validation.len(),
        split.test.len(),
        &split.fingerprint()[..16]
    );
    let _ = writeln!(out, "Vocabulary: {} types\n", lexical.0.vocab.len());
    out.push_str(&render_tables(
        Some(analysis),
        Some(comparison),
        enhancements,
        &[lexical, social],
    ));
    out
}

/// Everything a pipeline run produced, in memory.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub manifest: RunManifest,
    pub split: DatasetSplit,
    pub analysis: Analysis,
    pub lexical: Seq2SeqModel,
    pub lexical_log: TrainingLog,
    pub social: Seq2SeqModel,
    pub social_log: TrainingLog,
    pub comparison: ModelComparison,
    pub enhancements: Vec<EnhancementResult>,
    pub report: String,
}

/// Runs every stage and returns the manifest.
pub fn run_pipeline(config: &RunConfig) -> Result<RunManifest> {
    run_pipeline_detailed(config).map(|r| r.manifest)
}

struct Outputs<'a> {
    root: &'a Path,
    files: Vec<String>,
}

impl Outputs<'_> {
    fn text(&mut self, relative: &str, text: &str) -> Result<()> {
        write_atomic(&self.root.join(relative), text.as_bytes())?;
        self.files.push(relative.to_owned());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, relative: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)
            .map_err(|e| Error::InvalidInput(format!("cannot serialize {relative}: {e}")))?;
        s.push('\n');
        self.text(relative, &s)
    }

    fn existing(&mut self, relative: &str) {
        self.files.push(relative.to_owned());
    }
}

fn stage<T>(root: &Path, name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    f().map_err(|e| {
        let _ = write_failed_marker(root, name, &e);
        Error::Stage {
            stage: name.to_owned(),
            source: Box::new(e),
        }
    })
}

/// [`run_pipeline`], keeping the intermediate results.
///
/// Artifacts under `config.output_dir`: `config.txt`, `corpus/`,
/// `split.tsv`, `scores.tsv`, `analysis.txt`/`.json`, `models/*.ckpt`,
/// `logs/train_*.tsv`, `embeddings.txt`, `eval/*.json`, `report.txt` and
/// `manifest.json`. A failing stage leaves a `FAILED` file naming it.
pub fn run_pipeline_detailed(config: &RunConfig) -> Result<PipelineRun> {
    let start = Instant::now();
    let root = config.output_dir.as_path();
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    let stale = root.join(FAILED_MARKER);
    if stale.exists() {
        fs::remove_file(&stale).map_err(|e| Error::io(&stale, e))?;
    }
    let mut manifest = RunManifest::new("pipeline", config.hash());
    let mut out = Outputs {
        root,
        files: Vec::new(),
    };
    stage(root, "config", || {
        config.validate()?;
        // Names the output directory, so it is covered by the config hash
        // rather than fingerprinted.
        write_atomic(&root.join("config.txt"), config.to_text().as_bytes())
    })?;

    let scorer = stage(root, STAGES[0], SocialScorer::bundled)?;
    let (pairs, split) = stage(root, STAGES[0], || {
        let corpus = generate_synthetic_corpus_with(&config.synthetic_spec(), &scorer)?;
        write_corpus(&root.join("corpus"), &corpus)?;
        for f in [CONVERSATIONS_FILE, DRIVERS_FILE, PAIRS_FILE] {
            out.existing(&format!("corpus/{f}"));
        }
        let split = split_dataset(&corpus.pairs, config.split_ratios(), config.seed)?;
        let mut assignment = format!("# fingerprint {}\ndriver_id\tpart\n", split.fingerprint());
        for (name, part) in ["train", "validation", "test"].iter().zip(split.parts()) {
            let mut last = None;
            for p in part {
                if last != Some(&p.driver_id) {
                    let _ = writeln!(assignment, "{}\t{name}", p.driver_id);
                    last = Some(&p.driver_id);
                }
            }
        }
        out.text("split.tsv", &assignment)?;
        Ok((corpus.pairs, split))
    })?;

    stage(root, STAGES[1], || {
        out.text("scores.tsv", &score_table(&pairs, &scorer))
    })?;

    let analysis = stage(root, STAGES[2], || {
        let analysis = analyze(&pairs, &scorer)?;
        out.text("analysis.txt", &analysis.to_table())?;
        out.json("analysis.json", &analysis)?;
        Ok(analysis)
    })?;

    let vocab = stage(root, STAGES[3], || train_vocab(&split, config.min_count))?;
    let mut trained = Vec::new();
    for (variant, name) in [
        (Variant::Lexical, STAGES[3]),
        (Variant::LexicalSocial, STAGES[4]),
    ] {
        trained.push(stage(root, name, || {
            let (model, log) = train_variant(variant, &split, &vocab, config, &scorer)?;
            let models = root.join("models");
            fs::create_dir_all(&models).map_err(|e| Error::io(&models, e))?;
            let ckpt = format!("models/{}.ckpt", variant.name());
            checkpoint::save(&model, &root.join(&ckpt))?;
            out.existing(&ckpt);
            // Timing logs stay out of the manifest's output list.
            write_atomic(
                &root.join(format!("logs/train_{}.tsv", variant.name())),
                log.to_text().as_bytes(),
            )?;
            Ok((model, log))
        })?);
    }
    let (social, social_log) = trained.pop().expect("two models");
    let (lexical, lexical_log) = trained.pop().expect("two models");

    let comparison = stage(root, STAGES[5], || {
        let table = match &config.embeddings {
            Some(path) => {
                manifest.add_input(path)?;
                EmbeddingTable::read(path)?
            }
            None => EmbeddingTable::from_model(&lexical),
        };
        out.text("embeddings.txt", &table.to_text())?;
        let c = compare_models(
            &lexical,
            &social,
            &split.test,
            &table,
            &scorer,
            &config.compare_config(),
        )?;
        out.json("eval/content.json", &c)?;
        Ok(c)
    })?;

    let mut enhancements = Vec::new();
    for (feature, name) in [
        (Feature::Politeness, STAGES[6]),
        (Feature::Positivity, STAGES[7]),
    ] {
        enhancements.push(stage(root, name, || {
            let r = run_enhancement_experiment(
                &social,
                &split.test,
                feature,
                &scorer,
                &scorer,
                &config.enhancement_config(),
            )?;
            out.json(&format!("eval/enhance_{}.json", feature.name()), &r)?;
            Ok(r)
        })?);
    }

    let report = stage(root, STAGES[8], || {
        let report = render_report(
            config,
            &split,
            &analysis,
            &comparison,
            &enhancements,
            (&lexical, &lexical_log),
            (&social, &social_log),
        );
        out.text(REPORT_FILE, &report)?;
        for f in &out.files {
            manifest.add_output(root, f)?;
        }
        manifest.wall_ms = start.elapsed().as_millis();
        manifest.write(root)?;
        Ok(report)
    })?;

    Ok(PipelineRun {
        manifest,
        split,
        analysis,
        lexical,
        lexical_log,
        social,
        social_log,
        comparison,
        enhancements,
        report,
    })
}
