//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! fails. Runs without the libtest harness so the lines always print.
//!
//! `cargo test --test acceptance -- 5 9` runs only criteria 5 and 9.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use socialgen::corpus::{
    generate_synthetic_corpus_with, OutcomeModel, Redactor, Speaker, SyntheticSpec, Utterance,
};
use socialgen::eval::{bleu, BleuConfig, Feature};
use socialgen::neural::{
    build_vocab, generate, gradient_check, perplexity, train_examples, Example, ModelConfig,
    Precision, Seq2SeqModel, SocialVector, TrainConfig, Variant, DEFAULT_EPSILON, DEFAULT_MAX_LEN,
};
use socialgen::pipeline::{
    engagement_table, run_pipeline_detailed, RunConfig, COVARIATES, POLITENESS, POSITIVITY,
};
use socialgen::social_features::{
    bundled_fixture, labeled_utterances, score_politeness, score_text, train_politeness,
    SentimentLexicon, SocialScorer, DEFAULT_POLITENESS_REG,
};
use socialgen::stats::{
    chi_square_gof, fit_random_intercept, fit_random_intercept_with, multi_rater_kappa,
    paired_t_test, FeatureTable, RandomInterceptOptions, INTERCEPT,
};

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---------------------------------------------------------------- 1

fn gradient_fixture(variant: Variant) -> (Seq2SeqModel, Vec<Example>) {
    let words: Vec<String> = (0..16).map(|i| format!("tok{i}")).collect();
    let vocab = build_vocab([words.as_slice()], 1).unwrap();
    assert_eq!(vocab.len(), 20);
    let config = ModelConfig {
        variant,
        d_emb: 8,
        d_h: 8,
        precision: Precision::F64,
    };
    let model = Seq2SeqModel::new(config, vocab, 5);
    let w = |ids: &[usize]| ids.iter().map(|&i| words[i].clone()).collect::<Vec<_>>();
    let examples = vec![
        Example::new(
            &model.vocab,
            &w(&[1, 2, 3, 4]),
            &w(&[5, 6]),
            SocialVector::new(0.9, 0.3),
        ),
        Example::new(
            &model.vocab,
            &w(&[7]),
            &w(&[8, 9, 10, 11, 12]),
            SocialVector::new(0.1, 0.7),
        ),
        Example::new(
            &model.vocab,
            &w(&[13, 14, 15, 0, 2]),
            &w(&[3]),
            SocialVector::new(-0.4, 1.2),
        ),
    ];
    (model, examples)
}

fn criterion_1() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for variant in [Variant::Lexical, Variant::LexicalSocial] {
        let (model, examples) = gradient_fixture(variant);
        let r = gradient_check(&model, &examples, DEFAULT_EPSILON).map_err(|e| e.to_string())?;
        let has_fusion = r.per_tensor.iter().any(|(n, _)| n.starts_with("fusion"));
        ok &= r.max_relative_error < 1e-4 && (variant == Variant::Lexical || has_fusion);
        details.push(format!(
            "{} max rel err {:.2e} over {} params{}",
            variant.name(),
            r.max_relative_error,
            r.n_checked,
            if has_fusion { " incl. fusion" } else { "" }
        ));
    }
    check(ok, details.join("; "))
}

// ---------------------------------------------------------------- 2

const TOY: [(&str, &str); 32] = [
    (
        "how do i upload my license",
        "open the app and tap documents",
    ),
    (
        "my license photo was rejected",
        "please send a clearer photo of your license",
    ),
    ("is my background check done", "it is still in review"),
    (
        "how long is the background check",
        "most checks finish within five days",
    ),
    (
        "where do i get an inspection",
        "visit the hub downtown for an inspection",
    ),
    (
        "does my car need an inspection",
        "yes every car needs one inspection",
    ),
    (
        "when can i start driving",
        "you can start once all documents are approved",
    ),
    ("how do i go online", "tap go online on the home screen"),
    ("the app keeps crashing", "sorry , please reinstall the app"),
    (
        "i forgot my password",
        "use the reset link on the login page",
    ),
    (
        "can i drive a friend's car",
        "only if the car is added to your account",
    ),
    (
        "what cars are allowed",
        "cars from the last ten years are allowed",
    ),
    (
        "is insurance required",
        "yes proof of insurance is required",
    ),
    (
        "how do i add insurance",
        "upload the insurance card under documents",
    ),
    (
        "my registration expired",
        "please upload your new registration",
    ),
    ("where is the hub", "the hub is on main street"),
    ("what are the hub hours", "the hub is open nine to five"),
    ("how much can i earn", "earnings depend on time and city"),
    ("when do i get paid", "payments arrive every week on monday"),
    (
        "can i change my city",
        "write to us and we will move your account",
    ),
    ("i got my first trip", "congrats ! good luck out there"),
    ("thanks for the help", "you are welcome , have a great day"),
    ("hello", "hi , how can i help you today"),
    ("who are you", "i am your account specialist"),
    ("i need a phone mount", "any store sells a phone mount"),
    ("can i use a tablet", "a phone is needed to drive"),
    ("my email changed", "update your email in settings"),
    (
        "my phone number changed",
        "update your number in settings too",
    ),
    (
        "is there a referral bonus",
        "invite a friend to earn a bonus",
    ),
    ("how do i cancel", "we are sorry to see you go"),
    (
        "what is the minimum age",
        "drivers must be at least twenty one",
    ),
    ("do i need a special license", "a regular license is enough"),
];

fn criterion_2() -> Outcome {
    let r = Redactor::default();
    let tok = |s: &str| Utterance::new(s, Speaker::Driver, 0, &r).tokens;
    let pairs: Vec<(Vec<String>, Vec<String>)> =
        TOY.iter().map(|(d, a)| (tok(d), tok(a))).collect();
    let vocab = build_vocab(
        pairs.iter().flat_map(|(d, a)| [d.as_slice(), a.as_slice()]),
        1,
    )
    .unwrap();
    let mut model = Seq2SeqModel::new(ModelConfig::desk(Variant::Lexical), vocab, 1);
    let examples: Vec<Example> = pairs
        .iter()
        .map(|(d, a)| Example::new(&model.vocab, d, a, SocialVector::default()))
        .collect();
    let chunk = 100;
    let mut epochs = 0;
    let (mut ppl, mut verbatim);
    loop {
        let config = TrainConfig {
            learning_rate: 0.5,
            batch_size: 1,
            max_epochs: chunk,
            patience: chunk,
            clip_norm: 5.0,
            seed: epochs as u64 + 1,
        };
        model = train_examples(model, &examples, &examples, &config)
            .map_err(|e| e.to_string())?
            .0;
        epochs += chunk;
        ppl = perplexity(&model, &examples).map_err(|e| e.to_string())?;
        verbatim = 0;
        for (d, a) in &pairs {
            if &generate(&model, d, None, DEFAULT_MAX_LEN).map_err(|e| e.to_string())? == a {
                verbatim += 1;
            }
        }
        if (ppl < 1.1 && verbatim >= 30) || epochs >= 2000 {
            break;
        }
    }
    check(
        ppl < 1.1 && verbatim >= 30,
        format!("train perplexity {ppl:.4}, {verbatim}/32 verbatim after {epochs} epochs"),
    )
}

// ---------------------------------------------------------------- 3, 4, 10

struct PipelineChecks {
    enhancement: Outcome,
    content: Outcome,
    determinism: Outcome,
}

fn pipeline_criteria() -> PipelineChecks {
    let run_in = |dir: &std::path::Path| {
        let config = RunConfig {
            output_dir: dir.to_path_buf(),
            ..RunConfig::default()
        };
        run_pipeline_detailed(&config).map_err(|e| e.to_string())
    };
    let a_dir = tempfile::tempdir().unwrap();
    let b_dir = tempfile::tempdir().unwrap();
    let first = match run_in(a_dir.path()) {
        Ok(r) => r,
        Err(e) => {
            return PipelineChecks {
                enhancement: Err(e.clone()),
                content: Err(e.clone()),
                determinism: Err(e),
            }
        }
    };

    let mut ok = first.split.train.len() >= 2000;
    let mut details = vec![format!("{} training pairs", first.split.train.len())];
    for r in &first.enhancements {
        ok &= r.mean_enhanced > r.mean_unenhanced && r.t_test.p_value < 0.01;
        details.push(format!(
            "{} {:.3} -> {:.3} (paired t {:.2}, p {:.1e})",
            r.feature.name(),
            r.mean_unenhanced,
            r.mean_enhanced,
            r.t_test.statistic,
            r.t_test.p_value
        ));
    }
    let features: Vec<Feature> = first.enhancements.iter().map(|r| r.feature).collect();
    ok &= features == Feature::ALL;
    let enhancement = check(ok, details.join("; "));

    let c = &first.comparison;
    // Empty outputs score BLEU 0 and have no defined similarity.
    let bleu_ok =
        c.bleu_social > c.bleu_lexical || (c.bleu_social == c.bleu_lexical && c.bleu_lexical > 0.0);
    let sim_ok = c.similarity_social > c.similarity_lexical
        || (c.similarity_social == c.similarity_lexical && c.similarity_n > 0);
    let content = check(
        bleu_ok && sim_ok,
        format!(
            "BLEU {:.2} vs {:.2}; similarity {:.4} vs {:.4} on {} test pairs",
            c.bleu_social, c.bleu_lexical, c.similarity_social, c.similarity_lexical, c.n
        ),
    );

    let determinism = match run_in(b_dir.path()) {
        Ok(second) => {
            let file_a = std::fs::read(a_dir.path().join("report.txt")).unwrap();
            let file_b = std::fs::read(b_dir.path().join("report.txt")).unwrap();
            check(
                file_a == file_b
                    && second.report == first.report
                    && second.manifest.same_results(&first.manifest),
                format!(
                    "report {} bytes, identical: {}; manifests agree on {} outputs",
                    file_a.len(),
                    file_a == file_b,
                    first.manifest.outputs.len()
                ),
            )
        }
        Err(e) => Err(e),
    };
    PipelineChecks {
        enhancement,
        content,
        determinism,
    }
}

// ---------------------------------------------------------------- 5

/// Counts by linear scan over joined n-grams; no maps.
fn oracle_bleu(cands: &[Vec<String>], refs: &[Vec<String>]) -> f64 {
    let grams = |s: &[String], n: usize| -> Vec<String> {
        if s.len() < n {
            return Vec::new();
        }
        (0..=s.len() - n)
            .map(|i| s[i..i + n].join("\u{1}"))
            .collect()
    };
    let mut matches = [0u64; 4];
    let mut totals = [0u64; 4];
    let (mut c, mut r) = (0u64, 0u64);
    for (cand, reference) in cands.iter().zip(refs) {
        c += cand.len() as u64;
        r += reference.len() as u64;
        for n in 1..=4 {
            let cg = grams(cand, n);
            let rg = grams(reference, n);
            let mut seen: Vec<&String> = Vec::new();
            for g in &cg {
                if seen.contains(&g) {
                    continue;
                }
                seen.push(g);
                let in_cand = cg.iter().filter(|x| *x == g).count() as u64;
                let in_ref = rg.iter().filter(|x| *x == g).count() as u64;
                totals[n - 1] += in_cand;
                matches[n - 1] += in_cand.min(in_ref);
            }
        }
    }
    if c == 0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    let mut orders = 0;
    for n in 0..4 {
        if totals[n] == 0 {
            continue;
        }
        if matches[n] == 0 {
            return 0.0;
        }
        log_sum += (matches[n] as f64 / totals[n] as f64).ln();
        orders += 1;
    }
    let bp = if c >= r {
        1.0
    } else {
        (1.0 - r as f64 / c as f64).exp()
    };
    100.0 * bp * (log_sum / orders as f64).exp()
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let alphabet = ["a", "b", "c", "d", "e"];
    let mut nonzero = 0;
    for case in 0..50 {
        let n_pairs = rng.gen_range(1..=5);
        let sentence = |rng: &mut ChaCha8Rng| -> Vec<String> {
            let len = rng.gen_range(1..=10);
            (0..len)
                .map(|_| alphabet.choose(rng).unwrap().to_string())
                .collect()
        };
        let refs: Vec<Vec<String>> = (0..n_pairs).map(|_| sentence(&mut rng)).collect();
        // Mostly edited copies of the reference, so higher orders get matches.
        let cands: Vec<Vec<String>> = refs
            .iter()
            .map(|r| {
                if rng.gen_bool(0.2) {
                    return sentence(&mut rng);
                }
                let mut c = r.clone();
                for _ in 0..rng.gen_range(0..3) {
                    let i = rng.gen_range(0..=c.len());
                    match rng.gen_range(0..3) {
                        0 if i < c.len() => c[i] = alphabet.choose(&mut rng).unwrap().to_string(),
                        1 if i < c.len() && c.len() > 1 => {
                            c.remove(i);
                        }
                        _ => c.insert(i, alphabet.choose(&mut rng).unwrap().to_string()),
                    }
                }
                c
            })
            .collect();
        let got = bleu(&cands, &refs, &BleuConfig::default()).map_err(|e| e.to_string())?;
        let want = oracle_bleu(&cands, &refs);
        if got != want {
            return Err(format!(
                "case {case}: implementation {got} vs oracle {want}"
            ));
        }
        if want > 0.0 {
            nonzero += 1;
        }
    }
    Ok(format!(
        "50/50 corpora identical ({nonzero} with non-zero BLEU)"
    ))
}

// ---------------------------------------------------------------- 6

fn criterion_6() -> Outcome {
    let lex = SentimentLexicon::full();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let words = [
        "good",
        "great",
        "bad",
        "terrible",
        "not",
        "never",
        "very",
        "extremely",
        "slightly",
        "but",
        "love",
        "hate",
        "okay",
        "the",
        "car",
        "GOOD",
        "BAD",
        "!",
        "!!!",
        "?",
        ",",
        "don't",
        "forget",
        "kind",
        "of",
        "xyzzy",
        ":)",
        "NICE",
        "sorry",
        "happy",
        "no",
    ];
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let len = rng.gen_range(0..15);
        let mut parts: Vec<String> = (0..len)
            .map(|_| words.choose(&mut rng).unwrap().to_string())
            .collect();
        if rng.gen_bool(0.2) {
            let junk: String = (0..rng.gen_range(1..12))
                .map(|_| rng.gen_range(' '..='~'))
                .collect();
            parts.push(junk);
        }
        let s = score_text(&lex, &parts.join(" "));
        let sum = s.pos + s.neg + s.neu;
        if !(s.pos >= 0.0 && s.neg >= 0.0 && s.neu >= 0.0) {
            return Err(format!(
                "negative proportion for {:?}: {s:?}",
                parts.join(" ")
            ));
        }
        worst = worst.max((sum - 1.0).abs());
    }
    let example = "Nice!  The 2 links I sent you will be your best friends. Good luck! Let me know how it goes for you.";
    let u = Utterance::new(example, Speaker::Agent, 0, &Redactor::default());
    let s = socialgen::social_features::score_sentiment(&lex, &u);
    let ok = worst <= 1e-9
        && (s.pos - 0.49).abs() <= 0.05
        && s.neg == 0.0
        && (s.neu - 0.51).abs() <= 0.05;
    check(
        ok,
        format!(
            "max |sum - 1| {worst:.1e} over 10000 inputs; example pos {:.3} neg {:.3} neu {:.3}",
            s.pos, s.neg, s.neu
        ),
    )
}

// ---------------------------------------------------------------- 7

fn criterion_7() -> Outcome {
    let data = labeled_utterances(&bundled_fixture(), &Redactor::default());
    let model = train_politeness(&data, DEFAULT_POLITENESS_REG, 0).map_err(|e| e.to_string())?;
    let score = |t: &str| {
        score_politeness(
            &model,
            &Utterance::new(t, Speaker::Agent, 0, &Redactor::default()),
        )
    };
    let high = score(
        "Hello, my name is <NAME> your Account Specialist. Good news! It looks like your background check has \
         passed!  The final step to earning with us is uploading your registration. Could you please text me a \
         clear photo of your registration so I can upload it to your account?",
    );
    let mid = score(
        "Hello <NAME>, are you still interested in partnering with us? You're so close to hitting the road and \
         making some money while driving.",
    );
    let low = score("Please download the Partner app to confirm your account: <URL>");
    check(
        high > mid && mid > low,
        format!("scores {high:.3} > {mid:.3} > {low:.3}"),
    )
}

// ---------------------------------------------------------------- 8

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// OLS coefficients and standard errors from the normal equations.
fn ols(x: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (n, p) = (y.len(), x[0].len());
    let xtx: Vec<Vec<f64>> = (0..p)
        .map(|i| {
            (0..p)
                .map(|j| (0..n).map(|r| x[r][i] * x[r][j]).sum())
                .collect()
        })
        .collect();
    let xty: Vec<f64> = (0..p)
        .map(|i| (0..n).map(|r| x[r][i] * y[r]).sum())
        .collect();
    let beta = solve(xtx.clone(), xty);
    let rss: f64 = (0..n)
        .map(|r| (y[r] - (0..p).map(|j| x[r][j] * beta[j]).sum::<f64>()).powi(2))
        .sum();
    let sigma2 = rss / (n - p) as f64;
    let se = (0..p)
        .map(|j| {
            let mut e = vec![0.0; p];
            e[j] = 1.0;
            (sigma2 * solve(xtx.clone(), e)[j]).sqrt()
        })
        .collect();
    (beta, se)
}

fn criterion_8() -> Outcome {
    let scorer = SocialScorer::bundled().map_err(|e| e.to_string())?;
    let corpus = generate_synthetic_corpus_with(&SyntheticSpec::default(), &scorer)
        .map_err(|e| e.to_string())?;
    let table = engagement_table(&corpus.pairs, &scorer).map_err(|e| e.to_string())?;
    let covariates: Vec<&str> = table
        .column_names()
        .filter(|n| !n.ends_with("_24h") && !n.ends_with("_7d"))
        .collect();
    let fit =
        fit_random_intercept(&table, "responded_24h", &covariates).map_err(|e| e.to_string())?;
    let truth = OutcomeModel::responsiveness();
    let planted = [
        truth.driver_age,
        truth.days_since_signup,
        truth.num_driver_msgs,
        truth.msg_length,
        truth.politeness,
        truth.positivity,
    ];
    let mut ok = true;
    let mut details = Vec::new();
    for (name, beta) in COVARIATES.iter().zip(planted) {
        let t = fit.term(name).ok_or(format!("no term {name}"))?;
        let within = (t.coefficient - beta).abs() <= 2.0 * t.std_error;
        let signed = t.coefficient.signum() == beta.signum();
        if *name == POLITENESS || *name == POSITIVITY {
            ok &= within && signed;
            details.push(format!(
                "{name} {:+.3} (SE {:.3}, planted {beta:+.3})",
                t.coefficient, t.std_error
            ));
        } else {
            ok &= within;
        }
    }
    details.push("all six covariates within 2 SE".into());

    // Zero group variance against the OLS oracle.
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (n_groups, per) = (40, 6);
    let mut groups = Vec::new();
    let (mut x1, mut x2, mut y) = (Vec::new(), Vec::new(), Vec::new());
    for g in 0..n_groups {
        for _ in 0..per {
            let a: f64 = rng.gen_range(-2.0..2.0);
            let b: f64 = rng.gen_range(0.0..1.0);
            groups.push(format!("g{g}"));
            x1.push(a);
            x2.push(b);
            y.push(0.3 + 0.5 * a - 1.2 * b + rng.gen_range(-0.5..0.5));
        }
    }
    let mut t = FeatureTable::new(groups);
    t.add_column("x1", x1.clone()).unwrap();
    t.add_column("x2", x2.clone()).unwrap();
    t.add_column("y", y.clone()).unwrap();
    let options = RandomInterceptOptions {
        fixed_variance_ratio: Some(0.0),
        ..RandomInterceptOptions::default()
    };
    let fit0 =
        fit_random_intercept_with(&t, "y", &["x1", "x2"], options).map_err(|e| e.to_string())?;
    let design: Vec<Vec<f64>> = x1.iter().zip(&x2).map(|(a, b)| vec![1.0, *a, *b]).collect();
    let (beta, se) = ols(&design, &y);
    let mut worst: f64 = 0.0;
    for (j, name) in [INTERCEPT, "x1", "x2"].iter().enumerate() {
        let term = fit0.term(name).ok_or(format!("no term {name}"))?;
        worst = worst
            .max((term.coefficient - beta[j]).abs())
            .max((term.std_error - se[j]).abs());
    }
    ok &= worst <= 1e-6 && fit0.random_intercept_variance == 0.0;
    details.push(format!("OLS oracle max deviation {worst:.1e}"));
    check(ok, details.join("; "))
}

// ---------------------------------------------------------------- 9

fn ln_gamma(x: f64) -> f64 {
    // Lanczos, g = 7, n = 9.
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + 7.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Composite Simpson on [a, b] with `n` (even) intervals.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn criterion_9() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;

    // d = [-0.5, 0.5, 1, 1, 1]: mean 0.6, sum of squares 1.7, var 0.425.
    let a = [1.0, 2.0, 3.0, 4.0, 5.0];
    let b = [1.5, 1.5, 2.0, 3.0, 4.0];
    let t = paired_t_test(&a, &b).map_err(|e| e.to_string())?;
    let t_hand = 0.6 / (0.425f64 / 5.0).sqrt();
    let nu = 4.0;
    let norm = (ln_gamma((nu + 1.0) / 2.0) - ln_gamma(nu / 2.0)).exp()
        / (nu * std::f64::consts::PI).sqrt();
    let density = |x: f64| norm * (1.0 + x * x / nu).powf(-(nu + 1.0) / 2.0);
    let p_quad = 1.0 - 2.0 * simpson(density, 0.0, t_hand, 20_000);
    ok &= (t.statistic - t_hand).abs() < 1e-6 && (t.p_value - p_quad).abs() < 1e-6 && t.df == 4.0;
    details.push(format!(
        "paired t {:.6} (hand {t_hand:.6}), p {:.6} (quadrature {p_quad:.6})",
        t.statistic, t.p_value
    ));

    // [26, 88] against [57, 57]: 2 * 31^2 / 57.
    let c = chi_square_gof(&[26.0, 88.0], &[57.0, 57.0]).map_err(|e| e.to_string())?;
    let chi_hand = 2.0 * 31.0f64.powi(2) / 57.0;
    let chi_density = |x: f64| (-x / 2.0).exp() / (2.0 * std::f64::consts::PI * x).sqrt();
    let p_chi = simpson(chi_density, chi_hand, chi_hand + 200.0, 200_000);
    ok &= (c.statistic - chi_hand).abs() < 1e-6 && (c.p_value - p_chi).abs() < 1e-6 && c.df == 1.0;
    ok &= format!("{:.2}", c.statistic) == "33.72";
    details.push(format!(
        "chi2 {:.4} (hand {chi_hand:.4}), p {:.3e} (quadrature {p_chi:.3e})",
        c.statistic, c.p_value
    ));

    // Pairwise Cohen kappas 0.6, 0.0, 0.4 (each with chance agreement 0.5).
    let r1 = [1, 1, 1, 1, 1, 0, 0, 0, 0, 0];
    let r2 = [1, 1, 1, 1, 0, 0, 0, 0, 0, 1];
    let r3 = [1, 1, 0, 0, 0, 0, 0, 0, 1, 1];
    let ratings: Vec<Vec<u32>> = (0..10).map(|i| vec![r1[i], r2[i], r3[i]]).collect();
    let k = multi_rater_kappa(&ratings).map_err(|e| e.to_string())?;
    ok &= (k.statistic - 1.0 / 3.0).abs() < 1e-6;
    details.push(format!("Light's kappa {:.6} (hand 0.333333)", k.statistic));
    check(ok, details.join("; "))
}

// ----------------------------------------------------------------

fn main() {
    let only: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let wanted = |n: usize| only.is_empty() || only.contains(&n);
    let names = [
        "gradient correctness",
        "memorization",
        "enhancement direction",
        "content preservation direction",
        "BLEU oracle equivalence",
        "sentiment structure",
        "politeness ordering",
        "regression recovery",
        "statistics oracles",
        "determinism",
    ];
    let mut results: Vec<(usize, Outcome, f64)> = Vec::new();
    let timed = |f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let r = f();
        (r, start.elapsed().as_secs_f64())
    };
    let singles: [(usize, fn() -> Outcome); 7] = [
        (1, criterion_1),
        (2, criterion_2),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    for (n, f) in singles {
        if wanted(n) {
            let (r, s) = timed(&f);
            results.push((n, r, s));
        }
    }
    if wanted(3) || wanted(4) || wanted(10) {
        let start = Instant::now();
        let p = pipeline_criteria();
        let s = start.elapsed().as_secs_f64();
        // One run serves 3 and 4; 10 adds a second.
        results.push((3, p.enhancement, s / 2.0));
        results.push((4, p.content, s / 2.0));
        results.push((10, p.determinism, s));
    }
    results.sort_by_key(|r| r.0);
    let mut failed = 0;
    for (n, r, s) in results.iter().filter(|r| wanted(r.0)) {
        let (tag, detail) = match r {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "criterion {n:>2} {tag} {:<31} [{s:>6.1} s] {detail}",
            names[n - 1]
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
