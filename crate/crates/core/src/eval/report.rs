use std::fmt::Write as _;

use super::compare::ModelComparison;
use super::enhance::EnhancementResult;
use crate::stats::{stars, TestResult, STAR_LEGEND};

/// Left-aligns the first column and right-aligns the rest.
pub fn align(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (cell, &w))| {
                if c == 0 {
                    format!("{cell:<w$}")
                } else {
                    format!("{cell:>w$}")
                }
            })
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    }
    out
}

pub fn percent(gain: f64) -> String {
    if gain.is_finite() {
        format!("{:.1}%", 100.0 * gain)
    } else {
        "n/a".into()
    }
}

pub fn describe_test(t: &TestResult) -> String {
    format!(
        "{} t = {:.3}, df = {:.1}, p = {:.3e}{}",
        t.kind.name(),
        t.statistic,
        t.df,
        t.p_value,
        stars(t.p_value)
    )
}

/// Content preservation: BLEU and embedding similarity of both models, with
/// the social model's relative gain in parentheses.
pub fn content_table(c: &ModelComparison) -> String {
    let rows = vec![
        vec!["Metric".into(), "Lexical".into(), "Lexical+Social".into()],
        vec![
            "BLEU".into(),
            format!("{:.2}", c.bleu_lexical),
            format!("{:.2} ({})", c.bleu_social, percent(c.bleu_gain)),
        ],
        vec![
            "Embedding similarity".into(),
            format!("{:.3}", c.similarity_lexical),
            format!(
                "{:.3} ({}){}",
                c.similarity_social,
                percent(c.similarity_gain),
                stars(c.paired.p_value)
            ),
        ],
    ];
    let mut out = align(&rows);
    let _ = writeln!(
        out,
        "Test pairs: {} (similarity on {}, {} excluded)",
        c.n, c.similarity_n, c.excluded
    );
    let _ = writeln!(out, "Similarity: {}", describe_test(&c.paired));
    let _ = writeln!(out, "Similarity: {}", describe_test(&c.welch));
    let _ = writeln!(out, "{STAR_LEGEND}");
    out
}

/// Unenhanced vs enhanced mean scores per feature.
pub fn enhancement_table(results: &[EnhancementResult]) -> String {
    let mut rows = vec![vec![
        "Feature".to_owned(),
        "Unenhanced".into(),
        "Enhanced".into(),
        "t (paired)".into(),
        "p".into(),
        "t (Welch)".into(),
        "p".into(),
        "N".into(),
    ]];
    for r in results {
        let name = r.feature.name();
        let mut label = name[..1].to_uppercase();
        label.push_str(&name[1..]);
        rows.push(vec![
            label,
            format!("{:.3}", r.mean_unenhanced),
            format!(
                "{:.3} ({}){}",
                r.mean_enhanced,
                percent(r.relative_gain),
                stars(r.t_test.p_value)
            ),
            format!("{:.3}", r.t_test.statistic),
            format!("{:.3e}", r.t_test.p_value),
            format!("{:.3}", r.welch.statistic),
            format!("{:.3e}", r.welch.p_value),
            r.n.to_string(),
        ]);
    }
    let mut out = align(&rows);
    let _ = writeln!(out, "{STAR_LEGEND}");
    out
}
