use std::fmt::Write as _;

use super::regression::RegressionFit;

pub const STAR_LEGEND: &str = "*:p<0.05, **:p<0.01, ***:p<0.001";

pub fn stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

/// Coefficient table with one column per model: each cell is the
/// coefficient with stars and its standard error in parentheses. Terms
/// missing from a model are left blank.
pub fn regression_table(models: &[(&str, &RegressionFit)]) -> String {
    let mut names: Vec<&str> = Vec::new();
    for (_, fit) in models {
        for t in &fit.terms {
            if !names.contains(&t.name.as_str()) {
                names.push(&t.name);
            }
        }
    }
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut header = vec![String::new()];
    header.extend(
        models
            .iter()
            .map(|(label, fit)| format!("{label} [{}]", fit.dependent)),
    );
    rows.push(header);
    for name in &names {
        let mut row = vec![(*name).to_owned()];
        for (_, fit) in models {
            row.push(match fit.term(name) {
                Some(t) => format!(
                    "{:.3}{} ({:.3})",
                    t.coefficient,
                    stars(t.p_value),
                    t.std_error
                ),
                None => String::new(),
            });
        }
        rows.push(row);
    }
    let mut extra = |label: &str, f: &dyn Fn(&RegressionFit) -> String| {
        let mut row = vec![label.to_owned()];
        row.extend(models.iter().map(|(_, fit)| f(fit)));
        rows.push(row);
    };
    extra("Random intercept variance", &|f| {
        format!("{:.4}", f.random_intercept_variance)
    });
    extra("Residual variance", &|f| {
        format!("{:.4}", f.residual_variance)
    });
    extra("N (groups)", &|f| format!("{} ({})", f.n_rows, f.n_groups));

    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &rows {
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
    let _ = writeln!(out, "{STAR_LEGEND}");
    out
}
