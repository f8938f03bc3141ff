use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::neural::{Seq2SeqModel, RESERVED};
use crate::{Error, Result};

/// Token vectors of one fixed dimension.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmbeddingTable {
    dim: usize,
    /// Insertion order, kept for deterministic output.
    tokens: Vec<String>,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            ..Self::default()
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn insert(&mut self, token: impl Into<String>, vector: Vec<f64>) -> Result<()> {
        let token = token.into();
        if vector.len() != self.dim {
            return Err(Error::InvalidInput(format!(
                "vector for `{token}` has dimension {}, expected {}",
                vector.len(),
                self.dim
            )));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite vector for `{token}`"
            )));
        }
        if self.vectors.insert(token.clone(), vector).is_none() {
            self.tokens.push(token);
        }
        Ok(())
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    /// Rows of a model's embedding layer, reserved tokens excluded.
    pub fn from_model(model: &Seq2SeqModel) -> Self {
        let mut table = Self::new(model.config.d_emb);
        for (id, token) in model.vocab.tokens().iter().enumerate() {
            if !RESERVED.contains(&token.as_str()) {
                table
                    .insert(token.clone(), model.params.embedding.row(id).to_vec())
                    .expect("model embeddings are finite and well-shaped");
            }
        }
        table
    }

    /// Text format: a `count dim` header, then `token v1 ... vd` per line.
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(source, 1, "missing header"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let parse_usize = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::parse(source, 1, "header must be `count dim`"))
        };
        if fields.len() != 2 {
            return Err(Error::parse(source, 1, "header must be `count dim`"));
        }
        let (count, dim) = (parse_usize(fields[0])?, parse_usize(fields[1])?);
        let mut table = Self::new(dim);
        for (i, line) in lines {
            let mut parts = line.split_whitespace();
            let token = parts.next().expect("non-empty line");
            let vector = parts
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| Error::parse(source, i + 1, format!("bad number `{v}`")))
                })
                .collect::<Result<Vec<f64>>>()?;
            table
                .insert(token, vector)
                .map_err(|e| Error::parse(source, i + 1, e.to_string()))?;
        }
        if table.len() != count {
            return Err(Error::parse(
                source,
                1,
                format!("header declares {count} vectors, found {}", table.len()),
            ));
        }
        Ok(table)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.len(), self.dim);
        for t in &self.tokens {
            out.push_str(t);
            for v in &self.vectors[t] {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    /// Mean of the in-table token vectors, or `None` if there are none.
    pub fn mean_vector<S: AsRef<str>>(&self, tokens: &[S]) -> Option<Vec<f64>> {
        let mut sum = vec![0.0; self.dim];
        let mut n = 0usize;
        for t in tokens {
            if let Some(v) = self.get(t.as_ref()) {
                sum.iter_mut().zip(v).for_each(|(s, x)| *s += x);
                n += 1;
            }
        }
        (n > 0).then(|| sum.into_iter().map(|s| s / n as f64).collect())
    }
}

/// Cosine between the mean in-table vectors of the two utterances.
pub fn embedding_similarity<S: AsRef<str>>(
    candidate: &[S],
    reference: &[S],
    table: &EmbeddingTable,
) -> Result<f64> {
    let a = table
        .mean_vector(candidate)
        .ok_or_else(|| Error::UndefinedSimilarity("candidate has no in-table tokens".into()))?;
    let b = table
        .mean_vector(reference)
        .ok_or_else(|| Error::UndefinedSimilarity("reference has no in-table tokens".into()))?;
    let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    let (na, nb) = (norm(&a), norm(&b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::UndefinedSimilarity("zero mean vector".into()));
    }
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
