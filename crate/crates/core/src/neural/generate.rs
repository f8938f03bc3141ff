use super::model::Seq2SeqModel;
use super::vocab::{EOS_ID, PAD_ID, SOS_ID};
use crate::social_features::SocialVector;
use crate::{Error, Result};

/// Default cap on generated length.
pub const DEFAULT_MAX_LEN: usize = 40;

fn check_ready(model: &Seq2SeqModel) -> Result<()> {
    if !model.params.is_finite() {
        return Err(Error::Precondition(
            "model parameters are not finite".into(),
        ));
    }
    Ok(())
}

/// Greedy decoding from `<sos>` until `<eos>` or `max_len` tokens. `<pad>`
/// and `<sos>` are never emitted; ties go to the lower id.
pub fn generate(
    model: &Seq2SeqModel,
    driver_tokens: &[String],
    s: Option<SocialVector>,
    max_len: usize,
) -> Result<Vec<String>> {
    let source = model.vocab.encode_source(driver_tokens);
    let ids = generate_ids(model, &source, s, max_len)?;
    Ok(model.vocab.decode(&ids))
}

pub fn generate_ids(
    model: &Seq2SeqModel,
    source: &[usize],
    s: Option<SocialVector>,
    max_len: usize,
) -> Result<Vec<usize>> {
    check_ready(model)?;
    let init = model.initial_state(source, s)?;
    let (mut h, mut c) = (init.h, init.c);
    let mut out = Vec::new();
    let mut tok = SOS_ID;
    while out.len() < max_len {
        let (step, probs) = model.decoder_step(tok, &h, &c);
        let next = argmax_allowed(&probs);
        if next == EOS_ID {
            break;
        }
        out.push(next);
        tok = next;
        h = step.h;
        c = step.c;
    }
    Ok(out)
}

fn argmax_allowed(probs: &[f64]) -> usize {
    let mut best = EOS_ID;
    for (id, &p) in probs.iter().enumerate() {
        if id != PAD_ID && id != SOS_ID && p > probs[best] {
            best = id;
        }
    }
    best
}

/// Beam search ranked by summed log probability. `beam_width` 1 equals
/// greedy decoding.
pub fn generate_beam(
    model: &Seq2SeqModel,
    driver_tokens: &[String],
    s: Option<SocialVector>,
    max_len: usize,
    beam_width: usize,
) -> Result<Vec<String>> {
    if beam_width == 0 {
        return Err(Error::InvalidInput("beam width must be at least 1".into()));
    }
    check_ready(model)?;
    let source = model.vocab.encode_source(driver_tokens);
    let init = model.initial_state(&source, s)?;

    struct Hyp {
        tokens: Vec<usize>,
        score: f64,
        h: Vec<f64>,
        c: Vec<f64>,
    }
    let mut beam = vec![Hyp {
        tokens: Vec::new(),
        score: 0.0,
        h: init.h,
        c: init.c,
    }];
    let mut finished: Vec<(Vec<usize>, f64)> = Vec::new();
    for _ in 0..=max_len {
        let mut candidates: Vec<(usize, usize, f64)> = Vec::new();
        let mut states = Vec::with_capacity(beam.len());
        for (k, hyp) in beam.iter().enumerate() {
            let tok = hyp.tokens.last().copied().unwrap_or(SOS_ID);
            let (step, probs) = model.decoder_step(tok, &hyp.h, &hyp.c);
            for (id, p) in probs.iter().enumerate() {
                if id == PAD_ID || id == SOS_ID {
                    continue;
                }
                if hyp.tokens.len() == max_len && id != EOS_ID {
                    continue;
                }
                candidates.push((k, id, hyp.score + p.ln()));
            }
            states.push(step);
        }
        candidates.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
        let mut next = Vec::with_capacity(beam_width);
        for (k, id, score) in candidates {
            if next.len() >= beam_width {
                break;
            }
            if id == EOS_ID {
                finished.push((beam[k].tokens.clone(), score));
            } else {
                let mut tokens = beam[k].tokens.clone();
                tokens.push(id);
                next.push(Hyp {
                    tokens,
                    score,
                    h: states[k].h.clone(),
                    c: states[k].c.clone(),
                });
            }
        }
        let best_open = next
            .iter()
            .map(|h| h.score)
            .fold(f64::NEG_INFINITY, f64::max);
        let best_done = finished
            .iter()
            .map(|f| f.1)
            .fold(f64::NEG_INFINITY, f64::max);
        // Scores only decrease, so no open hypothesis can overtake.
        if next.is_empty() || best_done >= best_open {
            break;
        }
        beam = next;
    }
    let best = finished
        .into_iter()
        .fold(None::<(Vec<usize>, f64)>, |acc, f| match acc {
            Some(a) if a.1 >= f.1 => Some(a),
            _ => Some(f),
        })
        .map(|f| f.0)
        .unwrap_or_default();
    Ok(model.vocab.decode(&best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::model::{ModelConfig, Precision, Variant};
    use crate::neural::vocab::build_vocab;

    fn model(variant: Variant) -> Seq2SeqModel {
        let corpus = [vec!["a", "b", "c", "d", "e", "f"]];
        let vocab = build_vocab(corpus.iter().map(Vec::as_slice), 1).unwrap();
        let config = ModelConfig {
            variant,
            d_emb: 6,
            d_h: 6,
            precision: Precision::F64,
        };
        Seq2SeqModel::new(config, vocab, 21)
    }

    fn words(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_owned).collect()
    }

    #[test]
    fn never_emits_pad_or_sos_and_is_deterministic() {
        let mut m = model(Variant::Lexical);
        // Make <pad> and <sos> the most likely tokens everywhere.
        m.params.out_b.data[PAD_ID] = 50.0;
        m.params.out_b.data[SOS_ID] = 40.0;
        let a = generate(&m, &words("a b"), None, 7).unwrap();
        let b = generate(&m, &words("a b"), None, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.len() <= 7);
        assert!(a.iter().all(|t| t != "<pad>" && t != "<sos>"));
    }

    #[test]
    fn stops_at_eos() {
        let mut m = model(Variant::Lexical);
        m.params.out_w.data.fill(0.0);
        m.params.out_b.data.fill(0.0);
        m.params.out_b.data[EOS_ID] = 5.0;
        assert!(generate(&m, &words("c"), None, 10).unwrap().is_empty());
        m.params.out_b.data[EOS_ID] = 0.0;
        m.params.out_b.data[5] = 5.0;
        assert_eq!(
            generate(&m, &words("c"), None, 3).unwrap(),
            vec![m.vocab.token(5).to_owned(); 3]
        );
    }

    #[test]
    fn social_vector_required_iff_social() {
        let lex = model(Variant::Lexical);
        let soc = model(Variant::LexicalSocial);
        let s = Some(SocialVector::new(0.5, 0.5));
        assert!(generate(&lex, &words("a"), s, 5).is_err());
        assert!(generate(&soc, &words("a"), None, 5).is_err());
        assert!(generate(&soc, &words("a"), s, 5).is_ok());
    }

    #[test]
    fn rejects_non_finite_parameters() {
        let mut m = model(Variant::Lexical);
        m.params.dec_w.data[0] = f64::NAN;
        assert!(matches!(
            generate(&m, &words("a"), None, 5),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn beam_width_one_is_greedy() {
        let m = model(Variant::LexicalSocial);
        let s = Some(SocialVector::new(0.3, 0.9));
        for prompt in ["a", "b c", "f e d"] {
            let greedy = generate(&m, &words(prompt), s, 8).unwrap();
            let beam = generate_beam(&m, &words(prompt), s, 8, 1).unwrap();
            assert_eq!(greedy, beam);
            let wide = generate_beam(&m, &words(prompt), s, 8, 4).unwrap();
            assert!(wide.len() <= 8);
        }
    }
}
