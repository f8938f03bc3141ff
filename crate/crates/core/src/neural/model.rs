//! Parameters, LSTM cells, the fusion layer and the per-example forward and
//! backward passes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::vocab::{Vocab, EOS_ID, PAD_ID, SOS_ID};
use crate::social_features::SocialVector;
use crate::{Error, Result};

pub const SOCIAL_DIM: usize = 2;
pub const INIT_RANGE: f64 = 0.1;
pub const FORGET_BIAS: f64 = 1.0;
/// Initial range of the fusion weights on the social inputs.
pub const SOCIAL_INIT_RANGE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Lexical,
    LexicalSocial,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Lexical => "lexical",
            Variant::LexicalSocial => "lexical_social",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "lexical" => Some(Variant::Lexical),
            "lexical_social" => Some(Variant::LexicalSocial),
            _ => None,
        }
    }
}

/// Storage precision. `F32` rounds every parameter to the nearest f32 after
/// initialization and after each update, so 32-bit checkpoints are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    F32,
    F64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub variant: Variant,
    pub d_emb: usize,
    pub d_h: usize,
    pub precision: Precision,
}

impl ModelConfig {
    pub fn desk(variant: Variant) -> Self {
        Self {
            variant,
            d_emb: 32,
            d_h: 64,
            precision: Precision::F32,
        }
    }

    /// Embedding 300, hidden 512.
    pub fn full_scale(variant: Variant) -> Self {
        Self {
            variant,
            d_emb: 300,
            d_h: 512,
            precision: Precision::F32,
        }
    }
}

/// Row-major dense matrix (a vector when `cols == 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `out = self * x + bias`.
    fn affine(&self, x: &[f64], bias: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| bias[r] + dot(self.row(r), x))
            .collect()
    }

    /// `out += self^T * dy`.
    fn add_transpose_product(&self, dy: &[f64], out: &mut [f64]) {
        for (r, &g) in dy.iter().enumerate() {
            if g != 0.0 {
                axpy(g, self.row(r), out);
            }
        }
    }

    /// `self += dy * x^T`.
    fn add_outer(&mut self, dy: &[f64], x: &[f64]) {
        let cols = self.cols;
        for (r, &g) in dy.iter().enumerate() {
            if g != 0.0 {
                axpy(g, x, &mut self.data[r * cols..(r + 1) * cols]);
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn norm_squared(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }
}

/// Four interleaved partial sums, combined in a fixed order.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// All trainable tensors, in checkpoint order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub embedding: Tensor,
    pub enc_w: Tensor,
    pub enc_b: Tensor,
    pub dec_w: Tensor,
    pub dec_b: Tensor,
    pub out_w: Tensor,
    pub out_b: Tensor,
    pub fusion_w: Option<Tensor>,
    pub fusion_b: Option<Tensor>,
}

impl Params {
    pub fn zeros(config: &ModelConfig, vocab_size: usize) -> Self {
        let (e, h) = (config.d_emb, config.d_h);
        let social = config.variant == Variant::LexicalSocial;
        Self {
            embedding: Tensor::zeros(vocab_size, e),
            enc_w: Tensor::zeros(4 * h, e + h),
            enc_b: Tensor::zeros(4 * h, 1),
            dec_w: Tensor::zeros(4 * h, e + h),
            dec_b: Tensor::zeros(4 * h, 1),
            out_w: Tensor::zeros(vocab_size, h),
            out_b: Tensor::zeros(vocab_size, 1),
            fusion_w: social.then(|| Tensor::zeros(2 * h, 2 * h + SOCIAL_DIM)),
            fusion_b: social.then(|| Tensor::zeros(2 * h, 1)),
        }
    }

    pub fn tensors(&self) -> Vec<(&'static str, &Tensor)> {
        let mut out = vec![
            ("embedding", &self.embedding),
            ("encoder.weight", &self.enc_w),
            ("encoder.bias", &self.enc_b),
            ("decoder.weight", &self.dec_w),
            ("decoder.bias", &self.dec_b),
            ("output.weight", &self.out_w),
            ("output.bias", &self.out_b),
        ];
        if let (Some(w), Some(b)) = (&self.fusion_w, &self.fusion_b) {
            out.push(("fusion.weight", w));
            out.push(("fusion.bias", b));
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<(&'static str, &mut Tensor)> {
        let mut out = vec![
            ("embedding", &mut self.embedding),
            ("encoder.weight", &mut self.enc_w),
            ("encoder.bias", &mut self.enc_b),
            ("decoder.weight", &mut self.dec_w),
            ("decoder.bias", &mut self.dec_b),
            ("output.weight", &mut self.out_w),
            ("output.bias", &mut self.out_b),
        ];
        if let (Some(w), Some(b)) = (&mut self.fusion_w, &mut self.fusion_b) {
            out.push(("fusion.weight", w));
            out.push(("fusion.bias", b));
        }
        out
    }

    pub fn zeros_like(&self) -> Self {
        let z = |t: &Tensor| Tensor::zeros(t.rows, t.cols);
        Self {
            embedding: z(&self.embedding),
            enc_w: z(&self.enc_w),
            enc_b: z(&self.enc_b),
            dec_w: z(&self.dec_w),
            dec_b: z(&self.dec_b),
            out_w: z(&self.out_w),
            out_b: z(&self.out_b),
            fusion_w: self.fusion_w.as_ref().map(z),
            fusion_b: self.fusion_b.as_ref().map(z),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|(_, t)| t.is_finite())
    }

    pub fn norm(&self) -> f64 {
        self.tensors()
            .iter()
            .map(|(_, t)| t.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    pub fn count(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.data.len()).sum()
    }

    pub(crate) fn round_to_f32(&mut self) {
        for (_, t) in self.tensors_mut() {
            for v in &mut t.data {
                *v = f64::from(*v as f32);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl EncoderState {
    pub fn zeros(d_h: usize) -> Self {
        Self {
            h: vec![0.0; d_h],
            c: vec![0.0; d_h],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.h.iter().chain(&self.c).all(|v| v.is_finite())
    }
}

/// Cached activations of one LSTM step.
#[derive(Debug, Clone)]
pub(crate) struct LstmStep {
    token: usize,
    /// `[x; h_prev]`
    input: Vec<f64>,
    c_prev: Vec<f64>,
    /// Activated gates i, f, g, o (each `d_h` long).
    gates: Vec<f64>,
    pub(crate) c: Vec<f64>,
    tanh_c: Vec<f64>,
    pub(crate) h: Vec<f64>,
}

fn lstm_step(
    w: &Tensor,
    b: &Tensor,
    embedding: &Tensor,
    token: usize,
    h_prev: &[f64],
    c_prev: &[f64],
) -> LstmStep {
    let d_h = h_prev.len();
    let mut input = Vec::with_capacity(w.cols);
    input.extend_from_slice(embedding.row(token));
    input.extend_from_slice(h_prev);
    let mut gates = w.affine(&input, &b.data);
    for (k, z) in gates.iter_mut().enumerate() {
        *z = if (2 * d_h..3 * d_h).contains(&k) {
            z.tanh()
        } else {
            sigmoid(*z)
        };
    }
    let mut c = vec![0.0; d_h];
    let mut tanh_c = vec![0.0; d_h];
    let mut h = vec![0.0; d_h];
    for j in 0..d_h {
        let (i, f, g, o) = (
            gates[j],
            gates[d_h + j],
            gates[2 * d_h + j],
            gates[3 * d_h + j],
        );
        c[j] = f * c_prev[j] + i * g;
        tanh_c[j] = c[j].tanh();
        h[j] = o * tanh_c[j];
    }
    LstmStep {
        token,
        input,
        c_prev: c_prev.to_vec(),
        gates,
        c,
        tanh_c,
        h,
    }
}

/// Backpropagates `dh`, `dc` through one step; accumulates parameter
/// gradients and returns `(dh_prev, dc_prev)`.
fn lstm_step_backward(
    w: &Tensor,
    step: &LstmStep,
    dh: &[f64],
    dc_in: &[f64],
    dw: &mut Tensor,
    db: &mut Tensor,
    d_embedding: &mut Tensor,
) -> (Vec<f64>, Vec<f64>) {
    let d_h = dh.len();
    let mut dz = vec![0.0; 4 * d_h];
    let mut dc_prev = vec![0.0; d_h];
    for j in 0..d_h {
        let (i, f, g, o) = (
            step.gates[j],
            step.gates[d_h + j],
            step.gates[2 * d_h + j],
            step.gates[3 * d_h + j],
        );
        let tc = step.tanh_c[j];
        let d_o = dh[j] * tc;
        let dc = dc_in[j] + dh[j] * o * (1.0 - tc * tc);
        dz[j] = dc * g * i * (1.0 - i);
        dz[d_h + j] = dc * step.c_prev[j] * f * (1.0 - f);
        dz[2 * d_h + j] = dc * i * (1.0 - g * g);
        dz[3 * d_h + j] = d_o * o * (1.0 - o);
        dc_prev[j] = dc * f;
    }
    dw.add_outer(&dz, &step.input);
    axpy(1.0, &dz, &mut db.data);
    let mut d_input = vec![0.0; w.cols];
    w.add_transpose_product(&dz, &mut d_input);
    let d_emb = d_embedding.cols;
    axpy(
        1.0,
        &d_input[..d_emb],
        &mut d_embedding.data[step.token * d_emb..(step.token + 1) * d_emb],
    );
    (d_input[d_emb..].to_vec(), dc_prev)
}

/// One training example in id form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    /// Driver tokens followed by `<eos>`.
    pub source: Vec<usize>,
    /// `<sos>`, agent tokens, `<eos>`.
    pub target: Vec<usize>,
    pub social: SocialVector,
}

impl Example {
    pub fn new(vocab: &Vocab, driver: &[String], agent: &[String], social: SocialVector) -> Self {
        Self {
            source: vocab.encode_source(driver),
            target: vocab.encode_target(agent),
            social,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Seq2SeqModel {
    pub config: ModelConfig,
    pub vocab: Vocab,
    pub params: Params,
    /// Fingerprint of the dataset split the model was trained on, if any.
    pub split_fingerprint: Option<String>,
}

pub(crate) struct ForwardCache {
    enc_steps: Vec<LstmStep>,
    fusion_input: Vec<f64>,
    fusion_out: Vec<f64>,
    dec_steps: Vec<LstmStep>,
    /// Softmax over the vocabulary at each decoder step.
    probs: Vec<Vec<f64>>,
}

impl Seq2SeqModel {
    /// Uniform(-0.1, 0.1) initialization with forget-gate biases at 1.
    pub fn new(config: ModelConfig, vocab: Vocab, seed: u64) -> Self {
        let mut params = Params::zeros(&config, vocab.len());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (_, t) in params.tensors_mut() {
            for v in &mut t.data {
                *v = rng.gen_range(-INIT_RANGE..INIT_RANGE);
            }
        }
        let h = config.d_h;
        for b in [&mut params.enc_b, &mut params.dec_b] {
            b.data[h..2 * h].fill(FORGET_BIAS);
        }
        // The fusion layer starts as a pass-through of (h, c) plus a wide
        // random projection of the social vector.
        if let Some(w) = params.fusion_w.as_mut() {
            for r in 0..2 * h {
                let row = &mut w.data[r * w.cols..(r + 1) * w.cols];
                row[..2 * h].fill(0.0);
                row[r] = 1.0;
                for v in &mut row[2 * h..] {
                    *v *= SOCIAL_INIT_RANGE / INIT_RANGE;
                }
            }
        }
        let mut model = Self {
            config,
            vocab,
            params,
            split_fingerprint: None,
        };
        model.apply_precision();
        model
    }

    pub fn variant(&self) -> Variant {
        self.config.variant
    }

    pub(crate) fn apply_precision(&mut self) {
        if self.config.precision == Precision::F32 {
            self.params.round_to_f32();
        }
    }

    fn encoder_steps(&self, source: &[usize]) -> Result<Vec<LstmStep>> {
        if source.is_empty() {
            return Err(Error::InvalidInput(
                "cannot encode an empty sequence".into(),
            ));
        }
        let p = &self.params;
        let d_h = self.config.d_h;
        let mut steps: Vec<LstmStep> = Vec::with_capacity(source.len());
        let zeros = vec![0.0; d_h];
        for &tok in source {
            self.check_token(tok)?;
            let (h, c) = match steps.last() {
                Some(s) => (s.h.as_slice(), s.c.as_slice()),
                None => (zeros.as_slice(), zeros.as_slice()),
            };
            let step = lstm_step(&p.enc_w, &p.enc_b, &p.embedding, tok, h, c);
            steps.push(step);
        }
        Ok(steps)
    }

    fn check_token(&self, tok: usize) -> Result<()> {
        if tok >= self.vocab.len() {
            return Err(Error::InvalidInput(format!(
                "token id {tok} outside vocabulary"
            )));
        }
        Ok(())
    }

    /// Final hidden and cell state of the encoder.
    pub fn encode(&self, source: &[usize]) -> Result<EncoderState> {
        let steps = self.encoder_steps(source)?;
        let last = steps.last().expect("non-empty");
        Ok(EncoderState {
            h: last.h.clone(),
            c: last.c.clone(),
        })
    }

    fn fusion_input(state: &EncoderState, s: SocialVector) -> Vec<f64> {
        let mut u = Vec::with_capacity(2 * state.h.len() + SOCIAL_DIM);
        u.extend_from_slice(&state.h);
        u.extend_from_slice(&state.c);
        u.extend_from_slice(&s.as_array());
        u
    }

    /// `tanh(W [h; c; s] + b)` split into the decoder's `(h0, c0)`.
    pub fn fuse_social(&self, state: &EncoderState, s: SocialVector) -> Result<EncoderState> {
        let (w, b) = self.fusion()?;
        let out: Vec<f64> = w
            .affine(&Self::fusion_input(state, s), &b.data)
            .into_iter()
            .map(f64::tanh)
            .collect();
        let d_h = self.config.d_h;
        Ok(EncoderState {
            h: out[..d_h].to_vec(),
            c: out[d_h..].to_vec(),
        })
    }

    fn fusion(&self) -> Result<(&Tensor, &Tensor)> {
        match (&self.params.fusion_w, &self.params.fusion_b) {
            (Some(w), Some(b)) => Ok((w, b)),
            _ => Err(Error::Variant(
                "the lexical variant has no fusion layer".into(),
            )),
        }
    }

    /// Decoder initial state for a source, applying fusion when present.
    pub fn initial_state(&self, source: &[usize], s: Option<SocialVector>) -> Result<EncoderState> {
        let enc = self.encode(source)?;
        match (self.variant(), s) {
            (Variant::Lexical, None) => Ok(enc),
            (Variant::LexicalSocial, Some(s)) => self.fuse_social(&enc, s),
            (Variant::Lexical, Some(_)) => Err(Error::Variant(
                "a social vector was given to a lexical model".into(),
            )),
            (Variant::LexicalSocial, None) => Err(Error::Variant(
                "the lexical_social model needs a social vector".into(),
            )),
        }
    }

    fn check_target(&self, target: &[usize]) -> Result<()> {
        if target.first() != Some(&SOS_ID) {
            return Err(Error::InvalidInput("target must begin with <sos>".into()));
        }
        if target.len() < 2 || target.last() != Some(&EOS_ID) {
            return Err(Error::InvalidInput("target must end with <eos>".into()));
        }
        target.iter().try_for_each(|&t| self.check_token(t))
    }

    /// One decoder step from `(h, c)` on input token `tok`; returns the step
    /// and the softmax over the vocabulary.
    pub(crate) fn decoder_step(&self, tok: usize, h: &[f64], c: &[f64]) -> (LstmStep, Vec<f64>) {
        let p = &self.params;
        let step = lstm_step(&p.dec_w, &p.dec_b, &p.embedding, tok, h, c);
        let logits = p.out_w.affine(&step.h, &p.out_b.data);
        (step, softmax(&logits))
    }

    /// Teacher-forced mean cross-entropy over non-`<pad>` target positions.
    pub fn decode_loss(&self, init: &EncoderState, target: &[usize]) -> Result<f64> {
        self.check_target(target)?;
        let (mut h, mut c) = (init.h.clone(), init.c.clone());
        let mut total = 0.0;
        let mut count = 0usize;
        for t in 0..target.len() - 1 {
            let (step, probs) = self.decoder_step(target[t], &h, &c);
            let y = target[t + 1];
            if y != PAD_ID {
                total -= probs[y].ln();
                count += 1;
            }
            h = step.h;
            c = step.c;
        }
        Ok(if count == 0 {
            0.0
        } else {
            total / count as f64
        })
    }

    pub(crate) fn forward(&self, ex: &Example) -> Result<(f64, ForwardCache)> {
        self.check_target(&ex.target)?;
        let enc_steps = self.encoder_steps(&ex.source)?;
        let last = enc_steps.last().expect("non-empty");
        let enc = EncoderState {
            h: last.h.clone(),
            c: last.c.clone(),
        };
        let (fusion_input, fusion_out, init) = match self.variant() {
            Variant::Lexical => (Vec::new(), Vec::new(), enc),
            Variant::LexicalSocial => {
                let (w, b) = self.fusion()?;
                let u = Self::fusion_input(&enc, ex.social);
                let a: Vec<f64> = w.affine(&u, &b.data).into_iter().map(f64::tanh).collect();
                let d_h = self.config.d_h;
                let init = EncoderState {
                    h: a[..d_h].to_vec(),
                    c: a[d_h..].to_vec(),
                };
                (u, a, init)
            }
        };
        let (mut h, mut c) = (init.h, init.c);
        let mut dec_steps = Vec::with_capacity(ex.target.len() - 1);
        let mut probs_all = Vec::with_capacity(ex.target.len() - 1);
        let mut total = 0.0;
        let mut count = 0usize;
        for t in 0..ex.target.len() - 1 {
            let (step, probs) = self.decoder_step(ex.target[t], &h, &c);
            let y = ex.target[t + 1];
            if y != PAD_ID {
                total -= probs[y].ln();
                count += 1;
            }
            h.clone_from(&step.h);
            c.clone_from(&step.c);
            dec_steps.push(step);
            probs_all.push(probs);
        }
        let loss = if count == 0 {
            0.0
        } else {
            total / count as f64
        };
        Ok((
            loss,
            ForwardCache {
                enc_steps,
                fusion_input,
                fusion_out,
                dec_steps,
                probs: probs_all,
            },
        ))
    }

    /// Adds `scale` times the gradient of the example loss to `grads`.
    pub(crate) fn backward(
        &self,
        ex: &Example,
        cache: &ForwardCache,
        scale: f64,
        grads: &mut Params,
    ) {
        let p = &self.params;
        let d_h = self.config.d_h;
        let count = ex.target[1..].iter().filter(|&&y| y != PAD_ID).count();
        if count == 0 {
            return;
        }
        let unit = scale / count as f64;
        let mut dh_next = vec![0.0; d_h];
        let mut dc_next = vec![0.0; d_h];
        for t in (0..cache.dec_steps.len()).rev() {
            let step = &cache.dec_steps[t];
            let y = ex.target[t + 1];
            let mut dh = dh_next.clone();
            if y != PAD_ID {
                let mut dlogits: Vec<f64> = cache.probs[t].iter().map(|q| q * unit).collect();
                dlogits[y] -= unit;
                grads.out_w.add_outer(&dlogits, &step.h);
                axpy(1.0, &dlogits, &mut grads.out_b.data);
                p.out_w.add_transpose_product(&dlogits, &mut dh);
            }
            let (dhp, dcp) = lstm_step_backward(
                &p.dec_w,
                step,
                &dh,
                &dc_next,
                &mut grads.dec_w,
                &mut grads.dec_b,
                &mut grads.embedding,
            );
            dh_next = dhp;
            dc_next = dcp;
        }
        let (dh_enc, dc_enc) = match self.variant() {
            Variant::Lexical => (dh_next, dc_next),
            Variant::LexicalSocial => {
                let w = p.fusion_w.as_ref().expect("social variant has fusion");
                let da: Vec<f64> = dh_next
                    .iter()
                    .chain(&dc_next)
                    .zip(&cache.fusion_out)
                    .map(|(g, a)| g * (1.0 - a * a))
                    .collect();
                let gw = grads.fusion_w.as_mut().expect("gradient shape matches");
                gw.add_outer(&da, &cache.fusion_input);
                let gb = grads.fusion_b.as_mut().expect("gradient shape matches");
                axpy(1.0, &da, &mut gb.data);
                let mut du = vec![0.0; w.cols];
                w.add_transpose_product(&da, &mut du);
                (du[..d_h].to_vec(), du[d_h..2 * d_h].to_vec())
            }
        };
        let mut dh_next = dh_enc;
        let mut dc_next = dc_enc;
        for step in cache.enc_steps.iter().rev() {
            let (dhp, dcp) = lstm_step_backward(
                &p.enc_w,
                step,
                &dh_next,
                &dc_next,
                &mut grads.enc_w,
                &mut grads.enc_b,
                &mut grads.embedding,
            );
            dh_next = dhp;
            dc_next = dcp;
        }
    }

    /// Loss of one example, as used in training.
    pub fn example_loss(&self, ex: &Example) -> Result<f64> {
        self.forward(ex).map(|(l, _)| l)
    }

    /// Mean per-example loss and its gradient.
    pub fn loss_and_gradient(&self, batch: &[Example]) -> Result<(f64, Params)> {
        let mut grads = self.params.zeros_like();
        let mut total = 0.0;
        let scale = 1.0 / batch.len() as f64;
        for ex in batch {
            let (loss, cache) = self.forward(ex)?;
            total += loss;
            self.backward(ex, &cache, scale, &mut grads);
        }
        Ok((total * scale, grads))
    }

    /// Mean per-example loss.
    pub fn batch_loss(&self, batch: &[Example]) -> Result<f64> {
        let mut total = 0.0;
        for ex in batch {
            total += self.example_loss(ex)?;
        }
        Ok(total / batch.len() as f64)
    }

    /// Bound on how far the fused state can move per unit change of one
    /// social feature: the norm of that feature's fusion-weight column
    /// (tanh is 1-Lipschitz).
    pub fn fusion_lipschitz(&self, feature: usize) -> Result<f64> {
        let (w, _) = self.fusion()?;
        let col = 2 * self.config.d_h + feature;
        Ok((0..w.rows)
            .map(|r| w.data[r * w.cols + col].powi(2))
            .sum::<f64>()
            .sqrt())
    }

    pub fn social_conditioning_check(&self) -> Result<()> {
        if self.params.is_finite() {
            Ok(())
        } else {
            Err(Error::Precondition(
                "model parameters are not finite".into(),
            ))
        }
    }
}

pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}
