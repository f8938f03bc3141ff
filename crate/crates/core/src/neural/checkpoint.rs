//! Binary checkpoint format.
//!
//! ```text
//! magic "SDLCKPT\0" | u32 version | u8 precision (0 = f32, 1 = f64)
//! u8 variant (0 = lexical, 1 = lexical_social) | u32 d_emb | u32 d_h
//! str fingerprint (empty = none) | u32 vocab size | str token ...
//! u32 tensor count | (str name | u32 rows | u32 cols | data) ...
//! ```
//!
//! Integers and floats are little-endian; `str` is a u32 byte length
//! followed by UTF-8 bytes.

use std::fs;
use std::path::Path;

use super::model::{ModelConfig, Params, Precision, Seq2SeqModel, Variant};
use super::vocab::Vocab;
use crate::{Error, Result};

pub const MAGIC: &[u8; 8] = b"SDLCKPT\0";
pub const VERSION: u32 = 1;

pub fn to_bytes(model: &Seq2SeqModel) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(match model.config.precision {
        Precision::F32 => 0,
        Precision::F64 => 1,
    });
    out.push(match model.config.variant {
        Variant::Lexical => 0,
        Variant::LexicalSocial => 1,
    });
    put_u32(&mut out, model.config.d_emb);
    put_u32(&mut out, model.config.d_h);
    put_str(&mut out, model.split_fingerprint.as_deref().unwrap_or(""));
    put_u32(&mut out, model.vocab.len());
    for t in model.vocab.tokens() {
        put_str(&mut out, t);
    }
    let tensors = model.params.tensors();
    put_u32(&mut out, tensors.len());
    for (name, t) in tensors {
        put_str(&mut out, name);
        put_u32(&mut out, t.rows);
        put_u32(&mut out, t.cols);
        for &v in &t.data {
            match model.config.precision {
                Precision::F32 => out.extend_from_slice(&(v as f32).to_le_bytes()),
                Precision::F64 => out.extend_from_slice(&v.to_le_bytes()),
            }
        }
    }
    out
}

pub fn from_bytes(bytes: &[u8]) -> Result<Seq2SeqModel> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(MAGIC.len())? != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let precision = match r.u8()? {
        0 => Precision::F32,
        1 => Precision::F64,
        p => return Err(Error::Checkpoint(format!("unknown precision tag {p}"))),
    };
    let variant = match r.u8()? {
        0 => Variant::Lexical,
        1 => Variant::LexicalSocial,
        v => return Err(Error::Checkpoint(format!("unknown variant tag {v}"))),
    };
    let config = ModelConfig {
        variant,
        d_emb: r.u32()? as usize,
        d_h: r.u32()? as usize,
        precision,
    };
    let fingerprint = r.string()?;
    let n_vocab = r.u32()? as usize;
    let mut tokens = Vec::with_capacity(n_vocab.min(1 << 20));
    for _ in 0..n_vocab {
        tokens.push(r.string()?);
    }
    let vocab = Vocab::from_tokens(tokens).map_err(|e| Error::Checkpoint(e.to_string()))?;
    let mut params = Params::zeros(&config, vocab.len());
    let n_tensors = r.u32()? as usize;
    let mut expected = params.tensors_mut();
    if n_tensors != expected.len() {
        return Err(Error::Checkpoint(format!(
            "expected {} tensors for variant {}, found {n_tensors}",
            expected.len(),
            variant.name()
        )));
    }
    for (name, t) in expected.iter_mut() {
        let got = r.string()?;
        let (rows, cols) = (r.u32()? as usize, r.u32()? as usize);
        if got != *name || rows != t.rows || cols != t.cols {
            return Err(Error::Checkpoint(format!(
                "tensor `{got}` {rows}x{cols} does not match expected `{name}` {}x{}",
                t.rows, t.cols
            )));
        }
        for v in &mut t.data {
            *v = match precision {
                Precision::F32 => f64::from(f32::from_le_bytes(r.array()?)),
                Precision::F64 => f64::from_le_bytes(r.array()?),
            };
        }
    }
    if r.pos != bytes.len() {
        return Err(Error::Checkpoint("trailing bytes".into()));
    }
    let model = Seq2SeqModel {
        config,
        vocab,
        params,
        split_fingerprint: (!fingerprint.is_empty()).then_some(fingerprint),
    };
    if !model.params.is_finite() {
        return Err(Error::Checkpoint("non-finite parameter".into()));
    }
    Ok(model)
}

/// Writes via a temporary file and rename.
pub fn save(model: &Seq2SeqModel, path: &Path) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, to_bytes(model)).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<Seq2SeqModel> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    from_bytes(&bytes)
}

fn put_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u32).to_le_bytes());
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    put_u32(out, s.len());
    out.extend_from_slice(s.as_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Checkpoint(format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec())
            .map_err(|_| Error::Checkpoint("invalid UTF-8".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::generate::generate;
    use crate::neural::vocab::build_vocab;
    use crate::social_features::SocialVector;

    fn model(variant: Variant, precision: Precision) -> Seq2SeqModel {
        let corpus = [vec!["hello", "there", "please", "upload", "thanks"]];
        let vocab = build_vocab(corpus.iter().map(Vec::as_slice), 1).unwrap();
        let config = ModelConfig {
            variant,
            d_emb: 5,
            d_h: 7,
            precision,
        };
        let mut m = Seq2SeqModel::new(config, vocab, 4);
        m.split_fingerprint = Some("abc123".into());
        m
    }

    #[test]
    fn round_trip_is_bit_exact() {
        for variant in [Variant::Lexical, Variant::LexicalSocial] {
            for precision in [Precision::F32, Precision::F64] {
                let m = model(variant, precision);
                let bytes = to_bytes(&m);
                let back = from_bytes(&bytes).unwrap();
                assert_eq!(back, m);
                assert_eq!(to_bytes(&back), bytes);
            }
        }
    }

    #[test]
    fn generation_survives_save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        let m = model(Variant::LexicalSocial, Precision::F32);
        save(&m, &path).unwrap();
        let back = load(&path).unwrap();
        let prompt: Vec<String> = vec!["hello".into(), "upload".into()];
        let s = Some(SocialVector::new(0.4, 0.7));
        assert_eq!(
            generate(&m, &prompt, s, 10).unwrap(),
            generate(&back, &prompt, s, 10).unwrap()
        );
    }

    #[test]
    fn f32_files_use_four_bytes_per_value() {
        let m32 = model(Variant::Lexical, Precision::F32);
        let m64 = model(Variant::Lexical, Precision::F64);
        let n = m32.params.count();
        assert_eq!(to_bytes(&m64).len() - to_bytes(&m32).len(), 4 * n);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let bytes = to_bytes(&model(Variant::Lexical, Precision::F32));
        assert!(from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(from_bytes(&bad).is_err());
        let mut extra = bytes;
        extra.push(0);
        assert!(from_bytes(&extra).is_err());
    }
}
