//! Binary checkpoint: 8-byte magic, little-endian `u32` manifest length, a
//! UTF-8 JSON manifest, then the tensors as little-endian `f32`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::params::Seq2SeqParams;
use super::train::{fine_tune, train_full, EpochReport, TrainConfig};
use super::vocab::Vocabulary;
use crate::error::{format_err, Result};
use crate::numerics::Tensor;

pub const MAGIC: &[u8; 8] = b"SIMST001";
pub const FORMAT_VERSION: u32 = 1;

/// A trained model with everything needed to decode text.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub config: TrainConfig,
    pub vocab_src: Vocabulary,
    pub vocab_tgt: Vocabulary,
    pub params: Seq2SeqParams<f32>,
}

impl Checkpoint {
    /// Builds both vocabularies from the corpora and trains from scratch.
    pub fn train<S: AsRef<str>>(
        src: &[Vec<S>],
        tgt: &[Vec<S>],
        cfg: &TrainConfig,
        on_epoch: impl FnMut(&EpochReport),
    ) -> Result<(Self, Vec<EpochReport>)> {
        let vocab_src = Vocabulary::build(src, cfg.max_vocab)?;
        let vocab_tgt = Vocabulary::build(tgt, cfg.max_vocab)?;
        let src_ids: Vec<Vec<u32>> = src.iter().map(|s| vocab_src.encode(s)).collect();
        let tgt_ids: Vec<Vec<u32>> = tgt.iter().map(|s| vocab_tgt.encode(s)).collect();
        let (params, reports) = train_full(&src_ids, &tgt_ids, vocab_src.len(), vocab_tgt.len(), cfg, on_epoch)?;
        Ok((
            Self {
                config: cfg.clone(),
                vocab_src,
                vocab_tgt,
                params,
            },
            reports,
        ))
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        to_bytes(self)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        from_bytes(bytes)
    }

    /// Continues training on new text; out-of-vocabulary words map to `<unk>`.
    pub fn fine_tune<S: AsRef<str>>(
        &self,
        src: &[Vec<S>],
        tgt: &[Vec<S>],
        cfg: &TrainConfig,
        on_epoch: impl FnMut(&EpochReport),
    ) -> Result<(Self, Vec<EpochReport>)> {
        let src_ids: Vec<Vec<u32>> = src.iter().map(|s| self.vocab_src.encode(s)).collect();
        let tgt_ids: Vec<Vec<u32>> = tgt.iter().map(|s| self.vocab_tgt.encode(s)).collect();
        let (params, reports) = fine_tune(&self.params, &src_ids, &tgt_ids, cfg, on_epoch)?;
        Ok((Self { params, ..self.clone() }, reports))
    }
}

#[derive(Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
    /// Byte offset into the payload.
    offset: usize,
    /// Byte length.
    length: usize,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    version: u32,
    config: TrainConfig,
    vocab_src: Vocabulary,
    vocab_tgt: Vocabulary,
    tensors: Vec<TensorEntry>,
}

pub fn to_bytes(ckpt: &Checkpoint) -> Result<Vec<u8>> {
    let mut payload = Vec::new();
    let mut entries = Vec::new();
    for (name, t) in Seq2SeqParams::<f32>::tensor_names()
        .into_iter()
        .zip(ckpt.params.tensors())
    {
        let offset = payload.len();
        for v in t.data() {
            payload.extend_from_slice(&v.to_le_bytes());
        }
        entries.push(TensorEntry {
            name,
            shape: t.shape().to_vec(),
            offset,
            length: payload.len() - offset,
        });
    }
    let manifest = Manifest {
        version: FORMAT_VERSION,
        config: ckpt.config.clone(),
        vocab_src: ckpt.vocab_src.clone(),
        vocab_tgt: ckpt.vocab_tgt.clone(),
        tensors: entries,
    };
    let json = serde_json::to_vec(&manifest)?;
    let mut out = Vec::with_capacity(12 + json.len() + payload.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    out.extend_from_slice(&payload);
    Ok(out)
}

pub fn from_bytes(bytes: &[u8]) -> Result<Checkpoint> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(format_err("magic", "not a SIMST001 checkpoint"));
    }
    let rest = &bytes[MAGIC.len()..];
    if rest.len() < 4 {
        return Err(format_err("manifest_length", "file ends inside the header"));
    }
    let len = u32::from_le_bytes(rest[..4].try_into().expect("4 bytes")) as usize;
    let rest = &rest[4..];
    if rest.len() < len {
        return Err(format_err(
            "manifest_length",
            format!("manifest needs {len} bytes, {} remain", rest.len()),
        ));
    }
    let manifest: Manifest = serde_json::from_slice(&rest[..len]).map_err(|e| format_err("manifest", e.to_string()))?;
    if manifest.version != FORMAT_VERSION {
        return Err(format_err(
            "version",
            format!("unsupported version {} (expected {FORMAT_VERSION})", manifest.version),
        ));
    }
    let payload = &rest[len..];
    let names = Seq2SeqParams::<f32>::tensor_names();
    if manifest.tensors.len() != names.len() {
        return Err(format_err(
            "tensors",
            format!("{} tensors listed, model has {}", manifest.tensors.len(), names.len()),
        ));
    }
    let mut cursor = 0usize;
    let mut tensors = Vec::with_capacity(names.len());
    for (i, (entry, name)) in manifest.tensors.iter().zip(&names).enumerate() {
        let field = |f: &str| format!("tensors[{i}].{f}");
        if &entry.name != name {
            return Err(format_err(
                field("name"),
                format!("expected {name}, found {}", entry.name),
            ));
        }
        let count: usize = entry.shape.iter().product();
        if entry.length != 4 * count {
            return Err(format_err(
                field("length"),
                format!("{} bytes for shape {:?}", entry.length, entry.shape),
            ));
        }
        if entry.offset != cursor {
            return Err(format_err(
                field("offset"),
                format!("expected {cursor}, found {}", entry.offset),
            ));
        }
        let end = cursor + entry.length;
        if end > payload.len() {
            return Err(format_err(
                field("offset"),
                format!("blob ends at byte {end} but payload has {}", payload.len()),
            ));
        }
        let data = payload[cursor..end]
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes")))
            .collect();
        tensors.push(Tensor::new(entry.shape.clone(), data).map_err(|e| format_err(field("shape"), e.to_string()))?);
        cursor = end;
    }
    if cursor != payload.len() {
        return Err(format_err(
            "payload",
            format!("{} trailing bytes after the last tensor", payload.len() - cursor),
        ));
    }
    let params = Seq2SeqParams::from_tensors(tensors).map_err(|e| format_err("tensors", e.to_string()))?;
    if params.src_vocab_size() != manifest.vocab_src.len() {
        return Err(format_err("vocab_src", "size disagrees with src_embed rows"));
    }
    if params.tgt_vocab_size() != manifest.vocab_tgt.len() {
        return Err(format_err("vocab_tgt", "size disagrees with target tensors"));
    }
    Ok(Checkpoint {
        config: manifest.config,
        vocab_src: manifest.vocab_src,
        vocab_tgt: manifest.vocab_tgt,
        params,
    })
}

/// Writes atomically: a sibling temp file is renamed over `path`.
pub fn save_checkpoint(path: impl AsRef<Path>, ckpt: &Checkpoint) -> Result<()> {
    let path = path.as_ref();
    let bytes = to_bytes(ckpt)?;
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    from_bytes(&fs::read(path)?)
}
