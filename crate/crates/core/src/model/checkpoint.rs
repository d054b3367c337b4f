//! Single-file checkpoints.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic      8 bytes  "ASGCNCKP"
//! version    u32
//! header     u64 length + JSON {config, vocabulary, parameters}
//! per parameter, in name order:
//!   name     u32 length + UTF-8
//!   rank     u32, then rank × u64 extents
//!   data     extent-product × f64
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{check_layout, ModelConfig, ParameterStore};
use crate::autodiff::Array;
use crate::data::Vocabulary;
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"ASGCNCKP";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub config: ModelConfig,
    pub vocab: Vocabulary,
    pub params: ParameterStore,
}

#[derive(Serialize, Deserialize)]
struct Header {
    config: ModelConfig,
    /// Vocabulary entries from index 2 on.
    vocabulary: Vec<String>,
    parameters: usize,
}

pub fn save_checkpoint(path: &Path, config: &ModelConfig, vocab: &Vocabulary, params: &ParameterStore) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_checkpoint(&mut w, config, vocab, params)?;
    w.flush()?;
    Ok(())
}

pub fn write_checkpoint<W: Write>(
    w: &mut W,
    config: &ModelConfig,
    vocab: &Vocabulary,
    params: &ParameterStore,
) -> Result<()> {
    let header = Header { config: config.clone(), vocabulary: vocab.words().to_vec(), parameters: params.len() };
    let json = serde_json::to_vec(&header)?;
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    w.write_all(&(json.len() as u64).to_le_bytes())?;
    w.write_all(&json)?;
    for (name, a) in params.iter() {
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name.as_bytes())?;
        w.write_all(&(a.rank() as u32).to_le_bytes())?;
        for &d in a.shape() {
            w.write_all(&(d as u64).to_le_bytes())?;
        }
        for x in a.data() {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let mut r = BufReader::new(File::open(path)?);
    read_checkpoint(&mut r)
}

pub fn read_checkpoint<R: Read>(r: &mut R) -> Result<Checkpoint> {
    let mut magic = [0u8; 8];
    read_exact(r, &mut magic, "magic")?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint("not a checkpoint file (bad magic)".into()));
    }
    let version = read_u32(r, "version")?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let len = read_len(r, "header length")?;
    let mut json = vec![0u8; len];
    read_exact(r, &mut json, "header")?;
    let header: Header =
        serde_json::from_slice(&json).map_err(|e| Error::Checkpoint(format!("malformed header: {e}")))?;

    let mut params = ParameterStore::new();
    for _ in 0..header.parameters {
        let name_len = read_u32(r, "name length")? as usize;
        let mut name = vec![0u8; name_len];
        read_exact(r, &mut name, "name")?;
        let name = String::from_utf8(name).map_err(|_| Error::Checkpoint("parameter name is not UTF-8".into()))?;
        let rank = read_u32(r, "rank")? as usize;
        let shape = (0..rank).map(|_| read_len(r, "extent")).collect::<Result<Vec<_>>>()?;
        let count = shape.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        let count = count.ok_or_else(|| Error::Checkpoint(format!("{name}: shape {shape:?} overflows")))?;
        let mut bytes = vec![0u8; count * 8];
        read_exact(r, &mut bytes, &name)?;
        let data = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        let a = Array::new(shape, data).map_err(|e| Error::Checkpoint(format!("{name}: {e}")))?;
        params.insert(name, a);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Checkpoint("trailing bytes after last parameter".into()));
    }
    header.config.validate()?;
    check_layout(&header.config, &params).map_err(|e| Error::Checkpoint(e.to_string()))?;
    let vocab = Vocabulary::from_tokens(header.vocabulary);
    Ok(Checkpoint { config: header.config, vocab, params })
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Checkpoint(format!("truncated while reading {what}")),
        _ => Error::Io(e),
    })
}

fn read_u32<R: Read>(r: &mut R, what: &str) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b, what)?;
    Ok(u32::from_le_bytes(b))
}

fn read_len<R: Read>(r: &mut R, what: &str) -> Result<usize> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b, what)?;
    usize::try_from(u64::from_le_bytes(b)).map_err(|_| Error::Checkpoint(format!("{what} too large")))
}
