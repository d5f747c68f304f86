//! Model checkpoints.
//!
//! Little-endian binary:
//!
//! | bytes  | field                                                      |
//! |--------|------------------------------------------------------------|
//! | 4      | magic `PXCK`                                               |
//! | 4      | format version (u32, currently 1)                          |
//! | 7·8    | model config as u64: input size, groups, stem, stage 1, stage 2, head channels, init seed |
//! | 4      | tensor count (u32)                                         |
//!
//! then per tensor: name length (u16), UTF-8 name, dtype tag (u8, 0 = f64),
//! rank (u8), each dimension (u64), and the f64 values in row-major order.
//!
//! Tensors are the trainable buffers (`<layer>.weight`, `.bias`, `.gamma`,
//! `.beta`) followed by batch-norm statistics (`<layer>.running_mean`,
//! `.running_var`). Loading rebuilds the architecture from the stored config
//! and requires every tensor to be present with its expected shape.

use std::collections::BTreeMap;
use std::path::Path;

use proxemo_core::model::{build_model, ModelConfig, ProxEmoNet};
use proxemo_core::nn::Layer;
use proxemo_core::Error as CoreError;

use crate::error::{read_bytes, write_bytes, CliError, Result};

pub const MAGIC: &[u8; 4] = b"PXCK";
pub const VERSION: u32 = 1;
pub const DTYPE_F64: u8 = 0;

#[derive(Debug, Clone, PartialEq)]
pub struct NamedTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

/// Every stored tensor of `net`, in file order.
pub fn tensors(net: &ProxEmoNet) -> Vec<NamedTensor> {
    let mut out = Vec::new();
    let mut stats = Vec::new();
    for layer in net.network().layers() {
        match layer {
            Layer::Conv { name, params } => {
                out.push(NamedTensor {
                    name: format!("{name}.weight"),
                    shape: params.weight.shape().to_vec(),
                    data: params.weight.data().to_vec(),
                });
                out.push(NamedTensor {
                    name: format!("{name}.bias"),
                    shape: vec![params.bias.len()],
                    data: params.bias.clone(),
                });
            }
            Layer::BatchNorm { name, params } => {
                let c = params.gamma.len();
                for (suffix, v) in [("gamma", &params.gamma), ("beta", &params.beta)] {
                    out.push(NamedTensor { name: format!("{name}.{suffix}"), shape: vec![c], data: v.clone() });
                }
                for (suffix, v) in [("running_mean", &params.running_mean), ("running_var", &params.running_var)] {
                    stats.push(NamedTensor { name: format!("{name}.{suffix}"), shape: vec![c], data: v.clone() });
                }
            }
            _ => {}
        }
    }
    out.extend(stats);
    out
}

fn config_words(c: &ModelConfig) -> [u64; 7] {
    [
        c.input_size as u64,
        c.groups as u64,
        c.stem_channels as u64,
        c.stage1_channels as u64,
        c.stage2_channels as u64,
        c.head_channels as u64,
        c.seed,
    ]
}

pub fn encode(net: &ProxEmoNet) -> Vec<u8> {
    let tensors = tensors(net);
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for w in config_words(net.config()) {
        out.extend_from_slice(&w.to_le_bytes());
    }
    out.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
    for t in &tensors {
        out.extend_from_slice(&(t.name.len() as u16).to_le_bytes());
        out.extend_from_slice(t.name.as_bytes());
        out.push(DTYPE_F64);
        out.push(t.shape.len() as u8);
        for &d in &t.shape {
            out.extend_from_slice(&(d as u64).to_le_bytes());
        }
        for v in &t.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let end = self.pos.checked_add(n)?;
        let s = self.bytes.get(self.pos..end)?;
        self.pos = end;
        Some(s)
    }

    fn u8(&mut self) -> Option<u8> {
        Some(self.take(1)?[0])
    }

    fn u16(&mut self) -> Option<u16> {
        Some(u16::from_le_bytes(self.take(2)?.try_into().ok()?))
    }

    fn u32(&mut self) -> Option<u32> {
        Some(u32::from_le_bytes(self.take(4)?.try_into().ok()?))
    }

    fn u64(&mut self) -> Option<u64> {
        Some(u64::from_le_bytes(self.take(8)?.try_into().ok()?))
    }
}

/// Header config and raw tensors, without building a model.
pub fn decode_parts(bytes: &[u8], path: &Path) -> Result<(ModelConfig, Vec<NamedTensor>)> {
    let truncated = || CliError::malformed(path, "truncated checkpoint");
    let mut cur = Cursor { bytes, pos: 0 };
    if cur.take(4) != Some(MAGIC.as_slice()) {
        return Err(CliError::malformed(path, "not a PXCK checkpoint"));
    }
    let version = cur.u32().ok_or_else(truncated)?;
    if version != VERSION {
        return Err(CliError::malformed(path, format!("unsupported version {version}")));
    }
    let mut w = [0u64; 7];
    for x in &mut w {
        *x = cur.u64().ok_or_else(truncated)?;
    }
    let config = ModelConfig {
        input_size: w[0] as usize,
        groups: w[1] as usize,
        stem_channels: w[2] as usize,
        stage1_channels: w[3] as usize,
        stage2_channels: w[4] as usize,
        head_channels: w[5] as usize,
        seed: w[6],
    };
    let count = cur.u32().ok_or_else(truncated)?;
    let mut tensors = Vec::new();
    for _ in 0..count {
        let len = cur.u16().ok_or_else(truncated)? as usize;
        let name = std::str::from_utf8(cur.take(len).ok_or_else(truncated)?)
            .map_err(|_| CliError::malformed(path, "tensor name is not UTF-8"))?
            .to_string();
        let dtype = cur.u8().ok_or_else(truncated)?;
        if dtype != DTYPE_F64 {
            return Err(CliError::malformed(path, format!("{name}: unknown dtype {dtype}")));
        }
        let rank = cur.u8().ok_or_else(truncated)? as usize;
        let shape = (0..rank)
            .map(|_| cur.u64().map(|d| d as usize))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(truncated)?;
        let n = shape.iter().try_fold(1usize, |a, &d| a.checked_mul(d)).ok_or_else(truncated)?;
        let raw = cur.take(n.checked_mul(8).ok_or_else(truncated)?).ok_or_else(truncated)?;
        let data = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        tensors.push(NamedTensor { name, shape, data });
    }
    if cur.pos != bytes.len() {
        return Err(CliError::malformed(path, "trailing bytes after the last tensor"));
    }
    Ok((config, tensors))
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<ProxEmoNet> {
    let (config, stored) = decode_parts(bytes, path)?;
    let mut net = build_model(&config)?;
    let mut stored: BTreeMap<String, NamedTensor> = stored.into_iter().map(|t| (t.name.clone(), t)).collect();
    let expected = tensors(&net);
    let mut values = BTreeMap::new();
    for e in &expected {
        let t = stored
            .remove(&e.name)
            .ok_or_else(|| CliError::malformed(path, format!("missing tensor {}", e.name)))?;
        if t.shape != e.shape {
            return Err(CoreError::Shape(format!("{}: stored {:?}, model expects {:?}", e.name, t.shape, e.shape)).into());
        }
        values.insert(e.name.clone(), t.data);
    }
    if let Some(extra) = stored.keys().next() {
        return Err(CliError::malformed(path, format!("unexpected tensor {extra}")));
    }
    let names: Vec<String> = net.network().parameters().into_iter().map(|(n, _)| n).collect();
    for (name, buf) in names.iter().zip(net.network_mut().parameters_mut()) {
        buf.copy_from_slice(&values[name]);
    }
    for (name, mean, var) in net.network_mut().running_stats_mut() {
        *mean = values[&format!("{name}.running_mean")].clone();
        *var = values[&format!("{name}.running_var")].clone();
    }
    Ok(net)
}

pub fn save(path: &Path, net: &ProxEmoNet) -> Result<()> {
    write_bytes(path, &encode(net))
}

pub fn load(path: &Path) -> Result<ProxEmoNet> {
    decode(&read_bytes(path)?, path)
}
