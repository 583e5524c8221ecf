//! Binary checkpoint: parameters, Adam moments and run metadata.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! "PPONAV1"                         7-byte magic
//! u32 format version
//! u32 input, u32 n_hidden, u32 hidden[n_hidden], u32 actions
//! u64 seed, u64 iteration, u64 adam step
//! u32 len, utf-8 run config text
//! u32 tensor count
//! per tensor: u16 name len, name, u8 ndim, u64 dims[ndim], f64 data[prod(dims)]
//! ```
//!
//! Tensors are the policy and value layers (`policy.0.weight`, ...) followed
//! by the Adam moments under `adam.m.` and `adam.v.` prefixes.

use std::path::Path;

use super::adam::AdamState;
use super::policy::{Architecture, PolicyParams};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 7] = b"PPONAV1";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub params: PolicyParams,
    pub adam: AdamState,
    pub seed: u64,
    pub iteration: u64,
    /// The run configuration the checkpoint was trained with, verbatim.
    pub config: String,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(64 + 3 * 8 * self.params.num_params());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        let arch = &self.params.arch;
        out.extend_from_slice(&(arch.input as u32).to_le_bytes());
        out.extend_from_slice(&(arch.hidden.len() as u32).to_le_bytes());
        for &h in &arch.hidden {
            out.extend_from_slice(&(h as u32).to_le_bytes());
        }
        out.extend_from_slice(&(arch.actions as u32).to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        out.extend_from_slice(&self.iteration.to_le_bytes());
        out.extend_from_slice(&self.adam.t.to_le_bytes());
        out.extend_from_slice(&(self.config.len() as u32).to_le_bytes());
        out.extend_from_slice(self.config.as_bytes());

        let layout = self.params.tensor_layout();
        out.extend_from_slice(&(3 * layout.len() as u32).to_le_bytes());
        for (prefix, p) in [("", &self.params), ("adam.m.", &self.adam.m), ("adam.v.", &self.adam.v)] {
            for ((name, shape), data) in layout.iter().zip(p.tensors()) {
                let name = format!("{prefix}{name}");
                out.extend_from_slice(&(name.len() as u16).to_le_bytes());
                out.extend_from_slice(name.as_bytes());
                out.push(shape.len() as u8);
                for &d in shape {
                    out.extend_from_slice(&(d as u64).to_le_bytes());
                }
                for v in data {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        let magic = r.take(MAGIC.len(), "magic")?;
        if magic != MAGIC {
            return Err(Error::Checkpoint(format!(
                "not a checkpoint: magic {:?}, expected {:?}",
                String::from_utf8_lossy(magic),
                std::str::from_utf8(MAGIC).unwrap()
            )));
        }
        let version = r.u32("format version")?;
        if version != FORMAT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported format version {version} (this build reads {FORMAT_VERSION})"
            )));
        }
        let input = r.u32("architecture input")? as usize;
        let n_hidden = r.u32("hidden layer count")? as usize;
        if n_hidden > 64 {
            return Err(Error::Checkpoint(format!("implausible hidden layer count {n_hidden}")));
        }
        let hidden = (0..n_hidden)
            .map(|_| r.u32("hidden size").map(|h| h as usize))
            .collect::<Result<Vec<_>>>()?;
        let actions = r.u32("action count")? as usize;
        let arch = Architecture { input, hidden, actions };
        arch.validate()
            .map_err(|e| Error::Checkpoint(format!("header architecture: {e}")))?;
        let seed = r.u64("seed")?;
        let iteration = r.u64("iteration")?;
        let adam_t = r.u64("adam step")?;
        let config_len = r.u32("config length")? as usize;
        let config = String::from_utf8(r.take(config_len, "config text")?.to_vec())
            .map_err(|_| Error::Checkpoint("config text is not utf-8".into()))?;
        let header = format!("version {version}, architecture {arch:?}, seed {seed}, iteration {iteration}");

        let mut params = PolicyParams::zeros(arch);
        let mut adam = AdamState::new(&params);
        adam.t = adam_t;
        let layout = params.tensor_layout();
        let count = r.u32("tensor count")? as usize;
        if count != 3 * layout.len() {
            return Err(Error::Checkpoint(format!(
                "{count} tensors, architecture needs {} ({header})",
                3 * layout.len()
            )));
        }
        for (prefix, target) in [("", &mut params), ("adam.m.", &mut adam.m), ("adam.v.", &mut adam.v)] {
            for ((name, shape), data) in layout.iter().zip(target.tensors_mut()) {
                let expected = format!("{prefix}{name}");
                let name_len = r.u16("tensor name length")? as usize;
                let got = r.take(name_len, "tensor name")?;
                if got != expected.as_bytes() {
                    return Err(Error::Checkpoint(format!(
                        "expected tensor {expected}, found {:?} ({header})",
                        String::from_utf8_lossy(got)
                    )));
                }
                let ndim = r.take(1, "tensor rank")?[0] as usize;
                let dims = (0..ndim)
                    .map(|_| r.u64("tensor dim").map(|d| d as usize))
                    .collect::<Result<Vec<_>>>()?;
                if &dims != shape {
                    return Err(Error::Checkpoint(format!(
                        "tensor {expected} has shape {dims:?}, architecture needs {shape:?} ({header})"
                    )));
                }
                let raw = r
                    .take(8 * data.len(), &expected)
                    .map_err(|e| Error::Checkpoint(format!("{e} ({header})")))?;
                for (v, chunk) in data.iter_mut().zip(raw.chunks_exact(8)) {
                    *v = f64::from_le_bytes(chunk.try_into().unwrap());
                }
            }
        }
        if r.pos != bytes.len() {
            return Err(Error::Checkpoint(format!(
                "{} trailing bytes after tensors ({header})",
                bytes.len() - r.pos
            )));
        }
        Ok(Checkpoint {
            params,
            adam,
            seed,
            iteration,
            config,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes).map_err(|e| match e {
            Error::Checkpoint(m) => Error::Checkpoint(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(Error::Checkpoint(format!(
                "truncated while reading {what}: need {n} bytes at offset {}, file has {}",
                self.pos,
                self.bytes.len()
            ))),
        }
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}
