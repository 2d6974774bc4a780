//! Versioned little-endian binary model format.
//!
//! ```text
//! magic     8 bytes  "RTFOREST"
//! version   u32
//! provenance, schema_id                     str
//! n_features u32, feature names             str*
//! n_roles   u32, role names                 str*
//! seed u64, n_trees u32, max_features u32, min_leaf u32, bootstrap u8, balanced u8
//! per tree: n_nodes u32, then per node
//!   0u8 feature u32 threshold f64-bits left u32 right u32   (split)
//!   1u8 counts u32 * n_roles                                (leaf)
//! ```
//! `str` is a u32 byte length followed by UTF-8.

use std::fs;
use std::path::Path;

use super::{DecisionTree, Node, TrainedModel, TrainingMeta};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"RTFOREST";
pub const FORMAT_VERSION: u32 = 1;

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: usize) {
        let v = u32::try_from(v).expect("model field exceeds u32");
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u32(s.len());
        self.0.extend_from_slice(s.as_bytes());
    }
}

pub fn model_to_bytes(model: &TrainedModel) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.0.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    w.str(&model.provenance);
    w.str(&model.schema_id);
    w.u32(model.feature_names.len());
    for f in &model.feature_names {
        w.str(f);
    }
    w.u32(model.role_names.len());
    for r in &model.role_names {
        w.str(r);
    }
    let m = &model.meta;
    w.u64(m.seed);
    w.u32(m.n_trees);
    w.u32(m.max_features);
    w.u32(m.min_leaf);
    w.u8(m.bootstrap as u8);
    w.u8(m.balanced as u8);
    w.u32(model.trees.len());
    for t in &model.trees {
        w.u32(t.nodes.len());
        for node in &t.nodes {
            match node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    w.u8(0);
                    w.u32(*feature);
                    w.u64(threshold.to_bits());
                    w.u32(*left);
                    w.u32(*right);
                }
                Node::Leaf { counts } => {
                    w.u8(1);
                    for &c in counts {
                        w.u32(c as usize);
                    }
                }
            }
        }
    }
    w.0
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Format {
            offset: self.pos,
            msg: msg.into(),
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(self.err(format!(
                "unexpected end of file (need {n} bytes, {} left)",
                self.buf.len() - self.pos
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<usize> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes(b.try_into().unwrap()) as usize)
    }

    fn u64(&mut self) -> Result<u64> {
        let b = self.take(8)?;
        Ok(u64::from_le_bytes(b.try_into().unwrap()))
    }

    fn bool(&mut self) -> Result<bool> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            v => {
                self.pos -= 1;
                Err(self.err(format!("invalid boolean byte {v}")))
            }
        }
    }

    fn str(&mut self) -> Result<String> {
        let len = self.u32()?;
        let start = self.pos;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| Error::Format {
            offset: start,
            msg: "invalid UTF-8 in string".into(),
        })
    }

    /// Bounds a count by the bytes left, so corrupt lengths fail fast
    /// instead of allocating.
    fn count(&mut self, min_item_bytes: usize) -> Result<usize> {
        let at = self.pos;
        let n = self.u32()?;
        if n.saturating_mul(min_item_bytes) > self.buf.len() - self.pos {
            return Err(Error::Format {
                offset: at,
                msg: format!("count {n} exceeds remaining data"),
            });
        }
        Ok(n)
    }
}

pub fn model_from_bytes(buf: &[u8]) -> Result<TrainedModel> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(MAGIC.len())? != MAGIC {
        return Err(Error::Format {
            offset: 0,
            msg: "not a model file (bad magic)".into(),
        });
    }
    let version = r.u32()? as u32;
    if version != FORMAT_VERSION {
        return Err(Error::Version {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let provenance = r.str()?;
    let schema_id = r.str()?;
    let n_features = r.count(4)?;
    let feature_names = (0..n_features).map(|_| r.str()).collect::<Result<Vec<_>>>()?;
    let n_roles = r.count(4)?;
    let role_names = (0..n_roles).map(|_| r.str()).collect::<Result<Vec<_>>>()?;
    let meta = TrainingMeta {
        seed: r.u64()?,
        n_trees: r.u32()?,
        max_features: r.u32()?,
        min_leaf: r.u32()?,
        bootstrap: r.bool()?,
        balanced: r.bool()?,
    };
    let n_trees = r.count(4)?;
    let mut trees = Vec::with_capacity(n_trees);
    for _ in 0..n_trees {
        let n_nodes = r.count(1)?;
        let mut nodes = Vec::with_capacity(n_nodes);
        for _ in 0..n_nodes {
            let at = r.pos;
            match r.u8()? {
                0 => {
                    let feature = r.u32()?;
                    let threshold = f64::from_bits(r.u64()?);
                    let left = r.u32()?;
                    let right = r.u32()?;
                    if feature >= n_features {
                        return Err(Error::Format {
                            offset: at,
                            msg: format!("split feature {feature} >= {n_features}"),
                        });
                    }
                    if left >= n_nodes || right >= n_nodes {
                        return Err(Error::Format {
                            offset: at,
                            msg: "child index out of range".into(),
                        });
                    }
                    nodes.push(Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    });
                }
                1 => {
                    let counts = (0..n_roles)
                        .map(|_| r.u32().map(|c| c as u32))
                        .collect::<Result<Vec<_>>>()?;
                    if counts.iter().all(|&c| c == 0) {
                        return Err(Error::Format {
                            offset: at,
                            msg: "leaf with no samples".into(),
                        });
                    }
                    nodes.push(Node::Leaf { counts });
                }
                tag => {
                    return Err(Error::Format {
                        offset: at,
                        msg: format!("unknown node tag {tag}"),
                    })
                }
            }
        }
        if nodes.is_empty() {
            return Err(r.err("tree with no nodes"));
        }
        trees.push(DecisionTree { nodes });
    }
    if r.pos != buf.len() {
        return Err(r.err(format!("{} trailing bytes", buf.len() - r.pos)));
    }
    Ok(TrainedModel {
        trees,
        schema_id,
        feature_names,
        role_names,
        meta,
        provenance,
    })
}

pub fn save_model(model: &TrainedModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model_to_bytes(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel> {
    let path = path.as_ref();
    let buf = fs::read(path).map_err(|e| Error::io(path, e))?;
    model_from_bytes(&buf)
}
