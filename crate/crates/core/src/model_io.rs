//! Trained-model persistence.
//!
//! Layout of a model file (all multi-byte values little-endian):
//!
//! ```text
//! magic    8 bytes  "SUBNNMDL"
//! version  u16      currently 1
//! head_len u32      byte length of the JSON header
//! header   JSON     mode, dimensions, k, ensemble shape, seed,
//!                   standardization stats, class names, index mode
//! payload  per submodel, in order:
//!            source_indices  m x u64
//!            sub_points      m x dim x f64
//!            labels          m x u64 (classification) or m x f64
//! ```
//!
//! The spatial index is rebuilt on load; the build is deterministic, so a
//! reloaded model predicts bit-identically.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::Standardizer;
use crate::ensemble::{DenoisedModel, SubNNModel};
use crate::error::{Error, Result};
use crate::knn::{LabelSet, TaskMode};
use crate::nn::{IndexMode, PointSet};

const MAGIC: &[u8; 8] = b"SUBNNMDL";
const VERSION: u16 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct ModelHeader {
    mode: String,
    dim: usize,
    k: usize,
    num_models: usize,
    subsample_size: usize,
    seed: u64,
    num_classes: Option<usize>,
    class_names: Option<Vec<String>>,
    means: Vec<f64>,
    stds: Vec<f64>,
    index_mode: String,
}

/// A reloaded model: the ensemble plus everything needed to serve raw
/// feature rows.
#[derive(Debug)]
pub struct PersistedModel {
    pub ensemble: SubNNModel,
    pub standardizer: Standardizer,
    pub class_names: Option<Vec<String>>,
    pub index_mode: IndexMode,
}

/// Writes `ensemble` and its serving context to `path`.
pub fn save_model(
    path: &Path,
    ensemble: &SubNNModel,
    standardizer: &Standardizer,
    class_names: Option<&[String]>,
    index_mode: IndexMode,
) -> Result<()> {
    let header = ModelHeader {
        mode: match ensemble.mode() {
            TaskMode::Classification => "classification".into(),
            TaskMode::Regression => "regression".into(),
        },
        dim: ensemble.dim(),
        k: ensemble.k(),
        num_models: ensemble.num_models(),
        subsample_size: ensemble.subsample_size(),
        seed: ensemble.seed(),
        num_classes: ensemble.num_classes(),
        class_names: class_names.map(|c| c.to_vec()),
        means: standardizer.means.clone(),
        stds: standardizer.stds.clone(),
        index_mode: match index_mode {
            IndexMode::Spatial => "spatial".into(),
            IndexMode::Brute => "brute".into(),
        },
    };
    let header_bytes = serde_json::to_vec(&header)
        .map_err(|e| Error::ModelFormat(format!("encode header: {e}")))?;

    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(header_bytes.len() as u32).to_le_bytes());
    out.extend_from_slice(&header_bytes);
    for sm in ensemble.submodels() {
        for &i in sm.source_indices() {
            out.extend_from_slice(&(i as u64).to_le_bytes());
        }
        for &v in sm.sub_points().as_flat() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        match sm.labels() {
            LabelSet::Classification { labels, .. } => {
                for &l in labels {
                    out.extend_from_slice(&(l as u64).to_le_bytes());
                }
            }
            LabelSet::Regression { targets } => {
                for &t in targets {
                    out.extend_from_slice(&t.to_le_bytes());
                }
            }
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a model written by [`save_model`].
pub fn load_model(path: &Path) -> Result<PersistedModel> {
    let bytes = fs::read(path)?;
    let mut cursor = Cursor { bytes: &bytes, pos: 0 };
    if cursor.take(8)? != MAGIC {
        return Err(Error::ModelFormat("bad magic; not a model file".into()));
    }
    let version = u16::from_le_bytes(cursor.take(2)?.try_into().expect("2 bytes"));
    if version != VERSION {
        return Err(Error::ModelFormat(format!("unsupported version {version}")));
    }
    let header_len = u32::from_le_bytes(cursor.take(4)?.try_into().expect("4 bytes")) as usize;
    let header: ModelHeader = serde_json::from_slice(cursor.take(header_len)?)
        .map_err(|e| Error::ModelFormat(format!("decode header: {e}")))?;

    let mode = match header.mode.as_str() {
        "classification" => TaskMode::Classification,
        "regression" => TaskMode::Regression,
        other => return Err(Error::ModelFormat(format!("unknown mode '{other}'"))),
    };
    let index_mode = match header.index_mode.as_str() {
        "spatial" => IndexMode::Spatial,
        "brute" => IndexMode::Brute,
        other => return Err(Error::ModelFormat(format!("unknown index mode '{other}'"))),
    };
    if header.means.len() != header.dim || header.stds.len() != header.dim {
        return Err(Error::ModelFormat("standardizer length disagrees with dim".into()));
    }

    let m = header.subsample_size;
    let mut submodels = Vec::with_capacity(header.num_models);
    for _ in 0..header.num_models {
        let mut source = Vec::with_capacity(m);
        for _ in 0..m {
            source.push(cursor.take_u64()? as usize);
        }
        let mut flat = Vec::with_capacity(m * header.dim);
        for _ in 0..m * header.dim {
            flat.push(cursor.take_f64()?);
        }
        let points = PointSet::from_flat(flat, header.dim)?;
        let labels = match mode {
            TaskMode::Classification => {
                let num_classes = header
                    .num_classes
                    .ok_or_else(|| Error::ModelFormat("classification model without class count".into()))?;
                let mut ls = Vec::with_capacity(m);
                for _ in 0..m {
                    ls.push(cursor.take_u64()? as usize);
                }
                LabelSet::classification(ls, num_classes)?
            }
            TaskMode::Regression => {
                let mut ts = Vec::with_capacity(m);
                for _ in 0..m {
                    ts.push(cursor.take_f64()?);
                }
                LabelSet::regression(ts)?
            }
        };
        submodels.push(DenoisedModel::from_parts(points, labels, source, index_mode)?);
    }
    if cursor.pos != bytes.len() {
        return Err(Error::ModelFormat(format!(
            "{} trailing bytes after payload",
            bytes.len() - cursor.pos
        )));
    }

    Ok(PersistedModel {
        ensemble: SubNNModel::from_submodels(submodels, header.k, header.seed)?,
        standardizer: Standardizer { means: header.means, stds: header.stds },
        class_names: header.class_names,
        index_mode,
    })
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.pos + len > self.bytes.len() {
            return Err(Error::ModelFormat("truncated model file".into()));
        }
        let slice = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(slice)
    }

    fn take_u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn take_f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}
