//! Model container.
//!
//! ```text
//! magic    8 bytes  "AMBNETCM"
//! version  u32 LE
//! header   u32 LE length + JSON {arch, labels, meta}
//! tensors  u32 LE count, then per tensor: u64 LE length + f64 LE values
//! checksum 32 bytes SHA-256 of everything above
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::net::{Architecture, Params};
use super::{ClassifierError, ClassifierModel, TrainingMeta};
use crate::generators::FamilyLabel;

pub const MODEL_MAGIC: &[u8; 8] = b"AMBNETCM";
pub const MODEL_VERSION: u32 = 1;
const CHECKSUM_LEN: usize = 32;

#[derive(Serialize, Deserialize)]
struct Header {
    arch: Architecture,
    labels: Vec<FamilyLabel>,
    meta: Option<TrainingMeta>,
}

pub fn model_to_bytes(model: &ClassifierModel) -> Vec<u8> {
    let header = serde_json::to_vec(&Header {
        arch: model.arch,
        labels: model.labels.clone(),
        meta: model.meta.clone(),
    })
    .expect("header serializes");
    let mut out = Vec::with_capacity(64 + header.len() + 8 * model.params.len());
    out.extend_from_slice(MODEL_MAGIC);
    out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(&header);
    out.extend_from_slice(&(model.params.blocks.len() as u32).to_le_bytes());
    for block in &model.params.blocks {
        out.extend_from_slice(&(block.len() as u64).to_le_bytes());
        for v in block {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ClassifierError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| ClassifierError::Format("unexpected end of data".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, ClassifierError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, ClassifierError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub fn model_from_bytes(bytes: &[u8]) -> Result<ClassifierModel, ClassifierError> {
    if bytes.len() < MODEL_MAGIC.len() || &bytes[..MODEL_MAGIC.len()] != MODEL_MAGIC {
        return Err(ClassifierError::Format("not a model file (bad magic)".into()));
    }
    let mut r = Reader { bytes, pos: MODEL_MAGIC.len() };
    let version = r.u32().map_err(|_| ClassifierError::Checksum)?;
    if version != MODEL_VERSION {
        return Err(ClassifierError::VersionMismatch { expected: MODEL_VERSION, found: version });
    }
    if bytes.len() < r.pos + CHECKSUM_LEN {
        return Err(ClassifierError::Checksum);
    }
    let (body, stored) = bytes.split_at(bytes.len() - CHECKSUM_LEN);
    if Sha256::digest(body).as_slice() != stored {
        return Err(ClassifierError::Checksum);
    }

    let mut r = Reader { bytes: body, pos: r.pos };
    let header_len = r.u32()? as usize;
    let header: Header = serde_json::from_slice(r.take(header_len)?)
        .map_err(|e| ClassifierError::Format(format!("header: {e}")))?;
    header.arch.validate()?;
    let expected = header.arch.block_lens();
    let count = r.u32()? as usize;
    if count != expected.len() {
        return Err(ClassifierError::Format(format!(
            "{count} tensors, architecture needs {}",
            expected.len()
        )));
    }
    let mut blocks = Vec::with_capacity(count);
    for (i, &want) in expected.iter().enumerate() {
        let len = r.u64()? as usize;
        if len != want {
            return Err(ClassifierError::Format(format!(
                "tensor {i} has {len} values, architecture needs {want}"
            )));
        }
        let raw = r.take(len.checked_mul(8).ok_or_else(|| ClassifierError::Format("tensor too large".into()))?)?;
        blocks.push(
            raw.chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect(),
        );
    }
    if r.pos != body.len() {
        return Err(ClassifierError::Format("trailing bytes after tensors".into()));
    }
    if header.labels.len() != header.arch.classes {
        return Err(ClassifierError::Format("label count does not match output size".into()));
    }
    Ok(ClassifierModel {
        arch: header.arch,
        labels: header.labels,
        params: Params { blocks },
        meta: header.meta,
    })
}

pub fn save_model(model: &ClassifierModel, path: impl AsRef<Path>) -> Result<(), ClassifierError> {
    std::fs::write(path, model_to_bytes(model))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ClassifierModel, ClassifierError> {
    model_from_bytes(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amb::AmbImage;
    use crate::classifier::Hyperparameters;

    fn model() -> ClassifierModel {
        let mut m = ClassifierModel::untrained(Architecture::standard(24), 5).unwrap();
        m.meta = Some(TrainingMeta {
            seed: 5,
            epochs: 2,
            hyper: Hyperparameters::default(),
            initial_loss: 1.3862943611198906,
            loss_curve: vec![1.2345678901234567, 0.1 + 0.2, f64::MIN_POSITIVE],
            vra: Some(true),
            dataset: None,
        });
        m
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let m = model();
        let back = model_from_bytes(&model_to_bytes(&m)).unwrap();
        assert_eq!(back, m);
        for (a, b) in back.params.blocks.iter().flatten().zip(m.params.blocks.iter().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        let curve = &back.meta.as_ref().unwrap().loss_curve;
        assert_eq!(curve[1].to_bits(), (0.1f64 + 0.2).to_bits());
    }

    #[test]
    fn untrained_model_saves_and_predicts() {
        let m = ClassifierModel::untrained(Architecture::standard(24), 1).unwrap();
        let back = model_from_bytes(&model_to_bytes(&m)).unwrap();
        let p = back.predict(&AmbImage::black(24)).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn corruption_is_detected() {
        let bytes = model_to_bytes(&model());
        for cut in [bytes.len() - 1, bytes.len() / 2, 40, 13] {
            assert!(
                matches!(model_from_bytes(&bytes[..cut]), Err(ClassifierError::Checksum)),
                "cut at {cut}"
            );
        }
        let mut flipped = bytes.clone();
        flipped[100] ^= 1;
        assert!(matches!(model_from_bytes(&flipped), Err(ClassifierError::Checksum)));

        let mut wrong_version = bytes.clone();
        wrong_version[8] = 9;
        assert!(matches!(
            model_from_bytes(&wrong_version),
            Err(ClassifierError::VersionMismatch { expected: 1, found: 9 })
        ));
        assert!(matches!(model_from_bytes(b"PNG"), Err(ClassifierError::Format(_))));
    }

    #[test]
    fn file_round_trip() {
        let dir = std::env::temp_dir().join(format!("ambnet-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("m.bin");
        save_model(&model(), &path).unwrap();
        assert_eq!(load_model(&path).unwrap(), model());
        std::fs::remove_dir_all(dir).unwrap();
    }
}
