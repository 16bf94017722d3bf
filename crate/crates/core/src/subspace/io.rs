//! Model container: `SUBFR\x01`, method tag (u8), `d` (u64), `q_max` (u64), the mean
//! and the transform rows as little-endian `f64`, then the provenance string
//! (u32 length + UTF-8). A JSON mirror carries the same fields.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Method, SubspaceModel};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::Real;

pub const MAGIC: &[u8; 6] = b"SUBFR\x01";

pub(crate) struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    pub(crate) fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Format("truncated".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    pub(crate) fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub(crate) fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub(crate) fn u64(&mut self) -> Result<usize> {
        let v = u64::from_le_bytes(self.take(8)?.try_into().unwrap());
        usize::try_from(v).map_err(|_| Error::Format("length overflow".into()))
    }

    pub(crate) fn scalars<T: Real>(&mut self, n: usize) -> Result<Vec<T>> {
        let bytes = self.take(n.checked_mul(8).ok_or_else(|| Error::Format("length overflow".into()))?)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| T::from_f64(f64::from_le_bytes(c.try_into().unwrap())).unwrap())
            .collect())
    }

    pub(crate) fn string(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| Error::Format("invalid UTF-8".into()))
    }

    pub(crate) fn finish(self) -> Result<()> {
        if self.pos == self.buf.len() {
            Ok(())
        } else {
            Err(Error::Format("trailing bytes".into()))
        }
    }
}

pub(crate) fn put_u64(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u64).to_le_bytes());
}

pub(crate) fn put_scalars<T: Real>(out: &mut Vec<u8>, values: &[T]) {
    for v in values {
        out.extend_from_slice(&v.to_f64_lossless().to_le_bytes());
    }
}

pub(crate) fn put_string(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

impl<T: Real> SubspaceModel<T> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let d = self.dim();
        let q = self.q_max();
        let mut out = Vec::with_capacity(6 + 17 + 8 * d * (q + 1) + 4 + self.provenance.len());
        out.extend_from_slice(MAGIC);
        out.push(self.method.tag());
        put_u64(&mut out, d);
        put_u64(&mut out, q);
        put_scalars(&mut out, &self.mean);
        put_scalars(&mut out, self.transform.as_slice());
        put_string(&mut out, &self.provenance);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        if r.take(MAGIC.len())? != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let tag = r.u8()?;
        let method = Method::from_tag(tag).ok_or_else(|| Error::Format(format!("unknown method tag {tag}")))?;
        let d = r.u64()?;
        let q = r.u64()?;
        let mean = r.scalars(d)?;
        let transform = Mat::from_vec(q, d, r.scalars(q * d)?);
        let provenance = r.string()?;
        r.finish()?;
        Ok(SubspaceModel {
            method,
            mean,
            transform,
            provenance,
        })
    }
}

pub fn write_model<T: Real>(path: &Path, model: &SubspaceModel<T>) -> Result<()> {
    std::fs::write(path, model.to_bytes()).map_err(|e| Error::io(path, e))
}

pub fn read_model<T: Real>(path: &Path) -> Result<SubspaceModel<T>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    SubspaceModel::from_bytes(&bytes)
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    method: Method,
    d: usize,
    q_max: usize,
    provenance: String,
    mean: Vec<f64>,
    transform: Vec<Vec<f64>>,
}

pub fn write_model_json<T: Real>(path: &Path, model: &SubspaceModel<T>) -> Result<()> {
    let doc = ModelJson {
        method: model.method,
        d: model.dim(),
        q_max: model.q_max(),
        provenance: model.provenance.clone(),
        mean: model.mean.iter().map(|v| v.to_f64_lossless()).collect(),
        transform: model
            .transform
            .row_iter()
            .map(|r| r.iter().map(|v| v.to_f64_lossless()).collect())
            .collect(),
    };
    let text = serde_json::to_string_pretty(&doc).expect("model serializes");
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_model_json<T: Real>(path: &Path) -> Result<SubspaceModel<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let doc: ModelJson = serde_json::from_str(&text).map_err(|e| Error::BadFile {
        path: path.to_owned(),
        message: e.to_string(),
    })?;
    if doc.mean.len() != doc.d || doc.transform.len() != doc.q_max || doc.transform.iter().any(|r| r.len() != doc.d) {
        return Err(Error::BadFile {
            path: path.to_owned(),
            message: "inconsistent model dimensions".into(),
        });
    }
    let conv = |v: &f64| T::from_f64(*v).unwrap();
    Ok(SubspaceModel {
        method: doc.method,
        mean: doc.mean.iter().map(conv).collect(),
        transform: Mat::from_vec(doc.q_max, doc.d, doc.transform.iter().flatten().map(conv).collect()),
        provenance: doc.provenance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn binary_and_json_round_trip_bit_exact(
            d in 1usize..6, q in 0usize..5,
            values in proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 36),
            tag in 1u8..5,
        ) {
            let model = SubspaceModel {
                method: Method::from_tag(tag).unwrap(),
                mean: values[..d].to_vec(),
                transform: Mat::from_vec(q, d, values[6..6 + q * d].to_vec()),
                provenance: "abc123".into(),
            };
            let bytes = model.to_bytes();
            prop_assert_eq!(&bytes[..6], MAGIC);
            let back = SubspaceModel::<f64>::from_bytes(&bytes).unwrap();
            prop_assert_eq!(back.to_bytes(), bytes);
            prop_assert_eq!(&back, &model);

            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("m.json");
            write_model_json(&p, &model).unwrap();
            let j: SubspaceModel<f64> = read_model_json(&p).unwrap();
            prop_assert_eq!(j.to_bytes(), model.to_bytes());
        }
    }

    #[test]
    fn rejects_corrupt_containers() {
        let model = SubspaceModel {
            method: Method::Ere,
            mean: vec![1.0, 2.0],
            transform: Mat::identity(2),
            provenance: String::new(),
        };
        let bytes = model.to_bytes();
        assert!(SubspaceModel::<f64>::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(SubspaceModel::<f64>::from_bytes(&bad).is_err());
        let mut bad = bytes.clone();
        bad[6] = 9;
        assert!(SubspaceModel::<f64>::from_bytes(&bad).is_err());
        let mut long = bytes;
        long.push(0);
        assert!(SubspaceModel::<f64>::from_bytes(&long).is_err());
    }

    #[test]
    fn f32_models_survive_widening() {
        let model = SubspaceModel {
            method: Method::Pca,
            mean: vec![0.1f32, 0.3],
            transform: Mat::from_rows(&[[1.5f32, -2.25]]),
            provenance: "p".into(),
        };
        let back = SubspaceModel::<f32>::from_bytes(&model.to_bytes()).unwrap();
        assert_eq!(back, model);
    }
}
