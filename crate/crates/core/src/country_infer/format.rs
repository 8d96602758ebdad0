//! Binary model file.
//!
//! ```text
//! "SMCM"  u32 version  u32 dim  u32 hidden  u32 n_classes
//! n_classes x 2 bytes of ASCII alpha-2 codes
//! u32 meta_len  meta_len bytes of JSON training metadata
//! f64 w1[dim*hidden]  f64 b1[hidden]  f64 w2[n_classes*hidden]  f64 b2[n_classes]
//! ```
//!
//! All integers and floats are little-endian.

use crate::country::CountryCode;
use crate::error::{Error, Result};

use super::network::Network;
use super::{CountryModel, TrainingMeta};

pub const MAGIC: &[u8; 4] = b"SMCM";
pub const VERSION: u32 = 1;
pub const MAX_DIM: usize = 1 << 24;
pub const MAX_HIDDEN: usize = 4096;
pub const MAX_CLASSES: usize = 1024;
const MAX_WEIGHTS: usize = 1 << 28;

pub fn encode(model: &CountryModel) -> Result<Vec<u8>> {
    let net = &model.network;
    let meta = serde_json::to_vec(&model.training_meta)?;
    let n_weights = net.w1.len() + net.b1.len() + net.w2.len() + net.b2.len();
    let mut out = Vec::with_capacity(24 + 2 * model.classes.len() + meta.len() + 8 * n_weights);
    out.extend_from_slice(MAGIC);
    for v in [
        VERSION,
        net.dim as u32,
        net.hidden as u32,
        model.classes.len() as u32,
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for c in &model.classes {
        out.extend_from_slice(c.as_str().as_bytes());
    }
    out.extend_from_slice(&(meta.len() as u32).to_le_bytes());
    out.extend_from_slice(&meta);
    for w in net.w1.iter().chain(&net.b1).chain(&net.w2).chain(&net.b2) {
        out.extend_from_slice(&w.to_le_bytes());
    }
    Ok(out)
}

struct Cursor<'a> {
    buf: &'a [u8],
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len() < n {
            return Err(Error::Model(format!(
                "truncated model file while reading {what}"
            )));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize, what: &str) -> Result<Vec<f64>> {
        let bytes = self.take(n * 8, what)?;
        let out: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if out.iter().any(|w| !w.is_finite()) {
            return Err(Error::Model(format!("non-finite value in {what}")));
        }
        Ok(out)
    }
}

pub fn decode(bytes: &[u8]) -> Result<CountryModel> {
    let mut cur = Cursor { buf: bytes };
    if cur.take(4, "magic")? != MAGIC {
        return Err(Error::Model("not a country model file".into()));
    }
    let version = cur.u32("version")?;
    if version != VERSION {
        return Err(Error::Model(format!("unsupported model version {version}")));
    }
    let dim = cur.u32("dim")? as usize;
    let hidden = cur.u32("hidden")? as usize;
    let n_classes = cur.u32("class count")? as usize;
    if !(1..=MAX_DIM).contains(&dim)
        || !(1..=MAX_HIDDEN).contains(&hidden)
        || !(1..=MAX_CLASSES).contains(&n_classes)
    {
        return Err(Error::Model(format!(
            "model shape out of range: dim {dim}, hidden {hidden}, classes {n_classes}"
        )));
    }
    let n_weights = dim * hidden + hidden + n_classes * hidden + n_classes;
    if n_weights > MAX_WEIGHTS {
        return Err(Error::Model(format!(
            "model has too many weights ({n_weights})"
        )));
    }
    let mut classes = Vec::with_capacity(n_classes);
    for code in cur.take(2 * n_classes, "classes")?.chunks_exact(2) {
        let s = std::str::from_utf8(code)
            .map_err(|_| Error::Model("class code is not ASCII".into()))?;
        let c = CountryCode::new(s).ok_or_else(|| Error::Model(format!("bad class code {s:?}")))?;
        if classes.contains(&c) {
            return Err(Error::Model(format!("duplicate class {c}")));
        }
        classes.push(c);
    }
    let meta_len = cur.u32("metadata length")? as usize;
    let training_meta: TrainingMeta = serde_json::from_slice(cur.take(meta_len, "metadata")?)
        .map_err(|e| Error::Model(format!("bad training metadata: {e}")))?;
    training_meta.check()?;
    if cur.buf.len() != n_weights * 8 {
        return Err(Error::Model(format!(
            "expected {} weight bytes, found {}",
            n_weights * 8,
            cur.buf.len()
        )));
    }
    let network = Network {
        dim,
        hidden,
        n_classes,
        w1: cur.f64s(dim * hidden, "w1")?,
        b1: cur.f64s(hidden, "b1")?,
        w2: cur.f64s(n_classes * hidden, "w2")?,
        b2: cur.f64s(n_classes, "b2")?,
    };
    Ok(CountryModel {
        classes,
        network,
        training_meta,
    })
}
