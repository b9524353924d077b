//! Binary model checkpoints.
//!
//! Layout (all integers little-endian):
//! `"BRWN"`, version `u32`, layer-width count `u32`, widths as `u32`,
//! one activation record per hidden layer (tag `u8`: 0 = ReLU,
//! 1 = Brownian followed by `n: u32`, `v: f64`, `alpha: f64`), the spec seed
//! `u64`, then for each layer its weights (row-major, `fan_out x fan_in`) and
//! biases as `f64`.

use brownne_core::brownian::BrownianSpec;
use brownne_core::mlp::{Activation, MlpSpec, Params};

pub const MAGIC: &[u8; 4] = b"BRWN";
pub const VERSION: u32 = 1;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CheckpointError {
    #[error("not a checkpoint (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("checkpoint truncated at byte {0}")]
    Truncated(usize),
    #[error("unknown activation tag {tag} at byte {offset}")]
    Tag { tag: u8, offset: usize },
    #[error("invalid model description: {0}")]
    Model(String),
    #[error("{0} trailing bytes")]
    Trailing(usize),
}

pub fn encode(spec: &MlpSpec, params: &Params) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(spec.widths().len() as u32).to_le_bytes());
    for &w in spec.widths() {
        out.extend_from_slice(&(w as u32).to_le_bytes());
    }
    for a in spec.activations() {
        match a {
            Activation::Relu => out.push(0),
            Activation::Brownian(b) => {
                out.push(1);
                out.extend_from_slice(&b.n().to_le_bytes());
                out.extend_from_slice(&b.v().to_le_bytes());
                out.extend_from_slice(&b.alpha().to_le_bytes());
            }
        }
    }
    out.extend_from_slice(&spec.seed().to_le_bytes());
    for l in &params.layers {
        for x in l.weights.iter().chain(&l.biases) {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl Cursor<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N], CheckpointError> {
        let s = self
            .bytes
            .get(self.at..self.at + N)
            .ok_or(CheckpointError::Truncated(self.bytes.len()))?;
        self.at += N;
        Ok(s.try_into().expect("slice of length N"))
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        self.take().map(u32::from_le_bytes)
    }

    fn f64(&mut self) -> Result<f64, CheckpointError> {
        self.take().map(f64::from_le_bytes)
    }
}

pub fn decode(bytes: &[u8]) -> Result<(MlpSpec, Params), CheckpointError> {
    let mut c = Cursor { bytes, at: 0 };
    if &c.take::<4>()? != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(CheckpointError::Version(version));
    }
    let count = c.u32()? as usize;
    if count < 2 || count > 1 << 16 {
        return Err(CheckpointError::Model(format!("{count} layer widths")));
    }
    let mut widths = Vec::with_capacity(count);
    for _ in 0..count {
        widths.push(c.u32()? as usize);
    }
    let mut activations = Vec::with_capacity(count - 2);
    for _ in 0..count - 2 {
        let offset = c.at;
        let [tag] = c.take::<1>()?;
        activations.push(match tag {
            0 => Activation::Relu,
            1 => {
                let n = c.u32()?;
                let v = c.f64()?;
                let alpha = c.f64()?;
                let b = BrownianSpec::new(n, v, alpha).map_err(|e| CheckpointError::Model(e.to_string()))?;
                Activation::Brownian(b)
            }
            tag => return Err(CheckpointError::Tag { tag, offset }),
        });
    }
    let seed = u64::from_le_bytes(c.take()?);
    let spec = MlpSpec::new(widths, activations, seed).map_err(|e| CheckpointError::Model(e.to_string()))?;
    let mut params = Params::zeros_like(&spec);
    for l in &mut params.layers {
        for x in l.weights.iter_mut().chain(l.biases.iter_mut()) {
            *x = c.f64()?;
        }
    }
    if c.at != bytes.len() {
        return Err(CheckpointError::Trailing(bytes.len() - c.at));
    }
    Ok((spec, params))
}
