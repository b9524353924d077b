//! Reader for the IDX format used by the MNIST family of datasets.
//!
//! Only unsigned-byte payloads (type code `0x08`) are supported.

use std::path::Path;

use brownne_core::mlp::{Dataset, Matrix};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum IdxError {
    #[error("io error reading {path}: {message}")]
    Io { path: String, message: String },
    #[error("file ends at byte {offset}, expected {needed} more bytes")]
    Truncated { offset: usize, needed: usize },
    #[error("bad magic at byte {offset}: {found:#010x}")]
    BadMagic { offset: usize, found: u32 },
    #[error("unsupported element type {code:#04x} at byte {offset}")]
    UnsupportedType { offset: usize, code: u8 },
    #[error("unexpected dimension count {found} at byte {offset}, want {expected}")]
    Rank { offset: usize, found: u8, expected: u8 },
    #[error("dimensions starting at byte {offset} overflow the address space")]
    DimOverflow { offset: usize },
    #[error("{extra} trailing bytes starting at byte {offset}")]
    Trailing { offset: usize, extra: usize },
    #[error("image file has {images} items but label file has {labels}")]
    CountMismatch { images: usize, labels: usize },
}

/// A decoded IDX tensor of bytes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdxArray {
    pub dims: Vec<usize>,
    pub data: Vec<u8>,
}

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32, IdxError> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| IdxError::Truncated {
            offset: bytes.len(),
            needed: offset + 4 - bytes.len().min(offset + 4),
        })
}

/// Decodes an IDX byte buffer with exactly `rank` dimensions.
pub fn parse(bytes: &[u8], rank: u8) -> Result<IdxArray, IdxError> {
    let magic = read_u32(bytes, 0)?;
    if magic >> 16 != 0 {
        return Err(IdxError::BadMagic {
            offset: 0,
            found: magic,
        });
    }
    let code = ((magic >> 8) & 0xff) as u8;
    if code != 0x08 {
        return Err(IdxError::UnsupportedType { offset: 2, code });
    }
    let found = (magic & 0xff) as u8;
    if found != rank {
        return Err(IdxError::Rank {
            offset: 3,
            found,
            expected: rank,
        });
    }
    let mut dims = Vec::with_capacity(rank as usize);
    for i in 0..rank as usize {
        dims.push(read_u32(bytes, 4 + 4 * i)? as usize);
    }
    let start = 4 + 4 * rank as usize;
    let end = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .and_then(|len| len.checked_add(start))
        .ok_or(IdxError::DimOverflow { offset: 4 })?;
    if bytes.len() < end {
        return Err(IdxError::Truncated {
            offset: bytes.len(),
            needed: end - bytes.len(),
        });
    }
    if bytes.len() > end {
        return Err(IdxError::Trailing {
            offset: end,
            extra: bytes.len() - end,
        });
    }
    Ok(IdxArray {
        dims,
        data: bytes[start..end].to_vec(),
    })
}

pub fn read(path: &Path, rank: u8) -> Result<IdxArray, IdxError> {
    let bytes = std::fs::read(path).map_err(|e| IdxError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse(&bytes, rank)
}

/// Pairs an image tensor (`count x h x w`) with a label vector. Pixels are
/// scaled to `[0, 1]`; the class count is one more than the largest label.
pub fn to_dataset(images: &IdxArray, labels: &IdxArray) -> Result<Dataset, IdxError> {
    let count = images.dims[0];
    if labels.dims[0] != count {
        return Err(IdxError::CountMismatch {
            images: count,
            labels: labels.dims[0],
        });
    }
    let width = if count == 0 { 0 } else { images.data.len() / count };
    let features: Vec<f64> = images.data.iter().map(|&b| b as f64 / 255.0).collect();
    let ys: Vec<u32> = labels.data.iter().map(|&b| b as u32).collect();
    let classes = ys.iter().max().map_or(0, |&m| m as usize + 1);
    let matrix = Matrix::from_vec(count, width, features).expect("sizes agree by construction");
    Ok(Dataset::new(matrix, ys, classes).expect("labels below class count by construction"))
}

pub fn load_dataset(images: &Path, labels: &Path) -> Result<Dataset, IdxError> {
    to_dataset(&read(images, 3)?, &read(labels, 1)?)
}

/// Encodes bytes as IDX (the inverse of [`parse`]).
pub fn encode(dims: &[usize], data: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 + 4 * dims.len() + data.len());
    out.extend_from_slice(&[0, 0, 0x08, dims.len() as u8]);
    for &d in dims {
        out.extend_from_slice(&(d as u32).to_be_bytes());
    }
    out.extend_from_slice(data);
    out
}
