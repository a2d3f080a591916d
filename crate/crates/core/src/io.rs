//! Binary file formats.
//!
//! `T2T1` holds a tensor or a mask:
//!
//! ```text
//! b"T2T1" | n1: u32 | n2: u32 | n3: u32 | dtype: u8 | payload
//! ```
//!
//! with dtype 0 for complex doubles (interleaved re/im, little endian) and
//! dtype 1 for one byte per mask entry (0 or 1). The payload follows the
//! tensor storage order.
//!
//! `T2K1` holds sampled k-space values:
//!
//! ```text
//! b"T2K1" | m: u64 | m x (re: f64, im: f64) | len: u32 | mask path (utf-8)
//! ```
//!
//! All integers and floats are little endian. Writers go through a temporary
//! file in the target directory and rename it into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::mri::{KSpaceVector, Mask};
use crate::tensor::{ComplexTensor3, Dims, C64};

pub const TENSOR_MAGIC: &[u8; 4] = b"T2T1";
pub const KSPACE_MAGIC: &[u8; 4] = b"T2K1";
pub const DTYPE_COMPLEX: u8 = 0;
pub const DTYPE_MASK: u8 = 1;

const HEADER_LEN: usize = 17;

pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::Parameter(format!("'{}' is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

fn header(dims: Dims, dtype: u8) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(HEADER_LEN);
    out.extend_from_slice(TENSOR_MAGIC);
    for n in [dims.n1, dims.n2, dims.n3] {
        let n = u32::try_from(n).map_err(|_| Error::Format(format!("dimension {n} exceeds u32")))?;
        out.extend_from_slice(&n.to_le_bytes());
    }
    out.push(dtype);
    Ok(out)
}

fn parse_header(bytes: &[u8]) -> Result<(Dims, u8)> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!("{} bytes is too short for a T2T1 header", bytes.len())));
    }
    if &bytes[..4] != TENSOR_MAGIC {
        return Err(Error::Format("missing T2T1 magic".into()));
    }
    let dim = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let dims = Dims::new(dim(4), dim(8), dim(12));
    if dims.is_empty() {
        return Err(Error::Format(format!("T2T1 header has empty dimensions {dims}")));
    }
    Ok((dims, bytes[16]))
}

pub fn encode_tensor(x: &ComplexTensor3) -> Result<Vec<u8>> {
    let mut out = header(x.dims(), DTYPE_COMPLEX)?;
    out.reserve(x.data().len() * 16);
    for z in x.data() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_tensor(bytes: &[u8]) -> Result<ComplexTensor3> {
    let (dims, dtype) = parse_header(bytes)?;
    if dtype != DTYPE_COMPLEX {
        return Err(Error::Format(format!("expected complex tensor (dtype 0), found dtype {dtype}")));
    }
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != dims.len() * 16 {
        return Err(Error::Format(format!(
            "payload of {} bytes does not match a {dims} complex tensor",
            payload.len()
        )));
    }
    let data = payload
        .chunks_exact(16)
        .map(|c| {
            C64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    ComplexTensor3::new(dims, data)
}

pub fn encode_mask(mask: &Mask) -> Result<Vec<u8>> {
    let mut out = header(mask.dims(), DTYPE_MASK)?;
    out.extend(mask.bits().iter().map(|&b| b as u8));
    Ok(out)
}

pub fn decode_mask(bytes: &[u8]) -> Result<Mask> {
    let (dims, dtype) = parse_header(bytes)?;
    if dtype != DTYPE_MASK {
        return Err(Error::Format(format!("expected mask (dtype 1), found dtype {dtype}")));
    }
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != dims.len() {
        return Err(Error::Format(format!(
            "payload of {} bytes does not match a {dims} mask",
            payload.len()
        )));
    }
    let bits = payload
        .iter()
        .map(|&b| match b {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(Error::Format(format!("mask byte {other} is not 0 or 1"))),
        })
        .collect::<Result<Vec<_>>>()?;
    Mask::new(dims, bits)
}

/// Sampled k-space values plus the path of the mask they belong to.
#[derive(Clone, Debug, PartialEq)]
pub struct KSpaceFile {
    pub values: KSpaceVector,
    pub mask_path: String,
}

pub fn encode_kspace(k: &KSpaceFile) -> Result<Vec<u8>> {
    let values = k.values.values();
    let path = k.mask_path.as_bytes();
    let mut out = Vec::with_capacity(12 + values.len() * 16 + 4 + path.len());
    out.extend_from_slice(KSPACE_MAGIC);
    out.extend_from_slice(&(values.len() as u64).to_le_bytes());
    for z in values {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    let len = u32::try_from(path.len()).map_err(|_| Error::Format("mask path too long".into()))?;
    out.extend_from_slice(&len.to_le_bytes());
    out.extend_from_slice(path);
    Ok(out)
}

pub fn decode_kspace(bytes: &[u8]) -> Result<KSpaceFile> {
    if bytes.len() < 12 || &bytes[..4] != KSPACE_MAGIC {
        return Err(Error::Format("missing T2K1 magic".into()));
    }
    let m = u64::from_le_bytes(bytes[4..12].try_into().unwrap());
    let data_end = usize::try_from(m)
        .ok()
        .and_then(|m| m.checked_mul(16))
        .and_then(|n| n.checked_add(12))
        .filter(|&end| end + 4 <= bytes.len())
        .ok_or_else(|| Error::Format(format!("T2K1 file too short for {m} samples")))?;
    let values = bytes[12..data_end]
        .chunks_exact(16)
        .map(|c| {
            C64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    let len = u32::from_le_bytes(bytes[data_end..data_end + 4].try_into().unwrap()) as usize;
    let path = bytes
        .get(data_end + 4..data_end + 4 + len)
        .ok_or_else(|| Error::Format("T2K1 mask path truncated".into()))?;
    if data_end + 4 + len != bytes.len() {
        return Err(Error::Format("trailing bytes after T2K1 mask path".into()));
    }
    let mask_path = String::from_utf8(path.to_vec())
        .map_err(|_| Error::Format("T2K1 mask path is not utf-8".into()))?;
    Ok(KSpaceFile {
        values: KSpaceVector::new(values),
        mask_path,
    })
}

pub fn write_tensor(path: impl AsRef<Path>, x: &ComplexTensor3) -> Result<()> {
    write_atomic(path, &encode_tensor(x)?)
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<ComplexTensor3> {
    decode_tensor(&fs::read(path)?)
}

pub fn write_mask(path: impl AsRef<Path>, mask: &Mask) -> Result<()> {
    write_atomic(path, &encode_mask(mask)?)
}

pub fn read_mask(path: impl AsRef<Path>) -> Result<Mask> {
    decode_mask(&fs::read(path)?)
}

pub fn write_kspace(path: impl AsRef<Path>, k: &KSpaceFile) -> Result<()> {
    write_atomic(path, &encode_kspace(k)?)
}

pub fn read_kspace(path: impl AsRef<Path>) -> Result<KSpaceFile> {
    decode_kspace(&fs::read(path)?)
}

/// One line per slice, values space separated in descending order.
pub fn format_singular_values(values: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for slice in values {
        let line: Vec<String> = slice.iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// 8-bit binary PGM images of each frame's magnitude, all scaled by the
/// tensor's global peak magnitude.
pub fn magnitude_pgms(x: &ComplexTensor3) -> Vec<Vec<u8>> {
    let d = x.dims();
    let peak = x.max_abs();
    x.slices()
        .map(|frame| {
            let mut img = format!("P5\n{} {}\n255\n", d.n2, d.n1).into_bytes();
            img.extend(frame.iter().map(|z| {
                if peak > 0.0 {
                    (z.norm() / peak * 255.0).round().clamp(0.0, 255.0) as u8
                } else {
                    0
                }
            }));
            img
        })
        .collect()
}
