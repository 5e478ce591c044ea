//! On-disk tensor container.
//!
//! Format: magic "WTNS", u32 little-endian header length, UTF-8 JSON header
//! {"dtype", "shape", "layout"}, then raw little-endian element data in
//! row-major order. Rational elements serialize as (i64 numerator, i64
//! power-of-two denominator exponent) pairs.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Dtype, Dyadic, Layout, Result, Tensor, TensorData, TensorError};

const MAGIC: &[u8; 4] = b"WTNS";

#[derive(Serialize, Deserialize)]
struct Header {
    dtype: Dtype,
    shape: Vec<usize>,
    layout: Layout,
}

/// Write a tensor to `path` atomically (temp file + rename).
pub fn write_tensor(t: &Tensor, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let tmp = path.with_extension("wtns.tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        let header = Header {
            dtype: t.dtype(),
            shape: t.shape().to_vec(),
            layout: t.layout(),
        };
        let header_json = serde_json::to_vec(&header)
            .map_err(|e| TensorError::format(4, format!("header encode: {e}")))?;
        w.write_all(MAGIC)?;
        w.write_all(&(header_json.len() as u32).to_le_bytes())?;
        w.write_all(&header_json)?;
        match t.data() {
            TensorData::F64(v) => {
                for x in v {
                    w.write_all(&x.to_le_bytes())?;
                }
            }
            TensorData::I8(v) => {
                for x in v {
                    w.write_all(&x.to_le_bytes())?;
                }
            }
            TensorData::I16(v) => {
                for x in v {
                    w.write_all(&x.to_le_bytes())?;
                }
            }
            TensorData::I32(v) => {
                for x in v {
                    w.write_all(&x.to_le_bytes())?;
                }
            }
            TensorData::Rational(v) => {
                for d in v {
                    w.write_all(&d.num.to_le_bytes())?;
                    w.write_all(&d.exp.to_le_bytes())?;
                }
            }
        }
        w.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Read a tensor written by [`write_tensor`]. Errors carry the byte offset
/// where parsing failed.
pub fn read_tensor(path: impl AsRef<Path>) -> Result<Tensor> {
    let mut r = BufReader::new(File::open(path.as_ref())?);

    let mut magic = [0u8; 4];
    read_at(&mut r, &mut magic, 0)?;
    if &magic != MAGIC {
        return Err(TensorError::format(0, "bad magic, expected \"WTNS\""));
    }

    let mut len_bytes = [0u8; 4];
    read_at(&mut r, &mut len_bytes, 4)?;
    let header_len = u32::from_le_bytes(len_bytes) as usize;
    if header_len > 1 << 20 {
        return Err(TensorError::format(4, "unreasonable header length"));
    }

    let mut header_bytes = vec![0u8; header_len];
    read_at(&mut r, &mut header_bytes, 8)?;
    let header: Header = serde_json::from_slice(&header_bytes)
        .map_err(|e| TensorError::format(8, format!("header parse: {e}")))?;

    let count: usize = header.shape.iter().product();
    let payload_offset = 8 + header_len as u64;
    let payload_len = count * header.dtype.elem_size();
    let mut payload = vec![0u8; payload_len];
    read_at(&mut r, &mut payload, payload_offset)?;

    // trailing bytes are a format violation too
    let mut probe = [0u8; 1];
    if r.read(&mut probe)? != 0 {
        return Err(TensorError::format(
            payload_offset + payload_len as u64,
            "trailing bytes after payload",
        ));
    }

    let data = match header.dtype {
        Dtype::F64 => TensorData::F64(
            payload
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect(),
        ),
        Dtype::I8 => TensorData::I8(payload.iter().map(|&b| b as i8).collect()),
        Dtype::I16 => TensorData::I16(
            payload
                .chunks_exact(2)
                .map(|c| i16::from_le_bytes(c.try_into().unwrap()))
                .collect(),
        ),
        Dtype::I32 => TensorData::I32(
            payload
                .chunks_exact(4)
                .map(|c| i32::from_le_bytes(c.try_into().unwrap()))
                .collect(),
        ),
        Dtype::Rational => TensorData::Rational(
            payload
                .chunks_exact(16)
                .map(|c| {
                    Dyadic::new(
                        i64::from_le_bytes(c[0..8].try_into().unwrap()),
                        i64::from_le_bytes(c[8..16].try_into().unwrap()),
                    )
                })
                .collect(),
        ),
    };

    Tensor::new(header.shape, header.layout, data)
}

fn read_at(r: &mut impl Read, buf: &mut [u8], offset: u64) -> Result<()> {
    let mut filled = 0;
    while filled < buf.len() {
        let n = r.read(&mut buf[filled..])?;
        if n == 0 {
            return Err(TensorError::format(
                offset + filled as u64,
                format!("truncated: expected {} more bytes", buf.len() - filled),
            ));
        }
        filled += n;
    }
    Ok(())
}
