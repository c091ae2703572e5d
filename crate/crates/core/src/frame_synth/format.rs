//! `ISACFRM1` binary frame files.
//!
//! Layout: 8-byte magic, then little-endian `u32 n_rx, u32 n_chirps,
//! u32 n_samples, f64 fs_adc, f64 f_start, f64 chirp_slope`, then
//! `n_rx·n_chirps·n_samples` interleaved `f32` (I, Q) pairs, rx-major,
//! chirp-middle, sample-minor.

use std::io::{self, Read, Write};

use num_complex::Complex32;
use thiserror::Error;

use super::{FrameCube, FrameHeader};

pub const FRAME_MAGIC: &[u8; 8] = b"ISACFRM1";
const HEADER_LEN: usize = 8 + 3 * 4 + 3 * 8;

#[derive(Debug, Error)]
pub enum FrameFormatError {
    #[error("not an ISACFRM1 frame file (magic bytes {0:02x?})")]
    BadMagic([u8; 8]),

    #[error("truncated frame: header declares {expected} payload bytes, found {found}")]
    TruncatedPayload { expected: u64, found: u64 },

    #[error("frame dimensions {n_rx}x{n_chirps}x{n_samples} overflow the addressable size")]
    DimensionOverflow { n_rx: u64, n_chirps: u64, n_samples: u64 },

    #[error("{0} trailing bytes after the frame payload")]
    TrailingData(u64),

    #[error("frame header field `{0}` is not a positive finite number")]
    BadHeader(&'static str),

    #[error("frame i/o: {0}")]
    Io(#[from] io::Error),
}

pub fn write_frame<W: Write>(cube: &FrameCube, mut w: W) -> Result<(), FrameFormatError> {
    let h = &cube.header;
    let dims = [h.n_rx, h.n_chirps, h.n_samples];
    let mut buf = Vec::with_capacity(HEADER_LEN + cube.data.len() * 8);
    buf.extend_from_slice(FRAME_MAGIC);
    for d in dims {
        let d = u32::try_from(d).map_err(|_| FrameFormatError::DimensionOverflow {
            n_rx: h.n_rx as u64,
            n_chirps: h.n_chirps as u64,
            n_samples: h.n_samples as u64,
        })?;
        buf.extend_from_slice(&d.to_le_bytes());
    }
    for v in [h.fs_adc, h.f_start, h.chirp_slope] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for x in &cube.data {
        buf.extend_from_slice(&x.re.to_le_bytes());
        buf.extend_from_slice(&x.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

pub fn read_frame<R: Read>(mut r: R) -> Result<FrameCube, FrameFormatError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < 8 || &bytes[..8] != FRAME_MAGIC {
        let mut got = [0u8; 8];
        let n = bytes.len().min(8);
        got[..n].copy_from_slice(&bytes[..n]);
        return Err(FrameFormatError::BadMagic(got));
    }
    if bytes.len() < HEADER_LEN {
        return Err(FrameFormatError::TruncatedPayload {
            expected: HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as u64;
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let (n_rx, n_chirps, n_samples) = (u32_at(8), u32_at(12), u32_at(16));
    let payload = n_rx
        .checked_mul(n_chirps)
        .and_then(|v| v.checked_mul(n_samples))
        .and_then(|v| v.checked_mul(8))
        .filter(|&v| usize::try_from(v).is_ok())
        .ok_or(FrameFormatError::DimensionOverflow {
            n_rx,
            n_chirps,
            n_samples,
        })?;
    let header = FrameHeader {
        n_rx: n_rx as usize,
        n_chirps: n_chirps as usize,
        n_samples: n_samples as usize,
        fs_adc: f64_at(20),
        f_start: f64_at(28),
        chirp_slope: f64_at(36),
    };
    for (name, v) in [
        ("fs_adc", header.fs_adc),
        ("f_start", header.f_start),
        ("chirp_slope", header.chirp_slope),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(FrameFormatError::BadHeader(name));
        }
    }
    let found = (bytes.len() - HEADER_LEN) as u64;
    if found < payload {
        return Err(FrameFormatError::TruncatedPayload {
            expected: payload,
            found,
        });
    }
    if found > payload {
        return Err(FrameFormatError::TrailingData(found - payload));
    }
    let data = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| {
            Complex32::new(
                f32::from_le_bytes(c[..4].try_into().unwrap()),
                f32::from_le_bytes(c[4..].try_into().unwrap()),
            )
        })
        .collect();
    Ok(FrameCube {
        header,
        data,
        truth: None,
    })
}
