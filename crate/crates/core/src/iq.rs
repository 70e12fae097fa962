//! Complex baseband IQ buffers and their on-disk format.
//!
//! Files are little-endian interleaved 32-bit-float I/Q pairs behind a
//! 16-byte header:
//!
//! ```text
//! offset 0  u32  magic  = 0x5246_4951  ("RFIQ")
//! offset 4  u32  version = 1
//! offset 8  f32  sample rate in Hz
//! offset 12 u32  number of complex samples
//! ```
//!
//! The in-memory path is `f64`; samples are narrowed to `f32` on write.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::io::{Read, Write};
use std::path::Path;

pub const IQ_MAGIC: u32 = 0x5246_4951;
pub const IQ_VERSION: u32 = 1;

/// A complex baseband buffer tagged with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct IqBuffer {
    pub fs: f64,
    pub samples: Vec<Complex64>,
}

impl IqBuffer {
    pub fn new(fs: f64, samples: Vec<Complex64>) -> Self {
        Self { fs, samples }
    }

    pub fn zeros(fs: f64, len: usize) -> Self {
        Self {
            fs,
            samples: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mean per-sample power `E[|x|^2]`.
    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|c| c.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::with_capacity(16 + self.samples.len() * 8);
        buf.extend_from_slice(&IQ_MAGIC.to_le_bytes());
        buf.extend_from_slice(&IQ_VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.fs as f32).to_le_bytes());
        buf.extend_from_slice(&(self.samples.len() as u32).to_le_bytes());
        for c in &self.samples {
            buf.extend_from_slice(&(c.re as f32).to_le_bytes());
            buf.extend_from_slice(&(c.im as f32).to_le_bytes());
        }
        let mut f =
            std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        f.write_all(&buf)
            .map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut f =
            std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut raw = Vec::new();
        f.read_to_end(&mut raw)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        if raw.len() < 16 {
            return Err(Error::Input(format!(
                "IQ file {} shorter than header",
                path.display()
            )));
        }
        let magic = u32::from_le_bytes(raw[0..4].try_into().unwrap());
        if magic != IQ_MAGIC {
            return Err(Error::Input(format!(
                "bad IQ magic {magic:#010x} in {}",
                path.display()
            )));
        }
        let version = u32::from_le_bytes(raw[4..8].try_into().unwrap());
        if version != IQ_VERSION {
            return Err(Error::Input(format!("unsupported IQ version {version}")));
        }
        let fs = f32::from_le_bytes(raw[8..12].try_into().unwrap()) as f64;
        let n = u32::from_le_bytes(raw[12..16].try_into().unwrap()) as usize;
        if raw.len() < 16 + n * 8 {
            return Err(Error::Input(format!(
                "IQ file {} truncated: header says {n} samples",
                path.display()
            )));
        }
        let mut samples = Vec::with_capacity(n);
        for i in 0..n {
            let off = 16 + i * 8;
            let re = f32::from_le_bytes(raw[off..off + 4].try_into().unwrap()) as f64;
            let im = f32::from_le_bytes(raw[off + 4..off + 8].try_into().unwrap()) as f64;
            samples.push(Complex64::new(re, im));
        }
        Ok(Self { fs, samples })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_preserves_f32_samples() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.iq");
        let buf = IqBuffer::new(
            1_000_000.0,
            vec![Complex64::new(0.5, -0.25), Complex64::new(1.0, 2.0)],
        );
        buf.write(&path).unwrap();
        let back = IqBuffer::read(&path).unwrap();
        assert_eq!(back.fs, 1_000_000.0);
        assert_eq!(back.samples, buf.samples);
    }

    #[test]
    fn rejects_bad_magic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.iq");
        std::fs::write(&path, [0u8; 24]).unwrap();
        assert!(matches!(IqBuffer::read(&path), Err(Error::Input(_))));
    }
}
