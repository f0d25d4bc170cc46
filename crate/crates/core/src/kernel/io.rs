//! Binary kernel cache format.
//!
//! ```text
//! "DELK" | version u16 | model u8 (0 iid, 1 exact) | n u8 | d f64 or k u32
//! per input row: count u32, then count x (output index u32, probability f64)
//! CRC-32 (IEEE) of every preceding byte
//! ```
//! All integers little-endian; rows in input order, entries ascending.

use std::fs;
use std::path::{Path, PathBuf};

use super::{build_exact_kernel_with, build_iid_kernel_with, check_n, BuildOptions, ChannelKernel, ChannelModel, DEFAULT_MAX_N};
use crate::error::{Error, Result};

pub const KERNEL_MAGIC: &[u8; 4] = b"DELK";
pub const KERNEL_VERSION: u16 = 1;

const TAG_IID: u8 = 0;
const TAG_EXACT: u8 = 1;

pub(crate) fn encode(kernel: &ChannelKernel) -> Vec<u8> {
    let mut buf = Vec::with_capacity(16 + 4 * kernel.num_inputs() + 12 * kernel.nnz() + 4);
    buf.extend_from_slice(KERNEL_MAGIC);
    buf.extend_from_slice(&KERNEL_VERSION.to_le_bytes());
    match kernel.model() {
        ChannelModel::Iid { d } => {
            buf.push(TAG_IID);
            buf.push(kernel.n() as u8);
            buf.extend_from_slice(&d.to_le_bytes());
        }
        ChannelModel::Exact { k } => {
            buf.push(TAG_EXACT);
            buf.push(kernel.n() as u8);
            buf.extend_from_slice(&(k as u32).to_le_bytes());
        }
    }
    for row in kernel.rows() {
        buf.extend_from_slice(&(row.len() as u32).to_le_bytes());
        for (y, p) in row.iter() {
            buf.extend_from_slice(&y.to_le_bytes());
            buf.extend_from_slice(&p.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&buf);
    buf.extend_from_slice(&crc.to_le_bytes());
    buf
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::Format("truncated file".into()))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub(crate) fn decode(buf: &[u8], max_n: usize) -> Result<ChannelKernel> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(4)? != KERNEL_MAGIC {
        return Err(Error::Format("bad magic bytes".into()));
    }
    let version = r.u16()?;
    if version != KERNEL_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let tag = r.u8()?;
    let n = r.u8()? as usize;
    check_n(n, max_n)?;
    let model = match tag {
        TAG_IID => ChannelModel::Iid { d: r.f64()? },
        TAG_EXACT => ChannelModel::Exact { k: r.u32()? as usize },
        t => return Err(Error::Format(format!("unknown model tag {t}"))),
    };
    let mut rows = Vec::with_capacity(1 << n);
    for _ in 0..1usize << n {
        let count = r.u32()? as usize;
        // reject absurd counts before allocating
        if count > buf.len() / 12 {
            return Err(Error::Format("truncated file".into()));
        }
        let mut row = Vec::with_capacity(count);
        for _ in 0..count {
            row.push((r.u32()?, r.f64()?));
        }
        rows.push(row);
    }
    let payload_end = r.pos;
    let stored = r.u32()?;
    if r.pos != buf.len() {
        return Err(Error::Format(format!("{} trailing bytes", buf.len() - r.pos)));
    }
    let computed = crc32fast::hash(&buf[..payload_end]);
    if stored != computed {
        return Err(Error::Checksum { stored, computed });
    }
    ChannelKernel::from_rows(n, model, rows).map_err(|e| Error::Format(e.to_string()))
}

pub fn save_kernel(kernel: &ChannelKernel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, encode(kernel))?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Loads a kernel file, accepting `n` up to the default cap.
pub fn load_kernel(path: impl AsRef<Path>) -> Result<ChannelKernel> {
    load_kernel_with_cap(path, DEFAULT_MAX_N)
}

pub fn load_kernel_with_cap(path: impl AsRef<Path>, max_n: usize) -> Result<ChannelKernel> {
    decode(&fs::read(path)?, max_n)
}

fn cache_file(dir: &Path, n: usize, model: ChannelModel) -> PathBuf {
    let name = match model {
        ChannelModel::Iid { d } => format!("iid-n{n}-d{:016x}.delk", d.to_bits()),
        ChannelModel::Exact { k } => format!("exact-n{n}-k{k}.delk"),
    };
    dir.join(name)
}

/// Builds the kernel for `(n, model)`, reusing a cached copy under `dir`.
///
/// A missing or unreadable cache entry is rebuilt and rewritten.
pub fn cached_kernel(dir: Option<&Path>, n: usize, model: ChannelModel, opts: &BuildOptions) -> Result<ChannelKernel> {
    let build = || match model {
        ChannelModel::Iid { d } => build_iid_kernel_with(n, d, opts),
        ChannelModel::Exact { k } => build_exact_kernel_with(n, k, opts),
    };
    let Some(dir) = dir else {
        return build();
    };
    // validate arguments before touching the filesystem
    check_n(n, opts.max_n)?;
    let path = cache_file(dir, n, model);
    if let Ok(k) = load_kernel_with_cap(&path, opts.max_n) {
        if k.model() == model && k.n() == n {
            return Ok(k);
        }
    }
    let kernel = build()?;
    fs::create_dir_all(dir)?;
    save_kernel(&kernel, &path)?;
    Ok(kernel)
}

#[cfg(test)]
mod tests {
    use super::super::{build_exact_kernel, build_iid_kernel, HARD_MAX_N};
    use super::*;

    #[test]
    fn round_trip_is_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k.delk");
        let k = build_iid_kernel(6, 0.65).unwrap();
        save_kernel(&k, &path).unwrap();
        let back = load_kernel(&path).unwrap();
        assert_eq!(k, back);
        for (a, b) in k.rows().zip(back.rows()) {
            for (pa, pb) in a.probs.iter().zip(b.probs) {
                assert_eq!(pa.to_bits(), pb.to_bits());
            }
        }
        let k = build_exact_kernel(5, 3).unwrap();
        save_kernel(&k, &path).unwrap();
        assert_eq!(load_kernel(&path).unwrap(), k);
    }

    #[test]
    fn header_layout() {
        let buf = encode(&build_exact_kernel(2, 1).unwrap());
        assert_eq!(&buf[..4], b"DELK");
        assert_eq!(&buf[4..6], &[1, 0]);
        assert_eq!(buf[6], 1);
        assert_eq!(buf[7], 2);
        assert_eq!(&buf[8..12], &[1, 0, 0, 0]);
        // first row (00 -> "0" with prob 1): count 1, index 1, 1.0
        assert_eq!(&buf[12..16], &[1, 0, 0, 0]);
        assert_eq!(&buf[16..20], &[1, 0, 0, 0]);
        assert_eq!(&buf[20..28], &1.0f64.to_le_bytes());
        let crc = crc32fast::hash(&buf[..buf.len() - 4]);
        assert_eq!(&buf[buf.len() - 4..], &crc.to_le_bytes());
    }

    #[test]
    fn rejects_wrong_magic() {
        let mut buf = encode(&build_iid_kernel(3, 0.5).unwrap());
        buf[0] = b'X';
        assert!(matches!(decode(&buf, DEFAULT_MAX_N), Err(Error::Format(_))));
    }

    #[test]
    fn rejects_wrong_version() {
        let mut buf = encode(&build_iid_kernel(3, 0.5).unwrap());
        buf[4] = 2;
        assert!(matches!(decode(&buf, DEFAULT_MAX_N), Err(Error::Format(_))));
    }

    #[test]
    fn rejects_truncation_and_corruption() {
        let buf = encode(&build_iid_kernel(4, 0.3).unwrap());
        for cut in [3, 10, 30, buf.len() - 1] {
            assert!(decode(&buf[..cut], DEFAULT_MAX_N).is_err(), "cut at {cut}");
        }
        let mut bad = buf.clone();
        bad[40] ^= 0x10;
        assert!(matches!(decode(&bad, DEFAULT_MAX_N), Err(Error::Checksum { .. })));
    }

    #[test]
    fn rejects_n_beyond_cap() {
        let mut buf = encode(&build_iid_kernel(3, 0.5).unwrap());
        buf[7] = 15;
        assert!(matches!(decode(&buf, DEFAULT_MAX_N), Err(Error::Size { n: 15, cap: 14 })));
        buf[7] = 17;
        assert!(matches!(decode(&buf, 20), Err(Error::Size { n: 17, cap: HARD_MAX_N })));
    }

    #[test]
    fn cache_reuses_and_repairs() {
        let dir = tempfile::tempdir().unwrap();
        let opts = BuildOptions::default();
        let model = ChannelModel::Iid { d: 0.4 };
        let a = cached_kernel(Some(dir.path()), 5, model, &opts).unwrap();
        let path = cache_file(dir.path(), 5, model);
        assert!(path.exists());
        let b = cached_kernel(Some(dir.path()), 5, model, &opts).unwrap();
        assert_eq!(a, b);
        fs::write(&path, b"garbage").unwrap();
        let c = cached_kernel(Some(dir.path()), 5, model, &opts).unwrap();
        assert_eq!(a, c);
        assert_eq!(load_kernel(&path).unwrap(), a);
        assert!(cached_kernel(Some(dir.path()), 15, model, &opts).is_err());
    }
}
