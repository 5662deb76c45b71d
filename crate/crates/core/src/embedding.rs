//! KGBE: a dense binary container of per-pair token embedding matrices.
//!
//! Layout, little-endian, no padding:
//!
//! ```text
//! "KGBE" | u32 version=1 | u32 dim | u32 pair_count
//! per pair: u32 src_rows | u32 mt_rows | src_rows*dim f32 | mt_rows*dim f32
//! ```
//!
//! Matrices are row-major. Pair `i` aligns with corpus record `i`. Rows are
//! stored raw and L2-normalized on load by [`read_embeddings`].

use std::io::Write;

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"KGBE";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 16;

/// Rows with an L2 norm below this are rejected by [`normalize_rows`].
pub const MIN_ROW_NORM: f64 = 1e-12;

/// Row-major `rows x dim` matrix, one token embedding per row.
///
/// Values are held as `f64`; on write they are narrowed to `f32`, which is
/// exact for anything that was read from a KGBE file.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    rows: usize,
    dim: usize,
    data: Vec<f64>,
}

impl EmbeddingMatrix {
    pub fn new(rows: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDim);
        }
        if data.len() != rows * dim {
            return Err(Error::ShapeMismatch {
                rows,
                dim,
                len: data.len(),
            });
        }
        Ok(EmbeddingMatrix { rows, dim, data })
    }

    /// Builds from row slices; all rows must share one length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), dim, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter_rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }
}

/// Divides each row by its L2 norm.
pub fn normalize_rows(m: &EmbeddingMatrix) -> Result<EmbeddingMatrix> {
    let mut data = Vec::with_capacity(m.data.len());
    for (i, row) in m.iter_rows().enumerate() {
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm.is_nan() || norm < MIN_ROW_NORM {
            return Err(Error::NearZeroRow { row: i, norm });
        }
        data.extend(row.iter().map(|v| v / norm));
    }
    Ok(EmbeddingMatrix {
        rows: m.rows,
        dim: m.dim,
        data,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingPair {
    pub src: EmbeddingMatrix,
    pub mt: EmbeddingMatrix,
}

/// Parsed contents of a KGBE file.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingFile {
    pub dim: usize,
    pub pairs: Vec<EmbeddingPair>,
}

impl EmbeddingFile {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Exact byte length of a KGBE file with the given per-pair row counts.
pub fn encoded_len(dim: usize, rows: impl IntoIterator<Item = (usize, usize)>) -> usize {
    HEADER_LEN + rows.into_iter().map(|(s, m)| 8 + (s + m) * dim * 4).sum::<usize>()
}

fn check_matrix(m: &EmbeddingMatrix, dim: usize, pair: usize) -> Result<()> {
    if m.rows == 0 {
        return Err(Error::ZeroRows { pair });
    }
    if m.dim != dim {
        return Err(Error::DimMismatch {
            expected: dim,
            found: m.dim,
        });
    }
    if let Some(v) = m.data.iter().find(|v| !(**v as f32).is_finite()) {
        return Err(Error::NonFiniteInput(*v));
    }
    Ok(())
}

fn to_u32(n: usize) -> Result<u32> {
    u32::try_from(n).map_err(|_| {
        Error::Io(std::io::Error::new(
            std::io::ErrorKind::InvalidInput,
            format!("{n} does not fit in a u32 header field"),
        ))
    })
}

/// Encodes pairs into a KGBE byte stream. Validation happens before any byte
/// is written.
pub fn write_embeddings<W: Write>(mut w: W, pairs: &[EmbeddingPair], dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::ZeroDim);
    }
    for (i, p) in pairs.iter().enumerate() {
        check_matrix(&p.src, dim, i)?;
        check_matrix(&p.mt, dim, i)?;
    }
    let mut buf = Vec::with_capacity(encoded_len(dim, pairs.iter().map(|p| (p.src.rows, p.mt.rows))));
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&to_u32(dim)?.to_le_bytes());
    buf.extend_from_slice(&to_u32(pairs.len())?.to_le_bytes());
    for p in pairs {
        buf.extend_from_slice(&to_u32(p.src.rows)?.to_le_bytes());
        buf.extend_from_slice(&to_u32(p.mt.rows)?.to_le_bytes());
        for v in p.src.data.iter().chain(&p.mt.data) {
            buf.extend_from_slice(&(*v as f32).to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn encode_embeddings(pairs: &[EmbeddingPair], dim: usize) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    write_embeddings(&mut out, pairs, dim)?;
    Ok(out)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let available = self.bytes.len() - self.pos;
        if n > available {
            return Err(Error::Truncated {
                offset: self.pos,
                needed: n,
                available,
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn matrix(&mut self, rows: usize, dim: usize) -> Result<EmbeddingMatrix> {
        let start = self.pos;
        let n = rows.checked_mul(dim).and_then(|n| n.checked_mul(4));
        let raw = match n {
            Some(n) => self.take(n)?,
            None => {
                return Err(Error::Truncated {
                    offset: start,
                    needed: usize::MAX,
                    available: self.bytes.len() - start,
                })
            }
        };
        let mut data = Vec::with_capacity(rows * dim);
        for (k, c) in raw.chunks_exact(4).enumerate() {
            let v = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            if !v.is_finite() {
                return Err(Error::NonFiniteEmbedding { offset: start + 4 * k });
            }
            data.push(f64::from(v));
        }
        EmbeddingMatrix::new(rows, dim, data)
    }
}

/// Decodes a KGBE stream without normalizing. Values are the stored `f32`s
/// widened to `f64`.
pub fn read_embeddings_raw(bytes: &[u8]) -> Result<EmbeddingFile> {
    let mut cur = Cursor { bytes, pos: 0 };
    let available = bytes.len();
    if available < 4 {
        return Err(Error::Truncated {
            offset: 0,
            needed: 4,
            available,
        });
    }
    let magic = cur.take(4)?;
    if magic != MAGIC {
        return Err(Error::BadMagic {
            found: [magic[0], magic[1], magic[2], magic[3]],
        });
    }
    let version = cur.u32()?;
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let dim = cur.u32()? as usize;
    if dim == 0 {
        return Err(Error::ZeroDim);
    }
    let pair_count = cur.u32()? as usize;

    // Capacity bounded by what the byte length could possibly hold.
    let mut pairs = Vec::with_capacity(pair_count.min(bytes.len() / 8));
    for i in 0..pair_count {
        let src_rows = cur.u32()? as usize;
        let mt_rows = cur.u32()? as usize;
        if src_rows == 0 || mt_rows == 0 {
            return Err(Error::ZeroRows { pair: i });
        }
        let src = cur.matrix(src_rows, dim)?;
        let mt = cur.matrix(mt_rows, dim)?;
        pairs.push(EmbeddingPair { src, mt });
    }
    if cur.pos != bytes.len() {
        return Err(Error::TrailingBytes {
            offset: cur.pos,
            extra: bytes.len() - cur.pos,
        });
    }
    Ok(EmbeddingFile { dim, pairs })
}

/// Decodes a KGBE stream and L2-normalizes every row.
pub fn read_embeddings(bytes: &[u8]) -> Result<EmbeddingFile> {
    let raw = read_embeddings_raw(bytes)?;
    let pairs = raw
        .pairs
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let wrap = |e: Error| e.for_pair(&format!("#{i}"));
            Ok(EmbeddingPair {
                src: normalize_rows(&p.src).map_err(wrap)?,
                mt: normalize_rows(&p.mt).map_err(wrap)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EmbeddingFile { dim: raw.dim, pairs })
}
