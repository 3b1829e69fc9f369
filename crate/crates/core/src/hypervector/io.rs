//! `HVPB` container: magic `b"HVPB"`, `u16` version, `u64` rows, `u64` dim,
//! then `rows * ceil(dim / 32)` little-endian `u32` words.

use super::{words_for, PackedBitMatrix};
use crate::{Error, Result};
use std::io::{BufRead, Read, Write};

pub const CONTAINER_MAGIC: &[u8; 4] = b"HVPB";
const CONTAINER_VERSION: u16 = 1;

pub fn write_container<W: Write>(m: &PackedBitMatrix, mut w: W) -> Result<()> {
    w.write_all(CONTAINER_MAGIC)?;
    w.write_all(&CONTAINER_VERSION.to_le_bytes())?;
    w.write_all(&(m.rows() as u64).to_le_bytes())?;
    w.write_all(&(m.dim() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(m.storage_bytes());
    for word in m.words() {
        buf.extend_from_slice(&word.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)
        .map_err(|e| Error::Format(format!("truncated header: {e}")))?;
    Ok(b)
}

pub fn read_container<R: Read>(mut r: R) -> Result<PackedBitMatrix> {
    let magic: [u8; 4] = read_array(&mut r)?;
    if &magic != CONTAINER_MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let version = u16::from_le_bytes(read_array(&mut r)?);
    if version != CONTAINER_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let rows = u64::from_le_bytes(read_array(&mut r)?);
    let dim = u64::from_le_bytes(read_array(&mut r)?);
    let rows = usize::try_from(rows).map_err(|_| Error::Format("row count overflows".into()))?;
    let dim = usize::try_from(dim).map_err(|_| Error::Format("dim overflows".into()))?;
    if dim == 0 {
        return Err(Error::Format("dim must be at least 1".into()));
    }
    let n_words = rows
        .checked_mul(words_for(dim))
        .ok_or_else(|| Error::Format("matrix size overflows".into()))?;
    let n_bytes = n_words
        .checked_mul(4)
        .ok_or_else(|| Error::Format("matrix size overflows".into()))?;
    let mut bytes = Vec::new();
    r.take(n_bytes as u64).read_to_end(&mut bytes)?;
    if bytes.len() != n_bytes {
        return Err(Error::Format(format!(
            "expected {n_bytes} payload bytes, found {}",
            bytes.len()
        )));
    }
    let words = bytes
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    PackedBitMatrix::from_words(rows, dim, words)
}

/// One row per line, comma-separated 0/1 values, no header.
pub fn write_dense_csv<W: Write>(m: &PackedBitMatrix, w: W) -> Result<()> {
    let mut out = std::io::BufWriter::new(w);
    let bits = m.unpack();
    for row in bits.chunks(m.dim()).take(m.rows()) {
        let line: Vec<&str> = row.iter().map(|&b| if b == 1 { "1" } else { "0" }).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Parses the format written by [`write_dense_csv`]. Blank lines are skipped.
pub fn read_dense_csv<R: BufRead>(r: R) -> Result<PackedBitMatrix> {
    let mut dim = None;
    let mut bits = Vec::new();
    let mut rows = 0;
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let start = bits.len();
        for (col, field) in line.split(',').enumerate() {
            let value: u8 = field.trim().parse().map_err(|_| Error::Csv {
                path: "<dense csv>".into(),
                line: lineno as u64 + 1,
                column: col.to_string(),
                message: format!("'{field}' is not 0 or 1"),
            })?;
            if value > 1 {
                return Err(Error::NonBinary { row: rows, col, value });
            }
            bits.push(value);
        }
        let width = bits.len() - start;
        match dim {
            None => dim = Some(width),
            Some(d) if d != width => {
                return Err(Error::Csv {
                    path: "<dense csv>".into(),
                    line: lineno as u64 + 1,
                    column: width.to_string(),
                    message: format!("row has {width} values, expected {d}"),
                })
            }
            Some(_) => {}
        }
        rows += 1;
    }
    let dim = dim.ok_or_else(|| Error::EmptyInput("dense CSV has no rows".into()))?;
    PackedBitMatrix::pack(rows, dim, &bits)
}
