//! Binary vector files: a `u64` length followed by that many `f64`, all
//! little-endian.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{bail, Error, Result};

pub fn write_vector<W: Write>(mut w: W, data: &[f64]) -> Result<()> {
    w.write_all(&(data.len() as u64).to_le_bytes())?;
    for x in data {
        w.write_all(&x.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a vector, rejecting truncated files and trailing bytes.
pub fn read_vector<R: Read>(mut r: R) -> Result<Vec<f64>> {
    let mut head = [0u8; 8];
    r.read_exact(&mut head).map_err(|e| truncated(e, "length header"))?;
    let len = u64::from_le_bytes(head);
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() as u64 != len.saturating_mul(8) {
        bail!(Format, "vector file declares {len} values but holds {} bytes", body.len());
    }
    Ok(body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
}

fn truncated(e: std::io::Error, what: &str) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Format(format!("vector file truncated in {what}"))
    } else {
        Error::Io(e)
    }
}

pub fn save_vector(path: impl AsRef<Path>, data: &[f64]) -> Result<()> {
    write_vector(BufWriter::new(File::create(path)?), data)
}

pub fn load_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    read_vector(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let data = [0.0, -1.5, f64::MAX, 1e-300, std::f64::consts::PI];
        let mut buf = Vec::new();
        write_vector(&mut buf, &data).unwrap();
        assert_eq!(buf.len(), 8 + 8 * data.len());
        assert_eq!(&buf[..8], &5u64.to_le_bytes());
        assert_eq!(read_vector(&buf[..]).unwrap(), data);

        let mut empty = Vec::new();
        write_vector(&mut empty, &[]).unwrap();
        assert!(read_vector(&empty[..]).unwrap().is_empty());
    }

    #[test]
    fn malformed() {
        let mut buf = Vec::new();
        write_vector(&mut buf, &[1.0, 2.0]).unwrap();
        for cut in [0, 4, 8, 15, 23] {
            assert!(matches!(read_vector(&buf[..cut]), Err(Error::Format(_))), "cut {cut}");
        }
        buf.push(0);
        assert!(matches!(read_vector(&buf[..]), Err(Error::Format(_))));
        let huge = u64::MAX.to_le_bytes();
        assert!(matches!(read_vector(&huge[..]), Err(Error::Format(_))));
    }
}
