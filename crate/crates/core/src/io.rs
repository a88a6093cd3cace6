//! Raw complex-array interchange: little-endian f32 (re, im) pairs, no
//! header, length inferred from the file size.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub fn write_raw_c64(path: &Path, values: &[Complex64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for v in values {
        w.write_all(&(v.re as f32).to_le_bytes())?;
        w.write_all(&(v.im as f32).to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_raw_c64(path: &Path) -> Result<Vec<Complex64>> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::format(
            (bytes.len() - bytes.len() % 8) as u64,
            format!(
                "raw complex file length {} is not a multiple of 8 bytes",
                bytes.len()
            ),
        ));
    }
    let mut out = Vec::with_capacity(bytes.len() / 8);
    for chunk in bytes.chunks_exact(8) {
        let re = f32::from_le_bytes(chunk[0..4].try_into().unwrap());
        let im = f32::from_le_bytes(chunk[4..8].try_into().unwrap());
        out.push(Complex64::new(re as f64, im as f64));
    }
    Ok(out)
}
