//! Binary field-grid format: a 32-byte header (magic, version, half extent,
//! spacing, dims) followed by row-major interleaved re/im little-endian f64,
//! plus a CSV export.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use fockbench_core::dbar::FieldGrid;
use fockbench_core::Complex64;

use crate::report::fmt_f64;

pub const MAGIC: &[u8; 4] = b"FGRD";
pub const VERSION: u32 = 1;

pub fn write_field(path: &Path, field: &FieldGrid) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut f = fs::File::create(path)?;
    f.write_all(MAGIC)?;
    f.write_all(&VERSION.to_le_bytes())?;
    f.write_all(&field.half_extent.to_le_bytes())?;
    f.write_all(&field.h().to_le_bytes())?;
    f.write_all(&(field.n as u32).to_le_bytes())?;
    f.write_all(&(field.n as u32).to_le_bytes())?;
    let mut buf = Vec::with_capacity(field.data.len() * 16);
    for v in &field.data {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    f.write_all(&buf)
}

fn bad(msg: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}

pub fn read_field(path: &Path) -> io::Result<FieldGrid> {
    let mut f = fs::File::open(path)?;
    let mut header = [0u8; 32];
    f.read_exact(&mut header)?;
    if &header[0..4] != MAGIC {
        return Err(bad("not a field-grid file (bad magic)"));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(bad("unsupported field-grid version"));
    }
    let half_extent = f64::from_le_bytes(header[8..16].try_into().expect("8 bytes"));
    let h = f64::from_le_bytes(header[16..24].try_into().expect("8 bytes"));
    let nx = u32::from_le_bytes(header[24..28].try_into().expect("4 bytes")) as usize;
    let ny = u32::from_le_bytes(header[28..32].try_into().expect("4 bytes")) as usize;
    if nx != ny {
        return Err(bad("field grids are square"));
    }
    let expect_h = 2.0 * half_extent / nx as f64;
    if (h - expect_h).abs() > 1e-12 * expect_h.abs() {
        return Err(bad("header spacing disagrees with extent and dims"));
    }
    let mut grid = FieldGrid::new(half_extent, nx)
        .map_err(|e| bad(&format!("header violates grid invariants: {e}")))?;
    let mut buf = vec![0u8; nx * ny * 16];
    f.read_exact(&mut buf)?;
    for (i, chunk) in buf.chunks_exact(16).enumerate() {
        let re = f64::from_le_bytes(chunk[0..8].try_into().expect("8 bytes"));
        let im = f64::from_le_bytes(chunk[8..16].try_into().expect("8 bytes"));
        grid.data[i] = Complex64::new(re, im);
    }
    Ok(grid)
}

/// CSV export: x, y, re, im per node.
pub fn export_csv(path: &Path, field: &FieldGrid) -> io::Result<()> {
    let mut rows = Vec::with_capacity(field.data.len());
    for iy in 0..field.n {
        for ix in 0..field.n {
            let z = field.node(ix, iy);
            let v = field.at(ix, iy);
            rows.push(vec![fmt_f64(z.re), fmt_f64(z.im), fmt_f64(v.re), fmt_f64(v.im)]);
        }
    }
    crate::report::write_csv(path, &["x", "y", "re", "im"], &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use fockbench_core::c64;

    #[test]
    fn round_trip_preserves_bits() {
        let dir = std::env::temp_dir().join("fockbench-fieldio-test");
        let path = dir.join("f.bin");
        let field = FieldGrid::sample(4.0, 256, |z| {
            c64((-z.norm_sqr()).exp(), z.re * 0.25)
        })
        .unwrap();
        write_field(&path, &field).unwrap();
        let back = read_field(&path).unwrap();
        assert_eq!(back.n, field.n);
        assert_eq!(back.half_extent, field.half_extent);
        assert!(field
            .data
            .iter()
            .zip(&back.data)
            .all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()));
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn rejects_corrupt_headers() {
        let dir = std::env::temp_dir().join("fockbench-fieldio-test2");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.bin");
        fs::write(&path, b"NOPE").unwrap();
        assert!(read_field(&path).is_err());
        let mut header = Vec::new();
        header.extend_from_slice(MAGIC);
        header.extend_from_slice(&VERSION.to_le_bytes());
        header.extend_from_slice(&4.0f64.to_le_bytes());
        header.extend_from_slice(&0.9f64.to_le_bytes()); // wrong spacing
        header.extend_from_slice(&256u32.to_le_bytes());
        header.extend_from_slice(&256u32.to_le_bytes());
        fs::write(&path, &header).unwrap();
        assert!(read_field(&path).is_err());
        fs::remove_dir_all(&dir).ok();
    }
}
