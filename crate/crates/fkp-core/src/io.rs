//! Field snapshot files.
//!
//! Layout: one ASCII header line `FKPFIELD v1 nx ny lx ly space_tag`
//! followed by the row-major payload as 8-byte little-endian reals, or
//! interleaved real/imag pairs for spectral fields. Box lengths are printed
//! in shortest round-trip decimal form, so the round trip is bit-exact.

use ndarray::Array2;
use rustfft::num_complex::Complex64;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::FkpError;
use crate::field::{Field, SpaceTag};
use crate::grid::make_grid;
use crate::Result;

pub fn write_snapshot(path: &Path, u: &Field) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    let g = u.grid();
    writeln!(
        f,
        "FKPFIELD v1 {} {} {} {} {}",
        g.nx,
        g.ny,
        g.lx,
        g.ly,
        u.space().as_str()
    )?;
    match u.space() {
        SpaceTag::Real => {
            for v in u.values().unwrap().iter() {
                f.write_all(&v.to_le_bytes())?;
            }
        }
        SpaceTag::Spectral => {
            for c in u.coefficients().unwrap().iter() {
                f.write_all(&c.re.to_le_bytes())?;
                f.write_all(&c.im.to_le_bytes())?;
            }
        }
    }
    f.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<Field> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut header = String::new();
    r.read_line(&mut header)?;
    let parts: Vec<&str> = header.trim_end().split(' ').collect();
    if parts.len() != 7 || parts[0] != "FKPFIELD" || parts[1] != "v1" {
        return Err(FkpError::Format(format!("bad snapshot header: {header:?}")));
    }
    let nx: usize = parse(parts[2], "nx")?;
    let ny: usize = parse(parts[3], "ny")?;
    let lx: f64 = parse(parts[4], "lx")?;
    let ly: f64 = parse(parts[5], "ly")?;
    let grid = make_grid(nx, ny, lx, ly)?;
    match parts[6] {
        "real" => {
            let mut payload = vec![0u8; nx * ny * 8];
            r.read_exact(&mut payload)?;
            let values: Vec<f64> = payload
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                .collect();
            let arr = Array2::from_shape_vec((nx, ny), values)
                .map_err(|e| FkpError::Format(e.to_string()))?;
            Field::from_values(grid, arr)
        }
        "spectral" => {
            let mut payload = vec![0u8; nx * ny * 16];
            r.read_exact(&mut payload)?;
            let coeffs: Vec<Complex64> = payload
                .chunks_exact(16)
                .map(|b| {
                    Complex64::new(
                        f64::from_le_bytes(b[0..8].try_into().unwrap()),
                        f64::from_le_bytes(b[8..16].try_into().unwrap()),
                    )
                })
                .collect();
            let arr = Array2::from_shape_vec((nx, ny), coeffs)
                .map_err(|e| FkpError::Format(e.to_string()))?;
            Field::from_coefficients(grid, arr)
        }
        other => Err(FkpError::Format(format!("unknown space tag {other:?}"))),
    }
}

fn parse<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| FkpError::Format(format!("cannot parse {what} from {s:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = std::env::temp_dir().join(format!("fkp_io_test_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let grid = make_grid(16, 8, 2.5, std::f64::consts::PI).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let values = Array2::from_shape_fn((16, 8), |_| rng.gen_range(-5.0..5.0));
        let u = Field::from_values(grid, values).unwrap();

        let p = dir.join("real.fkp");
        write_snapshot(&p, &u).unwrap();
        let v = read_snapshot(&p).unwrap();
        assert_eq!(u.grid(), v.grid());
        assert_eq!(
            u.values().unwrap().as_slice().unwrap(),
            v.values().unwrap().as_slice().unwrap()
        );

        let us = u.to_spectral();
        let ps = dir.join("spec.fkp");
        write_snapshot(&ps, &us).unwrap();
        let vs = read_snapshot(&ps).unwrap();
        let a = us.coefficients().unwrap();
        let b = vs.coefficients().unwrap();
        assert!(a.iter().zip(b.iter()).all(|(x, y)| x == y));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn rejects_garbage() {
        let dir = std::env::temp_dir().join(format!("fkp_io_bad_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("bad.fkp");
        std::fs::write(&p, b"NOTAFIELD 1 2 3\n").unwrap();
        assert!(read_snapshot(&p).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }
}
