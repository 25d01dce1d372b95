//! Binary and CSV snapshot formats.
//!
//! Factor files (`factors.bin`) are little-endian:
//!
//! ```text
//! magic   8 bytes  "SKFACTR1"
//! n_eq    u64
//! n_rc    u64
//! r       u64
//! records until end of file:
//!   t      f64
//!   step   u64
//!   U      n_eq·r f64, row-major
//!   sigma  r f64
//!   Y      n_rc·r f64, row-major
//! ```
//!
//! Full sensitivity dumps (`sensitivity.smat`) use magic `"SKSMATR1"`, then `n_eq`,
//! `n_rc` as u64 and records of `t`, `step`, then `S` row-major.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use skeletal_core::tdbcur::SensitivityFactors;

pub const FACTOR_MAGIC: &[u8; 8] = b"SKFACTR1";
pub const MATRIX_MAGIC: &[u8; 8] = b"SKSMATR1";

fn put_u64(w: &mut impl Write, v: u64) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn put_f64(w: &mut impl Write, v: f64) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn put_row_major(w: &mut impl Write, m: &DMatrix<f64>) -> io::Result<()> {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            put_f64(w, m[(i, j)])?;
        }
    }
    Ok(())
}

/// `Ok(None)` on a clean end of file.
fn get_u64(r: &mut impl Read) -> io::Result<Option<u64>> {
    let mut b = [0u8; 8];
    let mut got = 0;
    while got < 8 {
        let n = r.read(&mut b[got..])?;
        if n == 0 {
            if got == 0 {
                return Ok(None);
            }
            return Err(io::Error::new(io::ErrorKind::UnexpectedEof, "truncated record"));
        }
        got += n;
    }
    Ok(Some(u64::from_le_bytes(b)))
}

fn need_u64(r: &mut impl Read) -> io::Result<u64> {
    get_u64(r)?.ok_or_else(|| io::Error::new(io::ErrorKind::UnexpectedEof, "truncated record"))
}

fn need_f64(r: &mut impl Read) -> io::Result<f64> {
    need_u64(r).map(f64::from_bits)
}

fn get_row_major(r: &mut impl Read, rows: usize, cols: usize) -> io::Result<DMatrix<f64>> {
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = need_f64(r)?;
        }
    }
    Ok(m)
}

fn check_magic(r: &mut impl Read, magic: &[u8; 8]) -> io::Result<()> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    if &b != magic {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("bad magic {:?}, expected {:?}", String::from_utf8_lossy(&b), String::from_utf8_lossy(magic)),
        ));
    }
    Ok(())
}

fn dimension(v: u64) -> io::Result<usize> {
    usize::try_from(v)
        .ok()
        .filter(|&d| d > 0 && d < (1 << 32))
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidData, format!("implausible dimension {v}")))
}

/// Streams factor records to a file.
pub struct FactorWriter {
    out: BufWriter<File>,
    n_eq: usize,
    n_rc: usize,
    r: usize,
}

impl FactorWriter {
    pub fn create(path: &Path, n_eq: usize, n_rc: usize, r: usize) -> io::Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(FACTOR_MAGIC)?;
        for v in [n_eq, n_rc, r] {
            put_u64(&mut out, v as u64)?;
        }
        Ok(FactorWriter { out, n_eq, n_rc, r })
    }

    pub fn write(&mut self, f: &SensitivityFactors) -> io::Result<()> {
        if (f.n_eq(), f.n_rc(), f.rank()) != (self.n_eq, self.n_rc, self.r) {
            return Err(io::Error::new(io::ErrorKind::InvalidInput, "factor shape differs from file header"));
        }
        put_f64(&mut self.out, f.time)?;
        put_u64(&mut self.out, f.step as u64)?;
        put_row_major(&mut self.out, &f.u)?;
        for &s in &f.sigma {
            put_f64(&mut self.out, s)?;
        }
        put_row_major(&mut self.out, &f.y)
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.out.flush()
    }
}

pub fn read_factors(path: &Path) -> io::Result<Vec<SensitivityFactors>> {
    let mut r = BufReader::new(File::open(path)?);
    check_magic(&mut r, FACTOR_MAGIC)?;
    let n_eq = dimension(need_u64(&mut r)?)?;
    let n_rc = dimension(need_u64(&mut r)?)?;
    let rank = dimension(need_u64(&mut r)?)?;
    let mut out = Vec::new();
    while let Some(bits) = get_u64(&mut r)? {
        let time = f64::from_bits(bits);
        let step = need_u64(&mut r)? as usize;
        let u = get_row_major(&mut r, n_eq, rank)?;
        let sigma = (0..rank).map(|_| need_f64(&mut r)).collect::<io::Result<Vec<_>>>()?;
        let y = get_row_major(&mut r, n_rc, rank)?;
        out.push(SensitivityFactors { u, sigma, y, time, step });
    }
    Ok(out)
}

/// Streams full sensitivity matrices.
pub struct MatrixWriter {
    out: BufWriter<File>,
    shape: (usize, usize),
}

impl MatrixWriter {
    pub fn create(path: &Path, n_eq: usize, n_rc: usize) -> io::Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(MATRIX_MAGIC)?;
        put_u64(&mut out, n_eq as u64)?;
        put_u64(&mut out, n_rc as u64)?;
        Ok(MatrixWriter { out, shape: (n_eq, n_rc) })
    }

    pub fn write(&mut self, step: usize, time: f64, s: &DMatrix<f64>) -> io::Result<()> {
        if s.shape() != self.shape {
            return Err(io::Error::new(io::ErrorKind::InvalidInput, "matrix shape differs from file header"));
        }
        put_f64(&mut self.out, time)?;
        put_u64(&mut self.out, step as u64)?;
        put_row_major(&mut self.out, s)
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.out.flush()
    }
}

/// `(step, t, S)` records.
pub fn read_matrices(path: &Path) -> io::Result<Vec<(usize, f64, DMatrix<f64>)>> {
    let mut r = BufReader::new(File::open(path)?);
    check_magic(&mut r, MATRIX_MAGIC)?;
    let n_eq = dimension(need_u64(&mut r)?)?;
    let n_rc = dimension(need_u64(&mut r)?)?;
    let mut out = Vec::new();
    while let Some(bits) = get_u64(&mut r)? {
        let step = need_u64(&mut r)? as usize;
        out.push((step, f64::from_bits(bits), get_row_major(&mut r, n_eq, n_rc)?));
    }
    Ok(out)
}

/// Nine significant digits, the precision of every float in text output.
pub fn fmt9(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.is_finite() {
        format!("{x:.8e}")
    } else {
        format!("{x}")
    }
}

/// Singular-value tracks: `step,time,sigma_1,...,sigma_k`.
pub fn write_sigma_csv(path: &Path, k: usize, rows: &[(usize, f64, Vec<f64>)]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "step,time")?;
    for i in 1..=k {
        write!(w, ",sigma_{i}")?;
    }
    writeln!(w)?;
    for (step, t, s) in rows {
        write!(w, "{step},{}", fmt9(*t))?;
        for i in 0..k {
            write!(w, ",{}", s.get(i).map_or_else(|| "0".into(), |&v| fmt9(v)))?;
        }
        writeln!(w)?;
    }
    w.flush()
}

pub fn read_sigma_csv(path: &Path) -> io::Result<Vec<(usize, f64, Vec<f64>)>> {
    let text = std::fs::read_to_string(path)?;
    let bad = |line: usize| io::Error::new(io::ErrorKind::InvalidData, format!("{}:{line}: malformed row", path.display()));
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate().skip(1) {
        let mut it = line.split(',');
        let step = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad(n + 1))?;
        let t = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad(n + 1))?;
        let s = it.map(|v| v.parse::<f64>().map_err(|_| bad(n + 1))).collect::<io::Result<Vec<_>>>()?;
        out.push((step, t, s));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt9_digits() {
        assert_eq!(fmt9(1.0 / 3.0), "3.33333333e-1");
        assert_eq!(fmt9(0.0), "0");
        assert_eq!(fmt9(-2.5e10), "-2.50000000e10");
    }
}
