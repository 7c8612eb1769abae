//! Dense complex Hermitian matrices stored row-major.
//!
//! The samplers evaluate millions of small (n <= 9) matrices, so the type is a
//! thin wrapper around a `Vec<Complex64>` with hand-written kernels instead of a
//! general linear-algebra container.

use std::fmt::Write as _;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance used when validating user-supplied matrices.
pub const INPUT_TOL: f64 = 1e-9;

/// Tolerance used by construction self-checks.
pub const CONSTRUCTION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    /// Builds a matrix from row-major entries, checking Hermiticity to
    /// [`INPUT_TOL`] and then symmetrizing so the stored value is exactly
    /// Hermitian.
    pub fn from_entries(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension(n));
        }
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                actual: data.len(),
            });
        }
        let mut worst = 0.0f64;
        for j in 0..n {
            for k in j..n {
                let d = (data[j * n + k] - data[k * n + j].conj()).norm();
                worst = worst.max(d);
            }
        }
        if worst > INPUT_TOL {
            return Err(Error::InvalidInput(format!(
                "matrix is not Hermitian (max asymmetry {worst:.3e})"
            )));
        }
        Ok(Self::symmetrized(n, data))
    }

    /// Builds from entries that are Hermitian by construction; the upper
    /// triangle is authoritative.
    pub(crate) fn symmetrized(n: usize, mut data: Vec<Complex64>) -> Self {
        for j in 0..n {
            data[j * n + j].im = 0.0;
            for k in (j + 1)..n {
                let avg = (data[j * n + k] + data[k * n + j].conj()) * 0.5;
                data[j * n + k] = avg;
                data[k * n + j] = avg.conj();
            }
        }
        Self { n, data }
    }

    pub(crate) fn from_raw(n: usize, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), n * n);
        Self { n, data }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for (i, &d) in diag.iter().enumerate() {
            data[i * n + i] = Complex64::new(d, 0.0);
        }
        Self { n, data }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, value: f64) -> Self {
        Self::from_real_diagonal(&vec![value; n])
    }

    /// Rank-one projector `|psi><psi|` (not normalized).
    pub fn projector(psi: &[Complex64]) -> Self {
        let n = psi.len();
        let mut data = Vec::with_capacity(n * n);
        for a in psi {
            for b in psi {
                data.push(a * b.conj());
            }
        }
        Self::symmetrized(n, data)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub(crate) fn entries_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.n + col]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.data[i * self.n + i].re).sum()
    }

    /// `Tr(A B)`, real for Hermitian arguments.
    pub fn hs_inner(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n, "dimension mismatch in hs_inner");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    pub fn hs_norm(&self) -> f64 {
        self.hs_inner(self).sqrt()
    }

    pub fn hs_distance(&self, other: &Self) -> f64 {
        (self - other).hs_norm()
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for j in 0..n {
            for k in j..n {
                worst = worst.max((self.data[j * n + k] - self.data[k * n + j].conj()).norm());
            }
        }
        worst
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// `self += s * other`
    pub fn add_scaled(&mut self, s: f64, other: &Self) {
        assert_eq!(self.n, other.n, "dimension mismatch in add_scaled");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (p, q) = (self.n, other.n);
        let n = p * q;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..p {
            for j in 0..p {
                let a = self.data[i * p + j];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..q {
                    for l in 0..q {
                        data[(i * q + k) * n + j * q + l] = a * other.data[k * q + l];
                    }
                }
            }
        }
        Self { n, data }
    }

    /// Full matrix product. The result is generally not Hermitian, so it is
    /// returned as raw row-major entries.
    pub fn matmul(&self, other: &Self) -> Vec<Complex64> {
        assert_eq!(self.n, other.n, "dimension mismatch in matmul");
        let n = self.n;
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                for j in 0..n {
                    out[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// Writes the matrix in the line-oriented text format: the dimension on
    /// the first line, then one row per line with entries `re+imj` at 17
    /// significant digits.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.n);
        for row in self.data.chunks(self.n) {
            let line: Vec<String> = row.iter().map(|z| format_complex(*z)).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (line_no, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty input".into(),
        })?;
        let n: usize = header.trim().parse().map_err(|_| Error::Parse {
            line: line_no + 1,
            msg: format!("expected dimension, found `{}`", header.trim()),
        })?;
        if n == 0 {
            return Err(Error::InvalidDimension(0));
        }
        let mut data = Vec::with_capacity(n * n);
        for _ in 0..n {
            let (line_no, line) = lines.next().ok_or(Error::Parse {
                line: line_no + 1,
                msg: format!("expected {n} rows"),
            })?;
            let row: Vec<Complex64> = line
                .split_whitespace()
                .map(parse_complex)
                .collect::<std::result::Result<_, _>>()
                .map_err(|msg| Error::Parse {
                    line: line_no + 1,
                    msg,
                })?;
            if row.len() != n {
                return Err(Error::Parse {
                    line: line_no + 1,
                    msg: format!("expected {n} entries, found {}", row.len()),
                });
            }
            data.extend(row);
        }
        if let Some((line_no, _)) = lines.next() {
            return Err(Error::Parse {
                line: line_no + 1,
                msg: "trailing data after matrix".into(),
            });
        }
        Self::from_entries(n, data)
    }
}

pub fn format_complex(z: Complex64) -> String {
    format!("{:.16e}{:+.16e}j", z.re, z.im)
}

/// Parses `re+imj`, `re-imj`, a bare real, or a bare imaginary `imj`.
pub fn parse_complex(token: &str) -> std::result::Result<Complex64, String> {
    let t = token.trim();
    let bad = || format!("malformed complex entry `{t}`");
    if let Some(body) = t.strip_suffix(['j', 'i']) {
        // split at the last sign that does not follow an exponent marker
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
        match split {
            Some(i) => {
                let re: f64 = body[..i].parse().map_err(|_| bad())?;
                let im_str = &body[i..];
                let im: f64 = match im_str {
                    "+" => 1.0,
                    "-" => -1.0,
                    s => s.parse().map_err(|_| bad())?,
                };
                Ok(Complex64::new(re, im))
            }
            None => {
                let im: f64 = match body {
                    "" | "+" => 1.0,
                    "-" => -1.0,
                    s => s.parse().map_err(|_| bad())?,
                };
                Ok(Complex64::new(0.0, im))
            }
        }
    } else {
        t.parse::<f64>()
            .map(|re| Complex64::new(re, 0.0))
            .map_err(|_| bad())
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: Self) -> HermitianMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch in add");
        HermitianMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: Self) -> HermitianMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch in sub");
        HermitianMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn mul(self, rhs: f64) -> HermitianMatrix {
        self.scale(rhs)
    }
}
