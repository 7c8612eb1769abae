//! Positive semidefiniteness of unit-trace Hermitian matrices through power
//! traces and the Newton identities.
//!
//! A Hermitian matrix has a real-rooted characteristic polynomial
//! `det(ξI - A) = Σ (-1)^k c_k ξ^{n-k}`, so `A >= 0` exactly when every
//! coefficient `c_k` (the k-th elementary symmetric function of the
//! eigenvalues) is non-negative. The `c_k` follow from `p_k = Tr(A^k)` by the
//! Newton recursion, which needs only matrix products, never an
//! eigendecomposition.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{HermitianMatrix, INPUT_TOL};

/// Default relative tolerance for the coefficient signs.
pub const PSD_TOL: f64 = 1e-10;

/// `c_k` of the maximally mixed state `I_n/n`, `C(n,k)/n^k`, for `k = 0..=n`.
/// Sign tolerances are measured in these units.
pub fn mixed_state_coefficients(n: usize) -> Vec<f64> {
    let mut s = Vec::with_capacity(n + 1);
    s.push(1.0);
    for k in 1..=n {
        let prev = s[k - 1];
        s.push(prev * (n - k + 1) as f64 / (k as f64 * n as f64));
    }
    s
}

/// Coefficients `c_0..c_n` of the characteristic polynomial, up to sign.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonCoefficients {
    pub n: usize,
    pub c: Vec<f64>,
}

impl NewtonCoefficients {
    /// True iff every `c_k >= -tol · C(n,k)/n^k`.
    pub fn all_nonnegative(&self, tol: f64) -> bool {
        self.c
            .iter()
            .zip(mixed_state_coefficients(self.n))
            .all(|(&c, s)| c >= -tol * s)
    }
}

/// `p_k = Tr(A^k)` for `k = 1..=k_max`, using `k_max - 1` matrix products.
pub fn power_traces(a: &HermitianMatrix, k_max: usize) -> Result<Vec<f64>> {
    if k_max == 0 {
        return Err(Error::InvalidInput("k_max must be at least 1".into()));
    }
    let n = a.dim();
    let src = a.entries();
    let mut current = src.to_vec();
    let mut next = vec![Complex64::new(0.0, 0.0); n * n];
    let mut traces = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        if k > 1 {
            next.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            for i in 0..n {
                for l in 0..n {
                    let x = current[i * n + l];
                    for j in 0..n {
                        next[i * n + j] += x * src[l * n + j];
                    }
                }
            }
            std::mem::swap(&mut current, &mut next);
        }
        let tr: Complex64 = (0..n).map(|i| current[i * n + i]).sum();
        debug_assert!(tr.im.abs() <= 1e-10 * (1.0 + tr.re.abs()));
        traces.push(tr.re);
    }
    Ok(traces)
}

/// Runs `c_k = (1/k) Σ_{i=1..k} (-1)^{i+1} p_i c_{k-i}` for `k = 1..=n`.
/// `p[0]` holds `p_1`.
pub fn newton_coefficients(p: &[f64], n: usize) -> Result<NewtonCoefficients> {
    if p.len() < n {
        return Err(Error::InvalidInput(format!(
            "need {n} power traces, got {}",
            p.len()
        )));
    }
    if n >= 1 && (p[0] - 1.0).abs() > INPUT_TOL {
        return Err(Error::InvalidInput(format!(
            "matrix must have unit trace (trace {})",
            p[0]
        )));
    }
    let mut c = Vec::with_capacity(n + 1);
    c.push(1.0);
    for k in 1..=n {
        c.push(newton_step(p, &c, k));
    }
    Ok(NewtonCoefficients { n, c })
}

#[inline]
fn newton_step(p: &[f64], c: &[f64], k: usize) -> f64 {
    let mut acc = 0.0;
    for i in 1..=k {
        let term = p[i - 1] * c[k - i];
        if i % 2 == 1 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc / k as f64
}

/// Positive semidefiniteness from the signs of the Newton coefficients, with
/// `c_k >= -tol · C(n,k)/n^k` counted as non-negative.
pub fn is_psd_newton(a: &HermitianMatrix, tol: f64) -> Result<bool> {
    let n = a.dim();
    let tr = a.trace();
    if (tr - 1.0).abs() > INPUT_TOL {
        return Err(Error::InvalidInput(format!(
            "matrix must have unit trace (trace {tr})"
        )));
    }
    Ok(PsdTester::new(n).is_psd(a.entries(), tol))
}

/// Smallest eigenvalue from a dense Hermitian eigensolver.
pub fn min_eigenvalue(a: &HermitianMatrix) -> Result<f64> {
    Ok(eigenvalues(a)?.into_iter().fold(f64::INFINITY, f64::min))
}

/// All eigenvalues in ascending order.
pub fn eigenvalues(a: &HermitianMatrix) -> Result<Vec<f64>> {
    let n = a.dim();
    let m = DMatrix::from_row_slice(n, n, a.entries());
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::NumericalFailure("Hermitian eigensolver did not converge".into()))?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Eigenvalue oracle for [`is_psd_newton`].
pub fn is_psd_eigen(a: &HermitianMatrix, tol: f64) -> Result<bool> {
    Ok(min_eigenvalue(a)? >= -tol)
}

/// Radius `1/√(n(n-1))` of the Hilbert-Schmidt ball around `I_n/n` that
/// contains only positive (and, after partial transposition, PPT) matrices.
pub fn mehta_radius(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    let n = n as f64;
    Ok(1.0 / (n * (n - 1.0)).sqrt())
}

/// Radius `√((n-1)/n)` of the Hilbert-Schmidt ball around `I_n/n` that
/// contains every density matrix.
pub fn outer_radius(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    let n = n as f64;
    Ok(((n - 1.0) / n).sqrt())
}

/// Allocation-free PSD test for repeated use on matrices of one dimension.
///
/// Power traces come from Frobenius pairings of Hermitian powers,
/// `Tr(A^{i+j}) = <A^i, A^j>`, so only `A^2..A^{⌈n/2⌉}` are formed, and the
/// coefficients are checked as soon as each becomes available.
#[derive(Debug, Clone)]
pub struct PsdTester {
    n: usize,
    prev: Vec<Complex64>,
    cur: Vec<Complex64>,
    next: Vec<Complex64>,
    p: Vec<f64>,
    c: Vec<f64>,
    scale: Vec<f64>,
}

impl PsdTester {
    pub fn new(n: usize) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self {
            n,
            prev: vec![z; n * n],
            cur: vec![z; n * n],
            next: vec![z; n * n],
            p: vec![0.0; n + 1],
            c: vec![0.0; n + 1],
            scale: mixed_state_coefficients(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `a` must be row-major Hermitian of dimension `self.dim()`; its trace
    /// is taken as given (unit trace is the caller's responsibility).
    pub fn is_psd(&mut self, a: &[Complex64], tol: f64) -> bool {
        let n = self.n;
        debug_assert_eq!(a.len(), n * n);
        self.c[0] = 1.0;
        self.p[0] = (0..n).map(|i| a[i * n + i].re).sum();
        if n >= 2 {
            self.p[1] = frobenius(a, a);
        }
        if !self.check_up_to(1.min(n), tol) {
            return false;
        }
        if n >= 2 && !self.check_from(2, 2, tol) {
            return false;
        }
        let mut checked = 2;
        self.prev.copy_from_slice(a);
        self.cur.copy_from_slice(a);
        let mut m = 1;
        while checked < n {
            // cur = A^m -> next = A^{m+1}
            hermitian_power_step(n, &self.cur, a, &mut self.next);
            m += 1;
            std::mem::swap(&mut self.prev, &mut self.cur);
            std::mem::swap(&mut self.cur, &mut self.next);
            // prev = A^{m-1}, cur = A^m
            let odd = 2 * m - 1;
            self.p[odd - 1] = frobenius(&self.prev, &self.cur);
            if odd <= n && !self.check_from(odd, odd, tol) {
                return false;
            }
            let even = 2 * m;
            if even <= n {
                self.p[even - 1] = frobenius(&self.cur, &self.cur);
                if !self.check_from(even, even, tol) {
                    return false;
                }
            }
            checked = even.min(n);
        }
        true
    }

    fn check_up_to(&mut self, k_max: usize, tol: f64) -> bool {
        self.check_from(1, k_max, tol)
    }

    fn check_from(&mut self, k_lo: usize, k_hi: usize, tol: f64) -> bool {
        for k in k_lo..=k_hi {
            self.c[k] = newton_step(&self.p, &self.c, k);
            if self.c[k] < -tol * self.scale[k] {
                return false;
            }
        }
        true
    }
}

/// `Re Σ x_ij conj(y_ij)`, which equals `Tr(X Y)` for Hermitian `Y`.
#[inline]
fn frobenius(x: &[Complex64], y: &[Complex64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a.re * b.re + a.im * b.im).sum()
}

/// `out = x · a` for commuting Hermitian `x`, `a` (so the product is
/// Hermitian); only the upper triangle is computed.
#[inline]
fn hermitian_power_step(n: usize, x: &[Complex64], a: &[Complex64], out: &mut [Complex64]) {
    for i in 0..n {
        let xi = &x[i * n..(i + 1) * n];
        for j in i..n {
            // (X A)_ij = Σ_k X_ik A_kj = Σ_k X_ik conj(A_jk)
            let aj = &a[j * n..(j + 1) * n];
            let mut re = 0.0;
            let mut im = 0.0;
            for k in 0..n {
                let (p, q) = (xi[k], aj[k]);
                re += p.re * q.re + p.im * q.im;
                im += p.im * q.re - p.re * q.im;
            }
            out[i * n + j] = Complex64::new(re, im);
            out[j * n + i] = Complex64::new(re, -im);
        }
        out[i * n + i].im = 0.0;
    }
}
