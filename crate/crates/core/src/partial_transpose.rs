//! Partial transposition on subsystem A and the PPT predicate.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::HermitianMatrix;
use crate::operator_basis::{coords_to_matrix, CoordinateVector, StateFamily};
use crate::positivity::PsdTester;

fn check_partition(n: usize, n_a: usize, n_b: usize) -> Result<()> {
    if n_a * n_b != n || n_a == 0 || n_b == 0 {
        return Err(Error::InvalidPartition { n, n_a, n_b });
    }
    Ok(())
}

/// `<ij|ρ^{T_A}|kl> = <kj|ρ|il>` with composite index `i * n_b + j`.
pub fn partial_transpose(rho: &HermitianMatrix, n_a: usize, n_b: usize) -> Result<HermitianMatrix> {
    let n = rho.dim();
    check_partition(n, n_a, n_b)?;
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    partial_transpose_into(n_a, n_b, rho.entries(), &mut out);
    Ok(HermitianMatrix::from_raw(n, out))
}

#[inline]
pub(crate) fn partial_transpose_into(n_a: usize, n_b: usize, src: &[Complex64], dst: &mut [Complex64]) {
    let n = n_a * n_b;
    for i in 0..n_a {
        for k in 0..n_a {
            for j in 0..n_b {
                let row_dst = (i * n_b + j) * n;
                let row_src = (k * n_b + j) * n;
                for l in 0..n_b {
                    dst[row_dst + k * n_b + l] = src[row_src + i * n_b + l];
                }
            }
        }
    }
}

/// PPT test: the partial transpose passes the Newton positivity test. The
/// input is assumed to be a density matrix.
pub fn is_ppt(rho: &HermitianMatrix, n_a: usize, n_b: usize, tol: f64) -> Result<bool> {
    let pt = partial_transpose(rho, n_a, n_b)?;
    Ok(PsdTester::new(pt.dim()).is_psd(pt.entries(), tol))
}

pub fn ppt_predicate_on_coords(v: &CoordinateVector<'_>, tol: f64) -> Result<bool> {
    let f = v.family;
    is_ppt(&coords_to_matrix(v)?, f.n_a, f.n_b, tol)
}

/// Reusable buffers for the PPT test of one family.
#[derive(Debug, Clone)]
pub struct PptTester {
    n_a: usize,
    n_b: usize,
    buf: Vec<Complex64>,
    psd: PsdTester,
}

impl PptTester {
    pub fn new(n_a: usize, n_b: usize) -> Self {
        let n = n_a * n_b;
        Self {
            n_a,
            n_b,
            buf: vec![Complex64::new(0.0, 0.0); n * n],
            psd: PsdTester::new(n),
        }
    }

    pub fn for_family(family: &StateFamily) -> Self {
        Self::new(family.n_a, family.n_b)
    }

    pub fn is_ppt(&mut self, rho: &[Complex64], tol: f64) -> bool {
        partial_transpose_into(self.n_a, self.n_b, rho, &mut self.buf);
        self.psd.is_psd(&self.buf, tol)
    }
}

/// When partial transposition maps every generator of the family to `±`
/// itself (true for all tensor-product families built from Pauli and
/// Gell-Mann matrices), returns those signs: transposition in coordinates is
/// then a sign flip.
pub fn transpose_signs(family: &StateFamily) -> Option<Vec<f64>> {
    family
        .subspace_generators
        .iter()
        .map(|g| {
            let t = partial_transpose(g, family.n_a, family.n_b).ok()?;
            if t.hs_distance(g) < 1e-12 {
                Some(1.0)
            } else if (&t + g).hs_norm() < 1e-12 {
                Some(-1.0)
            } else {
                None
            }
        })
        .collect()
}
