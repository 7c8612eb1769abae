//! Orthonormal Hermitian operator bases and the named state families.
//!
//! A family is an affine slice `I_n/n + span{s_i G_i}` of the unit-trace
//! Hermitian matrices, where `G_i` are tensor products of (unnormalized) Pauli
//! or Gell-Mann matrices and `s_i` the prefactor printed next to them in the
//! family's defining expansion. With these prefactors every family used here
//! is an isometric embedding: `‖s_i G_i‖_HS = 1` and the generators are
//! mutually orthogonal, so Euclidean distances between coordinate vectors equal
//! Hilbert-Schmidt distances between the matrices.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{HermitianMatrix, CONSTRUCTION_TOL, INPUT_TOL};
use crate::positivity::{mehta_radius, outer_radius};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn dense(n: usize, entries: &[(usize, usize, Complex64)]) -> HermitianMatrix {
    let mut data = vec![ZERO; n * n];
    for &(r, c, v) in entries {
        data[r * n + c] = v;
    }
    HermitianMatrix::from_raw(n, data)
}

/// The Pauli matrices `(σ_x, σ_y, σ_z)` without normalization.
pub fn pauli_matrices() -> [HermitianMatrix; 3] {
    [
        dense(2, &[(0, 1, ONE), (1, 0, ONE)]),
        dense(2, &[(0, 1, -I), (1, 0, I)]),
        dense(2, &[(0, 0, ONE), (1, 1, -ONE)]),
    ]
}

/// The eight Gell-Mann matrices `γ_1..γ_8`, normalized so `Tr(γ_i γ_j) = 2δ_ij`.
pub fn gell_mann_matrices() -> [HermitianMatrix; 8] {
    let r3 = 1.0 / 3f64.sqrt();
    [
        dense(3, &[(0, 1, ONE), (1, 0, ONE)]),
        dense(3, &[(0, 1, -I), (1, 0, I)]),
        dense(3, &[(0, 0, ONE), (1, 1, -ONE)]),
        dense(3, &[(0, 2, ONE), (2, 0, ONE)]),
        dense(3, &[(0, 2, -I), (2, 0, I)]),
        dense(3, &[(1, 2, ONE), (2, 1, ONE)]),
        dense(3, &[(1, 2, -I), (2, 1, I)]),
        dense(
            3,
            &[
                (0, 0, Complex64::new(r3, 0.0)),
                (1, 1, Complex64::new(r3, 0.0)),
                (2, 2, Complex64::new(-2.0 * r3, 0.0)),
            ],
        ),
    ]
}

/// An orthonormal basis `{I_n/√n, T_2, .., T_{n²}}` of the n×n Hermitian
/// matrices under the Hilbert-Schmidt inner product.
#[derive(Debug, Clone)]
pub struct OperatorBasis {
    pub dim: usize,
    pub identity_element: HermitianMatrix,
    pub generators: Vec<HermitianMatrix>,
}

impl OperatorBasis {
    fn new(dim: usize, generators: Vec<HermitianMatrix>) -> Self {
        Self {
            dim,
            identity_element: HermitianMatrix::scaled_identity(dim, 1.0 / (dim as f64).sqrt()),
            generators,
        }
    }

    /// Gram matrix `Tr(T_i T_j)` of the generators.
    pub fn gram(&self) -> Vec<Vec<f64>> {
        gram_matrix(&self.generators)
    }

    /// Largest deviation from tracelessness and from `Tr(T_i T_j) = δ_ij`.
    pub fn orthonormality_defect(&self) -> f64 {
        let trace = self
            .generators
            .iter()
            .map(|g| g.trace().abs())
            .fold(0.0, f64::max);
        let gram = self.gram();
        let mut worst = trace;
        for (i, row) in gram.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }
}

pub(crate) fn gram_matrix(ops: &[HermitianMatrix]) -> Vec<Vec<f64>> {
    ops.iter()
        .map(|a| ops.iter().map(|b| a.hs_inner(b)).collect())
        .collect()
}

pub fn pauli_basis() -> OperatorBasis {
    let gens = pauli_matrices().iter().map(|p| p.scale(1.0 / SQRT_2)).collect();
    OperatorBasis::new(2, gens)
}

pub fn gell_mann_basis() -> OperatorBasis {
    let gens = gell_mann_matrices()
        .iter()
        .map(|g| g.scale(1.0 / SQRT_2))
        .collect();
    OperatorBasis::new(3, gens)
}

/// Generalized Gell-Mann basis for `n >= 2`: all symmetric generators
/// `(E_jk + E_kj)/√2` for `j < k` in lexicographic order, then the
/// antisymmetric ones `(-iE_jk + iE_kj)/√2` in the same order, then the
/// diagonal `diag(1,..,1,-l,0,..)/√(l(l+1))` for `l = 1..n-1`.
pub fn generalized_gell_mann_basis(n: usize) -> Result<OperatorBasis> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    let h = 1.0 / SQRT_2;
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|j| ((j + 1)..n).map(move |k| (j, k)))
        .collect();
    let mut gens = Vec::with_capacity(n * n - 1);
    for &(j, k) in &pairs {
        gens.push(dense(n, &[(j, k, ONE * h), (k, j, ONE * h)]));
    }
    for &(j, k) in &pairs {
        gens.push(dense(n, &[(j, k, -I * h), (k, j, I * h)]));
    }
    for l in 1..n {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut diag = vec![0.0; n];
        diag[..l].iter_mut().for_each(|d| *d = norm);
        diag[l] = -(l as f64) * norm;
        gens.push(HermitianMatrix::from_real_diagonal(&diag));
    }
    Ok(OperatorBasis::new(n, gens))
}

/// The named families of bipartite states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    BellDiagonal,
    XStates,
    RebitRebit,
    TwoQubit,
    QbqtI,
    QbqtIi,
    QbqtIii,
    QubitQutrit,
    QubitQuquart,
    QutritQutrit,
}

impl FamilyName {
    pub const ALL: [FamilyName; 10] = [
        FamilyName::BellDiagonal,
        FamilyName::XStates,
        FamilyName::RebitRebit,
        FamilyName::TwoQubit,
        FamilyName::QbqtI,
        FamilyName::QbqtIi,
        FamilyName::QbqtIii,
        FamilyName::QubitQutrit,
        FamilyName::QubitQuquart,
        FamilyName::QutritQutrit,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FamilyName::BellDiagonal => "bell_diagonal",
            FamilyName::XStates => "x_states",
            FamilyName::RebitRebit => "rebit_rebit",
            FamilyName::TwoQubit => "two_qubit",
            FamilyName::QbqtI => "qbqt_i",
            FamilyName::QbqtIi => "qbqt_ii",
            FamilyName::QbqtIii => "qbqt_iii",
            FamilyName::QubitQutrit => "qubit_qutrit",
            FamilyName::QubitQuquart => "qubit_ququart",
            FamilyName::QutritQutrit => "qutrit_qutrit",
        }
    }

    /// True for the two-qubit families the Bell tests apply to.
    pub fn is_two_qubit(self) -> bool {
        matches!(
            self,
            FamilyName::BellDiagonal
                | FamilyName::XStates
                | FamilyName::RebitRebit
                | FamilyName::TwoQubit
        )
    }
}

impl fmt::Display for FamilyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FamilyName::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

/// Nonzero entries of `s_i G_i`, used to embed coordinates without dense work.
#[derive(Debug, Clone)]
struct SparseTerm {
    entries: Vec<(usize, Complex64)>,
}

#[derive(Debug, Clone)]
pub struct StateFamily {
    pub name: FamilyName,
    pub n: usize,
    pub n_a: usize,
    pub n_b: usize,
    pub subspace_generators: Vec<HermitianMatrix>,
    pub coefficient_scale: Vec<f64>,
    sparse: Vec<SparseTerm>,
    /// `s_i² ‖G_i‖²`, the squared Hilbert-Schmidt length of each coordinate axis.
    axis_norm_sq: Vec<f64>,
}

impl StateFamily {
    fn new(
        name: FamilyName,
        n_a: usize,
        n_b: usize,
        terms: Vec<(f64, HermitianMatrix)>,
    ) -> Self {
        let n = n_a * n_b;
        let (coefficient_scale, subspace_generators): (Vec<f64>, Vec<HermitianMatrix>) =
            terms.into_iter().unzip();
        let sparse = subspace_generators
            .iter()
            .zip(&coefficient_scale)
            .map(|(g, &s)| SparseTerm {
                entries: g
                    .entries()
                    .iter()
                    .enumerate()
                    .filter(|(_, z)| **z != ZERO)
                    .map(|(i, z)| (i, z * s))
                    .collect(),
            })
            .collect();
        let axis_norm_sq = subspace_generators
            .iter()
            .zip(&coefficient_scale)
            .map(|(g, s)| s * s * g.hs_inner(g))
            .collect();
        Self {
            name,
            n,
            n_a,
            n_b,
            subspace_generators,
            coefficient_scale,
            sparse,
            axis_norm_sq,
        }
    }

    /// Dimension `d` of the coordinate space.
    pub fn d(&self) -> usize {
        self.subspace_generators.len()
    }

    /// Hilbert-Schmidt length of each coordinate axis, `s_i ‖G_i‖`.
    pub fn axis_scales(&self) -> Vec<f64> {
        self.axis_norm_sq.iter().map(|v| v.sqrt()).collect()
    }

    fn min_axis_scale(&self) -> f64 {
        self.axis_norm_sq.iter().cloned().fold(f64::INFINITY, f64::min).sqrt()
    }

    fn max_axis_scale(&self) -> f64 {
        self.axis_norm_sq.iter().cloned().fold(0.0, f64::max).sqrt()
    }

    /// Radius in coordinate units of a ball that contains every state of the
    /// family (the Hilbert-Schmidt outer radius divided by the smallest axis
    /// scale).
    pub fn outer_coordinate_radius(&self) -> f64 {
        outer_radius(self.n).expect("family dimension >= 2") / self.min_axis_scale()
    }

    /// Radius in coordinate units of a ball that contains only PPT states
    /// (the Mehta radius divided by the largest axis scale).
    pub fn mehta_coordinate_radius(&self) -> f64 {
        mehta_radius(self.n).expect("family dimension >= 2") / self.max_axis_scale()
    }

    pub fn coords<'a>(&'a self, coords: Vec<f64>) -> Result<CoordinateVector<'a>> {
        CoordinateVector::new(self, coords)
    }

    pub fn origin(&self) -> CoordinateVector<'_> {
        CoordinateVector {
            family: self,
            coords: vec![0.0; self.d()],
        }
    }

    /// `I_n/n + Σ s_i x_i G_i`.
    pub fn embed(&self, coords: &[f64]) -> Result<HermitianMatrix> {
        if coords.len() != self.d() {
            return Err(Error::DimensionMismatch {
                expected: self.d(),
                actual: coords.len(),
            });
        }
        let mut m = HermitianMatrix::scaled_identity(self.n, 1.0 / self.n as f64);
        self.accumulate(coords, m.entries_mut());
        Ok(m)
    }

    /// Adds the linear part `Σ s_i x_i G_i` into `out` (row-major n×n).
    pub(crate) fn accumulate(&self, coords: &[f64], out: &mut [Complex64]) {
        for (term, &x) in self.sparse.iter().zip(coords) {
            if x == 0.0 {
                continue;
            }
            for &(idx, v) in &term.entries {
                out[idx] += v * x;
            }
        }
    }

    /// Inverse of [`StateFamily::embed`]: `x_i = Tr(G_i A) / (s_i ‖G_i‖²)`.
    pub fn project(&self, a: &HermitianMatrix) -> Result<CoordinateVector<'_>> {
        if a.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: a.dim(),
            });
        }
        let tr = a.trace();
        if (tr - 1.0).abs() > INPUT_TOL {
            return Err(Error::InvalidInput(format!(
                "matrix must have unit trace (trace {tr})"
            )));
        }
        let coords: Vec<f64> = self
            .subspace_generators
            .iter()
            .zip(&self.coefficient_scale)
            .zip(&self.axis_norm_sq)
            .map(|((g, s), nsq)| g.hs_inner(a) * s / nsq)
            .collect();
        let back = self.embed(&coords)?;
        let residual = back.hs_distance(a);
        if residual > INPUT_TOL {
            return Err(Error::OutOfSubspace { residual });
        }
        Ok(CoordinateVector {
            family: self,
            coords,
        })
    }

    /// Largest violation of tracelessness, Hermiticity and pairwise
    /// orthogonality of the generators.
    pub fn generator_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for g in &self.subspace_generators {
            worst = worst.max(g.trace().abs()).max(g.hermiticity_defect());
        }
        let gram = gram_matrix(&self.subspace_generators);
        for (i, row) in gram.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if i != j {
                    worst = worst.max(v.abs());
                }
            }
        }
        worst
    }
}

/// A point of a family's coordinate space.
#[derive(Debug, Clone)]
pub struct CoordinateVector<'a> {
    pub family: &'a StateFamily,
    pub coords: Vec<f64>,
}

impl<'a> CoordinateVector<'a> {
    pub fn new(family: &'a StateFamily, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != family.d() {
            return Err(Error::DimensionMismatch {
                expected: family.d(),
                actual: coords.len(),
            });
        }
        Ok(Self { family, coords })
    }
}

pub fn coords_to_matrix(v: &CoordinateVector<'_>) -> Result<HermitianMatrix> {
    v.family.embed(&v.coords)
}

pub fn matrix_to_coords<'a>(
    family: &'a StateFamily,
    a: &HermitianMatrix,
) -> Result<CoordinateVector<'a>> {
    family.project(a)
}

fn id(n: usize) -> HermitianMatrix {
    HermitianMatrix::identity(n)
}

/// The fifteen two-qubit operators in the order `σ_i⊗I`, `I⊗σ_j`, `σ_i⊗σ_j`.
fn two_qubit_operators() -> Vec<HermitianMatrix> {
    let p = pauli_matrices();
    let mut ops: Vec<HermitianMatrix> = p.iter().map(|s| s.kron(&id(2))).collect();
    ops.extend(p.iter().map(|s| id(2).kron(s)));
    for a in &p {
        for b in &p {
            ops.push(a.kron(b));
        }
    }
    ops
}

pub fn make_family(name: FamilyName) -> StateFamily {
    let [sx, sy, sz] = pauli_matrices();
    let gm = gell_mann_matrices();
    let half = 0.5;
    let with_scale = |s: f64, ops: Vec<HermitianMatrix>| -> Vec<(f64, HermitianMatrix)> {
        ops.into_iter().map(|g| (s, g)).collect()
    };
    let i2 = id(2);
    let (n_a, n_b, terms) = match name {
        FamilyName::BellDiagonal => (
            2,
            2,
            with_scale(half, vec![sx.kron(&sx), sy.kron(&sy), sz.kron(&sz)]),
        ),
        FamilyName::XStates => (
            2,
            2,
            with_scale(
                half,
                vec![
                    sz.kron(&i2),
                    i2.kron(&sz),
                    sx.kron(&sx),
                    sx.kron(&sy),
                    sy.kron(&sx),
                    sy.kron(&sy),
                    sz.kron(&sz),
                ],
            ),
        ),
        FamilyName::RebitRebit => (
            2,
            2,
            with_scale(
                half,
                vec![
                    i2.kron(&sx),
                    i2.kron(&sz),
                    sx.kron(&i2),
                    sz.kron(&i2),
                    sx.kron(&sx),
                    sx.kron(&sz),
                    sy.kron(&sy),
                    sz.kron(&sx),
                    sz.kron(&sz),
                ],
            ),
        ),
        FamilyName::TwoQubit => (2, 2, with_scale(half, two_qubit_operators())),
        FamilyName::QbqtI => (
            2,
            3,
            with_scale(half, gm.iter().map(|g| sy.kron(g)).collect()),
        ),
        FamilyName::QbqtIi => (
            2,
            3,
            with_scale(
                half,
                [&sx, &sy, &sz]
                    .iter()
                    .flat_map(|s| gm[..4].iter().map(|g| s.kron(g)))
                    .collect(),
            ),
        ),
        FamilyName::QbqtIii => (
            2,
            3,
            with_scale(
                half,
                [&sx, &sy, &sz]
                    .iter()
                    .flat_map(|s| gm.iter().map(|g| s.kron(g)))
                    .collect(),
            ),
        ),
        FamilyName::QubitQutrit => {
            let paulis = [&sx, &sy, &sz];
            let mut terms = with_scale(
                1.0 / 6f64.sqrt(),
                paulis.iter().map(|s| s.kron(&id(3))).collect(),
            );
            terms.extend(with_scale(half, gm.iter().map(|g| i2.kron(g)).collect()));
            terms.extend(with_scale(
                half,
                paulis
                    .iter()
                    .flat_map(|s| gm.iter().map(|g| s.kron(g)))
                    .collect(),
            ));
            (2, 3, terms)
        }
        FamilyName::QubitQuquart => {
            let s = 1.0 / (2.0 * SQRT_2);
            let m = two_qubit_operators();
            let paulis = [&sx, &sy, &sz];
            let mut ops: Vec<HermitianMatrix> = paulis.iter().map(|p| p.kron(&id(4))).collect();
            ops.extend(m.iter().map(|g| i2.kron(g)));
            ops.extend(paulis.iter().flat_map(|p| m.iter().map(|g| p.kron(g))));
            (2, 4, with_scale(s, ops))
        }
        FamilyName::QutritQutrit => {
            let s = 1.0 / 6f64.sqrt();
            let i3 = id(3);
            let mut terms = with_scale(s, gm.iter().map(|g| g.kron(&i3)).collect());
            terms.extend(with_scale(s, gm.iter().map(|g| i3.kron(g)).collect()));
            terms.extend(with_scale(
                half,
                gm.iter()
                    .flat_map(|a| gm.iter().map(move |b| a.kron(b)))
                    .collect(),
            ));
            (3, 3, terms)
        }
    };
    let family = StateFamily::new(name, n_a, n_b, terms);
    debug_assert!(family.generator_defect() <= CONSTRUCTION_TOL);
    family
}

pub fn make_family_by_name(name: &str) -> Result<StateFamily> {
    Ok(make_family(name.parse()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell_phi_plus() -> HermitianMatrix {
        let h = Complex64::new(1.0 / SQRT_2, 0.0);
        HermitianMatrix::projector(&[h, ZERO, ZERO, h])
    }

    #[test]
    fn pauli_basis_is_orthonormal() {
        let b = pauli_basis();
        assert!(b.orthonormality_defect() <= 1e-12);
        assert_eq!(b.generators.len(), 3);
        let sy = &b.generators[1];
        assert!((sy.get(0, 1) - Complex64::new(0.0, -1.0 / SQRT_2)).norm() < 1e-15);
        assert!(b.generators[0].trace().abs() < 1e-15);
    }

    #[test]
    fn gell_mann_entries_match_listing() {
        let gm = gell_mann_matrices();
        let r3 = 1.0 / 3f64.sqrt();
        let diag: Vec<f64> = (0..3).map(|i| gm[7].get(i, i).re).collect();
        assert_eq!(diag, vec![r3, r3, -2.0 * r3]);
        assert_eq!(gm[1].get(1, 0), I);
        for (i, a) in gm.iter().enumerate() {
            for (j, b) in gm.iter().enumerate() {
                let want = if i == j { 2.0 } else { 0.0 };
                assert!((a.hs_inner(b) - want).abs() < 1e-12);
            }
        }
        assert!(gell_mann_basis().orthonormality_defect() <= 1e-12);
    }

    #[test]
    fn generalized_basis_n2_is_pauli() {
        let g = generalized_gell_mann_basis(2).unwrap();
        let p = pauli_basis();
        for (a, b) in g.generators.iter().zip(&p.generators) {
            assert!(a.hs_distance(b) < 1e-15);
        }
    }

    #[test]
    fn generalized_basis_rejects_small_dimension() {
        assert_eq!(
            generalized_gell_mann_basis(1).unwrap_err(),
            Error::InvalidDimension(1)
        );
    }

    #[test]
    fn generalized_basis_is_orthonormal() {
        for n in [2, 3, 4, 6, 8, 9] {
            let b = generalized_gell_mann_basis(n).unwrap();
            assert_eq!(b.generators.len(), n * n - 1);
            assert!(b.orthonormality_defect() <= 1e-12, "n = {n}");
        }
    }

    #[test]
    fn generalized_basis_n3_spans_gell_mann_subspace() {
        // Both bases are orthonormal, so equal spans means each Gell-Mann
        // generator is fully reconstructed by projection onto the other basis.
        let g = generalized_gell_mann_basis(3).unwrap();
        for t in &gell_mann_basis().generators {
            let captured: f64 = g.generators.iter().map(|u| u.hs_inner(t).powi(2)).sum();
            assert!((captured - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn family_dimensions() {
        let expected = [3, 7, 9, 15, 8, 12, 24, 35, 63, 80];
        let ns = [4, 4, 4, 4, 6, 6, 6, 6, 8, 9];
        for ((name, d), n) in FamilyName::ALL.iter().zip(expected).zip(ns) {
            let f = make_family(*name);
            assert_eq!(f.d(), d, "{name}");
            assert_eq!(f.n, n, "{name}");
            assert_eq!(f.n_a * f.n_b, f.n);
            assert!(f.generator_defect() <= 1e-12, "{name}");
        }
    }

    #[test]
    fn family_prefactors_make_isometric_coordinates() {
        for name in FamilyName::ALL {
            let f = make_family(name);
            let scaled: Vec<HermitianMatrix> = f
                .subspace_generators
                .iter()
                .zip(&f.coefficient_scale)
                .map(|(g, s)| g.scale(*s))
                .collect();
            let gram = gram_matrix(&scaled);
            for (i, row) in gram.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((v - want).abs() < 1e-12, "{name} ({i},{j}) = {v}");
                }
            }
        }
    }

    #[test]
    fn qubit_qutrit_prefactors_follow_expansion() {
        let f = make_family(FamilyName::QubitQutrit);
        let r6 = 1.0 / 6f64.sqrt();
        assert_eq!(&f.coefficient_scale[..3], &[r6; 3]);
        assert!(f.coefficient_scale[3..].iter().all(|&s| s == 0.5));
        let two = make_family(FamilyName::TwoQubit);
        assert!(two.coefficient_scale.iter().all(|&s| s == 0.5));
    }

    #[test]
    fn x_states_generator_order() {
        let f = make_family(FamilyName::XStates);
        let [sx, sy, sz] = pauli_matrices();
        let i2 = id(2);
        let want = [
            sz.kron(&i2),
            i2.kron(&sz),
            sx.kron(&sx),
            sx.kron(&sy),
            sy.kron(&sx),
            sy.kron(&sy),
            sz.kron(&sz),
        ];
        for (g, w) in f.subspace_generators.iter().zip(&want) {
            assert_eq!(g, w);
        }
    }

    #[test]
    fn unknown_family_is_rejected() {
        assert!(matches!(
            make_family_by_name("three_qubit"),
            Err(Error::UnknownFamily(_))
        ));
        assert_eq!(
            make_family_by_name("qutrit_qutrit").unwrap().name,
            FamilyName::QutritQutrit
        );
    }

    #[test]
    fn origin_maps_to_maximally_mixed() {
        for name in FamilyName::ALL {
            let f = make_family(name);
            let m = coords_to_matrix(&f.origin()).unwrap();
            let target = HermitianMatrix::scaled_identity(f.n, 1.0 / f.n as f64);
            assert!(m.hs_distance(&target) < 1e-15);
        }
    }

    #[test]
    fn bell_vertex_is_bell_projector() {
        let f = make_family(FamilyName::BellDiagonal);
        let v = f.coords(vec![0.5, -0.5, 0.5]).unwrap();
        let m = coords_to_matrix(&v).unwrap();
        assert!(m.hs_distance(&bell_phi_plus()) < 1e-15);
        let back = matrix_to_coords(&f, &bell_phi_plus()).unwrap();
        for (a, b) in back.coords.iter().zip([0.5, -0.5, 0.5]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn maximally_mixed_projects_to_zero() {
        let f = make_family(FamilyName::TwoQubit);
        let c = matrix_to_coords(&f, &HermitianMatrix::scaled_identity(4, 0.25)).unwrap();
        assert!(c.coords.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn coordinate_length_mismatch() {
        let f = make_family(FamilyName::BellDiagonal);
        assert_eq!(
            f.coords(vec![0.0; 4]).unwrap_err(),
            Error::DimensionMismatch {
                expected: 3,
                actual: 4
            }
        );
    }

    #[test]
    fn project_rejects_non_unit_trace_and_foreign_matrices() {
        let f = make_family(FamilyName::BellDiagonal);
        let err = f.project(&HermitianMatrix::identity(4)).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
        // |00><00| has σ_z⊗I components that Bell-diagonal states lack.
        let mut e00 = HermitianMatrix::zeros(4);
        e00.entries_mut()[0] = ONE;
        assert!(matches!(
            f.project(&e00).unwrap_err(),
            Error::OutOfSubspace { .. }
        ));
        assert!(matches!(
            f.project(&HermitianMatrix::identity(6)).unwrap_err(),
            Error::DimensionMismatch { .. }
        ));
    }

    #[test]
    fn coordinate_radii_equal_hilbert_schmidt_radii() {
        let f = make_family(FamilyName::BellDiagonal);
        assert!((f.outer_coordinate_radius() - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((f.mehta_coordinate_radius() - 1.0 / 12f64.sqrt()).abs() < 1e-15);
    }
}
