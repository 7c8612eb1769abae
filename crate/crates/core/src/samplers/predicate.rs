//! Target predicates evaluated on sampled states.

use num_complex::Complex64;

use crate::bell_tests::{
    bloch_from_entries, first_scan_violations, violates_12m, violates_cg_bell_diagonal,
    violates_cg_optimized, violates_chsh, OptimizerConfig, BELL_TOL,
};
use crate::error::{Error, Result};
use crate::operator_basis::{FamilyName, StateFamily};
use crate::partial_transpose::PptTester;
use crate::positivity::PSD_TOL;
use crate::rng::RngStream;

/// A sampled state: its family coordinates and its density matrix.
#[derive(Debug, Clone, Copy)]
pub struct StateView<'a> {
    pub family: &'a StateFamily,
    pub coords: &'a [f64],
    /// Row-major n×n entries.
    pub matrix: &'a [Complex64],
}

/// Per-chain mutable resources handed to predicates.
#[derive(Debug, Clone)]
pub struct PredicateScratch {
    ppt: Option<PptTester>,
    pub rng: RngStream,
    /// Last optimized CG verdict, so predicates sharing a state agree.
    cg_memo: Option<CgMemo>,
}

#[derive(Debug, Clone)]
struct CgMemo {
    coords: Vec<f64>,
    cfg: OptimizerConfig,
    tol: f64,
    violated: bool,
}

impl PredicateScratch {
    pub fn new(rng: RngStream) -> Self {
        Self {
            ppt: None,
            rng,
            cg_memo: None,
        }
    }

    fn ppt(&mut self, family: &StateFamily) -> &mut PptTester {
        self.ppt.get_or_insert_with(|| PptTester::for_family(family))
    }

    fn cg_optimized(&mut self, state: &StateView<'_>, cfg: &OptimizerConfig, tol: f64) -> bool {
        if let Some(m) = &self.cg_memo {
            if m.coords == state.coords && m.cfg == *cfg && m.tol == tol {
                return m.violated;
            }
        }
        // two-qubit PPT states are separable and violate no Bell inequality
        let violated = !self.ppt(state.family).is_ppt(state.matrix, PSD_TOL)
            && violates_cg_optimized(&bloch_from_entries(state.matrix), cfg, &mut self.rng, tol);
        let memo = self.cg_memo.get_or_insert_with(|| CgMemo {
            coords: Vec::new(),
            cfg: *cfg,
            tol,
            violated,
        });
        memo.coords.clear();
        memo.coords.extend_from_slice(state.coords);
        memo.cfg = *cfg;
        memo.tol = tol;
        memo.violated = violated;
        violated
    }
}

pub trait StatePredicate: Sync {
    fn name(&self) -> String;

    /// Rejects families the predicate is not defined on.
    fn validate(&self, _family: &StateFamily) -> Result<()> {
        Ok(())
    }

    fn test(&self, state: &StateView<'_>, scratch: &mut PredicateScratch) -> bool;
}

/// Wraps a closure as a predicate.
pub struct FnPredicate<F> {
    name: String,
    f: F,
}

impl<F> FnPredicate<F>
where
    F: Fn(&StateView<'_>) -> bool + Sync,
{
    pub fn new(name: impl Into<String>, f: F) -> Self {
        Self { name: name.into(), f }
    }
}

impl<F> StatePredicate for FnPredicate<F>
where
    F: Fn(&StateView<'_>) -> bool + Sync,
{
    fn name(&self) -> String {
        self.name.clone()
    }

    fn test(&self, state: &StateView<'_>, _scratch: &mut PredicateScratch) -> bool {
        (self.f)(state)
    }
}

/// The built-in predicates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Predicate {
    /// Every state.
    All,
    Ppt { tol: f64 },
    /// Exact CHSH criterion.
    Chsh { tol: f64 },
    /// The twelve fixed CHSH settings.
    TwelveM { tol: f64 },
    /// Closed-form Collins-Gisin body (Bell-diagonal family only).
    CgBody { tol: f64 },
    /// Collins-Gisin by numerical optimization over the B-side settings.
    CgOptimized { cfg: OptimizerConfig, tol: f64 },
    /// Violation of either the exact CHSH criterion or the optimized CG test.
    CgOrChsh { cfg: OptimizerConfig, tol: f64 },
    /// CG violated by one of `m` random settings.
    CgScan { m: usize, tol: f64 },
    /// CHSH violated by one of `m` random settings.
    ChshScan { m: usize, tol: f64 },
}

impl Predicate {
    pub fn ppt() -> Self {
        Predicate::Ppt { tol: PSD_TOL }
    }

    pub fn chsh() -> Self {
        Predicate::Chsh { tol: BELL_TOL }
    }

    pub fn twelve_m() -> Self {
        Predicate::TwelveM { tol: BELL_TOL }
    }

    pub fn cg_body() -> Self {
        Predicate::CgBody { tol: BELL_TOL }
    }

    pub fn cg_optimized(restarts: usize) -> Self {
        Predicate::CgOptimized {
            cfg: OptimizerConfig {
                restarts,
                ..OptimizerConfig::default()
            },
            tol: BELL_TOL,
        }
    }

    pub fn cg_or_chsh(restarts: usize) -> Self {
        Predicate::CgOrChsh {
            cfg: OptimizerConfig {
                restarts,
                ..OptimizerConfig::default()
            },
            tol: BELL_TOL,
        }
    }

    fn needs_two_qubits(&self) -> bool {
        !matches!(self, Predicate::All | Predicate::Ppt { .. })
    }
}

impl StatePredicate for Predicate {
    fn name(&self) -> String {
        match self {
            Predicate::All => "all",
            Predicate::Ppt { .. } => "ppt",
            Predicate::Chsh { .. } => "chsh",
            Predicate::TwelveM { .. } => "12m",
            Predicate::CgBody { .. } => "cg-body",
            Predicate::CgOptimized { .. } => "cg-opt",
            Predicate::CgOrChsh { .. } => "cg-or-chsh",
            Predicate::CgScan { .. } => "cg-scan",
            Predicate::ChshScan { .. } => "chsh-scan",
        }
        .to_string()
    }

    fn validate(&self, family: &StateFamily) -> Result<()> {
        if self.needs_two_qubits() && !family.name.is_two_qubit() {
            return Err(Error::InvalidConfig(format!(
                "predicate `{}` needs a two-qubit family, got `{}`",
                self.name(),
                family.name
            )));
        }
        if matches!(self, Predicate::CgBody { .. }) && family.name != FamilyName::BellDiagonal {
            return Err(Error::InvalidConfig(format!(
                "predicate `cg-body` is defined for bell_diagonal only, got `{}`",
                family.name
            )));
        }
        Ok(())
    }

    fn test(&self, state: &StateView<'_>, scratch: &mut PredicateScratch) -> bool {
        match *self {
            Predicate::All => true,
            Predicate::Ppt { tol } => scratch.ppt(state.family).is_ppt(state.matrix, tol),
            Predicate::Chsh { tol } => violates_chsh(&bloch_from_entries(state.matrix), tol),
            Predicate::TwelveM { tol } => violates_12m(&bloch_from_entries(state.matrix), tol),
            Predicate::CgBody { tol } => {
                let c = state.coords;
                violates_cg_bell_diagonal([c[0], c[1], c[2]], tol)
            }
            Predicate::CgOptimized { cfg, tol } => scratch.cg_optimized(state, &cfg, tol),
            Predicate::CgOrChsh { cfg, tol } => {
                violates_chsh(&bloch_from_entries(state.matrix), tol) || scratch.cg_optimized(state, &cfg, tol)
            }
            Predicate::CgScan { m, tol } => {
                first_scan_violations(&bloch_from_entries(state.matrix), m, &mut scratch.rng, tol)
                    .1
                    .is_some()
            }
            Predicate::ChshScan { m, tol } => {
                first_scan_violations(&bloch_from_entries(state.matrix), m, &mut scratch.rng, tol)
                    .0
                    .is_some()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator_basis::make_family;

    #[test]
    fn bell_predicates_reject_other_families() {
        let f = make_family(FamilyName::QubitQutrit);
        assert!(Predicate::chsh().validate(&f).is_err());
        assert!(Predicate::ppt().validate(&f).is_ok());
        let x = make_family(FamilyName::XStates);
        assert!(Predicate::cg_body().validate(&x).is_err());
        assert!(Predicate::cg_optimized(4).validate(&x).is_ok());
    }

    #[test]
    fn predicates_on_bell_vertex() {
        let f = make_family(FamilyName::BellDiagonal);
        let coords = [0.5, -0.5, 0.5];
        let m = f.embed(&coords).unwrap();
        let view = StateView {
            family: &f,
            coords: &coords,
            matrix: m.entries(),
        };
        let mut scratch = PredicateScratch::new(RngStream::new(0, 1));
        assert!(!Predicate::ppt().test(&view, &mut scratch));
        assert!(Predicate::chsh().test(&view, &mut scratch));
        assert!(Predicate::twelve_m().test(&view, &mut scratch));
        assert!(Predicate::cg_body().test(&view, &mut scratch));
        assert!(Predicate::cg_optimized(8).test(&view, &mut scratch));
        assert!(Predicate::cg_or_chsh(8).test(&view, &mut scratch));
        let closure = FnPredicate::new("first-positive", |s: &StateView<'_>| s.coords[0] > 0.0);
        assert!(closure.test(&view, &mut scratch));
        assert_eq!(closure.name(), "first-positive");
    }

    #[test]
    fn cg_union_contains_cg_on_every_state() {
        let f = make_family(FamilyName::TwoQubit);
        let mut walk = crate::samplers::WalkState::new(&f, RngStream::new(3, 0));
        let mut scratch = PredicateScratch::new(RngStream::new(3, 1));
        let (cg, union) = (Predicate::cg_optimized(4), Predicate::cg_or_chsh(4));
        for _ in 0..2000 {
            walk.step(PSD_TOL).unwrap();
            let view = walk.view();
            let a = cg.test(&view, &mut scratch);
            let b = union.test(&view, &mut scratch);
            assert!(b || !a);
        }
    }
}
