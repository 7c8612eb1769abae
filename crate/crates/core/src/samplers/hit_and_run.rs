//! Hit-and-run walk over the states of a family, and block-averaged ratio
//! estimates from it.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimation::{block_statistics_from_fractions, BlockAccumulator, Method, RatioEstimate};
use crate::matrix::HermitianMatrix;
use crate::operator_basis::StateFamily;
use crate::positivity::{PsdTester, PSD_TOL};
use crate::rng::RngStream;
use crate::samplers::muller::unit_direction_into;
use crate::samplers::predicate::{PredicateScratch, StatePredicate, StateView};

/// Bisection stops below this step length and treats the direction as blocked.
pub const BISECTION_FLOOR: f64 = 1e-12;
const MAX_DIRECTION_ATTEMPTS: u64 = 10_000;
pub const DEFAULT_BLOCK_SIZE: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct WalkDiagnostics {
    pub steps: u64,
    /// Uniform chord proposals drawn, accepted or not.
    pub rejection_draws: u64,
    /// Directions discarded because both chord bounds were zero.
    pub degenerate_directions: u64,
    pub membership_tests: u64,
}

impl WalkDiagnostics {
    pub fn mean_draws_per_step(&self) -> f64 {
        self.rejection_draws as f64 / self.steps.max(1) as f64
    }

    fn merge(&mut self, other: &Self) {
        self.steps += other.steps;
        self.rejection_draws += other.rejection_draws;
        self.degenerate_directions += other.degenerate_directions;
        self.membership_tests += other.membership_tests;
    }
}

/// One hit-and-run chain.
#[derive(Debug, Clone)]
pub struct WalkState<'a> {
    family: &'a StateFamily,
    current: Vec<f64>,
    matrix: Vec<Complex64>,
    pub rng: RngStream,
    pub steps_taken: u64,
    pub diagnostics: WalkDiagnostics,
    psd: PsdTester,
    direction: Vec<f64>,
    direction_matrix: Vec<Complex64>,
    trial: Vec<Complex64>,
    base: Vec<Complex64>,
    outer: f64,
}

impl<'a> WalkState<'a> {
    /// A chain started at the maximally mixed state.
    pub fn new(family: &'a StateFamily, rng: RngStream) -> Self {
        Self::build(family, vec![0.0; family.d()], rng)
    }

    pub fn from_coords(family: &'a StateFamily, coords: Vec<f64>, rng: RngStream) -> Result<Self> {
        let m = family.embed(&coords)?;
        if !PsdTester::new(family.n).is_psd(m.entries(), PSD_TOL) {
            return Err(Error::InvalidInput("starting point is not a state".into()));
        }
        Ok(Self::build(family, coords, rng))
    }

    fn build(family: &'a StateFamily, current: Vec<f64>, rng: RngStream) -> Self {
        let n = family.n;
        let base = HermitianMatrix::scaled_identity(n, 1.0 / n as f64).entries().to_vec();
        let zero = Complex64::new(0.0, 0.0);
        let mut w = Self {
            family,
            matrix: base.clone(),
            current,
            rng,
            steps_taken: 0,
            diagnostics: WalkDiagnostics::default(),
            psd: PsdTester::new(n),
            direction: vec![0.0; family.d()],
            direction_matrix: vec![zero; n * n],
            trial: vec![zero; n * n],
            base,
            outer: family.outer_coordinate_radius(),
        };
        w.reembed();
        w
    }

    pub fn family(&self) -> &'a StateFamily {
        self.family
    }

    pub fn current(&self) -> &[f64] {
        &self.current
    }

    /// Row-major entries of the current density matrix.
    pub fn matrix(&self) -> &[Complex64] {
        &self.matrix
    }

    pub fn view(&self) -> StateView<'_> {
        StateView {
            family: self.family,
            coords: &self.current,
            matrix: &self.matrix,
        }
    }

    fn reembed(&mut self) {
        self.matrix.copy_from_slice(&self.base);
        self.family.accumulate(&self.current, &mut self.matrix);
    }

    fn is_state_at(&mut self, t: f64, tol: f64) -> bool {
        for ((o, m), d) in self.trial.iter_mut().zip(&self.matrix).zip(&self.direction_matrix) {
            *o = m + d * t;
        }
        self.diagnostics.membership_tests += 1;
        self.psd.is_psd(&self.trial, tol)
    }

    /// Chord bound along `sign · direction`: `2b_0` if the first probe is a
    /// state, otherwise the last probe before the first state found by
    /// halving.
    fn chord_bound(&mut self, sign: f64, tol: f64) -> f64 {
        let mut b = self.outer;
        if self.is_state_at(sign * b, tol) {
            return 2.0 * b;
        }
        loop {
            let next = 0.5 * b;
            if next < BISECTION_FLOOR {
                return 0.0;
            }
            if self.is_state_at(sign * next, tol) {
                return b;
            }
            b = next;
        }
    }

    /// Moves to a uniformly chosen state on a random chord through the
    /// current point.
    pub fn step(&mut self, tol: f64) -> Result<()> {
        let mut attempts = 0;
        let (lo, hi) = loop {
            let norm = unit_direction_into(&mut self.rng, &mut self.direction);
            self.direction.iter_mut().for_each(|x| *x /= norm);
            self.direction_matrix.fill(Complex64::new(0.0, 0.0));
            self.family.accumulate(&self.direction, &mut self.direction_matrix);
            let hi = self.chord_bound(1.0, tol);
            let lo = self.chord_bound(-1.0, tol);
            if hi > 0.0 || lo > 0.0 {
                break (lo, hi);
            }
            self.diagnostics.degenerate_directions += 1;
            attempts += 1;
            if attempts >= MAX_DIRECTION_ATTEMPTS {
                return Err(Error::DegenerateDirection);
            }
        };
        let t = loop {
            let t = -lo + (lo + hi) * self.rng.uniform();
            self.diagnostics.rejection_draws += 1;
            if self.is_state_at(t, tol) {
                break t;
            }
        };
        for (x, d) in self.current.iter_mut().zip(&self.direction) {
            *x += t * d;
        }
        self.reembed();
        debug_assert!(self.psd.is_psd(&self.matrix, 10.0 * tol.max(PSD_TOL)));
        self.steps_taken += 1;
        self.diagnostics.steps += 1;
        Ok(())
    }
}

pub fn hit_and_run_step(mut w: WalkState<'_>, tol: f64) -> Result<WalkState<'_>> {
    w.step(tol)?;
    Ok(w)
}

#[derive(Debug, Clone)]
pub struct HitAndRunConfig {
    pub total_samples: u64,
    pub block_size: u64,
    pub chains: usize,
    /// Tolerance of the state membership test.
    pub tol: f64,
    /// Checked at block boundaries; completed blocks are kept.
    pub cancel: Option<Arc<AtomicBool>>,
}

impl HitAndRunConfig {
    pub fn new(total_samples: u64, block_size: u64) -> Self {
        Self {
            total_samples,
            block_size,
            chains: 1,
            tol: PSD_TOL,
            cancel: None,
        }
    }

    pub fn with_chains(mut self, chains: usize) -> Self {
        self.chains = chains;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_size == 0 {
            return Err(Error::InvalidConfig("block size must be positive".into()));
        }
        if self.total_samples < 2 * self.block_size {
            return Err(Error::InvalidConfig(format!(
                "hit-and-run needs at least two blocks: {} samples with block size {}",
                self.total_samples, self.block_size
            )));
        }
        if self.chains == 0 {
            return Err(Error::InvalidConfig("at least one chain is required".into()));
        }
        Ok(())
    }

    /// Whole blocks assigned to each chain, leftovers to the first chains.
    pub fn blocks_per_chain(&self) -> Vec<u64> {
        let blocks = self.total_samples / self.block_size;
        let chains = (self.chains as u64).min(blocks);
        (0..chains)
            .map(|c| blocks / chains + u64::from(c < blocks % chains))
            .collect()
    }
}

/// Result of one walk scored by several predicates at once.
#[derive(Debug, Clone)]
pub struct HitAndRunOutput {
    /// One estimate per predicate, in input order.
    pub estimates: Vec<RatioEstimate>,
    /// Per-predicate block fractions, chains concatenated in chain order.
    pub block_fractions: Vec<Vec<f64>>,
    pub diagnostics: WalkDiagnostics,
    pub chains: usize,
    pub cancelled: bool,
}

struct ChainResult {
    blocks: Vec<BlockAccumulator>,
    diagnostics: WalkDiagnostics,
    cancelled: bool,
}

fn run_chain(
    family: &StateFamily,
    predicates: &[&dyn StatePredicate],
    cfg: &HitAndRunConfig,
    chain: usize,
    blocks: u64,
    walk_rng: RngStream,
    predicate_rng: RngStream,
) -> Result<ChainResult> {
    let mut walk = WalkState::new(family, walk_rng);
    let mut scratch = PredicateScratch::new(predicate_rng);
    let mut acc: Vec<BlockAccumulator> =
        predicates.iter().map(|_| BlockAccumulator::new(cfg.block_size)).collect();
    let mut cancelled = false;
    for block in 0..blocks {
        if cfg.cancel.as_ref().is_some_and(|c| c.load(Ordering::Relaxed)) {
            cancelled = true;
            break;
        }
        let started = Instant::now();
        for _ in 0..cfg.block_size {
            walk.step(cfg.tol)?;
            let view = walk.view();
            for (a, p) in acc.iter_mut().zip(predicates) {
                a.push(p.test(&view, &mut scratch));
            }
        }
        let secs = started.elapsed().as_secs_f64();
        log::info!(
            "chain {chain} block {}/{blocks}: {} hits of {} ({:.0} states/s)",
            block + 1,
            acc.first().and_then(|a| a.block_hits().last()).copied().unwrap_or(0),
            cfg.block_size,
            cfg.block_size as f64 / secs.max(1e-9),
        );
    }
    Ok(ChainResult {
        blocks: acc,
        diagnostics: walk.diagnostics,
        cancelled,
    })
}

/// Runs `cfg.chains` independent walks from the origin and scores every
/// accepted state with each predicate.
///
/// Chain `c` walks on stream `2(id + c)` and feeds its predicates from stream
/// `2(id + c) + 1`, where `id` is the stream of `rng`. Blocks never span
/// chains; all blocks are pooled with equal weight in chain order.
pub fn hit_and_run_multi(
    family: &StateFamily,
    predicates: &[&dyn StatePredicate],
    cfg: &HitAndRunConfig,
    rng: &RngStream,
) -> Result<HitAndRunOutput> {
    cfg.validate()?;
    if predicates.is_empty() {
        return Err(Error::InvalidConfig("no predicate given".into()));
    }
    for p in predicates {
        p.validate(family)?;
    }
    let per_chain = cfg.blocks_per_chain();
    let base = rng.stream_id();
    let results: Vec<Result<ChainResult>> = per_chain
        .par_iter()
        .enumerate()
        .map(|(c, &blocks)| {
            let id = 2 * (base + c as u64);
            run_chain(family, predicates, cfg, c, blocks, rng.sibling(id), rng.sibling(id + 1))
        })
        .collect();

    let mut diagnostics = WalkDiagnostics::default();
    let mut block_fractions = vec![Vec::new(); predicates.len()];
    let mut cancelled = false;
    for r in results {
        let r = r?;
        diagnostics.merge(&r.diagnostics);
        cancelled |= r.cancelled;
        for (f, acc) in block_fractions.iter_mut().zip(&r.blocks) {
            f.extend(acc.fractions());
        }
    }
    let n_blocks = block_fractions[0].len();
    if n_blocks < 2 {
        return Err(Error::InsufficientStatistics {
            hits: vec![n_blocks as u64],
        });
    }
    let estimates = predicates
        .iter()
        .zip(&block_fractions)
        .map(|(p, f)| {
            let s = block_statistics_from_fractions(f)?;
            Ok(RatioEstimate {
                mean: s.mean,
                sigma: s.sigma_mean,
                samples: n_blocks as u64 * cfg.block_size,
                blocks_or_reps: n_blocks as u64,
                method: Method::Hitrun,
                predicate_name: p.name(),
                seed: rng.seed(),
                per_phase_hits: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HitAndRunOutput {
        estimates,
        block_fractions,
        diagnostics,
        chains: per_chain.len(),
        cancelled,
    })
}

/// Single-chain hit-and-run estimate of the fraction of states satisfying
/// `predicate`.
pub fn hit_and_run_ratio(
    family: &StateFamily,
    predicate: &dyn StatePredicate,
    total_samples: u64,
    block_size: u64,
    rng: &RngStream,
) -> Result<RatioEstimate> {
    let cfg = HitAndRunConfig::new(total_samples, block_size);
    let mut out = hit_and_run_multi(family, &[predicate], &cfg, rng)?;
    Ok(out.estimates.remove(0))
}
