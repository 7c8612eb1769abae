//! Multiphase (product) estimator over nested balls.
//!
//! With nested balls `B_1 ⊂ .. ⊂ B_m`, convex set `K` of states and target
//! set `P ⊂ K`, write `R_i = vol(P∩B_i)/vol(K∩B_i)`. Then
//! `R = R_m = R_1 Π R_i/R_{i-1}` and each factor equals
//!
//! ```text
//! R_i/R_{i-1} = [vol(P∩B_i)/vol(P∩B_{i-1})] / [vol(K∩B_i)/vol(K∩B_{i-1})]
//! ```
//!
//! which phase `i` estimates from its own Muller samples in `B_i` by counting
//! states and targets overall and inside `B_{i-1}`. `B_1` is the Mehta ball,
//! so `R_1 = 1`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimation::{repetition_statistics, Method, PhaseHits, RatioEstimate};
use crate::operator_basis::StateFamily;
use crate::positivity::{PsdTester, PSD_TOL};
use crate::rng::RngStream;
use crate::samplers::muller::muller_ball_sample_into;
use crate::samplers::predicate::{PredicateScratch, StatePredicate, StateView};

#[derive(Debug, Clone, PartialEq)]
pub struct MultiphaseConfig {
    /// Ascending ball radii in coordinate units.
    pub radii: Vec<f64>,
    pub samples_per_phase: u64,
    pub repetitions: usize,
    pub min_hits: u64,
    /// Tolerance of the state membership test.
    pub tol: f64,
}

impl MultiphaseConfig {
    pub fn new(radii: Vec<f64>, samples_per_phase: u64, repetitions: usize, min_hits: u64) -> Result<Self> {
        let cfg = Self {
            radii,
            samples_per_phase,
            repetitions,
            min_hits,
            tol: PSD_TOL,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Geometric radii from the family's Mehta radius to its outer radius
    /// with `phases` balls, defaulting to `max(2, ⌈d ln d⌉)`.
    pub fn for_family(
        family: &StateFamily,
        samples_per_phase: u64,
        repetitions: usize,
        phases: Option<usize>,
    ) -> Result<Self> {
        let m = phases.unwrap_or_else(|| default_phase_count(family.d()));
        Self::new(
            geometric_radii(family.mehta_coordinate_radius(), family.outer_coordinate_radius(), m)?,
            samples_per_phase,
            repetitions,
            10,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.radii.len() < 2 {
            return Err(Error::InvalidConfig("multiphase needs at least 2 phases".into()));
        }
        if self.radii[0] <= 0.0 || self.radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "multiphase radii must be positive and strictly ascending".into(),
            ));
        }
        if self.min_hits < 1 {
            return Err(Error::InvalidConfig("min_hits must be at least 1".into()));
        }
        if self.repetitions < 2 {
            return Err(Error::InvalidConfig("multiphase needs at least 2 repetitions".into()));
        }
        if self.samples_per_phase == 0 {
            return Err(Error::InvalidConfig("samples per phase must be positive".into()));
        }
        Ok(())
    }
}

pub fn default_phase_count(d: usize) -> usize {
    let d = d as f64;
    ((d * d.ln()).ceil() as usize).max(2)
}

/// `r_i = r_1 (r_m/r_1)^{(i-1)/(m-1)}` for `i = 1..=m`.
pub fn geometric_radii(r_first: f64, r_last: f64, m: usize) -> Result<Vec<f64>> {
    if m < 2 || r_first <= 0.0 || r_last <= r_first {
        return Err(Error::InvalidConfig(format!(
            "cannot build {m} geometric radii from {r_first} to {r_last}"
        )));
    }
    let ratio = r_last / r_first;
    let mut radii: Vec<f64> = (0..m)
        .map(|i| r_first * ratio.powf(i as f64 / (m - 1) as f64))
        .collect();
    radii[m - 1] = r_last;
    Ok(radii)
}

enum RepOutcome {
    Ratio(f64, Vec<PhaseHits>),
    Aborted(Vec<PhaseHits>),
}

fn run_repetition(
    family: &StateFamily,
    predicate: &dyn StatePredicate,
    cfg: &MultiphaseConfig,
    mut rng: RngStream,
    mut scratch: PredicateScratch,
) -> RepOutcome {
    let d = family.d();
    let n = family.n;
    let mut psd = PsdTester::new(n);
    let mut point = vec![0.0; d];
    let base = crate::matrix::HermitianMatrix::scaled_identity(n, 1.0 / n as f64);
    let mut matrix = base.entries().to_vec();
    let mut phases = Vec::with_capacity(cfg.radii.len());
    let mut ratio = 1.0;
    let mut aborted = false;
    for (i, &r) in cfg.radii.iter().enumerate() {
        let inner_sq = if i > 0 { cfg.radii[i - 1].powi(2) } else { -1.0 };
        let mut hits = PhaseHits {
            radius: r,
            samples: cfg.samples_per_phase,
            ..PhaseHits::default()
        };
        for _ in 0..cfg.samples_per_phase {
            muller_ball_sample_into(r, &mut rng, &mut point);
            matrix.copy_from_slice(base.entries());
            family.accumulate(&point, &mut matrix);
            if !psd.is_psd(&matrix, cfg.tol) {
                continue;
            }
            let inner = point.iter().map(|x| x * x).sum::<f64>() <= inner_sq;
            hits.states += 1;
            hits.states_inner += inner as u64;
            let view = StateView {
                family,
                coords: &point,
                matrix: &matrix,
            };
            if predicate.test(&view, &mut scratch) {
                hits.target += 1;
                hits.target_inner += inner as u64;
            }
        }
        if hits.states < cfg.min_hits {
            aborted = true;
        }
        if i > 0 && !aborted {
            if hits.states_inner == 0 || (hits.target_inner == 0 && hits.target > 0) {
                aborted = true;
            } else if hits.target == 0 {
                ratio = 0.0;
            } else {
                let target_growth = hits.target as f64 / hits.target_inner as f64;
                let state_growth = hits.states as f64 / hits.states_inner as f64;
                ratio *= target_growth / state_growth;
            }
        }
        phases.push(hits);
        if aborted {
            break;
        }
    }
    if aborted {
        RepOutcome::Aborted(phases)
    } else {
        RepOutcome::Ratio(ratio, phases)
    }
}

/// Multiphase estimate of `vol(target ∩ states)/vol(states)`.
///
/// Repetition `k` draws from stream `(seed, stream_id + 2k)` and gives its
/// predicate stream `(seed, stream_id + 2k + 1)`; repetitions run in parallel
/// and are reduced in index order.
pub fn multiphase_estimate(
    family: &StateFamily,
    predicate: &dyn StatePredicate,
    cfg: &MultiphaseConfig,
    rng: &RngStream,
) -> Result<RatioEstimate> {
    cfg.validate()?;
    predicate.validate(family)?;
    let base = rng.stream_id();
    let outcomes: Vec<RepOutcome> = (0..cfg.repetitions as u64)
        .into_par_iter()
        .map(|k| {
            run_repetition(
                family,
                predicate,
                cfg,
                rng.sibling(base + 2 * k),
                PredicateScratch::new(rng.sibling(base + 2 * k + 1)),
            )
        })
        .collect();

    let mut totals: Vec<PhaseHits> = cfg
        .radii
        .iter()
        .map(|&r| PhaseHits {
            radius: r,
            ..PhaseHits::default()
        })
        .collect();
    let mut ratios = Vec::new();
    let mut last_hits = Vec::new();
    for outcome in &outcomes {
        let phases = match outcome {
            RepOutcome::Ratio(r, p) => {
                ratios.push(*r);
                p
            }
            RepOutcome::Aborted(p) => {
                last_hits = p.iter().map(|h| h.states).collect();
                p
            }
        };
        for (t, h) in totals.iter_mut().zip(phases) {
            t.samples += h.samples;
            t.states += h.states;
            t.target += h.target;
            t.states_inner += h.states_inner;
            t.target_inner += h.target_inner;
        }
    }
    if ratios.len() < 2 {
        return Err(Error::InsufficientStatistics { hits: last_hits });
    }
    let (mean, sigma) = repetition_statistics(&ratios)?;
    Ok(RatioEstimate {
        mean,
        sigma,
        samples: cfg.samples_per_phase * cfg.radii.len() as u64 * cfg.repetitions as u64,
        blocks_or_reps: ratios.len() as u64,
        method: Method::Multiphase,
        predicate_name: predicate.name(),
        seed: rng.seed(),
        per_phase_hits: Some(totals),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator_basis::{make_family, FamilyName};
    use crate::samplers::predicate::Predicate;

    #[test]
    fn phase_count_and_radii() {
        assert_eq!(default_phase_count(1), 2);
        assert_eq!(default_phase_count(3), 4);
        assert_eq!(default_phase_count(9), 20);
        let r = geometric_radii(1.0, 8.0, 4).unwrap();
        assert!((r[1] - 2.0).abs() < 1e-12 && (r[2] - 4.0).abs() < 1e-12 && r[3] == 8.0);
        assert!(geometric_radii(1.0, 1.0, 3).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(MultiphaseConfig::new(vec![0.1], 10, 2, 10).is_err());
        assert!(MultiphaseConfig::new(vec![0.2, 0.1], 10, 2, 10).is_err());
        assert!(MultiphaseConfig::new(vec![0.1, 0.2], 10, 2, 0).is_err());
        assert!(MultiphaseConfig::new(vec![0.1, 0.2], 10, 1, 1).is_err());
        assert!(MultiphaseConfig::new(vec![0.1, 0.2], 10, 2, 1).is_ok());
    }

    #[test]
    fn trivial_predicate_gives_one() {
        let f = make_family(FamilyName::XStates);
        let cfg = MultiphaseConfig::for_family(&f, 20_000, 3, None).unwrap();
        let est = multiphase_estimate(&f, &Predicate::All, &cfg, &RngStream::new(1, 0)).unwrap();
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.sigma, 0.0);
    }

    #[test]
    fn mehta_phase_is_all_states() {
        let f = make_family(FamilyName::TwoQubit);
        let cfg = MultiphaseConfig::for_family(&f, 5_000, 2, None).unwrap();
        let est = multiphase_estimate(&f, &Predicate::ppt(), &cfg, &RngStream::new(2, 0));
        // the outer phases of d=15 may starve at this sample size; the first
        // phase is complete either way
        if let Ok(e) = est {
            let first = e.per_phase_hits.unwrap()[0];
            assert_eq!(first.states, first.samples);
            assert_eq!(first.target, first.samples);
        }
    }

    #[test]
    fn starved_runs_report_insufficient_statistics() {
        let f = make_family(FamilyName::TwoQubit);
        let r_out = f.outer_coordinate_radius();
        // a single phase pair whose outer ball almost never hits a state
        let cfg = MultiphaseConfig::new(vec![r_out * 0.99, r_out], 50, 2, 10).unwrap();
        match multiphase_estimate(&f, &Predicate::ppt(), &cfg, &RngStream::new(3, 0)) {
            Err(Error::InsufficientStatistics { hits }) => assert_eq!(hits.len(), 1),
            other => panic!("expected insufficient statistics, got {other:?}"),
        }
    }

    #[test]
    fn bell_diagonal_small_run_is_reasonable() {
        let f = make_family(FamilyName::BellDiagonal);
        let cfg = MultiphaseConfig::for_family(&f, 50_000, 4, None).unwrap();
        let est = multiphase_estimate(&f, &Predicate::ppt(), &cfg, &RngStream::new(4, 0)).unwrap();
        assert!((est.mean - 0.5).abs() < 0.03, "{est:?}");
    }
}
