pub mod hit_and_run;
pub mod muller;
pub mod multiphase;
pub mod predicate;

pub use hit_and_run::{
    hit_and_run_multi, hit_and_run_ratio, hit_and_run_step, HitAndRunConfig, HitAndRunOutput,
    WalkDiagnostics, WalkState, DEFAULT_BLOCK_SIZE,
};
pub use muller::{muller_ball_sample, muller_ball_sample_into};
pub use multiphase::{default_phase_count, geometric_radii, multiphase_estimate, MultiphaseConfig};
pub use predicate::{FnPredicate, Predicate, PredicateScratch, StatePredicate, StateView};
