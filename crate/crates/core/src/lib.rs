//! Trap models on trees, cascading jump evolutions and their aging limits.
//!
//! The finite-volume model lives in [`bdtm`], the evolution engine in
//! [`cascade`], the limiting dynamics and rescaling regimes in [`limits`] and
//! the aging statistics in [`aging`].

pub mod aging;
pub mod bdtm;
pub mod cascade;
pub mod error;
pub mod jump_fn;
pub mod limits;
pub mod race;
pub mod rng_heavy;

pub use aging::{AgingEstimate, DLReport, DLSample, EstimatorKind, FMethod, Panel, WindowEstimates};
pub use bdtm::{BdtmProvider, DirectSampler, Environment, LeafState, LeafWeights, VolumeSpec};
pub use cascade::{
    CfjfProvider, FamilySampler, InvariantReport, ProviderSampler, Segment, Trajectory, TrajectorySampler, ZVector,
};
pub use error::{Error, Result};
pub use jump_fn::{ClockPart, JumpFunction, JumpSource};
pub use limits::{AgingProcessProvider, KProcessProvider, Regime, RegimeSampler, RegimeSpec};
pub use race::{RaceOutcome, RaceRun, Visit};
pub use rng_heavy::{PathKey, RandomStream, StableSpec, TailLaw};
