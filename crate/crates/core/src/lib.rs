//! Coverability checking for Petri nets with an incremental, inductive
//! (IC3-style) engine, a backward-reachability engine, and independent
//! validation of every verdict.
//!
//! Safe verdicts carry a finite basis `B` such that `Σ \ ↑B` contains the
//! initial markings, avoids the target and is closed under firing. Unsafe
//! verdicts carry a firing sequence that replays from an initial marking.

pub mod backward;
pub mod certify;
pub mod differential;
pub mod engine;
pub mod explore;
pub mod gen;
pub mod kernel;
pub mod mist;
pub mod regions;
pub mod verdict;

pub use kernel::{Marking, PetriNet, Tokens, Transition};
pub use regions::{Frames, Level, UpSet};
pub use verdict::{CexTrace, Outcome, Stats, Verdict};
