//! Test-time spatial exploration: beam search over egocentric action
//! trajectories, where every candidate view is imagined by a world model
//! and pruned by a vision-language scorer before a final multiple-choice
//! answer is produced from the collected evidence.
//!
//! The crate ships deterministic stand-ins for both learned components (a
//! raycasting world model and a geometric oracle scorer) so the whole
//! pipeline can be verified without GPUs, plus HTTP clients for real
//! backends.

pub mod geometry;
pub mod transport;
pub mod worldmodel;
pub mod scoring;
pub mod search;
pub mod bench;
