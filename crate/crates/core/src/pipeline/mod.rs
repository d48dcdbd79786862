//! The tiling pipeline: absorbers level by level, then the leftovers.

pub mod combine;
pub mod ladder;
pub mod tile;

pub use combine::{combine_absorbers, AbsorbReport, ColourAbsorber, CombinedAbsorber};
pub use ladder::{induction_step, iterated_absorbers, AbsorberLadder, Step, StepStats};
pub use tile::{tile, DocumentMetrics, StageRecord, StageStatus, TileMetrics, TileResult, TilingDocument};
