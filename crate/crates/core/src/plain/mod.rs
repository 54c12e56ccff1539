//! Constructions outside the games: online edge coloring, ordinal codes,
//! prefix/suffix balls and the semimeasure allocator.

mod allocator;
mod ball;
mod coloring;
mod ordinal;

pub use allocator::SemimeasureAllocator;
pub use ball::{ball_csv, prefix_suffix_ball, prefix_suffix_members, single_sided_ball};
pub use coloring::EdgeColoring;
pub use ordinal::OrdinalEncoder;
