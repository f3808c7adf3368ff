//! Counting arguments made executable.
//!
//! * [`codes`]: strings as numbers, the self-delimiting code ladder, pairing.
//! * [`descsys`]: finite description systems and exhaustive checks of the
//!   counting lemmas over them.
//! * [`matmul`]: QuickMultiply with probe counters and the long-search witness codec.
//! * [`majority`]: the pairing tournament for the majority bit, with
//!   comparison counting and cluster accounting.
//! * [`commsim`]: two-party protocol trees, the inner-product
//!   reconstruction codec, and private-coin protocol families.
//! * [`harness`]: seeded generation, experiment runs, and summaries.

pub mod codes;
pub mod commsim;
pub mod descsys;
pub mod harness;
pub mod majority;
pub mod matmul;
pub mod rng;

pub use codes::{BitReader, BitString, CodeLevel};
pub use commsim::{Gf2Matrix, ProtocolTree, Transcript};
pub use descsys::DescriptionSystem;
pub use majority::{MajorityVerdict, TournamentMode};
pub use matmul::BoolMatrix;
