//! The pairing tournament for the majority bit, with exact comparison counts.
//!
//! Three modes share one engine and differ only in the rule for the odd
//! leftover bit and in post-processing:
//!
//! * [`TournamentMode::Literal`] appends the last bit whenever the number
//!   of pairs `⌊n/2⌋` is even, exactly as the algorithm is usually written.
//!   For `n ≡ 0 (mod 4)` that re-appends a bit that was already paired, and the
//!   mode can then report a majority for strings that have none (`0110`).
//! * [`TournamentMode::Corrected`] appends the leftover only when `n` is odd
//!   and the survivor string built so far has even length. The leftover then
//!   breaks exactly the ties it must break, so a majority of `x` is always a
//!   strict majority of the survivors.
//! * [`TournamentMode::Verified`] runs `Corrected` and confirms a claimed
//!   majority bit with one counting pass of `n` comparisons.

mod cluster;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codes::BitString;

pub use cluster::{cluster_analyze, Cluster, ClusterPartition};

/// Largest `n` for which [`worst_case_scan`] enumerates all inputs.
pub const MAX_WORST_CASE_N: usize = 18;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MajorityError {
    #[error("exhaustive scan at n = {0} exceeds the limit {MAX_WORST_CASE_N}")]
    ScanTooLarge(usize),
    #[error("position {position} outside 1..={n}")]
    PositionOutOfRange { position: usize, n: usize },
    #[error("position {0} compared with itself")]
    SelfComparison(usize),
    #[error("comparisons on ({a}, {b}) contradict each other")]
    InconsistentTranscript { a: usize, b: usize },
    #[error("comparison ({a}, {b}) disagrees with the input bits")]
    TranscriptContradictsInput { a: usize, b: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MajorityVerdict {
    Majority(bool),
    NoMajority,
}

impl std::fmt::Display for MajorityVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MajorityVerdict::Majority(b) => write!(f, "{}", u8::from(*b)),
            MajorityVerdict::NoMajority => f.write_str("none"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TournamentMode {
    Literal,
    Corrected,
    Verified,
}

impl std::str::FromStr for TournamentMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "literal" => Ok(Self::Literal),
            "corrected" => Ok(Self::Corrected),
            "verified" => Ok(Self::Verified),
            other => Err(format!("unknown tournament mode {other:?}")),
        }
    }
}

/// One bit comparison, on 1-based positions of the original input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Comparison {
    pub a: usize,
    pub b: usize,
    pub equal: bool,
    /// Recursion depth at which the comparison was made (0 = top level).
    pub level: u32,
}

pub type ComparisonTranscript = Vec<Comparison>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TournamentRun {
    pub verdict: MajorityVerdict,
    /// Bit-pair comparisons made by the tournament itself; equals `transcript.len()`.
    pub comparisons: u64,
    /// Extra comparisons spent confirming the verdict (verified mode only).
    pub verification_comparisons: u64,
    pub transcript: ComparisonTranscript,
}

impl TournamentRun {
    pub fn total_comparisons(&self) -> u64 {
        self.comparisons + self.verification_comparisons
    }
}

/// Exact verdict by counting: the bit occurring more than `⌊n/2⌋` times.
pub fn majority_oracle(x: &BitString) -> MajorityVerdict {
    let ones = x.count_ones();
    let half = x.len() / 2;
    if ones > half {
        MajorityVerdict::Majority(true)
    } else if x.len() - ones > half {
        MajorityVerdict::Majority(false)
    } else {
        MajorityVerdict::NoMajority
    }
}

/// Number of ones in the binary representation of `n`.
pub fn nu(n: u64) -> u32 {
    n.count_ones()
}

pub fn tournament(x: &BitString, mode: TournamentMode) -> TournamentRun {
    let mut transcript = Vec::new();
    let mut survivors: Vec<(usize, bool)> = x.iter().enumerate().map(|(i, b)| (i + 1, b)).collect();
    let mut level = 0u32;
    let mut compare = |p: (usize, bool), q: (usize, bool), level: u32| {
        let equal = p.1 == q.1;
        transcript.push(Comparison { a: p.0, b: q.0, equal, level });
        equal
    };
    let verdict = loop {
        let n = survivors.len();
        match n {
            0 => break MajorityVerdict::NoMajority,
            1 => break MajorityVerdict::Majority(survivors[0].1),
            2 => {
                break if compare(survivors[0], survivors[1], level) {
                    MajorityVerdict::Majority(survivors[0].1)
                } else {
                    MajorityVerdict::NoMajority
                }
            }
            3 => {
                break if compare(survivors[0], survivors[1], level) {
                    MajorityVerdict::Majority(survivors[0].1)
                } else {
                    MajorityVerdict::Majority(survivors[2].1)
                }
            }
            _ => {}
        }
        let mut next = Vec::with_capacity(n / 2 + 1);
        for pair in survivors.chunks_exact(2) {
            if compare(pair[0], pair[1], level) {
                next.push(pair[1]);
            }
        }
        let append_last = match mode {
            TournamentMode::Literal => (n / 2).is_multiple_of(2),
            TournamentMode::Corrected | TournamentMode::Verified => n % 2 == 1 && next.len() % 2 == 0,
        };
        if append_last {
            next.push(survivors[n - 1]);
        }
        survivors = next;
        level += 1;
    };
    let comparisons = transcript.len() as u64;
    let mut run = TournamentRun { verdict, comparisons, verification_comparisons: 0, transcript };
    if mode == TournamentMode::Verified {
        if let MajorityVerdict::Majority(b) = run.verdict {
            run.verification_comparisons = x.len() as u64;
            let count = x.iter().filter(|&bit| bit == b).count();
            if count <= x.len() / 2 {
                run.verdict = MajorityVerdict::NoMajority;
            }
        }
    }
    run
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WorstCase {
    pub n: usize,
    pub max_comparisons: u64,
    /// First input (in lexicographic order) reaching the maximum.
    pub argmax_input: BitString,
    /// `n − ν(n)`.
    pub reference: u64,
    pub matches_reference: bool,
}

/// Maximum total comparisons over all `2^n` inputs.
pub fn worst_case_scan(n: usize, mode: TournamentMode) -> Result<WorstCase, MajorityError> {
    if n > MAX_WORST_CASE_N {
        return Err(MajorityError::ScanTooLarge(n));
    }
    let mut best = (0u64, BitString::repeat(false, n));
    for x in BitString::all_of_length(n) {
        let c = tournament(&x, mode).total_comparisons();
        if c > best.0 {
            best = (c, x);
        }
    }
    let reference = n as u64 - u64::from(nu(n as u64));
    Ok(WorstCase {
        n,
        max_comparisons: best.0,
        argmax_input: best.1,
        reference,
        matches_reference: best.0 == reference,
    })
}
