//! Finite description systems and the counting arguments over them.
//!
//! A [`DescriptionSystem`] is a partial map from programs (bit strings of
//! length at most `L`) to described strings. Its complexity measure
//! `C_D(x) = min{ l(p) : D(p) = x }` is computable, so the incompressibility
//! counting lemmas can be checked exhaustively instead of argued.

use std::collections::BTreeSet;

use num_rational::Ratio;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::codes::{from_index, index_of, BitString};
use crate::rng;

/// Largest program length a system may hold.
pub const MAX_PROGRAM_LEN: usize = 24;
/// Largest program length [`random_description_system`] will generate.
pub const MAX_RANDOM_PROGRAM_LEN: usize = 20;
/// Largest string length a complexity profile may cover.
pub const MAX_UNIVERSE_LEN: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DescError {
    #[error("program length bound {0} exceeds the supported maximum")]
    ProgramBoundTooLarge(usize),
    #[error("universe length {0} exceeds the supported maximum {MAX_UNIVERSE_LEN}")]
    UniverseTooLarge(usize),
    #[error("program {program} is longer than the bound {bound}")]
    ProgramTooLong { program: BitString, bound: usize },
    #[error("described string is too long to index")]
    OutputTooLong,
    #[error("no free program of length <= {bound} is left to describe {string}")]
    InfeasibleCover { string: BitString, bound: usize },
    #[error("the counting lemma needs a nonempty set")]
    EmptySet,
    #[error("the counting lemma needs c >= 1, got {0}")]
    InvalidC(u32),
}

/// Index of a program in the shortlex enumeration, from its length and value.
fn program_index(len: usize, value: u64) -> u64 {
    ((1u64 << len) - 1) + value
}

/// Length of the string with shortlex index `index`.
fn index_len(index: u64) -> usize {
    63 - (index + 1).leading_zeros() as usize
}

/// Number of strings of length at most `len`.
fn strings_up_to(len: usize) -> u64 {
    (1u64 << (len + 1)) - 1
}

/// A partial decoder from programs of length at most `L` to strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescriptionSystem {
    max_program_len: usize,
    /// Indexed by program shortlex index; holds the shortlex index of the output.
    outputs: Vec<Option<u64>>,
}

impl DescriptionSystem {
    /// The system with no halting programs.
    pub fn empty(max_program_len: usize) -> Result<Self, DescError> {
        if max_program_len > MAX_PROGRAM_LEN {
            return Err(DescError::ProgramBoundTooLarge(max_program_len));
        }
        Ok(Self { max_program_len, outputs: vec![None; strings_up_to(max_program_len) as usize] })
    }

    /// `D(p) = p` for every program.
    pub fn identity(max_program_len: usize) -> Result<Self, DescError> {
        let mut d = Self::empty(max_program_len)?;
        for (i, slot) in d.outputs.iter_mut().enumerate() {
            *slot = Some(i as u64);
        }
        Ok(d)
    }

    /// Tabulates `f` over every program of length at most `max_program_len`.
    pub fn from_fn<F>(max_program_len: usize, mut f: F) -> Result<Self, DescError>
    where
        F: FnMut(&BitString) -> Option<BitString>,
    {
        let mut d = Self::empty(max_program_len)?;
        for (i, p) in BitString::all_up_to(max_program_len).enumerate() {
            if let Some(x) = f(&p) {
                d.outputs[i] = Some(index_of(&x).ok_or(DescError::OutputTooLong)?);
            }
        }
        Ok(d)
    }

    pub fn max_program_len(&self) -> usize {
        self.max_program_len
    }

    fn slot(&self, program: &BitString) -> Result<usize, DescError> {
        if program.len() > self.max_program_len {
            return Err(DescError::ProgramTooLong { program: program.clone(), bound: self.max_program_len });
        }
        Ok(index_of(program).expect("bounded program length") as usize)
    }

    pub fn get(&self, program: &BitString) -> Option<BitString> {
        let slot = self.slot(program).ok()?;
        self.outputs[slot].map(from_index)
    }

    /// Sets `D(program) = output`, replacing any previous value.
    pub fn insert(&mut self, program: &BitString, output: &BitString) -> Result<(), DescError> {
        let slot = self.slot(program)?;
        self.outputs[slot] = Some(index_of(output).ok_or(DescError::OutputTooLong)?);
        Ok(())
    }

    pub fn remove(&mut self, program: &BitString) -> Result<Option<BitString>, DescError> {
        let slot = self.slot(program)?;
        Ok(self.outputs[slot].take().map(from_index))
    }

    /// Number of programs on which the system is defined.
    pub fn halting_count(&self) -> usize {
        self.outputs.iter().filter(|o| o.is_some()).count()
    }

    /// Defined entries `(program, output)` in shortlex program order.
    pub fn entries(&self) -> impl Iterator<Item = (BitString, BitString)> + '_ {
        self.outputs.iter().enumerate().filter_map(|(i, o)| o.map(|x| (from_index(i as u64), from_index(x))))
    }
}

/// `C_D(x)`; `Undescribed` sorts above every finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Complexity {
    Finite(usize),
    Undescribed,
}

impl Complexity {
    /// `C_D(x) >= threshold`, with undescribed strings counting as infinite.
    pub fn at_least(self, threshold: i64) -> bool {
        match self {
            Complexity::Finite(c) => c as i64 >= threshold,
            Complexity::Undescribed => true,
        }
    }

    pub fn finite(self) -> Option<usize> {
        match self {
            Complexity::Finite(c) => Some(c),
            Complexity::Undescribed => None,
        }
    }
}

/// Minimal program lengths for every string of length at most `universe_max_len`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexityProfile {
    universe_max_len: usize,
    values: Vec<Complexity>,
}

impl ComplexityProfile {
    pub fn universe_max_len(&self) -> usize {
        self.universe_max_len
    }

    /// `C_D(x)`; strings outside the universe panic.
    pub fn get(&self, x: &BitString) -> Complexity {
        assert!(x.len() <= self.universe_max_len, "{x} lies outside the profiled universe");
        self.values[index_of(x).expect("bounded") as usize]
    }

    /// `(x, C_D(x))` in shortlex order.
    pub fn iter(&self) -> impl Iterator<Item = (BitString, Complexity)> + '_ {
        self.values.iter().enumerate().map(|(i, &c)| (from_index(i as u64), c))
    }

    /// Values for the strings of exactly `len` bits, in lexicographic order.
    pub fn of_length(&self, len: usize) -> &[Complexity] {
        let start = program_index(len, 0) as usize;
        &self.values[start..start + (1usize << len)]
    }

    /// `#{x : C_D(x) < k}` over the universe.
    pub fn count_below(&self, k: usize) -> usize {
        self.values.iter().filter(|c| **c < Complexity::Finite(k)).count()
    }
}

/// Exact `C_D` over the universe by one scan of the domain in shortlex order:
/// the first program hitting a string is a shortest one.
pub fn complexity_profile(d: &DescriptionSystem, universe_max_len: usize) -> Result<ComplexityProfile, DescError> {
    if universe_max_len > MAX_UNIVERSE_LEN {
        return Err(DescError::UniverseTooLarge(universe_max_len));
    }
    let size = strings_up_to(universe_max_len);
    let mut values = vec![Complexity::Undescribed; size as usize];
    for (p, out) in d.outputs.iter().enumerate() {
        if let Some(x) = *out {
            if x < size && values[x as usize] == Complexity::Undescribed {
                values[x as usize] = Complexity::Finite(index_len(p as u64));
            }
        }
    }
    Ok(ComplexityProfile { universe_max_len, values })
}

/// A deterministic pseudo-random system.
///
/// Each program halts with probability 3/4; a halting program outputs a string
/// whose length is uniform in `0..=universe_max_len` and whose bits are uniform.
/// With `c_bound = Some(c)` the map is then repaired so that every string of
/// the universe has a program of length at most `l(x) + c`: strings are
/// visited in shortlex order, each keeps its shortest random program if it is
/// short enough, and otherwise takes over the shortest program not yet
/// claimed. The admissible program sets are nested, so this greedy succeeds
/// whenever any assignment does.
pub fn random_description_system(
    max_program_len: usize,
    universe_max_len: usize,
    c_bound: Option<usize>,
    seed: u64,
) -> Result<DescriptionSystem, DescError> {
    if max_program_len > MAX_RANDOM_PROGRAM_LEN {
        return Err(DescError::ProgramBoundTooLarge(max_program_len));
    }
    if universe_max_len > MAX_UNIVERSE_LEN {
        return Err(DescError::UniverseTooLarge(universe_max_len));
    }
    let mut rng = rng::stream(seed, u64::from(rng::tag::DESCSYS) << 56);
    let mut d = DescriptionSystem::empty(max_program_len)?;
    for slot in d.outputs.iter_mut() {
        if rng.random_range(0..4u32) != 0 {
            let len = rng.random_range(0..=universe_max_len);
            let value = rng.random_range(0..1u64 << len);
            *slot = Some(program_index(len, value));
        }
    }
    if let Some(c) = c_bound {
        enforce_c_bound(&mut d, universe_max_len, c)?;
    }
    Ok(d)
}

fn enforce_c_bound(d: &mut DescriptionSystem, universe_max_len: usize, c: usize) -> Result<(), DescError> {
    let universe = strings_up_to(universe_max_len) as usize;
    let mut programs_for: Vec<Vec<u64>> = vec![Vec::new(); universe];
    for (p, out) in d.outputs.iter().enumerate() {
        if let Some(x) = *out {
            if (x as usize) < universe {
                programs_for[x as usize].push(p as u64);
            }
        }
    }
    let mut unclaimed: BTreeSet<u64> = (0..d.outputs.len() as u64).collect();
    for x in 0..universe as u64 {
        let bound = index_len(x) + c;
        // Programs stolen by earlier strings no longer point at x.
        let own = programs_for[x as usize]
            .iter()
            .copied()
            .find(|&p| d.outputs[p as usize] == Some(x) && unclaimed.contains(&p));
        let limit = strings_up_to(bound.min(d.max_program_len));
        let chosen = match own {
            Some(p) if p < limit => p,
            _ => match unclaimed.first() {
                Some(&p) if p < limit => p,
                _ => return Err(DescError::InfeasibleCover { string: from_index(x), bound }),
            },
        };
        unclaimed.remove(&chosen);
        d.outputs[chosen as usize] = Some(x);
    }
    Ok(())
}

/// Result of checking the incompressibility lemma on one set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub m: u64,
    pub c: u32,
    /// `⌊log₂ m⌋ − c`; may be negative.
    pub threshold: i64,
    /// Elements with `C_D(x) >= threshold`.
    pub count_incompressible: u64,
    /// `m − (2^threshold − 1)`: fewer than `2^threshold` programs are shorter than the threshold.
    pub proof_bound: u64,
    /// `m(1 − 2^−c) + 1`, exact.
    #[serde(serialize_with = "ser_ratio")]
    pub stated_bound: Ratio<u64>,
    /// `count >= stated_bound`; `None` when the threshold is negative and the statement is vacuous.
    pub stated_holds: Option<bool>,
    pub holds: bool,
}

fn ser_ratio<S: serde::Serializer>(r: &Ratio<u64>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

/// Counts the elements of `set` with `C_D(x) >= ⌊log₂ m⌋ − c` and compares
/// against both forms of the bound.
pub fn check_counting_lemma(d: &DescriptionSystem, set: &[BitString], c: u32) -> Result<LemmaReport, DescError> {
    if set.is_empty() {
        return Err(DescError::EmptySet);
    }
    if c == 0 || c >= 63 {
        return Err(DescError::InvalidC(c));
    }
    let universe = set.iter().map(BitString::len).max().unwrap_or(0);
    let profile = complexity_profile(d, universe)?;
    let m = set.len() as u64;
    let threshold = i64::from(m.ilog2()) - i64::from(c);
    let count = set.iter().filter(|x| profile.get(x).at_least(threshold)).count() as u64;
    let proof_bound = if threshold >= 0 { m - ((1u64 << threshold) - 1) } else { m };
    let pow = 1u64 << c;
    let stated_bound = Ratio::new(m * (pow - 1) + pow, pow);
    let stated_holds = (threshold >= 0).then(|| Ratio::from_integer(count) >= stated_bound);
    Ok(LemmaReport {
        m,
        c,
        threshold,
        count_incompressible: count,
        proof_bound,
        stated_bound,
        stated_holds,
        holds: count >= proof_bound && stated_holds != Some(false),
    })
}

/// Counts of maximal-complexity strings at one length.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CensusReport {
    pub n: usize,
    pub c: usize,
    /// Every string of length at most `n` has a program of length at most `l(x) + c`.
    pub c_bounded: bool,
    pub strings_of_length_n: u64,
    pub count_ge_n: u64,
    pub count_eq_n: u64,
    pub count_gt_n: u64,
    pub count_eq_n_plus_1: u64,
    pub undescribed_of_length_n: u64,
    /// `⌈2^(n−c)⌉`.
    pub bound: u64,
    /// `count_ge_n >= bound`; `None` when the premise fails and the bound is not asserted.
    pub bound_holds: Option<bool>,
    /// `#{x : n − c <= l(x) <= n, C_D(x) > n}`.
    pub window_count_gt_n: u64,
    /// Some string of length at most `n` has no program of length at most `n`.
    pub some_undescribed_within_n: bool,
    /// Programs of length at most `n` on which the system is undefined.
    pub non_halting_programs_within_n: u64,
}

/// Census of strings of length `n` against the bound `2^(n−c)`.
pub fn max_complexity_census(d: &DescriptionSystem, n: usize, c: usize) -> Result<CensusReport, DescError> {
    let profile = complexity_profile(d, n)?;
    let c_bounded = profile.iter().all(|(x, cx)| cx.finite().is_some_and(|v| v <= x.len() + c));
    let at_n = profile.of_length(n);
    let count = |pred: &dyn Fn(Complexity) -> bool| at_n.iter().filter(|&&v| pred(v)).count() as u64;
    let count_ge_n = count(&|v| v >= Complexity::Finite(n));
    let bound = if c >= n { 1 } else { 1u64 << (n - c) };
    let window_count_gt_n = (n.saturating_sub(c)..=n)
        .map(|len| profile.of_length(len).iter().filter(|&&v| v > Complexity::Finite(n)).count() as u64)
        .sum();
    let programs_within_n = strings_up_to(n.min(d.max_program_len)) as usize;
    let halting_within_n = d.outputs[..programs_within_n].iter().filter(|o| o.is_some()).count();
    let some_undescribed_within_n = profile.iter().any(|(_, v)| v > Complexity::Finite(n));
    Ok(CensusReport {
        n,
        c,
        c_bounded,
        strings_of_length_n: 1u64 << n,
        count_ge_n,
        count_eq_n: count(&|v| v == Complexity::Finite(n)),
        count_gt_n: count(&|v| v > Complexity::Finite(n)),
        count_eq_n_plus_1: count(&|v| v == Complexity::Finite(n + 1)),
        undescribed_of_length_n: count(&|v| v == Complexity::Undescribed),
        bound,
        bound_holds: c_bounded.then_some(count_ge_n >= bound),
        window_count_gt_n,
        some_undescribed_within_n,
        non_halting_programs_within_n: (strings_up_to(n) as usize - halting_within_n) as u64,
    })
}

/// `D'(1p) = p` and `D'(0p) = D(p)`, so `C_D'(x) <= l(x) + 1` for `l(x) <= L`.
pub fn prefix_adjoin(d: &DescriptionSystem) -> Result<DescriptionSystem, DescError> {
    let bound = d.max_program_len + 1;
    let mut out = DescriptionSystem::empty(bound)?;
    for (p, slot) in d.outputs.iter().enumerate() {
        let p = p as u64;
        let len = index_len(p);
        let value = p - program_index(len, 0);
        out.outputs[program_index(len + 1, (1 << len) | value) as usize] = Some(p);
        out.outputs[program_index(len + 1, value) as usize] = *slot;
    }
    Ok(out)
}
