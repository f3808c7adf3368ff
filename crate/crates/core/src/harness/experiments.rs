use std::time::Instant;

use rand::RngCore;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::codes::{decode, encode, from_index, index_of, is_prefix_free, BitString, CodeLevel};
use crate::commsim::{
    average_cost, best_coin_sequence, build_trivial_ip_protocol, ceil_log2, describe_z, flip_reduce, inner_product,
    reconstruct_z, xor_corrupt_family, CostMode, MAX_COIN_SCAN_N, MAX_ENUMERATE_N, MAX_EXHAUSTIVE_COST_N,
};
use crate::descsys::{check_counting_lemma, random_description_system};
use crate::majority::{majority_oracle, tournament, MajorityVerdict, TournamentMode};
use crate::matmul::{naive_multiply, quick_multiply, random_pair};
use crate::rng::{seeded_bits, tag, trial_stream, trial_stream_id};

use super::stats::{block_stats, summarize, StatSummary};
use super::{Experiment, ExperimentConfig, HarnessError};

/// Strings of length at most this are round-tripped exhaustively by `commsim_verify`.
const COMMSIM_EXHAUSTIVE_N: usize = 5;
const COMMSIM_DEFAULT_SAMPLES: u64 = 1000;

pub(crate) enum Table {
    Matmul(Vec<MatmulRow>),
    Majority(Vec<MajorityRow>),
    Commsim(Vec<CommsimRow>),
    Descsys(Vec<DescsysRow>),
    Codes(Vec<CodesRow>),
}

pub(crate) struct Body {
    pub rows: u64,
    pub failures: u64,
    pub measure: &'static str,
    pub stats: StatSummary,
    pub details: serde_json::Value,
}

pub(crate) fn dispatch(cfg: &ExperimentConfig) -> Result<(Table, Body), HarnessError> {
    match cfg.experiment {
        Experiment::MatmulBench => matmul_bench(cfg),
        Experiment::MajorityBench => majority_bench(cfg),
        Experiment::CommsimVerify => commsim_verify(cfg),
        Experiment::DescsysCheck => descsys_check(cfg),
        Experiment::CodesCheck => codes_check(cfg),
    }
}

fn jobs(cfg: &ExperimentConfig) -> Vec<(usize, u64)> {
    cfg.sizes.iter().flat_map(|&n| (0..cfg.trials).map(move |t| (n, t))).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatmulRow {
    pub n: usize,
    pub trial: u64,
    pub total_probes: u64,
    pub max_depth: u32,
    pub wallclock_ns: u64,
}

impl MatmulRow {
    pub const HEADER: &'static [&'static str] = &["n", "trial", "total_probes", "max_depth", "wallclock_ns"];
}

fn matmul_bench(cfg: &ExperimentConfig) -> Result<(Table, Body), HarnessError> {
    let results = jobs(cfg)
        .into_par_iter()
        .map(|(n, trial)| {
            let (a, b) = random_pair(n, cfg.master_seed, trial);
            let start = Instant::now();
            let (c, counters) = quick_multiply(&a, &b)?;
            let elapsed = start.elapsed().as_nanos() as u64;
            let ok = c == naive_multiply(&a, &b)?;
            let row = MatmulRow {
                n,
                trial,
                total_probes: counters.total_probes(),
                max_depth: counters.max_depth(),
                wallclock_ns: if cfg.wallclock { elapsed } else { 0 },
            };
            Ok((row, ok, counters.runtime_proxy()))
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let mismatches = results.iter().filter(|r| !r.1).count() as u64;
    let stats = summarize(&results.iter().map(|r| (r.0.n as u64, r.0.total_probes as f64)).collect::<Vec<_>>())?;
    let proxy = summarize(&results.iter().map(|r| (r.0.n as u64, r.2 as f64)).collect::<Vec<_>>())?;
    let per_n2: Vec<_> = stats
        .per_size
        .iter()
        .map(|s| json!({ "n": s.size, "mean_probes_over_n2": s.mean / (s.size * s.size) as f64 }))
        .collect();
    let details = json!({
        "mismatches": mismatches,
        "runtime_proxy": proxy,
        "probes_over_n2": per_n2,
    });
    let rows: Vec<MatmulRow> = results.into_iter().map(|r| r.0).collect();
    let body = Body { rows: rows.len() as u64, failures: mismatches, measure: "total_probes", stats, details };
    Ok((Table::Matmul(rows), body))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MajorityRow {
    pub n: usize,
    pub trial: u64,
    pub comparisons: u64,
    pub verdict: String,
    pub oracle_agrees: bool,
}

impl MajorityRow {
    pub const HEADER: &'static [&'static str] = &["n", "trial", "comparisons", "verdict", "oracle_agrees"];
}

fn majority_bench(cfg: &ExperimentConfig) -> Result<(Table, Body), HarnessError> {
    let results = jobs(cfg)
        .into_par_iter()
        .map(|(n, trial)| {
            let x = seeded_bits(cfg.master_seed, trial_stream_id(tag::MAJORITY, n as u64, trial), n);
            let run = tournament(&x, cfg.mode);
            let truth = majority_oracle(&x);
            let agrees = run.verdict == truth;
            let promised = cfg.mode == TournamentMode::Verified || truth != MajorityVerdict::NoMajority;
            let row = MajorityRow {
                n,
                trial,
                comparisons: run.total_comparisons(),
                verdict: run.verdict.to_string(),
                oracle_agrees: agrees,
            };
            (row, promised && !agrees, block_stats(&x, &[]).discordant_pairs)
        })
        .collect::<Vec<_>>();
    let failures = results.iter().filter(|r| r.1).count() as u64;
    let stats = summarize(&results.iter().map(|r| (r.0.n as u64, r.0.comparisons as f64)).collect::<Vec<_>>())?;
    let discordant = summarize(&results.iter().map(|r| (r.0.n as u64, r.2 as f64)).collect::<Vec<_>>())?;
    let per_size: Vec<_> = stats
        .per_size
        .iter()
        .zip(&discordant.per_size)
        .map(|(s, d)| {
            let n = s.size as f64;
            let half_width = 5.0 * (n.log2() / n).sqrt();
            json!({
                "n": s.size,
                "residue_mod_4": s.size % 4,
                "mean_ratio": s.mean / n,
                "window": [2.0 / 3.0 - half_width, 2.0 / 3.0 + half_width],
                "mean_discordant_pairs": d.mean,
                "expected_discordant_pairs": (s.size / 2) as f64 / 2.0,
            })
        })
        .collect();
    let details = json!({ "mode": cfg.mode, "per_size": per_size });
    let rows: Vec<MajorityRow> = results.into_iter().map(|r| r.0).collect();
    let body = Body { rows: rows.len() as u64, failures, measure: "comparisons", stats, details };
    Ok((Table::Majority(rows), body))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommsimRow {
    pub n: usize,
    pub case: u64,
    pub z: String,
    pub description_len: usize,
    pub transcript_len: usize,
    pub index_width: usize,
    pub coord_width: usize,
    pub round_trip: bool,
    pub length_ok: bool,
}

impl CommsimRow {
    pub const HEADER: &'static [&'static str] = &[
        "n",
        "case",
        "z",
        "description_len",
        "transcript_len",
        "index_width",
        "coord_width",
        "round_trip",
        "length_ok",
    ];
}

/// Per-size result of the reconstruction check on the trivial protocol.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommsimReport {
    pub n: usize,
    pub checks_run: u64,
    pub failures: u64,
    pub mean_cost: f64,
    /// Least error over coin strings of the corrupted family; absent above the scan limit.
    pub min_coin_error: Option<f64>,
}

fn ratio_f64(r: num_rational::Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Round-trips every `z` with `⟨x, y⟩ = 0` when `n` is small, otherwise
/// `samples` seeded ones (inputs with product 1 go through `flip_reduce`).
pub fn commsim_report(
    n: usize,
    samples: u64,
    master_seed: u64,
    workers: usize,
) -> Result<(Vec<CommsimRow>, CommsimReport), HarnessError> {
    if n == 0 || n > MAX_ENUMERATE_N {
        return Err(HarnessError::InvalidConfig(format!("commsim size {n} outside 1..={MAX_ENUMERATE_N}")));
    }
    let p = build_trivial_ip_protocol(n)?;
    let inputs: Vec<BitString> = if n <= COMMSIM_EXHAUSTIVE_N {
        BitString::all_of_length(2 * n)
            .filter(|z| {
                let (x, y) = z.split_at(n);
                !inner_product(&x, &y).expect("equal halves")
            })
            .collect()
    } else {
        (0..samples)
            .map(|t| {
                let z = seeded_bits(master_seed, trial_stream_id(tag::COMMSIM, n as u64, t), 2 * n);
                flip_reduce(&z).unwrap_or(z)
            })
            .collect()
    };
    let rows = inputs
        .par_iter()
        .enumerate()
        .map(|(case, z)| {
            let d = describe_z(&p, z)?;
            let round_trip = reconstruct_z(&p, &d.bits, n)? == *z;
            let length_ok = d.len() == d.transcript_len + ceil_log2(d.s_size) + (n - d.rank)
                && d.rank >= d.index_width
                && d.len() <= 2 * n;
            Ok(CommsimRow {
                n,
                case: case as u64,
                z: z.to_string(),
                description_len: d.len(),
                transcript_len: d.transcript_len,
                index_width: d.index_width,
                coord_width: d.coord_width,
                round_trip,
                length_ok,
            })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let failures = rows.iter().filter(|r| !r.round_trip || !r.length_ok).count() as u64;
    let mode = if n <= MAX_EXHAUSTIVE_COST_N {
        CostMode::Exhaustive
    } else {
        CostMode::Sampled { trials: COMMSIM_DEFAULT_SAMPLES, seed: master_seed }
    };
    let mean_cost = average_cost(&p, mode)?.mean;
    let min_coin_error = if n <= MAX_COIN_SCAN_N {
        Some(ratio_f64(best_coin_sequence(&xor_corrupt_family(n), workers)?.best_error))
    } else {
        None
    };
    let report = CommsimReport { n, checks_run: rows.len() as u64, failures, mean_cost, min_coin_error };
    Ok((rows, report))
}

fn commsim_verify(cfg: &ExperimentConfig) -> Result<(Table, Body), HarnessError> {
    let samples = if cfg.trials == 0 { COMMSIM_DEFAULT_SAMPLES } else { cfg.trials };
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for &n in &cfg.sizes {
        let (r, report) = commsim_report(n, samples, cfg.master_seed, cfg.workers)?;
        rows.extend(r);
        reports.push(report);
    }
    let stats = summarize(&rows.iter().map(|r| (r.n as u64, r.description_len as f64)).collect::<Vec<_>>())?;
    let failures = reports.iter().map(|r| r.failures).sum();
    let body = Body {
        rows: rows.len() as u64,
        failures,
        measure: "description_len",
        stats,
        details: json!({ "per_size": reports }),
    };
    Ok((Table::Commsim(rows), body))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DescsysRow {
    pub universe_len: usize,
    pub system: u64,
    pub c: u32,
    pub m: u64,
    pub threshold: i64,
    pub count_incompressible: u64,
    pub proof_bound: u64,
    pub stated_bound: String,
    pub holds: bool,
}

impl DescsysRow {
    pub const HEADER: &'static [&'static str] = &[
        "universe_len",
        "system",
        "c",
        "m",
        "threshold",
        "count_incompressible",
        "proof_bound",
        "stated_bound",
        "holds",
    ];
}

/// Checks the counting lemma on `systems` seeded random systems against the
/// set of all strings of length `universe_len`, one row per `(system, c)`.
pub fn lemma_rows(
    program_len: usize,
    universe_len: usize,
    c_values: &[u32],
    systems: u64,
    master_seed: u64,
) -> Result<Vec<DescsysRow>, HarnessError> {
    let set: Vec<BitString> = BitString::all_of_length(universe_len).collect();
    let groups = (0..systems)
        .into_par_iter()
        .map(|system| {
            let seed = trial_stream(master_seed, tag::DESCSYS, universe_len as u64, system).next_u64();
            let d = random_description_system(program_len, universe_len, None, seed)?;
            c_values
                .iter()
                .map(|&c| {
                    let r = check_counting_lemma(&d, &set, c)?;
                    Ok(DescsysRow {
                        universe_len,
                        system,
                        c,
                        m: r.m,
                        threshold: r.threshold,
                        count_incompressible: r.count_incompressible,
                        proof_bound: r.proof_bound,
                        stated_bound: format!("{}/{}", r.stated_bound.numer(), r.stated_bound.denom()),
                        holds: r.holds,
                    })
                })
                .collect::<Result<Vec<_>, HarnessError>>()
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    Ok(groups.into_iter().flatten().collect())
}

fn descsys_check(cfg: &ExperimentConfig) -> Result<(Table, Body), HarnessError> {
    let mut rows = Vec::new();
    for &u in &cfg.sizes {
        rows.extend(lemma_rows(cfg.program_len, u, &cfg.c_values, cfg.trials, cfg.master_seed)?);
    }
    let failures = rows.iter().filter(|r| !r.holds).count() as u64;
    let stats =
        summarize(&rows.iter().map(|r| (r.universe_len as u64, r.count_incompressible as f64)).collect::<Vec<_>>())?;
    let body = Body {
        rows: rows.len() as u64,
        failures,
        measure: "count_incompressible",
        stats,
        details: json!({ "program_len": cfg.program_len, "c_values": cfg.c_values }),
    };
    Ok((Table::Descsys(rows), body))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodesRow {
    pub max_len: usize,
    pub level: u8,
    pub strings: u64,
    pub round_trip_failures: u64,
    pub length_identity_failures: u64,
    pub prefix_free: bool,
    pub mean_codeword_len: f64,
}

impl CodesRow {
    pub const HEADER: &'static [&'static str] = &[
        "max_len",
        "level",
        "strings",
        "round_trip_failures",
        "length_identity_failures",
        "prefix_free",
        "mean_codeword_len",
    ];
}

/// Closed-form codeword lengths, independent of the encoder.
fn expected_len(level: u8, x: &BitString) -> Option<usize> {
    let l = x.len();
    let ll = |s: usize| from_index(s as u64).len();
    match level {
        0 => index_of(x).map(|v| v as usize + 1),
        1 => Some(2 * l + 1),
        2 => Some(l + 2 * ll(l) + 1),
        3 => {
            let m = ll(l);
            Some(l + m + 2 * ll(m) + 1)
        }
        _ => None,
    }
}

fn codes_check(cfg: &ExperimentConfig) -> Result<(Table, Body), HarnessError> {
    let jobs: Vec<(usize, CodeLevel)> =
        cfg.sizes.iter().flat_map(|&len| CodeLevel::ALL.into_iter().map(move |level| (len, level))).collect();
    let rows = jobs
        .into_par_iter()
        .map(|(max_len, level)| {
            let suffix: BitString = "10".parse().expect("literal");
            let mut words = Vec::new();
            let (mut rt, mut li, mut total) = (0u64, 0u64, 0usize);
            for x in BitString::all_up_to(max_len) {
                let w = encode(level, &x)?;
                match decode(level, &w.concat(&suffix)) {
                    Ok((back, rest)) if back == x && rest == suffix => {}
                    _ => rt += 1,
                }
                if expected_len(level.get(), &x) != Some(w.len()) {
                    li += 1;
                }
                total += w.len();
                words.push(w);
            }
            let strings = words.len() as u64;
            Ok(CodesRow {
                max_len,
                level: level.get(),
                strings,
                round_trip_failures: rt,
                length_identity_failures: li,
                prefix_free: is_prefix_free(words.iter()).is_prefix_free(),
                mean_codeword_len: total as f64 / strings as f64,
            })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let failures =
        rows.iter().map(|r| r.round_trip_failures + r.length_identity_failures + u64::from(!r.prefix_free)).sum();
    let stats = summarize(&rows.iter().map(|r| (r.max_len as u64, r.mean_codeword_len)).collect::<Vec<_>>())?;
    let body = Body { rows: rows.len() as u64, failures, measure: "mean_codeword_len", stats, details: json!({}) };
    Ok((Table::Codes(rows), body))
}
