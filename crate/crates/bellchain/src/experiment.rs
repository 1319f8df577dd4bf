//! Finite-statistics emulation: Born-rule outcome sampling and an empirical
//! I_N estimate wrapped in a distribution-free confidence certificate.
//!
//! The certificate is Hoeffding's inequality with a union bound over the 2N
//! chain terms: each term frequency k/m deviates from its mean by more than
//! √(ln(2·2N/(1−confidence)) / 2m) with probability at most (1−confidence)/2N,
//! so i_n_hat ± half_width covers the true I_N with the stated confidence.
//! This is a worst-case bound, chosen over exact binomial intervals because
//! the quantity being certified is itself a worst-case statement.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::io::{BufRead, Write};

use crate::chained::{chain_pairs, ChainPair, ScenarioSettings};
use crate::error::{Error, Result};
use crate::quantum::{joint_probability, EntangledPairState};

/// Generator recorded in trial logs; sampling uses independent streams of
/// this algorithm per fixed-size round chunk, so outputs are identical for
/// any thread count.
pub const RNG_ALGORITHM: &str = "chacha12";

/// Rounds per RNG stream chunk.
const CHUNK_ROUNDS: u64 = 1 << 16;

/// Minimum samples required per chain term before estimating.
pub const MIN_SAMPLES_PER_TERM: u64 = 100;

/// One sampled round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub round: u64,
    pub a_index: u32,
    pub b_index: u32,
    pub x: u8,
    pub y: u8,
}

/// Which setting pairs get sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    /// Cycle deterministically through the 2N chain pairs (sample-efficient;
    /// the default).
    ChainOnly,
    /// Draw (a, b) uniformly from all N² pairs each round.
    Uniform,
}

impl Schedule {
    pub fn name(&self) -> &'static str {
        match self {
            Schedule::ChainOnly => "chain-only",
            Schedule::Uniform => "uniform",
        }
    }
}

/// Cumulative outcome distribution for one setting pair, in (x,y) order
/// (0,0), (0,1), (1,0), (1,1).
fn cumulative(state: &EntangledPairState, settings: &ScenarioSettings, a: usize, b: usize) -> [f64; 4] {
    let mut cum = [0.0; 4];
    let mut acc = 0.0;
    for (k, slot) in cum.iter_mut().enumerate() {
        acc += joint_probability(
            state,
            settings.alice_angles()[a],
            settings.bob_angles()[b],
            (k / 2) as u8,
            (k % 2) as u8,
        );
        *slot = acc;
    }
    cum
}

fn draw_outcome(cum: &[f64; 4], u: f64) -> (u8, u8) {
    let mut k = 3;
    for (i, &c) in cum.iter().enumerate() {
        if u < c {
            k = i;
            break;
        }
    }
    ((k / 2) as u8, (k % 2) as u8)
}

/// Samples Born-rule outcomes for `rounds` rounds. Deterministic in `seed`:
/// each 2^16-round chunk runs on its own RNG stream, so results do not depend
/// on how chunks are scheduled across threads.
pub fn sample_rounds(
    state: &EntangledPairState,
    settings: &ScenarioSettings,
    rounds: u64,
    seed: u64,
    schedule: Schedule,
) -> Result<Vec<TrialRecord>> {
    if rounds == 0 {
        return Err(Error::NoRounds);
    }
    let n = settings.n();
    let pairs = settings.chain_pairs();
    let chain_cum: Vec<[f64; 4]> = pairs
        .iter()
        .map(|p| cumulative(state, settings, p.a_index, p.b_index))
        .collect();
    let grid_cum: Vec<[f64; 4]> = match schedule {
        Schedule::Uniform => (0..n * n)
            .map(|i| cumulative(state, settings, i / n, i % n))
            .collect(),
        Schedule::ChainOnly => Vec::new(),
    };

    let n_chunks = rounds.div_ceil(CHUNK_ROUNDS);
    let chunks: Vec<Vec<TrialRecord>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let start = chunk * CHUNK_ROUNDS;
            let end = (start + CHUNK_ROUNDS).min(rounds);
            let mut out = Vec::with_capacity((end - start) as usize);
            for round in start..end {
                let (a, b, cum) = match schedule {
                    Schedule::ChainOnly => {
                        let pair = &pairs[(round % (2 * n as u64)) as usize];
                        (pair.a_index, pair.b_index, &chain_cum[(round % (2 * n as u64)) as usize])
                    }
                    Schedule::Uniform => {
                        let a = ((rng.gen::<f64>() * n as f64) as usize).min(n - 1);
                        let b = ((rng.gen::<f64>() * n as f64) as usize).min(n - 1);
                        (a, b, &grid_cum[a * n + b])
                    }
                };
                let (x, y) = draw_outcome(cum, rng.gen::<f64>());
                out.push(TrialRecord {
                    round,
                    a_index: a as u32,
                    b_index: b as u32,
                    x,
                    y,
                });
            }
            out
        })
        .collect();
    Ok(chunks.concat())
}

/// An empirical upper bound on I_N at a stated confidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalCertificate {
    pub n: usize,
    pub n_rounds: u64,
    /// Plug-in estimate: sum of empirical chain-term frequencies.
    pub i_n_hat: f64,
    pub confidence: f64,
    /// Hoeffding union-bound half interval over the 2N terms.
    pub half_width: f64,
    /// i_n_hat + half_width.
    pub certified_epsilon: f64,
}

/// Estimates I_N from sampled rounds and attaches the confidence interval.
/// Records at non-chain setting pairs are ignored; every chain pair must
/// appear at least [`MIN_SAMPLES_PER_TERM`] times.
pub fn estimate_chained(
    records: &[TrialRecord],
    settings: &ScenarioSettings,
    confidence: f64,
) -> Result<EmpiricalCertificate> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidConfidence(confidence));
    }
    let n = settings.n();
    let pairs: Vec<ChainPair> = chain_pairs(n);
    let mut position = vec![usize::MAX; n * n];
    for (i, p) in pairs.iter().enumerate() {
        position[p.a_index * n + p.b_index] = i;
    }
    let mut m = vec![0u64; 2 * n];
    let mut k = vec![0u64; 2 * n];
    for r in records {
        let (a, b) = (r.a_index as usize, r.b_index as usize);
        if a >= n || b >= n {
            continue;
        }
        let pos = position[a * n + b];
        if pos == usize::MAX {
            continue;
        }
        m[pos] += 1;
        let unequal = r.x != r.y;
        if unequal != pairs[pos].scores_equal {
            k[pos] += 1;
        }
    }
    for (pos, &count) in m.iter().enumerate() {
        if count < MIN_SAMPLES_PER_TERM {
            return Err(Error::Undersampled {
                a_index: pairs[pos].a_index,
                b_index: pairs[pos].b_index,
                got: count,
                need: MIN_SAMPLES_PER_TERM,
            });
        }
    }
    let terms = 2 * n as u64;
    let log_term = (2.0 * terms as f64 / (1.0 - confidence)).ln();
    let i_n_hat: f64 = m
        .iter()
        .zip(&k)
        .map(|(&mi, &ki)| ki as f64 / mi as f64)
        .sum();
    let half_width: f64 = m
        .iter()
        .map(|&mi| (log_term / (2.0 * mi as f64)).sqrt())
        .sum();
    Ok(EmpiricalCertificate {
        n,
        n_rounds: records.len() as u64,
        i_n_hat,
        confidence,
        half_width,
        certified_epsilon: i_n_hat + half_width,
    })
}

/// Trial log header line.
pub const TRIAL_HEADER: &str = "round,a_index,b_index,x,y";

/// Writes a trial log: `# key=value` metadata lines, the header, then one
/// CSV record per round.
pub fn write_trials<W: Write>(
    mut w: W,
    metadata: &[(String, String)],
    records: &[TrialRecord],
) -> Result<()> {
    for (key, value) in metadata {
        writeln!(w, "# {key}={value}")?;
    }
    writeln!(w, "{TRIAL_HEADER}")?;
    for r in records {
        writeln!(w, "{},{},{},{},{}", r.round, r.a_index, r.b_index, r.x, r.y)?;
    }
    Ok(())
}

/// Metadata key/value pairs from a trial log's `# key=value` header lines.
pub type TrialMetadata = Vec<(String, String)>;

/// Reads a trial log written by [`write_trials`].
pub fn read_trials<R: BufRead>(r: R) -> Result<(TrialMetadata, Vec<TrialRecord>)> {
    let mut metadata = Vec::new();
    let mut records = Vec::new();
    let mut seen_header = false;
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let parse_err = |message: &str| Error::TrialLogParse {
            line: lineno,
            message: message.to_owned(),
        };
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            match rest.split_once('=') {
                Some((key, value)) => metadata.push((key.to_owned(), value.to_owned())),
                None => return Err(parse_err("metadata line without key=value")),
            }
            continue;
        }
        if !seen_header {
            if line != TRIAL_HEADER {
                return Err(parse_err("missing trial header"));
            }
            seen_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(parse_err("expected 5 fields"));
        }
        let record = (|| -> Option<TrialRecord> {
            Some(TrialRecord {
                round: fields[0].parse().ok()?,
                a_index: fields[1].parse().ok()?,
                b_index: fields[2].parse().ok()?,
                x: fields[3].parse().ok()?,
                y: fields[4].parse().ok()?,
            })
        })();
        match record {
            Some(r) => records.push(r),
            None => return Err(parse_err("unparseable record")),
        }
    }
    if !seen_header {
        return Err(Error::TrialLogParse {
            line: 0,
            message: "empty trial log".to_owned(),
        });
    }
    Ok((metadata, records))
}
