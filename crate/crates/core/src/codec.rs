//! Constructive zero-error codecs.
//!
//! The two-phase single-bit codec sends one bit error-free over an SD-DMC
//! with acausal encoder side information. Phase 1 never conveys the bit: at
//! each step the current candidate set of phase-2 state suffixes is split
//! into chunks, the encoder transmits an input that makes the chunk index of
//! the true suffix an impossible output, and the observed output therefore
//! eliminates one chunk the truth is not in. Phase 2 assigns each
//! (bit, surviving suffix) pair a codeword such that any two codewords of
//! opposite bits collide at some position with disjoint output supports, so
//! the decoder can never confuse the bits.
//!
//! The feedback variant chunks by the output alphabet; the no-feedback
//! variant replaces outputs with a certificate's disjoint output sets so the
//! encoder can track eliminations without seeing the channel output.

use serde::Serialize;

use crate::channel::SupportChannel;
use crate::conditions::{
    check_acausal_positive, check_causal_positive, disjoint_input_pair, Counterexample,
    NofbCertificate, Witness,
};
use crate::error::Error;
use crate::rng::SplitMix64;
use crate::Result;

/// Feedback or certificate-driven phase 1.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum PlanMode {
    Feedback,
    NoFeedback { certificate: NofbCertificate },
}

/// All tables and parameters of the two-phase single-bit codec.
#[derive(Debug, Clone, Serialize)]
pub struct BitCodecPlan {
    pub n1: usize,
    pub n2: usize,
    pub nbit: usize,
    /// Number of chunks per phase-1 split: `ny` with feedback, `kappa`
    /// without.
    pub chunks: usize,
    /// `avoid_table[s][y]` is an input with `W(y | ., s) = 0` (feedback
    /// phase 1 only; empty in no-feedback mode).
    pub avoid_table: Vec<Vec<usize>>,
    /// `pair_table[s][s']` is an input pair whose rows at `(s, s')` share no
    /// output.
    pub pair_table: Vec<Vec<(usize, usize)>>,
    /// Input filling the codeword positions no pair claims.
    pub filler: usize,
    pub mode: PlanMode,
    pub ns: usize,
    pub ny: usize,
}

/// Plan sizing.
#[derive(Debug, Clone, Copy, Default)]
pub enum PlanSizing {
    /// The explicit parameter choice `n2 = 2*chunks` with `n1` from the
    /// closed-form ceiling.
    #[default]
    Standard,
    /// Caller-chosen `n2`; the smallest `n1` whose worst-case survivor bound
    /// fits it.
    MinimalN1 { n2: usize },
}

fn phase1_length(chunks: usize, ns: usize, sizing: PlanSizing) -> Result<(usize, usize)> {
    let c = chunks as f64;
    match sizing {
        PlanSizing::Standard => {
            let n1 = ((2.0 * c * (ns as f64).log2() - c.log2()) / (c.log2() - (c - 1.0).log2()))
                .ceil() as usize;
            Ok((n1, 2 * chunks))
        }
        PlanSizing::MinimalN1 { n2 } => {
            let mut n1 = 0usize;
            loop {
                let bound = ((c - 1.0) / c).powi(n1 as i32) * (ns as f64).powi(n2 as i32) + c;
                if bound <= n2 as f64 {
                    return Ok((n1, n2));
                }
                n1 += 1;
                if n1 > 1_000_000 {
                    return Err(Error::OutOfRange(format!(
                        "no phase-1 length fits n2 = {n2}; pick n2 > {chunks}"
                    )));
                }
            }
        }
    }
}

fn build_pair_table(ch: &SupportChannel) -> Result<Vec<Vec<(usize, usize)>>> {
    (0..ch.ns())
        .map(|s| {
            (0..ch.ns())
                .map(|s_prime| {
                    disjoint_input_pair(ch, s, s_prime).ok_or(Error::NotPositive { s, s_prime })
                })
                .collect()
        })
        .collect()
}

/// Plans the feedback codec. Requires the acausal positivity condition;
/// with a single state one channel use suffices.
pub fn plan_bit_codec_fb(ch: &SupportChannel, sizing: PlanSizing) -> Result<BitCodecPlan> {
    let verdict = check_acausal_positive(ch);
    if let Some(Counterexample::StatePair { s, s_prime }) = verdict.counterexample {
        return Err(Error::NotPositive { s, s_prime });
    }
    let pair_table = build_pair_table(ch)?;
    let (n1, n2) = if ch.ns() == 1 {
        (0, 1)
    } else {
        phase1_length(ch.ny(), ch.ns(), sizing)?
    };
    let avoid_table: Vec<Vec<usize>> = (0..ch.ns())
        .map(|s| {
            (0..ch.ny())
                .map(|y| {
                    (0..ch.nx())
                        .find(|&x| !ch.supports(x, s, y))
                        .expect("positivity implies an avoiding input per (s, y)")
                })
                .collect()
        })
        .collect();
    Ok(BitCodecPlan {
        n1,
        n2,
        nbit: n1 + n2,
        chunks: ch.ny(),
        avoid_table,
        pair_table,
        filler: 0,
        mode: PlanMode::Feedback,
        ns: ch.ns(),
        ny: ch.ny(),
    })
}

/// Plans the no-feedback codec from a positivity certificate. Phase 1 uses
/// `kappa`-way splits; phase 2 is the feedback codec's (it never used the
/// feedback link).
pub fn plan_bit_codec_nofb(ch: &SupportChannel, cert: &NofbCertificate) -> Result<BitCodecPlan> {
    cert.validate(ch)?;
    let pair_table = build_pair_table(ch)?;
    let (n1, n2) = if ch.ns() == 1 {
        (0, 1)
    } else {
        phase1_length(cert.kappa, ch.ns(), PlanSizing::Standard)?
    };
    Ok(BitCodecPlan {
        n1,
        n2,
        nbit: n1 + n2,
        chunks: cert.kappa,
        avoid_table: Vec::new(),
        pair_table,
        filler: 0,
        mode: PlanMode::NoFeedback {
            certificate: cert.clone(),
        },
        ns: ch.ns(),
        ny: ch.ny(),
    })
}

/// Candidate set of phase-2 state suffixes, kept sorted lexicographically.
/// Suffixes are stored as ranks in the lexicographic enumeration of
/// `S^{n2}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SurvivorSet {
    pub ns: usize,
    pub n2: usize,
    ranks: Vec<u64>,
}

impl SurvivorSet {
    pub fn full(ns: usize, n2: usize) -> Self {
        let total = (ns as u64).pow(n2 as u32);
        Self {
            ns,
            n2,
            ranks: (0..total).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn rank_of(seq: &[usize], ns: usize) -> u64 {
        seq.iter().fold(0u64, |acc, &s| acc * ns as u64 + s as u64)
    }

    pub fn seq_of(&self, rank: u64) -> Vec<usize> {
        let mut seq = vec![0usize; self.n2];
        let mut r = rank;
        for i in (0..self.n2).rev() {
            seq[i] = (r % self.ns as u64) as usize;
            r /= self.ns as u64;
        }
        seq
    }

    pub fn contains(&self, rank: u64) -> bool {
        self.ranks.binary_search(&rank).is_ok()
    }

    pub fn position_of(&self, rank: u64) -> Option<usize> {
        self.ranks.binary_search(&rank).ok()
    }

    pub fn rank_at(&self, position: usize) -> u64 {
        self.ranks[position]
    }

    /// Contiguous chunk boundaries: `count` chunks, larger chunks first,
    /// sizes between floor and ceil of `len/count`.
    pub fn chunk_bounds(&self, count: usize) -> Vec<(usize, usize)> {
        let len = self.ranks.len();
        let base = len / count;
        let rem = len % count;
        let mut bounds = Vec::with_capacity(count);
        let mut start = 0;
        for j in 0..count {
            let size = if j < rem { base + 1 } else { base };
            bounds.push((start, start + size));
            start += size;
        }
        bounds
    }

    pub fn chunk_of_position(&self, count: usize, position: usize) -> usize {
        self.chunk_bounds(count)
            .iter()
            .position(|&(a, b)| position >= a && position < b)
            .expect("position lies in some chunk")
    }

    /// Removes the chunks listed in `remove`, returning how many suffixes
    /// were dropped.
    pub fn remove_chunks(&mut self, count: usize, remove: &[usize]) -> usize {
        let bounds = self.chunk_bounds(count);
        let mut keep = Vec::with_capacity(self.ranks.len());
        let mut removed = 0usize;
        for (j, &(a, b)) in bounds.iter().enumerate() {
            if remove.contains(&j) {
                removed += b - a;
            } else {
                keep.extend_from_slice(&self.ranks[a..b]);
            }
        }
        self.ranks = keep;
        removed
    }
}

/// One phase-1 step of a run.
#[derive(Debug, Clone, Serialize)]
pub struct Phase1Step {
    pub state: usize,
    pub true_chunk: usize,
    pub input: usize,
    pub output: usize,
    pub removed: usize,
    pub survivors: usize,
}

/// Trace of a phase-1 run: all intermediate sizes plus the shrink-bound
/// check at every step.
#[derive(Debug, Clone, Serialize)]
pub struct Phase1Trace {
    pub steps: Vec<Phase1Step>,
    pub final_survivors: SurvivorSet,
    /// Per-step check `|S_i| <= |S_{i-1}| - floor(|S_{i-1}| / chunks)`.
    pub shrink_bound_ok: bool,
    /// Final check against `((c-1)/c)^{n1} * ns^{n2} + c`.
    pub final_bound_ok: bool,
}

/// Replays phase 1 against a given state sequence and observed outputs.
///
/// `outputs` must hold the first `n1` observed channel outputs; each must be
/// possible under the input the plan dictates, otherwise the transcript is
/// corrupt and the step reports [`Error::InfeasibleOutput`].
pub fn run_phase1(
    plan: &BitCodecPlan,
    ch: &SupportChannel,
    states: &[usize],
    outputs: &[usize],
) -> Result<Phase1Trace> {
    if states.len() != plan.nbit {
        return Err(Error::OutOfRange(format!(
            "state sequence must cover all {} channel uses",
            plan.nbit
        )));
    }
    if outputs.len() < plan.n1 {
        return Err(Error::OutOfRange(format!(
            "phase 1 needs {} outputs, got {}",
            plan.n1,
            outputs.len()
        )));
    }
    let suffix_rank = SurvivorSet::rank_of(&states[plan.n1..], plan.ns);
    let mut survivors = SurvivorSet::full(plan.ns, plan.n2);
    let mut steps = Vec::with_capacity(plan.n1);
    let mut shrink_ok = true;
    for i in 0..plan.n1 {
        let s = states[i];
        let y = outputs[i];
        let before = survivors.len();
        let pos = survivors
            .position_of(suffix_rank)
            .expect("true suffix survives every step");
        let true_chunk = survivors.chunk_of_position(plan.chunks, pos);
        let (input, remove) = step_action(plan, ch, s, true_chunk, y, i)?;
        let removed = survivors.remove_chunks(plan.chunks, &remove);
        let after = survivors.len();
        if after > before - before / plan.chunks {
            shrink_ok = false;
        }
        steps.push(Phase1Step {
            state: s,
            true_chunk,
            input,
            output: y,
            removed,
            survivors: after,
        });
    }
    let c = plan.chunks as f64;
    let final_bound =
        ((c - 1.0) / c).powi(plan.n1 as i32) * (plan.ns as f64).powi(plan.n2 as i32) + c;
    let final_bound_ok = (survivors.len() as f64) <= final_bound;
    Ok(Phase1Trace {
        steps,
        final_survivors: survivors,
        shrink_bound_ok: shrink_ok,
        final_bound_ok,
    })
}

/// The input the encoder sends at a phase-1 step and the chunks the decoder
/// eliminates after observing `y`.
fn step_action(
    plan: &BitCodecPlan,
    ch: &SupportChannel,
    s: usize,
    true_chunk: usize,
    y: usize,
    step: usize,
) -> Result<(usize, Vec<usize>)> {
    match &plan.mode {
        PlanMode::Feedback => {
            let input = plan.avoid_table[s][true_chunk];
            if !ch.supports(input, s, y) {
                return Err(Error::InfeasibleOutput { step, y });
            }
            // The chunk indexed by the observed output cannot hold the
            // truth: the encoder would have avoided producing that output.
            Ok((input, vec![y]))
        }
        PlanMode::NoFeedback { certificate } => {
            let input = certificate.x_table[s][true_chunk];
            if !ch.supports(input, s, y) {
                return Err(Error::InfeasibleOutput { step, y });
            }
            let l_star = certificate
                .y_sets
                .iter()
                .position(|set| set.contains(&y))
                .ok_or(Error::InfeasibleOutput { step, y })?;
            let mask: u64 = certificate.y_sets[l_star]
                .iter()
                .fold(0, |m, &yy| m | 1 << yy);
            // Every chunk whose input avoids the observed set at every
            // state is eliminated.
            let remove: Vec<usize> = (0..certificate.kappa)
                .filter(|&k| {
                    (0..ch.ns()).all(|sp| ch.row_mask(certificate.x_table[sp][k], sp) & mask == 0)
                })
                .collect();
            Ok((input, remove))
        }
    }
}

/// Phase-2 codebook: `codewords[m][k]` is the length-`n2` codeword of bit
/// `m` under the `k`-th surviving suffix.
#[derive(Debug, Clone, Serialize)]
pub struct Phase2Codebook {
    pub codewords: [Vec<Vec<usize>>; 2],
}

/// Builds the codebook over the surviving suffixes.
///
/// Every ordered suffix pair `(k, l)` claims position `(l - k) mod L`: the
/// bit-0 codeword of suffix `k` and the bit-1 codeword of suffix `l` get the
/// disjoint input pair for their states at that position. Distinct pairs
/// with the same position differ in both coordinates, so no cell is written
/// twice. The separation property is asserted before returning.
pub fn phase2_codebook(
    plan: &BitCodecPlan,
    ch: &SupportChannel,
    survivors: &SurvivorSet,
) -> Result<Phase2Codebook> {
    let l_count = survivors.len();
    if l_count > plan.n2 {
        return Err(Error::SurvivorOverflow {
            survivors: l_count,
            n2: plan.n2,
        });
    }
    let seqs: Vec<Vec<usize>> = (0..l_count)
        .map(|k| survivors.seq_of(survivors.rank_at(k)))
        .collect();
    let mut codewords = [
        vec![vec![plan.filler; plan.n2]; l_count],
        vec![vec![plan.filler; plan.n2]; l_count],
    ];
    for k in 0..l_count {
        for l in 0..l_count {
            let i = (l + l_count - k) % l_count;
            let (x0, x1) = plan.pair_table[seqs[k][i]][seqs[l][i]];
            codewords[0][k][i] = x0;
            codewords[1][l][i] = x1;
        }
    }
    let book = Phase2Codebook { codewords };
    // Direct assertion of the separation condition for every ordered pair.
    for k in 0..l_count {
        for l in 0..l_count {
            let i = (l + l_count - k) % l_count;
            let m0 = ch.row_mask(book.codewords[0][k][i], seqs[k][i]);
            let m1 = ch.row_mask(book.codewords[1][l][i], seqs[l][i]);
            if m0 & m1 != 0 {
                return Err(Error::VerificationFailed(format!(
                    "phase-2 separation breached for suffix pair ({k},{l}) at position {i}"
                )));
            }
        }
    }
    Ok(book)
}

/// Decodes the bit from the phase-2 outputs: the unique `m` for which some
/// surviving suffix makes every output possible.
pub fn decode_bit(
    ch: &SupportChannel,
    book: &Phase2Codebook,
    survivors: &SurvivorSet,
    outputs: &[usize],
) -> Result<usize> {
    let mut found: Option<usize> = None;
    for m in 0..2usize {
        let consistent = (0..survivors.len()).any(|k| {
            let seq = survivors.seq_of(survivors.rank_at(k));
            outputs
                .iter()
                .enumerate()
                .all(|(i, &y)| ch.supports(book.codewords[m][k][i], seq[i], y))
        });
        if consistent {
            if found.is_some() {
                return Err(Error::AmbiguousMessage);
            }
            found = Some(m);
        }
    }
    found.ok_or(Error::NoConsistentMessage)
}

/// A full codec run for replay.
#[derive(Debug, Clone, Serialize)]
pub struct Transcript {
    pub bit: usize,
    pub states: Vec<usize>,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    pub decoded: usize,
}

/// Encodes and decodes one bit end to end, choosing channel outputs with the
/// seeded generator (deterministic rows have a single choice).
pub fn run_transcript(
    ch: &SupportChannel,
    plan: &BitCodecPlan,
    bit: usize,
    states: &[usize],
    seed: u64,
) -> Result<Transcript> {
    if states.len() != plan.nbit {
        return Err(Error::OutOfRange(format!(
            "need {} states, got {}",
            plan.nbit,
            states.len()
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let mut inputs = Vec::with_capacity(plan.nbit);
    let mut outputs = Vec::with_capacity(plan.nbit);
    let suffix_rank = SurvivorSet::rank_of(&states[plan.n1..], plan.ns);
    let mut survivors = SurvivorSet::full(plan.ns, plan.n2);
    for i in 0..plan.n1 {
        let s = states[i];
        let pos = survivors
            .position_of(suffix_rank)
            .expect("true suffix survives");
        let true_chunk = survivors.chunk_of_position(plan.chunks, pos);
        let input = match &plan.mode {
            PlanMode::Feedback => plan.avoid_table[s][true_chunk],
            PlanMode::NoFeedback { certificate } => certificate.x_table[s][true_chunk],
        };
        let y = sample_output(ch, input, s, &mut rng);
        let (_, remove) = step_action(plan, ch, s, true_chunk, y, i)?;
        survivors.remove_chunks(plan.chunks, &remove);
        inputs.push(input);
        outputs.push(y);
    }
    let book = phase2_codebook(plan, ch, &survivors)?;
    let pos = survivors
        .position_of(suffix_rank)
        .expect("true suffix survives phase 1");
    let mut phase2_outputs = Vec::with_capacity(plan.n2);
    for i in 0..plan.n2 {
        let s = states[plan.n1 + i];
        let x = book.codewords[bit][pos][i];
        let y = sample_output(ch, x, s, &mut rng);
        inputs.push(x);
        outputs.push(y);
        phase2_outputs.push(y);
    }
    let decoded = decode_bit(ch, &book, &survivors, &phase2_outputs)?;
    Ok(Transcript {
        bit,
        states: states.to_vec(),
        inputs,
        outputs,
        decoded,
    })
}

fn sample_output(ch: &SupportChannel, x: usize, s: usize, rng: &mut SplitMix64) -> usize {
    let options: Vec<usize> = (0..ch.ny()).filter(|&y| ch.supports(x, s, y)).collect();
    options[rng.below(options.len() as u64) as usize]
}

/// How the verification walk chooses state sequences.
#[derive(Debug, Clone, Copy)]
pub enum VerifyMode {
    /// Every state sequence; requires a deterministic channel and a bounded
    /// sequence count.
    Exhaustive,
    /// Uniform seeded sample of state sequences.
    Sampled { count: u64, seed: u64 },
}

/// Cap on exhaustive state-sequence enumeration.
pub const EXHAUSTIVE_SEQ_CAP: u64 = 20_000_000;
/// Cap on branching output paths per verification run.
pub const PATH_CAP: u64 = 10_000_000;

/// One named family of invariant checks inside a verification run.
#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub name: &'static str,
    pub checked: u64,
    pub violations: u64,
}

/// Outcome of a zero-error verification walk.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub paths: u64,
    pub violations: u64,
    pub max_survivor: usize,
    pub bound_checks: Vec<BoundCheck>,
    pub failing_transcript: Option<Transcript>,
    pub sequences: u64,
    pub path_cap_hit: bool,
}

impl VerificationReport {
    /// Turns a dirty report into the error the callers surface.
    pub fn ensure_clean(self) -> Result<Self> {
        if self.violations > 0 {
            let detail = self
                .bound_checks
                .iter()
                .filter(|c| c.violations > 0)
                .map(|c| format!("{}: {}", c.name, c.violations))
                .collect::<Vec<_>>()
                .join(", ");
            return Err(Error::VerificationFailed(format!(
                "{detail}; first failing transcript: {:?}",
                self.failing_transcript
            )));
        }
        Ok(self)
    }
}

struct Walk<'a> {
    ch: &'a SupportChannel,
    plan: &'a BitCodecPlan,
    paths: u64,
    max_survivor: usize,
    decode_checked: u64,
    decode_violations: u64,
    truth_checked: u64,
    truth_violations: u64,
    shrink_checked: u64,
    shrink_violations: u64,
    final_checked: u64,
    final_violations: u64,
    separation_checked: u64,
    separation_violations: u64,
    failing: Option<Transcript>,
    cap_hit: bool,
}

impl<'a> Walk<'a> {
    fn record_failure(&mut self, bit: usize, states: &[usize], outputs: &[usize]) {
        if self.failing.is_none() {
            self.failing = Some(Transcript {
                bit,
                states: states.to_vec(),
                inputs: Vec::new(),
                outputs: outputs.to_vec(),
                decoded: usize::MAX,
            });
        }
    }

    /// Walks every positive-probability output path for one (bit, states).
    fn walk_sequence(&mut self, bit: usize, states: &[usize]) {
        let suffix_rank = SurvivorSet::rank_of(&states[self.plan.n1..], self.plan.ns);
        let survivors = SurvivorSet::full(self.plan.ns, self.plan.n2);
        let mut outputs = Vec::with_capacity(self.plan.nbit);
        self.phase1_dfs(bit, states, suffix_rank, survivors, &mut outputs);
    }

    fn phase1_dfs(
        &mut self,
        bit: usize,
        states: &[usize],
        suffix_rank: u64,
        survivors: SurvivorSet,
        outputs: &mut Vec<usize>,
    ) {
        if self.paths >= PATH_CAP {
            self.cap_hit = true;
            return;
        }
        let i = outputs.len();
        if i == self.plan.n1 {
            self.final_checked += 1;
            let c = self.plan.chunks as f64;
            let bound = ((c - 1.0) / c).powi(self.plan.n1 as i32)
                * (self.plan.ns as f64).powi(self.plan.n2 as i32)
                + c;
            if survivors.len() as f64 > bound || survivors.len() > self.plan.n2 {
                self.final_violations += 1;
                self.record_failure(bit, states, outputs);
                return;
            }
            self.max_survivor = self.max_survivor.max(survivors.len());
            self.phase2_walk(bit, states, suffix_rank, &survivors, outputs);
            return;
        }
        let s = states[i];
        let pos = match survivors.position_of(suffix_rank) {
            Some(p) => p,
            None => {
                self.truth_violations += 1;
                self.record_failure(bit, states, outputs);
                return;
            }
        };
        let true_chunk = survivors.chunk_of_position(self.plan.chunks, pos);
        let input = match &self.plan.mode {
            PlanMode::Feedback => self.plan.avoid_table[s][true_chunk],
            PlanMode::NoFeedback { certificate } => certificate.x_table[s][true_chunk],
        };
        for y in 0..self.ch.ny() {
            if !self.ch.supports(input, s, y) {
                continue;
            }
            let before = survivors.len();
            let mut next = survivors.clone();
            let remove = match step_action(self.plan, self.ch, s, true_chunk, y, i) {
                Ok((_, remove)) => remove,
                Err(_) => {
                    self.truth_violations += 1;
                    self.record_failure(bit, states, outputs);
                    continue;
                }
            };
            next.remove_chunks(self.plan.chunks, &remove);
            self.truth_checked += 1;
            if !next.contains(suffix_rank) {
                self.truth_violations += 1;
                self.record_failure(bit, states, outputs);
                continue;
            }
            self.shrink_checked += 1;
            if next.len() > before - before / self.plan.chunks {
                self.shrink_violations += 1;
                self.record_failure(bit, states, outputs);
            }
            outputs.push(y);
            self.phase1_dfs(bit, states, suffix_rank, next, outputs);
            outputs.pop();
        }
    }

    fn phase2_walk(
        &mut self,
        bit: usize,
        states: &[usize],
        suffix_rank: u64,
        survivors: &SurvivorSet,
        outputs: &[usize],
    ) {
        self.separation_checked += 1;
        let book = match phase2_codebook(self.plan, self.ch, survivors) {
            Ok(book) => book,
            Err(_) => {
                self.separation_violations += 1;
                self.record_failure(bit, states, outputs);
                return;
            }
        };
        let pos = survivors
            .position_of(suffix_rank)
            .expect("checked during phase 1");
        let codeword = book.codewords[bit][pos].clone();
        let suffix = &states[self.plan.n1..];
        let mut phase2_outputs = Vec::with_capacity(self.plan.n2);
        self.phase2_dfs(
            bit,
            states,
            survivors,
            &book,
            &codeword,
            suffix,
            &mut phase2_outputs,
        );
    }

    #[allow(clippy::too_many_arguments)]
    fn phase2_dfs(
        &mut self,
        bit: usize,
        states: &[usize],
        survivors: &SurvivorSet,
        book: &Phase2Codebook,
        codeword: &[usize],
        suffix: &[usize],
        outputs: &mut Vec<usize>,
    ) {
        if self.paths >= PATH_CAP {
            self.cap_hit = true;
            return;
        }
        let i = outputs.len();
        if i == self.plan.n2 {
            self.paths += 1;
            self.decode_checked += 1;
            match decode_bit(self.ch, book, survivors, outputs) {
                Ok(m) if m == bit => {}
                _ => {
                    self.decode_violations += 1;
                    self.record_failure(bit, states, outputs);
                }
            }
            return;
        }
        for y in 0..self.ch.ny() {
            if !self.ch.supports(codeword[i], suffix[i], y) {
                continue;
            }
            outputs.push(y);
            self.phase2_dfs(bit, states, survivors, book, codeword, suffix, outputs);
            outputs.pop();
        }
    }
}

/// Walks output paths for both bit values over all (or sampled) state
/// sequences, asserting the zero-error property and every survivor-set
/// invariant along the way.
pub fn verify_bit_codec(
    ch: &SupportChannel,
    plan: &BitCodecPlan,
    mode: VerifyMode,
) -> Result<VerificationReport> {
    let mut walk = Walk {
        ch,
        plan,
        paths: 0,
        max_survivor: 0,
        decode_checked: 0,
        decode_violations: 0,
        truth_checked: 0,
        truth_violations: 0,
        shrink_checked: 0,
        shrink_violations: 0,
        final_checked: 0,
        final_violations: 0,
        separation_checked: 0,
        separation_violations: 0,
        failing: None,
        cap_hit: false,
    };
    let mut sequences = 0u64;
    match mode {
        VerifyMode::Exhaustive => {
            if !ch.is_deterministic() {
                return Err(Error::OutOfRange(
                    "exhaustive verification needs a deterministic channel; use sampling".into(),
                ));
            }
            let total = (ch.ns() as u64)
                .checked_pow(plan.nbit as u32)
                .filter(|&t| t <= EXHAUSTIVE_SEQ_CAP)
                .ok_or_else(|| {
                    Error::OutOfRange(format!(
                        "{}^{} state sequences exceed the exhaustive cap",
                        ch.ns(),
                        plan.nbit
                    ))
                })?;
            let mut states = vec![0usize; plan.nbit];
            for rank in 0..total {
                let mut r = rank;
                for i in (0..plan.nbit).rev() {
                    states[i] = (r % ch.ns() as u64) as usize;
                    r /= ch.ns() as u64;
                }
                for bit in 0..2 {
                    walk.walk_sequence(bit, &states);
                }
                sequences += 1;
            }
        }
        VerifyMode::Sampled { count, seed } => {
            let mut rng = SplitMix64::new(seed);
            let mut states = vec![0usize; plan.nbit];
            for _ in 0..count {
                for slot in states.iter_mut() {
                    *slot = rng.below(ch.ns() as u64) as usize;
                }
                for bit in 0..2 {
                    walk.walk_sequence(bit, &states);
                }
                sequences += 1;
            }
        }
    }
    let bound_checks = vec![
        BoundCheck {
            name: "decode-matches-bit",
            checked: walk.decode_checked,
            violations: walk.decode_violations,
        },
        BoundCheck {
            name: "truth-survives",
            checked: walk.truth_checked,
            violations: walk.truth_violations,
        },
        BoundCheck {
            name: "survivor-shrink-bound",
            checked: walk.shrink_checked,
            violations: walk.shrink_violations,
        },
        BoundCheck {
            name: "phase1-final-bound",
            checked: walk.final_checked,
            violations: walk.final_violations,
        },
        BoundCheck {
            name: "phase2-separation",
            checked: walk.separation_checked,
            violations: walk.separation_violations,
        },
    ];
    let violations = bound_checks.iter().map(|c| c.violations).sum();
    Ok(VerificationReport {
        paths: walk.paths,
        violations,
        max_survivor: walk.max_survivor,
        bound_checks,
        failing_transcript: walk.failing,
        sequences,
        path_cap_hit: walk.cap_hit,
    })
}

/// One-shot codec for causal side information: bit 0 sends an input whose
/// row lies inside `y0`, bit 1 inside the complement, for every state. The
/// constructor validates the partition and verifies the round trip over
/// every (bit, state, feasible output).
#[derive(Debug, Clone, Serialize)]
pub struct OneShotCodec {
    pub y0: Vec<usize>,
    pub y1: Vec<usize>,
    /// Per state, the inputs sending bit 0 and bit 1.
    pub inputs: Vec<(usize, usize)>,
}

pub fn causal_one_shot(ch: &SupportChannel, y0: &[usize]) -> Result<OneShotCodec> {
    let mut mask0 = 0u64;
    for &y in y0 {
        if y >= ch.ny() {
            return Err(Error::InvalidPartition(format!("output {y} out of range")));
        }
        mask0 |= 1 << y;
    }
    let full: u64 = if ch.ny() == 64 {
        u64::MAX
    } else {
        (1 << ch.ny()) - 1
    };
    let mask1 = full & !mask0;
    if mask0 == 0 || mask1 == 0 {
        return Err(Error::InvalidPartition(
            "both partition sides must be nonempty".into(),
        ));
    }
    let mut inputs = Vec::with_capacity(ch.ns());
    for s in 0..ch.ns() {
        let x0 = (0..ch.nx()).find(|&x| ch.row_mask(x, s) & !mask0 == 0);
        let x1 = (0..ch.nx()).find(|&x| ch.row_mask(x, s) & !mask1 == 0);
        match (x0, x1) {
            (Some(a), Some(b)) => inputs.push((a, b)),
            _ => {
                return Err(Error::InvalidPartition(format!(
                    "state {s} cannot place both bits"
                )))
            }
        }
    }
    let codec = OneShotCodec {
        y0: (0..ch.ny()).filter(|&y| mask0 & (1 << y) != 0).collect(),
        y1: (0..ch.ny()).filter(|&y| mask1 & (1 << y) != 0).collect(),
        inputs,
    };
    // Exhaustive one-step round trip.
    for s in 0..ch.ns() {
        let (x0, x1) = codec.inputs[s];
        for y in 0..ch.ny() {
            if ch.supports(x0, s, y) && mask0 & (1 << y) == 0 {
                return Err(Error::InvalidPartition(format!(
                    "bit 0 leaks outside the partition at (s={s}, y={y})"
                )));
            }
            if ch.supports(x1, s, y) && mask1 & (1 << y) == 0 {
                return Err(Error::InvalidPartition(format!(
                    "bit 1 leaks outside the partition at (s={s}, y={y})"
                )));
            }
        }
    }
    Ok(codec)
}

/// Plans the one-shot codec from the causal positivity witness.
pub fn causal_one_shot_from_check(ch: &SupportChannel) -> Result<OneShotCodec> {
    let verdict = check_causal_positive(ch)?;
    match verdict.witness {
        Some(Witness::Partition { y0, .. }) => causal_one_shot(ch, &y0),
        _ => Err(Error::InvalidPartition(
            "channel fails the one-shot partition condition".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::builtin;
    use crate::conditions::{search_nofb_positive_certificate, SearchLimits};

    #[test]
    fn tri_plan_parameters() {
        let ch = builtin("tri-2x2x3").unwrap();
        let plan = plan_bit_codec_fb(&ch, PlanSizing::Standard).unwrap();
        assert_eq!((plan.n1, plan.n2, plan.nbit), (8, 6, 14));
    }

    #[test]
    fn single_state_plan_is_one_use() {
        let ch = builtin("identity-2").unwrap();
        let plan = plan_bit_codec_fb(&ch, PlanSizing::Standard).unwrap();
        assert_eq!(plan.nbit, 1);
        let report = verify_bit_codec(&ch, &plan, VerifyMode::Exhaustive).unwrap();
        assert_eq!(report.violations, 0);
    }

    #[test]
    fn stuck_at_one_refused() {
        let ch = builtin("stuck-at-one").unwrap();
        assert!(matches!(
            plan_bit_codec_fb(&ch, PlanSizing::Standard),
            Err(Error::NotPositive { s: 1, s_prime: 1 })
        ));
    }

    #[test]
    fn survivor_set_basics() {
        let mut set = SurvivorSet::full(2, 3);
        assert_eq!(set.len(), 8);
        assert_eq!(SurvivorSet::rank_of(&[1, 0, 1], 2), 5);
        assert_eq!(set.seq_of(5), vec![1, 0, 1]);
        // 3 chunks over 8: sizes 3,3,2.
        assert_eq!(set.chunk_bounds(3), vec![(0, 3), (3, 6), (6, 8)]);
        assert_eq!(set.chunk_of_position(3, 4), 1);
        let removed = set.remove_chunks(3, &[0]);
        assert_eq!(removed, 3);
        assert_eq!(set.len(), 5);
        assert!(!set.contains(0));
        assert!(set.contains(5));
    }

    #[test]
    fn tri_phase1_shrinks_under_the_bound() {
        let ch = builtin("tri-2x2x3").unwrap();
        let plan = plan_bit_codec_fb(&ch, PlanSizing::Standard).unwrap();
        // |S_0| = 2^6 = 64; after 8 steps the bound gives < 6 = n2.
        let states = vec![0usize; plan.nbit];
        let t = run_transcript(&ch, &plan, 0, &states, 1).unwrap();
        let trace = run_phase1(&plan, &ch, &states, &t.outputs[..plan.n1]).unwrap();
        assert!(trace.shrink_bound_ok);
        assert!(trace.final_bound_ok);
        assert!(trace.final_survivors.len() < 6);
        assert_eq!(SurvivorSet::full(2, 6).len(), 64);
    }

    #[test]
    fn infeasible_output_detected() {
        let ch = builtin("tri-2x2x3").unwrap();
        let plan = plan_bit_codec_fb(&ch, PlanSizing::Standard).unwrap();
        let states = vec![0usize; plan.nbit];
        let full = SurvivorSet::full(plan.ns, plan.n2);
        let pos = full
            .position_of(SurvivorSet::rank_of(&states[plan.n1..], plan.ns))
            .unwrap();
        let chunk = full.chunk_of_position(plan.chunks, pos);
        let x = plan.avoid_table[0][chunk];
        // Feed an output the scheme's input cannot produce.
        let bad = (0..ch.ny()).find(|&y| !ch.supports(x, 0, y)).unwrap();
        let mut outputs = vec![0usize; plan.n1];
        outputs[0] = bad;
        assert!(matches!(
            run_phase1(&plan, &ch, &states, &outputs),
            Err(Error::InfeasibleOutput { step: 0, .. })
        ));
    }

    #[test]
    fn codebook_rejects_oversized_survivor_sets() {
        let ch = builtin("tri-2x2x3").unwrap();
        let plan = plan_bit_codec_fb(&ch, PlanSizing::Standard).unwrap();
        let set = SurvivorSet::full(2, 6); // 64 > n2 = 6
        assert!(matches!(
            phase2_codebook(&plan, &ch, &set),
            Err(Error::SurvivorOverflow { .. })
        ));
    }

    #[test]
    fn single_survivor_codebook_separates() {
        let ch = builtin("tri-2x2x3").unwrap();
        let plan = plan_bit_codec_fb(&ch, PlanSizing::Standard).unwrap();
        let mut set = SurvivorSet::full(2, 6);
        set.remove_chunks(64, &(1..64).collect::<Vec<_>>());
        assert_eq!(set.len(), 1);
        let book = phase2_codebook(&plan, &ch, &set).unwrap();
        let seq = set.seq_of(set.rank_at(0));
        let m0 = ch.row_mask(book.codewords[0][0][0], seq[0]);
        let m1 = ch.row_mask(book.codewords[1][0][0], seq[0]);
        assert_eq!(m0 & m1, 0);
    }

    #[test]
    fn decode_rejects_corrupted_outputs() {
        let ch = builtin("tri-2x2x3").unwrap();
        let plan = plan_bit_codec_fb(&ch, PlanSizing::Standard).unwrap();
        let mut set = SurvivorSet::full(2, 6);
        set.remove_chunks(64, &(2..64).collect::<Vec<_>>());
        let book = phase2_codebook(&plan, &ch, &set).unwrap();
        // Outputs inconsistent with every (bit, survivor) hypothesis: the
        // channel never reaches output 0 from state 1, so an all-zero
        // transcript clashes with any suffix containing state 1; suffix
        // rank 1 = (0,0,0,0,0,1) ensures a clash at the last position for
        // rank-0 codewords too.
        let outputs = vec![0usize; plan.n2];
        let consistent = (0..2).any(|m| {
            (0..set.len()).any(|k| {
                let seq = set.seq_of(set.rank_at(k));
                outputs
                    .iter()
                    .enumerate()
                    .all(|(i, &y)| ch.supports(book.codewords[m][k][i], seq[i], y))
            })
        });
        if !consistent {
            assert!(matches!(
                decode_bit(&ch, &book, &set, &outputs),
                Err(Error::NoConsistentMessage)
            ));
        }
    }

    #[test]
    fn transcript_roundtrip_both_bits() {
        let ch = builtin("tri-2x2x3").unwrap();
        let plan = plan_bit_codec_fb(&ch, PlanSizing::Standard).unwrap();
        let states: Vec<usize> = (0..plan.nbit).map(|i| i % 2).collect();
        for bit in 0..2 {
            let t = run_transcript(&ch, &plan, bit, &states, 7).unwrap();
            assert_eq!(t.decoded, bit);
        }
    }

    #[test]
    fn exhaustive_verification_of_tri() {
        let ch = builtin("tri-2x2x3").unwrap();
        let plan = plan_bit_codec_fb(&ch, PlanSizing::Standard).unwrap();
        let report = verify_bit_codec(&ch, &plan, VerifyMode::Exhaustive).unwrap();
        assert_eq!(report.violations, 0, "{:?}", report.bound_checks);
        assert_eq!(report.paths, 2 * (1u64 << 14));
        assert!(report.max_survivor <= plan.n2);
        assert!(!report.path_cap_hit);
    }

    #[test]
    fn sampled_verification_of_table1() {
        let ch = builtin("gp-table1").unwrap();
        let plan = plan_bit_codec_fb(&ch, PlanSizing::Standard).unwrap();
        assert_eq!((plan.n1, plan.n2), (14, 6));
        let report = verify_bit_codec(
            &ch,
            &plan,
            VerifyMode::Sampled {
                count: 2_000,
                seed: 1,
            },
        )
        .unwrap();
        assert_eq!(report.violations, 0);
    }

    #[test]
    fn corrupted_pair_table_fails_verification() {
        let ch = builtin("tri-2x2x3").unwrap();
        let mut plan = plan_bit_codec_fb(&ch, PlanSizing::Standard).unwrap();
        // Overwrite two pairs with inputs whose rows intersect: at (s=0,s=0)
        // both bits now share output 0, and at (s=0,s'=1) both share 1.
        plan.pair_table[0][0] = (0, 0);
        plan.pair_table[0][1] = (1, 0);
        let report = verify_bit_codec(
            &ch,
            &plan,
            VerifyMode::Sampled {
                count: 200,
                seed: 2,
            },
        )
        .unwrap();
        assert!(report.violations > 0);
        assert!(report
            .bound_checks
            .iter()
            .any(
                |c| (c.name == "phase2-separation" || c.name == "decode-matches-bit")
                    && c.violations > 0
            ));
        assert!(report.ensure_clean().is_err());
    }

    #[test]
    fn nofb_plan_for_table1() {
        let ch = builtin("gp-table1").unwrap();
        let verdict = search_nofb_positive_certificate(&ch, &SearchLimits::default()).unwrap();
        let cert = match verdict.witness.unwrap() {
            Witness::Certificate(c) => c,
            other => panic!("unexpected witness {other:?}"),
        };
        let plan = plan_bit_codec_nofb(&ch, &cert).unwrap();
        assert_eq!((plan.n1, plan.n2, plan.nbit), (14, 6, 20));
        let report = verify_bit_codec(
            &ch,
            &plan,
            VerifyMode::Sampled {
                count: 2_000,
                seed: 3,
            },
        )
        .unwrap();
        assert_eq!(report.violations, 0, "{:?}", report.bound_checks);
    }

    #[test]
    fn nofb_plan_with_two_chunks_verifies_exhaustively() {
        // The first certificate for this channel has kappa = 2 with general
        // output sets, exercising multi-chunk elimination per step.
        let ch = builtin("tri-2x2x3").unwrap();
        let verdict = search_nofb_positive_certificate(&ch, &SearchLimits::default()).unwrap();
        let cert = match verdict.witness.unwrap() {
            Witness::Certificate(c) => c,
            other => panic!("unexpected witness {other:?}"),
        };
        assert_eq!(cert.kappa, 2);
        let plan = plan_bit_codec_nofb(&ch, &cert).unwrap();
        assert_eq!((plan.n1, plan.n2, plan.nbit), (3, 4, 7));
        let report = verify_bit_codec(&ch, &plan, VerifyMode::Exhaustive).unwrap();
        assert_eq!(report.violations, 0, "{:?}", report.bound_checks);
        assert_eq!(report.paths, 2 * (1u64 << 7));
    }

    #[test]
    fn nofb_rejects_bad_certificate() {
        let ch = builtin("gp-table1").unwrap();
        let cert = NofbCertificate {
            kappa: 3,
            lambda: 2,
            x_table: vec![vec![0; 3]; 3],
            y_sets: vec![vec![0, 1], vec![1, 2]], // overlap
        };
        assert!(matches!(
            plan_bit_codec_nofb(&ch, &cert),
            Err(Error::InvalidCertificate(_))
        ));
    }

    #[test]
    fn minimal_sizing_fits_caller_n2() {
        let ch = builtin("tri-2x2x3").unwrap();
        let plan = plan_bit_codec_fb(&ch, PlanSizing::MinimalN1 { n2: 8 }).unwrap();
        assert_eq!(plan.n2, 8);
        // The bound must hold at the chosen n1 and fail at n1 - 1.
        let c = plan.chunks as f64;
        let bound = |n1: i32| ((c - 1.0) / c).powi(n1) * 2f64.powi(8) + c;
        assert!(bound(plan.n1 as i32) <= 8.0);
        assert!(plan.n1 == 0 || bound(plan.n1 as i32 - 1) > 8.0);
        let report = verify_bit_codec(&ch, &plan, VerifyMode::Exhaustive).unwrap();
        assert_eq!(report.violations, 0);
    }

    #[test]
    fn one_shot_identity() {
        let ch = builtin("identity-2").unwrap();
        let codec = causal_one_shot(&ch, &[0]).unwrap();
        assert_eq!(codec.inputs, vec![(0, 1)]);
    }

    #[test]
    fn one_shot_tri_partition() {
        let ch = builtin("tri-2x2x3").unwrap();
        let codec = causal_one_shot(&ch, &[0, 2]).unwrap();
        assert_eq!(codec.inputs, vec![(0, 1), (1, 0)]);
        let from_check = causal_one_shot_from_check(&ch).unwrap();
        assert_eq!(from_check.y0, vec![0, 2]);
    }

    #[test]
    fn one_shot_rejects_table1() {
        let ch = builtin("gp-table1").unwrap();
        for mask in 1u64..7 {
            let y0: Vec<usize> = (0..3).filter(|&y| mask & (1 << y) != 0).collect();
            assert!(causal_one_shot(&ch, &y0).is_err(), "mask {mask}");
        }
    }
}
