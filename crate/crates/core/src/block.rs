//! Single-block survivor reduction.
//!
//! One step of the block scheme that drives the asymptotic rate: messages
//! are split into `Theta` groups tied to covering bins, the encoder picks a
//! bin member jointly typical with the state block and a channel input
//! completing the prescribed joint type, and the decoder keeps exactly the
//! groups whose bins contain an output-consistent sequence. The step is
//! checked against the single-block shrink bound evaluated at the worst
//! admissible channel law.

use serde::Serialize;

use crate::bins::BinFamily;
use crate::capacity::nested::inner_minimize_rows;
use crate::channel::SupportChannel;
use crate::error::Error;
use crate::ktype::JointKType;
use crate::rng::SplitMix64;
use crate::Result;

/// A joint k-type over `U x X x S`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TripleKType {
    pub k: usize,
    pub nu: usize,
    pub nx: usize,
    pub ns: usize,
    /// `counts[(u * nx + x) * ns + s]`.
    pub counts: Vec<usize>,
}

impl TripleKType {
    pub fn new(nu: usize, nx: usize, ns: usize, counts: Vec<usize>) -> Result<Self> {
        if counts.len() != nu * nx * ns {
            return Err(Error::OutOfRange(
                "triple type shape does not match its alphabets".into(),
            ));
        }
        let k = counts.iter().sum();
        if k == 0 {
            return Err(Error::OutOfRange("a type must have positive length".into()));
        }
        Ok(Self {
            k,
            nu,
            nx,
            ns,
            counts,
        })
    }

    #[inline]
    pub fn count(&self, u: usize, x: usize, s: usize) -> usize {
        self.counts[(u * self.nx + x) * self.ns + s]
    }

    /// Marginal joint type over `U x S`.
    pub fn marginal_us(&self) -> JointKType {
        let counts: Vec<usize> = (0..self.nu)
            .flat_map(|u| {
                (0..self.ns).map(move |s| (0..self.nx).map(|x| self.count(u, x, s)).sum::<usize>())
            })
            .collect();
        JointKType::new(self.nu, self.ns, counts).expect("valid marginal")
    }

    /// `I(U;S)` in bits of the normalized type.
    pub fn mutual_info_us(&self) -> f64 {
        let k = self.k as f64;
        let us = self.marginal_us();
        let p_u = us.marginal_a();
        let p_s = us.marginal_b();
        let mut i = 0.0;
        for u in 0..self.nu {
            for s in 0..self.ns {
                let c = us.count(u, s) as f64;
                if c > 0.0 {
                    i += c / k * (c * k / (p_u.counts[u] as f64 * p_s.counts[s] as f64)).log2();
                }
            }
        }
        i.max(0.0)
    }
}

/// Slack of the single-block counting bound at finite length.
pub fn beta_k(k: usize, nu: usize, ny: usize) -> f64 {
    (((1 + k) as f64).log2() * (nu * ny) as f64 + 1.0) / k as f64
}

/// Worst-case shrink factor per block: `2^{-k (min_V I(U;Y) - I(U;S) - eps
/// - beta_k)}`, the inner minimum running over laws `V(y|u,x,s)` absolutely
/// continuous w.r.t. the channel.
pub fn shrink_bound(ch: &SupportChannel, p_uxs: &TripleKType, eps: f64) -> f64 {
    let k = p_uxs.k as f64;
    let cells = p_uxs.nx * p_uxs.ns;
    let w: Vec<Vec<f64>> = (0..p_uxs.nu)
        .map(|u| {
            (0..cells)
                .map(|j| p_uxs.count(u, j / p_uxs.ns, j % p_uxs.ns) as f64 / k)
                .collect()
        })
        .collect();
    let masks: Vec<Vec<u64>> = (0..p_uxs.nu)
        .map(|_| {
            (0..cells)
                .map(|j| ch.row_mask(j / p_uxs.ns, j % p_uxs.ns))
                .collect()
        })
        .collect();
    let w_rows: Vec<Vec<Vec<f64>>> = (0..p_uxs.nu)
        .map(|_| {
            (0..cells)
                .map(|j| {
                    (0..ch.ny())
                        .map(|y| ch.prob(j / p_uxs.ns, j % p_uxs.ns, y))
                        .collect()
                })
                .collect()
        })
        .collect();
    let inner = inner_minimize_rows(
        &w,
        &masks,
        &w_rows,
        ch.ny(),
        ch.is_deterministic(),
        None,
        1e-9,
        20_000,
    );
    let exponent = inner.value - p_uxs.mutual_info_us() - eps - beta_k(p_uxs.k, p_uxs.nu, ch.ny());
    2f64.powf(-k * exponent)
}

/// Near-equal message groups, larger groups first.
fn group_bounds(messages: usize, theta: usize) -> Vec<(usize, usize)> {
    let base = messages / theta;
    let rem = messages % theta;
    let mut bounds = Vec::with_capacity(theta);
    let mut start = 0;
    for g in 0..theta {
        let size = if g < rem { base + 1 } else { base };
        bounds.push((start, start + size));
        start += size;
    }
    bounds
}

/// Encoder side of one block: the bin member jointly typical with the state
/// block and an input sequence completing the triple type.
pub fn block_encode(
    p_uxs: &TripleKType,
    bins: &BinFamily,
    message_count: usize,
    message: usize,
    state_block: &[usize],
) -> Result<(Vec<usize>, Vec<usize>)> {
    let theta = bins.theta;
    if message_count < theta {
        return Err(Error::OutOfRange(format!(
            "need at least {theta} messages, got {message_count}"
        )));
    }
    if message >= message_count {
        return Err(Error::OutOfRange("message index out of range".into()));
    }
    let group = group_bounds(message_count, theta)
        .iter()
        .position(|&(a, b)| message >= a && message < b)
        .expect("message lies in some group");
    let u_seq = bins.pick_partner(group, state_block)?;
    // Fill inputs per (u,s) cell in position order, matching the counts.
    let mut remaining: Vec<usize> = p_uxs.counts.clone();
    let mut x_seq = vec![0usize; p_uxs.k];
    for i in 0..p_uxs.k {
        let (u, s) = (u_seq[i], state_block[i]);
        let x = (0..p_uxs.nx)
            .find(|&x| remaining[(u * p_uxs.nx + x) * p_uxs.ns + s] > 0)
            .ok_or_else(|| {
                Error::CoveringViolation(format!(
                    "no input left for cell (u={u}, s={s}) at position {i}"
                ))
            })?;
        remaining[(u * p_uxs.nx + x) * p_uxs.ns + s] -= 1;
        x_seq[i] = x;
    }
    Ok((u_seq, x_seq))
}

/// Decoder side: messages of the groups whose bins contain a sequence that
/// could have produced the outputs for some state block of the right type
/// and some type-complete input sequence.
pub fn block_decode(
    ch: &SupportChannel,
    p_uxs: &TripleKType,
    bins: &BinFamily,
    message_count: usize,
    outputs: &[usize],
) -> Vec<usize> {
    let mut surviving_groups = Vec::new();
    for (g, bin) in bins.bins.iter().enumerate() {
        if bin
            .iter()
            .any(|u_seq| output_consistent(ch, p_uxs, u_seq, outputs))
        {
            surviving_groups.push(g);
        }
    }
    let bounds = group_bounds(message_count, bins.theta);
    surviving_groups
        .iter()
        .flat_map(|&g| bounds[g].0..bounds[g].1)
        .collect()
}

/// Exact consistency: some state block jointly typical with `u_seq` and
/// some type-completing input sequence support every observed output.
fn output_consistent(
    ch: &SupportChannel,
    p_uxs: &TripleKType,
    u_seq: &[usize],
    outputs: &[usize],
) -> bool {
    let us = p_uxs.marginal_us();
    for s_seq in crate::ktype::conditional_shell(&swap_axes(&us), u_seq) {
        if inputs_assignable(ch, p_uxs, u_seq, &s_seq, outputs) {
            return true;
        }
    }
    false
}

/// The conditional shell helper conditions on the second axis; transpose
/// `U x S` so states are enumerated given the u-sequence.
fn swap_axes(us: &JointKType) -> JointKType {
    let counts: Vec<usize> = (0..us.nb)
        .flat_map(|b| (0..us.na).map(move |a| us.count(a, b)))
        .collect();
    JointKType::new(us.nb, us.na, counts).expect("transpose of a valid type")
}

/// Backtracking check: can inputs realize the triple type per (u,s) cell
/// while supporting every observed output?
fn inputs_assignable(
    ch: &SupportChannel,
    p_uxs: &TripleKType,
    u_seq: &[usize],
    s_seq: &[usize],
    outputs: &[usize],
) -> bool {
    let mut remaining = p_uxs.counts.clone();
    fn rec(
        ch: &SupportChannel,
        p: &TripleKType,
        u_seq: &[usize],
        s_seq: &[usize],
        outputs: &[usize],
        remaining: &mut Vec<usize>,
        i: usize,
    ) -> bool {
        if i == p.k {
            return true;
        }
        let (u, s, y) = (u_seq[i], s_seq[i], outputs[i]);
        for x in 0..p.nx {
            let idx = (u * p.nx + x) * p.ns + s;
            if remaining[idx] > 0 && ch.supports(x, s, y) {
                remaining[idx] -= 1;
                if rec(ch, p, u_seq, s_seq, outputs, remaining, i + 1) {
                    remaining[idx] += 1;
                    return true;
                }
                remaining[idx] += 1;
            }
        }
        false
    }
    rec(ch, p_uxs, u_seq, s_seq, outputs, &mut remaining, 0)
}

/// Outcome of one block-reduction run.
#[derive(Debug, Clone, Serialize)]
pub struct BlockReport {
    pub theta: usize,
    pub message_count: usize,
    pub survivors: Vec<usize>,
    pub transmitted_survives: bool,
    pub ratio: f64,
    pub bound_ratio: f64,
    pub u_seq: Vec<usize>,
    pub x_seq: Vec<usize>,
    pub outputs: Vec<usize>,
}

/// Runs one full block: encode the message against the state block, draw
/// outputs with the seeded generator, decode the surviving messages, and
/// compare the reduction ratio with the counting bound at slack `eps`.
#[allow(clippy::too_many_arguments)]
pub fn block_reduction_step(
    ch: &SupportChannel,
    p_uxs: &TripleKType,
    bins: &BinFamily,
    message_count: usize,
    message: usize,
    state_block: &[usize],
    eps: f64,
    seed: u64,
) -> Result<BlockReport> {
    let (u_seq, x_seq) = block_encode(p_uxs, bins, message_count, message, state_block)?;
    let mut rng = SplitMix64::new(seed);
    let outputs: Vec<usize> = x_seq
        .iter()
        .zip(state_block)
        .map(|(&x, &s)| {
            let options: Vec<usize> = (0..ch.ny()).filter(|&y| ch.supports(x, s, y)).collect();
            options[rng.below(options.len() as u64) as usize]
        })
        .collect();
    let survivors = block_decode(ch, p_uxs, bins, message_count, &outputs);
    let transmitted_survives = survivors.contains(&message);
    let ratio = survivors.len() as f64 / message_count as f64;
    let bound_ratio = shrink_bound(ch, p_uxs, eps);
    Ok(BlockReport {
        theta: bins.theta,
        message_count,
        survivors,
        transmitted_survives,
        ratio,
        bound_ratio,
        u_seq,
        x_seq,
        outputs,
    })
}
