//! Channel representation and derived channels.
//!
//! An [`SupportChannel`] stores an SD-DMC `W(y|x,s)` support-first: the set
//! `{y : W(y|x,s) > 0}` per `(x,s)` row, with optional probability weights.
//! The state PMF `Q` is deliberately not stored — all operations assume only
//! that every state has positive probability, and where a concrete `Q` is
//! needed (marginals, strategy lifts) uniform weights are substituted.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::Result;

/// Row sums of a probability table must match 1 this tightly.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Maximum output alphabet size; output sets are stored as `u64` masks.
pub const MAX_NY: usize = 64;

/// Default cap on the strategy alphabet `|X|^|S|`.
pub const DEFAULT_STRATEGY_CAP: usize = 4096;

/// A state-dependent discrete memoryless channel given by its support.
///
/// Invariants (enforced on construction):
/// - every `(x,s)` row has at least one supported output;
/// - if probabilities are present they are positive exactly on the support
///   and every row sums to 1 within [`ROW_SUM_TOL`];
/// - all alphabet sizes are at least 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportChannel {
    name: String,
    nx: usize,
    ns: usize,
    ny: usize,
    support: Vec<bool>,
    prob: Option<Vec<f64>>,
    input_cost: Option<Vec<f64>>,
    state_cost: Option<Vec<f64>>,
    /// Display labels for states, e.g. the 1-based labels of the builtin
    /// catalog. Not part of the interchange format.
    state_labels: Option<Vec<String>>,
}

impl SupportChannel {
    /// Builds a channel from explicit support triples, validating invariants.
    pub fn new(
        name: impl Into<String>,
        nx: usize,
        ns: usize,
        ny: usize,
        triples: &[(usize, usize, usize)],
        prob: Option<&[(usize, usize, usize, f64)]>,
    ) -> Result<Self> {
        if nx == 0 || ns == 0 || ny == 0 {
            return Err(Error::MalformedDocument(
                "alphabet sizes must all be at least 1".into(),
            ));
        }
        if ny > MAX_NY {
            return Err(Error::MalformedDocument(format!(
                "output alphabet size {ny} exceeds the supported maximum {MAX_NY}"
            )));
        }
        let mut support = vec![false; nx * ns * ny];
        for &(x, s, y) in triples {
            if x >= nx || s >= ns || y >= ny {
                return Err(Error::MalformedDocument(format!(
                    "support triple ({x},{s},{y}) is out of range for alphabets ({nx},{ns},{ny})"
                )));
            }
            support[(x * ns + s) * ny + y] = true;
        }
        let prob = match prob {
            None => None,
            Some(quads) => {
                let mut table = vec![0.0; nx * ns * ny];
                for &(x, s, y, p) in quads {
                    if x >= nx || s >= ns || y >= ny {
                        return Err(Error::MalformedDocument(format!(
                            "probability entry ({x},{s},{y}) is out of range"
                        )));
                    }
                    if !(p > 0.0) || !p.is_finite() {
                        return Err(Error::ProbSupportMismatch(format!(
                            "weight for ({x},{s},{y}) must be positive and finite, got {p}"
                        )));
                    }
                    table[(x * ns + s) * ny + y] = p;
                }
                Some(table)
            }
        };
        let mut ch = Self {
            name: name.into(),
            nx,
            ns,
            ny,
            support,
            prob,
            input_cost: None,
            state_cost: None,
            state_labels: None,
        };
        ch.validate()?;
        Ok(ch)
    }

    fn validate(&mut self) -> Result<()> {
        for x in 0..self.nx {
            for s in 0..self.ns {
                let row = &self.support[(x * self.ns + s) * self.ny..][..self.ny];
                if !row.iter().any(|&b| b) {
                    return Err(Error::EmptySupportRow { x, s });
                }
            }
        }
        if let Some(table) = &mut self.prob {
            for x in 0..self.nx {
                for s in 0..self.ns {
                    let base = (x * self.ns + s) * self.ny;
                    let mut sum = 0.0;
                    for y in 0..self.ny {
                        let supported = self.support[base + y];
                        let p = table[base + y];
                        if supported && p <= 0.0 {
                            return Err(Error::ProbSupportMismatch(format!(
                                "support holds at ({x},{s},{y}) but no positive weight was given"
                            )));
                        }
                        if !supported && p != 0.0 {
                            return Err(Error::ProbSupportMismatch(format!(
                                "weight given at ({x},{s},{y}) outside the support"
                            )));
                        }
                        sum += p;
                    }
                    if (sum - 1.0).abs() > 1e-6 {
                        return Err(Error::ProbSupportMismatch(format!(
                            "row ({x},{s}) sums to {sum}, too far from 1 to normalize"
                        )));
                    }
                    // Normalize away harmless rounding from the document.
                    for y in 0..self.ny {
                        table[base + y] /= sum;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ns(&self) -> usize {
        self.ns
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    #[inline]
    pub fn supports(&self, x: usize, s: usize, y: usize) -> bool {
        self.support[(x * self.ns + s) * self.ny + y]
    }

    /// Support of the `(x,s)` row as a bitmask over outputs.
    #[inline]
    pub fn row_mask(&self, x: usize, s: usize) -> u64 {
        let base = (x * self.ns + s) * self.ny;
        let mut mask = 0u64;
        for y in 0..self.ny {
            if self.support[base + y] {
                mask |= 1 << y;
            }
        }
        mask
    }

    /// Probability `W(y|x,s)`; uniform weights on the support when the
    /// document carried none.
    pub fn prob(&self, x: usize, s: usize, y: usize) -> f64 {
        let base = (x * self.ns + s) * self.ny;
        match &self.prob {
            Some(t) => t[base + y],
            None => {
                if self.support[base + y] {
                    1.0 / self.support[base..base + self.ny]
                        .iter()
                        .filter(|&&b| b)
                        .count() as f64
                } else {
                    0.0
                }
            }
        }
    }

    pub fn has_prob(&self) -> bool {
        self.prob.is_some()
    }

    pub fn input_cost(&self) -> Option<&[f64]> {
        self.input_cost.as_deref()
    }

    pub fn state_cost(&self) -> Option<&[f64]> {
        self.state_cost.as_deref()
    }

    pub fn set_input_cost(&mut self, cost: Vec<f64>) -> Result<()> {
        if cost.len() != self.nx || cost.iter().any(|c| *c < 0.0 || !c.is_finite()) {
            return Err(Error::MalformedDocument(
                "input cost must list one nonnegative value per input".into(),
            ));
        }
        self.input_cost = Some(cost);
        Ok(())
    }

    pub fn set_state_cost(&mut self, cost: Vec<f64>) -> Result<()> {
        if cost.len() != self.ns || cost.iter().any(|c| *c < 0.0 || !c.is_finite()) {
            return Err(Error::MalformedDocument(
                "state cost must list one nonnegative value per state".into(),
            ));
        }
        self.state_cost = Some(cost);
        Ok(())
    }

    /// Display label of state `s` (falls back to the 0-based index).
    pub fn state_label(&self, s: usize) -> String {
        match &self.state_labels {
            Some(labels) => labels[s].clone(),
            None => s.to_string(),
        }
    }

    pub fn set_state_labels(&mut self, labels: Vec<String>) {
        assert_eq!(labels.len(), self.ns);
        self.state_labels = Some(labels);
    }

    /// True when every `(x,s)` row has exactly one supported output.
    pub fn is_deterministic(&self) -> bool {
        (0..self.nx).all(|x| (0..self.ns).all(|s| self.row_mask(x, s).count_ones() == 1))
    }

    /// The single output of a deterministic row, if the row is a singleton.
    pub fn single_output(&self, x: usize, s: usize) -> Option<usize> {
        let mask = self.row_mask(x, s);
        if mask.count_ones() == 1 {
            Some(mask.trailing_zeros() as usize)
        } else {
            None
        }
    }

    /// Outputs reachable at state `s` over all inputs, as a bitmask.
    pub fn reachable_mask(&self, s: usize) -> u64 {
        (0..self.nx).fold(0u64, |m, x| m | self.row_mask(x, s))
    }

    /// Stateless view of a single-state channel.
    pub fn as_stateless(&self) -> Result<StatelessChannel> {
        if self.ns != 1 {
            return Err(Error::MalformedDocument(format!(
                "channel `{}` has {} states; a stateless view needs exactly 1",
                self.name, self.ns
            )));
        }
        Ok(marginal_channel(self))
    }
}

/// A channel without a state input, `W(y|x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StatelessChannel {
    pub name: String,
    pub nx: usize,
    pub ny: usize,
    support: Vec<bool>,
    prob: Option<Vec<f64>>,
}

impl StatelessChannel {
    pub fn new(
        name: impl Into<String>,
        nx: usize,
        ny: usize,
        support: Vec<bool>,
        prob: Option<Vec<f64>>,
    ) -> Result<Self> {
        assert_eq!(support.len(), nx * ny);
        let ch = Self {
            name: name.into(),
            nx,
            ny,
            support,
            prob,
        };
        for x in 0..nx {
            if ch.row_mask(x) == 0 {
                return Err(Error::EmptySupportRow { x, s: 0 });
            }
        }
        Ok(ch)
    }

    #[inline]
    pub fn supports(&self, x: usize, y: usize) -> bool {
        self.support[x * self.ny + y]
    }

    #[inline]
    pub fn row_mask(&self, x: usize) -> u64 {
        let mut mask = 0u64;
        for y in 0..self.ny {
            if self.support[x * self.ny + y] {
                mask |= 1 << y;
            }
        }
        mask
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        match &self.prob {
            Some(t) => t[x * self.ny + y],
            None => {
                if self.supports(x, y) {
                    1.0 / self.row_mask(x).count_ones() as f64
                } else {
                    0.0
                }
            }
        }
    }

    /// Supported outputs of input `x`, ascending.
    pub fn row_outputs(&self, x: usize) -> Vec<usize> {
        (0..self.ny).filter(|&y| self.supports(x, y)).collect()
    }

    pub fn is_deterministic(&self) -> bool {
        (0..self.nx).all(|x| self.row_mask(x).count_ones() == 1)
    }
}

/// Enumeration of all maps from states to inputs, the auxiliary alphabet of
/// Shannon strategies.
///
/// Strategy `u` is the base-`nx` expansion of `u` with the state-0 digit most
/// significant, so indices are lexicographic in `(g(u,0), g(u,1), …)` and
/// reproducible across runs.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyTable {
    pub nu: usize,
    pub ns: usize,
    pub nx: usize,
}

impl StrategyTable {
    pub fn new(nx: usize, ns: usize, cap: usize) -> Result<Self> {
        let mut needed: u128 = 1;
        for _ in 0..ns {
            needed = needed.saturating_mul(nx as u128);
            if needed > cap as u128 {
                return Err(Error::SizeOverflow { needed, cap });
            }
        }
        Ok(Self {
            nu: needed as usize,
            ns,
            nx,
        })
    }

    /// The input that strategy `u` plays at state `s`.
    #[inline]
    pub fn g(&self, u: usize, s: usize) -> usize {
        let place = self.ns - 1 - s;
        (u / self.nx.pow(place as u32)) % self.nx
    }

    /// Index of the strategy playing `inputs[s]` at each state `s`.
    pub fn index_of(&self, inputs: &[usize]) -> usize {
        assert_eq!(inputs.len(), self.ns);
        inputs.iter().fold(0, |acc, &x| acc * self.nx + x)
    }
}

/// Cost data for the constrained-capacity variants.
///
/// `budget` is an average-cost ceiling; interesting budgets sit strictly
/// between the minimum and maximum letter costs, and everything outside that
/// band is classified by [`CostSpec::regime_of`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostSpec {
    pub input_cost: Option<Vec<f64>>,
    pub state_cost: Option<Vec<f64>>,
    pub budget: f64,
}

/// Where a budget sits relative to the letter costs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetRegime {
    /// Below every letter cost: no sequence can comply.
    Infeasible,
    /// Equal to the minimum: only minimum-cost letters are usable.
    PinnedToMin,
    /// Strictly between the extremes.
    Interior,
    /// At or above the maximum: the constraint never binds.
    Slack,
}

impl CostSpec {
    pub fn input(cost: Vec<f64>, budget: f64) -> Self {
        Self {
            input_cost: Some(cost),
            state_cost: None,
            budget,
        }
    }

    pub fn state(cost: Vec<f64>, budget: f64) -> Self {
        Self {
            input_cost: None,
            state_cost: Some(cost),
            budget,
        }
    }

    pub fn input_cost(&self) -> Result<&[f64]> {
        self.input_cost.as_deref().ok_or(Error::MissingInputCost)
    }

    pub fn state_cost(&self) -> Result<&[f64]> {
        self.state_cost.as_deref().ok_or(Error::MissingStateCost)
    }

    pub fn regime_of(cost: &[f64], budget: f64) -> BudgetRegime {
        let min = cost.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = cost.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if budget < min {
            BudgetRegime::Infeasible
        } else if budget == min && min < max {
            BudgetRegime::PinnedToMin
        } else if budget < max {
            BudgetRegime::Interior
        } else {
            BudgetRegime::Slack
        }
    }
}

/// On-disk channel document. Indices are 0-based; the serializer emits
/// support triples in lexicographic order so documents are canonical.
#[derive(Debug, Serialize, Deserialize)]
struct ChannelDoc {
    name: String,
    nx: usize,
    ns: usize,
    ny: usize,
    support: Vec<(usize, usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prob: Option<Vec<(usize, usize, usize, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    input_cost: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    state_cost: Option<Vec<f64>>,
}

/// Parses a UTF-8 channel document.
pub fn parse_channel(document: &str) -> Result<SupportChannel> {
    let doc: ChannelDoc =
        serde_json::from_str(document).map_err(|e| Error::MalformedDocument(e.to_string()))?;
    let mut ch = SupportChannel::new(
        doc.name,
        doc.nx,
        doc.ns,
        doc.ny,
        &doc.support,
        doc.prob.as_deref(),
    )?;
    if let Some(c) = doc.input_cost {
        ch.set_input_cost(c)?;
    }
    if let Some(c) = doc.state_cost {
        ch.set_state_cost(c)?;
    }
    Ok(ch)
}

/// Canonical serialization: support triples sorted lexicographically, one
/// stable field order, probabilities only when the channel carries them.
pub fn serialize_channel(ch: &SupportChannel) -> String {
    let mut support = Vec::new();
    let mut prob = Vec::new();
    for x in 0..ch.nx() {
        for s in 0..ch.ns() {
            for y in 0..ch.ny() {
                if ch.supports(x, s, y) {
                    support.push((x, s, y));
                    if ch.has_prob() {
                        prob.push((x, s, y, ch.prob(x, s, y)));
                    }
                }
            }
        }
    }
    support.sort_unstable();
    prob.sort_unstable_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)));
    let doc = ChannelDoc {
        name: ch.name().to_string(),
        nx: ch.nx(),
        ns: ch.ns(),
        ny: ch.ny(),
        support,
        prob: if prob.is_empty() { None } else { Some(prob) },
        input_cost: ch.input_cost().map(|c| c.to_vec()),
        state_cost: ch.state_cost().map(|c| c.to_vec()),
    };
    serde_json::to_string_pretty(&doc).expect("channel document serializes")
}

/// SHA-256 of the canonical serialization, hex-encoded.
pub fn fingerprint(ch: &SupportChannel) -> String {
    let mut hasher = Sha256::new();
    hasher.update(serialize_channel(ch).as_bytes());
    hex::encode(hasher.finalize())
}

/// Builtin catalog. The first two channels use 1-based state/output labels
/// in their sources, mapped here to 0-based indices with labels retained for
/// display.
///
/// Names: `gp-table1`, `gp-table2`, `stuck-at-one`, `mod3`, `tri-2x2x3`,
/// `identity-k` for any `k >= 1`.
pub fn builtin(name: &str) -> Result<SupportChannel> {
    match name {
        "gp-table1" => {
            // x=0 rows per state: {2},{1},{1}; x=1 rows: {3},{3},{2} (1-based).
            let triples = [
                (0, 0, 1),
                (0, 1, 0),
                (0, 2, 0),
                (1, 0, 2),
                (1, 1, 2),
                (1, 2, 1),
            ];
            let mut ch = SupportChannel::new("gp-table1", 2, 3, 3, &triples, None)?;
            ch.set_state_labels(vec!["1".into(), "2".into(), "3".into()]);
            Ok(ch)
        }
        "gp-table2" => {
            // x=0 rows: {2,3},{1,5},{1,2},{2,3},{1,2}; x=1 rows: {4,5},{3,4},{4,5},{1,5},{3,4}.
            let zero_rows = [[2, 3], [1, 5], [1, 2], [2, 3], [1, 2]];
            let one_rows = [[4, 5], [3, 4], [4, 5], [1, 5], [3, 4]];
            let mut triples = Vec::new();
            for s in 0..5 {
                for &y in &zero_rows[s] {
                    triples.push((0, s, y - 1));
                }
                for &y in &one_rows[s] {
                    triples.push((1, s, y - 1));
                }
            }
            let mut ch = SupportChannel::new("gp-table2", 2, 5, 5, &triples, None)?;
            ch.set_state_labels((1..=5).map(|i| i.to_string()).collect());
            Ok(ch)
        }
        "stuck-at-one" => {
            // Output equals the input at state 0 and is stuck at 1 at state
            // 1; ships with its defining state cost, the state index.
            let triples = [(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 1)];
            let mut ch = SupportChannel::new("stuck-at-one", 2, 2, 2, &triples, None)?;
            ch.set_state_cost(vec![0.0, 1.0])?;
            Ok(ch)
        }
        "mod3" => {
            // Single state; input x reaches every output except x+2 (mod 3),
            // each with weight 1/2.
            let mut triples = Vec::new();
            let mut quads = Vec::new();
            for x in 0..3usize {
                for y in 0..3usize {
                    if y != (x + 2) % 3 {
                        triples.push((x, 0, y));
                        quads.push((x, 0, y, 0.5));
                    }
                }
            }
            SupportChannel::new("mod3", 3, 1, 3, &triples, Some(&quads))
        }
        "tri-2x2x3" => {
            let triples = [(0, 0, 0), (1, 0, 1), (0, 1, 1), (1, 1, 2)];
            SupportChannel::new("tri-2x2x3", 2, 2, 3, &triples, None)
        }
        _ => {
            if let Some(k) = name.strip_prefix("identity-") {
                let k: usize = k
                    .parse()
                    .map_err(|_| Error::UnknownName(name.to_string()))?;
                if k == 0 || k > MAX_NY {
                    return Err(Error::UnknownName(name.to_string()));
                }
                let triples: Vec<_> = (0..k).map(|x| (x, 0, x)).collect();
                SupportChannel::new(name, k, 1, k, &triples, None)
            } else {
                Err(Error::UnknownName(name.to_string()))
            }
        }
    }
}

/// All builtin names with a fixed shape (excludes the `identity-k` family
/// beyond the two sizes used throughout the tests).
pub fn builtin_names() -> &'static [&'static str] {
    &[
        "gp-table1",
        "gp-table2",
        "stuck-at-one",
        "mod3",
        "tri-2x2x3",
        "identity-2",
    ]
}

/// Lifts an SD-DMC with causal side information to the stateless channel
/// over Shannon strategies: `W'(y|u)` is supported iff some state lets the
/// strategy's input reach `y`. Support does not depend on the state weights;
/// probabilities are filled with a uniform state PMF.
pub fn shannon_strategy_channel(
    ch: &SupportChannel,
    cap: usize,
) -> Result<(StatelessChannel, StrategyTable)> {
    let table = StrategyTable::new(ch.nx(), ch.ns(), cap)?;
    let nu = table.nu;
    let ny = ch.ny();
    let mut support = vec![false; nu * ny];
    let mut prob = vec![0.0; nu * ny];
    let q = 1.0 / ch.ns() as f64;
    for u in 0..nu {
        for s in 0..ch.ns() {
            let x = table.g(u, s);
            for y in 0..ny {
                if ch.supports(x, s, y) {
                    support[u * ny + y] = true;
                    prob[u * ny + y] += q * ch.prob(x, s, y);
                }
            }
        }
    }
    let lifted = StatelessChannel::new(format!("{}'", ch.name()), nu, ny, support, Some(prob))?;
    Ok((lifted, table))
}

/// Averages the state out of the channel: the support of `x` is the union of
/// its rows over all states, and probabilities use a uniform state PMF. This
/// is the channel seen by an encoder whose side information arrives strictly
/// too late to matter.
pub fn marginal_channel(ch: &SupportChannel) -> StatelessChannel {
    let (nx, ny) = (ch.nx(), ch.ny());
    let mut support = vec![false; nx * ny];
    let mut prob = vec![0.0; nx * ny];
    let q = 1.0 / ch.ns() as f64;
    for x in 0..nx {
        for s in 0..ch.ns() {
            for y in 0..ny {
                if ch.supports(x, s, y) {
                    support[x * ny + y] = true;
                    prob[x * ny + y] += q * ch.prob(x, s, y);
                }
            }
        }
    }
    StatelessChannel::new(
        format!("{}~", ch.name()),
        nx,
        ny,
        support,
        if ch.has_prob() { Some(prob) } else { None },
    )
    .expect("marginal rows inherit nonemptiness")
}

/// Restricts the channel to a subset of states, re-packing state indices in
/// ascending order and recording the kept labels in the name.
pub fn restrict_states(ch: &SupportChannel, keep: &[usize]) -> Result<SupportChannel> {
    let keep: BTreeSet<usize> = keep.iter().copied().collect();
    if keep.is_empty() {
        return Err(Error::EmptySubset);
    }
    if let Some(&bad) = keep.iter().find(|&&s| s >= ch.ns()) {
        return Err(Error::OutOfRange(format!(
            "state {bad} is out of range for a channel with {} states",
            ch.ns()
        )));
    }
    let kept: Vec<usize> = keep.into_iter().collect();
    let mut triples = Vec::new();
    let mut quads = Vec::new();
    for x in 0..ch.nx() {
        for (new_s, &old_s) in kept.iter().enumerate() {
            for y in 0..ch.ny() {
                if ch.supports(x, old_s, y) {
                    triples.push((x, new_s, y));
                    if ch.has_prob() {
                        quads.push((x, new_s, y, ch.prob(x, old_s, y)));
                    }
                }
            }
        }
    }
    let labels: Vec<String> = kept.iter().map(|&s| ch.state_label(s)).collect();
    let name = format!("{}|s{{{}}}", ch.name(), labels.join(","));
    let mut out = SupportChannel::new(
        name,
        ch.nx(),
        kept.len(),
        ch.ny(),
        &triples,
        if ch.has_prob() {
            Some(quads.as_slice())
        } else {
            None
        },
    )?;
    out.set_state_labels(labels);
    if let Some(c) = ch.input_cost() {
        out.set_input_cost(c.to_vec())?;
    }
    if let Some(c) = ch.state_cost() {
        out.set_state_cost(kept.iter().map(|&s| c[s]).collect())?;
    }
    Ok(out)
}

/// Seeded random support channel for cross-oracle tests: every row gets a
/// nonempty support drawn uniformly over nonempty output subsets.
pub fn random_support_channel(nx: usize, ns: usize, ny: usize, seed: u64) -> SupportChannel {
    let mut rng = crate::rng::SplitMix64::new(seed);
    let mut triples = Vec::new();
    for x in 0..nx {
        for s in 0..ns {
            let mask = 1 + rng.below((1u64 << ny) - 1);
            for y in 0..ny {
                if mask & (1 << y) != 0 {
                    triples.push((x, s, y));
                }
            }
        }
    }
    SupportChannel::new(
        format!("random-{nx}x{ns}x{ny}-seed{seed}"),
        nx,
        ns,
        ny,
        &triples,
        None,
    )
    .expect("rows are nonempty by construction")
}
