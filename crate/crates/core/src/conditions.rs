//! Decision procedures for the positivity and feasibility conditions.
//!
//! Every checker returns a [`Verdict`] carrying either a witness that
//! re-validates by direct substitution or a structured counterexample. All
//! quantifier searches iterate lexicographically and return the first
//! witness, so outputs are deterministic.

use serde::Serialize;

use crate::channel::{CostSpec, StatelessChannel, SupportChannel};
use crate::error::Error;
use crate::Result;

/// Output partitions are searched exhaustively, so the alphabet is gated.
pub const MAX_PARTITION_NY: usize = 20;

/// Identifying tag of a condition, used verbatim in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConditionTag {
    #[serde(rename = "eq:positive")]
    AcausalPositive,
    #[serde(rename = "eq:condCapacityPos")]
    Phase1Feasible,
    #[serde(rename = "eq:causPositive")]
    CausalPositive,
    #[serde(rename = "eq:suffCondCapWithoutFBZero")]
    NofbSufficientZero,
    #[serde(rename = "bl:suffCondCapWithoutFBPositive")]
    NofbPositiveCertificate,
    #[serde(rename = "eq:positiveCCStates")]
    CcStatesNecessary,
    #[serde(rename = "eq:positiveShannon")]
    StatelessPositive,
}

impl ConditionTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ConditionTag::AcausalPositive => "eq:positive",
            ConditionTag::Phase1Feasible => "eq:condCapacityPos",
            ConditionTag::CausalPositive => "eq:causPositive",
            ConditionTag::NofbSufficientZero => "eq:suffCondCapWithoutFBZero",
            ConditionTag::NofbPositiveCertificate => "bl:suffCondCapWithoutFBPositive",
            ConditionTag::CcStatesNecessary => "eq:positiveCCStates",
            ConditionTag::StatelessPositive => "eq:positiveShannon",
        }
    }
}

/// An input pair whose rows at `(s, s')` share no output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DisjointPair {
    pub s: usize,
    pub s_prime: usize,
    pub x: usize,
    pub x_prime: usize,
}

/// Witness objects, one shape per condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// Per state pair, inputs with disjoint rows.
    DisjointPairs { pairs: Vec<DisjointPair> },
    /// Per (state, output), an input that cannot produce the output.
    AvoidInputs { entries: Vec<(usize, usize, usize)> },
    /// An output bipartition with per-state inputs landing in each side.
    Partition {
        y0: Vec<usize>,
        y1: Vec<usize>,
        inputs: Vec<(usize, usize, usize)>,
    },
    /// A trap state `s` and, for each input, a reply state that keeps every
    /// continuation confusable.
    ZeroTrap {
        s: usize,
        replies: Vec<(usize, usize)>,
    },
    /// A full no-feedback positivity certificate.
    Certificate(NofbCertificate),
    /// Two inputs of a stateless channel with disjoint rows.
    InputPair { x: usize, x_prime: usize },
}

/// Counterexample objects.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Counterexample {
    /// First state pair admitting no disjoint input pair.
    StatePair { s: usize, s_prime: usize },
    /// A `(state, output)` cell that every input can hit.
    OutputTrap { s: usize, y: usize },
    /// Exhaustive partition scan found nothing.
    NoPartition { partitions_checked: u64 },
    /// For every candidate trap state, an input escaping it, with the
    /// disjoint continuation that escape guarantees per reply state.
    TrapEscapes {
        per_state: Vec<(usize, usize, Vec<DisjointPair>)>,
    },
    /// Certificate search space exhausted at the stated bounds.
    SearchExhausted {
        kappa_max: usize,
        lambda_max: usize,
        nodes: u64,
    },
    /// A cost-admissible state pair with no disjoint input pair.
    CostedStatePair {
        s: usize,
        s_prime: usize,
        mean_cost: f64,
    },
    /// All input rows pairwise intersect.
    AllRowsIntersect,
}

/// Outcome of a condition check.
///
/// Exactly one of `witness` / `counterexample` is populated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub condition: ConditionTag,
    pub holds: bool,
    pub witness: Option<Witness>,
    pub counterexample: Option<Counterexample>,
    pub budget_exhausted: bool,
}

impl Verdict {
    fn positive(condition: ConditionTag, witness: Witness) -> Self {
        Self {
            condition,
            holds: true,
            witness: Some(witness),
            counterexample: None,
            budget_exhausted: false,
        }
    }

    fn negative(condition: ConditionTag, counterexample: Counterexample) -> Self {
        Self {
            condition,
            holds: false,
            witness: None,
            counterexample: Some(counterexample),
            budget_exhausted: false,
        }
    }
}

/// First input pair (lexicographic) whose rows at `s` and `s'` are disjoint.
pub fn disjoint_input_pair(
    ch: &SupportChannel,
    s: usize,
    s_prime: usize,
) -> Option<(usize, usize)> {
    for x in 0..ch.nx() {
        let row = ch.row_mask(x, s);
        for x_prime in 0..ch.nx() {
            if row & ch.row_mask(x_prime, s_prime) == 0 {
                return Some((x, x_prime));
            }
        }
    }
    None
}

/// Acausal positivity: every pair of states must admit inputs with disjoint
/// output supports.
pub fn check_acausal_positive(ch: &SupportChannel) -> Verdict {
    let mut pairs = Vec::new();
    for s in 0..ch.ns() {
        for s_prime in 0..ch.ns() {
            match disjoint_input_pair(ch, s, s_prime) {
                Some((x, x_prime)) => pairs.push(DisjointPair {
                    s,
                    s_prime,
                    x,
                    x_prime,
                }),
                None => {
                    return Verdict::negative(
                        ConditionTag::AcausalPositive,
                        Counterexample::StatePair { s, s_prime },
                    )
                }
            }
        }
    }
    Verdict::positive(
        ConditionTag::AcausalPositive,
        Witness::DisjointPairs { pairs },
    )
}

/// Phase-1 feasibility: every `(state, output)` cell has an avoiding input.
pub fn check_phase1_feasible(ch: &SupportChannel) -> Verdict {
    let mut entries = Vec::new();
    for s in 0..ch.ns() {
        for y in 0..ch.ny() {
            match (0..ch.nx()).find(|&x| !ch.supports(x, s, y)) {
                Some(x) => entries.push((s, y, x)),
                None => {
                    return Verdict::negative(
                        ConditionTag::Phase1Feasible,
                        Counterexample::OutputTrap { s, y },
                    )
                }
            }
        }
    }
    Verdict::positive(
        ConditionTag::Phase1Feasible,
        Witness::AvoidInputs { entries },
    )
}

/// Causal positivity: some output bipartition `(Y0, Y1)` lets every state
/// place one input entirely in `Y0` and another entirely in `Y1`.
///
/// The scan is exhaustive over bipartitions with output 0 pinned to `Y0`
/// (the condition is symmetric under swapping the sides), masks ascending.
pub fn check_causal_positive(ch: &SupportChannel) -> Result<Verdict> {
    let ny = ch.ny();
    if ny > MAX_PARTITION_NY {
        return Err(Error::OutputAlphabetTooLarge {
            ny,
            max: MAX_PARTITION_NY,
        });
    }
    let full: u64 = if ny == 64 { u64::MAX } else { (1 << ny) - 1 };
    let mut checked = 0u64;
    let mut mask = 1u64;
    while mask < full {
        // mask always contains output 0; Y1 is its complement.
        checked += 1;
        let y1 = full & !mask;
        let mut inputs = Vec::with_capacity(ch.ns());
        let mut ok = true;
        for s in 0..ch.ns() {
            let x0 = (0..ch.nx()).find(|&x| ch.row_mask(x, s) & !mask == 0);
            let x1 = (0..ch.nx()).find(|&x| ch.row_mask(x, s) & !y1 == 0);
            match (x0, x1) {
                (Some(a), Some(b)) => inputs.push((s, a, b)),
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            let to_vec = |m: u64| (0..ny).filter(|&y| m & (1 << y) != 0).collect();
            return Ok(Verdict::positive(
                ConditionTag::CausalPositive,
                Witness::Partition {
                    y0: to_vec(mask),
                    y1: to_vec(y1),
                    inputs,
                },
            ));
        }
        mask += 2;
    }
    Ok(Verdict::negative(
        ConditionTag::CausalPositive,
        Counterexample::NoPartition {
            partitions_checked: checked,
        },
    ))
}

/// Sufficient condition for the no-feedback capacity to be zero: a trap
/// state `s` such that whatever input the encoder pins there, some reply
/// state keeps every input's row overlapping.
pub fn check_nofb_sufficient_zero(ch: &SupportChannel) -> Verdict {
    let overlap_all = |x: usize, s: usize, s_prime: usize| {
        (0..ch.nx()).all(|x_prime| ch.row_mask(x, s) & ch.row_mask(x_prime, s_prime) != 0)
    };
    let mut escapes = Vec::new();
    'states: for s in 0..ch.ns() {
        let mut replies = Vec::with_capacity(ch.nx());
        for x in 0..ch.nx() {
            match (0..ch.ns()).find(|&s_prime| overlap_all(x, s, s_prime)) {
                Some(s_prime) => replies.push((x, s_prime)),
                None => {
                    // `x` escapes the trap at `s`: record, per reply state, a
                    // disjoint partner input as the checkable refutation.
                    let pairs = (0..ch.ns())
                        .map(|s_prime| {
                            let x_prime = (0..ch.nx())
                                .find(|&xp| ch.row_mask(x, s) & ch.row_mask(xp, s_prime) == 0)
                                .expect("escape implies a disjoint partner");
                            DisjointPair {
                                s,
                                s_prime,
                                x,
                                x_prime,
                            }
                        })
                        .collect();
                    escapes.push((s, x, pairs));
                    continue 'states;
                }
            }
        }
        return Verdict::positive(
            ConditionTag::NofbSufficientZero,
            Witness::ZeroTrap { s, replies },
        );
    }
    Verdict::negative(
        ConditionTag::NofbSufficientZero,
        Counterexample::TrapEscapes { per_state: escapes },
    )
}

/// Stateless positivity: two inputs with disjoint rows.
pub fn check_stateless_positive(ch: &StatelessChannel) -> Verdict {
    for x in 0..ch.nx {
        for x_prime in x + 1..ch.nx {
            if ch.row_mask(x) & ch.row_mask(x_prime) == 0 {
                return Verdict::positive(
                    ConditionTag::StatelessPositive,
                    Witness::InputPair { x, x_prime },
                );
            }
        }
    }
    Verdict::negative(
        ConditionTag::StatelessPositive,
        Counterexample::AllRowsIntersect,
    )
}

/// Necessary condition for positivity under the blockwise state-cost
/// constraint: every state pair whose average cost fits the budget must
/// admit disjoint inputs.
pub fn check_ccstates_necessary(ch: &SupportChannel, cost: &CostSpec) -> Result<Verdict> {
    let lambda = cost.state_cost()?;
    if lambda.len() != ch.ns() {
        return Err(Error::MalformedDocument(
            "state cost length does not match the state alphabet".into(),
        ));
    }
    let mut pairs = Vec::new();
    for s in 0..ch.ns() {
        for s_prime in 0..ch.ns() {
            let mean = 0.5 * (lambda[s] + lambda[s_prime]);
            if mean > cost.budget {
                continue;
            }
            match disjoint_input_pair(ch, s, s_prime) {
                Some((x, x_prime)) => pairs.push(DisjointPair {
                    s,
                    s_prime,
                    x,
                    x_prime,
                }),
                None => {
                    return Ok(Verdict::negative(
                        ConditionTag::CcStatesNecessary,
                        Counterexample::CostedStatePair {
                            s,
                            s_prime,
                            mean_cost: mean,
                        },
                    ))
                }
            }
        }
    }
    Ok(Verdict::positive(
        ConditionTag::CcStatesNecessary,
        Witness::DisjointPairs { pairs },
    ))
}

/// Certificate for positivity of the no-feedback capacity: inputs `x(s,k)`
/// and pairwise-disjoint output sets `Y_1..Y_lambda` such that every row
/// lands inside one set and every set is fully avoidable by some column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NofbCertificate {
    pub kappa: usize,
    pub lambda: usize,
    /// `x_table[s][k]` is the input the encoder sends at state `s` when the
    /// surviving-chunk index is `k`.
    pub x_table: Vec<Vec<usize>>,
    /// Output subsets, each sorted ascending.
    pub y_sets: Vec<Vec<usize>>,
}

impl NofbCertificate {
    /// Direct substitution check of both certificate conditions.
    pub fn validate(&self, ch: &SupportChannel) -> Result<()> {
        if self.kappa < 2 || self.kappa > ch.ny() {
            return Err(Error::InvalidCertificate(format!(
                "kappa {} outside [2, {}]",
                self.kappa,
                ch.ny()
            )));
        }
        if self.lambda < 2 || self.lambda > self.kappa * ch.nx() {
            return Err(Error::InvalidCertificate(format!(
                "lambda {} outside [2, {}]",
                self.lambda,
                self.kappa * ch.nx()
            )));
        }
        if self.x_table.len() != ch.ns() || self.x_table.iter().any(|r| r.len() != self.kappa) {
            return Err(Error::InvalidCertificate(
                "x table must be ns rows of kappa inputs".into(),
            ));
        }
        if self.y_sets.len() != self.lambda {
            return Err(Error::InvalidCertificate(
                "need exactly lambda output sets".into(),
            ));
        }
        let masks: Vec<u64> = self
            .y_sets
            .iter()
            .map(|set| set.iter().fold(0u64, |m, &y| m | 1 << y))
            .collect();
        for (i, set) in self.y_sets.iter().enumerate() {
            if set.is_empty() {
                return Err(Error::InvalidCertificate(format!(
                    "output set {i} is empty"
                )));
            }
            if set.iter().any(|&y| y >= ch.ny()) {
                return Err(Error::InvalidCertificate(format!(
                    "output set {i} mentions an out-of-range output"
                )));
            }
            for j in i + 1..self.y_sets.len() {
                if masks[i] & masks[j] != 0 {
                    return Err(Error::InvalidCertificate(format!(
                        "output sets {i} and {j} overlap"
                    )));
                }
            }
        }
        // Containment: every (s,k) row lies inside one of the sets.
        for s in 0..ch.ns() {
            for k in 0..self.kappa {
                let row = ch.row_mask(self.x_table[s][k], s);
                if !masks.iter().any(|&m| row & !m == 0) {
                    return Err(Error::InvalidCertificate(format!(
                        "row of x({s},{k}) is not contained in any output set"
                    )));
                }
            }
        }
        // Avoidance: every set has a column that avoids it at every state.
        for (l, &m) in masks.iter().enumerate() {
            let avoidable = (0..self.kappa)
                .any(|k| (0..ch.ns()).all(|s| ch.row_mask(self.x_table[s][k], s) & m == 0));
            if !avoidable {
                return Err(Error::InvalidCertificate(format!(
                    "no column avoids output set {l} at every state"
                )));
            }
        }
        Ok(())
    }
}

/// Bounds for the certificate search.
#[derive(Debug, Clone)]
pub struct SearchLimits {
    pub kappa_max: Option<usize>,
    pub lambda_max: Option<usize>,
    pub node_budget: u64,
}

impl Default for SearchLimits {
    fn default() -> Self {
        Self {
            kappa_max: None,
            lambda_max: None,
            node_budget: 10_000_000,
        }
    }
}

/// Backtracking search for a no-feedback positivity certificate.
///
/// Order: `kappa` ascending, then `lambda` ascending, then families of
/// disjoint output sets with all-singleton families first (those certify
/// every deterministic channel cheaply) and general families second. A
/// negative result means the space was exhausted within the limits; it is a
/// statement about this one-sided test, not a proof that the capacity is
/// zero.
pub fn search_nofb_positive_certificate(
    ch: &SupportChannel,
    limits: &SearchLimits,
) -> Result<Verdict> {
    let kappa_max = limits.kappa_max.unwrap_or(ch.ny()).min(ch.ny());
    let mut nodes = 0u64;
    let mut lambda_hi = 0usize;
    for kappa in 2..=kappa_max {
        let lambda_max = limits
            .lambda_max
            .unwrap_or(usize::MAX)
            .min(kappa * ch.nx())
            .min(ch.ny());
        lambda_hi = lambda_hi.max(lambda_max);
        for lambda in 2..=lambda_max {
            for singleton_pass in [true, false] {
                let mut found = None;
                enumerate_disjoint_families(ch.ny(), lambda, singleton_pass, &mut |family| {
                    nodes += 1;
                    if found.is_none() && nodes <= limits.node_budget {
                        if let Some(cert) = try_family(ch, kappa, family, &mut nodes) {
                            found = Some(cert);
                        }
                    }
                    found.is_some() || nodes > limits.node_budget
                });
                if let Some(cert) = found {
                    cert.validate(ch)
                        .expect("constructed certificates re-validate");
                    return Ok(Verdict::positive(
                        ConditionTag::NofbPositiveCertificate,
                        Witness::Certificate(cert),
                    ));
                }
                if nodes > limits.node_budget {
                    return Err(Error::BudgetExhausted { nodes });
                }
            }
        }
    }
    Ok(Verdict::negative(
        ConditionTag::NofbPositiveCertificate,
        Counterexample::SearchExhausted {
            kappa_max,
            lambda_max: lambda_hi,
            nodes,
        },
    ))
}

/// Enumerates unordered families of `lambda` pairwise-disjoint nonempty
/// output subsets (as masks, ascending); stops early when `visit` says so.
/// `singletons_only` selects the all-singleton families; otherwise those are
/// skipped so the two passes partition the space.
fn enumerate_disjoint_families(
    ny: usize,
    lambda: usize,
    singletons_only: bool,
    visit: &mut impl FnMut(&[u64]) -> bool,
) {
    let full: u64 = if ny == 64 { u64::MAX } else { (1 << ny) - 1 };
    let mut family: Vec<u64> = Vec::with_capacity(lambda);
    fn rec(
        full: u64,
        lambda: usize,
        singletons_only: bool,
        min_mask: u64,
        family: &mut Vec<u64>,
        visit: &mut impl FnMut(&[u64]) -> bool,
    ) -> bool {
        if family.len() == lambda {
            let all_singletons = family.iter().all(|m| m.count_ones() == 1);
            if all_singletons == singletons_only {
                return visit(family);
            }
            return false;
        }
        let used: u64 = family.iter().fold(0, |a, &m| a | m);
        let mut mask = min_mask;
        while mask <= full {
            if mask & used == 0 && mask & !full == 0 {
                if !singletons_only || mask.count_ones() == 1 {
                    family.push(mask);
                    if rec(full, lambda, singletons_only, mask + 1, family, visit) {
                        family.pop();
                        return true;
                    }
                    family.pop();
                }
            }
            mask += 1;
        }
        false
    }
    rec(full, lambda, singletons_only, 1, &mut family, visit);
}

/// Tries to realize a certificate for a fixed output-set family: checks that
/// every state keeps a containment-feasible input, then assigns the
/// avoidance roles to at most `kappa` columns via set partitions of the
/// roles.
fn try_family(
    ch: &SupportChannel,
    kappa: usize,
    family: &[u64],
    nodes: &mut u64,
) -> Option<NofbCertificate> {
    let ns = ch.ns();
    let lambda = family.len();
    // allowed[s]: inputs whose row is contained in some set of the family.
    let allowed: Vec<Vec<usize>> = (0..ns)
        .map(|s| {
            (0..ch.nx())
                .filter(|&x| {
                    let row = ch.row_mask(x, s);
                    family.iter().any(|&m| row & !m == 0)
                })
                .collect()
        })
        .collect();
    if allowed.iter().any(|a| a.is_empty()) {
        return None;
    }
    // feasible_for(group): per state, the first allowed input avoiding every
    // set in the group; None when a state has no such input.
    let column_for = |group: &[usize]| -> Option<Vec<usize>> {
        let avoid: u64 = group.iter().fold(0, |a, &l| a | family[l]);
        (0..ns)
            .map(|s| {
                allowed[s]
                    .iter()
                    .copied()
                    .find(|&x| ch.row_mask(x, s) & avoid == 0)
            })
            .collect()
    };
    // Partition the roles 0..lambda into at most kappa groups; any feasible
    // assignment of role groups to columns yields a certificate.
    let mut result = None;
    partitions_into_groups(lambda, kappa, &mut |groups| {
        *nodes += 1;
        let mut columns = Vec::with_capacity(kappa);
        for group in groups {
            match column_for(group) {
                Some(col) => columns.push(col),
                None => return false,
            }
        }
        // Filler columns keep the containment condition only.
        while columns.len() < kappa {
            columns.push((0..ns).map(|s| allowed[s][0]).collect());
        }
        let x_table: Vec<Vec<usize>> = (0..ns)
            .map(|s| (0..kappa).map(|k| columns[k][s]).collect())
            .collect();
        let y_sets: Vec<Vec<usize>> = family
            .iter()
            .map(|&m| (0..ch.ny()).filter(|&y| m & (1 << y) != 0).collect())
            .collect();
        result = Some(NofbCertificate {
            kappa,
            lambda,
            x_table,
            y_sets,
        });
        true
    });
    result
}

/// Enumerates partitions of `0..n` into at most `max_groups` blocks, calls
/// `visit` with each; stops when it returns true.
fn partitions_into_groups(
    n: usize,
    max_groups: usize,
    visit: &mut impl FnMut(&[Vec<usize>]) -> bool,
) -> bool {
    fn rec(
        i: usize,
        n: usize,
        max_groups: usize,
        groups: &mut Vec<Vec<usize>>,
        visit: &mut impl FnMut(&[Vec<usize>]) -> bool,
    ) -> bool {
        if i == n {
            return visit(groups);
        }
        for gi in 0..groups.len() {
            groups[gi].push(i);
            if rec(i + 1, n, max_groups, groups, visit) {
                groups[gi].pop();
                return true;
            }
            groups[gi].pop();
        }
        if groups.len() < max_groups {
            groups.push(vec![i]);
            if rec(i + 1, n, max_groups, groups, visit) {
                groups.pop();
                return true;
            }
            groups.pop();
        }
        false
    }
    rec(0, n, max_groups, &mut Vec::new(), visit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{builtin, marginal_channel, restrict_states};

    #[test]
    fn acausal_table1_holds() {
        let v = check_acausal_positive(&builtin("gp-table1").unwrap());
        assert!(v.holds);
        assert!(matches!(v.witness, Some(Witness::DisjointPairs { .. })));
    }

    #[test]
    fn acausal_stuck_at_one_fails_at_one_one() {
        let v = check_acausal_positive(&builtin("stuck-at-one").unwrap());
        assert!(!v.holds);
        assert_eq!(
            v.counterexample,
            Some(Counterexample::StatePair { s: 1, s_prime: 1 })
        );
    }

    #[test]
    fn acausal_mod3_fails() {
        let v = check_acausal_positive(&builtin("mod3").unwrap());
        assert!(!v.holds);
    }

    #[test]
    fn phase1_mod3_holds() {
        assert!(check_phase1_feasible(&builtin("mod3").unwrap()).holds);
    }

    #[test]
    fn phase1_identity_holds() {
        assert!(check_phase1_feasible(&builtin("identity-2").unwrap()).holds);
    }

    #[test]
    fn phase1_fails_on_full_row() {
        // At (s=1, y=1) every input of stuck-at-one can produce y=1.
        let v = check_phase1_feasible(&builtin("stuck-at-one").unwrap());
        assert!(!v.holds);
        assert_eq!(
            v.counterexample,
            Some(Counterexample::OutputTrap { s: 1, y: 1 })
        );
    }

    #[test]
    fn causal_table1_fails() {
        let v = check_causal_positive(&builtin("gp-table1").unwrap()).unwrap();
        assert!(!v.holds);
    }

    #[test]
    fn causal_tri_holds_with_expected_partition() {
        let v = check_causal_positive(&builtin("tri-2x2x3").unwrap()).unwrap();
        assert!(v.holds);
        match v.witness.unwrap() {
            Witness::Partition { y0, y1, .. } => {
                assert_eq!(y0, vec![0, 2]);
                assert_eq!(y1, vec![1]);
            }
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn causal_identity_holds() {
        let v = check_causal_positive(&builtin("identity-2").unwrap()).unwrap();
        assert!(v.holds);
        match v.witness.unwrap() {
            Witness::Partition { y0, y1, .. } => {
                assert_eq!(y0, vec![0]);
                assert_eq!(y1, vec![1]);
            }
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn nofb_zero_table2_holds() {
        let v = check_nofb_sufficient_zero(&builtin("gp-table2").unwrap());
        assert!(v.holds);
        // The trap state re-validates by substitution.
        let ch = builtin("gp-table2").unwrap();
        match v.witness.unwrap() {
            Witness::ZeroTrap { s, replies } => {
                for (x, s_prime) in replies {
                    for xp in 0..ch.nx() {
                        assert_ne!(ch.row_mask(x, s) & ch.row_mask(xp, s_prime), 0);
                    }
                }
            }
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn nofb_zero_table1_fails() {
        assert!(!check_nofb_sufficient_zero(&builtin("gp-table1").unwrap()).holds);
    }

    #[test]
    fn nofb_zero_identity_fails() {
        assert!(!check_nofb_sufficient_zero(&builtin("identity-2").unwrap()).holds);
    }

    #[test]
    fn stateless_positive_cases() {
        let id = builtin("identity-2").unwrap().as_stateless().unwrap();
        assert!(check_stateless_positive(&id).holds);
        let mod3 = builtin("mod3").unwrap().as_stateless().unwrap();
        assert!(!check_stateless_positive(&mod3).holds);
        let stuck = marginal_channel(&builtin("stuck-at-one").unwrap());
        assert!(!check_stateless_positive(&stuck).holds);
    }

    #[test]
    fn ccstates_necessary_thresholds() {
        let ch = builtin("stuck-at-one").unwrap();
        let low = CostSpec::state(vec![0.0, 1.0], 0.5);
        assert!(check_ccstates_necessary(&ch, &low).unwrap().holds);
        let high = CostSpec::state(vec![0.0, 1.0], 1.0);
        let v = check_ccstates_necessary(&ch, &high).unwrap();
        assert!(!v.holds);
        assert!(matches!(
            v.counterexample,
            Some(Counterexample::CostedStatePair {
                s: 1,
                s_prime: 1,
                ..
            })
        ));
        // Budget below every per-pair mean: no pair qualifies, vacuously true.
        let vacuous = CostSpec::state(vec![0.5, 1.0], 0.25);
        assert!(check_ccstates_necessary(&ch, &vacuous).unwrap().holds);
    }

    #[test]
    fn certificate_for_table1_is_three_by_three() {
        let ch = builtin("gp-table1").unwrap();
        let v = search_nofb_positive_certificate(&ch, &SearchLimits::default()).unwrap();
        assert!(v.holds);
        match v.witness.unwrap() {
            Witness::Certificate(cert) => {
                assert_eq!((cert.kappa, cert.lambda), (3, 3));
                assert!(cert.y_sets.iter().all(|s| s.len() == 1));
                cert.validate(&ch).unwrap();
            }
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn restricted_table2_has_no_certificate() {
        let ch = restrict_states(&builtin("gp-table2").unwrap(), &[0, 1, 3]).unwrap();
        let v = search_nofb_positive_certificate(&ch, &SearchLimits::default()).unwrap();
        assert!(!v.holds);
        assert!(!v.budget_exhausted);
        assert!(matches!(
            v.counterexample,
            Some(Counterexample::SearchExhausted { .. })
        ));
    }

    #[test]
    fn deterministic_channels_certify() {
        // Two reachable outputs per state guarantee a certificate exists
        // (singleton sets always work; the search may find a smaller kappa
        // with general sets first).
        let ch = builtin("tri-2x2x3").unwrap();
        let v = search_nofb_positive_certificate(&ch, &SearchLimits::default()).unwrap();
        assert!(v.holds);
        match v.witness.unwrap() {
            Witness::Certificate(cert) => cert.validate(&ch).unwrap(),
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn causal_partition_implies_kappa_two_certificate() {
        for name in ["tri-2x2x3", "identity-2"] {
            let ch = builtin(name).unwrap();
            assert!(check_causal_positive(&ch).unwrap().holds);
            let v = search_nofb_positive_certificate(&ch, &SearchLimits::default()).unwrap();
            assert!(v.holds, "{name} should certify");
        }
    }

    #[test]
    fn implication_chain_on_builtins() {
        for name in crate::channel::builtin_names() {
            let ch = builtin(name).unwrap();
            let causal = check_causal_positive(&ch).unwrap().holds;
            let acausal = check_acausal_positive(&ch).holds;
            let phase1 = check_phase1_feasible(&ch).holds;
            assert!(!causal || acausal, "{name}: causal should imply acausal");
            assert!(!acausal || phase1, "{name}: acausal should imply phase-1");
        }
    }

    #[test]
    fn verdicts_serialize_to_the_report_shape() {
        let v = check_acausal_positive(&builtin("stuck-at-one").unwrap());
        let json = serde_json::to_value(&v).unwrap();
        assert_eq!(json["condition"], "eq:positive");
        assert_eq!(json["holds"], false);
        assert!(json["witness"].is_null());
        assert_eq!(json["counterexample"]["kind"], "state-pair");
        assert_eq!(json["budget_exhausted"], false);
        let mut keys: Vec<&str> = json
            .as_object()
            .unwrap()
            .keys()
            .map(|k| k.as_str())
            .collect();
        keys.sort_unstable();
        assert_eq!(
            keys,
            [
                "budget_exhausted",
                "condition",
                "counterexample",
                "holds",
                "witness"
            ]
        );
    }

    #[test]
    fn acausal_equals_stateless_on_single_state() {
        for name in ["mod3", "identity-2"] {
            let ch = builtin(name).unwrap();
            let stateless = ch.as_stateless().unwrap();
            assert_eq!(
                check_acausal_positive(&ch).holds,
                check_stateless_positive(&stateless).holds,
                "{name}"
            );
        }
    }
}
