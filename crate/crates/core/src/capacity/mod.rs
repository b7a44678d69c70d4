//! Capacity formulas for state-dependent channels with feedback, in bits.
//!
//! Each operation evaluates one formula's right-hand side and pairs it with
//! the matching positivity check: the RHS equals the capacity only when the
//! positivity condition holds, and several of the formulas are positive even
//! for zero-capacity channels, so results carry both the raw `value` and a
//! `positive_flag` and report `capacity()` as zero when the flag is down.

pub(crate) mod inner;
pub(crate) mod nested;

pub use inner::{stationarity_spread, InnerMin, MaxMinMi};

use serde::Serialize;

use crate::channel::{
    marginal_channel, shannon_strategy_channel, BudgetRegime, CostSpec, StatelessChannel,
    SupportChannel,
};
use crate::conditions::{
    check_acausal_positive, check_causal_positive, check_ccstates_necessary,
    check_stateless_positive,
};
use crate::error::Error;
use crate::lp;
use crate::Result;

use nested::{
    grid_resolution, middle_maximize, outer_candidates, refine_candidates, MiddleBudget,
    MiddleOutcome, StrategyProblem,
};

/// Which formula a result evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Formula {
    Shannon,
    Ahlswede,
    Causal,
    StrictlyCausal,
    Acausal,
    Deterministic,
    RateState,
    CcInputs,
    CcStates,
}

/// Nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SimplexPoint(Vec<f64>);

impl SimplexPoint {
    pub fn new(mut weights: Vec<f64>) -> Result<Self> {
        let mut sum = 0.0;
        for w in &mut weights {
            if *w < 0.0 {
                if *w < -1e-9 {
                    return Err(Error::OutOfRange(format!(
                        "negative weight {w} in a simplex point"
                    )));
                }
                *w = 0.0;
            }
            sum += *w;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::OutOfRange(format!(
                "simplex point sums to {sum}, not 1"
            )));
        }
        for w in &mut weights {
            *w /= sum;
        }
        Ok(Self(weights))
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }
}

/// The adversarial law achieving an inner minimum.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InnerLaw {
    /// Rows `V(y|x)` of a stateless channel.
    Stateless { rows: Vec<Vec<f64>> },
    /// Rows `V(y|u,s)` indexed by auxiliary letter then state.
    PerStrategy { rows: Vec<Vec<Vec<f64>>> },
    /// Rows `V(y|x,s)` indexed by state then input.
    PerInputState { rows: Vec<Vec<Vec<f64>>> },
}

/// Distributions found by an optimizer, for replay and audit.
#[derive(Debug, Clone, Default, Serialize)]
pub struct OptimizerState {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_x: Option<SimplexPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_s: Option<SimplexPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_u_given_s: Option<Vec<SimplexPoint>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_x_given_s: Option<Vec<SimplexPoint>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner_law: Option<InnerLaw>,
}

/// A formula evaluation.
///
/// `value` is the formula's right-hand side clamped at zero. When
/// `positive_flag` is false the value is only the RHS, not a capacity, and
/// [`CapacityResult::capacity`] reports zero.
#[derive(Debug, Clone, Serialize)]
pub struct CapacityResult {
    pub formula: Formula,
    pub value: f64,
    pub positive_flag: bool,
    pub optimizer_state: OptimizerState,
    pub gap_estimate: f64,
}

impl CapacityResult {
    pub fn capacity(&self) -> f64 {
        if self.positive_flag {
            self.value
        } else {
            0.0
        }
    }
}

/// Optimizer knobs with desk-scale defaults.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Absolute tolerance in bits for the nested optimizers.
    pub tol: f64,
    /// LP tolerance.
    pub lp_tol: f64,
    /// Iteration budget per optimizer layer.
    pub max_iterations: usize,
    /// Outer simplex grid resolution.
    pub grid_resolution: usize,
    /// Local refinement passes after the grid sweep.
    pub refinement_passes: usize,
    /// Random restarts of the middle ascent.
    pub multistart: usize,
    pub seed: u64,
    /// Cap on the strategy alphabet `|X|^|S|`.
    pub strategy_cap: usize,
    /// Skip the closed-form shortcuts and run the nested optimizer.
    pub force_optimizer: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            lp_tol: 1e-9,
            max_iterations: 100_000,
            grid_resolution: 64,
            refinement_passes: 2,
            multistart: 8,
            seed: 0,
            strategy_cap: crate::channel::DEFAULT_STRATEGY_CAP,
            force_optimizer: false,
        }
    }
}

/// Binary entropy in bits, with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::OutOfRange(format!(
            "binary entropy needs p in [0,1], got {p}"
        )));
    }
    Ok(entropy_bits(&[p, 1.0 - p]))
}

/// Shannon entropy of a weight vector, in bits.
pub fn entropy_bits(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.log2())
        .sum::<f64>()
}

/// Inputs of `rows[y][x] = 1` whenever input `x` can produce output `y`.
fn confusion_rows(ch: &StatelessChannel) -> Vec<Vec<f64>> {
    (0..ch.ny)
        .map(|y| {
            (0..ch.nx)
                .map(|x| if ch.supports(x, y) { 1.0 } else { 0.0 })
                .collect()
        })
        .collect()
}

/// Vertex enumeration is the default route for small input alphabets; the
/// iterative simplex method covers the rest.
const VERTEX_ENUM_MAX_INPUTS: usize = 8;

fn solve_shannon_game(
    ch: &StatelessChannel,
    extra_le: &[(Vec<f64>, f64)],
) -> Result<lp::LpSolution> {
    let rows = confusion_rows(ch);
    if ch.nx <= VERTEX_ENUM_MAX_INPUTS {
        lp::minimax_by_vertex_enumeration(&rows, ch.nx, extra_le)
    } else {
        lp::minimax_by_simplex(&rows, ch.nx, extra_le)
    }
}

/// Zero-error feedback capacity formula of a stateless channel:
/// `-log2 min_P max_y sum_{x: W(y|x)>0} P(x)`.
pub fn shannon_fb_capacity(ch: &StatelessChannel) -> Result<CapacityResult> {
    let sol = solve_shannon_game(ch, &[])?;
    finish_shannon(ch, sol, Formula::Shannon)
}

/// The same game restricted to input PMFs satisfying `E[gamma(X)] <= budget`.
///
/// This evaluates the budget-restricted sequential-coding expression; it is
/// a lower bound on the cost-constrained capacity and can be strictly
/// smaller than it.
pub fn shannon_fb_capacity_constrained(
    ch: &StatelessChannel,
    cost: &CostSpec,
) -> Result<CapacityResult> {
    let gamma = cost.input_cost()?;
    if gamma.len() != ch.nx {
        return Err(Error::MalformedDocument(
            "input cost length does not match the input alphabet".into(),
        ));
    }
    match CostSpec::regime_of(gamma, cost.budget) {
        BudgetRegime::Infeasible => Err(Error::InfeasibleBudget {
            budget: cost.budget,
            min: gamma.iter().cloned().fold(f64::INFINITY, f64::min),
        }),
        BudgetRegime::Slack => shannon_fb_capacity(ch),
        BudgetRegime::PinnedToMin => {
            let keep = min_cost_inputs(gamma);
            let (sub, map) = restrict_inputs(ch, &keep)?;
            let sol = solve_shannon_game(&sub, &[])?;
            let mut p = vec![0.0; ch.nx];
            for (i, &x) in map.iter().enumerate() {
                p[x] = sol.x[i];
            }
            finish_shannon(
                ch,
                lp::LpSolution {
                    value: sol.value,
                    x: p,
                },
                Formula::Shannon,
            )
        }
        BudgetRegime::Interior => {
            let sol = solve_shannon_game(ch, &[(gamma.to_vec(), cost.budget)])?;
            finish_shannon(ch, sol, Formula::Shannon)
        }
    }
}

fn finish_shannon(
    ch: &StatelessChannel,
    sol: lp::LpSolution,
    formula: Formula,
) -> Result<CapacityResult> {
    let value = (-sol.value.log2()).max(0.0);
    Ok(CapacityResult {
        formula,
        value,
        positive_flag: check_stateless_positive(ch).holds,
        optimizer_state: OptimizerState {
            p_x: Some(SimplexPoint::new(sol.x)?),
            ..Default::default()
        },
        gap_estimate: 1e-9,
    })
}

/// Value of the dual game, a mixture over outputs maximizing the smallest
/// row coverage. Coincides with the primal game value by LP duality.
pub fn shannon_dual_value(ch: &StatelessChannel) -> Result<f64> {
    let cols: Vec<Vec<f64>> = (0..ch.nx)
        .map(|x| {
            (0..ch.ny)
                .map(|y| if ch.supports(x, y) { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    if ch.ny <= VERTEX_ENUM_MAX_INPUTS {
        Ok(lp::maximin_by_vertex_enumeration(&cols, ch.ny, &[])?.value)
    } else {
        Ok(lp::maximin_by_simplex(&cols, ch.ny)?.value)
    }
}

fn min_cost_inputs(gamma: &[f64]) -> Vec<usize> {
    let min = gamma.iter().cloned().fold(f64::INFINITY, f64::min);
    (0..gamma.len()).filter(|&x| gamma[x] == min).collect()
}

fn restrict_inputs(
    ch: &StatelessChannel,
    keep: &[usize],
) -> Result<(StatelessChannel, Vec<usize>)> {
    let mut support = Vec::with_capacity(keep.len() * ch.ny);
    for &x in keep {
        for y in 0..ch.ny {
            support.push(ch.supports(x, y));
        }
    }
    Ok((
        StatelessChannel::new(format!("{}|x", ch.name), keep.len(), ch.ny, support, None)?,
        keep.to_vec(),
    ))
}

/// `max_P min_{V << W} I(P;V)`, optionally under `E[gamma(X)] <= budget`.
/// An alternative form of the stateless feedback formula; the two agree on
/// every channel without a cost constraint, which the tests exploit as a
/// cross-oracle.
pub fn ahlswede_capacity(
    ch: &StatelessChannel,
    cost: Option<&CostSpec>,
    opts: &SolverOptions,
) -> Result<CapacityResult> {
    let constraint_data;
    let mut constraint = None;
    let mut restricted: Option<(StatelessChannel, Vec<usize>)> = None;
    if let Some(spec) = cost {
        let gamma = spec.input_cost()?;
        match CostSpec::regime_of(gamma, spec.budget) {
            BudgetRegime::Infeasible => {
                return Err(Error::InfeasibleBudget {
                    budget: spec.budget,
                    min: gamma.iter().cloned().fold(f64::INFINITY, f64::min),
                })
            }
            BudgetRegime::Slack => {}
            BudgetRegime::PinnedToMin => {
                restricted = Some(restrict_inputs(ch, &min_cost_inputs(gamma))?);
            }
            BudgetRegime::Interior => {
                constraint_data = (gamma.to_vec(), spec.budget);
                constraint = Some(constraint_data);
            }
        }
    }
    let max_cuts = opts.max_iterations.min(600).max(50);
    let (target, map): (&StatelessChannel, Option<&[usize]>) = match &restricted {
        Some((sub, map)) => (sub, Some(map)),
        None => (ch, None),
    };
    let out = inner::max_min_mi_channel(
        target,
        constraint.as_ref().map(|(g, b)| (g.as_slice(), *b)),
        opts.tol,
        max_cuts,
    )?;
    if out.gap > opts.tol * 10.0 {
        let partial = ahlswede_result(ch, &out, map)?;
        return Err(Error::ConvergenceFailure {
            gap: out.gap,
            partial: Box::new(partial),
        });
    }
    ahlswede_result(ch, &out, map)
}

fn ahlswede_result(
    ch: &StatelessChannel,
    out: &MaxMinMi,
    map: Option<&[usize]>,
) -> Result<CapacityResult> {
    let p = match map {
        None => out.p.clone(),
        Some(map) => {
            let mut p = vec![0.0; ch.nx];
            for (i, &x) in map.iter().enumerate() {
                p[x] = out.p[i];
            }
            p
        }
    };
    Ok(CapacityResult {
        formula: Formula::Ahlswede,
        value: out.value.max(0.0),
        positive_flag: check_stateless_positive(ch).holds,
        optimizer_state: OptimizerState {
            p_x: Some(SimplexPoint::new(p)?),
            inner_law: Some(InnerLaw::Stateless {
                rows: out.inner.v.clone(),
            }),
            ..Default::default()
        },
        gap_estimate: out.gap.max(out.inner.gap),
    })
}

/// Causal-side-information feedback capacity: the stateless formula on the
/// Shannon-strategy lift. The RHS can be positive for zero-capacity
/// channels, so the flag comes from the one-shot partition condition.
pub fn causal_fb_capacity(ch: &SupportChannel, opts: &SolverOptions) -> Result<CapacityResult> {
    let (lifted, _) = shannon_strategy_channel(ch, opts.strategy_cap)?;
    let sol = solve_shannon_game(&lifted, &[])?;
    let value = (-sol.value.log2()).max(0.0);
    Ok(CapacityResult {
        formula: Formula::Causal,
        value,
        positive_flag: check_causal_positive(ch)?.holds,
        optimizer_state: OptimizerState {
            p_x: Some(SimplexPoint::new(sol.x)?),
            ..Default::default()
        },
        gap_estimate: 1e-9,
    })
}

/// Strictly-causal side information cannot beat the state-averaged channel,
/// so this is the stateless formula on the marginal.
pub fn strictly_causal_capacity(ch: &SupportChannel) -> Result<CapacityResult> {
    let m = marginal_channel(ch);
    let mut result = shannon_fb_capacity(&m)?;
    result.formula = Formula::StrictlyCausal;
    result.positive_flag = check_stateless_positive(&m).holds;
    Ok(result)
}

/// Closed form for deterministic (single-output-per-row) channels:
/// `min_s log2 |{y reachable at s}|`.
pub fn deterministic_acausal_capacity(ch: &SupportChannel) -> Result<CapacityResult> {
    if !ch.is_deterministic() {
        return Err(Error::NotDeterministic);
    }
    let (worst_s, reach) = (0..ch.ns())
        .map(|s| (s, ch.reachable_mask(s).count_ones()))
        .min_by_key(|&(_, c)| c)
        .expect("at least one state");
    let mut p_s = vec![0.0; ch.ns()];
    p_s[worst_s] = 1.0;
    Ok(CapacityResult {
        formula: Formula::Deterministic,
        value: (reach as f64).log2(),
        positive_flag: check_acausal_positive(ch).holds,
        optimizer_state: OptimizerState {
            p_s: Some(SimplexPoint::new(p_s)?),
            ..Default::default()
        },
        gap_estimate: 0.0,
    })
}

/// Effort split for the nested layers.
struct NestedBudgets {
    sweep: MiddleBudget,
    full: MiddleBudget,
    grid_cap: usize,
}

fn nested_budgets(deterministic: bool, opts: &SolverOptions) -> NestedBudgets {
    if deterministic {
        NestedBudgets {
            sweep: MiddleBudget {
                ascent_iters: 12,
                random_starts: 0,
                inner_tol: 1e-9,
                inner_iters: 50,
                lean: true,
            },
            full: MiddleBudget {
                ascent_iters: opts.max_iterations.min(120),
                random_starts: opts.multistart,
                inner_tol: 1e-9,
                inner_iters: 50,
                lean: false,
            },
            grid_cap: 1280,
        }
    } else {
        NestedBudgets {
            sweep: MiddleBudget {
                ascent_iters: 0,
                random_starts: 0,
                inner_tol: opts.tol * 0.1,
                inner_iters: 120,
                lean: true,
            },
            full: MiddleBudget {
                ascent_iters: opts.max_iterations.min(80),
                random_starts: opts.multistart,
                inner_tol: opts.tol * 0.01,
                inner_iters: 2500,
                lean: false,
            },
            grid_cap: 220,
        }
    }
}

struct NestedOutcome {
    value: f64,
    p_s: Vec<f64>,
    middle: MiddleOutcome,
    gap: f64,
}

/// Outer grid sweep plus local refinement over state PMFs; `input_cost`
/// constrains the middle layer, `state_constraint` the outer one.
fn nested_minimax(
    ch: &SupportChannel,
    opts: &SolverOptions,
    input_cost: Option<(&[f64], f64)>,
    state_constraint: Option<(&[f64], f64)>,
) -> Result<NestedOutcome> {
    let prob = StrategyProblem::new(ch, opts.strategy_cap)?;
    let gamma_matrix: Option<(Vec<Vec<f64>>, f64)> = input_cost.map(|(gamma, budget)| {
        let m = (0..prob.nu())
            .map(|u| {
                (0..ch.ns())
                    .map(|s| gamma[prob.table.g(u, s)])
                    .collect::<Vec<f64>>()
            })
            .collect();
        (m, budget)
    });
    let middle_cost = gamma_matrix
        .as_ref()
        .map(|(m, budget)| (m.as_slice(), *budget));
    if ch.ns() == 1 {
        // Single state: the outer layer is trivial and the middle objective
        // is the concave stateless one, so the certified cutting-plane
        // solver applies directly over the strategy alphabet.
        let masks: Vec<u64> = (0..prob.nu()).map(|u| prob.masks[u][0]).collect();
        let strategy_cost: Option<(Vec<f64>, f64)> = gamma_matrix
            .as_ref()
            .map(|(m, budget)| (m.iter().map(|row| row[0]).collect(), *budget));
        let out = inner::max_min_mi(
            &masks,
            ch.ny(),
            strategy_cost.as_ref().map(|(g, b)| (g.as_slice(), *b)),
            opts.tol,
            opts.max_iterations.min(600).max(50),
        )?;
        let v_rows: Vec<Vec<Vec<f64>>> = out.inner.v.iter().map(|r| vec![r.clone()]).collect();
        return Ok(NestedOutcome {
            value: out.value.max(0.0),
            p_s: vec![1.0],
            middle: MiddleOutcome {
                value: out.value,
                p_us: vec![out.p.clone()],
                inner: nested::StrategyInner {
                    value: out.value,
                    v: v_rows,
                    gap: out.inner.gap,
                },
            },
            gap: out.gap,
        });
    }
    let budgets = nested_budgets(prob.deterministic, opts);
    let g = grid_resolution(ch.ns(), opts.grid_resolution, budgets.grid_cap);
    let candidates = outer_candidates(ch.ns(), g, state_constraint);

    let sweep_eval = |p_s: &[f64]| -> MiddleOutcome {
        middle_maximize(p_s, &prob, middle_cost, &budgets.sweep, opts.seed)
    };
    let (mut best_p, mut best_cheap) = candidates
        .iter()
        .map(|p| (p.clone(), sweep_eval(p).value))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("outer grid is nonempty");

    for pass in 0..opts.refinement_passes {
        let step = 1.0 / (g as f64 * (1 << (pass + 1)) as f64);
        let mut moves = 0;
        loop {
            let Some((q, v)) = refine_candidates(&best_p, step, state_constraint)
                .into_iter()
                .map(|q| {
                    let v = sweep_eval(&q).value;
                    (q, v)
                })
                .min_by(|a, b| a.1.total_cmp(&b.1))
            else {
                break;
            };
            if v >= best_cheap - 1e-12 {
                break;
            }
            best_cheap = v;
            best_p = q;
            moves += 1;
            if moves >= 2 * ch.ns() {
                break;
            }
        }
    }

    let middle = middle_maximize(&best_p, &prob, middle_cost, &budgets.full, opts.seed);
    let gap = (middle.inner.gap + (middle.value - best_cheap).abs()).max(opts.tol);
    Ok(NestedOutcome {
        value: middle.value.max(0.0),
        p_s: best_p,
        middle,
        gap,
    })
}

fn nested_result(
    formula: Formula,
    outcome: NestedOutcome,
    positive_flag: bool,
) -> Result<CapacityResult> {
    let p_u_given_s = outcome
        .middle
        .p_us
        .iter()
        .map(|row| SimplexPoint::new(row.clone()))
        .collect::<Result<Vec<_>>>()?;
    Ok(CapacityResult {
        formula,
        value: outcome.value,
        positive_flag,
        optimizer_state: OptimizerState {
            p_s: Some(SimplexPoint::new(outcome.p_s)?),
            p_u_given_s: Some(p_u_given_s),
            inner_law: Some(InnerLaw::PerStrategy {
                rows: outcome.middle.inner.v,
            }),
            ..Default::default()
        },
        gap_estimate: outcome.gap,
    })
}

/// Acausal-side-information feedback capacity formula: the min-max-min over
/// state PMFs, strategy conditionals, and admissible laws. Deterministic
/// channels bypass to the closed form unless `force_optimizer` is set. When
/// the positivity condition fails the value is still reported as the RHS;
/// it can be strictly positive for zero-capacity channels.
pub fn acausal_fb_capacity(ch: &SupportChannel, opts: &SolverOptions) -> Result<CapacityResult> {
    if ch.is_deterministic() && !opts.force_optimizer {
        let mut result = deterministic_acausal_capacity(ch)?;
        result.formula = Formula::Acausal;
        return Ok(result);
    }
    let outcome = nested_minimax(ch, opts, None, None)?;
    nested_result(Formula::Acausal, outcome, check_acausal_positive(ch).holds)
}

/// Input-cost-constrained variant: the middle maximization is restricted to
/// conditionals with `E[gamma(g(U,S))] <= budget`.
pub fn ccinputs_capacity(
    ch: &SupportChannel,
    cost: &CostSpec,
    opts: &SolverOptions,
) -> Result<CapacityResult> {
    let gamma = cost.input_cost()?;
    if gamma.len() != ch.nx() {
        return Err(Error::MalformedDocument(
            "input cost length does not match the input alphabet".into(),
        ));
    }
    let positive = check_acausal_positive(ch).holds;
    match CostSpec::regime_of(gamma, cost.budget) {
        BudgetRegime::Infeasible => Err(Error::InfeasibleBudget {
            budget: cost.budget,
            min: gamma.iter().cloned().fold(f64::INFINITY, f64::min),
        }),
        BudgetRegime::Slack => {
            let mut r = acausal_fb_capacity(ch, opts)?;
            r.formula = Formula::CcInputs;
            Ok(r)
        }
        BudgetRegime::PinnedToMin => {
            // Only minimum-cost inputs are usable.
            let keep = min_cost_inputs(gamma);
            let sub = keep_inputs(ch, &keep)?;
            let mut r = acausal_fb_capacity(&sub, opts)?;
            r.formula = Formula::CcInputs;
            r.positive_flag = positive;
            Ok(r)
        }
        BudgetRegime::Interior => {
            let outcome = nested_minimax(ch, opts, Some((gamma, cost.budget)), None)?;
            // Time-sharing gives `frac * unconstrained` as a sanity floor on
            // the RHS; an optimizer landing below it widens the gap estimate.
            let unconstrained = acausal_fb_capacity(ch, opts)?.value;
            let min = gamma.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = gamma.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let floor = (cost.budget - min) / (max - min) * unconstrained;
            let shortfall = (floor - outcome.value).max(0.0);
            let mut result = nested_result(Formula::CcInputs, outcome, positive)?;
            result.gap_estimate += shortfall;
            Ok(result)
        }
    }
}

fn keep_inputs(ch: &SupportChannel, keep: &[usize]) -> Result<SupportChannel> {
    let mut triples = Vec::new();
    for (new_x, &x) in keep.iter().enumerate() {
        for s in 0..ch.ns() {
            for y in 0..ch.ny() {
                if ch.supports(x, s, y) {
                    triples.push((new_x, s, y));
                }
            }
        }
    }
    SupportChannel::new(
        format!("{}|x", ch.name()),
        keep.len(),
        ch.ns(),
        ch.ny(),
        &triples,
        None,
    )
}

/// State-cost-constrained variant: the adversarial state PMF must satisfy
/// `E[lambda(S)] <= budget`. Deterministic channels reduce to a small LP
/// over state PMFs (`min E[log2 |reach(S)|]`); others run the nested
/// optimizer with a constrained outer layer. The positivity flag reflects a
/// necessary condition only.
pub fn ccstates_capacity(
    ch: &SupportChannel,
    cost: &CostSpec,
    opts: &SolverOptions,
) -> Result<CapacityResult> {
    let lambda = cost.state_cost()?;
    if lambda.len() != ch.ns() {
        return Err(Error::MalformedDocument(
            "state cost length does not match the state alphabet".into(),
        ));
    }
    let min = lambda.iter().cloned().fold(f64::INFINITY, f64::min);
    if cost.budget < min {
        return Err(Error::InfeasibleBudget {
            budget: cost.budget,
            min,
        });
    }
    let positive = check_ccstates_necessary(ch, cost)?.holds;
    let max = lambda.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let constraint = if cost.budget < max {
        Some((lambda, cost.budget))
    } else {
        None
    };

    if ch.is_deterministic() && !opts.force_optimizer {
        // LP: minimize the expected log-reach over admissible state PMFs.
        let c: Vec<f64> = (0..ch.ns())
            .map(|s| (ch.reachable_mask(s).count_ones() as f64).log2())
            .collect();
        let mut lp = lp::LinearProgram {
            c,
            ..Default::default()
        };
        if let Some((lambda, budget)) = constraint {
            lp.a_ub.push(lambda.to_vec());
            lp.b_ub.push(budget);
        }
        lp.a_eq.push(vec![1.0; ch.ns()]);
        lp.b_eq.push(1.0);
        let sol = lp::solve(&lp)?;
        return Ok(CapacityResult {
            formula: Formula::CcStates,
            value: sol.value.max(0.0),
            positive_flag: positive,
            optimizer_state: OptimizerState {
                p_s: Some(SimplexPoint::new(sol.x)?),
                ..Default::default()
            },
            gap_estimate: 1e-9,
        });
    }

    let outcome = nested_minimax(ch, opts, None, constraint)?;
    nested_result(Formula::CcStates, outcome, positive)
}

/// Feedback capacity when the decoder must also recover the state sequence:
/// `[ min_{P_S} max_{P_{X|S}} min_{V << W} I(X,S;Y) - H(S) ]+`.
///
/// The middle layer treats `(x,s)` as a compound input, which keeps it a
/// concave program solved by the certified cutting-plane loop; only the
/// outer state sweep is heuristic.
pub fn rate_and_state_capacity(
    ch: &SupportChannel,
    opts: &SolverOptions,
) -> Result<CapacityResult> {
    let (nx, ns, ny) = (ch.nx(), ch.ns(), ch.ny());
    let pair_masks: Vec<u64> = (0..ns * nx).map(|i| ch.row_mask(i % nx, i / nx)).collect();
    let sweep_cuts = 40;
    let full_cuts = opts.max_iterations.min(300).max(60);
    let objective = |p_s: &[f64], cuts: usize| -> Result<inner::CondMaxMin> {
        inner::max_min_mi_conditional(&pair_masks, nx, ns, ny, p_s, opts.tol, cuts)
    };

    let g = grid_resolution(ns, opts.grid_resolution, 400);
    let candidates = outer_candidates(ns, g, None);
    let mut best_p = candidates[0].clone();
    let mut best_cheap = f64::INFINITY;
    for p in &candidates {
        let v = objective(p, sweep_cuts)?.value - entropy_bits(p);
        if v < best_cheap {
            best_cheap = v;
            best_p = p.clone();
        }
    }
    for pass in 0..opts.refinement_passes {
        let step = 1.0 / (g as f64 * (1 << (pass + 1)) as f64);
        for _ in 0..2 * ns {
            let mut improved = false;
            for q in refine_candidates(&best_p, step, None) {
                let v = objective(&q, sweep_cuts)?.value - entropy_bits(&q);
                if v < best_cheap - 1e-12 {
                    best_cheap = v;
                    best_p = q;
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
    }
    let full = objective(&best_p, full_cuts)?;
    let pre_clamp = full.value - entropy_bits(&best_p);
    let p_x_given_s = full
        .rows
        .iter()
        .map(|r| SimplexPoint::new(r.clone()))
        .collect::<Result<Vec<_>>>()?;
    // Inner rows are indexed by the compound input; regroup by state.
    let law_rows: Vec<Vec<Vec<f64>>> = (0..ns)
        .map(|s| (0..nx).map(|x| full.inner.v[s * nx + x].clone()).collect())
        .collect();
    Ok(CapacityResult {
        formula: Formula::RateState,
        value: pre_clamp.max(0.0),
        positive_flag: check_acausal_positive(ch).holds,
        optimizer_state: OptimizerState {
            p_s: Some(SimplexPoint::new(best_p)?),
            p_x_given_s: Some(p_x_given_s),
            inner_law: Some(InnerLaw::PerInputState { rows: law_rows }),
            ..Default::default()
        },
        gap_estimate: full.gap.max((pre_clamp - best_cheap).abs()),
    })
}
