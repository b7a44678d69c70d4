//! Nested optimizer for the state-dependent capacity formulas.
//!
//! The general shape is `min over state PMFs` of `max over conditional
//! auxiliary PMFs` of `min over admissible channel laws` of an
//! information objective. The inner layer is convex and solved by projected
//! descent with a Frank-Wolfe style gap; the middle layer is maximized by
//! multistart projected ascent seeded with structured warm starts; the outer
//! layer scans a simplex grid and refines locally. The middle and outer
//! layers are not convex programs, so results carry a gap estimate and the
//! test suites only pin instances with independent closed forms or cross
//! oracles.

use crate::channel::{StrategyTable, SupportChannel};
use crate::rng::SplitMix64;
use crate::Result;

const LOG_CLAMP: f64 = 50.0;
const WEIGHT_FLOOR: f64 = 1e-15;

#[inline]
fn clog2(num: f64, den: f64) -> f64 {
    if num <= 0.0 {
        -LOG_CLAMP
    } else if den <= 0.0 {
        LOG_CLAMP
    } else {
        (num / den).log2().clamp(-LOG_CLAMP, LOG_CLAMP)
    }
}

/// Euclidean projection onto the simplex over the `allowed` index set;
/// entries outside it are zeroed.
pub(crate) fn project_row_simplex(row: &mut [f64], allowed: u64) {
    let idx: Vec<usize> = (0..row.len())
        .filter(|&i| allowed & (1 << i) != 0)
        .collect();
    for (i, v) in row.iter_mut().enumerate() {
        if allowed & (1 << i) == 0 {
            *v = 0.0;
        }
    }
    let mut vals: Vec<f64> = idx.iter().map(|&i| row[i]).collect();
    let n = vals.len();
    assert!(n > 0, "empty support in projection");
    let mut sorted = vals.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        cum += v;
        let t = (cum - 1.0) / (k + 1) as f64;
        if k + 1 == n || sorted[k + 1] <= t {
            theta = t;
            break;
        }
    }
    for v in &mut vals {
        *v = (*v - theta).max(0.0);
    }
    let sum: f64 = vals.iter().sum();
    for (&i, v) in idx.iter().zip(&vals) {
        row[i] = v / sum;
    }
}

/// The auxiliary-alphabet problem data: strategies, per-(u,s) support
/// masks and channel rows.
pub(crate) struct StrategyProblem<'a> {
    pub ch: &'a SupportChannel,
    pub table: StrategyTable,
    /// `masks[u][s]`: support of `W(. | g(u,s), s)`.
    pub masks: Vec<Vec<u64>>,
    /// Channel rows as probabilities, the warm start of the inner layer.
    pub w_rows: Vec<Vec<Vec<f64>>>,
    pub deterministic: bool,
}

impl<'a> StrategyProblem<'a> {
    pub fn new(ch: &'a SupportChannel, cap: usize) -> Result<Self> {
        let table = StrategyTable::new(ch.nx(), ch.ns(), cap)?;
        let (nu, ns, ny) = (table.nu, ch.ns(), ch.ny());
        let mut masks = vec![vec![0u64; ns]; nu];
        let mut w_rows = vec![vec![vec![0.0; ny]; ns]; nu];
        for (u, row) in masks.iter_mut().enumerate() {
            for (s, cell) in row.iter_mut().enumerate() {
                let x = table.g(u, s);
                *cell = ch.row_mask(x, s);
                for y in 0..ny {
                    w_rows[u][s][y] = ch.prob(x, s, y);
                }
            }
        }
        Ok(Self {
            ch,
            table,
            masks,
            w_rows,
            deterministic: ch.is_deterministic(),
        })
    }

    pub fn nu(&self) -> usize {
        self.table.nu
    }
}

/// Inner layer outcome: adversarial law minimizing `I(U;Y)` at fixed joint
/// auxiliary weights.
#[derive(Debug, Clone)]
pub(crate) struct StrategyInner {
    pub value: f64,
    pub v: Vec<Vec<Vec<f64>>>,
    pub gap: f64,
}

/// `I(U;Y)` and its output mixture for a candidate law.
fn iuy_of(
    w: &[Vec<f64>],
    v: &[Vec<Vec<f64>>],
    nu: usize,
    ns: usize,
    ny: usize,
) -> (f64, Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let mut p_uy = vec![vec![0.0; ny]; nu];
    let mut p_u = vec![0.0; nu];
    let mut r = vec![0.0; ny];
    for u in 0..nu {
        for s in 0..ns {
            let wu = w[u][s];
            if wu <= 0.0 {
                continue;
            }
            p_u[u] += wu;
            for y in 0..ny {
                p_uy[u][y] += wu * v[u][s][y];
            }
        }
    }
    for u in 0..nu {
        for y in 0..ny {
            r[y] += p_uy[u][y];
        }
    }
    let mut i = 0.0;
    for u in 0..nu {
        if p_u[u] <= 0.0 {
            continue;
        }
        for y in 0..ny {
            let q = p_uy[u][y];
            if q > 0.0 {
                i += q * (q / (p_u[u] * r[y])).log2();
            }
        }
    }
    (i.max(0.0), p_uy, p_u, r)
}

/// Projected-descent minimization of `I(U;Y)` over laws `V(y|u,s)`
/// absolutely continuous w.r.t. the channel row of `(g(u,s), s)`.
///
/// The objective is convex; projected gradient steps do the bulk of the
/// work, and whenever backtracking stalls (gradients blow up at the relative
/// boundary) a vertex step with exact one-dimensional line search takes
/// over, which is immune to the blow-up because the objective restricted to
/// a segment is convex. Deterministic channels admit exactly one law, so
/// the minimum is closed form there.
pub(crate) fn inner_minimize(
    w: &[Vec<f64>],
    prob: &StrategyProblem,
    v_init: Option<&[Vec<Vec<f64>>]>,
    tol: f64,
    max_iter: usize,
) -> StrategyInner {
    inner_minimize_rows(
        w,
        &prob.masks,
        &prob.w_rows,
        prob.ch.ny(),
        prob.deterministic,
        v_init,
        tol,
        max_iter,
    )
}

/// Same minimization over arbitrary conditioned rows: `w[u][j]` weights the
/// `j`-th conditioning cell of auxiliary letter `u`, whose admissible
/// support is `masks[u][j]`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn inner_minimize_rows(
    w: &[Vec<f64>],
    masks: &[Vec<u64>],
    w_rows: &[Vec<Vec<f64>>],
    ny: usize,
    deterministic: bool,
    v_init: Option<&[Vec<Vec<f64>>]>,
    tol: f64,
    max_iter: usize,
) -> StrategyInner {
    let nu = w.len();
    let ns = w[0].len();
    let mut v: Vec<Vec<Vec<f64>>> = match v_init {
        Some(v0) => v0.to_vec(),
        None => w_rows.to_vec(),
    };
    if deterministic {
        let (value, ..) = iuy_of(w, &v, nu, ns, ny);
        return StrategyInner { value, v, gap: 0.0 };
    }
    let active: Vec<(usize, usize)> = (0..nu)
        .flat_map(|u| (0..ns).map(move |s| (u, s)))
        .filter(|&(u, s)| w[u][s] > WEIGHT_FLOOR)
        .collect();
    let f = |v: &[Vec<Vec<f64>>]| iuy_of(w, v, nu, ns, ny).0;
    let mut value = f(&v);
    let mut gap = f64::INFINITY;
    let mut eta = 0.5;
    for _ in 0..max_iter {
        let (_, p_uy, p_u, r) = iuy_of(w, &v, nu, ns, ny);
        // Gradient over the active rows and the optimality gap. Logs are
        // clamped, so the gap is only an indicator near the boundary; the
        // vertex fallback below guards the cases it mis-measures.
        let mut grad: Vec<Vec<f64>> = Vec::with_capacity(active.len());
        let mut g_total = 0.0;
        for &(u, s) in &active {
            let wu = w[u][s];
            let mut row = vec![0.0; ny];
            let mut inner_dot = 0.0;
            let mut min_g = f64::INFINITY;
            for y in 0..ny {
                if masks[u][s] & (1 << y) == 0 {
                    continue;
                }
                let pyu = if p_u[u] > 0.0 {
                    p_uy[u][y] / p_u[u]
                } else {
                    0.0
                };
                let g = wu * clog2(pyu, r[y]);
                row[y] = g;
                inner_dot += g * v[u][s][y];
                min_g = min_g.min(g);
            }
            g_total += inner_dot - min_g;
            grad.push(row);
        }
        gap = g_total;
        if gap <= tol {
            break;
        }
        // Backtracking projected step.
        let mut accepted = false;
        for _ in 0..30 {
            let mut cand = v.clone();
            for (k, &(u, s)) in active.iter().enumerate() {
                for y in 0..ny {
                    cand[u][s][y] -= eta * grad[k][y];
                }
                project_row_simplex(&mut cand[u][s], masks[u][s]);
            }
            let val2 = f(&cand);
            if val2 <= value - 1e-14 {
                v = cand;
                value = val2;
                eta = (eta * 1.5).min(64.0);
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if accepted {
            continue;
        }
        // Vertex step: move every active row toward its most attractive
        // vertex, with the step size found by exact line search.
        let mut target = v.clone();
        for (k, &(u, s)) in active.iter().enumerate() {
            let best_y = (0..ny)
                .filter(|&y| masks[u][s] & (1 << y) != 0)
                .min_by(|&a, &b| grad[k][a].total_cmp(&grad[k][b]))
                .expect("nonempty row support");
            for y in 0..ny {
                target[u][s][y] = if y == best_y { 1.0 } else { 0.0 };
            }
        }
        let blend = |t: f64| -> Vec<Vec<Vec<f64>>> {
            let mut cand = v.clone();
            for &(u, s) in &active {
                for y in 0..ny {
                    cand[u][s][y] = (1.0 - t) * v[u][s][y] + t * target[u][s][y];
                }
            }
            cand
        };
        let mut lo = 0.0;
        let mut hi = 1.0;
        for _ in 0..32 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if f(&blend(m1)) <= f(&blend(m2)) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let t = 0.5 * (lo + hi);
        let cand = blend(t);
        let val2 = f(&cand);
        if val2 <= value - 1e-14 {
            v = cand;
            value = val2;
            eta = 0.5;
        } else {
            break;
        }
    }
    StrategyInner { value, v, gap }
}

/// Mutual information `I(U;S)` of `p_s` with rows `p_us[s][u]`, in bits.
pub(crate) fn mutual_info_us(p_s: &[f64], p_us: &[Vec<f64>], nu: usize) -> f64 {
    let ns = p_s.len();
    let mut p_u = vec![0.0; nu];
    for s in 0..ns {
        for u in 0..nu {
            p_u[u] += p_s[s] * p_us[s][u];
        }
    }
    let mut i = 0.0;
    for s in 0..ns {
        if p_s[s] == 0.0 {
            continue;
        }
        for u in 0..nu {
            let w = p_s[s] * p_us[s][u];
            if w > 0.0 {
                i += w * (p_us[s][u] / p_u[u]).log2();
            }
        }
    }
    i.max(0.0)
}

/// Per-layer effort knobs, split so grid sweeps can run lean.
#[derive(Debug, Clone)]
pub(crate) struct MiddleBudget {
    pub ascent_iters: usize,
    pub random_starts: usize,
    pub inner_tol: f64,
    pub inner_iters: usize,
    /// Grid sweeps skip the expensive full-support start on stochastic
    /// channels; the refinement's full evaluation restores it.
    pub lean: bool,
}

/// Middle-layer outcome.
#[derive(Debug, Clone)]
pub(crate) struct MiddleOutcome {
    pub value: f64,
    pub p_us: Vec<Vec<f64>>,
    pub inner: StrategyInner,
}

/// Structured starting points for the middle ascent.
///
/// - a constant-strategy point (objective exactly zero, so the layer never
///   reports below zero);
/// - the uniform conditional;
/// - an avoidance point when every `(s,y)` has an input that cannot produce
///   `y`: the auxiliary letter is then never equal to the output, which
///   keeps the objective positive for every admissible law;
/// - for deterministic channels, an output-matching point that attains the
///   closed-form value `sum_s P_S(s) log2 |reach(s)|`.
pub(crate) fn middle_starts(
    prob: &StrategyProblem,
    cost: Option<(&[Vec<f64>], f64)>,
    lean: bool,
) -> Vec<Vec<Vec<f64>>> {
    let (nu, ns) = (prob.nu(), prob.ch.ns());
    let ch = prob.ch;
    let mut starts = Vec::new();

    // Constant strategy; under a cost cap, the cheapest strategy.
    let u_const = match cost {
        None => 0,
        Some((gamma, _)) => {
            let inputs: Vec<usize> = (0..ns)
                .map(|s| {
                    (0..ch.nx())
                        .min_by(|&a, &b| {
                            let ga = gamma[prob.table.index_of(&constant_inputs(a, ns))][s];
                            let gb = gamma[prob.table.index_of(&constant_inputs(b, ns))][s];
                            ga.total_cmp(&gb)
                        })
                        .unwrap()
                })
                .collect();
            prob.table.index_of(&inputs)
        }
    };
    let mut constant = vec![vec![0.0; nu]; ns];
    for row in &mut constant {
        row[u_const] = 1.0;
    }
    starts.push(constant);

    if !lean || prob.deterministic {
        starts.push(vec![vec![1.0 / nu as f64; nu]; ns]);
    }

    if let Some(avoiders) = avoidance_strategies(ch, &prob.table) {
        let m = avoiders.len() as f64;
        let mut p = vec![vec![0.0; nu]; ns];
        for row in &mut p {
            for &u in &avoiders {
                row[u] = 1.0 / m;
            }
        }
        starts.push(p);
    }

    if prob.deterministic {
        if let Some(p) = output_matching_start(ch, &prob.table) {
            starts.push(p);
        }
    }
    starts
}

fn constant_inputs(x: usize, ns: usize) -> Vec<usize> {
    vec![x; ns]
}

/// Strategies `u_y` that avoid output `y` at every state; distinct ones only.
fn avoidance_strategies(ch: &SupportChannel, table: &StrategyTable) -> Option<Vec<usize>> {
    let mut set = std::collections::BTreeSet::new();
    for y in 0..ch.ny() {
        let mut inputs = Vec::with_capacity(ch.ns());
        for s in 0..ch.ns() {
            inputs.push((0..ch.nx()).find(|&x| !ch.supports(x, s, y))?);
        }
        set.insert(table.index_of(&inputs));
    }
    if set.len() < 2 {
        return None;
    }
    Some(set.into_iter().collect())
}

/// For deterministic channels: one strategy per output label, chosen so the
/// output always equals the label wherever the start assigns mass.
fn output_matching_start(ch: &SupportChannel, table: &StrategyTable) -> Option<Vec<Vec<f64>>> {
    let (ns, ny, nu) = (ch.ns(), ch.ny(), table.nu);
    let mut strategies: Vec<Option<usize>> = vec![None; ny];
    let mut used = std::collections::BTreeSet::new();
    for y in 0..ny {
        if (0..ns).all(|s| ch.reachable_mask(s) & (1 << y) == 0) {
            continue;
        }
        // Filler inputs at states that cannot reach y are varied until the
        // strategy index is distinct from previously assigned labels.
        let mut filler = 0usize;
        let u = loop {
            let mut inputs = Vec::with_capacity(ns);
            for s in 0..ns {
                match (0..ch.nx()).find(|&x| ch.single_output(x, s) == Some(y)) {
                    Some(x) => inputs.push(x),
                    None => inputs.push(filler % ch.nx()),
                }
            }
            let u = table.index_of(&inputs);
            if !used.contains(&u) {
                break u;
            }
            filler += 1;
            if filler > nu {
                return None;
            }
        };
        used.insert(u);
        strategies[y] = Some(u);
    }
    let mut p = vec![vec![0.0; nu]; ns];
    for s in 0..ns {
        let reach = ch.reachable_mask(s);
        let m = reach.count_ones() as f64;
        for y in 0..ny {
            if reach & (1 << y) != 0 {
                p[s][strategies[y].expect("reachable outputs got a strategy")] += 1.0 / m;
            }
        }
    }
    Some(p)
}

/// Projects conditional rows onto their simplices and, when present, the
/// expected-cost halfspace `sum_{s,u} p_s(s) p(u|s) gamma[u][s] <= budget`
/// by bisecting the constraint multiplier.
pub(crate) fn project_middle(
    p_us: &mut [Vec<f64>],
    p_s: &[f64],
    cost: Option<(&[Vec<f64>], f64)>,
    nu: usize,
) {
    let full: u64 = if nu >= 64 { u64::MAX } else { (1 << nu) - 1 };
    let project_rows = |p: &mut [Vec<f64>]| {
        for row in p.iter_mut() {
            project_row_simplex(row, full);
        }
    };
    project_rows(p_us);
    let Some((gamma, budget)) = cost else {
        return;
    };
    let expected = |p: &[Vec<f64>]| -> f64 {
        p.iter()
            .enumerate()
            .map(|(s, row)| {
                p_s[s]
                    * row
                        .iter()
                        .enumerate()
                        .map(|(u, &w)| w * gamma[u][s])
                        .sum::<f64>()
            })
            .sum()
    };
    if expected(p_us) <= budget + 1e-12 {
        return;
    }
    let base = p_us.to_vec();
    let shifted = |theta: f64| -> Vec<Vec<f64>> {
        let mut p = base.clone();
        for (s, row) in p.iter_mut().enumerate() {
            for (u, v) in row.iter_mut().enumerate() {
                *v -= theta * p_s[s] * gamma[u][s];
            }
        }
        project_rows(&mut p);
        p
    };
    let mut hi = 1.0;
    while expected(&shifted(hi)) > budget + 1e-12 && hi < 1e12 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..48 {
        let mid = 0.5 * (lo + hi);
        if expected(&shifted(mid)) > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let projected = shifted(hi);
    p_us.clone_from_slice(&projected);
}

/// Multistart projected ascent of
/// `min_V I(U;Y) - I(U;S)` over the conditional rows.
pub(crate) fn middle_maximize(
    p_s: &[f64],
    prob: &StrategyProblem,
    cost: Option<(&[Vec<f64>], f64)>,
    budget: &MiddleBudget,
    seed: u64,
) -> MiddleOutcome {
    let (nu, ns, ny) = (prob.nu(), prob.ch.ns(), prob.ch.ny());
    let mut rng = SplitMix64::new(seed);
    let mut starts = middle_starts(prob, cost, budget.lean);
    for _ in 0..budget.random_starts {
        let mut p = vec![vec![0.0; nu]; ns];
        for row in &mut p {
            let mut sum = 0.0;
            for v in row.iter_mut() {
                *v = -(1.0 - rng.unit_f64()).ln();
                sum += *v;
            }
            for v in row.iter_mut() {
                *v /= sum;
            }
        }
        starts.push(p);
    }

    let weights = |p_us: &[Vec<f64>]| -> Vec<Vec<f64>> {
        let mut w = vec![vec![0.0; ns]; nu];
        for s in 0..ns {
            for u in 0..nu {
                w[u][s] = p_s[s] * p_us[s][u];
            }
        }
        w
    };

    let mut best: Option<MiddleOutcome> = None;
    for mut p_us in starts {
        project_middle(&mut p_us, p_s, cost, nu);
        let mut inner = inner_minimize(
            &weights(&p_us),
            prob,
            None,
            budget.inner_tol,
            budget.inner_iters,
        );
        let mut value = inner.value - mutual_info_us(p_s, &p_us, nu);
        let mut eta = 0.25;
        for _ in 0..budget.ascent_iters {
            // Ascent direction at the inner minimizer.
            let mut p_u = vec![0.0; nu];
            for s in 0..ns {
                for u in 0..nu {
                    p_u[u] += p_s[s] * p_us[s][u];
                }
            }
            let w = weights(&p_us);
            let (_, p_uy, p_u_in, r) = iuy_of(&w, &inner.v, nu, ns, ny);
            let mut grad = vec![vec![0.0; nu]; ns];
            for s in 0..ns {
                if p_s[s] == 0.0 {
                    continue;
                }
                for u in 0..nu {
                    let mut mean_log = 0.0;
                    for y in 0..ny {
                        if inner.v[u][s][y] > 0.0 {
                            let pyu = if p_u_in[u] > 0.0 {
                                p_uy[u][y] / p_u_in[u]
                            } else {
                                0.0
                            };
                            mean_log += inner.v[u][s][y] * clog2(pyu, r[y]);
                        }
                    }
                    grad[s][u] = p_s[s] * (mean_log - clog2(p_us[s][u], p_u[u]));
                }
            }
            // Line-search trials run the inner solver on a short leash;
            // the cold polish below re-grounds the reported value.
            let trial_iters = budget.inner_iters.min(300);
            let mut improved = false;
            for _ in 0..20 {
                let mut cand: Vec<Vec<f64>> = p_us.clone();
                for s in 0..ns {
                    for u in 0..nu {
                        cand[s][u] += eta * grad[s][u];
                    }
                }
                project_middle(&mut cand, p_s, cost, nu);
                let inner2 = inner_minimize(
                    &weights(&cand),
                    prob,
                    Some(&inner.v),
                    budget.inner_tol * 10.0,
                    trial_iters,
                );
                let value2 = inner2.value - mutual_info_us(p_s, &cand, nu);
                if value2 > value + 1e-9 {
                    p_us = cand;
                    inner = inner2;
                    value = value2;
                    eta = (eta * 1.5).min(64.0);
                    improved = true;
                    break;
                }
                eta *= 0.5;
            }
            if !improved {
                break;
            }
        }
        if best.as_ref().map_or(true, |b| value > b.value) {
            best = Some(MiddleOutcome { value, p_us, inner });
        }
    }
    let mut best = best.expect("at least one middle start");
    // Warm-started chains can leave the inner evaluation above the true
    // minimum; a cold polish solve of the winner keeps the reported value
    // honest (it can only move toward the minimum).
    if !prob.deterministic && budget.ascent_iters > 0 {
        let polish = inner_minimize(
            &weights(&best.p_us),
            prob,
            None,
            budget.inner_tol * 0.1,
            budget.inner_iters * 2,
        );
        if polish.value < best.inner.value {
            best.value -= best.inner.value - polish.value;
            best.inner = polish;
        }
    }
    best
}

/// Candidate state PMFs for the outer grid: compositions of `g` into `ns`
/// parts, plus feasible vertices and budget-boundary pair mixes when a state
/// cost constrains the adversary.
pub(crate) fn outer_candidates(
    ns: usize,
    g: usize,
    constraint: Option<(&[f64], f64)>,
) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    let feasible = |p: &[f64]| match constraint {
        None => true,
        Some((lambda, cap)) => p.iter().zip(lambda).map(|(a, b)| a * b).sum::<f64>() <= cap + 1e-12,
    };
    let mut push = |p: Vec<f64>| {
        if feasible(&p) && !out.iter().any(|q| close(q, &p)) {
            out.push(p);
        }
    };
    let mut composition = vec![0usize; ns];
    fn rec(
        left: usize,
        i: usize,
        g: usize,
        composition: &mut Vec<usize>,
        push: &mut impl FnMut(Vec<f64>),
    ) {
        if i + 1 == composition.len() {
            composition[i] = left;
            push(composition.iter().map(|&c| c as f64 / g as f64).collect());
            return;
        }
        for c in 0..=left {
            composition[i] = c;
            rec(left - c, i + 1, g, composition, push);
        }
    }
    rec(g, 0, g, &mut composition, &mut push);
    if let Some((lambda, cap)) = constraint {
        for i in 0..ns {
            if lambda[i] <= cap {
                let mut p = vec![0.0; ns];
                p[i] = 1.0;
                push(p);
            }
            for j in 0..ns {
                if lambda[i] <= cap && lambda[j] > cap {
                    // Pair mix sitting exactly on the budget boundary.
                    let alpha = (cap - lambda[i]) / (lambda[j] - lambda[i]);
                    let mut p = vec![0.0; ns];
                    p[i] = 1.0 - alpha;
                    p[j] = alpha;
                    push(p);
                }
            }
        }
    }
    out
}

fn close(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-9)
}

/// Local pair-move refinement around `p`, keeping feasibility.
pub(crate) fn refine_candidates(
    p: &[f64],
    step: f64,
    constraint: Option<(&[f64], f64)>,
) -> Vec<Vec<f64>> {
    let ns = p.len();
    let mut out = Vec::new();
    for i in 0..ns {
        for j in 0..ns {
            if i == j || p[i] < step - 1e-12 {
                continue;
            }
            let mut q = p.to_vec();
            q[i] -= step;
            q[j] += step;
            let ok = match constraint {
                None => true,
                Some((lambda, cap)) => {
                    q.iter().zip(lambda).map(|(a, b)| a * b).sum::<f64>() <= cap + 1e-12
                }
            };
            if ok {
                out.push(q);
            }
        }
    }
    out
}

/// Picks a grid resolution whose candidate count stays under `cap`.
pub(crate) fn grid_resolution(ns: usize, preferred: usize, cap: usize) -> usize {
    if ns == 1 {
        return 1;
    }
    let count = |g: usize| -> usize {
        // C(g + ns - 1, ns - 1), saturating.
        let mut c: u128 = 1;
        for i in 0..ns - 1 {
            c = c.saturating_mul((g + ns - 1 - i) as u128) / (i as u128 + 1);
        }
        c.min(usize::MAX as u128) as usize
    };
    let mut g = preferred.max(1);
    while g > 1 && count(g) > cap {
        g = g * 3 / 4;
    }
    g
}
