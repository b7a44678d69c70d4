//! Inner adversary minimization for stateless channels and the certified
//! outer maximization built on it.
//!
//! For a fixed input PMF `P`, the adversary picks a law `V` absolutely
//! continuous w.r.t. the channel to minimize `I(P;V)`. Writing the mutual
//! information as a KL divergence against an output mixture `r` and
//! minimizing each row under its support constraint gives the equivalent
//! convex program
//!
//! ```text
//! phi(P) = min_r  sum_x P(x) * ( -log2 sum_{y in supp(x)} r(y) )
//! ```
//!
//! which alternating updates solve with a computable Frank-Wolfe optimality
//! gap. `phi` is concave in `P`, so the outer `max_P phi(P)` is solved by a
//! cutting-plane loop whose master problem is a small LP: upper and lower
//! bounds tighten until the requested tolerance and the difference is
//! reported as the optimality gap.

use crate::channel::StatelessChannel;
use crate::error::Error;
use crate::lp::{solve, LinearProgram};
use crate::Result;

/// Floor for output-mixture masses inside logs.
const R_FLOOR: f64 = 1e-300;

/// Result of the inner minimization at a fixed input PMF.
#[derive(Debug, Clone)]
pub struct InnerMin {
    /// `min_V I(P;V)` in bits.
    pub value: f64,
    /// Minimizing law, rows over outputs.
    pub v: Vec<Vec<f64>>,
    /// Output mixture at the optimum.
    pub r: Vec<f64>,
    /// Certified optimality gap in bits.
    pub gap: f64,
    pub iterations: usize,
}

/// Alternating minimization of `I(P;V)` over admissible laws.
pub fn min_inner_mi(p: &[f64], masks: &[u64], ny: usize, tol: f64, max_iter: usize) -> InnerMin {
    let nx = p.len();
    assert_eq!(masks.len(), nx);
    let mut r = vec![1.0 / ny as f64; ny];
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    let ln2 = std::f64::consts::LN_2;
    let mut row_sums = vec![0.0; nx];
    while iterations < max_iter {
        iterations += 1;
        for x in 0..nx {
            row_sums[x] = masked_sum(&r, masks[x]).max(R_FLOOR);
        }
        // Gradient of the objective in r and its Frank-Wolfe gap.
        let mut grad = vec![0.0; ny];
        for x in 0..nx {
            if p[x] == 0.0 {
                continue;
            }
            let c = -p[x] / (ln2 * row_sums[x]);
            for (y, g) in grad.iter_mut().enumerate() {
                if masks[x] & (1 << y) != 0 {
                    *g += c;
                }
            }
        }
        let inner_prod: f64 = grad.iter().zip(&r).map(|(g, ry)| g * ry).sum();
        let min_grad = grad.iter().cloned().fold(f64::INFINITY, f64::min);
        gap = inner_prod - min_grad;
        if gap <= tol {
            break;
        }
        // Exact block update: project r on each row's support, mix back.
        let mut next = vec![0.0; ny];
        for x in 0..nx {
            if p[x] == 0.0 {
                continue;
            }
            for y in 0..ny {
                if masks[x] & (1 << y) != 0 {
                    next[y] += p[x] * r[y] / row_sums[x];
                }
            }
        }
        let total: f64 = next.iter().sum();
        if total <= 0.0 {
            break;
        }
        for v in &mut next {
            *v /= total;
        }
        r = next;
    }
    for x in 0..nx {
        row_sums[x] = masked_sum(&r, masks[x]).max(R_FLOOR);
    }
    let value: f64 = (0..nx)
        .filter(|&x| p[x] > 0.0)
        .map(|x| -p[x] * row_sums[x].log2())
        .sum();
    // The minimizing law restricted and renormalized per row; rows of
    // zero-mass inputs fall back to uniform on their support.
    let v: Vec<Vec<f64>> = (0..nx)
        .map(|x| {
            let sum = masked_sum(&r, masks[x]);
            (0..ny)
                .map(|y| {
                    if masks[x] & (1 << y) == 0 {
                        0.0
                    } else if sum > 0.0 {
                        r[y] / sum
                    } else {
                        1.0 / masks[x].count_ones() as f64
                    }
                })
                .collect()
        })
        .collect();
    InnerMin {
        value: value.max(0.0),
        v,
        r,
        gap,
        iterations,
    }
}

fn masked_sum(r: &[f64], mask: u64) -> f64 {
    r.iter()
        .enumerate()
        .filter(|&(y, _)| mask & (1 << y) != 0)
        .map(|(_, v)| v)
        .sum()
}

/// Largest relative spread, over inputs with mass, of the ratios
/// `V(y|x) / (PV)(y)` across the supported outputs of each row. Zero at a
/// stationary law.
pub fn stationarity_spread(p: &[f64], v: &[Vec<f64>], ny: usize) -> f64 {
    let mut pv = vec![0.0; ny];
    for (x, row) in v.iter().enumerate() {
        for y in 0..ny {
            pv[y] += p[x] * row[y];
        }
    }
    let mut worst: f64 = 0.0;
    for (x, row) in v.iter().enumerate() {
        if p[x] == 0.0 {
            continue;
        }
        let ratios: Vec<f64> = (0..ny)
            .filter(|&y| row[y] > 0.0 && pv[y] > 0.0)
            .map(|y| row[y] / pv[y])
            .collect();
        if ratios.len() < 2 {
            continue;
        }
        let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        worst = worst.max((hi - lo) / mean);
    }
    worst
}

/// Result of the cutting-plane maximization.
#[derive(Debug, Clone)]
pub struct MaxMinMi {
    /// Best certified value of `max_P min_V I(P;V)` in bits.
    pub value: f64,
    pub p: Vec<f64>,
    pub inner: InnerMin,
    /// Upper bound minus best value.
    pub gap: f64,
    pub cuts: usize,
}

/// Maximizes `phi(P) = min_V I(P;V)` over the simplex, optionally subject to
/// `cost . P <= budget`.
pub fn max_min_mi(
    masks: &[u64],
    ny: usize,
    constraint: Option<(&[f64], f64)>,
    tol: f64,
    max_cuts: usize,
) -> Result<MaxMinMi> {
    let nx = masks.len();
    let inner_tol = (tol * 1e-3).max(1e-12);
    let inner_iters = 200_000;
    let mix = 1e-9;

    let start = feasible_start(nx, constraint)?;
    let evaluate = |p: &[f64]| -> (Vec<f64>, InnerMin) {
        // Full-support mix keeps every cut coefficient finite.
        let p_mixed: Vec<f64> = p
            .iter()
            .map(|&v| (1.0 - mix) * v + mix / nx as f64)
            .collect();
        let inner = min_inner_mi(&p_mixed, masks, ny, inner_tol, inner_iters);
        (p_mixed, inner)
    };

    let (p0, inner0) = evaluate(&start);
    let mut best_value = inner0.value;
    let mut best_p = p0;
    let mut best_inner = inner0.clone();
    let mut cuts: Vec<Vec<f64>> = vec![cut_from(&inner0.r, masks)];
    let mut upper = f64::INFINITY;

    for _ in 0..max_cuts {
        let master = solve_master(&cuts, nx, constraint)?;
        upper = master.value;
        if upper - best_value <= tol {
            break;
        }
        let (p_mixed, inner) = evaluate(&master.p);
        if inner.value > best_value {
            best_value = inner.value;
            best_p = p_mixed;
            best_inner = inner.clone();
        }
        cuts.push(cut_from(&inner.r, masks));
    }
    Ok(MaxMinMi {
        value: best_value,
        p: best_p,
        gap: (upper - best_value).max(best_inner.gap),
        inner: best_inner,
        cuts: cuts.len(),
    })
}

fn cut_from(r: &[f64], masks: &[u64]) -> Vec<f64> {
    masks
        .iter()
        .map(|&m| -masked_sum(r, m).max(R_FLOOR).log2())
        .collect()
}

struct Master {
    value: f64,
    p: Vec<f64>,
}

/// Master LP: maximize `t` over the (optionally cost-capped) simplex subject
/// to every cut `t <= c_j . P`. All cuts are nonnegative, so `t >= 0`.
fn solve_master(cuts: &[Vec<f64>], nx: usize, constraint: Option<(&[f64], f64)>) -> Result<Master> {
    let n = nx + 1;
    let mut c = vec![0.0; n];
    c[nx] = -1.0;
    let mut lp = LinearProgram {
        c,
        ..Default::default()
    };
    for cut in cuts {
        let mut row: Vec<f64> = cut.iter().map(|c| -c).collect();
        row.push(1.0);
        lp.a_ub.push(row);
        lp.b_ub.push(0.0);
    }
    if let Some((cost, budget)) = constraint {
        let mut row = cost.to_vec();
        row.push(0.0);
        lp.a_ub.push(row);
        lp.b_ub.push(budget);
    }
    let mut eq = vec![1.0; nx];
    eq.push(0.0);
    lp.a_eq.push(eq);
    lp.b_eq.push(1.0);
    let sol = solve(&lp)?;
    Ok(Master {
        value: -sol.value,
        p: sol.x[..nx].to_vec(),
    })
}

fn feasible_start(nx: usize, constraint: Option<(&[f64], f64)>) -> Result<Vec<f64>> {
    let uniform = vec![1.0 / nx as f64; nx];
    let Some((cost, budget)) = constraint else {
        return Ok(uniform);
    };
    let mean: f64 = cost.iter().sum::<f64>() / nx as f64;
    if mean <= budget {
        return Ok(uniform);
    }
    let (argmin, min) = cost
        .iter()
        .cloned()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty cost vector");
    if min > budget {
        return Err(Error::InfeasibleBudget { budget, min });
    }
    // Mix the cheapest vertex toward uniform up to the budget.
    let alpha = ((budget - min) / (mean - min)).clamp(0.0, 1.0);
    let mut p = vec![alpha / nx as f64; nx];
    p[argmin] += 1.0 - alpha;
    Ok(p)
}

/// Convenience wrapper taking a stateless channel.
pub fn max_min_mi_channel(
    ch: &StatelessChannel,
    constraint: Option<(&[f64], f64)>,
    tol: f64,
    max_cuts: usize,
) -> Result<MaxMinMi> {
    let masks: Vec<u64> = (0..ch.nx).map(|x| ch.row_mask(x)).collect();
    max_min_mi(&masks, ch.ny, constraint, tol, max_cuts)
}


/// Result of the conditional cutting-plane maximization.
#[derive(Debug, Clone)]
pub struct CondMaxMin {
    /// Best certified value of `max_{P(x|s)} min_V I(X,S;Y)` in bits.
    pub value: f64,
    /// Rows `P(x|s)` indexed by state.
    pub rows: Vec<Vec<f64>>,
    pub inner: InnerMin,
    pub gap: f64,
}

/// Maximizes `min_V I(X,S;Y)` over conditionals `P(x|s)` at a fixed state
/// PMF. The pair `(x,s)` acts as a compound input with index `s*nx + x`, so
/// the inner problem is the stateless one and the objective stays concave in
/// the conditional rows; the master problem is again a small LP.
pub fn max_min_mi_conditional(
    pair_masks: &[u64],
    nx: usize,
    ns: usize,
    ny: usize,
    p_s: &[f64],
    tol: f64,
    max_cuts: usize,
) -> Result<CondMaxMin> {
    assert_eq!(pair_masks.len(), nx * ns);
    let inner_tol = (tol * 1e-3).max(1e-12);
    let mix = 1e-9;
    let joint = |rows: &[Vec<f64>]| -> Vec<f64> {
        let mut p = vec![0.0; nx * ns];
        for s in 0..ns {
            for x in 0..nx {
                p[s * nx + x] = p_s[s] * rows[s][x];
            }
        }
        p
    };
    let evaluate = |rows: &[Vec<f64>]| -> (Vec<Vec<f64>>, InnerMin) {
        let mixed: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&v| (1.0 - mix) * v + mix / nx as f64)
                    .collect()
            })
            .collect();
        let inner = min_inner_mi(&joint(&mixed), pair_masks, ny, inner_tol, 200_000);
        (mixed, inner)
    };

    let uniform = vec![vec![1.0 / nx as f64; nx]; ns];
    let (rows0, inner0) = evaluate(&uniform);
    let mut best_value = inner0.value;
    let mut best_rows = rows0;
    let mut best_inner = inner0.clone();
    let mut cuts: Vec<Vec<f64>> = vec![cut_from(&inner0.r, pair_masks)];
    let mut upper = f64::INFINITY;

    for _ in 0..max_cuts {
        let master = solve_cond_master(&cuts, nx, ns, p_s)?;
        upper = master.value;
        if upper - best_value <= tol {
            break;
        }
        let (rows, inner) = evaluate(&master.rows);
        if inner.value > best_value {
            best_value = inner.value;
            best_rows = rows;
            best_inner = inner.clone();
        }
        cuts.push(cut_from(&inner.r, pair_masks));
    }
    Ok(CondMaxMin {
        value: best_value,
        rows: best_rows,
        gap: (upper - best_value).max(best_inner.gap),
        inner: best_inner,
    })
}

struct CondMaster {
    value: f64,
    rows: Vec<Vec<f64>>,
}

fn solve_cond_master(cuts: &[Vec<f64>], nx: usize, ns: usize, p_s: &[f64]) -> Result<CondMaster> {
    let n = nx * ns + 1;
    let t = nx * ns;
    let mut c = vec![0.0; n];
    c[t] = -1.0;
    let mut lp = LinearProgram {
        c,
        ..Default::default()
    };
    for cut in cuts {
        let mut row = vec![0.0; n];
        for s in 0..ns {
            for x in 0..nx {
                row[s * nx + x] = -p_s[s] * cut[s * nx + x];
            }
        }
        row[t] = 1.0;
        lp.a_ub.push(row);
        lp.b_ub.push(0.0);
    }
    for s in 0..ns {
        let mut eq = vec![0.0; n];
        for x in 0..nx {
            eq[s * nx + x] = 1.0;
        }
        lp.a_eq.push(eq);
        lp.b_eq.push(1.0);
    }
    let sol = solve(&lp)?;
    let rows = (0..ns)
        .map(|s| sol.x[s * nx..(s + 1) * nx].to_vec())
        .collect();
    Ok(CondMaster {
        value: -sol.value,
        rows,
    })
}
