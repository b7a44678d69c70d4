//! Small dense linear programming: a two-phase primal simplex method and an
//! exhaustive vertex enumerator for minimax problems over the probability
//! simplex.
//!
//! Both solvers are deterministic. Vertex enumeration is exact up to f64
//! arithmetic and is the default route for small alphabets; the simplex
//! method (Bland's rule, so it cannot cycle) covers everything larger and
//! doubles as an independent second route in the duality tests.

use crate::error::Error;
use crate::Result;

/// A linear program in the form
///
/// ```text
/// minimize    c·x
/// subject to  a_ub · x <= b_ub
///             a_eq · x == b_eq
///             x >= 0
/// ```
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub c: Vec<f64>,
    pub a_ub: Vec<Vec<f64>>,
    pub b_ub: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
}

/// Optimal value and point of a solved LP.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub value: f64,
    pub x: Vec<f64>,
}

const EPS: f64 = 1e-10;

/// Two-phase primal simplex with Bland's anti-cycling rule.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    let n = lp.c.len();
    let m_ub = lp.a_ub.len();
    let m_eq = lp.a_eq.len();
    let m = m_ub + m_eq;

    // Rows with negative right-hand side are negated so phase 1 can start
    // from the artificial basis.
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut rhs: Vec<f64> = Vec::with_capacity(m);
    let mut slack_sign: Vec<f64> = Vec::with_capacity(m_ub);
    for (i, a) in lp.a_ub.iter().enumerate() {
        assert_eq!(a.len(), n);
        if lp.b_ub[i] >= 0.0 {
            rows.push(a.clone());
            rhs.push(lp.b_ub[i]);
            slack_sign.push(1.0);
        } else {
            rows.push(a.iter().map(|v| -v).collect());
            rhs.push(-lp.b_ub[i]);
            slack_sign.push(-1.0);
        }
    }
    for (i, a) in lp.a_eq.iter().enumerate() {
        assert_eq!(a.len(), n);
        if lp.b_eq[i] >= 0.0 {
            rows.push(a.clone());
            rhs.push(lp.b_eq[i]);
        } else {
            rows.push(a.iter().map(|v| -v).collect());
            rhs.push(-lp.b_eq[i]);
        }
    }

    // Tableau columns: n structural, m_ub slacks, m artificials.
    let total = n + m_ub + m;
    let mut t = vec![vec![0.0; total + 1]; m];
    for i in 0..m {
        for j in 0..n {
            t[i][j] = rows[i][j];
        }
        t[i][total] = rhs[i];
    }
    for i in 0..m_ub {
        t[i][n + i] = slack_sign[i];
    }
    for i in 0..m {
        t[i][n + m_ub + i] = 1.0;
    }
    let mut basis: Vec<usize> = (0..m).map(|i| n + m_ub + i).collect();

    // Phase 1: minimize the sum of artificials.
    let mut obj = vec![0.0; total + 1];
    for j in n + m_ub..total {
        obj[j] = 1.0;
    }
    for i in 0..m {
        for j in 0..=total {
            obj[j] -= t[i][j];
        }
    }
    run_simplex(&mut t, &mut obj, &mut basis, total, |j| j < total)?;
    if -obj[total] > 1e-7 {
        return Err(Error::LpFailure("infeasible program".into()));
    }
    // Drive any leftover artificial out of the basis if possible.
    for i in 0..m {
        if basis[i] >= n + m_ub {
            if let Some(j) = (0..n + m_ub).find(|&j| t[i][j].abs() > EPS) {
                pivot(&mut t, &mut obj, &mut basis, i, j, total);
            }
        }
    }

    // Phase 2: original objective, artificial columns barred.
    let mut obj2 = vec![0.0; total + 1];
    for j in 0..n {
        obj2[j] = lp.c[j];
    }
    for i in 0..m {
        let b = basis[i];
        if obj2[b].abs() > 0.0 {
            let coef = obj2[b];
            for j in 0..=total {
                obj2[j] -= coef * t[i][j];
            }
        }
    }
    run_simplex(&mut t, &mut obj2, &mut basis, total, |j| j < n + m_ub)?;

    let mut x = vec![0.0; n];
    for i in 0..m {
        if basis[i] < n {
            x[basis[i]] = t[i][total];
        }
    }
    let value = lp.c.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution { value, x })
}

fn run_simplex(
    t: &mut [Vec<f64>],
    obj: &mut [f64],
    basis: &mut [usize],
    total: usize,
    allowed: impl Fn(usize) -> bool,
) -> Result<()> {
    let m = t.len();
    for _ in 0..200_000 {
        // Bland: entering variable is the lowest-index column with a
        // negative reduced cost.
        let Some(enter) = (0..total).find(|&j| allowed(j) && obj[j] < -EPS) else {
            return Ok(());
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            if t[i][enter] > EPS {
                let ratio = t[i][total] / t[i][enter];
                if ratio < best - EPS
                    || (ratio < best + EPS && basis[i] < basis[leave.unwrap_or(i)])
                {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(row) = leave else {
            return Err(Error::LpFailure("unbounded program".into()));
        };
        pivot(t, obj, basis, row, enter, total);
    }
    Err(Error::LpFailure("simplex iteration cap reached".into()))
}

fn pivot(
    t: &mut [Vec<f64>],
    obj: &mut [f64],
    basis: &mut [usize],
    row: usize,
    col: usize,
    total: usize,
) {
    let m = t.len();
    let piv = t[row][col];
    for j in 0..=total {
        t[row][j] /= piv;
    }
    for i in 0..m {
        if i != row && t[i][col].abs() > 0.0 {
            let f = t[i][col];
            for j in 0..=total {
                t[i][j] -= f * t[row][j];
            }
        }
    }
    if obj[col].abs() > 0.0 {
        let f = obj[col];
        for j in 0..=total {
            obj[j] -= f * t[row][j];
        }
    }
    basis[row] = col;
}

/// Solves `min over simplex points p of max_j rows[j]·p`, optionally subject
/// to extra constraints `g·p <= bound`, by enumerating basic feasible points
/// of the epigraph polytope.
///
/// Every vertex is the solution of `dim` active constraints picked from the
/// row bounds, the sign constraints, and the extras, together with the
/// simplex equality. Suitable for small dimensions only; the caller gates on
/// size.
pub fn minimax_by_vertex_enumeration(
    rows: &[Vec<f64>],
    dim: usize,
    extra_le: &[(Vec<f64>, f64)],
) -> Result<LpSolution> {
    assert!(rows.iter().all(|r| r.len() == dim));
    // Constraint pool in (p, t) space, each as (coeffs over p, coeff of t, rhs):
    //   rows[j]·p - t <= 0, -p_i <= 0, extras.
    let mut pool: Vec<(Vec<f64>, f64, f64)> = Vec::new();
    for r in rows {
        pool.push((r.clone(), -1.0, 0.0));
    }
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = -1.0;
        pool.push((e, 0.0, 0.0));
    }
    for (g, b) in extra_le {
        pool.push((g.clone(), 0.0, *b));
    }

    let mut best: Option<LpSolution> = None;
    let k = pool.len();
    let mut chosen = vec![0usize; dim];
    enumerate_subsets(k, dim, &mut chosen, 0, 0, &mut |subset| {
        // Active set: the simplex equality plus `dim` constraints from the
        // pool; solve the (dim+1)-square system for (p, t).
        let mut a = vec![vec![0.0; dim + 1]; dim + 1];
        let mut b = vec![0.0; dim + 1];
        for (r, &ci) in subset.iter().enumerate() {
            let (g, tc, rhs) = &pool[ci];
            a[r][..dim].copy_from_slice(g);
            a[r][dim] = *tc;
            b[r] = *rhs;
        }
        for j in 0..dim {
            a[dim][j] = 1.0;
        }
        b[dim] = 1.0;
        let Some(sol) = solve_dense(&a, &b) else {
            return;
        };
        let (p, t) = (&sol[..dim], sol[dim]);
        if p.iter().any(|&v| v < -1e-9) {
            return;
        }
        for (g, tc, rhs) in &pool {
            let lhs: f64 = g.iter().zip(p).map(|(gi, pi)| gi * pi).sum::<f64>() + tc * t;
            if lhs > rhs + 1e-9 {
                return;
            }
        }
        if best.as_ref().map_or(true, |s| t < s.value) {
            best = Some(LpSolution {
                value: t,
                x: p.to_vec(),
            });
        }
    });
    best.ok_or_else(|| Error::LpFailure("no feasible vertex found".into()))
}

fn enumerate_subsets(
    n: usize,
    k: usize,
    chosen: &mut Vec<usize>,
    depth: usize,
    start: usize,
    f: &mut impl FnMut(&[usize]),
) {
    if depth == k {
        f(chosen);
        return;
    }
    for i in start..n {
        chosen[depth] = i;
        enumerate_subsets(n, k, chosen, depth + 1, i + 1, f);
    }
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_dense(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    for col in 0..n {
        let (piv, mag) = (col..n)
            .map(|r| (r, m[r][col].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        if mag < 1e-11 {
            return None;
        }
        m.swap(col, piv);
        for r in 0..n {
            if r != col && m[r][col] != 0.0 {
                let f = m[r][col] / m[col][col];
                for j in col..=n {
                    m[r][j] -= f * m[col][j];
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

/// Value and a maximin strategy of `max over simplex q of min_i cols[i]·q`.
pub fn maximin_by_vertex_enumeration(
    cols: &[Vec<f64>],
    dim: usize,
    extra_le: &[(Vec<f64>, f64)],
) -> Result<LpSolution> {
    let negated: Vec<Vec<f64>> = cols
        .iter()
        .map(|c| c.iter().map(|v| -v).collect())
        .collect();
    let sol = minimax_by_vertex_enumeration(&negated, dim, extra_le)?;
    Ok(LpSolution {
        value: -sol.value,
        x: sol.x,
    })
}

/// Simplex-method route for the same minimax problem, used above the vertex
/// enumeration size gate and as the independent second route in tests.
pub fn minimax_by_simplex(
    rows: &[Vec<f64>],
    dim: usize,
    extra_le: &[(Vec<f64>, f64)],
) -> Result<LpSolution> {
    // Variables (p, t) with t split off as the last structural variable;
    // t >= 0 is safe for all uses here (game values of nonnegative matrices).
    let n = dim + 1;
    let mut c = vec![0.0; n];
    c[dim] = 1.0;
    let mut lp = LinearProgram {
        c,
        ..Default::default()
    };
    for r in rows {
        let mut a = r.clone();
        a.push(-1.0);
        lp.a_ub.push(a);
        lp.b_ub.push(0.0);
    }
    for (g, b) in extra_le {
        let mut a = g.clone();
        a.push(0.0);
        lp.a_ub.push(a);
        lp.b_ub.push(*b);
    }
    let mut eq = vec![1.0; dim];
    eq.push(0.0);
    lp.a_eq.push(eq);
    lp.b_eq.push(1.0);
    let sol = solve(&lp)?;
    Ok(LpSolution {
        value: sol.value,
        x: sol.x[..dim].to_vec(),
    })
}


/// Simplex-method route for `max over simplex q of min_i cols[i]·q`; the
/// value must be nonnegative, which holds for the games solved here.
pub fn maximin_by_simplex(cols: &[Vec<f64>], dim: usize) -> Result<LpSolution> {
    let n = dim + 1;
    let mut c = vec![0.0; n];
    c[dim] = -1.0;
    let mut lp = LinearProgram {
        c,
        ..Default::default()
    };
    for col in cols {
        // t - col·q <= 0
        let mut a: Vec<f64> = col.iter().map(|v| -v).collect();
        a.push(1.0);
        lp.a_ub.push(a);
        lp.b_ub.push(0.0);
    }
    let mut eq = vec![1.0; dim];
    eq.push(0.0);
    lp.a_eq.push(eq);
    lp.b_eq.push(1.0);
    let sol = solve(&lp)?;
    Ok(LpSolution {
        value: -sol.value,
        x: sol.x[..dim].to_vec(),
    })
}
