//! Dense two-phase simplex with Bland's rule.
//!
//! minimize c.x subject to A_ub x <= b_ub, A_eq x = b_eq, x >= 0.

use crate::error::{Error, Result};

const EPS: f64 = 1e-11;
const MAX_PIVOTS: usize = 200_000;

#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    pub c: Vec<f64>,
    pub a_ub: Vec<Vec<f64>>,
    pub b_ub: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

struct Tableau {
    rows: Vec<Vec<f64>>, // each row: coefficients then rhs
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, col: usize, cost: &mut [f64]) {
        let p = self.rows[r][col];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                let f = row[col];
                if f != 0.0 {
                    for (v, pv) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
        let f = cost[col];
        if f != 0.0 {
            for (v, pv) in cost.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
        self.basis[r] = col;
    }

    /// Runs simplex iterations on the reduced-cost row `cost` (last entry is
    /// minus the objective) over the columns `allowed`.
    fn optimize(&mut self, cost: &mut [f64], allowed: usize) -> Result<()> {
        for _ in 0..MAX_PIVOTS {
            let entering = (0..allowed).find(|&j| cost[j] < -EPS);
            let Some(col) = entering else {
                return Ok(());
            };
            let mut best: Option<(f64, usize, usize)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[col];
                if a > EPS {
                    let ratio = row[self.ncols] / a;
                    let better = match best {
                        None => true,
                        Some((br, _, bb)) => {
                            ratio < br - EPS || (ratio <= br + EPS && self.basis[i] < bb)
                        }
                    };
                    if better {
                        best = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            let Some((_, r, _)) = best else {
                return Err(Error::LinearProgram("unbounded".into()));
            };
            self.pivot(r, col, cost);
        }
        Err(Error::LinearProgram("pivot limit reached".into()))
    }
}

pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    let n = lp.c.len();
    let m_ub = lp.a_ub.len();
    let m_eq = lp.a_eq.len();
    if lp.b_ub.len() != m_ub || lp.b_eq.len() != m_eq {
        return Err(Error::LinearProgram("constraint/rhs length mismatch".into()));
    }
    if lp.a_ub.iter().chain(&lp.a_eq).any(|r| r.len() != n) {
        return Err(Error::LinearProgram("row length mismatch".into()));
    }
    let m = m_ub + m_eq;
    // Columns: x (n), slacks (m_ub), artificials (one per row that needs it).
    let mut needs_art = vec![false; m];
    let mut raw: Vec<(Vec<f64>, f64, Option<f64>)> = Vec::with_capacity(m);
    for i in 0..m_ub {
        let (mut a, mut b, mut s) = (lp.a_ub[i].clone(), lp.b_ub[i], 1.0);
        if b < 0.0 {
            a.iter_mut().for_each(|v| *v = -*v);
            b = -b;
            s = -1.0;
            needs_art[i] = true;
        }
        raw.push((a, b, Some(s)));
    }
    for i in 0..m_eq {
        let (mut a, mut b) = (lp.a_eq[i].clone(), lp.b_eq[i]);
        if b < 0.0 {
            a.iter_mut().for_each(|v| *v = -*v);
            b = -b;
        }
        needs_art[m_ub + i] = true;
        raw.push((a, b, None));
    }
    let n_art = needs_art.iter().filter(|&&v| v).count();
    let ncols = n + m_ub + n_art;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut art = n + m_ub;
    for (i, (a, b, s)) in raw.into_iter().enumerate() {
        let mut row = vec![0.0; ncols + 1];
        row[..n].copy_from_slice(&a);
        if let Some(s) = s {
            row[n + i] = s;
        }
        row[ncols] = b;
        if needs_art[i] {
            row[art] = 1.0;
            basis.push(art);
            art += 1;
        } else {
            basis.push(n + i);
        }
        rows.push(row);
    }
    let mut t = Tableau { rows, basis, ncols };

    // Phase 1: minimize the sum of artificials.
    let mut cost = vec![0.0; ncols + 1];
    for j in n + m_ub..ncols {
        cost[j] = 1.0;
    }
    for (i, row) in t.rows.iter().enumerate() {
        if t.basis[i] >= n + m_ub {
            for (c, v) in cost.iter_mut().zip(row) {
                *c -= v;
            }
        }
    }
    t.optimize(&mut cost, ncols)?;
    let infeas = -cost[ncols];
    if infeas > 1e-8 {
        return Err(Error::LinearProgram(format!("infeasible (phase 1 residual {infeas:e})")));
    }
    // Drive remaining artificials out of the basis or drop redundant rows.
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n + m_ub {
            let col = (0..n + m_ub).find(|&j| t.rows[i][j].abs() > 1e-9);
            match col {
                Some(j) => {
                    t.pivot(i, j, &mut cost);
                    i += 1;
                }
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }
    // Phase 2 on the original columns.
    let keep = n + m_ub;
    for row in t.rows.iter_mut() {
        let rhs = row[ncols];
        row.truncate(keep);
        row.push(rhs);
    }
    t.ncols = keep;
    let mut cost = vec![0.0; keep + 1];
    cost[..n].copy_from_slice(&lp.c);
    for (i, row) in t.rows.iter().enumerate() {
        let cb = if t.basis[i] < n { lp.c[t.basis[i]] } else { 0.0 };
        if cb != 0.0 {
            for (c, v) in cost.iter_mut().zip(row) {
                *c -= cb * v;
            }
        }
    }
    t.optimize(&mut cost, keep)?;
    let mut x = vec![0.0; n];
    for (i, row) in t.rows.iter().enumerate() {
        if t.basis[i] < n {
            x[t.basis[i]] = row[keep];
        }
    }
    let objective = lp.c.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution { x, objective })
}

/// Chebyshev center in L1 of a set of distributions on a common support:
/// min over p in the simplex of max_i ||p - q_i||_1. Returns (radius, p).
pub fn chebyshev_center_l1(dists: &[Vec<f64>]) -> Result<(f64, Vec<f64>)> {
    if dists.is_empty() {
        return Err(Error::InvalidArgument("no distributions".into()));
    }
    let m = dists[0].len();
    if dists.iter().any(|d| d.len() != m) {
        return Err(Error::DimensionMismatch("support sizes differ".into()));
    }
    let mut uniq: Vec<&Vec<f64>> = Vec::new();
    for d in dists {
        if !uniq.iter().any(|u| u.iter().zip(d).all(|(a, b)| (a - b).abs() <= 1e-15)) {
            uniq.push(d);
        }
    }
    let k = uniq.len();
    let nvars = m + k * m + 1;
    if (2 * k * m + k) * nvars > 60_000_000 {
        return Err(Error::BudgetExceeded(format!("Chebyshev LP with {k} points on {m} outcomes")));
    }
    let t_idx = m + k * m;
    let e = |i: usize, j: usize| m + i * m + j;
    let mut lp = LinearProgram {
        c: vec![0.0; nvars],
        ..Default::default()
    };
    lp.c[t_idx] = 1.0;
    for (i, q) in uniq.iter().enumerate() {
        for j in 0..m {
            let mut r = vec![0.0; nvars];
            r[j] = 1.0;
            r[e(i, j)] = -1.0;
            lp.a_ub.push(r);
            lp.b_ub.push(q[j]);
            let mut r = vec![0.0; nvars];
            r[j] = -1.0;
            r[e(i, j)] = -1.0;
            lp.a_ub.push(r);
            lp.b_ub.push(-q[j]);
        }
        let mut r = vec![0.0; nvars];
        for j in 0..m {
            r[e(i, j)] = 1.0;
        }
        r[t_idx] = -1.0;
        lp.a_ub.push(r);
        lp.b_ub.push(0.0);
    }
    let mut r = vec![0.0; nvars];
    r[..m].iter_mut().for_each(|v| *v = 1.0);
    lp.a_eq.push(r);
    lp.b_eq.push(1.0);
    let sol = solve(&lp)?;
    Ok((sol.objective.max(0.0), sol.x[..m].to_vec()))
}
