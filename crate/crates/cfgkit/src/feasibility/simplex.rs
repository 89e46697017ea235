//! Phase-one simplex over exact rationals with Bland's anti-cycling rule.
//!
//! Decides whether `Ax {<=,>=,=} b, x >= 0` has a solution and produces a
//! basic feasible point when it does. Everything is `BigRational`; there is
//! no tolerance anywhere.

use num::rational::BigRational;
use num::{Signed, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub coeffs: Vec<BigRational>,
    pub rel: Rel,
    pub rhs: BigRational,
}

/// Returns a nonnegative solution of the system, or `None` when infeasible.
pub fn feasible_point(nvars: usize, mut rows: Vec<Row>) -> Option<Vec<BigRational>> {
    // Normalize right-hand sides to be nonnegative.
    for row in &mut rows {
        if row.rhs.is_negative() {
            for c in &mut row.coeffs {
                *c = -c.clone();
            }
            row.rhs = -row.rhs.clone();
            row.rel = match row.rel {
                Rel::Le => Rel::Ge,
                Rel::Ge => Rel::Le,
                Rel::Eq => Rel::Eq,
            };
        }
    }
    let m = rows.len();
    // Column layout: structural | slack/surplus (one per inequality) |
    // artificial (one per Ge/Eq row) | rhs.
    let num_slack = rows.iter().filter(|r| r.rel != Rel::Eq).count();
    let num_art = rows.iter().filter(|r| r.rel != Rel::Le).count();
    let ncols = nvars + num_slack + num_art;
    let mut tableau = vec![vec![BigRational::zero(); ncols + 1]; m];
    let mut basis = vec![0usize; m];
    let mut art_cols = Vec::with_capacity(num_art);

    let mut next_slack = nvars;
    let mut next_art = nvars + num_slack;
    for (i, row) in rows.iter().enumerate() {
        for (j, c) in row.coeffs.iter().enumerate() {
            tableau[i][j] = c.clone();
        }
        tableau[i][ncols] = row.rhs.clone();
        match row.rel {
            Rel::Le => {
                tableau[i][next_slack] = BigRational::from_integer(1.into());
                basis[i] = next_slack;
                next_slack += 1;
            }
            Rel::Ge => {
                tableau[i][next_slack] = BigRational::from_integer((-1).into());
                next_slack += 1;
                tableau[i][next_art] = BigRational::from_integer(1.into());
                basis[i] = next_art;
                art_cols.push(next_art);
                next_art += 1;
            }
            Rel::Eq => {
                tableau[i][next_art] = BigRational::from_integer(1.into());
                basis[i] = next_art;
                art_cols.push(next_art);
                next_art += 1;
            }
        }
    }

    // Objective: minimize the sum of artificial variables. Expressed over
    // the nonbasic columns, w[j] = sum of T[i][j] over rows with an
    // artificial basic variable; increasing a column with w[j] > 0
    // decreases the objective.
    let first_art = nvars + num_slack;
    let mut wrow = vec![BigRational::zero(); ncols + 1];
    for i in 0..m {
        if basis[i] >= first_art {
            for j in 0..=ncols {
                let t = tableau[i][j].clone();
                wrow[j] += t;
            }
        }
    }
    for &a in &art_cols {
        wrow[a] = BigRational::zero();
    }

    loop {
        // Bland: entering column is the smallest index with a positive
        // objective coefficient; artificial columns never re-enter.
        let entering = (0..first_art).find(|&j| wrow[j].is_positive());
        let Some(col) = entering else { break };
        // Ratio test; ties broken by the smallest basic variable index.
        let mut pivot: Option<(usize, BigRational)> = None;
        for i in 0..m {
            if tableau[i][col].is_positive() {
                let ratio = &tableau[i][ncols] / &tableau[i][col];
                let better = match &pivot {
                    None => true,
                    Some((best_i, best)) => {
                        ratio < *best || (ratio == *best && basis[i] < basis[*best_i])
                    }
                };
                if better {
                    pivot = Some((i, ratio));
                }
            }
        }
        let (prow, _) = pivot.expect("phase-one objective is bounded below");
        let denom = tableau[prow][col].clone();
        for j in 0..=ncols {
            tableau[prow][j] = &tableau[prow][j] / &denom;
        }
        for i in 0..m {
            if i != prow && !tableau[i][col].is_zero() {
                let factor = tableau[i][col].clone();
                for j in 0..=ncols {
                    let delta = &factor * &tableau[prow][j];
                    tableau[i][j] = &tableau[i][j] - &delta;
                }
            }
        }
        if !wrow[col].is_zero() {
            let factor = wrow[col].clone();
            for j in 0..=ncols {
                let delta = &factor * &tableau[prow][j];
                wrow[j] = &wrow[j] - &delta;
            }
        }
        basis[prow] = col;
    }

    if !wrow[ncols].is_zero() {
        return None;
    }
    let mut solution = vec![BigRational::zero(); nvars];
    for i in 0..m {
        if basis[i] < nvars {
            solution[basis[i]] = tableau[i][ncols].clone();
        }
    }
    Some(solution)
}
