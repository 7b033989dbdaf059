//! Dense two-phase primal simplex over exact rationals.
//!
//! Sized for the oracle's needs: a handful of variables, a few dozen
//! constraints. Exactness is the point -- feasibility answers certify
//! threshold membership, so floating-point pivoting is not an option.
//! Pivot choice is Dantzig's rule, falling back to Bland's rule after a
//! stretch of degenerate pivots so termination is guaranteed.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

pub(crate) type Rat = BigRational;

pub(crate) fn rat(x: i64) -> Rat {
    BigRational::from_integer(BigInt::from(x))
}

#[derive(Debug)]
pub(crate) enum LpResult {
    Optimal { objective: Rat, x: Vec<Rat> },
    Infeasible,
    Unbounded,
}

/// Degenerate pivots tolerated under Dantzig's rule before switching to
/// Bland's rule.
const DEGENERATE_LIMIT: u32 = 50;

struct Tableau {
    rows: Vec<Vec<Rat>>,
    rhs: Vec<Rat>,
    basis: Vec<usize>,
    /// Columns the entering rule may consider (artificials get banned).
    allowed: Vec<bool>,
}

impl Tableau {
    fn pivot(&mut self, pr: usize, pc: usize) {
        let factor = self.rows[pr][pc].clone();
        for v in self.rows[pr].iter_mut() {
            *v /= factor.clone();
        }
        self.rhs[pr] /= factor;
        for r in 0..self.rows.len() {
            if r == pr || self.rows[r][pc].is_zero() {
                continue;
            }
            let scale = self.rows[r][pc].clone();
            for c in 0..self.rows[r].len() {
                let delta = &scale * &self.rows[pr][c];
                self.rows[r][c] -= delta;
            }
            let delta = &scale * &self.rhs[pr];
            self.rhs[r] -= delta;
        }
        self.basis[pr] = pc;
    }

    /// Reduced costs of `cost` (a minimization objective) at the current
    /// basis: `cost_j - sum_i cost_basis(i) * T[i][j]`.
    fn reduced_costs(&self, cost: &[Rat]) -> Vec<Rat> {
        let ncols = self.rows[0].len();
        let mut reduced = cost.to_vec();
        reduced.resize(ncols, Rat::zero());
        for (i, row) in self.rows.iter().enumerate() {
            let cb = cost.get(self.basis[i]).cloned().unwrap_or_else(Rat::zero);
            if cb.is_zero() {
                continue;
            }
            for (j, v) in row.iter().enumerate() {
                let delta = &cb * v;
                reduced[j] -= delta;
            }
        }
        reduced
    }

    /// Minimizes `cost` from the current basic feasible solution.
    /// Returns `false` if the objective is unbounded below.
    fn minimize(&mut self, cost: &[Rat]) -> bool {
        let mut reduced = self.reduced_costs(cost);
        let mut degenerate_streak = 0u32;
        let mut bland = false;
        loop {
            let entering = if bland {
                (0..reduced.len())
                    .find(|&j| self.allowed[j] && self.basis.iter().all(|&b| b != j) && reduced[j].is_negative())
            } else {
                let mut best: Option<(usize, &Rat)> = None;
                for (j, rc) in reduced.iter().enumerate() {
                    if !self.allowed[j] || !rc.is_negative() {
                        continue;
                    }
                    if best.is_none_or(|(_, r)| rc < r) {
                        best = Some((j, rc));
                    }
                }
                best.map(|(j, _)| j)
            };
            let Some(pc) = entering else {
                return true;
            };
            let mut leaving: Option<(usize, Rat)> = None;
            for r in 0..self.rows.len() {
                if self.rows[r][pc].is_positive() {
                    let ratio = &self.rhs[r] / &self.rows[r][pc];
                    let better = match &leaving {
                        None => true,
                        Some((lr, best)) => {
                            ratio < *best || (ratio == *best && self.basis[r] < self.basis[*lr])
                        }
                    };
                    if better {
                        leaving = Some((r, ratio));
                    }
                }
            }
            let Some((pr, ratio)) = leaving else {
                return false;
            };
            if ratio.is_zero() {
                degenerate_streak += 1;
                if degenerate_streak > DEGENERATE_LIMIT {
                    bland = true;
                }
            } else {
                degenerate_streak = 0;
            }
            self.pivot(pr, pc);
            reduced = self.reduced_costs(cost);
        }
    }

    fn solution(&self, nv: usize) -> Vec<Rat> {
        let mut x = vec![Rat::zero(); nv];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < nv {
                x[b] = self.rhs[i].clone();
            }
        }
        x
    }
}

/// Maximizes `objective . x` subject to `row . x <= rhs` for every
/// constraint and `x >= 0`.
pub(crate) fn maximize(objective: &[Rat], constraints: &[(Vec<Rat>, Rat)]) -> LpResult {
    let nv = objective.len();
    let m = constraints.len();
    let n_slack = m;
    let artificial_rows: Vec<usize> = constraints
        .iter()
        .enumerate()
        .filter(|(_, (_, b))| b.is_negative())
        .map(|(i, _)| i)
        .collect();
    let n_art = artificial_rows.len();
    let ncols = nv + n_slack + n_art;

    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut next_art = 0usize;
    for (i, (coeffs, b)) in constraints.iter().enumerate() {
        assert_eq!(coeffs.len(), nv, "constraint arity mismatch");
        let negate = b.is_negative();
        let mut row = vec![Rat::zero(); ncols];
        for (j, v) in coeffs.iter().enumerate() {
            row[j] = if negate { -v.clone() } else { v.clone() };
        }
        row[nv + i] = if negate { rat(-1) } else { rat(1) };
        if negate {
            let art_col = nv + n_slack + next_art;
            next_art += 1;
            row[art_col] = rat(1);
            basis.push(art_col);
        } else {
            basis.push(nv + i);
        }
        rows.push(row);
        rhs.push(if negate { -b.clone() } else { b.clone() });
    }

    let mut tab = Tableau {
        rows,
        rhs,
        basis,
        allowed: vec![true; ncols],
    };

    if n_art > 0 {
        let mut phase1 = vec![Rat::zero(); ncols];
        for cost in phase1.iter_mut().skip(nv + n_slack) {
            *cost = rat(1);
        }
        let bounded = tab.minimize(&phase1);
        debug_assert!(bounded, "phase 1 objective is bounded below by zero");
        let residual: Rat = tab
            .basis
            .iter()
            .zip(&tab.rhs)
            .filter(|(&b, _)| b >= nv + n_slack)
            .map(|(_, v)| v.clone())
            .sum();
        if residual.is_positive() {
            return LpResult::Infeasible;
        }
        // Drive any degenerate artificial out of the basis where possible;
        // rows that are zero on all structural columns are redundant and
        // can safely keep their zero-valued artificial.
        for r in 0..tab.rows.len() {
            if tab.basis[r] >= nv + n_slack {
                if let Some(pc) = (0..nv + n_slack).find(|&j| !tab.rows[r][j].is_zero()) {
                    tab.pivot(r, pc);
                }
            }
        }
        for c in nv + n_slack..ncols {
            tab.allowed[c] = false;
        }
    }

    let mut phase2 = vec![Rat::zero(); ncols];
    for (j, v) in objective.iter().enumerate() {
        phase2[j] = -v.clone();
    }
    if !tab.minimize(&phase2) {
        return LpResult::Unbounded;
    }
    let x = tab.solution(nv);
    let objective_value = objective
        .iter()
        .zip(&x)
        .map(|(c, v)| c * v)
        .sum();
    LpResult::Optimal {
        objective: objective_value,
        x,
    }
}
