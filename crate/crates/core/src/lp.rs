//! Dense two-phase simplex method with Bland's anti-cycling rule.
//!
//! The solver is generic over the scalar field: over [`Q`] every pivot is exact
//! and the optimal value is a certified rational; over `f64` the same pivoting
//! sequence runs with a small sign tolerance.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::Q;

pub trait LpField:
    Clone + Debug + Send + Sync + Zero + One + PartialOrd + Neg<Output = Self>
where
    for<'a> &'a Self: Add<&'a Self, Output = Self>
        + Sub<&'a Self, Output = Self>
        + Mul<&'a Self, Output = Self>
        + Div<&'a Self, Output = Self>,
{
    fn is_pos(&self) -> bool;
    fn is_neg(&self) -> bool;
    fn is_nonzero(&self) -> bool {
        self.is_pos() || self.is_neg()
    }
}

impl LpField for Q {
    fn is_pos(&self) -> bool {
        self.is_positive()
    }
    fn is_neg(&self) -> bool {
        self.is_negative()
    }
}

const F64_TOL: f64 = 1e-11;

impl LpField for f64 {
    fn is_pos(&self) -> bool {
        *self > F64_TOL
    }
    fn is_neg(&self) -> bool {
        *self < -F64_TOL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct LinearConstraint<T> {
    pub coeffs: Vec<T>,
    pub relation: Relation,
    pub rhs: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarBound {
    Free,
    NonNegative,
}

/// `minimize objective · x` subject to the constraints and per-variable bounds.
#[derive(Debug, Clone)]
pub struct LinearProgram<T> {
    pub objective: Vec<T>,
    pub constraints: Vec<LinearConstraint<T>>,
    pub bounds: Vec<VarBound>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    pub point: Option<Vec<T>>,
    pub value: Option<T>,
    pub pivots: usize,
}

impl<T: LpField> LinearProgram<T>
where
    for<'a> &'a T: Add<&'a T, Output = T>
        + Sub<&'a T, Output = T>
        + Mul<&'a T, Output = T>
        + Div<&'a T, Output = T>,
{
    /// New program with all variables free.
    pub fn new(objective: Vec<T>) -> Self {
        let n = objective.len();
        Self {
            objective,
            constraints: Vec::new(),
            bounds: vec![VarBound::Free; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn nonnegative(mut self) -> Self {
        self.bounds = vec![VarBound::NonNegative; self.num_vars()];
        self
    }

    pub fn constrain(&mut self, coeffs: Vec<T>, relation: Relation, rhs: T) {
        debug_assert_eq!(coeffs.len(), self.num_vars());
        self.constraints.push(LinearConstraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn solve(&self) -> LpSolution<T> {
        lp_solve(self)
    }
}

struct Tableau<T> {
    rows: Vec<Vec<T>>,
    obj: Vec<T>,
    basis: Vec<usize>,
    pivots: usize,
}

impl<T: LpField> Tableau<T>
where
    for<'a> &'a T: Add<&'a T, Output = T>
        + Sub<&'a T, Output = T>
        + Mul<&'a T, Output = T>
        + Div<&'a T, Output = T>,
{
    fn rhs_col(&self) -> usize {
        self.obj.len() - 1
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = &T::one() / &self.rows[r][c];
        for x in self.rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r && row[c].is_nonzero() {
                let f = row[c].clone();
                for (x, p) in row.iter_mut().zip(&prow) {
                    if p.is_nonzero() {
                        *x = &*x - &(&f * p);
                    }
                }
                row[c] = T::zero();
            }
        }
        if self.obj[c].is_nonzero() {
            let f = self.obj[c].clone();
            for (x, p) in self.obj.iter_mut().zip(&prow) {
                if p.is_nonzero() {
                    *x = &*x - &(&f * p);
                }
            }
            self.obj[c] = T::zero();
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Runs Bland pivots; `false` if unbounded.
    fn run(&mut self, allowed: &[bool]) -> bool {
        let rhs = self.rhs_col();
        loop {
            let Some(enter) = (0..rhs).find(|&j| allowed[j] && self.obj[j].is_neg()) else {
                return true;
            };
            let mut leave: Option<(usize, T)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[enter].is_pos() {
                    let ratio = &row[rhs] / &row[enter];
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < *lr
                                || (!(&ratio - lr).is_nonzero() && self.basis[i] < self.basis[*li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return false,
            }
        }
    }
}

/// Solves a linear program. Infeasibility and unboundedness are reported
/// through [`LpStatus`], never as errors.
pub fn lp_solve<T: LpField>(lp: &LinearProgram<T>) -> LpSolution<T>
where
    for<'a> &'a T: Add<&'a T, Output = T>
        + Sub<&'a T, Output = T>
        + Mul<&'a T, Output = T>
        + Div<&'a T, Output = T>,
{
    let n = lp.num_vars();
    // structural column layout: each free variable occupies (x+, x-)
    let mut col_of = Vec::with_capacity(n);
    let mut ncols = 0;
    for b in &lp.bounds {
        col_of.push(ncols);
        ncols += match b {
            VarBound::Free => 2,
            VarBound::NonNegative => 1,
        };
    }
    let n_struct = ncols;

    let m = lp.constraints.len();
    let mut rows_struct: Vec<(Vec<T>, Relation, T)> = Vec::with_capacity(m);
    for c in &lp.constraints {
        let mut row = vec![T::zero(); n_struct];
        for (v, a) in c.coeffs.iter().enumerate() {
            row[col_of[v]] = a.clone();
            if lp.bounds[v] == VarBound::Free {
                row[col_of[v] + 1] = -a.clone();
            }
        }
        // zero-rhs `>=` rows are negated too, so their slack can start basic
        let flip = c.rhs.is_neg() || (!c.rhs.is_nonzero() && c.relation == Relation::Ge);
        let (row, rel, rhs) = if flip {
            let flipped = match c.relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
            (row.into_iter().map(|x| -x).collect(), flipped, -c.rhs.clone())
        } else {
            (row, c.relation, c.rhs.clone())
        };
        rows_struct.push((row, rel, rhs));
    }

    let n_slack = rows_struct
        .iter()
        .filter(|(_, r, _)| *r != Relation::Eq)
        .count();
    let n_art = rows_struct
        .iter()
        .filter(|(_, r, _)| *r != Relation::Le)
        .count();
    let total = n_struct + n_slack + n_art;
    let art_start = n_struct + n_slack;

    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let (mut s, mut a) = (n_struct, art_start);
    for (row, rel, rhs) in rows_struct {
        let mut full = row;
        full.resize(total + 1, T::zero());
        full[total] = rhs;
        match rel {
            Relation::Le => {
                full[s] = T::one();
                basis.push(s);
                s += 1;
            }
            Relation::Ge => {
                full[s] = -T::one();
                s += 1;
                full[a] = T::one();
                basis.push(a);
                a += 1;
            }
            Relation::Eq => {
                full[a] = T::one();
                basis.push(a);
                a += 1;
            }
        }
        rows.push(full);
    }

    // phase 1: minimize the sum of artificials
    let mut obj = vec![T::zero(); total + 1];
    for (i, &b) in basis.iter().enumerate() {
        if b >= art_start {
            for (o, x) in obj.iter_mut().zip(&rows[i]) {
                *o = &*o - x;
            }
        }
    }
    for j in art_start..total {
        obj[j] = T::zero();
    }
    let mut tab = Tableau {
        rows,
        obj,
        basis,
        pivots: 0,
    };
    let all = vec![true; total];
    tab.run(&all);
    // obj[rhs] holds minus the phase-1 optimum
    if tab.obj[total].is_neg() {
        return LpSolution {
            status: LpStatus::Infeasible,
            point: None,
            value: None,
            pivots: tab.pivots,
        };
    }

    // drive remaining artificials out of the basis; drop redundant rows
    let mut i = 0;
    while i < tab.rows.len() {
        if tab.basis[i] >= art_start {
            if let Some(j) = (0..art_start).find(|&j| tab.rows[i][j].is_nonzero()) {
                tab.pivot(i, j);
                i += 1;
            } else {
                tab.rows.remove(i);
                tab.basis.remove(i);
            }
        } else {
            i += 1;
        }
    }

    // phase 2
    let mut cost = vec![T::zero(); total];
    for (v, c) in lp.objective.iter().enumerate() {
        cost[col_of[v]] = c.clone();
        if lp.bounds[v] == VarBound::Free {
            cost[col_of[v] + 1] = -c.clone();
        }
    }
    let mut obj = vec![T::zero(); total + 1];
    obj[..total].clone_from_slice(&cost);
    for (i, &b) in tab.basis.iter().enumerate() {
        let cb = cost[b].clone();
        if cb.is_nonzero() {
            for (o, x) in obj.iter_mut().zip(&tab.rows[i]) {
                *o = &*o - &(&cb * x);
            }
        }
    }
    tab.obj = obj;
    let allowed: Vec<bool> = (0..total).map(|j| j < art_start).collect();
    if !tab.run(&allowed) {
        return LpSolution {
            status: LpStatus::Unbounded,
            point: None,
            value: None,
            pivots: tab.pivots,
        };
    }

    let mut xs = vec![T::zero(); total];
    for (i, &b) in tab.basis.iter().enumerate() {
        xs[b] = tab.rows[i][total].clone();
    }
    let point: Vec<T> = (0..n)
        .map(|v| match lp.bounds[v] {
            VarBound::NonNegative => xs[col_of[v]].clone(),
            VarBound::Free => &xs[col_of[v]] - &xs[col_of[v] + 1],
        })
        .collect();
    let value = lp
        .objective
        .iter()
        .zip(&point)
        .fold(T::zero(), |acc, (c, x)| &acc + &(c * x));
    LpSolution {
        status: LpStatus::Optimal,
        point: Some(point),
        value: Some(value),
        pivots: tab.pivots,
    }
}
