//! Small dense two-phase simplex solver.
//!
//! Problems here are desk-sized (tens of variables, a few hundred rows), so a
//! full tableau is simpler and fast enough. Pivoting uses Dantzig's rule and
//! falls back to Bland's rule after a run of degenerate pivots.

use thiserror::Error;

/// Pivot elements smaller than this are treated as zero.
const PIVOT_TOL: f64 = 1e-10;
/// Reduced-cost optimality tolerance.
const OPT_TOL: f64 = 1e-10;
/// Phase I residual above which the problem is declared infeasible.
const FEAS_TOL: f64 = 1e-8;
const MAX_ITERATIONS: usize = 100_000;
const DEGENERATE_STREAK: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex iteration limit reached")]
    IterationLimit,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("variable {0} has lower bound above upper bound")]
    InvertedBounds(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        Self {
            coeffs,
            relation,
            rhs,
        }
    }

    /// Slack of `x` against this constraint; negative means violated.
    pub fn slack(&self, x: &[f64]) -> f64 {
        let lhs: f64 = self.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
        match self.relation {
            Relation::Le => self.rhs - lhs,
            Relation::Ge => lhs - self.rhs,
            Relation::Eq => -(lhs - self.rhs).abs(),
        }
    }
}

/// `minimize c·x` subject to the constraints and `lower ≤ x ≤ upper`.
/// Bounds may be infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

impl LinearProgram {
    /// Variables default to `[0, ∞)`.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
            constraints: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint::new(coeffs, relation, rhs));
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        solve(self)
    }
}

/// How an original variable maps onto non-negative tableau columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// x = offset + col
    Shifted { col: usize, offset: f64 },
    /// x = offset - col (only an upper bound is finite)
    Mirrored { col: usize, offset: f64 },
    /// x = pos - neg
    Free { pos: usize, neg: usize },
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// Row-major, `cols + 1` entries per row; the last is the right-hand side.
    data: Vec<f64>,
    basis: Vec<usize>,
    /// Reduced costs, last entry holds minus the objective value.
    cost: Vec<f64>,
    iterations: usize,
}

impl Tableau {
    fn width(&self) -> usize {
        self.cols + 1
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width() + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width();
        let p = self.at(r, c);
        for v in &mut self.data[r * w..(r + 1) * w] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.data[r * w..(r + 1) * w].to_vec();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.data[i * w + c];
            if f != 0.0 {
                for (v, pr) in self.data[i * w..(i + 1) * w].iter_mut().zip(&pivot_row) {
                    *v -= f * pr;
                }
                self.data[i * w + c] = 0.0;
            }
        }
        let f = self.cost[c];
        if f != 0.0 {
            for (v, pr) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
            self.cost[c] = 0.0;
        }
        self.basis[r] = c;
        self.iterations += 1;
    }

    /// Sets the cost row to `c` priced out against the current basis.
    fn price(&mut self, c: &[f64]) {
        let w = self.width();
        self.cost = c.to_vec();
        self.cost.push(0.0);
        for r in 0..self.rows {
            let cb = self.cost[self.basis[r]];
            if cb != 0.0 {
                for j in 0..w {
                    self.cost[j] -= cb * self.data[r * w + j];
                }
            }
        }
    }

    fn optimize(&mut self, allowed: &[bool]) -> Result<(), LpError> {
        let mut degenerate = 0usize;
        loop {
            if self.iterations > MAX_ITERATIONS {
                return Err(LpError::IterationLimit);
            }
            let bland = degenerate >= DEGENERATE_STREAK;
            let mut enter = None;
            let mut best = -OPT_TOL;
            for j in 0..self.cols {
                if !allowed[j] {
                    continue;
                }
                let d = self.cost[j];
                if d < best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(c) = enter else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, c);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r).max(0.0) / a;
                    let better = match leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - 1e-12
                                || (ratio <= lratio + 1e-12 && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((r, ratio)) = leave else {
                return Err(LpError::Unbounded);
            };
            if ratio <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, c);
        }
    }
}

pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    let n = lp.num_vars();
    if lp.lower.len() != n || lp.upper.len() != n {
        return Err(LpError::Dimension("bounds length differs from objective".into()));
    }
    for (i, c) in lp.constraints.iter().enumerate() {
        if c.coeffs.len() != n {
            return Err(LpError::Dimension(format!(
                "constraint {i} has {} coefficients, expected {n}",
                c.coeffs.len()
            )));
        }
    }

    // Map variables onto non-negative columns.
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0usize;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for j in 0..n {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        if lo > hi {
            return Err(LpError::InvertedBounds(j));
        }
        if lo.is_finite() {
            maps.push(VarMap::Shifted { col: ncols, offset: lo });
            if hi.is_finite() {
                bound_rows.push((ncols, hi - lo));
            }
            ncols += 1;
        } else if hi.is_finite() {
            maps.push(VarMap::Mirrored { col: ncols, offset: hi });
            ncols += 1;
        } else {
            maps.push(VarMap::Free {
                pos: ncols,
                neg: ncols + 1,
            });
            ncols += 2;
        }
    }

    // Rows in structural columns: (coefficients, relation, rhs).
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
    for con in &lp.constraints {
        let mut a = vec![0.0; ncols];
        let mut rhs = con.rhs;
        for (j, &v) in con.coeffs.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            match maps[j] {
                VarMap::Shifted { col, offset } => {
                    a[col] += v;
                    rhs -= v * offset;
                }
                VarMap::Mirrored { col, offset } => {
                    a[col] -= v;
                    rhs -= v * offset;
                }
                VarMap::Free { pos, neg } => {
                    a[pos] += v;
                    a[neg] -= v;
                }
            }
        }
        rows.push((a, con.relation, rhs));
    }
    for &(col, ub) in &bound_rows {
        let mut a = vec![0.0; ncols];
        a[col] = 1.0;
        rows.push((a, Relation::Le, ub));
    }
    for row in &mut rows {
        if row.2 < 0.0 {
            for v in &mut row.0 {
                *v = -*v;
            }
            row.2 = -row.2;
            row.1 = match row.1 {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let cols = ncols + n_slack + n_art;
    let w = cols + 1;
    let mut data = vec![0.0; m * w];
    let mut basis = vec![0usize; m];
    let mut is_art = vec![false; cols];
    let mut next_slack = ncols;
    let mut next_art = ncols + n_slack;
    for (r, (a, rel, rhs)) in rows.iter().enumerate() {
        data[r * w..r * w + ncols].copy_from_slice(a);
        data[r * w + cols] = *rhs;
        match rel {
            Relation::Le => {
                data[r * w + next_slack] = 1.0;
                basis[r] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                data[r * w + next_slack] = -1.0;
                next_slack += 1;
                data[r * w + next_art] = 1.0;
                is_art[next_art] = true;
                basis[r] = next_art;
                next_art += 1;
            }
            Relation::Eq => {
                data[r * w + next_art] = 1.0;
                is_art[next_art] = true;
                basis[r] = next_art;
                next_art += 1;
            }
        }
    }

    let mut t = Tableau {
        rows: m,
        cols,
        data,
        basis,
        cost: Vec::new(),
        iterations: 0,
    };

    if n_art > 0 {
        let phase1: Vec<f64> = (0..cols).map(|j| if is_art[j] { 1.0 } else { 0.0 }).collect();
        t.price(&phase1);
        t.optimize(&vec![true; cols])?;
        let residual = -t.cost[cols];
        if residual > FEAS_TOL * (1.0 + max_abs_rhs(&rows)) {
            return Err(LpError::Infeasible);
        }
        // Drive zero-level artificials out of the basis where possible.
        for r in 0..m {
            if !is_art[t.basis[r]] {
                continue;
            }
            if let Some(c) = (0..cols).find(|&j| !is_art[j] && t.at(r, j).abs() > PIVOT_TOL) {
                t.pivot(r, c);
            }
        }
    }

    let mut c2 = vec![0.0; cols];
    for (j, map) in maps.iter().enumerate() {
        let c = lp.objective[j];
        match *map {
            VarMap::Shifted { col, .. } => c2[col] += c,
            VarMap::Mirrored { col, .. } => c2[col] -= c,
            VarMap::Free { pos, neg } => {
                c2[pos] += c;
                c2[neg] -= c;
            }
        }
    }
    t.price(&c2);
    let allowed: Vec<bool> = is_art.iter().map(|a| !a).collect();
    t.optimize(&allowed)?;

    let mut col_val = vec![0.0; cols];
    for r in 0..m {
        col_val[t.basis[r]] = t.rhs(r).max(0.0);
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|map| match *map {
            VarMap::Shifted { col, offset } => offset + col_val[col],
            VarMap::Mirrored { col, offset } => offset - col_val[col],
            VarMap::Free { pos, neg } => col_val[pos] - col_val[neg],
        })
        .collect();
    let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution {
        x,
        objective,
        iterations: t.iterations,
    })
}

fn max_abs_rhs(rows: &[(Vec<f64>, Relation, f64)]) -> f64 {
    rows.iter().map(|r| r.2.abs()).fold(0.0, f64::max)
}
