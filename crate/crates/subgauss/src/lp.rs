//! Self-contained dense linear programming.
//!
//! Two-phase primal simplex on an explicit tableau. Entering variables
//! are picked by the most-negative reduced cost; after a long run of
//! degenerate pivots the solver switches permanently to Bland's rule,
//! which guarantees termination. Equality rows get phase-1 artificial
//! variables; inequality rows enter with slacks that double as the
//! initial basis when their right-hand side is nonnegative.
//!
//! Tolerances are fixed here, not tunable per call: a point is feasible
//! when constraints hold to [`FEASIBILITY_TOL`], and a basis is optimal
//! when all reduced costs exceed -[`OPTIMALITY_TOL`].

use crate::linalg::{apply, dot, norm_inf, SamplingMatrix};
use crate::{Error, Result};
use std::fmt;

/// Absolute constraint satisfaction required of an Optimal point.
pub const FEASIBILITY_TOL: f64 = 1e-8;
/// Reduced-cost threshold certifying optimality.
pub const OPTIMALITY_TOL: f64 = 1e-9;
/// Pivot elements smaller than this are treated as zero in ratio tests.
const PIVOT_TOL: f64 = 1e-9;
/// Consecutive non-improving pivots before Bland's rule takes over.
const STALL_LIMIT: usize = 64;

/// min c.x subject to eq_rows.x = eq_rhs, ineq_rows.x <= ineq_rhs and
/// per-variable bounds (which may be infinite on either side).
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub eq_rows: Vec<Vec<f64>>,
    pub eq_rhs: Vec<f64>,
    pub ineq_rows: Vec<Vec<f64>>,
    pub ineq_rhs: Vec<f64>,
    pub bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    /// New program with the given objective; all variables start free.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            eq_rows: Vec::new(),
            eq_rhs: Vec::new(),
            ineq_rows: Vec::new(),
            ineq_rhs: Vec::new(),
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn push_eq(&mut self, row: Vec<f64>, rhs: f64) {
        self.eq_rows.push(row);
        self.eq_rhs.push(rhs);
    }

    pub fn push_leq(&mut self, row: Vec<f64>, rhs: f64) {
        self.ineq_rows.push(row);
        self.ineq_rhs.push(rhs);
    }

    pub fn set_bound(&mut self, var: usize, lo: f64, hi: f64) {
        self.bounds[var] = (lo, hi);
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.eq_rows.len() != self.eq_rhs.len() || self.ineq_rows.len() != self.ineq_rhs.len() {
            return Err(Error::DimensionMismatch(
                "constraint matrix and rhs lengths differ".into(),
            ));
        }
        for row in self.eq_rows.iter().chain(&self.ineq_rows) {
            if row.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "constraint row has {} coefficients, expected {n}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("non-finite coefficient".into()));
            }
        }
        if self.bounds.len() != n {
            return Err(Error::DimensionMismatch("bounds length".into()));
        }
        for &(lo, hi) in &self.bounds {
            if lo > hi {
                return Err(Error::InvalidParameter(format!("empty bound [{lo}, {hi}]")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for LinearProgram {
    /// Plain-text dump for failure triage.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "min {:?}", self.objective)?;
        for (row, rhs) in self.eq_rows.iter().zip(&self.eq_rhs) {
            writeln!(f, "  {row:?} == {rhs}")?;
        }
        for (row, rhs) in self.ineq_rows.iter().zip(&self.ineq_rhs) {
            writeln!(f, "  {row:?} <= {rhs}")?;
        }
        writeln!(f, "  bounds {:?}", self.bounds)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub point: Option<Vec<f64>>,
    pub objective_value: Option<f64>,
    /// Dual objective of the standardized problem at the final basis;
    /// weak duality puts it below the primal objective up to roundoff.
    pub dual_bound: Option<f64>,
    /// Primal objective of the standardized problem (differs from
    /// `objective_value` by the constant absorbed in variable shifts).
    pub std_objective: Option<f64>,
}

// How an original variable maps into the nonnegative standard form.
enum VarMap {
    // x = lo + x'[col]
    Shifted { col: usize, lo: f64 },
    // x = hi - x'[col]
    Flipped { col: usize, hi: f64 },
    // x = x'[pos] - x'[neg]
    Split { pos: usize, neg: usize },
}

/// Solve a general-form program.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome> {
    lp.validate()?;
    let n = lp.num_vars();

    // Map variables to nonnegative standard-form columns.
    let mut maps: Vec<VarMap> = Vec::with_capacity(n);
    let mut n_std = 0usize;
    for &(lo, hi) in &lp.bounds {
        if lo.is_finite() {
            maps.push(VarMap::Shifted { col: n_std, lo });
            n_std += 1;
        } else if hi.is_finite() {
            maps.push(VarMap::Flipped { col: n_std, hi });
            n_std += 1;
        } else {
            maps.push(VarMap::Split {
                pos: n_std,
                neg: n_std + 1,
            });
            n_std += 2;
        }
    }

    // Rewrite a row over original variables into standard columns,
    // returning the adjusted right-hand side.
    let rewrite = |row: &[f64], rhs: f64| -> (Vec<f64>, f64) {
        let mut out = vec![0.0; n_std];
        let mut r = rhs;
        for (j, &coef) in row.iter().enumerate() {
            if coef == 0.0 {
                continue;
            }
            match maps[j] {
                VarMap::Shifted { col, lo } => {
                    out[col] += coef;
                    r -= coef * lo;
                }
                VarMap::Flipped { col, hi } => {
                    out[col] -= coef;
                    r -= coef * hi;
                }
                VarMap::Split { pos, neg } => {
                    out[pos] += coef;
                    out[neg] -= coef;
                }
            }
        }
        (out, r)
    };

    let (std_obj, _) = rewrite(&lp.objective, 0.0);

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut is_eq: Vec<bool> = Vec::new();
    for (row, &b) in lp.eq_rows.iter().zip(&lp.eq_rhs) {
        let (r, b2) = rewrite(row, b);
        rows.push(r);
        rhs.push(b2);
        is_eq.push(true);
    }
    for (row, &b) in lp.ineq_rows.iter().zip(&lp.ineq_rhs) {
        let (r, b2) = rewrite(row, b);
        rows.push(r);
        rhs.push(b2);
        is_eq.push(false);
    }
    // Finite two-sided bounds need the upper side as an extra row.
    for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
        if lo.is_finite() && hi.is_finite() {
            let mut row = vec![0.0; n];
            row[j] = 1.0;
            let (r, b2) = rewrite(&row, hi);
            rows.push(r);
            rhs.push(b2);
            is_eq.push(false);
        }
    }

    let std = solve_standard(&std_obj, &rows, &rhs, &is_eq)?;
    match std {
        StandardOutcome::Infeasible => Ok(LpOutcome {
            status: LpStatus::Infeasible,
            point: None,
            objective_value: None,
            dual_bound: None,
            std_objective: None,
        }),
        StandardOutcome::Unbounded => Ok(LpOutcome {
            status: LpStatus::Unbounded,
            point: None,
            objective_value: None,
            dual_bound: None,
            std_objective: None,
        }),
        StandardOutcome::Optimal {
            x,
            objective,
            dual_bound,
        } => {
            let mut point = vec![0.0; n];
            for (j, m) in maps.iter().enumerate() {
                point[j] = match *m {
                    VarMap::Shifted { col, lo } => lo + x[col],
                    VarMap::Flipped { col, hi } => hi - x[col],
                    VarMap::Split { pos, neg } => x[pos] - x[neg],
                };
            }
            let value = dot(&lp.objective, &point);
            Ok(LpOutcome {
                status: LpStatus::Optimal,
                point: Some(point),
                objective_value: Some(value),
                dual_bound: Some(dual_bound),
                std_objective: Some(objective),
            })
        }
    }
}

enum StandardOutcome {
    Optimal {
        x: Vec<f64>,
        objective: f64,
        dual_bound: f64,
    },
    Infeasible,
    Unbounded,
}

// Dense simplex over min c.x, A x = b (after slack insertion), x >= 0.
struct Tableau {
    m: usize,
    ncols: usize,
    a: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    cost: Vec<f64>,
    obj: f64,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * self.ncols + c]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let ncols = self.ncols;
        let pivot = self.a[pr * ncols + pc];
        let inv = 1.0 / pivot;
        for v in self.a[pr * ncols..(pr + 1) * ncols].iter_mut() {
            *v *= inv;
        }
        self.rhs[pr] *= inv;
        let prow: Vec<f64> = self.a[pr * ncols..(pr + 1) * ncols].to_vec();
        let prhs = self.rhs[pr];
        for r in 0..self.m {
            if r == pr {
                continue;
            }
            let f = self.a[r * ncols + pc];
            if f != 0.0 {
                let row = &mut self.a[r * ncols..(r + 1) * ncols];
                for (v, p) in row.iter_mut().zip(&prow) {
                    *v -= f * p;
                }
                row[pc] = 0.0;
                self.rhs[r] -= f * prhs;
            }
        }
        let f = self.cost[pc];
        if f != 0.0 {
            for (v, p) in self.cost.iter_mut().zip(&prow) {
                *v -= f * p;
            }
            self.cost[pc] = 0.0;
            // Bringing pc in at level prhs moves the objective by the
            // reduced cost times that level.
            self.obj += f * prhs;
        }
        self.basis[pr] = pc;
    }

    // Reduced-cost row for the given raw costs at the current basis.
    fn install_costs(&mut self, costs: &[f64]) {
        self.cost = costs.to_vec();
        self.obj = 0.0;
        for r in 0..self.m {
            let cb = costs[self.basis[r]];
            if cb != 0.0 {
                let row = &self.a[r * self.ncols..(r + 1) * self.ncols];
                for (v, a) in self.cost.iter_mut().zip(row) {
                    *v -= cb * a;
                }
                self.obj += cb * self.rhs[r];
            }
        }
    }

    // Runs simplex over the allowed columns with the given raw costs
    // (already installed). Returns false if a decisive unbounded ray is
    // found. Roundoff drift in the incrementally updated cost row is
    // handled by refreshing it from the raw costs whenever an entering
    // column has no pivot row; columns that stay in the gray zone after
    // a refresh are dust and get banned until the next real pivot.
    fn optimize(&mut self, raw_costs: &[f64], allowed: &[bool]) -> Result<bool> {
        let mut bland = false;
        let mut stall = 0usize;
        let mut refreshed = false;
        let mut banned = vec![false; self.ncols];
        let max_iters = 200 * (self.m + self.ncols) + 2000;
        for _ in 0..max_iters {
            let eligible = |j: usize, cost: &[f64], banned: &[bool]| {
                allowed[j] && !banned[j] && cost[j] < -OPTIMALITY_TOL
            };
            let entering = if bland {
                (0..self.ncols).find(|&j| eligible(j, &self.cost, &banned))
            } else {
                let mut best = None;
                let mut best_val = -OPTIMALITY_TOL;
                for j in 0..self.ncols {
                    if eligible(j, &self.cost, &banned) && self.cost[j] < best_val {
                        best_val = self.cost[j];
                        best = Some(j);
                    }
                }
                best
            };
            let pc = match entering {
                Some(j) => j,
                None => return Ok(true),
            };
            let mut pr: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for r in 0..self.m {
                let a = self.at(r, pc);
                if a > PIVOT_TOL {
                    let ratio = self.rhs[r] / a;
                    let better = match pr {
                        None => true,
                        Some(cur) => {
                            if ratio < best_ratio - 1e-12 {
                                true
                            } else if ratio <= best_ratio + 1e-12 {
                                if bland {
                                    self.basis[r] < self.basis[cur]
                                } else {
                                    a > self.at(cur, pc)
                                }
                            } else {
                                false
                            }
                        }
                    };
                    if better {
                        pr = Some(r);
                        best_ratio = ratio;
                    }
                }
            }
            let pr = match pr {
                Some(r) => r,
                None => {
                    if !refreshed {
                        self.install_costs(raw_costs);
                        refreshed = true;
                        continue;
                    }
                    if self.cost[pc] < -1e-6 {
                        return Ok(false);
                    }
                    banned[pc] = true;
                    continue;
                }
            };
            let before = self.obj;
            self.pivot(pr, pc);
            refreshed = false;
            banned.fill(false);
            if (before - self.obj).abs() <= 1e-12 * (1.0 + before.abs()) {
                stall += 1;
                if stall >= STALL_LIMIT {
                    bland = true;
                }
            } else {
                stall = 0;
            }
        }
        Err(Error::Lp("simplex iteration limit exceeded".into()))
    }
}

fn solve_standard(
    c: &[f64],
    rows: &[Vec<f64>],
    rhs: &[f64],
    is_eq: &[bool],
) -> Result<StandardOutcome> {
    let n = c.len();
    let m = rows.len();
    let n_slack = is_eq.iter().filter(|&&e| !e).count();

    // Assemble [A | slacks | artificials]; flip rows to nonnegative rhs.
    // A slack whose row keeps +1 orientation and nonnegative rhs serves
    // as the initial basic variable, otherwise the row gets an artificial.
    let flipped: Vec<bool> = rhs.iter().map(|&b| b < 0.0).collect();
    let mut basis_plan: Vec<Option<usize>> = vec![None; m]; // column index
    let mut slack_col = n;
    let mut slack_of_row: Vec<Option<usize>> = vec![None; m];
    for r in 0..m {
        if !is_eq[r] {
            slack_of_row[r] = Some(slack_col);
            if !flipped[r] {
                basis_plan[r] = Some(slack_col);
            }
            slack_col += 1;
        }
    }
    let mut n_art = 0usize;
    let mut art_of_row: Vec<Option<usize>> = vec![None; m];
    for r in 0..m {
        if basis_plan[r].is_none() {
            art_of_row[r] = Some(n + n_slack + n_art);
            basis_plan[r] = art_of_row[r];
            n_art += 1;
        }
    }
    let ncols = n + n_slack + n_art;
    let mut a = vec![0.0; m * ncols];
    let mut b = vec![0.0; m];
    for r in 0..m {
        let sign = if flipped[r] { -1.0 } else { 1.0 };
        for (j, &v) in rows[r].iter().enumerate() {
            a[r * ncols + j] = sign * v;
        }
        if let Some(sc) = slack_of_row[r] {
            a[r * ncols + sc] = sign;
        }
        if let Some(ac) = art_of_row[r] {
            a[r * ncols + ac] = 1.0;
        }
        b[r] = sign * rhs[r];
    }
    let b0 = b.clone();

    let mut t = Tableau {
        m,
        ncols,
        a,
        rhs: b,
        basis: basis_plan.into_iter().map(|x| x.unwrap()).collect(),
        cost: vec![0.0; ncols],
        obj: 0.0,
    };

    let is_artificial = |j: usize| j >= n + n_slack;

    // Phase 1: minimize the artificial mass.
    if n_art > 0 {
        let mut phase1 = vec![0.0; ncols];
        for c1 in phase1.iter_mut().skip(n + n_slack) {
            *c1 = 1.0;
        }
        t.install_costs(&phase1);
        let allowed = vec![true; ncols];
        if !t.optimize(&phase1, &allowed)? {
            return Err(Error::Lp(
                "phase 1 reported an unbounded ray; the artificial mass is bounded below".into(),
            ));
        }
        if t.obj > FEASIBILITY_TOL {
            return Ok(StandardOutcome::Infeasible);
        }
        // Drive surviving artificials out of the basis where possible.
        for r in 0..m {
            if is_artificial(t.basis[r]) {
                if let Some(pc) = (0..n + n_slack).find(|&j| t.at(r, j).abs() > 1e-7) {
                    t.pivot(r, pc);
                }
            }
        }
    }

    // Phase 2 over structural and slack columns only.
    let mut full_cost = vec![0.0; ncols];
    full_cost[..n].copy_from_slice(c);
    t.install_costs(&full_cost);
    let allowed: Vec<bool> = (0..ncols).map(|j| !is_artificial(j)).collect();
    if !t.optimize(&full_cost, &allowed)? {
        return Ok(StandardOutcome::Unbounded);
    }

    let mut x = vec![0.0; ncols];
    for r in 0..m {
        x[t.basis[r]] = t.rhs[r];
    }
    // Dual variables read off the initial identity columns (every such
    // column has coefficient +1 in the assembled system): the reduced
    // cost there is c_j - y_i with c_j = 0 for slacks and (phase 2)
    // artificials, so y_i = -cost[j]. Weak duality then bounds the
    // primal objective by y.b0 from below.
    let mut dual_bound = 0.0;
    for r in 0..m {
        let id_col = art_of_row[r].or(slack_of_row[r]).unwrap();
        dual_bound += -t.cost[id_col] * b0[r];
    }
    let objective = dot(c, &x[..n]);
    Ok(StandardOutcome::Optimal {
        x: x[..n].to_vec(),
        objective,
        dual_bound,
    })
}

/// min ||t||_1 subject to Gamma t = y, via the split t = u - v with
/// u, v >= 0 and objective sum(u + v).
pub fn basis_pursuit(gamma: &SamplingMatrix, y: &[f64]) -> Result<Vec<f64>> {
    let (k, n) = (gamma.rows(), gamma.cols());
    if y.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "basis_pursuit: y has length {}, expected {k}",
            y.len()
        )));
    }
    let mut lp = LinearProgram::new(vec![1.0; 2 * n]);
    for j in 0..2 * n {
        lp.set_bound(j, 0.0, f64::INFINITY);
    }
    for i in 0..k {
        let row_g = gamma.row(i);
        let mut row = vec![0.0; 2 * n];
        row[..n].copy_from_slice(row_g);
        for j in 0..n {
            row[n + j] = -row_g[j];
        }
        lp.push_eq(row, y[i]);
    }
    let out = solve_lp(&lp)?;
    match out.status {
        LpStatus::Optimal => {
            let p = out.point.unwrap();
            let t: Vec<f64> = (0..n).map(|j| p[j] - p[n + j]).collect();
            let resid = apply(gamma, &t)?
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0_f64, f64::max);
            let tol = 1e-7 * (1.0 + norm_inf(y));
            if resid > tol {
                return Err(Error::Lp(format!(
                    "basis pursuit residual {resid:.3e} exceeds tolerance {tol:.3e}"
                )));
            }
            Ok(t)
        }
        LpStatus::Infeasible => Err(Error::Lp(
            "basis pursuit infeasible: y is not in the range of Gamma".into(),
        )),
        LpStatus::Unbounded => Err(Error::Lp("basis pursuit unbounded".into())),
    }
}
