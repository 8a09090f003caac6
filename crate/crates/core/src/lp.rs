//! Dense two-phase primal simplex with explicitly bounded variables.

use thiserror::Error;

/// Magnitude treated as "no bound". Bounds at or beyond this value are infinite.
pub const INFINITY: f64 = 1e100;
/// Tableau entries with absolute value at or below this are treated as zero pivots.
pub const PIVOT_TOL: f64 = 1e-9;
/// A point is accepted as primal feasible when no row or bound is violated by more.
pub const FEASIBILITY_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparator {
    Le,
    Eq,
    Ge,
}

impl Comparator {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Le => "<=",
            Comparator::Eq => "=",
            Comparator::Ge => ">=",
        }
    }
}

/// One linear row: `coeffs . x  (<=|=|>=)  rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub coeffs: Vec<f64>,
    pub comparator: Comparator,
    pub rhs: f64,
}

/// A linear program over dense coefficient storage.
///
/// Bounds use the `INFINITY` sentinel: a lower bound of `-1e100` means
/// unbounded below, an upper bound of `1e100` means unbounded above.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLinearProgram {
    pub objective: Vec<f64>,
    pub sense: Sense,
    pub rows: Vec<LpRow>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solver output. `objective_value` is NaN unless the status is `Optimal`;
/// `primal` holds the last iterate either way (useful only for diagnostics
/// when not optimal).
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective_value: f64,
    pub primal: Vec<f64>,
    pub iterations: usize,
}

/// Feasibility report for a candidate point: the largest violation found
/// across rows and bounds, and whether it stays within the tolerance asked for.
#[derive(Debug, Clone, Copy)]
pub struct Feasibility {
    pub feasible: bool,
    pub worst_violation: f64,
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("program has no variables")]
    Empty,
    #[error("objective describes {objective} variables but bounds describe {bounds}")]
    BoundLength { objective: usize, bounds: usize },
    #[error("row {row} has {got} coefficients, expected {expected}")]
    RowLength {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("variable {var} has lower bound {lower} above upper bound {upper}")]
    BoundOrder { var: usize, lower: f64, upper: f64 },
    #[error("non-finite or oversized value in {0}")]
    BadValue(String),
    #[error("point has {got} values, program has {expected} variables")]
    PointLength { got: usize, expected: usize },
    #[error("simplex hit the safety cap of {0} pivots without converging")]
    IterationLimit(usize),
}

pub fn is_neg_infinite(v: f64) -> bool {
    v <= -INFINITY
}

pub fn is_pos_infinite(v: f64) -> bool {
    v >= INFINITY
}

impl DenseLinearProgram {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if n == 0 {
            return Err(LpError::Empty);
        }
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::BoundLength {
                objective: n,
                bounds: self.lower.len().min(self.upper.len()),
            });
        }
        for (j, &c) in self.objective.iter().enumerate() {
            if !c.is_finite() || c.abs() >= INFINITY {
                return Err(LpError::BadValue(format!("objective coefficient {j}")));
            }
        }
        for j in 0..n {
            let (lo, up) = (self.lower[j], self.upper[j]);
            if lo.is_nan() || up.is_nan() {
                return Err(LpError::BadValue(format!("bounds of variable {j}")));
            }
            // A lower bound of +inf or an upper bound of -inf describes nothing.
            if is_pos_infinite(lo) || is_neg_infinite(up) {
                return Err(LpError::BadValue(format!("bounds of variable {j}")));
            }
            if lo > up {
                return Err(LpError::BoundOrder {
                    var: j,
                    lower: lo,
                    upper: up,
                });
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(LpError::RowLength {
                    row: i,
                    got: row.coeffs.len(),
                    expected: n,
                });
            }
            for (j, &a) in row.coeffs.iter().enumerate() {
                if !a.is_finite() || a.abs() >= INFINITY {
                    return Err(LpError::BadValue(format!("row {i}, coefficient {j}")));
                }
            }
            if !row.rhs.is_finite() || row.rhs.abs() >= INFINITY {
                return Err(LpError::BadValue(format!("row {i} right-hand side")));
            }
        }
        Ok(())
    }
}

/// Solve with the two-phase primal simplex. Dantzig pricing by default,
/// falling back to Bland's rule once the degenerate-pivot budget is spent.
pub fn solve_lp(lp: &DenseLinearProgram) -> Result<LpSolution, LpError> {
    lp.validate()?;
    Simplex::new(lp).run(lp)
}

/// Check a candidate point against every row and bound.
pub fn check_feasible(
    lp: &DenseLinearProgram,
    point: &[f64],
    tol: f64,
) -> Result<Feasibility, LpError> {
    lp.validate()?;
    if point.len() != lp.num_vars() {
        return Err(LpError::PointLength {
            got: point.len(),
            expected: lp.num_vars(),
        });
    }
    if point.iter().any(|v| !v.is_finite()) {
        return Err(LpError::BadValue("candidate point".into()));
    }
    let mut worst = 0.0f64;
    for (j, &v) in point.iter().enumerate() {
        if !is_neg_infinite(lp.lower[j]) {
            worst = worst.max(lp.lower[j] - v);
        }
        if !is_pos_infinite(lp.upper[j]) {
            worst = worst.max(v - lp.upper[j]);
        }
    }
    for row in &lp.rows {
        let lhs: f64 = row.coeffs.iter().zip(point).map(|(a, v)| a * v).sum();
        let gap = match row.comparator {
            Comparator::Le => lhs - row.rhs,
            Comparator::Ge => row.rhs - lhs,
            Comparator::Eq => (lhs - row.rhs).abs(),
        };
        worst = worst.max(gap);
    }
    Ok(Feasibility {
        feasible: worst <= tol,
        worst_violation: worst,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NbState {
    AtLower,
    AtUpper,
    Free,
}

enum PhaseEnd {
    Converged,
    Unbounded,
}

/// Working state: structural variables first, then one slack per row, then one
/// artificial per row. Slacks turn every row into `a.x + s = b`; artificials
/// are only activated for rows whose initial residual the slack cannot absorb.
struct Simplex {
    n: usize,
    m: usize,
    total: usize,
    art_start: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    tab: Vec<f64>, // m rows * total columns, row-major
    x: Vec<f64>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    nb: Vec<NbState>,
    cost: Vec<f64>,
    pivots: usize,
    degenerate: usize,
    bland_after: usize,
    max_pivots: usize,
    scratch: Vec<f64>,
}

impl Simplex {
    fn new(lp: &DenseLinearProgram) -> Self {
        let n = lp.num_vars();
        let m = lp.rows.len();
        let total = n + 2 * m;
        let art_start = n + m;

        let mut lower = vec![0.0; total];
        let mut upper = vec![0.0; total];
        lower[..n].copy_from_slice(&lp.lower);
        upper[..n].copy_from_slice(&lp.upper);

        let mut x = vec![0.0; total];
        let mut nb = vec![NbState::AtLower; total];
        for j in 0..n {
            if !is_neg_infinite(lower[j]) {
                x[j] = lower[j];
                nb[j] = NbState::AtLower;
            } else if !is_pos_infinite(upper[j]) {
                x[j] = upper[j];
                nb[j] = NbState::AtUpper;
            } else {
                x[j] = 0.0;
                nb[j] = NbState::Free;
            }
        }

        let mut tab = vec![0.0; m * total];
        let mut basis = vec![0usize; m];
        let mut in_basis = vec![false; total];

        for (i, row) in lp.rows.iter().enumerate() {
            let base = i * total;
            tab[base..base + n].copy_from_slice(&row.coeffs);
            let slack = n + i;
            tab[base + slack] = 1.0;
            let (slo, sup) = match row.comparator {
                Comparator::Le => (0.0, INFINITY),
                Comparator::Ge => (-INFINITY, 0.0),
                Comparator::Eq => (0.0, 0.0),
            };
            lower[slack] = slo;
            upper[slack] = sup;

            let residual = row.rhs
                - row
                    .coeffs
                    .iter()
                    .zip(&x[..n])
                    .map(|(a, v)| a * v)
                    .sum::<f64>();
            if residual >= slo && residual <= sup {
                x[slack] = residual;
                basis[i] = slack;
                in_basis[slack] = true;
            } else {
                // Slack pinned at zero (its violated side is always the zero
                // bound); an artificial absorbs the remaining residual. The
                // stored row is negated when the residual is negative so the
                // artificial's basis column is +1 (identity form).
                x[slack] = 0.0;
                nb[slack] = if matches!(row.comparator, Comparator::Ge) {
                    NbState::AtUpper
                } else {
                    NbState::AtLower
                };
                if residual < 0.0 {
                    for v in tab[base..base + n].iter_mut() {
                        *v = -*v;
                    }
                    tab[base + slack] = -1.0;
                }
                let art = art_start + i;
                tab[base + art] = 1.0;
                lower[art] = 0.0;
                upper[art] = INFINITY;
                x[art] = residual.abs();
                basis[i] = art;
                in_basis[art] = true;
            }
        }

        Simplex {
            n,
            m,
            total,
            art_start,
            lower,
            upper,
            tab,
            x,
            basis,
            in_basis,
            nb,
            cost: vec![0.0; total],
            pivots: 0,
            degenerate: 0,
            bland_after: 10 * (m + n),
            max_pivots: 10_000 + 200 * (m + total),
            scratch: vec![0.0; total],
        }
    }

    fn run(mut self, lp: &DenseLinearProgram) -> Result<LpSolution, LpError> {
        let needs_phase1 = (self.art_start..self.total).any(|j| self.in_basis[j]);
        if needs_phase1 {
            self.build_phase1_cost();
            match self.iterate()? {
                PhaseEnd::Converged => {}
                PhaseEnd::Unbounded => {
                    return Err(LpError::BadValue(
                        "phase-1 objective diverged; numerical breakdown".into(),
                    ))
                }
            }
            let infeasibility: f64 = (self.art_start..self.total)
                .map(|j| self.x[j].max(0.0))
                .sum();
            if infeasibility > FEASIBILITY_TOL {
                return Ok(self.finish(lp, LpStatus::Infeasible));
            }
            self.retire_artificials();
        }

        self.build_phase2_cost(lp);
        match self.iterate()? {
            PhaseEnd::Converged => Ok(self.finish(lp, LpStatus::Optimal)),
            PhaseEnd::Unbounded => Ok(self.finish(lp, LpStatus::Unbounded)),
        }
    }

    fn finish(self, lp: &DenseLinearProgram, status: LpStatus) -> LpSolution {
        let primal: Vec<f64> = self.x[..self.n].to_vec();
        let objective_value = if status == LpStatus::Optimal {
            lp.objective.iter().zip(&primal).map(|(c, v)| c * v).sum()
        } else {
            f64::NAN
        };
        LpSolution {
            status,
            objective_value,
            primal,
            iterations: self.pivots,
        }
    }

    fn fixed(&self, j: usize) -> bool {
        !is_neg_infinite(self.lower[j])
            && !is_pos_infinite(self.upper[j])
            && self.upper[j] - self.lower[j] <= 0.0
    }

    fn build_phase1_cost(&mut self) {
        self.cost.iter_mut().for_each(|c| *c = 0.0);
        for j in self.art_start..self.total {
            self.cost[j] = 1.0;
        }
        // Zero out reduced costs of basic artificials.
        for i in 0..self.m {
            if self.basis[i] >= self.art_start {
                let base = i * self.total;
                for j in 0..self.total {
                    self.cost[j] -= self.tab[base + j];
                }
            }
        }
    }

    fn build_phase2_cost(&mut self, lp: &DenseLinearProgram) {
        let flip = match lp.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        self.cost.iter_mut().for_each(|c| *c = 0.0);
        for j in 0..self.n {
            self.cost[j] = flip * lp.objective[j];
        }
        for i in 0..self.m {
            let f = self.cost[self.basis[i]];
            if f != 0.0 {
                let base = i * self.total;
                for j in 0..self.total {
                    self.cost[j] -= f * self.tab[base + j];
                }
            }
            self.cost[self.basis[i]] = 0.0;
        }
    }

    /// Pin every artificial to [0, 0] and pivot basic ones out where a usable
    /// column exists. A basic artificial whose row has no nonzero entry left
    /// is a redundant row and stays harmlessly fixed at zero.
    fn retire_artificials(&mut self) {
        for j in self.art_start..self.total {
            self.lower[j] = 0.0;
            self.upper[j] = 0.0;
        }
        for i in 0..self.m {
            if self.basis[i] < self.art_start {
                continue;
            }
            let base = i * self.total;
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.art_start {
                if self.in_basis[j] || self.fixed(j) {
                    continue;
                }
                let a = self.tab[base + j].abs();
                if a > PIVOT_TOL && best.map_or(true, |(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
            if let Some((j, _)) = best {
                self.pivot_in_place(i, j);
            }
        }
    }

    /// Basis swap without moving any variable value (step length zero).
    fn pivot_in_place(&mut self, row: usize, entering: usize) {
        let leaving = self.basis[row];
        self.in_basis[leaving] = false;
        self.nb[leaving] = NbState::AtLower;
        self.x[leaving] = 0.0;
        self.in_basis[entering] = true;
        self.basis[row] = entering;
        self.reduce_rows(row, entering);
    }

    fn reduce_rows(&mut self, row: usize, entering: usize) {
        let total = self.total;
        let base = row * total;
        let piv = self.tab[base + entering];
        self.scratch.copy_from_slice(&self.tab[base..base + total]);
        for v in self.scratch.iter_mut() {
            *v /= piv;
        }
        self.tab[base..base + total].copy_from_slice(&self.scratch);
        for i in 0..self.m {
            if i == row {
                continue;
            }
            let b = i * total;
            let f = self.tab[b + entering];
            if f != 0.0 {
                for j in 0..total {
                    self.tab[b + j] -= f * self.scratch[j];
                }
                self.tab[b + entering] = 0.0;
            }
        }
        let f = self.cost[entering];
        if f != 0.0 {
            for j in 0..total {
                self.cost[j] -= f * self.scratch[j];
            }
            self.cost[entering] = 0.0;
        }
    }

    fn iterate(&mut self) -> Result<PhaseEnd, LpError> {
        loop {
            if self.pivots >= self.max_pivots {
                return Err(LpError::IterationLimit(self.max_pivots));
            }
            let bland = self.degenerate > self.bland_after;

            let mut entering: Option<(usize, f64, f64)> = None; // (var, |d|, direction)
            for j in 0..self.total {
                if self.in_basis[j] || self.fixed(j) {
                    continue;
                }
                let d = self.cost[j];
                let dir = match self.nb[j] {
                    NbState::AtLower if d < -PIVOT_TOL => 1.0,
                    NbState::AtUpper if d > PIVOT_TOL => -1.0,
                    NbState::Free if d.abs() > PIVOT_TOL => {
                        if d > 0.0 {
                            -1.0
                        } else {
                            1.0
                        }
                    }
                    _ => continue,
                };
                if bland {
                    entering = Some((j, d.abs(), dir));
                    break;
                }
                if entering.map_or(true, |(_, score, _)| d.abs() > score) {
                    entering = Some((j, d.abs(), dir));
                }
            }
            let Some((je, _, sigma)) = entering else {
                return Ok(PhaseEnd::Converged);
            };

            let own_range =
                if is_neg_infinite(self.lower[je]) || is_pos_infinite(self.upper[je]) {
                    f64::INFINITY
                } else {
                    self.upper[je] - self.lower[je]
                };

            // Pass 1: smallest step any basic variable allows.
            let mut row_min = f64::INFINITY;
            for i in 0..self.m {
                if let Some((limit, _)) = self.row_limit(i, je, sigma) {
                    row_min = row_min.min(limit);
                }
            }

            if own_range.is_infinite() && row_min.is_infinite() {
                return Ok(PhaseEnd::Unbounded);
            }

            let window = 1e-9 + 1e-9 * row_min.min(own_range).abs();
            if own_range <= row_min + window {
                // Bound flip: the entering variable crosses to its other bound
                // before any basic variable blocks.
                self.apply_column_step(je, sigma, own_range);
                self.nb[je] = match self.nb[je] {
                    NbState::AtLower => NbState::AtUpper,
                    NbState::AtUpper => NbState::AtLower,
                    NbState::Free => NbState::Free,
                };
                self.x[je] = if sigma > 0.0 {
                    self.upper[je]
                } else {
                    self.lower[je]
                };
                self.pivots += 1;
                if own_range <= PIVOT_TOL {
                    self.degenerate += 1;
                }
                continue;
            }

            // Pass 2: choose the leaving row among near-ties.
            let mut chosen: Option<(usize, f64, bool)> = None;
            for i in 0..self.m {
                if let Some((limit, hits_upper)) = self.row_limit(i, je, sigma) {
                    if limit > row_min + window {
                        continue;
                    }
                    let better = match chosen {
                        None => true,
                        Some((prev, _, _)) => {
                            if bland {
                                self.basis[i] < self.basis[prev]
                            } else {
                                let a = self.tab[i * self.total + je].abs();
                                let b = self.tab[prev * self.total + je].abs();
                                a > b
                            }
                        }
                    };
                    if better {
                        chosen = Some((i, limit, hits_upper));
                    }
                }
            }
            let (r, step, hits_upper) =
                chosen.expect("ratio test found a finite minimum but no row");

            self.apply_column_step(je, sigma, step);
            self.x[je] += sigma * step;
            let leaving = self.basis[r];
            self.x[leaving] = if hits_upper {
                self.upper[leaving]
            } else {
                self.lower[leaving]
            };
            self.nb[leaving] = if hits_upper {
                NbState::AtUpper
            } else {
                NbState::AtLower
            };
            self.in_basis[leaving] = false;
            self.in_basis[je] = true;
            self.basis[r] = je;
            if leaving >= self.art_start {
                // An artificial never comes back.
                self.lower[leaving] = 0.0;
                self.upper[leaving] = 0.0;
                self.x[leaving] = 0.0;
            }
            self.reduce_rows(r, je);
            self.pivots += 1;
            if step <= PIVOT_TOL {
                self.degenerate += 1;
            }
        }
    }

    /// Step limit imposed by the basic variable of `row` when `entering` moves
    /// in direction `sigma`, together with which of its bounds it would hit.
    fn row_limit(&self, row: usize, entering: usize, sigma: f64) -> Option<(f64, bool)> {
        let alpha = self.tab[row * self.total + entering];
        if alpha.abs() <= PIVOT_TOL {
            return None;
        }
        let beta = sigma * alpha;
        let bi = self.basis[row];
        if beta > 0.0 {
            if is_neg_infinite(self.lower[bi]) {
                return None;
            }
            Some((((self.x[bi] - self.lower[bi]) / beta).max(0.0), false))
        } else {
            if is_pos_infinite(self.upper[bi]) {
                return None;
            }
            Some((((self.upper[bi] - self.x[bi]) / -beta).max(0.0), true))
        }
    }

    /// Move every basic variable to account for `entering` changing by
    /// `sigma * step`. Skips the entering variable itself.
    fn apply_column_step(&mut self, entering: usize, sigma: f64, step: f64) {
        if step == 0.0 {
            return;
        }
        for i in 0..self.m {
            let a = self.tab[i * self.total + entering];
            if a != 0.0 {
                let bi = self.basis[i];
                self.x[bi] -= sigma * step * a;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lp(
        sense: Sense,
        objective: Vec<f64>,
        rows: Vec<(Vec<f64>, Comparator, f64)>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> DenseLinearProgram {
        DenseLinearProgram {
            objective,
            sense,
            rows: rows
                .into_iter()
                .map(|(coeffs, comparator, rhs)| LpRow {
                    coeffs,
                    comparator,
                    rhs,
                })
                .collect(),
            lower,
            upper,
        }
    }

    #[test]
    fn two_item_diet_relaxation() {
        let p = lp(
            Sense::Minimize,
            vec![0.49, 0.50],
            vec![(vec![214.0, 232.0], Comparator::Ge, 235.0)],
            vec![0.0, 0.0],
            vec![INFINITY, INFINITY],
        );
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.primal[0], 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(s.primal[1], 235.0 / 232.0, epsilon = 1e-6);
        assert_abs_diff_eq!(s.objective_value, 117.5 / 232.0, epsilon = 1e-6);
    }

    fn four_item_diet() -> DenseLinearProgram {
        lp(
            Sense::Minimize,
            vec![0.49, 0.50, 0.51, 0.52],
            vec![
                (vec![214.0, 232.0, 375.0, 155.0], Comparator::Ge, 235.0),
                (vec![12.0, 60.2, 5.75, 14.2], Comparator::Ge, 65.0),
                (vec![4.8, 2.8, 5.31, 5.52], Comparator::Ge, 5.6),
            ],
            vec![0.0; 4],
            vec![INFINITY; 4],
        )
    }

    #[test]
    fn four_item_diet_relaxation() {
        let s = solve_lp(&four_item_diet()).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.objective_value, 0.753057, epsilon = 1e-4);
        let expect = [0.0, 0.954659, 0.0, 0.530245];
        for (got, want) in s.primal.iter().zip(expect) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-4);
        }
    }

    #[test]
    fn budget_relaxation_fractional_item() {
        // Five items, one budget row, unit caps: the relaxation packs the two
        // best ratios whole and splits the third.
        let p = lp(
            Sense::Maximize,
            vec![10.0, 8.0, 7.0, 5.0, 1.0],
            vec![(vec![4.5, 4.0, 3.0, 3.0, 2.0], Comparator::Le, 10.0)],
            vec![0.0; 5],
            vec![1.0; 5],
        );
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.objective_value, 22.0, epsilon = 1e-9);
        let expect = [1.0, 0.625, 1.0, 0.0, 0.0];
        for (got, want) in s.primal.iter().zip(expect) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-9);
        }
    }

    #[test]
    fn no_rows_zero_objective() {
        let p = lp(
            Sense::Minimize,
            vec![0.0],
            vec![],
            vec![0.0],
            vec![1.0],
        );
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.objective_value, 0.0);
    }

    #[test]
    fn no_rows_unbounded_above() {
        let p = lp(
            Sense::Maximize,
            vec![1.0],
            vec![],
            vec![0.0],
            vec![INFINITY],
        );
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Unbounded);
        assert!(s.objective_value.is_nan());
    }

    #[test]
    fn unbounded_via_free_variable() {
        let p = lp(
            Sense::Minimize,
            vec![1.0, 0.0],
            vec![(vec![0.0, 1.0], Comparator::Le, 5.0)],
            vec![-INFINITY, 0.0],
            vec![INFINITY, INFINITY],
        );
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Unbounded);
    }

    #[test]
    fn conflicting_rows_infeasible() {
        let p = lp(
            Sense::Minimize,
            vec![1.0],
            vec![
                (vec![1.0], Comparator::Le, 1.0),
                (vec![1.0], Comparator::Ge, 2.0),
            ],
            vec![0.0],
            vec![INFINITY],
        );
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Infeasible);
    }

    #[test]
    fn equality_row() {
        let p = lp(
            Sense::Minimize,
            vec![1.0, 1.0],
            vec![(vec![2.0, 1.0], Comparator::Eq, 4.0)],
            vec![0.0, 0.0],
            vec![10.0, 10.0],
        );
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.objective_value, 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.primal[0], 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.primal[1], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn fixed_variable_contributes_constant() {
        let p = lp(
            Sense::Minimize,
            vec![1.0, 3.0],
            vec![(vec![1.0, 1.0], Comparator::Ge, 4.0)],
            vec![0.0, 2.0],
            vec![INFINITY, 2.0],
        );
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.primal[1], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.objective_value, 8.0, epsilon = 1e-9);
    }

    #[test]
    fn beale_cycling_example_terminates() {
        // A classic degenerate program that cycles under naive most-negative
        // pricing; the Bland fallback must get it to the optimum of -1/20.
        let p = lp(
            Sense::Minimize,
            vec![-0.75, 150.0, -0.02, 6.0],
            vec![
                (vec![0.25, -60.0, -1.0 / 25.0, 9.0], Comparator::Le, 0.0),
                (vec![0.5, -90.0, -1.0 / 50.0, 3.0], Comparator::Le, 0.0),
                (vec![0.0, 0.0, 1.0, 0.0], Comparator::Le, 1.0),
            ],
            vec![0.0; 4],
            vec![INFINITY; 4],
        );
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.objective_value, -0.05, epsilon = 1e-9);
    }

    #[test]
    fn check_feasible_reports_worst_violation() {
        let p = lp(
            Sense::Minimize,
            vec![0.49, 0.50],
            vec![(vec![214.0, 232.0], Comparator::Ge, 235.0)],
            vec![0.0, 0.0],
            vec![INFINITY, INFINITY],
        );
        let ok = check_feasible(&p, &[2.0, 0.0], FEASIBILITY_TOL).unwrap();
        assert!(ok.feasible);
        let bad = check_feasible(&p, &[1.0, 0.0], FEASIBILITY_TOL).unwrap();
        assert!(!bad.feasible);
        assert_abs_diff_eq!(bad.worst_violation, 21.0, epsilon = 1e-9);
        let below = check_feasible(&p, &[-0.5, 2.0], FEASIBILITY_TOL).unwrap();
        assert!(!below.feasible);
        assert_abs_diff_eq!(below.worst_violation, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn malformed_programs_are_rejected() {
        let mut p = lp(
            Sense::Minimize,
            vec![1.0, 1.0],
            vec![(vec![1.0], Comparator::Le, 1.0)],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
        );
        assert!(matches!(
            solve_lp(&p),
            Err(LpError::RowLength { row: 0, got: 1, .. })
        ));
        p.rows[0].coeffs = vec![1.0, f64::NAN];
        assert!(matches!(solve_lp(&p), Err(LpError::BadValue(_))));
        p.rows[0].coeffs = vec![1.0, 1.0];
        p.rows[0].rhs = INFINITY;
        assert!(matches!(solve_lp(&p), Err(LpError::BadValue(_))));
        p.rows[0].rhs = 1.0;
        p.lower[1] = 2.0;
        assert!(matches!(
            solve_lp(&p),
            Err(LpError::BoundOrder { var: 1, .. })
        ));
        let empty = lp(Sense::Minimize, vec![], vec![], vec![], vec![]);
        assert!(matches!(solve_lp(&empty), Err(LpError::Empty)));
        assert!(matches!(
            check_feasible(
                &lp(
                    Sense::Minimize,
                    vec![1.0],
                    vec![],
                    vec![0.0],
                    vec![1.0]
                ),
                &[0.0, 0.0],
                1e-7
            ),
            Err(LpError::PointLength { got: 2, .. })
        ));
    }

    #[test]
    fn maximization_negates_internally() {
        let p = lp(
            Sense::Maximize,
            vec![3.0],
            vec![(vec![1.0], Comparator::Le, 5.0)],
            vec![0.0],
            vec![INFINITY],
        );
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.objective_value, 15.0, epsilon = 1e-9);
    }

    #[test]
    fn scaling_the_objective_scales_the_optimum() {
        let base = four_item_diet();
        let s1 = solve_lp(&base).unwrap();
        for lambda in [0.5, 2.0, 13.7] {
            let mut scaled = base.clone();
            for c in scaled.objective.iter_mut() {
                *c *= lambda;
            }
            let s2 = solve_lp(&scaled).unwrap();
            assert_eq!(s2.status, LpStatus::Optimal);
            assert_abs_diff_eq!(
                s2.objective_value,
                lambda * s1.objective_value,
                epsilon = 1e-6
            );
            // The unscaled argmin must price out optimally for the scaled
            // program too: feasible and matching the scaled optimum.
            let check = check_feasible(&scaled, &s1.primal, FEASIBILITY_TOL).unwrap();
            assert!(check.feasible);
            let val: f64 = scaled
                .objective
                .iter()
                .zip(&s1.primal)
                .map(|(c, v)| c * v)
                .sum();
            assert_abs_diff_eq!(val, s2.objective_value, epsilon = 1e-6);
        }
    }

    // ---- brute-force oracle: enumerate candidate basic points ----

    /// Solve a dense square system by Gaussian elimination with partial
    /// pivoting. Returns None when the system is numerically singular.
    fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
        let n = b.len();
        for col in 0..n {
            let (best, mag) = (col..n)
                .map(|r| (r, a[r][col].abs()))
                .max_by(|x, y| x.1.total_cmp(&y.1))?;
            if mag < 1e-8 {
                return None;
            }
            a.swap(col, best);
            b.swap(col, best);
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..n {
                        a[r][c] -= f * a[col][c];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
        Some((0..n).map(|i| b[i] / a[i][i]).collect())
    }

    /// Enumerate every nondegenerate intersection of n hyperplanes drawn from
    /// rows and finite bounds; the best feasible one is the LP optimum for a
    /// bounded feasible region.
    fn enumerate_optimum(p: &DenseLinearProgram) -> Option<f64> {
        let n = p.num_vars();
        let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
        for row in &p.rows {
            planes.push((row.coeffs.clone(), row.rhs));
        }
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            if !is_neg_infinite(p.lower[j]) {
                planes.push((e.clone(), p.lower[j]));
            }
            if !is_pos_infinite(p.upper[j]) {
                planes.push((e, p.upper[j]));
            }
        }
        use itertools::Itertools;
        let mut best: Option<f64> = None;
        for combo in (0..planes.len()).combinations(n) {
            let a: Vec<Vec<f64>> = combo.iter().map(|&i| planes[i].0.clone()).collect();
            let b: Vec<f64> = combo.iter().map(|&i| planes[i].1).collect();
            let Some(x) = solve_square(a, b) else {
                continue;
            };
            let feas = check_feasible(p, &x, 1e-6).unwrap();
            if !feas.feasible {
                continue;
            }
            let val: f64 = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
            best = Some(match (best, p.sense) {
                (None, _) => val,
                (Some(b), Sense::Minimize) => b.min(val),
                (Some(b), Sense::Maximize) => b.max(val),
            });
        }
        best
    }

    #[test]
    fn agrees_with_vertex_enumeration_on_random_programs() {
        let mut rng = ChaCha8Rng::seed_from_u64(20_240_817);
        for trial in 0..200 {
            let n = rng.gen_range(1..=5);
            let m = rng.gen_range(1..=5);
            let objective: Vec<f64> = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
            let rows: Vec<LpRow> = (0..m)
                .map(|_| LpRow {
                    coeffs: (0..n).map(|_| rng.gen_range(-4..=4) as f64).collect(),
                    comparator: match rng.gen_range(0..3) {
                        0 => Comparator::Le,
                        1 => Comparator::Ge,
                        _ => Comparator::Eq,
                    },
                    rhs: rng.gen_range(-10..=10) as f64,
                })
                .collect();
            let upper: Vec<f64> = (0..n).map(|_| rng.gen_range(1..=10) as f64).collect();
            let p = DenseLinearProgram {
                objective,
                sense: if rng.gen_bool(0.5) {
                    Sense::Minimize
                } else {
                    Sense::Maximize
                },
                rows,
                lower: vec![0.0; n],
                upper,
            };
            let got = solve_lp(&p).unwrap();
            match enumerate_optimum(&p) {
                Some(best) => {
                    assert_eq!(
                        got.status,
                        LpStatus::Optimal,
                        "trial {trial}: oracle found a feasible vertex"
                    );
                    assert_abs_diff_eq!(got.objective_value, best, epsilon = 1e-6);
                    let feas = check_feasible(&p, &got.primal, 1e-6).unwrap();
                    assert!(feas.feasible, "trial {trial}: optimal point infeasible");
                }
                None => {
                    assert_eq!(
                        got.status,
                        LpStatus::Infeasible,
                        "trial {trial}: oracle found no feasible vertex"
                    );
                }
            }
        }
    }
}
