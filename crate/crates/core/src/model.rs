//! Typed optimization models: named variables with domains, labeled linear
//! constraints, and the bridge down to the dense LP layer.

use crate::lp::{self, Comparator, DenseLinearProgram, LpRow, Sense, INFINITY};
use std::collections::HashSet;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarDomain {
    Continuous,
    Integer,
    Binary,
}

/// One decision variable. Bounds use the same `1e100` infinity sentinel as the
/// LP layer; binary variables must keep their bounds inside [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct VariableDef {
    pub name: String,
    pub domain: VarDomain,
    pub lower: f64,
    pub upper: f64,
    pub objective_coeff: f64,
}

impl VariableDef {
    pub fn binary(name: impl Into<String>, objective_coeff: f64) -> Self {
        VariableDef {
            name: name.into(),
            domain: VarDomain::Binary,
            lower: 0.0,
            upper: 1.0,
            objective_coeff,
        }
    }

    pub fn integer(name: impl Into<String>, lower: f64, upper: f64, objective_coeff: f64) -> Self {
        VariableDef {
            name: name.into(),
            domain: VarDomain::Integer,
            lower,
            upper,
            objective_coeff,
        }
    }

    pub fn continuous(
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        objective_coeff: f64,
    ) -> Self {
        VariableDef {
            name: name.into(),
            domain: VarDomain::Continuous,
            lower,
            upper,
            objective_coeff,
        }
    }
}

/// A labeled row over variable indices. Construct through [`LinearConstraintDef::new`]
/// to get canonical terms (duplicates merged, zero coefficients dropped).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraintDef {
    pub terms: Vec<(usize, f64)>,
    pub comparator: Comparator,
    pub rhs: f64,
    pub label: String,
}

impl LinearConstraintDef {
    pub fn new(
        terms: Vec<(usize, f64)>,
        comparator: Comparator,
        rhs: f64,
        label: impl Into<String>,
    ) -> Self {
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
        let mut sorted = terms;
        sorted.sort_by_key(|&(idx, _)| idx);
        for (idx, coeff) in sorted {
            match merged.last_mut() {
                Some((last, acc)) if *last == idx => *acc += coeff,
                _ => merged.push((idx, coeff)),
            }
        }
        merged.retain(|&(_, coeff)| coeff != 0.0);
        LinearConstraintDef {
            terms: merged,
            comparator,
            rhs,
            label: label.into(),
        }
    }

    pub fn lhs_value(&self, values: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|&(idx, coeff)| coeff * values[idx])
            .sum()
    }

    /// Amount by which `values` breaks this row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.lhs_value(values);
        match self.comparator {
            Comparator::Le => (lhs - self.rhs).max(0.0),
            Comparator::Ge => (self.rhs - lhs).max(0.0),
            Comparator::Eq => (lhs - self.rhs).abs(),
        }
    }

    /// Densify into an LP row over `n` variables.
    pub(crate) fn to_dense_row(&self, n: usize) -> LpRow {
        let mut coeffs = vec![0.0; n];
        for &(idx, coeff) in &self.terms {
            coeffs[idx] += coeff;
        }
        LpRow {
            coeffs,
            comparator: self.comparator,
            rhs: self.rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelDef {
    pub sense: Sense,
    pub variables: Vec<VariableDef>,
    pub constraints: Vec<LinearConstraintDef>,
}

/// A full point in variable space, aligned with `ModelDef::variables`.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub values: Vec<f64>,
}

impl Assignment {
    pub fn new(values: Vec<f64>) -> Self {
        Assignment { values }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Evaluation {
    pub feasible: bool,
    pub objective: f64,
    pub integral: bool,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model has no variables")]
    NoVariables,
    #[error("variable {name}: lower bound {lower} above upper bound {upper}")]
    BoundOrder {
        name: String,
        lower: f64,
        upper: f64,
    },
    #[error("variable {0}: binary bounds must sit inside [0, 1]")]
    BinaryBounds(String),
    #[error("duplicate variable name {0}")]
    DuplicateName(String),
    #[error("constraint {label}: variable index {index} out of range ({count} variables)")]
    BadIndex {
        label: String,
        index: usize,
        count: usize,
    },
    #[error("assignment has {got} values, model has {expected} variables")]
    AssignmentLength { got: usize, expected: usize },
    #[error("non-finite value in {0}")]
    BadValue(String),
    #[error(transparent)]
    Lp(#[from] lp::LpError),
}

impl ModelDef {
    pub fn new(sense: Sense) -> Self {
        ModelDef {
            sense,
            variables: Vec::new(),
            constraints: Vec::new(),
        }
    }

    /// Append a variable, returning its index.
    pub fn add_variable(&mut self, v: VariableDef) -> usize {
        self.variables.push(v);
        self.variables.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.variables.is_empty() {
            return Err(ModelError::NoVariables);
        }
        let mut seen = HashSet::new();
        for v in &self.variables {
            if !seen.insert(v.name.as_str()) {
                return Err(ModelError::DuplicateName(v.name.clone()));
            }
            if v.lower.is_nan() || v.upper.is_nan() || !v.objective_coeff.is_finite() {
                return Err(ModelError::BadValue(format!("variable {}", v.name)));
            }
            if v.lower > v.upper {
                return Err(ModelError::BoundOrder {
                    name: v.name.clone(),
                    lower: v.lower,
                    upper: v.upper,
                });
            }
            if v.domain == VarDomain::Binary && (v.lower < 0.0 || v.upper > 1.0) {
                return Err(ModelError::BinaryBounds(v.name.clone()));
            }
        }
        for c in &self.constraints {
            self.check_constraint(c)?;
        }
        Ok(())
    }

    pub(crate) fn check_constraint(&self, c: &LinearConstraintDef) -> Result<(), ModelError> {
        for &(idx, coeff) in &c.terms {
            if idx >= self.variables.len() {
                return Err(ModelError::BadIndex {
                    label: c.label.clone(),
                    index: idx,
                    count: self.variables.len(),
                });
            }
            if !coeff.is_finite() {
                return Err(ModelError::BadValue(format!("constraint {}", c.label)));
            }
        }
        if c.rhs.is_nan() {
            return Err(ModelError::BadValue(format!(
                "constraint {} right-hand side",
                c.label
            )));
        }
        Ok(())
    }

    /// Same model with every integrality requirement dropped. Calling it on an
    /// already-continuous model is a no-op.
    pub fn relax(&self) -> ModelDef {
        let mut out = self.clone();
        for v in out.variables.iter_mut() {
            v.domain = VarDomain::Continuous;
        }
        out
    }

    /// Extended copy with one more row; the receiver is untouched.
    pub fn add_constraint(&self, c: LinearConstraintDef) -> Result<ModelDef, ModelError> {
        self.check_constraint(&c)?;
        let mut out = self.clone();
        out.constraints.push(c);
        Ok(out)
    }

    /// Lower the model to dense LP form. Domains do not survive the trip —
    /// integrality is the caller's concern. Rows that cannot bind (a `>=`
    /// against the -infinity sentinel or a `<=` against +infinity) are
    /// dropped rather than handed to the LP layer.
    pub fn to_lp(&self) -> Result<DenseLinearProgram, ModelError> {
        self.validate()?;
        let n = self.variables.len();
        let mut rows = Vec::with_capacity(self.constraints.len());
        for c in &self.constraints {
            let vacuous = match c.comparator {
                Comparator::Ge => c.rhs <= -INFINITY,
                Comparator::Le => c.rhs >= INFINITY,
                Comparator::Eq => false,
            };
            if vacuous {
                continue;
            }
            rows.push(c.to_dense_row(n));
        }
        Ok(DenseLinearProgram {
            objective: self.variables.iter().map(|v| v.objective_coeff).collect(),
            sense: self.sense,
            rows,
            lower: self.variables.iter().map(|v| v.lower).collect(),
            upper: self.variables.iter().map(|v| v.upper).collect(),
        })
    }

    /// Score a point: objective value, feasibility against rows and bounds at
    /// `tol`, and whether every integer-domain variable sits within `tol` of
    /// an integer.
    pub fn evaluate(&self, a: &Assignment, tol: f64) -> Result<Evaluation, ModelError> {
        if a.values.len() != self.variables.len() {
            return Err(ModelError::AssignmentLength {
                got: a.values.len(),
                expected: self.variables.len(),
            });
        }
        if a.values.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::BadValue("assignment".into()));
        }
        let objective = self
            .variables
            .iter()
            .zip(&a.values)
            .map(|(v, x)| v.objective_coeff * x)
            .sum();
        let mut feasible = true;
        for (v, &x) in self.variables.iter().zip(&a.values) {
            if !lp::is_neg_infinite(v.lower) && x < v.lower - tol {
                feasible = false;
            }
            if !lp::is_pos_infinite(v.upper) && x > v.upper + tol {
                feasible = false;
            }
        }
        if feasible {
            feasible = self.constraints.iter().all(|c| c.violation(&a.values) <= tol);
        }
        let integral = self.variables.iter().zip(&a.values).all(|(v, &x)| {
            v.domain == VarDomain::Continuous || (x - x.round()).abs() <= tol
        });
        Ok(Evaluation {
            feasible,
            objective,
            integral,
        })
    }

    /// Convenience wrapper: relax, lower, and solve in one call.
    pub fn solve_relaxation(&self) -> Result<lp::LpSolution, ModelError> {
        let lp = self.relax().to_lp()?;
        Ok(lp::solve_lp(&lp)?)
    }
}

/// Default integrality tolerance used when scoring candidate points.
pub const DEFAULT_INTEGRALITY_TOL: f64 = 1e-6;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use crate::lp::{solve_lp, LpStatus};

    fn four_item_diet() -> ModelDef {
        let mut m = ModelDef::new(Sense::Minimize);
        for (name, price) in [("x1", 0.49), ("x2", 0.50), ("x3", 0.51), ("x4", 0.52)] {
            m.add_variable(VariableDef::integer(name, 0.0, INFINITY, price));
        }
        let rows: [(&str, [f64; 4], f64); 3] = [
            ("potassium", [214.0, 232.0, 375.0, 155.0], 235.0),
            ("calcium", [12.0, 60.2, 5.75, 14.2], 65.0),
            ("fiber", [4.8, 2.8, 5.31, 5.52], 5.6),
        ];
        for (label, coeffs, need) in rows {
            let terms = coeffs.iter().copied().enumerate().collect();
            m.constraints
                .push(LinearConstraintDef::new(terms, Comparator::Ge, need, label));
        }
        m
    }

    #[test]
    fn relax_is_idempotent_and_nonmutating() {
        let m = four_item_diet();
        let r1 = m.relax();
        let r2 = r1.relax();
        assert_eq!(r1, r2);
        assert!(m.variables.iter().all(|v| v.domain == VarDomain::Integer));
        assert!(r1.variables.iter().all(|v| v.domain == VarDomain::Continuous));
        assert_eq!(m.constraints, r1.constraints);
    }

    #[test]
    fn to_lp_maps_shape_and_bounds() {
        let lp = four_item_diet().to_lp().unwrap();
        assert_eq!(lp.num_vars(), 4);
        assert_eq!(lp.rows.len(), 3);
        assert_eq!(lp.rows[0].coeffs, vec![214.0, 232.0, 375.0, 155.0]);
        assert_eq!(lp.objective, vec![0.49, 0.50, 0.51, 0.52]);
        assert!(lp.upper.iter().all(|&u| u >= INFINITY));
        assert!(lp.lower.iter().all(|&l| l == 0.0));
    }

    #[test]
    fn branching_row_tightens_the_relaxation() {
        // Forcing the fourth item out lifts the relaxed optimum from ~0.75 to ~0.78.
        let m = four_item_diet();
        let tightened = m
            .add_constraint(LinearConstraintDef::new(
                vec![(3, 1.0)],
                Comparator::Le,
                0.0,
                "branch_x4_low",
            ))
            .unwrap();
        assert_eq!(m.constraints.len(), 3, "original must be untouched");
        let s = solve_lp(&tightened.relax().to_lp().unwrap()).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.objective_value, 0.7761, epsilon = 1e-2);
        assert!(s.objective_value > 0.7531);
    }

    #[test]
    fn vacuous_row_changes_nothing() {
        let m = four_item_diet();
        let padded = m
            .add_constraint(LinearConstraintDef::new(
                vec![(0, 1.0)],
                Comparator::Ge,
                -INFINITY,
                "vacuous",
            ))
            .unwrap();
        let a = solve_lp(&m.relax().to_lp().unwrap()).unwrap();
        let b = solve_lp(&padded.relax().to_lp().unwrap()).unwrap();
        assert_eq!(
            m.relax().to_lp().unwrap().rows.len(),
            padded.relax().to_lp().unwrap().rows.len()
        );
        assert_abs_diff_eq!(a.objective_value, b.objective_value, epsilon = 1e-12);
    }

    #[test]
    fn evaluate_scores_knapsack_point() {
        let mut m = ModelDef::new(Sense::Maximize);
        let happiness = [10.0, 8.0, 7.0, 5.0, 1.0];
        let prices = [4.5, 4.0, 3.0, 3.0, 2.0];
        for (i, h) in happiness.iter().enumerate() {
            m.add_variable(VariableDef::binary(format!("x{i}"), *h));
        }
        m.constraints.push(LinearConstraintDef::new(
            prices.iter().copied().enumerate().collect(),
            Comparator::Le,
            10.0,
            "budget",
        ));
        let good = m
            .evaluate(&Assignment::new(vec![0.0, 1.0, 1.0, 1.0, 0.0]), 1e-6)
            .unwrap();
        assert!(good.feasible && good.integral);
        assert_abs_diff_eq!(good.objective, 20.0, epsilon = 1e-12);
        let over = m
            .evaluate(&Assignment::new(vec![1.0, 1.0, 1.0, 0.0, 0.0]), 1e-6)
            .unwrap();
        assert!(!over.feasible, "11.5 spent against a budget of 10");
        assert!(over.integral);
        let frac = m
            .evaluate(&Assignment::new(vec![1.0, 0.625, 1.0, 0.0, 0.0]), 1e-6)
            .unwrap();
        assert!(frac.feasible && !frac.integral);
    }

    #[test]
    fn constraint_terms_are_canonical() {
        let c = LinearConstraintDef::new(
            vec![(2, 1.0), (0, 1.5), (2, 2.0), (1, 0.0)],
            Comparator::Le,
            4.0,
            "merge",
        );
        assert_eq!(c.terms, vec![(0, 1.5), (2, 3.0)]);
    }

    #[test]
    fn validation_errors() {
        let empty = ModelDef::new(Sense::Minimize);
        assert!(matches!(empty.validate(), Err(ModelError::NoVariables)));

        let mut dup = ModelDef::new(Sense::Minimize);
        dup.add_variable(VariableDef::binary("x", 1.0));
        dup.add_variable(VariableDef::binary("x", 1.0));
        assert!(matches!(dup.validate(), Err(ModelError::DuplicateName(_))));

        let mut bad_binary = ModelDef::new(Sense::Minimize);
        let mut v = VariableDef::binary("b", 1.0);
        v.upper = 2.0;
        bad_binary.add_variable(v);
        assert!(matches!(
            bad_binary.validate(),
            Err(ModelError::BinaryBounds(_))
        ));

        let mut m = ModelDef::new(Sense::Minimize);
        m.add_variable(VariableDef::continuous("x", 0.0, 1.0, 1.0));
        assert!(matches!(
            m.add_constraint(LinearConstraintDef::new(
                vec![(5, 1.0)],
                Comparator::Le,
                1.0,
                "oob"
            )),
            Err(ModelError::BadIndex { index: 5, .. })
        ));
        assert!(matches!(
            m.evaluate(&Assignment::new(vec![0.0, 0.0]), 1e-6),
            Err(ModelError::AssignmentLength { got: 2, .. })
        ));
    }
}
