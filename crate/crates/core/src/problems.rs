//! Ready-made builders for the bundled problem families — diet, knapsack,
//! facility location, set covering — plus seeded instance generators and
//! solution enumeration on top of the integer-programming engine.

use crate::bnb::{solve_milp, SolveError, SolveStatus, SolverConfig};
use crate::lp::{Comparator, Sense, INFINITY};
use crate::model::{Assignment, LinearConstraintDef, ModelDef, ModelError, VarDomain, VariableDef};
use itertools::Itertools;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("{0}")]
    Shape(String),
    #[error("{0}")]
    BadValue(String),
    #[error("item {item} is not covered by any set; the instance can never be fully covered")]
    UncoverableItem { item: usize },
    #[error("set {set} refers to item {index}, but there are only {num_items} items")]
    ItemIndex {
        set: usize,
        index: usize,
        num_items: usize,
    },
    #[error("variable `{name}` is not binary; this operation needs an all-binary model")]
    NotBinary { name: String },
    #[error("variable `{name}` has value {value}, too far from 0 or 1 to exclude")]
    NotIntegral { name: String, value: f64 },
    #[error("membership density must lie in (0, 1], got {0}")]
    Density(f64),
    #[error("solver stopped early ({status:?}); raise the limits to finish this operation")]
    Interrupted { status: SolveStatus },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

// ---------------------------------------------------------------------------
// Diet

/// Integer diet data: buy whole foods to meet nutrient floors at least cost.
#[derive(Debug, Clone, PartialEq)]
pub struct DietInstance {
    pub food_names: Vec<String>,
    pub prices: Vec<f64>,
    pub nutrient_names: Vec<String>,
    /// `nutrient_amounts[k][i]` = amount of nutrient `k` in one unit of food `i`.
    pub nutrient_amounts: Vec<Vec<f64>>,
    pub needs: Vec<f64>,
}

impl DietInstance {
    pub fn validate(&self) -> Result<(), ProblemError> {
        let foods = self.food_names.len();
        if foods == 0 {
            return Err(ProblemError::Shape("diet instance has no foods".into()));
        }
        if self.prices.len() != foods {
            return Err(ProblemError::Shape(format!(
                "{} foods but {} prices",
                foods,
                self.prices.len()
            )));
        }
        let nutrients = self.nutrient_names.len();
        if self.nutrient_amounts.len() != nutrients || self.needs.len() != nutrients {
            return Err(ProblemError::Shape(format!(
                "{} nutrient names, {} amount rows, {} needs",
                nutrients,
                self.nutrient_amounts.len(),
                self.needs.len()
            )));
        }
        for (k, row) in self.nutrient_amounts.iter().enumerate() {
            if row.len() != foods {
                return Err(ProblemError::Shape(format!(
                    "nutrient `{}` lists {} foods, instance has {}",
                    self.nutrient_names[k],
                    row.len(),
                    foods
                )));
            }
        }
        Ok(())
    }
}

/// Minimize total price over whole units of each food, subject to one floor
/// per nutrient.
pub fn build_diet_model(inst: &DietInstance) -> Result<ModelDef, ProblemError> {
    inst.validate()?;
    let mut model = ModelDef::new(Sense::Minimize);
    for (name, &price) in inst.food_names.iter().zip(&inst.prices) {
        model.add_variable(VariableDef::integer(name.clone(), 0.0, INFINITY, price));
    }
    for (k, label) in inst.nutrient_names.iter().enumerate() {
        let terms = inst.nutrient_amounts[k]
            .iter()
            .copied()
            .enumerate()
            .collect();
        model = model.add_constraint(LinearConstraintDef::new(
            terms,
            Comparator::Ge,
            inst.needs[k],
            label.clone(),
        ))?;
    }
    Ok(model)
}

/// The two-food running example: apples and oranges against a vitamin floor.
/// Integer optimum $0.98 = two apples.
pub fn apple_orange_instance() -> DietInstance {
    DietInstance {
        food_names: vec!["apples".into(), "oranges".into()],
        prices: vec![0.49, 0.50],
        nutrient_names: vec!["potassium".into()],
        nutrient_amounts: vec![vec![214.0, 232.0]],
        needs: vec![235.0],
    }
}

/// Four fruit against three nutrient floors. Integer optimum $0.99 = one
/// apple plus one orange; the relaxation bottoms out near $0.75.
pub fn fruit_diet_instance() -> DietInstance {
    DietInstance {
        food_names: vec![
            "apples".into(),
            "oranges".into(),
            "bananas".into(),
            "pears".into(),
        ],
        prices: vec![0.49, 0.50, 0.51, 0.52],
        nutrient_names: vec!["potassium".into(), "calcium".into(), "fiber".into()],
        nutrient_amounts: vec![
            vec![214.0, 232.0, 375.0, 155.0],
            vec![12.0, 60.2, 5.75, 14.2],
            vec![4.8, 2.8, 5.31, 5.52],
        ],
        needs: vec![235.0, 65.0, 5.6],
    }
}

// ---------------------------------------------------------------------------
// Knapsack

/// Pick items under a budget to maximize value. `per_item_cap` of 1 gives the
/// classic binary knapsack; `None` allows unlimited copies.
#[derive(Debug, Clone, PartialEq)]
pub struct KnapsackInstance {
    pub names: Vec<String>,
    pub prices: Vec<f64>,
    pub happiness: Vec<f64>,
    pub budget: f64,
    pub per_item_cap: Option<u32>,
    /// Generator seed, when this instance was produced by one.
    pub seed: Option<u64>,
}

impl KnapsackInstance {
    pub fn validate(&self) -> Result<(), ProblemError> {
        let n = self.names.len();
        if n == 0 {
            return Err(ProblemError::Shape("knapsack instance has no items".into()));
        }
        if self.prices.len() != n || self.happiness.len() != n {
            return Err(ProblemError::Shape(format!(
                "{} names, {} prices, {} happiness values",
                n,
                self.prices.len(),
                self.happiness.len()
            )));
        }
        if !self.budget.is_finite() || self.budget < 0.0 {
            return Err(ProblemError::BadValue(format!(
                "budget must be a nonnegative number, got {}",
                self.budget
            )));
        }
        if self.per_item_cap == Some(0) {
            return Err(ProblemError::BadValue(
                "per-item cap of 0 leaves nothing to choose".into(),
            ));
        }
        Ok(())
    }
}

pub fn build_knapsack_model(inst: &KnapsackInstance) -> Result<ModelDef, ProblemError> {
    inst.validate()?;
    let mut model = ModelDef::new(Sense::Maximize);
    for (i, name) in inst.names.iter().enumerate() {
        let v = match inst.per_item_cap {
            Some(1) => VariableDef::binary(name.clone(), inst.happiness[i]),
            Some(cap) => {
                VariableDef::integer(name.clone(), 0.0, cap as f64, inst.happiness[i])
            }
            None => VariableDef::integer(name.clone(), 0.0, INFINITY, inst.happiness[i]),
        };
        model.add_variable(v);
    }
    let terms = inst.prices.iter().copied().enumerate().collect();
    Ok(model.add_constraint(LinearConstraintDef::new(
        terms,
        Comparator::Le,
        inst.budget,
        "budget",
    ))?)
}

/// Five chocolate bars against a $10 budget, one bar of each at most.
/// Integer optimum 20 (Lindt + Dove + Reese's); relaxation 22.
pub fn chocolate_knapsack_instance() -> KnapsackInstance {
    KnapsackInstance {
        names: vec![
            "purity".into(),
            "lindt".into(),
            "dove".into(),
            "reeses".into(),
            "hersheys".into(),
        ],
        prices: vec![4.50, 4.00, 3.00, 3.00, 2.00],
        happiness: vec![10.0, 8.0, 7.0, 5.0, 1.0],
        budget: 10.0,
        per_item_cap: Some(1),
        seed: None,
    }
}

/// Seeded knapsack: happiness in 1..=10, prices in cents up to $4.50, budget
/// $10, one of each. `n = None` draws the item count from 5..=20.
pub fn random_knapsack<R: Rng>(n: Option<usize>, rng: &mut R) -> KnapsackInstance {
    let n = n.unwrap_or_else(|| rng.gen_range(5..=20));
    KnapsackInstance {
        names: (1..=n).map(|i| format!("item{i}")).collect(),
        prices: (0..n)
            .map(|_| 0.01 * rng.gen_range(1..=450) as f64)
            .collect(),
        happiness: (0..n).map(|_| rng.gen_range(1..=10) as f64).collect(),
        budget: 10.0,
        per_item_cap: Some(1),
        seed: None,
    }
}

// ---------------------------------------------------------------------------
// Facility location

/// Rent facilities and assign every store to exactly one of them, minimizing
/// rent plus transport.
#[derive(Debug, Clone, PartialEq)]
pub struct FacilityInstance {
    pub rents: Vec<f64>,
    pub capacities: Vec<f64>,
    pub demands: Vec<f64>,
    /// `transport[i][j]` = cost of supplying store `j` from facility `i`.
    pub transport: Vec<Vec<f64>>,
    /// Facility and store coordinates, when the instance was laid out on a
    /// plane (generators fill this in; hand-built instances may not).
    pub coordinates: Option<(Vec<(f64, f64)>, Vec<(f64, f64)>)>,
    pub seed: Option<u64>,
}

impl FacilityInstance {
    pub fn num_facilities(&self) -> usize {
        self.rents.len()
    }

    pub fn num_stores(&self) -> usize {
        self.demands.len()
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        let m = self.num_facilities();
        let n = self.num_stores();
        if m == 0 || n == 0 {
            return Err(ProblemError::Shape(
                "facility instance needs at least one facility and one store".into(),
            ));
        }
        if self.capacities.len() != m {
            return Err(ProblemError::Shape(format!(
                "{} rents but {} capacities",
                m,
                self.capacities.len()
            )));
        }
        if self.transport.len() != m || self.transport.iter().any(|row| row.len() != n) {
            return Err(ProblemError::Shape(format!(
                "transport must be {m} x {n}"
            )));
        }
        Ok(())
    }

    /// True when the combined capacity cannot meet the combined demand, so
    /// the assignment model is guaranteed infeasible.
    pub fn capacity_shortfall(&self) -> bool {
        self.capacities.iter().sum::<f64>() < self.demands.iter().sum::<f64>()
    }
}

/// Variables: one open/closed flag per facility, then one assignment flag per
/// (facility, store) pair in facility-major order. Returns the model plus a
/// warning flag that is set when total capacity falls short of total demand.
pub fn build_facility_model(inst: &FacilityInstance) -> Result<(ModelDef, bool), ProblemError> {
    inst.validate()?;
    let m = inst.num_facilities();
    let n = inst.num_stores();
    let mut model = ModelDef::new(Sense::Minimize);
    for i in 0..m {
        model.add_variable(VariableDef::binary(format!("y[{i}]"), inst.rents[i]));
    }
    for i in 0..m {
        for j in 0..n {
            model.add_variable(VariableDef::binary(
                format!("x[{i},{j}]"),
                inst.transport[i][j],
            ));
        }
    }
    let x = |i: usize, j: usize| m + i * n + j;
    // Every store is supplied by exactly one facility.
    for j in 0..n {
        let terms = (0..m).map(|i| (x(i, j), 1.0)).collect();
        model = model.add_constraint(LinearConstraintDef::new(
            terms,
            Comparator::Eq,
            1.0,
            format!("assign[{j}]"),
        ))?;
    }
    // Assigned demand stays within the facility's space — if it is rented.
    for i in 0..m {
        let mut terms: Vec<(usize, f64)> =
            (0..n).map(|j| (x(i, j), inst.demands[j])).collect();
        terms.push((i, -inst.capacities[i]));
        model = model.add_constraint(LinearConstraintDef::new(
            terms,
            Comparator::Le,
            0.0,
            format!("capacity[{i}]"),
        ))?;
    }
    // No supplying from a facility that is not rented.
    for i in 0..m {
        for j in 0..n {
            model = model.add_constraint(LinearConstraintDef::new(
                vec![(x(i, j), 1.0), (i, -1.0)],
                Comparator::Le,
                0.0,
                format!("open[{i},{j}]"),
            ))?;
        }
    }
    Ok((model, inst.capacity_shortfall()))
}

/// Seeded facility layout on a 10 x 10 plane: rents uniform in 10..=100,
/// store demands in 1..=10, capacities uniform between `total_demand / m`
/// and twice that (so combined capacity always covers combined demand), and
/// transport = straight-line distance.
pub fn random_facility<R: Rng>(m: usize, n: usize, rng: &mut R) -> FacilityInstance {
    let point = |rng: &mut R| (rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0));
    let facilities: Vec<(f64, f64)> = (0..m).map(|_| point(rng)).collect();
    let stores: Vec<(f64, f64)> = (0..n).map(|_| point(rng)).collect();
    let rents: Vec<f64> = (0..m).map(|_| rng.gen_range(10..=100) as f64).collect();
    let demands: Vec<f64> = (0..n).map(|_| rng.gen_range(1..=10) as f64).collect();
    let share = demands.iter().sum::<f64>() / m as f64;
    let capacities: Vec<f64> = (0..m).map(|_| rng.gen_range(share..=2.0 * share)).collect();
    let transport = facilities
        .iter()
        .map(|&f| {
            stores
                .iter()
                .map(|&s| ((f.0 - s.0).powi(2) + (f.1 - s.1).powi(2)).sqrt())
                .collect()
        })
        .collect();
    FacilityInstance {
        rents,
        capacities,
        demands,
        transport,
        coordinates: Some((facilities, stores)),
        seed: None,
    }
}

// ---------------------------------------------------------------------------
// Set covering

/// One candidate set: the items it covers and its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverSet {
    pub items: Vec<usize>,
    pub cost: f64,
}

/// Choose sets covering every item at least cost.
#[derive(Debug, Clone, PartialEq)]
pub struct SetCoverInstance {
    pub num_items: usize,
    pub sets: Vec<CoverSet>,
    pub seed: Option<u64>,
}

impl SetCoverInstance {
    /// Build and validate: every item must be covered by at least one set,
    /// set members must be in range, costs finite and nonnegative. Members
    /// are deduplicated and sorted.
    pub fn new(num_items: usize, sets: Vec<(Vec<usize>, f64)>) -> Result<Self, ProblemError> {
        if num_items == 0 || sets.is_empty() {
            return Err(ProblemError::Shape(
                "set covering needs at least one item and one set".into(),
            ));
        }
        let mut covered = vec![false; num_items];
        let mut clean = Vec::with_capacity(sets.len());
        for (s, (items, cost)) in sets.into_iter().enumerate() {
            if !cost.is_finite() || cost < 0.0 {
                return Err(ProblemError::BadValue(format!(
                    "set {s} has cost {cost}; costs must be finite and nonnegative"
                )));
            }
            let items: Vec<usize> = items.into_iter().sorted().dedup().collect();
            for &item in &items {
                if item >= num_items {
                    return Err(ProblemError::ItemIndex {
                        set: s,
                        index: item,
                        num_items,
                    });
                }
                covered[item] = true;
            }
            clean.push(CoverSet { items, cost });
        }
        if let Some(item) = covered.iter().position(|&c| !c) {
            return Err(ProblemError::UncoverableItem { item });
        }
        Ok(SetCoverInstance {
            num_items,
            sets: clean,
            seed: None,
        })
    }

    /// [`SetCoverInstance::new`] with every set at the default cost of 1.
    pub fn unit_costs(num_items: usize, sets: Vec<Vec<usize>>) -> Result<Self, ProblemError> {
        Self::new(num_items, sets.into_iter().map(|s| (s, 1.0)).collect())
    }
}

pub fn build_set_cover_model(inst: &SetCoverInstance) -> Result<ModelDef, ProblemError> {
    let mut model = ModelDef::new(Sense::Minimize);
    for (s, set) in inst.sets.iter().enumerate() {
        model.add_variable(VariableDef::binary(format!("set[{s}]"), set.cost));
    }
    for item in 0..inst.num_items {
        let terms: Vec<(usize, f64)> = inst
            .sets
            .iter()
            .enumerate()
            .filter(|(_, set)| set.items.contains(&item))
            .map(|(s, _)| (s, 1.0))
            .collect();
        model = model.add_constraint(LinearConstraintDef::new(
            terms,
            Comparator::Ge,
            1.0,
            format!("cover[{item}]"),
        ))?;
    }
    Ok(model)
}

/// Seeded set covering: each set covers each item with probability
/// `density`; items left uncovered are patched into a random set. Costs are
/// drawn from 1..=10.
pub fn random_set_cover<R: Rng>(
    num_sets: usize,
    num_items: usize,
    density: f64,
    rng: &mut R,
) -> Result<SetCoverInstance, ProblemError> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(ProblemError::Density(density));
    }
    if num_sets == 0 || num_items == 0 {
        return Err(ProblemError::Shape(
            "set covering needs at least one item and one set".into(),
        ));
    }
    let mut membership: Vec<Vec<usize>> = (0..num_sets)
        .map(|_| (0..num_items).filter(|_| rng.gen_bool(density)).collect())
        .collect();
    for item in 0..num_items {
        if !membership.iter().any(|set| set.contains(&item)) {
            let lucky = rng.gen_range(0..num_sets);
            membership[lucky].push(item);
        }
    }
    let sets = membership
        .into_iter()
        .map(|items| (items, rng.gen_range(1..=10) as f64))
        .collect();
    SetCoverInstance::new(num_items, sets)
}

// ---------------------------------------------------------------------------
// Exclusion cuts, enumeration, counting

/// Constraint cutting off exactly the binary point `a`:
/// sum of selected variables minus sum of unselected ones must drop below
/// the selected count. Errors if the model is not all-binary or the point is
/// not within 1e-6 of binary.
pub fn canonical_cut(model: &ModelDef, a: &Assignment) -> Result<LinearConstraintDef, ProblemError> {
    if a.values.len() != model.num_vars() {
        return Err(ProblemError::Shape(format!(
            "assignment has {} values, model has {} variables",
            a.values.len(),
            model.num_vars()
        )));
    }
    let mut terms = Vec::with_capacity(model.num_vars());
    let mut ones: Vec<usize> = Vec::new();
    for (idx, (var, &value)) in model.variables.iter().zip(&a.values).enumerate() {
        if var.domain != VarDomain::Binary {
            return Err(ProblemError::NotBinary {
                name: var.name.clone(),
            });
        }
        let rounded = value.round();
        if (value - rounded).abs() > 1e-6 || !(rounded == 0.0 || rounded == 1.0) {
            return Err(ProblemError::NotIntegral {
                name: var.name.clone(),
                value,
            });
        }
        if rounded == 1.0 {
            terms.push((idx, 1.0));
            ones.push(idx);
        } else {
            terms.push((idx, -1.0));
        }
    }
    let rhs = ones.len() as f64 - 1.0;
    let label = format!("exclude[{}]", ones.iter().join("-"));
    Ok(LinearConstraintDef::new(terms, Comparator::Le, rhs, label))
}

/// One step of an enumeration: the solution that was cut away and the cut
/// that removed it.
#[derive(Debug, Clone)]
pub struct CutRecord {
    pub removed: Assignment,
    pub constraint: LinearConstraintDef,
}

/// The `k` best solutions of an all-binary model, best first, found by
/// repeatedly solving to optimality and cutting the winner off. Stops early
/// when the model runs out of feasible points.
pub fn enumerate_best(
    model: &ModelDef,
    k: usize,
    config: &SolverConfig,
) -> Result<Vec<(Assignment, f64)>, ProblemError> {
    let mut config = config.clone();
    config.rel_gap_tol = 0.0;
    let mut current = model.clone();
    let mut out = Vec::new();
    while out.len() < k {
        let outcome = solve_milp(&current, &config, None)?;
        match outcome.status {
            SolveStatus::Optimal => {}
            SolveStatus::Infeasible => break,
            status => return Err(ProblemError::Interrupted { status }),
        }
        let incumbent = outcome.incumbent.expect("optimal implies an incumbent");
        let cut = canonical_cut(&current, &incumbent.assignment)?;
        current = current.add_constraint(cut)?;
        out.push((incumbent.assignment, incumbent.value));
    }
    Ok(out)
}

/// Count every feasible point of an all-binary model by zeroing the
/// objective and cutting solutions off until none remain. Depth-first
/// search, since any feasible point is as good as any other here.
pub fn count_solutions(model: &ModelDef, config: &SolverConfig) -> Result<u64, ProblemError> {
    let mut config = config.clone();
    config.rel_gap_tol = 0.0;
    config.node_strategy = crate::bnb::NodeStrategy::DepthFirst;
    let mut current = model.clone();
    for v in current.variables.iter_mut() {
        if v.domain != VarDomain::Binary {
            return Err(ProblemError::NotBinary {
                name: v.name.clone(),
            });
        }
        v.objective_coeff = 0.0;
    }
    let mut count = 0u64;
    loop {
        let outcome = solve_milp(&current, &config, None)?;
        match outcome.status {
            SolveStatus::Optimal => {}
            SolveStatus::Infeasible => return Ok(count),
            status => return Err(ProblemError::Interrupted { status }),
        }
        let incumbent = outcome.incumbent.expect("optimal implies an incumbent");
        let cut = canonical_cut(&current, &incumbent.assignment)?;
        current = current.add_constraint(cut)?;
        count += 1;
    }
}
