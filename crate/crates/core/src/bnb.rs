//! Branch-and-bound search over mixed-integer models, with lazy constraint callbacks.

use crate::lp::{solve_lp, DenseLinearProgram, LpError, LpRow, LpStatus, Sense};
use crate::model::{Assignment, LinearConstraintDef, ModelDef, ModelError, VarDomain};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use std::time::Instant;
use thiserror::Error;

/// Order in which open nodes are pulled from the frontier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeStrategy {
    /// Always expand the open node with the most promising relaxation value.
    BestBound,
    /// Dive: expand the deepest open node first (ties broken by creation order).
    DepthFirst,
    /// Expand shallowest nodes first, level by level.
    BreadthFirst,
}

/// How the branching variable is chosen among fractional integer variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchRule {
    /// The variable whose value is farthest from an integer (ties: lowest index).
    MostFractional,
    /// The fractional variable with the smallest index.
    LowestIndex,
    /// A uniformly random fractional variable (seeded; reproducible).
    Random,
}

/// Which child of a branching gets created (and therefore explored) first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChildOrder {
    /// The `x <= floor(v)` child first. This is the default.
    LeFirst,
    /// The `x >= ceil(v)` child first.
    GeFirst,
}

/// Tuning knobs for [`solve_milp`]. `Default` gives the standard configuration.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub node_strategy: NodeStrategy,
    pub branch_rule: BranchRule,
    /// A value within this distance of an integer counts as integral.
    pub integrality_tol: f64,
    /// Stop once the relative optimality gap is at or below this.
    pub rel_gap_tol: f64,
    /// Wall-clock budget in seconds; `None` means no limit.
    pub time_limit: Option<f64>,
    /// Maximum number of nodes to branch on; `None` means no limit.
    pub node_limit: Option<usize>,
    /// Seed for the random branch rule.
    pub seed: u64,
    pub child_order: ChildOrder,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            node_strategy: NodeStrategy::BestBound,
            branch_rule: BranchRule::MostFractional,
            integrality_tol: 1e-6,
            rel_gap_tol: 1e-4,
            time_limit: None,
            node_limit: None,
            seed: 0,
            child_order: ChildOrder::LeFirst,
        }
    }
}

/// Lifecycle of a search-tree node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeState {
    Unexplored,
    /// Branched on; its children are in the tree.
    Explored,
    /// Discarded: its relaxation cannot beat the incumbent.
    Fathomed,
    /// Its relaxation satisfied all integrality requirements.
    Integral,
    /// Its relaxation has no feasible point.
    Infeasible,
}

/// One bound tightening imposed by a branching decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundChange {
    /// Raise the variable's lower bound to this value.
    Lower(f64),
    /// Lower the variable's upper bound to this value.
    Upper(f64),
}

/// A node in the branch-and-bound tree.
///
/// `bound_changes` holds only this node's own deltas; the node's effective
/// bounds are the base model bounds tightened by every change on the path
/// from the root down to it.
#[derive(Debug, Clone)]
pub struct NodeRecord {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    pub bound_changes: Vec<(usize, BoundChange)>,
    /// Relaxation value in the model's own sense, once solved.
    pub lp_value: Option<f64>,
    pub state: NodeState,
}

impl NodeRecord {
    fn root() -> Self {
        NodeRecord {
            id: 0,
            parent: None,
            depth: 0,
            bound_changes: Vec::new(),
            lp_value: None,
            state: NodeState::Unexplored,
        }
    }
}

/// Best feasible solution found so far.
#[derive(Debug, Clone)]
pub struct Incumbent {
    pub assignment: Assignment,
    /// Objective value in the model's own sense.
    pub value: f64,
    /// Node whose relaxation produced this solution.
    pub found_at_node: usize,
}

/// Why the search stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Proven optimal (tree exhausted, or gap closed to zero).
    Optimal,
    /// No integer-feasible point exists.
    Infeasible,
    /// Stopped early with the gap at or below the configured tolerance.
    GapLimit,
    TimeLimit,
    NodeLimit,
}

/// Progress counters and bound trajectories for one solve.
///
/// Histories are `(nodes explored so far, value)` pairs in the model's own
/// sense. For minimization the proof bound (`lb_history`) rises toward the
/// optimum and the incumbent bound (`ub_history`) falls; for maximization the
/// roles mirror: `lb_history` falls and `ub_history` rises.
#[derive(Debug, Clone)]
pub struct SolveStats {
    pub nodes_explored: usize,
    pub lb_history: Vec<(usize, f64)>,
    pub ub_history: Vec<(usize, f64)>,
    /// Wall-clock seconds spent in the solve.
    pub runtime: f64,
    pub status: SolveStatus,
    /// Constraints added through the lazy callback, over the whole solve.
    pub lazy_constraints_added: usize,
}

/// Everything a solve returns: status, best solution (if any), and stats.
#[derive(Debug, Clone)]
pub struct MilpOutcome {
    pub status: SolveStatus,
    pub incumbent: Option<Incumbent>,
    pub stats: SolveStats,
}

/// Errors surfaced by the branch-and-bound driver.
#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("relaxation is unbounded; integer search needs finite relaxation values")]
    UnboundedRelaxation,
    #[error("cannot branch on variable {var}: value {value} is already integral")]
    BranchOnIntegral { var: usize, value: f64 },
    #[error(
        "lazy callback returned a constraint the candidate already satisfies \
         (label `{label}`, lhs {lhs}, required {symbol} {rhs}); separation must \
         only emit violated constraints"
    )]
    CallbackConstraintNotViolated {
        label: String,
        lhs: f64,
        symbol: &'static str,
        rhs: f64,
    },
    #[error("failed to write solver log: {0}")]
    Log(#[from] std::io::Error),
}

/// Callback invoked on every integral candidate. Returning an empty vector
/// accepts the candidate; returning constraints rejects it, and each returned
/// constraint must be violated by the candidate (by more than 1e-6).
pub type LazyCallback<'a> = dyn FnMut(&Assignment) -> Vec<LinearConstraintDef> + 'a;

/// Relative optimality gap `|ub - lb| / max(1e-10, |ub|)`; infinite while
/// either bound is missing.
pub fn current_gap(ub: Option<f64>, lb: Option<f64>) -> f64 {
    match (ub, lb) {
        (Some(u), Some(l)) => (u - l).abs() / f64::max(1e-10, u.abs()),
        _ => f64::INFINITY,
    }
}

/// Pick the branching variable among integer variables whose value in
/// `primal` is more than `integrality_tol` away from an integer. Returns
/// `None` when every integer variable is integral.
pub fn select_branch_var<R: Rng>(
    primal: &[f64],
    model: &ModelDef,
    rule: BranchRule,
    integrality_tol: f64,
    rng: &mut R,
) -> Option<usize> {
    let fractional: Vec<(usize, f64)> = model
        .variables
        .iter()
        .enumerate()
        .filter(|(_, v)| v.domain != VarDomain::Continuous)
        .filter_map(|(j, _)| {
            let dist = (primal[j] - primal[j].round()).abs();
            (dist > integrality_tol).then_some((j, dist))
        })
        .collect();
    if fractional.is_empty() {
        return None;
    }
    match rule {
        BranchRule::LowestIndex => Some(fractional[0].0),
        BranchRule::MostFractional => {
            let mut best = fractional[0];
            for &(j, dist) in &fractional[1..] {
                if dist > best.1 {
                    best = (j, dist);
                }
            }
            Some(best.0)
        }
        BranchRule::Random => {
            let pick = rng.gen_range(0..fractional.len());
            Some(fractional[pick].0)
        }
    }
}

/// Split `parent` on `var` at the fractional `value`, producing the
/// `var <= floor(value)` child and the `var >= ceil(value)` child, with ids
/// `first_child_id` and `first_child_id + 1`.
pub fn branch(
    parent: &NodeRecord,
    var: usize,
    value: f64,
    first_child_id: usize,
) -> Result<(NodeRecord, NodeRecord), SolveError> {
    if (value - value.round()).abs() <= 1e-9 {
        return Err(SolveError::BranchOnIntegral { var, value });
    }
    let child = |id: usize, change: BoundChange| NodeRecord {
        id,
        parent: Some(parent.id),
        depth: parent.depth + 1,
        bound_changes: vec![(var, change)],
        lp_value: None,
        state: NodeState::Unexplored,
    };
    let le = child(first_child_id, BoundChange::Upper(value.floor()));
    let ge = child(first_child_id + 1, BoundChange::Lower(value.ceil()));
    Ok((le, ge))
}

/// Solve a mixed-integer model by LP-based branch and bound.
///
/// An optional lazy callback sees every integral relaxation candidate; any
/// constraints it returns are added globally, the candidate is discarded, and
/// the node is re-solved (see [`LazyCallback`]).
pub fn solve_milp(
    model: &ModelDef,
    config: &SolverConfig,
    callback: Option<&mut LazyCallback>,
) -> Result<MilpOutcome, SolveError> {
    Engine::new(model, config, callback, None, false)?.run()
}

/// Like [`solve_milp`], but also writes one progress line to `sink` every
/// time a bound improves. Each line has the fixed shape
/// `nodes=<explored> lb=<bound> ub=<bound> gap=<gap>`, where a missing bound
/// prints as `-` and an unbounded gap prints as `inf`. Values are in the
/// model's own sense.
pub fn solve_milp_logged(
    model: &ModelDef,
    config: &SolverConfig,
    callback: Option<&mut LazyCallback>,
    sink: &mut dyn Write,
) -> Result<MilpOutcome, SolveError> {
    Engine::new(model, config, callback, Some(sink), false)?.run()
}

/// Test hook: run the search without incumbent-based pruning, so every node
/// is expanded until integral or infeasible. Exists to check that pruning
/// never changes the answer.
#[cfg(test)]
pub(crate) fn solve_milp_unfathomed(
    model: &ModelDef,
    config: &SolverConfig,
) -> Result<MilpOutcome, SolveError> {
    Engine::new(model, config, None, None, true)?.run()
}

/// Outcome of solving (and possibly re-solving, under lazy cuts) one node.
enum NodeResult {
    Infeasible,
    /// Relaxation value cannot beat the incumbent.
    Fathomed(f64),
    /// Relaxation was integral and survived the callback; value attached.
    Integral(f64),
    /// Needs branching; the point itself is kept in [`Engine::primals`].
    Fractional { value: f64 },
    TimedOut,
}

struct Engine<'a> {
    /// Minimization copy of the caller's model.
    work: ModelDef,
    /// +1 if the caller minimized, -1 if they maximized.
    flip: f64,
    base: DenseLinearProgram,
    /// Dense versions of lazily added rows, appended to every node LP.
    pool: Vec<LpRow>,
    pool_defs: Vec<LinearConstraintDef>,
    config: SolverConfig,
    rng: ChaCha8Rng,
    callback: Option<Box<dyn FnMut(&Assignment) -> Vec<LinearConstraintDef> + 'a>>,
    sink: Option<Box<dyn Write + 'a>>,
    disable_bound_fathoming: bool,

    nodes: Vec<NodeRecord>,
    /// Fractional relaxation point per node, for branching.
    primals: Vec<Option<Vec<f64>>>,
    /// Pool size when the node was last solved; smaller than the pool now
    /// means the stored value is stale and the node gets re-solved on pop.
    rows_seen: Vec<usize>,
    open: Vec<usize>,
    /// `(snapped point, value, node)` in minimization terms.
    incumbent: Option<(Vec<f64>, f64, usize)>,

    nodes_explored: usize,
    lb_history: Vec<(usize, f64)>,
    ub_history: Vec<(usize, f64)>,
    lazy_added: usize,
    last_lb: Option<f64>,
    start: Instant,
}

impl<'a> Engine<'a> {
    fn new<'c: 'a, 'w: 'a>(
        model: &ModelDef,
        config: &SolverConfig,
        callback: Option<&'a mut (dyn FnMut(&Assignment) -> Vec<LinearConstraintDef> + 'c)>,
        sink: Option<&'a mut (dyn Write + 'w)>,
        disable_bound_fathoming: bool,
    ) -> Result<Self, SolveError> {
        model.validate()?;
        let mut work = model.clone();
        let flip = match work.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => {
                for v in &mut work.variables {
                    v.objective_coeff = -v.objective_coeff;
                }
                work.sense = Sense::Minimize;
                -1.0
            }
        };
        let base = work.relax().to_lp()?;
        Ok(Engine {
            work,
            flip,
            base,
            pool: Vec::new(),
            pool_defs: Vec::new(),
            config: config.clone(),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            callback: callback.map(|c| {
                Box::new(c) as Box<dyn FnMut(&Assignment) -> Vec<LinearConstraintDef> + 'a>
            }),
            sink: sink.map(|s| Box::new(s) as Box<dyn Write + 'a>),
            disable_bound_fathoming,
            nodes: Vec::new(),
            primals: Vec::new(),
            rows_seen: Vec::new(),
            open: Vec::new(),
            incumbent: None,
            nodes_explored: 0,
            lb_history: Vec::new(),
            ub_history: Vec::new(),
            lazy_added: 0,
            last_lb: None,
            start: Instant::now(),
        })
    }

    fn out_of_time(&self) -> bool {
        self.config
            .time_limit
            .is_some_and(|limit| self.start.elapsed().as_secs_f64() >= limit)
    }

    /// Effective variable bounds at a node: base bounds tightened by every
    /// change on the root-to-node path.
    fn node_bounds(&self, id: usize) -> (Vec<f64>, Vec<f64>) {
        let mut lower = self.base.lower.clone();
        let mut upper = self.base.upper.clone();
        let mut cursor = Some(id);
        while let Some(i) = cursor {
            for &(var, change) in &self.nodes[i].bound_changes {
                match change {
                    BoundChange::Lower(v) => lower[var] = lower[var].max(v),
                    BoundChange::Upper(v) => upper[var] = upper[var].min(v),
                }
            }
            cursor = self.nodes[i].parent;
        }
        (lower, upper)
    }

    fn node_lp(&self, id: usize) -> DenseLinearProgram {
        let (lower, upper) = self.node_bounds(id);
        let mut rows = self.base.rows.clone();
        rows.extend(self.pool.iter().cloned());
        DenseLinearProgram {
            objective: self.base.objective.clone(),
            sense: Sense::Minimize,
            rows,
            lower,
            upper,
        }
    }

    fn is_integral(&self, primal: &[f64]) -> bool {
        self.work
            .variables
            .iter()
            .zip(primal)
            .all(|(v, &x)| {
                v.domain == VarDomain::Continuous
                    || (x - x.round()).abs() <= self.config.integrality_tol
            })
    }

    /// Round near-integral integer variables to exact integers.
    fn snap(&self, primal: &[f64]) -> Vec<f64> {
        self.work
            .variables
            .iter()
            .zip(primal)
            .map(|(v, &x)| {
                if v.domain != VarDomain::Continuous
                    && (x - x.round()).abs() <= self.config.integrality_tol
                {
                    x.round() + 0.0
                } else {
                    x
                }
            })
            .collect()
    }

    fn objective_of(&self, point: &[f64]) -> f64 {
        self.work
            .variables
            .iter()
            .zip(point)
            .map(|(v, &x)| v.objective_coeff * x)
            .sum()
    }

    fn incumbent_value(&self) -> Option<f64> {
        self.incumbent.as_ref().map(|(_, v, _)| *v)
    }

    /// Global proof bound in minimization terms: the weakest open relaxation
    /// value, never above the incumbent; `None` before the root is solved.
    fn global_lb(&self) -> Option<f64> {
        let open_min = self
            .open
            .iter()
            .map(|&id| {
                self.flip * self.nodes[id].lp_value.expect("open nodes are solved")
            })
            .fold(f64::INFINITY, f64::min);
        match (self.open.is_empty(), self.incumbent_value()) {
            (true, inc) => inc,
            (false, Some(inc)) => Some(open_min.min(inc)),
            (false, None) => Some(open_min),
        }
    }

    fn log_line(&mut self) -> Result<(), SolveError> {
        if self.sink.is_none() {
            return Ok(());
        }
        let fmt = |v: Option<f64>| match v {
            Some(x) => format!("{x:.6}"),
            None => "-".to_string(),
        };
        let gap = current_gap(self.incumbent_value(), self.last_lb);
        let gap = if gap.is_finite() {
            format!("{gap:.6}")
        } else {
            "inf".to_string()
        };
        let line = format!(
            "nodes={} lb={} ub={} gap={}",
            self.nodes_explored,
            fmt(self.last_lb.map(|v| self.flip * v)),
            fmt(self.incumbent_value().map(|v| self.flip * v)),
            gap
        );
        let sink = self.sink.as_deref_mut().expect("checked above");
        writeln!(sink, "{line}")?;
        Ok(())
    }

    /// Record a proof-bound improvement (minimization terms).
    fn push_lb(&mut self, value: f64) -> Result<(), SolveError> {
        if self.last_lb.is_some_and(|prev| value <= prev + 1e-12) {
            return Ok(());
        }
        self.last_lb = Some(value);
        self.lb_history.push((self.nodes_explored, self.flip * value));
        self.log_line()
    }

    /// Solve one node's relaxation, looping while the lazy callback keeps
    /// cutting off integral candidates.
    fn solve_node(&mut self, id: usize) -> Result<NodeResult, SolveError> {
        loop {
            if self.out_of_time() {
                return Ok(NodeResult::TimedOut);
            }
            let lp = self.node_lp(id);
            let solution = solve_lp(&lp)?;
            self.rows_seen[id] = self.pool.len();
            match solution.status {
                LpStatus::Infeasible => {
                    self.nodes[id].state = NodeState::Infeasible;
                    return Ok(NodeResult::Infeasible);
                }
                LpStatus::Unbounded => return Err(SolveError::UnboundedRelaxation),
                LpStatus::Optimal => {}
            }
            let value = solution.objective_value;
            self.nodes[id].lp_value = Some(self.flip * value);
            if !self.disable_bound_fathoming {
                if let Some(inc) = self.incumbent_value() {
                    if value >= inc - 1e-9 {
                        self.nodes[id].state = NodeState::Fathomed;
                        return Ok(NodeResult::Fathomed(value));
                    }
                }
            }
            if !self.is_integral(&solution.primal) {
                self.primals[id] = Some(solution.primal);
                return Ok(NodeResult::Fractional { value });
            }

            let snapped = self.snap(&solution.primal);
            if let Some(cb) = self.callback.as_deref_mut() {
                let candidate = Assignment::new(snapped.clone());
                let cuts = cb(&candidate);
                if !cuts.is_empty() {
                    for cut in cuts {
                        self.work.check_constraint(&cut)?;
                        if cut.violation(&snapped) <= 1e-6 {
                            return Err(SolveError::CallbackConstraintNotViolated {
                                label: cut.label.clone(),
                                lhs: cut.lhs_value(&snapped),
                                symbol: cut.comparator.symbol(),
                                rhs: cut.rhs,
                            });
                        }
                        self.pool.push(cut.to_dense_row(self.work.num_vars()));
                        self.pool_defs.push(cut);
                        self.lazy_added += 1;
                    }
                    // Candidate discarded; same node, richer LP.
                    continue;
                }
            }

            let value = self.objective_of(&snapped);
            let better = match self.incumbent_value() {
                None => true,
                Some(inc) => value < inc - 1e-9,
            };
            if better {
                self.incumbent = Some((snapped, value, id));
                self.ub_history
                    .push((self.nodes_explored, self.flip * value));
                self.log_line()?;
            }
            self.nodes[id].state = NodeState::Integral;
            return Ok(NodeResult::Integral(value));
        }
    }

    /// Position in `open` of the next node to expand, per the strategy.
    fn pick_next(&self) -> Option<usize> {
        if self.open.is_empty() {
            return None;
        }
        let value = |pos: usize| {
            let node = &self.nodes[self.open[pos]];
            (
                self.flip * node.lp_value.expect("open nodes are solved"),
                node.depth,
                node.id,
            )
        };
        let mut best = 0;
        for pos in 1..self.open.len() {
            let (bv, bd, bi) = value(best);
            let (cv, cd, ci) = value(pos);
            let take = match self.config.node_strategy {
                NodeStrategy::BestBound => cv < bv || (cv == bv && ci < bi),
                NodeStrategy::DepthFirst => cd > bd || (cd == bd && ci < bi),
                NodeStrategy::BreadthFirst => cd < bd || (cd == bd && ci < bi),
            };
            if take {
                best = pos;
            }
        }
        Some(best)
    }

    fn run(mut self) -> Result<MilpOutcome, SolveError> {
        self.nodes.push(NodeRecord::root());
        self.primals.push(None);
        self.rows_seen.push(0);

        let status = self.search()?;

        if cfg!(debug_assertions) {
            if let Some((point, _, _)) = &self.incumbent {
                let eval = self.work.evaluate(&Assignment::new(point.clone()), 1e-6)?;
                debug_assert!(eval.feasible && eval.integral, "incumbent must be feasible");
                debug_assert!(
                    self.pool_defs.iter().all(|c| c.violation(point) <= 1e-6),
                    "incumbent must satisfy every lazy constraint"
                );
            }
        }

        let incumbent = self.incumbent.take().map(|(point, value, node)| Incumbent {
            assignment: Assignment::new(point),
            value: self.flip * value,
            found_at_node: node,
        });
        Ok(MilpOutcome {
            status,
            incumbent,
            stats: SolveStats {
                nodes_explored: self.nodes_explored,
                lb_history: std::mem::take(&mut self.lb_history),
                ub_history: std::mem::take(&mut self.ub_history),
                runtime: self.start.elapsed().as_secs_f64(),
                status,
                lazy_constraints_added: self.lazy_added,
            },
        })
    }

    fn search(&mut self) -> Result<SolveStatus, SolveError> {
        match self.solve_node(0)? {
            NodeResult::TimedOut => return Ok(SolveStatus::TimeLimit),
            NodeResult::Infeasible => return Ok(SolveStatus::Infeasible),
            NodeResult::Integral(value) => {
                self.push_lb(value)?;
                return Ok(SolveStatus::Optimal);
            }
            NodeResult::Fathomed(_) => unreachable!("nothing to fathom against at the root"),
            NodeResult::Fractional { value } => {
                self.open.push(0);
                self.push_lb(value)?;
            }
        }

        loop {
            if self.open.is_empty() {
                return Ok(match self.incumbent_value() {
                    Some(inc) => {
                        self.push_lb(inc)?;
                        SolveStatus::Optimal
                    }
                    None => SolveStatus::Infeasible,
                });
            }
            let lb = self.global_lb().expect("open frontier implies a bound");
            self.push_lb(lb)?;
            if let Some(inc) = self.incumbent_value() {
                let gap = current_gap(Some(inc), Some(lb));
                if gap <= self.config.rel_gap_tol {
                    return Ok(if gap <= 1e-12 {
                        SolveStatus::Optimal
                    } else {
                        SolveStatus::GapLimit
                    });
                }
            }
            if self
                .config
                .node_limit
                .is_some_and(|limit| self.nodes_explored >= limit)
            {
                return Ok(SolveStatus::NodeLimit);
            }
            if self.out_of_time() {
                return Ok(SolveStatus::TimeLimit);
            }

            let pos = self.pick_next().expect("frontier is nonempty");
            let id = self.open.swap_remove(pos);

            // Lazy rows added since this node was solved invalidate its
            // stored value; solve again before deciding anything.
            if self.rows_seen[id] < self.pool.len() {
                match self.solve_node(id)? {
                    NodeResult::TimedOut => return Ok(SolveStatus::TimeLimit),
                    NodeResult::Infeasible | NodeResult::Fathomed(_) | NodeResult::Integral(_) => {
                        continue
                    }
                    NodeResult::Fractional { .. } => {}
                }
            } else if !self.disable_bound_fathoming {
                if let Some(inc) = self.incumbent_value() {
                    let value = self.flip * self.nodes[id].lp_value.expect("solved");
                    if value >= inc - 1e-9 {
                        self.nodes[id].state = NodeState::Fathomed;
                        continue;
                    }
                }
            }

            let primal = self.primals[id].clone().expect("fractional node has a point");
            let var = select_branch_var(
                &primal,
                &self.work,
                self.config.branch_rule,
                self.config.integrality_tol,
                &mut self.rng,
            )
            .expect("fractional node has a fractional integer variable");

            self.nodes[id].state = NodeState::Explored;
            self.primals[id] = None;
            self.nodes_explored += 1;

            let first_id = self.nodes.len();
            let (le, ge) = branch(&self.nodes[id], var, primal[var], first_id)?;
            let ordered = match self.config.child_order {
                ChildOrder::LeFirst => [le, ge],
                ChildOrder::GeFirst => [ge, le],
            };
            let parent_value = self.flip * self.nodes[id].lp_value.expect("solved");
            for mut child in ordered {
                child.id = self.nodes.len();
                let cid = child.id;
                self.nodes.push(child);
                self.primals.push(None);
                self.rows_seen.push(0);
                match self.solve_node(cid)? {
                    NodeResult::TimedOut => return Ok(SolveStatus::TimeLimit),
                    NodeResult::Infeasible | NodeResult::Integral(_) => {}
                    NodeResult::Fathomed(value) => {
                        debug_assert!(
                            value >= parent_value - 1e-7,
                            "child relaxation may not improve on its parent"
                        );
                    }
                    NodeResult::Fractional { value } => {
                        debug_assert!(
                            value >= parent_value - 1e-7,
                            "child relaxation may not improve on its parent"
                        );
                        self.open.push(cid);
                    }
                }
            }
        }
    }
}
