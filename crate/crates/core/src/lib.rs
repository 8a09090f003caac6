//! Self-contained discrete-optimization toolkit: a dense simplex LP core, a
//! branch-and-bound integer-programming engine with lazy constraint callbacks,
//! traveling-salesman models with subtour separation, and the classic
//! construction/improvement heuristics, plus ready-made problem builders.

pub mod bnb;
pub mod heuristics;
pub mod instance_io;
pub mod lp;
pub mod model;
pub mod problems;
pub mod tsp;

pub use bnb::{
    solve_milp, solve_milp_logged, BranchRule, ChildOrder, Incumbent, MilpOutcome, NodeStrategy,
    SolveError, SolveStats, SolveStatus, SolverConfig,
};
pub use heuristics::{
    grasp_set_cover, greedy_tour, multi_start_greedy, semi_greedy_tour, two_opt, Acceptance,
    GraspResult, HeuristicError, RclConfig,
};
pub use instance_io::{
    instance_to_string, parse_instance, read_instance, write_instance, InstanceIoError,
    ProblemInstance,
};
pub use lp::{Comparator, DenseLinearProgram, LpError, LpSolution, LpStatus, Sense, INFINITY};
pub use model::{Assignment, LinearConstraintDef, ModelDef, ModelError, VarDomain, VariableDef};
pub use problems::{
    build_diet_model, build_facility_model, build_knapsack_model, build_set_cover_model,
    canonical_cut, count_solutions, enumerate_best, random_facility, random_knapsack,
    random_set_cover, CoverSet, DietInstance, FacilityInstance, KnapsackInstance, ProblemError,
    SetCoverInstance,
};
pub use tsp::{
    build_full_sec_model, build_one_way_assignment, build_two_way_assignment, distance_miles,
    read_cities, solve_tsp_lazy, solve_tsp_lazy_with_mode, CityTable, DistanceMatrix, SubtourMode,
    Tour, TspError,
};
