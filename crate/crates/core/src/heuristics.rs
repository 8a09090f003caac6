//! Construction and improvement heuristics: nearest-neighbor tours (greedy
//! and randomized), 2-opt local search, and a GRASP loop for set covering.

use crate::problems::SetCoverInstance;
use crate::tsp::{DistanceMatrix, Tour};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Improvements smaller than this are treated as noise, so local search
/// cannot loop forever on float dust.
const IMPROVEMENT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum HeuristicError {
    #[error("the distance matrix is empty")]
    EmptyMatrix,
    #[error("no city is named `{name}`")]
    UnknownCity { name: String },
    #[error("tour visits {got} cities but the matrix has {expected}")]
    TourSize { got: usize, expected: usize },
    #[error("the candidate list must keep at least one entry")]
    EmptyRcl,
    #[error("at least one iteration is required")]
    NoIterations,
}

fn city_index(dm: &DistanceMatrix, name: &str) -> Result<usize, HeuristicError> {
    dm.names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| HeuristicError::UnknownCity { name: name.into() })
}

/// Knobs for the randomized constructions: how many of the best candidates
/// stay in the running at each step, and the seed that picks among them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RclConfig {
    pub rcl_size: usize,
    pub seed: u64,
}

impl Default for RclConfig {
    fn default() -> Self {
        RclConfig {
            rcl_size: 3,
            seed: 0,
        }
    }
}

/// Nearest-neighbor tour from the city named `start`: always move to the
/// closest unvisited city, earliest city winning ties.
pub fn greedy_tour(dm: &DistanceMatrix, start: &str) -> Result<Tour, HeuristicError> {
    if dm.is_empty() {
        return Err(HeuristicError::EmptyMatrix);
    }
    Ok(greedy_from(dm, city_index(dm, start)?))
}

fn greedy_from(dm: &DistanceMatrix, start: usize) -> Tour {
    let n = dm.len();
    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    let mut here = start;
    visited[here] = true;
    order.push(here);
    for _ in 1..n {
        let mut next = None;
        let mut best = f64::INFINITY;
        for j in 0..n {
            if !visited[j] && dm.at(here, j) < best {
                best = dm.at(here, j);
                next = Some(j);
            }
        }
        here = next.expect("some city is always left until the tour is full");
        visited[here] = true;
        order.push(here);
    }
    Tour::new(order, n).expect("nearest neighbor visits every city once")
}

/// Best nearest-neighbor tour over every possible start, with its length.
/// Earlier starts win ties.
pub fn multi_start_greedy(dm: &DistanceMatrix) -> Result<(Tour, f64), HeuristicError> {
    let mut best: Option<(Tour, f64)> = None;
    for start in 0..dm.len() {
        let tour = greedy_from(dm, start);
        let length = tour.length(dm);
        if best.as_ref().map_or(true, |(_, b)| length < *b) {
            best = Some((tour, length));
        }
    }
    best.ok_or(HeuristicError::EmptyMatrix)
}

/// Randomized nearest neighbor from the city named `start`: at each step the
/// `rcl_size` closest unvisited cities (ties by index) form the candidate
/// list, and one of them is drawn uniformly. A fresh generator is seeded per
/// call, so the same config always rebuilds the same tour. An `rcl_size` of 1
/// is plain greedy.
pub fn semi_greedy_tour(
    dm: &DistanceMatrix,
    start: &str,
    cfg: &RclConfig,
) -> Result<Tour, HeuristicError> {
    if dm.is_empty() {
        return Err(HeuristicError::EmptyMatrix);
    }
    if cfg.rcl_size == 0 {
        return Err(HeuristicError::EmptyRcl);
    }
    let n = dm.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    let mut here = city_index(dm, start)?;
    visited[here] = true;
    order.push(here);
    for _ in 1..n {
        let mut candidates: Vec<usize> = (0..n).filter(|&j| !visited[j]).collect();
        candidates.sort_by(|&a, &b| {
            dm.at(here, a)
                .partial_cmp(&dm.at(here, b))
                .expect("distances are finite")
                .then(a.cmp(&b))
        });
        candidates.truncate(cfg.rcl_size);
        here = candidates[rng.gen_range(0..candidates.len())];
        visited[here] = true;
        order.push(here);
    }
    Ok(Tour::new(order, n).expect("semi-greedy visits every city once"))
}

/// Whether 2-opt applies the first improving exchange it sees or sweeps all
/// pairs and applies the best one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Acceptance {
    FirstImprovement,
    BestImprovement,
}

/// Length change from reversing `order[i+1..=j]`. Symmetric matrices only
/// swap two arcs; asymmetric ones also flip every arc inside the segment.
fn reversal_delta(order: &[usize], i: usize, j: usize, dm: &DistanceMatrix) -> f64 {
    let n = order.len();
    let a = order[i];
    let b = order[i + 1];
    let c = order[j];
    let d = order[(j + 1) % n];
    let swapped = dm.at(a, c) + dm.at(b, d) - dm.at(a, b) - dm.at(c, d);
    if dm.is_symmetric() {
        return swapped;
    }
    let mut delta = swapped;
    for t in (i + 1)..j {
        delta += dm.at(order[t + 1], order[t]) - dm.at(order[t], order[t + 1]);
    }
    delta
}

/// 2-opt local search: keep exchanging pairs of arcs (reversing the segment
/// between them) while that shortens the tour, and return the local optimum
/// with its length. The starting city stays in place.
pub fn two_opt(
    tour: &Tour,
    dm: &DistanceMatrix,
    acceptance: Acceptance,
) -> Result<(Tour, f64), HeuristicError> {
    let n = dm.len();
    if n == 0 {
        return Err(HeuristicError::EmptyMatrix);
    }
    if tour.order.len() != n {
        return Err(HeuristicError::TourSize {
            got: tour.order.len(),
            expected: n,
        });
    }
    let mut order = tour.order.clone();
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        'scan: for i in 0..n.saturating_sub(1) {
            for j in (i + 1)..n {
                if i == 0 && j == n - 1 {
                    // Both exchanged arcs would share the start city.
                    continue;
                }
                let delta = reversal_delta(&order, i, j, dm);
                if delta < -IMPROVEMENT_TOL
                    && best.map_or(true, |(b, _, _)| delta < b)
                {
                    best = Some((delta, i, j));
                    if acceptance == Acceptance::FirstImprovement {
                        break 'scan;
                    }
                }
            }
        }
        match best {
            Some((_, i, j)) => order[i + 1..=j].reverse(),
            None => break,
        }
    }
    let tour = Tour::new(order, n).expect("reversals preserve the permutation");
    let length = tour.length(dm);
    Ok((tour, length))
}

/// What a GRASP run settled on: the chosen set indices (sorted), their total
/// cost, and the cost each iteration produced.
#[derive(Debug, Clone)]
pub struct GraspResult {
    pub chosen: Vec<usize>,
    pub total_cost: f64,
    pub iteration_values: Vec<f64>,
}

/// GRASP for set covering. Each iteration builds a cover by repeatedly
/// drawing from the `rcl_size` sets that cover the most still-uncovered
/// items (ties to the lower index), then drops redundant picks, expensive
/// ones first. The best cover over all iterations wins.
pub fn grasp_set_cover(
    inst: &SetCoverInstance,
    iterations: usize,
    cfg: &RclConfig,
) -> Result<GraspResult, HeuristicError> {
    if iterations == 0 {
        return Err(HeuristicError::NoIterations);
    }
    if cfg.rcl_size == 0 {
        return Err(HeuristicError::EmptyRcl);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut iteration_values = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let chosen = construct_cover(inst, cfg.rcl_size, &mut rng);
        let chosen = drop_redundant(inst, chosen);
        let cost: f64 = chosen.iter().map(|&s| inst.sets[s].cost).sum();
        iteration_values.push(cost);
        if best.as_ref().map_or(true, |(_, b)| cost < *b) {
            best = Some((chosen, cost));
        }
    }
    let (chosen, total_cost) = best.expect("at least one iteration ran");
    Ok(GraspResult {
        chosen,
        total_cost,
        iteration_values,
    })
}

/// One randomized greedy cover: rank unused sets by how many uncovered items
/// they would add, keep the top few, draw one.
fn construct_cover(inst: &SetCoverInstance, rcl_size: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut covered = vec![false; inst.num_items];
    let mut uncovered = inst.num_items;
    let mut used = vec![false; inst.sets.len()];
    let mut chosen = Vec::new();
    while uncovered > 0 {
        let mut candidates: Vec<(usize, usize)> = inst
            .sets
            .iter()
            .enumerate()
            .filter(|&(s, _)| !used[s])
            .map(|(s, set)| (s, set.items.iter().filter(|&&i| !covered[i]).count()))
            .filter(|&(_, gain)| gain > 0)
            .collect();
        candidates.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        candidates.truncate(rcl_size);
        let (pick, _) = candidates[rng.gen_range(0..candidates.len())];
        used[pick] = true;
        chosen.push(pick);
        for &item in &inst.sets[pick].items {
            if !covered[item] {
                covered[item] = true;
                uncovered -= 1;
            }
        }
    }
    chosen
}

/// Strip sets whose items are all covered by the rest, trying the expensive
/// ones first (ties to the lower index). Returns the survivors sorted.
fn drop_redundant(inst: &SetCoverInstance, mut chosen: Vec<usize>) -> Vec<usize> {
    let mut order = chosen.clone();
    order.sort_by(|&a, &b| {
        inst.sets[b]
            .cost
            .partial_cmp(&inst.sets[a].cost)
            .expect("costs are finite")
            .then(a.cmp(&b))
    });
    for candidate in order {
        let mut covered = vec![false; inst.num_items];
        for &s in chosen.iter().filter(|&&s| s != candidate) {
            for &item in &inst.sets[s].items {
                covered[item] = true;
            }
        }
        if covered.iter().all(|&c| c) {
            chosen.retain(|&s| s != candidate);
        }
    }
    chosen.sort_unstable();
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bnb::{solve_milp, SolverConfig};
    use crate::problems::build_set_cover_model;
    use crate::tsp::{random_cities, read_cities, solve_tsp_lazy};
    use approx::assert_abs_diff_eq;
    use itertools::Itertools;

    fn file_cities(limit: usize) -> DistanceMatrix {
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/cities.csv");
        let cities = read_cities(&path, Some(limit)).unwrap();
        DistanceMatrix::from_cities(&cities).unwrap()
    }

    fn grid(points: &[(f64, f64)]) -> DistanceMatrix {
        let names = (0..points.len()).map(|i| format!("P{i}")).collect();
        DistanceMatrix::from_fn(names, |i, j| {
            let (xi, yi) = points[i];
            let (xj, yj) = points[j];
            ((xi - xj).powi(2) + (yi - yj).powi(2)).sqrt()
        })
        .unwrap()
    }

    #[test]
    fn greedy_from_new_york_hugs_the_east_coast_first() {
        let dm = file_cities(5);
        let tour = greedy_tour(&dm, "New York-NY").unwrap();
        // New York -> Philadelphia -> Chicago -> Houston -> Los Angeles.
        assert_eq!(tour.order, vec![0, 4, 2, 3, 1]);
        assert_abs_diff_eq!(tour.length(&dm), 6010.8, epsilon = 0.5);
    }

    #[test]
    fn greedy_breaks_ties_toward_the_earlier_city() {
        let d = [
            [0.0, 5.0, 5.0, 9.0],
            [5.0, 0.0, 2.0, 2.0],
            [5.0, 2.0, 0.0, 7.0],
            [9.0, 2.0, 7.0, 0.0],
        ];
        let dm = grid_from(&d);
        let tour = greedy_tour(&dm, "P0").unwrap();
        assert_eq!(tour.order, vec![0, 1, 2, 3]);
    }

    fn grid_from(d: &[[f64; 4]; 4]) -> DistanceMatrix {
        let names = (0..4).map(|i| format!("P{i}")).collect();
        DistanceMatrix::from_fn(names, |i, j| d[i][j]).unwrap()
    }

    #[test]
    fn multi_start_finds_the_chicago_start_and_two_opt_closes_the_rest() {
        let dm = file_cities(5);
        let (tour, length) = multi_start_greedy(&dm).unwrap();
        // Starting from Chicago is the best greedy run on these five cities,
        // but it is still not optimal.
        assert_eq!(tour.order[0], 2);
        assert_abs_diff_eq!(length, 5791.9, epsilon = 0.5);

        let (improved, improved_length) = two_opt(&tour, &dm, Acceptance::FirstImprovement).unwrap();
        assert!(improved_length <= length + 1e-9);
        let (_, reference, _) = solve_tsp_lazy(&dm, &SolverConfig::default()).unwrap();
        assert_abs_diff_eq!(improved_length, reference, epsilon = 1e-6);
        assert_abs_diff_eq!(improved_length, 5772.1, epsilon = 0.5);
        assert_abs_diff_eq!(improved.length(&dm), improved_length, epsilon = 1e-9);
    }

    #[test]
    fn two_opt_uncrosses_the_bowtie() {
        // Visiting the square's corners diagonally crosses in the middle;
        // one exchange restores the perimeter.
        let dm = grid(&[(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)]);
        let crossed = Tour::new(vec![0, 1, 2, 3], 4).unwrap();
        assert_abs_diff_eq!(crossed.length(&dm), 2.0 + 2.0 * 2f64.sqrt(), epsilon = 1e-12);
        for acceptance in [Acceptance::FirstImprovement, Acceptance::BestImprovement] {
            let (tour, length) = two_opt(&crossed, &dm, acceptance).unwrap();
            assert_abs_diff_eq!(length, 4.0, epsilon = 1e-12);
            assert_eq!(tour.order[0], 0, "the anchor city stays put");
        }
    }

    #[test]
    fn two_opt_handles_one_way_streets() {
        // Going clockwise round the ring costs 1 per hop, anything else 10.
        let names = (0..4).map(|i| format!("R{i}")).collect();
        let dm = DistanceMatrix::from_fn(names, |i, j| {
            if (i + 1) % 4 == j {
                1.0
            } else {
                10.0
            }
        })
        .unwrap();
        assert!(!dm.is_symmetric());
        let awful = Tour::new(vec![0, 2, 1, 3], 4).unwrap();
        assert_abs_diff_eq!(awful.length(&dm), 31.0, epsilon = 1e-12);
        let (tour, length) = two_opt(&awful, &dm, Acceptance::BestImprovement).unwrap();
        assert_eq!(tour.order, vec![0, 1, 2, 3]);
        assert_abs_diff_eq!(length, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(tour.length(&dm), length, epsilon = 1e-12);
    }

    #[test]
    fn two_opt_never_lengthens_random_tours() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for trial in 0..10 {
            let n = 4 + (trial % 5);
            let cities = random_cities(n, &mut rng);
            let dm = DistanceMatrix::from_cities(&cities).unwrap();
            let start = greedy_tour(&dm, &dm.names[0]).unwrap();
            let before = start.length(&dm);
            for acceptance in [Acceptance::FirstImprovement, Acceptance::BestImprovement] {
                let (tour, length) = two_opt(&start, &dm, acceptance).unwrap();
                assert!(length <= before + 1e-9);
                assert_abs_diff_eq!(tour.length(&dm), length, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn singleton_candidate_list_is_plain_greedy() {
        let dm = file_cities(8);
        for seed in 0..5 {
            let cfg = RclConfig {
                rcl_size: 1,
                seed,
            };
            let randomized = semi_greedy_tour(&dm, "New York-NY", &cfg).unwrap();
            let greedy = greedy_tour(&dm, "New York-NY").unwrap();
            assert_eq!(randomized.order, greedy.order);
        }
    }

    #[test]
    fn semi_greedy_is_reproducible_and_seed_sensitive() {
        let dm = file_cities(8);
        let cfg = RclConfig::default();
        let first = semi_greedy_tour(&dm, "New York-NY", &cfg).unwrap();
        let second = semi_greedy_tour(&dm, "New York-NY", &cfg).unwrap();
        assert_eq!(first.order, second.order, "same seed, same tour");
        let tours: Vec<Vec<usize>> = (0..10)
            .map(|seed| {
                semi_greedy_tour(&dm, "New York-NY", &RclConfig { rcl_size: 3, seed })
                    .unwrap()
                    .order
            })
            .collect();
        assert!(
            tours.iter().unique().count() > 1,
            "ten seeds all built the same tour"
        );
    }

    #[test]
    fn bad_arguments_are_reported() {
        let dm = file_cities(5);
        assert!(matches!(
            greedy_tour(&dm, "Atlantis"),
            Err(HeuristicError::UnknownCity { .. })
        ));
        assert!(matches!(
            semi_greedy_tour(&dm, "New York-NY", &RclConfig { rcl_size: 0, seed: 0 }),
            Err(HeuristicError::EmptyRcl)
        ));
        let short = Tour::new(vec![0, 1, 2], 3).unwrap();
        assert!(matches!(
            two_opt(&short, &dm, Acceptance::FirstImprovement),
            Err(HeuristicError::TourSize { got: 3, expected: 5 })
        ));
    }

    fn umbrella_instance() -> SetCoverInstance {
        SetCoverInstance::new(
            5,
            vec![
                (vec![0, 1, 2], 2.0),
                (vec![2, 3], 1.0),
                (vec![3, 4], 1.0),
                (vec![0, 1, 2, 3, 4], 3.5),
                (vec![4], 0.5),
            ],
        )
        .unwrap()
    }

    #[test]
    fn grasp_beats_the_pure_greedy_cover() {
        let inst = umbrella_instance();
        // Pure greedy grabs the five-item umbrella set for 3.5; the optimum
        // pairs the two cheap sets for 3.0. Randomizing the candidate list
        // finds it.
        let greedy = grasp_set_cover(&inst, 1, &RclConfig { rcl_size: 1, seed: 0 }).unwrap();
        assert_abs_diff_eq!(greedy.total_cost, 3.5, epsilon = 1e-12);
        let result = grasp_set_cover(&inst, 30, &RclConfig::default()).unwrap();
        assert_abs_diff_eq!(result.total_cost, 3.0, epsilon = 1e-12);
        assert_eq!(result.chosen, vec![0, 2]);
        assert_eq!(result.iteration_values.len(), 30);
        assert!(result
            .iteration_values
            .iter()
            .all(|&v| v >= result.total_cost - 1e-12));
    }

    #[test]
    fn grasp_covers_everything_without_redundancy() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let inst = crate::problems::random_set_cover(8, 15, 0.35, &mut rng).unwrap();
            let result = grasp_set_cover(&inst, 25, &RclConfig::default()).unwrap();
            let covered_without = |skip: Option<usize>| -> bool {
                let mut covered = vec![false; inst.num_items];
                for &s in result.chosen.iter().filter(|&&s| Some(s) != skip) {
                    for &item in &inst.sets[s].items {
                        covered[item] = true;
                    }
                }
                covered.iter().all(|&c| c)
            };
            assert!(covered_without(None), "cover misses an item");
            for &s in &result.chosen {
                assert!(
                    !covered_without(Some(s)),
                    "set {s} is redundant in the answer"
                );
            }
            // The exact optimum can only be at or below the heuristic.
            let model = build_set_cover_model(&inst).unwrap();
            let config = SolverConfig {
                rel_gap_tol: 0.0,
                ..SolverConfig::default()
            };
            let exact = solve_milp(&model, &config, None)
                .unwrap()
                .incumbent
                .unwrap();
            assert!(result.total_cost >= exact.value - 1e-9);
        }
    }

    #[test]
    fn grasp_degenerate_instances() {
        // A lone set that covers everything is the answer for any seed.
        let lone = SetCoverInstance::new(4, vec![(vec![0, 1, 2, 3], 2.0)]).unwrap();
        for seed in [0, 7, 99] {
            let result = grasp_set_cover(&lone, 3, &RclConfig { rcl_size: 3, seed }).unwrap();
            assert_eq!(result.chosen, vec![0]);
            assert_abs_diff_eq!(result.total_cost, 2.0, epsilon = 1e-12);
        }
        // Three pairwise sets over three items: any two suffice, one cannot.
        let triangle =
            SetCoverInstance::unit_costs(3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        for seed in 0..5 {
            let result =
                grasp_set_cover(&triangle, 4, &RclConfig { rcl_size: 2, seed }).unwrap();
            assert_eq!(result.chosen.len(), 2);
            assert_abs_diff_eq!(result.total_cost, 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn grasp_runs_are_reproducible() {
        let inst = umbrella_instance();
        let cfg = RclConfig { rcl_size: 2, seed: 42 };
        let a = grasp_set_cover(&inst, 10, &cfg).unwrap();
        let b = grasp_set_cover(&inst, 10, &cfg).unwrap();
        assert_eq!(a.chosen, b.chosen);
        assert_eq!(a.iteration_values, b.iteration_values);
        assert!(matches!(
            grasp_set_cover(&inst, 0, &cfg),
            Err(HeuristicError::NoIterations)
        ));
    }
}
