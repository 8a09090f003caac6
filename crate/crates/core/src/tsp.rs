//! Traveling-salesman models over city tables: assignment relaxations,
//! explicit and lazily separated subtour elimination, and tour utilities.

use crate::bnb::{solve_milp, SolveError, SolveStats, SolveStatus, SolverConfig};
use crate::lp::{Comparator, Sense};
use crate::model::{Assignment, LinearConstraintDef, ModelDef, ModelError, VariableDef};
use itertools::Itertools;
use rand::Rng;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;
use thiserror::Error;

/// Scale factor turning straight-line coordinate distance into miles.
pub const MILES_PER_DEGREE: f64 = 62.36;

/// An arc value above this threshold counts as a chosen arc when decoding
/// relaxation points into cycles.
pub const ARC_ON_THRESHOLD: f64 = 0.99;

/// Hard cap on the explicitly enumerated subtour model; beyond this the
/// constraint count explodes and lazy separation is the only sane route.
pub const FULL_SEC_MAX_CITIES: usize = 18;

#[derive(Debug, Error)]
pub enum TspError {
    #[error("failed to read city data: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: duplicate city name `{name}`")]
    DuplicateCity { line: usize, name: String },
    #[error("asked for {wanted} cities but the data has only {available}")]
    NotEnoughCities { wanted: usize, available: usize },
    #[error("need at least {min} cities, got {got}")]
    TooFewCities { min: usize, got: usize },
    #[error("distance from city {i} to city {j} must be positive and finite, got {value}")]
    BadDistance { i: usize, j: usize, value: f64 },
    #[error("subtour subset must have between 2 and n-1 cities, got {got} with n={n}")]
    BadSubset { got: usize, n: usize },
    #[error("subset refers to city index {index}, but there are only {n} cities")]
    SubsetIndex { index: usize, n: usize },
    #[error(
        "an explicit subtour model over {n} cities needs {subsets} constraints; \
         capped at {max} cities — use lazy separation instead"
    )]
    TooManyForFullSec { n: usize, subsets: u128, max: usize },
    #[error("arc values have {got} entries; an {n}-city arc model has {expected}")]
    ArcCount { got: usize, expected: usize, n: usize },
    #[error("city {city} selects {found} outgoing arcs above the threshold; expected exactly 1")]
    ArcDegree { city: usize, found: usize },
    #[error("arcs starting from city {start} merge into an earlier cycle instead of closing")]
    NotCycles { start: usize },
    #[error("a tour over {n} cities must visit each exactly once")]
    NotATour { n: usize },
    #[error("solver stopped ({status:?}) before finding any tour")]
    NoTour { status: SolveStatus },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Straight-line distance in miles between two coordinate pairs.
pub fn distance_miles(a: (f64, f64), b: (f64, f64)) -> f64 {
    MILES_PER_DEGREE * ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Cities in file order: a name and a coordinate pair each.
#[derive(Debug, Clone)]
pub struct CityTable {
    pub names: Vec<String>,
    pub coords: Vec<(f64, f64)>,
}

impl CityTable {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Read city rows from `path`; `limit` keeps only the first so-many rows.
///
/// Each line must have exactly four comma-separated fields: a row id (kept
/// only for human readers), the city name, and two coordinates. Blank lines
/// are skipped.
pub fn read_cities(path: impl AsRef<Path>, limit: Option<usize>) -> Result<CityTable, TspError> {
    let file = File::open(path)?;
    read_cities_from_reader(BufReader::new(file), limit)
}

/// Same as [`read_cities`], from any buffered reader.
pub fn read_cities_from_reader(
    reader: impl BufRead,
    limit: Option<usize>,
) -> Result<CityTable, TspError> {
    let mut names: Vec<String> = Vec::new();
    let mut coords = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(TspError::Parse {
                line: lineno,
                msg: format!("expected 4 comma-separated fields, found {}", fields.len()),
            });
        }
        let name = fields[1].trim();
        if name.is_empty() {
            return Err(TspError::Parse {
                line: lineno,
                msg: "empty city name".into(),
            });
        }
        let parse = |field: &str, what: &str| -> Result<f64, TspError> {
            let value: f64 = field.trim().parse().map_err(|_| TspError::Parse {
                line: lineno,
                msg: format!("cannot parse {what} `{}` as a number", field.trim()),
            })?;
            if !value.is_finite() {
                return Err(TspError::Parse {
                    line: lineno,
                    msg: format!("{what} must be finite"),
                });
            }
            Ok(value)
        };
        let x = parse(fields[2], "first coordinate")?;
        let y = parse(fields[3], "second coordinate")?;
        if names.iter().any(|n| n == name) {
            return Err(TspError::DuplicateCity {
                line: lineno,
                name: name.to_string(),
            });
        }
        names.push(name.to_string());
        coords.push((x, y));
        if limit.is_some_and(|want| names.len() == want) {
            break;
        }
    }
    if let Some(want) = limit {
        if names.len() < want {
            return Err(TspError::NotEnoughCities {
                wanted: want,
                available: names.len(),
            });
        }
    }
    Ok(CityTable { names, coords })
}

/// Uniformly scattered cities on a 10 x 10 square, named C1, C2, ...
pub fn random_cities<R: Rng>(n: usize, rng: &mut R) -> CityTable {
    let coords: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)))
        .collect();
    CityTable {
        names: (1..=n).map(|i| format!("C{i}")).collect(),
        coords,
    }
}

/// Pairwise distances in miles, city order matching the source table.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    pub names: Vec<String>,
    miles: Vec<f64>,
    n: usize,
    symmetric: bool,
}

impl DistanceMatrix {
    /// Straight-line distances between every pair in the table.
    pub fn from_cities(cities: &CityTable) -> Result<Self, TspError> {
        Self::build(cities.names.clone(), |i, j| {
            distance_miles(cities.coords[i], cities.coords[j])
        })
    }

    /// Arbitrary (possibly asymmetric) distances from a function of the
    /// endpoint indices. Off-diagonal entries must be positive and finite.
    pub fn from_fn(
        names: Vec<String>,
        f: impl Fn(usize, usize) -> f64,
    ) -> Result<Self, TspError> {
        Self::build(names, f)
    }

    fn build(names: Vec<String>, f: impl Fn(usize, usize) -> f64) -> Result<Self, TspError> {
        let n = names.len();
        let mut miles = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let d = f(i, j);
                if !d.is_finite() || d <= 0.0 {
                    return Err(TspError::BadDistance { i, j, value: d });
                }
                miles[i * n + j] = d;
            }
        }
        let symmetric = (0..n)
            .cartesian_product(0..n)
            .all(|(i, j)| (miles[i * n + j] - miles[j * n + i]).abs() <= 1e-9);
        Ok(DistanceMatrix {
            names,
            miles,
            n,
            symmetric,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.miles[i * self.n + j]
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }
}

/// Column index of the arc i -> j in an n-city arc model: arcs are laid out
/// origin-major, skipping the missing self-arc.
pub fn arc_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < n && j < n && i != j);
    i * (n - 1) + if j < i { j } else { j - 1 }
}

/// Endpoints (origin, destination) of the arc at `index`; inverse of
/// [`arc_index`].
pub fn arc_ends(n: usize, index: usize) -> (usize, usize) {
    let i = index / (n - 1);
    let r = index % (n - 1);
    (i, if r < i { r } else { r + 1 })
}

fn arc_model_base(dm: &DistanceMatrix) -> Result<ModelDef, TspError> {
    let n = dm.len();
    if n < 2 {
        return Err(TspError::TooFewCities { min: 2, got: n });
    }
    let mut model = ModelDef::new(Sense::Minimize);
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            model.add_variable(VariableDef::binary(
                format!("x[{}->{}]", dm.names[i], dm.names[j]),
                dm.at(i, j),
            ));
        }
    }
    Ok(model)
}

/// Arc model with only out-degree rows: every city picks exactly one
/// outgoing arc, nothing constrains arrivals. A cheap lower-bound model —
/// each city simply hops to its nearest neighbor.
pub fn build_one_way_assignment(dm: &DistanceMatrix) -> Result<ModelDef, TspError> {
    let n = dm.len();
    let mut model = arc_model_base(dm)?;
    for i in 0..n {
        let terms = (0..n)
            .filter(|&j| j != i)
            .map(|j| (arc_index(n, i, j), 1.0))
            .collect();
        model = model.add_constraint(LinearConstraintDef::new(
            terms,
            Comparator::Eq,
            1.0,
            format!("out[{}]", dm.names[i]),
        ))?;
    }
    Ok(model)
}

/// Arc model with both degree-row families: one arc out of and one arc into
/// every city. Integer points are disjoint cycle covers; subtour elimination
/// is what turns them into single tours.
pub fn build_two_way_assignment(dm: &DistanceMatrix) -> Result<ModelDef, TspError> {
    let n = dm.len();
    let mut model = build_one_way_assignment(dm)?;
    for j in 0..n {
        let terms = (0..n)
            .filter(|&i| i != j)
            .map(|i| (arc_index(n, i, j), 1.0))
            .collect();
        model = model.add_constraint(LinearConstraintDef::new(
            terms,
            Comparator::Eq,
            1.0,
            format!("in[{}]", dm.names[j]),
        ))?;
    }
    Ok(model)
}

/// Every city subset that the explicit subtour model needs a constraint for:
/// sizes 2 through n/2, in order of size then lexicographic.
pub fn enumerate_sec_subsets(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for size in 2..=n / 2 {
        out.extend((0..n).combinations(size));
    }
    out
}

/// Subtour elimination for `subset`: at least one chosen arc must leave the
/// subset. Requires 2 <= |subset| < n.
pub fn sec_constraint(n: usize, subset: &[usize]) -> Result<LinearConstraintDef, TspError> {
    if subset.len() < 2 || subset.len() >= n {
        return Err(TspError::BadSubset {
            got: subset.len(),
            n,
        });
    }
    let mut inside = vec![false; n];
    for &i in subset {
        if i >= n {
            return Err(TspError::SubsetIndex { index: i, n });
        }
        inside[i] = true;
    }
    let mut terms = Vec::new();
    for &i in subset {
        for j in 0..n {
            if !inside[j] {
                terms.push((arc_index(n, i, j), 1.0));
            }
        }
    }
    let label = format!("sec[{}]", subset.iter().sorted().join("-"));
    Ok(LinearConstraintDef::new(terms, Comparator::Ge, 1.0, label))
}

fn count_sec_subsets(n: u128) -> u128 {
    let mut total = 0u128;
    for size in 2..=n / 2 {
        let mut c = 1u128;
        for k in 0..size {
            c = c * (n - k) / (k + 1);
        }
        total += c;
    }
    total
}

/// Two-way assignment plus every subtour constraint up front. Only viable
/// for small instances, hence the city cap.
pub fn build_full_sec_model(dm: &DistanceMatrix) -> Result<ModelDef, TspError> {
    let n = dm.len();
    if n > FULL_SEC_MAX_CITIES {
        return Err(TspError::TooManyForFullSec {
            n,
            subsets: count_sec_subsets(n as u128),
            max: FULL_SEC_MAX_CITIES,
        });
    }
    let mut model = build_two_way_assignment(dm)?;
    for subset in enumerate_sec_subsets(n) {
        model = model.add_constraint(sec_constraint(n, &subset)?)?;
    }
    Ok(model)
}

/// Decode arc values into the cycles they trace. Every city must select
/// exactly one outgoing arc above `threshold`; cycles are reported starting
/// from the earliest unvisited city, in file order.
pub fn extract_cycles(
    values: &[f64],
    n: usize,
    threshold: f64,
) -> Result<Vec<Vec<usize>>, TspError> {
    let expected = n * (n - 1);
    if values.len() != expected {
        return Err(TspError::ArcCount {
            got: values.len(),
            expected,
            n,
        });
    }
    let mut successor = vec![usize::MAX; n];
    for i in 0..n {
        let outgoing: Vec<usize> = (0..n)
            .filter(|&j| j != i && values[arc_index(n, i, j)] > threshold)
            .collect();
        if outgoing.len() != 1 {
            return Err(TspError::ArcDegree {
                city: i,
                found: outgoing.len(),
            });
        }
        successor[i] = outgoing[0];
    }
    let mut visited = vec![false; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        if visited[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut at = start;
        loop {
            if visited[at] {
                // Only closing back on this cycle's own start is legal.
                if at == start {
                    break;
                }
                return Err(TspError::NotCycles { start });
            }
            visited[at] = true;
            cycle.push(at);
            at = successor[at];
        }
        cycles.push(cycle);
    }
    Ok(cycles)
}

/// Which subtour constraints to emit when a candidate splits into cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubtourMode {
    /// One constraint, for the cycle containing the earliest city.
    FirstCycle,
    /// One constraint per cycle.
    AllCycles,
    /// One constraint, for the fewest-city cycle (ties: earliest).
    Smallest,
    /// One constraint, for the most-city cycle (ties: earliest).
    Largest,
}

/// Separation routine: decode `values` into cycles and emit subtour
/// constraints per `mode`. A single full-length cycle yields no constraints.
pub fn separate_subtours(
    values: &[f64],
    n: usize,
    mode: SubtourMode,
) -> Result<Vec<LinearConstraintDef>, TspError> {
    let cycles = extract_cycles(values, n, ARC_ON_THRESHOLD)?;
    if cycles.len() <= 1 {
        return Ok(Vec::new());
    }
    let pick_by = |better: fn(usize, usize) -> bool| {
        let mut best = 0;
        for (idx, cycle) in cycles.iter().enumerate().skip(1) {
            if better(cycle.len(), cycles[best].len()) {
                best = idx;
            }
        }
        best
    };
    let chosen: Vec<&Vec<usize>> = match mode {
        SubtourMode::FirstCycle => vec![&cycles[0]],
        SubtourMode::AllCycles => cycles.iter().collect(),
        SubtourMode::Smallest => vec![&cycles[pick_by(|a, b| a < b)]],
        SubtourMode::Largest => vec![&cycles[pick_by(|a, b| a > b)]],
    };
    chosen
        .into_iter()
        .map(|cycle| sec_constraint(n, cycle))
        .collect()
}

/// A closed visiting order: a permutation of all cities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tour {
    pub order: Vec<usize>,
}

impl Tour {
    /// Validate that `order` visits each of `n` cities exactly once.
    pub fn new(order: Vec<usize>, n: usize) -> Result<Self, TspError> {
        let mut seen = vec![false; n];
        if order.len() != n {
            return Err(TspError::NotATour { n });
        }
        for &city in &order {
            if city >= n || seen[city] {
                return Err(TspError::NotATour { n });
            }
            seen[city] = true;
        }
        Ok(Tour { order })
    }

    /// Total directed length, including the closing arc back to the start.
    pub fn length(&self, dm: &DistanceMatrix) -> f64 {
        let n = self.order.len();
        (0..n)
            .map(|k| dm.at(self.order[k], self.order[(k + 1) % n]))
            .sum()
    }
}

/// Solve the TSP with lazy subtour separation ([`SubtourMode::FirstCycle`]).
pub fn solve_tsp_lazy(
    dm: &DistanceMatrix,
    config: &SolverConfig,
) -> Result<(Tour, f64, SolveStats), TspError> {
    solve_tsp_lazy_with_mode(dm, config, SubtourMode::FirstCycle)
}

/// Solve the TSP by branch and bound over the two-way assignment model,
/// cutting off every cycle-cover candidate through the lazy callback.
pub fn solve_tsp_lazy_with_mode(
    dm: &DistanceMatrix,
    config: &SolverConfig,
    mode: SubtourMode,
) -> Result<(Tour, f64, SolveStats), TspError> {
    let n = dm.len();
    let model = build_two_way_assignment(dm)?;
    let mut separation_failure: Option<TspError> = None;
    let mut callback = |candidate: &Assignment| -> Vec<LinearConstraintDef> {
        match separate_subtours(&candidate.values, n, mode) {
            Ok(cuts) => cuts,
            Err(e) => {
                separation_failure = Some(e);
                Vec::new()
            }
        }
    };
    let outcome = solve_milp(&model, config, Some(&mut callback))?;
    if let Some(e) = separation_failure {
        return Err(e);
    }
    let Some(incumbent) = outcome.incumbent else {
        return Err(TspError::NoTour {
            status: outcome.status,
        });
    };
    let mut cycles = extract_cycles(&incumbent.assignment.values, n, ARC_ON_THRESHOLD)?;
    if cycles.len() != 1 {
        return Err(TspError::NotATour { n });
    }
    let tour = Tour::new(cycles.pop().expect("one cycle"), n)?;
    Ok((tour, incumbent.value, outcome.stats))
}

/// Write the tour as one `origin -> destination` line per arc, closing arc
/// included.
pub fn write_tour_lines(
    tour: &Tour,
    names: &[String],
    out: &mut dyn Write,
) -> io::Result<()> {
    let n = tour.order.len();
    for k in 0..n {
        let a = tour.order[k];
        let b = tour.order[(k + 1) % n];
        writeln!(out, "{} -> {}", names[a], names[b])?;
    }
    Ok(())
}

/// Write the tour as CSV rows `origin,destination,miles` with a header.
pub fn write_tour_edges_csv(
    tour: &Tour,
    dm: &DistanceMatrix,
    out: &mut dyn Write,
) -> io::Result<()> {
    writeln!(out, "origin,destination,miles")?;
    let n = tour.order.len();
    for k in 0..n {
        let a = tour.order[k];
        let b = tour.order[(k + 1) % n];
        writeln!(out, "{},{},{:.1}", dm.names[a], dm.names[b], dm.at(a, b))?;
    }
    Ok(())
}
