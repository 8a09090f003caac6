//! Plain-text instance files: `key: value` scalars plus named CSV blocks,
//! one instance per file. Whatever the generators produce can be written out,
//! read back, and solved later, seeds included.

use crate::problems::{
    DietInstance, FacilityInstance, KnapsackInstance, ProblemError, SetCoverInstance,
};
use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InstanceIoError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

fn parse_err(line: usize, msg: impl Into<String>) -> InstanceIoError {
    InstanceIoError::Parse {
        line,
        msg: msg.into(),
    }
}

/// Any instance the text format can carry.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemInstance {
    Diet(DietInstance),
    Knapsack(KnapsackInstance),
    Facility(FacilityInstance),
    SetCover(SetCoverInstance),
}

impl ProblemInstance {
    /// The `problem:` tag this instance is written under.
    pub fn kind(&self) -> &'static str {
        match self {
            ProblemInstance::Diet(_) => "diet",
            ProblemInstance::Knapsack(_) => "knapsack",
            ProblemInstance::Facility(_) => "facility",
            ProblemInstance::SetCover(_) => "setcover",
        }
    }
}

// ---------------------------------------------------------------------------
// Reading

/// Scalars and blocks pulled off the file before any interpretation.
/// Consumed field by field so leftovers can be reported as unknown.
struct RawInstance {
    scalars: BTreeMap<String, (usize, String)>,
    blocks: BTreeMap<String, (usize, Vec<(usize, String)>)>,
}

impl RawInstance {
    fn tokenize(text: &str) -> Result<Self, InstanceIoError> {
        let mut scalars = BTreeMap::new();
        let mut blocks: BTreeMap<String, (usize, Vec<(usize, String)>)> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                current = None;
                continue;
            }
            if trimmed.starts_with('#') {
                continue;
            }
            let key = trimmed.split_once(':').and_then(|(k, v)| {
                let k = k.trim();
                let named = !k.is_empty()
                    && k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
                named.then(|| (k.to_string(), v.trim().to_string()))
            });
            match key {
                Some((key, value)) if value.is_empty() => {
                    if blocks.insert(key.clone(), (line, Vec::new())).is_some() {
                        return Err(parse_err(line, format!("block `{key}` appears twice")));
                    }
                    current = Some(key);
                }
                Some((key, value)) => {
                    current = None;
                    if scalars.insert(key.clone(), (line, value)).is_some() {
                        return Err(parse_err(line, format!("field `{key}` appears twice")));
                    }
                }
                None => match &current {
                    Some(block) => blocks
                        .get_mut(block)
                        .expect("current block was just inserted")
                        .1
                        .push((line, trimmed.to_string())),
                    None => {
                        return Err(parse_err(
                            line,
                            format!("expected `key: value` or a block row, got `{trimmed}`"),
                        ))
                    }
                },
            }
        }
        Ok(RawInstance { scalars, blocks })
    }

    fn take_scalar(&mut self, key: &str) -> Option<(usize, String)> {
        self.scalars.remove(key)
    }

    fn require_scalar(&mut self, key: &str) -> Result<(usize, String), InstanceIoError> {
        self.take_scalar(key)
            .ok_or_else(|| InstanceIoError::Format(format!("missing required field `{key}:`")))
    }

    fn require_block(
        &mut self,
        key: &str,
    ) -> Result<(usize, Vec<(usize, String)>), InstanceIoError> {
        self.blocks
            .remove(key)
            .ok_or_else(|| InstanceIoError::Format(format!("missing required block `{key}:`")))
    }

    /// Everything should have been consumed; whatever is left is a typo.
    fn finish(self) -> Result<(), InstanceIoError> {
        if let Some((key, (line, _))) = self.scalars.into_iter().next() {
            return Err(parse_err(line, format!("unknown field `{key}`")));
        }
        if let Some((key, (line, _))) = self.blocks.into_iter().next() {
            return Err(parse_err(line, format!("unknown block `{key}`")));
        }
        Ok(())
    }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64, InstanceIoError> {
    tok.trim()
        .parse()
        .map_err(|_| parse_err(line, format!("`{}` is not a number", tok.trim())))
}

fn parse_usize(tok: &str, line: usize) -> Result<usize, InstanceIoError> {
    tok.trim()
        .parse()
        .map_err(|_| parse_err(line, format!("`{}` is not a nonnegative integer", tok.trim())))
}

fn fields(row: &str) -> Vec<&str> {
    row.split(',').map(str::trim).collect()
}

/// Parse one instance out of `text`.
pub fn parse_instance(text: &str) -> Result<ProblemInstance, InstanceIoError> {
    let mut raw = RawInstance::tokenize(text)?;
    let (line, kind) = raw.require_scalar("problem")?;
    match kind.as_str() {
        "diet" => parse_diet(raw),
        "knapsack" => parse_knapsack(raw),
        "facility" => parse_facility(raw),
        "setcover" => parse_set_cover(raw),
        other => Err(parse_err(
            line,
            format!("unknown problem `{other}` (expected diet, knapsack, facility, or setcover)"),
        )),
    }
}

/// Read one instance from a file.
pub fn read_instance(path: impl AsRef<Path>) -> Result<ProblemInstance, InstanceIoError> {
    parse_instance(&fs::read_to_string(path)?)
}

fn take_seed(raw: &mut RawInstance) -> Result<Option<u64>, InstanceIoError> {
    match raw.take_scalar("seed") {
        None => Ok(None),
        Some((line, value)) => value
            .parse()
            .map(Some)
            .map_err(|_| parse_err(line, format!("`{value}` is not a valid seed"))),
    }
}

fn parse_diet(mut raw: RawInstance) -> Result<ProblemInstance, InstanceIoError> {
    let (_, foods) = raw.require_block("foods")?;
    let mut food_names = Vec::new();
    let mut prices = Vec::new();
    for (line, row) in &foods {
        let f = fields(row);
        if f.len() != 2 {
            return Err(parse_err(*line, "expected `name,price`"));
        }
        food_names.push(f[0].to_string());
        prices.push(parse_f64(f[1], *line)?);
    }
    let (_, nutrients) = raw.require_block("nutrients")?;
    let mut nutrient_names = Vec::new();
    let mut needs = Vec::new();
    let mut nutrient_amounts = Vec::new();
    for (line, row) in &nutrients {
        let f = fields(row);
        if f.len() != 2 + food_names.len() {
            return Err(parse_err(
                *line,
                format!(
                    "expected `name,need` plus one amount per food ({} fields), got {}",
                    2 + food_names.len(),
                    f.len()
                ),
            ));
        }
        nutrient_names.push(f[0].to_string());
        needs.push(parse_f64(f[1], *line)?);
        nutrient_amounts.push(
            f[2..]
                .iter()
                .map(|tok| parse_f64(tok, *line))
                .collect::<Result<Vec<f64>, _>>()?,
        );
    }
    raw.finish()?;
    let inst = DietInstance {
        food_names,
        prices,
        nutrient_names,
        nutrient_amounts,
        needs,
    };
    inst.validate()?;
    Ok(ProblemInstance::Diet(inst))
}

fn parse_knapsack(mut raw: RawInstance) -> Result<ProblemInstance, InstanceIoError> {
    let seed = take_seed(&mut raw)?;
    let (line, budget) = raw.require_scalar("budget")?;
    let budget = parse_f64(&budget, line)?;
    let per_item_cap = match raw.take_scalar("per_item_cap") {
        None => Some(1),
        Some((_, v)) if v == "none" => None,
        Some((line, v)) => Some(
            v.parse()
                .map_err(|_| parse_err(line, format!("`{v}` is not a cap (number or `none`)")))?,
        ),
    };
    let (_, items) = raw.require_block("items")?;
    let mut names = Vec::new();
    let mut prices = Vec::new();
    let mut happiness = Vec::new();
    for (line, row) in &items {
        let f = fields(row);
        if f.len() != 3 {
            return Err(parse_err(*line, "expected `name,price,happiness`"));
        }
        names.push(f[0].to_string());
        prices.push(parse_f64(f[1], *line)?);
        happiness.push(parse_f64(f[2], *line)?);
    }
    raw.finish()?;
    let inst = KnapsackInstance {
        names,
        prices,
        happiness,
        budget,
        per_item_cap,
        seed,
    };
    inst.validate()?;
    Ok(ProblemInstance::Knapsack(inst))
}

fn parse_facility(mut raw: RawInstance) -> Result<ProblemInstance, InstanceIoError> {
    let seed = take_seed(&mut raw)?;
    let (fac_line, fac_rows) = raw.require_block("facilities")?;
    let mut rents = Vec::new();
    let mut capacities = Vec::new();
    let mut fac_coords = Vec::new();
    for (line, row) in &fac_rows {
        let f = fields(row);
        match f.len() {
            2 => {}
            4 => fac_coords.push((parse_f64(f[2], *line)?, parse_f64(f[3], *line)?)),
            _ => {
                return Err(parse_err(
                    *line,
                    "expected `rent,capacity` or `rent,capacity,x,y`",
                ))
            }
        }
        rents.push(parse_f64(f[0], *line)?);
        capacities.push(parse_f64(f[1], *line)?);
    }
    if !fac_coords.is_empty() && fac_coords.len() != rents.len() {
        return Err(parse_err(
            fac_line,
            "either every facility row carries coordinates or none do",
        ));
    }
    let (store_line, store_rows) = raw.require_block("stores")?;
    let mut demands = Vec::new();
    let mut store_coords = Vec::new();
    for (line, row) in &store_rows {
        let f = fields(row);
        match f.len() {
            1 => {}
            3 => store_coords.push((parse_f64(f[1], *line)?, parse_f64(f[2], *line)?)),
            _ => return Err(parse_err(*line, "expected `demand` or `demand,x,y`")),
        }
        demands.push(parse_f64(f[0], *line)?);
    }
    if !store_coords.is_empty() && store_coords.len() != demands.len() {
        return Err(parse_err(
            store_line,
            "either every store row carries coordinates or none do",
        ));
    }
    let coordinates = match (fac_coords.is_empty(), store_coords.is_empty()) {
        (false, false) => Some((fac_coords, store_coords)),
        (true, true) => None,
        _ => {
            return Err(parse_err(
                fac_line,
                "coordinates must be given for both facilities and stores, or neither",
            ))
        }
    };
    let (tr_line, tr_rows) = raw.require_block("transport")?;
    if tr_rows.len() != rents.len() {
        return Err(parse_err(
            tr_line,
            format!(
                "transport needs one row per facility ({}), got {}",
                rents.len(),
                tr_rows.len()
            ),
        ));
    }
    let mut transport = Vec::new();
    for (line, row) in &tr_rows {
        let f = fields(row);
        if f.len() != demands.len() {
            return Err(parse_err(
                *line,
                format!(
                    "transport row needs one cost per store ({}), got {}",
                    demands.len(),
                    f.len()
                ),
            ));
        }
        transport.push(
            f.iter()
                .map(|tok| parse_f64(tok, *line))
                .collect::<Result<Vec<f64>, _>>()?,
        );
    }
    raw.finish()?;
    let inst = FacilityInstance {
        rents,
        capacities,
        demands,
        transport,
        coordinates,
        seed,
    };
    inst.validate()?;
    Ok(ProblemInstance::Facility(inst))
}

fn parse_set_cover(mut raw: RawInstance) -> Result<ProblemInstance, InstanceIoError> {
    let seed = take_seed(&mut raw)?;
    let (line, num_items) = raw.require_scalar("num_items")?;
    let num_items = parse_usize(&num_items, line)?;
    let (_, set_rows) = raw.require_block("sets")?;
    let mut sets = Vec::new();
    for (line, row) in &set_rows {
        let f = fields(row);
        let cost = parse_f64(f[0], *line)?;
        let items = f[1..]
            .iter()
            .filter(|tok| !tok.is_empty())
            .map(|tok| parse_usize(tok, *line))
            .collect::<Result<Vec<usize>, _>>()?;
        sets.push((items, cost));
    }
    raw.finish()?;
    let mut inst = SetCoverInstance::new(num_items, sets)?;
    inst.seed = seed;
    Ok(ProblemInstance::SetCover(inst))
}

// ---------------------------------------------------------------------------
// Writing

fn check_name(name: &str) -> io::Result<()> {
    if name.is_empty()
        || name.contains(',')
        || name.contains(':')
        || name.contains('\n')
        || name.starts_with('#')
    {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("name `{name}` cannot be written to the comma-separated format"),
        ));
    }
    Ok(())
}

/// Write `inst` in the same format [`parse_instance`] reads.
pub fn write_instance(inst: &ProblemInstance, out: &mut dyn Write) -> io::Result<()> {
    writeln!(out, "problem: {}", inst.kind())?;
    match inst {
        ProblemInstance::Diet(d) => {
            writeln!(out, "foods:")?;
            for (name, price) in d.food_names.iter().zip(&d.prices) {
                check_name(name)?;
                writeln!(out, "{name},{price}")?;
            }
            writeln!(out, "nutrients:")?;
            for (k, name) in d.nutrient_names.iter().enumerate() {
                check_name(name)?;
                write!(out, "{name},{}", d.needs[k])?;
                for amount in &d.nutrient_amounts[k] {
                    write!(out, ",{amount}")?;
                }
                writeln!(out)?;
            }
        }
        ProblemInstance::Knapsack(k) => {
            if let Some(seed) = k.seed {
                writeln!(out, "seed: {seed}")?;
            }
            writeln!(out, "budget: {}", k.budget)?;
            match k.per_item_cap {
                Some(cap) => writeln!(out, "per_item_cap: {cap}")?,
                None => writeln!(out, "per_item_cap: none")?,
            }
            writeln!(out, "items:")?;
            for (i, name) in k.names.iter().enumerate() {
                check_name(name)?;
                writeln!(out, "{name},{},{}", k.prices[i], k.happiness[i])?;
            }
        }
        ProblemInstance::Facility(f) => {
            if let Some(seed) = f.seed {
                writeln!(out, "seed: {seed}")?;
            }
            writeln!(out, "facilities:")?;
            for i in 0..f.num_facilities() {
                write!(out, "{},{}", f.rents[i], f.capacities[i])?;
                if let Some((fac, _)) = &f.coordinates {
                    write!(out, ",{},{}", fac[i].0, fac[i].1)?;
                }
                writeln!(out)?;
            }
            writeln!(out, "stores:")?;
            for j in 0..f.num_stores() {
                write!(out, "{}", f.demands[j])?;
                if let Some((_, stores)) = &f.coordinates {
                    write!(out, ",{},{}", stores[j].0, stores[j].1)?;
                }
                writeln!(out)?;
            }
            writeln!(out, "transport:")?;
            for row in &f.transport {
                let line = row.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
                writeln!(out, "{line}")?;
            }
        }
        ProblemInstance::SetCover(s) => {
            if let Some(seed) = s.seed {
                writeln!(out, "seed: {seed}")?;
            }
            writeln!(out, "num_items: {}", s.num_items)?;
            writeln!(out, "sets:")?;
            for set in &s.sets {
                write!(out, "{}", set.cost)?;
                for item in &set.items {
                    write!(out, ",{item}")?;
                }
                writeln!(out)?;
            }
        }
    }
    Ok(())
}

/// [`write_instance`] into a fresh string.
pub fn instance_to_string(inst: &ProblemInstance) -> io::Result<String> {
    let mut buf = Vec::new();
    write_instance(inst, &mut buf)?;
    Ok(String::from_utf8(buf).expect("the format is plain ASCII plus the given names"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{
        chocolate_knapsack_instance, fruit_diet_instance, random_facility, random_knapsack,
        random_set_cover,
    };
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn round_trip(inst: &ProblemInstance) -> ProblemInstance {
        let text = instance_to_string(inst).unwrap();
        parse_instance(&text)
            .unwrap_or_else(|e| panic!("rewritten text failed to parse: {e}\n---\n{text}"))
    }

    #[test]
    fn bundled_instances_round_trip() {
        let diet = ProblemInstance::Diet(fruit_diet_instance());
        assert_eq!(round_trip(&diet), diet);
        let pack = ProblemInstance::Knapsack(chocolate_knapsack_instance());
        assert_eq!(round_trip(&pack), pack);
    }

    #[test]
    fn generated_instances_round_trip_with_seeds() {
        let mut rng = ChaCha8Rng::seed_from_u64(404);
        let mut pack = random_knapsack(Some(7), &mut rng);
        pack.seed = Some(404);
        pack.per_item_cap = None;
        let pack = ProblemInstance::Knapsack(pack);
        assert_eq!(round_trip(&pack), pack);

        let mut fac = random_facility(3, 5, &mut rng);
        fac.seed = Some(404);
        let fac = ProblemInstance::Facility(fac);
        assert_eq!(round_trip(&fac), fac);

        let mut cover = random_set_cover(6, 10, 0.4, &mut rng).unwrap();
        cover.seed = Some(404);
        let cover = ProblemInstance::SetCover(cover);
        assert_eq!(round_trip(&cover), cover);
    }

    #[test]
    fn facility_without_coordinates_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut fac = random_facility(2, 3, &mut rng);
        fac.coordinates = None;
        let fac = ProblemInstance::Facility(fac);
        assert_eq!(round_trip(&fac), fac);
    }

    #[test]
    fn hand_written_file_with_comments_parses() {
        let text = "\
# the weekly sweets run
problem: knapsack
budget: 4.5

items:
gum,0.5,1
taffy , 2.0 , 3
cola,2.5,2
";
        let inst = parse_instance(text).unwrap();
        match inst {
            ProblemInstance::Knapsack(k) => {
                assert_eq!(k.names, vec!["gum", "taffy", "cola"]);
                assert_eq!(k.prices, vec![0.5, 2.0, 2.5]);
                assert_eq!(k.per_item_cap, Some(1), "cap defaults to one of each");
                assert_eq!(k.seed, None);
            }
            other => panic!("parsed as {other:?}"),
        }
    }

    #[test]
    fn parse_errors_name_the_line() {
        let bad_number = "problem: knapsack\nbudget: ten\nitems:\na,1,1\n";
        match parse_instance(bad_number) {
            Err(InstanceIoError::Parse { line: 2, msg }) => {
                assert!(msg.contains("ten"), "{msg}")
            }
            other => panic!("{other:?}"),
        }

        let unknown_field = "problem: knapsack\nbudget: 1\ncolor: red\nitems:\na,1,1\n";
        match parse_instance(unknown_field) {
            Err(InstanceIoError::Parse { line: 3, msg }) => {
                assert!(msg.contains("color"), "{msg}")
            }
            other => panic!("{other:?}"),
        }

        let stray_row = "problem: knapsack\nbudget: 1\na,1,1\n";
        assert!(matches!(
            parse_instance(stray_row),
            Err(InstanceIoError::Parse { line: 3, .. })
        ));

        let unknown_kind = "problem: sudoku\n";
        match parse_instance(unknown_kind) {
            Err(InstanceIoError::Parse { line: 1, msg }) => {
                assert!(msg.contains("sudoku"), "{msg}")
            }
            other => panic!("{other:?}"),
        }

        let missing_budget = "problem: knapsack\nitems:\na,1,1\n";
        match parse_instance(missing_budget) {
            Err(InstanceIoError::Format(msg)) => {
                assert!(msg.contains("budget"), "{msg}")
            }
            other => panic!("{other:?}"),
        }

        let duplicate = "problem: knapsack\nbudget: 1\nbudget: 2\nitems:\na,1,1\n";
        assert!(matches!(
            parse_instance(duplicate),
            Err(InstanceIoError::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn facility_coordinate_mistakes_are_rejected() {
        let mixed = "\
problem: facility
facilities:
10,5,1.0,2.0
12,5
stores:
3
transport:
1
1
";
        assert!(matches!(
            parse_instance(mixed),
            Err(InstanceIoError::Parse { .. })
        ));

        let lopsided = "\
problem: facility
facilities:
10,5,1.0,2.0
stores:
3
transport:
1
";
        match parse_instance(lopsided) {
            Err(InstanceIoError::Parse { msg, .. }) => {
                assert!(msg.contains("both"), "{msg}")
            }
            other => panic!("{other:?}"),
        }

        let short_transport = "\
problem: facility
facilities:
10,5
12,5
stores:
3
transport:
1
";
        match parse_instance(short_transport) {
            Err(InstanceIoError::Parse { msg, .. }) => {
                assert!(msg.contains("one row per facility"), "{msg}")
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_semantics_surface_as_problem_errors() {
        // Parses fine, but item 2 is never covered.
        let text = "problem: setcover\nnum_items: 3\nsets:\n1.0,0,1\n";
        assert!(matches!(
            parse_instance(text),
            Err(InstanceIoError::Problem(ProblemError::UncoverableItem { item: 2 }))
        ));
    }

    #[test]
    fn commas_in_names_cannot_be_written() {
        let mut pack = chocolate_knapsack_instance();
        pack.names[0] = "dark, 70%".into();
        let err = instance_to_string(&ProblemInstance::Knapsack(pack)).unwrap_err();
        assert_eq!(err.kind(), io::ErrorKind::InvalidData);
    }

    #[test]
    fn empty_sets_are_carried_through() {
        let text = "problem: setcover\nnum_items: 2\nsets:\n5.0\n1.0,0,1\n";
        match parse_instance(text).unwrap() {
            ProblemInstance::SetCover(s) => {
                assert_eq!(s.sets.len(), 2);
                assert!(s.sets[0].items.is_empty());
                let round = ProblemInstance::SetCover(s);
                assert_eq!(round_trip(&round), round);
            }
            other => panic!("parsed as {other:?}"),
        }
    }
}
