//! Scenario and unit-type documents.
//!
//! A scenario names its unit types either by the uppercase name of a built-in
//! type (`ZERGLING`) or by a path to a unit JSON file. Paths get the optional
//! `custom_unit_path` prefix and a `.json` extension when it is missing, so
//! `type` and `type.json` name the same unit.

mod catalog;
mod error;
mod fields;
mod placement;
mod terrain;
mod unit_type;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::geometry::{Rect, Vec2};

pub use catalog::{builtin_scenario_names, builtin_unit, builtin_unit_names, terrain_preset};
pub use error::{Result, ScenarioError};
pub use placement::{place_groups, Placement};
pub use terrain::{collapse_terrain, Terrain};
pub use unit_type::{
    parse_unit_type, AttackRange, CombatType, Plane, PlaneSet, Targeter, UnitType, MELEE_RANGE,
};

/// Episode length used when a scenario does not set `episode_limit`.
pub const DEFAULT_EPISODE_LIMIT: u32 = 150;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Faction {
    Ally,
    Enemy,
}

impl Faction {
    pub fn name(self) -> &'static str {
        match self {
            Faction::Ally => "ALLY",
            Faction::Enemy => "ENEMY",
        }
    }

    pub fn opponent(self) -> Faction {
        match self {
            Faction::Ally => Faction::Enemy,
            Faction::Enemy => Faction::Ally,
        }
    }
}

impl fmt::Display for Faction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a unit-type reference points after prefixing and extension handling.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum UnitRef {
    Builtin(String),
    File(PathBuf),
}

impl UnitRef {
    pub fn resolve(reference: &str, custom_unit_path: Option<&str>) -> UnitRef {
        if is_builtin_name(reference) {
            return UnitRef::Builtin(reference.to_owned());
        }
        let file = format!("{}.json", canonical_reference(reference));
        let path = match custom_unit_path {
            Some(prefix) if !prefix.is_empty() => Path::new(prefix).join(file),
            _ => PathBuf::from(file),
        };
        UnitRef::File(path)
    }
}

fn is_builtin_name(reference: &str) -> bool {
    !reference.is_empty()
        && reference.chars().any(|c| c.is_ascii_uppercase())
        && reference
            .chars()
            .all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_')
}

/// The lookup key of a reference: the reference minus any `.json` suffix.
pub fn canonical_reference(reference: &str) -> &str {
    reference.strip_suffix(".json").unwrap_or(reference)
}

/// One cluster of units laid out around `position`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitGroup {
    pub position: Vec2,
    pub faction: Faction,
    /// `(reference, count)` in declaration order.
    pub units: Vec<(String, usize)>,
}

impl UnitGroup {
    pub fn count(&self) -> usize {
        self.units.iter().map(|(_, n)| n).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TerrainSource {
    Open,
    Inline,
    Preset(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub custom_unit_path: Option<String>,
    pub num_allied_units: usize,
    pub num_enemy_units: usize,
    pub groups: Vec<UnitGroup>,
    pub attack_point: Vec2,
    pub width: usize,
    pub height: usize,
    pub terrain: Terrain,
    pub terrain_source: TerrainSource,
    pub obstacles: Vec<Rect>,
    pub ally_has_shields: bool,
    pub enemy_has_shields: bool,
    pub num_unit_types: usize,
    /// `(reference, id)` in declaration order.
    pub unit_type_ids: Vec<(String, usize)>,
    pub episode_limit: u32,
    /// Resolved unit types keyed by canonical reference.
    pub unit_types: BTreeMap<String, UnitType>,
}

impl Scenario {
    /// Loads one of the shipped scenarios by name (e.g. `3s5z`).
    pub fn builtin(name: &str) -> Result<Scenario> {
        let text = catalog::builtin_scenario_text(name)
            .ok_or_else(|| ScenarioError::UnknownScenario(name.to_owned()))?;
        parse_scenario(text, &mut standard_loader(None))
    }

    /// Loads a scenario file, resolving relative unit paths against the
    /// working directory first and the scenario's directory second.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Scenario> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_owned(),
            source,
        })?;
        let base = path.parent().map(Path::to_path_buf);
        parse_scenario(&text, &mut standard_loader(base))
    }

    /// A shipped scenario name or a path to a scenario file.
    pub fn load(name_or_path: &str) -> Result<Scenario> {
        match catalog::builtin_scenario_text(name_or_path) {
            Some(_) => Scenario::builtin(name_or_path),
            None => Scenario::from_file(name_or_path),
        }
    }

    pub fn unit_type(&self, reference: &str) -> &UnitType {
        &self.unit_types[canonical_reference(reference)]
    }

    /// The observation type id of `reference`, when the scenario distinguishes types.
    pub fn type_id(&self, reference: &str) -> Option<usize> {
        let key = canonical_reference(reference);
        self.unit_type_ids
            .iter()
            .find(|(r, _)| canonical_reference(r) == key)
            .map(|(_, id)| *id)
    }

    pub fn has_shields(&self, faction: Faction) -> bool {
        match faction {
            Faction::Ally => self.ally_has_shields,
            Faction::Enemy => self.enemy_has_shields,
        }
    }

    pub fn num_units(&self, faction: Faction) -> usize {
        match faction {
            Faction::Ally => self.num_allied_units,
            Faction::Enemy => self.num_enemy_units,
        }
    }

    /// Largest unit radius among the participating types.
    pub fn max_radius(&self) -> f64 {
        self.groups
            .iter()
            .flat_map(|g| g.units.iter())
            .map(|(r, _)| self.unit_type(r).radius())
            .fold(0.0, f64::max)
    }

    pub fn max_speed(&self) -> f64 {
        self.groups
            .iter()
            .flat_map(|g| g.units.iter())
            .map(|(r, _)| self.unit_type(r).speed)
            .fold(0.0, f64::max)
    }

    pub fn to_json_value(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("name".into(), json!(self.name));
        if let Some(p) = &self.custom_unit_path {
            obj.insert("custom_unit_path".into(), json!(p));
        }
        obj.insert("num_allied_units".into(), json!(self.num_allied_units));
        obj.insert("num_enemy_units".into(), json!(self.num_enemy_units));
        let groups = self
            .groups
            .iter()
            .map(|g| {
                let units: Map<String, Value> =
                    g.units.iter().map(|(r, n)| (r.clone(), json!(n))).collect();
                json!({
                    "x": g.position.x,
                    "y": g.position.y,
                    "faction": g.faction.name(),
                    "units": units,
                })
            })
            .collect();
        obj.insert("groups".into(), Value::Array(groups));
        obj.insert(
            "attack_point".into(),
            json!([self.attack_point.x, self.attack_point.y]),
        );
        match &self.terrain_source {
            TerrainSource::Open => {}
            TerrainSource::Inline => {
                obj.insert("terrain".into(), json!(self.terrain.rows()));
            }
            TerrainSource::Preset(name) => {
                obj.insert("terrain_preset".into(), json!(name));
            }
        }
        obj.insert("width".into(), json!(self.width));
        obj.insert("height".into(), json!(self.height));
        obj.insert("num_unit_types".into(), json!(self.num_unit_types));
        let ids: Map<String, Value> = self
            .unit_type_ids
            .iter()
            .map(|(r, id)| (r.clone(), json!(id)))
            .collect();
        obj.insert("unit_type_ids".into(), Value::Object(ids));
        obj.insert("ally_has_shields".into(), json!(self.ally_has_shields));
        obj.insert("enemy_has_shields".into(), json!(self.enemy_has_shields));
        obj.insert("episode_limit".into(), json!(self.episode_limit));
        Value::Object(obj)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("scenario serializes")
    }
}

/// The default loader: built-in names come from the catalog, files from disk.
/// Relative files are tried against the working directory, then `base_dir`.
pub fn standard_loader(base_dir: Option<PathBuf>) -> impl FnMut(&UnitRef) -> Result<UnitType> {
    move |unit: &UnitRef| match unit {
        UnitRef::Builtin(name) => builtin_unit(name),
        UnitRef::File(path) => {
            let candidates = std::iter::once(path.clone()).chain(
                base_dir
                    .iter()
                    .filter(|_| path.is_relative())
                    .map(|b| b.join(path)),
            );
            let mut last_err = None;
            for candidate in candidates {
                match std::fs::read_to_string(&candidate) {
                    Ok(text) => return parse_unit_type(&text),
                    Err(e) => last_err = Some((candidate, e)),
                }
            }
            let (path, source) = last_err.expect("at least one candidate");
            Err(ScenarioError::Io { path, source })
        }
    }
}

/// Parses and validates a scenario document, resolving every unit type through `loader`.
pub fn parse_scenario(
    text: &str,
    loader: &mut dyn FnMut(&UnitRef) -> Result<UnitType>,
) -> Result<Scenario> {
    use fields::{as_array, as_bool, as_f64, as_object, as_str, as_u64, optional, required};

    let obj = fields::parse_object(text)?;

    let name = as_str("name", required(&obj, "name")?)?.to_owned();
    let custom_unit_path = optional(&obj, "custom_unit_path")
        .map(|v| as_str("custom_unit_path", v).map(str::to_owned))
        .transpose()?;
    let num_allied_units = as_u64("num_allied_units", required(&obj, "num_allied_units")?)? as usize;
    let num_enemy_units = as_u64("num_enemy_units", required(&obj, "num_enemy_units")?)? as usize;
    for (field, n) in [
        ("num_allied_units", num_allied_units),
        ("num_enemy_units", num_enemy_units),
    ] {
        if n == 0 {
            return Err(fields::invalid_value(field, "must be >= 1"));
        }
    }

    let width = as_u64("width", required(&obj, "width")?)? as usize;
    let height = as_u64("height", required(&obj, "height")?)? as usize;
    if width == 0 || height == 0 {
        return Err(fields::invalid_value("width", "map dimensions must be >= 1"));
    }
    let in_bounds = |p: Vec2| p.x >= 0.0 && p.y >= 0.0 && p.x <= width as f64 && p.y <= height as f64;

    let point = |field: &str, v: &Value| -> Result<Vec2> {
        let arr = as_array(field, v)?;
        if arr.len() != 2 {
            return Err(fields::invalid_value(field, "expected [x, y]"));
        }
        Ok(Vec2::new(as_f64(field, &arr[0])?, as_f64(field, &arr[1])?))
    };
    let attack_point = point("attack_point", required(&obj, "attack_point")?)?;
    if !in_bounds(attack_point) {
        return Err(fields::invalid_value(
            "attack_point",
            "must lie inside the map",
        ));
    }

    let mut groups = Vec::new();
    for (i, g) in as_array("groups", required(&obj, "groups")?)?.iter().enumerate() {
        let g = as_object("groups", g)?;
        let x = as_f64("groups.x", required(g, "x")?)?;
        let y = as_f64("groups.y", required(g, "y")?)?;
        let position = Vec2::new(x, y);
        if !in_bounds(position) {
            return Err(fields::invalid_value(
                "groups",
                format!("group {i} centre ({x}, {y}) lies outside the map"),
            ));
        }
        let faction = match as_str("groups.faction", required(g, "faction")?)? {
            "ALLY" => Faction::Ally,
            "ENEMY" => Faction::Enemy,
            other => {
                return Err(ScenarioError::InvalidEnum {
                    kind: "faction",
                    value: other.to_owned(),
                })
            }
        };
        let mut units = Vec::new();
        for (reference, count) in as_object("groups.units", required(g, "units")?)? {
            let count = as_u64("groups.units", count)? as usize;
            if count == 0 {
                return Err(fields::invalid_value(
                    "groups.units",
                    format!("count for `{reference}` must be >= 1"),
                ));
            }
            units.push((reference.clone(), count));
        }
        if units.is_empty() {
            return Err(fields::invalid_value(
                "groups.units",
                format!("group {i} has no units"),
            ));
        }
        groups.push(UnitGroup {
            position,
            faction,
            units,
        });
    }

    for (faction, declared) in [
        (Faction::Ally, num_allied_units),
        (Faction::Enemy, num_enemy_units),
    ] {
        let summed: usize = groups
            .iter()
            .filter(|g| g.faction == faction)
            .map(UnitGroup::count)
            .sum();
        if summed != declared {
            return Err(ScenarioError::GroupCountMismatch {
                faction,
                declared,
                summed,
            });
        }
    }

    let (terrain, terrain_source) = match (optional(&obj, "terrain"), optional(&obj, "terrain_preset")) {
        (Some(_), Some(_)) => {
            return Err(fields::invalid_value(
                "terrain",
                "give either `terrain` or `terrain_preset`, not both",
            ))
        }
        (Some(rows), None) => {
            let rows = as_array("terrain", rows)?
                .iter()
                .map(|r| as_str("terrain", r))
                .collect::<Result<Vec<_>>>()?;
            (Terrain::from_rows(&rows)?, TerrainSource::Inline)
        }
        (None, Some(preset)) => {
            let preset = as_str("terrain_preset", preset)?;
            (terrain_preset(preset)?, TerrainSource::Preset(preset.to_owned()))
        }
        (None, None) => (Terrain::open(width, height), TerrainSource::Open),
    };
    if terrain.width() != width || terrain.height() != height {
        return Err(ScenarioError::TerrainDimensionMismatch {
            width,
            height,
            found_width: terrain.width(),
            found_height: terrain.height(),
        });
    }
    let obstacles = collapse_terrain(&terrain);

    let ally_has_shields = as_bool("ally_has_shields", required(&obj, "ally_has_shields")?)?;
    let enemy_has_shields = as_bool("enemy_has_shields", required(&obj, "enemy_has_shields")?)?;

    let mut unit_types = BTreeMap::new();
    for g in &groups {
        for (reference, _) in &g.units {
            let key = canonical_reference(reference);
            if unit_types.contains_key(key) {
                continue;
            }
            let unit = UnitRef::resolve(reference, custom_unit_path.as_deref());
            let t = loader(&unit).map_err(|e| ScenarioError::UnresolvableUnitType {
                reference: reference.clone(),
                reason: e.to_string(),
            })?;
            unit_types.insert(key.to_owned(), t);
        }
    }

    let num_unit_types = as_u64("num_unit_types", required(&obj, "num_unit_types")?)? as usize;
    let mut unit_type_ids = Vec::new();
    if let Some(ids) = optional(&obj, "unit_type_ids") {
        for (reference, id) in as_object("unit_type_ids", ids)? {
            let id = as_u64("unit_type_ids", id)? as usize;
            unit_type_ids.push((reference.clone(), id));
        }
    }
    validate_type_ids(num_unit_types, &unit_type_ids, &unit_types)?;

    let episode_limit = match optional(&obj, "episode_limit") {
        None => DEFAULT_EPISODE_LIMIT,
        Some(v) => {
            let n = as_u64("episode_limit", v)?;
            if n == 0 || n > u32::MAX as u64 {
                return Err(fields::invalid_value("episode_limit", "must be >= 1"));
            }
            n as u32
        }
    };

    Ok(Scenario {
        name,
        custom_unit_path,
        num_allied_units,
        num_enemy_units,
        groups,
        attack_point,
        width,
        height,
        terrain,
        terrain_source,
        obstacles,
        ally_has_shields,
        enemy_has_shields,
        num_unit_types,
        unit_type_ids,
        episode_limit,
        unit_types,
    })
}

fn validate_type_ids(
    num_unit_types: usize,
    ids: &[(String, usize)],
    unit_types: &BTreeMap<String, UnitType>,
) -> Result<()> {
    if ids.len() != num_unit_types {
        return Err(ScenarioError::BadTypeIdMap(format!(
            "{} entries for num_unit_types = {num_unit_types}",
            ids.len()
        )));
    }
    let mut seen = vec![false; num_unit_types];
    let mut keys = std::collections::BTreeSet::new();
    for (reference, id) in ids {
        let key = canonical_reference(reference);
        if !unit_types.contains_key(key) {
            return Err(ScenarioError::BadTypeIdMap(format!(
                "`{reference}` does not appear in any group"
            )));
        }
        if !keys.insert(key) {
            return Err(ScenarioError::BadTypeIdMap(format!(
                "`{reference}` is listed twice"
            )));
        }
        match seen.get_mut(*id) {
            Some(slot) if !*slot => *slot = true,
            Some(_) => {
                return Err(ScenarioError::BadTypeIdMap(format!("id {id} is used twice")))
            }
            None => {
                return Err(ScenarioError::BadTypeIdMap(format!(
                    "id {id} is outside 0..{num_unit_types}"
                )))
            }
        }
    }
    if num_unit_types > 0 {
        if let Some(missing) = unit_types.keys().find(|k| !keys.contains(k.as_str())) {
            return Err(ScenarioError::BadTypeIdMap(format!(
                "participating type `{missing}` has no id"
            )));
        }
    }
    Ok(())
}
