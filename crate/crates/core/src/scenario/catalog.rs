//! Built-in unit types, terrain presets and scenarios, compiled into the binary.

use super::error::{Result, ScenarioError};
use super::terrain::Terrain;
use super::unit_type::{parse_unit_type, UnitType};

const UNITS: &[(&str, &str)] = &[
    ("BANELING", include_str!("../../data/units/baneling.json")),
    ("COLOSSUS", include_str!("../../data/units/colossus.json")),
    ("MARAUDER", include_str!("../../data/units/marauder.json")),
    ("MARINE", include_str!("../../data/units/marine.json")),
    ("MEDIVAC", include_str!("../../data/units/medivac.json")),
    ("SPINE_CRAWLER", include_str!("../../data/units/spine_crawler.json")),
    ("STALKER", include_str!("../../data/units/stalker.json")),
    ("ZEALOT", include_str!("../../data/units/zealot.json")),
    ("ZERGLING", include_str!("../../data/units/zergling.json")),
];

const PRESETS: &[(&str, &str)] = &[
    ("CORRIDOR", include_str!("../../data/terrain/corridor.txt")),
    ("NARROW", include_str!("../../data/terrain/narrow.txt")),
];

const SCENARIOS: &[(&str, &str)] = &[
    ("2s_vs_1sc", include_str!("../../data/scenarios/2s_vs_1sc.json")),
    ("3s5z", include_str!("../../data/scenarios/3s5z.json")),
    ("MMM2", include_str!("../../data/scenarios/MMM2.json")),
    ("corridor", include_str!("../../data/scenarios/corridor.json")),
    ("3s_vs_5z", include_str!("../../data/scenarios/3s_vs_5z.json")),
    ("bane_vs_bane", include_str!("../../data/scenarios/bane_vs_bane.json")),
];

/// Names of the shipped scenarios, in benchmark order.
pub fn builtin_scenario_names() -> impl Iterator<Item = &'static str> {
    SCENARIOS.iter().map(|(name, _)| *name)
}

pub fn builtin_unit_names() -> impl Iterator<Item = &'static str> {
    UNITS.iter().map(|(name, _)| *name)
}

pub fn builtin_unit(name: &str) -> Result<UnitType> {
    let (_, text) = UNITS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| ScenarioError::UnresolvableUnitType {
            reference: name.to_owned(),
            reason: "no built-in unit type with this name".into(),
        })?;
    parse_unit_type(text)
}

pub fn terrain_preset(name: &str) -> Result<Terrain> {
    let (_, text) = PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| ScenarioError::UnknownPreset(name.to_owned()))?;
    Terrain::from_text(text)
}

pub(crate) fn builtin_scenario_text(name: &str) -> Option<&'static str> {
    SCENARIOS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::unit_type::{CombatType, Plane, Targeter};

    #[test]
    fn every_builtin_unit_parses() {
        for name in builtin_unit_names() {
            let t = builtin_unit(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(t.hp > 0.0, "{name}");
            assert!(t.size > 0.0, "{name}");
        }
    }

    #[test]
    fn catalog_structure() {
        assert_eq!(builtin_unit("MEDIVAC").unwrap().combat_type, CombatType::Healing);
        assert_eq!(builtin_unit("MEDIVAC").unwrap().plane, Plane::Air);
        assert!(matches!(
            builtin_unit("BANELING").unwrap().targeter,
            Targeter::Kamikaze { .. }
        ));
        assert!(matches!(
            builtin_unit("COLOSSUS").unwrap().targeter,
            Targeter::LaserBeam { .. }
        ));
        assert_eq!(builtin_unit("COLOSSUS").unwrap().plane, Plane::Colossus);
        assert_eq!(builtin_unit("SPINE_CRAWLER").unwrap().speed, 0.0);
        assert!(builtin_unit("ZEALOT").unwrap().shield > 0.0);
        assert!(builtin_unit("PROBE").is_err());
    }

    #[test]
    fn presets_are_32_square() {
        for name in ["NARROW", "CORRIDOR"] {
            let t = terrain_preset(name).unwrap();
            assert_eq!((t.width(), t.height()), (32, 32), "{name}");
            assert!(t.blocked_count() > 0);
        }
        assert!(matches!(
            terrain_preset("SWAMP"),
            Err(ScenarioError::UnknownPreset(_))
        ));
    }
}
