use std::path::PathBuf;

use thiserror::Error;

use super::Faction;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("malformed JSON document: {0}")]
    MalformedDocument(String),

    #[error("missing required field `{0}`")]
    MissingField(String),

    #[error("invalid value for `{field}`: {reason}")]
    InvalidValue { field: String, reason: String },

    #[error("unknown {kind} `{value}`")]
    InvalidEnum { kind: &'static str, value: String },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("{faction:?} groups contain {summed} units but {declared} were declared")]
    GroupCountMismatch {
        faction: Faction,
        declared: usize,
        summed: usize,
    },

    #[error("terrain is {found_width}x{found_height} but the map is {width}x{height}")]
    TerrainDimensionMismatch {
        width: usize,
        height: usize,
        found_width: usize,
        found_height: usize,
    },

    #[error("cannot resolve unit type `{reference}`: {reason}")]
    UnresolvableUnitType { reference: String, reason: String },

    #[error("bad unit_type_ids map: {0}")]
    BadTypeIdMap(String),

    #[error("group {group} ({count} units, pitch {pitch}) does not fit inside the map")]
    PlacementOverflow {
        group: usize,
        count: usize,
        pitch: f64,
    },

    #[error("unknown terrain preset `{0}`")]
    UnknownPreset(String),

    #[error("unknown built-in scenario `{0}`")]
    UnknownScenario(String),

    #[error("failed to read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = ScenarioError> = std::result::Result<T, E>;
