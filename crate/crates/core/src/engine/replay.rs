//! Newline-delimited JSON replay records.
//!
//! A replay starts with one `header` record describing the map and the units,
//! followed by one `step` record per simulated game step. Writers may
//! interleave `actions` records holding the agent actions of each env step,
//! which is enough to re-simulate the episode.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;

use super::combat::DamageRecord;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitInfo {
    pub id: usize,
    pub faction: String,
    pub unit_type: String,
    pub radius: f64,
    pub max_health: f64,
    pub max_shield: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub scenario: String,
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    /// `[x, y, width, height]` per blocked rectangle.
    pub obstacles: Vec<[f64; 4]>,
    pub units: Vec<UnitInfo>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitRecord {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub health: f64,
    pub shield: f64,
    pub energy: f64,
    pub cooldown: f64,
    pub alive: bool,
}

/// The committed state after one game step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub step: u64,
    pub units: Vec<UnitRecord>,
    pub ledger: Vec<DamageRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Record {
    Header(Header),
    Actions { env_step: u64, actions: Vec<usize> },
    Step(Frame),
}

pub fn write_record(out: &mut impl Write, record: &Record) -> io::Result<()> {
    serde_json::to_writer(&mut *out, record)?;
    out.write_all(b"\n")
}

/// Parses a replay, skipping blank lines.
pub fn read_records(input: impl BufRead) -> io::Result<Vec<Record>> {
    let mut records = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| {
            io::Error::new(io::ErrorKind::InvalidData, format!("line {}: {e}", n + 1))
        })?;
        records.push(record);
    }
    Ok(records)
}

impl UnitRecord {
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_round_trip() {
        let records = vec![
            Record::Header(Header {
                scenario: "t".into(),
                seed: 3,
                width: 8,
                height: 8,
                obstacles: vec![[0.0, 0.0, 1.0, 2.0]],
                units: vec![],
            }),
            Record::Actions {
                env_step: 0,
                actions: vec![1, 4],
            },
            Record::Step(Frame {
                step: 1,
                units: vec![UnitRecord {
                    id: 0,
                    x: 0.1,
                    y: 1.0 / 3.0,
                    health: 45.0,
                    shield: 0.0,
                    energy: 0.0,
                    cooldown: 0.0625,
                    alive: true,
                }],
                ledger: vec![],
            }),
        ];
        let mut buf = Vec::new();
        for r in &records {
            write_record(&mut buf, r).unwrap();
        }
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(r#"{"kind":"header""#));
        assert_eq!(read_records(&buf[..]).unwrap(), records);
    }

    #[test]
    fn bad_line_is_invalid_data() {
        let err = read_records(&b"{\"kind\":\"nope\"}\n"[..]).unwrap_err();
        assert_eq!(err.kind(), io::ErrorKind::InvalidData);
    }
}
