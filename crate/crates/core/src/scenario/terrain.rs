//! Square-cell terrain and its reduction to axis-aligned obstacle rectangles.
//!
//! Row `r` of the grid covers `y` in `[r, r + 1)` and column `c` covers `x` in
//! `[c, c + 1)`, so the first string of an inline terrain is the southern edge
//! of the map.

use crate::geometry::{Rect, Vec2};

use super::error::{Result, ScenarioError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Terrain {
    width: usize,
    height: usize,
    blocked: Vec<bool>,
}

impl Terrain {
    pub fn open(width: usize, height: usize) -> Self {
        Terrain {
            width,
            height,
            blocked: vec![false; width * height],
        }
    }

    /// Builds a grid from rows of `_` (walkable) and `X` (blocked).
    pub fn from_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.as_ref().chars().count());
        let mut blocked = Vec::with_capacity(width * height);
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.chars().count() != width {
                return Err(ScenarioError::InvalidValue {
                    field: "terrain".into(),
                    reason: format!("row {r} has {} cells, expected {width}", row.chars().count()),
                });
            }
            for ch in row.chars() {
                blocked.push(match ch {
                    '_' => false,
                    'X' => true,
                    other => {
                        return Err(ScenarioError::InvalidValue {
                            field: "terrain".into(),
                            reason: format!("unknown cell `{other}` in row {r}"),
                        })
                    }
                });
            }
        }
        Ok(Terrain {
            width,
            height,
            blocked,
        })
    }

    /// Parses a preset file: one row per line, blank lines and `#` comments ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let rows: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect();
        Terrain::from_rows(&rows)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_blocked(&self, col: usize, row: usize) -> bool {
        self.blocked[row * self.width + col]
    }

    pub fn set_blocked(&mut self, col: usize, row: usize, blocked: bool) {
        self.blocked[row * self.width + col] = blocked;
    }

    pub fn blocked_count(&self) -> usize {
        self.blocked.iter().filter(|b| **b).count()
    }

    /// True iff `p` lies inside the map and on a walkable cell.
    pub fn is_walkable_at(&self, p: Vec2) -> bool {
        if !(p.x >= 0.0 && p.y >= 0.0) {
            return false;
        }
        let (col, row) = (p.x.floor() as usize, p.y.floor() as usize);
        col < self.width && row < self.height && !self.is_blocked(col, row)
    }

    pub fn rows(&self) -> Vec<String> {
        (0..self.height)
            .map(|r| {
                (0..self.width)
                    .map(|c| if self.is_blocked(c, r) { 'X' } else { '_' })
                    .collect()
            })
            .collect()
    }
}

/// Collapses blocked cells into disjoint rectangles.
///
/// Each row is split into maximal horizontal runs; a run extends the rectangle
/// directly below it when both span the same columns. Output is ordered by
/// the rectangle's bottom-left corner (row, then column).
pub fn collapse_terrain(terrain: &Terrain) -> Vec<Rect> {
    struct Open {
        col: usize,
        end: usize,
        row: usize,
        rows: usize,
    }

    let mut done: Vec<Open> = Vec::new();
    let mut open: Vec<Open> = Vec::new();

    for row in 0..terrain.height {
        let mut next_open = Vec::new();
        let mut c = 0;
        while c < terrain.width {
            if !terrain.is_blocked(c, row) {
                c += 1;
                continue;
            }
            let start = c;
            while c < terrain.width && terrain.is_blocked(c, row) {
                c += 1;
            }
            match open.iter().position(|o| o.col == start && o.end == c) {
                Some(i) => {
                    let mut o = open.swap_remove(i);
                    o.rows += 1;
                    next_open.push(o);
                }
                None => next_open.push(Open {
                    col: start,
                    end: c,
                    row,
                    rows: 1,
                }),
            }
        }
        done.append(&mut open);
        open = next_open;
    }
    done.append(&mut open);

    done.sort_by_key(|o| (o.row, o.col));
    done.into_iter()
        .map(|o| Rect::new(o.col as f64, o.row as f64, (o.end - o.col) as f64, o.rows as f64))
        .collect()
}
