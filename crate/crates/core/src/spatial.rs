//! Exact radius queries over points and axis-aligned rectangles.
//!
//! Both indices bucket their entries into a uniform grid; a query visits the
//! buckets overlapping the query disc's bounding box and then checks exact
//! distances. Balls are closed: an entry at distance exactly `radius` matches.
//! Results come back in ascending id order.

use crate::geometry::{Rect, Vec2};

/// Bucket side used when the caller does not pick one.
pub const DEFAULT_CELL_SIZE: f64 = 2.0;

#[derive(Clone, Debug)]
struct Grid {
    origin: Vec2,
    cell: f64,
    cols: usize,
    rows: usize,
}

impl Grid {
    fn covering(min: Vec2, max: Vec2, cell: f64) -> Grid {
        // Cap the bucket count so sparse, far-flung inputs stay cheap.
        const MAX_SIDE: usize = 256;
        let span = (max - min).x.max((max - min).y).max(0.0);
        let cell = cell.max(span / MAX_SIDE as f64).max(f64::MIN_POSITIVE);
        let cols = (((max.x - min.x) / cell).floor() as usize + 1).min(MAX_SIDE);
        let rows = (((max.y - min.y) / cell).floor() as usize + 1).min(MAX_SIDE);
        Grid {
            origin: min,
            cell,
            cols,
            rows,
        }
    }

    fn col(&self, x: f64) -> usize {
        (((x - self.origin.x) / self.cell).floor().max(0.0) as usize).min(self.cols - 1)
    }

    fn row(&self, y: f64) -> usize {
        (((y - self.origin.y) / self.cell).floor().max(0.0) as usize).min(self.rows - 1)
    }

    /// Inclusive bucket ranges overlapping `[min, max]`, or `None` when disjoint.
    fn span(&self, min: Vec2, max: Vec2) -> Option<(usize, usize, usize, usize)> {
        let far = self.origin + Vec2::new(self.cols as f64, self.rows as f64) * self.cell;
        if max.x < self.origin.x || max.y < self.origin.y || min.x > far.x || min.y > far.y {
            return None;
        }
        Some((self.col(min.x), self.col(max.x), self.row(min.y), self.row(max.y)))
    }

    fn index(&self, col: usize, row: usize) -> usize {
        row * self.cols + col
    }

    fn len(&self) -> usize {
        self.cols * self.rows
    }
}

/// Packs `(bucket, payload)` pairs into contiguous per-bucket slices.
fn pack<T: Copy>(buckets: usize, items: &[(usize, T)]) -> (Vec<u32>, Vec<T>) {
    let mut start = vec![0u32; buckets + 1];
    for (b, _) in items {
        start[b + 1] += 1;
    }
    for i in 0..buckets {
        start[i + 1] += start[i];
    }
    let mut fill = start.clone();
    let mut packed = vec![items.first().map(|(_, t)| *t); items.len()];
    for (b, t) in items {
        packed[fill[*b] as usize] = Some(*t);
        fill[*b] += 1;
    }
    (start, packed.into_iter().map(|t| t.expect("filled")).collect())
}

/// Index over moving points; rebuilt from scratch whenever positions change.
#[derive(Clone, Debug)]
pub struct PointIndex {
    grid: Option<Grid>,
    start: Vec<u32>,
    entries: Vec<(usize, Vec2)>,
}

impl PointIndex {
    pub fn build(points: impl IntoIterator<Item = (usize, Vec2)>) -> PointIndex {
        PointIndex::with_cell_size(points, DEFAULT_CELL_SIZE)
    }

    pub fn with_cell_size(points: impl IntoIterator<Item = (usize, Vec2)>, cell: f64) -> PointIndex {
        let points: Vec<(usize, Vec2)> = points.into_iter().collect();
        let Some(&(_, first)) = points.first() else {
            return PointIndex {
                grid: None,
                start: Vec::new(),
                entries: Vec::new(),
            };
        };
        let (mut min, mut max) = (first, first);
        for (_, p) in &points {
            debug_assert!(p.is_finite(), "non-finite point {p:?}");
            min = Vec2::new(min.x.min(p.x), min.y.min(p.y));
            max = Vec2::new(max.x.max(p.x), max.y.max(p.y));
        }
        let grid = Grid::covering(min, max, cell);
        let items: Vec<(usize, (usize, Vec2))> = points
            .iter()
            .map(|&(id, p)| (grid.index(grid.col(p.x), grid.row(p.y)), (id, p)))
            .collect();
        let (start, entries) = pack(grid.len(), &items);
        PointIndex {
            grid: Some(grid),
            start,
            entries,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Ids of all points within `radius` of `center` (inclusive), ascending.
    pub fn query(&self, center: Vec2, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.query_into(center, radius, &mut out);
        out
    }

    /// Like [`PointIndex::query`] but reuses `out`, which is cleared first.
    pub fn query_into(&self, center: Vec2, radius: f64, out: &mut Vec<usize>) {
        out.clear();
        let Some(grid) = &self.grid else { return };
        let reach = Vec2::new(radius, radius);
        let Some((c0, c1, r0, r1)) = grid.span(center - reach, center + reach) else {
            return;
        };
        let radius_sq = radius * radius;
        for row in r0..=r1 {
            let lo = self.start[grid.index(c0, row)] as usize;
            let hi = self.start[grid.index(c1, row) + 1] as usize;
            for &(id, p) in &self.entries[lo..hi] {
                if (p - center).length_squared() <= radius_sq {
                    out.push(id);
                }
            }
        }
        out.sort_unstable();
    }
}

/// Index over static rectangles; built once per episode.
#[derive(Clone, Debug)]
pub struct RectIndex {
    grid: Option<Grid>,
    start: Vec<u32>,
    slots: Vec<u32>,
    rects: Vec<(usize, Rect)>,
}

impl RectIndex {
    pub fn build(rects: impl IntoIterator<Item = (usize, Rect)>) -> RectIndex {
        RectIndex::with_cell_size(rects, DEFAULT_CELL_SIZE)
    }

    pub fn with_cell_size(rects: impl IntoIterator<Item = (usize, Rect)>, cell: f64) -> RectIndex {
        let rects: Vec<(usize, Rect)> = rects.into_iter().collect();
        let Some(&(_, first)) = rects.first() else {
            return RectIndex {
                grid: None,
                start: Vec::new(),
                slots: Vec::new(),
                rects,
            };
        };
        let (mut min, mut max) = (first.min, first.max);
        for (_, r) in &rects {
            debug_assert!(r.min.x <= r.max.x && r.min.y <= r.max.y, "inverted rect {r:?}");
            min = Vec2::new(min.x.min(r.min.x), min.y.min(r.min.y));
            max = Vec2::new(max.x.max(r.max.x), max.y.max(r.max.y));
        }
        let grid = Grid::covering(min, max, cell);
        let mut items = Vec::new();
        for (slot, (_, r)) in rects.iter().enumerate() {
            let (c0, c1, r0, r1) = grid.span(r.min, r.max).expect("rect lies inside its own grid");
            for row in r0..=r1 {
                for col in c0..=c1 {
                    items.push((grid.index(col, row), slot as u32));
                }
            }
        }
        let (start, slots) = pack(grid.len(), &items);
        RectIndex {
            grid: Some(grid),
            start,
            slots,
            rects,
        }
    }

    pub fn len(&self) -> usize {
        self.rects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    pub fn get(&self, slot: usize) -> (usize, Rect) {
        self.rects[slot]
    }

    /// Ids of rectangles whose closest point lies within `radius` of `center`, ascending.
    pub fn query(&self, center: Vec2, radius: f64) -> Vec<usize> {
        let Some(grid) = &self.grid else {
            return Vec::new();
        };
        let reach = Vec2::new(radius, radius);
        let Some((c0, c1, r0, r1)) = grid.span(center - reach, center + reach) else {
            return Vec::new();
        };
        let mut hits: Vec<u32> = Vec::new();
        for row in r0..=r1 {
            let lo = self.start[grid.index(c0, row)] as usize;
            let hi = self.start[grid.index(c1, row) + 1] as usize;
            hits.extend_from_slice(&self.slots[lo..hi]);
        }
        hits.sort_unstable();
        hits.dedup();
        let mut out: Vec<usize> = hits
            .into_iter()
            .map(|slot| self.rects[slot as usize])
            .filter(|(_, r)| r.distance_to(center) <= radius)
            .map(|(id, _)| id)
            .collect();
        out.sort_unstable();
        out
    }
}
