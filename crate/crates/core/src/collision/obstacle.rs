//! Static polygonal obstacles as linked vertex loops.
//!
//! Solid polygons (terrain rectangles) are wound counter-clockwise, so their
//! interior lies left of every edge. An enclosing boundary (the map edge) is
//! wound clockwise, which puts the walkable area on the outside of its edges
//! from the algorithm's point of view and makes all of its vertices
//! non-convex.

use crate::geometry::{Rect, Vec2};
use crate::spatial::RectIndex;

use super::{Disc, HalfPlane, LineSource, EPSILON};

#[derive(Clone, Copy, Debug, PartialEq)]
struct Vertex {
    point: Vec2,
    /// Unit vector towards the next vertex.
    unit_dir: Vec2,
    next: usize,
    prev: usize,
    is_convex: bool,
}

/// A directed edge between consecutive vertices of an obstacle loop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub id: usize,
    pub a: Vec2,
    pub b: Vec2,
    pub a_convex: bool,
    pub b_convex: bool,
}

#[derive(Clone, Debug)]
pub struct ObstacleSet {
    vertices: Vec<Vertex>,
    index: RectIndex,
}

impl Default for ObstacleSet {
    fn default() -> Self {
        ObstacleSet::new(Vec::new())
    }
}

fn left_of(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (a - c).det(b - a)
}

impl ObstacleSet {
    /// Builds the set from vertex loops; each loop needs at least two vertices.
    pub fn new(loops: Vec<Vec<Vec2>>) -> ObstacleSet {
        let mut vertices = Vec::new();
        for poly in loops {
            assert!(poly.len() >= 2, "obstacle loops need at least two vertices");
            let base = vertices.len();
            let n = poly.len();
            for (i, &point) in poly.iter().enumerate() {
                let next = poly[(i + 1) % n];
                let prev = poly[(i + n - 1) % n];
                vertices.push(Vertex {
                    point,
                    unit_dir: (next - point).normalize(),
                    next: base + (i + 1) % n,
                    prev: base + (i + n - 1) % n,
                    is_convex: n == 2 || left_of(prev, point, next) >= 0.0,
                });
            }
        }
        let index = RectIndex::build(vertices.iter().enumerate().map(|(id, v)| {
            let b = vertices[v.next].point;
            let min = Vec2::new(v.point.x.min(b.x), v.point.y.min(b.y));
            let max = Vec2::new(v.point.x.max(b.x), v.point.y.max(b.y));
            (id, Rect::from_corners(min, max))
        }));
        ObstacleSet { vertices, index }
    }

    /// Solid rectangles plus, optionally, a `width` x `height` map boundary.
    pub fn from_rects(rects: &[Rect], boundary: Option<(f64, f64)>) -> ObstacleSet {
        let mut loops: Vec<Vec<Vec2>> = rects
            .iter()
            .map(|r| {
                vec![
                    r.min,
                    Vec2::new(r.max.x, r.min.y),
                    r.max,
                    Vec2::new(r.min.x, r.max.y),
                ]
            })
            .collect();
        if let Some((w, h)) = boundary {
            loops.push(vec![
                Vec2::ZERO,
                Vec2::new(0.0, h),
                Vec2::new(w, h),
                Vec2::new(w, 0.0),
            ]);
        }
        ObstacleSet::new(loops)
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn segment_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn segment(&self, id: usize) -> Segment {
        let v = &self.vertices[id];
        let n = &self.vertices[v.next];
        Segment {
            id,
            a: v.point,
            b: n.point,
            a_convex: v.is_convex,
            b_convex: n.is_convex,
        }
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        (0..self.vertices.len()).map(|id| self.segment(id))
    }

    /// Segments within `range` of `position` that face it, nearest first.
    pub fn neighbors(&self, position: Vec2, range: f64) -> Vec<usize> {
        let range_sq = range * range;
        let mut found: Vec<(f64, usize)> = self
            .index
            .query(position, range)
            .into_iter()
            .filter_map(|id| {
                let v = &self.vertices[id];
                let b = self.vertices[v.next].point;
                // Only edges whose outward side faces the agent can block it.
                if left_of(v.point, b, position) >= 0.0 {
                    return None;
                }
                let d = distance_sq_to_segment(v.point, b, position);
                (d < range_sq).then_some((d, id))
            })
            .collect();
        found.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        found.into_iter().map(|(_, id)| id).collect()
    }
}

fn distance_sq_to_segment(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    let r = (c - a).dot(b - a) / (b - a).length_squared();
    if r < 0.0 {
        (c - a).length_squared()
    } else if r > 1.0 {
        (c - b).length_squared()
    } else {
        (c - (a + r * (b - a))).length_squared()
    }
}

/// Constraints keeping `disc` clear of the given segments for `tau` seconds.
///
/// `segments` should be ordered nearest first (as returned by
/// [`ObstacleSet::neighbors`]); a segment whose velocity obstacle is already
/// covered by an earlier line adds nothing. The disc takes the full
/// correction: terrain never moves.
pub fn obstacle_halfplanes(
    disc: &Disc,
    obstacles: &ObstacleSet,
    segments: &[usize],
    tau: f64,
) -> Vec<HalfPlane> {
    let mut lines = Vec::new();
    push_obstacle_lines(disc, obstacles, segments, tau, &mut lines);
    lines
}

pub(crate) fn push_obstacle_lines(
    disc: &Disc,
    obstacles: &ObstacleSet,
    segments: &[usize],
    tau: f64,
    lines: &mut Vec<HalfPlane>,
) {
    let inv_tau = 1.0 / tau;
    let radius = disc.radius;
    let radius_sq = radius * radius;
    let position = disc.position;
    let velocity = disc.velocity;
    let verts = &obstacles.vertices;
    let obstacle_line = |point: Vec2, direction: Vec2| HalfPlane {
        point,
        direction,
        source: LineSource::Obstacle,
    };

    for &id in segments {
        let mut o1 = id;
        let mut o2 = verts[id].next;
        let rel1 = verts[o1].point - position;
        let rel2 = verts[o2].point - position;

        let already_covered = lines.iter().any(|l| {
            (inv_tau * rel1 - l.point).det(l.direction) - inv_tau * radius >= -EPSILON
                && (inv_tau * rel2 - l.point).det(l.direction) - inv_tau * radius >= -EPSILON
        });
        if already_covered {
            continue;
        }

        let dist_sq1 = rel1.length_squared();
        let dist_sq2 = rel2.length_squared();
        let obstacle_vector = verts[o2].point - verts[o1].point;
        let s = (-rel1).dot(obstacle_vector) / obstacle_vector.length_squared();
        let dist_sq_line = (-rel1 - s * obstacle_vector).length_squared();

        if s < 0.0 && dist_sq1 <= radius_sq {
            // Touching the left vertex.
            if verts[o1].is_convex {
                lines.push(obstacle_line(Vec2::ZERO, Vec2::new(-rel1.y, rel1.x).normalize()));
            }
            continue;
        } else if s > 1.0 && dist_sq2 <= radius_sq {
            // Touching the right vertex; the next edge handles it unless this
            // side faces the disc.
            if verts[o2].is_convex && rel2.det(verts[o2].unit_dir) >= 0.0 {
                lines.push(obstacle_line(Vec2::ZERO, Vec2::new(-rel2.y, rel2.x).normalize()));
            }
            continue;
        } else if (0.0..1.0).contains(&s) && dist_sq_line <= radius_sq {
            // Touching the edge itself.
            lines.push(obstacle_line(Vec2::ZERO, -verts[o1].unit_dir));
            continue;
        }

        // No contact: build the legs of the velocity obstacle.
        let left_leg = |rel: Vec2, dist_sq: f64| {
            let leg = (dist_sq - radius_sq).sqrt();
            Vec2::new(rel.x * leg - rel.y * radius, rel.x * radius + rel.y * leg) / dist_sq
        };
        let right_leg = |rel: Vec2, dist_sq: f64| {
            let leg = (dist_sq - radius_sq).sqrt();
            Vec2::new(rel.x * leg + rel.y * radius, -rel.x * radius + rel.y * leg) / dist_sq
        };
        let mut left_leg_direction;
        let mut right_leg_direction;
        if s < 0.0 && dist_sq_line <= radius_sq {
            // Seen obliquely: the left vertex defines the whole obstacle.
            if !verts[o1].is_convex {
                continue;
            }
            o2 = o1;
            left_leg_direction = left_leg(rel1, dist_sq1);
            right_leg_direction = right_leg(rel1, dist_sq1);
        } else if s > 1.0 && dist_sq_line <= radius_sq {
            // Seen obliquely: the right vertex defines the whole obstacle.
            if !verts[o2].is_convex {
                continue;
            }
            o1 = o2;
            left_leg_direction = left_leg(rel2, dist_sq2);
            right_leg_direction = right_leg(rel2, dist_sq2);
        } else {
            left_leg_direction = if verts[o1].is_convex {
                left_leg(rel1, dist_sq1)
            } else {
                -verts[o1].unit_dir
            };
            right_leg_direction = if verts[o2].is_convex {
                right_leg(rel2, dist_sq2)
            } else {
                verts[o1].unit_dir
            };
        }

        // A leg pointing into the neighbouring edge is replaced by that edge,
        // and projecting onto such a "foreign" leg adds no constraint.
        let left_neighbor = verts[o1].prev;
        let mut left_foreign = false;
        let mut right_foreign = false;
        if verts[o1].is_convex && left_leg_direction.det(-verts[left_neighbor].unit_dir) >= 0.0 {
            left_leg_direction = -verts[left_neighbor].unit_dir;
            left_foreign = true;
        }
        if verts[o2].is_convex && right_leg_direction.det(verts[o2].unit_dir) <= 0.0 {
            right_leg_direction = verts[o2].unit_dir;
            right_foreign = true;
        }

        let left_cutoff = inv_tau * (verts[o1].point - position);
        let right_cutoff = inv_tau * (verts[o2].point - position);
        let cutoff_vec = right_cutoff - left_cutoff;
        let same_vertex = o1 == o2;

        let t = if same_vertex {
            0.5
        } else {
            (velocity - left_cutoff).dot(cutoff_vec) / cutoff_vec.length_squared()
        };
        let t_left = (velocity - left_cutoff).dot(left_leg_direction);
        let t_right = (velocity - right_cutoff).dot(right_leg_direction);

        if (t < 0.0 && t_left < 0.0) || (same_vertex && t_left < 0.0 && t_right < 0.0) {
            let unit_w = (velocity - left_cutoff).normalize();
            lines.push(obstacle_line(
                left_cutoff + radius * inv_tau * unit_w,
                Vec2::new(unit_w.y, -unit_w.x),
            ));
            continue;
        } else if t > 1.0 && t_right < 0.0 {
            let unit_w = (velocity - right_cutoff).normalize();
            lines.push(obstacle_line(
                right_cutoff + radius * inv_tau * unit_w,
                Vec2::new(unit_w.y, -unit_w.x),
            ));
            continue;
        }

        let dist_sq_cutoff = if !(0.0..=1.0).contains(&t) || same_vertex {
            f64::INFINITY
        } else {
            (velocity - (left_cutoff + t * cutoff_vec)).length_squared()
        };
        let dist_sq_left = if t_left < 0.0 {
            f64::INFINITY
        } else {
            (velocity - (left_cutoff + t_left * left_leg_direction)).length_squared()
        };
        let dist_sq_right = if t_right < 0.0 {
            f64::INFINITY
        } else {
            (velocity - (right_cutoff + t_right * right_leg_direction)).length_squared()
        };

        if dist_sq_cutoff <= dist_sq_left && dist_sq_cutoff <= dist_sq_right {
            let direction = -verts[o1].unit_dir;
            lines.push(obstacle_line(
                left_cutoff + radius * inv_tau * direction.perp(),
                direction,
            ));
        } else if dist_sq_left <= dist_sq_right {
            if left_foreign {
                continue;
            }
            let direction = left_leg_direction;
            lines.push(obstacle_line(
                left_cutoff + radius * inv_tau * direction.perp(),
                direction,
            ));
        } else {
            if right_foreign {
                continue;
            }
            let direction = -right_leg_direction;
            lines.push(obstacle_line(
                right_cutoff + radius * inv_tau * direction.perp(),
                direction,
            ));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::lp::solve_velocity;
    use crate::scenario::Plane;

    fn mover(x: f64, y: f64, radius: f64, velocity: Vec2) -> Disc {
        Disc {
            velocity,
            preferred_velocity: velocity,
            is_static: false,
            ..Disc::new(0, Vec2::new(x, y), radius, 3.15, Plane::Ground)
        }
    }

    #[test]
    fn rectangles_are_counter_clockwise_and_convex() {
        let set = ObstacleSet::from_rects(&[Rect::new(0.0, 0.0, 2.0, 1.0)], None);
        assert_eq!(set.segment_count(), 4);
        assert!(set.segments().all(|s| s.a_convex && s.b_convex));
        let s = set.segment(0);
        assert_eq!((s.a, s.b), (Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0)));
    }

    #[test]
    fn boundary_vertices_are_not_convex() {
        let set = ObstacleSet::from_rects(&[], Some((32.0, 32.0)));
        assert!(set.segments().all(|s| !s.a_convex));
        // Inside the map, the nearby boundary edges face the agent.
        assert_eq!(set.neighbors(Vec2::new(1.0, 16.0), 2.0).len(), 1);
    }

    #[test]
    fn distant_wall_emits_no_constraint() {
        // Wall 5 units away; reach is radius 1.5 + 1 s * 3.15.
        let set = ObstacleSet::from_rects(&[Rect::new(10.0, 0.0, 1.0, 20.0)], None);
        let disc = mover(5.0, 10.0, 1.5, Vec2::new(3.15, 0.0));
        let range = disc.radius + 1.0 * disc.max_speed;
        assert!(5.0 > range);
        assert!(set.neighbors(disc.position, range).is_empty());
    }

    #[test]
    fn parallel_motion_along_wall_is_unchanged() {
        // Wall occupies x in [10, 11]; disc touching-distance away, moving up.
        let set = ObstacleSet::from_rects(&[Rect::new(10.0, 0.0, 1.0, 20.0)], None);
        let v = Vec2::new(0.0, 2.0);
        let disc = mover(9.5, 5.0, 0.5, v);
        let segs = set.neighbors(disc.position, disc.radius + disc.max_speed);
        assert!(!segs.is_empty());
        let lines = obstacle_halfplanes(&disc, &set, &segs, 1.0);
        let out = solve_velocity(disc.preferred_velocity, disc.max_speed, &lines, lines.len());
        assert!((out - v).length() < 1e-9, "{out:?}");
        let next = disc.position + out / 16.0;
        assert!(set_distance(&set, next) >= disc.radius - 1e-9);
    }

    #[test]
    fn approach_stops_short_of_wall() {
        let set = ObstacleSet::from_rects(&[Rect::new(10.0, 0.0, 1.0, 20.0)], None);
        let mut disc = mover(7.0, 10.0, 0.5, Vec2::ZERO);
        disc.preferred_velocity = Vec2::new(3.0, 0.0);
        for _ in 0..200 {
            let segs = set.neighbors(disc.position, disc.radius + disc.max_speed);
            let lines = obstacle_halfplanes(&disc, &set, &segs, 1.0);
            disc.velocity =
                solve_velocity(disc.preferred_velocity, disc.max_speed, &lines, lines.len());
            disc.position += disc.velocity / 16.0;
            assert!(set_distance(&set, disc.position) >= disc.radius - 1e-6);
        }
        assert!(disc.position.x > 9.0);
    }

    fn set_distance(set: &ObstacleSet, p: Vec2) -> f64 {
        set.segments()
            .map(|s| distance_sq_to_segment(s.a, s.b, p).sqrt())
            .fold(f64::INFINITY, f64::min)
    }
}
