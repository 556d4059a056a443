//! Reciprocal collision avoidance for discs in the plane.
//!
//! Every moving disc turns each nearby disc and terrain edge into a half-plane
//! of safe velocities, then picks the safe velocity closest to the one it
//! wants (see [`lp`]). Two moving discs split the required correction evenly.
//! A disc with zero preferred velocity is *static*: it never moves, so its
//! neighbours take the full correction instead of half.

mod crowd;
pub mod lp;
mod obstacle;

use crate::geometry::Vec2;
use crate::scenario::Plane;

pub use crowd::{step_velocities, CollisionError, Constraints, Crowd, CrowdConfig};
pub use lp::{solve, solve_velocity, Solution};
pub use obstacle::{obstacle_halfplanes, ObstacleSet, Segment};

/// Tolerance for parallel-line and coverage tests, in grid units.
pub const EPSILON: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LineSource {
    Unit,
    Obstacle,
}

/// One velocity constraint. Velocities `v` with
/// `direction.det(v - point) >= 0` (left of the directed line) are allowed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfPlane {
    pub point: Vec2,
    pub direction: Vec2,
    pub source: LineSource,
}

impl HalfPlane {
    /// How far `v` lies behind the line; positive means violated.
    pub fn penetration(&self, v: Vec2) -> f64 {
        self.direction.det(self.point - v)
    }

    pub fn allows(&self, v: Vec2, tolerance: f64) -> bool {
        self.penetration(v) <= tolerance
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Disc {
    pub id: usize,
    pub position: Vec2,
    pub velocity: Vec2,
    pub preferred_velocity: Vec2,
    pub radius: f64,
    pub max_speed: f64,
    pub plane: Plane,
    /// Holds position this step: returns zero velocity and is never pushed.
    pub is_static: bool,
}

impl Disc {
    pub fn new(id: usize, position: Vec2, radius: f64, max_speed: f64, plane: Plane) -> Disc {
        Disc {
            id,
            position,
            velocity: Vec2::ZERO,
            preferred_velocity: Vec2::ZERO,
            radius,
            max_speed,
            plane,
            is_static: true,
        }
    }

    /// Sets the preferred velocity; a zero preference makes the disc static.
    pub fn prefer(&mut self, preferred: Vec2) {
        self.preferred_velocity = preferred;
        self.is_static = preferred.is_zero();
    }
}

/// The correction `u` for relative geometry, and the line direction at the
/// point of the velocity obstacle boundary it projects onto.
fn relative_correction(a: &Disc, b: &Disc, tau: f64, dt: f64) -> (Vec2, Vec2) {
    let relative_position = b.position - a.position;
    let relative_velocity = a.velocity - b.velocity;
    let dist_sq = relative_position.length_squared();
    let combined_radius = a.radius + b.radius;
    let combined_radius_sq = combined_radius * combined_radius;

    if dist_sq > combined_radius_sq {
        let inv_tau = 1.0 / tau;
        // Vector from the cutoff circle centre to the relative velocity.
        let w = relative_velocity - inv_tau * relative_position;
        let w_length_sq = w.length_squared();
        let dot = w.dot(relative_position);

        if dot < 0.0 && dot * dot > combined_radius_sq * w_length_sq {
            // Closest boundary point lies on the cutoff circle.
            let w_length = w_length_sq.sqrt();
            let unit_w = w / w_length;
            let direction = Vec2::new(unit_w.y, -unit_w.x);
            let u = (combined_radius * inv_tau - w_length) * unit_w;
            (u, direction)
        } else {
            // Closest boundary point lies on one of the legs.
            let leg = (dist_sq - combined_radius_sq).sqrt();
            let direction = if relative_position.det(w) > 0.0 {
                Vec2::new(
                    relative_position.x * leg - relative_position.y * combined_radius,
                    relative_position.x * combined_radius + relative_position.y * leg,
                ) / dist_sq
            } else {
                -Vec2::new(
                    relative_position.x * leg + relative_position.y * combined_radius,
                    -relative_position.x * combined_radius + relative_position.y * leg,
                ) / dist_sq
            };
            let u = relative_velocity.dot(direction) * direction - relative_velocity;
            (u, direction)
        }
    } else {
        // Already overlapping: resolve within a single step.
        let inv_dt = 1.0 / dt;
        let w = relative_velocity - inv_dt * relative_position;
        let w_length = w.length();
        let unit_w = if w_length > 0.0 {
            w / w_length
        } else {
            tie_break_normal(a.id, b.id)
        };
        let direction = Vec2::new(unit_w.y, -unit_w.x);
        let u = (combined_radius * inv_dt - w_length) * unit_w;
        (u, direction)
    }
}

/// Deterministic unit vector for a degenerate pair; `(a, b)` and `(b, a)`
/// receive opposite vectors.
fn tie_break_normal(a: usize, b: usize) -> Vec2 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    // splitmix64 finaliser
    let mut z = ((lo as u64) << 32 ^ hi as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    let angle = (z >> 11) as f64 / (1u64 << 53) as f64 * std::f64::consts::TAU;
    let n = Vec2::new(angle.cos(), angle.sin());
    if a < b {
        n
    } else {
        -n
    }
}

/// The constraint `b` imposes on `a`.
///
/// `a` takes half of the correction when `b` also moves, all of it when `b`
/// is static. Overlapping pairs are resolved over one step of length `dt`.
pub fn unit_halfplane(a: &Disc, b: &Disc, tau: f64, dt: f64) -> HalfPlane {
    let (u, direction) = relative_correction(a, b, tau, dt);
    let share = if b.is_static { 1.0 } else { 0.5 };
    HalfPlane {
        point: a.velocity + share * u,
        direction,
        source: LineSource::Unit,
    }
}

/// The raw correction vector `u` for `a` against `b`.
pub fn correction(a: &Disc, b: &Disc, tau: f64, dt: f64) -> Vec2 {
    relative_correction(a, b, tau, dt).0
}
