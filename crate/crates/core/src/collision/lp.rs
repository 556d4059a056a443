//! Incremental 2D linear programming over half-planes and a speed disc.
//!
//! Lines are added one at a time; whenever the running optimum violates the
//! newly added line, the optimum is recomputed on that line (a 1D problem).
//! If the lines have no common point inside the disc, a fallback program
//! minimises the largest distance by which the velocity lies behind any unit
//! line while keeping obstacle lines hard.

use crate::geometry::Vec2;

use super::{HalfPlane, EPSILON};

/// Result of [`solve`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Solution {
    pub velocity: Vec2,
    /// Index of the first line that made the program infeasible, if any.
    pub infeasible_from: Option<usize>,
}

/// The velocity closest to `preferred` that satisfies every line and has
/// speed at most `max_speed`. See [`solve`] for the infeasible case.
pub fn solve_velocity(
    preferred: Vec2,
    max_speed: f64,
    lines: &[HalfPlane],
    obstacle_count: usize,
) -> Vec2 {
    solve(preferred, max_speed, lines, obstacle_count).velocity
}

/// Like [`solve_velocity`] but reports whether the fallback program ran.
///
/// The first `obstacle_count` lines are hard constraints that the fallback
/// never relaxes.
pub fn solve(preferred: Vec2, max_speed: f64, lines: &[HalfPlane], obstacle_count: usize) -> Solution {
    debug_assert!(obstacle_count <= lines.len());
    let mut velocity = Vec2::ZERO;
    let failed = solve_2d(lines, max_speed, preferred, false, &mut velocity);
    if failed < lines.len() {
        solve_fallback(lines, obstacle_count, failed, max_speed, &mut velocity);
        Solution {
            velocity,
            infeasible_from: Some(failed),
        }
    } else {
        Solution {
            velocity,
            infeasible_from: None,
        }
    }
}

/// Optimises along line `line_no` subject to lines `0..line_no` and the disc.
/// Returns `false` when the feasible chord is empty.
fn solve_on_line(
    lines: &[HalfPlane],
    line_no: usize,
    radius: f64,
    optimum: Vec2,
    optimize_direction: bool,
    result: &mut Vec2,
) -> bool {
    let line = &lines[line_no];
    let dot = line.point.dot(line.direction);
    let discriminant = dot * dot + radius * radius - line.point.length_squared();
    if discriminant < 0.0 {
        // The line misses the speed disc entirely.
        return false;
    }
    let root = discriminant.sqrt();
    let mut t_left = -dot - root;
    let mut t_right = -dot + root;

    for other in &lines[..line_no] {
        let denominator = line.direction.det(other.direction);
        let numerator = other.direction.det(line.point - other.point);
        if denominator.abs() <= EPSILON {
            // Parallel lines: either `other` contains all of `line` or none of it.
            if numerator < 0.0 {
                return false;
            }
            continue;
        }
        let t = numerator / denominator;
        if denominator >= 0.0 {
            t_right = t_right.min(t);
        } else {
            t_left = t_left.max(t);
        }
        if t_left > t_right {
            return false;
        }
    }

    *result = if optimize_direction {
        if optimum.dot(line.direction) > 0.0 {
            line.point + t_right * line.direction
        } else {
            line.point + t_left * line.direction
        }
    } else {
        let t = line.direction.dot(optimum - line.point);
        line.point + t.clamp(t_left, t_right) * line.direction
    };
    true
}

/// Returns the number of lines processed successfully; `lines.len()` on success.
fn solve_2d(
    lines: &[HalfPlane],
    radius: f64,
    optimum: Vec2,
    optimize_direction: bool,
    result: &mut Vec2,
) -> usize {
    *result = if optimize_direction {
        // `optimum` is a unit direction here.
        optimum * radius
    } else if optimum.length_squared() > radius * radius {
        optimum.normalize() * radius
    } else {
        optimum
    };

    for (i, line) in lines.iter().enumerate() {
        if line.direction.det(line.point - *result) > 0.0 {
            let previous = *result;
            if !solve_on_line(lines, i, radius, optimum, optimize_direction, result) {
                *result = previous;
                return i;
            }
        }
    }
    lines.len()
}

/// Minimises the maximum penetration behind lines `obstacle_count..`, starting
/// from the line where [`solve_2d`] gave up.
fn solve_fallback(
    lines: &[HalfPlane],
    obstacle_count: usize,
    begin: usize,
    radius: f64,
    result: &mut Vec2,
) {
    let mut distance = 0.0;
    let mut projected: Vec<HalfPlane> = Vec::with_capacity(lines.len());

    for i in begin..lines.len() {
        let line = &lines[i];
        if line.direction.det(line.point - *result) <= distance {
            continue;
        }
        // Project the earlier unit lines onto this one: the bisector of two
        // lines is where their penetrations are equal.
        projected.clear();
        projected.extend_from_slice(&lines[..obstacle_count]);
        for other in &lines[obstacle_count..i] {
            let determinant = line.direction.det(other.direction);
            let point = if determinant.abs() <= EPSILON {
                if line.direction.dot(other.direction) > 0.0 {
                    // Same direction: `other` never binds more than `line`.
                    continue;
                }
                0.5 * (line.point + other.point)
            } else {
                line.point
                    + (other.direction.det(line.point - other.point) / determinant) * line.direction
            };
            projected.push(HalfPlane {
                point,
                direction: (other.direction - line.direction).normalize(),
                source: other.source,
            });
        }

        let previous = *result;
        let away = line.direction.perp();
        if solve_2d(&projected, radius, away, true, result) < projected.len() {
            // Only floating-point error can land here; keep the last good answer.
            *result = previous;
        }
        distance = line.direction.det(line.point - *result);
    }
}
