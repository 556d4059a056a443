use std::collections::BTreeMap;

use thiserror::Error;

use crate::geometry::Vec2;
use crate::scenario::Plane;
use crate::spatial::PointIndex;

use super::lp::solve;
use super::obstacle::{push_obstacle_lines, ObstacleSet};
use super::{unit_halfplane, Disc, HalfPlane};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CollisionError {
    #[error("disc {0} is already registered")]
    DuplicateId(usize),
    #[error("no disc with id {0}")]
    UnknownId(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrowdConfig {
    /// Avoidance horizon in seconds.
    pub tau: f64,
    /// Length of one simulation step; overlaps are resolved within it.
    pub dt: f64,
}

impl Default for CrowdConfig {
    fn default() -> Self {
        CrowdConfig {
            tau: 1.0,
            dt: 1.0 / 16.0,
        }
    }
}

/// The lines built for one disc, in the order they are handed to the solver.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraints {
    pub lines: Vec<HalfPlane>,
    pub obstacle_count: usize,
    /// Unit neighbours behind `lines[obstacle_count..]`, in the same order.
    pub neighbors: Vec<usize>,
}

/// The set of live discs plus the static terrain they avoid.
#[derive(Clone, Debug, Default)]
pub struct Crowd {
    config: CrowdConfig,
    obstacles: ObstacleSet,
    discs: BTreeMap<usize, Disc>,
}

impl Crowd {
    pub fn new(config: CrowdConfig, obstacles: ObstacleSet) -> Crowd {
        Crowd {
            config,
            obstacles,
            discs: BTreeMap::new(),
        }
    }

    pub fn config(&self) -> CrowdConfig {
        self.config
    }

    pub fn obstacles(&self) -> &ObstacleSet {
        &self.obstacles
    }

    pub fn len(&self) -> usize {
        self.discs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.discs.is_empty()
    }

    pub fn add_disc(&mut self, disc: Disc) -> Result<(), CollisionError> {
        if self.discs.contains_key(&disc.id) {
            return Err(CollisionError::DuplicateId(disc.id));
        }
        self.discs.insert(disc.id, disc);
        Ok(())
    }

    pub fn remove_disc(&mut self, id: usize) -> Result<Disc, CollisionError> {
        self.discs.remove(&id).ok_or(CollisionError::UnknownId(id))
    }

    pub fn remove_all(&mut self) {
        self.discs.clear();
    }

    pub fn disc(&self, id: usize) -> Option<&Disc> {
        self.discs.get(&id)
    }

    pub fn disc_mut(&mut self, id: usize) -> Result<&mut Disc, CollisionError> {
        self.discs.get_mut(&id).ok_or(CollisionError::UnknownId(id))
    }

    pub fn discs(&self) -> impl Iterator<Item = &Disc> {
        self.discs.values()
    }

    /// New velocities for every disc, ascending by id.
    pub fn step_velocities(&self) -> Vec<(usize, Vec2)> {
        let snapshot: Vec<Disc> = self.discs.values().copied().collect();
        let velocities = step_velocities(&snapshot, &self.obstacles, self.config);
        snapshot.iter().map(|d| d.id).zip(velocities).collect()
    }

    /// The constraints disc `id` would solve against this step.
    pub fn constraints(&self, id: usize) -> Result<Constraints, CollisionError> {
        let snapshot: Vec<Disc> = self.discs.values().copied().collect();
        let slot = snapshot
            .iter()
            .position(|d| d.id == id)
            .ok_or(CollisionError::UnknownId(id))?;
        let world = World::new(&snapshot, &self.obstacles, self.config);
        Ok(world.constraints(slot))
    }
}

/// Computes every disc's velocity for the next step from one frozen snapshot.
///
/// Output is aligned with `discs`. Static discs get exactly zero. Because
/// every disc reads only the snapshot, the result does not depend on the
/// order of `discs`.
pub fn step_velocities(discs: &[Disc], obstacles: &ObstacleSet, config: CrowdConfig) -> Vec<Vec2> {
    let world = World::new(discs, obstacles, config);
    (0..discs.len()).map(|slot| world.velocity(slot)).collect()
}

struct World<'a> {
    discs: Vec<Disc>,
    obstacles: &'a ObstacleSet,
    index: PointIndex,
    config: CrowdConfig,
    max_radius: f64,
    max_speed: f64,
}

impl<'a> World<'a> {
    fn new(discs: &[Disc], obstacles: &'a ObstacleSet, config: CrowdConfig) -> World<'a> {
        let discs: Vec<Disc> = discs
            .iter()
            .map(|d| {
                let mut d = *d;
                // A static disc will not move this step, whatever it did last.
                if d.is_static {
                    d.velocity = Vec2::ZERO;
                }
                d
            })
            .collect();
        let index = PointIndex::build(discs.iter().enumerate().map(|(i, d)| (i, d.position)));
        let max_radius = discs.iter().map(|d| d.radius).fold(0.0, f64::max);
        let max_speed = discs
            .iter()
            .map(|d| d.max_speed.max(d.velocity.length()))
            .fold(0.0, f64::max);
        World {
            discs,
            obstacles,
            index,
            config,
            max_radius,
            max_speed,
        }
    }

    fn constraints(&self, slot: usize) -> Constraints {
        let a = &self.discs[slot];
        let tau = self.config.tau;
        let mut lines = Vec::new();

        if a.plane == Plane::Ground && !self.obstacles.is_empty() {
            let segments = self.obstacles.neighbors(a.position, a.radius + tau * a.max_speed);
            push_obstacle_lines(a, self.obstacles, &segments, tau, &mut lines);
        }
        let obstacle_count = lines.len();

        // Anything that can reach `a` within the horizon.
        let range = a.radius + self.max_radius + tau * (a.max_speed + self.max_speed);
        let mut neighbors = Vec::new();
        for other in self.index.query(a.position, range) {
            let b = &self.discs[other];
            if other == slot || b.plane != a.plane {
                continue;
            }
            lines.push(unit_halfplane(a, b, tau, self.config.dt));
            neighbors.push(b.id);
        }
        // Index order is slot order; make line order follow ids instead.
        let mut order: Vec<usize> = (0..neighbors.len()).collect();
        order.sort_by_key(|&i| neighbors[i]);
        let unit_lines: Vec<HalfPlane> = order.iter().map(|&i| lines[obstacle_count + i]).collect();
        lines.truncate(obstacle_count);
        lines.extend(unit_lines);
        let neighbors = order.iter().map(|&i| neighbors[i]).collect();

        Constraints {
            lines,
            obstacle_count,
            neighbors,
        }
    }

    fn velocity(&self, slot: usize) -> Vec2 {
        let a = &self.discs[slot];
        if a.is_static {
            return Vec2::ZERO;
        }
        let c = self.constraints(slot);
        solve(a.preferred_velocity, a.max_speed, &c.lines, c.obstacle_count).velocity
    }
}
