//! Damage, healing and the area targeters.

use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;
use crate::scenario::Targeter;

use super::unit::Unit;

/// Healing per second of a HEAL targeter.
pub const HEAL_RATE: f64 = 9.0;
/// Energy spent per point of health restored.
pub const HEAL_ENERGY_COST: f64 = 1.0 / 3.0;

/// One hit: what it removed from the target.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DamageRecord {
    pub game_step: u64,
    pub attacker: usize,
    pub target: usize,
    pub shield_damage: f64,
    pub health_damage: f64,
    pub killed: bool,
}

/// A completed volley or heal, for bookkeeping.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Strike {
    pub records: Vec<DamageRecord>,
    /// Units that died during the strike, the attacker included.
    pub deaths: Vec<usize>,
    pub healed: f64,
}

/// Deals one volley of `attacks` hits from `attacker` to `target`.
///
/// Shields absorb first; armor only reduces what gets through to health.
/// Hits stop once the target dies. Does not touch the attacker's cooldown.
pub fn apply_attack(units: &mut [Unit], attacker: usize, target: usize, game_step: u64, out: &mut Strike) {
    let kind = units[attacker].unit_type.clone();
    let t = &mut units[target];
    let raw = kind.damage_against(&t.unit_type.attributes);
    let armor = t.unit_type.armor;
    for _ in 0..kind.attacks {
        if !t.alive {
            break;
        }
        let shield_damage = t.shield.min(raw);
        let remainder = raw - shield_damage;
        let health_damage = if remainder > 0.0 {
            (remainder - armor).max(0.0).min(t.health)
        } else {
            0.0
        };
        t.shield -= shield_damage;
        t.health -= health_damage;
        t.last_damaged_at = Some(game_step);
        if !t.attackers_this_step.contains(&attacker) {
            t.attackers_this_step.push(attacker);
        }
        let killed = t.health <= 0.0;
        if killed {
            t.kill();
            out.deaths.push(target);
        }
        out.records.push(DamageRecord {
            game_step,
            attacker,
            target,
            shield_damage,
            health_damage,
            killed,
        });
    }
}

/// Heals `target` for one game step of length `dt`, limited by the healer's
/// energy and the target's missing health. Returns the amount healed.
pub fn apply_heal(units: &mut [Unit], healer: usize, target: usize, dt: f64) -> f64 {
    let energy = units[healer].energy;
    let t = &units[target];
    if !t.alive {
        return 0.0;
    }
    let deficit = (t.unit_type.hp - t.health).max(0.0);
    let healed = (HEAL_RATE * dt).min(deficit).min(energy / HEAL_ENERGY_COST);
    if healed <= 0.0 {
        return 0.0;
    }
    units[target].health = (units[target].health + healed).min(units[target].unit_type.hp);
    units[healer].energy = (energy - healed * HEAL_ENERGY_COST).max(0.0);
    healed
}

/// Runs the attacker's targeter against its target.
pub fn execute_targeter(units: &mut [Unit], attacker: usize, target: usize, game_step: u64, dt: f64) -> Strike {
    let mut out = Strike::default();
    let kind = units[attacker].unit_type.clone();
    match kind.targeter {
        Targeter::Standard => apply_attack(units, attacker, target, game_step, &mut out),
        Targeter::Heal => out.healed = apply_heal(units, attacker, target, dt),
        Targeter::Kamikaze { radius } => {
            let centre = units[attacker].position;
            for victim in enemies_hit(units, attacker, |u| {
                u.position.distance(centre) - u.radius() <= radius
            }) {
                apply_attack(units, attacker, victim, game_step, &mut out);
            }
            units[attacker].kill();
            out.deaths.push(attacker);
        }
        Targeter::LaserBeam { width, height } => {
            let origin = units[attacker].position;
            let centre = units[target].position;
            let along = (centre - origin).normalize();
            let across = along.perp();
            for victim in enemies_hit(units, attacker, |u| {
                beam_distance(u.position - centre, along, across, width, height) <= u.radius()
            }) {
                apply_attack(units, attacker, victim, game_step, &mut out);
            }
        }
    }
    out
}

/// Living enemies of `attacker` that it may target and that satisfy `hit`.
fn enemies_hit(units: &[Unit], attacker: usize, hit: impl Fn(&Unit) -> bool) -> Vec<usize> {
    let a = &units[attacker];
    units
        .iter()
        .filter(|u| {
            u.alive && u.faction != a.faction && a.unit_type.can_target(u.unit_type.plane) && hit(u)
        })
        .map(|u| u.id)
        .collect()
}

/// Distance from `offset` (relative to the beam centre) to a rectangle that
/// is `height` long along `along` and `width` wide along `across`.
fn beam_distance(offset: Vec2, along: Vec2, across: Vec2, width: f64, height: f64) -> f64 {
    let a = (offset.dot(along).abs() - height * 0.5).max(0.0);
    let b = (offset.dot(across).abs() - width * 0.5).max(0.0);
    (a * a + b * b).sqrt()
}
