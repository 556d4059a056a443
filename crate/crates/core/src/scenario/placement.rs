//! Initial unit layout: each group fills a square lattice around its centre.

use crate::geometry::Vec2;

use super::error::{Result, ScenarioError};
use super::{Faction, Scenario};

#[derive(Clone, Debug, PartialEq)]
pub struct Placement {
    pub faction: Faction,
    /// Unit-type reference as written in the group.
    pub unit_type: String,
    pub position: Vec2,
}

/// Lays out every group on a square lattice.
///
/// The lattice has side `ceil(sqrt(n))` and pitch equal to the largest unit
/// diameter in the group, so no two units overlap. It fills row by row from
/// the north-west corner; a lattice poking out of the map is translated back
/// inside. Groups and unit types keep their declaration order.
pub fn place_groups(scenario: &Scenario) -> Result<Vec<Placement>> {
    let (width, height) = (scenario.width as f64, scenario.height as f64);
    let mut out = Vec::with_capacity(scenario.num_allied_units + scenario.num_enemy_units);

    for (index, group) in scenario.groups.iter().enumerate() {
        let count = group.count();
        let pitch = group
            .units
            .iter()
            .map(|(r, _)| scenario.unit_type(r).size)
            .fold(0.0, f64::max);
        let side = (1..).find(|k| k * k >= count).expect("count is finite");
        let half_span = (side - 1) as f64 * pitch * 0.5;
        let reach = half_span + pitch * 0.5;

        let fit = |centre: f64, extent: f64| -> Option<f64> {
            if 2.0 * reach > extent {
                None
            } else {
                Some(centre.clamp(reach, extent - reach))
            }
        };
        let overflow = || ScenarioError::PlacementOverflow {
            group: index,
            count,
            pitch,
        };
        let cx = fit(group.position.x, width).ok_or_else(overflow)?;
        let cy = fit(group.position.y, height).ok_or_else(overflow)?;

        let slots = (0..count).map(|i| {
            let (row, col) = (i / side, i % side);
            Vec2::new(
                cx - half_span + col as f64 * pitch,
                cy + half_span - row as f64 * pitch,
            )
        });
        let types = group
            .units
            .iter()
            .flat_map(|(r, n)| std::iter::repeat_n(r, *n));
        for (reference, position) in types.zip(slots) {
            out.push(Placement {
                faction: group.faction,
                unit_type: reference.clone(),
                position,
            });
        }
    }
    Ok(out)
}
