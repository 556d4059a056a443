//! Static per-type combat attributes and their JSON encoding.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde_json::{json, Map, Value};

use super::error::{Result, ScenarioError};
use super::fields::{self, Object};

/// Boundary-to-boundary reach granted by the `MELEE` sentinel.
pub const MELEE_RANGE: f64 = 0.1;

/// The layer a unit occupies. Units only collide with units in the same plane
/// and only [`Plane::Ground`] units collide with terrain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Plane {
    Ground,
    Air,
    Colossus,
}

impl Plane {
    pub const ALL: [Plane; 3] = [Plane::Ground, Plane::Air, Plane::Colossus];

    pub fn name(self) -> &'static str {
        match self {
            Plane::Ground => "GROUND",
            Plane::Air => "AIR",
            Plane::Colossus => "COLOSSUS",
        }
    }

    fn parse(field: &str, s: &str) -> Result<Plane> {
        Plane::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| ScenarioError::InvalidEnum {
                kind: if field == "plane" { "plane" } else { "target plane" },
                value: s.to_owned(),
            })
    }

    fn bit(self) -> u8 {
        1 << self as u8
    }
}

impl fmt::Display for Plane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A set of planes, as declared in `valid_targets`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct PlaneSet(u8);

impl PlaneSet {
    pub fn new(planes: impl IntoIterator<Item = Plane>) -> Self {
        let mut set = PlaneSet::default();
        for p in planes {
            set.insert(p);
        }
        set
    }

    pub fn insert(&mut self, plane: Plane) {
        self.0 |= plane.bit();
    }

    pub fn contains(self, plane: Plane) -> bool {
        self.0 & plane.bit() != 0
    }

    pub fn iter(self) -> impl Iterator<Item = Plane> {
        Plane::ALL.into_iter().filter(move |p| self.contains(*p))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CombatType {
    Damage,
    Healing,
}

impl CombatType {
    pub fn name(self) -> &'static str {
        match self {
            CombatType::Damage => "DAMAGE",
            CombatType::Healing => "HEALING",
        }
    }
}

/// How an attack is delivered.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Targeter {
    /// One target per hit.
    Standard,
    /// Explodes, hitting every enemy touching a circle of `radius` around the
    /// attacker, and dies.
    Kamikaze { radius: f64 },
    /// Hits every enemy touching a `width` x `height` rectangle centred on the
    /// target; `width` runs perpendicular to the attacker-target line.
    LaserBeam { width: f64, height: f64 },
    /// Restores health to an allied target.
    Heal,
}

impl Targeter {
    pub fn name(&self) -> &'static str {
        match self {
            Targeter::Standard => "STANDARD",
            Targeter::Kamikaze { .. } => "KAMIKAZE",
            Targeter::LaserBeam { .. } => "LASER_BEAM",
            Targeter::Heal => "HEAL",
        }
    }

    fn kwargs(&self) -> Map<String, Value> {
        let mut map = Map::new();
        match *self {
            Targeter::Kamikaze { radius } => {
                map.insert("radius".into(), json!(radius));
            }
            Targeter::LaserBeam { width, height } => {
                map.insert("width".into(), json!(width));
                map.insert("height".into(), json!(height));
            }
            Targeter::Standard | Targeter::Heal => {}
        }
        map
    }
}

/// Engagement distance, measured boundary to boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AttackRange {
    Melee,
    Distance(f64),
}

impl AttackRange {
    pub fn value(self) -> f64 {
        match self {
            AttackRange::Melee => MELEE_RANGE,
            AttackRange::Distance(d) => d,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnitType {
    pub hp: f64,
    /// Health per second.
    pub hp_regen: f64,
    pub shield: f64,
    pub energy: f64,
    pub initial_energy: f64,
    /// Diameter in grid squares.
    pub size: f64,
    /// Grid squares per second.
    pub speed: f64,
    pub combat_type: CombatType,
    pub damage: f64,
    pub armor: f64,
    pub attack_range: AttackRange,
    pub attacks: u32,
    /// Seconds between volleys.
    pub cooldown: f64,
    pub minimum_scan_range: f64,
    pub plane: Plane,
    /// Planes as declared. Use [`UnitType::can_target`] for the effective rule.
    pub valid_targets: PlaneSet,
    pub attributes: BTreeSet<String>,
    pub bonuses: BTreeMap<String, f64>,
    pub targeter: Targeter,
}

impl UnitType {
    pub fn radius(&self) -> f64 {
        self.size * 0.5
    }

    pub fn is_healer(&self) -> bool {
        self.combat_type == CombatType::Healing
    }

    /// Every unit may target the COLOSSUS plane regardless of its declared set.
    pub fn can_target(&self, plane: Plane) -> bool {
        plane == Plane::Colossus || self.valid_targets.contains(plane)
    }

    /// Raw per-hit damage against a target carrying `attributes`, before shields and armor.
    pub fn damage_against(&self, attributes: &BTreeSet<String>) -> f64 {
        self.damage
            + self
                .bonuses
                .iter()
                .filter(|(attr, _)| attributes.contains(*attr))
                .map(|(_, bonus)| bonus)
                .sum::<f64>()
    }

    pub fn from_json(text: &str) -> Result<UnitType> {
        parse_unit_type(text)
    }

    /// Full JSON encoding, every field explicit.
    pub fn to_json_value(&self) -> Value {
        let range = match self.attack_range {
            AttackRange::Melee => json!("MELEE"),
            AttackRange::Distance(d) => json!(d),
        };
        let mut obj = Map::new();
        obj.insert("hp".into(), json!(self.hp));
        obj.insert("hp_regen".into(), json!(self.hp_regen));
        obj.insert("shield".into(), json!(self.shield));
        obj.insert("energy".into(), json!(self.energy));
        obj.insert("initial_energy".into(), json!(self.initial_energy));
        obj.insert("size".into(), json!(self.size));
        obj.insert("speed".into(), json!(self.speed));
        obj.insert("combat_type".into(), json!(self.combat_type.name()));
        obj.insert("damage".into(), json!(self.damage));
        obj.insert("armor".into(), json!(self.armor));
        obj.insert("attack_range".into(), range);
        obj.insert("attacks".into(), json!(self.attacks));
        obj.insert("cooldown".into(), json!(self.cooldown));
        obj.insert("minimum_scan_range".into(), json!(self.minimum_scan_range));
        obj.insert("plane".into(), json!(self.plane.name()));
        obj.insert(
            "valid_targets".into(),
            Value::Array(self.valid_targets.iter().map(|p| json!(p.name())).collect()),
        );
        obj.insert(
            "attributes".into(),
            Value::Array(self.attributes.iter().map(|a| json!(a)).collect()),
        );
        obj.insert(
            "bonuses".into(),
            Value::Object(self.bonuses.iter().map(|(k, v)| (k.clone(), json!(v))).collect()),
        );
        obj.insert("targeter".into(), json!(self.targeter.name()));
        obj.insert("targeter_kwargs".into(), Value::Object(self.targeter.kwargs()));
        Value::Object(obj)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("unit type serializes")
    }
}

/// Parses a unit-type JSON document, applying defaults for optional fields.
///
/// Required: `hp`, `damage`, `cooldown`, `speed`, `size`.
pub fn parse_unit_type(text: &str) -> Result<UnitType> {
    let obj = fields::parse_object(text)?;
    unit_type_from_object(&obj)
}

pub(crate) fn unit_type_from_object(obj: &Object) -> Result<UnitType> {
    use fields::{f64_or, non_negative, optional, positive, required_f64};

    let hp = non_negative("hp", required_f64(obj, "hp")?)?;
    let damage = non_negative("damage", required_f64(obj, "damage")?)?;
    let cooldown = non_negative("cooldown", required_f64(obj, "cooldown")?)?;
    let speed = non_negative("speed", required_f64(obj, "speed")?)?;
    let size = positive("size", required_f64(obj, "size")?)?;

    let hp_regen = non_negative("hp_regen", f64_or(obj, "hp_regen", 0.0)?)?;
    let shield = non_negative("shield", f64_or(obj, "shield", 0.0)?)?;
    let energy = non_negative("energy", f64_or(obj, "energy", 0.0)?)?;
    let initial_energy = non_negative("initial_energy", f64_or(obj, "initial_energy", 0.0)?)?;
    let armor = non_negative("armor", f64_or(obj, "armor", 0.0)?)?;
    let minimum_scan_range =
        non_negative("minimum_scan_range", f64_or(obj, "minimum_scan_range", 0.0)?)?;

    let attack_range = match optional(obj, "attack_range") {
        None => AttackRange::Melee,
        Some(Value::String(s)) if s == "MELEE" => AttackRange::Melee,
        Some(Value::String(s)) => {
            return Err(ScenarioError::InvalidEnum {
                kind: "attack range",
                value: s.clone(),
            })
        }
        Some(v) => AttackRange::Distance(non_negative(
            "attack_range",
            fields::as_f64("attack_range", v)?,
        )?),
    };

    let attacks = match optional(obj, "attacks") {
        None => 1,
        Some(v) => {
            let n = fields::as_u64("attacks", v)?;
            if n == 0 || n > u32::MAX as u64 {
                return Err(fields::invalid_value("attacks", "must be >= 1"));
            }
            n as u32
        }
    };

    let plane = match optional(obj, "plane") {
        None => Plane::Ground,
        Some(v) => Plane::parse("plane", fields::as_str("plane", v)?)?,
    };

    let valid_targets = match optional(obj, "valid_targets") {
        None => PlaneSet::new([Plane::Ground]),
        Some(v) => {
            let mut set = PlaneSet::default();
            for item in fields::as_array("valid_targets", v)? {
                set.insert(Plane::parse(
                    "valid_targets",
                    fields::as_str("valid_targets", item)?,
                )?);
            }
            set
        }
    };

    let attributes = match optional(obj, "attributes") {
        None => BTreeSet::new(),
        Some(v) => fields::as_array("attributes", v)?
            .iter()
            .map(|a| fields::as_str("attributes", a).map(str::to_owned))
            .collect::<Result<_>>()?,
    };

    let bonuses = match optional(obj, "bonuses") {
        None => BTreeMap::new(),
        Some(v) => fields::as_object("bonuses", v)?
            .iter()
            .map(|(k, b)| Ok((k.clone(), fields::as_f64("bonuses", b)?)))
            .collect::<Result<_>>()?,
    };

    let combat_type = match optional(obj, "combat_type") {
        None => None,
        Some(v) => Some(match fields::as_str("combat_type", v)? {
            "DAMAGE" => CombatType::Damage,
            "HEALING" => CombatType::Healing,
            other => {
                return Err(ScenarioError::InvalidEnum {
                    kind: "combat type",
                    value: other.to_owned(),
                })
            }
        }),
    };

    let kwargs = match optional(obj, "targeter_kwargs") {
        None => Map::new(),
        Some(v) => fields::as_object("targeter_kwargs", v)?.clone(),
    };
    let kwarg = |name: &str, targeter: &str| -> Result<f64> {
        let field = format!("targeter_kwargs.{name}");
        let v = kwargs.get(name).filter(|v| !v.is_null()).ok_or_else(|| {
            ScenarioError::InvariantViolation(format!("{targeter} targeter requires {field}"))
        })?;
        let x = fields::as_f64(&field, v)?;
        if x <= 0.0 {
            return Err(ScenarioError::InvariantViolation(format!(
                "{field} must be > 0, got {x}"
            )));
        }
        Ok(x)
    };
    let targeter = match optional(obj, "targeter") {
        None if combat_type == Some(CombatType::Healing) => Targeter::Heal,
        None => Targeter::Standard,
        Some(v) => match fields::as_str("targeter", v)? {
            "STANDARD" => Targeter::Standard,
            "KAMIKAZE" => Targeter::Kamikaze {
                radius: kwarg("radius", "KAMIKAZE")?,
            },
            "LASER_BEAM" => Targeter::LaserBeam {
                width: kwarg("width", "LASER_BEAM")?,
                height: kwarg("height", "LASER_BEAM")?,
            },
            "HEAL" => Targeter::Heal,
            other => {
                return Err(ScenarioError::InvalidEnum {
                    kind: "targeter",
                    value: other.to_owned(),
                })
            }
        },
    };

    let combat_type = match (combat_type, targeter) {
        (None, Targeter::Heal) => CombatType::Healing,
        (None, _) => CombatType::Damage,
        (Some(CombatType::Healing), t) if t != Targeter::Heal => {
            return Err(ScenarioError::InvariantViolation(format!(
                "HEALING units must use the HEAL targeter, found {}",
                t.name()
            )))
        }
        (Some(CombatType::Damage), Targeter::Heal) => {
            return Err(ScenarioError::InvariantViolation(
                "the HEAL targeter requires combat_type HEALING".into(),
            ))
        }
        (Some(c), _) => c,
    };

    if initial_energy > energy {
        return Err(ScenarioError::InvariantViolation(format!(
            "initial_energy {initial_energy} exceeds energy {energy}"
        )));
    }

    Ok(UnitType {
        hp,
        hp_regen,
        shield,
        energy,
        initial_energy,
        size,
        speed,
        combat_type,
        damage,
        armor,
        attack_range,
        attacks,
        cooldown,
        minimum_scan_range,
        plane,
        valid_targets,
        attributes,
        bonuses,
        targeter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE_UNIT: &str = r#"{
        "hp": 45,
        "armor": 0,
        "damage": 6,
        "cooldown": 3,
        "speed": 3.15,
        "attack_range": 3,
        "size": 3,
        "attributes": ["LIGHT", "BIOLOGICAL"],
        "minimum_scan_range": 100,
        "valid_targets": ["GROUND", "AIR"]
    }"#;

    #[test]
    fn parses_documented_example() {
        let t = parse_unit_type(EXAMPLE_UNIT).unwrap();
        assert_eq!(t.hp, 45.0);
        assert_eq!(t.armor, 0.0);
        assert_eq!(t.damage, 6.0);
        assert_eq!(t.cooldown, 3.0);
        assert_eq!(t.speed, 3.15);
        assert_eq!(t.attack_range, AttackRange::Distance(3.0));
        assert_eq!(t.size, 3.0);
        assert_eq!(
            t.attributes,
            ["LIGHT", "BIOLOGICAL"].map(String::from).into_iter().collect()
        );
        assert_eq!(t.minimum_scan_range, 100.0);
        assert_eq!(t.valid_targets, PlaneSet::new([Plane::Ground, Plane::Air]));
        assert_eq!(t.plane, Plane::Ground);
        assert_eq!(t.targeter, Targeter::Standard);
        assert_eq!(t.combat_type, CombatType::Damage);
    }

    #[test]
    fn minimal_document_gets_defaults() {
        let t = parse_unit_type(r#"{"hp":1,"damage":0,"cooldown":1,"speed":0,"size":1}"#)
            .unwrap();
        assert_eq!(t.hp_regen, 0.0);
        assert_eq!(t.shield, 0.0);
        assert_eq!(t.energy, 0.0);
        assert_eq!(t.attacks, 1);
        assert_eq!(t.targeter, Targeter::Standard);
        assert_eq!(t.combat_type, CombatType::Damage);
        assert_eq!(t.attack_range, AttackRange::Melee);
        assert_eq!(t.attack_range.value(), MELEE_RANGE);
    }

    #[test]
    fn kamikaze_requires_radius() {
        let doc = r#"{"hp":1,"damage":0,"cooldown":1,"speed":0,"size":1,"targeter":"KAMIKAZE"}"#;
        assert!(matches!(
            parse_unit_type(doc),
            Err(ScenarioError::InvariantViolation(_))
        ));
        let doc = r#"{"hp":1,"damage":0,"cooldown":1,"speed":0,"size":1,
            "targeter":"LASER_BEAM","targeter_kwargs":{"width":2}}"#;
        assert!(matches!(
            parse_unit_type(doc),
            Err(ScenarioError::InvariantViolation(_))
        ));
    }

    #[test]
    fn error_kinds() {
        assert!(matches!(
            parse_unit_type("{not json"),
            Err(ScenarioError::MalformedDocument(_))
        ));
        assert!(matches!(
            parse_unit_type("[1,2]"),
            Err(ScenarioError::MalformedDocument(_))
        ));
        assert!(matches!(
            parse_unit_type(r#"{"hp":1,"damage":0,"cooldown":1,"speed":0}"#),
            Err(ScenarioError::MissingField(f)) if f == "size"
        ));
        assert!(matches!(
            parse_unit_type(r#"{"hp":1,"damage":0,"cooldown":1,"speed":0,"size":1,"plane":"SEA"}"#),
            Err(ScenarioError::InvalidEnum { .. })
        ));
        assert!(matches!(
            parse_unit_type(r#"{"hp":1,"damage":0,"cooldown":1,"speed":0,"size":1,"targeter":"BOOM"}"#),
            Err(ScenarioError::InvalidEnum { .. })
        ));
        assert!(matches!(
            parse_unit_type(r#"{"hp":1,"damage":0,"cooldown":1,"speed":0,"size":1,"combat_type":"MAGIC"}"#),
            Err(ScenarioError::InvalidEnum { .. })
        ));
        assert!(matches!(
            parse_unit_type(r#"{"hp":1,"damage":0,"cooldown":1,"speed":0,"size":0}"#),
            Err(ScenarioError::InvalidValue { .. })
        ));
        assert!(matches!(
            parse_unit_type(r#"{"hp":1,"damage":0,"cooldown":1,"speed":0,"size":1,"energy":10,"initial_energy":20}"#),
            Err(ScenarioError::InvariantViolation(_))
        ));
        assert!(matches!(
            parse_unit_type(r#"{"hp":1,"damage":0,"cooldown":1,"speed":0,"size":1,"combat_type":"HEALING","targeter":"STANDARD"}"#),
            Err(ScenarioError::InvariantViolation(_))
        ));
    }

    #[test]
    fn healing_implies_heal_targeter() {
        let t = parse_unit_type(
            r#"{"hp":1,"damage":0,"cooldown":0,"speed":1,"size":1,"combat_type":"HEALING"}"#,
        )
        .unwrap();
        assert_eq!(t.targeter, Targeter::Heal);
        let t = parse_unit_type(r#"{"hp":1,"damage":0,"cooldown":0,"speed":1,"size":1,"targeter":"HEAL"}"#)
            .unwrap();
        assert!(t.is_healer());
    }

    #[test]
    fn colossus_is_always_targetable() {
        let t = parse_unit_type(
            r#"{"hp":1,"damage":1,"cooldown":1,"speed":1,"size":1,"valid_targets":["AIR"]}"#,
        )
        .unwrap();
        assert!(t.can_target(Plane::Colossus));
        assert!(t.can_target(Plane::Air));
        assert!(!t.can_target(Plane::Ground));
    }

    #[test]
    fn bonus_damage_sums_matching_attributes() {
        let t = parse_unit_type(
            r#"{"hp":1,"damage":6,"cooldown":1,"speed":1,"size":1,"bonuses":{"ARMORED":20,"LIGHT":3}}"#,
        )
        .unwrap();
        let armored: BTreeSet<String> = ["ARMORED".to_owned()].into();
        assert_eq!(t.damage_against(&armored), 26.0);
        assert_eq!(t.damage_against(&BTreeSet::new()), 6.0);
    }

    #[test]
    fn melee_round_trips_as_sentinel() {
        let t = parse_unit_type(
            r#"{"hp":1,"damage":6,"cooldown":1,"speed":1,"size":1,"attack_range":"MELEE",
                "targeter":"KAMIKAZE","targeter_kwargs":{"radius":2.2}}"#,
        )
        .unwrap();
        let back = parse_unit_type(&t.to_json()).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.attack_range, AttackRange::Melee);
    }
}
