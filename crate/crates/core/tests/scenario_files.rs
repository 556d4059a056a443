use std::path::PathBuf;

use skirmish::env::Env;
use skirmish::scenario::{builtin_scenario_names, Scenario};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

#[test]
fn documented_example_loads_from_disk() {
    let s = Scenario::from_file(fixture("10m_vs_11m.json")).unwrap();
    assert_eq!(s.num_allied_units, 10);
    assert_eq!(s.num_enemy_units, 11);
    let env = Env::new(s, 0).unwrap();
    let info = env.get_env_info();
    assert_eq!((info.n_agents, info.n_actions, info.state_shape), (10, 17, 243));
}

#[test]
fn load_accepts_names_and_paths() {
    let by_path = Scenario::load(fixture("10m_vs_11m.json").to_str().unwrap()).unwrap();
    assert_eq!(by_path.num_allied_units, 10);
    assert!(Scenario::load("3s5z").is_ok());
    assert!(Scenario::load("definitely_missing.json").is_err());
}

#[test]
fn shipped_scenarios_survive_a_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let names: Vec<_> = builtin_scenario_names().collect();
    assert_eq!(names.len(), 6);
    for name in names {
        let s = Scenario::builtin(name).unwrap();
        let path = dir.path().join(format!("{name}.json"));
        std::fs::write(&path, s.to_json()).unwrap();
        let back = Scenario::from_file(&path).unwrap();
        assert_eq!(back.num_allied_units, s.num_allied_units);
        assert_eq!(back.obstacles, s.obstacles);
        assert_eq!(back.unit_types, s.unit_types);
        let (mut a, mut b) = (Env::new(s, 4).unwrap(), Env::new(back, 4).unwrap());
        assert_eq!(a.reset(4).unwrap(), b.reset(4).unwrap());
    }
}
