use super::*;
use crate::env::{ActionSet, EnvConfig, MetaAction};
use crate::sim::{RoadConfig, Scene, TrafficConfig, VehicleState};

fn quiet() -> TrafficConfig<f64> {
    TrafficConfig {
        lane_changes: false,
        respawn: false,
        ..TrafficConfig::default()
    }
}

fn state(id: u32, x: f64, lane: usize, v: f64) -> VehicleState<f64> {
    Scene::make_state(&quiet(), &RoadConfig::default(), id, x, lane, v, id == 0)
}

fn scene(states: Vec<VehicleState<f64>>) -> Scene<f64> {
    Scene::from_states(RoadConfig::default(), quiet(), states, 3).unwrap()
}

fn cfg() -> SafetyConfig<f64> {
    SafetyConfig::default()
}

#[test]
fn predict_position_examples() {
    assert_eq!(predict_position(0.0, 10.0, 0.0, 2.0), 20.0);
    assert_eq!(predict_position(5.0, 10.0, 2.0, 2.0), 29.0);
    assert_eq!(predict_position(7.0, 10.0, -3.0, 0.0), 7.0);
    // stops after 2 s having covered 10 m
    assert_eq!(predict_position(0.0, 10.0, -5.0, 3.0), 10.0);
}

#[test]
fn safe_distance_examples() {
    let c = cfg();
    assert_eq!(safe_distance(25.0, 25.0, 6.0, 4.0, &c), c.margin);
    let no_margin = SafetyConfig { margin: 0.0, ..c };
    assert_eq!(safe_distance(20.0, 30.0, 6.0, 4.0, &no_margin), 25.0);
    let guarded = safe_distance(20.0, 30.0, 4.0, 4.0, &no_margin);
    assert!(guarded.is_finite());
    assert!((guarded - 100.0 / 0.2).abs() < 1e-9);
}

#[test]
fn free_space_examples() {
    let open = free_space::<f64>(1, 0.0, None, None, 100.0);
    assert_eq!((open.lower, open.upper, open.empty), (-100.0, 100.0, false));
    let fs = free_space(
        1,
        50.0,
        Some(Bound { position: 110.0, safe_distance: 30.0 }),
        Some(Bound { position: 10.0, safe_distance: 20.0 }),
        100.0,
    );
    assert_eq!((fs.lower, fs.upper), (30.0, 80.0));
    assert!(fs.contains(50.0) && !fs.contains(30.0));
    let collapsed = free_space(
        1,
        50.0,
        Some(Bound { position: 60.0, safe_distance: 20.0 }),
        Some(Bound { position: 30.0, safe_distance: 20.0 }),
        100.0,
    );
    assert!(collapsed.empty);
    assert!(!collapsed.contains(45.0));
}

#[test]
fn merge_reach_examples() {
    let c = cfg();
    let reach = lateral_reach(25.0, &c);
    assert!((reach - 25.0 * 0.26f64.sin()).abs() < 1e-12);
    assert!(reach > 6.4 && reach < 6.5);

    let s = scene(vec![state(0, 0.0, 1, 25.0), state(1, 10.0, 2, 25.0)]);
    let merges = worst_case_merge_set(&s, &[1], 100.0, &c);
    assert_eq!(merges.len(), 1);
    assert!((merges[0].side_gap - 1.0).abs() < 1e-12);
    assert!((merges[0].entry_time - 1.0 / reach).abs() < 1e-12);

    let straight = SafetyConfig { psi_max_other: 0.0, ..c };
    assert!(worst_case_merge_set(&s, &[1], 100.0, &straight).is_empty());

    // two lanes away: side gap 5 m, reach 12 * sin(0.26) < 4
    let far = scene(vec![state(0, 0.0, 0, 25.0), state(1, 10.0, 2, 12.0)]);
    assert!(worst_case_merge_set(&far, &[0], 100.0, &c).is_empty());
}

#[test]
fn open_road_all_admissible_safe() {
    let s = scene(vec![state(0, 0.0, 1, 25.0)]);
    for mode in [SafetyMode::Basic, SafetyMode::Robust] {
        let m = mask_actions(&s, &EnvConfig::default(), &cfg().with_mode(mode)).unwrap();
        assert_eq!(m.safe, ActionSet::full());
        assert!(m.fallback.is_none());
        assert!(m.free_spaces.iter().all(|f| f.length() == 200.0));
    }
}

#[test]
fn slow_leader_allows_only_slowing() {
    // leader 30 m ahead (center to center), 5 m/s slower
    let s = scene(vec![state(0, 0.0, 1, 25.0), state(1, 30.0, 1, 20.0), state(2, 0.0, 0, 25.0), state(3, 0.0, 2, 25.0)]);
    let m = mask_actions(&s, &EnvConfig::default(), &cfg()).unwrap();
    assert!(m.is_safe(MetaAction::Slower));
    assert!(!m.is_safe(MetaAction::Idle));
    assert!(!m.is_safe(MetaAction::Faster));
    assert!(!m.is_safe(MetaAction::LaneLeft));
    assert!(!m.is_safe(MetaAction::LaneRight));
    assert!(m.fallback.is_none());
}

#[test]
fn robust_rejects_mergeable_neighbor() {
    let s = scene(vec![state(0, 0.0, 1, 25.0), state(1, 10.0, 3, 25.0)]);
    let env = EnvConfig::default();
    let basic = mask_actions(&s, &env, &cfg()).unwrap();
    let robust = mask_actions(&s, &env, &cfg().with_mode(SafetyMode::Robust)).unwrap();
    assert!(basic.is_safe(MetaAction::LaneLeft));
    assert!(!robust.is_safe(MetaAction::LaneLeft));
    assert!(robust.safe.is_subset(&basic.safe));
    assert!(robust.virtual_neighbors.iter().any(|v| v.source_id == 1 && v.lane == 2));
}

#[test]
fn mask_never_empty_when_boxed_in() {
    let s = scene(vec![
        state(0, 0.0, 1, 25.0),
        state(1, 8.0, 1, 20.0),
        state(2, -8.0, 1, 30.0),
        state(3, 0.0, 0, 25.0),
        state(4, 0.0, 2, 25.0),
    ]);
    for mode in [SafetyMode::Basic, SafetyMode::Robust] {
        let m = mask_actions(&s, &EnvConfig::default(), &cfg().with_mode(mode)).unwrap();
        assert!(m.raw_safe.is_empty());
        assert_eq!(m.safe.len(), 1);
        assert!(m.fallback.is_some());
    }
}

#[test]
fn colliding_scene_rejected() {
    let s = scene(vec![state(0, 0.0, 1, 25.0), state(1, 2.0, 1, 25.0)]);
    assert!(matches!(
        mask_actions(&s, &EnvConfig::default(), &cfg()),
        Err(crate::Error::SceneColliding)
    ));
}

#[test]
fn envelope_takes_tighter_extreme() {
    let ego = state(0, 0.0, 1, 20.0);
    let n = LaneNeighbor {
        id: 1,
        lane: 1,
        x: 80.0,
        v: 30.0,
        a_max: 6.0,
        length: 5.0,
        leader: true,
        active_from: 0.0,
        is_virtual: false,
    };
    let c = cfg();
    let b = envelope_bound(&n, 1.0, &ego, &c);
    let brake = 80.0 + 27.0 - 5.0 - safe_distance(24.0, 20.0, 6.0, 4.0, &c);
    let accel = 80.0 + 33.0 - 5.0 - safe_distance(36.0, 20.0, 6.0, 4.0, &c);
    assert!(accel < brake);
    assert!((b - accel).abs() < 1e-12);
}

#[test]
fn config_validation() {
    assert!(cfg().validate().is_ok());
    assert!(SafetyConfig { horizon: 0.0, ..cfg() }.validate().is_err());
    assert!(SafetyConfig { eps_den: 0.0, ..cfg() }.validate().is_err());
    assert!(SafetyConfig { margin: -1.0, ..cfg() }.validate().is_err());
}
