use super::*;

fn road() -> RoadConfig<f64> {
    RoadConfig::default()
}

fn quiet_traffic() -> TrafficConfig<f64> {
    TrafficConfig {
        lane_changes: false,
        respawn: false,
        ..TrafficConfig::default()
    }
}

fn car(id: u32, x: f64, lane: usize, v: f64) -> VehicleState<f64> {
    Scene::make_state(&TrafficConfig::default(), &road(), id, x, lane, v, false)
}

fn ego(x: f64, lane: usize, v: f64) -> VehicleState<f64> {
    Scene::make_state(&TrafficConfig::default(), &road(), 0, x, lane, v, true)
}

#[test]
fn uniform_motion() {
    let s = VehicleState { x: 0.0, v: 10.0, ..car(1, 0.0, 1, 10.0) };
    let n = advance_vehicle(&s, Controls::zero(), 2.0, &road()).unwrap();
    assert_eq!(n.x, 20.0);
    assert_eq!(n.v, 10.0);
}

#[test]
fn constant_acceleration_hand_evaluated() {
    let s = VehicleState { x: 5.0, ..car(1, 5.0, 1, 10.0) };
    let n = advance_vehicle(&s, Controls::new(2.0, 0.0), 2.0, &road()).unwrap();
    assert!((n.x - 29.0).abs() < 1e-12);
    assert!((n.v - 14.0).abs() < 1e-12);
}

#[test]
fn braking_floors_speed_at_zero() {
    let s = car(1, 0.0, 1, 1.0);
    let n = advance_vehicle(&s, Controls::new(-5.0, 0.0), 1.0, &road()).unwrap();
    assert_eq!(n.v, 0.0);
    // stops after 0.2 s having covered 0.1 m, never reverses
    assert!((n.x - 0.1).abs() < 1e-12);
}

#[test]
fn advance_rejects_bad_input() {
    let s = car(1, 0.0, 1, 10.0);
    assert!(advance_vehicle(&s, Controls::new(f64::NAN, 0.0), 0.1, &road()).is_err());
    assert!(advance_vehicle(&s, Controls::zero(), 0.0, &road()).is_err());
    assert!(advance_vehicle(&s, Controls::new(7.0, 0.0), 0.1, &road()).is_err());
    let bad = VehicleState { x: f64::INFINITY, ..s };
    assert!(advance_vehicle(&bad, Controls::zero(), 0.1, &road()).is_err());
}

#[test]
fn heading_is_clamped_and_lane_rederived() {
    let s = car(1, 0.0, 1, 20.0);
    let n = advance_vehicle(&s, Controls::new(0.0, 10.0), 0.1, &road()).unwrap();
    assert_eq!(n.psi, road().psi_max);
    let mut m = n;
    for _ in 0..10 {
        m = advance_vehicle(&m, Controls::zero(), 0.1, &road()).unwrap();
    }
    assert_eq!(m.lane, 2);
}

#[test]
fn idm_free_flow_cases() {
    let p = IdmParams { v0: 30.0, ..IdmParams::default() };
    let at_v0 = car(1, 0.0, 0, 30.0);
    assert_eq!(idm_acceleration(&at_v0, None, &p), 0.0);
    let standing = car(1, 0.0, 0, 0.0);
    assert_eq!(idm_acceleration(&standing, None, &p), p.a);
}

fn idm_reference(v: f64, dv: f64, gap: f64, p: &IdmParams<f64>) -> f64 {
    let s_star = p.s0 + (v * p.time_headway + v * dv / (2.0 * (p.a * p.b_comf).sqrt())).max(0.0);
    p.a * (1.0 - (v / p.v0).powf(p.delta) - (s_star / gap).powi(2))
}

#[test]
fn idm_equilibrium_gap_matches_bisection() {
    let p = IdmParams {
        v0: 30.0,
        time_headway: 1.5,
        s0: 2.0,
        a: 3.0,
        b_comf: 5.0,
        delta: 4.0,
    };
    // bisection on the reference formula: a(gap) increases with gap
    let (mut lo, mut hi) = (1.0, 1000.0);
    let mut gap = 0.5 * (lo + hi);
    for _ in 0..200 {
        gap = 0.5 * (lo + hi);
        let a = idm_reference(20.0, 0.0, gap, &p);
        if a.abs() < 1e-12 {
            break;
        }
        if a < 0.0 {
            lo = gap;
        } else {
            hi = gap;
        }
    }
    assert!(idm_reference(20.0, 0.0, gap, &p).abs() < 1e-9);
    let closed = p.equilibrium_gap(20.0).unwrap();
    assert!((closed - gap).abs() < 1e-6, "closed {closed} bisection {gap}");

    let follower = car(1, 0.0, 0, 20.0);
    let leader = car(2, gap + 5.0, 0, 20.0);
    let a = idm_acceleration(&follower, Some(&leader), &p);
    assert!(a.abs() < 1e-9, "a = {a}");
}

#[test]
fn idm_contact_is_full_braking() {
    let p = IdmParams::default();
    let follower = car(1, 0.0, 0, 20.0);
    let leader = car(2, 4.0, 0, 20.0);
    assert_eq!(idm_acceleration(&follower, Some(&leader), &p), -follower.a_max);
}

#[test]
fn nearest_neighbors_empty_and_ordered() {
    let alone = Scene::from_states(road(), quiet_traffic(), vec![ego(0.0, 1, 25.0)], 1).unwrap();
    assert!(alone.nearest_neighbors(4, 100.0).is_empty());

    let scene = Scene::from_states(
        road(),
        quiet_traffic(),
        vec![ego(0.0, 1, 25.0), car(1, 50.0, 1, 25.0), car(2, 10.0, 1, 25.0)],
        1,
    )
    .unwrap();
    let n = scene.nearest_neighbors(4, 100.0);
    assert_eq!(n.len(), 2);
    assert_eq!(n[0].0.id, 2);
    assert!((n[0].1 - 10.0).abs() < 1e-12);
    assert_eq!(n[1].0.id, 1);
}

#[test]
fn nearest_neighbors_matches_brute_force() {
    let positions = [(35.0, 0), (-12.0, 2), (60.0, 3), (5.0, 1), (-48.0, 1), (20.0, 2)];
    let mut states = vec![ego(0.0, 1, 25.0)];
    for (k, &(x, lane)) in positions.iter().enumerate() {
        states.push(car(k as u32 + 1, x, lane, 25.0));
    }
    let scene = Scene::from_states(road(), quiet_traffic(), states.clone(), 1).unwrap();
    let got: Vec<u32> = scene.nearest_neighbors(4, 100.0).iter().map(|(s, _)| s.id).collect();

    let e = states[0];
    let mut brute: Vec<(f64, u32)> = states[1..]
        .iter()
        .map(|s| (((s.x - e.x).powi(2) + (s.y - e.y).powi(2)).sqrt(), s.id))
        .collect();
    brute.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let want: Vec<u32> = brute.iter().take(4).map(|p| p.1).collect();
    assert_eq!(got, want);
}

#[test]
fn collision_examples() {
    let a = car(1, 0.0, 1, 20.0);
    assert!(!detect_collision(&[a, car(2, 100.0, 1, 20.0)]).collided);
    assert!(detect_collision(&[a, VehicleState { id: 2, ..a }]).collided);
    let report = detect_collision(&[a, car(2, 4.9, 1, 20.0)]);
    assert!(report.collided);
    assert_eq!(report.pairs, vec![(1, 2)]);
    assert!(!detect_collision(&[a, car(2, 5.1, 1, 20.0)]).collided);
    // adjacent lanes side by side do not touch
    assert!(!detect_collision(&[a, car(2, 0.0, 2, 20.0)]).collided);
}

#[test]
fn equilibrium_traffic_keeps_speed() {
    let tr = quiet_traffic();
    let p_lead = tr.idm(24.0);
    let p_follow = tr.idm(29.0);
    let gap = p_follow.equilibrium_gap(24.0).unwrap();
    let leader = car(1, 100.0, 0, 24.0);
    let follower = car(2, 100.0 - gap - 5.0, 0, 24.0);
    let e = ego(0.0, 3, 24.0);
    let mk = |state, idm| Vehicle {
        state,
        driver: Driver { idm, lane_change: None, next_decision: 0.0 },
    };
    let mut scene = Scene::from_vehicles(
        road(),
        tr,
        vec![mk(e, tr.idm(24.0)), mk(leader, p_lead), mk(follower, p_follow)],
        3,
    )
    .unwrap();
    for _ in 0..20 {
        let report = scene.step(Some(Controls::zero()), 0.1).unwrap();
        assert!(!report.collided);
    }
    for v in scene.vehicles() {
        assert!((v.state.v - 24.0).abs() < 1e-9, "vehicle {} speed {}", v.state.id, v.state.v);
    }
}

#[test]
fn zero_dt_rejected() {
    let mut scene = Scene::generate(road(), TrafficConfig::default(), 1).unwrap();
    assert!(scene.step(None, 0.0).is_err());
}

#[test]
fn generated_scene_is_valid() {
    for seed in 0..20 {
        let scene = Scene::generate(road(), TrafficConfig::default(), seed).unwrap();
        assert!(!scene.collision().collided);
        assert_eq!(scene.vehicles().iter().filter(|v| v.state.is_ego).count(), 1);
        assert!(scene.ego().is_ego);
        assert!(scene.vehicles().len() > 10);
    }
}

#[test]
fn traffic_only_hundred_steps_collision_free() {
    for seed in 0..5 {
        let mut scene = Scene::generate(road(), TrafficConfig::default(), seed).unwrap();
        for _ in 0..100 {
            assert!(!scene.step(None, 0.1).unwrap().collided, "seed {seed} t {}", scene.t);
        }
    }
}

#[test]
fn stepping_is_deterministic() {
    let run = || {
        let mut scene = Scene::generate(road(), TrafficConfig::default(), 99).unwrap();
        for k in 0..200 {
            let c = Controls::new(if k % 20 < 10 { 1.0 } else { -1.0 }, 0.0);
            scene.step(Some(c), 0.1).unwrap();
        }
        scene.states()
    };
    assert_eq!(run(), run());
}

#[test]
fn snapshot_round_trip() {
    let mut scene = Scene::generate(road(), TrafficConfig::default(), 5).unwrap();
    for _ in 0..37 {
        scene.step(None, 0.1).unwrap();
    }
    let text = SceneSnapshot::of(&scene).to_text();
    let parsed = SceneSnapshot::<f64>::parse(&text).unwrap();
    assert_eq!(parsed, SceneSnapshot::of(&scene));
    let rebuilt = parsed.into_scene(road(), TrafficConfig::default()).unwrap();
    assert_eq!(rebuilt.states(), scene.states());
    assert_eq!(rebuilt.t, scene.t);
}

#[test]
fn snapshot_rejects_garbage() {
    let err = SceneSnapshot::<f64>::parse("id,x,y,v,psi,lane,is_ego\n0,1,2,3\n").unwrap_err();
    assert!(err.to_string().contains("line 2"));
    assert!(SceneSnapshot::<f64>::parse("0,a,2,3,0,1,1\n").is_err());
}

#[test]
fn generic_over_f32() {
    let road32 = RoadConfig::<f32>::default();
    let tr32 = TrafficConfig::<f32>::default();
    let mut scene = Scene::generate(road32, tr32, 4).unwrap();
    for _ in 0..50 {
        scene.step(None, 0.1).unwrap();
    }
    assert!(scene.states().iter().all(|s| s.v >= 0.0 && s.psi.abs() <= road32.psi_max));
}
