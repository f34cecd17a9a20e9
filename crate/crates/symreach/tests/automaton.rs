use symreach::automaton::{
    build_road_automaton, build_waypoint_automaton, road_path, sample_execution, step_discrete, ModeStyle,
};
use symreach::cli::paths::{rectangle_roads, rectangle_waypoints, s_shaped_roads};
use symreach::dynamics::{Dynamics, DynamicsId};
use symreach::geom::HyperRect;
use symreach::Error;

fn theta() -> HyperRect {
    let pi = std::f64::consts::PI;
    HyperRect::centered(&[-4.5, -0.5, -pi / 4.0], &[0.8, 0.8, pi / 2.0]).unwrap()
}

#[test]
fn rectangle_waypoints_form_a_cycle() {
    let w = rectangle_waypoints(5.0, 3.0);
    let a = build_waypoint_automaton(&w, [1.0, 1.4], [0.6, 1.0], &theta(), Dynamics::new(DynamicsId::Robot), 10.0, 1)
        .unwrap();
    assert_eq!(a.modes.len(), 4);
    assert_eq!(a.edges, vec![(0, 1), (1, 2), (2, 3), (3, 0)]);
    // first guard is the union of the two boxes around w0
    assert_eq!(a.guards[0].polys().len(), 2);
    assert!(a.guards[0].contains_point(&[-2.5 + 0.45, -1.5, 0.0], 0.0));
    assert!(!a.guards[1].contains_point(&[-2.5 + 0.45, 1.5, 0.0], 0.0));
    assert_eq!(a.unroll(9).0, vec![0, 1, 2, 3, 0, 1, 2, 3, 0]);
    assert_eq!(a.reachable_modes(), vec![0, 1, 2, 3]);
}

#[test]
fn open_waypoint_chain_has_no_back_edge() {
    let w = rectangle_waypoints(5.0, 3.0);
    let a = build_waypoint_automaton(&w, [1.0, 1.4], [0.6, 1.0], &theta(), Dynamics::new(DynamicsId::Robot), 10.0, 0)
        .unwrap();
    assert_eq!(a.edges.len(), 3);
    assert_eq!(a.unroll(10).len(), 4);
}

#[test]
fn road_modes_are_deduplicated() {
    let roads = rectangle_roads(5.0, 3.0, [-4.5, -0.5], 2);
    let a = build_road_automaton(&roads, [1.0, 1.4], [0.6, 1.0], &theta(), Dynamics::new(DynamicsId::Robot), 10.0)
        .unwrap();
    assert_eq!(a.modes.len(), 5);
    assert_eq!(a.edges.len(), 5);
    let p = road_path(&a, &roads);
    assert_eq!(p.len(), 9);
    a.check_path(&p).unwrap();
}

#[test]
fn s_shape_is_a_line_of_modes() {
    let roads = s_shaped_roads([0.0, 0.0], 80.0, 40.0, 16);
    let init = HyperRect::centered(&[0.0, 0.0, 0.0], &[0.4, 0.4, 0.4]).unwrap();
    let a = build_road_automaton(&roads, [1.0, 1.4], [0.6, 1.0], &init, Dynamics::new(DynamicsId::Robot), 90.0).unwrap();
    assert_eq!(a.modes.len(), 16);
    assert_eq!(a.edges.len(), 15);
}

#[test]
fn disconnected_roads_are_rejected() {
    let roads = vec![([0.0, 0.0], [1.0, 0.0]), ([2.0, 0.0], [3.0, 0.0])];
    let r = build_road_automaton(&roads, [1.0, 1.4], [0.6, 1.0], &theta(), Dynamics::new(DynamicsId::Robot), 5.0);
    assert!(matches!(r, Err(Error::DisconnectedPath { .. })));
}

#[test]
fn zero_length_road_is_rejected() {
    let roads = vec![([0.0, 0.0], [0.0, 0.0])];
    let r = build_road_automaton(&roads, [1.0, 1.4], [0.6, 1.0], &theta(), Dynamics::new(DynamicsId::Robot), 5.0);
    assert!(matches!(r, Err(Error::DegenerateRoad)));
}

#[test]
fn discrete_step_checks_guard_and_source() {
    let w = rectangle_waypoints(5.0, 3.0);
    let a = build_waypoint_automaton(&w, [1.0, 1.4], [0.6, 1.0], &theta(), Dynamics::new(DynamicsId::Robot), 10.0, 1)
        .unwrap();
    let post = step_discrete(&a, &[-2.5, -1.5, 0.3], 0, 0).unwrap();
    assert!(post.contains_point(&[-2.5, -1.5, 0.3], 1e-12));
    assert!(matches!(step_discrete(&a, &[0.0, 0.0, 0.0], 0, 0), Err(Error::GuardNotSatisfied { .. })));
    assert!(matches!(step_discrete(&a, &[-2.5, -1.5, 0.0], 1, 0), Err(Error::InvalidEdge { .. })));
}

#[test]
fn sampled_executions_are_valid() {
    let w = rectangle_waypoints(5.0, 3.0);
    let a = build_waypoint_automaton(&w, [1.0, 1.4], [0.6, 1.0], &theta(), Dynamics::new(DynamicsId::Robot), 6.0, 1)
        .unwrap();
    for seed in 0..10 {
        let e = sample_execution(&a, seed, 8, 0.01).unwrap();
        e.check(&a).unwrap();
        a.check_path(&e.path()).unwrap();
    }
}

#[test]
fn mode_style_round_trips_through_serde() {
    let s = serde_json::to_string(&ModeStyle::Road).unwrap();
    let back: ModeStyle = serde_json::from_str(&s).unwrap();
    assert_eq!(back, ModeStyle::Road);
}
