use std::path::PathBuf;

use symreach::abstraction::{check_fsr, construct_virtual_model, guard_superset_holds, virtual_mode_of};
use symreach::cli::load_scenario;
use symreach::symmetry::MapKind;

fn scn(name: &str) -> symreach::cli::Scenario {
    load_scenario(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.scn"))).unwrap()
}

#[test]
fn rectangle_waypoints_collapse_to_one_mode() {
    let s = scn("rectangle");
    let b = s.build().unwrap();
    let phi = s.virtual_map(MapKind::T).unwrap();
    let va = construct_virtual_model(&b.automaton, &phi).unwrap();
    assert_eq!((va.n_modes(), va.n_edges()), (1, 1));
    assert_eq!(va.auto.modes[0], vec![0.0, 0.0]);
    assert_eq!(va.auto.edges[0], (0, 0));
    // one translation per concrete edge
    assert_eq!(va.auto.resets[0].len(), 4);
    assert_eq!(va.reset_provenance[0].len(), 4);
    // the virtual guard is B(0, ε₀) ∪ B(0, ε₁), and ε₀ contains ε₁
    assert!(va.auto.guards[0].contains_point(&[0.49, 0.69, 3.0], 0.0));
    assert!(!va.auto.guards[0].contains_point(&[0.51, 0.0, 0.0], 0.0));
}

#[test]
fn rectangle_roads_tr_reset_classes() {
    let s = scn("rectangle_road");
    let b = s.build().unwrap();
    let va = construct_virtual_model(&b.automaton, &s.virtual_map(MapKind::TR).unwrap()).unwrap();
    let mut sizes: Vec<usize> = va.edge_classes.iter().map(|c| c.len()).collect();
    sizes.sort();
    assert_eq!(sizes, vec![1, 2, 2]);
    assert!(guard_superset_holds(&b.automaton, &va, 200, 3).unwrap());
}

#[test]
fn every_concrete_mode_has_a_virtual_mode() {
    let s = scn("koch");
    let b = s.build().unwrap();
    let phi = s.virtual_map(MapKind::TR).unwrap();
    let va = construct_virtual_model(&b.automaton, &phi).unwrap();
    for (i, p) in b.automaton.modes.iter().enumerate() {
        assert_eq!(virtual_mode_of(&va, &phi, p).unwrap(), va.rv_index[i]);
    }
    let t: f64 = b.automaton.time_bounds.iter().cloned().fold(0.0, f64::max);
    assert!(va.auto.time_bounds.iter().all(|&v| v <= t + 1e-12));
}

#[test]
fn fsr_holds_and_shrunk_guards_break_it() {
    let s = scn("rectangle_road");
    let b = s.build().unwrap();
    let phi = s.virtual_map(MapKind::TR).unwrap();
    let va = construct_virtual_model(&b.automaton, &phi).unwrap();
    let r = check_fsr(&b.automaton, &va, &phi, 10, 6, 9, 1e-6, s.dt).unwrap();
    assert!(r.ok(), "{:?}", r.violations);
    assert!(r.transitions > 0);
    let bad = va.with_scaled_guards(0.1).unwrap();
    assert!(!check_fsr(&b.automaton, &bad, &phi, 30, 16, 9, 1e-6, s.dt).unwrap().ok());
}

#[test]
fn dump_lists_modes_and_edges() {
    let s = scn("s_shaped");
    let b = s.build().unwrap();
    let va = construct_virtual_model(&b.automaton, &s.virtual_map(MapKind::TR).unwrap()).unwrap();
    let j = va.dump_json();
    let text = j.to_string();
    assert!(text.contains("modes"), "{text}");
    assert!(text.contains("edges"));
}
