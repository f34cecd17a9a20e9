use std::path::PathBuf;

use symreach::automaton::{build_road_automaton, road_path, HybridAutomaton, Path};
use symreach::cli::{load_scenario, Scenario};
use symreach::dynamics::{Dynamics, DynamicsId};
use symreach::geom::{CellId, Grid, HyperRect, Region};
use symreach::reach::{
    cell_reachtube, check_fixed_point, compute_reachset, metrics_text, overapprox_error_volumes, transform_back,
    write_reachtube_csv, Horizon, Method, PerModeDict, ReachConfig, SegmentSource, TubeCache,
};
use symreach::abstraction::construct_virtual_model;
use symreach::symmetry::{make_translation_map, MapKind};
use symreach::Error;

fn scn(name: &str) -> Scenario {
    load_scenario(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.scn"))).unwrap()
}

#[test]
fn cell_tube_is_boxes_around_the_centre_trajectory() {
    let d = Dynamics::new(DynamicsId::Linear3D);
    let g = Grid::new(vec![0.0; 3], vec![0.2; 3]).unwrap();
    let t = cell_reachtube(&d, CellId::new(&[5, 5, 0]), &g, &[0.0, 0.0, 0.0, 0.0], 1.0, 0.1).unwrap();
    // one box per simulated state, both ends included
    assert_eq!(t.len(), 11);
    let first = &t.segments[0];
    assert!(first.rect.contains_point(&[1.1, 1.1, 0.1], 1e-12));
    // contracting towards the origin
    let last = &t.segments[10];
    assert!(last.rect.hi()[0] < first.rect.hi()[0]);
}

#[test]
fn tube_cache_extends_and_truncates() {
    let d = Dynamics::new(DynamicsId::Robot);
    let g = Grid::new(vec![0.0, 0.0, -std::f64::consts::PI], vec![0.2, 0.2, 0.2]).unwrap();
    let mut c = TubeCache::new(d, g, 0.01);
    let p = [0.0, 0.0, 3.0, 0.0];
    let cell = CellId::new(&[0, 0, 15]);
    let (a, computed) = c.fetch(&p, cell, 1.0).unwrap();
    assert!(computed);
    assert_eq!(a.n_states, 101);
    let (b, computed) = c.fetch(&p, cell, 0.5).unwrap();
    assert!(!computed);
    assert_eq!(b.n_states, 51);
    let (e, computed) = c.fetch(&p, cell, 2.0).unwrap();
    assert!(computed);
    assert_eq!(e.n_states, 201);
    // the extension continues the stored trajectory
    assert_eq!(e.tube.state(100), a.tube.state(100));
    assert_eq!(c.len(), 1);
}

#[test]
fn error_of_identical_sets_is_zero() {
    assert_eq!(overapprox_error_volumes(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
    assert_eq!(overapprox_error_volumes(&[1.0, 2.0], &[2.0, 2.0]).unwrap(), 50.0);
    assert!(matches!(overapprox_error_volumes(&[0.0], &[1.0]), Err(Error::DegenerateBaseline { .. })));
}

#[test]
fn empty_dictionary_is_not_a_fixed_point() {
    let s = scn("s_shaped");
    let b = s.build().unwrap();
    let va = construct_virtual_model(&b.automaton, &s.virtual_map(MapKind::T).unwrap()).unwrap();
    let d = PerModeDict::new(&va);
    assert!(d.is_empty());
    assert!(!check_fixed_point(&d, &va, &b.config.vgrid).unwrap());
}

#[test]
fn metrics_add_up() {
    let s = scn("rectangle_road");
    let b = s.build().unwrap();
    for (m, k) in [(Method::NS, None), (Method::SC, Some(MapKind::T)), (Method::SV, Some(MapKind::TR))] {
        let phi = k.map(|k| s.virtual_map(k).unwrap());
        let r = compute_reachset(&b.automaton, &b.path, &b.config, m, phi.as_ref()).unwrap();
        assert_eq!(r.metrics.tot, r.metrics.co + r.metrics.re + r.metrics.cp);
        assert_eq!(r.segments.len(), b.path.len());
        if m != Method::SV {
            assert_eq!(r.metrics.cp, 0);
        }
    }
}

#[test]
fn sc_with_translation_matches_ns_cells() {
    let s = scn("rectangle_road");
    let b = s.build().unwrap();
    let ns = compute_reachset(&b.automaton, &b.path, &b.config, Method::NS, None).unwrap();
    let phi = s.virtual_map(MapKind::T).unwrap();
    let sc = compute_reachset(&b.automaton, &b.path, &b.config, Method::SC, Some(&phi)).unwrap();
    assert_eq!(ns.init_counts(), sc.init_counts());
    for i in 0..ns.segments.len() {
        assert_eq!(ns.segment_cells(i, &b.config.grid).unwrap(), sc.segment_cells(i, &b.config.grid).unwrap());
    }
    assert!(sc.metrics.re > 0);
}

#[test]
fn sv_needs_a_map() {
    let s = scn("s_shaped");
    let b = s.build().unwrap();
    assert!(matches!(
        compute_reachset(&b.automaton, &b.path, &b.config, Method::SV, None),
        Err(Error::MissingMap { .. })
    ));
}

#[test]
fn s_shape_fixed_point_trace() {
    let s = scn("s_shaped");
    let b = s.build().unwrap();
    let phi = s.virtual_map(MapKind::T).unwrap();
    let r = compute_reachset(&b.automaton, &b.path, &b.config, Method::SV, Some(&phi)).unwrap();
    assert!(r.fixed_point);
    assert_eq!(r.fixed_point_trace, vec![false, false, false, false, true]);
    let dict = r.dict.as_ref().unwrap();
    let va = r.va.as_ref().unwrap();
    let back = transform_back(dict, va, &b.path).unwrap();
    assert_eq!(back.len(), 16);
    // quarter turns and translations keep boxes axis-aligned
    assert!(back.iter().all(|t| !t.reboxed));
}

#[test]
fn csv_dump_has_header_and_provenance() {
    let s = scn("s_shaped");
    let b = s.build().unwrap();
    let phi = s.virtual_map(MapKind::TR).unwrap();
    let r = compute_reachset(&b.automaton, &b.path, &b.config, Method::SV, Some(&phi)).unwrap();
    let mut buf = Vec::new();
    write_reachtube_csv(&r, &mut buf, 5.0).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "path_index,virtual_mode_index,t_lo,t_hi,lo_0,lo_1,lo_2,hi_0,hi_1,hi_2,provenance"
    );
    assert!(text.contains(",co"));
    assert!(text.contains(",cp"));
    let m = metrics_text(&r.metrics);
    assert!(m.starts_with("co = "));
    assert_eq!(m.lines().count(), 6);
}

/// A single road whose exit region re-enters its own start after the reset.
fn self_loop() -> (HybridAutomaton, Path) {
    let d = Dynamics::new(DynamicsId::Linear3D);
    let roads = vec![([0.0, 0.0], [4.0, 0.0])];
    let init = HyperRect::centered(&[0.0, 0.0, 0.0], &[0.4, 0.4, 0.4]).unwrap();
    let mut a = build_road_automaton(&roads, [1.0, 1.4], [0.6, 1.0], &init, d, 3.0).unwrap();
    a.edges.push((0, 0));
    a.guards.push(Region::from_rect(&HyperRect::centered(&[4.0, 0.0], &[1.0, 1.0]).unwrap().extend(f64::NEG_INFINITY, f64::INFINITY)));
    a.resets.push(vec![symreach::geom::AffineMap::translation(&[-4.0, 0.0, 0.0])]);
    let p = road_path(&a, &roads);
    let path = Path(vec![p.0[0]; 30]);
    (a, path)
}

#[test]
fn contracting_self_loop_copies_the_rest() {
    let (a, path) = self_loop();
    let phi = make_translation_map(a.dynamics, symreach::automaton::ModeStyle::Road).unwrap();
    let g = Grid::new(vec![0.0; 3], vec![0.2; 3]).unwrap();
    let cfg = ReachConfig { grid: g.clone(), vgrid: g, dt: 0.01, horizon: Horizon::Finite(29), budget: None };
    let r = compute_reachset(&a, &path, &cfg, Method::SV, Some(&phi)).unwrap();
    assert!(r.fixed_point);
    assert!(r.computed_segments <= 2, "{}", r.computed_segments);
    assert_eq!(r.metrics.cp, 30 - r.computed_segments);
    assert!(matches!(r.segments[29].source, SegmentSource::Copied));
}

#[test]
fn infinite_horizon_closes_the_dictionary() {
    let (a, path) = self_loop();
    let phi = make_translation_map(a.dynamics, symreach::automaton::ModeStyle::Road).unwrap();
    let g = Grid::new(vec![0.0; 3], vec![0.2; 3]).unwrap();
    let cfg = ReachConfig { grid: g.clone(), vgrid: g, dt: 0.01, horizon: Horizon::Infinite, budget: None };
    let r = compute_reachset(&a, &path.truncated(1), &cfg, Method::SV, Some(&phi)).unwrap();
    assert!(r.fixed_point);
}

#[test]
fn budget_exhaustion_is_no_fixed_point() {
    // an expanding system never closes
    let d = Dynamics::new(DynamicsId::Robot);
    let roads = vec![([0.0, 0.0], [4.0, 0.0])];
    let init = HyperRect::centered(&[0.0, 0.0, 0.0], &[0.4, 0.4, 0.4]).unwrap();
    let mut a = build_road_automaton(&roads, [1.0, 1.4], [0.6, 1.0], &init, d, 6.0).unwrap();
    a.edges.push((0, 0));
    a.guards.push(Region::universe(3));
    a.resets.push(vec![symreach::geom::AffineMap::translation(&[-1.0, 0.0, 0.0])]);
    let phi = make_translation_map(d, symreach::automaton::ModeStyle::Road).unwrap();
    let g = Grid::new(vec![0.0, 0.0, -std::f64::consts::PI], vec![0.2, 0.2, 0.2]).unwrap();
    let cfg = ReachConfig { grid: g.clone(), vgrid: g, dt: 0.05, horizon: Horizon::Infinite, budget: Some(3) };
    let r = compute_reachset(&a, &Path(vec![0]), &cfg, Method::SV, Some(&phi));
    assert!(matches!(r, Err(Error::NoFixedPoint { .. })), "{r:?}");
}
