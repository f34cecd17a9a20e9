use proptest::prelude::*;

use symreach::automaton::ModeStyle;
use symreach::dynamics::{Dynamics, DynamicsId};
use symreach::geom::AffineMap;
use symreach::symmetry::{
    check_equivariance, compose_maps, make_custom_map, make_identity_map, make_rotation_map, make_tr_map,
    make_tr_map_axis, make_translation_map, SymmetryPair,
};
use symreach::Error;

fn robot() -> Dynamics {
    Dynamics::new(DynamicsId::Robot)
}

#[test]
fn translation_sends_waypoint_to_origin() {
    let phi = make_translation_map(robot(), ModeStyle::Waypoint).unwrap();
    let p = [2.5, 1.5];
    assert_eq!(phi.rv(&p).unwrap(), vec![0.0, 0.0]);
    let pair = phi.pair(&p).unwrap();
    assert_eq!(pair.gamma.apply(&[2.5, 1.5, 0.7]), vec![0.0, 0.0, 0.7]);
}

#[test]
fn translation_of_roads_keeps_relative_source() {
    let phi = make_translation_map(robot(), ModeStyle::Road).unwrap();
    assert_eq!(phi.rv(&[0.0, 0.0, 5.0, 0.0]).unwrap(), vec![-5.0, 0.0, 0.0, 0.0]);
}

#[test]
fn tr_puts_road_on_negative_x_axis() {
    let phi = make_tr_map(robot()).unwrap();
    let v = phi.rv(&[-4.5, -0.5, -2.5, -1.5]).unwrap();
    assert!((v[0] + 5f64.sqrt()).abs() < 1e-12);
    assert!(v[1].abs() < 1e-12 && v[2].abs() < 1e-12 && v[3].abs() < 1e-12);
    // heading along the road becomes 0
    let pair = phi.pair(&[0.0, 0.0, 0.0, 3.0]).unwrap();
    let x = pair.gamma.apply(&[0.0, 1.0, std::f64::consts::FRAC_PI_2]);
    assert!(x[2].abs() < 1e-12);
}

#[test]
fn tr_on_y_axis() {
    let phi = make_tr_map_axis(robot(), 1).unwrap();
    let v = phi.rv(&[0.0, 0.0, 5.0, 0.0]).unwrap();
    assert!(v[0].abs() < 1e-12 && (v[1] + 5.0).abs() < 1e-12);
}

#[test]
fn identity_map_is_identity() {
    let phi = make_identity_map(robot(), 2);
    assert_eq!(phi.rv(&[3.0, 4.0]).unwrap(), vec![3.0, 4.0]);
}

#[test]
fn custom_table_rejects_unknown_mode() {
    let pair = SymmetryPair::new(AffineMap::translation(&[-1.0, 0.0, 0.0]), AffineMap::translation(&[-1.0, 0.0])).unwrap();
    let phi = make_custom_map(robot(), vec![(vec![1.0, 0.0], pair)]).unwrap();
    assert_eq!(phi.rv(&[1.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    assert!(matches!(phi.rv(&[2.0, 0.0]), Err(Error::UnknownMode(_))));
}

#[test]
fn custom_table_with_broken_pair_fails_the_gate() {
    let pair = SymmetryPair::new(AffineMap::translation(&[-1.0, 0.0, 0.0]), AffineMap::translation(&[0.0, 0.0])).unwrap();
    let r = make_custom_map(robot(), vec![(vec![1.0, 0.0], pair)]);
    assert!(matches!(r, Err(Error::EquivarianceFailed { .. })));
}

#[test]
fn composing_rotation_after_translation_matches_tr() {
    let d = Dynamics::new(DynamicsId::Linear3D);
    let t = make_translation_map(d, ModeStyle::Road).unwrap();
    let r = make_rotation_map(d, 0).unwrap();
    let tr = compose_maps(&t, &r).unwrap();
    let p = [1.0, 2.0, 4.0, 6.0];
    let a = tr.rv(&p).unwrap();
    let b = make_tr_map(d).unwrap().rv(&p).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-9);
    }
}

#[test]
fn broken_rho_is_detected() {
    let phi = make_tr_map(robot()).unwrap();
    let p = [0.0, 0.0, 3.0, 4.0];
    let pair = phi.pair(&p).unwrap();
    let ok = check_equivariance(&robot(), &pair, &p, 500, 1, 1e-9);
    assert!(ok.pass, "{}", ok.max_residual);
    let bad = SymmetryPair::new(pair.gamma.clone(), AffineMap::translation(&[0.0, 0.0, 1.0, 0.0]).compose(&pair.rho).unwrap()).unwrap();
    let r = check_equivariance(&robot(), &bad, &p, 500, 1, 1e-9);
    assert!(!r.pass && r.max_residual > 1e-2);
}

#[test]
fn pair_then_inverts() {
    let phi = make_tr_map(robot()).unwrap();
    let pair = phi.pair(&[1.0, 1.0, 4.0, 5.0]).unwrap();
    let back = SymmetryPair::new(pair.gamma_inv.clone(), pair.rho.inverse().unwrap()).unwrap();
    let id = pair.then(&back).unwrap();
    assert!(id.gamma.is_identity(1e-12));
}

proptest! {
    #[test]
    fn tr_is_equivariant_for_any_road(sx in -30.0f64..30.0, sy in -30.0f64..30.0, dx in -30.0f64..30.0, dy in -30.0f64..30.0) {
        prop_assume!((sx - dx).hypot(sy - dy) > 1e-3);
        let p = [sx, sy, dx, dy];
        for d in [robot(), Dynamics::new(DynamicsId::Linear3D)] {
            let pair = make_tr_map(d).unwrap().pair(&p).unwrap();
            let r = check_equivariance(&d, &pair, &p, 50, 2, 1e-9);
            prop_assert!(r.pass, "{:?} residual {}", d.id, r.max_residual);
        }
    }
}
