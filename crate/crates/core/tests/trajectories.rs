use std::sync::Arc;

use contact_triple::atlas::{transition_atiyah, AtlasKind};
use contact_triple::integrate::{integrate, IntegratorOptions, Method, Trajectory};
use contact_triple::output::{parse_samples_csv, samples_csv};
use contact_triple::scenario::builtin;
use contact_triple::section::MoebiusLagrangian;
use contact_triple::{AtiyahCoords, BundleAtlas, ChartId, ScalarSection, SectionKind};

fn moebius_run(method: Method) -> Trajectory {
    let l = ScalarSection::moebius_lagrangian(Arc::new(BundleAtlas::moebius())).unwrap();
    integrate(&l, ChartId(0), &[1.0, 1.0, 0.0], &IntegratorOptions::new(method, 6.0)).unwrap()
}

/// The same Lagrangian formula read on the universal cover ℝ, where no chart
/// switching ever happens.
fn covering_run(method: Method) -> Trajectory {
    let l = ScalarSection::new(SectionKind::Lagrangian, Arc::new(BundleAtlas::trivial(1)), Arc::new(MoebiusLagrangian));
    integrate(&l, ChartId(0), &[1.0, 1.0, 0.0], &IntegratorOptions::new(method, 6.0)).unwrap()
}

#[test]
fn moebius_switch_is_the_transition_law() {
    let traj = moebius_run(Method::Rk4 { step: 0.01 });
    assert!(!traj.events.is_empty());
    let atlas = BundleAtlas::moebius();
    for e in &traj.events {
        let before = AtiyahCoords::new(e.from, vec![e.before[0]], vec![e.before[1]], e.before[2]);
        let moved = transition_atiyah(&atlas, &before, e.to).unwrap();
        let sample = traj.samples.iter().find(|s| s.s == e.s).unwrap();
        assert_eq!(sample.chart, e.to);
        let got = [moved.x[0], moved.xdot[0], moved.t];
        for (a, b) in got.iter().zip(&sample.state) {
            assert!((a - b).abs() <= 1e-9);
        }
    }
}

#[test]
fn moebius_trajectory_crosses_pi_continuously() {
    // Up to the first non-identity gluing the charted trajectory must agree
    // with the run on the covering line, including across x = π.
    for method in [Method::Rk4 { step: 0.01 }, Method::Rk45 { abs_tol: 1e-10, rel_tol: 1e-10 }] {
        let traj = moebius_run(method);
        let cover = covering_run(method);
        let first = &traj.events[0];
        assert_eq!((first.from, first.to), (ChartId(0), ChartId(1)));
        let crossed = traj.samples.iter().any(|s| s.chart == ChartId(1) && s.state[0] > std::f64::consts::PI);
        assert!(crossed, "trajectory never crossed x = π");
        let stop = traj.events.get(1).map_or(f64::INFINITY, |e| e.s);
        let mut compared = 0;
        for (a, b) in traj.samples.iter().zip(&cover.samples).take_while(|(a, _)| a.s < stop) {
            assert_eq!(a.s, b.s);
            for (u, v) in a.state.iter().zip(&b.state) {
                assert!((u - v).abs() <= 1e-9, "s = {}: {:?} vs {:?}", a.s, a.state, b.state);
            }
            compared += 1;
        }
        assert!(compared > 10);
    }
}

#[test]
fn moebius_flip_gluing_keeps_the_lagrangian_a_section() {
    // moving down from x = 0.6 leaves chart 0 through the half-turn gluing
    let atlas = BundleAtlas::moebius();
    let lagrangian = ScalarSection::moebius_lagrangian(Arc::new(atlas.clone())).unwrap();
    let opts = IntegratorOptions::new(Method::Rk4 { step: 0.01 }, 6.0);
    let traj = integrate(&lagrangian, ChartId(0), &[0.6, -1.0, 0.0], &opts).unwrap();
    let flip = traj.events.iter().find(|e| e.from == ChartId(0) && e.before[0] < std::f64::consts::FRAC_PI_2);
    let flip = flip.expect("no switch through the flipped overlap");
    let after = traj.samples.iter().find(|s| s.s == flip.s).unwrap();
    assert!((after.state[0] - (flip.before[0] + std::f64::consts::PI)).abs() < 1e-15);
    assert_eq!(after.state[1], flip.before[1]);
    // ℓ is a section: at a switch the charted values differ by exactly φ
    for e in &traj.events {
        let x = &e.before[..1];
        let phi = atlas.transition(e.from, e.to, x).unwrap().cocycle(x).0;
        let after = traj.samples.iter().find(|s| s.s == e.s).unwrap();
        let (l_from, l_to) = (lagrangian.value(e.from, &e.before).unwrap(), lagrangian.value(e.to, &after.state).unwrap());
        assert!((l_to - phi * l_from).abs() < 1e-12, "s = {}: {l_to} vs {}", e.s, phi * l_from);
    }
}

#[test]
fn csv_reproduces_trajectory_bit_for_bit() {
    let traj = builtin("damped-free").unwrap().integrate().unwrap();
    let parsed = parse_samples_csv(&samples_csv(&traj)).unwrap();
    assert_eq!(parsed.len(), traj.samples.len());
    for (a, b) in parsed.iter().zip(&traj.samples) {
        assert_eq!(a.s.to_bits(), b.s.to_bits());
        assert_eq!(a.chart, b.chart);
        assert!(a.state.iter().zip(&b.state).all(|(u, v)| u.to_bits() == v.to_bits()));
    }
}

#[test]
fn free_motion() {
    let mut cfg = builtin("damped-free").unwrap();
    cfg.hamiltonian.as_mut().unwrap().params.insert("lambda".into(), 0.0);
    cfg.duration = 4.0;
    let traj = cfg.integrate().unwrap();
    for s in &traj.samples {
        assert_eq!(s.state[1], 1.0);
        assert!((s.state[0] - s.s).abs() <= 1e-9 * (1.0 + s.s));
    }
}

#[test]
fn every_builtin_has_an_atlas_of_the_right_kind() {
    for name in ["quadratic-riemannian", "damped-free", "damped-herglotz"] {
        let s = builtin(name).unwrap().section().unwrap();
        assert_eq!(s.atlas().kind(), AtlasKind::Trivial);
    }
    let s = builtin("moebius-hyperregular").unwrap().section().unwrap();
    assert_eq!(s.atlas().kind(), AtlasKind::Moebius);
}
