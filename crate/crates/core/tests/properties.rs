use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;

use contact_triple::atlas::{transition_atiyah, transition_contact, Chart, Cocycle, Domain, OverlapPiece};
use contact_triple::expr::{eval_jet2, hamiltonian_signature, parse};
use contact_triple::legendre::{invert_legendre, legendre_from_hamiltonian, legendre_from_lagrangian};
use contact_triple::output::real;
use contact_triple::rng::SplitMix64;
use contact_triple::triple::{lift_hamiltonian, pairing};
use contact_triple::verify::{random_expression, random_polynomial};
use contact_triple::{AtiyahCoords, BundleAtlas, ChartId, ContactCoords, CoverCoords, ScalarSection, SectionKind};

fn vars() -> Vec<String> {
    vec!["a".into(), "b".into(), "c".into()]
}

fn exp_atlas() -> BundleAtlas {
    let whole = Domain::whole(1);
    let piece = |from, to, rate| OverlapPiece {
        from: ChartId(from),
        to: ChartId(to),
        region: whole.clone(),
        shift: vec![0.0],
        cocycle: Cocycle::Exponential { rate: vec![rate] },
    };
    BundleAtlas::custom(
        1,
        vec![Chart { name: "a".into(), domain: whole.clone() }, Chart { name: "b".into(), domain: whole.clone() }],
        vec![piece(0, 1, 0.7), piece(1, 0, -0.7)],
    )
}

fn moebius_x() -> impl Strategy<Value = f64> {
    (0.01..PI - 0.01).prop_filter("away from the seam", |x: &f64| (x - PI / 2.0).abs() > 1e-6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn display_reparses_to_the_same_tree(seed in any::<u64>()) {
        let src = random_expression(&mut SplitMix64::new(seed), &vars(), 4);
        let e = parse(&src, &["a", "b", "c"], &[]).unwrap();
        let again = parse(&e.to_string(), &["a", "b", "c"], &[]).unwrap();
        prop_assert_eq!(e, again);
    }

    #[test]
    fn gradient_matches_central_differences(seed in any::<u64>(), x in prop::collection::vec(-1.5..1.5f64, 3)) {
        let src = random_expression(&mut SplitMix64::new(seed), &vars(), 3);
        let e = parse(&src, &["a", "b", "c"], &[]).unwrap();
        let names = vars();
        let point = names.iter().cloned().zip(x.iter().copied()).collect();
        let j = eval_jet2(&e, &point, &Default::default()).unwrap();
        let h = 1e-6;
        for i in 0..3 {
            let mut up = x.clone();
            let mut dn = x.clone();
            up[i] += h;
            dn[i] -= h;
            let fd = (e.eval(&up, &[]).unwrap() - e.eval(&dn, &[]).unwrap()) / (2.0 * h);
            let idx = e.variables().iter().position(|v| *v == names[i]).unwrap();
            prop_assert!((j.d(idx) - fd).abs() <= 1e-5 * (1.0 + fd.abs()), "{src}: {} vs {fd}", j.d(idx));
        }
    }

    #[test]
    fn contact_transitions_invert(x in -3.0..3.0f64, p in -3.0..3.0f64, z in -3.0..3.0f64) {
        let atlas = exp_atlas();
        let u = ContactCoords::new(ChartId(0), vec![x], vec![p], z);
        let back = transition_contact(&atlas, &transition_contact(&atlas, &u, ChartId(1)).unwrap(), ChartId(0)).unwrap();
        prop_assert!((back.p[0] - p).abs() <= 1e-12 * (1.0 + p.abs()) * (1.0 + (0.7 * x).exp()));
        prop_assert!((back.z - z).abs() <= 1e-12 * (1.0 + z.abs()));
    }

    #[test]
    fn atiyah_transitions_invert(x in -3.0..3.0f64, xd in -3.0..3.0f64, t in -3.0..3.0f64) {
        let atlas = exp_atlas();
        let v = AtiyahCoords::new(ChartId(0), vec![x], vec![xd], t);
        let back = transition_atiyah(&atlas, &transition_atiyah(&atlas, &v, ChartId(1)).unwrap(), ChartId(0)).unwrap();
        prop_assert_eq!(&back.xdot, &v.xdot);
        prop_assert!((back.t - t).abs() <= 1e-12 * (1.0 + xd.abs()));
    }

    #[test]
    fn pairing_is_covariant(x in -3.0..3.0f64, xd in -3.0..3.0f64, t in -3.0..3.0f64, p in -3.0..3.0f64, z in -3.0..3.0f64) {
        // the pairing is a section of the dual line: it scales by φ
        let atlas = exp_atlas();
        let v = AtiyahCoords::new(ChartId(0), vec![x], vec![xd], t);
        let u = ContactCoords::new(ChartId(0), vec![x], vec![p], z);
        let moved = pairing(&transition_atiyah(&atlas, &v, ChartId(1)).unwrap(), &transition_contact(&atlas, &u, ChartId(1)).unwrap()).unwrap();
        let phi = (0.7 * x).exp();
        prop_assert!((moved - phi * pairing(&v, &u).unwrap()).abs() <= 1e-12 * phi * (1.0 + (xd * p).abs() + (t * z).abs()));
    }

    #[test]
    fn moebius_pairing_flips(x in moebius_x(), xd in -3.0..3.0f64, t in -3.0..3.0f64, p in -3.0..3.0f64, z in -3.0..3.0f64) {
        let atlas = BundleAtlas::moebius();
        let v = AtiyahCoords::new(ChartId(0), vec![x], vec![xd], t);
        let u = ContactCoords::new(ChartId(0), vec![x], vec![p], z);
        let moved = pairing(&transition_atiyah(&atlas, &v, ChartId(1)).unwrap(), &transition_contact(&atlas, &u, ChartId(1)).unwrap()).unwrap();
        let sign = if x < PI / 2.0 { -1.0 } else { 1.0 };
        prop_assert_eq!(moved, sign * pairing(&v, &u).unwrap());
    }

    #[test]
    fn moebius_legendre_round_trip(x in moebius_x(), xd in -3.0..3.0f64, t in -3.0..3.0f64) {
        let atlas = Arc::new(BundleAtlas::moebius());
        let l = ScalarSection::moebius_lagrangian(atlas.clone()).unwrap();
        let h = ScalarSection::moebius_hamiltonian(atlas).unwrap();
        let v = AtiyahCoords::new(ChartId(0), vec![x], vec![xd], t);
        let u = legendre_from_lagrangian(&l, &v).unwrap();
        let back = legendre_from_hamiltonian(&h, &u).unwrap();
        prop_assert!((back.xdot[0] - xd).abs() < 1e-10 && (back.t - t).abs() < 1e-10);
        let guess = AtiyahCoords::new(ChartId(0), vec![x], vec![0.0], 0.0);
        let newton = invert_legendre(&l, &u, &guess).unwrap();
        prop_assert!((newton.xdot[0] - xd).abs() < 1e-10 && (newton.t - t).abs() < 1e-10);
    }

    #[test]
    fn lift_is_homogeneous(seed in any::<u64>(), s in prop_oneof![-5.0..-0.1f64, 0.1..5.0f64], x in -2.0..2.0f64, pi in -2.0..2.0f64, z in -2.0..2.0f64, tau in 0.2..3.0f64) {
        let sig = hamiltonian_signature(1);
        let names: Vec<&str> = sig.iter().map(String::as_str).collect();
        let poly = random_polynomial(&mut SplitMix64::new(seed), &sig, 3, 6);
        let h = ScalarSection::from_expr(SectionKind::Hamiltonian, Arc::new(BundleAtlas::trivial(1)), parse(&poly, &names, &[]).unwrap(), vec![]).unwrap();
        let c = CoverCoords::new(ChartId(0), vec![x], tau, vec![pi], z).unwrap();
        let cs = CoverCoords::new(ChartId(0), vec![x], s * tau, vec![s * pi], z).unwrap();
        let (a, b) = (lift_hamiltonian(&h, &cs).unwrap(), s * lift_hamiltonian(&h, &c).unwrap());
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()), "{poly}: {a} vs {b}");
    }

    #[test]
    fn printed_reals_round_trip(bits in any::<u64>()) {
        let v = f64::from_bits(bits);
        prop_assume!(v.is_finite());
        prop_assert_eq!(real(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
    }
}
