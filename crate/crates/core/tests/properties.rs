use chaoskit::detectors::{pair_relation, PairRelationKind, Resolution};
use chaoskit::sets::{make_reference_sequence, set_class_check, ClassParams, Compact, RefTemplate, SetClass, TimeWindow, WindowSet};
use chaoskit::*;
use proptest::prelude::*;

fn ext() -> impl Strategy<Value = Point> {
    prop_oneof![
        1 => Just(Point::infinity()),
        8 => (-1e3f64..1e3).prop_map(Point::real),
    ]
}

fn word(len: usize) -> impl Strategy<Value = Point> {
    prop::collection::vec(0u8..2, len).prop_map(|s| Point::Word(Word::new(2, s).unwrap()))
}

fn mat() -> impl Strategy<Value = Mat2> {
    (-4.0f64..4.0, -4.0f64..4.0, 0.2f64..4.0).prop_map(|(b, c, a)| Mat2::new(a, b, c, (1.0 + b * c) / a).unwrap())
}

fn axioms(space: &SpaceKind, x: &Point, y: &Point, z: &Point) -> std::result::Result<(), TestCaseError> {
    let dxy = space.distance(x, y).unwrap();
    prop_assert!(dxy >= 0.0);
    prop_assert_eq!(dxy, space.distance(y, x).unwrap());
    prop_assert_eq!(space.distance(x, x).unwrap(), 0.0);
    let via = space.distance(x, z).unwrap() + space.distance(z, y).unwrap();
    prop_assert!(dxy <= via + 1e-12, "triangle: {} > {}", dxy, via);
    Ok(())
}

proptest! {
    #[test]
    fn chordal_metric_axioms(x in ext(), y in ext(), z in ext()) {
        axioms(&SpaceKind::ProjReal { integers_only: false }, &x, &y, &z)?;
        if x.as_ext_real().unwrap().finite().is_some() {
            let d = SpaceKind::ProjReal { integers_only: false }.distance(&x, &Point::infinity()).unwrap();
            prop_assert!(d > 0.0 && d <= 1.0);
        }
    }

    #[test]
    fn circle_metric_axioms(x in 0f64..1.0, y in 0f64..1.0, z in 0f64..1.0) {
        let (x, y, z) = (Point::circle(x), Point::circle(y), Point::circle(z));
        axioms(&SpaceKind::Circle, &x, &y, &z)?;
        prop_assert!(SpaceKind::Circle.distance(&x, &y).unwrap() <= 0.5);
    }

    #[test]
    fn shift_metric_is_an_ultrametric(x in word(24), y in word(24), z in word(24)) {
        let space = SpaceKind::Shift { alphabet: 2, length: 24 };
        axioms(&space, &x, &y, &z)?;
        let m = space.distance(&x, &z).unwrap().max(space.distance(&z, &y).unwrap());
        prop_assert!(space.distance(&x, &y).unwrap() <= m);
    }

    #[test]
    fn flow_semiflow_law(s in -50.0f64..50.0, t in -50.0f64..50.0, x in -100.0f64..100.0) {
        let sys = build_system(CatalogEntry::TranslationFlow).unwrap();
        let (s, t) = (GroupElement::RealTime(s), GroupElement::RealTime(t));
        let x = Point::real(x);
        let two_step = act(&sys, &s, &act(&sys, &t, &x).unwrap()).unwrap();
        let one_step = act(&sys, &s.compose(&t).unwrap(), &x).unwrap();
        prop_assert!(sys.distance(&two_step, &one_step).unwrap() < 1e-9);
        prop_assert_eq!(act(&sys, &GroupElement::identity(ElementKind::RealTime), &x).unwrap(), x);
    }

    #[test]
    fn shift_semiflow_law(w in word(40), s in 0i64..10, t in 0i64..10) {
        let sys = build_system(CatalogEntry::FullShift { alphabet: 2, length: 40 }).unwrap();
        let (s, t) = (GroupElement::IntTime(s), GroupElement::IntTime(t));
        let two_step = act(&sys, &s, &act(&sys, &t, &w).unwrap()).unwrap();
        let one_step = act(&sys, &s.compose(&t).unwrap(), &w).unwrap();
        prop_assert_eq!(two_step, one_step);
    }

    #[test]
    fn mobius_action_is_associative(g in mat(), h in mat(), x in ext()) {
        let sys = build_system(CatalogEntry::Mobius).unwrap();
        let (g, h) = (GroupElement::Mat2(g), GroupElement::Mat2(h));
        let two_step = act(&sys, &g, &act(&sys, &h, &x).unwrap()).unwrap();
        let one_step = act(&sys, &g.compose(&h).unwrap(), &x).unwrap();
        prop_assert!(sys.distance(&two_step, &one_step).unwrap() < 1e-6);
    }

    #[test]
    fn thick_iff_complement_not_syndetic(bits in prop::collection::vec(prop::bool::weighted(0.7), 41), k in 1i64..6) {
        let w = TimeWindow::new(0.0, 40.0).unwrap();
        let set = WindowSet::integers(w, (0..=40).filter(|&i| bits[i as usize]));
        let complement = WindowSet::integers(w, (0..=40).filter(|&i| !bits[i as usize]));
        let p = ClassParams::with_compact(Compact::Interval(0.0, (k - 1) as f64));
        let thick = set_class_check(&set, SetClass::Thick, &p).unwrap().verdict;
        let syndetic = set_class_check(&complement, SetClass::Syndetic, &p).unwrap().verdict;
        prop_assert_eq!(thick == Verdict::Verified, syndetic == Verdict::Refuted);
        // brute force: k consecutive members inside the window
        let run = (0..=41 - k as usize).any(|i| bits[i..i + k as usize].iter().all(|&b| b));
        prop_assert_eq!(thick == Verdict::Verified, run);
    }

    #[test]
    fn pair_relations_are_symmetric(x in -20i32..20, y in -20i32..20, kind in 0usize..3) {
        prop_assume!(x != y);
        let kind = [PairRelationKind::Proximal, PairRelationKind::Separated, PairRelationKind::LiYorke][kind];
        let sys = build_system(CatalogEntry::IntegerTranslation).unwrap();
        let res = Resolution::for_system(&sys);
        let f = make_reference_sequence(ElementKind::IntTime, RefTemplate::SymmetricInterval).unwrap();
        let (a, b) = (Point::real(x as f64), Point::real(y as f64));
        let ab = pair_relation(&sys, &a, &b, kind, &f, &res).unwrap().verdict;
        let ba = pair_relation(&sys, &b, &a, kind, &f, &res).unwrap().verdict;
        prop_assert_eq!(ab, ba);
    }
}

#[test]
fn mobius_pair_relations_are_symmetric() {
    let sys = build_system(CatalogEntry::Mobius).unwrap();
    let res = Resolution::for_system(&sys).with_horizon(20);
    let f = make_reference_sequence(ElementKind::Mat2, RefTemplate::MatrixNormBall).unwrap();
    let pts = [Point::real(0.0), Point::real(1.0), Point::real(-3.5), Point::infinity()];
    for a in &pts {
        for b in &pts {
            if a == b {
                continue;
            }
            let ab = pair_relation(&sys, a, b, PairRelationKind::LiYorke, &f, &res).unwrap();
            let ba = pair_relation(&sys, b, a, PairRelationKind::LiYorke, &f, &res).unwrap();
            assert_eq!(ab.verdict, ba.verdict, "{a} {b}");
        }
    }
}
