mod common;

use proptest::prelude::*;

use multitree::amalgam::{amalgamate, amalgamate_elementary, amalgamate_with, AmalgamCase, FoldStrategy};
use multitree::document::{parse_multitree, to_canonical_json};
use multitree::extension::{
    classify_extension, enumerate_extensions, good_filtration, replay, replay_all, ExtensionDescriptor,
    ExtensionError, ExtensionKind,
};
use multitree::generator::{generate, GenConfig, Generation};
use multitree::geometry::{half_apartment, marked_apartments};
use multitree::validate::{is_member, validate, ValidationConfig};
use multitree::MultiTree;

use common::{double_raise_holds, geodesic_sandwich, grow, grow_from, unit_steps_hold};

fn sequence() -> impl Strategy<Value = (usize, Vec<u32>)> {
    (2usize..=3, prop::collection::vec(any::<u32>(), 0..10))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn good_extensions_stay_in_the_class((n, choices) in sequence()) {
        let (stages, descs) = grow(n, &choices);
        for (k, s) in stages.iter().enumerate() {
            prop_assert!(validate(s, ValidationConfig::default()).accepted(), "stage {k}");
            prop_assert!(unit_steps_hold(s));
            prop_assert!(double_raise_holds(s));
            prop_assert!(s.trees().iter().all(|t| t.distances_consistent()));
        }
        for (k, d) in descs.iter().enumerate() {
            let (a, b) = (&stages[k], &stages[k + 1]);
            prop_assert_eq!(b.vertex_count(), a.vertex_count() + 1);
            let edges = |m: &MultiTree| m.trees().iter().map(|t| t.edges().len()).sum::<usize>();
            prop_assert_eq!(edges(b), edges(a) + 1);
            prop_assert!(b.contains_substructure(a));
            let found = classify_extension(a, b).unwrap();
            prop_assert!(found.contains(d));
            for f in &found {
                prop_assert!(replay(a, f).unwrap().same_structure(b));
            }
        }
    }

    #[test]
    fn filtration_rebuilds_from_every_stage((n, choices) in sequence(), from in 0usize..10) {
        let (stages, _) = grow(n, &choices);
        let last = stages.last().unwrap();
        let a = &stages[from.min(stages.len() - 1)];
        let steps = good_filtration(a, last).unwrap();
        prop_assert_eq!(steps.len(), last.vertex_count() - a.vertex_count());
        prop_assert!(replay_all(a, &steps).unwrap().same_structure(last));
    }

    #[test]
    fn geodesic_sandwich_holds((n, choices) in (2usize..=3, prop::collection::vec(any::<u32>(), 0..7))) {
        let (stages, _) = grow(n, &choices);
        prop_assert!(geodesic_sandwich(stages.last().unwrap()).is_ok());
    }

    #[test]
    fn validation_is_deterministic((n, choices) in sequence(), corrupt in any::<(u16, u8)>()) {
        let (stages, _) = grow(n, &choices);
        let mut a = stages.last().unwrap().clone();
        let tuples: Vec<Vec<usize>> = a.tuples().collect();
        let t = &tuples[corrupt.0 as usize % tuples.len()];
        a.set_codistance(t, u32::from(corrupt.1 % 5)).unwrap();
        for cfg in [ValidationConfig::default(), ValidationConfig::unguarded()] {
            let r1 = serde_json::to_string(&validate(&a, cfg)).unwrap();
            let r2 = serde_json::to_string(&validate(&a, cfg)).unwrap();
            prop_assert_eq!(&r1, &r2);
            prop_assert_eq!(validate(&a, cfg).accepted(), is_member(&a, cfg));
        }
    }

    #[test]
    fn canonical_json_round_trips((n, choices) in sequence()) {
        let (stages, _) = grow(n, &choices);
        let text = to_canonical_json(stages.last().unwrap());
        let back: MultiTree = parse_multitree(&text).unwrap();
        prop_assert_eq!(to_canonical_json(&back), text);
        let marks = marked_apartments(&back);
        prop_assert_eq!(marks, marked_apartments(stages.last().unwrap()));
    }

    #[test]
    fn stale_witness_is_refused((n, choices) in sequence()) {
        let (stages, _) = grow(n, &choices);
        let a = stages.last().unwrap();
        if let Some(t) = a.tuples().find(|t| !a.is_locally_maximal(t)) {
            let d = ExtensionDescriptor::raise(1, a.tuple_names(&t), a.fresh_name(0));
            let refused = matches!(replay(a, &d), Err(ExtensionError::WitnessNotMaximal { .. }));
            prop_assert!(refused);
        }
    }

    #[test]
    fn elementary_amalgams_commute((n, choices) in sequence(), pick in any::<(u32, u32)>()) {
        let (stages, _) = grow(n, &choices);
        let a = stages.last().unwrap();
        let all = enumerate_extensions(a);
        let db = all[pick.0 as usize % all.len()].clone();
        let dc = all[pick.1 as usize % all.len()].clone();
        let dc = dc.renamed(format!("{}c", dc.new_vertex));
        let (b, c) = (replay(a, &db).unwrap(), replay(a, &dc).unwrap());
        let am = amalgamate_elementary(a, &b, &c, &db, &dc).unwrap();
        let d = &am.structure;
        prop_assert!(validate(d, ValidationConfig::default()).accepted());
        prop_assert!(am.from_b.check(&b, d).is_ok());
        prop_assert!(am.from_c.check(&c, d).is_ok());
        for (k, t) in a.trees().iter().enumerate() {
            for v in t.names() {
                prop_assert_eq!(am.from_b.image(k, v), Some(v.as_str()));
                prop_assert_eq!(am.from_c.image(k, v), Some(v.as_str()));
            }
            let bound = b.tree(k).len() + c.tree(k).len() - t.len();
            let lost = usize::from(am.identified > 0 && k == db.tree - 1);
            prop_assert_eq!(d.tree(k).len(), bound - lost);
        }
        if matches!(am.cases[0], AmalgamCase::SameTreeFold | AmalgamCase::SameTreeRaise) {
            let i = db.tree - 1;
            prop_assert_eq!(d.tree(i).len(), a.tree(i).len() + 2);
            prop_assert_eq!(d.vertex_count(), a.vertex_count() + 2);
        }
        prop_assert_eq!(&am, &amalgamate_elementary(a, &b, &c, &db, &dc).unwrap());
    }

    #[test]
    fn elementary_amalgams_are_symmetric((n, choices) in sequence(), pick in any::<(u32, u32)>()) {
        let (stages, _) = grow(n, &choices);
        let a = stages.last().unwrap();
        let all = enumerate_extensions(a);
        let db = all[pick.0 as usize % all.len()].renamed("xb");
        let dc = all[pick.1 as usize % all.len()].renamed("xc");
        let (b, c) = (replay(a, &db).unwrap(), replay(a, &dc).unwrap());
        let one = amalgamate_elementary(a, &b, &c, &db, &dc).unwrap();
        let two = amalgamate_elementary(a, &c, &b, &dc, &db).unwrap();
        prop_assert_eq!(one.cases[0], two.cases[0]);
        if one.cases[0] == AmalgamCase::Identified {
            prop_assert!(one.structure.same_structure(&b));
            prop_assert!(two.structure.same_structure(&c));
        } else {
            let (d1, d2) = (&one.structure, &two.structure);
            prop_assert_eq!(d1.sizes(), d2.sizes());
            for t in d1.tuples() {
                let u = d2.tuple(&d1.tuple_names(&t)).unwrap();
                prop_assert_eq!(d1.at(&t), d2.at(&u));
            }
        }
    }

    #[test]
    fn general_amalgams_commute(
        (n, choices) in (2usize..=3, prop::collection::vec(any::<u32>(), 0..5)),
        left in prop::collection::vec(any::<u32>(), 0..4),
        right in prop::collection::vec(any::<u32>(), 0..4),
    ) {
        let (stages, _) = grow(n, &choices);
        let a = stages.last().unwrap();
        let b = grow_from(a, &left, "b");
        let c = grow_from(a, &right, "c");
        let direct = amalgamate(a, &b, &c).unwrap();
        let chain = amalgamate_with(a, &b, &c, FoldStrategy::Chain).unwrap();
        for am in [&direct, &chain] {
            prop_assert!(validate(&am.structure, ValidationConfig::default()).accepted());
            prop_assert!(am.from_b.check(&b, &am.structure).is_ok());
            prop_assert!(am.from_c.check(&c, &am.structure).is_ok());
        }
        prop_assert!(direct.structure.same_structure(&chain.structure));
        prop_assert_eq!(&direct, &amalgamate(a, &b, &c).unwrap());
    }

    #[test]
    fn half_apartments_partition((n, choices) in sequence()) {
        let (stages, _) = grow(n, &choices);
        let a = stages.last().unwrap();
        for base in a.zero_tuples() {
            for i in 0..a.n() {
                for &y in a.tree(i).neighbors(base[i]) {
                    let h = half_apartment(a, &a.tuple_names(&base), i + 1, a.tree(i).name(y)).unwrap();
                    prop_assert!(h.members[i].iter().any(|v| v == a.tree(i).name(y)));
                    prop_assert!(!h.members[i].iter().any(|v| v == a.tree(i).name(base[i])));
                    for j in (0..a.n()).filter(|&j| j != i) {
                        for z in 0..a.tree(j).len() {
                            let mut moved = base.to_vec();
                            moved[i] = y;
                            moved[j] = z;
                            let mut still = base.to_vec();
                            still[j] = z;
                            let diff = i64::from(a.at(&moved)) - i64::from(a.at(&still));
                            prop_assert!(diff == 1 || diff == -1);
                            let member = h.members[j].iter().any(|v| v == a.tree(j).name(z));
                            prop_assert_eq!(member, diff == 1);
                        }
                    }
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn generation_is_a_chain_of_good_extensions(seed in any::<u64>(), n in 2usize..=3) {
        let mut previous: Option<MultiTree> = None;
        for steps in 0..=30 {
            let g: Generation<u32> = generate(&GenConfig::new(n, steps, seed)).unwrap();
            prop_assert!(validate(&g.structure, ValidationConfig::default()).accepted());
            if let Some(p) = &previous {
                prop_assert!(g.structure.contains_substructure(p));
                let steps = good_filtration(p, &g.structure).unwrap();
                prop_assert!(replay_all(p, &steps).unwrap().same_structure(&g.structure));
            }
            previous = Some(g.structure);
        }
    }

    #[test]
    fn processed_witnesses_have_their_raiser(seed in any::<u64>()) {
        let g: Generation<u32> = generate(&GenConfig::new(2, 120, seed)).unwrap();
        let m = &g.structure;
        for p in &g.processed {
            let t = m.tuple(&p.tuple).unwrap();
            if m.at(&t) > 0 {
                prop_assert_eq!(m.raising_neighbors(&t, p.tree - 1).len(), 1);
            }
        }
        let realized = g.log.iter().filter(|r| r.descriptor.kind == ExtensionKind::Raise).count();
        prop_assert!(realized >= g.processed.len());
    }
}
