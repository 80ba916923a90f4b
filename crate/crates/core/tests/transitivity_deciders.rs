use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use treeshift_core::fixtures::{self, ExampleDirection};
use treeshift_core::orbits::validate_pseudo_orbit;
use treeshift_core::patterns::{distance, Configuration};
use treeshift_core::transitivity::{
    edge_graph, find_chain, is_cict, is_ibt, is_ibt_circ, is_ibt_star, is_ict, tree_property_graph, CictRefutation,
    FinalConstraint, StepGraph, TreePlan, TreeProperty, Verdict,
};
use treeshift_core::words::{Letter, ReducedWord, Signature};
use treeshift_core::Dyadic;

fn l(c: char) -> Letter {
    Letter::from_char(c).unwrap()
}

/// Edges by direct comparison on `Σ^{k+1}`.
fn brute_edges(points: &[Configuration], k: u32) -> Vec<(usize, Letter, usize)> {
    let sig = points[0].signature();
    let ball = sig.ball(k as usize + 1).unwrap();
    let mut out = Vec::new();
    for (p, x) in points.iter().enumerate() {
        for letter in sig.letters() {
            let sx = x.shift_letter(letter);
            for (q, y) in points.iter().enumerate() {
                if ball.iter().all(|u| sx.eval(u) == y.eval(u)) {
                    out.push((p, letter, q));
                }
            }
        }
    }
    out.sort_by_key(|&(p, l, q)| (p, l.code(), q));
    out
}

fn edges_of(g: &StepGraph) -> Vec<(usize, Letter, usize)> {
    let mut e: Vec<_> = g.edges().collect();
    e.sort_by_key(|&(p, l, q)| (p, l.code(), q));
    e
}

#[test]
fn example_edges_match_brute_force() {
    for direction in [ExampleDirection::Literal, ExampleDirection::Corrected] {
        let y = fixtures::ict_not_cict(direction);
        let eg = edge_graph(&y, Dyadic::pow2_neg(3), 5).unwrap();
        assert!(eg.graph.has_edge(1, l('b'), 0));
        assert!(eg.graph.has_edge(0, l('B'), 1));
        assert_eq!(edges_of(&eg.graph), brute_edges(&y, 3));
    }
}

#[test]
fn corrected_example_is_ict_but_not_cict() {
    let y = fixtures::ict_not_cict(ExampleDirection::Corrected);
    let (eps, depth) = (Dyadic::pow2_neg(3), 5);
    let ict = is_ict(&y, eps, depth).unwrap();
    assert_eq!(ict.verdict, Verdict::Witnessed);
    assert_eq!(ict.chains.len(), y.len() * y.len());
    assert!(ict.chains.iter().all(|c| c.verify(&y, eps, depth).unwrap()));
    let cict = is_cict(&y, eps, depth).unwrap();
    assert_eq!(cict.verdict, Verdict::Refuted);
    match cict.refutation {
        Some(CictRefutation::LetterObstruction {
            point,
            in_letters,
            out_letters,
        }) => {
            assert_eq!(point, 0);
            assert_eq!(in_letters, vec![l('b')]);
            assert_eq!(out_letters, vec![l('B')]);
        }
        other => panic!("unexpected refutation {other:?}"),
    }
    let g = edge_graph(&y, eps, depth).unwrap().graph;
    for from in 1..y.len() {
        if let Some(c) = find_chain(&g, from, 0, None, None) {
            assert_eq!(c.word.last(), Some(l('b')));
        }
        if let Some(c) = find_chain(&g, 0, from, None, None) {
            assert_eq!(c.word.first(), Some(l('B')));
        }
    }
}

#[test]
fn literal_example_is_not_ict() {
    let y = fixtures::ict_not_cict(ExampleDirection::Literal);
    let r = is_ict(&y, Dyadic::pow2_neg(3), 5).unwrap();
    assert_eq!(r.verdict, Verdict::Refuted);
}

/// Sites of a plan are distinct and the covering sites are prefix-free.
fn check_plan(sig: Signature, plan: &TreePlan, property: TreeProperty) {
    let ball = sig.ball(plan.radius + 1).unwrap();
    for (p, site) in plan.targets.iter().chain(&plan.special) {
        assert_eq!(plan.labels[sig.ball_index(site)], *p);
        assert!(site.len() <= plan.radius);
    }
    assert_eq!(plan.labels.len(), ball.len());
    match property {
        TreeProperty::Ibt => {}
        TreeProperty::IbtStar => {
            let (ui, uj) = (&plan.special[0].1, &plan.special[1].1);
            assert_eq!(plan.special[0].0, plan.special[1].0);
            assert_ne!(ui.last(), uj.last());
            assert!(!ui.is_prefix_of(uj) && !uj.is_prefix_of(ui));
            for (_, t) in &plan.targets {
                assert!(!ui.is_prefix_of(t) && !uj.is_prefix_of(t));
            }
        }
        TreeProperty::IbtCirc => {
            let (y, uy) = &plan.special[0];
            assert_eq!(plan.root, *y);
            assert!(!uy.is_empty());
            for (_, t) in &plan.targets {
                assert!(!uy.is_prefix_of(t));
            }
        }
    }
}

#[test]
fn tree_witnesses_revalidate() {
    let g2 = Signature::group(2);
    let m2 = Signature::monoid(2);
    let cases = [
        (fixtures::parity_pair(g2), TreeProperty::IbtStar),
        (fixtures::mod3_triple(g2), TreeProperty::IbtStar),
        (vec![Configuration::constant(g2, 0)], TreeProperty::IbtStar),
        (fixtures::parity_pair(m2), TreeProperty::IbtCirc),
        (fixtures::mod3_triple(m2), TreeProperty::IbtCirc),
        (fixtures::parity_pair(m2), TreeProperty::Ibt),
    ];
    let eps = Dyadic::pow2_neg(2);
    for (y, property) in cases {
        let sig = y[0].signature();
        let d = match property {
            TreeProperty::Ibt => is_ibt(&y, eps, 3, 4),
            TreeProperty::IbtStar => is_ibt_star(&y, eps, 3, 4),
            TreeProperty::IbtCirc => is_ibt_circ(&y, eps, 3, 4),
        }
        .unwrap();
        assert_eq!(
            d.report.verdict,
            Verdict::Witnessed,
            "{property:?} on {} points",
            y.len()
        );
        let w = d.witness.unwrap();
        check_plan(sig, &w.plan, property);
        assert!(validate_pseudo_orbit(&w.orbit, eps, 3).unwrap().passes);
        for (p, site) in &w.plan.targets {
            assert!(!distance(&w.orbit.at(site).unwrap(), &y[*p], 3).unwrap().is_exact());
        }
    }
}

#[test]
fn constants_are_not_ibt_together() {
    let g2 = Signature::group(2);
    let y = vec![Configuration::constant(g2, 0), Configuration::constant(g2, 1)];
    let d = is_ibt(&y, Dyadic::pow2_neg(1), 2, 3).unwrap();
    assert_eq!(d.report.verdict, Verdict::Refuted);
    assert!(d.witness.is_none());
}

#[test]
fn unreturnable_root_refutes_circ() {
    // 0 is never re-entered, and 1 and 2 only reach themselves.
    let m2 = Signature::monoid(2);
    let edges = [
        (0, 'a', 1),
        (0, 'b', 2),
        (1, 'a', 1),
        (1, 'b', 1),
        (2, 'a', 2),
        (2, 'b', 2),
    ];
    let g = StepGraph::new(m2, 3, edges.map(|(p, c, q)| (p, l(c), q))).unwrap();
    let ibt = tree_property_graph(&g, TreeProperty::Ibt, 3, FinalConstraint::default()).unwrap();
    assert_ne!(ibt.verdict, Verdict::Witnessed);
    let circ = tree_property_graph(&g, TreeProperty::IbtCirc, 3, FinalConstraint::default()).unwrap();
    assert_eq!(circ.verdict, Verdict::Refuted, "{circ:?}");
    assert!(circ.refutation.is_some());
}

#[test]
fn core_deletion_cascades() {
    let m1 = Signature::monoid(1);
    // 2 has no edge, so 1 loses its only a-edge, and then 0.
    let g = StepGraph::new(m1, 4, [(0, l('a'), 1), (1, l('a'), 2), (3, l('a'), 3)]).unwrap();
    assert_eq!(g.full_core(), vec![false, false, false, true]);
}

fn random_group_points(rng: &mut ChaCha8Rng) -> Vec<Configuration> {
    use rand::Rng;
    let sig = Signature::group(2);
    let states = rng.gen_range(1..=3);
    let base = fixtures::random_automaton_point(rng, sig, states, 2);
    let mut points: Vec<Configuration> = Vec::new();
    let count = rng.gen_range(1..=4);
    for _ in 0..count {
        let len = rng.gen_range(0..=2);
        let u = ReducedWord::reduce((0..len).map(|_| sig.letters()[rng.gen_range(0..4)]));
        let p = base.shift(&u);
        if points.iter().all(|q| distance(q, &p, 4).unwrap().is_exact()) {
            points.push(p);
        }
    }
    points
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn monoid_cict_is_ict(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = fixtures::random_monoid_points(&mut rng, 2, 3);
        let ict = is_ict(&y, Dyadic::pow2_neg(2), 3).unwrap();
        let cict = is_cict(&y, Dyadic::pow2_neg(2), 3).unwrap();
        prop_assert_eq!(ict.verdict, cict.verdict);
    }

    #[test]
    fn group_deciders_are_consistent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = random_group_points(&mut rng);
        let depth = 4;
        for k in 1..=3u32 {
            let eps = Dyadic::pow2_neg(k);
            let g = edge_graph(&y, eps, depth).unwrap();
            prop_assert_eq!(edges_of(&g.graph), brute_edges(&y, k));
            let ict = is_ict(&y, eps, depth).unwrap();
            let cict = is_cict(&y, eps, depth).unwrap();
            if cict.verdict == Verdict::Witnessed {
                prop_assert_eq!(ict.verdict, Verdict::Witnessed);
                for c in &cict.chains {
                    prop_assert!(c.verify(&y, eps, depth).unwrap());
                }
                for a in &cict.assignment {
                    prop_assert_ne!(a.first, a.last.inverse());
                }
                // Tree steps over a group are symmetric, so every core vertex
                // is entered by every letter.
                let ibt = is_ibt(&y, eps, depth, 4).unwrap().report.verdict;
                let star = is_ibt_star(&y, eps, depth, 4).unwrap().report.verdict;
                if ibt == Verdict::Witnessed {
                    prop_assert_eq!(star, Verdict::Witnessed);
                }
                // Coarser resolution only adds edges.
                if k > 1 {
                    let coarse = is_cict(&y, eps.double(), depth).unwrap();
                    prop_assert_eq!(coarse.verdict, Verdict::Witnessed);
                }
            }
        }
    }
}
