use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treeshift_core::fixtures;
use treeshift_core::limits::{
    approximate, invariance_check, omega_approx, omega_fw_approx, omega_w_approx, realize, realize_cict_as_omega_w,
    realize_ibt_as_omega_fw, realize_with_shadowing, stabilization_scan, LimitKind, Realization, RealizeMode,
    WordRange,
};
use treeshift_core::orbits::{SftAsymptoticShadowing, SftShadowing};
use treeshift_core::patterns::{hausdorff, Configuration};
use treeshift_core::shifts::ShiftSystem;
use treeshift_core::words::{EventuallyPeriodicWord, ReducedWord, Signature};
use treeshift_core::{Dyadic, DyadicDistance};

fn w(s: &str) -> ReducedWord {
    s.parse().unwrap()
}

/// The words a realization ranges over, enumerated without `WordRange`.
fn range_words(r: &Realization) -> Vec<ReducedWord> {
    let sig = r.point.signature();
    match r.kind {
        LimitKind::OmegaW => (r.inner + 1..=r.outer).map(|j| r.word.prefix(j)).collect(),
        LimitKind::OmegaFw => {
            let stem = r.word.prefix(r.inner);
            let mut out = vec![stem.clone()];
            let mut frontier = vec![stem];
            for _ in r.inner..r.outer {
                let mut next = Vec::new();
                for u in &frontier {
                    for l in sig.successors(u) {
                        next.push(u.with(l));
                    }
                }
                out.extend(next.iter().cloned());
                frontier = next;
            }
            out.retain(|u| u.len() > r.inner);
            out
        }
        LimitKind::Omega => unreachable!("realizations target ω_w or ω_Fw"),
    }
}

/// Recomputes the Hausdorff distance between the set and the shifts of the
/// realized point over its range, on `Σ^k`.
fn recheck(points: &[Configuration], sys: &ShiftSystem, r: &Realization, k: u32) {
    let shifts: Vec<Configuration> = range_words(r).iter().map(|u| r.point.shift(u)).collect();
    let d = hausdorff(points, &shifts, k as usize).unwrap();
    assert!(d.is_at_most(Dyadic::pow2_neg(k)), "recomputed {d}");
    assert!(sys.member_to_depth(&r.point, k as usize + 2).unwrap());
}

fn cict_fixtures() -> Vec<(Vec<Configuration>, ShiftSystem)> {
    let g2 = Signature::group(2);
    vec![
        (vec![Configuration::constant(g2, 0)], fixtures::golden_mean(g2)),
        (fixtures::parity_pair(g2), fixtures::golden_mean(g2)),
        (fixtures::mod3_triple(g2), fixtures::proper_coloring(g2, 3)),
    ]
}

fn ibt_fixtures() -> Vec<(Vec<Configuration>, ShiftSystem)> {
    let g2 = Signature::group(2);
    let m2 = Signature::monoid(2);
    vec![
        (vec![Configuration::constant(g2, 0)], fixtures::golden_mean(g2)),
        (fixtures::parity_pair(g2), fixtures::golden_mean(g2)),
        (fixtures::mod3_triple(g2), fixtures::proper_coloring(g2, 3)),
        (fixtures::parity_pair(m2), fixtures::golden_mean(m2)),
        (fixtures::mod3_triple(m2), fixtures::proper_coloring(m2, 3)),
    ]
}

#[test]
fn cict_realizations_recheck() {
    for (y, sys) in cict_fixtures() {
        let r = realize_cict_as_omega_w(&y, &sys, 3).unwrap();
        assert_eq!(r.kind, LimitKind::OmegaW);
        assert_eq!(r.approximation.members.len(), y.len());
        recheck(&y, &sys, &r, 3);
    }
}

#[test]
fn ibt_realizations_recheck() {
    for (y, sys) in ibt_fixtures() {
        let r = realize_ibt_as_omega_fw(&y, &sys, 3, None).unwrap();
        assert_eq!(r.kind, LimitKind::OmegaFw);
        recheck(&y, &sys, &r, 3);
    }
}

#[test]
fn realizations_are_stable_under_deepening() {
    for (y, sys) in cict_fixtures() {
        let mut last: Option<DyadicDistance> = None;
        for k in 2..=4 {
            let r = realize(&y, &sys, RealizeMode::Cict, k, None).unwrap();
            let bound = r.log.hausdorff;
            if let Some(prev) = last {
                assert!(bound.bound() <= prev.bound());
            }
            last = Some(bound);
        }
    }
}

#[test]
fn fixed_point_realizes_itself() {
    let g2 = Signature::group(2);
    let sys = fixtures::full_shift(g2, 2);
    let y = vec![Configuration::constant(g2, 1)];
    let r = realize_cict_as_omega_w(&y, &sys, 3).unwrap();
    assert!(!r.log.hausdorff.is_exact());
    let r = realize_ibt_as_omega_fw(&y, &sys, 3, None).unwrap();
    assert!(!r.log.hausdorff.is_exact());
}

#[test]
fn shadowed_full_shift_triple() {
    let g2 = Signature::group(2);
    let sys = fixtures::full_shift(g2, 3);
    let y = fixtures::mod3_triple(g2);
    let oracle = SftShadowing { system: &sys };
    let r = realize_with_shadowing(&y, Some(&oracle), RealizeMode::Cict, 2, None).unwrap();
    recheck(&y, &sys, &r, 2);
    assert_eq!(r.log.oracle.as_deref(), Some("sft"));
}

#[test]
fn asymptotic_oracle_realizes_circ() {
    let m2 = Signature::monoid(2);
    let sys = fixtures::golden_mean(m2);
    let y = fixtures::parity_pair(m2);
    let oracle = SftAsymptoticShadowing { system: &sys };
    let r = realize_with_shadowing(&y, Some(&oracle), RealizeMode::IbtCirc, 3, None).unwrap();
    recheck(&y, &sys, &r, 3);
}

/// `ω_w ⊆ ω_{F_w} ⊆ ω` for the member words and the word ranges.
fn check_nesting(x: &Configuration, word: &ReducedWord, inner: usize, outer: usize, depth: usize) {
    let sig = x.signature();
    let ow = omega_w_approx(x, word, inner, outer, depth).unwrap();
    let ofw = omega_fw_approx(x, word, inner, outer, depth).unwrap();
    let o = omega_approx(x, inner, outer, depth).unwrap();
    let fw_range = WordRange::new(LimitKind::OmegaFw, Some(word), inner, outer).unwrap();
    let all = WordRange::new(LimitKind::Omega, None, inner, outer).unwrap();
    for u in WordRange::new(LimitKind::OmegaW, Some(word), inner, outer)
        .unwrap()
        .words(sig)
        .unwrap()
    {
        assert!(fw_range.contains(&u));
    }
    for u in fw_range.words(sig).unwrap() {
        assert!(all.contains(&u));
    }
    for m in &ow.members {
        assert!(ofw.members.iter().any(|n| n.block == m.block));
    }
    for m in &ofw.members {
        assert!(o.members.iter().any(|n| n.block == m.block));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn limit_sets_nest(seed in any::<u64>(), group in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sig = if group { Signature::group(2) } else { Signature::monoid(2) };
        let states = rng.gen_range(1..=4);
        let x = fixtures::random_automaton_point(&mut rng, sig, states, 2);
        let mut word = ReducedWord::empty();
        for _ in 0..8 {
            let next = sig.successors(&word);
            word.push(next[rng.gen_range(0..next.len())]);
        }
        let outer = rng.gen_range(2..=4);
        let inner = rng.gen_range(0..outer);
        check_nesting(&x, &word, inner, outer, 3);
    }
}

#[test]
fn constants_have_one_member() {
    let g2 = Signature::group(2);
    let x = Configuration::constant(g2, 0);
    let word = w("abab");
    for kind in [LimitKind::Omega, LimitKind::OmegaW, LimitKind::OmegaFw] {
        let a = approximate(kind, &x, Some(&word), 1, 3, 3).unwrap();
        assert_eq!(a.members.len(), 1);
    }
    let scan = stabilization_scan(LimitKind::Omega, &x, None, 3, 4).unwrap();
    assert_eq!(scan.stabilized_at, Some(1));
    let approx = omega_approx(&x, 1, 3, 4).unwrap();
    assert!(invariance_check(&approx, 3).unwrap().passes);
}

#[test]
fn parity_point_along_a_cycle() {
    let m2 = Signature::monoid(2);
    let x = fixtures::parity_pair(m2).remove(0);
    let a = EventuallyPeriodicWord::new(ReducedWord::empty(), w("a")).unwrap();
    let word = a.prefix(12);
    let ow = omega_w_approx(&x, &word, 2, 4, 3).unwrap();
    assert_eq!(ow.members.len(), 2);
    let scan = stabilization_scan(LimitKind::OmegaW, &x, Some(&word), 3, 12).unwrap();
    assert!(scan.stabilized_at.is_some_and(|n| n <= 2));
    let short = stabilization_scan(LimitKind::OmegaW, &x, Some(&word), 3, 1).unwrap();
    assert_eq!(short.stabilized_at, None);
    let approx = omega_w_approx(&x, &word, 2, 6, 4).unwrap();
    assert!(invariance_check(&approx, 3).unwrap().passes);
}

#[test]
fn example_point_is_fw_invariant() {
    let x = fixtures::x0();
    let word = w("bbbbbbbb");
    let approx = omega_fw_approx(&x, &word, 4, 7, 4).unwrap();
    let report = invariance_check(&approx, 3).unwrap();
    assert!(report.passes, "{:?}", report.failures);
}

#[test]
fn truncated_range_names_the_missing_member() {
    let g2 = Signature::group(2);
    let x = fixtures::mod3_triple(g2).remove(0);
    // A single word: its shifts land on the other two points.
    let approx = omega_approx(&x, 0, 1, 4).unwrap();
    assert_eq!(approx.members.len(), 2);
    let report = invariance_check(&approx, 3).unwrap();
    assert!(!report.passes);
    assert!(report.failures.iter().all(|f| f.letter.is_some()));
}
