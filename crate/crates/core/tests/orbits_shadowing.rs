use treeshift_core::fixtures;
use treeshift_core::orbits::{
    asymptotic_defect, no_shadow_certificate, shadow_sft, shadow_sft_asymptotic, trace_violations,
    validate_pseudo_orbit, PseudoOrbit, TailRule,
};
use treeshift_core::patterns::{distance, Configuration};
use treeshift_core::words::{Letter, ReducedWord, Signature};
use treeshift_core::{Dyadic, DyadicDistance, Error};

#[test]
fn counterexample_is_asymptotic_but_not_uniform() {
    let (sys, orbit) = fixtures::asymptotic_counterexample(2, Letter::generator(0), 4).unwrap();
    let shells = asymptotic_defect(&orbit, 3).unwrap();
    assert_eq!(shells[0].defect, DyadicDistance::Exact(Dyadic::ONE));
    assert!(shells[1..].iter().all(|s| !s.defect.is_exact()));
    let report = validate_pseudo_orbit(&orbit, Dyadic::pow2_neg(3), 4).unwrap();
    assert!(!report.passes);
    assert_eq!(report.worst_site, ReducedWord::empty());

    let out = shadow_sft_asymptotic(&orbit, &sys, 4).unwrap();
    assert!(!out.uniform_hypothesis);
    assert!(!out.admissible);

    let sig = Signature::group(2);
    let candidates = [Configuration::constant(sig, 0), Configuration::constant(sig, 1)];
    let cert = no_shadow_certificate(&sys, &orbit, &candidates, 3, 4).unwrap();
    assert!(cert.valid);
    for p in &cert.points {
        assert_eq!(p.failures.len(), 5);
        assert!(p
            .failures
            .iter()
            .all(|f| f.error >= DyadicDistance::Exact(Dyadic::pow2_neg(1))));
    }
}

#[test]
fn shadow_of_a_golden_mean_orbit_tracks_it() {
    let sig = Signature::monoid(2);
    let sys = fixtures::golden_mean(sig);
    let [p, q]: [Configuration; 2] = fixtures::parity_pair(sig).try_into().unwrap();
    // Alternate the two points by length.
    let radius = 3;
    let points = sig
        .ball(radius + 1)
        .unwrap()
        .iter()
        .map(|u| if u.len() % 2 == 0 { p.clone() } else { q.clone() })
        .collect();
    let orbit = PseudoOrbit::on_ball(sig, radius, points, TailRule::ShiftExtend).unwrap();
    let k = 3;
    let x = shadow_sft(&orbit, &sys, k).unwrap();
    for u in sig.ball(radius + 1).unwrap().iter() {
        let d = distance(&x.shift(u), &orbit.at(u).unwrap(), k as usize + 1).unwrap();
        assert!(d.is_below(Dyadic::pow2_neg(k)), "site {}", u.human());
    }
    assert!(trace_violations(&orbit, 4).unwrap().is_empty());
    assert!(sys.member_to_depth(&x, 5).unwrap());
}

#[test]
fn coarse_resolution_is_rejected() {
    let sig = Signature::group(1);
    let sys = fixtures::two_point_system(sig);
    let orbit = PseudoOrbit::on_ball(sig, 1, vec![Configuration::constant(sig, 0); 3], TailRule::ShiftExtend).unwrap();
    assert!(matches!(
        shadow_sft(&orbit, &sys, 2),
        Err(Error::ResolutionTooCoarse { .. })
    ));
    assert!(shadow_sft(&orbit, &sys, 3).is_ok());
}

#[test]
fn defect_above_modulus_is_reported() {
    let sig = Signature::group(1);
    let sys = fixtures::two_point_system(sig);
    let zero = Configuration::constant(sig, 0);
    let one = Configuration::constant(sig, 1);
    let orbit = PseudoOrbit::on_ball(sig, 1, vec![zero.clone(), one, zero], TailRule::ShiftExtend).unwrap();
    assert!(matches!(shadow_sft(&orbit, &sys, 3), Err(Error::DefectTooLarge { .. })));
}
