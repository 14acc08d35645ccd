//! Qualitative facts about the constructions, checked on small instances.

use corrbi::bicat::check_covariant;
use corrbi::corr::{find_iso, right_unitor, left_unitor, tensor, verify_iso, Correspondence, CorrIso, GraphSpec};
use corrbi::pimsner::fibers::universal_arrow;
use corrbi::pimsner::{
    arrow_into_cycle, cuntz, cycle, isometry_counterexample, sample_arrows, spectral_component, GradedArrow, MonoComb, Monomial, Path,
    Representation,
};

#[test]
fn empty_source_ideal_makes_containment_automatic() {
    let g = cycle(2, &[]);
    let cc = arrow_into_cycle(&g, 2, &[vec![1, 0], vec![0, 1]]).unwrap();
    assert!(cc.source.ideal.is_empty());
    let r = check_covariant(&cc);
    assert!(r.containment_automatic);
    assert!(r.containment.ok);
    assert!(r.is_valid());
}

#[test]
fn non_unitary_inclusion_is_rejected() {
    let cc = isometry_counterexample();
    let r = verify_iso(&cc.u);
    assert!(r.isometric.ok);
    assert!(r.left_linear.ok && r.right_linear.ok);
    assert!(!r.surjective.ok);
    assert!(!check_covariant(&cc).is_valid());
}

#[test]
fn unitors_come_from_the_actions() {
    for s in sample_arrows() {
        let e = s.arrow.corr;
        let right = tensor(&e, &Correspondence::identity(e.target())).unwrap();
        let w = CorrIso { domain: right.product.clone(), codomain: e.clone(), map: right_unitor(&right) };
        assert!(verify_iso(&w).is_valid(), "{}", s.name);
        let left = tensor(&Correspondence::identity(e.source()), &e).unwrap();
        let w = CorrIso { domain: left.product.clone(), codomain: e.clone(), map: left_unitor(&left) };
        assert!(verify_iso(&w).is_valid(), "{}", s.name);
    }
}

#[test]
fn fock_representation_is_not_covariant() {
    for g in [cuntz(2, &[0]), cycle(2, &[0, 1]), cycle(3, &[1])] {
        for level in 2..=4 {
            let r = Representation::fock(&g, level).check(g.relative());
            assert!(r.laws_hold(), "level {level}");
            assert!(!r.identity_criterion && !r.subspace_criterion, "level {level}");
        }
    }
    // with nothing to be covariant on, the Fock representation qualifies
    let t = cuntz(2, &[]);
    let r = Representation::fock(&t, 3).check(t.relative());
    assert!(r.laws_hold() && r.identity_criterion && r.subspace_criterion);
}

#[test]
fn spectral_projection_separates_degrees() {
    let g = cuntz(2, &[]);
    let x = Monomial::new(Path::edge(&g, 0), Path::vertex(0)).unwrap();
    let t = MonoComb::single(x.clone());
    assert_eq!(spectral_component(&t, 1), t);
    assert!(spectral_component(&t, 0).is_zero());
    assert!(spectral_component(&t, -1).is_zero());
    assert_eq!(spectral_component(&MonoComb::single(x.adjoint()), -1), MonoComb::single(x.adjoint()));
}

#[test]
fn universal_arrow_of_a_bimodule_triple_is_the_identity() {
    for g in [cycle(2, &[0, 1]), cycle(3, &[0, 1, 2])] {
        for n in 1..=3 {
            let u = universal_arrow(&g, n).unwrap();
            assert!(u.report.is_valid());
            let pi = u.arrow.corr.phi().clone();
            assert!(pi.is_block_bijection());
            // the identity of the stage, pulled back along the stage isomorphism
            let id = Correspondence::identity(pi.target()).restrict_left(&pi).unwrap();
            assert!(find_iso(&u.arrow.corr, &id).is_some(), "level {n}");
        }
    }
}

#[test]
fn creation_operators_raise_degree_by_one() {
    for s in sample_arrows() {
        let g = GradedArrow::new(&s.arrow, 3).unwrap();
        assert!(g.grading().ok, "{}", s.name);
    }
}

#[test]
fn relative_ideal_outside_receivers_is_refused() {
    // a sink cannot be asked to satisfy covariance
    let g = GraphSpec::from_indices(2, &[(0, 1)], &[0]).unwrap();
    assert!(corrbi::pimsner::core_stage(&g, 1).is_err());
}
