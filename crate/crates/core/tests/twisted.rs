use proptest::prelude::*;

use superyang::check::Verdict;
use superyang::ncalg::{NcPoly, Sym};
use superyang::series::Series;
use superyang::suites::render_series;
use superyang::twisted::*;
use superyang::yangian::{counit_series, PolySeries};
use superyang::ring::Coeff;
use superyang::Rat;

fn model(m: usize, n: usize, d: i64) -> Twisted {
    Twisted::model(m, n, d, Mode::Strict).unwrap()
}

fn assert_pass(v: Verdict, what: &str) {
    assert_eq!(v, Verdict::Pass, "{what}");
}

fn failure(v: Verdict) -> String {
    match v {
        Verdict::Pass => panic!("expected a mismatch"),
        Verdict::Fail(m) => m,
    }
}

#[test]
fn relations_hold_on_the_window() {
    for (m, n) in [(1, 2), (2, 2)] {
        let tw = model(m, n, 3);
        let tag = format!("({m}|{n})");
        assert_pass(tw.check_embedding().unwrap(), &tag);
        assert_pass(tw.check_quaternary_s().unwrap(), &tag);
        assert_pass(tw.check_quaternary_cal().unwrap(), &tag);
        assert_pass(tw.check_inverse_quaternary_s().unwrap(), &tag);
        assert_pass(tw.check_inverse_quaternary_cal().unwrap(), &tag);
        assert_pass(tw.check_symmetry(Flip::Super).unwrap(), &tag);
        assert_pass(tw.check_symmetry(Flip::Iota).unwrap(), &tag);
    }
}

#[test]
fn free_scalar_breaks_only_the_symmetry_relation() {
    let tw = Twisted::model(1, 2, 2, Mode::Extended).unwrap();
    assert_pass(tw.check_quaternary_cal().unwrap(), "quaternary");
    let def = tw.symmetry_defect(Flip::Super).unwrap();
    let (k, _, _, p) = tw.first_nonzero(&def).unwrap().expect("symmetry must fail");
    assert_eq!(k, 0);
    assert_eq!(p, NcPoly::word(&[Sym::central(1)], Rat::int(-4)));
}

#[test]
fn twisted_centre_frozen() {
    for (m, n) in [(0, 2), (2, 0)] {
        let tw = model(m, n, 3);
        let z = tw.z_tw().unwrap();
        assert_eq!(counit_series(&z), Series::constant(Rat::one()).truncate(3));
        assert_pass(tw.commutes_with(&z, 3, &tw.generator_images(3).unwrap()).unwrap(), "centrality");
    }
    assert_eq!(
        render_series(&model(0, 2, 3).z_tw().unwrap()),
        "1 + (-2*t[1,1,1] + 2*t[2,2,1] + 4*t[1,1,2] + 4*t[2,2,2] - 2*t[1,1,1]*t[1,1,1] \
         - 4*t[1,2,1]*t[2,1,1] - 2*t[2,2,1]*t[2,2,1])*u^-3"
    );
    assert_eq!(
        render_series(&model(2, 0, 3).z_tw().unwrap()),
        "1 + (-2*t[1,1,1] + 2*t[2,2,1] - 4*t[1,1,2] - 4*t[2,2,2] + 2*t[1,1,1]*t[1,1,1] \
         + 4*t[1,2,1]*t[2,1,1] + 2*t[2,2,1]*t[2,2,1])*u^-3"
    );
}

#[test]
fn twisted_centre_is_central_with_no_low_terms() {
    let tw = model(1, 2, 5);
    let (z, low) = tw.check_z_tw().unwrap();
    assert_pass(low, "low coefficients");
    assert!(z.get(1).is_empty() && z.get(2).is_empty());
    assert_eq!(counit_series(&z), Series::constant(Rat::one()).truncate(5));
    let scope = tw.generator_images(5).unwrap();
    assert_pass(tw.commutes_with(&z, 5, &scope).unwrap(), "centrality");
}

#[test]
fn centre_contraction_is_not_scalar() {
    let tw = model(1, 2, 2);
    for first in [true, false] {
        assert!(!tw.check_center_contraction(first).unwrap().passed());
    }
}

#[test]
fn rank_one_berezinian_by_hand() {
    // For (1|0) everything commutes and 𝔅^tw(u) = t(u) t(-u).
    let tw = model(1, 0, 4);
    let ctx = tw.ctx().clone();
    let mut c = vec![NcPoly::one()];
    for r in 1..=4 {
        c.push(NcPoly::sym(Sym::t(&ctx, 1, 1, r)));
    }
    let t: PolySeries = Series::from_coeffs(c, 4);
    let want = tw.base.nf_series(&t.mul(&t.substitute(-1, &Rat::zero(), 4))).unwrap();
    assert_pass(tw.base.series_equal(&tw.berezinian_fusion().unwrap(), &want, "t(u)t(-u)").unwrap(), "(1|0)");
}

#[test]
fn odd_pair_berezinian_frozen() {
    let tw = model(0, 2, 2);
    let fused = tw.berezinian_fusion().unwrap();
    assert_eq!(
        render_series(&fused),
        "1 + -1*u^-1 + (-1/2 + t[1,1,1] - t[2,2,1] - 2*t[1,1,2] - 2*t[2,2,2] + t[1,1,1]*t[1,1,1] \
         + 2*t[1,2,1]*t[2,1,1] + t[2,2,1]*t[2,2,1])*u^-2"
    );
    assert_pass(tw.base.series_equal(&fused, &tw.berezinian_explicit().unwrap(), "explicit").unwrap(), "(0|2)");
    assert_eq!(render_series(&model(1, 2, 1).berezinian_fusion().unwrap()), "1 + -1*u^-1");
}

#[test]
fn berezinian_forms_agree_on_the_window() {
    for (m, n, d) in [(1, 2, 2), (2, 2, 1), (2, 0, 3)] {
        let tw = model(m, n, d);
        let y = &tw.base;
        let fused = tw.berezinian_fusion().unwrap();
        let tag = format!("({m}|{n}) D={d}");
        assert_pass(y.series_equal(&fused, &tw.berezinian_factorized().unwrap(), "factorized").unwrap(), &tag);
        assert_pass(y.series_equal(&fused, &tw.berezinian_explicit().unwrap(), "explicit").unwrap(), &tag);
    }
    let tw = model(1, 2, 2);
    assert_pass(tw.check_liouville(&tw.z_tw().unwrap(), &tw.berezinian_fusion().unwrap()).unwrap(), "liouville");
}

#[test]
fn factorized_form_breaks_at_third_order() {
    let tw = model(1, 2, 3);
    let msg = failure(
        tw.base.series_equal(&tw.berezinian_fusion().unwrap(), &tw.berezinian_factorized().unwrap(), "x").unwrap(),
    );
    assert!(msg.contains("u^-3"), "{msg}");
}

#[test]
fn explicit_form_breaks_for_odd_even_rank() {
    let tw = model(3, 0, 2);
    let msg = failure(
        tw.base.series_equal(&tw.berezinian_fusion().unwrap(), &tw.berezinian_explicit().unwrap(), "x").unwrap(),
    );
    assert!(msg.contains("u^-2"), "{msg}");
}

#[test]
fn extended_series_and_involution() {
    for mode in [Mode::Strict, Mode::Extended] {
        let tw = Twisted::model(1, 2, 2, mode).unwrap();
        let e = tw.e_series_relation().unwrap();
        assert_pass(tw.base.series_equal(&e, &tw.e_series_expected().unwrap(), "relation").unwrap(), mode.name());
        assert_pass(tw.base.series_equal(&tw.e_series_closed().unwrap(), &e, "closed").unwrap(), mode.name());
    }
    assert_pass(Twisted::formal(1, 2, 2).unwrap().check_varpi_involution().unwrap(), "ϖ²");
}

#[test]
fn quasi_determinant_maps_compose() {
    assert_pass(check_psi_composition(1, 2, 1, 1, 1).unwrap(), "ψ_1ψ_1 = ψ_2");
    let big = Twisted::formal(2, 2, 2).unwrap();
    assert_pass(same_images(&big.psi_images(1).unwrap(), &big.psi_via_varpi(1).unwrap(), "ψ"), "ϖνϖ");
}

#[test]
fn corner_removal_is_not_a_homomorphism() {
    let big = model(2, 2, 2);
    let shift = failure(check_shift_embedding(&big, 1, false).unwrap());
    let psi = failure(check_shift_embedding(&big, 1, true).unwrap());
    assert!(shift.contains("u^-0 v^-0"), "{shift}");
    assert!(psi.contains("u^-0 v^-0"), "{psi}");
    assert!(!check_sylvester(&big, 1, MinorLadder::Leading).unwrap().passed());
    let small = model(1, 2, 2);
    assert!(!check_complementary_minors(&small, 1, MinorLadder::Leading).unwrap().passed());
}

#[test]
fn rescaling_needs_an_even_factor() {
    let tw = model(1, 2, 4);
    let f = Series::from_coeffs(vec![Rat::one(), Rat::one()], 4);
    let (quaternary, symmetry) = tw.check_mu_tw(&f).unwrap();
    assert_pass(quaternary, "quaternary");
    assert!(!symmetry.passed());
    // 𝔷 picks up g(u+M-N)/g(u), which is not 1 unless M = N.
    let z = tw.z_tw().unwrap();
    assert!(!tw.is_mu_invariant(&z, &f, 4).unwrap().passed());
}

fn small_series() -> impl Strategy<Value = Series<Rat>> {
    prop::collection::vec((-3i64..=3, 1i64..=3), 2).prop_map(|c| {
        let mut coeffs = vec![Rat::one()];
        coeffs.extend(c.into_iter().map(|(a, b)| Rat::new(a, b)));
        Series::from_coeffs(coeffs, 2)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn even_rescaling_preserves_both_relations(f in small_series()) {
        let tw = model(0, 2, 2);
        let g = f.mul(&f.substitute(-1, &Rat::zero(), 2));
        let (a, b) = tw.check_mu_tw(&g).unwrap();
        prop_assert_eq!(a, Verdict::Pass);
        prop_assert_eq!(b, Verdict::Pass);
    }

    #[test]
    fn rescaled_centre_follows_the_shift_rule(f in small_series()) {
        let tw = model(1, 2, 2);
        prop_assert_eq!(tw.check_mu_tw_center(&f).unwrap(), Verdict::Pass);
    }
}
