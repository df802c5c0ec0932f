use dgkit::derived::{structural_maps, verify_quasiadj_diagrams};
use dgkit::dgmod::Bimodule;
use dgkit::fixtures::{collapse, dual_numbers, include_a, q2};
use dgkit::Field;

fn q() -> Field {
    Field::Q
}

#[test]
fn structural_maps_exist_and_validate_for_diagonal() {
    let cat = q2(q());
    let diag = Bimodule::diagonal(&cat);
    let sm = structural_maps(&diag).unwrap();
    // the diagonal is right representable, so n is an exact isomorphism
    assert!(sm.map_n.is_iso(), "n is an isomorphism for T = h_A");
}

#[test]
fn quasiadj_diagrams_commute_for_diagonal() {
    let cat = q2(q());
    let diag = Bimodule::diagonal(&cat);
    let sm = structural_maps(&diag).unwrap();
    let report = verify_quasiadj_diagrams(&diag, &sm).unwrap();
    assert!(report.ok(), "{:?}", report.first_failure);
}

#[test]
fn quasiadj_diagrams_commute_for_h_f() {
    let f = include_a(q());
    let hf = Bimodule::from_functor_h(&f);
    let sm = structural_maps(&hf).unwrap();
    assert!(sm.map_n.is_iso(), "n is an isomorphism for right-representable T");
    let report = verify_quasiadj_diagrams(&hf, &sm).unwrap();
    assert!(report.ok(), "{:?}", report.first_failure);

    let g = collapse(q());
    let hg = Bimodule::from_functor_h(&g);
    let sm = structural_maps(&hg).unwrap();
    assert!(sm.map_n.is_iso());
    let report = verify_quasiadj_diagrams(&hg, &sm).unwrap();
    assert!(report.ok(), "{:?}", report.first_failure);
}

#[test]
fn quasiadj_diagrams_commute_on_graded_fixture() {
    // dual numbers: odd-degree morphisms exercise every Koszul sign
    let lam = dual_numbers(q());
    let diag = Bimodule::diagonal(&lam);
    let sm = structural_maps(&diag).unwrap();
    let report = verify_quasiadj_diagrams(&diag, &sm).unwrap();
    assert!(report.ok(), "{:?}", report.first_failure);
}

#[test]
fn n_closed_for_non_representable_t() {
    // T with an acyclic summand: n is still a closed degree-0 morphism
    let f2 = Field::Fp(2);
    let cat = q2(f2);
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(77);
    let t = dgkit::fixtures::random_square_bimodule(&cat, &mut rng, 2, 10);
    let sm = structural_maps(&t).unwrap();
    assert!(sm.map_n.is_morphism_closed());
    let report = verify_quasiadj_diagrams(&t, &sm).unwrap();
    assert!(report.ok(), "{:?}", report.first_failure);
}
