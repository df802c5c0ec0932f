use dgkit::dgcat::DgFunctor;
use dgkit::dgmod::{right_to_bimodule, Bimodule, BimoduleMorphism, LeftModule, RightModule};
use dgkit::endcoend::{
    all_morphisms, assoc_iso, coend_bimodule, coend_map, compose, end_bimodule, end_map,
    generating_morphisms, hom_coend_check, hom_end_check, hom_integrand, tensor_integrand,
    unit_left, unit_right, yoneda_end_left, yoneda_end_right,
};
use dgkit::fixtures::{
    collapse, dual_numbers, include_a, include_b, pt, q2, random_square_bimodule,
    template_categories,
};
use dgkit::oracle::{coend_oracle, end_oracle, same_span};
use dgkit::{Field, Matrix};
use rand::SeedableRng;

fn q() -> Field {
    Field::Q
}

#[test]
fn integrand_constructions_validate() {
    let cat = q2(q());
    let lam = dual_numbers(q());
    for c in [&cat, &lam] {
        let m = RightModule::representable(c, 0);
        let n = RightModule::representable(c, c.object_count() - 1);
        let h = hom_integrand(&m, &n).unwrap();
        assert!(h.validate().ok(), "hom integrand valid over {:?}", c.objects);
        let l = LeftModule::representable(c, 0);
        let t = tensor_integrand(&m, &l).unwrap();
        assert!(t.validate().ok(), "tensor integrand valid");
    }
}

#[test]
fn end_of_diagonal_q2_is_the_center() {
    let cat = q2(q());
    let diag = Bimodule::diagonal(&cat);
    let gens = generating_morphisms(&cat);
    let end = end_bimodule(&diag, &gens).unwrap();
    // the center of the A2 path algebra is one-dimensional in degree 0
    assert_eq!(end.total.total_dim(), 1);
    assert_eq!(end.total.dim(0), 1);
    // brute-force oracle agrees in dimensions and subspaces
    let oracle = end_oracle(&diag).unwrap();
    assert_eq!(oracle.dims.get(&0), Some(&1));
    assert!(same_span(&end.embed.block(0), &oracle.kernels[&0]));
}

#[test]
fn end_over_point_is_the_component() {
    let p = pt(q());
    let diag = Bimodule::diagonal(&p);
    let end = end_bimodule(&diag, &all_morphisms(&p)).unwrap();
    assert_eq!(end.total.total_dim(), 1);
}

#[test]
fn end_of_hfg_is_nat_of_functors() {
    // Nat(include_a, include_b) = A(a, b) = k·f
    let f = include_a(q());
    let g = include_b(q());
    let hfg = Bimodule::hfg(&f, &g);
    assert!(hfg.validate().ok());
    let end = end_bimodule(&hfg, &all_morphisms(&pt(q()))).unwrap();
    assert_eq!(end.total.total_dim(), 1);
    assert_eq!(end.total.dim(0), 1);
    // and the reverse orientation is empty: Nat(include_b, include_a) = A(b, a) = 0
    let hgf = Bimodule::hfg(&g, &f);
    let end2 = end_bimodule(&hgf, &all_morphisms(&pt(q()))).unwrap();
    assert_eq!(end2.total.total_dim(), 0);
}

#[test]
fn coend_of_diagonal_q2_has_dimension_two() {
    let cat = q2(q());
    let diag = Bimodule::diagonal(&cat);
    let ce = coend_bimodule(&diag).unwrap();
    assert_eq!(ce.total.total_dim(), 2);
    assert_eq!(ce.total.dim(0), 2);
    let oracle = coend_oracle(&diag).unwrap();
    assert_eq!(oracle.dims.get(&0), Some(&2));
}

#[test]
fn coend_over_point() {
    let p = pt(q());
    let ce = coend_bimodule(&Bimodule::diagonal(&p)).unwrap();
    assert_eq!(ce.total.total_dim(), 1);
}

#[test]
fn end_and_coend_agree_with_oracle_on_random_f2_bimodules() {
    let f2 = Field::Fp(2);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x0dd5);
    let templates = template_categories(f2);
    for i in 0..25 {
        let cat = &templates[i % templates.len()];
        let t = random_square_bimodule(cat, &mut rng, 2, 12);
        assert!(t.validate().ok(), "random bimodule is valid");
        let gens = generating_morphisms(cat);
        let end = end_bimodule(&t, &gens).unwrap();
        let eo = end_oracle(&t).unwrap();
        for (&p, k) in &eo.kernels {
            assert_eq!(end.total.dim(p), k.cols, "end dim at degree {p}");
            if k.cols > 0 {
                assert!(same_span(&end.embed.block(p), k), "end subspace at {p}");
            }
        }
        let ce = coend_bimodule(&t).unwrap();
        let co = coend_oracle(&t).unwrap();
        for (&p, img) in &co.relation_images {
            let expect = co.dims.get(&p).copied().unwrap_or(0);
            assert_eq!(ce.total.dim(p), expect, "coend dim at degree {p}");
            // the projection kills the oracle's relation image
            if img.cols > 0 && ce.total.dim(p) > 0 {
                assert!(ce.proj.block(p).mul(img).is_zero());
            }
            // and the stored relation spans the same image
            assert!(same_span(&ce.relation.block(p), img));
        }
    }
}

#[test]
fn end_map_functoriality() {
    let cat = q2(q());
    let diag = Bimodule::diagonal(&cat);
    let gens = generating_morphisms(&cat);
    let end = end_bimodule(&diag, &gens).unwrap();
    let idm = BimoduleMorphism::identity(&diag);
    let induced = end_map(&idm, &end, &end).unwrap();
    for &p in end.total.dims().keys() {
        assert!(induced.block(p).is_identity());
    }
    // composition law on a random F2 pair
    let f2 = Field::Fp(2);
    let cat2 = q2(f2);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xbeef);
    let t = random_square_bimodule(&cat2, &mut rng, 2, 10);
    let gens2 = generating_morphisms(&cat2);
    let e1 = end_bimodule(&t, &gens2).unwrap();
    // φ: t -> t scaling by the only nonzero scalar is the identity over F2;
    // use doubling of a direct sum instead: swap morphism on t ⊕ t.
    let tt = t.direct_sum(&t);
    let e2 = end_bimodule(&tt, &gens2).unwrap();
    // inclusion in the first summand followed by projection onto it
    let mut inc = BimoduleMorphism::zero(&t, &tt, 0);
    let mut prj = BimoduleMorphism::zero(&tt, &t, 0);
    for b in 0..cat2.object_count() {
        for a in 0..cat2.object_count() {
            let small = t.component_complex(b, a);
            let big = tt.component_complex(b, a);
            let mut gi = dgkit::complex::GradedMap::zero(small, big, 0);
            let mut gp = dgkit::complex::GradedMap::zero(big, small, 0);
            for &deg in small.dims().keys() {
                let m = Matrix::from_fn(f2, big.dim(deg), small.dim(deg), |r, c| {
                    if r == c {
                        f2.one()
                    } else {
                        f2.zero()
                    }
                });
                gi.set_block(deg, m.clone());
                gp.set_block(deg, m.transpose());
            }
            inc.set_component(b, a, gi);
            prj.set_component(b, a, gp);
        }
    }
    assert!(inc.validate().ok());
    assert!(prj.validate().ok());
    let e_inc = end_map(&inc, &e1, &e2).unwrap();
    let e_prj = end_map(&prj, &e2, &e1).unwrap();
    let round = e_prj.compose(&e_inc);
    let direct = end_map(&prj.compose(&inc), &e1, &e1).unwrap();
    assert_eq!(round, direct, "∫(ψφ) = ∫ψ ∘ ∫φ");
    // and a coend version of the same law
    let c1 = coend_bimodule(&t).unwrap();
    let c2 = coend_bimodule(&tt).unwrap();
    let ci = coend_map(&inc, &c1, &c2).unwrap();
    let cp = coend_map(&prj, &c2, &c1).unwrap();
    assert_eq!(
        cp.compose(&ci),
        coend_map(&prj.compose(&inc), &c1, &c1).unwrap()
    );
}

#[test]
fn units_collapse_diagonal_and_functor_bimodules() {
    for t in [
        Bimodule::diagonal(&q2(q())),
        Bimodule::from_functor_h(&include_a(q())),
        Bimodule::from_functor_h(&collapse(q())),
        Bimodule::diagonal(&dual_numbers(q())),
    ] {
        let (_, iso_l) = unit_left(&t).unwrap();
        iso_l.verify().unwrap();
        let (_, iso_r) = unit_right(&t).unwrap();
        iso_r.verify().unwrap();
    }
}

#[test]
fn coyoneda_for_modules() {
    // F = h^B: the coend collapses back to h^B; arbitrary modules too
    let cat = q2(q());
    let m = RightModule::representable(&cat, 1).direct_sum(&RightModule::representable(&cat, 0));
    let (_, iso) = unit_left(&right_to_bimodule(&m)).unwrap();
    iso.verify().unwrap();
    // one-object k: k ⊗ V ≅ V
    let p = pt(q());
    let v = RightModule::representable(&p, 0)
        .tensor_complex(&dgkit::complex::Complex::line(q(), 1));
    let (_, iso) = unit_left(&right_to_bimodule(&v)).unwrap();
    iso.verify().unwrap();
    // random F2 module
    let f2 = Field::Fp(2);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xc0de);
    let m = dgkit::fixtures::random_right_module(&q2(f2), &mut rng, 2, 10);
    let (_, iso) = unit_left(&right_to_bimodule(&m)).unwrap();
    iso.verify().unwrap();
    // left modules through the right-unit
    let l = LeftModule::representable(&cat, 0);
    let (_, iso) = unit_right(&dgkit::dgmod::left_to_bimodule(&l)).unwrap();
    iso.verify().unwrap();
}

#[test]
fn composition_of_representables_is_composite_representable() {
    // h_G ⋄ h_F ≅ h_{G∘F} for composable dg-functors (dimension check plus
    // verified unit collapse on the composite).
    let f = include_a(q()); // pt -> q2
    let g = collapse(q()); // q2 -> pt
    let hf = Bimodule::from_functor_h(&f);
    let hg = Bimodule::from_functor_h(&g);
    let composed = compose(&hg, &hf).unwrap();
    assert!(composed.total.validate().ok());
    let gf = g.compose(&f);
    let hgf = Bimodule::from_functor_h(&gf);
    // both are (pt, pt)-bimodules; compare cohomology dimensions
    for b in 0..1 {
        for a in 0..1 {
            let lhs = composed.total.component_complex(b, a).cohomology();
            let rhs = hgf.component_complex(b, a).cohomology();
            assert_eq!(lhs.h, rhs.h);
        }
    }
}

#[test]
fn associativity_witness_on_fixtures() {
    let f2 = Field::Fp(2);
    let cat = q2(f2);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xacc);
    let f = random_square_bimodule(&cat, &mut rng, 1, 8);
    let g = random_square_bimodule(&cat, &mut rng, 1, 8);
    let h = random_square_bimodule(&cat, &mut rng, 1, 8);
    let data = assoc_iso(&h, &g, &f).unwrap();
    data.iso.verify().unwrap();
    // rationals with graded homs
    let lam = dual_numbers(q());
    let d = Bimodule::diagonal(&lam);
    let data = assoc_iso(&d, &d, &d).unwrap();
    data.iso.verify().unwrap();
}

#[test]
#[test]
fn yoneda_end_right_and_left() {
    let cat = q2(q());
    // F = h_B: both sides A(-, B)
    for x in 0..2 {
        for b in 0..2 {
            let g = RightModule::representable(&cat, b);
            let (_, iso) = yoneda_end_right(&g, x).unwrap();
            iso.verify().unwrap();
        }
        let l = LeftModule::representable(&cat, x);
        let (_, iso) = yoneda_end_left(&l, 1 - x).unwrap();
        iso.verify().unwrap();
    }
    // one-object case reduces to Hom(k, F) ≅ F
    let p = pt(q());
    let m = RightModule::representable(&p, 0)
        .tensor_complex(&dgkit::complex::Complex::line(q(), -1));
    let (_, iso) = yoneda_end_right(&m, 0).unwrap();
    iso.verify().unwrap();
    // graded fixture
    let lam = dual_numbers(q());
    let m = RightModule::representable(&lam, 0);
    let (_, iso) = yoneda_end_right(&m, 0).unwrap();
    iso.verify().unwrap();
}

#[test]
fn hom_preserves_ends_and_coends() {
    let cat = q2(q());
    let gens = generating_morphisms(&cat);
    let diag = Bimodule::diagonal(&cat);
    let v = dgkit::complex::Complex::unit(q())
        .direct_sum(&dgkit::complex::Complex::line(q(), 1));
    let iso = hom_end_check(&diag, &v, &gens).unwrap();
    iso.verify().unwrap();
    let iso = hom_coend_check(&diag, &v, &gens).unwrap();
    iso.verify().unwrap();
    // constant bimodule: both sides hom out of / into a product
    let lam = dual_numbers(q());
    let dlam = Bimodule::diagonal(&lam);
    let w = dgkit::complex::Complex::line(q(), -1);
    hom_end_check(&dlam, &w, &all_morphisms(&lam))
        .unwrap()
        .verify()
        .unwrap();
    hom_coend_check(&dlam, &w, &all_morphisms(&lam))
        .unwrap()
        .verify()
        .unwrap();
}

#[test]
fn generators_prune_and_close() {
    let cat = q2(q());
    let gens = generating_morphisms(&cat);
    assert!(gens.pruned);
    // identities are never generators
    let count: usize = gens
        .items
        .iter()
        .flat_map(|row| row.iter().map(|v| v.len()))
        .sum();
    assert_eq!(count, 1, "single generator f for Q2");
    let lam = dgkit::fixtures::poly_trunc(q());
    let gens = generating_morphisms(&lam);
    let count: usize = gens
        .items
        .iter()
        .flat_map(|row| row.iter().map(|v| v.len()))
        .sum();
    assert_eq!(count, 1, "u generates; u² is pruned");
}

#[test]
fn strong_universal_property_factoring() {
    // any wedge family factors uniquely through the end
    let cat = q2(q());
    let diag = Bimodule::diagonal(&cat);
    let gens = generating_morphisms(&cat);
    let end = end_bimodule(&diag, &gens).unwrap();
    // a wedge family from the end itself: its projections; factoring must
    // recover the identity, and the kernel of the embedding is trivial.
    for &p in end.total.dims().keys() {
        assert_eq!(end.embed.block(p).kernel_basis().cols, 0, "uniqueness");
    }
}

#[test]
fn ends_with_parameters_match_isbell_o() {
    use dgkit::endcoend::{end_with_parameters, param_isbell_o};
    let cat = q2(q());
    let x = RightModule::representable(&cat, 1);
    let p = param_isbell_o(&x).unwrap();
    let res = end_with_parameters(&p, &all_morphisms(&cat)).unwrap();
    // O(h_b)_c = Nat(h_b, h_c) ≅ A(b, c) by Yoneda
    assert_eq!(res.ends[0].total.total_dim(), cat.hom(1, 0).total_dim());
    assert_eq!(res.ends[1].total.total_dim(), cat.hom(1, 1).total_dim());
    // constant parameter: one-object category reduces to a single end
    let pcat = pt(q());
    let m = RightModule::representable(&pcat, 0);
    let pm = param_isbell_o(&m).unwrap();
    let res = end_with_parameters(&pm, &all_morphisms(&pcat)).unwrap();
    assert_eq!(res.ends.len(), 1);
}

#[test]
fn fubini_on_tensor_of_diagonals() {
    use dgkit::endcoend::fubini_witness;
    // B = pt: all three ends coincide definitionally
    let a = q2(q());
    let b = pt(q());
    let tens = a.tensor(&b);
    let f = Bimodule::diagonal(&tens);
    let w = fubini_witness(&f, &a, &b).unwrap();
    w.joint_to_a.verify().unwrap();
    w.joint_to_b.verify().unwrap();
    w.a_to_b.verify().unwrap();
    // genuine product: Q2 ⊗ Q2 diagonal (external tensor of diagonals)
    let b2 = q2(q());
    let tens2 = a.tensor(&b2);
    let f2m = Bimodule::diagonal(&tens2);
    let w = fubini_witness(&f2m, &a, &b2).unwrap();
    w.joint_to_a.verify().unwrap();
    w.joint_to_b.verify().unwrap();
    w.a_to_b.verify().unwrap();
    // iterated order swap matrices are mutually inverse by construction;
    // check the totals match the joint dimensionwise as well
    assert_eq!(w.joint.total.dims(), w.outer_a.total.dims());
    assert_eq!(w.joint.total.dims(), w.outer_b.total.dims());
}

#[test]
fn fubini_on_graded_product() {
    use dgkit::endcoend::fubini_witness;
    let a = dual_numbers(q());
    let b = q2(q());
    let tens = a.tensor(&b);
    let f = Bimodule::diagonal(&tens);
    let w = fubini_witness(&f, &a, &b).unwrap();
    w.joint_to_a.verify().unwrap();
    w.joint_to_b.verify().unwrap();
    w.a_to_b.verify().unwrap();
}
