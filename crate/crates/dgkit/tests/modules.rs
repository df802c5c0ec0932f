use dgkit::complex::Complex;
use dgkit::dgcat::{Axiom, DgFunctor};
use dgkit::dgmod::{
    bimodule_from_envelope, nat_complex, nat_coords_of_right_morphism, right_module_over_envelope,
    right_morphism_from_nat, right_to_bimodule, yoneda_iso, Bimodule, LeftModule, RightModule,
    RightMorphism,
};
use dgkit::fixtures::{collapse, dual_numbers, include_a, include_b, poly_trunc, pt, q2};
use dgkit::{Field, Matrix};

fn q() -> Field {
    Field::Q
}

#[test]
fn representables_and_diagonal_validate() {
    for cat in [pt(q()), q2(q()), dual_numbers(q()), poly_trunc(q())] {
        for a in 0..cat.object_count() {
            assert!(RightModule::representable(&cat, a).validate().ok());
            assert!(LeftModule::representable(&cat, a).validate().ok());
        }
        assert!(Bimodule::diagonal(&cat).validate().ok());
    }
}

#[test]
fn q2_representable_components() {
    let cat = q2(q());
    let hb = RightModule::representable(&cat, 1);
    // h_b has components (k·f at a, k·1_b at b)
    assert_eq!(hb.component(0).total_dim(), 1);
    assert_eq!(hb.component(1).total_dim(), 1);
    let ha = RightModule::representable(&cat, 0);
    assert_eq!(ha.component(0).total_dim(), 1);
    assert_eq!(ha.component(1).total_dim(), 0);
}

#[test]
fn seeded_action_fault_fails_chain_check() {
    // Over a category with du = v, flipping the action's sign on the
    // degree-0 generator only breaks the Leibniz rule: d(x·u) ≠ x·(du).
    let cat = dgkit::fixtures::acyclic_arrow(q());
    let hq = RightModule::representable(&cat, 1);
    let mut action: Vec<Vec<dgkit::complex::GradedMap>> = (0..2)
        .map(|a| (0..2).map(|a2| hq.action_map(a, a2).clone()).collect())
        .collect();
    // action[1][0]: M(q) ⊗ hom(p, q) -> M(p); negate the degree-0 block only
    let mut broken_map = action[1][0].clone();
    let blk = broken_map.block(0).neg();
    broken_map.set_block(0, blk);
    action[1][0] = broken_map;
    let broken = RightModule::new_unchecked(
        cat.clone(),
        vec![hq.component(0).clone(), hq.component(1).clone()],
        action,
    );
    let report = broken.validate();
    assert!(!report.ok());
    assert!(report
        .failures
        .iter()
        .any(|v| matches!(v.axiom, Axiom::ActionClosed)));
}

#[test]
fn from_functor_identity_gives_diagonal() {
    let cat = q2(q());
    let idf = DgFunctor::identity(&cat);
    let hf = Bimodule::from_functor_h(&idf);
    assert_eq!(hf, Bimodule::diagonal(&cat));
    let hfg = Bimodule::hfg(&idf, &idf);
    assert_eq!(hfg, Bimodule::diagonal(&cat));
}

#[test]
fn functor_bimodules_validate() {
    for f in [include_a(q()), include_b(q()), collapse(q())] {
        assert!(Bimodule::from_functor_h(&f).validate().ok());
        assert!(Bimodule::from_functor_co(&f).validate().ok());
    }
    let hfg = Bimodule::hfg(&include_a(q()), &include_b(q()));
    assert!(hfg.validate().ok());
}

#[test]
fn components_of_functor_bimodules() {
    let cat = q2(q());
    // (h_F)_A = h_{F(A)}
    let f = include_b(q());
    let hf = Bimodule::from_functor_h(&f);
    let comp = hf.component(0);
    assert_eq!(comp, RightModule::representable(&cat, 1));
    // diagonal components are representables
    let diag = Bimodule::diagonal(&cat);
    for a in 0..2 {
        assert_eq!(diag.component(a), RightModule::representable(&cat, a));
        assert_eq!(diag.co_component(a), LeftModule::representable(&cat, a));
    }
    // (h^F)^B matches A(F(-), B)
    let hco = Bimodule::from_functor_co(&f);
    let cob = hco.co_component(0); // left module over A = q2... cov of h^F is A
    assert_eq!(cob.component(0).total_dim(), cat.hom(1, 0).total_dim());
    assert_eq!(cob.component(1).total_dim(), cat.hom(1, 1).total_dim());
}

#[test]
fn nat_complex_identity_cycle_and_yoneda_dims() {
    let cat = q2(q());
    let ha = RightModule::representable(&cat, 0);
    let hb = RightModule::representable(&cat, 1);
    // nat(M, M) contains the identity as a degree-0 cycle
    let nat = nat_complex(&hb, &hb).unwrap();
    let idm = RightMorphism::identity(&hb);
    let coords = nat_coords_of_right_morphism(&nat, &idm).expect("identity satisfies the rules");
    let d0 = nat.total.d(0);
    assert!(d0.mul(&coords).is_zero(), "identity is closed");
    // round trip
    let back = right_morphism_from_nat(&nat, &hb, &hb, 0, &coords);
    assert_eq!(back, idm);
    // nat(h_a, h_b) is one-dimensional, spanned by f-postcomposition
    let nat_ab = nat_complex(&ha, &hb).unwrap();
    assert_eq!(nat_ab.total.dim(0), 1);
    assert_eq!(nat_ab.total.total_dim(), 1);
}

#[test]
fn yoneda_round_trips() {
    let cat = q2(q());
    // F = h_a at a: both sides A(a,a)
    for a in 0..2 {
        for target in 0..2 {
            let f = RightModule::representable(&cat, target);
            let w = yoneda_iso(&f, a).unwrap();
            assert!(w.to.compose(&w.from).is_identity_map());
            assert!(w.from.compose(&w.to).is_identity_map());
        }
    }
    // Q2, A = a, F = h_b: both sides k·f
    let f = RightModule::representable(&cat, 1);
    let w = yoneda_iso(&f, 0).unwrap();
    assert_eq!(w.nat.total.total_dim(), 1);
    // dual numbers: modules with higher-degree parts
    let lam = dual_numbers(q());
    let hx = RightModule::representable(&lam, 0);
    let w = yoneda_iso(&hx, 0).unwrap();
    assert_eq!(w.nat.total.dims(), hx.component(0).dims());
}

#[test]
fn yoneda_on_f2_module_exhaustive() {
    let f2 = Field::Fp(2);
    let cat = q2(f2);
    // a non-representable module: h_a ⊕ h_b shifted
    let m = RightModule::representable(&cat, 0)
        .direct_sum(&RightModule::representable(&cat, 1).shift(1));
    assert!(m.validate().ok());
    for a in 0..2 {
        let w = yoneda_iso(&m, a).unwrap();
        assert!(w.to.compose(&w.from).is_identity_map());
        assert!(w.from.compose(&w.to).is_identity_map());
    }
}

#[test]
fn module_constructions_validate() {
    let cat = q2(q());
    let ha = RightModule::representable(&cat, 0);
    let hb = RightModule::representable(&cat, 1);
    let sum = ha.direct_sum(&hb);
    assert!(sum.validate().ok());
    let shifted = sum.shift(2);
    assert!(shifted.validate().ok());
    assert_eq!(shifted.component(0).min_degree(), Some(-2));
    let v = Complex::unit(q()).direct_sum(&Complex::line(q(), 1));
    let tens = hb.tensor_complex(&v);
    assert!(tens.validate().ok());
    // restriction along a functor
    let res = hb.restrict(&include_a(q()));
    assert!(res.validate().ok());
    assert_eq!(res.component(0), cat.hom(0, 1));
}

#[test]
fn morphism_rules_and_closedness() {
    let cat = q2(q());
    let ha = RightModule::representable(&cat, 0);
    let hb = RightModule::representable(&cat, 1);
    // postcomposition with f: h_a -> h_b is a closed degree-0 morphism
    let f = cat.basis_vec(0, 1, 0, 0);
    let comps: Vec<dgkit::complex::GradedMap> = (0..2)
        .map(|x| {
            let mut g =
                dgkit::complex::GradedMap::zero(ha.component(x), hb.component(x), 0);
            for &deg in ha.component(x).dims().keys() {
                let m = Matrix::from_fn(
                    q(),
                    hb.component(x).dim(deg),
                    ha.component(x).dim(deg),
                    |r, c| {
                        let xv = cat.basis_vec(x, 0, deg, c);
                        cat.compose(x, 0, 1, 0, &f, deg, &xv).at(r, 0).clone()
                    },
                );
                g.set_block(deg, m);
            }
            g
        })
        .collect();
    let phi = RightMorphism::new(&ha, &hb, 0, comps);
    assert!(phi.validate().ok());
    assert!(phi.is_morphism_closed());
    // closedness is equivalent to the componentwise differential vanishing
    assert!(phi.differential().component(0).is_zero());
    assert!(phi.differential().component(1).is_zero());
}

#[test]
fn envelope_round_trip() {
    for t in [
        Bimodule::diagonal(&q2(q())),
        Bimodule::diagonal(&dual_numbers(q())),
        Bimodule::from_functor_h(&include_b(q())),
        Bimodule::hfg(&include_a(q()), &include_b(q())),
    ] {
        let m = right_module_over_envelope(&t);
        assert!(m.validate().ok(), "envelope module is valid");
        let back = bimodule_from_envelope(&m, &t.cov, &t.contra);
        assert_eq!(back, t, "envelope round-trip is exact");
    }
}

#[test]
fn right_module_bimodule_round_trip() {
    let cat = q2(q());
    let m = RightModule::representable(&cat, 1).direct_sum(&RightModule::representable(&cat, 0));
    let t = right_to_bimodule(&m);
    assert!(t.validate().ok());
    assert_eq!(dgkit::dgmod::bimodule_to_right(&t), m);
}

#[test]
fn transport_functor_notation_round_trip() {
    // functor-notation transports compose with the Koszul rule of the
    // opposite category: M<f>M<g> = (-1)^{|f||g|} M<gf>
    let cat = poly_trunc(q());
    let m = RightModule::representable(&cat, 0);
    let u = cat.basis_vec(0, 0, 1, 0);
    let t1 = m.transport(0, 0, 1, &u);
    let t2 = t1.compose(&t1);
    let uu = cat.compose(0, 0, 0, 1, &u, 1, &u);
    let tuu = m.transport(0, 0, 2, &uu);
    assert_eq!(t2, tuu.scale(&q().one().neg()));
    // d-compatibility: d∘M<f> - (-1)^{|f|}M<f>∘d = M<df>
    let lam = dgkit::fixtures::acyclic_arrow(q());
    let hq = RightModule::representable(&lam, 1);
    let uvec = lam.basis_vec(0, 1, 0, 0);
    let t = hq.transport(1, 0, 0, &uvec);
    let dt = t.differential();
    let dv = lam.basis_vec(0, 1, 1, 0);
    let tdv = hq.transport(1, 0, 1, &dv);
    assert_eq!(dt, tdv);
}
