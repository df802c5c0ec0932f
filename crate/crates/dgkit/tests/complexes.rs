use dgkit::complex::{
    braiding, cone, evaluation, hom_tensor_adjunction, homotopy_inverse, is_quasi_iso, ChainMap,
    Complex, GradedMap,
};
use dgkit::{Field, Matrix};
use std::collections::BTreeMap;

fn q() -> Field {
    Field::Q
}

/// k in degree 0 and degree 1 with the given connecting entry.
fn two_term(field: Field, d: i64) -> Complex {
    let mut dims = BTreeMap::new();
    dims.insert(0, 1);
    dims.insert(1, 1);
    let mut diff = BTreeMap::new();
    diff.insert(0, Matrix::from_i64_rows(field, &[&[d]]));
    Complex::new(field, dims, diff).unwrap()
}

/// The dual-numbers complex: k·ε in degree -1, k·1 in degree 0, zero differential.
fn dual_numbers(field: Field) -> Complex {
    let mut dims = BTreeMap::new();
    dims.insert(-1, 1);
    dims.insert(0, 1);
    Complex::new(field, dims, BTreeMap::new()).unwrap()
}

#[test]
fn validate_zero_differentials_pass() {
    assert!(dual_numbers(q()).validate().is_ok());
}

#[test]
fn validate_catches_d_squared() {
    // k ->1 k ->1 k fails at the middle degree
    let mut dims = BTreeMap::new();
    for n in 0..3 {
        dims.insert(n, 1);
    }
    let mut diff = BTreeMap::new();
    diff.insert(0, Matrix::from_i64_rows(q(), &[&[1]]));
    diff.insert(1, Matrix::from_i64_rows(q(), &[&[1]]));
    let c = Complex::new(q(), dims.clone(), diff).unwrap();
    let err = c.validate().unwrap_err().to_string();
    assert!(err.contains("degree 0"), "reports first failing degree: {err}");

    // k ->1 k ->0 k passes
    let mut diff = BTreeMap::new();
    diff.insert(0, Matrix::from_i64_rows(q(), &[&[1]]));
    diff.insert(1, Matrix::from_i64_rows(q(), &[&[0]]));
    assert!(Complex::new(q(), dims, diff).unwrap().validate().is_ok());
}

#[test]
fn differential_of_chain_map_vanishes() {
    let c = two_term(q(), 1);
    let id = GradedMap::identity(&c);
    assert!(id.differential().is_zero());
}

#[test]
fn differential_of_degree_minus_one_map() {
    // V = (k -> k, d = 1), f: V -> V of degree -1 with single block 1.
    // df = d∘f + f∘d is the identity in both degrees.
    let v = two_term(q(), 1);
    let mut f = GradedMap::zero(&v, &v, -1);
    f.set_block(1, Matrix::identity(q(), 1));
    let df = f.differential();
    assert!(df.block(0).is_identity());
    assert!(df.block(1).is_identity());
}

#[test]
fn d_of_df_is_zero_on_random_maps() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let c = two_term(q(), 1).direct_sum(&dual_numbers(q()));
    let d = two_term(q(), 0).tensor(&dual_numbers(q()));
    for p in -2..3 {
        let mut f = GradedMap::zero(&c, &d, p);
        for &n in c.dims().keys() {
            if d.dim(n + p) > 0 {
                f.set_block(
                    n,
                    Matrix::from_fn(q(), d.dim(n + p), c.dim(n), |_, _| {
                        q().from_i64(rng.gen_range(-2..3))
                    }),
                );
            }
        }
        assert!(f.differential().differential().is_zero(), "d(df) = 0");
    }
}

#[test]
fn cohomology_zero_differential_equals_dims() {
    let c = dual_numbers(q());
    let h = c.cohomology();
    assert_eq!(h.dim(-1), 1);
    assert_eq!(h.dim(0), 1);
}

#[test]
fn cohomology_acyclic_two_term() {
    let c = two_term(q(), 1);
    assert!(c.is_acyclic());
}

#[test]
fn shift_and_cone_conventions() {
    let c = two_term(q(), 1);
    // cone(identity) is acyclic
    let id = ChainMap::identity(&c);
    assert!(cone(&id).cone.is_acyclic());
    // cone(0: C -> 0) = shift(C, 1) on the nose
    let zero_map = ChainMap::new(GradedMap::zero(&c, &Complex::zero(q()), 0)).unwrap();
    assert_eq!(cone(&zero_map).cone, c.shift(1));
}

#[test]
fn cone_maps_are_chain_maps_and_euler_additive() {
    let c = dual_numbers(q());
    let d = two_term(q(), 1).direct_sum(&dual_numbers(q()));
    let mut f = GradedMap::zero(&c, &d, 0);
    // only degree-0 and degree--1 blocks; choose closed one: map 1 to the
    // degree-0 part of the dual-numbers summand.
    let mut m0 = Matrix::zero(q(), d.dim(0), 1);
    m0.set(d.dim(0) - 1, 0, q().one());
    f.set_block(0, m0);
    let f = ChainMap::new(f).unwrap();
    let data = cone(&f);
    assert_eq!(
        data.cone.euler_characteristic(),
        d.euler_characteristic() - c.euler_characteristic()
    );
    // inclusion/projection verified closed by construction; check composite
    let proj_inc = data.project_source.compose(&data.include_target);
    assert!(proj_inc.map().is_zero());
}

#[test]
fn tensor_unit_and_convolution() {
    let c = dual_numbers(q()).direct_sum(&two_term(q(), 1));
    let unit = Complex::unit(q());
    let t = c.tensor(&unit);
    assert_eq!(t.dims(), c.dims());
    for &n in c.dims().keys() {
        assert_eq!(t.d(n), c.d(n));
    }
    // dims obey graded convolution: two 2-term complexes give (1,2,1)
    let a = two_term(q(), 0);
    let t = a.tensor(&a);
    assert_eq!(t.dim(0), 1);
    assert_eq!(t.dim(1), 2);
    assert_eq!(t.dim(2), 1);
    t.validate().unwrap();
}

#[test]
fn kunneth_over_a_field() {
    let fixtures = [
        two_term(q(), 1),
        dual_numbers(q()),
        two_term(q(), 0).tensor(&dual_numbers(q())),
    ];
    for c in &fixtures {
        for d in &fixtures {
            let t = c.tensor(d);
            t.validate().unwrap();
            let hs = c.cohomology();
            let ht = d.cohomology();
            let h = t.cohomology();
            for &n in t.dims().keys() {
                let expect: usize = hs
                    .h
                    .iter()
                    .map(|(&i, &a)| a * ht.dim(n - i))
                    .sum();
                assert_eq!(h.dim(n), expect, "Künneth at degree {n}");
            }
        }
    }
}

#[test]
fn internal_hom_unit_and_chain_maps() {
    let w = dual_numbers(q()).direct_sum(&two_term(q(), 1));
    let h = Complex::unit(q()).internal_hom(&w);
    assert_eq!(h.dims(), w.dims());
    for &n in w.dims().keys() {
        assert_eq!(h.d(n), w.d(n));
    }
}

#[test]
fn closed_degree_zero_hom_elements_are_chain_maps() {
    // Z^0(Hom(V, W)) has dimension = dimension of the space of chain maps.
    let v = two_term(q(), 1);
    let w = dual_numbers(q());
    let h = v.internal_hom(&w);
    h.validate().unwrap();
    let z0 = h.d(0).kernel_basis().cols;
    // independent count: solve chain-map equations directly
    let mut count_sys = dgkit::complex::VarSystem::new(q());
    for &n in v.dims().keys() {
        count_sys.add_var(("f", n), w.dim(n), v.dim(n));
    }
    for &n in v.dims().keys() {
        let mut eq = dgkit::complex::EqBuilder::new(q(), w.dim(n + 1), v.dim(n));
        eq.term(&w.d(n), ("f", n), &Matrix::identity(q(), v.dim(n)), false);
        eq.term(&Matrix::identity(q(), w.dim(n + 1)), ("f", n + 1), &v.d(n), true);
        count_sys.add_equation(eq);
    }
    let (null, _) = count_sys.nullspace();
    assert_eq!(z0, null.cols);
}

#[test]
fn internal_hom_h0_dual_numbers_pair() {
    // H^0(Hom(V, W)) for V = W = dual numbers, zero differential: all of
    // degree-0 maps, dimension 2 (diagonal blocks in degrees -1 and 0).
    let v = dual_numbers(q());
    let h = v.internal_hom(&v);
    let hh = h.cohomology();
    assert_eq!(hh.dim(0), 2);
}

#[test]
fn hom_tensor_adjunction_round_trip() {
    let f2 = Field::Fp(2);
    let z = two_term(f2, 1);
    let v = dual_numbers(f2);
    let w = two_term(f2, 0);
    let (to, from) = hom_tensor_adjunction(&z, &v, &w);
    // dimension equality degreewise
    for &n in to.source().dims().keys() {
        assert_eq!(to.source().dim(n), to.target().dim(n));
    }
    assert!(to.compose(&from).is_identity_map());
    assert!(from.compose(&to).is_identity_map());

    // V = k: currying is identity-shaped
    let unit = Complex::unit(q());
    let zq = two_term(q(), 1);
    let wq = dual_numbers(q());
    let (to, from) = hom_tensor_adjunction(&zq, &unit, &wq);
    assert!(to.compose(&from).is_identity_map());
    assert!(from.compose(&to).is_identity_map());
}

#[test]
fn braiding_and_evaluation_are_chain_maps() {
    let v = dual_numbers(q());
    let w = two_term(q(), 1);
    let b = braiding(&v, &w);
    let b2 = braiding(&w, &v);
    assert!(b2.compose(&b).is_identity_map());
    let _ev = evaluation(&v, &w);
}

#[test]
fn quasi_iso_detection() {
    let c = two_term(q(), 1);
    assert!(is_quasi_iso(&ChainMap::identity(&c)));
    // 0 -> C is a qis iff C acyclic
    let zero_to_acyclic =
        ChainMap::new(GradedMap::zero(&Complex::zero(q()), &c, 0)).unwrap();
    assert!(is_quasi_iso(&zero_to_acyclic));
    let d = dual_numbers(q());
    let zero_to_d = ChainMap::new(GradedMap::zero(&Complex::zero(q()), &d, 0)).unwrap();
    assert!(!is_quasi_iso(&zero_to_d));
    // the map (k -> k, d=1) -> 0 is a qis: cone is acyclic
    let to_zero = ChainMap::new(GradedMap::zero(&c, &Complex::zero(q()), 0)).unwrap();
    assert!(is_quasi_iso(&to_zero));
}

#[test]
fn homotopy_inverse_identity() {
    let c = dual_numbers(q());
    let id = ChainMap::identity(&c);
    let (g, h, k) = homotopy_inverse(&id).unwrap();
    assert!(g.is_identity_map());
    assert!(h.is_zero());
    assert!(k.is_zero());
}

#[test]
fn homotopy_inverse_retraction_and_contraction() {
    // inclusion H(C) -> C for C = dual-numbers ⊕ acyclic two-term
    let hpart = dual_numbers(q());
    let c = hpart.direct_sum(&two_term(q(), 1));
    let mut inc = GradedMap::zero(&hpart, &c, 0);
    for &n in hpart.dims().keys() {
        let m = Matrix::from_fn(q(), c.dim(n), hpart.dim(n), |r, cc| {
            if r == cc {
                q().one()
            } else {
                q().zero()
            }
        });
        inc.set_block(n, m);
    }
    let inc = ChainMap::new(inc).unwrap();
    assert!(is_quasi_iso(&inc));
    let (g, h, k) = homotopy_inverse(&inc).unwrap();
    // verify the homotopy equations exactly
    let gf = g.map().compose(inc.map());
    let left = gf.sub(&GradedMap::identity(&hpart));
    assert_eq!(left, h.differential());
    let fg = inc.map().compose(g.map());
    let right = fg.sub(&GradedMap::identity(&c));
    assert_eq!(right, k.differential());

    // acyclic source and target, f = 0
    let a = two_term(q(), 1);
    let f = ChainMap::new(GradedMap::zero(&a, &a, 0)).unwrap();
    let (_, h, k) = homotopy_inverse(&f).unwrap();
    let want = GradedMap::identity(&a).scale(&q().one().neg());
    assert_eq!(want, h.differential());
    assert_eq!(want, k.differential());
}
