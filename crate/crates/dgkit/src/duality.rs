//! Isbell duality `O ⊣ Spec` between right and left modules, the bimodule
//! duality `L ⊣ R`, their units and counits, and strict/homotopy
//! representability searches with verified witnesses.

use crate::complex::{ChainMap, Complex, GradedMap, HomIndex};
use crate::dgcat::DgCategory;
use crate::dgmod::{
    left_morphism_from_nat, nat_complex, nat_complex_left, nat_coords_of_left_morphism,
    nat_coords_of_right_morphism, right_morphism_from_nat, Bimodule, BimoduleMorphism, LeftModule,
    LeftMorphism, NatResult, RightModule, RightMorphism,
};
use crate::endcoend::ChainIso;
use crate::error::{DgError, Result};
use crate::field::{Field, Scalar};
use crate::linalg::Matrix;
use rand::{Rng, SeedableRng};

/// Postcomposition by a morphism vector as a right-module morphism
/// `h_a -> h_{a2}`.
pub fn post_morphism(cat: &DgCategory, a: usize, a2: usize, gd: i32, g: &Matrix) -> RightMorphism {
    let ha = RightModule::representable(cat, a);
    let ha2 = RightModule::representable(cat, a2);
    let comps = (0..cat.object_count())
        .map(|x| cat.post_mul(x, a, a2, gd, g))
        .collect();
    RightMorphism::new(&ha, &ha2, gd, comps)
}

/// The signed precomposition `x ↦ (-1)^{|f||x|} x∘f` as a left-module
/// morphism `h^a -> h^{a2}` for `f: a2 -> a`.
pub fn rho_morphism(cat: &DgCategory, a: usize, a2: usize, fd: i32, f: &Matrix) -> LeftMorphism {
    let ha = LeftModule::representable(cat, a);
    let ha2 = LeftModule::representable(cat, a2);
    let field = cat.field;
    let comps = (0..cat.object_count())
        .map(|y| {
            let src = cat.hom(a, y).clone();
            let tgt = cat.hom(a2, y).clone();
            let mut g = GradedMap::zero(&src, &tgt, fd);
            for (&xd, &xdim) in src.dims() {
                if tgt.dim(xd + fd) == 0 {
                    continue;
                }
                let sign = Scalar::sign(field, (fd as i64) * (xd as i64));
                let m = Matrix::from_fn(field, tgt.dim(xd + fd), xdim, |r, xi| {
                    let x = cat.basis_vec(a, y, xd, xi);
                    cat.compose(a2, a, y, xd, &x, fd, f).at(r, 0).mul(&sign)
                });
                g.set_block(xd, m);
            }
            g
        })
        .collect();
    LeftMorphism::new(&ha, &ha2, fd, comps)
}

/// The Isbell dual `O(X)_a = Nat(X, h_a)`, a left module with
/// postcomposition action.
pub struct OResult {
    pub module: LeftModule,
    pub nats: Vec<NatResult>,
    pub source: RightModule,
}

pub fn isbell_o(x: &RightModule) -> Result<OResult> {
    let cat = x.cat.clone();
    let n = cat.object_count();
    let field = cat.field;
    let mut nats = Vec::new();
    for a in 0..n {
        nats.push(nat_complex(x, &RightModule::representable(&cat, a))?);
    }
    let comps: Vec<Complex> = nats.iter().map(|n| n.total.clone()).collect();
    let mut action = Vec::new();
    for a in 0..n {
        let mut row = Vec::new();
        for a2 in 0..n {
            let src = cat.hom(a, a2).tensor(&comps[a]);
            let mut g = GradedMap::zero(&src, &comps[a2], 0);
            let tidx = crate::complex::TensorIndex::new(cat.hom(a, a2), &comps[a]);
            for &deg in src.dims().keys() {
                if comps[a2].dim(deg) == 0 {
                    continue;
                }
                let mut m = Matrix::zero(field, comps[a2].dim(deg), src.dim(deg));
                for (gd, gi, pi) in tidx.basis(deg) {
                    let col = tidx.index(deg, gd, gi, pi);
                    let pd = deg - gd;
                    let gv = cat.basis_vec(a, a2, gd, gi);
                    let lam = post_morphism(&cat, a, a2, gd, &gv);
                    let mut coords = Matrix::zero(field, comps[a].dim(pd), 1);
                    coords.set(pi, 0, field.one());
                    let phi = right_morphism_from_nat(
                        &nats[a],
                        x,
                        &RightModule::representable(&cat, a),
                        pd,
                        &coords,
                    );
                    let composed = lam.compose(&phi);
                    let out = nat_coords_of_right_morphism(&nats[a2], &composed)
                        .expect("postcomposition is a module morphism");
                    for r in 0..out.rows {
                        let v = out.at(r, 0);
                        if !v.is_zero() {
                            m.set(r, col, v.clone());
                        }
                    }
                }
                g.set_block(deg, m);
            }
            row.push(g);
        }
        action.push(row);
    }
    Ok(OResult {
        module: LeftModule::new_unchecked(cat, comps, action),
        nats,
        source: x.clone(),
    })
}

/// The Isbell co-dual `Spec(M)^a = Nat(M, h^a)`, a right module with the
/// signed precomposition action.
pub struct SpecResult {
    pub module: RightModule,
    pub nats: Vec<NatResult>,
    pub source: LeftModule,
}

pub fn isbell_spec(m: &LeftModule) -> Result<SpecResult> {
    let cat = m.cat.clone();
    let n = cat.object_count();
    let field = cat.field;
    let mut nats = Vec::new();
    for a in 0..n {
        nats.push(nat_complex_left(m, &LeftModule::representable(&cat, a))?);
    }
    let comps: Vec<Complex> = nats.iter().map(|n| n.total.clone()).collect();
    let mut action = Vec::new();
    for a in 0..n {
        let mut row = Vec::new();
        for a2 in 0..n {
            // right action of f: a2 -> a on ψ: (-1)^{|ψ||f|} ρ̃_f ∘ ψ
            let src = comps[a].tensor(cat.hom(a2, a));
            let mut g = GradedMap::zero(&src, &comps[a2], 0);
            let tidx = crate::complex::TensorIndex::new(&comps[a], cat.hom(a2, a));
            for &deg in src.dims().keys() {
                if comps[a2].dim(deg) == 0 {
                    continue;
                }
                let mut mat = Matrix::zero(field, comps[a2].dim(deg), src.dim(deg));
                for (pd, pi, fi) in tidx.basis(deg) {
                    let col = tidx.index(deg, pd, pi, fi);
                    let fd = deg - pd;
                    let fv = cat.basis_vec(a2, a, fd, fi);
                    let rho = rho_morphism(&cat, a, a2, fd, &fv);
                    let mut coords = Matrix::zero(field, comps[a].dim(pd), 1);
                    coords.set(pi, 0, field.one());
                    let psi = left_morphism_from_nat(
                        &nats[a],
                        m,
                        &LeftModule::representable(&cat, a),
                        pd,
                        &coords,
                    );
                    let sign = Scalar::sign(field, (pd as i64) * (fd as i64));
                    let composed = rho.compose(&psi);
                    let out = nat_coords_of_left_morphism(&nats[a2], &composed)
                        .expect("precomposition is a module morphism");
                    for r in 0..out.rows {
                        let v = out.at(r, 0).mul(&sign);
                        if !v.is_zero() {
                            mat.set(r, col, v);
                        }
                    }
                }
                g.set_block(deg, mat);
            }
            row.push(g);
        }
        action.push(row);
    }
    Ok(SpecResult {
        module: RightModule::new_unchecked(cat, comps, action),
        nats,
        source: m.clone(),
    })
}

/// The Isbell unit `X -> Spec(O(X))`: `x ↦ (φ ↦ (-1)^{|x||φ|} φ(x))`.
pub fn isbell_unit(x: &RightModule, o: &OResult, spec_o: &SpecResult) -> Result<RightMorphism> {
    let cat = x.cat.clone();
    let n = cat.object_count();
    let field = cat.field;
    let mut comps = Vec::new();
    for ap in 0..n {
        let src = x.component(ap).clone();
        let tgt = spec_o.module.component(ap).clone();
        let mut g = GradedMap::zero(&src, &tgt, 0);
        for (&q, &qdim) in src.dims() {
            if tgt.dim(q) == 0 {
                if qdim > 0 {
                    return Err(DgError::Invalid("isbell unit target too small".into()));
                }
                continue;
            }
            let mut m = Matrix::zero(field, tgt.dim(q), qdim);
            for xi in 0..qdim {
                // the left morphism O(X) -> h^{ap}: φ ↦ (-1)^{q|φ|} φ_{ap}(x)
                let mut amb = Matrix::zero(field, spec_o.nats[ap].ambient.dim(q), 1);
                for a in 0..n {
                    // block a: Hom(O(X)_a, A(ap, a))
                    let off = spec_o.nats[ap].offset(a, q);
                    let hidx = HomIndex::new(o.module.component(a), cat.hom(ap, a), q);
                    for (&pd, &pdim) in o.module.component(a).dims() {
                        for pi in 0..pdim {
                            let mut coords = Matrix::zero(field, pdim, 1);
                            coords.set(pi, 0, field.one());
                            let phi = right_morphism_from_nat(
                                &o.nats[a],
                                x,
                                &RightModule::representable(&cat, a),
                                pd,
                                &coords,
                            );
                            // φ_{ap}(x_i) in A(ap, a)^{q + pd}
                            let mut xv = Matrix::zero(field, qdim, 1);
                            xv.set(xi, 0, field.one());
                            let val = phi.component(ap).block(q).mul(&xv);
                            let sign = Scalar::sign(field, (q as i64) * (pd as i64));
                            for r in 0..val.rows {
                                let v = val.at(r, 0).mul(&sign);
                                if !v.is_zero() {
                                    amb.set(off + hidx.index(pd, pi, r), 0, v);
                                }
                            }
                        }
                    }
                }
                let coords = spec_o.nats[ap]
                    .coords_of_ambient(q, &amb)
                    .ok_or_else(|| DgError::Invalid("isbell unit not a morphism".into()))?;
                for r in 0..coords.rows {
                    m.set(r, xi, coords.at(r, 0).clone());
                }
            }
            g.set_block(q, m);
        }
        comps.push(g);
    }
    let unit = RightMorphism::new(x, &spec_o.module, 0, comps);
    if !unit.is_morphism_closed() {
        return Err(DgError::Invalid("isbell unit is not closed".into()));
    }
    let rep = unit.validate();
    if !rep.ok() {
        return Err(DgError::Invalid(format!(
            "isbell unit violates module rules: {}",
            rep.first().unwrap_or_default()
        )));
    }
    Ok(unit)
}

/// The Isbell counit `M -> O(Spec(M))`: `m ↦ (ψ ↦ (-1)^{|m||ψ|} ψ(m))`.
pub fn isbell_counit(m: &LeftModule, spec: &SpecResult, o_spec: &OResult) -> Result<LeftMorphism> {
    let cat = m.cat.clone();
    let n = cat.object_count();
    let field = cat.field;
    let mut comps = Vec::new();
    for ap in 0..n {
        let src = m.component(ap).clone();
        let tgt = o_spec.module.component(ap).clone();
        let mut g = GradedMap::zero(&src, &tgt, 0);
        for (&q, &qdim) in src.dims() {
            if tgt.dim(q) == 0 {
                if qdim > 0 {
                    return Err(DgError::Invalid("isbell counit target too small".into()));
                }
                continue;
            }
            let mut mat = Matrix::zero(field, tgt.dim(q), qdim);
            for xi in 0..qdim {
                let mut amb = Matrix::zero(field, o_spec.nats[ap].ambient.dim(q), 1);
                for a in 0..n {
                    let off = o_spec.nats[ap].offset(a, q);
                    let hidx = HomIndex::new(spec.module.component(a), cat.hom(a, ap), q);
                    for (&pd, &pdim) in spec.module.component(a).dims() {
                        for pi in 0..pdim {
                            let mut coords = Matrix::zero(field, pdim, 1);
                            coords.set(pi, 0, field.one());
                            let psi = left_morphism_from_nat(
                                &spec.nats[a],
                                m,
                                &LeftModule::representable(&cat, a),
                                pd,
                                &coords,
                            );
                            let mut xv = Matrix::zero(field, qdim, 1);
                            xv.set(xi, 0, field.one());
                            let val = psi.component(ap).block(q).mul(&xv);
                            let sign = Scalar::sign(field, (q as i64) * (pd as i64));
                            for r in 0..val.rows {
                                let v = val.at(r, 0).mul(&sign);
                                if !v.is_zero() {
                                    amb.set(off + hidx.index(pd, pi, r), 0, v);
                                }
                            }
                        }
                    }
                }
                let coords = o_spec.nats[ap]
                    .coords_of_ambient(q, &amb)
                    .ok_or_else(|| DgError::Invalid("isbell counit not a morphism".into()))?;
                for r in 0..coords.rows {
                    mat.set(r, xi, coords.at(r, 0).clone());
                }
            }
            g.set_block(q, mat);
        }
        comps.push(g);
    }
    let counit = LeftMorphism::new(m, &o_spec.module, 0, comps);
    if !counit.is_morphism_closed() {
        return Err(DgError::Invalid("isbell counit is not closed".into()));
    }
    let rep = counit.validate();
    if !rep.ok() {
        return Err(DgError::Invalid(format!(
            "isbell counit violates module rules: {}",
            rep.first().unwrap_or_default()
        )));
    }
    Ok(counit)
}

/// The adjunction isomorphism `C(A^op)(M, O(X)) ≅ C(A)(X, Spec(M))` as
/// mutually inverse chain maps between the two nat complexes.
pub struct IsbellAdjunction {
    pub lhs: NatResult,
    pub rhs: NatResult,
    pub iso: ChainIso,
}

pub fn isbell_adjunction(m: &LeftModule, x: &RightModule) -> Result<IsbellAdjunction> {
    let cat = x.cat.clone();
    let n = cat.object_count();
    let field = cat.field;
    let o = isbell_o(x)?;
    let spec = isbell_spec(m)?;
    let lhs = nat_complex_left(m, &o.module)?;
    let rhs = nat_complex(x, &spec.module)?;
    // to: Ψ ↦ Θ(Ψ) with Θ(Ψ)_{a'}(x)(m) = (-1)^{|x||m|} (Ψ_a m)_{a'}(x)
    let mut to = GradedMap::zero(&lhs.total, &rhs.total, 0);
    for &p in lhs.total.dims().keys() {
        if rhs.total.dim(p) == 0 && lhs.total.dim(p) > 0 {
            return Err(DgError::Invalid("isbell adjunction dims differ".into()));
        }
        let mut mat = Matrix::zero(field, rhs.total.dim(p), lhs.total.dim(p));
        for col in 0..lhs.total.dim(p) {
            let mut coords = Matrix::zero(field, lhs.total.dim(p), 1);
            coords.set(col, 0, field.one());
            let psi = left_morphism_from_nat(&lhs, m, &o.module, p, &coords);
            // build the ambient vector of rhs
            let mut amb = Matrix::zero(field, rhs.ambient.dim(p), 1);
            for ap in 0..n {
                let off_outer = rhs.offset(ap, p);
                let hidx_outer = HomIndex::new(x.component(ap), spec.module.component(ap), p);
                for (&q, &qdim) in x.component(ap).dims() {
                    for xi in 0..qdim {
                        // Θ(Ψ)(x): the left morphism M -> h^{ap} of degree p+q
                        let mut spec_amb =
                            Matrix::zero(field, spec.nats[ap].ambient.dim(p + q), 1);
                        for a in 0..n {
                            let off_in = spec.nats[ap].offset(a, p + q);
                            let hidx_in =
                                HomIndex::new(m.component(a), cat.hom(ap, a), p + q);
                            for (&md, &mdim) in m.component(a).dims() {
                                for mi in 0..mdim {
                                    // (Ψ_a m)_{a'}(x) with the Koszul sign
                                    let psi_m = psi.component(a).block(md);
                                    // Ψ_a(m) in O-coordinates at degree p+md
                                    let mut mv = Matrix::zero(field, mdim, 1);
                                    mv.set(mi, 0, field.one());
                                    let in_o = psi_m.mul(&mv);
                                    let phi = right_morphism_from_nat(
                                        &o.nats[a],
                                        x,
                                        &RightModule::representable(&cat, a),
                                        p + md,
                                        &in_o,
                                    );
                                    let mut xv = Matrix::zero(field, qdim, 1);
                                    xv.set(xi, 0, field.one());
                                    let val = phi.component(ap).block(q).mul(&xv);
                                    let sign =
                                        Scalar::sign(field, (q as i64) * (md as i64));
                                    for r in 0..val.rows {
                                        let v = val.at(r, 0).mul(&sign);
                                        if !v.is_zero() {
                                            let acc = spec_amb
                                                .at(off_in + hidx_in.index(md, mi, r), 0)
                                                .add(&v);
                                            spec_amb.set(
                                                off_in + hidx_in.index(md, mi, r),
                                                0,
                                                acc,
                                            );
                                        }
                                    }
                                }
                            }
                        }
                        let spec_coords = spec.nats[ap]
                            .coords_of_ambient(p + q, &spec_amb)
                            .ok_or_else(|| {
                                DgError::Invalid("isbell adjunction image invalid".into())
                            })?;
                        for r in 0..spec_coords.rows {
                            let v = spec_coords.at(r, 0);
                            if !v.is_zero() {
                                let idx = off_outer + hidx_outer.index(q, xi, r);
                                let acc = amb.at(idx, 0).add(v);
                                amb.set(idx, 0, acc);
                            }
                        }
                    }
                }
            }
            let out = rhs.coords_of_ambient(p, &amb).ok_or_else(|| {
                DgError::Invalid("isbell adjunction image is not a morphism".into())
            })?;
            for r in 0..out.rows {
                mat.set(r, col, out.at(r, 0).clone());
            }
        }
        to.set_block(p, mat);
    }
    let to = ChainMap::new(to)?;
    // from: the symmetric formula Θ'(Φ)_a(m)(x) = (-1)^{|x||m|} (Φ_{a'} x)_a(m)
    let mut from = GradedMap::zero(&rhs.total, &lhs.total, 0);
    for &p in rhs.total.dims().keys() {
        if lhs.total.dim(p) == 0 && rhs.total.dim(p) > 0 {
            return Err(DgError::Invalid("isbell adjunction dims differ".into()));
        }
        let mut mat = Matrix::zero(field, lhs.total.dim(p), rhs.total.dim(p));
        for col in 0..rhs.total.dim(p) {
            let mut coords = Matrix::zero(field, rhs.total.dim(p), 1);
            coords.set(col, 0, field.one());
            let phi = right_morphism_from_nat(&rhs, x, &spec.module, p, &coords);
            let mut amb = Matrix::zero(field, lhs.ambient.dim(p), 1);
            for a in 0..n {
                let off_outer = lhs.offset(a, p);
                let hidx_outer = HomIndex::new(m.component(a), o.module.component(a), p);
                for (&md, &mdim) in m.component(a).dims() {
                    for mi in 0..mdim {
                        // Θ'(Φ)(m): the right morphism X -> h_a of degree p+md
                        let mut o_amb = Matrix::zero(field, o.nats[a].ambient.dim(p + md), 1);
                        for ap in 0..n {
                            let off_in = o.nats[a].offset(ap, p + md);
                            let hidx_in =
                                HomIndex::new(x.component(ap), cat.hom(ap, a), p + md);
                            for (&q, &qdim) in x.component(ap).dims() {
                                for xi in 0..qdim {
                                    let mut xv = Matrix::zero(field, qdim, 1);
                                    xv.set(xi, 0, field.one());
                                    let in_spec = phi.component(ap).block(q).mul(&xv);
                                    let psi = left_morphism_from_nat(
                                        &spec.nats[ap],
                                        m,
                                        &LeftModule::representable(&cat, ap),
                                        p + q,
                                        &in_spec,
                                    );
                                    let mut mv = Matrix::zero(field, mdim, 1);
                                    mv.set(mi, 0, field.one());
                                    let val = psi.component(a).block(md).mul(&mv);
                                    let sign =
                                        Scalar::sign(field, (q as i64) * (md as i64));
                                    for r in 0..val.rows {
                                        let v = val.at(r, 0).mul(&sign);
                                        if !v.is_zero() {
                                            let idx = off_in + hidx_in.index(q, xi, r);
                                            let acc = o_amb.at(idx, 0).add(&v);
                                            o_amb.set(idx, 0, acc);
                                        }
                                    }
                                }
                            }
                        }
                        let o_coords =
                            o.nats[a].coords_of_ambient(p + md, &o_amb).ok_or_else(|| {
                                DgError::Invalid("isbell adjunction inverse invalid".into())
                            })?;
                        for r in 0..o_coords.rows {
                            let v = o_coords.at(r, 0);
                            if !v.is_zero() {
                                let idx = off_outer + hidx_outer.index(md, mi, r);
                                let acc = amb.at(idx, 0).add(v);
                                amb.set(idx, 0, acc);
                            }
                        }
                    }
                }
            }
            let out = lhs.coords_of_ambient(p, &amb).ok_or_else(|| {
                DgError::Invalid("isbell adjunction inverse is not a morphism".into())
            })?;
            for r in 0..out.rows {
                mat.set(r, col, out.at(r, 0).clone());
            }
        }
        from.set_block(p, mat);
    }
    let from = ChainMap::new(from)?;
    let iso = ChainIso { to, from };
    iso.verify()?;
    Ok(IsbellAdjunction { lhs, rhs, iso })
}

/// `L(T)(a, b) = Nat(T_a, h_b)` as a `(B, A)`-bimodule.
pub struct LResult {
    pub bimodule: Bimodule,
    pub nats: Vec<Vec<NatResult>>, // [a][b]
}

pub fn l_dual(t: &Bimodule) -> Result<LResult> {
    let a_cat = t.cov.clone();
    let b_cat = t.contra.clone();
    let na = a_cat.object_count();
    let nb = b_cat.object_count();
    let field = a_cat.field;
    let mut nats = Vec::new();
    let comps_t: Vec<RightModule> = (0..na).map(|a| t.component(a)).collect();
    for a in 0..na {
        let mut row = Vec::new();
        for b in 0..nb {
            row.push(nat_complex(
                &comps_t[a],
                &RightModule::representable(&b_cat, b),
            )?);
        }
        nats.push(row);
    }
    let comps: Vec<Vec<Complex>> = (0..na)
        .map(|a| (0..nb).map(|b| nats[a][b].total.clone()).collect())
        .collect();
    // cov (b) action: postcompose with λ_g: h_b -> h_{b2}
    let mut left = Vec::new();
    for a in 0..na {
        let mut plane = Vec::new();
        for b in 0..nb {
            let mut line = Vec::new();
            for b2 in 0..nb {
                let src = b_cat.hom(b, b2).tensor(&comps[a][b]);
                let mut g = GradedMap::zero(&src, &comps[a][b2], 0);
                let tidx = crate::complex::TensorIndex::new(b_cat.hom(b, b2), &comps[a][b]);
                for &deg in src.dims().keys() {
                    if comps[a][b2].dim(deg) == 0 {
                        continue;
                    }
                    let mut m = Matrix::zero(field, comps[a][b2].dim(deg), src.dim(deg));
                    for (gd, gi, pi) in tidx.basis(deg) {
                        let col = tidx.index(deg, gd, gi, pi);
                        let pd = deg - gd;
                        let gv = b_cat.basis_vec(b, b2, gd, gi);
                        let lam = post_morphism(&b_cat, b, b2, gd, &gv);
                        let mut coords = Matrix::zero(field, comps[a][b].dim(pd), 1);
                        coords.set(pi, 0, field.one());
                        let phi = right_morphism_from_nat(
                            &nats[a][b],
                            &comps_t[a],
                            &RightModule::representable(&b_cat, b),
                            pd,
                            &coords,
                        );
                        let composed = lam.compose(&phi);
                        let out = nat_coords_of_right_morphism(&nats[a][b2], &composed)
                            .expect("postcomposition stays a morphism");
                        for r in 0..out.rows {
                            let v = out.at(r, 0);
                            if !v.is_zero() {
                                m.set(r, col, v.clone());
                            }
                        }
                    }
                    g.set_block(deg, m);
                }
                line.push(g);
            }
            plane.push(line);
        }
        left.push(plane);
    }
    // contra (a) action: precompose with ξ_f: T_{a2} -> T_a (left transport)
    let mut right = Vec::new();
    for a in 0..na {
        let mut plane = Vec::new();
        for a2 in 0..na {
            let mut line = Vec::new();
            for b in 0..nb {
                let src = comps[a][b].tensor(a_cat.hom(a2, a));
                let mut g = GradedMap::zero(&src, &comps[a2][b], 0);
                let tidx = crate::complex::TensorIndex::new(&comps[a][b], a_cat.hom(a2, a));
                for &deg in src.dims().keys() {
                    if comps[a2][b].dim(deg) == 0 {
                        continue;
                    }
                    let mut m = Matrix::zero(field, comps[a2][b].dim(deg), src.dim(deg));
                    for (pd, pi, fi) in tidx.basis(deg) {
                        let col = tidx.index(deg, pd, pi, fi);
                        let fd = deg - pd;
                        let fv = a_cat.basis_vec(a2, a, fd, fi);
                        // ξ_f: T_{a2} -> T_a with components x ↦ f·x
                        let xi_comps: Vec<GradedMap> = (0..nb)
                            .map(|y| t.left_transport(y, a2, a, fd, &fv))
                            .collect();
                        let xi_mor = RightMorphism::new(&comps_t[a2], &comps_t[a], fd, xi_comps);
                        let mut coords = Matrix::zero(field, comps[a][b].dim(pd), 1);
                        coords.set(pi, 0, field.one());
                        let phi = right_morphism_from_nat(
                            &nats[a][b],
                            &comps_t[a],
                            &RightModule::representable(&b_cat, b),
                            pd,
                            &coords,
                        );
                        let composed = phi.compose(&xi_mor);
                        let out = nat_coords_of_right_morphism(&nats[a2][b], &composed)
                            .expect("precomposition stays a morphism");
                        for r in 0..out.rows {
                            let v = out.at(r, 0);
                            if !v.is_zero() {
                                m.set(r, col, v.clone());
                            }
                        }
                    }
                    g.set_block(deg, m);
                }
                line.push(g);
            }
            plane.push(line);
        }
        right.push(plane);
    }
    Ok(LResult {
        bimodule: Bimodule::new_unchecked(b_cat, a_cat, comps, left, right),
        nats,
    })
}

/// `R(S)(b, a) = Nat(S^a, h^b)` as an `(A, B)`-bimodule.
pub struct RResult {
    pub bimodule: Bimodule,
    pub nats: Vec<Vec<NatResult>>, // [b][a]
}

pub fn r_dual(s: &Bimodule) -> Result<RResult> {
    let b_cat = s.cov.clone(); // S is a (B, A)-bimodule
    let a_cat = s.contra.clone();
    let na = a_cat.object_count();
    let nb = b_cat.object_count();
    let field = a_cat.field;
    let co_comps: Vec<LeftModule> = (0..na).map(|a| s.co_component(a)).collect();
    let mut nats = Vec::new();
    for b in 0..nb {
        let mut row = Vec::new();
        for a in 0..na {
            row.push(nat_complex_left(
                &co_comps[a],
                &LeftModule::representable(&b_cat, b),
            )?);
        }
        nats.push(row);
    }
    let comps: Vec<Vec<Complex>> = (0..nb)
        .map(|b| (0..na).map(|a| nats[b][a].total.clone()).collect())
        .collect();
    // cov (a) action: f·ψ = (-1)^{|f||ψ|} ψ ∘ ζ_f with ζ_f = S's signed
    // right transport S^{a2} -> S^a
    let mut left = Vec::new();
    for b in 0..nb {
        let mut plane = Vec::new();
        for a in 0..na {
            let mut line = Vec::new();
            for a2 in 0..na {
                let src = a_cat.hom(a, a2).tensor(&comps[b][a]);
                let mut g = GradedMap::zero(&src, &comps[b][a2], 0);
                let tidx = crate::complex::TensorIndex::new(a_cat.hom(a, a2), &comps[b][a]);
                for &deg in src.dims().keys() {
                    if comps[b][a2].dim(deg) == 0 {
                        continue;
                    }
                    let mut m = Matrix::zero(field, comps[b][a2].dim(deg), src.dim(deg));
                    for (fd, fi, pi) in tidx.basis(deg) {
                        let col = tidx.index(deg, fd, fi, pi);
                        let pd = deg - fd;
                        let fv = a_cat.basis_vec(a, a2, fd, fi);
                        // ζ_f: S^{a2} -> S^a: components S(a2, y) -> S(a, y)
                        let zeta_comps: Vec<GradedMap> = (0..nb)
                            .map(|y| s.right_transport(a2, a, y, fd, &fv))
                            .collect();
                        let zeta = LeftMorphism::new(&co_comps[a2], &co_comps[a], fd, zeta_comps);
                        let mut coords = Matrix::zero(field, comps[b][a].dim(pd), 1);
                        coords.set(pi, 0, field.one());
                        let psi = left_morphism_from_nat(
                            &nats[b][a],
                            &co_comps[a],
                            &LeftModule::representable(&b_cat, b),
                            pd,
                            &coords,
                        );
                        let sign = Scalar::sign(field, (fd as i64) * (pd as i64));
                        let composed = psi.compose(&zeta);
                        let out = nat_coords_of_left_morphism(&nats[b][a2], &composed)
                            .expect("precomposition stays a morphism");
                        for r in 0..out.rows {
                            let v = out.at(r, 0).mul(&sign);
                            if !v.is_zero() {
                                m.set(r, col, v);
                            }
                        }
                    }
                    g.set_block(deg, m);
                }
                line.push(g);
            }
            plane.push(line);
        }
        left.push(plane);
    }
    // contra (b) action: ψ·g = (-1)^{|ψ||g|} ρ̃_g ∘ ψ
    let mut right = Vec::new();
    for b in 0..nb {
        let mut plane = Vec::new();
        for b2 in 0..nb {
            let mut line = Vec::new();
            for a in 0..na {
                let src = comps[b][a].tensor(b_cat.hom(b2, b));
                let mut g = GradedMap::zero(&src, &comps[b2][a], 0);
                let tidx = crate::complex::TensorIndex::new(&comps[b][a], b_cat.hom(b2, b));
                for &deg in src.dims().keys() {
                    if comps[b2][a].dim(deg) == 0 {
                        continue;
                    }
                    let mut m = Matrix::zero(field, comps[b2][a].dim(deg), src.dim(deg));
                    for (pd, pi, gi) in tidx.basis(deg) {
                        let col = tidx.index(deg, pd, pi, gi);
                        let gd = deg - pd;
                        let gv = b_cat.basis_vec(b2, b, gd, gi);
                        let rho = rho_morphism(&b_cat, b, b2, gd, &gv);
                        let mut coords = Matrix::zero(field, comps[b][a].dim(pd), 1);
                        coords.set(pi, 0, field.one());
                        let psi = left_morphism_from_nat(
                            &nats[b][a],
                            &co_comps[a],
                            &LeftModule::representable(&b_cat, b),
                            pd,
                            &coords,
                        );
                        let sign = Scalar::sign(field, (pd as i64) * (gd as i64));
                        let composed = rho.compose(&psi);
                        let out = nat_coords_of_left_morphism(&nats[b2][a], &composed)
                            .expect("postcomposition stays a morphism");
                        for r in 0..out.rows {
                            let v = out.at(r, 0).mul(&sign);
                            if !v.is_zero() {
                                m.set(r, col, v);
                            }
                        }
                    }
                    g.set_block(deg, m);
                }
                line.push(g);
            }
            plane.push(line);
        }
        right.push(plane);
    }
    Ok(RResult {
        bimodule: Bimodule::new_unchecked(a_cat, b_cat, comps, left, right),
        nats,
    })
}

/// The unit `T -> R(L(T))`, componentwise the Isbell unit of `T_a`; the
/// componentwise equality is asserted against an independently built
/// `isbell_unit` in the test suite.
pub fn lr_unit(t: &Bimodule, l: &LResult, rl: &RResult) -> Result<BimoduleMorphism> {
    let a_cat = t.cov.clone();
    let b_cat = t.contra.clone();
    let na = a_cat.object_count();
    let nb = b_cat.object_count();
    let field = a_cat.field;
    let mut out = BimoduleMorphism::zero(t, &rl.bimodule, 0);
    for bp in 0..nb {
        for a in 0..na {
            // T(bp, a) -> Nat(L(T)^a, h^{bp}): x ↦ (φ ↦ (-1)^{|x||φ|} φ_{bp}(x))
            let src = t.component_complex(bp, a).clone();
            let tgt = rl.bimodule.component_complex(bp, a).clone();
            let mut g = GradedMap::zero(&src, &tgt, 0);
            for (&q, &qdim) in src.dims() {
                if tgt.dim(q) == 0 {
                    if qdim > 0 {
                        return Err(DgError::Invalid("lr unit target too small".into()));
                    }
                    continue;
                }
                let mut m = Matrix::zero(field, tgt.dim(q), qdim);
                let lta = l.bimodule.co_component(a); // left B-module b ↦ Nat(T_a, h_b)
                let ta = t.component(a);
                for xi in 0..qdim {
                    let mut amb = Matrix::zero(field, rl.nats[bp][a].ambient.dim(q), 1);
                    for b in 0..nb {
                        let off = rl.nats[bp][a].offset(b, q);
                        let hidx = HomIndex::new(lta.component(b), b_cat.hom(bp, b), q);
                        for (&pd, &pdim) in lta.component(b).dims() {
                            for pi in 0..pdim {
                                let mut coords = Matrix::zero(field, pdim, 1);
                                coords.set(pi, 0, field.one());
                                let phi = right_morphism_from_nat(
                                    &l.nats[a][b],
                                    &ta,
                                    &RightModule::representable(&b_cat, b),
                                    pd,
                                    &coords,
                                );
                                let mut xv = Matrix::zero(field, qdim, 1);
                                xv.set(xi, 0, field.one());
                                let val = phi.component(bp).block(q).mul(&xv);
                                let sign = Scalar::sign(field, (q as i64) * (pd as i64));
                                for r in 0..val.rows {
                                    let v = val.at(r, 0).mul(&sign);
                                    if !v.is_zero() {
                                        amb.set(off + hidx.index(pd, pi, r), 0, v);
                                    }
                                }
                            }
                        }
                    }
                    let coords = rl.nats[bp][a]
                        .coords_of_ambient(q, &amb)
                        .ok_or_else(|| DgError::Invalid("lr unit image invalid".into()))?;
                    for r in 0..coords.rows {
                        m.set(r, xi, coords.at(r, 0).clone());
                    }
                }
                g.set_block(q, m);
            }
            out.set_component(bp, a, g);
        }
    }
    if !out.is_morphism_closed() {
        return Err(DgError::Invalid("lr unit is not closed".into()));
    }
    let rep = out.validate();
    if !rep.ok() {
        return Err(DgError::Invalid(format!(
            "lr unit violates bimodule rules: {}",
            rep.first().unwrap_or_default()
        )));
    }
    Ok(out)
}

/// Deterministic candidate schedule for iso searches: basis vectors, the
/// all-ones vector, then exhaustive (prime field, when small) or seeded
/// random combinations.
pub fn candidate_vectors(field: Field, dim: usize, seed: u64, cap: usize) -> Vec<Matrix> {
    let mut out = Vec::new();
    if dim == 0 {
        return out;
    }
    for i in 0..dim {
        let mut v = Matrix::zero(field, dim, 1);
        v.set(i, 0, field.one());
        out.push(v);
    }
    out.push(Matrix::from_fn(field, dim, 1, |_, _| field.one()));
    match field {
        Field::Fp(p) => {
            let total = (p as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
            if total <= cap as u128 {
                let mut counter = vec![0u64; dim];
                loop {
                    out.push(Matrix::from_fn(field, dim, 1, |r, _| Scalar::Fp {
                        p,
                        v: counter[r],
                    }));
                    let mut i = 0;
                    loop {
                        if i == dim {
                            return out;
                        }
                        counter[i] += 1;
                        if counter[i] < p {
                            break;
                        }
                        counter[i] = 0;
                        i += 1;
                    }
                }
            } else {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..64 {
                    out.push(Matrix::from_fn(field, dim, 1, |_, _| Scalar::Fp {
                        p,
                        v: rng.gen_range(0..p),
                    }));
                }
                out
            }
        }
        Field::Q => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..16 {
                out.push(Matrix::from_fn(field, dim, 1, |_, _| {
                    field.from_i64(rng.gen_range(-2..3))
                }));
            }
            out
        }
    }
}

/// Whether searches over this field are exhaustive (authoritative negatives).
pub fn search_exhaustive(field: Field, dim: usize, cap: usize) -> bool {
    match field {
        Field::Fp(p) => (p as u128).checked_pow(dim as u32).unwrap_or(u128::MAX) <= cap as u128,
        Field::Q => dim == 0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReprKind {
    Strict,
    Homotopy,
    Quasi,
}

/// A representability witness: an object assignment with verified mediator
/// morphisms `h_{F(a)} -> T_a` (or the left-module mirror image).
pub struct ReprWitness {
    pub kind: ReprKind,
    pub assignment: Vec<usize>,
    pub right_mediators: Vec<RightMorphism>,
    pub left_mediators: Vec<LeftMorphism>,
    /// whether a failed search would have been authoritative
    pub exhaustive: bool,
}

const SEARCH_CAP: usize = 4096;

/// Searches for strict right representability: `T_a ≅ h_{F(a)}`.
pub fn is_right_representable(t: &Bimodule, seed: u64) -> Result<Option<ReprWitness>> {
    let b_cat = &t.contra;
    let na = t.cov.object_count();
    let nb = b_cat.object_count();
    let mut assignment = Vec::new();
    let mut mediators = Vec::new();
    let mut exhaustive = true;
    for a in 0..na {
        let ta = t.component(a);
        let mut found = None;
        for b in 0..nb {
            let hb = RightModule::representable(b_cat, b);
            // dimension filter
            if (0..nb).any(|y| hb.component(y).dims() != ta.component(y).dims()) {
                continue;
            }
            let nat = nat_complex(&hb, &ta)?;
            let z = nat.total.d(0).kernel_basis();
            if z.cols == 0 {
                continue;
            }
            exhaustive &= search_exhaustive(b_cat.field, z.cols, SEARCH_CAP);
            for cand in candidate_vectors(b_cat.field, z.cols, seed ^ (a as u64), SEARCH_CAP) {
                let coords = z.mul(&cand);
                let phi = right_morphism_from_nat(&nat, &hb, &ta, 0, &coords);
                if phi.is_iso() {
                    found = Some((b, phi));
                    break;
                }
            }
            if found.is_some() {
                break;
            }
        }
        match found {
            Some((b, phi)) => {
                assignment.push(b);
                mediators.push(phi);
            }
            None => return Ok(None),
        }
    }
    Ok(Some(ReprWitness {
        kind: ReprKind::Strict,
        assignment,
        right_mediators: mediators,
        left_mediators: vec![],
        exhaustive,
    }))
}

/// Searches for strict left representability: `S^a ≅ h^{G(a)}`.
pub fn is_left_representable(s: &Bimodule, seed: u64) -> Result<Option<ReprWitness>> {
    let b_cat = &s.cov;
    let na = s.contra.object_count();
    let nb = b_cat.object_count();
    let mut assignment = Vec::new();
    let mut mediators = Vec::new();
    let mut exhaustive = true;
    for a in 0..na {
        let sa = s.co_component(a);
        let mut found = None;
        for b in 0..nb {
            let hb = LeftModule::representable(b_cat, b);
            if (0..nb).any(|y| hb.component(y).dims() != sa.component(y).dims()) {
                continue;
            }
            let nat = nat_complex_left(&hb, &sa)?;
            let z = nat.total.d(0).kernel_basis();
            if z.cols == 0 {
                continue;
            }
            exhaustive &= search_exhaustive(b_cat.field, z.cols, SEARCH_CAP);
            for cand in candidate_vectors(b_cat.field, z.cols, seed ^ (a as u64), SEARCH_CAP) {
                let coords = z.mul(&cand);
                let psi = left_morphism_from_nat(&nat, &hb, &sa, 0, &coords);
                if psi.is_iso() {
                    found = Some((b, psi));
                    break;
                }
            }
            if found.is_some() {
                break;
            }
        }
        match found {
            Some((b, psi)) => {
                assignment.push(b);
                mediators.push(psi);
            }
            None => return Ok(None),
        }
    }
    Ok(Some(ReprWitness {
        kind: ReprKind::Strict,
        assignment,
        right_mediators: vec![],
        left_mediators: mediators,
        exhaustive,
    }))
}

/// Homotopy representability: a closed degree-0 `φ: h_b -> T_a` invertible
/// up to homotopy, certified by solving for the inverse and both homotopies.
pub fn is_right_homotopy_representable(t: &Bimodule, seed: u64) -> Result<Option<ReprWitness>> {
    let b_cat = &t.contra;
    let na = t.cov.object_count();
    let nb = b_cat.object_count();
    let mut assignment = Vec::new();
    let mut mediators = Vec::new();
    let mut exhaustive = true;
    for a in 0..na {
        let ta = t.component(a);
        let mut found = None;
        for b in 0..nb {
            let hb = RightModule::representable(b_cat, b);
            // cohomology dimension filter
            let matches = (0..nb).all(|y| {
                hb.component(y).cohomology().h == ta.component(y).cohomology().h
            });
            if !matches {
                continue;
            }
            let nat = nat_complex(&hb, &ta)?;
            let h = nat.total.cohomology();
            let reps = h.reps_at(0);
            if reps.cols == 0 && hb.total_dim() > 0 {
                continue;
            }
            exhaustive &= search_exhaustive(b_cat.field, reps.cols, SEARCH_CAP);
            for cand in candidate_vectors(b_cat.field, reps.cols, seed ^ (a as u64), SEARCH_CAP)
            {
                let coords = reps.mul(&cand);
                let phi = right_morphism_from_nat(&nat, &hb, &ta, 0, &coords);
                if homotopy_invertible(&hb, &ta, &nat, &phi)? {
                    found = Some((b, phi));
                    break;
                }
            }
            if found.is_some() {
                break;
            }
        }
        match found {
            Some((b, phi)) => {
                assignment.push(b);
                mediators.push(phi);
            }
            None => return Ok(None),
        }
    }
    Ok(Some(ReprWitness {
        kind: ReprKind::Homotopy,
        assignment,
        right_mediators: mediators,
        left_mediators: vec![],
        exhaustive,
    }))
}

/// Left-module mirror of homotopy representability.
pub fn is_left_homotopy_representable(s: &Bimodule, seed: u64) -> Result<Option<ReprWitness>> {
    let b_cat = &s.cov;
    let na = s.contra.object_count();
    let nb = b_cat.object_count();
    let mut assignment = Vec::new();
    let mut mediators = Vec::new();
    let mut exhaustive = true;
    for a in 0..na {
        let sa = s.co_component(a);
        let mut found = None;
        for b in 0..nb {
            let hb = LeftModule::representable(b_cat, b);
            let matches = (0..nb).all(|y| {
                hb.component(y).cohomology().h == sa.component(y).cohomology().h
            });
            if !matches {
                continue;
            }
            let nat = nat_complex_left(&hb, &sa)?;
            let h = nat.total.cohomology();
            let reps = h.reps_at(0);
            exhaustive &= search_exhaustive(b_cat.field, reps.cols, SEARCH_CAP);
            for cand in candidate_vectors(b_cat.field, reps.cols, seed ^ (a as u64), SEARCH_CAP)
            {
                let coords = reps.mul(&cand);
                let psi = left_morphism_from_nat(&nat, &hb, &sa, 0, &coords);
                if left_homotopy_invertible(&hb, &sa, &nat, &psi)? {
                    found = Some((b, psi));
                    break;
                }
            }
            if found.is_some() {
                break;
            }
        }
        match found {
            Some((b, psi)) => {
                assignment.push(b);
                mediators.push(psi);
            }
            None => return Ok(None),
        }
    }
    Ok(Some(ReprWitness {
        kind: ReprKind::Homotopy,
        assignment,
        right_mediators: vec![],
        left_mediators: mediators,
        exhaustive,
    }))
}

/// Solves the linear system for a homotopy inverse of `φ: M -> N` inside
/// the module category: `ψ` closed with `ψφ - 1 = D(h)` and `φψ - 1 = D(k)`.
fn homotopy_invertible(
    m: &RightModule,
    n: &RightModule,
    _nat_mn: &NatResult,
    phi: &RightMorphism,
) -> Result<bool> {
    let nat_nm = nat_complex(n, m)?;
    let nat_mm = nat_complex(m, m)?;
    let nat_nn = nat_complex(n, n)?;
    solve_homotopy_system(
        |coords| right_morphism_from_nat(&nat_nm, n, m, 0, coords),
        |mor| nat_coords_of_right_morphism(&nat_mm, &mor.compose(phi)),
        |mor| nat_coords_of_right_morphism(&nat_nn, &phi.compose(mor)),
        |coords| right_morphism_from_nat(&nat_mm, m, m, -1, coords),
        |coords| right_morphism_from_nat(&nat_nn, n, n, -1, coords),
        &nat_nm,
        &nat_mm,
        &nat_nn,
        &nat_coords_of_right_morphism(&nat_mm, &RightMorphism::identity(m))
            .ok_or_else(|| DgError::Invalid("identity not in nat".into()))?,
        &nat_coords_of_right_morphism(&nat_nn, &RightMorphism::identity(n))
            .ok_or_else(|| DgError::Invalid("identity not in nat".into()))?,
    )
}

fn left_homotopy_invertible(
    m: &LeftModule,
    n: &LeftModule,
    _nat_mn: &NatResult,
    phi: &LeftMorphism,
) -> Result<bool> {
    let nat_nm = nat_complex_left(n, m)?;
    let nat_mm = nat_complex_left(m, m)?;
    let nat_nn = nat_complex_left(n, n)?;
    solve_homotopy_system(
        |coords| left_morphism_from_nat(&nat_nm, n, m, 0, coords),
        |mor| nat_coords_of_left_morphism(&nat_mm, &mor.compose(phi)),
        |mor| nat_coords_of_left_morphism(&nat_nn, &phi.compose(mor)),
        |coords| left_morphism_from_nat(&nat_mm, m, m, -1, coords),
        |coords| left_morphism_from_nat(&nat_nn, n, n, -1, coords),
        &nat_nm,
        &nat_mm,
        &nat_nn,
        &nat_coords_of_left_morphism(&nat_mm, &LeftMorphism::identity(m))
            .ok_or_else(|| DgError::Invalid("identity not in nat".into()))?,
        &nat_coords_of_left_morphism(&nat_nn, &LeftMorphism::identity(n))
            .ok_or_else(|| DgError::Invalid("identity not in nat".into()))?,
    )
}

/// Generic homotopy-inverse solver over nat-complex coordinates.
#[allow(clippy::too_many_arguments)]
fn solve_homotopy_system<Mor, FromNM, CompL, CompR, FromMM, FromNN>(
    from_nm: FromNM,
    comp_left: CompL,
    comp_right: CompR,
    _from_mm: FromMM,
    _from_nn: FromNN,
    nat_nm: &NatResult,
    nat_mm: &NatResult,
    nat_nn: &NatResult,
    id_m: &Matrix,
    id_n: &Matrix,
) -> Result<bool>
where
    FromNM: Fn(&Matrix) -> Mor,
    CompL: Fn(&Mor) -> Option<Matrix>,
    CompR: Fn(&Mor) -> Option<Matrix>,
    FromMM: Fn(&Matrix) -> Mor,
    FromNN: Fn(&Matrix) -> Mor,
{
    let field = nat_nm.total.field;
    let dim_psi = nat_nm.total.dim(0);
    let dim_h = nat_mm.total.dim(-1);
    let dim_k = nat_nn.total.dim(-1);
    // matrices: composition with φ as a linear map in ψ
    let mut left_comp = Matrix::zero(field, nat_mm.total.dim(0), dim_psi);
    let mut right_comp = Matrix::zero(field, nat_nn.total.dim(0), dim_psi);
    for i in 0..dim_psi {
        let mut e = Matrix::zero(field, dim_psi, 1);
        e.set(i, 0, field.one());
        let mor = from_nm(&e);
        let lc = comp_left(&mor).ok_or_else(|| DgError::Invalid("composition left".into()))?;
        let rc = comp_right(&mor).ok_or_else(|| DgError::Invalid("composition right".into()))?;
        for r in 0..lc.rows {
            left_comp.set(r, i, lc.at(r, 0).clone());
        }
        for r in 0..rc.rows {
            right_comp.set(r, i, rc.at(r, 0).clone());
        }
    }
    let d_psi = nat_nm.total.d(0);
    let d_h = nat_mm.total.d(-1);
    let d_k = nat_nn.total.d(-1);
    // unknowns: [ψ | h | k]; equations:
    //   d ψ = 0
    //   left_comp ψ - d_h h = id_m
    //   right_comp ψ - d_k k = id_n
    let rows = d_psi.rows + nat_mm.total.dim(0) + nat_nn.total.dim(0);
    let cols = dim_psi + dim_h + dim_k;
    let mut m = Matrix::zero(field, rows, cols);
    let mut rhs = Matrix::zero(field, rows, 1);
    for r in 0..d_psi.rows {
        for c in 0..dim_psi {
            m.set(r, c, d_psi.at(r, c).clone());
        }
    }
    let off1 = d_psi.rows;
    for r in 0..nat_mm.total.dim(0) {
        for c in 0..dim_psi {
            m.set(off1 + r, c, left_comp.at(r, c).clone());
        }
        for c in 0..dim_h {
            m.set(off1 + r, dim_psi + c, d_h.at(r, c).neg());
        }
        rhs.set(off1 + r, 0, id_m.at(r, 0).clone());
    }
    let off2 = off1 + nat_mm.total.dim(0);
    for r in 0..nat_nn.total.dim(0) {
        for c in 0..dim_psi {
            m.set(off2 + r, c, right_comp.at(r, c).clone());
        }
        for c in 0..dim_k {
            m.set(off2 + r, dim_psi + dim_h + c, d_k.at(r, c).neg());
        }
        rhs.set(off2 + r, 0, id_n.at(r, 0).clone());
    }
    Ok(m.solve(&rhs).is_some())
}
