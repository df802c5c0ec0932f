//! Ends and coends of complex-valued bimodules: the end as the kernel
//! subcomplex of the wedge conditions, the coend as the cokernel of the
//! relation map `f ⊗ x ↦ fx - (-1)^{|f||x|} xf`, their functoriality, the
//! bimodule composition `⋄`, unit and associativity witnesses, ends with
//! parameters, Fubini, and the Yoneda/co-Yoneda witnesses.

use crate::complex::{ChainMap, Complex, GradedMap, HomIndex, TensorIndex};
use crate::dgcat::DgCategory;
use crate::dgmod::{
    quotient_complex,
    subcomplex, Bimodule, BimoduleMorphism, LeftModule, RightModule,
};
use crate::error::{DgError, Result};
use crate::field::Scalar;
use crate::linalg::Matrix;

/// Generating morphisms for wedge constraints: a spanning set of each hom
/// modulo identities and decomposables, with a closure certificate. When the
/// closure check fails the full basis is used instead.
pub struct Generators {
    /// per (a, a2): list of (degree, coordinate vector)
    pub items: Vec<Vec<Vec<(i32, Matrix)>>>,
    pub pruned: bool,
}

pub fn generating_morphisms(cat: &DgCategory) -> Generators {
    let n = cat.object_count();
    let field = cat.field;
    // identity span per object, decomposable span per pair and degree
    let mut spans: Vec<Vec<std::collections::BTreeMap<i32, Matrix>>> =
        vec![vec![std::collections::BTreeMap::new(); n]; n];
    for a in 0..n {
        for b in 0..n {
            for (&deg, &_dim) in cat.hom(a, b).dims() {
                let mut cols: Vec<Matrix> = Vec::new();
                if a == b && deg == 0 {
                    cols.push(cat.id_vec(a).clone());
                }
                // composites of non-identity pieces through every midpoint
                for m in 0..n {
                    for (&gd, &gdim) in cat.hom(m, b).dims() {
                        let fd = deg - gd;
                        if cat.hom(a, m).dim(fd) == 0 {
                            continue;
                        }
                        for gi in 0..gdim {
                            if m == b && gd == 0 {
                                // skip pure identity directions by reducing
                                // against the identity span later; here keep
                                // all, the closure check is authoritative.
                            }
                            let g = cat.basis_vec(m, b, gd, gi);
                            for fi in 0..cat.hom(a, m).dim(fd) {
                                let f = cat.basis_vec(a, m, fd, fi);
                                // exclude composites where either factor is
                                // (a multiple of) an identity
                                let g_is_id = m == b && gd == 0 && is_multiple(&g, cat.id_vec(b));
                                let f_is_id = a == m && fd == 0 && is_multiple(&f, cat.id_vec(a));
                                if g_is_id || f_is_id {
                                    continue;
                                }
                                let c = cat.compose(a, m, b, gd, &g, fd, &f);
                                if !c.is_zero() {
                                    cols.push(c);
                                }
                            }
                        }
                    }
                }
                if !cols.is_empty() {
                    let mut m = cols.remove(0);
                    for c in cols {
                        m = m.hstack(&c);
                    }
                    spans[a][b].insert(deg, m);
                }
            }
        }
    }
    // generators: complement basis of hom / span
    let mut items: Vec<Vec<Vec<(i32, Matrix)>>> = vec![vec![Vec::new(); n]; n];
    for a in 0..n {
        for b in 0..n {
            for (&deg, &dim) in cat.hom(a, b).dims() {
                let span = spans[a][b]
                    .get(&deg)
                    .cloned()
                    .unwrap_or_else(|| Matrix::zero(field, dim, 0));
                let mut current = span.clone();
                for i in 0..dim {
                    let e = cat.basis_vec(a, b, deg, i);
                    let trial = current.hstack(&e);
                    if trial.rank() == current.rank() + 1 {
                        items[a][b].push((deg, e));
                        current = trial;
                    }
                }
            }
        }
    }
    // closure check: generated subalgebra (with identities) spans every hom
    let mut closed: Vec<Vec<std::collections::BTreeMap<i32, Matrix>>> =
        vec![vec![std::collections::BTreeMap::new(); n]; n];
    for a in 0..n {
        for b in 0..n {
            for (deg, v) in &items[a][b] {
                push_col(&mut closed[a][b], *deg, v.clone(), field);
            }
        }
        push_col(&mut closed[a][a], 0, cat.id_vec(a).clone(), field);
    }
    for _ in 0..8 {
        let mut grew = false;
        for a in 0..n {
            for m in 0..n {
                for b in 0..n {
                    let left: Vec<(i32, Matrix)> = flatten(&closed[m][b]);
                    let right: Vec<(i32, Matrix)> = flatten(&closed[a][m]);
                    for (gd, g) in &left {
                        for (fd, f) in &right {
                            let c = cat.compose(a, m, b, *gd, g, *fd, f);
                            if !c.is_zero() && push_col(&mut closed[a][b], gd + fd, c, field) {
                                grew = true;
                            }
                        }
                    }
                }
            }
        }
        if !grew {
            break;
        }
    }
    let mut complete = true;
    for a in 0..n {
        for b in 0..n {
            for (&deg, &dim) in cat.hom(a, b).dims() {
                let have = closed[a][b].get(&deg).map_or(0, |m| m.rank());
                if have != dim {
                    complete = false;
                }
            }
        }
    }
    if complete {
        Generators { items, pruned: true }
    } else {
        // fall back to the full basis
        let mut items: Vec<Vec<Vec<(i32, Matrix)>>> = vec![vec![Vec::new(); n]; n];
        for a in 0..n {
            for b in 0..n {
                for (&deg, &dim) in cat.hom(a, b).dims() {
                    for i in 0..dim {
                        items[a][b].push((deg, cat.basis_vec(a, b, deg, i)));
                    }
                }
            }
        }
        Generators {
            items,
            pruned: false,
        }
    }
}

/// The full basis of every hom as a (non-pruned) constraint set.
pub fn all_morphisms(cat: &DgCategory) -> Generators {
    let n = cat.object_count();
    let mut items: Vec<Vec<Vec<(i32, Matrix)>>> = vec![vec![Vec::new(); n]; n];
    for a in 0..n {
        for b in 0..n {
            for (&deg, &dim) in cat.hom(a, b).dims() {
                for i in 0..dim {
                    items[a][b].push((deg, cat.basis_vec(a, b, deg, i)));
                }
            }
        }
    }
    Generators {
        items,
        pruned: false,
    }
}

fn is_multiple(v: &Matrix, w: &Matrix) -> bool {
    let stacked = w.hstack(v);
    stacked.rank() <= w.rank()
}

fn push_col(
    map: &mut std::collections::BTreeMap<i32, Matrix>,
    deg: i32,
    v: Matrix,
    field: crate::field::Field,
) -> bool {
    let entry = map
        .entry(deg)
        .or_insert_with(|| Matrix::zero(field, v.rows, 0));
    let trial = entry.hstack(&v);
    if trial.rank() > entry.rank() {
        *entry = trial;
        true
    } else {
        false
    }
}

fn flatten(map: &std::collections::BTreeMap<i32, Matrix>) -> Vec<(i32, Matrix)> {
    let mut out = Vec::new();
    for (&deg, m) in map {
        for c in 0..m.cols {
            out.push((deg, m.column(c)));
        }
    }
    out
}

/// The end of a square bimodule: the subcomplex of `⊕_A F(A,A)` cut out by
/// `f φ_A = (-1)^{|f||φ|} φ_{A'} f` over a generating set of morphisms.
pub struct EndResult {
    pub total: Complex,
    pub ambient: Complex,
    pub embed: ChainMap,
    pub diag: Vec<Complex>,
}

impl EndResult {
    pub fn offset(&self, a: usize, p: i32) -> usize {
        self.diag[..a].iter().map(|c| c.dim(p)).sum()
    }

    /// ε_A as a chain map `total -> F(A,A)`.
    pub fn projection(&self, a: usize) -> ChainMap {
        let field = self.total.field;
        let mut g = GradedMap::zero(&self.total, &self.diag[a], 0);
        for &p in self.total.dims().keys() {
            if self.diag[a].dim(p) == 0 {
                continue;
            }
            let off = self.offset(a, p);
            let emb = self.embed.block(p);
            let m = Matrix::from_fn(field, self.diag[a].dim(p), self.total.dim(p), |r, c| {
                emb.at(off + r, c).clone()
            });
            g.set_block(p, m);
        }
        ChainMap::new(g).expect("end projection is closed")
    }
}

fn square_check(f: &Bimodule) -> Result<()> {
    if f.cov != f.contra {
        return Err(DgError::Shape(
            "ends and coends need a bimodule over (A, A)".into(),
        ));
    }
    Ok(())
}

pub fn end_bimodule(f: &Bimodule, gens: &Generators) -> Result<EndResult> {
    square_check(f)?;
    let cat = &f.cov;
    let n = cat.object_count();
    let field = cat.field;
    let diag: Vec<Complex> = (0..n).map(|a| f.component_complex(a, a).clone()).collect();
    let ambient = diag
        .iter()
        .skip(1)
        .fold(diag[0].clone(), |acc, c| acc.direct_sum(c));
    let offset = |a: usize, p: i32| -> usize { diag[..a].iter().map(|c| c.dim(p)).sum() };
    let constraint = |p: i32| -> Matrix {
        let mut rows: Vec<Matrix> = Vec::new();
        for a in 0..n {
            for a2 in 0..n {
                for (fd, fv) in &gens.items[a][a2] {
                    // f φ_a - (-1)^{|f| p} φ_{a2} f = 0 in F(a, a2)
                    let lam = f.left_transport(a, a, a2, *fd, fv);
                    let rho = plain_right(f, a2, a, a2, *fd, fv);
                    let target_dim = f.component_complex(a, a2).dim(p + fd);
                    if target_dim == 0 {
                        continue;
                    }
                    let sign = Scalar::sign(field, (*fd as i64) * (p as i64));
                    let mut row = Matrix::zero(field, target_dim, ambient.dim(p));
                    let lb = lam.block(p);
                    for c in 0..diag[a].dim(p) {
                        for r in 0..target_dim {
                            row.set(r, offset(a, p) + c, lb.at(r, c).clone());
                        }
                    }
                    let rb = rho.block(p).scale(&sign);
                    for c in 0..diag[a2].dim(p) {
                        for r in 0..target_dim {
                            let v = row.at(r, offset(a2, p) + c).sub(rb.at(r, c));
                            row.set(r, offset(a2, p) + c, v);
                        }
                    }
                    rows.push(row);
                }
            }
        }
        if rows.is_empty() {
            Matrix::zero(field, 0, ambient.dim(p))
        } else {
            let mut all = rows.remove(0);
            for r in rows {
                all = all.vstack(&r);
            }
            all
        }
    };
    let (total, embed) = subcomplex(&ambient, constraint);
    Ok(EndResult {
        total,
        ambient,
        embed,
        diag,
    })
}

fn plain_right(t: &Bimodule, b: usize, b2: usize, a: usize, gd: i32, g: &Matrix) -> GradedMap {
    let field = t.cov.field;
    let src = t.component_complex(b, a).clone();
    let tgt = t.component_complex(b2, a).clone();
    let mut out = GradedMap::zero(&src, &tgt, gd);
    for &n in src.dims().keys() {
        if tgt.dim(n + gd) == 0 {
            continue;
        }
        let m = Matrix::from_fn(field, tgt.dim(n + gd), src.dim(n), |r, xi| {
            let mut x = Matrix::zero(field, src.dim(n), 1);
            x.set(xi, 0, field.one());
            t.act_right(b, b2, a, n, &x, gd, g).at(r, 0).clone()
        });
        out.set_block(n, m);
    }
    out
}

/// The coend: cokernel of `f ⊗ x ↦ fx - (-1)^{|f||x|} xf` out of
/// `⊕_{A1,A2} hom(A2,A1) ⊗ F(A1,A2)`.
pub struct CoendResult {
    pub total: Complex,
    pub ambient: Complex,
    pub proj: ChainMap,
    pub section: GradedMap,
    pub relation_source: Complex,
    pub relation: GradedMap,
    pub diag: Vec<Complex>,
}

impl CoendResult {
    pub fn offset(&self, a: usize, p: i32) -> usize {
        self.diag[..a].iter().map(|c| c.dim(p)).sum()
    }

    /// η_A as a chain map `F(A,A) -> total`.
    pub fn injection(&self, a: usize) -> ChainMap {
        let field = self.total.field;
        let mut g = GradedMap::zero(&self.diag[a], &self.total, 0);
        for &p in self.diag[a].dims().keys() {
            if self.total.dim(p) == 0 {
                continue;
            }
            let off = self.offset(a, p);
            let pr = self.proj.block(p);
            let m = Matrix::from_fn(field, self.total.dim(p), self.diag[a].dim(p), |r, c| {
                pr.at(r, off + c).clone()
            });
            g.set_block(p, m);
        }
        ChainMap::new(g).expect("coend injection is closed")
    }

    /// Class of an element of `F(a, a)` in the coend.
    pub fn class_of(&self, a: usize, deg: i32, v: &Matrix) -> Matrix {
        self.injection(a).block(deg).mul(v)
    }
}

pub fn coend_bimodule(f: &Bimodule) -> Result<CoendResult> {
    square_check(f)?;
    let cat = &f.cov;
    let n = cat.object_count();
    let field = cat.field;
    let diag: Vec<Complex> = (0..n).map(|a| f.component_complex(a, a).clone()).collect();
    let ambient = diag
        .iter()
        .skip(1)
        .fold(diag[0].clone(), |acc, c| acc.direct_sum(c));
    let offset = |a: usize, p: i32| -> usize { diag[..a].iter().map(|c| c.dim(p)).sum() };
    // relation source: ⊕_{a1, a2} hom(a2, a1) ⊗ F(a1, a2)
    let mut pieces = Vec::new();
    for a1 in 0..n {
        for a2 in 0..n {
            pieces.push((a1, a2, cat.hom(a2, a1).tensor(f.component_complex(a1, a2))));
        }
    }
    let relation_source = pieces
        .iter()
        .skip(1)
        .fold(pieces[0].2.clone(), |acc, (_, _, c)| acc.direct_sum(c));
    let mut relation = GradedMap::zero(&relation_source, &ambient, 0);
    for &p in relation_source.dims().keys() {
        if ambient.dim(p) == 0 {
            continue;
        }
        let mut m = Matrix::zero(field, ambient.dim(p), relation_source.dim(p));
        let mut col_off = 0;
        for (a1, a2, piece) in &pieces {
            let tidx = TensorIndex::new(cat.hom(*a2, *a1), f.component_complex(*a1, *a2));
            for (fd, fi, xi) in tidx.basis(p) {
                let col = col_off + tidx.index(p, fd, fi, xi);
                let xd = p - fd;
                let fv = cat.basis_vec(*a2, *a1, fd, fi);
                let mut x = Matrix::zero(field, f.component_complex(*a1, *a2).dim(xd), 1);
                x.set(xi, 0, field.one());
                // f x in F(a1, a1)
                let fx = f.act_left(*a1, *a2, *a1, fd, &fv, xd, &x);
                for r in 0..fx.rows {
                    let v = m.at(offset(*a1, p) + r, col).add(fx.at(r, 0));
                    m.set(offset(*a1, p) + r, col, v);
                }
                // -(-1)^{|f||x|} x f in F(a2, a2)
                let xf = f.act_right(*a1, *a2, *a2, xd, &x, fd, &fv);
                let sign = Scalar::sign(field, (fd as i64) * (xd as i64)).neg();
                for r in 0..xf.rows {
                    let v = m
                        .at(offset(*a2, p) + r, col)
                        .add(&xf.at(r, 0).mul(&sign));
                    m.set(offset(*a2, p) + r, col, v);
                }
            }
            col_off += piece.dim(p);
        }
        relation.set_block(p, m);
    }
    assert!(
        relation.is_closed(),
        "coend relation map is a chain map"
    );
    let (total, proj, section) = quotient_complex(&ambient, &relation);
    Ok(CoendResult {
        total,
        ambient,
        proj,
        section,
        relation_source,
        relation,
        diag,
    })
}

/// Functoriality of ends: the unique map commuting with all projections.
pub fn end_map(
    phi: &BimoduleMorphism,
    src: &EndResult,
    tgt: &EndResult,
) -> Result<GradedMap> {
    let n = phi.source.cov.object_count();
    let field = phi.source.cov.field;
    // ambient map ⊕_a φ_(a,a)
    let mut amb = GradedMap::zero(&src.ambient, &tgt.ambient, phi.degree);
    for &p in src.ambient.dims().keys() {
        if tgt.ambient.dim(p + phi.degree) == 0 {
            continue;
        }
        let mut m = Matrix::zero(field, tgt.ambient.dim(p + phi.degree), src.ambient.dim(p));
        for a in 0..n {
            let block = phi.component(a, a).block(p);
            for c in 0..src.diag[a].dim(p) {
                for r in 0..tgt.diag[a].dim(p + phi.degree) {
                    m.set(
                        tgt.offset(a, p + phi.degree) + r,
                        src.offset(a, p) + c,
                        block.at(r, c).clone(),
                    );
                }
            }
        }
        amb.set_block(p, m);
    }
    let composed = amb.compose(src.embed.map());
    // factor through the target embedding
    let mut out = GradedMap::zero(&src.total, &tgt.total, phi.degree);
    for &p in src.total.dims().keys() {
        if tgt.total.dim(p + phi.degree) == 0 {
            if !composed.block(p).is_zero() {
                return Err(DgError::Invalid(
                    "end_map image does not satisfy the wedge condition".into(),
                ));
            }
            continue;
        }
        let sol = tgt
            .embed
            .block(p + phi.degree)
            .solve(&composed.block(p))
            .ok_or_else(|| {
                DgError::Invalid("end_map image does not satisfy the wedge condition".into())
            })?;
        out.set_block(p, sol);
    }
    Ok(out)
}

/// Functoriality of coends, with a well-definedness assertion.
pub fn coend_map(
    phi: &BimoduleMorphism,
    src: &CoendResult,
    tgt: &CoendResult,
) -> Result<GradedMap> {
    let n = phi.source.cov.object_count();
    let field = phi.source.cov.field;
    let mut amb = GradedMap::zero(&src.ambient, &tgt.ambient, phi.degree);
    for &p in src.ambient.dims().keys() {
        if tgt.ambient.dim(p + phi.degree) == 0 {
            continue;
        }
        let mut m = Matrix::zero(field, tgt.ambient.dim(p + phi.degree), src.ambient.dim(p));
        for a in 0..n {
            let block = phi.component(a, a).block(p);
            for c in 0..src.diag[a].dim(p) {
                for r in 0..tgt.diag[a].dim(p + phi.degree) {
                    m.set(
                        tgt.offset(a, p + phi.degree) + r,
                        src.offset(a, p) + c,
                        block.at(r, c).clone(),
                    );
                }
            }
        }
        amb.set_block(p, m);
    }
    // well-definedness: the ambient map sends relations into relations
    let check = tgt.proj.map().compose(&amb).compose(&src.relation);
    if !check.is_zero() {
        return Err(DgError::Invalid(
            "coend_map does not descend to the quotient".into(),
        ));
    }
    Ok(tgt.proj.map().compose(&amb).compose(&src.section))
}

/// The inner integrand of `G ⋄ F` at a fixed pair: `M(b1) ⊗ N(b2)` for a
/// right module `M` and a left module `N` over the same middle category.
pub fn tensor_integrand(m: &RightModule, n: &LeftModule) -> Result<Bimodule> {
    if m.cat != n.cat {
        return Err(DgError::Shape("tensor integrand base mismatch".into()));
    }
    let cat = &m.cat;
    let k = cat.object_count();
    let field = cat.field;
    let comps: Vec<Vec<Complex>> = (0..k)
        .map(|b1| {
            (0..k)
                .map(|b2| m.component(b1).tensor(n.component(b2)))
                .collect()
        })
        .collect();
    // left (cov b2) action: u·(x ⊗ y) = (-1)^{|u||x|} x ⊗ (u·y)
    let mut left = Vec::new();
    for b1 in 0..k {
        let mut plane = Vec::new();
        for b2 in 0..k {
            let mut line = Vec::new();
            for b2p in 0..k {
                let src = cat.hom(b2, b2p).tensor(&comps[b1][b2]);
                let mut g = GradedMap::zero(&src, &comps[b1][b2p], 0);
                let tidx = TensorIndex::new(cat.hom(b2, b2p), &comps[b1][b2]);
                let inner = TensorIndex::new(m.component(b1), n.component(b2));
                let tgt_idx = TensorIndex::new(m.component(b1), n.component(b2p));
                for &deg in src.dims().keys() {
                    if comps[b1][b2p].dim(deg) == 0 {
                        continue;
                    }
                    let mut mat = Matrix::zero(field, comps[b1][b2p].dim(deg), src.dim(deg));
                    for (ud, ui, zi) in tidx.basis(deg) {
                        let col = tidx.index(deg, ud, ui, zi);
                        let (xd, xi, yi) = inner.decompose(deg - ud, zi);
                        let yd = deg - ud - xd;
                        let u = cat.basis_vec(b2, b2p, ud, ui);
                        let mut y = Matrix::zero(field, n.component(b2).dim(yd), 1);
                        y.set(yi, 0, field.one());
                        let uy = n.act(b2, b2p, ud, &u, yd, &y);
                        let sign = Scalar::sign(field, (ud as i64) * (xd as i64));
                        for r in 0..uy.rows {
                            let coeff = uy.at(r, 0).mul(&sign);
                            if !coeff.is_zero() {
                                let row = tgt_idx.index(deg, xd, xi, r);
                                mat.set(row, col, coeff);
                            }
                        }
                    }
                    g.set_block(deg, mat);
                }
                line.push(g);
            }
            plane.push(line);
        }
        left.push(plane);
    }
    // right (contra b1) action: (x ⊗ y)·u = (-1)^{|u||y|} (x·u) ⊗ y
    let mut right = Vec::new();
    for b1 in 0..k {
        let mut plane = Vec::new();
        for b1p in 0..k {
            let mut line = Vec::new();
            for b2 in 0..k {
                let src = comps[b1][b2].tensor(cat.hom(b1p, b1));
                let mut g = GradedMap::zero(&src, &comps[b1p][b2], 0);
                let tidx = TensorIndex::new(&comps[b1][b2], cat.hom(b1p, b1));
                let inner = TensorIndex::new(m.component(b1), n.component(b2));
                let tgt_idx = TensorIndex::new(m.component(b1p), n.component(b2));
                for &deg in src.dims().keys() {
                    if comps[b1p][b2].dim(deg) == 0 {
                        continue;
                    }
                    let mut mat = Matrix::zero(field, comps[b1p][b2].dim(deg), src.dim(deg));
                    for (zd, zi, ui) in tidx.basis(deg) {
                        let col = tidx.index(deg, zd, zi, ui);
                        let ud = deg - zd;
                        let (xd, xi, yi) = inner.decompose(zd, zi);
                        let yd = zd - xd;
                        let u = cat.basis_vec(b1p, b1, ud, ui);
                        let mut x = Matrix::zero(field, m.component(b1).dim(xd), 1);
                        x.set(xi, 0, field.one());
                        let xu = m.act(b1, b1p, xd, &x, ud, &u);
                        let sign = Scalar::sign(field, (ud as i64) * (yd as i64));
                        for r in 0..xu.rows {
                            let coeff = xu.at(r, 0).mul(&sign);
                            if !coeff.is_zero() {
                                let row = tgt_idx.index(deg, xd + ud, r, yi);
                                mat.set(row, col, coeff);
                            }
                        }
                    }
                    g.set_block(deg, mat);
                }
                line.push(g);
            }
            plane.push(line);
        }
        right.push(plane);
    }
    Ok(Bimodule::new_unchecked(
        cat.clone(),
        cat.clone(),
        comps,
        left,
        right,
    ))
}

/// The composition `G ⋄ F` with per-pair coend data retained.
pub struct ComposeResult {
    pub total: Bimodule,
    pub coends: Vec<Vec<CoendResult>>, // [c][a]
}

impl ComposeResult {
    /// Class of a pure tensor `x ⊗ y` with `x` in `F(b, a)` and `y` in
    /// `G(c, b)`, inside `(G ⋄ F)(c, a)`.
    pub fn class_of_pair(
        &self,
        f: &Bimodule,
        g: &Bimodule,
        c: usize,
        a: usize,
        b: usize,
        xd: i32,
        x: &Matrix,
        yd: i32,
        y: &Matrix,
    ) -> Matrix {
        let field = f.cov.field;
        let tidx = TensorIndex::new(f.component_complex(b, a), g.component_complex(c, b));
        let mut v = Matrix::zero(
            field,
            f.component_complex(b, a)
                .tensor(g.component_complex(c, b))
                .dim(xd + yd),
            1,
        );
        for xi in 0..x.rows {
            for yi in 0..y.rows {
                let coeff = x.at(xi, 0).mul(y.at(yi, 0));
                if !coeff.is_zero() {
                    v.set(tidx.index(xd + yd, xd, xi, yi), 0, coeff);
                }
            }
        }
        self.coends[c][a].class_of(b, xd + yd, &v)
    }
}

/// `(G ⋄ F)(c, a) = ∫^B F(B, a) ⊗ G(c, B)` with outer actions induced on
/// the quotients (their descent is asserted).
pub fn compose(g: &Bimodule, f: &Bimodule) -> Result<ComposeResult> {
    if f.contra != g.cov {
        return Err(DgError::Shape("compose: middle categories differ".into()));
    }
    let a_cat = f.cov.clone();
    let c_cat = g.contra.clone();
    let na = a_cat.object_count();
    let nc = c_cat.object_count();
    let field = a_cat.field;
    let mut coends: Vec<Vec<CoendResult>> = Vec::new();
    let mut integrands: Vec<Vec<Bimodule>> = Vec::new();
    for c in 0..nc {
        let mut row = Vec::new();
        let mut row_i = Vec::new();
        for a in 0..na {
            let integrand = tensor_integrand(&f.component(a), &g.co_component(c))?;
            let ce = coend_bimodule(&integrand)?;
            row.push(ce);
            row_i.push(integrand);
        }
        coends.push(row);
        integrands.push(row_i);
    }
    let comps: Vec<Vec<Complex>> = (0..nc)
        .map(|c| (0..na).map(|a| coends[c][a].total.clone()).collect())
        .collect();
    let _k = f.contra.object_count();
    // outer left action of a_cat: on the F-factor, no sign
    let mut left = Vec::new();
    for c in 0..nc {
        let mut plane = Vec::new();
        for a in 0..na {
            let mut line = Vec::new();
            for a2 in 0..na {
                let src = a_cat.hom(a, a2).tensor(&comps[c][a]);
                let mut gm = GradedMap::zero(&src, &comps[c][a2], 0);
                let tidx = TensorIndex::new(a_cat.hom(a, a2), &comps[c][a]);
                for &deg in src.dims().keys() {
                    if comps[c][a2].dim(deg) == 0 {
                        continue;
                    }
                    let mut mat = Matrix::zero(field, comps[c][a2].dim(deg), src.dim(deg));
                    for (ud, ui, wi) in tidx.basis(deg) {
                        let col = tidx.index(deg, ud, ui, wi);
                        let u = a_cat.basis_vec(a, a2, ud, ui);
                        let wd = deg - ud;
                        let mut w = Matrix::zero(field, comps[c][a].dim(wd), 1);
                        w.set(wi, 0, field.one());
                        // lift, act on the F part, re-project
                        let lifted = coends[c][a].section.block(wd).mul(&w);
                        let acted = act_on_f_part(f, g, c, a, a2, ud, &u, wd, &lifted, &coends[c][a], &coends[c][a2]);
                        let out = coends[c][a2].proj.block(wd + ud).mul(&acted);
                        for r in 0..out.rows {
                            let coeff = out.at(r, 0);
                            if !coeff.is_zero() {
                                mat.set(r, col, coeff.clone());
                            }
                        }
                    }
                    gm.set_block(deg, mat);
                }
                line.push(gm);
            }
            plane.push(line);
        }
        left.push(plane);
    }
    // outer right action of c_cat: on the G-factor, no sign
    let mut right = Vec::new();
    for c in 0..nc {
        let mut plane = Vec::new();
        for c2 in 0..nc {
            let mut line = Vec::new();
            for a in 0..na {
                let src = comps[c][a].tensor(c_cat.hom(c2, c));
                let mut gm = GradedMap::zero(&src, &comps[c2][a], 0);
                let tidx = TensorIndex::new(&comps[c][a], c_cat.hom(c2, c));
                for &deg in src.dims().keys() {
                    if comps[c2][a].dim(deg) == 0 {
                        continue;
                    }
                    let mut mat = Matrix::zero(field, comps[c2][a].dim(deg), src.dim(deg));
                    for (wd, wi, ui) in tidx.basis(deg) {
                        let col = tidx.index(deg, wd, wi, ui);
                        let ud = deg - wd;
                        let u = c_cat.basis_vec(c2, c, ud, ui);
                        let mut w = Matrix::zero(field, comps[c][a].dim(wd), 1);
                        w.set(wi, 0, field.one());
                        let lifted = coends[c][a].section.block(wd).mul(&w);
                        let acted = act_on_g_part(f, g, c, c2, a, wd, &lifted, ud, &u);
                        let out = coends[c2][a].proj.block(wd + ud).mul(&acted);
                        for r in 0..out.rows {
                            let coeff = out.at(r, 0);
                            if !coeff.is_zero() {
                                mat.set(r, col, coeff.clone());
                            }
                        }
                    }
                    gm.set_block(deg, mat);
                }
                line.push(gm);
            }
            plane.push(line);
        }
        right.push(plane);
    }
    let total = Bimodule::new_unchecked(a_cat, c_cat, comps, left, right);
    // descent sanity: the outer actions must kill relation classes; this is
    // implied by validate() on the result, which callers run in tests.
    let _ = integrands;
    Ok(ComposeResult { total, coends })
}

/// Applies `u·(x ⊗ y) = (u x) ⊗ y` on `⊕_B F(B,a) ⊗ G(c,B)` coordinates.
fn act_on_f_part(
    f: &Bimodule,
    g: &Bimodule,
    c: usize,
    a: usize,
    a2: usize,
    ud: i32,
    u: &Matrix,
    wd: i32,
    ambient: &Matrix,
    src_ce: &CoendResult,
    tgt_ce: &CoendResult,
) -> Matrix {
    let field = f.cov.field;
    let k = f.contra.object_count();
    let mut out = Matrix::zero(field, tgt_ce.ambient.dim(wd + ud), 1);
    for b in 0..k {
        let sidx = TensorIndex::new(f.component_complex(b, a), g.component_complex(c, b));
        let tidx = TensorIndex::new(f.component_complex(b, a2), g.component_complex(c, b));
        let s_off = src_ce.offset(b, wd);
        let t_off = tgt_ce.offset(b, wd + ud);
        for (xd, xi, yi) in sidx.basis(wd) {
            let coeff = ambient.at(s_off + sidx.index(wd, xd, xi, yi), 0);
            if coeff.is_zero() {
                continue;
            }
            let mut x = Matrix::zero(field, f.component_complex(b, a).dim(xd), 1);
            x.set(xi, 0, field.one());
            let ux = f.act_left(b, a, a2, ud, u, xd, &x);
            for r in 0..ux.rows {
                let v = ux.at(r, 0).mul(coeff);
                if !v.is_zero() {
                    let row = t_off + tidx.index(wd + ud, xd + ud, r, yi);
                    let acc = out.at(row, 0).add(&v);
                    out.set(row, 0, acc);
                }
            }
        }
    }
    out
}

/// Applies `(x ⊗ y)·u = x ⊗ (y u)` on ambient coordinates.
fn act_on_g_part(
    f: &Bimodule,
    g: &Bimodule,
    c: usize,
    c2: usize,
    a: usize,
    wd: i32,
    ambient: &Matrix,
    ud: i32,
    u: &Matrix,
) -> Matrix {
    let field = f.cov.field;
    let k = f.contra.object_count();
    let mut dims_out = 0;
    for b in 0..k {
        dims_out += f
            .component_complex(b, a)
            .tensor(g.component_complex(c2, b))
            .dim(wd + ud);
    }
    let mut out = Matrix::zero(field, dims_out, 1);
    let mut s_off = 0;
    let mut t_offs = Vec::new();
    let mut acc_off = 0;
    for b in 0..k {
        t_offs.push(acc_off);
        acc_off += f
            .component_complex(b, a)
            .tensor(g.component_complex(c2, b))
            .dim(wd + ud);
    }
    for b in 0..k {
        let sidx = TensorIndex::new(f.component_complex(b, a), g.component_complex(c, b));
        let tidx = TensorIndex::new(f.component_complex(b, a), g.component_complex(c2, b));
        let block_dim = f
            .component_complex(b, a)
            .tensor(g.component_complex(c, b))
            .dim(wd);
        for (xd, xi, yi) in sidx.basis(wd) {
            let coeff = ambient.at(s_off + sidx.index(wd, xd, xi, yi), 0);
            if coeff.is_zero() {
                continue;
            }
            let yd = wd - xd;
            let mut y = Matrix::zero(field, g.component_complex(c, b).dim(yd), 1);
            y.set(yi, 0, field.one());
            let yu = g.act_right(c, c2, b, yd, &y, ud, u);
            for r in 0..yu.rows {
                let v = yu.at(r, 0).mul(coeff);
                if !v.is_zero() {
                    let row = t_offs[b] + tidx.index(wd + ud, xd, xi, r);
                    let acc = out.at(row, 0).add(&v);
                    out.set(row, 0, acc);
                }
            }
        }
        s_off += block_dim;
    }
    out
}

/// A pair of mutually inverse closed degree-0 bimodule morphisms.
pub struct BimoduleIso {
    pub to: BimoduleMorphism,
    pub from: BimoduleMorphism,
}

impl BimoduleIso {
    pub fn verify(&self) -> Result<()> {
        let fwd = self.to.compose(&self.from);
        let bwd = self.from.compose(&self.to);
        if fwd != BimoduleMorphism::identity(&self.from.source)
            || bwd != BimoduleMorphism::identity(&self.to.source)
        {
            return Err(DgError::Invalid("round-trip is not the identity".into()));
        }
        if !self.to.is_morphism_closed() || !self.from.is_morphism_closed() {
            return Err(DgError::Invalid("iso legs are not closed".into()));
        }
        let v = self.to.validate();
        if !v.ok() {
            return Err(DgError::Invalid(format!(
                "iso leg violates module rules: {}",
                v.first().unwrap_or_default()
            )));
        }
        let v = self.from.validate();
        if !v.ok() {
            return Err(DgError::Invalid(format!(
                "iso leg violates module rules: {}",
                v.first().unwrap_or_default()
            )));
        }
        Ok(())
    }
}

/// Co-Yoneda unit `h_B ⋄ F ≅ F`: the cowedge maps are right actions.
pub fn unit_left(f: &Bimodule) -> Result<(ComposeResult, BimoduleIso)> {
    let diag = Bimodule::diagonal(&f.contra);
    let composed = compose(&diag, f)?;
    let field = f.cov.field;
    let na = f.cov.object_count();
    let nb = f.contra.object_count();
    // to: [x ⊗ g] ↦ x·g
    let mut to = BimoduleMorphism::zero(&composed.total, f, 0);
    for bp in 0..nb {
        for a in 0..na {
            let ce = &composed.coends[bp][a];
            let mut gmap = GradedMap::zero(&ce.total, f.component_complex(bp, a), 0);
            for &deg in ce.total.dims().keys() {
                if f.component_complex(bp, a).dim(deg) == 0 {
                    continue;
                }
                let mut big = Matrix::zero(field, f.component_complex(bp, a).dim(deg), ce.ambient.dim(deg));
                for b in 0..nb {
                    let sidx = TensorIndex::new(f.component_complex(b, a), f.contra.hom(bp, b));
                    let off = ce.offset(b, deg);
                    for (xd, xi, gi) in sidx.basis(deg) {
                        let gd = deg - xd;
                        let gv = f.contra.basis_vec(bp, b, gd, gi);
                        let mut x = Matrix::zero(field, f.component_complex(b, a).dim(xd), 1);
                        x.set(xi, 0, field.one());
                        let xg = f.act_right(b, bp, a, xd, &x, gd, &gv);
                        for r in 0..xg.rows {
                            let v = big.at(r, off + sidx.index(deg, xd, xi, gi)).add(xg.at(r, 0));
                            big.set(r, off + sidx.index(deg, xd, xi, gi), v);
                        }
                    }
                }
                // well-definedness: the big map kills relations
                let rel = ce.relation.block(deg);
                if !big.mul(&rel).is_zero() {
                    return Err(DgError::Invalid(
                        "unit_left cowedge does not kill relations".into(),
                    ));
                }
                gmap.set_block(deg, big.mul(&ce.section.block(deg)));
            }
            to.set_component(bp, a, gmap);
        }
    }
    // from: x ↦ η_{b'}(x ⊗ 1_{b'})
    let mut from = BimoduleMorphism::zero(f, &composed.total, 0);
    for bp in 0..nb {
        for a in 0..na {
            let ce = &composed.coends[bp][a];
            let mut gmap = GradedMap::zero(f.component_complex(bp, a), &ce.total, 0);
            for &deg in f.component_complex(bp, a).dims().keys() {
                if ce.total.dim(deg) == 0 {
                    continue;
                }
                let m = Matrix::from_fn(field, ce.total.dim(deg), f.component_complex(bp, a).dim(deg), |r, xi| {
                    let mut x = Matrix::zero(field, f.component_complex(bp, a).dim(deg), 1);
                    x.set(xi, 0, field.one());
                    let cls = composed.class_of_pair(
                        f,
                        &diag,
                        bp,
                        a,
                        bp,
                        deg,
                        &x,
                        0,
                        f.contra.id_vec(bp),
                    );
                    cls.at(r, 0).clone()
                });
                gmap.set_block(deg, m);
            }
            from.set_component(bp, a, gmap);
        }
    }
    let iso = BimoduleIso { to, from };
    iso.verify()?;
    Ok((composed, iso))
}

/// Co-Yoneda unit `F ⋄ h_A ≅ F`: the cowedge maps are left actions.
pub fn unit_right(f: &Bimodule) -> Result<(ComposeResult, BimoduleIso)> {
    let diag = Bimodule::diagonal(&f.cov);
    let composed = compose(f, &diag)?;
    let field = f.cov.field;
    let na = f.cov.object_count();
    let nb = f.contra.object_count();
    // to: [g ⊗ x] ↦ g·x  (g in hom(A, a) the F-factor is the diagonal here)
    let mut to = BimoduleMorphism::zero(&composed.total, f, 0);
    for b in 0..nb {
        for a in 0..na {
            let ce = &composed.coends[b][a];
            let mut gmap = GradedMap::zero(&ce.total, f.component_complex(b, a), 0);
            for &deg in ce.total.dims().keys() {
                if f.component_complex(b, a).dim(deg) == 0 {
                    continue;
                }
                let mut big = Matrix::zero(field, f.component_complex(b, a).dim(deg), ce.ambient.dim(deg));
                for mid in 0..na {
                    let sidx = TensorIndex::new(f.cov.hom(mid, a), f.component_complex(b, mid));
                    let off = ce.offset(mid, deg);
                    for (gd, gi, xi) in sidx.basis(deg) {
                        let xd = deg - gd;
                        let gv = f.cov.basis_vec(mid, a, gd, gi);
                        let mut x = Matrix::zero(field, f.component_complex(b, mid).dim(xd), 1);
                        x.set(xi, 0, field.one());
                        let gx = f.act_left(b, mid, a, gd, &gv, xd, &x);
                        for r in 0..gx.rows {
                            let v = big.at(r, off + sidx.index(deg, gd, gi, xi)).add(gx.at(r, 0));
                            big.set(r, off + sidx.index(deg, gd, gi, xi), v);
                        }
                    }
                }
                let rel = ce.relation.block(deg);
                if !big.mul(&rel).is_zero() {
                    return Err(DgError::Invalid(
                        "unit_right cowedge does not kill relations".into(),
                    ));
                }
                gmap.set_block(deg, big.mul(&ce.section.block(deg)));
            }
            to.set_component(b, a, gmap);
        }
    }
    // from: x ↦ η_a(1_a ⊗ x)
    let mut from = BimoduleMorphism::zero(f, &composed.total, 0);
    for b in 0..nb {
        for a in 0..na {
            let ce = &composed.coends[b][a];
            let mut gmap = GradedMap::zero(f.component_complex(b, a), &ce.total, 0);
            for &deg in f.component_complex(b, a).dims().keys() {
                if ce.total.dim(deg) == 0 {
                    continue;
                }
                let m = Matrix::from_fn(field, ce.total.dim(deg), f.component_complex(b, a).dim(deg), |r, xi| {
                    let mut x = Matrix::zero(field, f.component_complex(b, a).dim(deg), 1);
                    x.set(xi, 0, field.one());
                    let cls = composed.class_of_pair(
                        &diag,
                        f,
                        b,
                        a,
                        a,
                        0,
                        f.cov.id_vec(a),
                        deg,
                        &x,
                    );
                    cls.at(r, 0).clone()
                });
                gmap.set_block(deg, m);
            }
            from.set_component(b, a, gmap);
        }
    }
    let iso = BimoduleIso { to, from };
    iso.verify()?;
    Ok((composed, iso))
}

/// Whiskering `G ⋄ φ` for `φ: F -> F'`.
pub fn whisker_left(
    g: &Bimodule,
    phi: &BimoduleMorphism,
    src: &ComposeResult,
    tgt: &ComposeResult,
) -> Result<BimoduleMorphism> {
    let f = &phi.source;
    let f2 = &phi.target;
    let na = f.cov.object_count();
    let nc = g.contra.object_count();
    let k = f.contra.object_count();
    let field = f.cov.field;
    let mut out = BimoduleMorphism::zero(&src.total, &tgt.total, phi.degree);
    for c in 0..nc {
        for a in 0..na {
            let sce = &src.coends[c][a];
            let tce = &tgt.coends[c][a];
            // ambient map: ⊕_b φ_{(b,a)} ⊗ 1_{G(c,b)}
            let mut amb = GradedMap::zero(&sce.ambient, &tce.ambient, phi.degree);
            for &p in sce.ambient.dims().keys() {
                if tce.ambient.dim(p + phi.degree) == 0 {
                    continue;
                }
                let mut m = Matrix::zero(field, tce.ambient.dim(p + phi.degree), sce.ambient.dim(p));
                for b in 0..k {
                    let part = GradedMap::tensor_maps(
                        phi.component(b, a),
                        &GradedMap::identity(g.component_complex(c, b)),
                    );
                    let block = part.block(p);
                    for col in 0..sce
                        .diag[b]
                        .dim(p)
                    {
                        for row in 0..tce.diag[b].dim(p + phi.degree) {
                            m.set(
                                tce.offset(b, p + phi.degree) + row,
                                sce.offset(b, p) + col,
                                block.at(row, col).clone(),
                            );
                        }
                    }
                }
                amb.set_block(p, m);
            }
            let check = tce.proj.map().compose(&amb).compose(&sce.relation);
            if !check.is_zero() {
                return Err(DgError::Invalid("whisker_left does not descend".into()));
            }
            let comp = tce.proj.map().compose(&amb).compose(&sce.section);
            out.set_component(c, a, comp);
        }
    }
    let _ = f2;
    Ok(out)
}

/// Whiskering `ψ ⋄ F` for `ψ: G -> G'`.
pub fn whisker_right(
    psi: &BimoduleMorphism,
    f: &Bimodule,
    src: &ComposeResult,
    tgt: &ComposeResult,
) -> Result<BimoduleMorphism> {
    let g = &psi.source;
    let na = f.cov.object_count();
    let nc = g.contra.object_count();
    let k = f.contra.object_count();
    let field = f.cov.field;
    let mut out = BimoduleMorphism::zero(&src.total, &tgt.total, psi.degree);
    for c in 0..nc {
        for a in 0..na {
            let sce = &src.coends[c][a];
            let tce = &tgt.coends[c][a];
            let mut amb = GradedMap::zero(&sce.ambient, &tce.ambient, psi.degree);
            for &p in sce.ambient.dims().keys() {
                if tce.ambient.dim(p + psi.degree) == 0 {
                    continue;
                }
                let mut m = Matrix::zero(field, tce.ambient.dim(p + psi.degree), sce.ambient.dim(p));
                for b in 0..k {
                    let part = GradedMap::tensor_maps(
                        &GradedMap::identity(f.component_complex(b, a)),
                        psi.component(c, b),
                    );
                    let block = part.block(p);
                    for col in 0..sce.diag[b].dim(p) {
                        for row in 0..tce.diag[b].dim(p + psi.degree) {
                            m.set(
                                tce.offset(b, p + psi.degree) + row,
                                sce.offset(b, p) + col,
                                block.at(row, col).clone(),
                            );
                        }
                    }
                }
                amb.set_block(p, m);
            }
            let check = tce.proj.map().compose(&amb).compose(&sce.relation);
            if !check.is_zero() {
                return Err(DgError::Invalid("whisker_right does not descend".into()));
            }
            let comp = tce.proj.map().compose(&amb).compose(&sce.section);
            out.set_component(c, a, comp);
        }
    }
    Ok(out)
}

/// The associativity witness `(H ⋄ G) ⋄ F ≅ H ⋄ (G ⋄ F)`, constructed via
/// sections and verified canonical: `α ∘ π₁ = π₂` on the big sum, the legs
/// are bimodule morphisms, and the round trips are identities.
pub struct AssocData {
    pub left: ComposeResult,       // (H ⋄ G) ⋄ F
    pub right: ComposeResult,      // H ⋄ (G ⋄ F)
    pub inner_left: ComposeResult, // H ⋄ G
    pub inner_right: ComposeResult, // G ⋄ F
    pub iso: BimoduleIso,          // left -> right
}

pub fn assoc_iso(h: &Bimodule, g: &Bimodule, f: &Bimodule) -> Result<AssocData> {
    let hg = compose(h, g)?;
    let gf = compose(g, f)?;
    let left = compose(&hg.total, f)?;
    let right = compose(h, &gf.total)?;
    let field = f.cov.field;
    let na = f.cov.object_count();
    let nd = h.contra.object_count();
    let nb = f.contra.object_count();
    let nc = g.contra.object_count();

    let mut to = BimoduleMorphism::zero(&left.total, &right.total, 0);
    let mut from = BimoduleMorphism::zero(&right.total, &left.total, 0);
    for d in 0..nd {
        for a in 0..na {
            let lce = &left.coends[d][a];
            let rce = &right.coends[d][a];
            // build both projections from the big space
            // big = ⊕_{b,c} F(b,a) ⊗ G(c,b) ⊗ H(d,c) with F-major grouping
            // map into left-total: [x ⊗ y ⊗ z] ↦ η_b(x ⊗ η_c(y ⊗ z))
            // map into right-total: ↦ η_c(η_b(x ⊗ y) ⊗ z)
            let mut big_pieces = Vec::new();
            for b in 0..nb {
                for c in 0..nc {
                    big_pieces.push((
                        b,
                        c,
                        f.component_complex(b, a)
                            .tensor(g.component_complex(c, b))
                            .tensor(h.component_complex(d, c)),
                    ));
                }
            }
            let big = big_pieces
                .iter()
                .skip(1)
                .fold(big_pieces[0].2.clone(), |acc, (_, _, x)| acc.direct_sum(x));
            let mut pi1 = GradedMap::zero(&big, &lce.total, 0);
            let mut pi2 = GradedMap::zero(&big, &rce.total, 0);
            for &p in big.dims().keys() {
                let mut m1 = Matrix::zero(field, lce.total.dim(p), big.dim(p));
                let mut m2 = Matrix::zero(field, rce.total.dim(p), big.dim(p));
                let mut off = 0;
                for (b, c, piece) in &big_pieces {
                    let fg = f.component_complex(*b, a).tensor(g.component_complex(*c, *b));
                    let o_idx = TensorIndex::new(&fg, h.component_complex(d, *c));
                    let i_idx = TensorIndex::new(f.component_complex(*b, a), g.component_complex(*c, *b));
                    for (xyd, xyi, zi) in o_idx.basis(p) {
                        let col = off + o_idx.index(p, xyd, xyi, zi);
                        let (xd, xi, yi) = i_idx.decompose(xyd, xyi);
                        let yd = xyd - xd;
                        let zd = p - xyd;
                        let mut x = Matrix::zero(field, f.component_complex(*b, a).dim(xd), 1);
                        x.set(xi, 0, field.one());
                        let mut y = Matrix::zero(field, g.component_complex(*c, *b).dim(yd), 1);
                        y.set(yi, 0, field.one());
                        let mut z = Matrix::zero(field, h.component_complex(d, *c).dim(zd), 1);
                        z.set(zi, 0, field.one());
                        // left: x ⊗ [y ⊗ z]
                        let yz = gf_pair_class(&hg, g, h, d, *b, *c, yd, &y, zd, &z);
                        let cls1 = left.class_of_pair(f, &hg.total, d, a, *b, xd, &x, yd + zd, &yz);
                        for r in 0..cls1.rows {
                            let v = m1.at(r, col).add(cls1.at(r, 0));
                            m1.set(r, col, v);
                        }
                        // right: [x ⊗ y] ⊗ z
                        let xy = gf_pair_class(&gf, f, g, *c, a, *b, xd, &x, yd, &y);
                        let cls2 = right.class_of_pair(&gf.total, h, d, a, *c, xd + yd, &xy, zd, &z);
                        for r in 0..cls2.rows {
                            let v = m2.at(r, col).add(cls2.at(r, 0));
                            m2.set(r, col, v);
                        }
                    }
                    off += piece.dim(p);
                }
                pi1.set_block(p, m1);
                pi2.set_block(p, m2);
            }
            // α := pi2 ∘ section-lift of left, then assert α ∘ π1 = π2
            let alpha = factor_through(&pi1, &pi2, &lce.total, &big)?;
            let beta = factor_through(&pi2, &pi1, &rce.total, &big)?;
            to.set_component(d, a, alpha);
            from.set_component(d, a, beta);
        }
    }
    let iso = BimoduleIso { to, from };
    iso.verify()?;
    Ok(AssocData {
        left,
        right,
        inner_left: hg,
        inner_right: gf,
        iso,
    })
}

/// Class of `x ⊗ y` in an inner composite, generic over which factors.
fn gf_pair_class(
    comp: &ComposeResult,
    f: &Bimodule,
    g: &Bimodule,
    c: usize,
    a: usize,
    b: usize,
    xd: i32,
    x: &Matrix,
    yd: i32,
    y: &Matrix,
) -> Matrix {
    comp.class_of_pair(f, g, c, a, b, xd, x, yd, y)
}

/// Solves `alpha ∘ pi1 = pi2` for `alpha` (surjectivity of `pi1` onto the
/// source total makes the solution unique) and asserts the factorization.
fn factor_through(
    pi1: &GradedMap,
    pi2: &GradedMap,
    src_total: &Complex,
    _big: &Complex,
) -> Result<GradedMap> {
    let field = src_total.field;
    let mut out = GradedMap::zero(&pi1.target, &pi2.target, 0);
    for &p in pi1.source.dims().keys() {
        let b1 = pi1.block(p);
        let b2 = pi2.block(p);
        if b1.rows == 0 {
            if !b2.is_zero() {
                return Err(DgError::Invalid("assoc factorization mismatch".into()));
            }
            continue;
        }
        // find alpha with alpha * b1 = b2: transpose and solve
        let sol = b1
            .transpose()
            .solve(&b2.transpose())
            .ok_or_else(|| DgError::Invalid("assoc factorization failed".into()))?;
        let alpha = sol.transpose();
        if alpha.mul(&b1) != b2 {
            return Err(DgError::Invalid("assoc factorization not exact".into()));
        }
        out.set_block(p, alpha);
    }
    let _ = field;
    Ok(out)
}

/// The integrand whose end is `Nat(M, N)` for right modules:
/// `H(b, a) = Hom(M(a), N(b))` with the transport-twisted actions.
pub fn hom_integrand(m: &RightModule, n: &RightModule) -> Result<Bimodule> {
    if m.cat != n.cat {
        return Err(DgError::Shape("hom integrand base mismatch".into()));
    }
    let cat = &m.cat;
    let k = cat.object_count();
    let field = cat.field;
    let comps: Vec<Vec<Complex>> = (0..k)
        .map(|b| {
            (0..k)
                .map(|a| m.component(a).internal_hom(n.component(b)))
                .collect()
        })
        .collect();
    // cov action u: a -> a2: φ ↦ (-1)^{|u||φ|} φ ∘ M⟨u⟩
    let mut left = Vec::new();
    for b in 0..k {
        let mut plane = Vec::new();
        for a in 0..k {
            let mut line = Vec::new();
            for a2 in 0..k {
                let src = cat.hom(a, a2).tensor(&comps[b][a]);
                let mut g = GradedMap::zero(&src, &comps[b][a2], 0);
                let tidx = TensorIndex::new(cat.hom(a, a2), &comps[b][a]);
                for &deg in src.dims().keys() {
                    if comps[b][a2].dim(deg) == 0 {
                        continue;
                    }
                    let mut mat = Matrix::zero(field, comps[b][a2].dim(deg), src.dim(deg));
                    for (ud, ui, pi) in tidx.basis(deg) {
                        let col = tidx.index(deg, ud, ui, pi);
                        let pd = deg - ud;
                        let u = cat.basis_vec(a, a2, ud, ui);
                        let tr = m.transport(a2, a, ud, &u); // M(a2) -> M(a), wrong dir? no:
                        // M⟨u⟩ for u: a -> a2 maps M(a2) -> M(a).
                        let pre = crate::complex::hom_pre(&tr, n.component(b));
                        let sign = Scalar::sign(field, (ud as i64) * (pd as i64));
                        let block = pre.block(pd);
                        for r in 0..comps[b][a2].dim(deg) {
                            let v = block.at(r, pi).mul(&sign);
                            if !v.is_zero() {
                                mat.set(r, col, v);
                            }
                        }
                    }
                    g.set_block(deg, mat);
                }
                line.push(g);
            }
            plane.push(line);
        }
        left.push(plane);
    }
    // contra action u: b2 -> b: φ ↦ (-1)^{|φ||u|} N⟨u⟩ ∘ φ
    let mut right = Vec::new();
    for b in 0..k {
        let mut plane = Vec::new();
        for b2 in 0..k {
            let mut line = Vec::new();
            for a in 0..k {
                let src = comps[b][a].tensor(cat.hom(b2, b));
                let mut g = GradedMap::zero(&src, &comps[b2][a], 0);
                let tidx = TensorIndex::new(&comps[b][a], cat.hom(b2, b));
                for &deg in src.dims().keys() {
                    if comps[b2][a].dim(deg) == 0 {
                        continue;
                    }
                    let mut mat = Matrix::zero(field, comps[b2][a].dim(deg), src.dim(deg));
                    for (pd, pi, ui) in tidx.basis(deg) {
                        let col = tidx.index(deg, pd, pi, ui);
                        let ud = deg - pd;
                        let u = cat.basis_vec(b2, b, ud, ui);
                        let tr = n.transport(b, b2, ud, &u); // N(b) -> N(b2)
                        let post = crate::complex::hom_post(m.component(a), &tr);
                        let sign = Scalar::sign(field, (pd as i64) * (ud as i64));
                        let block = post.block(pd);
                        for r in 0..comps[b2][a].dim(deg) {
                            let v = block.at(r, pi).mul(&sign);
                            if !v.is_zero() {
                                mat.set(r, col, v);
                            }
                        }
                    }
                    g.set_block(deg, mat);
                }
                line.push(g);
            }
            plane.push(line);
        }
        right.push(plane);
    }
    Ok(Bimodule::new_unchecked(
        cat.clone(),
        cat.clone(),
        comps,
        left,
        right,
    ))
}

/// The integrand whose end is `Nat(M, N)` for left modules:
/// `H(a1, a2) = Hom(M(a1), N(a2))` with plain pre/post-composition actions.
pub fn hom_integrand_left(m: &LeftModule, n: &LeftModule) -> Result<Bimodule> {
    if m.cat != n.cat {
        return Err(DgError::Shape("hom integrand base mismatch".into()));
    }
    let cat = &m.cat;
    let k = cat.object_count();
    let field = cat.field;
    let comps: Vec<Vec<Complex>> = (0..k)
        .map(|a1| {
            (0..k)
                .map(|a2| m.component(a1).internal_hom(n.component(a2)))
                .collect()
        })
        .collect();
    // cov action u: a2 -> a2': φ ↦ λ^N_u ∘ φ
    let mut left = Vec::new();
    for a1 in 0..k {
        let mut plane = Vec::new();
        for a2 in 0..k {
            let mut line = Vec::new();
            for a2p in 0..k {
                let src = cat.hom(a2, a2p).tensor(&comps[a1][a2]);
                let mut g = GradedMap::zero(&src, &comps[a1][a2p], 0);
                let tidx = TensorIndex::new(cat.hom(a2, a2p), &comps[a1][a2]);
                for &deg in src.dims().keys() {
                    if comps[a1][a2p].dim(deg) == 0 {
                        continue;
                    }
                    let mut mat = Matrix::zero(field, comps[a1][a2p].dim(deg), src.dim(deg));
                    for (ud, ui, pi) in tidx.basis(deg) {
                        let col = tidx.index(deg, ud, ui, pi);
                        let pd = deg - ud;
                        let u = cat.basis_vec(a2, a2p, ud, ui);
                        let tr = n.transport(a2, a2p, ud, &u);
                        let post = crate::complex::hom_post(m.component(a1), &tr);
                        let block = post.block(pd);
                        for r in 0..comps[a1][a2p].dim(deg) {
                            let v = block.at(r, pi).clone();
                            if !v.is_zero() {
                                mat.set(r, col, v);
                            }
                        }
                    }
                    g.set_block(deg, mat);
                }
                line.push(g);
            }
            plane.push(line);
        }
        left.push(plane);
    }
    // contra action u: a1' -> a1: φ ↦ φ ∘ λ^M_u
    let mut right = Vec::new();
    for a1 in 0..k {
        let mut plane = Vec::new();
        for a1p in 0..k {
            let mut line = Vec::new();
            for a2 in 0..k {
                let src = comps[a1][a2].tensor(cat.hom(a1p, a1));
                let mut g = GradedMap::zero(&src, &comps[a1p][a2], 0);
                let tidx = TensorIndex::new(&comps[a1][a2], cat.hom(a1p, a1));
                for &deg in src.dims().keys() {
                    if comps[a1p][a2].dim(deg) == 0 {
                        continue;
                    }
                    let mut mat = Matrix::zero(field, comps[a1p][a2].dim(deg), src.dim(deg));
                    for (pd, pi, ui) in tidx.basis(deg) {
                        let col = tidx.index(deg, pd, pi, ui);
                        let ud = deg - pd;
                        let u = cat.basis_vec(a1p, a1, ud, ui);
                        let tr = m.transport(a1p, a1, ud, &u); // M(a1') -> M(a1)
                        let pre = crate::complex::hom_pre(&tr, n.component(a2));
                        let block = pre.block(pd);
                        for r in 0..comps[a1p][a2].dim(deg) {
                            let v = block.at(r, pi).clone();
                            if !v.is_zero() {
                                mat.set(r, col, v);
                            }
                        }
                    }
                    g.set_block(deg, mat);
                }
                line.push(g);
            }
            plane.push(line);
        }
        right.push(plane);
    }
    Ok(Bimodule::new_unchecked(
        cat.clone(),
        cat.clone(),
        comps,
        left,
        right,
    ))
}

/// A pair of mutually inverse chain maps.
pub struct ChainIso {
    pub to: ChainMap,
    pub from: ChainMap,
}

impl ChainIso {
    pub fn verify(&self) -> Result<()> {
        if !self.to.compose(&self.from).is_identity_map()
            || !self.from.compose(&self.to).is_identity_map()
        {
            return Err(DgError::Invalid("chain iso round-trip failed".into()));
        }
        Ok(())
    }
}

/// Yoneda as an end, right-module form: `G(X) ≅ ∫_A Hom(A(A, X), G(A))`
/// with wedge maps `y ↦ (g ↦ y·g)`.
pub fn yoneda_end_right(g: &RightModule, x: usize) -> Result<(EndResult, ChainIso)> {
    let cat = g.cat.clone();
    let hx = RightModule::representable(&cat, x);
    let integrand = hom_integrand(&hx, g)?;
    let end = end_bimodule(&integrand, &all_morphisms(&cat))?;
    let field = cat.field;
    let gx = g.component(x).clone();
    let n = cat.object_count();
    // to: y ↦ (g ↦ y·g)
    let mut to = GradedMap::zero(&gx, &end.total, 0);
    for &p in gx.dims().keys() {
        if end.total.dim(p) == 0 && gx.dim(p) > 0 {
            return Err(DgError::Invalid("yoneda_end: end too small".into()));
        }
        let mut m = Matrix::zero(field, end.total.dim(p), gx.dim(p));
        for yi in 0..gx.dim(p) {
            let mut y = Matrix::zero(field, gx.dim(p), 1);
            y.set(yi, 0, field.one());
            let mut amb = Matrix::zero(field, end.ambient.dim(p), 1);
            for a in 0..n {
                let hidx = HomIndex::new(hx.component(a), g.component(a), p);
                let off = end.offset(a, p);
                for (&fd, &fdim) in cat.hom(a, x).dims() {
                    for fi in 0..fdim {
                        let fv = cat.basis_vec(a, x, fd, fi);
                        let yg = g.act(x, a, p, &y, fd, &fv);
                        for r in 0..yg.rows {
                            let c = yg.at(r, 0);
                            if !c.is_zero() {
                                amb.set(off + hidx.index(fd, fi, r), 0, c.clone());
                            }
                        }
                    }
                }
            }
            let coords = end
                .embed
                .block(p)
                .solve(&amb)
                .ok_or_else(|| DgError::Invalid("yoneda_end wedge not satisfied".into()))?;
            for r in 0..coords.rows {
                m.set(r, yi, coords.at(r, 0).clone());
            }
        }
        to.set_block(p, m);
    }
    let to = ChainMap::new(to)?;
    // from: evaluate the X-component at the identity
    let mut from = GradedMap::zero(&end.total, &gx, 0);
    for &p in end.total.dims().keys() {
        if gx.dim(p) == 0 {
            continue;
        }
        let hidx_dims = hx.component(x).clone();
        let m = Matrix::from_fn(field, gx.dim(p), end.total.dim(p), |r, c| {
            let emb = end.embed.block(p);
            let off = end.offset(x, p);
            let hidx = HomIndex::new(&hidx_dims, &gx, p);
            let mut val = field.zero();
            for i in 0..cat.hom(x, x).dim(0) {
                let idc = cat.id_vec(x).at(i, 0);
                if idc.is_zero() {
                    continue;
                }
                val = val.add(&emb.at(off + hidx.index(0, i, r), c).mul(idc));
            }
            val
        });
        from.set_block(p, m);
    }
    let from = ChainMap::new(from)?;
    let iso = ChainIso { to, from };
    iso.verify()?;
    Ok((end, iso))
}

/// Yoneda as an end, left-module form: `F(X) ≅ ∫_A Hom(A(X, A), F(A))`
/// with wedge maps `x ↦ (f ↦ (-1)^{|x||f|} f·x)`.
pub fn yoneda_end_left(f: &LeftModule, x: usize) -> Result<(EndResult, ChainIso)> {
    let cat = f.cat.clone();
    let hx = LeftModule::representable(&cat, x);
    let integrand = hom_integrand_left(&hx, f)?;
    let end = end_bimodule(&integrand, &all_morphisms(&cat))?;
    let field = cat.field;
    let fx = f.component(x).clone();
    let n = cat.object_count();
    let mut to = GradedMap::zero(&fx, &end.total, 0);
    for &p in fx.dims().keys() {
        if end.total.dim(p) == 0 && fx.dim(p) > 0 {
            return Err(DgError::Invalid("yoneda_end: end too small".into()));
        }
        let mut m = Matrix::zero(field, end.total.dim(p), fx.dim(p));
        for yi in 0..fx.dim(p) {
            let mut y = Matrix::zero(field, fx.dim(p), 1);
            y.set(yi, 0, field.one());
            let mut amb = Matrix::zero(field, end.ambient.dim(p), 1);
            for a in 0..n {
                // block a: Hom(A(x, a), F(a)); entry at basis (fd, fi, r)
                let hidx = HomIndex::new(hx.component(a), f.component(a), p);
                let off = end.offset(a, p);
                for (&fd, &fdim) in cat.hom(x, a).dims() {
                    for fi in 0..fdim {
                        let fv = cat.basis_vec(x, a, fd, fi);
                        let fy = f.act(x, a, fd, &fv, p, &y);
                        let sign = Scalar::sign(field, (p as i64) * (fd as i64));
                        for r in 0..fy.rows {
                            let c = fy.at(r, 0).mul(&sign);
                            if !c.is_zero() {
                                amb.set(off + hidx.index(fd, fi, r), 0, c);
                            }
                        }
                    }
                }
            }
            let coords = end
                .embed
                .block(p)
                .solve(&amb)
                .ok_or_else(|| DgError::Invalid("yoneda_end wedge not satisfied".into()))?;
            for r in 0..coords.rows {
                m.set(r, yi, coords.at(r, 0).clone());
            }
        }
        to.set_block(p, m);
    }
    let to = ChainMap::new(to)?;
    let mut from = GradedMap::zero(&end.total, &fx, 0);
    for &p in end.total.dims().keys() {
        if fx.dim(p) == 0 {
            continue;
        }
        let hsrc = hx.component(x).clone();
        let m = Matrix::from_fn(field, fx.dim(p), end.total.dim(p), |r, c| {
            let emb = end.embed.block(p);
            let off = end.offset(x, p);
            let hidx = HomIndex::new(&hsrc, &fx, p);
            let mut val = field.zero();
            for i in 0..cat.hom(x, x).dim(0) {
                let idc = cat.id_vec(x).at(i, 0);
                if idc.is_zero() {
                    continue;
                }
                val = val.add(&emb.at(off + hidx.index(0, i, r), c).mul(idc));
            }
            val
        });
        from.set_block(p, m);
    }
    let from = ChainMap::new(from)?;
    let iso = ChainIso { to, from };
    iso.verify()?;
    Ok((end, iso))
}

/// `Hom(V, -)` applied to a square bimodule: the integrand of the
/// hom-preserves-ends identity.
pub fn post_twist_integrand(v: &Complex, f: &Bimodule) -> Result<Bimodule> {
    square_check(f)?;
    let cat = f.cov.clone();
    let k = cat.object_count();
    let field = cat.field;
    let comps: Vec<Vec<Complex>> = (0..k)
        .map(|b| {
            (0..k)
                .map(|a| v.internal_hom(f.component_complex(b, a)))
                .collect()
        })
        .collect();
    // cov action: φ ↦ L_u ∘ φ (plain left transport)
    let mut left = Vec::new();
    for b in 0..k {
        let mut plane = Vec::new();
        for a in 0..k {
            let mut line = Vec::new();
            for a2 in 0..k {
                let src = cat.hom(a, a2).tensor(&comps[b][a]);
                let mut g = GradedMap::zero(&src, &comps[b][a2], 0);
                let tidx = TensorIndex::new(cat.hom(a, a2), &comps[b][a]);
                for &deg in src.dims().keys() {
                    if comps[b][a2].dim(deg) == 0 {
                        continue;
                    }
                    let mut mat = Matrix::zero(field, comps[b][a2].dim(deg), src.dim(deg));
                    for (ud, ui, pi) in tidx.basis(deg) {
                        let col = tidx.index(deg, ud, ui, pi);
                        let pd = deg - ud;
                        let u = cat.basis_vec(a, a2, ud, ui);
                        let tr = f.left_transport(b, a, a2, ud, &u);
                        let post = crate::complex::hom_post(v, &tr);
                        let block = post.block(pd);
                        for r in 0..comps[b][a2].dim(deg) {
                            let val = block.at(r, pi).clone();
                            if !val.is_zero() {
                                mat.set(r, col, val);
                            }
                        }
                    }
                    g.set_block(deg, mat);
                }
                line.push(g);
            }
            plane.push(line);
        }
        left.push(plane);
    }
    // contra action: φ·u = (-1)^{|φ||u|} F⟨u⟩ ∘ φ (signed right transport)
    let mut right = Vec::new();
    for b in 0..k {
        let mut plane = Vec::new();
        for b2 in 0..k {
            let mut line = Vec::new();
            for a in 0..k {
                let src = comps[b][a].tensor(cat.hom(b2, b));
                let mut g = GradedMap::zero(&src, &comps[b2][a], 0);
                let tidx = TensorIndex::new(&comps[b][a], cat.hom(b2, b));
                for &deg in src.dims().keys() {
                    if comps[b2][a].dim(deg) == 0 {
                        continue;
                    }
                    let mut mat = Matrix::zero(field, comps[b2][a].dim(deg), src.dim(deg));
                    for (pd, pi, ui) in tidx.basis(deg) {
                        let col = tidx.index(deg, pd, pi, ui);
                        let ud = deg - pd;
                        let u = cat.basis_vec(b2, b, ud, ui);
                        let tr = f.right_transport(b, b2, a, ud, &u);
                        let post = crate::complex::hom_post(v, &tr);
                        let sign = Scalar::sign(field, (pd as i64) * (ud as i64));
                        let block = post.block(pd);
                        for r in 0..comps[b2][a].dim(deg) {
                            let val = block.at(r, pi).mul(&sign);
                            if !val.is_zero() {
                                mat.set(r, col, val);
                            }
                        }
                    }
                    g.set_block(deg, mat);
                }
                line.push(g);
            }
            plane.push(line);
        }
        right.push(plane);
    }
    Ok(Bimodule::new_unchecked(
        cat.clone(),
        cat,
        comps,
        left,
        right,
    ))
}

/// `Hom(-, V)` applied to a square bimodule with flipped variance: the
/// integrand of the hom-coend identity.
pub fn pre_twist_integrand(f: &Bimodule, v: &Complex) -> Result<Bimodule> {
    square_check(f)?;
    let cat = f.cov.clone();
    let k = cat.object_count();
    let field = cat.field;
    // comps[a1][a2] = Hom(F(a2, a1), V)
    let comps: Vec<Vec<Complex>> = (0..k)
        .map(|a1| {
            (0..k)
                .map(|a2| f.component_complex(a2, a1).internal_hom(v))
                .collect()
        })
        .collect();
    // cov action u: a2 -> a2': φ ↦ (-1)^{|u||φ|} φ ∘ F⟨u⟩ (signed right transport)
    let mut left = Vec::new();
    for a1 in 0..k {
        let mut plane = Vec::new();
        for a2 in 0..k {
            let mut line = Vec::new();
            for a2p in 0..k {
                let src = cat.hom(a2, a2p).tensor(&comps[a1][a2]);
                let mut g = GradedMap::zero(&src, &comps[a1][a2p], 0);
                let tidx = TensorIndex::new(cat.hom(a2, a2p), &comps[a1][a2]);
                for &deg in src.dims().keys() {
                    if comps[a1][a2p].dim(deg) == 0 {
                        continue;
                    }
                    let mut mat = Matrix::zero(field, comps[a1][a2p].dim(deg), src.dim(deg));
                    for (ud, ui, pi) in tidx.basis(deg) {
                        let col = tidx.index(deg, ud, ui, pi);
                        let pd = deg - ud;
                        let u = cat.basis_vec(a2, a2p, ud, ui);
                        // F⟨u⟩: F(a2', a1) -> F(a2, a1)
                        let tr = f.right_transport(a2p, a2, a1, ud, &u);
                        let pre = crate::complex::hom_pre(&tr, v);
                        let sign = Scalar::sign(field, (ud as i64) * (pd as i64));
                        let block = pre.block(pd);
                        for r in 0..comps[a1][a2p].dim(deg) {
                            let val = block.at(r, pi).mul(&sign);
                            if !val.is_zero() {
                                mat.set(r, col, val);
                            }
                        }
                    }
                    g.set_block(deg, mat);
                }
                line.push(g);
            }
            plane.push(line);
        }
        left.push(plane);
    }
    // contra action u: a1' -> a1: φ ↦ φ ∘ λ_u (plain left transport)
    let mut right = Vec::new();
    for a1 in 0..k {
        let mut plane = Vec::new();
        for a1p in 0..k {
            let mut line = Vec::new();
            for a2 in 0..k {
                let src = comps[a1][a2].tensor(cat.hom(a1p, a1));
                let mut g = GradedMap::zero(&src, &comps[a1p][a2], 0);
                let tidx = TensorIndex::new(&comps[a1][a2], cat.hom(a1p, a1));
                for &deg in src.dims().keys() {
                    if comps[a1p][a2].dim(deg) == 0 {
                        continue;
                    }
                    let mut mat = Matrix::zero(field, comps[a1p][a2].dim(deg), src.dim(deg));
                    for (pd, pi, ui) in tidx.basis(deg) {
                        let col = tidx.index(deg, pd, pi, ui);
                        let ud = deg - pd;
                        let u = cat.basis_vec(a1p, a1, ud, ui);
                        // λ_u: F(a2, a1') -> F(a2, a1)
                        let tr = f.left_transport(a2, a1p, a1, ud, &u);
                        let pre = crate::complex::hom_pre(&tr, v);
                        let block = pre.block(pd);
                        for r in 0..comps[a1p][a2].dim(deg) {
                            let val = block.at(r, pi).clone();
                            if !val.is_zero() {
                                mat.set(r, col, val);
                            }
                        }
                    }
                    g.set_block(deg, mat);
                }
                line.push(g);
            }
            plane.push(line);
        }
        right.push(plane);
    }
    Ok(Bimodule::new_unchecked(
        cat.clone(),
        cat,
        comps,
        left,
        right,
    ))
}

/// `Hom(V, ∫_A F) ≅ ∫_A Hom(V, F(A,A))`, verified as a chain isomorphism.
pub fn hom_end_check(f: &Bimodule, v: &Complex, gens: &Generators) -> Result<ChainIso> {
    let end_f = end_bimodule(f, gens)?;
    let integrand = post_twist_integrand(v, f)?;
    let end_h = end_bimodule(&integrand, gens)?;
    let lhs = v.internal_hom(&end_f.total);
    let field = v.field;
    let n = f.cov.object_count();
    // to: ψ ↦ (ε_a ∘ ψ)_a in end coordinates
    let mut to = GradedMap::zero(&lhs, &end_h.total, 0);
    for &p in lhs.dims().keys() {
        if end_h.total.dim(p) == 0 && lhs.dim(p) > 0 {
            return Err(DgError::Invalid("hom_end: target too small".into()));
        }
        let mut m = Matrix::zero(field, end_h.total.dim(p), lhs.dim(p));
        for c in 0..lhs.dim(p) {
            let mut amb = Matrix::zero(field, end_h.ambient.dim(p), 1);
            for a in 0..n {
                let eps = end_f.projection(a);
                let post = crate::complex::hom_post(v, eps.map());
                let block = post.block(p);
                let off = end_h.offset(a, p);
                for r in 0..end_h.diag[a].dim(p) {
                    let val = block.at(r, c);
                    if !val.is_zero() {
                        amb.set(off + r, 0, val.clone());
                    }
                }
            }
            let coords = end_h
                .embed
                .block(p)
                .solve(&amb)
                .ok_or_else(|| DgError::Invalid("hom_end wedge not satisfied".into()))?;
            for r in 0..coords.rows {
                m.set(r, c, coords.at(r, 0).clone());
            }
        }
        to.set_block(p, m);
    }
    let to = ChainMap::new(to)?;
    // from: stack the components into Hom(V, ambient) and factor through
    // Hom(V, total) via the embedding
    let mut from = GradedMap::zero(&end_h.total, &lhs, 0);
    for &p in end_h.total.dims().keys() {
        if lhs.dim(p) == 0 {
            continue;
        }
        let mut m = Matrix::zero(field, lhs.dim(p), end_h.total.dim(p));
        // Hom(V, embed): Hom(V, total) -> Hom(V, ambient)
        let post_emb = crate::complex::hom_post(v, end_f.embed.map());
        for c in 0..end_h.total.dim(p) {
            let mut coords = Matrix::zero(field, end_h.total.dim(p), 1);
            coords.set(c, 0, field.one());
            let amb = end_h.embed.block(p).mul(&coords);
            // reinterpret as element of Hom(V, ⊕ F(a,a)) = ⊕ Hom(V, F(a,a));
            // the two ambient orders agree blockwise per (a, V-degree), so
            // rebuild the hom vector explicitly.
            let hom_amb_c = v.internal_hom(&end_f.ambient);
            let mut hom_vec = Matrix::zero(field, hom_amb_c.dim(p), 1);
            for a in 0..n {
                let off = end_h.offset(a, p);
                let hidx_small = HomIndex::new(v, f.component_complex(a, a), p);
                let hidx_big = HomIndex::new(v, &end_f.ambient, p);
                for (i, bsrc, t) in hidx_small.basis() {
                    let val = amb.at(off + hidx_small.index(i, bsrc, t), 0);
                    if !val.is_zero() {
                        let amb_off: usize = end_f.offset(a, i + p);
                        hom_vec.set(hidx_big.index(i, bsrc, amb_off + t), 0, val.clone());
                    }
                }
            }
            let sol = post_emb
                .block(p)
                .solve(&hom_vec)
                .ok_or_else(|| DgError::Invalid("hom_end inverse failed".into()))?;
            for r in 0..sol.rows {
                m.set(r, c, sol.at(r, 0).clone());
            }
        }
        from.set_block(p, m);
    }
    let from = ChainMap::new(from)?;
    let iso = ChainIso { to, from };
    iso.verify()?;
    Ok(iso)
}

/// `Hom(∫^A F, V) ≅ ∫_A Hom(F(A,A), V)`, verified as a chain isomorphism.
pub fn hom_coend_check(f: &Bimodule, v: &Complex, gens: &Generators) -> Result<ChainIso> {
    let ce = coend_bimodule(f)?;
    let integrand = pre_twist_integrand(f, v)?;
    let end_h = end_bimodule(&integrand, gens)?;
    let lhs = ce.total.internal_hom(v);
    let field = v.field;
    let n = f.cov.object_count();
    // to: ψ ↦ (ψ ∘ η_a)_a
    let mut to = GradedMap::zero(&lhs, &end_h.total, 0);
    for &p in lhs.dims().keys() {
        if end_h.total.dim(p) == 0 && lhs.dim(p) > 0 {
            return Err(DgError::Invalid("hom_coend: target too small".into()));
        }
        let mut m = Matrix::zero(field, end_h.total.dim(p), lhs.dim(p));
        for c in 0..lhs.dim(p) {
            let mut amb = Matrix::zero(field, end_h.ambient.dim(p), 1);
            for a in 0..n {
                let eta = ce.injection(a);
                let pre = crate::complex::hom_pre(eta.map(), v);
                let block = pre.block(p);
                let off = end_h.offset(a, p);
                for r in 0..end_h.diag[a].dim(p) {
                    let val = block.at(r, c);
                    if !val.is_zero() {
                        amb.set(off + r, 0, val.clone());
                    }
                }
            }
            let coords = end_h
                .embed
                .block(p)
                .solve(&amb)
                .ok_or_else(|| DgError::Invalid("hom_coend wedge not satisfied".into()))?;
            for r in 0..coords.rows {
                m.set(r, c, coords.at(r, 0).clone());
            }
        }
        to.set_block(p, m);
    }
    let to = ChainMap::new(to)?;
    // from: a family (φ_a: F(a,a) -> V) assembles on the ambient sum and
    // factors through the quotient via the section, after the relations are
    // checked to die
    let mut from = GradedMap::zero(&end_h.total, &lhs, 0);
    for &p in end_h.total.dims().keys() {
        if lhs.dim(p) == 0 {
            continue;
        }
        let mut m = Matrix::zero(field, lhs.dim(p), end_h.total.dim(p));
        for c in 0..end_h.total.dim(p) {
            let mut coords = Matrix::zero(field, end_h.total.dim(p), 1);
            coords.set(c, 0, field.one());
            let amb = end_h.embed.block(p).mul(&coords);
            // big: Hom(ambient_F, V) built blockwise
            let hom_big = ce.ambient.internal_hom(v);
            let mut big = Matrix::zero(field, hom_big.dim(p), 1);
            for a in 0..n {
                let off = end_h.offset(a, p);
                let hsmall = HomIndex::new(f.component_complex(a, a), v, p);
                let hbig = HomIndex::new(&ce.ambient, v, p);
                for (i, bsrc, t) in hsmall.basis() {
                    let val = amb.at(off + hsmall.index(i, bsrc, t), 0);
                    if !val.is_zero() {
                        let amb_off = ce.offset(a, i);
                        big.set(hbig.index(i, amb_off + bsrc, t), 0, val.clone());
                    }
                }
            }
            // ψ := big ∘ section; well-definedness: big kills relations
            let pre_rel = crate::complex::hom_pre(&ce.relation, v);
            let killed = pre_rel.block(p).mul(&big);
            if !killed.is_zero() {
                return Err(DgError::Invalid(
                    "hom_coend family does not kill relations".into(),
                ));
            }
            let pre_sec = crate::complex::hom_pre(&ce.section, v);
            let psi = pre_sec.block(p).mul(&big);
            for r in 0..psi.rows {
                m.set(r, c, psi.at(r, 0).clone());
            }
        }
        from.set_block(p, m);
    }
    let from = ChainMap::new(from)?;
    let iso = ChainIso { to, from };
    iso.verify()?;
    Ok(iso)
}

/// A bimodule with an extra covariant parameter category: one square
/// bimodule slice per parameter object, and a compatible family of slice
/// morphisms for the parameter morphisms.
pub struct ParamBimodule {
    pub param: DgCategory,
    pub slices: Vec<Bimodule>,
    /// action[c][c2][(deg, idx)] = the slice morphism for that basis element
    pub action: Vec<Vec<Vec<((i32, usize), BimoduleMorphism)>>>,
}

impl ParamBimodule {
    fn morphism_for(&self, c: usize, c2: usize, deg: i32, idx: usize) -> Option<&BimoduleMorphism> {
        self.action[c][c2]
            .iter()
            .find(|((d, i), _)| *d == deg && *i == idx)
            .map(|(_, m)| m)
    }

    /// Action of an arbitrary morphism vector, as a linear combination.
    pub fn act(&self, c: usize, c2: usize, deg: i32, v: &Matrix) -> Option<BimoduleMorphism> {
        let mut out: Option<BimoduleMorphism> = None;
        for i in 0..v.rows {
            let coeff = v.at(i, 0);
            if coeff.is_zero() {
                continue;
            }
            let m = self.morphism_for(c, c2, deg, i)?.scale(coeff);
            out = Some(match out {
                None => m,
                Some(acc) => acc.add(&m),
            });
        }
        out.or_else(|| {
            Some(BimoduleMorphism::zero(
                &self.slices[c],
                &self.slices[c2],
                deg,
            ))
        })
    }

    /// Validates slices, slice morphisms, functoriality on composites,
    /// identity action and d-compatibility.
    pub fn validate(&self) -> Result<()> {
        let k = self.param.object_count();
        for s in &self.slices {
            s.validate().into_result("param slice")?;
        }
        for c in 0..k {
            for c2 in 0..k {
                for ((deg, _), m) in &self.action[c][c2] {
                    if m.degree != *deg {
                        return Err(DgError::Invalid("param action degree mismatch".into()));
                    }
                    m.validate().into_result("param action morphism")?;
                }
            }
        }
        // identity acts as the identity
        for c in 0..k {
            let idm = self
                .act(c, c, 0, self.param.id_vec(c))
                .ok_or_else(|| DgError::Invalid("missing identity action".into()))?;
            if idm != BimoduleMorphism::identity(&self.slices[c]) {
                return Err(DgError::Invalid("param identity does not act as 1".into()));
            }
        }
        // functoriality on basis composites and d-compatibility
        for c in 0..k {
            for c2 in 0..k {
                for (&ud, &udim) in self.param.hom(c, c2).dims() {
                    for ui in 0..udim {
                        let u = self.param.basis_vec(c, c2, ud, ui);
                        let fu = self
                            .act(c, c2, ud, &u)
                            .ok_or_else(|| DgError::Invalid("missing action".into()))?;
                        // d F_u = F_{du}
                        let du = self.param.hom(c, c2).d(ud).mul(&u);
                        let f_du = self
                            .act(c, c2, ud + 1, &du)
                            .ok_or_else(|| DgError::Invalid("missing action".into()))?;
                        if fu.differential() != f_du {
                            return Err(DgError::Invalid("param action not d-compatible".into()));
                        }
                        for c3 in 0..k {
                            for (&vd, &vdim) in self.param.hom(c2, c3).dims() {
                                for vi in 0..vdim {
                                    let v = self.param.basis_vec(c2, c3, vd, vi);
                                    let fv = self
                                        .act(c2, c3, vd, &v)
                                        .ok_or_else(|| DgError::Invalid("missing action".into()))?;
                                    let vu = self.param.compose(c, c2, c3, vd, &v, ud, &u);
                                    let f_vu = self
                                        .act(c, c3, vd + ud, &vu)
                                        .ok_or_else(|| DgError::Invalid("missing action".into()))?;
                                    if fv.compose(&fu) != f_vu {
                                        return Err(DgError::Invalid(
                                            "param action not functorial".into(),
                                        ));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Result of an end with parameters: a functor `param -> complexes`, i.e.
/// per-object ends and induced maps for the parameter morphisms, verified
/// functorial.
pub struct ParamEndResult {
    pub ends: Vec<EndResult>,
    /// maps[c][c2][(deg, idx)] = induced graded map between end totals
    pub maps: Vec<Vec<Vec<((i32, usize), GradedMap)>>>,
}

pub fn end_with_parameters(p: &ParamBimodule, gens: &Generators) -> Result<ParamEndResult> {
    p.validate()?;
    let k = p.param.object_count();
    let ends: Vec<EndResult> = p
        .slices
        .iter()
        .map(|s| end_bimodule(s, gens))
        .collect::<Result<_>>()?;
    let mut maps = Vec::new();
    for c in 0..k {
        let mut row = Vec::new();
        for c2 in 0..k {
            let mut cell = Vec::new();
            for ((deg, idx), m) in &p.action[c][c2] {
                let induced = end_map(m, &ends[c], &ends[c2])?;
                cell.push(((*deg, *idx), induced));
            }
            row.push(cell);
        }
        maps.push(row);
    }
    let result = ParamEndResult { ends, maps };
    // functoriality of induced maps on basis composites
    for c in 0..k {
        for c2 in 0..k {
            for (&ud, &udim) in p.param.hom(c, c2).dims() {
                for ui in 0..udim {
                    let u = p.param.basis_vec(c, c2, ud, ui);
                    let mu = result.induced(p, c, c2, ud, &u)?;
                    for c3 in 0..k {
                        for (&vd, &vdim) in p.param.hom(c2, c3).dims() {
                            for vi in 0..vdim {
                                let v = p.param.basis_vec(c2, c3, vd, vi);
                                let mv = result.induced(p, c2, c3, vd, &v)?;
                                let vu = p.param.compose(c, c2, c3, vd, &v, ud, &u);
                                let mvu = result.induced(p, c, c3, vd + ud, &vu)?;
                                if mv.compose(&mu) != mvu {
                                    return Err(DgError::Invalid(
                                        "induced end maps are not functorial".into(),
                                    ));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(result)
}

impl ParamEndResult {
    /// Induced map for an arbitrary morphism vector.
    pub fn induced(
        &self,
        _p: &ParamBimodule,
        c: usize,
        c2: usize,
        deg: i32,
        v: &Matrix,
    ) -> Result<GradedMap> {
        let mut out = GradedMap::zero(&self.ends[c].total, &self.ends[c2].total, deg);
        for i in 0..v.rows {
            let coeff = v.at(i, 0);
            if coeff.is_zero() {
                continue;
            }
            let m = self.maps[c][c2]
                .iter()
                .find(|((d, j), _)| *d == deg && *j == i)
                .map(|(_, m)| m.clone())
                .ok_or_else(|| DgError::Invalid("missing induced map".into()))?;
            out = out.add(&m.scale(coeff));
        }
        Ok(out)
    }
}

/// The parameter bimodule whose ends compute the Isbell dual O(X):
/// slices `T_c(b, a) = Hom(X(a), A(b, c))`, parameter acting by
/// postcomposition.
pub fn param_isbell_o(x: &RightModule) -> Result<ParamBimodule> {
    let cat = x.cat.clone();
    let k = cat.object_count();
    let mut slices = Vec::new();
    for c in 0..k {
        let hc = RightModule::representable(&cat, c);
        slices.push(hom_integrand(x, &hc)?);
    }
    let mut action = Vec::new();
    for c in 0..k {
        let mut row = Vec::new();
        for c2 in 0..k {
            let mut cell = Vec::new();
            for (&ud, &udim) in cat.hom(c, c2).dims() {
                for ui in 0..udim {
                    let u = cat.basis_vec(c, c2, ud, ui);
                    // postcompose each component with λ_u: A(b, c) -> A(b, c2)
                    let mut m = BimoduleMorphism::zero(&slices[c], &slices[c2], ud);
                    for b in 0..k {
                        for a in 0..k {
                            let post = cat.post_mul(b, c, c2, ud, &u);
                            let lifted = crate::complex::hom_post(x.component(a), &post);
                            m.set_component(b, a, lifted);
                        }
                    }
                    cell.push(((ud, ui), m));
                }
            }
            row.push(cell);
        }
        action.push(row);
    }
    Ok(ParamBimodule {
        param: cat,
        slices,
        action,
    })
}

/// All three ends of the Fubini interchange with mutually inverse witnesses.
pub struct FubiniWitness {
    pub joint: EndResult,
    pub outer_a: EndResult,
    pub outer_b: EndResult,
    pub joint_to_a: ChainIso,
    pub joint_to_b: ChainIso,
    pub a_to_b: ChainIso,
}

/// Fubini for a bimodule over a tensor category `A ⊗ B` (objects indexed
/// `a * |B| + b`): the joint end, the iterated end over B then A, and the
/// iterated end over A then B all coincide.
pub fn fubini_witness(
    f: &Bimodule,
    a_cat: &DgCategory,
    b_cat: &DgCategory,
) -> Result<FubiniWitness> {
    square_check(f)?;
    let tens = a_cat.tensor(b_cat);
    if f.cov != tens {
        return Err(DgError::Shape(
            "fubini input must live over the tensor category".into(),
        ));
    }
    let na = a_cat.object_count();
    let nb = b_cat.object_count();
    let field = a_cat.field;
    let pair = |a: usize, b: usize| a * nb + b;
    let joint = end_bimodule(f, &all_morphisms(&tens))?;

    // inner ends over B with A-parameters
    let slice_b = |a1: usize, a2: usize| -> Result<Bimodule> {
        let comps: Vec<Vec<Complex>> = (0..nb)
            .map(|b1| {
                (0..nb)
                    .map(|b2| f.component_complex(pair(a1, b1), pair(a2, b2)).clone())
                    .collect()
            })
            .collect();
        let mut left = Vec::new();
        for b1 in 0..nb {
            let mut plane = Vec::new();
            for b2 in 0..nb {
                let mut line = Vec::new();
                for b2p in 0..nb {
                    let src = b_cat.hom(b2, b2p).tensor(&comps[b1][b2]);
                    let mut g = GradedMap::zero(&src, &comps[b1][b2p], 0);
                    let tidx = TensorIndex::new(b_cat.hom(b2, b2p), &comps[b1][b2]);
                    for &deg in src.dims().keys() {
                        if comps[b1][b2p].dim(deg) == 0 {
                            continue;
                        }
                        let mut mat = Matrix::zero(field, comps[b1][b2p].dim(deg), src.dim(deg));
                        for (ud, ui, xi) in tidx.basis(deg) {
                            let col = tidx.index(deg, ud, ui, xi);
                            let u = b_cat.basis_vec(b2, b2p, ud, ui);
                            // embed as 1_{a2} ⊗ u in the tensor category
                            let env = tensor_morphism(&tens, a_cat, b_cat, a2, a2, b2, b2p, 0, a_cat.id_vec(a2), ud, &u);
                            let mut x = Matrix::zero(field, comps[b1][b2].dim(deg - ud), 1);
                            x.set(xi, 0, field.one());
                            let out = f.act_left(pair(a1, b1), pair(a2, b2), pair(a2, b2p), ud, &env, deg - ud, &x);
                            for r in 0..out.rows {
                                let v = out.at(r, 0);
                                if !v.is_zero() {
                                    mat.set(r, col, v.clone());
                                }
                            }
                        }
                        g.set_block(deg, mat);
                    }
                    line.push(g);
                }
                plane.push(line);
            }
            left.push(plane);
        }
        let mut right = Vec::new();
        for b1 in 0..nb {
            let mut plane = Vec::new();
            for b1p in 0..nb {
                let mut line = Vec::new();
                for b2 in 0..nb {
                    let src = comps[b1][b2].tensor(b_cat.hom(b1p, b1));
                    let mut g = GradedMap::zero(&src, &comps[b1p][b2], 0);
                    let tidx = TensorIndex::new(&comps[b1][b2], b_cat.hom(b1p, b1));
                    for &deg in src.dims().keys() {
                        if comps[b1p][b2].dim(deg) == 0 {
                            continue;
                        }
                        let mut mat = Matrix::zero(field, comps[b1p][b2].dim(deg), src.dim(deg));
                        for (xd, xi, ui) in tidx.basis(deg) {
                            let col = tidx.index(deg, xd, xi, ui);
                            let ud = deg - xd;
                            let u = b_cat.basis_vec(b1p, b1, ud, ui);
                            let env = tensor_morphism(&tens, a_cat, b_cat, a1, a1, b1p, b1, 0, a_cat.id_vec(a1), ud, &u);
                            let mut x = Matrix::zero(field, comps[b1][b2].dim(xd), 1);
                            x.set(xi, 0, field.one());
                            let out = f.act_right(pair(a1, b1), pair(a1, b1p), pair(a2, b2), xd, &x, ud, &env);
                            for r in 0..out.rows {
                                let v = out.at(r, 0);
                                if !v.is_zero() {
                                    mat.set(r, col, v.clone());
                                }
                            }
                        }
                        g.set_block(deg, mat);
                    }
                    line.push(g);
                }
                plane.push(line);
            }
            right.push(plane);
        }
        Ok(Bimodule::new_unchecked(
            b_cat.clone(),
            b_cat.clone(),
            comps,
            left,
            right,
        ))
    };

    // X(a1, a2) = ∫_B F(a1, -, a2, =) assembled into an (A, A)-bimodule
    let mut inner_b: Vec<Vec<EndResult>> = Vec::new();
    let mut slices_b: Vec<Vec<Bimodule>> = Vec::new();
    for a1 in 0..na {
        let mut row = Vec::new();
        let mut row_s = Vec::new();
        for a2 in 0..na {
            let s = slice_b(a1, a2)?;
            row.push(end_bimodule(&s, &all_morphisms(b_cat))?);
            row_s.push(s);
        }
        inner_b.push(row);
        slices_b.push(row_s);
    }
    let outer_a_bim = assemble_outer(
        f, a_cat, b_cat, &inner_b, &slices_b, true,
    )?;
    outer_a_bim.validate().into_result("outer A bimodule")?;
    let outer_a = end_bimodule(&outer_a_bim, &all_morphisms(a_cat))?;

    // inner ends over A with B-parameters (roles swapped)
    let slice_a = |b1: usize, b2: usize| -> Result<Bimodule> {
        let comps: Vec<Vec<Complex>> = (0..na)
            .map(|a1| {
                (0..na)
                    .map(|a2| f.component_complex(pair(a1, b1), pair(a2, b2)).clone())
                    .collect()
            })
            .collect();
        let mut left = Vec::new();
        for a1 in 0..na {
            let mut plane = Vec::new();
            for a2 in 0..na {
                let mut line = Vec::new();
                for a2p in 0..na {
                    let src = a_cat.hom(a2, a2p).tensor(&comps[a1][a2]);
                    let mut g = GradedMap::zero(&src, &comps[a1][a2p], 0);
                    let tidx = TensorIndex::new(a_cat.hom(a2, a2p), &comps[a1][a2]);
                    for &deg in src.dims().keys() {
                        if comps[a1][a2p].dim(deg) == 0 {
                            continue;
                        }
                        let mut mat = Matrix::zero(field, comps[a1][a2p].dim(deg), src.dim(deg));
                        for (ud, ui, xi) in tidx.basis(deg) {
                            let col = tidx.index(deg, ud, ui, xi);
                            let u = a_cat.basis_vec(a2, a2p, ud, ui);
                            let env = tensor_morphism(&tens, a_cat, b_cat, a2, a2p, b2, b2, ud, &u, 0, b_cat.id_vec(b2));
                            let mut x = Matrix::zero(field, comps[a1][a2].dim(deg - ud), 1);
                            x.set(xi, 0, field.one());
                            let out = f.act_left(pair(a1, b1), pair(a2, b2), pair(a2p, b2), ud, &env, deg - ud, &x);
                            for r in 0..out.rows {
                                let v = out.at(r, 0);
                                if !v.is_zero() {
                                    mat.set(r, col, v.clone());
                                }
                            }
                        }
                        g.set_block(deg, mat);
                    }
                    line.push(g);
                }
                plane.push(line);
            }
            left.push(plane);
        }
        let mut right = Vec::new();
        for a1 in 0..na {
            let mut plane = Vec::new();
            for a1p in 0..na {
                let mut line = Vec::new();
                for a2 in 0..na {
                    let src = comps[a1][a2].tensor(a_cat.hom(a1p, a1));
                    let mut g = GradedMap::zero(&src, &comps[a1p][a2], 0);
                    let tidx = TensorIndex::new(&comps[a1][a2], a_cat.hom(a1p, a1));
                    for &deg in src.dims().keys() {
                        if comps[a1p][a2].dim(deg) == 0 {
                            continue;
                        }
                        let mut mat = Matrix::zero(field, comps[a1p][a2].dim(deg), src.dim(deg));
                        for (xd, xi, ui) in tidx.basis(deg) {
                            let col = tidx.index(deg, xd, xi, ui);
                            let ud = deg - xd;
                            let u = a_cat.basis_vec(a1p, a1, ud, ui);
                            let env = tensor_morphism(&tens, a_cat, b_cat, a1p, a1, b1, b1, ud, &u, 0, b_cat.id_vec(b1));
                            let mut x = Matrix::zero(field, comps[a1][a2].dim(xd), 1);
                            x.set(xi, 0, field.one());
                            let out = f.act_right(pair(a1, b1), pair(a1p, b1), pair(a2, b2), xd, &x, ud, &env);
                            for r in 0..out.rows {
                                let v = out.at(r, 0);
                                if !v.is_zero() {
                                    mat.set(r, col, v.clone());
                                }
                            }
                        }
                        g.set_block(deg, mat);
                    }
                    line.push(g);
                }
                plane.push(line);
            }
            right.push(plane);
        }
        Ok(Bimodule::new_unchecked(
            a_cat.clone(),
            a_cat.clone(),
            comps,
            left,
            right,
        ))
    };
    let mut inner_a: Vec<Vec<EndResult>> = Vec::new();
    let mut slices_a: Vec<Vec<Bimodule>> = Vec::new();
    for b1 in 0..nb {
        let mut row = Vec::new();
        let mut row_s = Vec::new();
        for b2 in 0..nb {
            let s = slice_a(b1, b2)?;
            row.push(end_bimodule(&s, &all_morphisms(a_cat))?);
            row_s.push(s);
        }
        inner_a.push(row);
        slices_a.push(row_s);
    }
    let outer_b_bim = assemble_outer(
        f, b_cat, a_cat, &inner_a, &slices_a, false,
    )?;
    outer_b_bim.validate().into_result("outer B bimodule")?;
    let outer_b = end_bimodule(&outer_b_bim, &all_morphisms(b_cat))?;

    // witnesses: all three totals embed into the same big product; compare
    // through composite embeddings
    let emb_a = composite_embedding(&outer_a, &inner_b, na, nb, true, &joint)?;
    let emb_b = composite_embedding(&outer_b, &inner_a, nb, na, false, &joint)?;
    let joint_to_a = subspace_iso(&joint.total, &joint.embed, &outer_a.total, &emb_a)?;
    let joint_to_b = subspace_iso(&joint.total, &joint.embed, &outer_b.total, &emb_b)?;
    let a_to_b = ChainIso {
        to: joint_to_b.to.compose(&joint_to_a.from),
        from: joint_to_a.to.compose(&joint_to_b.from),
    };
    a_to_b.verify()?;
    Ok(FubiniWitness {
        joint,
        outer_a,
        outer_b,
        joint_to_a,
        joint_to_b,
        a_to_b,
    })
}

fn tensor_morphism(
    tens: &DgCategory,
    a_cat: &DgCategory,
    b_cat: &DgCategory,
    a1: usize,
    a2: usize,
    b1: usize,
    b2: usize,
    ad: i32,
    av: &Matrix,
    bd: i32,
    bv: &Matrix,
) -> Matrix {
    let nb = b_cat.object_count();
    let from = a1 * nb + b1;
    let to = a2 * nb + b2;
    let tidx = TensorIndex::new(a_cat.hom(a1, a2), b_cat.hom(b1, b2));
    let mut out = Matrix::zero(tens.field, tens.hom(from, to).dim(ad + bd), 1);
    for ai in 0..a_cat.hom(a1, a2).dim(ad) {
        for bi in 0..b_cat.hom(b1, b2).dim(bd) {
            let coeff = av.at(ai, 0).mul(bv.at(bi, 0));
            if !coeff.is_zero() {
                out.set(tidx.index(ad + bd, ad, ai, bi), 0, coeff);
            }
        }
    }
    out
}

/// Assembles the (C, C)-bimodule of inner ends: component (c1, c2) is the
/// inner end at that pair, with actions induced through `end_map`.
fn assemble_outer(
    f: &Bimodule,
    outer_cat: &DgCategory,
    inner_cat: &DgCategory,
    inner: &[Vec<EndResult>],
    slices: &[Vec<Bimodule>],
    a_major: bool,
) -> Result<Bimodule> {
    let n = outer_cat.object_count();
    let field = outer_cat.field;
    let nb = inner_cat.object_count();
    let tens_pair = |o: usize, i: usize| if a_major { o * nb + i } else { i * n + o };
    let _ = tens_pair;
    let comps: Vec<Vec<Complex>> = (0..n)
        .map(|c1| (0..n).map(|c2| inner[c1][c2].total.clone()).collect())
        .collect();
    // left action of u: c2 -> c2': end_map of the slice morphism
    // "act by u ⊗ 1" (plain left transport on each inner component).
    let mut left = Vec::new();
    for c1 in 0..n {
        let mut plane = Vec::new();
        for c2 in 0..n {
            let mut line = Vec::new();
            for c2p in 0..n {
                let src = outer_cat.hom(c2, c2p).tensor(&comps[c1][c2]);
                let mut g = GradedMap::zero(&src, &comps[c1][c2p], 0);
                let tidx = TensorIndex::new(outer_cat.hom(c2, c2p), &comps[c1][c2]);
                for (&ud, &udim) in outer_cat.hom(c2, c2p).dims() {
                    for ui in 0..udim {
                        let u = outer_cat.basis_vec(c2, c2p, ud, ui);
                        let slice_mor = outer_left_slice_morphism(
                            f, outer_cat, inner_cat, c1, c2, c2p, ud, &u, slices, a_major,
                        )?;
                        let induced = end_map(&slice_mor, &inner[c1][c2], &inner[c1][c2p])?;
                        // write induced into the action table
                        for &deg in comps[c1][c2].dims().keys() {
                            if comps[c1][c2p].dim(deg + ud) == 0 {
                                continue;
                            }
                            let mut block = g.block(deg + ud);
                            let ind = induced.block(deg);
                            for xi in 0..comps[c1][c2].dim(deg) {
                                let col = tidx.index(deg + ud, ud, ui, xi);
                                for r in 0..comps[c1][c2p].dim(deg + ud) {
                                    block.set(r, col, ind.at(r, xi).clone());
                                }
                            }
                            g.set_block(deg + ud, block);
                        }
                    }
                }
                line.push(g);
            }
            plane.push(line);
        }
        left.push(plane);
    }
    // right action of u: c1' -> c1: end_map of the signed right transport
    let mut right = Vec::new();
    for c1 in 0..n {
        let mut plane = Vec::new();
        for c1p in 0..n {
            let mut line = Vec::new();
            for c2 in 0..n {
                let src = comps[c1][c2].tensor(outer_cat.hom(c1p, c1));
                let mut g = GradedMap::zero(&src, &comps[c1p][c2], 0);
                let tidx = TensorIndex::new(&comps[c1][c2], outer_cat.hom(c1p, c1));
                for (&ud, &udim) in outer_cat.hom(c1p, c1).dims() {
                    for ui in 0..udim {
                        let u = outer_cat.basis_vec(c1p, c1, ud, ui);
                        let slice_mor = outer_right_slice_morphism(
                            f, outer_cat, inner_cat, c1, c1p, c2, ud, &u, slices, a_major,
                        )?;
                        let induced = end_map(&slice_mor, &inner[c1][c2], &inner[c1p][c2])?;
                        for &deg in comps[c1][c2].dims().keys() {
                            if comps[c1p][c2].dim(deg + ud) == 0 {
                                continue;
                            }
                            // action notation: x·u = (-1)^{|x||u|} ⟨u⟩(x)
                            let sign = Scalar::sign(field, (deg as i64) * (ud as i64));
                            let mut block = g.block(deg + ud);
                            let ind = induced.block(deg).scale(&sign);
                            for xi in 0..comps[c1][c2].dim(deg) {
                                let col = tidx.index(deg + ud, deg, xi, ui);
                                for r in 0..comps[c1p][c2].dim(deg + ud) {
                                    block.set(r, col, ind.at(r, xi).clone());
                                }
                            }
                            g.set_block(deg + ud, block);
                        }
                    }
                }
                line.push(g);
            }
            plane.push(line);
        }
        right.push(plane);
    }
    Ok(Bimodule::new_unchecked(
        outer_cat.clone(),
        outer_cat.clone(),
        comps,
        left,
        right,
    ))
}

fn outer_left_slice_morphism(
    f: &Bimodule,
    outer_cat: &DgCategory,
    inner_cat: &DgCategory,
    c1: usize,
    c2: usize,
    c2p: usize,
    ud: i32,
    u: &Matrix,
    slices: &[Vec<Bimodule>],
    a_major: bool,
) -> Result<BimoduleMorphism> {
    let nb = inner_cat.object_count();
    let n = outer_cat.object_count();
    let pair = |o: usize, i: usize| if a_major { o * nb + i } else { i * n + o };
    let tens = f.cov.clone();
    let mut m = BimoduleMorphism::zero(&slices[c1][c2], &slices[c1][c2p], ud);
    for i1 in 0..nb {
        for i2 in 0..nb {
            // plain left action by u ⊗ 1_{i2} (outer-covariant slot)
            let env = if a_major {
                tensor_morphism(&tens, outer_cat, inner_cat, c2, c2p, i2, i2, ud, u, 0, inner_cat.id_vec(i2))
            } else {
                tensor_morphism(&tens, inner_cat, outer_cat, i2, i2, c2, c2p, 0, inner_cat.id_vec(i2), ud, u)
            };
            let tr = f.left_transport(pair(c1, i1), pair(c2, i2), pair(c2p, i2), ud, &env);
            m.set_component(i1, i2, tr);
        }
    }
    Ok(m)
}

fn outer_right_slice_morphism(
    f: &Bimodule,
    outer_cat: &DgCategory,
    inner_cat: &DgCategory,
    c1: usize,
    c1p: usize,
    c2: usize,
    ud: i32,
    u: &Matrix,
    slices: &[Vec<Bimodule>],
    a_major: bool,
) -> Result<BimoduleMorphism> {
    let nb = inner_cat.object_count();
    let n = outer_cat.object_count();
    let pair = |o: usize, i: usize| if a_major { o * nb + i } else { i * n + o };
    let tens = f.cov.clone();
    let mut m = BimoduleMorphism::zero(&slices[c1][c2], &slices[c1p][c2], ud);
    for i1 in 0..nb {
        for i2 in 0..nb {
            let env = if a_major {
                tensor_morphism(&tens, outer_cat, inner_cat, c1p, c1, i1, i1, ud, u, 0, inner_cat.id_vec(i1))
            } else {
                tensor_morphism(&tens, inner_cat, outer_cat, i1, i1, c1p, c1, 0, inner_cat.id_vec(i1), ud, u)
            };
            let tr = f.right_transport(pair(c1, i1), pair(c1p, i1), pair(c2, i2), ud, &env);
            m.set_component(i1, i2, tr);
        }
    }
    Ok(m)
}

/// The composite embedding of an iterated end into the joint ambient.
fn composite_embedding(
    outer: &EndResult,
    inner: &[Vec<EndResult>],
    n_outer: usize,
    n_inner: usize,
    a_major: bool,
    joint: &EndResult,
) -> Result<GradedMap> {
    let field = outer.total.field;
    let mut out = GradedMap::zero(&outer.total, &joint.ambient, 0);
    for &p in outer.total.dims().keys() {
        if joint.ambient.dim(p) == 0 {
            continue;
        }
        let mut m = Matrix::zero(field, joint.ambient.dim(p), outer.total.dim(p));
        let emb_outer = outer.embed.block(p);
        for col in 0..outer.total.dim(p) {
            for o in 0..n_outer {
                // the o-th diagonal block of the outer ambient is the inner
                // end total at (o, o); expand through its embedding
                let off_outer = outer.offset(o, p);
                let inner_end = &inner[o][o];
                let emb_inner = inner_end.embed.block(p);
                for k in 0..inner_end.total.dim(p) {
                    let coeff = emb_outer.at(off_outer + k, col);
                    if coeff.is_zero() {
                        continue;
                    }
                    for i in 0..n_inner {
                        let off_in = inner_end.offset(i, p);
                        let joint_obj = if a_major {
                            o * n_inner + i
                        } else {
                            i * n_outer + o
                        };
                        let off_joint = joint.offset(joint_obj, p);
                        for r in 0..inner_end.diag[i].dim(p) {
                            let v = emb_inner.at(off_in + r, k).mul(coeff);
                            if !v.is_zero() {
                                let acc = m.at(off_joint + r, col).add(&v);
                                m.set(off_joint + r, col, acc);
                            }
                        }
                    }
                }
            }
        }

        out.set_block(p, m);
    }
    Ok(out)
}

/// Mutually inverse chain maps between two complexes embedded in the same
/// ambient as equal subspaces.
fn subspace_iso(
    t1: &Complex,
    emb1: &ChainMap,
    t2: &Complex,
    emb2: &GradedMap,
) -> Result<ChainIso> {
    let _field = t1.field;
    let mut to = GradedMap::zero(t1, t2, 0);
    let mut from = GradedMap::zero(t2, t1, 0);
    for &p in t1.dims().keys() {
        if t2.dim(p) == 0 && t1.dim(p) > 0 {
            return Err(DgError::Invalid("subspace dimensions differ".into()));
        }
        let sol = emb2
            .block(p)
            .solve(&emb1.block(p))
            .ok_or_else(|| DgError::Invalid("subspaces differ".into()))?;
        to.set_block(p, sol);
    }
    for &p in t2.dims().keys() {
        if t1.dim(p) == 0 && t2.dim(p) > 0 {
            return Err(DgError::Invalid("subspace dimensions differ".into()));
        }
        let sol = emb1
            .block(p)
            .solve(&emb2.block(p))
            .ok_or_else(|| DgError::Invalid("subspaces differ".into()))?;
        from.set_block(p, sol);
    }
    let iso = ChainIso {
        to: ChainMap::new(to)?,
        from: ChainMap::new(from)?,
    };
    iso.verify()?;
    Ok(iso)
}
