//! Named fixtures used across the test suite and the shipped example
//! workspaces, plus small builders for categories and functors.

use crate::complex::{Complex, GradedMap, HomIndex};
use crate::dgcat::{DgCategory, DgFunctor};
use crate::error::{DgError, Result};
use crate::field::{Field, Scalar};
use crate::linalg::Matrix;
use std::collections::BTreeMap;

/// Assembles a dg-category from named basis elements, sparse differentials
/// and a sparse composition table. Products against declared single-element
/// identities are filled in automatically unless overridden, so faulty
/// fixtures can be seeded on purpose.
pub struct CategoryBuilder {
    field: Field,
    objects: Vec<String>,
    elems: Vec<(String, String, String, i32)>, // name, from, to, degree
    diff: BTreeMap<String, Vec<(String, Scalar)>>,
    comp: BTreeMap<(String, String), Vec<(String, Scalar)>>,
    ids: BTreeMap<String, Vec<(String, Scalar)>>,
}

#[derive(Clone, Debug)]
struct ElemRef {
    from: usize,
    to: usize,
    degree: i32,
    index: usize,
}

impl CategoryBuilder {
    pub fn new(field: Field) -> CategoryBuilder {
        CategoryBuilder {
            field,
            objects: Vec::new(),
            elems: Vec::new(),
            diff: BTreeMap::new(),
            comp: BTreeMap::new(),
            ids: BTreeMap::new(),
        }
    }

    pub fn object(mut self, name: &str) -> Self {
        self.objects.push(name.to_string());
        self
    }

    pub fn elem(mut self, name: &str, from: &str, to: &str, degree: i32) -> Self {
        self.elems
            .push((name.to_string(), from.to_string(), to.to_string(), degree));
        self
    }

    pub fn d(mut self, name: &str, image: &[(&str, i64)]) -> Self {
        self.diff.insert(
            name.to_string(),
            image
                .iter()
                .map(|(n, c)| (n.to_string(), self.field.from_i64(*c)))
                .collect(),
        );
        self
    }

    /// Declares `g ∘ f` as a linear combination of named elements.
    pub fn comp(mut self, g: &str, f: &str, image: &[(&str, i64)]) -> Self {
        self.comp.insert(
            (g.to_string(), f.to_string()),
            image
                .iter()
                .map(|(n, c)| (n.to_string(), self.field.from_i64(*c)))
                .collect(),
        );
        self
    }

    pub fn id(mut self, object: &str, elem: &str) -> Self {
        self.ids.insert(
            object.to_string(),
            vec![(elem.to_string(), self.field.one())],
        );
        self
    }

    pub fn build(self) -> Result<DgCategory> {
        let field = self.field;
        let n = self.objects.len();
        let obj_index = |name: &str| -> Result<usize> {
            self.objects
                .iter()
                .position(|o| o == name)
                .ok_or_else(|| DgError::UnknownObject(name.to_string()))
        };
        // bucket elements per hom pair and degree, in declaration order
        let mut buckets: BTreeMap<(usize, usize, i32), Vec<String>> = BTreeMap::new();
        let mut refs: BTreeMap<String, ElemRef> = BTreeMap::new();
        for (name, from, to, degree) in &self.elems {
            let a = obj_index(from)?;
            let b = obj_index(to)?;
            buckets
                .entry((a, b, *degree))
                .or_default()
                .push(name.clone());
        }
        for ((a, b, degree), names) in &buckets {
            for (index, name) in names.iter().enumerate() {
                if refs
                    .insert(
                        name.clone(),
                        ElemRef {
                            from: *a,
                            to: *b,
                            degree: *degree,
                            index,
                        },
                    )
                    .is_some()
                {
                    return Err(DgError::Parse(format!("duplicate element `{name}`")));
                }
            }
        }
        let dim = |a: usize, b: usize, deg: i32| -> usize {
            buckets.get(&(a, b, deg)).map_or(0, |v| v.len())
        };
        // hom complexes
        let mut homs: Vec<Vec<Complex>> = Vec::new();
        for a in 0..n {
            let mut row = Vec::new();
            for b in 0..n {
                let mut dims = BTreeMap::new();
                let degs: Vec<i32> = buckets
                    .keys()
                    .filter(|(x, y, _)| *x == a && *y == b)
                    .map(|(_, _, d)| *d)
                    .collect();
                for &deg in &degs {
                    dims.insert(deg, dim(a, b, deg));
                }
                let mut diff = BTreeMap::new();
                for &deg in &degs {
                    if dim(a, b, deg + 1) == 0 {
                        continue;
                    }
                    let mut m = Matrix::zero(field, dim(a, b, deg + 1), dim(a, b, deg));
                    for (col, name) in buckets[&(a, b, deg)].iter().enumerate() {
                        if let Some(image) = self.diff.get(name) {
                            for (tname, coeff) in image {
                                let t = refs.get(tname).ok_or_else(|| {
                                    DgError::UnknownName(tname.clone())
                                })?;
                                if t.from != a || t.to != b || t.degree != deg + 1 {
                                    return Err(DgError::Shape(format!(
                                        "d({name}) hits `{tname}` outside hom({a},{b})^{}",
                                        deg + 1
                                    )));
                                }
                                m.set(t.index, col, coeff.clone());
                            }
                        }
                    }
                    diff.insert(deg, m);
                }
                row.push(Complex::new(field, dims, diff)?);
            }
            homs.push(row);
        }
        // identities
        let mut ids = Vec::new();
        let mut id_single: BTreeMap<usize, String> = BTreeMap::new();
        for a in 0..n {
            let combo = self.ids.get(&self.objects[a]).ok_or_else(|| {
                DgError::Parse(format!("missing identity for object `{}`", self.objects[a]))
            })?;
            let mut v = Matrix::zero(field, homs[a][a].dim(0), 1);
            for (name, coeff) in combo {
                let e = refs
                    .get(name)
                    .ok_or_else(|| DgError::UnknownName(name.clone()))?;
                if e.from != a || e.to != a || e.degree != 0 {
                    return Err(DgError::Shape(format!(
                        "identity element `{name}` is not a degree-0 endomorphism"
                    )));
                }
                v.set(e.index, 0, coeff.clone());
            }
            if combo.len() == 1 && combo[0].1.is_one() {
                id_single.insert(a, combo[0].0.clone());
            }
            ids.push(v);
        }
        // composition structure constants
        let mut comp: Vec<Vec<Vec<GradedMap>>> = Vec::new();
        for a in 0..n {
            let mut plane = Vec::new();
            for b in 0..n {
                let mut line = Vec::new();
                for c in 0..n {
                    let src = homs[b][c].tensor(&homs[a][b]);
                    line.push(GradedMap::zero(&src, &homs[a][c], 0));
                }
                plane.push(line);
            }
            comp.push(plane);
        }
        let lookup = |g: &str, f: &str| -> Option<&Vec<(String, Scalar)>> {
            self.comp.get(&(g.to_string(), f.to_string()))
        };
        for (gname, gref) in &refs {
            for (fname, fref) in &refs {
                if fref.to != gref.from {
                    continue;
                }
                let (a, b, c) = (fref.from, fref.to, gref.to);
                let explicit = lookup(gname, fname);
                let image: Vec<(String, Scalar)> = if let Some(img) = explicit {
                    img.clone()
                } else if id_single.get(&b).map(|s| s == gname).unwrap_or(false) && b == c {
                    vec![(fname.clone(), field.one())]
                } else if id_single.get(&a).map(|s| s == fname).unwrap_or(false) && a == b {
                    vec![(gname.clone(), field.one())]
                } else {
                    Vec::new()
                };
                if image.is_empty() {
                    continue;
                }
                let tensor_deg = gref.degree + fref.degree;
                let tidx = crate::complex::TensorIndex::new(&homs[b][c], &homs[a][b]);
                let col = tidx.index(tensor_deg, gref.degree, gref.index, fref.index);
                let mut block = comp[a][b][c].block(tensor_deg);
                for (tname, coeff) in &image {
                    let t = refs
                        .get(tname)
                        .ok_or_else(|| DgError::UnknownName(tname.clone()))?;
                    if t.from != a || t.to != c || t.degree != tensor_deg {
                        return Err(DgError::Shape(format!(
                            "{gname}∘{fname} hits `{tname}` of wrong shape"
                        )));
                    }
                    block.set(t.index, col, coeff.clone());
                }
                comp[a][b][c].set_block(tensor_deg, block);
            }
        }
        Ok(DgCategory::new_unchecked(field, self.objects, homs, comp, ids))
    }
}

/// Builds a dg-functor from object images and basis-element images.
pub struct FunctorBuilder {
    source: DgCategory,
    target: DgCategory,
    obj_map: BTreeMap<String, String>,
    images: BTreeMap<String, Vec<(String, Scalar)>>,
    elem_table: BTreeMap<String, (usize, usize, i32, usize)>,
    target_table: BTreeMap<String, (usize, usize, i32, usize)>,
}

impl FunctorBuilder {
    /// `source_elems` and `target_elems` name every hom basis element as
    /// (name, from, to, degree, index).
    pub fn new(
        source: &DgCategory,
        target: &DgCategory,
        source_elems: &[(&str, &str, &str, i32, usize)],
        target_elems: &[(&str, &str, &str, i32, usize)],
    ) -> Result<FunctorBuilder> {
        let mut elem_table = BTreeMap::new();
        for (name, from, to, deg, idx) in source_elems {
            elem_table.insert(
                name.to_string(),
                (source.object_index(from)?, source.object_index(to)?, *deg, *idx),
            );
        }
        let mut target_table = BTreeMap::new();
        for (name, from, to, deg, idx) in target_elems {
            target_table.insert(
                name.to_string(),
                (target.object_index(from)?, target.object_index(to)?, *deg, *idx),
            );
        }
        Ok(FunctorBuilder {
            source: source.clone(),
            target: target.clone(),
            obj_map: BTreeMap::new(),
            images: BTreeMap::new(),
            elem_table,
            target_table,
        })
    }

    pub fn object(mut self, from: &str, to: &str) -> Self {
        self.obj_map.insert(from.to_string(), to.to_string());
        self
    }

    pub fn elem(mut self, from: &str, image: &[(&str, i64)]) -> Self {
        let field = self.source.field;
        self.images.insert(
            from.to_string(),
            image
                .iter()
                .map(|(n, c)| (n.to_string(), field.from_i64(*c)))
                .collect(),
        );
        self
    }

    pub fn build(self) -> Result<DgFunctor> {
        let n = self.source.object_count();
        let mut obj_map = Vec::with_capacity(n);
        for a in 0..n {
            let to = self
                .obj_map
                .get(&self.source.objects[a])
                .ok_or_else(|| DgError::UnknownObject(self.source.objects[a].clone()))?;
            obj_map.push(self.target.object_index(to)?);
        }
        let mut blocks = Vec::new();
        for a in 0..n {
            let mut row = Vec::new();
            for b in 0..n {
                let src = self.source.hom(a, b).clone();
                let tgt = self.target.hom(obj_map[a], obj_map[b]).clone();
                let mut g = GradedMap::zero(&src, &tgt, 0);
                for (&deg, &d) in src.dims() {
                    if tgt.dim(deg) == 0 {
                        if self.has_nonzero_image(a, b, deg, d) {
                            return Err(DgError::Shape(format!(
                                "functor image out of range at hom({}, {})^{deg}",
                                self.source.objects[a], self.source.objects[b]
                            )));
                        }
                        continue;
                    }
                    let mut m = Matrix::zero(self.source.field, tgt.dim(deg), d);
                    for (name, &(ea, eb, ed, ei)) in &self.elem_table {
                        if ea != a || eb != b || ed != deg {
                            continue;
                        }
                        if let Some(image) = self.images.get(name) {
                            for (tname, coeff) in image {
                                let &(ta, tb, td, ti) =
                                    self.target_table.get(tname).ok_or_else(|| {
                                        DgError::UnknownName(tname.clone())
                                    })?;
                                if ta != obj_map[a] || tb != obj_map[b] || td != deg {
                                    return Err(DgError::Shape(format!(
                                        "image `{tname}` of `{name}` has wrong shape"
                                    )));
                                }
                                m.set(ti, ei, coeff.clone());
                            }
                        }
                    }
                    g.set_block(deg, m);
                }
                row.push(g);
            }
            blocks.push(row);
        }
        Ok(DgFunctor::new_unchecked(
            self.source,
            self.target,
            obj_map,
            blocks,
        ))
    }

    fn has_nonzero_image(&self, a: usize, b: usize, deg: i32, _d: usize) -> bool {
        self.elem_table.iter().any(|(name, &(ea, eb, ed, _))| {
            ea == a
                && eb == b
                && ed == deg
                && self
                    .images
                    .get(name)
                    .map(|img| !img.is_empty())
                    .unwrap_or(false)
        })
    }
}

/// The one-object category with hom the ground field.
pub fn pt(field: Field) -> DgCategory {
    CategoryBuilder::new(field)
        .object("*")
        .elem("1", "*", "*", 0)
        .id("*", "1")
        .build()
        .expect("pt is valid")
}

/// The A2 quiver category: objects a, b and one arrow f: a -> b.
pub fn q2(field: Field) -> DgCategory {
    CategoryBuilder::new(field)
        .object("a")
        .object("b")
        .elem("ia", "a", "a", 0)
        .elem("ib", "b", "b", 0)
        .elem("f", "a", "b", 0)
        .id("a", "ia")
        .id("b", "ib")
        .build()
        .expect("q2 is valid")
}

/// Graded dual numbers: one object, ε of degree -1 with ε² = 0, d = 0.
pub fn dual_numbers(field: Field) -> DgCategory {
    CategoryBuilder::new(field)
        .object("x")
        .elem("e", "x", "x", -1)
        .elem("1", "x", "x", 0)
        .id("x", "1")
        .build()
        .expect("dual numbers are valid")
}

/// Truncated polynomials with a degree-1 generator: 1, u, u² and u³ = 0.
pub fn poly_trunc(field: Field) -> DgCategory {
    CategoryBuilder::new(field)
        .object("x")
        .elem("1", "x", "x", 0)
        .elem("u", "x", "x", 1)
        .elem("uu", "x", "x", 2)
        .comp("u", "u", &[("uu", 1)])
        .id("x", "1")
        .build()
        .expect("truncated polynomials are valid")
}

/// Two objects joined by an acyclic hom complex: u in degree 0 with du = v.
pub fn acyclic_arrow(field: Field) -> DgCategory {
    CategoryBuilder::new(field)
        .object("p")
        .object("q")
        .elem("ip", "p", "p", 0)
        .elem("iq", "q", "q", 0)
        .elem("u", "p", "q", 0)
        .elem("v", "p", "q", 1)
        .d("u", &[("v", 1)])
        .id("p", "ip")
        .id("q", "iq")
        .build()
        .expect("acyclic arrow is valid")
}

/// Two objects with only identities.
pub fn discrete2(field: Field) -> DgCategory {
    CategoryBuilder::new(field)
        .object("u")
        .object("v")
        .elem("iu", "u", "u", 0)
        .elem("iv", "v", "v", 0)
        .id("u", "iu")
        .id("v", "iv")
        .build()
        .expect("discrete category is valid")
}

/// The full sub-dg-category of complexes spanned by the given objects:
/// homs are internal homs, composition is composition of graded maps.
pub fn dg_category_of_complexes(field: Field, complexes: &[Complex]) -> DgCategory {
    let n = complexes.len();
    let objects: Vec<String> = (0..n).map(|i| format!("C{i}")).collect();
    let homs: Vec<Vec<Complex>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| complexes[a].internal_hom(&complexes[b]))
                .collect()
        })
        .collect();
    let mut comp = Vec::new();
    for a in 0..n {
        let mut plane = Vec::new();
        for b in 0..n {
            let mut line = Vec::new();
            for c in 0..n {
                let outer = &homs[b][c];
                let inner = &homs[a][b];
                let target = &homs[a][c];
                let src = outer.tensor(inner);
                let mut g = GradedMap::zero(&src, target, 0);
                let tidx = crate::complex::TensorIndex::new(outer, inner);
                for &deg in src.dims().keys() {
                    if target.dim(deg) == 0 {
                        continue;
                    }
                    let mut m = Matrix::zero(field, target.dim(deg), src.dim(deg));
                    for (gdeg, gi, fi) in tidx.basis(deg) {
                        let col = tidx.index(deg, gdeg, gi, fi);
                        let (i2, b2, a2) =
                            HomIndex::new(&complexes[b], &complexes[c], gdeg).decompose(gi);
                        let (i1, b1, a1) =
                            HomIndex::new(&complexes[a], &complexes[b], deg - gdeg).decompose(fi);
                        // E2 ∘ E1 nonzero iff source of E2 equals target of E1
                        if i2 == i1 + (deg - gdeg) && b2 == a1 {
                            let row = HomIndex::new(&complexes[a], &complexes[c], deg)
                                .index(i1, b1, a2);
                            m.set(row, col, field.one());
                        }
                    }
                    g.set_block(deg, m);
                }
                line.push(g);
            }
            plane.push(line);
        }
        comp.push(plane);
    }
    let ids = (0..n)
        .map(|a| {
            let h = HomIndex::new(&complexes[a], &complexes[a], 0);
            let mut v = Matrix::zero(field, h.dim(), 1);
            for (&i, &d) in complexes[a].dims() {
                for k in 0..d {
                    v.set(h.index(i, k, k), 0, field.one());
                }
            }
            v
        })
        .collect();
    DgCategory::new_unchecked(field, objects, homs, comp, ids)
}

const PT_ELEMS: &[(&str, &str, &str, i32, usize)] = &[("1", "*", "*", 0, 0)];
const Q2_ELEMS: &[(&str, &str, &str, i32, usize)] = &[
    ("ia", "a", "a", 0, 0),
    ("ib", "b", "b", 0, 0),
    ("f", "a", "b", 0, 0),
];

/// The inclusion of the object a into Q2.
pub fn include_a(field: Field) -> DgFunctor {
    FunctorBuilder::new(&pt(field), &q2(field), PT_ELEMS, Q2_ELEMS)
        .unwrap()
        .object("*", "a")
        .elem("1", &[("ia", 1)])
        .build()
        .expect("include_a builds")
}

/// The inclusion of the object b into Q2.
pub fn include_b(field: Field) -> DgFunctor {
    FunctorBuilder::new(&pt(field), &q2(field), PT_ELEMS, Q2_ELEMS)
        .unwrap()
        .object("*", "b")
        .elem("1", &[("ib", 1)])
        .build()
        .expect("include_b builds")
}

/// The collapse of Q2 onto the point.
pub fn collapse(field: Field) -> DgFunctor {
    FunctorBuilder::new(&q2(field), &pt(field), Q2_ELEMS, PT_ELEMS)
        .unwrap()
        .object("a", "*")
        .object("b", "*")
        .elem("ia", &[("1", 1)])
        .elem("ib", &[("1", 1)])
        .elem("f", &[("1", 1)])
        .build()
        .expect("collapse builds")
}

/// Hom-complex isomorphisms exhibiting `include_a ⊣ collapse`.
pub fn phi_include_a_collapse(field: Field) -> Vec<Vec<GradedMap>> {
    let p = pt(field);
    let q = q2(field);
    // φ_{*,x}: q2(a, x) -> pt(*, *)
    let mut out = Vec::new();
    let mut row = Vec::new();
    for x in 0..2 {
        let src = q.hom(0, x).clone();
        let tgt = p.hom(0, 0).clone();
        let mut g = GradedMap::zero(&src, &tgt, 0);
        g.set_block(0, Matrix::from_i64_rows(field, &[&[1]]));
        let _ = x;
        row.push(g);
    }
    out.push(row);
    out
}

/// Hom-complex isomorphisms exhibiting `collapse ⊣ include_b`.
pub fn phi_collapse_include_b(field: Field) -> Vec<Vec<GradedMap>> {
    let p = pt(field);
    let q = q2(field);
    // φ_{x,*}: pt(*, *) -> q2(x, b)
    let mut out = Vec::new();
    for x in 0..2 {
        let src = p.hom(0, 0).clone();
        let tgt = q.hom(x, 1).clone();
        let mut g = GradedMap::zero(&src, &tgt, 0);
        g.set_block(0, Matrix::from_i64_rows(field, &[&[1]]));
        out.push(vec![g]);
    }
    out
}

use crate::dgmod::{
    bimodule_from_envelope, cone_of_morphism, nat_complex, right_module_over_envelope,
    right_morphism_from_nat, Bimodule, RightModule,
};
use rand::Rng;

/// Template categories used by the randomized suites.
pub fn template_categories(field: Field) -> Vec<DgCategory> {
    vec![
        pt(field),
        q2(field),
        dual_numbers(field),
        acyclic_arrow(field),
    ]
}

/// A random valid right module built from constructive operations: sums of
/// shifted representables, optionally replaced by the cone of a random
/// closed morphism between two such sums. Validity is by construction.
pub fn random_right_module(
    cat: &DgCategory,
    rng: &mut impl Rng,
    max_pieces: usize,
    max_total_dim: usize,
) -> RightModule {
    let sum_of_pieces = |rng: &mut dyn rand::RngCore| -> RightModule {
        let n = cat.object_count();
        let mut m: Option<RightModule> = None;
        let pieces = 1 + (rng.next_u32() as usize) % max_pieces;
        for _ in 0..pieces {
            let a = (rng.next_u32() as usize) % n;
            let shift = (rng.next_u32() % 3) as i32 - 1;
            let piece = RightModule::representable(cat, a).shift(shift);
            m = Some(match m {
                None => piece,
                Some(acc) => acc.direct_sum(&piece),
            });
        }
        m.expect("at least one piece")
    };
    let base = sum_of_pieces(rng);
    if rng.gen_bool(0.5) {
        let other = sum_of_pieces(rng);
        if base.total_dim() + other.total_dim() <= max_total_dim {
            // random closed degree-0 morphism other -> base
            if let Ok(nat) = nat_complex(&other, &base) {
                let z = nat.total.d(0).kernel_basis();
                if z.cols > 0 {
                    let mut combo = Matrix::zero(cat.field, z.cols, 1);
                    for i in 0..z.cols {
                        combo.set(i, 0, cat.field.from_i64(rng.gen_range(-1..2)));
                    }
                    let coords = z.mul(&combo);
                    let phi = right_morphism_from_nat(&nat, &other, &base, 0, &coords);
                    if let Ok(cone) = cone_of_morphism(&phi) {
                        if cone.total_dim() <= max_total_dim {
                            return cone;
                        }
                    }
                }
            }
        }
    }
    base
}

/// A random valid square bimodule over `cat`, built as a right module over
/// the envelope and converted back.
pub fn random_square_bimodule(
    cat: &DgCategory,
    rng: &mut impl Rng,
    max_pieces: usize,
    max_total_dim: usize,
) -> Bimodule {
    let env_cat = cat.tensor(&cat.opposite());
    let m = random_right_module(&env_cat, rng, max_pieces, max_total_dim);
    // the envelope conversion expects the module over contra ⊗ cov^op with
    // cov = contra = cat; reuse the generated module directly.
    let stub = Bimodule::diagonal(cat);
    let env_of_stub = right_module_over_envelope(&stub);
    debug_assert_eq!(env_of_stub.cat, env_cat);
    bimodule_from_envelope(&m, cat, cat)
}
