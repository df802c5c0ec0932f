//! Bounded cochain complexes of finite-dimensional vector spaces, graded
//! maps between them, and the closed constructions: shift, cone, tensor
//! product and internal hom.
//!
//! Conventions, fixed once for the whole crate:
//! - differentials raise degree by one and act on column vectors, so
//!   `d^n` is a `dim(n+1) x dim(n)` matrix;
//! - `d(x ⊗ y) = dx ⊗ y + (-1)^{|x|} x ⊗ dy`;
//! - `(df) = d_W ∘ f - (-1)^{|f|} f ∘ d_V` for a graded map `f: V -> W`;
//! - `cone(f)^k = V^{k+1} ⊕ W^k` with `d(v, w) = (-d v, f(v) + d w)`;
//! - tensor bases are ordered lexicographically with the left factor major,
//!   hom bases by (source degree, source index, target index).

use crate::error::{DgError, Result};
use crate::field::{Field, Scalar};
use crate::linalg::Matrix;
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq)]
pub struct Complex {
    pub field: Field,
    dims: BTreeMap<i32, usize>,
    diff: BTreeMap<i32, Matrix>,
}

impl Complex {
    pub fn new(field: Field, dims: BTreeMap<i32, usize>, diff: BTreeMap<i32, Matrix>) -> Result<Complex> {
        let dims: BTreeMap<i32, usize> = dims.into_iter().filter(|&(_, d)| d > 0).collect();
        let mut out = Complex {
            field,
            dims: dims.clone(),
            diff: BTreeMap::new(),
        };
        for (&n, m) in &diff {
            if out.dim(n) == 0 || out.dim(n + 1) == 0 {
                if !m.is_zero() {
                    return Err(DgError::Shape(format!(
                        "differential at degree {n} into a zero space is nonzero"
                    )));
                }
                continue;
            }
            if m.rows != out.dim(n + 1) || m.cols != out.dim(n) {
                return Err(DgError::Shape(format!(
                    "differential at degree {n} is {}x{}, expected {}x{}",
                    m.rows,
                    m.cols,
                    out.dim(n + 1),
                    out.dim(n)
                )));
            }
        }
        for (&n, _) in &dims {
            if out.dim(n) > 0 && out.dim(n + 1) > 0 {
                let m = diff
                    .get(&n)
                    .cloned()
                    .unwrap_or_else(|| Matrix::zero(field, out.dim(n + 1), out.dim(n)));
                out.diff.insert(n, m);
            }
        }
        Ok(out)
    }

    pub fn zero(field: Field) -> Complex {
        Complex {
            field,
            dims: BTreeMap::new(),
            diff: BTreeMap::new(),
        }
    }

    /// The unit complex: the field in degree 0.
    pub fn unit(field: Field) -> Complex {
        let mut dims = BTreeMap::new();
        dims.insert(0, 1);
        Complex::new(field, dims, BTreeMap::new()).unwrap()
    }

    /// One-dimensional space concentrated in the given degree.
    pub fn line(field: Field, degree: i32) -> Complex {
        let mut dims = BTreeMap::new();
        dims.insert(degree, 1);
        Complex::new(field, dims, BTreeMap::new()).unwrap()
    }

    pub fn dim(&self, n: i32) -> usize {
        self.dims.get(&n).copied().unwrap_or(0)
    }

    pub fn dims(&self) -> &BTreeMap<i32, usize> {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims.values().sum()
    }

    pub fn degrees(&self) -> Vec<i32> {
        self.dims.keys().copied().collect()
    }

    pub fn min_degree(&self) -> Option<i32> {
        self.dims.keys().next().copied()
    }

    pub fn max_degree(&self) -> Option<i32> {
        self.dims.keys().next_back().copied()
    }

    pub fn d(&self, n: i32) -> Matrix {
        self.diff
            .get(&n)
            .cloned()
            .unwrap_or_else(|| Matrix::zero(self.field, self.dim(n + 1), self.dim(n)))
    }

    pub fn is_zero_complex(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.dims
            .iter()
            .map(|(&n, &d)| if n.rem_euclid(2) == 0 { d as i64 } else { -(d as i64) })
            .sum()
    }

    /// Checks `d ∘ d = 0` in every degree; reports the first failing degree.
    pub fn validate(&self) -> Result<()> {
        for &n in self.dims.keys() {
            if self.dim(n + 2) > 0 && self.dim(n + 1) > 0 && self.dim(n) > 0 {
                let dd = self.d(n + 1).mul(&self.d(n));
                if !dd.is_zero() {
                    return Err(DgError::Invalid(format!(
                        "d^2 != 0: first failure at degree {n}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn shift(&self, k: i32) -> Complex {
        let dims = self.dims.iter().map(|(&n, &d)| (n - k, d)).collect();
        let sign = Scalar::sign(self.field, k as i64);
        let diff = self
            .diff
            .iter()
            .map(|(&n, m)| (n - k, m.scale(&sign)))
            .collect();
        Complex::new(self.field, dims, diff).expect("shift preserves shapes")
    }

    pub fn direct_sum(&self, other: &Complex) -> Complex {
        let mut dims = BTreeMap::new();
        for n in degree_union(&[self, other]) {
            let d = self.dim(n) + other.dim(n);
            if d > 0 {
                dims.insert(n, d);
            }
        }
        let mut diff = BTreeMap::new();
        for &n in dims.keys() {
            let rows = self.dim(n + 1) + other.dim(n + 1);
            let cols = self.dim(n) + other.dim(n);
            if rows == 0 || cols == 0 {
                continue;
            }
            let a = self.d(n);
            let b = other.d(n);
            let m = Matrix::from_fn(self.field, rows, cols, |r, c| {
                if r < a.rows && c < a.cols {
                    a.at(r, c).clone()
                } else if r >= a.rows && c >= a.cols {
                    b.at(r - a.rows, c - a.cols).clone()
                } else {
                    self.field.zero()
                }
            });
            diff.insert(n, m);
        }
        Complex::new(self.field, dims, diff).expect("sum preserves shapes")
    }

    pub fn tensor(&self, other: &Complex) -> Complex {
        let idx = TensorIndex::new(self, other);
        let mut dims = BTreeMap::new();
        let degrees = idx.degrees();
        for &n in &degrees {
            let d = idx.dim(n);
            if d > 0 {
                dims.insert(n, d);
            }
        }
        let mut diff = BTreeMap::new();
        for &n in &degrees {
            let (rows, cols) = (idx.dim(n + 1), idx.dim(n));
            if rows == 0 || cols == 0 {
                continue;
            }
            let mut m = Matrix::zero(self.field, rows, cols);
            for (i, a, b) in idx.basis(n) {
                let col = idx.index(n, i, a, b);
                // dx ⊗ y
                let dc = self.d(i);
                for a2 in 0..self.dim(i + 1) {
                    let coeff = dc.at(a2, a);
                    if !coeff.is_zero() && other.dim(n - i) > 0 {
                        let row = idx.index(n + 1, i + 1, a2, b);
                        let v = m.at(row, col).add(coeff);
                        m.set(row, col, v);
                    }
                }
                // (-1)^{|x|} x ⊗ dy
                let dd = other.d(n - i);
                let sign = Scalar::sign(self.field, i as i64);
                for b2 in 0..other.dim(n - i + 1) {
                    let coeff = dd.at(b2, b);
                    if !coeff.is_zero() {
                        let row = idx.index(n + 1, i, a, b2);
                        let v = m.at(row, col).add(&sign.mul(coeff));
                        m.set(row, col, v);
                    }
                }
            }
            diff.insert(n, m);
        }
        Complex::new(self.field, dims, diff).expect("tensor preserves shapes")
    }

    pub fn internal_hom(&self, target: &Complex) -> Complex {
        let v = self;
        let w = target;
        let mut dims = BTreeMap::new();
        let mut degs = Vec::new();
        if let (Some(vmin), Some(vmax), Some(wmin), Some(wmax)) =
            (v.min_degree(), v.max_degree(), w.min_degree(), w.max_degree())
        {
            for n in (wmin - vmax)..=(wmax - vmin) {
                degs.push(n);
            }
        }
        for &n in &degs {
            let d = HomIndex::new(v, w, n).dim();
            if d > 0 {
                dims.insert(n, d);
            }
        }
        let mut diff = BTreeMap::new();
        for &n in &degs {
            let src = HomIndex::new(v, w, n);
            let tgt = HomIndex::new(v, w, n + 1);
            if src.dim() == 0 || tgt.dim() == 0 {
                continue;
            }
            let mut m = Matrix::zero(v.field, tgt.dim(), src.dim());
            for (i, b, a) in src.basis() {
                let col = src.index(i, b, a);
                // d_W ∘ f
                let dw = w.d(i + n);
                for a2 in 0..w.dim(i + n + 1) {
                    let coeff = dw.at(a2, a);
                    if !coeff.is_zero() {
                        let row = tgt.index(i, b, a2);
                        let val = m.at(row, col).add(coeff);
                        m.set(row, col, val);
                    }
                }
                // -(-1)^{n} f ∘ d_V
                let dv = v.d(i - 1);
                let sign = Scalar::sign(v.field, n as i64).neg();
                for b2 in 0..v.dim(i - 1) {
                    let coeff = dv.at(b, b2);
                    if !coeff.is_zero() && w.dim(i + n) > 0 {
                        let row = tgt.index(i - 1, b2, a);
                        let val = m.at(row, col).add(&sign.mul(coeff));
                        m.set(row, col, val);
                    }
                }
            }
            diff.insert(n, m);
        }
        Complex::new(v.field, dims, diff).expect("hom preserves shapes")
    }

    pub fn cohomology(&self) -> CohomologyData {
        self.validate().expect("cohomology of a valid complex");
        let mut data = CohomologyData {
            field: self.field,
            h: BTreeMap::new(),
            reps: BTreeMap::new(),
            proj: BTreeMap::new(),
        };
        for &n in self.dims.keys() {
            let dn = self.d(n);
            let cycles = dn.kernel_basis(); // dim(n) x z
            let boundaries = {
                let prev = self.d(n - 1);
                let (_, piv, _) = prev.rref();
                prev.columns(&piv)
            };
            let z = cycles.cols;
            let b = boundaries.cols;
            let h = z - b;
            // choose representatives: cycle columns extending the boundary basis
            let mut span = boundaries.clone();
            let mut reps = Matrix::zero(self.field, self.dim(n), h);
            let mut found = 0;
            for c in 0..cycles.cols {
                if found == h {
                    break;
                }
                let cand = cycles.column(c);
                let trial = span.hstack(&cand);
                if trial.rank() == span.rank() + 1 {
                    for r in 0..self.dim(n) {
                        reps.set(r, found, cand.at(r, 0).clone());
                    }
                    span = trial;
                    found += 1;
                }
            }
            assert_eq!(found, h, "representative extraction complete");
            // extend [boundaries | reps] to a basis of the whole degree
            let mut full = boundaries.hstack(&reps);
            let mut fr = full.rank();
            for j in 0..self.dim(n) {
                if fr == self.dim(n) {
                    break;
                }
                let mut e = Matrix::zero(self.field, self.dim(n), 1);
                e.set(j, 0, self.field.one());
                let trial = full.hstack(&e);
                if trial.rank() == fr + 1 {
                    full = trial;
                    fr += 1;
                }
            }
            let inv = full.inverse().expect("full basis invertible");
            let proj = Matrix::from_fn(self.field, h, self.dim(n), |r, c| inv.at(b + r, c).clone());
            if h > 0 {
                data.h.insert(n, h);
            }
            data.reps.insert(n, reps);
            data.proj.insert(n, proj);
        }
        data
    }

    pub fn is_acyclic(&self) -> bool {
        self.cohomology().h.is_empty()
    }
}

fn degree_union(cs: &[&Complex]) -> Vec<i32> {
    let mut degs: Vec<i32> = cs.iter().flat_map(|c| c.degrees()).collect();
    degs.sort_unstable();
    degs.dedup();
    degs
}

/// Cohomology with deterministic representative and section data: `reps`
/// embeds H^n into the cycles, `proj` sends a cycle to its class
/// coordinates (and boundaries to zero).
#[derive(Clone, Debug, PartialEq)]
pub struct CohomologyData {
    pub field: Field,
    pub h: BTreeMap<i32, usize>,
    pub reps: BTreeMap<i32, Matrix>,
    pub proj: BTreeMap<i32, Matrix>,
}

impl CohomologyData {
    pub fn dim(&self, n: i32) -> usize {
        self.h.get(&n).copied().unwrap_or(0)
    }

    pub fn reps_at(&self, n: i32) -> Matrix {
        self.reps
            .get(&n)
            .cloned()
            .unwrap_or_else(|| Matrix::zero(self.field, 0, 0))
    }

    pub fn proj_at(&self, n: i32) -> Matrix {
        self.proj
            .get(&n)
            .cloned()
            .unwrap_or_else(|| Matrix::zero(self.field, 0, 0))
    }

    pub fn total_dim(&self) -> usize {
        self.h.values().sum()
    }
}

/// Index bookkeeping for `C ⊗ D`: degree-n basis runs over splits
/// `i + (n-i)` with `i` ascending, left index major within a split.
pub struct TensorIndex<'a> {
    pub left: &'a Complex,
    pub right: &'a Complex,
}

impl<'a> TensorIndex<'a> {
    pub fn new(left: &'a Complex, right: &'a Complex) -> Self {
        TensorIndex { left, right }
    }

    pub fn degrees(&self) -> Vec<i32> {
        let mut degs = Vec::new();
        for &i in self.left.dims().keys() {
            for &j in self.right.dims().keys() {
                degs.push(i + j);
            }
        }
        degs.sort_unstable();
        degs.dedup();
        degs
    }

    pub fn dim(&self, n: i32) -> usize {
        self.left
            .dims()
            .iter()
            .map(|(&i, &da)| da * self.right.dim(n - i))
            .sum()
    }

    pub fn index(&self, n: i32, i: i32, a: usize, b: usize) -> usize {
        let mut off = 0;
        for (&k, &da) in self.left.dims() {
            if k == i {
                break;
            }
            off += da * self.right.dim(n - k);
        }
        off + a * self.right.dim(n - i) + b
    }

    pub fn basis(&self, n: i32) -> Vec<(i32, usize, usize)> {
        let mut out = Vec::new();
        for (&i, &da) in self.left.dims() {
            let db = self.right.dim(n - i);
            for a in 0..da {
                for b in 0..db {
                    out.push((i, a, b));
                }
            }
        }
        out
    }

    pub fn decompose(&self, n: i32, mut idx: usize) -> (i32, usize, usize) {
        for (&i, &da) in self.left.dims() {
            let db = self.right.dim(n - i);
            let block = da * db;
            if idx < block {
                return (i, idx / db, idx % db);
            }
            idx -= block;
        }
        panic!("tensor index out of range");
    }
}

/// Index bookkeeping for `Hom(V, W)^n`: basis elements are elementary maps
/// `V^i -> W^{i+n}` ordered by (i, source index, target index).
pub struct HomIndex<'a> {
    pub v: &'a Complex,
    pub w: &'a Complex,
    pub n: i32,
}

impl<'a> HomIndex<'a> {
    pub fn new(v: &'a Complex, w: &'a Complex, n: i32) -> Self {
        HomIndex { v, w, n }
    }

    pub fn dim(&self) -> usize {
        self.v
            .dims()
            .iter()
            .map(|(&i, &dv)| dv * self.w.dim(i + self.n))
            .sum()
    }

    pub fn index(&self, i: i32, b: usize, a: usize) -> usize {
        let mut off = 0;
        for (&k, &dv) in self.v.dims() {
            if k == i {
                break;
            }
            off += dv * self.w.dim(k + self.n);
        }
        off + b * self.w.dim(i + self.n) + a
    }

    pub fn basis(&self) -> Vec<(i32, usize, usize)> {
        let mut out = Vec::new();
        for (&i, &dv) in self.v.dims() {
            let dw = self.w.dim(i + self.n);
            for b in 0..dv {
                for a in 0..dw {
                    out.push((i, b, a));
                }
            }
        }
        out
    }

    pub fn decompose(&self, mut idx: usize) -> (i32, usize, usize) {
        for (&i, &dv) in self.v.dims() {
            let dw = self.w.dim(i + self.n);
            let block = dv * dw;
            if idx < block {
                return (i, idx / dw, idx % dw);
            }
            idx -= block;
        }
        panic!("hom index out of range");
    }
}

/// A graded linear map of fixed degree between two complexes, stored as one
/// matrix block per source degree.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedMap {
    pub source: Complex,
    pub target: Complex,
    pub degree: i32,
    blocks: BTreeMap<i32, Matrix>,
}

impl GradedMap {
    pub fn zero(source: &Complex, target: &Complex, degree: i32) -> GradedMap {
        GradedMap {
            source: source.clone(),
            target: target.clone(),
            degree,
            blocks: BTreeMap::new(),
        }
    }

    pub fn identity(c: &Complex) -> GradedMap {
        let mut m = GradedMap::zero(c, c, 0);
        for &n in c.dims().keys() {
            m.set_block(n, Matrix::identity(c.field, c.dim(n)));
        }
        m
    }

    pub fn from_blocks(
        source: &Complex,
        target: &Complex,
        degree: i32,
        blocks: BTreeMap<i32, Matrix>,
    ) -> Result<GradedMap> {
        let mut out = GradedMap::zero(source, target, degree);
        for (n, m) in blocks {
            if m.rows != target.dim(n + degree) || m.cols != source.dim(n) {
                return Err(DgError::Shape(format!(
                    "block at degree {n} is {}x{}, expected {}x{}",
                    m.rows,
                    m.cols,
                    target.dim(n + degree),
                    source.dim(n)
                )));
            }
            out.set_block(n, m);
        }
        Ok(out)
    }

    pub fn block(&self, n: i32) -> Matrix {
        self.blocks.get(&n).cloned().unwrap_or_else(|| {
            Matrix::zero(self.source.field, self.target.dim(n + self.degree), self.source.dim(n))
        })
    }

    pub fn set_block(&mut self, n: i32, m: Matrix) {
        if m.rows == 0 || m.cols == 0 {
            return;
        }
        assert_eq!(m.rows, self.target.dim(n + self.degree), "block rows at {n}");
        assert_eq!(m.cols, self.source.dim(n), "block cols at {n}");
        self.blocks.insert(n, m);
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.values().all(|m| m.is_zero())
    }

    pub fn add(&self, other: &GradedMap) -> GradedMap {
        assert_eq!(self.degree, other.degree);
        let mut out = GradedMap::zero(&self.source, &self.target, self.degree);
        for &n in self.source.dims().keys() {
            if self.target.dim(n + self.degree) > 0 {
                out.set_block(n, self.block(n).add(&other.block(n)));
            }
        }
        out
    }

    pub fn sub(&self, other: &GradedMap) -> GradedMap {
        self.add(&other.scale(&self.source.field.one().neg()))
    }

    pub fn scale(&self, s: &Scalar) -> GradedMap {
        let mut out = GradedMap::zero(&self.source, &self.target, self.degree);
        for (&n, m) in &self.blocks {
            out.set_block(n, m.scale(s));
        }
        out
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &GradedMap) -> GradedMap {
        assert_eq!(
            other.target, self.source,
            "composition source/target mismatch"
        );
        let mut out = GradedMap::zero(&other.source, &self.target, self.degree + other.degree);
        for &n in other.source.dims().keys() {
            if self.target.dim(n + out.degree) == 0 {
                continue;
            }
            out.set_block(n, self.block(n + other.degree).mul(&other.block(n)));
        }
        out
    }

    pub fn apply(&self, degree: i32, v: &Matrix) -> Matrix {
        self.block(degree).mul(v)
    }

    /// The internal-hom differential `d_W ∘ f - (-1)^{|f|} f ∘ d_V`.
    pub fn differential(&self) -> GradedMap {
        let p = self.degree;
        let sign = Scalar::sign(self.source.field, p as i64).neg();
        let mut out = GradedMap::zero(&self.source, &self.target, p + 1);
        for &n in self.source.dims().keys() {
            if self.target.dim(n + p + 1) == 0 {
                continue;
            }
            let a = self.target.d(n + p).mul(&self.block(n));
            let b = self.block(n + 1).mul(&self.source.d(n)).scale(&sign);
            out.set_block(n, a.add(&b));
        }
        out
    }

    pub fn is_closed(&self) -> bool {
        self.differential().is_zero()
    }

    /// Tensor of graded maps with the Koszul evaluation sign:
    /// `(f ⊗ g)(x ⊗ y) = (-1)^{|g||x|} f(x) ⊗ g(y)`.
    pub fn tensor_maps(f: &GradedMap, g: &GradedMap) -> GradedMap {
        let src_left = f.source.clone();
        let src_right = g.source.clone();
        let tgt_left = f.target.clone();
        let tgt_right = g.target.clone();
        let source = src_left.tensor(&src_right);
        let target = tgt_left.tensor(&tgt_right);
        let degree = f.degree + g.degree;
        let field = source.field;
        let mut out = GradedMap::zero(&source, &target, degree);
        let sidx = TensorIndex::new(&src_left, &src_right);
        let tidx = TensorIndex::new(&tgt_left, &tgt_right);
        for &n in source.dims().keys() {
            if target.dim(n + degree) == 0 {
                continue;
            }
            let mut m = Matrix::zero(field, target.dim(n + degree), source.dim(n));
            for (i, a, b) in sidx.basis(n) {
                let col = sidx.index(n, i, a, b);
                let fb = f.block(i);
                let gb = g.block(n - i);
                let sign = Scalar::sign(field, (g.degree as i64) * (i as i64));
                for a2 in 0..tgt_left.dim(i + f.degree) {
                    let fa = fb.at(a2, a);
                    if fa.is_zero() {
                        continue;
                    }
                    for b2 in 0..tgt_right.dim(n - i + g.degree) {
                        let gbv = gb.at(b2, b);
                        if gbv.is_zero() {
                            continue;
                        }
                        let row = tidx.index(n + degree, i + f.degree, a2, b2);
                        let v = m.at(row, col).add(&sign.mul(&fa.mul(gbv)));
                        m.set(row, col, v);
                    }
                }
            }
            out.set_block(n, m);
        }
        out
    }
}

/// A closed graded map of degree zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainMap(pub GradedMap);

impl ChainMap {
    pub fn new(m: GradedMap) -> Result<ChainMap> {
        if m.degree != 0 {
            return Err(DgError::Invalid(format!(
                "chain map must have degree 0, got {}",
                m.degree
            )));
        }
        if !m.is_closed() {
            return Err(DgError::Invalid("graded map is not closed".into()));
        }
        Ok(ChainMap(m))
    }

    pub fn identity(c: &Complex) -> ChainMap {
        ChainMap(GradedMap::identity(c))
    }

    pub fn map(&self) -> &GradedMap {
        &self.0
    }

    pub fn source(&self) -> &Complex {
        &self.0.source
    }

    pub fn target(&self) -> &Complex {
        &self.0.target
    }

    pub fn block(&self, n: i32) -> Matrix {
        self.0.block(n)
    }

    pub fn compose(&self, other: &ChainMap) -> ChainMap {
        ChainMap(self.0.compose(&other.0))
    }

    pub fn is_identity_map(&self) -> bool {
        self.0.source == self.0.target
            && self
                .0
                .source
                .dims()
                .keys()
                .all(|&n| self.0.block(n).is_identity())
    }

    /// Degreewise invertibility (an isomorphism of complexes).
    pub fn is_iso(&self) -> bool {
        self.0
            .source
            .dims()
            .keys()
            .chain(self.0.target.dims().keys())
            .all(|&n| {
                self.0.source.dim(n) == self.0.target.dim(n) && self.0.block(n).is_invertible()
            })
    }

    pub fn inverse(&self) -> Option<ChainMap> {
        if !self.is_iso() {
            return None;
        }
        let mut inv = GradedMap::zero(&self.0.target, &self.0.source, 0);
        for &n in self.0.source.dims().keys() {
            inv.set_block(n, self.0.block(n).inverse()?);
        }
        Some(ChainMap(inv))
    }

    /// Induced map on cohomology, one matrix per degree.
    pub fn h_map(&self, hs: &CohomologyData, ht: &CohomologyData) -> BTreeMap<i32, Matrix> {
        let mut out = BTreeMap::new();
        let mut degs: Vec<i32> = hs.h.keys().chain(ht.h.keys()).copied().collect();
        degs.sort_unstable();
        degs.dedup();
        for n in degs {
            let m = ht.proj_at(n).mul(&self.0.block(n)).mul(&hs.reps_at(n));
            out.insert(n, m);
        }
        out
    }
}

/// Mapping cone of a chain map, with the canonical inclusion of the target
/// and projection onto the shifted source.
pub struct ConeData {
    pub cone: Complex,
    pub include_target: ChainMap,
    pub project_source: ChainMap,
}

pub fn cone(f: &ChainMap) -> ConeData {
    let v = f.source();
    let w = f.target();
    let field = v.field;
    let mut dims = BTreeMap::new();
    let mut degs: Vec<i32> = v.degrees().iter().map(|&n| n - 1).collect();
    degs.extend(w.degrees());
    degs.sort_unstable();
    degs.dedup();
    for &k in &degs {
        let d = v.dim(k + 1) + w.dim(k);
        if d > 0 {
            dims.insert(k, d);
        }
    }
    let mut diff = BTreeMap::new();
    for &k in &degs {
        let rows = v.dim(k + 2) + w.dim(k + 1);
        let cols = v.dim(k + 1) + w.dim(k);
        if rows == 0 || cols == 0 {
            continue;
        }
        let dv = v.d(k + 1);
        let dw = w.d(k);
        let fb = f.block(k + 1);
        let m = Matrix::from_fn(field, rows, cols, |r, c| {
            let vr = v.dim(k + 2);
            let vc = v.dim(k + 1);
            if r < vr && c < vc {
                dv.at(r, c).neg()
            } else if r >= vr && c < vc {
                fb.at(r - vr, c).clone()
            } else if r >= vr && c >= vc {
                dw.at(r - vr, c - vc).clone()
            } else {
                field.zero()
            }
        });
        diff.insert(k, m);
    }
    let cone_c = Complex::new(field, dims, diff).expect("cone shapes");
    // inclusion of W
    let mut inc = GradedMap::zero(w, &cone_c, 0);
    for &k in w.dims().keys() {
        let m = Matrix::from_fn(field, cone_c.dim(k), w.dim(k), |r, c| {
            if r >= v.dim(k + 1) && r - v.dim(k + 1) == c {
                field.one()
            } else {
                field.zero()
            }
        });
        inc.set_block(k, m);
    }
    // projection to V[1]
    let shifted = v.shift(1);
    let mut proj = GradedMap::zero(&cone_c, &shifted, 0);
    for &k in cone_c.dims().keys() {
        if shifted.dim(k) == 0 {
            continue;
        }
        let m = Matrix::from_fn(field, shifted.dim(k), cone_c.dim(k), |r, c| {
            if c < v.dim(k + 1) && r == c {
                field.one()
            } else {
                field.zero()
            }
        });
        proj.set_block(k, m);
    }
    ConeData {
        cone: cone_c,
        include_target: ChainMap::new(inc).expect("cone inclusion closed"),
        project_source: ChainMap::new(proj).expect("cone projection closed"),
    }
}

pub fn is_quasi_iso(f: &ChainMap) -> bool {
    let via_cone = cone(f).cone.is_acyclic();
    let hs = f.source().cohomology();
    let ht = f.target().cohomology();
    let via_h = {
        let hm = f.h_map(&hs, &ht);
        hm.iter().all(|(&n, m)| {
            m.rows == m.cols && m.is_invertible() && hs.dim(n) == ht.dim(n)
        })
    };
    assert_eq!(via_cone, via_h, "cone-acyclicity and H-bijectivity agree");
    via_cone
}

/// The hom-tensor adjunction `Hom(Z ⊗ V, W) ≅ Hom(Z, Hom(V, W))` as a pair
/// of mutually inverse chain maps (a pure reindexing of bases).
pub fn hom_tensor_adjunction(z: &Complex, v: &Complex, w: &Complex) -> (ChainMap, ChainMap) {
    let zv = z.tensor(v);
    let lhs = zv.internal_hom(w);
    let vw = v.internal_hom(w);
    let rhs = z.internal_hom(&vw);
    let field = z.field;
    let mut to = GradedMap::zero(&lhs, &rhs, 0);
    for &n in lhs.dims().keys() {
        if rhs.dim(n) == 0 {
            continue;
        }
        let src = HomIndex::new(&zv, w, n);
        let tgt = HomIndex::new(z, &vw, n);
        let tsplit = TensorIndex::new(z, v);
        let mut m = Matrix::zero(field, rhs.dim(n), lhs.dim(n));
        for (mdeg, s, a) in src.basis() {
            let col = src.index(mdeg, s, a);
            let (i, zi, vj) = tsplit.decompose(mdeg, s);
            // inner hom element: V^{m-i} -> W^{m+n}: hom degree n + i
            let inner_idx = HomIndex::new(v, w, n + i).index(mdeg - i, vj, a);
            let row = tgt.index(i, zi, inner_idx);
            m.set(row, col, field.one());
        }
        to.set_block(n, m);
    }
    let to = ChainMap::new(to).expect("currying is a chain map");
    let mut from = GradedMap::zero(&rhs, &lhs, 0);
    for &n in rhs.dims().keys() {
        if lhs.dim(n) == 0 {
            continue;
        }
        from.set_block(n, to.block(n).inverse().expect("currying invertible"));
    }
    let from = ChainMap::new(from).expect("uncurrying is a chain map");
    (to, from)
}

/// The symmetry `V ⊗ W ≅ W ⊗ V`, `x ⊗ y ↦ (-1)^{|x||y|} y ⊗ x`.
pub fn braiding(v: &Complex, w: &Complex) -> ChainMap {
    let src = v.tensor(w);
    let tgt = w.tensor(v);
    let field = v.field;
    let mut out = GradedMap::zero(&src, &tgt, 0);
    let sidx = TensorIndex::new(v, w);
    let tidx = TensorIndex::new(w, v);
    for &n in src.dims().keys() {
        let mut m = Matrix::zero(field, tgt.dim(n), src.dim(n));
        for (i, a, b) in sidx.basis(n) {
            let col = sidx.index(n, i, a, b);
            let row = tidx.index(n, n - i, b, a);
            m.set(row, col, Scalar::sign(field, (i as i64) * ((n - i) as i64)));
        }
        out.set_block(n, m);
    }
    ChainMap::new(out).expect("braiding is a chain map")
}

/// Evaluation `Hom(V, W) ⊗ V -> W`, `f ⊗ v ↦ f(v)`.
pub fn evaluation(v: &Complex, w: &Complex) -> ChainMap {
    let hom = v.internal_hom(w);
    let src = hom.tensor(v);
    let field = v.field;
    let mut out = GradedMap::zero(&src, w, 0);
    let sidx = TensorIndex::new(&hom, v);
    for &n in src.dims().keys() {
        if w.dim(n) == 0 {
            continue;
        }
        let mut m = Matrix::zero(field, w.dim(n), src.dim(n));
        for (mdeg, h, c) in sidx.basis(n) {
            let col = sidx.index(n, mdeg, h, c);
            let (i, b, a) = HomIndex::new(v, w, mdeg).decompose(h);
            // f: V^i -> W^{i+m}; applied to V^{n-m} basis c: zero unless degrees match
            if i == n - mdeg && b == c {
                m.set(a, col, field.one());
            }
        }
        out.set_block(n, m);
    }
    ChainMap::new(out).expect("evaluation is a chain map")
}

/// Postcomposition `Hom(V, W) -> Hom(V, W')`, `φ ↦ ψ ∘ φ` (no sign).
pub fn hom_post(v: &Complex, psi: &GradedMap) -> GradedMap {
    let w = &psi.source;
    let w2 = &psi.target;
    let src = v.internal_hom(w);
    let tgt = v.internal_hom(w2);
    let field = v.field;
    let mut out = GradedMap::zero(&src, &tgt, psi.degree);
    for &n in src.dims().keys() {
        if tgt.dim(n + psi.degree) == 0 {
            continue;
        }
        let sidx = HomIndex::new(v, w, n);
        let tidx = HomIndex::new(v, w2, n + psi.degree);
        let mut m = Matrix::zero(field, tgt.dim(n + psi.degree), src.dim(n));
        for (i, b, a) in sidx.basis() {
            let col = sidx.index(i, b, a);
            let pb = psi.block(i + n);
            for a2 in 0..w2.dim(i + n + psi.degree) {
                let coeff = pb.at(a2, a);
                if !coeff.is_zero() {
                    let row = tidx.index(i, b, a2);
                    m.set(row, col, coeff.clone());
                }
            }
        }
        out.set_block(n, m);
    }
    out
}

/// Precomposition `Hom(V, W) -> Hom(V', W)`, `φ ↦ φ ∘ ξ` (no sign).
pub fn hom_pre(xi: &GradedMap, w: &Complex) -> GradedMap {
    let v = &xi.target;
    let v2 = &xi.source;
    let src = v.internal_hom(w);
    let tgt = v2.internal_hom(w);
    let field = w.field;
    let mut out = GradedMap::zero(&src, &tgt, xi.degree);
    for &n in src.dims().keys() {
        if tgt.dim(n + xi.degree) == 0 {
            continue;
        }
        let sidx = HomIndex::new(v, w, n);
        let tidx = HomIndex::new(v2, w, n + xi.degree);
        let mut m = Matrix::zero(field, tgt.dim(n + xi.degree), src.dim(n));
        for (i, b, a) in sidx.basis() {
            let col = sidx.index(i, b, a);
            // (φ ∘ ξ) on V'^{i - |ξ|}: coefficient ξ[b, b']
            let xb = xi.block(i - xi.degree);
            for b2 in 0..v2.dim(i - xi.degree) {
                let coeff = xb.at(b, b2);
                if !coeff.is_zero() && w.dim(i + n) > 0 {
                    let row = tidx.index(i - xi.degree, b2, a);
                    m.set(row, col, coeff.clone());
                }
            }
        }
        out.set_block(n, m);
    }
    out
}

/// Over a field every quasi-isomorphism is a homotopy equivalence; this
/// solves for an inverse `g` and homotopies `h, k` with
/// `g f - 1 = d h + h d` and `f g - 1 = d k + k d`, exactly.
pub fn homotopy_inverse(f: &ChainMap) -> Result<(ChainMap, GradedMap, GradedMap)> {
    if !is_quasi_iso(f) {
        return Err(DgError::Invalid(
            "homotopy inverse requires a quasi-isomorphism".into(),
        ));
    }
    let v = f.source();
    let w = f.target();
    let mut sys = VarSystem::new(v.field);
    let mut degs: Vec<i32> = v.degrees();
    degs.extend(w.degrees());
    degs.sort_unstable();
    degs.dedup();
    if degs.is_empty() {
        let g = ChainMap::new(GradedMap::zero(w, v, 0))?;
        return Ok((g, GradedMap::zero(v, v, -1), GradedMap::zero(w, w, -1)));
    }
    let lo = degs[0] - 1;
    let hi = degs[degs.len() - 1] + 1;
    for n in lo..=hi {
        sys.add_var(("g", n), v.dim(n), w.dim(n));
        sys.add_var(("h", n), v.dim(n - 1), v.dim(n));
        sys.add_var(("k", n), w.dim(n - 1), w.dim(n));
    }
    for &n in &degs {
        // chain map: d_V g_n - g_{n+1} d_W = 0
        let mut eq = EqBuilder::new(v.field, v.dim(n + 1), w.dim(n));
        eq.term(&v.d(n), ("g", n), &Matrix::identity(v.field, w.dim(n)), false);
        eq.term(
            &Matrix::identity(v.field, v.dim(n + 1)),
            ("g", n + 1),
            &w.d(n),
            true,
        );
        sys.add_equation(eq);
        // g f - 1 = d_V h_n + h_{n+1} d_V  (maps V^n -> V^n)
        let mut eq = EqBuilder::new(v.field, v.dim(n), v.dim(n));
        eq.term(&Matrix::identity(v.field, v.dim(n)), ("g", n), &f.block(n), false);
        eq.term(&v.d(n - 1), ("h", n), &Matrix::identity(v.field, v.dim(n)), true);
        eq.term(&Matrix::identity(v.field, v.dim(n)), ("h", n + 1), &v.d(n), true);
        eq.rhs(&Matrix::identity(v.field, v.dim(n)));
        sys.add_equation(eq);
        // f g - 1 = d_W k_n + k_{n+1} d_W  (maps W^n -> W^n)
        let mut eq = EqBuilder::new(v.field, w.dim(n), w.dim(n));
        eq.term(&f.block(n), ("g", n), &Matrix::identity(v.field, w.dim(n)), false);
        eq.term(&w.d(n - 1), ("k", n), &Matrix::identity(v.field, w.dim(n)), true);
        eq.term(&Matrix::identity(v.field, w.dim(n)), ("k", n + 1), &w.d(n), true);
        eq.rhs(&Matrix::identity(v.field, w.dim(n)));
        sys.add_equation(eq);
    }
    let sol = sys
        .solve()
        .ok_or_else(|| DgError::Invalid("no homotopy inverse found".into()))?;
    let mut g = GradedMap::zero(w, v, 0);
    let mut h = GradedMap::zero(v, v, -1);
    let mut k = GradedMap::zero(w, w, -1);
    for &n in &degs {
        g.set_block(n, sol.get(("g", n)));
        h.set_block(n, sol.get(("h", n)));
        k.set_block(n, sol.get(("k", n)));
    }
    let g = ChainMap::new(g)?;
    Ok((g, h, k))
}

/// A linear system over matrix-valued unknowns: equations of the form
/// `Σ ± A X B = C`, flattened and solved exactly.
pub struct VarSystem {
    field: Field,
    vars: BTreeMap<(&'static str, i32), (usize, usize, usize)>, // offset, rows, cols
    total: usize,
    rows: Vec<Vec<(usize, Scalar)>>,
    rhs: Vec<Scalar>,
}

pub struct EqBuilder {
    out_rows: usize,
    out_cols: usize,
    terms: Vec<(Matrix, (&'static str, i32), Matrix, bool)>,
    rhs: Option<Matrix>,
}

impl EqBuilder {
    pub fn new(_field: Field, out_rows: usize, out_cols: usize) -> EqBuilder {
        EqBuilder {
            out_rows,
            out_cols,
            terms: Vec::new(),
            rhs: None,
        }
    }

    /// Adds a term `A X B` (or `-A X B` if `negate`).
    pub fn term(&mut self, a: &Matrix, var: (&'static str, i32), b: &Matrix, negate: bool) {
        self.terms.push((a.clone(), var, b.clone(), negate));
    }

    pub fn rhs(&mut self, c: &Matrix) {
        self.rhs = Some(c.clone());
    }
}

pub struct VarSolution {
    field: Field,
    vars: BTreeMap<(&'static str, i32), (usize, usize, usize)>,
    values: Matrix,
}

impl VarSolution {
    pub fn get(&self, var: (&'static str, i32)) -> Matrix {
        let (off, rows, cols) = self.vars[&var];
        Matrix::from_fn(self.field, rows, cols, |r, c| {
            self.values.at(off + r * cols + c, 0).clone()
        })
    }
}

impl VarSystem {
    pub fn new(field: Field) -> VarSystem {
        VarSystem {
            field,
            vars: BTreeMap::new(),
            total: 0,
            rows: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn add_var(&mut self, key: (&'static str, i32), rows: usize, cols: usize) {
        if self.vars.contains_key(&key) {
            return;
        }
        self.vars.insert(key, (self.total, rows, cols));
        self.total += rows * cols;
    }

    pub fn add_equation(&mut self, eq: EqBuilder) {
        if eq.out_rows == 0 || eq.out_cols == 0 {
            return;
        }
        for r in 0..eq.out_rows {
            for c in 0..eq.out_cols {
                let mut row: Vec<(usize, Scalar)> = Vec::new();
                for (a, var, b, negate) in &eq.terms {
                    let (off, vr, vc) = self.vars[var];
                    if vr == 0 || vc == 0 {
                        continue;
                    }
                    for i in 0..vr {
                        let ar = a.at(r, i);
                        if ar.is_zero() {
                            continue;
                        }
                        for j in 0..vc {
                            let bc = b.at(j, c);
                            if bc.is_zero() {
                                continue;
                            }
                            let mut coeff = ar.mul(bc);
                            if *negate {
                                coeff = coeff.neg();
                            }
                            row.push((off + i * vc + j, coeff));
                        }
                    }
                }
                let rhs = eq
                    .rhs
                    .as_ref()
                    .map(|m| m.at(r, c).clone())
                    .unwrap_or_else(|| self.field.zero());
                self.rows.push(row);
                self.rhs.push(rhs);
            }
        }
    }

    pub fn solve(&self) -> Option<VarSolution> {
        let mut m = Matrix::zero(self.field, self.rows.len(), self.total);
        for (r, row) in self.rows.iter().enumerate() {
            for (c, coeff) in row {
                let v = m.at(r, *c).add(coeff);
                m.set(r, *c, v);
            }
        }
        let rhs = Matrix::col_vec(self.field, &self.rhs);
        let x = m.solve(&rhs)?;
        Some(VarSolution {
            field: self.field,
            vars: self.vars.clone(),
            values: x,
        })
    }

    /// All solutions of the homogeneous system: returns the kernel basis of
    /// the flattened constraint matrix, along with variable layout.
    pub fn nullspace(&self) -> (Matrix, BTreeMap<(&'static str, i32), (usize, usize, usize)>) {
        let mut m = Matrix::zero(self.field, self.rows.len(), self.total);
        for (r, row) in self.rows.iter().enumerate() {
            for (c, coeff) in row {
                let v = m.at(r, *c).add(coeff);
                m.set(r, *c, v);
            }
        }
        (m.kernel_basis(), self.vars.clone())
    }
}
