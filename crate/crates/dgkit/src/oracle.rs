//! Brute-force cross-checks for ends and coends, kept independent of the
//! optimized constructions: constraints run over every basis morphism of
//! every hom (identities and composites included), assembled directly on
//! the full product without the shared subcomplex machinery.

use crate::dgmod::Bimodule;
use crate::error::{DgError, Result};
use crate::field::Scalar;
use crate::linalg::Matrix;
use std::collections::BTreeMap;

/// Full-constraint end data: per-degree kernel bases of the complete wedge
/// system inside `⊕_A F(A,A)`.
pub struct EndOracle {
    pub dims: BTreeMap<i32, usize>,
    pub kernels: BTreeMap<i32, Matrix>,
}

/// Full-relation coend data: per-degree images of the complete relation map
/// inside `⊕_A F(A,A)`, and the quotient dimensions.
pub struct CoendOracle {
    pub dims: BTreeMap<i32, usize>,
    pub relation_images: BTreeMap<i32, Matrix>,
}

fn diag_dims(f: &Bimodule) -> (Vec<Vec<(i32, usize)>>, BTreeMap<i32, usize>) {
    let n = f.cov.object_count();
    let mut per = Vec::new();
    let mut total: BTreeMap<i32, usize> = BTreeMap::new();
    for a in 0..n {
        let mut row = Vec::new();
        for (&p, &d) in f.component_complex(a, a).dims() {
            row.push((p, d));
            *total.entry(p).or_insert(0) += d;
        }
        per.push(row);
    }
    (per, total)
}

fn offset(f: &Bimodule, a: usize, p: i32) -> usize {
    (0..a).map(|x| f.component_complex(x, x).dim(p)).sum()
}

pub fn end_oracle(f: &Bimodule) -> Result<EndOracle> {
    if f.cov != f.contra {
        return Err(DgError::Shape("end oracle needs a square bimodule".into()));
    }
    let cat = &f.cov;
    let n = cat.object_count();
    let field = cat.field;
    let (_, totals) = diag_dims(f);
    let mut dims = BTreeMap::new();
    let mut kernels = BTreeMap::new();
    for (&p, &amb_dim) in &totals {
        // one block of rows per (a, a2, basis morphism)
        let mut rows: Vec<Vec<Scalar>> = Vec::new();
        for a in 0..n {
            for a2 in 0..n {
                for (&fd, &fdim) in cat.hom(a, a2).dims() {
                    for fi in 0..fdim {
                        let fv = cat.basis_vec(a, a2, fd, fi);
                        let out_dim = f.component_complex(a, a2).dim(p + fd);
                        if out_dim == 0 {
                            continue;
                        }
                        let sign = Scalar::sign(field, (fd as i64) * (p as i64));
                        let mut block = vec![vec![field.zero(); amb_dim]; out_dim];
                        // f · φ_a
                        for xi in 0..f.component_complex(a, a).dim(p) {
                            let mut x =
                                Matrix::zero(field, f.component_complex(a, a).dim(p), 1);
                            x.set(xi, 0, field.one());
                            let fx = f.act_left(a, a, a2, fd, &fv, p, &x);
                            for r in 0..fx.rows {
                                block[r][offset(f, a, p) + xi] =
                                    block[r][offset(f, a, p) + xi].add(fx.at(r, 0));
                            }
                        }
                        // -(-1)^{|f| p} φ_{a2} · f
                        for xi in 0..f.component_complex(a2, a2).dim(p) {
                            let mut x =
                                Matrix::zero(field, f.component_complex(a2, a2).dim(p), 1);
                            x.set(xi, 0, field.one());
                            let xf = f.act_right(a2, a, a2, p, &x, fd, &fv);
                            for r in 0..xf.rows {
                                let v = xf.at(r, 0).mul(&sign);
                                block[r][offset(f, a2, p) + xi] =
                                    block[r][offset(f, a2, p) + xi].sub(&v);
                            }
                        }
                        rows.extend(block);
                    }
                }
            }
        }
        let m = Matrix::from_fn(field, rows.len(), amb_dim, |r, c| rows[r][c].clone());
        let k = m.kernel_basis();
        if k.cols > 0 {
            dims.insert(p, k.cols);
        }
        kernels.insert(p, k);
    }
    Ok(EndOracle { dims, kernels })
}

pub fn coend_oracle(f: &Bimodule) -> Result<CoendOracle> {
    if f.cov != f.contra {
        return Err(DgError::Shape("coend oracle needs a square bimodule".into()));
    }
    let cat = &f.cov;
    let n = cat.object_count();
    let field = cat.field;
    let (_, totals) = diag_dims(f);
    let mut dims = BTreeMap::new();
    let mut relation_images = BTreeMap::new();
    for (&p, &amb_dim) in &totals {
        let mut cols: Vec<Vec<Scalar>> = Vec::new();
        for a1 in 0..n {
            for a2 in 0..n {
                for (&fd, &fdim) in cat.hom(a2, a1).dims() {
                    let xd = p - fd;
                    for fi in 0..fdim {
                        let fv = cat.basis_vec(a2, a1, fd, fi);
                        for xi in 0..f.component_complex(a1, a2).dim(xd) {
                            let mut x =
                                Matrix::zero(field, f.component_complex(a1, a2).dim(xd), 1);
                            x.set(xi, 0, field.one());
                            let mut col = vec![field.zero(); amb_dim];
                            let fx = f.act_left(a1, a2, a1, fd, &fv, xd, &x);
                            for r in 0..fx.rows {
                                col[offset(f, a1, p) + r] =
                                    col[offset(f, a1, p) + r].add(fx.at(r, 0));
                            }
                            let xf = f.act_right(a1, a2, a2, xd, &x, fd, &fv);
                            let sign = Scalar::sign(field, (fd as i64) * (xd as i64)).neg();
                            for r in 0..xf.rows {
                                col[offset(f, a2, p) + r] =
                                    col[offset(f, a2, p) + r].add(&xf.at(r, 0).mul(&sign));
                            }
                            cols.push(col);
                        }
                    }
                }
            }
        }
        let m = Matrix::from_fn(field, amb_dim, cols.len(), |r, c| cols[c][r].clone());
        let rank = m.rank();
        if amb_dim - rank > 0 {
            dims.insert(p, amb_dim - rank);
        }
        relation_images.insert(p, m);
    }
    Ok(CoendOracle {
        dims,
        relation_images,
    })
}

/// Two column spans are equal iff each solves for the other.
pub fn same_span(a: &Matrix, b: &Matrix) -> bool {
    if a.rows != b.rows {
        return false;
    }
    a.solve(b).is_some() && b.solve(a).is_some()
}
