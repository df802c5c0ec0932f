//! Dense exact linear algebra over the active field. Pivoting is always the
//! leftmost nonzero entry, so every computed basis is reproducible
//! bit-for-bit across runs.

use crate::error::{DgError, Result};
use crate::field::{Field, Scalar};
use std::fmt;

/// A dense matrix with exact entries, acting on column vectors.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub field: Field,
    e: Vec<Scalar>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over {}", self.rows, self.cols, self.field)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self.at(r, c).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zero(field: Field, rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            field,
            e: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: Field, n: usize) -> Matrix {
        let mut m = Matrix::zero(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_fn(field: Field, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Matrix {
        let mut e = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                e.push(f(r, c));
            }
        }
        Matrix { rows, cols, field, e }
    }

    pub fn from_i64_rows(field: Field, data: &[&[i64]]) -> Matrix {
        let rows = data.len();
        let cols = data.first().map_or(0, |r| r.len());
        Matrix::from_fn(field, rows, cols, |r, c| field.from_i64(data[r][c]))
    }

    /// Column vector from entries.
    pub fn col_vec(field: Field, entries: &[Scalar]) -> Matrix {
        Matrix::from_fn(field, entries.len(), 1, |r, _| entries[r].clone())
    }

    pub fn at(&self, r: usize, c: usize) -> &Scalar {
        &self.e[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Scalar) {
        self.e[r * self.cols + c] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.e.iter().all(|x| x.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|r| {
                (0..self.cols).all(|c| {
                    if r == c {
                        self.at(r, c).is_one()
                    } else {
                        self.at(r, c).is_zero()
                    }
                })
            })
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix::from_fn(self.field, self.rows, self.cols, |r, c| {
            self.at(r, c).add(other.at(r, c))
        })
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix::from_fn(self.field, self.rows, self.cols, |r, c| {
            self.at(r, c).sub(other.at(r, c))
        })
    }

    pub fn neg(&self) -> Matrix {
        Matrix::from_fn(self.field, self.rows, self.cols, |r, c| self.at(r, c).neg())
    }

    pub fn scale(&self, s: &Scalar) -> Matrix {
        Matrix::from_fn(self.field, self.rows, self.cols, |r, c| self.at(r, c).mul(s))
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, other.rows,
            "matrix product shape mismatch {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Matrix::zero(self.field, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.at(k, c);
                    if b.is_zero() {
                        continue;
                    }
                    let v = out.at(r, c).add(&a.mul(b));
                    out.set(r, c, v);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.field, self.cols, self.rows, |r, c| self.at(c, r).clone())
    }

    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows);
        Matrix::from_fn(self.field, self.rows, self.cols + other.cols, |r, c| {
            if c < self.cols {
                self.at(r, c).clone()
            } else {
                other.at(r, c - self.cols).clone()
            }
        })
    }

    pub fn vstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols);
        Matrix::from_fn(self.field, self.rows + other.rows, self.cols, |r, c| {
            if r < self.rows {
                self.at(r, c).clone()
            } else {
                other.at(r - self.rows, c).clone()
            }
        })
    }

    pub fn column(&self, c: usize) -> Matrix {
        Matrix::from_fn(self.field, self.rows, 1, |r, _| self.at(r, c).clone())
    }

    pub fn columns(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(self.field, self.rows, idx.len(), |r, c| self.at(r, idx[c]).clone())
    }

    /// Reduced row-echelon form with deterministic leftmost-nonzero pivoting.
    /// Returns `(rref, pivot columns, rank)`.
    pub fn rref(&self) -> (Matrix, Vec<usize>, usize) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0usize;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let piv = (row..m.rows).find(|&r| !m.at(r, col).is_zero());
            let piv = match piv {
                Some(p) => p,
                None => continue,
            };
            if piv != row {
                for c in 0..m.cols {
                    let a = m.at(row, c).clone();
                    let b = m.at(piv, c).clone();
                    m.set(row, c, b);
                    m.set(piv, c, a);
                }
            }
            let inv = m.at(row, col).inv().expect("pivot nonzero");
            for c in 0..m.cols {
                let v = m.at(row, c).mul(&inv);
                m.set(row, c, v);
            }
            for r in 0..m.rows {
                if r != row && !m.at(r, col).is_zero() {
                    let factor = m.at(r, col).clone();
                    for c in 0..m.cols {
                        let v = m.at(r, c).sub(&factor.mul(m.at(row, c)));
                        m.set(r, c, v);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        let rank = pivots.len();
        (m, pivots, rank)
    }

    pub fn rank(&self) -> usize {
        self.rref().2
    }

    /// Basis of the null space as matrix columns; `cols - rank` of them,
    /// ordered by ascending free column.
    pub fn kernel_basis(&self) -> Matrix {
        let (r, pivots, rank) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = Matrix::zero(self.field, self.cols, self.cols - rank);
        for (k, &fc) in free.iter().enumerate() {
            out.set(fc, k, self.field.one());
            for (i, &pc) in pivots.iter().enumerate() {
                out.set(pc, k, r.at(i, fc).neg());
            }
        }
        out
    }

    /// Cokernel of `self` as a linear map into `k^rows`: a projection
    /// `k^rows -> k^q` with `projection * self = 0` and a section
    /// `k^q -> k^rows` with `projection * section = id`, where
    /// `q = rows - rank`. The complement is spanned by the lexicographically
    /// first standard vectors independent of the image.
    pub fn cokernel(&self) -> (Matrix, Matrix) {
        let (_, pivots, rank) = self.transpose().rref();
        // pivot ROWS of self span the row space; for the image (column space)
        // use pivot columns of self itself.
        let (_, col_pivots, _) = self.rref();
        let img = self.columns(&col_pivots);
        let q = self.rows - rank.min(self.rows);
        debug_assert_eq!(col_pivots.len(), rank, "column pivot count equals rank");
        let _ = pivots;
        // Greedily extend the image basis by standard vectors.
        let mut ext = img.clone();
        let mut chosen = Vec::new();
        for j in 0..self.rows {
            if chosen.len() == q {
                break;
            }
            let mut cand = Matrix::zero(self.field, self.rows, 1);
            cand.set(j, 0, self.field.one());
            let trial = ext.hstack(&cand);
            if trial.rank() == ext.rank() + 1 {
                ext = trial;
                chosen.push(j);
            }
        }
        assert_eq!(chosen.len(), q, "complement extension complete");
        let mut section = Matrix::zero(self.field, self.rows, q);
        for (k, &j) in chosen.iter().enumerate() {
            section.set(j, k, self.field.one());
        }
        // ext = [img | section]; projection = last q rows of ext^{-1}.
        let inv = ext
            .inverse()
            .expect("image basis plus complement is invertible");
        let projection = Matrix::from_fn(self.field, q, self.rows, |r, c| {
            inv.at(rank + r, c).clone()
        });
        (projection, section)
    }

    /// Solves `self * x = rhs` column by column; `None` if inconsistent.
    pub fn solve(&self, rhs: &Matrix) -> Option<Matrix> {
        assert_eq!(
            self.rows, rhs.rows,
            "solve shape mismatch {}x{} vs rhs {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let aug = self.hstack(rhs);
        let (r, pivots, _) = aug.rref();
        // Any pivot in the rhs block means inconsistency.
        if pivots.iter().any(|&p| p >= self.cols) {
            return None;
        }
        let mut x = Matrix::zero(self.field, self.cols, rhs.cols);
        for (i, &p) in pivots.iter().enumerate() {
            for c in 0..rhs.cols {
                x.set(p, c, r.at(i, self.cols + c).clone());
            }
        }
        Some(x)
    }

    pub fn solve_checked(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.rows != rhs.rows {
            return Err(DgError::Shape(format!(
                "solve: {}x{} vs rhs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        self.solve(rhs)
            .ok_or_else(|| DgError::Invalid("inconsistent linear system".into()))
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let x = self.solve(&Matrix::identity(self.field, self.rows))?;
        if self.mul(&x).is_identity() {
            Some(x)
        } else {
            None
        }
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    /// Kronecker product ordered with the left factor major: entry
    /// `((ra,rb),(ca,cb))` of `a ⊗ b` is `a[ra,ca] * b[rb,cb]`.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        Matrix::from_fn(
            self.field,
            self.rows * other.rows,
            self.cols * other.cols,
            |r, c| {
                let (ra, rb) = (r / other.rows, r % other.rows);
                let (ca, cb) = (c / other.cols, c % other.cols);
                self.at(ra, ca).mul(other.at(rb, cb))
            },
        )
    }

    pub fn entries(&self) -> impl Iterator<Item = &Scalar> {
        self.e.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> Field {
        Field::Q
    }

    #[test]
    fn rref_identity() {
        let m = Matrix::identity(q(), 3);
        let (r, piv, rank) = m.rref();
        assert_eq!(rank, 3);
        assert_eq!(piv, vec![0, 1, 2]);
        assert!(r.is_identity());
    }

    #[test]
    fn rref_zero() {
        let m = Matrix::zero(q(), 2, 4);
        let (_, piv, rank) = m.rref();
        assert_eq!(rank, 0);
        assert!(piv.is_empty());
    }

    #[test]
    fn rref_rank_one() {
        let m = Matrix::from_i64_rows(q(), &[&[1, 2], &[2, 4]]);
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn kernel_identity_empty() {
        let m = Matrix::identity(q(), 4);
        assert_eq!(m.kernel_basis().cols, 0);
    }

    #[test]
    fn kernel_zero_full() {
        let m = Matrix::zero(q(), 2, 3);
        let k = m.kernel_basis();
        assert_eq!(k.cols, 3);
        assert!(m.mul(&k).is_zero());
    }

    #[test]
    fn kernel_f2_line() {
        // [[1,1]] over F2: kernel spanned by (1,1); oracle: enumerate all 4 vectors.
        let f = Field::Fp(2);
        let m = Matrix::from_i64_rows(f, &[&[1, 1]]);
        let k = m.kernel_basis();
        assert_eq!(k.cols, 1);
        assert_eq!(k.at(0, 0), &f.one());
        assert_eq!(k.at(1, 0), &f.one());
        let mut in_kernel = 0;
        for a in 0..2i64 {
            for b in 0..2i64 {
                let v = Matrix::from_i64_rows(f, &[&[a], &[b]]);
                if m.mul(&v).is_zero() {
                    in_kernel += 1;
                }
            }
        }
        assert_eq!(in_kernel, 2);
    }

    #[test]
    fn cokernel_contract() {
        for m in [
            Matrix::identity(q(), 3),
            Matrix::zero(q(), 3, 2),
            Matrix::from_i64_rows(q(), &[&[1], &[1]]),
            Matrix::from_i64_rows(q(), &[&[1, 0, 2], &[0, 1, 3], &[1, 1, 5]]),
        ] {
            let (p, s) = m.cokernel();
            assert!(p.mul(&m).is_zero(), "projection kills the image");
            assert!(p.mul(&s).is_identity(), "projection splits the section");
            assert_eq!(p.rows, m.rows - m.rank());
        }
    }

    #[test]
    fn cokernel_diagonal_line() {
        let m = Matrix::from_i64_rows(q(), &[&[1], &[1]]);
        let (p, _) = m.cokernel();
        assert_eq!(p.rows, 1);
        let diag = Matrix::from_i64_rows(q(), &[&[5], &[5]]);
        assert!(p.mul(&diag).is_zero());
    }

    #[test]
    fn cokernel_zero_is_identity_projection() {
        let m = Matrix::zero(q(), 3, 2);
        let (p, _) = m.cokernel();
        assert!(p.is_identity());
    }

    #[test]
    fn solve_cases() {
        let id = Matrix::identity(q(), 3);
        let b = Matrix::from_i64_rows(q(), &[&[4], &[5], &[6]]);
        assert_eq!(id.solve(&b).unwrap(), b);

        let z = Matrix::zero(q(), 2, 2);
        let nz = Matrix::from_i64_rows(q(), &[&[1], &[0]]);
        assert!(z.solve(&nz).is_none());

        let m = Matrix::from_i64_rows(q(), &[&[1, 1], &[0, 1]]);
        let rhs = Matrix::from_i64_rows(q(), &[&[2], &[1]]);
        let x = m.solve(&rhs).unwrap();
        assert_eq!(x, Matrix::from_i64_rows(q(), &[&[1], &[1]]));
    }

    #[test]
    fn rank_nullity_and_rref_idempotent() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for field in [Field::Q, Field::Fp(5)] {
            for _ in 0..40 {
                let rows = rng.gen_range(0..5);
                let cols = rng.gen_range(0..5);
                let m = Matrix::from_fn(field, rows, cols, |_, _| {
                    field.from_i64(rng.gen_range(-3..4))
                });
                let (r, _, rank) = m.rref();
                assert_eq!(r.rank(), rank);
                assert_eq!(m.kernel_basis().cols + rank, cols);
                assert!(m.mul(&m.kernel_basis()).is_zero());
                if rows > 0 {
                    let (p, s) = m.cokernel();
                    assert!(p.mul(&m).is_zero());
                    assert!(p.mul(&s).is_identity() || p.rows == 0);
                }
            }
        }
    }

    #[test]
    fn field_agnostic_rank_on_integer_fixture() {
        let data: &[&[i64]] = &[&[1, 2, 0], &[0, 1, 1], &[1, 3, 1]];
        let rq = Matrix::from_i64_rows(Field::Q, data).rank();
        for p in [5u64, 7, 11] {
            assert_eq!(Matrix::from_i64_rows(Field::Fp(p), data).rank(), rq);
        }
    }
}
