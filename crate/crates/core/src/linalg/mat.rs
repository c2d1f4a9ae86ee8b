use std::fmt;

use super::field::{FieldSpec, Scalar};

/// Dense matrix over an exact field, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct Mat {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Mat {
    pub fn zeros(field: FieldSpec, rows: usize, cols: usize) -> Self {
        Mat { field, rows, cols, data: vec![field.zero(); rows * cols] }
    }

    pub fn identity(field: FieldSpec, n: usize) -> Self {
        let mut m = Mat::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_rows(field: FieldSpec, cols: usize, rows: Vec<Vec<Scalar>>) -> Self {
        let nrows = rows.len();
        let mut data = Vec::with_capacity(nrows * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged row");
            data.extend(r);
        }
        Mat { field, rows: nrows, cols, data }
    }

    pub fn from_columns(field: FieldSpec, rows: usize, columns: &[Vec<Scalar>]) -> Self {
        let mut m = Mat::zeros(field, rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows, "column length mismatch");
            for (i, v) in c.iter().enumerate() {
                if !v.is_zero() {
                    m.set(i, j, v.clone());
                }
            }
        }
        m
    }

    pub fn from_i64(field: FieldSpec, rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows = rows.iter().map(|r| r.iter().map(|&v| field.from_i64(v)).collect()).collect();
        Mat::from_rows(field, cols, rows)
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Scalar> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<Scalar>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let v = self.get(i, j);
                if !v.is_zero() {
                    t.set(j, i, v.clone());
                }
            }
        }
        t
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let f = self.field;
        let mut out = Mat::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * out.cols + j;
                    out.data[idx] = f.add(&out.data[idx], &f.mul(a, b));
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in product");
        let f = self.field;
        let mut out = vec![f.zero(); self.rows];
        for (k, b) in v.iter().enumerate() {
            if b.is_zero() {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                let a = self.get(i, k);
                if !a.is_zero() {
                    *o = f.add(o, &f.mul(a, b));
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Mat) -> Mat {
        self.zip(other, |f, a, b| f.add(a, b))
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        self.zip(other, |f, a, b| f.sub(a, b))
    }

    pub fn scale(&self, c: &Scalar) -> Mat {
        let f = self.field;
        Mat { field: f, rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| f.mul(a, c)).collect() }
    }

    fn zip(&self, other: &Mat, op: impl Fn(&FieldSpec, &Scalar, &Scalar) -> Scalar) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        let f = self.field;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| op(&f, a, b)).collect();
        Mat { field: f, rows: self.rows, cols: self.cols, data }
    }

    /// `[self | other]`.
    pub fn hstack(&self, other: &Mat) -> Mat {
        assert_eq!(self.rows, other.rows, "row mismatch in hstack");
        let mut out = Mat::zeros(self.field, self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
            for j in 0..other.cols {
                out.set(i, self.cols + j, other.get(i, j).clone());
            }
        }
        out
    }

    /// `[self; other]`.
    pub fn vstack(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.cols, "column mismatch in vstack");
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Mat { field: self.field, rows: self.rows + other.rows, cols: self.cols, data }
    }

    /// Block-diagonal sum.
    pub fn block_diag(field: FieldSpec, blocks: &[&Mat]) -> Mat {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Mat::zeros(field, rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            out.paste(r0, c0, b);
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    /// Copies `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn paste(&mut self, r0: usize, c0: usize, block: &Mat) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                let v = block.get(i, j);
                if !v.is_zero() {
                    self.set(r0 + i, c0 + j, v.clone());
                }
            }
        }
    }

    pub fn select_columns(&self, idx: &[usize]) -> Mat {
        let mut out = Mat::zeros(self.field, self.rows, idx.len());
        for i in 0..self.rows {
            for (k, &j) in idx.iter().enumerate() {
                out.set(i, k, self.get(i, j).clone());
            }
        }
        out
    }

    /// Reduced row echelon form and the (strictly increasing) pivot columns.
    pub fn rref(&self) -> (Mat, Vec<usize>) {
        let f = self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            m.swap_rows(p, r);
            let inv = f.inv(m.get(r, c));
            if !inv.is_one() {
                for j in c..m.cols {
                    let idx = r * m.cols + j;
                    if !m.data[idx].is_zero() {
                        m.data[idx] = f.mul(&m.data[idx], &inv);
                    }
                }
            }
            let support: Vec<usize> = (c..m.cols).filter(|&j| !m.get(r, j).is_zero()).collect();
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let factor = m.get(i, c).clone();
                if factor.is_zero() {
                    continue;
                }
                for &j in &support {
                    let delta = f.mul(&factor, &m.data[r * m.cols + j]);
                    let idx = i * m.cols + j;
                    m.data[idx] = f.sub(&m.data[idx], &delta);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        // eliminate along the shorter side
        if self.rows > self.cols {
            self.transpose().rref().1.len()
        } else {
            self.rref().1.len()
        }
    }

    /// Columns form a basis of the right kernel, one per free column (in order).
    pub fn kernel_basis(&self) -> Mat {
        let f = self.field;
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|j| !pivots.contains(j)).collect();
        let mut out = Mat::zeros(f, self.cols, free.len());
        for (k, &j) in free.iter().enumerate() {
            out.set(j, k, f.one());
            for (row, &p) in pivots.iter().enumerate() {
                let v = r.get(row, j);
                if !v.is_zero() {
                    out.set(p, k, f.neg(v));
                }
            }
        }
        out
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} over {}", self.rows, self.cols, self.field)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// A quotient `k^n / S` with a complement chosen among standard basis vectors.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub ambient: usize,
    /// Standard basis indices forming the coset basis.
    pub coset: Vec<usize>,
    /// `dim × ambient`; kills `S`, identity on the coset basis.
    pub projection: Mat,
}

impl Quotient {
    pub fn dim(&self) -> usize {
        self.coset.len()
    }

    /// `ambient × dim` selection of the coset basis.
    pub fn lift(&self) -> Mat {
        let f = self.projection.field();
        let mut m = Mat::zeros(f, self.ambient, self.coset.len());
        for (k, &j) in self.coset.iter().enumerate() {
            m.set(j, k, f.one());
        }
        m
    }

    pub fn project(&self, v: &[Scalar]) -> Vec<Scalar> {
        self.projection.mul_vec(v)
    }

    /// Lifts quotient coordinates to the ambient space along the coset basis.
    pub fn lift_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        let f = self.projection.field();
        let mut out = vec![f.zero(); self.ambient];
        for (k, &j) in self.coset.iter().enumerate() {
            out[j] = v[k].clone();
        }
        out
    }
}

/// Completes the column space of `sub` (with `amb_dim` rows) to `k^amb_dim`.
pub fn image_quotient(field: FieldSpec, sub: &Mat, amb_dim: usize) -> Quotient {
    assert_eq!(sub.rows(), amb_dim, "sub must have amb_dim rows");
    let (r, pivots) = sub.transpose().rref();
    let coset: Vec<usize> = (0..amb_dim).filter(|j| !pivots.contains(j)).collect();
    let mut projection = Mat::zeros(field, coset.len(), amb_dim);
    for (k, &j) in coset.iter().enumerate() {
        projection.set(k, j, field.one());
    }
    for (t, &p) in pivots.iter().enumerate() {
        for (k, &j) in coset.iter().enumerate() {
            let v = r.get(t, j);
            if !v.is_zero() {
                projection.set(k, p, field.neg(v));
            }
        }
    }
    Quotient { ambient: amb_dim, coset, projection }
}

/// A subspace of `k^n` with a canonical (RREF) basis.
///
/// Coordinates of a member vector are read off at the pivot positions.
#[derive(Clone, Debug)]
pub struct Subspace {
    pub ambient: usize,
    /// `dim × ambient`, rows in reduced echelon form.
    pub basis: Mat,
    pub pivots: Vec<usize>,
}

impl Subspace {
    /// Span of the columns of `m`.
    pub fn from_columns(m: &Mat) -> Self {
        let (r, pivots) = m.transpose().rref();
        let keep: Vec<Vec<Scalar>> = (0..pivots.len()).map(|i| r.row(i).to_vec()).collect();
        let basis = Mat::from_rows(m.field(), m.rows(), keep);
        Subspace { ambient: m.rows(), basis, pivots }
    }

    pub fn kernel(m: &Mat) -> Self {
        Subspace::from_columns(&m.kernel_basis())
    }

    pub fn whole(field: FieldSpec, n: usize) -> Self {
        Subspace { ambient: n, basis: Mat::identity(field, n), pivots: (0..n).collect() }
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    pub fn basis_vector(&self, k: usize) -> Vec<Scalar> {
        self.basis.row(k).to_vec()
    }

    /// `ambient × dim` inclusion matrix.
    pub fn inclusion(&self) -> Mat {
        self.basis.transpose()
    }

    /// Coordinates of `v`, assuming `v` lies in the subspace.
    pub fn coords(&self, v: &[Scalar]) -> Vec<Scalar> {
        self.pivots.iter().map(|&p| v[p].clone()).collect()
    }

    /// `dim × ambient`; exact on members of the subspace.
    pub fn coords_matrix(&self) -> Mat {
        let f = self.basis.field();
        let mut m = Mat::zeros(f, self.dim(), self.ambient);
        for (k, &p) in self.pivots.iter().enumerate() {
            m.set(k, p, f.one());
        }
        m
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        let f = self.basis.field();
        let mut rest = v.to_vec();
        for (k, &p) in self.pivots.iter().enumerate() {
            let c = v[p].clone();
            if c.is_zero() {
                continue;
            }
            for (j, b) in self.basis.row(k).iter().enumerate() {
                if !b.is_zero() {
                    rest[j] = f.sub(&rest[j], &f.mul(&c, b));
                }
            }
        }
        rest.iter().all(Scalar::is_zero)
    }
}
