//! Dense matrices over the coefficient field or the Laurent ring, plus the
//! field-level linear algebra (echelon forms, kernels, semilinear fixed
//! spaces) everything downstream leans on.

use crate::arith::{ArithError, FieldElem, FieldTower, LaurentPoly};

/// Minimal ring interface; elements carry their own context, so zero/one are
/// derived from an exemplar rather than a static constant.
pub trait RingElem: Clone + PartialEq + std::fmt::Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn radd(&self, rhs: &Self) -> Self;
    fn rsub(&self, rhs: &Self) -> Self;
    fn rmul(&self, rhs: &Self) -> Self;
    fn rneg(&self) -> Self;
    fn is_zero_elem(&self) -> bool;
}

impl RingElem for FieldElem {
    fn zero_like(&self) -> Self {
        crate::arith::zero_with_ctx(self.ctx().clone())
    }
    fn one_like(&self) -> Self {
        crate::arith::one_with_ctx(self.ctx().clone())
    }
    fn radd(&self, rhs: &Self) -> Self {
        self.add(rhs)
    }
    fn rsub(&self, rhs: &Self) -> Self {
        self.sub(rhs)
    }
    fn rmul(&self, rhs: &Self) -> Self {
        self.mul(rhs)
    }
    fn rneg(&self) -> Self {
        self.neg()
    }
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
}

impl RingElem for LaurentPoly {
    fn zero_like(&self) -> Self {
        LaurentPoly::zero_like(self)
    }
    fn one_like(&self) -> Self {
        LaurentPoly::one_like(self)
    }
    fn radd(&self, rhs: &Self) -> Self {
        self.add(rhs)
    }
    fn rsub(&self, rhs: &Self) -> Self {
        self.sub(rhs)
    }
    fn rmul(&self, rhs: &Self) -> Self {
        self.mul(rhs)
    }
    fn rneg(&self) -> Self {
        self.neg()
    }
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct Mat<T> {
    nrows: usize,
    ncols: usize,
    data: Vec<T>,
}

impl<T: std::fmt::Debug> std::fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "[")?;
        for i in 0..self.nrows {
            writeln!(f, "  {:?}", &self.data[i * self.ncols..(i + 1) * self.ncols])?;
        }
        write!(f, "]")
    }
}

impl<T: Clone> Mat<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == ncols), "ragged rows");
        Mat { nrows, ncols, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(nrows * ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                data.push(f(i, j));
            }
        }
        Mat { nrows, ncols, data }
    }

    pub fn filled(nrows: usize, ncols: usize, v: T) -> Self {
        Mat { nrows, ncols, data: vec![v; nrows * ncols] }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.ncols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.ncols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    /// All entries in row-major order.
    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.nrows).map(|i| self.at(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.ncols, self.nrows, |i, j| self.at(j, i).clone())
    }

    pub fn map<U: Clone>(&self, mut f: impl FnMut(&T) -> U) -> Mat<U> {
        Mat {
            nrows: self.nrows,
            ncols: self.ncols,
            data: self.data.iter().map(|x| f(x)).collect(),
        }
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Mat::from_fn(rows.len(), cols.len(), |i, j| self.at(rows[i], cols[j]).clone())
    }

    pub fn hstack(&self, rhs: &Self) -> Self {
        assert_eq!(self.nrows, rhs.nrows);
        Mat::from_fn(self.nrows, self.ncols + rhs.ncols, |i, j| {
            if j < self.ncols {
                self.at(i, j).clone()
            } else {
                rhs.at(i, j - self.ncols).clone()
            }
        })
    }
}

impl<T: RingElem> Mat<T> {
    pub fn zero_like(nrows: usize, ncols: usize, exemplar: &T) -> Self {
        Mat::filled(nrows, ncols, exemplar.zero_like())
    }

    pub fn identity_like(n: usize, exemplar: &T) -> Self {
        let z = exemplar.zero_like();
        let o = exemplar.one_like();
        Mat::from_fn(n, n, |i, j| if i == j { o.clone() } else { z.clone() })
    }

    /// Some entry to clone context from; matrices here are never 0×0.
    pub fn exemplar(&self) -> &T {
        &self.data[0]
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (rhs.nrows, rhs.ncols));
        Mat::from_fn(self.nrows, self.ncols, |i, j| self.at(i, j).radd(rhs.at(i, j)))
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (rhs.nrows, rhs.ncols));
        Mat::from_fn(self.nrows, self.ncols, |i, j| self.at(i, j).rsub(rhs.at(i, j)))
    }

    pub fn neg(&self) -> Self {
        self.map(|x| x.rneg())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.ncols, rhs.nrows, "dimension mismatch");
        let z = self.data[0].zero_like();
        Mat::from_fn(self.nrows, rhs.ncols, |i, j| {
            let mut acc = z.clone();
            for k in 0..self.ncols {
                acc = acc.radd(&self.at(i, k).rmul(rhs.at(k, j)));
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.ncols, v.len());
        let z = self.data[0].zero_like();
        (0..self.nrows)
            .map(|i| {
                let mut acc = z.clone();
                for k in 0..self.ncols {
                    acc = acc.radd(&self.at(i, k).rmul(&v[k]));
                }
                acc
            })
            .collect()
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|x| x.rmul(c))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero_elem())
    }

    /// Determinant by expansion over column subsets; exact in any commutative
    /// ring, intended for small n.
    pub fn det(&self) -> T {
        assert_eq!(self.nrows, self.ncols, "determinant of a square matrix");
        assert!(!self.data.is_empty());
        let n = self.nrows;
        let z = self.data[0].zero_like();
        // dp[mask] = det of rows 0..popcount(mask), columns in mask
        let mut dp: Vec<Option<T>> = vec![None; 1 << n];
        dp[0] = Some(self.data[0].one_like());
        for mask in 1usize..(1 << n) {
            let r = mask.count_ones() as usize - 1;
            let mut acc = z.clone();
            // expanding along row r: cofactor sign is (-1)^{r + column position}
            let mut sign_pos = r % 2 == 0;
            for j in 0..n {
                if mask & (1 << j) == 0 {
                    continue;
                }
                let sub = dp[mask ^ (1 << j)].as_ref().unwrap();
                let term = self.at(r, j).rmul(sub);
                acc = if sign_pos { acc.radd(&term) } else { acc.rsub(&term) };
                sign_pos = !sign_pos;
            }
            dp[mask] = Some(acc);
        }
        dp[(1 << n) - 1].take().unwrap()
    }

    /// Adjugate matrix: adj·A = det(A)·I.
    pub fn adjugate(&self) -> Self {
        assert_eq!(self.nrows, self.ncols);
        let n = self.nrows;
        if n == 1 {
            return Mat::identity_like(1, &self.data[0]);
        }
        let idx: Vec<usize> = (0..n).collect();
        Mat::from_fn(n, n, |i, j| {
            // adj[i][j] = (-1)^{i+j}·minor(j, i)
            let rows: Vec<usize> = idx.iter().copied().filter(|&r| r != j).collect();
            let cols: Vec<usize> = idx.iter().copied().filter(|&c| c != i).collect();
            let m = self.submatrix(&rows, &cols).det();
            if (i + j) % 2 == 0 {
                m
            } else {
                m.rneg()
            }
        })
    }
}

// ---------------------------------------------------------------------------
// linear algebra over the coefficient field
// ---------------------------------------------------------------------------

pub type FMat = Mat<FieldElem>;

impl FMat {
    /// Reduced row echelon form; returns (rref, pivot column indices).
    pub fn rref(&self) -> (FMat, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0usize;
        for c in 0..m.ncols {
            if r == m.nrows {
                break;
            }
            let Some(pr) = (r..m.nrows).find(|&i| !m.at(i, c).is_zero()) else {
                continue;
            };
            for j in 0..m.ncols {
                let tmp = m.at(r, j).clone();
                m.set(r, j, m.at(pr, j).clone());
                m.set(pr, j, tmp);
            }
            let inv = m.at(r, c).inv().expect("pivot is nonzero");
            for j in 0..m.ncols {
                m.set(r, j, m.at(r, j).mul(&inv));
            }
            for i in 0..m.nrows {
                if i != r && !m.at(i, c).is_zero() {
                    let f = m.at(i, c).clone();
                    for j in 0..m.ncols {
                        let v = m.at(i, j).sub(&f.mul(m.at(r, j)));
                        m.set(i, j, v);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel, deterministic: one vector per free column in
    /// ascending order, with a 1 in the free position.
    pub fn kernel_basis(&self) -> Vec<Vec<FieldElem>> {
        let (r, pivots) = self.rref();
        let z = self.data[0].zero_like();
        let o = self.data[0].one_like();
        let mut out = Vec::new();
        for c in 0..self.ncols {
            if pivots.contains(&c) {
                continue;
            }
            let mut v = vec![z.clone(); self.ncols];
            v[c] = o.clone();
            for (ri, &pc) in pivots.iter().enumerate() {
                if pc < c {
                    v[pc] = r.at(ri, c).neg();
                }
            }
            out.push(v);
        }
        out
    }

    /// One solution of A·x = b, if any.
    pub fn solve(&self, b: &[FieldElem]) -> Option<Vec<FieldElem>> {
        assert_eq!(b.len(), self.nrows);
        let bcol = Mat::from_fn(self.nrows, 1, |i, _| b[i].clone());
        let (r, pivots) = self.hstack(&bcol).rref();
        if pivots.contains(&self.ncols) {
            return None; // pivot in the augmented column
        }
        let z = self.data[0].zero_like();
        let mut x = vec![z; self.ncols];
        for (ri, &pc) in pivots.iter().enumerate() {
            x[pc] = r.at(ri, self.ncols).clone();
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<FMat> {
        assert_eq!(self.nrows, self.ncols);
        let n = self.nrows;
        let aug = self.hstack(&Mat::identity_like(n, &self.data[0]));
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(Mat::from_fn(n, n, |i, j| r.at(i, n + j).clone()))
    }

    pub fn is_invertible(&self) -> bool {
        self.nrows == self.ncols && self.rank() == self.nrows
    }

    /// Entrywise σ^k.
    pub fn sigma(&self, k: i64) -> FMat {
        self.map(|x| x.sigma(k))
    }

    /// Pivot rows of the column space: row indices where a column echelon
    /// form steps down. Complements give a basis of the cokernel.
    pub fn pivot_rows(&self) -> Vec<usize> {
        let (_, pivots) = self.transpose().rref();
        pivots
    }
}

// ---------------------------------------------------------------------------
// semilinear maps v ↦ A·σ^k(v)
// ---------------------------------------------------------------------------

/// A σ-semilinear endomorphism of a finite-dimensional coefficient space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Semilinear {
    pub mat: FMat,
    pub twist: i64,
}

impl Semilinear {
    pub fn new(mat: FMat, twist: i64) -> Self {
        Semilinear { mat, twist }
    }

    pub fn identity_like(n: usize, exemplar: &FieldElem) -> Self {
        Semilinear { mat: Mat::identity_like(n, exemplar), twist: 0 }
    }

    pub fn apply(&self, v: &[FieldElem]) -> Vec<FieldElem> {
        let tv: Vec<FieldElem> = v.iter().map(|x| x.sigma(self.twist)).collect();
        self.mat.mul_vec(&tv)
    }

    /// self ∘ rhs.
    pub fn compose(&self, rhs: &Semilinear) -> Semilinear {
        Semilinear {
            mat: self.mat.mul(&rhs.mat.sigma(self.twist)),
            twist: self.twist + rhs.twist,
        }
    }

    pub fn is_bijective(&self) -> bool {
        self.mat.is_invertible()
    }

    /// Inverse semilinear map, when the matrix is invertible.
    pub fn inverse(&self) -> Option<Semilinear> {
        let inv = self.mat.inverse()?;
        Some(Semilinear { mat: inv.sigma(-self.twist), twist: -self.twist })
    }
}

/// F_q-basis of the fixed space {x : A·σ^{k}(x) = x} inside F_{q^m}^r,
/// computed by viewing the space as an F_q-vector space of dimension rm.
pub fn semilinear_fixed_space(
    map: &Semilinear,
    tower: &FieldTower,
) -> Result<Vec<Vec<FieldElem>>, ArithError> {
    let r = map.mat.nrows();
    assert_eq!(map.mat.ncols(), r);
    let m = tower.m() as usize;
    let g = FieldElem::generator(tower, tower.degree())?;
    let zero = FieldElem::zero(tower);
    // columns of the F_q-linear map x ↦ A·σ^k(x) − x on basis G^j·e_i
    let mut cols: Vec<Vec<FieldElem>> = Vec::with_capacity(r * m);
    let mut basis_vectors: Vec<Vec<FieldElem>> = Vec::with_capacity(r * m);
    for i in 0..r {
        for j in 0..m {
            let gj = g.pow(j as i64)?;
            let mut v = vec![zero.clone(); r];
            v[i] = gj;
            let mut w = map.apply(&v);
            for (wi, vi) in w.iter_mut().zip(&v) {
                *wi = wi.sub(vi);
            }
            // flatten to F_q coordinates
            let mut col = Vec::with_capacity(r * m);
            for entry in &w {
                col.extend(entry.scalar_coords(tower)?);
            }
            cols.push(col);
            basis_vectors.push(v);
        }
    }
    let big = Mat::from_fn(r * m, r * m, |a, b| cols[b][a].clone());
    let kernel = big.kernel_basis();
    let mut out = Vec::with_capacity(kernel.len());
    for kv in kernel {
        let mut x = vec![zero.clone(); r];
        for (c, bv) in kv.iter().zip(&basis_vectors) {
            if c.is_zero() {
                continue;
            }
            for (xi, bvi) in x.iter_mut().zip(bv) {
                *xi = xi.add(&c.mul(bvi));
            }
        }
        out.push(x);
    }
    Ok(out)
}

/// Normalize a nonzero vector so its first nonzero entry is 1; lines compare
/// equal iff they span the same subspace.
pub fn normalize_line(v: &[FieldElem]) -> Vec<FieldElem> {
    let lead = v
        .iter()
        .find(|x| !x.is_zero())
        .expect("normalizing the zero vector");
    let inv = lead.inv().expect("nonzero entry");
    v.iter().map(|x| x.mul(&inv)).collect()
}
