//! O-lattices in L^n, O = F_{q^m}[[t]], stored in canonical Hermite form:
//! lower-triangular column basis with monomial diagonal t^{a_i} and the
//! entry in row i of every earlier column reduced modulo t^{a_i}. Two
//! lattices are equal iff their canonical matrices are equal.
//!
//! All computations are exact polynomial arithmetic. Reduction works modulo
//! t^c for a containment exponent c with t^c·Λ_0 ⊆ M, and certifies the
//! result against the lattice's determinant valuation, so a wrong span can
//! never be returned silently.

mod chain;
mod quotient;

pub use chain::{ChainError, LatticeChain};
pub use quotient::QuotientSpace;

use crate::arith::{ArithError, FieldTower, LaurentPoly};
use crate::coweight::Coweight;
use crate::matrix::{Mat, RingElem};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("generating columns are singular (do not span L^n)")]
    Singular,
    #[error("lattice data must be exact, found a truncated entry")]
    Inexact,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("vector does not lie in the lattice")]
    NotContained,
    #[error("pairing matrix must be constant, alternating and nondegenerate")]
    BadForm,
    #[error("malformed lattice encoding")]
    BadEncoding,
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// An O-lattice M ⊂ L^n together with the working field.
#[derive(Clone, PartialEq, Eq)]
pub struct Lattice {
    tower: FieldTower,
    h: Mat<LaurentPoly>,
}

impl std::fmt::Debug for Lattice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Lattice{:?}", self.h)
    }
}

impl PartialOrd for Lattice {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Lattice {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.h.entries().cmp(other.h.entries())
    }
}

impl Lattice {
    /// The standard lattice Λ_0 = O^n.
    pub fn standard(tower: &FieldTower, n: usize) -> Self {
        Self::from_diag_exponents(tower, &vec![0; n])
    }

    /// diag(t^{λ_1}, …, t^{λ_n})·Λ_0; already canonical.
    pub fn from_diag_exponents(tower: &FieldTower, lambda: &[i64]) -> Self {
        assert!(!lambda.is_empty());
        let zero = LaurentPoly::zero(tower);
        let h = Mat::from_fn(lambda.len(), lambda.len(), |i, j| {
            if i == j {
                LaurentPoly::t_pow(tower, lambda[i])
            } else {
                zero.clone()
            }
        });
        Lattice { tower: tower.clone(), h }
    }

    /// Canonicalize a square basis matrix (columns span the lattice).
    pub fn from_matrix(tower: &FieldTower, m: &Mat<LaurentPoly>) -> Result<Self, LatticeError> {
        if m.nrows() != m.ncols() {
            return Err(LatticeError::DimensionMismatch(m.nrows(), m.ncols()));
        }
        let cols: Vec<Vec<LaurentPoly>> = (0..m.ncols()).map(|j| m.col(j)).collect();
        Self::from_generators(tower, cols)
    }

    /// Canonicalize an arbitrary generating set (≥ n columns allowed).
    pub fn from_generators(
        tower: &FieldTower,
        cols: Vec<Vec<LaurentPoly>>,
    ) -> Result<Self, LatticeError> {
        let n = cols.first().map(|c| c.len()).ok_or(LatticeError::Singular)?;
        if cols.iter().any(|c| c.len() != n) {
            return Err(LatticeError::DimensionMismatch(n, 0));
        }
        for c in &cols {
            for x in c {
                if !x.is_exact() {
                    return Err(LatticeError::Inexact);
                }
            }
        }
        let cols: Vec<Vec<LaurentPoly>> = cols
            .into_iter()
            .filter(|c| !c.iter().all(|x| x.is_zero()))
            .collect();
        if cols.len() < n {
            return Err(LatticeError::Singular);
        }
        let chosen = greedy_basis(&cols, n).ok_or(LatticeError::Singular)?;
        let basis: Vec<Vec<LaurentPoly>> = chosen.iter().map(|&j| cols[j].clone()).collect();
        let mut lat = Self::from_basis(tower, basis)?;
        for (j, col) in cols.into_iter().enumerate() {
            if !chosen.contains(&j) {
                lat = lat.adjoin(&col)?;
            }
        }
        Ok(lat)
    }

    /// Canonicalize exactly n independent columns.
    fn from_basis(tower: &FieldTower, cols: Vec<Vec<LaurentPoly>>, ) -> Result<Self, LatticeError> {
        let n = cols.len();
        let m = Mat::from_fn(n, n, |i, j| cols[j][i].clone());
        // n full-rank generators are a basis, so this is val det M exactly
        let dmin = m.det().valuation().ok_or(LatticeError::Singular)?;
        let vmin = entries_min_valuation(&cols);
        let h = hermite_with_certificate(tower, cols, n, dmin, vmin);
        Ok(Lattice { tower: tower.clone(), h })
    }

    /// Canonical form of M + O·v.
    fn adjoin(&self, v: &[LaurentPoly]) -> Result<Self, LatticeError> {
        if self.contains_vec(v) {
            return Ok(self.clone());
        }
        let n = self.n();
        let mut cols: Vec<Vec<LaurentPoly>> = (0..n).map(|j| self.h.col(j)).collect();
        cols.push(v.to_vec());
        // val det of the enlarged lattice: minimum over basis subsets, i.e.
        // the old basis or the old basis with one column replaced by v
        let mut dmin = self.val_det();
        for drop in 0..n {
            let m = Mat::from_fn(n, n, |i, j| {
                if j == drop {
                    v[i].clone()
                } else {
                    self.h.at(i, j).clone()
                }
            });
            if let Some(d) = m.det().valuation() {
                dmin = dmin.min(d);
            }
        }
        let vmin = entries_min_valuation(&cols);
        let h = hermite_with_certificate(&self.tower, cols, n, dmin, vmin);
        Ok(Lattice { tower: self.tower.clone(), h })
    }

    pub fn tower(&self) -> &FieldTower {
        &self.tower
    }

    pub fn n(&self) -> usize {
        self.h.nrows()
    }

    /// Canonical basis matrix (columns).
    pub fn basis(&self) -> &Mat<LaurentPoly> {
        &self.h
    }

    /// Diagonal exponents a_0, …, a_{n-1} of the canonical form.
    pub fn pivot_exponents(&self) -> Vec<i64> {
        (0..self.n())
            .map(|i| self.h.at(i, i).valuation().expect("diagonal is monomial"))
            .collect()
    }

    /// val det of the canonical basis; the index of M' in M is the difference
    /// of val dets when M' ⊆ M.
    pub fn val_det(&self) -> i64 {
        self.pivot_exponents().iter().sum()
    }

    /// t^k·M.
    pub fn scaled(&self, k: i64) -> Self {
        // shifting every entry preserves canonical form
        Lattice { tower: self.tower.clone(), h: self.h.map(|x| x.shift(k)) }
    }

    /// Coordinates of v in the canonical basis when v ∈ M (back-substitution).
    pub fn coords_of(&self, v: &[LaurentPoly]) -> Option<Vec<LaurentPoly>> {
        if v.len() != self.n() {
            return None;
        }
        let mut w: Vec<LaurentPoly> = v.to_vec();
        let mut x = Vec::with_capacity(self.n());
        for j in 0..self.n() {
            let a_j = self.h.at(j, j).valuation().unwrap();
            let q = w[j].shift(-a_j);
            if !q.is_zero() && q.valuation().unwrap() < 0 {
                return None;
            }
            for i in j..self.n() {
                w[i] = w[i].sub(&q.mul(self.h.at(i, j)));
            }
            debug_assert!(w[j].is_zero());
            x.push(q);
        }
        if w.iter().all(|e| e.is_zero()) {
            Some(x)
        } else {
            None
        }
    }

    pub fn contains_vec(&self, v: &[LaurentPoly]) -> bool {
        self.coords_of(v).is_some()
    }

    pub fn contains_lattice(&self, other: &Self) -> bool {
        other.n() == self.n()
            && (0..other.n()).all(|j| self.contains_vec(&other.h.col(j)))
    }

    /// Image of M under the σ^s-semilinear map v ↦ b·σ^s(v).
    pub fn transformed(&self, b: &Mat<LaurentPoly>, sigma_pow: i64) -> Result<Self, LatticeError> {
        if b.nrows() != self.n() || b.ncols() != self.n() {
            return Err(LatticeError::DimensionMismatch(b.nrows(), self.n()));
        }
        let hs = self.h.map(|x| x.sigma(sigma_pow));
        Self::from_matrix(&self.tower, &b.mul(&hs))
    }

    /// inv(M, M'): elementary-divisor exponents of the transition matrix,
    /// sorted dominant (μ_1 ≥ … ≥ μ_n), via minor valuations.
    pub fn relative_position(&self, other: &Self) -> Result<Coweight, LatticeError> {
        let n = self.n();
        if other.n() != n {
            return Err(LatticeError::DimensionMismatch(n, other.n()));
        }
        // T = H^{-1}·H' up to the monomial det: work with adj(H)·H'
        let prod = self.h.adjugate().mul(&other.h);
        let d_det = self.val_det();
        let mut mu_rev = Vec::with_capacity(n); // μ_n, μ_{n-1}, …
        let mut prev = 0i64;
        for k in 1..=n {
            let dk = minors_min_valuation(&prod, k).expect("transition matrix is invertible")
                - k as i64 * d_det;
            mu_rev.push(dk - prev);
            prev = dk;
        }
        mu_rev.reverse();
        Ok(Coweight::from_ints(&mu_rev))
    }

    /// Dual lattice {x : ⟨x, M⟩ ⊆ O} for a constant nondegenerate pairing.
    pub fn dual(&self, form: &Mat<LaurentPoly>) -> Result<Self, LatticeError> {
        let n = self.n();
        if form.nrows() != n || form.ncols() != n {
            return Err(LatticeError::DimensionMismatch(form.nrows(), n));
        }
        // basis of the dual: columns of (Hᵀ·Jᵀ)^{-1}
        let a = self.h.transpose().mul(&form.transpose());
        let det = a.det();
        // det H is an exact monomial, so a non-monomial product means det J
        // was not a nonzero constant
        let (dv, dc) = match (det.valuation(), det.terms().len()) {
            (Some(v), 1) => (v, det.leading_coeff().unwrap().clone()),
            _ => return Err(LatticeError::BadForm),
        };
        let inv_scale = LaurentPoly::monomial(&self.tower, -dv, dc.inv()?);
        let cols = a.adjugate().map(|x| x.mul(&inv_scale));
        Self::from_matrix(&self.tower, &cols)
    }

    /// Dual for a symplectic pairing.
    pub fn dual_symplectic(&self, form: &SymplecticForm) -> Result<Self, LatticeError> {
        self.dual(form.gram())
    }

    /// Dual for the standard bilinear pairing ⟨e_i, e_j⟩ = δ_{ij}.
    pub fn dual_gl(&self) -> Self {
        let id = Mat::identity_like(self.n(), &LaurentPoly::one(&self.tower));
        self.dual(&id).expect("identity pairing is valid")
    }

    /// Lattice sum M + M'.
    pub fn sum(&self, other: &Self) -> Result<Self, LatticeError> {
        if other.n() != self.n() {
            return Err(LatticeError::DimensionMismatch(self.n(), other.n()));
        }
        let mut lat = self.clone();
        for j in 0..other.n() {
            lat = lat.adjoin(&other.h.col(j))?;
        }
        Ok(lat)
    }

    /// Lattice intersection M ∩ M', via (M^∨ + M'^∨)^∨.
    pub fn intersect(&self, other: &Self) -> Result<Self, LatticeError> {
        if other.n() != self.n() {
            return Err(LatticeError::DimensionMismatch(self.n(), other.n()));
        }
        Ok(self.dual_gl().sum(&other.dual_gl())?.dual_gl())
    }

    pub fn to_json(&self) -> serde_json::Value {
        laurent_mat_to_json(&self.h)
    }

    pub fn from_json(tower: &FieldTower, v: &serde_json::Value) -> Result<Self, LatticeError> {
        let m = laurent_mat_from_json(tower, v).map_err(|_| LatticeError::BadEncoding)?;
        Self::from_matrix(tower, &m)
    }
}

/// Row-major JSON matrix of Laurent polynomials.
pub fn laurent_mat_from_json(
    tower: &FieldTower,
    v: &serde_json::Value,
) -> Result<Mat<LaurentPoly>, ArithError> {
    let rows = v.as_array().ok_or(ArithError::BadEncoding)?;
    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        let r = r.as_array().ok_or(ArithError::BadEncoding)?;
        let mut row = Vec::with_capacity(r.len());
        for x in r {
            row.push(LaurentPoly::from_json(tower, x)?);
        }
        out.push(row);
    }
    if out.is_empty() || out.iter().any(|r| r.len() != out[0].len()) {
        return Err(ArithError::BadEncoding);
    }
    Ok(Mat::from_rows(out))
}

pub fn laurent_mat_to_json(m: &Mat<LaurentPoly>) -> serde_json::Value {
    serde_json::Value::Array(
        (0..m.nrows())
            .map(|i| serde_json::Value::Array((0..m.ncols()).map(|j| m.at(i, j).to_json()).collect()))
            .collect(),
    )
}

// ---------------------------------------------------------------------------
// Hermite reduction
// ---------------------------------------------------------------------------

fn entries_min_valuation(cols: &[Vec<LaurentPoly>]) -> i64 {
    cols.iter()
        .flat_map(|c| c.iter())
        .filter_map(|x| x.valuation())
        .min()
        .unwrap_or(0)
}

/// Greedy maximal independent subset of columns over L, or None if rank < n.
fn greedy_basis(cols: &[Vec<LaurentPoly>], n: usize) -> Option<Vec<usize>> {
    let mut chosen: Vec<usize> = Vec::new();
    for j in 0..cols.len() {
        if chosen.len() == n {
            break;
        }
        let mut test = chosen.clone();
        test.push(j);
        if l_rank(cols, &test) == test.len() {
            chosen = test;
        }
    }
    (chosen.len() == n).then_some(chosen)
}

/// Rank over L of the selected columns, by fraction-free elimination.
fn l_rank(cols: &[Vec<LaurentPoly>], idx: &[usize]) -> usize {
    let n = cols[idx[0]].len();
    let k = idx.len();
    let mut m: Vec<Vec<LaurentPoly>> = idx.iter().map(|&j| cols[j].clone()).collect();
    let mut prev: Option<LaurentPoly> = None;
    let mut rank = 0;
    for row in 0..n {
        if rank == k {
            break;
        }
        let Some(p) = (rank..k).find(|&c| !m[c][row].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let piv = m[rank][row].clone();
        for c in rank + 1..k {
            if m[c][row].is_zero() {
                continue;
            }
            let b = m[c][row].clone();
            for i in 0..n {
                let num = piv.mul(&m[c][i]).sub(&b.mul(&m[rank][i]));
                // dividing by the previous pivot keeps degrees linear; the
                // division only rescales the column, so rank is unaffected
                // whether or not it is applied
                m[c][i] = match &prev {
                    Some(d) => {
                        let (q, r) = poly_divmod(&num, d);
                        if r.is_zero() {
                            q
                        } else {
                            num
                        }
                    }
                    None => num,
                };
            }
        }
        prev = Some(piv);
        rank += 1;
    }
    rank
}

/// Reduce with retry: every attempted c is a valid containment exponent, and
/// a result is only accepted when its determinant valuation matches, so the
/// output provably spans the input module.
fn hermite_with_certificate(
    tower: &FieldTower,
    cols: Vec<Vec<LaurentPoly>>,
    n: usize,
    dmin: i64,
    vmin: i64,
) -> Mat<LaurentPoly> {
    let mut c = dmin - (n as i64 - 1) * vmin;
    let mut step = 4;
    for _ in 0..12 {
        if let Some(h) = hermite_reduce(tower, cols.clone(), n, c, dmin) {
            return h;
        }
        c += step;
        step *= 2;
    }
    unreachable!("lattice reduction failed to certify at any modulus");
}

fn truncate_col(col: &mut [LaurentPoly], c: i64) {
    for x in col.iter_mut() {
        let (lo, _) = x.split_at_exp(c);
        *x = lo;
    }
}

/// One modular reduction pass: triangularize working modulo t^c (legitimate
/// because t^c·Λ_0 ⊆ M), then canonicalize. Returns None when the pivot
/// valuations fail the determinant certificate Σ a_i = val det M.
fn hermite_reduce(
    tower: &FieldTower,
    mut pool: Vec<Vec<LaurentPoly>>,
    n: usize,
    c: i64,
    dmin: i64,
) -> Option<Mat<LaurentPoly>> {
    let zero = LaurentPoly::zero(tower);
    for col in pool.iter_mut() {
        truncate_col(col, c);
    }
    let mut tri: Vec<Vec<LaurentPoly>> = Vec::with_capacity(n);
    for r in 0..n {
        pool.retain(|col| col.iter().any(|x| !x.is_zero()));
        let piv = match (0..pool.len())
            .filter(|&j| !pool[j][r].is_zero())
            .min_by_key(|&j| pool[j][r].valuation().unwrap())
        {
            Some(j) => pool.swap_remove(j),
            None => {
                // every row-r entry vanishes mod t^c; t^c·e_r itself pivots
                let mut col = vec![zero.clone(); n];
                col[r] = LaurentPoly::t_pow(tower, c);
                col
            }
        };
        let a_r = piv[r].valuation().unwrap();
        let lead_inv = piv[r].leading_coeff().unwrap().inv().expect("nonzero");
        for col in pool.iter_mut() {
            // drive the valuation of col[r] up past c by lead cancellation
            while !col[r].is_zero() {
                let v = col[r].valuation().unwrap();
                debug_assert!(v >= a_r);
                let coef = col[r].leading_coeff().unwrap().mul(&lead_inv);
                let q = LaurentPoly::monomial(tower, v - a_r, coef);
                for i in r..n {
                    col[i] = col[i].sub(&q.mul(&piv[i]));
                }
                truncate_col(col, c);
            }
        }
        tri.push(piv);
    }
    let pivots: Vec<i64> = (0..n).map(|j| tri[j][j].valuation().unwrap()).collect();
    // Σ a_i ≥ val det M always; equality certifies the columns span all of M
    if pivots.iter().sum::<i64>() != dmin {
        return None;
    }
    // canonicalize: monomial pivots, entry in row i reduced mod t^{a_i}
    let mut canon: Vec<Vec<LaurentPoly>> = vec![Vec::new(); n];
    for j in (0..n).rev() {
        let a_j = pivots[j];
        let unit = tri[j][j].shift(-a_j);
        let vinv = unit_inverse_poly(tower, &unit, (c - a_j).max(1));
        let mut w: Vec<LaurentPoly> = tri[j].iter().map(|x| x.mul(&vinv)).collect();
        // v·u ≡ 1 below t^{c-a_j}; the discarded discrepancy lies in t^c·Λ_0 ⊆ M
        w[j] = LaurentPoly::t_pow(tower, a_j);
        for i in j + 1..n {
            let (keep, _) = w[i].split_at_exp(c);
            w[i] = keep;
            let (lo, hi) = w[i].split_at_exp(pivots[i]);
            if !hi.is_zero() {
                let q = hi.shift(-pivots[i]);
                for s in i..n {
                    w[s] = w[s].sub(&q.mul(&canon[i][s - i]));
                }
                debug_assert_eq!(w[i], lo);
            }
        }
        canon[j] = w.split_off(j);
    }
    Some(Mat::from_fn(n, n, |i, j| {
        if i < j {
            zero.clone()
        } else {
            canon[j][i - j].clone()
        }
    }))
}

/// The inverse of a unit polynomial (val 0) modulo t^k, as an exact polynomial.
fn unit_inverse_poly(tower: &FieldTower, u: &LaurentPoly, k: i64) -> LaurentPoly {
    debug_assert_eq!(u.valuation(), Some(0));
    let g = u.series_invert(k).expect("unit polynomial is invertible");
    LaurentPoly::from_terms(tower, g.terms().to_vec())
}

/// Minimum valuation over all k×k minors; None if all vanish.
pub fn minors_min_valuation(m: &Mat<LaurentPoly>, k: usize) -> Option<i64> {
    let n = m.nrows();
    assert!(k >= 1 && k <= n && n == m.ncols());
    let mut best: Option<i64> = None;
    let mut rows: Vec<usize> = (0..k).collect();
    let mut cols: Vec<usize> = (0..k).collect();
    fn each_combo(n: usize, idx: &mut Vec<usize>, pos: usize, start: usize, f: &mut impl FnMut(&[usize])) {
        if pos == idx.len() {
            f(idx);
            return;
        }
        for v in start..n {
            idx[pos] = v;
            each_combo(n, idx, pos + 1, v + 1, f);
        }
    }
    let mut row_sets = Vec::new();
    each_combo(n, &mut rows, 0, 0, &mut |r| row_sets.push(r.to_vec()));
    for rset in &row_sets {
        each_combo(n, &mut cols, 0, 0, &mut |cset| {
            let d = m.submatrix(rset, cset).det();
            if let Some(v) = d.valuation() {
                best = Some(best.map_or(v, |b: i64| b.min(v)));
            }
        });
    }
    best
}

// ---------------------------------------------------------------------------
// pairings
// ---------------------------------------------------------------------------

/// Constant alternating nondegenerate Gram matrix on L^{2n}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymplecticForm {
    gram: Mat<LaurentPoly>,
}

impl SymplecticForm {
    /// The standard form: ⟨e_i, e_{2n+1−i}⟩ = 1 for i ≤ n (1-based).
    pub fn standard(tower: &FieldTower, n: usize) -> Self {
        let zero = LaurentPoly::zero(tower);
        let one = LaurentPoly::one(tower);
        let gram = Mat::from_fn(2 * n, 2 * n, |i, j| {
            if i + j == 2 * n - 1 {
                if i < n {
                    one.clone()
                } else {
                    one.neg()
                }
            } else {
                zero.clone()
            }
        });
        SymplecticForm { gram }
    }

    pub fn from_matrix(m: Mat<LaurentPoly>) -> Result<Self, LatticeError> {
        let n2 = m.nrows();
        if n2 == 0 || n2 % 2 != 0 || m.ncols() != n2 {
            return Err(LatticeError::BadForm);
        }
        for i in 0..n2 {
            for j in 0..n2 {
                let e = m.at(i, j);
                if !e.is_exact() || e.terms().iter().any(|&(k, _)| k != 0) {
                    return Err(LatticeError::BadForm); // constant entries only
                }
                if *e != m.at(j, i).neg() {
                    return Err(LatticeError::BadForm);
                }
            }
            if !m.at(i, i).is_zero() {
                return Err(LatticeError::BadForm); // alternating, also in char 2
            }
        }
        if m.det().is_zero() {
            return Err(LatticeError::BadForm);
        }
        Ok(SymplecticForm { gram: m })
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &Mat<LaurentPoly> {
        &self.gram
    }

    pub fn pairing(&self, u: &[LaurentPoly], v: &[LaurentPoly]) -> LaurentPoly {
        let jv = self.gram.mul_vec(v);
        let mut acc = u[0].zero_like();
        for (a, b) in u.iter().zip(&jv) {
            acc = acc.radd(&a.rmul(b));
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// Smith normal form over k[t] (polynomial entries), with transforms
// ---------------------------------------------------------------------------

/// Quotient and remainder by leading-degree division; rhs nonzero.
fn poly_divmod(a: &LaurentPoly, b: &LaurentPoly) -> (LaurentPoly, LaurentPoly) {
    let db = b.top_exponent().expect("division by zero polynomial");
    let lead_inv = b
        .terms()
        .last()
        .unwrap()
        .1
        .inv()
        .expect("leading coefficient nonzero");
    let mut r = a.clone();
    let mut q = a.zero_like();
    while let Some(dr) = r.top_exponent() {
        if dr < db {
            break;
        }
        let coef = r.terms().last().unwrap().1.mul(&lead_inv);
        let term = a.one_like().scale(&coef).shift(dr - db);
        q = q.add(&term);
        r = r.sub(&term.mul(b));
    }
    (q, r)
}

/// Smith normal form of a polynomial matrix over k[t]: returns (u, d, v) with
/// a = u·d·v, u and v unimodular (constant nonzero determinant), d diagonal
/// with monic entries d_1 | d_2 | ….
pub fn smith_normal_form(
    a: &Mat<LaurentPoly>,
) -> Result<(Mat<LaurentPoly>, Mat<LaurentPoly>, Mat<LaurentPoly>), LatticeError> {
    for x in a.entries() {
        if !x.is_exact() {
            return Err(LatticeError::Inexact);
        }
        if let Some(v) = x.valuation() {
            if v < 0 {
                return Err(LatticeError::BadEncoding); // polynomial entries required
            }
        }
    }
    let nr = a.nrows();
    let nc = a.ncols();
    let mut w = a.clone();
    let exemplar = a.entries()[0].clone();
    let mut u: Mat<LaurentPoly> = Mat::identity_like(nr, &exemplar);
    let mut v: Mat<LaurentPoly> = Mat::identity_like(nc, &exemplar);
    let rmax = nr.min(nc);
    for i in 0..rmax {
        'pivot: loop {
            // smallest-degree nonzero entry in the remaining block
            let mut best: Option<(usize, usize, i64)> = None;
            for r in i..nr {
                for s in i..nc {
                    if let Some(d) = w.at(r, s).top_exponent() {
                        if best.map_or(true, |(_, _, bd)| d < bd) {
                            best = Some((r, s, d));
                        }
                    }
                }
            }
            let Some((pr, ps, _)) = best else {
                break 'pivot; // block is zero
            };
            swap_rows(&mut w, i, pr);
            swap_cols(&mut u, i, pr);
            swap_cols(&mut w, i, ps);
            swap_rows(&mut v, i, ps);
            let mut clean = true;
            for r in i + 1..nr {
                if w.at(r, i).is_zero() {
                    continue;
                }
                let (q, rem) = poly_divmod(w.at(r, i), w.at(i, i));
                // W ← E·W with E = (row_r -= q·row_i), so U ← U·E^{-1}
                row_sub(&mut w, r, i, &q);
                col_add(&mut u, i, r, &q);
                if !rem.is_zero() {
                    clean = false;
                }
            }
            for s in i + 1..nc {
                if w.at(i, s).is_zero() {
                    continue;
                }
                let (q, rem) = poly_divmod(w.at(i, s), w.at(i, i));
                // W ← W·F with F = (col_s -= q·col_i), so V ← F^{-1}·V
                col_sub(&mut w, s, i, &q);
                row_add(&mut v, i, s, &q);
                if !rem.is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue 'pivot;
            }
            // divisibility of the trailing block by the pivot
            let mut fixed = false;
            'scan: for r in i + 1..nr {
                for s in i + 1..nc {
                    let (_, rem) = poly_divmod(w.at(r, s), w.at(i, i));
                    if !rem.is_zero() {
                        let one = exemplar.one_like();
                        // W ← E·W with E = (row_i += row_r), so U ← U·E^{-1}
                        row_add(&mut w, i, r, &one);
                        col_sub(&mut u, r, i, &one);
                        fixed = true;
                        break 'scan;
                    }
                }
            }
            if !fixed {
                break 'pivot;
            }
        }
        // normalize the pivot monic
        if let Some((_, lead)) = w.at(i, i).terms().last() {
            let cc = lead.clone();
            let cinv = cc.inv().expect("nonzero");
            for s in 0..nc {
                let val = w.at(i, s).scale(&cinv);
                w.set(i, s, val);
            }
            for r in 0..nr {
                let val = u.at(r, i).scale(&cc);
                u.set(r, i, val);
            }
        }
    }
    Ok((u, w, v))
}

fn swap_rows(m: &mut Mat<LaurentPoly>, a: usize, b: usize) {
    if a == b {
        return;
    }
    for j in 0..m.ncols() {
        let x = m.at(a, j).clone();
        let y = m.at(b, j).clone();
        m.set(a, j, y);
        m.set(b, j, x);
    }
}

fn swap_cols(m: &mut Mat<LaurentPoly>, a: usize, b: usize) {
    if a == b {
        return;
    }
    for i in 0..m.nrows() {
        let x = m.at(i, a).clone();
        let y = m.at(i, b).clone();
        m.set(i, a, y);
        m.set(i, b, x);
    }
}

/// row_r -= q·row_i
fn row_sub(m: &mut Mat<LaurentPoly>, r: usize, i: usize, q: &LaurentPoly) {
    for j in 0..m.ncols() {
        let v = m.at(r, j).sub(&q.mul(m.at(i, j)));
        m.set(r, j, v);
    }
}

/// row_i += q·row_r
fn row_add(m: &mut Mat<LaurentPoly>, i: usize, r: usize, q: &LaurentPoly) {
    for j in 0..m.ncols() {
        let v = m.at(i, j).add(&q.mul(m.at(r, j)));
        m.set(i, j, v);
    }
}

/// col_s -= q·col_i
fn col_sub(m: &mut Mat<LaurentPoly>, s: usize, i: usize, q: &LaurentPoly) {
    for r in 0..m.nrows() {
        let v = m.at(r, s).sub(&q.mul(m.at(r, i)));
        m.set(r, s, v);
    }
}

/// col_i += q·col_s
fn col_add(m: &mut Mat<LaurentPoly>, i: usize, s: usize, q: &LaurentPoly) {
    for r in 0..m.nrows() {
        let v = m.at(r, i).add(&q.mul(m.at(r, s)));
        m.set(r, i, v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::FieldElem;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tower() -> FieldTower {
        FieldTower::new(2, 1, 1).unwrap()
    }

    fn tp(t: &FieldTower, k: i64) -> LaurentPoly {
        LaurentPoly::t_pow(t, k)
    }

    fn rand_poly(t: &FieldTower, rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> LaurentPoly {
        let mut terms = Vec::new();
        for e in lo..=hi {
            if rng.gen_bool(0.4) {
                let c = FieldElem::random(t, rng);
                terms.push((e, c));
            }
        }
        LaurentPoly::from_terms(t, terms)
    }

    fn rand_lattice(t: &FieldTower, rng: &mut ChaCha8Rng, n: usize) -> Lattice {
        loop {
            let m = Mat::from_fn(n, n, |_, _| rand_poly(t, rng, -2, 2));
            if let Ok(l) = Lattice::from_matrix(t, &m) {
                return l;
            }
        }
    }

    /// Random element of GL_n(O): product of elementary transvections.
    fn rand_unimodular_o(t: &FieldTower, rng: &mut ChaCha8Rng, n: usize) -> Mat<LaurentPoly> {
        let mut m = Mat::identity_like(n, &LaurentPoly::one(t));
        for _ in 0..2 * n {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            if i == j {
                continue;
            }
            let q = rand_poly(t, rng, 0, 2);
            let e = Mat::from_fn(n, n, |r, s| {
                if r == s {
                    LaurentPoly::one(t)
                } else if (r, s) == (i, j) {
                    q.clone()
                } else {
                    LaurentPoly::zero(t)
                }
            });
            m = m.mul(&e);
        }
        m
    }

    #[test]
    fn standard_lattice_is_identity() {
        let t = tower();
        let l = Lattice::standard(&t, 3);
        let m = Mat::identity_like(3, &LaurentPoly::one(&t));
        assert_eq!(Lattice::from_matrix(&t, &m).unwrap(), l);
        assert_eq!(l.val_det(), 0);
    }

    #[test]
    fn hermite_example_and_idempotence() {
        let t = tower();
        let zero = LaurentPoly::zero(&t);
        // columns t·e_1 and e_1 + e_2
        let m = Mat::from_rows(vec![
            vec![tp(&t, 1), LaurentPoly::one(&t)],
            vec![zero.clone(), LaurentPoly::one(&t)],
        ]);
        let l = Lattice::from_matrix(&t, &m).unwrap();
        assert_eq!(l.pivot_exponents(), vec![0, 1]);
        assert!(l.contains_vec(&[tp(&t, 1), zero.clone()]));
        assert!(l.contains_vec(&[LaurentPoly::one(&t), LaurentPoly::one(&t)]));
        assert!(!l.contains_vec(&[LaurentPoly::one(&t), zero.clone()]));
        // re-normalizing the canonical matrix is a fixed point
        let l2 = Lattice::from_matrix(&t, l.basis()).unwrap();
        assert_eq!(l, l2);
    }

    #[test]
    fn negative_exponents_below_diagonal_are_reachable() {
        let t = tower();
        // columns (t^{-1}, t^{-1}) and (0, 1): the reduced form keeps t^{-1}
        let m = Mat::from_rows(vec![
            vec![tp(&t, -1), LaurentPoly::zero(&t)],
            vec![tp(&t, -1), LaurentPoly::one(&t)],
        ]);
        let l = Lattice::from_matrix(&t, &m).unwrap();
        assert_eq!(l.pivot_exponents(), vec![-1, 0]);
        assert_eq!(*l.basis().at(1, 0), tp(&t, -1));
        let l2 = Lattice::from_matrix(&t, l.basis()).unwrap();
        assert_eq!(l, l2);
    }

    #[test]
    fn unimodular_right_multiplication_fixed_point() {
        let t = FieldTower::new(3, 1, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=3usize {
            for _ in 0..20 {
                let l = rand_lattice(&t, &mut rng, n);
                let g = rand_unimodular_o(&t, &mut rng, n);
                let l2 = Lattice::from_matrix(&t, &l.basis().mul(&g)).unwrap();
                assert_eq!(l, l2);
            }
        }
    }

    #[test]
    fn redundant_generators_are_harmless() {
        let t = tower();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let l = rand_lattice(&t, &mut rng, 3);
            let mut cols: Vec<Vec<LaurentPoly>> = (0..3).map(|j| l.basis().col(j)).collect();
            // extra generators already inside the lattice, plus a zero column
            let extra: Vec<LaurentPoly> = (0..3)
                .map(|i| cols[0][i].add(&cols[1][i].shift(1)))
                .collect();
            cols.push(extra);
            cols.push(vec![LaurentPoly::zero(&t); 3]);
            let l2 = Lattice::from_generators(&t, cols).unwrap();
            assert_eq!(l, l2);
        }
    }

    #[test]
    fn singular_input_is_rejected() {
        let t = tower();
        let m = Mat::from_rows(vec![
            vec![tp(&t, 1), tp(&t, 2)],
            vec![tp(&t, 2), tp(&t, 3)],
        ]);
        assert!(matches!(
            Lattice::from_matrix(&t, &m),
            Err(LatticeError::Singular)
        ));
    }

    #[test]
    fn relative_position_diagonal() {
        let t = tower();
        let l0 = Lattice::standard(&t, 2);
        let l1 = Lattice::from_diag_exponents(&t, &[2, 0]);
        assert_eq!(
            l0.relative_position(&l1).unwrap(),
            Coweight::from_ints(&[2, 0])
        );
        assert_eq!(
            l0.relative_position(&l0).unwrap(),
            Coweight::from_ints(&[0, 0])
        );
        // unsorted diagonal sorts dominant
        let l2 = Lattice::from_diag_exponents(&t, &[-1, 3]);
        assert_eq!(
            l0.relative_position(&l2).unwrap(),
            Coweight::from_ints(&[3, -1])
        );
    }

    #[test]
    fn relative_position_cyclic_shift_lattices() {
        // v ↦ b·σ(v) with b cycling the basis and one t^r corner: position of
        // the image of Λ_0 is (1,0,0) for r = 1, n = 3 and (2,0) for r = 2, n = 2
        let t = tower();
        let l3 = Lattice::standard(&t, 3);
        let b1 = Mat::from_rows(vec![
            vec![LaurentPoly::zero(&t), LaurentPoly::zero(&t), tp(&t, 1)],
            vec![LaurentPoly::one(&t), LaurentPoly::zero(&t), LaurentPoly::zero(&t)],
            vec![LaurentPoly::zero(&t), LaurentPoly::one(&t), LaurentPoly::zero(&t)],
        ]);
        let fm = l3.transformed(&b1, 1).unwrap();
        assert_eq!(
            l3.relative_position(&fm).unwrap(),
            Coweight::from_ints(&[1, 0, 0])
        );
        let l0 = Lattice::standard(&t, 2);
        let b2 = Mat::from_rows(vec![
            vec![LaurentPoly::zero(&t), tp(&t, 2)],
            vec![LaurentPoly::one(&t), LaurentPoly::zero(&t)],
        ]);
        let fm2 = l0.transformed(&b2, 1).unwrap();
        assert_eq!(
            l0.relative_position(&fm2).unwrap(),
            Coweight::from_ints(&[2, 0])
        );
    }

    #[test]
    fn relative_position_invariants() {
        let t = FieldTower::new(2, 1, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..25 {
            let n = rng.gen_range(1..=3);
            let m1 = rand_lattice(&t, &mut rng, n);
            let m2 = rand_lattice(&t, &mut rng, n);
            let mu = m1.relative_position(&m2).unwrap();
            assert!(mu.is_dominant());
            // sum rule: Σ μ_i = val det of the transition matrix
            assert_eq!(
                mu.total(),
                crate::Rat::from_integer(m2.val_det() - m1.val_det())
            );
            // invariance under a common GL_n(L) move (unimodular · t-shift)
            let g = rand_unimodular_o(&t, &mut rng, n);
            let shift = rng.gen_range(-2..=2);
            let gm1 = Lattice::from_matrix(&t, &g.mul(m1.basis())).unwrap().scaled(shift);
            let gm2 = Lattice::from_matrix(&t, &g.mul(m2.basis())).unwrap().scaled(shift);
            assert_eq!(gm1.relative_position(&gm2).unwrap(), mu);
            // Cartan form: inv(Λ_0, g'·diag(t^λ)·g·Λ_0) = dominant sort of λ
            // for g, g' integral unimodular
            let lam: Vec<i64> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
            let g2 = rand_unimodular_o(&t, &mut rng, n);
            let core = Mat::from_fn(n, n, |i, j| g2.at(i, j).shift(lam[i]));
            let m3 = Lattice::from_matrix(&t, &core.mul(&g)).unwrap();
            let l0 = Lattice::standard(&t, n);
            assert_eq!(
                l0.relative_position(&m3).unwrap(),
                Coweight::from_ints(&lam).dominant()
            );
        }
    }

    #[test]
    fn smith_oracle_agrees_with_minors() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let t = FieldTower::new(2, 1, 1).unwrap();
        for _ in 0..500 {
            let n = rng.gen_range(1..=4);
            let a = rand_lattice(&t, &mut rng, n);
            let b = rand_lattice(&t, &mut rng, n);
            let mu = a.relative_position(&b).unwrap();
            // oracle: Smith elimination on the (shifted) transition matrix
            let prod = a.basis().adjugate().mul(b.basis());
            let shift = prod
                .entries()
                .iter()
                .filter_map(|x| x.valuation())
                .min()
                .unwrap()
                .min(0);
            let poly = prod.map(|x| x.shift(-shift));
            let (u, d, v) = smith_normal_form(&poly).unwrap();
            assert_eq!(u.mul(&d).mul(&v), poly);
            // transforms are unimodular over k[t]
            assert_eq!(u.det().terms().len(), 1);
            assert_eq!(u.det().valuation(), Some(0));
            assert_eq!(v.det().terms().len(), 1);
            assert_eq!(v.det().valuation(), Some(0));
            let base = a.val_det();
            let mut exps: Vec<i64> = (0..n)
                .map(|i| d.at(i, i).valuation().unwrap() + shift - base)
                .collect();
            exps.sort_unstable_by(|x, y| y.cmp(x));
            assert_eq!(mu, Coweight::from_ints(&exps));
        }
    }

    #[test]
    fn dual_of_standard_is_standard() {
        let t = tower();
        let form = SymplecticForm::standard(&t, 1);
        let l0 = Lattice::standard(&t, 2);
        assert_eq!(l0.dual_symplectic(&form).unwrap(), l0);
        // symplectically scaled pair is its own dual
        let scaled = Lattice::from_diag_exponents(&t, &[1, -1]);
        assert_eq!(scaled.dual_symplectic(&form).unwrap(), scaled);
        // (cM)^⊥ = c^{-1}·M^⊥
        assert_eq!(l0.scaled(2).dual_symplectic(&form).unwrap(), l0.scaled(-2));
    }

    #[test]
    fn double_dual_round_trip() {
        let t = FieldTower::new(3, 1, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let form = SymplecticForm::standard(&t, 2); // dim 4
        for _ in 0..15 {
            let m = rand_lattice(&t, &mut rng, 4);
            let dd = m.dual_symplectic(&form).unwrap().dual_symplectic(&form).unwrap();
            assert_eq!(dd, m);
        }
        // duality reverses and negates relative position
        for _ in 0..15 {
            let m1 = rand_lattice(&t, &mut rng, 4);
            let m2 = rand_lattice(&t, &mut rng, 4);
            let mu = m1.relative_position(&m2).unwrap();
            let md1 = m1.dual_symplectic(&form).unwrap();
            let md2 = m2.dual_symplectic(&form).unwrap();
            assert_eq!(md1.relative_position(&md2).unwrap(), mu.neg().dominant());
        }
    }

    #[test]
    fn random_constant_form_double_dual() {
        let t = FieldTower::new(3, 1, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        // random alternating nondegenerate 4×4 constant form
        let form = loop {
            let mut g = Mat::filled(4, 4, LaurentPoly::zero(&t));
            for i in 0..4 {
                for j in i + 1..4 {
                    let c = FieldElem::random(&t, &mut rng);
                    g.set(i, j, LaurentPoly::constant(&t, c.clone()));
                    g.set(j, i, LaurentPoly::constant(&t, c.neg()));
                }
            }
            if let Ok(f) = SymplecticForm::from_matrix(g) {
                break f;
            }
        };
        for _ in 0..10 {
            let m = rand_lattice(&t, &mut rng, 4);
            let dd = m.dual_symplectic(&form).unwrap().dual_symplectic(&form).unwrap();
            assert_eq!(dd, m);
        }
    }

    #[test]
    fn symplectic_form_validation() {
        let t = tower();
        assert!(SymplecticForm::from_matrix(SymplecticForm::standard(&t, 2).gram().clone()).is_ok());
        let bad = Mat::identity_like(2, &LaurentPoly::one(&t));
        assert!(SymplecticForm::from_matrix(bad).is_err());
    }

    #[test]
    fn sum_intersection_and_coords() {
        let t = tower();
        let a = Lattice::from_diag_exponents(&t, &[1, 2]);
        let b = Lattice::from_diag_exponents(&t, &[2, 0]);
        let s = a.sum(&b).unwrap();
        assert_eq!(s, Lattice::from_diag_exponents(&t, &[1, 0]));
        let i = a.intersect(&b).unwrap();
        assert_eq!(i, Lattice::from_diag_exponents(&t, &[2, 2]));
        let x = s.coords_of(&[tp(&t, 1), LaurentPoly::zero(&t)]).unwrap();
        assert_eq!(x[0], LaurentPoly::one(&t));
        assert!(s.contains_lattice(&a));
        assert!(!a.contains_lattice(&s));
        // val det additivity of sum and intersection
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..15 {
            let m1 = rand_lattice(&t, &mut rng, 3);
            let m2 = rand_lattice(&t, &mut rng, 3);
            let u = m1.sum(&m2).unwrap();
            let w = m1.intersect(&m2).unwrap();
            assert!(u.contains_lattice(&m1) && u.contains_lattice(&m2));
            assert!(m1.contains_lattice(&w) && m2.contains_lattice(&w));
            assert_eq!(u.val_det() + w.val_det(), m1.val_det() + m2.val_det());
        }
    }

    #[test]
    fn json_round_trip() {
        let t = tower();
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let m = rand_lattice(&t, &mut rng, 3);
        let j = m.to_json();
        assert_eq!(Lattice::from_json(&t, &j).unwrap(), m);
    }
}
