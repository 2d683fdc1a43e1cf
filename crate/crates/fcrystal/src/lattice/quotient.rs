//! Quotients W = M/M' of nested lattices with t·M ⊆ M' ⊆ M, presented as
//! finite-dimensional vector spaces over the residue field, together with
//! the maps induced on W by semilinear endomorphisms preserving both lattices.

use super::{Lattice, LatticeError};
use crate::arith::{FieldElem, FieldTower, LaurentPoly};
use crate::matrix::{FMat, Mat, Semilinear};

/// M/M' with a chosen basis: the classes of the canonical basis columns of M
/// at the rows not hit by the column echelon of M' mod t·M.
#[derive(Clone, Debug)]
pub struct QuotientSpace {
    tower: FieldTower,
    big: Lattice,
    small: Lattice,
    basis_rows: Vec<usize>,
    proj: FMat, // dim × n, sends mod-t coordinates in M's basis to W
}

impl QuotientSpace {
    pub fn new(big: &Lattice, small: &Lattice) -> Result<Self, LatticeError> {
        let n = big.n();
        if small.n() != n {
            return Err(LatticeError::DimensionMismatch(n, small.n()));
        }
        if !big.contains_lattice(small) || !small.contains_lattice(&big.scaled(1)) {
            return Err(LatticeError::NotContained);
        }
        let tower = big.tower().clone();
        // coordinates of M' in the basis of M, reduced mod t
        let mut coord_cols = Vec::with_capacity(n);
        for j in 0..n {
            let c = big
                .coords_of(&small.basis().col(j))
                .expect("containment was just verified");
            coord_cols.push(c);
        }
        let tbar: FMat = Mat::from_fn(n, n, |i, j| {
            coord_cols[j][i].coeff(0).expect("coordinates are exact")
        });
        // column space of tbar = image of M' in M/tM
        let (ech, pivots) = tbar.transpose().rref();
        let basis_rows: Vec<usize> = (0..n).filter(|r| !pivots.contains(r)).collect();
        let dim = basis_rows.len();
        debug_assert_eq!(dim as i64, small.val_det() - big.val_det());
        // complete the image basis by the unit vectors at the free rows; the
        // bottom rows of the inverse then read off coordinates in W
        let k = pivots.len();
        let zero = FieldElem::zero(&tower);
        let one = FieldElem::from_int(&tower, 1);
        let s_mat: FMat = Mat::from_fn(n, n, |i, j| {
            if j < k {
                ech.at(j, i).clone()
            } else if i == basis_rows[j - k] {
                one.clone()
            } else {
                zero.clone()
            }
        });
        let sinv = s_mat.inverse().expect("echelon rows plus free units are a basis");
        let proj = Mat::from_fn(dim, n, |i, j| sinv.at(k + i, j).clone());
        Ok(QuotientSpace { tower, big: big.clone(), small: small.clone(), basis_rows, proj })
    }

    pub fn dim(&self) -> usize {
        self.basis_rows.len()
    }

    /// Rows of M's canonical basis whose classes form the chosen basis of W.
    pub fn basis_rows(&self) -> &[usize] {
        &self.basis_rows
    }

    /// Class from mod-t coordinates in the canonical basis of M.
    pub fn project_coords(&self, xbar: &[FieldElem]) -> Vec<FieldElem> {
        self.proj.mul_vec(xbar)
    }

    pub fn big(&self) -> &Lattice {
        &self.big
    }

    pub fn small(&self) -> &Lattice {
        &self.small
    }

    /// Class of v in W, or None when v ∉ M.
    pub fn project(&self, v: &[LaurentPoly]) -> Option<Vec<FieldElem>> {
        let x = self.big.coords_of(v)?;
        let xbar: Vec<FieldElem> =
            x.iter().map(|c| c.coeff(0).expect("coordinates are exact")).collect();
        Some(self.proj.mul_vec(&xbar))
    }

    /// The distinguished representative of a class: the same combination of
    /// the chosen basis columns of M.
    pub fn lift(&self, w: &[FieldElem]) -> Vec<LaurentPoly> {
        assert_eq!(w.len(), self.dim());
        let n = self.big.n();
        let mut out = vec![LaurentPoly::zero(&self.tower); n];
        for (s, &b) in self.basis_rows.iter().enumerate() {
            let col = self.big.basis().col(b);
            for i in 0..n {
                out[i] = out[i].add(&col[i].scale(&w[s]));
            }
        }
        out
    }

    /// The lattice N with M' ⊆ N ⊆ M and N/M' the span of the given classes.
    pub fn sublattice_for_subspace(
        &self,
        classes: &[Vec<FieldElem>],
    ) -> Result<Lattice, LatticeError> {
        let n = self.big.n();
        let mut cols: Vec<Vec<LaurentPoly>> =
            (0..n).map(|j| self.small.basis().col(j)).collect();
        for w in classes {
            cols.push(self.lift(w));
        }
        Lattice::from_generators(&self.tower, cols)
    }

    pub fn sublattice_for_line(&self, class: &[FieldElem]) -> Result<Lattice, LatticeError> {
        self.sublattice_for_subspace(&[class.to_vec()])
    }

    /// The map W → W induced by v ↦ b·σ^twist(v). The endomorphism must
    /// preserve both M and M', otherwise it does not descend.
    pub fn induced(&self, b: &Mat<LaurentPoly>, twist: i64) -> Result<Semilinear, LatticeError> {
        let n = self.big.n();
        if b.nrows() != n || b.ncols() != n {
            return Err(LatticeError::DimensionMismatch(b.nrows(), n));
        }
        let image = |col: Vec<LaurentPoly>| -> Vec<LaurentPoly> {
            let tv: Vec<LaurentPoly> = col.iter().map(|x| x.sigma(twist)).collect();
            b.mul_vec(&tv)
        };
        for j in 0..n {
            if !self.big.contains_vec(&image(self.big.basis().col(j))) {
                return Err(LatticeError::NotContained);
            }
            if !self.small.contains_vec(&image(self.small.basis().col(j))) {
                return Err(LatticeError::NotContained);
            }
        }
        let dim = self.dim();
        assert!(dim > 0, "induced map needs a nonzero quotient");
        let cols: Vec<Vec<FieldElem>> = self
            .basis_rows
            .iter()
            .map(|&r| {
                self.project(&image(self.big.basis().col(r)))
                    .expect("image lies in the lattice")
            })
            .collect();
        let mat = Mat::from_fn(dim, dim, |i, j| cols[j][i].clone());
        Ok(Semilinear::new(mat, twist))
    }
}
