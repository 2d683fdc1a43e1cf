//! Periodic lattice chains: families M_i indexed by a subset of Z/nZ with
//! M_i ⊆ M_j for i < j, M_{i+n} = t^{-1}·M_i, and dim(M_j/M_i) = j − i.
//! Only residues in [0, n) are stored; other indices are derived by scaling.

use std::collections::BTreeMap;

use serde_json::Value;

use super::{Lattice, LatticeError, SymplecticForm};
use crate::arith::FieldTower;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChainError {
    #[error("a chain needs at least one lattice")]
    Empty,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("two lattices were given for index {0} (mod the period)")]
    IndexCollision(i64),
    #[error("lattice at index {0} is not contained in the one at index {1}")]
    InclusionFailed(i64, i64),
    #[error("colength from index {lo} to {hi} should be {expected}, found {found}")]
    ColengthMismatch { lo: i64, hi: i64, expected: i64, found: i64 },
    #[error("chain indices are not closed under negation (index {0} has no partner)")]
    NotClosedUnderDuality(i64),
    #[error("dual of the lattice at index {0} is not a chain member up to t-power")]
    NotSelfDual(i64),
    #[error("duality defect differs between chain members")]
    InconsistentDefect,
    #[error("malformed chain encoding")]
    BadEncoding,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// A lattice chain of some type Ī ⊆ Z/nZ, where n is the ambient dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeChain {
    tower: FieldTower,
    n: usize,
    members: BTreeMap<i64, Lattice>,
    defect: Option<i64>,
}

impl LatticeChain {
    /// Build a chain from indexed lattices and verify the chain conditions.
    /// Indices may be arbitrary integers; they are reduced mod the period.
    pub fn new(lattices: Vec<(i64, Lattice)>) -> Result<Self, ChainError> {
        let first = lattices.first().ok_or(ChainError::Empty)?;
        let n = first.1.n();
        let tower = first.1.tower().clone();
        let mut members: BTreeMap<i64, Lattice> = BTreeMap::new();
        for (i, l) in lattices {
            if l.n() != n {
                return Err(ChainError::DimensionMismatch(n, l.n()));
            }
            let r = i.rem_euclid(n as i64);
            let k = (i - r) / n as i64;
            // M_i = t^{-k}·M_r, so the stored representative is t^k·M_i
            let lr = l.scaled(k);
            match members.get(&r) {
                Some(prev) if *prev != lr => return Err(ChainError::IndexCollision(r)),
                Some(_) => {}
                None => {
                    members.insert(r, lr);
                }
            }
        }
        let chain = LatticeChain { tower, n, members, defect: None };
        chain.check_inclusions()?;
        Ok(chain)
    }

    /// A single lattice is a chain of type {0}.
    pub fn from_lattice(l: Lattice) -> Self {
        let tower = l.tower().clone();
        let n = l.n();
        let mut members = BTreeMap::new();
        members.insert(0, l);
        // M ⊆ t^{-1}M with colength n holds for every lattice
        LatticeChain { tower, n, members, defect: None }
    }

    /// The full standard chain: Λ_i = t^{-1}O^i ⊕ O^{n-i} for 0 ≤ i < n.
    pub fn standard_full(tower: &FieldTower, n: usize) -> Self {
        assert!(n >= 1);
        let members = (0..n as i64)
            .map(|i| {
                let exps: Vec<i64> =
                    (0..n).map(|j| if (j as i64) < i { -1 } else { 0 }).collect();
                (i, Lattice::from_diag_exponents(tower, &exps))
            })
            .collect();
        LatticeChain { tower: tower.clone(), n, members, defect: None }
    }

    fn check_inclusions(&self) -> Result<(), ChainError> {
        let idx: Vec<i64> = self.members.keys().copied().collect();
        for w in idx.windows(2) {
            self.check_step(w[0], w[1])?;
        }
        // wrap around one period
        self.check_step(*idx.last().unwrap(), idx[0] + self.n as i64)
    }

    fn check_step(&self, lo: i64, hi: i64) -> Result<(), ChainError> {
        let a = self.member(lo).unwrap();
        let b = self.member(hi).unwrap();
        let expected = hi - lo;
        let found = a.val_det() - b.val_det();
        if found != expected {
            return Err(ChainError::ColengthMismatch { lo, hi, expected, found });
        }
        if !b.contains_lattice(&a) {
            return Err(ChainError::InclusionFailed(lo, hi));
        }
        Ok(())
    }

    pub fn tower(&self) -> &FieldTower {
        &self.tower
    }

    /// The period, which equals the ambient dimension.
    pub fn period(&self) -> usize {
        self.n
    }

    /// Sorted representatives in [0, n) of the chain's type.
    pub fn indices(&self) -> Vec<i64> {
        self.members.keys().copied().collect()
    }

    pub fn is_full(&self) -> bool {
        self.members.len() == self.n
    }

    /// M_i for any integer i, derived from the stored residue by scaling.
    pub fn member(&self, i: i64) -> Option<Lattice> {
        let n = self.n as i64;
        let r = i.rem_euclid(n);
        let k = (i - r) / n;
        self.members.get(&r).map(|l| l.scaled(-k))
    }

    /// Stored members at their reduced indices.
    pub fn members(&self) -> impl Iterator<Item = (i64, &Lattice)> + '_ {
        self.members.iter().map(|(i, l)| (*i, l))
    }

    /// The chain enlarged by M_i = l, revalidated.
    pub fn with_member(&self, i: i64, l: Lattice) -> Result<Self, ChainError> {
        let mut v: Vec<(i64, Lattice)> =
            self.members.iter().map(|(k, m)| (*k, m.clone())).collect();
        v.push((i, l));
        let mut c = Self::new(v)?;
        c.defect = self.defect;
        Ok(c)
    }

    pub fn defect(&self) -> Option<i64> {
        self.defect
    }

    pub fn with_defect(mut self, d: i64) -> Self {
        self.defect = Some(d);
        self
    }

    /// Check M_i^⊥ = M_{-i+d·n} for a single integer d across all members and
    /// return that d. The chain's type must be closed under negation mod n.
    pub fn validate_selfdual(&self, form: &SymplecticForm) -> Result<i64, ChainError> {
        let n = self.n as i64;
        let mut d: Option<i64> = None;
        for (&r, l) in &self.members {
            let dual = l.dual_symplectic(form)?;
            let mr = self.member(-r).ok_or(ChainError::NotClosedUnderDuality(r))?;
            // dual = t^{-d}·M_{-r} forces d·n = val det M_{-r} − val det dual
            let diff = mr.val_det() - dual.val_det();
            if diff % n != 0 {
                return Err(ChainError::NotSelfDual(r));
            }
            let di = diff / n;
            if dual != mr.scaled(-di) {
                return Err(ChainError::NotSelfDual(r));
            }
            match d {
                None => d = Some(di),
                Some(d0) if d0 != di => return Err(ChainError::InconsistentDefect),
                Some(_) => {}
            }
        }
        d.ok_or(ChainError::Empty)
    }

    pub fn to_json(&self) -> Value {
        let mut lats = serde_json::Map::new();
        for (r, l) in &self.members {
            lats.insert(r.to_string(), l.to_json());
        }
        let mut obj = serde_json::Map::new();
        obj.insert("type".into(), serde_json::json!(self.indices()));
        obj.insert("lattices".into(), Value::Object(lats));
        if let Some(d) = self.defect {
            obj.insert("defect".into(), serde_json::json!(d));
        }
        Value::Object(obj)
    }

    /// Accepts either the chain object encoding or a bare lattice matrix,
    /// which is read as a single-member chain.
    pub fn from_json(tower: &FieldTower, v: &Value) -> Result<Self, ChainError> {
        if v.is_array() {
            return Ok(Self::from_lattice(Lattice::from_json(tower, v)?));
        }
        let obj = v.as_object().ok_or(ChainError::BadEncoding)?;
        let lats = obj
            .get("lattices")
            .and_then(|x| x.as_object())
            .ok_or(ChainError::BadEncoding)?;
        let mut pairs = Vec::with_capacity(lats.len());
        for (k, m) in lats {
            let i: i64 = k.parse().map_err(|_| ChainError::BadEncoding)?;
            pairs.push((i, Lattice::from_json(tower, m)?));
        }
        let mut chain = Self::new(pairs)?;
        if let Some(ty) = obj.get("type") {
            let ty = ty.as_array().ok_or(ChainError::BadEncoding)?;
            let mut want = Vec::with_capacity(ty.len());
            for x in ty {
                let i = x.as_i64().ok_or(ChainError::BadEncoding)?;
                want.push(i.rem_euclid(chain.n as i64));
            }
            want.sort_unstable();
            want.dedup();
            if want != chain.indices() {
                return Err(ChainError::BadEncoding);
            }
        }
        if let Some(d) = obj.get("defect") {
            chain.defect = Some(d.as_i64().ok_or(ChainError::BadEncoding)?);
        }
        Ok(chain)
    }
}
