//! Laurent polynomials over the field tower, with explicit truncation.
//!
//! A value is either exact (finitely many known terms, all others zero) or
//! truncated at N (terms at exponents ≥ N are unknown). All ring operations
//! propagate the truncation point conservatively, so precision loss is
//! visible in the type rather than silent.

use super::fq::FieldElem;
use super::tower::{FieldCtx, FieldTower};
use super::ArithError;
use std::cmp::Ordering;

const INF: i64 = i64::MAX / 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Prec {
    Exact,
    TruncatedAt(i64),
}

impl Prec {
    fn bound(self) -> i64 {
        match self {
            Prec::Exact => INF,
            Prec::TruncatedAt(n) => n,
        }
    }

    fn from_bound(b: i64) -> Prec {
        if b >= INF {
            Prec::Exact
        } else {
            Prec::TruncatedAt(b)
        }
    }
}

#[derive(Clone)]
pub struct LaurentPoly {
    ctx: FieldCtx,
    terms: Vec<(i64, FieldElem)>, // ascending exponents, nonzero coefficients
    prec: Prec,
}

impl std::fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{:?}·t^{}", c, e)?;
        }
        if let Prec::TruncatedAt(n) = self.prec {
            write!(f, " + O(t^{})", n)?;
        }
        Ok(())
    }
}

impl LaurentPoly {
    fn normalized(ctx: FieldCtx, mut terms: Vec<(i64, FieldElem)>, prec: Prec) -> Self {
        terms.sort_by_key(|&(e, _)| e);
        let mut merged: Vec<(i64, FieldElem)> = Vec::with_capacity(terms.len());
        for (e, c) in terms {
            if e >= prec.bound() {
                continue;
            }
            match merged.last_mut() {
                Some((le, lc)) if *le == e => *lc = lc.add(&c),
                _ => merged.push((e, c)),
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        LaurentPoly { ctx, terms: merged, prec }
    }

    pub fn zero(tower: &FieldTower) -> Self {
        LaurentPoly { ctx: tower.ctx().clone(), terms: Vec::new(), prec: Prec::Exact }
    }

    pub fn one(tower: &FieldTower) -> Self {
        Self::monomial(tower, 0, FieldElem::one(tower))
    }

    /// The uniformizer t.
    pub fn t(tower: &FieldTower) -> Self {
        Self::monomial(tower, 1, FieldElem::one(tower))
    }

    pub fn t_pow(tower: &FieldTower, k: i64) -> Self {
        Self::monomial(tower, k, FieldElem::one(tower))
    }

    pub fn monomial(tower: &FieldTower, exp: i64, coeff: FieldElem) -> Self {
        let terms = if coeff.is_zero() { Vec::new() } else { vec![(exp, coeff)] };
        LaurentPoly { ctx: tower.ctx().clone(), terms, prec: Prec::Exact }
    }

    pub fn constant(tower: &FieldTower, coeff: FieldElem) -> Self {
        Self::monomial(tower, 0, coeff)
    }

    pub fn from_terms(tower: &FieldTower, terms: Vec<(i64, FieldElem)>) -> Self {
        Self::normalized(tower.ctx().clone(), terms, Prec::Exact)
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn prec(&self) -> Prec {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec == Prec::Exact
    }

    pub fn terms(&self) -> &[(i64, FieldElem)] {
        &self.terms
    }

    /// True when this provably equals 0 (no known terms, no unknown region).
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.prec == Prec::Exact
    }

    /// True when no terms are known (possibly because of truncation).
    pub fn has_no_known_terms(&self) -> bool {
        self.terms.is_empty()
    }

    /// Smallest exponent with a (known) nonzero coefficient.
    pub fn valuation(&self) -> Option<i64> {
        self.terms.first().map(|&(e, _)| e)
    }

    /// Valuation usable for exact nonzero input; errors distinguish a true
    /// zero from one whose leading term is lost to truncation.
    pub fn valuation_checked(&self) -> Result<i64, ArithError> {
        match (self.terms.first(), self.prec) {
            (Some(&(e, _)), _) => Ok(e),
            (None, Prec::Exact) => Err(ArithError::DivisionByZero),
            (None, Prec::TruncatedAt(n)) =>

                Err(ArithError::InsufficientPrecision { needed: n, precision: n }),
        }
    }

    /// Largest known exponent.
    pub fn top_exponent(&self) -> Option<i64> {
        self.terms.last().map(|&(e, _)| e)
    }

    pub fn leading_coeff(&self) -> Option<&FieldElem> {
        self.terms.first().map(|(_, c)| c)
    }

    pub fn coeff(&self, exp: i64) -> Result<FieldElem, ArithError> {
        if exp >= self.prec.bound() {
            return Err(ArithError::InsufficientPrecision {
                needed: exp,
                precision: self.prec.bound(),
            });
        }
        Ok(self
            .terms
            .iter()
            .find(|&&(e, _)| e == exp)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(|| super::fq::zero_with_ctx(self.ctx.clone())))
    }

    /// Lower bound below which all coefficients are known, used for precision
    /// propagation in products.
    fn val_floor(&self) -> i64 {
        match self.terms.first() {
            Some(&(e, _)) => e,
            None => self.prec.bound(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let prec = Prec::from_bound(self.prec.bound().min(rhs.prec.bound()));
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&rhs.terms);
        Self::normalized(self.ctx.clone(), terms, prec)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        LaurentPoly {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(e, c)| (*e, c.neg())).collect(),
            prec: self.prec,
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return LaurentPoly { ctx: self.ctx.clone(), terms: Vec::new(), prec: Prec::Exact };
        }
        let ba = match self.prec {
            Prec::Exact => INF,
            Prec::TruncatedAt(n) => n.saturating_add(rhs.val_floor()).min(INF),
        };
        let bb = match rhs.prec {
            Prec::Exact => INF,
            Prec::TruncatedAt(n) => n.saturating_add(self.val_floor()).min(INF),
        };
        let bound = ba.min(bb);
        let mut terms = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                terms.push((ea + eb, ca.mul(cb)));
            }
        }
        Self::normalized(self.ctx.clone(), terms, Prec::from_bound(bound))
    }

    pub fn scale(&self, c: &FieldElem) -> Self {
        if c.is_zero() {
            return LaurentPoly { ctx: self.ctx.clone(), terms: Vec::new(), prec: Prec::Exact };
        }
        LaurentPoly {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(e, a)| (*e, a.mul(c))).collect(),
            prec: self.prec,
        }
    }

    /// Multiply by t^k.
    pub fn shift(&self, k: i64) -> Self {
        let prec = match self.prec {
            Prec::Exact => Prec::Exact,
            Prec::TruncatedAt(n) => Prec::TruncatedAt(n + k),
        };
        LaurentPoly {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(e, c)| (e + k, c.clone())).collect(),
            prec,
        }
    }

    /// σ^k applied to every coefficient (t is fixed).
    pub fn sigma(&self, k: i64) -> Self {
        LaurentPoly {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(e, c)| (*e, c.sigma(k))).collect(),
            prec: self.prec,
        }
    }

    /// Forget all terms at exponents ≥ n.
    pub fn truncated(&self, n: i64) -> Self {
        let prec = Prec::from_bound(self.prec.bound().min(n));
        Self::normalized(self.ctx.clone(), self.terms.clone(), prec)
    }

    /// Split an exact value as (terms with exp < n, terms with exp ≥ n).
    pub fn split_at_exp(&self, n: i64) -> (Self, Self) {
        debug_assert!(self.is_exact(), "splitting a truncated value loses information");
        let (lo, hi): (Vec<_>, Vec<_>) = self.terms.iter().cloned().partition(|&(e, _)| e < n);
        (
            LaurentPoly { ctx: self.ctx.clone(), terms: lo, prec: Prec::Exact },
            LaurentPoly { ctx: self.ctx.clone(), terms: hi, prec: Prec::Exact },
        )
    }

    /// Multiplicative inverse as a series with n known terms: the result is
    /// correct at exponents < -val(f) + n. Exact monomials invert exactly.
    pub fn series_invert(&self, n: i64) -> Result<Self, ArithError> {
        let v = self.valuation_checked()?;
        if self.terms.len() == 1 && self.is_exact() {
            let (e, c) = &self.terms[0];
            return Ok(LaurentPoly {
                ctx: self.ctx.clone(),
                terms: vec![(-e, c.inv()?)],
                prec: Prec::Exact,
            });
        }
        // need the first n coefficients of the unit part u = t^{-v} f
        let have = self.prec.bound().saturating_sub(v).min(INF);
        if have < n {
            return Err(ArithError::InsufficientPrecision { needed: v + n, precision: self.prec.bound() });
        }
        let c0 = self.leading_coeff().unwrap().clone();
        let c0inv = c0.inv()?;
        // u coefficients indexed by 0..n
        let mut ucoef: Vec<FieldElem> = Vec::with_capacity(n as usize);
        for j in 0..n {
            ucoef.push(self.coeff(v + j).unwrap_or_else(|_| unreachable!("checked above")));
        }
        let mut w: Vec<FieldElem> = Vec::with_capacity(n as usize);
        for j in 0..n as usize {
            if j == 0 {
                w.push(c0inv.clone());
                continue;
            }
            let mut acc = super::fq::zero_with_ctx(self.ctx.clone());
            for i in 1..=j {
                acc = acc.add(&ucoef[i].mul(&w[j - i]));
            }
            w.push(acc.neg().mul(&c0inv));
        }
        let terms: Vec<(i64, FieldElem)> = w
            .into_iter()
            .enumerate()
            .map(|(j, c)| (j as i64 - v, c))
            .collect();
        Ok(Self::normalized(
            self.ctx.clone(),
            terms,
            Prec::TruncatedAt(n - v),
        ))
    }

    pub(crate) fn zero_like(&self) -> Self {
        LaurentPoly { ctx: self.ctx.clone(), terms: Vec::new(), prec: Prec::Exact }
    }

    pub(crate) fn one_like(&self) -> Self {
        LaurentPoly {
            ctx: self.ctx.clone(),
            terms: vec![(0, super::fq::one_with_ctx(self.ctx.clone()))],
            prec: Prec::Exact,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.terms
                .iter()
                .map(|(e, c)| serde_json::json!([e, c.to_json()]))
                .collect(),
        )
    }

    pub fn from_json(tower: &FieldTower, v: &serde_json::Value) -> Result<Self, ArithError> {
        let arr = v.as_array().ok_or(ArithError::BadEncoding)?;
        let mut terms = Vec::with_capacity(arr.len());
        for pair in arr {
            let pair = pair.as_array().ok_or(ArithError::BadEncoding)?;
            if pair.len() != 2 {
                return Err(ArithError::BadEncoding);
            }
            let e = pair[0].as_i64().ok_or(ArithError::BadEncoding)?;
            let c = FieldElem::from_json(tower, &pair[1])?;
            terms.push((e, c));
        }
        Ok(Self::from_terms(tower, terms))
    }
}

impl PartialEq for LaurentPoly {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms && self.prec == other.prec
    }
}
impl Eq for LaurentPoly {}

impl PartialOrd for LaurentPoly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LaurentPoly {
    fn cmp(&self, other: &Self) -> Ordering {
        self.terms
            .len()
            .cmp(&other.terms.len())
            .then_with(|| self.terms.cmp(&other.terms))
            .then_with(|| self.prec.bound().cmp(&other.prec.bound()))
    }
}
