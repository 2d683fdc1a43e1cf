//! Elements of F̄_p stored in their minimal field.
//!
//! A `FieldElem` keeps coordinates over F_p in the basis {g_d^j} of F_{p^d},
//! where d is the smallest degree containing the element. Mixed-degree
//! arithmetic lifts both operands into the compositum and compresses the
//! result back, so equality and hashing are canonical.

use super::tower::{FieldCtx, FieldTower};
use super::ArithError;
use std::cmp::Ordering;
use std::hash::{Hash, Hasher};

#[derive(Clone)]
pub struct FieldElem {
    ctx: FieldCtx,
    coords: Vec<u64>, // length = minimal degree, entries in [0, p)
}

impl std::fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "F{{{}^{}}}{:?}", self.ctx.p(), self.degree(), self.coords)
    }
}

fn lcm32(a: u32, b: u32) -> u32 {
    a / (super::prime::gcd(a as u64, b as u64) as u32) * b
}

impl FieldElem {
    fn make(ctx: FieldCtx, coords: Vec<u64>, deg: u32) -> Self {
        let (_, c) = ctx.normalize_coords(&coords, deg);
        FieldElem { ctx, coords: c }
    }

    pub fn zero(tower: &FieldTower) -> Self {
        FieldElem { ctx: tower.ctx().clone(), coords: vec![0] }
    }

    pub fn one(tower: &FieldTower) -> Self {
        FieldElem { ctx: tower.ctx().clone(), coords: vec![1] }
    }

    /// The image of an integer under F_p ⊂ F̄_p.
    pub fn from_int(tower: &FieldTower, v: i64) -> Self {
        let p = tower.p() as i64;
        FieldElem {
            ctx: tower.ctx().clone(),
            coords: vec![v.rem_euclid(p) as u64],
        }
    }

    /// Element from coordinates over F_p in the basis of F_{p^deg}; deg must
    /// divide the tower degree.
    pub fn from_coords(tower: &FieldTower, coords: &[u64]) -> Result<Self, ArithError> {
        let deg = coords.len() as u32;
        if deg == 0 || tower.degree() % deg != 0 {
            return Err(ArithError::NotASubfield { elem: deg, target: tower.degree() });
        }
        let p = tower.p();
        let c: Vec<u64> = coords.iter().map(|&x| x % p).collect();
        Ok(Self::make(tower.ctx().clone(), c, deg))
    }

    /// The canonical generator g of F_{p^d}.
    pub fn generator(tower: &FieldTower, d: u32) -> Result<Self, ArithError> {
        if d == 0 || tower.degree() % d != 0 {
            return Err(ArithError::NotASubfield { elem: d, target: tower.degree() });
        }
        if d == 1 {
            // root of the canonical degree-1 polynomial x + c is -c
            let f = tower.ctx().defining_poly(1)?;
            let p = tower.p();
            return Ok(FieldElem {
                ctx: tower.ctx().clone(),
                coords: vec![(p - f[0]) % p],
            });
        }
        let mut coords = vec![0u64; d as usize];
        coords[1] = 1;
        Ok(FieldElem { ctx: tower.ctx().clone(), coords })
    }

    /// The k-th element of F_{q^m} in the fixed enumeration order (base-p
    /// digits of k as coordinates).
    pub fn from_index(tower: &FieldTower, mut k: u64) -> Self {
        let p = tower.p();
        let d = tower.degree();
        let mut coords = vec![0u64; d as usize];
        for c in coords.iter_mut() {
            *c = k % p;
            k /= p;
        }
        debug_assert_eq!(k, 0, "index exceeds field size");
        Self::make(tower.ctx().clone(), coords, d)
    }

    pub fn random(tower: &FieldTower, rng: &mut impl rand::Rng) -> Self {
        let p = tower.p();
        let d = tower.degree();
        let coords: Vec<u64> = (0..d).map(|_| rng.gen_range(0..p)).collect();
        Self::make(tower.ctx().clone(), coords, d)
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn p(&self) -> u64 {
        self.ctx.p()
    }

    /// Minimal d with self ∈ F_{p^d}.
    pub fn degree(&self) -> u32 {
        self.coords.len() as u32
    }

    pub fn is_zero(&self) -> bool {
        self.coords.len() == 1 && self.coords[0] == 0
    }

    pub fn is_one(&self) -> bool {
        self.coords.len() == 1 && self.coords[0] == 1
    }

    /// Coordinates in F_{p^d} for any multiple d of the minimal degree.
    pub fn coords_in(&self, d: u32) -> Vec<u64> {
        debug_assert!(d % self.degree() == 0);
        self.ctx.lift_coords(&self.coords, self.degree(), d)
    }

    /// Minimal-field coordinates.
    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    fn common_degree(&self, rhs: &Self) -> u32 {
        lcm32(self.degree(), rhs.degree())
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let d = self.common_degree(rhs);
        let p = self.p();
        let a = self.coords_in(d);
        let b = rhs.coords_in(d);
        let sum: Vec<u64> = a.iter().zip(&b).map(|(x, y)| (x + y) % p).collect();
        Self::make(self.ctx.clone(), sum, d)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let d = self.common_degree(rhs);
        let p = self.p();
        let a = self.coords_in(d);
        let b = rhs.coords_in(d);
        let diff: Vec<u64> = a.iter().zip(&b).map(|(x, y)| (x + p - y) % p).collect();
        Self::make(self.ctx.clone(), diff, d)
    }

    pub fn neg(&self) -> Self {
        let p = self.p();
        let c: Vec<u64> = self.coords.iter().map(|&x| (p - x) % p).collect();
        // negation preserves the minimal field
        FieldElem { ctx: self.ctx.clone(), coords: c }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return FieldElem { ctx: self.ctx.clone(), coords: vec![0] };
        }
        let d = self.common_degree(rhs);
        let a = self.coords_in(d);
        let b = rhs.coords_in(d);
        let prod = self.ctx.mul_coords(&a, &b, d);
        Self::make(self.ctx.clone(), prod, d)
    }

    pub fn inv(&self) -> Result<Self, ArithError> {
        let d = self.degree();
        let c = self
            .ctx
            .inv_coords(&self.coords, d)
            .ok_or(ArithError::DivisionByZero)?;
        // the inverse generates the same subfield, no compression needed
        Ok(FieldElem { ctx: self.ctx.clone(), coords: c })
    }

    pub fn div(&self, rhs: &Self) -> Result<Self, ArithError> {
        Ok(self.mul(&rhs.inv()?))
    }

    pub fn pow(&self, k: i64) -> Result<Self, ArithError> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut exp = k.unsigned_abs();
        let mut acc = FieldElem { ctx: self.ctx.clone(), coords: vec![1] };
        let mut b = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.mul(&b);
            exp >>= 1;
        }
        Ok(acc)
    }

    /// x ↦ x^{p^k}, any integer k.
    pub fn frob_p(&self, k: i64) -> Self {
        let d = self.degree();
        let c = self.ctx.frob_coords(&self.coords, d, k);
        // a field automorphism preserves the minimal field
        FieldElem { ctx: self.ctx.clone(), coords: c }
    }

    /// σ^k where σ = x ↦ x^{p^e}.
    pub fn sigma(&self, k: i64) -> Self {
        self.frob_p(k.wrapping_mul(self.ctx.e() as i64))
    }

    pub fn is_sigma_fixed(&self) -> bool {
        self.ctx.e() % self.degree() == 0
    }

    /// Scalar value when the element lies in F_p.
    pub fn as_prime_int(&self) -> Option<u64> {
        if self.degree() == 1 {
            Some(self.coords[0])
        } else {
            None
        }
    }

    /// Write self ∈ F_{q^m} as Σ c_j·G^j with c_j ∈ F_q, G = g_{em}.
    pub fn scalar_coords(&self, tower: &FieldTower) -> Result<Vec<FieldElem>, ArithError> {
        let e = tower.e();
        let m = tower.m();
        let big = e * m;
        if big % self.degree() != 0 {
            return Err(ArithError::NotASubfield { elem: self.degree(), target: big });
        }
        let inv = tower.ctx().scalar_basis_inverse(m)?;
        let z = self.coords_in(big);
        let w = tower.ctx().apply_fp_matrix(&inv, &z);
        let mut out = Vec::with_capacity(m as usize);
        for j in 0..m as usize {
            let chunk = &w[j * e as usize..(j + 1) * e as usize];
            out.push(Self::make(self.ctx.clone(), chunk.to_vec(), e));
        }
        Ok(out)
    }

    /// Inverse of `scalar_coords`: Σ c_j·G^j.
    pub fn from_scalar_coords(tower: &FieldTower, cs: &[FieldElem]) -> Result<Self, ArithError> {
        assert_eq!(cs.len(), tower.m() as usize);
        let g = Self::generator(tower, tower.degree())?;
        let mut acc = Self::zero(tower);
        let mut gpow = Self::one(tower);
        for c in cs {
            acc = acc.add(&c.mul(&gpow));
            gpow = gpow.mul(&g);
        }
        Ok(acc)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.coords
                .iter()
                .map(|&c| serde_json::Value::from(c))
                .collect(),
        )
    }

    pub fn from_json(tower: &FieldTower, v: &serde_json::Value) -> Result<Self, ArithError> {
        let arr = v.as_array().ok_or(ArithError::BadEncoding)?;
        let mut coords = Vec::with_capacity(arr.len());
        for x in arr {
            coords.push(x.as_u64().ok_or(ArithError::BadEncoding)?);
        }
        if coords.is_empty() {
            return Err(ArithError::BadEncoding);
        }
        Self::from_coords(tower, &coords)
    }
}

impl PartialEq for FieldElem {
    fn eq(&self, other: &Self) -> bool {
        debug_assert_eq!(self.p(), other.p(), "elements from different closures");
        self.coords == other.coords
    }
}
impl Eq for FieldElem {}

impl Hash for FieldElem {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.coords.hash(state);
    }
}

impl PartialOrd for FieldElem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FieldElem {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.coords.len(), &self.coords).cmp(&(other.coords.len(), &other.coords))
    }
}

/// Zero element tied to a context, for modules that hold a ctx but no tower.
pub(crate) fn zero_with_ctx(ctx: FieldCtx) -> FieldElem {
    FieldElem { ctx, coords: vec![0] }
}

pub(crate) fn one_with_ctx(ctx: FieldCtx) -> FieldElem {
    FieldElem { ctx, coords: vec![1] }
}
