//! Compatible towers of finite fields F_{p^d} with canonical generators.
//!
//! Each degree d gets a canonical monic irreducible polynomial over F_p,
//! chosen as the lexicographically first (in sign-twisted coefficient order)
//! primitive polynomial whose root is norm-compatible with the generators of
//! all proper subfields. Subfield embeddings g_d ↦ g_D^{(p^D-1)/(p^d-1)} then
//! commute on the nose, so elements of F̄_p can be stored in their minimal
//! field and lifted on demand.

use super::prime::{is_prime, powmod, prime_factors};
use super::ArithError;
use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

// ---------------------------------------------------------------------------
// dense polynomials over F_p: ascending coefficients, no trailing zeros
// ---------------------------------------------------------------------------

pub(crate) fn pnorm(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

pub(crate) fn padd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![0u64; a.len().max(b.len())];
    for (i, &c) in a.iter().enumerate() {
        out[i] = c;
    }
    for (i, &c) in b.iter().enumerate() {
        out[i] = (out[i] + c) % p;
    }
    pnorm(&mut out);
    out
}

pub(crate) fn psub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![0u64; a.len().max(b.len())];
    for (i, &c) in a.iter().enumerate() {
        out[i] = c;
    }
    for (i, &c) in b.iter().enumerate() {
        out[i] = (out[i] + p - c) % p;
    }
    pnorm(&mut out);
    out
}

pub(crate) fn pmul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    pnorm(&mut out);
    out
}

/// Remainder of `a` modulo monic `f`.
pub(crate) fn prem(a: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    debug_assert!(*f.last().unwrap() == 1, "modulus must be monic");
    let mut r = a.to_vec();
    let d = f.len() - 1;
    while r.len() > d {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - d;
        if lead != 0 {
            for (i, &c) in f.iter().enumerate() {
                let idx = i + shift;
                r[idx] = (r[idx] + (p - lead % p) * c) % p;
            }
        }
        r.pop();
        pnorm(&mut r);
        if r.len() <= d {
            break;
        }
    }
    pnorm(&mut r);
    r
}

pub(crate) fn pmulmod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    prem(&pmul(a, b, p), f, p)
}

pub(crate) fn ppowmod(base: &[u64], mut exp: u64, f: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut b = prem(base, f, p);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = pmulmod(&acc, &b, f, p);
        }
        b = pmulmod(&b, &b, f, p);
        exp >>= 1;
    }
    acc
}

fn pgcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    while !b.is_empty() {
        // make b monic so prem applies
        let lead_inv = powmod(*b.last().unwrap(), p - 2, p);
        let bm: Vec<u64> = b.iter().map(|&c| c * lead_inv % p).collect();
        let r = prem(&a, &bm, p);
        a = b;
        b = r;
    }
    if let Some(&l) = a.last() {
        let li = powmod(l, p - 2, p);
        for c in a.iter_mut() {
            *c = *c * li % p;
        }
    }
    a
}

/// Extended Euclid: inverse of `a` modulo monic irreducible `f`.
fn pinvmod(a: &[u64], f: &[u64], p: u64) -> Option<Vec<u64>> {
    let a = prem(a, f, p);
    if a.is_empty() {
        return None;
    }
    let (mut r0, mut r1) = (f.to_vec(), a);
    let (mut s0, mut s1) = (Vec::new(), vec![1u64]);
    while !r1.is_empty() {
        let lead_inv = powmod(*r1.last().unwrap(), p - 2, p);
        let r1m: Vec<u64> = r1.iter().map(|&c| c * lead_inv % p).collect();
        // quotient of r0 by r1m via repeated lead cancellation
        let mut q = vec![0u64; r0.len().saturating_sub(r1m.len()) + 1];
        let mut rem = r0.clone();
        while rem.len() >= r1m.len() && !rem.is_empty() {
            let shift = rem.len() - r1m.len();
            let c = *rem.last().unwrap();
            q[shift] = (q[shift] + c) % p;
            for (i, &fc) in r1m.iter().enumerate() {
                rem[i + shift] = (rem[i + shift] + (p - c) * fc % p) % p;
            }
            pnorm(&mut rem);
        }
        pnorm(&mut q);
        // scale q back: r0 = q·r1m + rem = (q·lead_inv)·r1 + rem
        let qs: Vec<u64> = q.iter().map(|&c| c * lead_inv % p).collect();
        let s2 = psub(&s0, &pmul(&qs, &s1, p), p);
        r0 = r1;
        r1 = rem;
        s0 = s1;
        s1 = s2;
    }
    // r0 is the gcd, a nonzero constant since f is irreducible and a ≠ 0
    let c = powmod(r0[0], p - 2, p);
    Some(s0.iter().map(|&x| x * c % p).collect())
}

// ---------------------------------------------------------------------------
// small dense linear algebra over F_p (column-major)
// ---------------------------------------------------------------------------

fn mat_apply(cols: &[Vec<u64>], v: &[u64], p: u64) -> Vec<u64> {
    let n = cols.first().map_or(0, |c| c.len());
    let mut out = vec![0u64; n];
    for (j, col) in cols.iter().enumerate() {
        let x = v[j];
        if x == 0 {
            continue;
        }
        for (i, &c) in col.iter().enumerate() {
            out[i] = (out[i] + x * c) % p;
        }
    }
    out
}

/// Invert a square matrix given column-major; None if singular.
fn mat_inverse(cols: &[Vec<u64>], p: u64) -> Option<Vec<Vec<u64>>> {
    let n = cols.len();
    // rows of [A | I], row-major for elimination
    let mut aug: Vec<Vec<u64>> = (0..n)
        .map(|i| {
            let mut row = vec![0u64; 2 * n];
            for j in 0..n {
                row[j] = cols[j][i];
            }
            row[n + i] = 1;
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| aug[r][col] != 0)?;
        aug.swap(col, piv);
        let inv = powmod(aug[col][col], p - 2, p);
        for x in aug[col].iter_mut() {
            *x = *x * inv % p;
        }
        for r in 0..n {
            if r != col && aug[r][col] != 0 {
                let f = aug[r][col];
                for j in 0..2 * n {
                    aug[r][j] = (aug[r][j] + (p - f) * aug[col][j]) % p;
                }
            }
        }
    }
    Some((0..n).map(|j| (0..n).map(|i| aug[i][n + j]).collect()).collect())
}

// ---------------------------------------------------------------------------
// tower context
// ---------------------------------------------------------------------------

struct Caches {
    poly: BTreeMap<u32, Vec<u64>>,
    frob: BTreeMap<u32, Vec<Vec<u64>>>,
    embed: BTreeMap<(u32, u32), Vec<Vec<u64>>>,
    unembed: BTreeMap<(u32, u32), (Vec<usize>, Vec<Vec<u64>>)>,
    scalar_basis: BTreeMap<u32, Vec<Vec<u64>>>,
}

struct CtxInner {
    p: u64,
    e: u32,
    caches: Mutex<Caches>,
}

/// Shared context for one ambient algebraic closure of F_p, together with the
/// Frobenius power e defining σ = (x ↦ x^{p^e}). Cheap to clone.
#[derive(Clone)]
pub struct FieldCtx(Arc<CtxInner>);

impl std::fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FieldCtx(p={}, e={})", self.p(), self.e())
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.p() == other.p() && self.e() == other.e())
    }
}
impl Eq for FieldCtx {}

impl FieldCtx {
    pub fn new(p: u64, e: u32) -> Result<Self, ArithError> {
        if !is_prime(p) {
            return Err(ArithError::NotPrime(p));
        }
        assert!(e >= 1, "frobenius power must be positive");
        Ok(FieldCtx(Arc::new(CtxInner {
            p,
            e,
            caches: Mutex::new(Caches {
                poly: BTreeMap::new(),
                frob: BTreeMap::new(),
                embed: BTreeMap::new(),
                unembed: BTreeMap::new(),
                scalar_basis: BTreeMap::new(),
            }),
        })))
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }

    /// σ = x ↦ x^{p^e}; the fixed field of σ is F_q with q = p^e.
    pub fn e(&self) -> u32 {
        self.0.e
    }

    pub fn q(&self) -> u64 {
        self.0.p.pow(self.0.e)
    }

    fn order_minus_one(&self, d: u32) -> Result<u64, ArithError> {
        let p = self.0.p;
        match p.checked_pow(d) {
            Some(q) => Ok(q - 1),
            None => Err(ArithError::TowerTooLarge { p, degree: d }),
        }
    }

    /// The canonical monic irreducible polynomial defining F_{p^d}.
    pub fn defining_poly(&self, d: u32) -> Result<Vec<u64>, ArithError> {
        assert!(d >= 1);
        if let Some(f) = self.0.caches.lock().unwrap().poly.get(&d) {
            return Ok(f.clone());
        }
        // subfield generators first (never hold the lock across recursion)
        let mut sub = Vec::new();
        for dd in 1..d {
            if d % dd == 0 {
                sub.push((dd, self.defining_poly(dd)?));
            }
        }
        let f = self.search_canonical(d, &sub)?;
        self.0.caches.lock().unwrap().poly.insert(d, f.clone());
        Ok(f)
    }

    fn search_canonical(&self, n: u32, sub: &[(u32, Vec<u64>)]) -> Result<Vec<u64>, ArithError> {
        let p = self.0.p;
        let qm1 = self.order_minus_one(n)?;
        let order_facts = prime_factors(qm1);
        let small_facts = prime_factors(n as u64);
        let mut counter = vec![0u64; n as usize]; // counter[j] drives coefficient j
        loop {
            // coefficient c_j = (-1)^{n-j}·counter[j] mod p, candidate monic of degree n
            let mut f: Vec<u64> = (0..n as usize)
                .map(|j| {
                    let a = counter[j];
                    if (n as usize - j) % 2 == 1 {
                        (p - a) % p
                    } else {
                        a
                    }
                })
                .collect();
            f.push(1);
            if f[0] != 0 && self.passes_canonical(&f, n, qm1, &order_facts, &small_facts, sub) {
                return Ok(f);
            }
            // lexicographic increment: counter[n-1] most significant, counter[0] fastest
            let mut j = 0usize;
            loop {
                counter[j] += 1;
                if counter[j] < p {
                    break;
                }
                counter[j] = 0;
                j += 1;
                if j == n as usize {
                    unreachable!("primitive polynomial exists for every degree");
                }
            }
        }
    }

    fn passes_canonical(
        &self,
        f: &[u64],
        n: u32,
        qm1: u64,
        order_facts: &[u64],
        small_facts: &[u64],
        sub: &[(u32, Vec<u64>)],
    ) -> bool {
        let p = self.0.p;
        let x = vec![0u64, 1];
        // irreducibility: x^{p^n} ≡ x, and gcd(x^{p^{n/ℓ}} - x, f) = 1 for primes ℓ | n
        let mut frob_ladder = vec![x.clone()]; // frob_ladder[k] = x^{p^k} mod f
        for _ in 0..n {
            let next = ppowmod(frob_ladder.last().unwrap(), p, f, p);
            frob_ladder.push(next);
        }
        if frob_ladder[n as usize] != prem(&x, f, p) {
            return false;
        }
        for &l in small_facts {
            let k = n as u64 / l;
            let g = pgcd(&psub(&frob_ladder[k as usize], &x, p), f, p);
            if g.len() != 1 {
                return false;
            }
        }
        // primitivity: x has order exactly p^n - 1
        for &r in order_facts {
            if ppowmod(&x, qm1 / r, f, p) == vec![1u64] {
                return false;
            }
        }
        // norm compatibility with each proper subfield generator
        for (dd, fd) in sub {
            let exp = qm1 / (p.pow(*dd) - 1);
            let y = ppowmod(&x, exp, f, p);
            let mut acc = Vec::new(); // fd evaluated at y, mod f
            let mut ypow = vec![1u64];
            for &c in fd.iter() {
                if c != 0 {
                    acc = padd(&acc, &pmul(&[c], &ypow, p), p);
                }
                ypow = pmulmod(&ypow, &y, f, p);
            }
            if !prem(&acc, f, p).is_empty() {
                return false;
            }
        }
        true
    }

    /// Column-major matrix of x ↦ x^p on F_{p^d} in the basis {g_d^j}.
    fn frob_matrix(&self, d: u32) -> Result<Vec<Vec<u64>>, ArithError> {
        if let Some(m) = self.0.caches.lock().unwrap().frob.get(&d) {
            return Ok(m.clone());
        }
        let f = self.defining_poly(d)?;
        let p = self.0.p;
        let h = ppowmod(&[0, 1], p, &f, p); // g^p
        let mut cols = Vec::with_capacity(d as usize);
        let mut acc = vec![1u64];
        for _ in 0..d {
            let mut col = acc.clone();
            col.resize(d as usize, 0);
            cols.push(col);
            acc = pmulmod(&acc, &h, &f, p);
        }
        self.0.caches.lock().unwrap().frob.insert(d, cols.clone());
        Ok(cols)
    }

    /// Columns of the embedding F_{p^d} ↪ F_{p^D}: column j is g_D-coords of
    /// the image of g_d^j.
    fn embed_cols(&self, d: u32, big: u32) -> Result<Vec<Vec<u64>>, ArithError> {
        debug_assert!(big % d == 0 && d < big);
        if let Some(m) = self.0.caches.lock().unwrap().embed.get(&(d, big)) {
            return Ok(m.clone());
        }
        let p = self.0.p;
        let f = self.defining_poly(big)?;
        let qm1 = self.order_minus_one(big)?;
        let exp = qm1 / (p.pow(d) - 1);
        let h = ppowmod(&[0, 1], exp, &f, p);
        let mut cols = Vec::with_capacity(d as usize);
        let mut acc = vec![1u64];
        for _ in 0..d {
            let mut col = acc.clone();
            col.resize(big as usize, 0);
            cols.push(col);
            acc = pmulmod(&acc, &h, &f, p);
        }
        self.0
            .caches
            .lock()
            .unwrap()
            .embed
            .insert((d, big), cols.clone());
        Ok(cols)
    }

    fn unembed_solver(&self, d: u32, big: u32) -> Result<(Vec<usize>, Vec<Vec<u64>>), ArithError> {
        if let Some(s) = self.0.caches.lock().unwrap().unembed.get(&(d, big)) {
            return Ok(s.clone());
        }
        let p = self.0.p;
        let cols = self.embed_cols(d, big)?;
        // pick d pivot rows making the square submatrix invertible
        let mut rows: Vec<usize> = Vec::new();
        let mut work: Vec<Vec<u64>> = cols.clone(); // columns, progressively eliminated
        for j in 0..d as usize {
            let r = (0..big as usize)
                .find(|&r| !rows.contains(&r) && work[j][r] != 0)
                .expect("embedding matrix has full column rank");
            rows.push(r);
            let inv = powmod(work[j][r], p - 2, p);
            for jj in j + 1..d as usize {
                let c = work[jj][r] * inv % p;
                if c != 0 {
                    for i in 0..big as usize {
                        work[jj][i] = (work[jj][i] + (p - c) * work[j][i]) % p;
                    }
                }
            }
        }
        let square: Vec<Vec<u64>> = cols
            .iter()
            .map(|col| rows.iter().map(|&r| col[r]).collect())
            .collect();
        let inv = mat_inverse(&square, p).expect("pivot rows chosen to be invertible");
        let solver = (rows, inv);
        self.0
            .caches
            .lock()
            .unwrap()
            .unembed
            .insert((d, big), solver.clone());
        Ok(solver)
    }

    /// Lift coords from F_{p^d} to F_{p^D} (d | D).
    pub(crate) fn lift_coords(&self, coords: &[u64], d: u32, big: u32) -> Vec<u64> {
        if d == big {
            return coords.to_vec();
        }
        let cols = self
            .embed_cols(d, big)
            .expect("lift target degree was validated at tower construction");
        mat_apply(&cols, coords, self.0.p)
    }

    /// Apply x ↦ x^{p^k} on F_{p^d}, k reduced mod d.
    pub(crate) fn frob_coords(&self, coords: &[u64], d: u32, k: i64) -> Vec<u64> {
        let steps = k.rem_euclid(d as i64) as u32;
        if steps == 0 {
            return coords.to_vec();
        }
        let m = self
            .frob_matrix(d)
            .expect("frobenius on a degree already admitted to the tower");
        let mut v = coords.to_vec();
        for _ in 0..steps {
            v = mat_apply(&m, &v, self.0.p);
        }
        v
    }

    /// Compress coords in F_{p^D} to the minimal subfield: returns (d, coords).
    pub(crate) fn normalize_coords(&self, coords: &[u64], big: u32) -> (u32, Vec<u64>) {
        debug_assert_eq!(coords.len(), big as usize);
        if big == 1 {
            return (1, coords.to_vec());
        }
        // minimal degree = orbit length under x ↦ x^p
        let m = self
            .frob_matrix(big)
            .expect("normalize on a degree already admitted to the tower");
        let mut v = mat_apply(&m, coords, self.0.p);
        let mut d = 1u32;
        while v != coords {
            v = mat_apply(&m, &v, self.0.p);
            d += 1;
        }
        if d == big {
            return (big, coords.to_vec());
        }
        let (rows, inv) = self
            .unembed_solver(d, big)
            .expect("subfield degree divides an admitted degree");
        let rhs: Vec<u64> = rows.iter().map(|&r| coords[r]).collect();
        let small = mat_apply(&inv, &rhs, self.0.p);
        debug_assert_eq!(self.lift_coords(&small, d, big), coords);
        (d, small)
    }

    pub(crate) fn mul_coords(&self, a: &[u64], b: &[u64], d: u32) -> Vec<u64> {
        let f = self
            .defining_poly(d)
            .expect("arithmetic on a degree already admitted to the tower");
        let mut v = pmulmod(a, b, &f, self.0.p);
        v.resize(d as usize, 0);
        v
    }

    pub(crate) fn inv_coords(&self, a: &[u64], d: u32) -> Option<Vec<u64>> {
        let f = self
            .defining_poly(d)
            .expect("arithmetic on a degree already admitted to the tower");
        let mut v = pinvmod(a, &f, self.0.p)?;
        v.resize(d as usize, 0);
        Some(v)
    }

    /// Column-major change-of-basis solver for writing elements of F_{q^m} in
    /// the basis {g_{em}^j}_{j<m} with coefficients in F_q: returns the inverse
    /// of the F_p-basis matrix {embed(g_e^l)·g_{em}^j}.
    pub(crate) fn scalar_basis_inverse(&self, m: u32) -> Result<Vec<Vec<u64>>, ArithError> {
        let e = self.0.e;
        let big = e * m;
        if let Some(b) = self.0.caches.lock().unwrap().scalar_basis.get(&big) {
            return Ok(b.clone());
        }
        let p = self.0.p;
        let f = self.defining_poly(big)?;
        let mut cols = Vec::with_capacity(big as usize);
        for j in 0..m {
            for l in 0..e {
                let gel = if e == big {
                    // identity embedding: g_e^l directly
                    let mut v = ppowmod(&[0, 1], l as u64, &f, p);
                    v.resize(big as usize, 0);
                    v
                } else {
                    let mut small = vec![0u64; e as usize];
                    // coords of g_e^l in F_{p^e}
                    if (l as usize) < e as usize {
                        small[l as usize] = 1;
                    }
                    self.lift_coords(&small, e, big)
                };
                let mut xj = vec![0u64; j as usize + 1];
                xj[j as usize] = 1;
                let mut col = pmulmod(&gel, &xj, &f, p);
                col.resize(big as usize, 0);
                cols.push(col);
            }
        }
        let inv = mat_inverse(&cols, p).expect("scalar basis is a basis");
        self.0
            .caches
            .lock()
            .unwrap()
            .scalar_basis
            .insert(big, inv.clone());
        Ok(inv)
    }

    pub(crate) fn apply_fp_matrix(&self, cols: &[Vec<u64>], v: &[u64]) -> Vec<u64> {
        mat_apply(cols, v, self.0.p)
    }
}

// ---------------------------------------------------------------------------
// working field handle
// ---------------------------------------------------------------------------

/// A working field F_{q^m} inside the tower, q = p^e. Lightweight value: grow
/// operations return a new handle sharing the same context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldTower {
    ctx: FieldCtx,
    m: u32,
}

impl FieldTower {
    pub fn new(p: u64, e: u32, m: u32) -> Result<Self, ArithError> {
        let ctx = FieldCtx::new(p, e)?;
        Self::with_ctx(ctx, m)
    }

    pub fn with_ctx(ctx: FieldCtx, m: u32) -> Result<Self, ArithError> {
        assert!(m >= 1);
        let d = ctx
            .e()
            .checked_mul(m)
            .ok_or(ArithError::TowerTooLarge { p: ctx.p(), degree: u32::MAX })?;
        ctx.order_minus_one(d)?;
        ctx.defining_poly(d)?; // admit the degree now so element ops can't fail
        Ok(FieldTower { ctx, m })
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn p(&self) -> u64 {
        self.ctx.p()
    }

    pub fn e(&self) -> u32 {
        self.ctx.e()
    }

    pub fn q(&self) -> u64 {
        self.ctx.q()
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Absolute degree over F_p.
    pub fn degree(&self) -> u32 {
        self.ctx.e() * self.m
    }

    /// Number of elements q^m, if it fits in u64.
    pub fn size(&self) -> Option<u64> {
        self.ctx.p().checked_pow(self.degree())
    }

    /// Enlarge the working field to F_{q^{m'}}; m' must be a multiple of m.
    pub fn grown(&self, m_new: u32) -> Result<Self, ArithError> {
        assert!(m_new % self.m == 0, "field growth must preserve the old field");
        Self::with_ctx(self.ctx.clone(), m_new)
    }

    /// Smallest growth of this field containing F_{p^d}.
    pub fn grown_to_contain(&self, d: u32) -> Result<Self, ArithError> {
        let em = self.degree() as u64;
        let k = d as u64 / super::prime::gcd(d as u64, em);
        self.grown(self.m * k as u32)
    }

    pub fn contains(&self, x: &super::FieldElem) -> bool {
        self.degree() % x.degree() == 0
    }
}
