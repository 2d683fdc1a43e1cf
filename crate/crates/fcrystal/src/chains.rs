//! Periodic chains of twist-stable lattices: membership tests, residue
//! spaces with their induced raising and lowering operators, stable-line
//! search, one-index-at-a-time chain extension (self-dual in the paired
//! case), and end-to-end witness construction from a slope vector.

use std::collections::BTreeSet;

use serde_json::{json, Value};
use thiserror::Error;

use crate::arith::{ArithError, FieldElem, FieldTower, LaurentPoly};
use crate::coweight::Coweight;
use crate::isocrystal::{Isocrystal, IsocrystalError, SymplecticIsocrystal};
use crate::lattice::{
    ChainError, Lattice, LatticeChain, LatticeError, QuotientSpace, SymplecticForm,
};
use crate::matrix::{normalize_line, semilinear_fixed_space, Mat, Semilinear};
use crate::mazur::{selfdual_shift, walk_window, Budget};
use crate::search::SearchConfig;

#[derive(Debug, Error)]
pub enum ChainsError {
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("weight {0} exceeds the dimension {1}")]
    BadWeight(usize, usize),
    #[error("input chain fails the colength-{0} membership test")]
    NotMember(usize),
    #[error("quotient space is zero-dimensional")]
    EmptyQuotient,
    #[error("operators do not compose to zero")]
    BadOperators,
    #[error("residue space has no underlying lattice pair")]
    NoBacking,
    #[error("endomorphism does not preserve the lattice pair: {0}")]
    NotStable(String),
    #[error("no stable line within residue degree {0}")]
    ExtensionExhausted(u32),
    #[error("slope vector is not certified; refusing to classify")]
    Uncertified,
    #[error("seed lattice not found within budget ({0})")]
    BudgetExhausted(String),
    #[error("index set is not closed under negation (missing {0})")]
    NotSymmetric(i64),
    #[error("target type must contain the chain type (missing {0})")]
    MissingIndices(i64),
    #[error("index {0} is already in the chain")]
    OccupiedIndex(i64),
    #[error("no chain member directly below index {0}")]
    NoPredecessor(i64),
    #[error("lattice is not at colength one over the member below index {0}")]
    NotBetween(i64),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Isocrystal(#[from] IsocrystalError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// W = M/M' for a nested pair both stable under F and t·F^{-1}, carrying the
/// induced σ-semilinear raising map (twist +1) and σ^{-1}-semilinear lowering
/// map (twist -1). The two maps always compose to zero on W.
#[derive(Clone, Debug)]
pub struct ResidueSpace {
    tower: FieldTower,
    quotient: Option<QuotientSpace>,
    fbar: Semilinear,
    vbar: Semilinear,
}

impl ResidueSpace {
    /// Build W = M/M' from an operator stabilizing both lattices, in the
    /// sense t·M ⊆ F(M) ⊆ M (and the same for M').
    pub fn new(x: &Isocrystal, big: &Lattice, small: &Lattice) -> Result<Self, ChainsError> {
        let q = QuotientSpace::new(big, small)?;
        Self::from_quotient(x, q)
    }

    pub fn from_quotient(x: &Isocrystal, q: QuotientSpace) -> Result<Self, ChainsError> {
        let n = x.n();
        if q.big().n() != n {
            return Err(ChainsError::Dimension(q.big().n(), n));
        }
        if q.dim() == 0 {
            return Err(ChainsError::EmptyQuotient);
        }
        for (l, name) in [(q.big(), "M"), (q.small(), "M'")] {
            let fl = x.image_lattice(l);
            if !l.contains_lattice(&fl) {
                return Err(ChainsError::NotStable(format!("F does not map {name} into itself")));
            }
            if !fl.contains_lattice(&l.scaled(1)) {
                return Err(ChainsError::NotStable(format!("t·{name} is not inside F({name})")));
            }
        }
        let tower = x.tower().clone();
        let fbar = q.induced(x.matrix(), 1)?;
        let vbar = induced_lowering(x, &q)?;
        // F̄V̄ = V̄F̄ = 0: the composite is multiplication by t
        let fv = fbar.compose(&vbar);
        let vf = vbar.compose(&fbar);
        assert!(
            mat_is_zero(&fv.mat) && mat_is_zero(&vf.mat),
            "induced operators must compose to zero"
        );
        Ok(ResidueSpace { tower, quotient: Some(q), fbar, vbar })
    }

    /// A bare residue space from the two operators, with no lattice pair
    /// behind it. The twists must be +1 and -1 and the composites zero.
    pub fn from_operators(
        tower: &FieldTower,
        fbar: Semilinear,
        vbar: Semilinear,
    ) -> Result<Self, ChainsError> {
        let k = fbar.mat.nrows();
        if fbar.mat.ncols() != k || vbar.mat.nrows() != k || vbar.mat.ncols() != k {
            return Err(ChainsError::Dimension(fbar.mat.ncols(), k));
        }
        if k == 0 {
            return Err(ChainsError::EmptyQuotient);
        }
        if fbar.twist != 1 || vbar.twist != -1 {
            return Err(ChainsError::BadOperators);
        }
        if !mat_is_zero(&fbar.compose(&vbar).mat) || !mat_is_zero(&vbar.compose(&fbar).mat) {
            return Err(ChainsError::BadOperators);
        }
        Ok(ResidueSpace { tower: tower.clone(), quotient: None, fbar, vbar })
    }

    pub fn dimension(&self) -> usize {
        self.fbar.mat.nrows()
    }

    /// Basis labels: rows of M's canonical basis representing the classes,
    /// or 0..dim for a bare space.
    pub fn labels(&self) -> Vec<usize> {
        match &self.quotient {
            Some(q) => q.basis_rows().to_vec(),
            None => (0..self.dimension()).collect(),
        }
    }

    pub fn fbar(&self) -> &Semilinear {
        &self.fbar
    }

    pub fn vbar(&self) -> &Semilinear {
        &self.vbar
    }

    pub fn quotient(&self) -> Option<&QuotientSpace> {
        self.quotient.as_ref()
    }

    /// The lattice M' + O·(lift of the class), for a one-dimensional class.
    pub fn line_lattice(&self, coords: &[FieldElem]) -> Result<Lattice, ChainsError> {
        let q = self.quotient.as_ref().ok_or(ChainsError::NoBacking)?;
        Ok(q.sublattice_for_line(coords)?)
    }
}

/// The lowering map t·F^{-1} on W, column by column: solve F(y) = h_b by
/// series-inverting det F's matrix to audited precision, then read the class
/// of t·y. Exact when the determinant is a monomial.
fn induced_lowering(x: &Isocrystal, q: &QuotientSpace) -> Result<Semilinear, ChainsError> {
    let bm = x.matrix();
    let adjb = bm.adjugate();
    let detb = bm.det();
    let vdetb = detb.valuation().expect("operator is invertible");
    let h = q.big().basis();
    let dh = q.big().val_det();
    let adjh = h.adjugate();
    let vadjh = min_valuation(&adjh).expect("adjugate of a basis is nonzero");
    let dim = q.dim();
    let mut cols: Vec<Vec<FieldElem>> = Vec::with_capacity(dim);
    for &r in q.basis_rows() {
        let hb = h.col(r);
        let w = adjb.mul_vec(&hb);
        let vw = w.iter().filter_map(|e| e.valuation()).min().unwrap_or(0);
        // enough known terms that the constant coefficient below is certain
        let need = (vdetb + dh - vw - vadjh + 2).max(1);
        let dinv = detb.series_invert(need)?;
        let ty: Vec<LaurentPoly> =
            w.iter().map(|wi| wi.mul(&dinv).sigma(-1).shift(1)).collect();
        let u = adjh.mul_vec(&ty);
        let ubar = u
            .iter()
            .map(|ui| ui.shift(-dh).coeff(0))
            .collect::<Result<Vec<FieldElem>, ArithError>>()?;
        cols.push(q.project_coords(&ubar));
    }
    let mat = Mat::from_fn(dim, dim, |i, j| cols[j][i].clone());
    Ok(Semilinear::new(mat, -1))
}

fn min_valuation(m: &Mat<LaurentPoly>) -> Option<i64> {
    let mut out = None;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if let Some(v) = m.at(i, j).valuation() {
                out = Some(out.map_or(v, |o: i64| o.min(v)));
            }
        }
    }
    out
}

fn mat_is_zero(m: &crate::matrix::FMat) -> bool {
    (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| m.at(i, j).is_zero()))
}

/// A line in W stable under both induced operators, together with the
/// m-degree of the residue field it lives in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StableLine {
    pub coords: Vec<FieldElem>,
    pub degree: u32,
}

/// Find a line ℓ ⊆ W with F̄ℓ ⊆ ℓ and V̄ℓ ⊆ ℓ. When F̄ is bijective its fixed
/// vectors are sought, enlarging the residue field up to `cfg.m_max` if the
/// base field has none; otherwise V̄ acts on ker F̄ and either its kernel
/// there or a fixed line of its restriction is taken. Deterministic: among
/// the candidates in the first degree that works, the least normalized line.
pub fn stable_line(w: &ResidueSpace, cfg: &SearchConfig) -> Result<StableLine, ChainsError> {
    let ln = stable_line_inner(w, cfg)?;
    debug_assert!(line_stable(&w.fbar, &ln.coords) && line_stable(&w.vbar, &ln.coords));
    Ok(ln)
}

fn stable_line_inner(w: &ResidueSpace, cfg: &SearchConfig) -> Result<StableLine, ChainsError> {
    if w.dimension() == 0 {
        return Err(ChainsError::EmptyQuotient);
    }
    if w.fbar.mat.is_invertible() {
        // the lowering map vanishes outright, so a fixed line of F̄ works
        debug_assert!(mat_is_zero(&w.vbar.mat));
        return fixed_line_search(&w.fbar, &w.tower, cfg);
    }
    // ker F̄ = σ^{-1}(ker of the matrix), an F̄- and V̄-stable subspace
    let kernel: Vec<Vec<FieldElem>> = w
        .fbar
        .mat
        .kernel_basis()
        .into_iter()
        .map(|v| v.iter().map(|c| c.sigma(-1)).collect())
        .collect();
    let s = kernel.len();
    let dim = w.dimension();
    let kmat = Mat::from_fn(dim, s, |i, j| kernel[j][i].clone());
    let restricted = Mat::from_fn(s, s, |i, j| {
        // column j: V̄(kernel_j) expressed in the kernel basis
        let img = w.vbar.apply(&kernel[j]);
        kmat.solve(&img).expect("lowering map preserves ker F̄")[i].clone()
    });
    let vk = Semilinear::new(restricted, -1);
    if !vk.mat.is_invertible() {
        // a kernel line of the restriction is killed by both operators
        let inner: Vec<Vec<FieldElem>> = vk
            .mat
            .kernel_basis()
            .into_iter()
            .map(|v| {
                let lifted: Vec<FieldElem> = v.iter().map(|c| c.sigma(1)).collect();
                kmat.mul_vec(&lifted)
            })
            .collect();
        let coords = least_line(&inner, &w.tower);
        return Ok(StableLine { coords, degree: w.tower.m() });
    }
    let fixed = fixed_line_search(&vk, &w.tower, cfg)?;
    let coords = normalize_line(&kmat.mul_vec(&fixed.coords));
    Ok(StableLine { coords, degree: fixed.degree })
}

/// Fixed vectors of a bijective semilinear map over the smallest residue
/// extension (a multiple of the base m-degree) that has any, capped by
/// `cfg.m_max`. Fixed vectors form a space over the twist-fixed subfield, so
/// candidate lines are enumerated with coefficients there.
fn fixed_line_search(
    map: &Semilinear,
    tower: &FieldTower,
    cfg: &SearchConfig,
) -> Result<StableLine, ChainsError> {
    let m = tower.m();
    let cap = cfg.m_max.max(m);
    let scalars = FieldTower::with_ctx(tower.ctx().clone(), 1)?;
    let mut mdeg = m;
    while mdeg <= cap {
        let ext = tower.grown(mdeg)?;
        let basis = semilinear_fixed_space(map, &ext)?;
        if !basis.is_empty() {
            return Ok(StableLine { coords: least_line(&basis, &scalars), degree: mdeg });
        }
        mdeg += m;
    }
    Err(ChainsError::ExtensionExhausted(cap))
}

/// Least normalized line in the span of `basis`, coefficients running over
/// `coeff`. Falls back to the basis vectors alone when the span is too big
/// to enumerate; either way the choice is deterministic.
fn least_line(basis: &[Vec<FieldElem>], coeff: &FieldTower) -> Vec<FieldElem> {
    let dim = basis[0].len();
    let q = coeff.size().expect("coefficient field fits in u64");
    let s = basis.len() as u32;
    let mut cands: Vec<Vec<FieldElem>> = Vec::new();
    match (q as u128).checked_pow(s).filter(|&t| t <= 4096) {
        Some(total) => {
            for idx in 1..total {
                let mut rem = idx;
                let mut v = vec![FieldElem::zero(coeff); dim];
                for b in basis {
                    let c = FieldElem::from_index(coeff, (rem % q as u128) as u64);
                    rem /= q as u128;
                    if !c.is_zero() {
                        for (vi, bi) in v.iter_mut().zip(b) {
                            *vi = vi.add(&bi.mul(&c));
                        }
                    }
                }
                if v.iter().any(|x| !x.is_zero()) {
                    cands.push(normalize_line(&v));
                }
            }
        }
        None => cands.extend(basis.iter().map(|b| normalize_line(b))),
    }
    cands.into_iter().min().expect("nonzero span")
}

pub(crate) fn line_stable(map: &Semilinear, coords: &[FieldElem]) -> bool {
    let img = map.apply(coords);
    let lead = match coords.iter().position(|c| !c.is_zero()) {
        Some(j) => j,
        None => return false,
    };
    let lam = match img[lead].div(&coords[lead]) {
        Ok(l) => l,
        Err(_) => return false,
    };
    coords.iter().zip(&img).all(|(c, w)| *w == lam.mul(c))
}

/// True iff each member M_i of the chain satisfies t·M_i ⊂ F(M_i) ⊂ M_i with
/// relative position exactly ω_r. With a form the chain must be self-dual
/// and the operator a similitude, otherwise an error.
pub fn chain_membership(
    chain: &LatticeChain,
    x: &Isocrystal,
    r: usize,
    form: Option<&SymplecticForm>,
) -> Result<bool, ChainsError> {
    let n = x.n();
    if chain.period() != n {
        return Err(ChainsError::Dimension(chain.period(), n));
    }
    if r > n {
        return Err(ChainsError::BadWeight(r, n));
    }
    if let Some(f) = form {
        chain.validate_selfdual(f)?;
        SymplecticIsocrystal::new(x.clone(), f.clone())?;
    }
    let omega = Coweight::omega(n, r);
    for (_, m) in chain.members() {
        let fm = x.image_lattice(m);
        if m.relative_position(&fm)? != omega {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Insert M at `index` into a self-dual chain together with its dual partner
/// t^d·M^⊥ at `-index`, where d is the chain's defect. M must lie at
/// colength one over the member directly below; every chain inclusion and
/// the self-duality of the result are re-verified. For a fixed chain this
/// map is injective in M: the output determines M as its member at `index`.
pub fn selfdual_refinement(
    chain: &LatticeChain,
    index: i64,
    m: &Lattice,
    form: &SymplecticForm,
) -> Result<LatticeChain, ChainsError> {
    let d = chain.validate_selfdual(form)?;
    let n = chain.period() as i64;
    let v = index.rem_euclid(n);
    if chain.member(v).is_some() {
        return Err(ChainsError::OccupiedIndex(v));
    }
    let below = chain.member(v - 1).ok_or(ChainsError::NoPredecessor(v))?;
    if !m.contains_lattice(&below) || m.val_det() != below.val_det() - 1 {
        return Err(ChainsError::NotBetween(v));
    }
    let with_m = chain.with_member(v, m.clone())?;
    let partner = m.dual_symplectic(form)?.scaled(d);
    // when -v lands on v this collapses to the self-duality check on M
    let out = with_m.with_member(-v, partner)?;
    let d2 = out.validate_selfdual(form)?;
    debug_assert_eq!(d2, d);
    Ok(out.with_defect(d2))
}

/// One stable-line step of an extension: which index was being filled, the
/// chosen line, and the residue m-degree it needed. Seed steps carry no line.
#[derive(Clone, Debug)]
pub struct ExtensionStep {
    pub index: i64,
    pub line: Option<Vec<FieldElem>>,
    pub degree: u32,
}

/// A constructed chain along with the per-step transcript.
#[derive(Clone, Debug)]
pub struct ChainWitness {
    pub chain: LatticeChain,
    pub steps: Vec<ExtensionStep>,
}

impl ChainWitness {
    pub fn to_json(&self) -> Value {
        let steps: Vec<Value> = self
            .steps
            .iter()
            .map(|s| {
                json!({
                    "index": s.index,
                    "line": s.line.as_ref().map(|l| {
                        l.iter().map(|c| c.to_json()).collect::<Vec<Value>>()
                    }),
                    "degree": s.degree,
                })
            })
            .collect();
        json!({ "chain": self.chain.to_json(), "steps": steps })
    }
}

/// Either a witness chain or a reasoned refusal.
#[derive(Clone, Debug)]
pub enum ChainOutcome {
    Witness(ChainWitness),
    Empty { reason: String },
}

struct Extension {
    tower: FieldTower,
    x: Isocrystal,
    chain: LatticeChain,
    steps: Vec<ExtensionStep>,
}

impl Extension {
    /// Move the whole state into the residue extension of m-degree `mdeg`.
    fn grow(&mut self, mdeg: u32) -> Result<(), ChainsError> {
        let t2 = self.tower.grown(mdeg)?;
        self.x = Isocrystal::new(&t2, self.x.matrix().clone())?;
        let defect = self.chain.defect();
        let members = self
            .chain
            .members()
            .map(|(i, l)| Ok((i, relattice(&t2, l)?)))
            .collect::<Result<Vec<_>, ChainsError>>()?;
        let mut chain = LatticeChain::new(members)?;
        if let Some(d) = defect {
            chain = chain.with_defect(d);
        }
        self.chain = chain;
        self.tower = t2;
        Ok(())
    }
}

fn relattice(tower: &FieldTower, l: &Lattice) -> Result<Lattice, ChainsError> {
    Ok(Lattice::from_matrix(tower, l.basis())?)
}

/// Stored indices directly below and above v, extended periodically.
fn flanks(chain: &LatticeChain, v: i64) -> (i64, i64) {
    let n = chain.period() as i64;
    let idx = chain.indices();
    let below = idx.iter().copied().filter(|&a| a < v).max();
    let a = below.unwrap_or_else(|| idx.last().unwrap() - n);
    let above = idx.iter().copied().filter(|&b| b > v).min();
    let b = above.unwrap_or_else(|| idx.first().unwrap() + n);
    (a, b)
}

/// Grow the chain to the target index set, one index at a time through
/// stable lines in the flanking quotients; with a form, one dual pair of
/// indices at a time. The input must pass the membership test, and the
/// target must contain the chain's type (and be symmetric with a form).
pub fn extend_chain(
    chain: &LatticeChain,
    x: &Isocrystal,
    r: usize,
    target: &[i64],
    form: Option<&SymplecticForm>,
    cfg: &SearchConfig,
) -> Result<ChainWitness, ChainsError> {
    if !chain_membership(chain, x, r, form)? {
        return Err(ChainsError::NotMember(r));
    }
    let n = chain.period() as i64;
    let tset: BTreeSet<i64> = target.iter().map(|v| v.rem_euclid(n)).collect();
    for i in chain.indices() {
        if !tset.contains(&i) {
            return Err(ChainsError::MissingIndices(i));
        }
    }
    let mut st = Extension {
        tower: x.tower().clone(),
        x: x.clone(),
        chain: chain.clone(),
        steps: Vec::new(),
    };
    match form {
        None => {
            let have: BTreeSet<i64> = st.chain.indices().into_iter().collect();
            for v in tset.difference(&have).copied().collect::<Vec<_>>() {
                insert_plain(&mut st, v, r, cfg)?;
            }
        }
        Some(f) => {
            for &v in &tset {
                if !tset.contains(&(-v).rem_euclid(n)) {
                    return Err(ChainsError::NotSymmetric(v));
                }
            }
            let d = st.chain.validate_selfdual(f)?;
            loop {
                let have: BTreeSet<i64> = st.chain.indices().into_iter().collect();
                let missing = match tset.difference(&have).next() {
                    Some(&v) => v,
                    None => break,
                };
                // walk down to the nearest present index; fill just above it
                let mut k = missing - 1;
                while !have.contains(&k.rem_euclid(n)) {
                    k -= 1;
                }
                insert_selfdual(&mut st, k + 1, r, f, cfg)?;
            }
            // drop dual pairs that were only scaffolding
            if st.chain.indices().len() > tset.len() {
                let members: Vec<(i64, Lattice)> = st
                    .chain
                    .members()
                    .filter(|(i, _)| tset.contains(i))
                    .map(|(i, l)| (i, l.clone()))
                    .collect();
                st.chain = LatticeChain::new(members)?.with_defect(d);
            }
            let d2 = st.chain.validate_selfdual(f)?;
            assert_eq!(d2, d, "extension must not move the duality defect");
        }
    }
    assert!(
        chain_membership(&st.chain, &st.x, r, form)?,
        "extended chain must stay a member"
    );
    Ok(ChainWitness { chain: st.chain, steps: st.steps })
}

/// Fill index v by climbing from the member below: each step adjoins the
/// lift of a stable line in the quotient under the member above.
fn insert_plain(
    st: &mut Extension,
    v: i64,
    r: usize,
    cfg: &SearchConfig,
) -> Result<(), ChainsError> {
    let (a, b) = flanks(&st.chain, v);
    let mut big = st.chain.member(b).expect("flank is a stored index");
    let mut cur = st.chain.member(a).expect("flank is a stored index");
    for _ in 0..(v - a) {
        let w = ResidueSpace::new(&st.x, &big, &cur)?;
        let ln = stable_line(&w, cfg)?;
        if ln.degree > st.tower.m() {
            st.grow(ln.degree)?;
            big = relattice(&st.tower, &big)?;
            cur = relattice(&st.tower, &cur)?;
            let q = QuotientSpace::new(&big, &cur)?;
            cur = q.sublattice_for_line(&ln.coords)?;
        } else {
            cur = w.line_lattice(&ln.coords)?;
        }
        st.steps.push(ExtensionStep { index: v, line: Some(ln.coords), degree: ln.degree });
    }
    let fm = st.x.image_lattice(&cur);
    assert_eq!(
        cur.relative_position(&fm)?,
        Coweight::omega(st.x.n(), r),
        "climbed member must keep the colength-{r} invariant"
    );
    st.chain = st.chain.with_member(v, cur)?;
    Ok(())
}

/// Fill the dual pair {v, -v}; the member below v must already be present.
fn insert_selfdual(
    st: &mut Extension,
    v: i64,
    r: usize,
    form: &SymplecticForm,
    cfg: &SearchConfig,
) -> Result<(), ChainsError> {
    let n = st.chain.period() as i64;
    let v = v.rem_euclid(n);
    let (a, b) = flanks(&st.chain, v);
    debug_assert_eq!(a, v - 1, "caller lines up the predecessor");
    let mut big = st.chain.member(b).expect("flank is a stored index");
    let mut small = st.chain.member(a).expect("flank is a stored index");
    let w = ResidueSpace::new(&st.x, &big, &small)?;
    let ln = stable_line(&w, cfg)?;
    let m = if ln.degree > st.tower.m() {
        st.grow(ln.degree)?;
        big = relattice(&st.tower, &big)?;
        small = relattice(&st.tower, &small)?;
        QuotientSpace::new(&big, &small)?.sublattice_for_line(&ln.coords)?
    } else {
        w.line_lattice(&ln.coords)?
    };
    st.steps.push(ExtensionStep { index: v, line: Some(ln.coords), degree: ln.degree });
    st.chain = selfdual_refinement(&st.chain, v, &m, form)?;
    let omega = Coweight::omega(st.x.n(), r);
    for idx in [v, (-v).rem_euclid(n)] {
        let mm = st.chain.member(idx).expect("just inserted");
        let fm = st.x.image_lattice(&mm);
        assert_eq!(
            mm.relative_position(&fm)?,
            omega,
            "inserted pair must keep the colength-{r} invariant"
        );
    }
    Ok(())
}

/// Decide existence and construct: for a certified operator whose slope
/// vector is minuscule of weight r, produce a witness chain of the requested
/// type (self-dual when a form is given); otherwise report why the set is
/// empty. Fails only on precondition violations or exhausted budgets.
pub fn build_chain(
    x: &Isocrystal,
    r: usize,
    target: &[i64],
    form: Option<&SymplecticForm>,
    cfg: &SearchConfig,
) -> Result<ChainOutcome, ChainsError> {
    let n = x.n();
    if r > n {
        return Err(ChainsError::BadWeight(r, n));
    }
    let np = x.newton_point(cfg);
    if !np.certified {
        return Err(ChainsError::Uncertified);
    }
    if !np.nu.is_minuscule_of_weight(r as i64) {
        return Ok(ChainOutcome::Empty {
            reason: format!(
                "Mazur violation: slope vector {} is not minuscule of weight {}",
                np.nu, r
            ),
        });
    }
    let tset: BTreeSet<i64> = target.iter().map(|v| v.rem_euclid(n as i64)).collect();
    if tset.is_empty() {
        return Err(ChainsError::Chain(ChainError::Empty));
    }
    if let Some(f) = form {
        SymplecticIsocrystal::new(x.clone(), f.clone())?;
        let half = n / 2;
        if r != 0 && r != half && r != n {
            return Ok(ChainOutcome::Empty {
                reason: format!(
                    "Mazur violation: a similitude admits weight 0, {half} or {n}, not {r}"
                ),
            });
        }
    }
    // seed: the least lattice in a widening exponent window with the right
    // invariant (and a dual shift when a form constrains it)
    let seed_idx = if form.is_some() { 0 } else { *tset.iter().next().unwrap() };
    let seed = seed_search(x, r, form, cfg)?;
    let chain = LatticeChain::new(vec![(seed_idx, seed)])?;
    let mut full_target: Vec<i64> = tset.iter().copied().collect();
    if !tset.contains(&seed_idx) {
        full_target.push(seed_idx);
    }
    let mut witness = extend_chain(&chain, x, r, &full_target, form, cfg)?;
    if !tset.contains(&seed_idx) {
        let members: Vec<(i64, Lattice)> = witness
            .chain
            .members()
            .filter(|(i, _)| tset.contains(i))
            .map(|(i, l)| (i, l.clone()))
            .collect();
        let defect = witness.chain.defect();
        let mut pruned = LatticeChain::new(members)?;
        if let Some(d) = defect {
            pruned = pruned.with_defect(d);
        }
        witness.chain = pruned;
    }
    let seed_step =
        ExtensionStep { index: seed_idx, line: None, degree: x.tower().m() };
    witness.steps.insert(0, seed_step);
    Ok(ChainOutcome::Witness(witness))
}

fn seed_search(
    x: &Isocrystal,
    r: usize,
    form: Option<&SymplecticForm>,
    cfg: &SearchConfig,
) -> Result<Lattice, ChainsError> {
    let n = x.n();
    let omega = Coweight::omega(n, r);
    let mut budget = Budget { left: cfg.budget };
    for a in 0..=cfg.window {
        let mut hits: Vec<Lattice> = Vec::new();
        let done = walk_window(x.tower(), n, a, &mut budget, &mut |m| {
            if let Some(f) = form {
                if selfdual_shift(&m, f).is_none() {
                    return;
                }
            }
            let fm = x.image_lattice(&m);
            if m.relative_position(&fm).is_ok_and(|p| p == omega) {
                hits.push(m);
            }
        });
        if let Some(best) = hits.into_iter().min() {
            return Ok(best);
        }
        if !done {
            return Err(ChainsError::BudgetExhausted(format!(
                "gave out inside window {a}"
            )));
        }
    }
    Err(ChainsError::BudgetExhausted(format!(
        "no colength-{r} seed within window {}",
        cfg.window
    )))
}
