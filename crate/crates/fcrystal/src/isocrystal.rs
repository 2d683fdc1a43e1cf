//! Frobenius-twisted operators F = b·σ^k on L^n: certified slope vectors,
//! standard cyclic forms, iterated lattice images, and similitude structure.

use crate::arith::{ArithError, FieldElem, FieldTower, LaurentPoly};
use crate::coweight::Coweight;
use crate::lattice::{
    laurent_mat_from_json, laurent_mat_to_json, minors_min_valuation, Lattice, LatticeError,
    SymplecticForm,
};
use crate::matrix::Mat;
use crate::search::SearchConfig;
use crate::Rat;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IsocrystalError {
    #[error("operator matrix must be square, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("operator matrix must be invertible over the series field")]
    Singular,
    #[error("operator entries must be exact")]
    Inexact,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("slope vector is not dominant")]
    NotDominant,
    #[error("slope multiplicities do not give integral block degrees")]
    NotIntegral,
    #[error("operator does not scale the form: pairing mismatch at basis pair ({0}, {1})")]
    NotSimilitude(usize, usize),
    #[error("malformed operator encoding")]
    BadEncoding,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// How a slope vector was obtained, in decreasing order of directness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NewtonMethod {
    /// One nonzero entry per row and column: slopes are cycle averages.
    Monomial,
    /// Support digraph splits into several strongly connected classes;
    /// slopes are concatenated from the diagonal blocks.
    Triangular,
    /// A cyclic vector was found; slopes come from the polygon of the
    /// twisted minimal polynomial.
    CyclicSkew,
    /// Minor-valuation bounds on twisted powers up to length `s_max`,
    /// certified only when they pin a unique polygon.
    Bounds { s_max: u64 },
}

/// Slope vector of a twisted operator together with how firmly it is known.
///
/// `certified` points are exact; an uncertified point is the best candidate
/// consistent with the computed bounds, which are returned alongside it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPoint {
    pub nu: Coweight,
    pub certified: bool,
    pub method: NewtonMethod,
    /// Rows `(s, [d_1..d_n])` of minor-valuation profiles of twisted powers,
    /// present when the bounds path ran.
    pub bounds: Option<Vec<(u64, Vec<i64>)>>,
}

impl NewtonPoint {
    pub fn to_json(&self) -> Value {
        let method = match self.method {
            NewtonMethod::Monomial => "monomial",
            NewtonMethod::Triangular => "triangular",
            NewtonMethod::CyclicSkew => "cyclic",
            NewtonMethod::Bounds { .. } => "bounds",
        };
        let mut obj = json!({
            "nu": self.nu.to_json(),
            "certified": self.certified,
            "method": method,
        });
        if let NewtonMethod::Bounds { s_max } = self.method {
            obj["s_max"] = s_max.into();
        }
        if let Some(rows) = &self.bounds {
            obj["bounds"] = Value::Array(
                rows.iter()
                    .map(|(s, d)| json!([s, d]))
                    .collect(),
            );
        }
        obj
    }
}

/// A twisted operator `F = b·σ` acting on column vectors over the series
/// field, with `b` square, exact, and invertible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Isocrystal {
    tower: FieldTower,
    b: Mat<LaurentPoly>,
    sigma_period: u32,
}

impl Isocrystal {
    pub fn new(tower: &FieldTower, b: Mat<LaurentPoly>) -> Result<Self, IsocrystalError> {
        if b.nrows() != b.ncols() || b.nrows() == 0 {
            return Err(IsocrystalError::NotSquare(b.nrows(), b.ncols()));
        }
        if b.entries().iter().any(|x| !x.is_exact()) {
            return Err(IsocrystalError::Inexact);
        }
        if b.det().is_zero() {
            return Err(IsocrystalError::Singular);
        }
        let sigma_period = sigma_period(tower, &b);
        Ok(Isocrystal { tower: tower.clone(), b, sigma_period })
    }

    /// Standard operator with the given dominant slope vector: one cyclic
    /// block per isotypic run, with a single `t` power in the corner.
    pub fn standard(tower: &FieldTower, nu: &Coweight) -> Result<Self, IsocrystalError> {
        if !nu.is_dominant() {
            return Err(IsocrystalError::NotDominant);
        }
        let n = nu.entries().len();
        let mut m = Mat::filled(n, n, LaurentPoly::zero(tower));
        let one = LaurentPoly::one(tower);
        let mut off = 0usize;
        for (slope, mult) in nu.isotypic_blocks() {
            let total = slope * Rat::from_integer(mult as i64);
            if !total.is_integer() {
                return Err(IsocrystalError::NotIntegral);
            }
            let r = total.to_integer();
            if mult == 1 {
                m.set(off, off, LaurentPoly::t_pow(tower, r));
            } else {
                for i in 0..mult - 1 {
                    m.set(off + i + 1, off + i, one.clone());
                }
                m.set(off, off + mult - 1, LaurentPoly::t_pow(tower, r));
            }
            off += mult;
        }
        Isocrystal::new(tower, m)
    }

    /// Weight-one operator on a `2n`-dimensional symplectic space with all
    /// slopes 1/2: `F e_j = -e_{2n-1-j}` and `F e_{2n-1-j} = t·e_j` for
    /// `j < n`, a similitude of the standard form with scale `t`.
    pub fn half_slope_symplectic(tower: &FieldTower, half_dim: usize) -> Self {
        assert!(half_dim >= 1, "need a positive half-dimension");
        let n2 = 2 * half_dim;
        let mut m = Mat::filled(n2, n2, LaurentPoly::zero(tower));
        let neg_one = LaurentPoly::one(tower).neg();
        for j in 0..half_dim {
            m.set(n2 - 1 - j, j, neg_one.clone());
            m.set(j, n2 - 1 - j, LaurentPoly::t(tower));
        }
        Isocrystal::new(tower, m).expect("half-slope operator is invertible")
    }

    pub fn tower(&self) -> &FieldTower {
        &self.tower
    }

    pub fn n(&self) -> usize {
        self.b.nrows()
    }

    pub fn matrix(&self) -> &Mat<LaurentPoly> {
        &self.b
    }

    /// Smallest divisor `d` of the residue degree with `σ^d(b) = b`.
    pub fn sigma_period(&self) -> u32 {
        self.sigma_period
    }

    pub fn val_det(&self) -> i64 {
        self.b.det().valuation().expect("invertible operator")
    }

    /// `F(v) = b·σ(v)`.
    pub fn apply(&self, v: &[LaurentPoly]) -> Vec<LaurentPoly> {
        assert_eq!(v.len(), self.n(), "vector length must match the operator");
        let tv: Vec<LaurentPoly> = v.iter().map(|x| x.sigma(1)).collect();
        self.b.mul_vec(&tv)
    }

    /// Matrix of `F^s`, i.e. `b·σ(b)···σ^{s-1}(b)` for `s ≥ 1`.
    pub fn twisted_power(&self, s: u64) -> Mat<LaurentPoly> {
        assert!(s >= 1, "twisted power needs a positive length");
        twisted_power_of(&self.b, s)
    }

    /// Minimum minor valuations `[d_1(s), .., d_n(s)]` of the `s`-th twisted
    /// power; `d_k(s)/s` never exceeds the sum of the `k` smallest slopes.
    pub fn minor_profile(&self, s: u64) -> Vec<i64> {
        minor_profile_of(&self.twisted_power(s), self.n())
    }

    /// `F(M)` as a lattice.
    pub fn image_lattice(&self, m: &Lattice) -> Lattice {
        m.transformed(&self.b, 1).expect("invertible operator maps lattices to lattices")
    }

    /// `F^{-1}(M)`, computed exactly through duals: the inverse image is
    /// `σ^{-1}(b^{-1}M)` and `b^{-1}M = (bᵀ·M^∨)^∨`, which never needs
    /// series inversion.
    pub fn preimage_lattice(&self, m: &Lattice) -> Lattice {
        let dual = m.dual_gl();
        let a = self.b.transpose().mul(dual.basis());
        let bt_dual =
            Lattice::from_matrix(&self.tower, &a).expect("invertible operator keeps full rank");
        let h = bt_dual.dual_gl().basis().map(|x| x.sigma(-1));
        Lattice::from_matrix(&self.tower, &h).expect("invertible operator keeps full rank")
    }

    /// `F^s(M)` for any integer `s`, exact in both directions.
    pub fn twist_apply(&self, m: &Lattice, s: i64) -> Lattice {
        let mut cur = m.clone();
        for _ in 0..s.unsigned_abs() {
            cur = if s >= 0 { self.image_lattice(&cur) } else { self.preimage_lattice(&cur) };
        }
        cur
    }

    /// Elementary-divisor vector of `M` against `F(M)`.
    pub fn hodge_vector(&self, m: &Lattice) -> Coweight {
        m.relative_position(&self.image_lattice(m)).expect("lattices share a dimension")
    }

    /// Slope vector, routed through the cheapest exact path that applies:
    /// monomial support, block split, cyclic vector, then valuation bounds.
    pub fn newton_point(&self, cfg: &SearchConfig) -> NewtonPoint {
        let (slopes, method, certified, bounds) = slopes_routed(&self.tower, &self.b, cfg);
        self.finish_point(slopes, method, certified, bounds)
    }

    /// Slope bounds from twisted-power minors only, skipping the exact
    /// routes; certified just when the bounds pin a unique polygon.
    pub fn newton_bounds(&self, cfg: &SearchConfig) -> NewtonPoint {
        let (slopes, certified, s_max, table) = bounds_data(&self.tower, &self.b, cfg);
        self.finish_point(slopes, NewtonMethod::Bounds { s_max }, certified, Some(table))
    }

    fn finish_point(
        &self,
        mut slopes: Vec<Rat>,
        method: NewtonMethod,
        certified: bool,
        bounds: Option<Vec<(u64, Vec<i64>)>>,
    ) -> NewtonPoint {
        slopes.sort_by(|a, b| b.cmp(a));
        let nu = Coweight::new(slopes);
        debug_assert_eq!(nu.total(), Rat::from_integer(self.val_det()));
        if certified {
            debug_assert!(nu
                .isotypic_blocks()
                .iter()
                .all(|(s, m)| (*s * Rat::from_integer(*m as i64)).is_integer()));
        }
        NewtonPoint { nu, certified, method, bounds }
    }

    /// Scale `c` with `⟨Fx, Fy⟩ = c·σ(⟨x, y⟩)` and its valuation, or the
    /// first basis pair witnessing that no such scale exists.
    pub fn similitude_scale(
        &self,
        form: &SymplecticForm,
    ) -> Result<(LaurentPoly, i64), IsocrystalError> {
        if form.dim() != self.n() {
            return Err(IsocrystalError::DimensionMismatch(form.dim(), self.n()));
        }
        let n = self.n();
        let lhs = self.b.transpose().mul(form.gram()).mul(&self.b);
        let sj = form.gram().map(|x| x.sigma(1));
        let mut c = None;
        'pin: for i in 0..n {
            for j in 0..n {
                if !sj.at(i, j).is_zero() {
                    let coef = sj.at(i, j).coeff(0)?;
                    c = Some(lhs.at(i, j).scale(&coef.inv()?));
                    break 'pin;
                }
            }
        }
        let c = c.expect("nondegenerate form has a nonzero entry");
        for i in 0..n {
            for j in 0..n {
                if *lhs.at(i, j) != sj.at(i, j).mul(&c) {
                    return Err(IsocrystalError::NotSimilitude(i, j));
                }
            }
        }
        let d = c.valuation().expect("similitude scale of an invertible operator is nonzero");
        Ok((c, d))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "base": { "p": self.tower.p(), "e": self.tower.e(), "m": self.tower.m() },
            "n": self.n(),
            "b": laurent_mat_to_json(&self.b),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, IsocrystalError> {
        let base = v.get("base").ok_or(IsocrystalError::BadEncoding)?;
        let field = |k: &str| {
            base.get(k).and_then(Value::as_u64).ok_or(IsocrystalError::BadEncoding)
        };
        let tower = FieldTower::new(field("p")?, field("e")? as u32, field("m")? as u32)?;
        let bv = v.get("b").ok_or(IsocrystalError::BadEncoding)?;
        let b = laurent_mat_from_json(&tower, bv).map_err(|_| IsocrystalError::BadEncoding)?;
        if let Some(nn) = v.get("n").and_then(Value::as_u64) {
            if nn as usize != b.nrows() {
                return Err(IsocrystalError::BadEncoding);
            }
        }
        Isocrystal::new(&tower, b)
    }
}

/// Twisted operator preserving a symplectic form up to an exact scale.
#[derive(Clone, Debug)]
pub struct SymplecticIsocrystal {
    iso: Isocrystal,
    form: SymplecticForm,
    c: LaurentPoly,
    d: i64,
}

impl SymplecticIsocrystal {
    pub fn new(iso: Isocrystal, form: SymplecticForm) -> Result<Self, IsocrystalError> {
        let (c, d) = iso.similitude_scale(&form)?;
        Ok(SymplecticIsocrystal { iso, form, c, d })
    }

    pub fn iso(&self) -> &Isocrystal {
        &self.iso
    }

    pub fn form(&self) -> &SymplecticForm {
        &self.form
    }

    pub fn scale(&self) -> &LaurentPoly {
        &self.c
    }

    /// Valuation of the similitude scale.
    pub fn weight(&self) -> i64 {
        self.d
    }

    /// Checks `ν_i + ν_{2n-1-i} = weight` on a certified slope vector;
    /// `None` when no certificate was reached within the budget.
    pub fn newton_symmetry(&self, cfg: &SearchConfig) -> Option<bool> {
        let np = self.iso.newton_point(cfg);
        if !np.certified {
            return None;
        }
        let e = np.nu.entries();
        let n2 = e.len();
        let d = Rat::from_integer(self.d);
        Some((0..n2).all(|i| e[i] + e[n2 - 1 - i] == d))
    }
}

fn sigma_period(tower: &FieldTower, b: &Mat<LaurentPoly>) -> u32 {
    let m = tower.m();
    for d in 1..=m {
        if m % d == 0 && b.entries().iter().all(|x| x.sigma(d as i64) == *x) {
            return d;
        }
    }
    unreachable!("sigma has order dividing the residue degree");
}

fn twisted_power_of(b: &Mat<LaurentPoly>, s: u64) -> Mat<LaurentPoly> {
    let mut acc = b.clone();
    for i in 1..s {
        acc = acc.mul(&b.map(|x| x.sigma(i as i64)));
    }
    acc
}

fn minor_profile_of(m: &Mat<LaurentPoly>, n: usize) -> Vec<i64> {
    (1..=n)
        .map(|k| minors_min_valuation(m, k).expect("twisted power of an invertible operator"))
        .collect()
}

type Routed = (Vec<Rat>, NewtonMethod, bool, Option<Vec<(u64, Vec<i64>)>>);

fn slopes_routed(tower: &FieldTower, b: &Mat<LaurentPoly>, cfg: &SearchConfig) -> Routed {
    if let Some(slopes) = monomial_slopes(b) {
        return (slopes, NewtonMethod::Monomial, true, None);
    }
    if let Some(classes) = condensation_classes(b) {
        let mut all = Vec::new();
        let mut certified = true;
        for cls in classes {
            let sub = Mat::from_fn(cls.len(), cls.len(), |i, j| b.at(cls[i], cls[j]).clone());
            let (s, _, c, _) = slopes_routed(tower, &sub, cfg);
            all.extend(s);
            certified &= c;
        }
        return (all, NewtonMethod::Triangular, certified, None);
    }
    if let Some(slopes) = cyclic_slopes(tower, b, cfg) {
        return (slopes, NewtonMethod::CyclicSkew, true, None);
    }
    let (slopes, certified, s_max, table) = bounds_data(tower, b, cfg);
    (slopes, NewtonMethod::Bounds { s_max }, certified, Some(table))
}

/// Slopes when the support is a permutation pattern: every cycle contributes
/// its average entry valuation with the cycle length as multiplicity.
fn monomial_slopes(b: &Mat<LaurentPoly>) -> Option<Vec<Rat>> {
    let n = b.nrows();
    let mut row_of = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for j in 0..n {
        let mut hit = None;
        for i in 0..n {
            if !b.at(i, j).is_zero() {
                if hit.is_some() {
                    return None;
                }
                hit = Some(i);
            }
        }
        let i = hit?;
        if used[i] {
            return None;
        }
        used[i] = true;
        row_of[j] = i;
    }
    let mut slopes = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut total = 0i64;
        let mut len = 0i64;
        let mut j = start;
        loop {
            seen[j] = true;
            total += b.at(row_of[j], j).valuation().expect("nonzero pivot entry");
            len += 1;
            j = row_of[j];
            if j == start {
                break;
            }
        }
        for _ in 0..len {
            slopes.push(Rat::new(total, len));
        }
    }
    Some(slopes)
}

/// Strongly connected classes of the support digraph (edge `j → i` when
/// `b[i][j] ≠ 0`), or `None` when the graph does not split.
fn condensation_classes(b: &Mat<LaurentPoly>) -> Option<Vec<Vec<usize>>> {
    let n = b.nrows();
    let mut reach = vec![vec![false; n]; n];
    for i in 0..n {
        reach[i][i] = true;
    }
    for j in 0..n {
        for i in 0..n {
            if !b.at(i, j).is_zero() {
                reach[j][i] = true;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    let mut rep = vec![usize::MAX; n];
    for i in 0..n {
        for j in 0..=i {
            if reach[i][j] && reach[j][i] {
                rep[i] = j;
                break;
            }
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if rep[i] == i {
            classes.push((0..n).filter(|&j| rep[j] == i).collect());
        }
    }
    if classes.len() <= 1 {
        None
    } else {
        Some(classes)
    }
}

/// Exact slopes from a cyclic vector, when one of a few deterministic
/// candidates generates: the polygon of `X^n - Σ c_i X^i` with the `c_i`
/// read off by Cramer valuations, negated.
fn cyclic_slopes(
    tower: &FieldTower,
    b: &Mat<LaurentPoly>,
    cfg: &SearchConfig,
) -> Option<Vec<Rat>> {
    let n = b.nrows();
    let zero = LaurentPoly::zero(tower);
    let one = LaurentPoly::one(tower);
    let mut cands: Vec<Vec<LaurentPoly>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { one.clone() } else { zero.clone() }).collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x5eed_c9c1));
    for _ in 0..6 {
        cands.push(
            (0..n)
                .map(|_| {
                    let c0 = FieldElem::random(tower, &mut rng);
                    let c1 = FieldElem::random(tower, &mut rng);
                    LaurentPoly::from_terms(tower, vec![(0, c0), (1, c1)])
                })
                .collect(),
        );
    }
    for v in cands {
        if v.iter().all(LaurentPoly::is_zero) {
            continue;
        }
        let mut its: Vec<Vec<LaurentPoly>> = vec![v];
        for k in 0..n {
            let tv: Vec<LaurentPoly> = its[k].iter().map(|x| x.sigma(1)).collect();
            its.push(b.mul_vec(&tv));
        }
        let c = Mat::from_fn(n, n, |i, j| its[j][i].clone());
        let dc = c.det();
        if dc.is_zero() {
            continue;
        }
        let dv = dc.valuation().expect("nonzero determinant");
        let mut pts: Vec<(i64, Rat)> = Vec::new();
        for i in 0..n {
            let di =
                Mat::from_fn(n, n, |r, j| if j == i { its[n][r].clone() } else { its[j][r].clone() })
                    .det();
            if !di.is_zero() {
                let val = di.valuation().expect("nonzero determinant");
                pts.push((i as i64, Rat::from_integer(val - dv)));
            }
        }
        pts.push((n as i64, Rat::zero()));
        pts.sort_by_key(|p| p.0);
        if pts[0].0 != 0 {
            // a bijective operator always has a nonzero constant coefficient
            continue;
        }
        let hull = lower_hull(&pts);
        let mut slopes = Vec::with_capacity(n);
        for w in hull.windows(2) {
            let dx = w[1].0 - w[0].0;
            let lam = -(w[1].1 - w[0].1) / Rat::from_integer(dx);
            for _ in 0..dx {
                slopes.push(lam);
            }
        }
        return Some(slopes);
    }
    None
}

/// Lower convex hull of points with strictly increasing x.
fn lower_hull(pts: &[(i64, Rat)]) -> Vec<(i64, Rat)> {
    let mut hull: Vec<(i64, Rat)> = Vec::new();
    for &(x, y) in pts {
        while hull.len() >= 2 {
            let a = &hull[hull.len() - 2];
            let b = &hull[hull.len() - 1];
            let cross = Rat::from_integer(b.0 - a.0) * (y - a.1)
                - (b.1 - a.1) * Rat::from_integer(x - a.0);
            if cross <= Rat::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((x, y));
    }
    hull
}

/// Bounds route: minor profiles of twisted powers on a ramp of σ-period
/// multiples give lower bounds on ascending partial slope sums; the result
/// is certified exactly when one lattice polygon fits above them.
fn bounds_data(
    tower: &FieldTower,
    b: &Mat<LaurentPoly>,
    cfg: &SearchConfig,
) -> (Vec<Rat>, bool, u64, Vec<(u64, Vec<i64>)>) {
    let n = b.nrows();
    let f = sigma_period(tower, b) as u64;
    let vd = b.det().valuation().expect("invertible operator");
    let small_lcm: u64 = (1..=n.min(6) as u64).fold(1, num_integer::lcm);
    let k_max = (cfg.budget / f).max(1).min((2 * small_lcm).max(4));
    let nf = twisted_power_of(b, f);
    let mut cur = nf.clone();
    let mut cur_s = f;
    let mut table = vec![(cur_s, minor_profile_of(&cur, n))];
    for _ in 2..=k_max {
        cur = cur.mul(&nf.map(|x| x.sigma(cur_s as i64)));
        cur_s += f;
        table.push((cur_s, minor_profile_of(&cur, n)));
    }
    let mut lb = vec![Rat::zero(); n + 1];
    for k in 1..=n {
        lb[k] = table
            .iter()
            .map(|(s, row)| Rat::new(row[k - 1], *s as i64))
            .max()
            .expect("nonempty bound table");
    }
    let feasible = lattice_polygons(n, vd, &lb);
    debug_assert!(!feasible.is_empty(), "the true polygon satisfies its own bounds");
    let certified = feasible.len() == 1;
    let pick = feasible
        .into_iter()
        .min_by(|a, b| partial_sums(a).cmp(&partial_sums(b)))
        .expect("nonempty feasible set");
    (pick, certified, cur_s, table)
}

fn partial_sums(slopes: &[Rat]) -> Vec<Rat> {
    let mut acc = Rat::zero();
    slopes
        .iter()
        .map(|s| {
            acc += *s;
            acc
        })
        .collect()
}

/// All ascending slope vectors with integral rises per isotypic segment,
/// total `vd`, and partial sums at or above `lb` at every integer.
fn lattice_polygons(n: usize, vd: i64, lb: &[Rat]) -> Vec<Vec<Rat>> {
    fn rec(
        out: &mut Vec<Vec<Rat>>,
        slopes: &mut Vec<Rat>,
        k: usize,
        cur: i64,
        last: Option<Rat>,
        n: usize,
        vd: i64,
        lb: &[Rat],
    ) {
        if k == n {
            if cur == vd {
                out.push(slopes.clone());
            }
            return;
        }
        for w in 1..=(n - k) {
            let rem = (n - k) as i64;
            // later slopes are at least this one, so the total caps the rise
            let r_hi = (Rat::new(w as i64 * (vd - cur), rem)).floor().to_integer();
            let mut r_lo = i64::MIN;
            if let Some(ls) = last {
                r_lo = (ls * Rat::from_integer(w as i64)).floor().to_integer() + 1;
            }
            for j in 1..=w {
                let need =
                    (lb[k + j] - Rat::from_integer(cur)) * Rat::new(w as i64, j as i64);
                r_lo = r_lo.max(need.ceil().to_integer());
            }
            let (r_lo, r_hi) = if k + w == n {
                let r = vd - cur;
                (r.max(r_lo), r.min(r_hi))
            } else {
                (r_lo, r_hi)
            };
            for r in r_lo..=r_hi {
                let slope = Rat::new(r, w as i64);
                for _ in 0..w {
                    slopes.push(slope);
                }
                rec(out, slopes, k + w, cur + r, Some(slope), n, vd, lb);
                for _ in 0..w {
                    slopes.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut out, &mut Vec::new(), 0, 0, None, n, vd, lb);
    out
}
