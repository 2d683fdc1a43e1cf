//! Dominance verdicts and witness lattices tying Newton points to Hodge
//! invariants: `mazur_check` compares a lattice's invariant against the
//! ambient Newton point, `hodge_set_contains` decides (three-valued)
//! whether an invariant is realized by *some* lattice, the two
//! `construct_lattice*` searches produce a verified witness, and
//! `enumerate_hodge_set` scans every invariant realized in a window.

use std::collections::BTreeSet;

use serde_json::{json, Value};
use thiserror::Error;

use crate::arith::{ArithError, FieldElem, FieldTower, LaurentPoly};
use crate::coweight::{
    decomposable_wrt, kappa_levi, Coweight, CoweightError, GSpCoweight, LeviPartition,
};
use crate::isocrystal::{Isocrystal, IsocrystalError, NewtonPoint, SymplecticIsocrystal};
use crate::lattice::{minors_min_valuation, Lattice, LatticeError, SymplecticForm};
use crate::matrix::Mat;
use crate::search::SearchConfig;
use crate::Rat;

#[derive(Debug, Error)]
pub enum MazurError {
    /// The requested invariant fails the degree or dominance test, so no
    /// lattice can realize it.
    #[error("Mazur violation: {0}")]
    Violation(String),
    /// The search space was cut off before a witness appeared; says
    /// nothing about existence.
    #[error("witness not found within budget ({0})")]
    BudgetExhausted(String),
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    /// Only the standard alternating form is supported for symplectic
    /// witness searches.
    #[error("unsupported symplectic form: {0}")]
    UnsupportedForm(String),
    #[error(transparent)]
    Coweight(#[from] CoweightError),
    #[error(transparent)]
    Isocrystal(#[from] IsocrystalError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// Outcome of testing one lattice against the ambient operator's Newton
/// point.
#[derive(Clone, Debug)]
pub struct MazurReport {
    /// Newton point of the operator, with its certification status.
    pub newton: NewtonPoint,
    /// The lattice's Hodge invariant `inv(M, FM)`.
    pub hodge: Coweight,
    /// Whether `hodge` dominates `newton.nu`. Trust it only as far as
    /// `newton.certified`.
    pub verdict: bool,
    /// Whether the invariant's total equals `val det` of the operator.
    pub kappa_consistent: bool,
}

/// Compare the Hodge invariant of `m` against the Newton point of `x`.
pub fn mazur_check(m: &Lattice, x: &Isocrystal) -> Result<MazurReport, MazurError> {
    if m.n() != x.n() {
        return Err(MazurError::Dimension(m.n(), x.n()));
    }
    let hodge = x.hodge_vector(m);
    let newton = x.newton_point(&SearchConfig::default());
    let verdict = hodge.dominates(&newton.nu)?;
    let kappa_consistent = hodge.total() == Rat::from_integer(x.val_det());
    Ok(MazurReport { newton, hodge, verdict, kappa_consistent })
}

/// Is `mu` the invariant of some lattice in `x`?
///
/// Decided by the degree test plus dominance against the Newton point:
/// `Some(false)` on a degree mismatch, `Some(verdict)` when the Newton
/// point is certified, `None` when it is not (an uncertified candidate
/// can err in either direction, so no verdict is offered).
pub fn hodge_set_contains(
    x: &Isocrystal,
    mu: &Coweight,
    cfg: &SearchConfig,
) -> Result<Option<bool>, MazurError> {
    if mu.len() != x.n() {
        return Err(MazurError::Dimension(mu.len(), x.n()));
    }
    let mu = mu.dominant();
    if !mu.is_integral() {
        return Err(MazurError::Coweight(CoweightError::NotIntegral(mu.to_string())));
    }
    if mu.total() != Rat::from_integer(x.val_det()) {
        return Ok(Some(false));
    }
    let np = x.newton_point(cfg);
    if !np.certified {
        return Ok(None);
    }
    Ok(Some(mu.dominates(&np.nu)?))
}

/// Symplectic variant of [`hodge_set_contains`]: the degree test becomes
/// equality of the similitude defect and weight.
pub fn hodge_set_contains_gsp(
    sx: &SymplecticIsocrystal,
    mu: &GSpCoweight,
    cfg: &SearchConfig,
) -> Result<Option<bool>, MazurError> {
    let mu_cw = mu.coweight().dominant();
    if mu_cw.len() != sx.iso().n() {
        return Err(MazurError::Dimension(mu_cw.len(), sx.iso().n()));
    }
    if !mu_cw.is_integral() {
        return Err(MazurError::Coweight(CoweightError::NotIntegral(mu_cw.to_string())));
    }
    if mu.defect() != Rat::from_integer(sx.weight()) {
        return Ok(Some(false));
    }
    let np = sx.iso().newton_point(cfg);
    if !np.certified {
        return Ok(None);
    }
    Ok(Some(mu_cw.dominates(&np.nu)?))
}

/// How a witness lattice was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessMethod {
    /// Assembled per isoclinic block from a decomposable invariant.
    BlockSplit,
    /// Found among `u·t^λ·Λ₀` for λ with matching block degrees and a
    /// sparse unipotent `u`.
    Guided,
    /// Found by exhaustive triangular-basis enumeration.
    Exhaustive,
    /// Explicit selfdual construction for the weight-n minuscule
    /// invariant of a symplectic operator.
    MinusculeChain,
}

impl WitnessMethod {
    fn as_str(self) -> &'static str {
        match self {
            WitnessMethod::BlockSplit => "block-split",
            WitnessMethod::Guided => "guided",
            WitnessMethod::Exhaustive => "exhaustive",
            WitnessMethod::MinusculeChain => "minuscule-chain",
        }
    }
}

/// A lattice realizing a prescribed invariant, with enough data to
/// re-check the claim.
#[derive(Clone, Debug)]
pub struct Witness {
    /// The witness, canonical basis.
    pub lattice: Lattice,
    /// The operator the invariant was verified against (always a
    /// standard-form operator for the requested Newton vector, possibly
    /// over a residue extension of the tower the caller passed in).
    pub isocrystal: Isocrystal,
    /// The verified invariant `inv(lattice, F·lattice)`.
    pub hodge: Coweight,
    /// Verification transcript: minimal minor valuations of the
    /// transition matrix, normalized so entry k is the sum of the k
    /// smallest invariant exponents.
    pub minor_valuations: Vec<i64>,
    pub method: WitnessMethod,
    /// For symplectic witnesses: the dual lattice is `t^k·lattice` with
    /// this `k`.
    pub selfdual_shift: Option<i64>,
}

impl Witness {
    pub fn to_json(&self) -> Value {
        let mut obj = json!({
            "lattice": self.lattice.to_json(),
            "isocrystal": self.isocrystal.to_json(),
            "mu": self.hodge.to_json(),
            "method": self.method.as_str(),
            "verification": { "minor_valuations": self.minor_valuations },
        });
        if let Some(k) = self.selfdual_shift {
            obj["selfdual_shift"] = json!(k);
        }
        obj
    }
}

/// Every invariant realized by a lattice whose canonical basis has
/// exponents in `[-window, window]`, with entries filtered to the same
/// window.
#[derive(Clone, Debug)]
pub struct HodgeSetScan {
    pub set: BTreeSet<Coweight>,
    /// False when the budget ran out before the window was exhausted; the
    /// set is then a lower approximation.
    pub complete: bool,
    /// Number of lattices scanned.
    pub scanned: u64,
}

/// Brute-force the set of realized invariants over a window of lattices.
pub fn enumerate_hodge_set(x: &Isocrystal, cfg: &SearchConfig) -> HodgeSetScan {
    let mut budget = Budget { left: cfg.budget };
    let mut set = BTreeSet::new();
    let mut scanned = 0u64;
    let cap = Rat::from_integer(cfg.window);
    let complete = walk_window(x.tower(), x.n(), cfg.window, &mut budget, &mut |m| {
        scanned += 1;
        let inv = x.hodge_vector(&m);
        if inv.max_abs() <= cap {
            set.insert(inv);
        }
    });
    HodgeSetScan { set, complete, scanned }
}

/// Find a lattice with invariant `mu` inside the standard operator for
/// `nu`, or report honestly why none was produced.
///
/// Search order: a closed-form block-by-block lattice when `mu` splits at
/// the isoclinic breakpoints; then `u·t^λ·Λ₀` candidates with λ running
/// over integral vectors under `mu` with matching block degrees and `u`
/// unipotent with one or two monomial entries; then exhaustive
/// enumeration of triangular bases. The last two deepen iteratively over
/// the exponent window and the residue degree, and the first level that
/// produces witnesses returns its lexicographically least one. A budget
/// cut mid-level returns the best witness found so far, if any.
pub fn construct_lattice(
    tower: &FieldTower,
    nu: &Coweight,
    mu: &Coweight,
    cfg: &SearchConfig,
) -> Result<Witness, MazurError> {
    let nu = nu.dominant();
    let mu = mu.dominant();
    if nu.len() != mu.len() {
        return Err(MazurError::Dimension(nu.len(), mu.len()));
    }
    if !mu.is_integral() {
        return Err(MazurError::Coweight(CoweightError::NotIntegral(mu.to_string())));
    }
    if mu.total() != nu.total() || !mu.dominates(&nu)? {
        return Err(MazurError::Violation(format!("{} does not dominate {}", mu, nu)));
    }

    let p = LeviPartition::isotypic(&nu);
    if decomposable_wrt(&mu, &nu, &p)? {
        let x = Isocrystal::standard(tower, &nu)?;
        let m = block_suffix_lattice(tower, &mu, &p);
        let mv = verify_invariant(&x, &m, &mu)
            .expect("block-split lattice must realize a decomposable invariant");
        return Ok(Witness {
            lattice: m,
            isocrystal: x,
            hodge: mu,
            minor_valuations: mv,
            method: WitnessMethod::BlockSplit,
            selfdual_shift: None,
        });
    }

    let lams = guided_shapes(&nu, &mu, &p)?;
    let mut budget = Budget { left: cfg.budget };
    let nu_local = nu.clone();
    deepening_search(
        tower,
        &|tw| Ok((Isocrystal::standard(tw, &nu_local)?, None)),
        &lams,
        &mu,
        cfg,
        &mut budget,
    )
}

/// Symplectic witness search against the standard alternating form.
///
/// The weight-n minuscule invariant gets the explicit selfdual chain
/// (verified: `M ⊇ FM ⊇ tM` and `(FM)^⊥ = t^{-1}·FM`); anything else
/// falls back to the general search filtered by selfduality up to a
/// `t`-power.
pub fn construct_lattice_gsp(
    tower: &FieldTower,
    nu: &GSpCoweight,
    mu: &GSpCoweight,
    form: &SymplecticForm,
    cfg: &SearchConfig,
) -> Result<Witness, MazurError> {
    let nn = nu.coweight().len();
    let half = nu.half_dim();
    if nn != mu.coweight().len() {
        return Err(MazurError::Dimension(nn, mu.coweight().len()));
    }
    if form.gram() != SymplecticForm::standard(tower, half).gram() {
        return Err(MazurError::UnsupportedForm(
            "witness search requires the standard alternating form".into(),
        ));
    }
    let mu_cw = mu.coweight().dominant();
    if !mu_cw.is_integral() {
        return Err(MazurError::Coweight(CoweightError::NotIntegral(mu_cw.to_string())));
    }
    if nu.defect() != mu.defect() {
        return Err(MazurError::Violation(format!(
            "defect {} does not match defect {}",
            mu.defect(),
            nu.defect()
        )));
    }
    let nu_cw = nu.coweight().dominant();
    if !mu_cw.dominates(&nu_cw)? {
        return Err(MazurError::Violation(format!("{} does not dominate {}", mu_cw, nu_cw)));
    }

    if mu_cw == Coweight::omega(nn, half) {
        let sx = standard_symplectic(tower, nu)?;
        return minuscule_chain_witness(&sx);
    }

    let p = LeviPartition::isotypic(&nu_cw);
    let lams = guided_shapes(&nu_cw, &mu_cw, &p)?;
    let mut budget = Budget { left: cfg.budget };
    let nu_local = nu.clone();
    deepening_search(
        tower,
        &|tw| {
            let sx = standard_symplectic(tw, &nu_local)?;
            Ok((sx.iso().clone(), Some(sx.form().clone())))
        },
        &lams,
        &mu_cw,
        cfg,
        &mut budget,
    )
}

/// The standard symplectic-similitude operator with Newton vector `nu`,
/// against the standard alternating form.
///
/// Slopes above half the defect get the usual ascending cyclic block; the
/// paired slopes below run the cycle downward with `t^d` steps so that
/// the operator scales the form by exactly `t^d`; a slope-d/2 block is
/// diagonal for even `d` and pairs basis vectors `(u, v)` with
/// `F u = -t^k v`, `F v = t^{k+1} u` for odd `d = 2k+1`.
pub fn standard_symplectic(
    tower: &FieldTower,
    nu: &GSpCoweight,
) -> Result<SymplecticIsocrystal, MazurError> {
    let cw = nu.coweight().dominant();
    let nn = cw.len();
    let half = nu.half_dim();
    let d_rat = nu.defect();
    if !d_rat.is_integer() {
        return Err(MazurError::Coweight(CoweightError::NotIntegral(format!(
            "defect {}",
            d_rat
        ))));
    }
    let d = d_rat.to_integer();
    let one = LaurentPoly::one(tower);
    let mut b = Mat::filled(nn, nn, LaurentPoly::zero(tower));
    let mut off = 0usize;
    for (slope, mult) in cw.isotypic_blocks() {
        let two = slope * Rat::from_integer(2);
        if two > d_rat {
            let r_rat = slope * Rat::from_integer(mult as i64);
            if !r_rat.is_integer() {
                return Err(MazurError::Coweight(CoweightError::NotIntegral(format!(
                    "block degree {}",
                    r_rat
                ))));
            }
            let r = r_rat.to_integer();
            let q = nn - off - mult;
            for j in 0..mult - 1 {
                b.set(off + j + 1, off + j, one.clone());
                b.set(q + j, q + j + 1, LaurentPoly::t_pow(tower, d));
            }
            b.set(off, off + mult - 1, LaurentPoly::t_pow(tower, r));
            b.set(q + mult - 1, q, LaurentPoly::t_pow(tower, d - r));
        } else if two == d_rat {
            if d % 2 == 0 {
                for j in 0..mult {
                    b.set(off + j, off + j, LaurentPoly::t_pow(tower, d / 2));
                }
            } else {
                let k = (d - 1) / 2;
                for i in 0..mult / 2 {
                    let u = off + i;
                    let v = off + mult - 1 - i;
                    b.set(v, u, LaurentPoly::t_pow(tower, k).neg());
                    b.set(u, v, LaurentPoly::t_pow(tower, k + 1));
                }
            }
        }
        off += mult;
    }
    let iso = Isocrystal::new(tower, b)?;
    let form = SymplecticForm::standard(tower, half);
    Ok(SymplecticIsocrystal::new(iso, form)?)
}

/// The explicit selfdual witness for the weight-n minuscule invariant:
/// diagonal exponents antisymmetric across the pairing, chosen per block
/// so every invariant exponent lands in {0, 1}.
fn minuscule_chain_witness(sx: &SymplecticIsocrystal) -> Result<Witness, MazurError> {
    let x = sx.iso();
    let tower = x.tower();
    let np = x.newton_point(&SearchConfig::default());
    let cw = np.nu.clone();
    let nn = cw.len();
    let mut exps = vec![0i64; nn];
    let mut off = 0usize;
    for (slope, mult) in cw.isotypic_blocks() {
        if slope * Rat::from_integer(2) > Rat::from_integer(1) {
            let r = (slope * Rat::from_integer(mult as i64)).to_integer();
            let s_cut = r.min(mult as i64 - 1);
            let q = nn - off - mult;
            for j in 0..mult {
                let g = (s_cut - j as i64).max(0);
                exps[q + j] = g;
                exps[off + mult - 1 - j] = -g;
            }
        }
        off += mult;
    }
    let m = Lattice::from_diag_exponents(tower, &exps);
    let fm = x.image_lattice(&m);
    assert!(
        m.contains_lattice(&fm) && fm.contains_lattice(&m.scaled(1)),
        "minuscule witness chain M ⊇ FM ⊇ tM failed"
    );
    assert!(
        fm.dual_symplectic(sx.form())? == fm.scaled(-1),
        "minuscule witness polarity (FM)^⊥ = t^{{-1}}FM failed"
    );
    assert!(m.dual_symplectic(sx.form())? == m, "minuscule witness selfduality failed");
    let mu = Coweight::omega(nn, nn / 2);
    let mv = verify_invariant(x, &m, &mu).expect("minuscule witness invariant failed");
    Ok(Witness {
        lattice: m,
        isocrystal: x.clone(),
        hodge: mu,
        minor_valuations: mv,
        method: WitnessMethod::MinusculeChain,
        selfdual_shift: Some(0),
    })
}

// ---------------------------------------------------------------------
// search internals

pub(crate) struct Budget {
    pub(crate) left: u64,
}

impl Budget {
    pub(crate) fn spend(&mut self) -> bool {
        if self.left == 0 {
            return false;
        }
        self.left -= 1;
        true
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Phase {
    Guided,
    Exhaustive,
}

/// Iterative deepening over (phase, window, residue degree). Each level
/// is scanned fully; the first level with hits returns its
/// lexicographically least witness.
fn deepening_search(
    tower: &FieldTower,
    make: &dyn Fn(&FieldTower) -> Result<(Isocrystal, Option<SymplecticForm>), MazurError>,
    lams: &[Vec<i64>],
    mu: &Coweight,
    cfg: &SearchConfig,
    budget: &mut Budget,
) -> Result<Witness, MazurError> {
    let m_lo = tower.m();
    let m_hi = m_lo.max(cfg.m_max);
    for phase in [Phase::Guided, Phase::Exhaustive] {
        for a in 0..=cfg.window {
            for mdeg in m_lo..=m_hi {
                let tw = FieldTower::new(tower.p(), tower.e(), mdeg)?;
                let (x, form) = make(&tw)?;
                let mut hits: Vec<(Lattice, Vec<i64>, Option<i64>)> = Vec::new();
                let mut sink = |cand: Lattice| {
                    let shift = match &form {
                        Some(f) => match selfdual_shift(&cand, f) {
                            Some(k) => Some(k),
                            None => return,
                        },
                        None => None,
                    };
                    if let Some(mv) = verify_invariant(&x, &cand, mu) {
                        hits.push((cand, mv, shift));
                    }
                };
                let complete = match phase {
                    Phase::Guided => walk_guided(&tw, lams, a, budget, &mut sink),
                    Phase::Exhaustive => walk_window(&tw, mu.len(), a, budget, &mut sink),
                };
                if let Some((lattice, mv, shift)) =
                    hits.into_iter().min_by(|p, q| p.0.cmp(&q.0))
                {
                    return Ok(Witness {
                        lattice,
                        isocrystal: x,
                        hodge: mu.clone(),
                        minor_valuations: mv,
                        method: match phase {
                            Phase::Guided => WitnessMethod::Guided,
                            Phase::Exhaustive => WitnessMethod::Exhaustive,
                        },
                        selfdual_shift: shift,
                    });
                }
                if !complete {
                    let name = match phase {
                        Phase::Guided => "guided",
                        Phase::Exhaustive => "exhaustive",
                    };
                    return Err(MazurError::BudgetExhausted(format!(
                        "{} search cut off at window {}, residue degree {}",
                        name, a, mdeg
                    )));
                }
            }
        }
    }
    Err(MazurError::BudgetExhausted(format!(
        "window {} and residue degree {} fully scanned",
        cfg.window, m_hi
    )))
}

/// Check `inv(m, Fm) == mu`; on success return the minor-valuation
/// transcript.
fn verify_invariant(x: &Isocrystal, m: &Lattice, mu: &Coweight) -> Option<Vec<i64>> {
    let fm = x.image_lattice(m);
    let inv = m.relative_position(&fm).ok()?;
    if &inv != mu {
        return None;
    }
    Some(minor_transcript(m, &fm))
}

fn minor_transcript(m: &Lattice, fm: &Lattice) -> Vec<i64> {
    let prod = m.basis().adjugate().mul(fm.basis());
    let d_det = m.val_det();
    (1..=m.n())
        .map(|k| {
            minors_min_valuation(&prod, k).expect("transition matrix is invertible")
                - k as i64 * d_det
        })
        .collect()
}

/// The closed-form witness for a decomposable invariant: inside each
/// isoclinic block, scale e_i by t to the sum of the later block entries
/// of `mu`.
fn block_suffix_lattice(tower: &FieldTower, mu: &Coweight, p: &LeviPartition) -> Lattice {
    let mut exps = Vec::with_capacity(mu.len());
    for r in p.ranges() {
        let vals: Vec<i64> = r.map(|i| mu.entry(i).to_integer()).collect();
        for i in 0..vals.len() {
            exps.push(vals[i + 1..].iter().sum());
        }
    }
    Lattice::from_diag_exponents(tower, &exps)
}

/// Integral vectors under `mu` whose block sums match those of `nu`:
/// the diagonal shapes worth centering a unipotent search on.
fn guided_shapes(
    nu: &Coweight,
    mu: &Coweight,
    p: &LeviPartition,
) -> Result<Vec<Vec<i64>>, MazurError> {
    let target = kappa_levi(nu, p)?;
    let mut out = Vec::new();
    for lam in conv_integral_points(mu) {
        if kappa_levi(&lam, p)? == target {
            out.push(lam.as_ints().expect("integral by construction"));
        }
    }
    Ok(out)
}

/// All integral vectors (in any entry order) lying under dominant
/// integral `mu` in dominance order.
fn conv_integral_points(mu: &Coweight) -> Vec<Coweight> {
    let n = mu.len();
    let hi = mu.entry(0).to_integer();
    let lo = mu.entry(n - 1).to_integer();
    let total = mu.total().to_integer();
    fn rec(
        cur: &mut Vec<i64>,
        n: usize,
        lo: i64,
        hi: i64,
        remaining: i64,
        mu: &Coweight,
        out: &mut Vec<Coweight>,
    ) {
        if cur.len() == n {
            let lam = Coweight::from_ints(cur);
            if mu.dominates(&lam).expect("equal lengths and totals") {
                out.push(lam);
            }
            return;
        }
        let left = (n - cur.len() - 1) as i64;
        for v in lo..=hi {
            let rem = remaining - v;
            if rem < lo * left || rem > hi * left {
                continue;
            }
            cur.push(v);
            rec(cur, n, lo, hi, rem, mu, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), n, lo, hi, total, mu, &mut out);
    out
}

fn field_size(tower: &FieldTower) -> u64 {
    tower
        .p()
        .checked_pow(tower.degree())
        .expect("residue field too large to enumerate")
}

/// Enumerate `u·t^λ·Λ₀` for each diagonal shape λ, with `u` unipotent
/// carrying one or two monomial entries `c·t^k`, |k| ≤ a. Returns false
/// when the budget ran out mid-walk.
fn walk_guided(
    tower: &FieldTower,
    lams: &[Vec<i64>],
    a: i64,
    budget: &mut Budget,
    f: &mut dyn FnMut(Lattice),
) -> bool {
    let qm = field_size(tower);
    for lam in lams {
        let n = lam.len();
        if !budget.spend() {
            return false;
        }
        f(Lattice::from_diag_exponents(tower, lam));
        let mut singles: Vec<(usize, usize, i64, u64)> = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                for k in -a..=a {
                    for c in 1..qm {
                        singles.push((i, j, k, c));
                    }
                }
            }
        }
        for (s1, one) in singles.iter().enumerate() {
            if !budget.spend() {
                return false;
            }
            if let Some(l) = guided_candidate(tower, lam, &[*one]) {
                f(l);
            }
            for two in singles.iter().skip(s1 + 1) {
                if (one.0, one.1) == (two.0, two.1) {
                    continue;
                }
                if !budget.spend() {
                    return false;
                }
                if let Some(l) = guided_candidate(tower, lam, &[*one, *two]) {
                    f(l);
                }
            }
        }
    }
    true
}

fn guided_candidate(
    tower: &FieldTower,
    lam: &[i64],
    entries: &[(usize, usize, i64, u64)],
) -> Option<Lattice> {
    let n = lam.len();
    let mut m = Mat::filled(n, n, LaurentPoly::zero(tower));
    for j in 0..n {
        m.set(j, j, LaurentPoly::t_pow(tower, lam[j]));
    }
    for &(i, j, k, c) in entries {
        let add = LaurentPoly::monomial(tower, k + lam[j], FieldElem::from_index(tower, c));
        m.set(i, j, m.at(i, j).add(&add));
    }
    // two entries in opposite triangles can cancel the determinant
    Lattice::from_matrix(tower, &m).ok()
}

/// Enumerate every lattice with a triangular basis `t^{d_j}e_j + Σ_{i<j}
/// f_{ij}e_i`, diagonal exponents in `[-a, a]`, entry valuations in
/// `[-a, d_i)`. Returns false when the budget ran out mid-walk.
pub(crate) fn walk_window(
    tower: &FieldTower,
    n: usize,
    a: i64,
    budget: &mut Budget,
    f: &mut dyn FnMut(Lattice),
) -> bool {
    let qm = field_size(tower);
    let mut diag = vec![-a; n];
    loop {
        let mut slots: Vec<(usize, usize, i64)> = Vec::new();
        for j in 0..n {
            for i in 0..j {
                for k in -a..diag[i] {
                    slots.push((i, j, k));
                }
            }
        }
        let mut odo = vec![0u64; slots.len()];
        'cands: loop {
            if !budget.spend() {
                return false;
            }
            let mut m = Mat::filled(n, n, LaurentPoly::zero(tower));
            for j in 0..n {
                m.set(j, j, LaurentPoly::t_pow(tower, diag[j]));
            }
            for (s, &(i, j, k)) in slots.iter().enumerate() {
                if odo[s] != 0 {
                    let add =
                        LaurentPoly::monomial(tower, k, FieldElem::from_index(tower, odo[s]));
                    m.set(i, j, m.at(i, j).add(&add));
                }
            }
            if let Ok(l) = Lattice::from_matrix(tower, &m) {
                f(l);
            }
            let mut s = 0;
            loop {
                if s == odo.len() {
                    break 'cands;
                }
                odo[s] += 1;
                if odo[s] < qm {
                    break;
                }
                odo[s] = 0;
                s += 1;
            }
        }
        let mut j = 0;
        loop {
            if j == n {
                return true;
            }
            diag[j] += 1;
            if diag[j] <= a {
                break;
            }
            diag[j] = -a;
            j += 1;
        }
    }
}

/// If the dual of `m` is `t^k·m` for the unique consistent `k`, return
/// that `k`.
pub(crate) fn selfdual_shift(m: &Lattice, form: &SymplecticForm) -> Option<i64> {
    let n = m.n() as i64;
    let vd = m.val_det();
    if (-2 * vd) % n != 0 {
        return None;
    }
    let k = -2 * vd / n;
    let dual = m.dual_symplectic(form).ok()?;
    if dual == m.scaled(k) {
        Some(k)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t2() -> FieldTower {
        FieldTower::new(2, 1, 1).unwrap()
    }

    fn t4() -> FieldTower {
        FieldTower::new(2, 1, 2).unwrap()
    }

    fn cw(parts: &[(i64, i64)]) -> Coweight {
        Coweight::new(parts.iter().map(|&(p, q)| Rat::new(p, q)).collect())
    }

    fn icw(parts: &[i64]) -> Coweight {
        Coweight::from_ints(parts)
    }

    fn gsp(parts: &[(i64, i64)]) -> GSpCoweight {
        GSpCoweight::new(cw(parts)).unwrap()
    }

    fn tp(t: &FieldTower, k: i64) -> LaurentPoly {
        LaurentPoly::t_pow(t, k)
    }

    fn cfg() -> SearchConfig {
        SearchConfig::default()
    }

    #[test]
    fn report_confirms_dominance_for_standard_lattices() {
        let t = t2();
        let x = Isocrystal::standard(&t, &cw(&[(1, 2), (1, 2)])).unwrap();
        let r = mazur_check(&Lattice::standard(&t, 2), &x).unwrap();
        assert_eq!(r.hodge, icw(&[1, 0]));
        assert!(r.verdict && r.kappa_consistent && r.newton.certified);

        let id = Isocrystal::new(&t, Mat::identity_like(2, &LaurentPoly::one(&t))).unwrap();
        let r = mazur_check(&Lattice::standard(&t, 2), &id).unwrap();
        assert_eq!(r.hodge, icw(&[0, 0]));
        assert!(r.verdict && r.kappa_consistent);

        // a lattice far from the standard one: still dominated, never refuted
        let far = Lattice::from_diag_exponents(&t, &[3, -3]);
        let r = mazur_check(&far, &x).unwrap();
        assert_eq!(r.hodge, icw(&[6, -5]));
        assert!(r.verdict && r.kappa_consistent);

        assert!(matches!(
            mazur_check(&Lattice::standard(&t, 3), &x),
            Err(MazurError::Dimension(3, 2))
        ));
    }

    #[test]
    fn membership_needs_matching_degree_and_dominance() {
        let t = t2();
        let x = Isocrystal::standard(&t, &cw(&[(1, 2), (1, 2)])).unwrap();
        assert_eq!(hodge_set_contains(&x, &icw(&[1, 0]), &cfg()).unwrap(), Some(true));
        assert_eq!(hodge_set_contains(&x, &icw(&[2, 0]), &cfg()).unwrap(), Some(false));

        let spread = Isocrystal::standard(&t, &icw(&[2, 0, 0])).unwrap();
        assert_eq!(hodge_set_contains(&spread, &icw(&[1, 1, 0]), &cfg()).unwrap(), Some(false));

        // two swapped lines with offset powers plus a scaled one
        let mut b = Mat::filled(3, 3, LaurentPoly::zero(&t));
        b.set(0, 1, tp(&t, 1));
        b.set(1, 0, tp(&t, 2));
        b.set(2, 2, tp(&t, 1));
        let x = Isocrystal::new(&t, b).unwrap();
        assert_eq!(x.newton_point(&cfg()).nu, cw(&[(3, 2), (3, 2), (1, 1)]));
        assert_eq!(hodge_set_contains(&x, &icw(&[2, 1, 1]), &cfg()).unwrap(), Some(true));
        assert_eq!(hodge_set_contains(&x, &icw(&[1, 1, 1]), &cfg()).unwrap(), Some(false));
    }

    #[test]
    fn membership_is_agnostic_when_newton_uncertified() {
        // conjugate diag(t, t, 1) by a dense constant matrix: the operator
        // has no cyclic vector and a bent polygon, so no path certifies
        let t = t2();
        let one = LaurentPoly::one(&t);
        let zero = LaurentPoly::zero(&t);
        let c = Mat::from_fn(3, 3, |i, j| match (i, j) {
            (0, 0) | (2, 1) => zero.clone(),
            _ => one.clone(),
        });
        let cinv = Mat::from_fn(3, 3, |i, j| match (i, j) {
            (0, 2) | (1, 0) => zero.clone(),
            _ => one.clone(),
        });
        assert_eq!(c.mul(&cinv), Mat::identity_like(3, &one));
        let d = Mat::from_fn(3, 3, |i, j| {
            if i == j {
                tp(&t, if i < 2 { 1 } else { 0 })
            } else {
                zero.clone()
            }
        });
        let x = Isocrystal::new(&t, c.mul(&d).mul(&cinv)).unwrap();
        let np = x.newton_point(&cfg());
        assert!(!np.certified);
        assert_eq!(np.nu, icw(&[1, 1, 0]));

        assert_eq!(hodge_set_contains(&x, &icw(&[1, 1, 0]), &cfg()).unwrap(), None);
        // degree mismatch stays decidable without certification
        assert_eq!(hodge_set_contains(&x, &icw(&[1, 0, 0]), &cfg()).unwrap(), Some(false));
    }

    #[test]
    fn split_construction_uses_suffix_blocks() {
        let t = t2();
        let w = construct_lattice(&t, &cw(&[(1, 2), (1, 2)]), &icw(&[1, 0]), &cfg()).unwrap();
        assert_eq!(w.lattice, Lattice::standard(&t, 2));
        assert_eq!(w.method, WitnessMethod::BlockSplit);
        assert_eq!(w.hodge, icw(&[1, 0]));
        assert_eq!(w.minor_valuations, vec![0, 1]);

        let w =
            construct_lattice(&t, &cw(&[(2, 3), (2, 3), (2, 3)]), &icw(&[1, 1, 0]), &cfg())
                .unwrap();
        assert_eq!(w.lattice, Lattice::from_diag_exponents(&t, &[1, 0, 0]));
        assert_eq!(w.method, WitnessMethod::BlockSplit);

        let w =
            construct_lattice(&t, &cw(&[(1, 1), (1, 2), (1, 2)]), &icw(&[1, 1, 0]), &cfg())
                .unwrap();
        assert_eq!(w.lattice, Lattice::standard(&t, 3));
        assert_eq!(w.method, WitnessMethod::BlockSplit);

        let v = w.to_json();
        assert!(v["lattice"].is_object() || v["lattice"].is_array());
        assert!(!v["isocrystal"].is_null());
        assert_eq!(v["method"], "block-split");
        assert!(v["verification"]["minor_valuations"].is_array());
        assert!(v.get("selfdual_shift").is_none());
    }

    #[test]
    fn guided_search_finds_mixing_witnesses() {
        let t = t2();
        let nu = cw(&[(1, 2), (1, 2), (0, 1)]);
        // breakpoint prefix differs, so no block-split lattice exists
        let w = construct_lattice(&t, &nu, &icw(&[1, 1, -1]), &cfg()).unwrap();
        assert_eq!(w.method, WitnessMethod::Guided);
        assert_eq!(w.hodge, icw(&[1, 1, -1]));
        assert_eq!(
            w.isocrystal.hodge_vector(&w.lattice),
            icw(&[1, 1, -1]),
            "witness must re-verify"
        );
        let again = construct_lattice(&t, &nu, &icw(&[1, 1, -1]), &cfg()).unwrap();
        assert_eq!(w.lattice, again.lattice, "search is deterministic");

        let wide = SearchConfig::new(2, 2, 50_000, 0);
        let w = construct_lattice(&t, &nu, &icw(&[2, 0, -1]), &wide).unwrap();
        assert_eq!(w.hodge, icw(&[2, 0, -1]));
        assert_eq!(w.isocrystal.hodge_vector(&w.lattice), icw(&[2, 0, -1]));
    }

    #[test]
    fn construction_rejects_or_exhausts_honestly() {
        let t = t2();
        let err = construct_lattice(&t, &icw(&[1, 1, 0]), &icw(&[1, 0, 0]), &cfg()).unwrap_err();
        assert!(err.to_string().starts_with("Mazur violation"), "{err}");

        let err = construct_lattice(&t, &icw(&[2, 0, 0]), &icw(&[1, 1, 0]), &cfg()).unwrap_err();
        assert!(err.to_string().starts_with("Mazur violation"), "{err}");

        let tiny = SearchConfig::new(2, 1, 3, 0);
        let err =
            construct_lattice(&t, &cw(&[(1, 2), (1, 2), (0, 1)]), &icw(&[1, 1, -1]), &tiny)
                .unwrap_err();
        assert!(err.to_string().starts_with("witness not found within budget"), "{err}");
    }

    #[test]
    fn selfdual_chain_witnesses_for_weight_half_invariants() {
        let t = t2();
        let form1 = SymplecticForm::standard(&t, 1);
        let w = construct_lattice_gsp(
            &t,
            &gsp(&[(1, 2), (1, 2)]),
            &gsp(&[(1, 1), (0, 1)]),
            &form1,
            &cfg(),
        )
        .unwrap();
        assert_eq!(w.lattice, Lattice::standard(&t, 2));
        assert_eq!(w.method, WitnessMethod::MinusculeChain);
        assert_eq!(w.selfdual_shift, Some(0));
        assert_eq!(w.hodge, icw(&[1, 0]));

        let form2 = SymplecticForm::standard(&t, 2);
        let w = construct_lattice_gsp(
            &t,
            &gsp(&[(1, 1), (1, 2), (1, 2), (0, 1)]),
            &gsp(&[(1, 1), (1, 1), (0, 1), (0, 1)]),
            &form2,
            &cfg(),
        )
        .unwrap();
        assert_eq!(w.lattice, Lattice::standard(&t, 4));
        assert_eq!(w.method, WitnessMethod::MinusculeChain);

        let w = construct_lattice_gsp(
            &t,
            &gsp(&[(1, 1), (1, 1), (0, 1), (0, 1)]),
            &gsp(&[(1, 1), (1, 1), (0, 1), (0, 1)]),
            &form2,
            &cfg(),
        )
        .unwrap();
        assert_eq!(w.lattice, Lattice::from_diag_exponents(&t, &[0, -1, 1, 0]));
        let x = &w.isocrystal;
        let fm = x.image_lattice(&w.lattice);
        assert!(w.lattice.contains_lattice(&fm));
        assert!(fm.contains_lattice(&w.lattice.scaled(1)));
        assert_eq!(fm.dual_symplectic(&form2).unwrap(), fm.scaled(-1));

        // same form up to relabeling, but paired 0↔1, 2↔3: not handled
        let shuffled = SymplecticForm::from_matrix(Mat::from_fn(4, 4, |i, j| {
            if j == i + 1 && i % 2 == 0 {
                LaurentPoly::one(&t)
            } else if i == j + 1 && j % 2 == 0 {
                LaurentPoly::one(&t).neg()
            } else {
                LaurentPoly::zero(&t)
            }
        }))
        .unwrap();
        let err = construct_lattice_gsp(
            &t,
            &gsp(&[(1, 1), (1, 2), (1, 2), (0, 1)]),
            &gsp(&[(1, 1), (1, 1), (0, 1), (0, 1)]),
            &shuffled,
            &cfg(),
        )
        .unwrap_err();
        assert!(matches!(err, MazurError::UnsupportedForm(_)));
    }

    #[test]
    fn general_symplectic_search_filters_selfdual() {
        let t = t2();
        let form = SymplecticForm::standard(&t, 1);
        let w = construct_lattice_gsp(
            &t,
            &gsp(&[(1, 2), (1, 2)]),
            &gsp(&[(2, 1), (-1, 1)]),
            &form,
            &cfg(),
        )
        .unwrap();
        assert_eq!(w.method, WitnessMethod::Guided);
        assert_eq!(w.hodge, icw(&[2, -1]));
        let k = w.selfdual_shift.expect("symplectic witnesses carry their shift");
        assert_eq!(w.lattice.dual_symplectic(&form).unwrap(), w.lattice.scaled(k));

        // zero Newton vector, zero invariant: the standard lattice wins
        let w = construct_lattice_gsp(
            &t,
            &gsp(&[(0, 1), (0, 1)]),
            &gsp(&[(0, 1), (0, 1)]),
            &form,
            &cfg(),
        )
        .unwrap();
        assert_eq!(w.lattice, Lattice::standard(&t, 2));
        assert_eq!(w.selfdual_shift, Some(0));

        let err = construct_lattice_gsp(
            &t,
            &gsp(&[(1, 2), (1, 2)]),
            &gsp(&[(1, 1), (1, 1)]),
            &form,
            &cfg(),
        )
        .unwrap_err();
        assert!(err.to_string().starts_with("Mazur violation"), "{err}");
    }

    #[test]
    fn standard_symplectic_operator_shapes() {
        let t = t2();
        let sx = standard_symplectic(&t, &gsp(&[(3, 2), (3, 2), (1, 2), (1, 2)])).unwrap();
        let b = sx.iso().matrix();
        assert_eq!(*b.at(1, 0), LaurentPoly::one(&t));
        assert_eq!(*b.at(0, 1), tp(&t, 3));
        assert_eq!(*b.at(2, 3), tp(&t, 2));
        assert_eq!(*b.at(3, 2), tp(&t, -1));
        assert_eq!(*sx.scale(), tp(&t, 2));
        let np = sx.iso().newton_point(&cfg());
        assert!(np.certified);
        assert_eq!(np.nu, cw(&[(3, 2), (3, 2), (1, 2), (1, 2)]));

        let sx = standard_symplectic(&t, &gsp(&[(1, 1), (1, 1), (1, 1), (1, 1)])).unwrap();
        assert_eq!(
            *sx.iso().matrix(),
            Mat::from_fn(4, 4, |i, j| if i == j { tp(&t, 1) } else { LaurentPoly::zero(&t) })
        );

        let sx = standard_symplectic(&t, &gsp(&[(1, 2), (1, 2)])).unwrap();
        assert_eq!(*sx.iso().matrix(), *Isocrystal::half_slope_symplectic(&t, 1).matrix());

        let err = standard_symplectic(&t, &gsp(&[(3, 2), (1, 1), (1, 1), (1, 2)])).unwrap_err();
        assert!(matches!(err, MazurError::Coweight(CoweightError::NotIntegral(_))), "{err}");
    }

    #[test]
    fn window_scan_collects_realized_invariants() {
        let t4 = t4();
        let x = Isocrystal::standard(&t4, &cw(&[(1, 2), (1, 2)])).unwrap();
        let scan = enumerate_hodge_set(&x, &cfg());
        assert!(scan.complete);
        let want: BTreeSet<Coweight> = [icw(&[1, 0]), icw(&[2, -1])].into_iter().collect();
        assert_eq!(scan.set, want);

        let id4 = Isocrystal::new(&t4, Mat::identity_like(2, &LaurentPoly::one(&t4))).unwrap();
        let narrow = SearchConfig::new(1, 2, 10_000, 0);
        let scan = enumerate_hodge_set(&id4, &narrow);
        assert!(scan.complete);
        let want: BTreeSet<Coweight> = [icw(&[0, 0]), icw(&[1, -1])].into_iter().collect();
        assert_eq!(scan.set, want);

        // over the prime field the identity operator is the identity map:
        // every lattice is fixed and only the zero invariant appears
        let t2 = t2();
        let id2 = Isocrystal::new(&t2, Mat::identity_like(2, &LaurentPoly::one(&t2))).unwrap();
        let scan = enumerate_hodge_set(&id2, &narrow);
        assert!(scan.complete);
        assert_eq!(scan.set.len(), 1);
        assert!(scan.set.contains(&icw(&[0, 0])));

        let strapped = SearchConfig::new(2, 2, 5, 0);
        let scan = enumerate_hodge_set(&x, &strapped);
        assert!(!scan.complete);
        assert_eq!(scan.scanned, 5);
    }

    #[test]
    fn window_scan_matches_dominance_prediction() {
        let t4 = t4();
        for nu in [cw(&[(0, 1), (0, 1)]), cw(&[(1, 2), (1, 2)]), cw(&[(1, 1), (0, 1)])] {
            let x = Isocrystal::standard(&t4, &nu).unwrap();
            let scan = enumerate_hodge_set(&x, &cfg());
            assert!(scan.complete);
            let total = nu.total().to_integer();
            let predicted: BTreeSet<Coweight> =
                crate::coweight::integral_dominant_in_box(2, -2, 2, Some(total))
                    .into_iter()
                    .filter(|mu| mu.dominates(&nu).unwrap())
                    .collect();
            assert_eq!(scan.set, predicted, "window scan for {}", nu);

            let least = nu.minimal_dominant_above().unwrap();
            assert!(scan.set.contains(&least));
            for mu in &scan.set {
                assert!(mu.dominates(&least).unwrap(), "{} must dominate {}", mu, least);
            }
        }
    }

    #[test]
    fn window_search_realizes_exactly_the_dominated_invariants() {
        let t = t2();
        let cfg = SearchConfig::new(2, 1, 50_000, 0);
        let nus =
            [icw(&[1, 1, 0]), cw(&[(2, 3), (2, 3), (2, 3)]), cw(&[(1, 1), (1, 2), (1, 2)]), icw(&[2, 0, 0])];
        let mut mus = crate::coweight::integral_dominant_in_box(3, -1, 2, Some(2));
        mus.extend(crate::coweight::integral_dominant_in_box(3, -1, 2, Some(1)));
        for nu in &nus {
            let p = LeviPartition::isotypic(&nu.dominant());
            let kappa_nu = kappa_levi(&nu.dominant(), &p).unwrap();
            for mu in &mus {
                let expected = mu.total() == nu.total() && mu.dominates(nu).unwrap();
                // block-degree criterion, checked exhaustively over the
                // integral points under mu
                let image_hit = mu.total() == nu.total()
                    && conv_integral_points(mu)
                        .iter()
                        .any(|lam| kappa_levi(lam, &p).unwrap() == kappa_nu);
                assert_eq!(expected, image_hit, "nu = {}, mu = {}", nu, mu);
                match construct_lattice(&t, nu, mu, &cfg) {
                    Ok(w) => {
                        assert!(expected, "unexpected witness for nu = {}, mu = {}", nu, mu);
                        assert_eq!(w.hodge, *mu);
                        assert_eq!(w.isocrystal.hodge_vector(&w.lattice), *mu);
                    }
                    Err(MazurError::Violation(_)) => {
                        assert!(!expected, "missing witness for nu = {}, mu = {}", nu, mu);
                    }
                    Err(e) => panic!("nu = {}, mu = {}: {}", nu, mu, e),
                }
            }
        }
    }

    #[test]
    fn random_lattices_never_beat_their_newton_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let towers = [t2(), t4(), FieldTower::new(3, 1, 1).unwrap()];
        let pool2 = [cw(&[(0, 1), (0, 1)]), cw(&[(1, 2), (1, 2)]), cw(&[(1, 1), (0, 1)]), cw(&[(3, 2), (3, 2)])];
        let pool3 = [
            cw(&[(2, 3), (2, 3), (2, 3)]),
            cw(&[(1, 1), (1, 2), (1, 2)]),
            cw(&[(1, 1), (1, 1), (0, 1)]),
            cw(&[(0, 1), (0, 1), (0, 1)]),
        ];
        for case in 0..40 {
            let t = &towers[case % towers.len()];
            let nu = if case % 2 == 0 {
                pool2[rng.gen_range(0..pool2.len())].clone()
            } else {
                pool3[rng.gen_range(0..pool3.len())].clone()
            };
            let n = nu.len();
            let x = Isocrystal::standard(t, &nu).unwrap();
            let qm = field_size(t);
            let mut m = Mat::filled(n, n, LaurentPoly::zero(t));
            for j in 0..n {
                let d = rng.gen_range(-1..=1);
                m.set(j, j, tp(t, d));
                for i in 0..j {
                    if rng.gen_range(0..2) == 1 {
                        let k = rng.gen_range(-2..1);
                        let c = FieldElem::from_index(t, rng.gen_range(1..qm));
                        m.set(i, j, m.at(i, j).add(&LaurentPoly::monomial(t, k, c)));
                    }
                }
            }
            let lat = Lattice::from_matrix(t, &m).unwrap();
            let report = mazur_check(&lat, &x).unwrap();
            assert!(report.newton.certified);
            assert!(report.verdict, "case {}: {} vs {}", case, report.hodge, report.newton.nu);
            assert!(report.kappa_consistent);
        }
    }
}
