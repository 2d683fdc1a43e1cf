//! Circular diagrams of semilinear maps between equal-dimensional spaces
//! over a finite field: validation of the two-sided zero-composition rule,
//! the open rank-profile test, eigenline search with residue-field growth,
//! and a deterministic solver producing a tuple of mutually incident lines.

use serde_json::{json, Value};
use thiserror::Error;

use crate::arith::{ArithError, FieldElem, FieldTower};
use crate::matrix::{normalize_line, semilinear_fixed_space, FMat, Mat, Semilinear};
use crate::mazur::Budget;
use crate::search::SearchConfig;

#[derive(Debug, Error)]
pub enum IncidenceError {
    #[error("diagram needs at least one space")]
    Empty,
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("maps at index {0} do not compose to zero both ways")]
    Composite(usize),
    #[error("map is not invertible on its domain")]
    Singular,
    #[error("no invariant line within residue degree {0}; small fields may lack one")]
    ExtensionExhausted(u32),
    #[error("search budget exhausted ({0})")]
    Budget(String),
    #[error("malformed diagram: {0}")]
    Json(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// Ranks of the raising maps, one per index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankProfile(pub Vec<usize>);

/// A cyclic family of spaces W_i of one common dimension with a raising map
/// into each W_i from its predecessor and a lowering map back, both
/// semilinear with arbitrary integer Frobenius powers. Adjacent raising and
/// lowering maps must compose to zero in both orders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircularDiagram {
    tower: FieldTower,
    dim: usize,
    /// pair i = (raise: W_{i-1} -> W_i, lower: W_i -> W_{i-1})
    maps: Vec<(Semilinear, Semilinear)>,
}

impl CircularDiagram {
    pub fn new(
        tower: &FieldTower,
        maps: Vec<(Semilinear, Semilinear)>,
    ) -> Result<Self, IncidenceError> {
        if maps.is_empty() {
            return Err(IncidenceError::Empty);
        }
        let dim = maps[0].0.mat.nrows();
        if dim == 0 {
            return Err(IncidenceError::Empty);
        }
        for (phi, psi) in &maps {
            for m in [&phi.mat, &psi.mat] {
                if m.nrows() != dim || m.ncols() != dim {
                    return Err(IncidenceError::Dimension(m.nrows(), dim));
                }
            }
        }
        Ok(CircularDiagram { tower: tower.clone(), dim, maps })
    }

    /// Number of spaces around the circle.
    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tower(&self) -> &FieldTower {
        &self.tower
    }

    fn raise(&self, i: usize) -> &Semilinear {
        &self.maps[i % self.maps.len()].0
    }

    fn lower(&self, i: usize) -> &Semilinear {
        &self.maps[i % self.maps.len()].1
    }

    /// Check the zero-composition rule at every index and read off the
    /// ranks of the raising maps.
    pub fn validate(&self) -> Result<RankProfile, IncidenceError> {
        for (i, (phi, psi)) in self.maps.iter().enumerate() {
            if !psi.compose(phi).mat.is_zero() || !phi.compose(psi).mat.is_zero() {
                return Err(IncidenceError::Composite(i));
            }
        }
        Ok(RankProfile(self.maps.iter().map(|(phi, _)| phi.mat.rank()).collect()))
    }

    /// The full circuit of raising maps, an endomorphism of W_0.
    pub fn circuit(&self) -> Semilinear {
        let f = self.maps.len();
        let mut acc = self.raise(1 % f).clone();
        for i in 2..=f {
            if f == 1 {
                break;
            }
            acc = self.raise(i % f).compose(&acc);
        }
        if f == 1 {
            acc = self.raise(0).clone();
        }
        acc
    }

    /// True when the diagram sits in the dense open part of its rank
    /// stratum: every lowering map has the complementary rank, and the
    /// circuit has the largest possible rank with an invertible restriction
    /// to its image.
    pub fn is_generic(&self) -> Result<bool, IncidenceError> {
        let RankProfile(profile) = self.validate()?;
        for ((_, psi), r) in self.maps.iter().zip(&profile) {
            if psi.mat.rank() != self.dim - r {
                return Ok(false);
            }
        }
        let circuit = self.circuit();
        let r = circuit.mat.rank();
        let rmin = *profile.iter().min().expect("nonempty diagram");
        Ok(r == rmin && circuit.compose(&circuit).mat.rank() == r)
    }

    pub fn to_json(&self) -> Value {
        let maps: Vec<Value> = self
            .maps
            .iter()
            .map(|(phi, psi)| {
                json!({
                    "phi": fmat_to_json(&phi.mat),
                    "sigma": phi.twist,
                    "psi": fmat_to_json(&psi.mat),
                    "tau": psi.twist,
                })
            })
            .collect();
        json!({ "f": self.maps.len(), "m": self.dim, "maps": maps })
    }

    pub fn from_json(tower: &FieldTower, v: &Value) -> Result<Self, IncidenceError> {
        let f = v["f"]
            .as_u64()
            .ok_or_else(|| IncidenceError::Json("missing circle length".into()))?;
        let m = v["m"]
            .as_u64()
            .ok_or_else(|| IncidenceError::Json("missing dimension".into()))?;
        let arr = v["maps"]
            .as_array()
            .ok_or_else(|| IncidenceError::Json("missing map list".into()))?;
        if arr.len() as u64 != f {
            return Err(IncidenceError::Json(format!(
                "expected {f} map pairs, found {}",
                arr.len()
            )));
        }
        let mut maps = Vec::with_capacity(arr.len());
        for entry in arr {
            let phi = fmat_from_json(tower, &entry["phi"], m as usize)?;
            let psi = fmat_from_json(tower, &entry["psi"], m as usize)?;
            let sigma = entry["sigma"]
                .as_i64()
                .ok_or_else(|| IncidenceError::Json("missing raising twist".into()))?;
            let tau = entry["tau"]
                .as_i64()
                .ok_or_else(|| IncidenceError::Json("missing lowering twist".into()))?;
            maps.push((Semilinear::new(phi, sigma), Semilinear::new(psi, tau)));
        }
        Self::new(tower, maps)
    }
}

fn fmat_to_json(m: &FMat) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array(m.row(i).iter().map(|e| e.to_json()).collect()))
            .collect(),
    )
}

fn fmat_from_json(tower: &FieldTower, v: &Value, dim: usize) -> Result<FMat, IncidenceError> {
    let rows = v
        .as_array()
        .ok_or_else(|| IncidenceError::Json("matrix must be an array of rows".into()))?;
    if rows.len() != dim {
        return Err(IncidenceError::Dimension(rows.len(), dim));
    }
    let mut out = Vec::with_capacity(dim);
    for row in rows {
        let cells = row
            .as_array()
            .ok_or_else(|| IncidenceError::Json("matrix row must be an array".into()))?;
        if cells.len() != dim {
            return Err(IncidenceError::Dimension(cells.len(), dim));
        }
        let mut r = Vec::with_capacity(dim);
        for cell in cells {
            r.push(FieldElem::from_json(tower, cell)?);
        }
        out.push(r);
    }
    Ok(Mat::from_rows(out))
}

/// A tuple of normalized lines, one per space, each carried into the next by
/// the raising maps and back by the lowering maps, together with the residue
/// degree the coordinates live in and notes on how it was found.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineTuple {
    pub lines: Vec<Vec<FieldElem>>,
    pub degree: u32,
    pub transcript: Vec<String>,
}

impl LineTuple {
    /// Exact check of the incidence conditions against a diagram.
    pub fn satisfies(&self, d: &CircularDiagram) -> bool {
        let f = d.len();
        if self.lines.len() != f {
            return false;
        }
        (0..f).all(|i| {
            let prev = &self.lines[(i + f - 1) % f];
            in_span(&d.raise(i).apply(prev), &self.lines[i])
                && in_span(&d.lower(i).apply(&self.lines[i]), prev)
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "lines": self
                .lines
                .iter()
                .map(|l| Value::Array(l.iter().map(|c| c.to_json()).collect()))
                .collect::<Vec<Value>>(),
            "degree": self.degree,
            "transcript": self.transcript,
        })
    }
}

/// v lies in the span of the (nonzero) line.
fn in_span(v: &[FieldElem], line: &[FieldElem]) -> bool {
    if v.iter().all(|c| c.is_zero()) {
        return true;
    }
    let lead = match line.iter().position(|c| !c.is_zero()) {
        Some(j) => j,
        None => return false,
    };
    let lam = match v[lead].div(&line[lead]) {
        Ok(l) => l,
        Err(_) => return false,
    };
    v.iter().zip(line).all(|(a, b)| *a == lam.mul(b))
}

/// Order lines so that an earlier leading coordinate wins, then
/// lexicographically; the first basis vector comes first.
fn line_cmp(a: &[FieldElem], b: &[FieldElem]) -> std::cmp::Ordering {
    let la = a.iter().position(|c| !c.is_zero());
    let lb = b.iter().position(|c| !c.is_zero());
    la.cmp(&lb).then_with(|| a.cmp(b))
}

/// Nonzero combinations of the basis with coefficients drawn from `coeff`;
/// just the basis vectors when the span is too large to sweep.
fn span_combos(basis: &[Vec<FieldElem>], coeff: &FieldTower) -> Vec<Vec<FieldElem>> {
    let dim = basis[0].len();
    let q = coeff.size().expect("coefficient field fits in u64") as u128;
    let total = match q.checked_pow(basis.len() as u32).filter(|&t| t <= 4096) {
        Some(total) => total,
        None => return basis.to_vec(),
    };
    let mut out = Vec::new();
    for idx in 1..total {
        let mut rem = idx;
        let mut v = vec![FieldElem::zero(coeff); dim];
        for b in basis {
            let c = FieldElem::from_index(coeff, (rem % q) as u64);
            rem /= q;
            if !c.is_zero() {
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi = vi.add(&bi.mul(&c));
                }
            }
        }
        if v.iter().any(|x| !x.is_zero()) {
            out.push(v);
        }
    }
    out
}

/// Least normalized line in the span of `basis` over the full tower.
fn least_line_in_span(basis: &[Vec<FieldElem>], coeff: &FieldTower) -> Vec<FieldElem> {
    span_combos(basis, coeff)
        .iter()
        .map(|v| normalize_line(v))
        .min_by(|a, b| line_cmp(a, b))
        .expect("nonzero span")
}

/// All normalized lines of an m-dimensional space over the tower, in
/// leading-coordinate order. Errors rather than sweep an oversized space.
fn enumerate_lines(dim: usize, tower: &FieldTower) -> Result<Vec<Vec<FieldElem>>, IncidenceError> {
    let q = tower.size().expect("field fits in u64") as u128;
    let mut out = Vec::new();
    for lead in 0..dim {
        let tail = dim - lead - 1;
        let total = q
            .checked_pow(tail as u32)
            .filter(|&t| t <= 1 << 20)
            .ok_or_else(|| IncidenceError::Budget("line enumeration too large".into()))?;
        for idx in 0..total {
            let mut v = vec![FieldElem::zero(tower); dim];
            v[lead] = FieldElem::from_int(tower, 1);
            let mut rem = idx;
            for c in v.iter_mut().skip(lead + 1) {
                *c = FieldElem::from_index(tower, (rem % q) as u64);
                rem /= q;
            }
            out.push(v);
        }
    }
    out.sort_by(|a, b| line_cmp(a, b));
    Ok(out)
}

/// A line carried onto itself by the map: a nonzero fixed vector when the
/// twist is nonzero (scanning residue degrees up to `cfg.m_max`), an
/// eigenvector for the first eigenvalue found when the map is plain linear.
/// Returns the line and the residue degree it needed.
pub fn semilinear_eigenline(
    map: &Semilinear,
    tower: &FieldTower,
    cfg: &SearchConfig,
) -> Result<(Vec<FieldElem>, u32), IncidenceError> {
    if map.mat.nrows() == 0 || !map.mat.is_invertible() {
        return Err(IncidenceError::Singular);
    }
    let m = tower.m();
    let cap = cfg.m_max.max(m);
    let scalars = FieldTower::with_ctx(tower.ctx().clone(), 1)?;
    let mut budget = Budget { left: cfg.budget };
    let mut mdeg = m;
    while mdeg <= cap {
        let ext = tower.grown(mdeg)?;
        if map.twist != 0 {
            let basis = semilinear_fixed_space(map, &ext)?;
            if !basis.is_empty() {
                // scaling by base-field scalars keeps a vector fixed, so the
                // chosen representative satisfies the equation on the nose
                let rep = span_combos(&basis, &scalars)
                    .into_iter()
                    .min_by(|a, b| line_cmp(a, b))
                    .expect("nonzero fixed space");
                return Ok((rep, mdeg));
            }
        } else {
            // plain linear: sweep eigenvalues in enumeration order, 1 first
            let n = map.mat.nrows();
            let size = ext.size().expect("field fits in u64");
            let ident = Mat::identity_like(n, map.mat.exemplar());
            for idx in 1..size {
                if !budget.spend() {
                    return Err(IncidenceError::Budget("eigenvalue sweep".into()));
                }
                let lam = FieldElem::from_index(&ext, idx);
                let shifted = map.mat.sub(&ident.scale(&lam));
                let kernel = shifted.kernel_basis();
                if !kernel.is_empty() {
                    return Ok((least_line_in_span(&kernel, &ext), mdeg));
                }
            }
        }
        mdeg += m;
    }
    Err(IncidenceError::ExtensionExhausted(cap))
}

/// One raising and one lowering endomorphism of a single space composing to
/// zero both ways: produce a line stable under both.
fn single_space_line(
    phi: &Semilinear,
    psi: &Semilinear,
    tower: &FieldTower,
    cfg: &SearchConfig,
    transcript: &mut Vec<String>,
) -> Result<(Vec<FieldElem>, u32), IncidenceError> {
    if phi.mat.is_invertible() {
        // the lowering map is zero, so any eigenline of the raising map works
        debug_assert!(psi.mat.is_zero());
        let (line, deg) = semilinear_eigenline(phi, tower, cfg)?;
        transcript.push("single space: eigenline of the raising map".into());
        return Ok((normalize_line(&line), deg));
    }
    // the kernel of the raising map absorbs the whole image of the lowering
    // map, so the lowering map restricts to it
    let kernel: Vec<Vec<FieldElem>> = phi
        .mat
        .kernel_basis()
        .into_iter()
        .map(|v| v.iter().map(|c| c.sigma(-phi.twist)).collect())
        .collect();
    let s = kernel.len();
    let dim = phi.mat.nrows();
    let kmat = Mat::from_fn(dim, s, |i, j| kernel[j][i].clone());
    let restricted = Mat::from_fn(s, s, |i, j| {
        let img = psi.apply(&kernel[j]);
        kmat.solve(&img).expect("lowering map preserves the kernel")[i].clone()
    });
    if !restricted.is_invertible() {
        let inner: Vec<Vec<FieldElem>> = restricted
            .kernel_basis()
            .into_iter()
            .map(|v| {
                let lifted: Vec<FieldElem> =
                    v.iter().map(|c| c.sigma(psi.twist)).collect();
                kmat.mul_vec(&lifted)
            })
            .collect();
        transcript.push("single space: common kernel line".into());
        return Ok((least_line_in_span(&inner, tower), tower.m()));
    }
    let (w, deg) = semilinear_eigenline(&Semilinear::new(restricted, psi.twist), tower, cfg)?;
    transcript.push("single space: eigenline of the lowering map on the kernel".into());
    Ok((normalize_line(&kmat.mul_vec(&w)), deg))
}

/// How one index is eliminated when a map around it is invertible.
#[derive(Clone, Copy, Debug)]
enum Reduction {
    /// Lowering map at j invertible: predecessor space merges into W_j.
    Standard { j: usize },
    /// Raising map at j invertible: W_j merges into its predecessor.
    Mirror { j: usize },
}

fn reduce_at(d: &CircularDiagram, red: Reduction) -> CircularDiagram {
    let f = d.len();
    let mut maps = Vec::with_capacity(f - 1);
    match red {
        Reduction::Standard { j } => {
            let inv = d.lower(j).inverse().expect("reduction needs invertibility");
            maps.push((
                inv.compose(d.raise((j + f - 1) % f)),
                d.lower((j + f - 1) % f).compose(d.lower(j)),
            ));
            for i in 1..f - 1 {
                maps.push(d.maps[(j + i) % f].clone());
            }
        }
        Reduction::Mirror { j } => {
            let inv = d.raise(j).inverse().expect("reduction needs invertibility");
            maps.push((
                d.raise((j + 1) % f).compose(d.raise(j)),
                inv.compose(d.lower((j + 1) % f)),
            ));
            for i in 1..f - 1 {
                maps.push(d.maps[(j + 1 + i) % f].clone());
            }
        }
    }
    let out = CircularDiagram::new(&d.tower, maps).expect("reduced diagram is well-formed");
    debug_assert!(out.validate().is_ok());
    out
}

fn map_back(
    d: &CircularDiagram,
    red: Reduction,
    reduced: &[Vec<FieldElem>],
) -> Vec<Vec<FieldElem>> {
    let f = d.len();
    let mut out = vec![Vec::new(); f];
    match red {
        Reduction::Standard { j } => {
            for (i, l) in reduced.iter().enumerate() {
                out[(j + i) % f] = l.clone();
            }
            out[(j + f - 1) % f] = normalize_line(&d.lower(j).apply(&reduced[0]));
        }
        Reduction::Mirror { j } => {
            for (i, l) in reduced.iter().enumerate() {
                out[(j + 1 + i) % f] = l.clone();
            }
            out[j] = normalize_line(&d.raise(j).apply(&reduced[f - 2]));
        }
    }
    out
}

/// Produce a tuple of incident lines for a valid diagram. Preference order:
/// eliminate indices whose lowering (or, mirrored, raising) map is
/// invertible; solve a single space directly; take a circuit eigenline when
/// the circuit is invertible on its nonzero image; otherwise search tuples
/// exhaustively, growing the residue field as allowed by `cfg.m_max`.
pub fn solve_lines(
    d: &CircularDiagram,
    cfg: &SearchConfig,
) -> Result<LineTuple, IncidenceError> {
    d.validate()?;
    let mut transcript = Vec::new();
    let mut budget = Budget { left: cfg.budget };
    let (lines, degree) = solve_inner(d, cfg, &mut budget, &mut transcript)?;
    let out = LineTuple { lines, degree, transcript };
    assert!(out.satisfies(d), "solver output must satisfy the incidence conditions");
    Ok(out)
}

fn solve_inner(
    d: &CircularDiagram,
    cfg: &SearchConfig,
    budget: &mut Budget,
    transcript: &mut Vec<String>,
) -> Result<(Vec<Vec<FieldElem>>, u32), IncidenceError> {
    let f = d.len();
    if f > 1 {
        let red = (0..f)
            .find(|&j| d.lower(j).is_bijective())
            .map(|j| Reduction::Standard { j })
            .or_else(|| {
                (0..f).find(|&j| d.raise(j).is_bijective()).map(|j| Reduction::Mirror { j })
            });
        if let Some(red) = red {
            match red {
                Reduction::Standard { j } => {
                    transcript.push(format!("removed index {j}: invertible lowering map"));
                }
                Reduction::Mirror { j } => {
                    transcript.push(format!("mirror reduction at index {j}"));
                }
            }
            let smaller = reduce_at(d, red);
            let (reduced, deg) = solve_inner(&smaller, cfg, budget, transcript)?;
            return Ok((map_back(d, red, &reduced), deg));
        }
    }
    if f == 1 {
        let (line, deg) = single_space_line(d.raise(0), d.lower(0), &d.tower, cfg, transcript)?;
        return Ok((vec![line], deg));
    }
    // circuit eigenline route
    let circuit = d.circuit();
    let r = circuit.mat.rank();
    if r > 0 && circuit.compose(&circuit).mat.rank() == r {
        let (_, pivots) = circuit.mat.rref();
        let image = Mat::from_fn(d.dim, r, |i, j| circuit.mat.at(i, pivots[j]).clone());
        let restricted = Mat::from_fn(r, r, |i, j| {
            let img = circuit.apply(&image.col(j));
            image.solve(&img).expect("circuit preserves its image")[i].clone()
        });
        match semilinear_eigenline(&Semilinear::new(restricted, circuit.twist), &d.tower, cfg) {
            Ok((w, deg)) => {
                transcript.push(format!("circuit eigenline at residue degree {deg}"));
                let mut lines = vec![normalize_line(&image.mul_vec(&w))];
                for i in 1..f {
                    let v = d.raise(i).apply(&lines[i - 1]);
                    lines.push(normalize_line(&v));
                }
                return Ok((lines, deg));
            }
            Err(IncidenceError::ExtensionExhausted(cap)) => {
                transcript.push(format!(
                    "circuit eigenline unavailable within residue degree {cap}; falling back"
                ));
            }
            Err(e) => return Err(e),
        }
    }
    // exhaustive tuple search, one residue degree at a time
    let m = d.tower.m();
    let cap = cfg.m_max.max(m);
    let mut mdeg = m;
    while mdeg <= cap {
        let ext = d.tower.grown(mdeg)?;
        if let Some(lines) = search_tuples(d, &ext, budget)? {
            transcript.push(format!("exhaustive tuple search at residue degree {mdeg}"));
            return Ok((lines, mdeg));
        }
        mdeg += m;
    }
    Err(IncidenceError::ExtensionExhausted(cap))
}

fn search_tuples(
    d: &CircularDiagram,
    ext: &FieldTower,
    budget: &mut Budget,
) -> Result<Option<Vec<Vec<FieldElem>>>, IncidenceError> {
    let mut acc: Vec<Vec<FieldElem>> = Vec::with_capacity(d.len());
    for l0 in enumerate_lines(d.dim, ext)? {
        if !budget.spend() {
            return Err(IncidenceError::Budget("tuple search".into()));
        }
        acc.push(l0);
        if extend_tuple(d, ext, &mut acc, budget)? {
            return Ok(Some(acc));
        }
        acc.pop();
    }
    Ok(None)
}

fn extend_tuple(
    d: &CircularDiagram,
    ext: &FieldTower,
    acc: &mut Vec<Vec<FieldElem>>,
    budget: &mut Budget,
) -> Result<bool, IncidenceError> {
    let f = d.len();
    let i = acc.len();
    if i == f {
        // close the circle at index 0
        return Ok(in_span(&d.raise(0).apply(&acc[f - 1]), &acc[0])
            && in_span(&d.lower(0).apply(&acc[0]), &acc[f - 1]));
    }
    let prev = acc[i - 1].clone();
    let u = d.raise(i).apply(&prev);
    if u.iter().any(|c| !c.is_zero()) {
        // the raising map forces the next line outright
        let l = normalize_line(&u);
        if !in_span(&d.lower(i).apply(&l), &prev) {
            return Ok(false);
        }
        acc.push(l);
        if extend_tuple(d, ext, acc, budget)? {
            return Ok(true);
        }
        acc.pop();
        return Ok(false);
    }
    // raising image is zero: any line whose lowering image falls in the
    // previous line is admissible
    let psi = d.lower(i);
    let stacked = Mat::from_fn(d.dim, d.dim + 1, |a, b| {
        if b < d.dim {
            psi.mat.at(a, b).clone()
        } else {
            prev[a].sigma(psi.twist).neg()
        }
    });
    let candidates: Vec<Vec<FieldElem>> = stacked
        .kernel_basis()
        .into_iter()
        .filter_map(|kv| {
            let w: Vec<FieldElem> =
                kv[..d.dim].iter().map(|c| c.sigma(-psi.twist)).collect();
            w.iter().any(|c| !c.is_zero()).then_some(w)
        })
        .collect();
    if candidates.is_empty() {
        return Ok(false);
    }
    for l in subspace_lines(&candidates, ext)? {
        if !budget.spend() {
            return Err(IncidenceError::Budget("tuple search".into()));
        }
        acc.push(l);
        if extend_tuple(d, ext, acc, budget)? {
            return Ok(true);
        }
        acc.pop();
    }
    Ok(false)
}

/// All normalized lines of the span, in leading-coordinate order.
fn subspace_lines(
    basis: &[Vec<FieldElem>],
    ext: &FieldTower,
) -> Result<Vec<Vec<FieldElem>>, IncidenceError> {
    let dim = basis[0].len();
    let q = ext.size().expect("field fits in u64") as u128;
    let total = q
        .checked_pow(basis.len() as u32)
        .filter(|&t| t <= 1 << 20)
        .ok_or_else(|| IncidenceError::Budget("subspace enumeration too large".into()))?;
    let mut out: Vec<Vec<FieldElem>> = Vec::new();
    for idx in 1..total {
        let mut rem = idx;
        let mut v = vec![FieldElem::zero(ext); dim];
        for b in basis {
            let c = FieldElem::from_index(ext, (rem % q) as u64);
            rem /= q;
            if !c.is_zero() {
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi = vi.add(&bi.mul(&c));
                }
            }
        }
        if v.iter().any(|x| !x.is_zero()) {
            out.push(normalize_line(&v));
        }
    }
    out.sort_by(|a, b| line_cmp(a, b));
    out.dedup();
    Ok(out)
}
