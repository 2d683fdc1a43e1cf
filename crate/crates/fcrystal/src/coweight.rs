//! Coweights for GL_n: rational vectors up to reordering, with the dominance
//! partial order. Newton vectors (slopes) and Hodge vectors (elementary
//! divisor exponents) both live here.

use crate::Rat;
use num_traits::{Signed, Zero};
use std::cmp::Ordering;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoweightError {
    #[error("coweights have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("expected an integral coweight, found {0}")]
    NotIntegral(String),
    #[error("malformed rational '{0}'")]
    BadRational(String),
    #[error("expected {0} ≤ {1} in dominance order")]
    NotDominated(String, String),
    #[error("entries of {0} do not pair to a constant sum")]
    NotSymmetric(String),
}

/// A rational coweight (μ_1, …, μ_n).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Coweight(Vec<Rat>);

impl std::fmt::Debug for Coweight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", x)?;
        }
        write!(f, ")")
    }
}

impl std::fmt::Display for Coweight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}", self)
    }
}

impl Coweight {
    pub fn new(entries: Vec<Rat>) -> Self {
        Coweight(entries)
    }

    pub fn from_ints(entries: &[i64]) -> Self {
        Coweight(entries.iter().map(|&x| Rat::from_integer(x)).collect())
    }

    /// Parse entries like "3", "-1", "2/3".
    pub fn parse(parts: &[&str]) -> Result<Self, CoweightError> {
        let mut v = Vec::with_capacity(parts.len());
        for s in parts {
            v.push(Rat::from_str(s.trim()).map_err(|_| CoweightError::BadRational(s.to_string()))?);
        }
        Ok(Coweight(v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[Rat] {
        &self.0
    }

    pub fn entry(&self, i: usize) -> Rat {
        self.0[i]
    }

    /// Sum of all entries.
    pub fn total(&self) -> Rat {
        self.0.iter().sum()
    }

    pub fn partial_sums(&self) -> Vec<Rat> {
        let mut acc = Rat::zero();
        self.0
            .iter()
            .map(|x| {
                acc += x;
                acc
            })
            .collect()
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|x| x.is_integer())
    }

    pub fn as_ints(&self) -> Result<Vec<i64>, CoweightError> {
        if !self.is_integral() {
            return Err(CoweightError::NotIntegral(format!("{:?}", self)));
        }
        Ok(self.0.iter().map(|x| x.to_integer()).collect())
    }

    pub fn is_dominant(&self) -> bool {
        self.0.windows(2).all(|w| w[0] >= w[1])
    }

    /// Entries sorted into weakly decreasing order.
    pub fn dominant(&self) -> Self {
        let mut v = self.0.clone();
        v.sort_by(|a, b| b.cmp(a));
        Coweight(v)
    }

    /// Dominance order on coweights with equal total: self ≥ other iff every
    /// prefix sum of the dominant rearrangement is at least as large.
    pub fn dominates(&self, other: &Self) -> Result<bool, CoweightError> {
        if self.len() != other.len() {
            return Err(CoweightError::LengthMismatch(self.len(), other.len()));
        }
        if self.total() != other.total() {
            return Ok(false);
        }
        let a = self.dominant().partial_sums();
        let b = other.dominant().partial_sums();
        Ok(a.iter().zip(&b).all(|(x, y)| x >= y))
    }

    /// The least integral dominant coweight ≥ self in dominance order.
    /// Requires an integral total.
    ///
    /// The prefix sums of the answer form the least concave integral majorant
    /// of our own prefix sums. Pointwise ceilings alone are not concave when
    /// an intermediate sum is already an integer, so we iterate: ceil, take
    /// the concave upper hull, ceil again, until stable. Each pass only moves
    /// values up and any valid majorant stays above every pass, so the
    /// fixpoint is both concave and minimal.
    pub fn minimal_dominant_above(&self) -> Result<Self, CoweightError> {
        let total = self.total();
        if !total.is_integer() {
            return Err(CoweightError::NotIntegral(format!("total {}", total)));
        }
        let n = self.len();
        let s = self.dominant().partial_sums();
        let mut t: Vec<i64> = s.iter().map(|x| x.ceil().to_integer()).collect();
        t[n - 1] = total.to_integer();
        loop {
            let next = ceil_of_upper_hull(&t);
            if next == t {
                break;
            }
            t = next;
        }
        let mut out = Vec::with_capacity(n);
        let mut prev = 0i64;
        for &tk in &t {
            out.push(Rat::from_integer(tk - prev));
            prev = tk;
        }
        let mu = Coweight(out);
        debug_assert!(mu.is_dominant());
        debug_assert!(mu.dominates(self).unwrap());
        Ok(mu)
    }

    /// The minuscule coweight (1^r, 0^{n-r}).
    pub fn omega(n: usize, r: usize) -> Self {
        assert!(r <= n);
        let mut v = vec![Rat::from_integer(1); r];
        v.resize(n, Rat::zero());
        Coweight(v)
    }

    /// Dominant with all entries within distance 1 of each other.
    pub fn is_minuscule(&self) -> bool {
        if !self.is_dominant() || self.is_empty() {
            return self.is_dominant();
        }
        self.0[0] - self.0[self.len() - 1] <= Rat::from_integer(1)
    }

    /// Entries in [0, 1] with total r — equivalently, below (1^r, 0^{n-r})
    /// in dominance order.
    pub fn is_minuscule_of_weight(&self, r: i64) -> bool {
        self.0
            .iter()
            .all(|x| Rat::zero() <= *x && *x <= Rat::from_integer(1))
            && self.total() == Rat::from_integer(r)
    }

    pub fn add(&self, other: &Self) -> Result<Self, CoweightError> {
        if self.len() != other.len() {
            return Err(CoweightError::LengthMismatch(self.len(), other.len()));
        }
        Ok(Coweight(
            self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, CoweightError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Coweight(self.0.iter().map(|x| -x).collect())
    }

    pub fn reversed(&self) -> Self {
        let mut v = self.0.clone();
        v.reverse();
        Coweight(v)
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Coweight(v)
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Coweight(self.0[range].to_vec())
    }

    /// Runs of equal entries in the dominant rearrangement, as (value, count),
    /// largest value first.
    pub fn isotypic_blocks(&self) -> Vec<(Rat, usize)> {
        let d = self.dominant();
        let mut out: Vec<(Rat, usize)> = Vec::new();
        for &x in &d.0 {
            match out.last_mut() {
                Some((v, c)) if *v == x => *c += 1,
                _ => out.push((x, 1)),
            }
        }
        out
    }

    /// Common denominator of the entries.
    pub fn denominator(&self) -> i64 {
        self.0
            .iter()
            .fold(1i64, |acc, x| num_integer::lcm(acc, *x.denom()))
    }

    /// For even length 2n: the common value λ_i + λ_{2n+1-i}, if constant.
    pub fn pair_sum(&self) -> Option<Rat> {
        let n = self.len();
        if n == 0 || n % 2 != 0 {
            return None;
        }
        let s = self.0[0] + self.0[n - 1];
        for i in 0..n / 2 {
            if self.0[i] + self.0[n - 1 - i] != s {
                return None;
            }
        }
        Some(s)
    }

    pub fn max_abs(&self) -> Rat {
        self.0
            .iter()
            .map(|x| x.abs())
            .max()
            .unwrap_or_else(Rat::zero)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.0
                .iter()
                .map(|x| serde_json::Value::String(x.to_string()))
                .collect(),
        )
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, CoweightError> {
        let arr = v
            .as_array()
            .ok_or_else(|| CoweightError::BadRational(v.to_string()))?;
        let mut out = Vec::with_capacity(arr.len());
        for x in arr {
            let r = match x {
                serde_json::Value::String(s) => {
                    Rat::from_str(s).map_err(|_| CoweightError::BadRational(s.clone()))?
                }
                serde_json::Value::Number(n) => {
                    let i = n
                        .as_i64()
                        .ok_or_else(|| CoweightError::BadRational(n.to_string()))?;
                    Rat::from_integer(i)
                }
                other => return Err(CoweightError::BadRational(other.to_string())),
            };
            out.push(r);
        }
        Ok(Coweight(out))
    }
}

impl PartialOrd for Coweight {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic order, used only for deterministic container iteration — the
/// mathematical order is `dominates`.
impl Ord for Coweight {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

/// Pointwise ceiling of the concave upper hull of (0, 0), (1, t_1), …,
/// (n, t_n). Values only move up, never past any concave majorant.
fn ceil_of_upper_hull(t: &[i64]) -> Vec<i64> {
    let mut hull: Vec<(i64, i64)> = vec![(0, 0)];
    for (k, &y) in t.iter().enumerate() {
        let p = ((k + 1) as i64, y);
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b.0 - a.0) as i128 * (p.1 - a.1) as i128
                - (b.1 - a.1) as i128 * (p.0 - a.0) as i128;
            if cross >= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut out = Vec::with_capacity(t.len());
    let mut seg = 0usize;
    for k in 1..=t.len() as i64 {
        while hull[seg + 1].0 < k {
            seg += 1;
        }
        let (x0, y0) = hull[seg];
        let (x1, y1) = hull[seg + 1];
        out.push(y0 + num_integer::Integer::div_ceil(&((k - x0) * (y1 - y0)), &(x1 - x0)));
    }
    out
}

/// Ordered positive block sizes (m_1, …, m_r) cutting index range 0..n into
/// consecutive pieces.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LeviPartition(Vec<usize>);

impl LeviPartition {
    pub fn new(parts: Vec<usize>) -> Self {
        assert!(
            !parts.is_empty() && parts.iter().all(|&m| m > 0),
            "block sizes must be positive"
        );
        LeviPartition(parts)
    }

    /// The single-block partition (n).
    pub fn full(n: usize) -> Self {
        LeviPartition::new(vec![n])
    }

    /// Coarsest partition on which the dominant form of `x` is constant.
    pub fn isotypic(x: &Coweight) -> Self {
        LeviPartition::new(x.isotypic_blocks().into_iter().map(|(_, m)| m).collect())
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn blocks(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    /// Consecutive index ranges of the blocks.
    pub fn ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut start = 0;
        for &m in &self.0 {
            out.push(start..start + m);
            start += m;
        }
        out
    }

    /// Interior block boundaries m_1, m_1+m_2, …, excluding the total.
    pub fn boundaries(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut acc = 0;
        for &m in &self.0[..self.0.len() - 1] {
            acc += m;
            out.push(acc);
        }
        out
    }

    /// Palindromic sizes, as needed for blocks preserved by a symplectic form.
    pub fn is_symmetric(&self) -> bool {
        let r = self.0.len();
        (0..r / 2).all(|i| self.0[i] == self.0[r - 1 - i])
    }
}

/// Per-block integer sums (s_1, …, s_r) of a coweight along a partition.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KappaValue(Vec<i64>);

impl KappaValue {
    pub fn new(values: Vec<i64>) -> Self {
        KappaValue(values)
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }
}

/// Block sums of `x` along `p`, in the order given (no dominant sorting:
/// the value distinguishes orbit members).
pub fn kappa_levi(x: &Coweight, p: &LeviPartition) -> Result<KappaValue, CoweightError> {
    if x.len() != p.total() {
        return Err(CoweightError::LengthMismatch(x.len(), p.total()));
    }
    let mut out = Vec::with_capacity(p.blocks());
    for range in p.ranges() {
        let s: Rat = x.entries()[range].iter().sum();
        if !s.is_integer() {
            return Err(CoweightError::NotIntegral(format!("block sum {}", s)));
        }
        out.push(s.to_integer());
    }
    Ok(KappaValue(out))
}

/// The least dominant integral coweight above `nu` in dominance order, built
/// per block: a slope λ on a block of size m (with mλ ∈ Z) rounds to
/// ⌈λ⌉ repeated mλ − m⌊λ⌋ times followed by ⌊λ⌋, then the blocks are sorted
/// together.
pub fn minimal_dominant_above_wrt(
    nu: &Coweight,
    p: &LeviPartition,
) -> Result<Coweight, CoweightError> {
    if nu.len() != p.total() {
        return Err(CoweightError::LengthMismatch(nu.len(), p.total()));
    }
    let d = nu.dominant();
    let mut out: Vec<Rat> = Vec::with_capacity(nu.len());
    for range in p.ranges() {
        let block = &d.entries()[range];
        let v = block[0];
        if block.iter().any(|x| *x != v) {
            return Err(CoweightError::NotIntegral(format!(
                "slope not constant on a block of {:?}",
                d
            )));
        }
        let m = block.len() as i64;
        let total = v * Rat::from_integer(m);
        if !total.is_integer() {
            return Err(CoweightError::NotIntegral(format!(
                "block degree {} of a slope vector",
                total
            )));
        }
        let fl = v.floor().to_integer();
        let hi_count = total.to_integer() - m * fl;
        for i in 0..m {
            out.push(Rat::from_integer(if i < hi_count { fl + 1 } else { fl }));
        }
    }
    let mu = Coweight::new(out).dominant();
    debug_assert!(mu.dominates(nu).unwrap());
    Ok(mu)
}

/// Whether the prefix sums of `mu` and `nu` agree at every interior block
/// boundary of `p` — the condition for a witness to split along the blocks.
pub fn decomposable_wrt(
    mu: &Coweight,
    nu: &Coweight,
    p: &LeviPartition,
) -> Result<bool, CoweightError> {
    if !mu.dominates(nu)? {
        return Err(CoweightError::NotDominated(
            format!("{:?}", nu),
            format!("{:?}", mu),
        ));
    }
    let ms = mu.dominant().partial_sums();
    let ns = nu.dominant().partial_sums();
    Ok(p.boundaries().iter().all(|&k| ms[k - 1] == ns[k - 1]))
}

/// Coweight of even length whose entries pair to a constant sum
/// x_i + x_{2n-1-i} = d, the similitude defect.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GSpCoweight {
    inner: Coweight,
    defect: Rat,
}

impl GSpCoweight {
    pub fn new(cw: Coweight) -> Result<Self, CoweightError> {
        let defect = cw
            .dominant()
            .pair_sum()
            .ok_or_else(|| CoweightError::NotSymmetric(format!("{:?}", cw)))?;
        Ok(GSpCoweight { inner: cw, defect })
    }

    pub fn coweight(&self) -> &Coweight {
        &self.inner
    }

    pub fn defect(&self) -> Rat {
        self.defect
    }

    pub fn half_dim(&self) -> usize {
        self.inner.len() / 2
    }
}

/// All integral dominant coweights of length n with entries in [lo, hi],
/// optionally pinned to a given total, in lexicographically decreasing order.
pub fn integral_dominant_in_box(n: usize, lo: i64, hi: i64, total: Option<i64>) -> Vec<Coweight> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn rec(
        n: usize,
        lo: i64,
        hi: i64,
        total: Option<i64>,
        cur: &mut Vec<i64>,
        out: &mut Vec<Coweight>,
    ) {
        if cur.len() == n {
            if total.map_or(true, |t| cur.iter().sum::<i64>() == t) {
                out.push(Coweight::from_ints(cur));
            }
            return;
        }
        let cap = cur.last().copied().unwrap_or(hi).min(hi);
        let remaining = (n - cur.len()) as i64;
        for v in (lo..=cap).rev() {
            if let Some(t) = total {
                let sum: i64 = cur.iter().sum();
                // bounds on what the remaining entries can still contribute
                if sum + v + (remaining - 1) * lo > t || sum + v + (remaining - 1) * v < t {
                    continue;
                }
            }
            cur.push(v);
            rec(n, lo, hi, total, cur, out);
            cur.pop();
        }
    }
    rec(n, lo, hi, total, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cw(xs: &[(i64, i64)]) -> Coweight {
        Coweight::new(xs.iter().map(|&(n, d)| Rat::new(n, d)).collect())
    }

    #[test]
    fn dominance_basics() {
        let mu = Coweight::from_ints(&[1, 0]);
        let nu = cw(&[(1, 2), (1, 2)]);
        assert!(mu.dominates(&nu).unwrap());
        assert!(!nu.dominates(&mu).unwrap());
        assert!(mu.dominates(&mu).unwrap());
        // different totals are incomparable
        assert!(!mu.dominates(&Coweight::from_ints(&[2, 0])).unwrap());
    }

    #[test]
    fn minimal_cover_examples() {
        assert_eq!(
            cw(&[(1, 2), (1, 2)]).minimal_dominant_above().unwrap(),
            Coweight::from_ints(&[1, 0])
        );
        assert_eq!(
            cw(&[(2, 3), (2, 3), (2, 3)]).minimal_dominant_above().unwrap(),
            Coweight::from_ints(&[1, 1, 0])
        );
        assert_eq!(
            Coweight::from_ints(&[2, 1, 0]).minimal_dominant_above().unwrap(),
            Coweight::from_ints(&[2, 1, 0])
        );
        assert!(cw(&[(1, 2), (0, 1)]).minimal_dominant_above().is_err());
    }

    #[test]
    fn minuscule_and_omega() {
        assert!(Coweight::omega(4, 2).is_minuscule());
        assert_eq!(
            Coweight::omega(3, 1),
            Coweight::from_ints(&[1, 0, 0])
        );
        assert!(!Coweight::from_ints(&[2, 0]).is_minuscule());
        assert!(Coweight::from_ints(&[1, 1, 0]).is_minuscule());
    }

    #[test]
    fn blocks_and_pair_sum() {
        let nu = cw(&[(1, 2), (1, 2), (0, 1), (0, 1)]);
        assert_eq!(
            nu.isotypic_blocks(),
            vec![(Rat::new(1, 2), 2), (Rat::new(0, 1), 2)]
        );
        assert_eq!(nu.pair_sum(), Some(Rat::new(1, 2)));
        assert_eq!(Coweight::from_ints(&[2, 1, 1, 0]).pair_sum(), Some(Rat::from_integer(2)));
        assert_eq!(Coweight::from_ints(&[2, 1, 0, 0]).pair_sum(), None);
        assert_eq!(nu.denominator(), 2);
    }

    #[test]
    fn box_enumeration_counts() {
        let all = integral_dominant_in_box(2, -1, 1, None);
        // (1,1) (1,0) (1,-1) (0,0) (0,-1) (-1,-1)
        assert_eq!(all.len(), 6);
        assert!(all.iter().all(|c| c.is_dominant()));
        let pinned = integral_dominant_in_box(3, 0, 2, Some(3));
        // (2,1,0) (1,1,1)
        assert_eq!(pinned.len(), 2);
    }

    #[test]
    fn json_round_trip() {
        let nu = cw(&[(3, 2), (-1, 1)]);
        let j = nu.to_json();
        assert_eq!(j, serde_json::json!(["3/2", "-1"]));
        assert_eq!(Coweight::from_json(&j).unwrap(), nu);
        assert_eq!(
            Coweight::from_json(&serde_json::json!([1, "1/2"])).unwrap(),
            cw(&[(1, 1), (1, 2)])
        );
    }

    #[test]
    fn kappa_block_sums() {
        let p22 = LeviPartition::new(vec![2, 2]);
        assert_eq!(
            kappa_levi(&Coweight::from_ints(&[1, 0, 1, 0]), &p22).unwrap(),
            KappaValue::new(vec![1, 1])
        );
        assert_eq!(
            kappa_levi(&Coweight::from_ints(&[1, 1, 0, 0]), &p22).unwrap(),
            KappaValue::new(vec![2, 0])
        );
        assert_eq!(
            kappa_levi(&Coweight::omega(4, 3), &LeviPartition::full(4)).unwrap(),
            KappaValue::new(vec![3])
        );
        assert!(kappa_levi(&cw(&[(1, 2), (0, 1), (1, 2), (0, 1)]), &p22).is_err());
        assert!(kappa_levi(&Coweight::from_ints(&[1, 0]), &p22).is_err());
    }

    #[test]
    fn partitioned_minimal_cover_examples() {
        assert_eq!(
            minimal_dominant_above_wrt(&cw(&[(1, 2), (1, 2)]), &LeviPartition::full(2)).unwrap(),
            Coweight::from_ints(&[1, 0])
        );
        assert_eq!(
            minimal_dominant_above_wrt(
                &Coweight::from_ints(&[2, 1, 1]),
                &LeviPartition::new(vec![1, 2])
            )
            .unwrap(),
            Coweight::from_ints(&[2, 1, 1])
        );
        assert_eq!(
            minimal_dominant_above_wrt(
                &cw(&[(2, 3), (2, 3), (2, 3), (0, 1)]),
                &LeviPartition::new(vec![3, 1])
            )
            .unwrap(),
            Coweight::from_ints(&[1, 1, 0, 0])
        );
        // a finer partition can break block integrality
        assert!(minimal_dominant_above_wrt(
            &cw(&[(1, 2), (1, 2)]),
            &LeviPartition::new(vec![1, 1])
        )
        .is_err());
    }

    #[test]
    fn decomposability_at_block_boundaries() {
        let nu = cw(&[(1, 2), (1, 2), (0, 1)]);
        let p = LeviPartition::new(vec![2, 1]);
        assert!(decomposable_wrt(&Coweight::from_ints(&[1, 0, 0]), &nu, &p).unwrap());
        assert!(!decomposable_wrt(&Coweight::from_ints(&[1, 1, -1]), &nu, &p).unwrap());
        let mu = Coweight::from_ints(&[2, 1, 0]);
        assert!(decomposable_wrt(&mu, &mu, &LeviPartition::new(vec![1, 1, 1])).unwrap());
        assert_eq!(
            decomposable_wrt(&cw(&[(1, 3), (1, 3), (1, 3)]), &nu, &p),
            Err(CoweightError::NotDominated(
                "(1/2, 1/2, 0)".into(),
                "(1/3, 1/3, 1/3)".into()
            ))
        );
    }

    #[test]
    fn kappa_orbit_image_is_the_box_set() {
        // block sums of the permutations of (1^s, 0^{n-s}) fill exactly
        // {(s_1,…,s_r) : 0 ≤ s_i ≤ m_i, Σ s_i = s}
        for parts in [vec![2, 2], vec![3, 1], vec![1, 2, 1], vec![2, 3]] {
            let p = LeviPartition::new(parts);
            let n = p.total();
            for s in 0..=n {
                let mut image = std::collections::BTreeSet::new();
                for bits in 0u32..(1 << n) {
                    if bits.count_ones() as usize != s {
                        continue;
                    }
                    let x = Coweight::from_ints(
                        &(0..n).map(|i| ((bits >> i) & 1) as i64).collect::<Vec<_>>(),
                    );
                    image.insert(kappa_levi(&x, &p).unwrap());
                }
                let mut expected = std::collections::BTreeSet::new();
                fn fill(
                    parts: &[usize],
                    left: i64,
                    cur: &mut Vec<i64>,
                    out: &mut std::collections::BTreeSet<KappaValue>,
                ) {
                    if parts.is_empty() {
                        if left == 0 {
                            out.insert(KappaValue::new(cur.clone()));
                        }
                        return;
                    }
                    for v in 0..=(parts[0] as i64).min(left) {
                        cur.push(v);
                        fill(&parts[1..], left - v, cur, out);
                        cur.pop();
                    }
                }
                fill(p.parts(), s as i64, &mut Vec::new(), &mut expected);
                assert_eq!(image, expected, "partition {:?}, s = {}", p, s);
            }
        }
    }

    #[test]
    fn gsp_coweights_pair_to_the_defect() {
        let x = GSpCoweight::new(Coweight::from_ints(&[2, 1, 1, 0])).unwrap();
        assert_eq!(x.defect(), Rat::from_integer(2));
        assert_eq!(x.half_dim(), 2);
        assert!(GSpCoweight::new(Coweight::from_ints(&[2, 1, 0, 0])).is_err());
        assert!(GSpCoweight::new(Coweight::from_ints(&[1, 0, 0])).is_err());
        let nu = GSpCoweight::new(cw(&[(1, 2), (1, 2), (1, 2), (1, 2)])).unwrap();
        assert_eq!(nu.defect(), Rat::from_integer(1));
    }

    proptest! {
        #[test]
        fn weight_r_minuscule_matches_omega_dominance(
            vals in proptest::collection::vec((-2i64..=4, 1i64..4), 1..6),
            r in 0i64..5,
        ) {
            let nu = Coweight::new(vals.iter().map(|&(n, d)| Rat::new(n, d)).collect()).dominant();
            let n = nu.len();
            let by_box = nu.is_minuscule_of_weight(r);
            let by_dominance = r >= 0
                && (r as usize) <= n
                && Coweight::omega(n, r as usize).dominates(&nu).unwrap();
            prop_assert_eq!(by_box, by_dominance);
        }

        #[test]
        fn block_averages_sit_between(
            raw in proptest::collection::vec(-4i64..=4, 2..7),
            cuts in proptest::collection::vec(any::<bool>(), 6),
        ) {
            let mu = Coweight::from_ints(&raw).dominant();
            let n = mu.len();
            // random composition of n from the boolean cut pattern
            let mut parts = Vec::new();
            let mut run = 1usize;
            for i in 1..n {
                if cuts[i - 1] {
                    parts.push(run);
                    run = 1;
                } else {
                    run += 1;
                }
            }
            parts.push(run);
            let p = LeviPartition::new(parts);
            let nu = Coweight::new(
                p.ranges()
                    .into_iter()
                    .flat_map(|rg| {
                        let block = &mu.entries()[rg.clone()];
                        let avg: Rat = block.iter().sum::<Rat>() / Rat::from_integer(block.len() as i64);
                        vec![avg; block.len()]
                    })
                    .collect::<Vec<_>>(),
            );
            // averaging a dominant vector per block keeps dominance and sits below
            prop_assert!(nu.is_dominant());
            prop_assert!(mu.dominates(&nu).unwrap());
            prop_assert_eq!(kappa_levi(&nu, &p).unwrap(), kappa_levi(&mu, &p).unwrap());
            prop_assert!(decomposable_wrt(&mu, &nu, &p).unwrap());
            let cover = minimal_dominant_above_wrt(&nu, &p).unwrap();
            prop_assert!(mu.dominates(&cover).unwrap());
        }

        #[test]
        fn partitioned_cover_agrees_with_global_cover(
            sizes in proptest::collection::vec(1usize..4, 1..4),
            nums in proptest::collection::vec(-6i64..=6, 3),
        ) {
            // strictly decreasing Newton-like slopes with integral block degrees
            let mut blocks: Vec<(Rat, usize)> = Vec::new();
            for (i, &m) in sizes.iter().enumerate() {
                let v = Rat::new(nums[i % nums.len()] - 3 * i as i64, m as i64);
                blocks.push((v, m));
            }
            blocks.sort_by(|a, b| b.0.cmp(&a.0));
            blocks.dedup_by_key(|b| b.0);
            let nu = Coweight::new(
                blocks.iter().flat_map(|&(v, m)| vec![v; m]).collect::<Vec<_>>(),
            );
            let p = LeviPartition::isotypic(&nu);
            let a = minimal_dominant_above_wrt(&nu, &p).unwrap();
            let b = nu.minimal_dominant_above().unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn minimal_cover_is_minimal(vals in proptest::collection::vec((-6i64..6, 1i64..4), 1..5)) {
            let raw: Vec<Rat> = vals.iter().map(|&(n, d)| Rat::new(n, d)).collect();
            let total: Rat = raw.iter().sum();
            prop_assume!(total.is_integer());
            let nu = Coweight::new(raw);
            let mu = nu.minimal_dominant_above().unwrap();
            prop_assert!(mu.dominates(&nu).unwrap());
            // any integral dominant λ ≥ ν also dominates μ
            let n = nu.len();
            let bound = 8i64;
            for lam in integral_dominant_in_box(n, -bound, bound, Some(total.to_integer())) {
                if lam.dominates(&nu).unwrap() {
                    prop_assert!(lam.dominates(&mu).unwrap());
                }
            }
        }
    }
}
