//! Probability vectors, the restricted domain and the adjacency relations
//! used by the privacy guarantees.
//!
//! Indices are 0-based throughout the library. The restricted index set
//! `W` may not contain the last coordinate `n - 1`; that coordinate always
//! absorbs the remaining mass.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance applied to every membership and equality check.
pub const TOLERANCE: f64 = 1e-12;

/// A point of the unit simplex: non-negative entries summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SimplexVector(Vec<f64>);

impl SimplexVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::InvalidVector(format!(
                "dimension must be at least 2, got {}",
                entries.len()
            )));
        }
        if let Some((i, v)) = entries
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidVector(format!("entry {i} is {v}")));
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > TOLERANCE {
            return Err(Error::InvalidVector(format!("entries sum to {sum}")));
        }
        Ok(SimplexVector(entries))
    }

    /// Wraps entries produced by an internal normalization; the caller
    /// guarantees the invariants.
    pub(crate) fn from_normalized(entries: Vec<f64>) -> Self {
        debug_assert!(entries.len() >= 2);
        debug_assert!(((entries.iter().sum::<f64>()) - 1.0).abs() <= TOLERANCE);
        SimplexVector(entries)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Every entry strictly positive.
    pub fn is_interior(&self) -> bool {
        self.0.iter().all(|&v| v > 0.0)
    }

    pub fn l1_distance(&self, other: &SimplexVector) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .sum())
    }

    /// The uniform vector (1/n, ..., 1/n).
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidVector(format!("dimension must be at least 2, got {n}")));
        }
        Ok(SimplexVector(vec![1.0 / n as f64; n]))
    }
}

impl TryFrom<Vec<f64>> for SimplexVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        SimplexVector::new(v)
    }
}

impl From<SimplexVector> for Vec<f64> {
    fn from(v: SimplexVector) -> Self {
        v.0
    }
}

impl std::ops::Index<usize> for SimplexVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// The restricted domain: interior vectors whose `W` entries are at least
/// `eta` and sum to at most `1 - eta_bar`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DomainSpecFields")]
pub struct DomainSpec {
    n: usize,
    w: Vec<usize>,
    eta: f64,
    eta_bar: f64,
}

#[derive(Deserialize)]
struct DomainSpecFields {
    n: usize,
    w: Vec<usize>,
    eta: f64,
    eta_bar: f64,
}

impl TryFrom<DomainSpecFields> for DomainSpec {
    type Error = Error;

    fn try_from(f: DomainSpecFields) -> Result<Self> {
        DomainSpec::new(f.n, f.w, f.eta, f.eta_bar)
    }
}

impl DomainSpec {
    /// `w` is sorted on construction; duplicates and the last coordinate
    /// are rejected. A domain with `|W| eta = 1 - eta_bar` is accepted and
    /// consists of a single projected point.
    pub fn new(n: usize, mut w: Vec<usize>, eta: f64, eta_bar: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InfeasibleDomain(format!("dimension n = {n} must be at least 2")));
        }
        if w.is_empty() {
            return Err(Error::InfeasibleDomain("index set W is empty".into()));
        }
        w.sort_unstable();
        if w.windows(2).any(|p| p[0] == p[1]) {
            return Err(Error::InfeasibleDomain("index set W has duplicate entries".into()));
        }
        if let Some(&max) = w.last() {
            if max > n - 2 {
                return Err(Error::InfeasibleDomain(format!(
                    "index {max} is not allowed in W for n = {n} (the last coordinate is excluded)"
                )));
            }
        }
        for (name, v) in [("eta", eta), ("eta_bar", eta_bar)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InfeasibleDomain(format!("{name} = {v} must lie in (0, 1)")));
            }
        }
        let need = w.len() as f64 * eta;
        if need > 1.0 - eta_bar + TOLERANCE {
            return Err(Error::InfeasibleDomain(format!(
                "|W| * eta = {need} exceeds 1 - eta_bar = {}",
                1.0 - eta_bar
            )));
        }
        Ok(DomainSpec { n, w, eta, eta_bar })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn w(&self) -> &[usize] {
        &self.w
    }

    pub fn w_size(&self) -> usize {
        self.w.len()
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn eta_bar(&self) -> f64 {
        self.eta_bar
    }

    /// Slack `1 - eta_bar - |W| eta`; zero for a one-point domain.
    pub fn slack(&self) -> f64 {
        (1.0 - self.eta_bar - self.w.len() as f64 * self.eta).max(0.0)
    }

    pub fn is_degenerate(&self) -> bool {
        self.slack() <= TOLERANCE
    }

    pub fn contains_index(&self, i: usize) -> bool {
        self.w.binary_search(&i).is_ok()
    }

    /// `p` restricted to `W`, with `1 - sum` appended.
    pub fn project(&self, p: &SimplexVector) -> Result<Vec<f64>> {
        check_dim(self.n, p.dim())?;
        let mut out: Vec<f64> = self.w.iter().map(|&i| p[i]).collect();
        let rest = 1.0 - out.iter().sum::<f64>();
        out.push(rest);
        Ok(out)
    }

    /// Lifts a projected point to a full vector, spreading the remaining
    /// mass evenly over the coordinates outside `W`.
    pub fn lift(&self, y: &[f64]) -> Result<SimplexVector> {
        check_dim(self.w.len(), y.len())?;
        let rest = 1.0 - y.iter().sum::<f64>();
        let outside = self.n - self.w.len();
        let mut entries = vec![rest / outside as f64; self.n];
        for (&i, &v) in self.w.iter().zip(y) {
            entries[i] = v;
        }
        SimplexVector::new(entries)
    }

    /// Draws a point uniformly from the projected domain polytope.
    pub fn sample_projected<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let m = self.w.len();
        let e: Vec<f64> = (0..=m).map(|_| Exp1.sample(rng)).collect();
        let total: f64 = e.iter().sum();
        let slack = self.slack();
        e[..m].iter().map(|v| self.eta + slack * v / total).collect()
    }
}

/// Adjacency radius `b` in (0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct AdjacencyParams {
    b: f64,
}

impl AdjacencyParams {
    pub fn new(b: f64) -> Result<Self> {
        if b > 0.0 && b <= 1.0 {
            Ok(AdjacencyParams { b })
        } else {
            Err(Error::param("b", format!("must lie in (0, 1], got {b}")))
        }
    }

    pub fn b(&self) -> f64 {
        self.b
    }
}

impl TryFrom<f64> for AdjacencyParams {
    type Error = Error;

    fn try_from(b: f64) -> Result<Self> {
        AdjacencyParams::new(b)
    }
}

impl From<AdjacencyParams> for f64 {
    fn from(a: AdjacencyParams) -> f64 {
        a.b
    }
}

/// Whether `p` lies in the restricted domain described by `d`.
pub fn in_restricted_domain(p: &SimplexVector, d: &DomainSpec) -> Result<bool> {
    check_dim(d.n, p.dim())?;
    if !p.is_interior() {
        return Ok(false);
    }
    let mut sum = 0.0;
    for &i in &d.w {
        if p[i] < d.eta - TOLERANCE {
            return Ok(false);
        }
        sum += p[i];
    }
    Ok(sum <= 1.0 - d.eta_bar + TOLERANCE)
}

fn require_in_domain(p: &SimplexVector, d: &DomainSpec, what: &str) -> Result<()> {
    if in_restricted_domain(p, d)? {
        Ok(())
    } else {
        Err(Error::OutsideDomain(format!("{what} = {:?}", p.entries())))
    }
}

/// Indices where `p` and `q` differ by more than [`TOLERANCE`].
pub fn differing_indices(p: &SimplexVector, q: &SimplexVector) -> Result<Vec<usize>> {
    check_dim(p.dim(), q.dim())?;
    Ok((0..p.dim())
        .filter(|&i| (p[i] - q[i]).abs() > TOLERANCE)
        .collect())
}

/// b-adjacency of two vectors of the restricted domain. Equal vectors are
/// adjacent.
pub fn are_b_adjacent(
    p: &SimplexVector,
    q: &SimplexVector,
    d: &DomainSpec,
    a: &AdjacencyParams,
) -> Result<bool> {
    require_in_domain(p, d, "p")?;
    require_in_domain(q, d, "q")?;
    let diff = differing_indices(p, q)?;
    if diff.is_empty() {
        return Ok(true);
    }
    if diff.len() > 2 || d.w.len() < 2 || !diff.iter().all(|&i| d.contains_index(i)) {
        return Ok(false);
    }
    Ok(p.l1_distance(q)? <= a.b + TOLERANCE)
}

/// Moves `shift` of mass from coordinate `j` to coordinate `i`.
pub fn make_adjacent(
    p: &SimplexVector,
    d: &DomainSpec,
    a: &AdjacencyParams,
    i: usize,
    j: usize,
    shift: f64,
) -> Result<SimplexVector> {
    check_dim(d.n, p.dim())?;
    if i == j || !d.contains_index(i) || !d.contains_index(j) {
        return Err(Error::NotAdjacent(format!(
            "indices ({i}, {j}) must be two distinct members of W = {:?}",
            d.w
        )));
    }
    if !shift.is_finite() || shift.abs() > a.b / 2.0 + TOLERANCE {
        return Err(Error::NotAdjacent(format!(
            "|shift| = {} exceeds b / 2 = {}",
            shift.abs(),
            a.b / 2.0
        )));
    }
    let mut entries = p.entries().to_vec();
    entries[i] += shift;
    entries[j] -= shift;
    let q = SimplexVector::new(entries)
        .map_err(|e| Error::OutsideDomain(format!("shifted vector is not a simplex vector: {e}")))?;
    require_in_domain(&q, d, "shifted vector")?;
    Ok(q)
}

/// An ordered list of simplex vectors of equal dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Collection {
    members: Vec<SimplexVector>,
}

impl Collection {
    pub fn new(members: Vec<SimplexVector>) -> Result<Self> {
        let first = members.first().ok_or(Error::EmptyCollection)?;
        let n = first.dim();
        for m in &members {
            check_dim(n, m.dim())?;
        }
        Ok(Collection { members })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    pub fn members(&self) -> &[SimplexVector] {
        &self.members
    }

    /// Checks that every member lies in the restricted domain.
    pub fn check_domain(&self, d: &DomainSpec) -> Result<()> {
        for (idx, m) in self.members.iter().enumerate() {
            if !in_restricted_domain(m, d)? {
                return Err(Error::OutsideDomain(format!("collection member {idx}")));
            }
        }
        Ok(())
    }

    /// Replaces one member, keeping the others.
    pub fn with_member(&self, index: usize, member: SimplexVector) -> Result<Self> {
        check_dim(self.dim(), member.dim())?;
        if index >= self.members.len() {
            return Err(Error::param(
                "index",
                format!("{index} out of range for {} members", self.members.len()),
            ));
        }
        let mut members = self.members.clone();
        members[index] = member;
        Ok(Collection { members })
    }
}

/// Entrywise mean of the collection.
pub fn average(c: &Collection) -> SimplexVector {
    let n = c.dim();
    let count = c.len() as f64;
    let mut acc = vec![0.0; n];
    for m in &c.members {
        for (a, v) in acc.iter_mut().zip(m.entries()) {
            *a += v;
        }
    }
    for a in &mut acc {
        *a /= count;
    }
    SimplexVector::from_normalized(acc)
}

/// Location of the single differing member of two adjacent collections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectionDifference {
    pub member: usize,
    pub indices: (usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollectionAdjacency {
    Identical,
    Adjacent(CollectionDifference),
    NotAdjacent,
}

/// Adjacency of collections: all members equal but one, which differs in
/// two entries by at most `b` in 1-norm. The two entries are not restricted
/// to `W`.
pub fn collection_adjacency(
    p: &Collection,
    q: &Collection,
    a: &AdjacencyParams,
) -> Result<CollectionAdjacency> {
    check_dim(p.len(), q.len())?;
    check_dim(p.dim(), q.dim())?;
    let mut found = None;
    for (idx, (pm, qm)) in p.members.iter().zip(&q.members).enumerate() {
        let diff = differing_indices(pm, qm)?;
        if diff.is_empty() {
            continue;
        }
        if found.is_some() || diff.len() != 2 || pm.l1_distance(qm)? > a.b + TOLERANCE {
            return Ok(CollectionAdjacency::NotAdjacent);
        }
        found = Some(CollectionDifference {
            member: idx,
            indices: (diff[0], diff[1]),
        });
    }
    Ok(found.map_or(CollectionAdjacency::Identical, CollectionAdjacency::Adjacent))
}

/// Vertices of the projected restricted domain
/// `{y : y_i >= eta, sum y <= 1 - eta_bar}` in `|W|` dimensions.
///
/// This is the point with all coordinates at `eta`, plus one point per
/// coordinate where that coordinate takes all of the slack. A one-point
/// domain yields a single vertex.
pub fn restricted_vertices(d: &DomainSpec) -> Vec<Vec<f64>> {
    let m = d.w.len();
    let base = vec![d.eta; m];
    if d.is_degenerate() {
        return vec![base];
    }
    let top = 1.0 - d.eta_bar - (m as f64 - 1.0) * d.eta;
    let mut out = vec![base.clone()];
    for i in 0..m {
        let mut v = base.clone();
        v[i] = top;
        out.push(v);
    }
    out
}

/// Appends `1 - sum(y)` to a projected point.
pub fn with_remainder(y: &[f64]) -> Vec<f64> {
    let mut v = y.to_vec();
    v.push(1.0 - y.iter().sum::<f64>());
    v
}
