//! Small covers: characteristic matrices over the two-element field, the
//! first two Stiefel-Whitney classes, and the spin (equivalently string)
//! test read off the degree-2 mod-2 cohomology.

use crate::charmat::CharMatrix;
use crate::error::{Error, Result};
use crate::harness::{Caps, SearchStats};
use crate::polytope::SimplePolytope;
use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::Instant;

/// Degree-2 classes are packed into a `u128`, so at most 15 free facets.
const MAX_FREE: usize = 15;

/// An `n x m` matrix over the two-element field. Row `k` is a bitmask with
/// column `j` at bit `j - 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mod2CharMatrix {
    n: usize,
    m: usize,
    rows: Vec<u64>,
    refined_at: Option<Vec<usize>>,
}

impl Mod2CharMatrix {
    pub fn new(rows: &[Vec<u8>]) -> Result<Self> {
        let m = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || m == 0 || m > 64 {
            return Err(Error::Shape(format!("need 1..=64 columns and at least one row, got {} rows of {m}", rows.len())));
        }
        let mut packed = Vec::with_capacity(rows.len());
        for r in rows {
            if r.len() != m {
                return Err(Error::Shape("ragged rows".into()));
            }
            if let Some(x) = r.iter().find(|&&x| x > 1) {
                return Err(Error::Shape(format!("entry {x} is not 0 or 1")));
            }
            packed.push(r.iter().enumerate().fold(0u64, |acc, (j, &x)| acc | (x as u64) << j));
        }
        Ok(Self { n: rows.len(), m, rows: packed, refined_at: None })
    }

    /// Reduction of an integral characteristic matrix.
    pub fn reduce(l: &CharMatrix) -> Self {
        let rows: Vec<Vec<u8>> =
            l.rows().iter().map(|r| r.iter().map(|x| x.rem_euclid(2) as u8).collect()).collect();
        Self::new(&rows).expect("integral matrix has a valid shape")
    }

    fn from_packed(n: usize, m: usize, rows: Vec<u64>) -> Self {
        Self { n, m, rows, refined_at: None }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn entry(&self, k: usize, j: usize) -> u8 {
        (self.rows[k - 1] >> (j - 1) & 1) as u8
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (1..=self.n).map(|k| (1..=self.m).map(|j| self.entry(k, j)).collect()).collect()
    }

    /// Column `j` as a bitmask with row `k` at bit `k - 1`.
    pub fn column(&self, j: usize) -> u64 {
        self.rows.iter().enumerate().fold(0, |acc, (k, r)| acc | (r >> (j - 1) & 1) << k)
    }

    pub fn refined_at(&self) -> Option<&[usize]> {
        self.refined_at.as_deref()
    }

    /// Permute columns: column `j` moves to position `perm[j - 1]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|r| (1..=self.m).fold(0u64, |acc, j| acc | (r >> (j - 1) & 1) << (perm[j - 1] - 1)))
            .collect();
        Self::from_packed(self.n, self.m, rows)
    }

    /// Add row `src` to row `dst` (both 1-based).
    pub fn add_row(&self, src: usize, dst: usize) -> Self {
        let mut rows = self.rows.clone();
        rows[dst - 1] ^= rows[src - 1];
        Self::from_packed(self.n, self.m, rows)
    }
}

fn rank(vectors: impl IntoIterator<Item = u64>) -> usize {
    let mut basis = [0u64; 64];
    let mut r = 0;
    for mut x in vectors {
        while x != 0 {
            let b = 63 - x.leading_zeros() as usize;
            if basis[b] == 0 {
                basis[b] = x;
                r += 1;
                break;
            }
            x ^= basis[b];
        }
    }
    r
}

fn check_shape(p: &SimplePolytope, l: &Mod2CharMatrix) -> Result<()> {
    if l.n != p.dim() || l.m != p.num_facets() {
        return Err(Error::Shape(format!(
            "matrix is {}x{} but the polytope has dimension {} and {} facets",
            l.n,
            l.m,
            p.dim(),
            p.num_facets()
        )));
    }
    Ok(())
}

/// First vertex whose columns are dependent, if any.
pub fn singular_vertex(p: &SimplePolytope, l: &Mod2CharMatrix) -> Result<Option<Vec<usize>>> {
    check_shape(p, l)?;
    Ok(p.vertices().iter().find(|v| rank(v.iter().map(|&f| l.column(f))) < l.n).cloned())
}

pub fn validate_mod2(p: &SimplePolytope, l: &Mod2CharMatrix) -> Result<bool> {
    Ok(singular_vertex(p, l)?.is_none())
}

/// Row-reduce so the columns at `v` form the identity, keeping facet order.
pub fn refine_mod2(p: &SimplePolytope, l: &Mod2CharMatrix, v: &[usize]) -> Result<Mod2CharMatrix> {
    check_shape(p, l)?;
    let mut v = v.to_vec();
    v.sort_unstable();
    if !p.is_vertex(&v) {
        return Err(Error::NotAVertex(v));
    }
    let mut rows = l.rows.clone();
    for (k, &f) in v.iter().enumerate() {
        let bit = 1u64 << (f - 1);
        let piv = (k..l.n)
            .find(|&r| rows[r] & bit != 0)
            .ok_or_else(|| Error::Singular { vertex: v.clone(), det: "0 mod 2".into() })?;
        rows.swap(k, piv);
        for r in 0..l.n {
            if r != k && rows[r] & bit != 0 {
                rows[r] ^= rows[k];
            }
        }
    }
    Ok(Mod2CharMatrix { n: l.n, m: l.m, rows, refined_at: Some(v) })
}

fn ensure_refined(p: &SimplePolytope, l: &Mod2CharMatrix) -> Result<Mod2CharMatrix> {
    if l.refined_at.is_some() {
        check_shape(p, l)?;
        return Ok(l.clone());
    }
    if let Some(v) = singular_vertex(p, l)? {
        return Err(Error::Singular { vertex: v, det: "0 mod 2".into() });
    }
    refine_mod2(p, l, &p.vertices()[0])
}

/// The degree-2 part of the mod-2 cohomology ring: monomials `v_a v_b`
/// (`a <= b`) in the free facets modulo the images of the nonface products.
#[derive(Clone, Debug)]
pub struct Mod2Presentation {
    pub free: Vec<usize>,
    /// Facet-label pairs, indexed like the bits of a class.
    pub generators: Vec<(usize, usize)>,
    pub relations: Vec<u128>,
    pub relation_rank: usize,
    pub h2: usize,
    /// Degree-1 class of each facet over the free facets (bit `a` is `free[a]`).
    linear: Vec<u64>,
    echelon: Vec<u128>,
}

impl Mod2Presentation {
    pub fn build(p: &SimplePolytope, l: &Mod2CharMatrix) -> Result<Self> {
        let l = ensure_refined(p, l)?;
        let v = l.refined_at.clone().expect("refined");
        let free: Vec<usize> = (1..=l.m).filter(|j| !v.contains(j)).collect();
        if free.len() > MAX_FREE {
            return Err(Error::Parameter(format!("{} free facets exceeds the supported {MAX_FREE}", free.len())));
        }
        let linear: Vec<u64> = (1..=l.m)
            .map(|f| match free.iter().position(|&x| x == f) {
                Some(a) => 1 << a,
                None => {
                    let k = v.iter().position(|&x| x == f).expect("refined vertex facet");
                    free.iter().enumerate().fold(0, |acc, (a, &g)| acc | (l.rows[k] >> (g - 1) & 1) << a)
                }
            })
            .collect();
        let generators: Vec<(usize, usize)> =
            (0..free.len()).flat_map(|a| (a..free.len()).map(move |b| (a, b))).map(|(a, b)| (free[a], free[b])).collect();
        let summary = p.face_summary();
        let relations: Vec<u128> = summary
            .nonface_pairs
            .iter()
            .map(|&(i, j)| product(free.len(), linear[i - 1], linear[j - 1]))
            .collect();
        let echelon = echelon(&relations);
        let relation_rank = echelon.iter().filter(|&&x| x != 0).count();
        let h2 = summary.h_vector.get(2).copied().unwrap_or(0);
        let pres = Self { free, generators, relations, relation_rank, h2: h2 as usize, linear, echelon };
        if pres.quotient_dim() as i64 != h2 {
            return Err(Error::Contradiction(format!(
                "degree-2 quotient has dimension {} but h2 = {h2}",
                pres.quotient_dim()
            )));
        }
        Ok(pres)
    }

    pub fn quotient_dim(&self) -> usize {
        self.generators.len() - self.relation_rank
    }

    /// `w1 = sum of all v_i`, as a bitmask over the free facets.
    pub fn w1(&self) -> u64 {
        self.linear.iter().fold(0, |acc, x| acc ^ x)
    }

    /// `w2 = sum over i < j of v_i v_j`, before reduction by the relations.
    pub fn w2(&self) -> u128 {
        let f = self.free.len();
        self.linear
            .iter()
            .tuple_combinations()
            .fold(0, |acc, (&x, &y)| acc ^ product(f, x, y))
    }

    pub fn is_zero(&self, mut x: u128) -> bool {
        for &r in &self.echelon {
            if r != 0 && x >> (127 - r.leading_zeros()) & 1 == 1 {
                x ^= r;
            }
        }
        x == 0
    }

    /// Generators carrying a nonzero coefficient in `x`.
    pub fn support(&self, x: u128) -> Vec<(usize, usize)> {
        (0..self.generators.len()).filter(|&i| x >> i & 1 == 1).map(|i| self.generators[i]).collect()
    }
}

/// Index of `v_a v_b` (`a <= b`) among the `f(f+1)/2` monomials.
fn monomial_index(f: usize, a: usize, b: usize) -> usize {
    a * f - a * a.saturating_sub(1) / 2 + (b - a)
}

fn product(f: usize, x: u64, y: u64) -> u128 {
    let mut out = 0u128;
    for a in (0..f).filter(|a| x >> a & 1 == 1) {
        for b in (0..f).filter(|b| y >> b & 1 == 1) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            out ^= 1 << monomial_index(f, lo, hi);
        }
    }
    out
}

/// Fully reduced row echelon form; each nonzero row owns its top bit.
fn echelon(rows: &[u128]) -> Vec<u128> {
    let mut basis = vec![0u128; 128];
    for &r in rows {
        let mut x = r;
        while x != 0 {
            let b = 127 - x.leading_zeros() as usize;
            if basis[b] == 0 {
                basis[b] = x;
                break;
            }
            x ^= basis[b];
        }
    }
    basis
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SmallCoverReport {
    pub valid: bool,
    pub orientable: bool,
    pub w2_zero: bool,
    /// Spin and string coincide for small covers.
    pub string: bool,
    pub h2: usize,
    pub quotient_dim: usize,
    /// Free facets carrying a nonzero `w1` coefficient.
    pub w1_support: Vec<usize>,
    /// Monomials of `w2` after reduction against the relations.
    pub w2_residue: Vec<(usize, usize)>,
}

pub fn report(p: &SimplePolytope, l: &Mod2CharMatrix) -> Result<SmallCoverReport> {
    let pres = Mod2Presentation::build(p, l)?;
    let w1 = pres.w1();
    let w2 = pres.w2();
    let w2_zero = pres.is_zero(w2);
    let mut residue = w2;
    for &r in &pres.echelon {
        if r != 0 && residue >> (127 - r.leading_zeros()) & 1 == 1 {
            residue ^= r;
        }
    }
    Ok(SmallCoverReport {
        valid: true,
        orientable: w1 == 0,
        w2_zero,
        string: w1 == 0 && w2_zero,
        h2: pres.h2,
        quotient_dim: pres.quotient_dim(),
        w1_support: (0..pres.free.len()).filter(|a| w1 >> a & 1 == 1).map(|a| pres.free[a]).collect(),
        w2_residue: pres.support(residue),
    })
}

pub fn is_orientable(p: &SimplePolytope, l: &Mod2CharMatrix) -> Result<bool> {
    let l = ensure_refined(p, l)?;
    let v = l.refined_at.as_deref().expect("refined");
    Ok((1..=l.m).filter(|j| !v.contains(j)).all(|j| l.column(j).count_ones() % 2 == 1))
}

pub fn is_string_smallcover(p: &SimplePolytope, l: &Mod2CharMatrix) -> Result<bool> {
    Ok(report(p, l)?.string)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Mod2Filter {
    Valid,
    Orientable,
    String,
}

#[derive(Clone, Debug)]
pub struct Mod2SearchResult {
    pub matrices: Vec<Mod2CharMatrix>,
    pub stats: SearchStats,
}

struct Mod2Plan {
    n: usize,
    m: usize,
    v0: Vec<usize>,
    free: Vec<usize>,
    checks: Vec<Vec<Vec<usize>>>,
    candidates: Vec<u64>,
}

impl Mod2Plan {
    fn ok_at(&self, t: usize, cols: &[u64]) -> bool {
        self.checks[t].iter().all(|v| rank(v.iter().map(|&f| cols[f - 1])) == self.n)
    }

    fn to_matrix(&self, cols: &[u64]) -> Mod2CharMatrix {
        let rows = (0..self.n).map(|k| cols.iter().enumerate().fold(0, |acc, (j, c)| acc | (c >> k & 1) << j)).collect();
        Mod2CharMatrix { n: self.n, m: self.m, rows, refined_at: Some(self.v0.clone()) }
    }
}

/// Every mod-2 characteristic matrix refined at the first vertex that passes
/// the filter. Over the two-element field refined forms are unique, so the
/// output lists each equivalence class under row operations exactly once.
pub fn enumerate_mod2(p: &SimplePolytope, filter: Mod2Filter, caps: Caps) -> Result<Mod2SearchResult> {
    let n = p.dim();
    let m = p.num_facets();
    if n > 20 {
        return Err(Error::Parameter(format!("dimension {n} is too large for exhaustive mod-2 search")));
    }
    let v0 = p.vertices()[0].clone();
    let free: Vec<usize> = (1..=m).filter(|j| !v0.contains(j)).collect();
    if free.is_empty() {
        return Err(Error::Parameter("polytope has no free facets".into()));
    }
    let mut checks = vec![Vec::new(); free.len()];
    for v in p.vertices() {
        if let Some(t) = v.iter().filter_map(|f| free.iter().position(|x| x == f)).max() {
            checks[t].push(v.clone());
        }
    }
    let candidates = (1u64..1 << n).filter(|c| filter == Mod2Filter::Valid || c.count_ones() % 2 == 1).collect();
    let plan = Mod2Plan { n, m, v0, free, checks, candidates };
    let nodes = AtomicU64::new(0);
    let pruned = AtomicU64::new(0);
    let stop = AtomicBool::new(false);
    let start = Instant::now();
    let tick = || {
        let k = nodes.fetch_add(1, Ordering::Relaxed) + 1;
        if k > caps.max_nodes || (k % 4096 == 0 && start.elapsed() > caps.max_time) {
            stop.store(true, Ordering::Relaxed);
        }
        !stop.load(Ordering::Relaxed)
    };

    fn dfs(plan: &Mod2Plan, t: usize, cols: &mut [u64], tick: &dyn Fn() -> bool, pruned: &AtomicU64, leaf: &mut dyn FnMut(&[u64])) {
        if t == plan.free.len() {
            leaf(cols);
            return;
        }
        let f = plan.free[t];
        for &c in &plan.candidates {
            if !tick() {
                return;
            }
            cols[f - 1] = c;
            if plan.ok_at(t, cols) {
                dfs(plan, t + 1, cols, tick, pruned, leaf);
            } else {
                pruned.fetch_add(1, Ordering::Relaxed);
            }
        }
        cols[f - 1] = 0;
    }

    let parts: Vec<Result<(Vec<Mod2CharMatrix>, u64)>> = plan
        .candidates
        .par_iter()
        .map(|&c| {
            let mut cols = vec![0u64; m];
            for (k, &f) in plan.v0.iter().enumerate() {
                cols[f - 1] = 1 << k;
            }
            let mut found = Vec::new();
            let mut seen = 0u64;
            let mut err = None;
            cols[plan.free[0] - 1] = c;
            if !tick() {
                return Ok((found, seen));
            }
            if !plan.ok_at(0, &cols) {
                pruned.fetch_add(1, Ordering::Relaxed);
                return Ok((found, seen));
            }
            dfs(&plan, 1, &mut cols, &tick, &pruned, &mut |cols| {
                if err.is_some() {
                    return;
                }
                seen += 1;
                let l = plan.to_matrix(cols);
                let keep = match filter {
                    Mod2Filter::String => match report(p, &l) {
                        Ok(r) => r.string,
                        Err(e) => {
                            err = Some(e);
                            false
                        }
                    },
                    _ => true,
                };
                if keep {
                    found.push(l);
                }
            });
            match err {
                Some(e) => Err(e),
                None => Ok((found, seen)),
            }
        })
        .collect();
    let mut matrices = Vec::new();
    let mut seen = 0;
    for part in parts {
        let (found, c) = part?;
        seen += c;
        matrices.extend(found);
    }
    let stats = SearchStats {
        nodes: nodes.load(Ordering::Relaxed),
        pruned: pruned.load(Ordering::Relaxed),
        candidates: seen,
        survivors: matrices.len() as u64,
    };
    if stop.load(Ordering::Relaxed) {
        return Err(Error::ResourceCap(format!(
            "mod-2 search stopped after {} nodes and {:.1?}",
            stats.nodes,
            start.elapsed()
        )));
    }
    Ok(Mod2SearchResult { matrices, stats })
}

/// `Δ^{n_1} x ... x Δ^{n_k}` with each factor's facets consecutive.
pub fn simplex_product(ns: &[usize]) -> Result<SimplePolytope> {
    let (first, rest) = ns.split_first().ok_or_else(|| Error::Parameter("need at least one factor".into()))?;
    let mut p = SimplePolytope::simplex(*first)?;
    for &n in rest {
        p = p.product(&SimplePolytope::simplex(n)?).0;
    }
    Ok(p.with_name(format!("simplex_product({})", ns.iter().join(","))))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SimplexProductCheck {
    pub ns: Vec<usize>,
    /// All factors odd and one of them congruent to 3 mod 4.
    pub predicted: bool,
    pub string_count: usize,
    pub orientable_count: usize,
    pub stats: SearchStats,
}

impl SimplexProductCheck {
    pub fn holds(&self) -> bool {
        self.predicted == (self.string_count > 0)
    }
}

pub const DEFAULT_SIMPLEX_PRODUCT_CAP: usize = 7;

/// Exhaustively decide whether a string small cover exists over the product
/// of simplices and compare with the parity criterion.
pub fn verify_simplex_product_criterion(ns: &[usize], cap: usize, caps: Caps) -> Result<SimplexProductCheck> {
    if ns.is_empty() || ns.iter().any(|&n| n < 2) {
        return Err(Error::Parameter("every factor needs dimension at least 2".into()));
    }
    let total: usize = ns.iter().sum();
    if total > cap {
        return Err(Error::ResourceCap(format!("total dimension {total} exceeds the cap {cap}")));
    }
    let p = simplex_product(ns)?;
    let orientable = enumerate_mod2(&p, Mod2Filter::Orientable, caps)?;
    let mut string_count = 0;
    for l in &orientable.matrices {
        if report(&p, l)?.string {
            string_count += 1;
        }
    }
    Ok(SimplexProductCheck {
        ns: ns.to_vec(),
        predicted: ns.iter().all(|n| n % 2 == 1) && ns.iter().any(|n| n % 4 == 3),
        string_count,
        orientable_count: orientable.matrices.len(),
        stats: orientable.stats,
    })
}

/// Every list of factor dimensions, each at least 2, with sum at most `cap`,
/// as nondecreasing sequences.
pub fn simplex_product_shapes(cap: usize) -> Vec<Vec<usize>> {
    fn go(min: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        for n in min..=left {
            cur.push(n);
            out.push(cur.clone());
            go(n, left - n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(2, cap, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m2(rows: &[&[u8]]) -> Mod2CharMatrix {
        Mod2CharMatrix::new(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn square_times_triangle() -> SimplePolytope {
        let (p, _) = SimplePolytope::polygon(4).unwrap().product(&SimplePolytope::polygon(3).unwrap());
        p.relabel(&[1, 2, 5, 6, 3, 4, 7]).unwrap()
    }

    #[test]
    fn monomial_indices_are_a_bijection() {
        for f in 1..=MAX_FREE {
            let idx: Vec<usize> = (0..f).flat_map(|a| (a..f).map(move |b| monomial_index(f, a, b))).collect();
            assert_eq!(idx, (0..f * (f + 1) / 2).collect::<Vec<_>>());
        }
    }

    #[test]
    fn square_times_triangle_example_is_string() {
        let p = square_times_triangle();
        let l = m2(&[&[1, 0, 0, 0, 1, 0, 0], &[0, 1, 0, 0, 0, 1, 1], &[0, 0, 1, 0, 0, 0, 1], &[0, 0, 0, 1, 0, 0, 1]]);
        assert!(validate_mod2(&p, &l).unwrap());
        assert!(is_orientable(&p, &l).unwrap());
        assert!(is_string_smallcover(&p, &l).unwrap());
    }

    #[test]
    fn interval_times_simplex_examples_are_string() {
        let (p, _) = SimplePolytope::cube(1).unwrap().product(&SimplePolytope::simplex(2).unwrap());
        let p = p.relabel(&[1, 4, 2, 3, 5]).unwrap();
        let l = m2(&[&[1, 0, 0, 1, 1], &[0, 1, 0, 0, 1], &[0, 0, 1, 0, 1]]);
        assert!(is_string_smallcover(&p, &l).unwrap());

        let (p, _) = SimplePolytope::cube(1).unwrap().product(&SimplePolytope::simplex(3).unwrap());
        let (p, _) = p.product(&SimplePolytope::simplex(4).unwrap());
        let p = p.relabel(&[1, 9, 2, 3, 4, 10, 5, 6, 7, 8, 11]).unwrap();
        let tail: [[u8; 3]; 8] = [[1, 0, 1], [0, 1, 0], [0, 1, 1], [0, 1, 1], [0, 0, 1], [0, 0, 1], [0, 0, 1], [0, 0, 1]];
        let rows: Vec<Vec<u8>> = (0..8)
            .map(|k| (0..8).map(|j| u8::from(j == k)).chain(tail[k]).collect())
            .collect();
        let l = Mod2CharMatrix::new(&rows).unwrap();
        let r = report(&p, &l).unwrap();
        assert!(r.orientable && r.string, "{r:?}");
    }

    #[test]
    fn projective_spaces_follow_binomial_parity() {
        // w(RP^n) = (1 + a)^(n+1): orientable iff n odd, w2 = C(n+1, 2) a^2.
        for n in 1..=9 {
            let p = SimplePolytope::simplex(n).unwrap();
            let mut rows = vec![vec![0u8; n + 1]; n];
            for (k, r) in rows.iter_mut().enumerate() {
                r[k] = 1;
                r[n] = 1;
            }
            let r = report(&p, &Mod2CharMatrix::new(&rows).unwrap()).unwrap();
            assert_eq!(r.orientable, n % 2 == 1, "n = {n}");
            let w2_zero = n < 2 || ((n + 1) * n / 2) % 2 == 0;
            assert_eq!(r.w2_zero, w2_zero, "n = {n}");
            assert_eq!(r.string, n % 2 == 1 && w2_zero, "n = {n}");
            if n >= 2 {
                assert_eq!(r.string, n % 4 == 3, "n = {n}");
            }
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let p = SimplePolytope::polygon(4).unwrap();
        let l = m2(&[&[1, 0, 1, 0], &[0, 1, 0, 0]]);
        assert!(!validate_mod2(&p, &l).unwrap());
        assert!(matches!(is_string_smallcover(&p, &l), Err(Error::Singular { .. })));
        assert!(matches!(validate_mod2(&SimplePolytope::polygon(5).unwrap(), &l), Err(Error::Shape(_))));
    }

    #[test]
    fn quotient_dimension_matches_h2_everywhere() {
        for p in [SimplePolytope::prism(5).unwrap(), square_times_triangle(), SimplePolytope::q().unwrap()] {
            let all = enumerate_mod2(&p, Mod2Filter::Valid, Caps::default()).unwrap();
            assert!(!all.matrices.is_empty());
            for l in &all.matrices {
                let pres = Mod2Presentation::build(&p, l).unwrap();
                assert_eq!(pres.quotient_dim(), pres.h2);
                assert_eq!(is_orientable(&p, l).unwrap(), pres.w1() == 0);
            }
        }
    }

    #[test]
    fn enumeration_is_deterministic_and_filters_nest() {
        let p = square_times_triangle();
        let count = |f| enumerate_mod2(&p, f, Caps::default()).unwrap();
        let (valid, orient, string) = (count(Mod2Filter::Valid), count(Mod2Filter::Orientable), count(Mod2Filter::String));
        assert!(valid.matrices.len() > orient.matrices.len() && orient.matrices.len() >= string.matrices.len());
        assert!(!string.matrices.is_empty());
        assert_eq!(string.matrices, count(Mod2Filter::String).matrices);
        let tiny = Caps { max_nodes: 5, ..Caps::default() };
        assert!(matches!(enumerate_mod2(&p, Mod2Filter::Valid, tiny), Err(Error::ResourceCap(_))));
    }

    #[test]
    fn pentagon_squared_has_no_orientable_small_cover() {
        let (p, _) = SimplePolytope::polygon(5).unwrap().product(&SimplePolytope::polygon(5).unwrap());
        let r = enumerate_mod2(&p, Mod2Filter::Orientable, Caps::default()).unwrap();
        assert!(r.matrices.is_empty());
        assert!(r.stats.nodes > 0);
    }

    #[test]
    fn simplex_product_shapes_up_to_seven() {
        let shapes = simplex_product_shapes(7);
        assert_eq!(shapes.len(), 14);
        assert!(shapes.iter().all(|s| s.iter().sum::<usize>() <= 7 && s.iter().all(|&n| n >= 2)));
    }

    #[test]
    fn simplex_product_examples() {
        let three = verify_simplex_product_criterion(&[3], 7, Caps::default()).unwrap();
        assert!(three.predicted && three.holds());
        let two = verify_simplex_product_criterion(&[2], 7, Caps::default()).unwrap();
        assert!(!two.predicted && two.holds() && two.string_count == 0);
        let pair = verify_simplex_product_criterion(&[3, 3], 7, Caps::default()).unwrap();
        assert!(pair.predicted && pair.holds());
        assert!(matches!(verify_simplex_product_criterion(&[4, 4], 7, Caps::default()), Err(Error::ResourceCap(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn verdict_is_invariant_under_equivalence(pick in 0usize..10_000, ops in prop::collection::vec((1usize..=4, 1usize..=4), 0..8), aut in 0usize..1000) {
            let p = square_times_triangle();
            let all = enumerate_mod2(&p, Mod2Filter::Valid, Caps::default()).unwrap();
            let l = &all.matrices[pick % all.matrices.len()];
            let before = report(&p, l).unwrap();
            let mut moved = Mod2CharMatrix::from_packed(l.n, l.m, l.rows.clone());
            for (a, b) in ops.into_iter().filter(|(a, b)| a != b) {
                moved = moved.add_row(a, b);
            }
            let auts = p.automorphisms().unwrap();
            moved = moved.permute_columns(&auts[aut % auts.len()]);
            prop_assert!(validate_mod2(&p, &moved).unwrap());
            let after = report(&p, &moved).unwrap();
            prop_assert_eq!(before.orientable, after.orientable);
            prop_assert_eq!(before.string, after.string);
        }
    }
}
