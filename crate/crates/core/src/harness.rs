//! Bounded exhaustive enumeration of refined characteristic matrices, and
//! the named verification campaigns built on it.

use crate::charmat::{self, CharMatrix, Dedup};
use crate::error::{Error, Result};
use crate::polytope::SimplePolytope;
use crate::stringcheck::StringEngine;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::{Duration, Instant};

mod claims;
pub use claims::{verify_claim, ClaimParams, ClaimReport, ClaimVerdict, Witness, CLAIM_IDS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Filter {
    Valid,
    Spin,
    String,
}

#[derive(Clone, Copy, Debug)]
pub struct Caps {
    pub max_nodes: u64,
    pub max_time: Duration,
}

impl Default for Caps {
    fn default() -> Self {
        Self { max_nodes: 1_000_000_000, max_time: Duration::from_secs(3600) }
    }
}

#[derive(Clone, Debug)]
pub struct SearchSpec {
    pub polytope: SimplePolytope,
    pub bound: i64,
    pub dedup: Dedup,
    pub filter: Filter,
    /// Defaults to the lexicographically first vertex.
    pub initial_vertex: Option<Vec<usize>>,
    pub caps: Caps,
}

impl SearchSpec {
    pub fn new(polytope: SimplePolytope, bound: i64, filter: Filter, dedup: Dedup) -> Self {
        Self { polytope, bound, dedup, filter, initial_vertex: None, caps: Caps::default() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SearchStats {
    /// Partial assignments visited.
    pub nodes: u64,
    /// Partial assignments rejected by a vertex determinant or parity.
    pub pruned: u64,
    /// Complete valid assignments reaching the final filter.
    pub candidates: u64,
    /// Distinct matrices emitted.
    pub survivors: u64,
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub matrices: Vec<CharMatrix>,
    pub stats: SearchStats,
}

/// Column-major search state shared by exhaustive and random searches.
struct Plan {
    n: usize,
    m: usize,
    v0: Vec<usize>,
    free: Vec<usize>,
    /// Vertices completed when free column `t` is assigned.
    checks: Vec<Vec<Vec<usize>>>,
    candidates: Vec<Vec<i64>>,
}

impl Plan {
    fn new(p: &SimplePolytope, v0: &[usize], bound: i64, sign_normalized: bool, spin: bool) -> Result<Self> {
        if bound < 1 {
            return Err(Error::Parameter("entry bound must be at least 1".into()));
        }
        let mut v0 = v0.to_vec();
        v0.sort_unstable();
        if !p.is_vertex(&v0) {
            return Err(Error::NotAVertex(v0));
        }
        let n = p.dim();
        let m = p.num_facets();
        let free: Vec<usize> = (1..=m).filter(|j| !v0.contains(j)).collect();
        let mut checks = vec![Vec::new(); free.len()];
        for v in p.vertices() {
            if let Some(t) = v.iter().filter_map(|f| free.iter().position(|x| x == f)).max() {
                checks[t].push(v.clone());
            }
        }
        let candidates = box_vectors(n, bound)
            .into_iter()
            .filter(|c| !sign_normalized || c.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0))
            .filter(|c| !spin || c.iter().sum::<i64>().rem_euclid(2) == 1)
            .collect();
        Ok(Self { n, m, v0, free, checks, candidates })
    }

    fn initial_columns(&self) -> Vec<Vec<i64>> {
        let mut cols = vec![vec![0; self.n]; self.m];
        for (k, &f) in self.v0.iter().enumerate() {
            cols[f - 1][k] = 1;
        }
        cols
    }

    fn ok_at(&self, t: usize, cols: &[Vec<i64>]) -> bool {
        self.checks[t].iter().all(|v| {
            let sub: Vec<&[i64]> = v.iter().map(|&f| cols[f - 1].as_slice()).collect();
            small_det(&sub).abs() == 1
        })
    }

    fn to_matrix(&self, cols: &[Vec<i64>]) -> CharMatrix {
        let rows = (0..self.n).map(|k| cols.iter().map(|c| c[k]).collect()).collect();
        CharMatrix::new(rows).and_then(|l| l.mark_refined(&self.v0)).expect("identity block at the initial vertex")
    }
}

fn box_vectors(n: usize, bound: i64) -> Vec<Vec<i64>> {
    let side = (2 * bound + 1) as usize;
    (0..side.pow(n as u32))
        .map(|mut code| {
            (0..n)
                .map(|_| {
                    let x = (code % side) as i64 - bound;
                    code /= side;
                    x
                })
                .collect()
        })
        .filter(|c: &Vec<i64>| c.iter().any(|&x| x != 0))
        .collect()
}

/// Determinant of a small square matrix given by columns.
pub(crate) fn small_det(cols: &[&[i64]]) -> i128 {
    let n = cols.len();
    match n {
        1 => cols[0][0] as i128,
        2 => cols[0][0] as i128 * cols[1][1] as i128 - cols[1][0] as i128 * cols[0][1] as i128,
        _ => {
            let rows: Vec<Vec<i64>> = (0..n).map(|k| cols.iter().map(|c| c[k]).collect()).collect();
            crate::intmat::det_i128(&rows).expect("small entries")
        }
    }
}

struct Shared {
    nodes: AtomicU64,
    pruned: AtomicU64,
    stop: AtomicBool,
    start: Instant,
    caps: Caps,
}

impl Shared {
    fn tick(&self) -> bool {
        let k = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        if k > self.caps.max_nodes || (k % 4096 == 0 && self.start.elapsed() > self.caps.max_time) {
            self.stop.store(true, Ordering::Relaxed);
        }
        !self.stop.load(Ordering::Relaxed)
    }
}

fn dfs(plan: &Plan, t: usize, cols: &mut Vec<Vec<i64>>, sh: &Shared, leaf: &mut dyn FnMut(&[Vec<i64>])) {
    if t == plan.free.len() {
        leaf(cols);
        return;
    }
    let f = plan.free[t];
    for c in &plan.candidates {
        if !sh.tick() {
            return;
        }
        cols[f - 1].clone_from(c);
        if plan.ok_at(t, cols) {
            dfs(plan, t + 1, cols, sh, leaf);
        } else {
            sh.pruned.fetch_add(1, Ordering::Relaxed);
        }
    }
    cols[f - 1] = vec![0; plan.n];
}

/// Every refined matrix over the polytope with entries in `[-B, B]` passing
/// the filter, one per dedup class, in canonical order.
pub fn enumerate(spec: &SearchSpec) -> Result<SearchResult> {
    let p = &spec.polytope;
    let v0 = spec.initial_vertex.clone().unwrap_or_else(|| p.vertices()[0].clone());
    let spin = spec.filter != Filter::Valid;
    let plan = Plan::new(p, &v0, spec.bound, spec.dedup != Dedup::None, spin)?;
    let engine = StringEngine::new(p);
    let sh = Shared {
        nodes: AtomicU64::new(0),
        pruned: AtomicU64::new(0),
        stop: AtomicBool::new(false),
        start: Instant::now(),
        caps: spec.caps,
    };
    if plan.free.is_empty() {
        return Err(Error::Parameter("polytope has no free facets".into()));
    }
    let first = plan.free[0];
    let parts: Vec<Result<(BTreeMap<Vec<i64>, CharMatrix>, u64)>> = plan
        .candidates
        .par_iter()
        .map(|c| {
            let mut cols = plan.initial_columns();
            let mut found = BTreeMap::new();
            let mut candidates = 0u64;
            let mut err = None;
            if !sh.tick() {
                return Ok((found, candidates));
            }
            cols[first - 1].clone_from(c);
            if !plan.ok_at(0, &cols) {
                sh.pruned.fetch_add(1, Ordering::Relaxed);
                return Ok((found, candidates));
            }
            dfs(&plan, 1, &mut cols, &sh, &mut |cols| {
                if err.is_some() {
                    return;
                }
                candidates += 1;
                let l = plan.to_matrix(cols);
                let keep = match spec.filter {
                    Filter::String => match engine.verdict(&l) {
                        Ok(v) => v.string,
                        Err(e) => {
                            err = Some(e);
                            false
                        }
                    },
                    _ => true,
                };
                if keep {
                    match charmat::canonical_key(p, &l, spec.dedup) {
                        Ok(k) => {
                            found.entry(k).or_insert(l);
                        }
                        Err(e) => err = Some(e),
                    }
                }
            });
            match err {
                Some(e) => Err(e),
                None => Ok((found, candidates)),
            }
        })
        .collect();
    let mut all = BTreeMap::new();
    let mut candidates = 0;
    for part in parts {
        let (found, c) = part?;
        candidates += c;
        for (k, l) in found {
            all.entry(k).or_insert(l);
        }
    }
    let stats = SearchStats {
        nodes: sh.nodes.load(Ordering::Relaxed),
        pruned: sh.pruned.load(Ordering::Relaxed),
        candidates,
        survivors: all.len() as u64,
    };
    if sh.stop.load(Ordering::Relaxed) {
        return Err(Error::ResourceCap(format!(
            "stopped after {} nodes and {:.1?}; {} partial results discarded",
            stats.nodes,
            sh.start.elapsed(),
            stats.survivors
        )));
    }
    Ok(SearchResult { matrices: all.into_values().collect(), stats })
}

/// A uniformly shuffled depth-first search returning the first valid
/// refined matrix (optionally spin) with entries in `[-B, B]`.
pub fn random_valid<R: rand::Rng>(
    p: &SimplePolytope,
    v0: &[usize],
    bound: i64,
    spin: bool,
    rng: &mut R,
) -> Result<CharMatrix> {
    use rand::seq::SliceRandom;
    let plan = Plan::new(p, v0, bound, false, spin)?;
    fn go<R: rand::Rng>(plan: &Plan, t: usize, cols: &mut Vec<Vec<i64>>, rng: &mut R, budget: &mut u64) -> bool {
        if t == plan.free.len() {
            return true;
        }
        let f = plan.free[t];
        let mut order: Vec<usize> = (0..plan.candidates.len()).collect();
        order.shuffle(rng);
        for i in order {
            if *budget == 0 {
                return false;
            }
            *budget -= 1;
            cols[f - 1].clone_from(&plan.candidates[i]);
            if plan.ok_at(t, cols) && go(plan, t + 1, cols, rng, budget) {
                return true;
            }
        }
        cols[f - 1] = vec![0; plan.n];
        false
    }
    let mut cols = plan.initial_columns();
    let mut budget = 50_000_000u64;
    if go(&plan, 0, &mut cols, rng, &mut budget) {
        Ok(plan.to_matrix(&cols))
    } else {
        Err(Error::ResourceCap("no valid matrix found within the search budget".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stringcheck;

    #[test]
    fn square_string_survivors_satisfy_parity() {
        let spec = SearchSpec::new(SimplePolytope::polygon(4).unwrap(), 1, Filter::String, Dedup::Signs);
        let r = enumerate(&spec).unwrap();
        assert!(!r.matrices.is_empty());
        for l in &r.matrices {
            assert!(stringcheck::polygon_parity_criterion(l).unwrap());
        }
    }

    #[test]
    fn odd_polygons_have_no_spin_matrices() {
        let spec = SearchSpec::new(SimplePolytope::polygon(5).unwrap(), 3, Filter::Spin, Dedup::Signs);
        assert!(enumerate(&spec).unwrap().matrices.is_empty());
    }

    #[test]
    fn cube_contains_linear_models() {
        let spec = SearchSpec::new(SimplePolytope::cube(3).unwrap(), 1, Filter::Valid, Dedup::Signs);
        let r = enumerate(&spec).unwrap();
        let id = CharMatrix::new(vec![vec![1, 0, 0, 1, 0, 0], vec![0, 1, 0, 0, 1, 0], vec![0, 0, 1, 0, 0, 1]]).unwrap();
        let key = charmat::canonical_key(&spec.polytope, &id, Dedup::Signs).unwrap();
        assert!(r.matrices.iter().any(|l| charmat::canonical_key(&spec.polytope, l, Dedup::Signs).unwrap() == key));
        for l in &r.matrices {
            assert!(charmat::validate(&spec.polytope, l).unwrap().is_none());
        }
    }

    #[test]
    fn dedup_modes_nest() {
        let p = SimplePolytope::polygon(6).unwrap();
        let count = |d| enumerate(&SearchSpec::new(p.clone(), 2, Filter::Valid, d)).unwrap().matrices.len();
        let (none, signs, full) = (count(Dedup::None), count(Dedup::Signs), count(Dedup::SignsAndAutomorphisms));
        assert!(none > signs && signs > full && full > 0, "{none} {signs} {full}");
    }

    #[test]
    fn deterministic_and_capped() {
        let spec = SearchSpec::new(SimplePolytope::prism(4).unwrap(), 1, Filter::Spin, Dedup::Signs);
        let a = enumerate(&spec).unwrap();
        let b = enumerate(&spec).unwrap();
        assert_eq!(a.matrices, b.matrices);
        assert_eq!(a.stats, b.stats);
        let mut tiny = spec.clone();
        tiny.caps.max_nodes = 10;
        assert!(matches!(enumerate(&tiny), Err(Error::ResourceCap(_))));
    }
}
