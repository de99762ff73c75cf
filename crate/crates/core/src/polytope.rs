//! Combinatorial simple polytopes, stored as the vertex list of the dual
//! simplicial complex. Facets are labelled `1..=m`; a vertex is the sorted set
//! of the `n` facets meeting there.

use crate::error::{Error, Result};
use itertools::Itertools;
use std::collections::{BTreeSet, HashMap, HashSet};

/// Bitmask of a facet set: facet `j` is bit `j - 1`.
pub type Mask = u64;

pub fn mask_of(facets: &[usize]) -> Mask {
    facets.iter().fold(0, |acc, &f| acc | 1 << (f - 1))
}

pub fn facets_of(mask: Mask) -> Vec<usize> {
    (0..64).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplePolytope {
    dim: usize,
    num_facets: usize,
    vertices: Vec<Vec<usize>>,
    masks: Vec<Mask>,
    name: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceSummary {
    pub f_vector: Vec<u64>,
    pub h_vector: Vec<i64>,
    pub nonface_pairs: Vec<(usize, usize)>,
}

/// Where the facets of two input polytopes land in a combined polytope.
/// `left[i - 1]` is the new label of facet `i` of the first input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FacetMaps {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

/// A facet `F` missing from vertex `V` yet adjacent to every facet of `V`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObstructionWitness {
    pub facet: usize,
    pub vertex: Vec<usize>,
}

impl SimplePolytope {
    pub fn new(dim: usize, num_facets: usize, vertices: Vec<Vec<usize>>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidPolytope(msg));
        if dim == 0 {
            return bad("dimension must be positive".into());
        }
        if num_facets > 64 {
            return bad(format!("{num_facets} facets exceeds the supported 64"));
        }
        let mut vs: Vec<Vec<usize>> = Vec::with_capacity(vertices.len());
        for v in vertices {
            let mut v = v;
            v.sort_unstable();
            v.dedup();
            if v.len() != dim {
                return bad(format!("vertex {v:?} does not have {dim} distinct facets"));
            }
            if v.iter().any(|&f| f == 0 || f > num_facets) {
                return bad(format!("vertex {v:?} has a facet outside 1..={num_facets}"));
            }
            vs.push(v);
        }
        vs.sort();
        if vs.windows(2).any(|w| w[0] == w[1]) {
            return bad("duplicate vertex".into());
        }
        let masks: Vec<Mask> = vs.iter().map(|v| mask_of(v)).collect();
        let all = masks.iter().fold(0, |a, m| a | m);
        let full = if num_facets == 64 { u64::MAX } else { (1u64 << num_facets) - 1 };
        if all != full {
            return bad("some facet meets no vertex".into());
        }
        let mut ridge_count: HashMap<Mask, usize> = HashMap::new();
        for &m in &masks {
            for f in facets_of(m) {
                *ridge_count.entry(m & !(1 << (f - 1))).or_default() += 1;
            }
        }
        if let Some((r, c)) = ridge_count.iter().find(|&(_, &c)| c != 2) {
            return bad(format!("edge {:?} lies on {c} vertices, expected 2", facets_of(*r)));
        }
        Ok(Self { dim, num_facets, vertices: vs, masks, name: None })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_facets(&self) -> usize {
        self.num_facets
    }

    pub fn vertices(&self) -> &[Vec<usize>] {
        &self.vertices
    }

    pub fn vertex_masks(&self) -> &[Mask] {
        &self.masks
    }

    pub fn is_vertex(&self, facets: &[usize]) -> bool {
        let m = mask_of(facets);
        facets.len() == self.dim && self.masks.contains(&m)
    }

    /// Whether the facet set has nonempty intersection.
    pub fn is_face(&self, mask: Mask) -> bool {
        self.masks.iter().any(|&v| v & mask == mask)
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        a != b && self.is_face(mask_of(&[a, b]))
    }

    /// Number of vertices on each facet.
    pub fn facet_degrees(&self) -> Vec<usize> {
        (1..=self.num_facets)
            .map(|f| self.masks.iter().filter(|&&v| v >> (f - 1) & 1 == 1).count())
            .collect()
    }

    // ---- constructors ----

    pub fn simplex(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("simplex needs n >= 1".into()));
        }
        let vs = (1..=n + 1).combinations(n).collect();
        Ok(Self::new(n, n + 1, vs)?.with_name(format!("simplex({n})")))
    }

    /// `F_i` meets `F_j` iff `i - j = ±1 mod m`.
    pub fn polygon(m: usize) -> Result<Self> {
        if m < 3 {
            return Err(Error::Parameter("polygon needs m >= 3".into()));
        }
        let vs = (1..=m).map(|i| vec![i, i % m + 1]).collect();
        Ok(Self::new(2, m, vs)?.with_name(format!("polygon({m})")))
    }

    /// `F_i` and `F_{n+i}` are opposite.
    pub fn cube(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("cube needs n >= 1".into()));
        }
        let vs = (0..1u64 << n)
            .map(|bits| (0..n).map(|i| if bits >> i & 1 == 1 { n + i + 1 } else { i + 1 }).collect())
            .collect();
        Ok(Self::new(n, 2 * n, vs)?.with_name(format!("cube({n})")))
    }

    /// `C_2(s) x I` with `F_1` on top, `F_{s+2}` at the bottom and the sides
    /// `F_2..F_{s+1}` in cyclic order.
    pub fn prism(s: usize) -> Result<Self> {
        if s < 3 {
            return Err(Error::Parameter("prism needs s >= 3".into()));
        }
        let side = |i: usize| (i - 2 + 1) % s + 2;
        let vs = (2..=s + 1)
            .flat_map(|i| [vec![1, i, side(i)], vec![s + 2, i, side(i)]])
            .collect();
        Ok(Self::new(3, s + 2, vs)?.with_name(format!("prism({s})")))
    }

    /// The 8-facet 3-polytope obtained by an edge cut of the pentagonal
    /// prism, labelled so that the neighbours of facets 1, 2 and 3 read off
    /// the cycles (2,3,4,5), (3,1,5,8,6) and (1,2,6,7,4).
    pub fn q() -> Result<Self> {
        let vs = ["123", "134", "145", "125", "258", "268", "236", "367", "347", "458", "478", "678"]
            .iter()
            .map(|s| s.bytes().map(|b| (b - b'0') as usize).collect())
            .collect();
        Ok(Self::new(3, 8, vs)?.with_name("Q"))
    }

    // ---- operations ----

    /// Relabel facets: facet `i` becomes `perm[i - 1]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.num_facets || perm.iter().copied().sorted().ne(1..=self.num_facets) {
            return Err(Error::Parameter("relabeling is not a permutation".into()));
        }
        let vs = self.vertices.iter().map(|v| v.iter().map(|&f| perm[f - 1]).collect()).collect();
        let mut out = Self::new(self.dim, self.num_facets, vs)?;
        out.name = self.name.clone();
        Ok(out)
    }

    /// Cartesian product; the second factor's facets are shifted by `m₁`.
    pub fn product(&self, other: &Self) -> (Self, FacetMaps) {
        let m1 = self.num_facets;
        let vs = self
            .vertices
            .iter()
            .cartesian_product(&other.vertices)
            .map(|(a, b)| a.iter().copied().chain(b.iter().map(|&f| f + m1)).collect())
            .collect();
        let p = Self::new(self.dim + other.dim, m1 + other.num_facets, vs)
            .expect("product of simple polytopes is simple");
        let maps = FacetMaps {
            left: (1..=m1).collect(),
            right: (1..=other.num_facets).map(|f| f + m1).collect(),
        };
        (p, maps)
    }

    /// Glue `other` onto `self` at `v_self` / `v_other`. `matching` pairs
    /// each facet at `v_self` with one at `v_other`; those merge. The first
    /// polytope keeps its labels; the unmatched facets of the second follow
    /// in increasing order.
    pub fn connected_sum(
        &self,
        v_self: &[usize],
        other: &Self,
        v_other: &[usize],
        matching: &[(usize, usize)],
    ) -> Result<(Self, FacetMaps)> {
        if self.dim != other.dim {
            return Err(Error::InvalidMove("connected sum of different dimensions".into()));
        }
        if !self.is_vertex(v_self) || !other.is_vertex(v_other) {
            return Err(Error::NotAVertex(if self.is_vertex(v_self) { v_other.to_vec() } else { v_self.to_vec() }));
        }
        check_bijection(matching, v_self, v_other)?;
        let maps = self.merge_labels(other, matching);
        let drop_l = mask_of(v_self);
        let drop_r = mask_of(v_other);
        let vs = self.glued_vertices(other, &maps, |m| m == drop_l, |m| m == drop_r);
        let m = self.num_facets + other.num_facets - self.dim;
        Ok((Self::new(self.dim, m, vs)?, maps))
    }

    /// Edge connected sum. `e_self` and `e_other` list the `n - 1` facets
    /// containing each edge; `matching` pairs those facets and the two facets
    /// cut by each edge's endpoints (`n + 1` pairs in all).
    pub fn edge_connected_sum(
        &self,
        e_self: &[usize],
        other: &Self,
        e_other: &[usize],
        matching: &[(usize, usize)],
    ) -> Result<(Self, FacetMaps)> {
        if self.dim != other.dim {
            return Err(Error::InvalidMove("edge connected sum of different dimensions".into()));
        }
        let (ends_l, tips_l) = self.edge_endpoints(e_self)?;
        let (ends_r, tips_r) = other.edge_endpoints(e_other)?;
        let full_l: Vec<usize> = e_self.iter().copied().chain(tips_l).sorted().collect();
        let full_r: Vec<usize> = e_other.iter().copied().chain(tips_r).sorted().collect();
        check_bijection(matching, &full_l, &full_r)?;
        for &(a, b) in matching {
            if e_self.contains(&a) != e_other.contains(&b) {
                return Err(Error::InvalidMove(format!(
                    "matching sends facet {a} to {b}, mixing edge and endpoint facets"
                )));
            }
        }
        let maps = self.merge_labels(other, matching);
        let vs = self.glued_vertices(other, &maps, |m| ends_l.contains(&m), |m| ends_r.contains(&m));
        let m = self.num_facets + other.num_facets - self.dim - 1;
        Ok((Self::new(self.dim, m, vs)?, maps))
    }

    /// The two endpoint vertices of the edge and the extra facet at each.
    fn edge_endpoints(&self, edge: &[usize]) -> Result<([Mask; 2], [usize; 2])> {
        let em = mask_of(edge);
        let ends: Vec<Mask> = self.masks.iter().copied().filter(|&v| v & em == em).collect();
        if edge.len() + 1 != self.dim || ends.len() != 2 {
            return Err(Error::InvalidMove(format!("{edge:?} is not an edge")));
        }
        let tip = |v: Mask| facets_of(v & !em)[0];
        Ok(([ends[0], ends[1]], [tip(ends[0]), tip(ends[1])]))
    }

    fn merge_labels(&self, other: &Self, matching: &[(usize, usize)]) -> FacetMaps {
        let partner: HashMap<usize, usize> = matching.iter().map(|&(a, b)| (b, a)).collect();
        let mut next = self.num_facets;
        let right = (1..=other.num_facets)
            .map(|f| {
                partner.get(&f).copied().unwrap_or_else(|| {
                    next += 1;
                    next
                })
            })
            .collect();
        FacetMaps { left: (1..=self.num_facets).collect(), right }
    }

    fn glued_vertices(
        &self,
        other: &Self,
        maps: &FacetMaps,
        drop_l: impl Fn(Mask) -> bool,
        drop_r: impl Fn(Mask) -> bool,
    ) -> Vec<Vec<usize>> {
        let left = self.vertices.iter().zip(&self.masks).filter(|(_, &m)| !drop_l(m)).map(|(v, _)| v.clone());
        let right = other
            .vertices
            .iter()
            .zip(&other.masks)
            .filter(|(_, &m)| !drop_r(m))
            .map(|(v, _)| v.iter().map(|&f| maps.right[f - 1]).collect());
        left.chain(right).collect()
    }

    /// Cut off the edge `F_a ∩ F_b` of a 3-polytope by a new facet `m + 1`.
    pub fn edge_cut_3d(&self, a: usize, b: usize) -> Result<Self> {
        if self.dim != 3 {
            return Err(Error::InvalidMove("edge cut is only supported in dimension 3".into()));
        }
        let (ends, [c, d]) = self.edge_endpoints(&[a, b]).map_err(|_| Error::InvalidMove(format!("F{a} ∩ F{b} is not an edge")))?;
        let new = self.num_facets + 1;
        let vs = self
            .vertices
            .iter()
            .zip(&self.masks)
            .filter(|(_, m)| !ends.contains(m))
            .map(|(v, _)| v.clone())
            .chain([vec![a, c, new], vec![b, c, new], vec![a, d, new], vec![b, d, new]])
            .collect();
        Self::new(3, new, vs)
    }

    pub fn face_summary(&self) -> FaceSummary {
        let n = self.dim;
        let mut faces: HashSet<Mask> = HashSet::new();
        for &v in &self.masks {
            let bits = facets_of(v);
            for sub in 0u32..1 << n {
                let m = (0..n).filter(|i| sub >> i & 1 == 1).fold(0, |a, i| a | 1 << (bits[i] - 1));
                faces.insert(m);
            }
        }
        // f[i] counts i-dimensional faces, i.e. (n - i)-subsets.
        let mut f = vec![0u64; n + 1];
        for m in &faces {
            f[n - m.count_ones() as usize] += 1;
        }
        let h = h_from_f(&f);
        let nonface_pairs = (1..=self.num_facets)
            .tuple_combinations()
            .filter(|&(a, b)| !faces.contains(&mask_of(&[a, b])))
            .collect();
        FaceSummary { f_vector: f, h_vector: h, nonface_pairs }
    }

    /// A proper facet coloring with `c` colors (colors `1..=c`), if any.
    pub fn find_coloring(&self, c: usize) -> Option<Vec<usize>> {
        let m = self.num_facets;
        let adj: Vec<Vec<usize>> = (1..=m).map(|a| (1..a).filter(|&b| self.adjacent(a, b)).collect()).collect();
        let mut colors = vec![0usize; m];
        fn go(i: usize, c: usize, adj: &[Vec<usize>], colors: &mut [usize]) -> bool {
            if i == colors.len() {
                return true;
            }
            // Symmetry: never open a color beyond the next unused one.
            let top = colors[..i].iter().max().copied().unwrap_or(0);
            for col in 1..=c.min(top + 1) {
                if adj[i].iter().all(|&b| colors[b - 1] != col) {
                    colors[i] = col;
                    if go(i + 1, c, adj, colors) {
                        return true;
                    }
                }
            }
            colors[i] = 0;
            false
        }
        (c >= 1 && go(0, c, &adj, &mut colors)).then_some(colors)
    }

    /// A facet adjacent to every facet of some vertex without containing it.
    /// Its existence rules out string quasitoric manifolds over the polytope.
    pub fn key_obstruction(&self) -> Option<ObstructionWitness> {
        for v in &self.vertices {
            for f in 1..=self.num_facets {
                if !v.contains(&f) && v.iter().all(|&g| self.adjacent(f, g)) {
                    return Some(ObstructionWitness { facet: f, vertex: v.clone() });
                }
            }
        }
        None
    }

    /// All facet permutations preserving the vertex set, or `None` when
    /// `m > 16`.
    pub fn automorphisms(&self) -> Option<Vec<Vec<usize>>> {
        (self.num_facets <= 16).then(|| {
            let mut out = Vec::new();
            isomorphisms(self, self, &mut |p| {
                out.push(p.to_vec());
                true
            });
            out
        })
    }

    /// A facet bijection `perm` (facet `i` of `self` ↦ `perm[i-1]` of
    /// `other`) carrying vertices to vertices.
    pub fn find_isomorphism(&self, other: &Self) -> Option<Vec<usize>> {
        if self.dim != other.dim
            || self.num_facets != other.num_facets
            || self.vertices.len() != other.vertices.len()
        {
            return None;
        }
        let mut found = None;
        isomorphisms(self, other, &mut |p| {
            found = Some(p.to_vec());
            false
        });
        found
    }
}

fn check_bijection(matching: &[(usize, usize)], from: &[usize], to: &[usize]) -> Result<()> {
    let a: BTreeSet<usize> = matching.iter().map(|p| p.0).collect();
    let b: BTreeSet<usize> = matching.iter().map(|p| p.1).collect();
    let ok = matching.len() == from.len()
        && a.len() == from.len()
        && b.len() == to.len()
        && a.iter().eq(from.iter().sorted())
        && b.iter().eq(to.iter().sorted());
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidMove(format!("matching {matching:?} is not a bijection {from:?} -> {to:?}")))
    }
}

/// `h_{n-j} = Σ_{i≥j} (-1)^{i-j} C(i,j) f_i`.
fn h_from_f(f: &[u64]) -> Vec<i64> {
    let n = f.len() - 1;
    let binom = |a: usize, b: usize| -> i64 { (0..b).fold(1i64, |acc, t| acc * (a - t) as i64 / (t as i64 + 1)) };
    let mut h = vec![0i64; n + 1];
    for j in 0..=n {
        h[n - j] = (j..=n)
            .map(|i| {
                let s = if (i - j) % 2 == 0 { 1 } else { -1 };
                s * binom(i, j) * f[i] as i64
            })
            .sum();
    }
    h
}

/// Backtracking over facet bijections `a -> b` preserving degrees,
/// adjacency and vertices. `visit` returns `false` to stop.
fn isomorphisms(a: &SimplePolytope, b: &SimplePolytope, visit: &mut dyn FnMut(&[usize]) -> bool) {
    let m = a.num_facets;
    let deg_a = a.facet_degrees();
    let deg_b = b.facet_degrees();
    let adj_a: Vec<Mask> = (1..=m).map(|x| (1..=m).filter(|&y| a.adjacent(x, y)).fold(0, |acc, y| acc | 1 << (y - 1))).collect();
    let adj_b: Vec<Mask> = (1..=m).map(|x| (1..=m).filter(|&y| b.adjacent(x, y)).fold(0, |acc, y| acc | 1 << (y - 1))).collect();
    // Vertices of `a` completed once facet t (0-based) is assigned.
    let mut completes: Vec<Vec<Mask>> = vec![Vec::new(); m];
    for &v in &a.masks {
        completes[63 - v.leading_zeros() as usize].push(v);
    }
    let vset_b: HashSet<Mask> = b.masks.iter().copied().collect();
    let mut perm = vec![0usize; m];
    let mut used: Mask = 0;

    struct Ctx<'a> {
        m: usize,
        deg_a: &'a [usize],
        deg_b: &'a [usize],
        adj_a: &'a [Mask],
        adj_b: &'a [Mask],
        completes: &'a [Vec<Mask>],
        vset_b: &'a HashSet<Mask>,
    }
    fn image(perm: &[usize], v: Mask) -> Mask {
        facets_of(v).iter().fold(0, |acc, &f| acc | 1 << (perm[f - 1] - 1))
    }
    fn go(t: usize, cx: &Ctx, perm: &mut [usize], used: &mut Mask, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if t == cx.m {
            return visit(perm);
        }
        for y in 1..=cx.m {
            if *used >> (y - 1) & 1 == 1 || cx.deg_a[t] != cx.deg_b[y - 1] {
                continue;
            }
            let consistent = (0..t).all(|s| {
                let x_adj = cx.adj_a[t] >> s & 1 == 1;
                let y_adj = cx.adj_b[y - 1] >> (perm[s] - 1) & 1 == 1;
                x_adj == y_adj
            });
            if !consistent {
                continue;
            }
            perm[t] = y;
            if cx.completes[t].iter().all(|&v| cx.vset_b.contains(&image(perm, v))) {
                *used |= 1 << (y - 1);
                let more = go(t + 1, cx, perm, used, visit);
                *used &= !(1 << (y - 1));
                if !more {
                    perm[t] = 0;
                    return false;
                }
            }
            perm[t] = 0;
        }
        true
    }
    let cx = Ctx {
        m,
        deg_a: &deg_a,
        deg_b: &deg_b,
        adj_a: &adj_a,
        adj_b: &adj_b,
        completes: &completes,
        vset_b: &vset_b,
    };
    go(0, &cx, &mut perm, &mut used, visit);
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn binom(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |a, t| a * (n - t) / (t + 1))
    }

    fn check_dehn_sommerville(p: &SimplePolytope) {
        let s = p.face_summary();
        let h = &s.h_vector;
        assert_eq!(h[0], 1);
        assert_eq!(s.f_vector[0] as i64, h.iter().sum::<i64>());
        assert!(h.iter().eq(h.iter().rev()), "h not palindromic: {h:?}");
        if p.dim() >= 2 {
            assert_eq!(
                s.nonface_pairs.len() as u64,
                binom(p.num_facets() as u64, 2) - s.f_vector[p.dim() - 2]
            );
        }
    }

    #[test]
    fn primitives_are_valid() {
        for p in [
            SimplePolytope::simplex(1).unwrap(),
            SimplePolytope::simplex(3).unwrap(),
            SimplePolytope::polygon(7).unwrap(),
            SimplePolytope::cube(4).unwrap(),
            SimplePolytope::prism(5).unwrap(),
            SimplePolytope::q().unwrap(),
        ] {
            check_dehn_sommerville(&p);
        }
        assert_eq!(SimplePolytope::polygon(3).unwrap().vertices(), &[vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert!(SimplePolytope::polygon(2).is_err());
        assert!(SimplePolytope::prism(2).is_err());
    }

    #[test]
    fn prism_labeling() {
        let l4 = SimplePolytope::prism(4).unwrap();
        assert_eq!(l4.num_facets(), 6);
        for i in 2..=5 {
            let j = if i == 5 { 2 } else { i + 1 };
            assert!(l4.is_vertex(&[1, i, j]));
            assert!(l4.is_vertex(&[6, i, j]));
        }
        assert!(l4.find_isomorphism(&SimplePolytope::cube(3).unwrap()).is_some());
    }

    #[test]
    fn face_summaries() {
        let s = SimplePolytope::polygon(6).unwrap().face_summary();
        assert_eq!(s.f_vector, vec![6, 6, 1]);
        assert_eq!(s.h_vector, vec![1, 4, 1]);
        let q = SimplePolytope::q().unwrap().face_summary();
        assert_eq!(q.f_vector, vec![12, 18, 8, 1]);
        assert_eq!(q.h_vector, vec![1, 5, 5, 1]);
        let l = SimplePolytope::prism(7).unwrap().face_summary();
        assert_eq!(l.h_vector, vec![1, 6, 6, 1]);
        let c = SimplePolytope::cube(4).unwrap().face_summary();
        assert_eq!(c.f_vector[2], 2 * 4 * 3);
        assert_eq!(c.h_vector[2], 6);
    }

    #[test]
    fn q_tail_is_pinned() {
        let head: Vec<Vec<usize>> = ["123", "134", "145", "125", "258", "268", "236", "367", "347"]
            .iter()
            .map(|s| s.bytes().map(|b| (b - b'0') as usize).collect())
            .collect();
        let rest: Vec<Vec<usize>> = (1..=8).combinations(3).filter(|t| !head.contains(t)).collect();
        let completions: Vec<Vec<Vec<usize>>> = rest
            .iter()
            .cloned()
            .combinations(3)
            .filter(|extra| {
                let vs = head.iter().chain(extra.iter()).cloned().collect();
                SimplePolytope::new(3, 8, vs).is_ok()
            })
            .collect();
        let cut = SimplePolytope::prism(5).unwrap().edge_cut_3d(1, 2).unwrap();
        let matching: Vec<_> = completions
            .iter()
            .filter(|extra| {
                let vs = head.iter().chain(extra.iter()).cloned().collect();
                let p = SimplePolytope::new(3, 8, vs).unwrap();
                p.find_isomorphism(&cut).is_some()
            })
            .collect();
        // The three neighbour cycles leave two edge-cut shapes; only one has
        // F4 meeting F8, which the degree-4 basis element v4·v8 needs.
        assert_eq!(completions.len(), 5);
        assert_eq!(matching.len(), 2);
        let matching: Vec<_> = matching
            .into_iter()
            .filter(|extra| extra.iter().any(|v| v.contains(&4) && v.contains(&8)))
            .collect();
        assert_eq!(matching, vec![&vec![vec![4, 5, 8], vec![4, 7, 8], vec![6, 7, 8]]]);
        assert_eq!(SimplePolytope::q().unwrap().facet_degrees(), vec![4, 5, 5, 5, 4, 4, 4, 5]);
    }

    #[test]
    fn q_is_an_edge_cut_of_pentagonal_prism() {
        let p5 = SimplePolytope::prism(5).unwrap();
        // A horizontal edge: top facet against a side.
        let cut = p5.edge_cut_3d(1, 2).unwrap();
        assert_eq!(cut.vertices().len(), 12);
        assert!(cut.find_isomorphism(&SimplePolytope::q().unwrap()).is_some());
        let tri = SimplePolytope::simplex(3).unwrap().edge_cut_3d(1, 2).unwrap();
        assert!(tri.find_isomorphism(&SimplePolytope::prism(3).unwrap()).is_some());
        let c = SimplePolytope::cube(3).unwrap().edge_cut_3d(1, 2).unwrap();
        assert_eq!((c.num_facets(), c.vertices().len()), (7, 10));
        assert!(p5.edge_cut_3d(2, 4).is_err());
    }

    #[test]
    fn products() {
        let (p, maps) = SimplePolytope::polygon(4).unwrap().product(&SimplePolytope::simplex(1).unwrap());
        assert!(p.find_isomorphism(&SimplePolytope::cube(3).unwrap()).is_some());
        assert_eq!(maps.right, vec![5, 6]);
        let (p, _) = SimplePolytope::polygon(4).unwrap().product(&SimplePolytope::polygon(5).unwrap());
        assert_eq!((p.num_facets(), p.vertices().len()), (9, 20));
        let (p, _) = SimplePolytope::polygon(6).unwrap().product(&SimplePolytope::simplex(1).unwrap());
        assert!(p.find_isomorphism(&SimplePolytope::prism(6).unwrap()).is_some());
    }

    #[test]
    fn connected_sums() {
        let sq = SimplePolytope::polygon(4).unwrap();
        let (p, _) = sq.connected_sum(&[1, 2], &sq, &[1, 2], &[(1, 1), (2, 2)]).unwrap();
        assert!(p.find_isomorphism(&SimplePolytope::polygon(6).unwrap()).is_some());
        let tri = SimplePolytope::simplex(2).unwrap();
        let (p, _) = tri.connected_sum(&[1, 2], &tri, &[1, 2], &[(1, 2), (2, 1)]).unwrap();
        assert!(p.find_isomorphism(&sq).is_some());
        let c = SimplePolytope::cube(3).unwrap();
        let (p, maps) = c.connected_sum(&[4, 5, 6], &c, &[1, 2, 3], &[(4, 1), (5, 2), (6, 3)]).unwrap();
        assert_eq!((p.num_facets(), p.vertices().len()), (9, 14));
        assert_eq!(maps.right, vec![4, 5, 6, 7, 8, 9]);
        assert!(c.connected_sum(&[1, 2, 3], &c, &[1, 2, 3], &[(1, 1), (2, 2), (3, 2)]).is_err());
    }

    #[test]
    fn edge_connected_sums() {
        let l4 = SimplePolytope::prism(4).unwrap();
        // Vertical edges, top and bottom as the endpoint facets.
        let m = [(5, 4), (2, 3), (1, 1), (6, 6)];
        let (l6, _) = l4.edge_connected_sum(&[2, 5], &l4, &[3, 4], &m).unwrap();
        assert_eq!((l6.num_facets(), l6.vertices().len()), (8, 12));
        assert!(l6.find_isomorphism(&SimplePolytope::prism(6).unwrap()).is_some());
        // In the glued hexagonal prism the sides run 2,3,4,5,8,7.
        let m2 = [(7, 4), (2, 3), (1, 1), (6, 6)];
        let (l8, _) = l6.edge_connected_sum(&[2, 7], &l4, &[3, 4], &m2).unwrap();
        assert_eq!((l8.num_facets(), l8.vertices().len()), (10, 16));
        assert!(l8.find_isomorphism(&SimplePolytope::prism(8).unwrap()).is_some());
        assert!(l4.edge_connected_sum(&[2, 4], &l4, &[3, 4], &m).is_err());
        assert!(l4.edge_connected_sum(&[2, 5], &l4, &[3, 4], &[(5, 1), (2, 3), (1, 4), (6, 6)]).is_err());
    }

    #[test]
    fn colorings_and_obstructions() {
        let c = SimplePolytope::cube(4).unwrap().find_coloring(4).unwrap();
        assert!((1..=4).all(|i| c[i - 1] == c[i + 3]));
        assert!(SimplePolytope::polygon(5).unwrap().find_coloring(2).is_none());
        assert!(SimplePolytope::q().unwrap().find_coloring(3).is_none());
        assert!(SimplePolytope::prism(6).unwrap().find_coloring(3).is_some());
        for n in 2..5 {
            assert!(SimplePolytope::simplex(n).unwrap().key_obstruction().is_some());
        }
        assert!(SimplePolytope::cube(3).unwrap().key_obstruction().is_none());
        assert!(SimplePolytope::simplex(1).unwrap().key_obstruction().is_none());
        let (p, _) = SimplePolytope::cube(1).unwrap().product(&SimplePolytope::simplex(2).unwrap());
        assert!(p.key_obstruction().is_some());
    }

    #[test]
    fn automorphism_counts() {
        assert_eq!(SimplePolytope::cube(3).unwrap().automorphisms().unwrap().len(), 48);
        assert_eq!(SimplePolytope::polygon(5).unwrap().automorphisms().unwrap().len(), 10);
        assert_eq!(SimplePolytope::simplex(3).unwrap().automorphisms().unwrap().len(), 24);
    }

    proptest! {
        #[test]
        fn polygon_sums_and_products(a in 3usize..8, b in 3usize..8) {
            let p = SimplePolytope::polygon(a).unwrap();
            let q = SimplePolytope::polygon(b).unwrap();
            let (pq, _) = p.product(&q);
            prop_assert_eq!(pq.vertices().len(), a * b);
            check_dehn_sommerville(&pq);
            let (s, _) = p.connected_sum(&[1, 2], &q, &[2, 3], &[(1, 2), (2, 3)]).unwrap();
            prop_assert_eq!(s.num_facets(), a + b - 2);
            prop_assert_eq!(s.vertices().len(), a + b - 2);
        }

        #[test]
        fn relabel_preserves_summary(seed in 0u64..1000) {
            use rand::{seq::SliceRandom, SeedableRng};
            let q = SimplePolytope::q().unwrap();
            let mut perm: Vec<usize> = (1..=8).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let r = q.relabel(&perm).unwrap();
            prop_assert_eq!(r.face_summary().f_vector, q.face_summary().f_vector);
            let iso = q.find_isomorphism(&r).unwrap();
            let back = q.relabel(&iso).unwrap();
            prop_assert_eq!(back.vertices(), r.vertices());
        }
    }
}
