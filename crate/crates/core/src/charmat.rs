//! Characteristic matrices: validation, refinement to `[I | Λ*]`, the three
//! equivalence moves, canonical keys and weight vectors at vertices.

use crate::error::{Error, Result};
use crate::intmat::{self, Matrix};
use crate::polytope::SimplePolytope;

/// An `n × m` integer matrix whose column `j` is the vector of facet `j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CharMatrix {
    rows: Matrix,
    refined_at: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EquivalenceMove {
    RowBasisChange(Matrix),
    ColumnSignFlip(usize),
    /// Facet `j` moves to position `perm[j - 1]`.
    FacetPermutation(Vec<usize>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dedup {
    None,
    Signs,
    SignsAndAutomorphisms,
}

impl CharMatrix {
    pub fn new(rows: Matrix) -> Result<Self> {
        let m = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || m == 0 || rows.iter().any(|r| r.len() != m) {
            return Err(Error::Shape("matrix must be a nonempty rectangle".into()));
        }
        let mut out = Self { rows, refined_at: None };
        out.detect_refinement();
        Ok(out)
    }

    /// Marks the matrix refined at `{1..n}` when its leading block is `I`.
    fn detect_refinement(&mut self) {
        let v: Vec<usize> = (1..=self.n()).collect();
        if self.m() >= self.n() && self.is_identity_at(&v) {
            self.refined_at = Some(v);
        }
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn m(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &Matrix {
        &self.rows
    }

    pub fn into_rows(self) -> Matrix {
        self.rows
    }

    /// `λ_{k,j}` with 1-based row `k` and facet `j`.
    pub fn lam(&self, k: usize, j: usize) -> i64 {
        self.rows[k - 1][j - 1]
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        self.rows.iter().map(|r| r[j - 1]).collect()
    }

    /// The square submatrix on the given facets, in the given order.
    pub fn columns(&self, facets: &[usize]) -> Matrix {
        self.rows.iter().map(|r| facets.iter().map(|&j| r[j - 1]).collect()).collect()
    }

    pub fn refined_at(&self) -> Option<&[usize]> {
        self.refined_at.as_deref()
    }

    /// Facets outside the initial vertex, ascending.
    pub fn free_facets(&self) -> Result<Vec<usize>> {
        let v = self.refined_at.as_ref().ok_or(Error::NotRefined)?;
        Ok((1..=self.m()).filter(|j| !v.contains(j)).collect())
    }

    pub fn is_identity_at(&self, v: &[usize]) -> bool {
        v.iter().enumerate().all(|(c, &j)| (0..self.n()).all(|k| self.rows[k][j - 1] == i64::from(k == c)))
    }

    /// Record that the columns at `v` (ascending) form the identity.
    pub fn mark_refined(mut self, v: &[usize]) -> Result<Self> {
        let mut v = v.to_vec();
        v.sort_unstable();
        if v.len() != self.n() || !self.is_identity_at(&v) {
            return Err(Error::NotRefined);
        }
        self.refined_at = Some(v);
        Ok(self)
    }

    fn check_shape(&self, p: &SimplePolytope) -> Result<()> {
        if self.n() != p.dim() || self.m() != p.num_facets() {
            return Err(Error::Shape(format!(
                "matrix is {}x{}, polytope has dim {} and {} facets",
                self.n(),
                self.m(),
                p.dim(),
                p.num_facets()
            )));
        }
        Ok(())
    }
}

/// The first vertex whose submatrix is not unimodular, or `None`.
pub fn validate(p: &SimplePolytope, l: &CharMatrix) -> Result<Option<Vec<usize>>> {
    l.check_shape(p)?;
    Ok(p.vertices().iter().find(|v| !is_unimodular(&l.columns(v))).cloned())
}

pub fn ensure_valid(p: &SimplePolytope, l: &CharMatrix) -> Result<()> {
    match validate(p, l)? {
        None => Ok(()),
        Some(v) => {
            let det = intmat::det(&l.columns(&v)).to_string();
            Err(Error::Singular { vertex: v, det })
        }
    }
}

pub(crate) fn is_unimodular(a: &[Vec<i64>]) -> bool {
    matches!(intmat::det_i128(a), Some(1) | Some(-1))
}

/// `Λ_v⁻¹ · Λ`: the columns at `v` become the identity, in ascending order.
pub fn refine(p: &SimplePolytope, l: &CharMatrix, v: &[usize]) -> Result<CharMatrix> {
    l.check_shape(p)?;
    let mut v = v.to_vec();
    v.sort_unstable();
    if !p.is_vertex(&v) {
        return Err(Error::NotAVertex(v));
    }
    ensure_valid(p, l)?;
    if l.refined_at.as_deref() == Some(&v[..]) {
        return Ok(l.clone());
    }
    refine_unchecked(l, &v)
}

/// Refinement without the polytope-wide validity check; `v` must be sorted.
pub(crate) fn refine_unchecked(l: &CharMatrix, v: &[usize]) -> Result<CharMatrix> {
    let u = intmat::unimodular_inverse_i64(&l.columns(v)).ok_or_else(|| Error::Singular {
        vertex: v.to_vec(),
        det: intmat::det(&l.columns(v)).to_string(),
    })?;
    let rows = intmat::mul(&u, &l.rows).ok_or_else(|| Error::Shape("refined entries overflow i64".into()))?;
    Ok(CharMatrix { rows, refined_at: Some(v.to_vec()) })
}

pub fn transform(p: &SimplePolytope, l: &CharMatrix, mv: &EquivalenceMove) -> Result<CharMatrix> {
    l.check_shape(p)?;
    let out = match mv {
        EquivalenceMove::RowBasisChange(u) => {
            if u.len() != l.n() || !is_unimodular(u) {
                return Err(Error::InvalidMove("row change is not unimodular".into()));
            }
            let rows = intmat::mul(u, &l.rows).ok_or_else(|| Error::Shape("entries overflow i64".into()))?;
            CharMatrix::new(rows)?
        }
        EquivalenceMove::ColumnSignFlip(j) => {
            if *j == 0 || *j > l.m() {
                return Err(Error::InvalidMove(format!("no facet {j}")));
            }
            let mut rows = l.rows.clone();
            for r in &mut rows {
                r[j - 1] = -r[j - 1];
            }
            CharMatrix::new(rows)?
        }
        EquivalenceMove::FacetPermutation(perm) => {
            let q = p.relabel(perm).map_err(|_| Error::InvalidMove("not a permutation".into()))?;
            if q.vertices() != p.vertices() {
                return Err(Error::InvalidMove("permutation is not an automorphism".into()));
            }
            CharMatrix::new(permute_columns(&l.rows, perm))?
        }
    };
    let out = match &l.refined_at {
        Some(v) if out.is_identity_at(v) => out.mark_refined(v)?,
        _ => out,
    };
    ensure_valid(p, &out)?;
    Ok(out)
}

/// Column `j` of the input lands at column `perm[j - 1]`.
pub fn permute_columns(rows: &[Vec<i64>], perm: &[usize]) -> Matrix {
    rows.iter()
        .map(|r| {
            let mut out = vec![0; r.len()];
            for (j, &x) in r.iter().enumerate() {
                out[perm[j] - 1] = x;
            }
            out
        })
        .collect()
}

/// Makes the first nonzero entry of every free column positive.
pub fn normalize_free_signs(l: &mut CharMatrix) -> Result<()> {
    for j in l.free_facets()? {
        if let Some(&x) = l.rows.iter().map(|r| &r[j - 1]).find(|&&x| x != 0) {
            if x < 0 {
                for r in &mut l.rows {
                    r[j - 1] = -r[j - 1];
                }
            }
        }
    }
    Ok(())
}

/// Lexicographically least row-major entry list over the chosen orbit.
///
/// Sign changes of identity columns are absorbed by negating the matching
/// row, so the signs orbit is `diag(s) · Λ · diag(t)`; with automorphisms,
/// each permuted matrix is re-refined at the same initial vertex first.
pub fn canonical_key(p: &SimplePolytope, l: &CharMatrix, group: Dedup) -> Result<Vec<i64>> {
    let v = l.refined_at.clone().ok_or(Error::NotRefined)?;
    match group {
        Dedup::None => Ok(l.rows.concat()),
        Dedup::Signs => Ok(sign_key(l)),
        Dedup::SignsAndAutomorphisms => {
            let Some(auts) = p.automorphisms() else {
                return Ok(sign_key(l));
            };
            let mut best: Option<Vec<i64>> = None;
            for perm in auts {
                let moved = CharMatrix { rows: permute_columns(&l.rows, &perm), refined_at: None };
                let r = refine_unchecked(&moved, &v)?;
                let k = sign_key(&r);
                if best.as_ref().map_or(true, |b| k < *b) {
                    best = Some(k);
                }
            }
            Ok(best.expect("identity is an automorphism"))
        }
    }
}

fn sign_key(l: &CharMatrix) -> Vec<i64> {
    let n = l.n();
    let free = l.free_facets().expect("refined");
    let mut best: Option<Vec<i64>> = None;
    for s in 0u32..1 << n {
        let mut rows: Matrix = l
            .rows
            .iter()
            .enumerate()
            .map(|(k, r)| if s >> k & 1 == 1 { r.iter().map(|x| -x).collect() } else { r.clone() })
            .collect();
        // Negating row k also negates identity column k; flip it back.
        for (k, &j) in l.refined_at.as_ref().expect("refined").iter().enumerate() {
            if s >> k & 1 == 1 {
                for r in rows.iter_mut() {
                    r[j - 1] = -r[j - 1];
                }
            }
        }
        for &j in &free {
            if let Some(&x) = rows.iter().map(|r| &r[j - 1]).find(|&&x| x != 0) {
                if x < 0 {
                    for r in rows.iter_mut() {
                        r[j - 1] = -r[j - 1];
                    }
                }
            }
        }
        let k = rows.concat();
        if best.as_ref().map_or(true, |b| k < *b) {
            best = Some(k);
        }
    }
    best.expect("at least one sign vector")
}

/// Weight vectors `w_1..w_n` at `v`: the columns of `(Λ_v⁻¹)ᵀ`, so that
/// `⟨w_a, λ_{j_b}⟩ = δ_{ab}`.
pub fn weights_at_vertex(p: &SimplePolytope, l: &CharMatrix, v: &[usize]) -> Result<Matrix> {
    l.check_shape(p)?;
    let mut v = v.to_vec();
    v.sort_unstable();
    if !p.is_vertex(&v) {
        return Err(Error::NotAVertex(v));
    }
    let inv = intmat::unimodular_inverse_i64(&l.columns(&v)).ok_or_else(|| Error::Singular {
        vertex: v.clone(),
        det: intmat::det(&l.columns(&v)).to_string(),
    })?;
    // Row a of the inverse is w_a.
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cp2(d1: i64, d2: i64) -> CharMatrix {
        CharMatrix::new(vec![vec![1, 0, d1], vec![0, 1, d2]]).unwrap()
    }

    #[test]
    fn validation() {
        let t = SimplePolytope::simplex(2).unwrap();
        for (a, b) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
            assert_eq!(validate(&t, &cp2(a, b)).unwrap(), None);
        }
        let bad = CharMatrix::new(vec![vec![1, 0, 2], vec![0, 1, 1]]).unwrap();
        assert_eq!(validate(&t, &bad).unwrap(), Some(vec![2, 3]));
        assert!(matches!(ensure_valid(&t, &bad), Err(Error::Singular { det, .. }) if det == "-2"));
        assert!(validate(&SimplePolytope::polygon(4).unwrap(), &bad).is_err());
    }

    #[test]
    fn refinement() {
        let t = SimplePolytope::simplex(2).unwrap();
        let l = cp2(1, 1);
        assert_eq!(l.refined_at(), Some(&[1, 2][..]));
        assert_eq!(refine(&t, &l, &[1, 2]).unwrap(), l);
        let r = refine(&t, &l, &[2, 3]).unwrap();
        assert_eq!(r.refined_at(), Some(&[2, 3][..]));
        assert!(r.column(1).iter().all(|x| x.abs() == 1));
        assert_eq!(refine(&t, &r, &[2, 3]).unwrap(), r);
    }

    #[test]
    fn weights_match_cp2() {
        let t = SimplePolytope::simplex(2).unwrap();
        assert_eq!(weights_at_vertex(&t, &cp2(1, 1), &[2, 3]).unwrap(), vec![vec![-1, 1], vec![1, 0]]);
        assert_eq!(weights_at_vertex(&t, &cp2(-1, -1), &[2, 3]).unwrap(), vec![vec![-1, 1], vec![-1, 0]]);
        assert_eq!(weights_at_vertex(&t, &cp2(1, 1), &[1, 2]).unwrap(), intmat::identity(2));
    }

    #[test]
    fn moves() {
        let t = SimplePolytope::simplex(2).unwrap();
        let l = cp2(1, 1);
        let same = transform(&t, &l, &EquivalenceMove::RowBasisChange(intmat::identity(2))).unwrap();
        assert_eq!(same, l);
        let f = transform(&t, &l, &EquivalenceMove::ColumnSignFlip(3)).unwrap();
        assert_eq!(f.rows(), &vec![vec![1, 0, -1], vec![0, 1, -1]]);
        assert!(transform(&t, &l, &EquivalenceMove::RowBasisChange(vec![vec![2, 0], vec![0, 1]])).is_err());
        let sq = SimplePolytope::polygon(4).unwrap();
        let l4 = CharMatrix::new(vec![vec![1, 0, -1, 0], vec![0, 1, 0, -1]]).unwrap();
        assert!(transform(&sq, &l4, &EquivalenceMove::FacetPermutation(vec![1, 3, 2, 4])).is_err());
        let rot = transform(&sq, &l4, &EquivalenceMove::FacetPermutation(vec![2, 3, 4, 1])).unwrap();
        assert_eq!(rot.refined_at(), None);
    }

    #[test]
    fn cube_family_keys_differ() {
        let c = SimplePolytope::cube(3).unwrap();
        let fam = |x: i64, y: i64| {
            CharMatrix::new(vec![vec![1, 0, 0, 1, 0, x], vec![0, 1, 0, 0, 1, y], vec![0, 0, 1, 0, 0, 1]]).unwrap()
        };
        let k = |l: &CharMatrix| canonical_key(&c, l, Dedup::SignsAndAutomorphisms).unwrap();
        assert_ne!(k(&fam(0, 2)), k(&fam(0, 4)));
        assert_eq!(k(&fam(0, 2)), k(&fam(0, -2)));
        assert_eq!(k(&fam(0, 2)), k(&fam(2, 0)));
    }

    fn random_valid_square(seed: u64) -> CharMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let sq = SimplePolytope::polygon(6).unwrap();
        loop {
            let mut rows = vec![vec![1, 0, 0, 0, 0, 0], vec![0, 1, 0, 0, 0, 0]];
            for r in rows.iter_mut() {
                for x in r.iter_mut().skip(2) {
                    *x = rng.gen_range(-3..=3);
                }
            }
            let l = CharMatrix::new(rows).unwrap();
            if validate(&sq, &l).unwrap().is_none() {
                return l;
            }
        }
    }

    proptest! {
        #[test]
        fn refine_weights_and_keys(seed in 0u64..400) {
            let p = SimplePolytope::polygon(6).unwrap();
            let l = random_valid_square(seed);
            for v in p.vertices() {
                let w = weights_at_vertex(&p, &l, v).unwrap();
                let wt_lv = intmat::mul(&w, &l.columns(v)).unwrap();
                prop_assert_eq!(wt_lv, intmat::identity(2));
                let r = refine(&p, &l, v).unwrap();
                prop_assert!(r.is_identity_at(v));
                prop_assert_eq!(refine(&p, &r, v).unwrap(), r.clone());
                prop_assert!(validate(&p, &r).unwrap().is_none());
            }
            let key = canonical_key(&p, &l, Dedup::Signs).unwrap();
            for j in 1..=6 {
                let f = transform(&p, &l, &EquivalenceMove::ColumnSignFlip(j)).unwrap();
                let f = refine(&p, &f, &[1, 2]).unwrap();
                prop_assert_eq!(&canonical_key(&p, &f, Dedup::Signs).unwrap(), &key);
            }
            let full = canonical_key(&p, &l, Dedup::SignsAndAutomorphisms).unwrap();
            let rot = transform(&p, &l, &EquivalenceMove::FacetPermutation(vec![2, 3, 4, 5, 6, 1])).unwrap();
            let rot = refine(&p, &rot, &[1, 2]).unwrap();
            prop_assert_eq!(canonical_key(&p, &rot, Dedup::SignsAndAutomorphisms).unwrap(), full);
        }
    }
}
