//! Degree-4 integral cohomology of a quasitoric manifold, presented on the
//! monomials `v_i v_j` in the free facets of a refined characteristic matrix.
//!
//! Identity-column variables are eliminated through the linear relations
//! `v_k = -Σ_j λ_{k,j} v_j`; each nonface pair `{a, b}` then contributes the
//! relation `v_a v_b = 0` expanded over the generators.

use crate::charmat::CharMatrix;
use crate::error::{Error, Result};
use crate::intmat::{self, Matrix};
use crate::polytope::SimplePolytope;
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use std::collections::BTreeMap;

/// A sparse integer combination of monomials `v_i v_j` (`i ≤ j`, labels are
/// facets).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClassExpr {
    pub terms: BTreeMap<(usize, usize), i64>,
}

impl ClassExpr {
    pub fn coeff(&self, i: usize, j: usize) -> i64 {
        let key = if i <= j { (i, j) } else { (j, i) };
        self.terms.get(&key).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeFourPresentation {
    /// Free facets (outside the initial vertex), ascending.
    pub free: Vec<usize>,
    /// Monomials `(i, j)`, `i ≤ j`, over the free facets in lexicographic order.
    pub generators: Vec<(usize, usize)>,
    /// The nonface pair behind each relation row.
    pub relation_pairs: Vec<(usize, usize)>,
    pub relations: Matrix,
    pub invariant_factors: Vec<BigInt>,
    pub quotient_rank: usize,
}

/// Linear form of `v_f` over the free facets.
pub(crate) fn linear_form(l: &CharMatrix, v: &[usize], free: &[usize], f: usize) -> Vec<i64> {
    match v.iter().position(|&x| x == f) {
        Some(k) => free.iter().map(|&j| -l.lam(k + 1, j)).collect(),
        None => free.iter().map(|&j| i64::from(j == f)).collect(),
    }
}

/// Coefficients of `x · y` on the monomials of `r` variables.
pub(crate) fn mul_forms(x: &[i64], y: &[i64]) -> Vec<i64> {
    let r = x.len();
    let mut out = vec![0i64; r * (r + 1) / 2];
    let mut idx = 0;
    for p in 0..r {
        for q in p..r {
            out[idx] = if p == q { x[p] * y[p] } else { x[p] * y[q] + x[q] * y[p] };
            idx += 1;
        }
    }
    out
}

fn monomials(free: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (p, &i) in free.iter().enumerate() {
        for &j in &free[p..] {
            out.push((i, j));
        }
    }
    out
}

impl DegreeFourPresentation {
    pub fn index_of(&self, i: usize, j: usize) -> Option<usize> {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let p = self.free.iter().position(|&x| x == i)?;
        let q = self.free.iter().position(|&x| x == j)?;
        let r = self.free.len();
        Some(p * r - p * (p + 1) / 2 + q)
    }

    pub fn to_dense(&self, e: &ClassExpr) -> Result<Vec<i64>> {
        let mut out = vec![0; self.generators.len()];
        for (&(i, j), &c) in &e.terms {
            let k = self
                .index_of(i, j)
                .ok_or_else(|| Error::Shape(format!("v{i}·v{j} is not a generator")))?;
            out[k] += c;
        }
        Ok(out)
    }

    pub fn to_expr(&self, dense: &[i64]) -> ClassExpr {
        ClassExpr {
            terms: self.generators.iter().zip(dense).filter(|(_, &c)| c != 0).map(|(&g, &c)| (g, c)).collect(),
        }
    }

    pub fn snf_ok(&self) -> bool {
        self.invariant_factors.iter().all(One::is_one) && self.invariant_factors.len() == self.relations.len()
    }
}

fn expand(l: &CharMatrix, v: &[usize], free: &[usize], a: usize, b: usize) -> Vec<i64> {
    mul_forms(&linear_form(l, v, free, a), &linear_form(l, v, free, b))
}

/// Builds the presentation and checks its certificate: every invariant
/// factor is 1, no relation is redundant and the quotient rank is `h₂`.
pub fn presentation_deg4(p: &SimplePolytope, l: &CharMatrix) -> Result<DegreeFourPresentation> {
    crate::charmat::ensure_valid(p, l)?;
    let s = p.face_summary();
    let h2 = if p.dim() >= 2 { s.h_vector[2] } else { 0 };
    presentation_with(l, &s.nonface_pairs, h2)
}

pub(crate) fn presentation_with(l: &CharMatrix, nonfaces: &[(usize, usize)], h2: i64) -> Result<DegreeFourPresentation> {
    let v = l.refined_at().ok_or(Error::NotRefined)?.to_vec();
    let free = l.free_facets()?;
    let generators = monomials(&free);
    let relations: Matrix = nonfaces.iter().map(|&(a, b)| expand(l, &v, &free, a, b)).collect();
    let invariant_factors = if relations.is_empty() { Vec::new() } else { intmat::invariant_factors(&relations) };
    let quotient_rank = generators.len() - invariant_factors.len();
    let pres = DegreeFourPresentation {
        free,
        generators,
        relation_pairs: nonfaces.to_vec(),
        relations,
        invariant_factors,
        quotient_rank,
    };
    if !pres.snf_ok() {
        return Err(Error::Contradiction(format!(
            "degree-4 relations are not a saturated independent set: factors {:?} for {} rows",
            pres.invariant_factors.iter().map(ToString::to_string).collect::<Vec<_>>(),
            pres.relations.len()
        )));
    }
    if pres.quotient_rank as i64 != h2 {
        return Err(Error::Contradiction(format!("quotient rank {} differs from h2 = {h2}", pres.quotient_rank)));
    }
    Ok(pres)
}

/// `w₂ = 0`: every free column of the refined matrix has odd entry sum.
pub fn w2_is_zero(l: &CharMatrix) -> Result<bool> {
    Ok(l.free_facets()?.iter().all(|&j| l.column(j).iter().sum::<i64>().rem_euclid(2) == 1))
}

/// `p₁ = Σ_j v_j²` over all facets, with the identity-column variables
/// substituted, before any relation is applied.
pub fn p1_vector(l: &CharMatrix) -> Result<ClassExpr> {
    let v = l.refined_at().ok_or(Error::NotRefined)?.to_vec();
    let free = l.free_facets()?;
    let dense = p1_dense(l, &v, &free);
    Ok(ClassExpr { terms: monomials(&free).into_iter().zip(dense).filter(|&(_, c)| c != 0).collect() })
}

pub(crate) fn p1_dense(l: &CharMatrix, v: &[usize], free: &[usize]) -> Vec<i64> {
    let r = free.len();
    let mut out = vec![0i64; r * (r + 1) / 2];
    for f in 1..=l.m() {
        let x = linear_form(l, v, free, f);
        for (o, t) in out.iter_mut().zip(mul_forms(&x, &x)) {
            *o += t;
        }
    }
    out
}

/// `v_a · v_b` expanded over the generators.
pub fn monomial_expr(l: &CharMatrix, a: usize, b: usize) -> Result<ClassExpr> {
    let v = l.refined_at().ok_or(Error::NotRefined)?.to_vec();
    let free = l.free_facets()?;
    let dense = expand(l, &v, &free, a, b);
    Ok(ClassExpr { terms: monomials(&free).into_iter().zip(dense).filter(|&(_, c)| c != 0).collect() })
}

pub fn is_zero_in_h4(pres: &DegreeFourPresentation, e: &ClassExpr) -> Result<bool> {
    Ok(intmat::in_row_lattice(&pres.relations, &pres.to_dense(e)?))
}

/// Reduction modulo relations onto a fixed basis of the quotient.
///
/// With `N` the non-basis generators, `R_N` is square and unimodular, and
/// `x ≡ Σ c_b b` with `c = x_B - x_N · R_N⁻¹ R_B`.
#[derive(Clone, Debug)]
pub struct BasisReducer {
    pub basis: Vec<(usize, usize)>,
    basis_idx: Vec<usize>,
    other_idx: Vec<usize>,
    k: Vec<Vec<BigInt>>,
}

impl BasisReducer {
    pub fn new(pres: &DegreeFourPresentation, basis: &[(usize, usize)]) -> Result<Self> {
        let not_basis = |msg: String| Error::NotABasis(msg);
        if basis.len() != pres.quotient_rank {
            return Err(not_basis(format!("{} elements for rank {}", basis.len(), pres.quotient_rank)));
        }
        let basis_idx = basis
            .iter()
            .map(|&(i, j)| pres.index_of(i, j).ok_or_else(|| not_basis(format!("v{i}·v{j} is not a generator"))))
            .collect::<Result<Vec<_>>>()?;
        let other_idx: Vec<usize> = (0..pres.generators.len()).filter(|k| !basis_idx.contains(k)).collect();
        if other_idx.len() + basis_idx.len() != pres.generators.len() {
            return Err(not_basis("repeated basis element".into()));
        }
        let pick = |cols: &[usize]| -> Matrix { pres.relations.iter().map(|r| cols.iter().map(|&c| r[c]).collect()).collect() };
        let rn = pick(&other_idx);
        let rb = pick(&basis_idx);
        let inv = intmat::unimodular_inverse(&rn).ok_or_else(|| not_basis(format!("{basis:?} does not span the quotient over Z")))?;
        let rb_big: Vec<Vec<BigInt>> = rb.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        let k = if rn.is_empty() { Vec::new() } else { intmat::mul_big(&inv, &rb_big) };
        Ok(Self { basis: basis.to_vec(), basis_idx, other_idx, k })
    }

    pub fn reduce_dense(&self, x: &[i64]) -> Result<Vec<i64>> {
        self.basis_idx
            .iter()
            .enumerate()
            .map(|(b, &bi)| {
                let mut c = BigInt::from(x[bi]);
                for (row, &ni) in self.other_idx.iter().enumerate() {
                    if x[ni] != 0 {
                        c -= &self.k[row][b] * x[ni];
                    }
                }
                c.to_i64().ok_or_else(|| Error::Shape("coefficient overflows i64".into()))
            })
            .collect()
    }

    pub fn reduce(&self, pres: &DegreeFourPresentation, e: &ClassExpr) -> Result<Vec<i64>> {
        self.reduce_dense(&pres.to_dense(e)?)
    }
}

pub fn reduce_to_basis(pres: &DegreeFourPresentation, e: &ClassExpr, basis: &[(usize, usize)]) -> Result<Vec<i64>> {
    BasisReducer::new(pres, basis)?.reduce(pres, e)
}

/// The lexicographically first generators that extend to a basis of the
/// quotient: a generator is kept when the relations together with the kept
/// unit vectors stay saturated and independent.
pub fn greedy_basis(pres: &DegreeFourPresentation) -> Vec<(usize, usize)> {
    let g = pres.generators.len();
    let mut stack = pres.relations.clone();
    let mut basis = Vec::new();
    for (k, &gen) in pres.generators.iter().enumerate() {
        if basis.len() == pres.quotient_rank {
            break;
        }
        let mut unit = vec![0; g];
        unit[k] = 1;
        stack.push(unit);
        let f = intmat::invariant_factors(&stack);
        if f.len() == stack.len() && f.iter().all(One::is_one) {
            basis.push(gen);
        } else {
            stack.pop();
        }
    }
    debug_assert!(basis.len() == pres.quotient_rank || pres.relations.is_empty() && basis.is_empty());
    basis
}

/// Spin and string verdicts with the presentation used.
#[derive(Clone, Debug)]
pub struct ClassReport {
    pub spin: bool,
    pub string: bool,
    pub presentation: DegreeFourPresentation,
    pub p1: ClassExpr,
}

pub fn classes(p: &SimplePolytope, l: &CharMatrix) -> Result<ClassReport> {
    let presentation = presentation_deg4(p, l)?;
    let spin = w2_is_zero(l)?;
    let p1 = p1_vector(l)?;
    let string = spin && is_zero_in_h4(&presentation, &p1)?;
    Ok(ClassReport { spin, string, presentation, p1 })
}
