//! Spin and string decisions: the general degree-4 engine, and closed-form
//! coefficient formulas for polygons, prisms, cubes, pentagonal prisms and
//! `Q × I^{n-3}`, each checked against the engine.

use crate::charmat::{self, CharMatrix};
use crate::cohomology::{self, BasisReducer, ClassReport, DegreeFourPresentation};
use crate::error::{Error, Result};
use crate::polytope::SimplePolytope;
use std::collections::BTreeMap;

pub type Coefficients = BTreeMap<(usize, usize), i64>;

/// Refines at the lexicographically first vertex unless already refined.
pub fn ensure_refined(p: &SimplePolytope, l: &CharMatrix) -> Result<CharMatrix> {
    match l.refined_at() {
        Some(_) => {
            charmat::ensure_valid(p, l)?;
            Ok(l.clone())
        }
        None => charmat::refine(p, l, &p.vertices()[0]),
    }
}

pub fn check(p: &SimplePolytope, l: &CharMatrix) -> Result<ClassReport> {
    cohomology::classes(p, &ensure_refined(p, l)?)
}

pub fn is_spin(p: &SimplePolytope, l: &CharMatrix) -> Result<bool> {
    cohomology::w2_is_zero(&ensure_refined(p, l)?)
}

pub fn is_string(p: &SimplePolytope, l: &CharMatrix) -> Result<bool> {
    Ok(check(p, l)?.string)
}

/// Per-polytope data reused across many matrices.
#[derive(Clone, Debug)]
pub struct StringEngine {
    nonfaces: Vec<(usize, usize)>,
    h2: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub spin: bool,
    pub string: bool,
}

impl StringEngine {
    pub fn new(p: &SimplePolytope) -> Self {
        let s = p.face_summary();
        let h2 = if p.dim() >= 2 { s.h_vector[2] } else { 0 };
        Self { nonfaces: s.nonface_pairs, h2 }
    }

    /// Presentation of a refined matrix, with its Smith certificate checked.
    pub fn presentation(&self, l: &CharMatrix) -> Result<DegreeFourPresentation> {
        cohomology::presentation_with(l, &self.nonfaces, self.h2)
    }

    /// Spin and string verdict for a valid refined matrix.
    pub fn verdict(&self, l: &CharMatrix) -> Result<Verdict> {
        let pres = self.presentation(l)?;
        let spin = cohomology::w2_is_zero(l)?;
        let string = spin && cohomology::is_zero_in_h4(&pres, &cohomology::p1_vector(l)?)?;
        Ok(Verdict { spin, string })
    }
}

/// `p₁` reduced onto `basis` by the general engine.
pub fn engine_coefficients(p: &SimplePolytope, l: &CharMatrix, basis: &[(usize, usize)]) -> Result<Coefficients> {
    let l = ensure_refined(p, l)?;
    let pres = cohomology::presentation_deg4(p, &l)?;
    let red = BasisReducer::new(&pres, basis)?;
    let c = red.reduce(&pres, &cohomology::p1_vector(&l)?)?;
    Ok(basis.iter().copied().zip(c).collect())
}

// ---- shared scalar helpers ----

struct Scalars<'a> {
    l: &'a CharMatrix,
}

impl Scalars<'_> {
    fn lam(&self, k: usize, j: usize) -> i64 {
        self.l.lam(k, j)
    }

    /// `Σ_k λ_{k,i}² + 1` over all rows.
    fn rho(&self, i: usize) -> i64 {
        self.l.column(i).iter().map(|x| x * x).sum::<i64>() + 1
    }

    /// `2 Σ_k λ_{k,i} λ_{k,j}`.
    fn rho2(&self, i: usize, j: usize) -> i64 {
        2 * self.l.column(i).iter().zip(self.l.column(j)).map(|(a, b)| a * b).sum::<i64>()
    }

    /// 2×2 minor on rows `r, r+1`.
    fn d2(&self, r: usize, i: usize, j: usize) -> i64 {
        self.lam(r, i) * self.lam(r + 1, j) - self.lam(r, j) * self.lam(r + 1, i)
    }

    /// 3×3 minor on rows 1..3.
    fn d3(&self, i: usize, j: usize, k: usize) -> i64 {
        let c = |x: usize| [self.lam(1, x), self.lam(2, x), self.lam(3, x)];
        let (a, b, d) = (c(i), c(j), c(k));
        a[0] * (b[1] * d[2] - b[2] * d[1]) - b[0] * (a[1] * d[2] - a[2] * d[1]) + d[0] * (a[1] * b[2] - a[2] * b[1])
    }
}

fn labeling(family: &'static str, detail: impl Into<String>) -> Error {
    Error::Labeling { family, detail: detail.into() }
}

fn expect_polytope(family: &'static str, p: &SimplePolytope, expected: &SimplePolytope) -> Result<()> {
    if p.dim() != expected.dim() || p.vertices() != expected.vertices() {
        return Err(labeling(family, "polytope does not carry the expected facet labels"));
    }
    Ok(())
}

fn expect_form(family: &'static str, l: &CharMatrix, v: &[usize], pins: &[(usize, usize)]) -> Result<()> {
    if l.refined_at() != Some(v) {
        return Err(labeling(family, format!("matrix must be refined at {v:?}")));
    }
    if let Some(&(k, j)) = pins.iter().find(|&&(k, j)| l.lam(k, j) != 1) {
        return Err(labeling(family, format!("entry λ[{k},{j}] must be normalized to 1")));
    }
    Ok(())
}

/// Flip free columns so the pinned entries become 1 (they are ±1 on any
/// valid matrix in the family's refined form).
pub fn pin_signs(l: &CharMatrix, pins: &[(usize, usize)]) -> Result<CharMatrix> {
    let v = l.refined_at().ok_or(Error::NotRefined)?.to_vec();
    let mut rows = l.rows().clone();
    for &(k, j) in pins {
        match rows[k - 1][j - 1] {
            1 => {}
            -1 => rows.iter_mut().for_each(|r| r[j - 1] = -r[j - 1]),
            x => return Err(Error::Precondition(format!("λ[{k},{j}] = {x}, expected ±1"))),
        }
    }
    CharMatrix::new(rows)?.mark_refined(&v)
}

// ---- polygons ----

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolygonClosedForm {
    pub l: Vec<i64>,
    pub total: i64,
}

/// `l_i = Δ_{i-1,i} Δ_{i,i+1} Δ_{i+1,i-1}` (indices mod `m`) and their sum,
/// the coefficient of `p₁` on `v₁v₂`.
pub fn polygon_closed_form(l: &CharMatrix) -> Result<PolygonClosedForm> {
    if l.n() != 2 || l.m() < 3 {
        return Err(Error::Shape("polygon closed form needs a 2 x m matrix, m >= 3".into()));
    }
    let m = l.m();
    let s = Scalars { l };
    let w = |x: usize| (x + m - 1) % m + 1;
    let d = |i: usize, j: usize| s.d2(1, w(i), w(j));
    let ls: Vec<i64> = (1..=m).map(|i| d(i + m - 1, i) * d(i, i + 1) * d(i + 1, i + m - 1)).collect();
    let total = ls.iter().sum();
    Ok(PolygonClosedForm { l: ls, total })
}

/// Engine coefficient of `p₁` and of `v₁v₂` on the single generator of
/// `H⁴`; the closed form predicts `coefficient = total · unit`.
pub fn polygon_engine(p: &SimplePolytope, l: &CharMatrix) -> Result<(i64, i64)> {
    let l = ensure_refined(p, l)?;
    let pres = cohomology::presentation_deg4(p, &l)?;
    let basis = cohomology::greedy_basis(&pres);
    let red = BasisReducer::new(&pres, &basis)?;
    let c = red.reduce(&pres, &cohomology::p1_vector(&l)?)?[0];
    let u = red.reduce(&pres, &cohomology::monomial_expr(&l, 1, 2)?)?[0];
    Ok((c, u))
}

/// All free columns of a refined 2-row matrix have odd entry sum.
pub fn polygon_parity_criterion(l: &CharMatrix) -> Result<bool> {
    if l.n() != 2 {
        return Err(Error::Shape("parity criterion needs 2 rows".into()));
    }
    cohomology::w2_is_zero(l)
}

// ---- prisms L_{2k} ----

pub fn prism_pins(k: usize) -> Vec<(usize, usize)> {
    vec![(2, 4), (3, 2 * k + 1), (1, 2 * k + 2)]
}

pub fn prism_basis(k: usize) -> Vec<(usize, usize)> {
    let mut b: Vec<(usize, usize)> = (4..=2 * k + 1).map(|i| (i, 2 * k + 2)).collect();
    b.push((k + 2, k + 3));
    b.sort_unstable();
    b
}

fn prism_k(p: &SimplePolytope) -> Result<usize> {
    let m = p.num_facets();
    if p.dim() != 3 || m < 6 || m % 2 != 0 {
        return Err(labeling("prism", "not an even prism"));
    }
    let k = (m - 2) / 2;
    expect_polytope("prism", p, &SimplePolytope::prism(2 * k)?)?;
    Ok(k)
}

/// Refine at `F₁ ∩ F₂ ∩ F₃` and pin `λ_{2,4} = λ_{3,2k+1} = λ_{1,2k+2} = 1`.
pub fn prism_normalize(p: &SimplePolytope, l: &CharMatrix) -> Result<CharMatrix> {
    let k = prism_k(p)?;
    pin_signs(&charmat::refine(p, l, &[1, 2, 3])?, &prism_pins(k))
}

pub fn prism_closed_form(p: &SimplePolytope, l: &CharMatrix) -> Result<Coefficients> {
    let k = prism_k(p)?;
    expect_form("prism", l, &[1, 2, 3], &prism_pins(k))?;
    let s = Scalars { l };
    let top = 2 * k + 2;
    // Side indices run over 2..=2k+1 cyclically; the bottom facet is never wrapped.
    let w = |x: usize| (x + 2 * k - 2) % (2 * k) + 2;
    let d = |i: usize, j: usize| s.d2(2, w(i), w(j));
    let rho = |i: usize| s.rho(w(i));
    let rho2 = |i: usize, j: usize| s.rho2(w(i), w(j));
    let li = |i: usize| d(i - 1, i) * d(i, i + 1) * d(i + 1, i - 1);
    let db = |i: usize| s.d2(2, w(i), top);
    let mut out = Coefficients::new();
    let cyc: i64 = (2..=2 * k + 1).map(|i| li(i) * rho(i) + d(i, i + 1) * rho2(i, i + 1)).sum();
    out.insert((k + 2, k + 3), d(k + 2, k + 3) * cyc);
    for i in 4..=k + 2 {
        let tail: i64 = (4..i).map(|t| li(t) * rho(t) + d(t, t + 1) * rho2(t, t + 1)).sum();
        let c = -d(i - 1, i) * db(i - 1) * rho(i) - s.lam(1, i) * s.rho(top) + s.rho2(i, top) + db(i) * tail;
        out.insert((i, top), c);
    }
    for i in k + 3..=2 * k + 1 {
        let tail: i64 = (i + 1..=2 * k + 1).map(|t| li(t) * rho(t) + d(t - 1, t) * rho2(t - 1, t)).sum();
        let c = -d(i + 1, i) * db(i + 1) * rho(i) - s.lam(1, i) * s.rho(top) + s.rho2(i, top) - db(i) * tail;
        out.insert((i, top), c);
    }
    Ok(out)
}

// ---- cubes ----

pub fn cube_basis(n: usize) -> Vec<(usize, usize)> {
    let mut b = Vec::new();
    for i in n + 1..=2 * n {
        for j in i + 1..=2 * n {
            b.push((i, j));
        }
    }
    b
}

pub fn cube_closed_form(p: &SimplePolytope, l: &CharMatrix) -> Result<Coefficients> {
    let n = p.dim();
    expect_polytope("cube", p, &SimplePolytope::cube(n)?)?;
    let v: Vec<usize> = (1..=n).collect();
    expect_form("cube", l, &v, &[])?;
    let s = Scalars { l };
    Ok(cube_basis(n)
        .into_iter()
        .map(|(i, j)| {
            let c = -s.lam(i - n, i) * s.lam(i - n, j) * s.rho(i) - s.lam(j - n, j) * s.lam(j - n, i) * s.rho(j) + s.rho2(i, j);
            ((i, j), c)
        })
        .collect())
}

// ---- pentagonal prisms C₂(5) × I^{n-2} ----

/// Facets 1..5 are the pentagon; `a_t = 5 + t` is opposite `b_t = n + 3 + t`.
pub fn pent_prism(n: usize) -> Result<SimplePolytope> {
    if n < 2 {
        return Err(Error::Parameter("pentagonal prism needs n >= 2".into()));
    }
    if n == 2 {
        return SimplePolytope::polygon(5);
    }
    let (p, _) = SimplePolytope::polygon(5)?.product(&SimplePolytope::cube(n - 2)?);
    Ok(p.with_name(format!("C2(5)xI^{}", n - 2)))
}

fn pent_vertex(n: usize) -> Vec<usize> {
    [1, 2].into_iter().chain(6..=n + 3).collect()
}

pub fn pent_prism_pins(n: usize) -> Vec<(usize, usize)> {
    let mut pins = vec![(1, 3), (2, 5)];
    pins.extend((n + 4..=2 * n + 1).map(|j| (j - n - 1, j)));
    pins
}

pub fn pent_prism_basis(n: usize) -> Vec<(usize, usize)> {
    let b_facets = n + 4..=2 * n + 1;
    let mut b = vec![(4, 5)];
    for i in 3..=5 {
        b.extend(b_facets.clone().map(|j| (i, j)));
    }
    for i in b_facets.clone() {
        b.extend((i + 1..=2 * n + 1).map(|j| (i, j)));
    }
    b.sort_unstable();
    b
}

pub fn pent_prism_normalize(p: &SimplePolytope, l: &CharMatrix) -> Result<CharMatrix> {
    let n = p.dim();
    expect_polytope("pent_prism", p, &pent_prism(n)?)?;
    pin_signs(&charmat::refine(p, l, &pent_vertex(n))?, &pent_prism_pins(n))
}

pub fn pent_prism_closed_form(p: &SimplePolytope, l: &CharMatrix) -> Result<Coefficients> {
    let n = p.dim();
    expect_polytope("pent_prism", p, &pent_prism(n)?)?;
    expect_form("pent_prism", l, &pent_vertex(n), &pent_prism_pins(n))?;
    let s = Scalars { l };
    let w = |x: usize| (x + 4) % 5 + 1;
    let d = |i: usize, j: usize| s.d2(1, i, j);
    let dc = |i: usize, j: usize| d(w(i), w(j));
    let lk = |k: usize| dc(k + 4, k) * dc(k, k + 1) * dc(k + 1, k + 4);
    let row = |i: usize| i - n - 1;
    let mut out = Coefficients::new();
    for i in n + 4..=2 * n + 1 {
        for j in i + 1..=2 * n + 1 {
            out.insert((i, j), -s.lam(row(i), j) * s.rho(i) - s.lam(row(j), i) * s.rho(j) + s.rho2(i, j));
        }
        out.insert((3, i), -s.lam(1, i) * s.rho(3) - s.lam(row(i), 3) * s.rho(i) + s.rho2(3, i));
        out.insert((5, i), -s.lam(2, i) * s.rho(5) - s.lam(row(i), 5) * s.rho(i) + s.rho2(5, i));
        let c = -d(3, 4) * d(3, i) * s.rho(4) - s.lam(row(i), 4) * s.rho(i)
            + s.rho2(4, i)
            + d(4, i) * (lk(3) * s.rho(3) + d(3, 4) * s.rho2(3, 4));
        out.insert((4, i), c);
    }
    let cyc: i64 = (1..=5).map(|k| lk(k) * s.rho(k) + dc(k, k + 1) * s.rho2(w(k), w(k + 1))).sum();
    out.insert((4, 5), d(4, 5) * cyc);
    Ok(out)
}

// ---- Q × I^{n-3} ----

/// Facets 1..8 are those of Q; `a_t = 8 + t` is opposite `b_t = n + 5 + t`.
pub fn q_prism(n: usize) -> Result<SimplePolytope> {
    if n < 3 {
        return Err(Error::Parameter("Q x I^(n-3) needs n >= 3".into()));
    }
    if n == 3 {
        return SimplePolytope::q();
    }
    let (p, _) = SimplePolytope::q()?.product(&SimplePolytope::cube(n - 3)?);
    Ok(p.with_name(format!("QxI^{}", n - 3)))
}

fn q_vertex(n: usize) -> Vec<usize> {
    [1, 2, 3].into_iter().chain(9..=n + 5).collect()
}

pub fn q_prism_pins(n: usize) -> Vec<(usize, usize)> {
    let mut pins = vec![(2, 4), (3, 5), (1, 6)];
    pins.extend((n + 6..=2 * n + 2).map(|j| (j - n - 2, j)));
    pins
}

pub fn q_prism_basis(n: usize) -> Vec<(usize, usize)> {
    let b_facets = n + 6..=2 * n + 2;
    let mut b = vec![(4, 5), (5, 8), (4, 7), (4, 8), (7, 8)];
    for i in b_facets.clone() {
        b.extend((i + 1..=2 * n + 2).map(|j| (i, j)));
        b.extend([4, 5, 6, 7, 8].map(|a| (a, i)));
    }
    b.sort_unstable();
    b
}

pub fn q_prism_normalize(p: &SimplePolytope, l: &CharMatrix) -> Result<CharMatrix> {
    let n = p.dim();
    expect_polytope("q_prism", p, &q_prism(n)?)?;
    pin_signs(&charmat::refine(p, l, &q_vertex(n))?, &q_prism_pins(n))
}

/// Neighbours of facets 1, 2, 3 of Q in counter-clockwise order.
const G1: [usize; 4] = [2, 3, 4, 5];
const G2: [usize; 5] = [3, 1, 5, 8, 6];
const G3: [usize; 5] = [1, 2, 6, 7, 4];

fn g(i: usize, a: i64) -> usize {
    let table: &[usize] = match i {
        1 => &G1,
        2 => &G2,
        _ => &G3,
    };
    let len = table.len() as i64;
    table[((a - 1).rem_euclid(len)) as usize]
}

pub fn q_prism_closed_form(p: &SimplePolytope, l: &CharMatrix) -> Result<Coefficients> {
    let n = p.dim();
    expect_polytope("q_prism", p, &q_prism(n)?)?;
    expect_form("q_prism", l, &q_vertex(n), &q_prism_pins(n))?;
    let s = Scalars { l };
    let rho_t = |i: usize, j: i64| s.rho(g(i, j));
    let rho_tt = |i: usize, j: i64, k: i64| s.rho2(g(i, j), g(i, k));
    let d_t = |i: usize, j: i64, k: i64| s.d3(i, g(i, j), g(i, k));
    let l_t = |i: usize, j: i64| d_t(i, j - 1, j) * d_t(i, j, j + 1) * d_t(i, j + 1, j - 1);
    let term = |i: usize, k: i64| l_t(i, k) * rho_t(i, k) + d_t(i, k, k + 1) * rho_tt(i, k, k + 1);
    let row = |i: usize| i - n - 2;
    // Shared corrections around facet 3 (position 3) and facet 2 (position 5).
    let e3 = l_t(3, 3) * rho_t(3, 3) + d_t(3, 3, 4) * rho_tt(3, 3, 4);
    let e2 = l_t(2, 5) * rho_t(2, 5) + d_t(2, 4, 5) * rho_tt(2, 4, 5);
    let mut out = Coefficients::new();
    for i in n + 6..=2 * n + 2 {
        for j in i + 1..=2 * n + 2 {
            out.insert((i, j), -s.lam(row(i), j) * s.rho(i) - s.lam(row(j), i) * s.rho(j) + s.rho2(i, j));
        }
        out.insert((4, i), -s.lam(2, i) * s.rho(4) - s.lam(row(i), 4) * s.rho(i) + s.rho2(4, i));
        out.insert((5, i), -s.lam(3, i) * s.rho(5) - s.lam(row(i), 5) * s.rho(i) + s.rho2(5, i));
        out.insert((6, i), -s.lam(1, i) * s.rho(6) - s.lam(row(i), 6) * s.rho(i) + s.rho2(6, i));
        let c7 = -s.d3(3, 6, 7) * s.d3(3, 6, i) * s.rho(7) - s.lam(row(i), 7) * s.rho(i) + s.rho2(7, i) + s.d3(3, 7, i) * e3;
        let c8 = -s.d3(2, 6, 8) * s.d3(2, 6, i) * s.rho(8) - s.lam(row(i), 8) * s.rho(i) + s.rho2(8, i) + s.d3(2, 8, i) * e2;
        out.insert((7, i), c7);
        out.insert((8, i), c8);
    }
    out.insert((4, 5), s.d3(1, 4, 5) * (1..=4).map(|k| term(1, k)).sum::<i64>());
    out.insert((5, 8), s.d3(2, 5, 8) * (1..=5).map(|k| term(2, k)).sum::<i64>());
    out.insert((4, 7), s.d3(3, 7, 4) * (1..=5).map(|k| term(3, k)).sum::<i64>());
    let c48 = -s.lam(2, 8) * s.rho(4) - s.d3(2, 6, 4) * s.d3(2, 6, 8) * s.rho(8) + s.rho2(4, 8) + s.d3(2, 4, 8) * e2;
    let c78 = -s.d3(3, 6, 7) * s.d3(3, 6, 8) * s.rho(7) - s.d3(2, 6, 7) * s.d3(2, 6, 8) * s.rho(8)
        + s.rho2(7, 8)
        + s.d3(3, 7, 8) * e3
        + s.d3(2, 7, 8) * e2;
    out.insert((4, 8), c48);
    out.insert((7, 8), c78);
    Ok(out)
}

// ---- cyclic identities ----

/// Sums over a cycle of `2k - 1` columns `λ_i = (λ_{1,i}, λ_{2,i}, λ_{3,i})`,
/// `i = 2..2k`, with `Δ` the minor on rows 2 and 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CyclicSums {
    pub s1_mod8: i64,
    pub s2: i64,
}

pub fn cyclic_identities(cols: &[[i64; 3]]) -> Result<CyclicSums> {
    let len = cols.len();
    if len < 3 || len % 2 == 0 {
        return Err(Error::Hypothesis(format!("need an odd number (>= 3) of columns, got {len}")));
    }
    if cols[0] != [0, 1, 0] || cols[1] != [0, 0, 1] {
        return Err(Error::Hypothesis("the first two columns must be (0,1,0) and (0,0,1)".into()));
    }
    let c = |i: usize| cols[i % len];
    let d = |i: usize, j: usize| c(i)[1] * c(j)[2] - c(j)[1] * c(i)[2];
    for i in 0..len {
        if d(i, i + 1).abs() != 1 {
            return Err(Error::Hypothesis(format!("consecutive minor at position {} is {}", i + 2, d(i, i + 1))));
        }
        if c(i).iter().sum::<i64>().rem_euclid(2) != 1 {
            return Err(Error::Hypothesis(format!("column {} has even entry sum", i + 2)));
        }
    }
    let l = |i: usize| d(i + len - 1, i) * d(i, i + 1) * d(i + 1, i + len - 1);
    let mut s1 = 0i64;
    let mut s2 = 0i64;
    for i in 0..len {
        let (a, b) = (c(i), c(i + 1));
        s1 += l(i) * (a[0] * a[0] + 1) + 2 * d(i, i + 1) * a[0] * b[0];
        s2 += l(i) * (a[1] * a[1] + a[2] * a[2]) + 2 * d(i, i + 1) * (a[1] * b[1] + a[2] * b[2]);
    }
    Ok(CyclicSums { s1_mod8: s1.rem_euclid(8), s2 })
}

/// A random instance of `2k - 1` columns with entries in `[-bound, bound]`
/// satisfying the hypotheses of [`cyclic_identities`].
pub fn random_cyclic_instance<R: rand::Rng>(k: usize, bound: i64, rng: &mut R) -> Vec<[i64; 3]> {
    let len = 2 * k - 1;
    let minor = |a: &[i64; 3], b: &[i64; 3]| a[1] * b[2] - b[1] * a[2];
    'restart: loop {
        let mut cols = vec![[0, 1, 0], [0, 0, 1]];
        while cols.len() < len {
            let prev = *cols.last().expect("nonempty");
            let last = cols.len() + 1 == len;
            let mut found = None;
            for _ in 0..10_000 {
                let c = [rng.gen_range(-bound..=bound), rng.gen_range(-bound..=bound), rng.gen_range(-bound..=bound)];
                let odd = c.iter().sum::<i64>().rem_euclid(2) == 1;
                if odd && minor(&prev, &c).abs() == 1 && (!last || minor(&c, &cols[0]).abs() == 1) {
                    found = Some(c);
                    break;
                }
            }
            match found {
                Some(c) => cols.push(c),
                None => continue 'restart,
            }
        }
        return cols;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn cm(rows: Vec<Vec<i64>>) -> CharMatrix {
        CharMatrix::new(rows).unwrap()
    }

    #[test]
    fn polygon_examples() {
        let cp2 = cm(vec![vec![1, 0, -1], vec![0, 1, -1]]);
        let f = polygon_closed_form(&cp2).unwrap();
        assert_eq!(f.l, vec![1, 1, 1]);
        assert_eq!(f.total, 3);
        let p1p1 = cm(vec![vec![1, 0, -1, 0], vec![0, 1, 0, -1]]);
        assert_eq!(polygon_closed_form(&p1p1).unwrap().total, 0);
        let tri = SimplePolytope::simplex(2).unwrap();
        let (c, u) = polygon_engine(&tri, &cp2).unwrap();
        assert_eq!(c, 3 * u);
        let r1 = cm(vec![vec![1, 0, 1, 1], vec![0, 1, 0, 1]]);
        assert!(!polygon_parity_criterion(&r1).unwrap());
        let sq = SimplePolytope::polygon(4).unwrap();
        let r2 = cm(vec![vec![1, 0, 1, 2], vec![0, 1, 1, 1]]);
        assert!(!is_spin(&sq, &r2).unwrap());
        assert!(!is_string(&sq, &r2).unwrap());
    }

    #[test]
    fn not_bundle_type_prism_coefficients_vanish() {
        let p = SimplePolytope::prism(6).unwrap();
        let l = cm(vec![vec![1, 0, 0, 1, 0, 0, 0, 1], vec![0, 1, 0, 1, 0, 1, 0, 0], vec![0, 0, 1, 1, 1, 0, 1, 2]]);
        let n = prism_normalize(&p, &l).unwrap();
        let c = prism_closed_form(&p, &n).unwrap();
        assert!(c.values().all(|&x| x == 0), "{c:?}");
        assert_eq!(c, engine_coefficients(&p, &n, &prism_basis(3)).unwrap());
    }

    #[test]
    fn linear_model_on_l4() {
        // L4 is a cube; facets 1|6, 2|4, 3|5 are opposite pairs.
        let p = SimplePolytope::prism(4).unwrap();
        let l = cm(vec![vec![1, 0, 0, 0, 0, 1], vec![0, 1, 0, 1, 0, 0], vec![0, 0, 1, 0, 1, 0]]);
        let c = prism_closed_form(&p, &l).unwrap();
        assert!(c.values().all(|&x| x == 0));
        assert!(is_string(&p, &l).unwrap());
    }

    #[test]
    fn cube_families_are_string() {
        let c3 = SimplePolytope::cube(3).unwrap();
        let mk = |s: [[i64; 3]; 3]| {
            let mut rows = crate::intmat::identity(3);
            for (r, x) in rows.iter_mut().zip(s) {
                r.extend(x);
            }
            cm(rows)
        };
        for (x, y) in [(0, 0), (1, 1), (2, 0), (3, -1), (-2, 4)] {
            let l = mk([[1, 0, x], [0, 1, y], [0, 0, 1]]);
            let c = cube_closed_form(&c3, &l).unwrap();
            assert!(c.values().all(|&v| v == 0));
            assert!(is_string(&c3, &l).unwrap());
        }
        for (a, b) in [(1, 1), (2, 1), (-1, 3), (3, 2), (2, 2)] {
            let l = mk([[1, 2 * a, a * b], [0, 1, b], [0, 0, 1]]);
            let c = cube_closed_form(&c3, &l).unwrap();
            assert!(c.values().all(|&v| v == 0), "{a} {b} {c:?}");
            assert_eq!(c, engine_coefficients(&c3, &l, &cube_basis(3)).unwrap());
        }
    }

    #[test]
    fn q_example_is_string() {
        let p = q_prism(5).unwrap();
        let l = cm(vec![
            vec![1, 0, 0, 0, 0, 1, 1, 1, 0, 0, 0, 0],
            vec![0, 1, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0],
            vec![0, 0, 1, 0, 1, 0, 0, 1, 0, 0, 0, 0],
            vec![0, 0, 0, 2, 0, 2, 2, 0, 1, 0, 1, 0],
            vec![0, 0, 0, 0, 2, 2, 1, 3, 0, 1, 0, 1],
        ]);
        assert!(is_string(&p, &l).unwrap());
        let n = q_prism_normalize(&p, &l).unwrap();
        let c = q_prism_closed_form(&p, &n).unwrap();
        assert!(c.values().all(|&x| x == 0), "{c:?}");
        assert_eq!(c, engine_coefficients(&p, &n, &q_prism_basis(5)).unwrap());
    }

    #[test]
    fn cyclic_sums() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for k in 3..=5 {
            for _ in 0..200 {
                let cols = random_cyclic_instance(k, 5, &mut rng);
                assert_eq!(cyclic_identities(&cols).unwrap(), CyclicSums { s1_mod8: 4, s2: 0 });
            }
        }
        let mut bad = random_cyclic_instance(3, 5, &mut rng);
        bad[2][0] += 1;
        assert!(matches!(cyclic_identities(&bad), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn labeling_is_checked() {
        let p = SimplePolytope::prism(6).unwrap();
        let l = cm(vec![vec![1, 0, 0, 1, 0, 0, 0, -1], vec![0, 1, 0, 1, 0, 1, 0, 0], vec![0, 0, 1, 1, 1, 0, 1, 2]]);
        assert!(matches!(prism_closed_form(&p, &l), Err(Error::Labeling { .. })));
        let q = SimplePolytope::q().unwrap();
        assert!(matches!(prism_closed_form(&q, &l), Err(Error::Labeling { .. })));
    }
}
