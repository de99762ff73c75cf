//! Normal forms and decompositions: principal-minor normalization of square
//! blocks, Bott triangularization over cubes, equivariant (edge) connected
//! sums, and the prism and cube-connected-sum decompositions.

use crate::charmat::{self, CharMatrix, EquivalenceMove};
use crate::error::{Error, Result};
use crate::intmat::{self, Matrix};
use crate::polytope::{FacetMaps, SimplePolytope};
use crate::stringcheck;
use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Signed};

// ---- principal minors ----

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MinorShape {
    /// Conjugate to a unipotent upper triangular matrix.
    Unipotent,
    /// Conjugate to `1` on the diagonal, `b_i` at `(i, i+1)` and `b_k` at `(k, 1)`.
    Cycle { b: Vec<i64> },
    /// A principal minor (1-based indices) that is not 1, or the full
    /// determinant when it is not ±1.
    NotApplicable { minor: Vec<usize>, value: BigInt },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinorNormalForm {
    /// Column signs applied first so the diagonal becomes 1.
    pub signs: Vec<i64>,
    /// `perm[i]` is the original (1-based) index placed at position `i + 1`.
    pub perm: Vec<usize>,
    /// `A · diag(signs)` conjugated by `perm`.
    pub matrix: Matrix,
    pub shape: MinorShape,
}

fn conjugate(a: &[Vec<i64>], perm: &[usize]) -> Matrix {
    perm.iter().map(|&i| perm.iter().map(|&j| a[i - 1][j - 1]).collect()).collect()
}

fn submatrix(a: &[Vec<i64>], idx: &[usize]) -> Matrix {
    idx.iter().map(|&i| idx.iter().map(|&j| a[i - 1][j - 1]).collect()).collect()
}

/// Normalizes a square block whose proper principal minors are all 1:
/// unipotent upper triangular when `det = 1`, a single signed cycle when
/// `det = -1`.
pub fn dobrinskaya_normalize(a: &[Vec<i64>]) -> Result<MinorNormalForm> {
    let k = a.len();
    if k == 0 || a.iter().any(|r| r.len() != k) {
        return Err(Error::Shape("block must be square and nonempty".into()));
    }
    if k > 10 {
        return Err(Error::Parameter("principal-minor search is limited to k <= 10".into()));
    }
    let identity: Vec<usize> = (1..=k).collect();
    let not_applicable = |signs: Vec<i64>, m: Matrix, minor: Vec<usize>, value: BigInt| MinorNormalForm {
        signs,
        perm: identity.clone(),
        matrix: m,
        shape: MinorShape::NotApplicable { minor, value },
    };
    if let Some(i) = (0..k).find(|&i| a[i][i].abs() != 1) {
        return Ok(not_applicable(vec![1; k], a.to_vec(), vec![i + 1], BigInt::from(a[i][i])));
    }
    let signs: Vec<i64> = (0..k).map(|i| a[i][i]).collect();
    let m: Matrix = a.iter().map(|r| r.iter().zip(&signs).map(|(x, s)| x * s).collect()).collect();
    for size in 2..k {
        for idx in (1..=k).combinations(size) {
            let d = intmat::det(&submatrix(&m, &idx));
            if !d.is_one() {
                return Ok(not_applicable(signs, m, idx, d));
            }
        }
    }
    let det = intmat::det(&m);
    if det.is_one() {
        let perm = topological_order(&m).ok_or_else(|| {
            Error::Contradiction("proper principal minors and determinant are 1 but the support has a cycle".into())
        })?;
        let matrix = conjugate(&m, &perm);
        return Ok(MinorNormalForm { signs, perm, matrix, shape: MinorShape::Unipotent });
    }
    if det != BigInt::from(-1) {
        return Ok(not_applicable(signs, m, identity.clone(), det));
    }
    let perm = single_cycle(&m)
        .ok_or_else(|| Error::Contradiction("determinant -1 but the support is not a single cycle".into()))?;
    let matrix = conjugate(&m, &perm);
    let b: Vec<i64> = (0..k).map(|i| matrix[i][(i + 1) % k]).collect();
    let sign = if k % 2 == 0 { 1 } else { -1 };
    if b.iter().product::<i64>() != sign * 2 {
        return Err(Error::Contradiction(format!("cycle entries {b:?} do not multiply to (-1)^k * 2")));
    }
    Ok(MinorNormalForm { signs, perm, matrix, shape: MinorShape::Cycle { b } })
}

/// Order with every off-diagonal nonzero `(i, j)` having `i` before `j`,
/// smallest available index first.
fn topological_order(m: &[Vec<i64>]) -> Option<Vec<usize>> {
    let k = m.len();
    let mut indeg: Vec<usize> = (0..k).map(|j| (0..k).filter(|&i| i != j && m[i][j] != 0).count()).collect();
    let mut done = vec![false; k];
    let mut order = Vec::with_capacity(k);
    while order.len() < k {
        let next = (0..k).find(|&j| !done[j] && indeg[j] == 0)?;
        done[next] = true;
        order.push(next + 1);
        for j in 0..k {
            if j != next && m[next][j] != 0 {
                indeg[j] -= 1;
            }
        }
    }
    Some(order)
}

/// The cycle through every index when each row has exactly one
/// off-diagonal nonzero.
fn single_cycle(m: &[Vec<i64>]) -> Option<Vec<usize>> {
    let k = m.len();
    let succ: Vec<usize> = (0..k)
        .map(|i| (0..k).filter(|&j| j != i && m[i][j] != 0).exactly_one().ok())
        .collect::<Option<_>>()?;
    let mut order = vec![0];
    while order.len() < k {
        let next = succ[*order.last().expect("nonempty")];
        if order.contains(&next) {
            return None;
        }
        order.push(next);
    }
    (succ[order[k - 1]] == 0).then(|| order.into_iter().map(|i| i + 1).collect())
}

// ---- Bott triangularization ----

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BottOutcome {
    /// `matrix = [I | U]` with `U` unipotent upper triangular, reached from
    /// the input by `moves`.
    Triangular { matrix: CharMatrix, moves: Vec<EquivalenceMove> },
    /// The block `Λ*` after refinement and sign normalization is not
    /// conjugate to a unipotent matrix. For a 2×2 minor equal to -1,
    /// `pair_product` is `λ_{i-n,j} λ_{j-n,i} = 2`.
    Obstructed { form: MinorNormalForm, pair_product: Option<i64> },
}

fn expect_labels(family: &'static str, p: &SimplePolytope, expected: &SimplePolytope) -> Result<()> {
    if p.dim() != expected.dim() || p.vertices() != expected.vertices() {
        return Err(Error::Labeling { family, detail: "polytope does not carry the expected facet labels".into() });
    }
    Ok(())
}

/// Refines at `v`, then flips the free columns in `pins` so those entries are 1.
fn normalize_with_moves(
    p: &SimplePolytope,
    l: &CharMatrix,
    v: &[usize],
    pins: &[(usize, usize)],
) -> Result<(CharMatrix, Vec<EquivalenceMove>)> {
    charmat::ensure_valid(p, l)?;
    let mut moves = Vec::new();
    let mut cur = l.clone();
    if !cur.is_identity_at(v) {
        let u = intmat::unimodular_inverse_i64(&cur.columns(v))
            .ok_or_else(|| Error::Shape("refinement overflows i64".into()))?;
        let mv = EquivalenceMove::RowBasisChange(u);
        cur = charmat::transform(p, &cur, &mv)?;
        moves.push(mv);
    }
    cur = cur.mark_refined(v)?;
    for &(k, j) in pins {
        match cur.lam(k, j) {
            1 => {}
            -1 => {
                let mv = EquivalenceMove::ColumnSignFlip(j);
                cur = charmat::transform(p, &cur, &mv)?;
                moves.push(mv);
            }
            x => return Err(Error::Precondition(format!("λ[{k},{j}] = {x}, expected ±1"))),
        }
    }
    Ok((cur, moves))
}

/// Applies `moves` in order.
pub fn replay(p: &SimplePolytope, l: &CharMatrix, moves: &[EquivalenceMove]) -> Result<CharMatrix> {
    moves.iter().try_fold(l.clone(), |cur, mv| charmat::transform(p, &cur, mv))
}

/// Brings `Λ*` over `Iⁿ` to unipotent upper triangular form by refinement,
/// column signs, a pair-preserving facet permutation and a row permutation.
/// A string input that cannot be triangularized is a hard error.
pub fn bott_triangularize(p: &SimplePolytope, l: &CharMatrix) -> Result<BottOutcome> {
    let n = p.dim();
    expect_labels("cube", p, &SimplePolytope::cube(n)?)?;
    let string = stringcheck::is_string(p, l)?;
    let v: Vec<usize> = (1..=n).collect();
    let pins: Vec<(usize, usize)> = (1..=n).map(|i| (i, n + i)).collect();
    let (refined, mut moves) = normalize_with_moves(p, l, &v, &pins)?;
    let star: Matrix = (0..n).map(|i| (n + 1..=2 * n).map(|j| refined.lam(i + 1, j)).collect()).collect();
    let form = dobrinskaya_normalize(&star)?;
    if form.shape != MinorShape::Unipotent {
        if string {
            return Err(Error::Contradiction(format!("string matrix over I^{n} is not Bott: {:?}", form.shape)));
        }
        let pair_product = match &form.shape {
            MinorShape::NotApplicable { minor, .. } if minor.len() == 2 => {
                Some(form.matrix[minor[0] - 1][minor[1] - 1] * form.matrix[minor[1] - 1][minor[0] - 1])
            }
            _ => None,
        };
        return Ok(BottOutcome::Obstructed { form, pair_product });
    }
    // Facet σ(k) moves to k and n + σ(k) to n + k; rows follow.
    let sigma = &form.perm;
    let mut facet_perm = vec![0; 2 * n];
    let mut rows = vec![vec![0; n]; n];
    for (k, &s) in sigma.iter().enumerate() {
        facet_perm[s - 1] = k + 1;
        facet_perm[n + s - 1] = n + k + 1;
        rows[k][s - 1] = 1;
    }
    let mut cur = refined;
    if sigma.iter().enumerate().any(|(k, &s)| s != k + 1) {
        for mv in [EquivalenceMove::FacetPermutation(facet_perm), EquivalenceMove::RowBasisChange(rows)] {
            cur = charmat::transform(p, &cur, &mv)?;
            moves.push(mv);
        }
    }
    let matrix = cur.mark_refined(&v)?;
    let triangular = (0..n).all(|i| (0..n).all(|j| matrix.lam(i + 1, n + j + 1) == form.matrix[i][j]));
    if !triangular {
        return Err(Error::Contradiction("replayed moves do not reproduce the triangular block".into()));
    }
    Ok(BottOutcome::Triangular { matrix, moves })
}

// ---- equivariant sums ----

#[derive(Clone, Debug)]
pub struct Glued {
    pub polytope: SimplePolytope,
    pub matrix: CharMatrix,
    pub maps: FacetMaps,
}

fn glue_columns(p: SimplePolytope, left: &CharMatrix, right: &CharMatrix, maps: FacetMaps) -> Result<Glued> {
    let mut cols: Vec<Option<Vec<i64>>> = vec![None; p.num_facets()];
    for (j, &t) in maps.left.iter().enumerate() {
        cols[t - 1] = Some(left.column(j + 1));
    }
    for (j, &t) in maps.right.iter().enumerate() {
        cols[t - 1].get_or_insert_with(|| right.column(j + 1));
    }
    let cols: Vec<Vec<i64>> = cols.into_iter().map(|c| c.expect("every facet comes from a summand")).collect();
    let rows = (0..left.n()).map(|k| cols.iter().map(|c| c[k]).collect()).collect();
    let matrix = CharMatrix::new(rows)?;
    charmat::ensure_valid(&p, &matrix)?;
    Ok(Glued { polytope: p, matrix, maps })
}

/// Connected sum at the initial vertices of two refined pairs: facets with
/// equal identity columns merge, giving `(Λ_L* | I | Λ_R*)`.
pub fn equivariant_connected_sum(
    pl: &SimplePolytope,
    ll: &CharMatrix,
    pr: &SimplePolytope,
    lr: &CharMatrix,
) -> Result<Glued> {
    let wl = ll.refined_at().ok_or(Error::NotRefined)?;
    let wr = lr.refined_at().ok_or(Error::NotRefined)?;
    if ll.n() != lr.n() {
        return Err(Error::Shape("summands have different dimensions".into()));
    }
    charmat::ensure_valid(pl, ll)?;
    charmat::ensure_valid(pr, lr)?;
    let matching: Vec<(usize, usize)> = wl.iter().copied().zip(wr.iter().copied()).collect();
    let (p, maps) = pl.connected_sum(wl, pr, wr, &matching)?;
    glue_columns(p, ll, lr, maps)
}

/// Edge connected sum of two pairs whose `n + 1` matched columns agree.
pub fn equivariant_edge_connected_sum(
    pl: &SimplePolytope,
    ll: &CharMatrix,
    e_left: &[usize],
    pr: &SimplePolytope,
    lr: &CharMatrix,
    e_right: &[usize],
    matching: &[(usize, usize)],
) -> Result<Glued> {
    charmat::ensure_valid(pl, ll)?;
    charmat::ensure_valid(pr, lr)?;
    if let Some((k, &(a, b))) = matching.iter().find_position(|&&(a, b)| ll.column(a) != lr.column(b)) {
        return Err(Error::InvalidMove(format!(
            "matched pair {} (facets {a} and {b}) has columns {:?} and {:?}",
            k + 1,
            ll.column(a),
            lr.column(b)
        )));
    }
    let (p, maps) = pl.edge_connected_sum(e_left, pr, e_right, matching)?;
    glue_columns(p, ll, lr, maps)
}

// ---- product blocks ----

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BundleBlocks {
    /// The refinement vertex the blocks are read at.
    pub vertex: Vec<usize>,
    /// Rows of first-factor facets at the free facets of the second factor.
    pub upper: Matrix,
    /// Rows of second-factor facets at the free facets of the first factor.
    pub lower: Matrix,
    pub upper_zero: bool,
    pub lower_zero: bool,
}

/// Literal off-diagonal blocks of a refined matrix over `P₁ × P₂`, where
/// `first` lists the facets of `P₁`. A zero block certifies bundle type at
/// this refinement only.
pub fn bundle_blocks(p: &SimplePolytope, first: &[usize], l: &CharMatrix) -> Result<BundleBlocks> {
    let v = l.refined_at().ok_or(Error::NotRefined)?.to_vec();
    charmat::ensure_valid(p, l)?;
    let in_first = |f: usize| first.contains(&f);
    let counts: Vec<usize> = p.vertices().iter().map(|v| v.iter().filter(|&&f| in_first(f)).count()).collect();
    let n1 = counts[0];
    if n1 == 0 || n1 == p.dim() || counts.iter().any(|&c| c != n1) {
        return Err(Error::Precondition(format!("{first:?} is not the facet set of a product factor")));
    }
    let rows1: Vec<usize> = (0..v.len()).filter(|&k| in_first(v[k])).collect();
    let rows2: Vec<usize> = (0..v.len()).filter(|&k| !in_first(v[k])).collect();
    let free1: Vec<usize> = (1..=p.num_facets()).filter(|&f| in_first(f) && !v.contains(&f)).collect();
    let free2: Vec<usize> = (1..=p.num_facets()).filter(|&f| !in_first(f) && !v.contains(&f)).collect();
    let block = |rows: &[usize], cols: &[usize]| -> Matrix {
        rows.iter().map(|&k| cols.iter().map(|&j| l.lam(k + 1, j)).collect()).collect()
    };
    let upper = block(&rows1, &free2);
    let lower = block(&rows2, &free1);
    let zero = |b: &Matrix| b.iter().flatten().all(|&x| x == 0);
    Ok(BundleBlocks { upper_zero: zero(&upper), lower_zero: zero(&lower), vertex: v, upper, lower })
}

/// Searches every product split and refinement vertex for a zero
/// off-diagonal block.
pub fn bundle_certificate(p: &SimplePolytope, splits: &[Vec<usize>], l: &CharMatrix) -> Result<Option<(Vec<usize>, BundleBlocks)>> {
    for split in splits {
        for v in p.vertices() {
            let b = bundle_blocks(p, split, &charmat::refine(p, l, v)?)?;
            if b.upper_zero || b.lower_zero {
                return Ok(Some((split.clone(), b)));
            }
        }
    }
    Ok(None)
}

/// Product splits of `L_{2k} = C₂(2k) × I`: the top/bottom pair, plus the
/// two pairs of opposite sides when `k = 2`.
pub fn prism_splits(k: usize) -> Vec<Vec<usize>> {
    let mut s = vec![vec![1, 2 * k + 2]];
    if k == 2 {
        s.extend([vec![2, 4], vec![3, 5]]);
    }
    s
}

// ---- decomposition reports ----

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecompositionVerdict {
    Decomposed,
    Irreducible,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub polytope: SimplePolytope,
    pub matrix: CharMatrix,
    /// Input facet label of each piece facet.
    pub facets: Vec<usize>,
    /// `None` where bundle type is not part of the statement.
    pub bundle_type: Option<bool>,
    pub string: bool,
}

/// How consecutive pieces are glued, in input facet labels. Gluing `i`
/// joins piece `i` to the reassembly of pieces `i + 1..`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Gluing {
    Edge { edge: Vec<usize>, tips: [usize; 2] },
    Vertex { merged: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompositionReport {
    pub verdict: DecompositionVerdict,
    pub pieces: Vec<Piece>,
    pub gluings: Vec<Gluing>,
    /// Moves from the input matrix to `normalized_matrix`.
    pub moves: Vec<EquivalenceMove>,
    /// The pieces' columns are literally columns of this matrix.
    pub normalized_matrix: CharMatrix,
}

fn columns_matrix(l: &CharMatrix, facets: &[usize]) -> Result<CharMatrix> {
    let rows = (1..=l.n()).map(|k| facets.iter().map(|&j| l.lam(k, j)).collect()).collect();
    CharMatrix::new(rows)
}

fn local(facets: &[usize], label: usize) -> Result<usize> {
    facets
        .iter()
        .position(|&f| f == label)
        .map(|i| i + 1)
        .ok_or_else(|| Error::InvalidMove(format!("facet {label} is not in the piece")))
}

/// Glues the pieces back together and returns the result in input labels.
pub fn reassemble(report: &DecompositionReport) -> Result<(SimplePolytope, CharMatrix)> {
    let last = report.pieces.last().ok_or_else(|| Error::Parameter("report has no pieces".into()))?;
    if report.gluings.len() + 1 != report.pieces.len() {
        return Err(Error::Parameter("need one gluing between consecutive pieces".into()));
    }
    let mut acc = (last.polytope.clone(), last.matrix.clone(), last.facets.clone());
    for (piece, gluing) in report.pieces.iter().zip(&report.gluings).rev() {
        let (rp, rl, rf) = &acc;
        let glued = match gluing {
            Gluing::Edge { edge, tips } => {
                let el: Vec<usize> = edge.iter().map(|&f| local(&piece.facets, f)).try_collect()?;
                let er: Vec<usize> = edge.iter().map(|&f| local(rf, f)).try_collect()?;
                let matching: Vec<(usize, usize)> = edge
                    .iter()
                    .chain(tips)
                    .map(|&f| Ok((local(&piece.facets, f)?, local(rf, f)?)))
                    .collect::<Result<_>>()?;
                equivariant_edge_connected_sum(&piece.polytope, &piece.matrix, &el, rp, rl, &er, &matching)?
            }
            Gluing::Vertex { merged } => {
                let wl: Vec<usize> = merged.iter().map(|&f| local(&piece.facets, f)).try_collect()?;
                let wr: Vec<usize> = merged.iter().map(|&f| local(rf, f)).try_collect()?;
                let ll = piece.matrix.clone().mark_refined(&wl)?;
                let lr = rl.clone().mark_refined(&wr)?;
                equivariant_connected_sum(&piece.polytope, &ll, rp, &lr)?
            }
        };
        let mut labels = vec![0; glued.polytope.num_facets()];
        for (j, &t) in glued.maps.left.iter().enumerate() {
            labels[t - 1] = piece.facets[j];
        }
        for (j, &t) in glued.maps.right.iter().enumerate() {
            if labels[t - 1] == 0 {
                labels[t - 1] = rf[j];
            }
        }
        acc = (glued.polytope, glued.matrix, labels);
    }
    let (p, l, labels) = acc;
    let q = p.relabel(&labels)?;
    let rows = charmat::permute_columns(l.rows(), &labels);
    Ok((q, CharMatrix::new(rows)?))
}

/// Replays the moves and the gluings, checking both reproduce the input.
pub fn verify_reassembly(p: &SimplePolytope, l: &CharMatrix, report: &DecompositionReport) -> Result<()> {
    if replay(p, l, &report.moves)?.rows() != report.normalized_matrix.rows() {
        return Err(Error::Contradiction("moves do not reach the normalized matrix".into()));
    }
    let (q, m) = reassemble(report)?;
    if q.vertices() != p.vertices() {
        return Err(Error::Contradiction("reassembled polytope differs from the input".into()));
    }
    if m.rows() != report.normalized_matrix.rows() {
        return Err(Error::Contradiction("reassembled matrix differs from the normalized input".into()));
    }
    Ok(())
}

// ---- prisms ----

enum PrismStep {
    Bundle,
    Split,
    Reflect,
}

/// Mirror of the side cycle fixing the vertex `F₁ ∩ F₂ ∩ F₃`.
fn reflect_frame(frame: &[usize]) -> Vec<usize> {
    let s = frame.len() - 2;
    let mut out = vec![frame[0]];
    out.extend((0..s).map(|i| frame[1 + (s + 1 - i) % s]));
    out.push(frame[s + 1]);
    out
}

/// One step of the case analysis on a normalized string matrix over `L_{2k}`.
fn prism_case(n: &CharMatrix, k: usize) -> Result<PrismStep> {
    let (b, t) = (2 * k + 2, 2 * k + 1);
    let lam = |i, j| n.lam(i, j);
    let fail = |what: &str| Err(Error::Contradiction(format!("prism decomposition: {what} fails on {:?}", n.rows())));
    if lam(1, 4) * lam(2, b) != 0 || lam(1, t) * lam(3, b) != 0 {
        return fail("λ14·λ2,B = λ1,t·λ3,B = 0");
    }
    match (lam(2, b) != 0, lam(3, b) != 0) {
        (false, false) => Ok(PrismStep::Bundle),
        (false, true) => {
            if lam(1, t) != 0 || lam(2, t) != 0 || lam(1, 4) * lam(3, b) != 2 * lam(3, 4) {
                return fail("λ1,t = λ2,t = λ14·λ3,B − 2λ34 = 0");
            }
            Ok(if k == 2 { PrismStep::Bundle } else { PrismStep::Split })
        }
        (true, false) => Ok(if k == 2 { PrismStep::Bundle } else { PrismStep::Reflect }),
        (true, true) => {
            let (l34, l2t) = (lam(3, 4), lam(2, t));
            if lam(2, b) * l34 * l34 != 2 * l34 * lam(3, b) || lam(3, b) * l2t * l2t != 2 * l2t * lam(2, b) {
                return fail("the two coefficient identities");
            }
            if l34 * l2t == 0 {
                return Ok(match (k, l2t) {
                    (2, _) => PrismStep::Bundle,
                    (_, 0) => PrismStep::Split,
                    _ => PrismStep::Reflect,
                });
            }
            if l34 * l2t != 4 || (4..=t).any(|i| lam(1, i) != 0) {
                return fail("λ34·λ2,t = 4 with a zero top row on the sides");
            }
            Ok(PrismStep::Bundle)
        }
    }
}

fn prism_half(p: &SimplePolytope) -> Result<usize> {
    let m = p.num_facets();
    if p.dim() != 3 || m < 6 || m % 2 != 0 {
        return Err(Error::Labeling { family: "prism", detail: "not an even prism".into() });
    }
    let k = (m - 2) / 2;
    expect_labels("prism", p, &SimplePolytope::prism(2 * k)?)?;
    Ok(k)
}

/// Splits a string matrix over `L_{2k}` into bundle-type string pieces over
/// `L₄` and a final bundle-type string piece, glued by equivariant edge
/// connected sums along vertical edges.
pub fn decompose_prism(p: &SimplePolytope, l: &CharMatrix) -> Result<DecompositionReport> {
    let k = prism_half(p)?;
    if !stringcheck::is_string(p, l)? {
        return Err(Error::Precondition("matrix is not string".into()));
    }
    let (l0, moves) = normalize_with_moves(p, l, &[1, 2, 3], &stringcheck::prism_pins(k))?;
    let mut frames = Vec::new();
    let mut gluings = Vec::new();
    let mut frame: Vec<usize> = (1..=2 * k + 2).collect();
    loop {
        let kk = (frame.len() - 2) / 2;
        let sub = SimplePolytope::prism(2 * kk)?;
        let step_at = |f: &[usize]| -> Result<PrismStep> {
            let n = stringcheck::prism_normalize(&sub, &columns_matrix(&l0, f)?)?;
            prism_case(&n, kk)
        };
        let f = match step_at(&frame)? {
            PrismStep::Bundle => {
                frames.push(frame);
                break;
            }
            PrismStep::Split => frame.clone(),
            PrismStep::Reflect => {
                let r = reflect_frame(&frame);
                match step_at(&r)? {
                    PrismStep::Split => r,
                    _ => return Err(Error::Contradiction("mirrored prism does not split".into())),
                }
            }
        };
        let t = 2 * kk;
        let piece = vec![f[0], f[1], f[2], f[3], f[t], f[t + 1]];
        let (a, b) = (columns_matrix(&l0, &[f[0], f[3], f[t]])?, columns_matrix(&l0, &[f[t + 1], f[3], f[t]])?);
        if !charmat::is_unimodular(a.rows()) || !charmat::is_unimodular(b.rows()) {
            return Err(Error::Contradiction(format!("cut along F{} ∩ F{} creates a singular vertex", f[3], f[t])));
        }
        gluings.push(Gluing::Edge { edge: vec![f[3], f[t]], tips: [f[0], f[t + 1]] });
        frames.push(piece);
        frame = std::iter::once(f[0]).chain(f[3..=t].iter().copied()).chain([f[t + 1]]).collect();
    }
    let pieces = frames
        .into_iter()
        .map(|facets| {
            let kk = (facets.len() - 2) / 2;
            let polytope = SimplePolytope::prism(2 * kk)?;
            let matrix = columns_matrix(&l0, &facets)?;
            let string = stringcheck::is_string(&polytope, &matrix)?;
            if !string {
                return Err(Error::Contradiction(format!("piece on facets {facets:?} is not string")));
            }
            let bundle_type = Some(bundle_certificate(&polytope, &prism_splits(kk), &matrix)?.is_some());
            Ok(Piece { polytope, matrix, facets, bundle_type, string })
        })
        .collect::<Result<Vec<_>>>()?;
    let verdict = if pieces.len() == 1 { DecompositionVerdict::Irreducible } else { DecompositionVerdict::Decomposed };
    Ok(DecompositionReport { verdict, pieces, gluings, moves, normalized_matrix: l0 })
}

// ---- cube connected sums ----

/// `Iⁿ # Pⁿ` glued at `∩_{i>n} F'_i` and `∩_{i≤n} F''_i`: facets `1..n` come
/// from the cube, `n+1..2n` are merged, and `2n+1..n+m` are the remaining
/// facets of `P`.
pub fn cube_connsum_polytope(right: &SimplePolytope) -> Result<SimplePolytope> {
    let n = right.dim();
    let v: Vec<usize> = (1..=n).collect();
    if !right.is_vertex(&v) {
        return Err(Error::NotAVertex(v));
    }
    let w: Vec<usize> = (n + 1..=2 * n).collect();
    let matching: Vec<(usize, usize)> = (1..=n).map(|i| (n + i, i)).collect();
    Ok(SimplePolytope::cube(n)?.connected_sum(&w, right, &v, &matching)?.0)
}

/// `|det|` of the merged columns, which is 1 exactly when the pair splits
/// as an equivariant connected sum at those facets.
pub fn connsum_a_block_det(p: &SimplePolytope, l: &CharMatrix, merged: &[usize]) -> Result<BigInt> {
    charmat::ensure_valid(p, l)?;
    if merged.len() != l.n() || merged.iter().any(|&f| f == 0 || f > l.m()) {
        return Err(Error::Parameter("merged facets must be n facet labels".into()));
    }
    Ok(intmat::det(&l.columns(merged)).abs())
}

/// Splits a string pair over `Iⁿ # Pⁿ` into string pairs over `Iⁿ` and `Pⁿ`.
pub fn decompose_cube_connsum(right: &SimplePolytope, p: &SimplePolytope, l: &CharMatrix) -> Result<DecompositionReport> {
    let n = right.dim();
    let m = right.num_facets();
    expect_labels("cube connected sum", p, &cube_connsum_polytope(right)?)?;
    let merged: Vec<usize> = (n + 1..=2 * n).collect();
    if !stringcheck::is_string(p, l)? {
        let det = connsum_a_block_det(p, l, &merged)?;
        return Err(Error::Precondition(format!("matrix is not string (merged block |det| = {det})")));
    }
    let v: Vec<usize> = (1..=n).collect();
    let pins: Vec<(usize, usize)> = (1..=n).map(|i| (i, n + i)).collect();
    let (refined, mut moves) = normalize_with_moves(p, l, &v, &pins)?;
    let a = refined.columns(&merged);
    let a_inv = intmat::unimodular_inverse_i64(&a).ok_or_else(|| {
        Error::Contradiction(format!("string matrix has merged block determinant {}", intmat::det(&a)))
    })?;
    let mv = EquivalenceMove::RowBasisChange(a_inv);
    let glued = charmat::transform(p, &refined, &mv)?.mark_refined(&merged)?;
    moves.push(mv);
    let left_facets: Vec<usize> = (1..=2 * n).collect();
    let right_facets: Vec<usize> = (n + 1..=n + m).collect();
    let cube = SimplePolytope::cube(n)?;
    let left_matrix = columns_matrix(&glued, &left_facets)?.mark_refined(&merged)?;
    let right_matrix = columns_matrix(&glued, &right_facets)?;
    let pieces = [(cube, left_matrix, left_facets), (right.clone(), right_matrix, right_facets)]
        .into_iter()
        .map(|(polytope, matrix, facets)| {
            let string = stringcheck::is_string(&polytope, &matrix)?;
            if !string {
                return Err(Error::Contradiction(format!("summand on facets {facets:?} is not string")));
            }
            Ok(Piece { polytope, matrix, facets, bundle_type: None, string })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DecompositionReport {
        verdict: DecompositionVerdict::Decomposed,
        pieces,
        gluings: vec![Gluing::Vertex { merged }],
        moves,
        normalized_matrix: glued,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cm(rows: Vec<Vec<i64>>) -> CharMatrix {
        CharMatrix::new(rows).unwrap()
    }

    #[test]
    fn minor_forms() {
        let u = vec![vec![1, 2, 3], vec![0, 1, 4], vec![0, 0, 1]];
        let f = dobrinskaya_normalize(&u).unwrap();
        assert_eq!(f.shape, MinorShape::Unipotent);
        assert_eq!(f.matrix, u);
        let cyc = vec![vec![1, -1, 0], vec![0, 1, -1], vec![-2, 0, 1]];
        let f = dobrinskaya_normalize(&cyc).unwrap();
        assert_eq!(f.shape, MinorShape::Cycle { b: vec![-1, -1, -2] });
        let bad = vec![vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]];
        let f = dobrinskaya_normalize(&bad).unwrap();
        assert_eq!(f.shape, MinorShape::NotApplicable { minor: vec![1, 2, 3], value: BigInt::from(2) });
        // A lower triangular block is conjugate to an upper one.
        let low = vec![vec![1, 0, 0], vec![5, 1, 0], vec![0, 7, 1]];
        let f = dobrinskaya_normalize(&low).unwrap();
        assert_eq!(f.perm, vec![3, 2, 1]);
        assert_eq!(f.matrix, vec![vec![1, 7, 0], vec![0, 1, 5], vec![0, 0, 1]]);
    }

    #[test]
    fn bott_examples() {
        let c3 = SimplePolytope::cube(3).unwrap();
        let l = cm(vec![vec![1, 0, 0, 1, 2, 1], vec![0, 1, 0, 0, 1, 1], vec![0, 0, 1, 0, 0, 1]]);
        match bott_triangularize(&c3, &l).unwrap() {
            BottOutcome::Triangular { matrix, moves } => {
                assert_eq!(&matrix, &l);
                assert!(moves.is_empty());
            }
            o => panic!("{o:?}"),
        }
        // Spin but not string: λ_{1,5} λ_{2,4} = 2.
        let l = cm(vec![vec![1, 0, 0, 1, 1, 0], vec![0, 1, 0, 2, 1, 0], vec![0, 0, 1, 0, 1, 1]]);
        assert!(stringcheck::is_spin(&c3, &l).unwrap());
        assert!(!stringcheck::is_string(&c3, &l).unwrap());
        match bott_triangularize(&c3, &l).unwrap() {
            BottOutcome::Obstructed { pair_product, .. } => assert_eq!(pair_product, Some(2)),
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn bott_moves_replay() {
        let c3 = SimplePolytope::cube(3).unwrap();
        // Lower triangular string block, refined at a different vertex.
        let l = cm(vec![vec![1, 0, 0, 1, 0, 0], vec![0, 1, 0, 2, 1, 0], vec![0, 0, 1, 0, 0, 1]]);
        assert!(stringcheck::is_string(&c3, &l).unwrap());
        let moved = charmat::refine(&c3, &l, &[2, 3, 4]).unwrap();
        let BottOutcome::Triangular { matrix, moves } = bott_triangularize(&c3, &moved).unwrap() else { panic!() };
        assert_eq!(&replay(&c3, &moved, &moves).unwrap(), &matrix);
    }

    #[test]
    fn non_bundle_l6_example_splits_into_known_l4_pieces() {
        let p = SimplePolytope::prism(6).unwrap();
        let l = cm(vec![vec![1, 0, 0, 1, 0, 0, 0, 1], vec![0, 1, 0, 1, 0, 1, 0, 0], vec![0, 0, 1, 1, 1, 0, 1, 2]]);
        let first = bundle_blocks(&p, &[1, 8], &l).unwrap();
        assert!(!first.upper_zero && !first.lower_zero);
        let r = decompose_prism(&p, &l).unwrap();
        assert_eq!(r.verdict, DecompositionVerdict::Decomposed);
        assert_eq!(r.pieces.len(), 2);
        assert!(r.pieces.iter().all(|x| x.string && x.bundle_type == Some(true)));
        verify_reassembly(&p, &l, &r).unwrap();
        let l4 = SimplePolytope::prism(4).unwrap();
        let known1 = cm(vec![vec![1, 0, 0, 1, 0, 1], vec![0, 1, 0, 1, 0, 0], vec![0, 0, 1, 1, 1, 2]]);
        let known2 = cm(vec![vec![1, 1, 0, 0, 0, 1], vec![0, 1, 0, 1, 0, 0], vec![0, 1, 1, 0, 1, 2]]);
        let key = |q: &SimplePolytope, x: &CharMatrix| {
            let r = stringcheck::ensure_refined(q, x).unwrap();
            charmat::canonical_key(q, &r, charmat::Dedup::SignsAndAutomorphisms).unwrap()
        };
        let mut got: Vec<_> = r.pieces.iter().map(|x| key(&x.polytope, &x.matrix)).collect();
        let mut want = vec![key(&l4, &known1), key(&l4, &known2)];
        got.sort();
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn known_l4_pieces_are_bundle_type() {
        let l4 = SimplePolytope::prism(4).unwrap();
        for rows in [
            vec![vec![1, 0, 0, 1, 0, 1], vec![0, 1, 0, 1, 0, 0], vec![0, 0, 1, 1, 1, 2]],
            vec![vec![1, 1, 0, 0, 0, 1], vec![0, 1, 0, 1, 0, 0], vec![0, 1, 1, 0, 1, 2]],
        ] {
            let l = cm(rows);
            assert!(stringcheck::is_string(&l4, &l).unwrap());
            assert!(bundle_certificate(&l4, &prism_splits(2), &l).unwrap().is_some());
        }
    }

    #[test]
    fn edge_sum_reports_first_mismatch() {
        let l4 = SimplePolytope::prism(4).unwrap();
        let a = cm(vec![vec![1, 0, 0, 0, 0, 1], vec![0, 1, 0, 1, 0, 0], vec![0, 0, 1, 0, 1, 0]]);
        let c = cm(vec![vec![1, 0, 0, 0, 0, 1], vec![0, 0, 1, 0, 1, 0], vec![0, 1, 0, 1, 0, 0]]);
        let b = cm(vec![vec![1, 0, 0, 0, 0, 1], vec![0, 0, 1, 0, 1, 0], vec![0, 1, 0, 1, 0, 1]]);
        let m = [(5, 4), (2, 3), (1, 1), (6, 6)];
        let e = equivariant_edge_connected_sum(&l4, &a, &[2, 5], &l4, &b, &[3, 4], &m).unwrap_err();
        assert!(e.to_string().contains("pair 4"), "{e}");
        let g = equivariant_edge_connected_sum(&l4, &a, &[2, 5], &l4, &c, &[3, 4], &m).unwrap();
        assert_eq!(g.polytope.num_facets(), 8);
        assert!(stringcheck::is_string(&g.polytope, &g.matrix).unwrap());
    }

    #[test]
    fn connected_sum_of_linear_models() {
        let c3 = SimplePolytope::cube(3).unwrap();
        let id = cm(vec![vec![1, 0, 0, 1, 0, 0], vec![0, 1, 0, 0, 1, 0], vec![0, 0, 1, 0, 0, 1]]);
        let g = equivariant_connected_sum(&c3, &id, &c3, &id).unwrap();
        assert_eq!(g.polytope.num_facets(), 9);
        assert!(stringcheck::is_string(&g.polytope, &g.matrix).unwrap());
    }

    #[test]
    fn cube_connsum_round_trip() {
        let c3 = SimplePolytope::cube(3).unwrap();
        let left = cm(vec![vec![1, 2, 0, 1, 0, 0], vec![0, 1, 0, 0, 1, 0], vec![0, 0, 1, 0, 0, 1]]).mark_refined(&[4, 5, 6]).unwrap();
        let right = cm(vec![vec![1, 0, 0, 1, 0, 1], vec![0, 1, 0, 0, 1, 1], vec![0, 0, 1, 0, 0, 1]]);
        assert!(stringcheck::is_string(&c3, &left).unwrap());
        assert!(stringcheck::is_string(&c3, &right).unwrap());
        let g = equivariant_connected_sum(&c3, &left, &c3, &right).unwrap();
        let p = cube_connsum_polytope(&c3).unwrap();
        assert_eq!(g.polytope.vertices(), p.vertices());
        let r = decompose_cube_connsum(&c3, &p, &g.matrix).unwrap();
        verify_reassembly(&p, &g.matrix, &r).unwrap();
        assert_eq!(r.pieces[0].matrix.rows(), left.rows());
        assert_eq!(r.pieces[1].matrix.rows(), right.rows());
    }
}
