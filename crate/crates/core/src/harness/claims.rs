//! Named campaigns: each runs a bounded search or randomized sweep and
//! re-checks every survivor through the core modules.

use super::{enumerate, Caps, Filter, SearchResult, SearchSpec, SearchStats};
use crate::charmat::{CharMatrix, Dedup};
use crate::error::{Error, Result};
use crate::polytope::SimplePolytope;
use crate::smallcover::{self, Mod2Filter};
use crate::stringcheck;
use crate::structure::{self, BottOutcome};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const CLAIM_IDS: [&str; 10] = [
    "odd-gon-not-spin",
    "polygon-parity",
    "polygon-bordism-parity",
    "cube-string-is-bott",
    "cyclic-identities",
    "prism-decompose",
    "cube-connsum",
    "c5xc5-not-spin",
    "product-simplices-obstruction",
    "smallcover-simplex-products",
];

/// Campaign parameters; unset fields take per-claim defaults.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ClaimParams {
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub bound: Option<i64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub ns: Option<Vec<usize>>,
    #[serde(skip)]
    pub caps: Caps,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClaimVerdict {
    Verified,
    Counterexample,
    ResourceCapped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub polytope: String,
    pub matrix: Vec<Vec<i64>>,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClaimReport {
    pub id: String,
    /// Effective parameters after defaults.
    pub params: ClaimParams,
    pub verdict: ClaimVerdict,
    pub stats: SearchStats,
    pub witnesses: Vec<Witness>,
    pub notes: Vec<String>,
}

struct Run {
    stats: SearchStats,
    witnesses: Vec<Witness>,
    notes: Vec<String>,
    capped: bool,
}

impl Run {
    fn new() -> Self {
        Self { stats: SearchStats::default(), witnesses: Vec::new(), notes: Vec::new(), capped: false }
    }

    /// Runs a search, folding its statistics in. `None` after a cap hit.
    fn search(&mut self, spec: &SearchSpec) -> Result<Option<SearchResult>> {
        match enumerate(spec) {
            Ok(r) => {
                self.absorb(&r.stats);
                Ok(Some(r))
            }
            Err(Error::ResourceCap(msg)) => {
                self.capped = true;
                self.notes.push(msg);
                Ok(None)
            }
            Err(e) => Err(e),
        }
    }

    fn absorb(&mut self, s: &SearchStats) {
        self.stats.nodes += s.nodes;
        self.stats.pruned += s.pruned;
        self.stats.candidates += s.candidates;
        self.stats.survivors += s.survivors;
    }

    fn witness(&mut self, p: &SimplePolytope, l: &CharMatrix, detail: impl Into<String>) {
        self.witnesses.push(Witness {
            polytope: p.name().unwrap_or("polytope").to_string(),
            matrix: l.rows().clone(),
            detail: detail.into(),
        });
    }

    /// Records a failed check on `l`; errors other than caps count as failures.
    fn check(&mut self, p: &SimplePolytope, l: &CharMatrix, outcome: Result<Option<String>>) -> Result<()> {
        match outcome {
            Ok(None) => Ok(()),
            Ok(Some(why)) => {
                self.witness(p, l, why);
                Ok(())
            }
            Err(Error::ResourceCap(msg)) => Err(Error::ResourceCap(msg)),
            Err(e) => {
                self.witness(p, l, e.to_string());
                Ok(())
            }
        }
    }
}

fn spec(p: SimplePolytope, bound: i64, filter: Filter, caps: Caps) -> SearchSpec {
    SearchSpec { caps, ..SearchSpec::new(p, bound, filter, Dedup::Signs) }
}

/// Runs the named campaign. Caps surface as a `ResourceCapped` verdict.
pub fn verify_claim(id: &str, params: &ClaimParams) -> Result<ClaimReport> {
    let mut params = params.clone();
    let mut run = Run::new();
    let outcome = match id {
        "odd-gon-not-spin" => odd_gon_not_spin(&mut params, &mut run),
        "polygon-parity" => polygon_parity(&mut params, &mut run),
        "polygon-bordism-parity" => polygon_bordism_parity(&mut params, &mut run),
        "cube-string-is-bott" => cube_string_is_bott(&mut params, &mut run),
        "cyclic-identities" => cyclic(&mut params, &mut run),
        "prism-decompose" => prism_decompose(&mut params, &mut run),
        "cube-connsum" => cube_connsum(&mut params, &mut run),
        "c5xc5-not-spin" => c5xc5(&mut params, &mut run),
        "product-simplices-obstruction" => product_simplices(&mut params, &mut run),
        "smallcover-simplex-products" => smallcover_simplices(&mut params, &mut run),
        other => return Err(Error::UnknownClaim(other.to_string())),
    };
    match outcome {
        Ok(()) => {}
        Err(Error::ResourceCap(msg)) => {
            run.capped = true;
            run.notes.push(msg);
        }
        Err(e) => return Err(e),
    }
    let verdict = if !run.witnesses.is_empty() {
        ClaimVerdict::Counterexample
    } else if run.capped {
        ClaimVerdict::ResourceCapped
    } else {
        ClaimVerdict::Verified
    };
    Ok(ClaimReport { id: id.to_string(), params, verdict, stats: run.stats, witnesses: run.witnesses, notes: run.notes })
}

fn odd_gon_not_spin(params: &mut ClaimParams, run: &mut Run) -> Result<()> {
    let m = *params.m.get_or_insert(5);
    let bound = *params.bound.get_or_insert(3);
    if m % 2 == 0 {
        return Err(Error::Parameter("odd-gon-not-spin needs odd m".into()));
    }
    let p = SimplePolytope::polygon(m)?;
    // Search without the parity filter and ask the cohomology engine.
    let Some(r) = run.search(&spec(p.clone(), bound, Filter::Valid, params.caps))? else { return Ok(()) };
    for l in &r.matrices {
        let spin = stringcheck::is_spin(&p, l);
        run.check(&p, l, spin.map(|s| s.then(|| "spin matrix over an odd polygon".to_string())))?;
    }
    run.notes.push(format!("{} valid classes under bound {bound}, none spin", r.matrices.len()));
    Ok(())
}

fn polygon_parity(params: &mut ClaimParams, run: &mut Run) -> Result<()> {
    let m = *params.m.get_or_insert(6);
    let bound = *params.bound.get_or_insert(3);
    let p = SimplePolytope::polygon(m)?;
    let Some(r) = run.search(&spec(p.clone(), bound, Filter::Valid, params.caps))? else { return Ok(()) };
    let mut strings = 0;
    for l in &r.matrices {
        let out = stringcheck::is_string(&p, l).and_then(|s| {
            strings += usize::from(s);
            let parity = stringcheck::polygon_parity_criterion(l)?;
            Ok((s != parity).then(|| format!("engine string = {s}, parity test = {parity}")))
        });
        run.check(&p, l, out)?;
    }
    run.notes.push(format!("{} valid classes, {strings} string", r.matrices.len()));
    Ok(())
}

fn polygon_bordism_parity(params: &mut ClaimParams, run: &mut Run) -> Result<()> {
    let m = *params.m.get_or_insert(6);
    let bound = *params.bound.get_or_insert(3);
    let p = SimplePolytope::polygon(m)?;
    let Some(r) = run.search(&spec(p.clone(), bound, Filter::Valid, params.caps))? else { return Ok(()) };
    for l in &r.matrices {
        let out = (|| {
            let closed = stringcheck::polygon_closed_form(l)?;
            let (coeff, unit) = stringcheck::polygon_engine(&p, l)?;
            if unit.abs() != 1 || coeff != closed.total * unit {
                return Ok(Some(format!("engine {coeff} (unit {unit}) vs closed form {}", closed.total)));
            }
            if (closed.total - m as i64).rem_euclid(2) != 0 {
                return Ok(Some(format!("sum {} has the wrong parity for m = {m}", closed.total)));
            }
            Ok(None)
        })();
        run.check(&p, l, out)?;
    }
    Ok(())
}

fn cube_string_is_bott(params: &mut ClaimParams, run: &mut Run) -> Result<()> {
    let n = *params.n.get_or_insert(3);
    let bound = *params.bound.get_or_insert(2);
    let p = SimplePolytope::cube(n)?;
    let Some(r) = run.search(&spec(p.clone(), bound, Filter::String, params.caps))? else { return Ok(()) };
    for l in &r.matrices {
        let out = structure::bott_triangularize(&p, l).and_then(|o| match o {
            BottOutcome::Triangular { matrix, moves } => {
                let replayed = structure::replay(&p, l, &moves)?;
                Ok((replayed.rows() != matrix.rows()).then(|| "recorded moves do not reproduce the form".to_string()))
            }
            BottOutcome::Obstructed { form, .. } => Ok(Some(format!("not triangularizable: {:?}", form.shape))),
        });
        run.check(&p, l, out)?;
    }
    run.notes.push(format!("{} string classes under bound {bound}", r.matrices.len()));
    Ok(())
}

fn cyclic(params: &mut ClaimParams, run: &mut Run) -> Result<()> {
    let k = *params.k.get_or_insert(4);
    let trials = *params.trials.get_or_insert(10_000);
    let bound = *params.bound.get_or_insert(5);
    let seed = *params.seed.get_or_insert(0);
    if k < 2 {
        return Err(Error::Parameter("cyclic identities need k >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let cols = stringcheck::random_cyclic_instance(k, bound, &mut rng);
        let sums = stringcheck::cyclic_identities(&cols)?;
        run.stats.candidates += 1;
        if sums.s1_mod8 != 4 || sums.s2 != 0 {
            run.witnesses.push(Witness {
                polytope: format!("cycle of {} columns", cols.len()),
                matrix: (0..3).map(|r| cols.iter().map(|c| c[r]).collect()).collect(),
                detail: format!("S1 mod 8 = {}, S2 = {}", sums.s1_mod8, sums.s2),
            });
        }
    }
    run.stats.survivors = run.stats.candidates;
    Ok(())
}

fn prism_decompose(params: &mut ClaimParams, run: &mut Run) -> Result<()> {
    let k = *params.k.get_or_insert(2);
    let bound = *params.bound.get_or_insert(2);
    if k < 2 {
        return Err(Error::Parameter("prism-decompose needs k >= 2".into()));
    }
    let p = SimplePolytope::prism(2 * k)?;
    let Some(r) = run.search(&spec(p.clone(), bound, Filter::String, params.caps))? else { return Ok(()) };
    for l in &r.matrices {
        let out = structure::decompose_prism(&p, l).and_then(|rep| {
            structure::verify_reassembly(&p, l, &rep)?;
            let bad = rep.pieces.iter().position(|pc| !pc.string || pc.bundle_type != Some(true));
            Ok(bad.map(|i| format!("piece {i} is not a bundle-type string pair")))
        });
        run.check(&p, l, out)?;
    }
    run.notes.push(format!("{} string classes under bound {bound}", r.matrices.len()));
    Ok(())
}

fn cube_connsum(params: &mut ClaimParams, run: &mut Run) -> Result<()> {
    let n = *params.n.get_or_insert(3);
    let bound = *params.bound.get_or_insert(1);
    let right = SimplePolytope::cube(n)?;
    let p = structure::cube_connsum_polytope(&right)?.with_name(format!("cube({n}) # cube({n})"));
    let Some(r) = run.search(&spec(p.clone(), bound, Filter::String, params.caps))? else { return Ok(()) };
    for l in &r.matrices {
        let out = structure::decompose_cube_connsum(&right, &p, l).and_then(|rep| {
            structure::verify_reassembly(&p, l, &rep)?;
            Ok(rep.pieces.iter().any(|pc| !pc.string).then(|| "a summand is not string".to_string()))
        });
        run.check(&p, l, out)?;
    }
    run.notes.push(format!("{} string classes under bound {bound}", r.matrices.len()));
    Ok(())
}

/// A spin matrix reduces mod 2 to an orientable small-cover matrix, so an
/// empty exhaustive orientable search rules out spin for every bound.
fn c5xc5(params: &mut ClaimParams, run: &mut Run) -> Result<()> {
    let pentagon = SimplePolytope::polygon(5)?;
    let p = pentagon.product(&pentagon).0.with_name("C2(5) x C2(5)");
    let r = smallcover::enumerate_mod2(&p, Mod2Filter::Orientable, params.caps)?;
    run.absorb(&r.stats);
    for l in &r.matrices {
        run.witnesses.push(Witness {
            polytope: "C2(5) x C2(5)".into(),
            matrix: l.to_rows().into_iter().map(|r| r.into_iter().map(i64::from).collect()).collect(),
            detail: "mod-2 valid with all free column sums odd".into(),
        });
    }
    run.notes.push(format!("{} mod-2 assignments reached the leaves", r.stats.candidates));
    Ok(())
}

fn product_simplices(params: &mut ClaimParams, run: &mut Run) -> Result<()> {
    let ns = params.ns.get_or_insert_with(|| vec![2, 1]).clone();
    let bound = *params.bound.get_or_insert(1);
    if ns.is_empty() || ns.contains(&0) {
        return Err(Error::Parameter("factor dimensions must be positive".into()));
    }
    let p = smallcover::simplex_product(&ns)?;
    let is_cube = ns.iter().all(|&n| n == 1);
    match p.key_obstruction() {
        Some(w) => {
            let genuine = !w.vertex.contains(&w.facet) && w.vertex.iter().all(|&g| p.adjacent(w.facet, g));
            if is_cube || !genuine {
                run.witnesses.push(Witness {
                    polytope: p.name().unwrap_or("").into(),
                    matrix: Vec::new(),
                    detail: format!("unexpected obstruction facet {} at vertex {:?}", w.facet, w.vertex),
                });
            } else {
                run.notes.push(format!("facet {} is adjacent to every facet of vertex {:?}", w.facet, w.vertex));
            }
        }
        None if !is_cube => run.witnesses.push(Witness {
            polytope: p.name().unwrap_or("").into(),
            matrix: Vec::new(),
            detail: "no obstructing facet found".into(),
        }),
        None => run.notes.push("cube: no obstruction, as expected".into()),
    }
    // Independent check: a bounded search for string matrices.
    if !is_cube && p.num_facets() <= 10 {
        if let Some(r) = run.search(&spec(p.clone(), bound, Filter::String, params.caps))? {
            for l in &r.matrices {
                run.witness(&p, l, "string matrix over a non-cube product of simplices");
            }
        }
    }
    Ok(())
}

fn smallcover_simplices(params: &mut ClaimParams, run: &mut Run) -> Result<()> {
    let cap = params.m.unwrap_or(smallcover::DEFAULT_SIMPLEX_PRODUCT_CAP);
    let shapes = match &params.ns {
        Some(ns) => vec![ns.clone()],
        None => smallcover::simplex_product_shapes(cap),
    };
    for ns in shapes {
        let c = smallcover::verify_simplex_product_criterion(&ns, cap, params.caps)?;
        run.absorb(&c.stats);
        run.notes.push(format!(
            "{ns:?}: predicted {}, {} string of {} orientable",
            c.predicted, c.string_count, c.orientable_count
        ));
        if !c.holds() {
            run.witnesses.push(Witness {
                polytope: format!("simplex_product{ns:?}"),
                matrix: Vec::new(),
                detail: format!("predicted {} but found {} string small covers", c.predicted, c.string_count),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_claim_is_rejected() {
        assert!(matches!(verify_claim("nope", &ClaimParams::default()), Err(Error::UnknownClaim(_))));
    }

    #[test]
    fn odd_gon_example_verifies() {
        let r = verify_claim("odd-gon-not-spin", &ClaimParams { m: Some(5), bound: Some(3), ..Default::default() }).unwrap();
        assert_eq!(r.verdict, ClaimVerdict::Verified);
        assert!(r.witnesses.is_empty());
    }

    #[test]
    fn cyclic_identities_small_run() {
        let params = ClaimParams { k: Some(3), trials: Some(500), ..Default::default() };
        let a = verify_claim("cyclic-identities", &params).unwrap();
        assert_eq!(a.verdict, ClaimVerdict::Verified);
        let b = verify_claim("cyclic-identities", &params).unwrap();
        assert_eq!(a.stats, b.stats);
    }

    #[test]
    fn caps_give_capped_verdict() {
        let mut params = ClaimParams { n: Some(3), bound: Some(2), ..Default::default() };
        params.caps.max_nodes = 50;
        let r = verify_claim("cube-string-is-bott", &params).unwrap();
        assert_eq!(r.verdict, ClaimVerdict::ResourceCapped);
    }

    #[test]
    fn product_simplices_flags_the_obstruction() {
        let r = verify_claim("product-simplices-obstruction", &ClaimParams { ns: Some(vec![2, 1]), ..Default::default() }).unwrap();
        assert_eq!(r.verdict, ClaimVerdict::Verified, "{:?}", r.witnesses);
        let cube = verify_claim("product-simplices-obstruction", &ClaimParams { ns: Some(vec![1, 1, 1]), ..Default::default() }).unwrap();
        assert_eq!(cube.verdict, ClaimVerdict::Verified);
    }
}
