//! JSON file formats for polytopes, matrices and reports.

use crate::charmat::{CharMatrix, EquivalenceMove};
use crate::cohomology::{self, BasisReducer, ClassReport};
use crate::error::{Error, Result};
use crate::polytope::SimplePolytope;
use crate::smallcover::Mod2CharMatrix;
use crate::structure::{DecompositionReport, DecompositionVerdict, Gluing};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use std::path::Path;

/// `{"dim": 3, "num_facets": 6, "vertices": [[1,2,3], ...], "name": "cube(3)"}`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolytopeFile {
    pub dim: usize,
    pub num_facets: usize,
    pub vertices: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl From<&SimplePolytope> for PolytopeFile {
    fn from(p: &SimplePolytope) -> Self {
        Self {
            dim: p.dim(),
            num_facets: p.num_facets(),
            vertices: p.vertices().to_vec(),
            name: p.name().map(str::to_string),
        }
    }
}

impl TryFrom<PolytopeFile> for SimplePolytope {
    type Error = Error;

    fn try_from(f: PolytopeFile) -> Result<Self> {
        let p = SimplePolytope::new(f.dim, f.num_facets, f.vertices)?;
        Ok(match f.name {
            Some(n) => p.with_name(n),
            None => p,
        })
    }
}

/// `{"rows": [[1,0,1], [0,1,1]]}`, optionally with the refining vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub rows: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refined_at: Option<Vec<usize>>,
}

impl From<&CharMatrix> for MatrixFile {
    fn from(l: &CharMatrix) -> Self {
        Self { rows: l.rows().clone(), refined_at: l.refined_at().map(<[usize]>::to_vec) }
    }
}

impl TryFrom<MatrixFile> for CharMatrix {
    type Error = Error;

    fn try_from(f: MatrixFile) -> Result<Self> {
        let l = CharMatrix::new(f.rows)?;
        match f.refined_at {
            Some(v) => l.mark_refined(&v),
            None => Ok(l),
        }
    }
}

/// `{"rows_mod2": [[1,0,1], [0,1,1]]}`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mod2MatrixFile {
    pub rows_mod2: Vec<Vec<u8>>,
}

impl From<&Mod2CharMatrix> for Mod2MatrixFile {
    fn from(l: &Mod2CharMatrix) -> Self {
        Self { rows_mod2: l.to_rows() }
    }
}

impl TryFrom<Mod2MatrixFile> for Mod2CharMatrix {
    type Error = Error;

    fn try_from(f: Mod2MatrixFile) -> Result<Self> {
        Mod2CharMatrix::new(&f.rows_mod2)
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = to_json(value)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))
}

pub fn read_polytope(path: &Path) -> Result<SimplePolytope> {
    read_json::<PolytopeFile>(path)?.try_into()
}

pub fn read_matrix(path: &Path) -> Result<CharMatrix> {
    read_json::<MatrixFile>(path)?.try_into()
}

pub fn read_mod2_matrix(path: &Path) -> Result<Mod2CharMatrix> {
    read_json::<Mod2MatrixFile>(path)?.try_into()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Term {
    pub monomial: (usize, usize),
    pub coeff: i64,
}

/// Spin/string verdict with the Smith certificate and `p₁` on a basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassesJson {
    pub spin: bool,
    pub string: bool,
    pub refined_at: Vec<usize>,
    pub free: Vec<usize>,
    pub generators: usize,
    pub relations: usize,
    pub invariant_factors_all_one: bool,
    pub quotient_rank: usize,
    pub basis: Vec<(usize, usize)>,
    pub p1_on_basis: Vec<Term>,
}

pub fn classes_json(l: &CharMatrix, r: &ClassReport) -> Result<ClassesJson> {
    let pres = &r.presentation;
    let basis = cohomology::greedy_basis(pres);
    let coeffs = BasisReducer::new(pres, &basis)?.reduce(pres, &r.p1)?;
    Ok(ClassesJson {
        spin: r.spin,
        string: r.string,
        refined_at: l.refined_at().map(<[usize]>::to_vec).unwrap_or_default(),
        free: pres.free.clone(),
        generators: pres.generators.len(),
        relations: pres.relations.len(),
        invariant_factors_all_one: pres.snf_ok(),
        quotient_rank: pres.quotient_rank,
        p1_on_basis: basis.iter().zip(&coeffs).map(|(&monomial, &coeff)| Term { monomial, coeff }).collect(),
        basis,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MoveJson {
    RowBasisChange { matrix: Vec<Vec<i64>> },
    ColumnSignFlip { facet: usize },
    FacetPermutation { perm: Vec<usize> },
}

impl From<&EquivalenceMove> for MoveJson {
    fn from(m: &EquivalenceMove) -> Self {
        match m {
            EquivalenceMove::RowBasisChange(a) => Self::RowBasisChange { matrix: a.clone() },
            EquivalenceMove::ColumnSignFlip(j) => Self::ColumnSignFlip { facet: *j },
            EquivalenceMove::FacetPermutation(p) => Self::FacetPermutation { perm: p.clone() },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PieceJson {
    pub polytope: PolytopeFile,
    pub matrix: Vec<Vec<i64>>,
    /// Input facet label of each piece facet.
    pub facets: Vec<usize>,
    pub bundle_type: Option<bool>,
    pub string: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GluingJson {
    Edge { edge: Vec<usize>, tips: [usize; 2] },
    Vertex { merged: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecompositionJson {
    pub decomposed: bool,
    pub pieces: Vec<PieceJson>,
    pub gluings: Vec<GluingJson>,
    pub moves: Vec<MoveJson>,
    pub normalized_matrix: Vec<Vec<i64>>,
}

impl From<&DecompositionReport> for DecompositionJson {
    fn from(r: &DecompositionReport) -> Self {
        Self {
            decomposed: r.verdict == DecompositionVerdict::Decomposed,
            pieces: r
                .pieces
                .iter()
                .map(|p| PieceJson {
                    polytope: (&p.polytope).into(),
                    matrix: p.matrix.rows().clone(),
                    facets: p.facets.clone(),
                    bundle_type: p.bundle_type,
                    string: p.string,
                })
                .collect(),
            gluings: r
                .gluings
                .iter()
                .map(|g| match g {
                    Gluing::Edge { edge, tips } => GluingJson::Edge { edge: edge.clone(), tips: *tips },
                    Gluing::Vertex { merged } => GluingJson::Vertex { merged: merged.clone() },
                })
                .collect(),
            moves: r.moves.iter().map(MoveJson::from).collect(),
            normalized_matrix: r.normalized_matrix.rows().clone(),
        }
    }
}
