use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use qtm_core::charmat::{self, CharMatrix, Dedup};
use qtm_core::harness::{self, Caps, ClaimParams, ClaimVerdict, Filter, SearchSpec};
use qtm_core::io::{self, ClassesJson, DecompositionJson, MatrixFile, Mod2MatrixFile, PolytopeFile};
use qtm_core::polytope::SimplePolytope;
use qtm_core::{smallcover, stringcheck, structure, Error};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

#[derive(Parser)]
#[command(name = "qtm", version, about = "Spin and string tests for quasitoric manifolds and small covers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a polytope from a built-in family.
    Construct {
        #[arg(value_enum)]
        family: Family,
        /// Family parameter (n, m, s or factor dimensions as 2,3).
        #[arg(long, value_delimiter = ',')]
        size: Vec<usize>,
        /// Second factor for `product`.
        #[arg(long)]
        with: Option<PathBuf>,
        /// First factor for `product`.
        #[arg(short, long)]
        polytope: Option<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Check the vertex determinant condition.
    Validate {
        #[arg(short, long)]
        polytope: PathBuf,
        #[arg(short, long)]
        matrix: PathBuf,
    },
    /// Degree-4 presentation, Smith certificate and p1 on a monomial basis.
    Classes {
        #[arg(short, long)]
        polytope: PathBuf,
        #[arg(short, long)]
        matrix: PathBuf,
        /// Refine at this vertex instead of the first one.
        #[arg(long, value_delimiter = ',')]
        refine_at: Option<Vec<usize>>,
    },
    /// Spin and string verdicts; exits 1 when not string.
    CheckString {
        #[arg(short, long)]
        polytope: PathBuf,
        #[arg(short, long)]
        matrix: PathBuf,
    },
    /// Bounded exhaustive search for refined characteristic matrices.
    Enumerate {
        #[arg(short, long)]
        polytope: PathBuf,
        #[arg(long)]
        bound: i64,
        #[arg(long, value_enum, default_value = "valid")]
        filter: FilterArg,
        #[arg(long, value_enum, default_value = "signs")]
        dedup: DedupArg,
        #[command(flatten)]
        caps: CapArgs,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Split a string pair into its documented pieces.
    Decompose {
        #[command(subcommand)]
        kind: DecomposeKind,
    },
    /// Orientability and spin (= string) test for a mod-2 matrix.
    Smallcover {
        #[arg(short, long)]
        polytope: PathBuf,
        /// File with {"rows_mod2": [...]}.
        #[arg(short, long)]
        matrix: PathBuf,
    },
    /// Run a named verification campaign.
    Verify {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(harness::CLAIM_IDS))]
        claim: String,
        #[arg(long)]
        bound: Option<i64>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        ns: Option<Vec<usize>>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        caps: CapArgs,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum DecomposeKind {
    /// String pair over an even prism, split by edge connected sums.
    Prism {
        #[arg(short, long)]
        polytope: PathBuf,
        #[arg(short, long)]
        matrix: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// String pair over a cube glued to `--right` at a vertex.
    CubeConnsum {
        #[arg(long)]
        right: PathBuf,
        #[arg(short, long)]
        polytope: PathBuf,
        #[arg(short, long)]
        matrix: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct CapArgs {
    #[arg(long, default_value_t = 1_000_000_000)]
    max_nodes: u64,
    #[arg(long, default_value_t = 3600)]
    max_seconds: u64,
}

impl CapArgs {
    fn caps(&self) -> Caps {
        Caps { max_nodes: self.max_nodes, max_time: Duration::from_secs(self.max_seconds) }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Simplex,
    Polygon,
    Cube,
    Prism,
    Q,
    PentPrism,
    QPrism,
    SimplexProduct,
    CubeConnsumCube,
    Product,
}

#[derive(Clone, Copy, ValueEnum)]
enum FilterArg {
    Valid,
    Spin,
    String,
}

#[derive(Clone, Copy, ValueEnum)]
enum DedupArg {
    None,
    Signs,
    SignsAutomorphisms,
}

fn one(size: &[usize], family: &str) -> Result<usize> {
    match size {
        [n] => Ok(*n),
        _ => bail!("{family} takes exactly one --size value"),
    }
}

fn construct(family: Family, size: &[usize], left: Option<&Path>, with: Option<&Path>) -> Result<SimplePolytope> {
    Ok(match family {
        Family::Simplex => SimplePolytope::simplex(one(size, "simplex")?)?,
        Family::Polygon => SimplePolytope::polygon(one(size, "polygon")?)?,
        Family::Cube => SimplePolytope::cube(one(size, "cube")?)?,
        Family::Prism => SimplePolytope::prism(one(size, "prism")?)?,
        Family::Q => SimplePolytope::q()?,
        Family::PentPrism => stringcheck::pent_prism(one(size, "pent-prism")?)?,
        Family::QPrism => stringcheck::q_prism(one(size, "q-prism")?)?,
        Family::SimplexProduct => smallcover::simplex_product(size)?,
        Family::CubeConnsumCube => {
            let n = one(size, "cube-connsum-cube")?;
            structure::cube_connsum_polytope(&SimplePolytope::cube(n)?)?.with_name(format!("cube({n}) # cube({n})"))
        }
        Family::Product => {
            let (Some(a), Some(b)) = (left, with) else { bail!("product needs --polytope and --with") };
            io::read_polytope(a)?.product(&io::read_polytope(b)?).0
        }
    })
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => io::write_json(path, value)?,
        None => println!("{}", io::to_json(value)?),
    }
    Ok(())
}

fn load(polytope: &Path, matrix: &Path) -> Result<(SimplePolytope, CharMatrix)> {
    let p = io::read_polytope(polytope).with_context(|| format!("reading {}", polytope.display()))?;
    let l = io::read_matrix(matrix).with_context(|| format!("reading {}", matrix.display()))?;
    Ok((p, l))
}

#[derive(Serialize)]
struct EnumerateOut {
    stats: harness::SearchStats,
    matrices: Vec<MatrixFile>,
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Construct { family, size, with, polytope, out } => {
            let p = construct(family, &size, polytope.as_deref(), with.as_deref())?;
            emit(&PolytopeFile::from(&p), out.as_deref())?;
        }
        Command::Validate { polytope, matrix } => {
            let (p, l) = load(&polytope, &matrix)?;
            match charmat::validate(&p, &l)? {
                None => println!("valid"),
                Some(v) => {
                    println!("invalid: vertex {v:?} is not unimodular");
                    return Ok(ExitCode::from(1));
                }
            }
        }
        Command::Classes { polytope, matrix, refine_at } => {
            let (p, l) = load(&polytope, &matrix)?;
            let l = match refine_at {
                Some(v) => charmat::refine(&p, &l, &v)?,
                None => stringcheck::ensure_refined(&p, &l)?,
            };
            let r = qtm_core::cohomology::classes(&p, &l)?;
            let json: ClassesJson = io::classes_json(&l, &r)?;
            emit(&json, None)?;
        }
        Command::CheckString { polytope, matrix } => {
            let (p, l) = load(&polytope, &matrix)?;
            let r = stringcheck::check(&p, &l)?;
            println!("spin: {}\nstring: {}", r.spin, r.string);
            if !r.string {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Enumerate { polytope, bound, filter, dedup, caps, out } => {
            let p = io::read_polytope(&polytope)?;
            let filter = match filter {
                FilterArg::Valid => Filter::Valid,
                FilterArg::Spin => Filter::Spin,
                FilterArg::String => Filter::String,
            };
            let dedup = match dedup {
                DedupArg::None => Dedup::None,
                DedupArg::Signs => Dedup::Signs,
                DedupArg::SignsAutomorphisms => Dedup::SignsAndAutomorphisms,
            };
            let spec = SearchSpec { caps: caps.caps(), ..SearchSpec::new(p, bound, filter, dedup) };
            let r = harness::enumerate(&spec)?;
            eprintln!("{} survivors, {} nodes, {} pruned", r.stats.survivors, r.stats.nodes, r.stats.pruned);
            let result = EnumerateOut { stats: r.stats, matrices: r.matrices.iter().map(MatrixFile::from).collect() };
            emit(&result, out.as_deref())?;
        }
        Command::Decompose { kind } => {
            let (report, out) = match kind {
                DecomposeKind::Prism { polytope, matrix, out } => {
                    let (p, l) = load(&polytope, &matrix)?;
                    let r = structure::decompose_prism(&p, &l)?;
                    structure::verify_reassembly(&p, &l, &r)?;
                    (r, out)
                }
                DecomposeKind::CubeConnsum { right, polytope, matrix, out } => {
                    let (p, l) = load(&polytope, &matrix)?;
                    let r = structure::decompose_cube_connsum(&io::read_polytope(&right)?, &p, &l)?;
                    structure::verify_reassembly(&p, &l, &r)?;
                    (r, out)
                }
            };
            emit(&DecompositionJson::from(&report), out.as_deref())?;
        }
        Command::Smallcover { polytope, matrix } => {
            let p = io::read_polytope(&polytope)?;
            let l: smallcover::Mod2CharMatrix = io::read_json::<Mod2MatrixFile>(&matrix)?.try_into()?;
            if let Some(v) = smallcover::singular_vertex(&p, &l)? {
                println!("invalid: vertex {v:?} is singular mod 2");
                return Ok(ExitCode::from(1));
            }
            let r = smallcover::report(&p, &l)?;
            emit(&r, None)?;
            if !r.string {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Verify { claim, bound, trials, m, n, k, ns, seed, caps, out } => {
            let params = ClaimParams { m, n, k, bound, trials, seed, ns, caps: caps.caps() };
            let r = harness::verify_claim(&claim, &params)?;
            eprintln!("{}: {:?} ({} witnesses)", r.id, r.verdict, r.witnesses.len());
            emit(&r, out.as_deref())?;
            return Ok(ExitCode::from(match r.verdict {
                ClaimVerdict::Verified => 0,
                ClaimVerdict::Counterexample => 1,
                ClaimVerdict::ResourceCapped => 3,
            }));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::ResourceCap(_)) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
