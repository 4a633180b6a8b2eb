//! The `--space` selector: `mpq` (with `--p`, `--q`), `group:su2`,
//! `group:su2+su2`, `torus` (with `--n`) or `json:PATH`.

use std::path::PathBuf;

use clap::Args;
use grf_homog_core::catalog::{self, BiInvariantModel, FlatTorus, MpqSpace};
use grf_homog_core::lie::Orientation;
use grf_homog_core::{LieAlgebra, ReductiveSpace};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::io;

#[derive(Args, Debug, Clone)]
pub struct SpaceArgs {
    /// mpq | group:su2 | group:su2+su2 | torus | json:PATH
    #[arg(long, default_value = "mpq")]
    pub space: String,
    /// First winding number of M_{p,q}.
    #[arg(long)]
    pub p: Option<u32>,
    /// Second winding number of M_{p,q}.
    #[arg(long)]
    pub q: Option<u32>,
    /// Dimension of the torus.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpaceSpec {
    Mpq { p: u32, q: u32 },
    Group(String),
    Torus(usize),
    Json(PathBuf),
}

pub enum Space {
    Mpq(MpqSpace),
    Group { name: String, model: BiInvariantModel },
    Torus(FlatTorus),
    /// An imported algebra; `model` is set when it is a compact-type group.
    Custom { name: String, space: ReductiveSpace, model: Option<BiInvariantModel> },
}

impl SpaceArgs {
    pub fn spec(&self) -> CliResult<SpaceSpec> {
        let (kind, arg) = match self.space.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (self.space.as_str(), None),
        };
        let unused = |flag: &str, set: bool| {
            if set {
                Err(CliError::usage(format!("--{flag} does not apply to --space {}", self.space)))
            } else {
                Ok(())
            }
        };
        match (kind, arg) {
            ("mpq", None) => {
                unused("n", self.n.is_some())?;
                match (self.p, self.q) {
                    (Some(p), Some(q)) => Ok(SpaceSpec::Mpq { p, q }),
                    _ => Err(CliError::usage("--space mpq needs --p and --q")),
                }
            }
            ("group", Some(name)) => {
                unused("p", self.p.is_some())?;
                unused("q", self.q.is_some())?;
                unused("n", self.n.is_some())?;
                Ok(SpaceSpec::Group(name.to_string()))
            }
            ("torus", None) => {
                unused("p", self.p.is_some())?;
                unused("q", self.q.is_some())?;
                Ok(SpaceSpec::Torus(self.n.unwrap_or(3)))
            }
            ("json", Some(path)) if !path.is_empty() => {
                unused("p", self.p.is_some())?;
                unused("q", self.q.is_some())?;
                unused("n", self.n.is_some())?;
                Ok(SpaceSpec::Json(PathBuf::from(path)))
            }
            _ => Err(CliError::usage(format!(
                "unknown space {:?} (expected mpq, group:NAME, torus or json:PATH)",
                self.space
            ))),
        }
    }

    pub fn resolve(&self) -> CliResult<Space> {
        self.spec()?.resolve()
    }
}

pub fn group_algebra(name: &str) -> CliResult<LieAlgebra> {
    match name {
        "su2" => Ok(catalog::su2()),
        "su2+su2" => Ok(catalog::su2_sum()),
        other => Err(CliError::usage(format!("unknown group {other:?} (expected su2 or su2+su2)"))),
    }
}

impl SpaceSpec {
    pub fn resolve(&self) -> CliResult<Space> {
        match self {
            SpaceSpec::Mpq { p, q } => Ok(Space::Mpq(catalog::mpq(*p, *q)?)),
            SpaceSpec::Group(name) => {
                let model = catalog::bi_invariant_group(&group_algebra(name)?, 1.0)?;
                Ok(Space::Group { name: name.clone(), model })
            }
            SpaceSpec::Torus(n) => Ok(Space::Torus(catalog::flat_torus(*n)?)),
            SpaceSpec::Json(path) => {
                let import = io::parse_algebra(&io::read_text(path)?).map_err(|e| e.context(path.display()))?;
                let algebra = import.algebra;
                let name = path.display().to_string();
                if import.isotropy.is_empty() {
                    let model = catalog::bi_invariant_group(&algebra, 1.0).ok();
                    Ok(Space::Custom { name, space: ReductiveSpace::group(algebra), model })
                } else {
                    let m: Vec<usize> = (0..algebra.dim()).filter(|i| !import.isotropy.contains(i)).collect();
                    let space = ReductiveSpace::new(algebra, &import.isotropy, &m, Orientation::Positive)?;
                    Ok(Space::Custom { name, space, model: None })
                }
            }
        }
    }
}

impl Space {
    pub fn reductive(&self) -> &ReductiveSpace {
        match self {
            Space::Mpq(m) => m.space(),
            Space::Group { model, .. } => &model.space,
            Space::Torus(t) => &t.space,
            Space::Custom { space, .. } => space,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Space::Mpq(m) => format!("M_{{{},{}}}", m.p(), m.q()),
            Space::Group { name, .. } => format!("group:{name}"),
            Space::Torus(t) => format!("torus:{}", t.space.m_dim()),
            Space::Custom { name, .. } => format!("json:{name}"),
        }
    }

    pub fn describe(&self) -> Value {
        match self {
            Space::Mpq(m) => json!({"kind": "mpq", "p": m.p(), "q": m.q()}),
            Space::Group { name, .. } => json!({"kind": "group", "name": name}),
            Space::Torus(t) => json!({"kind": "torus", "n": t.space.m_dim()}),
            Space::Custom { name, .. } => json!({"kind": "json", "path": name}),
        }
    }

    pub fn mpq(&self) -> CliResult<&MpqSpace> {
        match self {
            Space::Mpq(m) => Ok(m),
            _ => Err(CliError::usage(format!("this command needs --space mpq (got {})", self.label()))),
        }
    }
}
