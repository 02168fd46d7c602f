//! JSON map and hole configuration.
//!
//! ```json
//! { "codomain": ["0", "1"],
//!   "branches": [{ "domain": ["0", "1/2"], "kind": "affine", "coeffs": ["2", "0"] }],
//!   "hole": [["3/4", "1"]] }
//! ```
//!
//! Numbers are `num/den` strings, integers, or decimals. A single decimal
//! anywhere switches the whole configuration to float mode.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hole::Hole;
use crate::map::{Branch, BranchKind, IntervalOpen, PiecewiseMap};
use crate::scalar::{Scalar, DEFAULT_EPS};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Text(String),
    Int(i64),
    Float(f64),
}

impl Num {
    fn literal(&self) -> String {
        match self {
            Num::Text(s) => s.trim().to_string(),
            Num::Int(i) => i.to_string(),
            Num::Float(f) => format!("{f:?}"),
        }
    }

    fn is_exact(&self) -> bool {
        match self {
            Num::Text(s) => Scalar::is_exact_literal(s),
            Num::Int(_) => true,
            Num::Float(_) => false,
        }
    }

    fn from_scalar(s: &Scalar) -> Num {
        Num::Text(s.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindName {
    Affine,
    Moebius,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchConfig {
    pub domain: [Num; 2],
    pub kind: KindName,
    pub coeffs: Vec<Num>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub codomain: [Num; 2],
    pub branches: Vec<BranchConfig>,
    #[serde(default)]
    pub hole: Vec<[Num; 2]>,
}

impl MapConfig {
    fn numbers(&self) -> impl Iterator<Item = &Num> {
        self.codomain
            .iter()
            .chain(self.branches.iter().flat_map(|b| b.domain.iter().chain(b.coeffs.iter())))
            .chain(self.hole.iter().flatten())
    }

    /// Build the map and hole. `eps` is the float-mode tolerance.
    pub fn build(&self, eps: f64) -> Result<(PiecewiseMap, Hole)> {
        self.build_with(eps, false)
    }

    /// As [`MapConfig::build`], in float mode even for all-exact input when
    /// `force_float` is set.
    pub fn build_with(&self, eps: f64, force_float: bool) -> Result<(PiecewiseMap, Hole)> {
        let float = force_float || self.numbers().any(|n| !n.is_exact());
        let num = |n: &Num| -> Result<Scalar> {
            let s = Scalar::parse(&n.literal(), eps)?;
            Ok(if float { s.to_float(eps) } else { s })
        };
        let mut branches = Vec::with_capacity(self.branches.len());
        for (i, b) in self.branches.iter().enumerate() {
            let domain = IntervalOpen::new(num(&b.domain[0])?, num(&b.domain[1])?)?;
            let c: Vec<Scalar> = b.coeffs.iter().map(num).collect::<Result<_>>()?;
            let kind = match (&b.kind, c.as_slice()) {
                (KindName::Affine, [slope, offset]) => {
                    BranchKind::Affine { slope: slope.clone(), offset: offset.clone() }
                }
                (KindName::Moebius, [p, q, r, s]) => {
                    BranchKind::Moebius { p: p.clone(), q: q.clone(), r: r.clone(), s: s.clone() }
                }
                (KindName::Affine, _) => {
                    return Err(Error::Parse(format!("branch {i}: affine needs 2 coefficients [slope, offset]")))
                }
                (KindName::Moebius, _) => {
                    return Err(Error::Parse(format!("branch {i}: moebius needs 4 coefficients [p, q, r, s]")))
                }
            };
            branches.push(Branch::new(domain, kind)?);
        }
        let map = PiecewiseMap::new(IntervalOpen::new(num(&self.codomain[0])?, num(&self.codomain[1])?)?, branches)?;
        let pieces = self.hole.iter().map(|[lo, hi]| Ok((num(lo)?, num(hi)?))).collect::<Result<Vec<_>>>()?;
        let hole = Hole::new(pieces)?;
        map.check_hole(&hole)?;
        Ok((map, hole))
    }

    pub fn from_map(map: &PiecewiseMap, hole: &Hole) -> MapConfig {
        let pair = |a: &Scalar, b: &Scalar| [Num::from_scalar(a), Num::from_scalar(b)];
        MapConfig {
            codomain: pair(map.codomain().lo(), map.codomain().hi()),
            branches: map
                .branches()
                .iter()
                .map(|b| BranchConfig {
                    domain: pair(b.domain().lo(), b.domain().hi()),
                    kind: match b.kind() {
                        BranchKind::Affine { .. } => KindName::Affine,
                        BranchKind::Moebius { .. } => KindName::Moebius,
                    },
                    coeffs: b.kind().coeffs().iter().map(Num::from_scalar).collect(),
                })
                .collect(),
            hole: hole.pieces().iter().map(|(lo, hi)| pair(lo, hi)).collect(),
        }
    }
}

pub fn parse_config(json: &str, eps: f64) -> Result<(PiecewiseMap, Hole)> {
    let cfg: MapConfig = serde_json::from_str(json).map_err(|e| Error::Parse(format!("map config: {e}")))?;
    cfg.build(eps)
}

pub fn load_config(path: &Path) -> Result<(PiecewiseMap, Hole)> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    parse_config(&text, DEFAULT_EPS)
}

/// Pretty JSON that [`parse_config`] maps back to an equal map and hole.
pub fn dump_config(map: &PiecewiseMap, hole: &Hole) -> String {
    let mut s = serde_json::to_string_pretty(&MapConfig::from_map(map, hole)).expect("config serializes");
    s.push('\n');
    s
}
