//! Turning command-line strings into maps, holes and exact parameters.

use std::path::Path;

use holed_entropy::config::MapConfig;
use holed_entropy::map::build_d_adic_in;
use holed_entropy::scalar::parse_exact_decimal;
use holed_entropy::{build_scaled_farey, Error, Hole, Mode, PiecewiseMap, Scalar};
use num_rational::BigRational;

/// Which built-in family a map came from, when any.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Doubling,
    DAdic,
    Farey,
    Config,
}

#[derive(Debug)]
pub struct Problem {
    pub map: PiecewiseMap,
    pub hole: Hole,
    pub origin: Origin,
}

impl Problem {
    pub fn is_float(&self) -> bool {
        !self.map.mode().is_exact()
    }

    /// `a` when this is the doubling map with the single hole `[a, 1]`, in
    /// either mode.
    pub fn left_hole_a(&self) -> Option<Scalar> {
        if self.origin != Origin::Doubling || self.hole.pieces().len() != 1 {
            return None;
        }
        let (lo, hi) = &self.hole.pieces()[0];
        (hi.to_f64() == 1.0 && lo.to_f64() > 0.5 && lo.to_f64() < 1.0).then(|| lo.clone())
    }
}

fn warn_float(what: &str, eps: f64) {
    eprintln!("warning: decimal {what} implies float mode (eps = {eps:e}); use num/den for exact arithmetic");
}

/// `lo,hi;lo,hi`. Empty string or `none` is the empty hole.
pub fn parse_hole_literal(text: &str, eps: f64) -> Result<Vec<(Scalar, Scalar)>, Error> {
    let text = text.trim();
    if text.is_empty() || text.eq_ignore_ascii_case("none") {
        return Ok(Vec::new());
    }
    text.split(';')
        .map(|piece| {
            let (lo, hi) =
                piece.split_once(',').ok_or_else(|| Error::Parse(format!("hole piece {piece:?} is not lo,hi")))?;
            Ok((Scalar::parse(lo, eps)?, Scalar::parse(hi, eps)?))
        })
        .collect()
}

fn to_float(pieces: Vec<(Scalar, Scalar)>, eps: f64) -> Vec<(Scalar, Scalar)> {
    pieces.into_iter().map(|(a, b)| (a.to_float(eps), b.to_float(eps))).collect()
}

pub fn build_problem(map: &str, param: Option<&str>, hole: Option<&str>, eps: f64) -> Result<Problem, Error> {
    let pieces = match hole {
        Some(h) => Some(parse_hole_literal(h, eps)?),
        None => None,
    };
    let hole_float = pieces.iter().flatten().any(|(a, b)| !a.mode().is_exact() || !b.mode().is_exact());
    let param = match param {
        Some(p) => Some(Scalar::parse(p, eps)?),
        None => None,
    };
    let param_float = param.as_ref().is_some_and(|p| !p.mode().is_exact());
    if hole_float {
        warn_float("hole", eps);
    }
    if param_float {
        warn_float("parameter", eps);
    }
    let float = hole_float || param_float;
    let mode = if float { Mode::Float { eps } } else { Mode::Exact };

    let (map, config_hole, origin) = match map {
        "doubling" => (build_d_adic_in(2, mode)?, None, Origin::Doubling),
        "dadic" => {
            let d = param.ok_or_else(|| Error::InvalidParameter("dadic needs --param d".into()))?;
            let d = d
                .as_rational()
                .filter(|q| q.is_integer())
                .and_then(|q| u32::try_from(q.to_integer()).ok())
                .ok_or_else(|| Error::InvalidParameter(format!("dadic --param must be an integer, got {d}")))?;
            let origin = if d == 2 { Origin::Doubling } else { Origin::DAdic };
            (build_d_adic_in(d, mode)?, None, origin)
        }
        "farey" => {
            let a = param.ok_or_else(|| Error::InvalidParameter("farey needs --param a".into()))?;
            let a = if float { a.to_float(eps) } else { a };
            (build_scaled_farey(a)?, None, Origin::Farey)
        }
        path => {
            let text =
                std::fs::read_to_string(path).map_err(|source| Error::Io { path: Path::new(path).into(), source })?;
            let cfg: MapConfig = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{path}: {e}")))?;
            let (m, h) = cfg.build_with(eps, float)?;
            let origin = if m.is_doubling() || (float && m == build_d_adic_in(2, mode)?) {
                Origin::Doubling
            } else {
                Origin::Config
            };
            if !m.mode().is_exact() && !float {
                warn_float("config value", eps);
            }
            (m, Some(h), origin)
        }
    };
    let hole = match pieces {
        Some(p) => {
            let p = if map.mode().is_exact() { p } else { to_float(p, eps) };
            Hole::new(p)?
        }
        None => config_hole.unwrap_or_default(),
    };
    map.check_hole(&hole)?;
    Ok(Problem { map, hole, origin })
}

/// Grid and Hölder parameters are exact: `0.70` means `7/10`.
pub fn exact(text: &str) -> Result<BigRational, Error> {
    parse_exact_decimal(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hole_literals() {
        let p = parse_hole_literal("3/4,5/6; 0,1/8", 1e-12).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p[1].1, Scalar::ratio(1, 8));
        assert!(parse_hole_literal("none", 1e-12).unwrap().is_empty());
        assert!(parse_hole_literal("3/4", 1e-12).is_err());
        assert!(parse_hole_literal("a,b", 1e-12).is_err());
    }

    #[test]
    fn decimal_hole_makes_everything_float() {
        let p = build_problem("doubling", None, Some("0.75,1"), 1e-12).unwrap();
        assert!(p.is_float());
        assert_eq!(p.left_hole_a().unwrap().to_f64(), 0.75);
        let p = build_problem("doubling", None, Some("3/4,1"), 1e-12).unwrap();
        assert!(!p.is_float());
    }

    #[test]
    fn builtin_maps() {
        assert_eq!(build_problem("dadic", Some("3"), None, 1e-12).unwrap().map.branches().len(), 3);
        assert_eq!(build_problem("dadic", Some("2"), None, 1e-12).unwrap().origin, Origin::Doubling);
        assert!(build_problem("dadic", Some("1/2"), None, 1e-12).is_err());
        assert!(build_problem("farey", None, None, 1e-12).is_err());
        assert!(build_problem("farey", Some("3/2"), None, 1e-12).unwrap_err().is_input_error());
        assert!(build_problem("/no/such/file.json", None, None, 1e-12).is_err());
    }
}
