//! JSON file formats for algebras, measures, groups and run reports.
//!
//! Paths named inside measure and group files are resolved relative to the
//! directory of the file that names them.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use num::{BigRational, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::algebra::{BitVector, Limits, MedianAlgebra, PointId};
use crate::error::{Error, Result};
use crate::groups::{validate_automorphism, Automorphism};
use crate::measures::Measure;

pub const FORMAT_VERSION: &str = "1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraFile {
    pub ambient_dim: usize,
    pub points: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl AlgebraFile {
    pub fn from_algebra(m: &MedianAlgebra) -> Self {
        AlgebraFile {
            ambient_dim: m.dim(),
            points: m.points().map(|p| p.to_string()).collect(),
            name: m.name().map(str::to_owned),
        }
    }

    /// Strict conversion: points must have the declared length, be sorted
    /// and distinct, and be median-closed.
    pub fn to_algebra(&self, limits: Limits) -> Result<MedianAlgebra> {
        if self.ambient_dim > limits.max_dim {
            return Err(Error::DimensionTooLarge(self.ambient_dim, limits.max_dim));
        }
        if self.points.len() > limits.max_points {
            return Err(Error::TooManyPoints(self.points.len(), limits.max_points));
        }
        let mut points = Vec::with_capacity(self.points.len());
        for s in &self.points {
            let p: BitVector = s.parse()?;
            if p.dim() != self.ambient_dim {
                return Err(Error::InvalidPoint(format!(
                    "{s:?} has length {} but ambient_dim is {}",
                    p.dim(),
                    self.ambient_dim
                )));
            }
            points.push(p);
        }
        if let Some(w) = points.windows(2).find(|w| w[0].bits() >= w[1].bits()) {
            let what = if w[0] == w[1] { "duplicate" } else { "unsorted" };
            return Err(Error::Parse(format!("{what} points: {} then {}", w[0], w[1])));
        }
        let m = MedianAlgebra::with_limits(self.ambient_dim, points, limits)?;
        Ok(match &self.name {
            Some(n) => m.with_name(n.clone()),
            None => m,
        })
    }
}

/// An algebra given by path or inline.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgebraRef {
    Path(PathBuf),
    Inline(AlgebraFile),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureFile {
    pub algebra: AlgebraRef,
    /// Bit-string to `"p/q"`; omitted points have weight 0.
    pub weights: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupFile {
    pub algebra: PathBuf,
    pub generators: Vec<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Versions {
    pub tool: String,
    pub format: String,
}

impl Default for Versions {
    fn default() -> Self {
        Versions {
            tool: env!("CARGO_PKG_VERSION").to_owned(),
            format: FORMAT_VERSION.to_owned(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub results: Value,
    pub versions: Versions,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, path: &Path) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_owned()
    } else {
        base.parent().unwrap_or(Path::new("")).join(p)
    }
}

pub fn parse_algebra(text: &str) -> Result<MedianAlgebra> {
    let f: AlgebraFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    f.to_algebra(Limits::from_env())
}

pub fn load_algebra(path: &Path) -> Result<MedianAlgebra> {
    let f: AlgebraFile = parse_json(&read(path)?, path)?;
    f.to_algebra(Limits::from_env())
}

pub fn algebra_to_json(m: &MedianAlgebra) -> String {
    serde_json::to_string_pretty(&AlgebraFile::from_algebra(m)).expect("serializable") + "\n"
}

pub fn save_algebra(m: &MedianAlgebra, path: &Path) -> Result<()> {
    fs::write(path, algebra_to_json(m)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("{s:?} is not a rational of the form p/q"));
    let t = s.trim();
    let q: BigRational = if t.contains('/') {
        let (n, d) = t.split_once('/').ok_or_else(bad)?;
        let n = n.trim().parse().map_err(|_| bad())?;
        let d: num::BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        BigRational::new(n, d)
    } else {
        BigRational::from_integer(t.parse().map_err(|_| bad())?)
    };
    Ok(q)
}

pub fn format_rational(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Resolves the measure's algebra and builds the measure on it.
pub fn measure_from_file(f: &MeasureFile, base: &Path) -> Result<(MedianAlgebra, Measure)> {
    let m = match &f.algebra {
        AlgebraRef::Path(p) => load_algebra(&resolve(base, p))?,
        AlgebraRef::Inline(a) => a.to_algebra(Limits::from_env())?,
    };
    let mut w = vec![BigRational::zero(); m.len()];
    for (point, weight) in &f.weights {
        let id = m.id_of_str(point)?;
        let q = parse_rational(weight)?;
        if q.is_negative() {
            return Err(Error::InvalidMeasure(format!("weight of {point} is negative")));
        }
        w[id.index()] = q;
    }
    let mu = Measure::new(w)?;
    Ok((m, mu))
}

pub fn load_measure(path: &Path) -> Result<(MedianAlgebra, Measure)> {
    let f: MeasureFile = parse_json(&read(path)?, path)?;
    measure_from_file(&f, path)
}

/// A measure file with the algebra inlined and zero weights omitted.
pub fn measure_file(m: &MedianAlgebra, mu: &Measure) -> MeasureFile {
    let weights = m
        .ids()
        .filter(|&x| !mu.weight(x).is_zero())
        .map(|x| (m.point(x).to_string(), format_rational(mu.weight(x))))
        .collect();
    MeasureFile {
        algebra: AlgebraRef::Inline(AlgebraFile::from_algebra(m)),
        weights,
    }
}

pub fn group_from_file(f: &GroupFile, base: &Path) -> Result<(MedianAlgebra, Vec<Automorphism>)> {
    let m = load_algebra(&resolve(base, &f.algebra))?;
    let gens = f
        .generators
        .iter()
        .map(|g| validate_automorphism(&m, g.iter().map(|&i| PointId(i)).collect()))
        .collect::<Result<Vec<_>>>()?;
    Ok((m, gens))
}

pub fn load_group(path: &Path) -> Result<(MedianAlgebra, Vec<Automorphism>)> {
    let f: GroupFile = parse_json(&read(path)?, path)?;
    group_from_file(&f, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::rational;

    #[test]
    fn algebra_round_trip() {
        let m = MedianAlgebra::hypercube(3).unwrap().with_name("c3");
        let back = parse_algebra(&algebra_to_json(&m)).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.name(), Some("c3"));
    }

    #[test]
    fn strict_loader() {
        let cases = [
            r#"{"ambient_dim": 2, "points": ["01", "00"]}"#,
            r#"{"ambient_dim": 2, "points": ["00", "00"]}"#,
            r#"{"ambient_dim": 2, "points": ["00", "1"]}"#,
            r#"{"ambient_dim": 2, "points": ["00", "0x"]}"#,
            r#"{"ambient_dim": 3, "points": ["110", "101", "011"]}"#,
            r#"{"ambient_dim": 2, "points": []}"#,
            r#"{"ambient_dim": 2, "points": ["00"], "extra": 1}"#,
            r#"{"points": ["00"]}"#,
        ];
        for c in cases {
            assert!(parse_algebra(c).is_err(), "{c}");
        }
        let closed = r#"{"ambient_dim": 3, "points": ["000", "011", "101", "110", "111"]}"#;
        assert!(parse_algebra(closed).is_err());
        let ok = r#"{"ambient_dim": 2, "points": ["00", "01", "11"]}"#;
        assert_eq!(parse_algebra(ok).unwrap().len(), 3);
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("3/16").unwrap(), rational(3, 16));
        assert_eq!(parse_rational(" 2/4 ").unwrap(), rational(1, 2));
        assert_eq!(parse_rational("1").unwrap(), rational(1, 1));
        for bad in ["1/0", "a/2", "", "1/2/3", "0.5"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
        assert_eq!(format_rational(&rational(6, 8)), "3/4");
    }

    #[test]
    fn measure_round_trip() {
        let m = MedianAlgebra::hypercube(2).unwrap();
        let mu = Measure::new(vec![
            rational(1, 4),
            rational(0, 1),
            rational(3, 4),
            rational(0, 1),
        ])
        .unwrap();
        let f = measure_file(&m, &mu);
        assert_eq!(f.weights.len(), 2);
        let text = serde_json::to_string(&f).unwrap();
        let back: MeasureFile = serde_json::from_str(&text).unwrap();
        let (m2, mu2) = measure_from_file(&back, Path::new("x.json")).unwrap();
        assert_eq!((m2, mu2), (m, mu));
    }

    #[test]
    fn measure_rejects_bad_weights() {
        let m = MedianAlgebra::hypercube(1).unwrap();
        let inline = AlgebraRef::Inline(AlgebraFile::from_algebra(&m));
        for weights in [
            vec![("0", "1/2")],
            vec![("0", "-1/2"), ("1", "3/2")],
            vec![("2", "1")],
            vec![("0", "1"), ("11", "0")],
        ] {
            let f = MeasureFile {
                algebra: inline.clone(),
                weights: weights
                    .into_iter()
                    .map(|(a, b)| (a.to_owned(), b.to_owned()))
                    .collect(),
            };
            assert!(measure_from_file(&f, Path::new(".")).is_err());
        }
    }

    #[test]
    fn report_round_trip() {
        let r = RunReport {
            command: "cube".into(),
            inputs: vec![InputDigest {
                path: "a.json".into(),
                sha256: "00".into(),
            }],
            results: serde_json::json!({"dim": 3}),
            versions: Versions::default(),
        };
        let text = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<RunReport>(&text).unwrap(), r);
    }
}
