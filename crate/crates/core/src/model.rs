//! Domain types shared by every other module.
//!
//! All constructors validate their invariants, so a value of any of these
//! types can be trusted downstream without re-checking.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where a cloud came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub lambda: f64,
}

/// `n` points in `d` dimensions with nonnegative finite coordinates.
///
/// Coordinates are stored row-major in one flat buffer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
    provenance: Provenance,
}

impl PointCloud {
    /// Builds a cloud from a flat row-major coordinate buffer.
    pub fn from_flat(dim: usize, coords: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("d", "dimension must be at least 1"));
        }
        if coords.is_empty() {
            return Err(Error::invalid("n", "a cloud needs at least one point"));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                left: coords.len() % dim,
                right: dim,
            });
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::invalid(
                "coordinate",
                format!(
                    "point {} axis {} is {}; coordinates must be finite and >= 0",
                    pos / dim,
                    pos % dim,
                    coords[pos]
                ),
            ));
        }
        if !(provenance.lambda > 0.0 && provenance.lambda.is_finite()) {
            return Err(Error::invalid("lambda", "rate must be positive and finite"));
        }
        Ok(PointCloud {
            dim,
            coords,
            provenance,
        })
    }

    /// Builds a cloud from one vector per point.
    pub fn from_points(dim: usize, points: &[Vec<f64>], provenance: Provenance) -> Result<Self> {
        if let Some(bad) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                left: bad.len(),
                right: dim,
            });
        }
        Self::from_flat(dim, points.concat(), provenance)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    /// Always false; a cloud holds at least one point.
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }
}

#[derive(Deserialize)]
struct PointCloudRepr {
    dim: usize,
    coords: Vec<f64>,
    provenance: Provenance,
}

impl<'de> Deserialize<'de> for PointCloud {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let repr = PointCloudRepr::deserialize(de)?;
        PointCloud::from_flat(repr.dim, repr.coords, repr.provenance)
            .map_err(serde::de::Error::custom)
    }
}

/// Parameters of one graph instance G_n(y).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RggConfigRepr")]
pub struct RggConfig {
    pub n: usize,
    pub d: usize,
    pub lambda: f64,
    pub y: f64,
    pub seed: u64,
}

#[derive(Deserialize)]
struct RggConfigRepr {
    n: usize,
    d: usize,
    lambda: f64,
    y: f64,
    seed: u64,
}

impl TryFrom<RggConfigRepr> for RggConfig {
    type Error = Error;

    fn try_from(r: RggConfigRepr) -> Result<Self> {
        RggConfig::new(r.n, r.d, r.lambda, r.y, r.seed)
    }
}

impl RggConfig {
    pub fn new(n: usize, d: usize, lambda: f64, y: f64, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("n", "a graph needs at least 2 vertices"));
        }
        if d == 0 {
            return Err(Error::invalid("d", "dimension must be at least 1"));
        }
        check_rate(lambda)?;
        if !(y >= 0.0) || y.is_infinite() {
            return Err(Error::invalid("y", "edge distance must be finite and >= 0"));
        }
        Ok(RggConfig {
            n,
            d,
            lambda,
            y,
            seed,
        })
    }
}

pub(crate) fn check_rate(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("lambda", "rate must be positive and finite"))
    }
}

/// Vertex degrees of one graph together with the statistics the theorems bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DegreeSummaryRepr")]
pub struct DegreeSummary {
    degrees: Vec<u64>,
    edge_count: u64,
    min_degree: u64,
    max_degree: u64,
}

#[derive(Deserialize)]
struct DegreeSummaryRepr {
    degrees: Vec<u64>,
    edge_count: u64,
    min_degree: u64,
    max_degree: u64,
}

impl TryFrom<DegreeSummaryRepr> for DegreeSummary {
    type Error = Error;

    fn try_from(r: DegreeSummaryRepr) -> Result<Self> {
        let s = DegreeSummary::from_degrees(r.degrees)?;
        if (s.edge_count, s.min_degree, s.max_degree) != (r.edge_count, r.min_degree, r.max_degree)
        {
            return Err(Error::Parse(
                "degree summary fields disagree with the degree sequence".into(),
            ));
        }
        Ok(s)
    }
}

impl DegreeSummary {
    /// Derives ε_n, δ_n and Δ_n from a degree sequence.
    pub fn from_degrees(degrees: Vec<u64>) -> Result<Self> {
        let n = degrees.len() as u64;
        if n < 2 {
            return Err(Error::invalid("n", "a graph needs at least 2 vertices"));
        }
        if let Some(&bad) = degrees.iter().find(|&&deg| deg > n - 1) {
            return Err(Error::invalid(
                "degrees",
                format!("degree {bad} exceeds n - 1 = {}", n - 1),
            ));
        }
        let total: u64 = degrees.iter().sum();
        if !total.is_multiple_of(2) {
            return Err(Error::invalid("degrees", "degree sum must be even"));
        }
        let min_degree = *degrees.iter().min().expect("nonempty");
        let max_degree = *degrees.iter().max().expect("nonempty");
        Ok(DegreeSummary {
            edge_count: total / 2,
            degrees,
            min_degree,
            max_degree,
        })
    }

    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }

    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    /// ε_n, the number of edges.
    pub fn edge_count(&self) -> u64 {
        self.edge_count
    }

    /// δ_n
    pub fn min_degree(&self) -> u64 {
        self.min_degree
    }

    /// Δ_n
    pub fn max_degree(&self) -> u64 {
        self.max_degree
    }
}

/// Edge-distance rule of a family n ↦ y_n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum FamilyRule {
    /// y_n = (c·log n / n)^{1/d} / λ, so that n·y_n^d / log n = c/λ^d.
    /// `c` may be infinite, which only the theory module accepts.
    LogRegime {
        #[serde(with = "extended_f64")]
        c: f64,
    },
    /// y_n = (α·n^{−β})^{1/d}.
    PowerFamily { alpha: f64, beta: f64 },
}

/// A rule n ↦ y_n together with the rate and dimension it applies to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EdgeDistanceFamilyRepr")]
pub struct EdgeDistanceFamily {
    pub rule: FamilyRule,
    pub lambda: f64,
    pub d: usize,
}

#[derive(Deserialize)]
struct EdgeDistanceFamilyRepr {
    rule: FamilyRule,
    lambda: f64,
    d: usize,
}

impl TryFrom<EdgeDistanceFamilyRepr> for EdgeDistanceFamily {
    type Error = Error;

    fn try_from(r: EdgeDistanceFamilyRepr) -> Result<Self> {
        EdgeDistanceFamily::new(r.rule, r.lambda, r.d)
    }
}

impl EdgeDistanceFamily {
    pub fn new(rule: FamilyRule, lambda: f64, d: usize) -> Result<Self> {
        check_rate(lambda)?;
        if d == 0 {
            return Err(Error::invalid("d", "dimension must be at least 1"));
        }
        match rule {
            FamilyRule::LogRegime { c } => {
                if !(c > 0.0) {
                    return Err(Error::invalid("c", "regime constant must be positive"));
                }
            }
            FamilyRule::PowerFamily { alpha, beta } => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return Err(Error::invalid("alpha", "must be positive and finite"));
                }
                if !(beta > 0.0 && beta.is_finite()) {
                    return Err(Error::invalid("beta", "must be positive and finite"));
                }
            }
        }
        Ok(EdgeDistanceFamily { rule, lambda, d })
    }

    pub fn log_regime(c: f64, lambda: f64, d: usize) -> Result<Self> {
        Self::new(FamilyRule::LogRegime { c }, lambda, d)
    }

    pub fn power(alpha: f64, beta: f64, lambda: f64, d: usize) -> Result<Self> {
        Self::new(FamilyRule::PowerFamily { alpha, beta }, lambda, d)
    }

    /// Short label used in result tables.
    pub fn label(&self) -> &'static str {
        match self.rule {
            FamilyRule::LogRegime { .. } => "log",
            FamilyRule::PowerFamily { .. } => "power",
        }
    }

    /// (param1, param2) as written to result tables.
    pub fn params(&self) -> (f64, Option<f64>) {
        match self.rule {
            FamilyRule::LogRegime { c } => (c, None),
            FamilyRule::PowerFamily { alpha, beta } => (alpha, Some(beta)),
        }
    }
}

/// The four constants of the degree theorems for one (c, λ, d).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryBounds {
    pub lambda_pow_d: f64,
    /// Root of a·ln a − a + 1 = 1/(λ^d c) in (0,1); 0 when there is none.
    pub a_min: f64,
    pub a_min_has_root: bool,
    /// Root of the same equation in [1,∞).
    pub a_max: f64,
    pub min_liminf_bound: f64,
    pub min_limsup_bound: f64,
    pub max_liminf_bound: f64,
    pub max_limsup_bound: f64,
}

impl TheoryBounds {
    pub fn new(lambda_pow_d: f64, a_min: f64, a_min_has_root: bool, a_max: f64) -> Result<Self> {
        if !(lambda_pow_d > 0.0 && lambda_pow_d.is_finite()) {
            return Err(Error::invalid(
                "lambda_pow_d",
                "must be positive and finite",
            ));
        }
        if !(0.0..1.0).contains(&a_min) && !(a_min == 1.0 && a_max == 1.0) {
            return Err(Error::invalid("a_min", format!("{a_min} is outside [0,1)")));
        }
        if !a_min_has_root && a_min != 0.0 {
            return Err(Error::invalid(
                "a_min",
                "a missing root must be reported as 0",
            ));
        }
        if !(a_max >= 1.0 && a_max.is_finite()) {
            return Err(Error::invalid(
                "a_max",
                format!("{a_max} is outside [1,inf)"),
            ));
        }
        Ok(TheoryBounds {
            lambda_pow_d,
            a_min,
            a_min_has_root,
            a_max,
            min_liminf_bound: a_min * lambda_pow_d,
            min_limsup_bound: lambda_pow_d,
            max_liminf_bound: lambda_pow_d,
            max_limsup_bound: a_max * lambda_pow_d,
        })
    }
}

/// Serializes an `f64` that may be ±infinity, writing the infinities as the
/// strings `"inf"` / `"-inf"` since JSON has no literal for them.
pub(crate) mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, ser: S) -> Result<S::Ok, S::Error> {
        if x.is_infinite() {
            ser.serialize_str(if *x > 0.0 { "inf" } else { "-inf" })
        } else {
            ser.serialize_f64(*x)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<f64, D::Error> {
        match Repr::deserialize(de)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(s) => match s.as_str() {
                "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
                "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
                other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}
