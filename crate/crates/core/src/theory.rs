//! Closed-form quantities for exponential random geometric graphs.
//!
//! Everything here is a pure function of its arguments. The two degree
//! constants a(c) are roots of f(a) = a·ln a − a + 1 = 1/(λ^d c), one on each
//! side of a = 1; both are found by bisection since f is strictly monotone on
//! each branch and f′(a) = ln a vanishes at the branch point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_rate, EdgeDistanceFamily, FamilyRule, TheoryBounds};

/// Probability that two points are within l∞ distance `y`: (1 − e^{−λy})^d.
pub fn pair_connect_prob(y: f64, lambda: f64, d: usize) -> f64 {
    debug_assert!(y >= 0.0 && lambda > 0.0);
    (-(-lambda * y).exp_m1()).powi(d as i32)
}

/// Chernoff rate function H(t) = (ln t)/t + 1/t − 1, with H(∞) = −1.
pub fn h_function(t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid("t", "H is defined for t > 0 or t = inf"));
    }
    if t.is_infinite() {
        return Ok(-1.0);
    }
    Ok((t.ln() + 1.0) / t - 1.0)
}

/// A tail bound plus whether `k` was inside the range where it holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub value: f64,
    pub within_validity: bool,
}

/// (np/k)^k·e^{k−np}, evaluated in log space. `k = 0` takes the limit e^{−np}.
fn chernoff_value(mean: f64, k: f64) -> f64 {
    if k == 0.0 {
        return (-mean).exp();
    }
    (k * (mean / k).ln() + k - mean).exp()
}

fn check_binomial(n: u64, p: f64, k: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid("p", "must be a probability"));
    }
    if !(k >= 0.0) || k.is_infinite() {
        return Err(Error::invalid("k", "must be finite and >= 0"));
    }
    Ok(())
}

/// Bound on P[Bin(n,p) ≥ k], valid for k ≥ np.
pub fn chernoff_upper_tail(n: u64, p: f64, k: f64) -> Result<TailBound> {
    check_binomial(n, p, k)?;
    let mean = n as f64 * p;
    if k == 0.0 {
        // only reachable with np = 0, where P[X >= 0] = 1
        return Ok(TailBound {
            value: 1.0,
            within_validity: mean == 0.0,
        });
    }
    Ok(TailBound {
        value: chernoff_value(mean, k),
        within_validity: k >= mean,
    })
}

/// Bound on P[Bin(n,p) ≤ k], valid for 0 ≤ k ≤ np.
pub fn chernoff_lower_tail(n: u64, p: f64, k: f64) -> Result<TailBound> {
    check_binomial(n, p, k)?;
    let mean = n as f64 * p;
    Ok(TailBound {
        value: chernoff_value(mean, k),
        within_validity: k <= mean,
    })
}

/// The same bound written as exp(np·H(np/k)).
pub fn chernoff_via_rate(n: u64, p: f64, k: f64) -> Result<f64> {
    check_binomial(n, p, k)?;
    let mean = n as f64 * p;
    let t = if k == 0.0 { f64::INFINITY } else { mean / k };
    Ok((mean * h_function(t)?).exp())
}

/// y_n for a real-valued `n ≥ 2`.
pub fn edge_distance_at(family: &EdgeDistanceFamily, n: f64) -> Result<f64> {
    let d = family.d as f64;
    match family.rule {
        FamilyRule::LogRegime { c } => {
            if !(n >= 2.0) {
                return Err(Error::invalid("n", "log regime needs n >= 2"));
            }
            if c.is_infinite() {
                return Err(Error::invalid(
                    "c",
                    "an infinite regime constant has no finite y_n",
                ));
            }
            Ok((c * n.ln() / n).powf(1.0 / d) / family.lambda)
        }
        FamilyRule::PowerFamily { alpha, beta } => {
            if !(n >= 1.0) {
                return Err(Error::invalid("n", "must be at least 1"));
            }
            Ok((alpha * n.powf(-beta)).powf(1.0 / d))
        }
    }
}

/// Edge distance y_n of a family.
pub fn edge_distance(family: &EdgeDistanceFamily, n: u64) -> Result<f64> {
    edge_distance_at(family, n as f64)
}

/// Side of the box [0, R]^d that eventually holds all n points:
/// R = (1+ε)·ln n / (λd).
pub fn containment_radius(n: f64, lambda: f64, d: usize, epsilon: f64) -> Result<f64> {
    if !(n >= 2.0) {
        return Err(Error::invalid("n", "must be at least 2"));
    }
    check_rate(lambda)?;
    if d == 0 {
        return Err(Error::invalid("d", "dimension must be at least 1"));
    }
    if !(epsilon >= 0.0) || epsilon.is_infinite() {
        return Err(Error::invalid("epsilon", "must be finite and >= 0"));
    }
    Ok((1.0 + epsilon) * n.ln() / (lambda * d as f64))
}

/// f(a) = a·ln a − a + 1, extended by continuity with f(0) = 1.
pub fn root_equation(a: f64) -> f64 {
    if a == 0.0 {
        1.0
    } else {
        a * a.ln() - a + 1.0
    }
}

/// Lower end of the (0,1) bracket.
pub const A_MIN_BRACKET_LOW: f64 = 1e-15;

/// Outcome of solving for the (0,1) root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinRoot {
    pub a: f64,
    pub has_root: bool,
}

fn regime_target(c: f64, lambda: f64, d: usize) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::invalid("c", "regime constant must be positive"));
    }
    check_rate(lambda)?;
    if d == 0 {
        return Err(Error::invalid("d", "dimension must be at least 1"));
    }
    Ok(1.0 / (lambda.powi(d as i32) * c))
}

/// Bisection for `f(a) = target` on [lo, hi] where `f - target` changes sign.
/// Runs until the bracket cannot shrink further in floating point and returns
/// the endpoint with the smaller residual.
fn bisect(mut lo: f64, mut hi: f64, target: f64, increasing: bool) -> f64 {
    let below = |a: f64| (root_equation(a) < target) == increasing;
    for _ in 0..2100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let res = |a: f64| (root_equation(a) - target).abs();
    if res(lo) <= res(hi) {
        lo
    } else {
        hi
    }
}

/// Root of a·ln a − a + 1 = 1/(λ^d c) in (0,1), used by the min-degree bound.
///
/// When λ^d·c ≤ 1 the right side is at least 1 and there is no root; the
/// result is then `a = 0` with `has_root = false`. `c = ∞` gives `a = 1`.
pub fn a_min(c: f64, lambda: f64, d: usize) -> Result<MinRoot> {
    let r = regime_target(c, lambda, d)?;
    if c.is_infinite() {
        return Ok(MinRoot {
            a: 1.0,
            has_root: true,
        });
    }
    if r >= 1.0 {
        return Ok(MinRoot {
            a: 0.0,
            has_root: false,
        });
    }
    // f decreases on (0,1) from 1 to 0
    Ok(MinRoot {
        a: bisect(A_MIN_BRACKET_LOW, 1.0, r, false),
        has_root: true,
    })
}

/// Root of a·ln a − a + 1 = 1/(λ^d c) in [1,∞), used by the max-degree bound.
pub fn a_max(c: f64, lambda: f64, d: usize) -> Result<f64> {
    let r = regime_target(c, lambda, d)?;
    if c.is_infinite() {
        return Ok(1.0);
    }
    let mut hi = 2.0;
    while root_equation(hi) < r {
        hi *= 2.0;
        if hi.is_infinite() {
            return Err(Error::invalid(
                "c",
                "regime constant too small to bracket a root",
            ));
        }
    }
    Ok(bisect(1.0, hi, r, true))
}

/// Whether S = Σ n·y_n^d is finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesClass {
    Converges,
    Diverges,
}

impl SeriesClass {
    pub fn as_str(self) -> &'static str {
        match self {
            SeriesClass::Converges => "converges",
            SeriesClass::Diverges => "diverges",
        }
    }
}

/// Classifies S = Σ n·y_n^d for a family. Power families have terms
/// α·n^{1−β} and converge iff β > 2; log-regime terms grow like log n.
pub fn series_classifier(family: &EdgeDistanceFamily) -> SeriesClass {
    match family.rule {
        FamilyRule::PowerFamily { beta, .. } if beta > 2.0 => SeriesClass::Converges,
        _ => SeriesClass::Diverges,
    }
}

/// All four degree-theorem constants for (c, λ, d).
pub fn theory_bounds(c: f64, lambda: f64, d: usize) -> Result<TheoryBounds> {
    let lo = a_min(c, lambda, d)?;
    let hi = a_max(c, lambda, d)?;
    TheoryBounds::new(lambda.powi(d as i32), lo.a, lo.has_root, hi)
}
