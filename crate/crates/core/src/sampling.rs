//! Seeded generation of exponential point clouds.
//!
//! The random stream is ChaCha8 (`rand_chacha`) keyed from a 64-bit seed by
//! SplitMix64 expansion: the 32-byte key is the little-endian concatenation of
//! the first four SplitMix64 outputs for that seed. Uniforms on (0,1] take the
//! top 53 bits of each 64-bit output, `u = (x >> 11 + 1) · 2^-53`, and every
//! coordinate is `−ln(u)/λ`. Coordinates are drawn point by point, axis by
//! axis. None of this may change without changing every recorded result.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::model::{check_rate, PointCloud, Provenance};
use crate::numfmt::g17;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output finalizer. A bijection on u64.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `index` under `base_seed`:
/// `mix64(base_seed + (index + 1) · 0x9E3779B97F4A7C15)` with wrapping
/// arithmetic. Injective in `index` for a fixed base seed.
pub fn derive_replication_seed(base_seed: u64, index: u64) -> u64 {
    mix64(base_seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// A source of uniform draws on (0,1].
pub trait UnitSource {
    fn next_unit(&mut self) -> f64;
}

/// The crate's fixed 64-bit generator.
#[derive(Debug, Clone)]
pub struct CloudRng(ChaCha8Rng);

impl CloudRng {
    pub fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        let mut state = seed;
        for chunk in key.chunks_exact_mut(8) {
            state = state.wrapping_add(GOLDEN_GAMMA);
            chunk.copy_from_slice(&mix64(state).to_le_bytes());
        }
        CloudRng(ChaCha8Rng::from_seed(key))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
}

impl UnitSource for CloudRng {
    fn next_unit(&mut self) -> f64 {
        ((self.0.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Inverse-CDF transform of a uniform `u ∈ (0,1]` to Exp(λ).
pub fn exponential_from_unit(u: f64, lambda: f64) -> f64 {
    // 0.0 - ln(1) keeps u = 1 at +0.0 instead of -0.0
    (0.0 - u.ln()) / lambda
}

/// Draws `n` points with i.i.d. Exp(λ) coordinates from an arbitrary uniform source.
pub fn sample_with<S: UnitSource>(
    n: usize,
    d: usize,
    lambda: f64,
    seed: u64,
    source: &mut S,
) -> Result<PointCloud> {
    if n == 0 {
        return Err(Error::invalid("n", "need at least one point"));
    }
    if d == 0 {
        return Err(Error::invalid("d", "dimension must be at least 1"));
    }
    check_rate(lambda)?;
    let coords = (0..n * d)
        .map(|_| exponential_from_unit(source.next_unit(), lambda))
        .collect();
    PointCloud::from_flat(d, coords, Provenance { seed, lambda })
}

/// Samples the cloud determined by `(n, d, λ, seed)`.
pub fn sample_exponential_cloud(n: usize, d: usize, lambda: f64, seed: u64) -> Result<PointCloud> {
    sample_with(n, d, lambda, seed, &mut CloudRng::new(seed))
}

/// Writes the text dump: a header line
/// `# exprgg-cloud v1 n=<n> d=<d> lambda=<λ> seed=<seed>` followed by one
/// point per line, coordinates space-separated.
pub fn write_cloud<W: Write>(cloud: &PointCloud, mut out: W) -> std::io::Result<()> {
    let prov = cloud.provenance();
    writeln!(
        out,
        "# exprgg-cloud v1 n={} d={} lambda={} seed={}",
        cloud.len(),
        cloud.dim(),
        g17(prov.lambda),
        prov.seed
    )?;
    let mut line = String::new();
    for p in cloud.points() {
        line.clear();
        for (axis, x) in p.iter().enumerate() {
            if axis > 0 {
                line.push(' ');
            }
            let _ = write!(line, "{}", g17(*x));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Parses the text dump written by [`write_cloud`].
pub fn read_cloud<R: BufRead>(input: R) -> Result<PointCloud> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty cloud dump".into()))?
        .map_err(|e| Error::Parse(e.to_string()))?;
    let rest = header
        .strip_prefix("# exprgg-cloud v1 ")
        .ok_or_else(|| Error::Parse(format!("unrecognized header: {header}")))?;

    let (mut n, mut d, mut lambda, mut seed) = (None, None, None, None);
    for field in rest.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad header field: {field}")))?;
        let bad = |_| Error::Parse(format!("bad header value: {field}"));
        match key {
            "n" => n = Some(value.parse::<usize>().map_err(|e| bad(e.to_string()))?),
            "d" => d = Some(value.parse::<usize>().map_err(|e| bad(e.to_string()))?),
            "lambda" => lambda = Some(value.parse::<f64>().map_err(|e| bad(e.to_string()))?),
            "seed" => seed = Some(value.parse::<u64>().map_err(|e| bad(e.to_string()))?),
            _ => return Err(Error::Parse(format!("unknown header field: {key}"))),
        }
    }
    let missing = |k: &str| Error::Parse(format!("header lacks {k}"));
    let (n, d) = (
        n.ok_or_else(|| missing("n"))?,
        d.ok_or_else(|| missing("d"))?,
    );
    let lambda = lambda.ok_or_else(|| missing("lambda"))?;
    let seed = seed.ok_or_else(|| missing("seed"))?;

    let mut coords = Vec::with_capacity(n * d);
    for (row, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::Parse(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let before = coords.len();
        for tok in line.split_whitespace() {
            coords.push(
                tok.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {}: bad number {tok}", row + 2)))?,
            );
        }
        if coords.len() - before != d {
            return Err(Error::Parse(format!(
                "line {}: expected {d} coordinates, found {}",
                row + 2,
                coords.len() - before
            )));
        }
    }
    if coords.len() != n * d {
        return Err(Error::Parse(format!(
            "header announces {n} points, found {}",
            coords.len() / d.max(1)
        )));
    }
    PointCloud::from_flat(d, coords, Provenance { seed, lambda })
}
