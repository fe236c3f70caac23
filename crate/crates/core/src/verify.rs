//! Randomized sweep checking the grid index against the brute-force oracle.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampling::{derive_replication_seed, sample_exponential_cloud, CloudRng, UnitSource};
use crate::spatial::{brute_force_edges, linf, GridIndex};

/// One instance of the sweep.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyCase {
    pub case: usize,
    pub n: usize,
    pub d: usize,
    pub lambda: f64,
    pub y: f64,
    pub seed: u64,
    pub grid_edges: usize,
    pub brute_edges: usize,
    pub matched: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub cases: Vec<VerifyCase>,
}

impl VerifyReport {
    pub fn mismatches(&self) -> usize {
        self.cases.iter().filter(|c| !c.matched).count()
    }

    pub fn all_matched(&self) -> bool {
        self.mismatches() == 0
    }
}

/// Runs `cases` random instances with `2 ≤ n ≤ max_n`, cycling d through
/// 1, 2, 3. Case `k` draws its parameters from
/// `derive_replication_seed(seed, k)`. Every fourth case sets y to the exact
/// distance of a random pair so the inclusive boundary is exercised.
pub fn verify_oracle(cases: usize, max_n: usize, seed: u64) -> Result<VerifyReport> {
    if max_n < 2 {
        return Err(Error::invalid("max_n", "must be at least 2"));
    }
    let mut out = Vec::with_capacity(cases);
    for case in 0..cases {
        let case_seed = derive_replication_seed(seed, case as u64);
        let mut rng = CloudRng::new(case_seed);
        let d = case % 3 + 1;
        let n = 2 + (rng.next_u64() % (max_n as u64 - 1)) as usize;
        let lambda = 0.5 + 1.5 * rng.next_unit();
        let cloud = sample_exponential_cloud(n, d, lambda, rng.next_u64())?;

        let y = if case % 4 == 3 {
            let i = (rng.next_u64() % n as u64) as usize;
            let j = (i + 1 + (rng.next_u64() % (n as u64 - 1)) as usize) % n;
            linf(cloud.point(i), cloud.point(j))
        } else {
            // pair probability q uniform on (0, 0.3]: p(y) = q
            let q = 0.3 * rng.next_unit();
            -(-(q.powf(1.0 / d as f64))).ln_1p() / lambda
        };

        let brute = brute_force_edges(&cloud, y);
        let grid = if y > 0.0 {
            GridIndex::build(&cloud, y)?.edges(y)?
        } else {
            GridIndex::build(&cloud, 1.0)?.edges(0.0)?
        };
        out.push(VerifyCase {
            case,
            n,
            d,
            lambda,
            y,
            seed: case_seed,
            grid_edges: grid.len(),
            brute_edges: brute.len(),
            matched: grid == brute,
        });
    }
    Ok(VerifyReport { cases: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweep_matches() {
        let r = verify_oracle(30, 150, 3).unwrap();
        assert_eq!(r.cases.len(), 30);
        assert!(r.all_matched());
        assert!(r.cases.iter().any(|c| c.d == 3));
        assert!(r.cases.iter().all(|c| c.n >= 2 && c.n <= 150));
    }

    #[test]
    fn rejects_tiny_max_n() {
        assert!(verify_oracle(1, 1, 0).is_err());
    }
}
