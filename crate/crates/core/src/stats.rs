//! Degree statistics of G_n(y) and the normalized quantities the degree
//! theorems bound.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{DegreeSummary, PointCloud, RggConfig};
use crate::spatial::GridIndex;
use crate::theory::pair_connect_prob;

/// Degrees of every vertex of G_n(y), computed per vertex from a grid index
/// with cell size `y`. Vertices are processed in parallel on the current
/// rayon pool; the result does not depend on the number of workers.
pub fn degree_summary(cloud: &PointCloud, y: f64) -> Result<DegreeSummary> {
    let n = cloud.len();
    if n < 2 {
        return Err(Error::invalid("n", "a graph needs at least 2 vertices"));
    }
    if !(y >= 0.0) || y.is_infinite() {
        return Err(Error::invalid("y", "edge distance must be finite and >= 0"));
    }
    let degrees = if y == 0.0 {
        coincident_degrees(cloud)
    } else {
        let index = GridIndex::build(cloud, y)?;
        (0..n)
            .into_par_iter()
            .map(|i| index.degree(i, y))
            .collect::<Result<Vec<_>>>()?
    };
    debug_assert!(degrees.iter().sum::<u64>() % 2 == 0);
    DegreeSummary::from_degrees(degrees)
}

/// At y = 0 two vertices are adjacent only when they coincide.
fn coincident_degrees(cloud: &PointCloud) -> Vec<u64> {
    let mut order: Vec<usize> = (0..cloud.len()).collect();
    let key = |i: usize| -> Vec<u64> { cloud.point(i).iter().map(|x| x.to_bits()).collect() };
    order.sort_by_key(|&i| key(i));
    let mut degrees = vec![0u64; cloud.len()];
    let mut start = 0;
    while start < order.len() {
        let k = key(order[start]);
        let mut end = start + 1;
        while end < order.len() && key(order[end]) == k {
            end += 1;
        }
        for &i in &order[start..end] {
            degrees[i] = (end - start - 1) as u64;
        }
        start = end;
    }
    degrees
}

/// Degree summary of the graph with the given edge list.
pub fn summary_from_edges(n: usize, edges: &[(usize, usize)]) -> Result<DegreeSummary> {
    let mut degrees = vec![0u64; n];
    for &(a, b) in edges {
        if a >= n || b >= n {
            return Err(Error::VertexOutOfRange { index: a.max(b), n });
        }
        degrees[a] += 1;
        degrees[b] += 1;
    }
    DegreeSummary::from_degrees(degrees)
}

/// n choose 2 as a float.
pub fn pair_count(n: usize) -> f64 {
    let n = n as f64;
    n * (n - 1.0) / 2.0
}

/// |ε_n / C(n,2) − p(y)|.
pub fn edge_density_gap(summary: &DegreeSummary, config: &RggConfig) -> f64 {
    let density = summary.edge_count() as f64 / pair_count(summary.n());
    (density - pair_connect_prob(config.y, config.lambda, config.d)).abs()
}

/// (δ_n / (n·y^d), Δ_n / (n·y^d)).
pub fn degree_ratios(summary: &DegreeSummary, config: &RggConfig) -> Result<(f64, f64)> {
    if config.y == 0.0 {
        return Err(Error::invalid("y", "degree ratios are undefined at y = 0"));
    }
    let scale = summary.n() as f64 * config.y.powi(config.d as i32);
    Ok((
        summary.min_degree() as f64 / scale,
        summary.max_degree() as f64 / scale,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Provenance;
    use crate::sampling::{sample_exponential_cloud, CloudRng, UnitSource};
    use crate::spatial::brute_force_edges;

    fn line(xs: &[f64]) -> PointCloud {
        PointCloud::from_flat(
            1,
            xs.to_vec(),
            Provenance {
                seed: 0,
                lambda: 1.0,
            },
        )
        .unwrap()
    }

    #[test]
    fn hand_checked_summary() {
        let s = degree_summary(&line(&[0.0, 0.5, 1.2]), 0.6).unwrap();
        assert_eq!(s.degrees(), &[1, 1, 0]);
        assert_eq!(s.edge_count(), 1);
        let s = degree_summary(&line(&[0.0, 0.5, 1.2]), 0.7).unwrap();
        assert_eq!(s.degrees(), &[1, 2, 1]);
        assert_eq!(s.edge_count(), 2);
        assert_eq!(s.min_degree(), 1);
        assert_eq!(s.max_degree(), 2);
    }

    #[test]
    fn zero_radius() {
        let s = degree_summary(&line(&[0.0, 0.5, 1.2]), 0.0).unwrap();
        assert_eq!(s.degrees(), &[0, 0, 0]);
        assert_eq!(s.edge_count(), 0);
        let dup = degree_summary(&line(&[0.3, 0.5, 0.3, 0.3]), 0.0).unwrap();
        assert_eq!(dup.degrees(), &[2, 0, 2, 2]);
    }

    #[test]
    fn rejects_single_vertex() {
        assert!(degree_summary(&line(&[1.0]), 0.1).is_err());
    }

    #[test]
    fn matches_brute_force_summary() {
        let mut rng = CloudRng::new(31);
        for case in 0..60u64 {
            let d = (case % 3 + 1) as usize;
            let n = 2 + (rng.next_u64() % 399) as usize;
            let cloud = sample_exponential_cloud(n, d, 1.3, case).unwrap();
            let y = rng.next_unit() * 0.6;
            let fast = degree_summary(&cloud, y).unwrap();
            let slow = summary_from_edges(n, &brute_force_edges(&cloud, y)).unwrap();
            assert_eq!(fast, slow, "case {case}");
        }
    }

    #[test]
    fn independent_of_worker_count() {
        let cloud = sample_exponential_cloud(5_000, 2, 1.0, 8).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| degree_summary(&cloud, 0.03).unwrap())
        };
        assert_eq!(run(1), run(7));
    }

    #[test]
    fn gap_examples() {
        let s = DegreeSummary::from_degrees(vec![1, 1, 0, 0]).unwrap();
        // p(y) = 1/6 makes ε/C(4,2) = 1/6 exactly
        let y = -(1.0f64 - 1.0 / 6.0).ln();
        let cfg = RggConfig::new(4, 1, 1.0, y, 0).unwrap();
        assert!(edge_density_gap(&s, &cfg) < 1e-15);

        let empty = DegreeSummary::from_degrees(vec![0; 4]).unwrap();
        let cfg = RggConfig::new(4, 2, 1.0, 0.3, 0).unwrap();
        assert_eq!(
            edge_density_gap(&empty, &cfg),
            pair_connect_prob(0.3, 1.0, 2)
        );
    }

    #[test]
    fn ratio_examples() {
        let cfg = RggConfig::new(4, 2, 1.0, 0.5, 0).unwrap();
        // n·y^d = 1
        let s = DegreeSummary::from_degrees(vec![1, 1, 1, 1]).unwrap();
        assert_eq!(degree_ratios(&s, &cfg).unwrap().0, 1.0);

        let cloud = sample_exponential_cloud(30, 2, 1.0, 4).unwrap();
        let cfg = RggConfig::new(30, 2, 1.0, 1e3, 0).unwrap();
        let full = degree_summary(&cloud, cfg.y).unwrap();
        assert_eq!(full.max_degree(), 29);
        assert_eq!(degree_ratios(&full, &cfg).unwrap().1, 29.0 / (30.0 * 1e6));

        let zero = RggConfig::new(4, 2, 1.0, 0.0, 0).unwrap();
        assert!(degree_ratios(&s, &zero).is_err());
    }

    #[test]
    fn ratio_ordering_and_edge_bound() {
        let mut rng = CloudRng::new(101);
        for case in 0..100u64 {
            let d = (case % 3 + 1) as usize;
            let n = 2 + (rng.next_u64() % 500) as usize;
            let y = 0.01 + rng.next_unit() * 0.5;
            let cloud = sample_exponential_cloud(n, d, 1.0, case).unwrap();
            let s = degree_summary(&cloud, y).unwrap();
            let cfg = RggConfig::new(n, d, 1.0, y, case).unwrap();
            let (lo, hi) = degree_ratios(&s, &cfg).unwrap();
            assert!(lo <= hi);
            let from_edges = 2.0 * s.edge_count() as f64 / ((n * n) as f64 * y.powi(d as i32));
            assert!(hi >= from_edges * (1.0 - 1e-12));
        }
    }

    #[test]
    fn invariants_on_random_instances() {
        let mut rng = CloudRng::new(55);
        for case in 0..40u64 {
            let d = (case % 4 + 1) as usize;
            let n = 2 + (rng.next_u64() % 800) as usize;
            let cloud = sample_exponential_cloud(n, d, 0.8, case).unwrap();
            let ys = [0.02, 0.05, 0.1, 0.2];
            let mut prev: Option<DegreeSummary> = None;
            for y in ys {
                let s = degree_summary(&cloud, y).unwrap();
                let sum: u64 = s.degrees().iter().sum();
                assert_eq!(sum, 2 * s.edge_count());
                let n_f = n as f64;
                let avg = 2.0 * s.edge_count() as f64 / n_f;
                assert!(s.min_degree() as f64 <= avg && avg <= s.max_degree() as f64);
                if let Some(p) = prev {
                    assert!(p.degrees().iter().zip(s.degrees()).all(|(a, b)| a <= b));
                    assert!(p.min_degree() <= s.min_degree());
                    assert!(p.max_degree() <= s.max_degree());
                }
                prev = Some(s);
            }
        }
    }
}
