//! l∞ metric and fixed-radius neighbor queries.
//!
//! [`GridIndex`] buckets points into axis-aligned cubic cells; a query of
//! radius `y ≤ cell_size` only has to look at the 3^d cells around the query
//! point's own cell. [`brute_force_edges`] is the O(n²) oracle the index is
//! checked against. Both compare distances with a plain `<=`, so they agree
//! exactly.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::PointCloud;

/// Chebyshev distance between two points of the same dimension.
pub fn linf_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    Ok(linf(p, q))
}

#[inline]
pub(crate) fn linf(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Uniform-grid index over a point cloud.
#[derive(Debug, Clone)]
pub struct GridIndex<'a> {
    cloud: &'a PointCloud,
    cell_size: f64,
    cells: HashMap<Box<[i64]>, Vec<usize>>,
}

/// Integer cell coordinate along one axis. Saturates for coordinates too
/// large to represent, which keeps the map monotone in `x`.
#[inline]
fn cell_coord(x: f64, cell_size: f64) -> i64 {
    (x / cell_size).floor() as i64
}

impl<'a> GridIndex<'a> {
    /// Buckets every point of `cloud` into cells of side `cell_size`.
    pub fn build(cloud: &'a PointCloud, cell_size: f64) -> Result<Self> {
        if !(cell_size > 0.0) || cell_size.is_infinite() {
            return Err(Error::invalid(
                "cell_size",
                "cell size must be positive and finite",
            ));
        }
        let mut cells: HashMap<Box<[i64]>, Vec<usize>> = HashMap::new();
        let mut key = vec![0i64; cloud.dim()];
        for (i, p) in cloud.points().enumerate() {
            for (k, x) in key.iter_mut().zip(p) {
                *k = cell_coord(*x, cell_size);
            }
            match cells.get_mut(key.as_slice()) {
                Some(bucket) => bucket.push(i),
                None => {
                    cells.insert(key.clone().into_boxed_slice(), vec![i]);
                }
            }
        }
        Ok(GridIndex {
            cloud,
            cell_size,
            cells,
        })
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn cloud(&self) -> &'a PointCloud {
        self.cloud
    }

    /// Occupied cells and the vertices they hold.
    pub fn cells(&self) -> impl Iterator<Item = (&[i64], &[usize])> + '_ {
        self.cells.iter().map(|(k, v)| (&k[..], &v[..]))
    }

    /// Cell coordinates of vertex `i`.
    pub fn cell_of(&self, i: usize) -> Vec<i64> {
        self.cloud
            .point(i)
            .iter()
            .map(|x| cell_coord(*x, self.cell_size))
            .collect()
    }

    fn check_query(&self, i: usize, y: f64) -> Result<()> {
        let n = self.cloud.len();
        if i >= n {
            return Err(Error::VertexOutOfRange { index: i, n });
        }
        if !(y >= 0.0) {
            return Err(Error::invalid("y", "query radius must be >= 0"));
        }
        if y > self.cell_size {
            return Err(Error::RadiusExceedsCell {
                y,
                cell_size: self.cell_size,
            });
        }
        Ok(())
    }

    /// Calls `visit(j, distance)` for every `j ≠ i` within l∞ distance `y` of
    /// vertex `i`.
    pub fn visit_neighbors<F: FnMut(usize, f64)>(
        &self,
        i: usize,
        y: f64,
        mut visit: F,
    ) -> Result<()> {
        self.check_query(i, y)?;
        let d = self.cloud.dim();
        let origin = self.cell_of(i);
        let center = self.cloud.point(i);
        let mut key = origin.clone();
        // offsets in {-1,0,1}^d, enumerated as base-3 digits
        let total = 3usize.pow(d as u32);
        'offsets: for code in 0..total {
            let mut rest = code;
            for (axis, k) in key.iter_mut().enumerate() {
                let step = (rest % 3) as i64 - 1;
                rest /= 3;
                match origin[axis].checked_add(step) {
                    Some(c) => *k = c,
                    // beyond the representable range; those points share the saturated cell
                    None => continue 'offsets,
                }
            }
            if let Some(bucket) = self.cells.get(key.as_slice()) {
                for &j in bucket {
                    if j == i {
                        continue;
                    }
                    let dist = linf(center, self.cloud.point(j));
                    if dist <= y {
                        visit(j, dist);
                    }
                }
            }
        }
        Ok(())
    }

    /// Sorted ids of every vertex other than `i` within l∞ distance `y`.
    pub fn neighbors_within(&self, i: usize, y: f64) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        self.visit_neighbors(i, y, |j, _| out.push(j))?;
        out.sort_unstable();
        Ok(out)
    }

    /// Number of neighbors of `i` within `y`.
    pub fn degree(&self, i: usize, y: f64) -> Result<u64> {
        let mut count = 0u64;
        self.visit_neighbors(i, y, |_, _| count += 1)?;
        Ok(count)
    }

    /// All pairs `(i, j)`, `i < j`, within `y`, in lexicographic order.
    pub fn edges(&self, y: f64) -> Result<Vec<(usize, usize)>> {
        let mut out = Vec::new();
        for i in 0..self.cloud.len() {
            let start = out.len();
            self.visit_neighbors(i, y, |j, _| {
                if j > i {
                    out.push((i, j));
                }
            })?;
            out[start..].sort_unstable();
        }
        Ok(out)
    }
}

/// Every pair `(i, j)`, `i < j`, at l∞ distance at most `y`, by exhaustive
/// scan. Lexicographically ordered.
pub fn brute_force_edges(cloud: &PointCloud, y: f64) -> Vec<(usize, usize)> {
    let n = cloud.len();
    let mut out = Vec::new();
    for i in 0..n {
        let p = cloud.point(i);
        for j in i + 1..n {
            if linf(p, cloud.point(j)) <= y {
                out.push((i, j));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Provenance;
    use crate::sampling::{sample_exponential_cloud, CloudRng, UnitSource};

    fn cloud(dim: usize, pts: &[Vec<f64>]) -> PointCloud {
        PointCloud::from_points(
            dim,
            pts,
            Provenance {
                seed: 0,
                lambda: 1.0,
            },
        )
        .unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(linf_distance(&[0.0, 0.0], &[1.0, 2.0]).unwrap(), 2.0);
        assert_eq!(linf_distance(&[0.3, 7.0], &[0.3, 7.0]).unwrap(), 0.0);
        assert!(matches!(
            linf_distance(&[0.0], &[0.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn distance_matches_scalar_loop() {
        let mut rng = CloudRng::new(17);
        for case in 0..1000 {
            let d = case % 3 + 1;
            let p: Vec<f64> = (0..d).map(|_| rng.next_unit() * 10.0).collect();
            let q: Vec<f64> = (0..d).map(|_| rng.next_unit() * 10.0).collect();
            let mut expected = 0.0f64;
            for k in 0..d {
                let diff = if p[k] > q[k] {
                    p[k] - q[k]
                } else {
                    q[k] - p[k]
                };
                if diff > expected {
                    expected = diff;
                }
            }
            assert_eq!(linf_distance(&p, &q).unwrap(), expected);
        }
    }

    #[test]
    fn metric_axioms_on_random_triples() {
        let mut rng = CloudRng::new(5);
        for _ in 0..10_000 {
            let mut draw = || -> Vec<f64> { (0..3).map(|_| rng.next_unit() * 5.0).collect() };
            let (a, b, c) = (draw(), draw(), draw());
            let ab = linf(&a, &b);
            assert!(ab >= 0.0);
            assert_eq!(ab, linf(&b, &a));
            assert_eq!(linf(&a, &a), 0.0);
            assert!(ab > 0.0);
            assert!(linf(&a, &c) <= ab + linf(&b, &c) + 1e-12);
        }
    }

    #[test]
    fn single_point_grid() {
        let c = cloud(2, &[vec![0.0, 0.0]]);
        let g = GridIndex::build(&c, 1.0).unwrap();
        let cells: Vec<_> = g.cells().collect();
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].0, &[0, 0]);
        assert_eq!(cells[0].1, &[0]);
    }

    #[test]
    fn two_cells_in_one_dimension() {
        let c = cloud(1, &[vec![0.5], vec![1.5]]);
        let g = GridIndex::build(&c, 1.0).unwrap();
        assert_eq!(g.cells().count(), 2);
        assert_eq!(g.cell_of(0), vec![0]);
        assert_eq!(g.cell_of(1), vec![1]);
    }

    #[test]
    fn build_rejects_bad_cell_size() {
        let c = cloud(1, &[vec![0.5]]);
        assert!(GridIndex::build(&c, 0.0).is_err());
        assert!(GridIndex::build(&c, -1.0).is_err());
        assert!(GridIndex::build(&c, f64::NAN).is_err());
    }

    #[test]
    fn every_vertex_in_exactly_one_cell() {
        let c = sample_exponential_cloud(10_000, 2, 1.0, 3).unwrap();
        let g = GridIndex::build(&c, 0.05).unwrap();
        let mut seen: Vec<usize> = g.cells().flat_map(|(_, v)| v.iter().copied()).collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..10_000).collect::<Vec<_>>());
        for (key, members) in g.cells() {
            for &i in members {
                assert_eq!(g.cell_of(i), key);
            }
        }
    }

    #[test]
    fn boundary_distance_is_included() {
        let c = cloud(2, &[vec![0.25, 1.0], vec![0.75, 1.1]]);
        let g = GridIndex::build(&c, 0.5).unwrap();
        assert_eq!(g.neighbors_within(0, 0.5).unwrap(), vec![1]);
        assert_eq!(g.neighbors_within(1, 0.5).unwrap(), vec![0]);
    }

    #[test]
    fn zero_radius_on_distinct_points() {
        let c = sample_exponential_cloud(200, 2, 1.0, 1).unwrap();
        let g = GridIndex::build(&c, 1.0).unwrap();
        for i in 0..c.len() {
            assert!(g.neighbors_within(i, 0.0).unwrap().is_empty());
        }
    }

    #[test]
    fn query_errors() {
        let c = cloud(1, &[vec![0.0], vec![1.0]]);
        let g = GridIndex::build(&c, 0.5).unwrap();
        assert!(matches!(
            g.neighbors_within(2, 0.1),
            Err(Error::VertexOutOfRange { index: 2, n: 2 })
        ));
        assert!(matches!(
            g.neighbors_within(0, 0.6),
            Err(Error::RadiusExceedsCell { .. })
        ));
    }

    #[test]
    fn brute_force_examples() {
        let c = cloud(1, &[vec![0.0], vec![0.5], vec![1.2]]);
        // distances 0.5, 0.7, 1.2
        assert_eq!(brute_force_edges(&c, 0.6), vec![(0, 1)]);
        assert_eq!(brute_force_edges(&c, 0.7), vec![(0, 1), (1, 2)]);
        let pair = cloud(1, &[vec![0.0], vec![1.0]]);
        assert!(brute_force_edges(&pair, 0.9).is_empty());
    }

    #[test]
    fn huge_coordinates_relative_to_cell_size() {
        // cell coordinates saturate; queries must still be exact
        let c = cloud(1, &[vec![1e10], vec![1e10 + 1e-6], vec![2e10]]);
        let g = GridIndex::build(&c, 1e-12).unwrap();
        assert_eq!(g.edges(1e-12).unwrap(), brute_force_edges(&c, 1e-12));
        let g = GridIndex::build(&c, 1e-30).unwrap();
        assert_eq!(g.edges(1e-30).unwrap(), brute_force_edges(&c, 1e-30));
    }

    #[test]
    fn grid_matches_brute_force_on_random_clouds() {
        let mut rng = CloudRng::new(2024);
        for case in 0..100u64 {
            let d = (case % 3 + 1) as usize;
            let n = 2 + (rng.next_u64() % 399) as usize;
            let c = sample_exponential_cloud(n, d, 1.0, case).unwrap();
            let y = rng.next_unit() * 0.5;
            let g = GridIndex::build(&c, y).unwrap();
            let brute = brute_force_edges(&c, y);
            for i in 0..n {
                let mut expected: Vec<usize> = brute
                    .iter()
                    .filter_map(|&(a, b)| {
                        if a == i {
                            Some(b)
                        } else if b == i {
                            Some(a)
                        } else {
                            None
                        }
                    })
                    .collect();
                expected.sort_unstable();
                let got = g.neighbors_within(i, y).unwrap();
                assert!(!got.contains(&i));
                assert_eq!(got, expected, "case {case}, vertex {i}");
            }
            assert_eq!(g.edges(y).unwrap(), brute);
        }
    }
}
