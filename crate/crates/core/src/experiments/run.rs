use rayon::prelude::*;

use super::{ExperimentKind, ExperimentSpec, NSummary, ResultRow, ResultTable, Stat};
use crate::error::{Error, Result};
use crate::model::{EdgeDistanceFamily, FamilyRule, PointCloud, RggConfig};
use crate::sampling::{derive_replication_seed, sample_exponential_cloud};
use crate::spatial::GridIndex;
use crate::stats::{degree_ratios, degree_summary, edge_density_gap, pair_count};
use crate::theory::{
    containment_radius, edge_distance, pair_connect_prob, series_classifier, theory_bounds,
};

/// Execution settings that never influence results.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; 0 picks the number of available cores.
    pub threads: usize,
}

/// Runs whatever experiment `spec` describes. `progress` is called once per
/// completed n, in n order.
pub fn run(
    spec: &ExperimentSpec,
    options: RunOptions,
    progress: &mut dyn FnMut(&NSummary),
) -> Result<ResultTable> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.threads)
        .build()
        .map_err(|e| Error::invalid("threads", e.to_string()))?;

    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for (k, &n) in spec.n_list.iter().enumerate() {
        let jobs: Vec<(usize, u64)> = (0..spec.replications)
            .map(|r| {
                let global = (k * spec.replications + r) as u64;
                (r, derive_replication_seed(spec.base_seed, global))
            })
            .collect();
        let per_rep: Vec<Replication> = pool.install(|| {
            jobs.par_iter()
                .map(|&(r, seed)| replicate(spec, n, r, seed))
                .collect::<Result<Vec<_>>>()
        })?;
        let summary = summarize(spec, n, &per_rep)?;
        progress(&summary);
        summaries.push(summary);
        rows.extend(per_rep.into_iter().flat_map(|rep| rep.rows));
    }

    let bounds = match (spec.kind, spec.family.map(|f| f.rule)) {
        (ExperimentKind::DegreeLaw, Some(FamilyRule::LogRegime { c })) => {
            Some(theory_bounds(c, spec.lambda, spec.d)?)
        }
        _ => None,
    };
    let series = match spec.kind {
        ExperimentKind::Threshold => spec.family.as_ref().map(series_classifier),
        _ => None,
    };
    Ok(ResultTable {
        spec: spec.clone(),
        rows,
        summaries,
        bounds,
        series,
    })
}

fn run_kind(
    spec: &ExperimentSpec,
    kind: ExperimentKind,
    options: RunOptions,
) -> Result<ResultTable> {
    if spec.kind != kind {
        return Err(Error::invalid(
            "kind",
            format!(
                "expected a {} spec, got {}",
                kind.as_str(),
                spec.kind.as_str()
            ),
        ));
    }
    run(spec, options, &mut |_| {})
}

/// Min/max degree ratios against the degree-theorem constants.
pub fn run_degree_law(spec: &ExperimentSpec, options: RunOptions) -> Result<ResultTable> {
    run_kind(spec, ExperimentKind::DegreeLaw, options)
}

/// Edge-density gap |ε_n/C(n,2) − p(y_n)| along a log-regime sequence.
pub fn run_edge_slln(spec: &ExperimentSpec, options: RunOptions) -> Result<ResultTable> {
    run_kind(spec, ExperimentKind::EdgeSlln, options)
}

/// Sup over a fixed y grid of the edge-density gap.
pub fn run_uniform_slln(spec: &ExperimentSpec, options: RunOptions) -> Result<ResultTable> {
    run_kind(spec, ExperimentKind::UniformSlln, options)
}

/// Frequency with which every point lies in [0, R_n]^d.
pub fn run_containment(spec: &ExperimentSpec, options: RunOptions) -> Result<ResultTable> {
    run_kind(spec, ExperimentKind::Containment, options)
}

/// Frequency of graphs with at least one edge.
pub fn run_threshold_dichotomy(spec: &ExperimentSpec, options: RunOptions) -> Result<ResultTable> {
    run_kind(spec, ExperimentKind::Threshold, options)
}

/// Rows of one replication plus the per-replication scalars the summary needs.
struct Replication {
    rows: Vec<ResultRow>,
    sup_gap: Option<f64>,
    corner_free: Option<bool>,
}

fn family(spec: &ExperimentSpec) -> EdgeDistanceFamily {
    spec.family.expect("validated spec carries a family")
}

fn replicate(spec: &ExperimentSpec, n: usize, rep: usize, seed: u64) -> Result<Replication> {
    let cloud = sample_exponential_cloud(n, spec.d, spec.lambda, seed)?;
    let mut row = ResultRow::blank(spec, n, rep, seed);
    match spec.kind {
        ExperimentKind::DegreeLaw | ExperimentKind::EdgeSlln | ExperimentKind::Threshold => {
            let y = edge_distance(&family(spec), n as u64)?;
            let config = RggConfig::new(n, spec.d, spec.lambda, y, seed)?;
            let summary = degree_summary(&cloud, y)?;
            row.y_n = Some(y);
            row.epsilon_n = Some(summary.edge_count());
            row.min_degree = Some(summary.min_degree());
            row.max_degree = Some(summary.max_degree());
            row.p_y = Some(pair_connect_prob(y, spec.lambda, spec.d));
            match spec.kind {
                ExperimentKind::DegreeLaw => {
                    let (lo, hi) = degree_ratios(&summary, &config)?;
                    row.min_ratio = Some(lo);
                    row.max_ratio = Some(hi);
                    row.gap = Some(edge_density_gap(&summary, &config));
                }
                ExperimentKind::EdgeSlln => {
                    row.gap = Some(edge_density_gap(&summary, &config));
                }
                _ => {
                    row.has_edge = Some(summary.edge_count() >= 1);
                }
            }
            Ok(Replication {
                rows: vec![row],
                sup_gap: None,
                corner_free: None,
            })
        }
        ExperimentKind::UniformSlln => {
            let grid = spec.y_grid.as_ref().expect("validated spec carries a grid");
            let counts = edge_counts_on_grid(&cloud, grid)?;
            let pairs = pair_count(n);
            let mut sup = 0.0f64;
            let rows = grid
                .iter()
                .zip(counts)
                .map(|(&y, edges)| {
                    let p = pair_connect_prob(y, spec.lambda, spec.d);
                    let gap = (edges as f64 / pairs - p).abs();
                    sup = sup.max(gap);
                    let mut r = row.clone();
                    r.y_n = Some(y);
                    r.epsilon_n = Some(edges);
                    r.p_y = Some(p);
                    r.gap = Some(gap);
                    r
                })
                .collect();
            Ok(Replication {
                rows,
                sup_gap: Some(sup),
                corner_free: None,
            })
        }
        ExperimentKind::Containment => {
            let epsilon = spec.epsilon.expect("validated spec carries epsilon");
            let radius = containment_radius(n as f64, spec.lambda, spec.d, epsilon)?;
            row.contained = Some(is_contained(&cloud, radius));
            Ok(Replication {
                rows: vec![row],
                sup_gap: None,
                corner_free: Some(!has_corner_point(&cloud, radius)),
            })
        }
    }
}

/// Whether every coordinate of every point is at most `radius`.
pub(crate) fn is_contained(cloud: &PointCloud, radius: f64) -> bool {
    cloud.coords().iter().all(|&x| x <= radius)
}

/// Whether some point has every coordinate above `radius`.
pub(crate) fn has_corner_point(cloud: &PointCloud, radius: f64) -> bool {
    cloud.points().any(|p| p.iter().all(|&x| x > radius))
}

/// ε_n(y) for every y of an increasing grid, from a single pass over the
/// pairs within the largest y.
pub(crate) fn edge_counts_on_grid(cloud: &PointCloud, grid: &[f64]) -> Result<Vec<u64>> {
    let y_max = *grid.last().expect("nonempty grid");
    let index = GridIndex::build(cloud, y_max)?;
    let buckets = (0..cloud.len())
        .into_par_iter()
        .try_fold(
            || vec![0u64; grid.len()],
            |mut acc, i| {
                index.visit_neighbors(i, y_max, |j, dist| {
                    if j > i {
                        // first grid value with dist <= y
                        acc[grid.partition_point(|&y| y < dist)] += 1;
                    }
                })?;
                Ok::<_, Error>(acc)
            },
        )
        .try_reduce(
            || vec![0u64; grid.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )?;
    Ok(buckets
        .iter()
        .scan(0u64, |total, &b| {
            *total += b;
            Some(*total)
        })
        .collect())
}

fn summarize(spec: &ExperimentSpec, n: usize, reps: &[Replication]) -> Result<NSummary> {
    let rows = || reps.iter().flat_map(|r| r.rows.iter());
    let frequency = |flag: fn(&ResultRow) -> Option<bool>| {
        let hits = rows().filter(|r| flag(r) == Some(true)).count();
        hits as f64 / reps.len() as f64
    };
    let mut s = NSummary {
        n,
        replications: reps.len(),
        ..NSummary::default()
    };
    match spec.kind {
        ExperimentKind::DegreeLaw => {
            s.y_n = Some(edge_distance(&family(spec), n as u64)?);
            let mins: Vec<f64> = rows().filter_map(|r| r.min_ratio).collect();
            let maxs: Vec<f64> = rows().filter_map(|r| r.max_ratio).collect();
            s.min_ratio = Stat::of(&mins);
            s.max_ratio = Stat::of(&maxs);
            s.min_limsup_statement = Some(spec.lambda.powi(spec.d as i32));
            s.min_limsup_proof_envelope = Some((2.0 * spec.lambda).powi(spec.d as i32));
        }
        ExperimentKind::EdgeSlln => {
            let y = edge_distance(&family(spec), n as u64)?;
            let p = pair_connect_prob(y, spec.lambda, spec.d);
            let gaps: Vec<f64> = rows().filter_map(|r| r.gap).collect();
            let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
            s.y_n = Some(y);
            s.mean_gap = Some(mean);
            s.mean_relative_gap = Some(mean / p);
        }
        ExperimentKind::UniformSlln => {
            let sups: Vec<f64> = reps.iter().filter_map(|r| r.sup_gap).collect();
            s.sup_gap = Stat::of(&sups);
        }
        ExperimentKind::Containment => {
            let epsilon = spec.epsilon.expect("validated spec carries epsilon");
            s.radius = Some(containment_radius(n as f64, spec.lambda, spec.d, epsilon)?);
            let radius = s.radius.unwrap();
            let nf = n as f64;
            s.escape_union_bound = Some(nf * spec.d as f64 * (-spec.lambda * radius).exp());
            s.containment_frequency = Some(frequency(|r| r.contained));
            s.corner_escape_bound = Some(nf * (-spec.lambda * spec.d as f64 * radius).exp());
            let free = reps.iter().filter(|r| r.corner_free == Some(true)).count();
            s.corner_free_frequency = Some(free as f64 / reps.len() as f64);
        }
        ExperimentKind::Threshold => {
            let y = edge_distance(&family(spec), n as u64)?;
            s.y_n = Some(y);
            s.expected_edges = Some(pair_count(n) * pair_connect_prob(y, spec.lambda, spec.d));
            s.edge_frequency = Some(frequency(|r| r.has_edge));
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::default_y_grid;
    use crate::model::Provenance;
    use crate::spatial::brute_force_edges;

    fn spec(kind: ExperimentKind, family: Option<EdgeDistanceFamily>) -> ExperimentSpec {
        ExperimentSpec {
            kind,
            n_list: vec![100],
            d: 2,
            lambda: 1.0,
            family,
            y_grid: None,
            replications: 1,
            base_seed: 9,
            epsilon: None,
        }
    }

    fn log2() -> Option<EdgeDistanceFamily> {
        Some(EdgeDistanceFamily::log_regime(2.0, 1.0, 2).unwrap())
    }

    #[test]
    fn single_degree_law_row_is_deterministic() {
        let s = spec(ExperimentKind::DegreeLaw, log2());
        let a = run_degree_law(&s, RunOptions::default()).unwrap();
        let b = run_degree_law(&s, RunOptions { threads: 3 }).unwrap();
        assert_eq!(a.rows.len(), 1);
        assert_eq!(a, b);
        let row = &a.rows[0];
        assert!(row.min_ratio.unwrap() <= row.max_ratio.unwrap());
        assert!(row.contained.is_none() && row.has_edge.is_none());
        assert_eq!(a.bounds, Some(theory_bounds(2.0, 1.0, 2).unwrap()));
        assert_eq!(row.seed, derive_replication_seed(9, 0));
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let s = spec(ExperimentKind::DegreeLaw, log2());
        assert!(run_edge_slln(&s, RunOptions::default()).is_err());
    }

    #[test]
    fn edge_counts_match_brute_force() {
        let mut s = spec(ExperimentKind::EdgeSlln, log2());
        s.n_list = vec![50, 120, 400];
        s.replications = 3;
        let table = run_edge_slln(&s, RunOptions::default()).unwrap();
        assert_eq!(table.rows.len(), 9);
        for row in &table.rows {
            let cloud = sample_exponential_cloud(row.n, 2, 1.0, row.seed).unwrap();
            let brute = brute_force_edges(&cloud, row.y_n.unwrap()).len() as u64;
            assert_eq!(row.epsilon_n, Some(brute));
        }
        // rows come out ordered by (n, replication)
        let keys: Vec<_> = table.rows.iter().map(|r| (r.n, r.replication)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn grid_edge_counts_match_brute_force() {
        let grid = default_y_grid();
        for seed in 0..5 {
            let cloud = sample_exponential_cloud(300, 1 + seed as usize % 3, 1.0, seed).unwrap();
            let counts = edge_counts_on_grid(&cloud, &grid).unwrap();
            for (y, c) in grid.iter().zip(&counts) {
                assert_eq!(*c, brute_force_edges(&cloud, *y).len() as u64);
            }
        }
    }

    #[test]
    fn sup_gap_dominates_each_grid_gap() {
        let mut s = spec(ExperimentKind::UniformSlln, None);
        s.y_grid = Some(default_y_grid());
        s.replications = 3;
        let t = run_uniform_slln(&s, RunOptions::default()).unwrap();
        let sup = t.summaries[0].sup_gap.unwrap();
        assert_eq!(t.rows.len(), 3 * 20);
        for row in &t.rows {
            assert!(row.gap.unwrap() <= sup.max);
            assert!(row.min_degree.is_none());
        }
    }

    #[test]
    fn containment_detects_escapes() {
        let cloud = PointCloud::from_flat(
            2,
            vec![0.1, 0.2, 9.0, 0.3],
            Provenance {
                seed: 0,
                lambda: 1.0,
            },
        )
        .unwrap();
        assert!(!is_contained(&cloud, 5.0));
        assert!(is_contained(&cloud, 9.0));
        // (9, 0.3) escapes in one coordinate only
        assert!(!has_corner_point(&cloud, 5.0));
        assert!(has_corner_point(&cloud, 0.05));
    }

    #[test]
    fn containment_nested_in_epsilon() {
        let mut s = spec(ExperimentKind::Containment, None);
        s.n_list = vec![1000];
        s.replications = 50;
        s.epsilon = Some(0.0);
        let tight = run_containment(&s, RunOptions::default()).unwrap();
        s.epsilon = Some(1.0);
        let loose = run_containment(&s, RunOptions::default()).unwrap();
        for (a, b) in tight.rows.iter().zip(&loose.rows) {
            assert_eq!(a.seed, b.seed);
            assert!(!a.contained.unwrap() || b.contained.unwrap());
        }
        let f = |t: &ResultTable| t.summaries[0].containment_frequency.unwrap();
        assert!(f(&loose) >= f(&tight));
    }

    #[test]
    fn threshold_tags_series() {
        let fam = EdgeDistanceFamily::power(1.0, 3.0, 1.0, 1).unwrap();
        let mut s = spec(ExperimentKind::Threshold, Some(fam));
        s.d = 1;
        s.replications = 4;
        let t = run_threshold_dichotomy(&s, RunOptions::default()).unwrap();
        assert_eq!(t.series, Some(crate::theory::SeriesClass::Converges));
        assert!(t.rows.iter().all(|r| r.has_edge.is_some()));
        assert!(t.summaries[0].expected_edges.unwrap() < 1e-2);
    }

    #[test]
    fn progress_reports_each_n_in_order() {
        let mut s = spec(ExperimentKind::EdgeSlln, log2());
        s.n_list = vec![50, 60, 70];
        let mut seen = Vec::new();
        run(&s, RunOptions::default(), &mut |sum| seen.push(sum.n)).unwrap();
        assert_eq!(seen, vec![50, 60, 70]);
    }
}
