//! k-means over standardised trajectories, k-selection diagnostics and
//! per-cluster shape aggregation.
//!
//! Runs are made independent of input order: points are sorted by
//! source id (then lexicon) before seeding, and cluster indices are
//! relabelled so that cluster 0 has the highest mean centroid value.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::corpus::Z_99;
use crate::trajectory::Trajectory;

pub const DEFAULT_RESTARTS: usize = 25;
pub const MAX_ITERATIONS: usize = 300;

#[derive(Debug, Error, PartialEq)]
pub enum ClusterError {
    #[error("no points to cluster")]
    Empty,
    #[error("k must be at least 1")]
    ZeroK,
    #[error("k = {k} exceeds the number of points ({n})")]
    TooFewPoints { k: usize, n: usize },
    #[error("only {distinct} distinct points, cannot form {k} non-empty clusters")]
    Degenerate { k: usize, distinct: usize },
    #[error("points have differing lengths")]
    RaggedInput,
    #[error("need more than k_max = {k_max} points, got {n}")]
    InsufficientData { k_max: usize, n: usize },
    #[error("invalid k range {k_min}..={k_max}")]
    BadRange { k_min: usize, k_max: usize },
    #[error("assignments do not match the points")]
    BadAssignments,
    #[error("cluster {0} has no members")]
    EmptyCluster(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterModel {
    pub k: usize,
    pub centroids: Vec<Vec<f64>>,
    /// Cluster index per input point, in input order.
    pub assignments: Vec<usize>,
    pub inertia: f64,
    pub seed: u64,
    /// Restart that produced this model.
    pub restart: usize,
    pub iterations: usize,
    /// Inertia after each Lloyd iteration of the winning restart.
    pub inertia_trace: Vec<f64>,
}

impl ClusterModel {
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &a in &self.assignments {
            s[a] += 1;
        }
        s
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(p, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn plus_plus_init(points: &[&[f64]], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids = vec![points[rng.gen_range(0..n)].to_vec()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, d) in d2.iter().enumerate() {
                if *d > 0.0 && target < *d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            pick
        } else {
            rng.gen_range(0..n)
        };
        let c = points[next].to_vec();
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

struct Run {
    centroids: Vec<Vec<f64>>,
    labels: Vec<usize>,
    inertia: f64,
    iterations: usize,
    trace: Vec<f64>,
}

fn lloyd(points: &[&[f64]], k: usize, rng: &mut ChaCha8Rng) -> Run {
    let dim = points[0].len();
    let mut centroids = plus_plus_init(points, k, rng);
    let mut labels = vec![usize::MAX; points.len()];
    let mut trace = Vec::new();
    let mut iterations = 0;

    for _ in 0..MAX_ITERATIONS {
        iterations += 1;
        let mut changed = false;
        let mut dists = vec![0.0; points.len()];
        for (i, p) in points.iter().enumerate() {
            let (j, d) = nearest(p, &centroids);
            dists[i] = d;
            if labels[i] != j {
                labels[i] = j;
                changed = true;
            }
        }

        // An empty cluster takes the point farthest from its own centroid.
        loop {
            let mut counts = vec![0usize; k];
            for &l in &labels {
                counts[l] += 1;
            }
            let Some(empty) = counts.iter().position(|&c| c == 0) else {
                break;
            };
            let far = (0..points.len())
                .filter(|&i| counts[labels[i]] > 1)
                .max_by(|&a, &b| {
                    dists[a]
                        .partial_cmp(&dists[b])
                        .unwrap_or(Ordering::Equal)
                        .then(b.cmp(&a))
                });
            let Some(far) = far else { break };
            centroids[empty] = points[far].to_vec();
            labels[far] = empty;
            dists[far] = 0.0;
            changed = true;
        }

        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(p.iter()) {
                *s += x;
            }
        }
        for (j, (s, &c)) in sums.into_iter().zip(&counts).enumerate() {
            if c > 0 {
                centroids[j] = s.into_iter().map(|v| v / c as f64).collect();
            }
        }
        let inertia: f64 = points
            .iter()
            .zip(&labels)
            .map(|(p, &l)| sq_dist(p, &centroids[l]))
            .sum();
        trace.push(inertia);
        if !changed {
            break;
        }
    }
    let inertia = *trace.last().expect("at least one iteration");
    Run {
        centroids,
        labels,
        inertia,
        iterations,
        trace,
    }
}

/// Validates the point set and returns it sorted by (source id, lexicon),
/// together with the permutation back to input order.
fn ordered_points(points: &[Trajectory]) -> Result<Vec<usize>, ClusterError> {
    if points.is_empty() {
        return Err(ClusterError::Empty);
    }
    let dim = points[0].bins.len();
    if dim == 0 || points.iter().any(|p| p.bins.len() != dim) {
        return Err(ClusterError::RaggedInput);
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        (&points[a].source_id, &points[a].lexicon).cmp(&(&points[b].source_id, &points[b].lexicon))
    });
    Ok(order)
}

fn distinct_count(points: &[&[f64]], cap: usize) -> usize {
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    for p in points {
        seen.insert(p.iter().map(|v| v.to_bits()).collect());
        if seen.len() >= cap {
            break;
        }
    }
    seen.len()
}

/// Lloyd's algorithm with k-means++ seeding; best of `restarts` runs.
/// Restart `r` is seeded with `seed + r` and ties go to the lowest `r`.
pub fn kmeans(
    points: &[Trajectory],
    k: usize,
    seed: u64,
    restarts: usize,
) -> Result<ClusterModel, ClusterError> {
    let order = ordered_points(points)?;
    if k == 0 {
        return Err(ClusterError::ZeroK);
    }
    if k > points.len() {
        return Err(ClusterError::TooFewPoints { k, n: points.len() });
    }
    let sorted: Vec<&[f64]> = order.iter().map(|&i| points[i].bins.as_slice()).collect();
    let distinct = distinct_count(&sorted, k);
    if distinct < k {
        return Err(ClusterError::Degenerate { k, distinct });
    }

    let mut best: Option<(usize, Run)> = None;
    for r in 0..restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
        let run = lloyd(&sorted, k, &mut rng);
        if best.as_ref().is_none_or(|(_, b)| run.inertia < b.inertia) {
            best = Some((r, run));
        }
    }
    let (restart, run) = best.expect("at least one restart");

    // cluster 0 = highest centroid mean; ties keep the original index order
    let mean = |c: &Vec<f64>| c.iter().sum::<f64>() / c.len() as f64;
    let mut rank: Vec<usize> = (0..k).collect();
    rank.sort_by(|&a, &b| {
        mean(&run.centroids[b])
            .partial_cmp(&mean(&run.centroids[a]))
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut relabel = vec![0; k];
    for (new, &old) in rank.iter().enumerate() {
        relabel[old] = new;
    }
    let centroids = rank.iter().map(|&old| run.centroids[old].clone()).collect();
    let mut assignments = vec![0; points.len()];
    for (pos, &orig) in order.iter().enumerate() {
        assignments[orig] = relabel[run.labels[pos]];
    }

    Ok(ClusterModel {
        k,
        centroids,
        assignments,
        inertia: run.inertia,
        seed,
        restart,
        iterations: run.iterations,
        inertia_trace: run.trace,
    })
}

/// Mean silhouette width. Singleton clusters contribute 0.
pub fn silhouette(points: &[&[f64]], labels: &[usize], k: usize) -> f64 {
    let n = points.len();
    let mut sizes = vec![0usize; k];
    for &l in labels {
        sizes[l] += 1;
    }
    let mut total = 0.0;
    for i in 0..n {
        let mut sums = vec![0.0; k];
        for j in 0..n {
            if i != j {
                sums[labels[j]] += sq_dist(points[i], points[j]).sqrt();
            }
        }
        let own = labels[i];
        if sizes[own] <= 1 {
            continue;
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 && b.is_finite() {
            total += (b - a) / denom;
        }
    }
    total / n as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterDiagnostics {
    pub wss_by_k: BTreeMap<usize, f64>,
    pub silhouette_by_k: BTreeMap<usize, f64>,
    /// `None` when no k ≥ 2 was evaluated.
    pub recommended_k: Option<usize>,
}

/// Within-cluster sum of squares for every k in range and mean
/// silhouette for every k ≥ 2; recommends the silhouette maximiser
/// (smallest k on ties).
pub fn select_k(
    points: &[Trajectory],
    k_min: usize,
    k_max: usize,
    seed: u64,
    restarts: usize,
) -> Result<ClusterDiagnostics, ClusterError> {
    if k_min == 0 || k_min > k_max {
        return Err(ClusterError::BadRange { k_min, k_max });
    }
    if points.len() <= k_max {
        return Err(ClusterError::InsufficientData {
            k_max,
            n: points.len(),
        });
    }
    let views: Vec<&[f64]> = points.iter().map(|p| p.bins.as_slice()).collect();
    let mut wss_by_k = BTreeMap::new();
    let mut silhouette_by_k = BTreeMap::new();
    for k in k_min..=k_max {
        let model = match kmeans(points, k, seed, restarts) {
            Ok(m) => m,
            Err(ClusterError::Degenerate { .. }) => break,
            Err(e) => return Err(e),
        };
        wss_by_k.insert(k, model.inertia);
        if k >= 2 {
            silhouette_by_k.insert(k, silhouette(&views, &model.assignments, k));
        }
    }
    let recommended_k = silhouette_by_k
        .iter()
        .fold(None::<(usize, f64)>, |best, (&k, &s)| match best {
            Some((_, bs)) if bs >= s => best,
            _ => Some((k, s)),
        })
        .map(|(k, _)| k);
    Ok(ClusterDiagnostics {
        wss_by_k,
        silhouette_by_k,
        recommended_k,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeStat {
    Mean,
    Median,
}

impl fmt::Display for ShapeStat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Mean => "mean",
            Self::Median => "median",
        })
    }
}

/// Per-bin centre of one cluster with its uncertainty bands.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateShape {
    pub cluster: usize,
    pub stat: ShapeStat,
    pub center: Vec<f64>,
    /// 99% interval of the mean; absent for median shapes.
    pub ci99: Option<(Vec<f64>, Vec<f64>)>,
    /// centre ∓ one population SD.
    pub sd_low: Vec<f64>,
    pub sd_high: Vec<f64>,
    pub n: usize,
    pub share: f64,
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

pub fn aggregate_shapes(
    points: &[Trajectory],
    assignments: &[usize],
    k: usize,
    stat: ShapeStat,
) -> Result<Vec<AggregateShape>, ClusterError> {
    if points.is_empty() {
        return Err(ClusterError::Empty);
    }
    if assignments.len() != points.len() || assignments.iter().any(|&a| a >= k) {
        return Err(ClusterError::BadAssignments);
    }
    let dim = points[0].bins.len();
    if points.iter().any(|p| p.bins.len() != dim) {
        return Err(ClusterError::RaggedInput);
    }
    let total = points.len() as f64;
    (0..k)
        .map(|c| {
            let members: Vec<&[f64]> = points
                .iter()
                .zip(assignments)
                .filter(|(_, &a)| a == c)
                .map(|(p, _)| p.bins.as_slice())
                .collect();
            if members.is_empty() {
                return Err(ClusterError::EmptyCluster(c));
            }
            let n = members.len();
            let nf = n as f64;
            let mut center = Vec::with_capacity(dim);
            let mut sd_pop = Vec::with_capacity(dim);
            let mut sd_sample = Vec::with_capacity(dim);
            for b in 0..dim {
                let mut col: Vec<f64> = members.iter().map(|m| m[b]).collect();
                let mean = col.iter().sum::<f64>() / nf;
                let ss: f64 = col.iter().map(|v| (v - mean).powi(2)).sum();
                sd_pop.push((ss / nf).sqrt());
                sd_sample.push(if n > 1 { (ss / (nf - 1.0)).sqrt() } else { 0.0 });
                center.push(match stat {
                    ShapeStat::Mean => mean,
                    ShapeStat::Median => median(&mut col),
                });
            }
            let ci99 = match stat {
                ShapeStat::Mean => {
                    let half: Vec<f64> = sd_sample.iter().map(|s| Z_99 * s / nf.sqrt()).collect();
                    Some((
                        center.iter().zip(&half).map(|(c, h)| c - h).collect(),
                        center.iter().zip(&half).map(|(c, h)| c + h).collect(),
                    ))
                }
                ShapeStat::Median => None,
            };
            Ok(AggregateShape {
                cluster: c,
                stat,
                sd_low: center.iter().zip(&sd_pop).map(|(c, s)| c - s).collect(),
                sd_high: center.iter().zip(&sd_pop).map(|(c, s)| c + s).collect(),
                center,
                ci99,
                n,
                share: nf / total,
            })
        })
        .collect()
}

/// Adjusted Rand index between two labelings of the same points.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings differ in length");
    let mut table: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut rows: BTreeMap<usize, f64> = BTreeMap::new();
    let mut cols: BTreeMap<usize, f64> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1.0;
        *rows.entry(x).or_default() += 1.0;
        *cols.entry(y).or_default() += 1.0;
    }
    let pairs = |v: f64| v * (v - 1.0) / 2.0;
    let index: f64 = table.values().copied().map(pairs).sum();
    let sum_a: f64 = rows.values().copied().map(pairs).sum();
    let sum_b: f64 = cols.values().copied().map(pairs).sum();
    let expected = sum_a * sum_b / pairs(a.len() as f64);
    let max = (sum_a + sum_b) / 2.0;
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn traj(id: String, bins: Vec<f64>) -> Trajectory {
        Trajectory {
            source_id: id,
            lexicon: "t".into(),
            bins,
        }
    }

    fn planted(per: usize, sigma: f64, seed: u64) -> (Vec<Trajectory>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, sigma).unwrap();
        let mut pts = Vec::new();
        let mut truth = Vec::new();
        for (fam, level) in [(0usize, 0.2), (1, -0.2)] {
            for i in 0..per {
                let bins = (0..100).map(|_| level + noise.sample(&mut rng)).collect();
                pts.push(traj(format!("f{fam}-{i:03}"), bins));
                truth.push(fam);
            }
        }
        (pts, truth)
    }

    #[test]
    fn k1_centroid_is_global_mean() {
        let (pts, _) = planted(10, 0.05, 3);
        let m = kmeans(&pts, 1, 7, 3).unwrap();
        for b in 0..100 {
            let mean = pts.iter().map(|p| p.bins[b]).sum::<f64>() / pts.len() as f64;
            assert!((m.centroids[0][b] - mean).abs() < 1e-12);
        }
        assert!(m.assignments.iter().all(|&a| a == 0));
    }

    #[test]
    fn recovers_planted_families() {
        let (pts, truth) = planted(50, 0.02, 11);
        let m = kmeans(&pts, 2, 42, DEFAULT_RESTARTS).unwrap();
        assert_eq!(adjusted_rand_index(&m.assignments, &truth), 1.0);
        // positive family gets index 0
        assert_eq!(m.assignments, truth);
        assert_eq!(m.sizes(), vec![50, 50]);
    }

    #[test]
    fn inertia_is_monotone() {
        let (pts, _) = planted(30, 0.3, 5);
        for k in 2..6 {
            let m = kmeans(&pts, k, 9, 5).unwrap();
            for w in m.inertia_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "{:?}", m.inertia_trace);
            }
            assert!(m.inertia >= 0.0);
            assert!(m.sizes().iter().all(|&s| s > 0));
        }
    }

    #[test]
    fn permutation_invariant() {
        let (pts, _) = planted(20, 0.1, 8);
        let a = kmeans(&pts, 3, 1, 4).unwrap();
        let mut shuffled = pts.clone();
        shuffled.reverse();
        shuffled.rotate_left(7);
        let b = kmeans(&shuffled, 3, 1, 4).unwrap();
        assert_eq!(a.centroids, b.centroids);
        let members = |pts: &[Trajectory], m: &ClusterModel, c: usize| -> Vec<String> {
            let mut v: Vec<String> = pts
                .iter()
                .zip(&m.assignments)
                .filter(|(_, &x)| x == c)
                .map(|(p, _)| p.source_id.clone())
                .collect();
            v.sort();
            v
        };
        for c in 0..3 {
            assert_eq!(members(&pts, &a, c), members(&shuffled, &b, c));
        }
    }

    #[test]
    fn degenerate_inputs() {
        let pts: Vec<Trajectory> = (0..5).map(|i| traj(format!("{i}"), vec![1.0; 4])).collect();
        assert_eq!(
            kmeans(&pts, 2, 0, 3),
            Err(ClusterError::Degenerate { k: 2, distinct: 1 })
        );
        assert_eq!(
            kmeans(&pts, 6, 0, 3),
            Err(ClusterError::TooFewPoints { k: 6, n: 5 })
        );
        assert_eq!(kmeans(&[], 1, 0, 3), Err(ClusterError::Empty));
        assert_eq!(kmeans(&pts, 0, 0, 3), Err(ClusterError::ZeroK));
    }

    #[test]
    fn select_k_finds_two() {
        let (pts, _) = planted(50, 0.02, 21);
        let d = select_k(&pts, 1, 10, 4, 5).unwrap();
        assert_eq!(d.recommended_k, Some(2));
        assert_eq!(d.wss_by_k.len(), 10);
        assert!(!d.silhouette_by_k.contains_key(&1));
        assert!(d.silhouette_by_k.values().all(|s| (-1.0..=1.0).contains(s)));
    }

    #[test]
    fn select_k_on_structureless_blob() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let noise = Normal::new(0.0, 0.1).unwrap();
        let pts: Vec<Trajectory> = (0..60)
            .map(|i| {
                traj(
                    format!("{i:02}"),
                    (0..100).map(|_| noise.sample(&mut rng)).collect(),
                )
            })
            .collect();
        let d = select_k(&pts, 1, 6, 2, 5).unwrap();
        for (k, s) in &d.silhouette_by_k {
            assert!(*s < 0.3, "k={k} silhouette {s}");
        }
    }

    #[test]
    fn select_k_without_k2() {
        let (pts, _) = planted(5, 0.02, 1);
        let d = select_k(&pts, 1, 1, 0, 2).unwrap();
        assert_eq!(d.recommended_k, None);
        assert_eq!(d.wss_by_k.len(), 1);
        assert!(select_k(&pts, 1, 10, 0, 2).is_err());
        assert!(select_k(&pts, 3, 2, 0, 2).is_err());
    }

    #[test]
    fn identical_members_have_zero_bands() {
        let pts: Vec<Trajectory> = (0..4)
            .map(|i| traj(format!("{i}"), vec![0.1, 0.2, 0.3]))
            .collect();
        let s = aggregate_shapes(&pts, &[0; 4], 1, ShapeStat::Mean).unwrap();
        assert_eq!(s[0].center, vec![0.1, 0.2, 0.3]);
        assert_eq!(s[0].sd_low, s[0].center);
        let (lo, hi) = s[0].ci99.clone().unwrap();
        assert_eq!(lo, s[0].center);
        assert_eq!(hi, s[0].center);
    }

    #[test]
    fn two_member_band() {
        let pts = vec![
            traj("a".into(), vec![1.0; 3]),
            traj("b".into(), vec![-1.0; 3]),
        ];
        let s = aggregate_shapes(&pts, &[0, 0], 1, ShapeStat::Mean).unwrap();
        assert_eq!(s[0].center, vec![0.0; 3]);
        assert_eq!(s[0].sd_high, vec![1.0; 3]);
        assert_eq!(s[0].sd_low, vec![-1.0; 3]);
        let (lo, hi) = s[0].ci99.clone().unwrap();
        let half = 2.576 * 2f64.sqrt() / 2f64.sqrt();
        assert!((hi[0] - half).abs() < 1e-12 && (lo[0] + half).abs() < 1e-12);
    }

    #[test]
    fn median_of_three() {
        let pts = vec![
            traj("a".into(), vec![5.0, 0.0]),
            traj("b".into(), vec![-1.0, 2.0]),
            traj("c".into(), vec![2.0, 9.0]),
        ];
        let s = aggregate_shapes(&pts, &[0, 0, 0], 1, ShapeStat::Median).unwrap();
        assert_eq!(s[0].center, vec![2.0, 2.0]);
        assert!(s[0].ci99.is_none());
    }

    #[test]
    fn planted_centres_and_shares() {
        let (pts, truth) = planted(50, 0.02, 13);
        let shapes = aggregate_shapes(&pts, &truth, 2, ShapeStat::Mean).unwrap();
        let tol = 3.0 * 0.02 / 50f64.sqrt();
        for (s, level) in shapes.iter().zip([0.2, -0.2]) {
            assert!(s.center.iter().all(|c| (c - level).abs() < tol));
            for b in 0..100 {
                let (lo, hi) = s.ci99.as_ref().unwrap();
                assert!(lo[b] <= s.center[b] && s.center[b] <= hi[b]);
            }
        }
        let share: f64 = shapes.iter().map(|s| s.share).sum();
        assert!((share - 1.0).abs() < 1e-12);
        assert_eq!(shapes.iter().map(|s| s.n).sum::<usize>(), 100);
    }

    #[test]
    fn k1_mean_shape_is_global_mean() {
        let (pts, _) = planted(7, 0.1, 2);
        let s = aggregate_shapes(&pts, &vec![0; pts.len()], 1, ShapeStat::Mean).unwrap();
        for b in 0..100 {
            let mean = pts.iter().map(|p| p.bins[b]).sum::<f64>() / pts.len() as f64;
            assert!((s[0].center[b] - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn aggregate_errors() {
        let pts = vec![traj("a".into(), vec![1.0]), traj("b".into(), vec![2.0])];
        assert_eq!(
            aggregate_shapes(&pts, &[0, 0], 2, ShapeStat::Mean),
            Err(ClusterError::EmptyCluster(1))
        );
        assert_eq!(
            aggregate_shapes(&pts, &[0], 1, ShapeStat::Mean),
            Err(ClusterError::BadAssignments)
        );
    }

    #[test]
    fn ari_basics() {
        assert_eq!(adjusted_rand_index(&[0, 0, 1, 1], &[1, 1, 0, 0]), 1.0);
        assert!(adjusted_rand_index(&[0, 0, 1, 1], &[0, 1, 0, 1]) < 0.0);
    }
}
