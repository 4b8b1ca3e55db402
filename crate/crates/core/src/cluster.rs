//! k-means (k-means++ seeding, Lloyd iterations) and vote-based reliability.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::ClusterError;
use crate::term::Symbol;

pub const MAX_ITERATIONS: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub granularity: u8,
    pub restarts: usize,
    pub voting_runs: usize,
    pub co_cluster_threshold: f64,
    pub seed: u64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            granularity: 3,
            restarts: 20,
            voting_runs: 10,
            co_cluster_threshold: 0.7,
            seed: 0,
        }
    }
}

impl ClusterConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(1..=5).contains(&self.granularity) {
            return Err(format!(
                "granularity must be in 1..5, got {}",
                self.granularity
            ));
        }
        if self.restarts == 0 || self.voting_runs == 0 {
            return Err("restarts and voting runs must be positive".into());
        }
        if !(self.co_cluster_threshold > 0.5 && self.co_cluster_threshold <= 1.0) {
            return Err(format!(
                "co-cluster threshold must be in (0.5, 1], got {}",
                self.co_cluster_threshold
            ));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> ClusterConfig {
        ClusterConfig {
            seed,
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub members: Vec<Symbol>,
    pub centroid: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub clusters: Vec<Cluster>,
}

impl Clustering {
    pub fn cluster_of(&self, name: &Symbol) -> Option<&Cluster> {
        self.clusters.iter().find(|c| c.members.contains(name))
    }

    pub fn together(&self, a: &Symbol, b: &Symbol) -> bool {
        self.cluster_of(a).is_some_and(|c| c.members.contains(b))
    }

    pub fn groups(&self) -> Vec<Vec<Symbol>> {
        self.clusters.iter().map(|c| c.members.clone()).collect()
    }
}

/// `min(N, max(g + 1, floor(N / (10 - g))))`.
pub fn cluster_count(objects: usize, cfg: &ClusterConfig) -> usize {
    let g = cfg.granularity as usize;
    let by_size = objects / (10 - g);
    by_size.max(g + 1).min(objects).max(1)
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// One converged Lloyd run: assignment per point, centroids, WCSS.
#[derive(Clone, Debug)]
pub struct Partition {
    pub assign: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub wcss: f64,
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(p, c);
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    best
}

fn means(points: &[Vec<f64>], assign: &[usize], k: usize) -> Vec<Vec<f64>> {
    let dim = points.first().map_or(0, Vec::len);
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &a) in points.iter().zip(assign) {
        counts[a] += 1;
        for (s, x) in sums[a].iter_mut().zip(p) {
            *s += x;
        }
    }
    for (s, &n) in sums.iter_mut().zip(&counts) {
        if n > 0 {
            s.iter_mut().for_each(|x| *x /= n as f64);
        }
    }
    sums
}

/// Moves the point farthest from its centroid into every empty cluster.
fn repair_empty(points: &[Vec<f64>], assign: &mut [usize], centroids: &mut [Vec<f64>]) {
    let k = centroids.len();
    loop {
        let mut counts = vec![0usize; k];
        assign.iter().for_each(|&a| counts[a] += 1);
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let mut far = None;
        let mut far_d = -1.0;
        for (i, p) in points.iter().enumerate() {
            if counts[assign[i]] < 2 {
                continue;
            }
            let d = sq_dist(p, &centroids[assign[i]]);
            if d > far_d {
                far_d = d;
                far = Some(i);
            }
        }
        let Some(i) = far else { return };
        assign[i] = empty;
        centroids[empty] = points[i].clone();
    }
}

/// Lloyd iterations from the given centroids.
pub fn lloyd(points: &[Vec<f64>], mut centroids: Vec<Vec<f64>>) -> Partition {
    let k = centroids.len();
    let mut assign: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();
    repair_empty(points, &mut assign, &mut centroids);
    for _ in 0..MAX_ITERATIONS {
        centroids = means(points, &assign, k);
        let mut next: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();
        repair_empty(points, &mut next, &mut centroids);
        if next == assign {
            break;
        }
        assign = next;
    }
    centroids = means(points, &assign, k);
    let wcss = points
        .iter()
        .zip(&assign)
        .map(|(p, &a)| sq_dist(p, &centroids[a]))
        .sum();
    Partition {
        assign,
        centroids,
        wcss,
    }
}

/// k-means++ initial centroids.
pub fn seed_centroids(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centroids = vec![points[rng.gen_range(0..points.len())].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.gen::<f64>() * total;
            let mut idx = points.len() - 1;
            for (i, d) in d2.iter().enumerate() {
                if *d > 0.0 && r < *d {
                    idx = i;
                    break;
                }
                r -= d;
            }
            idx
        } else {
            rng.gen_range(0..points.len())
        };
        let c = points[pick].clone();
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Adds centroids one at a time at the point farthest from the current ones.
pub fn grow_centroids(
    points: &[Vec<f64>],
    mut centroids: Vec<Vec<f64>>,
    k: usize,
) -> Vec<Vec<f64>> {
    while centroids.len() < k {
        let mut far = 0;
        let mut far_d = -1.0;
        for (i, p) in points.iter().enumerate() {
            let d = centroids
                .iter()
                .map(|c| sq_dist(p, c))
                .fold(f64::INFINITY, f64::min);
            if d > far_d {
                far_d = d;
                far = i;
            }
        }
        centroids.push(points[far].clone());
    }
    centroids
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Best of `cfg.restarts` seeded runs.
pub fn best_partition(points: &[Vec<f64>], k: usize, cfg: &ClusterConfig) -> Partition {
    let runs: Vec<Partition> = (0..cfg.restarts as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_for(cfg.seed, r);
            lloyd(points, seed_centroids(points, k, &mut rng))
        })
        .collect();
    let mut best = 0;
    for (i, p) in runs.iter().enumerate() {
        if p.wcss < runs[best].wcss {
            best = i;
        }
    }
    runs.into_iter().nth(best).unwrap()
}

/// Clusters listed by first member; members keep input order.
pub fn to_clustering(names: &[Symbol], part: &Partition) -> Clustering {
    let mut order: Vec<usize> = Vec::new();
    for &a in &part.assign {
        if !order.contains(&a) {
            order.push(a);
        }
    }
    let clusters = order
        .into_iter()
        .map(|a| Cluster {
            members: names
                .iter()
                .zip(&part.assign)
                .filter(|(_, &x)| x == a)
                .map(|(n, _)| n.clone())
                .collect(),
            centroid: part.centroids[a].clone(),
        })
        .collect();
    Clustering { clusters }
}

pub fn kmeans(
    items: &[(Symbol, Vec<f64>)],
    n: usize,
    cfg: &ClusterConfig,
) -> Result<Clustering, ClusterError> {
    if n == 0 || items.is_empty() {
        return Err(ClusterError::Empty);
    }
    if n > items.len() {
        return Err(ClusterError::TooFewObjects {
            wanted: n,
            available: items.len(),
        });
    }
    let names: Vec<Symbol> = items.iter().map(|(n, _)| n.clone()).collect();
    let points: Vec<Vec<f64>> = items.iter().map(|(_, v)| v.clone()).collect();
    Ok(to_clustering(&names, &best_partition(&points, n, cfg)))
}

/// Pairs co-clustered in at least the threshold fraction of the voting runs,
/// closed under connectivity. Components of size one are included, so the
/// result is still a partition; they carry no reliable pattern.
pub fn reliable_clusters(
    items: &[(Symbol, Vec<f64>)],
    n: usize,
    cfg: &ClusterConfig,
) -> Result<Clustering, ClusterError> {
    if items.is_empty() {
        return Ok(Clustering {
            clusters: Vec::new(),
        });
    }
    let runs: Vec<Clustering> = (1..=cfg.voting_runs as u64)
        .into_par_iter()
        .map(|i| kmeans(items, n, &cfg.with_seed(cfg.seed.wrapping_add(i))))
        .collect::<Result<_, _>>()?;
    let m = items.len();
    let index: std::collections::HashMap<&Symbol, usize> =
        items.iter().enumerate().map(|(i, (n, _))| (n, i)).collect();
    let mut together = vec![0u32; m * m];
    for run in &runs {
        for c in &run.clusters {
            let ids: Vec<usize> = c.members.iter().map(|s| index[s]).collect();
            for &a in &ids {
                for &b in &ids {
                    together[a * m + b] += 1;
                }
            }
        }
    }
    let needed = (cfg.co_cluster_threshold * runs.len() as f64 - 1e-9).ceil() as u32;
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut x = x;
        while p[x] != r {
            let nx = p[x];
            p[x] = r;
            x = nx;
        }
        r
    }
    for a in 0..m {
        for b in a + 1..m {
            if together[a * m + b] >= needed {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let roots: Vec<usize> = (0..m).map(|i| find(&mut parent, i)).collect();
    let part_means = {
        let points: Vec<Vec<f64>> = items.iter().map(|(_, v)| v.clone()).collect();
        means(&points, &roots, m)
    };
    let names: Vec<Symbol> = items.iter().map(|(n, _)| n.clone()).collect();
    let part = Partition {
        assign: roots,
        centroids: part_means,
        wcss: 0.0,
    };
    Ok(to_clustering(&names, &part))
}
