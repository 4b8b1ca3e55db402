//! The recurrent numbering of definitions, theorem clustering and
//! goal-directed similarity queries.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cluster::{
    best_partition, cluster_count, grow_centroids, kmeans, lloyd, norm, reliable_clusters, sq_dist,
    to_clustering, ClusterConfig, Clustering, Partition,
};
use crate::corpus::Corpus;
use crate::error::ClusterError;
use crate::features::{definition_term, feature_table, ValueMap};
use crate::term::Symbol;

/// Above this many definitions a prefix re-clustering is warm-started from
/// the previous centroids instead of running all restarts.
pub const FULL_RESTART_LIMIT: usize = 64;

pub const EPSILON: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    Def,
    Thm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefinitionModel {
    pub values: ValueMap,
    /// Feature vectors in ingestion order.
    pub vectors: Vec<(Symbol, Vec<f64>)>,
    pub clustering: Clustering,
}

/// `[f] = 10 + 2c + d/(1+d)` for every clustered name.
fn assign_values(names: &[Symbol], points: &[Vec<f64>], part: &Partition, values: &mut ValueMap) {
    let k = part.centroids.len();
    let mut by_norm: Vec<usize> = (0..k).collect();
    let norms: Vec<f64> = part.centroids.iter().map(|c| norm(c)).collect();
    by_norm.sort_by(|&a, &b| norms[a].total_cmp(&norms[b]).then(a.cmp(&b)));
    let mut rank = vec![0usize; k];
    for (r, &c) in by_norm.iter().enumerate() {
        rank[c] = r;
    }
    let mut fresh: BTreeMap<Symbol, f64> = BTreeMap::new();
    for ((name, p), &c) in names.iter().zip(points).zip(&part.assign) {
        let d = sq_dist(p, &part.centroids[c]).sqrt();
        fresh.insert(name.clone(), 10.0 + 2.0 * rank[c] as f64 + d / (1.0 + d));
    }
    make_injective(&mut fresh);
    for (n, v) in fresh {
        values.insert(n, v);
    }
}

/// Adds `EPSILON * r` to colliding values, `r` being the lexicographic rank
/// of the name inside its collision group, until all values differ.
fn make_injective(vals: &mut BTreeMap<Symbol, f64>) {
    loop {
        let mut groups: BTreeMap<u64, Vec<Symbol>> = BTreeMap::new();
        for (n, v) in vals.iter() {
            groups.entry(v.to_bits()).or_default().push(n.clone());
        }
        let mut changed = false;
        for names in groups.values().filter(|g| g.len() > 1) {
            for (r, n) in names.iter().enumerate() {
                if r > 0 {
                    *vals.get_mut(n).unwrap() += EPSILON * r as f64;
                    changed = true;
                }
            }
        }
        if !changed {
            return;
        }
    }
}

pub fn recurrent_cluster_definitions(
    corpus: &Corpus,
    cfg: &ClusterConfig,
) -> Result<DefinitionModel, ClusterError> {
    let defs: Vec<_> = corpus.defuns().collect();
    if defs.is_empty() {
        return Err(ClusterError::Empty);
    }
    let mut values = ValueMap::new();
    let mut names: Vec<Symbol> = Vec::with_capacity(defs.len());
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(defs.len());
    let mut last: Option<Partition> = None;
    for (i, ev) in defs.iter().enumerate() {
        let mut rec = vec![ev.name.clone()];
        rec.extend(corpus.recursive_group(&ev.name).iter().cloned());
        let table = feature_table(&definition_term(ev), &values, &rec)?;
        names.push(ev.name.clone());
        points.push(table.flatten());
        let k = cluster_count(points.len(), cfg);
        let is_last = i + 1 == defs.len();
        let part = match last.take() {
            Some(prev) if points.len() > FULL_RESTART_LIMIT && !is_last => {
                lloyd(&points, grow_centroids(&points, prev.centroids, k))
            }
            _ => best_partition(&points, k, cfg),
        };
        assign_values(&names, &points, &part, &mut values);
        last = Some(part);
    }
    let clustering = to_clustering(&names, last.as_ref().unwrap());
    Ok(DefinitionModel {
        values,
        vectors: names.into_iter().zip(points).collect(),
        clustering,
    })
}

pub fn theorem_vectors(
    corpus: &Corpus,
    values: &ValueMap,
) -> Result<Vec<(Symbol, Vec<f64>)>, ClusterError> {
    corpus
        .theorems()
        .map(|ev| {
            Ok((
                ev.name.clone(),
                feature_table(&ev.body, values, &[])?.flatten(),
            ))
        })
        .collect()
}

pub fn cluster_theorems(
    corpus: &Corpus,
    values: &ValueMap,
    cfg: &ClusterConfig,
) -> Result<Clustering, ClusterError> {
    let items = theorem_vectors(corpus, values)?;
    if items.is_empty() {
        return Err(ClusterError::Empty);
    }
    kmeans(&items, cluster_count(items.len(), cfg), cfg)
}

/// Vote-filtered clustering of the definitions or the theorem statements.
pub fn reliable(
    corpus: &Corpus,
    model: &DefinitionModel,
    kind: Kind,
    cfg: &ClusterConfig,
) -> Result<Clustering, ClusterError> {
    let items = match kind {
        Kind::Def => model.vectors.clone(),
        Kind::Thm => theorem_vectors(corpus, &model.values)?,
    };
    if items.is_empty() {
        return Ok(Clustering {
            clusters: Vec::new(),
        });
    }
    reliable_clusters(&items, cluster_count(items.len(), cfg), cfg)
}

/// Members of the reliable cluster of `name`, without `name`, in corpus order.
pub fn similar_to(
    name: &Symbol,
    kind: Kind,
    corpus: &Corpus,
    model: &DefinitionModel,
    cfg: &ClusterConfig,
) -> Result<Vec<Symbol>, ClusterError> {
    let known = match kind {
        Kind::Def => corpus.defun(name).is_some(),
        Kind::Thm => corpus.theorem(name).is_some(),
    };
    if !known {
        return Err(ClusterError::UnknownName(name.clone()));
    }
    let clustering = reliable(corpus, model, kind, cfg)?;
    Ok(clustering
        .cluster_of(name)
        .map(|c| c.members.iter().filter(|m| *m != name).cloned().collect())
        .unwrap_or_default())
}
