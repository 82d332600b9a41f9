//! EA fingerprints: per-generation cluster structure of a population.
//!
//! Each generation the population is clustered with a greedy, fitness-sorted
//! radius rule. The fingerprint keeps the clusters (emergence
//! characteristics), the pairwise geometry of their centers (constellation
//! characteristics) and cross-generation tracks of cluster sizes.
//!
//! All geometry lives in normalized coordinates: every axis of the search
//! domain is mapped onto `[0, 1]`, so fingerprints taken on functions with
//! different domains can be compared directly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::{GaParams, Population};
use crate::objective::SearchDomain;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    /// Minimum cluster size as a fraction of the population size.
    pub c_min_fraction: f64,
    /// Maximum cluster radius as a fraction of the unit axis.
    pub r_max_fraction: f64,
    /// Tolerance for equidistant grouping (normalized distance) and for
    /// fitness-level comparison (fraction of the observed fitness range).
    pub epsilon_fraction: f64,
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self {
            c_min_fraction: 0.05,
            r_max_fraction: 0.05,
            epsilon_fraction: 0.05,
        }
    }
}

impl ClusterParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c_min_fraction", self.c_min_fraction),
            ("r_max_fraction", self.r_max_fraction),
            ("epsilon_fraction", self.epsilon_fraction),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidClusterParams(format!("{name} = {v} is not in (0, 1)")));
            }
        }
        Ok(())
    }

    /// Absolute minimum cluster size for a population of `n`.
    pub fn c_min(&self, n: usize) -> usize {
        // 0.05 * 60 is 3.0000000000000004 in binary floating point
        let raw = self.c_min_fraction * n as f64;
        ((raw - 1e-9).ceil() as usize).max(1)
    }

    pub fn r_max(&self) -> f64 {
        self.r_max_fraction
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon_fraction
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    /// Normalized position of the fittest member.
    pub center: Vec<f64>,
    pub center_fitness: f64,
    pub member_count: usize,
    /// Indices into the generation's population; the center comes first.
    pub member_indices: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CenterPair {
    pub i: usize,
    pub j: usize,
    pub distance: f64,
}

/// Center pairs whose distances agree within the tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquidistantGroup {
    /// Distance of the seed pair (the shortest in the group).
    pub distance: f64,
    pub pairs: Vec<(usize, usize)>,
}

impl EquidistantGroup {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationSnapshot {
    pub g: usize,
    pub population_size: usize,
    pub clusters: Vec<Cluster>,
    /// Upper triangle (`i < j`) of the center distance matrix.
    pub pairwise_distances: Vec<CenterPair>,
    pub equidistant_groups: Vec<EquidistantGroup>,
}

impl GenerationSnapshot {
    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }

    pub fn centers(&self) -> impl Iterator<Item = &[f64]> {
        self.clusters.iter().map(|c| c.center.as_slice())
    }

    pub fn center_fitnesses(&self) -> Vec<f64> {
        self.clusters.iter().map(|c| c.center_fitness).collect()
    }

    /// Full symmetric distance matrix with a zero diagonal.
    pub fn distance_matrix(&self) -> Vec<Vec<f64>> {
        let k = self.clusters.len();
        let mut m = vec![vec![0.0; k]; k];
        for p in &self.pairwise_distances {
            m[p.i][p.j] = p.distance;
            m[p.j][p.i] = p.distance;
        }
        m
    }
}

/// One cluster followed across consecutive generations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterTrack {
    pub id: usize,
    pub first_generation: usize,
    /// Member count per generation.
    pub counts: Vec<usize>,
    /// Sign of each successive count change.
    pub trends: Vec<i8>,
    /// Cluster index in each generation's snapshot.
    pub cluster_indices: Vec<usize>,
}

impl ClusterTrack {
    fn open(id: usize, g: usize, cluster_index: usize, count: usize) -> Self {
        Self {
            id,
            first_generation: g,
            counts: vec![count],
            trends: Vec::new(),
            cluster_indices: vec![cluster_index],
        }
    }

    pub fn last_generation(&self) -> usize {
        self.first_generation + self.counts.len() - 1
    }

    pub fn last_cluster(&self) -> usize {
        *self.cluster_indices.last().expect("tracks are never empty")
    }

    fn extend(&mut self, cluster_index: usize, count: usize) {
        let prev = *self.counts.last().expect("tracks are never empty");
        self.trends.push(trend_sign(prev, count));
        self.counts.push(count);
        self.cluster_indices.push(cluster_index);
    }
}

fn trend_sign(prev: usize, next: usize) -> i8 {
    match next.cmp(&prev) {
        std::cmp::Ordering::Greater => 1,
        std::cmp::Ordering::Equal => 0,
        std::cmp::Ordering::Less => -1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FingerprintParams {
    pub cluster: ClusterParams,
    pub ga: GaParams,
    /// Number of generations recorded.
    pub g_c: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub function_id: String,
    pub params: FingerprintParams,
    pub snapshots: Vec<GenerationSnapshot>,
    pub tracks: Vec<ClusterTrack>,
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Maps `point` onto the unit hypercube of `domain`.
pub fn normalize(point: &[f64], domain: &SearchDomain) -> Result<Vec<f64>> {
    domain.check(point)?;
    Ok(point
        .iter()
        .enumerate()
        .map(|(i, x)| (x - domain.lower()[i]) / domain.width(i))
        .collect())
}

/// Greedy fitness-sorted clustering.
///
/// Individuals are visited fittest first. Each unassigned individual
/// becomes a candidate center and absorbs every unassigned individual
/// strictly closer than `r_max`. The candidate group becomes a cluster when
/// it holds at least `c_min` individuals; either way all of them are
/// removed from further consideration.
pub fn detect_clusters(pop: &Population, domain: &SearchDomain, params: &ClusterParams) -> Result<Vec<Cluster>> {
    let positions = pop
        .members
        .iter()
        .map(|m| normalize(&m.genome, domain))
        .collect::<Result<Vec<_>>>()?;
    let c_min = params.c_min(pop.len());
    let r_max = params.r_max();
    let order = pop.ranking();
    let mut taken = vec![false; pop.len()];
    let mut clusters = Vec::new();
    for &center in &order {
        if taken[center] {
            continue;
        }
        taken[center] = true;
        let mut members = vec![center];
        for &other in &order {
            if !taken[other] && euclidean(&positions[center], &positions[other]) < r_max {
                taken[other] = true;
                members.push(other);
            }
        }
        if members.len() >= c_min {
            clusters.push(Cluster {
                center: positions[center].clone(),
                center_fitness: pop.members[center].fitness,
                member_count: members.len(),
                member_indices: members,
            });
        }
    }
    Ok(clusters)
}

/// Center distances and equidistant groups.
///
/// Pairs are visited by ascending distance; the shortest unassigned pair
/// seeds a group that takes every unassigned pair whose distance is within
/// `epsilon` of the seed.
pub fn compute_ccc(clusters: &[Cluster], epsilon: f64) -> (Vec<CenterPair>, Vec<EquidistantGroup>) {
    let mut pairs = Vec::new();
    for i in 0..clusters.len() {
        for j in i + 1..clusters.len() {
            pairs.push(CenterPair {
                i,
                j,
                distance: euclidean(&clusters[i].center, &clusters[j].center),
            });
        }
    }
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&a, &b| pairs[a].distance.total_cmp(&pairs[b].distance).then(a.cmp(&b)));
    let mut groups: Vec<EquidistantGroup> = Vec::new();
    let mut pos = 0;
    while pos < order.len() {
        let seed = pairs[order[pos]].distance;
        let mut group = EquidistantGroup {
            distance: seed,
            pairs: Vec::new(),
        };
        // sorted, so the group is a contiguous run
        while pos < order.len() && pairs[order[pos]].distance - seed < epsilon {
            let p = &pairs[order[pos]];
            group.pairs.push((p.i, p.j));
            pos += 1;
        }
        groups.push(group);
    }
    (pairs, groups)
}

/// Extends tracks with the clusters of `current`.
///
/// Tracks still open (present in `previous`) are matched to the new
/// clusters nearest-first, one-to-one, within `r_max`. Unmatched clusters
/// start new tracks; unmatched tracks stay closed from now on.
pub fn track_clusters(
    tracks: &mut Vec<ClusterTrack>,
    previous: Option<&GenerationSnapshot>,
    current: &GenerationSnapshot,
    params: &ClusterParams,
) {
    let mut candidates = Vec::new();
    if let Some(prev) = previous {
        for (t, track) in tracks.iter().enumerate() {
            if track.last_generation() != prev.g {
                continue;
            }
            let last = &prev.clusters[track.last_cluster()].center;
            for (c, cluster) in current.clusters.iter().enumerate() {
                let d = euclidean(last, &cluster.center);
                if d < params.r_max() {
                    candidates.push((d, t, c));
                }
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut track_used = vec![false; tracks.len()];
    let mut cluster_used = vec![false; current.clusters.len()];
    for (_, t, c) in candidates {
        if track_used[t] || cluster_used[c] {
            continue;
        }
        track_used[t] = true;
        cluster_used[c] = true;
        tracks[t].extend(c, current.clusters[c].member_count);
    }
    for (c, cluster) in current.clusters.iter().enumerate() {
        if !cluster_used[c] {
            let id = tracks.len();
            tracks.push(ClusterTrack::open(id, current.g, c, cluster.member_count));
        }
    }
}

impl Fingerprint {
    pub fn new(function_id: impl Into<String>, cluster: ClusterParams, ga: GaParams, g_c: usize) -> Result<Self> {
        cluster.validate()?;
        if g_c == 0 {
            return Err(Error::InvalidConfig("G_C must be positive".into()));
        }
        Ok(Self {
            function_id: function_id.into(),
            params: FingerprintParams { cluster, ga, g_c },
            snapshots: Vec::with_capacity(g_c),
            tracks: Vec::new(),
        })
    }

    pub fn g_c(&self) -> usize {
        self.params.g_c
    }

    pub fn cluster_params(&self) -> &ClusterParams {
        &self.params.cluster
    }

    pub fn is_complete(&self) -> bool {
        self.snapshots.len() == self.params.g_c
    }

    /// Clusters `pop` and appends the snapshot as generation
    /// `snapshots.len() + 1`.
    pub fn record_generation(&mut self, pop: &Population, domain: &SearchDomain) -> Result<()> {
        if self.is_complete() {
            return Err(Error::FingerprintComplete(self.snapshots.len()));
        }
        let params = self.params.cluster;
        let clusters = detect_clusters(pop, domain, &params)?;
        let (pairwise_distances, equidistant_groups) = compute_ccc(&clusters, params.epsilon());
        let snapshot = GenerationSnapshot {
            g: self.snapshots.len() + 1,
            population_size: pop.len(),
            clusters,
            pairwise_distances,
            equidistant_groups,
        };
        track_clusters(&mut self.tracks, self.snapshots.last(), &snapshot, &params);
        self.snapshots.push(snapshot);
        Ok(())
    }

    /// The track that owns cluster `cluster_index` of generation `g`.
    pub fn track_of(&self, g: usize, cluster_index: usize) -> Option<&ClusterTrack> {
        self.tracks.iter().find(|t| {
            g >= t.first_generation
                && g <= t.last_generation()
                && t.cluster_indices[g - t.first_generation] == cluster_index
        })
    }

    /// Checks every structural invariant; used when loading from disk.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidFingerprint(format!("`{}`: {msg}", self.function_id)));
        self.params.cluster.validate()?;
        if self.snapshots.len() != self.params.g_c {
            return bad(format!(
                "{} snapshots recorded, G_C = {}",
                self.snapshots.len(),
                self.params.g_c
            ));
        }
        for (k, snap) in self.snapshots.iter().enumerate() {
            if snap.g != k + 1 {
                return bad(format!("snapshot {k} has generation {}", snap.g));
            }
            let c_min = self.params.cluster.c_min(snap.population_size);
            for c in &snap.clusters {
                if c.member_count < c_min || c.member_indices.len() != c.member_count {
                    return bad(format!("generation {}: malformed cluster size", snap.g));
                }
                if c.center.iter().any(|x| !(0.0..=1.0).contains(x)) {
                    return bad(format!("generation {}: center outside the unit cube", snap.g));
                }
            }
            let k = snap.clusters.len();
            if snap.pairwise_distances.len() != k * k.saturating_sub(1) / 2 {
                return bad(format!("generation {}: wrong number of center distances", snap.g));
            }
            let grouped: usize = snap.equidistant_groups.iter().map(EquidistantGroup::len).sum();
            if grouped != snap.pairwise_distances.len()
                || snap.equidistant_groups.iter().any(EquidistantGroup::is_empty)
            {
                return bad(format!("generation {}: equidistant groups do not partition the pairs", snap.g));
            }
            for &(i, j) in snap.equidistant_groups.iter().flat_map(|g| &g.pairs) {
                if i >= j || j >= k {
                    return bad(format!("generation {}: invalid pair ({i}, {j})", snap.g));
                }
            }
        }
        for t in &self.tracks {
            if t.counts.is_empty()
                || t.trends.len() + 1 != t.counts.len()
                || t.cluster_indices.len() != t.counts.len()
                || t.first_generation == 0
                || t.last_generation() > self.snapshots.len()
            {
                return bad(format!("track {} is malformed", t.id));
            }
            for (k, w) in t.counts.windows(2).enumerate() {
                if t.trends[k] != trend_sign(w[0], w[1]) {
                    return bad(format!("track {}: trend {k} does not match its counts", t.id));
                }
            }
            for (k, (&ci, &count)) in t.cluster_indices.iter().zip(&t.counts).enumerate() {
                let snap = &self.snapshots[t.first_generation - 1 + k];
                match snap.clusters.get(ci) {
                    Some(c) if c.member_count == count => {}
                    _ => return bad(format!("track {}: dangling cluster reference", t.id)),
                }
            }
        }
        Ok(())
    }
}
