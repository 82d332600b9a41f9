//! Fingerprint comparison and pilot classification.
//!
//! Six feature comparisons are computed between an unknown fingerprint `u`
//! and a pilot fingerprint `p`, each summed over the recorded generations,
//! and combined with a weight vector. Wherever a ratio of cluster counts
//! appears, two empty generations count as a perfect match (1) and one
//! empty generation as no match (0).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fingerprint::{euclidean, Fingerprint, GenerationSnapshot};
use crate::knowledge_base::KnowledgeBase;

/// Weights of the six comparisons in the total score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights(pub [f64; 6]);

impl Weights {
    /// Only the fitness-level similarity counts positively.
    pub const PAPER: Weights = Weights([-1.0, -1.0, 1.0, -1.0, -1.0, -1.0]);
    /// Differences count negatively, similarities positively.
    pub const SIMILARITY: Weights = Weights([-1.0, -1.0, 1.0, 1.0, 1.0, 1.0]);

    pub fn scaled(&self, factor: f64) -> Self {
        Weights(self.0.map(|w| w * factor))
    }
}

impl Default for Weights {
    fn default() -> Self {
        Self::PAPER
    }
}

impl fmt::Display for Weights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|w| w.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for Weights {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "paper" => return Ok(Self::PAPER),
            "similarity" => return Ok(Self::SIMILARITY),
            _ => {}
        }
        let values = s
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidConfig(format!("weights `{s}`: {e}")))?;
        let arr: [f64; 6] = values
            .try_into()
            .map_err(|v: Vec<f64>| Error::InvalidConfig(format!("expected 6 weights, got {}", v.len())))?;
        if arr.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidConfig(format!("weights `{s}` must be finite")));
        }
        Ok(Weights(arr))
    }
}

/// `min/max` of two counts with the empty-generation conventions.
pub fn count_ratio(a: usize, b: usize) -> f64 {
    match (a, b) {
        (0, 0) => 1.0,
        (0, _) | (_, 0) => 0.0,
        _ => a.min(b) as f64 / a.max(b) as f64,
    }
}

fn check_comparable(u: &Fingerprint, p: &Fingerprint) -> Result<()> {
    if u.g_c() != p.g_c() || u.snapshots.len() != p.snapshots.len() {
        return Err(Error::Incomparable(format!(
            "G_C {} ({} recorded) vs {} ({} recorded)",
            u.g_c(),
            u.snapshots.len(),
            p.g_c(),
            p.snapshots.len()
        )));
    }
    if u.cluster_params() != p.cluster_params() {
        return Err(Error::Incomparable("cluster parameters differ".into()));
    }
    Ok(())
}

fn sum_generations<F>(u: &Fingerprint, p: &Fingerprint, per_generation: F) -> Result<f64>
where
    F: Fn(&GenerationSnapshot, &GenerationSnapshot) -> f64,
{
    check_comparable(u, p)?;
    Ok(u.snapshots
        .iter()
        .zip(&p.snapshots)
        .map(|(su, sp)| per_generation(su, sp))
        .sum())
}

/// Fitness tolerance for one generation: a fraction of the center fitness
/// range observed across both snapshots.
fn fitness_epsilon(fraction: f64, su: &GenerationSnapshot, sp: &GenerationSnapshot) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for c in su.clusters.iter().chain(&sp.clusters) {
        lo = lo.min(c.center_fitness);
        hi = hi.max(c.center_fitness);
    }
    if hi > lo {
        fraction * (hi - lo)
    } else {
        0.0
    }
}

/// Greedy one-to-one assignment over `(cost, left, right)` candidates,
/// cheapest first. Returns the accepted candidates.
fn greedy_match(mut candidates: Vec<(f64, usize, usize)>, left: usize, right: usize) -> Vec<(f64, usize, usize)> {
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut left_used = vec![false; left];
    let mut right_used = vec![false; right];
    candidates
        .into_iter()
        .filter(|&(_, l, r)| {
            if left_used[l] || right_used[r] {
                false
            } else {
                left_used[l] = true;
                right_used[r] = true;
                true
            }
        })
        .collect()
}

/// Cluster count difference weighted by the count ratio.
pub fn psi1_cluster_count_diff(u: &Fingerprint, p: &Fingerprint) -> Result<f64> {
    sum_generations(u, p, |su, sp| {
        let (ku, kp) = (su.cluster_count(), sp.cluster_count());
        ku.abs_diff(kp) as f64 * count_ratio(ku, kp)
    })
}

/// Sum of matched center distances, matching only below `r_max`.
pub fn psi2_center_distance(u: &Fingerprint, p: &Fingerprint) -> Result<f64> {
    let r_max = u.cluster_params().r_max();
    sum_generations(u, p, |su, sp| {
        let mut candidates = Vec::new();
        for (i, cu) in su.centers().enumerate() {
            for (j, cp) in sp.centers().enumerate() {
                let d = euclidean(cu, cp);
                if d < r_max {
                    candidates.push((d, i, j));
                }
            }
        }
        greedy_match(candidates, su.cluster_count(), sp.cluster_count())
            .iter()
            .map(|m| m.0)
            .sum()
    })
}

fn fitness_level_similarity(su: &GenerationSnapshot, sp: &GenerationSnapshot, fraction: f64) -> f64 {
    let fu = su.center_fitnesses();
    let fp = sp.center_fitnesses();
    // the least fit center of the unknown anchors the bins
    let Some(f0) = fu.iter().copied().reduce(f64::max) else {
        return 0.0;
    };
    let eps = fitness_epsilon(fraction, su, sp);
    let lowest = fu.iter().chain(&fp).copied().fold(f64::INFINITY, f64::min);
    let in_bin = |set: &[f64], level: f64| set.iter().filter(|f| (*f - level).abs() <= eps).count();
    let mut sum = 0.0;
    let mut k = 0u32;
    loop {
        let level = f0 - f64::from(k) * eps;
        let (nu, np) = (in_bin(&fu, level), in_bin(&fp, level));
        if nu + np > 0 {
            sum += count_ratio(nu, np);
        }
        if eps == 0.0 || level - eps <= lowest {
            break;
        }
        k += 1;
    }
    sum * count_ratio(su.cluster_count(), sp.cluster_count())
}

/// Agreement of center fitness levels, binned below the unknown's least fit
/// center.
pub fn psi3_fitness_level_similarity(u: &Fingerprint, p: &Fingerprint) -> Result<f64> {
    let fraction = u.cluster_params().epsilon_fraction;
    sum_generations(u, p, |su, sp| fitness_level_similarity(su, sp, fraction))
}

/// Size agreement of matched equidistant groups.
pub fn psi4_equidistant_similarity(u: &Fingerprint, p: &Fingerprint) -> Result<f64> {
    let eps = u.cluster_params().epsilon();
    sum_generations(u, p, |su, sp| {
        let gu = &su.equidistant_groups;
        let gp = &sp.equidistant_groups;
        let mut candidates = Vec::new();
        for (a, ga) in gu.iter().enumerate() {
            for (b, gb) in gp.iter().enumerate() {
                let gap = (ga.distance - gb.distance).abs();
                if gap <= eps {
                    candidates.push((gap, a, b));
                }
            }
        }
        greedy_match(candidates, gu.len(), gp.len())
            .iter()
            .map(|&(_, a, b)| count_ratio(gu[a].len(), gp[b].len()))
            .sum()
    })
}

/// Number of agreeing trend entries between tracks of fitness-similar
/// clusters, evaluated once at the last recorded generation.
pub fn psi5_trend_similarity(u: &Fingerprint, p: &Fingerprint) -> Result<f64> {
    check_comparable(u, p)?;
    let (Some(su), Some(sp)) = (u.snapshots.last(), p.snapshots.last()) else {
        return Ok(0.0);
    };
    let eps = fitness_epsilon(u.cluster_params().epsilon_fraction, su, sp);
    let mut total = 0usize;
    for (i, cu) in su.clusters.iter().enumerate() {
        for (j, cp) in sp.clusters.iter().enumerate() {
            if (cu.center_fitness - cp.center_fitness).abs() > eps {
                continue;
            }
            let (Some(tu), Some(tp)) = (u.track_of(su.g, i), p.track_of(sp.g, j)) else {
                continue;
            };
            total += tu
                .trends
                .iter()
                .rev()
                .zip(tp.trends.iter().rev())
                .filter(|(a, b)| a == b)
                .count();
        }
    }
    Ok(total as f64)
}

/// Sum of per-generation cluster count ratios.
pub fn psi6_count_ratio(u: &Fingerprint, p: &Fingerprint) -> Result<f64> {
    sum_generations(u, p, |su, sp| count_ratio(su.cluster_count(), sp.cluster_count()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonScore {
    pub psi: [f64; 6],
    pub weights: Weights,
    pub total: f64,
}

impl ComparisonScore {
    pub fn from_psi(psi: [f64; 6], weights: Weights) -> Self {
        let total = psi.iter().zip(weights.0).map(|(p, w)| p * w).sum();
        Self { psi, weights, total }
    }
}

/// All six comparisons and their weighted total.
pub fn total_score(u: &Fingerprint, p: &Fingerprint, weights: Weights) -> Result<ComparisonScore> {
    let psi = [
        psi1_cluster_count_diff(u, p)?,
        psi2_center_distance(u, p)?,
        psi3_fitness_level_similarity(u, p)?,
        psi4_equidistant_similarity(u, p)?,
        psi5_trend_similarity(u, p)?,
        psi6_count_ratio(u, p)?,
    ];
    Ok(ComparisonScore::from_psi(psi, weights))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub winner: String,
    pub vote_fractions: BTreeMap<String, f64>,
    pub per_pilot_mean_totals: BTreeMap<String, f64>,
    pub weights_used: Weights,
    /// One score per stored pilot fingerprint.
    #[serde(skip)]
    pub per_pilot: BTreeMap<String, Vec<ComparisonScore>>,
}

impl ClassificationReport {
    /// Builds the report from already computed per-pilot scores. Panics if
    /// `per_pilot` is empty.
    pub fn from_scores(per_pilot: BTreeMap<String, Vec<ComparisonScore>>, weights: Weights) -> Self {
        let per_pilot_mean_totals: BTreeMap<String, f64> = per_pilot
            .iter()
            .map(|(id, s)| (id.clone(), s.iter().map(|c| c.total).sum::<f64>() / s.len() as f64))
            .collect();
        let winner = argmax(per_pilot_mean_totals.iter().map(|(k, v)| (k, *v)))
            .expect("at least one pilot")
            .clone();

        let rounds = per_pilot.values().map(Vec::len).max().unwrap_or(0);
        let mut votes: BTreeMap<String, usize> = per_pilot.keys().map(|k| (k.clone(), 0)).collect();
        for i in 0..rounds {
            let round = per_pilot
                .iter()
                .filter_map(|(k, s)| s.get(i).map(|c| (k, c.total)));
            if let Some(k) = argmax(round) {
                *votes.get_mut(k).expect("voter is a pilot") += 1;
            }
        }
        let vote_fractions = votes
            .into_iter()
            .map(|(k, v)| (k, v as f64 / rounds as f64))
            .collect();

        Self {
            winner,
            vote_fractions,
            per_pilot_mean_totals,
            weights_used: weights,
            per_pilot,
        }
    }

    /// The same comparison under different weights, without recomputing
    /// the properties.
    pub fn reweighted(&self, weights: Weights) -> Self {
        let per_pilot = self
            .per_pilot
            .iter()
            .map(|(k, s)| (k.clone(), s.iter().map(|c| ComparisonScore::from_psi(c.psi, weights)).collect()))
            .collect();
        Self::from_scores(per_pilot, weights)
    }
}

/// Picks the key with the largest value; ties go to the smallest key.
fn argmax<'a>(values: impl IntoIterator<Item = (&'a String, f64)>) -> Option<&'a String> {
    let mut best: Option<(&String, f64)> = None;
    for (k, v) in values {
        // keys arrive sorted, so `>` keeps the lexicographically first on ties
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((k, v));
        }
    }
    best.map(|(k, _)| k)
}

/// Scores `u` against every stored fingerprint of every pilot.
///
/// The winner is the pilot with the highest mean total. Votes are cast per
/// stored-fingerprint index: at index `i` the pilot whose `i`-th fingerprint
/// scores highest gets the vote.
pub fn classify(u: &Fingerprint, kb: &KnowledgeBase, weights: Weights) -> Result<ClassificationReport> {
    if kb.pilots.is_empty() {
        return Err(Error::EmptyKnowledgeBase);
    }
    let mut per_pilot = BTreeMap::new();
    for pilot in &kb.pilots {
        if pilot.fingerprints.is_empty() {
            return Err(Error::IncompatiblePilot(format!("pilot `{}` has no fingerprints", pilot.pilot_id)));
        }
        let scores = pilot
            .fingerprints
            .iter()
            .map(|f| total_score(u, f, weights))
            .collect::<Result<Vec<_>>>()?;
        per_pilot.insert(pilot.pilot_id.clone(), scores);
    }
    Ok(ClassificationReport::from_scores(per_pilot, weights))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_ratio_conventions() {
        assert_eq!(count_ratio(0, 0), 1.0);
        assert_eq!(count_ratio(3, 0), 0.0);
        assert_eq!(count_ratio(0, 3), 0.0);
        assert_eq!(count_ratio(2, 4), 0.5);
    }

    #[test]
    fn weights_parse() {
        assert_eq!("paper".parse::<Weights>().unwrap(), Weights::PAPER);
        assert_eq!("similarity".parse::<Weights>().unwrap(), Weights::SIMILARITY);
        assert_eq!(
            "-1,-1,1,-1,-1,-1".parse::<Weights>().unwrap(),
            Weights::PAPER
        );
        assert_eq!(
            Weights::SIMILARITY.to_string().parse::<Weights>().unwrap(),
            Weights::SIMILARITY
        );
        assert!("1,2,3".parse::<Weights>().is_err());
        assert!("1,2,3,4,5,x".parse::<Weights>().is_err());
        assert!("1,2,3,4,5,inf".parse::<Weights>().is_err());
    }

    #[test]
    fn total_is_dot_product() {
        let s = ComparisonScore::from_psi([1.0, 2.0, 3.0, 4.0, 5.0, 6.0], Weights::PAPER);
        assert_eq!(s.total, -15.0);
        let s = ComparisonScore::from_psi([1.0, 2.0, 3.0, 4.0, 5.0, 6.0], Weights([0.0; 6]));
        assert_eq!(s.total, 0.0);
    }
}
