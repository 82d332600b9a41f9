//! Pilot functions, their reference fingerprints and strategies, stored as
//! a single JSON document.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fingerprint::{ClusterParams, Fingerprint};
use crate::ga::{GaParams, GaRun, Strategy};
use crate::objective::ObjectiveFunction;
use crate::seed::derive_seed;

pub const KB_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PilotRecord {
    pub pilot_id: String,
    pub fingerprints: Vec<Fingerprint>,
    pub strategy: Strategy,
    #[serde(default)]
    pub provenance: String,
}

impl PilotRecord {
    pub fn g_c(&self) -> Option<usize> {
        self.fingerprints.first().map(Fingerprint::g_c)
    }

    fn validate(&self, cluster_params: &ClusterParams) -> Result<()> {
        let incompatible = |msg: String| Err(Error::IncompatiblePilot(format!("`{}`: {msg}", self.pilot_id)));
        let Some(g_c) = self.g_c() else {
            return incompatible("no fingerprints".into());
        };
        for fp in &self.fingerprints {
            if fp.g_c() != g_c {
                return incompatible(format!("mixed G_C ({} and {})", g_c, fp.g_c()));
            }
            if fp.cluster_params() != cluster_params {
                return incompatible("fingerprint cluster parameters differ from the knowledge base".into());
            }
            fp.validate()?;
        }
        self.strategy.validate()
    }
}

/// Runs `g_c` generations under `s0` and records one fingerprint.
pub fn record_fingerprint(
    function: &ObjectiveFunction,
    s0: &GaParams,
    g_c: usize,
    cluster_params: &ClusterParams,
    seed: u64,
) -> Result<Fingerprint> {
    let mut fp = Fingerprint::new(function.id.clone(), *cluster_params, *s0, g_c)?;
    let mut run = GaRun::new(function, *s0, seed)?;
    while !fp.is_complete() {
        run.step();
        fp.record_generation(run.population(), &function.domain)?;
    }
    Ok(fp)
}

/// Records `count` fingerprints of `function` from independent seeds
/// derived from `seed`.
pub fn build_pilot(
    function: &ObjectiveFunction,
    s0: &GaParams,
    strategy: Strategy,
    count: usize,
    g_c: usize,
    cluster_params: &ClusterParams,
    seed: u64,
) -> Result<PilotRecord> {
    if count == 0 {
        return Err(Error::InvalidConfig("pilot fingerprint count must be at least 1".into()));
    }
    strategy.validate()?;
    let fingerprints = (0..count as u64)
        .map(|i| record_fingerprint(function, s0, g_c, cluster_params, derive_seed(seed, i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PilotRecord {
        pilot_id: function.id.clone(),
        fingerprints,
        strategy,
        provenance: format!("{count} fingerprints, G_C = {g_c}, seed {seed}"),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeBase {
    #[serde(rename = "kiea_kb_version")]
    pub version: u32,
    pub cluster_params: ClusterParams,
    pub pilots: Vec<PilotRecord>,
}

impl KnowledgeBase {
    pub fn new(cluster_params: ClusterParams) -> Self {
        Self {
            version: KB_VERSION,
            cluster_params,
            pilots: Vec::new(),
        }
    }

    /// Shared G_C of all pilots, `None` while empty.
    pub fn g_c(&self) -> Option<usize> {
        self.pilots.first().and_then(PilotRecord::g_c)
    }

    pub fn pilot(&self, pilot_id: &str) -> Result<&PilotRecord> {
        self.pilots
            .iter()
            .find(|p| p.pilot_id == pilot_id)
            .ok_or_else(|| Error::UnknownPilot(pilot_id.to_string()))
    }

    pub fn get_strategy(&self, pilot_id: &str) -> Result<&Strategy> {
        Ok(&self.pilot(pilot_id)?.strategy)
    }

    pub fn pilot_ids(&self) -> Vec<&str> {
        self.pilots.iter().map(|p| p.pilot_id.as_str()).collect()
    }

    /// Returns a new knowledge base with `record` appended.
    pub fn add_pilot(&self, record: PilotRecord) -> Result<Self> {
        if self.pilots.iter().any(|p| p.pilot_id == record.pilot_id) {
            return Err(Error::DuplicatePilot(record.pilot_id));
        }
        record.validate(&self.cluster_params)?;
        if let (Some(ours), Some(theirs)) = (self.g_c(), record.g_c()) {
            if ours != theirs {
                return Err(Error::IncompatiblePilot(format!(
                    "`{}` has G_C = {theirs}, knowledge base uses {ours}",
                    record.pilot_id
                )));
            }
        }
        let mut next = self.clone();
        next.pilots.push(record);
        Ok(next)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != KB_VERSION {
            return Err(Error::VersionMismatch {
                found: self.version,
                expected: KB_VERSION,
            });
        }
        self.cluster_params.validate()?;
        let mut seen = BTreeSet::new();
        for p in &self.pilots {
            if !seen.insert(p.pilot_id.as_str()) {
                return Err(Error::DuplicatePilot(p.pilot_id.clone()));
            }
            p.validate(&self.cluster_params)?;
            if p.g_c() != self.g_c() {
                return Err(Error::IncompatiblePilot(format!(
                    "`{}` has G_C = {:?}, knowledge base uses {:?}",
                    p.pilot_id,
                    p.g_c(),
                    self.g_c()
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        // check the version before the full schema so old files fail clearly
        #[derive(Deserialize)]
        struct Header {
            kiea_kb_version: u32,
        }
        let header: Header = serde_json::from_str(text)?;
        if header.kiea_kb_version != KB_VERSION {
            return Err(Error::VersionMismatch {
                found: header.kiea_kb_version,
                expected: KB_VERSION,
            });
        }
        let kb: Self = serde_json::from_str(text)?;
        kb.validate()?;
        Ok(kb)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }
}
