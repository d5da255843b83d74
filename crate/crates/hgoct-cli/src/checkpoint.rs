//! JSON checkpoints: the resolved run configuration (hashed), the accepted
//! field spectrum as base64 little-endian doubles, the mixing parameter,
//! and the full iteration history. Round-trips are lossless, so a resumed
//! run reproduces an uninterrupted one bit for bit.

use anyhow::{bail, Context, Result};
use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use hgoct::functional::JBreakdown;
use hgoct::optimizer::{IterationRecord, OptimizationState};
use hgoct::spectral::Spectrum;

use crate::config::RunConfig;
use crate::output::write_atomic;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub config_hash: String,
    pub config: RunConfig,
    pub next_iteration: usize,
    pub k: f64,
    /// Base64 of the spectrum bins as little-endian f64.
    pub field_spectrum: String,
    pub history: Vec<HistoryRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistoryRecord {
    pub index: usize,
    pub j_max: f64,
    pub j_penal: f64,
    pub j_forb: f64,
    pub j_bound: f64,
    pub j_total: f64,
    pub k_used: f64,
    pub metric: f64,
    pub backtracks: usize,
}

impl From<&IterationRecord<f64>> for HistoryRecord {
    fn from(r: &IterationRecord<f64>) -> Self {
        Self {
            index: r.index,
            j_max: r.j.j_max,
            j_penal: r.j.j_penal,
            j_forb: r.j.j_forb,
            j_bound: r.j.j_bound,
            j_total: r.j.j_total,
            k_used: r.k_used,
            metric: r.metric,
            backtracks: r.backtracks,
        }
    }
}

impl From<&HistoryRecord> for IterationRecord<f64> {
    fn from(r: &HistoryRecord) -> Self {
        Self {
            index: r.index,
            j: JBreakdown {
                j_max: r.j_max,
                j_penal: r.j_penal,
                j_forb: r.j_forb,
                j_bound: r.j_bound,
                j_total: r.j_total,
            },
            k_used: r.k_used,
            metric: r.metric,
            backtracks: r.backtracks,
        }
    }
}

pub fn config_hash(config: &RunConfig) -> String {
    let canonical = serde_json::to_string(config).expect("config serializes");
    let mut h = Sha256::new();
    h.update(canonical.as_bytes());
    format!("{:x}", h.finalize())
}

fn encode_f64s(values: &[f64]) -> String {
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    B64.encode(bytes)
}

fn decode_f64s(text: &str) -> Result<Vec<f64>> {
    let bytes = B64.decode(text).context("corrupt base64 array")?;
    if bytes.len() % 8 != 0 {
        bail!("corrupt binary array: length {} is not a multiple of 8", bytes.len());
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

impl Checkpoint {
    pub fn capture(
        config: &RunConfig,
        next_iteration: usize,
        k: f64,
        spectrum: &Spectrum<f64>,
        history: &[IterationRecord<f64>],
    ) -> Self {
        Self {
            config_hash: config_hash(config),
            config: config.clone(),
            next_iteration,
            k,
            field_spectrum: encode_f64s(&spectrum.values),
            history: history.iter().map(HistoryRecord::from).collect(),
        }
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).context("serialize checkpoint")?;
        write_atomic(path, &text)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read checkpoint {}", path.display()))?;
        let cp: Self =
            serde_json::from_str(&text).with_context(|| format!("corrupt checkpoint {}", path.display()))?;
        let expected = config_hash(&cp.config);
        if cp.config_hash != expected {
            bail!(
                "checkpoint config hash mismatch: stored {} but the embedded config hashes to {expected}",
                cp.config_hash
            );
        }
        Ok(cp)
    }

    pub fn into_state(self) -> Result<(RunConfig, OptimizationState<f64>)> {
        let spectrum = Spectrum::new(decode_f64s(&self.field_spectrum)?);
        let state = OptimizationState {
            next_iteration: self.next_iteration,
            field_spectrum: spectrum,
            k: self.k,
            history: self.history.iter().map(IterationRecord::from).collect(),
        };
        Ok((self.config, state))
    }
}
