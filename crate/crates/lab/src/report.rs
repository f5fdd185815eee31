//! Output tables and the summary document.
//!
//! Layout of an output directory:
//!
//! ```text
//! out/eps_<ε>/energy.csv      step, t, energy, sup_norm, newton_iters
//! out/eps_<ε>/excess.csv      x0, y0, t0, rho, excess
//! out/eps_<ε>/regime.csv      cylinder_id, delta, mu, nu, label, witness_angle
//! out/eps_<ε>/checkpoint.*    solved field (binary or CSV, if enabled)
//! out/delta_<δ>/epsconv.csv   eps, l2_distance_to_ref
//! out/modulus.csv             delta, epsilon, lag, osc, exponent_fit, r2
//! out/summary.json            config hash, constants, verdicts, file hashes
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use degenlab_core::regularize::RegularizationConstants;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{LabError, Result};

pub fn eps_dir(eps: f64) -> String {
    format!("eps_{eps}")
}

pub fn delta_dir(delta: f64) -> String {
    format!("delta_{delta}")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyRow {
    pub step: usize,
    pub t: f64,
    pub energy: f64,
    pub sup_norm: f64,
    pub newton_iters: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcessRow {
    pub x0: f64,
    pub y0: f64,
    pub t0: f64,
    pub rho: f64,
    pub excess: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeRow {
    pub cylinder_id: usize,
    pub delta: f64,
    pub mu: f64,
    pub nu: f64,
    pub label: String,
    /// Polar angle of the witness `e*`; empty when degenerate.
    pub witness_angle: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusRow {
    pub delta: f64,
    pub epsilon: f64,
    pub lag: f64,
    pub osc: f64,
    /// Fitted exponent, or `exact` when the oscillation vanishes.
    pub exponent_fit: String,
    pub r2: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsConvRow {
    pub eps: f64,
    pub l2_distance_to_ref: f64,
}

/// Serializable copy of the regularization constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsLedger {
    pub r_e: f64,
    pub big_r_e: f64,
    pub k: f64,
    pub k_tilde: f64,
    pub l: f64,
    pub n: f64,
    pub c_psi: f64,
    pub c_f: f64,
    pub phi_hessian_bound: f64,
    pub growth: f64,
    pub epsilon: f64,
}

impl From<&RegularizationConstants> for ConstantsLedger {
    fn from(c: &RegularizationConstants) -> Self {
        Self {
            r_e: c.r_e,
            big_r_e: c.big_r_e,
            k: c.k,
            k_tilde: c.k_tilde,
            l: c.l,
            n: c.n,
            c_psi: c.c_psi,
            c_f: c.c_f,
            phi_hessian_bound: c.phi_hessian_bound,
            growth: c.growth,
            epsilon: c.epsilon,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KRecord {
    pub value: f64,
    /// `fixed` or `bootstrap`.
    pub policy: String,
    /// Sup of the nodal gradient seen by the pre-solve, if any.
    pub measured: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub epsilon: f64,
    pub constants: ConstantsLedger,
    pub steps: usize,
    pub data_sup: f64,
    pub final_sup_norm: f64,
    pub max_newton_iters: usize,
    pub gradient_energy: f64,
    pub weak_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsConvSummary {
    pub delta: f64,
    pub reference_eps: Option<f64>,
    /// `None` with fewer than three ε levels.
    pub monotone: Option<bool>,
    pub violation: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GDeltaSummary {
    pub delta: f64,
    pub forward_bound: f64,
    pub inverse_bound: f64,
    pub collapse_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config_hash: String,
    pub seed: u64,
    pub dual_samples: usize,
    pub k: KRecord,
    pub levels: Vec<LevelSummary>,
    pub g_delta: Vec<GDeltaSummary>,
    pub epsconv: Vec<EpsConvSummary>,
    /// Relative path to SHA-256 of every table and checkpoint.
    pub files: BTreeMap<String, String>,
}

/// Everything under one output directory, merged into a single document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub summary: Summary,
    pub energy: BTreeMap<String, Vec<EnergyRow>>,
    pub excess: BTreeMap<String, Vec<ExcessRow>>,
    pub regime: BTreeMap<String, Vec<RegimeRow>>,
    pub epsconv: BTreeMap<String, Vec<EpsConvRow>>,
    pub modulus: Vec<ModulusRow>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn csv_bytes<T: Serialize>(rows: &[T], header: &[&str]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| LabError::format("csv", e.to_string()))
}

pub const ENERGY_HEADER: [&str; 5] = ["step", "t", "energy", "sup_norm", "newton_iters"];
pub const EXCESS_HEADER: [&str; 5] = ["x0", "y0", "t0", "rho", "excess"];
pub const REGIME_HEADER: [&str; 6] = ["cylinder_id", "delta", "mu", "nu", "label", "witness_angle"];
pub const MODULUS_HEADER: [&str; 6] = ["delta", "epsilon", "lag", "osc", "exponent_fit", "r2"];
pub const EPSCONV_HEADER: [&str; 2] = ["eps", "l2_distance_to_ref"];

/// Writes `bytes` under `root/rel` and records its hash.
pub fn write_tracked(root: &Path, rel: &str, bytes: &[u8], files: &mut BTreeMap<String, String>) -> Result<()> {
    let path = root.join(rel);
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    }
    fs::write(&path, bytes).map_err(|e| LabError::io(&path, e))?;
    files.insert(rel.to_string(), sha256_hex(bytes));
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let bytes = fs::read(path).map_err(|e| LabError::io(path, e))?;
    let mut r = csv::Reader::from_reader(bytes.as_slice());
    r.deserialize().map(|row| row.map_err(LabError::from)).collect()
}

pub fn write_summary(root: &Path, summary: &Summary) -> Result<()> {
    let path = root.join("summary.json");
    let text = serde_json::to_string_pretty(summary)? + "\n";
    fs::write(&path, text).map_err(|e| LabError::io(&path, e))
}

pub fn read_summary(root: &Path) -> Result<Summary> {
    let path = root.join("summary.json");
    let text = fs::read_to_string(&path).map_err(|e| LabError::io(&path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Checks every recorded file hash under `root`.
pub fn verify_hashes(root: &Path, summary: &Summary) -> Result<()> {
    for (rel, hash) in &summary.files {
        let path: PathBuf = root.join(rel);
        let bytes = fs::read(&path).map_err(|e| LabError::io(&path, e))?;
        if &sha256_hex(&bytes) != hash {
            return Err(LabError::format(path, "content does not match the hash in summary.json"));
        }
    }
    Ok(())
}

/// Merges the summary and every table under `root`.
pub fn merge(root: &Path) -> Result<ExperimentReport> {
    let summary = read_summary(root)?;
    verify_hashes(root, &summary)?;
    let mut energy = BTreeMap::new();
    let mut excess = BTreeMap::new();
    let mut regime = BTreeMap::new();
    let mut epsconv = BTreeMap::new();
    for level in &summary.levels {
        let dir = eps_dir(level.epsilon);
        energy.insert(dir.clone(), read_csv(&root.join(&dir).join("energy.csv"))?);
        excess.insert(dir.clone(), read_csv(&root.join(&dir).join("excess.csv"))?);
        regime.insert(dir.clone(), read_csv(&root.join(&dir).join("regime.csv"))?);
    }
    for e in &summary.epsconv {
        let dir = delta_dir(e.delta);
        let path = root.join(&dir).join("epsconv.csv");
        if path.exists() {
            epsconv.insert(dir, read_csv(&path)?);
        }
    }
    let modulus = read_csv(&root.join("modulus.csv"))?;
    Ok(ExperimentReport {
        summary,
        energy,
        excess,
        regime,
        epsconv,
        modulus,
    })
}
