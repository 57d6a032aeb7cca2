//! Run artifacts: `summary.{csv,json}`, `series.csv`, optional `queues.csv`
//! and `manifest.json`, each written atomically.
//!
//! Floats are written in Rust's shortest round-trip form, so every value
//! parses back to the exact in-memory number.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use cv2x_aoi_core::aoi::SlotReport;
use cv2x_aoi_core::engine::{SimulationReport, Summary};

use crate::error::{Error, Result};

pub const SERIES_HEADER: &str = "slot,phi_bar,delta_t,tx,rx_success,rx_attempts,collisions,drops";
pub const QUEUES_HEADER: &str =
    "slot,phi_hpd,phi_denm,phi_cam,phi_mhd,queued_hpd,queued_denm,queued_cam,queued_mhd";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Which files [`emit`] writes besides the series and manifest.
#[derive(Clone, Copy, Debug, Default)]
pub struct EmitOptions {
    pub format: Format,
    /// Also write `queues.csv` with per-type queue ages.
    pub per_type: bool,
}

/// Flat, serializable form of [`Summary`] plus the run's seed and digest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub seed: u64,
    pub slots: u64,
    pub success_rate: Option<f64>,
    pub mean_phi_bar: f64,
    pub mean_delta_t: f64,
    pub tx: u64,
    pub rx_success: u64,
    pub rx_attempts: u64,
    pub drops: u64,
    pub collisions: u64,
    pub collided_tx: u64,
    pub non_collision_rate: Option<f64>,
    pub pi_estimate: Option<f64>,
    pub analytic_p_ncol: Option<f64>,
    pub mean_age_hpd: Option<f64>,
    pub mean_age_denm: Option<f64>,
    pub mean_age_cam: Option<f64>,
    pub mean_age_mhd: Option<f64>,
    /// Final-state digest, 16 hex digits.
    pub digest: String,
}

pub const SUMMARY_FIELDS: [&str; 19] = [
    "seed",
    "slots",
    "success_rate",
    "mean_phi_bar",
    "mean_delta_t",
    "tx",
    "rx_success",
    "rx_attempts",
    "drops",
    "collisions",
    "collided_tx",
    "non_collision_rate",
    "pi_estimate",
    "analytic_p_ncol",
    "mean_age_hpd",
    "mean_age_denm",
    "mean_age_cam",
    "mean_age_mhd",
    "digest",
];

impl SummaryRecord {
    pub fn new(seed: u64, s: &Summary, digest: u64) -> Self {
        let [hpd, denm, cam, mhd] = s.mean_age_by_type;
        SummaryRecord {
            seed,
            slots: s.slots,
            success_rate: s.success_rate,
            mean_phi_bar: s.mean_phi_bar,
            mean_delta_t: s.mean_delta_t,
            tx: s.tx,
            rx_success: s.rx_success,
            rx_attempts: s.rx_attempts,
            drops: s.drops,
            collisions: s.collisions,
            collided_tx: s.collided_tx,
            non_collision_rate: s.non_collision_rate,
            pi_estimate: s.pi_estimate,
            analytic_p_ncol: s.analytic_p_ncol,
            mean_age_hpd: hpd,
            mean_age_denm: denm,
            mean_age_cam: cam,
            mean_age_mhd: mhd,
            digest: format!("{digest:016x}"),
        }
    }

    pub fn from_report(report: &SimulationReport) -> Self {
        Self::new(report.config.rng_seed, &report.summary(), report.final_digest)
    }

    /// Values in [`SUMMARY_FIELDS`] order; absent values are empty.
    pub fn csv_fields(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        vec![
            self.seed.to_string(),
            self.slots.to_string(),
            opt(self.success_rate),
            num(self.mean_phi_bar),
            num(self.mean_delta_t),
            self.tx.to_string(),
            self.rx_success.to_string(),
            self.rx_attempts.to_string(),
            self.drops.to_string(),
            self.collisions.to_string(),
            self.collided_tx.to_string(),
            opt(self.non_collision_rate),
            opt(self.pi_estimate),
            opt(self.analytic_p_ncol),
            opt(self.mean_age_hpd),
            opt(self.mean_age_denm),
            opt(self.mean_age_cam),
            opt(self.mean_age_mhd),
            self.digest.clone(),
        ]
    }

    /// Parses one data row written by [`SummaryRecord::csv_fields`].
    pub fn from_csv_fields(fields: &[&str]) -> Option<Self> {
        if fields.len() != SUMMARY_FIELDS.len() {
            return None;
        }
        let int = |i: usize| fields[i].parse::<u64>().ok();
        let float = |i: usize| fields[i].parse::<f64>().ok();
        let opt = |i: usize| if fields[i].is_empty() { Some(None) } else { float(i).map(Some) };
        Some(SummaryRecord {
            seed: int(0)?,
            slots: int(1)?,
            success_rate: opt(2)?,
            mean_phi_bar: float(3)?,
            mean_delta_t: float(4)?,
            tx: int(5)?,
            rx_success: int(6)?,
            rx_attempts: int(7)?,
            drops: int(8)?,
            collisions: int(9)?,
            collided_tx: int(10)?,
            non_collision_rate: opt(11)?,
            pi_estimate: opt(12)?,
            analytic_p_ncol: opt(13)?,
            mean_age_hpd: opt(14)?,
            mean_age_denm: opt(15)?,
            mean_age_cam: opt(16)?,
            mean_age_mhd: opt(17)?,
            digest: fields[18].to_string(),
        })
    }
}

/// Shortest round-trip decimal form (`1.0`, `0.25`, `1e-7`).
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn summary_csv(rec: &SummaryRecord) -> String {
    format!("{}\n{}\n", SUMMARY_FIELDS.join(","), rec.csv_fields().join(","))
}

pub fn summary_json(rec: &SummaryRecord) -> String {
    let mut s = serde_json::to_string_pretty(rec).expect("summary serializes");
    s.push('\n');
    s
}

/// Reads back a `summary.csv` or `summary.json`.
pub fn parse_summary(text: &str, format: Format) -> Option<SummaryRecord> {
    match format {
        Format::Json => serde_json::from_str(text).ok(),
        Format::Csv => {
            let mut lines = text.lines();
            if lines.next()? != SUMMARY_FIELDS.join(",") {
                return None;
            }
            let row: Vec<&str> = lines.next()?.split(',').collect();
            SummaryRecord::from_csv_fields(&row)
        }
    }
}

pub fn series_csv(slots: &[SlotReport]) -> String {
    let mut out = String::with_capacity(48 * (slots.len() + 1));
    out.push_str(SERIES_HEADER);
    out.push('\n');
    for r in slots {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.slot,
            num(r.phi_bar),
            num(r.delta_t),
            r.tx,
            r.rx_success,
            r.rx_attempts,
            r.collisions,
            r.drops
        );
    }
    out
}

pub fn queues_csv(slots: &[SlotReport]) -> String {
    let mut out = String::with_capacity(64 * (slots.len() + 1));
    out.push_str(QUEUES_HEADER);
    out.push('\n');
    for r in slots {
        let [a, b, c, d] = r.phi_by_type;
        let [qa, qb, qc, qd] = r.queued_by_type;
        let _ = writeln!(out, "{},{},{},{},{},{qa},{qb},{qc},{qd}", r.slot, num(a), num(b), num(c), num(d));
    }
    out
}

/// Everything needed to rerun a result: resolved config, seed, code version
/// and checksums of the files written alongside it.
pub fn manifest_json(report: &SimulationReport, params: &[(String, String)], files: &[(String, String)]) -> String {
    let config: serde_json::Map<String, serde_json::Value> =
        report.config.entries().into_iter().map(|(k, v)| (k.to_string(), v.into())).collect();
    let params: serde_json::Map<String, serde_json::Value> =
        params.iter().map(|(k, v)| (k.clone(), v.clone().into())).collect();
    let files: serde_json::Map<String, serde_json::Value> =
        files.iter().map(|(k, v)| (k.clone(), v.clone().into())).collect();
    let doc = serde_json::json!({
        "generator": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "seed": report.config.rng_seed,
        "params": params,
        "digest": format!("{:016x}", report.final_digest),
        "sha256": files,
        "config": config,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("manifest serializes");
    s.push('\n');
    s
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

/// Writes one run's artifacts into `dir` and returns the summary record.
pub fn emit(
    report: &SimulationReport,
    params: &[(String, String)],
    dir: &Path,
    opts: EmitOptions,
) -> Result<SummaryRecord> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let record = SummaryRecord::from_report(report);
    let summary = match opts.format {
        Format::Csv => summary_csv(&record),
        Format::Json => summary_json(&record),
    };
    let mut files: Vec<(String, String)> = Vec::new();
    let mut put = |name: String, body: String| -> Result<PathBuf> {
        let path = dir.join(&name);
        write_atomic(&path, body.as_bytes())?;
        files.push((name, sha256_hex(body.as_bytes())));
        Ok(path)
    };
    put(format!("summary.{}", opts.format.extension()), summary)?;
    put("series.csv".into(), series_csv(&report.slots))?;
    if opts.per_type {
        put("queues.csv".into(), queues_csv(&report.slots))?;
    }
    write_atomic(&dir.join("manifest.json"), manifest_json(report, params, &files).as_bytes())?;
    Ok(record)
}
