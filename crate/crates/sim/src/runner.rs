//! Runs sweep cells, in parallel when asked, and aggregates them per
//! parameter tuple. Results always come back in cell order.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use cv2x_aoi_core::engine::run;
use cv2x_aoi_core::sweep::SweepCell;

use crate::error::{Error, Result};
use crate::output::{self, num, EmitOptions, SummaryRecord, SUMMARY_FIELDS};

/// Outcome of one `(params, seed)` run.
#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub params: Vec<(String, String)>,
    pub seed: u64,
    /// Where the artifacts went, when anything was written.
    pub dir: Option<PathBuf>,
    pub outcome: Result<SummaryRecord, String>,
}

/// `num_vehicles-30_rri-20_access_mode-oma/seed-3`.
pub fn cell_dir(root: &Path, params: &[(String, String)], seed: u64) -> PathBuf {
    let mut dir = root.to_path_buf();
    if !params.is_empty() {
        let name: Vec<String> = params.iter().map(|(k, v)| format!("{k}-{v}")).collect();
        dir.push(name.join("_"));
    }
    dir.push(format!("seed-{seed}"));
    dir
}

fn run_one(cell: &SweepCell, out: Option<&Path>, opts: EmitOptions) -> CellResult {
    let dir = out.map(|root| cell_dir(root, &cell.params, cell.seed));
    let outcome = run(&cell.config).map_err(|e| e.to_string()).and_then(|report| match &dir {
        Some(dir) => output::emit(&report, &cell.params, dir, opts).map_err(|e| e.to_string()),
        None => Ok(SummaryRecord::from_report(&report)),
    });
    CellResult { params: cell.params.clone(), seed: cell.seed, dir, outcome }
}

/// Runs every cell on a pool of `jobs` threads (0 = one per core). A failed
/// cell is reported in its result and does not stop the others.
pub fn run_cells(cells: &[SweepCell], out: Option<&Path>, opts: EmitOptions, jobs: usize) -> Result<Vec<CellResult>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start {jobs} worker threads: {e}")))?;
    Ok(pool.install(|| cells.par_iter().map(|c| run_one(c, out, opts)).collect()))
}

/// Mean and sample standard deviation of the seeds of one parameter tuple.
#[derive(Clone, Debug, PartialEq)]
pub struct CellStats {
    pub params: Vec<(String, String)>,
    pub runs: usize,
    pub failed: usize,
    pub success_rate: Stat,
    pub phi_bar: Stat,
    pub delta_t: Stat,
    pub non_collision_rate: Stat,
    pub analytic_p_ncol: Stat,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Stat {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Stat {
        let v: Vec<f64> = values.into_iter().collect();
        let n = v.len();
        if n == 0 {
            return Stat { n, mean: f64::NAN, std: f64::NAN };
        }
        let mean = v.iter().sum::<f64>() / n as f64;
        let std = if n > 1 { (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() } else { 0.0 };
        Stat { n, mean, std }
    }
}

/// Groups results by parameter tuple, keeping first-seen order.
pub fn aggregate(results: &[CellResult]) -> Vec<CellStats> {
    let mut keys: Vec<&Vec<(String, String)>> = Vec::new();
    for r in results {
        if !keys.contains(&&r.params) {
            keys.push(&r.params);
        }
    }
    keys.into_iter()
        .map(|params| {
            let group: Vec<&CellResult> = results.iter().filter(|r| &r.params == params).collect();
            let ok: Vec<&SummaryRecord> = group.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
            CellStats {
                params: params.clone(),
                runs: group.len(),
                failed: group.len() - ok.len(),
                success_rate: Stat::of(ok.iter().filter_map(|s| s.success_rate)),
                phi_bar: Stat::of(ok.iter().map(|s| s.mean_phi_bar)),
                delta_t: Stat::of(ok.iter().map(|s| s.mean_delta_t)),
                non_collision_rate: Stat::of(ok.iter().filter_map(|s| s.non_collision_rate)),
                analytic_p_ncol: Stat::of(ok.iter().filter_map(|s| s.analytic_p_ncol)),
            }
        })
        .collect()
}

pub fn param<'a>(params: &'a [(String, String)], key: &str) -> Option<&'a str> {
    params.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

/// One row per run: parameters, seed, status and the summary fields.
pub fn runs_csv(results: &[CellResult]) -> String {
    let keys: Vec<&str> = results.first().map(|r| r.params.iter().map(|(k, _)| k.as_str()).collect()).unwrap_or_default();
    let mut out = String::new();
    let mut header: Vec<&str> = keys.clone();
    header.push("status");
    header.extend(SUMMARY_FIELDS);
    out.push_str(&header.join(","));
    out.push('\n');
    for r in results {
        let mut row: Vec<String> = r.params.iter().map(|(_, v)| v.clone()).collect();
        match &r.outcome {
            Ok(rec) => {
                row.push("ok".into());
                row.extend(rec.csv_fields());
            }
            Err(msg) => {
                row.push(format!("\"error: {}\"", msg.replace('"', "'")));
                row.push(r.seed.to_string());
                row.extend(std::iter::repeat_n(String::new(), SUMMARY_FIELDS.len() - 1));
            }
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Per-tuple means and standard deviations.
pub fn aggregate_csv(stats: &[CellStats]) -> String {
    let keys: Vec<&str> = stats.first().map(|s| s.params.iter().map(|(k, _)| k.as_str()).collect()).unwrap_or_default();
    let mut out = keys.join(",");
    if !keys.is_empty() {
        out.push(',');
    }
    out.push_str(
        "runs,failed,success_rate_mean,success_rate_std,phi_bar_mean,phi_bar_std,delta_t_mean,delta_t_std,\
         non_collision_rate_mean,analytic_p_ncol_mean\n",
    );
    for s in stats {
        for (_, v) in &s.params {
            let _ = write!(out, "{v},");
        }
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            s.runs,
            s.failed,
            num(s.success_rate.mean),
            num(s.success_rate.std),
            num(s.phi_bar.mean),
            num(s.phi_bar.std),
            num(s.delta_t.mean),
            num(s.delta_t.std),
            num(s.non_collision_rate.mean),
            num(s.analytic_p_ncol.mean),
        );
    }
    out
}

/// Writes `runs.csv` and `aggregate.csv` under `root`.
pub fn write_index(root: &Path, results: &[CellResult]) -> Result<Vec<CellStats>> {
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    let stats = aggregate(results);
    output::write_atomic(&root.join("runs.csv"), runs_csv(results).as_bytes())?;
    output::write_atomic(&root.join("aggregate.csv"), aggregate_csv(&stats).as_bytes())?;
    Ok(stats)
}

/// `Err` naming the failure count when any run failed.
pub fn check_failures(results: &[CellResult]) -> Result<()> {
    let failed = results.iter().filter(|r| r.outcome.is_err()).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(Error::PartialSweep { failed, total: results.len() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stat_of_small_samples() {
        let s = Stat::of([1.0, 2.0, 3.0]);
        assert_eq!((s.n, s.mean, s.std), (3, 2.0, 1.0));
        assert_eq!(Stat::of([4.0]).std, 0.0);
        assert!(Stat::of([]).mean.is_nan());
    }

    #[test]
    fn cell_dirs_are_flat_and_distinct() {
        let p = vec![("rri".to_string(), "20".to_string()), ("access_mode".to_string(), "oma".to_string())];
        assert_eq!(cell_dir(Path::new("out"), &p, 3), Path::new("out/rri-20_access_mode-oma/seed-3"));
        assert_eq!(cell_dir(Path::new("out"), &[], 1), Path::new("out/seed-1"));
    }
}
