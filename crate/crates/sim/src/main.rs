use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cv2x_aoi::configfile::{self, split_override};
use cv2x_aoi::output::{self, EmitOptions, Format};
use cv2x_aoi::runner::{self, param, CellResult, CellStats};
use cv2x_aoi::{parse_seed_range, presets, Error, Result};
use cv2x_aoi_core::analytic::{p_no_collision, AnalyticParams};
use cv2x_aoi_core::sweep::{expand, Axis};
use cv2x_aoi_core::{AccessMode, ScenarioConfig};

#[derive(Parser)]
#[command(name = "cv2x-aoi", version, about = "Slot-level C-V2X Mode 4 AoI simulator (OMA vs NOMA-SIC)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One simulation (or one per seed with --seeds).
    Run(Common),
    /// Cartesian grid over config keys.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Grid axis, repeatable: KEY=V1,V2,...
        #[arg(long = "axis", value_name = "KEY=V1,V2")]
        axes: Vec<String>,
    },
    /// Success-rate table: Nv {30,50} x RRI {20,50,100} x {OMA,NOMA}.
    Table1(Common),
    /// Queue AoI series: per-type ages (single FIFO vs priority) and mean queue AoI per RRI.
    FigQueues(Common),
    /// Receiver AoI series for Nv {30,50} x RRI x access mode.
    FigAoi(Common),
    /// Evaluate the closed-form non-collision probability; takes pi=... via --set.
    Analytic(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// Flat TOML config file, or a manifest.json from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, applied after --config. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Inclusive seed range N..M.
    #[arg(long, value_name = "N..M")]
    seeds: Option<String>,
    /// Output directory [default: $CV2X_SIM_OUT, else ./results].
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    #[arg(long)]
    quiet: bool,
    /// Worker threads for multi-run commands (0 = one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl Common {
    fn base(&self, preset: ScenarioConfig) -> Result<ScenarioConfig> {
        let mut cfg = preset;
        if let Some(path) = &self.config {
            configfile::load_into(&mut cfg, path)?;
        }
        configfile::apply_overrides(&mut cfg, &self.set)?;
        if let Some(seed) = self.seed {
            cfg.rng_seed = seed;
        }
        Ok(cfg)
    }

    fn seeds(&self, fallback: &[u64]) -> Result<Vec<u64>> {
        match &self.seeds {
            Some(s) => Ok(parse_seed_range(s)?.collect()),
            None => Ok(fallback.to_vec()),
        }
    }

    fn out(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os("CV2X_SIM_OUT").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("results"))
    }

    fn emit(&self, per_type: bool) -> EmitOptions {
        let format = match self.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        };
        EmitOptions { format, per_type }
    }

    fn say(&self, text: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", text.as_ref());
        }
    }
}

fn parse_axis(spec: &str) -> Result<Axis> {
    let (key, values) = split_override(spec)?;
    let values: Vec<&str> = values.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
    if values.is_empty() {
        return Err(Error::Usage(format!("axis `{key}` has no values")));
    }
    Ok(Axis::new(key, values))
}

fn grid(
    c: &Common,
    base: &ScenarioConfig,
    axes: &[Axis],
    seeds: &[u64],
    root: &Path,
    per_type: bool,
) -> Result<(Vec<CellResult>, Vec<CellStats>)> {
    let cells = expand(base, axes, seeds)?;
    let results = runner::run_cells(&cells, Some(root), c.emit(per_type), c.jobs)?;
    for r in results.iter().filter(|r| r.outcome.is_err()) {
        eprintln!("run {:?} seed {} failed: {}", r.params, r.seed, r.outcome.as_ref().unwrap_err());
    }
    let stats = runner::write_index(root, &results)?;
    Ok((results, stats))
}

fn cmd_run(c: &Common) -> Result<()> {
    let base = c.base(ScenarioConfig::default())?;
    let out = c.out();
    if c.seeds.is_none() {
        let cfg = base.validate()?;
        let report = cv2x_aoi_core::run(&cfg)?;
        let rec = output::emit(&report, &[], &out, c.emit(false))?;
        c.say(format!(
            "seed {}: success_rate {} mean_phi_bar {} mean_delta_t {} digest {}",
            rec.seed,
            rec.success_rate.map_or("n/a".into(), output::num),
            output::num(rec.mean_phi_bar),
            output::num(rec.mean_delta_t),
            rec.digest
        ));
        c.say(format!("wrote {}", out.display()));
        return Ok(());
    }
    let (results, stats) = grid(c, &base, &[], &c.seeds(&[])?, &out, false)?;
    print_stats(c, &stats);
    runner::check_failures(&results)
}

fn cmd_sweep(c: &Common, axes: &[String]) -> Result<()> {
    let base = c.base(ScenarioConfig::default())?;
    let axes = axes.iter().map(|a| parse_axis(a)).collect::<Result<Vec<_>>>()?;
    let (results, stats) = grid(c, &base, &axes, &c.seeds(&[base.rng_seed])?, &c.out(), false)?;
    print_stats(c, &stats);
    runner::check_failures(&results)
}

fn print_stats(c: &Common, stats: &[CellStats]) {
    for s in stats {
        let name: Vec<String> = s.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        c.say(format!(
            "{:<40} runs {:>3}  success {:.5} ± {:.5}  phi_bar {:.2}  delta_t {:.2}",
            name.join(" "),
            s.runs - s.failed,
            s.success_rate.mean,
            s.success_rate.std,
            s.phi_bar.mean,
            s.delta_t.mean
        ));
    }
}

fn cmd_table1(c: &Common) -> Result<()> {
    let base = c.base(presets::paper_settings())?;
    let seeds = c.seeds(&(1..=10).collect::<Vec<_>>())?;
    let out = c.out();
    let (results, stats) = grid(c, &base, &presets::table1_axes(), &seeds, &out, false)?;
    let mut csv = String::from("num_vehicles,rri,access_mode,seeds,success_rate_mean,success_rate_std,paper,diff\n");
    c.say(" Nv  RRI  mode   success (mean ± sd)    paper     diff");
    for s in &stats {
        let nv: usize = param(&s.params, "num_vehicles").and_then(|v| v.parse().ok()).unwrap_or(0);
        let rri: u32 = param(&s.params, "rri").and_then(|v| v.parse().ok()).unwrap_or(0);
        let mode = if param(&s.params, "access_mode") == Some("noma") { AccessMode::Noma } else { AccessMode::Oma };
        let paper = presets::paper_success_rate(mode, nv, rri).unwrap_or(f64::NAN);
        let m = s.success_rate.mean;
        csv.push_str(&format!(
            "{nv},{rri},{mode},{},{},{},{},{}\n",
            s.success_rate.n,
            output::num(m),
            output::num(s.success_rate.std),
            output::num(paper),
            output::num(m - paper)
        ));
        c.say(format!("{nv:>3} {rri:>4}  {mode:<5} {m:.5} ± {:.5}   {paper:.5}  {:+.5}", s.success_rate.std, m - paper));
    }
    output::write_atomic(&out.join("table1.csv"), csv.as_bytes())?;
    c.say(format!("wrote {}", out.display()));
    runner::check_failures(&results)
}

fn cmd_fig_queues(c: &Common) -> Result<()> {
    let out = c.out();
    let seeds = c.seeds(&[c.seed.unwrap_or(1)])?;
    let fifo_base = c.base(presets::queue_discipline_base())?;
    let (r2, s2) = grid(c, &fifo_base, &presets::queue_discipline_axes(), &seeds, &out.join("per-type"), true)?;
    let base = c.base(presets::paper_settings())?;
    let (r3, s3) = grid(c, &base, &presets::queue_aoi_axes(), &seeds, &out.join("by-rri"), true)?;
    print_stats(c, &s2);
    print_stats(c, &s3);
    c.say(format!("wrote {}", out.display()));
    runner::check_failures(&r2)?;
    runner::check_failures(&r3)
}

fn cmd_fig_aoi(c: &Common) -> Result<()> {
    let base = c.base(presets::paper_settings())?;
    let seeds = c.seeds(&[base.rng_seed])?;
    let out = c.out();
    let (results, stats) = grid(c, &base, &presets::table1_axes(), &seeds, &out, false)?;
    print_stats(c, &stats);
    c.say(format!("wrote {}", out.display()));
    runner::check_failures(&results)
}

fn cmd_analytic(c: &Common) -> Result<()> {
    let mut pi = None;
    let mut rest = Vec::new();
    for item in &c.set {
        match split_override(item)? {
            ("pi", v) => pi = Some(v.parse::<f64>().map_err(|_| Error::Usage(format!("bad pi `{v}`")))?),
            _ => rest.push(item.clone()),
        }
    }
    let pi = pi.ok_or_else(|| Error::Usage("analytic needs --set pi=VALUE".into()))?;
    let common = Common { set: rest, ..c.clone() };
    let cfg = common.base(presets::paper_settings())?.validate()?;
    let params = AnalyticParams::from_config(&cfg, pi);
    let p = p_no_collision(&params).map_err(|e| Error::Usage(e.to_string()))?;
    println!("{p:?}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Run(c) => cmd_run(c),
        Command::Sweep { common, axes } => cmd_sweep(common, axes),
        Command::Table1(c) => cmd_table1(c),
        Command::FigQueues(c) => cmd_fig_queues(c),
        Command::FigAoi(c) => cmd_fig_aoi(c),
        Command::Analytic(c) => cmd_analytic(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
