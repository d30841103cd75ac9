use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use asv_apf::io::{self, ResultDocument, TimingReport};
use asv_apf::montecarlo::{self, BatchSpec, BatchSummary, EnvSpec};
use asv_apf::plot::{self, FieldKind, FieldScene, PlotKind};
use asv_apf::scenario::{GuidanceParams, Method, Scenario, SimConfig};
use asv_apf::sim::{self, Outcome};
use asv_apf::Result;

#[derive(Parser)]
#[command(name = "asv-apf", version, about = "Multi-agent surface vessel simulator with potential-field collision avoidance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its trajectory and result.
    ///
    /// Exit status: 0 success, 2 collision, 3 timeout, 1 error (own ship is agent with lowest id).
    Simulate(SimulateArgs),
    /// Run a Monte Carlo batch on one benchmark environment.
    Batch(BatchArgs),
    /// Run the same sampled scenario set under several methods.
    Compare(CompareArgs),
    /// Render a trajectory CSV or a guidance field to SVG.
    Plot(PlotArgs),
    /// Check scenario files without running them.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory for trajectory.csv, result.json and timing.json.
    #[arg(long)]
    out: PathBuf,
    /// Method for every agent, overriding the file.
    #[arg(long)]
    method: Option<Method>,
    /// Integration step (nondimensional time).
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    max_time: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct BatchArgs {
    /// Benchmark environment, 1 to 5.
    #[arg(long)]
    env: u8,
    #[arg(long, default_value = "mvortex")]
    method: Method,
    #[arg(long, default_value_t = 200)]
    runs: usize,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Output directory for summary.json and timing.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Benchmark environment, 1 to 5.
    #[arg(long)]
    env: u8,
    /// Comma-separated methods.
    #[arg(long, value_delimiter = ',', default_value = "mvortex,inverse,vo")]
    methods: Vec<Method>,
    #[arg(long, default_value_t = 200)]
    runs: usize,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Output directory for comparison.json and timing.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    /// Trajectory CSV written by `simulate`.
    #[arg(long, requires = "kind", conflicts_with = "field")]
    traj: Option<PathBuf>,
    /// path, rudder, heading, distance or crosstrack.
    #[arg(long)]
    kind: Option<PlotKind>,
    /// Scenario file adding waypoints, obstacles and channel walls to path plots.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Guidance field instead of a trajectory: inverse, sinkvortex or mvortex.
    #[arg(long, required_unless_present = "traj")]
    field: Option<FieldKind>,
    /// Output SVG file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// Scenario JSON files.
    #[arg(required = true)]
    scenarios: Vec<PathBuf>,
}

fn outcome_code(o: Outcome) -> u8 {
    match o {
        Outcome::Success => 0,
        Outcome::Collision => 2,
        Outcome::Timeout => 3,
    }
}

fn load(path: &Path) -> Result<(Scenario, Arc<asv_apf::mmg::ShipModel>)> {
    let sc = Scenario::from_path(path)?;
    let model = sc.ship_model(path.parent())?;
    Ok((sc, Arc::new(model)))
}

fn simulate(a: SimulateArgs) -> Result<u8> {
    let (mut sc, model) = load(&a.scenario)?;
    if let Some(m) = a.method {
        sc.method = m;
        for ag in &mut sc.agents {
            ag.method = None;
        }
    }
    let c: &mut SimConfig = &mut sc.config;
    if let Some(dt) = a.dt {
        c.dt = dt;
    }
    if let Some(t) = a.max_time {
        c.max_time = t;
    }
    if let Some(s) = a.seed {
        c.seed = s;
    }
    sc.validate()?;
    let result = sim::run(&sc, model)?;
    io::create_dir(&a.out)?;
    io::write_trajectory_file(a.out.join("trajectory.csv"), &result)?;
    let doc = ResultDocument::new(sc.name.as_deref(), &result);
    io::write_json(a.out.join("result.json"), &doc)?;
    io::write_json(a.out.join("timing.json"), &TimingReport::from(result.timing))?;

    if let Some(name) = &sc.name {
        println!("scenario {name}");
    }
    for r in &result.agents {
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.3}"));
        println!(
            "agent {} {} {} t'={:.1} CE={:.4} MCTE={:.3} min_sep={} min_clear={}",
            r.id,
            r.method,
            r.outcome.as_str(),
            r.end_time,
            r.metrics.ce,
            r.metrics.mcte,
            opt(r.metrics.min_separation),
            opt(r.metrics.min_clearance),
        );
    }
    println!("outcome {}", doc.outcome.as_str());
    Ok(outcome_code(doc.outcome))
}

fn fmt_estimate(e: Option<&montecarlo::Estimate>) -> String {
    match e {
        Some(e) => match e.half_width {
            Some(h) => format!("{:.4} ± {:.4}", e.mean, h),
            None => format!("{:.4}", e.mean),
        },
        None => "-".into(),
    }
}

fn print_stats(label: &str, s: &montecarlo::AggregateStats, micros: Option<f64>) {
    println!(
        "{label:<10} success {}  CE {}  MCTE {}  time-to-goal {}  failed {}  call {}",
        fmt_estimate(Some(&s.success_rate)),
        fmt_estimate(s.ce.as_ref()),
        fmt_estimate(s.mcte.as_ref()),
        fmt_estimate(s.time_to_goal.as_ref()),
        s.failed_runs,
        micros.map_or("-".into(), |m| format!("{m:.2} us")),
    );
}

fn batch(a: BatchArgs) -> Result<u8> {
    let env = EnvSpec::table(a.env)?;
    let mut spec = BatchSpec::new(env, a.method, a.runs, a.seed);
    spec.jobs = a.jobs;
    let runs = montecarlo::run_batch(&spec, Arc::new(asv_apf::mmg::ShipModel::kcs()))?;
    let micros = montecarlo::mean_call_micros(&runs);
    let calls: u64 = runs.iter().map(|r| r.timing.calls).sum();
    let nanos: u64 = runs.iter().map(|r| r.timing.nanos).sum();
    let summary = BatchSummary::new(&spec, runs)?;
    io::create_dir(&a.out)?;
    io::write_json(a.out.join("summary.json"), &summary)?;
    io::write_json(
        a.out.join("timing.json"),
        &TimingReport {
            guidance_calls: calls,
            guidance_nanos: nanos,
            mean_call_micros: micros,
        },
    )?;
    println!("env {} runs {} seed {}", a.env, a.runs, a.seed);
    print_stats(a.method.as_str(), &summary.stats, micros);
    Ok(0)
}

fn compare(a: CompareArgs) -> Result<u8> {
    let env = EnvSpec::table(a.env)?;
    let c = montecarlo::compare_methods(
        &env,
        &a.methods,
        a.runs,
        a.seed,
        a.jobs,
        Arc::new(asv_apf::mmg::ShipModel::kcs()),
    )?;
    io::create_dir(&a.out)?;
    io::write_json(a.out.join("comparison.json"), &c)?;
    let timing: Vec<serde_json::Value> = c
        .methods
        .iter()
        .map(|m| serde_json::json!({"method": m.method, "mean_call_micros": m.mean_call_micros}))
        .collect();
    io::write_json(a.out.join("timing.json"), &timing)?;
    println!("env {} runs {} seed {}", a.env, a.runs, a.seed);
    for m in &c.methods {
        print_stats(m.method.as_str(), &m.stats, m.mean_call_micros);
    }
    for d in &c.deltas {
        println!("success {} - {} = {:+.4}", d.method, d.other, d.delta);
    }
    Ok(0)
}

fn plot_cmd(a: PlotArgs) -> Result<u8> {
    let scenario = a.scenario.as_deref().map(Scenario::from_path).transpose()?;
    let svg = match (a.traj, a.kind, a.field) {
        (Some(traj), Some(kind), None) => {
            let rows = io::read_trajectory_file(&traj)?;
            plot::plot_trajectory(kind, &rows, scenario.as_ref())?
        }
        (None, _, Some(field)) => {
            let (params, r_safe) = match &scenario {
                Some(sc) => (sc.params, sc.config.r_safe),
                None => (GuidanceParams::default(), SimConfig::default().r_safe),
            };
            plot::plot_field(field, &FieldScene::default(), &params, r_safe)
        }
        _ => unreachable!("argument groups enforce one of --traj/--kind or --field"),
    };
    io::write_text(&a.out, &svg)?;
    Ok(0)
}

fn validate(a: ValidateArgs) -> Result<u8> {
    let mut code = 0;
    for p in &a.scenarios {
        match load(p) {
            Ok(_) => println!("{}: ok", p.display()),
            Err(e) => {
                eprintln!("{}: {e}", p.display());
                code = 1;
            }
        }
    }
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Batch(a) => batch(a),
        Command::Compare(a) => compare(a),
        Command::Plot(a) => plot_cmd(a),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
