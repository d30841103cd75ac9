//! Randomised multi-vessel environments, parallel batches and summary statistics.
//!
//! Run `i` of a batch draws from a ChaCha8 generator seeded with the master
//! seed and switched to stream `i`, so every run is reproducible on its own
//! and results do not depend on how many threads execute the batch.

use std::f64::consts::PI;
use std::hash::Hasher;
use std::sync::Arc;

use fnv::FnvHasher;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::apf::StaticObstacle;
use crate::error::{Error, Result};
use crate::frames::{Pose, Vec2};
use crate::mmg::ShipModel;
use crate::scenario::{AgentSpec, Method, Scenario, SimConfig};
use crate::sim::{self, GuidanceTiming, Outcome};

/// Static and dynamic obstacle counts of the five benchmark environments.
pub const ENVIRONMENTS: [(usize, usize); 5] = [(1, 2), (2, 3), (2, 5), (3, 7), (4, 9)];

/// Normal quantile for a two-sided 95% interval.
const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvSpec {
    pub id: u8,
    pub n_static: usize,
    pub n_dynamic: usize,
    /// Side of the square spawn area (L).
    pub arena: f64,
    /// Smallest distance between any two spawn points (L).
    pub min_separation: f64,
    /// Smallest start-to-goal distance (L).
    pub min_goal_distance: f64,
    pub static_radius: f64,
    /// Bounds of the uniform dynamic-obstacle speed.
    pub speed_range: [f64; 2],
    pub own_speed: f64,
    /// Redraws allowed per point before giving up.
    pub max_attempts: usize,
}

impl EnvSpec {
    /// One of the five benchmark environments, `id` in 1..=5.
    pub fn table(id: u8) -> Result<Self> {
        let &(n_static, n_dynamic) = ENVIRONMENTS
            .get((id as usize).wrapping_sub(1))
            .ok_or_else(|| Error::invalid("env", format!("environment {id} does not exist (expected 1 to 5)")))?;
        Ok(Self {
            id,
            n_static,
            n_dynamic,
            arena: 100.0,
            min_separation: 10.0,
            min_goal_distance: 50.0,
            static_radius: 0.5,
            speed_range: [0.5, 1.0],
            own_speed: 1.0,
            max_attempts: 10_000,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.arena > 0.0) {
            return Err(Error::invalid("env.arena", "must be positive"));
        }
        if !(self.min_separation >= 0.0) || !(self.min_goal_distance >= 0.0) {
            return Err(Error::invalid("env", "distances must be non-negative"));
        }
        if self.min_goal_distance >= self.arena * std::f64::consts::SQRT_2 {
            return Err(Error::invalid("env.min_goal_distance", "larger than the arena diagonal"));
        }
        if !(self.static_radius > 0.0) {
            return Err(Error::invalid("env.static_radius", "must be positive"));
        }
        let [lo, hi] = self.speed_range;
        if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
            return Err(Error::invalid("env.speed_range", "must satisfy 0 < lo <= hi <= 1"));
        }
        if !(self.own_speed > 0.0 && self.own_speed <= 1.0) {
            return Err(Error::invalid("env.own_speed", "must lie in (0, 1]"));
        }
        if self.max_attempts == 0 {
            return Err(Error::invalid("env.max_attempts", "must be positive"));
        }
        Ok(())
    }
}

/// Generator for run `index` of a batch seeded with `master_seed`.
pub fn run_stream(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

fn point(rng: &mut impl Rng, arena: f64) -> Vec2 {
    Vec2::new(rng.random_range(0.0..arena), rng.random_range(0.0..arena))
}

/// Uniform heading in (-pi, pi].
fn heading(rng: &mut impl Rng) -> f64 {
    PI - 2.0 * PI * rng.random::<f64>()
}

/// Draws one random environment. Agent 0 is the own ship; the others are
/// dynamic obstacles that run `method` as well.
///
/// Spawn points are drawn in order (own ship, dynamic, static) and only the
/// point that violates the separation is redrawn.
pub fn sample_scenario(env: &EnvSpec, method: Method, rng: &mut impl Rng) -> Result<Scenario> {
    env.validate()?;
    let n_agents = 1 + env.n_dynamic;
    let mut spawns: Vec<Vec2> = Vec::with_capacity(n_agents + env.n_static);
    for _ in 0..n_agents + env.n_static {
        let mut attempts = 0;
        let p = loop {
            if attempts == env.max_attempts {
                return Err(Error::SamplingExhausted(attempts));
            }
            attempts += 1;
            let p = point(rng, env.arena);
            if spawns.iter().all(|q| q.distance(p) >= env.min_separation) {
                break p;
            }
        };
        spawns.push(p);
    }

    let mut agents = Vec::with_capacity(n_agents);
    for (i, &start) in spawns[..n_agents].iter().enumerate() {
        let mut attempts = 0;
        let goal = loop {
            if attempts == env.max_attempts {
                return Err(Error::SamplingExhausted(attempts));
            }
            attempts += 1;
            let g = point(rng, env.arena);
            if g.distance(start) >= env.min_goal_distance {
                break g;
            }
        };
        let speed = if i == 0 {
            env.own_speed
        } else {
            rng.random_range(env.speed_range[0]..=env.speed_range[1])
        };
        agents.push(AgentSpec {
            id: i as u32,
            start: Pose::new(start.x, start.y, heading(rng)),
            speed,
            waypoints: vec![goal],
            method: None,
        });
    }

    let mut sc = Scenario::new(agents, method);
    sc.obstacles = spawns[n_agents..]
        .iter()
        .map(|&center| StaticObstacle {
            center,
            radius: env.static_radius,
        })
        .collect();
    sc.name = Some(format!("env{}", env.id));
    Ok(sc)
}

/// Stable hash of everything in a scenario except its method.
pub fn scenario_hash(sc: &Scenario) -> Result<String> {
    let mut neutral = sc.clone();
    neutral.method = Method::ModifiedVortex;
    for a in &mut neutral.agents {
        a.method = None;
    }
    let bytes = serde_json::to_vec(&neutral)?;
    let mut h = FnvHasher::default();
    h.write(&bytes);
    Ok(format!("{:016x}", h.finish()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSpec {
    pub env: EnvSpec,
    pub method: Method,
    pub n_runs: usize,
    pub master_seed: u64,
    /// Worker threads; 0 uses the rayon default.
    #[serde(skip)]
    pub jobs: usize,
    pub config: SimConfig,
}

impl BatchSpec {
    pub fn new(env: EnvSpec, method: Method, n_runs: usize, master_seed: u64) -> Self {
        Self {
            env,
            method,
            n_runs,
            master_seed,
            jobs: 0,
            config: SimConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        if self.n_runs == 0 {
            return Err(Error::invalid("runs", "at least one run is required"));
        }
        Ok(())
    }
}

/// Own-ship result of one batch run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub index: u64,
    /// Stream index of the run generator.
    pub stream: u64,
    pub scenario_hash: String,
    /// None when the run failed before completing.
    pub outcome: Option<Outcome>,
    pub ce: Option<f64>,
    pub mcte: Option<f64>,
    pub time_to_goal: Option<f64>,
    pub min_separation: Option<f64>,
    /// Number of vessels, own ship included, that collided.
    pub collisions: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip)]
    pub timing: GuidanceTiming,
}

fn run_one(spec: &BatchSpec, model: &Arc<ShipModel>, index: u64) -> RunRecord {
    let mut rng = run_stream(spec.master_seed, index);
    let mut record = RunRecord {
        index,
        stream: index,
        scenario_hash: String::new(),
        outcome: None,
        ce: None,
        mcte: None,
        time_to_goal: None,
        min_separation: None,
        collisions: 0,
        error: None,
        timing: GuidanceTiming::default(),
    };
    let result = sample_scenario(&spec.env, spec.method, &mut rng).and_then(|mut sc| {
        sc.config = SimConfig {
            seed: spec.master_seed,
            ..spec.config
        };
        record.scenario_hash = scenario_hash(&sc)?;
        sim::run(&sc, Arc::clone(model))
    });
    match result {
        Ok(r) => {
            let own = &r.agents[0];
            record.outcome = Some(own.outcome);
            record.ce = Some(own.metrics.ce);
            record.mcte = Some(own.metrics.mcte);
            record.time_to_goal = own.metrics.time_to_goal;
            record.min_separation = own.metrics.min_separation;
            record.collisions = r.agents.iter().filter(|a| a.outcome == Outcome::Collision).count();
            record.timing = r.timing;
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    record
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::invalid("jobs", e.to_string()))
}

/// Runs every scenario of the batch; records come back in run order.
pub fn run_batch(spec: &BatchSpec, model: Arc<ShipModel>) -> Result<Vec<RunRecord>> {
    spec.validate()?;
    let n = spec.n_runs as u64;
    let records = pool(spec.jobs)?.install(|| (0..n).into_par_iter().map(|i| run_one(spec, &model, i)).collect());
    Ok(records)
}

/// Mean with a normal-approximation 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// None with fewer than two values.
    pub half_width: Option<f64>,
    pub n: usize,
}

impl Estimate {
    /// Sums are taken over sorted values so the result does not depend on input order.
    pub fn of_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        // shifting by the smallest value keeps constant input exact
        let base = v[0];
        let shift = v.iter().map(|x| x - base).sum::<f64>() / n as f64;
        let mean = base + shift;
        let half_width = (n > 1).then(|| {
            let var = v.iter().map(|x| (x - base - shift).powi(2)).sum::<f64>() / (n - 1) as f64;
            Z95 * var.sqrt() / (n as f64).sqrt()
        });
        Some(Self { mean, half_width, n })
    }

    /// Proportion of `hits` out of `n` with the Wald interval.
    pub fn proportion(hits: usize, n: usize) -> Option<Self> {
        if n == 0 {
            return None;
        }
        let p = hits as f64 / n as f64;
        Some(Self {
            mean: p,
            half_width: (n > 1).then(|| Z95 * (p * (1.0 - p) / n as f64).sqrt()),
            n,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub n_runs: usize,
    /// Runs that stopped on an error.
    pub failed_runs: usize,
    pub success_rate: Estimate,
    pub collision_rate: Estimate,
    pub timeout_rate: Estimate,
    pub ce: Option<Estimate>,
    pub mcte: Option<Estimate>,
    /// Successful runs only.
    pub time_to_goal: Option<Estimate>,
}

/// Own-ship statistics over a set of runs; failed runs count as unsuccessful.
pub fn aggregate(records: &[RunRecord]) -> Result<AggregateStats> {
    let n = records.len();
    if n == 0 {
        return Err(Error::invalid("records", "nothing to aggregate"));
    }
    let count = |o: Outcome| records.iter().filter(|r| r.outcome == Some(o)).count();
    let values = |f: fn(&RunRecord) -> Option<f64>| -> Vec<f64> { records.iter().filter_map(f).collect() };
    let rate = |k| Estimate::proportion(k, n).expect("n > 0");
    Ok(AggregateStats {
        n_runs: n,
        failed_runs: records.iter().filter(|r| r.outcome.is_none()).count(),
        success_rate: rate(count(Outcome::Success)),
        collision_rate: rate(count(Outcome::Collision)),
        timeout_rate: rate(count(Outcome::Timeout)),
        ce: Estimate::of_values(&values(|r| r.ce)),
        mcte: Estimate::of_values(&values(|r| r.mcte)),
        time_to_goal: Estimate::of_values(&values(|r| {
            if r.outcome == Some(Outcome::Success) {
                r.time_to_goal
            } else {
                None
            }
        })),
    })
}

/// Mean wall time per reactive guidance call over a batch, in microseconds.
pub fn mean_call_micros(records: &[RunRecord]) -> Option<f64> {
    let calls: u64 = records.iter().map(|r| r.timing.calls).sum();
    let nanos: u64 = records.iter().map(|r| r.timing.nanos).sum();
    (calls > 0).then(|| nanos as f64 / calls as f64 / 1000.0)
}

/// Deterministic batch output: no wall-clock data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub spec: BatchSpec,
    pub stats: AggregateStats,
    pub runs: Vec<RunRecord>,
}

impl BatchSummary {
    pub fn new(spec: &BatchSpec, runs: Vec<RunRecord>) -> Result<Self> {
        Ok(Self {
            spec: spec.clone(),
            stats: aggregate(&runs)?,
            runs,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodStats {
    pub method: Method,
    pub stats: AggregateStats,
    #[serde(skip)]
    pub mean_call_micros: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessDelta {
    pub method: Method,
    pub other: Method,
    /// success(method) - success(other) over the shared scenario set.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub env: EnvSpec,
    pub n_runs: usize,
    pub master_seed: u64,
    pub methods: Vec<MethodStats>,
    pub deltas: Vec<SuccessDelta>,
}

impl Comparison {
    pub fn stats(&self, method: Method) -> Option<&AggregateStats> {
        self.methods.iter().find(|m| m.method == method).map(|m| &m.stats)
    }
}

/// Replays the same sampled scenario set under every method.
pub fn compare_methods(
    env: &EnvSpec,
    methods: &[Method],
    n_runs: usize,
    master_seed: u64,
    jobs: usize,
    model: Arc<ShipModel>,
) -> Result<Comparison> {
    if methods.is_empty() {
        return Err(Error::invalid("methods", "at least one method is required"));
    }
    let mut per_method = Vec::with_capacity(methods.len());
    let mut reference: Option<Vec<String>> = None;
    for &m in methods {
        let mut spec = BatchSpec::new(*env, m, n_runs, master_seed);
        spec.jobs = jobs;
        let runs = run_batch(&spec, Arc::clone(&model))?;
        let hashes: Vec<String> = runs.iter().map(|r| r.scenario_hash.clone()).collect();
        match &reference {
            None => reference = Some(hashes),
            Some(h) if *h != hashes => {
                return Err(Error::Degenerate(format!("scenario set for {m} differs from the first method")))
            }
            Some(_) => {}
        }
        per_method.push(MethodStats {
            method: m,
            stats: aggregate(&runs)?,
            mean_call_micros: mean_call_micros(&runs),
        });
    }
    let mut deltas = Vec::new();
    for (i, a) in per_method.iter().enumerate() {
        for b in &per_method[i + 1..] {
            deltas.push(SuccessDelta {
                method: a.method,
                other: b.method,
                delta: a.stats.success_rate.mean - b.stats.success_rate.mean,
            });
        }
    }
    Ok(Comparison {
        env: *env,
        n_runs,
        master_seed,
        methods: per_method,
        deltas,
    })
}
