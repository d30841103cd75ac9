//! Multi-agent simulation loop, collision detection, outcomes and metrics.
//!
//! Every agent reads the same snapshot of the others taken at the start of a
//! step, so results do not depend on agent ordering. Agents that reach their
//! goal or collide are retired from the world; the run continues until no
//! agent is left or the time budget is spent.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::apf::{
    desired_heading_harmonic, desired_heading_inverse_square, reactive_active, ChannelBoundary, ObstacleView,
    StaticObstacle, VortexLaw,
};
use crate::error::{Error, Result};
use crate::frames::{rk4_step, wrap_angle, BodyVelocity, Pose, Vec2};
use crate::guidance::{
    ilos_desired_heading, ilos_integrator_derivative, pd_rudder_command, should_switch_waypoint, track_errors,
    IlosState, WaypointPath,
};
use crate::mmg::{rudder_rate, state_derivative, DynamicState, ShipModel};
use crate::scenario::{GuidanceParams, Method, Scenario, SimConfig};
use crate::vo::vo_desired_heading;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Ilos,
    Reactive,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Ilos => "ilos",
            Mode::Reactive => "reactive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Collision,
    Timeout,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::Collision => "collision",
            Outcome::Timeout => "timeout",
        }
    }
}

/// The other party in a collision or encounter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Contact {
    Agent(u32),
    Obstacle(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Status {
    Active,
    /// Collided at the end of the previous step; retired after its final sample.
    Colliding(Contact, f64),
    Reached(f64),
    Collided(Contact, f64),
    TimedOut,
}

/// One vessel in the world.
#[derive(Debug, Clone)]
pub struct Agent {
    pub id: u32,
    pub method: Method,
    pub speed: f64,
    pub state: DynamicState,
    pub path: WaypointPath,
    pub ilos: IlosState,
    pub mode: Mode,
    pub psi_d: f64,
    pub delta_c: f64,
    pub y_e: f64,
    /// Largest |K| applied by the harmonic law on the last command.
    pub vortex: f64,
    status: Status,
}

impl Agent {
    pub fn is_active(&self) -> bool {
        matches!(self.status, Status::Active)
    }

    fn is_present(&self) -> bool {
        matches!(self.status, Status::Active | Status::Colliding(..))
    }
}

/// State and commands of one agent at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: DynamicState,
    pub delta_c: f64,
    pub psi_d: f64,
    pub mode: Mode,
    pub y_e: f64,
    pub vortex: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub agent_id: u32,
    pub samples: Vec<Sample>,
}

/// Distance history of one pair while inside the detection radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encounter {
    pub agent: u32,
    pub other: Contact,
    /// `[t', centre distance]` pairs.
    pub samples: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentMetrics {
    pub ce: f64,
    pub mcte: f64,
    pub time_to_goal: Option<f64>,
    /// Smallest centre distance to any other agent.
    pub min_separation: Option<f64>,
    /// Smallest distance to any static obstacle surface.
    pub min_clearance: Option<f64>,
    /// Largest vortex strength magnitude applied during the run.
    pub max_vortex: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentResult {
    pub id: u32,
    pub method: Method,
    pub outcome: Outcome,
    pub end_time: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collided_with: Option<Contact>,
    pub metrics: AgentMetrics,
}

/// Wall time spent in reactive guidance calls.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GuidanceTiming {
    pub calls: u64,
    pub nanos: u64,
}

impl GuidanceTiming {
    pub fn mean_micros(&self) -> Option<f64> {
        (self.calls > 0).then(|| self.nanos as f64 / self.calls as f64 / 1000.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub trajectories: Vec<Trajectory>,
    pub agents: Vec<AgentResult>,
    pub encounters: Vec<Encounter>,
    pub end_time: f64,
    pub timing: GuidanceTiming,
}

impl SimResult {
    pub fn agent(&self, id: u32) -> Option<&AgentResult> {
        self.agents.iter().find(|a| a.id == id)
    }

    pub fn trajectory(&self, id: u32) -> Option<&Trajectory> {
        self.trajectories.iter().find(|t| t.agent_id == id)
    }

    /// Smallest agent-agent centre distance over the run.
    pub fn min_separation(&self) -> Option<f64> {
        self.agents
            .iter()
            .filter_map(|a| a.metrics.min_separation)
            .min_by(f64::total_cmp)
    }
}

/// Everything that evolves during a run.
#[derive(Debug, Clone)]
pub struct World {
    pub model: Arc<ShipModel>,
    pub params: GuidanceParams,
    pub config: SimConfig,
    pub obstacles: Vec<StaticObstacle>,
    pub channel: Option<ChannelBoundary>,
    pub agents: Vec<Agent>,
    pub steps: u64,
    trajectories: Vec<Trajectory>,
    encounters: Vec<Encounter>,
    min_sep: Vec<Option<f64>>,
    min_clear: Vec<Option<f64>>,
    max_vortex: Vec<f64>,
    timing: GuidanceTiming,
}

impl World {
    pub fn new(scenario: &Scenario, model: Arc<ShipModel>) -> Result<Self> {
        scenario.validate()?;
        let mut specs: Vec<_> = scenario.agents.iter().collect();
        specs.sort_by_key(|a| a.id);
        let mut agents = Vec::with_capacity(specs.len());
        for spec in specs {
            let n_prop = model.self_propulsion_rpm(spec.speed)?;
            let path = WaypointPath::new(spec.path_points())?;
            agents.push(Agent {
                id: spec.id,
                method: scenario.method_of(spec),
                speed: spec.speed,
                state: DynamicState {
                    pose: Pose::new(spec.start.x, spec.start.y, spec.start.psi),
                    nu: BodyVelocity::new(spec.speed, 0.0, 0.0),
                    delta: 0.0,
                    n_prop,
                },
                path,
                ilos: IlosState::default(),
                mode: Mode::Ilos,
                psi_d: wrap_angle(spec.start.psi),
                delta_c: 0.0,
                y_e: 0.0,
                vortex: 0.0,
                status: Status::Active,
            });
        }
        let n = agents.len();
        let trajectories = agents
            .iter()
            .map(|a| Trajectory {
                agent_id: a.id,
                samples: Vec::new(),
            })
            .collect();
        let mut world = Self {
            model,
            params: scenario.params,
            config: scenario.config,
            obstacles: scenario.obstacles.clone(),
            channel: scenario.channel,
            agents,
            steps: 0,
            trajectories,
            encounters: Vec::new(),
            min_sep: vec![None; n],
            min_clear: vec![None; n],
            max_vortex: vec![0.0; n],
            timing: GuidanceTiming::default(),
        };
        world.mark_collisions(0.0);
        Ok(world)
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.config.dt
    }

    fn step_budget(&self) -> u64 {
        (self.config.max_time / self.config.dt).round() as u64
    }

    pub fn finished(&self) -> bool {
        !self.agents.iter().any(Agent::is_present) || self.steps >= self.step_budget()
    }

    /// Advances every active agent by one step.
    pub fn step(&mut self) -> Result<()> {
        let t = self.time();
        self.instant(t, false);
        self.integrate()?;
        self.steps += 1;
        self.mark_collisions(self.time());
        Ok(())
    }

    /// Runs to completion and returns the result.
    pub fn run(mut self) -> Result<SimResult> {
        while !self.finished() {
            self.step()?;
        }
        let t = self.time();
        self.instant(t, true);
        Ok(self.into_result())
    }

    fn views(&self) -> Vec<(usize, ObstacleView)> {
        self.agents
            .iter()
            .enumerate()
            .filter(|(_, a)| a.is_active())
            .map(|(i, a)| (i, ObstacleView::vessel(&a.state)))
            .collect()
    }

    /// Samples every present agent at time `t`; computes new commands unless `last`.
    fn instant(&mut self, t: f64, last: bool) {
        let views = self.views();
        let r_tol = self.params.ilos.r_tol;
        let r_safe = self.config.r_safe;
        let obstacle_views: Vec<ObstacleView> = self.obstacles.iter().map(ObstacleView::fixed).collect();

        // distances are taken over everything present at this instant
        self.record_distances(t);

        for i in 0..self.agents.len() {
            match self.agents[i].status {
                Status::Colliding(with, tc) => {
                    self.push_sample(i, t);
                    self.agents[i].status = Status::Collided(with, tc);
                    continue;
                }
                Status::Active => {}
                _ => continue,
            }
            let pos = self.agents[i].state.pose.position();
            let target = self.agents[i].path.target();
            if should_switch_waypoint(pos, target, r_tol) {
                if self.agents[i].path.on_final_segment() {
                    self.push_sample(i, t);
                    self.agents[i].status = Status::Reached(t);
                    continue;
                }
                self.agents[i].path.advance();
                self.agents[i].ilos.y_int = 0.0;
            }
            if last {
                self.push_sample(i, t);
                self.agents[i].status = Status::TimedOut;
                continue;
            }

            let mut nearby: Vec<ObstacleView> = obstacle_views
                .iter()
                .filter(|o| pos.distance(o.position) <= r_safe)
                .copied()
                .chain(
                    views
                        .iter()
                        .filter(|(j, v)| *j != i && pos.distance(v.position) <= r_safe)
                        .map(|(_, v)| *v),
                )
                .collect();
            nearby.sort_by(|a, b| {
                a.position
                    .x
                    .total_cmp(&b.position.x)
                    .then(a.position.y.total_cmp(&b.position.y))
            });
            self.command(i, &nearby);
            self.push_sample(i, t);
        }
    }

    fn command(&mut self, i: usize, nearby: &[ObstacleView]) {
        let r_safe = self.config.r_safe;
        let p = self.params;
        let channel = self.channel;
        let limits = self.model.limits;
        let a = &mut self.agents[i];
        let pos = a.state.pose.position();
        let (wp_k, wp_k1) = a.path.segment();
        let pi_p = (wp_k1 - wp_k).angle();
        let (_, y_e) = track_errors(pos, wp_k, wp_k1);
        a.y_e = y_e;
        a.vortex = 0.0;

        let reactive = reactive_active(pos, nearby, r_safe);
        if reactive {
            let started = Instant::now();
            let previous = a.psi_d;
            a.psi_d = match a.method {
                Method::ModifiedVortex | Method::SinkVortex => {
                    let law = if a.method == Method::ModifiedVortex {
                        VortexLaw::Modified
                    } else {
                        VortexLaw::Constant
                    };
                    let h = desired_heading_harmonic(
                        &a.state,
                        wp_k1,
                        nearby,
                        channel.as_ref(),
                        &p.harmonic,
                        r_safe,
                        law,
                        previous,
                    );
                    a.vortex = h.max_vortex;
                    h.psi_d
                }
                Method::InverseSquare => desired_heading_inverse_square(pos, wp_k1, nearby, &p.inverse_square, previous),
                Method::VelocityObstacle => {
                    let speed = a.state.nu.u.hypot(a.state.nu.v);
                    let speed = if speed > 1e-9 { speed } else { a.speed };
                    vo_desired_heading(pos, speed, wp_k1, nearby, &p.vo)
                }
            };
            let nanos = started.elapsed().as_nanos() as u64;
            self.timing.calls += 1;
            self.timing.nanos += nanos;
            a.mode = Mode::Reactive;
        } else {
            a.mode = Mode::Ilos;
            a.psi_d = ilos_desired_heading(pi_p, y_e, a.ilos.y_int, &p.ilos);
        }
        a.delta_c = pd_rudder_command(a.state.pose.psi, a.psi_d, a.state.nu.r, &p.pd, &limits);
        self.max_vortex[i] = self.max_vortex[i].max(a.vortex);
    }

    fn push_sample(&mut self, i: usize, t: f64) {
        let a = &self.agents[i];
        self.trajectories[i].samples.push(Sample {
            t,
            state: a.state,
            delta_c: a.delta_c,
            psi_d: a.psi_d,
            mode: a.mode,
            y_e: a.y_e,
            vortex: a.vortex,
        });
    }

    fn record_distances(&mut self, t: f64) {
        let r_safe = self.config.r_safe;
        let present: Vec<usize> = (0..self.agents.len()).filter(|&i| self.agents[i].is_present()).collect();
        for (k, &i) in present.iter().enumerate() {
            let pi = self.agents[i].state.pose.position();
            for &j in &present[k + 1..] {
                let d = pi.distance(self.agents[j].state.pose.position());
                for a in [i, j] {
                    self.min_sep[a] = Some(self.min_sep[a].map_or(d, |m: f64| m.min(d)));
                }
                if d <= r_safe {
                    let other = Contact::Agent(self.agents[j].id);
                    self.encounter(self.agents[i].id, other, t, d);
                }
            }
            for o in 0..self.obstacles.len() {
                let obs = self.obstacles[o];
                let d = pi.distance(obs.center);
                let clear = d - obs.radius;
                self.min_clear[i] = Some(self.min_clear[i].map_or(clear, |m: f64| m.min(clear)));
                if d <= r_safe {
                    self.encounter(self.agents[i].id, Contact::Obstacle(o), t, d);
                }
            }
        }
    }

    fn encounter(&mut self, agent: u32, other: Contact, t: f64, d: f64) {
        match self
            .encounters
            .iter_mut()
            .find(|e| e.agent == agent && e.other == other)
        {
            Some(e) => e.samples.push([t, d]),
            None => self.encounters.push(Encounter {
                agent,
                other,
                samples: vec![[t, d]],
            }),
        }
    }

    fn integrate(&mut self) -> Result<()> {
        let dt = self.config.dt;
        let t = self.time();
        let model = Arc::clone(&self.model);
        let ilos = self.params.ilos;
        for a in self.agents.iter_mut().filter(|a| a.is_active()) {
            let s = &a.state;
            let x0 = [s.pose.x, s.pose.y, s.pose.psi, s.nu.u, s.nu.v, s.nu.r, s.delta];
            let n_prop = s.n_prop;
            let delta_c = a.delta_c;
            let mut failure = None;
            let x1 = rk4_step(
                |x: &[f64; 7], dx: &mut [f64; 7]| {
                    let st = DynamicState {
                        pose: Pose {
                            x: x[0],
                            y: x[1],
                            psi: x[2],
                        },
                        nu: BodyVelocity::new(x[3], x[4], x[5]),
                        delta: x[6],
                        n_prop,
                    };
                    match state_derivative(&st, &model) {
                        Ok(d) => dx[..6].copy_from_slice(&d),
                        Err(e) => {
                            failure = Some(e.to_string());
                            dx.fill(f64::NAN);
                        }
                    }
                    dx[6] = rudder_rate(x[6], delta_c, &model.limits);
                },
                &x0,
                dt,
            );
            let x1 = match x1 {
                Ok(x) => x,
                Err(e) => {
                    return Err(Error::Diverged {
                        agent: a.id,
                        time: t,
                        what: failure.unwrap_or_else(|| e.to_string()),
                    })
                }
            };
            if x1.iter().any(|v| !v.is_finite()) || x1[3].abs() > self.config.speed_cap {
                return Err(Error::Diverged {
                    agent: a.id,
                    time: t + dt,
                    what: format!("surge {} outside the physical cap", x1[3]),
                });
            }
            let dmax = model.limits.delta_max;
            a.state.pose = Pose::new(x1[0], x1[1], x1[2]);
            a.state.nu = BodyVelocity::new(x1[3], x1[4], x1[5]);
            a.state.delta = x1[6].clamp(-dmax, dmax);
            if a.mode == Mode::Ilos {
                a.ilos.y_int += dt * ilos_integrator_derivative(a.y_e, a.ilos.y_int, &ilos);
            }
        }
        Ok(())
    }

    /// Flags every active agent that is now inside a collision threshold.
    fn mark_collisions(&mut self, t: f64) {
        let positions: Vec<(u32, Vec2)> = self
            .agents
            .iter()
            .filter(|a| a.is_active())
            .map(|a| (a.id, a.state.pose.position()))
            .collect();
        let hits = all_collisions(&positions, &self.obstacles, self.config.collision_threshold);
        for (id, with) in hits {
            if let Some(a) = self.agents.iter_mut().find(|a| a.id == id) {
                if a.is_active() {
                    a.status = Status::Colliding(with, t);
                }
            }
        }
    }

    fn into_result(self) -> SimResult {
        let dmax = self.model.limits.delta_max;
        let end_time = self.time();
        let agents = self
            .agents
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let traj = &self.trajectories[i];
                let (outcome, end, with, ttg) = match a.status {
                    Status::Reached(t) => (Outcome::Success, t, None, Some(t)),
                    Status::Collided(c, t) | Status::Colliding(c, t) => (Outcome::Collision, t, Some(c), None),
                    Status::TimedOut | Status::Active => (Outcome::Timeout, end_time, None, None),
                };
                AgentResult {
                    id: a.id,
                    method: a.method,
                    outcome,
                    end_time: end,
                    collided_with: with,
                    metrics: AgentMetrics {
                        ce: controller_effort(traj, dmax),
                        mcte: mean_cross_track_error(traj),
                        time_to_goal: ttg,
                        min_separation: self.min_sep[i],
                        min_clearance: self.min_clear[i],
                        max_vortex: self.max_vortex[i],
                    },
                }
            })
            .collect();
        SimResult {
            trajectories: self.trajectories,
            agents,
            encounters: self.encounters,
            end_time,
            timing: self.timing,
        }
    }
}

/// Builds the world for `scenario` and runs it.
pub fn run(scenario: &Scenario, model: Arc<ShipModel>) -> Result<SimResult> {
    World::new(scenario, model)?.run()
}

/// First colliding pair in id order, agent pairs before obstacles.
pub fn detect_collision(
    agents: &[(u32, Vec2)],
    obstacles: &[StaticObstacle],
    threshold: f64,
) -> Option<(u32, Contact)> {
    let mut sorted = agents.to_vec();
    sorted.sort_by_key(|a| a.0);
    for (k, &(ia, pa)) in sorted.iter().enumerate() {
        for &(ib, pb) in &sorted[k + 1..] {
            if pa.distance(pb) < threshold {
                return Some((ia, Contact::Agent(ib)));
            }
        }
    }
    for &(ia, pa) in &sorted {
        for (o, obs) in obstacles.iter().enumerate() {
            if pa.distance(obs.center) < threshold + obs.radius {
                return Some((ia, Contact::Obstacle(o)));
            }
        }
    }
    None
}

/// Every agent inside a threshold, paired with the nearest offending contact.
fn all_collisions(agents: &[(u32, Vec2)], obstacles: &[StaticObstacle], threshold: f64) -> Vec<(u32, Contact)> {
    let mut out = Vec::new();
    for &(ia, pa) in agents {
        let mut best: Option<(f64, Contact)> = None;
        for &(ib, pb) in agents {
            if ib == ia {
                continue;
            }
            let d = pa.distance(pb);
            if d < threshold && best.is_none_or(|(bd, _)| d - threshold < bd) {
                best = Some((d - threshold, Contact::Agent(ib)));
            }
        }
        for (o, obs) in obstacles.iter().enumerate() {
            let d = pa.distance(obs.center);
            let limit = threshold + obs.radius;
            if d < limit && best.is_none_or(|(bd, _)| d - limit < bd) {
                best = Some((d - limit, Contact::Obstacle(o)));
            }
        }
        if let Some((_, c)) = best {
            out.push((ia, c));
        }
    }
    out
}

fn trapezoid(samples: &[Sample], f: impl Fn(&Sample) -> f64) -> (f64, f64) {
    let mut area = 0.0;
    for w in samples.windows(2) {
        area += 0.5 * (f(&w[0]) + f(&w[1])) * (w[1].t - w[0].t);
    }
    let span = match (samples.first(), samples.last()) {
        (Some(a), Some(b)) => b.t - a.t,
        _ => 0.0,
    };
    (area, span)
}

/// Time-averaged |rudder| normalised by the saturation angle.
pub fn controller_effort(traj: &Trajectory, delta_max: f64) -> f64 {
    let (area, span) = trapezoid(&traj.samples, |s| s.state.delta.abs());
    if span > 0.0 {
        area / (delta_max * span)
    } else {
        0.0
    }
}

/// Time-averaged |cross-track error| in ship lengths.
pub fn mean_cross_track_error(traj: &Trajectory) -> f64 {
    let (area, span) = trapezoid(&traj.samples, |s| s.y_e.abs());
    if span > 0.0 {
        area / span
    } else {
        0.0
    }
}

/// Outcome of every agent, in id order.
pub fn classify_outcome(result: &SimResult) -> Vec<(u32, Outcome)> {
    result.agents.iter().map(|a| (a.id, a.outcome)).collect()
}
