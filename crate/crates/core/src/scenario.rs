//! Scenario description: agents, obstacles, channel, parameters and run config.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::apf::{ChannelBoundary, HarmonicParams, InverseSquareParams, StaticObstacle};
use crate::error::{Error, Result};
use crate::frames::{Pose, Vec2};
use crate::guidance::{IlosParams, PdGains};
use crate::mmg::ShipModel;
use crate::vo::VoParams;

/// Reactive guidance law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "mvortex", alias = "apf_mvortex")]
    ModifiedVortex,
    #[serde(rename = "sinkvortex", alias = "apf_sinkvortex")]
    SinkVortex,
    #[serde(rename = "inverse", alias = "apf_inverse")]
    InverseSquare,
    #[serde(rename = "vo", alias = "velocity_obstacle")]
    VelocityObstacle,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::ModifiedVortex,
        Method::SinkVortex,
        Method::InverseSquare,
        Method::VelocityObstacle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::ModifiedVortex => "mvortex",
            Method::SinkVortex => "sinkvortex",
            Method::InverseSquare => "inverse",
            Method::VelocityObstacle => "vo",
        }
    }

    pub fn is_harmonic(self) -> bool {
        matches!(self, Method::ModifiedVortex | Method::SinkVortex)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mvortex" | "apf_mvortex" => Ok(Method::ModifiedVortex),
            "sinkvortex" | "apf_sinkvortex" => Ok(Method::SinkVortex),
            "inverse" | "apf_inverse" => Ok(Method::InverseSquare),
            "vo" | "velocity_obstacle" => Ok(Method::VelocityObstacle),
            other => Err(Error::invalid(
                "method",
                format!("unknown method `{other}` (expected mvortex, sinkvortex, inverse or vo)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    /// Integration step (nondimensional time).
    pub dt: f64,
    pub max_time: f64,
    /// Ship-ship distance below which a collision is declared (L).
    pub collision_threshold: f64,
    /// Detection radius (L).
    pub r_safe: f64,
    /// Surge magnitude treated as integrator blow-up.
    pub speed_cap: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            max_time: 400.0,
            collision_threshold: 2.0,
            r_safe: 15.0,
            speed_cap: 2.0,
            seed: 0,
        }
    }
}

/// Guidance, control and reactive-law parameters; omitted blocks take defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GuidanceParams {
    pub ilos: IlosParams,
    pub pd: PdGains,
    pub inverse_square: InverseSquareParams,
    pub harmonic: HarmonicParams,
    pub vo: VoParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub id: u32,
    pub start: Pose,
    /// Assigned speed as a fraction of design speed.
    pub speed: f64,
    /// Waypoints to track after the start position; the last one is the goal.
    pub waypoints: Vec<Vec2>,
    /// Overrides the scenario-wide method for this agent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
}

impl AgentSpec {
    /// Start position followed by the waypoints.
    pub fn path_points(&self) -> Vec<Vec2> {
        let mut pts = Vec::with_capacity(self.waypoints.len() + 1);
        pts.push(self.start.position());
        pts.extend_from_slice(&self.waypoints);
        pts
    }

    pub fn goal(&self) -> Vec2 {
        *self.waypoints.last().unwrap_or(&self.start.position())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Coefficient file, relative to the scenario file; the bundled KCS table when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ship_file: Option<PathBuf>,
    #[serde(default = "default_method")]
    pub method: Method,
    pub agents: Vec<AgentSpec>,
    #[serde(default)]
    pub obstacles: Vec<StaticObstacle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelBoundary>,
    #[serde(default)]
    pub params: GuidanceParams,
    #[serde(default)]
    pub config: SimConfig,
}

fn default_method() -> Method {
    Method::ModifiedVortex
}

impl Scenario {
    pub fn new(agents: Vec<AgentSpec>, method: Method) -> Self {
        Self {
            name: None,
            ship_file: None,
            method,
            agents,
            obstacles: Vec::new(),
            channel: None,
            params: GuidanceParams::default(),
            config: SimConfig::default(),
        }
    }

    pub fn method_of(&self, agent: &AgentSpec) -> Method {
        agent.method.unwrap_or(self.method)
    }

    /// Every invariant violation, each prefixed with its field path.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut push = |field: String, msg: &str| out.push(format!("{field}: {msg}"));

        let c = &self.config;
        if !(c.dt > 0.0 && c.dt.is_finite()) {
            push("config.dt".into(), "must be positive");
        }
        if !(c.max_time > c.dt) {
            push("config.max_time".into(), "must exceed dt");
        }
        if !(c.collision_threshold > 0.0) {
            push("config.collision_threshold".into(), "must be positive");
        }
        if !(c.r_safe > 0.0) {
            push("config.r_safe".into(), "must be positive");
        }
        if !(c.speed_cap > 0.0) {
            push("config.speed_cap".into(), "must be positive");
        }
        let p = &self.params;
        let blocks: [(&str, Result<()>); 5] = [
            ("params.ilos", p.ilos.validate()),
            ("params.pd", p.pd.validate()),
            ("params.inverse_square", p.inverse_square.validate()),
            ("params.harmonic", p.harmonic.validate()),
            ("params.vo", p.vo.validate()),
        ];
        for (name, r) in blocks {
            if let Err(e) = r {
                push(name.into(), &e.to_string());
            }
        }

        if self.agents.is_empty() {
            push("agents".into(), "at least one agent is required");
        }
        let mut ids: Vec<u32> = self.agents.iter().map(|a| a.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            push("agents".into(), "agent ids must be unique");
        }
        for (i, a) in self.agents.iter().enumerate() {
            let f = |s: &str| format!("agents[{i}].{s}");
            if !(a.speed > 0.0 && a.speed <= 1.0) {
                push(f("speed"), "must lie in (0, 1]");
            }
            if !(a.start.x.is_finite() && a.start.y.is_finite() && a.start.psi.is_finite()) {
                push(f("start"), "must be finite");
            }
            if a.waypoints.is_empty() {
                push(f("waypoints"), "at least one waypoint is required");
            } else if let Err(e) = crate::guidance::WaypointPath::new(a.path_points()) {
                push(f("waypoints"), &e.to_string());
            }
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if !(o.radius > 0.0) {
                push(format!("obstacles[{i}].radius"), "must be positive");
            }
            if !o.center.is_finite() {
                push(format!("obstacles[{i}].center"), "must be finite");
            }
        }
        if let Some(ch) = &self.channel {
            if let Err(e) = ch.validate() {
                push("channel".into(), &e.to_string());
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let sc: Scenario = serde_json::from_str(s)?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Reads and validates a scenario file.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    /// Ship model named by `ship_file` (resolved against `base_dir`), or the bundled table.
    pub fn ship_model(&self, base_dir: Option<&Path>) -> Result<ShipModel> {
        match &self.ship_file {
            None => Ok(ShipModel::kcs()),
            Some(p) if p.is_absolute() => ShipModel::from_path(p),
            Some(p) => ShipModel::from_path(base_dir.unwrap_or(Path::new(".")).join(p)),
        }
    }
}

/// Named scenes used in the examples and acceptance checks.
pub mod library {
    use super::*;

    fn agent(id: u32, start: Vec2, speed: f64, waypoints: Vec<Vec2>) -> AgentSpec {
        let first = waypoints[0];
        AgentSpec {
            id,
            start: Pose::new(start.x, start.y, (first - start).angle()),
            speed,
            waypoints,
            method: None,
        }
    }

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    /// Four-waypoint square tracked from the origin.
    pub fn square(side: f64) -> Scenario {
        let mut s = Scenario::new(
            vec![agent(
                0,
                v(0.0, 0.0),
                1.0,
                vec![v(side, 0.0), v(side, side), v(0.0, side), v(0.0, 0.0)],
            )],
            Method::ModifiedVortex,
        );
        s.name = Some("square".into());
        s
    }

    /// Single static obstacle on the track to `goal_x`.
    pub fn static_obstacle(goal_x: f64, method: Method) -> Scenario {
        let mut s = Scenario::new(vec![agent(0, v(0.0, 0.0), 1.0, vec![v(goal_x, 0.0)])], method);
        s.obstacles.push(StaticObstacle {
            center: v(25.0, 0.0),
            radius: 0.5,
        });
        s.name = Some(format!("static_obstacle_{goal_x}"));
        s
    }

    pub fn head_on(method: Method) -> Scenario {
        let mut s = Scenario::new(
            vec![
                agent(0, v(0.0, 0.0), 1.0, vec![v(50.0, 0.0)]),
                agent(1, v(50.0, 0.0), 1.0, vec![v(0.0, 0.0)]),
            ],
            method,
        );
        s.name = Some("head_on".into());
        s
    }

    /// Agent 0 gives way to agent 1 approaching from its starboard side.
    pub fn crossing(method: Method) -> Scenario {
        let mut s = Scenario::new(
            vec![
                agent(0, v(0.0, 0.0), 1.0, vec![v(50.0, 0.0)]),
                agent(1, v(25.0, 25.0), 1.0, vec![v(25.0, -25.0)]),
            ],
            method,
        );
        s.name = Some("crossing".into());
        s
    }

    /// Agent 0 at design speed overtakes agent 1 at half speed, which runs
    /// 8 L off to agent 0's starboard side.
    pub fn overtaking(method: Method) -> Scenario {
        let mut s = Scenario::new(
            vec![
                agent(0, v(0.0, 0.0), 1.0, vec![v(80.0, 0.0)]),
                agent(1, v(15.0, 8.0), 0.5, vec![v(80.0, 8.0)]),
            ],
            method,
        );
        s.name = Some("overtaking".into());
        s
    }

    /// Three ships converging on (20, 0) with conflicting give-way duties.
    pub fn three_ship(method: Method) -> Scenario {
        let mut s = Scenario::new(
            vec![
                agent(0, v(0.0, 0.0), 0.5, vec![v(60.0, 0.0)]),
                agent(1, v(-20.0, 0.0), 1.0, vec![v(100.0, 0.0)]),
                agent(2, v(60.0, 0.0), 1.0, vec![v(0.0, 0.0)]),
            ],
            method,
        );
        s.name = Some("three_ship".into());
        s
    }

    /// Head-on meeting in a 10 L wide channel along the diagonal.
    pub fn narrow_channel(method: Method) -> Scenario {
        let a = v(0.0, 0.0);
        let b = v(50.0, 50.0);
        let mut s = Scenario::new(
            vec![agent(0, a, 1.0, vec![b]), agent(1, b, 1.0, vec![a])],
            method,
        );
        s.channel = Some(ChannelBoundary::straight(a, b, 10.0));
        s.name = Some("narrow_channel".into());
        s
    }
}
