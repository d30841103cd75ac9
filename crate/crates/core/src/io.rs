//! Trajectory CSV, result JSON and timing files.

use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{AgentResult, Encounter, GuidanceTiming, Mode, Outcome, SimResult};

/// Column order of the trajectory CSV.
pub const TRAJECTORY_COLUMNS: [&str; 13] = [
    "t_prime",
    "agent_id",
    "x_L",
    "y_L",
    "psi_rad",
    "u_nd",
    "v_nd",
    "r_nd",
    "delta_rad",
    "delta_c_rad",
    "psi_d_rad",
    "mode",
    "y_e_L",
];

pub const RESULT_SCHEMA_ID: &str = "asv-apf/result/1";

/// Result document schema shipped with the crate.
pub const RESULT_SCHEMA: &str = include_str!("../schemas/result.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t_prime: f64,
    pub agent_id: u32,
    #[serde(rename = "x_L")]
    pub x: f64,
    #[serde(rename = "y_L")]
    pub y: f64,
    #[serde(rename = "psi_rad")]
    pub psi: f64,
    #[serde(rename = "u_nd")]
    pub u: f64,
    #[serde(rename = "v_nd")]
    pub v: f64,
    #[serde(rename = "r_nd")]
    pub r: f64,
    #[serde(rename = "delta_rad")]
    pub delta: f64,
    #[serde(rename = "delta_c_rad")]
    pub delta_c: f64,
    #[serde(rename = "psi_d_rad")]
    pub psi_d: f64,
    pub mode: Mode,
    #[serde(rename = "y_e_L")]
    pub y_e: f64,
}

/// Rows ordered by time, then agent id.
pub fn trajectory_rows(result: &SimResult) -> Vec<TrajectoryRow> {
    let mut rows: Vec<TrajectoryRow> = result
        .trajectories
        .iter()
        .flat_map(|tr| {
            tr.samples.iter().map(move |s| TrajectoryRow {
                t_prime: s.t,
                agent_id: tr.agent_id,
                x: s.state.pose.x,
                y: s.state.pose.y,
                psi: s.state.pose.psi,
                u: s.state.nu.u,
                v: s.state.nu.v,
                r: s.state.nu.r,
                delta: s.state.delta,
                delta_c: s.delta_c,
                psi_d: s.psi_d,
                mode: s.mode,
                y_e: s.y_e,
            })
        })
        .collect();
    rows.sort_by(|a, b| a.t_prime.total_cmp(&b.t_prime).then(a.agent_id.cmp(&b.agent_id)));
    rows
}

pub fn write_trajectory_csv(result: &SimResult, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in trajectory_rows(result) {
        w.serialize(row)?;
    }
    if result.trajectories.iter().all(|t| t.samples.is_empty()) {
        w.write_record(TRAJECTORY_COLUMNS)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Parses a trajectory CSV, rejecting any header other than the frozen one.
pub fn read_trajectory_csv(input: impl Read) -> Result<Vec<TrajectoryRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != TRAJECTORY_COLUMNS {
        return Err(Error::invalid(
            "csv header",
            format!("expected {}, found {}", TRAJECTORY_COLUMNS.join(","), header.join(",")),
        ));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn read_trajectory_file(path: impl AsRef<Path>) -> Result<Vec<TrajectoryRow>> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_trajectory_csv(f)
}

/// Serialisable summary of one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub schema: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    /// Outcome of the lowest-id agent.
    pub outcome: Outcome,
    pub end_time: f64,
    pub min_separation: Option<f64>,
    pub agents: Vec<AgentResult>,
    pub encounters: Vec<Encounter>,
}

impl ResultDocument {
    pub fn new(name: Option<&str>, result: &SimResult) -> Self {
        Self {
            schema: RESULT_SCHEMA_ID.to_string(),
            scenario: name.map(str::to_string),
            outcome: result.agents[0].outcome,
            end_time: result.end_time,
            min_separation: result.min_separation(),
            agents: result.agents.clone(),
            encounters: result.encounters.clone(),
        }
    }
}

/// Wall-clock cost of reactive guidance, kept apart from deterministic output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub guidance_calls: u64,
    pub guidance_nanos: u64,
    pub mean_call_micros: Option<f64>,
}

impl From<GuidanceTiming> for TimingReport {
    fn from(t: GuidanceTiming) -> Self {
        Self {
            guidance_calls: t.calls,
            guidance_nanos: t.nanos,
            mean_call_micros: t.mean_micros(),
        }
    }
}

pub fn create_dir(path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

pub fn write_json(path: impl AsRef<Path>, value: &impl Serialize) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_trajectory_file(path: impl AsRef<Path>, result: &SimResult) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_trajectory_csv(result, BufWriter::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mmg::ShipModel;
    use crate::scenario::{library, Method};
    use std::sync::Arc;

    fn head_on() -> SimResult {
        let mut sc = library::head_on(Method::ModifiedVortex);
        sc.config.max_time = 3.0;
        crate::sim::run(&sc, Arc::new(ShipModel::kcs())).unwrap()
    }

    #[test]
    fn header_is_frozen() {
        let mut buf = Vec::new();
        write_trajectory_csv(&head_on(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "t_prime,agent_id,x_L,y_L,psi_rad,u_nd,v_nd,r_nd,delta_rad,delta_c_rad,psi_d_rad,mode,y_e_L"
        );
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let r = head_on();
        let mut buf = Vec::new();
        write_trajectory_csv(&r, &mut buf).unwrap();
        let rows = read_trajectory_csv(buf.as_slice()).unwrap();
        assert_eq!(rows, trajectory_rows(&r));
        assert_eq!(rows.len(), 2 * 31);
        assert_eq!((rows[0].agent_id, rows[1].agent_id), (0, 1));
    }

    #[test]
    fn wrong_header_rejected() {
        let text = "t,agent_id\n0,0\n";
        assert!(read_trajectory_csv(text.as_bytes()).is_err());
    }

    #[test]
    fn result_document_fields() {
        let doc = ResultDocument::new(Some("head_on"), &head_on());
        let v = serde_json::to_value(&doc).unwrap();
        assert_eq!(v["schema"], RESULT_SCHEMA_ID);
        assert_eq!(v["outcome"], "timeout");
        assert_eq!(v["agents"].as_array().unwrap().len(), 2);
        let schema: serde_json::Value = serde_json::from_str(RESULT_SCHEMA).unwrap();
        assert_eq!(schema["$id"], RESULT_SCHEMA_ID);
    }
}
