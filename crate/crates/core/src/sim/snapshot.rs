//! Line-oriented text form of a scene: one vehicle per line.
//!
//! ```text
//! # t=12.5
//! id,x,y,v,psi,lane,is_ego
//! 0,120.25,6,27.5,0,1,1
//! 7,151,6,24,0,1,0
//! ```

use std::fmt::Write as _;
use std::str::FromStr;

use super::road::RoadConfig;
use super::scene::{Scene, TrafficConfig};
use super::vehicle::VehicleState;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const HEADER: &str = "id,x,y,v,psi,lane,is_ego";

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotRow<T> {
    pub id: u32,
    pub x: T,
    pub y: T,
    pub v: T,
    pub psi: T,
    pub lane: usize,
    pub is_ego: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSnapshot<T> {
    pub t: T,
    pub rows: Vec<SnapshotRow<T>>,
}

impl<T: Scalar> SceneSnapshot<T> {
    pub fn of(scene: &Scene<T>) -> Self {
        let rows = scene
            .vehicles()
            .iter()
            .map(|v| {
                let s = &v.state;
                SnapshotRow {
                    id: s.id,
                    x: s.x,
                    y: s.y,
                    v: s.v,
                    psi: s.psi,
                    lane: s.lane,
                    is_ego: s.is_ego,
                }
            })
            .collect();
        SceneSnapshot { t: scene.t, rows }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# t={}\n{HEADER}\n", self.t);
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.id,
                r.x,
                r.y,
                r.v,
                r.psi,
                r.lane,
                u8::from(r.is_ego)
            );
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut t = T::zero();
        let mut rows = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(value) = comment.trim().strip_prefix("t=") {
                    t = parse_field(value, "t", line_no)?;
                }
                continue;
            }
            if line == HEADER {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 7 {
                return Err(Error::Snapshot {
                    line: line_no,
                    message: format!("expected 7 fields, found {}", fields.len()),
                });
            }
            let is_ego = match fields[6] {
                "1" | "true" => true,
                "0" | "false" => false,
                other => {
                    return Err(Error::Snapshot {
                        line: line_no,
                        message: format!("is_ego must be 0/1, got `{other}`"),
                    })
                }
            };
            rows.push(SnapshotRow {
                id: parse_field(fields[0], "id", line_no)?,
                x: parse_field(fields[1], "x", line_no)?,
                y: parse_field(fields[2], "y", line_no)?,
                v: parse_field(fields[3], "v", line_no)?,
                psi: parse_field(fields[4], "psi", line_no)?,
                lane: parse_field(fields[5], "lane", line_no)?,
                is_ego,
            });
        }
        Ok(SceneSnapshot { t, rows })
    }

    /// Rebuilds a scene, taking footprints and limits from `traffic`.
    pub fn into_scene(self, road: RoadConfig<T>, traffic: TrafficConfig<T>) -> Result<Scene<T>> {
        let states = self
            .rows
            .iter()
            .map(|r| VehicleState {
                id: r.id,
                x: r.x,
                y: r.y,
                v: r.v,
                psi: r.psi,
                lane: r.lane,
                length: traffic.vehicle_length,
                width: traffic.vehicle_width,
                a_max: if r.is_ego {
                    traffic.ego_a_max
                } else {
                    traffic.ambient_a_max
                },
                is_ego: r.is_ego,
            })
            .collect();
        let mut scene = Scene::from_states(road, traffic, states, 0)?;
        scene.t = self.t;
        Ok(scene)
    }
}

fn parse_field<V: FromStr>(text: &str, name: &str, line: usize) -> Result<V> {
    text.parse().map_err(|_| Error::Snapshot {
        line,
        message: format!("cannot parse {name} from `{text}`"),
    })
}
