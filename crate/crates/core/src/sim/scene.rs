use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::collision::{detect_collision, CollisionReport};
use super::idm::{bumper_gap, idm_acceleration, IdmParams};
use super::road::RoadConfig;
use super::vehicle::{advance_vehicle, Controls, VehicleState};
use crate::error::{Error, Result};
use crate::scalar::{clamp, Scalar};

/// Ambient traffic generation and behaviour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrafficConfig<T> {
    /// Ambient vehicles placed at reset.
    pub n_vehicles: usize,
    /// Traffic is kept inside `[ego.x - window_behind, ego.x + window_ahead]`.
    pub window_behind: T,
    pub window_ahead: T,
    /// Recycle vehicles that leave the window to its opposite edge.
    pub respawn: bool,
    /// Minimum longitudinal distance to any lane occupant when respawning (m).
    pub respawn_clearance: T,
    pub v0_min: T,
    pub v0_max: T,
    pub time_headway: T,
    pub s0: T,
    pub idm_accel: T,
    pub b_comf: T,
    pub delta: T,
    pub ambient_a_max: T,
    pub ego_a_max: T,
    pub vehicle_length: T,
    pub vehicle_width: T,
    pub lane_changes: bool,
    /// Duration of an ambient lane change (s).
    pub lane_change_duration: T,
    /// Acceleration gain (m/s²) needed before an ambient driver changes lane.
    pub lane_change_threshold: T,
    pub lane_change_probability: f64,
    /// Largest braking the maneuver may impose on the new follower (m/s²).
    pub lane_change_safe_decel: T,
    /// Interval between ambient lane-change decisions (s).
    pub decision_interval: T,
    /// Proportional lane-keeping gain (1/s).
    pub lateral_gain: T,
    pub ego_initial_speed: T,
    pub ego_clearance_same_lane: T,
    pub ego_clearance_other_lane: T,
}

impl<T: Scalar> Default for TrafficConfig<T> {
    fn default() -> Self {
        Self {
            n_vehicles: 20,
            window_behind: T::lit(250.0),
            window_ahead: T::lit(350.0),
            respawn: true,
            respawn_clearance: T::lit(60.0),
            v0_min: T::lit(21.0),
            v0_max: T::lit(29.0),
            time_headway: T::lit(1.5),
            s0: T::lit(2.0),
            idm_accel: T::lit(3.0),
            b_comf: T::lit(5.0),
            delta: T::lit(4.0),
            ambient_a_max: T::lit(6.0),
            ego_a_max: T::lit(4.0),
            vehicle_length: T::lit(5.0),
            vehicle_width: T::lit(2.0),
            lane_changes: true,
            lane_change_duration: T::lit(3.0),
            lane_change_threshold: T::lit(0.2),
            lane_change_probability: 0.5,
            lane_change_safe_decel: T::lit(2.0),
            decision_interval: T::lit(1.0),
            lateral_gain: T::lit(1.0),
            ego_initial_speed: T::lit(25.0),
            ego_clearance_same_lane: T::lit(40.0),
            ego_clearance_other_lane: T::lit(20.0),
        }
    }
}

impl<T: Scalar> TrafficConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("traffic.window_behind", self.window_behind),
            ("traffic.window_ahead", self.window_ahead),
            ("traffic.v0_min", self.v0_min),
            ("traffic.time_headway", self.time_headway),
            ("traffic.s0", self.s0),
            ("traffic.idm_accel", self.idm_accel),
            ("traffic.b_comf", self.b_comf),
            ("traffic.ambient_a_max", self.ambient_a_max),
            ("traffic.ego_a_max", self.ego_a_max),
            ("traffic.vehicle_length", self.vehicle_length),
            ("traffic.vehicle_width", self.vehicle_width),
            ("traffic.lane_change_duration", self.lane_change_duration),
            ("traffic.decision_interval", self.decision_interval),
            ("traffic.lateral_gain", self.lateral_gain),
        ];
        for (path, value) in positive {
            if !(value.is_finite() && value > T::zero()) {
                return Err(Error::config(path, format!("must be positive, got {value}")));
            }
        }
        if self.v0_max < self.v0_min {
            return Err(Error::config("traffic.v0_max", "must not be below v0_min"));
        }
        if self.delta < T::one() {
            return Err(Error::config("traffic.delta", "IDM exponent must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.lane_change_probability) {
            return Err(Error::config("traffic.lane_change_probability", "must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn idm(&self, v0: T) -> IdmParams<T> {
        IdmParams {
            v0,
            time_headway: self.time_headway,
            s0: self.s0,
            a: self.idm_accel,
            b_comf: self.b_comf,
            delta: self.delta,
        }
    }
}

/// An ambient lane change in progress.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaneChange<T> {
    pub from_y: T,
    pub to_lane: usize,
    pub elapsed: T,
    pub duration: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Driver<T> {
    pub idm: IdmParams<T>,
    pub lane_change: Option<LaneChange<T>>,
    pub next_decision: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vehicle<T> {
    pub state: VehicleState<T>,
    pub driver: Driver<T>,
}

/// The simulated world. The ego vehicle is always stored first.
#[derive(Debug, Clone)]
pub struct Scene<T> {
    vehicles: Vec<Vehicle<T>>,
    pub t: T,
    pub road: RoadConfig<T>,
    pub traffic: TrafficConfig<T>,
    rng: ChaCha8Rng,
    next_id: u32,
    spawned: usize,
}

fn smoothstep<T: Scalar>(u: T) -> T {
    let u = clamp(u, T::zero(), T::one());
    u * u * (T::lit(3.0) - T::two() * u)
}

/// Heading rate that moves the vehicle laterally to `y_ref` over the next step,
/// within the heading bound.
pub fn heading_rate_toward<T: Scalar>(me: &VehicleState<T>, y_ref: T, dt: T, psi_max: T) -> T {
    let travel = me.v * dt;
    let psi_des = if travel <= T::lit(1e-6) {
        T::zero()
    } else {
        let s = psi_max.sin();
        clamp((y_ref - me.y) / travel, -s, s).asin()
    };
    (psi_des - me.psi) / dt
}

/// Whether the footprint's lateral extent overlaps `lane`.
pub fn occupies<T: Scalar>(s: &VehicleState<T>, lane: usize, road: &RoadConfig<T>) -> bool {
    let (right, left) = road.lane_bounds(lane);
    let half = s.width * T::half();
    s.y + half > right && s.y - half < left
}

impl<T: Scalar> Scene<T> {
    /// Draws a fresh scene: ego at the origin, ambient traffic scattered through the window.
    pub fn generate(road: RoadConfig<T>, traffic: TrafficConfig<T>, seed: u64) -> Result<Self> {
        road.validate()?;
        traffic.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ego_lane = rng.gen_range(0..road.n_lanes);
        let ego = Vehicle {
            state: VehicleState {
                id: 0,
                x: T::zero(),
                y: road.lane_center(ego_lane),
                v: traffic.ego_initial_speed,
                psi: T::zero(),
                lane: ego_lane,
                length: traffic.vehicle_length,
                width: traffic.vehicle_width,
                a_max: traffic.ego_a_max,
                is_ego: true,
            },
            driver: Driver {
                idm: traffic.idm(traffic.ego_initial_speed),
                lane_change: None,
                next_decision: T::zero(),
            },
        };
        let mut scene = Scene {
            vehicles: vec![ego],
            t: T::zero(),
            road,
            traffic,
            rng,
            next_id: 1,
            spawned: 0,
        };

        let lo = -traffic.window_behind.as_f64();
        let hi = traffic.window_ahead.as_f64();
        for _ in 0..traffic.n_vehicles {
            for _attempt in 0..200 {
                let lane = scene.rng.gen_range(0..road.n_lanes);
                let x = T::lit(scene.rng.gen_range(lo..hi));
                let v0 = scene.draw_v0();
                if scene.placement_ok(lane, x, v0) {
                    scene.push_ambient(lane, x, v0);
                    break;
                }
            }
        }
        Ok(scene)
    }

    /// Builds a scene from explicit vehicles. Exactly one must be the ego.
    pub fn from_vehicles(
        road: RoadConfig<T>,
        traffic: TrafficConfig<T>,
        vehicles: Vec<Vehicle<T>>,
        seed: u64,
    ) -> Result<Self> {
        road.validate()?;
        traffic.validate()?;
        let egos = vehicles.iter().filter(|v| v.state.is_ego).count();
        if egos != 1 {
            return Err(Error::validation(format!("scene needs exactly one ego, found {egos}")));
        }
        for v in &vehicles {
            v.state.validate()?;
        }
        let mut vehicles = vehicles;
        let ego_pos = vehicles.iter().position(|v| v.state.is_ego).unwrap();
        vehicles.swap(0, ego_pos);
        let next_id = vehicles.iter().map(|v| v.state.id).max().unwrap_or(0) + 1;
        Ok(Scene {
            vehicles,
            t: T::zero(),
            road,
            traffic,
            rng: ChaCha8Rng::seed_from_u64(seed),
            next_id,
            spawned: 0,
        })
    }

    /// Like [`Scene::from_vehicles`], attaching default drivers (IDM desired speed equal
    /// to the current speed, clamped to the configured range).
    pub fn from_states(
        road: RoadConfig<T>,
        traffic: TrafficConfig<T>,
        states: Vec<VehicleState<T>>,
        seed: u64,
    ) -> Result<Self> {
        let vehicles = states
            .into_iter()
            .map(|state| Vehicle {
                state,
                driver: Driver {
                    idm: traffic.idm(clamp(state.v, traffic.v0_min, traffic.v0_max)),
                    lane_change: None,
                    next_decision: T::zero(),
                },
            })
            .collect();
        Self::from_vehicles(road, traffic, vehicles, seed)
    }

    /// A vehicle state with this scene's default footprint and limits.
    pub fn make_state(traffic: &TrafficConfig<T>, road: &RoadConfig<T>, id: u32, x: T, lane: usize, v: T, is_ego: bool) -> VehicleState<T> {
        VehicleState {
            id,
            x,
            y: road.lane_center(lane),
            v,
            psi: T::zero(),
            lane,
            length: traffic.vehicle_length,
            width: traffic.vehicle_width,
            a_max: if is_ego { traffic.ego_a_max } else { traffic.ambient_a_max },
            is_ego,
        }
    }

    fn draw_v0(&mut self) -> T {
        let lo = self.traffic.v0_min.as_f64();
        let hi = self.traffic.v0_max.as_f64();
        if hi > lo {
            T::lit(self.rng.gen_range(lo..hi))
        } else {
            T::lit(lo)
        }
    }

    fn placement_ok(&self, lane: usize, x: T, v: T) -> bool {
        let tr = &self.traffic;
        let ego = self.ego();
        let dx_ego = (x - ego.x).abs();
        if lane == ego.lane && dx_ego < tr.ego_clearance_same_lane {
            return false;
        }
        if dx_ego < tr.ego_clearance_other_lane {
            return false;
        }
        self.vehicles.iter().skip(1).all(|o| {
            if !occupies(&o.state, lane, &self.road) {
                return true;
            }
            let spacing = tr.vehicle_length + tr.s0 + v.max(o.state.v) * tr.time_headway;
            (x - o.state.x).abs() >= spacing
        })
    }

    fn push_ambient(&mut self, lane: usize, x: T, v0: T) {
        let state = Self::make_state(&self.traffic, &self.road, self.next_id, x, lane, v0, false);
        let offset = T::lit(self.rng.gen_range(0.0..1.0)) * self.traffic.decision_interval;
        self.vehicles.push(Vehicle {
            state,
            driver: Driver {
                idm: self.traffic.idm(v0),
                lane_change: None,
                next_decision: self.t + offset,
            },
        });
        self.next_id += 1;
        self.spawned += 1;
    }

    pub fn ego(&self) -> &VehicleState<T> {
        &self.vehicles[0].state
    }

    pub fn vehicles(&self) -> &[Vehicle<T>] {
        &self.vehicles
    }

    pub fn states(&self) -> Vec<VehicleState<T>> {
        self.vehicles.iter().map(|v| v.state).collect()
    }

    /// Ambient vehicles created so far, including those placed at reset.
    pub fn total_spawned(&self) -> usize {
        self.spawned
    }

    pub fn collision(&self) -> CollisionReport {
        detect_collision(&self.states())
    }

    /// Up to `k` other vehicles within `range` of the ego, nearest first (ties by id).
    pub fn nearest_neighbors(&self, k: usize, range: T) -> Vec<(VehicleState<T>, T)> {
        let ego = *self.ego();
        let mut found: Vec<(VehicleState<T>, T)> = self
            .vehicles
            .iter()
            .skip(1)
            .map(|v| {
                let d = (v.state.x - ego.x).hypot(v.state.y - ego.y);
                (v.state, d)
            })
            .filter(|(_, d)| *d <= range)
            .collect();
        found.sort_by(|a, b| {
            a.1.partial_cmp(&b.1)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.0.id.cmp(&b.0.id))
        });
        found.truncate(k);
        found
    }

    fn corridor(&self) -> T {
        self.road.lane_width * T::lit(0.75)
    }

    /// Whether `j` constrains `i` longitudinally.
    fn in_conflict(&self, i: usize, j: usize) -> bool {
        let a = &self.vehicles[i];
        let b = &self.vehicles[j];
        if (a.state.y - b.state.y).abs() < self.corridor() {
            return true;
        }
        if let Some(lc) = a.driver.lane_change {
            if occupies(&b.state, lc.to_lane, &self.road) {
                return true;
            }
        }
        if let Some(lc) = b.driver.lane_change {
            if occupies(&a.state, lc.to_lane, &self.road) {
                return true;
            }
        }
        false
    }

    /// Nearest vehicle ahead of `i` that shares its corridor.
    pub fn leader_of(&self, i: usize) -> Option<usize> {
        let me = &self.vehicles[i].state;
        let mut best: Option<(usize, T)> = None;
        for (j, other) in self.vehicles.iter().enumerate() {
            if j == i || other.state.x <= me.x || !self.in_conflict(i, j) {
                continue;
            }
            let dx = other.state.x - me.x;
            if best.is_none_or(|(_, d)| dx < d) {
                best = Some((j, dx));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Nearest occupants of `lane` ahead of and behind vehicle `i`.
    fn lane_neighbors(&self, i: usize, lane: usize) -> (Option<usize>, Option<usize>) {
        let me = &self.vehicles[i].state;
        let mut lead: Option<(usize, T)> = None;
        let mut follow: Option<(usize, T)> = None;
        for (j, other) in self.vehicles.iter().enumerate() {
            if j == i {
                continue;
            }
            let in_lane = occupies(&other.state, lane, &self.road)
                || other.driver.lane_change.is_some_and(|lc| lc.to_lane == lane);
            if !in_lane {
                continue;
            }
            let dx = other.state.x - me.x;
            if dx >= T::zero() {
                if lead.is_none_or(|(_, d)| dx < d) {
                    lead = Some((j, dx));
                }
            } else if follow.is_none_or(|(_, d)| -dx < d) {
                follow = Some((j, -dx));
            }
        }
        (lead.map(|p| p.0), follow.map(|p| p.0))
    }

    fn ambient_controls(&self, i: usize, dt: T) -> Controls<T> {
        let veh = &self.vehicles[i];
        let me = &veh.state;
        let leader = self.leader_of(i).map(|j| &self.vehicles[j].state);
        let accel = idm_acceleration(me, leader, &veh.driver.idm);
        let y_ref = match veh.driver.lane_change {
            Some(lc) => {
                let target = self.road.lane_center(lc.to_lane);
                let u = (lc.elapsed + dt) / lc.duration;
                lc.from_y + (target - lc.from_y) * smoothstep(u)
            }
            None => {
                let center = self.road.lane_center(me.lane);
                let gain = (self.traffic.lateral_gain * dt).min(T::one());
                me.y + (center - me.y) * gain
            }
        };
        let heading_rate = heading_rate_toward(me, y_ref, dt, self.road.psi_max);
        Controls::new(accel, heading_rate)
    }

    fn consider_lane_change(&mut self, i: usize) {
        let veh = self.vehicles[i];
        let me = veh.state;
        if veh.driver.lane_change.is_some() {
            return;
        }
        if (me.y - self.road.lane_center(me.lane)).abs() > T::lit(0.3) {
            return;
        }
        let tr = self.traffic;
        let current_leader = self.leader_of(i).map(|j| self.vehicles[j].state);
        let a_current = idm_acceleration(&me, current_leader.as_ref(), &veh.driver.idm);

        let mut best: Option<(usize, T)> = None;
        let candidates = [me.lane.checked_add(1), me.lane.checked_sub(1)];
        for target in candidates.into_iter().flatten() {
            if target >= self.road.n_lanes {
                continue;
            }
            let (lead, follow) = self.lane_neighbors(i, target);
            let lead = lead.map(|j| self.vehicles[j].state);
            if let Some(l) = lead.as_ref() {
                let needed = veh.driver.idm.desired_gap(me.v, me.v - l.v);
                if bumper_gap(&me, l) < needed {
                    continue;
                }
            }
            if let Some(f) = follow.map(|j| self.vehicles[j]) {
                let needed = f.driver.idm.desired_gap(f.state.v, f.state.v - me.v);
                if bumper_gap(&f.state, &me) < needed {
                    continue;
                }
                let imposed = idm_acceleration(&f.state, Some(&me), &f.driver.idm);
                if imposed < -tr.lane_change_safe_decel {
                    continue;
                }
            }
            let gain = idm_acceleration(&me, lead.as_ref(), &veh.driver.idm) - a_current;
            if gain > tr.lane_change_threshold && best.is_none_or(|(_, g)| gain > g) {
                best = Some((target, gain));
            }
        }

        if let Some((to_lane, _)) = best {
            if self.rng.gen_bool(tr.lane_change_probability) {
                self.vehicles[i].driver.lane_change = Some(LaneChange {
                    from_y: me.y,
                    to_lane,
                    elapsed: T::zero(),
                    duration: tr.lane_change_duration,
                });
            }
        }
    }

    fn respawn(&mut self) {
        let ego_x = self.ego().x;
        let slack = T::lit(50.0);
        for i in 1..self.vehicles.len() {
            let dx = self.vehicles[i].state.x - ego_x;
            let new_x = if dx < -(self.traffic.window_behind + slack) {
                ego_x + self.traffic.window_ahead
            } else if dx > self.traffic.window_ahead + slack {
                ego_x - self.traffic.window_behind
            } else {
                continue;
            };
            let first = self.rng.gen_range(0..self.road.n_lanes);
            let v0 = self.draw_v0();
            for k in 0..self.road.n_lanes {
                let lane = (first + k) % self.road.n_lanes;
                let clear = self.vehicles.iter().enumerate().all(|(j, o)| {
                    j == i
                        || !occupies(&o.state, lane, &self.road)
                        || (o.state.x - new_x).abs() >= self.traffic.respawn_clearance
                });
                if clear {
                    let state = Self::make_state(&self.traffic, &self.road, self.next_id, new_x, lane, v0, false);
                    self.vehicles[i] = Vehicle {
                        state,
                        driver: Driver {
                            idm: self.traffic.idm(v0),
                            lane_change: None,
                            next_decision: self.t + self.traffic.decision_interval,
                        },
                    };
                    self.next_id += 1;
                    self.spawned += 1;
                    break;
                }
            }
        }
    }

    /// Advances the world by `dt`. `ego` overrides the ego's controls; `None`
    /// drives the ego with IDM lane keeping like ambient traffic.
    pub fn step(&mut self, ego: Option<Controls<T>>, dt: T) -> Result<CollisionReport> {
        if !(dt.is_finite() && dt > T::zero()) {
            return Err(Error::validation(format!("time step must be positive, got {dt}")));
        }
        if self.traffic.lane_changes {
            for i in 1..self.vehicles.len() {
                if self.t + T::lit(1e-9) >= self.vehicles[i].driver.next_decision {
                    self.consider_lane_change(i);
                    self.vehicles[i].driver.next_decision =
                        self.vehicles[i].driver.next_decision + self.traffic.decision_interval;
                }
            }
        }

        let controls: Vec<Controls<T>> = (0..self.vehicles.len())
            .map(|i| match (i, ego) {
                (0, Some(c)) => c,
                _ => self.ambient_controls(i, dt),
            })
            .collect();

        let mut next = Vec::with_capacity(self.vehicles.len());
        for (veh, c) in self.vehicles.iter().zip(&controls) {
            next.push(advance_vehicle(&veh.state, *c, dt, &self.road)?);
        }
        for (veh, state) in self.vehicles.iter_mut().zip(next) {
            veh.state = state;
            if let Some(lc) = veh.driver.lane_change.as_mut() {
                lc.elapsed = lc.elapsed + dt;
                let settled = (state.y - self.road.lane_center(lc.to_lane)).abs() < T::lit(0.2);
                if lc.elapsed >= lc.duration && settled {
                    veh.driver.lane_change = None;
                }
            }
        }
        self.t = self.t + dt;
        if self.traffic.respawn {
            self.respawn();
        }
        Ok(self.collision())
    }

    /// Mutable access for constructing test situations.
    pub fn vehicles_mut(&mut self) -> &mut [Vehicle<T>] {
        &mut self.vehicles
    }
}
