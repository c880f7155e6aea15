//! Single-lane discrete-time world: vehicle kinematics, interval collision
//! detection, and the simulated sensor suite (forward ranging, vibration,
//! GPS fix) that feeds each onboard controller.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::geo::{self, GeoCoordinate};

/// Default vehicle length applied when a scenario does not specify one.
pub const DEFAULT_VEHICLE_LENGTH_M: f64 = 4.5;
/// Default forward-ranging sensor limit. Generous enough to cover the
/// outermost 50 m alert threshold with margin.
pub const DEFAULT_SENSOR_MAX_RANGE_M: f64 = 120.0;
/// Vibration signal when nothing is happening.
pub const DEFAULT_VIBRATION_BASELINE_G: f64 = 0.5;
/// Vibration signal on the tick an impact is first recorded.
pub const DEFAULT_VIBRATION_SPIKE_G: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VehicleId(String);

impl VehicleId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VehicleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for VehicleId {
    fn from(id: &str) -> Self {
        Self(id.to_owned())
    }
}

impl From<String> for VehicleId {
    fn from(id: String) -> Self {
        Self(id)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error("unknown vehicle `{0}`")]
    UnknownVehicle(VehicleId),
    #[error("duplicate vehicle id `{0}`")]
    DuplicateVehicle(VehicleId),
    #[error("duplicate obstacle id `{0}`")]
    DuplicateObstacle(String),
    #[error("invalid world config: {0}")]
    InvalidConfig(String),
}

/// A simulated car. Positions are longitudinal lane coordinates in meters;
/// a vehicle occupies the closed interval `[lane_pos_m, lane_pos_m + length_m]`
/// and travels toward increasing coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Vehicle {
    pub id: VehicleId,
    pub lane_pos_m: f64,
    pub speed_mps: f64,
    pub length_m: f64,
    /// Whether the car carries the alert system. Only equipped vehicles run
    /// a controller and can send or receive V2V messages.
    pub equipped: bool,
    pub family_contacts: Vec<String>,
    pub policy_id: Option<String>,
}

impl Vehicle {
    pub fn new(id: impl Into<VehicleId>, lane_pos_m: f64, speed_mps: f64) -> Self {
        Self {
            id: id.into(),
            lane_pos_m,
            speed_mps,
            length_m: DEFAULT_VEHICLE_LENGTH_M,
            equipped: true,
            family_contacts: Vec::new(),
            policy_id: None,
        }
    }

    pub fn rear_m(&self) -> f64 {
        self.lane_pos_m
    }

    pub fn front_m(&self) -> f64 {
        self.lane_pos_m + self.length_m
    }
}

/// A stationary object occupying `[lane_pos_m, lane_pos_m + extent_m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Obstacle {
    pub id: String,
    pub lane_pos_m: f64,
    pub extent_m: f64,
}

impl Obstacle {
    pub fn new(id: impl Into<String>, lane_pos_m: f64, extent_m: f64) -> Self {
        Self {
            id: id.into(),
            lane_pos_m,
            extent_m,
        }
    }

    fn rear_m(&self) -> f64 {
        self.lane_pos_m
    }

    fn front_m(&self) -> f64 {
        self.lane_pos_m + self.extent_m
    }
}

/// Static world parameters: tick period, the lane-to-geo mapping, and the
/// sensor model constants.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldConfig {
    pub tick_ms: u32,
    pub geo_origin: GeoCoordinate,
    /// Compass bearing (degrees clockwise from north) of increasing lane
    /// coordinates.
    pub geo_bearing_deg: f64,
    pub sensor_max_range_m: f64,
    pub vibration_baseline_g: f64,
    pub vibration_spike_g: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            tick_ms: 1000,
            geo_origin: GeoCoordinate::new(0.0, 0.0).expect("origin is valid"),
            geo_bearing_deg: 0.0,
            sensor_max_range_m: DEFAULT_SENSOR_MAX_RANGE_M,
            vibration_baseline_g: DEFAULT_VIBRATION_BASELINE_G,
            vibration_spike_g: DEFAULT_VIBRATION_SPIKE_G,
        }
    }
}

/// Immutable snapshot of the world at one tick. [`WorldState::step`] produces
/// the next snapshot; snapshots are safe to hand elsewhere for read-only use.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    config: WorldConfig,
    tick_index: u64,
    vehicles: BTreeMap<VehicleId, Vehicle>,
    obstacles: Vec<Obstacle>,
    /// Vehicle id -> tick the collision was first recorded. Latched: entries
    /// are never removed during a run.
    collisions: BTreeMap<VehicleId, u64>,
}

impl WorldState {
    pub fn new(
        config: WorldConfig,
        vehicles: Vec<Vehicle>,
        obstacles: Vec<Obstacle>,
    ) -> Result<Self, WorldError> {
        if config.tick_ms == 0 {
            return Err(WorldError::InvalidConfig("tick_ms must be > 0".into()));
        }
        if !(config.sensor_max_range_m.is_finite() && config.sensor_max_range_m > 0.0) {
            return Err(WorldError::InvalidConfig(
                "sensor_max_range_m must be finite and > 0".into(),
            ));
        }
        if !config.geo_bearing_deg.is_finite() {
            return Err(WorldError::InvalidConfig(
                "geo_bearing_deg must be finite".into(),
            ));
        }
        for (name, value) in [
            ("vibration_baseline_g", config.vibration_baseline_g),
            ("vibration_spike_g", config.vibration_spike_g),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(WorldError::InvalidConfig(format!(
                    "{name} must be finite and >= 0"
                )));
            }
        }

        let mut map = BTreeMap::new();
        for v in vehicles {
            if !v.lane_pos_m.is_finite() {
                return Err(WorldError::InvalidConfig(format!(
                    "vehicle `{}`: lane_pos_m must be finite",
                    v.id
                )));
            }
            if !(v.speed_mps.is_finite() && v.speed_mps >= 0.0) {
                return Err(WorldError::InvalidConfig(format!(
                    "vehicle `{}`: speed_mps must be finite and >= 0",
                    v.id
                )));
            }
            if !(v.length_m.is_finite() && v.length_m > 0.0) {
                return Err(WorldError::InvalidConfig(format!(
                    "vehicle `{}`: length_m must be > 0",
                    v.id
                )));
            }
            let id = v.id.clone();
            if map.insert(id.clone(), v).is_some() {
                return Err(WorldError::DuplicateVehicle(id));
            }
        }

        let mut seen = std::collections::BTreeSet::new();
        for o in &obstacles {
            if !o.lane_pos_m.is_finite() {
                return Err(WorldError::InvalidConfig(format!(
                    "obstacle `{}`: lane_pos_m must be finite",
                    o.id
                )));
            }
            if !(o.extent_m.is_finite() && o.extent_m >= 0.0) {
                return Err(WorldError::InvalidConfig(format!(
                    "obstacle `{}`: extent_m must be >= 0",
                    o.id
                )));
            }
            if !seen.insert(o.id.clone()) {
                return Err(WorldError::DuplicateObstacle(o.id.clone()));
            }
        }

        let mut world = Self {
            config,
            tick_index: 0,
            vehicles: map,
            obstacles,
            collisions: BTreeMap::new(),
        };
        // Worlds that start pre-overlapped are legal; those collisions are
        // recorded at tick 0.
        world.detect_collisions();
        Ok(world)
    }

    pub fn config(&self) -> &WorldConfig {
        &self.config
    }

    pub fn tick_index(&self) -> u64 {
        self.tick_index
    }

    pub fn tick_ms(&self) -> u32 {
        self.config.tick_ms
    }

    pub fn vehicles(&self) -> impl Iterator<Item = &Vehicle> {
        self.vehicles.values()
    }

    pub fn vehicle(&self, id: &VehicleId) -> Result<&Vehicle, WorldError> {
        self.vehicles
            .get(id)
            .ok_or_else(|| WorldError::UnknownVehicle(id.clone()))
    }

    pub fn obstacles(&self) -> &[Obstacle] {
        &self.obstacles
    }

    /// Vehicle id -> tick its collision was first recorded.
    pub fn collisions(&self) -> &BTreeMap<VehicleId, u64> {
        &self.collisions
    }

    pub fn is_collided(&self, id: &VehicleId) -> bool {
        self.collisions.contains_key(id)
    }

    /// Replaces a vehicle's speed, e.g. for scripted speed changes. The
    /// caller is responsible for not reviving collided vehicles.
    pub fn set_vehicle_speed(&mut self, id: &VehicleId, speed_mps: f64) -> Result<(), WorldError> {
        if !(speed_mps.is_finite() && speed_mps >= 0.0) {
            return Err(WorldError::InvalidConfig(format!(
                "vehicle `{id}`: speed_mps must be finite and >= 0"
            )));
        }
        let vehicle = self
            .vehicles
            .get_mut(id)
            .ok_or_else(|| WorldError::UnknownVehicle(id.clone()))?;
        vehicle.speed_mps = speed_mps;
        Ok(())
    }

    /// Advances one tick: every non-collided vehicle moves by
    /// `speed_mps * tick_ms / 1000`, then interval overlaps are checked.
    /// Newly overlapping vehicles are latched into the collision map and
    /// stopped.
    ///
    /// Overlap is a closed-interval test on the positions after the move; a
    /// vehicle closing faster than the combined body lengths per tick can
    /// pass an object without touching it.
    pub fn step(&self) -> WorldState {
        let mut next = self.clone();
        next.tick_index += 1;
        let dt_s = f64::from(next.config.tick_ms) / 1000.0;
        for vehicle in next.vehicles.values_mut() {
            if !self.collisions.contains_key(&vehicle.id) {
                vehicle.lane_pos_m += vehicle.speed_mps * dt_s;
            }
        }
        next.detect_collisions();
        next
    }

    fn detect_collisions(&mut self) {
        let ids: Vec<VehicleId> = self.vehicles.keys().cloned().collect();
        let mut involved: Vec<VehicleId> = Vec::new();

        for (i, a_id) in ids.iter().enumerate() {
            let a = &self.vehicles[a_id];
            for b_id in &ids[i + 1..] {
                let b = &self.vehicles[b_id];
                if intervals_overlap(a.rear_m(), a.front_m(), b.rear_m(), b.front_m()) {
                    involved.push(a_id.clone());
                    involved.push(b_id.clone());
                }
            }
            for obstacle in &self.obstacles {
                if intervals_overlap(
                    a.rear_m(),
                    a.front_m(),
                    obstacle.rear_m(),
                    obstacle.front_m(),
                ) {
                    involved.push(a_id.clone());
                }
            }
        }

        for id in involved {
            if !self.collisions.contains_key(&id) {
                self.collisions.insert(id.clone(), self.tick_index);
                if let Some(vehicle) = self.vehicles.get_mut(&id) {
                    vehicle.speed_mps = 0.0;
                }
            }
        }
    }

    /// Gap in meters from the vehicle's front to the nearest object ahead in
    /// the lane, clamped at 0 when overlapping. `None` when nothing lies
    /// within the sensor's maximum range.
    pub fn forward_distance(&self, id: &VehicleId) -> Result<Option<f64>, WorldError> {
        let me = self.vehicle(id)?;
        let front = me.front_m();

        let mut nearest: Option<f64> = None;
        let mut consider = |rear: f64, obj_front: f64| {
            let gap = if rear >= front {
                rear - front
            } else if intervals_overlap(me.rear_m(), front, rear, obj_front) {
                0.0
            } else {
                return; // fully behind
            };
            if nearest.is_none_or(|d| gap < d) {
                nearest = Some(gap);
            }
        };

        for other in self.vehicles.values() {
            if other.id != me.id {
                consider(other.rear_m(), other.front_m());
            }
        }
        for obstacle in &self.obstacles {
            consider(obstacle.rear_m(), obstacle.front_m());
        }

        Ok(nearest.filter(|d| *d <= self.config.sensor_max_range_m))
    }

    /// Two-level vibration signal: the spike value on the tick a collision
    /// involving the vehicle is first recorded, the baseline everywhere else.
    pub fn vibration_level(&self, id: &VehicleId) -> Result<f64, WorldError> {
        let vehicle = self.vehicle(id)?;
        Ok(match self.collisions.get(&vehicle.id) {
            Some(&tick) if tick == self.tick_index => self.config.vibration_spike_g,
            _ => self.config.vibration_baseline_g,
        })
    }

    /// GPS fix: maps the vehicle's lane coordinate from the geo origin along
    /// the configured bearing. Pure function of the current state.
    pub fn geo_fix(&self, id: &VehicleId) -> Result<GeoCoordinate, WorldError> {
        let vehicle = self.vehicle(id)?;
        Ok(geo::offset_along_bearing(
            self.config.geo_origin,
            self.config.geo_bearing_deg,
            vehicle.lane_pos_m,
        ))
    }
}

fn intervals_overlap(a_start: f64, a_end: f64, b_start: f64, b_end: f64) -> bool {
    a_start <= b_end && b_start <= a_end
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn world_with(vehicles: Vec<Vehicle>, obstacles: Vec<Obstacle>) -> WorldState {
        WorldState::new(WorldConfig::default(), vehicles, obstacles).unwrap()
    }

    #[test]
    fn step_advances_by_speed_times_dt() {
        let world = world_with(vec![Vehicle::new("a", 0.0, 20.0)], vec![]);
        let next = world.step();
        assert_eq!(next.vehicle(&"a".into()).unwrap().lane_pos_m, 20.0);
        assert_eq!(next.tick_index(), 1);
    }

    #[test]
    fn step_leaves_stationary_vehicle_in_place() {
        let world = world_with(vec![Vehicle::new("a", 7.5, 0.0)], vec![]);
        let next = world.step();
        assert_eq!(next.vehicle(&"a".into()).unwrap().lane_pos_m, 7.5);
    }

    #[test]
    fn overlapping_vehicles_collide_and_stop() {
        // b starts 6 m ahead of a's front and closes at 10 m/s.
        let world = world_with(
            vec![Vehicle::new("a", 0.0, 10.0), Vehicle::new("b", 10.5, 0.0)],
            vec![],
        );
        let next = world.step();
        assert!(next.is_collided(&"a".into()));
        assert!(next.is_collided(&"b".into()));
        assert_eq!(next.vehicle(&"a".into()).unwrap().speed_mps, 0.0);
        assert_eq!(next.vehicle(&"b".into()).unwrap().speed_mps, 0.0);
        assert_eq!(next.collisions()[&VehicleId::from("a")], 1);
    }

    #[test]
    fn collisions_latch_for_the_rest_of_the_run() {
        let world = world_with(
            vec![Vehicle::new("a", 0.0, 10.0), Vehicle::new("b", 10.5, 0.0)],
            vec![],
        );
        let mut state = world.step();
        assert!(state.is_collided(&"a".into()));
        for _ in 0..5 {
            state = state.step();
            assert!(state.is_collided(&"a".into()));
            assert_eq!(state.collisions()[&VehicleId::from("a")], 1);
        }
    }

    #[test]
    fn forward_distance_is_leader_rear_minus_follower_front() {
        // Follower front at 10 m (pos 5.5, length 4.5), leader rear at 50 m.
        let world = world_with(
            vec![Vehicle::new("f", 5.5, 0.0), Vehicle::new("l", 50.0, 0.0)],
            vec![],
        );
        assert_eq!(world.forward_distance(&"f".into()).unwrap(), Some(40.0));
    }

    #[test]
    fn forward_distance_absent_beyond_sensor_range() {
        let world = world_with(
            vec![Vehicle::new("f", 0.0, 0.0), Vehicle::new("l", 200.0, 0.0)],
            vec![],
        );
        assert_eq!(world.forward_distance(&"f".into()).unwrap(), None);
    }

    #[test]
    fn forward_distance_picks_nearest_of_several() {
        // Objects ahead at gaps 35, 12 and 80 m from the follower's front.
        let mut follower = Vehicle::new("f", 0.0, 0.0);
        follower.length_m = 4.0;
        let world = world_with(
            vec![
                follower,
                Vehicle::new("v1", 39.0, 0.0),
                Vehicle::new("v2", 16.0, 0.0),
            ],
            vec![Obstacle::new("rock", 84.0, 1.0)],
        );
        assert_eq!(world.forward_distance(&"f".into()).unwrap(), Some(12.0));
    }

    #[test]
    fn forward_distance_ignores_objects_behind() {
        let world = world_with(
            vec![
                Vehicle::new("f", 100.0, 0.0),
                Vehicle::new("behind", 0.0, 0.0),
            ],
            vec![],
        );
        assert_eq!(world.forward_distance(&"f".into()).unwrap(), None);
    }

    #[test]
    fn forward_distance_clamps_overlap_to_zero() {
        let world = world_with(
            vec![Vehicle::new("a", 0.0, 10.0), Vehicle::new("b", 10.5, 0.0)],
            vec![],
        );
        let next = world.step(); // a now overlaps b
        assert_eq!(next.forward_distance(&"a".into()).unwrap(), Some(0.0));
    }

    #[test]
    fn vibration_spikes_exactly_on_first_collision_tick() {
        let world = world_with(
            vec![Vehicle::new("a", 0.0, 10.0), Vehicle::new("b", 10.5, 0.0)],
            vec![],
        );
        assert_eq!(
            world.vibration_level(&"a".into()).unwrap(),
            DEFAULT_VIBRATION_BASELINE_G
        );
        let crash = world.step();
        assert_eq!(
            crash.vibration_level(&"a".into()).unwrap(),
            DEFAULT_VIBRATION_SPIKE_G
        );
        assert_eq!(
            crash.vibration_level(&"b".into()).unwrap(),
            DEFAULT_VIBRATION_SPIKE_G
        );
        let after = crash.step();
        assert_eq!(
            after.vibration_level(&"a".into()).unwrap(),
            DEFAULT_VIBRATION_BASELINE_G
        );
    }

    #[test]
    fn unknown_vehicle_errors() {
        let world = world_with(vec![], vec![]);
        let missing = VehicleId::from("ghost");
        assert_eq!(
            world.forward_distance(&missing),
            Err(WorldError::UnknownVehicle(missing.clone()))
        );
        assert_eq!(
            world.vibration_level(&missing),
            Err(WorldError::UnknownVehicle(missing.clone()))
        );
        assert_eq!(
            world.geo_fix(&missing),
            Err(WorldError::UnknownVehicle(missing))
        );
    }

    #[test]
    fn identical_worlds_step_identically() {
        let build = || {
            world_with(
                vec![
                    Vehicle::new("a", 0.0, 17.3),
                    Vehicle::new("b", 93.7, 4.1),
                    Vehicle::new("c", 250.0, 0.0),
                ],
                vec![Obstacle::new("rock", 400.0, 2.5)],
            )
        };
        let mut first = build();
        let mut second = build();
        for _ in 0..50 {
            first = first.step();
            second = second.step();
            assert_eq!(first, second);
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        let err = WorldState::new(
            WorldConfig::default(),
            vec![Vehicle::new("a", 0.0, 0.0), Vehicle::new("a", 50.0, 0.0)],
            vec![],
        )
        .unwrap_err();
        assert_eq!(err, WorldError::DuplicateVehicle("a".into()));
    }

    #[test]
    fn geo_fix_at_origin_is_origin() {
        let world = world_with(vec![Vehicle::new("a", 0.0, 0.0)], vec![]);
        assert_eq!(
            world.geo_fix(&"a".into()).unwrap(),
            world.config().geo_origin
        );
    }

    #[test]
    fn geo_fix_depends_only_on_position() {
        let world = world_with(
            vec![
                Vehicle::new("a", 300.0, 5.0),
                Vehicle::new("b", 300.0, 25.0),
            ],
            vec![],
        );
        assert_eq!(
            world.geo_fix(&"a".into()).unwrap(),
            world.geo_fix(&"b".into()).unwrap()
        );
    }

    /// Independent great-circle destination-point oracle on the same sphere.
    fn spherical_destination(
        origin: GeoCoordinate,
        bearing_deg: f64,
        distance_m: f64,
    ) -> (f64, f64) {
        let lat1 = origin.lat_deg().to_radians();
        let lon1 = origin.lon_deg().to_radians();
        let bearing = bearing_deg.to_radians();
        let delta = distance_m / crate::geo::EARTH_RADIUS_M;

        let lat2 = (lat1.sin() * delta.cos() + lat1.cos() * delta.sin() * bearing.cos()).asin();
        let lon2 = lon1
            + (bearing.sin() * delta.sin() * lat1.cos())
                .atan2(delta.cos() - lat1.sin() * lat2.sin());
        (lat2.to_degrees(), lon2.to_degrees())
    }

    #[test]
    fn geo_fix_east_at_equator_matches_spherical_oracle() {
        let config = WorldConfig {
            geo_bearing_deg: 90.0,
            ..WorldConfig::default()
        };
        let world = WorldState::new(config, vec![Vehicle::new("a", 1000.0, 0.0)], vec![]).unwrap();
        let fix = world.geo_fix(&"a".into()).unwrap();

        let (oracle_lat, oracle_lon) =
            spherical_destination(world.config().geo_origin, 90.0, 1000.0);
        assert!((fix.lat_deg() - oracle_lat).abs() < 1e-9);
        assert!((fix.lon_deg() - oracle_lon).abs() < 1e-9);
        // Frozen from the oracle: 1000 m east on the 6371 km sphere.
        assert!((fix.lon_deg() - 0.008993216059187306).abs() < 1e-12);
        // cos(pi/2) is ~6e-17 rather than exactly zero.
        assert!(fix.lat_deg().abs() < 1e-12);
    }

    #[test]
    fn geo_fix_tracks_spherical_oracle_at_mid_latitudes() {
        for (bearing, pos) in [
            (90.0, 1500.0),
            (45.0, 800.0),
            (270.0, 2000.0),
            (180.0, 500.0),
        ] {
            let config = WorldConfig {
                geo_origin: GeoCoordinate::new(23.8103, 90.4125).unwrap(),
                geo_bearing_deg: bearing,
                ..WorldConfig::default()
            };
            let world = WorldState::new(config, vec![Vehicle::new("a", pos, 0.0)], vec![]).unwrap();
            let fix = world.geo_fix(&"a".into()).unwrap();
            let (oracle_lat, oracle_lon) =
                spherical_destination(world.config().geo_origin, bearing, pos);
            // Equirectangular vs true great-circle: sub-meter at these scales.
            assert!(
                (fix.lat_deg() - oracle_lat).abs() < 1e-5,
                "bearing {bearing} lat"
            );
            assert!(
                (fix.lon_deg() - oracle_lon).abs() < 1e-5,
                "bearing {bearing} lon"
            );
        }
    }

    fn arb_world() -> impl Strategy<Value = WorldState> {
        let vehicles = prop::collection::vec((0.0f64..5000.0, 0.0f64..40.0, 2.0f64..12.0), 1..120);
        let obstacles = prop::collection::vec((0.0f64..5000.0, 0.0f64..15.0), 0..80);
        (vehicles, obstacles).prop_map(|(vs, os)| {
            let vehicles = vs
                .into_iter()
                .enumerate()
                .map(|(i, (pos, speed, length))| {
                    let mut v = Vehicle::new(format!("v{i:03}"), pos, speed);
                    v.length_m = length;
                    v
                })
                .collect();
            let obstacles = os
                .into_iter()
                .enumerate()
                .map(|(i, (pos, extent))| Obstacle::new(format!("o{i:03}"), pos, extent))
                .collect();
            WorldState::new(WorldConfig::default(), vehicles, obstacles).unwrap()
        })
    }

    proptest! {
        /// forward_distance must agree with a brute-force min-gap scan.
        #[test]
        fn forward_distance_matches_brute_force(world in arb_world()) {
            let ids: Vec<VehicleId> = world.vehicles().map(|v| v.id.clone()).collect();
            for id in ids {
                let me = world.vehicle(&id).unwrap().clone();
                let mut best: Option<f64> = None;
                let mut scan = |rear: f64, obj_front: f64| {
                    let overlapping = rear <= me.front_m() && me.rear_m() <= obj_front;
                    let gap = if rear >= me.front_m() {
                        rear - me.front_m()
                    } else if overlapping {
                        0.0
                    } else {
                        return;
                    };
                    if best.is_none_or(|b| gap < b) {
                        best = Some(gap);
                    }
                };
                for v in world.vehicles().filter(|v| v.id != id) {
                    scan(v.rear_m(), v.front_m());
                }
                for o in world.obstacles() {
                    scan(o.lane_pos_m, o.lane_pos_m + o.extent_m);
                }
                let expected = best.filter(|d| *d <= world.config().sensor_max_range_m);
                prop_assert_eq!(world.forward_distance(&id).unwrap(), expected);
            }
        }

        /// After a step, the collided set equals the brute-force overlap scan
        /// (plus latched prior collisions), and collided vehicles are stopped.
        #[test]
        fn step_collisions_match_interval_oracle(world in arb_world()) {
            let mut state = world;
            for _ in 0..3 {
                let before: Vec<VehicleId> = state.collisions().keys().cloned().collect();
                let next = state.step();

                let mut expected: std::collections::BTreeSet<VehicleId> = before.iter().cloned().collect();
                let vehicles: Vec<Vehicle> = next.vehicles().cloned().collect();
                for (i, a) in vehicles.iter().enumerate() {
                    for b in &vehicles[i + 1..] {
                        if a.rear_m() <= b.front_m() && b.rear_m() <= a.front_m() {
                            expected.insert(a.id.clone());
                            expected.insert(b.id.clone());
                        }
                    }
                    for o in next.obstacles() {
                        if a.rear_m() <= o.lane_pos_m + o.extent_m && o.lane_pos_m <= a.front_m() {
                            expected.insert(a.id.clone());
                        }
                    }
                }

                let actual: std::collections::BTreeSet<VehicleId> =
                    next.collisions().keys().cloned().collect();
                prop_assert_eq!(&actual, &expected);
                for id in &actual {
                    prop_assert_eq!(next.vehicle(id).unwrap().speed_mps, 0.0);
                }
                // Latching: nothing leaves the collision map.
                for id in &before {
                    prop_assert!(next.is_collided(id));
                }
                state = next;
            }
        }

        /// The spike appears exactly once per vehicle over a whole run.
        #[test]
        fn vibration_spikes_once_per_vehicle(world in arb_world()) {
            let mut state = world;
            let ids: Vec<VehicleId> = state.vehicles().map(|v| v.id.clone()).collect();
            let mut spikes: BTreeMap<VehicleId, u32> = BTreeMap::new();
            for _ in 0..10 {
                state = state.step();
                for id in &ids {
                    if state.vibration_level(id).unwrap() == state.config().vibration_spike_g {
                        *spikes.entry(id.clone()).or_default() += 1;
                    }
                }
            }
            for id in &ids {
                let count = spikes.get(id).copied().unwrap_or(0);
                prop_assert!(count <= 1);
                // A spike was seen iff the vehicle collided after tick 0.
                let collided_late = state.collisions().get(id).is_some_and(|t| *t > 0);
                prop_assert_eq!(count == 1, collided_late);
            }
        }
    }
}
