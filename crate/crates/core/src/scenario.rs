//! Declarative scenario files: a line-oriented `directive value...` format
//! describing the world, the controller configuration, the responder
//! registry, and the scripted driver events for one run.
//!
//! ```text
//! # comment
//! scenario rear_end_fog
//! duration_ticks 60
//! tick_ms 1000
//! geo_origin 23.8103 90.4125
//! geo_bearing_deg 90
//! registry_file dhaka_responders.reg
//! responder i9|insurance|Inline Insurance|+880999|23.80|90.40
//! vehicle leader pos=200 speed=0 length=4.5 equipped=true contacts=+880111,+880112 policy=POL-7
//! obstacle stall pos=400 extent=6
//! ack leader 25
//! speed leader 10 14
//! ```
//!
//! `ack <vehicle> <tick>` presses the acknowledgment button at that tick;
//! `speed <vehicle> <tick> <mps>` changes the vehicle's speed just before the
//! world advances into that tick. Scripted ticks must lie in
//! `[1, duration_ticks)`.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::controller::{ControllerConfig, ProximityLevel};
use crate::dispatch::{RegistryParseError, Responder, ResponderId, ResponderRegistry};
use crate::geo::GeoCoordinate;
use crate::world::{Obstacle, Vehicle, VehicleId, WorldConfig, WorldState};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{field}: {message}")]
    Validation { field: String, message: String },
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("registry {path}: {source}")]
    Registry {
        path: PathBuf,
        #[source]
        source: RegistryParseError,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AckEvent {
    pub vehicle: VehicleId,
    pub tick: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedEvent {
    pub vehicle: VehicleId,
    pub tick: u64,
    pub speed_mps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub duration_ticks: u64,
    pub tick_ms: u32,
    pub geo_origin: GeoCoordinate,
    pub geo_bearing_deg: f64,
    pub sensor_max_range_m: f64,
    pub vibration_baseline_g: f64,
    pub vibration_spike_g: f64,
    pub controller: ControllerConfig,
    /// Responder seed file, resolved relative to the scenario file by
    /// [`load`]. Inline `responder` lines are merged on top.
    pub registry_file: Option<String>,
    pub responders: Vec<Responder>,
    pub vehicles: Vec<Vehicle>,
    pub obstacles: Vec<Obstacle>,
    pub ack_events: Vec<AckEvent>,
    pub speed_events: Vec<SpeedEvent>,
}

impl Scenario {
    /// A scenario with defaults applied and no vehicles; callers fill in the
    /// rest. Mostly useful in tests.
    pub fn empty(name: impl Into<String>, duration_ticks: u64) -> Self {
        let world = WorldConfig::default();
        Self {
            name: name.into(),
            duration_ticks,
            tick_ms: world.tick_ms,
            geo_origin: world.geo_origin,
            geo_bearing_deg: world.geo_bearing_deg,
            sensor_max_range_m: world.sensor_max_range_m,
            vibration_baseline_g: world.vibration_baseline_g,
            vibration_spike_g: world.vibration_spike_g,
            controller: ControllerConfig::default(),
            registry_file: None,
            responders: Vec::new(),
            vehicles: Vec::new(),
            obstacles: Vec::new(),
            ack_events: Vec::new(),
            speed_events: Vec::new(),
        }
    }

    pub fn world_config(&self) -> WorldConfig {
        WorldConfig {
            tick_ms: self.tick_ms,
            geo_origin: self.geo_origin,
            geo_bearing_deg: self.geo_bearing_deg,
            sensor_max_range_m: self.sensor_max_range_m,
            vibration_baseline_g: self.vibration_baseline_g,
            vibration_spike_g: self.vibration_spike_g,
        }
    }

    pub fn build_world(&self) -> Result<WorldState, crate::world::WorldError> {
        WorldState::new(
            self.world_config(),
            self.vehicles.clone(),
            self.obstacles.clone(),
        )
    }

    /// Canonical text form; `parse_scenario(s.to_text())` reproduces `s`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |s: String| {
            out.push_str(&s);
            out.push('\n');
        };
        line(format!("scenario {}", self.name));
        line(format!("duration_ticks {}", self.duration_ticks));
        line(format!("tick_ms {}", self.tick_ms));
        line(format!(
            "geo_origin {} {}",
            self.geo_origin.lat_deg(),
            self.geo_origin.lon_deg()
        ));
        line(format!("geo_bearing_deg {}", self.geo_bearing_deg));
        line(format!("sensor_max_range_m {}", self.sensor_max_range_m));
        line(format!(
            "vibration_baseline_g {}",
            self.vibration_baseline_g
        ));
        line(format!("vibration_spike_g {}", self.vibration_spike_g));
        line(format!(
            "safe_threshold_m {}",
            self.controller.safe_threshold_m
        ));
        line(format!(
            "warning_threshold_m {}",
            self.controller.warning_threshold_m
        ));
        line(format!(
            "critical_threshold_m {}",
            self.controller.critical_threshold_m
        ));
        line(format!(
            "vibration_threshold_g {}",
            self.controller.vibration_threshold_g
        ));
        line(format!("ack_window_s {}", self.controller.ack_window_s));
        line(format!("v2v_warn_level {}", self.controller.v2v_warn_level));
        line(format!("v2v_range_m {}", self.controller.v2v_range_m));
        if let Some(path) = &self.registry_file {
            line(format!("registry_file {path}"));
        }
        for r in &self.responders {
            line(format!(
                "responder {}|{}|{}|{}|{}|{}",
                r.id,
                r.kind,
                r.name,
                r.phone,
                r.location.lat_deg(),
                r.location.lon_deg()
            ));
        }
        for v in &self.vehicles {
            let mut s = format!(
                "vehicle {} pos={} speed={} length={} equipped={}",
                v.id, v.lane_pos_m, v.speed_mps, v.length_m, v.equipped
            );
            if !v.family_contacts.is_empty() {
                s.push_str(&format!(" contacts={}", v.family_contacts.join(",")));
            }
            if let Some(policy) = &v.policy_id {
                s.push_str(&format!(" policy={policy}"));
            }
            line(s);
        }
        for o in &self.obstacles {
            line(format!(
                "obstacle {} pos={} extent={}",
                o.id, o.lane_pos_m, o.extent_m
            ));
        }
        for a in &self.ack_events {
            line(format!("ack {} {}", a.vehicle, a.tick));
        }
        for s in &self.speed_events {
            line(format!("speed {} {} {}", s.vehicle, s.tick, s.speed_mps));
        }
        out
    }
}

/// Parses and validates scenario text, reporting the first offending line or
/// field.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let mut builder = Builder::default();
    for (index, raw) in text.lines().enumerate() {
        let line_no = index + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        builder.directive(line, line_no)?;
    }
    let scenario = builder.finish()?;
    validate(&scenario)?;
    Ok(scenario)
}

/// A scenario together with its fully resolved responder registry.
#[derive(Debug)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub registry: ResponderRegistry,
}

/// Reads a scenario file, resolving `registry_file` relative to the
/// scenario's directory and merging inline responders on top.
pub fn load(path: impl AsRef<Path>) -> Result<LoadedScenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let scenario = parse_scenario(&text)?;
    let registry = build_registry(&scenario, path.parent().unwrap_or(Path::new(".")))?;
    Ok(LoadedScenario { scenario, registry })
}

/// Builds the responder registry for a scenario: the referenced seed file (if
/// any, resolved against `base_dir`) plus inline `responder` records.
pub fn build_registry(
    scenario: &Scenario,
    base_dir: &Path,
) -> Result<ResponderRegistry, ScenarioError> {
    let mut registry = ResponderRegistry::new();
    if let Some(file) = &scenario.registry_file {
        let path = base_dir.join(file);
        let text = std::fs::read_to_string(&path).map_err(|source| ScenarioError::Io {
            path: path.clone(),
            source,
        })?;
        registry
            .load_str(&text)
            .map_err(|source| ScenarioError::Registry { path, source })?;
    }
    for responder in &scenario.responders {
        registry
            .register(responder.clone())
            .map_err(|e| ScenarioError::Validation {
                field: format!("responder[{}]", responder.id),
                message: e.to_string(),
            })?;
    }
    Ok(registry)
}

#[derive(Default)]
struct Builder {
    name: Option<String>,
    duration_ticks: Option<u64>,
    tick_ms: Option<u32>,
    geo_origin: Option<GeoCoordinate>,
    geo_bearing_deg: Option<f64>,
    sensor_max_range_m: Option<f64>,
    vibration_baseline_g: Option<f64>,
    vibration_spike_g: Option<f64>,
    safe_threshold_m: Option<f64>,
    warning_threshold_m: Option<f64>,
    critical_threshold_m: Option<f64>,
    vibration_threshold_g: Option<f64>,
    ack_window_s: Option<u32>,
    v2v_warn_level: Option<ProximityLevel>,
    v2v_range_m: Option<f64>,
    registry_file: Option<String>,
    responders: Vec<Responder>,
    vehicles: Vec<Vehicle>,
    obstacles: Vec<Obstacle>,
    ack_events: Vec<AckEvent>,
    speed_events: Vec<SpeedEvent>,
}

fn parse_err(line: usize, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Parse {
        line,
        message: message.into(),
    }
}

impl Builder {
    fn directive(&mut self, line: &str, line_no: usize) -> Result<(), ScenarioError> {
        let (keyword, rest) = match line.split_once(char::is_whitespace) {
            Some((k, r)) => (k, r.trim()),
            None => (line, ""),
        };
        match keyword {
            "scenario" => self.set_name(rest, line_no),
            "duration_ticks" => set_once(
                &mut self.duration_ticks,
                parse_num(rest, keyword, line_no)?,
                keyword,
                line_no,
            ),
            "tick_ms" => set_once(
                &mut self.tick_ms,
                parse_num(rest, keyword, line_no)?,
                keyword,
                line_no,
            ),
            "geo_origin" => self.set_geo_origin(rest, line_no),
            "geo_bearing_deg" => set_once(
                &mut self.geo_bearing_deg,
                parse_num(rest, keyword, line_no)?,
                keyword,
                line_no,
            ),
            "sensor_max_range_m" => set_once(
                &mut self.sensor_max_range_m,
                parse_num(rest, keyword, line_no)?,
                keyword,
                line_no,
            ),
            "vibration_baseline_g" => set_once(
                &mut self.vibration_baseline_g,
                parse_num(rest, keyword, line_no)?,
                keyword,
                line_no,
            ),
            "vibration_spike_g" => set_once(
                &mut self.vibration_spike_g,
                parse_num(rest, keyword, line_no)?,
                keyword,
                line_no,
            ),
            "safe_threshold_m" => set_once(
                &mut self.safe_threshold_m,
                parse_num(rest, keyword, line_no)?,
                keyword,
                line_no,
            ),
            "warning_threshold_m" => set_once(
                &mut self.warning_threshold_m,
                parse_num(rest, keyword, line_no)?,
                keyword,
                line_no,
            ),
            "critical_threshold_m" => set_once(
                &mut self.critical_threshold_m,
                parse_num(rest, keyword, line_no)?,
                keyword,
                line_no,
            ),
            "vibration_threshold_g" => set_once(
                &mut self.vibration_threshold_g,
                parse_num(rest, keyword, line_no)?,
                keyword,
                line_no,
            ),
            "ack_window_s" => set_once(
                &mut self.ack_window_s,
                parse_num(rest, keyword, line_no)?,
                keyword,
                line_no,
            ),
            "v2v_warn_level" => {
                let level = rest
                    .parse::<ProximityLevel>()
                    .map_err(|e| parse_err(line_no, e))?;
                set_once(&mut self.v2v_warn_level, level, keyword, line_no)
            }
            "v2v_range_m" => set_once(
                &mut self.v2v_range_m,
                parse_num(rest, keyword, line_no)?,
                keyword,
                line_no,
            ),
            "registry_file" => {
                if rest.is_empty() {
                    return Err(parse_err(line_no, "registry_file requires a path"));
                }
                set_once(&mut self.registry_file, rest.to_owned(), keyword, line_no)
            }
            "responder" => self.add_responder(rest, line_no),
            "vehicle" => self.add_vehicle(rest, line_no),
            "obstacle" => self.add_obstacle(rest, line_no),
            "ack" => self.add_ack(rest, line_no),
            "speed" => self.add_speed(rest, line_no),
            other => Err(parse_err(line_no, format!("unknown directive `{other}`"))),
        }
    }

    fn set_name(&mut self, rest: &str, line_no: usize) -> Result<(), ScenarioError> {
        if rest.is_empty() || rest.contains(char::is_whitespace) {
            return Err(parse_err(line_no, "scenario name must be a single token"));
        }
        set_once(&mut self.name, rest.to_owned(), "scenario", line_no)
    }

    fn set_geo_origin(&mut self, rest: &str, line_no: usize) -> Result<(), ScenarioError> {
        let parts: Vec<&str> = rest.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(parse_err(line_no, "geo_origin requires `<lat> <lon>`"));
        }
        let lat: f64 = parse_num(parts[0], "geo_origin latitude", line_no)?;
        let lon: f64 = parse_num(parts[1], "geo_origin longitude", line_no)?;
        let origin = GeoCoordinate::new(lat, lon).map_err(|e| parse_err(line_no, e.to_string()))?;
        set_once(&mut self.geo_origin, origin, "geo_origin", line_no)
    }

    fn add_responder(&mut self, rest: &str, line_no: usize) -> Result<(), ScenarioError> {
        let fields: Vec<&str> = rest.split('|').collect();
        if fields.len() != 6 {
            return Err(parse_err(
                line_no,
                format!(
                    "responder requires 6 |-separated fields, found {}",
                    fields.len()
                ),
            ));
        }
        let kind = fields[1]
            .trim()
            .parse()
            .map_err(|e: String| parse_err(line_no, e))?;
        let lat: f64 = parse_num(fields[4], "responder latitude", line_no)?;
        let lon: f64 = parse_num(fields[5], "responder longitude", line_no)?;
        let location =
            GeoCoordinate::new(lat, lon).map_err(|e| parse_err(line_no, e.to_string()))?;
        self.responders.push(Responder {
            id: ResponderId::new(fields[0].trim()),
            kind,
            name: fields[2].trim().to_owned(),
            phone: fields[3].trim().to_owned(),
            location,
        });
        Ok(())
    }

    fn add_vehicle(&mut self, rest: &str, line_no: usize) -> Result<(), ScenarioError> {
        let mut tokens = rest.split_whitespace();
        let id = tokens
            .next()
            .ok_or_else(|| parse_err(line_no, "vehicle requires an id"))?;
        let mut vehicle = Vehicle::new(id, f64::NAN, f64::NAN);
        let mut saw_pos = false;
        let mut saw_speed = false;
        for token in tokens {
            let (key, value) = token.split_once('=').ok_or_else(|| {
                parse_err(line_no, format!("expected key=value, found `{token}`"))
            })?;
            match key {
                "pos" => {
                    vehicle.lane_pos_m = parse_num(value, "pos", line_no)?;
                    saw_pos = true;
                }
                "speed" => {
                    vehicle.speed_mps = parse_num(value, "speed", line_no)?;
                    saw_speed = true;
                }
                "length" => vehicle.length_m = parse_num(value, "length", line_no)?,
                "equipped" => vehicle.equipped = parse_bool(value, line_no)?,
                "contacts" => {
                    vehicle.family_contacts = value.split(',').map(str::to_owned).collect();
                }
                "policy" => vehicle.policy_id = Some(value.to_owned()),
                other => {
                    return Err(parse_err(
                        line_no,
                        format!("unknown vehicle field `{other}`"),
                    ))
                }
            }
        }
        if !saw_pos || !saw_speed {
            return Err(parse_err(
                line_no,
                format!("vehicle `{id}` requires pos= and speed="),
            ));
        }
        self.vehicles.push(vehicle);
        Ok(())
    }

    fn add_obstacle(&mut self, rest: &str, line_no: usize) -> Result<(), ScenarioError> {
        let mut tokens = rest.split_whitespace();
        let id = tokens
            .next()
            .ok_or_else(|| parse_err(line_no, "obstacle requires an id"))?;
        let mut obstacle = Obstacle::new(id, f64::NAN, 0.0);
        let mut saw_pos = false;
        for token in tokens {
            let (key, value) = token.split_once('=').ok_or_else(|| {
                parse_err(line_no, format!("expected key=value, found `{token}`"))
            })?;
            match key {
                "pos" => {
                    obstacle.lane_pos_m = parse_num(value, "pos", line_no)?;
                    saw_pos = true;
                }
                "extent" => obstacle.extent_m = parse_num(value, "extent", line_no)?,
                other => {
                    return Err(parse_err(
                        line_no,
                        format!("unknown obstacle field `{other}`"),
                    ))
                }
            }
        }
        if !saw_pos {
            return Err(parse_err(line_no, format!("obstacle `{id}` requires pos=")));
        }
        self.obstacles.push(obstacle);
        Ok(())
    }

    fn add_ack(&mut self, rest: &str, line_no: usize) -> Result<(), ScenarioError> {
        let parts: Vec<&str> = rest.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(parse_err(line_no, "ack requires `<vehicle> <tick>`"));
        }
        self.ack_events.push(AckEvent {
            vehicle: VehicleId::from(parts[0]),
            tick: parse_num(parts[1], "ack tick", line_no)?,
        });
        Ok(())
    }

    fn add_speed(&mut self, rest: &str, line_no: usize) -> Result<(), ScenarioError> {
        let parts: Vec<&str> = rest.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(parse_err(
                line_no,
                "speed requires `<vehicle> <tick> <mps>`",
            ));
        }
        self.speed_events.push(SpeedEvent {
            vehicle: VehicleId::from(parts[0]),
            tick: parse_num(parts[1], "speed tick", line_no)?,
            speed_mps: parse_num(parts[2], "speed value", line_no)?,
        });
        Ok(())
    }

    fn finish(self) -> Result<Scenario, ScenarioError> {
        let name = self.name.ok_or_else(|| missing("scenario"))?;
        let duration_ticks = self
            .duration_ticks
            .ok_or_else(|| missing("duration_ticks"))?;
        let defaults = Scenario::empty(String::new(), 0);
        let mut controller = ControllerConfig::default();
        if let Some(v) = self.safe_threshold_m {
            controller.safe_threshold_m = v;
        }
        if let Some(v) = self.warning_threshold_m {
            controller.warning_threshold_m = v;
        }
        if let Some(v) = self.critical_threshold_m {
            controller.critical_threshold_m = v;
        }
        if let Some(v) = self.vibration_threshold_g {
            controller.vibration_threshold_g = v;
        }
        if let Some(v) = self.ack_window_s {
            controller.ack_window_s = v;
        }
        if let Some(v) = self.v2v_warn_level {
            controller.v2v_warn_level = v;
        }
        if let Some(v) = self.v2v_range_m {
            controller.v2v_range_m = v;
        }
        Ok(Scenario {
            name,
            duration_ticks,
            tick_ms: self.tick_ms.unwrap_or(defaults.tick_ms),
            geo_origin: self.geo_origin.unwrap_or(defaults.geo_origin),
            geo_bearing_deg: self.geo_bearing_deg.unwrap_or(defaults.geo_bearing_deg),
            sensor_max_range_m: self
                .sensor_max_range_m
                .unwrap_or(defaults.sensor_max_range_m),
            vibration_baseline_g: self
                .vibration_baseline_g
                .unwrap_or(defaults.vibration_baseline_g),
            vibration_spike_g: self.vibration_spike_g.unwrap_or(defaults.vibration_spike_g),
            controller,
            registry_file: self.registry_file,
            responders: self.responders,
            vehicles: self.vehicles,
            obstacles: self.obstacles,
            ack_events: self.ack_events,
            speed_events: self.speed_events,
        })
    }
}

fn missing(directive: &str) -> ScenarioError {
    ScenarioError::Validation {
        field: directive.to_owned(),
        message: "required directive is missing".to_owned(),
    }
}

fn set_once<T>(
    slot: &mut Option<T>,
    value: T,
    keyword: &str,
    line_no: usize,
) -> Result<(), ScenarioError> {
    if slot.is_some() {
        return Err(parse_err(
            line_no,
            format!("duplicate directive `{keyword}`"),
        ));
    }
    *slot = Some(value);
    Ok(())
}

fn parse_num<T: std::str::FromStr>(
    value: &str,
    what: &str,
    line_no: usize,
) -> Result<T, ScenarioError> {
    value
        .trim()
        .parse()
        .map_err(|_| parse_err(line_no, format!("invalid {what} `{}`", value.trim())))
}

fn parse_bool(value: &str, line_no: usize) -> Result<bool, ScenarioError> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(parse_err(line_no, format!("invalid bool `{other}`"))),
    }
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation {
        field: field.into(),
        message: message.into(),
    }
}

fn validate(scenario: &Scenario) -> Result<(), ScenarioError> {
    if scenario.duration_ticks == 0 {
        return Err(invalid("duration_ticks", "must be > 0"));
    }
    if scenario.tick_ms == 0 {
        return Err(invalid("tick_ms", "must be > 0"));
    }
    if !scenario.geo_bearing_deg.is_finite() {
        return Err(invalid("geo_bearing_deg", "must be finite"));
    }
    if !(scenario.sensor_max_range_m.is_finite() && scenario.sensor_max_range_m > 0.0) {
        return Err(invalid("sensor_max_range_m", "must be finite and > 0"));
    }
    for (field, value) in [
        ("vibration_baseline_g", scenario.vibration_baseline_g),
        ("vibration_spike_g", scenario.vibration_spike_g),
    ] {
        if !(value.is_finite() && value >= 0.0) {
            return Err(invalid(field, "must be finite and >= 0"));
        }
    }
    scenario
        .controller
        .validate()
        .map_err(|e| invalid("controller", e.to_string()))?;

    let mut responder_ids = std::collections::BTreeSet::new();
    for responder in &scenario.responders {
        let field = format!("responder[{}]", responder.id);
        if responder.id.as_str().is_empty() {
            return Err(invalid(field, "id must be non-empty"));
        }
        if responder.phone.is_empty() {
            return Err(invalid(field, "phone must be non-empty"));
        }
        if !responder_ids.insert(responder.id.clone()) {
            return Err(invalid(field, "duplicate responder id"));
        }
    }

    let mut ids = std::collections::BTreeSet::new();
    for vehicle in &scenario.vehicles {
        let field = format!("vehicle[{}]", vehicle.id);
        if vehicle.id.as_str().is_empty()
            || !vehicle
                .id
                .as_str()
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
        {
            return Err(invalid(
                field,
                "id must be non-empty and use only [A-Za-z0-9_.-]",
            ));
        }
        if !ids.insert(vehicle.id.clone()) {
            return Err(invalid(field, "duplicate vehicle id"));
        }
        if !vehicle.lane_pos_m.is_finite() {
            return Err(invalid(field, "pos must be finite"));
        }
        if !(vehicle.speed_mps.is_finite() && vehicle.speed_mps >= 0.0) {
            return Err(invalid(field, "speed must be finite and >= 0"));
        }
        if !(vehicle.length_m.is_finite() && vehicle.length_m > 0.0) {
            return Err(invalid(field, "length must be finite and > 0"));
        }
        for contact in &vehicle.family_contacts {
            if contact.is_empty() || contact.contains(char::is_whitespace) {
                return Err(invalid(
                    field,
                    "contacts must be non-empty and contain no whitespace",
                ));
            }
        }
    }

    let mut obstacle_ids = std::collections::BTreeSet::new();
    for obstacle in &scenario.obstacles {
        let field = format!("obstacle[{}]", obstacle.id);
        if !obstacle_ids.insert(obstacle.id.clone()) {
            return Err(invalid(field, "duplicate obstacle id"));
        }
        if !obstacle.lane_pos_m.is_finite() {
            return Err(invalid(field, "pos must be finite"));
        }
        if !(obstacle.extent_m.is_finite() && obstacle.extent_m >= 0.0) {
            return Err(invalid(field, "extent must be finite and >= 0"));
        }
    }

    let vehicle_by_id = |id: &VehicleId| scenario.vehicles.iter().find(|v| &v.id == id);
    for (index, ack) in scenario.ack_events.iter().enumerate() {
        let field = format!("ack[{index}]");
        let Some(vehicle) = vehicle_by_id(&ack.vehicle) else {
            return Err(invalid(field, format!("unknown vehicle `{}`", ack.vehicle)));
        };
        if !vehicle.equipped {
            return Err(invalid(
                field,
                format!(
                    "vehicle `{}` is not equipped; it has no button",
                    ack.vehicle
                ),
            ));
        }
        check_event_tick(&field, ack.tick, scenario.duration_ticks)?;
    }
    for (index, event) in scenario.speed_events.iter().enumerate() {
        let field = format!("speed[{index}]");
        if vehicle_by_id(&event.vehicle).is_none() {
            return Err(invalid(
                field,
                format!("unknown vehicle `{}`", event.vehicle),
            ));
        }
        check_event_tick(&field, event.tick, scenario.duration_ticks)?;
        if !(event.speed_mps.is_finite() && event.speed_mps >= 0.0) {
            return Err(invalid(field, "speed must be finite and >= 0"));
        }
    }
    Ok(())
}

fn check_event_tick(field: &str, tick: u64, duration_ticks: u64) -> Result<(), ScenarioError> {
    if tick == 0 {
        return Err(invalid(
            field,
            "tick must be >= 1 (tick 0 is the initial state)",
        ));
    }
    if tick >= duration_ticks {
        return Err(invalid(
            field,
            format!("tick {tick} must be < duration_ticks ({duration_ticks})"),
        ));
    }
    Ok(())
}
