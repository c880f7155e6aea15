//! Cloud-side dispatch service: a registry of hospitals, police stations and
//! insurance offices, nearest-responder resolution for incoming collision
//! reports, and an append-only store of dispatch records.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use thiserror::Error;

pub use crate::geo::haversine_m;
use crate::geo::GeoCoordinate;
use crate::world::VehicleId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DispatchError {
    #[error("duplicate responder id `{0}`")]
    DuplicateId(ResponderId),
    #[error("no {0} responder registered")]
    NoResponderAvailable(ResponderKind),
}

/// Line-oriented registry seed file errors.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {message}")]
pub struct RegistryParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ResponderId(String);

impl ResponderId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ResponderId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ResponderId {
    fn from(id: &str) -> Self {
        Self(id.to_owned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponderKind {
    Hospital,
    Police,
    Insurance,
}

impl ResponderKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ResponderKind::Hospital => "hospital",
            ResponderKind::Police => "police",
            ResponderKind::Insurance => "insurance",
        }
    }
}

impl fmt::Display for ResponderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ResponderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "hospital" => Ok(ResponderKind::Hospital),
            "police" => Ok(ResponderKind::Police),
            "insurance" => Ok(ResponderKind::Insurance),
            other => Err(format!("unknown responder kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Responder {
    pub id: ResponderId,
    pub kind: ResponderKind,
    pub name: String,
    pub phone: String,
    pub location: GeoCoordinate,
}

/// The report a vehicle uploads after an unacknowledged collision window.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionReport {
    pub vehicle_id: VehicleId,
    pub location: GeoCoordinate,
    /// Tick the report was issued.
    pub tick: u64,
    pub vibration_peak_g: f64,
    pub policy_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedResponder {
    pub responder: Responder,
    pub distance_m: f64,
}

/// Nearest responder of each kind for one report. Insurance is resolved only
/// when the report carries a policy id and an insurer is registered.
#[derive(Debug, Clone, PartialEq)]
pub struct DispatchPlan {
    pub hospital: ResolvedResponder,
    pub police: ResolvedResponder,
    pub insurance: Option<ResolvedResponder>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispatchRecord {
    pub sequence_number: u64,
    pub report: CollisionReport,
    pub plan: DispatchPlan,
}

#[derive(Debug, Clone, Default)]
pub struct ResponderRegistry {
    responders: BTreeMap<ResponderId, Responder>,
}

impl ResponderRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, responder: Responder) -> Result<(), DispatchError> {
        if self.responders.contains_key(&responder.id) {
            return Err(DispatchError::DuplicateId(responder.id));
        }
        self.responders.insert(responder.id.clone(), responder);
        Ok(())
    }

    pub fn get(&self, id: &ResponderId) -> Option<&Responder> {
        self.responders.get(id)
    }

    pub fn len(&self) -> usize {
        self.responders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responders.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Responder> {
        self.responders.values()
    }

    /// Nearest responder of `kind` by great-circle distance. Ties go to the
    /// lexicographically smallest id so lookups are deterministic.
    pub fn nearest(
        &self,
        kind: ResponderKind,
        location: GeoCoordinate,
    ) -> Result<ResolvedResponder, DispatchError> {
        let mut best: Option<ResolvedResponder> = None;
        for responder in self.responders.values().filter(|r| r.kind == kind) {
            let distance_m = haversine_m(location, responder.location);
            // Ascending-id iteration: replacing only on strictly smaller
            // distance keeps the smallest id among ties.
            if best.as_ref().is_none_or(|b| distance_m < b.distance_m) {
                best = Some(ResolvedResponder {
                    responder: responder.clone(),
                    distance_m,
                });
            }
        }
        best.ok_or(DispatchError::NoResponderAvailable(kind))
    }

    /// Loads `id|kind|name|phone|lat|lon` records, one per line. Blank lines
    /// and lines starting with `#` are ignored.
    pub fn load_str(&mut self, text: &str) -> Result<(), RegistryParseError> {
        for (index, raw) in text.lines().enumerate() {
            let line = index + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split('|').collect();
            if fields.len() != 6 {
                return Err(RegistryParseError {
                    line,
                    message: format!("expected 6 |-separated fields, found {}", fields.len()),
                });
            }
            let id = ResponderId::new(fields[0].trim());
            if id.as_str().is_empty() {
                return Err(RegistryParseError {
                    line,
                    message: "empty responder id".into(),
                });
            }
            let kind = fields[1]
                .trim()
                .parse::<ResponderKind>()
                .map_err(|message| RegistryParseError { line, message })?;
            let name = fields[2].trim().to_owned();
            let phone = fields[3].trim().to_owned();
            if phone.is_empty() {
                return Err(RegistryParseError {
                    line,
                    message: "empty phone number".into(),
                });
            }
            let lat = parse_coord(fields[4], "latitude", line)?;
            let lon = parse_coord(fields[5], "longitude", line)?;
            let location = GeoCoordinate::new(lat, lon).map_err(|e| RegistryParseError {
                line,
                message: e.to_string(),
            })?;
            self.register(Responder {
                id,
                kind,
                name,
                phone,
                location,
            })
            .map_err(|e| RegistryParseError {
                line,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn parse_str(text: &str) -> Result<Self, RegistryParseError> {
        let mut registry = Self::new();
        registry.load_str(text)?;
        Ok(registry)
    }
}

fn parse_coord(field: &str, what: &str, line: usize) -> Result<f64, RegistryParseError> {
    field.trim().parse::<f64>().map_err(|_| RegistryParseError {
        line,
        message: format!("invalid {what} `{}`", field.trim()),
    })
}

/// Append-only record store. Appends are serialized internally so concurrent
/// `handle_report` calls produce unique, gap-free sequence numbers.
#[derive(Debug, Default)]
pub struct DispatchStore {
    records: Mutex<Vec<DispatchRecord>>,
}

impl DispatchStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.records.lock().expect("dispatch store poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn records(&self) -> Vec<DispatchRecord> {
        self.records
            .lock()
            .expect("dispatch store poisoned")
            .clone()
    }

    fn append(&self, report: CollisionReport, plan: DispatchPlan) -> u64 {
        let mut records = self.records.lock().expect("dispatch store poisoned");
        let sequence_number = records.len() as u64 + 1;
        records.push(DispatchRecord {
            sequence_number,
            report,
            plan,
        });
        sequence_number
    }
}

/// Resolves the nearest hospital and police station (both mandatory), plus
/// the nearest insurer when the report names a policy and one is registered,
/// then appends an immutable record to the store.
pub fn handle_report(
    registry: &ResponderRegistry,
    store: &DispatchStore,
    report: CollisionReport,
) -> Result<DispatchPlan, DispatchError> {
    let hospital = registry.nearest(ResponderKind::Hospital, report.location)?;
    let police = registry.nearest(ResponderKind::Police, report.location)?;
    let insurance = if report.policy_id.is_some() {
        registry
            .nearest(ResponderKind::Insurance, report.location)
            .ok()
    } else {
        None
    };

    let plan = DispatchPlan {
        hospital,
        police,
        insurance,
    };
    store.append(report, plan.clone());
    Ok(plan)
}
