//! Replayable run trace: one record per observable event, encoded one per
//! line as `key=value` pairs so logs stay greppable and diff-stable.
//!
//! Records are kept sorted by `(tick, vehicle, kind)`. The kind order is
//! fixed as: collision_detected, ack_pressed, indicator_change, escalated,
//! geo_fix, sms_sent, dispatch_resolved, v2v_sent, v2v_received — which also
//! makes the escalation sequence (geo fix, family SMS, cloud report, V2V
//! alert) read in causal order within a tick.

use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::controller::{IndicatorState, ProximityLevel};
use crate::dispatch::ResponderId;
use crate::v2v::V2vKind;
use crate::world::VehicleId;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {message}")]
pub struct LogParseError {
    pub line: usize,
    pub message: String,
}

/// Event kinds in their fixed within-tick order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EventKind {
    CollisionDetected,
    AckPressed,
    IndicatorChange,
    Escalated,
    GeoFix,
    SmsSent,
    DispatchResolved,
    V2vSent,
    V2vReceived,
}

impl EventKind {
    pub const ALL: [EventKind; 9] = [
        EventKind::CollisionDetected,
        EventKind::AckPressed,
        EventKind::IndicatorChange,
        EventKind::Escalated,
        EventKind::GeoFix,
        EventKind::SmsSent,
        EventKind::DispatchResolved,
        EventKind::V2vSent,
        EventKind::V2vReceived,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::CollisionDetected => "collision_detected",
            EventKind::AckPressed => "ack_pressed",
            EventKind::IndicatorChange => "indicator_change",
            EventKind::Escalated => "escalated",
            EventKind::GeoFix => "geo_fix",
            EventKind::SmsSent => "sms_sent",
            EventKind::DispatchResolved => "dispatch_resolved",
            EventKind::V2vSent => "v2v_sent",
            EventKind::V2vReceived => "v2v_received",
        }
    }
}

impl FromStr for EventKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EventKind::ALL
            .iter()
            .find(|k| k.as_str() == s)
            .copied()
            .ok_or_else(|| format!("unknown event kind `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventPayload {
    CollisionDetected {
        lane_pos_m: f64,
    },
    AckPressed,
    IndicatorChange {
        level: ProximityLevel,
        indicators: IndicatorState,
    },
    Escalated {
        trigger_tick: u64,
    },
    GeoFix {
        lat_deg: f64,
        lon_deg: f64,
    },
    SmsSent {
        to: String,
        body: String,
    },
    DispatchResolved {
        seq: u64,
        hospital: (ResponderId, f64),
        police: (ResponderId, f64),
        insurance: Option<(ResponderId, f64)>,
    },
    V2vSent {
        sender_id: VehicleId,
        kind: V2vKind,
        lat_deg: f64,
        lon_deg: f64,
        recipients: u64,
    },
    V2vReceived {
        sender_id: VehicleId,
        kind: V2vKind,
        lat_deg: f64,
        lon_deg: f64,
    },
}

impl EventPayload {
    pub fn kind(&self) -> EventKind {
        match self {
            EventPayload::CollisionDetected { .. } => EventKind::CollisionDetected,
            EventPayload::AckPressed => EventKind::AckPressed,
            EventPayload::IndicatorChange { .. } => EventKind::IndicatorChange,
            EventPayload::Escalated { .. } => EventKind::Escalated,
            EventPayload::GeoFix { .. } => EventKind::GeoFix,
            EventPayload::SmsSent { .. } => EventKind::SmsSent,
            EventPayload::DispatchResolved { .. } => EventKind::DispatchResolved,
            EventPayload::V2vSent { .. } => EventKind::V2vSent,
            EventPayload::V2vReceived { .. } => EventKind::V2vReceived,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub tick: u64,
    pub vehicle: Option<VehicleId>,
    pub payload: EventPayload,
}

impl EventRecord {
    pub fn kind(&self) -> EventKind {
        self.payload.kind()
    }

    fn sort_key(&self) -> (u64, Option<&VehicleId>, EventKind) {
        (self.tick, self.vehicle.as_ref(), self.kind())
    }

    pub fn encode(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "tick={}", self.tick);
        if let Some(vehicle) = &self.vehicle {
            push_field(&mut out, "vehicle", vehicle.as_str());
        }
        push_field(&mut out, "event", self.kind().as_str());
        match &self.payload {
            EventPayload::CollisionDetected { lane_pos_m } => {
                push_field(&mut out, "lane_pos_m", &format!("{lane_pos_m:.2}"));
            }
            EventPayload::AckPressed => {}
            EventPayload::IndicatorChange { level, indicators } => {
                push_field(&mut out, "level", level.as_str());
                for (key, value) in [
                    ("green", indicators.green),
                    ("yellow", indicators.yellow),
                    ("red", indicators.red),
                    ("blue", indicators.blue),
                    ("buzzer", indicators.buzzer),
                ] {
                    push_field(&mut out, key, if value { "true" } else { "false" });
                }
            }
            EventPayload::Escalated { trigger_tick } => {
                push_field(&mut out, "trigger_tick", &trigger_tick.to_string());
            }
            EventPayload::GeoFix { lat_deg, lon_deg } => {
                push_field(&mut out, "lat_deg", &format!("{lat_deg:.5}"));
                push_field(&mut out, "lon_deg", &format!("{lon_deg:.5}"));
            }
            EventPayload::SmsSent { to, body } => {
                push_field(&mut out, "to", to);
                push_field(&mut out, "body", body);
            }
            EventPayload::DispatchResolved {
                seq,
                hospital,
                police,
                insurance,
            } => {
                push_field(&mut out, "seq", &seq.to_string());
                push_field(&mut out, "hospital", hospital.0.as_str());
                push_field(&mut out, "hospital_m", &format!("{:.1}", hospital.1));
                push_field(&mut out, "police", police.0.as_str());
                push_field(&mut out, "police_m", &format!("{:.1}", police.1));
                if let Some((id, distance)) = insurance {
                    push_field(&mut out, "insurance", id.as_str());
                    push_field(&mut out, "insurance_m", &format!("{distance:.1}"));
                }
            }
            EventPayload::V2vSent {
                sender_id,
                kind,
                lat_deg,
                lon_deg,
                recipients,
            } => {
                push_field(&mut out, "sender_id", sender_id.as_str());
                push_field(&mut out, "kind", kind.as_str());
                push_field(&mut out, "lat_deg", &format!("{lat_deg:.5}"));
                push_field(&mut out, "lon_deg", &format!("{lon_deg:.5}"));
                push_field(&mut out, "recipients", &recipients.to_string());
            }
            EventPayload::V2vReceived {
                sender_id,
                kind,
                lat_deg,
                lon_deg,
            } => {
                push_field(&mut out, "sender_id", sender_id.as_str());
                push_field(&mut out, "kind", kind.as_str());
                push_field(&mut out, "lat_deg", &format!("{lat_deg:.5}"));
                push_field(&mut out, "lon_deg", &format!("{lon_deg:.5}"));
            }
        }
        out
    }

    pub fn parse(line: &str, line_no: usize) -> Result<Self, LogParseError> {
        let err = |message: String| LogParseError {
            line: line_no,
            message,
        };
        let fields = split_fields(line, line_no)?;
        let get = |key: &str| -> Result<&str, LogParseError> {
            fields
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| err(format!("missing field `{key}`")))
        };
        let get_u64 = |key: &str| -> Result<u64, LogParseError> {
            get(key)?
                .parse()
                .map_err(|_| err(format!("invalid integer in `{key}`")))
        };
        let get_f64 = |key: &str| -> Result<f64, LogParseError> {
            get(key)?
                .parse()
                .map_err(|_| err(format!("invalid number in `{key}`")))
        };
        let get_bool = |key: &str| -> Result<bool, LogParseError> {
            match get(key)? {
                "true" => Ok(true),
                "false" => Ok(false),
                other => Err(err(format!("invalid bool `{other}` in `{key}`"))),
            }
        };

        let tick = get_u64("tick")?;
        let vehicle = fields
            .iter()
            .find(|(k, _)| k == "vehicle")
            .map(|(_, v)| VehicleId::new(v.clone()));
        let kind: EventKind = get("event")?.parse().map_err(err)?;

        let payload = match kind {
            EventKind::CollisionDetected => EventPayload::CollisionDetected {
                lane_pos_m: get_f64("lane_pos_m")?,
            },
            EventKind::AckPressed => EventPayload::AckPressed,
            EventKind::IndicatorChange => EventPayload::IndicatorChange {
                level: get("level")?.parse().map_err(err)?,
                indicators: IndicatorState {
                    green: get_bool("green")?,
                    yellow: get_bool("yellow")?,
                    red: get_bool("red")?,
                    blue: get_bool("blue")?,
                    buzzer: get_bool("buzzer")?,
                },
            },
            EventKind::Escalated => EventPayload::Escalated {
                trigger_tick: get_u64("trigger_tick")?,
            },
            EventKind::GeoFix => EventPayload::GeoFix {
                lat_deg: get_f64("lat_deg")?,
                lon_deg: get_f64("lon_deg")?,
            },
            EventKind::SmsSent => EventPayload::SmsSent {
                to: get("to")?.to_owned(),
                body: get("body")?.to_owned(),
            },
            EventKind::DispatchResolved => {
                let insurance = match fields.iter().find(|(k, _)| k == "insurance") {
                    Some((_, id)) => Some((ResponderId::new(id.clone()), get_f64("insurance_m")?)),
                    None => None,
                };
                EventPayload::DispatchResolved {
                    seq: get_u64("seq")?,
                    hospital: (ResponderId::new(get("hospital")?), get_f64("hospital_m")?),
                    police: (ResponderId::new(get("police")?), get_f64("police_m")?),
                    insurance,
                }
            }
            EventKind::V2vSent => EventPayload::V2vSent {
                sender_id: VehicleId::new(get("sender_id")?),
                kind: get("kind")?.parse().map_err(err)?,
                lat_deg: get_f64("lat_deg")?,
                lon_deg: get_f64("lon_deg")?,
                recipients: get_u64("recipients")?,
            },
            EventKind::V2vReceived => EventPayload::V2vReceived {
                sender_id: VehicleId::new(get("sender_id")?),
                kind: get("kind")?.parse().map_err(err)?,
                lat_deg: get_f64("lat_deg")?,
                lon_deg: get_f64("lon_deg")?,
            },
        };

        Ok(EventRecord {
            tick,
            vehicle,
            payload,
        })
    }
}

fn push_field(out: &mut String, key: &str, value: &str) {
    out.push(' ');
    out.push_str(key);
    out.push('=');
    if value.is_empty() || value.contains([' ', '"', '\\']) {
        out.push('"');
        for c in value.chars() {
            if c == '"' || c == '\\' {
                out.push('\\');
            }
            out.push(c);
        }
        out.push('"');
    } else {
        out.push_str(value);
    }
}

fn split_fields(line: &str, line_no: usize) -> Result<Vec<(String, String)>, LogParseError> {
    let err = |message: &str| LogParseError {
        line: line_no,
        message: message.to_owned(),
    };
    let mut fields = Vec::new();
    let mut chars = line.chars().peekable();

    while chars.peek().is_some() {
        while chars.peek() == Some(&' ') {
            chars.next();
        }
        if chars.peek().is_none() {
            break;
        }
        let mut key = String::new();
        for c in chars.by_ref() {
            if c == '=' {
                break;
            }
            if c == ' ' {
                return Err(err("field without `=`"));
            }
            key.push(c);
        }
        if key.is_empty() {
            return Err(err("empty field key"));
        }
        let mut value = String::new();
        if chars.peek() == Some(&'"') {
            chars.next();
            let mut closed = false;
            while let Some(c) = chars.next() {
                match c {
                    '\\' => match chars.next() {
                        Some(escaped) => value.push(escaped),
                        None => return Err(err("dangling escape in quoted value")),
                    },
                    '"' => {
                        closed = true;
                        break;
                    }
                    _ => value.push(c),
                }
            }
            if !closed {
                return Err(err("unterminated quoted value"));
            }
        } else {
            while let Some(&c) = chars.peek() {
                if c == ' ' {
                    break;
                }
                value.push(c);
                chars.next();
            }
        }
        fields.push((key, value));
    }
    Ok(fields)
}

/// The full ordered trace of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    records: Vec<EventRecord>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn records(&self) -> &[EventRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &EventRecord> {
        self.records.iter()
    }

    /// Appends one tick's worth of records, sorting them into the canonical
    /// `(vehicle, kind)` order. The sort is stable, so records with the same
    /// key (e.g. several SMS sends) keep their emission order.
    pub fn append_tick(&mut self, mut records: Vec<EventRecord>) {
        records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        self.records.extend(records);
    }

    pub fn encode(&self) -> String {
        let mut out = String::new();
        for record in &self.records {
            out.push_str(&record.encode());
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, LogParseError> {
        let mut records = Vec::new();
        for (index, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            records.push(EventRecord::parse(line, index + 1)?);
        }
        Ok(Self { records })
    }

    /// True when records are sorted by `(tick, vehicle, kind)`.
    pub fn is_sorted(&self) -> bool {
        self.records
            .windows(2)
            .all(|w| w[0].sort_key() <= w[1].sort_key())
    }
}
