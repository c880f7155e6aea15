//! Post-run digest of an event log: counts per event kind, the worst
//! proximity level each vehicle reached, and how long dispatch took after a
//! collision.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::controller::ProximityLevel;
use crate::event_log::{EventKind, EventLog, EventPayload};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VehicleSummary {
    pub max_severity: Option<ProximityLevel>,
    pub collision_tick: Option<u64>,
    /// Ticks from `collision_detected` to `dispatch_resolved`; absent when
    /// the driver acknowledged in time (or nothing was dispatched).
    pub time_to_dispatch_ticks: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub event_counts: BTreeMap<String, u64>,
    pub vehicles: BTreeMap<String, VehicleSummary>,
}

pub fn summarize(log: &EventLog) -> RunSummary {
    let mut event_counts: BTreeMap<String, u64> = EventKind::ALL
        .iter()
        .map(|kind| (kind.as_str().to_owned(), 0))
        .collect();
    let mut vehicles: BTreeMap<String, VehicleSummary> = BTreeMap::new();

    for record in log.iter() {
        *event_counts
            .entry(record.kind().as_str().to_owned())
            .or_default() += 1;

        let Some(vehicle) = &record.vehicle else {
            continue;
        };
        let entry = vehicles
            .entry(vehicle.as_str().to_owned())
            .or_insert(VehicleSummary {
                max_severity: None,
                collision_tick: None,
                time_to_dispatch_ticks: None,
            });
        match &record.payload {
            EventPayload::IndicatorChange { level, .. } => {
                if entry.max_severity.is_none_or(|seen| *level > seen) {
                    entry.max_severity = Some(*level);
                }
            }
            EventPayload::CollisionDetected { .. } => {
                if entry.collision_tick.is_none() {
                    entry.collision_tick = Some(record.tick);
                }
            }
            EventPayload::DispatchResolved { .. } if entry.time_to_dispatch_ticks.is_none() => {
                if let Some(collision) = entry.collision_tick {
                    entry.time_to_dispatch_ticks = Some(record.tick.saturating_sub(collision));
                }
            }
            _ => {}
        }
    }

    RunSummary {
        event_counts,
        vehicles,
    }
}
