//! Helpers shared by the integration and acceptance suites.
#![allow(dead_code)] // not every test binary uses every helper

use std::collections::BTreeMap;
use std::path::PathBuf;

use roadguard_core::event_log::{EventKind, EventLog, EventPayload};
use roadguard_core::world::VehicleId;

pub fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

pub fn bundled_scenarios() -> Vec<PathBuf> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(scenarios_dir())
        .expect("scenarios directory exists")
        .map(|entry| entry.expect("readable dir entry").path())
        .filter(|path| path.extension().is_some_and(|ext| ext == "scn"))
        .collect();
    paths.sort();
    assert!(!paths.is_empty(), "no bundled scenarios found");
    paths
}

/// Structural invariants every run log must satisfy: canonical record order,
/// sent/received message conservation, and escalation causality.
pub fn assert_log_invariants(log: &EventLog, ack_window_ticks: u64) {
    assert!(
        log.is_sorted(),
        "log records must be sorted by (tick, vehicle, kind)"
    );

    // Conservation: each v2v_sent's recipient count equals the number of
    // matching v2v_received records at the same tick.
    let mut sent: BTreeMap<(u64, VehicleId, &str), u64> = BTreeMap::new();
    let mut received: BTreeMap<(u64, VehicleId, &str), u64> = BTreeMap::new();
    for record in log.iter() {
        match &record.payload {
            EventPayload::V2vSent {
                sender_id,
                kind,
                recipients,
                ..
            } => {
                let previous =
                    sent.insert((record.tick, sender_id.clone(), kind.as_str()), *recipients);
                assert!(previous.is_none(), "one v2v_sent per (tick, sender, kind)");
            }
            EventPayload::V2vReceived {
                sender_id, kind, ..
            } => {
                *received
                    .entry((record.tick, sender_id.clone(), kind.as_str()))
                    .or_default() += 1;
            }
            _ => {}
        }
    }
    for (key, count) in &sent {
        assert_eq!(
            received.get(key).copied().unwrap_or(0),
            *count,
            "v2v_received count must match recipients for {key:?}"
        );
    }
    for key in received.keys() {
        assert!(
            sent.contains_key(key),
            "v2v_received without matching v2v_sent: {key:?}"
        );
    }

    // Causality: each dispatch_resolved has exactly one earlier escalated
    // record for the same vehicle, ack-window ticks after its collision.
    let mut collision_tick: BTreeMap<VehicleId, u64> = BTreeMap::new();
    let mut escalated_seen: BTreeMap<VehicleId, Vec<u64>> = BTreeMap::new();
    for record in log.iter() {
        let Some(vehicle) = record.vehicle.clone() else {
            continue;
        };
        match record.kind() {
            EventKind::CollisionDetected => {
                collision_tick.entry(vehicle).or_insert(record.tick);
            }
            EventKind::Escalated => {
                escalated_seen.entry(vehicle).or_default().push(record.tick);
            }
            EventKind::DispatchResolved => {
                let escalations = escalated_seen.get(&vehicle).unwrap_or_else(|| {
                    panic!("dispatch for `{vehicle}` without earlier escalated record")
                });
                assert_eq!(
                    escalations.len(),
                    1,
                    "exactly one escalation per dispatched vehicle"
                );
                let collided = collision_tick
                    .get(&vehicle)
                    .unwrap_or_else(|| panic!("dispatch for `{vehicle}` without a collision"));
                assert_eq!(
                    escalations[0],
                    collided + ack_window_ticks,
                    "escalation for `{vehicle}` must land ack-window ticks after its collision"
                );
            }
            _ => {}
        }
    }
}

pub fn count_kind(log: &EventLog, kind: EventKind) -> usize {
    log.iter().filter(|r| r.kind() == kind).count()
}
