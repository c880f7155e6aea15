//! The per-tick run loop wiring every subsystem together. Each tick advances
//! in a fixed order — world step, sensing, controller cycles in ascending
//! vehicle id, action interpretation, log append — so a scenario always
//! produces the same event log, byte for byte.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::controller::{
    classify, controller_tick, ControllerAction, ControllerError, ControllerState, IndicatorState,
    Phase, TickInputs,
};
use crate::dispatch::{
    handle_report, CollisionReport, DispatchError, DispatchStore, ResponderRegistry,
};
use crate::event_log::{EventLog, EventPayload, EventRecord};
use crate::geo::GeoCoordinate;
use crate::scenario::Scenario;
use crate::sms::{family_alert, Outbox};
use crate::v2v::{broadcast, Inboxes, V2vMessage};
use crate::world::{VehicleId, WorldError};

#[derive(Debug, Error)]
#[error("tick {tick}: {source}")]
pub struct RunError {
    pub tick: u64,
    #[source]
    pub source: RunErrorKind,
}

#[derive(Debug, Error)]
pub enum RunErrorKind {
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Controller(#[from] ControllerError),
    #[error(transparent)]
    V2v(#[from] crate::v2v::V2vError),
    #[error(transparent)]
    Dispatch(#[from] DispatchError),
}

struct VehicleRuntime {
    controller: ControllerState,
    last_indicators: Option<IndicatorState>,
    last_fix: Option<GeoCoordinate>,
    vibration_peak_g: f64,
}

/// Runs a validated scenario against a responder registry and returns the
/// event log. Only equipped vehicles run controllers; unequipped vehicles
/// still move and collide but emit nothing beyond `collision_detected`.
///
/// Ticks are 1-based: tick 0 is the initial state. Vehicles that already
/// overlap at tick 0 are latched as collided before the loop starts and
/// produce no events.
pub fn run(scenario: &Scenario, registry: &ResponderRegistry) -> Result<EventLog, RunError> {
    let at = |tick: u64| move |source: RunErrorKind| RunError { tick, source };

    let mut world = scenario
        .build_world()
        .map_err(|e| at(0)(RunErrorKind::World(e)))?;
    let mut log = EventLog::new();
    let mut inboxes = Inboxes::new();
    let mut outbox = Outbox::new();
    let store = DispatchStore::new();

    let mut runtimes: BTreeMap<VehicleId, VehicleRuntime> = world
        .vehicles()
        .filter(|v| v.equipped)
        .map(|v| {
            (
                v.id.clone(),
                VehicleRuntime {
                    controller: ControllerState::new(),
                    last_indicators: None,
                    last_fix: None,
                    vibration_peak_g: 0.0,
                },
            )
        })
        .collect();

    let mut acks_at: BTreeMap<u64, Vec<VehicleId>> = BTreeMap::new();
    for ack in &scenario.ack_events {
        acks_at
            .entry(ack.tick)
            .or_default()
            .push(ack.vehicle.clone());
    }
    let mut speeds_at: BTreeMap<u64, Vec<(VehicleId, f64)>> = BTreeMap::new();
    for event in &scenario.speed_events {
        speeds_at
            .entry(event.tick)
            .or_default()
            .push((event.vehicle.clone(), event.speed_mps));
    }

    for tick in 1..=scenario.duration_ticks {
        let fail = at(tick);
        let mut events: Vec<EventRecord> = Vec::new();

        // Scripted speed changes take effect for the step into this tick.
        // Collided vehicles stay wrecked.
        if let Some(changes) = speeds_at.get(&tick) {
            for (vehicle, speed) in changes {
                if !world.is_collided(vehicle) {
                    world
                        .set_vehicle_speed(vehicle, *speed)
                        .map_err(|e| fail(e.into()))?;
                }
            }
        }

        world = world.step();
        for (vehicle, &collision_tick) in world.collisions() {
            if collision_tick == tick {
                let lane_pos_m = world
                    .vehicle(vehicle)
                    .map_err(|e| fail(e.into()))?
                    .lane_pos_m;
                events.push(EventRecord {
                    tick,
                    vehicle: Some(vehicle.clone()),
                    payload: EventPayload::CollisionDetected { lane_pos_m },
                });
            }
        }

        let ids: Vec<VehicleId> = runtimes.keys().cloned().collect();
        for vehicle_id in ids {
            let distance_m = world
                .forward_distance(&vehicle_id)
                .map_err(|e| fail(e.into()))?;
            let vibration_g = world
                .vibration_level(&vehicle_id)
                .map_err(|e| fail(e.into()))?;
            let ack_pressed = acks_at
                .get(&tick)
                .is_some_and(|pressed| pressed.contains(&vehicle_id));
            if ack_pressed {
                events.push(EventRecord {
                    tick,
                    vehicle: Some(vehicle_id.clone()),
                    payload: EventPayload::AckPressed,
                });
            }

            let runtime = runtimes.get_mut(&vehicle_id).expect("runtime exists");
            runtime.vibration_peak_g = runtime.vibration_peak_g.max(vibration_g);

            let level = classify(distance_m, &scenario.controller).map_err(|e| fail(e.into()))?;
            let inputs = TickInputs {
                distance_m,
                vibration_g,
                ack_pressed,
                now_tick: tick,
                tick_ms: scenario.tick_ms,
            };
            let previous_phase = runtime.controller.phase;
            let (next_state, actions) =
                controller_tick(&runtime.controller, &inputs, &scenario.controller)
                    .map_err(|e| fail(e.into()))?;

            if next_state.phase == Phase::Escalated && previous_phase != Phase::Escalated {
                let trigger_tick = match previous_phase {
                    Phase::AwaitingAck { triggered_tick, .. } => triggered_tick,
                    _ => tick,
                };
                events.push(EventRecord {
                    tick,
                    vehicle: Some(vehicle_id.clone()),
                    payload: EventPayload::Escalated { trigger_tick },
                });
            }
            runtime.controller = next_state;

            for action in actions {
                match action {
                    ControllerAction::SetIndicators(indicators) => {
                        if runtime.last_indicators != Some(indicators) {
                            runtime.last_indicators = Some(indicators);
                            events.push(EventRecord {
                                tick,
                                vehicle: Some(vehicle_id.clone()),
                                payload: EventPayload::IndicatorChange { level, indicators },
                            });
                        }
                    }
                    ControllerAction::BroadcastV2V(kind) => {
                        let sender = world.vehicle(&vehicle_id).map_err(|e| fail(e.into()))?;
                        let location = world.geo_fix(&vehicle_id).map_err(|e| fail(e.into()))?;
                        let msg = V2vMessage {
                            sender_id: vehicle_id.clone(),
                            kind,
                            location,
                            sender_lane_pos_m: sender.lane_pos_m,
                            tick,
                        };
                        let recipients =
                            broadcast(&world, &msg, scenario.controller.v2v_range_m, &mut inboxes)
                                .map_err(|e| fail(e.into()))?;
                        events.push(EventRecord {
                            tick,
                            vehicle: Some(vehicle_id.clone()),
                            payload: EventPayload::V2vSent {
                                sender_id: vehicle_id.clone(),
                                kind,
                                lat_deg: location.lat_deg(),
                                lon_deg: location.lon_deg(),
                                recipients: recipients.len() as u64,
                            },
                        });
                        for recipient in recipients {
                            events.push(EventRecord {
                                tick,
                                vehicle: Some(recipient),
                                payload: EventPayload::V2vReceived {
                                    sender_id: vehicle_id.clone(),
                                    kind,
                                    lat_deg: location.lat_deg(),
                                    lon_deg: location.lon_deg(),
                                },
                            });
                        }
                    }
                    ControllerAction::RequestGeoFix => {
                        let fix = world.geo_fix(&vehicle_id).map_err(|e| fail(e.into()))?;
                        runtime.last_fix = Some(fix);
                        events.push(EventRecord {
                            tick,
                            vehicle: Some(vehicle_id.clone()),
                            payload: EventPayload::GeoFix {
                                lat_deg: fix.lat_deg(),
                                lon_deg: fix.lon_deg(),
                            },
                        });
                    }
                    ControllerAction::SendFamilySms => {
                        let report =
                            build_report(&world, runtime, &vehicle_id, tick).map_err(fail)?;
                        let contacts = world
                            .vehicle(&vehicle_id)
                            .map_err(|e| fail(e.into()))?
                            .family_contacts
                            .clone();
                        for message in family_alert(&report, &contacts) {
                            events.push(EventRecord {
                                tick,
                                vehicle: Some(vehicle_id.clone()),
                                payload: EventPayload::SmsSent {
                                    to: message.to.clone(),
                                    body: message.body.clone(),
                                },
                            });
                            outbox.send(message);
                        }
                    }
                    ControllerAction::ReportToCloud => {
                        let report =
                            build_report(&world, runtime, &vehicle_id, tick).map_err(fail)?;
                        let plan =
                            handle_report(registry, &store, report).map_err(|e| fail(e.into()))?;
                        events.push(EventRecord {
                            tick,
                            vehicle: Some(vehicle_id.clone()),
                            payload: EventPayload::DispatchResolved {
                                seq: store.len() as u64,
                                hospital: (
                                    plan.hospital.responder.id.clone(),
                                    plan.hospital.distance_m,
                                ),
                                police: (plan.police.responder.id.clone(), plan.police.distance_m),
                                insurance: plan
                                    .insurance
                                    .as_ref()
                                    .map(|i| (i.responder.id.clone(), i.distance_m)),
                            },
                        });
                    }
                }
            }
        }

        log.append_tick(events);
    }

    Ok(log)
}

fn build_report(
    world: &crate::world::WorldState,
    runtime: &VehicleRuntime,
    vehicle_id: &VehicleId,
    tick: u64,
) -> Result<CollisionReport, RunErrorKind> {
    let vehicle = world.vehicle(vehicle_id)?;
    let location = match runtime.last_fix {
        Some(fix) => fix,
        None => world.geo_fix(vehicle_id)?,
    };
    Ok(CollisionReport {
        vehicle_id: vehicle_id.clone(),
        location,
        tick,
        vibration_peak_g: runtime.vibration_peak_g,
        policy_id: vehicle.policy_id.clone(),
    })
}
