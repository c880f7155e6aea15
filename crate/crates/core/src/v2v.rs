//! Range-limited broadcast medium. Messages reach every equipped vehicle
//! within range of the sender, instantly and losslessly; vehicles without
//! the system neither send nor receive.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::geo::GeoCoordinate;
use crate::world::{Vehicle, VehicleId, WorldState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum V2vError {
    #[error("unknown vehicle `{0}`")]
    UnknownVehicle(VehicleId),
    #[error("vehicle `{0}` is not equipped with the alert system")]
    SenderNotEquipped(VehicleId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum V2vKind {
    ProximityWarning,
    CollisionAlert,
}

impl V2vKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            V2vKind::ProximityWarning => "proximity_warning",
            V2vKind::CollisionAlert => "collision_alert",
        }
    }
}

impl fmt::Display for V2vKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for V2vKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "proximity_warning" => Ok(V2vKind::ProximityWarning),
            "collision_alert" => Ok(V2vKind::CollisionAlert),
            other => Err(format!("unknown v2v message kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct V2vMessage {
    pub sender_id: VehicleId,
    pub kind: V2vKind,
    pub location: GeoCoordinate,
    pub sender_lane_pos_m: f64,
    pub tick: u64,
}

/// Per-vehicle received-message lists. Broadcasts within a tick must be
/// applied in ascending sender order so each inbox stays sorted by
/// `(tick, sender_id)`.
#[derive(Debug, Clone, Default)]
pub struct Inboxes {
    map: BTreeMap<VehicleId, Vec<V2vMessage>>,
}

impl Inboxes {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn messages_for(&self, id: &VehicleId) -> &[V2vMessage] {
        self.map.get(id).map_or(&[], Vec::as_slice)
    }

    pub fn total_delivered(&self) -> usize {
        self.map.values().map(Vec::len).sum()
    }

    fn push(&mut self, recipient: VehicleId, msg: V2vMessage) {
        self.map.entry(recipient).or_default().push(msg);
    }
}

/// Delivers `msg` to every equipped vehicle other than the sender whose lane
/// position lies within `range_m` of the sender's, appending to each
/// recipient's inbox. Returns the recipient set.
pub fn broadcast(
    world: &WorldState,
    msg: &V2vMessage,
    range_m: f64,
    inboxes: &mut Inboxes,
) -> Result<BTreeSet<VehicleId>, V2vError> {
    debug_assert!(range_m > 0.0);
    let sender = world
        .vehicle(&msg.sender_id)
        .map_err(|_| V2vError::UnknownVehicle(msg.sender_id.clone()))?;
    if !sender.equipped {
        return Err(V2vError::SenderNotEquipped(sender.id.clone()));
    }

    let recipients: BTreeSet<VehicleId> = world
        .vehicles()
        .filter(|v| reachable(v, msg, range_m))
        .map(|v| v.id.clone())
        .collect();
    for id in &recipients {
        inboxes.push(id.clone(), msg.clone());
    }
    Ok(recipients)
}

fn reachable(candidate: &Vehicle, msg: &V2vMessage, range_m: f64) -> bool {
    candidate.equipped
        && candidate.id != msg.sender_id
        && (candidate.lane_pos_m - msg.sender_lane_pos_m).abs() <= range_m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{Vehicle, WorldConfig};
    use proptest::prelude::*;

    fn message_from(world: &WorldState, sender: &str, tick: u64) -> V2vMessage {
        let id = VehicleId::from(sender);
        let vehicle = world.vehicle(&id).unwrap();
        V2vMessage {
            sender_id: id,
            kind: V2vKind::ProximityWarning,
            location: world.geo_fix(&vehicle.id).unwrap(),
            sender_lane_pos_m: vehicle.lane_pos_m,
            tick,
        }
    }

    fn build_world(vehicles: Vec<Vehicle>) -> WorldState {
        WorldState::new(WorldConfig::default(), vehicles, vec![]).unwrap()
    }

    #[test]
    fn delivers_only_within_range() {
        let world = build_world(vec![
            Vehicle::new("sender", 0.0, 0.0),
            Vehicle::new("near", 100.0, 0.0),
            Vehicle::new("far", 500.0, 0.0),
        ]);
        let mut inboxes = Inboxes::new();
        let msg = message_from(&world, "sender", 1);
        let recipients = broadcast(&world, &msg, 300.0, &mut inboxes).unwrap();
        assert_eq!(recipients, BTreeSet::from(["near".into()]));
        assert_eq!(inboxes.messages_for(&"near".into()).len(), 1);
        assert!(inboxes.messages_for(&"far".into()).is_empty());
    }

    #[test]
    fn skips_unequipped_receivers() {
        let mut plain = Vehicle::new("plain", 50.0, 0.0);
        plain.equipped = false;
        let world = build_world(vec![Vehicle::new("sender", 0.0, 0.0), plain]);
        let mut inboxes = Inboxes::new();
        let msg = message_from(&world, "sender", 1);
        let recipients = broadcast(&world, &msg, 300.0, &mut inboxes).unwrap();
        assert!(recipients.is_empty());
        assert_eq!(inboxes.total_delivered(), 0);
    }

    #[test]
    fn lone_sender_reaches_nobody() {
        let world = build_world(vec![Vehicle::new("sender", 0.0, 0.0)]);
        let mut inboxes = Inboxes::new();
        let msg = message_from(&world, "sender", 1);
        assert!(broadcast(&world, &msg, 300.0, &mut inboxes)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn unequipped_sender_cannot_transmit() {
        let mut sender = Vehicle::new("sender", 0.0, 0.0);
        sender.equipped = false;
        let world = build_world(vec![sender, Vehicle::new("other", 10.0, 0.0)]);
        let mut inboxes = Inboxes::new();
        let msg = V2vMessage {
            sender_id: "sender".into(),
            kind: V2vKind::CollisionAlert,
            location: world.geo_fix(&"sender".into()).unwrap(),
            sender_lane_pos_m: 0.0,
            tick: 1,
        };
        assert_eq!(
            broadcast(&world, &msg, 300.0, &mut inboxes),
            Err(V2vError::SenderNotEquipped("sender".into()))
        );
    }

    #[test]
    fn unknown_sender_is_an_error() {
        let world = build_world(vec![Vehicle::new("a", 0.0, 0.0)]);
        let mut inboxes = Inboxes::new();
        let msg = V2vMessage {
            sender_id: "ghost".into(),
            kind: V2vKind::CollisionAlert,
            location: world.geo_fix(&"a".into()).unwrap(),
            sender_lane_pos_m: 0.0,
            tick: 1,
        };
        assert_eq!(
            broadcast(&world, &msg, 300.0, &mut inboxes),
            Err(V2vError::UnknownVehicle("ghost".into()))
        );
    }

    fn arb_fleet() -> impl Strategy<Value = (Vec<(f64, bool)>, f64)> {
        (
            prop::collection::vec((0.0f64..4000.0, prop::bool::weighted(0.7)), 2..100),
            50.0f64..1000.0,
        )
    }

    proptest! {
        /// Recipient set equals the brute-force filter over all vehicles.
        #[test]
        fn recipients_match_brute_force((fleet, range) in arb_fleet()) {
            let vehicles: Vec<Vehicle> = fleet
                .iter()
                .enumerate()
                .map(|(i, (pos, equipped))| {
                    let mut v = Vehicle::new(format!("v{i:03}"), *pos, 0.0);
                    v.equipped = *equipped;
                    v
                })
                .collect();
            let sender = vehicles
                .iter()
                .find(|v| v.equipped)
                .map(|v| v.id.clone());
            let Some(sender) = sender else { return Ok(()) };
            let world = build_world(vehicles);
            let msg = message_from(&world, sender.as_str(), 1);

            let mut inboxes = Inboxes::new();
            let recipients = broadcast(&world, &msg, range, &mut inboxes).unwrap();

            let expected: BTreeSet<VehicleId> = world
                .vehicles()
                .filter(|v| v.equipped && v.id != sender && (v.lane_pos_m - msg.sender_lane_pos_m).abs() <= range)
                .map(|v| v.id.clone())
                .collect();
            prop_assert_eq!(&recipients, &expected);
            // No loss, no duplication.
            prop_assert_eq!(inboxes.total_delivered(), recipients.len());
        }

        /// Reachability is symmetric between equipped vehicles.
        #[test]
        fn reachability_is_symmetric((fleet, range) in arb_fleet()) {
            let vehicles: Vec<Vehicle> = fleet
                .iter()
                .enumerate()
                .map(|(i, (pos, _))| Vehicle::new(format!("v{i:03}"), *pos, 0.0))
                .collect();
            let world = build_world(vehicles);
            let ids: Vec<VehicleId> = world.vehicles().map(|v| v.id.clone()).collect();
            for a in &ids {
                let msg_a = message_from(&world, a.as_str(), 1);
                for b in &ids {
                    if a == b {
                        continue;
                    }
                    let msg_b = message_from(&world, b.as_str(), 1);
                    let a_reaches_b = reachable(world.vehicle(b).unwrap(), &msg_a, range);
                    let b_reaches_a = reachable(world.vehicle(a).unwrap(), &msg_b, range);
                    prop_assert_eq!(a_reaches_b, b_reaches_a);
                }
            }
        }

        /// Inboxes stay ordered by (tick, sender) when broadcasts are applied
        /// in tick order and ascending sender order within a tick.
        #[test]
        fn inbox_order_follows_tick_then_sender(rounds in 1u64..6) {
            let world = build_world(vec![
                Vehicle::new("a", 0.0, 0.0),
                Vehicle::new("b", 50.0, 0.0),
                Vehicle::new("c", 100.0, 0.0),
            ]);
            let mut inboxes = Inboxes::new();
            for tick in 1..=rounds {
                for sender in ["a", "b", "c"] {
                    let msg = message_from(&world, sender, tick);
                    broadcast(&world, &msg, 300.0, &mut inboxes).unwrap();
                }
            }
            for id in ["a", "b", "c"] {
                let inbox = inboxes.messages_for(&id.into());
                let keys: Vec<(u64, &str)> = inbox.iter().map(|m| (m.tick, m.sender_id.as_str())).collect();
                let mut sorted = keys.clone();
                sorted.sort();
                prop_assert_eq!(keys, sorted);
            }
        }
    }
}
