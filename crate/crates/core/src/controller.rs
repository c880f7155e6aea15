//! Per-vehicle alert controller: classifies the forward gap into proximity
//! zones, drives the LED/buzzer indicators, manages the vibration-triggered
//! acknowledgment window, and emits the one-shot escalation sequence when the
//! window expires without a button press.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::v2v::V2vKind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControllerError {
    #[error("invalid distance {0}: must be finite and >= 0")]
    InvalidDistance(f64),
    #[error("out-of-order tick {now}: controller already processed tick {last}")]
    OutOfOrderTick { now: u64, last: u64 },
    #[error("invalid controller config: {0}")]
    InvalidConfig(String),
}

/// Proximity zone, ordered by severity: `Safe < Caution < Warning < Critical`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProximityLevel {
    Safe,
    Caution,
    Warning,
    Critical,
}

impl ProximityLevel {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProximityLevel::Safe => "safe",
            ProximityLevel::Caution => "caution",
            ProximityLevel::Warning => "warning",
            ProximityLevel::Critical => "critical",
        }
    }
}

impl fmt::Display for ProximityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProximityLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "safe" => Ok(ProximityLevel::Safe),
            "caution" => Ok(ProximityLevel::Caution),
            "warning" => Ok(ProximityLevel::Warning),
            "critical" => Ok(ProximityLevel::Critical),
            other => Err(format!("unknown proximity level `{other}`")),
        }
    }
}

/// Lamp and buzzer outputs. Exactly one of the three zone colors is lit;
/// the buzzer only sounds together with red; blue overlays any zone color
/// while an acknowledgment window is open.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndicatorState {
    pub green: bool,
    pub yellow: bool,
    pub red: bool,
    pub blue: bool,
    pub buzzer: bool,
}

impl IndicatorState {
    /// True when the invariants hold: one zone color, buzzer implies red.
    pub fn is_valid(&self) -> bool {
        let zone_colors = u8::from(self.green) + u8::from(self.yellow) + u8::from(self.red);
        zone_colors == 1 && (!self.buzzer || self.red)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerConfig {
    /// Outer alert boundary: anything farther (or out of range) is Safe.
    pub safe_threshold_m: f64,
    pub warning_threshold_m: f64,
    pub critical_threshold_m: f64,
    /// Vibration level at or above which the acknowledgment window opens.
    pub vibration_threshold_g: f64,
    /// Length of the acknowledgment window in seconds.
    pub ack_window_s: u32,
    /// Zone severity at which an upward crossing broadcasts a V2V warning.
    pub v2v_warn_level: ProximityLevel,
    pub v2v_range_m: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            safe_threshold_m: 50.0,
            warning_threshold_m: 30.0,
            critical_threshold_m: 10.0,
            vibration_threshold_g: 4.0,
            ack_window_s: 30,
            v2v_warn_level: ProximityLevel::Critical,
            v2v_range_m: 300.0,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<(), ControllerError> {
        for (name, value) in [
            ("safe_threshold_m", self.safe_threshold_m),
            ("warning_threshold_m", self.warning_threshold_m),
            ("critical_threshold_m", self.critical_threshold_m),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ControllerError::InvalidConfig(format!(
                    "{name} must be finite and > 0"
                )));
            }
        }
        if !(self.critical_threshold_m < self.warning_threshold_m
            && self.warning_threshold_m < self.safe_threshold_m)
        {
            return Err(ControllerError::InvalidConfig(
                "thresholds must satisfy critical < warning < safe".into(),
            ));
        }
        if self.ack_window_s == 0 {
            return Err(ControllerError::InvalidConfig(
                "ack_window_s must be > 0".into(),
            ));
        }
        if !self.vibration_threshold_g.is_finite() || self.vibration_threshold_g <= 0.0 {
            return Err(ControllerError::InvalidConfig(
                "vibration_threshold_g must be finite and > 0".into(),
            ));
        }
        if self.v2v_warn_level == ProximityLevel::Safe {
            return Err(ControllerError::InvalidConfig(
                "v2v_warn_level must be above safe".into(),
            ));
        }
        if !(self.v2v_range_m.is_finite() && self.v2v_range_m > 0.0) {
            return Err(ControllerError::InvalidConfig(
                "v2v_range_m must be finite and > 0".into(),
            ));
        }
        Ok(())
    }

    /// Window length in ticks, rounded up so the window never undershoots
    /// the configured seconds.
    pub fn ack_window_ticks(&self, tick_ms: u32) -> u64 {
        (u64::from(self.ack_window_s) * 1000).div_ceil(u64::from(tick_ms))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Monitoring,
    /// A vibration trigger opened the window at `triggered_tick`; the driver
    /// has until just before `deadline_tick` to press the button.
    AwaitingAck {
        triggered_tick: u64,
        deadline_tick: u64,
    },
    /// Terminal for the run. Indicators keep updating but no further
    /// emergency actions are emitted.
    Escalated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState {
    pub phase: Phase,
    pub last_level: ProximityLevel,
    pub escalation_emitted: bool,
    pub last_tick: Option<u64>,
}

impl ControllerState {
    pub fn new() -> Self {
        Self {
            phase: Phase::Monitoring,
            last_level: ProximityLevel::Safe,
            escalation_emitted: false,
            last_tick: None,
        }
    }
}

impl Default for ControllerState {
    fn default() -> Self {
        Self::new()
    }
}

/// Sensor and driver inputs for one controller cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickInputs {
    pub distance_m: Option<f64>,
    pub vibration_g: f64,
    pub ack_pressed: bool,
    pub now_tick: u64,
    pub tick_ms: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ControllerAction {
    SetIndicators(IndicatorState),
    BroadcastV2V(V2vKind),
    RequestGeoFix,
    SendFamilySms,
    ReportToCloud,
}

/// Maps a forward gap to its proximity zone. Boundaries are inclusive toward
/// the more severe zone: Safe iff d > safe; Caution iff warning < d <= safe;
/// Warning iff critical < d <= warning; Critical iff d <= critical. An absent
/// reading (nothing in sensor range) is Safe.
pub fn classify(
    distance_m: Option<f64>,
    cfg: &ControllerConfig,
) -> Result<ProximityLevel, ControllerError> {
    let Some(d) = distance_m else {
        return Ok(ProximityLevel::Safe);
    };
    if !d.is_finite() || d < 0.0 {
        return Err(ControllerError::InvalidDistance(d));
    }
    Ok(if d > cfg.safe_threshold_m {
        ProximityLevel::Safe
    } else if d > cfg.warning_threshold_m {
        ProximityLevel::Caution
    } else if d > cfg.critical_threshold_m {
        ProximityLevel::Warning
    } else {
        ProximityLevel::Critical
    })
}

/// Indicator outputs for a zone and phase: green/yellow/red for
/// Safe/Caution/Warning, red plus buzzer for Critical, blue overlaid while
/// an acknowledgment window is open.
pub fn indicators_for(level: ProximityLevel, phase: &Phase) -> IndicatorState {
    let mut state = IndicatorState {
        green: false,
        yellow: false,
        red: false,
        blue: matches!(phase, Phase::AwaitingAck { .. }),
        buzzer: false,
    };
    match level {
        ProximityLevel::Safe => state.green = true,
        ProximityLevel::Caution => state.yellow = true,
        ProximityLevel::Warning => state.red = true,
        ProximityLevel::Critical => {
            state.red = true;
            state.buzzer = true;
        }
    }
    state
}

/// Advances the controller by one tick and returns the actions to perform,
/// in a fixed order: indicators first, then an edge-triggered proximity
/// warning, then (on the tick the window expires) the one-shot escalation
/// sequence geo fix -> family SMS -> cloud report -> V2V collision alert.
///
/// A button press any tick strictly before the deadline — including one that
/// lands on the trigger tick itself — cancels the window and suppresses all
/// emergency actions for it.
pub fn controller_tick(
    state: &ControllerState,
    inputs: &TickInputs,
    cfg: &ControllerConfig,
) -> Result<(ControllerState, Vec<ControllerAction>), ControllerError> {
    if inputs.tick_ms == 0 {
        return Err(ControllerError::InvalidConfig("tick_ms must be > 0".into()));
    }
    if let Some(last) = state.last_tick {
        if inputs.now_tick <= last {
            return Err(ControllerError::OutOfOrderTick {
                now: inputs.now_tick,
                last,
            });
        }
    }

    let level = classify(inputs.distance_m, cfg)?;
    let mut next = state.clone();
    let mut escalated_now = false;

    if matches!(next.phase, Phase::Monitoring) && inputs.vibration_g >= cfg.vibration_threshold_g {
        next.phase = Phase::AwaitingAck {
            triggered_tick: inputs.now_tick,
            deadline_tick: inputs.now_tick + cfg.ack_window_ticks(inputs.tick_ms),
        };
    }

    if let Phase::AwaitingAck { deadline_tick, .. } = next.phase {
        if inputs.ack_pressed && inputs.now_tick < deadline_tick {
            next.phase = Phase::Monitoring;
        } else if inputs.now_tick >= deadline_tick {
            next.phase = Phase::Escalated;
            if !next.escalation_emitted {
                next.escalation_emitted = true;
                escalated_now = true;
            }
        }
    }

    let mut actions = vec![ControllerAction::SetIndicators(indicators_for(
        level,
        &next.phase,
    ))];
    if level >= cfg.v2v_warn_level && state.last_level < cfg.v2v_warn_level {
        actions.push(ControllerAction::BroadcastV2V(V2vKind::ProximityWarning));
    }
    if escalated_now {
        actions.extend([
            ControllerAction::RequestGeoFix,
            ControllerAction::SendFamilySms,
            ControllerAction::ReportToCloud,
            ControllerAction::BroadcastV2V(V2vKind::CollisionAlert),
        ]);
    }

    next.last_level = level;
    next.last_tick = Some(inputs.now_tick);
    Ok((next, actions))
}
