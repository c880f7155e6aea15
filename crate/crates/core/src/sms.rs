//! Stub GSM transport: renders family alert messages for a collision report
//! and records every send in an inspectable outbox. The stub never drops a
//! message.

use crate::dispatch::CollisionReport;

/// Two SMS segments.
pub const MAX_SMS_BODY_CHARS: usize = 320;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmsMessage {
    pub to: String,
    pub body: String,
    pub tick: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeliveryStatus {
    Queued,
    Sent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutboxEntry {
    pub message: SmsMessage,
    pub status: DeliveryStatus,
}

#[derive(Debug, Clone, Default)]
pub struct Outbox {
    entries: Vec<OutboxEntry>,
}

impl Outbox {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the message with status `Sent`; the stub transport is
    /// lossless and never fails. Duplicate messages are appended again.
    pub fn send(&mut self, message: SmsMessage) {
        self.entries.push(OutboxEntry {
            message,
            status: DeliveryStatus::Sent,
        });
    }

    pub fn entries(&self) -> &[OutboxEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Renders one alert per contact from the fixed template
/// `COLLISION ALERT vehicle=<id> lat=<lat> lon=<lon> tick=<tick>` with
/// 5-decimal coordinates (about 1 m of precision). Bodies are capped at
/// [`MAX_SMS_BODY_CHARS`].
pub fn family_alert(report: &CollisionReport, contacts: &[String]) -> Vec<SmsMessage> {
    let body = render_body(report);
    contacts
        .iter()
        .map(|to| SmsMessage {
            to: to.clone(),
            body: body.clone(),
            tick: report.tick,
        })
        .collect()
}

fn render_body(report: &CollisionReport) -> String {
    let body = format!(
        "COLLISION ALERT vehicle={} lat={:.5} lon={:.5} tick={}",
        report.vehicle_id,
        report.location.lat_deg(),
        report.location.lon_deg(),
        report.tick,
    );
    if body.chars().count() > MAX_SMS_BODY_CHARS {
        body.chars().take(MAX_SMS_BODY_CHARS).collect()
    } else {
        body
    }
}
