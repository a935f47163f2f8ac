use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::{Action, ClassifiedEvent, EventType, OrderKind, RawMessage, Side, Sign};
use crate::error::{Error, Result};

const MS_PER_DAY: i64 = 86_400_000;

/// Outcome of classifying one raw message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Event {
        etype: EventType,
        sign: Sign,
    },
    /// The message did not touch the best quotes.
    Skip,
}

/// Classify a level-1 message into one of the six event types.
///
/// Any message that trades against resting volume is a market order, including
/// marketable limit orders. Limit orders at or inside the best quotes are `LO`;
/// deeper ones are skipped. Cancellations are `CA` only at the best quotes and
/// carry the reversed sign. An event is primed iff `bid + ask` changed.
pub fn classify(msg: &RawMessage) -> std::result::Result<Classification, String> {
    if msg.bid_before >= msg.ask_before {
        return Err(format!(
            "bid_before {} >= ask_before {}",
            msg.bid_before, msg.ask_before
        ));
    }
    if msg.bid_after >= msg.ask_after {
        return Err(format!(
            "bid_after {} >= ask_after {}",
            msg.bid_after, msg.ask_after
        ));
    }

    let side_sign = match msg.side {
        Side::Buy => Sign::Buy,
        Side::Sell => Sign::Sell,
    };
    let primed = msg.mid_after() != msg.mid_before();
    let p = msg.price_ticks;

    let (kind, sign) = match (msg.action, msg.side) {
        (Action::Trade, _) => (OrderKind::Market, side_sign),
        (Action::Add, Side::Buy) if p >= msg.ask_before => (OrderKind::Market, side_sign),
        (Action::Add, Side::Buy) if p >= msg.bid_before => (OrderKind::Limit, side_sign),
        (Action::Add, Side::Sell) if p <= msg.bid_before => (OrderKind::Market, side_sign),
        (Action::Add, Side::Sell) if p <= msg.ask_before => (OrderKind::Limit, side_sign),
        (Action::Add, _) => return Ok(Classification::Skip),
        (Action::Cancel, Side::Buy) if p == msg.bid_before => (OrderKind::Cancel, Sign::Sell),
        (Action::Cancel, Side::Sell) if p == msg.ask_before => (OrderKind::Cancel, Sign::Buy),
        (Action::Cancel, _) => return Ok(Classification::Skip),
    };

    Ok(Classification::Event {
        etype: EventType::new(kind, primed),
        sign,
    })
}

/// Intraday window kept at ingestion, in milliseconds after midnight (UTC).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionFilter {
    pub start_ms: i64,
    pub end_ms: i64,
    pub enabled: bool,
}

impl Default for SessionFilter {
    fn default() -> Self {
        SessionFilter {
            start_ms: 8 * 3_600_000,
            end_ms: 16 * 3_600_000 + 30 * 60_000,
            enabled: true,
        }
    }
}

impl SessionFilter {
    pub fn disabled() -> Self {
        SessionFilter {
            enabled: false,
            ..Default::default()
        }
    }

    /// Parse `HH:MM-HH:MM`.
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = || Error::Config(format!("invalid session `{spec}`, expected HH:MM-HH:MM"));
        let (a, b) = spec.split_once('-').ok_or_else(bad)?;
        let hm = |s: &str| -> Option<i64> {
            let (h, m) = s.trim().split_once(':')?;
            let h: i64 = h.parse().ok()?;
            let m: i64 = m.parse().ok()?;
            (h <= 24 && m < 60).then_some((h * 60 + m) * 60_000)
        };
        let start_ms = hm(a).ok_or_else(bad)?;
        let end_ms = hm(b).ok_or_else(bad)?;
        if start_ms >= end_ms {
            return Err(bad());
        }
        Ok(SessionFilter {
            start_ms,
            end_ms,
            enabled: true,
        })
    }

    pub fn contains(&self, timestamp_ms: i64) -> bool {
        if !self.enabled {
            return true;
        }
        let tod = timestamp_ms.rem_euclid(MS_PER_DAY);
        tod >= self.start_ms && tod < self.end_ms
    }
}

/// Calendar day index (days since 1970-01-01, UTC).
pub fn day_of(timestamp_ms: i64) -> u32 {
    timestamp_ms.div_euclid(MS_PER_DAY) as u32
}

/// Calendar month index `year * 12 + month0` of a day index.
pub fn month_of_day(day_id: u32) -> u32 {
    let epoch = NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid epoch");
    let date = epoch + chrono::Days::new(day_id as u64);
    date.year() as u32 * 12 + date.month0()
}

#[derive(Debug, Clone, Default)]
pub struct ClassifyOutcome {
    pub events: Vec<ClassifiedEvent>,
    pub counts: [u64; 6],
    /// Messages away from the best quotes.
    pub skipped: u64,
    pub outside_session: u64,
}

impl ClassifyOutcome {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for t in EventType::ALL {
            s.push_str(&format!("{}={} ", t.code(), self.counts[t.index()]));
        }
        s.push_str(&format!(
            "skipped={} outside_session={}",
            self.skipped, self.outside_session
        ));
        s
    }
}

/// Classify a message stream. The first malformed record aborts with its
/// 0-based index.
pub fn classify_all(msgs: &[RawMessage], session: &SessionFilter) -> Result<ClassifyOutcome> {
    let mut out = ClassifyOutcome::default();
    let mut cached_day = None;
    for (index, msg) in msgs.iter().enumerate() {
        let class = classify(msg).map_err(|detail| Error::MalformedQuotes { index, detail })?;
        if !session.contains(msg.timestamp_ms) {
            out.outside_session += 1;
            continue;
        }
        match class {
            Classification::Skip => out.skipped += 1,
            Classification::Event { etype, sign } => {
                let day_id = day_of(msg.timestamp_ms);
                let month_id = match cached_day {
                    Some((d, m)) if d == day_id => m,
                    _ => {
                        let m = month_of_day(day_id);
                        cached_day = Some((day_id, m));
                        m
                    }
                };
                out.counts[etype.index()] += 1;
                out.events.push(ClassifiedEvent {
                    day_id,
                    month_id,
                    timestamp_ms: msg.timestamp_ms,
                    broker: msg.broker,
                    etype,
                    sign,
                    mid_before: msg.mid_before(),
                });
            }
        }
    }
    Ok(out)
}
