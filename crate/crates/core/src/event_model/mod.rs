//! Order book event taxonomy and ingestion.
//!
//! Every event at the best quotes is one of six types: market orders (`MO`),
//! limit orders (`LO`) and cancellations (`CA`), each either leaving the
//! midpoint unchanged (`⁰`) or moving it (`′`). Each event carries a sign
//! according to its expected effect on the price: buy orders are `+1`, sell
//! orders `-1`, and cancellations take the opposite sign of the side they
//! remove.
//!
//! Prices are integers throughout. Midpoints are stored in half-ticks
//! (`bid + ask` in ticks), so no rounding ever happens before the final
//! statistics.

mod classify;
mod io;
mod series;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

pub use classify::{
    classify, classify_all, day_of, month_of_day, Classification, ClassifyOutcome, SessionFilter,
};
pub use io::{
    read_classified, read_classified_csv, read_raw, read_raw_csv, write_classified_csv,
    write_raw_csv, ClassifiedRecord, RawRecord,
};
pub use series::{build_series, ClassifiedEvent, EventSeries};

/// Order kind without the price-change qualifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OrderKind {
    Market,
    Limit,
    Cancel,
}

impl OrderKind {
    pub const ALL: [OrderKind; 3] = [OrderKind::Market, OrderKind::Limit, OrderKind::Cancel];

    pub fn code(self) -> &'static str {
        match self {
            OrderKind::Market => "MO",
            OrderKind::Limit => "LO",
            OrderKind::Cancel => "CA",
        }
    }
}

impl fmt::Display for OrderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// One of the six event types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EventType {
    pub kind: OrderKind,
    /// `true` when the event moved the midpoint.
    pub primed: bool,
}

impl EventType {
    pub const MO0: EventType = EventType::new(OrderKind::Market, false);
    pub const MO_PRIME: EventType = EventType::new(OrderKind::Market, true);
    pub const LO0: EventType = EventType::new(OrderKind::Limit, false);
    pub const LO_PRIME: EventType = EventType::new(OrderKind::Limit, true);
    pub const CA0: EventType = EventType::new(OrderKind::Cancel, false);
    pub const CA_PRIME: EventType = EventType::new(OrderKind::Cancel, true);

    /// All six types in canonical order; `index()` is the position here.
    pub const ALL: [EventType; 6] = [
        EventType::MO0,
        EventType::MO_PRIME,
        EventType::LO0,
        EventType::LO_PRIME,
        EventType::CA0,
        EventType::CA_PRIME,
    ];

    pub const fn new(kind: OrderKind, primed: bool) -> Self {
        EventType { kind, primed }
    }

    #[inline]
    pub fn index(self) -> usize {
        let k = match self.kind {
            OrderKind::Market => 0,
            OrderKind::Limit => 2,
            OrderKind::Cancel => 4,
        };
        k + self.primed as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        EventType::ALL.get(i).copied()
    }

    /// CSV code: `MO0`, `MOp`, `LO0`, `LOp`, `CA0`, `CAp`.
    pub fn code(self) -> &'static str {
        match (self.kind, self.primed) {
            (OrderKind::Market, false) => "MO0",
            (OrderKind::Market, true) => "MOp",
            (OrderKind::Limit, false) => "LO0",
            (OrderKind::Limit, true) => "LOp",
            (OrderKind::Cancel, false) => "CA0",
            (OrderKind::Cancel, true) => "CAp",
        }
    }
}

impl fmt::Display for EventType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for EventType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EventType::ALL
            .iter()
            .copied()
            .find(|t| t.code() == s)
            .ok_or_else(|| Error::Config(format!("unknown event type `{s}`")))
    }
}

/// Conditioning class: a single event type or a whole kind (`MO` = `MO0` ∪ `MO′`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventClass {
    Type(EventType),
    Kind(OrderKind),
}

impl EventClass {
    #[inline]
    pub fn contains(self, t: EventType) -> bool {
        match self {
            EventClass::Type(x) => x == t,
            EventClass::Kind(k) => t.kind == k,
        }
    }

    /// Bit mask over `EventType::index()`.
    #[inline]
    pub fn mask(self) -> u8 {
        EventType::ALL
            .iter()
            .filter(|t| self.contains(**t))
            .fold(0u8, |m, t| m | (1 << t.index()))
    }

    pub fn code(self) -> &'static str {
        match self {
            EventClass::Type(t) => t.code(),
            EventClass::Kind(k) => k.code(),
        }
    }
}

impl From<EventType> for EventClass {
    fn from(t: EventType) -> Self {
        EventClass::Type(t)
    }
}

impl From<OrderKind> for EventClass {
    fn from(k: OrderKind) -> Self {
        EventClass::Kind(k)
    }
}

impl fmt::Display for EventClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for EventClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "MO" => Ok(EventClass::Kind(OrderKind::Market)),
            "LO" => Ok(EventClass::Kind(OrderKind::Limit)),
            "CA" => Ok(EventClass::Kind(OrderKind::Cancel)),
            _ => s.parse::<EventType>().map(EventClass::Type),
        }
    }
}

/// Event sign: the direction of the expected long-term price effect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Buy,
    Sell,
}

impl Sign {
    #[inline]
    pub fn value(self) -> i64 {
        match self {
            Sign::Buy => 1,
            Sign::Sell => -1,
        }
    }

    pub fn from_value(v: i64) -> Option<Sign> {
        match v {
            1 => Some(Sign::Buy),
            -1 => Some(Sign::Sell),
            _ => None,
        }
    }

    pub fn flipped(self) -> Sign {
        match self {
            Sign::Buy => Sign::Sell,
            Sign::Sell => Sign::Buy,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Buy => "+1",
            Sign::Sell => "-1",
        })
    }
}

pub type BrokerId = u32;

/// A classified event at the best quotes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderBookEvent {
    pub day_id: u32,
    pub month_id: u32,
    /// Event-time index within the day.
    pub seq: u64,
    pub timestamp_ms: i64,
    pub broker: BrokerId,
    pub etype: EventType,
    pub sign: Sign,
    /// Midpoint just before this event, in half-ticks.
    pub mid_before: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Buy,
    Sell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Action {
    Trade,
    Add,
    Cancel,
}

/// A level-1 message with the best quotes immediately before and after it.
///
/// Trades must be aggregated to one record per aggressor order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawMessage {
    pub timestamp_ms: i64,
    pub broker: BrokerId,
    pub side: Side,
    pub action: Action,
    pub price_ticks: i64,
    pub size: i64,
    pub bid_before: i64,
    pub ask_before: i64,
    pub bid_after: i64,
    pub ask_after: i64,
}

impl RawMessage {
    /// Midpoint before the message, in half-ticks.
    pub fn mid_before(&self) -> i64 {
        self.bid_before + self.ask_before
    }

    pub fn mid_after(&self) -> i64 {
        self.bid_after + self.ask_after
    }
}
