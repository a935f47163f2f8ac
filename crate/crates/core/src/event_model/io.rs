//! CSV formats for raw level-1 messages and classified events.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Action, EventSeries, EventType, OrderBookEvent, RawMessage, Side, Sign};
use crate::error::{Error, Result};

/// Row of the classified-event CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifiedRecord {
    pub day_id: u32,
    pub month_id: u32,
    pub seq: u64,
    pub timestamp_ms: i64,
    pub broker: u32,
    pub etype: String,
    pub sign: String,
    pub mid_halfticks: i64,
}

/// Row of the raw-message CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawRecord {
    pub timestamp_ms: i64,
    pub broker: u32,
    pub side: Side,
    pub action: Action,
    pub price_ticks: i64,
    pub size: i64,
    pub bid_before: i64,
    pub ask_before: i64,
    pub bid_after: i64,
    pub ask_after: i64,
}

impl From<&OrderBookEvent> for ClassifiedRecord {
    fn from(e: &OrderBookEvent) -> Self {
        ClassifiedRecord {
            day_id: e.day_id,
            month_id: e.month_id,
            seq: e.seq,
            timestamp_ms: e.timestamp_ms,
            broker: e.broker,
            etype: e.etype.code().to_string(),
            sign: e.sign.to_string(),
            mid_halfticks: e.mid_before,
        }
    }
}

impl ClassifiedRecord {
    fn into_event(self, index: usize) -> Result<OrderBookEvent> {
        let etype: EventType = self.etype.parse().map_err(|_| Error::InvalidRecord {
            index,
            detail: format!("unknown etype `{}`", self.etype),
        })?;
        let sign = match self.sign.trim() {
            "+1" | "1" => Sign::Buy,
            "-1" => Sign::Sell,
            other => {
                return Err(Error::InvalidRecord {
                    index,
                    detail: format!("sign must be +1 or -1, got `{other}`"),
                })
            }
        };
        Ok(OrderBookEvent {
            day_id: self.day_id,
            month_id: self.month_id,
            seq: self.seq,
            timestamp_ms: self.timestamp_ms,
            broker: self.broker,
            etype,
            sign,
            mid_before: self.mid_halfticks,
        })
    }
}

impl From<RawRecord> for RawMessage {
    fn from(r: RawRecord) -> Self {
        RawMessage {
            timestamp_ms: r.timestamp_ms,
            broker: r.broker,
            side: r.side,
            action: r.action,
            price_ticks: r.price_ticks,
            size: r.size,
            bid_before: r.bid_before,
            ask_before: r.ask_before,
            bid_after: r.bid_after,
            ask_after: r.ask_after,
        }
    }
}

impl From<&RawMessage> for RawRecord {
    fn from(m: &RawMessage) -> Self {
        RawRecord {
            timestamp_ms: m.timestamp_ms,
            broker: m.broker,
            side: m.side,
            action: m.action,
            price_ticks: m.price_ticks,
            size: m.size,
            bid_before: m.bid_before,
            ask_before: m.ask_before,
            bid_after: m.bid_after,
            ask_after: m.ask_after,
        }
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn record_error(index: usize, e: csv::Error) -> Error {
    Error::InvalidRecord {
        index,
        detail: e.to_string(),
    }
}

pub fn read_raw<R: Read>(reader: R) -> Result<Vec<RawMessage>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    rdr.deserialize::<RawRecord>()
        .enumerate()
        .map(|(i, r)| r.map(RawMessage::from).map_err(|e| record_error(i, e)))
        .collect()
}

pub fn read_raw_csv(path: &Path) -> Result<Vec<RawMessage>> {
    read_raw(open(path)?)
}

pub fn write_raw_csv<W: Write>(writer: W, msgs: &[RawMessage]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for m in msgs {
        w.serialize(RawRecord::from(m))?;
    }
    w.flush().map_err(|e| Error::io("<raw csv>", e))?;
    Ok(())
}

pub fn read_classified<R: Read>(reader: R) -> Result<EventSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let events = rdr
        .deserialize::<ClassifiedRecord>()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| record_error(i, e))?.into_event(i))
        .collect::<Result<Vec<_>>>()?;
    EventSeries::new(events)
}

pub fn read_classified_csv(path: &Path) -> Result<EventSeries> {
    read_classified(open(path)?)
}

pub fn write_classified_csv<W: Write>(writer: W, events: &[OrderBookEvent]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for e in events {
        w.serialize(ClassifiedRecord::from(e))?;
    }
    w.flush().map_err(|e| Error::io("<classified csv>", e))?;
    Ok(())
}
