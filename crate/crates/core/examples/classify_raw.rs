//! Classify a handful of level-1 messages into the six event types.
//!
//! Run with `cargo run --example classify_raw`.

use brokerflow::event_model::{
    build_series, classify_all, Action, RawMessage, SessionFilter, Side,
};

fn msg(
    ms: i64,
    broker: u32,
    side: Side,
    action: Action,
    price: i64,
    before: (i64, i64),
    after: (i64, i64),
) -> RawMessage {
    RawMessage {
        timestamp_ms: 978_339_600_000 + ms,
        broker,
        side,
        action,
        price_ticks: price,
        size: 1,
        bid_before: before.0,
        ask_before: before.1,
        bid_after: after.0,
        ask_after: after.1,
    }
}

fn main() -> brokerflow::Result<()> {
    let msgs = [
        // buy trade that leaves the quotes alone: MO0
        msg(0, 7, Side::Buy, Action::Trade, 102, (100, 102), (100, 102)),
        // sell limit inside the spread moves the ask: LOp
        msg(10, 3, Side::Sell, Action::Add, 101, (100, 102), (100, 101)),
        // the whole bid is cancelled: CAp, sign reversed to sell
        msg(20, 5, Side::Buy, Action::Cancel, 100, (100, 101), (99, 101)),
        // marketable buy limit eats the ask: MOp
        msg(30, 7, Side::Buy, Action::Add, 101, (99, 101), (99, 102)),
        // a deep limit order never touches the best quotes and is skipped
        msg(40, 2, Side::Buy, Action::Add, 95, (99, 102), (99, 102)),
    ];
    let outcome = classify_all(&msgs, &SessionFilter::parse("08:00-16:30")?)?;
    println!("{}", outcome.summary());
    let series = build_series(outcome.events)?;
    for e in series.events() {
        println!(
            "seq {:>2}  broker {:>2}  {}  sign {}  mid before {} half-ticks",
            e.seq, e.broker, e.etype, e.sign, e.mid_before
        );
    }
    Ok(())
}
