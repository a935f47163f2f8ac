use super::SynthConfig;
use crate::event_model::{Action, EventSeries, OrderKind, RawMessage, Side, Sign};

/// Level-1 messages that classify back into `series`.
///
/// Quotes are rebuilt around each stored midpoint with a spread wide enough
/// for any configured move to stay inside it, so the book is never crossed.
pub fn to_raw_messages(series: &EventSeries, config: &SynthConfig) -> Vec<RawMessage> {
    let max_move = config
        .market_move
        .max(config.limit_move)
        .max(config.cancel_move);
    let base_spread = 2 * max_move + 2;
    let events = series.events();
    let mut out = Vec::with_capacity(events.len());
    for (t, e) in events.iter().enumerate() {
        let mid = e.mid_before;
        let next_mid = match events.get(t + 1) {
            Some(n) if n.day_id == e.day_id => n.mid_before,
            _ => {
                mid + if e.etype.primed {
                    e.sign.value() * config.move_of(e.etype.kind)
                } else {
                    0
                }
            }
        };
        let d = next_mid - mid;
        let spread = base_spread + (mid - base_spread).rem_euclid(2);
        let bid = (mid - spread) / 2;
        let ask = (mid + spread) / 2;
        let buy = e.sign == Sign::Buy;
        let (side, action, price, bid_after, ask_after) = match (e.etype.kind, buy) {
            (OrderKind::Market, true) => (Side::Buy, Action::Trade, ask, bid, ask + d),
            (OrderKind::Market, false) => (Side::Sell, Action::Trade, bid, bid + d, ask),
            (OrderKind::Limit, true) => (Side::Buy, Action::Add, bid + d, bid + d, ask),
            (OrderKind::Limit, false) => (Side::Sell, Action::Add, ask + d, bid, ask + d),
            // a cancel on the ask raises the price, so it carries a buy sign
            (OrderKind::Cancel, true) => (Side::Sell, Action::Cancel, ask, bid, ask + d),
            (OrderKind::Cancel, false) => (Side::Buy, Action::Cancel, bid, bid + d, ask),
        };
        out.push(RawMessage {
            timestamp_ms: e.timestamp_ms,
            broker: e.broker,
            side,
            action,
            price_ticks: price,
            size: 1,
            bid_before: bid,
            ask_before: ask,
            bid_after,
            ask_after,
        });
    }
    out
}
