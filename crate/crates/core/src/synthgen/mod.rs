//! Synthetic order flow with known ground truth.
//!
//! Three kinds of agents act in event time:
//!
//! - **splitters** execute metaorders of random sign whose lengths have a
//!   power-law tail `P(L > x) ∝ x^{-β}`, one child order per action;
//! - **providers** answer every price-changing market order from a
//!   non-provider with opposite-signed limit orders, each released after a
//!   heavy-tailed delay, plus background limit orders and cancellations;
//! - **followers** copy the sign of a non-price-changing market order on
//!   the next event.
//!
//! Every primed event moves the midpoint by exactly `ε · move` half-ticks,
//! so the one-step response of each event type is known in closed form.
//! A single splitter alone yields a sign autocorrelation decaying as
//! `ℓ^{-(β-1)}` for `1 < β < 2`.

mod calibrate;
mod raw;

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event_model::{
    month_of_day, BrokerId, EventSeries, EventType, OrderBookEvent, OrderKind, Sign,
};

pub use calibrate::{
    calibrate_flat_response, flatness, flatness_at, Calibration, CalibrationStep, FLATNESS_TARGET,
};
pub use raw::to_raw_messages;

const MS_PER_DAY: i64 = 86_400_000;
const SESSION_OPEN_MS: i64 = 8 * 3_600_000;
const SESSION_LEN_MS: i64 = 8 * 3_600_000 + 30 * 60_000;
/// 2001-01-01, a Monday.
const FIRST_DAY: u32 = 11_323;
const START_MID: i64 = 2_000_000;

/// Generator parameters. Probabilities are in `[0, 1]`; rates are relative
/// weights; moves are in half-ticks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub n_events: usize,
    pub n_splitters: usize,
    pub n_providers: usize,
    pub n_followers: usize,
    /// β: tail exponent of metaorder lengths, `> 1`.
    pub metaorder_tail_exponent: f64,
    pub p_primed_mo: f64,
    pub p_primed_lo: f64,
    pub p_primed_ca: f64,
    /// φ: expected number of counter limit orders per price-changing market order.
    pub provider_strength: f64,
    /// η: probability that a follower copies a non-price-changing market order.
    pub herd_strength: f64,
    /// Background activity weight of each splitter.
    pub splitter_rate: f64,
    /// Background activity weight of each provider.
    pub provider_rate: f64,
    /// Background activity weight of each follower (random-sign MO⁰).
    pub follower_rate: f64,
    /// Share of splitter child orders sent as limit orders.
    pub splitter_limit_fraction: f64,
    /// Share of provider background orders sent as market orders.
    pub provider_market_fraction: f64,
    /// Share of provider background actions that are cancellations.
    pub provider_cancel_fraction: f64,
    /// Tail exponent of the counter-order delay; defaults to `2 - β`.
    pub counter_delay_exponent: Option<f64>,
    /// Scale of the counter-order delay: `P(D > d) = (d / min)^{-κ}` for `d ≥ min`.
    pub min_counter_delay: usize,
    /// Cap on counter-order delays, in events.
    pub max_counter_delay: usize,
    pub market_move: i64,
    pub limit_move: i64,
    pub cancel_move: i64,
    pub events_per_day: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_events: 100_000,
            n_splitters: 4,
            n_providers: 6,
            n_followers: 2,
            metaorder_tail_exponent: 1.5,
            p_primed_mo: 0.3,
            p_primed_lo: 0.4,
            p_primed_ca: 0.3,
            provider_strength: 0.0,
            herd_strength: 0.3,
            splitter_rate: 1.0,
            provider_rate: 0.5,
            follower_rate: 0.1,
            splitter_limit_fraction: 0.0,
            provider_market_fraction: 0.3,
            provider_cancel_fraction: 0.3,
            counter_delay_exponent: None,
            min_counter_delay: 30,
            max_counter_delay: 10_000,
            market_move: 1,
            limit_move: 1,
            cancel_move: 1,
            events_per_day: 20_000,
            seed: 1,
        }
    }
}

impl SynthConfig {
    /// Only splitters, no reactions.
    pub fn splitters_only(n_events: usize, n_splitters: usize, beta: f64, seed: u64) -> Self {
        SynthConfig {
            n_events,
            n_splitters,
            n_providers: 0,
            n_followers: 0,
            metaorder_tail_exponent: beta,
            p_primed_mo: 0.0,
            provider_strength: 0.0,
            herd_strength: 0.0,
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_events == 0 {
            return bad("n_events must be positive".into());
        }
        if self.n_splitters + self.n_providers + self.n_followers == 0 {
            return bad("at least one agent is required".into());
        }
        if !(self.metaorder_tail_exponent > 1.0) {
            return bad(format!(
                "metaorder_tail_exponent must exceed 1, got {}",
                self.metaorder_tail_exponent
            ));
        }
        for (name, p) in [
            ("p_primed_mo", self.p_primed_mo),
            ("p_primed_lo", self.p_primed_lo),
            ("p_primed_ca", self.p_primed_ca),
            ("splitter_limit_fraction", self.splitter_limit_fraction),
            ("provider_market_fraction", self.provider_market_fraction),
            ("provider_cancel_fraction", self.provider_cancel_fraction),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must be in [0, 1], got {p}"));
            }
        }
        for (name, x) in [
            ("provider_strength", self.provider_strength),
            ("herd_strength", self.herd_strength),
            ("splitter_rate", self.splitter_rate),
            ("provider_rate", self.provider_rate),
            ("follower_rate", self.follower_rate),
        ] {
            if !(x >= 0.0 && x.is_finite()) {
                return bad(format!("{name} must be finite and >= 0, got {x}"));
            }
        }
        let background = self.splitter_rate * self.n_splitters as f64
            + self.provider_rate * self.n_providers as f64
            + self.follower_rate * self.n_followers as f64;
        if !(background > 0.0) {
            return bad("total background rate must be positive".into());
        }
        if let Some(k) = self.counter_delay_exponent {
            if !(k > 0.0 && k.is_finite()) {
                return bad(format!("counter_delay_exponent must be positive, got {k}"));
            }
        }
        if self.market_move < 1 || self.limit_move < 1 || self.cancel_move < 1 {
            return bad("price moves must be at least one half-tick".into());
        }
        if self.events_per_day == 0 || self.min_counter_delay == 0 {
            return bad("events_per_day and min_counter_delay must be positive".into());
        }
        if self.max_counter_delay < self.min_counter_delay {
            return bad("max_counter_delay must be at least min_counter_delay".into());
        }
        if self.events_per_day as i64 > SESSION_LEN_MS {
            return bad("events_per_day exceeds one event per millisecond of session".into());
        }
        Ok(())
    }

    /// Longest allowed metaorder.
    pub fn metaorder_cap(&self) -> u64 {
        (self.n_events as u64 / 10).max(1)
    }

    pub fn delay_exponent(&self) -> f64 {
        self.counter_delay_exponent
            .unwrap_or((2.0 - self.metaorder_tail_exponent).clamp(0.1, 2.0))
    }

    fn move_of(&self, kind: OrderKind) -> i64 {
        match kind {
            OrderKind::Market => self.market_move,
            OrderKind::Limit => self.limit_move,
            OrderKind::Cancel => self.cancel_move,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Splitter,
    Provider,
    Follower,
}

/// Ground truth of a synthetic run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthTruth {
    pub roles: BTreeMap<BrokerId, Role>,
    /// Metaorder of each event, for splitter child orders.
    pub metaorder_ids: Vec<Option<u64>>,
    /// Expected sign-autocorrelation exponent `β - 1`.
    pub gamma: f64,
    pub config: SynthConfig,
}

impl SynthTruth {
    pub fn brokers_with(&self, role: Role) -> Vec<BrokerId> {
        self.roles
            .iter()
            .filter(|(_, r)| **r == role)
            .map(|(b, _)| *b)
            .collect()
    }
}

struct Splitter {
    sign: Sign,
    remaining: u64,
    metaorder: u64,
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct Counter {
    due: usize,
    order: u64,
    provider: usize,
    sign: i8,
}

fn random_sign(rng: &mut ChaCha8Rng) -> Sign {
    if rng.gen_bool(0.5) {
        Sign::Buy
    } else {
        Sign::Sell
    }
}

/// `floor(U^{-1/a})`, at least 1, capped.
fn power_tail(rng: &mut ChaCha8Rng, a: f64, cap: u64) -> u64 {
    scaled_power_tail(rng, a, 1, cap)
}

/// `floor(scale · U^{-1/a})`, capped.
fn scaled_power_tail(rng: &mut ChaCha8Rng, a: f64, scale: u64, cap: u64) -> u64 {
    let u: f64 = 1.0 - rng.gen::<f64>();
    let x = scale as f64 * u.powf(-1.0 / a);
    if x >= cap as f64 {
        cap
    } else {
        (x as u64).clamp(1, cap)
    }
}

/// Simulate `config.n_events` events.
pub fn generate(config: &SynthConfig) -> Result<(EventSeries, SynthTruth)> {
    config.validate()?;
    // one stream per mechanism, so changing one parameter leaves the other
    // agents' random draws untouched
    let stream = |k: u64| {
        let mut r = ChaCha8Rng::seed_from_u64(config.seed);
        r.set_stream(k);
        r
    };
    let mut pick_rng = stream(0);
    let mut splitter_rng = stream(1);
    let mut provider_rng = stream(2);
    let mut counter_rng = stream(3);
    let mut follower_rng = stream(4);
    let n = config.n_events;

    let (ns, np, nf) = (config.n_splitters, config.n_providers, config.n_followers);
    let splitter_id = |i: usize| (1 + i) as BrokerId;
    let provider_id = |i: usize| (1 + ns + i) as BrokerId;
    let follower_id = |i: usize| (1 + ns + np + i) as BrokerId;
    let mut roles = BTreeMap::new();
    roles.extend((0..ns).map(|i| (splitter_id(i), Role::Splitter)));
    roles.extend((0..np).map(|i| (provider_id(i), Role::Provider)));
    roles.extend((0..nf).map(|i| (follower_id(i), Role::Follower)));

    let w_s = config.splitter_rate * ns as f64;
    let w_p = config.provider_rate * np as f64;
    let w_f = config.follower_rate * nf as f64;
    let w_total = w_s + w_p + w_f;

    let cap = config.metaorder_cap();
    let beta = config.metaorder_tail_exponent;
    let delay_exp = config.delay_exponent();
    let phi_whole = config.provider_strength.floor() as u64;
    let phi_frac = config.provider_strength - phi_whole as f64;
    let p_follow = config.herd_strength.min(1.0);

    let mut splitters: Vec<Splitter> = (0..ns)
        .map(|_| Splitter {
            sign: Sign::Buy,
            remaining: 0,
            metaorder: 0,
        })
        .collect();
    let mut next_metaorder = 0u64;
    let mut pending: BinaryHeap<Reverse<Counter>> = BinaryHeap::new();
    let mut counter_order = 0u64;
    let mut follower_pending: Option<Sign> = None;

    let mut mid = START_MID;
    let mut events = Vec::with_capacity(n);
    let mut metaorder_ids = Vec::with_capacity(n);
    let spacing = (SESSION_LEN_MS / config.events_per_day as i64).max(1);
    let mut day_id = FIRST_DAY;
    let mut month_id = month_of_day(day_id);
    let mut seq_in_day = 0usize;

    for t in 0..n {
        if seq_in_day == config.events_per_day {
            day_id = next_weekday(day_id);
            month_id = month_of_day(day_id);
            seq_in_day = 0;
        }

        let mut metaorder = None;
        let (role, broker, kind, sign, primed);
        let due = matches!(pending.peek(), Some(Reverse(c)) if c.due <= t);
        if due {
            let Reverse(c) = pending.pop().expect("peeked");
            role = Role::Provider;
            broker = provider_id(c.provider);
            kind = OrderKind::Limit;
            sign = Sign::from_value(c.sign as i64).expect("unit sign");
            primed = counter_rng.gen_bool(config.p_primed_lo);
        } else if let Some(s) = follower_pending.take() {
            role = Role::Follower;
            broker = follower_id(pick_rng.gen_range(0..nf));
            kind = OrderKind::Market;
            sign = s;
            primed = false;
        } else {
            let u = pick_rng.gen::<f64>() * w_total;
            if u < w_s {
                let i = pick_rng.gen_range(0..ns);
                let sp = &mut splitters[i];
                if sp.remaining == 0 {
                    sp.sign = random_sign(&mut splitter_rng);
                    sp.remaining = power_tail(&mut splitter_rng, beta, cap);
                    sp.metaorder = next_metaorder;
                    next_metaorder += 1;
                }
                sp.remaining -= 1;
                role = Role::Splitter;
                broker = splitter_id(i);
                sign = sp.sign;
                metaorder = Some(sp.metaorder);
                if splitter_rng.gen_bool(config.splitter_limit_fraction) {
                    kind = OrderKind::Limit;
                    primed = splitter_rng.gen_bool(config.p_primed_lo);
                } else {
                    kind = OrderKind::Market;
                    primed = splitter_rng.gen_bool(config.p_primed_mo);
                }
            } else if u < w_s + w_p {
                role = Role::Provider;
                broker = provider_id(pick_rng.gen_range(0..np));
                sign = random_sign(&mut provider_rng);
                if provider_rng.gen_bool(config.provider_cancel_fraction) {
                    kind = OrderKind::Cancel;
                    primed = provider_rng.gen_bool(config.p_primed_ca);
                } else if provider_rng.gen_bool(config.provider_market_fraction) {
                    kind = OrderKind::Market;
                    primed = provider_rng.gen_bool(config.p_primed_mo);
                } else {
                    kind = OrderKind::Limit;
                    primed = provider_rng.gen_bool(config.p_primed_lo);
                }
            } else {
                role = Role::Follower;
                broker = follower_id(pick_rng.gen_range(0..nf));
                kind = OrderKind::Market;
                sign = random_sign(&mut follower_rng);
                primed = false;
            }
        }

        events.push(OrderBookEvent {
            day_id,
            month_id,
            seq: seq_in_day as u64,
            timestamp_ms: day_id as i64 * MS_PER_DAY
                + SESSION_OPEN_MS
                + seq_in_day as i64 * spacing,
            broker,
            etype: EventType::new(kind, primed),
            sign,
            mid_before: mid,
        });
        metaorder_ids.push(metaorder);
        if primed {
            mid += sign.value() * config.move_of(kind);
        }
        seq_in_day += 1;

        if kind == OrderKind::Market && role != Role::Provider {
            if primed && np > 0 {
                let k = phi_whole + counter_rng.gen_bool(phi_frac) as u64;
                for _ in 0..k {
                    let delay = scaled_power_tail(
                        &mut counter_rng,
                        delay_exp,
                        config.min_counter_delay as u64,
                        config.max_counter_delay as u64,
                    );
                    pending.push(Reverse(Counter {
                        due: t + delay as usize,
                        order: counter_order,
                        provider: counter_rng.gen_range(0..np),
                        sign: -sign.value() as i8,
                    }));
                    counter_order += 1;
                }
            } else if !primed && role == Role::Splitter && nf > 0 && follower_rng.gen_bool(p_follow)
            {
                follower_pending = Some(sign);
            }
        }
    }

    let series = EventSeries::new(events)?;
    let truth = SynthTruth {
        roles,
        metaorder_ids,
        gamma: beta - 1.0,
        config: config.clone(),
    };
    Ok((series, truth))
}

fn next_weekday(day_id: u32) -> u32 {
    let mut d = day_id + 1;
    // day 0 (1970-01-01) was a Thursday; weekday index 0 = Monday
    while matches!((d + 3) % 7, 5 | 6) {
        d += 1;
    }
    d
}
