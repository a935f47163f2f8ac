use serde::{Deserialize, Serialize};

use super::{generate, SynthConfig};
use crate::error::{Error, Result};
use crate::estimators::{response, LagCurve, LagGrid};
use crate::event_model::OrderKind;

/// Calibration succeeds when flatness drops below this.
pub const FLATNESS_TARGET: f64 = 0.5;
const SCAN_STEP: f64 = 0.25;
const SCAN_POINTS: usize = 16;
const MIN_STEP: f64 = 1.0 / 64.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationStep {
    pub phi: f64,
    pub flatness: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub phi: f64,
    pub flatness: f64,
    pub converged: bool,
    pub window: (usize, usize),
    pub trajectory: Vec<CalibrationStep>,
}

/// `max |R - mean| / mean` over the curve; infinite when the mean is not positive.
pub fn flatness(curve: &LagCurve) -> f64 {
    let vals: Vec<f64> = curve
        .values
        .iter()
        .zip(&curve.counts)
        .filter(|(_, c)| **c > 0)
        .map(|(v, _)| *v)
        .collect();
    if vals.is_empty() {
        return f64::INFINITY;
    }
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    if !(mean > 0.0) {
        return f64::INFINITY;
    }
    vals.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max) / mean
}

fn window_grid(window: (usize, usize)) -> Result<LagGrid> {
    let (lo, hi) = window;
    if lo == 0 || hi <= lo {
        return Err(Error::InvalidLags(format!("bad window [{lo}, {hi}]")));
    }
    let n = 16;
    let ratio = (hi as f64 / lo as f64).ln();
    let lags = (0..n)
        .map(|i| (lo as f64 * (ratio * i as f64 / (n - 1) as f64).exp()).round() as usize)
        .collect();
    LagGrid::new(lags)
}

/// Flatness of the total market-order response for one value of φ.
pub fn flatness_at(config: &SynthConfig, phi: f64, lags: &LagGrid) -> Result<f64> {
    let cfg = SynthConfig {
        provider_strength: phi,
        ..config.clone()
    };
    let (series, _) = generate(&cfg)?;
    Ok(flatness(&response(&series, OrderKind::Market, lags)))
}

/// Scalar search over φ, starting from `config.provider_strength`.
///
/// A coarse upward scan brackets the optimum, then a pattern search refines
/// it, halving the step whenever neither neighbour improves. Every
/// evaluation reuses the configured seed, so candidates share the same
/// splitter and background flow. A point is accepted only if it lowers the
/// best flatness seen so far.
pub fn calibrate_flat_response(
    config: &SynthConfig,
    window: (usize, usize),
) -> Result<Calibration> {
    config.validate()?;
    let lags = window_grid(window)?;
    let mut phi = config.provider_strength;
    let mut best = flatness_at(config, phi, &lags)?;
    let mut trajectory = vec![CalibrationStep {
        phi,
        flatness: best,
        accepted: true,
    }];
    let mut consider = |cand: f64, phi: &mut f64, best: &mut f64| -> Result<bool> {
        let f = flatness_at(config, cand, &lags)?;
        let accepted = f < *best;
        trajectory.push(CalibrationStep {
            phi: cand,
            flatness: f,
            accepted,
        });
        if accepted {
            *phi = cand;
            *best = f;
        }
        Ok(accepted)
    };

    let start = phi;
    for k in 1..=SCAN_POINTS {
        consider(start + k as f64 * SCAN_STEP, &mut phi, &mut best)?;
    }
    let mut step = SCAN_STEP / 2.0;
    while step >= MIN_STEP {
        let mut moved = false;
        for cand in [phi + step, phi - step] {
            if cand >= 0.0 && consider(cand, &mut phi, &mut best)? {
                moved = true;
                break;
            }
        }
        if !moved {
            step /= 2.0;
        }
        log::debug!("calibration phi={phi:.4} flatness={best:.4} step={step}");
    }
    let converged = best < FLATNESS_TARGET;
    if !converged {
        log::warn!("calibration stopped at flatness {best:.3} (target {FLATNESS_TARGET})");
    }
    Ok(Calibration {
        phi,
        flatness: best,
        converged,
        window,
        trajectory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flatness_of_constant_and_ramp() {
        let lags = LagGrid::range(1, 4).unwrap();
        let flat = LagCurve {
            lags: lags.lags().to_vec(),
            values: vec![2.0; 4],
            counts: vec![1; 4],
        };
        assert_eq!(flatness(&flat), 0.0);
        let ramp = LagCurve {
            values: vec![1.0, 2.0, 3.0, 4.0],
            ..flat.clone()
        };
        assert!((flatness(&ramp) - 1.5 / 2.5).abs() < 1e-12);
        let neg = LagCurve {
            values: vec![-1.0; 4],
            ..flat
        };
        assert!(flatness(&neg).is_infinite());
    }

    #[test]
    fn accepted_steps_strictly_improve() {
        let cfg = SynthConfig {
            n_events: 30_000,
            p_primed_mo: 0.3,
            ..Default::default()
        };
        let cal = calibrate_flat_response(&cfg, (20, 200)).unwrap();
        let accepted: Vec<f64> = cal
            .trajectory
            .iter()
            .filter(|s| s.accepted)
            .map(|s| s.flatness)
            .collect();
        assert!(accepted.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(*accepted.last().unwrap(), cal.flatness);
    }
}
