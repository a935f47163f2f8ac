use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::LagCurve;

/// Sign convention of the fitted exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    /// `value ∝ ℓ^{-γ}`; reports `γ`.
    Decay,
    /// `value ∝ ℓ^{a}`; reports `a`.
    Growth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub amplitude: f64,
    pub fit_window: (usize, usize),
    pub r_squared: f64,
    pub n_points: usize,
    pub trend: Trend,
}

pub const MIN_POINTS: usize = 5;

/// Least squares on `(ln ℓ, ln value)` over lags in `window` with positive
/// values and non-zero counts.
pub fn fit_power_law(
    curve: &LagCurve,
    window: (usize, usize),
    trend: Trend,
) -> Result<PowerLawFit> {
    let (lo, hi) = window;
    if lo == 0 || lo >= hi {
        return Err(Error::InvalidLags(format!("fit window [{lo}, {hi}]")));
    }
    let pts: Vec<(f64, f64)> = curve
        .iter()
        .filter(|&(l, v, c)| (lo..=hi).contains(&l) && v > 0.0 && c > 0)
        .map(|(l, v, _)| ((l as f64).ln(), v.ln()))
        .collect();
    if pts.len() < MIN_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} positive points in [{lo}, {hi}], need {MIN_POINTS}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        1.0
    };
    Ok(PowerLawFit {
        exponent: match trend {
            Trend::Decay => -slope,
            Trend::Growth => slope,
        },
        amplitude: intercept.exp(),
        fit_window: window,
        r_squared,
        n_points: pts.len(),
        trend,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn curve(f: impl Fn(f64) -> f64) -> LagCurve {
        let lags: Vec<usize> = (1..=1000).step_by(7).collect();
        LagCurve {
            values: lags.iter().map(|&l| f(l as f64)).collect(),
            counts: vec![10; lags.len()],
            lags,
        }
    }

    #[test]
    fn exact_power_law() {
        let fit = fit_power_law(&curve(|l| l.powf(-0.5)), (10, 500), Trend::Decay).unwrap();
        assert!((fit.exponent - 0.5).abs() < 1e-9);
        assert!((fit.amplitude - 1.0).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        let g = fit_power_law(&curve(|l| 3.0 * l.powf(0.4)), (10, 500), Trend::Growth).unwrap();
        assert!((g.exponent - 0.4).abs() < 1e-9);
        assert!((g.amplitude - 3.0).abs() < 1e-9);
    }

    #[test]
    fn constant_has_zero_exponent() {
        let fit = fit_power_law(&curve(|_| 0.2), (10, 500), Trend::Decay).unwrap();
        assert!(fit.exponent.abs() < 1e-12);
    }

    #[test]
    fn skips_non_positive_and_requires_points() {
        let c = curve(|l| if l > 100.0 { -1.0 } else { l.powf(-0.3) });
        let fit = fit_power_law(&c, (10, 500), Trend::Decay).unwrap();
        assert!((fit.exponent - 0.3).abs() < 1e-9);
        assert!(fit.n_points < 20);
        assert!(matches!(
            fit_power_law(&curve(|_| -1.0), (10, 500), Trend::Decay),
            Err(Error::InsufficientData(_))
        ));
    }

    proptest! {
        #[test]
        fn scale_invariant(k in 1e-3f64..1e3, g in -1.0f64..1.0) {
            let base = curve(|l| l.powf(-g) * (1.0 + 0.1 * (l * 0.3).sin()));
            let a = fit_power_law(&base, (10, 500), Trend::Decay).unwrap();
            let b = fit_power_law(&base.scaled(k), (10, 500), Trend::Decay).unwrap();
            prop_assert!((a.exponent - b.exponent).abs() < 1e-9);
            prop_assert!((b.amplitude / a.amplitude / k - 1.0).abs() < 1e-9);
        }
    }
}
