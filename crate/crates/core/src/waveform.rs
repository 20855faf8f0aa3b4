//! Conductor voltage waveforms: DC energization ramp, polarity reversal and
//! the standard double-exponential lightning impulse superimposed on DC.
//!
//! All waveforms are exact closed-form functions of time; the impulse
//! parameters (k, tau1, tau2) are fitted once so that the measured front
//! time (30%-90% construction) and time-to-half-value reproduce the
//! requested values.

use crate::error::Error;
use crate::Result;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use libm::{exp, log};

/// Unit-peak double exponential k * (exp(-t/tau1) - exp(-t/tau2)),
/// tau1 > tau2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleExpFit {
    pub k: f64,
    pub tau1: f64,
    pub tau2: f64,
}

impl DoubleExpFit {
    /// Shape value at time t >= 0 (peak value 1 after k-normalization).
    pub fn value(&self, t: f64) -> f64 {
        if t < 0.0 {
            0.0
        } else {
            self.k * (exp(-t / self.tau1) - exp(-t / self.tau2))
        }
    }

    /// Closed-form time of the peak.
    pub fn peak_time(&self) -> f64 {
        log(self.tau1 / self.tau2) * self.tau1 * self.tau2 / (self.tau1 - self.tau2)
    }
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    // f(lo) and f(hi) must bracket a root; 200 halvings reach f64 resolution.
    let flo = f(lo);
    debug_assert!(flo * f(hi) <= 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if flo * fm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Measure (front time, time to half-value) of an unnormalized double
/// exponential per the standard impulse definitions: the front time is
/// (t90 - t30)/0.6 and the tail is measured from the virtual origin (zero
/// crossing of the 30%-90% line) to the half-value on the decay.
pub fn measure_front_tail(tau1: f64, tau2: f64) -> (f64, f64) {
    let shape = DoubleExpFit { k: 1.0, tau1, tau2 };
    let tp = shape.peak_time();
    let peak = shape.value(tp);
    let t30 = bisect(|t| shape.value(t) - 0.3 * peak, 0.0, tp);
    let t90 = bisect(|t| shape.value(t) - 0.9 * peak, 0.0, tp);
    let t_half = bisect(|t| shape.value(t) - 0.5 * peak, tp, tp + 40.0 * tau1);
    let front = (t90 - t30) / 0.6;
    let origin = t30 - 0.5 * (t90 - t30);
    let tail = t_half - origin;
    (front, tail)
}

/// Fit (k, tau1, tau2) so that the measured front/tail times reproduce the
/// requested values within 0.1% and the peak is normalized to 1.
pub fn fit_double_exponential(front: f64, tail: f64) -> Result<DoubleExpFit> {
    if !(front > 0.0 && tail > 0.0 && front < tail) {
        return Err(Error::FitFailure(format!(
            "need 0 < front < tail (got {front}, {tail})"
        )));
    }
    let mut tau1 = 1.4 * tail;
    let mut tau2 = 0.35 * front;
    for _ in 0..200 {
        if !(tau2 < tau1) {
            return Err(Error::FitFailure(format!(
                "time constants collapsed (tau1={tau1}, tau2={tau2}); front/tail ratio too close to 1"
            )));
        }
        let (f_m, t_m) = measure_front_tail(tau1, tau2);
        let ef = front / f_m;
        let et = tail / t_m;
        if (ef - 1.0).abs() < 1e-6 && (et - 1.0).abs() < 1e-6 {
            let shape = DoubleExpFit { k: 1.0, tau1, tau2 };
            let peak = shape.value(shape.peak_time());
            return Ok(DoubleExpFit { k: 1.0 / peak, tau1, tau2 });
        }
        tau2 *= ef;
        tau1 *= et;
    }
    Err(Error::FitFailure(format!(
        "front/tail fit did not converge for {front}/{tail}"
    )))
}

/// Time-dependent conductor voltage.
#[derive(Debug, Clone, PartialEq)]
pub enum Waveform {
    /// Linear ramp 0 -> v_dc over [0, t_ramp], then constant.
    DcOn { v_dc: f64, t_ramp: f64 },
    /// +v_dc on [0, t_hold], linear transition to -v_dc over t_switch,
    /// then constant -v_dc.
    PolarityReversal { v_dc: f64, t_hold: f64, t_switch: f64 },
    /// v_dc plus a fitted front/tail impulse applied at t_apply; tends back
    /// to v_dc as t grows.
    LightningOnDc {
        v_dc: f64,
        v_peak: f64,
        t_apply: f64,
        fit: DoubleExpFit,
    },
}

impl Waveform {
    pub fn dc_on(v_dc: f64, t_ramp: f64) -> Result<Self> {
        if !(t_ramp > 0.0) {
            return Err(Error::ConfigError(format!("t_ramp {t_ramp} must be > 0")));
        }
        Ok(Waveform::DcOn { v_dc, t_ramp })
    }

    pub fn polarity_reversal(v_dc: f64, t_hold: f64, t_switch: f64) -> Result<Self> {
        if !(t_hold > 0.0 && t_switch > 0.0) {
            return Err(Error::ConfigError(format!(
                "t_hold {t_hold} and t_switch {t_switch} must be > 0"
            )));
        }
        Ok(Waveform::PolarityReversal { v_dc, t_hold, t_switch })
    }

    pub fn lightning_on_dc(v_dc: f64, v_peak: f64, front: f64, tail: f64, t_apply: f64) -> Result<Self> {
        let fit = fit_double_exponential(front, tail)?;
        Ok(Waveform::LightningOnDc { v_dc, v_peak, t_apply, fit })
    }

    /// Conductor voltage at time t >= 0, volts.
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Waveform::DcOn { v_dc, t_ramp } => {
                if t >= t_ramp {
                    v_dc
                } else {
                    v_dc * t / t_ramp
                }
            }
            Waveform::PolarityReversal { v_dc, t_hold, t_switch } => {
                if t <= t_hold {
                    v_dc
                } else if t >= t_hold + t_switch {
                    -v_dc
                } else {
                    v_dc * (1.0 - 2.0 * (t - t_hold) / t_switch)
                }
            }
            Waveform::LightningOnDc { v_dc, v_peak, t_apply, fit } => {
                v_dc + v_peak * fit.value(t - t_apply)
            }
        }
    }

    /// Times the transient stepper must land on exactly (shape breaks and
    /// fast fronts). Sorted ascending.
    pub fn feature_times(&self) -> Vec<f64> {
        match *self {
            Waveform::DcOn { t_ramp, .. } => vec![t_ramp],
            Waveform::PolarityReversal { t_hold, t_switch, .. } => vec![t_hold, t_hold + t_switch],
            Waveform::LightningOnDc { t_apply, .. } => vec![t_apply],
        }
    }

    /// End of the initial fast transition (used to probe "ramp end" states).
    pub fn transition_end(&self) -> f64 {
        match *self {
            Waveform::DcOn { t_ramp, .. } => t_ramp,
            Waveform::PolarityReversal { t_hold, t_switch, .. } => t_hold + t_switch,
            Waveform::LightningOnDc { t_apply, fit, .. } => t_apply + fit.peak_time(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dc_on_ramp_midpoint() {
        let w = Waveform::dc_on(320e3, 0.01).unwrap();
        assert_eq!(w.value(0.0), 0.0);
        assert!((w.value(0.005) - 160e3).abs() < 1e-9);
        assert_eq!(w.value(0.01), 320e3);
        assert_eq!(w.value(100.0), 320e3);
    }

    #[test]
    fn polarity_reversal_final_plateau() {
        let w = Waveform::polarity_reversal(320e3, 1000.0, 0.1).unwrap();
        assert_eq!(w.value(500.0), 320e3);
        assert!((w.value(1000.05) - 0.0).abs() < 1e-6 * 320e3);
        assert_eq!(w.value(1e6), -320e3);
    }

    #[test]
    fn standard_impulse_round_trips_within_one_percent() {
        let fit = fit_double_exponential(1.2e-6, 50e-6).unwrap();
        let (front, tail) = measure_front_tail(fit.tau1, fit.tau2);
        assert!((front / 1.2e-6 - 1.0).abs() < 0.01, "front {front}");
        assert!((tail / 50e-6 - 1.0).abs() < 0.01, "tail {tail}");
        // Peak normalized to exactly 1 by construction of k.
        let peak = fit.value(fit.peak_time());
        assert!((peak - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_front_tail_fails() {
        assert!(matches!(fit_double_exponential(50e-6, 50e-6), Err(Error::FitFailure(_))));
        assert!(matches!(fit_double_exponential(60e-6, 50e-6), Err(Error::FitFailure(_))));
    }

    #[test]
    fn lightning_peak_is_dc_plus_peak_factor() {
        let w = Waveform::lightning_on_dc(320e3, 1175e3, 1.2e-6, 50e-6, 0.0).unwrap();
        // Numeric maximization over a dense grid around the analytic peak.
        let mut vmax = f64::MIN;
        for i in 0..200000 {
            let t = i as f64 * 1e-9;
            vmax = vmax.max(w.value(t));
        }
        let expected = 320e3 + 1175e3;
        assert!((vmax / expected - 1.0).abs() < 0.01, "vmax {vmax}");
        // Decays back towards the DC level.
        assert!((w.value(5e-3) - 320e3).abs() < 1e3);
    }

    #[test]
    fn feature_times_cover_shape_breaks() {
        let w = Waveform::polarity_reversal(320e3, 10.0, 0.5).unwrap();
        assert_eq!(w.feature_times(), vec![10.0, 10.5]);
        assert_eq!(w.transition_end(), 10.5);
    }
}
