//! Simulation sweeps that pair measured steady-state statistics with the
//! closed-form predictions.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::describing::{harmonic_gain, natural_frequency};
use super::measure::{measure, Channel, SignalStats};
use super::predict::{predict_bias_constant, predict_bias_duty, DutyFit};
use crate::cpg::{simulate, NetworkState, OscillatorParams, SquareWave, TonicInputs, TonicSchedule};
use crate::stats::{linear_fit, LinearFit};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub dt: f64,
    /// Minimum transient discarded before measuring (s).
    pub min_transient: f64,
    /// Transient in natural periods; the larger of the two is used.
    pub transient_periods: f64,
    /// Measurement window after the transient, in natural periods.
    pub measure_periods: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            min_transient: 10.0,
            transient_periods: 10.0,
            measure_periods: 20.0,
        }
    }
}

impl SweepConfig {
    /// Transient cut and total duration for an oscillator with these
    /// parameters.
    pub fn window(&self, p: &OscillatorParams) -> (f64, f64) {
        let period = natural_frequency(p).map(|w| TAU / w).unwrap_or(self.min_transient);
        let cut = self.min_transient.max(self.transient_periods * period);
        (cut, cut + self.measure_periods * period)
    }
}

/// One grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub grid: f64,
    pub measured: Option<f64>,
    pub predicted: Option<f64>,
    pub is_limit_cycle: bool,
    pub amplitude: Option<f64>,
    pub frequency: Option<f64>,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn residual(&self) -> Option<f64> {
        Some(self.measured? - self.predicted?)
    }

    pub const CSV_HEADER: &'static str =
        "grid,measured,predicted,residual,limit_cycle,amplitude,frequency,error";

    pub fn csv_fields(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        vec![
            self.grid.to_string(),
            opt(self.measured),
            opt(self.predicted),
            opt(self.residual()),
            (self.is_limit_cycle as u8).to_string(),
            opt(self.amplitude),
            opt(self.frequency),
            self.error.clone().unwrap_or_default(),
        ]
    }

    fn from_stats(grid: f64, stats: Result<SignalStats>, value: impl Fn(&SignalStats) -> f64) -> Self {
        match stats {
            Ok(s) => SweepRow {
                grid,
                measured: Some(value(&s)),
                predicted: None,
                is_limit_cycle: s.is_limit_cycle,
                amplitude: Some(s.amplitude),
                frequency: s.frequency,
                error: None,
            },
            Err(e) => SweepRow {
                grid,
                measured: None,
                predicted: None,
                is_limit_cycle: false,
                amplitude: None,
                frequency: None,
                error: Some(e.to_string()),
            },
        }
    }
}

fn run_point<S: TonicSchedule + Sync>(
    p: &OscillatorParams,
    schedule: &S,
    cfg: &SweepConfig,
    channel: Channel,
) -> Result<SignalStats> {
    let (cut, duration) = cfg.window(p);
    let traj = simulate(p, schedule, duration, cfg.dt, &NetworkState::seeded())?;
    measure(&traj, channel, cut)
}

/// Constant exclusive drive on a primitive oscillator with harmonic gain
/// `k_n`.
#[derive(Debug, Clone, Serialize)]
pub struct BiasSweep {
    pub k_n: f64,
    pub rows: Vec<SweepRow>,
    /// Measured bias regressed on the prediction over limit-cycle points.
    pub fit: Option<LinearFit>,
    /// Smallest grid value that produced a limit cycle.
    pub onset: Option<f64>,
    /// Some grid point below the onset settled to a fixed point.
    pub has_fixed_point_region: bool,
}

pub fn bias_sweep(base: &OscillatorParams, k_n: f64, u_e_grid: &[f64], cfg: &SweepConfig) -> BiasSweep {
    let p = base.primitive().with_harmonic_gain(k_n);
    let rows: Vec<SweepRow> = u_e_grid
        .par_iter()
        .map(|&u_e| {
            let u = TonicInputs::exclusive([u_e; 4]);
            let mut row = SweepRow::from_stats(u_e, run_point(&p, &u, cfg, Channel::ZDiff(0)), |s| s.bias);
            row.predicted = predict_bias_constant(u_e, &p).ok();
            row
        })
        .collect();

    let cycle: Vec<&SweepRow> = rows.iter().filter(|r| r.is_limit_cycle).collect();
    let (x, y): (Vec<f64>, Vec<f64>) = cycle
        .iter()
        .filter_map(|r| Some((r.predicted?, r.measured?)))
        .unzip();
    let onset = cycle.iter().map(|r| r.grid).reduce(f64::min);
    let has_fixed_point_region = onset.is_some_and(|o| {
        rows.iter()
            .any(|r| r.grid < o && !r.is_limit_cycle && r.error.is_none())
    });
    BiasSweep {
        k_n: harmonic_gain(&p).unwrap_or(k_n),
        rows,
        fit: linear_fit(&x, &y),
        onset,
        has_fixed_point_region,
    }
}

/// Square-wave exclusive drive of varying duty on a primitive oscillator.
#[derive(Debug, Clone, Serialize)]
pub struct DutySweep {
    pub period: f64,
    pub rows: Vec<SweepRow>,
    /// Measured bias against duty over limit-cycle points.
    pub fit: Option<LinearFit>,
    /// `K_m` and `M` recovered from the affine fit.
    pub duty_fit: Option<DutyFit>,
}

/// `period = None` drives at the natural period.
pub fn duty_sweep(base: &OscillatorParams, duties: &[f64], period: Option<f64>, cfg: &SweepConfig) -> DutySweep {
    let p = base.primitive();
    let period = period.unwrap_or_else(|| natural_frequency(&p).map(|w| TAU / w).unwrap_or(2.0));
    let rows: Vec<SweepRow> = duties
        .par_iter()
        .map(|&d| {
            let wave = SquareWave::new(period, d);
            SweepRow::from_stats(d, run_point(&p, &wave, cfg, Channel::ZDiff(0)), |s| s.bias)
        })
        .collect();
    let (x, y): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.is_limit_cycle)
        .filter_map(|r| Some((r.grid, r.measured?)))
        .unzip();
    let fit = linear_fit(&x, &y);
    let duty_fit = fit.and_then(|f| {
        let ba = p.b - p.a;
        let k_m = f.slope / (2.0 - f.slope * ba);
        let m = (f.intercept + 0.5 * f.slope) * (k_m * ba + 1.0);
        DutyFit::new(k_m, m).ok()
    });
    let rows = rows
        .into_iter()
        .map(|mut r| {
            let fit = duty_fit.unwrap_or_default();
            r.predicted = predict_bias_duty(r.grid, &fit, &p).ok();
            r
        })
        .collect();
    DutySweep {
        period,
        rows,
        fit,
        duty_fit,
    }
}

/// Oscillation frequency of `psi_1` against `K_f`.
#[derive(Debug, Clone, Serialize)]
pub struct FrequencySweep {
    pub rows: Vec<SweepRow>,
    /// Fit of `ln(omega)` on `ln(K_f)`; the slope is the exponent.
    pub log_fit: Option<LinearFit>,
}

impl FrequencySweep {
    pub fn exponent(&self) -> Option<f64> {
        self.log_fit.map(|f| f.slope)
    }
}

pub fn frequency_sweep(
    base: &OscillatorParams,
    tonic: TonicInputs,
    k_f_grid: &[f64],
    cfg: &SweepConfig,
) -> FrequencySweep {
    let rows: Vec<SweepRow> = k_f_grid
        .par_iter()
        .map(|&k_f| {
            let p = base.with_k_f(k_f);
            let mut row = SweepRow::from_stats(k_f, run_point(&p, &tonic, cfg, Channel::Psi(0)), |s| {
                s.frequency.unwrap_or(f64::NAN)
            });
            row.predicted = natural_frequency(&p).ok();
            if row.measured.is_some_and(f64::is_nan) {
                row.measured = None;
            }
            row
        })
        .collect();
    let (x, y): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.is_limit_cycle)
        .filter_map(|r| Some((r.grid.ln(), r.measured?.ln())))
        .unzip();
    FrequencySweep {
        log_fit: linear_fit(&x, &y),
        rows,
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints() {
        let g = linspace(0.0, 0.5, 26);
        assert_eq!(g.len(), 26);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[25], 0.5);
        assert!((g[1] - 0.02).abs() < 1e-15);
    }

    #[test]
    fn window_uses_longer_of_two_transients() {
        let cfg = SweepConfig::default();
        let (cut, dur) = cfg.window(&OscillatorParams::TABLE_I);
        let period = TAU / natural_frequency(&OscillatorParams::TABLE_I).unwrap();
        assert!((cut - 10.0 * period).abs() < 1e-12);
        assert!(dur > cut);
        let fast = OscillatorParams::TABLE_I.with_k_f(0.2);
        assert_eq!(cfg.window(&fast).0, 10.0);
    }

    #[test]
    fn bias_sweep_short() {
        let cfg = SweepConfig {
            dt: 2e-3,
            ..SweepConfig::default()
        };
        let s = bias_sweep(&OscillatorParams::TABLE_I, 0.66, &[0.0, 0.4, 0.5], &cfg);
        assert!(!s.rows[0].is_limit_cycle);
        assert!(s.rows[1].is_limit_cycle && s.rows[2].is_limit_cycle);
        assert!(s.has_fixed_point_region);
        assert!(s.rows[2].measured.unwrap().abs() < 2e-3);
    }
}
