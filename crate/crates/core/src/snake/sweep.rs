use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::drive::CpgSnake;
use super::physics::PhysicsParams;
use super::robot::Pose;
use crate::cpg::{OscillatorParams, TonicInputs};
use crate::stats::{spearman, std_dev};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VelocitySweepConfig {
    /// Total run length per cell (s).
    pub duration: f64,
    /// Start-up time excluded from the average (s).
    pub transient: f64,
    /// Drive on every extensor and flexor neuron.
    pub tonic: f64,
}

impl Default for VelocitySweepConfig {
    fn default() -> Self {
        Self {
            duration: 60.0,
            transient: 30.0,
            tonic: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VelocityCell {
    pub c: f64,
    pub k_f: f64,
    /// Straight-line COM speed after the transient (m/s).
    pub speed: Option<f64>,
    pub error: Option<String>,
}

impl VelocityCell {
    pub const CSV_HEADER: &'static str = "c,k_f,speed,error";

    pub fn csv_fields(&self) -> Vec<String> {
        vec![
            self.c.to_string(),
            self.k_f.to_string(),
            self.speed.map(|v| v.to_string()).unwrap_or_default(),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

/// Cells in `c`-major order.
#[derive(Debug, Clone, Serialize)]
pub struct VelocitySweep {
    pub c_grid: Vec<f64>,
    pub k_f_grid: Vec<f64>,
    pub cells: Vec<VelocityCell>,
}

impl VelocitySweep {
    pub fn speed(&self, ci: usize, ki: usize) -> Option<f64> {
        self.cells[ci * self.k_f_grid.len() + ki].speed
    }

    /// Spearman correlation of speed with `K_f` for every `c` row.
    pub fn kf_correlations(&self) -> Vec<f64> {
        (0..self.c_grid.len())
            .map(|ci| {
                let (x, y): (Vec<f64>, Vec<f64>) = (0..self.k_f_grid.len())
                    .filter_map(|ki| Some((self.k_f_grid[ki], self.speed(ci, ki)?)))
                    .unzip();
                spearman(&x, &y)
            })
            .collect()
    }

    /// Mean spread (std) of speed along `K_f` at fixed `c`, and along `c` at
    /// fixed `K_f`.
    pub fn spreads(&self) -> (f64, f64) {
        let along_kf: Vec<f64> = (0..self.c_grid.len())
            .map(|ci| {
                let v: Vec<f64> = (0..self.k_f_grid.len()).filter_map(|ki| self.speed(ci, ki)).collect();
                std_dev(&v)
            })
            .collect();
        let along_c: Vec<f64> = (0..self.k_f_grid.len())
            .map(|ki| {
                let v: Vec<f64> = (0..self.c_grid.len()).filter_map(|ci| self.speed(ci, ki)).collect();
                std_dev(&v)
            })
            .collect();
        (crate::stats::mean(&along_kf), crate::stats::mean(&along_c))
    }
}

fn cell_speed(base: &OscillatorParams, c: f64, k_f: f64, phys: &PhysicsParams, cfg: &VelocitySweepConfig) -> Result<f64> {
    let p = base.with_c(c).with_k_f(k_f);
    let mut s = CpgSnake::new(p, *phys, &Pose::default(), 0)?;
    let u = TonicInputs::uniform(cfg.tonic, cfg.tonic);
    let control = s.integ.control_dt;
    let warm = (cfg.transient / control).round() as usize;
    let total = (cfg.duration / control).round() as usize;
    let mut start = s.robot.com(phys);
    for k in 0..total {
        if k == warm {
            start = s.robot.com(phys);
        }
        s.advance(&u)?;
    }
    let end = s.robot.com(phys);
    let span = (total - warm.min(total)) as f64 * control;
    Ok((end[0] - start[0]).hypot(end[1] - start[1]) / span)
}

/// Mean speed for every `(c, K_f)` pair under constant tonic drive.
pub fn velocity_sweep(
    base: &OscillatorParams,
    c_grid: &[f64],
    k_f_grid: &[f64],
    phys: &PhysicsParams,
    cfg: &VelocitySweepConfig,
) -> VelocitySweep {
    let pairs: Vec<(f64, f64)> = c_grid
        .iter()
        .flat_map(|&c| k_f_grid.iter().map(move |&k| (c, k)))
        .collect();
    let cells = pairs
        .par_iter()
        .map(|&(c, k_f)| match cell_speed(base, c, k_f, phys, cfg) {
            Ok(v) => VelocityCell { c, k_f, speed: Some(v), error: None },
            Err(e) => VelocityCell { c, k_f, speed: None, error: Some(e.to_string()) },
        })
        .collect();
    VelocitySweep {
        c_grid: c_grid.to_vec(),
        k_f_grid: k_f_grid.to_vec(),
        cells,
    }
}
