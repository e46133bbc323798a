use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use matsuoka_snake::analysis::sweeps::{bias_sweep, duty_sweep, frequency_sweep, SweepConfig, SweepRow};
use matsuoka_snake::analysis::{entrainment_threshold, free_amplitude, harmonic_gain, natural_frequency, Threshold};
use matsuoka_snake::config::{self, load_onto, load_with_curriculum};
use matsuoka_snake::cpg::{simulate, validate_params, NetworkState, OscillatorParams, TonicInputs};
use matsuoka_snake::gp::{evolve, oscillates, rollout_displacement, EvolveConfig, FitnessConfig, GeneBounds, GenerationStats};
use matsuoka_snake::io::{self, CsvOut};
use matsuoka_snake::rl::{
    rollout as run_rollout, steering_study, steering_summary, train as run_train, EpisodeLog, GoalScript, PolicyCheckpoint,
    RolloutConfig, SteeringConfig, SteeringPoint, TrainConfig,
};
use matsuoka_snake::snake::{velocity_sweep, PhysicsParams, VelocityCell, VelocitySweepConfig};
use matsuoka_snake::stats::linear_fit;
use matsuoka_snake::{Error, Result};

use crate::grid::parse_grid;
use crate::Common;

pub fn exit_code(e: &Error) -> u8 {
    if e.is_divergence() {
        3
    } else if matches!(e, Error::Io(_)) {
        1
    } else {
        2
    }
}

fn grid(s: &str, default_n: usize) -> Result<Vec<f64>> {
    parse_grid(s, default_n).map_err(Error::Config)
}

/// Comment header: command, seed, flags and resolved config.
fn header<A: Serialize, C: Serialize>(command: &str, seed: u64, args: &A, cfg: &C) -> Result<String> {
    let mut t = toml::Table::new();
    t.insert("command".into(), command.into());
    t.insert("seed".into(), (seed as i64).into());
    t.insert("args".into(), config::to_table(args)?.into());
    t.insert("config".into(), config::to_table(cfg)?.into());
    Ok(toml::to_string(&t).map_err(|e| Error::Config(e.to_string()))? + "\n")
}

/// `--params` first, then the config file, then `--set`.
fn resolve<T: Serialize + for<'de> Deserialize<'de>>(c: &Common, params: &Option<PathBuf>, mut base: T, cpg: impl FnOnce(&mut T) -> &mut OscillatorParams) -> Result<T> {
    if let Some(p) = params {
        *cpg(&mut base) = config::load(Some(p), &[])?;
    }
    load_onto(&base, c.config.as_deref(), &c.overrides)
}

fn out_path(c: &Common, name: &str) -> PathBuf {
    io::output_dir(c.out_dir.as_deref()).join(name)
}

fn write_sweep(path: &Path, head: &str, rows: &[SweepRow]) -> Result<()> {
    let mut w = CsvOut::create(path, head, SweepRow::CSV_HEADER)?;
    for r in rows {
        w.row(r.csv_fields())?;
    }
    w.finish()
}

/// JSON has no comments, so the run header travels as a `run` field.
fn write_json<T: Serialize>(path: &Path, head: &str, value: &T) -> Result<()> {
    let run: toml::Table = head.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    let mut f = io::create(path)?;
    serde_json::to_writer_pretty(&mut f, &serde_json::json!({ "run": run, "summary": value }))?;
    std::io::Write::flush(&mut f)?;
    Ok(())
}

fn fit_line(label: &str, fit: Option<matsuoka_snake::stats::LinearFit>) {
    match fit {
        Some(f) => println!("{label}: slope {:.4} intercept {:.4} r2 {:.4}", f.slope, f.intercept, f.r_squared),
        None => println!("{label}: not enough limit-cycle points"),
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CpgConfig {
    cpg: OscillatorParams,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SweepFile {
    cpg: OscillatorParams,
    sweep: SweepConfig,
}

#[derive(Args, Debug, Serialize)]
pub struct SimulateArgs {
    /// Parameter file (top-level oscillator keys, as written by tune-gp).
    #[arg(long)]
    params: Option<PathBuf>,
    /// Simulated time (s); 0 writes the header only.
    #[arg(long, default_value_t = 20.0)]
    duration: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Extensor tonic input, all oscillators.
    #[arg(long, default_value_t = 1.0)]
    ue: f64,
    /// Flexor tonic input, all oscillators.
    #[arg(long, default_value_t = 1.0)]
    uf: f64,
    /// Start from the extensor/flexor mirror image of the seeded state.
    #[arg(long)]
    mirrored: bool,
    #[arg(long, default_value = "cpg_trajectory.csv")]
    output: String,
}

pub fn simulate_cpg(c: &Common, a: &SimulateArgs) -> Result<()> {
    let cfg = resolve(c, &a.params, CpgConfig::default(), |t| &mut t.cpg)?;
    let head = header("simulate-cpg", c.seed.unwrap_or(0), a, &cfg)?;
    let path = out_path(c, &a.output);
    let mut w = CsvOut::create(&path, &head, matsuoka_snake::cpg::Trajectory::CSV_HEADER)?;
    if a.duration != 0.0 {
        let ics = if a.mirrored {
            NetworkState::seeded().mirrored()
        } else {
            NetworkState::seeded()
        };
        let tr = simulate(&cfg.cpg, &TonicInputs::uniform(a.ue, a.uf), a.duration, a.dt, &ics)?;
        for k in 0..tr.len() {
            let mut f = vec![tr.time[k].to_string()];
            f.extend(tr.states[k].iter().map(|v| v.to_string()));
            f.extend(tr.inputs[k].u_e.iter().chain(&tr.inputs[k].u_f).map(|v| v.to_string()));
            f.extend(tr.outputs[k].psi.iter().map(|v| v.to_string()));
            w.row(f)?;
        }
    } else if !(a.dt > 0.0) {
        return Err(Error::InvalidParams(format!("dt must be > 0, got {}", a.dt)));
    }
    w.finish()?;
    println!("wrote {}", path.display());
    Ok(())
}

pub fn validate(c: &Common) -> Result<()> {
    let cfg: CpgConfig = load_onto(&CpgConfig::default(), c.config.as_deref(), &c.overrides)?;
    let p = cfg.cpg;
    let r = validate_params(&p)?;
    println!("lhs (tau_a - tau_r)^2      = {:.6}", r.lhs);
    println!("rhs 4 tau_r tau_a b        = {:.6}", r.rhs);
    println!("oscillation_possible       = {}", r.oscillation_possible);
    match harmonic_gain(&p) {
        Ok(k) => println!("harmonic_gain K_n          = {k:.6}"),
        Err(e) => println!("harmonic_gain K_n          : {e}"),
    }
    match natural_frequency(&p) {
        Ok(w) => println!("natural_frequency (rad/s)  = {w:.6}"),
        Err(e) => println!("natural_frequency          : {e}"),
    }
    if p.c > 0.0 {
        match free_amplitude(&p) {
            Ok(a) => println!("free_amplitude A_n         = {a:.6}"),
            Err(e) => println!("free_amplitude A_n         : {e}"),
        }
    }
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct BiasArgs {
    #[arg(long)]
    params: Option<PathBuf>,
    /// Harmonic gain of the primitive oscillator.
    #[arg(long, default_value_t = 0.66)]
    kn: f64,
    /// Extensor input grid, `lo:hi[:n]` or a list.
    #[arg(long, default_value = "0:0.5:26")]
    ue: String,
    #[arg(long, default_value = "bias_sweep.csv")]
    output: String,
}

pub fn bias(c: &Common, a: &BiasArgs) -> Result<()> {
    let cfg = resolve(c, &a.params, SweepFile::default(), |t| &mut t.cpg)?;
    let s = bias_sweep(&cfg.cpg, a.kn, &grid(&a.ue, 26)?, &cfg.sweep);
    let path = out_path(c, &a.output);
    let head = header("bias-sweep", c.seed.unwrap_or(0), a, &cfg)?;
    write_sweep(&path, &head, &s.rows)?;
    write_json(&path.with_extension("json"), &head, &s)?;
    fit_line("measured vs predicted bias", s.fit);
    println!("onset {:?}, fixed-point region below onset: {}", s.onset, s.has_fixed_point_region);
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct DutyArgs {
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, default_value = "0.1:0.9:17")]
    duty: String,
    /// Square-wave period (s) [default: natural period].
    #[arg(long)]
    period: Option<f64>,
    #[arg(long, default_value = "duty_sweep.csv")]
    output: String,
}

pub fn duty(c: &Common, a: &DutyArgs) -> Result<()> {
    let cfg = resolve(c, &a.params, SweepFile::default(), |t| &mut t.cpg)?;
    let s = duty_sweep(&cfg.cpg, &grid(&a.duty, 17)?, a.period, &cfg.sweep);
    let path = out_path(c, &a.output);
    let head = header("duty-sweep", c.seed.unwrap_or(0), a, &cfg)?;
    write_sweep(&path, &head, &s.rows)?;
    write_json(&path.with_extension("json"), &head, &s)?;
    fit_line("bias vs duty", s.fit);
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct FreqArgs {
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, default_value = "0.45:1.05:13")]
    kf: String,
    #[arg(long, default_value_t = 1.0)]
    ue: f64,
    #[arg(long, default_value_t = 1.0)]
    uf: f64,
    #[arg(long, default_value = "freq_sweep.csv")]
    output: String,
}

pub fn freq(c: &Common, a: &FreqArgs) -> Result<()> {
    let cfg = resolve(c, &a.params, SweepFile::default(), |t| &mut t.cpg)?;
    let s = frequency_sweep(&cfg.cpg, TonicInputs::uniform(a.ue, a.uf), &grid(&a.kf, 13)?, &cfg.sweep);
    let path = out_path(c, &a.output);
    let head = header("freq-sweep", c.seed.unwrap_or(0), a, &cfg)?;
    write_sweep(&path, &head, &s.rows)?;
    write_json(&path.with_extension("json"), &head, &s)?;
    match s.exponent() {
        Some(e) => println!("frequency exponent {e:.4}"),
        None => println!("frequency exponent: not enough limit-cycle points"),
    }
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct ThresholdArgs {
    #[arg(long)]
    params: Option<PathBuf>,
    /// Free-response tonic input; replaces the parameter file's value.
    #[arg(long)]
    c: Option<f64>,
    /// Forcing frequencies (rad/s), `lo:hi[:n]` or a list.
    #[arg(long, default_value = "3.77:5.02")]
    omega: String,
    #[arg(long, default_value = "threshold.csv")]
    output: String,
}

pub fn threshold(c: &Common, a: &ThresholdArgs) -> Result<()> {
    let mut cfg = resolve(c, &a.params, CpgConfig::default(), |t| &mut t.cpg)?;
    if let Some(v) = a.c {
        cfg.cpg.c = v;
    }
    cfg.cpg.check()?;
    let path = out_path(c, &a.output);
    let mut w = CsvOut::create(&path, &header("threshold", c.seed.unwrap_or(0), a, &cfg)?, "omega,a0,singular")?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for om in grid(&a.omega, 51)? {
        let t = entrainment_threshold(om, &cfg.cpg)?;
        let v = t.limit();
        lo = lo.min(v);
        hi = hi.max(v);
        w.row([om.to_string(), v.to_string(), (matches!(t, Threshold::Singular { .. }) as u8).to_string()])?;
    }
    w.finish()?;
    println!("A0 min {lo:.4} max {hi:.4}");
    Ok(())
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct VelocityFile {
    cpg: OscillatorParams,
    physics: PhysicsParams,
    sweep: VelocitySweepConfig,
}

#[derive(Args, Debug, Serialize)]
pub struct VelocityArgs {
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, default_value = "0.4:0.8:10")]
    c: String,
    #[arg(long, default_value = "0.45:1.05:10")]
    kf: String,
    #[arg(long, default_value = "velocity_sweep.csv")]
    output: String,
}

pub fn velocity(c: &Common, a: &VelocityArgs) -> Result<()> {
    let cfg = resolve(c, &a.params, VelocityFile::default(), |t| &mut t.cpg)?;
    cfg.physics.check()?;
    let s = velocity_sweep(&cfg.cpg, &grid(&a.c, 10)?, &grid(&a.kf, 10)?, &cfg.physics, &cfg.sweep);
    let path = out_path(c, &a.output);
    let mut w = CsvOut::create(&path, &header("velocity-sweep", c.seed.unwrap_or(0), a, &cfg)?, VelocityCell::CSV_HEADER)?;
    for cell in &s.cells {
        w.row(cell.csv_fields())?;
    }
    w.finish()?;
    let rho = s.kf_correlations();
    let (across_c, across_kf) = s.spreads();
    println!("Spearman(K_f, speed) per c: {}", rho.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join(" "));
    println!("speed spread across c {across_c:.5}, across K_f {across_kf:.5}");
    Ok(())
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct TuneFile {
    /// Supplies `K_f` and `c`, and the centre of the default bounds.
    cpg: OscillatorParams,
    bounds: GeneBounds,
    fitness: FitnessConfig,
    evolve: EvolveConfig,
    physics: PhysicsParams,
}

#[derive(Args, Debug, Serialize)]
pub struct TuneArgs {
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    population: Option<usize>,
    /// Length of the run used to confirm the winner oscillates (s).
    #[arg(long, default_value_t = 60.0)]
    check_duration: f64,
}

pub fn tune(c: &Common, a: &TuneArgs) -> Result<()> {
    let mut cfg = resolve(c, &a.params, TuneFile::default(), |t| &mut t.cpg)?;
    if a.params.is_some() && !c.overrides.iter().any(|o| o.starts_with("bounds")) {
        cfg.bounds = GeneBounds::around(&cfg.cpg, 0.5);
    }
    if let Some(s) = c.seed {
        cfg.evolve.seed = s;
    }
    if let Some(g) = a.generations {
        cfg.evolve.generations = g;
    }
    if let Some(p) = a.population {
        cfg.evolve.population = p;
    }
    let r = evolve(&cfg.cpg, &cfg.bounds, &cfg.fitness, &cfg.physics, &cfg.evolve)?;
    let head = header("tune-gp", cfg.evolve.seed, a, &cfg)?;
    let mut w = CsvOut::create(&out_path(c, "gp_history.csv"), &head, GenerationStats::CSV_HEADER)?;
    for h in &r.history {
        w.row(h.csv_fields())?;
    }
    w.finish()?;
    let best = out_path(c, "best_params.toml");
    let mut f = io::create(&best)?;
    io::write_comment(&mut f, &format!("{head}best_fitness = {}", r.best_fitness))?;
    std::io::Write::write_all(&mut f, config::to_toml_string(&r.params)?.as_bytes())?;
    std::io::Write::flush(&mut f)?;
    println!("best fitness {:.4}", r.best_fitness);
    println!("oscillates {}", oscillates(&r.params, a.check_duration)?);
    println!("displacement {:.4} m", rollout_displacement(&r.params, &cfg.physics, cfg.fitness.horizon)?);
    println!("wrote {}", best.display());
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct TrainArgs {
    /// Start from the desk-scale two-level configuration.
    #[arg(long)]
    smoke: bool,
    /// Parameter file for the oscillator network.
    #[arg(long)]
    params: Option<PathBuf>,
}

pub fn train(c: &Common, a: &TrainArgs) -> Result<()> {
    let mut base = if a.smoke { TrainConfig::smoke() } else { TrainConfig::default() };
    if let Some(p) = &a.params {
        base.cpg = config::load(Some(p), &[])?;
    }
    let mut cfg = load_with_curriculum(&base, c.config.as_deref(), &c.overrides)?;
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    cfg.check()?;
    let dir = io::output_dir(c.out_dir.as_deref());
    let mut f = io::create(&dir.join("train_config.toml"))?;
    io::write_comment(&mut f, &format!("command = \"train\"\nseed = {}", cfg.seed))?;
    std::io::Write::write_all(&mut f, config::to_toml_string(&cfg)?.as_bytes())?;
    std::io::Write::flush(&mut f)?;
    let r = run_train(&cfg, Some(&dir))?;
    let m = &r.checkpoint.meta;
    println!(
        "episodes {} updates {} level {} success {:.3} completed {}",
        m.episodes, m.updates, m.level, m.success_rate, m.completed
    );
    println!("wrote {}", dir.join("checkpoint.json").display());
    Ok(())
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Script {
    Single,
    Zigzag,
    Square,
    /// Head-link bias against goal angle.
    Steering,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RolloutFile {
    rollout: RolloutConfig,
    physics: PhysicsParams,
    steering: SteeringFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SteeringFile {
    angles: Vec<f64>,
    distance: f64,
    steps: usize,
}

impl Default for SteeringFile {
    fn default() -> Self {
        let s = SteeringConfig::default();
        Self {
            angles: vec![-90.0, -60.0, -30.0, 30.0, 60.0, 90.0],
            distance: s.distance,
            steps: s.steps,
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct RolloutArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Goal script; without it the config file's script is used.
    #[arg(long, value_enum)]
    script: Option<Script>,
    #[arg(long, default_value_t = 1.5)]
    distance: f64,
    /// Goal angle left of the heading (deg), single script.
    #[arg(long, default_value_t = 0.0)]
    angle: f64,
    #[arg(long, default_value_t = 4)]
    legs: usize,
    #[arg(long, default_value_t = 1.0)]
    leg_length: f64,
    #[arg(long, default_value_t = 0.5)]
    offset: f64,
    #[arg(long, default_value_t = 1.0)]
    side: f64,
    #[arg(long)]
    mirrored: bool,
    #[arg(long)]
    stochastic: bool,
}

pub fn rollout(c: &Common, a: &RolloutArgs) -> Result<()> {
    let ck = PolicyCheckpoint::load(&a.checkpoint)?;
    let mut cfg: RolloutFile = load_onto(&RolloutFile::default(), c.config.as_deref(), &c.overrides)?;
    if let Some(s) = c.seed {
        cfg.rollout.seed = s;
    }
    cfg.rollout.mirrored |= a.mirrored;
    cfg.rollout.stochastic |= a.stochastic;
    cfg.physics.check()?;
    let script = match a.script {
        Some(Script::Steering) => return steering(c, a, &ck, &cfg),
        Some(Script::Single) => Some(GoalScript::Single {
            distance: a.distance,
            angle: a.angle,
        }),
        Some(Script::Zigzag) => Some(GoalScript::Zigzag {
            legs: a.legs,
            leg_length: a.leg_length,
            offset: a.offset,
        }),
        Some(Script::Square) => Some(GoalScript::Square { side: a.side }),
        None => None,
    };
    if let Some(s) = script {
        cfg.rollout.script = s;
    }
    let logs = run_rollout(&ck.policy, &cfg.physics, &cfg.rollout)?;
    let head = header("rollout", cfg.rollout.seed, a, &cfg)?;
    let mut w = CsvOut::create(&out_path(c, "rollout.csv"), &head, &format!("trial,{}", EpisodeLog::CSV_HEADER))?;
    for (i, log) in logs.iter().enumerate() {
        for mut row in log.csv_rows() {
            row.insert(0, i.to_string());
            w.row(row)?;
        }
    }
    w.finish()?;
    let mut s = CsvOut::create(
        &out_path(c, "rollout_summary.csv"),
        &head,
        "trial,goal_x,goal_y,outcome,steps,total_reward,mean_v_g",
    )?;
    for (i, log) in logs.iter().enumerate() {
        println!(
            "trial {i}: goal ({:.2}, {:.2}) {} after {} steps, mean v_g {:.4}",
            log.goal[0],
            log.goal[1],
            log.outcome.as_str(),
            log.steps.len(),
            log.mean_v_g()
        );
        s.row([
            i.to_string(),
            log.goal[0].to_string(),
            log.goal[1].to_string(),
            log.outcome.as_str().to_string(),
            log.steps.len().to_string(),
            log.total_reward().to_string(),
            log.mean_v_g().to_string(),
        ])?;
    }
    s.finish()
}

fn steering(c: &Common, a: &RolloutArgs, ck: &PolicyCheckpoint, cfg: &RolloutFile) -> Result<()> {
    let sc = SteeringConfig {
        distance: cfg.steering.distance,
        steps: cfg.steering.steps,
    };
    let pts = steering_study(&ck.policy, &cfg.physics, &cfg.steering.angles, &sc)?;
    let mut w = CsvOut::create(
        &out_path(c, "steering.csv"),
        &header("rollout", cfg.rollout.seed, a, cfg)?,
        SteeringPoint::CSV_HEADER,
    )?;
    for p in &pts {
        w.row(p.csv_fields())?;
    }
    w.finish()?;
    let (monotone, r2) = steering_summary(&pts);
    let x: Vec<f64> = pts.iter().map(|p| p.bias_u).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.bias_psi).collect();
    fit_line("bias(psi1) on bias(u1)", linear_fit(&x, &y));
    println!("monotone in angle {monotone}, r2 {}", r2.map(|v| format!("{v:.4}")).unwrap_or("-".into()));
    Ok(())
}
