//! Switched RLC network simulation.
//!
//! M series-RLC loads hang off one sinusoidal source behind a shared source
//! resistance. Each load's resistive branch is multiplied by its two-level
//! switch function, so an OFF load keeps a (large) standby resistance in
//! series and its branch current collapses. Charge balance per load:
//!
//! ```text
//! L_j q_j'' = eps cos(w t) - R_src sum_k q_k' - R_j S_j(t) q_j' - q_j / C_j
//! ```
//!
//! The integrator is classical fixed-step RK4 with switch values sampled at
//! the stage times; no event detection at switching edges. A step lands
//! exactly on an edge only if the edge is a multiple of dt, otherwise the
//! edge is crossed mid-step, which costs a local O(dt) error at isolated
//! points and does not disturb the order-4 behaviour between edges.
//!
//! Measurement mirrors a metering device: the instantaneous total current is
//! squared and averaged over a sliding window of exactly `W` samples ending
//! at the current step, and the root of that mean is emitted every
//! `sample_stride` steps.

use serde::{Deserialize, Serialize};

use crate::chaos::{self, SwitchSchedule};
use crate::encoding::bit_from_switch;
use crate::error::{Error, Result};

/// One RLC load branch plus its switching dwell time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadSpec {
    /// Branch resistance in ohms; multiplied by the switch level, so the OFF
    /// branch sees `resistance * standby_constant`. May be zero for ideal
    /// LC test circuits.
    pub resistance: f64,
    /// Branch inductance in henries, strictly positive (it divides).
    pub inductance: f64,
    /// Branch capacitance in farads, strictly positive (it divides).
    pub capacitance: f64,
    /// Dwell time in seconds: the load re-reads its switch sequence every
    /// `tau` seconds.
    pub tau: f64,
}

impl LoadSpec {
    fn validate(&self, field: &str) -> Result<()> {
        let check = |name: &str, v: f64, strictly: bool| -> Result<()> {
            let ok = v.is_finite() && if strictly { v > 0.0 } else { v >= 0.0 };
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidConfig {
                    field: format!("{field}.{name}"),
                    message: format!(
                        "must be {} and finite, got {v}",
                        if strictly { "positive" } else { "non-negative" }
                    ),
                })
            }
        };
        check("resistance", self.resistance, false)?;
        check("inductance", self.inductance, true)?;
        check("capacitance", self.capacitance, true)?;
        check("tau", self.tau, true)
    }
}

/// Full description of the network, the drive, the switching chaos, and the
/// measurement grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    /// Source resistance in ohms shared by every branch. Non-negative.
    pub source_resistance: f64,
    /// Drive amplitude eps in volts.
    pub amplitude: f64,
    /// Drive angular frequency w in rad/s. Zero means a DC drive.
    pub angular_frequency: f64,
    /// Standby constant K: the switch level of an OFF load. Must exceed 1.
    pub standby_constant: f64,
    /// Seed of the shared logistic orbit, strictly inside (0, 1) and away
    /// from the map's fixed points.
    pub seed: f64,
    /// Per-load orbit seeds. When set, load j switches from its own orbit
    /// instead of the shared one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_load_seeds: Option<Vec<f64>>,
    /// Integration step in seconds.
    pub dt: f64,
    /// Total simulated time in seconds, starting from rest at t = 0.
    pub t_end: f64,
    /// RMS averaging window in seconds; must be a whole number of steps.
    pub rms_window: f64,
    /// Steps between emitted RMS samples.
    pub sample_stride: usize,
    /// The loads, listed in bit order: load 1 is bit 1 of the joint state.
    pub loads: Vec<LoadSpec>,
}

fn config_err(field: &str, message: impl Into<String>) -> Error {
    Error::InvalidConfig {
        field: format!("network.{field}"),
        message: message.into(),
    }
}

impl NetworkConfig {
    pub fn num_loads(&self) -> usize {
        self.loads.len()
    }

    /// RMS window length in steps. The window must divide into whole steps
    /// to within 1e-9 relative.
    pub fn window_steps(&self) -> Result<usize> {
        let ratio = self.rms_window / self.dt;
        let steps = ratio.round();
        if steps < 1.0 {
            return Err(config_err("rms_window", "window shorter than one step"));
        }
        if (ratio - steps).abs() > 1e-9 * ratio.abs() {
            return Err(config_err(
                "rms_window",
                format!("window must be a whole number of steps, got {ratio} steps"),
            ));
        }
        Ok(steps as usize)
    }

    /// Number of RK4 steps from 0 to `t_end`.
    pub fn total_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.loads.is_empty() {
            return Err(config_err("loads", "at least one load is required"));
        }
        for (j, load) in self.loads.iter().enumerate() {
            load.validate(&format!("network.loads[{j}]"))?;
        }
        if !(self.source_resistance >= 0.0) || !self.source_resistance.is_finite() {
            return Err(config_err(
                "source_resistance",
                format!("must be non-negative and finite, got {}", self.source_resistance),
            ));
        }
        if !self.amplitude.is_finite() {
            return Err(config_err("amplitude", "must be finite"));
        }
        if !(self.angular_frequency >= 0.0) || !self.angular_frequency.is_finite() {
            return Err(config_err(
                "angular_frequency",
                format!("must be non-negative and finite, got {}", self.angular_frequency),
            ));
        }
        if !(self.standby_constant > 1.0) || !self.standby_constant.is_finite() {
            return Err(config_err(
                "standby_constant",
                format!("must exceed 1, got {}", self.standby_constant),
            ));
        }
        chaos::validate_seed(self.seed).map_err(|e| config_err("seed", e.to_string()))?;
        if let Some(seeds) = &self.per_load_seeds {
            if seeds.len() != self.loads.len() {
                return Err(config_err(
                    "per_load_seeds",
                    format!("expected {} seeds, got {}", self.loads.len(), seeds.len()),
                ));
            }
            for &s in seeds {
                chaos::validate_seed(s).map_err(|e| config_err("per_load_seeds", e.to_string()))?;
            }
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(config_err("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.rms_window > 0.0) || !self.rms_window.is_finite() {
            return Err(config_err(
                "rms_window",
                format!("must be positive, got {}", self.rms_window),
            ));
        }
        self.window_steps()?;
        if !(self.t_end >= self.rms_window) || !self.t_end.is_finite() {
            return Err(config_err(
                "t_end",
                format!(
                    "must be at least one RMS window ({} s), got {}",
                    self.rms_window, self.t_end
                ),
            ));
        }
        if self.sample_stride == 0 {
            return Err(config_err("sample_stride", "must be at least 1"));
        }
        Ok(())
    }
}

/// Instantaneous charges and currents of all loads at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitState {
    pub t: f64,
    /// Capacitor charges q_j in coulombs.
    pub charge: Vec<f64>,
    /// Branch currents q_j' in amperes.
    pub current: Vec<f64>,
}

impl CircuitState {
    /// Network at rest: all charges and currents zero.
    pub fn at_rest(num_loads: usize) -> Self {
        CircuitState {
            t: 0.0,
            charge: vec![0.0; num_loads],
            current: vec![0.0; num_loads],
        }
    }

    pub fn total_current(&self) -> f64 {
        self.current.iter().sum()
    }

    fn check_finite(&self) -> Result<()> {
        for (j, (&q, &i)) in self.charge.iter().zip(&self.current).enumerate() {
            if !q.is_finite() || !i.is_finite() {
                return Err(Error::NonFiniteState {
                    t: self.t,
                    detail: format!("load {}: charge {q}, current {i}", j + 1),
                });
            }
        }
        Ok(())
    }
}

/// Time derivatives of a [`CircuitState`].
#[derive(Debug, Clone, PartialEq)]
pub struct Derivatives {
    /// dq_j/dt, equal to the branch currents.
    pub charge_rate: Vec<f64>,
    /// d2q_j/dt2, the branch current rates.
    pub current_rate: Vec<f64>,
}

fn accelerations(
    t: f64,
    charge: &[f64],
    current: &[f64],
    config: &NetworkConfig,
    schedule: &SwitchSchedule,
    out: &mut [f64],
) -> Result<()> {
    let drive = config.amplitude * (config.angular_frequency * t).cos();
    let total: f64 = current.iter().sum();
    for (j, load) in config.loads.iter().enumerate() {
        let switch = schedule.switch_value(j, t)?;
        out[j] = (drive
            - config.source_resistance * total
            - load.resistance * switch * current[j]
            - charge[j] / load.capacitance)
            / load.inductance;
    }
    Ok(())
}

/// Right-hand side of the network ODEs at the state's own time.
pub fn derivatives(
    state: &CircuitState,
    config: &NetworkConfig,
    schedule: &SwitchSchedule,
) -> Result<Derivatives> {
    let m = config.loads.len();
    if state.charge.len() != m || state.current.len() != m {
        return Err(Error::DimensionMismatch {
            left: state.charge.len(),
            right: m,
        });
    }
    let mut rate = vec![0.0; m];
    accelerations(state.t, &state.charge, &state.current, config, schedule, &mut rate)?;
    Ok(Derivatives {
        charge_rate: state.current.clone(),
        current_rate: rate,
    })
}

/// Reusable RK4 stepper; owns the stage buffers so the hot loop never
/// allocates.
pub struct Integrator<'a> {
    config: &'a NetworkConfig,
    schedule: &'a SwitchSchedule,
    q_stage: Vec<f64>,
    v2: Vec<f64>,
    v3: Vec<f64>,
    v4: Vec<f64>,
    a1: Vec<f64>,
    a2: Vec<f64>,
    a3: Vec<f64>,
    a4: Vec<f64>,
}

impl<'a> Integrator<'a> {
    pub fn new(config: &'a NetworkConfig, schedule: &'a SwitchSchedule) -> Result<Self> {
        let m = config.loads.len();
        if m == 0 {
            return Err(Error::EmptyInput("load list"));
        }
        if schedule.num_loads() != m {
            return Err(Error::DimensionMismatch {
                left: schedule.num_loads(),
                right: m,
            });
        }
        Ok(Integrator {
            config,
            schedule,
            q_stage: vec![0.0; m],
            v2: vec![0.0; m],
            v3: vec![0.0; m],
            v4: vec![0.0; m],
            a1: vec![0.0; m],
            a2: vec![0.0; m],
            a3: vec![0.0; m],
            a4: vec![0.0; m],
        })
    }

    /// Advances the state by exactly one step of size `dt` in place.
    pub fn step(&mut self, state: &mut CircuitState, dt: f64) -> Result<()> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "step size must be positive and finite, got {dt}"
            )));
        }
        let m = self.config.loads.len();
        if state.charge.len() != m || state.current.len() != m {
            return Err(Error::DimensionMismatch {
                left: state.charge.len(),
                right: m,
            });
        }
        let t = state.t;
        let half = 0.5 * dt;
        let cfg = self.config;
        let sched = self.schedule;

        // Stage 1 at (t, q, v).
        accelerations(t, &state.charge, &state.current, cfg, sched, &mut self.a1)?;

        // Stage 2 at t + dt/2 with Euler half-steps along stage 1.
        for j in 0..m {
            self.q_stage[j] = state.charge[j] + half * state.current[j];
            self.v2[j] = state.current[j] + half * self.a1[j];
        }
        accelerations(t + half, &self.q_stage, &self.v2, cfg, sched, &mut self.a2)?;

        // Stage 3 at t + dt/2 along stage 2.
        for j in 0..m {
            self.q_stage[j] = state.charge[j] + half * self.v2[j];
            self.v3[j] = state.current[j] + half * self.a2[j];
        }
        accelerations(t + half, &self.q_stage, &self.v3, cfg, sched, &mut self.a3)?;

        // Stage 4 at t + dt along stage 3.
        for j in 0..m {
            self.q_stage[j] = state.charge[j] + dt * self.v3[j];
            self.v4[j] = state.current[j] + dt * self.a3[j];
        }
        accelerations(t + dt, &self.q_stage, &self.v4, cfg, sched, &mut self.a4)?;

        let sixth = dt / 6.0;
        for j in 0..m {
            state.charge[j] += sixth
                * (state.current[j] + 2.0 * self.v2[j] + 2.0 * self.v3[j] + self.v4[j]);
            state.current[j] +=
                sixth * (self.a1[j] + 2.0 * self.a2[j] + 2.0 * self.a3[j] + self.a4[j]);
        }
        state.t = t + dt;
        state.check_finite()
    }
}

/// One classical RK4 step, returning the advanced state.
pub fn rk4_step(
    state: &CircuitState,
    dt: f64,
    config: &NetworkConfig,
    schedule: &SwitchSchedule,
) -> Result<CircuitState> {
    let mut integ = Integrator::new(config, schedule)?;
    let mut next = state.clone();
    integ.step(&mut next, dt)?;
    Ok(next)
}

/// Dense output of a simulation: every integration step's time, total
/// current, and switch bits.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTrajectory {
    pub dt: f64,
    pub num_loads: usize,
    pub times: Vec<f64>,
    pub total_current: Vec<f64>,
    /// Row-major switch bits, one row of `num_loads` bits per step.
    switch_bits: Vec<u8>,
}

impl RawTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn bits_at(&self, step: usize) -> &[u8] {
        let m = self.num_loads;
        &self.switch_bits[step * m..(step + 1) * m]
    }
}

/// Builder for hand-made trajectories in tests and calibration tools.
pub fn trajectory_from_samples(
    dt: f64,
    num_loads: usize,
    times: Vec<f64>,
    total_current: Vec<f64>,
    switch_bits: Vec<u8>,
) -> Result<RawTrajectory> {
    if times.len() != total_current.len() || switch_bits.len() != times.len() * num_loads {
        return Err(Error::DimensionMismatch {
            left: total_current.len(),
            right: times.len(),
        });
    }
    Ok(RawTrajectory {
        dt,
        num_loads,
        times,
        total_current,
        switch_bits,
    })
}

fn switch_bits_at(
    t: f64,
    config: &NetworkConfig,
    schedule: &SwitchSchedule,
    out: &mut Vec<u8>,
) -> Result<()> {
    for j in 0..config.loads.len() {
        let s = schedule.switch_value(j, t)?;
        out.push(bit_from_switch(s, config.standby_constant)?);
    }
    Ok(())
}

/// Integrates the network from rest over `[0, t_end]`, recording every step.
///
/// Memory grows with `t_end / dt`; for long measurement runs prefer
/// [`simulate_rms`], which streams the same arithmetic.
pub fn simulate(config: &NetworkConfig, schedule: &SwitchSchedule) -> Result<RawTrajectory> {
    config.validate()?;
    schedule.check_covers(config.t_end)?;
    let steps = config.total_steps();
    let m = config.loads.len();

    let mut state = CircuitState::at_rest(m);
    let mut integ = Integrator::new(config, schedule)?;
    let mut times = Vec::with_capacity(steps + 1);
    let mut total = Vec::with_capacity(steps + 1);
    let mut bits = Vec::with_capacity((steps + 1) * m);

    times.push(state.t);
    total.push(state.total_current());
    switch_bits_at(state.t, config, schedule, &mut bits)?;
    for _ in 0..steps {
        integ.step(&mut state, config.dt)?;
        times.push(state.t);
        total.push(state.total_current());
        switch_bits_at(state.t, config, schedule, &mut bits)?;
    }
    Ok(RawTrajectory {
        dt: config.dt,
        num_loads: m,
        times,
        total_current: total,
        switch_bits: bits,
    })
}

/// Windowed measurement series: RMS of the total current every
/// `sample_stride` steps, with the switch bits read at the window's right
/// edge.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSeries {
    pub times: Vec<f64>,
    pub i_rms: Vec<f64>,
    num_loads: usize,
    switch_bits: Vec<u8>,
    /// Largest RMS value in the series.
    pub i_max: f64,
}

impl SampledSeries {
    pub fn from_parts(
        times: Vec<f64>,
        i_rms: Vec<f64>,
        num_loads: usize,
        switch_bits: Vec<u8>,
    ) -> Result<Self> {
        if times.len() != i_rms.len() || switch_bits.len() != times.len() * num_loads {
            return Err(Error::DimensionMismatch {
                left: i_rms.len(),
                right: times.len(),
            });
        }
        let i_max = i_rms.iter().cloned().fold(0.0f64, f64::max);
        Ok(SampledSeries {
            times,
            i_rms,
            num_loads,
            switch_bits,
            i_max,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn num_loads(&self) -> usize {
        self.num_loads
    }

    pub fn bits_at(&self, row: usize) -> &[u8] {
        let m = self.num_loads;
        &self.switch_bits[row * m..(row + 1) * m]
    }

    /// Copies rows `range` into a new series with a freshly computed `i_max`.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Result<SampledSeries> {
        if range.end > self.len() || range.start > range.end {
            return Err(Error::InvalidArgument(format!(
                "slice {range:?} out of bounds for a series of {} rows",
                self.len()
            )));
        }
        let m = self.num_loads;
        SampledSeries::from_parts(
            self.times[range.clone()].to_vec(),
            self.i_rms[range.clone()].to_vec(),
            m,
            self.switch_bits[range.start * m..range.end * m].to_vec(),
        )
    }
}

struct RmsEmitter {
    window: usize,
    stride: usize,
    times: Vec<f64>,
    i_rms: Vec<f64>,
    bits: Vec<u8>,
}

impl RmsEmitter {
    fn new(window: usize, stride: usize) -> Self {
        RmsEmitter {
            window,
            stride,
            times: Vec::new(),
            i_rms: Vec::new(),
            bits: Vec::new(),
        }
    }

    fn wants(&self, step: usize) -> bool {
        step + 1 >= self.window && (step + 1 - self.window) % self.stride == 0
    }

    /// Mean of the squared currents over window steps, summed oldest first so
    /// the streaming and whole-trajectory paths agree bit for bit.
    fn emit<F: Fn(usize) -> f64>(&mut self, step: usize, t: f64, row_bits: &[u8], current_at: F) {
        let mut acc = 0.0;
        for m in (step + 1 - self.window)..=step {
            let i = current_at(m);
            acc += i * i;
        }
        self.times.push(t);
        self.i_rms.push((acc / self.window as f64).sqrt());
        self.bits.extend_from_slice(row_bits);
    }
}

/// Sliding-window RMS of a recorded trajectory on the configured measurement
/// grid.
pub fn rms_series(trajectory: &RawTrajectory, config: &NetworkConfig) -> Result<SampledSeries> {
    let window = config.window_steps()?;
    if config.sample_stride == 0 {
        return Err(config_err("sample_stride", "must be at least 1"));
    }
    if trajectory.len() < window {
        return Err(Error::InvalidArgument(format!(
            "trajectory of {} steps is shorter than one RMS window of {window} steps",
            trajectory.len()
        )));
    }
    let mut emitter = RmsEmitter::new(window, config.sample_stride);
    for step in 0..trajectory.len() {
        if emitter.wants(step) {
            emitter.emit(step, trajectory.times[step], trajectory.bits_at(step), |m| {
                trajectory.total_current[m]
            });
        }
    }
    SampledSeries::from_parts(
        emitter.times,
        emitter.i_rms,
        trajectory.num_loads,
        emitter.bits,
    )
}

/// Fused simulate-and-measure: identical results to
/// `rms_series(&simulate(..)?, ..)` while holding only one RMS window of
/// current history in memory.
pub fn simulate_rms(config: &NetworkConfig, schedule: &SwitchSchedule) -> Result<SampledSeries> {
    config.validate()?;
    schedule.check_covers(config.t_end)?;
    let window = config.window_steps()?;
    let steps = config.total_steps();
    let m = config.loads.len();
    if steps + 1 < window {
        return Err(config_err(
            "t_end",
            format!("run of {steps} steps is shorter than one RMS window of {window} steps"),
        ));
    }

    let mut state = CircuitState::at_rest(m);
    let mut integ = Integrator::new(config, schedule)?;
    let mut ring = vec![0.0f64; window];
    let mut emitter = RmsEmitter::new(window, config.sample_stride);
    let mut row_bits = Vec::with_capacity(m);

    for step in 0..=steps {
        if step > 0 {
            integ.step(&mut state, config.dt)?;
        }
        ring[step % window] = state.total_current();
        if emitter.wants(step) {
            row_bits.clear();
            switch_bits_at(state.t, config, schedule, &mut row_bits)?;
            emitter.emit(step, state.t, &row_bits, |m| ring[m % window]);
        }
    }
    SampledSeries::from_parts(emitter.times, emitter.i_rms, m, emitter.bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::BinarySequence;
    use std::f64::consts::PI;

    /// Schedule holding every load at level `value` long enough for `t_end`.
    fn constant_schedule(value: f64, standby: f64, num_loads: usize) -> SwitchSchedule {
        let seq = BinarySequence::from_values(vec![value], standby).unwrap();
        // One entry with a dwell time of a year covers any test horizon.
        let seqs = vec![seq; num_loads];
        SwitchSchedule::per_load(seqs, vec![3.0e7; num_loads]).unwrap()
    }

    fn lc_config(num_loads: usize) -> NetworkConfig {
        NetworkConfig {
            source_resistance: 0.0,
            amplitude: 0.0,
            angular_frequency: 1.0,
            loads: vec![
                LoadSpec {
                    resistance: 0.0,
                    inductance: 1.0,
                    capacitance: 1.0,
                    tau: 1.0,
                };
                num_loads
            ],
            standby_constant: 1e5,
            seed: 0.123456789,
            per_load_seeds: None,
            dt: 0.01,
            t_end: 10.0,
            rms_window: 1.0,
            sample_stride: 1,
        }
    }

    #[test]
    fn derivatives_of_unit_lc() {
        // Single loop, R = R_src = 0, eps = 0, q = 1, q' = 0, L = C = 1:
        // q'' = -q.
        let config = lc_config(1);
        let schedule = constant_schedule(1.0, 1e5, 1);
        let state = CircuitState {
            t: 0.0,
            charge: vec![1.0],
            current: vec![0.0],
        };
        let d = derivatives(&state, &config, &schedule).unwrap();
        assert_eq!(d.charge_rate, vec![0.0]);
        assert_eq!(d.current_rate, vec![-1.0]);
    }

    #[test]
    fn derivatives_with_dc_drive() {
        // eps = 1, w = 0, everything at rest: q'' = eps / L = 1.
        let mut config = lc_config(1);
        config.amplitude = 1.0;
        config.angular_frequency = 0.0;
        let schedule = constant_schedule(1.0, 1e5, 1);
        let state = CircuitState::at_rest(1);
        let d = derivatives(&state, &config, &schedule).unwrap();
        assert_eq!(d.current_rate, vec![1.0]);
    }

    #[test]
    fn derivatives_respect_symmetry() {
        // Two identical loads in identical states get identical rates.
        let mut config = lc_config(2);
        config.amplitude = 5.0;
        config.source_resistance = 2.0;
        for load in &mut config.loads {
            load.resistance = 3.0;
        }
        let schedule = constant_schedule(1.0, 1e5, 2);
        let state = CircuitState {
            t: 0.3,
            charge: vec![0.2, 0.2],
            current: vec![-0.1, -0.1],
        };
        let d = derivatives(&state, &config, &schedule).unwrap();
        assert_eq!(d.current_rate[0], d.current_rate[1]);
    }

    #[test]
    fn rk4_single_step_matches_lc_closed_form() {
        // q'' = -q from (1, 0): q(t) = cos t. One dt = 0.01 step of RK4 has
        // local error around dt^5.
        let config = lc_config(1);
        let schedule = constant_schedule(1.0, 1e5, 1);
        let state = CircuitState {
            t: 0.0,
            charge: vec![1.0],
            current: vec![0.0],
        };
        let next = rk4_step(&state, 0.01, &config, &schedule).unwrap();
        assert!((next.charge[0] - 0.01f64.cos()).abs() < 1e-9);
        assert!((next.current[0] + 0.01f64.sin()).abs() < 1e-9);
        assert_eq!(next.t, 0.01);
    }

    #[test]
    fn rk4_keeps_equilibrium() {
        let config = lc_config(1);
        let schedule = constant_schedule(1.0, 1e5, 1);
        let state = CircuitState::at_rest(1);
        let next = rk4_step(&state, 0.01, &config, &schedule).unwrap();
        assert_eq!(next.charge, vec![0.0]);
        assert_eq!(next.current, vec![0.0]);
    }

    fn lc_global_error(dt: f64) -> f64 {
        let config = lc_config(1);
        let schedule = constant_schedule(1.0, 1e5, 1);
        let mut state = CircuitState {
            t: 0.0,
            charge: vec![1.0],
            current: vec![0.0],
        };
        let mut integ = Integrator::new(&config, &schedule).unwrap();
        let steps = (10.0 / dt).round() as usize;
        for _ in 0..steps {
            integ.step(&mut state, dt).unwrap();
        }
        (state.charge[0] - state.t.cos()).abs()
    }

    #[test]
    fn rk4_converges_at_order_four() {
        let coarse = lc_global_error(0.02);
        let fine = lc_global_error(0.01);
        let ratio = coarse / fine;
        assert!(
            (12.0..=20.0).contains(&ratio),
            "error ratio {ratio} (coarse {coarse:e}, fine {fine:e})"
        );
    }

    #[test]
    fn lc_conserves_energy() {
        // eps = 0 and all resistances 0: total energy
        // sum L q'^2 / 2 + q^2 / (2C) is an invariant of the exact flow.
        let mut config = lc_config(2);
        config.loads[1].inductance = 0.5;
        config.loads[1].capacitance = 2.0;
        let w0 = 1.0; // both natural frequencies are 1 rad/s here
        let dt = 2.0 * PI / w0 / 1000.0;
        let schedule = constant_schedule(1.0, 1e5, 2);
        let mut state = CircuitState {
            t: 0.0,
            charge: vec![1.0, 0.5],
            current: vec![0.0, 0.0],
        };
        let energy = |s: &CircuitState| -> f64 {
            config
                .loads
                .iter()
                .enumerate()
                .map(|(j, l)| {
                    0.5 * l.inductance * s.current[j] * s.current[j]
                        + 0.5 * s.charge[j] * s.charge[j] / l.capacitance
                })
                .sum()
        };
        let e0 = energy(&state);
        let mut integ = Integrator::new(&config, &schedule).unwrap();
        for _ in 0..1000 {
            integ.step(&mut state, dt).unwrap();
        }
        let drift = (energy(&state) - e0).abs() / e0;
        assert!(drift < 1e-6, "relative energy drift {drift:e}");
    }

    fn driven_config() -> NetworkConfig {
        NetworkConfig {
            source_resistance: 0.5,
            amplitude: 170.0,
            angular_frequency: 2.0 * PI * 60.0,
            loads: vec![LoadSpec {
                resistance: 10.0,
                inductance: 0.1,
                capacitance: 100e-6,
                tau: 1.0,
            }],
            standby_constant: 1e5,
            seed: 0.123456789,
            per_load_seeds: None,
            dt: 1.0 / 60.0 / 1000.0,
            t_end: 20.0 / 60.0,
            rms_window: 1.0 / 60.0,
            sample_stride: 250,
        }
    }

    #[test]
    fn zero_drive_stays_at_rest() {
        let mut config = driven_config();
        config.amplitude = 0.0;
        let schedule = constant_schedule(1.0, 1e5, 1);
        let traj = simulate(&config, &schedule).unwrap();
        assert!(traj.total_current.iter().all(|&i| i == 0.0));
        let series = rms_series(&traj, &config).unwrap();
        assert!(series.i_rms.iter().all(|&v| v == 0.0));
        assert_eq!(series.i_max, 0.0);
    }

    #[test]
    fn driven_load_settles_to_phasor_amplitude() {
        // Series RLC with the switch ON: steady-state current amplitude is
        // eps / |Z| with Z = (R_src + R) + j(wL - 1/(wC)).
        let config = driven_config();
        let schedule = constant_schedule(1.0, 1e5, 1);
        let traj = simulate(&config, &schedule).unwrap();
        let w = config.angular_frequency;
        let load = &config.loads[0];
        let reactance = w * load.inductance - 1.0 / (w * load.capacitance);
        let resistance = config.source_resistance + load.resistance;
        let expected = config.amplitude / (resistance * resistance + reactance * reactance).sqrt();
        // Transient decays with time constant 2L/R ~ 20 ms; look at the last
        // period of a 333 ms run.
        let steps_per_period = 1000;
        let tail = &traj.total_current[traj.len() - steps_per_period..];
        let peak = tail.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let rel = (peak - expected).abs() / expected;
        assert!(rel < 0.01, "peak {peak}, phasor {expected}, rel {rel}");
    }

    #[test]
    fn standby_branch_current_is_negligible() {
        // Switch OFF with K = 1e5: the branch resistance R K dominates the
        // impedance, so the RMS current stays below eps / (R K) plus a 10%
        // margin. The fast OFF-branch mode has rate R K / L = 1e7 1/s, so
        // explicit RK4 needs dt below about 2.8 L / (R K).
        let mut config = driven_config();
        config.dt = 1.0 / 60.0 / 200_000.0;
        config.t_end = 2.0 / 60.0;
        config.sample_stride = 100_000;
        let schedule = constant_schedule(1e5, 1e5, 1);
        let series = simulate_rms(&config, &schedule).unwrap();
        let bound = config.amplitude / (config.loads[0].resistance * config.standby_constant);
        assert!(series.i_max > 0.0);
        assert!(
            series.i_max <= bound * 1.1,
            "standby RMS {} exceeds bound {}",
            series.i_max,
            bound
        );
    }

    #[test]
    fn unstable_step_size_reports_divergence() {
        // Same OFF branch at the measurement step size: |dt * lambda| >> 2.8,
        // so the explicit integrator must blow up and say so.
        let mut config = driven_config();
        config.dt = 1.0 / 60.0 / 200.0;
        config.t_end = 2.0 / 60.0;
        config.sample_stride = 100;
        let schedule = constant_schedule(1e5, 1e5, 1);
        match simulate_rms(&config, &schedule) {
            Err(Error::NonFiniteState { .. }) => {}
            other => panic!("expected NonFiniteState, got {other:?}"),
        }
    }

    fn chaotic_two_load_config() -> (NetworkConfig, SwitchSchedule) {
        let config = NetworkConfig {
            source_resistance: 0.0,
            amplitude: 10.0,
            angular_frequency: 2.0 * PI * 60.0,
            loads: vec![
                LoadSpec {
                    resistance: 10.0,
                    inductance: 0.1,
                    capacitance: 100e-6,
                    tau: 3.0 / 60.0,
                },
                LoadSpec {
                    resistance: 20.0,
                    inductance: 0.05,
                    capacitance: 200e-6,
                    tau: 5.0 / 60.0,
                },
            ],
            standby_constant: 20.0,
            seed: 0.123456789,
            per_load_seeds: None,
            dt: 1.0 / 60.0 / 2000.0,
            t_end: 8.0 / 60.0,
            rms_window: 1.0 / 60.0,
            sample_stride: 500,
        };
        let seq = crate::chaos::generate_sequence(config.seed, 64, config.standby_constant).unwrap();
        let taus: Vec<f64> = config.loads.iter().map(|l| l.tau).collect();
        let schedule = SwitchSchedule::shared(seq, taus).unwrap();
        (config, schedule)
    }

    #[test]
    fn response_is_linear_in_amplitude() {
        let (config, schedule) = chaotic_two_load_config();
        let mut doubled = config.clone();
        doubled.amplitude = 2.0 * config.amplitude;
        let base = simulate(&config, &schedule).unwrap();
        let twice = simulate(&doubled, &schedule).unwrap();
        let scale = twice
            .total_current
            .iter()
            .fold(0.0f64, |a, &b| a.max(b.abs()));
        for (a, b) in base.total_current.iter().zip(&twice.total_current) {
            assert!((2.0 * a - b).abs() <= 1e-9 * scale, "2*{a} vs {b}");
        }
    }

    #[test]
    fn loads_superpose_without_source_resistance() {
        // With R_src = 0 the loads are uncoupled, so the two-load total
        // current equals the sum of the single-load runs.
        let (config, schedule) = chaotic_two_load_config();
        let combined = simulate(&config, &schedule).unwrap();
        let seq = crate::chaos::generate_sequence(config.seed, 64, config.standby_constant).unwrap();
        let mut parts: Vec<RawTrajectory> = Vec::new();
        for j in 0..2 {
            let mut single = config.clone();
            single.loads = vec![config.loads[j].clone()];
            let sched = SwitchSchedule::shared(seq.clone(), vec![config.loads[j].tau]).unwrap();
            parts.push(simulate(&single, &sched).unwrap());
        }
        let scale = combined
            .total_current
            .iter()
            .fold(0.0f64, |a, &b| a.max(b.abs()));
        for n in 0..combined.len() {
            let sum = parts[0].total_current[n] + parts[1].total_current[n];
            let diff = (combined.total_current[n] - sum).abs();
            assert!(diff <= 1e-9 * scale, "step {n}: {diff}");
        }
    }

    fn flat_trajectory(value: f64, steps: usize) -> RawTrajectory {
        let dt = 0.001;
        let times: Vec<f64> = (0..steps).map(|n| n as f64 * dt).collect();
        let current = vec![value; steps];
        let bits = vec![0u8; steps];
        trajectory_from_samples(dt, 1, times, current, bits).unwrap()
    }

    fn rms_grid_config(window_steps: usize, stride: usize) -> NetworkConfig {
        let mut config = lc_config(1);
        config.dt = 0.001;
        config.rms_window = 0.001 * window_steps as f64;
        config.sample_stride = stride;
        config.t_end = 10.0;
        config
    }

    #[test]
    fn rms_of_constant_is_exact() {
        // 1.5^2 = 2.25 is dyadic: the window sum, mean, and root are all
        // exact, so equality is strict.
        let traj = flat_trajectory(1.5, 2000);
        let series = rms_series(&traj, &rms_grid_config(1000, 100)).unwrap();
        assert!(!series.is_empty());
        assert!(series.i_rms.iter().all(|&v| v == 1.5));
        let neg = flat_trajectory(-2.0, 1500);
        let series = rms_series(&neg, &rms_grid_config(1000, 100)).unwrap();
        assert!(series.i_rms.iter().all(|&v| v == 2.0));
    }

    #[test]
    fn rms_of_generic_constant_is_tight() {
        let traj = flat_trajectory(0.37, 1200);
        let series = rms_series(&traj, &rms_grid_config(1000, 50)).unwrap();
        for &v in &series.i_rms {
            assert!((v - 0.37).abs() < 1e-12);
        }
    }

    #[test]
    fn rms_of_sinusoid_is_amplitude_over_root_two() {
        // One full period per window: RMS = A / sqrt(2).
        let amp = 3.2;
        let steps = 4000;
        let dt = 0.001;
        let w = 2.0 * PI; // period 1 s = 1000 steps
        let times: Vec<f64> = (0..steps).map(|n| n as f64 * dt).collect();
        let current: Vec<f64> = times.iter().map(|&t| amp * (w * t).sin()).collect();
        let bits = vec![0u8; steps];
        let traj = trajectory_from_samples(dt, 1, times, current, bits).unwrap();
        let series = rms_series(&traj, &rms_grid_config(1000, 250)).unwrap();
        let expected = amp / 2.0f64.sqrt();
        for &v in &series.i_rms {
            assert!(
                (v - expected).abs() <= 1e-6 * expected,
                "rms {v} vs {expected}"
            );
        }
    }

    #[test]
    fn rms_never_exceeds_window_peak() {
        let dt = 0.001;
        let steps = 3000;
        let times: Vec<f64> = (0..steps).map(|n| n as f64 * dt).collect();
        let current: Vec<f64> = (0..steps)
            .map(|n| ((n * 2654435761usize) % 1000) as f64 / 500.0 - 1.0)
            .collect();
        let peak = current.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let bits = vec![0u8; steps];
        let traj = trajectory_from_samples(dt, 1, times, current, bits).unwrap();
        let series = rms_series(&traj, &rms_grid_config(500, 77)).unwrap();
        for &v in &series.i_rms {
            assert!(v <= peak + 1e-12);
        }
        assert!(series.i_max <= peak + 1e-12);
    }

    #[test]
    fn streaming_rms_matches_batch_exactly() {
        let (config, schedule) = chaotic_two_load_config();
        let batch = rms_series(&simulate(&config, &schedule).unwrap(), &config).unwrap();
        let fused = simulate_rms(&config, &schedule).unwrap();
        assert_eq!(batch.len(), fused.len());
        assert!(!batch.is_empty());
        for n in 0..batch.len() {
            assert_eq!(batch.times[n].to_bits(), fused.times[n].to_bits());
            assert_eq!(batch.i_rms[n].to_bits(), fused.i_rms[n].to_bits());
            assert_eq!(batch.bits_at(n), fused.bits_at(n));
        }
        assert_eq!(batch.i_max.to_bits(), fused.i_max.to_bits());
    }

    #[test]
    fn emission_grid_and_right_edge_bits() {
        // Window of 4 samples, stride 3: windows end at steps 3, 6, 9, with
        // the bits taken at the window's right edge.
        let dt = 1.0;
        let times: Vec<f64> = (0..10).map(|n| n as f64).collect();
        let current = vec![1.0; 10];
        let bits: Vec<u8> = (0..10).map(|n| (n % 2) as u8).collect();
        let traj = trajectory_from_samples(dt, 1, times, current, bits).unwrap();
        let mut config = lc_config(1);
        config.dt = 1.0;
        config.rms_window = 4.0;
        config.sample_stride = 3;
        config.t_end = 9.0;
        let series = rms_series(&traj, &config).unwrap();
        assert_eq!(series.times, vec![3.0, 6.0, 9.0]);
        assert_eq!(series.bits_at(0), &[1]);
        assert_eq!(series.bits_at(1), &[0]);
        assert_eq!(series.bits_at(2), &[1]);
    }

    #[test]
    fn config_validation_catches_bad_grids() {
        let mut config = lc_config(1);
        config.rms_window = 0.0105; // 10.5 steps
        assert!(matches!(
            config.validate(),
            Err(Error::InvalidConfig { field, .. }) if field == "network.rms_window"
        ));

        let mut config = lc_config(1);
        config.t_end = 0.5 * config.rms_window;
        assert!(matches!(
            config.validate(),
            Err(Error::InvalidConfig { field, .. }) if field == "network.t_end"
        ));

        let mut config = lc_config(1);
        config.loads[0].capacitance = 0.0;
        assert!(config.validate().is_err());

        let mut config = lc_config(1);
        config.seed = 0.75;
        assert!(matches!(
            config.validate(),
            Err(Error::InvalidConfig { field, .. }) if field == "network.seed"
        ));

        let mut config = lc_config(1);
        config.per_load_seeds = Some(vec![0.3, 0.4]);
        assert!(matches!(
            config.validate(),
            Err(Error::InvalidConfig { field, .. }) if field == "network.per_load_seeds"
        ));
    }

    #[test]
    fn schedule_must_cover_the_run() {
        let (config, _) = chaotic_two_load_config();
        let seq = crate::chaos::generate_sequence(config.seed, 2, config.standby_constant).unwrap();
        let taus: Vec<f64> = config.loads.iter().map(|l| l.tau).collect();
        let short = SwitchSchedule::shared(seq, taus).unwrap();
        assert!(matches!(
            simulate(&config, &short),
            Err(Error::SequenceExhausted { .. })
        ));
    }
}
