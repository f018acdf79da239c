//! Online protocol: per-epoch allocation at the current price estimate,
//! a projected stochastic-gradient update of the price against the running
//! average BS spend, and (for proportional fairness) running-average rate
//! weights.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::allocator::{allocate_epoch, EpochAllocation};
use crate::channel::{ChannelModel, ChannelState, NetworkConfig};
use crate::error::{Error, Result};
use crate::metrics::jain_index;

/// Floor applied to the rate weights seeded from the warm-up epoch.
pub const RATE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    ProportionalFair,
    MaxSumRate,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::ProportionalFair, Mode::MaxSumRate];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::ProportionalFair => "pf",
            Mode::MaxSumRate => "maxsum",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pf" | "proportional-fair" => Ok(Mode::ProportionalFair),
            "maxsum" | "max-sum-rate" | "msr" => Ok(Mode::MaxSumRate),
            other => Err(Error::config("mode", format!("unknown mode `{other}`"))),
        }
    }
}

/// Default step size: 0.01 in units of `1 / P_avg`.
pub fn default_gamma0(config: &NetworkConfig) -> f64 {
    0.01 / config.p_avg
}

/// How the price step is scaled.
///
/// `Fixed` applies `gamma0` as is. `ThresholdScaled` multiplies it by the
/// running mean of the switching threshold `b(i)`, which carries the units
/// and magnitude of the price, so the same `gamma0` gives a comparable
/// relative step under either rate weighting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepRule {
    Fixed,
    #[default]
    ThresholdScaled,
}

impl StepRule {
    pub fn as_str(self) -> &'static str {
        match self {
            StepRule::Fixed => "fixed",
            StepRule::ThresholdScaled => "scaled",
        }
    }
}

impl fmt::Display for StepRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StepRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fixed" => Ok(StepRule::Fixed),
            "scaled" | "threshold-scaled" => Ok(StepRule::ThresholdScaled),
            other => Err(Error::config("step_rule", format!("unknown step rule `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolState {
    pub lambda_hat: f64,
    pub rbar_hat: Vec<f64>,
    /// Sum of `p0 * tau0` over completed epochs.
    pub energy_sum: f64,
    /// Number of completed epochs.
    pub epoch: u64,
    pub gamma0: f64,
    pub step_rule: StepRule,
    /// Sum of the switching thresholds seen so far.
    pub threshold_sum: f64,
    pub mode: Mode,
}

impl ProtocolState {
    pub fn new(config: &NetworkConfig, mode: Mode, gamma0: f64) -> Self {
        ProtocolState {
            lambda_hat: 0.0,
            rbar_hat: vec![1.0; config.num_users()],
            energy_sum: 0.0,
            epoch: 0,
            gamma0,
            step_rule: StepRule::default(),
            threshold_sum: 0.0,
            mode,
        }
    }

    pub fn with_step_rule(mut self, rule: StepRule) -> Self {
        self.step_rule = rule;
        self
    }

    /// Step applied after `epoch` completed epochs.
    pub fn step_size(&self) -> f64 {
        match self.step_rule {
            StepRule::Fixed => self.gamma0,
            StepRule::ThresholdScaled => {
                self.gamma0 * self.threshold_sum / self.epoch.max(1) as f64
            }
        }
    }

    /// Price the next epoch is decided at. The first epoch is forced to
    /// transmit so the rate weights can be seeded from real rates.
    pub fn price(&self) -> f64 {
        if self.epoch == 0 {
            0.0
        } else {
            self.lambda_hat
        }
    }
}

/// Runs one epoch of the online protocol.
pub fn step(
    state: &ProtocolState,
    channel: &ChannelState,
    config: &NetworkConfig,
) -> Result<(EpochAllocation, ProtocolState)> {
    let mut next = state.clone();
    let alloc = step_in_place(&mut next, channel, config)?;
    Ok((alloc, next))
}

pub fn step_in_place(
    state: &mut ProtocolState,
    channel: &ChannelState,
    config: &NetworkConfig,
) -> Result<EpochAllocation> {
    let (alloc, ws) = allocate_epoch(channel, config, state.price(), &state.rbar_hat)?;

    state.epoch += 1;
    let i = state.epoch as f64;
    state.energy_sum += alloc.e;
    state.threshold_sum += ws.condition_value;
    let gradient = state.energy_sum / i - config.p_avg;
    state.lambda_hat = (state.lambda_hat + state.step_size() * gradient).max(0.0);

    if state.mode == Mode::ProportionalFair {
        for (r_hat, r) in state.rbar_hat.iter_mut().zip(&alloc.rate) {
            *r_hat = (i - 1.0) / i * *r_hat + r / i;
            if state.epoch == 1 {
                *r_hat = r_hat.max(RATE_FLOOR);
            }
        }
    }
    Ok(alloc)
}

/// One row of the per-epoch trace. `lambda_hat` is the price the epoch was
/// decided at.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: u64,
    pub p0: f64,
    pub tau0: f64,
    pub tau: Vec<f64>,
    pub rate: Vec<f64>,
    pub lambda_hat: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub mode: Mode,
    pub epochs: u64,
    /// Empty unless the run recorded its trace.
    pub records: Vec<EpochRecord>,
    /// `(1/M) sum_i r_k(i)` per user.
    pub avg_rates: Vec<f64>,
    pub sum_rate: f64,
    pub jain: f64,
    pub jain_degenerate: bool,
    /// `(1/M) sum_i p0(i) tau0(i)`.
    pub avg_bs_power: f64,
    pub final_state: ProtocolState,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub sum_rate: f64,
    pub jain: f64,
    /// All average rates were zero; `jain` is reported as 0.
    pub degenerate: bool,
}

pub fn compute_metrics(result: &SimulationResult) -> Metrics {
    metrics_from_rates(&result.avg_rates)
}

fn metrics_from_rates(avg_rates: &[f64]) -> Metrics {
    let sum_rate = avg_rates.iter().sum();
    match jain_index(avg_rates) {
        Some(jain) => Metrics {
            sum_rate,
            jain,
            degenerate: false,
        },
        None => Metrics {
            sum_rate,
            jain: 0.0,
            degenerate: true,
        },
    }
}

/// Incremental driver around [`step_in_place`] that accumulates aggregates.
#[derive(Debug, Clone)]
pub struct Simulation<'a> {
    config: &'a NetworkConfig,
    state: ProtocolState,
    rate_sums: Vec<f64>,
    records: Option<Vec<EpochRecord>>,
}

impl<'a> Simulation<'a> {
    pub fn new(config: &'a NetworkConfig, mode: Mode, gamma0: f64, record: bool) -> Result<Self> {
        config.validate()?;
        if !(gamma0 > 0.0 && gamma0.is_finite()) {
            return Err(Error::config("gamma0", "must be positive"));
        }
        Ok(Simulation {
            config,
            state: ProtocolState::new(config, mode, gamma0),
            rate_sums: vec![0.0; config.num_users()],
            records: record.then(Vec::new),
        })
    }

    pub fn with_step_rule(mut self, rule: StepRule) -> Self {
        self.state.step_rule = rule;
        self
    }

    pub fn state(&self) -> &ProtocolState {
        &self.state
    }

    pub fn advance(&mut self, channel: &ChannelState) -> Result<EpochAllocation> {
        let price = self.state.price();
        let alloc = step_in_place(&mut self.state, channel, self.config)?;
        for (s, r) in self.rate_sums.iter_mut().zip(&alloc.rate) {
            *s += r;
        }
        if let Some(records) = &mut self.records {
            records.push(EpochRecord {
                epoch: channel.epoch,
                p0: alloc.p0,
                tau0: alloc.tau0,
                tau: alloc.tau.clone(),
                rate: alloc.rate.clone(),
                lambda_hat: price,
            });
        }
        Ok(alloc)
    }

    pub fn finish(self) -> SimulationResult {
        let m = self.state.epoch.max(1) as f64;
        let avg_rates: Vec<f64> = self.rate_sums.iter().map(|s| s / m).collect();
        let metrics = metrics_from_rates(&avg_rates);
        SimulationResult {
            mode: self.state.mode,
            epochs: self.state.epoch,
            records: self.records.unwrap_or_default(),
            sum_rate: metrics.sum_rate,
            jain: metrics.jain,
            jain_degenerate: metrics.degenerate,
            avg_bs_power: self.state.energy_sum / m,
            avg_rates,
            final_state: self.state,
        }
    }
}

/// Online run over `m` epochs of the seeded Rayleigh channel, trace recorded.
pub fn run(
    config: &NetworkConfig,
    m: u64,
    seed: u64,
    mode: Mode,
    gamma0: f64,
) -> Result<SimulationResult> {
    run_with(config, m, seed, mode, gamma0, true)
}

pub fn run_with(
    config: &NetworkConfig,
    m: u64,
    seed: u64,
    mode: Mode,
    gamma0: f64,
    record: bool,
) -> Result<SimulationResult> {
    if m == 0 {
        return Err(Error::config("epochs", "must be at least 1"));
    }
    let model = ChannelModel::new(seed);
    let mut sim = Simulation::new(config, mode, gamma0, record)?;
    for i in 1..=m {
        sim.advance(&model.sample_epoch(config, i))?;
    }
    Ok(sim.finish())
}

/// Online run over a pre-generated channel trace.
pub fn run_trace(
    config: &NetworkConfig,
    trace: &[ChannelState],
    mode: Mode,
    gamma0: f64,
    record: bool,
) -> Result<SimulationResult> {
    if trace.is_empty() {
        return Err(Error::config("epochs", "channel trace is empty"));
    }
    let mut sim = Simulation::new(config, mode, gamma0, record)?;
    for ch in trace {
        sim.advance(ch)?;
    }
    Ok(sim.finish())
}

fn weights_for(mode: Mode, rbar: &[f64], k: usize) -> Vec<f64> {
    match mode {
        Mode::MaxSumRate => vec![1.0; k],
        Mode::ProportionalFair => rbar.to_vec(),
    }
}

/// Averages over a trace allocated at a fixed price and fixed weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPriceOutcome {
    pub lambda: f64,
    pub avg_bs_power: f64,
    pub avg_rates: Vec<f64>,
    pub sum_rate: f64,
}

pub fn evaluate_fixed_price(
    config: &NetworkConfig,
    trace: &[ChannelState],
    mode: Mode,
    rbar: &[f64],
    lambda: f64,
) -> Result<FixedPriceOutcome> {
    let k = config.num_users();
    let weights = weights_for(mode, rbar, k);
    let mut spend = 0.0;
    let mut sums = vec![0.0; k];
    for ch in trace {
        let (alloc, _) = allocate_epoch(ch, config, lambda, &weights)?;
        spend += alloc.e;
        for (s, r) in sums.iter_mut().zip(&alloc.rate) {
            *s += r;
        }
    }
    let m = trace.len().max(1) as f64;
    let avg_rates: Vec<f64> = sums.iter().map(|s| s / m).collect();
    Ok(FixedPriceOutcome {
        lambda,
        avg_bs_power: spend / m,
        sum_rate: avg_rates.iter().sum(),
        avg_rates,
    })
}

/// Relative spend error at which the offline bisection stops early.
const CALIBRATION_REL_TOL: f64 = 1e-4;

/// Price at which the average BS spend over `trace` equals `P_avg`.
///
/// The average spend is non-increasing in the price, so the price is
/// bisected on `[0, max_i b(i)]`, where `b(i)` is the switching threshold of
/// epoch `i` (the BS is silent in every epoch above it). Returns 0 when even
/// a zero price does not exhaust the budget.
pub fn calibrate_lambda_offline(
    config: &NetworkConfig,
    trace: &[ChannelState],
    mode: Mode,
    rbar: &[f64],
) -> Result<f64> {
    config.validate()?;
    if trace.is_empty() {
        return Err(Error::config("trace", "empty channel trace"));
    }
    let k = config.num_users();
    let weights = weights_for(mode, rbar, k);
    if weights.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::config("rbar", "rate weights must be positive"));
    }

    // thresholds do not depend on the price
    let mut thresholds = Vec::with_capacity(trace.len());
    for ch in trace {
        let c: Vec<f64> = ch.gains.iter().map(|x| config.p_c * x).collect();
        thresholds.push(crate::allocator::weighted_marginal(
            &ch.a,
            &c,
            &weights,
            0.0,
            config.p_max,
        )?);
    }
    let spend = |lambda: f64| -> Result<f64> {
        let mut total = 0.0;
        for (ch, &b) in trace.iter().zip(&thresholds) {
            if b > lambda {
                total += allocate_epoch(ch, config, lambda, &weights)?.0.e;
            }
        }
        Ok(total / trace.len() as f64)
    };

    let target = config.p_avg;
    let at_zero = spend(0.0)?;
    if at_zero <= target {
        return Ok(0.0);
    }
    let (mut lo, mut err_lo) = (0.0, at_zero - target);
    let mut hi = thresholds.iter().copied().fold(0.0, f64::max);
    let mut err_hi = -target;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let err = spend(mid)? - target;
        if err.abs() <= CALIBRATION_REL_TOL * target {
            return Ok(mid);
        }
        if err > 0.0 {
            lo = mid;
            err_lo = err;
        } else {
            hi = mid;
            err_hi = err;
        }
    }
    Ok(if err_lo.abs() <= err_hi.abs() { lo } else { hi })
}

/// Writes `epoch,p0,tau0,tau_1..tau_K,r_1..r_K,lambda_hat`.
pub fn write_trace_csv<W: Write>(mut w: W, records: &[EpochRecord], k: usize) -> Result<()> {
    write!(w, "epoch,p0,tau0")?;
    for i in 1..=k {
        write!(w, ",tau_{i}")?;
    }
    for i in 1..=k {
        write!(w, ",r_{i}")?;
    }
    writeln!(w, ",lambda_hat")?;
    for r in records {
        write!(w, "{},{:.16e},{:.16e}", r.epoch, r.p0, r.tau0)?;
        for t in &r.tau {
            write!(w, ",{t:.16e}")?;
        }
        for x in &r.rate {
            write!(w, ",{x:.16e}")?;
        }
        writeln!(w, ",{:.16e}", r.lambda_hat)?;
    }
    Ok(())
}

pub const SUMMARY_HEADER: &str = "mode,K,p_c,P_avg,M,seed,sum_rate,jain,avg_bs_power";

/// One `mode,K,p_c,P_avg,M,seed,sum_rate,jain,avg_bs_power` row (no header).
pub fn summary_row(config: &NetworkConfig, seed: u64, result: &SimulationResult) -> String {
    format!(
        "{},{},{:e},{},{},{},{:.10},{:.10},{:.10}",
        result.mode,
        config.num_users(),
        config.p_c,
        config.p_avg,
        result.epochs,
        seed,
        result.sum_rate,
        result.jain,
        result.avg_bs_power
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> NetworkConfig {
        NetworkConfig::reference(5).unwrap()
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("pf".parse::<Mode>().unwrap(), Mode::ProportionalFair);
        assert_eq!("MaxSum".parse::<Mode>().unwrap(), Mode::MaxSumRate);
        assert!("fair".parse::<Mode>().is_err());
        assert_eq!(Mode::MaxSumRate.to_string(), "maxsum");
    }

    #[test]
    fn silent_epoch_lowers_price() {
        let c = cfg();
        let mut s = ProtocolState::new(&c, Mode::MaxSumRate, 0.05).with_step_rule(StepRule::Fixed);
        s.epoch = 10;
        s.energy_sum = 2.0;
        s.lambda_hat = 0.3;
        let zero = ChannelState::new(11, vec![0.0; 5], &c).unwrap();
        let (alloc, next) = step(&s, &zero, &c).unwrap();
        assert!(!alloc.transmits());
        assert!(next.lambda_hat < s.lambda_hat);
        assert!((next.lambda_hat - (0.3 + 0.05 * (2.0 / 11.0 - 1.0))).abs() < 1e-15);

        s.lambda_hat = 0.01;
        let (_, next) = step(&s, &zero, &c).unwrap();
        assert_eq!(next.lambda_hat, 0.0);
    }

    #[test]
    fn scaled_step_uses_mean_threshold() {
        let c = cfg();
        let mut s = ProtocolState::new(&c, Mode::MaxSumRate, 0.05);
        assert_eq!(s.step_rule, StepRule::ThresholdScaled);
        s.epoch = 10;
        s.energy_sum = 2.0;
        s.lambda_hat = 0.3;
        s.threshold_sum = 4.4;
        let zero = ChannelState::new(11, vec![0.0; 5], &c).unwrap();
        let (_, next) = step(&s, &zero, &c).unwrap();
        assert_eq!(next.threshold_sum, 4.4);
        let expected = 0.3 + 0.05 * 0.4 * (2.0 / 11.0 - 1.0);
        assert!((next.lambda_hat - expected).abs() < 1e-15);

        let ch = sample(&c, 2, 11);
        let (_, next) = step(&s, &ch, &c).unwrap();
        let b = crate::allocator::weighted_marginal(&ch.a, &[0.0; 5], &[1.0; 5], 0.0, c.p_max)
            .unwrap();
        assert!((next.threshold_sum - (4.4 + b)).abs() <= 1e-12 * (4.4 + b));
        assert_eq!("fixed".parse::<StepRule>().unwrap(), StepRule::Fixed);
        assert!("adaptive".parse::<StepRule>().is_err());
    }

    #[test]
    fn maxsum_keeps_unit_weights() {
        let r = run(&cfg(), 300, 1, Mode::MaxSumRate, 0.01).unwrap();
        assert!(r.final_state.rbar_hat.iter().all(|&w| w == 1.0));
    }

    #[test]
    fn first_pf_epoch_seeds_weights() {
        let c = cfg();
        let s = ProtocolState::new(&c, Mode::ProportionalFair, 0.01);
        let ch = ChannelModel::new(3).sample_epoch(&c, 1);
        let (alloc, next) = step(&s, &ch, &c).unwrap();
        assert!(alloc.transmits());
        for k in 0..5 {
            assert_eq!(next.rbar_hat[k], alloc.rate[k].max(RATE_FLOOR));
        }
        assert_eq!(next.epoch, 1);
        assert_eq!(next.energy_sum, alloc.e);
    }

    #[test]
    fn single_epoch_run_matches_manual_step() {
        let c = cfg();
        let r = run(&c, 1, 9, Mode::ProportionalFair, 0.01).unwrap();
        let s = ProtocolState::new(&c, Mode::ProportionalFair, 0.01);
        let (alloc, next) = step(&s, &sample(&c, 9, 1), &c).unwrap();
        assert_eq!(r.final_state, next);
        assert_eq!(r.records[0].tau, alloc.tau);
        assert_eq!(r.avg_rates, alloc.rate);
        assert_eq!(r.avg_bs_power, alloc.e);
    }

    fn sample(c: &NetworkConfig, seed: u64, i: u64) -> ChannelState {
        ChannelModel::new(seed).sample_epoch(c, i)
    }

    #[test]
    fn aggregates_match_trace() {
        let c = cfg();
        let r = run(&c, 2000, 4, Mode::ProportionalFair, 0.01).unwrap();
        let m = r.records.len() as f64;
        let mut per_user = [0.0; 5];
        let mut spend = 0.0;
        for rec in &r.records {
            for k in 0..5 {
                per_user[k] += rec.rate[k] / m;
            }
            spend += rec.p0 * rec.tau0 / m;
            assert!(rec.p0 == 0.0 || rec.p0 == c.p_max);
        }
        assert!((per_user.iter().sum::<f64>() - r.sum_rate).abs() <= 1e-9);
        assert!((spend - r.avg_bs_power).abs() <= 1e-9);
        assert!(r.avg_bs_power <= c.p_max);
        let exact: f64 = r.records.iter().map(|rec| rec.p0 * rec.tau0).sum();
        assert_eq!(r.final_state.energy_sum, exact);
        assert!(r.final_state.rbar_hat.iter().all(|&w| w > 0.0));
        assert_eq!(compute_metrics(&r).sum_rate, r.sum_rate);
    }

    #[test]
    fn trace_entry_point_matches_seeded_run() {
        let c = cfg();
        let trace = ChannelModel::new(8).trace(&c, 500);
        let a = run(&c, 500, 8, Mode::MaxSumRate, 0.01).unwrap();
        let b = run_trace(&c, &trace, Mode::MaxSumRate, 0.01, true).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn epoch_duration_cancels() {
        let mut c = NetworkConfig::reference(3).unwrap();
        c.p_c = 1e-5;
        let a = run(&c, 400, 2, Mode::ProportionalFair, 0.01).unwrap();
        c.epoch_duration = 2.0;
        let b = run(&c, 400, 2, Mode::ProportionalFair, 0.01).unwrap();
        assert_eq!(a.records, b.records);
    }

    #[test]
    fn calibration_limits() {
        let mut c = cfg();
        let trace = ChannelModel::new(1).trace(&c, 1000);
        c.p_avg = c.p_max;
        assert_eq!(calibrate_lambda_offline(&c, &trace, Mode::MaxSumRate, &[]).unwrap(), 0.0);
        let huge = evaluate_fixed_price(&c, &trace, Mode::MaxSumRate, &[], 1e12).unwrap();
        assert_eq!(huge.avg_bs_power, 0.0);
        assert_eq!(huge.sum_rate, 0.0);
    }

    #[test]
    fn calibration_hits_budget() {
        let c = cfg();
        let trace = ChannelModel::new(2).trace(&c, 20_000);
        let lambda = calibrate_lambda_offline(&c, &trace, Mode::MaxSumRate, &[]).unwrap();
        assert!(lambda > 0.0);
        let out = evaluate_fixed_price(&c, &trace, Mode::MaxSumRate, &[], lambda).unwrap();
        assert!((out.avg_bs_power / c.p_avg - 1.0).abs() <= 1e-3, "{}", out.avg_bs_power);
    }

    #[test]
    fn trace_csv_layout() {
        let c = NetworkConfig::reference(2).unwrap();
        let r = run(&c, 3, 1, Mode::ProportionalFair, 0.01).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &r.records, 2).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "epoch,p0,tau0,tau_1,tau_2,r_1,r_2,lambda_hat");
        let row: Vec<f64> = lines.next().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(row.len(), 8);
        assert_eq!(row[1], r.records[0].p0);
        assert_eq!(row[3], r.records[0].tau[0]);
        assert_eq!(text.lines().count(), 4);
        assert_eq!(summary_row(&c, 1, &r).split(',').count(), SUMMARY_HEADER.split(',').count());
    }

    #[test]
    fn rejects_bad_inputs() {
        let c = cfg();
        assert!(run(&c, 0, 1, Mode::MaxSumRate, 0.01).is_err());
        assert!(run(&c, 10, 1, Mode::MaxSumRate, 0.0).is_err());
        assert!(run_trace(&c, &[], Mode::MaxSumRate, 0.01, false).is_err());
    }
}
