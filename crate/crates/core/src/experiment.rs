//! Parameter sweeps over the online protocol.
//!
//! Two layouts are supported. The circuit-power sweep varies `p_c` at a
//! fixed budget over the reference deployment and emits
//! `p_c,K,mode,sum_rate,jain`. The budget sweep varies `P_avg` (with
//! `P_max = 5 P_avg`) for users at a common distance, one curve per `p_c`,
//! and emits `P_avg,p_c,K,mode,sum_rate,jain`. Every row is the mean over
//! seeds of independent [`run_with`](crate::protocol::run_with) calls and can be reproduced from the
//! row's own parameters through [`ExperimentSpec::point_config`].

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::channel::{NetworkConfig, REFERENCE_DISTANCES};
use crate::config::{apply_network_keys, KeyValues, NETWORK_KEYS};
use crate::error::{Error, Result};
use crate::protocol::{default_gamma0, Mode, Simulation, StepRule};

pub const DEFAULT_EPOCHS: u64 = 100_000;
pub const DEFAULT_SEEDS: [u64; 3] = [1, 2, 3];
/// Peak-to-average BS power ratio used by both sweeps.
pub const PEAK_TO_AVERAGE: f64 = 5.0;

pub const CIRCUIT_POWER_HEADER: &str = "p_c,K,mode,sum_rate,jain";
pub const BUDGET_HEADER: &str = "P_avg,p_c,K,mode,sum_rate,jain";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    CircuitPower,
    AveragePower,
}

impl SweepVariable {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepVariable::CircuitPower => "p_c",
            SweepVariable::AveragePower => "P_avg",
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "p_c" => Ok(SweepVariable::CircuitPower),
            "P_avg" => Ok(SweepVariable::AveragePower),
            other => Err(Error::config("sweep", format!("unknown sweep variable `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub sweep: SweepVariable,
    /// Values of the swept variable, strictly increasing.
    pub values: Vec<f64>,
    /// Circuit powers, one curve each, for the budget sweep. Ignored by the
    /// circuit-power sweep.
    pub curves: Vec<f64>,
    pub modes: Vec<Mode>,
    pub user_counts: Vec<usize>,
    /// Deployment and fixed parameters. `user_counts` select prefixes of it.
    pub base: NetworkConfig,
    pub epochs: u64,
    pub seeds: Vec<u64>,
    /// Price step; `None` uses [`default_gamma0`] at each point.
    pub gamma0: Option<f64>,
    pub step_rule: StepRule,
}

/// One output row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub p_c: f64,
    pub p_avg: f64,
    pub k: usize,
    pub mode: Mode,
    pub sum_rate: f64,
    pub jain: f64,
    pub avg_bs_power: f64,
}

const SPEC_KEYS: &[&str] = &[
    "name", "sweep", "values", "modes", "K", "curves", "epochs", "seeds", "gamma0", "step_rule",
];

impl ExperimentSpec {
    /// Circuit-power sweep over the reference deployment at `P_avg = 1 W`.
    pub fn circuit_power_sweep() -> Self {
        let mut base = NetworkConfig::with_distances(REFERENCE_DISTANCES.to_vec());
        base.p_avg = 1.0;
        base.p_max = PEAK_TO_AVERAGE * base.p_avg;
        ExperimentSpec {
            name: "fig1".into(),
            sweep: SweepVariable::CircuitPower,
            values: vec![0.0, 1e-5, 2e-5, 5e-5],
            curves: Vec::new(),
            modes: Mode::ALL.to_vec(),
            user_counts: vec![3, 5],
            base,
            epochs: DEFAULT_EPOCHS,
            seeds: DEFAULT_SEEDS.to_vec(),
            gamma0: None,
            step_rule: StepRule::default(),
        }
    }

    /// Budget sweep with five users at 10 m.
    pub fn budget_sweep() -> Self {
        ExperimentSpec {
            name: "fig2".into(),
            sweep: SweepVariable::AveragePower,
            values: vec![0.25, 0.5, 1.0, 2.0],
            curves: vec![0.0, 1e-5, 2e-5],
            modes: Mode::ALL.to_vec(),
            user_counts: vec![3, 5],
            base: NetworkConfig::equal_distance(5, 10.0),
            epochs: DEFAULT_EPOCHS,
            seeds: DEFAULT_SEEDS.to_vec(),
            gamma0: None,
            step_rule: StepRule::default(),
        }
    }

    /// Reads a spec from a `key = value` file on top of `defaults`.
    ///
    /// Network keys (`distances`, `P_avg`, `p_c`, ...) override the default
    /// deployment. The swept variable's key may stand in for `values`, and
    /// in a budget sweep `p_c` may stand in for `curves`.
    pub fn from_key_values(defaults: ExperimentSpec, kv: &KeyValues) -> Result<Self> {
        let allowed: Vec<&str> = SPEC_KEYS.iter().chain(NETWORK_KEYS).copied().collect();
        kv.check_keys(&allowed)?;
        let mut spec = defaults;
        if let Some(name) = kv.get("name")? {
            spec.name = name;
        }
        if let Some(sweep) = kv.get("sweep")? {
            spec.sweep = sweep;
        }
        if let Some(modes) = kv.get_list("modes")? {
            spec.modes = modes;
        }
        if let Some(k) = kv.get_list("K")? {
            spec.user_counts = k;
        }
        if let Some(epochs) = kv.get("epochs")? {
            spec.epochs = epochs;
        }
        if let Some(seeds) = kv.get_list("seeds")? {
            spec.seeds = seeds;
        }
        if let Some(g) = kv.get("gamma0")? {
            spec.gamma0 = Some(g);
        }
        if let Some(rule) = kv.get("step_rule")? {
            spec.step_rule = rule;
        }
        let skip: &[&str] = match spec.sweep {
            SweepVariable::CircuitPower => {
                if let Some(values) = kv.get_list("values")?.or(kv.get_list("p_c")?) {
                    spec.values = values;
                }
                &["K", "p_c"]
            }
            SweepVariable::AveragePower => {
                if let Some(values) = kv.get_list("values")?.or(kv.get_list("P_avg")?) {
                    spec.values = values;
                }
                if let Some(curves) = kv.get_list("curves")?.or(kv.get_list("p_c")?) {
                    spec.curves = curves;
                }
                &["K", "p_c", "P_avg", "P_max"]
            }
        };
        apply_network_keys(&mut spec.base, kv, skip)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::config("values", "sweep values must be non-empty"));
        }
        if self.values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::config("values", "sweep values must be strictly increasing"));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("values", "sweep values must be finite"));
        }
        if self.modes.is_empty() {
            return Err(Error::config("modes", "at least one mode is required"));
        }
        if self.user_counts.is_empty() {
            return Err(Error::config("K", "at least one user count is required"));
        }
        let available = self.base.num_users();
        if let Some(k) = self.user_counts.iter().find(|&&k| k == 0 || k > available) {
            return Err(Error::config(
                "K",
                format!("{k} not in 1..={available} for the configured deployment"),
            ));
        }
        if self.epochs == 0 {
            return Err(Error::config("epochs", "must be at least 1"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "at least one seed is required"));
        }
        if let Some(g) = self.gamma0 {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::config("gamma0", "must be positive"));
            }
        }
        if self.sweep == SweepVariable::AveragePower {
            if self.curves.is_empty() {
                return Err(Error::config("curves", "at least one p_c curve is required"));
            }
            let d0 = self.base.distances[0];
            if self.base.distances.iter().any(|&d| d != d0) {
                return Err(Error::config(
                    "distances",
                    "the budget sweep needs all users at the same distance",
                ));
            }
        }
        for (p_c, p_avg) in self.grid() {
            for &k in &self.user_counts {
                self.point_config(p_c, p_avg, k)?.validate()?;
            }
        }
        Ok(())
    }

    /// `(p_c, P_avg)` pairs in output order.
    fn grid(&self) -> Vec<(f64, f64)> {
        match self.sweep {
            SweepVariable::CircuitPower => {
                self.values.iter().map(|&p_c| (p_c, self.base.p_avg)).collect()
            }
            SweepVariable::AveragePower => self
                .curves
                .iter()
                .flat_map(|&p_c| self.values.iter().map(move |&p_avg| (p_c, p_avg)))
                .collect(),
        }
    }

    /// Network of a single point. In the budget sweep `P_max` follows `P_avg`.
    pub fn point_config(&self, p_c: f64, p_avg: f64, k: usize) -> Result<NetworkConfig> {
        let mut config = self.base.truncated(k)?;
        config.p_c = p_c;
        if self.sweep == SweepVariable::AveragePower {
            config.p_avg = p_avg;
            config.p_max = PEAK_TO_AVERAGE * p_avg;
        }
        Ok(config)
    }

    pub fn header(&self) -> &'static str {
        match self.sweep {
            SweepVariable::CircuitPower => CIRCUIT_POWER_HEADER,
            SweepVariable::AveragePower => BUDGET_HEADER,
        }
    }
}

/// Seed-averaged sum rate, Jain index and BS spend at one network.
pub fn run_point(
    config: &NetworkConfig,
    mode: Mode,
    epochs: u64,
    seeds: &[u64],
    gamma0: Option<f64>,
    step_rule: StepRule,
) -> Result<(f64, f64, f64)> {
    let gamma0 = gamma0.unwrap_or_else(|| default_gamma0(config));
    let mut acc = (0.0, 0.0, 0.0);
    for &seed in seeds {
        let model = crate::channel::ChannelModel::new(seed);
        let mut sim = Simulation::new(config, mode, gamma0, false)?.with_step_rule(step_rule);
        for i in 1..=epochs {
            sim.advance(&model.sample_epoch(config, i))?;
        }
        let r = sim.finish();
        acc.0 += r.sum_rate;
        acc.1 += r.jain;
        acc.2 += r.avg_bs_power;
    }
    let n = seeds.len() as f64;
    Ok((acc.0 / n, acc.1 / n, acc.2 / n))
}

/// Runs every point of `spec`, calling `progress` after each row.
pub fn run_experiment_with<F: FnMut(&SweepPoint)>(
    spec: &ExperimentSpec,
    mut progress: F,
) -> Result<Vec<SweepPoint>> {
    spec.validate()?;
    let mut rows = Vec::new();
    let mut push = |row: SweepPoint| {
        progress(&row);
        rows.push(row);
    };
    let grid = spec.grid();
    match spec.sweep {
        SweepVariable::CircuitPower => {
            for &k in &spec.user_counts {
                for &mode in &spec.modes {
                    for &(p_c, p_avg) in &grid {
                        push(evaluate(spec, p_c, p_avg, k, mode)?);
                    }
                }
            }
        }
        SweepVariable::AveragePower => {
            for &p_c in &spec.curves {
                for &k in &spec.user_counts {
                    for &mode in &spec.modes {
                        for &p_avg in &spec.values {
                            push(evaluate(spec, p_c, p_avg, k, mode)?);
                        }
                    }
                }
            }
        }
    }
    Ok(rows)
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<SweepPoint>> {
    run_experiment_with(spec, |_| {})
}

fn evaluate(spec: &ExperimentSpec, p_c: f64, p_avg: f64, k: usize, mode: Mode) -> Result<SweepPoint> {
    let config = spec.point_config(p_c, p_avg, k)?;
    let (sum_rate, jain, avg_bs_power) =
        run_point(&config, mode, spec.epochs, &spec.seeds, spec.gamma0, spec.step_rule)?;
    Ok(SweepPoint {
        p_c,
        p_avg: config.p_avg,
        k,
        mode,
        sum_rate,
        jain,
        avg_bs_power,
    })
}

/// Circuit-power sweep as CSV text.
pub fn run_fig1_experiment(spec: &ExperimentSpec) -> Result<String> {
    if spec.sweep != SweepVariable::CircuitPower {
        return Err(Error::config("sweep", "expected a p_c sweep"));
    }
    let rows = run_experiment(spec)?;
    let mut out = Vec::new();
    write_csv(&mut out, spec.sweep, &rows)?;
    Ok(String::from_utf8(out).expect("csv is ascii"))
}

/// Budget sweep as CSV text.
pub fn run_fig2_experiment(spec: &ExperimentSpec) -> Result<String> {
    if spec.sweep != SweepVariable::AveragePower {
        return Err(Error::config("sweep", "expected a P_avg sweep"));
    }
    let rows = run_experiment(spec)?;
    let mut out = Vec::new();
    write_csv(&mut out, spec.sweep, &rows)?;
    Ok(String::from_utf8(out).expect("csv is ascii"))
}

pub fn write_csv<W: Write>(mut w: W, sweep: SweepVariable, rows: &[SweepPoint]) -> Result<()> {
    match sweep {
        SweepVariable::CircuitPower => {
            writeln!(w, "{CIRCUIT_POWER_HEADER}")?;
            for r in rows {
                writeln!(
                    w,
                    "{:e},{},{},{:.10},{:.10}",
                    r.p_c, r.k, r.mode, r.sum_rate, r.jain
                )?;
            }
        }
        SweepVariable::AveragePower => {
            writeln!(w, "{BUDGET_HEADER}")?;
            for r in rows {
                writeln!(
                    w,
                    "{},{:e},{},{},{:.10},{:.10}",
                    r.p_avg, r.p_c, r.k, r.mode, r.sum_rate, r.jain
                )?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(mut spec: ExperimentSpec) -> ExperimentSpec {
        spec.epochs = 300;
        spec.seeds = vec![1, 2];
        spec
    }

    #[test]
    fn validation_names_the_field() {
        let field = |spec: &ExperimentSpec| match spec.validate() {
            Err(Error::InvalidConfig { field, .. }) => field,
            other => panic!("expected a config error, got {other:?}"),
        };
        let mut s = ExperimentSpec::circuit_power_sweep();
        s.modes.clear();
        assert_eq!(field(&s), "modes");
        let mut s = ExperimentSpec::circuit_power_sweep();
        s.values = vec![0.0, 2e-5, 1e-5];
        assert_eq!(field(&s), "values");
        s.values.clear();
        assert_eq!(field(&s), "values");
        let mut s = ExperimentSpec::circuit_power_sweep();
        s.user_counts = vec![6];
        assert_eq!(field(&s), "K");
        let mut s = ExperimentSpec::budget_sweep();
        s.base.distances[1] = 12.0;
        assert_eq!(field(&s), "distances");
        let mut s = ExperimentSpec::circuit_power_sweep();
        s.values = vec![-1e-5, 0.0];
        assert_eq!(field(&s), "p_c");
        assert!(ExperimentSpec::circuit_power_sweep().validate().is_ok());
        assert!(ExperimentSpec::budget_sweep().validate().is_ok());
    }

    #[test]
    fn budget_sweep_ties_peak_power() {
        let s = ExperimentSpec::budget_sweep();
        let c = s.point_config(1e-5, 0.5, 3).unwrap();
        assert_eq!(c.p_max, 2.5);
        assert_eq!(c.p_c, 1e-5);
        assert_eq!(c.distances, vec![10.0; 3]);
        let s = ExperimentSpec::circuit_power_sweep();
        let c = s.point_config(2e-5, 1.0, 3).unwrap();
        assert_eq!((c.p_avg, c.p_max), (1.0, 5.0));
        assert_eq!(c.distances, vec![10.0, 12.5, 15.0]);
    }

    #[test]
    fn csv_layout_and_determinism() {
        let mut s = small(ExperimentSpec::circuit_power_sweep());
        s.values = vec![0.0, 1e-5];
        let a = run_fig1_experiment(&s).unwrap();
        let lines: Vec<&str> = a.lines().collect();
        assert_eq!(lines[0], CIRCUIT_POWER_HEADER);
        assert_eq!(lines.len(), 1 + 2 * 2 * 2);
        assert!(lines[1].starts_with("0e0,3,pf,"));
        assert_eq!(a, run_fig1_experiment(&s).unwrap());

        let mut s = small(ExperimentSpec::budget_sweep());
        s.values = vec![0.5, 1.0];
        s.curves = vec![1e-5];
        s.user_counts = vec![2];
        let b = run_fig2_experiment(&s).unwrap();
        let lines: Vec<&str> = b.lines().collect();
        assert_eq!(lines[0], BUDGET_HEADER);
        assert_eq!(lines.len(), 1 + 2 * 2);
        assert!(lines[1].starts_with("0.5,1e-5,2,pf,"));
        assert!(run_fig1_experiment(&s).is_err());
    }

    #[test]
    fn row_reproducible_from_its_parameters() {
        let mut s = small(ExperimentSpec::budget_sweep());
        s.values = vec![0.5, 1.0];
        s.curves = vec![2e-5];
        s.user_counts = vec![3];
        s.modes = vec![Mode::MaxSumRate];
        let rows = run_experiment(&s).unwrap();
        let row = &rows[1];
        let config = s.point_config(row.p_c, row.p_avg, row.k).unwrap();
        let mut sum = 0.0;
        for &seed in &s.seeds {
            let r = crate::protocol::run_with(
                &config,
                s.epochs,
                seed,
                row.mode,
                default_gamma0(&config),
                false,
            )
            .unwrap();
            sum += r.sum_rate;
        }
        assert!((sum / s.seeds.len() as f64 - row.sum_rate).abs() < 1e-15);
    }

    #[test]
    fn spec_from_file() {
        let kv = KeyValues::parse(
            "name = quick\nvalues = 0.5, 1\np_c = 0, 1e-5\nK = 2\nmodes = maxsum\n\
             epochs = 50\nseeds = 7\ndistances = 8, 8, 8\n",
        )
        .unwrap();
        let s = ExperimentSpec::from_key_values(ExperimentSpec::budget_sweep(), &kv).unwrap();
        assert_eq!(s.name, "quick");
        assert_eq!(s.curves, vec![0.0, 1e-5]);
        assert_eq!(s.user_counts, vec![2]);
        assert_eq!(s.modes, vec![Mode::MaxSumRate]);
        assert_eq!(s.seeds, vec![7]);
        assert_eq!(s.base.distances, vec![8.0; 3]);

        let kv = KeyValues::parse("P_avg = 2\n").unwrap();
        let s = ExperimentSpec::from_key_values(ExperimentSpec::circuit_power_sweep(), &kv)
            .unwrap();
        assert_eq!((s.base.p_avg, s.base.p_max), (2.0, 10.0));
        assert_eq!(s.base.distances, REFERENCE_DISTANCES.to_vec());

        let kv = KeyValues::parse("modes = \n").unwrap();
        assert!(ExperimentSpec::from_key_values(ExperimentSpec::budget_sweep(), &kv).is_err());
        let kv = KeyValues::parse("speed = 3\n").unwrap();
        assert!(ExperimentSpec::from_key_values(ExperimentSpec::budget_sweep(), &kv).is_err());
    }
}
