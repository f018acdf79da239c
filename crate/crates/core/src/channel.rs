//! Network parameters and i.i.d. Rayleigh block-fading channel realizations.

use std::io::{BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};

/// EHU distances (m) of the five-user reference deployment.
pub const REFERENCE_DISTANCES: [f64; 5] = [10.0, 12.5, 15.0, 17.0, 18.8];

/// Static parameters shared by every epoch of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    /// RF-to-DC conversion efficiency per EHU.
    pub eta: Vec<f64>,
    /// Circuit power drawn by a transmitting EHU (W).
    pub p_c: f64,
    /// Peak BS transmit power (W).
    pub p_max: f64,
    /// Average BS power budget (W).
    pub p_avg: f64,
    /// AWGN power (W).
    pub n0: f64,
    /// Epoch duration (s).
    pub epoch_duration: f64,
    /// BS-to-EHU distances (m).
    pub distances: Vec<f64>,
    pub path_loss_exponent: f64,
    /// Linear path loss at 1 m.
    pub ref_loss: f64,
}

impl NetworkConfig {
    pub const DEFAULT_ETA: f64 = 0.5;

    /// The reference deployment: the first `k` of [`REFERENCE_DISTANCES`],
    /// `P_avg = 1 W`, `P_max = 5 P_avg`, `N0 = 1e-12 W`, 30 dB loss at 1 m,
    /// exponent 3, `T = 1 s`, `eta = 0.5`, no circuit power.
    pub fn reference(k: usize) -> Result<Self> {
        if k == 0 || k > REFERENCE_DISTANCES.len() {
            return Err(Error::config("K", format!("must be in 1..=5, got {k}")));
        }
        Ok(Self::with_distances(REFERENCE_DISTANCES[..k].to_vec()))
    }

    /// `k` users all at distance `d` with otherwise reference parameters.
    pub fn equal_distance(k: usize, d: f64) -> Self {
        Self::with_distances(vec![d; k])
    }

    pub fn with_distances(distances: Vec<f64>) -> Self {
        let k = distances.len();
        NetworkConfig {
            eta: vec![Self::DEFAULT_ETA; k],
            p_c: 0.0,
            p_max: 5.0,
            p_avg: 1.0,
            n0: 1e-12,
            epoch_duration: 1.0,
            distances,
            path_loss_exponent: 3.0,
            ref_loss: 1e-3,
        }
    }

    pub fn num_users(&self) -> usize {
        self.distances.len()
    }

    /// Keeps only the first `k` users.
    pub fn truncated(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.num_users() {
            return Err(Error::config(
                "K",
                format!("must be in 1..={}, got {k}", self.num_users()),
            ));
        }
        let mut c = self.clone();
        c.distances.truncate(k);
        c.eta.truncate(k);
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.num_users();
        if k == 0 {
            return Err(Error::config("distances", "at least one EHU is required"));
        }
        if self.eta.len() != k {
            return Err(Error::config(
                "eta",
                format!("{} entries for {k} users", self.eta.len()),
            ));
        }
        if let Some(e) = self.eta.iter().find(|&&e| !(e > 0.0 && e <= 1.0)) {
            return Err(Error::config("eta", format!("{e} not in (0, 1]")));
        }
        if let Some(d) = self.distances.iter().find(|&&d| !(d > 0.0 && d.is_finite())) {
            return Err(Error::config("distances", format!("{d} must be positive")));
        }
        if !(self.p_c >= 0.0 && self.p_c.is_finite()) {
            return Err(Error::config("p_c", "must be non-negative"));
        }
        if !(self.p_avg > 0.0) {
            return Err(Error::config("P_avg", "must be positive"));
        }
        if !(self.p_max >= self.p_avg && self.p_max.is_finite()) {
            return Err(Error::config("P_max", "must satisfy P_max >= P_avg"));
        }
        if !(self.n0 > 0.0) {
            return Err(Error::config("N0", "must be positive"));
        }
        if !(self.epoch_duration > 0.0) {
            return Err(Error::config("T", "must be positive"));
        }
        if !(self.ref_loss > 0.0) {
            return Err(Error::config("ref_loss", "must be positive"));
        }
        if !self.path_loss_exponent.is_finite() {
            return Err(Error::config("alpha", "must be finite"));
        }
        Ok(())
    }
}

/// Mean normalized power gain `ref_loss * D_k^-alpha / N0` of user `k`.
pub fn mean_gain(config: &NetworkConfig, k: usize) -> f64 {
    config.ref_loss * config.distances[k].powf(-config.path_loss_exponent) / config.n0
}

/// Normalized fading gains of one epoch and the derived `a_k = eta_k N0 x_k^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    pub epoch: u64,
    pub gains: Vec<f64>,
    pub a: Vec<f64>,
}

impl ChannelState {
    pub fn new(epoch: u64, gains: Vec<f64>, config: &NetworkConfig) -> Result<Self> {
        if gains.len() != config.num_users() {
            return Err(Error::config(
                "gains",
                format!("{} gains for {} users", gains.len(), config.num_users()),
            ));
        }
        if let Some(x) = gains.iter().find(|&&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::config("gains", format!("{x} is not a valid power gain")));
        }
        let a = gains
            .iter()
            .zip(&config.eta)
            .map(|(&x, &eta)| eta * config.n0 * x * x)
            .collect();
        Ok(ChannelState { epoch, gains, a })
    }

    pub fn num_users(&self) -> usize {
        self.gains.len()
    }
}

/// Rayleigh block fading: each epoch's gains are exponential with mean
/// [`mean_gain`], drawn from ChaCha8 keyed by `seed` on stream `epoch`, so
/// any epoch can be regenerated on its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelModel {
    pub seed: u64,
}

impl ChannelModel {
    pub fn new(seed: u64) -> Self {
        ChannelModel { seed }
    }

    pub fn sample_epoch(&self, config: &NetworkConfig, epoch: u64) -> ChannelState {
        sample_epoch(self.seed, config, epoch)
    }

    /// Epochs `1..=m`.
    pub fn trace(&self, config: &NetworkConfig, m: u64) -> Vec<ChannelState> {
        (1..=m).map(|i| self.sample_epoch(config, i)).collect()
    }
}

pub fn sample_epoch(seed: u64, config: &NetworkConfig, epoch: u64) -> ChannelState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(epoch);
    let gains: Vec<f64> = (0..config.num_users())
        .map(|k| {
            let unit: f64 = Exp1.sample(&mut rng);
            unit * mean_gain(config, k)
        })
        .collect();
    let a = gains
        .iter()
        .zip(&config.eta)
        .map(|(&x, &eta)| eta * config.n0 * x * x)
        .collect();
    ChannelState { epoch, gains, a }
}

/// Writes `epoch,x_1,...,x_K` with 17 significant digits.
pub fn write_trace_csv<W: Write>(mut w: W, trace: &[ChannelState]) -> Result<()> {
    let k = trace.first().map_or(0, ChannelState::num_users);
    write!(w, "epoch")?;
    for i in 1..=k {
        write!(w, ",x_{i}")?;
    }
    writeln!(w)?;
    for s in trace {
        write!(w, "{}", s.epoch)?;
        for x in &s.gains {
            write!(w, ",{x:.16e}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_trace_csv<R: BufRead>(r: R, config: &NetworkConfig) -> Result<Vec<ChannelState>> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Csv("empty channel trace".into()))??;
    let cols: Vec<&str> = header.trim().split(',').collect();
    let k = config.num_users();
    let expected: Vec<String> = std::iter::once("epoch".to_string())
        .chain((1..=k).map(|i| format!("x_{i}")))
        .collect();
    if cols != expected {
        return Err(Error::Csv(format!(
            "header `{}` does not match {} users",
            header.trim(),
            k
        )));
    }
    let mut out = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = n + 2;
        let mut fields = line.trim().split(',');
        let epoch = fields
            .next()
            .and_then(|s| s.parse::<u64>().ok())
            .ok_or(Error::Parse {
                line: lineno,
                reason: "bad epoch index".into(),
            })?;
        let gains = fields
            .map(|s| {
                s.parse::<f64>().map_err(|e| Error::Parse {
                    line: lineno,
                    reason: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(ChannelState::new(epoch, gains, config)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_gain_values() {
        let c = NetworkConfig::with_distances(vec![10.0, 1.0, 18.8]);
        assert!((mean_gain(&c, 0) - 1e6).abs() < 1e-6);
        assert!((mean_gain(&c, 1) - 1e9).abs() < 1e-3);
        // 1e9 / 18.8^3
        assert!((mean_gain(&c, 2) - 150_496.518_1).abs() < 0.01);
    }

    #[test]
    fn deterministic_and_epoch_addressable() {
        let c = NetworkConfig::reference(5).unwrap();
        let m = ChannelModel::new(42);
        let trace = m.trace(&c, 20);
        assert_eq!(trace[6], m.sample_epoch(&c, 7));
        assert_eq!(trace[6], sample_epoch(42, &c, 7));
        assert_ne!(trace[6].gains, trace[7].gains);
        assert_ne!(sample_epoch(1, &c, 2).gains, sample_epoch(2, &c, 1).gains);
        assert_ne!(sample_epoch(1, &c, 3).gains, sample_epoch(3, &c, 1).gains);
    }

    #[test]
    fn derived_coefficients_exact() {
        let c = NetworkConfig::reference(3).unwrap();
        let s = sample_epoch(3, &c, 1);
        for k in 0..3 {
            assert_eq!(s.a[k], c.eta[k] * c.n0 * s.gains[k] * s.gains[k]);
            assert!(s.gains[k] >= 0.0);
        }
    }

    #[test]
    fn sample_mean_matches_path_loss() {
        let c = NetworkConfig::equal_distance(1, 10.0);
        let n = 1_000_000u64;
        let m = ChannelModel::new(7);
        let mean = (1..=n).map(|i| m.sample_epoch(&c, i).gains[0]).sum::<f64>() / n as f64;
        assert!((mean / 1e6 - 1.0).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn exponential_moments_and_independence() {
        let c = NetworkConfig::reference(5).unwrap();
        let m = ChannelModel::new(11);
        let n = 100_000u64;
        let trace = m.trace(&c, n);
        let mut means = [0.0; 5];
        for s in &trace {
            for k in 0..5 {
                means[k] += s.gains[k] / n as f64;
            }
        }
        for k in 0..5 {
            let omega = mean_gain(&c, k);
            let var = trace.iter().map(|s| (s.gains[k] - means[k]).powi(2)).sum::<f64>() / n as f64;
            assert!((means[k] / omega - 1.0).abs() < 0.03);
            assert!((var / (omega * omega) - 1.0).abs() < 0.03);
        }
        // ordering by distance
        assert!(means.windows(2).all(|w| w[0] > w[1]));

        let corr = |xs: &[f64], ys: &[f64]| {
            let mx = xs.iter().sum::<f64>() / xs.len() as f64;
            let my = ys.iter().sum::<f64>() / ys.len() as f64;
            let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
            let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
            let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
            cov / (vx * vy).sqrt()
        };
        let u0: Vec<f64> = trace.iter().map(|s| s.gains[0]).collect();
        let u1: Vec<f64> = trace.iter().map(|s| s.gains[1]).collect();
        let lagged: Vec<f64> = trace.iter().skip(1).map(|s| s.gains[0]).collect();
        assert!(corr(&u0, &u1).abs() < 0.01);
        assert!(corr(&u0[..u0.len() - 1], &lagged).abs() < 0.01);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let c = NetworkConfig::reference(4).unwrap();
        let trace = ChannelModel::new(5).trace(&c, 50);
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &trace).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("epoch,x_1,x_2,x_3,x_4\n"));
        let back = read_trace_csv(&buf[..], &c).unwrap();
        assert_eq!(back, trace);
    }

    #[test]
    fn csv_rejects_wrong_width() {
        let c = NetworkConfig::reference(2).unwrap();
        let text = "epoch,x_1,x_2\n1,1.0\n";
        assert!(read_trace_csv(text.as_bytes(), &c).is_err());
        let text = "epoch,x_1\n1,1.0\n";
        assert!(matches!(read_trace_csv(text.as_bytes(), &c), Err(Error::Csv(_))));
    }

    #[test]
    fn validation() {
        let mut c = NetworkConfig::reference(5).unwrap();
        assert!(c.validate().is_ok());
        c.p_avg = 6.0;
        assert!(matches!(c.validate(), Err(Error::InvalidConfig { field, .. }) if field == "P_max"));
        let mut c = NetworkConfig::reference(2).unwrap();
        c.eta[1] = 1.5;
        assert!(c.validate().is_err());
        assert!(NetworkConfig::reference(6).is_err());
    }
}
