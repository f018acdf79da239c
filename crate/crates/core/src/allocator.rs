//! Closed-form per-epoch allocation of BS power and EH/IT time fractions.
//!
//! For a fixed dual price `lambda` on the average BS power and per-user
//! weights `1 / R_k`, the per-epoch problem has a bang-bang solution: the BS
//! either stays silent or broadcasts at `P_max`. In the latter case the
//! auxiliary SNR terms `z_k = a_k P_max tau_0 / tau_k` solve
//!
//! ```text
//! ln(1 - c_k + z_k) - z_k / (1 - c_k + z_k) = beta P_max R_k,   c_k = p_c x_k
//! ```
//!
//! which is inverted with the principal Lambert-W branch, and `beta` is the
//! root of
//!
//! ```text
//! g(beta) = sum_k a_k / (R_k (1 - c_k + z_k(beta))) - lambda - beta.
//! ```
//!
//! The BS transmits iff `g(0) > 0`. Lagrangian quantities are in nats; rates
//! are reported in bits.

use std::f64::consts::LN_2;

use crate::channel::{ChannelState, NetworkConfig};
use crate::error::{Error, Result};
use crate::special::{
    find_root_decreasing, find_root_decreasing_newton, lambert_w0, DEFAULT_ROOT_TOL,
};

/// Below this `|1 - c|` the Lambert-W form is replaced by its `c -> 1` limit.
pub const SINGULAR_C_TOL: f64 = 1e-9;

/// Per-epoch decision and the energy/rate bookkeeping that follows from it.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochAllocation {
    /// BS power, either 0 or `P_max` (W).
    pub p0: f64,
    /// EH phase fraction.
    pub tau0: f64,
    /// IT phase fractions.
    pub tau: Vec<f64>,
    /// `p0 * tau0` (W).
    pub e: f64,
    /// Harvested energy `E_k` (J).
    pub harvested: Vec<f64>,
    /// EHU transmit power `P_k` (W).
    pub tx_power: Vec<f64>,
    /// EHU total consumption including circuit power (W).
    pub consumed_power: Vec<f64>,
    /// Rate `tau_k log2(1 + P_k x_k)`.
    pub rate: Vec<f64>,
}

impl EpochAllocation {
    pub fn silent(k: usize) -> Self {
        EpochAllocation {
            p0: 0.0,
            tau0: 0.0,
            tau: vec![0.0; k],
            e: 0.0,
            harvested: vec![0.0; k],
            tx_power: vec![0.0; k],
            consumed_power: vec![0.0; k],
            rate: vec![0.0; k],
        }
    }

    pub fn transmits(&self) -> bool {
        self.p0 > 0.0
    }

    pub fn sum_rate(&self) -> f64 {
        self.rate.iter().sum()
    }

    /// Per-epoch Lagrangian `sum_k tau_k ln(1 + P_k x_k) / R_k - lambda e`.
    pub fn lagrangian(&self, rbar: &[f64], lambda: f64) -> f64 {
        let utility: f64 = self
            .rate
            .iter()
            .zip(rbar)
            .map(|(r, w)| r * LN_2 / w)
            .sum();
        utility - lambda * self.e
    }
}

/// Intermediate quantities of one allocation, kept for KKT auditing.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocatorWorkspace {
    /// `c_k = p_c x_k`.
    pub circuit: Vec<f64>,
    /// `z_k` at the chosen `beta` (at `beta = 0` for a silent epoch).
    pub z: Vec<f64>,
    pub beta: f64,
    /// `beta * P_max`.
    pub mu: f64,
    /// `sum_k a_k / (R_k (1 - c_k + z_k(0)))`, compared against `lambda`.
    pub condition_value: f64,
}

/// Solves `ln(1 - c + z) - z / (1 - c + z) = b` for the root with
/// `1 - c + z >= max(1 - c, 0)`, i.e. `z = -(1-c) [1 + 1 / W0(-(1-c) e^{-1-b})]`.
pub fn solve_z(c: f64, b: f64) -> Result<f64> {
    if !(c >= 0.0 && c.is_finite()) || !(b >= 0.0 && b.is_finite()) {
        return Err(Error::NonFinite { at: b });
    }
    let d = 1.0 - c;
    if d.abs() < SINGULAR_C_TOL {
        return Ok((1.0 + b).exp() - d);
    }
    let w = lambert_w0(-d * (-1.0 - b).exp())?;
    // 1 - c + z = -d / w
    Ok(-d / w - d)
}

/// Left side minus right side of the z-equation.
pub fn z_equation_residual(c: f64, z: f64, b: f64) -> f64 {
    let u = 1.0 - c + z;
    u.ln() - z / u - b
}

/// Root `beta > 0` of `g`, or `None` when `g(0) <= 0` and the BS stays silent.
///
/// Uses the closed-form slope `g'(beta) = -1 - sum_k a_k P_max / z_k` for
/// bracketed Newton steps; [`solve_beta_bisection`] is the derivative-free
/// route to the same root.
pub fn solve_beta(
    a: &[f64],
    c: &[f64],
    rbar: &[f64],
    lambda: f64,
    p_max: f64,
) -> Result<Option<f64>> {
    let mut failure = None;
    let g = |beta: f64| -> (f64, f64) {
        let mut s = 0.0;
        let mut slope = -1.0;
        for k in 0..a.len() {
            if a[k] == 0.0 {
                continue;
            }
            match solve_z(c[k], beta * p_max * rbar[k]) {
                Ok(z) => {
                    s += a[k] / (rbar[k] * (1.0 - c[k] + z));
                    slope -= a[k] * p_max / z;
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    return (f64::NAN, f64::NAN);
                }
            }
        }
        (s - lambda - beta, slope)
    };
    let root = find_root_decreasing_newton(g, DEFAULT_ROOT_TOL);
    match failure {
        Some(e) => Err(e),
        None => root,
    }
}

/// [`solve_beta`] by plain bracketing and bisection.
pub fn solve_beta_bisection(
    a: &[f64],
    c: &[f64],
    rbar: &[f64],
    lambda: f64,
    p_max: f64,
) -> Result<Option<f64>> {
    let mut failure = None;
    let g = |beta: f64| -> f64 {
        match weighted_marginal(a, c, rbar, beta, p_max) {
            Ok(s) => s - lambda - beta,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        }
    };
    let root = find_root_decreasing(g, DEFAULT_ROOT_TOL);
    match failure {
        Some(e) => Err(e),
        None => root,
    }
}

/// `sum_k a_k / (R_k (1 - c_k + z_k(beta)))`.
pub fn weighted_marginal(a: &[f64], c: &[f64], rbar: &[f64], beta: f64, p_max: f64) -> Result<f64> {
    let mut s = 0.0;
    for k in 0..a.len() {
        if a[k] > 0.0 {
            let z = solve_z(c[k], beta * p_max * rbar[k])?;
            s += a[k] / (rbar[k] * (1.0 - c[k] + z));
        }
    }
    Ok(s)
}

/// Optimal allocation for one epoch given `lambda` and rate weights `rbar`.
pub fn allocate_epoch(
    channel: &ChannelState,
    config: &NetworkConfig,
    lambda: f64,
    rbar: &[f64],
) -> Result<(EpochAllocation, AllocatorWorkspace)> {
    let k = channel.num_users();
    debug_assert_eq!(rbar.len(), k);
    let c: Vec<f64> = channel.gains.iter().map(|x| config.p_c * x).collect();
    let a = &channel.a;
    let p_max = config.p_max;

    let condition_value = weighted_marginal(a, &c, rbar, 0.0, p_max)?;
    let beta = if condition_value > lambda {
        solve_beta(a, &c, rbar, lambda, p_max)?
    } else {
        None
    };

    let Some(beta) = beta else {
        let z = c
            .iter()
            .map(|&ck| solve_z(ck, 0.0))
            .collect::<Result<Vec<_>>>()?;
        let ws = AllocatorWorkspace {
            circuit: c,
            z,
            beta: 0.0,
            mu: 0.0,
            condition_value,
        };
        return Ok((EpochAllocation::silent(k), ws));
    };

    let mut z = Vec::with_capacity(k);
    for user in 0..k {
        let zk = solve_z(c[user], beta * p_max * rbar[user])?;
        if a[user] > 0.0 && zk <= c[user] {
            return Err(Error::PositivityViolated {
                user,
                z: zk,
                c: c[user],
            });
        }
        z.push(zk);
    }

    // demand_k = a_k P_max / z_k; zero-gain users get no IT phase
    let demand: Vec<f64> = (0..k)
        .map(|u| if a[u] > 0.0 { a[u] * p_max / z[u] } else { 0.0 })
        .collect();
    let tau0 = 1.0 / (1.0 + demand.iter().sum::<f64>());
    let tau: Vec<f64> = demand.iter().map(|d| d * tau0).collect();

    let alloc = account(channel, config, p_max, tau0, tau);
    let ws = AllocatorWorkspace {
        circuit: c,
        z,
        beta,
        mu: beta * p_max,
        condition_value,
    };
    Ok((alloc, ws))
}

/// Max-sum-rate allocation: [`allocate_epoch`] with unit weights.
pub fn allocate_epoch_maxsum(
    channel: &ChannelState,
    config: &NetworkConfig,
    lambda: f64,
) -> Result<(EpochAllocation, AllocatorWorkspace)> {
    allocate_epoch(channel, config, lambda, &vec![1.0; channel.num_users()])
}

/// Energy, power and rate bookkeeping for a harvest-then-transmit epoch.
pub fn account(
    channel: &ChannelState,
    config: &NetworkConfig,
    p0: f64,
    tau0: f64,
    tau: Vec<f64>,
) -> EpochAllocation {
    let t = config.epoch_duration;
    let k = channel.num_users();
    let mut harvested = Vec::with_capacity(k);
    let mut tx_power = Vec::with_capacity(k);
    let mut consumed_power = Vec::with_capacity(k);
    let mut rate = Vec::with_capacity(k);
    for u in 0..k {
        let x = channel.gains[u];
        let energy = config.eta[u] * x * config.n0 * p0 * tau0 * t;
        let p = if tau[u] > 0.0 {
            (energy / (tau[u] * t) - config.p_c).max(0.0)
        } else {
            0.0
        };
        harvested.push(energy);
        tx_power.push(p);
        consumed_power.push(if p > 0.0 { p + config.p_c } else { 0.0 });
        rate.push(tau[u] * (p * x).ln_1p() / LN_2);
    }
    EpochAllocation {
        p0,
        tau0,
        tau,
        e: p0 * tau0,
        harvested,
        tx_power,
        consumed_power,
        rate,
    }
}

/// Stationarity residuals of a transmit-mode allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct KktReport {
    /// d/de: `sum_k a_k / (R_k (1 - c_k + z_k)) - lambda - beta` (alpha = 0).
    pub stationarity_e: f64,
    /// d/dtau_k: `ln(1 - c_k + z_k) - z_k / (1 - c_k + z_k) - R_k mu`, with
    /// `z_k = a_k e / tau_k` rebuilt from the allocation. Users without an IT
    /// phase report 0.
    pub stationarity_tau: Vec<f64>,
    /// d/dtau_0: `beta P_max - mu`.
    pub stationarity_tau0: f64,
    /// z-equation residual for the workspace `z_k`.
    pub z_equation: Vec<f64>,
}

impl KktReport {
    pub fn max_abs(&self) -> f64 {
        self.stationarity_tau
            .iter()
            .chain(&self.z_equation)
            .chain([&self.stationarity_e, &self.stationarity_tau0])
            .fold(0.0, |m, r| m.max(r.abs()))
    }
}

/// KKT residuals of a transmit-mode allocation; `None` for silent epochs.
pub fn verify_kkt(
    alloc: &EpochAllocation,
    ws: &AllocatorWorkspace,
    channel: &ChannelState,
    config: &NetworkConfig,
    lambda: f64,
    rbar: &[f64],
) -> Option<KktReport> {
    if !alloc.transmits() {
        return None;
    }
    let k = channel.num_users();
    let mut marginal = 0.0;
    let mut stationarity_tau = vec![0.0; k];
    let mut z_equation = vec![0.0; k];
    for u in 0..k {
        let a = channel.a[u];
        let c = ws.circuit[u];
        z_equation[u] = z_equation_residual(c, ws.z[u], ws.beta * config.p_max * rbar[u]);
        if a == 0.0 || alloc.tau[u] == 0.0 {
            continue;
        }
        let z = a * alloc.e / alloc.tau[u];
        let inner = 1.0 - c + z;
        marginal += a / (rbar[u] * inner);
        stationarity_tau[u] = inner.ln() - z / inner - rbar[u] * ws.mu;
    }
    Some(KktReport {
        stationarity_e: marginal - lambda - ws.beta,
        stationarity_tau,
        stationarity_tau0: ws.beta * config.p_max - ws.mu,
        z_equation,
    })
}
