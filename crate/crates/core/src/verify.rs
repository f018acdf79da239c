//! Randomized verification suites over the closed-form allocator.
//!
//! Each suite draws its own instances from a seed, so a failing instance
//! can be replayed by index.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::allocator::{allocate_epoch, verify_kkt};
use crate::channel::{ChannelModel, ChannelState, NetworkConfig};
use crate::error::Result;
use crate::oracle::{grid_search_epoch, verify_concavity_samples, GridSpec};

pub const KKT_TOL: f64 = 1e-8;
pub const ORACLE_REL_TOL: f64 = 1e-4;
pub const ORACLE_CIRCUIT_POWERS: [f64; 3] = [0.0, 1e-5, 1e-4];

/// One per-epoch problem: network, fading, price and rate weights.
#[derive(Debug, Clone)]
pub struct Instance {
    pub config: NetworkConfig,
    pub channel: ChannelState,
    pub lambda: f64,
    pub rbar: Vec<f64>,
}

fn weights(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    (0..k).map(|_| 10f64.powf(rng.random_range(-0.5..0.5))).collect()
}

/// Reference-deployment instances with the price drawn log-uniformly over
/// two decades centred on `sum_k a_k / R_k`.
pub fn oracle_instances(n: usize, seed: u64) -> Result<Vec<Instance>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = ChannelModel::new(seed);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let k = 1 + i % 3;
        let mut config = NetworkConfig::reference(k)?;
        config.p_c = ORACLE_CIRCUIT_POWERS[(i / 3) % ORACLE_CIRCUIT_POWERS.len()];
        let channel = model.sample_epoch(&config, i as u64 + 1);
        let rbar = weights(&mut rng, k);
        let scale: f64 = channel.a.iter().zip(&rbar).map(|(a, r)| a / r).sum();
        let lambda = scale * 10f64.powf(rng.random_range(-1.0..1.0));
        out.push(Instance {
            config,
            channel,
            lambda,
            rbar,
        });
    }
    Ok(out)
}

/// Five-user reference instances whose price lies strictly below the
/// switching threshold, so the BS transmits.
pub fn transmit_instances(n: usize, seed: u64) -> Result<Vec<Instance>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = ChannelModel::new(seed);
    let circuit = [0.0, 1e-5, 2e-5, 5e-5];
    let mut out = Vec::with_capacity(n);
    let mut epoch = 0u64;
    while out.len() < n {
        epoch += 1;
        let mut config = NetworkConfig::reference(5)?;
        config.p_c = circuit[out.len() % circuit.len()];
        let channel = model.sample_epoch(&config, epoch);
        let rbar = weights(&mut rng, 5);
        let (_, ws) = allocate_epoch(&channel, &config, f64::INFINITY, &rbar)?;
        if !(ws.condition_value > 0.0) {
            continue;
        }
        let lambda = ws.condition_value * rng.random_range(0.01..0.99);
        out.push(Instance {
            config,
            channel,
            lambda,
            rbar,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KktSuiteReport {
    pub checked: usize,
    pub failures: usize,
    pub worst_residual: f64,
}

impl KktSuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

pub fn kkt_suite(instances: &[Instance]) -> Result<KktSuiteReport> {
    let mut report = KktSuiteReport {
        checked: 0,
        failures: 0,
        worst_residual: 0.0,
    };
    for inst in instances {
        let (alloc, ws) = allocate_epoch(&inst.channel, &inst.config, inst.lambda, &inst.rbar)?;
        report.checked += 1;
        match verify_kkt(&alloc, &ws, &inst.channel, &inst.config, inst.lambda, &inst.rbar) {
            Some(kkt) => {
                let r = kkt.max_abs();
                report.worst_residual = report.worst_residual.max(r);
                if !(r <= KKT_TOL) {
                    report.failures += 1;
                }
            }
            None => report.failures += 1,
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSuiteReport {
    pub instances: usize,
    pub transmitting: usize,
    /// Instances where the closed form and the grid optimum differ by more
    /// than the relative tolerance.
    pub mismatches: Vec<usize>,
    /// Instances whose grid maximizer spends strictly inside `(0, P_max tau_0)`.
    pub interior: Vec<usize>,
    pub worst_rel_gap: f64,
}

impl OracleSuiteReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.interior.is_empty()
    }
}

/// Closed form against grid search: `|L_closed - L_grid| <= tol |L_closed|`
/// and a bang-bang grid maximizer on every instance.
pub fn oracle_suite(instances: &[Instance], grid: &GridSpec) -> Result<OracleSuiteReport> {
    let mut report = OracleSuiteReport {
        instances: instances.len(),
        transmitting: 0,
        mismatches: Vec::new(),
        interior: Vec::new(),
        worst_rel_gap: 0.0,
    };
    for (i, inst) in instances.iter().enumerate() {
        let (alloc, _) = allocate_epoch(&inst.channel, &inst.config, inst.lambda, &inst.rbar)?;
        if alloc.transmits() {
            report.transmitting += 1;
        }
        let closed = alloc.lagrangian(&inst.rbar, inst.lambda);
        let grid_best = grid_search_epoch(&inst.channel, &inst.config, inst.lambda, &inst.rbar, grid)?;
        let diff = (closed - grid_best.best_objective).abs();
        let rel = if closed != 0.0 { diff / closed.abs() } else { diff };
        report.worst_rel_gap = report.worst_rel_gap.max(rel);
        if !(rel <= ORACLE_REL_TOL) {
            report.mismatches.push(i);
        }
        if !grid_best.e_on_boundary() {
            report.interior.push(i);
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcavitySuiteReport {
    pub instances: usize,
    pub pairs: usize,
    pub violations: usize,
    pub worst_gap: f64,
}

/// Midpoint-concavity audit on `instances` random networks of one to five
/// reference users.
pub fn concavity_suite(instances: usize, pairs: usize, seed: u64) -> Result<ConcavitySuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = ChannelModel::new(seed);
    let circuit = [0.0, 1e-5, 2e-5, 5e-5, 1e-4];
    let mut report = ConcavitySuiteReport {
        instances,
        pairs: 0,
        violations: 0,
        worst_gap: f64::NEG_INFINITY,
    };
    for i in 0..instances {
        let k = 1 + i % 5;
        let mut config = NetworkConfig::reference(k)?;
        config.p_c = circuit[(i / 5) % circuit.len()];
        let channel = model.sample_epoch(&config, i as u64 + 1);
        let rbar = weights(&mut rng, k);
        let scale: f64 = channel.a.iter().zip(&rbar).map(|(a, r)| a / r).sum();
        let lambda = scale * 10f64.powf(rng.random_range(-1.0..1.0));
        let r = verify_concavity_samples(&channel, &config, lambda, &rbar, pairs, seed + i as u64);
        report.pairs += r.pairs;
        report.violations += r.violations;
        report.worst_gap = report.worst_gap.max(r.worst_gap);
    }
    Ok(report)
}
