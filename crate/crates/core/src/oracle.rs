//! Brute-force checks of the closed-form allocator.
//!
//! Nothing here calls into [`crate::allocator`]: the per-epoch objective is
//! evaluated directly on `(tau_0, tau_1..tau_K, e)` and maximized by grid
//! search with zoom refinement.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::channel::{ChannelState, NetworkConfig};
use crate::error::{Error, Result};

const ZOOM_ROUNDS: usize = 2;
const ZOOM_FACTOR: f64 = 10.0;
/// Window shifts allowed per zoom round when the optimum runs off an edge.
const MAX_RECENTRES: usize = 50;

/// Grid resolution for [`grid_search_epoch`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    /// Points for `tau_0` on `[0, 1]`.
    pub n_tau0: usize,
    /// Points per stick-breaking share of the IT time `1 - tau_0`.
    pub n_simplex: usize,
    /// Points for the spend fraction `e / (P_max tau_0)` on `[0, 1]`.
    pub n_e: usize,
}

impl GridSpec {
    pub const MIN_POINTS: usize = 50;

    pub fn new(n_tau0: usize, n_simplex: usize, n_e: usize) -> Result<Self> {
        let g = GridSpec {
            n_tau0,
            n_simplex,
            n_e,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, n) in [
            ("n_tau0", self.n_tau0),
            ("n_simplex", self.n_simplex),
            ("n_e", self.n_e),
        ] {
            if n < Self::MIN_POINTS {
                return Err(Error::config(name, format!("{n} < {}", Self::MIN_POINTS)));
            }
        }
        Ok(())
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n_tau0: 50,
            n_simplex: 50,
            n_e: 50,
        }
    }
}

/// How user terms with `P_k <= 0` are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Only points where every user with a nonzero gain has `P_k > 0`.
    StrictlyPositive,
    /// Users with `P_k <= 0` contribute zero rate.
    ZeroRate,
}

/// A point of the per-epoch decision space.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochPoint {
    pub tau0: f64,
    pub tau: Vec<f64>,
    pub e: f64,
}

/// Per-epoch objective `sum_k tau_k ln(1 - c_k + a_k e / tau_k) / R_k - lambda e`.
#[derive(Debug, Clone)]
pub struct EpochObjective<'a> {
    a: &'a [f64],
    c: Vec<f64>,
    inv_rbar: Vec<f64>,
    lambda: f64,
    p_max: f64,
}

impl<'a> EpochObjective<'a> {
    pub fn new(channel: &'a ChannelState, config: &NetworkConfig, lambda: f64, rbar: &[f64]) -> Self {
        EpochObjective {
            a: &channel.a,
            c: channel.gains.iter().map(|x| config.p_c * x).collect(),
            inv_rbar: rbar.iter().map(|r| 1.0 / r).collect(),
            lambda,
            p_max: config.p_max,
        }
    }

    pub fn eval(&self, tau: &[f64], e: f64, regime: Regime) -> f64 {
        let mut total = -self.lambda * e;
        for k in 0..self.a.len() {
            if self.a[k] == 0.0 {
                continue;
            }
            let t = tau[k];
            if t <= 0.0 {
                match regime {
                    Regime::StrictlyPositive => return f64::NEG_INFINITY,
                    Regime::ZeroRate => continue,
                }
            }
            let inner = 1.0 - self.c[k] + self.a[k] * e / t;
            if inner > 1.0 {
                total += self.inv_rbar[k] * t * inner.ln();
            } else if regime == Regime::StrictlyPositive {
                return f64::NEG_INFINITY;
            }
        }
        total
    }

    pub fn eval_point(&self, p: &EpochPoint, regime: Regime) -> f64 {
        self.eval(&p.tau, p.e, regime)
    }
}

/// Best point found by [`grid_search_epoch`].
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Best objective over both regimes.
    pub best_objective: f64,
    pub best_point: EpochPoint,
    /// Best value with every active user at `P_k > 0`; `-inf` if none exists.
    pub strict_objective: f64,
    /// Best value when non-positive powers score zero rate.
    pub relaxed_objective: f64,
    /// `e / (P_max tau_0)` at the best point.
    pub e_fraction: f64,
    /// Distance of the best `e` from the nearer of 0 and `P_max tau_0`, in
    /// units of the final grid's resolution in `e`.
    pub e_boundary_cells: f64,
}

impl OracleResult {
    /// Whether the best `e` is within one final grid cell of 0 or `P_max tau_0`.
    pub fn e_on_boundary(&self) -> bool {
        self.e_boundary_cells <= 1.0
    }
}

/// Grid coordinate to unit-interval value. Nodes cluster at both ends so
/// thin feasible slivers next to a face of the box are still sampled.
fn warp(t: f64) -> f64 {
    0.5 * (1.0 - (std::f64::consts::PI * t).cos())
}

/// Unit-box coordinates `(tau_0, s_1..s_{K-1}, f)` to `(tau_0, tau, e)`:
/// the IT time `1 - tau_0` is split by stick-breaking shares and
/// `e = f P_max tau_0`.
fn decode(coords: &[f64], k: usize, p_max: f64, tau: &mut [f64]) -> (f64, f64) {
    let tau0 = warp(coords[0]);
    let mut rest = 1.0 - tau0;
    for (user, t) in tau.iter_mut().enumerate().take(k) {
        if user + 1 == k {
            *t = rest;
        } else {
            *t = rest * warp(coords[1 + user]);
            rest -= *t;
        }
    }
    let f = warp(coords[coords.len() - 1]);
    (tau0, f * tau0 * p_max)
}

#[derive(Debug, Clone, Copy)]
struct Window {
    lo: f64,
    hi: f64,
    n: usize,
}

impl Window {
    fn point(&self, i: usize) -> f64 {
        if self.n == 1 {
            return 0.5 * (self.lo + self.hi);
        }
        self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64
    }

    fn cell(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    fn zoom(&self, center: f64) -> Window {
        self.around(center, 0.5 * (self.hi - self.lo) / ZOOM_FACTOR)
    }

    fn recentre(&self, center: f64) -> Window {
        self.around(center, 0.5 * (self.hi - self.lo))
    }

    fn around(&self, center: f64, half: f64) -> Window {
        let (mut lo, mut hi) = (center - half, center + half);
        if lo < 0.0 {
            hi -= lo;
            lo = 0.0;
        }
        if hi > 1.0 {
            lo -= hi - 1.0;
            hi = 1.0;
        }
        Window {
            lo: lo.max(0.0),
            hi,
            n: self.n,
        }
    }
}

fn search_box(
    obj: &EpochObjective<'_>,
    windows: &[Window],
    k: usize,
    regime: Regime,
) -> (f64, Vec<f64>) {
    let dims = windows.len();
    let mut idx = vec![0usize; dims];
    let mut coords = vec![0.0; dims];
    let mut tau = vec![0.0; k];
    let mut best = (f64::NEG_INFINITY, windows.iter().map(|w| w.point(0)).collect::<Vec<_>>());
    'outer: loop {
        for d in 0..dims {
            coords[d] = windows[d].point(idx[d]);
        }
        let (_, e) = decode(&coords, k, obj.p_max, &mut tau);
        let v = obj.eval(&tau, e, regime);
        if v > best.0 {
            best = (v, coords.clone());
        }
        for d in (0..dims).rev() {
            idx[d] += 1;
            if idx[d] < windows[d].n {
                continue 'outer;
            }
            idx[d] = 0;
        }
        break;
    }
    best
}

/// Best value, its grid coordinates, and the final cell width of each axis.
fn refine(
    obj: &EpochObjective<'_>,
    grid: &GridSpec,
    k: usize,
    regime: Regime,
) -> (f64, Vec<f64>, Vec<f64>) {
    let full = |n| Window { lo: 0.0, hi: 1.0, n };
    let mut windows = Vec::with_capacity(k + 1);
    windows.push(full(grid.n_tau0));
    for _ in 1..k {
        windows.push(full(grid.n_simplex));
    }
    windows.push(full(grid.n_e));
    let mut best = search_box(obj, &windows, k, regime);
    for _ in 0..ZOOM_ROUNDS {
        if !best.0.is_finite() {
            break;
        }
        windows = windows
            .iter()
            .zip(&best.1)
            .map(|(w, &c)| w.zoom(c))
            .collect();
        let mut cand = search_box(obj, &windows, k, regime);
        // follow the best point while it sits on an interior window edge
        for _ in 0..MAX_RECENTRES {
            let on_edge = windows.iter().zip(&cand.1).any(|(w, &c)| {
                (c <= w.lo && w.lo > 0.0) || (c >= w.hi && w.hi < 1.0)
            });
            if !on_edge || !(cand.0 > best.0) {
                break;
            }
            best = cand.clone();
            windows = windows
                .iter()
                .zip(&best.1)
                .map(|(w, &c)| w.recentre(c))
                .collect();
            cand = search_box(obj, &windows, k, regime);
        }
        if cand.0 >= best.0 {
            best = cand;
        }
    }
    let cells = windows.iter().map(Window::cell).collect();
    (best.0, best.1, cells)
}

/// Maximizes the per-epoch Lagrangian by exhaustive grid search with two
/// rounds of 10x zoom, once per [`Regime`].
pub fn grid_search_epoch(
    channel: &ChannelState,
    config: &NetworkConfig,
    lambda: f64,
    rbar: &[f64],
    grid: &GridSpec,
) -> Result<OracleResult> {
    grid.validate()?;
    let k = channel.num_users();
    if k > 3 {
        return Err(Error::config("K", format!("grid oracle supports K <= 3, got {k}")));
    }
    let obj = EpochObjective::new(channel, config, lambda, rbar);
    let strict = refine(&obj, grid, k, Regime::StrictlyPositive);
    let relaxed = refine(&obj, grid, k, Regime::ZeroRate);
    let (best_objective, coords, cells) = if strict.0 >= relaxed.0 {
        strict.clone()
    } else {
        relaxed.clone()
    };
    let mut tau = vec![0.0; k];
    let (tau0, e) = decode(&coords, k, config.p_max, &mut tau);
    // e = f tau_0 P_max moves with both the tau_0 and the f axis, so its
    // resolution is the larger one-node step along either.
    let last = coords.len() - 1;
    let step = |c: f64, cell: f64| {
        let v = warp(c);
        (warp((c + cell).min(1.0)) - v).abs().max((v - warp((c - cell).max(0.0))).abs())
    };
    let f = warp(coords[last]);
    let e_cell = config.p_max * (tau0 * step(coords[last], cells[last])).max(f * step(coords[0], cells[0]));
    let room = (config.p_max * tau0 - e).max(0.0);
    let e_boundary_cells = if e_cell > 0.0 { e.min(room) / e_cell } else { 0.0 };
    Ok(OracleResult {
        best_objective,
        best_point: EpochPoint { tau0, tau, e },
        strict_objective: strict.0,
        relaxed_objective: relaxed.0,
        e_fraction: if tau0 > 0.0 { e / (config.p_max * tau0) } else { 0.0 },
        e_boundary_cells,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcavityReport {
    pub pairs: usize,
    pub violations: usize,
    /// Largest `(f(u) + f(v)) / 2 - f((u + v) / 2)` seen.
    pub worst_gap: f64,
}

/// Midpoint-concavity audit of the per-epoch objective over `n` random pairs
/// of points with `P_k > 0` for every user.
pub fn verify_concavity_samples(
    channel: &ChannelState,
    config: &NetworkConfig,
    lambda: f64,
    rbar: &[f64],
    n: usize,
    seed: u64,
) -> ConcavityReport {
    let obj = EpochObjective::new(channel, config, lambda, rbar);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut worst_gap = f64::NEG_INFINITY;
    let mut pairs = 0;
    while pairs < n {
        let (Some(u), Some(v)) = (
            sample_transmit_point(&obj, &mut rng),
            sample_transmit_point(&obj, &mut rng),
        ) else {
            continue;
        };
        let mid = EpochPoint {
            tau0: 0.5 * (u.tau0 + v.tau0),
            tau: u.tau.iter().zip(&v.tau).map(|(a, b)| 0.5 * (a + b)).collect(),
            e: 0.5 * (u.e + v.e),
        };
        let fu = obj.eval_point(&u, Regime::StrictlyPositive);
        let fv = obj.eval_point(&v, Regime::StrictlyPositive);
        let fm = obj.eval_point(&mid, Regime::StrictlyPositive);
        let gap = 0.5 * (fu + fv) - fm;
        worst_gap = worst_gap.max(gap);
        if gap > 1e-12 {
            violations += 1;
        }
        pairs += 1;
    }
    ConcavityReport {
        pairs,
        violations,
        worst_gap,
    }
}

/// Dirichlet(1) IT shares, `tau_0` uniform above the smallest value that
/// leaves every active user `P_k > 0` at full spend, then `e` uniform on the
/// part of `[0, P_max tau_0]` where every active user has `P_k > 0`.
fn sample_transmit_point(obj: &EpochObjective<'_>, rng: &mut ChaCha8Rng) -> Option<EpochPoint> {
    let k = obj.a.len();
    let draws: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    let shares: Vec<f64> = draws.iter().map(|d| d / total).collect();
    // (1 - tau_0) s_k c_k < a_k P_max tau_0
    let mut tau0_min: f64 = 0.0;
    for u in 0..k {
        if obj.a[u] > 0.0 {
            let need = shares[u] * obj.c[u];
            tau0_min = tau0_min.max(need / (need + obj.a[u] * obj.p_max));
        }
    }
    let tau0 = tau0_min + (1.0 - tau0_min) * rng.random_range(1e-6..1.0);
    let tau: Vec<f64> = shares.iter().map(|s| (1.0 - tau0) * s).collect();
    let mut e_min: f64 = 0.0;
    for u in 0..k {
        if obj.a[u] > 0.0 {
            e_min = e_min.max(obj.c[u] * tau[u] / obj.a[u]);
        }
    }
    let e_max = obj.p_max * tau0;
    if e_min >= e_max {
        return None;
    }
    let e = e_min + (e_max - e_min) * rng.random_range(1e-9..1.0);
    Some(EpochPoint { tau0, tau, e })
}
