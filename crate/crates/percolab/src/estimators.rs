//! Monte Carlo estimators and experiment harnesses.
//!
//! Every estimator maps indexed trials to values through the counter PRF and
//! reduces them in trial order (compensated summation), so results are
//! bit-identical across thread counts.

use serde::Serialize;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::{GraphSpec, VertexId};
use crate::par::{kahan_sum, run_trials_with};
use crate::perc::{
    default_pair_radii, good_pair_probe, sprinkle_plan, sprinkled_sweep_with, EdgeSampler,
    Explorer, GoodPairVerdict, MemoryBudget, SprinklePlan, Sweeper,
};

/// Shared Monte Carlo configuration.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MCConfig {
    pub trials: u64,
    pub master_seed: u64,
    /// Exploration cap; 0 means unlimited.
    pub cap: u64,
    /// z-multiplier for confidence statements.
    pub confidence_z: f64,
}

impl MCConfig {
    pub fn new(trials: u64, master_seed: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        Ok(MCConfig { trials, master_seed, cap: 0, confidence_z: 3.0 })
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }
}

/// A Monte Carlo scalar: mean, standard error, and range of i.i.d. trials.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
    pub min: f64,
    pub max: f64,
    /// Set when truncated exploration makes the estimate a lower bound.
    pub lower_bound: bool,
}

impl Estimate {
    /// Statistics of trial values, reduced in slice (= trial) order.
    pub fn from_values(values: &[f64]) -> Estimate {
        let n = values.len() as u64;
        let mean = kahan_sum(values) / n as f64;
        let devsq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        let var = if n > 1 { kahan_sum(&devsq) / (n as f64 - 1.0) } else { 0.0 };
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for &v in values {
            min = min.min(v);
            max = max.max(v);
        }
        Estimate {
            mean,
            stderr: (var / n as f64).sqrt(),
            n,
            min,
            max,
            lower_bound: false,
        }
    }
}

fn median_of(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in medians"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidConfig(format!("p = {p} outside [0, 1]")));
    }
    Ok(())
}

/// Susceptibility estimator: mean of |C(0)| over trials (transitivity lets the
/// origin stand for any vertex). With `cfg.cap > 0` the result is flagged as a
/// lower bound.
pub fn chi_mc(spec: &GraphSpec, p: f64, cfg: &MCConfig) -> Result<Estimate> {
    check_p(p)?;
    let values = run_trials_with(
        cfg.trials,
        || Explorer::new(spec),
        |explorer, trial| {
            let sampler = EdgeSampler::new(cfg.master_seed, trial, 0, p).expect("p validated");
            explorer.cluster(&sampler, VertexId(0), cfg.cap).0 as f64
        },
    );
    let mut est = Estimate::from_values(&values);
    est.lower_bound = cfg.cap > 0;
    Ok(est)
}

/// Cluster-tail estimator: fraction of trials where exploration from the
/// origin reaches k vertices; unbiased for `P(|C(0)| >= k)`.
pub fn tail_mc(spec: &GraphSpec, p: f64, k: u64, cfg: &MCConfig) -> Result<Estimate> {
    check_p(p)?;
    if k < 1 {
        return Err(Error::InvalidConfig("tail threshold k must be >= 1".into()));
    }
    let values = run_trials_with(
        cfg.trials,
        || Explorer::new(spec),
        |explorer, trial| {
            let sampler = EdgeSampler::new(cfg.master_seed, trial, 0, p).expect("p validated");
            let (_, truncated) = explorer.cluster(&sampler, VertexId(0), k);
            truncated as u64 as f64
        },
    );
    Ok(Estimate::from_values(&values))
}

struct TriangleScratch {
    explorer: Explorer,
    sweeper: Sweeper,
    members_x: Vec<u32>,
    members_y: Vec<u32>,
    label_counts: HashMap<u32, u64>,
}

/// Unbiased triangle-diagram estimator: three independent PRF streams play
/// the three factor configurations; per trial the value is
/// `sum_{u in C_1(x)} #{v in C_3(y) with the same omega_2 component label}`.
pub fn triangle_mc(
    spec: &GraphSpec,
    p: f64,
    x: VertexId,
    y: VertexId,
    cfg: &MCConfig,
    budget: &MemoryBudget,
) -> Result<Estimate> {
    check_p(p)?;
    budget.check_sweep(spec)?;
    let values = run_trials_with(
        cfg.trials,
        || TriangleScratch {
            explorer: Explorer::new(spec),
            sweeper: Sweeper::new(spec, budget).expect("budget pre-checked"),
            members_x: Vec::new(),
            members_y: Vec::new(),
            label_counts: HashMap::new(),
        },
        |sc, trial| {
            let s1 = EdgeSampler::new(cfg.master_seed, trial, 0, p).expect("p validated");
            let s2 = EdgeSampler::new(cfg.master_seed, trial, 1, p).expect("p validated");
            let s3 = EdgeSampler::new(cfg.master_seed, trial, 2, p).expect("p validated");
            sc.sweeper.sweep(&s2);
            sc.explorer.cluster_members(&s1, x, &mut sc.members_x);
            sc.explorer.cluster_members(&s3, y, &mut sc.members_y);
            sc.label_counts.clear();
            for &v in &sc.members_y {
                *sc.label_counts.entry(sc.sweeper.label(VertexId(v as u64))).or_insert(0) += 1;
            }
            let mut total = 0u64;
            for &u in &sc.members_x {
                if let Some(&c) = sc.label_counts.get(&sc.sweeper.label(VertexId(u as u64))) {
                    total += c;
                }
            }
            total as f64
        },
    );
    Ok(Estimate::from_values(&values))
}

/// Asymptotic expansion of the critical probability,
/// `p_c ~ 1/m + 1/m^2 + (7/2)/m^3 (+ a4/m^4 predicted, never asserted)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PcExpansion {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4_predicted: f64,
}

impl Default for PcExpansion {
    fn default() -> Self {
        PcExpansion { a1: 1.0, a2: 1.0, a3: 3.5, a4_predicted: 16.0 }
    }
}

impl PcExpansion {
    /// Partial sum through order `s <= 3`.
    pub fn eval(&self, m: f64, s: u32) -> f64 {
        let coeffs = [self.a1, self.a2, self.a3];
        coeffs
            .iter()
            .take(s.min(3) as usize)
            .enumerate()
            .map(|(i, a)| a / m.powi(i as i32 + 1))
            .sum()
    }

    /// Three proved terms plus the predicted fourth; reported, never asserted.
    pub fn eval_with_prediction(&self, m: f64) -> f64 {
        self.eval(m, 3) + self.a4_predicted / m.powi(4)
    }
}

/// Configuration for [`pc_solve`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PcSolveConfig {
    pub master_seed: u64,
    /// Trials for the first estimate at each probe.
    pub probe_trials_init: u64,
    /// Per-probe trial ceiling; an unresolved probe stops the bisection.
    pub probe_trials_max: u64,
    /// Bracket width target; defaults to m^-4 when unset.
    pub tol_p: Option<f64>,
    pub confidence_z: f64,
}

impl PcSolveConfig {
    pub fn new(master_seed: u64, probe_trials_init: u64) -> Self {
        PcSolveConfig {
            master_seed,
            probe_trials_init,
            probe_trials_max: probe_trials_init.saturating_mul(64),
            tol_p: None,
            confidence_z: 3.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeRecord {
    pub p: f64,
    pub chi: f64,
    pub stderr: f64,
    pub trials: u64,
    /// +1 when the probe became the new lower end, -1 the new upper end,
    /// 0 when it stayed unresolved at the trial ceiling.
    pub moved: i8,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalSolveReport {
    pub lambda: f64,
    pub target: f64,
    pub p_c_hat: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub tol_p: f64,
    pub converged: bool,
    pub probes: Vec<ProbeRecord>,
}

/// Stochastic bisection for `chi(p) = lambda V^(1/3)`.
///
/// All probes share one master seed, so the exact monotone coupling of
/// configurations across p makes the bracket invariant sound; a bracket end
/// only moves when the probe separates from the target at the configured
/// confidence.
pub fn pc_solve(spec: &GraphSpec, lambda: f64, cfg: &PcSolveConfig) -> Result<CriticalSolveReport> {
    if !(0.0 < lambda && lambda < 1.0) {
        return Err(Error::InvalidConfig(format!("lambda = {lambda} outside (0, 1)")));
    }
    let v = spec.vertex_count() as f64;
    let target = lambda * v.powf(1.0 / 3.0);
    // bracket scale is the branching factor, degree - 1
    let branching = spec.degree() as f64 - 1.0;
    if branching < 1.0 {
        return Err(Error::InvalidConfig("pc_solve needs degree >= 2".into()));
    }
    let mut lo = 1.0 / (2.0 * branching);
    let mut hi = (2.0 / branching).min(1.0);
    let tol_p = cfg.tol_p.unwrap_or_else(|| (spec.degree() as f64).powi(-4));

    let mut probes = Vec::new();
    let mut probe = |p: f64, probes: &mut Vec<ProbeRecord>| -> Result<(Option<bool>, f64, f64, u64)> {
        // returns (Some(below_target)?, chi, stderr, trials)
        let mut trials = cfg.probe_trials_init;
        loop {
            let mc = MCConfig {
                trials,
                master_seed: cfg.master_seed,
                cap: 0,
                confidence_z: cfg.confidence_z,
            };
            let est = chi_mc(spec, p, &mc)?;
            let margin = cfg.confidence_z * est.stderr;
            if est.mean + margin < target {
                probes.push(ProbeRecord { p, chi: est.mean, stderr: est.stderr, trials, moved: 1 });
                return Ok((Some(true), est.mean, est.stderr, trials));
            }
            if est.mean - margin > target {
                probes.push(ProbeRecord { p, chi: est.mean, stderr: est.stderr, trials, moved: -1 });
                return Ok((Some(false), est.mean, est.stderr, trials));
            }
            let next = trials.saturating_mul(2);
            if next > cfg.probe_trials_max {
                probes.push(ProbeRecord { p, chi: est.mean, stderr: est.stderr, trials, moved: 0 });
                return Ok((None, est.mean, est.stderr, trials));
            }
            trials = next;
        }
    };

    // the bracket must straddle the target before bisection starts
    let (lo_side, chi_lo, stderr_lo, _) = probe(lo, &mut probes)?;
    let (hi_side, chi_hi, stderr_hi, _) = probe(hi, &mut probes)?;
    if lo_side != Some(true) || hi_side != Some(false) {
        return Err(Error::BracketInvalid {
            lo,
            hi,
            target,
            chi_lo,
            stderr_lo,
            chi_hi,
            stderr_hi,
        });
    }

    let mut converged = true;
    while hi - lo > tol_p {
        let mid = 0.5 * (lo + hi);
        match probe(mid, &mut probes)? {
            (Some(true), ..) => lo = mid,
            (Some(false), ..) => hi = mid,
            (None, ..) => {
                converged = false;
                break;
            }
        }
    }

    Ok(CriticalSolveReport {
        lambda,
        target,
        p_c_hat: 0.5 * (lo + hi),
        bracket_lo: lo,
        bracket_hi: hi,
        tol_p,
        converged,
        probes,
    })
}

/// One sweep of a window scan, as recorded per trial.
#[derive(Debug, Clone, Serialize)]
pub struct WindowSweepRecord {
    pub eps: f64,
    pub trial: u64,
    pub c1: u64,
    pub c2: u64,
    pub open_edges: u64,
    pub chi_sweep: f64,
    pub z_k0: Option<u64>,
}

/// Summary row for one epsilon of a window scan.
#[derive(Debug, Clone, Serialize)]
pub struct WindowScanRow {
    pub eps: f64,
    pub p: f64,
    pub sweeps: u64,
    /// `k0 = eps^-2 (|eps|^3 V)^(1/4)`; absent at eps = 0.
    pub k0: Option<f64>,
    pub c1_mean: f64,
    pub c1_median: f64,
    pub c2_median: f64,
    /// Mean over sweeps of the per-configuration susceptibility.
    pub chi_hat: f64,
    pub c1_over_2ev_median: Option<f64>,
    pub c2_over_ev_median: Option<f64>,
    pub chi_over_4e2v: Option<f64>,
    pub c1_v23_median: f64,
    pub z_k0_over_2ev_median: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowScan {
    pub rows: Vec<WindowScanRow>,
    pub records: Vec<WindowSweepRecord>,
}

/// Threshold for `Z_{>=k0}` statistics.
pub fn k0_threshold(eps: f64, v: f64) -> f64 {
    eps.powi(-2) * (eps.abs().powi(3) * v).powf(0.25)
}

/// Full-sweep scan across the scaling window at `p = pc_hat (1 + eps)`.
pub fn window_scan(
    spec: &GraphSpec,
    pc_hat: f64,
    eps_list: &[f64],
    cfg: &MCConfig,
    budget: &MemoryBudget,
) -> Result<WindowScan> {
    budget.check_sweep(spec)?;
    let v = spec.vertex_count() as f64;
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for &eps in eps_list {
        let p = pc_hat * (1.0 + eps);
        check_p(p)?;
        let k0 = if eps != 0.0 { Some(k0_threshold(eps, v)) } else { None };
        let k0_int = k0.map(|k| k.ceil() as u64);
        let sweeps: Vec<WindowSweepRecord> = run_trials_with(
            cfg.trials,
            || Sweeper::new(spec, budget).expect("budget pre-checked"),
            |sweeper, trial| {
                let sampler =
                    EdgeSampler::new(cfg.master_seed, trial, 0, p).expect("p validated");
                let summary = sweeper.sweep(&sampler);
                WindowSweepRecord {
                    eps,
                    trial,
                    c1: summary.c1,
                    c2: summary.c2,
                    open_edges: summary.open_edge_count,
                    chi_sweep: summary.chi_per_vertex(),
                    z_k0: k0_int.map(|k| summary.z_at_least(k)),
                }
            },
        );
        let c1s: Vec<f64> = sweeps.iter().map(|s| s.c1 as f64).collect();
        let c2s: Vec<f64> = sweeps.iter().map(|s| s.c2 as f64).collect();
        let chis: Vec<f64> = sweeps.iter().map(|s| s.chi_sweep).collect();
        let c1_median = median_of(c1s.clone());
        let c2_median = median_of(c2s.clone());
        let chi_hat = kahan_sum(&chis) / chis.len() as f64;
        let normalized = |num: f64, den: f64| if eps != 0.0 { Some(num / den) } else { None };
        rows.push(WindowScanRow {
            eps,
            p,
            sweeps: cfg.trials,
            k0,
            c1_mean: kahan_sum(&c1s) / c1s.len() as f64,
            c1_median,
            c2_median,
            chi_hat,
            c1_over_2ev_median: normalized(c1_median, 2.0 * eps * v),
            c2_over_ev_median: normalized(c2_median, eps * v),
            chi_over_4e2v: normalized(chi_hat, 4.0 * eps * eps * v),
            c1_v23_median: c1_median / v.powf(2.0 / 3.0),
            z_k0_over_2ev_median: if eps != 0.0 {
                let zs: Vec<f64> =
                    sweeps.iter().map(|s| s.z_k0.unwrap_or(0) as f64 / (2.0 * eps * v)).collect();
                Some(median_of(zs))
            } else {
                None
            },
        });
        records.extend(sweeps);
    }
    Ok(WindowScan { rows, records })
}

/// Ball-growth series with the unlacing stopping probe.
#[derive(Debug, Clone, Serialize)]
pub struct BallGrowthReport {
    pub p: f64,
    pub kmax: usize,
    /// Per-radius boundary estimates `E|∂B(k)|`.
    pub levels: Vec<Estimate>,
    /// Growth ratios `E|∂B(k)| / E|∂B(k-1)|`; None where the denominator is 0.
    pub ratios: Vec<Option<f64>>,
    /// Mean cumulative ball sizes `E|B(k)|`.
    pub ball_means: Vec<f64>,
    /// Stopping threshold `sqrt(V) / degree^3` (= `2^(m/2) / m^3` on the cube).
    pub threshold: f64,
    /// First k with `E|B(k)|` at or above the threshold, when reached.
    pub first_k_at_threshold: Option<usize>,
}

/// Monte Carlo intrinsic-ball growth from the origin.
pub fn ball_growth_mc(
    spec: &GraphSpec,
    p: f64,
    kmax: usize,
    cfg: &MCConfig,
) -> Result<BallGrowthReport> {
    check_p(p)?;
    if kmax < 1 {
        return Err(Error::InvalidConfig("kmax must be >= 1".into()));
    }
    let rows: Vec<Vec<u64>> = run_trials_with(
        cfg.trials,
        || Explorer::new(spec),
        |explorer, trial| {
            let sampler = EdgeSampler::new(cfg.master_seed, trial, 0, p).expect("p validated");
            explorer.ball(&sampler, VertexId(0), kmax).levels
        },
    );
    let mut levels = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        let column: Vec<f64> = rows.iter().map(|r| r[k] as f64).collect();
        levels.push(Estimate::from_values(&column));
    }
    let ratios: Vec<Option<f64>> = (0..=kmax)
        .map(|k| {
            if k == 0 {
                None
            } else if levels[k - 1].mean > 0.0 {
                Some(levels[k].mean / levels[k - 1].mean)
            } else {
                None
            }
        })
        .collect();
    let mut ball_means = Vec::with_capacity(kmax + 1);
    let mut acc = 0.0;
    for l in &levels {
        acc += l.mean;
        ball_means.push(acc);
    }
    let v = spec.vertex_count() as f64;
    let threshold = v.sqrt() / (spec.degree() as f64).powi(3);
    let first_k_at_threshold = ball_means.iter().position(|&b| b >= threshold);
    Ok(BallGrowthReport {
        p,
        kmax,
        levels,
        ratios,
        ball_means,
        threshold,
        first_k_at_threshold,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ChiOdeRow {
    pub p: f64,
    pub chi: Estimate,
    /// `1 / (m (pc - p) + 1/chi_pc)`.
    pub predicted: f64,
    pub ratio: f64,
    /// Margin of the integrated inequality
    /// `1/chi_pc - 1/chi(p) >= -m (pc - p)`, in units of its standard error.
    pub integrated_margin_z: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChiOdeReport {
    pub pc_hat: f64,
    pub chi_pc: f64,
    pub rows: Vec<ChiOdeRow>,
}

/// Check the susceptibility asymptotics `chi(p) ~ 1/(m(pc-p) + chi(pc)^-1)`
/// below pc, and the integrated derivative inequality.
pub fn chi_ode_check(
    spec: &GraphSpec,
    pc_hat: f64,
    chi_pc: f64,
    p_list: &[f64],
    cfg: &MCConfig,
) -> Result<ChiOdeReport> {
    let degree = spec.degree() as f64;
    let mut rows = Vec::new();
    for &p in p_list {
        if p >= pc_hat {
            return Err(Error::InvalidConfig(format!("chi_ode_check needs p < pc, got {p} >= {pc_hat}")));
        }
        let chi = chi_mc(spec, p, cfg)?;
        let predicted = 1.0 / (degree * (pc_hat - p) + 1.0 / chi_pc);
        let lhs = 1.0 / chi_pc - 1.0 / chi.mean;
        let rhs = -degree * (pc_hat - p);
        // delta method: se(1/chi) = se(chi) / chi^2
        let se_inv = chi.stderr / (chi.mean * chi.mean);
        rows.push(ChiOdeRow {
            p,
            chi,
            predicted,
            ratio: chi.mean / predicted,
            integrated_margin_z: if se_inv > 0.0 { (lhs - rhs) / se_inv } else { f64::INFINITY },
        });
    }
    Ok(ChiOdeReport { pc_hat, chi_pc, rows })
}

#[derive(Debug, Clone, Serialize)]
pub struct TriangleClassRow {
    /// Distance class of the representative target vertex.
    pub w: u32,
    pub estimate: Estimate,
}

#[derive(Debug, Clone, Serialize)]
pub struct TriangleConditionReport {
    pub p: f64,
    pub rows: Vec<TriangleClassRow>,
    /// `nabla(0,0) - 1`.
    pub diag_excess: f64,
    /// Max over classes w >= 1.
    pub offdiag_max: f64,
    pub chi_hat: Estimate,
    /// `chi_hat^3 / V`, the scale of the bound's volume term.
    pub chi3_over_v: f64,
}

/// Estimate the triangle diagram for one representative target per distance
/// class and report the off-diagonal part against the bound scale
/// `C chi^3 / V + a0` (the paper fixes neither constant, so both measured
/// components are published).
pub fn triangle_condition_report(
    spec: &GraphSpec,
    pc_hat: f64,
    cfg: &MCConfig,
    budget: &MemoryBudget,
) -> Result<TriangleConditionReport> {
    let classes: Vec<(u32, VertexId)> = match spec {
        GraphSpec::Hypercube { m } => (0..=*m).map(|w| (w, VertexId((1u64 << w) - 1))).collect(),
        GraphSpec::Complete { .. } => vec![(0, VertexId(0)), (1, VertexId(1))],
    };
    let mut rows = Vec::new();
    for (w, y) in classes {
        let estimate = triangle_mc(spec, pc_hat, VertexId(0), y, cfg, budget)?;
        rows.push(TriangleClassRow { w, estimate });
    }
    let diag_excess = rows[0].estimate.mean - 1.0;
    let offdiag_max = rows[1..]
        .iter()
        .map(|r| r.estimate.mean)
        .fold(f64::NEG_INFINITY, f64::max);
    let chi_hat = chi_mc(spec, pc_hat, cfg)?;
    let v = spec.vertex_count() as f64;
    Ok(TriangleConditionReport {
        p: pc_hat,
        chi3_over_v: chi_hat.mean.powi(3) / v,
        diag_excess,
        offdiag_max,
        chi_hat,
        rows,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GoodPairCensus {
    pub p: f64,
    pub eps: f64,
    pub r: usize,
    pub r0: usize,
    pub pair_samples: u64,
    pub ball_mean_r0: f64,
    /// Fraction of sampled ordered pairs that were good.
    pub good_fraction: Estimate,
    /// Comparison target `(2 eps)^2`.
    pub target: f64,
    pub cond1_rate: f64,
    pub cond2_rate: f64,
    pub cond3_rate: f64,
    /// Rate at which the widened balls were vertex-disjoint; cond3 counts
    /// are conservative when this is below 1.
    pub disjoint_rate: f64,
}

/// Sample random ordered pairs and probe the good-pair conditions on fresh
/// configurations; `E|B(r0)|` is pre-estimated from `cfg.trials` balls.
#[allow(clippy::too_many_arguments)]
pub fn good_pair_census(
    spec: &GraphSpec,
    p: f64,
    eps: f64,
    r: Option<usize>,
    r0: Option<usize>,
    pair_samples: u64,
    cfg: &MCConfig,
) -> Result<GoodPairCensus> {
    check_p(p)?;
    let target = (2.0 * eps) * (2.0 * eps);
    if target > 1.0 {
        return Err(Error::InvalidConfig(format!(
            "(2 eps)^2 = {target} > 1 is not a probability; eps regime invalid"
        )));
    }
    if pair_samples == 0 {
        return Err(Error::InvalidConfig("pair_samples must be >= 1".into()));
    }
    let (default_r, default_r0) = default_pair_radii(spec, eps);
    let r = r.unwrap_or(default_r);
    let r0 = r0.unwrap_or(default_r0);

    // pass 1: E|B(r0)|
    let ball_sizes = run_trials_with(
        cfg.trials,
        || Explorer::new(spec),
        |explorer, trial| {
            let sampler = EdgeSampler::new(cfg.master_seed, trial, 0, p).expect("p validated");
            *explorer.ball(&sampler, VertexId(0), r0).cumulative.last().unwrap() as f64
        },
    );
    let ball_mean_r0 = Estimate::from_values(&ball_sizes).mean;

    // pass 2: pair probes, one configuration per pair
    let v = spec.vertex_count();
    let pair_seed = cfg.master_seed ^ 0x600d_9a12;
    let verdicts: Vec<GoodPairVerdict> = run_trials_with(
        pair_samples,
        || (),
        |_, i| {
            // stream 3 keeps pair selection independent of the edge streams
            let key = crate::prf::stream_key(pair_seed, i, 3);
            let x = crate::prf::uniform_below(key, 0, v);
            let mut y = crate::prf::uniform_below(key, 1, v);
            let mut bump = 2u64;
            while y == x {
                y = crate::prf::uniform_below(key, bump, v);
                bump += 1;
            }
            let sampler = EdgeSampler::new(cfg.master_seed, i, 0, p).expect("p validated");
            good_pair_probe(spec, &sampler, VertexId(x), VertexId(y), r, r0, eps, ball_mean_r0)
                .expect("validated probe inputs")
        },
    );
    let fraction: Vec<f64> = verdicts.iter().map(|v| v.good() as u64 as f64).collect();
    let rate = |f: &dyn Fn(&GoodPairVerdict) -> bool| {
        verdicts.iter().filter(|v| f(v)).count() as f64 / verdicts.len() as f64
    };
    Ok(GoodPairCensus {
        p,
        eps,
        r,
        r0,
        pair_samples,
        ball_mean_r0,
        good_fraction: Estimate::from_values(&fraction),
        target,
        cond1_rate: rate(&|v| v.cond1),
        cond2_rate: rate(&|v| v.cond2),
        cond3_rate: rate(&|v| v.cond3),
        disjoint_rate: rate(&|v| v.balls_disjoint),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SprinkleTrialRecord {
    pub trial: u64,
    pub round1_c1: u64,
    pub union_c1: u64,
    pub union_open_edges: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SprinkleReport {
    pub plan: SprinklePlan,
    pub trials: u64,
    pub union_open_mean: f64,
    /// `E p`, the exact expected open-edge count of the union layer.
    pub expected_open: f64,
    pub union_open_stderr: f64,
    pub merge_gain_median: f64,
    pub all_gains_at_least_one: bool,
    pub union_c1_over_2ev_median: f64,
    pub records: Vec<SprinkleTrialRecord>,
}

/// Two-round sprinkling experiment at `p = pc_hat (1 + eps)`.
pub fn sprinkle_experiment(
    spec: &GraphSpec,
    pc_hat: f64,
    eps: f64,
    theta: f64,
    cfg: &MCConfig,
    budget: &MemoryBudget,
) -> Result<SprinkleReport> {
    let m = spec.degree() as u32;
    let plan = sprinkle_plan(m, pc_hat, eps, theta)?;
    budget.check_sweep(spec)?;
    let records: Vec<SprinkleTrialRecord> = run_trials_with(
        cfg.trials,
        || Sweeper::new(spec, budget).expect("budget pre-checked"),
        |sweeper, trial| {
            let (round1, union) = sprinkled_sweep_with(sweeper, &plan, cfg.master_seed, trial);
            SprinkleTrialRecord {
                trial,
                round1_c1: round1.c1,
                union_c1: union.c1,
                union_open_edges: union.open_edge_count,
            }
        },
    );
    let v = spec.vertex_count() as f64;
    let opens: Vec<f64> = records.iter().map(|r| r.union_open_edges as f64).collect();
    let open_est = Estimate::from_values(&opens);
    let gains: Vec<f64> = records
        .iter()
        .map(|r| r.union_c1 as f64 / r.round1_c1 as f64)
        .collect();
    let ratios: Vec<f64> = records.iter().map(|r| r.union_c1 as f64 / (2.0 * eps * v)).collect();
    Ok(SprinkleReport {
        plan,
        trials: cfg.trials,
        union_open_mean: open_est.mean,
        expected_open: spec.edge_count() as f64 * plan.p,
        union_open_stderr: open_est.stderr,
        merge_gain_median: median_of(gains.clone()),
        all_gains_at_least_one: records.iter().all(|r| r.union_c1 >= r.round1_c1),
        union_c1_over_2ev_median: median_of(ratios),
        records,
    })
}

/// Phase regime of an Erdos-Renyi check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GnpRegime {
    Subcritical,
    Critical,
    Supercritical,
}

impl GnpRegime {
    pub fn infer(eps: f64) -> Self {
        if eps < 0.0 {
            GnpRegime::Subcritical
        } else if eps == 0.0 {
            GnpRegime::Critical
        } else {
            GnpRegime::Supercritical
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GnpSweepRecord {
    pub trial: u64,
    pub c1: u64,
    pub c2: u64,
    pub open_edges: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GnpReport {
    pub n: u64,
    pub eps: f64,
    pub p: f64,
    pub regime: GnpRegime,
    pub sweeps: u64,
    pub c1_median: f64,
    pub c2_median: f64,
    /// Regime normalization of the median C1: supercritical `C1/(2 eps n)`,
    /// critical `C1 n^(-2/3)`, subcritical `C1 / (2 eps^-2 ln(|eps|^3 n))`.
    pub c1_normalized_median: f64,
    /// Supercritical only: `C2 / (2 eps^-2 ln(eps^3 n))` median.
    pub c2_normalized_median: Option<f64>,
    pub c2_over_c1_median: f64,
    pub records: Vec<GnpSweepRecord>,
}

/// Baseline phase check on `G(n, (1+eps)/n)`.
pub fn gnp_phase_check(
    n: u64,
    eps: f64,
    regime: GnpRegime,
    cfg: &MCConfig,
    budget: &MemoryBudget,
) -> Result<GnpReport> {
    let spec = GraphSpec::complete(n)?;
    budget.check_sweep(&spec)?;
    let p = (1.0 + eps) / n as f64;
    check_p(p)?;
    let records: Vec<GnpSweepRecord> = run_trials_with(
        cfg.trials,
        || Sweeper::new(&spec, budget).expect("budget pre-checked"),
        |sweeper, trial| {
            let sampler = EdgeSampler::new(cfg.master_seed, trial, 0, p).expect("p validated");
            let summary = sweeper.sweep(&sampler);
            GnpSweepRecord {
                trial,
                c1: summary.c1,
                c2: summary.c2,
                open_edges: summary.open_edge_count,
            }
        },
    );
    let nf = n as f64;
    let c1_median = median_of(records.iter().map(|r| r.c1 as f64).collect());
    let c2_median = median_of(records.iter().map(|r| r.c2 as f64).collect());
    let small_component_scale = if eps != 0.0 {
        2.0 * eps.powi(-2) * (eps.abs().powi(3) * nf).ln()
    } else {
        f64::NAN
    };
    let c1_normalized_median = match regime {
        GnpRegime::Supercritical => c1_median / (2.0 * eps * nf),
        GnpRegime::Critical => c1_median / nf.powf(2.0 / 3.0),
        GnpRegime::Subcritical => c1_median / small_component_scale,
    };
    let c2_normalized_median = match regime {
        GnpRegime::Supercritical => Some(c2_median / small_component_scale),
        _ => None,
    };
    let c2_over_c1_median =
        median_of(records.iter().map(|r| r.c2 as f64 / (r.c1 as f64).max(1.0)).collect());
    Ok(GnpReport {
        n,
        eps,
        p,
        regime,
        sweeps: cfg.trials,
        c1_median,
        c2_median,
        c1_normalized_median,
        c2_normalized_median,
        c2_over_c1_median,
        records,
    })
}
