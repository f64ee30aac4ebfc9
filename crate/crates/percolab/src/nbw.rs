//! Exact non-backtracking-walk analytics on the hypercube.
//!
//! Coordinate-permutation symmetry lumps the walk to a chain on (Hamming
//! weight, direction of the last step); within a weight class the time-t law
//! is uniform, so the full kernel `p^t(0, y)` is `q[t][|y|] / C(m, |y|)`.
//! Everything here is deterministic double-precision arithmetic; the only
//! randomness in the crate lives in the percolation sampler.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{binomial_f64, intersection_number};

/// Direction of the last step of the walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LastStep {
    /// The last flip set a bit to 1.
    Up,
    /// The last flip cleared a bit.
    Down,
}

/// State of the lumped chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LumpedState {
    pub weight: u32,
    pub last_step: LastStep,
}

/// Transition law of the lumped chain from `state` with `m >= 2`:
/// returns up to two `(next, probability)` pairs.
pub fn lumped_transitions(m: u32, state: LumpedState) -> Vec<(LumpedState, f64)> {
    let mf = m as f64;
    let w = state.weight;
    let wf = w as f64;
    let mut out = Vec::with_capacity(2);
    match state.last_step {
        LastStep::Up => {
            // the just-set bit may not be cleared again
            if w >= 1 && wf - 1.0 > 0.0 {
                out.push((
                    LumpedState { weight: w - 1, last_step: LastStep::Down },
                    (wf - 1.0) / (mf - 1.0),
                ));
            }
            if w < m {
                out.push((
                    LumpedState { weight: w + 1, last_step: LastStep::Up },
                    (mf - wf) / (mf - 1.0),
                ));
            }
        }
        LastStep::Down => {
            if w >= 1 {
                out.push((
                    LumpedState { weight: w - 1, last_step: LastStep::Down },
                    wf / (mf - 1.0),
                ));
            }
            if w < m && mf - wf - 1.0 > 0.0 {
                out.push((
                    LumpedState { weight: w + 1, last_step: LastStep::Up },
                    (mf - wf - 1.0) / (mf - 1.0),
                ));
            }
        }
    }
    out
}

/// Table `q[t][w] = P(walk from 0 has weight w at time t)`, t = 0..=horizon.
#[derive(Debug, Clone)]
pub struct WeightKernel {
    m: u32,
    rows: Vec<Vec<f64>>,
}

/// Row-sum drift tolerated before the kernel is declared broken.
const ROW_SUM_TOL: f64 = 1e-12;

/// Build the lumped kernel for dimension `m >= 2` up to time `horizon`.
pub fn nbw_kernel(m: u32, horizon: usize) -> Result<WeightKernel> {
    if m < 2 {
        return Err(Error::DegreeTooSmall { m });
    }
    let mf = m as f64;
    let width = m as usize + 1;
    let mut rows = Vec::with_capacity(horizon + 1);
    let mut row0 = vec![0.0; width];
    row0[0] = 1.0;
    rows.push(row0);

    // split state: mass at (w, Up) and (w, Down)
    let mut up = vec![0.0f64; width];
    let mut down = vec![0.0f64; width];
    if horizon >= 1 {
        up[1] = 1.0;
        let mut row = vec![0.0; width];
        row[1] = 1.0;
        rows.push(row);
    }
    let mut next_up = vec![0.0f64; width];
    let mut next_down = vec![0.0f64; width];
    for t in 2..=horizon {
        next_up.fill(0.0);
        next_down.fill(0.0);
        for w in 0..=m as usize {
            let wf = w as f64;
            let pu = up[w];
            if pu > 0.0 {
                if w >= 1 {
                    next_down[w - 1] += pu * (wf - 1.0) / (mf - 1.0);
                }
                if w < m as usize {
                    next_up[w + 1] += pu * (mf - wf) / (mf - 1.0);
                }
            }
            let pd = down[w];
            if pd > 0.0 {
                next_down[w - 1] += pd * wf / (mf - 1.0);
                if w + 1 < width {
                    next_up[w + 1] += pd * (mf - wf - 1.0) / (mf - 1.0);
                }
            }
        }
        std::mem::swap(&mut up, &mut next_up);
        std::mem::swap(&mut down, &mut next_down);
        let row: Vec<f64> = (0..width).map(|w| up[w] + down[w]).collect();
        let sum: f64 = row.iter().sum();
        debug_assert!(
            (sum - 1.0).abs() <= ROW_SUM_TOL,
            "kernel row {t} drifted: sum = {sum:.17}"
        );
        rows.push(row);
    }
    Ok(WeightKernel { m, rows })
}

impl WeightKernel {
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn horizon(&self) -> usize {
        self.rows.len() - 1
    }

    /// `q[t][w]`: probability the walk sits in the weight-w class at time t.
    pub fn weight_prob(&self, t: usize, w: u32) -> Result<f64> {
        if t >= self.rows.len() {
            return Err(Error::HorizonExceeded { t, horizon: self.horizon() });
        }
        Ok(if w > self.m { 0.0 } else { self.rows[t][w as usize] })
    }

    /// `p^t(0, y)` for any vertex y of weight w: `q[t][w] / C(m, w)`.
    pub fn point_prob(&self, t: usize, w: u32) -> Result<f64> {
        Ok(self.weight_prob(t, w)? / binomial_f64(self.m as u64, w as u64))
    }

    /// Number of non-backtracking paths of length t from 0 to a fixed
    /// weight-w vertex: `m (m-1)^(t-1) p^t(0, w)`, which must be an integer.
    pub fn path_count(&self, t: usize, w: u32) -> Result<u128> {
        if t < 1 {
            return Err(Error::InvalidConfig("path count needs t >= 1".into()));
        }
        let mf = self.m as f64;
        let total_paths = mf * (mf - 1.0).powi(t as i32 - 1);
        let value = total_paths * self.point_prob(t, w)?;
        let nearest = value.round();
        let tol = 1e-6;
        if (value - nearest).abs() > tol * nearest.abs().max(1.0) {
            return Err(Error::NonIntegerPathCount { value, tol });
        }
        Ok(nearest as u128)
    }

    /// Full weight row at time t.
    pub fn row(&self, t: usize) -> Result<&[f64]> {
        if t >= self.rows.len() {
            return Err(Error::HorizonExceeded { t, horizon: self.horizon() });
        }
        Ok(&self.rows[t])
    }

    /// Class function `w -> p^t(0, weight-w class)` used by the weight-domain
    /// convolutions.
    fn point_row(&self, t: usize) -> Result<Vec<f64>> {
        (0..=self.m).map(|w| self.point_prob(t, w)).collect()
    }
}

/// Uniform mixing time report: the trace holds
/// `s(t) = V * max_y (p^t(0,y) + p^(t+1)(0,y)) / 2` for t = 0..=t_mix.
#[derive(Debug, Clone, Serialize)]
pub struct MixingReport {
    pub m: u32,
    pub delta: f64,
    pub t_mix: usize,
    pub trace: Vec<f64>,
    pub horizon_cap: usize,
}

/// Default search cap for [`uniform_mixing_time`].
pub fn default_horizon_cap(m: u32) -> usize {
    64 * m as usize * (m as f64).ln().ceil().max(1.0) as usize
}

/// Minimal t with `V * max_y (p^t(0,y) + p^(t+1)(0,y)) / 2 <= 1 + delta`;
/// by transitivity the max over (x, y) pairs reduces to x = 0.
pub fn uniform_mixing_time(m: u32, delta: f64) -> Result<MixingReport> {
    uniform_mixing_time_capped(m, delta, default_horizon_cap(m))
}

pub fn uniform_mixing_time_capped(m: u32, delta: f64, cap: usize) -> Result<MixingReport> {
    if delta <= 0.0 || !delta.is_finite() {
        return Err(Error::InvalidConfig(format!("slack delta must be positive, got {delta}")));
    }
    let kernel = nbw_kernel(m, cap + 1)?;
    let v = 2f64.powi(m as i32);
    let mut trace = Vec::new();
    for t in 0..=cap {
        let mut worst = 0.0f64;
        for w in 0..=m {
            let avg = (kernel.point_prob(t, w)? + kernel.point_prob(t + 1, w)?) / 2.0;
            worst = worst.max(avg);
        }
        let s = v * worst;
        trace.push(s);
        if s <= 1.0 + delta {
            return Ok(MixingReport { m, delta, t_mix: t, trace, horizon_cap: cap });
        }
    }
    Err(Error::MixingNotConverged { m, delta, cap })
}

/// Condition (2) value: `[p (m-1)]^t_mix`.
pub fn condition2(m: u32, p: f64, t_mix: usize) -> f64 {
    ((m as f64 - 1.0) * p).powi(t_mix as i32)
}

/// Weight-domain convolution in the Hamming association scheme:
/// `(A ∘ B)(w) = sum_{w1, w2} N(w; w1, w2) A(w1) B(w2)` where N counts
/// vertices of weight w1 at distance w2 from a fixed weight-w vertex.
fn class_convolve(m: u32, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let width = m as usize + 1;
    let mut out = vec![0.0; width];
    for w in 0..=m {
        let mut acc = 0.0;
        for w1 in 0..=m {
            let av = a[w1 as usize];
            if av == 0.0 {
                continue;
            }
            for w2 in 0..=m {
                let bv = b[w2 as usize];
                if bv == 0.0 {
                    continue;
                }
                let n = intersection_number(m, w, w1, w2)?;
                if n != 0 {
                    acc += n as f64 * av * bv;
                }
            }
        }
        out[w as usize] = acc;
    }
    Ok(out)
}

/// Condition (3) value: max over the distance class of (x, y) of
/// `sum_{u,v} sum_{t1+t2+t3 >= 3, ti <= t_mix} p^t1(x,u) p^t2(u,v) p^t3(v,y)`,
/// evaluated exactly in the weight domain. The constrained sum is the
/// unconstrained triple convolution minus the t1+t2+t3 <= 2 terms.
pub fn condition3(m: u32, t_mix: usize) -> Result<f64> {
    let kernel = nbw_kernel(m, t_mix.max(2))?;
    let width = m as usize + 1;

    let mut g = vec![0.0f64; width];
    for t in 0..=t_mix {
        for (w, gv) in g.iter_mut().enumerate() {
            *gv += kernel.point_prob(t, w as u32)?;
        }
    }
    let gg = class_convolve(m, &g, &g)?;
    let ggg = class_convolve(m, &gg, &g)?;

    // t1+t2+t3 <= 2 with each ti <= t_mix: (0,0,0), perms of (1,0,0),
    // (2,0,0), (1,1,0); the t = 0 kernel is the identity class function.
    let mut correction = vec![0.0f64; width];
    correction[0] += 1.0;
    if t_mix >= 1 {
        let p1 = kernel.point_row(1)?;
        for w in 0..width {
            correction[w] += 3.0 * p1[w];
        }
        let p11 = class_convolve(m, &p1, &p1)?;
        for w in 0..width {
            correction[w] += 3.0 * p11[w];
        }
    }
    if t_mix >= 2 {
        let p2 = kernel.point_row(2)?;
        for w in 0..width {
            correction[w] += 3.0 * p2[w];
        }
    }

    let mut best = 0.0f64;
    for w in 0..width {
        best = best.max(ggg[w] - correction[w]);
    }
    Ok(best)
}

/// Even lace-correction sum:
/// `sum_{t=1}^{t_mix} [(m-1)p]^(2t) p^(2t)(0, e_{1,1}-class)`.
pub fn lace_sum_even(m: u32, p: f64, t_mix: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidConfig(format!("p = {p} outside [0, 1]")));
    }
    let kernel = nbw_kernel(m, 2 * t_mix)?;
    let lambda = (m as f64 - 1.0) * p;
    let mut sum = 0.0;
    for t in 1..=t_mix {
        sum += lambda.powi(2 * t as i32) * kernel.point_prob(2 * t, 2)?;
    }
    Ok(sum)
}

/// Odd lace-correction sum:
/// `sum_{t=3}^{2 t_mix} 2 floor(t/2) [(m-1)p]^t p^t(0, e_1-class)`.
pub fn lace_sum_odd(m: u32, p: f64, t_mix: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidConfig(format!("p = {p} outside [0, 1]")));
    }
    let kernel = nbw_kernel(m, (2 * t_mix).max(3))?;
    let lambda = (m as f64 - 1.0) * p;
    let mut sum = 0.0;
    for t in 3..=(2 * t_mix) {
        let weight = 2.0 * (t / 2) as f64;
        sum += weight * lambda.powi(t as i32) * kernel.point_prob(t, 1)?;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::binomial;

    #[test]
    fn rejects_degree_one() {
        assert!(nbw_kernel(1, 4).is_err());
    }

    #[test]
    fn first_steps() {
        let k = nbw_kernel(5, 3).unwrap();
        assert_eq!(k.weight_prob(0, 0).unwrap(), 1.0);
        assert_eq!(k.weight_prob(1, 1).unwrap(), 1.0);
        // no return at time 2
        assert_eq!(k.weight_prob(2, 2).unwrap(), 1.0);
        assert_eq!(k.weight_prob(2, 0).unwrap(), 0.0);
    }

    #[test]
    fn rows_normalize_and_respect_parity() {
        for m in [2u32, 3, 7, 16, 64] {
            let t_max = 40;
            let k = nbw_kernel(m, t_max).unwrap();
            for t in 0..=t_max {
                let row = k.row(t).unwrap();
                let sum: f64 = row.iter().sum();
                assert!((sum - 1.0).abs() <= 1e-12, "m={m} t={t} sum={sum}");
                for (w, &q) in row.iter().enumerate() {
                    if (w + t) % 2 == 1 {
                        assert_eq!(q, 0.0, "parity violation m={m} t={t} w={w}");
                    }
                }
            }
        }
    }

    #[test]
    fn closed_forms_lemma_values() {
        for m in 3..=200u32 {
            let k = nbw_kernel(m, 3).unwrap();
            let mf = m as f64;
            let expect2 = 2.0 / (mf * (mf - 1.0));
            let expect3 = 1.0 / (mf * (mf - 1.0));
            assert!((k.point_prob(2, 2).unwrap() - expect2).abs() < 1e-12);
            assert!((k.point_prob(3, 1).unwrap() - expect3).abs() < 1e-12);
        }
        // uniform first step
        for m in 2..=40u32 {
            let k = nbw_kernel(m, 1).unwrap();
            assert!((k.point_prob(1, 1).unwrap() - 1.0 / m as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn point_prob_rejects_beyond_horizon() {
        let k = nbw_kernel(5, 2).unwrap();
        assert!(k.point_prob(3, 1).is_err());
    }

    #[test]
    fn path_counts() {
        let k = nbw_kernel(10, 12).unwrap();
        assert_eq!(k.path_count(1, 1).unwrap(), 1);
        assert_eq!(k.path_count(2, 2).unwrap(), 2);
        assert_eq!(k.path_count(3, 1).unwrap(), 9); // m - 1
        assert!(k.path_count(0, 0).is_err());
    }

    #[test]
    fn path_count_integrality_sweep() {
        for m in 2..=50u32 {
            let k = nbw_kernel(m, 12).unwrap();
            for t in 1..=12usize {
                for w in 0..=m {
                    if k.weight_prob(t, w).unwrap() > 0.0 {
                        k.path_count(t, w).unwrap();
                    }
                }
            }
        }
    }

    #[test]
    fn decay_envelope_lemma() {
        // sup over t in [2, T_mix] of p^{2t}(0, e_{1,1}) * m^3 stays bounded
        // and the per-m sup does not grow with m on a coarse grid
        let mut prev_sup = f64::INFINITY;
        for m in [10u32, 20, 40, 80, 100] {
            let report = uniform_mixing_time(m, 1.0 / m as f64).unwrap();
            let k = nbw_kernel(m, 2 * report.t_mix).unwrap();
            let mut sup = 0.0f64;
            for t in 2..=report.t_mix {
                sup = sup.max(k.point_prob(2 * t, 2).unwrap() * (m as f64).powi(3));
            }
            assert!(sup.is_finite());
            assert!(sup <= prev_sup * (1.0 + 1e-9), "m={m}: sup {sup} grew past {prev_sup}");
            prev_sup = sup;
        }
    }

    #[test]
    fn transitions_are_stochastic() {
        for m in 2..=12u32 {
            for w in 0..=m {
                for dir in [LastStep::Up, LastStep::Down] {
                    if (dir == LastStep::Up && w == 0) || (dir == LastStep::Down && w == m) {
                        continue; // unreachable states
                    }
                    let total: f64 = lumped_transitions(m, LumpedState { weight: w, last_step: dir })
                        .iter()
                        .map(|(_, p)| p)
                        .sum();
                    assert!((total - 1.0).abs() < 1e-15, "m={m} w={w} {dir:?}: {total}");
                }
            }
        }
    }

    #[test]
    fn mixing_monotone_in_slack() {
        for m in [8u32, 12, 16] {
            let tight = uniform_mixing_time(m, 0.01).unwrap().t_mix;
            let loose = uniform_mixing_time(m, 0.5).unwrap().t_mix;
            assert!(tight >= loose);
        }
    }

    #[test]
    fn mixing_trace_brackets_threshold() {
        let r = uniform_mixing_time(12, 1.0 / 12.0).unwrap();
        let bound = 1.0 + r.delta;
        assert!(r.trace[r.t_mix] <= bound);
        if r.t_mix > 0 {
            assert!(r.trace[r.t_mix - 1] > bound);
        }
    }

    #[test]
    fn four_cycle_never_mixes() {
        // the NBW on the 4-cycle is a rotation after the first coin and keeps
        // half its mass on a single vertex forever
        let err = uniform_mixing_time_capped(2, 0.5, 200).unwrap_err();
        assert!(matches!(err, Error::MixingNotConverged { .. }));
    }

    #[test]
    fn condition2_values() {
        assert_eq!(condition2(9, 1.0 / 8.0, 17), 1.0);
        assert_eq!(condition2(9, 0.7, 0), 1.0);
        let v = condition2(20, 0.052, 10);
        assert!((v - (0.052f64 * 19.0).powi(10)).abs() < 1e-15);
    }

    #[test]
    fn condition3_zero_horizon() {
        assert_eq!(condition3(4, 0).unwrap(), 0.0);
    }

    #[test]
    fn lace_sums_basic() {
        let m = 11u32;
        let p = 0.07;
        let lambda = (m as f64 - 1.0) * p;
        let mf = m as f64;
        // single even term
        let even1 = lace_sum_even(m, p, 1).unwrap();
        assert!((even1 - lambda.powi(2) * 2.0 / (mf * (mf - 1.0))).abs() < 1e-15);
        // odd truncated at t = 3
        let k = nbw_kernel(m, 4).unwrap();
        let odd_t3 = 2.0 * lambda.powi(3) * k.point_prob(3, 1).unwrap()
            + 2.0 * lambda.powi(4) * k.point_prob(4, 1).unwrap();
        assert!((lace_sum_odd(m, p, 2).unwrap() - odd_t3).abs() < 1e-15);
        assert_eq!(lace_sum_even(m, 0.0, 30).unwrap(), 0.0);
        assert_eq!(lace_sum_odd(m, 0.0, 30).unwrap(), 0.0);
    }

    #[test]
    fn q52_closed_form() {
        // q[4][2] = 3(m-2)/(m-1)^2 and q[5][1] = (6m-11)/(m-1)^3, both by
        // unrolling the chain two and three steps past (2, Up)
        for m in 3..=30u32 {
            let mf = m as f64;
            let k = nbw_kernel(m, 5).unwrap();
            let q42 = 3.0 * (mf - 2.0) / ((mf - 1.0) * (mf - 1.0));
            assert!((k.weight_prob(4, 2).unwrap() - q42).abs() < 1e-14);
            let q51 = (6.0 * mf - 11.0) / (mf - 1.0).powi(3);
            assert!((k.weight_prob(5, 1).unwrap() - q51).abs() < 1e-14);
        }
    }

    #[test]
    fn binomials_agree_in_range() {
        for n in 0..=64u64 {
            for k in 0..=n {
                assert_eq!(binomial(n, k).unwrap() as f64, binomial_f64(n, k));
            }
        }
    }
}
