//! Deterministic bond-percolation sampling and cluster analysis.
//!
//! Edge states are never stored: an [`EdgeSampler`] answers open/closed from
//! the counter PRF, so exploration needs O(cluster) memory, double queries
//! agree by construction, and configurations at p <= p' are monotone-coupled
//! through shared PRF values.

use serde::Serialize;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{hypercube_edge_index, EdgeId, GraphSpec, VertexId};
use crate::prf;
use crate::union_find::UnionFind;

/// One percolation layer: deterministic Bernoulli(p) per canonical edge.
#[derive(Debug, Clone, Copy)]
pub struct EdgeSampler {
    pub master_seed: u64,
    pub trial: u64,
    pub stream: u64,
    pub p: f64,
    key: u64,
    threshold: u64,
}

impl EdgeSampler {
    pub fn new(master_seed: u64, trial: u64, stream: u64, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidConfig(format!("retention probability {p} outside [0, 1]")));
        }
        Ok(EdgeSampler {
            master_seed,
            trial,
            stream,
            p,
            key: prf::stream_key(master_seed, trial, stream),
            threshold: prf::threshold_for(p),
        })
    }

    /// Open/closed state of edge `e`; `open(e) <=> PRF(...) < round(p 2^64)`.
    #[inline(always)]
    pub fn is_open(&self, e: EdgeId) -> bool {
        self.open_raw(e.0)
    }

    #[inline(always)]
    pub(crate) fn open_raw(&self, edge_index: u64) -> bool {
        if self.threshold == u64::MAX {
            return true;
        }
        prf::edge_value(self.key, edge_index) < self.threshold
    }
}

/// Memory gate for whole-graph sweeps. The default budget of 4096 MiB admits
/// the hypercube up to m = 26 and the complete graph up to n = 10^5; raising
/// `PERCOLAB_MEM_BUDGET_MB` scales both caps linearly.
#[derive(Debug, Clone, Copy)]
pub struct MemoryBudget {
    pub budget_mb: u64,
}

pub const DEFAULT_BUDGET_MB: u64 = 4096;

impl Default for MemoryBudget {
    fn default() -> Self {
        MemoryBudget { budget_mb: DEFAULT_BUDGET_MB }
    }
}

impl MemoryBudget {
    pub fn from_env() -> Self {
        let budget_mb = std::env::var("PERCOLAB_MEM_BUDGET_MB")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(DEFAULT_BUDGET_MB);
        MemoryBudget { budget_mb }
    }

    pub fn check_sweep(&self, spec: &GraphSpec) -> Result<()> {
        let allowed = match spec {
            GraphSpec::Hypercube { .. } => (1u64 << 26) * self.budget_mb / DEFAULT_BUDGET_MB,
            GraphSpec::Complete { .. } => 100_000 * self.budget_mb / DEFAULT_BUDGET_MB,
        };
        let v = spec.vertex_count();
        if v > allowed {
            return Err(Error::MemoryBudget {
                need_mb: v * 10 / (1 << 20),
                budget_mb: self.budget_mb,
            });
        }
        Ok(())
    }
}

/// Component statistics of one sampled configuration.
#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub vertex_count: u64,
    /// Sorted (size, count) histogram of component sizes.
    pub size_histogram: Vec<(u64, u64)>,
    /// Largest component size.
    pub c1: u64,
    /// Second-largest component size; 0 when only one component exists.
    pub c2: u64,
    pub open_edge_count: u64,
}

impl SweepSummary {
    fn from_union_find(uf: &UnionFind, open_edge_count: u64) -> Self {
        let mut hist: BTreeMap<u64, u64> = BTreeMap::new();
        uf.for_each_root(|_, size| {
            *hist.entry(size as u64).or_insert(0) += 1;
        });
        let size_histogram: Vec<(u64, u64)> = hist.into_iter().collect();
        let mut c1 = 0;
        let mut c2 = 0;
        for &(size, count) in size_histogram.iter().rev() {
            if c1 == 0 {
                c1 = size;
                if count >= 2 {
                    c2 = size;
                }
            } else if c2 == 0 {
                c2 = size;
            }
            if c2 != 0 {
                break;
            }
        }
        SweepSummary {
            vertex_count: uf.len() as u64,
            size_histogram,
            c1,
            c2,
            open_edge_count,
        }
    }

    /// `Z_{>=k}`: number of vertices in components of size at least k.
    pub fn z_at_least(&self, k: u64) -> u64 {
        self.size_histogram
            .iter()
            .filter(|(size, _)| *size >= k)
            .map(|(size, count)| size * count)
            .sum()
    }

    /// Per-configuration susceptibility `sum_j |C_j|^2 / V = avg_v |C(v)|`.
    pub fn chi_per_vertex(&self) -> f64 {
        let sum: f64 = self
            .size_histogram
            .iter()
            .map(|&(size, count)| size as f64 * size as f64 * count as f64)
            .sum();
        sum / self.vertex_count as f64
    }

    pub fn component_count(&self) -> u64 {
        self.size_histogram.iter().map(|(_, c)| c).sum()
    }
}

/// Intrinsic-ball growth record: `levels[k] = |∂B_v(k)|`.
#[derive(Debug, Clone, Serialize)]
pub struct BallGrowth {
    pub levels: Vec<u64>,
    pub cumulative: Vec<u64>,
}

/// Reusable BFS workspace; stamps avoid clearing the visited array per call.
pub struct Explorer {
    spec: GraphSpec,
    stamp: Vec<u32>,
    generation: u32,
    queue: Vec<u32>,
}

impl Explorer {
    pub fn new(spec: &GraphSpec) -> Self {
        Explorer {
            spec: *spec,
            stamp: vec![0; spec.vertex_count() as usize],
            generation: 0,
            queue: Vec::with_capacity(1024),
        }
    }

    fn next_generation(&mut self) -> u32 {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.fill(0);
            self.generation = 1;
        }
        self.generation
    }

    /// Cluster of `start` under `sampler`; `cap = 0` means unlimited.
    /// Returns (vertices found, truncated); when truncated the size is the
    /// count at stop, a lower bound for the true cluster size.
    pub fn cluster(&mut self, sampler: &EdgeSampler, start: VertexId, cap: u64) -> (u64, bool) {
        let generation = self.next_generation();
        self.queue.clear();
        self.queue.push(start.0 as u32);
        self.stamp[start.0 as usize] = generation;
        let mut count = 1u64;
        if cap != 0 && count >= cap {
            return (count, true);
        }
        let mut head = 0usize;
        match self.spec {
            GraphSpec::Hypercube { m } => {
                while head < self.queue.len() {
                    let u = self.queue[head] as u64;
                    head += 1;
                    for axis in 0..m {
                        let v = u ^ (1u64 << axis);
                        if self.stamp[v as usize] == generation {
                            continue;
                        }
                        let base = u & !(1u64 << axis);
                        if sampler.open_raw(hypercube_edge_index(m, base, axis)) {
                            self.stamp[v as usize] = generation;
                            count += 1;
                            if cap != 0 && count >= cap {
                                return (count, true);
                            }
                            self.queue.push(v as u32);
                        }
                    }
                }
            }
            GraphSpec::Complete { n } => {
                while head < self.queue.len() {
                    let u = self.queue[head] as u64;
                    head += 1;
                    for v in 0..n {
                        if v == u || self.stamp[v as usize] == generation {
                            continue;
                        }
                        let e = crate::graph::pair_index(n, u.min(v), u.max(v));
                        if sampler.open_raw(e) {
                            self.stamp[v as usize] = generation;
                            count += 1;
                            if cap != 0 && count >= cap {
                                return (count, true);
                            }
                            self.queue.push(v as u32);
                        }
                    }
                }
            }
        }
        (count, false)
    }

    /// Like [`Explorer::cluster`] with `cap = 0`, also writing the cluster's
    /// vertices into `members`.
    pub fn cluster_members(
        &mut self,
        sampler: &EdgeSampler,
        start: VertexId,
        members: &mut Vec<u32>,
    ) -> u64 {
        let size = self.cluster(sampler, start, 0).0;
        members.clear();
        members.extend_from_slice(&self.queue);
        size
    }

    /// Intrinsic metric ball around `v`: BFS level sizes in the percolation
    /// configuration up to radius `kmax`.
    pub fn ball(&mut self, sampler: &EdgeSampler, v: VertexId, kmax: usize) -> BallGrowth {
        let (levels, _) = self.ball_with_members(sampler, v, kmax, None);
        levels
    }

    /// Ball BFS that can also capture the visited vertex set.
    fn ball_with_members(
        &mut self,
        sampler: &EdgeSampler,
        start: VertexId,
        kmax: usize,
        members: Option<&mut Vec<u32>>,
    ) -> (BallGrowth, u64) {
        let generation = self.next_generation();
        self.queue.clear();
        self.queue.push(start.0 as u32);
        self.stamp[start.0 as usize] = generation;
        let mut levels = vec![0u64; kmax + 1];
        levels[0] = 1;
        let mut head = 0usize;
        let mut frontier_end = 1usize;
        let mut depth = 0usize;
        while depth < kmax && head < frontier_end {
            let mut found = 0u64;
            while head < frontier_end {
                let u = self.queue[head] as u64;
                head += 1;
                match self.spec {
                    GraphSpec::Hypercube { m } => {
                        for axis in 0..m {
                            let v = u ^ (1u64 << axis);
                            if self.stamp[v as usize] == generation {
                                continue;
                            }
                            let base = u & !(1u64 << axis);
                            if sampler.open_raw(hypercube_edge_index(m, base, axis)) {
                                self.stamp[v as usize] = generation;
                                self.queue.push(v as u32);
                                found += 1;
                            }
                        }
                    }
                    GraphSpec::Complete { n } => {
                        for v in 0..n {
                            if v == u || self.stamp[v as usize] == generation {
                                continue;
                            }
                            let e = crate::graph::pair_index(n, u.min(v), u.max(v));
                            if sampler.open_raw(e) {
                                self.stamp[v as usize] = generation;
                                self.queue.push(v as u32);
                                found += 1;
                            }
                        }
                    }
                }
            }
            depth += 1;
            levels[depth] = found;
            frontier_end = self.queue.len();
        }
        if let Some(ms) = members {
            ms.clear();
            ms.extend_from_slice(&self.queue);
        }
        let mut cumulative = Vec::with_capacity(levels.len());
        let mut acc = 0u64;
        for &l in &levels {
            acc += l;
            cumulative.push(acc);
        }
        (BallGrowth { levels, cumulative }, acc)
    }
}

/// One-shot convenience wrapper over [`Explorer::cluster`].
pub fn explore_cluster(
    spec: &GraphSpec,
    sampler: &EdgeSampler,
    v: VertexId,
    cap: u64,
) -> Result<(u64, bool)> {
    if v.0 >= spec.vertex_count() {
        return Err(Error::VertexOutOfRange { vertex: v.0, vertex_count: spec.vertex_count() });
    }
    Ok(Explorer::new(spec).cluster(sampler, v, cap))
}

/// One-shot convenience wrapper over [`Explorer::ball`].
pub fn intrinsic_ball(
    spec: &GraphSpec,
    sampler: &EdgeSampler,
    v: VertexId,
    kmax: usize,
) -> Result<BallGrowth> {
    if v.0 >= spec.vertex_count() {
        return Err(Error::VertexOutOfRange { vertex: v.0, vertex_count: spec.vertex_count() });
    }
    Ok(Explorer::new(spec).ball(sampler, v, kmax))
}

/// Whole-graph union-find sweeps with reusable state.
pub struct Sweeper {
    spec: GraphSpec,
    uf: UnionFind,
}

impl Sweeper {
    pub fn new(spec: &GraphSpec, budget: &MemoryBudget) -> Result<Self> {
        budget.check_sweep(spec)?;
        Ok(Sweeper { spec: *spec, uf: UnionFind::new(spec.vertex_count() as usize) })
    }

    /// Exact component decomposition of one configuration: edges streamed in
    /// canonical order against the per-edge PRF. The same verdicts drive
    /// `explore_cluster`, so sweep and exploration always see one
    /// configuration.
    pub fn sweep(&mut self, sampler: &EdgeSampler) -> SweepSummary {
        self.sweep_where(|e| sampler.open_raw(e))
    }

    /// Sweep of the union of two layers: an edge is open when open in either.
    pub fn sweep_union(&mut self, first: &EdgeSampler, second: &EdgeSampler) -> SweepSummary {
        self.sweep_where(|e| first.open_raw(e) || second.open_raw(e))
    }

    fn sweep_where(&mut self, mut is_open: impl FnMut(u64) -> bool) -> SweepSummary {
        self.uf.reset();
        let mut open_edges = 0u64;
        match self.spec {
            GraphSpec::Hypercube { m } => {
                let mut e = 0u64;
                for stripped in 0..(1u64 << (m - 1)) {
                    for axis in 0..m {
                        if is_open(e) {
                            open_edges += 1;
                            let base = crate::graph::insert_zero_bit(stripped, axis);
                            self.uf.union(base as u32, (base | (1u64 << axis)) as u32);
                        }
                        e += 1;
                    }
                }
            }
            GraphSpec::Complete { n } => {
                let mut e = 0u64;
                for i in 0..n as u32 {
                    for j in (i + 1)..n as u32 {
                        if is_open(e) {
                            open_edges += 1;
                            self.uf.union(i, j);
                        }
                        e += 1;
                    }
                }
            }
        }
        SweepSummary::from_union_find(&self.uf, open_edges)
    }

    /// Component label of a vertex after the last sweep.
    pub fn label(&mut self, v: VertexId) -> u32 {
        self.uf.find(v.0 as u32)
    }
}

/// One-shot full sweep.
pub fn full_sweep(spec: &GraphSpec, sampler: &EdgeSampler, budget: &MemoryBudget) -> Result<SweepSummary> {
    Ok(Sweeper::new(spec, budget)?.sweep(sampler))
}

/// Two-round sprinkling decomposition of a target probability.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SprinklePlan {
    pub eps: f64,
    pub theta: f64,
    /// Target overall retention probability `p = p_c_estimate (1 + eps)`.
    pub p: f64,
    pub p1: f64,
    /// Sprinkled layer, `p2 = theta eps / m`.
    pub p2: f64,
}

/// Solve `p1 + (1 - p1) p2 = p` with `p2 = theta eps / m`, equivalently
/// `(1 - p1)(1 - p2) = 1 - p`.
pub fn sprinkle_plan(m: u32, p_c_estimate: f64, eps: f64, theta: f64) -> Result<SprinklePlan> {
    let p = p_c_estimate * (1.0 + eps);
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidConfig(format!("target p = {p} outside [0, 1]")));
    }
    let p2 = theta * eps / m as f64;
    if !(0.0..=1.0).contains(&p2) || p2 > p {
        return Err(Error::SprinkleInfeasible { p, p2 });
    }
    let p1 = (p - p2) / (1.0 - p2);
    Ok(SprinklePlan { eps, theta, p, p1, p2 })
}

/// Round-1 sweep at p1 (stream 1) plus the union with the sprinkled p2 layer
/// (stream 2). The union marginal equals p exactly by the plan identity.
pub fn sprinkled_sweep(
    spec: &GraphSpec,
    plan: &SprinklePlan,
    master_seed: u64,
    trial: u64,
    budget: &MemoryBudget,
) -> Result<(SweepSummary, SweepSummary)> {
    let mut sweeper = Sweeper::new(spec, budget)?;
    Ok(sprinkled_sweep_with(&mut sweeper, plan, master_seed, trial))
}

pub fn sprinkled_sweep_with(
    sweeper: &mut Sweeper,
    plan: &SprinklePlan,
    master_seed: u64,
    trial: u64,
) -> (SweepSummary, SweepSummary) {
    let s1 = EdgeSampler::new(master_seed, trial, 1, plan.p1).expect("plan validated p1");
    let s2 = EdgeSampler::new(master_seed, trial, 2, plan.p2).expect("plan validated p2");
    let round1 = sweeper.sweep(&s1);
    let union = sweeper.sweep_union(&s1, &s2);
    (round1, union)
}

/// Outcome of probing one vertex pair for the good-pair conditions.
#[derive(Debug, Clone, Serialize)]
pub struct GoodPairVerdict {
    pub cond1: bool,
    pub cond2: bool,
    pub cond3: bool,
    /// Counted candidate sprinkle edges between the two balls.
    pub s_count: u64,
    /// Whether the radius-(2r+r0) balls were vertex-disjoint; the count above
    /// realizes the disjoint-occurrence connective through this check and may
    /// undercount the definition when the balls touch.
    pub balls_disjoint: bool,
    pub r: usize,
    pub r0: usize,
    pub eps: f64,
    pub ball_mean_r0: f64,
}

impl GoodPairVerdict {
    pub fn good(&self) -> bool {
        self.cond1 && self.cond2 && self.cond3
    }
}

/// Default probe radii: `r = ceil(ln ln V / eps)`, `r0 = ceil(r ln V / ln ln V)`.
pub fn default_pair_radii(spec: &GraphSpec, eps: f64) -> (usize, usize) {
    let lnv = (spec.vertex_count() as f64).ln();
    let lnlnv = lnv.ln().max(1.0);
    let r = (lnlnv / eps).ceil().max(1.0) as usize;
    let r0 = (r as f64 * lnv / lnlnv).ceil() as usize;
    (r, r0)
}

/// Probe the three `(r, r0)`-good conditions for the pair (x, y).
#[allow(clippy::too_many_arguments)]
pub fn good_pair_probe(
    spec: &GraphSpec,
    sampler: &EdgeSampler,
    x: VertexId,
    y: VertexId,
    r: usize,
    r0: usize,
    eps: f64,
    ball_mean_r0: f64,
) -> Result<GoodPairVerdict> {
    if x == y {
        return Err(Error::InvalidConfig("good-pair probe needs x != y".into()));
    }
    if ball_mean_r0 <= 0.0 {
        return Err(Error::InvalidConfig("ball_mean_r0 must be positive".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidConfig(format!("eps = {eps} outside (0, 1)")));
    }
    let v = spec.vertex_count() as f64;
    let mut explorer = Explorer::new(spec);

    // condition 1: both radius-r boundaries alive, balls disjoint
    let mut ball_x = Vec::new();
    let mut ball_y = Vec::new();
    let (growth_x, _) = explorer.ball_with_members(sampler, x, r, Some(&mut ball_x));
    let (growth_y, _) = explorer.ball_with_members(sampler, y, r, Some(&mut ball_y));
    let alive = growth_x.levels[r] > 0 && growth_y.levels[r] > 0;
    let mut in_x = vec![false; spec.vertex_count() as usize];
    for &u in &ball_x {
        in_x[u as usize] = true;
    }
    let small_disjoint = ball_y.iter().all(|&u| !in_x[u as usize]);
    for &u in &ball_x {
        in_x[u as usize] = false;
    }
    let cond1 = alive && small_disjoint;

    // condition 2: both clusters reach (eps^3 V)^(1/4) eps^-2
    let cluster_floor = ((eps.powi(3) * v).powf(0.25) * eps.powi(-2)).ceil() as u64;
    let cond2 = cluster_floor >= 1
        && explorer.cluster(sampler, x, cluster_floor).1
        && explorer.cluster(sampler, y, cluster_floor).1;

    // condition 3: enough candidate edges between the radius-(2r+r0) balls
    let big = 2 * r + r0;
    let mut big_x = Vec::new();
    let mut big_y = Vec::new();
    explorer.ball_with_members(sampler, x, big, Some(&mut big_x));
    explorer.ball_with_members(sampler, y, big, Some(&mut big_y));
    let mut member_x = vec![false; spec.vertex_count() as usize];
    let mut member_y = vec![false; spec.vertex_count() as usize];
    for &u in &big_x {
        member_x[u as usize] = true;
    }
    let mut balls_disjoint = true;
    for &u in &big_y {
        if member_x[u as usize] {
            balls_disjoint = false;
        }
        member_y[u as usize] = true;
    }

    let pair_bound = eps.powi(-2) * ball_mean_r0 * ball_mean_r0;
    let mut s_count = 0u64;
    if balls_disjoint {
        let mut cache: std::collections::HashMap<u32, u64> = std::collections::HashMap::new();
        let mut ball_size = |explorer: &mut Explorer, u: u32| -> u64 {
            if let Some(&c) = cache.get(&u) {
                return c;
            }
            let (g, _) = explorer.ball_with_members(sampler, VertexId(u as u64), r + r0, None);
            let size = *g.cumulative.last().unwrap();
            cache.insert(u, size);
            size
        };
        for &u in &big_x {
            for nb in spec.neighbors(VertexId(u as u64))? {
                if !member_y[nb.0 as usize] {
                    continue;
                }
                let su = ball_size(&mut explorer, u);
                let sv = ball_size(&mut explorer, nb.0 as u32);
                if (su as f64) * (sv as f64) <= pair_bound {
                    s_count += 1;
                }
            }
        }
    }
    let s_floor = spec.degree() as f64 * eps.powi(-2) * ball_mean_r0 * ball_mean_r0 / v;
    let cond3 = balls_disjoint && (s_count as f64) >= s_floor;

    Ok(GoodPairVerdict {
        cond1,
        cond2,
        cond3,
        s_count,
        balls_disjoint,
        r,
        r0,
        eps,
        ball_mean_r0,
    })
}
