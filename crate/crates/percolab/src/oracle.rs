//! Brute-force ground truth on tiny instances.
//!
//! Percolation functionals are exact expectations over all `2^E` edge
//! subsets; NBW distributions come from enumerating every non-backtracking
//! path. Values are computed at test time, never shipped as constants.

use crate::error::{Error, Result};
use crate::graph::{GraphSpec, VertexId};

/// Hard limits enforced before any enumeration starts.
#[derive(Debug, Clone, Copy)]
pub struct EnumerationBudget {
    pub max_edges: u32,
    pub max_paths: u128,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget { max_edges: 25, max_paths: 100_000_000 }
    }
}

fn check_edges(spec: &GraphSpec, budget: &EnumerationBudget) -> Result<()> {
    let e = spec.edge_count();
    if e > budget.max_edges as u64 {
        return Err(Error::EnumerationBudget {
            need: e as u128,
            max: budget.max_edges as u128,
        });
    }
    Ok(())
}

/// Per-subset-size weights `p^k (1-p)^(E-k)`, computed in log space so the
/// extreme classes at E = 25 do not underflow in intermediate products.
fn subset_weights(edges: u32, p: f64) -> Vec<f64> {
    let e = edges as i32;
    (0..=edges)
        .map(|k| {
            let k = k as i32;
            if p == 0.0 {
                return if k == 0 { 1.0 } else { 0.0 };
            }
            if p == 1.0 {
                return if k == e { 1.0 } else { 0.0 };
            }
            (k as f64 * p.ln() + (e - k) as f64 * (1.0 - p).ln()).exp()
        })
        .collect()
}

/// Exact `E_p[f]` over all edge subsets; `f` sees the subset as a bitmask
/// over canonical edge indices.
pub fn exact_functional(
    spec: &GraphSpec,
    p: f64,
    budget: &EnumerationBudget,
    mut f: impl FnMut(u32) -> f64,
) -> Result<f64> {
    check_edges(spec, budget)?;
    let e = spec.edge_count() as u32;
    let weights = subset_weights(e, p);
    let mut total = 0.0;
    for subset in 0..(1u64 << e) {
        let w = weights[(subset.count_ones()) as usize];
        if w > 0.0 {
            total += w * f(subset as u32);
        }
    }
    Ok(total)
}

/// Scratch components for one subset: vertex -> component label.
fn components(spec: &GraphSpec, subset: u32, labels: &mut [u32]) {
    let v = spec.vertex_count() as usize;
    for (i, l) in labels.iter_mut().enumerate().take(v) {
        *l = i as u32;
    }
    // tiny union-find, path halving inline
    fn find(labels: &mut [u32], mut x: u32) -> u32 {
        while labels[x as usize] != x {
            let g = labels[labels[x as usize] as usize];
            labels[x as usize] = g;
            x = g;
        }
        x
    }
    for e in 0..spec.edge_count() {
        if subset & (1 << e) != 0 {
            let (a, b) = spec.edge_endpoints(crate::graph::EdgeId(e)).unwrap();
            let ra = find(labels, a.0 as u32);
            let rb = find(labels, b.0 as u32);
            if ra != rb {
                labels[ra.max(rb) as usize] = ra.min(rb);
            }
        }
    }
    for i in 0..v {
        let r = find(labels, i as u32);
        labels[i] = r;
    }
}

/// Exact susceptibility `E_p |C(x)|`.
pub fn exact_chi(spec: &GraphSpec, p: f64, x: VertexId, budget: &EnumerationBudget) -> Result<f64> {
    let v = spec.vertex_count() as usize;
    let mut labels = vec![0u32; v];
    exact_functional(spec, p, budget, |subset| {
        components(spec, subset, &mut labels);
        let root = labels[x.0 as usize];
        labels.iter().filter(|&&l| l == root).count() as f64
    })
}

/// Exact two-point function `P_p(x <-> y)`.
pub fn exact_two_point(
    spec: &GraphSpec,
    p: f64,
    x: VertexId,
    y: VertexId,
    budget: &EnumerationBudget,
) -> Result<f64> {
    let v = spec.vertex_count() as usize;
    let mut labels = vec![0u32; v];
    exact_functional(spec, p, budget, |subset| {
        components(spec, subset, &mut labels);
        (labels[x.0 as usize] == labels[y.0 as usize]) as u32 as f64
    })
}

/// Exact triangle diagram `sum_{u,v} P(x<->u) P(u<->v) P(v<->y)`, assembled
/// from the exact two-point table.
pub fn exact_triangle(
    spec: &GraphSpec,
    p: f64,
    x: VertexId,
    y: VertexId,
    budget: &EnumerationBudget,
) -> Result<f64> {
    check_edges(spec, budget)?;
    let v = spec.vertex_count() as usize;
    // all-pairs connection probabilities in one enumeration pass
    let mut table = vec![0.0f64; v * v];
    let e = spec.edge_count() as u32;
    let weights = subset_weights(e, p);
    let mut labels = vec![0u32; v];
    for subset in 0..(1u64 << e) {
        let w = weights[subset.count_ones() as usize];
        if w == 0.0 {
            continue;
        }
        components(spec, subset as u32, &mut labels);
        for a in 0..v {
            for b in 0..v {
                if labels[a] == labels[b] {
                    table[a * v + b] += w;
                }
            }
        }
    }
    let mut nabla = 0.0;
    for u in 0..v {
        let xu = table[x.0 as usize * v + u];
        let mut inner = 0.0;
        for w in 0..v {
            inner += table[u * v + w] * table[w * v + y.0 as usize];
        }
        nabla += xu * inner;
    }
    Ok(nabla)
}

/// Exact expected boundary sizes `E|∂B_x(k)|` for k = 0..=kmax.
pub fn exact_ball_levels(
    spec: &GraphSpec,
    p: f64,
    x: VertexId,
    kmax: usize,
    budget: &EnumerationBudget,
) -> Result<Vec<f64>> {
    check_edges(spec, budget)?;
    let v = spec.vertex_count() as usize;
    let e = spec.edge_count() as u32;
    let weights = subset_weights(e, p);
    let mut levels = vec![0.0f64; kmax + 1];
    let mut dist = vec![u32::MAX; v];
    let mut queue = Vec::with_capacity(v);
    for subset in 0..(1u64 << e) {
        let w = weights[subset.count_ones() as usize];
        if w == 0.0 {
            continue;
        }
        // BFS over open edges
        dist.fill(u32::MAX);
        queue.clear();
        dist[x.0 as usize] = 0;
        queue.push(x.0 as u32);
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head];
            head += 1;
            for nb in spec.neighbors(VertexId(u as u64)).unwrap() {
                let eid = spec.canonical_edge(VertexId(u as u64), nb).unwrap();
                if subset & (1 << eid.0) != 0 && dist[nb.0 as usize] == u32::MAX {
                    dist[nb.0 as usize] = dist[u as usize] + 1;
                    queue.push(nb.0 as u32);
                }
            }
        }
        for &d in dist.iter() {
            if d != u32::MAX && (d as usize) <= kmax {
                levels[d as usize] += w;
            }
        }
    }
    Ok(levels)
}

/// Endpoint distribution of the length-t non-backtracking walk from 0,
/// by enumerating all `m (m-1)^(t-1)` paths with equal weight.
pub fn nbw_brute(m: u32, t: usize, budget: &EnumerationBudget) -> Result<Vec<f64>> {
    if m < 2 {
        return Err(Error::DegreeTooSmall { m });
    }
    let paths: u128 = if t == 0 {
        1
    } else {
        m as u128 * (m as u128 - 1).pow(t as u32 - 1)
    };
    if paths > budget.max_paths {
        return Err(Error::EnumerationBudget { need: paths, max: budget.max_paths });
    }
    let v = 1usize << m;
    let mut counts = vec![0u64; v];
    if t == 0 {
        counts[0] = 1;
    } else {
        // iterative stack of (vertex, last axis, depth)
        let mut stack = Vec::with_capacity(t * m as usize);
        for axis in 0..m {
            stack.push((1u64 << axis, axis, 1usize));
        }
        while let Some((vertex, last, depth)) = stack.pop() {
            if depth == t {
                counts[vertex as usize] += 1;
                continue;
            }
            for axis in 0..m {
                if axis != last {
                    stack.push((vertex ^ (1u64 << axis), axis, depth + 1));
                }
            }
        }
    }
    let total = paths as f64;
    Ok(counts.into_iter().map(|c| c as f64 / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budget() -> EnumerationBudget {
        EnumerationBudget::default()
    }

    #[test]
    fn probabilities_sum_to_one() {
        let spec = GraphSpec::hypercube(2).unwrap();
        for p in [0.0, 0.2, 0.5, 0.9, 1.0] {
            let total = exact_functional(&spec, p, &budget(), |_| 1.0).unwrap();
            assert!((total - 1.0).abs() < 1e-12, "p={p}: {total}");
        }
    }

    #[test]
    fn open_edge_count_mean() {
        let spec = GraphSpec::hypercube(2).unwrap();
        let mean = exact_functional(&spec, 0.3, &budget(), |s| s.count_ones() as f64).unwrap();
        assert!((mean - 1.2).abs() < 1e-12);
    }

    #[test]
    fn indicator_complement() {
        let spec = GraphSpec::hypercube(2).unwrap();
        let f = |s: u32| (s.count_ones() >= 2) as u32 as f64;
        let a = exact_functional(&spec, 0.37, &budget(), f).unwrap();
        let b = exact_functional(&spec, 0.37, &budget(), |s| 1.0 - f(s)).unwrap();
        assert!((a + b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chi_single_edge() {
        let spec = GraphSpec::hypercube(1).unwrap();
        for p in [0.0, 0.25, 0.7, 1.0] {
            let chi = exact_chi(&spec, p, VertexId(0), &budget()).unwrap();
            assert!((chi - (1.0 + p)).abs() < 1e-12);
        }
    }

    #[test]
    fn two_point_four_cycle() {
        // adjacent pair on the 4-cycle: direct edge, or the other three edges
        let spec = GraphSpec::hypercube(2).unwrap();
        for p in [0.1, 0.3, 0.8] {
            let got = exact_two_point(&spec, p, VertexId(0), VertexId(1), &budget()).unwrap();
            let expect = p + (1.0 - p) * p * p * p;
            assert!((got - expect).abs() < 1e-12, "p={p}");
        }
        let at_one = exact_two_point(&spec, 1.0, VertexId(0), VertexId(3), &budget()).unwrap();
        assert!((at_one - 1.0).abs() < 1e-15);
    }

    #[test]
    fn triangle_at_p_zero() {
        for spec in [GraphSpec::hypercube(2).unwrap(), GraphSpec::complete(4).unwrap()] {
            let same = exact_triangle(&spec, 0.0, VertexId(1), VertexId(1), &budget()).unwrap();
            assert!((same - 1.0).abs() < 1e-12);
            let diff = exact_triangle(&spec, 0.0, VertexId(0), VertexId(1), &budget()).unwrap();
            assert!(diff.abs() < 1e-12);
        }
    }

    #[test]
    fn ball_levels_full_cube() {
        let spec = GraphSpec::hypercube(3).unwrap();
        let levels = exact_ball_levels(&spec, 1.0, VertexId(0), 3, &budget()).unwrap();
        assert_eq!(levels.len(), 4);
        for (k, &l) in levels.iter().enumerate() {
            let expect = crate::graph::binomial(3, k as u64).unwrap() as f64;
            assert!((l - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn budget_rejects_large_graphs() {
        let spec = GraphSpec::hypercube(4).unwrap(); // 32 edges
        assert!(matches!(
            exact_chi(&spec, 0.5, VertexId(0), &budget()),
            Err(Error::EnumerationBudget { .. })
        ));
    }

    #[test]
    fn brute_nbw_small_cases() {
        // m=3, t=2: mass 2/6 on each of the three weight-2 vertices
        let d = nbw_brute(3, 2, &budget()).unwrap();
        for (v, &mass) in d.iter().enumerate() {
            let expect = if (v as u64).count_ones() == 2 { 2.0 / 6.0 } else { 0.0 };
            assert!((mass - expect).abs() < 1e-15, "v={v}");
        }
        // m=3, t=3: mass 1/6 on each weight-1 vertex, remainder on weight 3
        let d = nbw_brute(3, 3, &budget()).unwrap();
        for (v, &mass) in d.iter().enumerate() {
            let expect = match (v as u64).count_ones() {
                1 => 1.0 / 6.0,
                3 => 0.5,
                _ => 0.0,
            };
            assert!((mass - expect).abs() < 1e-15, "v={v}");
        }
        // any m, t=1: uniform on weight-1 vertices
        let d = nbw_brute(5, 1, &budget()).unwrap();
        for (v, &mass) in d.iter().enumerate() {
            let expect = if (v as u64).count_ones() == 1 { 0.2 } else { 0.0 };
            assert!((mass - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn brute_path_budget() {
        let tight = EnumerationBudget { max_edges: 25, max_paths: 10 };
        assert!(nbw_brute(4, 5, &tight).is_err());
    }

    #[test]
    fn brute_uniform_within_weight_classes() {
        let b = budget();
        for m in 2..=6u32 {
            for t in 0..=7usize {
                let d = nbw_brute(m, t, &b).unwrap();
                for w in 0..=m {
                    let class: Vec<f64> = (0..(1u64 << m))
                        .filter(|v| v.count_ones() == w)
                        .map(|v| d[v as usize])
                        .collect();
                    for &mass in &class {
                        assert!(
                            (mass - class[0]).abs() <= 1e-12,
                            "m={m} t={t} w={w}: class not uniform"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn brute_matches_kernel_marginals() {
        let b = budget();
        for m in 2..=6u32 {
            let kernel = crate::nbw::nbw_kernel(m, 7).unwrap();
            for t in 0..=7usize {
                let d = nbw_brute(m, t, &b).unwrap();
                for w in 0..=m {
                    let marginal: f64 = (0..(1u64 << m))
                        .filter(|v| v.count_ones() == w)
                        .map(|v| d[v as usize])
                        .sum();
                    let q = kernel.weight_prob(t, w).unwrap();
                    assert!(
                        (marginal - q).abs() <= 1e-12,
                        "m={m} t={t} w={w}: brute {marginal} vs kernel {q}"
                    );
                }
            }
        }
    }
}
