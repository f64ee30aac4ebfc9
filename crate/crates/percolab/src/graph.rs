//! Implicit graphs: the Hamming hypercube `{0,1}^m` and the complete graph `K_n`.
//!
//! Vertices are integers below the vertex count; on the hypercube the integer
//! is the coordinate bitmask. Edges carry a canonical dense index in
//! `[0, edge_count)` so that per-edge randomness can be addressed without
//! materializing the graph.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A vertex identifier; for the hypercube this is the m-bit coordinate mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub u64);

/// A canonical dense edge index in `[0, edge_count)`.
///
/// Hypercube: `index = strip_bit(base, axis) * m + axis` where `base` is the
/// endpoint with bit `axis` clear and `strip_bit` removes that bit position,
/// making the pair map a bijection onto `[0, m * 2^(m-1))`.
/// Complete graph: index of the pair `(min, max)` in lexicographic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId(pub u64);

/// The implicit graph family under study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphSpec {
    /// Hamming hypercube `{0,1}^m`, dimension 1..=30.
    Hypercube { m: u32 },
    /// Complete graph on `n >= 2` vertices.
    Complete { n: u64 },
}

impl GraphSpec {
    pub fn hypercube(m: u32) -> Result<Self> {
        if !(1..=30).contains(&m) {
            return Err(Error::DimensionOutOfRange { m });
        }
        Ok(GraphSpec::Hypercube { m })
    }

    pub fn complete(n: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewVertices { n });
        }
        Ok(GraphSpec::Complete { n })
    }

    pub fn vertex_count(&self) -> u64 {
        match *self {
            GraphSpec::Hypercube { m } => 1u64 << m,
            GraphSpec::Complete { n } => n,
        }
    }

    pub fn degree(&self) -> u64 {
        match *self {
            GraphSpec::Hypercube { m } => m as u64,
            GraphSpec::Complete { n } => n - 1,
        }
    }

    pub fn edge_count(&self) -> u64 {
        match *self {
            GraphSpec::Hypercube { m } => (m as u64) << (m - 1),
            GraphSpec::Complete { n } => n * (n - 1) / 2,
        }
    }

    fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v.0 >= self.vertex_count() {
            return Err(Error::VertexOutOfRange {
                vertex: v.0,
                vertex_count: self.vertex_count(),
            });
        }
        Ok(())
    }

    /// All neighbors of `v`, in ascending axis order for the hypercube and
    /// ascending id order for the complete graph.
    pub fn neighbors(&self, v: VertexId) -> Result<Vec<VertexId>> {
        self.check_vertex(v)?;
        match *self {
            GraphSpec::Hypercube { m } => {
                Ok((0..m).map(|axis| VertexId(v.0 ^ (1u64 << axis))).collect())
            }
            GraphSpec::Complete { n } => {
                Ok((0..n).filter(|&u| u != v.0).map(VertexId).collect())
            }
        }
    }

    /// Canonical index of the edge `{u, v}`; symmetric in its arguments.
    pub fn canonical_edge(&self, u: VertexId, v: VertexId) -> Result<EdgeId> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        match *self {
            GraphSpec::Hypercube { m } => {
                let x = u.0 ^ v.0;
                if x == 0 || !x.is_power_of_two() || x >= (1u64 << m) {
                    return Err(Error::NotAdjacent { u: u.0, v: v.0 });
                }
                let axis = x.trailing_zeros();
                let base = u.0 & !x;
                Ok(EdgeId(hypercube_edge_index(m, base, axis)))
            }
            GraphSpec::Complete { n } => {
                if u == v {
                    return Err(Error::NotAdjacent { u: u.0, v: v.0 });
                }
                let (i, j) = (u.0.min(v.0), u.0.max(v.0));
                Ok(EdgeId(pair_index(n, i, j)))
            }
        }
    }

    /// Endpoints of a canonical edge index, smaller endpoint first.
    pub fn edge_endpoints(&self, e: EdgeId) -> Result<(VertexId, VertexId)> {
        if e.0 >= self.edge_count() {
            return Err(Error::EdgeOutOfRange {
                edge: e.0,
                edge_count: self.edge_count(),
            });
        }
        match *self {
            GraphSpec::Hypercube { m } => {
                let axis = (e.0 % m as u64) as u32;
                let stripped = e.0 / m as u64;
                let base = insert_zero_bit(stripped, axis);
                Ok((VertexId(base), VertexId(base | (1u64 << axis))))
            }
            GraphSpec::Complete { n } => {
                let (i, j) = pair_from_index(n, e.0);
                Ok((VertexId(i), VertexId(j)))
            }
        }
    }
}

/// Edge index for the hypercube given the endpoint with bit `axis` clear.
#[inline(always)]
pub(crate) fn hypercube_edge_index(m: u32, base: u64, axis: u32) -> u64 {
    let stripped = ((base >> (axis + 1)) << axis) | (base & ((1u64 << axis) - 1));
    stripped * m as u64 + axis as u64
}

/// Re-insert a zero bit at position `axis`.
#[inline(always)]
pub(crate) fn insert_zero_bit(stripped: u64, axis: u32) -> u64 {
    ((stripped >> axis) << (axis + 1)) | (stripped & ((1u64 << axis) - 1))
}

/// Lexicographic index of the pair `(i, j)` with `i < j` among all pairs of `n`.
#[inline(always)]
pub(crate) fn pair_index(n: u64, i: u64, j: u64) -> u64 {
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

pub(crate) fn pair_from_index(n: u64, idx: u64) -> (u64, u64) {
    // first i with cumulative pair count exceeding idx; start from the
    // quadratic estimate and fix up
    let nf = n as f64;
    let mut i = (nf - 0.5 - ((nf - 0.5) * (nf - 0.5) - 2.0 * idx as f64).max(0.0).sqrt()) as u64;
    i = i.min(n - 2);
    while i > 0 && row_start(n, i) > idx {
        i -= 1;
    }
    while row_start(n, i + 1) <= idx {
        i += 1;
    }
    let j = idx - row_start(n, i) + i + 1;
    (i, j)
}

#[inline(always)]
fn row_start(n: u64, i: u64) -> u64 {
    i * n - i * (i + 1) / 2
}

/// Hamming distance between two hypercube vertices.
#[inline(always)]
pub fn hamming_distance(u: VertexId, v: VertexId) -> u32 {
    (u.0 ^ v.0).count_ones()
}

/// Exact binomial coefficient; errors for n > 64 rather than losing precision.
pub fn binomial(n: u64, k: u64) -> Result<u64> {
    if n > 64 {
        return Err(Error::BinomialOverflow { n });
    }
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 1..=k {
        r = r * (n - k + i) as u128 / i as u128;
    }
    Ok(r as u64)
}

/// Binomial coefficient in double precision, for dimensions beyond exact range.
pub fn binomial_f64(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut r = 1.0f64;
    for i in 1..=k {
        r = r * (n - k + i) as f64 / i as f64;
    }
    r
}

/// Hamming-scheme intersection number: the number of vertices `u` of weight
/// `w1` at distance `w2` from a fixed vertex `y` of weight `w`. Equals
/// `C(w, j) * C(m - w, w1 - j)` with `j = (w + w1 - w2) / 2` when feasible,
/// else 0.
pub fn intersection_number(m: u32, w: u32, w1: u32, w2: u32) -> Result<u64> {
    if m > 64 {
        return Err(Error::BinomialOverflow { n: m as u64 });
    }
    if w > m || w1 > m || w2 > m {
        return Ok(0);
    }
    let s = w + w1;
    if w2 > s || (s - w2) % 2 != 0 {
        return Ok(0);
    }
    let j = (s - w2) / 2;
    if j > w || j > w1 || w1 - j > m - w {
        return Ok(0);
    }
    Ok(binomial(w as u64, j as u64)? * binomial((m - w) as u64, (w1 - j) as u64)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hypercube_counts() {
        let g = GraphSpec::hypercube(3).unwrap();
        assert_eq!(g.vertex_count(), 8);
        assert_eq!(g.degree(), 3);
        assert_eq!(g.edge_count(), 12);
    }

    #[test]
    fn complete_counts() {
        let g = GraphSpec::complete(5).unwrap();
        assert_eq!(g.vertex_count(), 5);
        assert_eq!(g.degree(), 4);
        assert_eq!(g.edge_count(), 10);
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(GraphSpec::hypercube(0).is_err());
        assert!(GraphSpec::hypercube(31).is_err());
        assert!(GraphSpec::complete(1).is_err());
    }

    #[test]
    fn hypercube_neighbors() {
        let g = GraphSpec::hypercube(3).unwrap();
        let n: Vec<u64> = g.neighbors(VertexId(0)).unwrap().iter().map(|v| v.0).collect();
        assert_eq!(n, vec![0b001, 0b010, 0b100]);

        let g2 = GraphSpec::hypercube(2).unwrap();
        let n2: Vec<u64> = g2.neighbors(VertexId(0b11)).unwrap().iter().map(|v| v.0).collect();
        assert_eq!(n2, vec![0b10, 0b01]);
    }

    #[test]
    fn complete_neighbors() {
        let g = GraphSpec::complete(4).unwrap();
        let n: Vec<u64> = g.neighbors(VertexId(2)).unwrap().iter().map(|v| v.0).collect();
        assert_eq!(n, vec![0, 1, 3]);
    }

    #[test]
    fn neighbors_rejects_out_of_range() {
        let g = GraphSpec::hypercube(2).unwrap();
        assert!(g.neighbors(VertexId(4)).is_err());
    }

    #[test]
    fn canonical_edge_examples() {
        let g = GraphSpec::hypercube(3).unwrap();
        assert_eq!(g.canonical_edge(VertexId(0b000), VertexId(0b001)).unwrap(), EdgeId(0));
        // base 0b100 with bit 0 stripped is 0b10, so index 2*3 + 0
        assert_eq!(g.canonical_edge(VertexId(0b101), VertexId(0b100)).unwrap(), EdgeId(6));

        let k3 = GraphSpec::complete(3).unwrap();
        assert_eq!(k3.canonical_edge(VertexId(2), VertexId(1)).unwrap(), EdgeId(2));
    }

    #[test]
    fn canonical_edge_rejects_non_adjacent() {
        let g = GraphSpec::hypercube(3).unwrap();
        assert!(g.canonical_edge(VertexId(0), VertexId(0b011)).is_err());
        assert!(g.canonical_edge(VertexId(0), VertexId(0)).is_err());
    }

    #[test]
    fn edge_index_is_a_bijection() {
        // every spec with V <= 2^12: canonical_edge over all adjacent pairs
        // hits every index in [0, E) exactly once
        let mut specs = vec![];
        for m in 1..=12 {
            specs.push(GraphSpec::hypercube(m).unwrap());
        }
        for n in [2u64, 3, 5, 17, 100] {
            specs.push(GraphSpec::complete(n).unwrap());
        }
        for g in specs {
            let e = g.edge_count() as usize;
            let mut seen = vec![0u32; e];
            for v in 0..g.vertex_count() {
                for u in g.neighbors(VertexId(v)).unwrap() {
                    let id = g.canonical_edge(VertexId(v), u).unwrap();
                    assert_eq!(id, g.canonical_edge(u, VertexId(v)).unwrap());
                    seen[id.0 as usize] += 1;
                    let (a, b) = g.edge_endpoints(id).unwrap();
                    assert!((a, b) == (VertexId(v.min(u.0)), VertexId(v.max(u.0)))
                        || (a.0 == v.min(u.0) && b.0 == v.max(u.0)));
                }
            }
            // each unordered pair visited from both endpoints
            assert!(seen.iter().all(|&c| c == 2), "not a bijection for {g:?}");
        }
    }

    #[test]
    fn neighbors_symmetric_exhaustive() {
        for g in [GraphSpec::hypercube(10).unwrap(), GraphSpec::complete(40).unwrap()] {
            for v in 0..g.vertex_count() {
                for u in g.neighbors(VertexId(v)).unwrap() {
                    assert!(g.neighbors(u).unwrap().contains(&VertexId(v)));
                }
            }
        }
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming_distance(VertexId(0), VertexId(0b11)), 2);
        assert_eq!(hamming_distance(VertexId(0), VertexId(0)), 0);
        assert_eq!(hamming_distance(VertexId(0b1010), VertexId(0b0110)), 2);
    }

    #[test]
    fn binomial_exact() {
        assert_eq!(binomial(4, 2).unwrap(), 6);
        assert_eq!(binomial(64, 32).unwrap(), 1832624140942590534);
        assert_eq!(binomial(5, 9).unwrap(), 0);
        assert!(binomial(65, 2).is_err());
    }

    #[test]
    fn intersection_examples() {
        assert_eq!(intersection_number(4, 0, 2, 2).unwrap(), 6);
        // enumerate {0,1}^4 against a fixed weight-1 vertex
        let y = 0b0001u64;
        let expected = (0..16u64)
            .filter(|&u| u.count_ones() == 1 && (u ^ y).count_ones() == 2)
            .count() as u64;
        assert_eq!(intersection_number(4, 1, 1, 2).unwrap(), expected);
        assert_eq!(expected, 3);
        assert_eq!(intersection_number(3, 1, 2, 5).unwrap(), 0);
    }

    #[test]
    fn intersection_rows_sum_to_binomial() {
        for m in 1..=8u32 {
            for w in 0..=m {
                for w1 in 0..=m {
                    let total: u64 = (0..=m)
                        .map(|w2| intersection_number(m, w, w1, w2).unwrap())
                        .sum();
                    assert_eq!(total, binomial(m as u64, w1 as u64).unwrap());
                }
            }
        }
    }

    proptest! {
        #[test]
        fn pair_index_roundtrip(n in 2u64..2000, idx_frac in 0.0f64..1.0) {
            let e = n * (n - 1) / 2;
            let idx = ((e as f64 - 1.0) * idx_frac) as u64;
            let (i, j) = pair_from_index(n, idx);
            prop_assert!(i < j && j < n);
            prop_assert_eq!(pair_index(n, i, j), idx);
        }

        #[test]
        fn intersection_matches_enumeration(m in 1u32..=6, w in 0u32..=6, w1 in 0u32..=6, w2 in 0u32..=6) {
            prop_assume!(w <= m && w1 <= m && w2 <= m);
            let y = (1u64 << w) - 1; // weight-w vertex
            let count = (0..(1u64 << m))
                .filter(|&u| u.count_ones() == w1 && (u ^ y).count_ones() == w2)
                .count() as u64;
            prop_assert_eq!(intersection_number(m, w, w1, w2).unwrap(), count);
        }
    }
}
