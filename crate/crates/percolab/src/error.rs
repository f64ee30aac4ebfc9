use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for graph with {vertex_count} vertices")]
    VertexOutOfRange { vertex: u64, vertex_count: u64 },

    #[error("edge index {edge} out of range for graph with {edge_count} edges")]
    EdgeOutOfRange { edge: u64, edge_count: u64 },

    #[error("vertices {u} and {v} are not adjacent")]
    NotAdjacent { u: u64, v: u64 },

    #[error("hypercube dimension {m} outside supported range 1..=30")]
    DimensionOutOfRange { m: u32 },

    #[error("complete graph needs at least 2 vertices, got {n}")]
    TooFewVertices { n: u64 },

    #[error("exact binomial arithmetic supports n <= 64, got n = {n}")]
    BinomialOverflow { n: u64 },

    #[error("non-backtracking walk needs degree >= 2 (m >= 2), got m = {m}")]
    DegreeTooSmall { m: u32 },

    #[error("kernel horizon {horizon} exceeded by query t = {t}")]
    HorizonExceeded { t: usize, horizon: usize },

    #[error("uniform mixing time did not converge within horizon cap {cap} (m = {m}, slack = {delta})")]
    MixingNotConverged { m: u32, delta: f64, cap: usize },

    #[error("computed path count {value} is not an integer within relative tolerance {tol}")]
    NonIntegerPathCount { value: f64, tol: f64 },

    #[error("memory budget exceeded: {need_mb} MiB needed, {budget_mb} MiB allowed (set PERCOLAB_MEM_BUDGET_MB to raise)")]
    MemoryBudget { need_mb: u64, budget_mb: u64 },

    #[error("enumeration budget exceeded: {need} > {max}")]
    EnumerationBudget { need: u128, max: u128 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("sprinkle plan infeasible: p2 = {p2} must lie in [0, p] with p = {p}")]
    SprinkleInfeasible { p: f64, p2: f64 },

    #[error("bisection bracket [{lo}, {hi}] does not straddle target chi = {target}: chi(lo) = {chi_lo} +- {stderr_lo}, chi(hi) = {chi_hi} +- {stderr_hi}")]
    BracketInvalid {
        lo: f64,
        hi: f64,
        target: f64,
        chi_lo: f64,
        stderr_lo: f64,
        chi_hi: f64,
        stderr_hi: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
