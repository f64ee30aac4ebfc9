//! Counter-based pseudorandom function for per-edge coin flips.
//!
//! Every edge state is a pure function of (master seed, trial, stream, edge
//! index), so repeated queries agree without storing configurations, and
//! coupling across retention probabilities is exact: the same uniform draw is
//! compared against different thresholds. Not cryptographic.

const GOLDEN: u64 = 0x9e3779b97f4a7c15;
const MIX_TRIAL: u64 = 0xbf58476d1ce4e5b9;
const MIX_STREAM: u64 = 0x94d049bb133111eb;

/// 64-bit finalizer (murmur3 constants); full avalanche on its input.
#[inline(always)]
pub fn fmix64(mut x: u64) -> u64 {
    x ^= x >> 33;
    x = x.wrapping_mul(0xff51afd7ed558ccd);
    x ^= x >> 33;
    x = x.wrapping_mul(0xc4ceb9fe1a85ec53);
    x ^= x >> 33;
    x
}

/// Collapse (seed, trial, stream) into one key; the per-edge call mixes the
/// edge index against this key.
#[inline]
pub fn stream_key(master_seed: u64, trial: u64, stream: u64) -> u64 {
    fmix64(
        fmix64(master_seed ^ GOLDEN)
            ^ trial.wrapping_mul(MIX_TRIAL)
            ^ stream.wrapping_mul(MIX_STREAM),
    )
}

/// Uniform 64-bit value for one edge under one key.
#[inline(always)]
pub fn edge_value(key: u64, edge_index: u64) -> u64 {
    fmix64(fmix64(key ^ edge_index.wrapping_mul(GOLDEN)))
}

/// Deterministic draw from `[0, bound)` via the 128-bit multiply trick.
pub fn uniform_below(key: u64, counter: u64, bound: u64) -> u64 {
    ((edge_value(key, counter) as u128 * bound as u128) >> 64) as u64
}

/// Exact `round(p * 2^64)` clamped to `u64::MAX`, so the open criterion
/// `edge_value < threshold` has marginal bias below `2^-63`. `p <= 0` and
/// `p >= 1` map to the degenerate all-closed / all-open thresholds.
pub fn threshold_for(p: f64) -> u64 {
    if !(p > 0.0) {
        return 0;
    }
    if p >= 1.0 {
        return u64::MAX;
    }
    let bits = p.to_bits();
    let exponent = ((bits >> 52) & 0x7ff) as i64 - 1075; // p = mantissa * 2^exponent
    let mantissa = (bits & ((1u64 << 52) - 1)) | (1u64 << 52);
    let shift = exponent + 64;
    let exact: u128 = if shift >= 0 {
        (mantissa as u128) << shift
    } else {
        let s = -shift as u32;
        if s >= 128 {
            0
        } else {
            ((mantissa as u128) + (1u128 << (s - 1))) >> s
        }
    };
    exact.min(u64::MAX as u128) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_are_exact_rounds() {
        assert_eq!(threshold_for(0.0), 0);
        assert_eq!(threshold_for(1.0), u64::MAX);
        assert_eq!(threshold_for(0.5), 1u64 << 63);
        assert_eq!(threshold_for(0.25), 1u64 << 62);
        // 0.3 = 5404319552844595 * 2^-54; 0.3 * 2^64 = 5404319552844595 * 2^10
        assert_eq!(threshold_for(0.3), 5404319552844595u64 << 10);
        // tiny p rounds rather than truncates
        let p = 2f64.powi(-80);
        assert_eq!(threshold_for(p), 0);
        let p = 1.5 * 2f64.powi(-64);
        assert_eq!(threshold_for(p), 2);
    }

    #[test]
    fn repeated_queries_agree() {
        let key = stream_key(42, 7, 0);
        for e in 0..100 {
            assert_eq!(edge_value(key, e), edge_value(key, e));
        }
    }

    #[test]
    fn keys_differ_across_coordinates() {
        let base = stream_key(42, 7, 0);
        assert_ne!(base, stream_key(43, 7, 0));
        assert_ne!(base, stream_key(42, 8, 0));
        assert_ne!(base, stream_key(42, 7, 1));
    }

    #[test]
    fn empirical_open_fraction() {
        // p = 0.3 over 10^6 edges within 0.3 +- 0.002 (4 sigma)
        let key = stream_key(0xfeed, 0, 0);
        let thr = threshold_for(0.3);
        let open = (0..1_000_000u64).filter(|&e| edge_value(key, e) < thr).count();
        let frac = open as f64 / 1e6;
        assert!((frac - 0.3).abs() < 0.002, "fraction {frac}");
    }
}
