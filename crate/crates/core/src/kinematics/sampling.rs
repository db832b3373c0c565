use super::{Configuration, RobotModel};
use crate::error::{Error, Result};

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Van der Corput radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += (index % base) as f64 * f;
        index /= base;
        f *= inv;
    }
    r
}

/// Halton point `index` in `[0,1)^dims`, bases are the first `dims` primes.
pub fn halton(index: u64, dims: usize) -> Vec<f64> {
    assert!(dims <= PRIMES.len(), "at most {} Halton dimensions", PRIMES.len());
    PRIMES[..dims].iter().map(|&b| radical_inverse(index, b)).collect()
}

/// `count` Halton configurations scaled to the joint limits, using sequence indices
/// `seed_offset + 1 ..= seed_offset + count`.
pub fn sample_halton(count: usize, robot: &RobotModel, seed_offset: u64) -> Result<Vec<Configuration>> {
    if count == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let limits = robot.joint_limits();
    if limits.len() > PRIMES.len() {
        return Err(Error::InvalidArgument(format!("Halton sampling supports at most {} joints", PRIMES.len())));
    }
    Ok((0..count as u64)
        .map(|i| {
            halton(seed_offset + 1 + i, limits.len())
                .into_iter()
                .zip(&limits)
                .map(|(h, &(lo, hi))| (lo + h * (hi - lo)).clamp(lo, hi))
                .collect()
        })
        .collect())
}

/// `count` start/end configuration pairs from a `2 * dof`-dimensional Halton sequence
/// (indices as in [`sample_halton`]). The first `dof` coordinates give the start; the
/// rest give the end, either anywhere within the limits (`max_step` infinite) or as an
/// offset of at most `max_step` per joint from the start, clamped to the limits.
pub fn sample_trajectory_pairs(
    count: usize,
    robot: &RobotModel,
    seed_offset: u64,
    max_step: f64,
) -> Result<Vec<(Configuration, Configuration)>> {
    if count == 0 {
        return Err(Error::InvalidArgument("trajectory count must be at least 1".into()));
    }
    if !(max_step > 0.0) {
        return Err(Error::InvalidArgument(format!("max_step must be positive, got {max_step}")));
    }
    let limits = robot.joint_limits();
    let d = limits.len();
    if 2 * d > PRIMES.len() {
        return Err(Error::InvalidArgument(format!(
            "trajectory sampling supports at most {} joints",
            PRIMES.len() / 2
        )));
    }
    Ok((0..count as u64)
        .map(|i| {
            let h = halton(seed_offset + 1 + i, 2 * d);
            let start: Configuration = limits.iter().zip(&h).map(|(&(lo, hi), u)| (lo + u * (hi - lo)).clamp(lo, hi)).collect();
            let end = limits
                .iter()
                .zip(&h[d..])
                .zip(&start)
                .map(|((&(lo, hi), u), s)| {
                    let q = if max_step.is_finite() { s + (2.0 * u - 1.0) * max_step } else { lo + u * (hi - lo) };
                    q.clamp(lo, hi)
                })
                .collect();
            (start, end)
        })
        .collect())
}

/// `count` evenly spaced configurations from `start` to `end`, both included exactly.
pub fn interpolate_cspace(start: &[f64], end: &[f64], count: usize) -> Result<Vec<Configuration>> {
    if count < 2 {
        return Err(Error::InvalidArgument(format!("interpolation needs at least 2 samples, got {count}")));
    }
    if start.len() != end.len() {
        return Err(Error::InvalidArgument("endpoint configurations differ in length".into()));
    }
    Ok((0..count)
        .map(|i| {
            if i == 0 {
                return start.to_vec();
            }
            if i == count - 1 {
                return end.to_vec();
            }
            let s = i as f64 / (count - 1) as f64;
            start
                .iter()
                .zip(end)
                .map(|(&a, &b)| ((1.0 - s) * a + s * b).clamp(a.min(b), a.max(b)))
                .collect()
        })
        .collect())
}
