//! Euclidean projection onto { b : 0 ≤ b ≤ 1, Σ b ≤ K } by break point
//! search.
//!
//! The projection is `clamp(s − μ*, 0, 1)` where μ* = 0 if the clamped
//! vector already fits the budget, and otherwise the unique μ* > 0 with
//! f(μ*) = K for the piecewise-linear, nonincreasing
//! f(μ) = Σ clamp(s_v − μ, 0, 1). Its kinks sit at s_v − 1 (entry starts
//! decreasing) and s_v (entry hits zero). Sorting the kinks and walking
//! them locates the linear piece containing μ*.

use crate::error::{Error, Result};

/// Projects `s` into `out` (same length).
pub fn project_into(s: &[f64], budget: f64, out: &mut [f64]) -> Result<()> {
    debug_assert_eq!(s.len(), out.len());
    if budget.is_nan() || budget < 0.0 {
        return Err(Error::invalid(format!("budget {budget} must be non-negative")));
    }
    let mu = threshold(s, budget)?;
    for (o, &x) in out.iter_mut().zip(s) {
        *o = (x - mu).clamp(0.0, 1.0);
    }
    Ok(())
}

/// Allocating wrapper around [`project_into`] with an integer budget.
pub fn project_row(s: &[f64], k: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; s.len()];
    project_into(s, k as f64, &mut out)?;
    Ok(out)
}

/// The shift μ* ≥ 0.
pub fn threshold(s: &[f64], budget: f64) -> Result<f64> {
    let mut clamped_sum = 0.0;
    for (i, &x) in s.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::invalid(format!("non-finite entry {x} at {i}")));
        }
        clamped_sum += x.clamp(0.0, 1.0);
    }
    if clamped_sum <= budget {
        return Ok(0.0);
    }

    // Kinks strictly right of μ = 0. Entries with s ≤ 0 stay at zero for any
    // μ ≥ 0 and never contribute.
    // (position, slope change): entering the linear regime at s−1 adds one,
    // hitting zero at s removes one.
    let mut events: Vec<(f64, i32)> = Vec::new();
    let mut active: i64 = 0;
    for &x in s {
        if x <= 0.0 {
            continue;
        }
        if x - 1.0 > 0.0 {
            events.push((x - 1.0, 1));
        } else {
            // already linear just right of μ = 0
            active += 1;
        }
        events.push((x, -1));
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut prev = 0.0;
    let mut f_prev = clamped_sum;
    let mut i = 0;
    while i < events.len() {
        let x = events[i].0;
        let f_here = f_prev - active as f64 * (x - prev);
        if f_here <= budget && active > 0 {
            return Ok(prev + (f_prev - budget) / active as f64);
        }
        while i < events.len() && events[i].0 == x {
            active += events[i].1 as i64;
            i += 1;
        }
        prev = x;
        f_prev = f_here;
    }
    // f reaches 0 at the last kink; only possible here with budget == 0
    Ok(prev)
}
