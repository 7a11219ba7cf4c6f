//! Compensated running sums shared by the cumulative-sum diagram, the level-set
//! means of the isotonic fit, and the penalized suffix scan. The greatest convex
//! minorant is sensitive to cumulative rounding near flat stretches, so all
//! partial sums go through Neumaier compensation.

/// Prefix sums `out[k] = y_1 + ... + y_k`, with `out[0] = 0`.
pub(crate) fn prefix_sums(values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len() + 1);
    out.push(0.0);
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
        out.push(sum + comp);
    }
    out
}

/// Suffix sums `out[i] = y_{i+1} + ... + y_n` (0-based `i`), with `out[n] = 0`.
/// The sum over the block `(a, b]` of 1-based indices is `out[a] - out[b]`.
pub(crate) fn suffix_sums(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n + 1];
    let mut sum = 0.0;
    let mut comp = 0.0;
    for i in (0..n).rev() {
        let x = values[i];
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
        out[i] = sum + comp;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_and_suffix_agree_on_totals() {
        let y = [1.5, -2.25, 0.125, 7.0];
        let p = prefix_sums(&y);
        let s = suffix_sums(&y);
        assert_eq!(p[0], 0.0);
        assert_eq!(s[4], 0.0);
        assert_eq!(p[4], 6.375);
        assert_eq!(s[0], 6.375);
        assert_eq!(p[2], -0.75);
        assert_eq!(s[2], 7.125);
    }

    #[test]
    fn compensation_beats_naive_accumulation() {
        // Alternating large/small values defeat a plain running sum.
        let mut y = Vec::new();
        for _ in 0..10_000 {
            y.push(1e12);
            y.push(0.0625);
            y.push(-1e12);
        }
        let p = prefix_sums(&y);
        let total = *p.last().unwrap();
        assert_eq!(total, 10_000.0 * 0.0625);
    }
}
