//! Exact greatest-convex-minorant computation on a finite diagram,
//! pool-adjacent-violators fitting, and the brute-force min-max oracle
//! used for differential testing.

use crate::error::{Error, Result};
use crate::series::{TimeSeries, Weights};
use crate::sums::prefix_sums;

/// A finite diagram: points with strictly increasing abscissas. The cumulative
/// sum diagram of a series `y_1..y_n` has points `(k/n, (y_1+...+y_k)/n)` for
/// `k = 0..n`, starting at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagram {
    points: Vec<(f64, f64)>,
}

impl Diagram {
    /// Validates and wraps a point list: at least two points, finite
    /// coordinates, strictly increasing abscissas.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid(
                "points",
                format!("a diagram needs at least 2 points, got {}", points.len()),
            ));
        }
        for (index, &(x, y)) in points.iter().enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::NonFinite { index });
            }
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::invalid(
                    "points",
                    format!(
                        "abscissas must be strictly increasing, got {} then {}",
                        w[0].0, w[1].0
                    ),
                ));
            }
        }
        Ok(Diagram { points })
    }

    pub(crate) fn from_points_unchecked(points: Vec<(f64, f64)>) -> Self {
        Diagram { points }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn abscissa(&self, i: usize) -> f64 {
        self.points[i].0
    }

    pub fn ordinate(&self, i: usize) -> f64 {
        self.points[i].1
    }
}

/// The greatest convex minorant of a diagram: the indices where the minorant
/// touches the diagram and the left-hand slope at every abscissa after the
/// first. For a cumulative sum diagram, `slopes()[k-1]` is the isotonic
/// estimate at observation `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct GcmFit {
    abscissas: Vec<f64>,
    knots: Vec<usize>,
    slopes: Vec<f64>,
}

impl GcmFit {
    /// Diagram point indices touched by the minorant. Always contains the
    /// first and last point. Equal-slope segments keep separate knots.
    pub fn knots(&self) -> &[usize] {
        &self.knots
    }

    /// Left-hand slopes, one per diagram abscissa after the first.
    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    /// Abscissas of the source diagram.
    pub fn abscissas(&self) -> &[f64] {
        &self.abscissas
    }

    /// Minorant values at every abscissa of `diagram`, interpolated between
    /// knots. Values at knots equal the diagram ordinates exactly.
    pub fn minorant(&self, diagram: &Diagram) -> Result<Vec<f64>> {
        if diagram.len() != self.abscissas.len() {
            return Err(Error::LengthMismatch {
                expected: self.abscissas.len(),
                got: diagram.len(),
            });
        }
        let mut out = Vec::with_capacity(diagram.len());
        out.push(diagram.ordinate(0));
        for w in self.knots.windows(2) {
            let (xa, ya) = diagram.points()[w[0]];
            let (xb, yb) = diagram.points()[w[1]];
            let slope = (yb - ya) / (xb - xa);
            for i in w[0] + 1..w[1] {
                out.push(ya + slope * (diagram.abscissa(i) - xa));
            }
            out.push(yb);
        }
        Ok(out)
    }
}

fn slope(points: &[(f64, f64)], i: usize, j: usize) -> f64 {
    (points[j].1 - points[i].1) / (points[j].0 - points[i].0)
}

/// Knot indices of the greatest convex minorant, by a single left-to-right
/// stack pass. The pop uses strict inequality so ties in slope keep their
/// knots.
pub(crate) fn gcm_knots(points: &[(f64, f64)]) -> Vec<usize> {
    let mut stack: Vec<usize> = Vec::with_capacity(points.len().min(64));
    stack.push(0);
    for i in 1..points.len() {
        while stack.len() >= 2 {
            let a = stack[stack.len() - 2];
            let b = stack[stack.len() - 1];
            if slope(points, b, i) < slope(points, a, b) {
                stack.pop();
            } else {
                break;
            }
        }
        stack.push(i);
    }
    stack
}

/// Computes the greatest convex minorant of `d`.
///
/// # Examples
/// ```
/// use monotrend::{cusum_diagram, gcm, TimeSeries};
/// let y = TimeSeries::new(vec![2.0, 1.0, 4.0, 3.0, 5.0]).unwrap();
/// let fit = gcm(&cusum_diagram(&y));
/// assert_eq!(fit.knots(), &[0, 2, 4, 5]);
/// assert!((fit.slopes()[2] - 3.5).abs() < 1e-12);
/// ```
pub fn gcm(d: &Diagram) -> GcmFit {
    let points = d.points();
    let knots = gcm_knots(points);
    let mut slopes = Vec::with_capacity(points.len() - 1);
    for w in knots.windows(2) {
        let s = slope(points, w[0], w[1]);
        for _ in w[0]..w[1] {
            slopes.push(s);
        }
    }
    GcmFit {
        abscissas: points.iter().map(|p| p.0).collect(),
        knots,
        slopes,
    }
}

/// The cumulative sum diagram of a series: `n + 1` points
/// `(k/n, (y_1+...+y_k)/n)` including the origin.
pub fn cusum_diagram(y: &TimeSeries) -> Diagram {
    let n = y.len();
    let nf = n as f64;
    let prefix = prefix_sums(y.values());
    let points = (0..=n).map(|k| (k as f64 / nf, prefix[k] / nf)).collect();
    Diagram::from_points_unchecked(points)
}

pub(crate) struct PavaBlock {
    pub mean: f64,
    pub len: usize,
}

/// Pool-adjacent-violators level sets: strict-violation merges, so exact
/// ties stay separate blocks and a nondecreasing input passes through
/// untouched.
pub(crate) fn pava_blocks(values: &[f64], weights: &[f64]) -> Vec<PavaBlock> {
    struct Block {
        mean: f64,
        weight: f64,
        len: usize,
    }
    let mut blocks: Vec<Block> = Vec::with_capacity(values.len());
    for (&v, &wi) in values.iter().zip(weights) {
        blocks.push(Block {
            mean: v,
            weight: wi,
            len: 1,
        });
        while blocks.len() >= 2 {
            let last = blocks.len() - 1;
            if blocks[last - 1].mean > blocks[last].mean {
                let b = blocks.pop().unwrap();
                let a = blocks.last_mut().unwrap();
                let weight = a.weight + b.weight;
                a.mean = (a.mean * a.weight + b.mean * b.weight) / weight;
                a.weight = weight;
                a.len += b.len;
            } else {
                break;
            }
        }
    }
    blocks
        .into_iter()
        .map(|b| PavaBlock {
            mean: b.mean,
            len: b.len,
        })
        .collect()
}

/// Weighted pool-adjacent-violators fit: the nondecreasing step function
/// minimizing the weighted squared error. With unit weights this equals the
/// slopes of the greatest convex minorant of the cumulative sum diagram.
///
/// # Examples
/// ```
/// use monotrend::{pava, TimeSeries, Weights};
/// let y = TimeSeries::new(vec![3.0, 1.0]).unwrap();
/// assert_eq!(pava(&y, &Weights::unit(2)).unwrap(), vec![2.0, 2.0]);
/// ```
pub fn pava(y: &TimeSeries, w: &Weights) -> Result<Vec<f64>> {
    if w.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: y.len(),
            got: w.len(),
        });
    }
    let mut out = Vec::with_capacity(y.len());
    for b in pava_blocks(y.values(), w.values()) {
        out.extend(std::iter::repeat_n(b.mean, b.len));
    }
    Ok(out)
}

/// Brute-force min-max value `max_{i<=k} min_{k<=j<=n} (y_i+...+y_j)/(j-i+1)`
/// by exhaustive enumeration, O(n^2) per call. `k` is 1-based. This exists
/// solely as a differential-testing oracle for `gcm`/`pava`; the summation is
/// deliberately independent of the compensated path used elsewhere.
pub fn minmax_oracle(y: &TimeSeries, k: usize) -> Result<f64> {
    let n = y.len();
    if k < 1 || k > n {
        return Err(Error::IndexOutOfRange { index: k, n });
    }
    let v = y.values();
    let mut best = f64::NEG_INFINITY;
    for i in 1..=k {
        // sum of y_i..y_{k-1}, then extend one observation at a time
        let mut sum: f64 = v[i - 1..k - 1].iter().sum();
        let mut min = f64::INFINITY;
        for j in k..=n {
            sum += v[j - 1];
            let mean = sum / (j - i + 1) as f64;
            if mean < min {
                min = mean;
            }
        }
        if min > best {
            best = min;
        }
    }
    Ok(best)
}

/// Left-hand derivative of the minorant at `t`: the slope of the segment
/// immediately left of `t`; at a knot abscissa, the incoming slope. `t` must
/// lie in `(x_first, x_last]` — `(0, 1]` for a cumulative sum diagram.
pub fn left_derivative(fit: &GcmFit, t: f64) -> Result<f64> {
    let xs = fit.abscissas();
    let lo = xs[0];
    let hi = xs[xs.len() - 1];
    if !t.is_finite() || t <= lo || t > hi {
        return Err(Error::OutOfDomain { t, lo, hi });
    }
    // first index with abscissa >= t; the segment (xs[idx-1], xs[idx]] covers t
    let idx = xs.partition_point(|&x| x < t);
    Ok(fit.slopes()[idx - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(v: &[f64]) -> TimeSeries {
        TimeSeries::new(v.to_vec()).unwrap()
    }

    #[test]
    fn cusum_examples() {
        let d = cusum_diagram(&series(&[2.0]));
        assert_eq!(d.points(), &[(0.0, 0.0), (1.0, 2.0)]);

        let d = cusum_diagram(&series(&[1.0, 3.0]));
        assert_eq!(d.points(), &[(0.0, 0.0), (0.5, 0.5), (1.0, 2.0)]);

        let d = cusum_diagram(&series(&[0.0, 0.0, 0.0]));
        assert_eq!(d.len(), 4);
        assert_eq!(d.ordinate(1), 0.0);
        assert_eq!(d.ordinate(2), 0.0);
        assert_eq!(d.ordinate(3), 0.0);
        assert_eq!(d.abscissa(1), 1.0 / 3.0);
        assert_eq!(d.abscissa(2), 2.0 / 3.0);
    }

    #[test]
    fn diagram_validation() {
        assert!(Diagram::new(vec![(0.0, 0.0)]).is_err());
        assert!(Diagram::new(vec![(0.0, 0.0), (0.0, 1.0)]).is_err());
        assert!(Diagram::new(vec![(0.0, 0.0), (-1.0, 1.0)]).is_err());
        assert!(Diagram::new(vec![(0.0, f64::NAN), (1.0, 1.0)]).is_err());
        assert!(Diagram::new(vec![(0.0, 0.0), (1.0, 1.0)]).is_ok());
    }

    #[test]
    fn gcm_convex_input_is_its_own_minorant() {
        let d = cusum_diagram(&series(&[1.0, 2.0, 3.0]));
        let fit = gcm(&d);
        assert_eq!(fit.knots(), &[0, 1, 2, 3]);
        let s = fit.slopes();
        assert!((s[0] - 1.0).abs() < 1e-12);
        assert!((s[1] - 2.0).abs() < 1e-12);
        assert!((s[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn gcm_pools_single_block() {
        let d = cusum_diagram(&series(&[3.0, 1.0]));
        let fit = gcm(&d);
        assert_eq!(fit.knots(), &[0, 2]);
        assert_eq!(fit.slopes(), &[2.0, 2.0]);
    }

    #[test]
    fn gcm_mixed_series() {
        // Expected slopes frozen from the min-max oracle over all (i, j).
        let d = cusum_diagram(&series(&[2.0, 1.0, 4.0, 3.0, 5.0]));
        let fit = gcm(&d);
        let expected = [1.5, 1.5, 3.5, 3.5, 5.0];
        for (s, e) in fit.slopes().iter().zip(expected) {
            assert!((s - e).abs() < 1e-12, "slopes {:?}", fit.slopes());
        }
    }

    #[test]
    fn gcm_ties_keep_separate_knots() {
        let d = Diagram::new(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (3.0, 3.0)]).unwrap();
        let fit = gcm(&d);
        assert_eq!(fit.knots(), &[0, 1, 2, 3]);
        assert_eq!(fit.slopes(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn pava_examples() {
        let w = Weights::unit(3);
        assert_eq!(
            pava(&series(&[1.0, 2.0, 3.0]), &w).unwrap(),
            vec![1.0, 2.0, 3.0]
        );
        assert_eq!(
            pava(&series(&[3.0, 1.0]), &Weights::unit(2)).unwrap(),
            vec![2.0, 2.0]
        );
        let fit = pava(&series(&[2.0, 1.0, 4.0, 3.0, 5.0]), &Weights::unit(5)).unwrap();
        let expected = [1.5, 1.5, 3.5, 3.5, 5.0];
        for (f, e) in fit.iter().zip(expected) {
            assert!((f - e).abs() < 1e-12);
        }
    }

    #[test]
    fn pava_respects_weights() {
        // Pooled value is the weighted mean of the violating pair.
        let y = series(&[3.0, 1.0]);
        let w = Weights::new(vec![1.0, 3.0]).unwrap();
        assert_eq!(pava(&y, &w).unwrap(), vec![1.5, 1.5]);
    }

    #[test]
    fn pava_length_mismatch() {
        let err = pava(&series(&[1.0, 2.0]), &Weights::unit(3));
        assert!(matches!(
            err,
            Err(Error::LengthMismatch {
                expected: 2,
                got: 3
            })
        ));
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(minmax_oracle(&series(&[3.0, 1.0]), 1).unwrap(), 2.0);
        assert_eq!(minmax_oracle(&series(&[1.0, 2.0, 3.0]), 2).unwrap(), 2.0);
        assert_eq!(
            minmax_oracle(&series(&[2.0, 1.0, 4.0, 3.0, 5.0]), 3).unwrap(),
            3.5
        );
        assert!(matches!(
            minmax_oracle(&series(&[1.0]), 0),
            Err(Error::IndexOutOfRange { index: 0, n: 1 })
        ));
        assert!(matches!(
            minmax_oracle(&series(&[1.0]), 2),
            Err(Error::IndexOutOfRange { index: 2, n: 1 })
        ));
    }

    #[test]
    fn left_derivative_examples() {
        let fit = gcm(&cusum_diagram(&series(&[1.0, 2.0, 3.0])));
        assert!((left_derivative(&fit, 2.0 / 3.0).unwrap() - 2.0).abs() < 1e-12);

        let fit = gcm(&cusum_diagram(&series(&[3.0, 1.0])));
        assert_eq!(left_derivative(&fit, 1.0).unwrap(), 2.0);

        let fit = gcm(&cusum_diagram(&series(&[2.0, 1.0, 4.0, 3.0, 5.0])));
        assert!((left_derivative(&fit, 0.5).unwrap() - 3.5).abs() < 1e-12);

        assert!(matches!(
            left_derivative(&fit, 0.0),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(matches!(
            left_derivative(&fit, 1.0 + 1e-9),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn minorant_touches_at_knots_and_stays_below() {
        let y = series(&[2.0, 1.0, 4.0, 3.0, 5.0, 0.0, 6.0]);
        let d = cusum_diagram(&y);
        let fit = gcm(&d);
        let m = fit.minorant(&d).unwrap();
        for (i, (&mi, p)) in m.iter().zip(d.points()).enumerate() {
            assert!(mi <= p.1 + 1e-12, "minorant above diagram at {i}");
        }
        for &k in fit.knots() {
            assert_eq!(m[k], d.ordinate(k));
        }
        assert_eq!(m[0], d.ordinate(0));
        assert_eq!(m[d.len() - 1], d.ordinate(d.len() - 1));
    }
}
