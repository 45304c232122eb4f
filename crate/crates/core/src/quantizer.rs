//! Sequential vector quantization and per-center residual averaging.

use crate::augmented::{ErrorTable, QuantizedErrorTable};
use crate::error::{Error, Result};
use crate::neighbor::Metric;
use crate::scalar::{squared_distance, Scalar};

/// Codebook from a single ordered pass over the inputs.
///
/// Centers are admitted samples, kept verbatim in raw input space; distances
/// during quantization are measured after the metric transform.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook<T> {
    dim: usize,
    centers: Vec<T>,
    center_samples: Vec<usize>,
    assignments: Vec<usize>,
    epsilon: T,
}

impl<T: Scalar> Codebook<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.center_samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.center_samples.is_empty()
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    /// Row-major raw center vectors.
    pub fn centers_flat(&self) -> &[T] {
        &self.centers
    }

    pub fn center(&self, c: usize) -> &[T] {
        &self.centers[c * self.dim..(c + 1) * self.dim]
    }

    /// Sample index that created each center.
    pub fn center_samples(&self) -> &[usize] {
        &self.center_samples
    }

    /// Center index of each input sample.
    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }
}

/// Nearest center by linear scan; ties go to the older center.
fn nearest_center<T: Scalar>(centers: &[T], dim: usize, x: &[T]) -> Option<(usize, T)> {
    let mut best: Option<(usize, T)> = None;
    for (c, center) in centers.chunks_exact(dim).enumerate() {
        let d = squared_distance(center, x);
        if best.map_or(true, |(_, b)| d < b) {
            best = Some((c, d));
        }
    }
    best
}

/// Assigns each sample to the nearest existing center when it lies within
/// `epsilon` (inclusive), otherwise admits it as a new center.
pub fn quantize_sequential<T: Scalar>(dim: usize, inputs: &[T], epsilon: T, metric: &Metric<T>) -> Result<Codebook<T>> {
    if dim == 0 {
        return Err(Error::invalid("dim", "must be at least 1"));
    }
    if inputs.is_empty() {
        return Err(Error::Empty);
    }
    if inputs.len() % dim != 0 {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: inputs.len() % dim,
        });
    }
    if !(epsilon >= T::zero()) {
        return Err(Error::invalid("epsilon", "must be non-negative"));
    }
    let n = inputs.len() / dim;
    let mut space = Vec::new();
    let mut centers = Vec::new();
    let mut center_samples = Vec::new();
    let mut assignments = Vec::with_capacity(n);
    for (i, x) in inputs.chunks_exact(dim).enumerate() {
        let tx = metric.transform(x);
        match nearest_center(&space, dim, &tx) {
            Some((c, d2)) if d2.sqrt() <= epsilon => assignments.push(c),
            _ => {
                assignments.push(center_samples.len());
                center_samples.push(i);
                space.extend_from_slice(&tx);
                centers.extend_from_slice(x);
            }
        }
    }
    Ok(Codebook {
        dim,
        centers,
        center_samples,
        assignments,
        epsilon,
    })
}

/// Per-center arithmetic mean of the residuals assigned to it.
pub fn center_means<T: Scalar>(cb: &Codebook<T>, errors: &[T]) -> Result<Vec<T>> {
    if errors.len() != cb.assignments.len() {
        return Err(Error::LengthMismatch {
            left: errors.len(),
            right: cb.assignments.len(),
        });
    }
    let mut sums = vec![T::zero(); cb.len()];
    let mut counts = vec![0usize; cb.len()];
    for (&c, &e) in cb.assignments.iter().zip(errors) {
        sums[c] += e;
        counts[c] += 1;
    }
    Ok(sums
        .into_iter()
        .zip(counts)
        .map(|(s, k)| s / T::from_usize_lossy(k))
        .collect())
}

/// Error table keyed by the codebook centers with averaged residual payloads.
pub fn build_quantized_table<T: Scalar>(
    cb: &Codebook<T>,
    errors: &[T],
    metric: Metric<T>,
) -> Result<QuantizedErrorTable<T>> {
    let means = center_means(cb, errors)?;
    ErrorTable::build(cb.dim, &cb.centers, means, metric)
}

/// Outcome of a codebook-size search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonChoice<T> {
    pub epsilon: T,
    pub size: usize,
    /// False when no radius produced exactly the requested size.
    pub exact: bool,
}

const BISECTION_STEPS: usize = 40;

/// Bisects the quantization radius on `[0, bounding-box diagonal]` for a
/// codebook of `target_size` centers.
///
/// Bisection treats codebook size as non-increasing in the radius. That holds on
/// typical data but not for every input order, so the closest size seen is kept
/// and returned with `exact = false` when the target is never hit.
pub fn tune_epsilon<T: Scalar>(
    dim: usize,
    inputs: &[T],
    target_size: usize,
    metric: &Metric<T>,
) -> Result<EpsilonChoice<T>> {
    if dim == 0 || inputs.len() % dim != 0 {
        return Err(Error::invalid("dim", "inputs must be a whole number of rows"));
    }
    let n = inputs.len() / dim;
    if n == 0 {
        return Err(Error::Empty);
    }
    if target_size == 0 || target_size > n {
        return Err(Error::invalid("target_size", format!("must be in 1..={n}")));
    }
    let size_at = |eps: T| quantize_sequential(dim, inputs, eps, metric).map(|cb| cb.len());

    let mut best = EpsilonChoice {
        epsilon: T::zero(),
        size: size_at(T::zero())?,
        exact: false,
    };
    let consider = |eps: T, size: usize, best: &mut EpsilonChoice<T>| {
        let gap = size.abs_diff(target_size);
        let best_gap = best.size.abs_diff(target_size);
        if gap < best_gap || (gap == best_gap && eps < best.epsilon) {
            *best = EpsilonChoice {
                epsilon: eps,
                size,
                exact: false,
            };
        }
    };
    if best.size > target_size {
        let mut lo = T::zero();
        let mut hi = bounding_diagonal(dim, inputs, metric);
        let hi_size = size_at(hi)?;
        consider(hi, hi_size, &mut best);
        for _ in 0..BISECTION_STEPS {
            if best.size == target_size {
                break;
            }
            let mid = (lo + hi) / T::lit(2.0);
            let size = size_at(mid)?;
            consider(mid, size, &mut best);
            if size > target_size {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    best.exact = best.size == target_size;
    Ok(best)
}

fn bounding_diagonal<T: Scalar>(dim: usize, inputs: &[T], metric: &Metric<T>) -> T {
    let mut lo = vec![T::infinity(); dim];
    let mut hi = vec![T::neg_infinity(); dim];
    for x in inputs.chunks_exact(dim) {
        for (k, &v) in metric.transform(x).iter().enumerate() {
            lo[k] = lo[k].min(v);
            hi[k] = hi[k].max(v);
        }
    }
    squared_distance(&lo, &hi).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> Vec<f64> {
        (0..n).flat_map(|i| [i as f64, 0.0]).collect()
    }

    #[test]
    fn zero_radius_on_distinct_inputs_is_identity() {
        let cb = quantize_sequential(2, &line(6), 0.0, &Metric::PlainL2).unwrap();
        assert_eq!(cb.len(), 6);
        assert_eq!(cb.assignments(), &[0, 1, 2, 3, 4, 5]);
        assert_eq!(cb.centers_flat(), line(6).as_slice());
    }

    #[test]
    fn zero_radius_merges_duplicates() {
        let pts = [1.0, 1.0, 2.0, 2.0, 1.0, 1.0];
        let cb = quantize_sequential(2, &pts, 0.0, &Metric::PlainL2).unwrap();
        assert_eq!(cb.assignments(), &[0, 1, 0]);
    }

    #[test]
    fn huge_radius_keeps_first_sample() {
        let cb = quantize_sequential(2, &line(6), 100.0, &Metric::PlainL2).unwrap();
        assert_eq!(cb.len(), 1);
        assert_eq!(cb.center(0), &[0.0, 0.0]);
        assert_eq!(cb.center_samples(), &[0]);
    }

    #[test]
    fn boundary_distance_is_inclusive() {
        let cb = quantize_sequential(2, &line(3), 1.0, &Metric::PlainL2).unwrap();
        assert_eq!(cb.assignments(), &[0, 0, 1]);
    }

    #[test]
    fn quantize_errors() {
        assert!(matches!(
            quantize_sequential::<f64>(2, &[], 0.1, &Metric::PlainL2),
            Err(Error::Empty)
        ));
        assert!(quantize_sequential(2, &line(2), -0.1, &Metric::PlainL2).is_err());
        assert!(quantize_sequential(2, &[1.0, 2.0, 3.0], 0.1, &Metric::PlainL2).is_err());
    }

    #[test]
    fn averaged_payloads() {
        let cb = quantize_sequential(2, &line(3), 0.0, &Metric::PlainL2).unwrap();
        let t = build_quantized_table(&cb, &[0.5, -1.0, 2.0], Metric::PlainL2).unwrap();
        assert_eq!(t.errors(), &[0.5, -1.0, 2.0]);

        let cb = quantize_sequential(2, &[0.0, 0.0, 0.5, 0.0], 1.0, &Metric::PlainL2).unwrap();
        let t = build_quantized_table(&cb, &[1.0, 3.0], Metric::PlainL2).unwrap();
        assert_eq!(t.errors(), &[2.0]);
        assert!(build_quantized_table(&cb, &[1.0], Metric::PlainL2).is_err());
    }

    #[test]
    fn hadamard_space_distances() {
        // weights shrink the second axis so the points collapse within radius 0.5
        let pts = [0.0, 0.0, 0.0, 10.0];
        let m = Metric::hadamard(&[1.0, 0.01]).unwrap();
        assert_eq!(quantize_sequential(2, &pts, 0.5, &m).unwrap().len(), 1);
        assert_eq!(quantize_sequential(2, &pts, 0.5, &Metric::PlainL2).unwrap().len(), 2);
    }

    #[test]
    fn tune_trivial_targets() {
        let pts = line(10);
        let all = tune_epsilon(2, &pts, 10, &Metric::PlainL2).unwrap();
        assert_eq!((all.epsilon, all.size, all.exact), (0.0, 10, true));
        let one = tune_epsilon(2, &pts, 1, &Metric::PlainL2).unwrap();
        assert_eq!(one.size, 1);
        assert!(one.exact);
        assert_eq!(quantize_sequential(2, &pts, one.epsilon, &Metric::PlainL2).unwrap().len(), 1);
        let mid = tune_epsilon(2, &pts, 5, &Metric::PlainL2).unwrap();
        assert_eq!(mid.size, 5);
        assert!(tune_epsilon(2, &pts, 0, &Metric::PlainL2).is_err());
        assert!(tune_epsilon(2, &pts, 11, &Metric::PlainL2).is_err());
    }

    #[test]
    fn tune_reports_unreachable_target() {
        // three copies of one point plus one other: sizes 1 and 2 only
        let pts = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0];
        let r = tune_epsilon(2, &pts, 3, &Metric::PlainL2).unwrap();
        assert_eq!(r.size, 2);
        assert!(!r.exact);
    }
}
