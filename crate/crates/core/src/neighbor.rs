//! Exact nearest-neighbor search over a static point set.
//!
//! Points are stored after the metric transform (identity for [`Metric::PlainL2`],
//! elementwise product with the weights for [`Metric::Hadamard`]) and indexed by
//! a kd-tree split at the median of the widest-spread axis. Queries are
//! transformed the same way, so a single euclidean tree serves both metrics.
//!
//! Equal distances resolve to the lowest insertion index, in the tree search and
//! in [`brute_force_nearest`] alike.

use std::borrow::Cow;

use crate::error::{check_dim, Error, Result};
use crate::scalar::{squared_distance, Scalar};

const LEAF_SIZE: usize = 8;

/// Distance used for neighbor lookup.
#[derive(Debug, Clone, PartialEq)]
pub enum Metric<T> {
    /// Euclidean distance on the raw inputs.
    PlainL2,
    /// Euclidean distance between `w ∘ a` and `w ∘ b`.
    Hadamard(Vec<T>),
}

impl<T: Scalar> Metric<T> {
    pub fn hadamard(weights: &[T]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("weights", "must be finite"));
        }
        Ok(Metric::Hadamard(weights.to_vec()))
    }

    fn check(&self, dim: usize) -> Result<()> {
        match self {
            Metric::PlainL2 => Ok(()),
            Metric::Hadamard(w) => check_dim(dim, w.len()),
        }
    }

    /// Maps a vector into the space where plain euclidean distance applies.
    pub fn transform<'a>(&self, x: &'a [T]) -> Cow<'a, [T]> {
        match self {
            Metric::PlainL2 => Cow::Borrowed(x),
            Metric::Hadamard(w) => Cow::Owned(w.iter().zip(x).map(|(&a, &b)| a * b).collect()),
        }
    }

    pub fn distance(&self, a: &[T], b: &[T]) -> T {
        squared_distance(&self.transform(a), &self.transform(b)).sqrt()
    }
}

#[derive(Debug, Clone)]
enum Node<T> {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: T,
        left: usize,
        right: usize,
    },
}

/// Result of a nearest-neighbor query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nearest<T> {
    /// Insertion index of the winning point.
    pub index: usize,
    pub distance: T,
}

/// Immutable kd-tree over transformed points with one payload per point.
#[derive(Debug, Clone)]
pub struct NeighborIndex<T, P> {
    metric: Metric<T>,
    dim: usize,
    /// Transformed points in tree order.
    points: Vec<T>,
    /// Tree position to insertion index.
    order: Vec<usize>,
    payloads: Vec<P>,
    nodes: Vec<Node<T>>,
}

fn validate_points<T: Scalar, P>(dim: usize, points: &[T], payloads: &[P], metric: &Metric<T>) -> Result<()> {
    if dim == 0 {
        return Err(Error::invalid("dim", "must be at least 1"));
    }
    if payloads.is_empty() || points.is_empty() {
        return Err(Error::Empty);
    }
    if points.len() % dim != 0 {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: points.len() % dim,
        });
    }
    if points.len() / dim != payloads.len() {
        return Err(Error::LengthMismatch {
            left: points.len() / dim,
            right: payloads.len(),
        });
    }
    metric.check(dim)
}

impl<T: Scalar, P> NeighborIndex<T, P> {
    /// Builds the index from row-major `points` (`dim` columns) and their payloads.
    pub fn build(dim: usize, points: &[T], payloads: Vec<P>, metric: Metric<T>) -> Result<Self> {
        validate_points(dim, points, &payloads, &metric)?;
        let n = payloads.len();
        let transformed: Vec<T> = points
            .chunks_exact(dim)
            .flat_map(|p| metric.transform(p).into_owned())
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        let mut nodes = Vec::with_capacity(2 * n / LEAF_SIZE + 1);
        build_node(&transformed, dim, &mut order, 0, n, &mut nodes);
        let mut points = Vec::with_capacity(n * dim);
        for &i in &order {
            points.extend_from_slice(&transformed[i * dim..(i + 1) * dim]);
        }
        Ok(Self {
            metric,
            dim,
            points,
            order,
            payloads,
            nodes,
        })
    }

    pub fn len(&self) -> usize {
        self.payloads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.payloads.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> &Metric<T> {
        &self.metric
    }

    pub fn payloads(&self) -> &[P] {
        &self.payloads
    }

    pub fn payload(&self, index: usize) -> &P {
        &self.payloads[index]
    }

    /// Stored (transformed) points in insertion order.
    pub fn stored_points(&self) -> Vec<&[T]> {
        let mut out = vec![&self.points[..0]; self.len()];
        for (pos, &i) in self.order.iter().enumerate() {
            out[i] = &self.points[pos * self.dim..(pos + 1) * self.dim];
        }
        out
    }

    /// Payload and distance of the closest stored point.
    pub fn nearest(&self, query: &[T]) -> Result<(&P, T)> {
        let hit = self.nearest_entry(query)?;
        Ok((&self.payloads[hit.index], hit.distance))
    }

    pub fn nearest_entry(&self, query: &[T]) -> Result<Nearest<T>> {
        self.nearest_with_stats(query).map(|(hit, _)| hit)
    }

    /// Like [`NeighborIndex::nearest_entry`], also returning the number of tree nodes visited.
    pub fn nearest_with_stats(&self, query: &[T]) -> Result<(Nearest<T>, usize)> {
        check_dim(self.dim, query.len())?;
        let q = self.metric.transform(query);
        let mut best = Best {
            sq: T::infinity(),
            index: usize::MAX,
        };
        let mut visits = 0;
        self.search(0, &q, &mut best, &mut visits);
        Ok((
            Nearest {
                index: best.index,
                distance: best.sq.sqrt(),
            },
            visits,
        ))
    }

    fn search(&self, node: usize, q: &[T], best: &mut Best<T>, visits: &mut usize) {
        *visits += 1;
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for pos in start..end {
                    let p = &self.points[pos * self.dim..(pos + 1) * self.dim];
                    best.offer(squared_distance(q, p), self.order[pos]);
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < T::zero() {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search(near, q, best, visits);
                // <= keeps equidistant points with a lower index reachable
                if diff * diff <= best.sq {
                    self.search(far, q, best, visits);
                }
            }
        }
    }
}

struct Best<T> {
    sq: T,
    index: usize,
}

impl<T: Scalar> Best<T> {
    #[inline]
    fn offer(&mut self, sq: T, index: usize) {
        if sq < self.sq || (sq == self.sq && index < self.index) {
            self.sq = sq;
            self.index = index;
        }
    }
}

fn build_node<T: Scalar>(
    points: &[T],
    dim: usize,
    order: &mut [usize],
    start: usize,
    end: usize,
    nodes: &mut Vec<Node<T>>,
) -> usize {
    let id = nodes.len();
    nodes.push(Node::Leaf { start, end });
    if end - start <= LEAF_SIZE {
        return id;
    }
    let coord = |i: usize, axis: usize| points[i * dim + axis];
    let (axis, spread) = (0..dim)
        .map(|axis| {
            let (lo, hi) = order[start..end]
                .iter()
                .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &i| {
                    let v = coord(i, axis);
                    (lo.min(v), hi.max(v))
                });
            (axis, hi - lo)
        })
        .fold((0, T::neg_infinity()), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
    if !(spread > T::zero()) {
        // all points identical
        return id;
    }
    let mid = start + (end - start) / 2;
    order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
        coord(a, axis)
            .partial_cmp(&coord(b, axis))
            .expect("finite coordinates")
            .then(a.cmp(&b))
    });
    let value = coord(order[mid], axis);
    let left = build_node(points, dim, order, start, mid, nodes);
    let right = build_node(points, dim, order, mid, end, nodes);
    nodes[id] = Node::Split {
        axis,
        value,
        left,
        right,
    };
    id
}

/// Linear-scan nearest neighbor; ties go to the lowest index.
pub fn brute_force_nearest<'a, T: Scalar, P>(
    dim: usize,
    points: &[T],
    payloads: &'a [P],
    metric: &Metric<T>,
    query: &[T],
) -> Result<(&'a P, Nearest<T>)> {
    validate_points(dim, points, payloads, metric)?;
    check_dim(dim, query.len())?;
    let q = metric.transform(query);
    let mut best = Best {
        sq: T::infinity(),
        index: usize::MAX,
    };
    for (i, p) in points.chunks_exact(dim).enumerate() {
        best.offer(squared_distance(&q, &metric.transform(p)), i);
    }
    Ok((
        &payloads[best.index],
        Nearest {
            index: best.index,
            distance: best.sq.sqrt(),
        },
    ))
}
