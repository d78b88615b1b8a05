//! Labeled tensor factors: identity embeddings, factor permutations and
//! partial traces.
//!
//! Factor order is always the order of labels in a [`SystemShape`], with the
//! first factor most significant in the row-major linear index.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::linalg::{kron, ComplexMatrix, C64};

/// Ordered list of labeled tensor factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemShape {
    factors: Vec<(String, usize)>,
}

impl fmt::Display for SystemShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.factors.iter().map(|(l, d)| format!("{l}:{d}")).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl SystemShape {
    pub fn new<S: Into<String>>(factors: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let factors: Vec<(String, usize)> =
            factors.into_iter().map(|(l, d)| (l.into(), d)).collect();
        for (i, (label, dim)) in factors.iter().enumerate() {
            if label.is_empty() {
                return Err(LabError::InvalidShape("empty label".into()));
            }
            if *dim == 0 {
                return Err(LabError::InvalidShape(format!("factor `{label}` has dimension 0")));
            }
            if factors[..i].iter().any(|(other, _)| other == label) {
                return Err(LabError::InvalidShape(format!("duplicate label `{label}`")));
            }
        }
        let mut total: usize = 1;
        for (label, dim) in &factors {
            total = total.checked_mul(*dim).ok_or_else(|| {
                LabError::DimensionOverflow(format!("total dimension overflows at `{label}`"))
            })?;
        }
        Ok(Self { factors })
    }

    /// Shape with labels `A`, `B`, `C`, ... for the given dimensions.
    pub fn lettered(dims: &[usize]) -> Result<Self> {
        if dims.len() > 26 {
            return Err(LabError::InvalidShape("at most 26 lettered factors".into()));
        }
        Self::new(
            dims.iter().enumerate().map(|(i, &d)| (((b'A' + i as u8) as char).to_string(), d)),
        )
    }

    pub fn factors(&self) -> &[(String, usize)] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.factors.iter().map(|(l, _)| l.as_str()).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|(_, d)| *d).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|(_, d)| d).product()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.factors[i].0
    }

    pub fn dim(&self, i: usize) -> usize {
        self.factors[i].1
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.factors
            .iter()
            .position(|(l, _)| l == label)
            .ok_or_else(|| LabError::UnknownLabel(label.to_string()))
    }

    pub fn contains(&self, label: &str) -> bool {
        self.factors.iter().any(|(l, _)| l == label)
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.factors[self.position(label)?].1)
    }

    /// Sub-shape holding the given labels, in this shape's order.
    pub fn subshape(&self, labels: &[&str]) -> Result<Self> {
        for l in labels {
            self.position(l)?;
        }
        Ok(Self {
            factors: self
                .factors
                .iter()
                .filter(|(l, _)| labels.contains(&l.as_str()))
                .cloned()
                .collect(),
        })
    }

    /// Labels not in `labels`, in this shape's order.
    pub fn complement(&self, labels: &[&str]) -> Vec<&str> {
        self.factors
            .iter()
            .map(|(l, _)| l.as_str())
            .filter(|l| !labels.contains(l))
            .collect()
    }

    /// Concatenation of two shapes with disjoint labels.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        Self::new(self.factors.iter().chain(&other.factors).cloned())
    }

    /// Same shape with one label renamed.
    pub fn relabel(&self, from: &str, to: &str) -> Result<Self> {
        let pos = self.position(from)?;
        let mut factors = self.factors.clone();
        factors[pos].0 = to.to_string();
        Self::new(factors)
    }

    /// Same factors reordered to follow `order`, which must be a permutation of the labels.
    pub fn reordered(&self, order: &[&str]) -> Result<Self> {
        let perm = self.permutation_to(order)?;
        Ok(Self { factors: perm.iter().map(|&p| self.factors[p].clone()).collect() })
    }

    /// Positions (in `self`) of each label of `order`.
    fn permutation_to(&self, order: &[&str]) -> Result<Vec<usize>> {
        if order.len() != self.len() {
            return Err(LabError::InvalidArgument(format!(
                "permutation {order:?} does not match shape {self}"
            )));
        }
        let mut seen = vec![false; self.len()];
        let mut perm = Vec::with_capacity(order.len());
        for l in order {
            let p = self.position(l)?;
            if seen[p] {
                return Err(LabError::InvalidArgument(format!("label `{l}` repeated")));
            }
            seen[p] = true;
            perm.push(p);
        }
        Ok(perm)
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.len()];
        for i in (0..self.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.factors[i + 1].1;
        }
        strides
    }

    /// Maps every linear index of `self` to its linear index in `self.reordered(order)`.
    fn index_map(&self, order: &[&str]) -> Result<Vec<usize>> {
        let perm = self.permutation_to(order)?;
        let old_strides = self.strides();
        let new_dims: Vec<usize> = perm.iter().map(|&p| self.factors[p].1).collect();
        let mut new_strides = vec![1; perm.len()];
        for i in (0..perm.len().saturating_sub(1)).rev() {
            new_strides[i] = new_strides[i + 1] * new_dims[i + 1];
        }
        // stride in the new index for each old factor position
        let mut stride_of_old = vec![0; perm.len()];
        for (new_pos, &old_pos) in perm.iter().enumerate() {
            stride_of_old[old_pos] = new_strides[new_pos];
        }
        Ok((0..self.total_dim())
            .map(|idx| {
                (0..self.len())
                    .map(|f| (idx / old_strides[f]) % self.factors[f].1 * stride_of_old[f])
                    .sum()
            })
            .collect())
    }
}

fn check_operator(op: &ComplexMatrix, shape: &SystemShape) -> Result<()> {
    if !op.is_square() {
        return Err(LabError::NotSquare { rows: op.rows(), cols: op.cols() });
    }
    if op.rows() != shape.total_dim() {
        return Err(LabError::DimensionMismatch(format!(
            "{}x{} operator does not act on shape {shape} (dimension {})",
            op.rows(),
            op.cols(),
            shape.total_dim()
        )));
    }
    Ok(())
}

/// Permutation unitary `P` with `P |x_1 … x_n⟩ = |x_{π(1)} …⟩`, taking vectors
/// on `shape` to vectors on `shape.reordered(order)`.
pub fn permutation_matrix(shape: &SystemShape, order: &[&str]) -> Result<ComplexMatrix> {
    let map = shape.index_map(order)?;
    let n = shape.total_dim();
    let mut p = ComplexMatrix::zeros(n, n);
    for (old, &new) in map.iter().enumerate() {
        p[(new, old)] = C64::new(1.0, 0.0);
    }
    Ok(p)
}

/// Conjugates `op` by the factor permutation, returning it expressed on
/// `shape.reordered(order)`. Entries are moved, never recomputed.
pub fn permute_systems(
    op: &ComplexMatrix,
    shape: &SystemShape,
    order: &[&str],
) -> Result<ComplexMatrix> {
    check_operator(op, shape)?;
    let map = shape.index_map(order)?;
    let n = shape.total_dim();
    let mut out = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            out[(map[r], map[c])] = op[(r, c)];
        }
    }
    Ok(out)
}

/// Operator on `full` acting as `op` on the `support` factors and as the
/// identity elsewhere. `op` is ordered like the support labels appear in `full`.
pub fn embed(op: &ComplexMatrix, support: &[&str], full: &SystemShape) -> Result<ComplexMatrix> {
    let sub = full.subshape(support)?;
    check_operator(op, &sub)?;
    let rest = full.complement(support);
    let rest_dim: usize = rest.iter().map(|l| full.dim_of(l)).product::<Result<usize>>()?;
    let padded = kron(op, &ComplexMatrix::identity(rest_dim))?;
    let padded_shape = sub.concat(&full.subshape(&rest)?)?;
    permute_systems(&padded, &padded_shape, &full.labels())
}

/// Traces out the `traced` factors, one factor at a time in shape order.
///
/// Tracing `{B}` and then `{C}` is therefore bit-identical to tracing `{B, C}`.
pub fn partial_trace(
    op: &ComplexMatrix,
    shape: &SystemShape,
    traced: &[&str],
) -> Result<ComplexMatrix> {
    check_operator(op, shape)?;
    for l in traced {
        shape.position(l)?;
    }
    let mut current = op.clone();
    let mut current_shape = shape.clone();
    for label in shape.labels() {
        if traced.contains(&label) {
            let pos = current_shape.position(label)?;
            current = trace_factor(&current, &current_shape, pos);
            let keep = current_shape.complement(&[label]);
            current_shape = current_shape.subshape(&keep)?;
        }
    }
    Ok(current)
}

/// Traces a single factor by stride arithmetic: the linear index splits as
/// `outer · (d · inner) + k · inner + inner_idx`.
fn trace_factor(op: &ComplexMatrix, shape: &SystemShape, pos: usize) -> ComplexMatrix {
    let d = shape.dim(pos);
    let inner: usize = shape.dims()[pos + 1..].iter().product();
    let outer: usize = shape.dims()[..pos].iter().product();
    let kept = outer * inner;
    if kept == 0 {
        return ComplexMatrix::zeros(1, 1);
    }
    let full_index = |o: usize, k: usize, i: usize| (o * d + k) * inner + i;
    let mut out = ComplexMatrix::zeros(kept, kept);
    for ro in 0..outer {
        for ri in 0..inner {
            let r = ro * inner + ri;
            for co in 0..outer {
                for ci in 0..inner {
                    let c = co * inner + ci;
                    let mut acc = C64::new(0.0, 0.0);
                    for k in 0..d {
                        acc += op[(full_index(ro, k, ri), full_index(co, k, ci))];
                    }
                    out[(r, c)] = acc;
                }
            }
        }
    }
    out
}
