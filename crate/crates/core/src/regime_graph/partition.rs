//! The interval representation of the switching mechanism.
//!
//! For fixed `x`, the rates are laid out as consecutive half-open intervals
//! on `[0, inf)`: row 1 first (targets in increasing order, skipping the
//! diagonal), then row 2 starting at `q_1(x)`, and so on. A mark `z` in the
//! interval of `(i, j)` means "jump from `i` to `j`"; the jump function
//! `h(x, i, z)` returns the displacement `j - i`, or zero elsewhere.

use super::QMatrixSpec;
use crate::error::ModelError;
use crate::Regime;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub from: Regime,
    pub to: Regime,
    pub left: f64,
    pub right: f64,
}

impl Interval {
    pub fn len(&self) -> f64 {
        self.right - self.left
    }

    pub fn is_empty(&self) -> bool {
        self.right <= self.left
    }

    pub fn displacement(&self) -> i64 {
        self.to as i64 - self.from as i64
    }
}

/// Disjoint intervals for rows `1..=m` at a fixed point, sorted by left end.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalPartition {
    entries: Vec<Interval>,
    total: f64,
}

impl IntervalPartition {
    pub fn entries(&self) -> &[Interval] {
        &self.entries
    }

    /// Covered length, i.e. `sum_{i<=m} q_i(x)`.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The interval containing `z`, if any. Ties resolve half-open.
    pub fn locate(&self, z: f64) -> Option<&Interval> {
        let k = self.entries.partition_point(|e| e.left <= z);
        let e = self.entries.get(k.checked_sub(1)?)?;
        (z < e.right).then_some(e)
    }

    /// `h(x, i, z)` for the point this partition was built at.
    pub fn h(&self, i: Regime, z: f64) -> i64 {
        match self.locate(z) {
            Some(e) if e.from == i => e.displacement(),
            _ => 0,
        }
    }

    fn row_entries(&self, i: Regime) -> impl Iterator<Item = &Interval> {
        self.entries.iter().filter(move |e| e.from == i)
    }
}

/// Lay out rows `1..=m` of `q` at `x`.
pub fn build_partition(q: &QMatrixSpec, x: &[f64], m: usize) -> Result<IntervalPartition, ModelError> {
    if m == 0 {
        return Err(ModelError::InvalidArgument("partition needs at least one row".into()));
    }
    let mut entries = Vec::new();
    let mut acc = 0.0;
    for i in 1..=m {
        if !q.contains(i) {
            break;
        }
        for (j, r) in q.row(x, i)? {
            if r > 0.0 {
                entries.push(Interval { from: i, to: j, left: acc, right: acc + r });
            }
            acc += r;
        }
    }
    Ok(IntervalPartition { entries, total: acc })
}

/// Row `i` of the layout at `x`, positioned at its absolute offset
/// `sum_{k<i} q_k(x)`. Only rows `1..=i` are evaluated.
pub fn row_block(q: &QMatrixSpec, x: &[f64], i: Regime) -> Result<IntervalPartition, ModelError> {
    let full = build_partition(q, x, i)?;
    let start = full.row_entries(i).next().map(|e| e.left);
    let entries: Vec<Interval> = full.row_entries(i).copied().collect();
    let total = match (start, entries.last()) {
        (Some(s), Some(e)) => e.right - s,
        _ => 0.0,
    };
    Ok(IntervalPartition { entries, total })
}

/// `h(x, i, z)` via an already-built partition.
pub fn h_eval(part: &IntervalPartition, i: Regime, z: f64) -> i64 {
    part.h(i, z)
}

/// `int |h(x,i,z) - h(y,i,z)|^p dz`, computed exactly by sweeping the merged
/// endpoints of row `i` at `x` and at `y`.
pub fn h_lp_distance(q: &QMatrixSpec, x: &[f64], y: &[f64], i: Regime, p: f64) -> Result<f64, ModelError> {
    if !(p > 0.0) {
        return Err(ModelError::InvalidArgument(format!("exponent p must be positive, got {p}")));
    }
    let a = row_block(q, x, i)?;
    let b = row_block(q, y, i)?;
    for part in [&a, &b] {
        if !part.entries.last().is_none_or(|e| e.right.is_finite()) {
            return Err(ModelError::InvalidArgument("unbounded row sum".into()));
        }
    }
    let mut cuts: Vec<f64> = a
        .entries
        .iter()
        .chain(b.entries.iter())
        .flat_map(|e| [e.left, e.right])
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let value = |part: &IntervalPartition, z: f64| part.h(i, z);
    let mut acc = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        // Piecewise constant between consecutive cuts; probe at the left end.
        let d = (value(&a, lo) - value(&b, lo)).unsigned_abs();
        if d != 0 {
            acc += (d as f64).powf(p) * (hi - lo);
        }
    }
    Ok(acc)
}

/// The closed-form Lipschitz bound `2 kappa^(p+1) (kappa + 2i) c_q dist` on
/// the `L^p` distance between jump functions at two points.
pub fn row_displacement_bound(q: &QMatrixSpec, i: Regime, p: f64, dist: f64) -> f64 {
    let kappa = q.bandwidth as f64;
    2.0 * kappa.powf(p + 1.0) * (kappa + 2.0 * i as f64) * q.lipschitz_cq * dist
}
