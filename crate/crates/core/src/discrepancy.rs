//! Classical and weighted star-discrepancy over boxes anchored at the origin.
//!
//! The exact routines enumerate the critical grid. Along axis `j` let
//! `g_j` be the sorted distinct point coordinates followed by the sentinel
//! `1`. The cell `k` on that axis is the half-open interval
//! `(g_j[k-1], g_j[k]]` (with `g_j[-1] = 0`), and inside a product of such
//! cells the set of points in `[0, y)` does not change. The supremum of
//! `|Σ w_i 1{x_i ∈ [0,y)} − π([0,y))|` over a cell is therefore reached
//! either at its upper corner (open box) or as the one-sided limit at its
//! lower corner (closed box), since `π([0,y))` is monotone. Both are
//! evaluated for every cell.
//!
//! Point masses are accumulated slab by slab along the first axis with
//! prefix sums over the remaining axes, so memory stays at one
//! `(d-1)`-dimensional slab.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::CompensatedSum;
use crate::sequences::PointSet;

/// Default cap on the number of critical-grid cells for exact enumeration.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Tolerance on `Σ w_i = 1`.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscrepancyMode {
    Exact,
    LowerBound,
}

/// Value of a (weighted) star-discrepancy together with the box attaining it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyResult {
    pub value: f64,
    pub mode: DiscrepancyMode,
    /// Upper corner `y` of the anchored box attaining the value.
    pub witness: Vec<f64>,
    /// `true` when the value is the one-sided limit from above at `witness`
    /// (points on the upper faces counted), `false` for the half-open box.
    pub witness_closed: bool,
    pub boxes_evaluated: u64,
    /// Accuracy of the box-measure oracle; 0 for the Lebesgue measure.
    pub oracle_eps: f64,
}

/// Point weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        if let Some(bad) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite weight {bad}")));
        }
        let sum = weights.iter().copied().collect::<CompensatedSum>().value();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::WeightsNotNormalized { sum });
        }
        Ok(WeightVector(weights))
    }

    /// `(1/n, …, 1/n)`.
    pub fn uniform(n: usize) -> Self {
        WeightVector(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// A value of `π([0, z))` and its absolute accuracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureValue {
    pub value: f64,
    pub eps: f64,
}

/// Mass of one grid cell computed by a primary rule and a cheaper check rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellMass {
    pub value: f64,
    pub check: f64,
}

/// Target measure `π` on `[0,1]^d`, accessed through anchored boxes.
///
/// Implementations must be monotone in every coordinate of `z`, vanish on
/// empty boxes and give at most `1` on the full cube.
pub trait BoxMeasureOracle: Sync {
    fn dim(&self) -> usize;

    /// `π([0, z))`.
    fn measure(&self, corner: &[f64]) -> MeasureValue;

    /// `π([lo, hi))`, for oracles that integrate cells directly. When this
    /// returns `Some`, the weighted discrepancy tabulates `π` by cumulative
    /// sums of cell masses and derives the accuracy from the check rule.
    fn cell_mass(&self, _lo: &[f64], _hi: &[f64]) -> Option<CellMass> {
        None
    }
}

/// The Lebesgue measure on `[0,1]^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lebesgue {
    pub dim: usize,
}

impl BoxMeasureOracle for Lebesgue {
    fn dim(&self) -> usize {
        self.dim
    }

    fn measure(&self, corner: &[f64]) -> MeasureValue {
        MeasureValue {
            value: corner.iter().product(),
            eps: 0.0,
        }
    }
}

/// Self-normalized importance weights `w_i = u(x_i) / Σ_j u(x_j)`.
pub fn self_normalized_weights<U: Fn(&[f64]) -> f64>(
    points: &PointSet,
    u: U,
) -> Result<WeightVector> {
    let values = density_values(points, u)?;
    let total = values.iter().copied().collect::<CompensatedSum>().value();
    if total <= 0.0 {
        return Err(Error::AllWeightsZero);
    }
    Ok(WeightVector(
        values.into_iter().map(|v| v / total).collect(),
    ))
}

pub(crate) fn density_values<U: Fn(&[f64]) -> f64>(points: &PointSet, u: U) -> Result<Vec<f64>> {
    points
        .iter()
        .enumerate()
        .map(|(index, x)| {
            let value = u(x);
            if value.is_finite() && value >= 0.0 {
                Ok(value)
            } else {
                Err(Error::InvalidDensity { index, value })
            }
        })
        .collect()
}

/// Exact classical star-discrepancy `D_λ(P)`.
pub fn star_discrepancy_exact(points: &PointSet, budget: u64) -> Result<DiscrepancyResult> {
    let lebesgue = Lebesgue { dim: points.dim() };
    enumerate(points, Masses::Counts, &lebesgue, budget)
}

/// Exact (up to oracle accuracy) weighted star-discrepancy `D_π(w, P)`.
pub fn weighted_star_discrepancy(
    points: &PointSet,
    weights: &WeightVector,
    oracle: &dyn BoxMeasureOracle,
    budget: u64,
) -> Result<DiscrepancyResult> {
    if weights.len() != points.len() {
        return Err(Error::SizeMismatch {
            points: points.len(),
            weights: weights.len(),
        });
    }
    if oracle.dim() != points.dim() {
        return Err(Error::InvalidParameter(format!(
            "oracle dimension {} differs from point dimension {}",
            oracle.dim(),
            points.dim()
        )));
    }
    enumerate(points, Masses::Weights(weights.as_slice()), oracle, budget)
}

/// Local discrepancy `|Σ w_i 1{x_i ∈ B} − π(B)|` at a single corner, counted
/// directly. `closed` selects `[0, y]` (the limit from above) instead of
/// `[0, y)`. With `weights = None` every point carries `1/n`.
pub fn local_discrepancy(
    points: &PointSet,
    weights: Option<&WeightVector>,
    oracle: &dyn BoxMeasureOracle,
    corner: &[f64],
    closed: bool,
) -> f64 {
    let n = points.len();
    let inside = |x: &[f64]| {
        x.iter()
            .zip(corner)
            .all(|(&c, &y)| if closed { c <= y } else { c < y })
    };
    let mass = match weights {
        Some(w) => points
            .iter()
            .zip(w.as_slice())
            .filter(|(x, _)| inside(x))
            .map(|(_, &wi)| wi)
            .collect::<CompensatedSum>()
            .value(),
        None => points.iter().filter(|x| inside(x)).count() as f64 / n as f64,
    };
    (mass - oracle.measure(corner).value).abs()
}

enum Masses<'a> {
    Counts,
    Weights(&'a [f64]),
}

/// Per-axis critical values and point ranks.
struct CriticalGrid {
    dim: usize,
    /// `nodes[j][t]`: `0` for `t = 0`, else the `t-1`-th distinct value
    /// (sentinel 1 last). Cells along axis `j` are `0..nodes[j].len()-1`.
    nodes: Vec<Vec<f64>>,
    /// `ranks[i*d + j]`: index of point `i`'s coordinate `j` among the
    /// distinct values.
    ranks: Vec<u32>,
}

impl CriticalGrid {
    fn new(points: &PointSet) -> Self {
        let d = points.dim();
        let n = points.len();
        let mut nodes = Vec::with_capacity(d);
        let mut ranks = vec![0u32; n * d];
        for j in 0..d {
            let mut vals: Vec<f64> = points.iter().map(|x| x[j]).collect();
            vals.push(1.0);
            vals.sort_by(f64::total_cmp);
            vals.dedup();
            for (i, x) in points.iter().enumerate() {
                let r = vals.partition_point(|&v| v < x[j]);
                ranks[i * d + j] = r as u32;
            }
            let mut axis = Vec::with_capacity(vals.len() + 1);
            axis.push(0.0);
            axis.extend(vals);
            nodes.push(axis);
        }
        CriticalGrid {
            dim: d,
            nodes,
            ranks,
        }
    }

    fn cells(&self, j: usize) -> usize {
        self.nodes[j].len() - 1
    }

    fn cell_count(&self) -> u128 {
        (0..self.dim).map(|j| self.cells(j) as u128).product()
    }
}

/// Row-major layout of the node grid over axes `1..d`.
struct Slab {
    shape: Vec<usize>,
    strides: Vec<usize>,
    size: usize,
}

impl Slab {
    fn new(shape: Vec<usize>) -> Self {
        let mut strides = vec![1; shape.len()];
        for j in (0..shape.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * shape[j + 1];
        }
        let size = shape.iter().product();
        Slab {
            shape,
            strides,
            size,
        }
    }

    /// In-place inclusive prefix sums along every axis.
    fn prefix_sum(&self, a: &mut [f64]) {
        for (&len, &stride) in self.shape.iter().zip(&self.strides) {
            let block = len * stride;
            for start in (0..self.size).step_by(block) {
                for t in 1..len {
                    let row = start + t * stride;
                    for k in 0..stride {
                        a[row + k] += a[row + k - stride];
                    }
                }
            }
        }
    }
}

#[derive(Clone)]
struct Best {
    value: f64,
    key: Vec<u32>,
    closed: bool,
}

impl Best {
    fn offer(&mut self, value: f64, key: &[u32], closed: bool) {
        let better = value > self.value
            || (value == self.value && (key, closed) < (self.key.as_slice(), self.closed));
        if better {
            self.value = value;
            self.key.clear();
            self.key.extend_from_slice(key);
            self.closed = closed;
        }
    }
}

fn enumerate(
    points: &PointSet,
    masses: Masses<'_>,
    oracle: &dyn BoxMeasureOracle,
    budget: u64,
) -> Result<DiscrepancyResult> {
    let grid = CriticalGrid::new(points);
    let d = grid.dim;
    let n = points.len();
    let cells = grid.cell_count();
    if cells > budget as u128 {
        return Err(Error::BudgetExceeded {
            grid: cells,
            budget,
        });
    }
    let (weights, denom): (Vec<f64>, f64) = match masses {
        Masses::Counts => (vec![1.0; n], n as f64),
        Masses::Weights(w) => (w.to_vec(), 1.0),
    };

    let slab = Slab::new((1..d).map(|j| grid.nodes[j].len()).collect());
    let up_offset: usize = slab.strides.iter().sum();
    let rest = d - 1;

    // Points ordered by their rank along axis 0 for incremental insertion.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| grid.ranks[i * d]);
    let mut next_point = 0;

    let mut raw = vec![0.0; slab.size];
    let mut mass = vec![0.0; slab.size];
    let mut f_prev = vec![0.0; slab.size];
    let mut f_cur = vec![0.0; slab.size];
    let mut check_prev = vec![0.0; slab.size];
    let mut check_cur = vec![0.0; slab.size];
    let mut scratch = vec![0.0; slab.size];
    let mut scratch_check = vec![0.0; slab.size];

    let probe_lo = vec![0.0; d];
    let probe_hi = vec![1.0; d];
    let tabulated = oracle.cell_mass(&probe_lo, &probe_hi).is_some();

    let mut eps_point: f64 = 0.0;
    let mut max_check_diff: f64 = 0.0;

    let mut best = Best {
        value: -1.0,
        key: vec![u32::MAX; d],
        closed: true,
    };
    let mut key = vec![0u32; d];
    let mut corner = vec![0.0; d];
    let mut lo = vec![0.0; d];
    let mut hi = vec![0.0; d];
    let mut idx = vec![0usize; rest];

    for k0 in 0..grid.cells(0) {
        // Point masses for cell k0: points with rank_0 < k0.
        while next_point < n && (grid.ranks[order[next_point] * d] as usize) < k0 {
            let i = order[next_point];
            let mut flat = 0;
            for j in 1..d {
                flat += (grid.ranks[i * d + j] as usize + 1) * slab.strides[j - 1];
            }
            raw[flat] += weights[i];
            next_point += 1;
        }
        mass.copy_from_slice(&raw);
        slab.prefix_sum(&mut mass);

        // π at node k0 + 1 along axis 0.
        let x0_lo = grid.nodes[0][k0];
        let x0_hi = grid.nodes[0][k0 + 1];
        if tabulated {
            idx.iter_mut().for_each(|t| *t = 0);
            for flat in 0..slab.size {
                let mut m = CellMass {
                    value: 0.0,
                    check: 0.0,
                };
                if idx.iter().all(|&t| t > 0) {
                    lo[0] = x0_lo;
                    hi[0] = x0_hi;
                    for j in 0..rest {
                        lo[j + 1] = grid.nodes[j + 1][idx[j] - 1];
                        hi[j + 1] = grid.nodes[j + 1][idx[j]];
                    }
                    m = oracle.cell_mass(&lo, &hi).ok_or_else(|| {
                        Error::InvalidOracle("cell_mass became unavailable".into())
                    })?;
                }
                scratch[flat] = m.value;
                scratch_check[flat] = m.check;
                advance(&mut idx, &slab.shape);
            }
            slab.prefix_sum(&mut scratch);
            slab.prefix_sum(&mut scratch_check);
            for t in 0..slab.size {
                f_cur[t] = f_prev[t] + scratch[t];
                check_cur[t] = check_prev[t] + scratch_check[t];
                max_check_diff = max_check_diff.max((f_cur[t] - check_cur[t]).abs());
            }
        } else {
            idx.iter_mut().for_each(|t| *t = 0);
            corner[0] = x0_hi;
            for f in f_cur.iter_mut() {
                for j in 0..rest {
                    corner[j + 1] = grid.nodes[j + 1][idx[j]];
                }
                let mv = oracle.measure(&corner);
                *f = mv.value;
                eps_point = eps_point.max(mv.eps);
                advance(&mut idx, &slab.shape);
            }
        }
        let eps_now = eps_point.max(max_check_diff);
        validate_slab(&f_prev, &f_cur, &slab, eps_now)?;

        // Evaluate both corners of every cell in the slab.
        idx.iter_mut().for_each(|t| *t = 0);
        let rest_cells: usize = (1..d).map(|j| grid.cells(j)).product();
        let mut lo_flat = 0usize;
        key[0] = k0 as u32;
        for _ in 0..rest_cells {
            let s = mass[lo_flat] / denom;
            let v_lo = (s - f_prev[lo_flat]).abs();
            let v_up = (s - f_cur[lo_flat + up_offset]).abs();
            if v_lo >= best.value || v_up >= best.value {
                for j in 0..rest {
                    key[j + 1] = idx[j] as u32;
                }
                best.offer(v_lo, &key, true);
                key.iter_mut().for_each(|k| *k += 1);
                best.offer(v_up, &key, false);
                key[0] = k0 as u32;
            }
            // advance over cells (not nodes) of the rest axes
            let mut j = rest;
            while j > 0 {
                j -= 1;
                idx[j] += 1;
                lo_flat += slab.strides[j];
                if idx[j] < grid.cells(j + 1) {
                    break;
                }
                lo_flat -= idx[j] * slab.strides[j];
                idx[j] = 0;
            }
        }
        std::mem::swap(&mut f_prev, &mut f_cur);
        std::mem::swap(&mut check_prev, &mut check_cur);
    }

    let witness = best
        .key
        .iter()
        .enumerate()
        .map(|(j, &t)| grid.nodes[j][t as usize])
        .collect();
    let oracle_eps = if tabulated {
        max_check_diff + 1e-15
    } else {
        eps_point
    };
    Ok(DiscrepancyResult {
        value: best.value.max(0.0),
        mode: DiscrepancyMode::Exact,
        witness,
        witness_closed: best.closed,
        boxes_evaluated: (2 * cells) as u64,
        oracle_eps,
    })
}

/// Row-major odometer step over `shape`.
fn advance(idx: &mut [usize], shape: &[usize]) {
    let mut j = idx.len();
    while j > 0 {
        j -= 1;
        idx[j] += 1;
        if idx[j] < shape[j] {
            return;
        }
        idx[j] = 0;
    }
}

fn validate_slab(prev: &[f64], cur: &[f64], slab: &Slab, eps: f64) -> Result<()> {
    let tol = 2.0 * eps + 1e-12;
    for (t, (&p, &c)) in prev.iter().zip(cur).enumerate() {
        if !c.is_finite() || c < -tol || c > 1.0 + tol {
            return Err(Error::InvalidOracle(format!(
                "box measure {c} outside [0, 1]"
            )));
        }
        if c < p - tol {
            return Err(Error::InvalidOracle(format!(
                "box measure decreased from {p} to {c} along the first axis"
            )));
        }
        if let Some(&len) = slab.shape.last() {
            if t % len > 0 && c < cur[t - 1] - tol {
                return Err(Error::InvalidOracle(format!(
                    "box measure decreased from {} to {c} along the last axis",
                    cur[t - 1]
                )));
            }
        }
    }
    Ok(())
}

/// Lower bound on `D_λ(P)` from `effort` random critical corners, each
/// followed by one coordinate-wise improvement sweep. Deterministic in
/// `seed`; a run with larger effort and the same seed visits a superset of
/// corners.
pub fn star_discrepancy_lower_bound(
    points: &PointSet,
    effort: u64,
    seed: u64,
) -> DiscrepancyResult {
    let grid = CriticalGrid::new(points);
    let d = grid.dim;
    let n = points.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = Best {
        value: -1.0,
        key: vec![u32::MAX; d],
        closed: true,
    };
    let mut evaluated = 0u64;
    let mut k = vec![0usize; d];
    let mut key = vec![0u32; d];
    let mut hist: Vec<u32> = Vec::new();
    for _ in 0..effort.max(1) {
        for (j, kj) in k.iter_mut().enumerate() {
            *kj = rng.gen_range(0..grid.cells(j));
        }
        for j in 0..d {
            let m = grid.cells(j);
            hist.clear();
            hist.resize(m + 1, 0);
            for i in 0..n {
                let r = &grid.ranks[i * d..(i + 1) * d];
                if (0..d).all(|a| a == j || (r[a] as usize) < k[a]) {
                    hist[r[j] as usize + 1] += 1;
                }
            }
            let mut vol_lo_rest = 1.0;
            let mut vol_up_rest = 1.0;
            for a in (0..d).filter(|&a| a != j) {
                vol_lo_rest *= grid.nodes[a][k[a]];
                vol_up_rest *= grid.nodes[a][k[a] + 1];
            }
            let mut count = 0u32;
            let mut best_c = k[j];
            let mut best_here = -1.0;
            for (c, &h) in hist.iter().enumerate().take(m) {
                count += h;
                let s = count as f64 / n as f64;
                let v_lo = (s - grid.nodes[j][c] * vol_lo_rest).abs();
                let v_up = (s - grid.nodes[j][c + 1] * vol_up_rest).abs();
                evaluated += 2;
                for (a, ka) in k.iter().enumerate() {
                    key[a] = *ka as u32;
                }
                key[j] = c as u32;
                best.offer(v_lo, &key, true);
                key.iter_mut().for_each(|x| *x += 1);
                best.offer(v_up, &key, false);
                let here = v_lo.max(v_up);
                if here > best_here {
                    best_here = here;
                    best_c = c;
                }
            }
            k[j] = best_c;
        }
    }
    let witness = best
        .key
        .iter()
        .enumerate()
        .map(|(j, &t)| grid.nodes[j][t as usize])
        .collect();
    DiscrepancyResult {
        value: best.value.max(0.0),
        mode: DiscrepancyMode::LowerBound,
        witness,
        witness_closed: best.closed,
        boxes_evaluated: evaluated,
        oracle_eps: 0.0,
    }
}
