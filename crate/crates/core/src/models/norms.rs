//! Estimation of `‖u‖_D = sup_z u(z) + sup_z ‖u(T_z ·)‖_{H̃1}` for Dirichlet
//! models, where `T_z x = (z_1 x_1, …, z_d x_d)`.
//!
//! Substituting `y = T_z x` turns the scaled semi-norm into
//! `Σ_{v≠∅} ∫_{[0,z_v]} |∂_v u(y_v; z_{−v})| dy_v`, a cumulative integral in
//! `z_v`. All anchors of a uniform grid are therefore covered by one pass of
//! per-cell quadrature followed by prefix sums.

use serde::Serialize;

use super::dirichlet::{eval_terms, PartialTerm};
use super::{DirichletModel, SubsetIndex};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_clipped, GaussLegendre};

/// Largest dimension for which the grid estimate is offered.
pub const MAX_UD_DIM: usize = 5;

/// Resolution of the `‖u‖_D` estimate. For `d > 3` both values are thinned
/// to `value^{3/d}` so the work stays comparable to `d = 3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct UdConfig {
    /// Anchors per axis, at least 8.
    pub grid: usize,
    /// Gauss–Legendre points per axis and cell, at least 4.
    pub order: usize,
}

impl Default for UdConfig {
    fn default() -> Self {
        UdConfig { grid: 32, order: 8 }
    }
}

/// An estimate of `‖u‖_D`; not a certified bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UdEstimate {
    pub value: f64,
    pub sup_u: f64,
    pub sup_seminorm: f64,
    /// Anchor attaining the semi-norm maximum.
    pub argmax: Vec<f64>,
    /// Effective anchors per axis and quadrature order.
    pub grid: usize,
    pub order: usize,
    /// Change against a run at half the grid and half the order.
    pub refinement_delta: f64,
}

impl UdEstimate {
    pub(crate) fn uniform(dim: usize) -> Self {
        UdEstimate {
            value: 1.0,
            sup_u: 1.0,
            sup_seminorm: 0.0,
            argmax: vec![1.0; dim],
            grid: 1,
            order: 1,
            refinement_delta: 0.0,
        }
    }
}

fn thin(value: usize, dim: usize) -> usize {
    if dim <= 3 {
        value
    } else {
        ((value as f64).powf(3.0 / dim as f64).round() as usize).max(2)
    }
}

/// `‖u‖_D` with the default resolution.
pub fn u_d_norm_estimate(model: &DirichletModel) -> Result<UdEstimate> {
    u_d_norm_estimate_with(model, UdConfig::default())
}

pub fn u_d_norm_estimate_with(model: &DirichletModel, config: UdConfig) -> Result<UdEstimate> {
    model.check_derivative_preconditions()?;
    let d = model.dim();
    if d > MAX_UD_DIM {
        return Err(Error::DimensionOutOfRange {
            dim: d,
            max: MAX_UD_DIM,
        });
    }
    if config.grid < 8 || config.order < 4 {
        return Err(Error::InvalidParameter(format!(
            "u_D grid must be >= 8 and order >= 4, got {} and {}",
            config.grid, config.order
        )));
    }
    let grid = thin(config.grid, d);
    let order = thin(config.order, d);
    let (sup_seminorm, argmax) = sup_scaled_seminorm(model, grid, order);
    let (coarse, _) = sup_scaled_seminorm(model, (grid / 2).max(2), (order / 2).max(2));
    let sup_u = model.sup();
    Ok(UdEstimate {
        value: sup_u + sup_seminorm,
        sup_u,
        sup_seminorm,
        argmax,
        grid,
        order,
        refinement_delta: (sup_seminorm - coarse).abs(),
    })
}

/// Maximum of `‖u(T_z ·)‖_{H̃1}` over the anchors `z ∈ {1/g, …, 1}^d`.
fn sup_scaled_seminorm(model: &DirichletModel, grid: usize, order: usize) -> (f64, Vec<f64>) {
    let d = model.dim();
    let rule = GaussLegendre::new(order);
    let anchors = grid.pow(d as u32);
    let mut total = vec![0.0; anchors];
    let step = 1.0 / grid as f64;

    for v in SubsetIndex::nonempty(d) {
        let terms = model.partial_terms(v);
        let inside: Vec<usize> = v.iter().collect();
        let outside: Vec<usize> = (0..d).filter(|i| !v.contains(*i)).collect();
        let cells = grid.pow(inside.len() as u32);
        let ones = vec![1.0; inside.len()];
        let mut cumulative = vec![0.0; cells];
        let mut x = vec![0.0; d];
        let mut lo = vec![0.0; inside.len()];
        let mut hi = vec![0.0; inside.len()];

        for w in 0..grid.pow(outside.len() as u32) {
            let w_index = digits(w, grid, outside.len());
            let mut fixed = 0.0;
            for (k, &i) in outside.iter().enumerate() {
                x[i] = (w_index[k] + 1) as f64 * step;
                fixed += x[i];
            }
            let room = 1.0 - fixed;
            if room <= 0.0 {
                continue;
            }
            for (c, slot) in cumulative.iter_mut().enumerate() {
                let c_index = digits(c, grid, inside.len());
                for k in 0..inside.len() {
                    lo[k] = c_index[k] as f64 * step;
                    hi[k] = lo[k] + step;
                }
                *slot = integrate_clipped(&rule, &lo, &hi, &ones, room, |y| {
                    for (k, &i) in inside.iter().enumerate() {
                        x[i] = y[k];
                    }
                    eval_terms(&terms, &x).abs()
                });
            }
            prefix_sum(&mut cumulative, grid, inside.len());
            for (c, value) in cumulative.iter().enumerate() {
                let c_index = digits(c, grid, inside.len());
                let mut flat = 0;
                for i in (0..d).rev() {
                    let t = match inside.iter().position(|&j| j == i) {
                        Some(k) => c_index[k],
                        None => w_index[outside.iter().position(|&j| j == i).unwrap()],
                    };
                    flat = flat * grid + t;
                }
                total[flat] += value;
            }
        }
    }

    let (best, value) =
        total.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, &t)| if t > acc.1 { (i, t) } else { acc },
        );
    let argmax = digits(best, grid, d)
        .iter()
        .map(|&t| (t + 1) as f64 * step)
        .collect();
    (value, argmax)
}

/// Base-`base` digits of `index`, least significant first.
fn digits(mut index: usize, base: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut() {
        *slot = index % base;
        index /= base;
    }
    out
}

/// In-place inclusive prefix sum along every axis of a `side^dims` array
/// stored with axis 0 fastest.
fn prefix_sum(values: &mut [f64], side: usize, dims: usize) {
    let mut stride = 1;
    for _ in 0..dims {
        for i in 0..values.len() {
            if (i / stride) % side != 0 {
                values[i] += values[i - stride];
            }
        }
        stride *= side;
    }
}

/// `‖u(T_z ·)‖_{H̃1}` at a single anchor, by quadrature over `[0,1]^{|v|}`
/// of `∏_{i∈v} z_i · |Σ c · u(T_z(x_v; 1); α − shift)|`.
pub fn scaled_seminorm(model: &DirichletModel, z: &[f64], order: usize) -> Result<f64> {
    model.check_derivative_preconditions()?;
    let d = model.dim();
    if z.len() != d || z.iter().any(|c| !(0.0..=1.0).contains(c)) {
        return Err(Error::InvalidParameter("anchor must lie in [0,1]^d".into()));
    }
    let rule = GaussLegendre::new(order);
    let mut sum = 0.0;
    for v in SubsetIndex::nonempty(d) {
        let terms: Vec<PartialTerm> = model.partial_terms(v);
        let inside: Vec<usize> = v.iter().collect();
        let jacobian: f64 = inside.iter().map(|&i| z[i]).product();
        if jacobian == 0.0 {
            continue;
        }
        let room = 1.0
            - (0..d)
                .filter(|i| !v.contains(*i))
                .map(|i| z[i])
                .sum::<f64>();
        if room <= 0.0 {
            continue;
        }
        let mut x = z.to_vec();
        let lo = vec![0.0; inside.len()];
        let hi = vec![1.0; inside.len()];
        let slope: Vec<f64> = inside.iter().map(|&i| z[i]).collect();
        sum += jacobian
            * integrate_clipped(&rule, &lo, &hi, &slope, room, |t| {
                for (k, &i) in inside.iter().enumerate() {
                    x[i] = z[i] * t[k];
                }
                eval_terms(&terms, &x).abs()
            });
    }
    Ok(sum)
}
