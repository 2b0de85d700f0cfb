//! Gauss–Legendre rules, compensated summation, and integration over a box
//! cut by a half-space `{a·x ≤ r}`.
//!
//! The clipped integrator is what makes the Dirichlet computations accurate:
//! the density and its mixed partials are smooth inside the simplex but have
//! a kink (or a jump) on its boundary, so every cell crossing the boundary is
//! split along that hyperplane before a tensor rule is applied.

use crate::sequences::MAX_QMC_DIM;

/// Maximum dimension handled by the clipped integrator.
pub const MAX_DIM: usize = MAX_QMC_DIM;

/// Gauss–Legendre rule mapped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `order`-point rule by Newton iteration on `P_order`.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // map [-1, 1] -> [0, 1]
            nodes[i] = 0.5 * (1.0 - x);
            nodes[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// One-dimensional integral of `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let h = b - a;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(t, w)| w * f(a + h * t))
            .sum::<f64>()
            * h
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Tensor-product rule over the box `[lo, hi]`.
pub fn integrate_box<F: FnMut(&[f64]) -> f64>(
    rule: &GaussLegendre,
    lo: &[f64],
    hi: &[f64],
    mut f: F,
) -> f64 {
    let d = lo.len();
    assert!(d <= MAX_DIM && hi.len() == d);
    let q = rule.order();
    let mut idx = [0usize; MAX_DIM];
    let mut x = [0.0f64; MAX_DIM];
    let mut vol = 1.0;
    for j in 0..d {
        vol *= hi[j] - lo[j];
    }
    if vol == 0.0 {
        return 0.0;
    }
    let mut total = 0.0;
    loop {
        let mut w = 1.0;
        for j in 0..d {
            let t = rule.nodes[idx[j]];
            x[j] = lo[j] + (hi[j] - lo[j]) * t;
            w *= rule.weights[idx[j]];
        }
        total += w * f(&x[..d]);
        // odometer
        let mut j = 0;
        loop {
            if j == d {
                return total * vol;
            }
            idx[j] += 1;
            if idx[j] < q {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

/// Integral of `f` over `{x ∈ [lo, hi] : Σ a_i x_i ≤ r}` with all `a_i ≥ 0`.
///
/// The region is integrated as an iterated integral. Along each axis the
/// range is clipped by the half-space and split wherever the hyperplane
/// passes through a vertex of the remaining sub-box, so that every piece
/// handed to the Gauss–Legendre rule has a smooth integrand whenever `f` is
/// smooth on the region.
pub fn integrate_clipped<F: FnMut(&[f64]) -> f64>(
    rule: &GaussLegendre,
    lo: &[f64],
    hi: &[f64],
    a: &[f64],
    r: f64,
    mut f: F,
) -> f64 {
    let d = lo.len();
    assert!(d <= MAX_DIM && hi.len() == d && a.len() == d);
    debug_assert!(a.iter().all(|&c| c >= 0.0));
    let min_sum: f64 = (0..d).map(|j| a[j] * lo[j]).sum();
    if min_sum >= r {
        return 0.0;
    }
    let max_sum: f64 = (0..d).map(|j| a[j] * hi[j]).sum();
    if max_sum <= r {
        return integrate_box(rule, lo, hi, f);
    }
    // Vertex sums of the sub-box spanned by axes level+1..d, per level.
    let mut vertex_sums: Vec<Vec<f64>> = vec![Vec::new(); d];
    for (level, slot) in vertex_sums.iter_mut().enumerate() {
        let mut sums = vec![0.0];
        for j in level + 1..d {
            let mut next = Vec::with_capacity(sums.len() * 2);
            for &s in &sums {
                next.push(s + a[j] * lo[j]);
                if a[j] > 0.0 && hi[j] > lo[j] {
                    next.push(s + a[j] * hi[j]);
                }
            }
            sums = next;
        }
        sums.sort_by(f64::total_cmp);
        sums.dedup();
        *slot = sums;
    }
    let mut x = [0.0f64; MAX_DIM];
    let ctx = Clipped {
        rule,
        lo,
        hi,
        a,
        vertex_sums: &vertex_sums,
    };
    ctx.level(0, r, &mut x, &mut f)
}

struct Clipped<'a> {
    rule: &'a GaussLegendre,
    lo: &'a [f64],
    hi: &'a [f64],
    a: &'a [f64],
    vertex_sums: &'a [Vec<f64>],
}

impl Clipped<'_> {
    fn level<F: FnMut(&[f64]) -> f64>(
        &self,
        j: usize,
        r: f64,
        x: &mut [f64; MAX_DIM],
        f: &mut F,
    ) -> f64 {
        let d = self.lo.len();
        if j == d {
            return f(&x[..d]);
        }
        let sums = &self.vertex_sums[j];
        let rest_min = sums[0];
        let (lo, aj) = (self.lo[j], self.a[j]);
        let mut upper = self.hi[j];
        if aj > 0.0 {
            upper = upper.min((r - rest_min) / aj);
        } else if r < rest_min {
            return 0.0;
        }
        if upper <= lo {
            return 0.0;
        }
        let mut cuts = [0.0f64; 1 << 8];
        let mut ncuts = 0;
        cuts[ncuts] = lo;
        ncuts += 1;
        if aj > 0.0 && sums.len() <= 255 {
            for &v in sums.iter().rev() {
                let t = (r - v) / aj;
                if t > lo && t < upper {
                    cuts[ncuts] = t;
                    ncuts += 1;
                }
            }
        }
        cuts[ncuts] = upper;
        ncuts += 1;
        let mut total = 0.0;
        for piece in cuts[..ncuts].windows(2) {
            let (p, q) = (piece[0], piece[1]);
            let h = q - p;
            if h <= 0.0 {
                continue;
            }
            let mut acc = 0.0;
            for (t, w) in self.rule.nodes.iter().zip(&self.rule.weights) {
                let xj = p + h * t;
                x[j] = xj;
                acc += w * self.level(j + 1, r - aj * xj, x, f);
            }
            total += acc * h;
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        for order in 1..=20 {
            let rule = GaussLegendre::new(order);
            assert!((rule.weights().iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for deg in 0..2 * order {
                let got = rule.integrate(0.0, 1.0, |x| x.powi(deg as i32));
                let want = 1.0 / (deg as f64 + 1.0);
                assert!(
                    (got - want).abs() < 1e-13,
                    "order {order} deg {deg}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(1.0);
        for _ in 0..10 {
            s.add(1e-16);
        }
        s.add(-1.0);
        assert!((s.value() - 1e-15).abs() < 1e-30);
    }

    #[test]
    fn simplex_volume() {
        // the iterated integrand is piecewise of degree d - 1
        let rule = GaussLegendre::new(3);
        for d in 1..=5 {
            let lo = vec![0.0; d];
            let hi = vec![1.0; d];
            let a = vec![1.0; d];
            let vol = integrate_clipped(&rule, &lo, &hi, &a, 1.0, |_| 1.0);
            let fact: f64 = (1..=d).map(|k| k as f64).product();
            assert!((vol - 1.0 / fact).abs() < 1e-14, "d={d}: {vol}");
        }
    }

    #[test]
    fn clipped_polynomial_matches_closed_form() {
        // ∫ over {x,y ∈ [0,1], x + y ≤ 1} of x·y = 1/24
        let rule = GaussLegendre::new(3);
        let v = integrate_clipped(&rule, &[0.0, 0.0], &[1.0, 1.0], &[1.0, 1.0], 1.0, |p| {
            p[0] * p[1]
        });
        assert!((v - 1.0 / 24.0).abs() < 1e-15);
        // triangle cut from an off-centre box: [0.3,0.9]x[0.2,0.6] with x+y<=1
        let v = integrate_clipped(&rule, &[0.3, 0.2], &[0.9, 0.6], &[1.0, 1.0], 1.0, |_| 1.0);
        // box area 0.24 minus the cut-off part: ∫_{0.4}^{0.8} (x - 0.4) dx + 0.1 * 0.4 = 0.12
        assert!((v - 0.12).abs() < 1e-15, "{v}");
    }

    #[test]
    fn zero_coefficient_axis_is_unconstrained() {
        let rule = GaussLegendre::new(2);
        let v = integrate_clipped(&rule, &[0.0, 0.0], &[1.0, 0.5], &[1.0, 0.0], 0.25, |_| 1.0);
        assert!((v - 0.125).abs() < 1e-15);
        let empty = integrate_clipped(&rule, &[0.0, 0.0], &[1.0, 0.5], &[0.0, 1.0], -0.1, |_| 1.0);
        assert_eq!(empty, 0.0);
    }
}
