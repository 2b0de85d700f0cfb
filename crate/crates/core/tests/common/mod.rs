//! Reference implementations used as test oracles. They share no code with
//! the library beyond the point-set container.
#![allow(dead_code)]

use qmcis::PointSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Star discrepancy by direct evaluation of every corner built from point
/// coordinates and 1, each with the open and the closed count.
pub fn brute_star_discrepancy(points: &[Vec<f64>]) -> f64 {
    let d = points[0].len();
    let n = points.len() as f64;
    let axes: Vec<Vec<f64>> = (0..d)
        .map(|j| {
            let mut v: Vec<f64> = points.iter().map(|p| p[j]).collect();
            v.push(1.0);
            v
        })
        .collect();
    let mut best: f64 = 0.0;
    let mut idx = vec![0usize; d];
    loop {
        let y: Vec<f64> = (0..d).map(|j| axes[j][idx[j]]).collect();
        let vol: f64 = y.iter().product();
        let open = points
            .iter()
            .filter(|p| p.iter().zip(&y).all(|(a, b)| a < b))
            .count() as f64;
        let closed = points
            .iter()
            .filter(|p| p.iter().zip(&y).all(|(a, b)| a <= b))
            .count() as f64;
        best = best
            .max((open / n - vol).abs())
            .max((closed / n - vol).abs());
        let mut j = 0;
        loop {
            if j == d {
                return best;
            }
            idx[j] += 1;
            if idx[j] < axes[j].len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

/// Largest local discrepancy over `boxes` random half-open anchored boxes.
pub fn random_box_discrepancy(points: &[Vec<f64>], boxes: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = points[0].len();
    let n = points.len() as f64;
    let mut best: f64 = 0.0;
    for _ in 0..boxes {
        let y: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
        let vol: f64 = y.iter().product();
        let open = points
            .iter()
            .filter(|p| p.iter().zip(&y).all(|(a, b)| a < b))
            .count() as f64;
        best = best.max((open / n - vol).abs());
    }
    best
}

/// Random point sets with coordinates on a coarse lattice (so ties occur)
/// or continuous, alternating.
pub fn random_point_set(rng: &mut ChaCha8Rng, n: usize, d: usize, lattice: bool) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            (0..d)
                .map(|_| {
                    if lattice {
                        rng.gen_range(0..8) as f64 / 8.0
                    } else {
                        rng.gen::<f64>()
                    }
                })
                .collect()
        })
        .collect()
}

pub fn to_point_set(points: &[Vec<f64>]) -> PointSet {
    PointSet::from_points(points).unwrap()
}

/// `(3d−1)! / (4d−1)!` as the product of `1/k` for `k = 3d … 4d−1`.
pub fn factorial_ratio(d: usize) -> f64 {
    (3 * d..4 * d).map(|k| 1.0 / k as f64).product()
}

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, Copy)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (hi, lo) = two_sum(s, e + self.lo + o.lo);
        Dd { hi, lo }
    }

    pub fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    pub fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let (hi, lo) = two_sum(p, e + self.hi * o.lo + self.lo * o.hi);
        Dd { hi, lo }
    }

    pub fn powi(self, k: u32) -> Dd {
        (0..k).fold(Dd::from(1.0), |acc, _| acc.mul(self))
    }

    pub fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// `u(x; α)` for integer `α` in double-double arithmetic.
pub fn dirichlet_u_dd(x: &[Dd], alpha: &[u32]) -> Dd {
    let d = x.len();
    let mut rest = Dd::from(1.0);
    for &xi in x {
        rest = rest.sub(xi);
    }
    if rest.hi < 0.0 {
        return Dd::from(0.0);
    }
    let mut value = rest.powi(alpha[d] - 1);
    for (xi, a) in x.iter().zip(alpha) {
        value = value.mul(xi.powi(a - 1));
    }
    value
}

/// Central finite difference of `∂^{|v|} u / ∂x_v` with step `h`.
pub fn finite_difference_partial(x: &[f64], alpha: &[u32], v: &[usize], h: f64) -> f64 {
    let mut total = Dd::from(0.0);
    for signs in 0u32..(1 << v.len()) {
        let mut y: Vec<Dd> = x.iter().map(|&c| Dd::from(c)).collect();
        let mut sign = 1.0;
        for (k, &i) in v.iter().enumerate() {
            let s = if signs >> k & 1 == 1 { -1.0 } else { 1.0 };
            sign *= s;
            y[i] = y[i].add(Dd::from(s * h));
        }
        let u = dirichlet_u_dd(&y, alpha);
        total = total.add(if sign > 0.0 { u } else { u.neg() });
    }
    total.value() / (2.0 * h).powi(v.len() as i32)
}

/// Interior points of the simplex at distance at least `margin` from its faces.
pub fn interior_simplex_points(
    rng: &mut ChaCha8Rng,
    count: usize,
    d: usize,
    margin: f64,
) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
        if x.iter().all(|&c| c > margin) && x.iter().sum::<f64>() < 1.0 - margin {
            out.push(x);
        }
    }
    out
}
