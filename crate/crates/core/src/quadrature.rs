//! Gauss-Legendre rules, composite panels and small numerical helpers.

use crate::{GppaError, Result, C64};
use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// A fixed rule on an interval: nodes and weights ready for weighted sums.
#[derive(Clone, Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// `panels` equal Gauss-Legendre panels of `order` nodes on [a, b].
    pub fn composite(a: f64, b: f64, panels: usize, order: usize) -> Rule {
        let (x, w) = gauss_legendre(order);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let lo = a + p as f64 * h;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(lo + 0.5 * h * (xi + 1.0));
                weights.push(0.5 * h * wi);
            }
        }
        Rule { nodes, weights }
    }

    pub fn gauss(a: f64, b: f64, n: usize) -> Rule {
        Rule::composite(a, b, 1, n)
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn integrate_c<F: Fn(f64) -> C64>(&self, f: F) -> C64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| f(x) * w).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Composite Gauss-Legendre with panel doubling until successive estimates
/// agree to `tol` (absolute, relative to max(1, |I|)).
pub fn adaptive_c<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, tol: f64) -> Result<C64> {
    if a == b {
        return Ok(C64::new(0.0, 0.0));
    }
    let mut panels = 4;
    let mut prev = Rule::composite(a, b, panels, 16).integrate_c(&f);
    while panels <= 1 << 14 {
        panels *= 2;
        let next = Rule::composite(a, b, panels, 16).integrate_c(&f);
        if (next - prev).norm() <= tol * next.norm().max(1.0) {
            return Ok(next);
        }
        prev = next;
    }
    Err(GppaError::NoConvergence(format!(
        "panel doubling on [{a}, {b}] stalled"
    )))
}

pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    adaptive_c(|x| C64::new(f(x), 0.0), a, b, tol).map(|z| z.re)
}

/// `PV ∫_0^K f(k) / (k - k0) dk` by subtracting `f(k0)` and integrating the
/// `1/(k - k0)` panel analytically. `f` is sampled on `rule` (nodes in (0, K))
/// and evaluated directly at `k0`.
pub fn principal_value<F: Fn(f64) -> C64>(
    rule: &Rule,
    upper: f64,
    k0: f64,
    f_nodes: &[C64],
    f: F,
) -> Result<C64> {
    if !(k0 > 0.0 && k0 < upper) {
        return Err(GppaError::GridTooCoarse(format!(
            "pole k0 = {k0} outside (0, {upper})"
        )));
    }
    let f0 = f(k0);
    let h = 1e-6 * k0.max(1e-3);
    let mut acc = C64::new(0.0, 0.0);
    for ((&k, &w), &fk) in rule.nodes.iter().zip(&rule.weights).zip(f_nodes) {
        let d = k - k0;
        let q = if d.abs() < 1e-7 * upper {
            (f(k0 + h) - f(k0 - h)) / (2.0 * h)
        } else {
            (fk - f0) / d
        };
        acc += q * w;
    }
    Ok(acc + f0 * ((upper - k0) / k0).ln())
}

/// Classical fourth-order Runge-Kutta step for a linear complex system
/// `y' = rhs(t, y)`.
pub fn rk4_step<F>(rhs: &F, t: f64, h: f64, y: &[C64]) -> Vec<C64>
where
    F: Fn(f64, &[C64]) -> Vec<C64>,
{
    let dy = rk4_increment(rhs, t, h, y);
    y.iter().zip(&dy).map(|(a, b)| a + b).collect()
}

fn rk4_increment<F>(rhs: &F, t: f64, h: f64, y: &[C64]) -> Vec<C64>
where
    F: Fn(f64, &[C64]) -> Vec<C64>,
{
    let k1 = rhs(t, y);
    let y2: Vec<C64> = y.iter().zip(&k1).map(|(a, b)| a + b * (0.5 * h)).collect();
    let k2 = rhs(t + 0.5 * h, &y2);
    let y3: Vec<C64> = y.iter().zip(&k2).map(|(a, b)| a + b * (0.5 * h)).collect();
    let k3 = rhs(t + 0.5 * h, &y3);
    let y4: Vec<C64> = y.iter().zip(&k3).map(|(a, b)| a + b * h).collect();
    let k4 = rhs(t + h, &y4);
    (0..y.len()).map(|i| (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0)).collect()
}

// Kahan-compensated update; the hierarchies pass through transients many
// orders of magnitude above their final values.
fn compensated_add(y: &mut f64, c: &mut f64, dy: f64) {
    let v = dy - *c;
    let s = *y + v;
    *c = (s - *y) - v;
    *y = s;
}

/// RK4 from `t0` to `t1` with `steps`, `2·steps` and `4·steps` steps,
/// Richardson-extrapolated twice (removing the h⁴ and h⁵ error terms).
pub fn rk4_richardson<F>(rhs: &F, t0: f64, t1: f64, steps: usize, y0: &[C64]) -> Vec<C64>
where
    F: Fn(f64, &[C64]) -> Vec<C64> + Sync,
{
    let run = |n: usize| {
        let h = (t1 - t0) / n as f64;
        let mut y = y0.to_vec();
        let mut c = vec![C64::new(0.0, 0.0); y.len()];
        for i in 0..n {
            let dy = rk4_increment(rhs, t0 + i as f64 * h, h, &y);
            for ((y, c), d) in y.iter_mut().zip(c.iter_mut()).zip(&dy) {
                compensated_add(&mut y.re, &mut c.re, d.re);
                compensated_add(&mut y.im, &mut c.im, d.im);
            }
        }
        y
    };
    let (y1, (y2, y4)) = rayon::join(|| run(steps), || rayon::join(|| run(2 * steps), || run(4 * steps)));
    (0..y0.len())
        .map(|i| {
            let a = (y2[i] * 16.0 - y1[i]) / 15.0;
            let b = (y4[i] * 16.0 - y2[i]) / 15.0;
            (b * 32.0 - a) / 31.0
        })
        .collect()
}
