//! Adaptive Gauss-Kronrod quadrature for complex-valued integrands.
//!
//! Global subdivision with a 10-point Gauss / 21-point Kronrod pair. Callers
//! pass breakpoints to pin narrow resonances onto interval edges.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, ..., 9).
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// Tolerances for adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_intervals: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    /// Estimated absolute error of `value` over the integrated range.
    pub error: f64,
    /// Bound on the neglected tail when an infinite range was truncated.
    pub tail_bound: f64,
    pub evaluations: usize,
}

impl QuadResult {
    pub fn total_error(&self) -> f64 {
        self.error + self.tail_bound
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    for j in 0..10 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).norm();
    // QUADPACK-style floor against roundoff.
    let floor = 50.0 * f64::EPSILON * value.norm();
    (value, err.max(floor))
}

/// Integrates `f` over `[a, b]`, splitting first at every breakpoint strictly
/// inside the range.
pub fn integrate<F>(f: F, a: f64, b: f64, breakpoints: &[f64], cfg: &QuadConfig) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Grid(format!("integration limits must be finite, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            tail_bound: 0.0,
            evaluations: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    let mut edges: Vec<f64> = std::iter::once(lo)
        .chain(breakpoints.iter().copied().filter(|x| *x > lo && *x < hi))
        .chain(std::iter::once(hi))
        .collect();
    edges.sort_by(f64::total_cmp);
    edges.dedup();

    let mut heap = BinaryHeap::new();
    let mut total = Complex64::new(0.0, 0.0);
    let mut total_err = 0.0;
    let mut evaluations = 0;
    for w in edges.windows(2) {
        let (value, error) = gk21(&f, w[0], w[1]);
        evaluations += 21;
        total += value;
        total_err += error;
        heap.push(Segment { a: w[0], b: w[1], value, error });
    }

    // Segments too narrow to split further; their error stays in the budget.
    let mut frozen_err = 0.0;
    let mut frozen_value = Complex64::new(0.0, 0.0);
    while total_err > cfg.abs_tol.max(cfg.rel_tol * total.norm()) {
        if heap.len() >= cfg.max_intervals {
            return Err(Error::QuadratureNotConverged {
                estimate: total.re,
                achieved: total_err,
                requested: cfg.abs_tol.max(cfg.rel_tol * total.norm()),
            });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b || (worst.b - worst.a) < 1e-14 * mid.abs().max(1e-300) {
            frozen_err += worst.error;
            frozen_value += worst.value;
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let (v1, e1) = gk21(&f, worst.a, mid);
        let (v2, e2) = gk21(&f, mid, worst.b);
        evaluations += 42;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
        if heap.is_empty() {
            break;
        }
    }

    let converged = total_err <= cfg.abs_tol.max(cfg.rel_tol * total.norm());
    // Re-sum to shed drift accumulated by the incremental updates.
    let value: Complex64 = heap.iter().map(|s| s.value).sum::<Complex64>() + frozen_value;
    let error: f64 = heap.iter().map(|s| s.error).sum::<f64>() + frozen_err;
    if !converged {
        return Err(Error::QuadratureNotConverged {
            estimate: value.re,
            achieved: error,
            requested: cfg.abs_tol.max(cfg.rel_tol * value.norm()),
        });
    }
    Ok(QuadResult {
        value: value * sign,
        error,
        tail_bound: 0.0,
        evaluations,
    })
}

/// Integrates over `[a, inf)` by truncating at `upper`. The reported tail
/// bound is `|f(upper)| * upper`, which bounds the remainder whenever the
/// integrand decays at least as fast as `1/omega^2` beyond `upper`.
pub fn integrate_semi_infinite<F>(
    f: F,
    a: f64,
    upper: f64,
    breakpoints: &[f64],
    cfg: &QuadConfig,
) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64,
{
    let tail_bound = f(upper).norm() * upper;
    let mut res = integrate(&f, a, upper, breakpoints, cfg)?;
    res.tail_bound = tail_bound;
    Ok(res)
}

/// Real-valued convenience wrapper over [`integrate`].
pub fn integrate_real<F>(f: F, a: f64, b: f64, breakpoints: &[f64], cfg: &QuadConfig) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let r = integrate(|x| Complex64::new(f(x), 0.0), a, b, breakpoints, cfg)?;
    Ok((r.value.re, r.error))
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss-Legendre rule: `order` nodes per panel on each
/// consecutive pair of `edges`.
pub fn composite_rule(edges: &[f64], order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let mut nodes = Vec::with_capacity(edges.len() * order);
    let mut weights = Vec::with_capacity(edges.len() * order);
    for pair in edges.windows(2) {
        let c = 0.5 * (pair[0] + pair[1]);
        let h = 0.5 * (pair[1] - pair[0]);
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(c + h * xi);
            weights.push(h * wi);
        }
    }
    (nodes, weights)
}
