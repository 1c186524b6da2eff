//! Reference computations shared by the integration tests. Nothing here
//! calls the library's pricing internals.
#![allow(dead_code)]

use num_complex::Complex64 as C;
use svcal_core::{HestonParams, OptionContract};

pub fn standard_heston() -> HestonParams {
    HestonParams::new(2.0, 0.04, 0.3, -0.7, 0.04).unwrap()
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite Gauss-Legendre over consecutive panels given by `edges`.
pub fn composite_gl(edges: &[f64], nodes: usize) -> Vec<(f64, f64)> {
    let gl = gauss_legendre(nodes);
    let mut out = Vec::new();
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        for &(x, wt) in &gl {
            out.push((0.5 * (a + b) + 0.5 * (b - a) * x, 0.5 * (b - a) * wt));
        }
    }
    out
}

/// Frequency panels for the brute-force inversions.
pub fn phi_panels(phi_max: f64) -> Vec<f64> {
    let mut e = vec![0.0, 0.25, 0.5, 1.0];
    while *e.last().unwrap() < phi_max {
        let next = (2.0 * e.last().unwrap()).min(phi_max);
        // Cap panel width so the rule resolves the oscillation.
        let last = *e.last().unwrap();
        let step = (next - last).min(16.0);
        e.push(last + step);
    }
    e
}

/// `q_j` at one frequency by brute force on a uniform time grid.
///
/// `A_2` uses the original `g` form, `A'_1` integrates `kappa theta A_2`,
/// and `e^{A_3}` is `exp(c (L(t) - L(z)))` with the literal prefactor `c`
/// and `L` the logarithm of `g e^{d t} - 1` unwrapped along the grid.
pub fn bruteforce_q(
    j: usize,
    phi: f64,
    tau: f64,
    s: f64,
    h: &HestonParams,
    v: &[f64; 4],
    panels: usize,
) -> (C, C, C) {
    let i = C::new(0.0, 1.0);
    let (alpha, b) = if j == 1 {
        (0.5, h.kappa - h.rho * h.sigma)
    } else {
        (-0.5, h.kappa)
    };
    let s2 = h.sigma * h.sigma;
    let beta = b - h.rho * h.sigma * phi * i;
    let mut d = (beta * beta - s2 * (2.0 * alpha * phi * i - phi * phi)).sqrt();
    if d.re < 0.0 {
        d = -d;
    }
    let g = (beta + d) / (beta - d);
    let pref = (beta + d) * (1.0 - g) / (d * g);
    let a2 = |e: C| (beta + d) / s2 * (1.0 - e) / (1.0 - g * e);
    let bcoef = |a: C| {
        -(v[0] * a * (2.0 * alpha * phi * i - phi * phi)
            + v[1] * a * a * (phi * i)
            + v[2] * (2.0 * alpha * phi * phi * phi * i + phi * phi)
            + v[3] * a * (-phi * phi))
    };
    let dt = tau / panels as f64;
    let step = (d * dt).exp();
    let mut e = C::new(1.0, 0.0);
    let mut log_h = (g - 1.0).ln();
    let mut prev_arg = log_h.im;
    let mut unwrap = 0.0;
    // Running trapezoid sums.
    let (mut f_int, mut q0, mut a1) = (C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0));
    let (mut prev_f, mut prev_q1, mut prev_a2) =
        (C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0));
    let mut q1 = C::new(0.0, 0.0);
    let mut last_a2 = C::new(0.0, 0.0);
    for k in 0..=panels {
        if k > 0 {
            e *= step;
            let raw = (g * e - 1.0).ln();
            let mut jump = raw.im - prev_arg;
            while jump > std::f64::consts::PI {
                unwrap -= 2.0 * std::f64::consts::PI;
                jump -= 2.0 * std::f64::consts::PI;
            }
            while jump < -std::f64::consts::PI {
                unwrap += 2.0 * std::f64::consts::PI;
                jump += 2.0 * std::f64::consts::PI;
            }
            prev_arg = raw.im;
            log_h = C::new(raw.re, raw.im + unwrap);
        }
        let a = a2(e);
        let f = bcoef(a) * (-pref * log_h).exp();
        if k > 0 {
            f_int += 0.5 * dt * (f + prev_f);
            a1 += 0.5 * dt * (a + prev_a2);
        }
        q1 = (pref * log_h).exp() * f_int;
        if k > 0 {
            q0 += 0.5 * dt * (q1 + prev_q1);
        }
        prev_f = f;
        prev_q1 = q1;
        prev_a2 = a;
        last_a2 = a;
    }
    let a1 = h.kappa * h.theta * a1;
    let qj = (h.kappa * h.theta * q0 + h.v0 * q1) * (a1 + last_a2 * h.v0 + i * phi * s).exp();
    (q0, q1, qj)
}

/// `C1` from brute-force `q_j` and composite Gauss-Legendre inversion.
pub fn bruteforce_c1(
    c: &OptionContract,
    h: &HestonParams,
    v: &[f64; 4],
    panels: usize,
    phi_max: f64,
) -> f64 {
    let s = c.spot.ln();
    let lk = c.strike.ln();
    let mut int = [0.0; 2];
    for (phi, w) in composite_gl(&phi_panels(phi_max), 24) {
        for j in [1, 2] {
            let (_, _, q) = bruteforce_q(j, phi, c.tau, s, h, v, panels);
            int[j - 1] += w * (q * C::from_polar(1.0, -phi * lk)).im / phi;
        }
    }
    let pi = std::f64::consts::PI;
    c.spot * int[0] / pi - c.discounted_strike() * int[1] / pi
}
