//! Numerical integration: adaptive Gauss-Kronrod over a vector of integrands
//! sharing abscissae, and fixed Gauss-Legendre rules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncation and tolerance settings for the Fourier inversion integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Lower integration cutoff; the integrand is never evaluated at zero.
    pub phi_min: f64,
    /// Upper truncation of the frequency axis.
    pub phi_max: f64,
    /// Absolute tolerance for each inverted probability.
    pub abs_tol: f64,
    /// Cap on the number of interval bisections.
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            phi_min: 1e-8,
            phi_max: 200.0,
            abs_tol: 1e-9,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.phi_min > 0.0 && self.phi_min < self.phi_max && self.phi_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < phi_min < phi_max, got [{}, {}]",
                self.phi_min, self.phi_max
            )));
        }
        if !(self.abs_tol > 0.0) {
            return Err(Error::InvalidParameter("abs_tol must be > 0".into()));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidParameter(
                "max_subdivisions must be >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Initial panel breakpoints on `[phi_min, phi_max]`, roughly geometric so
    /// that the first Kronrod pass resolves integrands concentrated near zero.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = vec![self.phi_min];
        let mut x = 0.5;
        while x < self.phi_max {
            if x > self.phi_min {
                pts.push(x);
            }
            x *= 2.0;
        }
        pts.push(self.phi_max);
        pts
    }
}

// 15-point Kronrod abscissae and weights with the embedded 7-point Gauss rule.
// Digits kept as published.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const KRONROD_POINTS: usize = 15;

/// Result of a vector-valued adaptive integration.
#[derive(Debug, Clone)]
pub struct VectorIntegral {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub subdivisions: usize,
}

struct Segment {
    a: f64,
    b: f64,
    values: Vec<f64>,
    errors: Vec<f64>,
}

impl Segment {
    fn worst(&self) -> f64 {
        self.errors.iter().fold(0.0, |m, &e| m.max(e))
    }
}

fn kronrod_nodes(a: f64, b: f64, out: &mut Vec<f64>) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    for &x in &XGK[..7] {
        out.push(c - h * x);
        out.push(c + h * x);
    }
    out.push(c);
}

/// Applies the Kronrod rule to function values laid out as produced by
/// [`kronrod_nodes`] (pairs `(c - h x, c + h x)` then the centre).
fn kronrod_apply(a: f64, b: f64, fv: &[f64], dim: usize) -> Segment {
    let h = 0.5 * (b - a);
    let mut values = vec![0.0; dim];
    let mut errors = vec![0.0; dim];
    for c in 0..dim {
        let at = |k: usize| fv[k * dim + c];
        let fc = at(14);
        let mut resk = WGK[7] * fc;
        let mut resg = WG[3] * fc;
        let mut resabs = WGK[7] * fc.abs();
        for i in 0..7 {
            let (f1, f2) = (at(2 * i), at(2 * i + 1));
            resk += WGK[i] * (f1 + f2);
            resabs += WGK[i] * (f1.abs() + f2.abs());
            if i % 2 == 1 {
                resg += WG[i / 2] * (f1 + f2);
            }
        }
        let mean = 0.5 * resk;
        let mut resasc = WGK[7] * (fc - mean).abs();
        for (i, w) in WGK[..7].iter().enumerate() {
            resasc += w * ((at(2 * i) - mean).abs() + (at(2 * i + 1) - mean).abs());
        }
        let resasc = resasc * h.abs();
        let resabs = resabs * h.abs();
        let mut err = ((resk - resg) * h).abs();
        if resasc != 0.0 && err != 0.0 {
            err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
        }
        if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * resabs);
        }
        values[c] = resk * h;
        errors[c] = err;
    }
    Segment {
        a,
        b,
        values,
        errors,
    }
}

/// Globally adaptive 15-point Gauss-Kronrod integration of `dim` integrands
/// that share abscissae.
///
/// `f(nodes, out)` must fill `out[i * dim + c]` with component `c` at
/// `nodes[i]`. Bisection continues until the summed error estimate of every
/// component is at most `abs_tol`.
pub fn integrate_gk<F>(
    f: F,
    breakpoints: &[f64],
    dim: usize,
    abs_tol: f64,
    max_subdivisions: usize,
) -> Result<VectorIntegral>
where
    F: Fn(&[f64], &mut [f64]) -> Result<()>,
{
    assert!(breakpoints.len() >= 2, "need at least one panel");
    let mut nodes = Vec::with_capacity(2 * KRONROD_POINTS);
    let mut buf = vec![0.0; 2 * KRONROD_POINTS * dim];

    let mut segments: Vec<Segment> = Vec::with_capacity(breakpoints.len() + 64);
    for w in breakpoints.windows(2) {
        nodes.clear();
        kronrod_nodes(w[0], w[1], &mut nodes);
        let out = &mut buf[..KRONROD_POINTS * dim];
        f(&nodes, out)?;
        segments.push(kronrod_apply(w[0], w[1], out, dim));
    }

    let mut subdivisions = 0;
    loop {
        let mut total_err = vec![0.0; dim];
        for s in &segments {
            for (t, e) in total_err.iter_mut().zip(&s.errors) {
                *t += e;
            }
        }
        let worst_total = total_err.iter().fold(0.0f64, |m, &e| m.max(e));
        if worst_total <= abs_tol {
            let mut values = vec![0.0; dim];
            for s in &segments {
                for (v, x) in values.iter_mut().zip(&s.values) {
                    *v += x;
                }
            }
            return Ok(VectorIntegral {
                values,
                errors: total_err,
                subdivisions,
            });
        }
        if subdivisions >= max_subdivisions {
            return Err(Error::QuadratureNotConverged {
                requested: abs_tol,
                achieved: worst_total,
                subdivisions,
            });
        }

        let (idx, _) = segments
            .iter()
            .enumerate()
            .map(|(i, s)| (i, s.worst()))
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, x| if x.1 > acc.1 { x } else { acc },
            );
        let seg = segments.swap_remove(idx);
        let mid = 0.5 * (seg.a + seg.b);
        if !(mid > seg.a && mid < seg.b) {
            return Err(Error::QuadratureNotConverged {
                requested: abs_tol,
                achieved: worst_total,
                subdivisions,
            });
        }
        nodes.clear();
        kronrod_nodes(seg.a, mid, &mut nodes);
        kronrod_nodes(mid, seg.b, &mut nodes);
        f(&nodes, &mut buf)?;
        let (left, right) = buf.split_at(KRONROD_POINTS * dim);
        segments.push(kronrod_apply(seg.a, mid, left, dim));
        segments.push(kronrod_apply(mid, seg.b, right, dim));
        subdivisions += 1;
    }
}

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
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
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto `[0, len]`.
    pub fn on_interval(&self, len: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = 0.5 * len;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (h * (x + 1.0), h * w))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
