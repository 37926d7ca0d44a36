//! Adaptive Gauss-Kronrod (7, 15) quadrature.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

// Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_panels: 20_000,
        }
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let pair = f(c - dx) + f(c + dx);
        k += WGK[i] * pair;
        if i % 2 == 1 {
            g += WG[i / 2] * pair;
        }
    }
    (k * h, (k - g).abs() * h)
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let (value, err) = kronrod(f, a, b);
    Panel { a, b, value, err }
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain("integrate needs finite limits".into()));
    }
    // global refinement: always bisect the panel with the largest error
    let mut heap = std::collections::BinaryHeap::new();
    let first = panel(&f, a, b);
    let (mut value, mut err) = (first.value, first.err);
    heap.push(first);
    let mut splits = 0usize;
    loop {
        if !value.is_finite() {
            return Err(Error::Quadrature(format!("non-finite value on [{a}, {b}]")));
        }
        let tol = opts.abs_tol.max(opts.rel_tol * value.abs());
        if err <= tol {
            return Ok(value);
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            // panel cannot be split further in floating point
            if heap.is_empty() || splits >= opts.max_panels {
                return Ok(value);
            }
            err -= worst.err;
            continue;
        }
        if splits >= opts.max_panels {
            return Err(Error::Quadrature(format!(
                "panel limit on [{a}, {b}], error estimate {err:e}"
            )));
        }
        let left = panel(&f, worst.a, m);
        let right = panel(&f, m, worst.b);
        value += left.value + right.value - worst.value;
        err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
        splits += 1;
    }
}

/// Integrates `f` over `[a, b]` split at the given interior points.
pub fn integrate_pieces<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    opts: &QuadOptions,
) -> Result<f64> {
    let mut total = 0.0;
    for w in points.windows(2) {
        total += integrate(&f, w[0], w[1], opts)?;
    }
    Ok(total)
}

/// Integrates `f` over `[a, inf)` using `x = a + t / (1 - t)`.
pub fn integrate_to_inf<F: Fn(f64) -> f64>(f: F, a: f64, opts: &QuadOptions) -> Result<f64> {
    let g = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let s = 1.0 - t;
        let v = f(a + t / s);
        if v == 0.0 {
            0.0
        } else {
            v / (s * s)
        }
    };
    integrate(g, 0.0, 1.0, opts)
}
