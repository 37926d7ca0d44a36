//! Stein solutions for convex potentials and the explicit Kolmogorov bound
//! for generalized gamma approximation.
//!
//! For a test function `h` with `h̃ = h - E h(Z)`, the solution of
//! `f' - B' f = h̃` is
//! `f(x) = e^{B(x)} ∫_0^x h̃ e^{-B} = -e^{B(x)} ∫_x^∞ h̃ e^{-B}`.
//! The first form is used left of the minimum `x0` of `B` and the second to
//! its right, so every integrand stays bounded by `‖h̃‖`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ggdist::{GGParams, Potential};
use crate::pmf::ExactPmf;
use crate::quad::{integrate, integrate_pieces, integrate_to_inf, QuadOptions};
use crate::special::{gamma, gamma_bracket, gamma_ratio_bracket};
use crate::transforms::EquilibriumLaw;

const DIFF_STEP: f64 = 1e-5;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Bounded test functions on `(0, ∞)`.
#[derive(Clone)]
pub enum TestFunction {
    Constant(f64),
    /// `I[x <= s]`.
    Indicator { s: f64 },
    /// `(1/ε) ∫_0^ε I[x + u <= s] du`: one up to `s - ε`, linear down to
    /// zero at `s`.
    Ramp { s: f64, eps: f64 },
    /// `∫_0^ε I[s < x + u <= s + ε] du`: a tent of height `ε` at `s`.
    Tent { s: f64, eps: f64 },
    /// Any bounded function with values in `[lo, hi]`, smooth away from
    /// `breaks`.
    Custom {
        f: RealFn,
        lo: f64,
        hi: f64,
        breaks: Vec<f64>,
    },
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::Constant(c) => write!(f, "constant({c})"),
            TestFunction::Indicator { s } => write!(f, "indicator(s={s})"),
            TestFunction::Ramp { s, eps } => write!(f, "ramp(s={s}, eps={eps})"),
            TestFunction::Tent { s, eps } => write!(f, "tent(s={s}, eps={eps})"),
            TestFunction::Custom { lo, hi, .. } => write!(f, "custom([{lo}, {hi}])"),
        }
    }
}

impl TestFunction {
    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static, lo: f64, hi: f64, breaks: Vec<f64>) -> Self {
        TestFunction::Custom {
            f: Arc::new(f),
            lo,
            hi,
            breaks,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestFunction::Constant(c) => *c,
            TestFunction::Indicator { s } => (x <= *s) as u8 as f64,
            TestFunction::Ramp { s, eps } => ((s - x) / eps).clamp(0.0, 1.0),
            TestFunction::Tent { s, eps } => (eps - (x - s).abs()).max(0.0),
            TestFunction::Custom { f, .. } => f(x),
        }
    }

    /// Points where the function or its derivative may jump.
    pub fn breaks(&self) -> Vec<f64> {
        match self {
            TestFunction::Constant(_) => vec![],
            TestFunction::Indicator { s } => vec![*s],
            TestFunction::Ramp { s, eps } => vec![s - eps, *s],
            TestFunction::Tent { s, eps } => vec![s - eps, *s, s + eps],
            TestFunction::Custom { breaks, .. } => breaks.clone(),
        }
    }

    /// `(inf h, sup h)`.
    pub fn range(&self) -> (f64, f64) {
        match self {
            TestFunction::Constant(c) => (*c, *c),
            TestFunction::Indicator { .. } | TestFunction::Ramp { .. } => (0.0, 1.0),
            TestFunction::Tent { eps, .. } => (0.0, *eps),
            TestFunction::Custom { lo, hi, .. } => (*lo, *hi),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            TestFunction::Ramp { eps, .. } | TestFunction::Tent { eps, .. } if !(*eps > 0.0) => {
                Err(Error::param("eps", "must be positive"))
            }
            TestFunction::Custom { lo, hi, .. } if !(lo <= hi) => {
                Err(Error::param("range", "need lo <= hi"))
            }
            _ => Ok(()),
        }
    }

    /// `E h(Z)` for `Z ~ GG`.
    pub fn mean(&self, p: &Potential, opts: &QuadOptions) -> Result<f64> {
        let gg = p.params();
        match self {
            TestFunction::Constant(c) => Ok(*c),
            TestFunction::Indicator { s } => Ok(gg.cdf(*s)),
            TestFunction::Ramp { s, eps } => {
                Ok(integrate(|t| gg.cdf(t), s - eps, *s, opts)? / eps)
            }
            TestFunction::Tent { s, eps } => integrate(
                |u| gg.cdf(s + eps - u) - gg.cdf(s - u),
                0.0,
                *eps,
                opts,
            ),
            TestFunction::Custom { f, .. } => {
                let mut points = vec![0.0];
                points.extend(self.breaks().into_iter().filter(|b| *b > 0.0));
                points.sort_by(f64::total_cmp);
                points.dedup();
                let last = *points.last().expect("nonempty");
                let body = integrate_pieces(|z| f(z) * p.density(z), &points, opts)?;
                Ok(body + integrate_to_inf(|z| f(z) * p.density(z), last, opts)?)
            }
        }
    }
}

/// Solution of the Stein equation for one potential and test function.
#[derive(Clone, Debug)]
pub struct SteinSolution {
    potential: Potential,
    h: TestFunction,
    mean: f64,
    norm: f64,
    opts: QuadOptions,
}

impl SteinSolution {
    pub fn new(potential: Potential, h: TestFunction) -> Result<Self> {
        h.validate()?;
        let opts = QuadOptions {
            abs_tol: 1e-15,
            rel_tol: 1e-13,
            ..QuadOptions::default()
        };
        let mean = h.mean(&potential, &opts)?;
        let (lo, hi) = h.range();
        Ok(Self {
            potential,
            norm: (hi - mean).max(mean - lo),
            h,
            mean,
            opts,
        })
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn test_function(&self) -> &TestFunction {
        &self.h
    }

    /// `E h(Z)`.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `‖h̃‖ = sup |h - E h(Z)|`.
    pub fn h_tilde_norm(&self) -> f64 {
        self.norm
    }

    pub fn h_tilde(&self, x: f64) -> f64 {
        self.h.eval(x) - self.mean
    }

    fn breaks_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut pts = vec![lo];
        pts.extend(self.h.breaks().into_iter().filter(|b| *b > lo && *b < hi));
        pts.push(hi);
        pts.sort_by(f64::total_cmp);
        pts
    }

    /// `∫_lo^hi w(z) e^{B(x) - B(z)} dz` with `w = h̃`, or `w = 1` when
    /// `unit`; `hi` may be infinite.
    fn weighted(&self, x: f64, lo: f64, hi: f64, unit: bool) -> Result<f64> {
        let p = &self.potential;
        let w = |z: f64| {
            let e = p.b_diff(x, z).exp();
            if unit {
                e
            } else {
                self.h_tilde(z) * e
            }
        };
        if hi.is_infinite() {
            let mut pts: Vec<f64> = self.h.breaks().into_iter().filter(|b| *b > lo).collect();
            pts.insert(0, lo);
            pts.sort_by(f64::total_cmp);
            let last = *pts.last().expect("nonempty");
            let body = if unit { 0.0 } else { integrate_pieces(w, &pts, &self.opts)? };
            let start = if unit { lo } else { last };
            Ok(body + integrate_to_inf(w, start, &self.opts)?)
        } else if unit {
            integrate(w, lo, hi, &self.opts)
        } else {
            integrate_pieces(w, &self.breaks_in(lo, hi), &self.opts)
        }
    }

    /// `f(x)` by direct quadrature.
    pub fn f(&self, x: f64) -> Result<f64> {
        check_positive(x)?;
        if x <= self.potential.x0() {
            self.weighted(x, 0.0, x, false)
        } else {
            Ok(-self.weighted(x, x, f64::INFINITY, false)?)
        }
    }

    /// `f` on an increasing grid of positive points. Values are carried
    /// between neighbours with the exact update
    /// `f(y) = e^{B(y)-B(x)} f(x) + ∫_x^y h̃ e^{B(y)-B(z)} dz`,
    /// forwards left of `x0` and backwards right of it.
    pub fn f_grid(&self, grid: &[f64]) -> Result<Vec<f64>> {
        check_grid(grid)?;
        let x0 = self.potential.x0();
        let split = grid.partition_point(|&x| x <= x0);
        let mut out = vec![0.0; grid.len()];
        let mut prev = (0.0, 0.0);
        for i in 0..split {
            let x = grid[i];
            let carry = if prev.1 == 0.0 { 0.0 } else { self.potential.b_diff(x, prev.0).exp() * prev.1 };
            out[i] = carry + self.weighted(x, prev.0, x, false)?;
            prev = (x, out[i]);
        }
        for i in (split..grid.len()).rev() {
            let x = grid[i];
            out[i] = if i + 1 == grid.len() {
                -self.weighted(x, x, f64::INFINITY, false)?
            } else {
                let y = grid[i + 1];
                self.potential.b_diff(x, y).exp() * out[i + 1] - self.weighted(x, x, y, false)?
            };
        }
        Ok(out)
    }

    /// `f'(x)` read off the Stein equation: `h̃(x) + B'(x) f(x)`.
    pub fn f_prime(&self, x: f64, fx: f64) -> f64 {
        self.h_tilde(x) + self.potential.b_prime(x) * fx
    }

    /// Central-difference residual `|f' - B' f - h̃|` at steps `δ` and `2δ`,
    /// `δ = 1e-5`, combined by Richardson extrapolation. `f(x ± δ)` come
    /// from `f(x) = fx` by the exact update so that errors in `fx` cancel.
    pub fn residual_given(&self, x: f64, fx: f64) -> Result<f64> {
        if x - 2.0 * DIFF_STEP <= 0.0 {
            return Err(Error::Domain(format!("x = {x} too close to 0 for differencing")));
        }
        let p = &self.potential;
        let central = |d: f64| -> Result<f64> {
            let up = p.b_diff(x + d, x).exp() * fx + self.weighted(x + d, x, x + d, false)?;
            let down = p.b_diff(x - d, x).exp() * fx - self.weighted(x - d, x - d, x, false)?;
            Ok((up - down) / (2.0 * d))
        };
        let fd = (4.0 * central(DIFF_STEP)? - central(2.0 * DIFF_STEP)?) / 3.0;
        Ok((fd - p.b_prime(x) * fx - self.h_tilde(x)).abs())
    }

    pub fn residual(&self, x: f64) -> Result<f64> {
        self.residual_given(x, self.f(x)?)
    }

    /// Whether `x` is far enough from every break of `h` for differencing.
    pub fn smooth_at(&self, x: f64) -> bool {
        let d = 3.0 * DIFF_STEP;
        self.h.breaks().iter().all(|b| (x - b).abs() > d)
    }

    /// `g(x) = h̃(x) + r x^{r-1} f(x)`.
    pub fn g(&self, x: f64, fx: f64) -> f64 {
        let r = self.potential.params().r();
        self.h_tilde(x) + r * x.powf(r - 1.0) * fx
    }

    /// `g(x) = f'(x) + (k-1) f(x)/x` with `f'` by central differences of
    /// direct evaluations.
    pub fn g_by_difference(&self, x: f64) -> Result<f64> {
        let d = DIFF_STEP;
        let fd = (self.f(x + d)? - self.f(x - d)?) / (2.0 * d);
        Ok(g_from_f(self.potential.params().k(), fd, self.f(x)?, x))
    }
}

/// `f'(x) + (k-1) f(x) / x`, the `(k-1)` term taken as 0 when `k = 1`.
pub fn g_from_f(k: f64, f_prime: f64, f: f64, x: f64) -> f64 {
    if k == 1.0 {
        f_prime
    } else {
        f_prime + (k - 1.0) * f / x
    }
}

fn check_positive(x: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain(format!("need finite x > 0, got {x}")));
    }
    Ok(())
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(grid[0] > 0.0) || grid.windows(2).any(|w| !(w[1] > w[0])) || !grid[grid.len() - 1].is_finite() {
        return Err(Error::param("grid", "must be positive, finite and increasing"));
    }
    Ok(())
}

/// `κ_a(x) = e^{B(x)} ∫_0^x e^{-B}` and `κ_b(x) = e^{B(x)} ∫_x^∞ e^{-B}`.
/// `κ_a` may overflow to infinity far right of `x0`.
pub fn kappas(p: &Potential, x: f64) -> Result<(f64, f64)> {
    check_positive(x)?;
    let opts = QuadOptions::default();
    let x0 = p.x0();
    // factor out the largest exponent on each range
    let shift_a = p.b_diff(x, x.min(x0));
    let a = integrate(|z| (p.b_diff(x, z) - shift_a).exp(), 0.0, x, &opts)?;
    let shift_b = if x < x0 { p.b_diff(x, x0) } else { 0.0 };
    let b = integrate_to_inf(|z| (p.b_diff(x, z) - shift_b).exp(), x, &opts)?;
    Ok((a * shift_a.exp(), b * shift_b.exp()))
}

/// `κ_a` and `κ_b` on an increasing grid, by the same neighbour updates as
/// [`SteinSolution::f_grid`].
pub fn kappas_grid(p: &Potential, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    check_grid(grid)?;
    let sol = SteinSolution::new(*p, TestFunction::Constant(0.0))?;
    let mut ka = vec![0.0; grid.len()];
    let mut prev = (0.0, 0.0);
    for (i, &x) in grid.iter().enumerate() {
        let carry = if prev.1 == 0.0 { 0.0 } else { p.b_diff(x, prev.0).exp() * prev.1 };
        ka[i] = carry + sol.weighted(x, prev.0, x, true)?;
        prev = (x, ka[i]);
    }
    let mut kb = vec![0.0; grid.len()];
    for i in (0..grid.len()).rev() {
        let x = grid[i];
        kb[i] = if i + 1 == grid.len() {
            sol.weighted(x, x, f64::INFINITY, true)?
        } else {
            p.b_diff(x, grid[i + 1]).exp() * kb[i + 1] + sol.weighted(x, x, grid[i + 1], true)?
        };
    }
    Ok(ka.into_iter().zip(kb).collect())
}

/// `E{f'(Z) - B'(Z) f(Z)}` by quadrature; zero for admissible `f`.
pub fn characterization_expectation(
    p: &Potential,
    f: impl Fn(f64) -> f64,
    f_prime: impl Fn(f64) -> f64,
    points: &[f64],
) -> Result<f64> {
    let opts = QuadOptions::default();
    let body = |z: f64| (f_prime(z) - p.b_prime(z) * f(z)) * p.density(z);
    let mut pts = vec![0.0];
    pts.extend(points.iter().copied().filter(|x| *x > 0.0));
    let last = *pts.last().expect("nonempty");
    Ok(integrate_pieces(body, &pts, &opts)? + integrate_to_inf(body, last, &opts)?)
}

/// Both sides of `E g(W*) = r E W^{r-1} f(W)` with
/// `g = f' + (k-1) f / x`, for `W = X / scale` and `X ~ base`.
pub fn equilibrium_identity_check(
    k: u32,
    r: u32,
    base: &ExactPmf<f64>,
    scale: f64,
    f: impl Fn(f64) -> f64,
    f_prime: impl Fn(f64) -> f64,
) -> Result<(f64, f64)> {
    let law = EquilibriumLaw::scaled(base, scale, k, r)?;
    let target = k as f64 / r as f64;
    if (law.moment_r() - target).abs() > 1e-9 * target.max(1.0) {
        return Err(Error::Domain(format!(
            "E W^r = {} but must equal k/r = {target}",
            law.moment_r()
        )));
    }
    let opts = QuadOptions::default();
    let left = law.expect(|x| g_from_f(k as f64, f_prime(x), f(x), x), &opts)?;
    let right = r as f64
        * base
            .iter()
            .filter(|(x, _)| *x > 0)
            .map(|(x, m)| {
                let w = x as f64 / scale;
                m * w.powi(r as i32 - 1) * f(w)
            })
            .sum::<f64>();
    Ok((left, right))
}

/// The same identity for `W ~ GG(k, r)`, where `W*` has the law of `W`.
pub fn equilibrium_identity_gg(
    p: &GGParams,
    f: impl Fn(f64) -> f64,
    f_prime: impl Fn(f64) -> f64,
) -> Result<(f64, f64)> {
    let opts = QuadOptions::default();
    let (k, r) = (p.k(), p.r());
    let dens = |x: f64| if x > 0.0 { p.density_unchecked(x) } else { 0.0 };
    let left = integrate_to_inf(|x| g_from_f(k, f_prime(x), f(x), x) * dens(x), 0.0, &opts)?;
    let right = r * integrate_to_inf(|x| x.powf(r - 1.0) * f(x) * dens(x), 0.0, &opts)?;
    Ok((left, right))
}

/// Upper bound on `d_K(L(W), GG(k, r))` from the coupling of `W` with its
/// equilibrium transform, at closeness `β` and exceedance
/// `P[|W - W*| > β]`. `ew_r_minus_1` is `E W^{r-1}`.
pub fn thm5_bound(k: f64, r: f64, beta: f64, ew_r_minus_1: f64, exceedance: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::param("beta", format!("must lie in (0, 1], got {beta}")));
    }
    if !(0.0..=1.0).contains(&exceedance) {
        return Err(Error::param("exceedance", "must be a probability"));
    }
    let (m, mp) = GGParams::new(k, r)?.bound_constants()?;
    let tail = 4.0 * (2.0 + (r + k - 1.0) * mp) * exceedance;
    let main = if r == 1.0 || r >= 2.0 {
        beta * (10.0 * m
            + 2.0 * r * (r - 1.0) * (1.0 + 2f64.powf(r - 2.0) * (ew_r_minus_1 + beta.powf(r - 1.0))) * mp
            + 4.0 * r * ew_r_minus_1)
    } else {
        beta * (10.0 * m + 4.0 * r * ew_r_minus_1) + 2.0 * r * beta.powf(r - 1.0) * mp
    };
    Ok(main + tail)
}

/// Right side of the perturbation bound for `|(x+t)^{r-1} f(x+t) - x^{r-1} f(x)|`
/// with `|t| <= β`, per unit `‖h̃‖`.
pub fn perturbation_bound(r: f64, m_prime: f64, beta: f64, x: f64) -> f64 {
    if r == 1.0 || r >= 2.0 {
        beta * (r - 1.0) * (1.0 + 2f64.powf(r - 2.0) * x.powf(r - 1.0) + 2f64.powf(r - 2.0) * beta.powf(r - 1.0))
            * m_prime
            + 2.0 * beta * x.powf(r - 1.0)
    } else {
        beta.powf(r - 1.0) * m_prime + 2.0 * beta * x.powf(r - 1.0)
    }
}

/// Largest observed `lhs / rhs` for one inequality family.
#[derive(Clone, Debug, Serialize)]
pub struct FamilyResult {
    pub name: String,
    pub max_ratio: f64,
    pub arg_x: f64,
    pub arg_test: String,
    pub checks: u64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub k: f64,
    pub r: f64,
    pub grid_points: usize,
    pub test_functions: usize,
    pub max_residual: f64,
    pub families: Vec<FamilyResult>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.max_residual < RESIDUAL_TOLERANCE && self.families.iter().all(|f| f.holds)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report is plain data")
    }
}

pub const RESIDUAL_TOLERANCE: f64 = 1e-8;
pub const AUDIT_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug)]
pub struct AuditOptions {
    pub thresholds: usize,
    pub grid_points: usize,
    pub residual_points: usize,
    pub perturbation_points: usize,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            thresholds: 50,
            grid_points: 2000,
            residual_points: 1000,
            perturbation_points: 100,
        }
    }
}

#[derive(Clone, Debug)]
struct Tracker {
    name: &'static str,
    max_ratio: f64,
    arg_x: f64,
    arg_test: String,
    checks: u64,
}

impl Tracker {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            max_ratio: 0.0,
            arg_x: f64::NAN,
            arg_test: String::new(),
            checks: 0,
        }
    }

    fn record(&mut self, lhs: f64, rhs: f64, x: f64, test: &dyn Fn() -> String) {
        self.checks += 1;
        let ratio = if rhs > 0.0 {
            lhs / rhs
        } else if lhs <= 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        if ratio > self.max_ratio || ratio.is_nan() {
            self.max_ratio = if ratio.is_nan() { f64::INFINITY } else { ratio };
            self.arg_x = x;
            self.arg_test = test();
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.checks += other.checks;
        if other.max_ratio > self.max_ratio {
            self.max_ratio = other.max_ratio;
            self.arg_x = other.arg_x;
            self.arg_test = other.arg_test;
        }
        self
    }

    fn finish(self) -> FamilyResult {
        FamilyResult {
            name: self.name.to_string(),
            holds: self.max_ratio <= 1.0 + AUDIT_TOLERANCE,
            max_ratio: self.max_ratio,
            arg_x: self.arg_x,
            arg_test: self.arg_test,
            checks: self.checks,
        }
    }
}

const FAMILIES: [&str; 12] = [
    "pointwise-f-kappa",
    "pointwise-derivative-kappa",
    "kappa-monotone-slope",
    "sup-f-inverse-mode",
    "sup-b-prime-f",
    "sup-f-prime",
    "sup-f-m-prime",
    "perturbation",
    "sup-g",
    "gamma-bracket",
    "gamma-ratio-bracket",
    "mode-constants",
];

/// Audit test functions: indicators and ramps spread over the bulk of the
/// law.
pub fn audit_test_functions(p: &GGParams, count: usize) -> Vec<TestFunction> {
    let top = p.upper_cutoff(1e-6);
    let widths = [0.05, 0.1, 0.2, 0.5, 1.0];
    let mut out = Vec::with_capacity(2 * count);
    for i in 0..count {
        let s = top * (i as f64 + 0.5) / count as f64;
        out.push(TestFunction::Indicator { s });
        out.push(TestFunction::Ramp {
            s,
            eps: widths[i % widths.len()],
        });
    }
    out
}

/// Numerically checks the Stein solution bounds for GG(k, r).
pub fn bound_audit(k: f64, r: f64, opts: &AuditOptions) -> Result<AuditReport> {
    let params = GGParams::new(k, r)?;
    let pot = params.potential()?;
    let (m, mp) = params.bound_constants()?;
    let top = params.upper_cutoff(1e-12);
    let grid: Vec<f64> = (1..=opts.grid_points)
        .map(|i| top * i as f64 / opts.grid_points as f64)
        .collect();
    let kap = kappas_grid(&pot, &grid)?;
    let tests = audit_test_functions(&params, opts.thresholds);
    let inverse_mode = (pot.b_at_x0()).exp() / pot.normalizer();

    let per_test = tests
        .par_iter()
        .map(|h| -> Result<(Vec<Tracker>, f64)> {
            let sol = SteinSolution::new(pot, h.clone())?;
            let name = || format!("{h:?}");
            let norm = sol.h_tilde_norm();
            let f = sol.f_grid(&grid)?;
            let mut t: Vec<Tracker> = FAMILIES.iter().map(|n| Tracker::new(n)).collect();
            let mut max_res = 0.0f64;
            let stride = (grid.len() / opts.residual_points.max(1)).max(1);
            let pstride = (grid.len() / opts.perturbation_points.max(1)).max(1);
            for (i, &x) in grid.iter().enumerate() {
                let (ka, kb) = kap[i];
                let kmin = ka.min(kb);
                let fp = sol.f_prime(x, f[i]);
                let bp = pot.b_prime(x);
                t[0].record(f[i].abs(), norm * kmin, x, &name);
                t[1].record(fp.abs(), norm * (1.0 + bp.abs() * kmin), x, &name);
                t[3].record(f[i].abs(), norm * inverse_mode, x, &name);
                t[4].record((bp * f[i]).abs(), norm, x, &name);
                t[5].record(fp.abs(), 2.0 * norm, x, &name);
                t[6].record(f[i].abs(), norm * mp, x, &name);
                let g = sol.g(x, f[i]);
                let g_max = (2.0 + (k - 1.0) * mp).max(1.0 + r * mp);
                t[8].record(g.abs(), norm * g_max, x, &name);
                t[8].record(norm * g_max, norm * (2.0 + (r + k - 1.0) * mp), x, &name);
                if i % stride == 0 && sol.smooth_at(x) && x > 2.0 * DIFF_STEP {
                    max_res = max_res.max(sol.residual_given(x, f[i])?);
                }
                if i % pstride == 0 {
                    for beta in [0.01, 0.1, 0.5] {
                        for t_off in [-beta, -beta / 2.0, beta / 2.0, beta] {
                            let y = x + t_off;
                            if y <= 0.0 {
                                continue;
                            }
                            let fy = sol.f(y)?;
                            let lhs = (y.powf(r - 1.0) * fy - x.powf(r - 1.0) * f[i]).abs();
                            t[7].record(lhs, norm * perturbation_bound(r, mp, beta, x), x, &name);
                        }
                    }
                }
            }
            Ok((t, max_res))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut trackers: Vec<Tracker> = FAMILIES.iter().map(|n| Tracker::new(n)).collect();
    let mut max_residual = 0.0f64;
    for (ts, res) in per_test {
        max_residual = max_residual.max(res);
        trackers = trackers.into_iter().zip(ts).map(|(a, b)| a.merge(b)).collect();
    }

    // potential-only checks
    let none = || String::from("-");
    for (i, &x) in grid.iter().enumerate() {
        let (ka, kb) = kap[i];
        let bp = pot.b_prime(x);
        if x > pot.x0() {
            trackers[2].record(bp * kb, 1.0, x, &none);
        } else {
            trackers[2].record(bp.abs() * ka, 1.0, x, &none);
        }
    }
    for i in 1..=400 {
        let x = 0.05 * i as f64;
        let (lo, hi) = gamma_bracket(x);
        let g = gamma(x + 1.0);
        trackers[9].record(lo, g, x, &none);
        trackers[9].record(g, hi, x, &none);
        for s in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let (lo, ratio, hi) = gamma_ratio_bracket(x, s);
            trackers[10].record(lo, ratio, x, &none);
            trackers[10].record(ratio, hi, x, &none);
        }
    }
    let c = (k - 1.0) / r;
    let (lo, hi) = gamma_bracket(c);
    trackers[9].record(lo, gamma(c + 1.0), c, &none);
    trackers[9].record(gamma(c + 1.0), hi, c, &none);
    let (lo, ratio, hi) = gamma_ratio_bracket(k / r, 1.0 - 1.0 / r);
    trackers[10].record(lo, ratio, k / r, &none);
    trackers[10].record(ratio, hi, k / r, &none);
    trackers[11].record(pot.mode_height(), m, pot.x0(), &none);
    trackers[11].record(inverse_mode, mp, pot.x0(), &none);

    Ok(AuditReport {
        k,
        r,
        grid_points: grid.len(),
        test_functions: tests.len(),
        max_residual,
        families: trackers.into_iter().map(Tracker::finish).collect(),
    })
}

/// `P[s <= Z <= s + ε]` against `C e^{-B(x0)} ε`, as the worst ratio over
/// a grid of `(s, ε)`.
pub fn concentration_ratio(p: &GGParams) -> Result<f64> {
    let pot = p.potential()?;
    let top = p.upper_cutoff(1e-9);
    let mut worst = 0.0f64;
    for i in 0..200 {
        let s = top * i as f64 / 200.0;
        for eps in [1e-4, 1e-2, 0.1, 0.5, 1.0] {
            let mass = p.cdf(s + eps) - p.cdf(s);
            worst = worst.max(mass / (pot.mode_height() * eps));
        }
    }
    Ok(worst)
}
