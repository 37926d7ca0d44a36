//! The generalized gamma family GG(k, r).
//!
//! `Z ~ GG(k, r)` has density `r x^{k-1} e^{-x^r} / Γ(k/r)` on `(0, ∞)`;
//! equivalently `Z = X^{1/r}` with `X ~ Gamma(k/r, 1)`. Exponential,
//! half-normal and Rayleigh laws are `(1,1)`, `(1,2)` and `(2,2)`.

use rand::RngCore;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::special::{gamma_p, gamma_q, ln_gamma};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GGParams {
    k: f64,
    r: f64,
}

impl GGParams {
    pub fn new(k: f64, r: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::param("k", format!("must be positive, got {k}")));
        }
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::param("r", format!("must be positive, got {r}")));
        }
        Ok(Self { k, r })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    fn ln_norm(&self) -> f64 {
        self.r.ln() - ln_gamma(self.k / self.r)
    }

    pub fn density(&self, x: f64) -> Result<f64> {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::Domain(format!("density needs finite x > 0, got {x}")));
        }
        Ok(self.density_unchecked(x))
    }

    #[inline]
    pub(crate) fn density_unchecked(&self, x: f64) -> f64 {
        let lx = x.ln();
        (self.ln_norm() + (self.k - 1.0) * lx - (self.r * lx).exp()).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 || x.is_nan() {
            return 0.0;
        }
        gamma_p(self.k / self.r, x.powf(self.r))
    }

    /// Upper tail `P[Z > x]`, accurate far into the tail.
    pub fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 || x.is_nan() {
            return 1.0;
        }
        gamma_q(self.k / self.r, x.powf(self.r))
    }

    /// `E Z^l = Γ((k+l)/r) / Γ(k/r)` for `l > -k`.
    pub fn moment(&self, l: f64) -> Result<f64> {
        if !(l > -self.k) {
            return Err(Error::Domain(format!("moment order {l} must exceed -k = {}", -self.k)));
        }
        Ok((ln_gamma((self.k + l) / self.r) - ln_gamma(self.k / self.r)).exp())
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        let g = Gamma::new(self.k / self.r, 1.0).expect("shape checked at construction");
        g.sample(rng).powf(1.0 / self.r)
    }

    /// Smallest power of two `x` (at least 1) with `P[Z > x] < tail`.
    pub fn upper_cutoff(&self, tail: f64) -> f64 {
        let mut x = 1.0;
        while self.sf(x) >= tail {
            x *= 2.0;
        }
        x
    }

    /// The `r`-power bias of GG(k, r), which is GG(k + r, r).
    pub fn power_biased(&self) -> GGParams {
        GGParams {
            k: self.k + self.r,
            r: self.r,
        }
    }

    pub fn potential(&self) -> Result<Potential> {
        self.require_convex()?;
        let c = (self.k - 1.0) / self.r;
        let x0 = if c == 0.0 { 0.0 } else { c.powf(1.0 / self.r) };
        let b_min = psi(c);
        let normalizer = self.ln_norm().exp();
        Ok(Potential {
            params: *self,
            x0,
            b_min,
            normalizer,
            mode_height: normalizer * (-b_min).exp(),
        })
    }

    /// Closed-form upper bounds `(M, M')` for the mode height
    /// `C e^{-B(x0)}` and for `e^{B(x0)} Γ(k/r) / r`.
    pub fn bound_constants(&self) -> Result<(f64, f64)> {
        self.require_convex()?;
        let (k, r) = (self.k, self.r);
        let c = (k - 1.0) / r;
        let corr = (1.0 / (6.0 * (c + 0.375))).exp();
        let m = k.powf(1.0 - 1.0 / r) * r.powf(1.0 / r) * (-4.0f64 / 9.0).exp() * corr
            / (2.0 * c + 1.0).sqrt();
        let m_prime =
            (2.0 * std::f64::consts::PI).sqrt() / corr * (c + 0.5).sqrt() * (c + 1.0).powf(1.0 / r) / k;
        Ok((m, m_prime))
    }

    fn require_convex(&self) -> Result<()> {
        if self.k < 1.0 || self.r < 1.0 {
            return Err(Error::Domain(format!(
                "potential is convex only for k, r >= 1 (got k = {}, r = {})",
                self.k, self.r
            )));
        }
        Ok(())
    }
}

/// `ψ(x) = x - x ln x` with `ψ(0) = 0`.
pub fn psi(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x - x * x.ln()
    }
}

/// The convex potential `B(x) = x^r - (k-1) ln x` of GG(k, r), whose density
/// is `C e^{-B}` on `(0, ∞)`.
#[derive(Clone, Copy, Debug)]
pub struct Potential {
    params: GGParams,
    x0: f64,
    b_min: f64,
    normalizer: f64,
    mode_height: f64,
}

impl Potential {
    pub fn params(&self) -> GGParams {
        self.params
    }

    pub fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    pub fn b(&self, x: f64) -> f64 {
        let GGParams { k, r } = self.params;
        let log_term = if k == 1.0 { 0.0 } else { (k - 1.0) * x.ln() };
        x.powf(r) - log_term
    }

    pub fn b_prime(&self, x: f64) -> f64 {
        let GGParams { k, r } = self.params;
        let pole = if k == 1.0 { 0.0 } else { (k - 1.0) / x };
        r * x.powf(r - 1.0) - pole
    }

    /// `B(x) - B(z)` evaluated without forming either value separately.
    #[inline]
    pub fn b_diff(&self, x: f64, z: f64) -> f64 {
        let GGParams { k, r } = self.params;
        let log_term = if k == 1.0 { 0.0 } else { (k - 1.0) * (z / x).ln() };
        x.powf(r) - z.powf(r) + log_term
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn b_at_x0(&self) -> f64 {
        self.b_min
    }

    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn mode_height(&self) -> f64 {
        self.mode_height
    }

    pub fn density(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            self.params.density_unchecked(x)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate_pieces, QuadOptions};
    use crate::rng::StreamRng;
    use crate::special::gamma;
    use std::f64::consts::{E, PI};

    fn gg(k: f64, r: f64) -> GGParams {
        GGParams::new(k, r).unwrap()
    }

    #[test]
    fn density_closed_forms() {
        assert!((gg(1.0, 1.0).density(2.0).unwrap() - (-2.0f64).exp()).abs() < 1e-15);
        assert!((gg(2.0, 2.0).density(1.0).unwrap() - 2.0 / E).abs() < 1e-15);
        let near_zero = gg(1.0, 2.0).density(1e-12).unwrap();
        assert!((near_zero - 2.0 / PI.sqrt()).abs() < 1e-10);
        assert!(gg(1.0, 1.0).density(0.0).is_err());
        assert!(gg(1.0, 1.0).density(f64::NAN).is_err());
    }

    #[test]
    fn cdf_closed_forms() {
        let p = gg(2.0, 2.0);
        for &t in &[0.05, 0.5, 1.0, 1.7, 3.0] {
            assert!((p.cdf(t) - (1.0 - (-t * t).exp())).abs() < 1e-14);
        }
        assert_eq!(gg(1.0, 1.0).cdf(0.0), 0.0);
        assert_eq!(gg(1.0, 1.0).cdf(-1.0), 0.0);
        assert!((gg(1.0, 2.0).cdf(50.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn moments() {
        assert!((gg(3.0, 2.0).moment(2.0).unwrap() - 1.5).abs() < 1e-13);
        assert!((gg(1.0, 1.0).moment(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((gg(2.0, 2.0).moment(1.0).unwrap() - PI.sqrt() / 2.0).abs() < 1e-14);
        assert!(gg(2.0, 1.0).moment(-2.0).is_err());
    }

    #[test]
    fn normalization_and_moments_by_quadrature() {
        let o = QuadOptions::default();
        for k in 1..=6 {
            for r in 1..=6 {
                let p = gg(k as f64, r as f64);
                let xmax = p.upper_cutoff(1e-14);
                let pts = [0.0, 0.5, 1.0, 2.0, xmax.max(2.0)];
                let mass = integrate_pieces(|x| p.potential().unwrap().density(x), &pts, &o).unwrap();
                assert!((mass - 1.0).abs() < 1e-8, "k = {k}, r = {r}, mass = {mass}");
                for l in 1..=3 {
                    let m = integrate_pieces(|x| x.powi(l) * p.potential().unwrap().density(x), &pts, &o)
                        .unwrap();
                    let want = p.moment(l as f64).unwrap();
                    assert!((m / want - 1.0).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn cdf_is_gamma_cdf_of_power() {
        let mut rng = StreamRng::new(3, 0);
        for _ in 0..100 {
            let k = 0.2 + 8.0 * rng.uniform();
            let r = 0.2 + 5.0 * rng.uniform();
            let x = 3.0 * rng.uniform();
            let p = gg(k, r);
            assert!((p.cdf(x) - gamma_p(k / r, x.powf(r))).abs() < 1e-12);
        }
    }

    #[test]
    fn sampling_means() {
        let mut rng = StreamRng::new(5, 0);
        let n = 1_000_000;
        let p = gg(1.0, 1.0);
        let mean = (0..n).map(|_| p.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 3.0 / (n as f64).sqrt());
        let p = gg(2.0, 2.0);
        let sq: Vec<f64> = (0..n).map(|_| p.sample(&mut rng).powi(2)).collect();
        let m2 = sq.iter().sum::<f64>() / n as f64;
        let var = sq.iter().map(|v| (v - m2).powi(2)).sum::<f64>() / n as f64;
        assert!((m2 - 1.0).abs() < 4.0 * (var / n as f64).sqrt());
    }

    #[test]
    fn potential_examples() {
        let p = gg(1.0, 1.0).potential().unwrap();
        assert_eq!(p.x0(), 0.0);
        assert_eq!(p.b_at_x0(), 0.0);
        assert!((p.mode_height() - 1.0).abs() < 1e-15);
        let p = gg(2.0, 2.0).potential().unwrap();
        assert!((p.x0() - 0.5f64.sqrt()).abs() < 1e-15);
        let want = 2.0 * 0.5f64.sqrt() * (-0.5f64).exp();
        assert!((p.mode_height() - want).abs() < 1e-14);
        assert!((p.mode_height() - 0.85776).abs() < 1e-5);
        assert!((p.b(p.x0()) - p.b_at_x0()).abs() < 1e-14);
        assert!(gg(0.5, 2.0).potential().is_err());
        assert!(gg(2.0, 0.5).potential().is_err());
    }

    #[test]
    fn mode_height_below_its_bound() {
        let (m, _) = gg(1.0, 1.0).bound_constants().unwrap();
        assert!((m - 1.0).abs() < 1e-15);
        for k in 1..=10 {
            for r in 1..=10 {
                let p = gg(k as f64, r as f64);
                let pot = p.potential().unwrap();
                let (m, mp) = p.bound_constants().unwrap();
                assert!(pot.mode_height() <= m + 1e-12, "k = {k}, r = {r}");
                let lhs = pot.b_at_x0().exp() * gamma(k as f64 / r as f64) / r as f64;
                assert!(lhs <= mp + 1e-12, "k = {k}, r = {r}");
            }
        }
    }

    #[test]
    fn bias_by_r_shifts_shape() {
        for k in 1..=3 {
            for r in 1..=3 {
                let p = gg(k as f64, r as f64);
                let q = p.power_biased();
                for i in 1..200 {
                    let x = 0.02 * i as f64;
                    let lhs = p.density(x).unwrap() * x.powi(r) / (k as f64 / r as f64);
                    assert!((lhs - q.density(x).unwrap()).abs() < 1e-12);
                }
            }
        }
    }
}
