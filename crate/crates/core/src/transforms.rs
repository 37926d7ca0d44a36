//! Power bias, the generalized equilibrium transform and couplings.
//!
//! For a nonnegative `W` with `E W^r > 0`, the `r`-power bias `W^(r)` has law
//! `x^r P[W ∈ dx] / E W^r`, and the `(k, r)` equilibrium transform is
//! `W* = V_k W^(r)` with `V_k ~ Beta(k, 1)` independent. GG(k, r) is the
//! unique fixed point of `W ↦ W*` among laws with `E W^r = k/r`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ggdist::GGParams;
use crate::pmf::{pow_int, rising, DiscreteSampler, ExactPmf, Scalar};
use crate::quad::{integrate, QuadOptions};
use crate::rng::{blocked, StreamRng};
use crate::stats::dk_empirical;
use crate::urns::{mu_n, PolyaUniforms, UrnSpec};

fn require_nonnegative<T: Scalar>(p: &ExactPmf<T>) -> Result<()> {
    if p.min_support() < 0 {
        return Err(Error::Domain("bias needs nonnegative support".into()));
    }
    Ok(())
}

/// Law with mass proportional to `x^r p(x)`.
pub fn power_bias_pmf<T: Scalar>(p: &ExactPmf<T>, r: u32) -> Result<ExactPmf<T>> {
    require_nonnegative(p)?;
    let w = p
        .iter()
        .map(|(x, m)| m.clone() * pow_int::<T>(x, r))
        .collect();
    ExactPmf::from_weights(p.offset(), w)
        .map_err(|_| Error::Domain("all mass at zero, bias undefined".into()))
}

/// Law with mass proportional to `x (x+1) ... (x+r-1) p(x)`.
pub fn rising_bias_pmf<T: Scalar>(p: &ExactPmf<T>, r: u32) -> Result<ExactPmf<T>> {
    require_nonnegative(p)?;
    let w = p
        .iter()
        .map(|(x, m)| m.clone() * rising::<T>(x, r))
        .collect();
    ExactPmf::from_weights(p.offset(), w)
        .map_err(|_| Error::Domain("rising bias has no mass".into()))
}

/// The law of `W* = V_k W^(r)` for a finitely supported `W`, optionally
/// rescaled to `W / scale`. `W*` has a density, so it is represented by its
/// CDF.
#[derive(Clone, Debug)]
pub struct EquilibriumLaw {
    k: u32,
    r: u32,
    atoms: Vec<(f64, f64)>,
    moment_r: f64,
}

impl EquilibriumLaw {
    pub fn new(base: &ExactPmf<f64>, k: u32, r: u32) -> Result<Self> {
        Self::scaled(base, 1.0, k, r)
    }

    /// Transform of `W / scale`.
    pub fn scaled(base: &ExactPmf<f64>, scale: f64, k: u32, r: u32) -> Result<Self> {
        if k == 0 || r == 0 {
            return Err(Error::param("k, r", "must be at least 1"));
        }
        if !(scale > 0.0) {
            return Err(Error::param("scale", "must be positive"));
        }
        require_nonnegative(base)?;
        let raw: Vec<(f64, f64)> = base
            .iter()
            .filter(|(x, m)| *x > 0 && **m > 0.0)
            .map(|(x, m)| {
                let y = x as f64 / scale;
                (y, m * y.powi(r as i32))
            })
            .collect();
        let moment_r: f64 = raw.iter().map(|(_, w)| w).sum();
        if !(moment_r > 0.0) {
            return Err(Error::Domain("all mass at zero, bias undefined".into()));
        }
        let atoms = raw.into_iter().map(|(y, w)| (y, w / moment_r)).collect();
        Ok(Self { k, r, atoms, moment_r })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    /// `E W^r` of the (scaled) base law.
    pub fn moment_r(&self) -> f64 {
        self.moment_r
    }

    /// Support points and masses of the power-biased law.
    pub fn biased_atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn max_support(&self) -> f64 {
        self.atoms.last().map_or(0.0, |a| a.0)
    }

    /// `P[W* <= t] = Σ π(x) min(1, t/x)^k`.
    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let k = self.k as i32;
        let s: f64 = self
            .atoms
            .iter()
            .map(|&(x, p)| if t >= x { p } else { p * (t / x).powi(k) })
            .sum();
        s.min(1.0)
    }

    pub fn density(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let k = self.k as i32;
        self.atoms
            .iter()
            .filter(|&&(x, _)| x > t)
            .map(|&(x, p)| p * k as f64 * t.powi(k - 1) / x.powi(k))
            .sum()
    }

    /// `E g(W*) = Σ π(x) ∫_0^1 g(x u) k u^{k-1} du`.
    pub fn expect<F: Fn(f64) -> f64>(&self, g: F, opts: &QuadOptions) -> Result<f64> {
        let k = self.k as i32;
        let mut total = 0.0;
        for &(x, p) in &self.atoms {
            let inner = integrate(|u| g(x * u) * k as f64 * u.powi(k - 1), 0.0, 1.0, opts)?;
            total += p * inner;
        }
        Ok(total)
    }

    pub fn sample(&self, rng: &mut StreamRng) -> f64 {
        let u = rng.uniform();
        let mut acc = 0.0;
        let mut x = self.max_support();
        for &(y, p) in &self.atoms {
            acc += p;
            if u < acc {
                x = y;
                break;
            }
        }
        x * rng.uniform_open().powf(1.0 / self.k as f64)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FixedPointReport {
    pub k: f64,
    pub r: f64,
    pub samples: u64,
    pub statistic: f64,
    pub band: f64,
    pub seed: u64,
}

impl FixedPointReport {
    pub fn passed(&self) -> bool {
        self.statistic < self.band
    }
}

/// Samples `V_k Z'` with `Z' ~ GG(k + r, r)` (the `r`-power bias of
/// GG(k, r)) and measures its Kolmogorov distance to GG(k, r), with the 99%
/// DKW band.
pub fn gg_fixed_point_check(p: GGParams, samples: u64, seed: u64) -> Result<FixedPointReport> {
    if samples == 0 {
        return Err(Error::EmptySample);
    }
    let biased = p.power_biased();
    let k = p.k();
    let draws = blocked(
        seed,
        0,
        samples,
        |rng, n| {
            (0..n)
                .map(|_| {
                    let v = rng.uniform_open().powf(1.0 / k);
                    v * biased.sample(rng)
                })
                .collect::<Vec<f64>>()
        },
        Vec::with_capacity(samples as usize),
        |mut a, b| {
            a.extend(b);
            a
        },
    );
    let (statistic, band) = dk_empirical(&draws, &p, 0.01)?;
    Ok(FixedPointReport {
        k,
        r: p.r(),
        samples,
        statistic,
        band,
        seed,
    })
}

/// TV-optimal coupling of two finite laws on the integers.
#[derive(Clone, Debug)]
pub struct MaximalCoupling {
    lo: i64,
    p: Vec<f64>,
    common: Vec<f64>,
    tv: f64,
    common_sampler: Option<DiscreteSampler>,
    res_p: Option<DiscreteSampler>,
    res_q: Option<DiscreteSampler>,
}

impl MaximalCoupling {
    pub fn new(p: &ExactPmf<f64>, q: &ExactPmf<f64>) -> Result<Self> {
        let lo = p.min_support().min(q.min_support());
        let hi = p.max_support().max(q.max_support());
        let len = (hi - lo + 1) as usize;
        let pv: Vec<f64> = (lo..=hi).map(|x| p.get(x)).collect();
        let qv: Vec<f64> = (lo..=hi).map(|x| q.get(x)).collect();
        let common: Vec<f64> = (0..len).map(|i| pv[i].min(qv[i])).collect();
        let overlap: f64 = common.iter().sum();
        let tv = (1.0 - overlap).max(0.0);
        let rp: Vec<f64> = (0..len).map(|i| (pv[i] - common[i]).max(0.0)).collect();
        let rq: Vec<f64> = (0..len).map(|i| (qv[i] - common[i]).max(0.0)).collect();
        Ok(Self {
            lo,
            common_sampler: DiscreteSampler::new(lo, &common).ok(),
            res_p: DiscreteSampler::new(lo, &rp).ok(),
            res_q: DiscreteSampler::new(lo, &rq).ok(),
            p: pv,
            common,
            tv,
        })
    }

    /// Total variation distance, which equals `P[X != Y]`.
    pub fn tv(&self) -> f64 {
        self.tv
    }

    pub fn sample(&self, rng: &mut StreamRng) -> (i64, i64) {
        let u = rng.uniform();
        match (&self.common_sampler, &self.res_p, &self.res_q) {
            (Some(c), _, _) if u >= self.tv => {
                let x = c.sample(rng);
                (x, x)
            }
            (_, Some(a), Some(b)) => (a.sample(rng), b.sample(rng)),
            (Some(c), _, _) => {
                let x = c.sample(rng);
                (x, x)
            }
            _ => unreachable!("one of the parts carries mass"),
        }
    }

    /// Draws `Y` from its conditional law given `X = x` under the coupling.
    pub fn sample_given_first(&self, x: i64, rng: &mut StreamRng) -> i64 {
        let i = (x - self.lo) as usize;
        let px = self.p.get(i).copied().unwrap_or(0.0);
        let keep = if px > 0.0 { self.common[i] / px } else { 0.0 };
        if rng.uniform() < keep {
            return x;
        }
        match &self.res_q {
            Some(s) => s.sample(rng),
            None => x,
        }
    }
}

/// One realization of the coupling chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainDraw {
    /// `R ~ F^{n-l,l}_{1,j+l+1}`.
    pub r: u64,
    /// White count of the same urn continued for `l` more draws.
    pub x: u64,
    /// `x - (l+1)`, which has the rising-factorial-biased law of `W_n`.
    pub t: i64,
    /// A draw of `W_n^(l+1)`, maximally coupled to `t`.
    pub biased: i64,
    /// `V ~ Beta(j, 1)`.
    pub v: f64,
    /// `W = Q(R - j - 1) ~ F^{n,l}_{1,j}`.
    pub w: u64,
    /// `W* = V · biased`.
    pub w_star: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExceedanceReport {
    pub j: u64,
    pub l: u64,
    pub n: u64,
    pub mu_n: f64,
    pub beta: f64,
    pub exceedance: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
    pub tv: f64,
}

/// Joint construction of `W_n ~ F^{n,l}_{1,j}` and `W* = V_j W_n^(l+1)` on
/// one probability space.
///
/// Per sample the random stream is consumed in this order: one uniform for
/// `R`, `l` urn draws, one or two uniforms for the coupled bias draw, then
/// `j` uniforms `U_0..U_{j-1}` that give both `V = max U_i` and
/// `W = Q(R - j - 1)`.
#[derive(Clone, Debug)]
pub struct CouplingChain {
    j: u64,
    l: u64,
    n: u64,
    mu: f64,
    r_law: DiscreteSampler,
    urn: UrnSpec,
    coupling: MaximalCoupling,
}

impl CouplingChain {
    pub fn new(j: u64, l: u64, n: u64) -> Result<Self> {
        if j == 0 || l == 0 {
            return Err(Error::param("j, l", "must be at least 1"));
        }
        if n <= l {
            return Err(Error::param("n", format!("must exceed l = {l}")));
        }
        let urn = UrnSpec::new(1, j + l + 1, l, n)?;
        let r_pmf = UrnSpec::new(1, j + l + 1, l, n - l)?.exact_pmf::<f64>()?;
        let w_pmf = UrnSpec::new(1, j, l, n)?.exact_pmf::<f64>()?;
        let t_pmf = rising_bias_pmf(&w_pmf, l as u32 + 1)?;
        let b_pmf = power_bias_pmf(&w_pmf, l as u32 + 1)?;
        Ok(Self {
            j,
            l,
            n,
            mu: mu_n(j, l, n)?,
            r_law: DiscreteSampler::from_pmf(&r_pmf)?,
            urn,
            coupling: MaximalCoupling::new(&t_pmf, &b_pmf)?,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// TV distance between the rising-factorial and power biases of `W_n`.
    pub fn tv(&self) -> f64 {
        self.coupling.tv()
    }

    pub fn draw(&self, rng: &mut StreamRng) -> ChainDraw {
        let (j, l, n) = (self.j, self.l, self.n);
        let r = self.r_law.sample(rng) as u64;
        let x = self.urn.advance(r, n - l, n, rng);
        let t = x as i64 - (l as i64 + 1);
        let biased = self.coupling.sample_given_first(t, rng);
        let u = PolyaUniforms::draw(j, rng);
        let v = u.v();
        let w = u.q(r - j - 1);
        ChainDraw {
            r,
            x,
            t,
            biased,
            v,
            w,
            w_star: v * biased as f64,
        }
    }

    /// Monte Carlo estimate of `P[|W - W*| / μ_n > beta]`.
    pub fn exceedance(&self, beta: f64, samples: u64, seed: u64) -> Result<ExceedanceReport> {
        if samples == 0 {
            return Err(Error::EmptySample);
        }
        let cut = beta * self.mu;
        let hits = blocked(
            seed,
            0,
            samples,
            |rng, count| {
                (0..count)
                    .filter(|_| {
                        let d = self.draw(rng);
                        (d.w as f64 - d.w_star).abs() > cut
                    })
                    .count() as u64
            },
            0u64,
            |a, b| a + b,
        );
        let p = hits as f64 / samples as f64;
        Ok(ExceedanceReport {
            j: self.j,
            l: self.l,
            n: self.n,
            mu_n: self.mu,
            beta,
            exceedance: p,
            stderr: (p * (1.0 - p) / samples as f64).sqrt(),
            samples,
            seed,
            tv: self.tv(),
        })
    }
}

/// Exceedance estimate `P̂[|W_n/μ_n - W*/μ_n| > beta]` from the coupling
/// chain.
pub fn coupling_chain(
    j: u64,
    l: u64,
    n: u64,
    beta: f64,
    samples: u64,
    seed: u64,
) -> Result<ExceedanceReport> {
    CouplingChain::new(j, l, n)?.exceedance(beta, samples, seed)
}
