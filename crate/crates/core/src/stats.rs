//! Kolmogorov distances, goodness of fit and convergence-rate fits.

use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::ggdist::GGParams;
use crate::laws::Statistic;
use crate::pmf::ExactPmf;
use crate::special::gamma_q;
use crate::urns::{moment_scale, mu_n, UrnSpec};

/// Half-width `sqrt(ln(2/α) / (2m))` of the DKW confidence band.
pub fn dkw_band(m: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * m as f64)).sqrt()
}

/// One-sample Kolmogorov statistic `sup |ECDF - G|` against GG and the DKW
/// band at level `alpha`.
pub fn dk_empirical(samples: &[f64], p: &GGParams, alpha: f64) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::Domain("sample contains NaN".into()));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let m = xs.len() as f64;
    let stat = xs.iter().enumerate().fold(0.0f64, |best, (i, &x)| {
        let g = p.cdf(x);
        best.max((i as f64 + 1.0) / m - g).max(g - i as f64 / m)
    });
    Ok((stat, dkw_band(xs.len(), alpha)))
}

/// Exact `sup_t |P[W/μ <= t] - G(t)|` for a finite law of `W`. The sup is
/// attained at an atom, from the left or the right.
pub fn dk_discrete_vs_gg(pmf: &ExactPmf<f64>, scale: f64, p: &GGParams) -> Result<f64> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::param("scale", format!("must be positive, got {scale}")));
    }
    let mut below = 0.0;
    let mut best = 0.0f64;
    for (x, m) in pmf.iter() {
        let g = p.cdf(x as f64 / scale);
        let upto = below + m;
        best = best.max((below - g).abs()).max((upto - g).abs());
        below = upto;
    }
    Ok(best.min(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Pearson goodness of fit. Neighbouring bins are pooled until each pooled
/// bin expects at least 5 counts.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> Result<ChiSquare> {
    if observed.len() != probs.len() {
        return Err(Error::param("probs", "length differs from observed"));
    }
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return Err(Error::EmptySample);
    }
    let psum: f64 = probs.iter().sum();
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&c, &q) in observed.iter().zip(probs) {
        o += c as f64;
        e += q / psum * total as f64;
        if e >= 5.0 {
            bins.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => bins.push((o, e)),
        }
    }
    if bins.len() < 2 {
        return Err(Error::Insufficient("fewer than two bins after pooling".into()));
    }
    let statistic: f64 = bins.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let df = bins.len() - 1;
    Ok(ChiSquare {
        statistic,
        df,
        p_value: gamma_q(df as f64 / 2.0, statistic / 2.0),
    })
}

/// Least-squares line through `(ln n, ln d)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// `d · n^{exponent}` per row.
    pub normalized: Vec<f64>,
}

/// Fits `ln d = intercept + slope ln n` and normalizes by `n^{exponent}`.
pub fn rate_fit(rows: &[(u64, f64)], exponent: f64) -> Result<RateFit> {
    if rows.len() < 4 {
        return Err(Error::Insufficient(format!("{} rows, need at least 4", rows.len())));
    }
    if rows.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::param("rows", "n must be strictly increasing"));
    }
    if rows.iter().any(|&(n, d)| n == 0 || !(d > 0.0)) {
        return Err(Error::Domain("n and d_K must be positive".into()));
    }
    let span = rows[rows.len() - 1].0 as f64 / rows[0].0 as f64;
    if span < 100.0 {
        return Err(Error::Insufficient("rows span less than two decades".into()));
    }
    let xs: Vec<f64> = rows.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|&(_, d)| d.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Ok(RateFit {
        slope,
        intercept: my - slope * mx,
        normalized: rows
            .iter()
            .map(|&(n, d)| d * (n as f64).powf(exponent))
            .collect(),
    })
}

/// `(min, max)` of the normalized distances.
pub fn sandwich_check(normalized: &[f64]) -> Result<(f64, f64)> {
    if normalized.is_empty() {
        return Err(Error::EmptySample);
    }
    let lo = normalized.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = normalized.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Empirical,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateRow {
    pub n: u64,
    pub mu_n: f64,
    pub d_k: f64,
    pub method: Method,
    pub stderr: Option<f64>,
    pub normalized: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateReport {
    pub label: String,
    pub target_k: f64,
    pub target_r: f64,
    /// Expected decay exponent `a` in `d_K ≍ n^{-a}`.
    pub exponent: f64,
    pub target_slope: f64,
    pub slope: f64,
    pub intercept: f64,
    pub rows: Vec<RateRow>,
}

impl RateReport {
    fn assemble(
        label: String,
        target: GGParams,
        exponent: f64,
        rows: Vec<(u64, f64, f64)>,
    ) -> Result<Self> {
        let pairs: Vec<(u64, f64)> = rows.iter().map(|&(n, _, d)| (n, d)).collect();
        let fit = rate_fit(&pairs, exponent)?;
        Ok(Self {
            label,
            target_k: target.k(),
            target_r: target.r(),
            exponent,
            target_slope: -exponent,
            slope: fit.slope,
            intercept: fit.intercept,
            rows: rows
                .into_iter()
                .zip(fit.normalized)
                .map(|((n, mu, d), normalized)| RateRow {
                    n,
                    mu_n: mu,
                    d_k: d,
                    method: Method::Exact,
                    stderr: None,
                    normalized,
                })
                .collect(),
        })
    }

    pub fn sandwich(&self) -> Result<(f64, f64)> {
        let exact: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.method == Method::Exact)
            .map(|r| r.normalized)
            .collect();
        sandwich_check(&exact)
    }

    /// Columns `n,mu_n,d_K,normalized`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,mu_n,d_K,normalized\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{}", r.n, r.mu_n, r.d_k, r.normalized);
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report is plain data")
    }
}

/// Powers of two `2^lo, ..., 2^hi`.
pub fn power_grid(lo: u32, hi: u32) -> Vec<u64> {
    (lo..=hi).map(|e| 1u64 << e).collect()
}

fn check_grid(ns: &[u64]) -> Result<()> {
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("n-grid", "must be strictly increasing"));
    }
    Ok(())
}

/// Exact `d_K(W_n / μ_n, GG(j, l+1))` for `W_n ~ F^{n,l}_{1,j}` over `ns`.
pub fn urn_rate(j: u64, l: u64, ns: &[u64]) -> Result<RateReport> {
    if j == 0 || l == 0 {
        return Err(Error::param("j, l", "must be at least 1"));
    }
    check_grid(ns)?;
    let target = GGParams::new(j as f64, l as f64 + 1.0)?;
    let rows = ns
        .par_iter()
        .map(|&n| {
            let pmf = UrnSpec::new(1, j, l, n)?.exact_pmf::<f64>()?;
            let mu = mu_n(j, l, n)?;
            Ok((n, mu, dk_discrete_vs_gg(&pmf, mu, &target)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let exponent = l as f64 / (l as f64 + 1.0);
    RateReport::assemble(format!("urn j={j} l={l}"), target, exponent, rows)
}

/// Exact `d_K` between a statistic scaled by its own `μ_n` and its GG limit.
pub fn statistic_rate(stat: Statistic, ns: &[u64]) -> Result<RateReport> {
    check_grid(ns)?;
    let target = stat.limit();
    let rows = ns
        .par_iter()
        .map(|&n| {
            let law = stat.exact_law::<f64>(n)?;
            let mu = moment_scale(law.moment(target.r() as u32), target.k(), target.r());
            Ok((n, mu, dk_discrete_vs_gg(&law, mu, &target)?))
        })
        .collect::<Result<Vec<_>>>()?;
    RateReport::assemble(stat.name(), target, 0.5, rows)
}
