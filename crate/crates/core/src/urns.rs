//! Two-color Pólya urns with periodic black immigration.
//!
//! The urn starts with `b` black and `w` white balls. A ball is drawn
//! uniformly, returned together with one more ball of its color, and after
//! every `l`-th draw one extra black ball is added. After `i` draws the urn
//! holds `N_i = w + b + i + floor(i / l)` balls. The law of the white count
//! after `n` draws is written `F^{n,l}_{b,w}`; without immigration this is the
//! classical Pólya urn `P_{b,w}(n)`.

use crate::error::{Error, Result};
use crate::pmf::{rising, ExactPmf, Scalar};
use crate::rng::StreamRng;

/// Largest draw count accepted by the exact dynamic program.
pub const DP_DRAW_LIMIT: u64 = 1 << 17;

/// Largest draw count accepted in exact rational arithmetic.
pub const RATIONAL_DRAW_LIMIT: u64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UrnSpec {
    pub black0: u64,
    pub white0: u64,
    pub period: u64,
    pub draws: u64,
}

impl UrnSpec {
    pub fn new(black0: u64, white0: u64, period: u64, draws: u64) -> Result<Self> {
        if black0 + white0 == 0 {
            return Err(Error::param("black0 + white0", "urn must hold at least one ball"));
        }
        if period == 0 {
            return Err(Error::param("period", "must be at least 1"));
        }
        Ok(Self {
            black0,
            white0,
            period,
            draws,
        })
    }

    /// Number of balls after `i` draws, for `0 <= i <= draws`.
    pub fn total_balls(&self, i: u64) -> Result<u64> {
        if i > self.draws {
            return Err(Error::param("i", format!("draw index {i} exceeds {}", self.draws)));
        }
        Ok(self.balls_after(i))
    }

    #[inline]
    fn balls_after(&self, i: u64) -> u64 {
        self.black0 + self.white0 + i + i / self.period
    }

    /// Runs the urn once and returns the final white count.
    pub fn simulate(&self, rng: &mut StreamRng) -> u64 {
        self.advance(self.white0, 0, self.draws, rng)
    }

    /// Continues a trajectory holding `white` white balls after `from` draws
    /// up to `to` draws and returns the white count then.
    pub fn advance(&self, mut white: u64, from: u64, to: u64, rng: &mut StreamRng) -> u64 {
        for i in from..to {
            if rng.below(self.balls_after(i)) < white {
                white += 1;
            }
        }
        white
    }

    /// Exact law of the white count after `draws` draws.
    pub fn exact_pmf<T: Scalar>(&self) -> Result<ExactPmf<T>> {
        check_dp_size::<T>(self.draws)?;
        Ok(dp(self.black0, self.white0, self.draws, Some(self.period)))
    }

    /// `E X (X+1) ... (X+m-1)` by the product formula
    /// `∏_{j<m} (w+j) · ∏_{i=1}^{n} (1 + m / N_{i-1})`.
    pub fn rising_moment<T: Scalar>(&self, m: u32) -> T {
        let mut acc = rising::<T>(self.white0 as i64, m);
        for i in 0..self.draws {
            let n = self.balls_after(i);
            acc = acc * T::ratio(n + m as u64, n);
        }
        acc
    }

    /// Raw moments `E X^m` for `m = 1..=up_to`, recovered from the rising
    /// moments through the unsigned Stirling numbers of the first kind.
    pub fn raw_moments<T: Scalar>(&self, up_to: u32) -> Vec<T> {
        let stirling = stirling_first::<T>(up_to as usize);
        let mut raw: Vec<T> = Vec::with_capacity(up_to as usize);
        for m in 1..=up_to as usize {
            let mut v = self.rising_moment::<T>(m as u32);
            for i in 1..m {
                v = v - stirling[m][i].clone() * raw[i - 1].clone();
            }
            raw.push(v);
        }
        raw
    }
}

fn check_dp_size<T: Scalar>(draws: u64) -> Result<()> {
    if draws > DP_DRAW_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "{draws} draws exceeds the exact table limit {DP_DRAW_LIMIT}"
        )));
    }
    if T::EXACT && draws > RATIONAL_DRAW_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "{draws} draws exceeds the rational arithmetic limit {RATIONAL_DRAW_LIMIT}"
        )));
    }
    Ok(())
}

/// Forward recursion over the white count. `period = None` gives the
/// classical urn.
fn dp<T: Scalar>(black: u64, white: u64, draws: u64, period: Option<u64>) -> ExactPmf<T> {
    let mut mass = vec![T::one()];
    for i in 0..draws {
        let total = black + white + i + period.map_or(0, |l| i / l);
        let mut next = vec![T::zero(); mass.len() + 1];
        for (s, m) in mass.iter().enumerate() {
            if m.is_zero() {
                continue;
            }
            let x = white + s as u64;
            if x > 0 {
                next[s + 1] += &(m.clone() * T::ratio(x, total));
            }
            if total > x {
                next[s] += &(m.clone() * T::ratio(total - x, total));
            }
        }
        mass = next;
    }
    ExactPmf::from_raw(white as i64, mass).trimmed()
}

/// `c[m][i]`: unsigned Stirling numbers of the first kind, `m <= up_to`.
fn stirling_first<T: Scalar>(up_to: usize) -> Vec<Vec<T>> {
    let mut c = vec![vec![T::zero(); up_to + 1]; up_to + 1];
    c[0][0] = T::one();
    for m in 0..up_to {
        for i in 1..=m + 1 {
            c[m + 1][i] = T::int(m as u64) * c[m][i].clone() + c[m][i - 1].clone();
        }
    }
    c
}

/// Exact law of the classical Pólya urn `P_{black,white}(draws)`.
pub fn polya_pmf<T: Scalar>(black: u64, white: u64, draws: u64) -> Result<ExactPmf<T>> {
    if black + white == 0 {
        return Err(Error::param("black + white", "urn must hold at least one ball"));
    }
    check_dp_size::<T>(draws)?;
    Ok(dp(black, white, draws, None))
}

/// Scale `μ` with `E (W/μ)^r = k/r`, given `E W^r`.
pub fn moment_scale(moment_r: f64, k: f64, r: f64) -> f64 {
    (r / k * moment_r).powf(1.0 / r)
}

/// `μ_n` for `W_n ~ F^{n,l}_{1,j}`: `μ_n^{l+1} = (l+1)/j · E W_n^{l+1}`.
pub fn mu_n(j: u64, l: u64, n: u64) -> Result<f64> {
    if j == 0 {
        return Err(Error::param("j", "must be at least 1"));
    }
    let spec = UrnSpec::new(1, j, l, n)?;
    let m = spec.raw_moments::<f64>(l as u32 + 1)[l as usize];
    Ok(moment_scale(m, j as f64, l as f64 + 1.0))
}

/// `P[Q <= t]` for `Q ~ P_{1,j}(n)`, clamped to 0 below `j` and to 1 from
/// `j + n` on.
pub fn polya_cdf<T: Scalar>(j: u64, n: u64, t: i64) -> T {
    if t < j as i64 {
        return T::zero();
    }
    if t >= (j + n) as i64 {
        return T::one();
    }
    let t = t as u64;
    (0..j).fold(T::one(), |acc, i| acc * T::ratio(t - i, n + j - i))
}

/// Uniforms `U_0, ..., U_{j-1}` that drive the coupled pair: the maximum `V`
/// is Beta(j, 1), and for every `m` the value `Q(m)` has law `P_{1,j}(m)`
/// with `|Q(m) - m V| <= j + 1`.
#[derive(Clone, Debug)]
pub struct PolyaUniforms {
    u: Vec<f64>,
}

impl PolyaUniforms {
    pub fn draw(j: u64, rng: &mut StreamRng) -> Self {
        Self {
            u: (0..j).map(|_| rng.uniform_open()).collect(),
        }
    }

    pub fn from_uniforms(u: Vec<f64>) -> Self {
        Self { u }
    }

    pub fn j(&self) -> u64 {
        self.u.len() as u64
    }

    pub fn v(&self) -> f64 {
        self.u.iter().copied().fold(0.0, f64::max)
    }

    /// `max_i (i + ceil((m + j - i) U_i))`.
    pub fn q(&self, m: u64) -> u64 {
        let j = self.j();
        self.u
            .iter()
            .enumerate()
            .map(|(i, &u)| {
                let span = (m + j - i as u64) as f64;
                i as u64 + (span * u).ceil() as u64
            })
            .max()
            .unwrap_or(0)
    }
}

/// One draw of `(Q, V)` with `Q ~ P_{1,j}(n)` and `V ~ Beta(j, 1)` coupled so
/// that `|Q - n V| <= j + 1`.
pub fn polya_coupled_sample(j: u64, n: u64, rng: &mut StreamRng) -> Result<(u64, f64)> {
    if j == 0 {
        return Err(Error::param("j", "must be at least 1"));
    }
    let u = PolyaUniforms::draw(j, rng);
    Ok((u.q(n), u.v()))
}

/// Exact distributional identities between urn laws. Each variant builds a
/// left and a right side as exact pmfs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Identity {
    /// Adding `shift` white balls at the start equals shifting the
    /// rising-factorial bias of order `shift` by `shift`.
    BiasShift {
        black: u64,
        white: u64,
        period: u64,
        draws: u64,
        shift: u64,
    },
    /// Conditioning `F^{n,l}_{1,j}` on the first `l` draws.
    FirstPeriod { j: u64, l: u64, n: u64 },
    /// `F^{n-l,l}_{2+i,j+l-i}` as a classical urn run for a random number of
    /// non-black draws.
    GreenBall { j: u64, l: u64, n: u64, i: u64 },
    /// Conditioning the classical urn `P_{1,j}(n)` on the first `l` draws.
    ClassicalMixture { j: u64, l: u64, n: u64 },
    /// `F^{n,l}_{1,j} = P_{1,j}(R - j - 1)` with `R ~ F^{n-l,l}_{1,j+l+1}`.
    PolyaRepresentation { j: u64, l: u64, n: u64 },
}

impl Identity {
    pub fn name(&self) -> &'static str {
        match self {
            Identity::BiasShift { .. } => "bias-shift",
            Identity::FirstPeriod { .. } => "first-period",
            Identity::GreenBall { .. } => "green-ball",
            Identity::ClassicalMixture { .. } => "classical-mixture",
            Identity::PolyaRepresentation { .. } => "polya-representation",
        }
    }

    fn check(&self) -> Result<()> {
        match *self {
            Identity::BiasShift { black, white, period, .. } => {
                UrnSpec::new(black, white, period, 0)?;
                if white == 0 {
                    return Err(Error::param("white", "bias needs at least one white ball"));
                }
            }
            Identity::FirstPeriod { j, l, n }
            | Identity::ClassicalMixture { j, l, n }
            | Identity::PolyaRepresentation { j, l, n } => check_jln(j, l, n)?,
            Identity::GreenBall { j, l, n, i } => {
                check_jln(j, l, n)?;
                if i > l {
                    return Err(Error::param("i", format!("must be at most l = {l}")));
                }
            }
        }
        Ok(())
    }

    /// Left and right sides of the identity.
    pub fn sides<T: Scalar>(&self) -> Result<(ExactPmf<T>, ExactPmf<T>)> {
        self.check()?;
        match *self {
            Identity::BiasShift {
                black,
                white,
                period,
                draws,
                shift,
            } => {
                let left = UrnSpec::new(black, white + shift, period, draws)?.exact_pmf::<T>()?;
                let base = UrnSpec::new(black, white, period, draws)?;
                let p = base.exact_pmf::<T>()?;
                let norm = base.rising_moment::<T>(shift as u32);
                let mass = p
                    .iter()
                    .map(|(x, m)| m.clone() * rising::<T>(x, shift as u32) / norm.clone())
                    .collect();
                let right = ExactPmf::from_raw(p.offset(), mass).shifted(shift as i64).trimmed();
                Ok((left, right))
            }
            Identity::FirstPeriod { j, l, n } => {
                let left = UrnSpec::new(1, j, l, n)?.exact_pmf::<T>()?;
                let x = polya_pmf::<T>(1, j, l)?;
                let parts = x
                    .iter()
                    .map(|(xv, w)| {
                        let xv = xv as u64;
                        UrnSpec::new(2 + j + l - xv, xv, l, n - l)?
                            .exact_pmf::<T>()
                            .map(|p| (w.clone(), p))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((left, ExactPmf::mixture(parts)?))
            }
            Identity::GreenBall { j, l, n, i } => {
                let left = UrnSpec::new(2 + i, j + l - i, l, n - l)?.exact_pmf::<T>()?;
                let r = UrnSpec::new(1, 1 + j + l, l, n - l)?.exact_pmf::<T>()?;
                let parts = r
                    .iter()
                    .map(|(rho, w)| {
                        polya_pmf::<T>(1 + i, j + l - i, rho as u64 - j - l - 1).map(|p| (w.clone(), p))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((left, ExactPmf::mixture(parts)?))
            }
            Identity::ClassicalMixture { j, l, n } => {
                let right = polya_pmf::<T>(1, j, n)?;
                let x = polya_pmf::<T>(1, j, l)?;
                let parts = x
                    .iter()
                    .map(|(xv, w)| {
                        let xv = xv as u64;
                        polya_pmf::<T>(1 + j + l - xv, xv, n - l).map(|p| (w.clone(), p))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((ExactPmf::mixture(parts)?, right))
            }
            Identity::PolyaRepresentation { j, l, n } => {
                let left = UrnSpec::new(1, j, l, n)?.exact_pmf::<T>()?;
                let r = UrnSpec::new(1, j + l + 1, l, n - l)?.exact_pmf::<T>()?;
                let parts = r
                    .iter()
                    .map(|(rho, w)| polya_pmf::<T>(1, j, rho as u64 - j - 1).map(|p| (w.clone(), p)))
                    .collect::<Result<Vec<_>>>()?;
                Ok((left, ExactPmf::mixture(parts)?))
            }
        }
    }

    /// `max_x |p_L(x) - p_R(x)|`.
    pub fn discrepancy<T: Scalar>(&self) -> Result<T> {
        let (l, r) = self.sides::<T>()?;
        Ok(l.sup_diff(&r))
    }
}

fn check_jln(j: u64, l: u64, n: u64) -> Result<()> {
    if j == 0 {
        return Err(Error::param("j", "must be at least 1"));
    }
    if l == 0 {
        return Err(Error::param("l", "must be at least 1"));
    }
    if n < l {
        return Err(Error::param("n", format!("must be at least l = {l}")));
    }
    Ok(())
}
