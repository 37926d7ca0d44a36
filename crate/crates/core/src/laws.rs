//! Exact laws of tree and path statistics through their urn embeddings.
//!
//! Each statistic is a function of an urn variable `N`, possibly with extra
//! randomness: binomial thinning, subtraction of an independent geometric
//! variable, or conditioning on positivity. Those steps are carried out by
//! exact mixing over the urn pmf, so the resulting laws are exact in
//! rational arithmetic.

use crate::error::{Error, Result};
use crate::ggdist::GGParams;
use crate::pmf::{ExactPmf, Scalar};
use crate::urns::UrnSpec;

/// Law of `Bi(N - minus, 1/2)` for `N ~ p`. Needs `N >= minus` a.s.
pub fn binomial_thinning<T: Scalar>(p: &ExactPmf<T>, minus: i64) -> Result<ExactPmf<T>> {
    let lo = p.min_support() - minus;
    if lo < 0 {
        return Err(Error::Domain(format!(
            "thinning count can be negative (support starts at {})",
            p.min_support()
        )));
    }
    let top = (p.max_support() - minus) as usize;
    let half = T::ratio(1, 2);
    // Horner over m: acc <- acc * (δ0 + δ1)/2 + P[N - minus = m] δ0
    let mut acc: Vec<T> = vec![T::zero(); top + 1];
    for m in (0..=top).rev() {
        for y in (1..=top).rev() {
            let v = (acc[y].clone() + acc[y - 1].clone()) * half.clone();
            acc[y] = v;
        }
        acc[0] = acc[0].clone() * half.clone() + p.get(m as i64 + minus);
    }
    Ok(ExactPmf::from_raw(0, acc).trimmed())
}

/// Law of `N - Y` given `N - Y > 0`, with `Y` independent and
/// `P[Y = y] = 2^{-(y+1)}` on `y >= 0`.
pub fn geometric_positive_part<T: Scalar>(p: &ExactPmf<T>) -> Result<ExactPmf<T>> {
    let top = p.max_support();
    if top < 1 {
        return Err(Error::Domain("no positive support".into()));
    }
    let half = T::ratio(1, 2);
    // s(x) = P[N - Y = x] = (p(x) + s(x + 1)) / 2
    let mut w = vec![T::zero(); top as usize];
    let mut s = T::zero();
    for x in (1..=top).rev() {
        s = (p.get(x) + s) * half.clone();
        w[x as usize - 1] = s.clone();
    }
    ExactPmf::from_weights(1, w)
}

fn urn<T: Scalar>(black: u64, white: u64, draws: u64) -> Result<ExactPmf<T>> {
    UrnSpec::new(black, white, 1, draws)?.exact_pmf::<T>()
}

/// Tree and path statistics with exact laws.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Statistic {
    /// Nodes spanned by the root and `k` uniform leaves of a uniform
    /// binary tree with `n` leaves.
    SpanningLeaves { k: u64 },
    /// Nodes on the path from the root to a uniform node of a uniform
    /// binary tree with `n` leaves.
    NodePath,
    /// Nodes spanned by the root and `k` uniform nodes of a uniform plane
    /// tree with `n` nodes.
    PlaneSpanning { k: u64 },
    /// Height of a uniform excursion of length `2n` at a uniform time in
    /// `0..2n`.
    ExcursionHeight,
    /// Visits to the origin of a uniform bridge of length `2n`.
    BridgeLocalTime,
    /// Final height of a uniform meander of length `2n + 1`.
    MeanderFinalHeight,
    /// Final height of a uniform meander of length `2n + 2`.
    MeanderFinalHeightEven,
    /// Visits to the origin of a simple walk of length `2n + 1` (the same
    /// law holds at length `2n`).
    WalkLocalTime,
}

impl Statistic {
    pub fn name(&self) -> String {
        match self {
            Statistic::SpanningLeaves { k } => format!("spanning-leaves k={k}"),
            Statistic::NodePath => "node-path".into(),
            Statistic::PlaneSpanning { k } => format!("plane-spanning k={k}"),
            Statistic::ExcursionHeight => "excursion-height".into(),
            Statistic::BridgeLocalTime => "bridge-local-time".into(),
            Statistic::MeanderFinalHeight => "meander-final-height".into(),
            Statistic::MeanderFinalHeightEven => "meander-final-height-even".into(),
            Statistic::WalkLocalTime => "walk-local-time".into(),
        }
    }

    /// Generalized gamma limit after scaling by the statistic's own `μ_n`.
    pub fn limit(&self) -> GGParams {
        let (k, r) = match *self {
            Statistic::SpanningLeaves { k } | Statistic::PlaneSpanning { k } => (2.0 * k as f64, 2.0),
            Statistic::WalkLocalTime => (1.0, 2.0),
            _ => (2.0, 2.0),
        };
        GGParams::new(k, r).expect("positive parameters")
    }

    /// Smallest admissible `n`.
    pub fn min_n(&self) -> u64 {
        match *self {
            Statistic::SpanningLeaves { k } | Statistic::PlaneSpanning { k } => k.max(1),
            Statistic::NodePath | Statistic::ExcursionHeight => 1,
            _ => 0,
        }
    }

    /// Exact law for size parameter `n`.
    pub fn exact_law<T: Scalar>(&self, n: u64) -> Result<ExactPmf<T>> {
        if n < self.min_n() {
            return Err(Error::param("n", format!("must be at least {}", self.min_n())));
        }
        match *self {
            Statistic::SpanningLeaves { k } => urn(0, 2 * k - 1, n - k),
            Statistic::NodePath => geometric_positive_part(&urn::<T>(0, 1, n - 1)?),
            Statistic::PlaneSpanning { k } => {
                let thinned = binomial_thinning(&urn::<T>(0, 2 * k - 1, n - k)?, 2 * k as i64 - 1)?;
                Ok(thinned.shifted(k as i64))
            }
            Statistic::ExcursionHeight => excursion_height_law(n, IndexConvention::Shifted),
            Statistic::BridgeLocalTime => urn(0, 1, n),
            Statistic::MeanderFinalHeight => {
                let y = binomial_thinning(&urn::<T>(0, 1, n)?, 1)?;
                Ok(doubled(&y).shifted(1))
            }
            Statistic::MeanderFinalHeightEven => {
                let y = binomial_thinning(&urn::<T>(0, 1, n)?, 0)?;
                Ok(doubled(&y.condition_positive()?))
            }
            Statistic::WalkLocalTime => urn(1, 1, n),
        }
    }
}

/// Which urn index feeds the excursion-height law `Bi(N, 1/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndexConvention {
    /// `N ~ F^{n,1}_{0,1}`.
    Stated,
    /// `N ~ F^{n-1,1}_{0,1}`, as the tree with `n` leaves gives.
    Shifted,
}

/// Law of `Bi(N, 1/2)` under the chosen convention, `n >= 1`.
pub fn excursion_height_law<T: Scalar>(n: u64, convention: IndexConvention) -> Result<ExactPmf<T>> {
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    let draws = match convention {
        IndexConvention::Stated => n,
        IndexConvention::Shifted => n - 1,
    };
    binomial_thinning(&urn::<T>(0, 1, draws)?, 0)
}

/// Spanning count of `k` plane nodes by the left-edge formula alone,
/// `Bi(N - (2k-1), 1/2) + k - 1`, which counts edges rather than nodes.
pub fn plane_spanning_edge_law<T: Scalar>(n: u64, k: u64) -> Result<ExactPmf<T>> {
    Ok(Statistic::PlaneSpanning { k }.exact_law::<T>(n)?.shifted(-1))
}

/// Law of `2X`.
fn doubled<T: Scalar>(p: &ExactPmf<T>) -> ExactPmf<T> {
    let lo = p.min_support();
    let hi = p.max_support();
    let mass = (2 * lo..=2 * hi)
        .map(|x| if x % 2 == 0 { p.get(x / 2) } else { T::zero() })
        .collect();
    ExactPmf::from_raw(2 * lo, mass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pmf::Rational;

    fn q(n: u64, d: u64) -> Rational {
        Rational::ratio(n, d)
    }

    #[test]
    fn thinning_matches_direct_mixture() {
        let p = ExactPmf::new(2, vec![q(1, 3), q(1, 6), q(1, 2)]).unwrap();
        let t = binomial_thinning(&p, 1).unwrap();
        // N - 1 in {1, 2, 3} with masses 1/3, 1/6, 1/2
        let want0 = q(1, 3) * q(1, 2) + q(1, 6) * q(1, 4) + q(1, 2) * q(1, 8);
        let want3 = q(1, 2) * q(1, 8);
        assert_eq!(t.get(0), want0);
        assert_eq!(t.get(3), want3);
        assert_eq!(t.total(), q(1, 1));
        assert!(binomial_thinning(&p, 3).is_err());
    }

    #[test]
    fn geometric_part_small_case() {
        // N = 2: N - Y is 2, 1 with masses 1/2, 1/4, then condition
        let g = geometric_positive_part(&ExactPmf::<Rational>::point(2)).unwrap();
        assert_eq!(g.masses(), &[q(1, 3), q(2, 3)]);
        assert_eq!(
            geometric_positive_part(&ExactPmf::<Rational>::point(1)).unwrap(),
            ExactPmf::point(1)
        );
        assert!(geometric_positive_part(&ExactPmf::<Rational>::point(0)).is_err());
    }

    #[test]
    fn small_laws() {
        let e = excursion_height_law::<Rational>(2, IndexConvention::Shifted).unwrap();
        assert_eq!(e.masses(), &[q(1, 4), q(1, 2), q(1, 4)]);
        let m = Statistic::MeanderFinalHeight.exact_law::<Rational>(1).unwrap();
        assert_eq!(m.get(1), q(1, 2));
        assert_eq!(m.get(3), q(1, 2));
        let m = Statistic::MeanderFinalHeightEven.exact_law::<Rational>(1).unwrap();
        assert_eq!(m.get(2), q(2, 3));
        assert_eq!(m.get(4), q(1, 3));
        let b = Statistic::BridgeLocalTime.exact_law::<Rational>(1).unwrap();
        assert_eq!(b, ExactPmf::point(2));
        let w = Statistic::WalkLocalTime.exact_law::<Rational>(1).unwrap();
        assert_eq!(w.masses(), &[q(1, 2), q(1, 2)]);
        let v = Statistic::NodePath.exact_law::<Rational>(1).unwrap();
        assert_eq!(v, ExactPmf::point(1));
        assert!(Statistic::SpanningLeaves { k: 3 }.exact_law::<f64>(2).is_err());
    }

    #[test]
    fn float_and_rational_agree() {
        let stats = [
            Statistic::SpanningLeaves { k: 2 },
            Statistic::NodePath,
            Statistic::PlaneSpanning { k: 2 },
            Statistic::ExcursionHeight,
            Statistic::MeanderFinalHeight,
            Statistic::MeanderFinalHeightEven,
        ];
        for s in stats {
            let a = s.exact_law::<Rational>(12).unwrap().to_f64();
            let b = s.exact_law::<f64>(12).unwrap();
            assert!(a.sup_diff(&b) < 1e-14, "{}", s.name());
        }
    }
}
