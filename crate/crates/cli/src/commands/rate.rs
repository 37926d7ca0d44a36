use urnflow::laws::Statistic;
use urnflow::stats::{statistic_rate, urn_rate};

use super::{Check, Failure, Outcome, Report};
use crate::args::{Format, RateArgs, RateStat};

pub const SLOPE_TOLERANCE: f64 = 0.15;
pub const SANDWICH_LIMIT: f64 = 10.0;

fn statistic(s: RateStat, k: u64) -> Statistic {
    match s {
        RateStat::SpanningLeaves => Statistic::SpanningLeaves { k },
        RateStat::NodePath => Statistic::NodePath,
        RateStat::PlaneSpanning => Statistic::PlaneSpanning { k },
        RateStat::ExcursionHeight => Statistic::ExcursionHeight,
        RateStat::BridgeLocalTime => Statistic::BridgeLocalTime,
        RateStat::MeanderFinalHeight => Statistic::MeanderFinalHeight,
        RateStat::MeanderFinalHeightEven => Statistic::MeanderFinalHeightEven,
        RateStat::WalkLocalTime => Statistic::WalkLocalTime,
    }
}

/// `nmin, 2 nmin, 4 nmin, ...` up to `nmax`.
fn doubling_grid(nmin: u64, nmax: u64) -> Result<Vec<u64>, Failure> {
    if nmin == 0 || nmax < nmin {
        return Err(Failure::Invalid("need 0 < nmin <= nmax".into()));
    }
    let mut ns = vec![nmin];
    while let Some(next) = ns.last().and_then(|n| n.checked_mul(2)).filter(|n| *n <= nmax) {
        ns.push(next);
    }
    Ok(ns)
}

pub fn run(a: &RateArgs) -> Outcome {
    let ns = doubling_grid(a.nmin, a.nmax)?;
    let rep = match a.stat {
        None => urn_rate(a.j, a.l, &ns)?,
        Some(s) => statistic_rate(statistic(s, a.k), &ns)?,
    };
    let off = (rep.slope - rep.target_slope).abs();
    let mut checks = vec![Check::new(
        "slope",
        off <= SLOPE_TOLERANCE,
        format!("fitted {:.4}, target {:.4}", rep.slope, rep.target_slope),
    )];
    let (lo, hi) = rep.sandwich()?;
    checks.push(Check::new(
        "sandwich",
        lo > 0.0 && hi / lo < SANDWICH_LIMIT,
        format!("normalized d_K in [{lo:.4}, {hi:.4}]"),
    ));
    Ok(match a.format {
        Format::Csv => Report::csv("rate", rep.to_csv(), checks),
        Format::Json => Report::json("rate", &rep.to_json(), checks),
    })
}
