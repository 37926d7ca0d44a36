use serde_json::json;
use urnflow::rng::blocked;
use urnflow::{ExactPmf, Identity, Rational, Scalar, UrnSpec};

use super::{check_samples, counts_json, fit_check, histogram_pairs, merge_counts, Check, Failure, Outcome, Report};
use crate::args::{Format, IdentityArgs, UrnArgs, UrnCmd};

pub fn run(cmd: &UrnCmd, seed: u64) -> Outcome {
    match cmd {
        UrnCmd::Pmf { urn, rational, format } => {
            if *rational {
                pmf::<Rational>(urn, *format)
            } else {
                pmf::<f64>(urn, *format)
            }
        }
        UrnCmd::Sample { urn, samples } => sample(urn, *samples, seed),
        UrnCmd::Moments { urn, m } => moments(urn, *m),
        UrnCmd::Identity(a) => identity(a),
    }
}

fn spec(a: &UrnArgs) -> Result<UrnSpec, Failure> {
    Ok(UrnSpec::new(a.b, a.w, a.l, a.n)?)
}

fn close<T: Scalar>(a: &T, b: &T) -> bool {
    if T::EXACT {
        a == b
    } else {
        let (x, y) = (a.to_f64(), b.to_f64());
        (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0)
    }
}

fn pmf<T: Scalar>(a: &UrnArgs, format: Format) -> Outcome {
    let s = spec(a)?;
    let p = s.exact_pmf::<T>()?;
    let mut checks = vec![Check::new("total-mass", close(&p.total(), &T::one()), format!("{}", p.total()))];
    let moments_agree = (1..=4).all(|m| close(&p.rising_moment(m), &s.rising_moment::<T>(m)));
    checks.push(Check::new("rising-moments", moments_agree, "orders 1..=4 against the product formula"));
    Ok(match format {
        Format::Json => Report::json(
            "pmf",
            &json!({"b": a.b, "w": a.w, "l": a.l, "n": a.n, "pmf": p.to_json()}),
            checks,
        ),
        Format::Csv => Report::csv("pmf", p.to_csv(), checks),
    })
}

fn sample(a: &UrnArgs, samples: u64, seed: u64) -> Outcome {
    check_samples(samples)?;
    let s = spec(a)?;
    let top = (a.w + a.n) as usize;
    let counts = blocked(
        seed,
        0,
        samples,
        |rng, count| {
            let mut c = vec![0u64; top + 1];
            for _ in 0..count {
                c[s.simulate(rng) as usize] += 1;
            }
            c
        },
        vec![0u64; top + 1],
        merge_counts,
    );
    let pairs = histogram_pairs(&counts);
    let mean = pairs.iter().map(|(x, c)| *x as f64 * *c as f64).sum::<f64>() / samples as f64;
    let exact = s.exact_pmf::<f64>()?;
    let (chi, check) = fit_check(&pairs, &exact)?;
    Ok(Report::json(
        "sample",
        &json!({
            "b": a.b, "w": a.w, "l": a.l, "n": a.n,
            "samples": samples,
            "mean": mean,
            "exact_mean": exact.moment(1),
            "counts": counts_json(&pairs),
            "chi_square": chi,
        }),
        vec![check],
    ))
}

fn moments(a: &UrnArgs, m: u32) -> Outcome {
    if m == 0 || m > 12 {
        return Err(Failure::Invalid("m must lie in 1..=12".into()));
    }
    let s = spec(a)?;
    let exact = a.n <= urnflow::urns::RATIONAL_DRAW_LIMIT;
    let mut rows = Vec::new();
    let mut agree = true;
    if exact {
        let p = s.exact_pmf::<Rational>()?;
        for i in 1..=m {
            let formula = s.rising_moment::<Rational>(i);
            let direct = p.rising_moment(i);
            agree &= formula == direct;
            rows.push(json!({"m": i, "formula": formula.to_json(), "from_pmf": direct.to_json()}));
        }
    } else {
        let p = s.exact_pmf::<f64>()?;
        for i in 1..=m {
            let formula = s.rising_moment::<f64>(i);
            let direct = p.rising_moment(i);
            agree &= close(&formula, &direct);
            rows.push(json!({"m": i, "formula": formula, "from_pmf": direct}));
        }
    }
    Ok(Report::json(
        "moments",
        &json!({"b": a.b, "w": a.w, "l": a.l, "n": a.n, "exact": exact, "rising_moments": rows}),
        vec![Check::new("formula-matches-pmf", agree, format!("orders 1..={m}"))],
    ))
}

pub fn parse_identity(a: &IdentityArgs) -> Result<Identity, Failure> {
    let (j, l, n) = (a.j, a.l, a.n);
    Ok(match a.name.as_str() {
        "bias-shift" | "lemma4.2" => Identity::BiasShift {
            black: a.b,
            white: j,
            period: l,
            draws: n,
            shift: a.shift,
        },
        "first-period" | "lemma4.7" => Identity::FirstPeriod { j, l, n },
        "green-ball" | "lemma4.8" => Identity::GreenBall { j, l, n, i: a.i },
        "classical-mixture" | "lemma4.9" => Identity::ClassicalMixture { j, l, n },
        "polya-representation" | "lemma4.10" => Identity::PolyaRepresentation { j, l, n },
        other => return Err(Failure::Invalid(format!("unknown identity `{other}`"))),
    })
}

fn sides_report<T: Scalar>(id: Identity, a: &IdentityArgs) -> Outcome {
    let (left, right): (ExactPmf<T>, ExactPmf<T>) = id.sides::<T>()?;
    let d = left.sup_diff(&right);
    let passed = if T::EXACT { d == T::zero() } else { d.to_f64() < 1e-12 };
    Ok(Report::json(
        "identity",
        &json!({
            "identity": id.name(),
            "j": a.j, "l": a.l, "n": a.n, "i": a.i, "b": a.b, "shift": a.shift,
            "exact": T::EXACT,
            "discrepancy": d.to_json(),
            "left": left.to_json(),
            "right": right.to_json(),
        }),
        vec![Check::new("sides-agree", passed, format!("discrepancy {d}"))],
    ))
}

pub fn identity(a: &IdentityArgs) -> Outcome {
    let id = parse_identity(a)?;
    if a.float {
        sides_report::<f64>(id, a)
    } else {
        sides_report::<Rational>(id, a)
    }
}
