use serde_json::json;
use urnflow::rng::blocked;
use urnflow::transforms::{coupling_chain, gg_fixed_point_check, power_bias_pmf, rising_bias_pmf, CouplingChain};
use urnflow::{ExactPmf, GGParams, Rational, Scalar, UrnSpec};

use super::{check_samples, fit_check, histogram_pairs, merge_counts, Check, Outcome, Report};
use crate::args::{GgShape, TransformCmd, UrnArgs};

pub fn run(cmd: &TransformCmd, seed: u64) -> Outcome {
    match cmd {
        TransformCmd::Bias { urn, order, rising, rational } => {
            if *rational {
                bias::<Rational>(urn, *order, *rising)
            } else {
                bias::<f64>(urn, *order, *rising)
            }
        }
        TransformCmd::Equilibrium { shape, samples } => equilibrium(shape, *samples, seed),
        TransformCmd::Couple { j, l, n, beta, samples } => couple(*j, *l, *n, *beta, *samples, seed),
    }
}

fn weight<T: Scalar>(x: i64, order: u32, rising: bool) -> T {
    (0..order as i64).fold(T::one(), |acc, i| acc * T::int((if rising { x + i } else { x }) as u64))
}

fn bias<T: Scalar>(a: &UrnArgs, order: u32, rising: bool) -> Outcome {
    let base: ExactPmf<T> = UrnSpec::new(a.b, a.w, a.l, a.n)?.exact_pmf::<T>()?;
    let biased = if rising { rising_bias_pmf(&base, order)? } else { power_bias_pmf(&base, order)? };
    let norm = base.expect(|x| weight::<T>(x, order, rising));
    let proportional = base.iter().all(|(x, p)| {
        let lhs = biased.get(x) * norm.clone();
        let rhs = weight::<T>(x, order, rising) * p.clone();
        if T::EXACT {
            lhs == rhs
        } else {
            (lhs.to_f64() - rhs.to_f64()).abs() <= 1e-12 * norm.to_f64().max(1.0)
        }
    });
    Ok(Report::json(
        "biased-pmf",
        &json!({
            "b": a.b, "w": a.w, "l": a.l, "n": a.n, "order": order, "rising": rising,
            "pmf": biased.to_json(),
        }),
        vec![Check::new("proportional-to-weight", proportional, format!("normalizer {norm}"))],
    ))
}

fn equilibrium(s: &GgShape, samples: u64, seed: u64) -> Outcome {
    check_samples(samples)?;
    let rep = gg_fixed_point_check(GGParams::new(s.k, s.r)?, samples, seed)?;
    let check = Check::new(
        "inside-dkw-band",
        rep.passed(),
        format!("d_K {:.6} vs band {:.6}", rep.statistic, rep.band),
    );
    Ok(Report::json("equilibrium", &serde_json::to_value(&rep).expect("plain data"), vec![check]))
}

fn couple(j: u64, l: u64, n: u64, beta: f64, samples: u64, seed: u64) -> Outcome {
    check_samples(samples)?;
    let rep = coupling_chain(j, l, n, beta, samples, seed)?;
    // marginal of W from an independent set of streams
    let chain = CouplingChain::new(j, l, n)?;
    let audit = samples.min(200_000);
    let top = (j + n) as usize;
    let counts = blocked(
        seed,
        1 << 32,
        audit,
        |rng, count| {
            let mut c = vec![0u64; top + 1];
            for _ in 0..count {
                c[(chain.draw(rng).w as usize).min(top)] += 1;
            }
            c
        },
        vec![0u64; top + 1],
        merge_counts,
    );
    let exact = UrnSpec::new(1, j, l, n)?.exact_pmf::<f64>()?;
    let (chi, mut check) = fit_check(&histogram_pairs(&counts), &exact)?;
    check.name = "marginal-of-w".into();
    let mut value = serde_json::to_value(&rep).expect("plain data");
    value["marginal_chi_square"] = chi;
    Ok(Report::json("coupling", &value, vec![check]))
}
