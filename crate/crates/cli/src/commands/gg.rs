use std::fmt::Write as _;

use serde_json::json;
use urnflow::quad::{integrate, integrate_to_inf, QuadOptions};
use urnflow::rng::blocked;
use urnflow::stats::dk_empirical;
use urnflow::GGParams;

use super::{check_samples, Check, Failure, Outcome, Report};
use crate::args::{GgCmd, GgShape};

pub fn run(cmd: &GgCmd, seed: u64) -> Outcome {
    match cmd {
        GgCmd::Pdf { shape, x } => pdf(shape, x),
        GgCmd::Cdf { shape, x } => cdf(shape, x),
        GgCmd::Moment { shape, order } => moment(shape, *order),
        GgCmd::Sample { shape, samples, values } => sample(shape, *samples, *values, seed),
    }
}

fn params(s: &GgShape) -> Result<GGParams, Failure> {
    Ok(GGParams::new(s.k, s.r)?)
}

fn density(p: &GGParams, x: f64) -> f64 {
    if x > 0.0 {
        p.density(x).unwrap_or(0.0)
    } else {
        0.0
    }
}

fn pdf(s: &GgShape, xs: &[f64]) -> Outcome {
    let p = params(s)?;
    let mut body = String::from("x,pdf\n");
    for &x in xs {
        let _ = writeln!(body, "{x},{}", density(&p, x));
    }
    let total = integrate_to_inf(|x| density(&p, x), 0.0, &QuadOptions::default())?;
    let check = Check::new("integrates-to-one", (total - 1.0).abs() < 1e-9, format!("{total}"));
    Ok(Report::csv("pdf", body, vec![check]))
}

fn cdf(s: &GgShape, xs: &[f64]) -> Outcome {
    let p = params(s)?;
    let mut body = String::from("x,cdf\n");
    let mut worst = 0.0f64;
    for &x in xs {
        let c = p.cdf(x);
        let _ = writeln!(body, "{x},{c}");
        if x > 0.0 {
            let direct = integrate(|t| density(&p, t), 0.0, x, &QuadOptions::default())?;
            worst = worst.max((direct - c).abs());
        }
    }
    let check = Check::new("matches-integrated-density", worst < 1e-9, format!("max error {worst:e}"));
    Ok(Report::csv("cdf", body, vec![check]))
}

fn moment(s: &GgShape, order: f64) -> Outcome {
    let p = params(s)?;
    let m = p.moment(order)?;
    let direct = integrate_to_inf(|x| x.powf(order) * density(&p, x), 0.0, &QuadOptions::default())?;
    let passed = (m - direct).abs() <= 1e-8 * m.abs().max(1.0);
    Ok(Report::json(
        "moment",
        &json!({"k": s.k, "r": s.r, "order": order, "moment": m}),
        vec![Check::new("matches-quadrature", passed, format!("quadrature {direct}"))],
    ))
}

fn sample(s: &GgShape, samples: u64, values: bool, seed: u64) -> Outcome {
    check_samples(samples)?;
    let p = params(s)?;
    let draws = blocked(
        seed,
        0,
        samples,
        |rng, count| (0..count).map(|_| p.sample(rng)).collect::<Vec<f64>>(),
        Vec::with_capacity(samples as usize),
        |mut a, b| {
            a.extend(b);
            a
        },
    );
    let (stat, band) = dk_empirical(&draws, &p, 0.01)?;
    let check = Check::new("inside-dkw-band", stat < band, format!("d_K {stat:.6} vs band {band:.6}"));
    if values {
        let mut body = String::from("value\n");
        for v in &draws {
            let _ = writeln!(body, "{v}");
        }
        return Ok(Report::csv("samples", body, vec![check]));
    }
    let mean = draws.iter().sum::<f64>() / samples as f64;
    Ok(Report::json(
        "sample",
        &json!({
            "k": s.k, "r": s.r, "samples": samples,
            "mean": mean, "exact_mean": p.moment(1.0)?,
            "d_k": stat, "dkw_band_99": band,
        }),
        vec![check],
    ))
}
