use std::fmt::Write as _;

use serde_json::json;
use urnflow::stats::dk_discrete_vs_gg;
use urnflow::stein::{bound_audit, thm5_bound, AuditOptions, SteinSolution, TestFunction, RESIDUAL_TOLERANCE};
use urnflow::transforms::CouplingChain;
use urnflow::{GGParams, UrnSpec};

use super::{check_samples, Check, Failure, Outcome, Report};
use crate::args::{GgShape, SteinCmd, TestKind};

pub fn run(cmd: &SteinCmd, seed: u64) -> Outcome {
    match cmd {
        SteinCmd::Solve { shape, test, s, eps, points, xmax } => solve(shape, *test, *s, *eps, *points, *xmax),
        SteinCmd::Audit { k, r, max, thresholds, grid } => audit(*k, *r, *max, *thresholds, *grid),
        SteinCmd::Bound { k, r, beta, ew, exceedance, j, l, n, samples } => match n {
            Some(n) => measured_bound(*j, *l, *n, *beta, *samples, seed),
            None => {
                let beta = beta.ok_or_else(|| Failure::Invalid("--beta is required without --n".into()))?;
                formula_bound(*k, *r, beta, *ew, *exceedance)
            }
        },
    }
}

fn solve(shape: &GgShape, kind: TestKind, s: f64, eps: f64, points: usize, xmax: f64) -> Outcome {
    if points == 0 || !(xmax > 0.0 && xmax.is_finite()) {
        return Err(Failure::Invalid("need points > 0 and a finite xmax > 0".into()));
    }
    let pot = GGParams::new(shape.k, shape.r)?.potential()?;
    let h = match kind {
        TestKind::Indicator => TestFunction::Indicator { s },
        TestKind::Ramp => TestFunction::Ramp { s, eps },
        TestKind::Tent => TestFunction::Tent { s, eps },
    };
    let sol = SteinSolution::new(pot, h)?;
    let grid: Vec<f64> = (1..=points).map(|i| xmax * i as f64 / points as f64).collect();
    let f = sol.f_grid(&grid)?;
    let mut body = String::from("x,f,f_prime,g,residual\n");
    let mut worst = 0.0f64;
    for (&x, &fx) in grid.iter().zip(&f) {
        let res = if sol.smooth_at(x) { sol.residual_given(x, fx).ok() } else { None };
        if let Some(r) = res {
            worst = worst.max(r);
        }
        let res = res.map(|r| format!("{r:e}")).unwrap_or_default();
        let _ = writeln!(body, "{x},{fx},{},{},{res}", sol.f_prime(x, fx), sol.g(x, fx));
    }
    let check = Check::new("residual", worst < RESIDUAL_TOLERANCE, format!("max {worst:e}"));
    Ok(Report::csv("stein-solution", body, vec![check]))
}

fn audit(k: Option<f64>, r: Option<f64>, max: u32, thresholds: usize, grid: usize) -> Outcome {
    let opts = AuditOptions {
        thresholds,
        grid_points: grid,
        ..AuditOptions::default()
    };
    let pairs: Vec<(f64, f64)> = match (k, r) {
        (Some(k), Some(r)) => vec![(k, r)],
        (None, None) => (1..=max).flat_map(|k| (1..=max).map(move |r| (k as f64, r as f64))).collect(),
        _ => return Err(Failure::Invalid("give both --k and --r, or neither".into())),
    };
    let mut reports = Vec::new();
    let mut checks = Vec::new();
    for (k, r) in pairs {
        let rep = bound_audit(k, r, &opts)?;
        let worst = rep.families.iter().map(|f| f.max_ratio).fold(0.0, f64::max);
        checks.push(Check::new(
            &format!("audit k={k} r={r}"),
            rep.passed(),
            format!("max ratio {worst:.9}, residual {:e}", rep.max_residual),
        ));
        reports.push(rep.to_json());
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(Report::json("audit", &json!({"passed": passed, "reports": reports}), checks))
}

fn formula_bound(k: f64, r: f64, beta: f64, ew: f64, exceedance: f64) -> Outcome {
    let b = thm5_bound(k, r, beta, ew, exceedance)?;
    Ok(Report::json(
        "bound",
        &json!({"k": k, "r": r, "beta": beta, "ew_r_minus_1": ew, "exceedance": exceedance, "bound": b}),
        vec![Check::new("finite-positive", b.is_finite() && b > 0.0, format!("{b}"))],
    ))
}

fn measured_bound(j: u64, l: u64, n: u64, beta: Option<f64>, samples: u64, seed: u64) -> Outcome {
    check_samples(samples)?;
    let chain = CouplingChain::new(j, l, n)?;
    let mu = chain.mu();
    let beta = beta.unwrap_or((2 * j + 2 * l + 5) as f64 / mu);
    let (k, r) = (j as f64, (l + 1) as f64);
    let rep = chain.exceedance(beta, samples, seed)?;
    let pmf = UrnSpec::new(1, j, l, n)?.exact_pmf::<f64>()?;
    let ew: f64 = pmf.iter().map(|(x, p)| p * (x as f64 / mu).powf(r - 1.0)).sum();
    let d_k = dk_discrete_vs_gg(&pmf, mu, &GGParams::new(k, r)?)?;
    let b = thm5_bound(k, r, beta, ew, rep.exceedance)?;
    Ok(Report::json(
        "bound",
        &json!({
            "j": j, "l": l, "n": n, "mu_n": mu, "beta": beta,
            "ew_r_minus_1": ew, "exceedance": rep.exceedance, "exceedance_stderr": rep.stderr,
            "samples": samples, "bound": b, "exact_d_k": d_k,
        }),
        vec![Check::new("bound-covers-exact", b >= d_k, format!("bound {b:.6} vs d_K {d_k:.6}"))],
    ))
}
