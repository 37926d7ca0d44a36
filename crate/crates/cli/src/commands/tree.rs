use serde_json::json;
use urnflow::laws::Statistic;
use urnflow::trees::{binary_to_plane, catalan, enumerate_decorated, plane_to_binary, tree_stat_dist, DecoratedBinaryTree, TreeStatistic};
use urnflow::walks::{excursion_to_shape, tree_to_bridge, tree_to_excursion};
use urnflow::{Rational, Scalar, StreamRng};

use super::{check_samples, counts_json, fit_check, Check, Failure, Outcome, Report};
use crate::args::{TreeCmd, TreeStatName};

pub fn run(cmd: &TreeCmd, seed: u64) -> Outcome {
    match cmd {
        TreeCmd::Grow { n } => grow(*n, seed),
        TreeCmd::Enumerate { n } => enumerate(*n),
        TreeCmd::Stat { stat, n, k, samples } => stat_law(*stat, *n, *k, *samples, seed),
    }
}

fn grow(n: usize, seed: u64) -> Outcome {
    let t = DecoratedBinaryTree::remy_grow(n, &mut StreamRng::new(seed, 0))?;
    let plane = binary_to_plane(&t);
    let excursion = tree_to_excursion(&t);
    let bridge = tree_to_bridge(&t);
    let checks = vec![
        Check::new("leaf-count", t.leaf_count() == n, format!("{}", t.leaf_count())),
        Check::new("plane-roundtrip", plane_to_binary(&plane)? == t, plane.to_string()),
        Check::new(
            "excursion-roundtrip",
            excursion.is_excursion() && excursion_to_shape(&excursion)?.shape() == t.shape(),
            excursion.to_string(),
        ),
        Check::new("bridge", bridge.is_bridge() && bridge.len() == 2 * (n - 1), bridge.to_string()),
    ];
    Ok(Report::json(
        "tree",
        &json!({
            "n": n,
            "tree": t.to_string(),
            "shape": t.shape(),
            "plane": plane.to_string(),
            "excursion": excursion.to_string(),
            "bridge": bridge.to_string(),
        }),
        checks,
    ))
}

fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

fn enumerate(n: usize) -> Outcome {
    let all = enumerate_decorated(n)?;
    let count = catalan(n as u64 - 1) * factorial(n as u64);
    let each = Rational::ratio(1, count);
    let uniform = all.iter().all(|(_, p)| *p == each);
    let trees: Vec<_> = all
        .iter()
        .map(|(t, p)| json!({"tree": t.to_string(), "probability": p.to_json()}))
        .collect();
    Ok(Report::json(
        "trees",
        &json!({"n": n, "count": all.len(), "trees": trees}),
        vec![
            Check::new("count", all.len() as u64 == count, format!("{} of {count}", all.len())),
            Check::new("uniform", uniform, format!("each 1/{count}")),
        ],
    ))
}

fn stat_law(name: TreeStatName, n: usize, k: usize, samples: u64, seed: u64) -> Outcome {
    check_samples(samples)?;
    let (stat, law) = match name {
        TreeStatName::SpanningLeaves => (TreeStatistic::SpanningLeaves { k }, Statistic::SpanningLeaves { k: k as u64 }),
        TreeStatName::NodePath => (TreeStatistic::NodePath, Statistic::NodePath),
        TreeStatName::PlaneSpanning => (TreeStatistic::PlaneSpanning { k }, Statistic::PlaneSpanning { k: k as u64 }),
    };
    if n == 0 {
        return Err(Failure::Invalid("n must be positive".into()));
    }
    let emp = tree_stat_dist(stat, n, samples, seed)?;
    let pairs: Vec<(i64, u64)> = emp
        .iter()
        .filter(|(_, m)| **m > 0.0)
        .map(|(x, m)| (x, (m * samples as f64).round() as u64))
        .collect();
    let exact = law.exact_law::<f64>(n as u64)?;
    let (chi, check) = fit_check(&pairs, &exact)?;
    Ok(Report::json(
        "tree-stat",
        &json!({
            "statistic": law.name(), "n": n, "samples": samples,
            "counts": counts_json(&pairs),
            "exact": exact.to_json(),
            "chi_square": chi,
        }),
        vec![check],
    ))
}
