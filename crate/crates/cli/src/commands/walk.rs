use serde_json::json;
use urnflow::laws::Statistic;
use urnflow::rng::blocked;
use urnflow::trees::{DecoratedBinaryTree, TreePair};
use urnflow::walks::{bridge_to_meander, enumerate_paths, tree_to_bridge, tree_to_excursion, trees_to_walk, LatticePath, PathClass};
use urnflow::StreamRng;

use super::{check_samples, counts_json, fit_check, histogram_pairs, merge_counts, Check, Failure, Outcome, Report};
use crate::args::{ClassName, WalkCmd, WalkStatName};

pub fn run(cmd: &WalkCmd, seed: u64) -> Outcome {
    match cmd {
        WalkCmd::Map { class, tree, n } => map(*class, tree.as_deref(), *n, seed),
        WalkCmd::Enumerate { class, len } => enumerate(*class, *len),
        WalkCmd::Stat { stat, n, samples } => stat_law(*stat, *n, *samples, seed),
    }
}

fn class_of(c: ClassName) -> PathClass {
    match c {
        ClassName::Walk => PathClass::Walk,
        ClassName::Bridge => PathClass::Bridge,
        ClassName::Excursion => PathClass::Excursion,
        ClassName::Meander => PathClass::Meander,
    }
}

fn map(class: ClassName, tree: Option<&str>, n: usize, seed: u64) -> Outcome {
    let mut rng = StreamRng::new(seed, 0);
    let (source, path) = if class == ClassName::Walk {
        if tree.is_some() {
            return Err(Failure::Invalid("walks come from a grown tree pair; drop --tree".into()));
        }
        let pair = TreePair::grow(n, &mut rng)?;
        let src = json!({"first": pair.first.to_string(), "second": pair.second.to_string(), "positive": pair.positive});
        (src, trees_to_walk(&pair)?)
    } else {
        let t: DecoratedBinaryTree = match tree {
            Some(s) => s.parse()?,
            None => DecoratedBinaryTree::remy_grow(n, &mut rng)?,
        };
        let path = match class {
            ClassName::Excursion => tree_to_excursion(&t),
            ClassName::Bridge => tree_to_bridge(&t),
            _ => bridge_to_meander(&tree_to_bridge(&t))?,
        };
        (json!(t.to_string()), path)
    };
    let target = class_of(class);
    Ok(Report::json(
        "path",
        &json!({
            "class": format!("{target:?}").to_lowercase(),
            "source": source,
            "path": path.to_string(),
            "length": path.len(),
            "origin_visits": path.origin_visits(),
            "final_height": path.final_height(),
        }),
        vec![Check::new("class", path.is(target), format!("{:?}", path.classify()))],
    ))
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

fn expected_count(class: PathClass, len: usize) -> u64 {
    let len = len as u64;
    match class {
        PathClass::Walk => 1 << len,
        PathClass::Bridge if len.is_multiple_of(2) => binomial(len, len / 2),
        PathClass::Excursion if len >= 2 && len.is_multiple_of(2) => urnflow::trees::catalan(len / 2 - 1),
        PathClass::Meander if len >= 1 => binomial(len - 1, (len - 1) / 2),
        _ => 0,
    }
}

fn enumerate(class: ClassName, len: usize) -> Outcome {
    let c = class_of(class);
    let all = enumerate_paths(c, len)?;
    let want = expected_count(c, len);
    let paths: Vec<String> = all.iter().map(|p| p.to_string()).collect();
    Ok(Report::json(
        "paths",
        &json!({"class": format!("{c:?}").to_lowercase(), "len": len, "count": all.len(), "paths": paths}),
        vec![Check::new("count", all.len() as u64 == want, format!("{} of {want}", all.len()))],
    ))
}

fn law_of(s: WalkStatName) -> Statistic {
    match s {
        WalkStatName::ExcursionHeight => Statistic::ExcursionHeight,
        WalkStatName::BridgeLocalTime => Statistic::BridgeLocalTime,
        WalkStatName::MeanderFinalHeight => Statistic::MeanderFinalHeight,
        WalkStatName::MeanderFinalHeightEven => Statistic::MeanderFinalHeightEven,
        WalkStatName::WalkLocalTime => Statistic::WalkLocalTime,
    }
}

/// One draw of the statistic from the tree bijections.
fn draw(s: WalkStatName, n: usize, rng: &mut StreamRng) -> urnflow::Result<i64> {
    Ok(match s {
        WalkStatName::ExcursionHeight => {
            let e = tree_to_excursion(&DecoratedBinaryTree::remy_grow(n, rng)?);
            let t = rng.below(2 * n as u64) as usize;
            e.height_at(t)?
        }
        WalkStatName::BridgeLocalTime => tree_to_bridge(&DecoratedBinaryTree::remy_grow(n + 1, rng)?).origin_visits() as i64,
        WalkStatName::MeanderFinalHeight => {
            bridge_to_meander(&tree_to_bridge(&DecoratedBinaryTree::remy_grow(n + 1, rng)?))?.final_height()
        }
        WalkStatName::MeanderFinalHeightEven => loop {
            // a uniform extra step, kept when the path stays a meander
            let m = bridge_to_meander(&tree_to_bridge(&DecoratedBinaryTree::remy_grow(n + 1, rng)?))?;
            let mut steps = m.steps().to_vec();
            steps.push(if rng.coin() { 1 } else { -1 });
            let longer = LatticePath::new(steps)?;
            if longer.is_meander() {
                break longer.final_height();
            }
        },
        WalkStatName::WalkLocalTime => trees_to_walk(&TreePair::grow(n, rng)?)?.origin_visits() as i64,
    })
}

fn stat_law(s: WalkStatName, n: u64, samples: u64, seed: u64) -> Outcome {
    check_samples(samples)?;
    let law = law_of(s);
    let exact = law.exact_law::<f64>(n)?;
    let n = n as usize;
    // validate once so workers cannot fail
    draw(s, n, &mut StreamRng::new(seed, u64::MAX))?;
    let top = exact.max_support().max(0) as usize + 1;
    let counts = blocked(
        seed,
        0,
        samples,
        |rng, count| {
            let mut c = vec![0u64; top + 1];
            for _ in 0..count {
                let v = draw(s, n, rng).expect("parameters validated");
                c[(v.max(0) as usize).min(top)] += 1;
            }
            c
        },
        vec![0u64; top + 1],
        merge_counts,
    );
    let pairs = histogram_pairs(&counts);
    let (chi, check) = fit_check(&pairs, &exact)?;
    Ok(Report::json(
        "walk-stat",
        &json!({
            "statistic": law.name(), "n": n, "samples": samples,
            "counts": counts_json(&pairs),
            "exact": exact.to_json(),
            "chi_square": chi,
        }),
        vec![check],
    ))
}
