//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Pass criterion numbers as arguments to run a subset.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use rayon::prelude::*;
use urnflow::laws::{excursion_height_law, IndexConvention, Statistic};
use urnflow::stats::{chi_square_gof, power_grid, statistic_rate, urn_rate};
use urnflow::stein::{
    bound_audit, equilibrium_identity_check, equilibrium_identity_gg, thm5_bound, AuditOptions,
    SteinSolution, TestFunction, AUDIT_TOLERANCE, RESIDUAL_TOLERANCE,
};
use urnflow::transforms::{gg_fixed_point_check, CouplingChain};
use urnflow::trees::{enumerate_decorated, DecoratedBinaryTree};
use urnflow::urns::mu_n;
use urnflow::{ExactPmf, GGParams, Identity, Rational, Scalar, StreamRng, UrnSpec};

type Q = Rational;
type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

const SEED: u64 = 20_240_601;

fn q(n: u64, d: u64) -> Q {
    Q::ratio(n, d)
}

fn zero() -> Q {
    q(0, 1)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: urnflow::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Law given as a map against a pmf, exactly.
fn same_law(oracle: &BTreeMap<i64, Q>, pmf: &ExactPmf<Q>) -> bool {
    let lo = oracle.keys().next().copied().unwrap_or(0).min(pmf.min_support());
    let hi = oracle.keys().last().copied().unwrap_or(0).max(pmf.max_support());
    (lo..=hi).all(|x| oracle.get(&x).cloned().unwrap_or_else(zero) == pmf.get(x))
}

fn law_from_counts(counts: &BTreeMap<i64, u64>) -> BTreeMap<i64, Q> {
    let total: u64 = counts.values().sum();
    counts.iter().map(|(&x, &c)| (x, q(c, total))).collect()
}

fn rising(x: u64, m: u32) -> Q {
    (0..m as u64).fold(q(1, 1), |acc, i| acc * q(x + i, 1))
}

// ---------- urn by path enumeration ----------

/// Law of the white count over all colored draw sequences, each weighted by
/// its path probability. A black immigrant joins after draw i when l | i.
fn brute_urn(b: u64, w: u64, l: u64, n: u64) -> BTreeMap<i64, Q> {
    fn go(black: u64, white: u64, done: u64, l: u64, n: u64, p: Q, out: &mut BTreeMap<i64, Q>) {
        if done == n {
            *out.entry(white as i64).or_insert_with(zero) += &p;
            return;
        }
        let i = done + 1;
        let imm = u64::from(i.is_multiple_of(l));
        let total = black + white;
        if white > 0 {
            go(black + imm, white + 1, i, l, n, p.clone() * q(white, total), out);
        }
        if black > 0 {
            go(black + 1 + imm, white, i, l, n, p * q(black, total), out);
        }
    }
    let mut out = BTreeMap::new();
    go(b, w, 0, l, n, q(1, 1), &mut out);
    out
}

fn urn_grid() -> Vec<(u64, u64, u64, u64)> {
    let mut g = Vec::new();
    for b in 0..=1 {
        for w in 1..=3 {
            for l in 1..=3 {
                for n in 0..=8 {
                    g.push((b, w, l, n));
                }
            }
        }
    }
    g
}

fn urn_exactness() -> Outcome {
    let grid = urn_grid();
    for &(b, w, l, n) in &grid {
        let pmf = lib(lib(UrnSpec::new(b, w, l, n))?.exact_pmf::<Q>())?;
        ensure(same_law(&brute_urn(b, w, l, n), &pmf), || {
            format!("b={b} w={w} l={l} n={n} differs from path enumeration")
        })?;
    }
    Ok(format!("{} urns with n <= 8 match path enumeration exactly", grid.len()))
}

fn rising_moments() -> Outcome {
    let grid = urn_grid();
    for &(b, w, l, n) in &grid {
        let spec = lib(UrnSpec::new(b, w, l, n))?;
        let law = brute_urn(b, w, l, n);
        for m in 1..=4 {
            let direct = law
                .iter()
                .fold(zero(), |acc, (&x, p)| acc + p.clone() * rising(x as u64, m));
            ensure(spec.rising_moment::<Q>(m) == direct, || {
                format!("b={b} w={w} l={l} n={n} m={m}")
            })?;
        }
    }
    Ok(format!("{} urns, orders 1..4, exact", grid.len()))
}

fn identities() -> Outcome {
    let mut cases = Vec::new();
    for j in 1..=3 {
        for l in 1..=3 {
            for n in l..=12 {
                cases.push(Identity::FirstPeriod { j, l, n });
                cases.push(Identity::ClassicalMixture { j, l, n });
                cases.push(Identity::PolyaRepresentation { j, l, n });
                for i in 0..=l {
                    cases.push(Identity::GreenBall { j, l, n, i });
                }
            }
            for black in 0..=1 {
                for draws in 0..=12 {
                    for shift in 1..=3 {
                        cases.push(Identity::BiasShift {
                            black,
                            white: j,
                            period: l,
                            draws,
                            shift,
                        });
                    }
                }
            }
        }
    }
    let bad: Vec<String> = cases
        .par_iter()
        .filter_map(|id| match id.discrepancy::<Q>() {
            Ok(d) if d == zero() => None,
            Ok(d) => Some(format!("{id:?}: {d}")),
            Err(e) => Some(format!("{id:?}: {e}")),
        })
        .collect();
    ensure(bad.is_empty(), || bad.join("; "))?;
    let mut names: BTreeMap<&str, usize> = BTreeMap::new();
    for id in &cases {
        *names.entry(id.name()).or_default() += 1;
    }
    Ok(format!("discrepancy 0 on all cases {names:?}"))
}

// ---------- trees ----------

#[derive(Clone)]
enum Shape {
    Leaf,
    Node(Box<Shape>, Box<Shape>),
}

fn shapes(n: usize) -> Vec<Shape> {
    if n == 1 {
        return vec![Shape::Leaf];
    }
    let mut out = Vec::new();
    for left in 1..n {
        for a in shapes(left) {
            for b in shapes(n - left) {
                out.push(Shape::Node(Box::new(a.clone()), Box::new(b)));
            }
        }
    }
    out
}

fn permutations(n: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n);
            out.push(q);
        }
    }
    out
}

/// Binary tree as parent pointers; `leaf[label - 1]` is the leaf's node.
struct PlainTree {
    parent: Vec<Option<usize>>,
    leaf: Vec<usize>,
    text: String,
}

impl PlainTree {
    fn build(shape: &Shape, labels: &[u32]) -> Self {
        fn go(s: &Shape, parent: Option<usize>, labels: &mut std::slice::Iter<u32>, t: &mut PlainTree) {
            let v = t.parent.len();
            t.parent.push(parent);
            match s {
                Shape::Leaf => {
                    let label = *labels.next().expect("one label per leaf");
                    t.leaf[label as usize - 1] = v;
                    t.text.push_str(&label.to_string());
                }
                Shape::Node(a, b) => {
                    t.text.push('(');
                    go(a, Some(v), labels, t);
                    t.text.push(' ');
                    go(b, Some(v), labels, t);
                    t.text.push(')');
                }
            }
        }
        let mut t = PlainTree {
            parent: Vec::new(),
            leaf: vec![0; labels.len()],
            text: String::new(),
        };
        go(shape, None, &mut labels.iter(), &mut t);
        t
    }

    fn ancestors(&self, mut v: usize, into: &mut BTreeSet<usize>) {
        loop {
            into.insert(v);
            match self.parent[v] {
                Some(p) => v = p,
                None => return,
            }
        }
    }
}

fn all_trees(n: usize) -> Vec<PlainTree> {
    let perms = permutations(n as u32);
    shapes(n)
        .iter()
        .flat_map(|s| perms.iter().map(move |p| PlainTree::build(s, p)))
        .collect()
}

/// Same text form for a library tree.
fn text_of(t: &DecoratedBinaryTree) -> String {
    fn go(t: &DecoratedBinaryTree, v: usize, out: &mut String) {
        match t.children(v) {
            None => out.push_str(&t.label(v).expect("leaf").to_string()),
            Some((a, b)) => {
                out.push('(');
                go(t, a, out);
                out.push(' ');
                go(t, b, out);
                out.push(')');
            }
        }
    }
    let mut s = String::new();
    go(t, t.root(), &mut s);
    s
}

fn catalan(m: u64) -> u64 {
    // C(2m, m) / (m + 1)
    let mut c: u128 = 1;
    for i in 0..m as u128 {
        c = c * (2 * m as u128 - i) / (i + 1);
    }
    (c / (m as u128 + 1)) as u64
}

fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

fn remy_uniformity() -> Outcome {
    for n in 1..=5usize {
        let count = catalan(n as u64 - 1) * factorial(n as u64);
        let expected: BTreeSet<String> = all_trees(n).into_iter().map(|t| t.text).collect();
        ensure(expected.len() as u64 == count, || {
            format!("n={n}: {} labelled trees, expected {count}", expected.len())
        })?;
        let mut prob: BTreeMap<String, Q> = BTreeMap::new();
        for (t, p) in lib(enumerate_decorated(n))? {
            *prob.entry(text_of(&t)).or_insert_with(zero) += &p;
        }
        ensure(prob.keys().cloned().collect::<BTreeSet<_>>() == expected, || {
            format!("n={n}: constructed trees differ from the labelled trees")
        })?;
        let target = q(1, count);
        ensure(prob.values().all(|p| *p == target), || {
            format!("n={n}: some probability differs from 1/{count}")
        })?;
    }
    let n = 4;
    let index: BTreeMap<String, usize> = all_trees(n)
        .into_iter()
        .enumerate()
        .map(|(i, t)| (t.text, i))
        .collect();
    let samples = 1_000_000u64;
    let mut counts = vec![0u64; index.len()];
    let mut rng = StreamRng::new(SEED, 0);
    for _ in 0..samples {
        let t = lib(DecoratedBinaryTree::remy_grow(n, &mut rng))?;
        counts[index[&text_of(&t)]] += 1;
    }
    let probs = vec![1.0 / index.len() as f64; index.len()];
    let chi = lib(chi_square_gof(&counts, &probs))?;
    ensure(chi.p_value > 0.01, || format!("n=4 chi-square p = {}", chi.p_value))?;
    Ok(format!(
        "n<=5 all C(n-1)n! trees at probability 1/(C(n-1)n!); n=4 chi-square {:.1} on {} df, p = {:.3}",
        chi.statistic, chi.df, chi.p_value
    ))
}

// ---------- embeddings ----------

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

fn spanning_leaves_law(n: usize, k: usize) -> BTreeMap<i64, Q> {
    let mut counts = BTreeMap::new();
    for t in all_trees(n) {
        for s in subsets(n, k) {
            let mut span = BTreeSet::new();
            for label in s {
                t.ancestors(t.leaf[label], &mut span);
            }
            *counts.entry(span.len() as i64).or_insert(0u64) += 1;
        }
    }
    law_from_counts(&counts)
}

fn node_path_law(n: usize) -> BTreeMap<i64, Q> {
    let mut counts = BTreeMap::new();
    for t in all_trees(n) {
        for v in 0..t.parent.len() {
            let mut path = BTreeSet::new();
            t.ancestors(v, &mut path);
            *counts.entry(path.len() as i64).or_insert(0u64) += 1;
        }
    }
    law_from_counts(&counts)
}

/// All ±1 step sequences of a length.
fn all_paths(len: usize) -> impl Iterator<Item = Vec<i64>> {
    (0u64..1 << len).map(move |mask| {
        let mut h = vec![0i64];
        for i in 0..len {
            let step = if mask >> i & 1 == 1 { 1 } else { -1 };
            h.push(h[i] + step);
        }
        h
    })
}

/// Plane trees with `n` nodes, as parent pointers, from Dyck paths.
fn plane_trees(n: usize) -> Vec<Vec<Option<usize>>> {
    let len = 2 * (n - 1);
    all_paths(len)
        .filter(|h| h.iter().all(|&x| x >= 0) && h[len] == 0)
        .map(|h| {
            let mut parent = vec![None];
            let mut at = 0;
            for i in 0..len {
                if h[i + 1] > h[i] {
                    parent.push(Some(at));
                    at = parent.len() - 1;
                } else {
                    at = parent[at].expect("down step below the root");
                }
            }
            parent
        })
        .collect()
}

fn plane_spanning_law(n: usize, k: usize) -> BTreeMap<i64, Q> {
    let mut counts = BTreeMap::new();
    for parent in plane_trees(n) {
        for s in subsets(n, k) {
            let mut span = BTreeSet::new();
            for mut v in s {
                loop {
                    span.insert(v);
                    match parent[v] {
                        Some(p) => v = p,
                        None => break,
                    }
                }
            }
            *counts.entry(span.len() as i64).or_insert(0u64) += 1;
        }
    }
    law_from_counts(&counts)
}

fn path_law(len: usize, keep: impl Fn(&[i64]) -> bool, stat: impl Fn(&[i64]) -> Vec<i64>) -> BTreeMap<i64, Q> {
    let mut counts = BTreeMap::new();
    for h in all_paths(len).filter(|h| keep(h)) {
        for v in stat(&h) {
            *counts.entry(v).or_insert(0u64) += 1;
        }
    }
    law_from_counts(&counts)
}

fn visits(h: &[i64]) -> Vec<i64> {
    vec![h.iter().filter(|&&x| x == 0).count() as i64]
}

fn positive_excursion(h: &[i64]) -> bool {
    let len = h.len() - 1;
    h[len] == 0 && h[1..len].iter().all(|&x| x > 0)
}

fn meander(h: &[i64]) -> bool {
    h[1..].iter().all(|&x| x > 0)
}

fn exact(stat: Statistic, n: u64) -> Result<ExactPmf<Q>, String> {
    lib(stat.exact_law::<Q>(n))
}

fn embeddings() -> Outcome {
    let mut notes = Vec::new();
    // exact urn laws
    for n in 1..=6usize {
        for k in 1..=n {
            let stat = Statistic::SpanningLeaves { k: k as u64 };
            ensure(same_law(&spanning_leaves_law(n, k), &exact(stat, n as u64)?), || {
                format!("spanning leaves n={n} k={k}")
            })?;
        }
    }
    for n in 1..=6usize {
        let oracle = path_law(2 * n, |h| h[2 * n] == 0, visits);
        ensure(same_law(&oracle, &exact(Statistic::BridgeLocalTime, n as u64)?), || {
            format!("bridge local time length {}", 2 * n)
        })?;
    }
    for len in 1..=12usize {
        let oracle = path_law(len, |_| true, visits);
        ensure(
            same_law(&oracle, &exact(Statistic::WalkLocalTime, len as u64 / 2)?),
            || format!("walk local time length {len}"),
        )?;
    }
    notes.push("spanning leaves, bridge and walk local times exact".to_string());
    // laws with thinning or a geometric part
    for n in 1..=6usize {
        ensure(same_law(&node_path_law(n), &exact(Statistic::NodePath, n as u64)?), || {
            format!("node path n={n}")
        })?;
        for k in 1..=n {
            let stat = Statistic::PlaneSpanning { k: k as u64 };
            ensure(same_law(&plane_spanning_law(n, k), &exact(stat, n as u64)?), || {
                format!("plane spanning n={n} k={k}")
            })?;
        }
    }
    let four = path_law(4, positive_excursion, |h| h[..4].to_vec());
    let expected: BTreeMap<i64, Q> = [(0, q(1, 4)), (1, q(1, 2)), (2, q(1, 4))].into_iter().collect();
    ensure(four == expected, || "length-4 excursion law".into())?;
    let mut stated_matches = 0;
    for n in 1..=6usize {
        let oracle = path_law(2 * n, positive_excursion, |h| h[..2 * n].to_vec());
        let shifted = lib(excursion_height_law::<Q>(n as u64, IndexConvention::Shifted))?;
        ensure(same_law(&oracle, &shifted), || format!("excursion height n={n}"))?;
        ensure(same_law(&oracle, &exact(Statistic::ExcursionHeight, n as u64)?), || {
            format!("excursion height default convention n={n}")
        })?;
        let stated = lib(excursion_height_law::<Q>(n as u64, IndexConvention::Stated))?;
        if same_law(&oracle, &stated) {
            stated_matches += 1;
        }
    }
    notes.push(format!(
        "excursion height matches N ~ F^(n-1,1)_(0,1) for 2n <= 12 (N ~ F^(n,1)_(0,1) matches {stated_matches}/6)"
    ));
    for n in 0..=5usize {
        let odd = path_law(2 * n + 1, meander, |h| vec![h[2 * n + 1]]);
        ensure(same_law(&odd, &exact(Statistic::MeanderFinalHeight, n as u64)?), || {
            format!("meander final height length {}", 2 * n + 1)
        })?;
        let even = path_law(2 * n + 2, meander, |h| vec![h[2 * n + 2]]);
        ensure(same_law(&even, &exact(Statistic::MeanderFinalHeightEven, n as u64)?), || {
            format!("meander final height length {}", 2 * n + 2)
        })?;
    }
    notes.push("node path, plane spanning, excursion height, meander final height exact".into());
    Ok(notes.join("; "))
}

// ---------- equilibrium fixed point ----------

fn fixed_point() -> Outcome {
    let m = 100_000u64;
    let band = ((2.0f64 / 0.01).ln() / (2.0 * m as f64)).sqrt();
    let mut worst = 0.0f64;
    for k in 1..=3 {
        for r in 1..=3 {
            let p = lib(GGParams::new(k as f64, r as f64))?;
            let rep = lib(gg_fixed_point_check(p, m, SEED + 10 * k + r))?;
            ensure((rep.band - band).abs() < 1e-12, || format!("band {} vs {band}", rep.band))?;
            ensure(rep.passed(), || {
                format!("GG({k},{r}): d_K {} >= band {}", rep.statistic, rep.band)
            })?;
            worst = worst.max(rep.statistic);
        }
    }
    Ok(format!("largest d_K {worst:.5} below band {band:.5} at m = 10^5"))
}

// ---------- rates ----------

/// Kolmogorov distance between `X / scale` (X ~ pmf) and a GG law, from the
/// jumps of the step function.
fn dk_steps(pmf: &ExactPmf<f64>, scale: f64, p: &GGParams) -> f64 {
    let mut cum = 0.0;
    let mut sup = 0.0f64;
    for (x, &m) in pmf.iter() {
        if m == 0.0 {
            continue;
        }
        let g = p.cdf(x as f64 / scale);
        sup = sup.max((cum - g).abs());
        cum += m;
        sup = sup.max((cum - g).abs());
    }
    sup
}

fn scale_from_moment(pmf: &ExactPmf<f64>, k: f64, r: u32) -> f64 {
    let m: f64 = pmf.iter().map(|(x, &p)| p * (x as f64).powi(r as i32)).sum();
    (r as f64 / k * m).powf(1.0 / r as f64)
}

fn urn_rates() -> Outcome {
    let grid = power_grid(5, 14);
    let mut lines = Vec::new();
    for (j, l) in [(1u64, 1u64), (2, 1), (1, 2), (1, 3)] {
        let rep = lib(urn_rate(j, l, &grid))?;
        let target = -(l as f64) / (l as f64 + 1.0);
        let (lo, hi) = lib(rep.sandwich())?;
        let p = lib(GGParams::new(j as f64, l as f64 + 1.0))?;
        for &n in &[32u64, 1024] {
            let pmf = lib(lib(UrnSpec::new(1, j, l, n))?.exact_pmf::<f64>())?;
            let mu = scale_from_moment(&pmf, j as f64, l as u32 + 1);
            let row = rep.rows.iter().find(|r| r.n == n).expect("grid row");
            ensure((row.mu_n - mu).abs() < 1e-9 * mu, || format!("mu_n at n={n}"))?;
            let d = dk_steps(&pmf, mu, &p);
            ensure((row.d_k - d).abs() < 1e-9, || {
                format!("(j,l)=({j},{l}) n={n}: d_K {} vs {d}", row.d_k)
            })?;
        }
        ensure((rep.slope - target).abs() <= 0.15, || {
            format!("(j,l)=({j},{l}): slope {:.4}, target {target:.4}", rep.slope)
        })?;
        ensure(lo > 0.0 && hi / lo < 10.0, || {
            format!("(j,l)=({j},{l}): sandwich [{lo}, {hi}]")
        })?;
        lines.push(format!("({j},{l}) slope {:.3} vs {target:.3}, max/min {:.2}", rep.slope, hi / lo));
    }
    Ok(lines.join("; "))
}

fn statistic_rates() -> Outcome {
    let grid = power_grid(5, 14);
    let mut lines = Vec::new();
    for stat in [
        Statistic::SpanningLeaves { k: 1 },
        Statistic::SpanningLeaves { k: 2 },
        Statistic::WalkLocalTime,
        Statistic::BridgeLocalTime,
    ] {
        let rep = lib(statistic_rate(stat, &grid))?;
        let limit = stat.limit();
        let law = lib(stat.exact_law::<f64>(256))?;
        let mu = scale_from_moment(&law, limit.k(), limit.r() as u32);
        let row = rep.rows.iter().find(|r| r.n == 256).expect("grid row");
        let d = dk_steps(&law, mu, &limit);
        ensure((row.d_k - d).abs() < 1e-9, || format!("{}: d_K {} vs {d}", stat.name(), row.d_k))?;
        ensure((rep.slope + 0.5).abs() <= 0.15, || {
            format!("{}: slope {:.4}", stat.name(), rep.slope)
        })?;
        lines.push(format!(
            "{} vs GG({},{}) slope {:.3}",
            stat.name(),
            limit.k(),
            limit.r(),
            rep.slope
        ));
    }
    Ok(lines.join("; "))
}

// ---------- Stein ----------

fn stein_audit() -> Outcome {
    // exponential target, indicator test: f = e^{-s}(e^x - 1) left of s, 1 - e^{-s} right of it
    let p = lib(GGParams::new(1.0, 1.0))?;
    for s in [0.3, 1.0, 2.5] {
        let sol = lib(SteinSolution::new(lib(p.potential())?, TestFunction::Indicator { s }))?;
        for i in 1..=40 {
            let x = 0.1 * i as f64;
            let f = lib(sol.f(x))?;
            let exact = if x <= s { (-s).exp() * (x.exp() - 1.0) } else { 1.0 - (-s).exp() };
            ensure((f - exact).abs() < 1e-9, || format!("exponential f at s={s} x={x}: {f} vs {exact}"))?;
        }
    }

    let pairs: Vec<(u32, u32)> = (1..=6).flat_map(|k| (1..=6).map(move |r| (k, r))).collect();
    let reports = pairs
        .par_iter()
        .map(|&(k, r)| bound_audit(k as f64, r as f64, &AuditOptions::default()).map(|a| (k, r, a)))
        .collect::<urnflow::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    let mut worst_ratio = 0.0f64;
    let mut worst_residual = 0.0f64;
    let mut families = BTreeSet::new();
    for (k, r, a) in &reports {
        worst_residual = worst_residual.max(a.max_residual);
        ensure(a.max_residual < RESIDUAL_TOLERANCE, || {
            format!("GG({k},{r}) residual {:e}", a.max_residual)
        })?;
        for fam in &a.families {
            families.insert(fam.name.clone());
            worst_ratio = worst_ratio.max(fam.max_ratio);
            ensure(fam.holds && fam.max_ratio <= 1.0 + AUDIT_TOLERANCE, || {
                format!("GG({k},{r}) {}: ratio {} at x = {}", fam.name, fam.max_ratio, fam.arg_x)
            })?;
        }
    }

    let mut worst_identity = 0.0f64;
    for &(k, r) in &pairs {
        let p = lib(GGParams::new(k as f64, r as f64))?;
        let (a, b) = lib(equilibrium_identity_gg(&p, |x| x, |_| 1.0))?;
        ensure((a - k as f64).abs() < 1e-6 && (b - k as f64).abs() < 1e-6, || {
            format!("GG({k},{r}) f(x) = x: {a}, {b}")
        })?;
        let (a, b) = lib(equilibrium_identity_gg(&p, |x| x.sin(), |x| x.cos()))?;
        ensure((a - b).abs() < 1e-6, || format!("GG({k},{r}) f = sin: {a} vs {b}"))?;
        worst_identity = worst_identity.max((a - b).abs());
    }
    for (j, l) in [(1u32, 1u32), (2, 1), (1, 2), (3, 2), (2, 3)] {
        let n = 64;
        let base = lib(lib(UrnSpec::new(1, j as u64, l as u64, n))?.exact_pmf::<f64>())?;
        let mu = lib(mu_n(j as u64, l as u64, n))?;
        let (a, b) = lib(equilibrium_identity_check(j, l + 1, &base, mu, |x| x, |_| 1.0))?;
        ensure((a - j as f64).abs() < 1e-6 && (b - j as f64).abs() < 1e-6, || {
            format!("urn (j,l)=({j},{l}) f(x) = x: {a}, {b}")
        })?;
        let (a, b) = lib(equilibrium_identity_check(
            j,
            l + 1,
            &base,
            mu,
            |x| (-x).exp() * x,
            |x| (-x).exp() * (1.0 - x),
        ))?;
        ensure((a - b).abs() < 1e-6, || format!("urn (j,l)=({j},{l}) f = x e^-x: {a} vs {b}"))?;
        worst_identity = worst_identity.max((a - b).abs());
    }

    Ok(format!(
        "36 pairs, {} families, worst ratio {worst_ratio:.9}, worst residual {worst_residual:.1e}; equilibrium identity within {worst_identity:.1e}",
        families.len()
    ))
}

fn end_to_end_bound() -> Outcome {
    let (j, l) = (1u64, 1u64);
    let p = lib(GGParams::new(j as f64, l as f64 + 1.0))?;
    let mut tightest = f64::INFINITY;
    let mut rows = Vec::new();
    for n in power_grid(5, 14) {
        let chain = lib(CouplingChain::new(j, l, n))?;
        let pmf = lib(lib(UrnSpec::new(1, j, l, n))?.exact_pmf::<f64>())?;
        let mu = scale_from_moment(&pmf, j as f64, l as u32 + 1);
        ensure((chain.mu() - mu).abs() < 1e-9 * mu, || format!("mu_n at n={n}"))?;
        let beta = (2 * j + 2 * l + 5) as f64 / mu;
        let exc = lib(chain.exceedance(beta, 100_000, SEED + n))?;
        let ew: f64 = pmf.iter().map(|(x, &m)| m * x as f64 / mu).sum();
        let bound = lib(thm5_bound(j as f64, l as f64 + 1.0, beta, ew, exc.exceedance))?;
        let d = dk_steps(&pmf, mu, &p);
        ensure(bound >= d, || format!("n={n}: bound {bound} < d_K {d}"))?;
        tightest = tightest.min(bound / d);
        rows.push(format!("n={n} beta={beta:.3} bound={bound:.3} d_K={d:.4}"));
    }
    Ok(format!(
        "bound >= d_K at all 10 n, smallest bound/d_K {tightest:.1} ({} .. {})",
        rows[0],
        rows[rows.len() - 1]
    ))
}

// ---------- CLI determinism ----------

fn scratch(tag: &str) -> PathBuf {
    std::env::temp_dir().join(format!("urnflow-acceptance-{}-{tag}", std::process::id()))
}

struct Run {
    stdout: Vec<u8>,
    files: BTreeMap<String, Vec<u8>>,
}

fn run_cli(args: &[&str], out: Option<&Path>, threads: Option<&str>) -> Result<Run, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_urnflow"));
    cmd.args(args);
    if let Some(dir) = out {
        let _ = std::fs::remove_dir_all(dir);
        cmd.arg("--out").arg(dir);
    }
    match threads {
        Some(t) => cmd.env("URNFLOW_THREADS", t),
        None => cmd.env_remove("URNFLOW_THREADS"),
    };
    let o = cmd.output().map_err(|e| format!("spawn: {e}"))?;
    if !o.status.success() {
        return Err(format!(
            "{args:?} exited with {}: {}",
            o.status,
            String::from_utf8_lossy(&o.stderr)
        ));
    }
    let mut files = BTreeMap::new();
    if let Some(dir) = out {
        for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            let mut bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
            if name == "manifest.json" {
                let mut v: serde_json::Value = serde_json::from_slice(&bytes).map_err(|e| e.to_string())?;
                v.as_object_mut().ok_or("manifest is not an object")?.remove("durations_ms");
                bytes = serde_json::to_vec(&v).map_err(|e| e.to_string())?;
            }
            files.insert(name, bytes);
        }
        let _ = std::fs::remove_dir_all(dir);
    }
    Ok(Run {
        stdout: o.stdout,
        files,
    })
}

fn determinism() -> Outcome {
    let runs: &[&[&str]] = &[
        &["urn", "pmf", "--b", "1", "--w", "2", "--l", "2", "--n", "20", "--rational"],
        &["urn", "sample", "--b", "1", "--w", "1", "--l", "2", "--n", "300", "--samples", "40000"],
        &["gg", "sample", "--k", "2", "--r", "3", "--samples", "5000", "--values"],
        &["tree", "grow", "--n", "9"],
        &["tree", "stat", "--stat", "plane-spanning", "--n", "40", "--k", "2", "--samples", "20000"],
        &["walk", "map", "--class", "meander", "--n", "7"],
        &["walk", "stat", "--stat", "excursion-height", "--n", "30", "--samples", "20000"],
        &["transform", "equilibrium", "--k", "2", "--r", "2", "--samples", "20000"],
        &["transform", "couple", "--j", "1", "--l", "1", "--n", "256", "--samples", "20000"],
        &["stein", "solve", "--k", "2", "--r", "2", "--test", "ramp", "--s", "1", "--eps", "0.2", "--points", "200"],
        &["stein", "bound", "--j", "1", "--l", "1", "--n", "128", "--samples", "20000"],
        &["rate", "--j", "1", "--l", "2", "--nmin", "32", "--nmax", "4096"],
        &["identity", "--name", "lemma4.10", "--j", "2", "--l", "2", "--n", "10"],
    ];
    let dir = scratch("out");
    let mut artifacts = 0;
    for args in runs {
        let mut full: Vec<&str> = vec!["--seed", "7"];
        full.extend_from_slice(args);
        let a = run_cli(&full, Some(&dir), None)?;
        let b = run_cli(&full, Some(&dir), None)?;
        ensure(a.stdout == b.stdout, || format!("{args:?}: stdout differs"))?;
        ensure(a.files.len() >= 2, || format!("{args:?}: expected an artifact and a manifest"))?;
        ensure(a.files == b.files, || format!("{args:?}: artifacts differ"))?;
        artifacts += a.files.len();
    }
    for args in [&runs[1], &runs[8]] {
        let mut full: Vec<&str> = vec!["--seed", "7"];
        full.extend_from_slice(args);
        let one = run_cli(&full, None, Some("1"))?;
        let four = run_cli(&full, None, Some("4"))?;
        ensure(one.stdout == four.stdout, || format!("{args:?}: output depends on thread count"))?;
    }
    Ok(format!(
        "{} commands repeated, stdout and {artifacts} files identical; sampling output equal at 1 and 4 threads",
        runs.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        (1, "urn engine exactness", urn_exactness),
        (2, "rising factorial moments", rising_moments),
        (3, "urn identities", identities),
        (4, "Remy uniformity", remy_uniformity),
        (5, "tree and path embeddings", embeddings),
        (6, "equilibrium fixed point", fixed_point),
        (7, "urn rates", urn_rates),
        (8, "statistic rates", statistic_rates),
        (9, "Stein audit", stein_audit),
        (10, "end-to-end Kolmogorov bound", end_to_end_bound),
        (11, "CLI determinism", determinism),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (id, name, check) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id} ({name}): PASS [{secs:.1} s] {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id} ({name}): FAIL [{secs:.1} s] {detail}");
            }
        }
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
