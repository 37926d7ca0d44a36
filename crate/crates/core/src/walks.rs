//! Simple ±1 lattice paths and their encodings by decorated binary trees.
//!
//! A binary tree with `n` leaves is an excursion of length `2n`; a tree with
//! `n + 1` leaves and a marked spine is a bridge of length `2n`; bridges map
//! to meanders one step longer; a jointly grown pair of trees gives an
//! unconditioned walk of odd length.

use std::fmt;
use std::str::FromStr;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::trees::{DecoratedBinaryTree, TreePair};

/// Longest path accepted by [`enumerate_paths`].
pub const PATH_ENUMERATION_LIMIT: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PathClass {
    Walk,
    Bridge,
    Excursion,
    Meander,
}

impl FromStr for PathClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "walk" => Ok(PathClass::Walk),
            "bridge" => Ok(PathClass::Bridge),
            "excursion" => Ok(PathClass::Excursion),
            "meander" => Ok(PathClass::Meander),
            _ => Err(Error::Parse(format!("unknown path class `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticePath {
    steps: Vec<i8>,
}

impl LatticePath {
    pub fn new(steps: Vec<i8>) -> Result<Self> {
        if steps.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::Domain("steps must be +1 or -1".into()));
        }
        Ok(Self { steps })
    }

    pub fn steps(&self) -> &[i8] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `S(0), ..., S(n)`.
    pub fn heights(&self) -> Vec<i64> {
        let mut h = Vec::with_capacity(self.steps.len() + 1);
        let mut s = 0i64;
        h.push(0);
        for &x in &self.steps {
            s += x as i64;
            h.push(s);
        }
        h
    }

    pub fn height_at(&self, k: usize) -> Result<i64> {
        if k > self.steps.len() {
            return Err(Error::param("k", format!("time {k} beyond length {}", self.len())));
        }
        Ok(self.steps[..k].iter().map(|&x| x as i64).sum())
    }

    pub fn final_height(&self) -> i64 {
        self.steps.iter().map(|&x| x as i64).sum()
    }

    /// Number of times `i` in `0..=n` with `S(i) = 0`.
    pub fn origin_visits(&self) -> usize {
        self.heights().iter().filter(|h| **h == 0).count()
    }

    pub fn is_bridge(&self) -> bool {
        self.final_height() == 0
    }

    pub fn is_excursion(&self) -> bool {
        let h = self.heights();
        !self.is_empty() && h[h.len() - 1] == 0 && h[1..h.len() - 1].iter().all(|&x| x > 0)
    }

    pub fn is_meander(&self) -> bool {
        !self.is_empty() && self.heights()[1..].iter().all(|&x| x > 0)
    }

    pub fn is(&self, class: PathClass) -> bool {
        match class {
            PathClass::Walk => true,
            PathClass::Bridge => self.is_bridge(),
            PathClass::Excursion => self.is_excursion(),
            PathClass::Meander => self.is_meander(),
        }
    }

    /// The most specific class the path belongs to.
    pub fn classify(&self) -> PathClass {
        if self.is_excursion() {
            PathClass::Excursion
        } else if self.is_bridge() {
            PathClass::Bridge
        } else if self.is_meander() {
            PathClass::Meander
        } else {
            PathClass::Walk
        }
    }

    pub fn negated(&self) -> Self {
        Self {
            steps: self.steps.iter().map(|s| -s).collect(),
        }
    }

    pub fn truncated(&self, len: usize) -> Self {
        Self {
            steps: self.steps[..len.min(self.len())].to_vec(),
        }
    }

    pub fn to_json(&self) -> Value {
        Value::from(self.steps.iter().map(|&s| s as i64).collect::<Vec<_>>())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let steps: Vec<i8> = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(steps)
    }
}

impl fmt::Display for LatticePath {
    /// `U` for an up step, `D` for a down step.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.steps.iter().map(|&x| if x > 0 { 'U' } else { 'D' }).collect();
        f.write_str(&s)
    }
}

impl FromStr for LatticePath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                'U' => Ok(1),
                'D' => Ok(-1),
                _ => Err(Error::Parse(format!("unexpected `{c}` in path"))),
            })
            .collect::<Result<Vec<i8>>>()
            .map(|steps| Self { steps })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PathStats {
    pub origin_visits: usize,
    pub final_height: i64,
}

pub fn path_stats(p: &LatticePath) -> PathStats {
    PathStats {
        origin_visits: p.origin_visits(),
        final_height: p.final_height(),
    }
}

/// `+1`, the depth-first contour of the tree, then `-1`.
pub fn tree_to_excursion(t: &DecoratedBinaryTree) -> LatticePath {
    let mut steps = Vec::with_capacity(2 * t.leaf_count());
    steps.push(1);
    steps.extend(t.contour_steps());
    steps.push(-1);
    LatticePath { steps }
}

/// Inverse of [`tree_to_excursion`] up to labels; leaves are numbered
/// `1..=n` in depth-first order.
pub fn excursion_to_shape(p: &LatticePath) -> Result<DecoratedBinaryTree> {
    if !p.is_excursion() {
        return Err(Error::Domain("path is not an excursion".into()));
    }
    DecoratedBinaryTree::from_contour(&p.steps[1..p.len() - 1], |i| i as u32 + 1)
}

/// Pairs of time points of the excursion of `t` matched through the
/// leaf pairing. Time 0 is the ground and time `i >= 1` is the `i`-th node
/// in preorder; each pair is `(leaf time, partner time)`.
pub fn excursion_time_pairs(t: &DecoratedBinaryTree) -> Vec<(usize, usize)> {
    use crate::trees::Partner;
    let order = t.preorder();
    let mut time = vec![0usize; order.len()];
    for (i, &v) in order.iter().enumerate() {
        time[v] = i + 1;
    }
    t.pair_leaves()
        .into_iter()
        .map(|(lab, partner)| {
            let leaf = t.leaf_node(lab).expect("label from the tree");
            let other = match partner {
                Partner::Ground => 0,
                Partner::Internal(v) => time[v],
            };
            (time[leaf], other)
        })
        .collect()
}

/// Spine decomposition: the path from the smallest-labelled leaf up to the
/// root. Each off-spine subtree, from the root down, becomes one excursion,
/// upward if it hangs to the left of the spine and, explored mirror-wise,
/// downward if it hangs to the right.
pub fn tree_to_bridge(t: &DecoratedBinaryTree) -> LatticePath {
    let spine_leaf = t
        .labels()
        .next()
        .and_then(|l| t.leaf_node(l).ok())
        .expect("trees have a leaf");
    let mut spine = vec![spine_leaf];
    while let Some(p) = t.parent(*spine.last().expect("nonempty")) {
        spine.push(p);
    }
    let mut steps = Vec::with_capacity(2 * t.leaf_count());
    for w in spine.windows(2).rev() {
        let (child, node) = (w[0], w[1]);
        let (l, r) = t.children(node).expect("spine nodes above the leaf are internal");
        if r == child {
            let e = tree_to_excursion(&t.subtree(l));
            steps.extend(e.steps);
        } else {
            let e = tree_to_excursion(&t.subtree(r).mirrored());
            steps.extend(e.steps.iter().map(|s| -s));
        }
    }
    LatticePath { steps }
}

/// Starts with an up step, then follows `|b|`, flipping the last step of
/// every negative excursion of `b` so the path keeps rising.
pub fn bridge_to_meander(b: &LatticePath) -> Result<LatticePath> {
    if !b.is_bridge() {
        return Err(Error::Domain("path is not a bridge".into()));
    }
    let mut steps = Vec::with_capacity(b.len() + 1);
    steps.push(1);
    let mut h = 0i64;
    for &s in &b.steps {
        let next = h + s as i64;
        let up = next.abs() > h.abs();
        let step = if up || (next == 0 && h < 0) { 1 } else { -1 };
        steps.push(step);
        h = next;
    }
    Ok(LatticePath { steps })
}

/// Bridge from the first tree followed by the meander of the second tree's
/// bridge, negated when the sign is negative.
pub fn trees_to_walk(pair: &TreePair) -> Result<LatticePath> {
    let mut steps = tree_to_bridge(&pair.first).steps;
    let meander = bridge_to_meander(&tree_to_bridge(&pair.second))?;
    let tail = if pair.positive { meander } else { meander.negated() };
    steps.extend(tail.steps);
    Ok(LatticePath { steps })
}

/// All paths of the given length in the class, in lexicographic order of
/// steps with `D < U`.
pub fn enumerate_paths(class: PathClass, len: usize) -> Result<Vec<LatticePath>> {
    if len > PATH_ENUMERATION_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "path enumeration is capped at length {PATH_ENUMERATION_LIMIT}"
        )));
    }
    Ok((0u32..1 << len)
        .map(|bits| LatticePath {
            steps: (0..len)
                .map(|i| if bits >> (len - 1 - i) & 1 == 1 { 1 } else { -1 })
                .collect(),
        })
        .filter(|p| p.is(class))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::{catalan, enumerate_decorated, PAIR_MARKER};
    use std::collections::{HashMap, HashSet};

    fn path(s: &str) -> LatticePath {
        s.parse().unwrap()
    }

    #[test]
    fn classification_and_stats() {
        assert_eq!(path("UD").classify(), PathClass::Excursion);
        assert_eq!(path("DU").classify(), PathClass::Bridge);
        assert_eq!(path("UUD").classify(), PathClass::Meander);
        assert_eq!(path("DDU").classify(), PathClass::Walk);
        assert_eq!(path("").classify(), PathClass::Bridge);
        assert_eq!(path_stats(&path("UD")).origin_visits, 2);
        assert_eq!(path_stats(&path("DU")).origin_visits, 2);
        assert_eq!(path("UD").height_at(0).unwrap(), 0);
        assert_eq!(path("UD").height_at(1).unwrap(), 1);
        assert!(path("UD").height_at(3).is_err());
        assert!(LatticePath::new(vec![1, 0]).is_err());
        assert_eq!(path("UUDD").to_json().to_string(), "[1,1,-1,-1]");
        assert_eq!(LatticePath::from_json("[1,-1]").unwrap(), path("UD"));
        assert_eq!(path("UDDU").to_string(), "UDDU");
    }

    #[test]
    fn enumeration_counts() {
        let e = enumerate_paths(PathClass::Excursion, 4).unwrap();
        assert_eq!(e, vec![path("UUDD")]);
        let m = enumerate_paths(PathClass::Meander, 3).unwrap();
        let want: HashSet<LatticePath> = [path("UUU"), path("UUD")].into_iter().collect();
        assert_eq!(m.into_iter().collect::<HashSet<_>>(), want);
        for n in 0..=7usize {
            let b = enumerate_paths(PathClass::Bridge, 2 * n).unwrap();
            let central: u64 = (1..=n as u64).fold(1, |c, i| c * (n as u64 + i) / i);
            assert_eq!(b.len() as u64, central);
        }
        assert!(enumerate_paths(PathClass::Walk, 15).is_err());
    }

    #[test]
    fn excursion_bijection() {
        assert_eq!(tree_to_excursion(&DecoratedBinaryTree::leaf(1)), path("UD"));
        for n in 1..=6usize {
            let mut image = HashMap::new();
            for (t, _) in enumerate_decorated(n).unwrap() {
                let e = tree_to_excursion(&t);
                assert!(e.is_excursion());
                assert_eq!(e.len(), 2 * n);
                assert_eq!(excursion_to_shape(&e).unwrap().shape(), t.shape());
                image.insert(e, t.shape());
            }
            let all = enumerate_paths(PathClass::Excursion, 2 * n).unwrap();
            assert_eq!(all.len() as u64, catalan(n as u64 - 1));
            assert_eq!(image.len(), all.len());
            assert!(all.iter().all(|p| image.contains_key(p)));
        }
    }

    #[test]
    fn paired_times_differ_by_one() {
        for n in 1..=6 {
            for (t, _) in enumerate_decorated(n).unwrap() {
                let h = tree_to_excursion(&t).heights();
                let pairs = excursion_time_pairs(&t);
                assert_eq!(pairs.len(), n);
                let mut used: HashSet<usize> = HashSet::new();
                for (a, b) in pairs {
                    assert_eq!(h[a], h[b] + 1);
                    assert!(used.insert(a) && used.insert(b));
                }
                assert_eq!(used.len(), 2 * n);
            }
        }
    }

    #[test]
    fn bridge_from_tree() {
        assert!(tree_to_bridge(&DecoratedBinaryTree::leaf(1)).is_empty());
        let b = tree_to_bridge(&"(1 2)".parse().unwrap());
        assert_eq!(b, path("DU"));
        let b = tree_to_bridge(&"(2 1)".parse().unwrap());
        assert_eq!(b, path("UD"));
        for n in 1..=6usize {
            let mut seen: HashMap<LatticePath, usize> = HashMap::new();
            for (t, _) in enumerate_decorated(n).unwrap() {
                let b = tree_to_bridge(&t);
                assert!(b.is_bridge());
                assert_eq!(b.len(), 2 * (n - 1));
                let leaf = t.leaf_node(1).unwrap();
                assert_eq!(b.origin_visits(), t.depth_nodes(leaf));
                *seen.entry(b).or_default() += 1;
            }
            // every bridge is hit equally often
            let all = enumerate_paths(PathClass::Bridge, 2 * (n - 1)).unwrap();
            assert_eq!(seen.len(), all.len());
            let counts: HashSet<usize> = seen.values().copied().collect();
            assert_eq!(counts.len(), 1);
        }
    }

    #[test]
    fn meander_from_bridge() {
        let m = bridge_to_meander(&path("")).unwrap();
        assert_eq!(m, path("U"));
        let m = bridge_to_meander(&path("DU")).unwrap();
        assert_eq!(m, path("UUU"));
        assert_eq!(m.final_height(), 3);
        assert!(bridge_to_meander(&path("UU")).is_err());
        for n in 0..=6usize {
            let bridges = enumerate_paths(PathClass::Bridge, 2 * n).unwrap();
            let mut image = HashSet::new();
            for b in &bridges {
                let m = bridge_to_meander(b).unwrap();
                assert!(m.is_meander());
                let negative = b
                    .heights()
                    .windows(2)
                    .filter(|w| w[0] < 0 && w[1] == 0)
                    .count() as i64;
                assert_eq!(m.final_height(), 1 + 2 * negative);
                image.insert(m);
            }
            let meanders = enumerate_paths(PathClass::Meander, 2 * n + 1).unwrap();
            assert_eq!(image.len(), bridges.len());
            assert_eq!(image, meanders.into_iter().collect());
        }
    }

    #[test]
    fn walk_from_tree_pair() {
        assert_eq!(trees_to_walk(&TreePair::trivial(true)).unwrap(), path("U"));
        assert_eq!(trees_to_walk(&TreePair::trivial(false)).unwrap(), path("D"));
        let mut rng = crate::rng::StreamRng::new(5, 0);
        for steps in 0..12 {
            let pair = TreePair::grow(steps, &mut rng).unwrap();
            let w = trees_to_walk(&pair).unwrap();
            assert_eq!(w.len(), 2 * steps + 1);
            let leaf = pair.first.leaf_node(1).unwrap();
            assert_eq!(w.origin_visits(), pair.first.depth_nodes(leaf));
            assert_eq!(w.truncated(2 * steps).origin_visits(), w.origin_visits());
            assert!(pair.second.leaf_node(PAIR_MARKER).is_ok());
        }
    }
}
