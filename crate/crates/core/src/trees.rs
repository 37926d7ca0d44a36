//! Decorated binary trees grown by Rémy's algorithm, and plane trees.
//!
//! A decorated binary tree is a rooted plane binary tree whose leaves carry
//! distinct labels. Rémy's step picks one of the `2m - 1` nodes uniformly,
//! splices a fresh internal node above it and hangs a new leaf on the left
//! or right with probability 1/2, which keeps the tree uniform.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::pmf::{ExactPmf, Rational, Scalar};
use crate::rng::{blocked, StreamRng};

/// Largest leaf count accepted by [`enumerate_decorated`].
pub const ENUMERATION_LIMIT: usize = 6;

const NONE: usize = usize::MAX;

#[derive(Clone, Debug)]
struct Node {
    parent: usize,
    left: usize,
    right: usize,
    /// Zero for internal nodes.
    label: u32,
}

impl Node {
    fn leaf(label: u32) -> Self {
        Self {
            parent: NONE,
            left: NONE,
            right: NONE,
            label,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DecoratedBinaryTree {
    nodes: Vec<Node>,
    root: usize,
    leaves: BTreeMap<u32, usize>,
}

/// Partner of a leaf under the leaf/internal pairing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Partner {
    Ground,
    Internal(usize),
}

impl DecoratedBinaryTree {
    /// The one-node tree.
    pub fn leaf(label: u32) -> Self {
        let mut leaves = BTreeMap::new();
        leaves.insert(label, 0);
        Self {
            nodes: vec![Node::leaf(label)],
            root: 0,
            leaves,
        }
    }

    /// Uniform decorated tree with leaves `1..=n`.
    pub fn remy_grow(n: usize, rng: &mut StreamRng) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", "need at least one leaf"));
        }
        let mut t = Self::leaf(1);
        for m in 1..n {
            let target = rng.below(t.node_count() as u64) as usize;
            let left = rng.coin();
            t.remy_insert(target, m as u32 + 1, left)?;
        }
        Ok(t)
    }

    /// Splices a new internal node above `target` and attaches a new leaf
    /// labelled `label` as its left child (`new_leaf_left`) or right child.
    pub fn remy_insert(&mut self, target: usize, label: u32, new_leaf_left: bool) -> Result<()> {
        if target >= self.nodes.len() {
            return Err(Error::param("target", format!("no node {target}")));
        }
        if label == 0 || self.leaves.contains_key(&label) {
            return Err(Error::param("label", format!("{label} is zero or already used")));
        }
        let inner = self.nodes.len();
        let leaf = inner + 1;
        let parent = self.nodes[target].parent;
        let (l, r) = if new_leaf_left { (leaf, target) } else { (target, leaf) };
        self.nodes.push(Node {
            parent,
            left: l,
            right: r,
            label: 0,
        });
        let mut new_leaf = Node::leaf(label);
        new_leaf.parent = inner;
        self.nodes.push(new_leaf);
        if parent == NONE {
            self.root = inner;
        } else if self.nodes[parent].left == target {
            self.nodes[parent].left = inner;
        } else {
            self.nodes[parent].right = inner;
        }
        self.nodes[target].parent = inner;
        self.leaves.insert(label, leaf);
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.nodes[v].left == NONE
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        opt(self.nodes[v].parent)
    }

    /// `(left, right)` children of an internal node.
    pub fn children(&self, v: usize) -> Option<(usize, usize)> {
        let n = &self.nodes[v];
        if n.left == NONE {
            None
        } else {
            Some((n.left, n.right))
        }
    }

    pub fn label(&self, v: usize) -> Option<u32> {
        match self.nodes[v].label {
            0 => None,
            l => Some(l),
        }
    }

    pub fn labels(&self) -> impl Iterator<Item = u32> + '_ {
        self.leaves.keys().copied()
    }

    pub fn leaf_node(&self, label: u32) -> Result<usize> {
        self.leaves.get(&label).copied().ok_or(Error::UnknownLabel(label))
    }

    pub fn is_left_child(&self, v: usize) -> bool {
        let p = self.nodes[v].parent;
        p != NONE && self.nodes[p].left == v
    }

    /// Nodes on the path from the root to `v`.
    pub fn depth_nodes(&self, v: usize) -> usize {
        let mut count = 1;
        let mut cur = v;
        while let Some(p) = self.parent(cur) {
            count += 1;
            cur = p;
        }
        count
    }

    /// Nodes in preorder, left subtree first.
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            out.push(v);
            if let Some((l, r)) = self.children(v) {
                stack.push(r);
                stack.push(l);
            }
        }
        out
    }

    fn spanning_marks(&self, labels: &[u32]) -> Result<Vec<bool>> {
        if labels.is_empty() {
            return Err(Error::param("labels", "need at least one leaf"));
        }
        let mut mark = vec![false; self.nodes.len()];
        for &lab in labels {
            let mut cur = self.leaf_node(lab)?;
            while cur != NONE && !mark[cur] {
                mark[cur] = true;
                cur = self.nodes[cur].parent;
            }
        }
        Ok(mark)
    }

    /// Nodes in the union of the root-to-leaf paths of `labels`.
    pub fn spanning_size(&self, labels: &[u32]) -> Result<usize> {
        Ok(self.spanning_marks(labels)?.iter().filter(|m| **m).count())
    }

    /// Edges of that spanning tree that lead to a left child.
    pub fn left_edge_count(&self, labels: &[u32]) -> Result<usize> {
        let mark = self.spanning_marks(labels)?;
        Ok((0..self.nodes.len())
            .filter(|&v| mark[v] && self.is_left_child(v))
            .count())
    }

    /// Pairs every leaf with an internal node or the ground. The root hangs
    /// as the left child of the ground; a leaf is paired with the parent of
    /// the first left child met on its way up.
    pub fn pair_leaves(&self) -> BTreeMap<u32, Partner> {
        self.leaves
            .iter()
            .map(|(&lab, &leaf)| {
                let mut cur = leaf;
                let partner = loop {
                    let p = self.nodes[cur].parent;
                    if p == NONE {
                        break Partner::Ground;
                    }
                    if self.nodes[p].left == cur {
                        break Partner::Internal(p);
                    }
                    cur = p;
                };
                (lab, partner)
            })
            .collect()
    }

    /// Left-right mirror image, same labels.
    pub fn mirrored(&self) -> Self {
        let mut t = self.clone();
        for n in &mut t.nodes {
            std::mem::swap(&mut n.left, &mut n.right);
        }
        t
    }

    /// Subtree rooted at `v` as a tree of its own.
    pub fn subtree(&self, v: usize) -> Self {
        let mut out = Self {
            nodes: Vec::new(),
            root: 0,
            leaves: BTreeMap::new(),
        };
        self.copy_into(v, NONE, &mut out);
        out
    }

    fn copy_into(&self, v: usize, parent: usize, out: &mut Self) -> usize {
        let id = out.nodes.len();
        out.nodes.push(Node {
            parent,
            left: NONE,
            right: NONE,
            label: self.nodes[v].label,
        });
        if let Some((l, r)) = self.children(v) {
            let li = self.copy_into(l, id, out);
            let ri = self.copy_into(r, id, out);
            out.nodes[id].left = li;
            out.nodes[id].right = ri;
        } else {
            out.leaves.insert(self.nodes[v].label, id);
        }
        id
    }

    /// Shape with labels removed, e.g. `((* *) *)`.
    pub fn shape(&self) -> String {
        let mut s = String::new();
        self.write_node(self.root, &mut s, false);
        s
    }

    fn write_node(&self, v: usize, out: &mut String, labels: bool) {
        match self.children(v) {
            None if labels => out.push_str(&self.nodes[v].label.to_string()),
            None => out.push('*'),
            Some((l, r)) => {
                out.push('(');
                self.write_node(l, out, labels);
                out.push(' ');
                self.write_node(r, out, labels);
                out.push(')');
            }
        }
    }

    /// Depth-first steps over the edges: `+1` on first visit of a left edge,
    /// `-1` on first visit of a right edge.
    pub fn contour_steps(&self) -> Vec<i8> {
        let mut out = Vec::with_capacity(self.nodes.len().saturating_sub(1));
        self.contour_into(self.root, &mut out);
        out
    }

    fn contour_into(&self, v: usize, out: &mut Vec<i8>) {
        if let Some((l, r)) = self.children(v) {
            out.push(1);
            self.contour_into(l, out);
            out.push(-1);
            self.contour_into(r, out);
        }
    }

    /// Rebuilds a shape from contour steps; leaves get labels in the order
    /// produced by `label_of(i)` for the `i`-th leaf in preorder.
    pub fn from_contour(steps: &[i8], mut label_of: impl FnMut(usize) -> u32) -> Result<Self> {
        let mut t = Self {
            nodes: Vec::new(),
            root: 0,
            leaves: BTreeMap::new(),
        };
        let mut pos = 0;
        let mut leaf_index = 0;
        t.root = t.decode(steps, &mut pos, NONE, &mut leaf_index, &mut label_of)?;
        if pos != steps.len() {
            return Err(Error::Parse("contour has trailing steps".into()));
        }
        Ok(t)
    }

    fn decode(
        &mut self,
        steps: &[i8],
        pos: &mut usize,
        parent: usize,
        leaf_index: &mut usize,
        label_of: &mut impl FnMut(usize) -> u32,
    ) -> Result<usize> {
        let id = self.nodes.len();
        self.nodes.push(Node::leaf(0));
        self.nodes[id].parent = parent;
        if steps.get(*pos) == Some(&1) {
            *pos += 1;
            let l = self.decode(steps, pos, id, leaf_index, label_of)?;
            if steps.get(*pos) != Some(&-1) {
                return Err(Error::Parse("contour is not a Dyck word".into()));
            }
            *pos += 1;
            let r = self.decode(steps, pos, id, leaf_index, label_of)?;
            self.nodes[id].left = l;
            self.nodes[id].right = r;
        } else {
            let lab = label_of(*leaf_index);
            *leaf_index += 1;
            if lab == 0 || self.leaves.insert(lab, id).is_some() {
                return Err(Error::Parse(format!("bad or repeated leaf label {lab}")));
            }
            self.nodes[id].label = lab;
        }
        Ok(id)
    }
}

fn opt(v: usize) -> Option<usize> {
    if v == NONE {
        None
    } else {
        Some(v)
    }
}

impl fmt::Display for DecoratedBinaryTree {
    /// Parenthesized form: a leaf is its label, an internal node `(L R)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_node(self.root, &mut s, true);
        f.write_str(&s)
    }
}

impl PartialEq for DecoratedBinaryTree {
    fn eq(&self, other: &Self) -> bool {
        self.to_string() == other.to_string()
    }
}

impl Eq for DecoratedBinaryTree {}

impl FromStr for DecoratedBinaryTree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bytes = s.as_bytes();
        let mut t = Self {
            nodes: Vec::new(),
            root: 0,
            leaves: BTreeMap::new(),
        };
        let mut pos = 0;
        t.root = parse_node(bytes, &mut pos, NONE, &mut t)?;
        skip_ws(bytes, &mut pos);
        if pos != bytes.len() {
            return Err(Error::Parse(format!("trailing input at byte {pos}")));
        }
        Ok(t)
    }
}

fn skip_ws(b: &[u8], pos: &mut usize) {
    while *pos < b.len() && b[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
}

fn parse_node(b: &[u8], pos: &mut usize, parent: usize, t: &mut DecoratedBinaryTree) -> Result<usize> {
    skip_ws(b, pos);
    let id = t.nodes.len();
    t.nodes.push(Node::leaf(0));
    t.nodes[id].parent = parent;
    match b.get(*pos) {
        Some(b'(') => {
            *pos += 1;
            let l = parse_node(b, pos, id, t)?;
            let r = parse_node(b, pos, id, t)?;
            skip_ws(b, pos);
            if b.get(*pos) != Some(&b')') {
                return Err(Error::Parse(format!("expected `)` at byte {}", *pos)));
            }
            *pos += 1;
            t.nodes[id].left = l;
            t.nodes[id].right = r;
        }
        Some(c) if c.is_ascii_digit() => {
            let start = *pos;
            while *pos < b.len() && b[*pos].is_ascii_digit() {
                *pos += 1;
            }
            let text = std::str::from_utf8(&b[start..*pos]).expect("ascii digits");
            let lab: u32 = text.parse().map_err(|_| Error::Parse(format!("bad label {text}")))?;
            if lab == 0 || t.leaves.insert(lab, id).is_some() {
                return Err(Error::Parse(format!("label {lab} is zero or repeated")));
            }
            t.nodes[id].label = lab;
        }
        _ => return Err(Error::Parse(format!("unexpected input at byte {}", *pos))),
    }
    Ok(id)
}

/// Every decorated tree with leaves `1..=n` together with its exact
/// probability under Rémy's algorithm, accumulated along its construction.
pub fn enumerate_decorated(n: usize) -> Result<Vec<(DecoratedBinaryTree, Rational)>> {
    if n == 0 {
        return Err(Error::param("n", "need at least one leaf"));
    }
    if n > ENUMERATION_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "enumeration is capped at {ENUMERATION_LIMIT} leaves"
        )));
    }
    let mut level = vec![(DecoratedBinaryTree::leaf(1), Rational::int(1))];
    for m in 1..n {
        let nodes = 2 * m - 1;
        let step = Rational::ratio(1, 2 * nodes as u64);
        let mut next = Vec::with_capacity(level.len() * 2 * nodes);
        for (t, p) in &level {
            for target in 0..nodes {
                for left in [true, false] {
                    let mut c = t.clone();
                    c.remy_insert(target, m as u32 + 1, left)?;
                    next.push((c, p.clone() * step.clone()));
                }
            }
        }
        level = next;
    }
    Ok(level)
}

/// Catalan number `C_m`.
pub fn catalan(m: u64) -> u64 {
    let mut c: u64 = 1;
    for i in 0..m {
        c = c * 2 * (2 * i + 1) / (i + 2);
    }
    c
}

/// Two trees grown jointly: every Rémy step picks a node uniformly among
/// the nodes of both trees. The first tree starts as leaf 1, the second as
/// a marker leaf labelled 2; new leaves get labels from 3 on.
#[derive(Clone, Debug)]
pub struct TreePair {
    pub first: DecoratedBinaryTree,
    pub second: DecoratedBinaryTree,
    /// Sign of the walk's first step.
    pub positive: bool,
}

pub const PAIR_MARKER: u32 = 2;

impl TreePair {
    pub fn trivial(positive: bool) -> Self {
        Self {
            first: DecoratedBinaryTree::leaf(1),
            second: DecoratedBinaryTree::leaf(PAIR_MARKER),
            positive,
        }
    }

    /// Starts from a fair sign and runs `steps` joint Rémy steps.
    pub fn grow(steps: usize, rng: &mut StreamRng) -> Result<Self> {
        let mut p = Self::trivial(rng.coin());
        for s in 0..steps {
            let a = p.first.node_count();
            let total = a + p.second.node_count();
            let target = rng.below(total as u64) as usize;
            let left = rng.coin();
            let label = PAIR_MARKER + 1 + s as u32;
            if target < a {
                p.first.remy_insert(target, label, left)?;
            } else {
                p.second.remy_insert(target - a, label, left)?;
            }
        }
        Ok(p)
    }
}

/// A rooted plane tree with labelled nodes, stored in preorder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaneTree {
    children: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    labels: Vec<u32>,
}

impl PlaneTree {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn label(&self, v: usize) -> u32 {
        self.labels[v]
    }

    pub fn node_of(&self, label: u32) -> Result<usize> {
        self.labels
            .iter()
            .position(|&l| l == label)
            .ok_or(Error::UnknownLabel(label))
    }

    /// Nodes in the union of the root-to-node paths of `labels`.
    pub fn spanning_size(&self, labels: &[u32]) -> Result<usize> {
        if labels.is_empty() {
            return Err(Error::param("labels", "need at least one node"));
        }
        let mut mark = vec![false; self.len()];
        for &lab in labels {
            let mut cur = Some(self.node_of(lab)?);
            while let Some(v) = cur {
                if mark[v] {
                    break;
                }
                mark[v] = true;
                cur = self.parent[v];
            }
        }
        Ok(mark.iter().filter(|m| **m).count())
    }

    /// Steps of the contour walk: `+1` into a child, `-1` back up.
    pub fn contour_steps(&self) -> Vec<i8> {
        let mut out = Vec::with_capacity(2 * self.len());
        self.contour_into(0, &mut out);
        out
    }

    fn contour_into(&self, v: usize, out: &mut Vec<i8>) {
        for &c in &self.children[v] {
            out.push(1);
            self.contour_into(c, out);
            out.push(-1);
        }
    }

    fn write(&self, v: usize, out: &mut String) {
        out.push('[');
        out.push_str(&self.labels[v].to_string());
        for &c in &self.children[v] {
            out.push(',');
            self.write(c, out);
        }
        out.push(']');
    }
}

impl fmt::Display for PlaneTree {
    /// Nested lists `[label, child, child, ...]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write(0, &mut s);
        f.write_str(&s)
    }
}

/// Depth-first walk of the binary tree, left child first. The first visit
/// of a left edge adds a new rightmost child to the current plane node and
/// moves into it; the first visit of a right edge moves back to the parent.
/// A leaf writes its label onto the current plane node.
pub fn binary_to_plane(t: &DecoratedBinaryTree) -> PlaneTree {
    let mut p = PlaneTree {
        children: vec![Vec::new()],
        parent: vec![None],
        labels: vec![0],
    };
    let mut cur = 0usize;
    walk_to_plane(t, t.root(), &mut p, &mut cur);
    p
}

fn walk_to_plane(t: &DecoratedBinaryTree, v: usize, p: &mut PlaneTree, cur: &mut usize) {
    match t.children(v) {
        None => p.labels[*cur] = t.nodes[v].label,
        Some((l, r)) => {
            let id = p.labels.len();
            p.children.push(Vec::new());
            p.parent.push(Some(*cur));
            p.labels.push(0);
            p.children[*cur].push(id);
            *cur = id;
            walk_to_plane(t, l, p, cur);
            *cur = p.parent[*cur].expect("right edge below a left edge");
            walk_to_plane(t, r, p, cur);
        }
    }
}

/// Inverse of [`binary_to_plane`].
pub fn plane_to_binary(p: &PlaneTree) -> Result<DecoratedBinaryTree> {
    // The binary contour equals the plane contour, so the shape is fixed by
    // it; labels are then matched through the plane node each leaf lands on.
    let steps = p.contour_steps();
    let shape = DecoratedBinaryTree::from_contour(&steps, |i| i as u32 + 1)?;
    let image = binary_to_plane(&shape);
    if image.children != p.children {
        return Err(Error::Domain("plane tree and decoded shape disagree".into()));
    }
    // image.labels[v] is the provisional label of the leaf mapped to node v
    let mut relabel = vec![0u32; p.len() + 1];
    for v in 0..p.len() {
        relabel[image.labels[v] as usize] = p.labels[v];
    }
    DecoratedBinaryTree::from_contour(&steps, |i| relabel[i + 1])
}

/// Tree statistics with urn embeddings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeStatistic {
    /// Nodes spanned by the root and `k` uniform leaves of a binary tree.
    SpanningLeaves { k: usize },
    /// Nodes on the path from the root to a uniform node of a binary tree.
    NodePath,
    /// Nodes spanned by the root and `k` uniform nodes of a plane tree.
    PlaneSpanning { k: usize },
}

impl TreeStatistic {
    /// One draw of the statistic on a uniform tree with `n` leaves (binary)
    /// or `n` nodes (plane).
    pub fn sample(&self, n: usize, rng: &mut StreamRng) -> Result<u64> {
        let t = DecoratedBinaryTree::remy_grow(n, rng)?;
        match *self {
            TreeStatistic::SpanningLeaves { k } => {
                let labels = choose_labels(n, k, rng)?;
                Ok(t.spanning_size(&labels)? as u64)
            }
            TreeStatistic::NodePath => {
                let v = rng.below(t.node_count() as u64) as usize;
                Ok(t.depth_nodes(v) as u64)
            }
            TreeStatistic::PlaneSpanning { k } => {
                let p = binary_to_plane(&t);
                let labels = choose_labels(n, k, rng)?;
                Ok(p.spanning_size(&labels)? as u64)
            }
        }
    }
}

/// `k` distinct labels chosen uniformly from `1..=n`.
fn choose_labels(n: usize, k: usize, rng: &mut StreamRng) -> Result<Vec<u32>> {
    if k == 0 || k > n {
        return Err(Error::param("k", format!("must lie in 1..={n}")));
    }
    let mut pool: Vec<u32> = (1..=n as u32).collect();
    for i in 0..k {
        let j = i + rng.below((n - i) as u64) as usize;
        pool.swap(i, j);
    }
    pool.truncate(k);
    Ok(pool)
}

/// Monte Carlo law of a tree statistic over `samples` uniform trees.
pub fn tree_stat_dist(
    stat: TreeStatistic,
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<ExactPmf<f64>> {
    if samples == 0 {
        return Err(Error::EmptySample);
    }
    // validate once so workers cannot fail
    stat.sample(n, &mut StreamRng::new(seed, u64::MAX))?;
    let counts = blocked(
        seed,
        0,
        samples,
        |rng, count| {
            let mut c = vec![0u64; 2 * n];
            for _ in 0..count {
                let v = stat.sample(n, rng).expect("parameters validated") as usize;
                c[v] += 1;
            }
            c
        },
        vec![0u64; 2 * n],
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        },
    );
    let w: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    ExactPmf::from_weights(0, w)
}
