//! Structural Patricia trie over 40-nibble address keys.
//!
//! Node kinds follow the Ethereum state-trie layout (null, 16-way branch with
//! a value slot, extension, leaf) without hashing or RLP. The trie keeps the
//! canonical compressed shape after every mutation, so two tries holding the
//! same key set compare equal with `==` regardless of insertion order.

use std::collections::BTreeMap;
use std::mem;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::keyspace::{common_prefix_len, Address, NibblePath, KEY_NIBBLES};

/// Children of a branch, one per nibble value, plus the value slot.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Branch {
    pub children: [Node; 16],
    pub value: Option<Vec<u8>>,
}

impl Branch {
    fn occupied(&self) -> usize {
        self.children.iter().filter(|c| !c.is_null()).count()
    }

    /// Places a key remainder directly under this branch.
    fn attach(&mut self, rest: &[u8], value: Vec<u8>) {
        match rest.split_first() {
            None => self.value = Some(value),
            Some((&slot, tail)) => {
                debug_assert!(self.children[slot as usize].is_null());
                self.children[slot as usize] = Node::Leaf { path: NibblePath::from_slice_unchecked(tail), value };
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Node {
    #[default]
    Null,
    Branch(Box<Branch>),
    Extension {
        path: NibblePath,
        child: Box<Node>,
    },
    Leaf {
        path: NibblePath,
        value: Vec<u8>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Branch,
    Extension,
    Leaf,
}

impl Node {
    pub fn is_null(&self) -> bool {
        matches!(self, Node::Null)
    }

    pub fn kind(&self) -> Option<NodeKind> {
        match self {
            Node::Null => None,
            Node::Branch(_) => Some(NodeKind::Branch),
            Node::Extension { .. } => Some(NodeKind::Extension),
            Node::Leaf { .. } => Some(NodeKind::Leaf),
        }
    }

    fn insert(self, key: &[u8], value: Vec<u8>) -> (Node, Option<Vec<u8>>) {
        match self {
            Node::Null => (Node::Leaf { path: NibblePath::from_slice_unchecked(key), value }, None),
            Node::Leaf { path, value: old } => {
                if path.as_slice() == key {
                    return (Node::Leaf { path, value }, Some(old));
                }
                let shared = common_prefix_len(path.as_slice(), key);
                let mut branch = Box::<Branch>::default();
                branch.attach(&path.as_slice()[shared..], old);
                branch.attach(&key[shared..], value);
                (wrap_extension(&key[..shared], Node::Branch(branch)), None)
            }
            Node::Extension { path, child } => {
                let shared = common_prefix_len(path.as_slice(), key);
                if shared == path.len() {
                    let (child, old) = child.insert(&key[shared..], value);
                    return (Node::Extension { path, child: Box::new(child) }, old);
                }
                let mut branch = Box::<Branch>::default();
                let slot = path.as_slice()[shared] as usize;
                let tail = &path.as_slice()[shared + 1..];
                branch.children[slot] = wrap_extension(tail, *child);
                branch.attach(&key[shared..], value);
                (wrap_extension(&key[..shared], Node::Branch(branch)), None)
            }
            Node::Branch(mut branch) => {
                let old = match key.split_first() {
                    None => branch.value.replace(value),
                    Some((&slot, tail)) => {
                        let child = mem::take(&mut branch.children[slot as usize]);
                        let (child, old) = child.insert(tail, value);
                        branch.children[slot as usize] = child;
                        old
                    }
                };
                (Node::Branch(branch), old)
            }
        }
    }

    fn remove(self, key: &[u8]) -> (Node, Option<Vec<u8>>) {
        match self {
            Node::Null => (Node::Null, None),
            Node::Leaf { path, value } => {
                if path.as_slice() == key {
                    (Node::Null, Some(value))
                } else {
                    (Node::Leaf { path, value }, None)
                }
            }
            Node::Extension { path, child } => {
                if !key.starts_with(path.as_slice()) {
                    return (Node::Extension { path, child }, None);
                }
                let (child, removed) = child.remove(&key[path.len()..]);
                if removed.is_none() {
                    return (Node::Extension { path, child: Box::new(child) }, None);
                }
                (prepend(path.as_slice(), child), removed)
            }
            Node::Branch(mut branch) => {
                let removed = match key.split_first() {
                    None => branch.value.take(),
                    Some((&slot, tail)) => {
                        let child = mem::take(&mut branch.children[slot as usize]);
                        let (child, removed) = child.remove(tail);
                        branch.children[slot as usize] = child;
                        removed
                    }
                };
                if removed.is_none() {
                    return (Node::Branch(branch), None);
                }
                (collapse_branch(branch), removed)
            }
        }
    }
}

fn wrap_extension(prefix: &[u8], child: Node) -> Node {
    if prefix.is_empty() {
        child
    } else {
        prepend(prefix, child)
    }
}

/// Hangs `node` below a path fragment, merging fragments so that extensions
/// never point at extensions or leaves.
fn prepend(prefix: &[u8], node: Node) -> Node {
    let join = |tail: &NibblePath| {
        let mut joined = prefix.to_vec();
        joined.extend_from_slice(tail.as_slice());
        NibblePath::from_slice_unchecked(&joined)
    };
    match node {
        Node::Null => Node::Null,
        Node::Leaf { path, value } => Node::Leaf { path: join(&path), value },
        Node::Extension { path, child } => Node::Extension { path: join(&path), child },
        branch @ Node::Branch(_) if prefix.is_empty() => branch,
        branch @ Node::Branch(_) => {
            Node::Extension { path: NibblePath::from_slice_unchecked(prefix), child: Box::new(branch) }
        }
    }
}

fn collapse_branch(mut branch: Box<Branch>) -> Node {
    match (branch.occupied(), branch.value.is_some()) {
        (0, false) => Node::Null,
        (0, true) => Node::Leaf { path: NibblePath::new(), value: branch.value.take().unwrap() },
        (1, false) => {
            let slot = branch.children.iter().position(|c| !c.is_null()).unwrap();
            let only = mem::take(&mut branch.children[slot]);
            prepend(&[slot as u8], only)
        }
        _ => Node::Branch(branch),
    }
}

/// Per-key structural measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafMetrics {
    /// Nibbles consumed between the root and the leaf node.
    pub divergence_depth: usize,
    /// Nodes on the root-to-leaf path, both ends included.
    pub node_count: usize,
}

/// Node counts by kind at one nibble depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct KindCounts {
    pub branch: u64,
    pub extension: u64,
    pub leaf: u64,
}

impl KindCounts {
    pub fn total(&self) -> u64 {
        self.branch + self.extension + self.leaf
    }

    fn bump(&mut self, kind: NodeKind) {
        match kind {
            NodeKind::Branch => self.branch += 1,
            NodeKind::Extension => self.extension += 1,
            NodeKind::Leaf => self.leaf += 1,
        }
    }

    pub fn add(&mut self, other: &KindCounts) {
        self.branch += other.branch;
        self.extension += other.extension;
        self.leaf += other.leaf;
    }
}

/// Node kinds indexed by the number of nibbles consumed before reaching them.
pub type LevelCensus = BTreeMap<usize, KindCounts>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvariantViolation {
    #[error("branch at depth {depth} has {children} children and value={has_value}")]
    DegenerateBranch { depth: usize, children: usize, has_value: bool },
    #[error("branch at depth {depth} carries a value")]
    BranchValue { depth: usize },
    #[error("extension at depth {depth} has an empty fragment")]
    EmptyExtension { depth: usize },
    #[error("extension at depth {depth} does not point at a branch")]
    ExtensionChild { depth: usize },
    #[error("leaf ends at nibble {end}, expected {KEY_NIBBLES}")]
    KeyLength { end: usize },
    #[error("key_count is {recorded} but {found} leaves are reachable")]
    KeyCount { recorded: usize, found: usize },
}

/// Patricia trie keyed by [`Address`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Trie {
    root: Node,
    key_count: usize,
}

impl Trie {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn len(&self) -> usize {
        self.key_count
    }

    pub fn is_empty(&self) -> bool {
        self.key_count == 0
    }

    /// Stores `value` under `key`, returning the previous value if the key was
    /// already present.
    pub fn insert(&mut self, key: Address, value: Vec<u8>) -> Option<Vec<u8>> {
        let path = key.to_nibbles();
        let (root, old) = mem::take(&mut self.root).insert(path.as_slice(), value);
        self.root = root;
        if old.is_none() {
            self.key_count += 1;
        }
        old
    }

    pub fn get(&self, key: &Address) -> Option<&[u8]> {
        let path = key.to_nibbles();
        let mut rest = path.as_slice();
        let mut node = &self.root;
        loop {
            match node {
                Node::Null => return None,
                Node::Leaf { path, value } => {
                    return (path.as_slice() == rest).then_some(value.as_slice());
                }
                Node::Extension { path, child } => {
                    rest = rest.strip_prefix(path.as_slice())?;
                    node = child;
                }
                Node::Branch(branch) => match rest.split_first() {
                    None => return branch.value.as_deref(),
                    Some((&slot, tail)) => {
                        node = &branch.children[slot as usize];
                        rest = tail;
                    }
                },
            }
        }
    }

    pub fn contains_key(&self, key: &Address) -> bool {
        self.get(key).is_some()
    }

    /// Removes `key`. `None` means the key was absent and the trie is
    /// untouched.
    pub fn remove(&mut self, key: &Address) -> Option<Vec<u8>> {
        let path = key.to_nibbles();
        let (root, removed) = mem::take(&mut self.root).remove(path.as_slice());
        self.root = root;
        if removed.is_some() {
            self.key_count -= 1;
        }
        removed
    }

    /// Calls `f(key_nibbles, metrics)` for every stored key in nibble order.
    pub fn visit_leaves<F: FnMut(&[u8], LeafMetrics)>(&self, mut f: F) {
        let mut prefix = Vec::with_capacity(KEY_NIBBLES);
        visit(&self.root, &mut prefix, 1, &mut f);
    }

    /// Metrics for every stored key.
    pub fn leaf_metrics(&self) -> BTreeMap<Address, LeafMetrics> {
        let mut out = BTreeMap::new();
        self.visit_leaves(|key, m| {
            let path = NibblePath::from_slice_unchecked(key);
            let addr = Address::from_nibbles(&path).expect("stored keys are full length");
            out.insert(addr, m);
        });
        out
    }

    /// Metrics only, without rebuilding the keys. Ordered by key.
    pub fn leaf_metric_values(&self) -> Vec<LeafMetrics> {
        let mut out = Vec::with_capacity(self.key_count);
        let mut push = |_: &[u8], m| out.push(m);
        visit_metrics(&self.root, 0, 1, &mut push);
        out
    }

    pub fn level_census(&self) -> LevelCensus {
        let mut census = LevelCensus::new();
        let mut stack = vec![(&self.root, 0usize)];
        while let Some((node, depth)) = stack.pop() {
            let Some(kind) = node.kind() else { continue };
            census.entry(depth).or_default().bump(kind);
            match node {
                Node::Branch(b) => stack.extend(b.children.iter().filter(|c| !c.is_null()).map(|c| (c, depth + 1))),
                Node::Extension { path, child } => stack.push((child, depth + path.len())),
                _ => {}
            }
        }
        census
    }

    /// Walks the whole trie checking the compressed-shape rules.
    pub fn check_invariants(&self) -> Result<(), InvariantViolation> {
        let mut leaves = 0;
        check(&self.root, 0, &mut leaves)?;
        if leaves != self.key_count {
            return Err(InvariantViolation::KeyCount { recorded: self.key_count, found: leaves });
        }
        Ok(())
    }
}

impl FromIterator<Address> for Trie {
    fn from_iter<I: IntoIterator<Item = Address>>(iter: I) -> Self {
        let mut trie = Trie::new();
        for key in iter {
            trie.insert(key, Vec::new());
        }
        trie
    }
}

fn visit<F: FnMut(&[u8], LeafMetrics)>(node: &Node, prefix: &mut Vec<u8>, nodes: usize, f: &mut F) {
    match node {
        Node::Null => {}
        Node::Leaf { path, .. } => {
            let depth = prefix.len();
            prefix.extend_from_slice(path.as_slice());
            f(prefix, LeafMetrics { divergence_depth: depth, node_count: nodes });
            prefix.truncate(depth);
        }
        Node::Extension { path, child } => {
            let depth = prefix.len();
            prefix.extend_from_slice(path.as_slice());
            visit(child, prefix, nodes + 1, f);
            prefix.truncate(depth);
        }
        Node::Branch(branch) => {
            debug_assert!(branch.value.is_none());
            for (slot, child) in branch.children.iter().enumerate() {
                prefix.push(slot as u8);
                visit(child, prefix, nodes + 1, f);
                prefix.pop();
            }
        }
    }
}

fn visit_metrics<F: FnMut(&[u8], LeafMetrics)>(node: &Node, depth: usize, nodes: usize, f: &mut F) {
    match node {
        Node::Null => {}
        Node::Leaf { .. } => f(&[], LeafMetrics { divergence_depth: depth, node_count: nodes }),
        Node::Extension { path, child } => visit_metrics(child, depth + path.len(), nodes + 1, f),
        Node::Branch(branch) => {
            for child in branch.children.iter() {
                visit_metrics(child, depth + 1, nodes + 1, f);
            }
        }
    }
}

fn check(node: &Node, depth: usize, leaves: &mut usize) -> Result<(), InvariantViolation> {
    match node {
        Node::Null => Ok(()),
        Node::Leaf { path, .. } => {
            *leaves += 1;
            let end = depth + path.len();
            if end != KEY_NIBBLES {
                return Err(InvariantViolation::KeyLength { end });
            }
            Ok(())
        }
        Node::Extension { path, child } => {
            if path.is_empty() {
                return Err(InvariantViolation::EmptyExtension { depth });
            }
            if !matches!(**child, Node::Branch(_)) {
                return Err(InvariantViolation::ExtensionChild { depth });
            }
            check(child, depth + path.len(), leaves)
        }
        Node::Branch(branch) => {
            let children = branch.occupied();
            let has_value = branch.value.is_some();
            if has_value {
                return Err(InvariantViolation::BranchValue { depth });
            }
            if children < 2 {
                return Err(InvariantViolation::DegenerateBranch { depth, children, has_value });
            }
            for child in branch.children.iter() {
                check(child, depth + 1, leaves)?;
            }
            Ok(())
        }
    }
}
