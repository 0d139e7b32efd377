//! Max-priority queues over node ids `0..n`, keyed by an `f64`.
//!
//! All three queues order entries by key, highest first, and break ties by
//! the lowest node id. With that total order the extraction sequence of a
//! given operation sequence is identical across implementations.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HeapError {
    #[error("extract from an empty queue")]
    Empty,
    #[error("node {0} is not in the queue")]
    Absent(usize),
    #[error("node {node}: new key {new} is below current key {current}")]
    KeyDecrease { node: usize, current: f64, new: f64 },
}

pub type Result<T> = std::result::Result<T, HeapError>;

/// `true` when entry `a` must leave the queue before entry `b`.
#[inline]
fn outranks(a: (f64, usize), b: (f64, usize)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

pub trait MaxPriorityQueue {
    /// Queue holding every node `0..keys.len()` with the given keys.
    fn from_keys(keys: &[f64]) -> Self
    where
        Self: Sized;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn contains(&self, node: usize) -> bool;

    fn key(&self, node: usize) -> Option<f64>;

    /// Removes and returns the highest-ranked entry.
    fn extract_max(&mut self) -> Result<(usize, f64)>;

    /// Raises the key of a queued node. Equal keys are a no-op.
    fn increase_key(&mut self, node: usize, key: f64) -> Result<()>;
}

fn check_increase(node: usize, current: Option<f64>, key: f64) -> Result<f64> {
    let current = current.ok_or(HeapError::Absent(node))?;
    if key < current {
        return Err(HeapError::KeyDecrease {
            node,
            current,
            new: key,
        });
    }
    Ok(current)
}

/// Unordered queue; extraction scans every slot.
#[derive(Debug, Clone)]
pub struct NaiveQueue {
    keys: Vec<f64>,
    present: Vec<bool>,
    len: usize,
}

impl MaxPriorityQueue for NaiveQueue {
    fn from_keys(keys: &[f64]) -> Self {
        Self {
            keys: keys.to_vec(),
            present: vec![true; keys.len()],
            len: keys.len(),
        }
    }

    fn len(&self) -> usize {
        self.len
    }

    fn contains(&self, node: usize) -> bool {
        self.present.get(node).copied().unwrap_or(false)
    }

    fn key(&self, node: usize) -> Option<f64> {
        self.contains(node).then(|| self.keys[node])
    }

    fn extract_max(&mut self) -> Result<(usize, f64)> {
        let mut best: Option<usize> = None;
        for (i, (&k, &p)) in self.keys.iter().zip(&self.present).enumerate() {
            // Ascending scan with strict `>` keeps the lowest id on ties.
            if p && best.is_none_or(|b| k > self.keys[b]) {
                best = Some(i);
            }
        }
        let node = best.ok_or(HeapError::Empty)?;
        self.present[node] = false;
        self.len -= 1;
        Ok((node, self.keys[node]))
    }

    fn increase_key(&mut self, node: usize, key: f64) -> Result<()> {
        check_increase(node, self.key(node), key)?;
        self.keys[node] = key;
        Ok(())
    }
}

const ABSENT: usize = usize::MAX;

/// Array binary max-heap with a position index for increase-key.
#[derive(Debug, Clone)]
pub struct BinaryHeap {
    heap: Vec<usize>,
    pos: Vec<usize>,
    keys: Vec<f64>,
}

impl BinaryHeap {
    #[inline]
    fn rank(&self, slot: usize) -> (f64, usize) {
        let node = self.heap[slot];
        (self.keys[node], node)
    }

    #[inline]
    fn swap(&mut self, a: usize, b: usize) {
        self.heap.swap(a, b);
        self.pos[self.heap[a]] = a;
        self.pos[self.heap[b]] = b;
    }

    fn sift_up(&mut self, mut slot: usize) {
        while slot > 0 {
            let parent = (slot - 1) / 2;
            if !outranks(self.rank(slot), self.rank(parent)) {
                break;
            }
            self.swap(slot, parent);
            slot = parent;
        }
        self.debug_check_slot(slot, true, false);
    }

    fn sift_down(&mut self, mut slot: usize) {
        let len = self.heap.len();
        loop {
            let left = 2 * slot + 1;
            if left >= len {
                break;
            }
            let right = left + 1;
            let mut best = left;
            if right < len && outranks(self.rank(right), self.rank(left)) {
                best = right;
            }
            if !outranks(self.rank(best), self.rank(slot)) {
                break;
            }
            self.swap(slot, best);
            slot = best;
        }
        // During heapify the parents are not ordered yet.
        self.debug_check_slot(slot, false, true);
    }

    /// Parent dominance around the slot where a sift stopped.
    #[inline]
    fn debug_check_slot(&self, slot: usize, parent: bool, children: bool) {
        if cfg!(debug_assertions) && slot < self.heap.len() {
            if parent && slot > 0 {
                debug_assert!(!outranks(self.rank(slot), self.rank((slot - 1) / 2)));
            }
            for child in [2 * slot + 1, 2 * slot + 2] {
                if children && child < self.heap.len() {
                    debug_assert!(!outranks(self.rank(child), self.rank(slot)));
                }
            }
        }
    }

    /// Full structural check: parent dominance on every edge and a position
    /// index consistent with the array.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        for slot in 1..self.heap.len() {
            let parent = (slot - 1) / 2;
            if outranks(self.rank(slot), self.rank(parent)) {
                return Err(format!("slot {slot} outranks its parent {parent}"));
            }
        }
        for (slot, &node) in self.heap.iter().enumerate() {
            if self.pos[node] != slot {
                return Err(format!("position of node {node} is stale"));
            }
        }
        let queued = self.pos.iter().filter(|&&p| p != ABSENT).count();
        if queued != self.heap.len() {
            return Err("position index disagrees with heap size".into());
        }
        Ok(())
    }
}

impl MaxPriorityQueue for BinaryHeap {
    fn from_keys(keys: &[f64]) -> Self {
        let mut h = Self {
            heap: (0..keys.len()).collect(),
            pos: (0..keys.len()).collect(),
            keys: keys.to_vec(),
        };
        for slot in (0..keys.len() / 2).rev() {
            h.sift_down(slot);
        }
        h
    }

    fn len(&self) -> usize {
        self.heap.len()
    }

    fn contains(&self, node: usize) -> bool {
        self.pos.get(node).is_some_and(|&p| p != ABSENT)
    }

    fn key(&self, node: usize) -> Option<f64> {
        self.contains(node).then(|| self.keys[node])
    }

    fn extract_max(&mut self) -> Result<(usize, f64)> {
        if self.heap.is_empty() {
            return Err(HeapError::Empty);
        }
        let last = self.heap.len() - 1;
        self.swap(0, last);
        let node = self.heap.pop().expect("non-empty");
        self.pos[node] = ABSENT;
        if !self.heap.is_empty() {
            self.sift_down(0);
        }
        Ok((node, self.keys[node]))
    }

    fn increase_key(&mut self, node: usize, key: f64) -> Result<()> {
        check_increase(node, self.key(node), key)?;
        self.keys[node] = key;
        self.sift_up(self.pos[node]);
        Ok(())
    }
}

const NIL: usize = usize::MAX;

#[derive(Debug, Clone)]
struct FibNode {
    key: f64,
    parent: usize,
    child: usize,
    left: usize,
    right: usize,
    degree: usize,
    marked: bool,
    queued: bool,
}

/// Fibonacci max-heap. Nodes live in an arena indexed by node id; root and
/// sibling lists are circular and doubly linked.
#[derive(Debug, Clone)]
pub struct FibonacciHeap {
    nodes: Vec<FibNode>,
    max: usize,
    len: usize,
    scratch: Vec<usize>,
}

impl FibonacciHeap {
    #[inline]
    fn rank(&self, node: usize) -> (f64, usize) {
        (self.nodes[node].key, node)
    }

    /// Splices a detached node into the root list next to `max`.
    fn add_root(&mut self, x: usize) {
        self.nodes[x].parent = NIL;
        if self.max == NIL {
            self.nodes[x].left = x;
            self.nodes[x].right = x;
            self.max = x;
        } else {
            let m = self.max;
            let r = self.nodes[m].right;
            self.nodes[x].left = m;
            self.nodes[x].right = r;
            self.nodes[m].right = x;
            self.nodes[r].left = x;
            if outranks(self.rank(x), self.rank(m)) {
                self.max = x;
            }
        }
    }

    /// Unlinks `x` from whatever sibling list it is in.
    fn unlink(&mut self, x: usize) {
        let (l, r) = (self.nodes[x].left, self.nodes[x].right);
        self.nodes[l].right = r;
        self.nodes[r].left = l;
        self.nodes[x].left = x;
        self.nodes[x].right = x;
    }

    /// Makes root `y` a child of root `x`.
    fn link(&mut self, y: usize, x: usize) {
        self.unlink(y);
        self.nodes[y].parent = x;
        self.nodes[y].marked = false;
        let c = self.nodes[x].child;
        if c == NIL {
            self.nodes[x].child = y;
        } else {
            let r = self.nodes[c].right;
            self.nodes[y].left = c;
            self.nodes[y].right = r;
            self.nodes[c].right = y;
            self.nodes[r].left = y;
        }
        self.nodes[x].degree += 1;
    }

    fn consolidate(&mut self) {
        let start = self.max;
        if start == NIL {
            return;
        }
        let mut roots = std::mem::take(&mut self.scratch);
        roots.clear();
        let mut x = start;
        loop {
            roots.push(x);
            x = self.nodes[x].right;
            if x == start {
                break;
            }
        }
        let mut by_degree: Vec<usize> = Vec::new();
        for &root in &roots {
            let mut x = root;
            loop {
                let d = self.nodes[x].degree;
                if d >= by_degree.len() {
                    by_degree.resize(d + 1, NIL);
                }
                let y = by_degree[d];
                if y == NIL {
                    by_degree[d] = x;
                    break;
                }
                by_degree[d] = NIL;
                let (winner, loser) = if outranks(self.rank(y), self.rank(x)) {
                    (y, x)
                } else {
                    (x, y)
                };
                self.link(loser, winner);
                x = winner;
            }
        }
        self.scratch = roots;
        self.max = NIL;
        for x in by_degree.into_iter().filter(|&x| x != NIL) {
            self.nodes[x].left = x;
            self.nodes[x].right = x;
            self.add_root(x);
        }
    }

    fn cut(&mut self, x: usize, parent: usize) {
        if self.nodes[x].right == x {
            self.nodes[parent].child = NIL;
        } else if self.nodes[parent].child == x {
            self.nodes[parent].child = self.nodes[x].right;
        }
        self.unlink(x);
        self.nodes[parent].degree -= 1;
        self.nodes[x].marked = false;
        self.add_root(x);
    }

    fn cascading_cut(&mut self, mut y: usize) {
        loop {
            let parent = self.nodes[y].parent;
            if parent == NIL {
                return;
            }
            if !self.nodes[y].marked {
                self.nodes[y].marked = true;
                return;
            }
            self.cut(y, parent);
            y = parent;
        }
    }

    fn siblings(&self, first: usize) -> Vec<usize> {
        let mut out = Vec::new();
        if first == NIL {
            return out;
        }
        let mut x = first;
        loop {
            out.push(x);
            x = self.nodes[x].right;
            if x == first {
                return out;
            }
        }
    }

    /// Heap order on every parent/child pair, consistent degrees and links,
    /// and `max` at the top-ranked root.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let roots = self.siblings(self.max);
        let mut count = 0;
        let mut stack: Vec<usize> = roots.clone();
        for &r in &roots {
            if self.nodes[r].parent != NIL {
                return Err(format!("root {r} has a parent"));
            }
            if outranks(self.rank(r), self.rank(self.max)) {
                return Err(format!("root {r} outranks max {}", self.max));
            }
        }
        while let Some(x) = stack.pop() {
            count += 1;
            if !self.nodes[x].queued {
                return Err(format!("node {x} reachable but not queued"));
            }
            let right = self.nodes[x].right;
            if self.nodes[right].left != x {
                return Err(format!("broken sibling link at {x}"));
            }
            let children = self.siblings(self.nodes[x].child);
            if children.len() != self.nodes[x].degree {
                return Err(format!("degree of {x} is stale"));
            }
            for c in children {
                if self.nodes[c].parent != x {
                    return Err(format!("child {c} does not point back to {x}"));
                }
                if outranks(self.rank(c), self.rank(x)) {
                    return Err(format!("child {c} outranks parent {x}"));
                }
                stack.push(c);
            }
        }
        if count != self.len {
            return Err(format!("{count} reachable nodes but len {}", self.len));
        }
        Ok(())
    }

    /// Root degrees, for checking that consolidation leaves one root per
    /// degree.
    pub fn root_degrees(&self) -> Vec<usize> {
        self.siblings(self.max)
            .into_iter()
            .map(|r| self.nodes[r].degree)
            .collect()
    }
}

impl MaxPriorityQueue for FibonacciHeap {
    fn from_keys(keys: &[f64]) -> Self {
        let mut h = Self {
            nodes: keys
                .iter()
                .map(|&key| FibNode {
                    key,
                    parent: NIL,
                    child: NIL,
                    left: NIL,
                    right: NIL,
                    degree: 0,
                    marked: false,
                    queued: true,
                })
                .collect(),
            max: NIL,
            len: keys.len(),
            scratch: Vec::new(),
        };
        for x in 0..keys.len() {
            h.add_root(x);
        }
        h
    }

    fn len(&self) -> usize {
        self.len
    }

    fn contains(&self, node: usize) -> bool {
        self.nodes.get(node).is_some_and(|n| n.queued)
    }

    fn key(&self, node: usize) -> Option<f64> {
        self.contains(node).then(|| self.nodes[node].key)
    }

    fn extract_max(&mut self) -> Result<(usize, f64)> {
        let z = self.max;
        if z == NIL {
            return Err(HeapError::Empty);
        }
        for c in self.siblings(self.nodes[z].child) {
            self.nodes[c].parent = NIL;
            self.nodes[c].marked = false;
            let zr = self.nodes[z].right;
            self.nodes[c].left = z;
            self.nodes[c].right = zr;
            self.nodes[zr].left = c;
            self.nodes[z].right = c;
        }
        self.nodes[z].child = NIL;
        self.nodes[z].degree = 0;
        let next = self.nodes[z].right;
        self.unlink(z);
        self.nodes[z].queued = false;
        self.len -= 1;
        if next == z {
            self.max = NIL;
        } else {
            self.max = next;
            self.consolidate();
        }
        Ok((z, self.nodes[z].key))
    }

    fn increase_key(&mut self, node: usize, key: f64) -> Result<()> {
        check_increase(node, self.key(node), key)?;
        self.nodes[node].key = key;
        let parent = self.nodes[node].parent;
        if parent != NIL && outranks(self.rank(node), self.rank(parent)) {
            self.cut(node, parent);
            self.cascading_cut(parent);
        } else if parent == NIL && outranks(self.rank(node), self.rank(self.max)) {
            self.max = node;
        }
        Ok(())
    }
}

/// Which priority queue backs Dijkstra's algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueueKind {
    Naive,
    BinaryHeap,
    FibonacciHeap,
}

impl QueueKind {
    pub const ALL: [QueueKind; 3] = [QueueKind::Naive, QueueKind::BinaryHeap, QueueKind::FibonacciHeap];

    pub fn name(self) -> &'static str {
        match self {
            QueueKind::Naive => "naive",
            QueueKind::BinaryHeap => "binary-heap",
            QueueKind::FibonacciHeap => "fibonacci-heap",
        }
    }
}

impl std::str::FromStr for QueueKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        QueueKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown queue `{s}` (expected naive, binary-heap or fibonacci-heap)"))
    }
}
