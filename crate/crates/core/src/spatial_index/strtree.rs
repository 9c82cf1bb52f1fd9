use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::Point2;
use crate::error::{Error, Result};

pub const DEFAULT_NODE_CAPACITY: usize = 16;

/// Axis-aligned rectangle with closed bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bbox {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Bbox {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Result<Self> {
        let finite = [min_x, min_y, max_x, max_y].iter().all(|v| v.is_finite());
        if !finite || min_x > max_x || min_y > max_y {
            return Err(Error::invalid(format!(
                "invalid bbox [{min_x}, {min_y}, {max_x}, {max_y}]"
            )));
        }
        Ok(Self {
            min_x,
            min_y,
            max_x,
            max_y,
        })
    }

    pub fn from_point(p: Point2) -> Self {
        Self {
            min_x: p.x,
            min_y: p.y,
            max_x: p.x,
            max_y: p.y,
        }
    }

    pub fn from_points(points: &[Point2]) -> Self {
        let mut b = Self::from_point(points[0]);
        for p in &points[1..] {
            b = b.union(&Self::from_point(*p));
        }
        b
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    pub fn center(&self) -> Point2 {
        Point2::new((self.min_x + self.max_x) * 0.5, (self.min_y + self.max_y) * 0.5)
    }

    pub fn intersects(&self, other: &Bbox) -> bool {
        self.min_x <= other.max_x && other.min_x <= self.max_x && self.min_y <= other.max_y && other.min_y <= self.max_y
    }

    pub fn contains(&self, other: &Bbox) -> bool {
        self.min_x <= other.min_x && self.min_y <= other.min_y && self.max_x >= other.max_x && self.max_y >= other.max_y
    }

    pub fn contains_point(&self, p: Point2) -> bool {
        p.x >= self.min_x && p.x <= self.max_x && p.y >= self.min_y && p.y <= self.max_y
    }

    pub fn union(&self, other: &Bbox) -> Bbox {
        Bbox {
            min_x: self.min_x.min(other.min_x),
            min_y: self.min_y.min(other.min_y),
            max_x: self.max_x.max(other.max_x),
            max_y: self.max_y.max(other.max_y),
        }
    }

    /// Squared distance from `p` to the closest point of the rectangle.
    pub fn distance2_to(&self, p: Point2) -> f64 {
        let dx = (self.min_x - p.x).max(0.0).max(p.x - self.max_x);
        let dy = (self.min_y - p.y).max(0.0).max(p.y - self.max_y);
        dx * dx + dy * dy
    }
}

#[derive(Debug, Clone)]
enum Children {
    /// Indices into `StrTree::items`.
    Items(Vec<usize>),
    /// Indices into `StrTree::nodes`.
    Nodes(Vec<usize>),
}

#[derive(Debug, Clone)]
struct Node {
    bbox: Bbox,
    children: Children,
}

/// Sort-tile-recursive packed R-tree. Immutable once built.
#[derive(Debug, Clone)]
pub struct StrTree {
    node_capacity: usize,
    items: Vec<(Bbox, u64)>,
    nodes: Vec<Node>,
    root: usize,
    height: usize,
}

/// Groups `entries` into runs of at most `capacity` using STR tiling.
fn str_partition(mut entries: Vec<(Bbox, usize)>, capacity: usize) -> Vec<Vec<(Bbox, usize)>> {
    let n = entries.len();
    let leaf_count = n.div_ceil(capacity);
    let slice_count = (leaf_count as f64).sqrt().ceil() as usize;
    let slice_len = slice_count * capacity;

    let by_x = |a: &(Bbox, usize), b: &(Bbox, usize)| {
        let (ca, cb) = (a.0.center(), b.0.center());
        ca.x.total_cmp(&cb.x).then(a.1.cmp(&b.1))
    };
    let by_y = |a: &(Bbox, usize), b: &(Bbox, usize)| {
        let (ca, cb) = (a.0.center(), b.0.center());
        ca.y.total_cmp(&cb.y).then(a.1.cmp(&b.1))
    };

    entries.sort_by(by_x);
    let mut groups = Vec::with_capacity(leaf_count);
    for slice in entries.chunks_mut(slice_len) {
        slice.sort_by(by_y);
        for run in slice.chunks(capacity) {
            groups.push(run.to_vec());
        }
    }
    groups
}

fn bbox_of(entries: &[(Bbox, usize)]) -> Bbox {
    entries[1..].iter().fold(entries[0].0, |acc, (b, _)| acc.union(b))
}

impl StrTree {
    pub fn build(items: Vec<(Bbox, u64)>, node_capacity: usize) -> Result<Self> {
        if node_capacity < 2 {
            return Err(Error::invalid("node capacity must be at least 2"));
        }
        if items.is_empty() {
            return Err(Error::invalid("cannot build an STR-tree from zero items"));
        }

        let mut nodes = Vec::new();
        let entries: Vec<(Bbox, usize)> = items.iter().enumerate().map(|(i, (b, _))| (*b, i)).collect();
        let mut level: Vec<(Bbox, usize)> = str_partition(entries, node_capacity)
            .into_iter()
            .map(|group| {
                let bbox = bbox_of(&group);
                nodes.push(Node {
                    bbox,
                    children: Children::Items(group.iter().map(|(_, i)| *i).collect()),
                });
                (bbox, nodes.len() - 1)
            })
            .collect();
        let mut height = 1;

        while level.len() > 1 {
            level = str_partition(level, node_capacity)
                .into_iter()
                .map(|group| {
                    let bbox = bbox_of(&group);
                    nodes.push(Node {
                        bbox,
                        children: Children::Nodes(group.iter().map(|(_, i)| *i).collect()),
                    });
                    (bbox, nodes.len() - 1)
                })
                .collect();
            height += 1;
        }

        Ok(Self {
            node_capacity,
            root: level[0].1,
            items,
            nodes,
            height,
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn node_capacity(&self) -> usize {
        self.node_capacity
    }

    /// Number of node levels; a tree whose root is a leaf has height 1.
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn root_bbox(&self) -> Bbox {
        self.nodes[self.root].bbox
    }

    pub fn items(&self) -> &[(Bbox, u64)] {
        &self.items
    }

    /// Ids of every item whose box intersects `query`, ascending.
    pub fn query_bbox(&self, query: &Bbox) -> Vec<u64> {
        let mut out = Vec::new();
        let mut stack = vec![self.root];
        while let Some(idx) = stack.pop() {
            let node = &self.nodes[idx];
            if !node.bbox.intersects(query) {
                continue;
            }
            match &node.children {
                Children::Items(items) => out.extend(
                    items
                        .iter()
                        .filter(|&&i| self.items[i].0.intersects(query))
                        .map(|&i| self.items[i].1),
                ),
                Children::Nodes(children) => stack.extend(children.iter().copied()),
            }
        }
        out.sort_unstable();
        out
    }

    /// Id whose box center is closest to `p` in planar distance; ties go to
    /// the smallest id.
    pub fn nearest(&self, p: Point2) -> u64 {
        #[derive(PartialEq)]
        struct Pending(f64, usize);
        impl Eq for Pending {}
        impl PartialOrd for Pending {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }
        impl Ord for Pending {
            // min-heap on distance
            fn cmp(&self, other: &Self) -> Ordering {
                other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
            }
        }

        let mut best: Option<(f64, u64)> = None;
        let mut heap = BinaryHeap::new();
        heap.push(Pending(self.nodes[self.root].bbox.distance2_to(p), self.root));

        while let Some(Pending(bound, idx)) = heap.pop() {
            if let Some((d, _)) = best {
                if bound > d {
                    break;
                }
            }
            match &self.nodes[idx].children {
                Children::Items(items) => {
                    for &i in items {
                        let (bbox, id) = self.items[i];
                        let c = bbox.center();
                        let d = (c.x - p.x) * (c.x - p.x) + (c.y - p.y) * (c.y - p.y);
                        let better = match best {
                            None => true,
                            Some((bd, bid)) => d < bd || (d == bd && id < bid),
                        };
                        if better {
                            best = Some((d, id));
                        }
                    }
                }
                Children::Nodes(children) => {
                    for &c in children {
                        heap.push(Pending(self.nodes[c].bbox.distance2_to(p), c));
                    }
                }
            }
        }
        best.expect("tree is never empty").1
    }

    /// Audits the structural invariants: parents contain children, leaf
    /// occupancy is within capacity and every item appears exactly once.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let mut seen = vec![0usize; self.items.len()];
        let mut stack = vec![(self.root, 1usize)];
        while let Some((idx, depth)) = stack.pop() {
            let node = &self.nodes[idx];
            match &node.children {
                Children::Items(items) => {
                    if items.is_empty() || items.len() > self.node_capacity {
                        return Err(format!("leaf {idx} holds {} items", items.len()));
                    }
                    if depth != self.height {
                        return Err(format!("leaf {idx} at depth {depth}, height {}", self.height));
                    }
                    for &i in items {
                        if !node.bbox.contains(&self.items[i].0) {
                            return Err(format!("leaf {idx} does not contain item {i}"));
                        }
                        seen[i] += 1;
                    }
                }
                Children::Nodes(children) => {
                    if children.is_empty() || children.len() > self.node_capacity {
                        return Err(format!("node {idx} has {} children", children.len()));
                    }
                    for &c in children {
                        if !node.bbox.contains(&self.nodes[c].bbox) {
                            return Err(format!("node {idx} does not contain child {c}"));
                        }
                        stack.push((c, depth + 1));
                    }
                }
            }
        }
        match seen.iter().position(|&n| n != 1) {
            Some(i) => Err(format!("item {i} reachable {} times", seen[i])),
            None => Ok(()),
        }
    }

    /// Item occupancy of every leaf, in node order.
    pub fn leaf_sizes(&self) -> Vec<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match &n.children {
                Children::Items(items) => Some(items.len()),
                Children::Nodes(_) => None,
            })
            .collect()
    }
}
