use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::mask_io::SegmentMask;
use crate::scalar::Weight;

use super::HierarchyError;

/// `|s1 ∩ s2| / |s2|`.
pub fn overlap_metric<W: Weight>(s1: &SegmentMask, s2: &SegmentMask) -> W {
    W::ratio(s1.bitmap().intersection_count(s2.bitmap()), s2.pixel_count())
}

/// Full overlap matrix, `m[i][j] = overlap_metric(segments[i], segments[j])`.
pub fn overlap_matrix<W: Weight>(segments: &[&SegmentMask]) -> Vec<Vec<W>> {
    segments
        .iter()
        .map(|a| segments.iter().map(|b| overlap_metric(a, b)).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyEdge<W> {
    pub parent: u64,
    pub child: u64,
    pub weight: W,
}

/// Tree over segment ids hanging from a virtual root (depth 0).
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyGraph<W> {
    parent: BTreeMap<u64, Option<u64>>,
    children: BTreeMap<u64, Vec<u64>>,
    roots: Vec<u64>,
    weight: BTreeMap<u64, W>,
    depth: BTreeMap<u64, usize>,
    depth_index: BTreeMap<usize, Vec<u64>>,
}

impl<W: Weight> HierarchyGraph<W> {
    /// Segment ids in ascending order.
    pub fn nodes(&self) -> impl Iterator<Item = u64> + '_ {
        self.parent.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn contains(&self, id: u64) -> bool {
        self.parent.contains_key(&id)
    }

    /// Children of the virtual root, ascending.
    pub fn root_children(&self) -> &[u64] {
        &self.roots
    }

    /// Children of `id`, ascending. Empty for leaves and unknown ids.
    pub fn children(&self, id: u64) -> &[u64] {
        self.children.get(&id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn has_children(&self, id: u64) -> bool {
        !self.children(id).is_empty()
    }

    /// `Some(None)` for nodes hanging from the root, `None` for unknown ids.
    pub fn parent(&self, id: u64) -> Option<Option<u64>> {
        self.parent.get(&id).copied()
    }

    /// Overlap weight of the edge into `id`; `None` for root children.
    pub fn edge_weight(&self, id: u64) -> Option<&W> {
        self.weight.get(&id)
    }

    pub fn depth(&self, id: u64) -> Option<usize> {
        self.depth.get(&id).copied()
    }

    /// Segment ids at `depth` (root children are depth 1), ascending.
    pub fn nodes_at_depth(&self, depth: usize) -> &[u64] {
        self.depth_index
            .get(&depth)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn max_depth(&self) -> usize {
        self.depth_index.keys().next_back().copied().unwrap_or(0)
    }

    /// Weighted segment-to-segment edges ordered by child id.
    pub fn edges(&self) -> Vec<HierarchyEdge<W>> {
        self.weight
            .iter()
            .map(|(&child, w)| HierarchyEdge {
                parent: self.parent[&child].expect("weighted edges have a segment parent"),
                child,
                weight: w.clone(),
            })
            .collect()
    }
}

struct BestPath<W> {
    weight: W,
    len: usize,
    seq: Vec<u64>,
}

fn compare_paths<W: Weight>(a: &BestPath<W>, b: &BestPath<W>) -> Ordering {
    // Greater is better: heavier, then longer, then lexicographically smaller.
    a.weight
        .partial_cmp(&b.weight)
        .unwrap_or(Ordering::Equal)
        .then(a.len.cmp(&b.len))
        .then_with(|| b.seq.cmp(&a.seq))
}

/// Builds the segment tree.
///
/// Candidate edges `i → j` are all ordered pairs with overlap ratio
/// `|s_i ∩ s_j| / |s_j| ≥ t`. Self-loops are dropped, and mutual pairs are
/// oriented from the larger segment to the smaller (equal sizes: lower id is
/// the parent), which leaves a DAG. Each node then keeps the single incoming
/// edge on its best root path: maximal total weight, then maximal length,
/// then lexicographically smallest id sequence. Nodes without candidate
/// parents hang from the root.
pub fn build_hierarchy<W: Weight>(
    segments: &[&SegmentMask],
    t: W,
) -> Result<HierarchyGraph<W>, HierarchyError> {
    if !(t > W::zero() && t <= W::ratio(1, 1)) {
        return Err(HierarchyError::InvalidThreshold(t.to_f64()));
    }
    if segments.is_empty() {
        return Err(HierarchyError::DegenerateSegmentation(
            "no segments to build a hierarchy from".into(),
        ));
    }

    let mut order: Vec<usize> = (0..segments.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(segments[i].pixel_count()), segments[i].id()));

    // incoming[j] = (parent position in `order`, weight)
    let n = order.len();
    let mut incoming: Vec<Vec<(usize, W)>> = vec![Vec::new(); n];
    for (pi, &i) in order.iter().enumerate() {
        for (ci, &j) in order.iter().enumerate().skip(pi + 1) {
            let inter = segments[i].bitmap().intersection_count(segments[j].bitmap());
            if inter == 0 {
                continue;
            }
            let m = W::ratio(inter, segments[j].pixel_count());
            if m >= t {
                incoming[ci].push((pi, m));
            }
        }
    }

    let mut best: Vec<BestPath<W>> = Vec::with_capacity(n);
    let mut chosen: Vec<Option<(usize, W)>> = Vec::with_capacity(n);
    for ci in 0..n {
        let id = segments[order[ci]].id();
        let mut winner: Option<(BestPath<W>, usize, W)> = None;
        for (pi, w) in &incoming[ci] {
            let prefix = &best[*pi];
            let mut seq = prefix.seq.clone();
            seq.push(id);
            let candidate = BestPath {
                weight: prefix.weight.clone() + w.clone(),
                len: prefix.len + 1,
                seq,
            };
            let better = match &winner {
                None => true,
                Some((cur, _, _)) => compare_paths(&candidate, cur) == Ordering::Greater,
            };
            if better {
                winner = Some((candidate, *pi, w.clone()));
            }
        }
        match winner {
            Some((path, pi, w)) => {
                best.push(path);
                chosen.push(Some((pi, w)));
            }
            None => {
                best.push(BestPath {
                    weight: W::zero(),
                    len: 1,
                    seq: vec![id],
                });
                chosen.push(None);
            }
        }
    }

    let mut graph = HierarchyGraph {
        parent: BTreeMap::new(),
        children: BTreeMap::new(),
        roots: Vec::new(),
        weight: BTreeMap::new(),
        depth: BTreeMap::new(),
        depth_index: BTreeMap::new(),
    };
    for ci in 0..n {
        let id = segments[order[ci]].id();
        match &chosen[ci] {
            Some((pi, w)) => {
                let pid = segments[order[*pi]].id();
                graph.parent.insert(id, Some(pid));
                graph.children.entry(pid).or_default().push(id);
                graph.weight.insert(id, w.clone());
            }
            None => {
                graph.parent.insert(id, None);
                graph.roots.push(id);
            }
        }
        let depth = best[ci].len;
        graph.depth.insert(id, depth);
        graph.depth_index.entry(depth).or_default().push(id);
    }
    graph.roots.sort_unstable();
    for v in graph.children.values_mut().chain(graph.depth_index.values_mut()) {
        v.sort_unstable();
    }
    Ok(graph)
}
