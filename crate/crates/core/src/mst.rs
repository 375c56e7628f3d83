//! Minimum spanning tree over the block graph (Prim).

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blocks::{BlockGraph, BlockId};
use crate::grid::Direction;

#[derive(Debug, Error, PartialEq)]
pub enum TreeError {
    #[error("root block {0} does not exist")]
    UnknownRoot(BlockId),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEdge {
    pub parent: BlockId,
    pub child: BlockId,
    /// Side of `parent` on which `child` lies.
    pub direction: Direction,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanningTree {
    pub root: BlockId,
    /// In insertion order.
    pub edges: Vec<TreeEdge>,
    pub total_weight: f64,
    /// Blocks in the root's component, ascending.
    pub reached: Vec<BlockId>,
    /// Blocks not connected to the root, ascending.
    pub unreachable: Vec<BlockId>,
}

impl SpanningTree {
    /// `adjacency[b][d]`: tree neighbours of `b` on side `d`, unsorted.
    pub fn adjacency(&self, n_blocks: usize) -> Vec<[Vec<BlockId>; 4]> {
        let mut adj: Vec<[Vec<BlockId>; 4]> = vec![Default::default(); n_blocks];
        for e in &self.edges {
            adj[e.parent][e.direction.index()].push(e.child);
            adj[e.child][e.direction.opposite().index()].push(e.parent);
        }
        adj
    }
}

#[derive(Debug, PartialEq)]
struct Candidate {
    weight: f64,
    lo: BlockId,
    hi: BlockId,
    direction: Direction,
    from: BlockId,
    to: BlockId,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight
            .total_cmp(&other.weight)
            .then(self.lo.cmp(&other.lo))
            .then(self.hi.cmp(&other.hi))
            .then(self.direction.cmp(&other.direction))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Prim's algorithm from `root` over its connected component.
///
/// Ties are broken by (weight, smaller endpoint id, larger endpoint id,
/// direction TOP < LEFT < BOTTOM < RIGHT), so equal inputs always yield the
/// same tree.
pub fn prim_mst(graph: &BlockGraph, root: BlockId) -> Result<SpanningTree, TreeError> {
    let n = graph.len();
    if root >= n {
        return Err(TreeError::UnknownRoot(root));
    }
    // adjacency with edge weights, built once
    let mut adj: Vec<Vec<(BlockId, Direction, f64)>> = vec![Vec::new(); n];
    for e in &graph.edges {
        adj[e.a].push((e.b, e.direction, e.weight));
        adj[e.b].push((e.a, e.direction.opposite(), e.weight));
    }

    let mut in_tree = vec![false; n];
    let mut heap = BinaryHeap::new();
    let push_from = |heap: &mut BinaryHeap<Reverse<Candidate>>, in_tree: &[bool], v: BlockId| {
        for &(w, direction, weight) in &adj[v] {
            if !in_tree[w] {
                heap.push(Reverse(Candidate { weight, lo: v.min(w), hi: v.max(w), direction, from: v, to: w }));
            }
        }
    };

    in_tree[root] = true;
    push_from(&mut heap, &in_tree, root);
    let mut edges = Vec::new();
    let mut total_weight = 0.0;
    while let Some(Reverse(c)) = heap.pop() {
        if in_tree[c.to] {
            continue;
        }
        in_tree[c.to] = true;
        total_weight += c.weight;
        edges.push(TreeEdge { parent: c.from, child: c.to, direction: c.direction, weight: c.weight });
        push_from(&mut heap, &in_tree, c.to);
    }
    let (reached, unreachable): (Vec<BlockId>, Vec<BlockId>) = (0..n).partition(|&b| in_tree[b]);
    Ok(SpanningTree { root, edges, total_weight, reached, unreachable })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::{Block, BlockEdge};
    use crate::geometry::Vec2;
    use crate::grid::{CellIndex, CellState, GridMap};

    /// A graph with arbitrary edges; block geometry is irrelevant to Prim.
    pub(crate) fn abstract_graph(n: usize, edges: &[(usize, usize, f64)]) -> BlockGraph {
        let grid = GridMap::filled(n, 1, 1.0, Vec2::ZERO, CellState::Free);
        let blocks = (0..n).map(|i| Block::new(i, CellIndex::new(i, 0), 1, &grid)).collect();
        let edges = edges
            .iter()
            .map(|&(a, b, weight)| BlockEdge { a, b, direction: Direction::Right, weight })
            .collect();
        BlockGraph { blocks, edges, neighbors: vec![Default::default(); n] }
    }

    #[test]
    fn triangle_takes_two_lightest() {
        let g = abstract_graph(3, &[(0, 1, 1.0), (1, 2, 2.0), (0, 2, 3.0)]);
        let t = prim_mst(&g, 0).unwrap();
        assert_eq!(t.total_weight, 3.0);
        assert_eq!(t.edges.len(), 2);
    }

    #[test]
    fn single_node() {
        let g = abstract_graph(1, &[]);
        let t = prim_mst(&g, 0).unwrap();
        assert!(t.edges.is_empty());
        assert_eq!(t.total_weight, 0.0);
    }

    #[test]
    fn disconnected_component_is_reported() {
        let g = abstract_graph(4, &[(0, 1, 1.0), (2, 3, 1.0)]);
        let t = prim_mst(&g, 1).unwrap();
        assert_eq!(t.reached, vec![0, 1]);
        assert_eq!(t.unreachable, vec![2, 3]);
        assert_eq!(prim_mst(&g, 9), Err(TreeError::UnknownRoot(9)));
    }

    #[test]
    fn equal_weights_are_deterministic() {
        let g = abstract_graph(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]);
        let a = prim_mst(&g, 0).unwrap();
        let b = prim_mst(&g, 0).unwrap();
        assert_eq!(a, b);
        let pairs: Vec<(usize, usize)> = a.edges.iter().map(|e| (e.parent, e.child)).collect();
        assert_eq!(pairs, vec![(0, 1), (0, 3), (1, 2)]);
    }
}
