//! Closed coverage circuit around the spanning tree.
//!
//! Every block in the tree contributes its four quadrant centers. Each side
//! of a block is handled by the number of tree neighbours it has there:
//!
//! 1. none: the two quadrant centers on that side are joined;
//! 2. one: the facing quadrant centers of both blocks are joined, once per
//!    tree edge;
//! 3. several (always smaller blocks): the outer neighbours are joined to the
//!    block's side quadrants and consecutive neighbours are joined through a
//!    joint point inside the block.
//!
//! Where joined centers are not level with each other (blocks of different
//! sizes), a transit waypoint is placed on the shared block edge so every
//! segment stays inside one block.

use std::collections::HashSet;

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blocks::{sort_along_side, Block, BlockId, Part};
use crate::geometry::{segments_intersect, signed_area, Segment, Vec2};
use crate::grid::{CellState, Direction, GridMap};
use crate::mst::SpanningTree;

#[derive(Debug, Error, PartialEq)]
pub enum PathError {
    #[error("tree and blocks disagree: {0}")]
    Integrity(String),
    #[error("coverage segments do not close into one loop: {0}")]
    Construction(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WaypointKind {
    Part { block: BlockId, part: Part },
    Joint { block: BlockId },
    Transit { from: BlockId, to: BlockId },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub point: Vec2,
    /// Size (in cells) of the block this waypoint sits in; transit points on
    /// a block edge carry the smaller of the two blocks.
    pub block_size: usize,
    pub kind: WaypointKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveragePath {
    pub waypoints: Vec<Waypoint>,
    pub closed: bool,
}

impl CoveragePath {
    pub fn open(points: &[Vec2], block_size: usize) -> Self {
        Self::from_points(points, block_size, false)
    }

    pub fn closed_loop(points: &[Vec2], block_size: usize) -> Self {
        Self::from_points(points, block_size, true)
    }

    fn from_points(points: &[Vec2], block_size: usize, closed: bool) -> Self {
        let waypoints = points
            .iter()
            .map(|&point| Waypoint { point, block_size, kind: WaypointKind::Transit { from: 0, to: 0 } })
            .collect();
        Self { waypoints, closed }
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = Vec2> + '_ {
        self.waypoints.iter().map(|w| w.point)
    }

    /// Directed segments in travel order, including the closing one.
    pub fn segments(&self) -> Vec<Segment> {
        let n = self.waypoints.len();
        if n < 2 {
            return Vec::new();
        }
        let count = if self.closed { n } else { n - 1 };
        (0..count).map(|k| Segment::new(self.waypoints[k].point, self.waypoints[(k + 1) % n].point)).collect()
    }

    /// Block size governing segment `k` (the narrower of its endpoints).
    pub fn segment_block_size(&self, k: usize) -> usize {
        let n = self.waypoints.len();
        self.waypoints[k].block_size.min(self.waypoints[(k + 1) % n].block_size)
    }

    pub fn length(&self) -> f64 {
        self.segments().iter().map(Segment::length).sum()
    }

    /// First pair of non-adjacent segments that touch, if any.
    pub fn find_crossing(&self) -> Option<(usize, usize)> {
        let segs = self.segments();
        let n = segs.len();
        for a in 0..n {
            for b in a + 1..n {
                let adjacent = b == a + 1 || (self.closed && a == 0 && b == n - 1);
                if adjacent {
                    // consecutive segments may only share their joint vertex
                    let (s, t) = if b == a + 1 { (segs[a], segs[b]) } else { (segs[b], segs[a]) };
                    let u = s.a - s.b;
                    let v = t.b - t.a;
                    if u.cross(v) == 0.0 && u.dot(v) > 0.0 {
                        return Some((a, b));
                    }
                    continue;
                }
                if segments_intersect(segs[a], segs[b]) {
                    return Some((a, b));
                }
            }
        }
        None
    }

    /// First segment passing through the interior of an obstacle cell.
    pub fn find_obstacle_crossing(&self, grid: &GridMap) -> Option<usize> {
        self.segments().iter().position(|s| {
            let lo = Vec2::new(s.a.x.min(s.b.x), s.a.y.min(s.b.y));
            let hi = Vec2::new(s.a.x.max(s.b.x), s.a.y.max(s.b.y));
            let (Some(c0), Some(c1)) = (grid.locate(lo), grid.locate(hi)) else {
                return true;
            };
            (c0.j..=c1.j).any(|j| {
                (c0.i..=c1.i).any(|i| {
                    let c = crate::grid::CellIndex::new(i, j);
                    grid.get(c) == CellState::Obstacle && s.intersects_open_rect(&grid.cell_rect(c))
                })
            })
        })
    }
}

/// Joint waypoint for two tree neighbours `a`, `b` on `side` of `block`.
///
/// Intersection of the line through the neighbours' midpoint and the block
/// center with the line through the block's quadrant centers nearest that
/// side (a quarter side length in from the edge). Falls back to the middle of
/// those two quadrant centers when the first line is degenerate or parallel.
pub fn joint_point(block: &Block, a: Vec2, b: Vec2, side: Direction) -> Vec2 {
    let middle = (a + b) * 0.5;
    let center = block.center;
    let q = block.side / 4.0;
    let (p0, p1) = Part::on_side(side);
    let fallback = (block.part(p0) + block.part(p1)) * 0.5;
    let eps = 1e-12 * block.side.max(1.0);
    if side.is_horizontal() {
        let x = if side == Direction::Left { block.min().x + q } else { block.max().x - q };
        let dx = center.x - middle.x;
        if dx.abs() <= eps {
            warn!("degenerate joint line at block {}; using side midpoint", block.id);
            return fallback;
        }
        Vec2::new(x, middle.y + (x - middle.x) * (center.y - middle.y) / dx)
    } else {
        let y = if side == Direction::Bottom { block.min().y + q } else { block.max().y - q };
        let dy = center.y - middle.y;
        if dy.abs() <= eps {
            warn!("degenerate joint line at block {}; using side midpoint", block.id);
            return fallback;
        }
        Vec2::new(middle.x + (y - middle.y) * (center.x - middle.x) / dy, y)
    }
}

/// Quadrants adjacent to `side`, in ascending order along the side.
fn near_parts(side: Direction) -> (Part, Part) {
    match side {
        Direction::Left => (Part::BottomLeft, Part::TopLeft),
        Direction::Right => (Part::BottomRight, Part::TopRight),
        Direction::Top => (Part::TopLeft, Part::TopRight),
        Direction::Bottom => (Part::BottomLeft, Part::BottomRight),
    }
}

fn along(p: Vec2, side: Direction) -> f64 {
    if side.is_horizontal() {
        p.y
    } else {
        p.x
    }
}

/// Point on the edge between `block` and its neighbour on `side`, level with `p`.
fn on_edge(block: &Block, side: Direction, p: Vec2) -> Vec2 {
    match side {
        Direction::Left => Vec2::new(block.min().x, p.y),
        Direction::Right => Vec2::new(block.max().x, p.y),
        Direction::Bottom => Vec2::new(p.x, block.min().y),
        Direction::Top => Vec2::new(p.x, block.max().y),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct NodeId(usize);

struct Builder<'a> {
    blocks: &'a [Block],
    nodes: Vec<Waypoint>,
    links: Vec<(NodeId, NodeId)>,
    /// First node index of each block's quadrant centers.
    base: Vec<Option<usize>>,
}

impl<'a> Builder<'a> {
    fn part(&self, b: BlockId, p: Part) -> NodeId {
        NodeId(self.base[b].expect("block in tree") + p.index())
    }

    fn add(&mut self, point: Vec2, block_size: usize, kind: WaypointKind) -> NodeId {
        self.nodes.push(Waypoint { point, block_size, kind });
        NodeId(self.nodes.len() - 1)
    }

    fn link(&mut self, a: NodeId, b: NodeId) {
        self.links.push((a, b));
    }

    fn point(&self, n: NodeId) -> Vec2 {
        self.nodes[n.0].point
    }

    /// Joins a quadrant center of `b` to the facing one of its neighbour `n`
    /// on `side`, adding a transit point on the shared edge when they are not level.
    fn join_facing(&mut self, b: BlockId, side: Direction, from: NodeId, n: BlockId, to: NodeId) {
        let (pb, pn) = (self.point(from), self.point(to));
        let scale = self.blocks[b].side.max(self.blocks[n].side);
        if (along(pb, side) - along(pn, side)).abs() <= 1e-9 * scale {
            self.link(from, to);
            return;
        }
        let small = if self.blocks[n].size_cells < self.blocks[b].size_cells { pn } else { pb };
        let transit = on_edge(&self.blocks[b], side, small);
        let size = self.blocks[b].size_cells.min(self.blocks[n].size_cells);
        let t = self.add(transit, size, WaypointKind::Transit { from: b, to: n });
        self.link(from, t);
        self.link(t, to);
    }
}

/// Builds the closed coverage loop around `tree`, counterclockwise, starting
/// at the waypoint closest to `start`.
pub fn build_path(blocks: &[Block], tree: &SpanningTree, start: Vec2) -> Result<CoveragePath, PathError> {
    let n_blocks = blocks.len();
    if let Some((k, b)) = blocks.iter().enumerate().find(|(k, b)| b.id != *k) {
        return Err(PathError::Integrity(format!("block at position {k} has id {}", b.id)));
    }
    if tree.root >= n_blocks {
        return Err(PathError::Integrity(format!("root {} out of range", tree.root)));
    }
    for e in &tree.edges {
        if e.parent >= n_blocks || e.child >= n_blocks {
            return Err(PathError::Integrity(format!("edge {}-{} out of range", e.parent, e.child)));
        }
        if !touches_on(&blocks[e.parent], &blocks[e.child], e.direction) {
            return Err(PathError::Integrity(format!(
                "block {} is not on the {:?} side of block {}",
                e.child, e.direction, e.parent
            )));
        }
    }

    let mut adj = tree.adjacency(n_blocks);
    for lists in adj.iter_mut() {
        for d in Direction::ALL {
            sort_along_side(&mut lists[d.index()], blocks, d);
        }
    }
    let mut members: Vec<BlockId> = tree.edges.iter().flat_map(|e| [e.parent, e.child]).collect();
    members.push(tree.root);
    members.sort_unstable();
    members.dedup();

    let mut builder = Builder { blocks, nodes: Vec::new(), links: Vec::new(), base: vec![None; n_blocks] };
    for &b in &members {
        builder.base[b] = Some(builder.nodes.len());
        for p in Part::ALL {
            let block = &blocks[b];
            builder.add(block.part(p), block.size_cells, WaypointKind::Part { block: b, part: p });
        }
    }

    let mut joined: HashSet<(BlockId, BlockId)> = HashSet::new();
    for &b in &members {
        for side in [Direction::Left, Direction::Right, Direction::Top, Direction::Bottom] {
            let neighbours = adj[b][side.index()].clone();
            let (lo, hi) = near_parts(side);
            let (n_lo, n_hi) = near_parts(side.opposite());
            match neighbours.as_slice() {
                [] => {
                    let (a, c) = (builder.part(b, lo), builder.part(b, hi));
                    builder.link(a, c);
                }
                [n] => {
                    let n = *n;
                    let key = (b.min(n), b.max(n));
                    // a neighbour with several children facing us joins them itself
                    if adj[n][side.opposite().index()].len() != 1 || joined.contains(&key) {
                        continue;
                    }
                    joined.insert(key);
                    let (from, to) = (builder.part(b, lo), builder.part(n, n_lo));
                    builder.join_facing(b, side, from, n, to);
                    let (from, to) = (builder.part(b, hi), builder.part(n, n_hi));
                    builder.join_facing(b, side, from, n, to);
                }
                many => {
                    let first = many[0];
                    let last = many[many.len() - 1];
                    let (from, to) = (builder.part(b, lo), builder.part(first, n_lo));
                    builder.join_facing(b, side, from, first, to);
                    for pair in many.windows(2) {
                        let (u, w) = (pair[0], pair[1]);
                        let joint = joint_point(&blocks[b], blocks[u].center, blocks[w].center, side);
                        let j = builder.add(joint, blocks[b].size_cells, WaypointKind::Joint { block: b });
                        let from = builder.part(u, n_hi);
                        let exit = on_edge(&blocks[b], side, builder.point(from));
                        let t0 = builder.add(exit, blocks[u].size_cells, WaypointKind::Transit { from: u, to: b });
                        let to = builder.part(w, n_lo);
                        let entry = on_edge(&blocks[b], side, builder.point(to));
                        let t1 = builder.add(entry, blocks[w].size_cells, WaypointKind::Transit { from: b, to: w });
                        builder.link(from, t0);
                        builder.link(t0, j);
                        builder.link(j, t1);
                        builder.link(t1, to);
                    }
                    let (from, to) = (builder.part(b, hi), builder.part(last, n_hi));
                    builder.join_facing(b, side, from, last, to);
                    for &n in many {
                        joined.insert((b.min(n), b.max(n)));
                    }
                }
            }
        }
    }

    let order = trace_loop(builder.nodes.len(), &builder.links)?;
    let mut waypoints: Vec<Waypoint> = order.iter().map(|&k| builder.nodes[k]).collect();
    let pts: Vec<Vec2> = waypoints.iter().map(|w| w.point).collect();
    if signed_area(&pts) < 0.0 {
        waypoints.reverse();
    }
    // nearest waypoint to start; min_by keeps the first of equal candidates
    let start_at = (0..waypoints.len())
        .min_by(|&a, &b| waypoints[a].point.distance(start).total_cmp(&waypoints[b].point.distance(start)))
        .unwrap_or(0);
    waypoints.rotate_left(start_at);
    Ok(CoveragePath { waypoints, closed: true })
}

/// Does `other` touch `block` along the given side?
fn touches_on(block: &Block, other: &Block, side: Direction) -> bool {
    let eps = 1e-9 * block.side.max(other.side);
    let (bmin, bmax, omin, omax) = (block.min(), block.max(), other.min(), other.max());
    let overlap_y = omin.y < bmax.y - eps && omax.y > bmin.y + eps;
    let overlap_x = omin.x < bmax.x - eps && omax.x > bmin.x + eps;
    match side {
        Direction::Left => (omax.x - bmin.x).abs() <= eps && overlap_y,
        Direction::Right => (omin.x - bmax.x).abs() <= eps && overlap_y,
        Direction::Bottom => (omax.y - bmin.y).abs() <= eps && overlap_x,
        Direction::Top => (omin.y - bmax.y).abs() <= eps && overlap_x,
    }
}

/// Orders linked nodes into one cycle; fails unless every node has degree 2
/// and all nodes lie on a single cycle.
fn trace_loop(n: usize, links: &[(NodeId, NodeId)]) -> Result<Vec<usize>, PathError> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in links {
        if a == b {
            return Err(PathError::Construction(format!("self link at node {}", a.0)));
        }
        adj[a.0].push(b.0);
        adj[b.0].push(a.0);
    }
    let bad: Vec<String> = adj
        .iter()
        .enumerate()
        .filter(|(_, v)| v.len() != 2)
        .map(|(k, v)| format!("node {k} has degree {}", v.len()))
        .collect();
    if !bad.is_empty() {
        return Err(PathError::Construction(bad.join(", ")));
    }
    let mut order = Vec::with_capacity(n);
    let mut prev = usize::MAX;
    let mut cur = 0;
    loop {
        order.push(cur);
        let next = if adj[cur][0] != prev { adj[cur][0] } else { adj[cur][1] };
        prev = cur;
        cur = next;
        if cur == 0 {
            break;
        }
        if order.len() > n {
            return Err(PathError::Construction("link structure is not a simple cycle".into()));
        }
    }
    if order.len() != n {
        return Err(PathError::Construction(format!(
            "{} disjoint loops; the first covers {} of {n} waypoints",
            count_cycles(&adj),
            order.len()
        )));
    }
    Ok(order)
}

fn count_cycles(adj: &[Vec<usize>]) -> usize {
    let mut seen = vec![false; adj.len()];
    let mut cycles = 0;
    for s in 0..adj.len() {
        if seen[s] {
            continue;
        }
        cycles += 1;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            if std::mem::replace(&mut seen[v], true) {
                continue;
            }
            stack.extend(adj[v].iter().copied().filter(|&w| !seen[w]));
        }
    }
    cycles
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::{build_block_graph, build_blocks};
    use crate::geometry::Vec2;
    use crate::grid::CellIndex;
    use crate::mst::prim_mst;

    fn plan(rows: &[&str], max_bs: usize) -> (GridMap, CoveragePath) {
        let grid = GridMap::from_ascii(rows, 1.0);
        let blocks = build_blocks(&grid, max_bs).unwrap();
        let graph = build_block_graph(&blocks, &grid).unwrap();
        let tree = prim_mst(&graph, 0).unwrap();
        let path = build_path(&blocks, &tree, Vec2::ZERO).unwrap();
        (grid, path)
    }

    #[test]
    fn single_block_is_a_square_loop() {
        let (_, path) = plan(&["..", ".."], 2);
        let pts: Vec<Vec2> = path.points().collect();
        assert_eq!(pts.len(), 4);
        assert!(path.closed);
        assert_eq!(pts[0], Vec2::new(0.5, 0.5));
        // counterclockwise from the bottom-left quadrant
        assert_eq!(pts[1], Vec2::new(1.5, 0.5));
        assert_eq!(pts[2], Vec2::new(1.5, 1.5));
        assert_eq!(pts[3], Vec2::new(0.5, 1.5));
    }

    #[test]
    fn two_equal_blocks_make_a_stadium() {
        let (grid, path) = plan(&["....", "...."], 2);
        assert_eq!(path.len(), 8);
        assert!(path.find_crossing().is_none());
        assert!(path.find_obstacle_crossing(&grid).is_none());
        assert!((path.length() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn joint_point_examples() {
        let grid = GridMap::filled(4, 4, 1.0, Vec2::ZERO, CellState::Free);
        let b = Block::new(0, CellIndex::new(0, 0), 4, &grid);
        let left = joint_point(&b, Vec2::new(-1.0, 1.0), Vec2::new(-1.0, 3.0), Direction::Left);
        assert_eq!(left, Vec2::new(1.0, 2.0));
        let top = joint_point(&b, Vec2::new(1.0, 5.0), Vec2::new(3.0, 5.0), Direction::Top);
        assert_eq!(top, Vec2::new(2.0, 3.0));
        // asymmetric neighbours stay strictly inside the block
        let j = joint_point(&b, Vec2::new(-0.5, 3.5), Vec2::new(-0.5, 2.5), Direction::Left);
        assert!(j.y > 1.0 && j.y < 3.0 && j.x == 1.0);
        // a neighbour line through the center parallel to the near line
        let d = joint_point(&b, Vec2::new(2.0, 1.0), Vec2::new(2.0, 3.0), Direction::Left);
        assert_eq!(d, Vec2::new(1.0, 2.0));
    }

    #[test]
    fn multi_neighbour_side_closes() {
        // one 4x4 block with two single-cell children on top, split by obstacles
        let (grid, path) = plan(&["####", ".##.", "....", "....", "....", "...."], 4);
        assert!(path.find_crossing().is_none());
        assert!(path.find_obstacle_crossing(&grid).is_none());
        assert!(path.waypoints.iter().any(|w| matches!(w.kind, WaypointKind::Joint { .. })));
        assert_eq!(path.waypoints.iter().filter(|w| matches!(w.kind, WaypointKind::Part { .. })).count(), 12);
    }

    #[test]
    fn mixed_sizes_stay_in_free_space() {
        let rows = [
            "........", "........", "..#.....", "........", ".....#..", "........", "#.......", "........",
        ];
        let (grid, path) = plan(&rows, 4);
        assert!(path.find_crossing().is_none(), "{:?}", path.find_crossing());
        assert!(path.find_obstacle_crossing(&grid).is_none());
    }

    #[test]
    fn mismatched_tree_is_rejected() {
        let grid = GridMap::from_ascii(&["...."], 1.0);
        let blocks = build_blocks(&grid, 1).unwrap();
        let graph = build_block_graph(&blocks, &grid).unwrap();
        let mut tree = prim_mst(&graph, 0).unwrap();
        tree.edges[0].direction = Direction::Top;
        assert!(matches!(build_path(&blocks, &tree, Vec2::ZERO), Err(PathError::Integrity(_))));
    }
}
