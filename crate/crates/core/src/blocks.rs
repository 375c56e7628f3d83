//! Hierarchical square blocks over free space and their adjacency graph.
//!
//! Blocks are built by tiled window scans: the largest size first, then each
//! successive halving down to single cells. Windows sit at multiples of their
//! own size (quadtree alignment), are scanned left to right and bottom to
//! top, and become a block when every covered cell is free and unclaimed.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec2;
use crate::grid::{CellIndex, Direction, GridMap};

pub type BlockId = usize;

#[derive(Debug, Error, PartialEq)]
pub enum BlockError {
    #[error("max block size must be a power of two >= 1, got {0}")]
    BlockSize(usize),
    #[error("cell ({i}, {j}) is claimed by blocks {first} and {second}")]
    Overlap { i: usize, j: usize, first: BlockId, second: BlockId },
    #[error("block {block} covers obstacle or out-of-grid cell ({i}, {j})")]
    NotFree { block: BlockId, i: usize, j: usize },
}

/// Quadrant of a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Part {
    TopLeft,
    TopRight,
    BottomLeft,
    BottomRight,
}

impl Part {
    pub const ALL: [Part; 4] = [Part::TopLeft, Part::TopRight, Part::BottomLeft, Part::BottomRight];

    pub fn index(self) -> usize {
        self as usize
    }

    /// The two quadrants adjacent to a side, ordered (upper/left first, then
    /// lower/right): LEFT -> (TL, BL), RIGHT -> (TR, BR), TOP -> (TL, TR),
    /// BOTTOM -> (BL, BR).
    pub fn on_side(side: Direction) -> (Part, Part) {
        match side {
            Direction::Left => (Part::TopLeft, Part::BottomLeft),
            Direction::Right => (Part::TopRight, Part::BottomRight),
            Direction::Top => (Part::TopLeft, Part::TopRight),
            Direction::Bottom => (Part::BottomLeft, Part::BottomRight),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub id: BlockId,
    /// Bottom-left cell.
    pub anchor: CellIndex,
    pub size_cells: usize,
    pub center: Vec2,
    /// Quadrant centers indexed by [`Part::index`].
    pub part_centers: [Vec2; 4],
    /// Side length in meters.
    pub side: f64,
}

impl Block {
    pub fn new(id: BlockId, anchor: CellIndex, size_cells: usize, grid: &GridMap) -> Self {
        let side = size_cells as f64 * grid.cell_size;
        let min = grid.origin + Vec2::new(anchor.i as f64, anchor.j as f64) * grid.cell_size;
        let q = side / 4.0;
        let part_centers = [
            min + Vec2::new(q, 3.0 * q),
            min + Vec2::new(3.0 * q, 3.0 * q),
            min + Vec2::new(q, q),
            min + Vec2::new(3.0 * q, q),
        ];
        Self { id, anchor, size_cells, center: min + Vec2::new(2.0 * q, 2.0 * q), part_centers, side }
    }

    pub fn part(&self, p: Part) -> Vec2 {
        self.part_centers[p.index()]
    }

    pub fn min(&self) -> Vec2 {
        self.center - Vec2::new(self.side, self.side) * 0.5
    }

    pub fn max(&self) -> Vec2 {
        self.center + Vec2::new(self.side, self.side) * 0.5
    }

    pub fn contains_cell(&self, c: CellIndex) -> bool {
        c.i >= self.anchor.i
            && c.i < self.anchor.i + self.size_cells
            && c.j >= self.anchor.j
            && c.j < self.anchor.j + self.size_cells
    }

    pub fn cells(&self) -> impl Iterator<Item = CellIndex> + '_ {
        let (i0, j0, s) = (self.anchor.i, self.anchor.j, self.size_cells);
        (j0..j0 + s).flat_map(move |j| (i0..i0 + s).map(move |i| CellIndex::new(i, j)))
    }
}

/// Smallest power of two not below `n_q * spacing / cell_size` (at least 1).
pub fn default_max_block_size(n_q: usize, spacing: f64, cell_size: f64) -> usize {
    let needed = (n_q as f64 * spacing / cell_size).max(1.0);
    let needed = if (needed - needed.round()).abs() < 1e-9 { needed.round() } else { needed.ceil() };
    (needed as usize).next_power_of_two()
}

/// Groups free cells into square blocks of sizes `max, max/2, ..., 1`.
pub fn build_blocks(grid: &GridMap, max_block_size: usize) -> Result<Vec<Block>, BlockError> {
    if max_block_size == 0 || !max_block_size.is_power_of_two() {
        return Err(BlockError::BlockSize(max_block_size));
    }
    let mut owner: Vec<Option<BlockId>> = vec![None; grid.len()];
    let mut blocks = Vec::new();
    let mut size = max_block_size;
    loop {
        let mut j = 0;
        while j + size <= grid.height_cells {
            let mut i = 0;
            while i + size <= grid.width_cells {
                let window_ok = (j..j + size).all(|y| {
                    (i..i + size).all(|x| {
                        let c = CellIndex::new(x, y);
                        grid.is_free(c) && owner[grid.flat(c)].is_none()
                    })
                });
                if window_ok {
                    let id = blocks.len();
                    let block = Block::new(id, CellIndex::new(i, j), size, grid);
                    for c in block.cells() {
                        owner[grid.flat(c)] = Some(id);
                    }
                    blocks.push(block);
                }
                i += size;
            }
            j += size;
        }
        if size == 1 {
            break;
        }
        size /= 2;
    }
    Ok(blocks)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockEdge {
    pub a: BlockId,
    pub b: BlockId,
    /// Side of `a` on which `b` lies.
    pub direction: Direction,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockGraph {
    pub blocks: Vec<Block>,
    /// One entry per adjacent block pair, with `a < b`.
    pub edges: Vec<BlockEdge>,
    /// `neighbors[b][d]`: blocks touching side `d` of `b`, sorted along the
    /// shared edge (by x for TOP/BOTTOM, by y for LEFT/RIGHT).
    pub neighbors: Vec<[Vec<BlockId>; 4]>,
}

impl BlockGraph {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn neighbors_on(&self, b: BlockId, d: Direction) -> &[BlockId] {
        &self.neighbors[b][d.index()]
    }

    /// Union of the per-direction neighbour lists.
    pub fn all_neighbors(&self, b: BlockId) -> impl Iterator<Item = BlockId> + '_ {
        self.neighbors[b].iter().flatten().copied()
    }
}

/// Sorts block ids along the edge shared with a neighbour on side `d`.
pub(crate) fn sort_along_side(ids: &mut [BlockId], blocks: &[Block], d: Direction) {
    if d.is_horizontal() {
        ids.sort_by(|&a, &b| blocks[a].center.y.total_cmp(&blocks[b].center.y).then(a.cmp(&b)));
    } else {
        ids.sort_by(|&a, &b| blocks[a].center.x.total_cmp(&blocks[b].center.x).then(a.cmp(&b)));
    }
}

/// Per-cell owning block, verifying that blocks are disjoint and free.
pub fn cell_owners(blocks: &[Block], grid: &GridMap) -> Result<Vec<Option<BlockId>>, BlockError> {
    let mut owner: Vec<Option<BlockId>> = vec![None; grid.len()];
    for b in blocks {
        for c in b.cells() {
            if c.i >= grid.width_cells || c.j >= grid.height_cells || !grid.is_free(c) {
                return Err(BlockError::NotFree { block: b.id, i: c.i, j: c.j });
            }
            let k = grid.flat(c);
            if let Some(first) = owner[k] {
                return Err(BlockError::Overlap { i: c.i, j: c.j, first, second: b.id });
            }
            owner[k] = Some(b.id);
        }
    }
    Ok(owner)
}

/// Connects blocks that own 4-adjacent cells; weight is center distance.
pub fn build_block_graph(blocks: &[Block], grid: &GridMap) -> Result<BlockGraph, BlockError> {
    let owner = cell_owners(blocks, grid)?;
    let mut pairs: BTreeMap<(BlockId, BlockId), Direction> = BTreeMap::new();
    for c in grid.indices() {
        let Some(a) = owner[grid.flat(c)] else { continue };
        for d in [Direction::Right, Direction::Top] {
            let Some(n) = grid.neighbor(c, d) else { continue };
            let Some(b) = owner[grid.flat(n)] else { continue };
            if a == b {
                continue;
            }
            let key = if a < b { (a, b, d) } else { (b, a, d.opposite()) };
            pairs.entry((key.0, key.1)).or_insert(key.2);
        }
    }
    let mut neighbors: Vec<[Vec<BlockId>; 4]> = vec![Default::default(); blocks.len()];
    let edges = pairs
        .into_iter()
        .map(|((a, b), direction)| {
            neighbors[a][direction.index()].push(b);
            neighbors[b][direction.opposite().index()].push(a);
            BlockEdge { a, b, direction, weight: blocks[a].center.distance(blocks[b].center) }
        })
        .collect();
    for lists in neighbors.iter_mut() {
        for d in Direction::ALL {
            sort_along_side(&mut lists[d.index()], blocks, d);
        }
    }
    Ok(BlockGraph { blocks: blocks.to_vec(), edges, neighbors })
}
