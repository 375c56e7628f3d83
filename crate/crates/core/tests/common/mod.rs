//! Reference implementations and fixtures shared by the integration tests.
//! Everything here is deliberately naive and independent of the library code
//! it checks.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use coverage_core::blocks::{Block, Part};
use coverage_core::grid::{CellIndex, CellState, Direction, GridMap, PolygonObstacle};
use coverage_core::mst::SpanningTree;
use coverage_core::{Rect, Scenario, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

pub fn load_scenario(name: &str) -> Scenario {
    Scenario::load(&scenario_path(name)).expect("fixture scenario loads")
}

/// Star-shaped polygon with 3 to 11 vertices inside `area`; always simple.
pub fn random_polygon(rng: &mut ChaCha8Rng, area: Rect) -> PolygonObstacle {
    let n = rng.gen_range(3..12);
    let reach = area.width().min(area.height()) / 2.0;
    let center = Vec2::new(
        rng.gen_range(area.min.x + 0.2 * reach..area.max.x - 0.2 * reach),
        rng.gen_range(area.min.y + 0.2 * reach..area.max.y - 0.2 * reach),
    );
    let mut angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    while angles.len() < 3 {
        angles = vec![0.1, 2.2, 4.3];
    }
    let vertices = angles
        .iter()
        .map(|&a| center + Vec2::from_angle(a) * rng.gen_range(0.1 * reach..0.9 * reach))
        .collect();
    PolygonObstacle::new(vertices)
}

/// Winding number of `poly` around `p`.
fn winding(p: Vec2, poly: &[Vec2]) -> i32 {
    let mut w = 0;
    for k in 0..poly.len() {
        let a = poly[k];
        let b = poly[(k + 1) % poly.len()];
        let side = (b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y);
        if a.y <= p.y {
            if b.y > p.y && side > 0.0 {
                w += 1;
            }
        } else if b.y <= p.y && side < 0.0 {
            w -= 1;
        }
    }
    w
}

/// Liang-Barsky clip, then ask whether the clipped piece reaches the interior.
pub fn segment_enters_open_rect(a: Vec2, b: Vec2, r: &Rect) -> bool {
    let d = b - a;
    let (mut t0, mut t1) = (0.0_f64, 1.0_f64);
    for (p, q) in [(-d.x, a.x - r.min.x), (d.x, r.max.x - a.x), (-d.y, a.y - r.min.y), (d.y, r.max.y - a.y)] {
        if p == 0.0 {
            if q < 0.0 {
                return false;
            }
        } else {
            let t = q / p;
            if p < 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
        }
    }
    if t0 >= t1 {
        return false;
    }
    let m = a + d * ((t0 + t1) / 2.0);
    m.x > r.min.x && m.x < r.max.x && m.y > r.min.y && m.y < r.max.y
}

/// Per-cell classification by brute force: center inside a polygon, or a
/// polygon edge entering the open cell. Bounds must be a whole number of cells.
pub fn raster_oracle(obstacles: &[PolygonObstacle], bounds: Rect, cs: f64) -> Vec<CellState> {
    let w = (bounds.width() / cs).round() as usize;
    let h = (bounds.height() / cs).round() as usize;
    let mut out = Vec::with_capacity(w * h);
    for j in 0..h {
        for i in 0..w {
            let min = bounds.min + Vec2::new(i as f64, j as f64) * cs;
            let cell = Rect::new(min, min + Vec2::new(cs, cs));
            let center = cell.center();
            let hit = obstacles.iter().any(|o| {
                let v = &o.vertices;
                winding(center, v) != 0
                    || (0..v.len()).any(|k| segment_enters_open_rect(v[k], v[(k + 1) % v.len()], &cell))
            });
            out.push(if hit { CellState::Obstacle } else { CellState::Free });
        }
    }
    out
}

/// Random obstacle rectangles stamped onto a free grid.
pub fn random_grid(rng: &mut ChaCha8Rng, w: usize, h: usize, rects: usize) -> GridMap {
    let mut g = GridMap::filled(w, h, 1.0, Vec2::ZERO, CellState::Free);
    for _ in 0..rects {
        let (i0, j0) = (rng.gen_range(0..w), rng.gen_range(0..h));
        let (rw, rh) = (rng.gen_range(1..=w / 4 + 1), rng.gen_range(1..=h / 4 + 1));
        for j in j0..(j0 + rh).min(h) {
            for i in i0..(i0 + rw).min(w) {
                g.set(CellIndex::new(i, j), CellState::Obstacle);
            }
        }
    }
    g
}

/// Recursive quadtree decomposition: a node becomes a block as soon as all
/// its cells are free and inside the grid. Returns (i, j, size) triples.
pub fn quadtree_blocks(grid: &GridMap, max_bs: usize) -> BTreeSet<(usize, usize, usize)> {
    fn all_free(g: &GridMap, i: usize, j: usize, s: usize) -> bool {
        (j..j + s).all(|y| (i..i + s).all(|x| x < g.width_cells && y < g.height_cells && g.is_free(CellIndex::new(x, y))))
    }
    fn visit(g: &GridMap, i: usize, j: usize, s: usize, out: &mut BTreeSet<(usize, usize, usize)>) {
        if i >= g.width_cells || j >= g.height_cells {
            return;
        }
        if all_free(g, i, j, s) {
            out.insert((i, j, s));
        } else if s > 1 {
            let h = s / 2;
            for (di, dj) in [(0, 0), (h, 0), (0, h), (h, h)] {
                visit(g, i + di, j + dj, h, out);
            }
        }
    }
    let mut out = BTreeSet::new();
    for j in (0..grid.height_cells).step_by(max_bs) {
        for i in (0..grid.width_cells).step_by(max_bs) {
            visit(grid, i, j, max_bs, &mut out);
        }
    }
    out
}

/// Kruskal over the whole graph; returns the sorted weights of the chosen
/// edges inside the component holding `root`.
pub fn kruskal_component_weights(n: usize, edges: &[(usize, usize, f64)], root: usize) -> Vec<f64> {
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    let mut sorted = edges.to_vec();
    sorted.sort_by(|a, b| a.2.total_cmp(&b.2));
    let mut parent: Vec<usize> = (0..n).collect();
    let mut chosen = Vec::new();
    for (a, b, w) in sorted {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            chosen.push((a, w));
        }
    }
    let r = find(&mut parent, root);
    let mut out: Vec<f64> = chosen.into_iter().filter(|&(a, _)| find(&mut parent, a) == r).map(|(_, w)| w).collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Proper or touching intersection of two closed segments.
pub fn segments_touch(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let orient = |p: Vec2, q: Vec2, r: Vec2| {
        let v = (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
        if v.abs() < 1e-12 {
            0
        } else if v > 0.0 {
            1
        } else {
            -1
        }
    };
    let on = |p: Vec2, q: Vec2, r: Vec2| {
        r.x >= p.x.min(q.x) - 1e-12 && r.x <= p.x.max(q.x) + 1e-12 && r.y >= p.y.min(q.y) - 1e-12 && r.y <= p.y.max(q.y) + 1e-12
    };
    let (o1, o2, o3, o4) = (orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b));
    if o1 * o2 < 0 && o3 * o4 < 0 {
        return true;
    }
    (o1 == 0 && on(a, b, c)) || (o2 == 0 && on(a, b, d)) || (o3 == 0 && on(c, d, a)) || (o4 == 0 && on(c, d, b))
}

/// No two non-adjacent edges of the closed loop touch.
pub fn loop_is_simple(points: &[Vec2]) -> bool {
    let n = points.len();
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_touch(points[i], points[(i + 1) % n], points[j], points[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

/// Does any loop edge pass through the interior of an obstacle cell?
pub fn loop_hits_obstacle(points: &[Vec2], grid: &GridMap) -> bool {
    let n = points.len();
    grid.indices().filter(|&c| grid.get(c) == CellState::Obstacle).any(|c| {
        let r = grid.cell_rect(c);
        (0..n).any(|k| segment_enters_open_rect(points[k], points[(k + 1) % n], &r))
    })
}

fn ring_side(side: Direction) -> (Part, Part) {
    match side {
        Direction::Top => (Part::TopLeft, Part::TopRight),
        Direction::Right => (Part::TopRight, Part::BottomRight),
        Direction::Bottom => (Part::BottomLeft, Part::BottomRight),
        Direction::Left => (Part::TopLeft, Part::BottomLeft),
    }
}

/// Facing quadrant across `side`: TR faces TL across the right side, etc.
fn facing(p: Part, side: Direction) -> Part {
    use Part::*;
    match (side, p) {
        (Direction::Left | Direction::Right, TopLeft) => TopRight,
        (Direction::Left | Direction::Right, TopRight) => TopLeft,
        (Direction::Left | Direction::Right, BottomLeft) => BottomRight,
        (Direction::Left | Direction::Right, BottomRight) => BottomLeft,
        (_, TopLeft) => BottomLeft,
        (_, BottomLeft) => TopLeft,
        (_, TopRight) => BottomRight,
        (_, BottomRight) => TopRight,
    }
}

/// Classic uniform-grid spanning tree circumnavigation over the block tree:
/// each block is a ring through its four quadrant centers, and each tree
/// edge swaps the two facing ring sides for two straight connectors. Returns
/// the node degrees; the construction closes iff every degree is 2 and the
/// edges form one cycle.
pub fn uniform_stc_degrees(blocks: &[Block], tree: &SpanningTree) -> (BTreeMap<(usize, Part), usize>, bool) {
    type Node = (usize, Part);
    let key = |a: Node, b: Node| if a <= b { (a, b) } else { (b, a) };
    let mut edges: Vec<(Node, Node)> = Vec::new();
    let mut members: BTreeSet<usize> = tree.reached.iter().copied().collect();
    members.insert(tree.root);
    for &b in &members {
        for side in Direction::ALL {
            let (p, q) = ring_side(side);
            edges.push(key((b, p), (b, q)));
        }
    }
    for e in &tree.edges {
        let (p, q) = ring_side(e.direction);
        let (cp, cq) = ring_side(e.direction.opposite());
        for (x, y) in [((e.parent, p), (e.parent, q)), ((e.child, cp), (e.child, cq))] {
            if let Some(pos) = edges.iter().position(|&k| k == key(x, y)) {
                edges.remove(pos);
            }
        }
        for part in [p, q] {
            edges.push(key((e.parent, part), (e.child, facing(part, e.direction))));
        }
    }
    let _ = blocks;
    let mut degree: BTreeMap<Node, usize> = BTreeMap::new();
    let mut adj: BTreeMap<Node, Vec<Node>> = BTreeMap::new();
    for &(a, b) in &edges {
        *degree.entry(a).or_default() += 1;
        *degree.entry(b).or_default() += 1;
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let all_two = degree.values().all(|&d| d == 2);
    let mut seen = BTreeSet::new();
    let mut stack: Vec<Node> = degree.keys().next().copied().into_iter().collect();
    while let Some(n) = stack.pop() {
        if seen.insert(n) {
            stack.extend(adj[&n].iter().copied());
        }
    }
    let closed = all_two && seen.len() == degree.len();
    (degree, closed)
}

/// A 4x4 block whose right side meets two single cells separated by
/// obstacles, so both become its tree children on the same side.
pub fn split_children_grid() -> GridMap {
    GridMap::from_ascii(&[".....#", "....##", "....##", ".....#"], 1.0)
}

pub fn polyline_length(points: &[Vec2], closed: bool) -> f64 {
    let mut total = 0.0;
    for w in points.windows(2) {
        total += ((w[1].x - w[0].x).powi(2) + (w[1].y - w[0].y).powi(2)).sqrt();
    }
    if closed && points.len() > 1 {
        let (a, b) = (points[points.len() - 1], points[0]);
        total += ((b.x - a.x).powi(2) + (b.y - a.y).powi(2)).sqrt();
    }
    total
}

/// Every consecutive pair of loop points as an undirected edge; the loop is
/// a simple cycle when points are distinct and each has degree two.
pub fn loop_degrees_ok(points: &[Vec2]) -> bool {
    let n = points.len();
    if n < 3 {
        return false;
    }
    let key = |p: Vec2| ((p.x * 1e6).round() as i64, (p.y * 1e6).round() as i64);
    let mut degree: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    for k in 0..n {
        *degree.entry(key(points[k])).or_default() += 1;
        *degree.entry(key(points[(k + 1) % n])).or_default() += 1;
    }
    degree.len() == n && degree.values().all(|&d| d == 2)
}
