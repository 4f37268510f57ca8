//! Two-level instances: one outer cycle of level 0 vertices with a cactus of
//! level 1 vertices inside. Computes the face order, block structure, the
//! spine order and the edge classes, and colors the conflict graph.

use crate::graph_core::{Dart, EdgeId, FaceId, FaceSet, GraphError, PlaneGraph, VertexId};
use crate::kframed::KFramedDrawing;
use crate::oracle::crossing_intervals;
use crate::oracle::{pair, BookEmbedding, Pair};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use thiserror::Error;

/// Page handle inside a [`PageRegistry`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PageId(pub u16);

/// Page universe: `p0..p4` and six families of `ceil(k/2)` pages
/// (`r`, `b`, `g` for parity 0 and 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PageRegistry {
    k: usize,
    half: usize,
}

const COLOR_LETTERS: [char; 3] = ['r', 'b', 'g'];

impl PageRegistry {
    pub fn new(k: usize) -> Self {
        PageRegistry { k, half: k.div_ceil(2).max(1) }
    }
    pub fn k(&self) -> usize {
        self.k
    }
    /// Pages per color family.
    pub fn half(&self) -> usize {
        self.half
    }
    /// Total number of pages, `6 * ceil(k/2) + 5`.
    pub fn len(&self) -> usize {
        5 + 6 * self.half
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn p(&self, i: usize) -> PageId {
        assert!(i < 5);
        PageId(i as u16)
    }
    /// Page `idx` (0-based) of color `color` in family parity `j`.
    pub fn family(&self, j: usize, color: usize, idx: usize) -> PageId {
        assert!(j < 2 && color < 3 && idx < self.half, "page ({j},{color},{idx}) outside registry");
        PageId((5 + (j * 3 + color) * self.half + idx) as u16)
    }
    pub fn name(&self, p: PageId) -> String {
        let i = p.0 as usize;
        if i < 5 {
            return format!("p{i}");
        }
        let r = i - 5;
        let (fam, idx) = (r / self.half, r % self.half);
        format!("{}{}_{}", COLOR_LETTERS[fam % 3], fam / 3, idx + 1)
    }
    pub fn parse(&self, name: &str) -> Option<PageId> {
        if let Some(rest) = name.strip_prefix('p') {
            let i: usize = rest.parse().ok()?;
            return (i < 5).then_some(PageId(i as u16));
        }
        let mut chars = name.chars();
        let first = chars.next()?;
        let color = COLOR_LETTERS.iter().position(|&c| c == first)?;
        let rest: String = chars.collect();
        let (j, idx) = rest.split_once('_')?;
        let j: usize = j.parse().ok()?;
        let idx: usize = idx.parse().ok()?;
        (j < 2 && idx >= 1 && idx <= self.half).then(|| self.family(j, color, idx - 1))
    }
    pub fn pages(&self) -> impl Iterator<Item = PageId> {
        (0..self.len() as u16).map(PageId)
    }
    /// True for `p0..p4`.
    pub fn is_core(&self, p: PageId) -> bool {
        p.0 < 5
    }
    /// Family parity of a non-core page.
    pub fn parity(&self, p: PageId) -> Option<usize> {
        (p.0 >= 5).then(|| (p.0 as usize - 5) / self.half / 3)
    }
}

#[derive(Debug, Error)]
pub enum TwoLevelError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("instance has no outer face")]
    NoOuterFace,
    #[error("outer boundary is not a simple cycle of length at least 3")]
    OuterNotCycle,
    #[error("vertex {0} is not on the outer cycle")]
    BadStart(VertexId),
    #[error("vertex {0} lies deeper than level 1")]
    TooDeep(VertexId),
    #[error("edge ({0}, {1}) is a chord of the inner level")]
    InnerChord(VertexId, VertexId),
    #[error("face {0} repeats a vertex on its boundary")]
    NonSimpleFace(FaceId),
    #[error("crossing edge ({0}, {1}) lies in the outer face")]
    OuterCrossing(VertexId, VertexId),
    #[error("crossing edge ({0}, {1}) lies in a face without level 0 vertices")]
    InnerCrossing(VertexId, VertexId),
    #[error("conflict graph is not one-page embeddable in face order")]
    ConflictNotOnePage,
    #[error("conflict graph coloring needed {0} colors")]
    TooManyColors(usize),
    #[error("no crossing-free assignment of face cliques to the family pages was found")]
    FamilyPages,
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// A plane graph whose outer face is a simple cycle of level 0 vertices and
/// whose other vertices all touch a bounded face with a level 0 vertex.
#[derive(Clone, Debug)]
pub struct TwoLevelInstance {
    pub graph: PlaneGraph,
    faces: FaceSet,
    /// `u_0, ..., u_{s-1}`: the outer face trace, clockwise.
    pub cycle: Vec<VertexId>,
    /// Index in `cycle`, or `u32::MAX` for level 1 vertices.
    pub index: Vec<u32>,
    /// Local to caller vertex ids.
    pub vmap: Vec<VertexId>,
}

impl TwoLevelInstance {
    /// `u0` must lie on the outer face. `vmap` maps local ids to the
    /// caller's ids (use the identity for stand-alone instances).
    pub fn new(graph: PlaneGraph, u0: VertexId, vmap: Vec<VertexId>) -> Result<Self, TwoLevelError> {
        let faces = graph.trace_faces()?;
        let outer = faces.outer().ok_or(TwoLevelError::NoOuterFace)?;
        let trace = faces.vertices(&graph, outer);
        let s = trace.len();
        let distinct: HashSet<_> = trace.iter().collect();
        if s < 3 || distinct.len() != s {
            return Err(TwoLevelError::OuterNotCycle);
        }
        let start = trace.iter().position(|&v| v == u0).ok_or(TwoLevelError::BadStart(u0))?;
        let cycle: Vec<VertexId> = (0..s).map(|i| trace[(start + i) % s]).collect();
        let mut index = vec![u32::MAX; graph.n()];
        for (i, &v) in cycle.iter().enumerate() {
            index[v as usize] = i as u32;
        }
        let t = TwoLevelInstance { graph, faces, cycle, index, vmap };
        t.check()?;
        Ok(t)
    }

    /// Reads a whole drawing as a two-level instance. Crossing edges are
    /// covered by the face cliques, so only their placement is checked.
    pub fn from_drawing(d: &KFramedDrawing) -> Result<Self, TwoLevelError> {
        let g = d.skeleton().clone();
        let outer = d.outer_face();
        let u0 = *d.face_vertices(outer).iter().min().ok_or(TwoLevelError::OuterNotCycle)?;
        let t = TwoLevelInstance::new(g, u0, (0..d.n() as VertexId).collect())?;
        for c in &d.crossings {
            if c.host == outer {
                return Err(TwoLevelError::OuterCrossing(c.u, c.v));
            }
            if !d.face_vertices(c.host).iter().any(|&v| t.is_l0(v)) {
                return Err(TwoLevelError::InnerCrossing(c.u, c.v));
            }
        }
        Ok(t)
    }

    fn check(&self) -> Result<(), TwoLevelError> {
        let g = &self.graph;
        let outer = self.faces.outer().expect("checked in new");
        let mut touches = vec![false; g.n()];
        for f in 0..self.faces.len() as FaceId {
            if f == outer {
                continue;
            }
            let vs = self.faces.vertices(g, f);
            let set: HashSet<_> = vs.iter().collect();
            if set.len() != vs.len() {
                return Err(TwoLevelError::NonSimpleFace(f));
            }
            if vs.iter().any(|&v| self.is_l0(v)) {
                for &v in &vs {
                    touches[v as usize] = true;
                }
            }
        }
        for v in 0..g.n() as VertexId {
            if !touches[v as usize] {
                return Err(TwoLevelError::TooDeep(v));
            }
        }
        for e in 0..g.m() as EdgeId {
            let (a, b) = g.endpoints(e);
            if self.is_l0(a) || self.is_l0(b) {
                continue;
            }
            let d = Dart::new(e, false);
            let inner = |f: FaceId| f != outer && !self.faces.vertices(g, f).iter().any(|&v| self.is_l0(v));
            if inner(self.faces.face_of(d)) && inner(self.faces.face_of(d.twin())) {
                return Err(TwoLevelError::InnerChord(a, b));
            }
        }
        Ok(())
    }

    pub fn faces(&self) -> &FaceSet {
        &self.faces
    }
    pub fn is_l0(&self, v: VertexId) -> bool {
        self.index[v as usize] != u32::MAX
    }
    pub fn s(&self) -> usize {
        self.cycle.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockKind {
    Degenerate,
    Edge,
    Cycle,
}

/// One block of the level 1 cactus.
#[derive(Clone, Debug)]
pub struct Block {
    pub kind: BlockKind,
    /// Block vertices; for cycles in counterclockwise order from the leader.
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
    /// Face enclosed by a cycle block.
    pub hole: Option<FaceId>,
    pub component: usize,
    pub leader: VertexId,
    pub parent: Option<usize>,
    /// Distance from the degenerate root of its component.
    pub depth: usize,
    /// Vertices assigned to this block, in spine order.
    pub assigned: Vec<VertexId>,
    /// Discovering face.
    pub disc: FaceId,
    /// (face order position of the discovering face, position key inside it).
    pub key: (usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeClass {
    Backward,
    Forward,
    NonDominator,
}

/// Abstract page slot of a two-level embedding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    Backward,
    /// 1 for blocks at odd depth, 2 for even depth.
    Forward(u8),
    Family {
        color: u8,
        index: u16,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub pair: Pair,
    pub class: EdgeClass,
    pub slot: Slot,
    /// Face whose clique produced the pair.
    pub face: FaceId,
}

/// Code path counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TwoLevelStats {
    pub small_faces: usize,
    pub degenerate_blocks: usize,
    pub l0_only_faces: usize,
    pub long_chords: usize,
    pub single_face_shortcut: bool,
    pub family_repair: FamilyRepair,
}

/// How the family pages were settled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FamilyRepair {
    /// Conflict graph coloring as is.
    #[default]
    None,
    /// Faces recolored against observed crossings.
    Faces,
    /// Page classes assigned individually.
    Classes,
}

/// Conflict graph over the faces of `F`, vertices named by face order
/// position.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConflictGraph {
    pub n: usize,
    /// Edges from the definition, in face order positions.
    pub edges: Vec<(usize, usize)>,
}

/// Everything the two-level construction derives, in local vertex ids.
#[derive(Clone, Debug)]
pub struct TwoLevelAnalysis {
    /// Face order over `F`.
    pub lambda: Vec<FaceId>,
    pub lambda_pos: Vec<usize>,
    /// Smallest-index level 0 vertex of each face of `F`.
    pub dom: Vec<VertexId>,
    /// Discovering face per vertex.
    pub disc: Vec<FaceId>,
    pub blocks: Vec<Block>,
    /// Block each level 1 vertex is assigned to.
    pub block_of: Vec<usize>,
    pub small: Vec<bool>,
    /// Prime level 0 vertices per face.
    pub prime: Vec<Vec<VertexId>>,
    pub order: Vec<VertexId>,
    pub rank: Vec<usize>,
    pub assignments: Vec<Assignment>,
    pub conflict: ConflictGraph,
    /// Color per face order position.
    pub colors: Vec<u8>,
    pub stats: TwoLevelStats,
}

impl TwoLevelAnalysis {
    pub fn is_prime(&self, t: &TwoLevelInstance, v: VertexId, f: FaceId) -> bool {
        !t.is_l0(v) || self.prime[f as usize].contains(&v)
    }
}

struct Dsu(Vec<usize>);
impl Dsu {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let nx = self.0[y];
            self.0[y] = r;
            y = nx;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

/// Runs the whole two-level construction.
pub fn analyze(t: &TwoLevelInstance) -> Result<TwoLevelAnalysis, TwoLevelError> {
    let g = &t.graph;
    let fs = &t.faces;
    let n = g.n();
    let nf = fs.len();
    let s = t.s();
    let outer = fs.outer().expect("checked");
    let fverts: Vec<Vec<VertexId>> = (0..nf as FaceId).map(|f| fs.vertices(g, f)).collect();
    let in_f: Vec<bool> = (0..nf).map(|f| f as FaceId != outer && fverts[f].iter().any(|&v| t.is_l0(v))).collect();

    // Face order: counterclockwise fans around u_0, ..., u_{s-1}.
    let mut lambda = Vec::new();
    let mut lambda_pos = vec![usize::MAX; nf];
    let mut fans: Vec<Vec<FaceId>> = Vec::with_capacity(s);
    for i in 0..s {
        let u = t.cycle[i];
        let prev = t.cycle[(i + s - 1) % s];
        let next = t.cycle[(i + 1) % s];
        let mut d = g.find_dart(u, prev).ok_or_else(|| TwoLevelError::Internal("cycle edge missing".into()))?;
        let mut fan = Vec::new();
        for _ in 0..g.degree(u) {
            if g.head(d) == next {
                break;
            }
            let f = fs.face_of(d);
            if in_f[f as usize] {
                fan.push(f);
                if lambda_pos[f as usize] == usize::MAX {
                    lambda_pos[f as usize] = lambda.len();
                    lambda.push(f);
                }
            }
            d = g.rot_next(d);
        }
        fans.push(fan);
    }
    if lambda.len() != in_f.iter().filter(|&&b| b).count() {
        return Err(TwoLevelError::Internal("face order misses a face".into()));
    }

    // Dominators and traces starting at them.
    let mut dom = vec![u32::MAX; nf];
    let mut trace: Vec<Vec<VertexId>> = vec![Vec::new(); nf];
    for &f in &lambda {
        let vs = &fverts[f as usize];
        let (i0, &dv) = vs
            .iter()
            .enumerate()
            .filter(|(_, &v)| t.is_l0(v))
            .min_by_key(|(_, &v)| t.index[v as usize])
            .expect("face in F has a level 0 vertex");
        dom[f as usize] = dv;
        trace[f as usize] = (0..vs.len()).map(|j| vs[(i0 + j) % vs.len()]).collect();
    }

    // Level 1 cactus.
    let l1_edge = |e: EdgeId| {
        let (a, b) = g.endpoints(e);
        !t.is_l0(a) && !t.is_l0(b)
    };
    let mut dsu = Dsu((0..n).collect());
    for e in 0..g.m() as EdgeId {
        if l1_edge(e) {
            let (a, b) = g.endpoints(e);
            dsu.union(a as usize, b as usize);
        }
    }
    let mut comp_id = vec![usize::MAX; n];
    let mut ncomp = 0;
    for v in 0..n {
        if !t.is_l0(v as VertexId) {
            let r = dsu.find(v);
            if comp_id[r] == usize::MAX {
                comp_id[r] = ncomp;
                ncomp += 1;
            }
            comp_id[v] = comp_id[r];
        }
    }

    // Raw blocks: holes are cycle blocks, leftover level 1 edges are edge
    // blocks.
    type RawBlock = (BlockKind, Vec<VertexId>, Vec<EdgeId>, Option<FaceId>);
    let mut raw: Vec<RawBlock> = Vec::new();
    let mut edge_block = vec![usize::MAX; g.m()];
    for f in 0..nf as FaceId {
        if f == outer || in_f[f as usize] {
            continue;
        }
        let darts = &fs.face(f).darts;
        let id = raw.len();
        for d in darts {
            edge_block[d.edge() as usize] = id;
        }
        raw.push((BlockKind::Cycle, fverts[f as usize].clone(), darts.iter().map(|d| d.edge()).collect(), Some(f)));
    }
    for e in 0..g.m() as EdgeId {
        if l1_edge(e) && edge_block[e as usize] == usize::MAX {
            let (a, b) = g.endpoints(e);
            edge_block[e as usize] = raw.len();
            raw.push((BlockKind::Edge, vec![a, b], vec![e], None));
        }
    }
    let mut blocks_at: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, b) in raw.iter().enumerate() {
        for &v in &b.1 {
            blocks_at[v as usize].push(i);
        }
    }

    // First vertex of every component.
    let mut first: Vec<Option<(VertexId, FaceId)>> = vec![None; ncomp];
    for &f in &lambda {
        for &v in &trace[f as usize] {
            if !t.is_l0(v) && first[comp_id[v as usize]].is_none() {
                first[comp_id[v as usize]] = Some((v, f));
            }
        }
    }

    // Block tree by breadth-first search from the first vertices.
    let mut blocks: Vec<Block> = Vec::new();
    let mut raw_to_block = vec![usize::MAX; raw.len()];
    let mut block_of = vec![usize::MAX; n];
    for c in 0..ncomp {
        let (vc, fc) = first[c].ok_or_else(|| TwoLevelError::Internal("component not on any face".into()))?;
        let root = blocks.len();
        blocks.push(Block {
            kind: BlockKind::Degenerate,
            vertices: vec![vc],
            edges: vec![],
            hole: None,
            component: c,
            leader: vc,
            parent: None,
            depth: 0,
            assigned: vec![vc],
            disc: fc,
            key: (0, 0),
        });
        block_of[vc as usize] = root;
        let mut queue = std::collections::VecDeque::from([vc]);
        while let Some(x) = queue.pop_front() {
            let px = block_of[x as usize];
            for &rb in &blocks_at[x as usize] {
                if raw_to_block[rb] != usize::MAX {
                    continue;
                }
                let (kind, verts, edges, hole) = raw[rb].clone();
                let id = blocks.len();
                raw_to_block[rb] = id;
                // Rotate so the leader comes first; cycle order is the hole trace.
                let start = verts.iter().position(|&v| v == x).expect("leader on block");
                let vertices: Vec<VertexId> = (0..verts.len()).map(|j| verts[(start + j) % verts.len()]).collect();
                for &y in &vertices[1..] {
                    if block_of[y as usize] != usize::MAX {
                        return Err(TwoLevelError::Internal("level 1 graph is not a cactus".into()));
                    }
                    block_of[y as usize] = id;
                    queue.push_back(y);
                }
                blocks.push(Block {
                    kind,
                    assigned: vertices[1..].to_vec(),
                    vertices,
                    edges,
                    hole,
                    component: c,
                    leader: x,
                    parent: Some(px),
                    depth: blocks[px].depth + 1,
                    disc: u32::MAX,
                    key: (0, 0),
                });
            }
        }
    }
    if raw_to_block.contains(&usize::MAX) {
        return Err(TwoLevelError::Internal("block not reached from its component root".into()));
    }

    // Discovery of non-degenerate blocks: first face with one of their edges.
    for &f in &lambda {
        for d in &fs.face(f).darts {
            let rb = edge_block[d.edge() as usize];
            if rb != usize::MAX {
                let b = raw_to_block[rb];
                if blocks[b].disc == u32::MAX {
                    blocks[b].disc = f;
                }
            }
        }
    }
    let mut disc = vec![u32::MAX; n];
    for &f in &lambda {
        for &v in &fverts[f as usize] {
            if t.is_l0(v) && disc[v as usize] == u32::MAX {
                disc[v as usize] = f;
            }
        }
    }
    for v in 0..n {
        if !t.is_l0(v as VertexId) {
            disc[v] = blocks[block_of[v]].disc;
        }
    }
    // Block keys: face order position, then the first position in the trace
    // from the dominator where the block shows up (2j for an assigned
    // vertex at j, 2j+1 for a block edge leaving position j).
    for (bi, b) in blocks.iter_mut().enumerate() {
        let f = b.disc;
        if f == u32::MAX {
            return Err(TwoLevelError::Internal("block without discovering face".into()));
        }
        let tr = &trace[f as usize];
        let len = tr.len();
        let mut key = usize::MAX;
        for j in 0..len {
            if !t.is_l0(tr[j]) && block_of[tr[j] as usize] == bi {
                key = key.min(2 * j);
            }
            if b.kind != BlockKind::Degenerate {
                let (a, c) = (tr[j], tr[(j + 1) % len]);
                if b.edges.iter().any(|&e| {
                    let (x, y) = g.endpoints(e);
                    (x == a && y == c) || (x == c && y == a)
                }) {
                    key = key.min(2 * j + 1);
                }
            }
        }
        if key == usize::MAX {
            return Err(TwoLevelError::Internal("block not visible on its discovering face".into()));
        }
        b.key = (lambda_pos[f as usize], key);
    }

    // Prime vertices: clockwise from the dominator until a level 1 vertex
    // or a long edge.
    let short = |a: VertexId, b: VertexId| {
        let (i, j) = (t.index[a as usize] as i64, t.index[b as usize] as i64);
        (i - j).abs() == 1
    };
    let mut prime = vec![Vec::new(); nf];
    for &f in &lambda {
        let tr = &trace[f as usize];
        let mut list = vec![tr[0]];
        let mut prev = tr[0];
        for j in (1..tr.len()).rev() {
            let x = tr[j];
            if !t.is_l0(x) || !short(prev, x) {
                break;
            }
            list.push(x);
            prev = x;
        }
        prime[f as usize] = list;
    }

    // Small faces.
    let mut small = vec![false; nf];
    for j in 1..s {
        let u = t.cycle[j];
        let du = disc[u as usize];
        if prime[du as usize].contains(&u) {
            continue;
        }
        for &f in &fans[j] {
            if f == du {
                break;
            }
            if dom[f as usize] == u {
                small[f as usize] = true;
            }
        }
    }

    // Spine order.
    let mut by_dom: Vec<Vec<usize>> = vec![Vec::new(); s];
    for (bi, b) in blocks.iter().enumerate() {
        let dv = dom[b.disc as usize];
        by_dom[t.index[dv as usize] as usize].push(bi);
    }
    let mut order = Vec::with_capacity(n);
    for j in 0..s {
        let mut list = by_dom[j].clone();
        list.sort_by_key(|&b| blocks[b].key);
        let (before, after): (Vec<usize>, Vec<usize>) = list.iter().partition(|&&b| small[blocks[b].disc as usize]);
        for b in before {
            order.extend_from_slice(&blocks[b].assigned);
        }
        order.push(t.cycle[j]);
        for b in after {
            order.extend_from_slice(&blocks[b].assigned);
        }
    }
    if order.len() != n {
        return Err(TwoLevelError::Internal(format!("spine order has {} of {} vertices", order.len(), n)));
    }
    let mut rank = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        rank[v as usize] = i;
    }

    // Dominator edges.
    let mut assignments = Vec::new();
    let mut done: HashSet<Pair> = HashSet::new();
    for &f in &lambda {
        let dv = dom[f as usize];
        for &w in &trace[f as usize][1..] {
            let p = pair(dv, w);
            if !done.insert(p) {
                continue;
            }
            let (class, slot) = if rank[dv as usize] < rank[w as usize] {
                (EdgeClass::Backward, Slot::Backward)
            } else {
                if t.is_l0(w) {
                    return Err(TwoLevelError::Internal("forward edge to a level 0 vertex".into()));
                }
                let depth = blocks[block_of[w as usize]].depth;
                (EdgeClass::Forward, Slot::Forward(if depth % 2 == 1 { 1 } else { 2 }))
            };
            assignments.push(Assignment { pair: p, class, slot, face: f });
        }
    }

    // Conflict graph in face order positions.
    let mut cedges: HashSet<(usize, usize)> = HashSet::new();
    for &gf in &lambda {
        for &w in &fverts[gf as usize] {
            if t.is_l0(w) {
                continue;
            }
            let f = disc[w as usize];
            if f != gf {
                let (a, b) = (lambda_pos[f as usize], lambda_pos[gf as usize]);
                cedges.insert((a.min(b), a.max(b)));
            }
        }
    }
    let mut cedges: Vec<(usize, usize)> = cedges.into_iter().collect();
    cedges.sort_unstable();
    let conflict = ConflictGraph { n: lambda.len(), edges: cedges };
    if !is_one_page(&conflict.edges) {
        return Err(TwoLevelError::ConflictNotOnePage);
    }
    let mut colors = smallest_last_coloring(conflict.n, &conflict.edges);
    let ncolors = colors.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    if ncolors > 3 {
        colors = three_coloring(conflict.n, &conflict.edges).ok_or(TwoLevelError::TooManyColors(ncolors))?;
    }
    let shortcut = s == 3 && lambda.len() == 1 && (0..n).all(|v| t.is_l0(v as VertexId));
    let mut nondom = clique_layout(&lambda, &lambda_pos, &fverts, &rank, &colors, &done, shortcut);
    // The coloring does not rule out every shared-page crossing when the
    // spine wraps from u_{s-1} back to u_0. Recolor against the crossings
    // actually present, then fall back to placing page classes one by one.
    let mut family_repair = FamilyRepair::None;
    if family_crossing(&nondom, &rank).is_some() {
        let half = lambda.iter().map(|&f| fverts[f as usize].len().div_ceil(2)).max().unwrap_or(1);
        let repaired = recolor_faces(&mut nondom, &rank, &lambda_pos, conflict.n)
            .map(|()| FamilyRepair::Faces)
            .or_else(|| assign_classes(&mut nondom, &rank, half).map(|()| FamilyRepair::Classes));
        match repaired {
            Some(r) if family_crossing(&nondom, &rank).is_none() => family_repair = r,
            _ => return Err(TwoLevelError::FamilyPages),
        }
    }
    assignments.extend(nondom);

    let mut stats = TwoLevelStats {
        small_faces: small.iter().filter(|&&b| b).count(),
        degenerate_blocks: blocks.iter().filter(|b| b.kind == BlockKind::Degenerate).count(),
        l0_only_faces: lambda.iter().filter(|&&f| fverts[f as usize].iter().all(|&v| t.is_l0(v))).count(),
        long_chords: 0,
        single_face_shortcut: shortcut,
        family_repair,
    };
    for e in 0..g.m() as EdgeId {
        let (a, b) = g.endpoints(e);
        if t.is_l0(a) && t.is_l0(b) {
            let (i, j) = (t.index[a as usize] as usize, t.index[b as usize] as usize);
            let d = i.abs_diff(j);
            if d != 1 && d != s - 1 {
                stats.long_chords += 1;
            }
        }
    }

    Ok(TwoLevelAnalysis {
        lambda,
        lambda_pos,
        dom,
        disc,
        blocks,
        block_of,
        small,
        prime,
        order,
        rank,
        assignments,
        conflict,
        colors,
        stats,
    })
}

/// Non-dominator pairs of every face, laid out as a `K_q` on ceil(q/2)
/// pages of the face's color. Pairs already in `done` keep their page.
fn clique_layout(
    lambda: &[FaceId],
    lambda_pos: &[usize],
    fverts: &[Vec<VertexId>],
    rank: &[usize],
    colors: &[u8],
    done: &HashSet<Pair>,
    shortcut: bool,
) -> Vec<Assignment> {
    let mut done = done.clone();
    let mut out = Vec::new();
    for &f in lambda {
        let mut members = fverts[f as usize].clone();
        members.sort_by_key(|&v| rank[v as usize]);
        let q = members.len();
        let qe = q + q % 2;
        for a in 0..q {
            for b in a + 1..q {
                let p = pair(members[a], members[b]);
                if !done.insert(p) {
                    continue;
                }
                let slot = if shortcut {
                    Slot::Backward
                } else {
                    Slot::Family { color: colors[lambda_pos[f as usize]], index: (((a + b) % qe) / 2) as u16 }
                };
                let class = if shortcut { EdgeClass::Backward } else { EdgeClass::NonDominator };
                out.push(Assignment { pair: p, class, slot, face: f });
            }
        }
    }
    out
}

/// Exact 3-coloring, or `None` when there is none or the search gives up.
pub fn three_coloring(n: usize, edges: &[(usize, usize)]) -> Option<Vec<u8>> {
    k_coloring(n, edges, 3).map(|c| c.into_iter().map(|x| x as u8).collect())
}

/// Backtracking coloring with `k` colors in DSATUR order, one connected
/// component at a time. Gives up (returns `None`) after a fixed number of
/// steps per component.
pub fn k_coloring(n: usize, edges: &[(usize, usize)], k: usize) -> Option<Vec<usize>> {
    const NONE: usize = usize::MAX;
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut color = vec![NONE; n];
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        let mut comp = vec![root];
        seen[root] = true;
        let mut i = 0;
        while i < comp.len() {
            for &w in &adj[comp[i]] {
                if !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                }
            }
            i += 1;
        }
        let pick = |color: &[usize]| {
            comp.iter().copied().filter(|&v| color[v] == NONE).max_by_key(|&v| {
                let mut sat: Vec<usize> = adj[v].iter().map(|&w| color[w]).filter(|&c| c != NONE).collect();
                sat.sort_unstable();
                sat.dedup();
                (sat.len(), adj[v].len(), usize::MAX - v)
            })
        };
        let mut budget = 100_000 + 20 * comp.len();
        // Frames of (vertex, next color to try).
        let mut stack: Vec<(usize, usize)> = Vec::new();
        let mut next = pick(&color);
        loop {
            if let Some(v) = next.take() {
                stack.push((v, 0));
            }
            let &mut (v, ref mut c0) = stack.last_mut()?;
            color[v] = NONE;
            // Colors beyond the first unused one are symmetric.
            let used = comp.iter().map(|&x| color[x]).filter(|&c| c != NONE).max().map_or(0, |c| c + 1);
            let limit = k.min(used + 1);
            let mut found = None;
            while *c0 < limit {
                let c = *c0;
                *c0 += 1;
                if budget == 0 {
                    return None;
                }
                budget -= 1;
                if adj[v].iter().all(|&w| color[w] != c) {
                    found = Some(c);
                    break;
                }
            }
            match found {
                Some(c) => {
                    color[v] = c;
                    next = pick(&color);
                    if next.is_none() {
                        break;
                    }
                }
                None => {
                    stack.pop();
                    if stack.is_empty() {
                        return None;
                    }
                }
            }
        }
    }
    Some(color)
}

fn spans(nondom: &[Assignment], rank: &[usize]) -> Vec<(usize, usize)> {
    nondom
        .iter()
        .map(|a| {
            let (x, y) = (rank[a.pair.0 as usize], rank[a.pair.1 as usize]);
            (x.min(y), x.max(y))
        })
        .collect()
}

/// Recolors faces so that no two crossing pairs with the same page index
/// share a color.
fn recolor_faces(nondom: &mut [Assignment], rank: &[usize], lambda_pos: &[usize], nfaces: usize) -> Option<()> {
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (i, j) in crossing_intervals(&spans(nondom, rank)) {
        let (a, b) = (&nondom[i], &nondom[j]);
        let same_index = match (a.slot, b.slot) {
            (Slot::Family { index: x, .. }, Slot::Family { index: y, .. }) => x == y,
            _ => false,
        };
        if same_index && a.face != b.face {
            let (p, q) = (lambda_pos[a.face as usize], lambda_pos[b.face as usize]);
            edges.insert((p.min(q), p.max(q)));
        }
    }
    let edges: Vec<(usize, usize)> = edges.into_iter().collect();
    let colors = three_coloring(nfaces, &edges)?;
    for a in nondom.iter_mut() {
        if let Slot::Family { index, .. } = a.slot {
            a.slot = Slot::Family { color: colors[lambda_pos[a.face as usize]], index };
        }
    }
    Some(())
}

/// Treats every (face, index) class as a unit and colors the class crossing
/// graph with the `3 * half` family pages.
fn assign_classes(nondom: &mut [Assignment], rank: &[usize], half: usize) -> Option<()> {
    let mut class_of: HashMap<(FaceId, u16), usize> = HashMap::new();
    let mut cls = vec![usize::MAX; nondom.len()];
    for (i, a) in nondom.iter().enumerate() {
        if let Slot::Family { index, .. } = a.slot {
            let next = class_of.len();
            cls[i] = *class_of.entry((a.face, index)).or_insert(next);
        }
    }
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (i, j) in crossing_intervals(&spans(nondom, rank)) {
        let (x, y) = (cls[i], cls[j]);
        if x != usize::MAX && y != usize::MAX && x != y {
            edges.insert((x.min(y), x.max(y)));
        }
    }
    let edges: Vec<(usize, usize)> = edges.into_iter().collect();
    let page = k_coloring(class_of.len(), &edges, 3 * half)?;
    for (i, a) in nondom.iter_mut().enumerate() {
        if cls[i] != usize::MAX {
            let p = page[cls[i]];
            a.slot = Slot::Family { color: (p / half) as u8, index: (p % half) as u16 };
        }
    }
    Some(())
}

/// Faces of two family pairs that share a page and cross, if any.
fn family_crossing(nondom: &[Assignment], rank: &[usize]) -> Option<(FaceId, FaceId)> {
    type Spans = Vec<(usize, usize, FaceId)>;
    let mut by_page: BTreeMap<(u8, u16), Spans> = BTreeMap::new();
    for a in nondom {
        if let Slot::Family { color, index } = a.slot {
            let (x, y) = (rank[a.pair.0 as usize], rank[a.pair.1 as usize]);
            by_page.entry((color, index)).or_default().push((x.min(y), x.max(y), a.face));
        }
    }
    for (_, mut list) in by_page {
        list.sort_by(|p, q| p.0.cmp(&q.0).then(q.1.cmp(&p.1)));
        let mut stack: Vec<(usize, usize, FaceId)> = Vec::new();
        for &(l, r, f) in &list {
            while stack.last().is_some_and(|t| t.1 <= l) {
                stack.pop();
            }
            if let Some(&(_, tr, tf)) = stack.last() {
                if tr < r {
                    return Some((tf, f));
                }
            }
            stack.push((l, r, f));
        }
    }
    None
}

/// True when no two edges cross with vertices placed at their indices.
pub fn is_one_page(edges: &[(usize, usize)]) -> bool {
    let mut list: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    list.sort_by(|x, y| x.0.cmp(&y.0).then(y.1.cmp(&x.1)));
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for (l, r) in list {
        while stack.last().is_some_and(|t| t.1 <= l) {
            stack.pop();
        }
        if stack.last().is_some_and(|t| t.1 < r) {
            return false;
        }
        stack.push((l, r));
    }
    true
}

/// Greedy coloring in smallest-last order. Uses at most degeneracy + 1
/// colors, so at most 3 on outerplanar graphs.
pub fn smallest_last_coloring(n: usize, edges: &[(usize, usize)]) -> Vec<u8> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut deg: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let mut removed = vec![false; n];
    let mut stack = Vec::with_capacity(n);
    // Buckets by current degree.
    let maxd = deg.iter().copied().max().unwrap_or(0);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); maxd + 1];
    for v in 0..n {
        buckets[deg[v]].push(v);
    }
    let mut low = 0;
    while stack.len() < n {
        low = low.min(maxd);
        let mut picked = None;
        while picked.is_none() {
            while buckets[low].is_empty() {
                low += 1;
            }
            let v = buckets[low].pop().unwrap();
            if !removed[v] && deg[v] == low {
                picked = Some(v);
            }
        }
        let v = picked.unwrap();
        removed[v] = true;
        stack.push(v);
        for &w in &adj[v] {
            if !removed[w] {
                deg[w] -= 1;
                buckets[deg[w]].push(w);
                low = low.min(deg[w]);
            }
        }
    }
    let mut color = vec![u8::MAX; n];
    for &v in stack.iter().rev() {
        let used: HashSet<u8> = adj[v].iter().map(|&w| color[w]).collect();
        color[v] = (0..).find(|c| !used.contains(c)).unwrap();
    }
    color
}

/// How forward edges are spread over the core pages.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ForwardMode {
    /// All forward edges on `p1`.
    Single,
    /// Split by block depth parity onto `p1` and `p2`.
    ByParity,
}

/// Book embedding of a stand-alone two-level instance, in caller ids.
/// Non-dominator edges go to family `j`.
pub fn two_level_embed(
    t: &TwoLevelInstance,
    registry: &PageRegistry,
    j: usize,
    mode: ForwardMode,
) -> Result<(BookEmbedding, TwoLevelAnalysis), TwoLevelError> {
    let a = analyze(t)?;
    let mut pages = BTreeMap::new();
    for asg in &a.assignments {
        let page = match asg.slot {
            Slot::Backward => registry.p(0),
            Slot::Forward(k) => match mode {
                ForwardMode::Single => registry.p(1),
                ForwardMode::ByParity => registry.p(k as usize),
            },
            Slot::Family { color, index } => registry.family(j, color as usize, index as usize),
        };
        let (x, y) = asg.pair;
        pages.insert(pair(t.vmap[x as usize], t.vmap[y as usize]), page);
    }
    let order = a.order.iter().map(|&v| t.vmap[v as usize]).collect();
    Ok((BookEmbedding { order, pages, registry: *registry }, a))
}

/// Two-level embedding of a whole drawing with one forward page, restricted
/// to the drawing's input edges. Uses at most `3 * ceil(k/2) + 2` pages.
pub fn embed_two_level_drawing(d: &KFramedDrawing) -> Result<(BookEmbedding, TwoLevelAnalysis), TwoLevelError> {
    let t = TwoLevelInstance::from_drawing(d)?;
    let (e, a) = two_level_embed(&t, &PageRegistry::new(d.k), 1, ForwardMode::Single)?;
    Ok((crate::kframed::strip_augmentation(&e, d), a))
}

/// Moves the forward edges of an embedding with a single forward page onto
/// `p1` (odd block depth) and `p2` (even block depth).
pub fn make_good(e: &BookEmbedding, t: &TwoLevelInstance, a: &TwoLevelAnalysis) -> BookEmbedding {
    let mut out = e.clone();
    for asg in &a.assignments {
        if let Slot::Forward(k) = asg.slot {
            let (x, y) = asg.pair;
            out.pages.insert(pair(t.vmap[x as usize], t.vmap[y as usize]), e.registry.p(k as usize));
        }
    }
    out
}

/// Pages used by family pages of one color, for statistics.
pub fn family_usage(a: &TwoLevelAnalysis) -> HashMap<u8, usize> {
    let mut m: HashMap<u8, usize> = HashMap::new();
    for asg in &a.assignments {
        if let Slot::Family { color, index } = asg.slot {
            let e = m.entry(color).or_default();
            *e = (*e).max(index as usize + 1);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::validate;

    /// Cycle 0..s-1 with its outer face set so that the trace from 0 runs
    /// 0, 1, 2, ...
    fn cycle_instance(s: u32) -> TwoLevelInstance {
        let rot: Vec<Vec<u32>> = (0..s).map(|i| vec![(i + 1) % s, (i + s - 1) % s]).collect();
        let mut g = PlaneGraph::from_neighbor_rotation(&rot).unwrap();
        let fs = g.trace_faces().unwrap();
        let d = g.find_dart(0, 1).unwrap();
        let _ = fs;
        g.set_outer(d);
        TwoLevelInstance::new(g, 0, (0..s).collect()).unwrap()
    }

    /// Wheel: outer cycle 0..s-1 (clockwise), hub s inside.
    fn wheel(s: u32) -> TwoLevelInstance {
        // Geometric positions: u_i at angle -2πi/s (clockwise), hub at origin.
        let hub = s;
        let mut rot: Vec<Vec<u32>> = Vec::new();
        for i in 0..s {
            rot.push(vec![(i + s - 1) % s, hub, (i + 1) % s]);
        }
        rot.push((0..s).rev().collect());
        let mut g = PlaneGraph::from_neighbor_rotation(&rot).unwrap();
        let d = g.find_dart(0, 1).unwrap();
        g.set_outer(d);
        TwoLevelInstance::new(g, 0, (0..=s).collect()).unwrap()
    }

    fn all_pairs_on_faces(t: &TwoLevelInstance) -> Vec<Pair> {
        let mut v = Vec::new();
        let outer = t.faces().outer().unwrap();
        for f in 0..t.faces().len() as FaceId {
            if f == outer {
                continue;
            }
            let vs = t.faces().vertices(&t.graph, f);
            for a in 0..vs.len() {
                for b in a + 1..vs.len() {
                    v.push(pair(vs[a], vs[b]));
                }
            }
        }
        v.sort_unstable();
        v.dedup();
        v
    }

    #[test]
    fn registry_names_round_trip() {
        let r = PageRegistry::new(5);
        assert_eq!(r.len(), 23);
        for p in r.pages() {
            assert_eq!(r.parse(&r.name(p)), Some(p));
        }
        assert_eq!(r.name(r.family(1, 2, 0)), "g1_1");
    }

    #[test]
    fn wheel_orientation_is_consistent() {
        let t = wheel(5);
        let outer = t.faces().outer().unwrap();
        assert_eq!(t.faces().vertices(&t.graph, outer).len(), 5);
        assert_eq!(t.cycle, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn outerplane_cycle_single_face() {
        let t = cycle_instance(6);
        let (e, a) = two_level_embed(&t, &PageRegistry::new(6), 1, ForwardMode::Single).unwrap();
        assert_eq!(a.lambda.len(), 1);
        assert_eq!(a.order, vec![0, 1, 2, 3, 4, 5]);
        assert!(validate(&e, &all_pairs_on_faces(&t)).unwrap().is_empty());
        assert!(e.pages_used() <= 3 * 3 + 2);
    }

    #[test]
    fn wheel_has_degenerate_block() {
        let t = wheel(6);
        let (e, a) = two_level_embed(&t, &PageRegistry::new(3), 1, ForwardMode::ByParity).unwrap();
        assert_eq!(a.lambda.len(), 6);
        assert_eq!(a.stats.degenerate_blocks, 1);
        assert!(validate(&e, &all_pairs_on_faces(&t)).unwrap().is_empty());
        // The hub is discovered by the first face around u_0.
        assert_eq!(a.order[1], 6);
    }

    #[test]
    fn triangle_shortcut_uses_one_page() {
        let t = cycle_instance(3);
        let (e, a) = two_level_embed(&t, &PageRegistry::new(3), 1, ForwardMode::Single).unwrap();
        assert!(a.stats.single_face_shortcut);
        assert_eq!(e.pages_used(), 1);
    }

    #[test]
    fn coloring_of_path_and_empty_graph() {
        assert_eq!(smallest_last_coloring(3, &[]), vec![0, 0, 0]);
        let c = smallest_last_coloring(3, &[(0, 1), (1, 2)]);
        assert!(c[0] != c[1] && c[1] != c[2]);
        assert!(c.iter().all(|&x| x < 3));
    }

    #[test]
    fn exact_coloring_small_graphs() {
        let k4: Vec<(usize, usize)> = vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        assert!(three_coloring(4, &k4).is_none());
        let c = k_coloring(4, &k4, 4).unwrap();
        assert!(k4.iter().all(|&(a, b)| c[a] != c[b]));
        let c5: Vec<(usize, usize)> = (0..5).map(|i| (i, (i + 1) % 5)).collect();
        assert!(k_coloring(5, &c5, 2).is_none());
        let c = three_coloring(6, &c5).unwrap();
        assert!(c5.iter().all(|&(a, b)| c[a] != c[b]));
        assert_eq!(c[5], 0);
    }

    #[test]
    fn one_page_check() {
        assert!(is_one_page(&[(0, 3), (1, 2), (3, 5)]));
        assert!(!is_one_page(&[(0, 2), (1, 3)]));
    }
}
