//! Multi-level construction: embed the bicomponent of every level as a
//! two-level instance and splice it into the spine of the levels above,
//! keeping five core pages in rotation.

use crate::graph_core::{Dart, EdgeId, FaceSet, GraphError, PlaneGraph, VertexId};
use crate::kframed::{validate_kframed, KFramedDrawing, ValidationReport};
use crate::oracle::{crossing_intervals, pair, BookEmbedding, Pair};
use crate::peeling::{derive, peel, Bicomponent, LevelStructures};
use crate::two_level::{
    analyze, BlockKind, EdgeClass, PageId, PageRegistry, Slot, TwoLevelError, TwoLevelInstance, TwoLevelStats,
};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use thiserror::Error;

const NONE: u32 = u32::MAX;

#[derive(Debug, Error)]
pub enum MultiLevelError {
    #[error("invalid k-framed drawing: {0}")]
    Invalid(ValidationReport),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("bicomponent {bicomponent} (level {level}): {source}")]
    TwoLevel {
        bicomponent: usize,
        level: usize,
        #[source]
        source: TwoLevelError,
    },
    #[error("boundary of bicomponent {0} is not in spine order")]
    BoundaryOrder(usize),
    #[error("{0} pairs still cross on a shared page after repair")]
    Unrepaired(usize),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// Core pages of one bicomponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BicomponentPages {
    pub b: PageId,
    pub f1: PageId,
    pub f2: PageId,
    /// Depth parity of the enclosing block in its parent's block tree.
    pub epsilon: bool,
}

impl BicomponentPages {
    pub fn root(r: &PageRegistry) -> Self {
        BicomponentPages { b: r.p(0), f1: r.p(1), f2: r.p(2), epsilon: false }
    }
}

/// Pages of a child bicomponent whose boundary block receives the parent's
/// forward edges on `incident`. `epsilon` orders the two free pages.
pub fn choose_pages(parent: &BicomponentPages, incident: PageId, epsilon: bool, r: &PageRegistry) -> BicomponentPages {
    assert!(incident == parent.f1 || incident == parent.f2, "incident page must be a forward page of the parent");
    let b = if incident == parent.f1 { parent.f2 } else { parent.f1 };
    let mut free = (0..5).map(|i| r.p(i)).filter(|&p| p != parent.b && p != parent.f1 && p != parent.f2);
    let (qa, qb) = (free.next().unwrap(), free.next().unwrap());
    let (f1, f2) = if epsilon { (qb, qa) } else { (qa, qb) };
    BicomponentPages { b, f1, f2, epsilon }
}

/// Block of a placed bicomponent, in global ids.
#[derive(Clone, Debug)]
pub struct PlacedBlock {
    pub kind: BlockKind,
    /// Leader first; cycles follow their local counterclockwise trace.
    pub vertices: Vec<VertexId>,
    pub depth: usize,
    pub component: usize,
    /// Child bicomponent bounded by this block.
    pub child: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OwnedPair {
    pub pair: Pair,
    pub class: EdgeClass,
    pub page: PageId,
    /// Block of the inner endpoint, for forward pairs.
    pub block: Option<u32>,
}

/// One bicomponent after insertion.
#[derive(Clone, Debug)]
pub struct Placed {
    pub bicomponent: usize,
    pub level: usize,
    pub pages: BicomponentPages,
    pub mirrored: bool,
    /// `u_0 .. u_{s-1}` in spine order.
    pub cycle: Vec<VertexId>,
    pub blocks: Vec<PlacedBlock>,
    /// (placed index, block index) of the enclosing block.
    pub parent: Option<(usize, usize)>,
    /// Pairs this bicomponent put on a page first.
    pub owned: Vec<OwnedPair>,
    pub stats: TwoLevelStats,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GoodChecks {
    #[default]
    Off,
    /// Once on the finished embedding.
    Final,
    /// After every bicomponent insertion, on the new bicomponent.
    EveryInsertion,
}

#[derive(Clone, Copy, Debug)]
pub struct MultiLevelOptions {
    pub good_checks: GoodChecks,
    /// Move pairs that still cross on a core page to a free page.
    pub repair: bool,
}

impl Default for MultiLevelOptions {
    fn default() -> Self {
        MultiLevelOptions { good_checks: GoodChecks::Off, repair: true }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoodViolation {
    pub property: &'static str,
    pub bicomponent: usize,
    pub detail: String,
}

impl fmt::Display for GoodViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated at bicomponent {}: {}", self.property, self.bicomponent, self.detail)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MultiLevelStats {
    pub depth: usize,
    pub bicomponents: usize,
    pub small_faces: usize,
    pub degenerate_blocks: usize,
    pub l0_only_faces: usize,
    pub long_chords: usize,
    /// Outer face pairs placed after the last level.
    pub outer_pairs: usize,
    pub good_checks_run: usize,
    /// Pairs moved off a page where they crossed another pair.
    pub repaired_pairs: usize,
}

#[derive(Clone, Debug)]
pub struct MultiLevelResult {
    /// Embedding of every face clique, outer face included.
    pub embedding: BookEmbedding,
    pub placed: Vec<Placed>,
    pub structures: LevelStructures,
    pub stats: MultiLevelStats,
    pub violations: Vec<GoodViolation>,
}

/// Doubly linked spine.
struct Spine {
    next: Vec<u32>,
    prev: Vec<u32>,
    head: u32,
    tail: u32,
}

impl Spine {
    fn new(n: usize) -> Self {
        Spine { next: vec![NONE; n], prev: vec![NONE; n], head: NONE, tail: NONE }
    }
    fn push_back(&mut self, v: VertexId) {
        self.prev[v as usize] = self.tail;
        if self.tail != NONE {
            self.next[self.tail as usize] = v;
        } else {
            self.head = v;
        }
        self.tail = v;
    }
    fn insert_before(&mut self, v: VertexId, at: VertexId) {
        let p = self.prev[at as usize];
        self.prev[v as usize] = p;
        self.next[v as usize] = at;
        self.prev[at as usize] = v;
        if p == NONE {
            self.head = v;
        } else {
            self.next[p as usize] = v;
        }
    }
    fn insert_after(&mut self, v: VertexId, at: VertexId) {
        let nx = self.next[at as usize];
        self.next[v as usize] = nx;
        self.prev[v as usize] = at;
        self.next[at as usize] = v;
        if nx == NONE {
            self.tail = v;
        } else {
            self.prev[nx as usize] = v;
        }
    }
    fn order(&self) -> Vec<VertexId> {
        let mut out = Vec::new();
        let mut v = self.head;
        while v != NONE {
            out.push(v);
            v = self.next[v as usize];
        }
        out
    }
    /// Position of each placed vertex, `NONE` elsewhere.
    fn positions(&self, n: usize) -> Vec<u32> {
        let mut pos = vec![NONE; n];
        let mut v = self.head;
        let mut i = 0;
        while v != NONE {
            pos[v as usize] = i;
            i += 1;
            v = self.next[v as usize];
        }
        pos
    }
}

/// Cuts a bicomponent out of the skeleton in time linear in its size.
/// `scratch` must be all `NONE` on entry and is left that way.
fn cut_out(
    g: &PlaneGraph,
    bc: &Bicomponent,
    vscratch: &mut [u32],
    escratch: &mut [u32],
) -> Result<(PlaneGraph, Vec<VertexId>, Vec<EdgeId>), GraphError> {
    for (i, &e) in bc.edges.iter().enumerate() {
        escratch[e as usize] = i as u32;
    }
    for (i, &v) in bc.vertices.iter().enumerate() {
        vscratch[v as usize] = i as u32;
    }
    let edges: Vec<(VertexId, VertexId)> = bc
        .edges
        .iter()
        .map(|&e| {
            let (a, b) = g.endpoints(e);
            (vscratch[a as usize], vscratch[b as usize])
        })
        .collect();
    let rot: Vec<Vec<EdgeId>> = bc
        .vertices
        .iter()
        .map(|&v| {
            g.rotation(v).iter().filter(|&&e| escratch[e as usize] != NONE).map(|&e| escratch[e as usize]).collect()
        })
        .collect();
    let od = bc.outside_dart;
    let local_outer = Dart::new(escratch[od.edge() as usize], od.0 & 1 == 1);
    for &e in &bc.edges {
        escratch[e as usize] = NONE;
    }
    for &v in &bc.vertices {
        vscratch[v as usize] = NONE;
    }
    let mut h = PlaneGraph::new(bc.vertices.len(), edges, rot)?;
    h.set_outer(local_outer);
    Ok((h, bc.vertices.clone(), bc.edges.clone()))
}

/// Embeds every face clique of `d` (outer face included).
pub fn multi_level_embed(d: &KFramedDrawing, opts: MultiLevelOptions) -> Result<MultiLevelResult, MultiLevelError> {
    let report = validate_kframed(d);
    if !report.is_valid() {
        return Err(MultiLevelError::Invalid(report));
    }
    let g = d.skeleton();
    let fs = d.faces();
    let n = g.n();
    let lv = peel(g, fs);
    let ls = derive(g, fs, &lv);
    let registry = PageRegistry::new(d.k);

    let mut spine = Spine::new(n);
    let mut pages: HashMap<Pair, PageId> = HashMap::new();
    let mut placed: Vec<Placed> = Vec::new();
    let mut placed_of = vec![NONE; ls.bicomponents.len()];
    // (placed index, block index) bounding each bicomponent.
    let mut bounded_by: Vec<Option<(usize, usize)>> = vec![None; ls.bicomponents.len()];
    let mut vscratch = vec![NONE; n];
    let mut escratch = vec![NONE; g.m()];
    let mut violations = Vec::new();
    let mut stats = MultiLevelStats { depth: lv.depth, ..Default::default() };

    let roots: Vec<usize> = (0..ls.bicomponents.len()).filter(|&b| ls.bicomponents[b].level == 1).collect();
    if roots.len() != 1 {
        return Err(MultiLevelError::Internal(format!("{} bicomponents at level 1", roots.len())));
    }
    let mut current = roots;
    let mut level = 1;
    while !current.is_empty() {
        let pos = spine.positions(n);
        if level > 1 {
            // Leftmost boundary vertex first; ties broken by bicomponent id.
            current.sort_by_key(|&b| (ls.bicomponents[b].boundary.iter().map(|&v| pos[v as usize]).min(), b));
        }
        for &bi in &current {
            let bc = &ls.bicomponents[bi];
            let (local, vmap, emap) = cut_out(g, bc, &mut vscratch, &mut escratch)?;
            let mirrored = level % 2 == 0;
            let local = if mirrored { local.mirror() } else { local };
            let u0_global = if level == 1 {
                bc.boundary[0]
            } else {
                *bc.boundary.iter().min_by_key(|&&v| pos[v as usize]).expect("boundary is non-empty")
            };
            let u0 = vmap.iter().position(|&v| v == u0_global).expect("boundary vertex in bicomponent") as VertexId;
            let wrap = |source| MultiLevelError::TwoLevel { bicomponent: bi, level, source };
            let t = TwoLevelInstance::new(local, u0, vmap.clone()).map_err(wrap)?;
            let a = analyze(&t).map_err(wrap)?;
            let cycle: Vec<VertexId> = t.cycle.iter().map(|&v| vmap[v as usize]).collect();
            if level > 1 && cycle.windows(2).any(|w| pos[w[0] as usize] >= pos[w[1] as usize]) {
                return Err(MultiLevelError::BoundaryOrder(bi));
            }

            // Core pages.
            let parent = bounded_by[bi];
            let bpages = match parent {
                None => BicomponentPages::root(&registry),
                Some((pp, pb)) => {
                    let par = &placed[pp];
                    let odd = par.blocks[pb].depth % 2 == 1;
                    let incident = if odd { par.pages.f1 } else { par.pages.f2 };
                    choose_pages(&par.pages, incident, odd, &registry)
                }
            };

            // Splice the inner vertices into the spine.
            if level == 1 {
                for &v in &a.order {
                    spine.push_back(vmap[v as usize]);
                }
            } else {
                let s = cycle.len();
                let mut j: Option<usize> = None;
                let mut pending: Vec<VertexId> = Vec::new();
                let mut after = NONE;
                for &lvx in &a.order {
                    let v = vmap[lvx as usize];
                    if t.is_l0(lvx) {
                        let idx = t.index[lvx as usize] as usize;
                        for &p in &pending {
                            spine.insert_before(p, v);
                        }
                        pending.clear();
                        j = Some(idx);
                        if idx == s - 1 {
                            after = v;
                        }
                    } else {
                        match j {
                            None => {
                                return Err(MultiLevelError::Internal(format!("bicomponent {bi}: vertex before u_0")))
                            }
                            Some(x) if x == s - 1 => {
                                spine.insert_after(v, after);
                                after = v;
                            }
                            Some(_) => pending.push(v),
                        }
                    }
                }
            }

            // Pages.
            let family = level % 2;
            let mut owned = Vec::new();
            for asg in &a.assignments {
                let (x, y) = asg.pair;
                let p = pair(vmap[x as usize], vmap[y as usize]);
                if pages.contains_key(&p) {
                    continue;
                }
                let page = match asg.slot {
                    Slot::Backward => bpages.b,
                    Slot::Forward(1) => bpages.f1,
                    Slot::Forward(_) => bpages.f2,
                    Slot::Family { color, index } => registry.family(family, color as usize, index as usize),
                };
                pages.insert(p, page);
                let block = (asg.class == EdgeClass::Forward).then(|| {
                    let w = if t.is_l0(x) { y } else { x };
                    a.block_of[w as usize] as u32
                });
                owned.push(OwnedPair { pair: p, class: asg.class, page, block });
            }

            // Blocks and the children they bound.
            let pidx = placed.len();
            let mut blocks = Vec::with_capacity(a.blocks.len());
            for (k, b) in a.blocks.iter().enumerate() {
                let mut child = None;
                if b.kind == BlockKind::Cycle {
                    let e = emap[b.edges[0] as usize];
                    let dn = Dart::new(e, false);
                    for dd in [dn, dn.twin()] {
                        let f = fs.face_of(dd);
                        if Some(f) != fs.outer() && ls.face_minlevel[f as usize] as usize == level {
                            let c = ls.face_group[f as usize] as usize;
                            bounded_by[c] = Some((pidx, k));
                            child = Some(c);
                        }
                    }
                    if child.is_none() {
                        return Err(MultiLevelError::Internal(format!(
                            "cycle block of bicomponent {bi} bounds nothing"
                        )));
                    }
                }
                blocks.push(PlacedBlock {
                    kind: b.kind,
                    vertices: b.vertices.iter().map(|&v| vmap[v as usize]).collect(),
                    depth: b.depth,
                    component: b.component,
                    child,
                });
            }
            stats.small_faces += a.stats.small_faces;
            stats.degenerate_blocks += a.stats.degenerate_blocks;
            stats.l0_only_faces += a.stats.l0_only_faces;
            stats.long_chords += a.stats.long_chords;
            placed_of[bi] = pidx as u32;
            placed.push(Placed {
                bicomponent: bi,
                level,
                pages: bpages,
                mirrored,
                cycle,
                blocks,
                parent,
                owned,
                stats: a.stats,
            });

            if opts.good_checks == GoodChecks::EveryInsertion {
                let ctx = GoodContext::new(g, fs, &ls, &registry, &placed, &spine.order());
                let peers: Vec<usize> = (0..pidx).filter(|&q| placed[q].level == level).collect();
                violations.extend(ctx.check(pidx, &peers));
                stats.good_checks_run += 1;
            }
        }
        let mut next: Vec<usize> = current.iter().flat_map(|&b| ls.children[b].iter().copied()).collect();
        next.sort_unstable();
        current = next;
        level += 1;
    }
    if placed.len() != ls.bicomponents.len() {
        return Err(MultiLevelError::Internal("some bicomponent was never reached".into()));
    }

    // Outer face clique on the family of parity 0.
    let order = spine.order();
    if order.len() != n {
        return Err(MultiLevelError::Internal(format!("spine holds {} of {} vertices", order.len(), n)));
    }
    let mut rank = vec![0usize; n];
    for (i, &v) in order.iter().enumerate() {
        rank[v as usize] = i;
    }
    if let Some(of) = fs.outer() {
        let mut members = fs.vertices(g, of);
        members.sort_by_key(|&v| rank[v as usize]);
        let q = members.len();
        let qe = q + q % 2;
        for x in 0..q {
            for y in x + 1..q {
                let p = pair(members[x], members[y]);
                if let std::collections::hash_map::Entry::Vacant(e) = pages.entry(p) {
                    e.insert(registry.family(0, 0, ((x + y) % qe) / 2));
                    stats.outer_pairs += 1;
                }
            }
        }
    }

    if opts.good_checks == GoodChecks::Final {
        let ctx = GoodContext::new(g, fs, &ls, &registry, &placed, &order);
        for i in 0..placed.len() {
            let peers: Vec<usize> = (0..i).filter(|&q| placed[q].level == placed[i].level).collect();
            violations.extend(ctx.check(i, &peers));
            stats.good_checks_run += 1;
        }
    }
    // Checks above see the inductive assignment; the repair comes after.
    if opts.repair {
        stats.repaired_pairs = repair_pages(&rank, &mut pages, registry.len())?;
    }
    stats.bicomponents = placed.len();
    let embedding = BookEmbedding { order, pages: pages.into_iter().collect::<BTreeMap<_, _>>(), registry };
    Ok(MultiLevelResult { embedding, placed, structures: ls, stats, violations })
}

/// Moves pairs that cross on a shared page to pages where they cross
/// nothing, keeping the spine. Returns the number of pairs moved.
fn repair_pages(rank: &[usize], pages: &mut HashMap<Pair, PageId>, npages: usize) -> Result<usize, MultiLevelError> {
    let span = |p: Pair| {
        let (a, b) = (rank[p.0 as usize], rank[p.1 as usize]);
        (a.min(b), a.max(b))
    };
    let mut on_page: Vec<Vec<Pair>> = vec![Vec::new(); npages];
    let mut all: Vec<(&Pair, &PageId)> = pages.iter().collect();
    all.sort_unstable();
    for (&p, &pg) in all {
        on_page[pg.0 as usize].push(p);
    }
    // Evict a vertex cover of each page's crossing graph.
    let mut evicted: Vec<Pair> = Vec::new();
    for list in on_page.iter_mut() {
        let iv: Vec<(usize, usize)> = list.iter().map(|&p| span(p)).collect();
        let cross = crossing_intervals(&iv);
        if cross.is_empty() {
            continue;
        }
        let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
        for &(i, j) in &cross {
            adj.entry(i).or_default().push(j);
            adj.entry(j).or_default().push(i);
        }
        let mut gone = vec![false; list.len()];
        for &(i, j) in &cross {
            if gone[i] || gone[j] {
                continue;
            }
            // Drop whichever endpoint has more crossings left.
            let left = |x: usize, gone: &[bool]| adj[&x].iter().filter(|&&y| !gone[y]).count();
            let victim = if left(i, &gone) >= left(j, &gone) { i } else { j };
            gone[victim] = true;
        }
        let mut keep = Vec::with_capacity(list.len());
        for (i, &p) in list.iter().enumerate() {
            if gone[i] {
                evicted.push(p);
            } else {
                keep.push(p);
            }
        }
        *list = keep;
    }
    if evicted.is_empty() {
        return Ok(0);
    }
    let crosses = |a: (usize, usize), b: (usize, usize)| {
        (a.0 < b.0 && b.0 < a.1 && a.1 < b.1) || (b.0 < a.0 && a.0 < b.1 && b.1 < a.1)
    };
    let blockers = |list: &[Pair], x: (usize, usize)| -> Vec<usize> {
        list.iter().enumerate().filter(|(_, &q)| crosses(x, span(q))).map(|(i, _)| i).collect()
    };
    // Longest spans first: they are the hardest to fit.
    evicted.sort_by_key(|&p| {
        let (a, b) = span(p);
        (std::cmp::Reverse(b - a), p)
    });
    let moved = evicted.len();
    let mut stuck = 0;
    for p in evicted {
        let x = span(p);
        if let Some(pg) = (0..npages).find(|&pg| blockers(&on_page[pg], x).is_empty()) {
            on_page[pg].push(p);
            pages.insert(p, PageId(pg as u16));
            continue;
        }
        // One bump: a page with a single blocker that fits somewhere else.
        let mut done = false;
        'outer: for pg in 0..npages {
            let b = blockers(&on_page[pg], x);
            if b.len() != 1 {
                continue;
            }
            let q = on_page[pg][b[0]];
            let y = span(q);
            for other in (0..npages).filter(|&o| o != pg) {
                if blockers(&on_page[other], y).is_empty() {
                    on_page[pg].swap_remove(b[0]);
                    on_page[other].push(q);
                    pages.insert(q, PageId(other as u16));
                    on_page[pg].push(p);
                    pages.insert(p, PageId(pg as u16));
                    done = true;
                    break 'outer;
                }
            }
        }
        if !done {
            stuck += 1;
        }
    }
    if stuck > 0 {
        return Err(MultiLevelError::Unrepaired(stuck));
    }
    Ok(moved)
}

/// Embeds `d` and drops the pairs that are not input edges.
pub fn embed(
    d: &KFramedDrawing,
    opts: MultiLevelOptions,
) -> Result<(BookEmbedding, MultiLevelResult), MultiLevelError> {
    let r = multi_level_embed(d, opts)?;
    let e = crate::kframed::strip_augmentation(&r.embedding, d);
    Ok((e, r))
}

/// Evaluates the good-embedding properties on a finished or partial
/// result. `order` may hold a subset of the vertices.
pub fn check_good(d: &KFramedDrawing, r: &MultiLevelResult, order: &[VertexId]) -> Vec<GoodViolation> {
    let registry = r.embedding.registry;
    let ctx = GoodContext::new(d.skeleton(), d.faces(), &r.structures, &registry, &r.placed, order);
    let mut out = Vec::new();
    for i in 0..r.placed.len() {
        let peers: Vec<usize> = (0..i).filter(|&q| r.placed[q].level == r.placed[i].level).collect();
        out.extend(ctx.check(i, &peers));
    }
    out
}

struct GoodContext<'a> {
    g: &'a PlaneGraph,
    fs: &'a FaceSet,
    ls: &'a LevelStructures,
    registry: &'a PageRegistry,
    placed: &'a [Placed],
    pos: Vec<u32>,
    /// Placed vertices of each level as (position, vertex), sorted.
    by_level: Vec<Vec<(u32, VertexId)>>,
}

impl<'a> GoodContext<'a> {
    fn new(
        g: &'a PlaneGraph,
        fs: &'a FaceSet,
        ls: &'a LevelStructures,
        registry: &'a PageRegistry,
        placed: &'a [Placed],
        order: &[VertexId],
    ) -> Self {
        let mut pos = vec![NONE; g.n()];
        let mut by_level = vec![Vec::new(); ls.leveling.depth];
        for (i, &v) in order.iter().enumerate() {
            pos[v as usize] = i as u32;
            by_level[ls.leveling.level[v as usize] as usize].push((i as u32, v));
        }
        GoodContext { g, fs, ls, registry, placed, pos, by_level }
    }

    /// Placed vertices of level `j` with position in `[lo, hi]`.
    fn count(&self, j: usize, lo: u32, hi: u32) -> usize {
        let list = &self.by_level[j];
        let a = list.partition_point(|&(p, _)| p < lo);
        let b = list.partition_point(|&(p, _)| p <= hi);
        b - a
    }

    fn span(&self, vs: &[VertexId]) -> (u32, u32) {
        let it = vs.iter().map(|&v| self.pos[v as usize]);
        (it.clone().min().unwrap_or(NONE), it.max().unwrap_or(NONE))
    }

    /// Checks bicomponent `i`; `peers` are earlier ones on the same level.
    fn check(&self, i: usize, peers: &[usize]) -> Vec<GoodViolation> {
        let m = &self.placed[i];
        let z = m.level;
        let mut out = Vec::new();
        let mut bad = |property: &'static str, detail: String| {
            out.push(GoodViolation { property, bicomponent: m.bicomponent, detail })
        };
        if m.blocks.iter().flat_map(|b| &b.vertices).chain(&m.cycle).any(|&v| self.pos[v as usize] == NONE) {
            bad("P.2", "vertex missing from the spine".into());
            return out;
        }

        // P.1 for the boundary of the root (level 0 runs clockwise).
        if m.parent.is_none() {
            let outer = self.fs.outer().expect("outer face");
            let d0 = self.g.find_dart(m.cycle[0], m.cycle[1]);
            if d0.map(|d| self.fs.face_of(d)) != Some(outer) {
                bad("P.1", "outer cycle is not in clockwise order".into());
            }
        }

        let rest_of = |b: &PlacedBlock| -> (VertexId, Vec<VertexId>) {
            let l = *b.vertices.iter().min_by_key(|&&v| self.pos[v as usize]).unwrap();
            (l, b.vertices.iter().copied().filter(|&v| v != l).collect())
        };

        for (bk, b) in m.blocks.iter().enumerate() {
            if b.kind == BlockKind::Degenerate {
                continue;
            }
            let (l, rest) = rest_of(b);
            // P.1: the spine reads the block from its leftmost vertex in
            // local counterclockwise order ...
            let len = b.vertices.len();
            let start = b.vertices.iter().position(|&v| v == l).unwrap();
            let seq: Vec<VertexId> = (0..len).map(|x| b.vertices[(start + x) % len]).collect();
            if seq.windows(2).any(|w| self.pos[w[0] as usize] >= self.pos[w[1] as usize]) {
                bad("P.1", format!("block {bk} is not read along its boundary"));
            }
            // ... which is global counterclockwise on odd levels.
            if b.kind == BlockKind::Cycle {
                let d = self.g.find_dart(seq[0], seq[1]).expect("cycle edge");
                let inside_left = self.fs.face_of(d) != self.fs.outer().unwrap()
                    && self.ls.face_minlevel[self.fs.face_of(d) as usize] as usize == z;
                if inside_left != (z % 2 == 1) {
                    bad("P.1", format!("block {bk} runs the wrong way round"));
                }
            }
            // P.2
            let (lo, hi) = self.span(&rest);
            let shallow: usize = (0..=z.min(self.by_level.len() - 1)).map(|j| self.count(j, lo, hi)).sum();
            if shallow != rest.len() {
                bad("P.2", format!("block {bk}: vertices other than the leftmost are not consecutive"));
            }
            if z >= 1 && self.count(z - 1, lo, hi) != 0 {
                bad("P.2", format!("block {bk} is not {}-delimited", z - 1));
            }
            // P.3
            let lpos = self.pos[l as usize];
            if lo > lpos + 1 {
                let list = &self.by_level[z];
                let from = list.partition_point(|&(p, _)| p <= lpos);
                for &(p, v) in &list[from..] {
                    if p >= lo {
                        break;
                    }
                    for (ok, ob) in m.blocks.iter().enumerate() {
                        if ok == bk || ob.component != b.component || !ob.vertices.contains(&v) {
                            continue;
                        }
                        let (ol, _) = rest_of(ob);
                        if self.pos[ol as usize] < lpos && !ob.vertices.contains(&l) {
                            bad("P.3", format!("blocks {bk} and {ok} do not share the leftmost vertex of {bk}"));
                        }
                    }
                }
            }
            // P.5
            let (alo, ahi) = self.span(&b.vertices);
            for j in 0..z.saturating_sub(1) {
                if self.count(j, alo, ahi) != 0 {
                    bad("P.5", format!("block {bk} is not {j}-delimited"));
                }
            }
        }

        // P.4 between blocks of different components.
        let gap_check = |b: &PlacedBlock, o: &PlacedBlock| -> bool {
            let (l, rest) = rest_of(b);
            let (_, orest) = rest_of(o);
            let (lo, _) = self.span(&rest);
            let lp = self.pos[l as usize];
            let inside = orest.iter().filter(|&&v| (lp..lo).contains(&self.pos[v as usize])).count();
            inside == 0 || inside == orest.len()
        };
        let nondeg = |p: &Placed| -> Vec<usize> {
            (0..p.blocks.len()).filter(|&k| p.blocks[k].kind != BlockKind::Degenerate).collect()
        };
        let mine = nondeg(m);
        for &x in &mine {
            for &y in &mine {
                if x < y
                    && m.blocks[x].component != m.blocks[y].component
                    && (!gap_check(&m.blocks[x], &m.blocks[y]) || !gap_check(&m.blocks[y], &m.blocks[x]))
                {
                    bad("P.4", format!("blocks {x} and {y} interleave"));
                }
            }
        }
        for &q in peers {
            let o = &self.placed[q];
            for y in nondeg(o) {
                for &x in &mine {
                    if !gap_check(&m.blocks[x], &o.blocks[y]) || !gap_check(&o.blocks[y], &m.blocks[x]) {
                        bad("P.4", format!("block {x} interleaves block {y} of bicomponent {}", o.bicomponent));
                    }
                }
            }
        }

        // P.6 and P.7.
        let pg = m.pages;
        let core = [pg.b, pg.f1, pg.f2];
        if core.iter().any(|&p| !self.registry.is_core(p)) || pg.b == pg.f1 || pg.b == pg.f2 || pg.f1 == pg.f2 {
            bad("P.7c", format!("core pages {core:?} are not three distinct pages of p0..p4"));
        }
        let mut forward_page: HashMap<u32, PageId> = HashMap::new();
        for o in &m.owned {
            if o.page.0 as usize >= self.registry.len() {
                bad("P.6", format!("pair {:?} on unknown page {}", o.pair, o.page.0));
            }
            match o.class {
                EdgeClass::NonDominator => {
                    if self.registry.parity(o.page) != Some(z % 2) {
                        bad("P.7a", format!("non-dominator pair {:?} on {}", o.pair, self.registry.name(o.page)));
                    }
                }
                EdgeClass::Backward => {
                    if o.page != pg.b {
                        bad("P.7c", format!("backward pair {:?} off page b", o.pair));
                    }
                }
                EdgeClass::Forward => {
                    if o.page != pg.f1 && o.page != pg.f2 {
                        bad("P.7c", format!("forward pair {:?} off pages f1, f2", o.pair));
                    }
                    let blk = o.block.expect("forward pairs carry a block");
                    if *forward_page.entry(blk).or_insert(o.page) != o.page {
                        bad("P.7d", format!("forward pairs into block {blk} use two pages"));
                    }
                }
            }
            let u0 = m.cycle[0];
            if (o.pair.0 == u0 || o.pair.1 == u0) && (o.class != EdgeClass::Backward || o.page != pg.b) {
                bad("P.7b", format!("pair {:?} at the leftmost vertex is not backward on b", o.pair));
            }
        }
        match m.parent {
            None => {
                if pg != BicomponentPages::root(self.registry) {
                    bad("P.7e", "root does not use p0, p1, p2".into());
                }
            }
            Some((pp, pb)) => {
                let par = &self.placed[pp];
                let pc = par.pages;
                let into: Option<PageId> = par
                    .owned
                    .iter()
                    .find(|o| o.class == EdgeClass::Forward && o.block == Some(pb as u32))
                    .map(|o| o.page);
                if pg.b != pc.f1 && pg.b != pc.f2 {
                    bad("P.7e", "b is not a forward page of the parent".into());
                }
                if into == Some(pg.b) {
                    bad("P.7e", "b equals the parent's forward page into the boundary".into());
                }
                let parent_core = [pc.b, pc.f1, pc.f2];
                if parent_core.contains(&pg.f1) || parent_core.contains(&pg.f2) {
                    bad("P.7e", "forward pages overlap the parent's core pages".into());
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn page_chain_matches_worked_example() {
        let r = PageRegistry::new(4);
        let root = BicomponentPages::root(&r);
        let c = choose_pages(&root, r.p(1), false, &r);
        assert_eq!((c.b, c.f1, c.f2), (r.p(2), r.p(3), r.p(4)));
        let gc = choose_pages(&c, r.p(3), false, &r);
        assert_eq!(gc.b, r.p(4));
        let mut f = [gc.f1, gc.f2];
        f.sort();
        assert_eq!(f, [r.p(0), r.p(1)]);
    }

    #[test]
    fn spine_insertions() {
        let mut s = Spine::new(5);
        s.push_back(0);
        s.push_back(1);
        s.insert_before(2, 1);
        s.insert_after(3, 1);
        s.insert_after(4, 3);
        assert_eq!(s.order(), vec![0, 2, 1, 3, 4]);
        assert_eq!(s.positions(5), vec![0, 2, 1, 3, 4]);
    }
}
