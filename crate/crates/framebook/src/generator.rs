//! Seeded instance generators.
//!
//! Randomness comes from SplitMix64 (Steele, Lea, Flood 2014): state advances
//! by `0x9E3779B97F4A7C15`, output is the state mixed by two xor-shift
//! multiply rounds. `below(n)` takes the high 64 bits of `next * n`.

use crate::graph_core::{PlaneGraph, VertexId};
use crate::kframed::{CrossingEdge, EdgeOrigin, KFramedDrawing};
use crate::mapgraph::{witness_from_plane, MapWitness};
use std::collections::HashSet;
use thiserror::Error;

#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    /// Uniform in `0..n`; `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }
    /// Uniform in `lo..=hi`.
    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        lo + self.below(hi - lo + 1)
    }
    /// True with probability `p`, from the top 53 bits.
    pub fn chance(&mut self, p: f64) -> bool {
        ((self.next_u64() >> 11) as f64 / (1u64 << 53) as f64) < p
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenParams {
    pub seed: u64,
    pub k: usize,
    pub n: usize,
    /// Number of levels.
    pub depth: usize,
    /// Share of each face's non-boundary pairs drawn as crossing edges.
    pub density: f64,
    /// Pentagon skeleton with every bounded face fully diagonalized; forces
    /// `k = 5` and density 1, ignores `depth`.
    pub pentagon: bool,
    /// Two levels only, no crossing edges in the outer face or in faces
    /// without level 0 vertices.
    pub two_level: bool,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams { seed: 0, k: 4, n: 12, depth: 2, density: 0.5, pentagon: false, two_level: false }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
}

/// Faces as vertex cycles with the face on the left of every step.
struct Builder {
    faces: Vec<Vec<VertexId>>,
    outer: usize,
    level: Vec<u32>,
    edges: HashSet<(VertexId, VertexId)>,
}

fn key(a: VertexId, b: VertexId) -> (VertexId, VertexId) {
    (a.min(b), a.max(b))
}

impl Builder {
    fn cycle(s: usize) -> Self {
        let inner: Vec<VertexId> = (0..s as VertexId).collect();
        let mut outer = inner.clone();
        outer[1..].reverse();
        let edges = (0..s).map(|i| key(i as VertexId, ((i + 1) % s) as VertexId)).collect();
        Builder { faces: vec![outer, inner], outer: 0, level: vec![0; s], edges }
    }
    fn n(&self) -> usize {
        self.level.len()
    }
    fn add_vertex(&mut self, level: u32) -> VertexId {
        self.level.push(level);
        (self.level.len() - 1) as VertexId
    }
    fn minlevel(&self, f: usize) -> u32 {
        self.faces[f].iter().map(|&v| self.level[v as usize]).min().unwrap()
    }
    fn has_level(&self, vs: &[VertexId], l: u32) -> bool {
        vs.iter().any(|&v| self.level[v as usize] == l)
    }
    fn add_cycle_edges(&mut self, c: &[VertexId]) {
        for i in 0..c.len() {
            self.edges.insert(key(c[i], c[(i + 1) % c.len()]));
        }
    }
    fn replace(&mut self, f: usize, parts: Vec<Vec<VertexId>>) {
        let mut it = parts.into_iter();
        self.faces[f] = it.next().unwrap();
        let first = self.faces[f].clone();
        self.add_cycle_edges(&first);
        for p in it {
            self.add_cycle_edges(&p);
            self.faces.push(p);
        }
    }

    /// Arc of face `f` from position `i` to `j`, both included.
    fn arc(&self, f: usize, i: usize, j: usize) -> Vec<VertexId> {
        let c = &self.faces[f];
        let q = c.len();
        let mut out = vec![c[i]];
        let mut x = i;
        while x != j {
            x = (x + 1) % q;
            out.push(c[x]);
        }
        out
    }

    /// Chord or path with `len` new vertices between two boundary vertices.
    fn split(&mut self, rng: &mut SplitMix64, f: usize, len: usize, k: usize) -> bool {
        let q = self.faces[f].len();
        let i = rng.below(q);
        let j = (i + rng.range(1, q - 1)) % q;
        let (a, b) = (self.faces[f][i], self.faces[f][j]);
        if len == 0 && (j == (i + 1) % q || i == (j + 1) % q || self.edges.contains(&key(a, b))) {
            return false;
        }
        let mut pa = self.arc(f, i, j);
        let mut pb = self.arc(f, j, i);
        if pa.len() + len > k || pb.len() + len > k {
            return false;
        }
        let ml = self.minlevel(f);
        if !self.has_level(&pa, ml) || !self.has_level(&pb, ml) {
            return false;
        }
        let path: Vec<VertexId> = (0..len).map(|_| self.add_vertex(ml + 1)).collect();
        pa.extend(path.iter().rev());
        pb.extend(path.iter());
        self.replace(f, vec![pa, pb]);
        true
    }

    /// With `strict`, no boundary edge may end up between two faces
    /// without a shallowest vertex.
    /// Whether the face other than `f` that steps from `a` to `b` has a
    /// vertex of level `l`.
    fn twin_has_level(&self, f: usize, a: VertexId, b: VertexId, l: u32) -> bool {
        self.faces.iter().enumerate().any(|(g, c)| {
            g != f && (0..c.len()).any(|i| c[i] == a && c[(i + 1) % c.len()] == b) && self.has_level(c, l)
        })
    }

    fn stellate(&mut self, f: usize, strict: bool) -> bool {
        let c = self.faces[f].clone();
        let q = c.len();
        let ml = self.minlevel(f);
        // An edge between two deeper vertices must keep a face with a
        // shallowest vertex on one side.
        if strict
            && (0..q).any(|i| {
                let (a, b) = (c[i], c[(i + 1) % q]);
                self.level[a as usize] > ml && self.level[b as usize] > ml && !self.twin_has_level(f, b, a, ml)
            })
        {
            return false;
        }
        // Every deeper vertex keeps a shallowest neighbour on a triangle.
        let ok = (0..q).all(|i| {
            self.level[c[i] as usize] == ml
                || self.level[c[(i + 1) % q] as usize] == ml
                || self.level[c[(i + q - 1) % q] as usize] == ml
        });
        if !ok {
            return false;
        }
        let h = self.add_vertex(ml + 1);
        let parts = (0..q).map(|i| vec![c[i], c[(i + 1) % q], h]).collect();
        self.replace(f, parts);
        true
    }

    /// New cycle of length `c` inside face `f`, tied to it by a zigzag of
    /// binding edges. Returns the inner face index.
    fn nest(&mut self, rng: &mut SplitMix64, f: usize, c: usize, k: usize) -> Option<usize> {
        let outer = self.faces[f].clone();
        let q = outer.len();
        let ml = self.minlevel(f);
        let p0 = rng.below(q);
        let mut steps = Vec::new();
        let (mut rp, mut rr) = (q, c);
        while rp + rr > 0 {
            let smax = (k - 2).min(rp + rr);
            let s = rng.range(1, smax);
            let lo = s.saturating_sub(rr.min(c - 1));
            let hi = s.min(rp).min(q - 1);
            if lo > hi {
                continue;
            }
            let dp = rng.range(lo, hi);
            let dr = s - dp;
            if dr > c - 1 {
                continue;
            }
            steps.push((dp, dr));
            rp -= dp;
            rr -= dr;
        }
        if steps.len() < 2 {
            return None;
        }
        let base = self.n() as VertexId;
        let mut bound = HashSet::new();
        let mut parts = Vec::new();
        let (mut p, mut r) = (p0, 0usize);
        for &(dp, dr) in &steps {
            let mut face: Vec<VertexId> = (0..=dp).map(|x| outer[(p + x) % q]).collect();
            if !self.has_level(&face, ml) || !bound.insert((p % q, r % c)) {
                return None;
            }
            face.extend((0..=dr).rev().map(|x| base + ((r + x) % c) as VertexId));
            parts.push(face);
            p += dp;
            r += dr;
        }
        for _ in 0..c {
            self.add_vertex(ml + 1);
        }
        let inner: Vec<VertexId> = (0..c as VertexId).map(|x| base + x).collect();
        parts.push(inner);
        let idx = self.faces.len() + parts.len() - 2;
        self.replace(f, parts);
        Some(idx)
    }

    /// Splits a pentagon into three pentagons around a new center.
    fn pentagon_split(&mut self, rng: &mut SplitMix64, f: usize) {
        let o = rng.below(5);
        let a: Vec<VertexId> = (0..5).map(|i| self.faces[f][(o + i) % 5]).collect();
        let c = self.add_vertex(0);
        let x = self.add_vertex(0);
        let y = self.add_vertex(0);
        self.replace(f, vec![vec![a[0], a[1], a[2], x, c], vec![a[2], a[3], y, c, x], vec![a[3], a[4], a[0], c, y]]);
    }

    /// Rotation system from the face cycles.
    fn into_graph(self) -> (PlaneGraph, Vec<Vec<VertexId>>, usize) {
        let n = self.n();
        // succ[v] holds (w, u): counterclockwise after v->w comes v->u.
        let mut succ: Vec<Vec<(VertexId, VertexId)>> = vec![Vec::new(); n];
        for c in &self.faces {
            let l = c.len();
            for i in 0..l {
                let (u, v, w) = (c[i], c[(i + 1) % l], c[(i + 2) % l]);
                succ[v as usize].push((w, u));
            }
        }
        let rot: Vec<Vec<VertexId>> = succ
            .iter()
            .map(|s| {
                let mut out = Vec::with_capacity(s.len());
                let Some(&(start, _)) = s.first() else { return out };
                let mut cur = start;
                loop {
                    out.push(cur);
                    cur = s.iter().find(|&&(w, _)| w == cur).expect("closed rotation").1;
                    if cur == start {
                        break;
                    }
                }
                assert_eq!(out.len(), s.len(), "rotation splits into several cycles");
                out
            })
            .collect();
        let mut g = PlaneGraph::from_neighbor_rotation(&rot).expect("consistent rotation");
        let oc = &self.faces[self.outer];
        let d = g.find_dart(oc[0], oc[1]).expect("outer edge");
        g.set_outer(d);
        (g, self.faces, self.outer)
    }
}

fn check_params(p: &GenParams) -> Result<(), GenError> {
    if p.k < 3 {
        return Err(GenError::Params(format!("k = {} is below 3", p.k)));
    }
    if p.depth < 1 {
        return Err(GenError::Params("depth must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&p.density) {
        return Err(GenError::Params(format!("density {} outside [0, 1]", p.density)));
    }
    if p.n < 3 {
        return Err(GenError::Infeasible(format!("n = {} is below 3", p.n)));
    }
    Ok(())
}

/// Random k-framed drawing with exactly `n` vertices and `depth` levels.
pub fn gen_kframed(p: &GenParams) -> Result<KFramedDrawing, GenError> {
    check_params(p)?;
    let mut rng = SplitMix64::new(p.seed);
    if p.pentagon {
        return gen_pentagon(p, &mut rng);
    }
    let depth = if p.two_level { 2 } else { p.depth };
    if p.two_level && p.depth != 2 && p.depth != 1 {
        return Err(GenError::Params("two-level instances have depth at most 2".into()));
    }
    let depth = if p.two_level { depth.min(p.depth.max(1)) } else { depth };
    let (n, k) = (p.n, p.k);
    if depth == 1 && n > k {
        return Err(GenError::Infeasible(format!("depth 1 needs n <= k, got n = {n}, k = {k}")));
    }
    if n < 3 * depth {
        return Err(GenError::Infeasible(format!("depth {depth} needs at least {} vertices", 3 * depth)));
    }
    let s0 = if depth == 1 { n } else { rng.range(3, k.min(n - 3 * (depth - 1))) };
    let mut b = Builder::cycle(s0);

    // A chain of nested cycles reaches the requested depth.
    let mut f = 1;
    for lvl in 1..depth {
        let reserve = 3 * (depth - 1 - lvl);
        let cmax = k.min(n - b.n() - reserve);
        let mut placed = None;
        for _ in 0..64 {
            let c = rng.range(3, cmax);
            if let Some(inner) = b.nest(&mut rng, f, c, k) {
                placed = Some(inner);
                break;
            }
        }
        f = placed.ok_or_else(|| GenError::Infeasible("could not nest a level".into()))?;
    }

    // Fill up with random operations that keep every level where it is.
    let max_new = depth as u32 - 1;
    let mut attempts = 0usize;
    let limit = 400 * n + 1000;
    let chords_wanted = rng.below(n / 2 + 2);
    let mut chords = 0;
    while b.n() < n || chords < chords_wanted {
        attempts += 1;
        if attempts > limit {
            if b.n() < n {
                return Err(GenError::Infeasible("ran out of attempts while growing".into()));
            }
            break;
        }
        let f = 1 + rng.below(b.faces.len() - 1);
        let f = if f == b.outer { 0 } else { f };
        if f == b.outer {
            continue;
        }
        let ml = b.minlevel(f);
        let room = n - b.n();
        let roll = rng.below(100);
        if roll < 25 || room == 0 {
            if chords < chords_wanted && !(p.two_level && ml >= 1) && b.split(&mut rng, f, 0, k) {
                chords += 1;
            }
            continue;
        }
        if ml + 1 > max_new {
            continue;
        }
        if roll < 60 {
            let len = rng.range(1, (k - 2).min(room).max(1));
            if k > 3 {
                b.split(&mut rng, f, len, k);
            }
        } else if roll < 80 {
            b.stellate(f, p.two_level);
        } else if room >= 3 {
            let c = rng.range(3, k.min(room));
            b.nest(&mut rng, f, c, k);
        }
    }
    finish(b, p, &mut rng)
}

fn gen_pentagon(p: &GenParams, rng: &mut SplitMix64) -> Result<KFramedDrawing, GenError> {
    if p.n < 5 {
        return Err(GenError::Infeasible("the pentagon pattern needs n >= 5".into()));
    }
    let mut b = Builder::cycle(5);
    for _ in 0..(p.n - 5) / 3 {
        let f = loop {
            let f = rng.below(b.faces.len());
            if f != b.outer {
                break f;
            }
        };
        b.pentagon_split(rng, f);
    }
    let q = GenParams { k: 5, density: 1.0, two_level: true, ..p.clone() };
    // Bounded faces only: one clique per face, as in the optimal 2-planar
    // pattern.
    finish_with(b, 5, &q, rng, false)
}

fn finish(b: Builder, p: &GenParams, rng: &mut SplitMix64) -> Result<KFramedDrawing, GenError> {
    finish_with(b, p.k, p, rng, !p.two_level)
}

fn finish_with(
    b: Builder,
    k: usize,
    p: &GenParams,
    rng: &mut SplitMix64,
    outer_crossings: bool,
) -> Result<KFramedDrawing, GenError> {
    let level = b.level.clone();
    let (g, faces, outer) = b.into_graph();
    let fs = g.trace_faces().expect("consistent");
    let mut crossings = Vec::new();
    for (i, c) in faces.iter().enumerate() {
        if i == outer && !outer_crossings {
            continue;
        }
        if p.two_level && !p.pentagon && i != outer && c.iter().all(|&v| level[v as usize] >= 1) {
            continue;
        }
        let host = fs.face_of(g.find_dart(c[0], c[1]).expect("face edge"));
        let q = c.len();
        for x in 0..q {
            for y in x + 2..q {
                if x == 0 && y == q - 1 {
                    continue;
                }
                if p.density >= 1.0 || (p.density > 0.0 && rng.chance(p.density)) {
                    let (u, v) = key(c[x], c[y]);
                    crossings.push(CrossingEdge { u, v, host, origin: EdgeOrigin::Input });
                }
            }
        }
    }
    KFramedDrawing::new(g, k, crossings).map_err(|e| GenError::Infeasible(e.to_string()))
}

/// Random map witness with `nations` nations and exactly `points` points,
/// each point touching between 2 and `k` nations.
pub fn gen_witness(seed: u64, nations: usize, points: usize, k: usize) -> Result<MapWitness, GenError> {
    if k < 2 {
        return Err(GenError::Params("k must be at least 2".into()));
    }
    let mut rng = SplitMix64::new(seed);
    if nations < 3 {
        if points == 0 {
            return Ok(MapWitness::edgeless(nations, k));
        }
        return Err(GenError::Infeasible("points need at least 3 nations here".into()));
    }
    // Fewer than 6 nations cannot carry two levels: use one cycle.
    let kh = if nations < 6 { k.max(nations) } else { k.max(3) };
    let depth = if nations <= kh { 1 } else { 2 + rng.below(if nations >= 9 { 2 } else { 1 }) };
    let params = GenParams { seed: rng.next_u64(), k: kh, n: nations, depth, density: 0.0, ..Default::default() };
    let d = gen_kframed(&params)?;
    let g = d.skeleton();
    let fs = d.faces();
    // Candidates: edges and bounded faces of degree <= k.
    let mut cand: Vec<(bool, u32)> = (0..g.m() as u32).map(|e| (false, e)).collect();
    for f in 0..fs.len() as u32 {
        if Some(f) != fs.outer() && fs.face(f).degree() <= k {
            cand.push((true, f));
        }
    }
    if points > cand.len() {
        return Err(GenError::Infeasible(format!("at most {} points fit on {nations} nations", cand.len())));
    }
    for i in 0..points {
        let j = i + rng.below(cand.len() - i);
        cand.swap(i, j);
    }
    let mut edge_pt = vec![false; g.m()];
    let mut face_pt = vec![false; fs.len()];
    for &(is_face, id) in &cand[..points] {
        if is_face {
            face_pt[id as usize] = true;
        } else {
            edge_pt[id as usize] = true;
        }
    }
    Ok(witness_from_plane(g, fs, &edge_pt, &face_pt, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kframed::validate_kframed;
    use crate::peeling::peel_levels;

    #[test]
    fn splitmix_reference_values() {
        // First outputs for seed 0, as published with the algorithm.
        let mut r = SplitMix64::new(0);
        assert_eq!(r.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(r.next_u64(), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn grid_is_valid_and_deep_enough() {
        for seed in 0..60 {
            for k in 3..=8 {
                let depth = 1 + (seed as usize % 5);
                let n = if depth == 1 { k } else { 3 * depth + (seed as usize * 7) % 60 };
                let p = GenParams { seed, k, n, depth, density: 0.5, ..Default::default() };
                let d = gen_kframed(&p).unwrap_or_else(|e| panic!("{p:?}: {e}"));
                assert!(validate_kframed(&d).is_valid(), "{p:?}: {}", validate_kframed(&d));
                assert_eq!(d.n(), n);
                assert_eq!(peel_levels(&d).depth, depth, "{p:?}");
            }
        }
    }

    #[test]
    fn pentagon_pattern() {
        let p = GenParams { seed: 3, k: 5, n: 5, depth: 1, density: 1.0, pentagon: true, ..Default::default() };
        let d = gen_kframed(&p).unwrap();
        assert_eq!(d.crossings.len(), 5);
        let p = GenParams { n: 50, ..p };
        let d = gen_kframed(&p).unwrap();
        assert!(validate_kframed(&d).is_valid());
        assert!((0..d.faces().len() as u32).all(|f| d.faces().face(f).degree() == 5));
    }

    #[test]
    fn density_zero_has_no_crossings() {
        let p = GenParams { seed: 9, k: 6, n: 40, depth: 3, density: 0.0, ..Default::default() };
        assert!(gen_kframed(&p).unwrap().crossings.is_empty());
    }

    #[test]
    fn deterministic() {
        let p = GenParams { seed: 77, k: 5, n: 60, depth: 4, density: 0.5, ..Default::default() };
        let a = gen_kframed(&p).unwrap();
        let b = gen_kframed(&p).unwrap();
        assert_eq!(a.skeleton().edges().collect::<Vec<_>>(), b.skeleton().edges().collect::<Vec<_>>());
        assert_eq!(a.crossings, b.crossings);
    }

    #[test]
    fn refusals() {
        let p = GenParams { k: 4, n: 9, depth: 1, ..Default::default() };
        assert!(matches!(gen_kframed(&p), Err(GenError::Infeasible(_))));
        let p = GenParams { k: 4, n: 5, depth: 2, ..Default::default() };
        assert!(matches!(gen_kframed(&p), Err(GenError::Infeasible(_))));
        let p = GenParams { k: 2, ..Default::default() };
        assert!(matches!(gen_kframed(&p), Err(GenError::Params(_))));
    }
}
