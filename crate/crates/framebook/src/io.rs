//! JSON documents for drawings, embeddings and map witnesses, and an SVG
//! arc diagram.
//!
//! Faces are written as canonical vertex cycles (smallest id first, then the
//! direction with the smaller second element).

use crate::graph_core::{canonical_cycle, EdgeId, FaceId, FaceSet, GraphError, PlaneGraph, VertexId};
use crate::kframed::{validate_kframed, CrossingEdge, EdgeOrigin, KFramedDrawing, KFramedError, ValidationReport};
use crate::mapgraph::{MapError, MapWitness};
use crate::oracle::{pair, BookEmbedding};
use crate::two_level::PageRegistry;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use thiserror::Error;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format_version {0}, expected {FORMAT_VERSION}")]
    Version(u32),
    #[error("vertex ids must be exactly 0..{n}: {detail}")]
    VertexIds { n: usize, detail: String },
    #[error("rotation lists {got} vertices, document has {n}")]
    RotationLength { got: usize, n: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("outer_face {0:?} is not a face of the skeleton")]
    OuterFace(Vec<VertexId>),
    #[error("crossing edge {index} ({u}, {v}): host face {host} is not a face of the skeleton")]
    HostFace { index: usize, u: VertexId, v: VertexId, host: String },
    #[error(transparent)]
    Framed(#[from] KFramedError),
    #[error("invalid k-framed drawing: {0}")]
    Invalid(ValidationReport),
    #[error("unknown page name {0:?}")]
    PageName(String),
    #[error("edge ({0}, {1}) is listed on more than one page")]
    DuplicateEdge(VertexId, VertexId),
    #[error("outer dart ({0}, {1}) is not an edge of the witness")]
    OuterDart(VertexId, VertexId),
    #[error(transparent)]
    Map(#[from] MapError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexEntry {
    pub id: VertexId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// Host of a crossing edge: a boundary cycle, a face index in trace order,
/// or the string `"outer"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HostFace {
    Cycle(Vec<VertexId>),
    Index(FaceId),
    Named(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossingEntry {
    pub u: VertexId,
    pub v: VertexId,
    pub host_face: HostFace,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceDocument {
    pub format_version: u32,
    pub k: usize,
    pub vertices: Vec<VertexEntry>,
    /// Skeleton edges; the edge id is the position in this list.
    pub edges: Vec<[VertexId; 2]>,
    /// Counterclockwise edge ids around each vertex, indexed by vertex id.
    pub rotation: Vec<Vec<EdgeId>>,
    pub outer_face: Vec<VertexId>,
    pub crossing_edges: Vec<CrossingEntry>,
}

impl InstanceDocument {
    pub fn from_drawing(d: &KFramedDrawing) -> Self {
        let g = d.skeleton();
        let outer = d.outer_face();
        let vertices = (0..g.n() as VertexId).map(|id| VertexEntry { id, label: None }).collect();
        let edges = g.edges().map(|(a, b)| [a, b]).collect();
        let rotation = (0..g.n() as VertexId).map(|v| g.rotation(v).to_vec()).collect();
        let index = cycle_index(d.skeleton(), d.faces());
        let crossing_edges = d
            .crossings
            .iter()
            .filter(|c| c.origin == EdgeOrigin::Input)
            .map(|c| CrossingEntry { u: c.u, v: c.v, host_face: host_of(d, &index, c.host) })
            .collect();
        InstanceDocument {
            format_version: FORMAT_VERSION,
            k: d.k,
            vertices,
            edges,
            rotation,
            outer_face: d.face_cycle(outer),
            crossing_edges,
        }
    }

    /// Builds the drawing without checking the k-framed invariants.
    pub fn to_drawing_unchecked(&self) -> Result<KFramedDrawing, IoError> {
        if self.format_version != FORMAT_VERSION {
            return Err(IoError::Version(self.format_version));
        }
        let n = self.vertices.len();
        let ids: BTreeSet<VertexId> = self.vertices.iter().map(|v| v.id).collect();
        if ids.len() != n || ids.iter().next_back().is_some_and(|&m| m as usize >= n) {
            let detail = format!("{} entries, {} distinct, max {:?}", n, ids.len(), ids.iter().next_back());
            return Err(IoError::VertexIds { n, detail });
        }
        if self.rotation.len() != n {
            return Err(IoError::RotationLength { got: self.rotation.len(), n });
        }
        let edges = self.edges.iter().map(|e| (e[0], e[1])).collect();
        let mut g = PlaneGraph::new(n, edges, self.rotation.clone())?;
        let fs = g.trace_faces()?;
        let outer =
            fs.find_by_cycle(&g, &self.outer_face).ok_or_else(|| IoError::OuterFace(self.outer_face.clone()))?;
        g.set_outer(fs.face(outer).darts[0]);
        let fs = g.trace_faces()?;
        let outer = fs.outer().expect("just set");
        let by_cycle = cycle_index(&g, &fs);
        let mut crossings = Vec::with_capacity(self.crossing_edges.len());
        for (index, c) in self.crossing_edges.iter().enumerate() {
            let bad = |host: String| IoError::HostFace { index, u: c.u, v: c.v, host };
            let host = match &c.host_face {
                HostFace::Named(s) if s == "outer" => outer,
                HostFace::Named(s) => return Err(bad(format!("{s:?}"))),
                HostFace::Index(f) if (*f as usize) < fs.len() => *f,
                HostFace::Index(f) => return Err(bad(f.to_string())),
                HostFace::Cycle(cyc) => *by_cycle.get(&canonical_cycle(cyc)).ok_or_else(|| bad(format!("{cyc:?}")))?,
            };
            crossings.push(CrossingEdge { u: c.u, v: c.v, host, origin: EdgeOrigin::Input });
        }
        Ok(KFramedDrawing::new(g, self.k, crossings)?)
    }

    /// Builds the drawing and reports every violated invariant.
    pub fn to_drawing(&self) -> Result<KFramedDrawing, IoError> {
        let d = self.to_drawing_unchecked()?;
        let report = validate_kframed(&d);
        if !report.is_valid() {
            return Err(IoError::Invalid(report));
        }
        Ok(d)
    }
}

/// Canonical cycle to face. Bounded faces win over the outer face; a cycle
/// shared by two bounded faces keeps the first.
fn cycle_index(g: &PlaneGraph, fs: &FaceSet) -> HashMap<Vec<VertexId>, FaceId> {
    let mut index = HashMap::new();
    for f in 0..fs.len() as FaceId {
        let key = canonical_cycle(&fs.vertices(g, f));
        if Some(f) == fs.outer() {
            index.entry(key).or_insert(f);
        } else {
            match index.get(&key) {
                Some(&h) if Some(h) != fs.outer() => {}
                _ => {
                    index.insert(key, f);
                }
            }
        }
    }
    index
}

fn host_of(d: &KFramedDrawing, index: &HashMap<Vec<VertexId>, FaceId>, f: FaceId) -> HostFace {
    if f == d.outer_face() {
        return HostFace::Named("outer".into());
    }
    let cyc = d.face_cycle(f);
    if index.get(&cyc) == Some(&f) {
        HostFace::Cycle(cyc)
    } else {
        HostFace::Index(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidatorStatus {
    Valid,
    Invalid,
    Unchecked,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbedMode {
    MultiLevel,
    TwoLevel,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingMetadata {
    pub k: usize,
    pub pages_used: usize,
    /// `6 * ceil(k/2) + 5`.
    pub bound: usize,
    pub validator: ValidatorStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<EmbedMode>,
    /// Pairs moved by the crossing repair pass, multi-level only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repaired_pairs: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingDocument {
    pub format_version: u32,
    pub order: Vec<VertexId>,
    pub pages: BTreeMap<String, Vec<[VertexId; 2]>>,
    pub metadata: EmbeddingMetadata,
}

pub fn bound(k: usize) -> usize {
    6 * k.div_ceil(2) + 5
}

impl EmbeddingDocument {
    pub fn from_embedding(e: &BookEmbedding, validator: ValidatorStatus) -> Self {
        let mut pages: BTreeMap<String, Vec<[VertexId; 2]>> = BTreeMap::new();
        for (&(a, b), &p) in &e.pages {
            pages.entry(e.registry.name(p)).or_default().push([a, b]);
        }
        let k = e.registry.k();
        EmbeddingDocument {
            format_version: FORMAT_VERSION,
            order: e.order.clone(),
            pages,
            metadata: EmbeddingMetadata {
                k,
                pages_used: e.pages_used(),
                bound: bound(k),
                validator,
                mode: None,
                repaired_pairs: None,
            },
        }
    }

    pub fn to_embedding(&self) -> Result<BookEmbedding, IoError> {
        if self.format_version != FORMAT_VERSION {
            return Err(IoError::Version(self.format_version));
        }
        let registry = PageRegistry::new(self.metadata.k);
        let mut pages = BTreeMap::new();
        for (name, list) in &self.pages {
            let p = registry.parse(name).ok_or_else(|| IoError::PageName(name.clone()))?;
            for &[a, b] in list {
                if pages.insert(pair(a, b), p).is_some() {
                    return Err(IoError::DuplicateEdge(a.min(b), a.max(b)));
                }
            }
        }
        Ok(BookEmbedding { order: self.order.clone(), pages, registry })
    }
}

/// Map witness: nations are `0..nations`, points follow.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessDocument {
    pub format_version: u32,
    pub k: usize,
    pub nations: usize,
    pub points: usize,
    /// Nation-point incidences; the edge id is the position in this list.
    pub edges: Vec<[VertexId; 2]>,
    /// Counterclockwise edge ids around each vertex.
    pub rotation: Vec<Vec<EdgeId>>,
    /// A dart `[tail, head]` with the outer face on its left.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer_dart: Option<[VertexId; 2]>,
}

impl WitnessDocument {
    pub fn from_witness(w: &MapWitness) -> Self {
        let g = w.graph();
        WitnessDocument {
            format_version: FORMAT_VERSION,
            k: w.k(),
            nations: w.nations(),
            points: w.points(),
            edges: g.edges().map(|(a, b)| [a, b]).collect(),
            rotation: (0..g.n() as VertexId).map(|v| g.rotation(v).to_vec()).collect(),
            outer_dart: g.outer().map(|d| [g.tail(d), g.head(d)]),
        }
    }

    pub fn to_witness(&self) -> Result<MapWitness, IoError> {
        if self.format_version != FORMAT_VERSION {
            return Err(IoError::Version(self.format_version));
        }
        let n = self.nations + self.points;
        if self.rotation.len() != n {
            return Err(IoError::RotationLength { got: self.rotation.len(), n });
        }
        let edges = self.edges.iter().map(|e| (e[0], e[1])).collect();
        let mut g = PlaneGraph::new(n, edges, self.rotation.clone())?;
        if let Some([a, b]) = self.outer_dart {
            let d = g.find_dart(a, b).ok_or(IoError::OuterDart(a, b))?;
            g.set_outer(d);
        }
        if self.points == 0 && g.m() == 0 {
            return Ok(MapWitness::edgeless(self.nations, self.k));
        }
        Ok(MapWitness::new(g, self.nations, self.k)?)
    }
}

pub fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents always serialize");
    s.push('\n');
    s
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, IoError> {
    Ok(serde_json::from_str(text)?)
}

/// Arc diagram: vertices on a horizontal spine, every edge a semicircle
/// above it, one colour per page.
pub fn render_svg(e: &BookEmbedding) -> String {
    const STEP: f64 = 24.0;
    const MARGIN: f64 = 20.0;
    let n = e.order.len();
    let pos = e.positions();
    let used: BTreeSet<_> = e.pages.values().copied().collect();
    let colour: BTreeMap<_, _> =
        used.iter().enumerate().map(|(i, &p)| (p, format!("hsl({},70%,40%)", (i * 360) / used.len().max(1)))).collect();
    let span = e.pages.keys().map(|&(a, b)| pos[a as usize].abs_diff(pos[b as usize])).max().unwrap_or(0) as f64;
    let width = 2.0 * MARGIN + STEP * n.saturating_sub(1) as f64;
    let spine = MARGIN + span * STEP / 2.0;
    let legend_y = spine + 30.0;
    let height = legend_y + 16.0 * used.len() as f64 + MARGIN;
    let x = |v: VertexId| MARGIN + STEP * pos[v as usize] as f64;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.1}" height="{height:.1}" viewBox="0 0 {width:.1} {height:.1}">"#
    );
    let _ = writeln!(s, r#"<g fill="none" stroke-width="1.5">"#);
    for (&(a, b), p) in &e.pages {
        let (xa, xb) = (x(a).min(x(b)), x(a).max(x(b)));
        let r = (xb - xa) / 2.0;
        let _ = writeln!(
            s,
            r#"<path class="edge" data-page="{}" d="M {xa:.1} {spine:.1} A {r:.1} {r:.1} 0 0 1 {xb:.1} {spine:.1}" stroke="{}"/>"#,
            e.registry.name(*p),
            colour[p]
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN:.1}" y1="{spine:.1}" x2="{:.1}" y2="{spine:.1}" stroke="black"/>"#,
        width - MARGIN
    );
    for &v in &e.order {
        let _ = writeln!(s, r#"<circle class="vertex" cx="{:.1}" cy="{spine:.1}" r="3" fill="black"/>"#, x(v));
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="9" text-anchor="middle">{v}</text>"#,
            x(v),
            spine + 14.0
        );
    }
    for (i, p) in used.iter().enumerate() {
        let y = legend_y + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{MARGIN:.1}" y="{y:.1}" font-size="11" fill="{}">{}</text>"#,
            colour[p],
            e.registry.name(*p)
        );
    }
    let _ = writeln!(s, "</svg>");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{gen_kframed, gen_witness, GenParams};

    #[test]
    fn instance_round_trip() {
        for seed in 0..20 {
            let p = GenParams { seed, k: 5, n: 30, depth: 3, density: 0.5, ..Default::default() };
            let d = gen_kframed(&p).unwrap();
            let doc = InstanceDocument::from_drawing(&d);
            let text = to_json(&doc);
            let back: InstanceDocument = from_json(&text).unwrap();
            assert_eq!(back, doc);
            let d2 = back.to_drawing().unwrap();
            assert_eq!(d2.edge_pairs(), d.edge_pairs());
            assert_eq!(to_json(&InstanceDocument::from_drawing(&d2)), text);
        }
    }

    #[test]
    fn malformed_rotation_names_vertex() {
        let d = gen_kframed(&GenParams { seed: 1, k: 4, n: 8, ..Default::default() }).unwrap();
        let mut doc = InstanceDocument::from_drawing(&d);
        let e = doc.rotation[3].pop().unwrap();
        doc.rotation[2].push(e);
        let err = doc.to_drawing().unwrap_err().to_string();
        assert!(err.contains("vertex 2") || err.contains("vertex 3"), "{err}");
    }

    #[test]
    fn witness_round_trip() {
        let w = gen_witness(7, 12, 6, 4).unwrap();
        let doc = WitnessDocument::from_witness(&w);
        let back: WitnessDocument = from_json(&to_json(&doc)).unwrap();
        assert_eq!(back, doc);
        let w2 = back.to_witness().unwrap();
        assert_eq!(crate::mapgraph::half_square(&w2), crate::mapgraph::half_square(&w));
    }

    #[test]
    fn svg_has_one_arc_per_edge() {
        let d = gen_kframed(&GenParams { seed: 3, k: 4, n: 20, depth: 2, ..Default::default() }).unwrap();
        let (e, _) = crate::multi_level::embed(&d, Default::default()).unwrap();
        let svg = render_svg(&e);
        assert_eq!(svg.matches(r#"class="edge""#).count(), e.pages.len());
        let doc = EmbeddingDocument::from_embedding(&e, ValidatorStatus::Valid);
        assert_eq!(doc.to_embedding().unwrap(), e);
    }
}
