//! Book embeddings, the crossing validator and an exact book thickness
//! solver for small graphs.

use crate::graph_core::VertexId;
use crate::two_level::{PageId, PageRegistry};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Normalized vertex pair, smaller id first.
pub type Pair = (VertexId, VertexId);

pub fn pair(a: VertexId, b: VertexId) -> Pair {
    (a.min(b), a.max(b))
}

/// Spine order plus a page per edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BookEmbedding {
    pub order: Vec<VertexId>,
    pub pages: BTreeMap<Pair, PageId>,
    pub registry: PageRegistry,
}

impl BookEmbedding {
    pub fn pages_used(&self) -> usize {
        self.pages.values().collect::<BTreeSet<_>>().len()
    }
    /// Position of every vertex along the spine.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![usize::MAX; self.order.len()];
        for (i, &v) in self.order.iter().enumerate() {
            if let Some(p) = pos.get_mut(v as usize) {
                *p = i;
            }
        }
        pos
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EmbeddingError {
    #[error("spine order is not a permutation of 0..{0}")]
    NotPermutation(usize),
    #[error("edge ({0}, {1}) has no page")]
    UnmappedEdge(VertexId, VertexId),
    #[error("edge ({0}, {1}) uses a vertex outside the spine")]
    UnknownVertex(VertexId, VertexId),
    #[error("page id {0} is outside the registry")]
    UnknownPage(u16),
}

/// Two edges on the same page that cross.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossingPair {
    pub page: PageId,
    pub first: Pair,
    pub second: Pair,
}

fn check_shape(e: &BookEmbedding, edges: &[Pair]) -> Result<Vec<usize>, EmbeddingError> {
    let n = e.order.len();
    let pos = e.positions();
    if pos.contains(&usize::MAX) {
        return Err(EmbeddingError::NotPermutation(n));
    }
    for &(a, b) in edges {
        if a as usize >= n || b as usize >= n {
            return Err(EmbeddingError::UnknownVertex(a, b));
        }
        match e.pages.get(&pair(a, b)) {
            None => return Err(EmbeddingError::UnmappedEdge(a, b)),
            Some(p) if (p.0 as usize) >= e.registry.len() => return Err(EmbeddingError::UnknownPage(p.0)),
            _ => {}
        }
    }
    Ok(pos)
}

fn spans(pos: &[usize], edges: &[Pair], e: &BookEmbedding) -> BTreeMap<PageId, Vec<(usize, usize, Pair)>> {
    let mut by_page: BTreeMap<PageId, Vec<(usize, usize, Pair)>> = BTreeMap::new();
    let uniq: BTreeSet<Pair> = edges.iter().map(|&(a, b)| pair(a, b)).collect();
    for p in uniq {
        let (x, y) = (pos[p.0 as usize], pos[p.1 as usize]);
        by_page.entry(e.pages[&p]).or_default().push((x.min(y), x.max(y), p));
    }
    by_page
}

/// Returns every crossing pair, grouped by page.
pub fn validate(e: &BookEmbedding, edges: &[Pair]) -> Result<Vec<CrossingPair>, EmbeddingError> {
    let pos = check_shape(e, edges)?;
    let mut out = Vec::new();
    for (page, list) in spans(&pos, edges, e) {
        let iv: Vec<(usize, usize)> = list.iter().map(|&(a, b, _)| (a, b)).collect();
        let mut found = crossing_intervals(&iv);
        found.sort_unstable();
        out.extend(found.into_iter().map(|(i, j)| CrossingPair { page, first: list[i].2, second: list[j].2 }));
    }
    Ok(out)
}

/// All pairs `(i, j)`, `i < j`, of spine intervals that cross. Intervals
/// sharing an endpoint do not cross.
pub fn crossing_intervals(iv: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut idx: Vec<usize> = (0..iv.len()).collect();
    idx.sort_by_key(|&i| iv[i].0);
    let mut open: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut out = Vec::new();
    let mut g = 0;
    while g < idx.len() {
        let l = iv[idx[g]].0;
        let mut h = g;
        while h < idx.len() && iv[idx[h]].0 == l {
            h += 1;
        }
        let gone: Vec<usize> = open.range(..=l).map(|(&r, _)| r).collect();
        for r in gone {
            open.remove(&r);
        }
        for &i in &idx[g..h] {
            let r = iv[i].1;
            if r > l + 1 {
                for (_, js) in open.range(l + 1..r) {
                    out.extend(js.iter().map(|&j| (i.min(j), i.max(j))));
                }
            }
        }
        for &i in &idx[g..h] {
            open.entry(iv[i].1).or_default().push(i);
        }
        g = h;
    }
    out
}

/// Stack based check in O(m log m): reports one crossing if any exists.
pub fn find_crossing(e: &BookEmbedding, edges: &[Pair]) -> Result<Option<CrossingPair>, EmbeddingError> {
    let pos = check_shape(e, edges)?;
    for (page, mut list) in spans(&pos, edges, e) {
        list.sort_by(|x, y| x.0.cmp(&y.0).then(y.1.cmp(&x.1)));
        let mut stack: Vec<(usize, usize, Pair)> = Vec::new();
        for &(l, r, p) in &list {
            while stack.last().is_some_and(|t| t.1 <= l) {
                stack.pop();
            }
            if let Some(&(_, tr, tp)) = stack.last() {
                if tr < r {
                    return Ok(Some(CrossingPair { page, first: tp, second: p }));
                }
            }
            stack.push((l, r, p));
        }
    }
    Ok(None)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("graph has {n} vertices, above the solver cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("edge ({0}, {1}) is out of range or a loop")]
    BadEdge(VertexId, VertexId),
}

/// Optimal book embedding found by [`exact_book_thickness`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactSolution {
    pub thickness: usize,
    /// Lexicographically least optimal spine order.
    pub order: Vec<VertexId>,
    /// Page index per input edge (deduplicated, sorted pairs).
    pub pages: Vec<(Pair, usize)>,
}

/// Minimum number of pages over all spine orders. Vertex 0 is pinned first
/// and the second vertex must be smaller than the last, which removes the
/// rotations and reflections of the cyclic order.
pub fn exact_book_thickness(n: usize, edges: &[Pair], max_n: usize) -> Result<ExactSolution, OracleError> {
    if n > max_n {
        return Err(OracleError::TooLarge { n, cap: max_n });
    }
    let mut uniq = BTreeSet::new();
    for &(a, b) in edges {
        if a == b || a as usize >= n || b as usize >= n {
            return Err(OracleError::BadEdge(a, b));
        }
        uniq.insert(pair(a, b));
    }
    let edges: Vec<Pair> = uniq.into_iter().collect();
    let identity: Vec<VertexId> = (0..n as VertexId).collect();
    if edges.is_empty() || n < 4 {
        let t = usize::from(!edges.is_empty());
        return Ok(ExactSolution { thickness: t, order: identity, pages: edges.iter().map(|&p| (p, 0)).collect() });
    }
    let m = edges.len();
    let mut best = m + 1;
    let mut best_order = identity.clone();
    let mut best_colors = vec![0usize; m];

    let mut rest: Vec<VertexId> = (1..n as VertexId).collect();
    let mut pos = vec![0usize; n];
    let mut conflict = vec![Vec::<usize>::new(); m];
    loop {
        if rest[0] < rest[n - 2] {
            pos[0] = 0;
            for (i, &v) in rest.iter().enumerate() {
                pos[v as usize] = i + 1;
            }
            for c in conflict.iter_mut() {
                c.clear();
            }
            let spans: Vec<(usize, usize)> = edges
                .iter()
                .map(|&(a, b)| {
                    let (x, y) = (pos[a as usize], pos[b as usize]);
                    (x.min(y), x.max(y))
                })
                .collect();
            for i in 0..m {
                for j in i + 1..m {
                    let (a, b) = spans[i];
                    let (c, d) = spans[j];
                    if (a < c && c < b && b < d) || (c < a && a < d && d < b) {
                        conflict[i].push(j);
                        conflict[j].push(i);
                    }
                }
            }
            let lb = greedy_clique(&conflict);
            if lb < best {
                if let Some(colors) = color_with(&conflict, best - 1) {
                    let used = colors.iter().max().map_or(0, |c| c + 1);
                    best = used.max(1);
                    best_order = std::iter::once(0).chain(rest.iter().copied()).collect();
                    best_colors = colors;
                    // Improve further on the same order before moving on.
                    while best > lb {
                        match color_with(&conflict, best - 1) {
                            Some(c) => {
                                best = c.iter().max().map_or(0, |x| x + 1).max(1);
                                best_colors = c;
                            }
                            None => break,
                        }
                    }
                    if best == 1 {
                        break;
                    }
                }
            }
        }
        if !next_permutation(&mut rest) {
            break;
        }
    }
    Ok(ExactSolution { thickness: best, order: best_order, pages: edges.iter().copied().zip(best_colors).collect() })
}

fn next_permutation(a: &mut [VertexId]) -> bool {
    if a.len() < 2 {
        return false;
    }
    let mut i = a.len() - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = a.len() - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

fn greedy_clique(adj: &[Vec<usize>]) -> usize {
    let mut best = usize::from(!adj.is_empty());
    for s in 0..adj.len() {
        let mut clique = vec![s];
        let mut cand: Vec<usize> = adj[s].clone();
        cand.sort_by_key(|&v| std::cmp::Reverse(adj[v].len()));
        for v in cand {
            if clique.iter().all(|&c| adj[v].contains(&c)) {
                clique.push(v);
            }
        }
        best = best.max(clique.len());
    }
    best
}

/// Proper coloring with at most `limit` colors, by backtracking in
/// decreasing degree order. `None` if impossible.
fn color_with(adj: &[Vec<usize>], limit: usize) -> Option<Vec<usize>> {
    if limit == 0 {
        return None;
    }
    let m = adj.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(adj[v].len()));
    let mut color = vec![usize::MAX; m];
    fn rec(i: usize, order: &[usize], adj: &[Vec<usize>], color: &mut [usize], limit: usize, used: usize) -> bool {
        if i == order.len() {
            return true;
        }
        let v = order[i];
        // New colors are interchangeable: try only one unused color.
        for c in 0..limit.min(used + 1) {
            if adj[v].iter().all(|&w| color[w] != c) {
                color[v] = c;
                if rec(i + 1, order, adj, color, limit, used.max(c + 1)) {
                    return true;
                }
                color[v] = usize::MAX;
            }
        }
        false
    }
    if rec(0, &order, adj, &mut color, limit, 0) {
        Some(color)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn interval_crossings() {
        let iv = [(0, 4), (2, 6), (4, 8), (1, 3), (0, 8)];
        let mut got = super::crossing_intervals(&iv);
        got.sort_unstable();
        assert_eq!(got, vec![(0, 1), (1, 2), (1, 3)]);
    }

    use super::*;

    fn complete(n: u32) -> Vec<Pair> {
        (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect()
    }

    fn one_page(order: Vec<u32>, edges: &[Pair]) -> BookEmbedding {
        let registry = PageRegistry::new(3);
        BookEmbedding { order, pages: edges.iter().map(|&e| (pair(e.0, e.1), registry.p(0))).collect(), registry }
    }

    #[test]
    fn cycle_on_one_page_is_valid() {
        let edges = vec![(0, 1), (1, 2), (2, 3), (0, 3)];
        let e = one_page(vec![0, 1, 2, 3], &edges);
        assert!(validate(&e, &edges).unwrap().is_empty());
        assert!(find_crossing(&e, &edges).unwrap().is_none());
    }

    #[test]
    fn interleaved_pair_crosses() {
        let edges = vec![(1, 3), (2, 4)];
        let e = one_page(vec![0, 1, 2, 3, 4], &edges);
        let c = validate(&e, &edges).unwrap();
        assert_eq!(c.len(), 1);
        assert!(find_crossing(&e, &edges).unwrap().is_some());
    }

    #[test]
    fn unmapped_edge_is_an_error() {
        let e = one_page(vec![0, 1, 2], &[(0, 1)]);
        assert_eq!(validate(&e, &[(1, 2)]), Err(EmbeddingError::UnmappedEdge(1, 2)));
    }

    #[test]
    fn complete_graphs() {
        // K3 is outerplanar; the ceil(n/2) formula starts at n = 4.
        assert_eq!(exact_book_thickness(3, &complete(3), 9).unwrap().thickness, 1);
        for n in 4..=7u32 {
            let s = exact_book_thickness(n as usize, &complete(n), 9).unwrap();
            assert_eq!(s.thickness, (n as usize).div_ceil(2), "K{n}");
        }
        assert_eq!(exact_book_thickness(4, &complete(4), 9).unwrap().thickness, 2);
    }

    #[test]
    fn outerplanar_needs_one_page() {
        let mut edges: Vec<Pair> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        edges.push((1, 3));
        assert_eq!(exact_book_thickness(6, &edges, 9).unwrap().thickness, 1);
    }

    #[test]
    fn solver_refuses_large_inputs() {
        assert!(matches!(exact_book_thickness(12, &[], 9), Err(OracleError::TooLarge { .. })));
    }

    #[test]
    fn stack_check_agrees_with_pairwise_check() {
        // Every order of K5 on one page: both checks agree on validity.
        let edges = complete(5);
        let mut rest = vec![1, 2, 3, 4];
        loop {
            let order: Vec<u32> = std::iter::once(0).chain(rest.iter().copied()).collect();
            let e = one_page(order, &edges);
            assert_eq!(validate(&e, &edges).unwrap().is_empty(), find_crossing(&e, &edges).unwrap().is_none());
            if !next_permutation(&mut rest) {
                break;
            }
        }
    }
}
