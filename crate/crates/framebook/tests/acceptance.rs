//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use framebook::generator::{gen_kframed, gen_witness, GenParams, SplitMix64};
use framebook::kframed::{validate_kframed, KFramedDrawing};
use framebook::mapgraph::{half_square, map_to_framed};
use framebook::multi_level::{embed, GoodChecks, MultiLevelOptions};
use framebook::oracle::{exact_book_thickness, pair, validate, Pair};
use framebook::two_level::{embed_two_level_drawing, is_one_page};
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;
type Set = [(GenParams, KFramedDrawing)];

fn bound(k: usize) -> usize {
    6 * k.div_ceil(2) + 5
}

/// Soundness grid: k 3..8, depth 1..5, density 0, 0.5, 1, n <= 300.
fn grid() -> Vec<GenParams> {
    (0..540u64)
        .map(|seed| {
            let s = seed as usize;
            let k = 3 + s % 6;
            let depth = 1 + (s / 6) % 5;
            let density = [0.0, 0.5, 1.0][(s / 30) % 3];
            let n = if depth == 1 { k } else { 3 * depth + (s * 37) % (301 - 3 * depth) };
            GenParams { seed, k, n, depth, density, ..Default::default() }
        })
        .collect()
}

fn two_level_set() -> Vec<GenParams> {
    (0..240u64)
        .map(|seed| {
            let s = seed as usize;
            let k = 3 + s % 6;
            let density = [0.0, 0.5, 1.0][(s / 6) % 3];
            let n = 6 + (s * 29) % 200;
            GenParams { seed, k, n, depth: 2, density, two_level: true, ..Default::default() }
        })
        .collect()
}

fn drawings(ps: &[GenParams]) -> Result<Vec<(GenParams, KFramedDrawing)>, String> {
    ps.iter()
        .map(|p| gen_kframed(p).map(|d| (p.clone(), d)).map_err(|e| format!("generator refused {p:?}: {e}")))
        .collect()
}

fn c1_soundness(set: &Set) -> Outcome {
    let start = Instant::now();
    let mut repaired = (0, 0);
    for (p, d) in set {
        let (e, r) = embed(d, MultiLevelOptions::default()).map_err(|e| format!("{p:?}: {e}"))?;
        let c = validate(&e, &d.input_edge_pairs()).map_err(|e| format!("{p:?}: {e}"))?;
        if let Some(x) = c.first() {
            return Err(format!("{p:?}: {} crossings, first {x:?}", c.len()));
        }
        if r.stats.repaired_pairs > 0 {
            repaired.0 += 1;
            repaired.1 += r.stats.repaired_pairs;
        }
    }
    let t = start.elapsed();
    if t > Duration::from_secs(60) {
        return Err(format!("took {t:?}"));
    }
    Ok(format!(
        "{} instances, 0 crossings, {t:.2?}; repair pass moved {} pairs in {} instances",
        set.len(),
        repaired.1,
        repaired.0
    ))
}

fn c2_bound(set: &Set) -> Outcome {
    let mut worst = 0.0f64;
    for (p, d) in set {
        let (e, _) = embed(d, MultiLevelOptions::default()).map_err(|e| format!("{p:?}: {e}"))?;
        if e.pages_used() > bound(p.k) {
            return Err(format!("{p:?}: {} pages > {}", e.pages_used(), bound(p.k)));
        }
        worst = worst.max(e.pages_used() as f64 / bound(p.k) as f64);
    }
    Ok(format!("{} instances within 6*ceil(k/2)+5, max ratio {worst:.2}", set.len()))
}

fn c3_two_level(set: &Set) -> Outcome {
    for (p, d) in set {
        let (e, _) = embed_two_level_drawing(d).map_err(|e| format!("{p:?}: {e}"))?;
        let lim = 3 * p.k.div_ceil(2) + 2;
        if e.pages_used() > lim {
            return Err(format!("{p:?}: {} pages > {lim}", e.pages_used()));
        }
        let c = validate(&e, &d.input_edge_pairs()).map_err(|e| e.to_string())?;
        if !c.is_empty() {
            return Err(format!("{p:?}: {} crossings", c.len()));
        }
    }
    Ok(format!("{} two-level instances within 3*ceil(k/2)+2, 0 crossings", set.len()))
}

fn c4_pentagon() -> Outcome {
    let mut max = 0;
    for seed in 0..60u64 {
        let n = 5 + 3 * (seed as usize % 40);
        let p = GenParams { seed, k: 5, n, pentagon: true, ..Default::default() };
        let d = gen_kframed(&p).map_err(|e| format!("{p:?}: {e}"))?;
        let (e, _) = embed(&d, MultiLevelOptions::default()).map_err(|e| format!("{p:?}: {e}"))?;
        let c = validate(&e, &d.input_edge_pairs()).map_err(|e| e.to_string())?;
        if !c.is_empty() || e.pages_used() > 23 {
            return Err(format!("{p:?}: {} pages, {} crossings", e.pages_used(), c.len()));
        }
        max = max.max(e.pages_used());
    }
    Ok(format!("60 pentagon instances, max {max} pages (limit 23)"))
}

fn c5_maps() -> Outcome {
    let mut count = 0;
    for seed in 0..120u64 {
        let k = 2 + seed as usize % 3;
        let nations = 3 + (seed as usize * 7) % 40;
        let points = nations / 2 + seed as usize % 3;
        let w = match gen_witness(seed, nations, points, k) {
            Ok(w) => w,
            Err(e) => return Err(format!("witness seed {seed}: {e}")),
        };
        let d = map_to_framed(&w).map_err(|e| format!("seed {seed}: {e}"))?;
        if d.k != 2 * k || !validate_kframed(&d).is_valid() {
            return Err(format!("seed {seed}: not a valid {}-framed drawing", 2 * k));
        }
        let have: std::collections::HashSet<Pair> = d.edge_pairs().into_iter().collect();
        if !half_square(&w).iter().all(|p| have.contains(p)) {
            return Err(format!("seed {seed}: half-square not contained"));
        }
        let (e, _) = embed(&d, MultiLevelOptions::default()).map_err(|e| format!("seed {seed}: {e}"))?;
        let c = validate(&e, &d.input_edge_pairs()).map_err(|e| e.to_string())?;
        if !c.is_empty() || e.pages_used() > 6 * k + 5 {
            return Err(format!("seed {seed}: {} pages, {} crossings", e.pages_used(), c.len()));
        }
        count += 1;
    }
    Ok(format!("{count} witnesses with k <= 4 embed within 6k+5"))
}

fn complete(n: usize) -> Vec<Pair> {
    (0..n as u32).flat_map(|a| (a + 1..n as u32).map(move |b| (a, b))).collect()
}

fn maximal_outerplanar(rng: &mut SplitMix64, n: usize) -> Vec<Pair> {
    let mut edges: Vec<Pair> = (0..n as u32).map(|i| pair(i, (i + 1) % n as u32)).collect();
    let mut stack = vec![(0usize, n - 1)];
    while let Some((lo, hi)) = stack.pop() {
        if hi - lo < 2 {
            continue;
        }
        let m = rng.range(lo + 1, hi - 1);
        for (a, b) in [(lo, m), (m, hi)] {
            if b - a > 1 {
                edges.push(pair(a as u32, b as u32));
            }
            stack.push((a, b));
        }
    }
    let mut perm: Vec<u32> = (0..n as u32).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.below(i + 1));
    }
    edges.into_iter().map(|(a, b)| pair(perm[a as usize], perm[b as usize])).collect()
}

fn c6_oracle() -> Outcome {
    let mut slowest = Duration::ZERO;
    let mut solve = |n: usize, edges: &[Pair]| -> Result<usize, String> {
        let t = Instant::now();
        let s = exact_book_thickness(n, edges, 9).map_err(|e| e.to_string())?;
        let el = t.elapsed();
        if el > Duration::from_secs(30) {
            return Err(format!("n = {n} took {el:?}"));
        }
        slowest = slowest.max(el);
        Ok(s.thickness)
    };
    let k6 = solve(6, &complete(6))?;
    if k6 != 3 {
        return Err(format!("K6 gave {k6}"));
    }
    let k4 = solve(4, &complete(4))?;
    if k4 != 2 {
        return Err(format!("K4 gave {k4}"));
    }
    // K3 is a triangle, hence outerplanar.
    if solve(3, &complete(3))? != 1 {
        return Err("K3 is not 1".into());
    }
    for n in 4..=8 {
        let t = solve(n, &complete(n))?;
        if t != n.div_ceil(2) {
            return Err(format!("K{n} gave {t}"));
        }
    }
    let mut rng = SplitMix64::new(2024);
    for i in 0..20 {
        let n = 5 + i % 5;
        let g = maximal_outerplanar(&mut rng, n);
        let t = solve(n, &g)?;
        if t != 1 {
            return Err(format!("outerplanar graph {g:?} gave {t}"));
        }
    }
    Ok(format!("K6 = 3, K4 = 2, K3 = 1, K4..K8 = ceil(n/2), 20 outerplanar = 1; slowest call {slowest:.2?}"))
}

fn c7_good(set: &Set) -> Outcome {
    let mut checks = 0;
    for (p, d) in set {
        let opts = MultiLevelOptions { good_checks: GoodChecks::EveryInsertion, ..Default::default() };
        let (_, r) = embed(d, opts).map_err(|e| format!("{p:?}: {e}"))?;
        if let Some(v) = r.violations.first() {
            return Err(format!("{p:?}: {v}"));
        }
        checks += r.stats.good_checks_run;
    }
    Ok(format!("{checks} per-insertion checks over {} instances, no violations", set.len()))
}

fn c8_conflict(set: &Set) -> Outcome {
    let mut max_colors = 0;
    for (p, d) in set {
        let (_, a) = embed_two_level_drawing(d).map_err(|e| format!("{p:?}: {e}"))?;
        let cg = &a.conflict;
        if !is_one_page(&cg.edges) {
            return Err(format!("{p:?}: conflict graph crosses in face order"));
        }
        if a.colors.len() != cg.n || a.colors.iter().any(|&c| c > 2) {
            return Err(format!("{p:?}: coloring uses more than 3 colors"));
        }
        if let Some(&(x, y)) = cg.edges.iter().find(|&&(x, y)| a.colors[x] == a.colors[y]) {
            return Err(format!("{p:?}: faces {x} and {y} share a color"));
        }
        max_colors = max_colors.max(a.colors.iter().map(|&c| c as usize + 1).max().unwrap_or(0));
    }
    Ok(format!("{} conflict graphs one-page and properly colored with <= {max_colors} colors", set.len()))
}

fn time_embed(n: usize) -> Result<Duration, String> {
    let p = GenParams { seed: 1, k: 6, n, depth: 5, density: 0.5, ..Default::default() };
    let d = gen_kframed(&p).map_err(|e| e.to_string())?;
    let mut best = Duration::MAX;
    for _ in 0..3 {
        let t = Instant::now();
        let (e, _) = embed(&d, MultiLevelOptions::default()).map_err(|e| e.to_string())?;
        best = best.min(t.elapsed());
        std::hint::black_box(e);
    }
    Ok(best)
}

fn c9_performance() -> Outcome {
    let a = time_embed(10_000)?;
    let b = time_embed(20_000)?;
    let ratio = b.as_secs_f64() / a.as_secs_f64();
    if a > Duration::from_secs(5) || ratio > 3.0 {
        return Err(format!("n=1e4 {a:.2?}, n=2e4 {b:.2?}, ratio {ratio:.2}"));
    }
    Ok(format!("n=1e4 {a:.2?}, n=2e4 {b:.2?}, ratio {ratio:.2}"))
}

fn main() {
    let grid = drawings(&grid());
    let two = drawings(&two_level_set());
    let with = |s: &Result<Vec<_>, String>, f: &dyn Fn(&Set) -> Outcome| match s {
        Ok(v) => f(v),
        Err(e) => Err(e.clone()),
    };
    let results: Vec<(&str, Outcome)> = vec![
        ("1 soundness", with(&grid, &c1_soundness)),
        ("2 page bound", with(&grid, &c2_bound)),
        ("3 two-level bound", with(&two, &c3_two_level)),
        ("4 pentagon", c4_pentagon()),
        ("5 map graphs", c5_maps()),
        ("6 oracle", c6_oracle()),
        ("7 good checks", with(&grid, &c7_good)),
        ("8 conflict graph", with(&two, &c8_conflict)),
        ("9 performance", c9_performance()),
    ];
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(msg) => println!("PASS criterion {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name}: {msg}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
