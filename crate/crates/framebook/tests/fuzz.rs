use framebook::generator::{gen_kframed, GenParams};
use framebook::kframed::validate_kframed;
use framebook::multi_level::{embed, GoodChecks, MultiLevelOptions};
use framebook::oracle::validate;

/// Seeds per grid; `FRAMEBOOK_FUZZ_SEEDS` overrides the default of 300.
fn seeds() -> u64 {
    std::env::var("FRAMEBOOK_FUZZ_SEEDS").ok().and_then(|s| s.parse().ok()).unwrap_or(300)
}

fn bound(k: usize) -> usize {
    6 * k.div_ceil(2) + 5
}

#[test]
fn generated_instances_embed_cleanly() {
    let mut failures = Vec::new();
    let mut runs = 0;
    for seed in 0..seeds() {
        let k = 3 + (seed as usize % 6);
        let depth = 1 + (seed as usize / 6) % 5;
        let n = if depth == 1 { k } else { 3 * depth + (seed as usize * 13) % 120 };
        let density = [0.0, 0.3, 0.7, 1.0][seed as usize % 4];
        let p = GenParams { seed, k, n, depth, density, ..Default::default() };
        let d = gen_kframed(&p).expect("generator");
        assert!(validate_kframed(&d).is_valid());
        runs += 1;
        let opts = MultiLevelOptions { good_checks: GoodChecks::EveryInsertion, ..Default::default() };
        match embed(&d, opts) {
            Err(e) => failures.push(format!("{p:?}: error {e}")),
            Ok((e, r)) => {
                let crossings = validate(&e, &d.input_edge_pairs()).expect("well formed");
                if !crossings.is_empty() {
                    failures.push(format!("{p:?}: {} crossings, first {:?}", crossings.len(), crossings[0]));
                }
                if e.pages_used() > bound(k) {
                    failures.push(format!("{p:?}: {} pages", e.pages_used()));
                }
                if !r.violations.is_empty() {
                    failures.push(format!("{p:?}: good violation {:?}", r.violations[0]));
                }
            }
        }
    }
    for f in failures.iter().take(15) {
        eprintln!("{f}");
    }
    assert!(failures.is_empty(), "{} of {runs} failed", failures.len());
}

#[test]
fn two_level_instances_embed_cleanly() {
    use framebook::kframed::{augment_cliques, strip_augmentation};
    use framebook::two_level::{two_level_embed, ForwardMode, PageRegistry, TwoLevelInstance};
    let mut failures = Vec::new();
    for seed in 0..seeds() {
        let k = 3 + (seed as usize % 6);
        let n = 6 + (seed as usize * 13) % 120;
        let density = [0.0, 0.3, 0.7, 1.0][seed as usize % 4];
        let p = GenParams { seed, k, n, depth: 2, density, two_level: true, ..Default::default() };
        let d = gen_kframed(&p).expect("generator");
        let t = TwoLevelInstance::from_drawing(&d).expect("two-level instance");
        let a = augment_cliques(&d);
        let reg = PageRegistry::new(k);
        match two_level_embed(&t, &reg, 1, ForwardMode::ByParity) {
            Err(e) => failures.push(format!("{p:?}: error {e}")),
            Ok((e, _)) => {
                let e = strip_augmentation(&e, &a);
                let crossings = validate(&e, &d.input_edge_pairs()).expect("well formed");
                if !crossings.is_empty() {
                    failures.push(format!("{p:?}: {} crossings, first {:?}", crossings.len(), crossings[0]));
                }
            }
        }
    }
    for f in failures.iter().take(15) {
        eprintln!("{f}");
    }
    assert!(failures.is_empty(), "{} failed", failures.len());
}
