//! Corpus and helpers shared by the integration suites.

#![allow(dead_code)]

use layered_assign_core::generate::gen_random;
use layered_assign_core::graph::{build_trading_graph, enumerate_trading_cycles};
use layered_assign_core::model::parse_instance;
use layered_assign_core::Instance;

/// Parses a checked-in fixture and fails loudly on any defect.
pub fn fixture(name: &str) -> Instance {
    let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    let inst = parse_instance(&text).unwrap_or_else(|e| panic!("{path}: {e}"));
    let report = inst.validate();
    assert!(report.errors.is_empty(), "{path}: {:?}", report.errors);
    inst
}

/// The three hand-written fixtures plus 300 seeded random instances.
/// The seed arithmetic sweeps every n, m in 2..=5 and 1..=3 layers
/// several times over, with varying list lengths and allocation rates.
pub fn corpus() -> Vec<Instance> {
    let mut out: Vec<Instance> =
        ["golden_single_layer.la", "golden_four_layer.la", "kernel_figure.la"]
            .iter()
            .map(|f| fixture(f))
            .collect();
    for seed in 0..300u64 {
        let n = 2 + (seed % 4) as usize;
        let m = 2 + ((seed / 4) % 4) as usize;
        let layers = 1 + ((seed / 16) % 3) as usize;
        let d_max = m.min(1 + (seed % 5) as usize);
        let fraction = [0.4, 0.7, 1.0][((seed / 48) % 3) as usize];
        out.push(gen_random(n, m, layers, d_max, fraction, seed));
    }
    out
}

/// Every (k, alpha) the instance's dimensions admit.
pub fn valid_params(inst: &Instance) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for k in 1..=inst.n() as u32 {
        for alpha in 1..=inst.layers() as u32 {
            out.push((k, alpha));
        }
    }
    out
}

/// Per layer, the deduplicated agent sets of every trading cycle,
/// each set encoded as a bitmask.
pub fn cycle_masks(inst: &Instance) -> Vec<Vec<u64>> {
    (0..inst.layers())
        .map(|layer| {
            let g = build_trading_graph(inst, layer);
            let mut masks: Vec<u64> = enumerate_trading_cycles(&g, inst.n().max(2), usize::MAX)
                .expect("uncapped enumeration cannot hit the limit")
                .iter()
                .map(|c| c.agents().fold(0u64, |m, a| m | 1 << a))
                .collect();
            masks.sort_unstable();
            masks.dedup();
            masks
        })
        .collect()
}
