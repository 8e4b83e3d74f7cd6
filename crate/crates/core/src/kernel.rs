//! Instance shrinking shared by the verifier backends.
//!
//! Two stages. The self-loop preprocessing scans for an agent that
//! admits self loops in at least ℓ−α+1 layers, which already settles
//! the verdict for the notions whose definition includes the self-loop
//! condition (k = 1, or upper-bounded optimality at any k). The kernel
//! proper then deletes every unallocated agent and every unowned item.
//! Neither can take part in a trading cycle, and dropping the unowned
//! items removes all self loops, so the per-layer cycle sets are
//! preserved exactly and the reduced instance has #alloc agents and
//! items.

use crate::graph::{build_trading_graph, SelfLoop};
use crate::model::{Instance, PreferenceProfile};
use crate::verify::Notion;

#[derive(Debug, Clone)]
pub enum KernelResult {
    /// Preprocessing found a decisive self-loop violation; the verdict
    /// is "not optimal" with this evidence, no reduction needed.
    Rejected { agent: usize, loops: Vec<SelfLoop> },
    Reduced(Kernel),
}

#[derive(Debug, Clone)]
pub struct Kernel {
    pub instance: Instance,
    pub removed_agents: Vec<usize>,
    pub removed_items: Vec<usize>,
    /// Kernel agent index → original agent index.
    pub agent_map: Vec<usize>,
    /// Kernel item index → original item index.
    pub item_map: Vec<usize>,
}

/// First agent (ascending) that self-loops in ≥ ℓ−α+1 layers, with the
/// first such loops as evidence.
pub(crate) fn find_self_loop_violation(inst: &Instance) -> Option<(usize, Vec<SelfLoop>)> {
    let th = inst.threshold();
    let mut loops: Vec<Vec<SelfLoop>> = vec![Vec::new(); inst.n()];
    for layer in 0..inst.layers() {
        let g = build_trading_graph(inst, layer);
        for (a, acc) in loops.iter_mut().enumerate() {
            if let Some(l) = g.first_self_loop(a) {
                acc.push(l);
            }
        }
    }
    loops
        .into_iter()
        .enumerate()
        .find(|(_, ls)| ls.len() >= th)
        .map(|(a, ls)| (a, ls.into_iter().take(th).collect()))
}

/// True iff every agent stays below the self-loop threshold.
pub fn preprocess_self_loops(inst: &Instance) -> bool {
    find_self_loop_violation(inst).is_none()
}

pub fn kernelize(inst: &Instance, notion: Notion) -> KernelResult {
    // The self-loop condition is part of the definition only for k = 1
    // or upper-bounded optimality; elsewhere loops are irrelevant.
    if inst.k() == 1 || notion == Notion::Uoa {
        if let Some((agent, loops)) = find_self_loop_violation(inst) {
            return KernelResult::Rejected { agent, loops };
        }
    }

    let owner = inst.owner_map();
    let agent_map: Vec<usize> = (0..inst.n()).filter(|&a| inst.allocation(a).is_some()).collect();
    let item_map: Vec<usize> = (0..inst.m()).filter(|&b| owner[b].is_some()).collect();
    let removed_agents: Vec<usize> =
        (0..inst.n()).filter(|&a| inst.allocation(a).is_none()).collect();
    let removed_items: Vec<usize> = (0..inst.m()).filter(|&b| owner[b].is_none()).collect();

    let mut item_new = vec![None; inst.m()];
    for (new, &old) in item_map.iter().enumerate() {
        item_new[old] = Some(new);
    }

    let agents = agent_map.iter().map(|&a| inst.agent_name(a).to_string()).collect();
    let items = item_map.iter().map(|&b| inst.item_name(b).to_string()).collect();
    let profiles = (0..inst.layers())
        .map(|layer| {
            PreferenceProfile::new(
                agent_map
                    .iter()
                    .map(|&a| {
                        inst.list(layer, a).iter().filter_map(|&b| item_new[b]).collect()
                    })
                    .collect(),
            )
        })
        .collect();
    let allocation = agent_map
        .iter()
        .map(|&a| Some(item_new[inst.allocation(a).unwrap()].unwrap()))
        .collect();

    let instance =
        Instance::from_parts(agents, items, profiles, allocation, inst.k(), inst.alpha());
    KernelResult::Reduced(Kernel { instance, removed_agents, removed_items, agent_map, item_map })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::enumerate_trading_cycles;
    use crate::model::{parse_instance, serialize_instance};

    const SINGLE: &str = include_str!("../fixtures/golden_single_layer.la");
    const FOUR: &str = include_str!("../fixtures/golden_four_layer.la");
    const SHRINK: &str = include_str!("../fixtures/kernel_figure.la");

    fn with_params(text: &str, k: u32, alpha: u32) -> Instance {
        let inst = parse_instance(text).unwrap();
        Instance::from_parts(
            inst.agent_names().to_vec(),
            inst.item_names().to_vec(),
            (0..inst.layers()).map(|l| inst.profile(l).clone()).collect(),
            (0..inst.n()).map(|a| inst.allocation(a)).collect(),
            k,
            alpha,
        )
    }

    #[test]
    fn four_layer_alpha4_k1_fails_preprocessing() {
        // At alpha = 4 a single self-looping layer is decisive, and a4
        // self-loops in layer 3.
        let inst = with_params(FOUR, 1, 4);
        assert!(!preprocess_self_loops(&inst));
        match kernelize(&inst, Notion::Oa) {
            KernelResult::Rejected { agent, loops } => {
                assert_eq!(agent, 3);
                assert_eq!(loops.len(), 1);
                assert_eq!(loops[0], SelfLoop { agent: 3, item: 4, layer: 2 });
            }
            KernelResult::Reduced(_) => panic!("expected rejection"),
        }
    }

    #[test]
    fn four_layer_at_spec_params_passes_preprocessing() {
        let inst = parse_instance(FOUR).unwrap();
        // Threshold 3, but a4 self-loops in one layer only.
        assert!(preprocess_self_loops(&inst));
    }

    #[test]
    fn no_unallocated_items_means_no_loops() {
        let text = "agents: a1 a2\nitems: b1 b2\nk: 1\nalpha: 1\nlayers: 1\nlayer 1:\na1: b2 > b1\na2: b1 > b2\nassignment:\na1 = b1\na2 = b2\n";
        let inst = parse_instance(text).unwrap();
        assert!(preprocess_self_loops(&inst));
    }

    #[test]
    fn shrink_fixture_removes_exactly_the_unallocated_half() {
        let inst = parse_instance(SHRINK).unwrap();
        match kernelize(&inst, Notion::Oa) {
            KernelResult::Reduced(kern) => {
                assert_eq!(kern.removed_agents, vec![3, 4]);
                assert_eq!(kern.removed_items, vec![3, 4]);
                assert_eq!(kern.agent_map, vec![0, 1, 2]);
                assert_eq!(kern.item_map, vec![0, 1, 2]);
                let r = &kern.instance;
                assert_eq!(r.n(), 3);
                assert_eq!(r.m(), 3);
                assert_eq!(r.alloc_count(), 3);
                assert_eq!(r.agent_names(), ["a1", "a2", "a3"]);
                assert_eq!(r.item_names(), ["b1", "b2", "b3"]);
                // The cycle on a1, a2, a3 survives verbatim.
                let g = build_trading_graph(r, 0);
                let cycles = enumerate_trading_cycles(&g, 3, 10).unwrap();
                assert_eq!(cycles.len(), 1);
                assert_eq!(cycles[0].render(r, 0), "(a1 b1 a2 b2 a3 b3)@layer=1");
            }
            KernelResult::Rejected { .. } => panic!("nothing decisive here"),
        }
    }

    #[test]
    fn fully_allocated_instance_reduces_to_itself() {
        let inst = with_params(SHRINK, 2, 1);
        let KernelResult::Reduced(kern) = kernelize(&inst, Notion::Soa) else {
            panic!("no rejection possible")
        };
        let KernelResult::Reduced(again) = kernelize(&kern.instance, Notion::Soa) else {
            panic!("no rejection possible")
        };
        assert_eq!(serialize_instance(&kern.instance), serialize_instance(&again.instance));
        assert!(again.removed_agents.is_empty());
        assert!(again.removed_items.is_empty());
    }

    #[test]
    fn cycle_sets_survive_reduction() {
        for text in [SINGLE, FOUR] {
            // k = 2 keeps the self-loop gate out of the way.
            let inst = with_params(text, 2, 1);
            let KernelResult::Reduced(kern) = kernelize(&inst, Notion::Oa) else {
                panic!("gate is off for OA k=2")
            };
            for layer in 0..inst.layers() {
                let before = enumerate_trading_cycles(
                    &build_trading_graph(&inst, layer),
                    inst.n(),
                    10_000,
                )
                .unwrap();
                let after = enumerate_trading_cycles(
                    &build_trading_graph(&kern.instance, layer),
                    kern.instance.n(),
                    10_000,
                )
                .unwrap();
                // Compare via original indices and rendered items.
                let after_mapped: Vec<Vec<(usize, usize)>> = after
                    .iter()
                    .map(|c| {
                        c.steps()
                            .iter()
                            .map(|&(a, b)| (kern.agent_map[a], kern.item_map[b]))
                            .collect()
                    })
                    .collect();
                let before_raw: Vec<Vec<(usize, usize)>> =
                    before.iter().map(|c| c.steps().to_vec()).collect();
                assert_eq!(before_raw, after_mapped, "layer {layer}");
            }
        }
    }

    #[test]
    fn uoa_gate_rejects_single_layer_example() {
        // a4 self-loops in the only layer; threshold is 1.
        let inst = parse_instance(SINGLE).unwrap();
        match kernelize(&inst, Notion::Uoa) {
            KernelResult::Rejected { agent, loops } => {
                assert_eq!(agent, 3);
                assert_eq!(loops, vec![SelfLoop { agent: 3, item: 2, layer: 0 }]);
            }
            KernelResult::Reduced(_) => panic!("expected rejection"),
        }
    }
}
