//! Brute-force reference backend: enumerate every trading cycle in
//! every layer, tally bad layers per agent set straight from the
//! definitions, and reject on the first set (ascending by mask) that
//! reaches ℓ−α+1. Slow by design and limited to small instances; every
//! other backend is measured against it.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::build_trading_graph;
use crate::kernel::find_self_loop_violation;
use crate::model::Instance;

use super::{
    build_cycle_witness, choose_superset_mask, mask_to_vec, next_combination, Algo, Notion,
    ResourceCaps, Stats, Verdict, VerifyError, Witness,
};

pub fn verify_oracle(
    inst: &Instance,
    notion: Notion,
    caps: &ResourceCaps,
) -> Result<Verdict, VerifyError> {
    let k = inst.k() as usize;
    if k == 1 || notion == Notion::Uoa {
        if let Some((agent, loops)) = find_self_loop_violation(inst) {
            let w = Witness::SelfLoops { agent, loops };
            return Ok(Verdict::violated(inst, notion, Algo::Oracle, w, Stats::default()));
        }
    }
    if notion == Notion::Oa && k == 1 {
        return Ok(Verdict::clean(inst, notion, Algo::Oracle, Stats::default()));
    }
    let n = inst.n();
    if n > 63 {
        return Err(VerifyError::ResourceLimit(format!(
            "oracle tallies sets as 64-bit masks, {n} agents is too many"
        )));
    }

    let th = inst.threshold();
    let mut per_layer: Vec<Vec<u64>> = Vec::new();
    let mut cycles_enumerated = 0u64;
    for layer in 0..inst.layers() {
        let g = build_trading_graph(inst, layer);
        let cycles = crate::graph::enumerate_trading_cycles(&g, n.max(2), caps.enumeration)?;
        cycles_enumerated += cycles.len() as u64;
        let mut masks: Vec<u64> = cycles.iter().map(|c| c.agent_mask()).collect();
        masks.sort_unstable();
        masks.dedup();
        per_layer.push(masks);
    }

    let mut tally: BTreeMap<u64, usize> = BTreeMap::new();
    for masks in &per_layer {
        let mut candidates: BTreeSet<u64> = BTreeSet::new();
        for &s in masks {
            let size = s.count_ones() as usize;
            match notion {
                Notion::Oa => {
                    if size == k {
                        candidates.insert(s);
                    }
                }
                Notion::Uoa => {
                    if (2..=k).contains(&size) {
                        candidates.insert(s);
                    }
                }
                Notion::Soa => {
                    candidates.extend(k_subsets_of(s, k));
                }
            }
        }
        for s in candidates {
            *tally.entry(s).or_default() += 1;
        }
    }

    let stats = Stats {
        subsets_examined: tally.len() as u64,
        cycles_enumerated,
        table_bits: 0,
    };
    let Some(mask) = tally.iter().find(|&(_, &c)| c >= th).map(|(&m, _)| m) else {
        return Ok(Verdict::clean(inst, notion, Algo::Oracle, stats));
    };

    let agents = mask_to_vec(mask);
    let witness = match notion {
        Notion::Oa | Notion::Uoa => build_cycle_witness(inst, agents.clone(), |g| {
            per_layer[g.layer].binary_search(&mask).is_ok().then(|| agents.clone())
        }),
        Notion::Soa => build_cycle_witness(inst, agents.clone(), |g| {
            choose_superset_mask(n, mask, |s| per_layer[g.layer].binary_search(&s).is_ok())
                .map(mask_to_vec)
        }),
    };
    Ok(Verdict::violated(inst, notion, Algo::Oracle, witness, stats))
}

/// All size-k subsets of the set bits of `mask`, ascending.
fn k_subsets_of(mask: u64, k: usize) -> Vec<u64> {
    let bits = mask_to_vec(mask);
    let r = bits.len();
    if k == 0 || k > r {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut sub = (1u64 << k) - 1;
    loop {
        let mut s = 0u64;
        let mut x = sub;
        while x != 0 {
            let i = x.trailing_zeros() as usize;
            x &= x - 1;
            s |= 1 << bits[i];
        }
        out.push(s);
        match next_combination(sub, r) {
            Some(nxt) => sub = nxt,
            None => break,
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::{check_witness, result_line, verify_dp};
    use super::*;
    use crate::model::parse_instance;

    const SINGLE: &str = include_str!("../../fixtures/golden_single_layer.la");
    const FOUR: &str = include_str!("../../fixtures/golden_four_layer.la");

    fn caps() -> ResourceCaps {
        ResourceCaps { dp_width: 24, enumeration: 1_000_000, dk_budget: 1e8, subset_budget: 1e9 }
    }

    #[test]
    fn k_subsets_expand_ascending() {
        assert_eq!(k_subsets_of(0b10101, 2), vec![0b00101, 0b10001, 0b10100]);
        assert_eq!(k_subsets_of(0b011, 2), vec![0b011]);
        assert!(k_subsets_of(0b011, 3).is_empty());
    }

    #[test]
    fn single_layer_example_is_not_pareto_optimal() {
        let inst = parse_instance(SINGLE).unwrap();
        let v = verify_oracle(&inst, Notion::Oa, &caps()).unwrap();
        assert!(!v.optimal);
        assert!(check_witness(&inst, Notion::Oa, &v));
        // k=1: the self loop on a4 settles it before any cycle talk.
        assert_eq!(
            v.witness,
            Some(Witness::SelfLoops {
                agent: 3,
                loops: vec![crate::graph::SelfLoop { agent: 3, item: 2, layer: 0 }]
            })
        );
    }

    #[test]
    fn four_layer_verdicts_and_result_lines_match_dp() {
        let inst = parse_instance(FOUR).unwrap();
        for notion in [Notion::Oa, Notion::Uoa, Notion::Soa] {
            let o = verify_oracle(&inst, notion, &caps()).unwrap();
            let d = verify_dp(&inst, notion, &caps()).unwrap();
            assert_eq!(o.optimal, d.optimal, "{notion}");
            assert_eq!(result_line(&o), result_line(&d), "{notion}");
            assert_eq!(o.witness, d.witness, "{notion}");
        }
    }

    #[test]
    fn threshold_one_needs_a_single_bad_layer() {
        // Unique full cycle, one layer, alpha=1: threshold is 1.
        let text = "agents: a1 a2 a3\nitems: b1 b2 b3\nk: 3\nalpha: 1\nlayers: 1\nlayer 1:\na1: b2 > b1\na2: b3 > b2\na3: b1 > b3\nassignment:\na1 = b1\na2 = b2\na3 = b3\n";
        let inst = parse_instance(text).unwrap();
        let v = verify_oracle(&inst, Notion::Oa, &caps()).unwrap();
        assert!(!v.optimal);
        let Some(Witness::Cycles { agents, entries }) = &v.witness else {
            panic!("cycle witness expected")
        };
        assert_eq!(agents, &[0, 1, 2]);
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].1.render(&inst, 0), "(a1 b1 a2 b2 a3 b3)@layer=1");
    }

    #[test]
    fn enumeration_cap_bubbles_up_as_resource_limit() {
        let inst = parse_instance(SINGLE).unwrap();
        let tiny = ResourceCaps { enumeration: 1, ..caps() };
        // k=2 dodges the self-loop gate so enumeration actually runs.
        let inst2 = crate::model::Instance::from_parts(
            inst.agent_names().to_vec(),
            inst.item_names().to_vec(),
            vec![inst.profile(0).clone()],
            (0..inst.n()).map(|a| inst.allocation(a)).collect(),
            2,
            1,
        );
        assert!(matches!(
            verify_oracle(&inst2, Notion::Oa, &tiny),
            Err(VerifyError::ResourceLimit(_))
        ));
    }
}
