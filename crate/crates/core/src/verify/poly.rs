//! Polynomial checks for the fully-demanding case α = ℓ, where a
//! single bad layer already breaks optimality. Upper-bounded
//! optimality then reduces to a girth bound: the assignment fails iff
//! some layer's trading graph has a cycle of length at most 2k (a
//! 2-cycle being a self loop, a 2j-cycle a j-agent trading cycle).
//! Subset optimality for every k′ ≤ k at once reduces to all layers
//! being acyclic; verdicts carry that stronger claim explicitly.

use crate::graph::{build_trading_graph, shortest_cycle, GraphCycle};
use crate::model::Instance;

use super::{Algo, ClaimMode, Notion, Stats, Verdict, VerifyError, Witness};

fn require_full_alpha(inst: &Instance) -> Result<(), VerifyError> {
    if inst.alpha() as usize != inst.layers() {
        return Err(VerifyError::InapplicableBackend {
            algo: Algo::Poly,
            reason: format!(
                "needs alpha = layers, got alpha={} over {} layers",
                inst.alpha(),
                inst.layers()
            ),
        });
    }
    Ok(())
}

pub fn verify_poly_uoa_full_alpha(inst: &Instance) -> Result<Verdict, VerifyError> {
    require_full_alpha(inst)?;
    let bound = 2 * inst.k() as usize;
    for layer in 0..inst.layers() {
        let g = build_trading_graph(inst, layer);
        let Some((len, cyc)) = shortest_cycle(&g) else { continue };
        if len > bound {
            continue;
        }
        let witness = match cyc {
            GraphCycle::Loop(l) => Witness::SelfLoops { agent: l.agent, loops: vec![l] },
            GraphCycle::Cycle(c) => {
                let mut agents: Vec<usize> = c.agents().collect();
                agents.sort_unstable();
                Witness::Cycles { agents, entries: vec![(layer, c)] }
            }
        };
        return Ok(Verdict::violated(inst, Notion::Uoa, Algo::Poly, witness, Stats::default()));
    }
    Ok(Verdict::clean(inst, Notion::Uoa, Algo::Poly, Stats::default()))
}

pub fn verify_poly_soa_allk_full_alpha(inst: &Instance) -> Result<Verdict, VerifyError> {
    require_full_alpha(inst)?;
    for layer in 0..inst.layers() {
        let g = build_trading_graph(inst, layer);
        let Some((_, cyc)) = shortest_cycle(&g) else { continue };
        let witness = match cyc {
            GraphCycle::Loop(l) => Witness::SelfLoops { agent: l.agent, loops: vec![l] },
            GraphCycle::Cycle(c) => {
                // Any cycle breaks the k′=1 case already; pin K to the
                // cycle's least agent.
                let least = c.agents().min().unwrap();
                Witness::Cycles { agents: vec![least], entries: vec![(layer, c)] }
            }
        };
        let mut v = Verdict::violated(inst, Notion::Soa, Algo::Poly, witness, Stats::default());
        v.claim = ClaimMode::SoaAllK;
        return Ok(v);
    }
    let mut v = Verdict::clean(inst, Notion::Soa, Algo::Poly, Stats::default());
    v.claim = ClaimMode::SoaAllK;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::super::{check_witness, result_line};
    use super::*;
    use crate::model::parse_instance;

    const SINGLE: &str = include_str!("../../fixtures/golden_single_layer.la");
    const FOUR: &str = include_str!("../../fixtures/golden_four_layer.la");

    fn reparam(text: &str, k: u32, alpha: u32) -> Instance {
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
    fn four_layer_at_full_alpha_fails_the_girth_bound() {
        // Layer 1 holds a 2-agent cycle; with k=2 the girth bound 2k=4
        // is met, so a single bad layer decides at alpha=4.
        let inst = reparam(FOUR, 2, 4);
        let v = verify_poly_uoa_full_alpha(&inst).unwrap();
        assert!(!v.optimal);
        assert!(check_witness(&inst, Notion::Uoa, &v));
        let Some(Witness::Cycles { agents, entries }) = &v.witness else {
            panic!("layer 1 has no unallocated items, so no self loop")
        };
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].0, 0);
        assert!(agents.len() == 2);
    }

    #[test]
    fn girth_above_two_k_survives() {
        // One 3-agent cycle only; k=1 means the bound is 2 and no self
        // loops exist.
        let text = "agents: a1 a2 a3\nitems: b1 b2 b3\nk: 1\nalpha: 1\nlayers: 1\nlayer 1:\na1: b2 > b1\na2: b3 > b2\na3: b1 > b3\nassignment:\na1 = b1\na2 = b2\na3 = b3\n";
        let inst = parse_instance(text).unwrap();
        let v = verify_poly_uoa_full_alpha(&inst).unwrap();
        assert!(v.optimal);
    }

    #[test]
    fn self_loop_is_a_two_cycle_for_any_k() {
        let inst = parse_instance(SINGLE).unwrap();
        let v = verify_poly_uoa_full_alpha(&inst).unwrap();
        assert!(!v.optimal);
        assert!(matches!(&v.witness, Some(Witness::SelfLoops { agent: 3, .. })));
        assert!(check_witness(&inst, Notion::Uoa, &v));
    }

    #[test]
    fn subset_all_k_claim_is_acyclicity() {
        let single = parse_instance(SINGLE).unwrap();
        let v = verify_poly_soa_allk_full_alpha(&single).unwrap();
        assert!(!v.optimal);
        assert_eq!(v.claim, ClaimMode::SoaAllK);
        assert!(check_witness(&single, Notion::Soa, &v));
        assert_eq!(result_line(&v), "RESULT notion=soa-all-k k=1 alpha=1 optimal=false");

        let quiet = "agents: a1 a2\nitems: b1 b2\nk: 2\nalpha: 1\nlayers: 1\nlayer 1:\na1: b1 > b2\na2: b2 > b1\nassignment:\na1 = b1\na2 = b2\n";
        let q = parse_instance(quiet).unwrap();
        let vq = verify_poly_soa_allk_full_alpha(&q).unwrap();
        assert!(vq.optimal);
        assert_eq!(vq.claim, ClaimMode::SoaAllK);
    }

    #[test]
    fn partial_alpha_is_inapplicable() {
        let inst = parse_instance(FOUR).unwrap();
        assert!(matches!(
            verify_poly_uoa_full_alpha(&inst),
            Err(VerifyError::InapplicableBackend { algo: Algo::Poly, .. })
        ));
        assert!(matches!(
            verify_poly_soa_allk_full_alpha(&inst),
            Err(VerifyError::InapplicableBackend { algo: Algo::Poly, .. })
        ));
    }
}
