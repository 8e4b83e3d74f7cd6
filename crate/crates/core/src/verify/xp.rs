//! Subset-enumeration backend: walks every agent set of the demanded
//! sizes in lexicographic order and runs the exact-set Held-Karp check
//! per layer, n^O(k) overall. No kernel pass; sets touching unallocated
//! agents simply never cycle. Subset optimality is out of scope here,
//! its superset quantifier needs the DP's closure.

use crate::graph::{build_trading_graph, exact_set_cycle, TradingGraph};
use crate::kernel::find_self_loop_violation;
use crate::model::Instance;

use super::{
    binom_f64, build_cycle_witness, exact_choice, Algo, Notion, ResourceCaps, Stats, Verdict,
    VerifyError, Witness,
};

pub fn verify_xp(
    inst: &Instance,
    notion: Notion,
    caps: &ResourceCaps,
) -> Result<Verdict, VerifyError> {
    if notion == Notion::Soa {
        return Err(VerifyError::InapplicableBackend {
            algo: Algo::Xp,
            reason: "subset optimality quantifies over supersets; use dp or oracle".into(),
        });
    }
    let k = inst.k() as usize;
    if k == 1 || notion == Notion::Uoa {
        if let Some((agent, loops)) = find_self_loop_violation(inst) {
            let w = Witness::SelfLoops { agent, loops };
            return Ok(Verdict::violated(inst, notion, Algo::Xp, w, Stats::default()));
        }
    }
    if k < 2 {
        // OA and UOA alike have only the self-loop condition at k=1.
        return Ok(Verdict::clean(inst, notion, Algo::Xp, Stats::default()));
    }

    let n = inst.n();
    let sizes: Vec<usize> = match notion {
        Notion::Oa => vec![k],
        Notion::Uoa => (2..=k).collect(),
        Notion::Soa => unreachable!(),
    };
    let sizes: Vec<usize> = sizes.into_iter().filter(|&s| s <= n).collect();
    let cost: f64 = sizes.iter().map(|&s| binom_f64(n, s) * 2f64.powi(s as i32)).sum();
    if cost > caps.subset_budget {
        return Err(VerifyError::ResourceLimit(format!(
            "subset scan cost {cost:.0} exceeds budget {:.0}",
            caps.subset_budget
        )));
    }

    let graphs: Vec<TradingGraph> =
        (0..inst.layers()).map(|l| build_trading_graph(inst, l)).collect();
    let th = inst.threshold();
    let mut subsets_examined = 0u64;
    for &s in &sizes {
        let mut combo: Vec<usize> = (0..s).collect();
        loop {
            subsets_examined += 1;
            let bad_layers =
                graphs.iter().filter(|g| exact_set_cycle(g, &combo)).count();
            if bad_layers >= th {
                let stats = Stats { subsets_examined, ..Stats::default() };
                let witness = build_cycle_witness(inst, combo.clone(), exact_choice(&combo));
                return Ok(Verdict::violated(inst, notion, Algo::Xp, witness, stats));
            }
            if !next_index_combination(&mut combo, n) {
                break;
            }
        }
    }
    let stats = Stats { subsets_examined, ..Stats::default() };
    Ok(Verdict::clean(inst, notion, Algo::Xp, stats))
}

/// Advances a sorted index combination to its lexicographic successor
/// within 0..n; false once exhausted.
fn next_index_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] != i + n - k {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
