//! Randomized properties tying the engine to brute-force re-derivations:
//! text round trips, backend agreement on arbitrary instances, and the
//! subset reachability tables against a plain recursive path search.

mod common;

use proptest::prelude::*;

use layered_assign_core::generate::gen_random;
use layered_assign_core::model::{parse_instance, serialize_instance};
use layered_assign_core::verify::{
    build_reachability_tables, up_closure_transform, ResourceCaps,
};
use layered_assign_core::{check_witness, verify, Algo, Instance, Notion};

fn instances() -> impl Strategy<Value = Instance> {
    (2usize..=6, 2usize..=6, 1usize..=3, 0usize..=6, 0.0f64..=1.0, any::<u64>()).prop_map(
        |(n, m, layers, d_max, fraction, seed)| {
            gen_random(n, m, layers, d_max.min(m), fraction, seed)
        },
    )
}

/// Instances whose every agent holds an item, the shape the subset
/// tables are defined on.
fn kernelized_instances() -> impl Strategy<Value = Instance> {
    (2usize..=6, 1usize..=3, 1usize..=6, any::<u64>()).prop_map(|(n, layers, d_max, seed)| {
        gen_random(n, n, layers, d_max.min(n), 1.0, seed)
    })
}

fn reparameterized(inst: Instance, k: u32, alpha: u32) -> Instance {
    inst.with_params(1 + k % inst.n() as u32, 1 + alpha % inst.layers() as u32)
}

/// Agent-to-agent adjacency of one layer: an edge means the head owns
/// an item the tail ranks above its own. Derived straight from the
/// preference lists, independently of the graph module.
fn contracted(inst: &Instance, layer: usize) -> Vec<Vec<bool>> {
    let n = inst.n();
    let mut owner = vec![None; inst.m()];
    for a in 0..n {
        if let Some(b) = inst.allocation(a) {
            owner[b] = Some(a);
        }
    }
    let mut adj = vec![vec![false; n]; n];
    for a in 0..n {
        let list = inst.list(layer, a);
        let cut = inst
            .allocation(a)
            .and_then(|own| list.iter().position(|&b| b == own))
            .unwrap_or(list.len());
        for &b in &list[..cut] {
            if let Some(o) = owner[b] {
                adj[a][o] = true;
            }
        }
    }
    adj
}

/// Plain exhaustive search: a path from `s` to `t` whose interior visits
/// exactly the agents of `x`, in some order.
fn path_exists(adj: &[Vec<bool>], s: usize, t: usize, x: u64) -> bool {
    if x == 0 {
        return adj[s][t];
    }
    let mut rest = x;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        if adj[s][v] && path_exists(adj, v, t, x & !(1 << v)) {
            return true;
        }
    }
    false
}

fn assert_tables_match_path_search(inst: &Instance) {
    let tables = build_reachability_tables(inst, &ResourceCaps::default()).unwrap();
    assert_eq!(tables.len(), inst.layers());
    let n = inst.n();
    let full = (1u64 << n) - 1;
    for (layer, m) in tables.iter().enumerate() {
        let adj = contracted(inst, layer);
        let up = up_closure_transform(m);
        for s in 0..n {
            for t in 0..n {
                let skip = 1 << s | 1 << t;
                for x in 0..=full {
                    if x & skip != 0 {
                        continue;
                    }
                    assert_eq!(
                        m.get(s, t, x),
                        path_exists(&adj, s, t, x),
                        "layer {layer} s={s} t={t} x={x:b}"
                    );
                    let mut any = false;
                    for y in x..=full {
                        if y & x == x && y & skip == 0 && path_exists(&adj, s, t, y) {
                            any = true;
                            break;
                        }
                    }
                    assert_eq!(
                        up.get(s, t, x),
                        any,
                        "closure layer {layer} s={s} t={t} x={x:b}"
                    );
                }
            }
        }
    }
}

#[test]
fn reachability_tables_match_path_search_on_the_pinned_seed() {
    let inst = gen_random(6, 6, 2, 4, 1.0, 21);
    assert_eq!(inst.alloc_count(), 6);
    assert_tables_match_path_search(&inst);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialization_round_trips(inst in instances(), k in any::<u32>(), alpha in any::<u32>()) {
        let inst = reparameterized(inst, k, alpha);
        let text = serialize_instance(&inst);
        let back = parse_instance(&text).expect("serializer output parses");
        prop_assert_eq!(inst, back);
    }

    #[test]
    fn dp_agrees_with_the_oracle(
        inst in instances(),
        k in any::<u32>(),
        alpha in any::<u32>(),
        notion_pick in 0usize..3,
    ) {
        let inst = reparameterized(inst, k, alpha);
        let notion = [Notion::Oa, Notion::Uoa, Notion::Soa][notion_pick];
        let o = verify(&inst, notion, Algo::Oracle).unwrap();
        let d = verify(&inst, notion, Algo::Dp).unwrap();
        prop_assert_eq!(o.optimal, d.optimal);
        prop_assert_eq!(&o.witness, &d.witness);
        prop_assert!(check_witness(&inst, notion, &o));
        prop_assert!(check_witness(&inst, notion, &d));
    }

    #[test]
    fn parameterized_backends_agree_with_the_oracle(
        inst in instances(),
        k in any::<u32>(),
        alpha in any::<u32>(),
        uoa in any::<bool>(),
    ) {
        let inst = reparameterized(inst, k, alpha);
        let notion = if uoa { Notion::Uoa } else { Notion::Oa };
        let o = verify(&inst, notion, Algo::Oracle).unwrap();
        for algo in [Algo::Xp, Algo::Dk, Algo::Auto] {
            let v = verify(&inst, notion, algo).unwrap();
            prop_assert_eq!(o.optimal, v.optimal, "{} disagreed", algo);
            prop_assert!(check_witness(&inst, notion, &v), "{} witness", algo);
        }
    }

    #[test]
    fn reachability_tables_match_path_search(inst in kernelized_instances()) {
        assert_tables_match_path_search(&inst);
    }
}
