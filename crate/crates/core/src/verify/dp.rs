//! Subset dynamic program: decides any of the three notions in
//! O*(2^n′) after kernelization.
//!
//! Per layer, the exact-cycle question "does S admit a trading cycle?"
//! is answered for every S at once by running a Held-Karp sweep from
//! each possible minimum member t over the agents above t: reach[X]
//! holds the endpoints of trading paths from t visiting exactly X, and
//! S = {t} ∪ X cycles iff some endpoint has an edge back to t. Only a
//! per-subset bad-layer counter persists across layers; subset
//! optimality first closes each layer's cycle set upward with a
//! word-parallel superset OR. The full reachability tables the
//! recurrence comes from are also built here in their literal form,
//! as the reference the lean sweep is tested against.

use crate::graph::{build_trading_graph, TradingGraph};
use crate::kernel::{kernelize, KernelResult};
use crate::model::Instance;

use super::{
    build_cycle_witness, choose_superset_mask, exact_choice, mask_to_vec, remap_witness, Algo,
    Notion, ResourceCaps, Stats, Verdict, VerifyError, Witness,
};

pub fn verify_dp(
    inst: &Instance,
    notion: Notion,
    caps: &ResourceCaps,
) -> Result<Verdict, VerifyError> {
    let kern = match kernelize(inst, notion) {
        KernelResult::Rejected { agent, loops } => {
            let w = Witness::SelfLoops { agent, loops };
            return Ok(Verdict::violated(inst, notion, Algo::Dp, w, Stats::default()));
        }
        KernelResult::Reduced(k) => k,
    };
    let ki = &kern.instance;
    let n = ki.n();
    if n > caps.dp_width {
        return Err(VerifyError::ResourceLimit(format!(
            "kernel has {n} agents, subset DP capped at {}",
            caps.dp_width
        )));
    }
    let k = inst.k() as usize;
    if notion == Notion::Oa && k == 1 {
        // Self loops are the only k=1 condition and the gate passed.
        return Ok(Verdict::clean(inst, notion, Algo::Dp, Stats::default()));
    }

    let full = 1usize << n;
    let words = full.div_ceil(64);
    let th = ki.threshold();
    let mut counters = vec![0u16; full];
    for layer in 0..ki.layers() {
        let g = build_trading_graph(ki, layer);
        let mut cyc = layer_cycle_bitset(&g, n);
        if notion == Notion::Soa {
            superset_zeta_inplace(&mut cyc, n);
        }
        for (wi, &word) in cyc.iter().enumerate() {
            let mut w = word;
            while w != 0 {
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                counters[(wi << 6) | b] += 1;
            }
        }
    }

    let (lo, hi) = match notion {
        Notion::Oa => (k, k),
        Notion::Uoa => (2, k),
        Notion::Soa => (k, k),
    };
    let mut subsets_examined = 0u64;
    let mut bad = None;
    for mask in 1..full as u64 {
        let size = mask.count_ones() as usize;
        if size < lo || size > hi {
            continue;
        }
        subsets_examined += 1;
        if counters[mask as usize] as usize >= th {
            bad = Some(mask);
            break;
        }
    }

    let stats = Stats {
        subsets_examined,
        cycles_enumerated: 0,
        table_bits: (full as u64) * 16
            + (words as u64) * 64
            + (1u64 << n.saturating_sub(1)) * 64,
    };
    let Some(mask) = bad else {
        return Ok(Verdict::clean(inst, notion, Algo::Dp, stats));
    };

    let agents = mask_to_vec(mask);
    let witness = match notion {
        Notion::Oa | Notion::Uoa => build_cycle_witness(ki, agents.clone(), exact_choice(&agents)),
        Notion::Soa => build_cycle_witness(ki, agents.clone(), |g| {
            let cyc = layer_cycle_bitset(g, n);
            choose_superset_mask(n, mask, |s| cyc[(s >> 6) as usize] & (1 << (s & 63)) != 0)
                .map(mask_to_vec)
        }),
    };
    let witness = remap_witness(witness, &kern.agent_map, &kern.item_map);
    Ok(Verdict::violated(inst, notion, Algo::Dp, witness, stats))
}

/// Bitset over all 2^n agent subsets: bit S set iff exactly S admits a
/// trading cycle in the layer of `g`. Agents must all be allocated.
pub(crate) fn layer_cycle_bitset(g: &TradingGraph, n: usize) -> Vec<u64> {
    let words = (1usize << n).div_ceil(64);
    let mut cyc = vec![0u64; words];
    let mut out = vec![0u64; n];
    let mut inn = vec![0u64; n];
    for a in 0..n {
        for &w in g.preferred_owners(a) {
            out[a] |= 1 << w;
            inn[w] |= 1 << a;
        }
    }
    for t in 0..n {
        // Sets whose minimum is t: Held-Karp over the agents above t,
        // with sub-universe bit i standing for agent t+1+i.
        let u = n - t - 1;
        let start_out = out[t] >> (t + 1);
        let back = inn[t] >> (t + 1);
        if start_out == 0 || back == 0 {
            continue;
        }
        let in_local: Vec<u64> = (0..u).map(|i| inn[t + 1 + i] >> (t + 1)).collect();
        let mut reach = vec![0u64; 1usize << u];
        for i in 0..u {
            if start_out & (1 << i) != 0 {
                reach[1 << i] = 1 << i;
            }
        }
        for x in 1..(1u64 << u) {
            if x.count_ones() >= 2 {
                let mut endpoints = 0u64;
                let mut rem = x;
                while rem != 0 {
                    let v = rem.trailing_zeros() as usize;
                    rem &= rem - 1;
                    if reach[(x ^ (1 << v)) as usize] & in_local[v] != 0 {
                        endpoints |= 1 << v;
                    }
                }
                reach[x as usize] = endpoints;
            }
            if reach[x as usize] & back != 0 {
                let global = ((x as usize) << (t + 1)) | (1 << t);
                cyc[global >> 6] |= 1 << (global & 63);
            }
        }
    }
    cyc
}

/// In-place superset OR over a bitset indexed by n-bit subsets:
/// afterwards bit X is set iff some bit Y ⊇ X was set before. Low six
/// subset bits live inside each word and fold by shifted ORs; higher
/// bits stride across words.
pub(crate) fn superset_zeta_inplace(words: &mut [u64], nbits: usize) {
    const FOLD: [u64; 6] = [
        0x5555_5555_5555_5555,
        0x3333_3333_3333_3333,
        0x0f0f_0f0f_0f0f_0f0f,
        0x00ff_00ff_00ff_00ff,
        0x0000_ffff_0000_ffff,
        0x0000_0000_ffff_ffff,
    ];
    for (j, fold) in FOLD.iter().enumerate().take(nbits.min(6)) {
        let shift = 1usize << j;
        for w in words.iter_mut() {
            *w |= (*w >> shift) & fold;
        }
    }
    for j in 6..nbits {
        let stride = 1usize << (j - 6);
        for i in 0..words.len() {
            if i & stride == 0 {
                words[i] |= words[i | stride];
            }
        }
    }
}

/// Literal per-layer reachability table M[s,t,X]: a trading path from s
/// to t whose intermediate agents are exactly X. Base: M[s,t,∅] iff s
/// prefers p(t) over p(s). Step: M[s,t,X] iff some preferred owner
/// s′ ∈ X has M[s′,t,X∖{s′}]. Cells with s ∈ X or t ∈ X stay false;
/// M[a,a,X] then reads "exactly {a} ∪ X admits a cycle".
#[derive(Debug, Clone)]
pub struct ReachabilityTable {
    pub layer: usize,
    n: usize,
    bits: Vec<u64>,
}

impl ReachabilityTable {
    fn blank(layer: usize, n: usize) -> Self {
        let cells = (n * n) << n;
        Self { layer, n, bits: vec![0u64; cells.div_ceil(64).max(1)] }
    }

    fn index(&self, s: usize, t: usize, x: u64) -> usize {
        ((s * self.n + t) << self.n) | x as usize
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, s: usize, t: usize, x: u64) -> bool {
        let i = self.index(s, t, x);
        self.bits[i >> 6] & (1 << (i & 63)) != 0
    }

    fn set(&mut self, s: usize, t: usize, x: u64) {
        let i = self.index(s, t, x);
        self.bits[i >> 6] |= 1 << (i & 63);
    }
}

pub fn build_reachability_tables(
    inst: &Instance,
    caps: &ResourceCaps,
) -> Result<Vec<ReachabilityTable>, VerifyError> {
    let n = inst.n();
    assert_eq!(inst.alloc_count(), n, "reachability tables expect a kernelized instance");
    if n > caps.dp_width {
        return Err(VerifyError::ResourceLimit(format!(
            "{n} agents exceed the DP width cap {}",
            caps.dp_width
        )));
    }
    let mut tables = Vec::new();
    for layer in 0..inst.layers() {
        let g = build_trading_graph(inst, layer);
        let mut out = vec![0u64; n];
        for a in 0..n {
            for &w in g.preferred_owners(a) {
                out[a] |= 1 << w;
            }
        }
        let mut m = ReachabilityTable::blank(layer, n);
        for s in 0..n {
            for t in 0..n {
                if out[s] & (1 << t) != 0 {
                    m.set(s, t, 0);
                }
            }
        }
        for x in 1..(1u64 << n) {
            for s in 0..n {
                if x & (1 << s) != 0 {
                    continue;
                }
                for t in 0..n {
                    if x & (1 << t) != 0 {
                        continue;
                    }
                    let mut cand = out[s] & x;
                    while cand != 0 {
                        let sp = cand.trailing_zeros() as usize;
                        cand &= cand - 1;
                        if m.get(sp, t, x ^ (1 << sp)) {
                            m.set(s, t, x);
                            break;
                        }
                    }
                }
            }
        }
        tables.push(m);
    }
    Ok(tables)
}

/// The superset closure of a reachability table: N[s,t,X] iff M[s,t,Y]
/// for some Y ⊇ X.
#[derive(Debug, Clone)]
pub struct UpClosedTable {
    pub layer: usize,
    n: usize,
    bits: Vec<u64>,
}

impl UpClosedTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, s: usize, t: usize, x: u64) -> bool {
        let i = ((s * self.n + t) << self.n) | x as usize;
        self.bits[i >> 6] & (1 << (i & 63)) != 0
    }
}

pub fn up_closure_transform(m: &ReachabilityTable) -> UpClosedTable {
    let n = m.n;
    let mut closed = UpClosedTable { layer: m.layer, n, bits: m.bits.clone() };
    let mut scratch = vec![0u64; (1usize << n).div_ceil(64)];
    for s in 0..n {
        for t in 0..n {
            scratch.fill(0);
            for x in 0..(1u64 << n) {
                if m.get(s, t, x) {
                    scratch[(x >> 6) as usize] |= 1 << (x & 63);
                }
            }
            superset_zeta_inplace(&mut scratch, n);
            for x in 0..(1u64 << n) {
                if scratch[(x >> 6) as usize] & (1 << (x & 63)) != 0 {
                    let i = ((s * n + t) << n) | x as usize;
                    closed.bits[i >> 6] |= 1 << (i & 63);
                }
            }
        }
    }
    closed
}
