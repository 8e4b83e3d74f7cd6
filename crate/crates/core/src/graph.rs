//! Per-layer trading graphs, cycle machinery, and the Held-Karp
//! exact-set test.
//!
//! The trading graph of a layer is directed and bipartite: each
//! allocated item points to its owner, each agent points to the items
//! it prefers over its own allocation, and each unallocated item points
//! to every agent that lists it. Cycles alternate agents and items, so
//! a cycle of length 2j visits j agents; a 2-cycle is precisely a self
//! loop. Any agent edge into an unallocated item closes a 2-cycle
//! immediately (the item points back at every agent listing it), so a
//! shortest cycle longer than 2 passes through allocated items only.

use std::fmt;

use thiserror::Error;

use crate::model::Instance;

/// Trading graph of one layer, with the derived agent-to-agent
/// contraction used by all cycle algorithms: edge a→a′ iff a prefers
/// p(a′) over p(a) (both allocated).
#[derive(Debug, Clone)]
pub struct TradingGraph {
    pub layer: usize,
    n: usize,
    m: usize,
    allocation: Vec<Option<usize>>,
    owner: Vec<Option<usize>>,
    /// Items each agent prefers over its allocation, in list order.
    preferred: Vec<Vec<usize>>,
    /// Outgoing edges of each item: the owner, or all acceptors
    /// (ascending) when unallocated.
    item_out: Vec<Vec<usize>>,
    /// Contracted agent digraph, neighbor lists ascending.
    contracted: Vec<Vec<usize>>,
}

pub fn build_trading_graph(inst: &Instance, layer: usize) -> TradingGraph {
    let n = inst.n();
    let m = inst.m();
    let owner = inst.owner_map();

    let preferred: Vec<Vec<usize>> =
        (0..n).map(|a| inst.preferred_over_allocation(layer, a).to_vec()).collect();

    let mut item_out = vec![Vec::new(); m];
    for (b, out) in item_out.iter_mut().enumerate() {
        match owner[b] {
            Some(a) => out.push(a),
            None => {
                for a in 0..n {
                    if inst.list(layer, a).contains(&b) {
                        out.push(a);
                    }
                }
            }
        }
    }

    let mut contracted = vec![Vec::new(); n];
    for a in 0..n {
        if inst.allocation(a).is_none() {
            continue;
        }
        let mut row: Vec<usize> =
            preferred[a].iter().filter_map(|&b| owner[b]).collect();
        row.sort_unstable();
        contracted[a] = row;
    }

    TradingGraph { layer, n, m, allocation: (0..n).map(|a| inst.allocation(a)).collect(), owner, preferred, item_out, contracted }
}

impl TradingGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Allocated agents whose items `s` prefers over its own, ascending.
    pub fn preferred_owners(&self, s: usize) -> &[usize] {
        &self.contracted[s]
    }

    pub fn preferred_items(&self, a: usize) -> &[usize] {
        &self.preferred[a]
    }

    pub fn allocation(&self, a: usize) -> Option<usize> {
        self.allocation[a]
    }

    pub fn has_self_loop(&self, a: usize) -> bool {
        self.preferred[a].iter().any(|&b| self.owner[b].is_none())
    }

    /// First unallocated item in `a`'s preference order, if any.
    pub fn first_self_loop(&self, a: usize) -> Option<SelfLoop> {
        let item = *self.preferred[a].iter().find(|&&b| self.owner[b].is_none())?;
        Some(SelfLoop { agent: a, item, layer: self.layer })
    }

    /// All edges as (from, to) over the combined vertex space with
    /// agents at 0..n and items at n..n+m.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for &b in &self.preferred[a] {
                out.push((a, self.n + b));
            }
        }
        for b in 0..self.m {
            for &a in &self.item_out[b] {
                out.push((self.n + b, a));
            }
        }
        out
    }
}

/// Trading cycle as (agent, item) pairs with p(agent) = item, each
/// agent preferring the next pair's item over its own. Stored rotated
/// so the minimum agent comes first; the derived ordering is therefore
/// lexicographic on the agent sequence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TradingCycle {
    steps: Vec<(usize, usize)>,
}

impl TradingCycle {
    pub fn new(mut steps: Vec<(usize, usize)>) -> Self {
        assert!(steps.len() >= 2, "trading cycle needs at least two agents");
        let min = (0..steps.len()).min_by_key(|&i| steps[i].0).unwrap();
        steps.rotate_left(min);
        Self { steps }
    }

    pub fn steps(&self) -> &[(usize, usize)] {
        &self.steps
    }

    pub fn agents(&self) -> impl Iterator<Item = usize> + '_ {
        self.steps.iter().map(|&(a, _)| a)
    }

    pub fn agent_mask(&self) -> u64 {
        self.agents().fold(0, |m, a| m | (1 << a))
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// True iff this is a valid trading cycle of `inst` in `layer`:
    /// distinct allocated agents holding the stated items, each
    /// preferring its successor's item, minimum agent first.
    pub fn check(&self, inst: &Instance, layer: usize) -> bool {
        let t = self.steps.len();
        if t < 2 || layer >= inst.layers() {
            return false;
        }
        let mut seen = vec![false; inst.n()];
        for &(a, b) in &self.steps {
            if a >= inst.n() || seen[a] || inst.allocation(a) != Some(b) {
                return false;
            }
            seen[a] = true;
        }
        if self.steps[0].0 != self.agents().min().unwrap() {
            return false;
        }
        (0..t).all(|r| {
            let (a, _) = self.steps[r];
            let (_, next_item) = self.steps[(r + 1) % t];
            inst.prefers_over_allocation(layer, a, next_item)
        })
    }

    pub fn render(&self, inst: &Instance, layer: usize) -> String {
        let inner = self
            .steps
            .iter()
            .map(|&(a, b)| format!("{} {}", inst.agent_name(a), inst.item_name(b)))
            .collect::<Vec<_>>()
            .join(" ");
        format!("({inner})@layer={}", layer + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SelfLoop {
    pub agent: usize,
    pub item: usize,
    pub layer: usize,
}

impl SelfLoop {
    pub fn check(&self, inst: &Instance) -> bool {
        self.layer < inst.layers()
            && self.agent < inst.n()
            && self.item < inst.m()
            && inst.owner_map()[self.item].is_none()
            && inst.prefers_over_allocation(self.layer, self.agent, self.item)
    }

    pub fn render(&self, inst: &Instance) -> String {
        format!(
            "selfloop({}, {})@layer={}",
            inst.agent_name(self.agent),
            inst.item_name(self.item),
            self.layer + 1
        )
    }
}

/// Per agent, the ascending layers in which it admits a self loop.
pub fn self_loop_layers(inst: &Instance) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); inst.n()];
    for layer in 0..inst.layers() {
        let g = build_trading_graph(inst, layer);
        for (a, layers) in out.iter_mut().enumerate() {
            if g.has_self_loop(a) {
                layers.push(layer);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("trading cycle enumeration exceeded the cap of {cap}")]
pub struct EnumerationLimit {
    pub cap: usize,
}

/// Every trading cycle with 2..=max_agents agents, canonical form,
/// sorted (DFS from ascending start agents, ascending neighbors,
/// pruned so the start is the cycle minimum, emits sorted output).
pub fn enumerate_trading_cycles(
    g: &TradingGraph,
    max_agents: usize,
    cap: usize,
) -> Result<Vec<TradingCycle>, EnumerationLimit> {
    debug_assert!(max_agents >= 2);
    let mut out = Vec::new();
    let mut on_path = vec![false; g.n()];
    let mut path = Vec::new();
    for s in 0..g.n() {
        if g.allocation(s).is_none() {
            continue;
        }
        on_path[s] = true;
        path.push(s);
        dfs_cycles(g, s, s, max_agents, cap, &mut path, &mut on_path, &mut out)?;
        path.pop();
        on_path[s] = false;
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn dfs_cycles(
    g: &TradingGraph,
    s: usize,
    v: usize,
    max_agents: usize,
    cap: usize,
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    out: &mut Vec<TradingCycle>,
) -> Result<(), EnumerationLimit> {
    for &w in g.preferred_owners(v) {
        if w == s && path.len() >= 2 {
            if out.len() == cap {
                return Err(EnumerationLimit { cap });
            }
            let steps = path.iter().map(|&a| (a, g.allocation(a).unwrap())).collect();
            out.push(TradingCycle::new(steps));
        } else if w > s && !on_path[w] && path.len() < max_agents {
            on_path[w] = true;
            path.push(w);
            dfs_cycles(g, s, w, max_agents, cap, path, on_path, out)?;
            path.pop();
            on_path[w] = false;
        }
    }
    Ok(())
}

/// Held-Karp over the contracted digraph restricted to `set`: true iff
/// exactly the agents of `set` (at least two, all allocated) admit a
/// trading cycle in the layer of `g`.
pub fn exact_set_cycle(g: &TradingGraph, set: &[usize]) -> bool {
    let mut k: Vec<usize> = set.to_vec();
    k.sort_unstable();
    k.dedup();
    assert_eq!(k.len(), set.len(), "agent set contains duplicates");
    assert!(k.len() <= 60, "exact-set check limited to 60 agents");
    if k.len() < 2 || k.iter().any(|&a| g.allocation(a).is_none()) {
        return false;
    }

    // Local indices: k[0] is the start; the mask ranges over k[1..].
    let s = k[0];
    let rest = &k[1..];
    let r = rest.len();
    let local = |a: usize| rest.iter().position(|&x| x == a);

    // in_edges[v] = local mask of u with contracted edge u → rest[v];
    // from_start and to_start cover edges touching k[0].
    let mut in_edges = vec![0u64; r];
    let mut from_start = 0u64;
    let mut to_start = 0u64;
    for (v, &a) in rest.iter().enumerate() {
        for &w in g.preferred_owners(a) {
            if w == s {
                to_start |= 1 << v;
            } else if let Some(u) = local(w) {
                in_edges[u] |= 1 << v;
            }
        }
    }
    for &w in g.preferred_owners(s) {
        if let Some(v) = local(w) {
            from_start |= 1 << v;
        }
    }

    // reach[x] = endpoints v in x reachable from the start by a trading
    // path visiting exactly the agents of x.
    let mut reach = vec![0u64; 1 << r];
    for v in 0..r {
        if from_start & (1 << v) != 0 {
            reach[1 << v] = 1 << v;
        }
    }
    for x in 1..(1u64 << r) {
        if x.count_ones() < 2 {
            continue;
        }
        let mut endpoints = 0;
        let mut rem = x;
        while rem != 0 {
            let v = rem.trailing_zeros() as usize;
            rem &= rem - 1;
            if reach[(x ^ (1 << v)) as usize] & in_edges[v] != 0 {
                endpoints |= 1 << v;
            }
        }
        reach[x as usize] = endpoints;
    }
    reach[(1u64 << r) as usize - 1] & to_start != 0
}

/// Spec-level entry point building the layer graph on demand.
pub fn exact_set_trading_cycle(inst: &Instance, layer: usize, set: &[usize]) -> bool {
    exact_set_cycle(&build_trading_graph(inst, layer), set)
}

/// A shortest cycle of the trading graph: either a self loop (length 2)
/// or a trading cycle (length 2j, j agents).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphCycle {
    Loop(SelfLoop),
    Cycle(TradingCycle),
}

impl fmt::Display for GraphCycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphCycle::Loop(l) => write!(f, "self loop on agent {}", l.agent),
            GraphCycle::Cycle(c) => write!(f, "trading cycle on {} agents", c.len()),
        }
    }
}

/// Shortest directed cycle (graph girth), found by BFS from every agent
/// vertex; every cycle alternates agents and items so agent starts
/// suffice. Returns (length in vertices, cycle), scanning start agents
/// ascending and keeping strictly shorter finds.
pub fn shortest_cycle(g: &TradingGraph) -> Option<(usize, GraphCycle)> {
    let n = g.n();
    let total = n + g.m;
    let mut adj = vec![Vec::new(); total];
    for (u, v) in g.edges() {
        adj[u].push(v);
    }

    let mut best: Option<(usize, Vec<usize>)> = None;
    let mut dist = vec![usize::MAX; total];
    let mut parent = vec![usize::MAX; total];
    let mut queue = std::collections::VecDeque::new();
    for s in 0..n {
        dist.fill(usize::MAX);
        queue.clear();
        dist[s] = 0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            // A cycle through s of length dist[u]+1 closes here; longer
            // queue entries cannot improve it.
            if let Some((len, _)) = &best {
                if dist[u] + 1 >= *len {
                    break;
                }
            }
            for &v in &adj[u] {
                if v == s {
                    // Walk parents u → s, then flip into cycle order
                    // s, v1, …, u so chunks pair agent with item.
                    let mut path = Vec::new();
                    let mut x = u;
                    while x != s {
                        path.push(x);
                        x = parent[x];
                    }
                    path.push(s);
                    path.reverse();
                    best = Some((dist[u] + 1, path));
                } else if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if matches!(&best, Some((2, _))) {
            break;
        }
    }

    let (len, path) = best?;
    if len == 2 {
        let (a, b) = (path[0], path[1] - n);
        Some((2, GraphCycle::Loop(SelfLoop { agent: a, item: b, layer: g.layer })))
    } else {
        // Vertices alternate agent, item, agent, … with each item owned
        // by the agent after it; unallocated items cannot appear since
        // they would have closed a 2-cycle instead.
        let steps = path
            .chunks(2)
            .map(|pair| (pair[0], g.allocation(pair[0]).unwrap()))
            .collect();
        Some((len, GraphCycle::Cycle(TradingCycle::new(steps))))
    }
}
