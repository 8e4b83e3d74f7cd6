//! Instance families with known ground truth, built from digraph and
//! colored-graph gadgets, plus a seeded random generator for fuzzing.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{Instance, PreferenceProfile};
use crate::verify::Notion;

/// Ground-truth verdict attached to a generated instance. `Unknown` means
/// the brute-force labeling oracle was out of range, not that the instance
/// is malformed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Optimal,
    NotOptimal,
    Unknown,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Optimal => "optimal",
            Label::NotOptimal => "not-optimal",
            Label::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone)]
pub struct LabeledInstance {
    pub instance: Instance,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("digraph {index} has {got} vertices, expected {expected}")]
    MismatchedVertexCount { index: usize, expected: usize, got: usize },
    #[error("color {color} has no vertices")]
    EmptyColorClass { color: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("digraph line {line}: {msg}")]
pub struct DigraphParseError {
    pub line: usize,
    pub msg: String,
}

/// Directed graph without self-edges or parallel edges. Out-neighbor lists
/// are kept sorted ascending.
#[derive(Debug, Clone)]
pub struct Digraph {
    n: usize,
    out: Vec<Vec<usize>>,
}

impl Digraph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut out = vec![Vec::new(); n];
        for &(u, v) in edges {
            assert!(u < n && v < n, "edge endpoint out of range");
            assert_ne!(u, v, "self-edges are not allowed");
            out[u].push(v);
        }
        for list in &mut out {
            list.sort_unstable();
            list.dedup();
        }
        Self { n, out }
    }

    /// The directed cycle 1 -> 2 -> ... -> n -> 1.
    pub fn cycle(n: usize) -> Self {
        assert!(n >= 2, "a cycle needs at least two vertices");
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::new(n, &edges)
    }

    /// The directed path 1 -> 2 -> ... -> n; acyclic.
    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::new(n, &edges)
    }

    /// Each ordered pair becomes an edge independently with probability `p`.
    pub fn random(n: usize, p: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in 0..n {
                if u != v && rng.gen_bool(p) {
                    edges.push((u, v));
                }
            }
        }
        Self::new(n, &edges)
    }

    /// Each unordered pair gets exactly one orientation, chosen uniformly.
    pub fn random_tournament(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(0.5) {
                    edges.push((u, v));
                } else {
                    edges.push((v, u));
                }
            }
        }
        Self::new(n, &edges)
    }

    /// Parses the text form: a vertex-count line, then one `u v` line per
    /// edge with 1-indexed endpoints. Blank lines and `#` comments are
    /// ignored.
    pub fn from_text(text: &str) -> Result<Self, DigraphParseError> {
        let mut n = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let fields: Vec<&str> = body.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| DigraphParseError { line, msg: format!("expected an integer, got {s:?}") })
            };
            match n {
                None => {
                    if fields.len() != 1 {
                        return Err(DigraphParseError { line, msg: "expected a single vertex count".into() });
                    }
                    n = Some(parse(fields[0])?);
                }
                Some(count) => {
                    if fields.len() != 2 {
                        return Err(DigraphParseError { line, msg: "expected an edge line `u v`".into() });
                    }
                    let u = parse(fields[0])?;
                    let v = parse(fields[1])?;
                    if u == 0 || v == 0 || u > count || v > count {
                        return Err(DigraphParseError {
                            line,
                            msg: format!("edge ({u}, {v}) out of range 1..={count}"),
                        });
                    }
                    if u == v {
                        return Err(DigraphParseError { line, msg: format!("self-edge at vertex {u}") });
                    }
                    edges.push((u - 1, v - 1));
                }
            }
        }
        match n {
            Some(count) => Ok(Self::new(count, &edges)),
            None => Err(DigraphParseError { line: 1, msg: "missing vertex count".into() }),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn out(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.out[u].binary_search(&v).is_ok()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut all = Vec::new();
        for (u, outs) in self.out.iter().enumerate() {
            for &v in outs {
                all.push((u, v));
            }
        }
        all
    }

    pub fn max_out_degree(&self) -> usize {
        self.out.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Undirected graph with a total coloring; colors are 0-based and
/// contiguous.
#[derive(Debug, Clone)]
pub struct ColoredGraph {
    colors: Vec<usize>,
    adj: Vec<Vec<bool>>,
}

impl ColoredGraph {
    pub fn new(colors: Vec<usize>, edges: &[(usize, usize)]) -> Self {
        let n = colors.len();
        let mut adj = vec![vec![false; n]; n];
        for &(u, v) in edges {
            assert!(u < n && v < n, "edge endpoint out of range");
            assert_ne!(u, v, "self-edges are not allowed");
            adj[u][v] = true;
            adj[v][u] = true;
        }
        Self { colors, adj }
    }

    /// Round-robin coloring with `colors` colors; each unordered pair
    /// becomes an edge independently with probability `p`.
    pub fn random(n: usize, colors: usize, p: f64, seed: u64) -> Self {
        assert!(colors >= 1 && colors <= n, "colors must fit the vertex count");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(p) {
                    edges.push((u, v));
                }
            }
        }
        Self::new((0..n).map(|v| v % colors).collect(), &edges)
    }

    pub fn n(&self) -> usize {
        self.colors.len()
    }

    pub fn color(&self, v: usize) -> usize {
        self.colors[v]
    }

    pub fn color_count(&self) -> usize {
        self.colors.iter().max().map_or(0, |c| c + 1)
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.adj[u][v]
    }
}

/// Profile whose trading cycles under the identity assignment mirror the
/// directed cycles of `g`: agent i ranks the items of the out-neighbors of
/// vertex i (ascending) above its own item.
pub fn profile_from_digraph(g: &Digraph) -> PreferenceProfile {
    let lists = (0..g.n())
        .map(|v| g.out(v).iter().copied().chain(std::iter::once(v)).collect())
        .collect();
    PreferenceProfile::new(lists)
}

/// Profile whose single trading cycle under the identity assignment is the
/// full n-agent rotation: agent i ranks item i+1 above item i, cyclically.
pub fn cycle_profile(n: usize) -> PreferenceProfile {
    assert!(n >= 2, "a rotation needs at least two agents");
    PreferenceProfile::new((0..n).map(|i| vec![(i + 1) % n, i]).collect())
}

/// Single-layer family (a rotation layer is appended for UOA) at k = n,
/// alpha = 1. Not optimal exactly when `g` has a Hamiltonian cycle.
pub fn gen_conp_instance(g: &Digraph, notion: Notion) -> LabeledInstance {
    let n = g.n();
    assert!(n >= 2, "family needs at least two vertices");
    let mut profiles = vec![profile_from_digraph(g)];
    if notion == Notion::Uoa {
        profiles.push(cycle_profile(n));
    }
    let instance = identity_instance(profiles, n, n as u32, 1);
    LabeledInstance { instance, label: ham_label(is_hamiltonian(g)) }
}

/// One layer per color pair {u, w} with u < w, in lexicographic order. In
/// each layer a trading cycle picks one agent of every color and closes
/// only when the chosen u- and w-vertices are non-adjacent, so at k = k̃,
/// alpha = 1 the identity assignment is not optimal exactly when `g` has an
/// independent set with one vertex of each color.
pub fn gen_mcis_instance(g: &ColoredGraph) -> Result<LabeledInstance, GenError> {
    let kt = g.color_count();
    assert!(kt >= 2, "need at least two colors");
    let mut class = vec![Vec::new(); kt];
    for v in 0..g.n() {
        class[g.color(v)].push(v);
    }
    if let Some(color) = class.iter().position(Vec::is_empty) {
        return Err(GenError::EmptyColorClass { color });
    }
    let mut profiles = Vec::new();
    for u in 0..kt {
        for w in u + 1..kt {
            let chain: Vec<usize> = (0..kt).filter(|&s| s != u && s != w).collect();
            let mut lists = vec![Vec::new(); g.n()];
            for v in 0..g.n() {
                let c = g.color(v);
                let block: Vec<usize> = if c == u {
                    class[w].iter().copied().filter(|&x| !g.adjacent(v, x)).collect()
                } else if c == w {
                    class[chain.first().copied().unwrap_or(u)].clone()
                } else {
                    let j = chain.iter().position(|&s| s == c).unwrap();
                    let next = chain.get(j + 1).copied().unwrap_or(u);
                    class[next].clone()
                };
                lists[v] = block.into_iter().chain(std::iter::once(v)).collect();
            }
            profiles.push(PreferenceProfile::new(lists));
        }
    }
    let n = g.n();
    let instance = identity_instance(profiles, n, kt as u32, 1);
    let label = match has_multicolored_independent_set(g) {
        Some(true) => Label::NotOptimal,
        Some(false) => Label::Optimal,
        None => Label::Unknown,
    };
    Ok(LabeledInstance { instance, label })
}

/// AND composition: one layer per digraph (plus a rotation layer for UOA)
/// at k = n, alpha = 1. Not optimal exactly when every digraph is
/// Hamiltonian.
pub fn gen_and_cross(gs: &[Digraph], notion: Notion) -> Result<LabeledInstance, GenError> {
    let n = same_order(gs)?;
    let mut profiles: Vec<_> = gs.iter().map(profile_from_digraph).collect();
    if notion == Notion::Uoa {
        profiles.push(cycle_profile(n));
    }
    let instance = identity_instance(profiles, n, n as u32, 1);
    Ok(LabeledInstance { instance, label: ham_label(fold_and(gs.iter().map(is_hamiltonian))) })
}

/// OR composition. Not optimal exactly when some digraph is Hamiltonian.
///
/// For OA/SOA: one layer per digraph at k = n, alpha = t. For UOA: two
/// layers per digraph over n + 2s agents, where the s = floor(log2 t) + 1
/// selector agents chosen by the bit pattern of the pair index tie each
/// digraph's layers together, at k = n + s, alpha = 2t - 1.
pub fn gen_or_cross(gs: &[Digraph], notion: Notion) -> Result<LabeledInstance, GenError> {
    let n = same_order(gs)?;
    let t = gs.len();
    let label = ham_label(fold_or(gs.iter().map(is_hamiltonian)));
    if notion != Notion::Uoa {
        let profiles = gs.iter().map(profile_from_digraph).collect();
        let instance = identity_instance(profiles, n, n as u32, t as u32);
        return Ok(LabeledInstance { instance, label });
    }

    let s = (usize::BITS - t.leading_zeros()) as usize;
    let width = n + 2 * s;
    let item_of_selector = |pair: usize, j: usize| {
        if pair >> j & 1 == 1 {
            n + j
        } else {
            n + s + j
        }
    };
    let mut profiles = Vec::with_capacity(2 * t);
    for pair in 1..=t {
        let chosen: Vec<usize> = (0..s).map(|j| item_of_selector(pair, j)).collect();
        let mut shared = vec![Vec::new(); width];
        shared[n - 1] = vec![chosen[0], n - 1];
        for j in 0..s - 1 {
            shared[chosen[j]] = vec![chosen[j + 1], chosen[j]];
        }
        for slot in n..width {
            if !chosen.contains(&slot) {
                shared[slot] = vec![slot];
            }
        }

        let mut odd = shared.clone();
        for v in 0..n - 1 {
            odd[v] = gs[pair - 1].out(v).iter().copied().chain(std::iter::once(v)).collect();
        }
        odd[chosen[s - 1]] = gs[pair - 1]
            .out(n - 1)
            .iter()
            .copied()
            .chain(std::iter::once(chosen[s - 1]))
            .collect();
        profiles.push(PreferenceProfile::new(odd));

        let mut even = shared;
        for v in 0..n - 1 {
            even[v] = vec![v + 1, v];
        }
        even[chosen[s - 1]] = vec![0, chosen[s - 1]];
        profiles.push(PreferenceProfile::new(even));
    }

    let mut agents: Vec<String> = (1..=n).map(|i| format!("a{i}")).collect();
    let mut items: Vec<String> = (1..=n).map(|i| format!("b{i}")).collect();
    for j in 1..=s {
        agents.push(format!("c{j}"));
        items.push(format!("d{j}"));
    }
    for j in 1..=s {
        agents.push(format!("cb{j}"));
        items.push(format!("db{j}"));
    }
    let allocation = (0..width).map(Some).collect();
    let instance =
        Instance::from_parts(agents, items, profiles, allocation, (n + s) as u32, (2 * t - 1) as u32);
    Ok(LabeledInstance { instance, label })
}

/// Seed-deterministic fuzzing instance at k = 1, alpha = 1. Per layer each
/// agent ranks a uniform-size random subset of items in random order; the
/// assignment fills `floor(alloc_fraction * min(n, m))` slots, preferring
/// items the agent finds acceptable in layer 1.
pub fn gen_random(
    n: usize,
    m: usize,
    layers: usize,
    d_max: usize,
    alloc_fraction: f64,
    seed: u64,
) -> Instance {
    assert!(n >= 1 && m >= 1 && layers >= 1, "dimensions must be positive");
    assert!(d_max <= m, "d_max exceeds the item count");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut profiles = Vec::with_capacity(layers);
    for _ in 0..layers {
        let mut lists = Vec::with_capacity(n);
        for _ in 0..n {
            let len = rng.gen_range(0..=d_max);
            lists.push(rand::seq::index::sample(&mut rng, m, len).into_vec());
        }
        profiles.push(PreferenceProfile::new(lists));
    }

    let target = (alloc_fraction * n.min(m) as f64).floor() as usize;
    let mut allocation = vec![None; n];
    let mut taken = vec![false; m];
    let mut placed = 0;
    for a in 0..n {
        if placed == target {
            break;
        }
        if let Some(&b) = profiles[0].list(a).iter().find(|&&b| !taken[b]) {
            allocation[a] = Some(b);
            taken[b] = true;
            placed += 1;
        }
    }
    let mut free = (0..m).filter(|&b| !taken[b]);
    for a in 0..n {
        if placed == target {
            break;
        }
        if allocation[a].is_none() {
            if let Some(b) = free.next() {
                allocation[a] = Some(b);
                placed += 1;
            }
        }
    }

    Instance::from_parts(
        (1..=n).map(|i| format!("a{i}")).collect(),
        (1..=m).map(|i| format!("b{i}")).collect(),
        profiles,
        allocation,
        1,
        1,
    )
}

/// Exhaustive Hamiltonian-cycle check; `None` above 10 vertices.
pub fn is_hamiltonian(g: &Digraph) -> Option<bool> {
    if g.n() > 10 {
        return None;
    }
    if g.n() < 2 {
        return Some(false);
    }
    Some(ham_from(g, 0, 1))
}

fn ham_from(g: &Digraph, v: usize, visited: u64) -> bool {
    if visited.count_ones() as usize == g.n() {
        return g.has_edge(v, 0);
    }
    g.out(v).iter().any(|&w| visited & 1 << w == 0 && ham_from(g, w, visited | 1 << w))
}

/// Exhaustive search for an independent set with one vertex of each color;
/// `None` above 14 vertices.
pub fn has_multicolored_independent_set(g: &ColoredGraph) -> Option<bool> {
    if g.n() > 14 {
        return None;
    }
    let mut class = vec![Vec::new(); g.color_count()];
    for v in 0..g.n() {
        class[g.color(v)].push(v);
    }
    if class.iter().any(Vec::is_empty) {
        return Some(false);
    }
    Some(mis_from(g, &class, 0, &mut Vec::new()))
}

fn mis_from(g: &ColoredGraph, class: &[Vec<usize>], c: usize, picked: &mut Vec<usize>) -> bool {
    if c == class.len() {
        return true;
    }
    class[c].iter().any(|&v| {
        if picked.iter().any(|&u| g.adjacent(u, v)) {
            return false;
        }
        picked.push(v);
        let found = mis_from(g, class, c + 1, picked);
        picked.pop();
        found
    })
}

fn identity_instance(profiles: Vec<PreferenceProfile>, n: usize, k: u32, alpha: u32) -> Instance {
    Instance::from_parts(
        (1..=n).map(|i| format!("a{i}")).collect(),
        (1..=n).map(|i| format!("b{i}")).collect(),
        profiles,
        (0..n).map(Some).collect(),
        k,
        alpha,
    )
}

fn same_order(gs: &[Digraph]) -> Result<usize, GenError> {
    assert!(!gs.is_empty(), "need at least one digraph");
    let n = gs[0].n();
    assert!(n >= 2, "family needs at least two vertices");
    for (index, g) in gs.iter().enumerate() {
        if g.n() != n {
            return Err(GenError::MismatchedVertexCount { index, expected: n, got: g.n() });
        }
    }
    Ok(n)
}

fn ham_label(h: Option<bool>) -> Label {
    match h {
        Some(true) => Label::NotOptimal,
        Some(false) => Label::Optimal,
        None => Label::Unknown,
    }
}

fn fold_and(vals: impl Iterator<Item = Option<bool>>) -> Option<bool> {
    let mut all = Some(true);
    for v in vals {
        match v {
            Some(false) => return Some(false),
            Some(true) => {}
            None => all = None,
        }
    }
    all
}

fn fold_or(vals: impl Iterator<Item = Option<bool>>) -> Option<bool> {
    let mut any = Some(false);
    for v in vals {
        match v {
            Some(true) => return Some(true),
            Some(false) => {}
            None => any = None,
        }
    }
    any
}
