//! Instance model and the plain-text interchange format.
//!
//! An instance holds agents, items, one preference profile per layer, a
//! partial assignment, and the two parameters `k` (group size) and
//! `alpha` (layer quota). Preference lists are ordered, duplicate-free
//! and may be incomplete; the null item is implicitly the least
//! preferred option of every agent. An allocated item that is missing
//! from a layer's list ranks like the null item in that layer, so the
//! agent prefers every listed item over it.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Token used for the null item on the right-hand side of assignment lines.
pub const NULL_ITEM_TOKEN: &str = "_";

/// One layer of preferences: per agent an ordered list of item indices,
/// most preferred first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceProfile {
    lists: Vec<Vec<usize>>,
}

impl PreferenceProfile {
    pub fn new(lists: Vec<Vec<usize>>) -> Self {
        Self { lists }
    }

    pub fn empty(agents: usize) -> Self {
        Self { lists: vec![Vec::new(); agents] }
    }

    pub fn list(&self, agent: usize) -> &[usize] {
        &self.lists[agent]
    }

    pub fn set_list(&mut self, agent: usize, items: Vec<usize>) {
        self.lists[agent] = items;
    }
}

/// Partial assignment of items to agents. `None` is the null item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    allocation: Vec<Option<usize>>,
}

impl Assignment {
    pub fn new(allocation: Vec<Option<usize>>) -> Self {
        Self { allocation }
    }

    pub fn item_of(&self, agent: usize) -> Option<usize> {
        self.allocation[agent]
    }

    pub fn alloc_count(&self) -> usize {
        self.allocation.iter().filter(|x| x.is_some()).count()
    }

    pub fn slots(&self) -> &[Option<usize>] {
        &self.allocation
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    agents: Vec<String>,
    items: Vec<String>,
    profiles: Vec<PreferenceProfile>,
    assignment: Assignment,
    k: u32,
    alpha: u32,
}

impl Instance {
    /// Assembles an instance from raw parts. Dimensions must line up;
    /// semantic problems (duplicate allocation, parameter ranges, name
    /// clashes) are representable and reported by [`Instance::validate`].
    pub fn from_parts(
        agents: Vec<String>,
        items: Vec<String>,
        profiles: Vec<PreferenceProfile>,
        allocation: Vec<Option<usize>>,
        k: u32,
        alpha: u32,
    ) -> Self {
        assert_eq!(allocation.len(), agents.len(), "allocation length");
        for p in &profiles {
            assert_eq!(p.lists.len(), agents.len(), "profile width");
            for list in &p.lists {
                for &b in list {
                    assert!(b < items.len(), "item index out of range");
                }
            }
        }
        for slot in allocation.iter().flatten() {
            assert!(*slot < items.len(), "allocated item out of range");
        }
        Self { agents, items, profiles, assignment: Assignment::new(allocation), k, alpha }
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn m(&self) -> usize {
        self.items.len()
    }

    pub fn layers(&self) -> usize {
        self.profiles.len()
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    /// The same instance under different parameters.
    pub fn with_params(&self, k: u32, alpha: u32) -> Instance {
        let mut out = self.clone();
        out.k = k;
        out.alpha = alpha;
        out
    }

    /// Number of layers a bad group must be bad in before the instance
    /// stops being optimal: `layers - alpha + 1`.
    pub fn threshold(&self) -> usize {
        self.layers() - self.alpha as usize + 1
    }

    pub fn agent_name(&self, a: usize) -> &str {
        &self.agents[a]
    }

    pub fn item_name(&self, b: usize) -> &str {
        &self.items[b]
    }

    pub fn agent_names(&self) -> &[String] {
        &self.agents
    }

    pub fn item_names(&self) -> &[String] {
        &self.items
    }

    pub fn profile(&self, layer: usize) -> &PreferenceProfile {
        &self.profiles[layer]
    }

    pub fn list(&self, layer: usize, agent: usize) -> &[usize] {
        self.profiles[layer].list(agent)
    }

    pub fn allocation(&self, agent: usize) -> Option<usize> {
        self.assignment.item_of(agent)
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assignment
    }

    pub fn alloc_count(&self) -> usize {
        self.assignment.alloc_count()
    }

    /// Owning agent per item, derived from the assignment. With a
    /// duplicate allocation (invalid instance) the first agent wins.
    pub fn owner_map(&self) -> Vec<Option<usize>> {
        let mut owner = vec![None; self.m()];
        for a in 0..self.n() {
            if let Some(b) = self.allocation(a) {
                owner[b].get_or_insert(a);
            }
        }
        owner
    }

    /// Longest preference list across all layers and agents.
    pub fn max_list_len(&self) -> usize {
        self.profiles
            .iter()
            .flat_map(|p| p.lists.iter().map(Vec::len))
            .max()
            .unwrap_or(0)
    }

    /// Rank of `item` in `agent`'s list for `layer`, 0 = most preferred.
    pub fn rank(&self, layer: usize, agent: usize, item: usize) -> Option<usize> {
        self.list(layer, agent).iter().position(|&x| x == item)
    }

    /// Items `agent` strictly prefers over its allocation in `layer`.
    /// Returned in list order. An unallocated agent, or one whose
    /// allocated item is absent from the list, prefers everything listed.
    pub fn preferred_over_allocation(&self, layer: usize, agent: usize) -> &[usize] {
        let list = self.list(layer, agent);
        match self.allocation(agent).and_then(|b| list.iter().position(|&x| x == b)) {
            Some(pos) => &list[..pos],
            None => list,
        }
    }

    /// True iff `agent` strictly prefers `x` over its allocation in `layer`.
    pub fn prefers_over_allocation(&self, layer: usize, agent: usize, x: usize) -> bool {
        self.preferred_over_allocation(layer, agent).contains(&x)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut errors = Vec::new();
        let mut warnings = Vec::new();

        if self.alpha < 1 || self.alpha as usize > self.layers() {
            errors.push(ValidationError::AlphaOutOfRange { alpha: self.alpha, layers: self.layers() });
        }
        if self.k < 1 {
            errors.push(ValidationError::KOutOfRange { k: self.k });
        } else if self.k as usize > self.n() {
            warnings.push(ValidationWarning::KExceedsAgentCount { k: self.k, n: self.n() });
        }

        let mut seen = HashMap::new();
        for name in &self.agents {
            if seen.insert(name.clone(), ()).is_some() {
                errors.push(ValidationError::DuplicateAgent(name.clone()));
            }
        }
        seen.clear();
        for name in &self.items {
            if seen.insert(name.clone(), ()).is_some() {
                errors.push(ValidationError::DuplicateItem(name.clone()));
            }
        }

        for (layer, profile) in self.profiles.iter().enumerate() {
            for a in 0..self.n() {
                let mut in_list = vec![false; self.m()];
                for &b in profile.list(a) {
                    if in_list[b] {
                        errors.push(ValidationError::DuplicateListEntry {
                            agent: self.agents[a].clone(),
                            item: self.items[b].clone(),
                            layer,
                        });
                    }
                    in_list[b] = true;
                }
                if let Some(p) = self.allocation(a) {
                    if !in_list[p] {
                        warnings.push(ValidationWarning::IllegalAllocation {
                            agent: self.agents[a].clone(),
                            item: self.items[p].clone(),
                            layer,
                        });
                    }
                }
            }
        }

        let mut holder: Vec<Option<usize>> = vec![None; self.m()];
        for a in 0..self.n() {
            if let Some(b) = self.allocation(a) {
                if let Some(first) = holder[b] {
                    errors.push(ValidationError::DuplicateAllocation {
                        item: self.items[b].clone(),
                        first: self.agents[first].clone(),
                        second: self.agents[a].clone(),
                    });
                } else {
                    holder[b] = Some(a);
                }
            }
        }

        ValidationReport { errors, warnings }
    }
}

/// Outcome of [`Instance::validate`]: hard structural errors plus
/// advisory warnings. An empty error list means the instance satisfies
/// every structural invariant; warnings flag legal but noteworthy data
/// such as an agent allocated an item it does not list in some layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub errors: Vec<ValidationError>,
    pub warnings: Vec<ValidationWarning>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationError {
    AlphaOutOfRange { alpha: u32, layers: usize },
    KOutOfRange { k: u32 },
    DuplicateAgent(String),
    DuplicateItem(String),
    DuplicateListEntry { agent: String, item: String, layer: usize },
    DuplicateAllocation { item: String, first: String, second: String },
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationError::AlphaOutOfRange { alpha, layers } => {
                write!(f, "alpha = {alpha} out of range [1, {layers}]")
            }
            ValidationError::KOutOfRange { k } => write!(f, "k = {k} must be at least 1"),
            ValidationError::DuplicateAgent(name) => write!(f, "duplicate agent `{name}`"),
            ValidationError::DuplicateItem(name) => write!(f, "duplicate item `{name}`"),
            ValidationError::DuplicateListEntry { agent, item, layer } => {
                write!(f, "item `{item}` listed twice by `{agent}` in layer {}", layer + 1)
            }
            ValidationError::DuplicateAllocation { item, first, second } => {
                write!(f, "item `{item}` allocated to both `{first}` and `{second}`")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationWarning {
    /// Allocated item missing from the agent's list in one layer; the
    /// item then ranks like the null item there.
    IllegalAllocation { agent: String, item: String, layer: usize },
    /// Group conditions are vacuous for group sizes above the number of
    /// agents. Kernelized instances can carry such a `k` legitimately.
    KExceedsAgentCount { k: u32, n: usize },
}

impl fmt::Display for ValidationWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationWarning::IllegalAllocation { agent, item, layer } => {
                write!(f, "agent `{agent}` holds `{item}` but does not list it in layer {}", layer + 1)
            }
            ValidationWarning::KExceedsAgentCount { k, n } => {
                write!(f, "k = {k} exceeds the {n} agents; group conditions are vacuous")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

fn err<T>(line: usize, col: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line, col, msg: msg.into() })
}

const RESERVED: &[&str] = &["agents", "items", "k", "alpha", "layers", "layer", "assignment", NULL_ITEM_TOKEN];

fn check_identifier(line: usize, col: usize, name: &str) -> Result<(), ParseError> {
    if name.is_empty() {
        return err(line, col, "empty identifier");
    }
    if RESERVED.contains(&name) {
        return err(line, col, format!("`{name}` is a reserved word"));
    }
    if let Some(bad) = name.chars().find(|c| matches!(c, ':' | '>' | '=' | '#')) {
        return err(line, col, format!("identifier `{name}` contains forbidden character `{bad}`"));
    }
    Ok(())
}

/// One non-empty line: 1-based line number plus (column, token) pairs.
struct Row<'a> {
    line: usize,
    tokens: Vec<(usize, &'a str)>,
}

fn tokenize(text: &str) -> Vec<Row<'_>> {
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let mut tokens = Vec::new();
        let mut col = 0;
        for piece in line.split_inclusive(char::is_whitespace) {
            let token = piece.trim_end_matches(char::is_whitespace);
            if !token.is_empty() {
                tokens.push((col + 1, token));
            }
            col += piece.chars().count();
        }
        if !tokens.is_empty() {
            rows.push(Row { line: i + 1, tokens });
        }
    }
    rows
}

/// Parses the text interchange format. `#` starts a comment, blank lines
/// are ignored, blocks appear in the fixed order agents / items / k /
/// alpha / layers / layer blocks / assignment. Agents omitted from a
/// layer block have empty lists; every agent appears exactly once in the
/// assignment block, with `_` for the null item.
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let rows = tokenize(text);
    let mut pos = 0;

    let take = |pos: &mut usize| -> Option<&Row<'_>> {
        let row = rows.get(*pos);
        *pos += 1;
        row
    };

    let name_list = |keyword: &str, pos: &mut usize| -> Result<(usize, Vec<String>), ParseError> {
        let row = match take(pos) {
            Some(r) => r,
            None => return err(rows.last().map_or(1, |r| r.line), 1, format!("expected `{keyword}:`")),
        };
        let (col, head) = row.tokens[0];
        if head != format!("{keyword}:") {
            return err(row.line, col, format!("expected `{keyword}:`, found `{head}`"));
        }
        let mut names = Vec::new();
        for &(c, t) in &row.tokens[1..] {
            check_identifier(row.line, c, t)?;
            names.push(t.to_string());
        }
        Ok((row.line, names))
    };

    let scalar = |keyword: &str, pos: &mut usize| -> Result<(usize, u32), ParseError> {
        let row = match take(pos) {
            Some(r) => r,
            None => return err(rows.last().map_or(1, |r| r.line), 1, format!("expected `{keyword}:`")),
        };
        let (col, head) = row.tokens[0];
        if head != format!("{keyword}:") {
            return err(row.line, col, format!("expected `{keyword}:`, found `{head}`"));
        }
        if row.tokens.len() != 2 {
            return err(row.line, col, format!("`{keyword}:` takes exactly one number"));
        }
        let (vcol, vtok) = row.tokens[1];
        match vtok.parse::<u32>() {
            Ok(v) => Ok((row.line, v)),
            Err(_) => err(row.line, vcol, format!("`{vtok}` is not a number")),
        }
    };

    let (_, agents) = name_list("agents", &mut pos)?;
    let (items_line, items) = name_list("items", &mut pos)?;
    let (k_line, k) = scalar("k", &mut pos)?;
    let (alpha_line, alpha) = scalar("alpha", &mut pos)?;
    let (layers_line, layer_count) = scalar("layers", &mut pos)?;

    let mut agent_index = HashMap::new();
    for (i, name) in agents.iter().enumerate() {
        if agent_index.insert(name.clone(), i).is_some() {
            return err(items_line - 1, 1, format!("duplicate agent `{name}`"));
        }
    }
    let mut item_index = HashMap::new();
    for (i, name) in items.iter().enumerate() {
        if item_index.insert(name.clone(), i).is_some() {
            return err(items_line, 1, format!("duplicate item `{name}`"));
        }
    }

    if k < 1 {
        return err(k_line, 1, "k must be at least 1");
    }
    if layer_count < 1 {
        return err(layers_line, 1, "layers must be at least 1");
    }
    if alpha < 1 || alpha > layer_count {
        return err(alpha_line, 1, format!("alpha = {alpha} out of range [1, {layer_count}]"));
    }

    let n = agents.len();
    let mut profiles = Vec::with_capacity(layer_count as usize);
    for expected in 1..=layer_count {
        let row = match take(&mut pos) {
            Some(r) => r,
            None => return err(rows.last().map_or(1, |r| r.line), 1, format!("expected `layer {expected}:`")),
        };
        let ok = row.tokens.len() == 2
            && row.tokens[0].1 == "layer"
            && row.tokens[1].1 == format!("{expected}:");
        if !ok {
            return err(row.line, row.tokens[0].0, format!("expected `layer {expected}:`"));
        }

        let mut profile = PreferenceProfile::empty(n);
        let mut filled = vec![false; n];
        loop {
            let row = match rows.get(pos) {
                Some(r) => r,
                None => return err(rows.last().map_or(1, |r| r.line), 1, "expected `assignment:`"),
            };
            let (col, head) = row.tokens[0];
            if head == "layer" || head == "assignment:" {
                break;
            }
            pos += 1;
            let agent_name = match head.strip_suffix(':') {
                Some(name) => name,
                None => return err(row.line, col, format!("expected `agent:` preference line, found `{head}`")),
            };
            let a = match agent_index.get(agent_name) {
                Some(&a) => a,
                None => return err(row.line, col, format!("unknown agent `{agent_name}`")),
            };
            if filled[a] {
                return err(row.line, col, format!("agent `{agent_name}` listed twice in layer {expected}"));
            }
            filled[a] = true;

            let mut list = Vec::new();
            let mut expect_item = true;
            for &(c, t) in &row.tokens[1..] {
                if expect_item {
                    let b = match item_index.get(t) {
                        Some(&b) => b,
                        None => return err(row.line, c, format!("unknown item `{t}`")),
                    };
                    if list.contains(&b) {
                        return err(row.line, c, format!("item `{t}` listed twice"));
                    }
                    list.push(b);
                } else if t != ">" {
                    return err(row.line, c, format!("expected `>`, found `{t}`"));
                }
                expect_item = !expect_item;
            }
            if expect_item && !list.is_empty() {
                let (c, t) = *row.tokens.last().unwrap();
                return err(row.line, c, format!("dangling `{t}` at end of list"));
            }
            profile.set_list(a, list);
        }
        profiles.push(profile);
    }

    let row = match take(&mut pos) {
        Some(r) => r,
        None => return err(rows.last().map_or(1, |r| r.line), 1, "expected `assignment:`"),
    };
    if row.tokens[0].1 != "assignment:" {
        let extra = row.tokens[0];
        return err(row.line, extra.0, format!("expected `assignment:`, found `{}`", extra.1));
    }
    let assignment_line = row.line;

    let mut allocation: Vec<Option<Option<usize>>> = vec![None; n];
    let mut holder: Vec<Option<usize>> = vec![None; items.len()];
    while let Some(row) = rows.get(pos) {
        pos += 1;
        if row.tokens.len() != 3 || row.tokens[1].1 != "=" {
            return err(row.line, row.tokens[0].0, "expected `agent = item` or `agent = _`");
        }
        let (acol, aname) = row.tokens[0];
        let a = match agent_index.get(aname) {
            Some(&a) => a,
            None => return err(row.line, acol, format!("unknown agent `{aname}`")),
        };
        if allocation[a].is_some() {
            return err(row.line, acol, format!("agent `{aname}` assigned twice"));
        }
        let (icol, iname) = row.tokens[2];
        let slot = if iname == NULL_ITEM_TOKEN {
            None
        } else {
            let b = match item_index.get(iname) {
                Some(&b) => b,
                None => return err(row.line, icol, format!("unknown item `{iname}`")),
            };
            if let Some(first) = holder[b] {
                return err(
                    row.line,
                    icol,
                    format!("item `{iname}` already allocated to `{}`", agents[first]),
                );
            }
            holder[b] = Some(a);
            Some(b)
        };
        allocation[a] = Some(slot);
    }

    let mut resolved = Vec::with_capacity(n);
    for (a, slot) in allocation.into_iter().enumerate() {
        match slot {
            Some(s) => resolved.push(s),
            None => {
                return err(assignment_line, 1, format!("agent `{}` missing from assignment", agents[a]))
            }
        }
    }

    Ok(Instance::from_parts(agents, items, profiles, resolved, k, alpha))
}

/// Canonical text form: parsing it reproduces the instance exactly.
/// Agents with empty lists are omitted from layer blocks.
pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = String::new();
    out.push_str("agents:");
    for name in inst.agent_names() {
        out.push(' ');
        out.push_str(name);
    }
    out.push_str("\nitems:");
    for name in inst.item_names() {
        out.push(' ');
        out.push_str(name);
    }
    out.push_str(&format!("\nk: {}\nalpha: {}\nlayers: {}\n", inst.k(), inst.alpha(), inst.layers()));
    for layer in 0..inst.layers() {
        out.push_str(&format!("layer {}:\n", layer + 1));
        for a in 0..inst.n() {
            let list = inst.list(layer, a);
            if list.is_empty() {
                continue;
            }
            out.push_str(inst.agent_name(a));
            out.push(':');
            for (i, &b) in list.iter().enumerate() {
                out.push_str(if i == 0 { " " } else { " > " });
                out.push_str(inst.item_name(b));
            }
            out.push('\n');
        }
    }
    out.push_str("assignment:\n");
    for a in 0..inst.n() {
        match inst.allocation(a) {
            Some(b) => out.push_str(&format!("{} = {}\n", inst.agent_name(a), inst.item_name(b))),
            None => out.push_str(&format!("{} = {}\n", inst.agent_name(a), NULL_ITEM_TOKEN)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SINGLE: &str = include_str!("../fixtures/golden_single_layer.la");
    const FOUR: &str = include_str!("../fixtures/golden_four_layer.la");

    #[test]
    fn parses_single_layer_example() {
        let inst = parse_instance(SINGLE).unwrap();
        assert_eq!(inst.n(), 5);
        assert_eq!(inst.m(), 5);
        assert_eq!(inst.layers(), 1);
        assert_eq!(inst.alloc_count(), 4);
        assert_eq!(inst.agent_name(0), "a1");
        assert_eq!(inst.list(0, 0), &[3, 0, 1, 4]);
        assert_eq!(inst.list(0, 4), &[4]);
        assert_eq!(inst.allocation(0), Some(1));
        assert_eq!(inst.allocation(4), None);
        assert!(inst.validate().is_valid());
        assert!(inst.validate().warnings.is_empty());
    }

    #[test]
    fn parses_four_layer_example() {
        let inst = parse_instance(FOUR).unwrap();
        assert_eq!((inst.n(), inst.m(), inst.layers()), (5, 5, 4));
        assert_eq!((inst.k(), inst.alpha()), (2, 2));
        assert_eq!(inst.threshold(), 3);
        assert_eq!(inst.alloc_count(), 4);
        assert_eq!(inst.list(3, 3), &[] as &[usize]);
        assert_eq!(inst.list(2, 3), &[4]);
        assert!(inst.validate().is_valid());
        assert!(inst.validate().warnings.is_empty());
    }

    #[test]
    fn minimal_instance_round_trips() {
        let text = "agents: x\nitems: y\nk: 1\nalpha: 1\nlayers: 1\nlayer 1:\nx: y\nassignment:\nx = y\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(serialize_instance(&inst), text);
    }

    #[test]
    fn golden_examples_round_trip() {
        for text in [SINGLE, FOUR] {
            let inst = parse_instance(text).unwrap();
            let again = parse_instance(&serialize_instance(&inst)).unwrap();
            assert_eq!(inst, again);
        }
    }

    #[test]
    fn omitted_agents_have_empty_lists() {
        let text = "agents: a1 a2\nitems: b1\nk: 1\nalpha: 1\nlayers: 1\nlayer 1:\na2: b1\nassignment:\na1 = _\na2 = b1\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.list(0, 0), &[] as &[usize]);
        assert_eq!(inst.list(0, 1), &[0]);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# header\nagents: a1 # trailing\n\nitems: b1\nk: 1\nalpha: 1\nlayers: 1\nlayer 1:\n\n# nothing here\nassignment:\na1 = b1\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.allocation(0), Some(0));
    }

    #[test]
    fn duplicate_allocation_is_rejected_with_position() {
        let text = "agents: a1 a2\nitems: b1\nk: 1\nalpha: 1\nlayers: 1\nlayer 1:\nassignment:\na1 = b1\na2 = b1\n";
        let e = parse_instance(text).unwrap_err();
        assert_eq!(e.line, 9);
        assert!(e.msg.contains("already allocated"), "{}", e.msg);
    }

    #[test]
    fn alpha_out_of_range_is_rejected() {
        let text = "agents: a1\nitems: b1\nk: 1\nalpha: 3\nlayers: 2\nlayer 1:\nlayer 2:\nassignment:\na1 = _\n";
        let e = parse_instance(text).unwrap_err();
        assert_eq!(e.line, 4);
        assert!(e.msg.contains("out of range"));
    }

    #[test]
    fn duplicate_list_entry_is_rejected() {
        let text = "agents: a1\nitems: b1 b2\nk: 1\nalpha: 1\nlayers: 1\nlayer 1:\na1: b1 > b2 > b1\nassignment:\na1 = _\n";
        let e = parse_instance(text).unwrap_err();
        assert_eq!(e.line, 7);
        assert!(e.msg.contains("listed twice"));
    }

    #[test]
    fn unknown_item_reports_line_and_column() {
        let text = "agents: a1\nitems: b1\nk: 1\nalpha: 1\nlayers: 1\nlayer 1:\na1: zz\nassignment:\na1 = _\n";
        let e = parse_instance(text).unwrap_err();
        assert_eq!((e.line, e.col), (7, 5));
        assert!(e.msg.contains("unknown item"));
    }

    #[test]
    fn missing_assignment_entry_is_rejected() {
        let text = "agents: a1 a2\nitems: b1\nk: 1\nalpha: 1\nlayers: 1\nlayer 1:\nassignment:\na1 = b1\n";
        let e = parse_instance(text).unwrap_err();
        assert!(e.msg.contains("missing from assignment"));
    }

    #[test]
    fn validate_reports_illegal_allocation_warning() {
        let text = "agents: a1\nitems: b1 b2\nk: 1\nalpha: 1\nlayers: 2\nlayer 1:\na1: b1\nlayer 2:\na1: b2\nassignment:\na1 = b1\n";
        let inst = parse_instance(text).unwrap();
        let report = inst.validate();
        assert!(report.is_valid());
        assert_eq!(
            report.warnings,
            vec![ValidationWarning::IllegalAllocation {
                agent: "a1".into(),
                item: "b1".into(),
                layer: 1,
            }]
        );
        // The missing item ranks last, so everything listed is preferred.
        assert_eq!(inst.preferred_over_allocation(1, 0), &[1]);
        assert_eq!(inst.preferred_over_allocation(0, 0), &[] as &[usize]);
    }

    #[test]
    fn validate_flags_constructed_violations() {
        let inst = Instance::from_parts(
            vec!["a1".into(), "a1".into()],
            vec!["b1".into()],
            vec![PreferenceProfile::empty(2)],
            vec![Some(0), Some(0)],
            1,
            3,
        );
        let report = inst.validate();
        assert!(!report.is_valid());
        assert!(report.errors.iter().any(|e| matches!(e, ValidationError::AlphaOutOfRange { .. })));
        assert!(report.errors.iter().any(|e| matches!(e, ValidationError::DuplicateAgent(_))));
        assert!(report.errors.iter().any(|e| matches!(e, ValidationError::DuplicateAllocation { .. })));
    }

    #[test]
    fn k_above_agent_count_is_a_warning_not_an_error() {
        let text = "agents: a1\nitems: b1\nk: 4\nalpha: 1\nlayers: 1\nlayer 1:\nassignment:\na1 = b1\n";
        let inst = parse_instance(text).unwrap();
        let report = inst.validate();
        assert!(report.is_valid());
        assert!(report
            .warnings
            .iter()
            .any(|w| matches!(w, ValidationWarning::KExceedsAgentCount { k: 4, n: 1 })));
    }

    #[test]
    fn reserved_words_cannot_name_agents() {
        let text = "agents: layer\nitems: b1\nk: 1\nalpha: 1\nlayers: 1\nlayer 1:\nassignment:\nlayer = b1\n";
        let e = parse_instance(text).unwrap_err();
        assert!(e.msg.contains("reserved"));
    }
}
