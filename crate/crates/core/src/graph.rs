//! DAGs over latent, observation and tangent nodes, with an exact
//! d-separation oracle.
//!
//! Node names follow a fixed scheme: `F0` is the prior, `F1`, `F2`, … the
//! latent states, `xi1`, … the observations and `xip1`, … their tangent
//! copies. Any other name is accepted as a plain node.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gm1,
    Gm2,
    Gm3,
}

impl Family {
    /// The conditioning index map each family satisfies by construction.
    pub fn natural_varrho(self) -> Varrho {
        match self {
            Family::Gm1 => Varrho::Shift1,
            Family::Gm2 | Family::Gm3 => Varrho::Identity,
        }
    }

    pub fn has_prior(self) -> bool {
        !matches!(self, Family::Gm2)
    }
}

impl core::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gm1" => Ok(Family::Gm1),
            "gm2" => Ok(Family::Gm2),
            "gm3" => Ok(Family::Gm3),
            other => Err(Error::InvalidParameter(format!("unknown family `{other}`"))),
        }
    }
}

/// The map i ↦ ϱ(i) (1-based i).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Varrho {
    /// ϱ(i) = i.
    Identity,
    /// ϱ(i) = i − 1.
    Shift1,
    /// Explicit values ϱ(1), …, ϱ(n).
    Custom(Vec<usize>),
}

impl Varrho {
    pub fn value(&self, i: usize) -> usize {
        match self {
            Varrho::Identity => i,
            Varrho::Shift1 => i - 1,
            Varrho::Custom(v) => v[i - 1],
        }
    }

    /// Checks ϱ(i) ≤ i and monotonicity for i = 1..=n.
    pub fn validate(&self, n: usize) -> Result<()> {
        if let Varrho::Custom(v) = self {
            if v.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "varrho has {} entries for n = {n}",
                    v.len()
                )));
            }
            for (k, &r) in v.iter().enumerate() {
                if r > k + 1 {
                    return Err(Error::InvalidParameter(format!(
                        "varrho({}) = {r} exceeds its index",
                        k + 1
                    )));
                }
                if k > 0 && r < v[k - 1] {
                    return Err(Error::InvalidParameter(format!(
                        "varrho is decreasing at index {}",
                        k + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

impl core::str::FromStr for Varrho {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" | "shift0" | "i" => Ok(Varrho::Identity),
            "shift1" | "i-1" => Ok(Varrho::Shift1),
            list => list
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::InvalidParameter(format!("bad varrho entry `{t}`")))
                })
                .collect::<Result<Vec<_>>>()
                .map(Varrho::Custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Prior,
    Latent(usize),
    Observation(usize),
    Tangent(usize),
    Other,
}

impl NodeKind {
    pub fn from_name(name: &str) -> NodeKind {
        fn index(rest: &str) -> Option<usize> {
            if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            rest.parse().ok()
        }
        if let Some(k) = name.strip_prefix("xip").and_then(index) {
            NodeKind::Tangent(k)
        } else if let Some(k) = name.strip_prefix("xi").and_then(index) {
            NodeKind::Observation(k)
        } else if let Some(k) = name.strip_prefix('F').and_then(index) {
            if k == 0 {
                NodeKind::Prior
            } else {
                NodeKind::Latent(k)
            }
        } else {
            NodeKind::Other
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub name: String,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dag {
    nodes: Vec<Node>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    index: BTreeMap<String, usize>,
}

impl Dag {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a DAG from `(parent, child)` pairs, creating nodes on first sight.
    pub fn from_edges<S: AsRef<str>>(edges: &[(S, S)]) -> Result<Self> {
        let mut dag = Dag::new();
        for (p, c) in edges {
            dag.ensure_node(p.as_ref());
            dag.ensure_node(c.as_ref());
            dag.add_edge(p.as_ref(), c.as_ref())?;
        }
        Ok(dag)
    }

    pub fn add_node(&mut self, name: &str) -> Result<usize> {
        if self.index.contains_key(name) {
            return Err(Error::DuplicateNode(name.to_string()));
        }
        Ok(self.ensure_node(name))
    }

    fn ensure_node(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.nodes.len();
        self.nodes.push(Node { name: name.to_string(), kind: NodeKind::from_name(name) });
        self.parents.push(Vec::new());
        self.children.push(Vec::new());
        self.index.insert(name.to_string(), i);
        i
    }

    /// Adds `parent -> child`. Rejects unknown nodes and edges closing a cycle;
    /// a repeated edge is a no-op.
    pub fn add_edge(&mut self, parent: &str, child: &str) -> Result<()> {
        let p = self.lookup(parent)?;
        let c = self.lookup(child)?;
        if self.parents[c].contains(&p) {
            return Ok(());
        }
        if p == c || self.reaches(c, p) {
            return Err(Error::Cycle { parent: parent.to_string(), child: child.to_string() });
        }
        self.parents[c].push(p);
        self.children[p].push(c);
        Ok(())
    }

    fn reaches(&self, from: usize, to: usize) -> bool {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![from];
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            if core::mem::replace(&mut seen[v], true) {
                continue;
            }
            stack.extend(self.children[v].iter().copied());
        }
        false
    }

    pub fn lookup(&self, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_names(&self) -> Vec<&str> {
        self.nodes.iter().map(|n| n.name.as_str()).collect()
    }

    /// Edges in insertion order of their children, parents in insertion order.
    pub fn edges(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (c, ps) in self.parents.iter().enumerate() {
            for &p in ps {
                out.push((self.nodes[p].name.clone(), self.nodes[c].name.clone()));
            }
        }
        out
    }

    /// Parent names of `name`, sorted.
    pub fn parents_of(&self, name: &str) -> Result<Vec<String>> {
        let i = self.lookup(name)?;
        let mut ps: Vec<String> = self.parents[i].iter().map(|&p| self.nodes[p].name.clone()).collect();
        ps.sort();
        Ok(ps)
    }

    pub fn children_of(&self, name: &str) -> Result<Vec<String>> {
        let i = self.lookup(name)?;
        let mut cs: Vec<String> = self.children[i].iter().map(|&c| self.nodes[c].name.clone()).collect();
        cs.sort();
        Ok(cs)
    }

    /// Kahn's algorithm, ties broken by insertion order.
    pub fn topological_order(&self) -> Vec<usize> {
        let mut indeg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut queue: VecDeque<usize> = (0..self.len()).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &c in &self.children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    queue.push_back(c);
                }
            }
        }
        order
    }

    fn resolve(&self, names: &[String]) -> Result<Vec<usize>> {
        names.iter().map(|n| self.lookup(n)).collect()
    }

    /// Exact d-separation test.
    pub fn d_separated(&self, q: &CiQuery) -> Result<bool> {
        let x = self.resolve(&q.x)?;
        let y = self.resolve(&q.y)?;
        let z = self.resolve(&q.z)?;
        for (a, b) in [(&x, &y), (&x, &z), (&y, &z)] {
            if let Some(&v) = a.iter().find(|v| b.contains(v)) {
                return Err(Error::OverlappingSets(self.nodes[v].name.clone()));
            }
        }
        Ok(self.d_separated_idx(&x, &y, &z))
    }

    /// Reachability with collider bookkeeping: a trail may pass a collider
    /// only when the collider or one of its descendants is observed.
    pub fn d_separated_idx(&self, x: &[usize], y: &[usize], z: &[usize]) -> bool {
        let n = self.len();
        let mut observed = vec![false; n];
        for &v in z {
            observed[v] = true;
        }
        // Nodes in z or with a descendant in z.
        let mut anc = vec![false; n];
        let mut stack: Vec<usize> = z.to_vec();
        while let Some(v) = stack.pop() {
            if core::mem::replace(&mut anc[v], true) {
                continue;
            }
            stack.extend(self.parents[v].iter().copied());
        }
        let mut is_target = vec![false; n];
        for &v in y {
            is_target[v] = true;
        }
        // Direction flags: 0 = arrived from a child (moving up), 1 = from a parent.
        let mut visited = vec![[false; 2]; n];
        let mut queue: VecDeque<(usize, usize)> = x.iter().map(|&v| (v, 0)).collect();
        while let Some((v, dir)) = queue.pop_front() {
            if core::mem::replace(&mut visited[v][dir], true) {
                continue;
            }
            if !observed[v] && is_target[v] {
                return false;
            }
            if dir == 0 {
                if !observed[v] {
                    queue.extend(self.parents[v].iter().map(|&p| (p, 0)));
                    queue.extend(self.children[v].iter().map(|&c| (c, 1)));
                }
            } else {
                if !observed[v] {
                    queue.extend(self.children[v].iter().map(|&c| (c, 1)));
                }
                if anc[v] {
                    queue.extend(self.parents[v].iter().map(|&p| (p, 0)));
                }
            }
        }
        true
    }

    /// Checks the tangent-node invariant: every `xip{i}` pairs with `xi{i}`,
    /// has no children, draws only on latent/prior parents, and sees at least
    /// the parents of `xi{i}`.
    pub fn validate_tangents(&self) -> Result<()> {
        for (v, node) in self.nodes.iter().enumerate() {
            let NodeKind::Tangent(i) = node.kind else { continue };
            let obs = self.lookup(&format!("xi{i}")).map_err(|_| {
                Error::InvalidConfig(format!("tangent node {} has no paired xi{i}", node.name))
            })?;
            if !self.children[v].is_empty() {
                return Err(Error::InvalidConfig(format!("tangent node {} has children", node.name)));
            }
            for &p in &self.parents[v] {
                if !matches!(self.nodes[p].kind, NodeKind::Prior | NodeKind::Latent(_)) {
                    return Err(Error::InvalidConfig(format!(
                        "tangent node {} has non-latent parent {}",
                        node.name, self.nodes[p].name
                    )));
                }
            }
            for &p in &self.parents[obs] {
                if matches!(self.nodes[p].kind, NodeKind::Prior | NodeKind::Latent(_))
                    && !self.parents[v].contains(&p)
                {
                    return Err(Error::InvalidConfig(format!(
                        "tangent node {} misses parent {} of xi{i}",
                        node.name, self.nodes[p].name
                    )));
                }
            }
        }
        Ok(())
    }

    fn observation_count(&self) -> usize {
        let mut n = 0;
        while self.contains(&format!("xi{}", n + 1)) {
            n += 1;
        }
        n
    }

    /// Prior (if present) plus `F1..=F{upto}` that exist in the graph.
    fn history(&self, upto: usize) -> Vec<String> {
        let mut z = Vec::new();
        if self.contains("F0") {
            z.push("F0".to_string());
        }
        for k in 1..=upto {
            let name = format!("F{k}");
            if self.contains(&name) {
                z.push(name);
            }
        }
        z
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CiQuery {
    pub x: Vec<String>,
    pub y: Vec<String>,
    pub z: Vec<String>,
}

impl CiQuery {
    pub fn new<S: AsRef<str>>(x: &[S], y: &[S], z: &[S]) -> Self {
        let own = |v: &[S]| v.iter().map(|s| s.as_ref().to_string()).collect();
        CiQuery { x: own(x), y: own(y), z: own(z) }
    }
}

impl core::fmt::Display for CiQuery {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{} ; {} | {}", self.x.join(","), self.y.join(","), self.z.join(","))
    }
}

/// The figure templates with full-history edges.
///
/// Latent states form a first-order chain. Observation `xi{i}` receives an
/// edge from every latent node it may depend on: `F0..F{i-1}` for GM1 and
/// GM3, `F1..F{i}` for GM2. GM3 adds `xi{i} -> F{i}`. Tangent nodes copy
/// the observation's parents, except in GM3 where the tangent is drawn from
/// the posterior given `F0..F{i}` and so also depends on `F{i}`.
pub fn build_gm_template(family: Family, n: usize, with_tangent: bool) -> Result<Dag> {
    if n == 0 {
        return Err(Error::InvalidParameter("template length must be at least 1".into()));
    }
    let mut dag = Dag::new();
    let first = if family.has_prior() { 0 } else { 1 };
    for k in first..=n {
        dag.add_node(&format!("F{k}"))?;
    }
    for i in 1..=n {
        dag.add_node(&format!("xi{i}"))?;
    }
    if with_tangent {
        for i in 1..=n {
            dag.add_node(&format!("xip{i}"))?;
        }
    }
    for k in (first + 1)..=n {
        dag.add_edge(&format!("F{}", k - 1), &format!("F{k}"))?;
    }
    for i in 1..=n {
        let xi = format!("xi{i}");
        let obs_parents = match family {
            Family::Gm1 | Family::Gm3 => 0..i,
            Family::Gm2 => 1..i + 1,
        };
        for j in obs_parents.clone() {
            dag.add_edge(&format!("F{j}"), &xi)?;
        }
        if family == Family::Gm3 {
            dag.add_edge(&xi, &format!("F{i}"))?;
        }
        if with_tangent {
            let xip = format!("xip{i}");
            let tangent_parents = match family {
                Family::Gm3 => 0..i + 1,
                _ => obs_parents,
            };
            for j in tangent_parents {
                dag.add_edge(&format!("F{j}"), &xip)?;
            }
        }
    }
    Ok(dag)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiCheck {
    pub query: CiQuery,
    pub separated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sp2Report {
    pub checks: Vec<CiCheck>,
    pub passed: bool,
}

impl Sp2Report {
    fn from_checks(checks: Vec<CiCheck>) -> Self {
        let passed = checks.iter().all(|c| c.separated);
        Sp2Report { checks, passed }
    }

    pub fn failures(&self) -> impl Iterator<Item = &CiCheck> {
        self.checks.iter().filter(|c| !c.separated)
    }
}

/// Checks, for each i, that `xi{i}` is d-separated from every earlier
/// observation and from every `F{k}` with k > ϱ(i), given the prior (when
/// present) and `F1..F{ϱ(i)}`.
pub fn verify_sp2(dag: &Dag, varrho: &Varrho) -> Result<Sp2Report> {
    let n = dag.observation_count();
    if n == 0 {
        return Err(Error::InvalidConfig("graph has no observation nodes xi1..".into()));
    }
    varrho.validate(n)?;
    let mut checks = Vec::new();
    for i in 1..=n {
        let xi = format!("xi{i}");
        let z = dag.history(varrho.value(i));
        let mut others: Vec<String> = (1..i).map(|j| format!("xi{j}")).collect();
        others.extend(
            ((varrho.value(i) + 1)..=n).map(|k| format!("F{k}")).filter(|f| dag.contains(f)),
        );
        for other in others {
            let query = CiQuery { x: vec![xi.clone()], y: vec![other], z: z.clone() };
            let separated = dag.d_separated(&query)?;
            checks.push(CiCheck { query, separated });
        }
    }
    Ok(Sp2Report::from_checks(checks))
}

/// Checks that each tangent `xip{i}` is d-separated from `xi{i}` given the
/// prior and `F1..F{i}`.
pub fn verify_dts(dag: &Dag) -> Result<Sp2Report> {
    dag.validate_tangents()?;
    let mut checks = Vec::new();
    for node in dag.nodes() {
        if let NodeKind::Tangent(i) = node.kind {
            let query = CiQuery { x: vec![format!("xi{i}")], y: vec![node.name.clone()], z: dag.history(i) };
            let separated = dag.d_separated(&query)?;
            checks.push(CiCheck { query, separated });
        }
    }
    if checks.is_empty() {
        return Err(Error::InvalidConfig("graph has no tangent nodes".into()));
    }
    Ok(Sp2Report::from_checks(checks))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationReport {
    /// Largest |P(ξ|F) − ∏ P(ξ_i | history_i)| over all binary assignments.
    pub max_abs_error: f64,
    pub assignments: usize,
    pub passed: bool,
}

pub const FACTORIZATION_MAX_NODES: usize = 20;
pub const FACTORIZATION_TOL: f64 = 1e-12;

/// Draws random binary CPTs for every node of `dag`, enumerates the joint
/// law, and compares P(ξ_{1:n} | all F) with ∏ᵢ P(ξ_i | F0, F1..F{ϱ(i)}).
pub fn factorization_check<R: Rng + ?Sized>(
    dag: &Dag,
    varrho: &Varrho,
    rng: &mut R,
) -> Result<FactorizationReport> {
    let v = dag.len();
    if v > FACTORIZATION_MAX_NODES {
        return Err(Error::GuardExceeded {
            what: "nodes",
            value: v as u128,
            limit: FACTORIZATION_MAX_NODES as u128,
        });
    }
    let n = dag.observation_count();
    varrho.validate(n)?;
    let cpts: Vec<Vec<f64>> = dag
        .parents
        .iter()
        .map(|ps| (0..1usize << ps.len()).map(|_| rng.random_range(0.05..0.95)).collect())
        .collect();
    let size = 1usize << v;
    let mut joint = vec![0.0; size];
    for (a, slot) in joint.iter_mut().enumerate() {
        let mut prob = 1.0;
        for (node, cpt) in cpts.iter().enumerate() {
            let mut key = 0;
            for (b, &p) in dag.parents[node].iter().enumerate() {
                key |= ((a >> p) & 1) << b;
            }
            let p1 = cpt[key];
            prob *= if (a >> node) & 1 == 1 { p1 } else { 1.0 - p1 };
        }
        *slot = prob;
    }

    let latent: Vec<usize> = (0..v)
        .filter(|&i| matches!(dag.nodes[i].kind, NodeKind::Prior | NodeKind::Latent(_)))
        .collect();
    let obs: Vec<usize> = (1..=n).map(|i| dag.lookup(&format!("xi{i}"))).collect::<Result<_>>()?;
    let keep: Vec<usize> = latent.iter().chain(obs.iter()).copied().collect();

    // Marginal over latent ∪ observation bits; bit b of the key is node keep[b].
    let project = |a: usize, set: &[usize]| -> usize {
        set.iter().enumerate().fold(0, |k, (b, &node)| k | (((a >> node) & 1) << b))
    };
    let mut marg = vec![0.0; 1 << keep.len()];
    for (a, &p) in joint.iter().enumerate() {
        marg[project(a, &keep)] += p;
    }
    let full_of_key = |key: usize| -> usize {
        keep.iter().enumerate().fold(0, |a, (b, &node)| a | (((key >> b) & 1) << node))
    };
    let mut latent_marg = vec![0.0; 1 << latent.len()];
    for (key, &p) in marg.iter().enumerate() {
        latent_marg[project(full_of_key(key), &latent)] += p;
    }

    // For each i, table of P(ξ_i = 1 | history) keyed by the history bits.
    let mut cond_tables = Vec::with_capacity(n);
    for i in 1..=n {
        let hist: Vec<usize> =
            dag.history(varrho.value(i)).iter().map(|h| dag.lookup(h)).collect::<Result<_>>()?;
        let mut num = vec![0.0; 1 << hist.len()];
        let mut den = vec![0.0; 1 << hist.len()];
        for (key, &p) in marg.iter().enumerate() {
            let a = full_of_key(key);
            let h = project(a, &hist);
            den[h] += p;
            if (a >> obs[i - 1]) & 1 == 1 {
                num[h] += p;
            }
        }
        let table: Vec<f64> = num.iter().zip(&den).map(|(a, b)| a / b).collect();
        cond_tables.push((hist, table));
    }

    let mut max_err: f64 = 0.0;
    for (key, &p) in marg.iter().enumerate() {
        let a = full_of_key(key);
        let lhs = p / latent_marg[project(a, &latent)];
        let mut rhs = 1.0;
        for (i, (hist, table)) in cond_tables.iter().enumerate() {
            let p1 = table[project(a, hist)];
            rhs *= if (a >> obs[i]) & 1 == 1 { p1 } else { 1.0 - p1 };
        }
        max_err = max_err.max((lhs - rhs).abs());
    }
    Ok(FactorizationReport {
        max_abs_error: max_err,
        assignments: marg.len(),
        passed: max_err <= FACTORIZATION_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(x: &[&str], y: &[&str], z: &[&str]) -> CiQuery {
        CiQuery::new(x, y, z)
    }

    #[test]
    fn chain_and_collider() {
        let chain = Dag::from_edges(&[("A", "B"), ("B", "C")]).unwrap();
        assert!(chain.d_separated(&q(&["A"], &["C"], &["B"])).unwrap());
        assert!(!chain.d_separated(&q(&["A"], &["C"], &[])).unwrap());
        let col = Dag::from_edges(&[("A", "C"), ("B", "C")]).unwrap();
        assert!(col.d_separated(&q(&["A"], &["B"], &[])).unwrap());
        assert!(!col.d_separated(&q(&["A"], &["B"], &["C"])).unwrap());
    }

    #[test]
    fn collider_descendant_opens_path() {
        let g = Dag::from_edges(&[("A", "C"), ("B", "C"), ("C", "D")]).unwrap();
        assert!(!g.d_separated(&q(&["A"], &["B"], &["D"])).unwrap());
    }

    #[test]
    fn errors() {
        let g = Dag::from_edges(&[("A", "B")]).unwrap();
        assert_eq!(g.d_separated(&q(&["A"], &["Z"], &[])), Err(Error::UnknownNode("Z".into())));
        assert_eq!(g.d_separated(&q(&["A"], &["A"], &[])), Err(Error::OverlappingSets("A".into())));
        let mut g = g;
        assert!(matches!(g.add_edge("B", "A"), Err(Error::Cycle { .. })));
        assert!(matches!(g.add_node("A"), Err(Error::DuplicateNode(_))));
    }

    #[test]
    fn gm1_template_edges() {
        let g = build_gm_template(Family::Gm1, 2, false).unwrap();
        let mut names = g.node_names();
        names.sort();
        assert_eq!(names, ["F0", "F1", "F2", "xi1", "xi2"]);
        let mut edges = g.edges();
        edges.sort();
        let expect = [("F0", "F1"), ("F0", "xi1"), ("F0", "xi2"), ("F1", "F2"), ("F1", "xi2")];
        let expect: Vec<(String, String)> =
            expect.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        assert_eq!(edges, expect);
    }

    #[test]
    fn sp2_on_templates() {
        for n in 1..=6 {
            let g1 = build_gm_template(Family::Gm1, n, false).unwrap();
            assert!(verify_sp2(&g1, &Varrho::Shift1).unwrap().passed);
            let g2 = build_gm_template(Family::Gm2, n, false).unwrap();
            assert!(verify_sp2(&g2, &Varrho::Identity).unwrap().passed);
            let g3 = build_gm_template(Family::Gm3, n, false).unwrap();
            assert!(verify_sp2(&g3, &Varrho::Identity).unwrap().passed);
            let bad = verify_sp2(&g3, &Varrho::Shift1).unwrap();
            assert!(!bad.passed);
            // The edge xi_i -> F_i breaks separation from F_i and everything after it.
            assert!(bad
                .failures()
                .any(|c| c.query.y[0] == c.query.x[0].replace("xi", "F")));
            assert!(bad.failures().all(|c| c.query.y[0].starts_with('F')));
        }
    }

    #[test]
    fn varrho_validation() {
        assert!(Varrho::Custom(vec![0, 2]).validate(2).is_ok());
        assert!(Varrho::Custom(vec![2, 2]).validate(2).is_err());
        assert!(Varrho::Custom(vec![1, 0]).validate(2).is_err());
    }

    #[test]
    fn factorization_gm1() {
        let g = build_gm_template(Family::Gm1, 3, false).unwrap();
        let mut rng = crate::rng::stream(1, 0);
        let r = factorization_check(&g, &Varrho::Shift1, &mut rng).unwrap();
        assert!(r.passed, "{r:?}");
    }
}
