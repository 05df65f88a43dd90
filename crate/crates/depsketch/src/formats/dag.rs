//! `parent -> child` edge lists and `X ; Y | Z` queries.

use depsketch_core::graph::{CiQuery, Dag};

use crate::{Error, Result};

/// One edge or one bare node per line. Chains `a -> b -> c` are accepted;
/// `#` starts a comment.
pub fn parse_dag(text: &str) -> Result<Dag> {
    let mut dag = Dag::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let ctx = || format!("DAG line {}", lineno + 1);
        let names: Vec<&str> = line.split("->").map(str::trim).collect();
        if names.iter().any(|n| n.is_empty() || n.contains(char::is_whitespace)) {
            return Err(Error::parse(ctx(), format!("malformed edge `{line}`")));
        }
        for name in &names {
            if !dag.contains(name) {
                dag.add_node(name)?;
            }
        }
        for pair in names.windows(2) {
            dag.add_edge(pair[0], pair[1])?;
        }
    }
    Ok(dag)
}

/// Inverse of [`parse_dag`]: isolated nodes first, then edges in node order.
pub fn write_dag(dag: &Dag) -> String {
    let mut out = String::new();
    let edges = dag.edges();
    for name in dag.node_names() {
        if !edges.iter().any(|(a, b)| a == name || b == name) {
            out.push_str(name);
            out.push('\n');
        }
    }
    for (a, b) in edges {
        out.push_str(&format!("{a} -> {b}\n"));
    }
    out
}

/// `X ; Y | Z`, each side a comma-separated node list; `| Z` may be omitted.
pub fn parse_query(text: &str) -> Result<CiQuery> {
    let ctx = || format!("query `{}`", text.trim());
    let (xy, z) = match text.split_once('|') {
        Some((a, b)) => (a, b),
        None => (text, ""),
    };
    let (x, y) = xy.split_once(';').ok_or_else(|| Error::parse(ctx(), "expected `X ; Y | Z`"))?;
    let list = |s: &str| -> Vec<String> {
        s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(str::to_string).collect()
    };
    let (x, y, z) = (list(x), list(y), list(z));
    if x.is_empty() || y.is_empty() {
        return Err(Error::parse(ctx(), "X and Y must be non-empty"));
    }
    Ok(CiQuery { x, y, z })
}

fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(head, _)| head)
}
