//! Text renderings of blocks and edge graphs.

use std::fmt::Write;

use anyhow::{bail, Result};
use treeshift_core::transitivity::EdgeGraph;
use treeshift_core::Block;

/// Largest block depth the renderers accept.
pub const RENDER_CAP: usize = 6;

fn check_cap(depth: usize) -> Result<()> {
    if depth > RENDER_CAP {
        bail!("render cap exceeded: depth {depth} is above {RENDER_CAP}");
    }
    Ok(())
}

/// One line per site in ball order, indented by word length.
pub fn block_ascii(b: &Block) -> Result<String> {
    check_cap(b.depth())?;
    let mut out = String::new();
    for (u, s) in b.iter()? {
        writeln!(out, "{}{}: {}", "  ".repeat(u.len()), u.human(), s).expect("write to string");
    }
    Ok(out)
}

/// One node per site, with an edge from each word to its one-letter
/// extensions labeled by the letter.
pub fn block_dot(b: &Block) -> Result<String> {
    check_cap(b.depth())?;
    let mut out = String::from("digraph block {\n");
    for (u, s) in b.iter()? {
        writeln!(out, "  \"{}\" [label=\"{}: {}\"];", u.human(), u.human(), s).expect("write to string");
    }
    for (u, _) in b.iter()? {
        if let (Some(parent), Some(l)) = (u.parent(), u.last()) {
            writeln!(out, "  \"{}\" -> \"{}\" [label=\"{}\"];", parent.human(), u.human(), l).expect("write to string");
        }
    }
    out.push_str("}\n");
    Ok(out)
}

pub fn edges_ascii(g: &EdgeGraph) -> String {
    let mut out = String::new();
    for (p, l, q) in g.graph.edges() {
        writeln!(out, "x{p} -{l}-> x{q}").expect("write to string");
    }
    out
}

pub fn edges_dot(g: &EdgeGraph) -> String {
    let mut out = String::from("digraph edges {\n");
    for p in 0..g.points.len() {
        writeln!(out, "  x{p};").expect("write to string");
    }
    for (p, l, q) in g.graph.edges() {
        writeln!(out, "  x{p} -> x{q} [label=\"{l}\"];").expect("write to string");
    }
    out.push_str("}\n");
    out
}
