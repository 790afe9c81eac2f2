//! Pajek export: `.net` for the weighted trait network and `.clu` for a
//! partition. Vertex and community ids are 1-based in both formats.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::community::{Partition, WeightedGraph};
use crate::error::{Error, Result};

/// `.net` body: `*Vertices N`, one `i "F_i"` line per node, `*Edges`, then
/// `i j w` lines with 6-decimal weights.
pub fn net_string(g: &WeightedGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "*Vertices {}", g.n());
    for i in 1..=g.n() {
        let _ = writeln!(out, "{i} \"F_{i}\"");
    }
    out.push_str("*Edges\n");
    for &(i, j, w) in g.edges() {
        let _ = writeln!(out, "{} {} {w:.6}", i + 1, j + 1);
    }
    out
}

/// `.clu` body: `*Vertices N`, then one 1-based community id per node line.
pub fn clu_string(p: &Partition) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "*Vertices {}", p.assignment.len());
    for &c in &p.assignment {
        let _ = writeln!(out, "{}", c + 1);
    }
    out
}

pub fn write_net(path: &Path, g: &WeightedGraph) -> Result<()> {
    fs::write(path, net_string(g)).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn write_clu(path: &Path, p: &Partition) -> Result<()> {
    fs::write(path, clu_string(p)).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}
