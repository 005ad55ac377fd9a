//! Directed spillover networks built from net pairwise connectedness.

use std::fmt::Write;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Default edge filter.
pub const DEFAULT_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Transmitter,
    Receiver,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Transmitter => "transmitter",
            Role::Receiver => "receiver",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub name: String,
    pub net: f64,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub threshold: f64,
}

/// One edge `i → j` for every `npdc[(i, j)] > threshold`. A node's NET is its
/// NPDC row sum; positive NET marks a transmitter.
pub fn export_network(npdc: &DMatrix<f64>, names: &[String], threshold: f64) -> Result<Network> {
    let k = npdc.nrows();
    if npdc.ncols() != k || names.len() != k {
        return Err(Error::InvalidInput(format!(
            "NPDC is {}×{} with {} names",
            npdc.nrows(),
            npdc.ncols(),
            names.len()
        )));
    }
    let nodes = (0..k)
        .map(|i| {
            let net: f64 = npdc.row(i).sum();
            Node {
                name: names[i].clone(),
                net,
                role: if net > 0.0 { Role::Transmitter } else { Role::Receiver },
            }
        })
        .collect();
    let mut edges = Vec::new();
    for i in 0..k {
        for j in 0..k {
            if i != j && npdc[(i, j)] > threshold {
                edges.push(Edge {
                    from: i,
                    to: j,
                    weight: npdc[(i, j)],
                });
            }
        }
    }
    Ok(Network {
        nodes,
        edges,
        threshold,
    })
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

impl Network {
    pub fn to_dot(&self, fmt: impl Fn(f64) -> String) -> String {
        let mut out = String::from("digraph spillover {\n");
        let _ = writeln!(out, "  // edges with NPDC > {}", fmt(self.threshold));
        for n in &self.nodes {
            let color = match n.role {
                Role::Transmitter => "salmon",
                Role::Receiver => "lightblue",
            };
            let _ = writeln!(
                out,
                "  \"{}\" [role=\"{}\", net=\"{}\", style=filled, fillcolor={}];",
                n.name.replace('"', "\\\""),
                n.role.as_str(),
                fmt(n.net),
                color
            );
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [weight=\"{}\", label=\"{}\"];",
                self.nodes[e.from].name.replace('"', "\\\""),
                self.nodes[e.to].name.replace('"', "\\\""),
                fmt(e.weight),
                fmt(e.weight)
            );
        }
        out.push_str("}\n");
        out
    }

    pub fn to_graphml(&self, fmt: impl Fn(f64) -> String) -> String {
        let mut out = String::from(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
             <graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n\
             \x20 <key id=\"role\" for=\"node\" attr.name=\"role\" attr.type=\"string\"/>\n\
             \x20 <key id=\"net\" for=\"node\" attr.name=\"net\" attr.type=\"double\"/>\n\
             \x20 <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n\
             \x20 <graph id=\"spillover\" edgedefault=\"directed\">\n",
        );
        for (i, n) in self.nodes.iter().enumerate() {
            let _ = writeln!(
                out,
                "    <node id=\"n{i}\"><data key=\"role\">{}</data><data key=\"net\">{}</data><desc>{}</desc></node>",
                n.role.as_str(),
                fmt(n.net),
                xml_escape(&n.name)
            );
        }
        for (id, e) in self.edges.iter().enumerate() {
            let _ = writeln!(
                out,
                "    <edge id=\"e{id}\" source=\"n{}\" target=\"n{}\"><data key=\"weight\">{}</data></edge>",
                e.from,
                e.to,
                fmt(e.weight)
            );
        }
        out.push_str("  </graph>\n</graphml>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(k: usize) -> Vec<String> {
        (1..=k).map(|i| format!("A{i}")).collect()
    }

    fn antisym(k: usize, f: impl Fn(usize, usize) -> f64) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in (i + 1)..k {
                m[(i, j)] = f(i, j);
                m[(j, i)] = -f(i, j);
            }
        }
        m
    }

    #[test]
    fn below_threshold_is_edgeless() {
        let m = antisym(3, |i, j| 0.01 * (i + j) as f64);
        let n = export_network(&m, &names(3), 0.05).unwrap();
        assert!(n.edges.is_empty());
        assert_eq!(n.nodes[0].role, Role::Transmitter);
        assert_eq!(n.nodes[2].role, Role::Receiver);
    }

    #[test]
    fn single_edge_rule() {
        let mut m = DMatrix::zeros(3, 3);
        m[(0, 1)] = 0.10;
        m[(1, 0)] = -0.10;
        let n = export_network(&m, &names(3), 0.05).unwrap();
        assert_eq!(n.edges, vec![Edge { from: 0, to: 1, weight: 0.10 }]);
        let dot = n.to_dot(|v| format!("{v}"));
        assert!(dot.contains("\"A1\" -> \"A2\" [weight=\"0.1\""));
        let gml = n.to_graphml(|v| format!("{v}"));
        assert!(gml.contains("source=\"n0\" target=\"n1\""));
    }

    #[test]
    fn zero_threshold_one_edge_per_pair() {
        let m = antisym(5, |i, j| if (i + j) % 2 == 0 { 1.0 + i as f64 } else { -2.0 - j as f64 });
        let n = export_network(&m, &names(5), 0.0).unwrap();
        assert_eq!(n.edges.len(), 10);
    }
}
