//! Line-oriented graph file format.
//!
//! ```text
//! # comment
//! node <id> <address> <port> <domain> <as> <files> <kbytes>
//! edge <id1> <id2>
//! ```
//!
//! Edges must come after the node lines they reference.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use super::{EdgeInsert, GraphError, NodeId, NodeInfo, OverlayGraph};

pub fn parse_graph(text: &str) -> Result<OverlayGraph, GraphError> {
    let mut g = OverlayGraph::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |message: String| GraphError::Parse { line: line_no, message };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "node" => {
                if fields.len() != 8 {
                    return Err(err(format!("node record needs 7 fields, found {}", fields.len() - 1)));
                }
                let id = parse_num::<usize>(fields[1], "id").map_err(err)?;
                let info = NodeInfo {
                    address: fields[2].to_string(),
                    port: parse_num(fields[3], "port").map_err(err)?,
                    domain: fields[4].to_string(),
                    as_label: fields[5].to_string(),
                    files_shared: parse_num(fields[6], "files").map_err(err)?,
                    kbytes_shared: parse_num(fields[7], "kbytes").map_err(err)?,
                };
                g.insert_node(NodeId(id), info).map_err(|e| err(e.to_string()))?;
            }
            "edge" => {
                if fields.len() != 3 {
                    return Err(err(format!("edge record needs 2 fields, found {}", fields.len() - 1)));
                }
                let a = NodeId(parse_num(fields[1], "id1").map_err(err)?);
                let b = NodeId(parse_num(fields[2], "id2").map_err(err)?);
                for end in [a, b] {
                    if !g.contains(end) {
                        return Err(err(format!("edge references undeclared node {end}")));
                    }
                }
                match g.add_edge(a, b).map_err(|e| err(e.to_string()))? {
                    EdgeInsert::Added => {}
                    EdgeInsert::Duplicate => return Err(err(format!("duplicate edge {a} {b}"))),
                }
            }
            other => return Err(err(format!("unknown record type `{other}`"))),
        }
    }
    Ok(g)
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T, String> {
    s.parse().map_err(|_| format!("invalid {what} `{s}`"))
}

pub fn write_graph<W: Write>(graph: &OverlayGraph, out: W) -> io::Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "# gnutellab graph: {} nodes, {} edges", graph.node_count(), graph.edge_count())?;
    for (id, n) in graph.nodes() {
        writeln!(
            w,
            "node {} {} {} {} {} {} {}",
            id, n.address, n.port, n.domain, n.as_label, n.files_shared, n.kbytes_shared
        )?;
    }
    for (a, b) in graph.edges() {
        writeln!(w, "edge {a} {b}")?;
    }
    w.flush()
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<OverlayGraph, GraphError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| GraphError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_graph(&text)
}

pub fn save_graph(graph: &OverlayGraph, path: impl AsRef<Path>) -> Result<(), GraphError> {
    let path = path.as_ref();
    let io_err = |e: io::Error| GraphError::Io { path: path.display().to_string(), message: e.to_string() };
    let file = fs::File::create(path).map_err(io_err)?;
    write_graph(graph, file).map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_round_trip() {
        let mut g = OverlayGraph::new();
        for i in 0..3 {
            let mut info = NodeInfo::synthetic(i);
            info.domain = "cs.uchicago.edu".into();
            info.as_label = "AS160".into();
            info.files_shared = 10 * i as u64;
            info.kbytes_shared = 4_096 * i as u64;
            g.add_node(info);
        }
        g.add_edge(NodeId(0), NodeId(1)).unwrap();
        g.add_edge(NodeId(1), NodeId(2)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.graph");
        save_graph(&g, &path).unwrap();
        assert_eq!(load_graph(&path).unwrap(), g);
    }

    #[test]
    fn dangling_edge_names_the_line() {
        let text = "# header\nnode 0 1.2.3.4 6346 a.com AS1 0 0\nedge 0 1\n";
        match parse_graph(text) {
            Err(GraphError::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("undeclared node 1"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_records() {
        assert!(matches!(parse_graph("node 0 x 1 d a 0\n"), Err(GraphError::Parse { line: 1, .. })));
        assert!(matches!(parse_graph("node 0 x port d a 0 0\n"), Err(GraphError::Parse { line: 1, .. })));
        assert!(matches!(parse_graph("vertex 1\n"), Err(GraphError::Parse { line: 1, .. })));
        let dup = "node 0 a 1 d x 0 0\nnode 1 b 1 d x 0 0\nedge 0 1\nedge 1 0\n";
        assert!(matches!(parse_graph(dup), Err(GraphError::Parse { line: 4, .. })));
        let self_loop = "node 0 a 1 d x 0 0\nedge 0 0\n";
        assert!(matches!(parse_graph(self_loop), Err(GraphError::Parse { line: 2, .. })));
    }

    #[test]
    fn comments_and_sparse_ids() {
        let text = "node 7 a 1 d x 0 0 # trailing\n\nnode 3 b 2 d x 1 2\nedge 3 7\n";
        let g = parse_graph(text).unwrap();
        assert_eq!(g.node_count(), 2);
        assert!(g.has_edge(NodeId(7), NodeId(3)));
    }
}
