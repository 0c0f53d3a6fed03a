//! Line-oriented text format for graphs.
//!
//! ```text
//! d <dim> n <scale> model <name> seed <u64>
//! embedding lattice|continuum|none
//! param <key> <value>        (zero or more)
//! v <id> <coords...>          (one per vertex, ids 0..|V| in order)
//! e <id> <id>                 (one per edge, smaller id first)
//! ```
//!
//! Reals are written in Rust's shortest round-trip form, so
//! `read_graph(write_graph(g)) == g` holds exactly.

use std::io::{BufRead, Write};

use thiserror::Error;

use super::{Embedding, Graph, GraphError, Provenance};

#[derive(Debug, Error)]
pub enum ParseGraphError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid graph: {0}")]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn syntax(line: usize, message: impl Into<String>) -> ParseGraphError {
    ParseGraphError::Syntax { line, message: message.into() }
}

fn token_name(s: &str) -> &str {
    if s.is_empty() {
        "-"
    } else {
        s
    }
}

pub fn write_graph<W: Write>(g: &Graph, mut w: W) -> std::io::Result<()> {
    let p = g.provenance();
    let dim = g.embedding().map_or(0, Embedding::dim);
    assert!(
        !p.model.contains(char::is_whitespace),
        "model names must not contain whitespace"
    );
    writeln!(w, "d {dim} n {} model {} seed {}", p.n, token_name(&p.model), p.seed)?;
    let kind = match g.embedding() {
        None => "none",
        Some(Embedding::Lattice { .. }) => "lattice",
        Some(Embedding::Continuum { .. }) => "continuum",
    };
    writeln!(w, "embedding {kind}")?;
    for (k, v) in &p.params {
        writeln!(w, "param {k} {v}")?;
    }
    for v in 0..g.vertex_count() {
        write!(w, "v {v}")?;
        match g.embedding() {
            Some(Embedding::Lattice { dim, coords }) => {
                for c in &coords[v * dim..(v + 1) * dim] {
                    write!(w, " {c}")?;
                }
            }
            Some(Embedding::Continuum { dim, coords }) => {
                for c in &coords[v * dim..(v + 1) * dim] {
                    write!(w, " {c}")?;
                }
            }
            None => {}
        }
        writeln!(w)?;
    }
    for (a, b) in g.edges() {
        writeln!(w, "e {a} {b}")?;
    }
    Ok(())
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, ParseGraphError> {
    let tok = tok.ok_or_else(|| syntax(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| syntax(line, format!("bad {what} {tok:?}")))
}

pub fn read_graph<R: BufRead>(r: R) -> Result<Graph, ParseGraphError> {
    let mut lines = r.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (ln, header) = lines.next().ok_or_else(|| syntax(1, "empty input"))?;
    let header = header?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 8 || toks[0] != "d" || toks[2] != "n" || toks[4] != "model" || toks[6] != "seed" {
        return Err(syntax(ln, "expected `d <dim> n <scale> model <name> seed <u64>`"));
    }
    let dim: usize = parse_num(Some(toks[1]), ln, "dimension")?;
    let n: u64 = parse_num(Some(toks[3]), ln, "scale")?;
    let model = if toks[5] == "-" { String::new() } else { toks[5].to_string() };
    let seed: u64 = parse_num(Some(toks[7]), ln, "seed")?;

    let (ln, kind_line) = lines.next().ok_or_else(|| syntax(2, "missing embedding line"))?;
    let kind_line = kind_line?;
    let kind = match kind_line.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["embedding", k @ ("lattice" | "continuum" | "none")] => *k,
        _ => return Err(syntax(ln, "expected `embedding lattice|continuum|none`")),
    };
    if (kind == "none") != (dim == 0) {
        return Err(syntax(ln, "embedding kind disagrees with header dimension"));
    }

    let mut provenance = Provenance::new(model, n, seed);
    let mut int_coords = Vec::new();
    let mut real_coords = Vec::new();
    let mut vertex_count = 0usize;
    let mut edges = Vec::new();
    for (ln, line) in lines {
        let line = line?;
        let mut it = line.split_whitespace();
        match it.next() {
            None => continue,
            Some("param") => {
                if vertex_count > 0 || !edges.is_empty() {
                    return Err(syntax(ln, "param lines must precede vertices"));
                }
                let key = it.next().ok_or_else(|| syntax(ln, "missing param key"))?;
                let value: f64 = parse_num(it.next(), ln, "param value")?;
                provenance.params.push((key.to_string(), value));
            }
            Some("v") => {
                if !edges.is_empty() {
                    return Err(syntax(ln, "vertex after edges"));
                }
                let id: usize = parse_num(it.next(), ln, "vertex id")?;
                if id != vertex_count {
                    return Err(syntax(ln, format!("vertex ids must be dense and ordered, expected {vertex_count}")));
                }
                for axis in 0..dim {
                    let what = format!("coordinate {axis}");
                    match kind {
                        "lattice" => int_coords.push(parse_num::<i64>(it.next(), ln, &what)?),
                        _ => real_coords.push(parse_num::<f64>(it.next(), ln, &what)?),
                    }
                }
                if it.next().is_some() {
                    return Err(syntax(ln, "too many coordinates"));
                }
                vertex_count += 1;
            }
            Some("e") => {
                let a: usize = parse_num(it.next(), ln, "edge endpoint")?;
                let b: usize = parse_num(it.next(), ln, "edge endpoint")?;
                if it.next().is_some() {
                    return Err(syntax(ln, "trailing tokens after edge"));
                }
                edges.push((a, b));
            }
            Some(other) => return Err(syntax(ln, format!("unknown record {other:?}"))),
        }
    }
    let mut g = Graph::from_edges(vertex_count, edges)?;
    g = match kind {
        "lattice" => g.with_embedding(Embedding::Lattice { dim, coords: int_coords })?,
        "continuum" => g.with_embedding(Embedding::Continuum { dim, coords: real_coords })?,
        _ => g,
    };
    Ok(g.with_provenance(provenance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn round_trip(g: &Graph) -> Graph {
        let mut buf = Vec::new();
        write_graph(g, &mut buf).unwrap();
        read_graph(buf.as_slice()).unwrap()
    }

    #[test]
    fn lattice_graph_round_trips() {
        let g = crate::graph::lattice_box_graph(&crate::graph::BoxSpec::lattice(2, 2))
            .with_provenance(Provenance::new("bond", 2, 99).with_param("p", 0.6));
        assert_eq!(round_trip(&g), g);
    }

    #[test]
    fn header_is_exact() {
        let g = Graph::path(2).with_provenance(Provenance::new("gw", 4, 7));
        let mut buf = Vec::new();
        write_graph(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "d 0 n 4 model gw seed 7\nembedding none\nv 0\nv 1\ne 0 1\n");
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(read_graph("d 2 n 1 model x\n".as_bytes()).is_err());
        let bad = "d 0 n 1 model x seed 1\nembedding none\nv 1\n";
        assert!(matches!(read_graph(bad.as_bytes()), Err(ParseGraphError::Syntax { line: 3, .. })));
        let loop_edge = "d 0 n 1 model x seed 1\nembedding none\nv 0\ne 0 0\n";
        assert!(matches!(read_graph(loop_edge.as_bytes()), Err(ParseGraphError::Graph(_))));
    }

    proptest! {
        #[test]
        fn continuum_graph_round_trips(
            pts in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..40),
            seed in any::<u64>(),
        ) {
            let nv = pts.len();
            let edges: Vec<_> = (1..nv).map(|i| (i / 2, i)).collect();
            let coords = pts.iter().flat_map(|&(x, y)| [x, y]).collect();
            let g = Graph::from_edges(nv, edges).unwrap()
                .with_embedding(Embedding::Continuum { dim: 2, coords }).unwrap()
                .with_provenance(Provenance::new("rgg", 3, seed).with_param("R", 1.25));
            prop_assert_eq!(round_trip(&g), g);
        }
    }
}
