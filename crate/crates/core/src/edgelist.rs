//! Plain-text edge lists.
//!
//! ```text
//! # vertices 4
//! 0 1 1.0
//! 0 2 1.5
//! ```
//!
//! One edge per line as `u v length`, vertices 0-indexed. The `# vertices V`
//! header is mandatory; any other line starting with `#` is a comment.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{Graph, MetricGraph};

pub fn parse(text: &str) -> Result<MetricGraph> {
    let mut vertices: Option<usize> = None;
    let mut edges = Vec::new();
    let mut lengths = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let mut words = rest.split_whitespace();
            if words.next() == Some("vertices") {
                let v = words
                    .next()
                    .and_then(|w| w.parse::<usize>().ok())
                    .filter(|_| words.next().is_none())
                    .ok_or_else(|| Error::Parse {
                        line: line_no,
                        msg: "expected `# vertices V`".into(),
                    })?;
                if vertices.replace(v).is_some() {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: "duplicate vertices header".into(),
                    });
                }
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected `u v length`, got {} fields", fields.len()),
            });
        }
        let bad = |what: &str| Error::Parse {
            line: line_no,
            msg: format!("cannot parse {what}"),
        };
        let u: usize = fields[0].parse().map_err(|_| bad("vertex u"))?;
        let v: usize = fields[1].parse().map_err(|_| bad("vertex v"))?;
        let l: f64 = fields[2].parse().map_err(|_| bad("length"))?;
        edges.push((u, v));
        lengths.push(l);
    }
    let v = vertices.ok_or(Error::Parse {
        line: 0,
        msg: "missing `# vertices V` header".into(),
    })?;
    MetricGraph::with_lengths(Graph::new(v, edges)?, lengths)
}

pub fn read_file(path: &Path) -> Result<MetricGraph> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse(&text)
}

pub fn render(mg: &MetricGraph) -> String {
    let g = mg.graph();
    let mut out = format!("# vertices {}\n", g.num_vertices());
    for (&(u, v), l) in g.edges().iter().zip(mg.lengths()) {
        writeln!(out, "{u} {v} {l:?}").unwrap();
    }
    out
}
