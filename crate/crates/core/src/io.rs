//! Text formats.
//!
//! Edge lists: a header line `n m`, then `m` lines `u v` with `u < v`
//! (0-based). Facet lists: one face per line as space-separated vertex ids;
//! the reader closes the list downward. Both accept `#` comments and blank
//! lines.

use std::fmt::Write as _;
use std::path::Path;

use crate::complex::{Face, SimplicialComplex};
use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("").trim();
        (!body.is_empty()).then_some((i + 1, body))
    })
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("expected a non-negative integer, found {tok:?}"),
    })
}

pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing `n m` header".into(),
    })?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 2 {
        return Err(Error::Parse {
            line: hline,
            msg: "header must be `n m`".into(),
        });
    }
    let n: usize = parse_num(head[0], hline)?;
    let m: usize = parse_num(head[1], hline)?;
    let mut edges = Vec::with_capacity(m);
    for (line, body) in lines {
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(Error::Parse {
                line,
                msg: "edge line must be `u v`".into(),
            });
        }
        let u: Vertex = parse_num(toks[0], line)?;
        let v: Vertex = parse_num(toks[1], line)?;
        if u >= v {
            return Err(Error::Parse {
                line,
                msg: format!("edge endpoints must satisfy u < v, found {u} {v}"),
            });
        }
        if v as usize >= n {
            return Err(Error::Parse {
                line,
                msg: format!("vertex {v} out of range for n = {n}"),
            });
        }
        edges.push((u, v));
    }
    if edges.len() != m {
        return Err(Error::Parse {
            line: hline,
            msg: format!("header announces {m} edges, found {}", edges.len()),
        });
    }
    let g = Graph::from_edges(n, &edges)?;
    if g.edge_count() != m {
        return Err(Error::Invalid("edge list contains repeated edges".into()));
    }
    Ok(g)
}

/// Writes `g` with edges in colex order.
pub fn write_edge_list(g: &Graph) -> String {
    let edges = g.edges();
    let mut out = format!("{} {}\n", g.n(), edges.len());
    for (u, v) in edges {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn parse_facets(text: &str) -> Result<SimplicialComplex> {
    let mut facets = Vec::new();
    for (line, body) in content_lines(text) {
        let verts = body
            .split_whitespace()
            .map(|t| parse_num::<Vertex>(t, line))
            .collect::<Result<Vec<_>>>()?;
        if verts.len() > 24 {
            return Err(Error::Parse {
                line,
                msg: "facets with more than 24 vertices are not supported".into(),
            });
        }
        facets.push(Face::new(verts).map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?);
    }
    Ok(SimplicialComplex::from_facets(&facets))
}

pub fn write_facets(x: &SimplicialComplex) -> String {
    let mut out = String::new();
    x.write_facets(&mut out).expect("writing to a String cannot fail");
    out
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_string(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_roundtrip() {
        let g = Graph::cycle(5);
        let text = write_edge_list(&g);
        assert_eq!(text, "5 5\n0 1\n1 2\n2 3\n0 4\n3 4\n");
        assert_eq!(parse_edge_list(&text).unwrap(), g);
    }

    #[test]
    fn edge_list_comments_and_errors() {
        let g = parse_edge_list("# triangle\n3 3\n0 1 # first\n\n0 2\n1 2\n").unwrap();
        assert_eq!(g, Graph::complete(3));
        assert!(parse_edge_list("").is_err());
        assert!(parse_edge_list("3 2\n0 1\n").is_err());
        assert!(parse_edge_list("3 1\n1 0\n").is_err());
        assert!(parse_edge_list("3 1\n0 3\n").is_err());
        assert!(parse_edge_list("3 1\n0 x\n").is_err());
        assert!(parse_edge_list("3 2\n0 1\n0 1\n").is_err());
        match parse_edge_list("2 1\n0 0\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn facets_close_downward() {
        let x = parse_facets("0 1 2\n# comment\n3 2\n").unwrap();
        assert_eq!(x.f_vector().0, vec![4, 4, 1]);
        assert!(x.contains(&[1, 2]));
        assert!(x.contains(&[2, 3]));
        assert!(parse_facets("0 0 1\n").is_err());
        assert_eq!(write_facets(&x), "2 3\n0 1 2\n");
    }
}
