//! Plain-text graph and code files.
//!
//! Graph file:
//!
//! ```text
//! # comment lines and blank lines are ignored anywhere
//! n m k
//! u v              (exactly m edge lines, 1-based vertices)
//! c v color        (optional coloring block, 1-based vertex and color,
//!                   color 0 = unassigned; unlisted vertices are unassigned)
//! ```
//!
//! Code file:
//!
//! ```text
//! n r s t
//! i_1 i_2 ... i_t  (exactly r check lines, 1-based variables)
//! ```

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{Color, Coloring, Graph};
use crate::ldpc::LdpcCode;

/// Parsed contents of a graph file.
#[derive(Clone, Debug)]
pub struct GraphFile {
    pub graph: Graph,
    pub k: usize,
    pub coloring: Option<Coloring>,
}

fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        msg: msg.into(),
    })
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.trim();
        if l.is_empty() || l.starts_with('#') {
            None
        } else {
            Some((i + 1, l.split_whitespace().collect()))
        }
    })
}

fn numbers(line: usize, fields: &[&str]) -> Result<Vec<usize>> {
    fields
        .iter()
        .map(|f| {
            f.parse::<usize>()
                .or_else(|_| parse_err(line, format!("expected a non-negative integer, got {f:?}")))
        })
        .collect()
}

pub fn write_graph(g: &Graph, k: usize, coloring: Option<&Coloring>) -> String {
    let mut out = String::new();
    writeln!(out, "{} {} {}", g.n(), g.m(), k).unwrap();
    for (u, v) in g.edges() {
        writeln!(out, "{} {}", u + 1, v + 1).unwrap();
    }
    if let Some(phi) = coloring {
        for v in 0..phi.len() {
            let c = phi.get(v).map_or(0, |c| c as usize + 1);
            writeln!(out, "c {} {}", v + 1, c).unwrap();
        }
    }
    out
}

pub fn parse_graph(text: &str) -> Result<GraphFile> {
    let mut lines = content_lines(text);
    let Some((hl, header)) = lines.next() else {
        return parse_err(1, "missing header line \"n m k\"");
    };
    let h = numbers(hl, &header)?;
    let [n, m, k] = h[..] else {
        return parse_err(hl, "header must be \"n m k\"");
    };
    if !(1..=Color::MAX as usize + 1).contains(&k) {
        return parse_err(hl, format!("k = {k} outside 1..=256"));
    }

    let mut edges = Vec::with_capacity(m);
    let mut colors: Option<Vec<Option<Color>>> = None;
    for (ln, fields) in lines {
        if fields[0] == "c" {
            let nums = numbers(ln, &fields[1..])?;
            let [v, c] = nums[..] else {
                return parse_err(ln, "coloring line must be \"c v color\"");
            };
            if v == 0 || v > n {
                return parse_err(ln, format!("vertex {v} outside 1..={n}"));
            }
            if c > k {
                return parse_err(ln, format!("color {c} outside 0..={k}"));
            }
            let colors = colors.get_or_insert_with(|| vec![None; n]);
            colors[v - 1] = if c == 0 { None } else { Some((c - 1) as Color) };
        } else {
            if colors.is_some() {
                return parse_err(ln, "edge line after the coloring block");
            }
            let nums = numbers(ln, &fields)?;
            let [u, v] = nums[..] else {
                return parse_err(ln, "edge line must be \"u v\"");
            };
            if u == 0 || v == 0 || u > n || v > n {
                return parse_err(ln, format!("edge ({u}, {v}) outside 1..={n}"));
            }
            edges.push((u - 1, v - 1));
        }
    }
    if edges.len() != m {
        return parse_err(
            hl,
            format!("header promises {m} edges, found {}", edges.len()),
        );
    }
    let graph = Graph::from_edges(n, &edges)?;
    let coloring = colors.map(|c| Coloring::new(k, c)).transpose()?;
    Ok(GraphFile { graph, k, coloring })
}

pub fn write_code(code: &LdpcCode) -> String {
    let mut out = String::new();
    writeln!(out, "{} {} {} {}", code.n(), code.r(), code.s(), code.t()).unwrap();
    for vars in code.checks() {
        let line: Vec<String> = vars.iter().map(|i| (i + 1).to_string()).collect();
        writeln!(out, "{}", line.join(" ")).unwrap();
    }
    out
}

pub fn parse_code(text: &str) -> Result<LdpcCode> {
    let mut lines = content_lines(text);
    let Some((hl, header)) = lines.next() else {
        return parse_err(1, "missing header line \"n r s t\"");
    };
    let h = numbers(hl, &header)?;
    let [n, r, s, t] = h[..] else {
        return parse_err(hl, "header must be \"n r s t\"");
    };
    let mut checks = Vec::with_capacity(r);
    for (ln, fields) in lines {
        let vars = numbers(ln, &fields)?;
        if vars.iter().any(|&i| i == 0 || i > n) {
            return parse_err(ln, format!("variable outside 1..={n}"));
        }
        checks.push(vars.into_iter().map(|i| i - 1).collect::<Vec<_>>());
    }
    if checks.len() != r {
        return parse_err(
            hl,
            format!("header promises {r} checks, found {}", checks.len()),
        );
    }
    let code = LdpcCode::from_checks(n, checks)?;
    if code.s() != s || code.t() != t {
        return parse_err(
            hl,
            format!(
                "header says (s,t) = ({s},{t}), checks give ({},{})",
                code.s(),
                code.t()
            ),
        );
    }
    Ok(code)
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
