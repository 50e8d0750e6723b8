//! Triangle-style plain-text mesh files.
//!
//! A mesh `name` is stored as `name.node` and `name.ele`. The `.node` file
//! starts with `<n_vertices> 2 0 1` followed by `<index> <x> <y> <marker>`
//! lines; the `.ele` file starts with `<n_triangles> 3 0` followed by
//! `<index> <v0> <v1> <v2>` lines. Indices are 1-based on disk.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::TriMesh;
use crate::error::{Error, Result};

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

struct LineParser<'a> {
    path: &'a Path,
    /// (1-based line number, whitespace-split fields)
    lines: Vec<(usize, Vec<&'a str>)>,
    cursor: usize,
}

impl<'a> LineParser<'a> {
    fn new(path: &'a Path, text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            // Triangle files allow comment lines starting with '#'
            .filter(|(_, l)| {
                let t = l.trim_start();
                !t.is_empty() && !t.starts_with('#')
            })
            .map(|(i, l)| (i, l.split_whitespace().collect()))
            .collect();
        LineParser {
            path,
            lines,
            cursor: 0,
        }
    }

    fn error(&self, line: usize, message: String) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line,
            message,
        }
    }

    fn next_line(&mut self, expect: &str) -> Result<(usize, &[&'a str])> {
        match self.lines.get(self.cursor) {
            Some((num, fields)) => {
                self.cursor += 1;
                Ok((*num, fields))
            }
            None => Err(self.error(
                self.lines.last().map(|(n, _)| *n).unwrap_or(0) + 1,
                format!("unexpected end of file, expected {expect}"),
            )),
        }
    }

    fn remaining(&self) -> Option<usize> {
        self.lines.get(self.cursor).map(|(n, _)| *n)
    }
}

fn parse_field<T: std::str::FromStr>(
    parser: &LineParser,
    line: usize,
    fields: &[&str],
    pos: usize,
    what: &str,
) -> Result<T> {
    let raw = fields
        .get(pos)
        .ok_or_else(|| parser.error(line, format!("missing {what} in column {}", pos + 1)))?;
    raw.parse()
        .map_err(|_| parser.error(line, format!("cannot parse {what} from '{raw}'")))
}

fn parse_node_file(path: &Path, text: &str) -> Result<Vec<[f64; 2]>> {
    let mut parser = LineParser::new(path, text);
    let (hline, hfields) = parser.next_line("node header")?;
    let hfields = hfields.to_vec();
    let n_vertices: usize = parse_field(&parser, hline, &hfields, 0, "vertex count")?;
    let dim: usize = parse_field(&parser, hline, &hfields, 1, "dimension")?;
    if dim != 2 {
        return Err(parser.error(hline, format!("expected dimension 2, got {dim}")));
    }
    let mut vertices = vec![None; n_vertices];
    for _ in 0..n_vertices {
        let (line, fields) = parser.next_line("a vertex line")?;
        let fields = fields.to_vec();
        let index: usize = parse_field(&parser, line, &fields, 0, "vertex index")?;
        if index == 0 || index > n_vertices {
            return Err(parser.error(
                line,
                format!("vertex index {index} out of range 1..={n_vertices}"),
            ));
        }
        let x: f64 = parse_field(&parser, line, &fields, 1, "x coordinate")?;
        let y: f64 = parse_field(&parser, line, &fields, 2, "y coordinate")?;
        vertices[index - 1] = Some([x, y]);
    }
    if let Some(line) = parser.remaining() {
        return Err(parser.error(
            line,
            format!("trailing data after {n_vertices} declared vertices"),
        ));
    }
    vertices
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            v.ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: format!("vertex {} never defined", i + 1),
            })
        })
        .collect()
}

fn parse_ele_file(path: &Path, text: &str, n_vertices: usize) -> Result<Vec<[usize; 3]>> {
    let mut parser = LineParser::new(path, text);
    let (hline, hfields) = parser.next_line("element header")?;
    let hfields = hfields.to_vec();
    let n_triangles: usize = parse_field(&parser, hline, &hfields, 0, "triangle count")?;
    let nodes_per: usize = parse_field(&parser, hline, &hfields, 1, "nodes per triangle")?;
    if nodes_per != 3 {
        return Err(parser.error(hline, format!("expected 3 nodes per triangle, got {nodes_per}")));
    }
    let mut triangles = vec![None; n_triangles];
    for _ in 0..n_triangles {
        let (line, fields) = parser.next_line("a triangle line")?;
        let fields = fields.to_vec();
        let index: usize = parse_field(&parser, line, &fields, 0, "triangle index")?;
        if index == 0 || index > n_triangles {
            return Err(parser.error(
                line,
                format!("triangle index {index} out of range 1..={n_triangles}"),
            ));
        }
        let mut tri = [0usize; 3];
        for (k, slot) in tri.iter_mut().enumerate() {
            let v: usize = parse_field(&parser, line, &fields, 1 + k, "vertex index")?;
            if v == 0 || v > n_vertices {
                return Err(parser.error(
                    line,
                    format!("vertex index {v} out of range 1..={n_vertices}"),
                ));
            }
            *slot = v - 1;
        }
        triangles[index - 1] = Some(tri);
    }
    if let Some(line) = parser.remaining() {
        return Err(parser.error(
            line,
            format!("trailing data after {n_triangles} declared triangles"),
        ));
    }
    triangles
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            t.ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: format!("triangle {} never defined", i + 1),
            })
        })
        .collect()
}

/// Loads `<stem>.node` and `<stem>.ele`. Boundary edges are recovered from
/// the triangle topology.
pub fn load_mesh<P: AsRef<Path>>(stem: P) -> Result<TriMesh> {
    let stem = stem.as_ref();
    let node_path = stem.with_extension("node");
    let ele_path = stem.with_extension("ele");
    let vertices = parse_node_file(&node_path, &read_to_string(&node_path)?)?;
    let triangles = parse_ele_file(&ele_path, &read_to_string(&ele_path)?, vertices.len())?;
    TriMesh::from_connectivity(vertices, triangles, 0)
}

/// Writes `<stem>.node` and `<stem>.ele`. Vertex boundary markers are 1 for
/// vertices on a boundary edge and 0 otherwise.
pub fn save_mesh<P: AsRef<Path>>(mesh: &TriMesh, stem: P) -> Result<()> {
    let stem: PathBuf = stem.as_ref().to_path_buf();
    let mut on_boundary = vec![false; mesh.n_vertices()];
    for e in &mesh.boundary_edges {
        on_boundary[e[0]] = true;
        on_boundary[e[1]] = true;
    }

    let mut node = String::new();
    let _ = writeln!(node, "{} 2 0 1", mesh.n_vertices());
    for (i, v) in mesh.vertices.iter().enumerate() {
        let marker = if on_boundary[i] { 1 } else { 0 };
        let _ = writeln!(node, "{} {:.17} {:.17} {}", i + 1, v[0], v[1], marker);
    }
    write_file(&stem.with_extension("node"), &node)?;

    let mut ele = String::new();
    let _ = writeln!(ele, "{} 3 0", mesh.n_triangles());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let _ = writeln!(ele, "{} {} {} {}", t + 1, tri[0] + 1, tri[1] + 1, tri[2] + 1);
    }
    write_file(&stem.with_extension("ele"), &ele)?;
    Ok(())
}
