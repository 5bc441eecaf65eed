//! Graph files.
//!
//! JSON: `{"params": {"alpha", "nu", "n", "R"}, "vertices": [[id, r, theta], ...],
//! "edges": [[u, v], ...]}`. CSV: a directory with `vertices.csv` (`id,r,theta`)
//! and `edges.csv` (`u,v`), plus `params.json`. Floats are written with 17
//! significant digits, which reads back to the same bits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::{ModelParams, PolarPoint};
use crate::graph::Graph;
use crate::hrg::HrgGraph;

/// A float with 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

#[derive(Deserialize)]
struct ParamsDoc {
    alpha: f64,
    nu: f64,
    n: f64,
}

#[derive(Deserialize)]
struct GraphDoc {
    params: ParamsDoc,
    vertices: Vec<(usize, f64, f64)>,
    edges: Vec<(usize, usize)>,
}

fn params_json(p: &ModelParams) -> String {
    format!(
        "{{\"alpha\": {}, \"nu\": {}, \"n\": {}, \"R\": {}}}",
        fmt_f64(p.alpha()),
        fmt_f64(p.nu()),
        fmt_f64(p.n()),
        fmt_f64(p.radius())
    )
}

pub fn graph_to_json(g: &HrgGraph) -> String {
    let mut s = String::new();
    let _ = write!(s, "{{\n  \"params\": {},\n  \"vertices\": [", params_json(g.params()));
    for (i, p) in g.points().iter().enumerate() {
        let sep = if i == 0 { "\n    " } else { ",\n    " };
        let _ = write!(s, "{sep}[{i}, {}, {}]", fmt_f64(p.r()), fmt_f64(p.theta()));
    }
    s.push_str("\n  ],\n  \"edges\": [");
    for (i, (u, v)) in g.graph().edges().enumerate() {
        let sep = if i == 0 { "\n    " } else { ",\n    " };
        let _ = write!(s, "{sep}[{u}, {v}]");
    }
    s.push_str("\n  ]\n}\n");
    s
}

fn assemble(params: ModelParams, mut vertices: Vec<(usize, f64, f64)>, edges: &[(usize, usize)]) -> Result<HrgGraph> {
    vertices.sort_by_key(|v| v.0);
    if vertices.iter().enumerate().any(|(i, v)| v.0 != i) {
        return Err(Error::Parse("vertex ids must be 0..n without gaps".into()));
    }
    let points = vertices.iter().map(|&(_, r, t)| PolarPoint::try_new(r, t)).collect::<Result<Vec<_>>>()?;
    let graph = Graph::from_edges(points.len(), edges)?;
    HrgGraph::from_parts(params, points, graph)
}

pub fn graph_from_json(text: &str) -> Result<HrgGraph> {
    let doc: GraphDoc = serde_json::from_str(text)?;
    let params = ModelParams::new(doc.params.alpha, doc.params.nu, doc.params.n)?;
    assemble(params, doc.vertices, &doc.edges)
}

pub fn write_graph_json(g: &HrgGraph, path: &Path) -> Result<()> {
    fs::write(path, graph_to_json(g))?;
    Ok(())
}

pub fn read_graph_json(path: &Path) -> Result<HrgGraph> {
    graph_from_json(&fs::read_to_string(path)?)
}

/// Writes `params.json`, `vertices.csv` and `edges.csv` into `dir`.
pub fn write_graph_csv(g: &HrgGraph, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("params.json"), params_json(g.params()) + "\n")?;
    let mut w = csv::Writer::from_path(dir.join("vertices.csv"))?;
    w.write_record(["id", "r", "theta"])?;
    for (i, p) in g.points().iter().enumerate() {
        w.write_record([i.to_string(), fmt_f64(p.r()), fmt_f64(p.theta())])?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(dir.join("edges.csv"))?;
    w.write_record(["u", "v"])?;
    for (u, v) in g.graph().edges() {
        w.write_record([u.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_graph_csv(dir: &Path) -> Result<HrgGraph> {
    let doc: ParamsDoc = serde_json::from_str(&fs::read_to_string(dir.join("params.json"))?)?;
    let params = ModelParams::new(doc.alpha, doc.nu, doc.n)?;
    let mut rd = csv::Reader::from_path(dir.join("vertices.csv"))?;
    let vertices = rd.deserialize().collect::<std::result::Result<Vec<(usize, f64, f64)>, _>>()?;
    let mut rd = csv::Reader::from_path(dir.join("edges.csv"))?;
    let edges = rd.deserialize().collect::<std::result::Result<Vec<(usize, usize)>, _>>()?;
    assemble(params, vertices, &edges)
}

/// Reads a graph from a `.json` file or a CSV directory.
pub fn read_graph(path: &Path) -> Result<HrgGraph> {
    if path.is_dir() {
        read_graph_csv(path)
    } else {
        read_graph_json(path)
    }
}
