//! JSON file formats: graphs, patterns and sandpile height maps.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use ustfield_core::dpp::Pattern;
use ustfield_core::graph::{Edge, GraphError, Vertex, WeightedGraph};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexJson {
    pub id: usize,
    pub pos: Vec<f64>,
    #[serde(default)]
    pub boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub id: usize,
    pub u: usize,
    pub v: usize,
    pub c: f64,
}

/// `{"dim", "vertices": [{"id", "pos", "boundary"}], "edges": [{"id", "u",
/// "v", "c"}], "rotation": {vertex id: [edge ids ccw]}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub dim: usize,
    pub vertices: Vec<VertexJson>,
    pub edges: Vec<EdgeJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<BTreeMap<usize, Vec<usize>>>,
}

impl GraphJson {
    pub fn from_graph(g: &WeightedGraph) -> GraphJson {
        GraphJson {
            dim: g.dim(),
            vertices: g
                .vertices()
                .iter()
                .enumerate()
                .map(|(id, v)| VertexJson { id, pos: v.pos.clone(), boundary: v.boundary })
                .collect(),
            edges: g.edges().iter().enumerate().map(|(id, e)| EdgeJson { id, u: e.u, v: e.v, c: e.c }).collect(),
            rotation: g.rotation().map(|r| r.iter().cloned().enumerate().collect()),
        }
    }

    /// Checks every invariant and reports the first violation. Ids must be
    /// `0..n` in order, since every matrix in the core is indexed by them.
    pub fn to_graph(&self) -> Result<WeightedGraph, FormatError> {
        if let Some((i, v)) = self.vertices.iter().enumerate().find(|(i, v)| v.id != *i) {
            return Err(FormatError::Ids { kind: "vertex", pos: i, id: v.id });
        }
        if let Some((i, e)) = self.edges.iter().enumerate().find(|(i, e)| e.id != *i) {
            return Err(FormatError::Ids { kind: "edge", pos: i, id: e.id });
        }
        let vertices = self.vertices.iter().map(|v| Vertex { pos: v.pos.clone(), boundary: v.boundary }).collect();
        let edges = self.edges.iter().map(|e| Edge { u: e.u, v: e.v, c: e.c }).collect();
        let g = WeightedGraph::new(self.dim, vertices, edges)?;
        match &self.rotation {
            None => Ok(g),
            Some(rot) => {
                let n = g.vertex_count();
                if let Some(&v) = rot.keys().find(|&&v| v >= n) {
                    return Err(FormatError::RotationVertex(v));
                }
                let table = (0..n).map(|v| rot.get(&v).cloned().unwrap_or_default()).collect();
                Ok(g.with_rotation(table)?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FormatError {
    #[error("{kind} at position {pos} has id {id}; ids must be 0, 1, 2, ... in order")]
    Ids { kind: &'static str, pos: usize, id: usize },
    #[error("rotation names missing vertex {0}")]
    RotationVertex(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub fn read_graph(path: &Path) -> Result<WeightedGraph, CliError> {
    let text = read_text(path)?;
    let json: GraphJson = serde_json::from_str(&text).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    json.to_graph().map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

pub fn graph_to_string(g: &WeightedGraph) -> String {
    serde_json::to_string_pretty(&GraphJson::from_graph(g)).expect("graph serialises")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternJson {
    #[serde(default)]
    pub present: Vec<usize>,
    #[serde(default)]
    pub absent: Vec<usize>,
}

pub fn read_pattern(path: &Path, g: &WeightedGraph) -> Result<Pattern, CliError> {
    let p: PatternJson = read_json(path)?;
    if let Some(&e) = p.present.iter().chain(&p.absent).find(|&&e| e >= g.edge_count()) {
        return Err(CliError::validation(format!("{}: edge {e} does not exist", path.display())));
    }
    Pattern::new(p.present, p.absent).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

/// Heights keyed by vertex id; missing interior vertices are zero and
/// boundary vertices must not appear.
pub type HeightMap = BTreeMap<usize, u32>;

pub fn read_heights(path: &Path, g: &WeightedGraph) -> Result<Vec<u32>, CliError> {
    let map: HeightMap = read_json(path)?;
    let mut h = vec![0; g.vertex_count()];
    for (&v, &x) in &map {
        if v >= g.vertex_count() {
            return Err(CliError::validation(format!("{}: vertex {v} does not exist", path.display())));
        }
        if g.is_boundary(v) {
            return Err(CliError::validation(format!("{}: vertex {v} is a boundary vertex", path.display())));
        }
        h[v] = x;
    }
    Ok(h)
}

pub fn height_map(g: &WeightedGraph, h: &[u32]) -> HeightMap {
    g.interior().into_iter().map(|v| (v, h[v])).collect()
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ustfield_core::builders::corpus;

    #[test]
    fn graph_json_preserves_structure() {
        for c in corpus() {
            let json = GraphJson::from_graph(&c.graph);
            let text = serde_json::to_string(&json).unwrap();
            let back: GraphJson = serde_json::from_str(&text).unwrap();
            assert_eq!(back, json);
            let g = back.to_graph().unwrap();
            assert_eq!(g.edge_count(), c.graph.edge_count());
            assert_eq!(g.rotation().is_some(), c.graph.rotation().is_some());
        }
    }

    #[test]
    fn loader_reports_first_violation() {
        let bad = r#"{"dim":1,"vertices":[{"id":0,"pos":[0]},{"id":1,"pos":[1]}],
            "edges":[{"id":0,"u":0,"v":1,"c":1},{"id":1,"u":1,"v":1,"c":1}]}"#;
        let g: GraphJson = serde_json::from_str(bad).unwrap();
        let err = g.to_graph().unwrap_err().to_string();
        assert!(err.contains("edge 1") && err.contains("self-loop"), "{err}");

        let bad = r#"{"dim":1,"vertices":[{"id":1,"pos":[0]}],"edges":[]}"#;
        let g: GraphJson = serde_json::from_str(bad).unwrap();
        assert!(g.to_graph().unwrap_err().to_string().contains("position 0"));
    }
}
