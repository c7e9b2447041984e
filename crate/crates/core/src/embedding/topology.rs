//! Physical qubit graphs.

use std::collections::BTreeSet;
use std::path::Path;

use super::EmbeddingError;

/// Simple undirected graph over qubits `0..num_qubits`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HardwareGraph {
    num_qubits: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    topology_tag: String,
}

impl HardwareGraph {
    /// Builds a graph from an edge list; orientation is normalized and
    /// duplicate edges are dropped. Returns the graph and the number of
    /// duplicates removed.
    pub fn with_duplicates(
        num_qubits: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        topology_tag: impl Into<String>,
    ) -> Result<(Self, usize), EmbeddingError> {
        let mut set = BTreeSet::new();
        let mut duplicates = 0;
        for (u, v) in edges {
            if u >= num_qubits || v >= num_qubits {
                return Err(EmbeddingError::InvalidQubit {
                    qubit: u.max(v),
                    num_qubits,
                });
            }
            if u == v {
                return Err(EmbeddingError::InvalidParameter(format!("self-loop at qubit {u}")));
            }
            if !set.insert((u.min(v), u.max(v))) {
                duplicates += 1;
            }
        }
        let edges: Vec<(usize, usize)> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); num_qubits];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for a in &mut adjacency {
            a.sort_unstable();
        }
        Ok((
            HardwareGraph {
                num_qubits,
                edges,
                adjacency,
                topology_tag: topology_tag.into(),
            },
            duplicates,
        ))
    }

    pub fn new(
        num_qubits: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        topology_tag: impl Into<String>,
    ) -> Result<Self, EmbeddingError> {
        let (g, duplicates) = Self::with_duplicates(num_qubits, edges, topology_tag)?;
        if duplicates > 0 {
            log::warn!("hardware graph: dropped {duplicates} duplicate edge(s)");
        }
        Ok(g)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.adjacency[q]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn topology_tag(&self) -> &str {
        &self.topology_tag
    }

    /// Line 1 `num_qubits`, then `u v` per edge, `u < v`, ascending.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.num_qubits);
        for &(u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    /// Parses the text form; see [`HardwareGraph::with_duplicates`] for the
    /// second return value.
    pub fn parse(text: &str) -> Result<(Self, usize), EmbeddingError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line, first) = lines.next().ok_or(EmbeddingError::Parse {
            line: 1,
            message: "missing qubit count".into(),
        })?;
        let num_qubits: usize = first.parse().map_err(|_| EmbeddingError::Parse {
            line,
            message: format!("bad qubit count `{first}`"),
        })?;
        let mut edges = Vec::new();
        for (line, body) in lines {
            let f: Vec<&str> = body.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<usize>().map_err(|_| EmbeddingError::Parse {
                    line,
                    message: format!("bad qubit id `{s}`"),
                })
            };
            if f.len() != 2 {
                return Err(EmbeddingError::Parse {
                    line,
                    message: "edge line needs `u v`".into(),
                });
            }
            let (u, v) = (parse(f[0])?, parse(f[1])?);
            if u >= num_qubits || v >= num_qubits {
                return Err(EmbeddingError::Parse {
                    line,
                    message: format!("qubit id out of range (num_qubits = {num_qubits})"),
                });
            }
            edges.push((u, v));
        }
        let (g, duplicates) = Self::with_duplicates(num_qubits, edges, "imported")?;
        if duplicates > 0 {
            log::warn!("hardware graph: dropped {duplicates} duplicate edge(s)");
        }
        Ok((g, duplicates))
    }
}

/// Chimera `C(m, n, t)`: an `m × n` grid of `K_{t,t}` cells.
///
/// Qubit `((row·n + col)·2t + side·t + k)`; side 0 is the vertical shore,
/// side 1 the horizontal one. Vertical qubits couple to the same `k` in the
/// next row, horizontal qubits to the same `k` in the next column.
pub fn chimera_graph(m: usize, n: usize, t: usize) -> Result<HardwareGraph, EmbeddingError> {
    if m == 0 || n == 0 || t == 0 {
        return Err(EmbeddingError::InvalidParameter(format!(
            "chimera dimensions must be ≥ 1 (got {m}, {n}, {t})"
        )));
    }
    let id = |row: usize, col: usize, side: usize, k: usize| ((row * n + col) * 2 + side) * t + k;
    let mut edges = Vec::new();
    for row in 0..m {
        for col in 0..n {
            for a in 0..t {
                for b in 0..t {
                    edges.push((id(row, col, 0, a), id(row, col, 1, b)));
                }
                if row + 1 < m {
                    edges.push((id(row, col, 0, a), id(row + 1, col, 0, a)));
                }
                if col + 1 < n {
                    edges.push((id(row, col, 1, a), id(row, col + 1, 1, a)));
                }
            }
        }
    }
    HardwareGraph::new(m * n * 2 * t, edges, format!("chimera-{m}-{n}-{t}"))
}

pub fn load_hardware_graph(path: &Path) -> Result<HardwareGraph, EmbeddingError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| EmbeddingError::Io(format!("{}: {e}", path.display())))?;
    HardwareGraph::parse(&text).map(|(g, _)| g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell_is_k44() {
        let g = chimera_graph(1, 1, 4).unwrap();
        assert_eq!(g.num_qubits(), 8);
        assert_eq!(g.edges().len(), 16);
        assert_eq!(g.topology_tag(), "chimera-1-1-4");
    }

    #[test]
    fn inter_cell_neighbors() {
        let g = chimera_graph(2, 2, 4).unwrap();
        assert_eq!(g.neighbors(0), &[4, 5, 6, 7, 16]);
        // horizontal qubit 4 couples to qubit 12 in the next column
        assert!(g.has_edge(4, 12));
        assert!(!g.has_edge(0, 12));
    }

    #[test]
    fn full_size_qubit_count() {
        let g = chimera_graph(16, 16, 4).unwrap();
        assert_eq!(g.num_qubits(), 2048);
        // 256 cells · 16 intra + vertical 15·16·4 + horizontal 16·15·4
        assert_eq!(g.edges().len(), 256 * 16 + 2 * 15 * 16 * 4);
        assert!(chimera_graph(0, 1, 1).is_err());
    }

    #[test]
    fn text_round_trip_and_duplicates() {
        let g = chimera_graph(1, 1, 4).unwrap();
        let (back, dups) = HardwareGraph::parse(&g.to_text()).unwrap();
        assert_eq!(dups, 0);
        assert_eq!(back.edges(), g.edges());
        assert_eq!(back.num_qubits(), 8);
        let (d, dups) = HardwareGraph::parse("3\n0 1\n1 0\n0 1\n1 2\n").unwrap();
        assert_eq!(dups, 2);
        assert_eq!(d.edges(), &[(0, 1), (1, 2)]);
        assert!(matches!(
            HardwareGraph::parse("3\n0 3\n"),
            Err(EmbeddingError::Parse { line: 2, .. })
        ));
        assert!(HardwareGraph::parse("x\n").is_err());
    }
}
