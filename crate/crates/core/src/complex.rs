//! Graphs, simplices, and the clique complexes they generate.
//!
//! Vertices are 1-based. A simplex is stored as its strictly increasing
//! vertex list, and that lexicographic order is everywhere taken as the
//! positive orientation. The clique complex of a graph contains every clique
//! on at most `k_max + 1` vertices; `k_max` bounds the simplex dimension, not
//! the clique size.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// 1-based vertex label.
pub type Vertex = u32;

/// Dimension bound used by the command line tools when none is given.
pub const DEFAULT_K_MAX: usize = 3;

/// Simple undirected graph on vertices `1..=n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<bool>>,
}

impl Graph {
    /// Creates the edgeless graph on `n` vertices.
    pub fn new(n: usize) -> Self {
        Graph { n, adj: vec![vec![false; n]; n] }
    }

    /// Inserts the edge `{a, b}`. Repeated insertions are harmless.
    pub fn add_edge(&mut self, a: Vertex, b: Vertex) -> Result<()> {
        self.check_vertex(a)?;
        self.check_vertex(b)?;
        if a == b {
            return Err(Error::SelfLoop(a));
        }
        let (i, j) = (a as usize - 1, b as usize - 1);
        self.adj[i][j] = true;
        self.adj[j][i] = true;
        Ok(())
    }

    /// Builds a graph from an edge list.
    pub fn from_edges(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Self> {
        let mut g = Graph::new(n);
        for &(a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    /// Parses the plain text graph format.
    ///
    /// The first significant line holds the vertex count `n`; every following
    /// significant line holds one edge as two vertex labels `a b`. Blank
    /// lines are skipped and `#` starts a comment that runs to the end of the
    /// line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut graph: Option<Graph> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let significant = raw.split('#').next().unwrap_or("").trim();
            if significant.is_empty() {
                continue;
            }
            match graph {
                None => {
                    let n: usize = significant.parse().map_err(|_| Error::GraphParse {
                        line,
                        msg: format!("expected the vertex count, found {significant:?}"),
                    })?;
                    graph = Some(Graph::new(n));
                }
                Some(ref mut g) => {
                    let mut parts = significant.split_whitespace();
                    let (a, b) = match (parts.next(), parts.next(), parts.next()) {
                        (Some(a), Some(b), None) => (a, b),
                        _ => {
                            return Err(Error::GraphParse {
                                line,
                                msg: format!(
                                    "expected an edge as two vertex labels, found {significant:?}"
                                ),
                            })
                        }
                    };
                    let parse_v = |s: &str| -> Result<Vertex> {
                        s.parse().map_err(|_| Error::GraphParse {
                            line,
                            msg: format!("invalid vertex label {s:?}"),
                        })
                    };
                    g.add_edge(parse_v(a)?, parse_v(b)?)
                        .map_err(|e| Error::GraphParse { line, msg: e.to_string() })?;
                }
            }
        }
        graph.ok_or(Error::GraphParse { line: 0, msg: "empty graph file".into() })
    }

    /// Number of vertices.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Whether the edge `{a, b}` is present. Out-of-range labels yield false.
    pub fn has_edge(&self, a: Vertex, b: Vertex) -> bool {
        if a == b || a == 0 || b == 0 {
            return false;
        }
        let (i, j) = (a as usize - 1, b as usize - 1);
        i < self.n && j < self.n && self.adj[i][j]
    }

    /// All edges as `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.adj[i][j] {
                    out.push((i as Vertex + 1, j as Vertex + 1));
                }
            }
        }
        out
    }

    /// Number of edges.
    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    fn check_vertex(&self, v: Vertex) -> Result<()> {
        if v == 0 || v as usize > self.n {
            Err(Error::VertexOutOfRange { vertex: v, n: self.n })
        } else {
            Ok(())
        }
    }
}

/// A simplex, stored as its strictly increasing vertex list.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Simplex(Vec<Vertex>);

impl Simplex {
    /// Validates that `vertices` is nonempty and strictly increasing.
    pub fn new(vertices: Vec<Vertex>) -> Result<Self> {
        if vertices.is_empty()
            || vertices[0] == 0
            || vertices.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidSimplex(format!("{vertices:?}")));
        }
        Ok(Simplex(vertices))
    }

    /// The vertex list, strictly increasing.
    pub fn vertices(&self) -> &[Vertex] {
        &self.0
    }

    /// Dimension, one less than the vertex count.
    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    /// Codimension-1 faces paired with the position of the removed vertex.
    ///
    /// The position is exactly the exponent of the orientation sign the face
    /// carries in the boundary of this simplex.
    pub fn faces(&self) -> impl Iterator<Item = (usize, Simplex)> + '_ {
        (0..self.0.len()).filter_map(move |skip| {
            if self.0.len() == 1 {
                return None;
            }
            let mut v = Vec::with_capacity(self.0.len() - 1);
            for (i, &u) in self.0.iter().enumerate() {
                if i != skip {
                    v.push(u);
                }
            }
            Some((skip, Simplex(v)))
        })
    }
}

impl TryFrom<Vec<u32>> for Simplex {
    type Error = Error;
    fn try_from(v: Vec<u32>) -> Result<Self> {
        Simplex::new(v)
    }
}

impl From<Simplex> for Vec<u32> {
    fn from(s: Simplex) -> Vec<u32> {
        s.0
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

/// The clique complex of a graph, truncated at dimension `k_max`.
///
/// Simplex lists are ordered lexicographically; all downstream matrix indices
/// refer to these lists, so the order is part of the contract. Construction
/// is deliberately single-threaded: the enumeration order defines the basis.
#[derive(Clone, Debug)]
pub struct CliqueComplex {
    graph: Graph,
    k_max: usize,
    dims: Vec<Vec<Simplex>>,
}

impl CliqueComplex {
    /// Enumerates every clique on at most `k_max + 1` vertices.
    ///
    /// Uses incremental extension: a clique `[v0 < .. < vd]` is extended by
    /// every `u > vd` adjacent to all of it. Depth-first emission in vertex
    /// order makes each per-dimension list come out lexicographically sorted.
    pub fn build(graph: Graph, k_max: usize) -> Self {
        let mut dims: Vec<Vec<Simplex>> = vec![Vec::new(); k_max + 1];
        let n = graph.n() as Vertex;
        let mut clique: Vec<Vertex> = Vec::with_capacity(k_max + 1);
        for v in 1..=n {
            clique.push(v);
            extend(&graph, k_max, n, &mut clique, &mut dims);
            clique.pop();
        }
        CliqueComplex { graph, k_max, dims }
    }

    /// The underlying graph.
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// The dimension bound the complex was built with.
    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// The `k`-simplices in lexicographic order. Empty above `k_max`.
    pub fn simplices(&self, k: usize) -> &[Simplex] {
        self.dims.get(k).map_or(&[], |v| v.as_slice())
    }

    /// Number of `k`-simplices.
    pub fn num_simplices(&self, k: usize) -> usize {
        self.simplices(k).len()
    }

    /// Position of `s` within the `k`-simplex list for `k = s.dim()`.
    pub fn index_of(&self, s: &Simplex) -> Option<usize> {
        self.simplices(s.dim()).binary_search(s).ok()
    }

    /// Membership test for an arbitrary candidate vertex list.
    ///
    /// True exactly when the list is a valid simplex (strictly increasing,
    /// in range), has dimension at most `k_max`, and spans a clique.
    pub fn is_member(&self, vertices: &[Vertex]) -> bool {
        if vertices.is_empty() || vertices.len() > self.k_max + 1 {
            return false;
        }
        if vertices[0] == 0
            || vertices.last().copied().unwrap_or(0) as usize > self.graph.n()
            || vertices.windows(2).any(|w| w[0] >= w[1])
        {
            return false;
        }
        for i in 0..vertices.len() {
            for j in (i + 1)..vertices.len() {
                if !self.graph.has_edge(vertices[i], vertices[j]) {
                    return false;
                }
            }
        }
        true
    }

    /// Alternating sum of simplex counts.
    pub fn euler_characteristic(&self) -> i64 {
        self.dims
            .iter()
            .enumerate()
            .map(|(d, list)| if d % 2 == 0 { list.len() as i64 } else { -(list.len() as i64) })
            .sum()
    }
}

fn extend(
    graph: &Graph,
    k_max: usize,
    n: Vertex,
    clique: &mut Vec<Vertex>,
    dims: &mut [Vec<Simplex>],
) {
    let d = clique.len() - 1;
    dims[d].push(Simplex(clique.clone()));
    if d == k_max {
        return;
    }
    let last = *clique.last().expect("clique is nonempty");
    for u in (last + 1)..=n {
        if clique.iter().all(|&w| graph.has_edge(w, u)) {
            clique.push(u);
            extend(graph, k_max, n, clique, dims);
            clique.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;
    use proptest::prelude::*;

    fn simplices_of(raw: &[&[Vertex]]) -> Vec<Simplex> {
        raw.iter().map(|v| Simplex::new(v.to_vec()).unwrap()).collect()
    }

    fn triangle() -> CliqueComplex {
        let g = Graph::from_edges(3, &[(1, 2), (1, 3), (2, 3)]).unwrap();
        CliqueComplex::build(g, 3)
    }

    #[test]
    fn triangle_complex_lists_are_exactly_as_expected() {
        let k = triangle();
        assert_eq!(k.simplices(0), simplices_of(&[&[1], &[2], &[3]]).as_slice());
        assert_eq!(k.simplices(1), simplices_of(&[&[1, 2], &[1, 3], &[2, 3]]).as_slice());
        assert_eq!(k.simplices(2), simplices_of(&[&[1, 2, 3]]).as_slice());
        assert_eq!(k.num_simplices(3), 0);
        assert_eq!(k.euler_characteristic(), 1, "a filled triangle is contractible");
    }

    #[test]
    fn four_cycle_has_no_triangles_and_its_edges_sort_lexicographically() {
        let g = Graph::from_edges(4, &[(1, 2), (2, 3), (3, 4), (1, 4)]).unwrap();
        let k = CliqueComplex::build(g, 3);
        assert_eq!(
            k.simplices(1),
            simplices_of(&[&[1, 2], &[1, 4], &[2, 3], &[3, 4]]).as_slice()
        );
        assert_eq!(k.num_simplices(2), 0);
        assert_eq!(k.euler_characteristic(), 0, "a circle has Euler characteristic 0");
    }

    #[test]
    fn k_max_truncates_the_complex() {
        let edges: Vec<(Vertex, Vertex)> =
            (1..=5).array_combinations().map(|[a, b]| (a, b)).collect();
        let g = Graph::from_edges(5, &edges).unwrap();
        let k = CliqueComplex::build(g, 2);
        assert_eq!(k.num_simplices(2), 10, "C(5,3) triangles");
        assert_eq!(k.num_simplices(3), 0, "3-simplices cut off by k_max = 2");
        assert!(!k.is_member(&[1, 2, 3, 4]), "4-cliques exist in K5 but not in the complex");
    }

    #[test]
    fn index_of_inverts_the_simplex_lists() {
        let k = triangle();
        for d in 0..=2 {
            for (i, s) in k.simplices(d).iter().enumerate() {
                assert_eq!(k.index_of(s), Some(i));
            }
        }
        assert_eq!(k.index_of(&Simplex::new(vec![1, 4]).unwrap()), None);
    }

    #[test]
    fn faces_carry_the_position_of_the_removed_vertex() {
        let s = Simplex::new(vec![1, 2, 3]).unwrap();
        let faces: Vec<(usize, Vec<Vertex>)> =
            s.faces().map(|(p, f)| (p, f.vertices().to_vec())).collect();
        assert_eq!(faces, vec![(0, vec![2, 3]), (1, vec![1, 3]), (2, vec![1, 2])]);
        assert_eq!(Simplex::new(vec![7]).unwrap().faces().count(), 0);
    }

    #[test]
    fn parse_accepts_comments_and_blank_lines() {
        let text = "# toy graph\n4\n\n1 2 # first edge\n2 3\n3 4\n1 4\n";
        let g = Graph::parse(text).unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.edges(), vec![(1, 2), (1, 4), (2, 3), (3, 4)]);
    }

    #[test]
    fn parse_rejects_malformed_input() {
        assert!(Graph::parse("").is_err(), "empty file");
        assert!(Graph::parse("x\n").is_err(), "vertex count is not a number");
        assert!(Graph::parse("3\n1\n").is_err(), "edge line with one token");
        assert!(Graph::parse("3\n1 2 3\n").is_err(), "edge line with three tokens");
        assert!(Graph::parse("3\n0 1\n").is_err(), "vertices are 1-based");
        assert!(Graph::parse("3\n1 4\n").is_err(), "vertex above n");
        assert!(Graph::parse("3\n2 2\n").is_err(), "self-loop");
    }

    #[test]
    fn simplex_constructor_rejects_unsorted_input() {
        assert!(Simplex::new(vec![]).is_err());
        assert!(Simplex::new(vec![0]).is_err());
        assert!(Simplex::new(vec![2, 1]).is_err());
        assert!(Simplex::new(vec![1, 1]).is_err());
        assert!(Simplex::new(vec![1, 2, 5]).is_ok());
    }

    #[test]
    fn simplex_serde_roundtrips_and_validates() {
        let s: Simplex = serde_json::from_str("[1,3,5]").unwrap();
        assert_eq!(s.vertices(), &[1, 3, 5]);
        assert_eq!(serde_json::to_string(&s).unwrap(), "[1,3,5]");
        assert!(serde_json::from_str::<Simplex>("[3,1]").is_err());
    }

    /// Brute-force reference: all vertex subsets that form cliques.
    fn enumerate_cliques(g: &Graph, size: usize) -> Vec<Simplex> {
        (1..=g.n() as Vertex)
            .combinations(size)
            .filter(|c| {
                c.iter()
                    .array_combinations()
                    .all(|[&a, &b]| g.has_edge(a, b))
            })
            .map(|c| Simplex::new(c).unwrap())
            .collect()
    }

    fn arbitrary_graph(max_n: usize) -> impl Strategy<Value = Graph> {
        (2..=max_n).prop_flat_map(|n| {
            let pairs: Vec<(Vertex, Vertex)> =
                (1..=n as Vertex).array_combinations().map(|[a, b]| (a, b)).collect();
            proptest::collection::vec(any::<bool>(), pairs.len()).prop_map(move |mask| {
                let chosen: Vec<(Vertex, Vertex)> = pairs
                    .iter()
                    .zip(&mask)
                    .filter(|(_, &keep)| keep)
                    .map(|(&e, _)| e)
                    .collect();
                Graph::from_edges(n, &chosen).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn enumeration_matches_brute_force_and_order(g in arbitrary_graph(7)) {
            let k = CliqueComplex::build(g.clone(), 3);
            for d in 0..=3usize {
                let brute = enumerate_cliques(&g, d + 1);
                // combinations() already emits lexicographic order, so this
                // checks contents and ordering at once
                prop_assert_eq!(k.simplices(d), brute.as_slice());
            }
        }

        #[test]
        fn complexes_are_downward_closed(g in arbitrary_graph(7)) {
            let k = CliqueComplex::build(g, 3);
            for d in 1..=3usize {
                for s in k.simplices(d) {
                    for (_, face) in s.faces() {
                        prop_assert!(k.index_of(&face).is_some(),
                            "face {} of {} missing", face, s);
                    }
                }
            }
        }

        #[test]
        fn membership_agrees_with_the_lists_exhaustively(g in arbitrary_graph(6)) {
            let k = CliqueComplex::build(g.clone(), 2);
            let n = g.n() as Vertex;
            // every subset of 1..=n, encoded by bitmask
            for mask in 1u32..(1 << n) {
                let verts: Vec<Vertex> =
                    (1..=n).filter(|v| mask >> (v - 1) & 1 == 1).collect();
                let listed = verts.len() <= 3
                    && Simplex::new(verts.clone())
                        .ok()
                        .and_then(|s| k.index_of(&s))
                        .is_some();
                prop_assert_eq!(k.is_member(&verts), listed);
            }
        }
    }
}
