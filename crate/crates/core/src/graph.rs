//! Sparse graphon networks and neighbourhood exposures.

use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::ising::TreatmentDraw;

/// Symmetric positive kernel `G` on the unit square.
#[derive(Clone)]
pub enum Kernel {
    Constant(f64),
    /// `G(x, y) = 1/4 + (x + y)/2`.
    Smooth,
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl Kernel {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Kernel::Constant(c) => *c,
            Kernel::Smooth => 0.25 + 0.5 * (x + y),
            Kernel::Custom(f) => f(x, y),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Kernel::Constant(_))
    }
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Constant(c) => write!(f, "Constant({c})"),
            Kernel::Smooth => write!(f, "Smooth"),
            Kernel::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GraphonSpec {
    rho: f64,
    kernel: Kernel,
}

impl GraphonSpec {
    pub fn new(rho: f64, kernel: Kernel) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::param("rho", format!("must lie in (0, 1], got {rho}")));
        }
        if let Kernel::Constant(c) = kernel {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::param("kernel", format!("constant must be positive, got {c}")));
            }
        }
        Ok(GraphonSpec { rho, kernel })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn edge_prob(&self, x: f64, y: f64) -> f64 {
        (self.rho * self.kernel.eval(x, y)).min(1.0)
    }
}

pub fn sample_traits<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>()).collect()
}

/// Undirected loop-free graph in compressed sparse row form. Neighbour lists
/// are sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl Graph {
    /// Builds a graph from undirected pairs. Duplicates and self loops are
    /// rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::Data(format!("edge ({a}, {b}) out of range for {n} units")));
            }
            if a == b {
                return Err(Error::Data(format!("self loop at unit {a}")));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        for (i, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Data(format!("duplicate edge at unit {i}")));
            }
        }
        Ok(Self::from_sorted_lists(adj))
    }

    fn from_sorted_lists(adj: Vec<Vec<usize>>) -> Self {
        let mut offsets = Vec::with_capacity(adj.len() + 1);
        offsets.push(0);
        let mut targets = Vec::with_capacity(adj.iter().map(Vec::len).sum());
        for list in adj {
            targets.extend_from_slice(&list);
            offsets.push(targets.len());
        }
        Graph { offsets, targets }
    }

    pub fn empty(n: usize) -> Self {
        Graph {
            offsets: vec![0; n + 1],
            targets: Vec::new(),
        }
    }

    pub fn complete(n: usize) -> Self {
        Self::from_sorted_lists((0..n).map(|i| (0..n).filter(|&j| j != i).collect()).collect())
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn num_edges(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors(i).binary_search(&j).is_ok()
    }

    /// Pairs `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .filter(move |&&j| j > i)
                .map(move |&j| (i, j))
        })
    }

    /// Writes one `i j` line per edge, 0-indexed with `i < j`.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        for (i, j) in self.edges() {
            writeln!(out, "{i} {j}")?;
        }
        Ok(())
    }

    pub fn read_edge_list<R: BufRead>(n: usize, input: R) -> Result<Self> {
        let mut edges = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let mut next = || -> Result<usize> {
                parts
                    .next()
                    .ok_or_else(|| Error::Data(format!("edge line {}: expected two indices", lineno + 1)))?
                    .parse::<usize>()
                    .map_err(|e| Error::Data(format!("edge line {}: {e}", lineno + 1)))
            };
            let (a, b) = (next()?, next()?);
            edges.push((a, b));
        }
        Self::from_edges(n, &edges)
    }
}

/// Draws a graph with `P(E_ij = 1 | U) = min(1, ρ G(U_i, U_j))`.
pub fn generate_graph<R: Rng + ?Sized>(spec: &GraphonSpec, traits: &[f64], rng: &mut R) -> Result<Graph> {
    let n = traits.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let constant = match spec.kernel {
        Kernel::Constant(c) => Some((spec.rho * c).min(1.0)),
        _ => None,
    };
    for i in 0..n {
        for j in i + 1..n {
            let p = match constant {
                Some(p) => p,
                None => {
                    let g = spec.kernel.eval(traits[i], traits[j]);
                    if !g.is_finite() || g < 0.0 {
                        return Err(Error::param(
                            "kernel",
                            format!("G({}, {}) = {g} is not a finite nonnegative value", traits[i], traits[j]),
                        ));
                    }
                    (spec.rho * g).min(1.0)
                }
            };
            if rng.random::<f64>() < p {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for list in adj.iter_mut() {
        list.sort_unstable();
    }
    Ok(Graph::from_sorted_lists(adj))
}

/// Treated-neighbour count and degree of one unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exposure {
    pub m: usize,
    pub n: usize,
}

impl Exposure {
    /// `M_i / N_i`, or `None` for isolated units.
    pub fn frac(&self) -> Option<f64> {
        (self.n > 0).then(|| self.m as f64 / self.n as f64)
    }

    pub fn is_defined(&self) -> bool {
        self.n > 0
    }

    pub fn frac_or(&self, fallback: f64) -> f64 {
        self.frac().unwrap_or(fallback)
    }
}

fn check_dims(graph: &Graph, t: &[bool]) -> Result<()> {
    if graph.n() != t.len() {
        return Err(Error::DimensionMismatch {
            expected: graph.n(),
            got: t.len(),
        });
    }
    Ok(())
}

pub fn exposures(graph: &Graph, t: &TreatmentDraw) -> Result<Vec<Exposure>> {
    exposures_from(graph, t.treatments())
}

pub fn exposures_from(graph: &Graph, t: &[bool]) -> Result<Vec<Exposure>> {
    check_dims(graph, t)?;
    Ok((0..graph.n())
        .map(|i| {
            let nb = graph.neighbors(i);
            Exposure {
                m: nb.iter().filter(|&&j| t[j]).count(),
                n: nb.len(),
            }
        })
        .collect())
}

/// Exposures with unit `i` deleted from every other unit's neighbourhood:
/// `M_{j,(i)} = Σ_{l≠i,j} E_jl T_l`. Entry `i` keeps its own full exposure.
pub fn leave_one_out_exposures(graph: &Graph, t: &TreatmentDraw, i: usize) -> Result<Vec<Exposure>> {
    let mut out = exposures(graph, t)?;
    if i >= graph.n() {
        return Err(Error::param("i", format!("unit {i} out of range")));
    }
    for &j in graph.neighbors(i) {
        out[j].n -= 1;
        if t.is_treated(i) {
            out[j].m -= 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn naive_exposures(n: usize, edges: &[(usize, usize)], t: &[bool]) -> Vec<Exposure> {
        let mut a = vec![vec![false; n]; n];
        for &(i, j) in edges {
            a[i][j] = true;
            a[j][i] = true;
        }
        (0..n)
            .map(|i| Exposure {
                m: (0..n).filter(|&j| j != i && a[i][j] && t[j]).count(),
                n: (0..n).filter(|&j| j != i && a[i][j]).count(),
            })
            .collect()
    }

    #[test]
    fn complete_graph_from_unit_kernel() {
        let spec = GraphonSpec::new(1.0, Kernel::Constant(1.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let u = sample_traits(12, &mut rng);
        let g = generate_graph(&spec, &u, &mut rng).unwrap();
        assert_eq!(g, Graph::complete(12));
        assert_eq!(g.num_edges(), 66);
    }

    #[test]
    fn star_graph_exposures() {
        let edges: Vec<(usize, usize)> = (1..5).map(|j| (0, j)).collect();
        let g = Graph::from_edges(5, &edges).unwrap();
        let t = TreatmentDraw::from_treatments(vec![true, true, false, true, false]);
        let e = exposures(&g, &t).unwrap();
        assert_eq!(e[0].frac(), Some(0.5));
        for leaf in &e[1..] {
            assert_eq!(leaf.frac(), Some(1.0));
        }
    }

    #[test]
    fn empty_graph_is_undefined() {
        let g = Graph::empty(4);
        let t = TreatmentDraw::from_treatments(vec![true, false, true, false]);
        assert!(exposures(&g, &t).unwrap().iter().all(|e| e.frac().is_none()));
    }

    #[test]
    fn random_graph_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let spec = GraphonSpec::new(0.6, Kernel::Smooth).unwrap();
        let u = sample_traits(20, &mut rng);
        let g = generate_graph(&spec, &u, &mut rng).unwrap();
        let t: Vec<bool> = (0..20).map(|_| rng.random()).collect();
        let edges: Vec<_> = g.edges().collect();
        assert_eq!(exposures_from(&g, &t).unwrap(), naive_exposures(20, &edges, &t));

        let draw = TreatmentDraw::from_treatments(t.clone());
        for i in 0..20 {
            let loo = leave_one_out_exposures(&g, &draw, i).unwrap();
            let kept: Vec<_> = edges.iter().cloned().filter(|&(a, b)| a != i && b != i).collect();
            let naive = naive_exposures(20, &kept, &t);
            for j in (0..20).filter(|&j| j != i) {
                assert_eq!(loo[j], naive[j]);
            }
            assert_eq!(loo[i], exposures(&g, &draw).unwrap()[i]);
        }
    }

    #[test]
    fn triangle_leave_one_out() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let t = TreatmentDraw::from_treatments(vec![true, true, false]);
        let loo = leave_one_out_exposures(&g, &t, 2).unwrap();
        assert_eq!(loo[0], Exposure { m: 1, n: 1 });
        assert_eq!(loo[1], Exposure { m: 1, n: 1 });
    }

    #[test]
    fn edge_list_round_trip() {
        let g = Graph::from_edges(5, &[(3, 1), (0, 4), (2, 3)]).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "0 4\n1 3\n2 3\n");
        assert_eq!(Graph::read_edge_list(5, buf.as_slice()).unwrap(), g);
    }

    #[test]
    fn bad_inputs_rejected() {
        assert!(GraphonSpec::new(0.0, Kernel::Constant(1.0)).is_err());
        assert!(GraphonSpec::new(1.5, Kernel::Constant(1.0)).is_err());
        assert!(Graph::from_edges(3, &[(0, 0)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 3)]).is_err());
        let spec = GraphonSpec::new(0.5, Kernel::Custom(Arc::new(|_, _| f64::NAN))).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(generate_graph(&spec, &[0.1, 0.2], &mut rng).is_err());
    }
}
