//! Graph structure of Hamiltonians: forests, phase flattening and star
//! decompositions.
//!
//! When the graph of `H` is a forest, a diagonal unitary removes every phase
//! and `‖abs(H)‖ = ‖H‖`. A rooted forest splits into two star forests by the
//! depth parity of each edge's parent, and a star `S` with weight vector `w`
//! has `S² = ‖w‖²·P`, which gives its exponential in closed form. Together
//! these yield a product-formula simulation over star forests.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{spectral_norm, HermitianMatrix, Matrix, StateVector, C64};
use crate::norms::max_column_norm;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    /// `H_uv` (so `H_vu` is its conjugate).
    pub weight: C64,
}

/// Weighted simple graph with edges stored as `u < v`, sorted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedGraph {
    pub n: usize,
    pub edges: Vec<Edge>,
    /// Vertices whose diagonal entry is nonzero. Not edges.
    pub diagonal_support: Vec<usize>,
}

impl WeightedGraph {
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        let mut edges = edges;
        for e in &mut edges {
            if e.u == e.v {
                return Err(Error::Domain(format!("self-loop at vertex {}", e.u)));
            }
            if e.u >= n || e.v >= n {
                return Err(Error::Domain(format!("edge ({}, {}) out of range for {n} vertices", e.u, e.v)));
            }
            if e.weight.norm() == 0.0 {
                return Err(Error::Domain(format!("edge ({}, {}) has zero weight", e.u, e.v)));
            }
            if e.u > e.v {
                *e = Edge { u: e.v, v: e.u, weight: e.weight.conj() };
            }
        }
        edges.sort_by_key(|e| (e.u, e.v));
        if let Some(w) = edges.windows(2).find(|w| (w[0].u, w[0].v) == (w[1].u, w[1].v)) {
            return Err(Error::Domain(format!("duplicate edge ({}, {})", w[0].u, w[0].v)));
        }
        Ok(Self { n, edges, diagonal_support: Vec::new() })
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (idx, e) in self.edges.iter().enumerate() {
            adj[e.u].push((e.v, idx));
            adj[e.v].push((e.u, idx));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Embeds the edges back into a Hermitian matrix (zero diagonal).
    pub fn to_hamiltonian(&self) -> HermitianMatrix {
        let mut m = Matrix::zeros(self.n);
        for e in &self.edges {
            m[(e.u, e.v)] = e.weight;
            m[(e.v, e.u)] = e.weight.conj();
        }
        HermitianMatrix::new(m).expect("Hermitian by construction")
    }
}

/// The graph of the nonzero off-diagonal entries of `H`.
pub fn graph_of(h: &HermitianMatrix) -> WeightedGraph {
    let n = h.dim();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let w = h.get(u, v);
            if w.norm() > 0.0 {
                edges.push(Edge { u, v, weight: w });
            }
        }
    }
    let diagonal_support = (0..n).filter(|&i| h.get(i, i).re != 0.0).collect();
    WeightedGraph { n, edges, diagonal_support }
}

/// BFS structure of a forest rooted at the smallest vertex of each component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootedForest {
    pub roots: Vec<usize>,
    pub parent: Vec<Option<usize>>,
    /// Index into the graph's edge list of the edge to the parent.
    pub parent_edge: Vec<Option<usize>>,
    pub depth: Vec<usize>,
    pub component: Vec<usize>,
    /// Vertices in BFS order, component by component.
    pub order: Vec<usize>,
}

impl RootedForest {
    pub fn component_count(&self) -> usize {
        self.roots.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphClass {
    Forest(RootedForest),
    /// A cycle `c_0, c_1, …, c_{m-1}` with edges between consecutive
    /// vertices and between `c_{m-1}` and `c_0`.
    NotForest { cycle: Vec<usize> },
}

pub fn classify_graph(g: &WeightedGraph) -> GraphClass {
    let adj = g.adjacency();
    let n = g.n;
    let mut parent = vec![None; n];
    let mut parent_edge = vec![None; n];
    let mut depth = vec![0; n];
    let mut component = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut roots = Vec::new();
    for root in 0..n {
        if component[root] != usize::MAX {
            continue;
        }
        let cid = roots.len();
        roots.push(root);
        component[root] = cid;
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            order.push(x);
            for &(y, eidx) in &adj[x] {
                if Some(eidx) == parent_edge[x] {
                    continue;
                }
                if component[y] != usize::MAX {
                    return GraphClass::NotForest { cycle: cycle_through(x, y, &parent) };
                }
                component[y] = cid;
                parent[y] = Some(x);
                parent_edge[y] = Some(eidx);
                depth[y] = depth[x] + 1;
                queue.push_back(y);
            }
        }
    }
    GraphClass::Forest(RootedForest { roots, parent, parent_edge, depth, component, order })
}

// `x` and `y` are adjacent and both reached from the same root: join their
// tree paths at the lowest common ancestor.
fn cycle_through(x: usize, y: usize, parent: &[Option<usize>]) -> Vec<usize> {
    let path = |mut v: usize| {
        let mut p = vec![v];
        while let Some(u) = parent[v] {
            p.push(u);
            v = u;
        }
        p
    };
    let px = path(x);
    let py = path(y);
    let lca = *px.iter().find(|v| py.contains(v)).expect("same component");
    let mut cycle: Vec<usize> = px.iter().copied().take_while(|&v| v != lca).collect();
    cycle.push(lca);
    let mut down: Vec<usize> = py.iter().copied().take_while(|&v| v != lca).collect();
    down.reverse();
    cycle.extend(down);
    cycle
}

fn require_forest(g: &WeightedGraph) -> Result<RootedForest> {
    match classify_graph(g) {
        GraphClass::Forest(f) => Ok(f),
        GraphClass::NotForest { cycle } => Err(Error::NotAForest { cycle }),
    }
}

/// The diagonal unitary `U` with `U H U† = abs(H)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseFlattening {
    pub u_diag: Vec<C64>,
    /// One root per component, where `U = 1`.
    pub root_choices: Vec<usize>,
}

impl PhaseFlattening {
    /// `U H U†`, entrywise `U_ii H_ij conj(U_jj)`.
    pub fn apply(&self, h: &HermitianMatrix) -> Result<Matrix> {
        if h.dim() != self.u_diag.len() {
            return Err(Error::DimensionMismatch { expected: self.u_diag.len(), found: h.dim() });
        }
        let u = &self.u_diag;
        Ok(Matrix::from_fn(h.dim(), |i, j| u[i] * h.get(i, j) * u[j].conj()))
    }

    /// `max |U H U† - abs(H)|`.
    pub fn residual(&self, h: &HermitianMatrix) -> Result<f64> {
        let flat = self.apply(h)?;
        let abs = Matrix::from_fn(h.dim(), |i, j| C64::new(h.get(i, j).norm(), 0.0));
        flat.max_abs_diff(&abs)
    }
}

/// Each vertex gets the product of `H_pi/|H_pi|` along its root path.
pub fn flatten_phases(h: &HermitianMatrix) -> Result<PhaseFlattening> {
    for i in 0..h.dim() {
        let d = h.get(i, i).re;
        if d < 0.0 {
            return Err(Error::NegativeDiagonal { index: i, value: d });
        }
    }
    let forest = require_forest(&graph_of(h))?;
    let mut u_diag = vec![C64::new(1.0, 0.0); h.dim()];
    for &v in &forest.order {
        if let Some(p) = forest.parent[v] {
            let w = h.get(p, v);
            u_diag[v] = u_diag[p] * (w / w.norm());
        }
    }
    Ok(PhaseFlattening { u_diag, root_choices: forest.roots })
}

/// A star: `S[leaf][center] = weights[leaf]`, `S[center][leaf]` its conjugate.
#[derive(Clone, Debug, PartialEq)]
pub struct Star {
    pub center: usize,
    pub leaves: Vec<usize>,
    /// The vector `w` restricted to the leaves.
    pub weights: Vec<C64>,
}

impl Star {
    pub fn new(center: usize, leaves: Vec<usize>, weights: Vec<C64>) -> Result<Self> {
        if leaves.is_empty() {
            return Err(Error::InvalidDecomposition(format!("star at {center} has no leaves")));
        }
        if leaves.len() != weights.len() {
            return Err(Error::DimensionMismatch { expected: leaves.len(), found: weights.len() });
        }
        let mut seen = leaves.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != leaves.len() || seen.binary_search(&center).is_ok() {
            return Err(Error::InvalidDecomposition(format!("star at {center} has repeated leaves or a self-leaf")));
        }
        Ok(Self { center, leaves, weights })
    }

    /// `‖w‖`, which equals `mcn(S) = ‖S‖ = ‖abs(S)‖`.
    pub fn weight_norm(&self) -> f64 {
        self.weights.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.center).chain(self.leaves.iter().copied())
    }

    /// Dense embedding in dimension `n`.
    pub fn to_hamiltonian(&self, n: usize) -> HermitianMatrix {
        let mut m = Matrix::zeros(n);
        self.add_into(&mut m);
        HermitianMatrix::new(m).expect("Hermitian by construction")
    }

    fn add_into(&self, m: &mut Matrix) {
        for (&leaf, &w) in self.leaves.iter().zip(&self.weights) {
            m[(leaf, self.center)] += w;
            m[(self.center, leaf)] += w.conj();
        }
    }
}

/// A vertex-disjoint union of stars.
#[derive(Clone, Debug, PartialEq)]
pub struct StarForest {
    pub n: usize,
    pub stars: Vec<Star>,
}

impl StarForest {
    pub fn to_hamiltonian(&self) -> HermitianMatrix {
        let mut m = Matrix::zeros(self.n);
        for s in &self.stars {
            s.add_into(&mut m);
        }
        HermitianMatrix::new(m).expect("Hermitian by construction")
    }

    pub fn edge_count(&self) -> usize {
        self.stars.iter().map(|s| s.leaves.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.stars.is_empty()
    }

    /// Checks that no vertex belongs to two stars and indices are in range.
    pub fn validate(&self) -> Result<()> {
        let mut used = vec![false; self.n];
        for s in &self.stars {
            for v in s.vertices() {
                if v >= self.n {
                    return Err(Error::InvalidDecomposition(format!("vertex {v} out of range")));
                }
                if used[v] {
                    return Err(Error::InvalidDecomposition(format!("vertex {v} shared between stars")));
                }
                used[v] = true;
            }
        }
        Ok(())
    }

    /// `‖S_l‖`, the largest star weight norm.
    pub fn spectral_norm(&self) -> f64 {
        self.stars.iter().map(Star::weight_norm).fold(0.0, f64::max)
    }
}

/// A partition of a Hamiltonian's edges into star forests `S_l`.
#[derive(Clone, Debug, PartialEq)]
pub struct StarForestDecomposition {
    pub n: usize,
    pub forests: Vec<StarForest>,
    pub source_edge_count: usize,
    /// `k'`, the number of plain forests the star forests came from. Empty
    /// star forests are dropped, so `forests.len()` may be less than `2k'`.
    pub forest_count: usize,
}

#[derive(Serialize, Deserialize)]
struct StarJson {
    center: usize,
    leaves: Vec<usize>,
    weights: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct DecompositionJson {
    forests: Vec<Vec<StarJson>>,
}

impl StarForestDecomposition {
    pub fn hamiltonians(&self) -> Vec<HermitianMatrix> {
        self.forests.iter().map(StarForest::to_hamiltonian).collect()
    }

    /// `{"forests":[[{"center":c,"leaves":[…],"weights":[[re,im],…]}],…]}`
    pub fn to_json(&self) -> String {
        let doc = DecompositionJson {
            forests: self
                .forests
                .iter()
                .map(|f| {
                    f.stars
                        .iter()
                        .map(|s| StarJson {
                            center: s.center,
                            leaves: s.leaves.clone(),
                            weights: s.weights.iter().map(|w| [w.re, w.im]).collect(),
                        })
                        .collect()
                })
                .collect(),
        };
        serde_json::to_string(&doc).expect("plain data serialises")
    }

    /// Parses the JSON form for a Hamiltonian of dimension `n`.
    pub fn from_json(s: &str, n: usize) -> Result<Self> {
        let doc: DecompositionJson = serde_json::from_str(s)?;
        let mut forests = Vec::with_capacity(doc.forests.len());
        for f in doc.forests {
            let stars = f
                .into_iter()
                .map(|s| Star::new(s.center, s.leaves, s.weights.into_iter().map(|[re, im]| C64::new(re, im)).collect()))
                .collect::<Result<Vec<_>>>()?;
            let forest = StarForest { n, stars };
            forest.validate()?;
            forests.push(forest);
        }
        let source_edge_count = forests.iter().map(StarForest::edge_count).sum();
        let forest_count = forests.len().div_ceil(2);
        Ok(Self { n, forests, source_edge_count, forest_count })
    }

    /// Checks that the forests are valid, never share an edge and sum to `h`.
    pub fn verify_against(&self, h: &HermitianMatrix) -> Result<()> {
        if h.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: h.dim() });
        }
        let mut covered: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut sum = Matrix::zeros(self.n);
        for (l, f) in self.forests.iter().enumerate() {
            f.validate()?;
            for s in &f.stars {
                for &leaf in &s.leaves {
                    let key = (s.center.min(leaf), s.center.max(leaf));
                    if let Some(prev) = covered.insert(key, l) {
                        return Err(Error::InvalidDecomposition(format!(
                            "edge {key:?} appears in forests {prev} and {l}"
                        )));
                    }
                }
                s.add_into(&mut sum);
            }
        }
        for i in 0..self.n {
            for j in 0..self.n {
                let target = if i == j { C64::new(0.0, 0.0) } else { h.get(i, j) };
                if sum[(i, j)] != target {
                    return Err(Error::InvalidDecomposition(format!("sum differs from H at ({i}, {j})")));
                }
            }
        }
        Ok(())
    }
}

/// Splits a forest into two star forests: edges whose parent sits at even
/// depth go to the first, the rest to the second.
pub fn star_forest_split(g: &WeightedGraph) -> Result<StarForestDecomposition> {
    let forest = require_forest(g)?;
    let mut groups: [BTreeMap<usize, Vec<(usize, C64)>>; 2] = [BTreeMap::new(), BTreeMap::new()];
    for v in 0..g.n {
        let (Some(p), Some(eidx)) = (forest.parent[v], forest.parent_edge[v]) else {
            continue;
        };
        let e = &g.edges[eidx];
        // weight as seen from the leaf's row: H[v][p]
        let w = if e.u == p { e.weight.conj() } else { e.weight };
        groups[forest.depth[p] % 2].entry(p).or_default().push((v, w));
    }
    let forests = groups
        .into_iter()
        .map(|group| StarForest {
            n: g.n,
            stars: group
                .into_iter()
                .map(|(center, leaves)| {
                    let (leaves, weights) = leaves.into_iter().unzip();
                    Star { center, leaves, weights }
                })
                .collect(),
        })
        .collect();
    Ok(StarForestDecomposition { n: g.n, forests, source_edge_count: g.edge_count(), forest_count: 1 })
}

/// Repeatedly peels a maximal spanning forest off the remaining edges,
/// scanning them in `(u, v)` order. Yields at least arboricity-many forests.
pub fn greedy_forest_partition(g: &WeightedGraph) -> Vec<WeightedGraph> {
    let mut remaining = g.edges.clone();
    let mut out = Vec::new();
    while !remaining.is_empty() {
        let mut dsu = DisjointSets::new(g.n);
        let mut taken = Vec::new();
        let mut rest = Vec::new();
        for e in remaining {
            if dsu.union(e.u, e.v) {
                taken.push(e);
            } else {
                rest.push(e);
            }
        }
        out.push(WeightedGraph { n: g.n, edges: taken, diagonal_support: Vec::new() });
        remaining = rest;
    }
    out
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Writes `H = Σ_l S_l` with each `S_l` a star forest. Without an explicit
/// forest partition the greedy one is used; empty star forests are dropped.
pub fn star_decompose(h: &HermitianMatrix, forests: Option<&[WeightedGraph]>) -> Result<StarForestDecomposition> {
    for i in 0..h.dim() {
        let d = h.get(i, i).re;
        if d != 0.0 {
            return Err(Error::NonzeroDiagonal { index: i, value: d });
        }
    }
    let g = graph_of(h);
    let parts = match forests {
        Some(f) => f.to_vec(),
        None => greedy_forest_partition(&g),
    };
    let mut out = Vec::new();
    for part in &parts {
        if part.n != h.dim() {
            return Err(Error::DimensionMismatch { expected: h.dim(), found: part.n });
        }
        out.extend(star_forest_split(part)?.forests.into_iter().filter(|f| !f.is_empty()));
    }
    let dec = StarForestDecomposition {
        n: h.dim(),
        forests: out,
        source_edge_count: g.edge_count(),
        forest_count: parts.len(),
    };
    dec.verify_against(h)?;
    Ok(dec)
}

/// Arboricity inequalities for a decomposition built from `k'` forests, each
/// split into (at most) two star forests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArboricityReport {
    pub star_forests: usize,
    pub k_prime: usize,
    pub mcn: f64,
    pub spectral: f64,
    pub abs_spectral: f64,
    /// `‖S_l‖` for each part.
    pub part_norms: Vec<f64>,
    pub checks: Vec<crate::norms::ChainLink>,
    pub pass: bool,
}

pub fn arboricity_bound_report(h: &HermitianMatrix, dec: &StarForestDecomposition) -> Result<ArboricityReport> {
    use crate::norms::ChainLink;

    dec.verify_against(h)?;
    let profile = crate::norms::norm_profile(h)?;
    let l = dec.forests.len();
    if 2 * dec.forest_count < l {
        return Err(Error::InvalidDecomposition(format!(
            "{l} star forests cannot come from {} forests",
            dec.forest_count
        )));
    }
    let k_prime = dec.forest_count.max(1);
    let two_k = 2.0 * k_prime as f64;
    let part_norms: Vec<f64> = dec.forests.iter().map(|f| spectral_norm(&f.to_hamiltonian())).collect::<Result<_>>()?;
    let sum_parts: f64 = part_norms.iter().sum();
    let max_part_mcn = dec.forests.iter().map(|f| max_column_norm(&f.to_hamiltonian())).fold(0.0, f64::max);
    let checks = vec![
        ChainLink::at_most("abs_spectral<=2k*mcn", profile.abs_spectral, two_k * profile.mcn),
        ChainLink::at_most("abs_spectral<=2k*spectral", profile.abs_spectral, two_k * profile.spectral),
        ChainLink::at_most("spectral<=2k*mcn", profile.spectral, two_k * profile.mcn),
        ChainLink::at_most("sum_parts/2k<=mcn", sum_parts / two_k, profile.mcn),
        ChainLink::at_most("abs_spectral<=sum_parts", profile.abs_spectral, sum_parts),
        ChainLink::at_most("max_part_mcn<=mcn", max_part_mcn, profile.mcn),
    ];
    let pass = checks.iter().all(|c| c.ok);
    Ok(ArboricityReport {
        star_forests: l,
        k_prime,
        mcn: profile.mcn,
        spectral: profile.spectral,
        abs_spectral: profile.abs_spectral,
        part_norms,
        checks,
        pass,
    })
}

/// `e^{-iSt} ψ = ψ + (cos(‖w‖t) - 1) P ψ - i sin(‖w‖t) S ψ / ‖w‖`, where
/// `P` projects onto `span{e_center, w}`. Touches only the star's vertices.
pub fn star_exponential(star: &Star, t: f64, psi: &StateVector) -> Result<StateVector> {
    let mut out = psi.clone();
    apply_star_exponential(star, t, out.amplitudes_mut())?;
    Ok(out)
}

fn apply_star_exponential(star: &Star, t: f64, amps: &mut [C64]) -> Result<()> {
    let norm = star.weight_norm();
    if norm == 0.0 {
        return Err(Error::ZeroWeightStar { center: star.center });
    }
    if let Some(v) = star.vertices().find(|&v| v >= amps.len()) {
        return Err(Error::DimensionMismatch { expected: v + 1, found: amps.len() });
    }
    let (cos, sin) = ((norm * t).cos(), (norm * t).sin());
    let c = star.center;
    let psi_c = amps[c];
    // ŵ†ψ and (Sψ) restricted to the star
    let w_dot: C64 = star.leaves.iter().zip(&star.weights).map(|(&l, w)| w.conj() * amps[l]).sum::<C64>() / norm;
    let minus_i_sin = C64::new(0.0, -sin);
    amps[c] = psi_c + (cos - 1.0) * psi_c + minus_i_sin * w_dot;
    for (&l, w) in star.leaves.iter().zip(&star.weights) {
        let what = w / norm;
        amps[l] += (cos - 1.0) * what * w_dot + minus_i_sin * what * psi_c;
    }
    Ok(())
}

/// First-order product formula `(Π_l e^{-i S_l t/steps})^steps`, applied in
/// list order. Stars within one forest are disjoint, so each factor is exact.
pub fn trotter_evolve(forests: &[StarForest], t: f64, steps: usize, psi: &StateVector) -> Result<StateVector> {
    if steps == 0 {
        return Err(Error::Domain("steps must be positive".into()));
    }
    let dt = t / steps as f64;
    let mut out = psi.clone();
    for _ in 0..steps {
        for f in forests {
            for s in &f.stars {
                apply_star_exponential(s, dt, out.amplitudes_mut())?;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{line_hamiltonian, random_tree_hamiltonian};
    use crate::matcore::{eigvalsh, evolve};
    use crate::norms::norm_profile;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn graph(n: usize, edges: &[(usize, usize)]) -> WeightedGraph {
        WeightedGraph::new(n, edges.iter().map(|&(u, v)| Edge { u, v, weight: c(1.0, 0.0) }).collect()).unwrap()
    }

    fn complete(n: usize) -> WeightedGraph {
        let mut e = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                e.push((u, v));
            }
        }
        graph(n, &e)
    }

    fn is_forest(g: &WeightedGraph) -> bool {
        matches!(classify_graph(g), GraphClass::Forest(_))
    }

    #[test]
    fn graph_of_examples() {
        assert!(graph_of(&HermitianMatrix::identity(4)).edges.is_empty());
        assert_eq!(graph_of(&HermitianMatrix::identity(4)).diagonal_support, vec![0, 1, 2, 3]);
        let path = graph_of(&line_hamiltonian(3).unwrap());
        let pairs: Vec<_> = path.edges.iter().map(|e| (e.u, e.v)).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 2), (2, 3)]);
        let tri = complete(3).to_hamiltonian();
        assert_eq!(graph_of(&tri).edge_count(), 3);
    }

    #[test]
    fn weighted_graph_validation() {
        assert!(WeightedGraph::new(2, vec![Edge { u: 0, v: 0, weight: c(1.0, 0.0) }]).is_err());
        assert!(WeightedGraph::new(2, vec![Edge { u: 0, v: 1, weight: c(0.0, 0.0) }]).is_err());
        let dup = vec![Edge { u: 0, v: 1, weight: c(1.0, 0.0) }, Edge { u: 1, v: 0, weight: c(1.0, 0.0) }];
        assert!(WeightedGraph::new(2, dup).is_err());
        let g = WeightedGraph::new(2, vec![Edge { u: 1, v: 0, weight: c(0.0, 1.0) }]).unwrap();
        assert_eq!(g.edges[0].weight, c(0.0, -1.0));
    }

    #[test]
    fn classify_examples() {
        match classify_graph(&graph(4, &[(0, 1), (1, 2), (2, 3)])) {
            GraphClass::Forest(f) => {
                assert_eq!(f.component_count(), 1);
                assert_eq!(f.depth, vec![0, 1, 2, 3]);
            }
            other => panic!("{other:?}"),
        }
        match classify_graph(&complete(3)) {
            GraphClass::NotForest { cycle } => {
                let mut sorted = cycle.clone();
                sorted.sort();
                assert_eq!(sorted, vec![0, 1, 2]);
            }
            other => panic!("{other:?}"),
        }
        match classify_graph(&graph(4, &[(0, 1), (2, 3)])) {
            GraphClass::Forest(f) => assert_eq!(f.roots, vec![0, 2]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn witness_cycles_are_real_cycles() {
        let g = graph(7, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 1), (5, 6)]);
        let GraphClass::NotForest { cycle } = classify_graph(&g) else { panic!("has a cycle") };
        let has = |a: usize, b: usize| g.edges.iter().any(|e| (e.u, e.v) == (a.min(b), a.max(b)));
        assert!(cycle.len() >= 3);
        for i in 0..cycle.len() {
            assert!(has(cycle[i], cycle[(i + 1) % cycle.len()]), "{cycle:?}");
        }
    }

    #[test]
    fn flatten_single_sign_flip() {
        let h = HermitianMatrix::from_real_rows(&[vec![0.0, -1.0], vec![-1.0, 0.0]]).unwrap();
        let f = flatten_phases(&h).unwrap();
        assert_eq!(f.u_diag, vec![c(1.0, 0.0), c(-1.0, 0.0)]);
        let flat = f.apply(&h).unwrap();
        assert_eq!(flat[(0, 1)], c(1.0, 0.0));
    }

    #[test]
    fn flatten_imaginary_phase() {
        let h = HermitianMatrix::new(
            Matrix::from_row_major(2, vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]).unwrap(),
        )
        .unwrap();
        let f = flatten_phases(&h).unwrap();
        // U_11 = H_01/|H_01| = -i
        assert_eq!(f.u_diag, vec![c(1.0, 0.0), c(0.0, -1.0)]);
        assert!(f.residual(&h).unwrap() < 1e-15);
    }

    #[test]
    fn flatten_random_trees() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for n in [2, 5, 17, 128] {
            let h = random_tree_hamiltonian(n, &mut rng);
            let f = flatten_phases(&h).unwrap();
            assert!(f.u_diag.iter().all(|u| (u.norm() - 1.0).abs() < 1e-12));
            assert!(f.residual(&h).unwrap() <= 1e-12);
            let p = norm_profile(&h).unwrap();
            assert!((p.spectral - p.abs_spectral).abs() <= 1e-9);
        }
    }

    #[test]
    fn flatten_preconditions() {
        assert!(matches!(flatten_phases(&complete(3).to_hamiltonian()), Err(Error::NotAForest { .. })));
        let h = HermitianMatrix::from_real_rows(&[vec![-1.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(matches!(flatten_phases(&h), Err(Error::NegativeDiagonal { index: 0, .. })));
        let h = HermitianMatrix::from_real_rows(&[vec![2.0, -1.0], vec![-1.0, 0.0]]).unwrap();
        assert!(flatten_phases(&h).unwrap().residual(&h).unwrap() < 1e-15);
    }

    fn star_pairs(f: &StarForest) -> Vec<(usize, usize)> {
        let mut out: Vec<_> = f.stars.iter().flat_map(|s| s.leaves.iter().map(move |&l| (s.center.min(l), s.center.max(l)))).collect();
        out.sort();
        out
    }

    #[test]
    fn split_path_by_depth_parity() {
        let dec = star_forest_split(&graph(4, &[(0, 1), (1, 2), (2, 3)])).unwrap();
        assert_eq!(dec.forests.len(), 2);
        assert_eq!(star_pairs(&dec.forests[0]), vec![(0, 1), (2, 3)]);
        assert_eq!(star_pairs(&dec.forests[1]), vec![(1, 2)]);
    }

    #[test]
    fn split_star_rooted_at_center() {
        let dec = star_forest_split(&graph(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)])).unwrap();
        assert_eq!(dec.forests[0].stars.len(), 1);
        assert_eq!(dec.forests[0].stars[0].leaves, vec![1, 2, 3, 4, 5]);
        assert!(dec.forests[1].is_empty());
    }

    #[test]
    fn split_random_tree_is_exact_partition() {
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        let h = random_tree_hamiltonian(64, &mut rng);
        let dec = star_forest_split(&graph_of(&h)).unwrap();
        for f in &dec.forests {
            f.validate().unwrap();
        }
        dec.verify_against(&h).unwrap();
        assert_eq!(dec.forests.iter().map(StarForest::edge_count).sum::<usize>(), 63);
        assert!(matches!(star_forest_split(&complete(3)), Err(Error::NotAForest { .. })));
    }

    #[test]
    fn greedy_partition_examples() {
        let tree = graph(5, &[(0, 1), (1, 2), (1, 3), (3, 4)]);
        assert_eq!(greedy_forest_partition(&tree).len(), 1);
        assert_eq!(greedy_forest_partition(&complete(3)).len(), 2);
        let k4 = greedy_forest_partition(&complete(4));
        assert!((2..=3).contains(&k4.len()));
        assert!(k4.iter().all(is_forest));
        assert_eq!(k4.iter().map(WeightedGraph::edge_count).sum::<usize>(), 6);
    }

    #[test]
    fn star_decompose_examples() {
        let star = graph(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]).to_hamiltonian();
        let dec = star_decompose(&star, None).unwrap();
        assert_eq!(dec.forests.len(), 1);
        assert_eq!(dec.forests[0].to_hamiltonian(), star);

        let path = graph(4, &[(0, 1), (1, 2), (2, 3)]).to_hamiltonian();
        let dec = star_decompose(&path, None).unwrap();
        assert_eq!(dec.forests.len(), 2);
        let sum = dec.hamiltonians().iter().fold(Matrix::zeros(4), |acc, s| acc.add(s.matrix()).unwrap());
        assert_eq!(sum, *path.matrix());

        assert!(matches!(star_decompose(&HermitianMatrix::identity(2), None), Err(Error::NonzeroDiagonal { .. })));
    }

    #[test]
    fn star_parts_have_smaller_mcn() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let h = random_tree_hamiltonian(32, &mut rng);
        let mcn = max_column_norm(&h);
        for s in star_decompose(&h, None).unwrap().hamiltonians() {
            assert!(max_column_norm(&s) <= mcn);
        }
    }

    #[test]
    fn decomposition_json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = random_tree_hamiltonian(10, &mut rng);
        let dec = star_decompose(&h, None).unwrap();
        let json = dec.to_json();
        assert!(json.starts_with(r#"{"forests":[[{"center":"#));
        let back = StarForestDecomposition::from_json(&json, 10).unwrap();
        assert_eq!(back, dec);
        back.verify_against(&h).unwrap();
    }

    #[test]
    fn verify_rejects_overlap_and_mismatch() {
        let path = graph(3, &[(0, 1), (1, 2)]).to_hamiltonian();
        let s01 = Star::new(0, vec![1], vec![c(1.0, 0.0)]).unwrap();
        let s12 = Star::new(1, vec![2], vec![c(1.0, 0.0)]).unwrap();
        let dup = StarForestDecomposition {
            n: 3,
            forests: vec![
                StarForest { n: 3, stars: vec![s01.clone()] },
                StarForest { n: 3, stars: vec![s01.clone(), ] },
                StarForest { n: 3, stars: vec![s12.clone()] },
            ],
            source_edge_count: 2,
            forest_count: 2,
        };
        assert!(matches!(dup.verify_against(&path), Err(Error::InvalidDecomposition(_))));
        let partial = StarForestDecomposition { n: 3, forests: vec![StarForest { n: 3, stars: vec![s01] }], source_edge_count: 2, forest_count: 1 };
        assert!(arboricity_bound_report(&path, &partial).is_err());
        assert!(Star::new(0, vec![0], vec![c(1.0, 0.0)]).is_err());
        assert!(Star::new(0, vec![], vec![]).is_err());
    }

    #[test]
    fn arboricity_reports() {
        let star = graph(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).to_hamiltonian();
        let r = arboricity_bound_report(&star, &star_decompose(&star, None).unwrap()).unwrap();
        assert!(r.pass);
        assert_eq!(r.k_prime, 1);
        assert!((r.mcn - r.spectral).abs() < 1e-12 && (r.spectral - r.abs_spectral).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let tree = random_tree_hamiltonian(20, &mut rng);
        let r = arboricity_bound_report(&tree, &star_decompose(&tree, None).unwrap()).unwrap();
        assert!(r.pass && r.k_prime == 1);

        let tri = WeightedGraph::new(
            3,
            vec![
                Edge { u: 0, v: 1, weight: c(0.3, 0.7) },
                Edge { u: 1, v: 2, weight: c(-1.0, 0.2) },
                Edge { u: 0, v: 2, weight: c(0.0, -0.5) },
            ],
        )
        .unwrap()
        .to_hamiltonian();
        let r = arboricity_bound_report(&tri, &star_decompose(&tri, None).unwrap()).unwrap();
        assert!(r.pass);
        assert_eq!(r.k_prime, 2);
    }

    #[test]
    fn star_spectrum_and_norms() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let weights: Vec<C64> = (0..9).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let star = Star::new(3, vec![0, 1, 2, 4, 5, 6, 7, 8, 9], weights).unwrap();
        let h = star.to_hamiltonian(10);
        let w = star.weight_norm();
        let ev = eigvalsh(&h).unwrap();
        assert!((ev[0] + w).abs() < 1e-10 && (ev[9] - w).abs() < 1e-10);
        assert!(ev[1..9].iter().all(|l| l.abs() < 1e-10));
        let p = norm_profile(&h).unwrap();
        assert!((p.mcn - w).abs() < 1e-10 && (p.spectral - w).abs() < 1e-10 && (p.abs_spectral - w).abs() < 1e-10);
    }

    #[test]
    fn star_exponential_closed_forms() {
        let star = Star::new(0, vec![1], vec![c(1.0, 0.0)]).unwrap();
        let out = star_exponential(&star, PI / 2.0, &StateVector::basis(2, 0)).unwrap();
        assert!((out.amplitudes()[1] - c(0.0, -1.0)).norm() < 1e-15);
        assert!(out.amplitudes()[0].norm() < 1e-15);
        let psi = StateVector::normalized(vec![c(1.0, 2.0), c(-0.5, 0.1)]);
        assert_eq!(star_exponential(&star, 0.0, &psi).unwrap(), psi);
        let zero = Star { center: 0, leaves: vec![1], weights: vec![c(0.0, 0.0)] };
        assert!(matches!(star_exponential(&zero, 1.0, &psi), Err(Error::ZeroWeightStar { .. })));
    }

    #[test]
    fn star_exponential_matches_dense_evolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let n = 20;
        let leaves: Vec<usize> = (0..n).filter(|&v| v != 5 && v != 11 && v != 19).collect::<Vec<_>>()[..16].to_vec();
        let weights = (0..16).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let star = Star::new(5, leaves, weights).unwrap();
        let psi = StateVector::normalized((0..n).map(|_| c(rng.gen(), rng.gen())).collect());
        let fast = star_exponential(&star, 1.7, &psi).unwrap();
        let exact = evolve(&star.to_hamiltonian(n), 1.7, &psi).unwrap();
        assert!(fast.max_abs_diff(&exact) <= 1e-10);
    }

    #[test]
    fn trotter_exact_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let psi = StateVector::normalized((0..6).map(|_| c(rng.gen(), rng.gen())).collect());
        let star = Star::new(0, vec![1, 2], vec![c(0.4, 0.1), c(-0.3, 0.9)]).unwrap();
        let single = vec![StarForest { n: 6, stars: vec![star.clone()] }];
        let exact = evolve(&single[0].to_hamiltonian(), 2.0, &psi).unwrap();
        for steps in [1, 3, 10] {
            assert!(trotter_evolve(&single, 2.0, steps, &psi).unwrap().max_abs_diff(&exact) < 1e-12);
        }
        let other = Star::new(3, vec![4, 5], vec![c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        let commuting = vec![StarForest { n: 6, stars: vec![star] }, StarForest { n: 6, stars: vec![other] }];
        let total = commuting[0].to_hamiltonian().matrix().add(commuting[1].to_hamiltonian().matrix()).unwrap();
        let exact = evolve(&HermitianMatrix::new(total).unwrap(), 2.0, &psi).unwrap();
        let out = trotter_evolve(&commuting, 2.0, 1, &psi).unwrap();
        assert!(out.max_abs_diff(&exact) < 1e-12);
        assert!((out.norm() - 1.0).abs() < 1e-9);
        assert!(trotter_evolve(&commuting, 2.0, 0, &psi).is_err());
    }

    #[test]
    fn trotter_error_shrinks() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let h = random_tree_hamiltonian(32, &mut rng);
        let dec = star_decompose(&h, None).unwrap();
        let psi = StateVector::uniform(32);
        let exact = evolve(&h, 1.0, &psi).unwrap();
        let e8 = trotter_evolve(&dec.forests, 1.0, 8, &psi).unwrap().distance(&exact);
        let e1024 = trotter_evolve(&dec.forests, 1.0, 1024, &psi).unwrap().distance(&exact);
        assert!(e1024 < e8);
    }

    proptest::proptest! {
        #[test]
        fn trees_flatten_and_decompose(seed in 0u64..u64::MAX, n in 2usize..40) {
            let h = random_tree_hamiltonian(n, &mut ChaCha8Rng::seed_from_u64(seed));
            proptest::prop_assert!(flatten_phases(&h).unwrap().residual(&h).unwrap() <= 1e-12);
            let dec = star_decompose(&h, None).unwrap();
            proptest::prop_assert!(dec.forests.len() <= 2);
            proptest::prop_assert!(arboricity_bound_report(&h, &dec).unwrap().pass);
        }
    }
}
