//! Graphs, colorings and the planted k-colorable distribution.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::rng::{self, Stream};

/// A color in `0..k`. Colorings never carry more than 255 colors.
pub type Color = u8;

/// Undirected simple graph in compressed adjacency form.
///
/// The neighbors of `v` are `adjacency[offsets[v]..offsets[v + 1]]`, sorted
/// ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    m: usize,
    offsets: Vec<usize>,
    adjacency: Vec<usize>,
}

impl Graph {
    /// Graph on `n` vertices with no edges.
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            m: 0,
            offsets: vec![0; n + 1],
            adjacency: Vec::new(),
        }
    }

    /// Builds a graph from an undirected edge list.
    ///
    /// Rejects self-loops, out of range endpoints and repeated edges (in
    /// either orientation).
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut degree = vec![0usize; n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return param(format!("edge ({u}, {v}) out of range for n = {n}"));
            }
            if u == v {
                return param(format!("self-loop at vertex {u}"));
            }
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut adjacency = vec![0usize; 2 * edges.len()];
        for &(u, v) in edges {
            adjacency[fill[u]] = v;
            fill[u] += 1;
            adjacency[fill[v]] = u;
            fill[v] += 1;
        }
        for v in 0..n {
            let list = &mut adjacency[offsets[v]..offsets[v + 1]];
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return param(format!("duplicate edge at vertex {v}"));
            }
        }
        Ok(Graph {
            n,
            m: edges.len(),
            offsets,
            adjacency,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Average degree `2m / n` (0 for the null graph).
    pub fn estimate_degree(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            2.0 * self.m as f64 / self.n as f64
        }
    }

    /// Number of edges with both endpoints in `members`, e(U).
    pub fn induced_edge_count(&self, members: &[usize]) -> usize {
        let mut inside = vec![false; self.n];
        for &v in members {
            inside[v] = true;
        }
        members
            .iter()
            .map(|&u| {
                self.neighbors(u)
                    .iter()
                    .filter(|&&v| v > u && inside[v])
                    .count()
            })
            .sum()
    }

    /// Checks the structural invariants: sorted, loop-free, duplicate-free,
    /// symmetric adjacency, and `m` equal to half the adjacency length.
    pub fn validate(&self) -> Result<()> {
        if self.offsets.len() != self.n + 1 || self.offsets[self.n] != self.adjacency.len() {
            return param("offset table does not match adjacency length");
        }
        if self.adjacency.len() != 2 * self.m {
            return param(format!(
                "edge count {} but adjacency holds {} entries",
                self.m,
                self.adjacency.len()
            ));
        }
        for v in 0..self.n {
            let list = self.neighbors(v);
            for w in list.windows(2) {
                if w[0] >= w[1] {
                    return param(format!("neighbor list of {v} not strictly increasing"));
                }
            }
            for &u in list {
                if u >= self.n {
                    return param(format!("neighbor {u} of {v} out of range"));
                }
                if u == v {
                    return param(format!("self-loop at {v}"));
                }
                if !self.has_edge(u, v) {
                    return param(format!("edge {v}->{u} has no reverse"));
                }
            }
        }
        Ok(())
    }
}

/// Per-vertex color in `0..k`, or `None` for UNASSIGNED.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    k: usize,
    colors: Vec<Option<Color>>,
}

impl Coloring {
    pub fn new(k: usize, colors: Vec<Option<Color>>) -> Result<Self> {
        if k == 0 || k > Color::MAX as usize + 1 {
            return param(format!("color count {k} outside 1..=256"));
        }
        if let Some(c) = colors.iter().flatten().find(|&&c| c as usize >= k) {
            return param(format!("color {c} not below k = {k}"));
        }
        Ok(Coloring { k, colors })
    }

    /// Fully assigned coloring from plain color values.
    pub fn from_colors(k: usize, colors: &[Color]) -> Result<Self> {
        Self::new(k, colors.iter().map(|&c| Some(c)).collect())
    }

    pub fn unassigned(n: usize, k: usize) -> Result<Self> {
        Self::new(k, vec![None; n])
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn get(&self, v: usize) -> Option<Color> {
        self.colors[v]
    }

    /// Panics if `c` is not a valid color.
    pub fn set(&mut self, v: usize, c: Option<Color>) {
        if let Some(c) = c {
            assert!((c as usize) < self.k, "color {c} out of range");
        }
        self.colors[v] = c;
    }

    pub fn as_slice(&self) -> &[Option<Color>] {
        &self.colors
    }

    pub fn is_complete(&self) -> bool {
        self.colors.iter().all(Option::is_some)
    }

    pub fn unassigned_count(&self) -> usize {
        self.colors.iter().filter(|c| c.is_none()).count()
    }

    pub fn unassigned_vertices(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&v| self.colors[v].is_none())
            .collect()
    }

    /// Colors of a fully assigned coloring; `None` if any vertex is
    /// unassigned.
    pub fn to_full(&self) -> Option<Vec<Color>> {
        self.colors.iter().copied().collect()
    }

    /// Applies a relabeling `perm[c]` to every assigned color.
    pub fn relabeled(&self, perm: &[Color]) -> Coloring {
        Coloring {
            k: self.k,
            colors: self
                .colors
                .iter()
                .map(|c| c.map(|c| perm[c as usize]))
                .collect(),
        }
    }
}

/// A planted k-colorable instance together with its hidden coloring.
#[derive(Clone, Debug)]
pub struct PlantedInstance {
    pub graph: Graph,
    pub planted: Coloring,
    pub classes: Vec<Vec<usize>>,
    pub p: f64,
    pub seed: u64,
}

impl PlantedInstance {
    pub fn k(&self) -> usize {
        self.classes.len()
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// Planted class of `v`.
    pub fn class_of(&self, v: usize) -> Color {
        self.planted.get(v).expect("planted coloring is complete")
    }
}

/// Edge probability giving expected degree `d` in the planted model:
/// every vertex has `(k - 1) n / k` potential neighbors.
pub fn edge_probability_for_degree(n: usize, k: usize, d: f64) -> Result<f64> {
    if k < 2 || n < k {
        return param(format!("need k >= 2 and n >= k (n = {n}, k = {k})"));
    }
    let p = d * k as f64 / ((k - 1) as f64 * n as f64);
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return param(format!(
            "expected degree {d} needs edge probability {p}, outside [0, 1]"
        ));
    }
    Ok(p)
}

/// Samples a graph from the planted k-colorable distribution.
///
/// Vertices are shuffled on the partition stream and dealt round-robin into
/// `k` classes, so class sizes differ by at most one. Every cross-class pair
/// `u < v` is then visited in lexicographic order and kept with
/// probability `p`, one draw per pair on the edge stream.
pub fn generate_planted(n: usize, k: usize, p: f64, seed: u64) -> Result<PlantedInstance> {
    if !(0.0..=1.0).contains(&p) {
        return param(format!("edge probability {p} outside [0, 1]"));
    }
    if k < 2 || k > Color::MAX as usize + 1 {
        return param(format!("k = {k} must be in 2..=256"));
    }
    if n < k {
        return param(format!("n = {n} is smaller than k = {k}"));
    }

    let mut order: Vec<usize> = (0..n).collect();
    rng::shuffle(&mut rng::stream_rng(seed, Stream::Partition), &mut order);
    let mut class = vec![0 as Color; n];
    let mut classes = vec![Vec::with_capacity(n / k + 1); k];
    for (i, &v) in order.iter().enumerate() {
        class[v] = (i % k) as Color;
    }
    for v in 0..n {
        classes[class[v] as usize].push(v);
    }

    let mut edge_rng = rng::stream_rng(seed, Stream::Edges);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if class[u] != class[v] && edge_rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }

    Ok(PlantedInstance {
        graph: Graph::from_edges(n, &edges)?,
        planted: Coloring::from_colors(k, &class)?,
        classes,
        p,
        seed,
    })
}

/// Raw Hamming distance; UNASSIGNED differs from every color.
pub fn coloring_distance(a: &Coloring, b: &Coloring) -> Result<usize> {
    if a.len() != b.len() || a.k() != b.k() {
        return param(format!(
            "colorings differ in shape: n {} vs {}, k {} vs {}",
            a.len(),
            b.len(),
            a.k(),
            b.k()
        ));
    }
    Ok(a.as_slice()
        .iter()
        .zip(b.as_slice())
        .filter(|(x, y)| x != y)
        .count())
}

/// Largest `k` accepted by [`permuted_distance`].
pub const MAX_PERMUTED_K: usize = 5;

/// Minimum distance over all relabelings of `a`'s colors.
///
/// Returns the distance and the relabeling `perm` (color `c` of `a` becomes
/// `perm[c]`). Permutations are tried in lexicographic order and the first
/// minimizer wins, so equal colorings report the identity.
pub fn permuted_distance(a: &Coloring, b: &Coloring) -> Result<(usize, Vec<Color>)> {
    coloring_distance(a, b)?;
    let k = a.k();
    if k > MAX_PERMUTED_K {
        return param(format!(
            "permuted distance is exhaustive; k = {k} exceeds {MAX_PERMUTED_K}"
        ));
    }
    // agree[c][c'] = vertices where a has c and b has c'
    let mut agree = vec![vec![0usize; k]; k];
    for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
        if let (Some(x), Some(y)) = (x, y) {
            agree[*x as usize][*y as usize] += 1;
        }
    }
    let n = a.len();
    let mut best: Option<(usize, Vec<Color>)> = None;
    for perm in permutations(k) {
        let matched: usize = (0..k).map(|c| agree[c][perm[c] as usize]).sum();
        let dist = n - matched;
        if best.as_ref().is_none_or(|(d, _)| dist < *d) {
            best = Some((dist, perm));
        }
    }
    Ok(best.expect("k >= 1 has at least one permutation"))
}

/// All permutations of `0..k` in lexicographic order.
fn permutations(k: usize) -> Vec<Vec<Color>> {
    fn extend(prefix: &mut Vec<Color>, used: &mut [bool], out: &mut Vec<Vec<Color>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                prefix.push(c as Color);
                extend(prefix, used, out);
                prefix.pop();
                used[c] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::with_capacity(k), &mut vec![false; k], &mut out);
    out
}

/// Recolors exactly `flips` distinct vertices, each to a uniformly chosen
/// color different from its current one.
pub fn perturb(phi: &Coloring, flips: usize, seed: u64) -> Result<Coloring> {
    let n = phi.len();
    if flips > n {
        return param(format!("cannot flip {flips} of {n} vertices"));
    }
    if !phi.is_complete() {
        return param("perturb needs a fully assigned coloring");
    }
    let k = phi.k();
    if k < 2 && flips > 0 {
        return param("a single color cannot be perturbed");
    }
    let mut rng = rng::stream_rng(seed, Stream::Perturbation);
    let mut out = phi.clone();
    for v in rng::sample_distinct(&mut rng, n, flips) {
        let c = phi.get(v).unwrap() as usize;
        let shift = 1 + rng::index(&mut rng, k - 1);
        out.set(v, Some(((c + shift) % k) as Color));
    }
    Ok(out)
}

/// True iff no edge joins two vertices assigned the same color.
pub fn is_proper(g: &Graph, phi: &Coloring) -> bool {
    assert_eq!(g.n(), phi.len(), "graph and coloring sizes differ");
    g.edges().all(|(u, v)| match (phi.get(u), phi.get(v)) {
        (Some(a), Some(b)) => a != b,
        _ => true,
    })
}

/// Number of edges whose endpoints share an assigned color.
pub fn monochromatic_edges(g: &Graph, phi: &Coloring) -> usize {
    g.edges()
        .filter(|&(u, v)| matches!((phi.get(u), phi.get(v)), (Some(a), Some(b)) if a == b))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(k: usize, c: &[Option<Color>]) -> Coloring {
        Coloring::new(k, c.to_vec()).unwrap()
    }

    #[test]
    fn complete_tripartite_when_p_is_one() {
        let inst = generate_planted(6, 3, 1.0, 99).unwrap();
        assert_eq!(inst.graph.m(), 12);
        assert!(inst.classes.iter().all(|c| c.len() == 2));
        assert!(is_proper(&inst.graph, &inst.planted));
        inst.graph.validate().unwrap();
    }

    #[test]
    fn empty_when_p_is_zero() {
        let inst = generate_planted(3, 3, 0.0, 1).unwrap();
        assert_eq!(inst.graph.m(), 0);
        assert!(inst.classes.iter().all(|c| c.len() == 1));
    }

    #[test]
    fn unbalanced_n_gives_near_equal_classes() {
        let inst = generate_planted(11, 3, 0.5, 3).unwrap();
        let mut sizes: Vec<usize> = inst.classes.iter().map(Vec::len).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![3, 4, 4]);
    }

    #[test]
    fn generation_rejects_bad_parameters() {
        assert!(generate_planted(10, 3, 1.5, 0).is_err());
        assert!(generate_planted(10, 3, -0.1, 0).is_err());
        assert!(generate_planted(2, 3, 0.5, 0).is_err());
        assert!(generate_planted(10, 1, 0.5, 0).is_err());
    }

    #[test]
    fn edge_count_near_binomial_mean() {
        let (n, p) = (3000usize, 0.02);
        let inst = generate_planted(n, 3, p, 7).unwrap();
        // 3 class pairs of 1000 x 1000 candidate edges
        let pairs = 3.0 * 1000.0 * 1000.0;
        let mean = p * pairs;
        let sd = (pairs * p * (1.0 - p)).sqrt();
        let m = inst.graph.m() as f64;
        assert!(
            (m - mean).abs() <= 5.0 * sd,
            "m = {m}, mean = {mean}, sd = {sd}"
        );
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_planted(200, 3, 0.1, 5).unwrap();
        let b = generate_planted(200, 3, 0.1, 5).unwrap();
        assert_eq!(a.graph, b.graph);
        assert_eq!(a.planted, b.planted);
        let c = generate_planted(200, 3, 0.1, 6).unwrap();
        assert_ne!(a.graph, c.graph);
    }

    #[test]
    fn from_edges_rejects_bad_input() {
        assert!(Graph::from_edges(3, &[(0, 0)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 3)]).is_err());
    }

    #[test]
    fn distances() {
        let a = col(3, &[Some(0), Some(1), Some(2)]);
        let b = col(3, &[Some(1), Some(2), Some(0)]);
        assert_eq!(coloring_distance(&a, &a).unwrap(), 0);
        assert_eq!(coloring_distance(&a, &b).unwrap(), 3);
        let c = col(3, &[Some(0), Some(1), None]);
        assert_eq!(coloring_distance(&c, &a).unwrap(), 1);
        let short = col(3, &[Some(0)]);
        assert!(coloring_distance(&a, &short).is_err());
    }

    #[test]
    fn permuted_distance_examples() {
        let a = col(3, &[Some(0), Some(1), Some(2)]);
        let b = col(3, &[Some(1), Some(2), Some(0)]);
        let (d, perm) = permuted_distance(&a, &b).unwrap();
        assert_eq!(d, 0);
        assert_eq!(perm, vec![1, 2, 0]);
        assert_eq!(permuted_distance(&a, &a).unwrap(), (0, vec![0, 1, 2]));

        // hand enumeration of the 6 relabelings of a = (0,0,1) against
        // b = (2,2,2): only those sending 0 -> 2 reach distance 1, the
        // lexicographically first of them is (2,0,1)
        let a = col(3, &[Some(0), Some(0), Some(1)]);
        let b = col(3, &[Some(2), Some(2), Some(2)]);
        let (d, perm) = permuted_distance(&a, &b).unwrap();
        assert_eq!(d, 1);
        assert_eq!(perm[0], 2);
        assert_eq!(perm, vec![2, 0, 1]);

        let big = Coloring::from_colors(6, &[0, 1]).unwrap();
        assert!(permuted_distance(&big, &big).is_err());
    }

    #[test]
    fn perturb_examples() {
        let inst = generate_planted(3000, 3, 0.0, 1).unwrap();
        let same = perturb(&inst.planted, 0, 4).unwrap();
        assert_eq!(same, inst.planted);
        let noisy = perturb(&inst.planted, 3000 / 120, 4).unwrap();
        assert_eq!(coloring_distance(&noisy, &inst.planted).unwrap(), 25);
        let all = perturb(&inst.planted, 3000, 4).unwrap();
        assert_eq!(coloring_distance(&all, &inst.planted).unwrap(), 3000);
        assert!(perturb(&inst.planted, 3001, 4).is_err());
    }

    #[test]
    fn properness() {
        let inst = generate_planted(6, 3, 1.0, 0).unwrap();
        assert!(is_proper(&inst.graph, &inst.planted));
        let edge = Graph::from_edges(2, &[(0, 1)]).unwrap();
        assert!(!is_proper(&edge, &col(3, &[Some(0), Some(0)])));
        assert!(is_proper(&edge, &col(3, &[Some(0), None])));
    }

    #[test]
    fn degree_to_probability() {
        let p = edge_probability_for_degree(3000, 3, 60.0).unwrap();
        assert!((p - 0.03).abs() < 1e-15);
        assert!(edge_probability_for_degree(6, 3, 100.0).is_err());
    }
}
